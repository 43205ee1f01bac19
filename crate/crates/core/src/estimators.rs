//! Quenched (disorder-averaged) estimation nu(f) = E<f> with jackknife
//! error bars, N-scaling scans against the 1/N and 1/sqrt(N) laws, the
//! four-replica Delta^2 statistic, and the cavity interpolation-derivative
//! check.
//!
//! Disorder samples are independent tasks: draw i derives everything from
//! mix(seed, i), so runs are schedule independent and the same draws are
//! shared across N within a scan (common random numbers).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::binom;
use crate::error::{Error, Result};
use crate::exact::{
    build_gibbs_table, exact_replica_sample, exact_summary, overlap_moment_exact, ExactGates,
};
use crate::mcmc::{run_replicas, SamplerConfig, SamplerKind, ScanOrder};
use crate::model::{overlap, sample_disorder, spin_product, ModelParams, SpinConfig};
use crate::parallel::map_tasks;
use crate::rng::{mix, standard_normal};
use crate::theory::{solve_q, QuadratureRule};

// Disjoint stream tags so chain / replica randomness never reuses the
// counter space that generated the couplings of the same draw.
const TAG_SAMPLING: u64 = (1 << 63) | 1;
const TAG_CHAINS: u64 = (1 << 63) | 2;
const TAG_CAVITY_Z: u64 = (1 << 63) | 3;

/// A quenched average with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_disorder: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactCorrelation,
    ExactReplicas,
    Mcmc,
}

/// Delete-one jackknife of the plain mean over disorder samples. For the
/// mean this reproduces the classical s/sqrt(n) exactly; it is kept in
/// jackknife form because derived statistics reuse the machinery.
pub fn jackknife_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let sum: f64 = values.iter().sum();
    let mut acc = 0.0;
    for &x in values {
        let loo = (sum - x) / (n - 1) as f64;
        acc += (loo - mean) * (loo - mean);
    }
    (mean, ((n - 1) as f64 / n as f64 * acc).sqrt())
}

/// Delete-one jackknife of an arbitrary statistic of the draw table.
/// `stat` maps the retained rows to the estimate.
pub fn jackknife_statistic<F: Fn(&[Vec<f64>]) -> f64>(rows: &[Vec<f64>], stat: F) -> (f64, f64) {
    let n = rows.len();
    let full = stat(rows);
    if n < 2 {
        return (full, f64::NAN);
    }
    let mut loo_values = Vec::with_capacity(n);
    let mut scratch: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in 0..n {
        scratch.clear();
        scratch.extend(rows.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.clone()));
        loo_values.push(stat(&scratch));
    }
    let loo_mean = loo_values.iter().sum::<f64>() / n as f64;
    let var: f64 = loo_values.iter().map(|v| (v - loo_mean).powi(2)).sum();
    (full, ((n - 1) as f64 / n as f64 * var).sqrt())
}

/// Exact-engine knobs: budget gates plus the number of exact replica pairs
/// drawn per disorder sample for moments of order >= 3.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExactEngineOpts {
    pub gates: ExactGates,
    pub replica_pairs: usize,
    /// Pair every disorder draw with its negation and average the two
    /// inner estimates. The Gaussian family is symmetric, so the estimator
    /// stays unbiased while the coupling-linear noise cancels exactly;
    /// at small beta this removes the dominant variance source. One
    /// antithetic pair counts as one jackknife sample.
    #[serde(default)]
    pub antithetic: bool,
}

impl Default for ExactEngineOpts {
    fn default() -> Self {
        Self {
            gates: ExactGates::default(),
            replica_pairs: 4000,
            antithetic: false,
        }
    }
}

/// MCMC-engine knobs; per-draw chain seeds are derived internally.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McmcEngineOpts {
    pub kind: SamplerKind,
    pub scan: ScanOrder,
    pub sweeps: usize,
    pub burn_in_sweeps: usize,
    pub thin: usize,
    /// Minimum effective sample size of the overlap series per draw.
    pub min_ess: f64,
}

impl McmcEngineOpts {
    /// Defaults for system size `n`: burn-in 100 N sweeps at high
    /// temperature, then enough retained sweeps for stable means.
    pub fn default_for_n(n: usize) -> Self {
        let burn = SamplerConfig::default_burn_in(n);
        Self {
            kind: SamplerKind::Glauber,
            scan: ScanOrder::Sequential,
            sweeps: burn + 6000,
            burn_in_sweeps: burn,
            thin: 1,
            min_ess: 100.0,
        }
    }

    fn sampler(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            kind: self.kind,
            scan: self.scan,
            sweeps: self.sweeps,
            burn_in_sweeps: self.burn_in_sweeps,
            thin: self.thin,
            seed,
        }
    }
}

/// Which engine evaluates the inner Gibbs averages.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum EngineChoice {
    Exact(ExactEngineOpts),
    Mcmc(McmcEngineOpts),
}

impl EngineChoice {
    fn provenance(&self, max_k: u32) -> Provenance {
        match self {
            EngineChoice::Exact(_) if max_k >= 3 => Provenance::ExactReplicas,
            EngineChoice::Exact(_) => Provenance::ExactCorrelation,
            EngineChoice::Mcmc(_) => Provenance::Mcmc,
        }
    }
}

/// Per-draw inner averages `<(R - q)^k>` for every requested k, one shared
/// disorder realization per call.
fn exact_moments_for_disorder(
    disorder: &crate::model::Disorder,
    params: &ModelParams,
    ks: &[u32],
    q: f64,
    opts: &ExactEngineOpts,
    sampling_seed: u64,
) -> Result<Vec<f64>> {
    let n = params.n();
    let needs_two = ks.contains(&2);
    let summary = exact_summary(disorder, params, needs_two, &opts.gates)?;
    let om1 = overlap_moment_exact(&summary, 1, n)?;
    let mut sampled: Option<Vec<SpinConfig>> = None;
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        let v = match k {
            0 => 1.0,
            1 => om1 - q,
            2 => {
                let om2 = overlap_moment_exact(&summary, 2, n)?;
                om2 - 2.0 * q * om1 + q * q
            }
            _ => {
                // moments k >= 3 by statistically exact replica pairs
                if sampled.is_none() {
                    let table = build_gibbs_table(disorder, params, &opts.gates)?;
                    sampled = Some(exact_replica_sample(
                        &table,
                        2 * opts.replica_pairs,
                        sampling_seed,
                    ));
                }
                let configs = sampled.as_ref().unwrap();
                let mut acc = 0.0;
                for pair in configs.chunks_exact(2) {
                    acc += (overlap(&pair[0], &pair[1]) - q).powi(k as i32);
                }
                acc / (configs.len() / 2) as f64
            }
        };
        out.push(v);
    }
    Ok(out)
}

fn draw_moments(
    params: &ModelParams,
    ks: &[u32],
    q: f64,
    engine: &EngineChoice,
    draw_seed: u64,
) -> Result<Vec<f64>> {
    match engine {
        EngineChoice::Exact(opts) => {
            let disorder = sample_disorder(params, draw_seed)?;
            let plain = exact_moments_for_disorder(
                &disorder,
                params,
                ks,
                q,
                opts,
                mix(draw_seed, TAG_SAMPLING),
            )?;
            if !opts.antithetic {
                return Ok(plain);
            }
            let negated = crate::model::Disorder::from_values(
                disorder.n(),
                disorder.p(),
                disorder.seed(),
                disorder.couplings().iter().map(|g| -g).collect(),
            )?;
            let mirrored = exact_moments_for_disorder(
                &negated,
                params,
                ks,
                q,
                opts,
                mix(draw_seed, TAG_SAMPLING ^ 0xA5A5),
            )?;
            Ok(plain
                .iter()
                .zip(&mirrored)
                .map(|(a, b)| 0.5 * (a + b))
                .collect())
        }
        EngineChoice::Mcmc(opts) => {
            let disorder = sample_disorder(params, draw_seed)?;
            let cfg = opts.sampler(mix(draw_seed, TAG_CHAINS));
            let series = run_replicas(&disorder, params, 2, &cfg)?;
            let s = &series[0];
            if s.ess < opts.min_ess {
                return Err(Error::Quality(format!(
                    "overlap series ESS {:.1} below threshold {}",
                    s.ess, opts.min_ess
                )));
            }
            Ok(ks
                .iter()
                .map(|&k| {
                    s.values.iter().map(|r| (r - q).powi(k as i32)).sum::<f64>()
                        / s.values.len() as f64
                })
                .collect())
        }
    }
}

/// Reference overlap for (p, beta, h): always the theory module's principal
/// root, never re-fit from data.
pub fn reference_q(params: &ModelParams, rule: &QuadratureRule) -> Result<f64> {
    Ok(solve_q(params, rule)?.principal.q)
}

/// Jackknife-averaged estimates of `nu((R_{1,2} - q)^k)` for each k.
pub fn nu_overlap_moments(
    params: &ModelParams,
    k_list: &[u32],
    n_disorder: usize,
    engine: &EngineChoice,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<BTreeMap<u32, NuEstimate>> {
    if n_disorder < 2 {
        return Err(Error::InvalidParams("need at least 2 disorder samples".into()));
    }
    let q = reference_q(params, rule)?;
    let rows = map_tasks(n_disorder, |i| {
        draw_moments(params, k_list, q, engine, mix(seed, i as u64))
    });
    let rows: Vec<Vec<f64>> = rows.into_iter().collect::<Result<_>>()?;
    let max_k = k_list.iter().copied().max().unwrap_or(0);
    let mut out = BTreeMap::new();
    for (col, &k) in k_list.iter().enumerate() {
        let values: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        let (mean, std_err) = jackknife_mean(&values);
        out.insert(
            k,
            NuEstimate {
                mean,
                std_err,
                n_disorder,
                provenance: engine.provenance(if k >= 3 { k } else { max_k.min(2) }),
            },
        );
    }
    Ok(out)
}

/// One row of a scaling scan, CSV schema `N,stat,estimate,std_err,prediction,scaled`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: usize,
    pub stat: String,
    pub estimate: NuEstimate,
    pub prediction: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfAveragingScan {
    pub rows: Vec<ScanRow>,
    /// Least-squares slope of log nu((R-q)^2) against log N.
    pub slope_log_nu2: f64,
}

/// Self-averaging scan over system sizes: nu(R - q) and nu((R - q)^2) per N
/// on shared disorder draws, with the fitted log-log slope of the variance.
pub fn self_averaging_scan(
    params_template: &ModelParams,
    n_list: &[usize],
    n_disorder: usize,
    engine: &EngineChoice,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<SelfAveragingScan> {
    if n_list.is_empty() {
        return Err(Error::InvalidParams("empty N list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("N list must be strictly ascending".into()));
    }
    let mut rows = Vec::new();
    let mut log_points = Vec::new();
    for &n in n_list {
        let params = params_template.with_n(n)?;
        let moments = nu_overlap_moments(&params, &[1, 2], n_disorder, engine, seed, rule)?;
        let m1 = moments[&1];
        let m2 = moments[&2];
        let sol = crate::theory::TheorySolution::solve(&params, rule, Default::default())?;
        rows.push(ScanRow {
            n,
            stat: "nu_r_minus_q".into(),
            estimate: m1,
            prediction: 0.0,
            scaled: n as f64 * m1.mean.abs(),
        });
        rows.push(ScanRow {
            n,
            stat: "nu_r_minus_q_sq".into(),
            estimate: m2,
            prediction: sol.clt_variance / n as f64,
            scaled: n as f64 * m2.mean,
        });
        if m2.mean > 0.0 {
            log_points.push(((n as f64).ln(), m2.mean.ln()));
        }
    }
    let slope = least_squares_slope(&log_points);
    Ok(SelfAveragingScan {
        rows,
        slope_log_nu2: slope,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// The four-replica difference `Delta_{p-1} = R_13^{p-1} - R_14^{p-1} -
/// R_23^{p-1} + R_24^{p-1}` for one quadruple.
pub fn delta_p_minus_1(configs: &[SpinConfig; 4], p: usize) -> f64 {
    let e = (p - 1) as i32;
    overlap(&configs[0], &configs[2]).powi(e) - overlap(&configs[0], &configs[3]).powi(e)
        - overlap(&configs[1], &configs[2]).powi(e)
        + overlap(&configs[1], &configs[3]).powi(e)
}

/// Estimate `nu(Delta_{p-1}^2)` from four replicas per retained sample.
pub fn delta_sq_estimate(
    params: &ModelParams,
    n_disorder: usize,
    engine: &EngineChoice,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<NuEstimate> {
    if n_disorder < 2 {
        return Err(Error::InvalidParams("need at least 2 disorder samples".into()));
    }
    // q enters only through the caller's prediction; the statistic itself
    // is q-free, but we still validate the parameters solve cleanly.
    let _ = reference_q(params, rule)?;
    let values = map_tasks(n_disorder, |i| -> Result<f64> {
        let draw_seed = mix(seed, i as u64);
        match engine {
            EngineChoice::Exact(opts) => {
                let disorder = sample_disorder(params, draw_seed)?;
                let table = build_gibbs_table(&disorder, params, &opts.gates)?;
                let n_quadruples = opts.replica_pairs / 2;
                let configs = exact_replica_sample(
                    &table,
                    4 * n_quadruples,
                    mix(draw_seed, TAG_SAMPLING),
                );
                let mut acc = 0.0;
                for quad in configs.chunks_exact(4) {
                    let arr = [quad[0], quad[1], quad[2], quad[3]];
                    acc += delta_p_minus_1(&arr, params.p()).powi(2);
                }
                Ok(acc / n_quadruples as f64)
            }
            EngineChoice::Mcmc(opts) => {
                let disorder = sample_disorder(params, draw_seed)?;
                let cfg = opts.sampler(mix(draw_seed, TAG_CHAINS));
                cfg.validate()?;
                let index = crate::model::CouplingIndex::new(params.n(), params.p())?;
                let mut set = crate::mcmc::ReplicaSet::new(&disorder, &index, params, &cfg, 4)?;
                let mut acc = 0.0;
                let mut kept = 0usize;
                for s in 0..cfg.sweeps {
                    set.sweep_all();
                    if s >= cfg.burn_in_sweeps && (s - cfg.burn_in_sweeps) % cfg.thin == 0 {
                        let arr = [
                            *set.config(0),
                            *set.config(1),
                            *set.config(2),
                            *set.config(3),
                        ];
                        acc += delta_p_minus_1(&arr, params.p()).powi(2);
                        kept += 1;
                    }
                }
                Ok(acc / kept as f64)
            }
        }
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let (mean, std_err) = jackknife_mean(&values);
    Ok(NuEstimate {
        mean,
        std_err,
        n_disorder,
        provenance: match engine {
            EngineChoice::Exact(_) => Provenance::ExactReplicas,
            EngineChoice::Mcmc(_) => Provenance::Mcmc,
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CltMomentRow {
    pub k: u32,
    pub estimate: NuEstimate,
    pub prediction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CltMomentCheck {
    pub rows: Vec<CltMomentRow>,
    /// nu_4 / nu_2^2 with jackknife error; Gaussian prediction is 3.
    pub kurtosis_ratio: f64,
    pub kurtosis_se: f64,
    pub kurtosis_prediction: f64,
}

/// Moments `nu((R - q)^k)` for k = 1..k_max against the CLT predictions,
/// plus the kurtosis ratio.
pub fn clt_moment_check(
    params: &ModelParams,
    k_max: u32,
    n_disorder: usize,
    engine: &EngineChoice,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<CltMomentCheck> {
    if !(2..=6).contains(&k_max) {
        return Err(Error::InvalidParams(format!(
            "k_max must be in [2, 6], got {k_max}"
        )));
    }
    let solution =
        crate::theory::TheorySolution::solve(params, rule, Default::default())?;
    let q = solution.q;
    let ks: Vec<u32> = (1..=k_max).collect();
    let rows_raw = map_tasks(n_disorder, |i| {
        draw_moments(params, &ks, q, engine, mix(seed, i as u64))
    });
    let rows_raw: Vec<Vec<f64>> = rows_raw.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(ks.len());
    for (col, &k) in ks.iter().enumerate() {
        let values: Vec<f64> = rows_raw.iter().map(|r| r[col]).collect();
        let (mean, std_err) = jackknife_mean(&values);
        rows.push(CltMomentRow {
            k,
            estimate: NuEstimate {
                mean,
                std_err,
                n_disorder,
                provenance: engine.provenance(k),
            },
            prediction: solution.clt_moment_prediction(k, params.n()),
        });
    }

    // kurtosis ratio from the joint (k=2, k=4) per-draw table
    let (kurtosis_ratio, kurtosis_se) = if k_max >= 4 {
        let i2 = 1usize; // column of k=2
        let i4 = 3usize; // column of k=4
        jackknife_statistic(&rows_raw, |rows| {
            let m2 = rows.iter().map(|r| r[i2]).sum::<f64>() / rows.len() as f64;
            let m4 = rows.iter().map(|r| r[i4]).sum::<f64>() / rows.len() as f64;
            m4 / (m2 * m2)
        })
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(CltMomentCheck {
        rows,
        kurtosis_ratio,
        kurtosis_se,
        kurtosis_prediction: 3.0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PnScan {
    pub rows: Vec<ScanRow>,
    /// Intercept of the weighted fit p_N = phi_hat + c/N.
    pub phi_hat: f64,
    pub phi_hat_se: f64,
    pub phi_theory: f64,
    /// Fit residuals, one per N (same order as n_list).
    pub residuals: Vec<f64>,
}

/// Free-energy density samples per N with a 1/N extrapolation to compare
/// against the replica-symmetric Phi.
pub fn pn_vs_phi_scan(
    params_template: &ModelParams,
    n_list: &[usize],
    n_disorder: usize,
    gates: &ExactGates,
    seed: u64,
    rule: &QuadratureRule,
) -> Result<PnScan> {
    if n_list.len() < 2 {
        return Err(Error::InvalidParams("need at least 2 system sizes".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("N list must be strictly ascending".into()));
    }
    let mut rows = Vec::new();
    let mut fit_points = Vec::new(); // (1/N, mean, se)
    let mut phi_theory = 0.0;
    for &n in n_list {
        let params = params_template.with_n(n)?;
        let sol = crate::theory::TheorySolution::solve(&params, rule, Default::default())?;
        phi_theory = sol.phi;
        let values = map_tasks(n_disorder, |i| {
            crate::exact::pn_sample(&params, mix(seed, i as u64), gates)
        });
        let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
        let (mean, std_err) = jackknife_mean(&values);
        rows.push(ScanRow {
            n,
            stat: "pn".into(),
            estimate: NuEstimate {
                mean,
                std_err,
                n_disorder,
                provenance: Provenance::ExactCorrelation,
            },
            prediction: sol.phi,
            scaled: n as f64 * (mean - sol.phi),
        });
        fit_points.push((1.0 / n as f64, mean, std_err));
    }

    // weighted least squares for y = phi_hat + c * x; at beta = 0 the
    // variance collapses, so fall back to equal weights
    let degenerate = fit_points.iter().any(|p| !p.2.is_finite() || p.2 < 1e-14);
    let weights: Vec<f64> = fit_points
        .iter()
        .map(|p| if degenerate { 1.0 } else { 1.0 / (p.2 * p.2) })
        .collect();
    let sw: f64 = weights.iter().sum();
    let sx: f64 = fit_points.iter().zip(&weights).map(|(p, w)| w * p.0).sum();
    let sy: f64 = fit_points.iter().zip(&weights).map(|(p, w)| w * p.1).sum();
    let sxx: f64 = fit_points.iter().zip(&weights).map(|(p, w)| w * p.0 * p.0).sum();
    let sxy: f64 = fit_points.iter().zip(&weights).map(|(p, w)| w * p.0 * p.1).sum();
    let det = sw * sxx - sx * sx;
    if det.abs() < 1e-30 {
        return Err(Error::Numerical("degenerate 1/N fit design".into()));
    }
    let phi_hat = (sxx * sy - sx * sxy) / det;
    let slope = (sw * sxy - sx * sy) / det;
    let phi_hat_se = if degenerate { 0.0 } else { (sxx / det).sqrt() };
    let residuals: Vec<f64> = fit_points
        .iter()
        .map(|p| p.1 - (phi_hat + slope * p.0))
        .collect();
    Ok(PnScan {
        rows,
        phi_hat,
        phi_hat_se,
        phi_theory,
        residuals,
    })
}

/// Wald-Wolfowitz runs z-statistic on the signs of `values`; near 0 means
/// no systematic trend. Returns 0 when a side is empty.
pub fn runs_test_z(values: &[f64]) -> f64 {
    let pos = values.iter().filter(|v| **v > 0.0).count() as f64;
    let neg = values.iter().filter(|v| **v <= 0.0).count() as f64;
    if pos == 0.0 || neg == 0.0 {
        return 0.0;
    }
    let mut runs = 1.0;
    for w in values.windows(2) {
        if (w[0] > 0.0) != (w[1] > 0.0) {
            runs += 1.0;
        }
    }
    let n = pos + neg;
    let expected = 1.0 + 2.0 * pos * neg / n;
    let var = 2.0 * pos * neg * (2.0 * pos * neg - n) / (n * n * (n - 1.0));
    if var <= 0.0 {
        return 0.0;
    }
    (runs - expected) / var.sqrt()
}

/// One disorder draw of the 1-cavity system: the inner (N-1)-spin Gibbs
/// weights, the cavity field values, and the interpolation machinery needed
/// to evaluate nu_{1,t}(eps^1 eps^2) and the derivative formula.
///
/// The inner couplings are the leading C(N-1, p) entries of the N-system
/// disorder (colex ranks are width independent), and the tuples containing
/// site N are the trailing block, indexed by their (p-1)-prefix.
pub struct CavityDraw {
    coef: f64,          // beta * u_N = beta_- * u_{N-1}
    weights: Vec<f64>,  // exp(x_-(rho) - max), one per inner configuration
    g_cavity: Vec<f64>, // G(rho) = coef * sum_J g_J eta_J(rho)
    eta: Vec<f64>,      // eta_J(rho), row-major [state][j]
    n_cavity: usize,    // C(N-1, p-1)
    z_sum: f64,         // sum of the interpolation Gaussians z_J
}

impl CavityDraw {
    pub fn new(params: &ModelParams, draw_seed: u64, gate_n_max: usize) -> Result<Self> {
        let n = params.n();
        let p = params.p();
        if n > gate_n_max {
            return Err(Error::ResourceLimit {
                what: "cavity check N",
                requested: n as u64,
                limit: gate_n_max as u64,
            });
        }
        let disorder = sample_disorder(params, draw_seed)?;
        let inner_count = binom((n - 1) as u64, p as u64)? as usize;
        let cavity_count = binom((n - 1) as u64, (p - 1) as u64)? as usize;
        debug_assert_eq!(inner_count + cavity_count, disorder.couplings().len());

        let inner_masks: Vec<u64> =
            crate::combinatorics::colex_masks((n - 1) as u32, p as u32).collect();
        let cavity_masks: Vec<u64> = if p >= 2 {
            crate::combinatorics::colex_masks((n - 1) as u32, (p - 1) as u32).collect()
        } else {
            vec![0]
        };

        let coef = params.beta() * params.u_n();
        let states = 1usize << (n - 1);
        let mut x_minus = vec![0.0f64; states];
        let mut g_cavity = vec![0.0f64; states];
        let mut eta = vec![0.0f64; states * cavity_count];
        let mut x_max = f64::NEG_INFINITY;
        for bits in 0..states as u64 {
            let mut inner_sum = 0.0;
            for (r, &mask) in inner_masks.iter().enumerate() {
                inner_sum += disorder.couplings()[r] * spin_product(bits, mask);
            }
            let mag = 2.0 * bits.count_ones() as f64 - (n - 1) as f64;
            let x = coef * inner_sum + params.h() * mag;
            x_minus[bits as usize] = x;
            x_max = x_max.max(x);
            let mut cav = 0.0;
            for (j, &mask) in cavity_masks.iter().enumerate() {
                let e = spin_product(bits, mask);
                eta[bits as usize * cavity_count + j] = e;
                cav += disorder.couplings()[inner_count + j] * e;
            }
            g_cavity[bits as usize] = coef * cav;
        }
        let weights: Vec<f64> = x_minus.iter().map(|x| (x - x_max).exp()).collect();

        let z_seed = mix(draw_seed, TAG_CAVITY_Z);
        let z_sum: f64 = (0..cavity_count as u64)
            .map(|j| standard_normal(z_seed, j))
            .sum();
        Ok(Self {
            coef,
            weights,
            g_cavity,
            eta,
            n_cavity: cavity_count,
            z_sum,
        })
    }

    /// Interpolated cavity field `g_t(rho)` for every inner state.
    fn field_terms(&self, t: f64, q: f64, p: usize, h: f64) -> (f64, f64, Vec<f64>, Vec<f64>) {
        let z_coef = self.coef * q.powf((p as f64 - 1.0) / 2.0) * (1.0 - t).max(0.0).sqrt();
        let sqrt_t = t.sqrt();
        let mut c = 0.0;
        let mut s = 0.0;
        let mut a = vec![0.0f64; self.n_cavity];
        let mut b = vec![0.0f64; self.n_cavity];
        for (state, &w) in self.weights.iter().enumerate() {
            let gt = sqrt_t * self.g_cavity[state] + z_coef * self.z_sum;
            let ch = w * (gt + h).cosh();
            let sh = w * (gt + h).sinh();
            c += ch;
            s += sh;
            let row = state * self.n_cavity;
            for j in 0..self.n_cavity {
                let e = self.eta[row + j];
                a[j] += e * ch;
                b[j] += e * sh;
            }
        }
        (c, s, a, b)
    }

    /// `<eps^1 eps^2>_{1,t} = (<sinh(g_t + h)>_- / <cosh(g_t + h)>_-)^2`.
    pub fn phi(&self, t: f64, q: f64, params: &ModelParams) -> f64 {
        let (c, s, _, _) = self.field_terms(t, q, params.p(), params.h());
        (s / c).powi(2)
    }

    /// Right side of the derivative formula for f = eps^1 eps^2 (n = 2):
    /// the three bracketed replica terms summed over the cavity tuples.
    pub fn derivative_rhs(&self, t: f64, q: f64, params: &ModelParams) -> f64 {
        let (c, s, a, b) = self.field_terms(t, q, params.p(), params.h());
        let rs = s / c;
        let qp = q.powi(params.p() as i32 - 1);
        let mut total = 0.0;
        for j in 0..self.n_cavity {
            let ra = a[j] / c;
            let rb = b[j] / c;
            let term1 = ra * ra - qp;
            let term2 = ra * rs * rb - qp * rs * rs;
            let term3 = rs * rs * rb * rb - qp * rs.powi(4);
            total += term1 - 4.0 * term2 + 3.0 * term3;
        }
        (params.beta() * params.u_n()).powi(2) * total
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CavityRow {
    pub t: f64,
    pub finite_difference: f64,
    pub fd_se: f64,
    pub formula_rhs: f64,
    pub rhs_se: f64,
    /// Jackknife SE of the paired difference (common random numbers).
    pub joint_se: f64,
}

/// Default system-size gate for the cavity check.
pub const CAVITY_N_MAX: usize = 12;

/// Check the interpolation-derivative formula for the 1-cavity with
/// f = eps^1 eps^2: central difference of nu_{1,t}(f) in t against the
/// replica formula, with common random numbers across t - d, t, t + d.
pub fn cavity_derivative_check(
    params: &ModelParams,
    t_grid: &[f64],
    n_disorder: usize,
    seed: u64,
    fd_delta: f64,
    rule: &QuadratureRule,
) -> Result<Vec<CavityRow>> {
    if t_grid.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Error::InvalidParams("t grid must lie in [0, 1]".into()));
    }
    if fd_delta <= 0.0 {
        return Err(Error::InvalidParams("fd_delta must be positive".into()));
    }
    if t_grid
        .iter()
        .any(|&t| t - fd_delta < 0.0 || t + fd_delta > 1.0)
    {
        return Err(Error::InvalidParams(
            "t +- fd_delta must stay inside [0, 1]".into(),
        ));
    }
    let q = reference_q(params, rule)?;
    let per_draw = map_tasks(n_disorder, |i| -> Result<Vec<(f64, f64)>> {
        let draw = CavityDraw::new(params, mix(seed, i as u64), CAVITY_N_MAX)?;
        Ok(t_grid
            .iter()
            .map(|&t| {
                let fd = (draw.phi(t + fd_delta, q, params) - draw.phi(t - fd_delta, q, params))
                    / (2.0 * fd_delta);
                let rhs = draw.derivative_rhs(t, q, params);
                (fd, rhs)
            })
            .collect())
    });
    let per_draw: Vec<Vec<(f64, f64)>> = per_draw.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(t_grid.len());
    for (ti, &t) in t_grid.iter().enumerate() {
        let fds: Vec<f64> = per_draw.iter().map(|d| d[ti].0).collect();
        let rhss: Vec<f64> = per_draw.iter().map(|d| d[ti].1).collect();
        let diffs: Vec<f64> = fds.iter().zip(&rhss).map(|(a, b)| a - b).collect();
        let (fd_mean, fd_se) = jackknife_mean(&fds);
        let (rhs_mean, rhs_se) = jackknife_mean(&rhss);
        let (_, joint_se) = jackknife_mean(&diffs);
        rows.push(CavityRow {
            t,
            finite_difference: fd_mean,
            fd_se,
            formula_rhs: rhs_mean,
            rhs_se,
            joint_se,
        });
    }
    Ok(rows)
}
