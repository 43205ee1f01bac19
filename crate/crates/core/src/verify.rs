//! The acceptance suite: every release-gating check, runnable at two
//! budgets. `Full` runs the criteria at their stated sizes and draw counts;
//! `Quick` runs the same checks at reduced budgets as a smoke test.
//!
//! Each criterion reports pass/fail with the measured margins, so a failure
//! shows the numbers, not just a boolean.

use std::time::Instant;

use crate::combinatorics::{
    binom, card_a, card_q, card_q_bar, card_repeated_tuples, rank_colex, unrank_colex,
    BinomialTable,
};
use crate::error::Result;
use crate::estimators::{
    cavity_derivative_check, clt_moment_check, delta_sq_estimate, nu_overlap_moments,
    pn_vs_phi_scan, self_averaging_scan, EngineChoice, ExactEngineOpts, McmcEngineOpts,
};
use crate::exact::{t_decomposition, ExactGates};
use crate::model::{ModelParams, SpinConfig};
use crate::rng::{mix, stream_rng};
use crate::theory::{
    beta_h, gauss_expectation, q_hat, rs_free_energy, solve_q, A2Variant, QuadratureRule,
    TheorySolution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(usize, &str); 13] = [
    (1, "fixed point: residual and uniqueness inside (H)"),
    (2, "q-hat identities"),
    (3, "free energy derivative identities"),
    (4, "large-p limit of q"),
    (5, "beta=0 CLT-variance closure discriminates the A^2 exponent"),
    (6, "free-energy 1/N extrapolation matches Phi"),
    (7, "self-averaging: variance slope and N|nu(R-q)| boundedness"),
    (8, "CLT moments at N=16"),
    (9, "four-replica Delta^2 vs closed form at N=12"),
    (10, "T-decomposition identity"),
    (11, "MCMC validity vs exact enumeration"),
    (12, "cavity interpolation derivative (k=1)"),
    (13, "combinatorics vs brute-force enumeration"),
];

/// Parameter grid shared by the pure-theory criteria.
fn theory_grid() -> Vec<(usize, f64, f64)> {
    let mut grid = Vec::new();
    for &p in &[2usize, 3, 4, 8] {
        for &h in &[0.1, 0.5, 1.0] {
            let bh = beta_h(p);
            for beta in [0.0, 0.5 * bh, bh] {
                grid.push((p, beta, h));
            }
        }
    }
    grid
}

/// The simulation regime every scaling criterion runs in: p = 3, h = 0.5,
/// beta at 80% of the condition-(H) threshold.
fn acceptance_regime() -> (usize, f64, f64) {
    (3, 0.8 * beta_h(3), 0.5)
}

fn criterion_1(_: VerifyLevel, _: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let mut worst = 0.0f64;
    for (p, beta, h) in theory_grid() {
        let params = ModelParams::new(p.max(2), p, beta, h)?;
        let report = solve_q(&params, &rule)?;
        // inside (H) by construction; solve_q rejects multiple roots there
        if !report.inside_h {
            return Ok((false, format!("grid point (p={p}, beta={beta}) outside (H)")));
        }
        if report.roots.len() != 1 {
            return Ok((false, format!("{} roots at (p={p}, beta={beta}, h={h})", report.roots.len())));
        }
        worst = worst.max(report.principal.residual);
    }
    Ok((worst < 1e-12, format!("max residual {worst:.2e} (tolerance 1e-12)")))
}

fn criterion_2(_: VerifyLevel, _: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (mut worst_q2, mut worst_sech) = (0.0f64, 0.0f64);
    for (p, beta, h) in theory_grid() {
        let params = ModelParams::new(p.max(2), p, beta, h)?;
        let q = solve_q(&params, &rule)?.principal.q;
        worst_q2 = worst_q2.max((q_hat(2, q, &params, &rule) - q).abs());
        let kernel = 1.0 - 2.0 * q_hat(2, q, &params, &rule) + q_hat(4, q, &params, &rule);
        let scale = beta * (p as f64 / 2.0).sqrt() * q.powf((p as f64 - 1.0) / 2.0);
        let sech4 = gauss_expectation(|z| z.cosh().powi(-4), scale, h, &rule)?;
        worst_sech = worst_sech.max((kernel - sech4).abs());
    }
    Ok((
        worst_q2 < 1e-10 && worst_sech < 1e-10,
        format!("max |q_hat_2 - q| = {worst_q2:.2e}, max sech^4 identity gap = {worst_sech:.2e}"),
    ))
}

fn criterion_3(_: VerifyLevel, _: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (mut worst_env, mut worst_db) = (0.0f64, 0.0f64);
    for &p in &[2usize, 3, 4, 8] {
        for &h in &[0.1, 0.5, 1.0] {
            let bh = beta_h(p);
            for beta in [0.5 * bh, bh] {
                let params = ModelParams::new(p.max(2), p, beta, h)?;
                let q = solve_q(&params, &rule)?.principal.q;
                // envelope dF/dq = 0 at the root
                let dq = 1e-5;
                let env = (rs_free_energy(&params, q + dq, &rule)
                    - rs_free_energy(&params, q - dq, &rule))
                    / (2.0 * dq);
                worst_env = worst_env.max(env.abs());
                // dPhi/dbeta with q re-solved
                let db = 1e-4;
                let phi_at = |b: f64| -> Result<f64> {
                    let pr = params.with_beta(b)?;
                    let qq = solve_q(&pr, &rule)?.principal.q;
                    Ok(rs_free_energy(&pr, qq, &rule))
                };
                let fd = (phi_at(beta + db)? - phi_at(beta - db)?) / (2.0 * db);
                let analytic = beta / 2.0 * (1.0 - q.powi(p as i32));
                worst_db = worst_db.max((fd - analytic).abs());
            }
        }
    }
    Ok((
        worst_env < 1e-8 && worst_db < 1e-6,
        format!("max |dF/dq| = {worst_env:.2e} (tol 1e-8), max dPhi/dbeta gap = {worst_db:.2e} (tol 1e-6)"),
    ))
}

fn criterion_4(_: VerifyLevel, _: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let target = 0.5f64.tanh().powi(2);
    let gap_at = |p: usize| -> Result<f64> {
        let params = ModelParams::new(p, p, 0.1, 0.5)?;
        Ok((solve_q(&params, &rule)?.principal.q - target).abs())
    };
    let g40 = gap_at(40)?;
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    let mut gaps = Vec::new();
    for p in [5usize, 10, 20, 40] {
        let g = gap_at(p)?;
        monotone &= g < prev;
        prev = g;
        gaps.push(format!("p={p}: {g:.2e}"));
    }
    Ok((
        g40 < 1e-6 && monotone,
        format!("|q_40 - tanh^2 h| = {g40:.2e} (tol 1e-6); gaps {} monotone: {monotone}", gaps.join(", ")),
    ))
}

fn criterion_5(_: VerifyLevel, _: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let mut worst = 0.0f64;
    for &p in &[2usize, 3, 5] {
        for &h in &[0.1, 0.5, 1.0] {
            let params = ModelParams::new(p.max(2), p, 0.0, h)?;
            let sol = TheorySolution::solve(&params, &rule, A2Variant::Proof)?;
            worst = worst.max((sol.clt_variance - (1.0 - h.tanh().powi(4))).abs());
        }
    }
    let params = ModelParams::new(3, 3, 0.0, 0.5)?;
    let printed = TheorySolution::solve(&params, &rule, A2Variant::Printed)?;
    let printed_gap = (printed.clt_variance - (1.0 - 0.5f64.tanh().powi(4))).abs();
    Ok((
        worst < 1e-10 && printed_gap > 1e-3,
        format!("proof-variant closure gap {worst:.2e} (tol 1e-10); printed variant off by {printed_gap:.3} (must exceed 1e-3)"),
    ))
}

fn criterion_6(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (p, beta, h) = acceptance_regime();
    let (n_list, n_disorder): (&[usize], usize) = match level {
        VerifyLevel::Full => (&[8, 10, 12, 14, 16], 300),
        VerifyLevel::Quick => (&[8, 10, 12], 60),
    };
    let params = ModelParams::new(16, p, beta, h)?;
    let scan = pn_vs_phi_scan(&params, n_list, n_disorder, &ExactGates::default(), seed, &rule)?;
    let gap = (scan.phi_hat - scan.phi_theory).abs();
    let tol = 3.0 * scan.phi_hat_se;
    Ok((
        gap < tol,
        format!(
            "|phi_hat - Phi| = {gap:.2e} vs 3*SE = {tol:.2e} (phi_hat {:.8}, Phi {:.8}, {} draws)",
            scan.phi_hat, scan.phi_theory, n_disorder
        ),
    ))
}

fn criterion_7(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (p, beta, h) = acceptance_regime();
    let (n_list, n_disorder): (&[usize], usize) = match level {
        VerifyLevel::Full => (&[8, 10, 12, 14, 16], 300),
        VerifyLevel::Quick => (&[8, 10, 12], 60),
    };
    let engine = EngineChoice::Exact(ExactEngineOpts {
        antithetic: true,
        ..Default::default()
    });
    let params = ModelParams::new(16, p, beta, h)?;
    let scan = self_averaging_scan(&params, n_list, n_disorder, &engine, seed, &rule)?;
    let slope = scan.slope_log_nu2;
    let slope_ok = (-1.3..=-0.7).contains(&slope);
    let scaled: Vec<f64> = scan
        .rows
        .iter()
        .filter(|r| r.stat == "nu_r_minus_q")
        .map(|r| r.scaled)
        .collect();
    let max = scaled.iter().cloned().fold(0.0f64, f64::max);
    let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    let ratio_ok = ratio < 5.0;
    Ok((
        slope_ok && ratio_ok,
        format!(
            "slope = {slope:.3} (need [-1.3, -0.7]: {slope_ok}); N|nu1| max/min = {ratio:.2} (need < 5: {ratio_ok}; values {:?})",
            scaled.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        ),
    ))
}

fn criterion_8(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (p, beta, h) = acceptance_regime();
    let (n, n_disorder, pairs) = match level {
        VerifyLevel::Full => (16usize, 400usize, 4000usize),
        VerifyLevel::Quick => (12, 100, 1500),
    };
    let params = ModelParams::new(n, p, beta, h)?;
    let engine = EngineChoice::Exact(ExactEngineOpts {
        replica_pairs: pairs,
        ..Default::default()
    });
    let check = clt_moment_check(&params, 4, n_disorder, &engine, seed, &rule)?;
    let sol = TheorySolution::solve(&params, &rule, A2Variant::Proof)?;

    let k2 = &check.rows[1];
    let gap2 = (n as f64 * k2.estimate.mean - sol.clt_variance).abs();
    let tol2 = 4.0 * n as f64 * k2.estimate.std_err;
    let var_ok = gap2 < tol2;

    let kurt_ok = (2.5..=3.5).contains(&check.kurtosis_ratio);

    let mut odd_ok = true;
    let mut odd_detail = Vec::new();
    for row in check.rows.iter().filter(|r| r.k % 2 == 1) {
        let pull = row.estimate.mean.abs() / row.estimate.std_err;
        odd_ok &= pull < 4.0;
        odd_detail.push(format!("k={}: pull {:.2}", row.k, pull));
    }
    // for context when the k=3 clause trips: the overlap of one replica
    // pair has a genuine skew, nu((R-q)^3) = -2q(1-q^2)/N^2 + O(beta^2),
    // the O(N^-2) remainder the CLT allows
    let q = sol.q;
    let skew = -2.0 * q * (1.0 - q * q) / (n as f64 * n as f64);
    Ok((
        var_ok && kurt_ok && odd_ok,
        format!(
            "|N nu2 - clt_var| = {gap2:.2e} vs 4SE = {tol2:.2e} ({var_ok}); kurtosis {:.3} in [2.5, 3.5] ({kurt_ok}); odd moments {} ({odd_ok}; iid skew term -2q(1-q^2)/N^2 = {skew:.2e})",
            check.kurtosis_ratio,
            odd_detail.join(", ")
        ),
    ))
}

fn criterion_9(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (p, beta, h) = acceptance_regime();
    let (n_disorder, quadruples) = match level {
        VerifyLevel::Full => (200usize, 10_000usize),
        VerifyLevel::Quick => (40, 1500),
    };
    let engine = EngineChoice::Exact(ExactEngineOpts {
        replica_pairs: 2 * quadruples,
        ..Default::default()
    });

    // regime run against the closed form
    let params = ModelParams::new(12, p, beta, h)?;
    let sol = TheorySolution::solve(&params, &rule, A2Variant::Proof)?;
    let est = delta_sq_estimate(&params, n_disorder, &engine, seed, &rule)?;
    let gap = (est.mean - sol.delta_sq_prediction(12)).abs();
    let tol = 4.0 * est.std_err;
    let regime_ok = gap < tol;

    // beta = 0 run against the asymptotic product-measure value
    let params0 = ModelParams::new(12, p, 0.0, h)?;
    let est0 = delta_sq_estimate(&params0, n_disorder, &engine, mix(seed, 1), &rule)?;
    let q0 = 0.5f64.tanh().powi(2);
    let closed0 = 16.0 * q0 * q0 * (1.0 - q0) * (1.0 - q0) / 12.0;
    let gap0 = (est0.mean - closed0).abs();
    let tol0 = 4.0 * est0.std_err;
    let zero_ok = gap0 < tol0;

    Ok((
        regime_ok && zero_ok,
        format!(
            "regime: est {:.5} vs pred {:.5}, gap {gap:.2e} vs 4SE {tol:.2e} ({regime_ok}); beta=0: est {:.5} vs 16q^2(1-q)^2/N = {closed0:.5}, gap {gap0:.2e} vs 4SE {tol0:.2e} ({zero_ok}) [known gap: the O(N^-3/2) remainder of the closed form is ~2x the leading term at N=12]",
            est.mean, sol.delta_sq_prediction(12), est0.mean
        ),
    ))
}

fn criterion_10(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let instances = match level {
        VerifyLevel::Full => 50,
        VerifyLevel::Quick => 10,
    };
    let params = ModelParams::new(10, 3, 0.4, 0.5)?;
    let gates = ExactGates::default();
    let mut worst = 0.0f64;
    for i in 0..instances {
        let disorder = crate::model::sample_disorder(&params, mix(seed, i as u64))?;
        let mut r = stream_rng(seed, 1000 + i as u64);
        let a = SpinConfig::random(10, &mut r);
        let b = SpinConfig::random(10, &mut r);
        let td = t_decomposition(&disorder, &params, &[a, b], 0.3, &gates)?;
        worst = worst.max(td.residual());
    }
    Ok((
        worst < 1e-10,
        format!("max identity residual {worst:.2e} over {instances} instances (tol 1e-10)"),
    ))
}

fn criterion_11(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (p, beta, h) = acceptance_regime();
    let (n, n_disorder, sweeps, tv_sweeps) = match level {
        VerifyLevel::Full => (12usize, 60usize, 7200usize, 400_000usize),
        VerifyLevel::Quick => (10, 20, 4000, 150_000),
    };
    let params = ModelParams::new(n, p, beta, h)?;
    let exact = nu_overlap_moments(
        &params,
        &[1, 2],
        n_disorder,
        &EngineChoice::Exact(ExactEngineOpts::default()),
        seed,
        &rule,
    )?;
    let mcmc_opts = McmcEngineOpts {
        sweeps,
        burn_in_sweeps: 100 * n,
        ..McmcEngineOpts::default_for_n(n)
    };
    let mcmc = nu_overlap_moments(
        &params,
        &[1, 2],
        n_disorder,
        &EngineChoice::Mcmc(mcmc_opts),
        seed,
        &rule,
    )?;
    let mut moments_ok = true;
    let mut detail = Vec::new();
    for k in [1u32, 2] {
        let joint = (exact[&k].std_err.powi(2) + mcmc[&k].std_err.powi(2)).sqrt();
        let gap = (exact[&k].mean - mcmc[&k].mean).abs();
        moments_ok &= gap < 4.0 * joint;
        detail.push(format!("k={k}: gap {gap:.2e} vs 4*joint {:.2e}", 4.0 * joint));
    }

    // stationary law at N = 3 within total variation 0.01
    let tv = {
        let params3 = ModelParams::new(3, 2, 0.9, 0.3)?;
        let disorder = crate::model::sample_disorder(&params3, mix(seed, 9))?;
        let index = crate::model::CouplingIndex::new(3, 2)?;
        let mut weights = [0.0f64; 8];
        for bits in 0..8u64 {
            let cfg = SpinConfig::from_bits(bits, 3)?;
            weights[bits as usize] =
                crate::model::neg_hamiltonian(&cfg, &disorder, &params3).exp();
        }
        let z: f64 = weights.iter().sum();
        let cfg = crate::mcmc::SamplerConfig {
            kind: crate::mcmc::SamplerKind::Glauber,
            scan: crate::mcmc::ScanOrder::Sequential,
            sweeps: tv_sweeps,
            burn_in_sweeps: 2000,
            thin: 1,
            seed: mix(seed, 10),
        };
        let mut rng = stream_rng(cfg.seed, 0);
        let mut state =
            crate::model::FlipState::new(SpinConfig::random(3, &mut rng), &disorder, &index);
        let mut counts = [0u64; 8];
        for s in 0..cfg.sweeps {
            crate::mcmc::sweep(&mut state, &disorder, &index, &params3, &cfg, &mut rng);
            if s >= cfg.burn_in_sweeps {
                counts[state.config().bits() as usize] += 1;
            }
        }
        let total: u64 = counts.iter().sum();
        (0..8)
            .map(|b| (counts[b] as f64 / total as f64 - weights[b] / z).abs())
            .sum::<f64>()
            / 2.0
    };
    let tv_ok = tv < 0.01;
    Ok((
        moments_ok && tv_ok,
        format!("{}; stationary TV at N=3: {tv:.4} (tol 0.01)", detail.join("; ")),
    ))
}

fn criterion_12(level: VerifyLevel, seed: u64) -> Result<(bool, String)> {
    let rule = QuadratureRule::gauss_hermite(64)?;
    let (p, beta, h) = acceptance_regime();
    let n_disorder = match level {
        VerifyLevel::Full => 500,
        VerifyLevel::Quick => 150,
    };
    let params = ModelParams::new(10, p, beta, h)?;
    let rows = cavity_derivative_check(&params, &[0.25, 0.5, 0.75], n_disorder, seed, 0.02, &rule)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for r in &rows {
        let gap = (r.finite_difference - r.formula_rhs).abs();
        let tol = 4.0 * r.joint_se;
        ok &= gap < tol;
        detail.push(format!("t={}: gap {gap:.2e} vs 4*jointSE {tol:.2e}", r.t));
    }
    Ok((ok, detail.join("; ")))
}

fn criterion_13(_: VerifyLevel, _: u64) -> Result<(bool, String)> {
    // cardinalities vs brute-force enumeration, N <= 12, p <= 4
    fn enumerate(w: u32, r: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: u32, w: u32, r: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cur.len() == r as usize {
                out.push(cur.clone());
                return;
            }
            for i in start..=w {
                cur.push(i);
                rec(i + 1, w, r, cur, out);
                cur.pop();
            }
        }
        rec(1, w, r, &mut cur, &mut out);
        out
    }
    for n in 2..=12u64 {
        for p in 2..=4u64.min(n) {
            let all = enumerate(n as u32, p as u32);
            if card_a(n, p)? != all.len() as u128 {
                return Ok((false, format!("card_a({n},{p}) mismatch")));
            }
            for k in 1..n {
                let q = all.iter().filter(|t| *t.last().unwrap() as u64 > n - k).count() as u128;
                let qb = all.iter().filter(|t| t[t.len() - 2] as u64 > n - k).count() as u128;
                if card_q(n, k, p)? != q || card_q_bar(n, k, p)? != qb {
                    return Ok((false, format!("card_q/card_q_bar({n},{k},{p}) mismatch")));
                }
            }
        }
        // repeated-index tuples by direct odometer count
        for r in 1..=3u32 {
            let mut count = 0u128;
            let total = (n as u128).pow(r);
            for code in 0..total {
                let mut c = code;
                let mut seen = 0u64;
                let mut repeat = false;
                for _ in 0..r {
                    let d = (c % n as u128) as u64;
                    c /= n as u128;
                    if seen & (1 << d) != 0 {
                        repeat = true;
                    }
                    seen |= 1 << d;
                }
                if repeat {
                    count += 1;
                }
            }
            if card_repeated_tuples(n, r)? != count {
                return Ok((false, format!("card_repeated_tuples({n},{r}) mismatch")));
            }
        }
    }
    // rank/unrank bijection, exhaustive for w <= 16, r <= 5
    let table = BinomialTable::new(16, 5)?;
    let mut checked = 0u64;
    for w in 1..=16u32 {
        for r in 1..=5u32.min(w) {
            let total = binom(w as u64, r as u64)?;
            for k in 0..total {
                let tup = unrank_colex(k, r, w, &table)?;
                if rank_colex(&tup, &table) != k {
                    return Ok((false, format!("rank/unrank mismatch at (w={w}, r={r}, k={k})")));
                }
                checked += 1;
            }
        }
    }
    Ok((true, format!("all cardinalities match enumeration; {checked} rank/unrank round trips")))
}

/// Run one criterion at the given level; errors become failed reports.
pub fn run_criterion(id: usize, level: VerifyLevel, seed: u64) -> CriterionReport {
    let name = CRITERIA
        .iter()
        .find(|(cid, _)| *cid == id)
        .map(|(_, n)| *n)
        .unwrap_or("unknown criterion");
    let start = Instant::now();
    let outcome = match id {
        1 => criterion_1(level, seed),
        2 => criterion_2(level, seed),
        3 => criterion_3(level, seed),
        4 => criterion_4(level, seed),
        5 => criterion_5(level, seed),
        6 => criterion_6(level, seed),
        7 => criterion_7(level, seed),
        8 => criterion_8(level, seed),
        9 => criterion_9(level, seed),
        10 => criterion_10(level, seed),
        11 => criterion_11(level, seed),
        12 => criterion_12(level, seed),
        13 => criterion_13(level, seed),
        _ => Err(crate::error::Error::InvalidParams(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, detail) = match outcome {
        Ok((p, d)) => (p, d),
        Err(e) => (false, format!("error: {e}")),
    };
    // criteria with an explicit wall-clock budget in their statement
    let budget = match id {
        1 | 2 => Some(1.0),
        3 => Some(5.0),
        6 | 7 => Some(600.0),
        13 => Some(10.0),
        _ => None,
    };
    let detail = if let Some(b) = budget {
        if seconds > b {
            passed = false;
        }
        format!("{detail}; runtime {seconds:.2}s (budget {b}s)")
    } else {
        detail
    };
    CriterionReport {
        id,
        name,
        passed,
        detail,
        seconds,
    }
}

/// Run the whole suite in order.
pub fn run_all(level: VerifyLevel, seed: u64) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .map(|(id, _)| run_criterion(*id, level, seed))
        .collect()
}
