//! Exact computations over the full configuration space for small N:
//! partition function, one- and two-point functions, statistically exact
//! Gibbs replica sampling, the T-decomposition of the overlap, and
//! free-energy density samples.
//!
//! Sweeps walk configurations in Gray-code order so each step flips a single
//! spin and costs O(C(N-1, p-1)) instead of O(C(N, p)); log Z uses a
//! max-shifted streaming sum. 2^N is accepted on purpose, guarded by gates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{
    neg_hamiltonian, sample_disorder, spin_product, CouplingIndex, Disorder, FlipState,
    ModelParams, SpinConfig,
};
use crate::rng::stream_rng;

/// Budget gates for the exact engine. Exceeding a gate is an error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExactGates {
    /// Largest N for a plain sweep (log Z + one-point).
    pub n_max: usize,
    /// Largest N when the two-point matrix is requested.
    pub n_max_two_point: usize,
    /// Largest N for the full-weight-table replica sampler.
    pub n_max_sampling: usize,
    /// Largest (N, p) for the T-decomposition (N^{p-1} tuples per sweep).
    pub t_decomp_n_max: usize,
    pub t_decomp_p_max: usize,
}

impl Default for ExactGates {
    fn default() -> Self {
        Self {
            n_max: 24,
            n_max_two_point: 20,
            n_max_sampling: 20,
            t_decomp_n_max: 12,
            t_decomp_p_max: 3,
        }
    }
}

/// Exact Gibbs summary: log Z, magnetizations, and optionally the full
/// two-point matrix (row-major N x N, symmetric, unit diagonal).
#[derive(Debug, Clone)]
pub struct ExactSummary {
    pub log_z: f64,
    pub one_point: Vec<f64>,
    pub two_point: Option<Vec<f64>>,
}

impl ExactSummary {
    pub fn two_point_at(&self, i: usize, j: usize) -> Option<f64> {
        let n = self.one_point.len();
        self.two_point.as_ref().map(|m| m[i * n + j])
    }
}

fn check_gate(what: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::ResourceLimit {
            what,
            requested: n as u64,
            limit: limit as u64,
        });
    }
    Ok(())
}

/// Walk all 2^N configurations in Gray-code order, calling
/// `visit(step, state_bits, neg_h)` for each. The first visit is the all-down
/// configuration. `neg_h` is maintained incrementally from flip deltas.
fn gray_sweep<F: FnMut(u64, u64, f64)>(
    disorder: &Disorder,
    params: &ModelParams,
    index: &CouplingIndex,
    mut visit: F,
) {
    let n = params.n();
    let start = SpinConfig::all_down(n);
    let mut state = FlipState::new(start, disorder, index);
    let mut x = neg_hamiltonian(&start, disorder, params);
    let total: u64 = 1u64 << n;
    visit(0, state.config().bits(), x);
    for k in 1..total {
        let site = k.trailing_zeros() as usize;
        x += state.delta(site, params);
        state.apply_flip(site, disorder, index);
        visit(k, state.config().bits(), x);
    }
}

/// Exact log Z, one-point and optional two-point functions via two
/// Gray-code sweeps (max pass, then a max-shifted accumulation pass).
pub fn exact_summary(
    disorder: &Disorder,
    params: &ModelParams,
    want_two_point: bool,
    gates: &ExactGates,
) -> Result<ExactSummary> {
    let n = params.n();
    check_gate("exact sweep N", n, gates.n_max)?;
    if want_two_point {
        check_gate("exact two-point N", n, gates.n_max_two_point)?;
    }
    let index = CouplingIndex::new(n, params.p())?;

    let mut x_max = f64::NEG_INFINITY;
    gray_sweep(disorder, params, &index, |_, _, x| {
        if x > x_max {
            x_max = x;
        }
    });

    let mut z = 0.0f64;
    let mut spins = vec![-1.0f64; n];
    let mut s1 = vec![0.0f64; n];
    let mut pair = if want_two_point {
        vec![0.0f64; n * n]
    } else {
        Vec::new()
    };
    let mut prev_bits = 0u64;
    gray_sweep(disorder, params, &index, |k, bits, x| {
        if k > 0 {
            let site = (bits ^ prev_bits).trailing_zeros() as usize;
            spins[site] = -spins[site];
        }
        prev_bits = bits;
        let w = (x - x_max).exp();
        z += w;
        for i in 0..n {
            s1[i] += w * spins[i];
        }
        if want_two_point {
            for i in 0..n {
                let wi = w * spins[i];
                let row = i * n;
                for j in (i + 1)..n {
                    pair[row + j] += wi * spins[j];
                }
            }
        }
    });

    let log_z = x_max + z.ln();
    let one_point: Vec<f64> = s1.iter().map(|s| s / z).collect();
    let two_point = if want_two_point {
        let mut m = vec![0.0f64; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let v = pair[i * n + j] / z;
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        Some(m)
    } else {
        None
    };
    Ok(ExactSummary {
        log_z,
        one_point,
        two_point,
    })
}

/// Exact replica overlap moments from the summary:
/// `<R> = (1/N) sum_i m_i^2`, `<R^2> = (1/N^2) sum_ij <s_i s_j>^2`.
pub fn overlap_moment_exact(summary: &ExactSummary, k: u32, n: usize) -> Result<f64> {
    match k {
        1 => {
            let s: f64 = summary.one_point.iter().map(|m| m * m).sum();
            Ok(s / n as f64)
        }
        2 => {
            let two = summary
                .two_point
                .as_ref()
                .ok_or_else(|| Error::InvalidParams("two-point matrix not computed".into()))?;
            let s: f64 = two.iter().map(|c| c * c).sum();
            Ok(s / (n * n) as f64)
        }
        _ => Err(Error::InvalidParams(format!(
            "overlap_moment_exact supports k in {{1, 2}}, got {k}"
        ))),
    }
}

/// Normalized cumulative Gibbs weights over all 2^N configurations in
/// Gray-visit order; supports statistically exact replica draws.
#[derive(Debug, Clone)]
pub struct GibbsTable {
    cumulative: Vec<f64>,
    n: usize,
}

pub fn build_gibbs_table(
    disorder: &Disorder,
    params: &ModelParams,
    gates: &ExactGates,
) -> Result<GibbsTable> {
    let n = params.n();
    check_gate("gibbs table N", n, gates.n_max_sampling)?;
    let index = CouplingIndex::new(n, params.p())?;
    let mut x_max = f64::NEG_INFINITY;
    gray_sweep(disorder, params, &index, |_, _, x| {
        if x > x_max {
            x_max = x;
        }
    });
    let mut cumulative = vec![0.0f64; 1usize << n];
    let mut acc = 0.0f64;
    gray_sweep(disorder, params, &index, |k, _, x| {
        acc += (x - x_max).exp();
        cumulative[k as usize] = acc;
    });
    Ok(GibbsTable { cumulative, n })
}

impl GibbsTable {
    /// One exact draw from the Gibbs distribution.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> SpinConfig {
        let total = *self.cumulative.last().unwrap();
        let u: f64 = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        let k = k.min(self.cumulative.len() - 1) as u64;
        let bits = k ^ (k >> 1); // Gray-visit index -> configuration
        SpinConfig::from_bits(bits, self.n).expect("gray bits within range")
    }
}

/// `count` independent exact-Gibbs replicas, from stream (seed, 0).
pub fn exact_replica_sample(table: &GibbsTable, count: usize, seed: u64) -> Vec<SpinConfig> {
    let mut r = stream_rng(seed, 0);
    (0..count).map(|_| table.sample(&mut r)).collect()
}

/// The four components of the overlap decomposition for one replica pair,
/// together with the left side `R^{p-1} - q^{p-1}` they must reproduce.
#[derive(Debug, Clone, Copy)]
pub struct TDecomposition {
    /// Pair term built from both centered replicas.
    pub t_pair: f64,
    /// Single-replica terms (first and second replica).
    pub t_single: (f64, f64),
    /// Constant term built from the Gibbs averages alone.
    pub t_const: f64,
    /// `R_{l,l'}^{p-1} - q^{p-1}`, the exact sum of the four components.
    pub lhs_check: f64,
}

impl TDecomposition {
    pub fn residual(&self) -> f64 {
        (self.t_pair + self.t_single.0 + self.t_single.1 + self.t_const - self.lhs_check).abs()
    }
}

/// Gibbs averages `<prod_{i in mask} sigma_i>` for each requested mask,
/// accumulated in one Gray sweep.
pub fn gibbs_product_averages(
    disorder: &Disorder,
    params: &ModelParams,
    masks: &[u64],
    gates: &ExactGates,
) -> Result<Vec<f64>> {
    let n = params.n();
    check_gate("product average N", n, gates.n_max)?;
    let index = CouplingIndex::new(n, params.p())?;
    let mut x_max = f64::NEG_INFINITY;
    gray_sweep(disorder, params, &index, |_, _, x| {
        if x > x_max {
            x_max = x;
        }
    });
    let mut z = 0.0f64;
    let mut sums = vec![0.0f64; masks.len()];
    gray_sweep(disorder, params, &index, |_, bits, x| {
        let w = (x - x_max).exp();
        z += w;
        for (s, &mask) in sums.iter_mut().zip(masks) {
            *s += w * spin_product(bits, mask);
        }
    });
    Ok(sums.into_iter().map(|s| s / z).collect())
}

/// Enumerate all (p-1)-tuples over {1..N}^{p-1} (repeats allowed), reduced
/// to parity masks, and evaluate the T-decomposition for the first two
/// replicas in `replicas` at reference overlap value `q`.
pub fn t_decomposition(
    disorder: &Disorder,
    params: &ModelParams,
    replicas: &[SpinConfig],
    q: f64,
    gates: &ExactGates,
) -> Result<TDecomposition> {
    if replicas.len() < 2 {
        return Err(Error::InvalidParams(
            "t_decomposition needs at least two replicas".into(),
        ));
    }
    let n = params.n();
    let p = params.p();
    check_gate("t-decomposition N", n, gates.t_decomp_n_max)?;
    check_gate("t-decomposition p", p, gates.t_decomp_p_max)?;

    let r = p - 1;
    // all N^{p-1} tuples as parity masks (XOR cancels repeated indices)
    let tuple_count = (n as u64).pow(r as u32);
    let mut tuple_masks = Vec::with_capacity(tuple_count as usize);
    let mut digits = vec![0usize; r];
    loop {
        let mask = digits.iter().fold(0u64, |m, &d| m ^ (1u64 << d));
        tuple_masks.push(mask);
        let mut pos = 0;
        loop {
            if pos == r {
                break;
            }
            digits[pos] += 1;
            if digits[pos] < n {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        if pos == r {
            break;
        }
    }

    // Gibbs averages b for each distinct reduced mask
    let mut unique: Vec<u64> = tuple_masks.clone();
    unique.sort_unstable();
    unique.dedup();
    let averages = gibbs_product_averages(disorder, params, &unique, gates)?;
    let b_of = |mask: u64| -> f64 {
        let idx = unique.binary_search(&mask).expect("mask present");
        averages[idx]
    };

    let (ca, cb) = (replicas[0], replicas[1]);
    let norm = 1.0 / (n as f64).powi(r as i32);
    let (mut t_pair, mut t_a, mut t_b, mut bb) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &mask in &tuple_masks {
        let b = b_of(mask);
        let ea = spin_product(ca.bits(), mask);
        let eb = spin_product(cb.bits(), mask);
        t_pair += (ea - b) * (eb - b);
        t_a += (ea - b) * b;
        t_b += (eb - b) * b;
        bb += b * b;
    }
    let q_pow = q.powi(r as i32);
    let lhs = crate::model::overlap(&ca, &cb).powi(r as i32) - q_pow;
    Ok(TDecomposition {
        t_pair: t_pair * norm,
        t_single: (t_a * norm, t_b * norm),
        t_const: bb * norm - q_pow,
        lhs_check: lhs,
    })
}

/// One free-energy density sample `(1/N) log Z` for the disorder drawn from
/// `seed`; averaging these over seeds estimates p_N.
pub fn pn_sample(params: &ModelParams, seed: u64, gates: &ExactGates) -> Result<f64> {
    let disorder = sample_disorder(params, seed)?;
    let summary = exact_summary(&disorder, params, false, gates)?;
    Ok(summary.log_z / params.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::overlap;

    fn gates() -> ExactGates {
        ExactGates::default()
    }

    /// Direct summation over all configurations without Gray code or
    /// incremental deltas; the oracle for the sweep.
    fn naive_summary(disorder: &Disorder, params: &ModelParams) -> (f64, Vec<f64>, Vec<f64>) {
        let n = params.n();
        let mut weights = Vec::with_capacity(1 << n);
        let mut x_max = f64::NEG_INFINITY;
        for bits in 0..(1u64 << n) {
            let cfg = SpinConfig::from_bits(bits, n).unwrap();
            let x = neg_hamiltonian(&cfg, disorder, params);
            x_max = x_max.max(x);
            weights.push((bits, x));
        }
        let mut z = 0.0;
        let mut m = vec![0.0; n];
        let mut two = vec![0.0; n * n];
        for &(bits, x) in &weights {
            let w = (x - x_max).exp();
            z += w;
            let cfg = SpinConfig::from_bits(bits, n).unwrap();
            for i in 0..n {
                m[i] += w * cfg.spin(i);
                for j in 0..n {
                    two[i * n + j] += w * cfg.spin(i) * cfg.spin(j);
                }
            }
        }
        for v in m.iter_mut() {
            *v /= z;
        }
        for v in two.iter_mut() {
            *v /= z;
        }
        (x_max + z.ln(), m, two)
    }

    #[test]
    fn zero_disorder_closed_form() {
        let params = ModelParams::new(11, 3, 1.7, 0.5).unwrap();
        let d = zeroed(&params);
        let s = exact_summary(&d, &params, false, &gates()).unwrap();
        let expected = 11.0 * (2.0 * 0.5f64.cosh()).ln();
        assert!((s.log_z - expected).abs() < 1e-10);
        for m in &s.one_point {
            assert!((m - 0.5f64.tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_independent_spins() {
        // N=2, p=2, g12=0, h=0.5: Z = (2 cosh 0.5)^2
        let params = ModelParams::new(2, 2, 1.0, 0.5).unwrap();
        let d = zeroed(&params);
        let s = exact_summary(&d, &params, true, &gates()).unwrap();
        assert!((s.log_z.exp() - (2.0 * 0.5f64.cosh()).powi(2)).abs() < 1e-10);
        assert!((s.two_point_at(0, 1).unwrap() - 0.5f64.tanh().powi(2)).abs() < 1e-12);
    }

    fn zeroed(params: &ModelParams) -> Disorder {
        let count = crate::combinatorics::binom(params.n() as u64, params.p() as u64).unwrap();
        Disorder::from_values(params.n(), params.p(), 0, vec![0.0; count as usize]).unwrap()
    }

    #[test]
    fn sweep_matches_naive_enumeration() {
        for (n, p, seed) in [(3usize, 2usize, 1u64), (8, 3, 2), (10, 4, 3), (12, 3, 4)] {
            let params = ModelParams::new(n, p, 0.9, 0.45).unwrap();
            let d = sample_disorder(&params, seed).unwrap();
            let s = exact_summary(&d, &params, true, &gates()).unwrap();
            let (log_z, m, two) = naive_summary(&d, &params);
            assert!((s.log_z - log_z).abs() < 1e-10, "N={n} p={p}");
            for i in 0..n {
                assert!((s.one_point[i] - m[i]).abs() < 1e-10);
                for j in 0..n {
                    assert!((s.two_point_at(i, j).unwrap() - two[i * n + j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn overlap_moments_product_measure() {
        let params = ModelParams::new(10, 3, 0.0, 0.5).unwrap();
        let d = sample_disorder(&params, 5).unwrap();
        let s = exact_summary(&d, &params, true, &gates()).unwrap();
        let q = 0.5f64.tanh().powi(2);
        let r1 = overlap_moment_exact(&s, 1, 10).unwrap();
        assert!((r1 - q).abs() < 1e-12);
        // iid: <R^2> = q^2 + (1 - q^2)/N
        let r2 = overlap_moment_exact(&s, 2, 10).unwrap();
        assert!((r2 - (q * q + (1.0 - q * q) / 10.0)).abs() < 1e-12);
    }

    #[test]
    fn overlap_moment_bounds_and_errors() {
        let params = ModelParams::new(8, 2, 0.6, 0.5).unwrap();
        let d = sample_disorder(&params, 9).unwrap();
        let s = exact_summary(&d, &params, true, &gates()).unwrap();
        let r2 = overlap_moment_exact(&s, 2, 8).unwrap();
        assert!((0.0..=1.0).contains(&r2));
        let s_no = exact_summary(&d, &params, false, &gates()).unwrap();
        assert!(overlap_moment_exact(&s_no, 2, 8).is_err());
        assert!(overlap_moment_exact(&s, 3, 8).is_err());
    }

    #[test]
    fn gates_reject_large_systems() {
        let params = ModelParams::new(30, 2, 0.1, 0.5).unwrap();
        let d = sample_disorder(&params, 1).unwrap();
        match exact_summary(&d, &params, false, &gates()) {
            Err(Error::ResourceLimit { .. }) => {}
            other => panic!("expected resource limit, got {other:?}"),
        }
    }

    #[test]
    fn replica_sampler_is_exact_at_beta_zero() {
        let params = ModelParams::new(10, 2, 0.0, 0.5).unwrap();
        let d = sample_disorder(&params, 33).unwrap();
        let table = build_gibbs_table(&d, &params, &gates()).unwrap();
        let draws = exact_replica_sample(&table, 10_000, 7);
        assert_eq!(draws.len(), 10_000);
        let mut mean = 0.0;
        for c in &draws {
            mean += c.magnetization() as f64 / 10.0;
        }
        mean /= 10_000.0;
        // sites iid with mean tanh(h); SE = sqrt((1 - m^2) / (N * draws))
        let m = 0.5f64.tanh();
        let se = ((1.0 - m * m) / (10.0 * 10_000.0)).sqrt();
        assert!((mean - m).abs() < 4.0 * se, "{mean} vs {m}");
        assert!(exact_replica_sample(&table, 0, 7).is_empty());
    }

    #[test]
    fn replica_pairs_reproduce_exact_first_moment() {
        let params = ModelParams::new(10, 3, 0.35, 0.5).unwrap();
        let d = sample_disorder(&params, 12).unwrap();
        let s = exact_summary(&d, &params, false, &gates()).unwrap();
        let exact_r = overlap_moment_exact(&s, 1, 10).unwrap();
        let table = build_gibbs_table(&d, &params, &gates()).unwrap();
        let draws = exact_replica_sample(&table, 20_000, 3);
        let (mut m1, mut m2) = (0.0, 0.0);
        let pairs = draws.len() / 2;
        for c in draws.chunks_exact(2) {
            let r = overlap(&c[0], &c[1]);
            m1 += r;
            m2 += r * r;
        }
        m1 /= pairs as f64;
        m2 /= pairs as f64;
        let se = ((m2 - m1 * m1) / pairs as f64).sqrt();
        assert!((m1 - exact_r).abs() < 4.0 * se, "{m1} vs {exact_r}");
    }

    #[test]
    fn t_decomposition_identity_and_symmetry() {
        let params = ModelParams::new(10, 3, 0.4, 0.5).unwrap();
        let d = sample_disorder(&params, 77).unwrap();
        let mut r = stream_rng(77, 9);
        for _ in 0..5 {
            let a = SpinConfig::random(10, &mut r);
            let b = SpinConfig::random(10, &mut r);
            let td = t_decomposition(&d, &params, &[a, b], 0.3, &gates()).unwrap();
            assert!(td.residual() < 1e-10, "residual {}", td.residual());
            // swapping the replicas swaps the single terms, fixes the rest
            let ts = t_decomposition(&d, &params, &[b, a], 0.3, &gates()).unwrap();
            assert!((td.t_pair - ts.t_pair).abs() < 1e-12);
            assert!((td.t_const - ts.t_const).abs() < 1e-12);
            assert!((td.t_single.0 - ts.t_single.1).abs() < 1e-12);
            assert!((td.t_single.1 - ts.t_single.0).abs() < 1e-12);
        }
    }

    #[test]
    fn t_decomposition_product_measure_values() {
        // beta = 0, p = 3: b is tanh^2 h off-diagonal and 1 on repeats, so
        // T = (1 - q^2)/N exactly at q = tanh^2 h; in particular T -> 0.
        let params = ModelParams::new(10, 3, 0.0, 0.5).unwrap();
        let d = sample_disorder(&params, 2).unwrap();
        let q = 0.5f64.tanh().powi(2);
        let mut r = stream_rng(1, 1);
        let a = SpinConfig::random(10, &mut r);
        let b = SpinConfig::random(10, &mut r);
        let td = t_decomposition(&d, &params, &[a, b], q, &gates()).unwrap();
        let expected_t = (1.0 - q * q) / 10.0;
        assert!((td.t_const - expected_t).abs() < 1e-12, "{}", td.t_const);
        assert!(td.residual() < 1e-10);
    }

    #[test]
    fn pn_sample_closed_forms() {
        // beta = 0: exactly log(2 cosh h) for every seed
        let params = ModelParams::new(12, 3, 0.0, 0.5).unwrap();
        for seed in 0..5 {
            let v = pn_sample(&params, seed, &gates()).unwrap();
            assert!((v - (2.0 * 0.5f64.cosh()).ln()).abs() < 1e-12);
        }
        // N=2 closed form: Z = e^a 2cosh(2h) + 2 e^{-a}, a = beta u_2 g12
        let params2 = ModelParams::new(2, 2, 0.8, 0.5).unwrap();
        let d = sample_disorder(&params2, 4).unwrap();
        let a = 0.8 * params2.u_n() * d.couplings()[0];
        let z = a.exp() * 2.0 * (2.0 * 0.5f64).cosh() + 2.0 * (-a).exp();
        let s = exact_summary(&d, &params2, false, &gates()).unwrap();
        assert!((s.log_z - z.ln()).abs() < 1e-12);
    }

    #[test]
    fn pn_variance_shrinks_with_beta() {
        let var_at = |beta: f64| {
            let params = ModelParams::new(12, 3, beta, 0.5).unwrap();
            let vals: Vec<f64> = (0..100)
                .map(|s| pn_sample(&params, s, &gates()).unwrap())
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
        };
        assert!(var_at(0.01) < var_at(0.1));
    }
}
