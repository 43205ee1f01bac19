//! Closed-form replica-symmetric predictions: Gaussian quadrature, the
//! overlap fixed point q and its moments q_hat_n, the high-temperature
//! threshold of condition (H), the free energy, the AT margin, the
//! fluctuation variances A^2/B^2/C^2, and the CLT moment laws.
//!
//! Everything here is a pure function of (p, beta, h) and a quadrature rule;
//! the estimators compare these numbers against the simulation engines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Gauss-Hermite rule normalized to the standard normal measure:
/// `E[f(Y)] ~ sum_i w_i f(y_i)` with `sum_i w_i = 1`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
}

impl QuadratureRule {
    /// Build the rule of the given order by Newton iteration on the
    /// orthonormal Hermite recurrence (physicists' convention), then map to
    /// the standard normal: y = sqrt(2) x, w -> w / sqrt(pi).
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if order < 2 || order > 256 {
            return Err(Error::InvalidParams(format!(
                "quadrature order must be in [2, 256], got {order}"
            )));
        }
        let n = order;
        let m = (n + 1) / 2;
        let mut x = vec![0.0f64; n];
        let mut w = vec![0.0f64; n];
        let mut z = 0.0f64;
        for i in 0..m {
            // initial guesses for roots in descending order
            z = match i {
                0 => {
                    let a = (2 * n + 1) as f64;
                    a.sqrt() - 1.85575 * a.powf(-1.0 / 6.0)
                }
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0f64;
            let mut converged = false;
            for _ in 0..200 {
                // orthonormal Hermite values at z
                let mut p1 = std::f64::consts::PI.powf(-0.25);
                let mut p2 = 0.0f64;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / j as f64).sqrt() * p2
                        - (((j - 1) as f64) / j as f64).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Hermite root {i} of order {n} did not converge"
                )));
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        let sqrt2 = std::f64::consts::SQRT_2;
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let nodes: Vec<f64> = x.iter().map(|&v| sqrt2 * v).collect();
        let weights: Vec<f64> = w.iter().map(|&v| v * inv_sqrt_pi).collect();
        Ok(Self {
            nodes,
            weights,
            order,
        })
    }

    pub fn default_rule() -> Self {
        Self::gauss_hermite(64).expect("default quadrature order")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `E[f(scale * Y + shift)]` for standard normal Y.
pub fn gauss_expectation<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    shift: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let mut acc = 0.0;
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(scale * y + shift);
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "integrand not finite at argument {}",
                scale * y + shift
            )));
        }
        acc += w * v;
    }
    Ok(acc)
}

/// The Gaussian field scale entering every expectation:
/// `beta sqrt(p/2) q^{(p-1)/2}`.
fn field_scale(params: &ModelParams, q: f64) -> f64 {
    let p = params.p() as f64;
    params.beta() * (p / 2.0).sqrt() * q.powf((p - 1.0) / 2.0)
}

/// Right side of the fixed-point equation:
/// `phi_p(q) = E[tanh^2(beta sqrt(p/2) q^{(p-1)/2} Y + h)]`.
pub fn phi_map(q: f64, params: &ModelParams, rule: &QuadratureRule) -> f64 {
    gauss_expectation(
        |z| z.tanh().powi(2),
        field_scale(params, q),
        params.h(),
        rule,
    )
    .expect("tanh^2 is bounded")
}

/// One root of `q = phi_p(q)` with its residual.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QRoot {
    pub q: f64,
    pub residual: f64,
}

/// All roots of the fixed-point equation in [0, 1], plus the designated
/// principal root (unique inside condition (H), else the smallest).
#[derive(Debug, Clone)]
pub struct QRootReport {
    pub roots: Vec<QRoot>,
    pub principal: QRoot,
    pub inside_h: bool,
    pub beta_h: f64,
}

const ROOT_SCAN_GRID: usize = 1024;

/// Solve the fixed point by sign-change scan plus bisection refinement.
///
/// `phi_p(0) = tanh^2 h > 0` and `phi_p(1) < 1`, so at least one root always
/// exists; inside (H) the map is a contraction and the root is unique.
pub fn solve_q(params: &ModelParams, rule: &QuadratureRule) -> Result<QRootReport> {
    if params.beta() > 64.0 {
        return Err(Error::InvalidParams(format!(
            "beta {} beyond supported root-scan range",
            params.beta()
        )));
    }
    // finer grid for the large-beta probes of the AT-line search
    let grid = if params.beta() <= 2.0 {
        ROOT_SCAN_GRID
    } else {
        16 * ROOT_SCAN_GRID
    };
    let d = |q: f64| q - phi_map(q, params, rule);

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_q = 0.0;
    let mut prev_d = d(0.0);
    if prev_d == 0.0 {
        roots.push(0.0);
    }
    for j in 1..=grid {
        let q = j as f64 / grid as f64;
        let dq = d(q);
        if dq == 0.0 {
            roots.push(q);
        } else if prev_d < 0.0 && dq > 0.0 || prev_d > 0.0 && dq < 0.0 {
            let (mut lo, mut hi) = (prev_q, q);
            let (mut dlo, _) = (prev_d, dq);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let dm = d(mid);
                if dm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (dm < 0.0) == (dlo < 0.0) {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_q = q;
        prev_d = dq;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if roots.is_empty() {
        // unreachable given the boundary signs; report rather than panic
        return Err(Error::Numerical(
            "fixed-point scan found no root in [0, 1]".into(),
        ));
    }
    let roots: Vec<QRoot> = roots
        .into_iter()
        .map(|q| QRoot {
            q,
            residual: d(q).abs(),
        })
        .collect();
    let beta_h_value = beta_h(params.p());
    let inside_h = params.beta() <= beta_h_value;
    if inside_h && roots.len() != 1 {
        return Err(Error::Numerical(format!(
            "{} roots found inside condition (H); expected exactly one",
            roots.len()
        )));
    }
    let principal = roots[0];
    Ok(QRootReport {
        roots,
        principal,
        inside_h,
        beta_h: beta_h_value,
    })
}

/// `q_hat_n = E[tanh^n(beta q^{(p-1)/2} sqrt(p/2) Y + h)]`.
pub fn q_hat(n: u32, q: f64, params: &ModelParams, rule: &QuadratureRule) -> f64 {
    gauss_expectation(
        |z| z.tanh().powi(n as i32),
        field_scale(params, q),
        params.h(),
        rule,
    )
    .expect("tanh powers are bounded")
}

/// The high-temperature threshold beta_p of condition (H): the unique
/// positive root of `8 p^2 b^2 exp(16 b^2 p) = 1/2` (strictly increasing).
pub fn beta_h(p: usize) -> f64 {
    let pf = p as f64;
    let f = |b: f64| 8.0 * pf * pf * b * b * (16.0 * b * b * pf).exp() - 0.5;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    debug_assert!(f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The replica-symmetric functional
/// `F(beta, h, q, p) = beta^2/4 [1 - p q^{p-1} + (p-1) q^p] + log 2
///  + E[log cosh(beta sqrt(p/2) q^{(p-1)/2} Y + h)]`,
/// for any q in [0, 1]. At the principal root this is the free energy Phi.
pub fn rs_free_energy(params: &ModelParams, q: f64, rule: &QuadratureRule) -> f64 {
    let p = params.p() as f64;
    let beta = params.beta();
    let poly = 1.0 - p * q.powi(params.p() as i32 - 1) + (p - 1.0) * q.powi(params.p() as i32);
    let expectation = gauss_expectation(
        |z| z.cosh().ln(),
        field_scale(params, q),
        params.h(),
        rule,
    )
    .expect("log cosh grows linearly");
    beta * beta / 4.0 * poly + std::f64::consts::LN_2 + expectation
}

/// AT margin `1 - beta^2 (p(p-1)/2) q^{p-2} (1 - 2q + q_hat_4)`; the AT
/// region is margin > 0.
pub fn at_margin(params: &ModelParams, q: f64, rule: &QuadratureRule) -> f64 {
    let p = params.p() as f64;
    let q4 = q_hat(4, q, params, rule);
    1.0 - params.beta().powi(2) * (p * (p - 1.0) / 2.0) * q.powi(params.p() as i32 - 2)
        * (1.0 - 2.0 * q + q4)
}

/// The AT boundary: the beta at which the margin crosses zero, with q
/// re-solved at every trial beta (the defining inequality is implicit in
/// beta through q). Returns `None` if no crossing below `beta_max`.
pub fn beta_at(
    p: usize,
    h: f64,
    rule: &QuadratureRule,
    beta_max: f64,
) -> Result<Option<f64>> {
    let margin_at = |beta: f64| -> Result<f64> {
        let params = ModelParams::new(p.max(2), p, beta, h)?;
        let report = solve_q(&params, rule)?;
        Ok(at_margin(&params, report.principal.q, rule))
    };
    let steps = 400;
    let mut prev_beta = 0.0; // margin(0) = 1 > 0
    for j in 1..=steps {
        let beta = beta_max * j as f64 / steps as f64;
        let margin = margin_at(beta)?;
        if margin <= 0.0 {
            let (mut lo, mut hi) = (prev_beta, beta);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if margin_at(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_beta = beta;
    }
    Ok(None)
}

/// Which exponent enters the A^2 numerator. The printed display carries
/// `q^{2(p-1)}`; the derivation's second-moment term and the four-replica
/// variance both carry `q^{2(p-2)}`, and only that choice closes the
/// beta = 0 product-measure check, so it is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum A2Variant {
    Proof,
    Printed,
}

impl Default for A2Variant {
    fn default() -> Self {
        A2Variant::Proof
    }
}

fn a2_exponent(p: usize, variant: A2Variant) -> i32 {
    match variant {
        A2Variant::Proof => 2 * (p as i32 - 2),
        A2Variant::Printed => 2 * (p as i32 - 1),
    }
}

/// Asymptotic variance of the pair term T_{1,2}:
/// `(p-1)^2 q^E (1 - 2q + q_hat_4) / (1 - beta^2 (p(p-1)/2) q^{p-2} (1 - 2q + q_hat_4))`.
pub fn variance_a2(
    params: &ModelParams,
    q: f64,
    rule: &QuadratureRule,
    variant: A2Variant,
) -> Result<f64> {
    let p = params.p() as f64;
    let q4 = q_hat(4, q, params, rule);
    let kernel = 1.0 - 2.0 * q + q4;
    let den = 1.0
        - params.beta().powi(2) * (p * (p - 1.0) / 2.0) * q.powi(params.p() as i32 - 2) * kernel;
    if den <= 0.0 {
        return Err(Error::Regime(format!(
            "A^2 denominator non-positive ({den}); beyond the AT region"
        )));
    }
    Ok((p - 1.0).powi(2) * q.powi(a2_exponent(params.p(), variant)) * kernel / den)
}

fn b2_c2_denominator(params: &ModelParams, q: f64, q4: f64) -> f64 {
    let p = params.p() as f64;
    1.0 - params.beta().powi(2)
        * (p * (p - 1.0) / 2.0)
        * q.powi(params.p() as i32 - 2)
        * (1.0 - 4.0 * q + 3.0 * q4)
}

/// Asymptotic variance of the single-replica term T_l.
pub fn variance_b2(
    params: &ModelParams,
    q: f64,
    rule: &QuadratureRule,
    variant: A2Variant,
) -> Result<f64> {
    let p = params.p() as f64;
    let q4 = q_hat(4, q, params, rule);
    let den = b2_c2_denominator(params, q, q4);
    if den <= 0.0 {
        return Err(Error::Regime(format!(
            "B^2 denominator non-positive ({den})"
        )));
    }
    let a2 = variance_a2(params, q, rule, variant)?;
    let qp2 = q.powi(params.p() as i32 - 2);
    Ok((p - 1.0) * qp2 * (q - q4) * ((p - 1.0) * qp2 + params.beta().powi(2) * (p / 2.0) * a2)
        / den)
}

/// Asymptotic variance of the constant term T.
pub fn variance_c2(
    params: &ModelParams,
    q: f64,
    rule: &QuadratureRule,
    variant: A2Variant,
) -> Result<f64> {
    let p = params.p() as f64;
    let q4 = q_hat(4, q, params, rule);
    let den = b2_c2_denominator(params, q, q4);
    if den <= 0.0 {
        return Err(Error::Regime(format!(
            "C^2 denominator non-positive ({den})"
        )));
    }
    let a2 = variance_a2(params, q, rule, variant)?;
    let b2 = variance_b2(params, q, rule, variant)?;
    let qp2 = q.powi(params.p() as i32 - 2);
    let numerator = (q4 - q * q) * ((p - 1.0) * qp2 + params.beta().powi(2) * (p / 2.0) * a2)
        + params.beta().powi(2) * p * (2.0 * q + q * q - 3.0 * q4) * b2;
    Ok((p - 1.0) * qp2 * numerator / den)
}

/// Moments of the standard Gaussian: `a(2k) = (2k)!/(2^k k!) = (2k-1)!!`,
/// odd moments 0.
pub fn gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut acc = 1.0f64;
    let mut m = 1u32;
    while m < k {
        acc *= m as f64;
        m += 2;
    }
    acc
}

/// Everything the theory predicts for a fixed (p, beta, h), bundled.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheorySolution {
    pub p: usize,
    pub beta: f64,
    pub h: f64,
    pub q: f64,
    pub q_residual: f64,
    /// q_hat_n for n = 1..=4.
    pub q_hat: BTreeMap<u32, f64>,
    pub phi: f64,
    pub at_margin: f64,
    pub beta_h: f64,
    pub inside_h: bool,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub clt_variance: f64,
    pub a2_variant: A2Variant,
}

impl TheorySolution {
    pub fn solve(
        params: &ModelParams,
        rule: &QuadratureRule,
        variant: A2Variant,
    ) -> Result<Self> {
        let report = solve_q(params, rule)?;
        let q = report.principal.q;
        let mut q_hat_map = BTreeMap::new();
        for n in 1..=4 {
            q_hat_map.insert(n, q_hat(n, q, params, rule));
        }
        let a2 = variance_a2(params, q, rule, variant)?;
        let b2 = variance_b2(params, q, rule, variant)?;
        let c2 = variance_c2(params, q, rule, variant)?;
        let p = params.p() as f64;
        let divisor = ((p - 1.0) * q.powi(params.p() as i32 - 2)).powi(2);
        Ok(Self {
            p: params.p(),
            beta: params.beta(),
            h: params.h(),
            q,
            q_residual: report.principal.residual,
            q_hat: q_hat_map,
            phi: rs_free_energy(params, q, rule),
            at_margin: at_margin(params, q, rule),
            beta_h: report.beta_h,
            inside_h: report.inside_h,
            a2,
            b2,
            c2,
            clt_variance: (a2 + 2.0 * b2 + c2) / divisor,
            a2_variant: variant,
        })
    }

    /// Predicted `nu((R - q)^k) ~ N^{-k/2} a(k) clt_variance^{k/2}`.
    pub fn clt_moment_prediction(&self, k: u32, n: usize) -> f64 {
        gaussian_moment(k) * (self.clt_variance / n as f64).powf(k as f64 / 2.0)
    }

    /// Predicted `nu(Delta_{p-1}^2)` of the four-replica statistic:
    /// `4 (p-1)^2 q^{2(p-2)} (1 - 2q + q_hat_4) / (N * at_margin)`.
    pub fn delta_sq_prediction(&self, n: usize) -> f64 {
        let p = self.p as f64;
        let q4 = self.q_hat[&4];
        4.0 * (p - 1.0).powi(2)
            * self.q.powi(self.p as i32 - 2).powi(2)
            * (1.0 - 2.0 * self.q + q4)
            / (n as f64 * self.at_margin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> QuadratureRule {
        QuadratureRule::gauss_hermite(64).unwrap()
    }

    /// Adaptive Simpson integration of f(y) phi(y) over [-12, 12]; the
    /// independent oracle for the quadrature rule.
    fn adaptive_normal_expectation<F: Fn(f64) -> f64 + Copy>(f: F, tol: f64) -> f64 {
        let density = move |y: f64| {
            f(y) * (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        fn simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b))
        }
        fn rec<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(g, a, m);
            let right = simpson(g, m, b);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(g, a, m, left, tol / 2.0, depth - 1)
                    + rec(g, m, b, right, tol / 2.0, depth - 1)
            }
        }
        let whole = simpson(&density, -12.0, 12.0);
        rec(&density, -12.0, 12.0, whole, tol, 40)
    }

    #[test]
    fn quadrature_moments() {
        for order in [32usize, 64, 128] {
            let r = QuadratureRule::gauss_hermite(order).unwrap();
            let total: f64 = r.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "order {order}: sum {total}");
            let mean = gauss_expectation(|y| y, 1.0, 0.0, &r).unwrap();
            assert!(mean.abs() < 1e-12);
            let var = gauss_expectation(|y| y * y, 1.0, 0.0, &r).unwrap();
            assert!((var - 1.0).abs() < 1e-12);
            let fourth = gauss_expectation(|y| y.powi(4), 1.0, 0.0, &r).unwrap();
            assert!((fourth - 3.0).abs() < 1e-11);
        }
    }

    #[test]
    fn quadrature_stable_under_order_doubling() {
        let r64 = QuadratureRule::gauss_hermite(64).unwrap();
        let r128 = QuadratureRule::gauss_hermite(128).unwrap();
        let integrands: Vec<(fn(f64) -> f64, f64, f64)> = vec![
            (|z| z.tanh().powi(2), 0.3, 0.5),
            (|z| z.tanh().powi(4), 0.7, 0.1),
            (|z| z.cosh().ln(), 0.5, 1.0),
            (|z| z.cosh().powi(-4), 0.4, 0.5),
        ];
        for (f, scale, shift) in integrands {
            let a = gauss_expectation(f, scale, shift, &r64).unwrap();
            let b = gauss_expectation(f, scale, shift, &r128).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn gauss_expectation_examples() {
        let r = rule();
        // constant integrand (scale 0)
        let v = gauss_expectation(|z| z.tanh().powi(2), 0.0, 0.5, &r).unwrap();
        assert!((v - 0.5f64.tanh().powi(2)).abs() < 1e-14);
        // identity integrand: E[scale Y + h] = h
        let v = gauss_expectation(|z| z, 0.8, 0.37, &r).unwrap();
        assert!((v - 0.37).abs() < 1e-12);
        // vs adaptive quadrature oracle
        let v = gauss_expectation(|z| z.tanh().powi(2), 0.3, 0.3, &r).unwrap();
        let oracle = adaptive_normal_expectation(|y| (0.3 * y + 0.3).tanh().powi(2), 1e-13);
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        // non-finite integrand is an error
        assert!(gauss_expectation(|z| 1.0 / (z - z), 1.0, 0.0, &r).is_err());
    }

    #[test]
    fn solve_q_beta_zero_and_residuals() {
        let r = rule();
        let params = ModelParams::new(8, 3, 0.0, 0.5).unwrap();
        let report = solve_q(&params, &r).unwrap();
        assert_eq!(report.roots.len(), 1);
        assert!((report.principal.q - 0.5f64.tanh().powi(2)).abs() < 1e-12);
        assert!(report.principal.residual < 1e-12);
        assert!(report.inside_h);
    }

    #[test]
    fn solve_q_large_p_tends_to_tanh_squared() {
        let r = rule();
        let params = ModelParams::new(40, 40, 0.1, 0.5).unwrap();
        let report = solve_q(&params, &r).unwrap();
        assert!((report.principal.q - 0.5f64.tanh().powi(2)).abs() < 1e-6);
    }

    #[test]
    fn solve_q_matches_damped_iteration_oracle() {
        let r = rule();
        let params = ModelParams::new(8, 3, 0.08, 0.5).unwrap();
        let report = solve_q(&params, &r).unwrap();
        // independent oracle: damped fixed-point iteration
        let mut q = 0.5;
        for _ in 0..20_000 {
            let next = 0.5 * q + 0.5 * phi_map(q, &params, &r);
            if (next - q).abs() < 1e-15 {
                q = next;
                break;
            }
            q = next;
        }
        assert!((report.principal.q - q).abs() < 1e-10);
    }

    #[test]
    fn q_hat_identities() {
        let r = rule();
        let params = ModelParams::new(8, 3, 0.08, 0.5).unwrap();
        let q = solve_q(&params, &r).unwrap().principal.q;
        // q_hat_2 at the root equals q
        assert!((q_hat(2, q, &params, &r) - q).abs() < 1e-12);
        // beta = 0: q_hat_n = tanh^n h
        let p0 = ModelParams::new(8, 3, 0.0, 0.5).unwrap();
        for n in 1..=4 {
            assert!((q_hat(n, 0.3, &p0, &r) - 0.5f64.tanh().powi(n as i32)).abs() < 1e-13);
        }
        // sech^4 = 1 - 2 tanh^2 + tanh^4 under the same measure, any q
        for qq in [0.05, q, 0.6] {
            let lhs = 1.0 - 2.0 * q_hat(2, qq, &params, &r) + q_hat(4, qq, &params, &r);
            let rhs = gauss_expectation(
                |z| z.cosh().powi(-4),
                params.beta() * (1.5f64).sqrt() * qq.powf(1.0),
                0.5,
                &r,
            )
            .unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "q={qq}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn beta_h_root_and_monotonicity() {
        // independent bisection oracle on 32 x e^{32 x} = 1/2 with x = beta^2
        let f = |x: f64| 32.0 * x * (32.0 * x).exp() - 0.5;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let expected = (0.5 * (lo + hi)).sqrt();
        let b2 = beta_h(2);
        assert!((b2 - expected).abs() < 1e-12);
        assert!((b2 - 0.1048).abs() < 2e-4);
        assert!(beta_h(3) < beta_h(2));
        // defining residual at the returned root
        for p in [2usize, 3, 4, 8] {
            let b = beta_h(p);
            let pf = p as f64;
            let res = 8.0 * pf * pf * b * b * (16.0 * b * b * pf).exp() - 0.5;
            assert!(res.abs() < 1e-12, "p={p}: {res}");
        }
    }

    #[test]
    fn free_energy_beta_zero() {
        let r = rule();
        let params = ModelParams::new(8, 3, 0.0, 0.5).unwrap();
        let q = solve_q(&params, &r).unwrap().principal.q;
        let phi = rs_free_energy(&params, q, &r);
        assert!((phi - (2.0 * 0.5f64.cosh()).ln()).abs() < 1e-12);
    }

    #[test]
    fn free_energy_derivative_identities() {
        let r = rule();
        // dPhi/dbeta = (beta/2)(1 - q^p) with q re-solved at beta +- delta
        let p = 3;
        let h = 0.5;
        let beta = 0.06;
        let delta = 1e-4;
        let phi_at = |b: f64| {
            let params = ModelParams::new(8, p, b, h).unwrap();
            let q = solve_q(&params, &r).unwrap().principal.q;
            rs_free_energy(&params, q, &r)
        };
        let fd = (phi_at(beta + delta) - phi_at(beta - delta)) / (2.0 * delta);
        let params = ModelParams::new(8, p, beta, h).unwrap();
        let q = solve_q(&params, &r).unwrap().principal.q;
        let analytic = beta / 2.0 * (1.0 - q.powi(p as i32));
        assert!((fd - analytic).abs() < 1e-6, "{fd} vs {analytic}");

        // envelope: dF/dq = 0 at the root
        let dq = 1e-5;
        let envelope =
            (rs_free_energy(&params, q + dq, &r) - rs_free_energy(&params, q - dq, &r)) / (2.0 * dq);
        assert!(envelope.abs() < 1e-8, "dF/dq = {envelope}");
    }

    #[test]
    fn at_margin_and_identity() {
        let r = rule();
        let params = ModelParams::new(8, 3, 0.0, 0.5).unwrap();
        let q = solve_q(&params, &r).unwrap().principal.q;
        assert_eq!(at_margin(&params, q, &r), 1.0);

        // margin via (1 - 2q + q_hat_4) equals margin via E[sech^4(Z)]
        let params = ModelParams::new(8, 3, 0.07, 0.5).unwrap();
        let q = solve_q(&params, &r).unwrap().principal.q;
        let margin = at_margin(&params, q, &r);
        let sech4 = gauss_expectation(
            |z| z.cosh().powi(-4),
            params.beta() * (1.5f64).sqrt() * q.powf(1.0),
            0.5,
            &r,
        )
        .unwrap();
        let margin2 = 1.0 - params.beta().powi(2) * 3.0 * q * sech4;
        assert!((margin - margin2).abs() < 1e-10);
    }

    #[test]
    fn beta_at_increases_with_p() {
        // finite crossings increase with p; past the search ceiling the
        // boundary is reported unbounded, consistent with beta_at -> inf
        let r = rule();
        let mut prev = 0.0;
        let mut saw_unbounded = false;
        for p in 3..=10 {
            match beta_at(p, 0.5, &r, 20.0).unwrap() {
                Some(b) => {
                    assert!(!saw_unbounded, "bounded after unbounded at p={p}");
                    assert!(b > prev, "beta_at({p}) = {b} not increasing");
                    prev = b;
                }
                None => saw_unbounded = true,
            }
        }
        assert!(saw_unbounded, "expected the boundary to leave [0, 20] by p=10");
    }

    #[test]
    fn variances_beta_zero_closed_forms() {
        let r = rule();
        let params = ModelParams::new(8, 3, 0.0, 0.5).unwrap();
        let q = solve_q(&params, &r).unwrap().principal.q;
        let a2 = variance_a2(&params, q, &r, A2Variant::Proof).unwrap();
        let b2 = variance_b2(&params, q, &r, A2Variant::Proof).unwrap();
        let c2 = variance_c2(&params, q, &r, A2Variant::Proof).unwrap();
        // p = 3, beta = 0: A^2 = 4 q^2 (1-q)^2, B^2 = 4 q^3 (1-q), C^2 = 0
        assert!((a2 - 4.0 * q * q * (1.0 - q) * (1.0 - q)).abs() < 1e-12);
        assert!((b2 - 4.0 * q.powi(3) * (1.0 - q)).abs() < 1e-12);
        assert!(c2.abs() < 1e-12);
    }

    #[test]
    fn c2_nonnegative_inside_h() {
        let r = rule();
        for p in [2usize, 3, 4] {
            for h in [0.1, 0.5, 1.0] {
                for frac in [0.0, 0.5, 1.0] {
                    let beta = frac * beta_h(p);
                    let params = ModelParams::new(p.max(2), p, beta, h).unwrap();
                    let q = solve_q(&params, &r).unwrap().principal.q;
                    let q4 = q_hat(4, q, &params, &r);
                    assert!(q4 >= q * q - 1e-12, "Jensen violated");
                    let c2 = variance_c2(&params, q, &r, A2Variant::Proof).unwrap();
                    assert!(c2 >= -1e-12, "C^2 = {c2} at p={p} h={h} beta={beta}");
                }
            }
        }
    }

    #[test]
    fn denominators_tend_to_one_as_beta_vanishes() {
        let r = rule();
        let params = ModelParams::new(8, 3, 1e-8, 0.5).unwrap();
        let q = solve_q(&params, &r).unwrap().principal.q;
        let margin = at_margin(&params, q, &r);
        assert!((margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment(0), 1.0);
        assert_eq!(gaussian_moment(2), 1.0);
        assert_eq!(gaussian_moment(4), 3.0);
        assert_eq!(gaussian_moment(6), 15.0);
        assert_eq!(gaussian_moment(3), 0.0);
        assert_eq!(gaussian_moment(5), 0.0);
    }

    #[test]
    fn clt_variance_beta_zero_closure() {
        let r = rule();
        for p in [2usize, 3, 5] {
            for h in [0.1f64, 0.5, 1.0] {
                let params = ModelParams::new(p.max(2), p, 0.0, h).unwrap();
                let sol = TheorySolution::solve(&params, &r, A2Variant::Proof).unwrap();
                let expected = 1.0 - h.tanh().powi(4);
                assert!(
                    (sol.clt_variance - expected).abs() < 1e-10,
                    "p={p} h={h}: {} vs {expected}",
                    sol.clt_variance
                );
            }
        }
        // the printed variant must fail the closure at p=3, h=0.5
        let params = ModelParams::new(3, 3, 0.0, 0.5).unwrap();
        let sol = TheorySolution::solve(&params, &r, A2Variant::Printed).unwrap();
        assert!((sol.clt_variance - (1.0 - 0.5f64.tanh().powi(4))).abs() > 1e-3);
    }

    #[test]
    fn prediction_arithmetic() {
        let r = rule();
        let params = ModelParams::new(8, 3, 0.0, 0.5).unwrap();
        let sol = TheorySolution::solve(&params, &r, A2Variant::Proof).unwrap();
        // delta^2 prediction at beta=0, p=3, N=100: 16 q^2 (1-q)^2 / 100
        let q = sol.q;
        let expected = 16.0 * q * q * (1.0 - q) * (1.0 - q) / 100.0;
        assert!((sol.delta_sq_prediction(100) - expected).abs() < 1e-12);
        // frozen value computed independently from q = tanh^2(0.5)
        assert!((sol.delta_sq_prediction(100) - 4.513028589650558e-3).abs() < 1e-10);
        // CLT moment prediction shapes
        assert_eq!(sol.clt_moment_prediction(3, 50), 0.0);
        let k2 = sol.clt_moment_prediction(2, 50);
        assert!((k2 - sol.clt_variance / 50.0).abs() < 1e-15);
    }
}
