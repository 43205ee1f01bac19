use pspin_core::estimators::*;
use pspin_core::model::ModelParams;
use pspin_core::theory::*;
use std::time::Instant;

fn main() {
    let rule = QuadratureRule::gauss_hermite(64).unwrap();
    let beta = 0.8 * beta_h(3);
    let anti = EngineChoice::Exact(ExactEngineOpts { antithetic: true, ..Default::default() });

    // replication of the nu1 sign structure at another seed
    for n in [8usize, 12, 14, 16] {
        let params = ModelParams::new(n, 3, beta, 0.5).unwrap();
        let m = nu_overlap_moments(&params, &[1], 500, &anti, 99, &rule).unwrap();
        println!("seed99 N={n}: nu1={:.4e}+-{:.1e}", m[&1].mean, m[&1].std_err);
    }

    // criterion 8 margins: N=16, 400 draws, k up to 4
    let t0 = Instant::now();
    let params = ModelParams::new(16, 3, beta, 0.5).unwrap();
    let plain = EngineChoice::Exact(ExactEngineOpts::default());
    let check = clt_moment_check(&params, 4, 400, &plain, 21, &rule).unwrap();
    for row in &check.rows {
        println!(
            "k={}: est={:.4e}+-{:.1e} pred={:.4e}  pull={:.2}",
            row.k, row.estimate.mean, row.estimate.std_err, row.prediction,
            (row.estimate.mean - row.prediction) / row.estimate.std_err
        );
    }
    println!(
        "kurtosis = {:.3} +- {:.3} (pred 3)  ({:.0}s)",
        check.kurtosis_ratio, check.kurtosis_se, t0.elapsed().as_secs_f64()
    );

    // criterion 12: cavity at N=10, 500 draws
    let t0 = Instant::now();
    let params = ModelParams::new(10, 3, beta, 0.5).unwrap();
    let rows = cavity_derivative_check(&params, &[0.25, 0.5, 0.75], 500, 31, 0.02, &rule).unwrap();
    for r in &rows {
        println!(
            "t={}: fd={:.5e} rhs={:.5e} |diff|={:.2e} 4*joint={:.2e}",
            r.t, r.finite_difference, r.formula_rhs,
            (r.finite_difference - r.formula_rhs).abs(), 4.0 * r.joint_se
        );
    }
    println!("cavity: ({:.0}s)", t0.elapsed().as_secs_f64());
}
