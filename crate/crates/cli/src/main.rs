//! Batch runner for the p-spin toolkit.
//!
//! Subcommands: `theory` (closed forms), `run` (JSON-configured estimator
//! runs), `verify` (acceptance suite), plus direct shortcuts `exact`,
//! `mcmc`, and `scan`. Every run is reproducible from its seed; there is no
//! wall-clock randomness. Worker-thread count comes from PSPIN_THREADS
//! (default: available parallelism).
//!
//! Exit codes: 0 success, 1 usage/validation, 2 numerical/regime (or failed
//! verification), 3 resource gate.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pspin_core::error::Error as CoreError;
use pspin_core::estimators::{
    cavity_derivative_check, clt_moment_check, delta_sq_estimate, nu_overlap_moments,
    pn_vs_phi_scan, self_averaging_scan, EngineChoice, ExactEngineOpts,
};
use pspin_core::exact::{exact_summary, overlap_moment_exact, ExactGates};
use pspin_core::mcmc::{run_replicas, SamplerConfig, SamplerKind, ScanOrder};
use pspin_core::model::{sample_disorder, ModelParams};
use pspin_core::theory::{at_margin, beta_h, solve_q, A2Variant, QuadratureRule, TheorySolution};
use pspin_core::verify::{run_all, VerifyLevel};

use config::{EstimatorSpec, OutputFormat, ResultRecord, RunConfig, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "pspin", version, about = "p-spin glass toolkit: theory, exact enumeration, MCMC, scans")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum A2VariantArg {
    Proof,
    Printed,
}

impl From<A2VariantArg> for A2Variant {
    fn from(v: A2VariantArg) -> Self {
        match v {
            A2VariantArg::Proof => A2Variant::Proof,
            A2VariantArg::Printed => A2Variant::Printed,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Glauber,
    Metropolis,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanKindArg {
    SelfAveraging,
    PnVsPhi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Exact,
    Mcmc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form predictions (fixed point, free energy, AT margin,
    /// variances, CLT variance) for one (p, beta, h)
    Theory {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 64)]
        quad_order: usize,
        #[arg(long, value_enum, default_value_t = A2VariantArg::Proof)]
        a2_variant: A2VariantArg,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a JSON run configuration and persist a result record
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the acceptance suite and report per-criterion pass/fail
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        #[arg(long)]
        seed: u64,
    },
    /// Exact enumeration summary for one disorder draw
    Exact {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        h: f64,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Also compute the full two-point matrix
        #[arg(long)]
        two_point: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replica chains on one disorder draw, overlap series diagnostics
    Mcmc {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        h: f64,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        sweeps: usize,
        /// Defaults to 100 * N
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        #[arg(long, default_value_t = 2)]
        replicas: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Glauber)]
        kind: KindArg,
        /// Dump the raw series as CSV (sweep_index,pair_id,overlap)
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling scans: self-averaging moments or free-energy extrapolation
    Scan {
        #[arg(long, value_enum)]
        kind: ScanKindArg,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        h: f64,
        /// Comma-separated ascending system sizes, e.g. 8,10,12
        #[arg(long = "N-list", value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        n_disorder: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        quad_order: usize,
        /// Inner-average engine (pn-vs-phi supports exact only)
        #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
        engine: EngineArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
    },
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::InvalidParams(_) => 1,
        CoreError::ResourceLimit { .. } => 3,
        CoreError::Overflow(_)
        | CoreError::Numerical(_)
        | CoreError::Regime(_)
        | CoreError::Quality(_) => 2,
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CoreError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CoreError::InvalidParams(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };

    match std::env::var("PSPIN_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(t) if t >= 1 => pspin_core::parallel::configure_threads(t),
            _ => {
                eprintln!("PSPIN_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        },
        Err(_) => {}
    }

    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CoreError> {
    match cli.cmd {
        Cmd::Theory {
            p,
            beta,
            h,
            quad_order,
            a2_variant,
            out,
        } => {
            let params = ModelParams::new(p.max(2), p, beta, h)?;
            let rule = QuadratureRule::gauss_hermite(quad_order)?;
            let solution = TheorySolution::solve(&params, &rule, a2_variant.into())?;
            let text = serde_json::to_string_pretty(&solution)
                .map_err(|e| CoreError::Numerical(format!("serialize: {e}")))?;
            write_output(out.as_ref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { config } => cmd_run(&config),
        Cmd::Verify { level, seed } => {
            let level = match level {
                LevelArg::Quick => VerifyLevel::Quick,
                LevelArg::Full => VerifyLevel::Full,
            };
            let reports = run_all(level, seed);
            let mut all_ok = true;
            for r in &reports {
                println!(
                    "[{}] criterion {:2}: {} ({:.2}s) - {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.id,
                    r.name,
                    r.seconds,
                    r.detail
                );
                all_ok &= r.passed;
            }
            let passed = reports.iter().filter(|r| r.passed).count();
            println!("{passed}/{} criteria passed", reports.len());
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Cmd::Exact {
            p,
            beta,
            h,
            n,
            seed,
            two_point,
            out,
        } => {
            let params = ModelParams::new(n, p, beta, h)?;
            let disorder = sample_disorder(&params, seed)?;
            let gates = ExactGates::default();
            let summary = exact_summary(&disorder, &params, two_point, &gates)?;
            let mut payload = json!({
                "n": n, "p": p, "beta": beta, "h": h, "seed": seed,
                "log_z": summary.log_z,
                "pn_sample": summary.log_z / n as f64,
                "one_point": summary.one_point,
                "overlap_moment_1": overlap_moment_exact(&summary, 1, n)?,
            });
            if two_point {
                payload["overlap_moment_2"] =
                    json!(overlap_moment_exact(&summary, 2, n)?);
                payload["two_point"] = json!(summary.two_point);
            }
            let text = serde_json::to_string_pretty(&payload)
                .map_err(|e| CoreError::Numerical(format!("serialize: {e}")))?;
            write_output(out.as_ref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Mcmc {
            p,
            beta,
            h,
            n,
            seed,
            sweeps,
            burn_in,
            thin,
            replicas,
            kind,
            dump,
            out,
        } => {
            let params = ModelParams::new(n, p, beta, h)?;
            let disorder = sample_disorder(&params, seed)?;
            let cfg = SamplerConfig {
                kind: match kind {
                    KindArg::Glauber => SamplerKind::Glauber,
                    KindArg::Metropolis => SamplerKind::Metropolis,
                },
                scan: ScanOrder::Sequential,
                sweeps,
                burn_in_sweeps: burn_in.unwrap_or_else(|| SamplerConfig::default_burn_in(n)),
                thin,
                seed,
            };
            let series = run_replicas(&disorder, &params, replicas, &cfg)?;
            if let Some(path) = &dump {
                let mut text = String::from("sweep_index,pair_id,overlap\n");
                for s in &series {
                    for (j, v) in s.values.iter().enumerate() {
                        let sweep_index = cfg.burn_in_sweeps + j * cfg.thin;
                        text.push_str(&format!(
                            "{},{}-{},{}\n",
                            sweep_index, s.pair.0, s.pair.1, v
                        ));
                    }
                }
                std::fs::write(path, text).map_err(|e| {
                    CoreError::InvalidParams(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let payload: Vec<serde_json::Value> = series
                .iter()
                .map(|s| {
                    let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
                    json!({
                        "pair": s.pair,
                        "retained": s.values.len(),
                        "mean_overlap": mean,
                        "tau": s.tau,
                        "ess": s.ess,
                    })
                })
                .collect();
            let text = serde_json::to_string_pretty(&json!({
                "n": n, "p": p, "beta": beta, "h": h, "seed": seed,
                "sampler": cfg,
                "pairs": payload,
            }))
            .map_err(|e| CoreError::Numerical(format!("serialize: {e}")))?;
            write_output(out.as_ref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Scan {
            kind,
            p,
            beta,
            h,
            n_list,
            n_disorder,
            seed,
            quad_order,
            engine,
            out,
            format,
        } => {
            let max_n = *n_list
                .iter()
                .max()
                .ok_or_else(|| CoreError::InvalidParams("empty N list".into()))?;
            let params = ModelParams::new(max_n, p, beta, h)?;
            let rule = QuadratureRule::gauss_hermite(quad_order)?;
            if engine == EngineArg::Mcmc && kind == ScanKindArg::PnVsPhi {
                return Err(CoreError::InvalidParams(
                    "pn-vs-phi requires the exact engine".into(),
                ));
            }
            let engine = match engine {
                EngineArg::Exact => EngineChoice::Exact(ExactEngineOpts::default()),
                EngineArg::Mcmc => EngineChoice::Mcmc(
                    pspin_core::estimators::McmcEngineOpts::default_for_n(max_n),
                ),
            };
            let (rows, extra) = match kind {
                ScanKindArg::SelfAveraging => {
                    let scan =
                        self_averaging_scan(&params, &n_list, n_disorder, &engine, seed, &rule)?;
                    (scan.rows.clone(), json!({"slope_log_nu2": scan.slope_log_nu2}))
                }
                ScanKindArg::PnVsPhi => {
                    let scan = pn_vs_phi_scan(
                        &params,
                        &n_list,
                        n_disorder,
                        &ExactGates::default(),
                        seed,
                        &rule,
                    )?;
                    (
                        scan.rows.clone(),
                        json!({
                            "phi_hat": scan.phi_hat,
                            "phi_hat_se": scan.phi_hat_se,
                            "phi_theory": scan.phi_theory,
                            "residuals": scan.residuals,
                        }),
                    )
                }
            };
            let text = match format {
                FormatArg::Csv => config::rows_to_csv(&rows),
                FormatArg::Json => serde_json::to_string_pretty(&json!({
                    "rows": rows,
                    "summary": extra,
                }))
                .map_err(|e| CoreError::Numerical(format!("serialize: {e}")))?,
            };
            write_output(out.as_ref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_run(path: &PathBuf) -> Result<ExitCode, CoreError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CoreError::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&raw)
        .map_err(|e| CoreError::InvalidParams(format!("config parse: {e}")))?;
    cfg.validate()?;
    let params = cfg.model.params()?;
    let rule = QuadratureRule::gauss_hermite(cfg.quad_order)?;
    let engine = cfg.engine.choice(params.n());

    let start = Instant::now();
    let payload: serde_json::Value = match &cfg.estimator {
        EstimatorSpec::NuOverlapMoments { k_list } => {
            let moments =
                nu_overlap_moments(&params, k_list, cfg.n_disorder, &engine, cfg.seed, &rule)?;
            serde_json::to_value(&moments).unwrap()
        }
        EstimatorSpec::SelfAveragingScan { n_list } => {
            let scan =
                self_averaging_scan(&params, n_list, cfg.n_disorder, &engine, cfg.seed, &rule)?;
            if cfg.output.format == OutputFormat::Csv {
                let csv = config::rows_to_csv(&scan.rows);
                return persist_csv(&cfg, &csv, start.elapsed().as_secs_f64(), &rule);
            }
            serde_json::to_value(&scan).unwrap()
        }
        EstimatorSpec::DeltaSq {} => {
            let est = delta_sq_estimate(&params, cfg.n_disorder, &engine, cfg.seed, &rule)?;
            let sol = TheorySolution::solve(&params, &rule, A2Variant::Proof)?;
            json!({
                "estimate": est,
                "prediction": sol.delta_sq_prediction(params.n()),
            })
        }
        EstimatorSpec::CltMomentCheck { k_max } => {
            let check =
                clt_moment_check(&params, *k_max, cfg.n_disorder, &engine, cfg.seed, &rule)?;
            serde_json::to_value(&check).unwrap()
        }
        EstimatorSpec::PnVsPhiScan { n_list } => {
            let gates = match &engine {
                EngineChoice::Exact(opts) => opts.gates,
                EngineChoice::Mcmc(_) => {
                    return Err(CoreError::InvalidParams(
                        "pn_vs_phi_scan requires the exact engine".into(),
                    ))
                }
            };
            let scan = pn_vs_phi_scan(&params, n_list, cfg.n_disorder, &gates, cfg.seed, &rule)?;
            if cfg.output.format == OutputFormat::Csv {
                let csv = config::rows_to_csv(&scan.rows);
                return persist_csv(&cfg, &csv, start.elapsed().as_secs_f64(), &rule);
            }
            serde_json::to_value(&scan).unwrap()
        }
        EstimatorSpec::CavityDerivativeCheck { t_grid, fd_delta } => {
            let rows = cavity_derivative_check(
                &params,
                t_grid,
                cfg.n_disorder,
                cfg.seed,
                *fd_delta,
                &rule,
            )?;
            serde_json::to_value(&rows).unwrap()
        }
    };
    if cfg.output.format == OutputFormat::Csv {
        return Err(CoreError::InvalidParams(
            "csv output is only defined for scan estimators".into(),
        ));
    }
    let record = build_record(&cfg, payload, start.elapsed().as_secs_f64(), &rule)?;
    let text = serde_json::to_string_pretty(&record)
        .map_err(|e| CoreError::Numerical(format!("serialize: {e}")))?;
    std::fs::write(&cfg.output.path, text).map_err(|e| {
        CoreError::InvalidParams(format!("cannot write {}: {e}", cfg.output.path))
    })?;
    println!(
        "wrote {} ({:.2}s)",
        cfg.output.path,
        start.elapsed().as_secs_f64()
    );
    Ok(ExitCode::SUCCESS)
}

fn regime_flags(cfg: &RunConfig, rule: &QuadratureRule) -> Result<(bool, bool), CoreError> {
    let params = cfg.model.params()?;
    let rigorous = params.beta() <= beta_h(params.p());
    let q = solve_q(&params, rule)?.principal.q;
    let at_region = at_margin(&params, q, rule) > 0.0;
    Ok((rigorous, at_region))
}

fn build_record(
    cfg: &RunConfig,
    payload: serde_json::Value,
    seconds: f64,
    rule: &QuadratureRule,
) -> Result<ResultRecord, CoreError> {
    let (rigorous_regime, at_region) = regime_flags(cfg, rule)?;
    Ok(ResultRecord {
        schema_version: SCHEMA_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        rigorous_regime,
        at_region,
        seconds,
        payload,
    })
}

fn persist_csv(
    cfg: &RunConfig,
    csv: &str,
    seconds: f64,
    rule: &QuadratureRule,
) -> Result<ExitCode, CoreError> {
    let (rigorous_regime, at_region) = regime_flags(cfg, rule)?;
    let mut file = std::fs::File::create(&cfg.output.path).map_err(|e| {
        CoreError::InvalidParams(format!("cannot write {}: {e}", cfg.output.path))
    })?;
    // regime flags ride along as a comment header so the CSV stays greppable
    writeln!(
        file,
        "# toolkit_version={} rigorous_regime={} at_region={} seed={}",
        env!("CARGO_PKG_VERSION"),
        rigorous_regime,
        at_region,
        cfg.seed
    )
    .and_then(|_| file.write_all(csv.as_bytes()))
    .map_err(|e| CoreError::InvalidParams(format!("cannot write {}: {e}", cfg.output.path)))?;
    println!("wrote {} ({seconds:.2}s)", cfg.output.path);
    Ok(ExitCode::SUCCESS)
}
