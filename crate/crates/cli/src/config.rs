//! JSON run-configuration schema and the persisted result record.
//!
//! A config pins everything needed to reproduce a run bit for bit: model,
//! engine and its gates, the estimator with its parameters, and the seed.
//! There is deliberately no wall-clock seeding anywhere; a missing seed is
//! a parse error.

use serde::{Deserialize, Serialize};

use pspin_core::error::{Error, Result};
use pspin_core::estimators::{EngineChoice, ExactEngineOpts, McmcEngineOpts, ScanRow};
use pspin_core::exact::ExactGates;
use pspin_core::mcmc::{SamplerKind, ScanOrder};
use pspin_core::model::ModelParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    pub p: usize,
    pub beta: f64,
    pub h: f64,
}

impl ModelSpec {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.p, self.beta, self.h)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EngineSpec {
    Exact {
        #[serde(default)]
        gates: Option<ExactGates>,
        #[serde(default)]
        replica_pairs: Option<usize>,
        #[serde(default)]
        antithetic: bool,
    },
    Mcmc {
        #[serde(default)]
        sampler: Option<SamplerKind>,
        #[serde(default)]
        sweeps: Option<usize>,
        #[serde(default)]
        burn_in_sweeps: Option<usize>,
        #[serde(default)]
        thin: Option<usize>,
        #[serde(default)]
        min_ess: Option<f64>,
    },
}

impl EngineSpec {
    pub fn choice(&self, n: usize) -> EngineChoice {
        match self {
            EngineSpec::Exact {
                gates,
                replica_pairs,
                antithetic,
            } => {
                let defaults = ExactEngineOpts::default();
                EngineChoice::Exact(ExactEngineOpts {
                    gates: gates.unwrap_or(defaults.gates),
                    replica_pairs: replica_pairs.unwrap_or(defaults.replica_pairs),
                    antithetic: *antithetic,
                })
            }
            EngineSpec::Mcmc {
                sampler,
                sweeps,
                burn_in_sweeps,
                thin,
                min_ess,
            } => {
                let defaults = McmcEngineOpts::default_for_n(n);
                EngineChoice::Mcmc(McmcEngineOpts {
                    kind: sampler.unwrap_or(SamplerKind::Glauber),
                    scan: ScanOrder::Sequential,
                    sweeps: sweeps.unwrap_or(defaults.sweeps),
                    burn_in_sweeps: burn_in_sweeps.unwrap_or(defaults.burn_in_sweeps),
                    thin: thin.unwrap_or(defaults.thin),
                    min_ess: min_ess.unwrap_or(defaults.min_ess),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EstimatorSpec {
    NuOverlapMoments { k_list: Vec<u32> },
    SelfAveragingScan { n_list: Vec<usize> },
    DeltaSq {},
    CltMomentCheck { k_max: u32 },
    PnVsPhiScan { n_list: Vec<usize> },
    CavityDerivativeCheck {
        t_grid: Vec<f64>,
        #[serde(default = "default_fd_delta")]
        fd_delta: f64,
    },
}

fn default_fd_delta() -> f64 {
    0.02
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: String,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub engine: EngineSpec,
    pub estimator: EstimatorSpec,
    pub n_disorder: usize,
    pub seed: u64,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    pub output: OutputSpec,
}

fn default_quad_order() -> usize {
    64
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParams(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.model.params()?;
        if self.n_disorder == 0 {
            return Err(Error::InvalidParams("n_disorder must be positive".into()));
        }
        Ok(())
    }
}

/// Persisted record: config echo, toolkit version, regime flags computed
/// from theory (never user supplied), timing, and the result payload.
#[derive(Debug, Serialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub toolkit_version: &'static str,
    pub config: RunConfig,
    pub rigorous_regime: bool,
    pub at_region: bool,
    pub seconds: f64,
    pub payload: serde_json::Value,
}

/// CSV rendering of scan rows: `N,stat,estimate,std_err,prediction,scaled`.
pub fn rows_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("N,stat,estimate,std_err,prediction,scaled\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.stat, r.estimate.mean, r.estimate.std_err, r.prediction, r.scaled
        ));
    }
    out
}
