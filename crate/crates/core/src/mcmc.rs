//! Markov-chain sampling of the Gibbs measure for N beyond enumeration
//! range: Glauber / Metropolis single-site dynamics, multi-replica runs on
//! shared disorder, overlap time series, and autocorrelation diagnostics.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{overlap, CouplingIndex, Disorder, FlipState, ModelParams, SpinConfig};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Glauber,
    Metropolis,
}

/// Site visit order within one sweep. Sequential scan vectorizes cache
/// updates and is valid for the stationary law; the random-scan variant is
/// the literally reversible kernel used by the detailed-balance test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanOrder {
    Sequential,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    #[serde(default = "default_scan")]
    pub scan: ScanOrder,
    pub sweeps: usize,
    pub burn_in_sweeps: usize,
    pub thin: usize,
    pub seed: u64,
}

fn default_scan() -> ScanOrder {
    ScanOrder::Sequential
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in_sweeps {
            return Err(Error::InvalidParams(format!(
                "sweeps ({}) must exceed burn_in_sweeps ({})",
                self.sweeps, self.burn_in_sweeps
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParams("thin must be >= 1".into()));
        }
        Ok(())
    }

    /// Burn-in default from the high-temperature regime: 100 * N sweeps.
    pub fn default_burn_in(n: usize) -> usize {
        100 * n
    }
}

/// Glauber (heat-bath) flip probability for a move with energy gain `delta`
/// in -H: `1 / (1 + exp(-delta))`.
pub fn glauber_flip_probability(delta: f64) -> f64 {
    1.0 / (1.0 + (-delta).exp())
}

/// Metropolis acceptance probability `min(1, exp(delta))`.
pub fn metropolis_accept_probability(delta: f64) -> f64 {
    delta.exp().min(1.0)
}

/// One sweep = N single-site updates. Returns the number of accepted flips.
pub fn sweep<R: Rng>(
    state: &mut FlipState,
    disorder: &Disorder,
    index: &CouplingIndex,
    params: &ModelParams,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> usize {
    let n = params.n();
    let mut accepted = 0;
    for step in 0..n {
        let site = match cfg.scan {
            ScanOrder::Sequential => step,
            ScanOrder::Random => rng.random_range(0..n),
        };
        let delta = state.delta(site, params);
        let flip = match cfg.kind {
            SamplerKind::Glauber => rng.random::<f64>() < glauber_flip_probability(delta),
            SamplerKind::Metropolis => {
                delta >= 0.0 || rng.random::<f64>() < delta.exp()
            }
        };
        if flip {
            state.apply_flip(site, disorder, index);
            accepted += 1;
        }
    }
    accepted
}

/// Independent chains on the same disorder, one rng stream per replica.
pub struct ReplicaSet<'a> {
    chains: Vec<FlipState>,
    rngs: Vec<ChaCha8Rng>,
    disorder: &'a Disorder,
    index: &'a CouplingIndex,
    params: ModelParams,
    cfg: SamplerConfig,
}

impl<'a> ReplicaSet<'a> {
    /// Replica `r` draws its initial state and all its updates from the
    /// stream `stream_ids[r]` of `cfg.seed`.
    pub fn with_streams(
        disorder: &'a Disorder,
        index: &'a CouplingIndex,
        params: &ModelParams,
        cfg: &SamplerConfig,
        stream_ids: &[u64],
    ) -> Result<Self> {
        cfg.validate()?;
        let mut chains = Vec::with_capacity(stream_ids.len());
        let mut rngs = Vec::with_capacity(stream_ids.len());
        for &id in stream_ids {
            let mut rng = stream_rng(cfg.seed, id);
            let config = SpinConfig::random(params.n(), &mut rng);
            chains.push(FlipState::new(config, disorder, index));
            rngs.push(rng);
        }
        Ok(Self {
            chains,
            rngs,
            disorder,
            index,
            params: *params,
            cfg: *cfg,
        })
    }

    pub fn new(
        disorder: &'a Disorder,
        index: &'a CouplingIndex,
        params: &ModelParams,
        cfg: &SamplerConfig,
        n_replicas: usize,
    ) -> Result<Self> {
        let ids: Vec<u64> = (0..n_replicas as u64).collect();
        Self::with_streams(disorder, index, params, cfg, &ids)
    }

    pub fn n_replicas(&self) -> usize {
        self.chains.len()
    }

    pub fn sweep_all(&mut self) {
        for (chain, rng) in self.chains.iter_mut().zip(&mut self.rngs) {
            sweep(chain, self.disorder, self.index, &self.params, &self.cfg, rng);
        }
    }

    pub fn config(&self, replica: usize) -> &SpinConfig {
        self.chains[replica].config()
    }
}

/// Overlap time series for one replica pair, with its integrated
/// autocorrelation time and effective sample size.
#[derive(Debug, Clone)]
pub struct OverlapSeries {
    /// Replica labels (l, l') with l < l'.
    pub pair: (usize, usize),
    /// One overlap per retained sweep.
    pub values: Vec<f64>,
    pub tau: f64,
    pub ess: f64,
}

/// Integrated autocorrelation time by self-consistent windowing (window
/// grows until it covers 6 tau) and the matching effective sample size
/// `ess = len / (2 tau)`.
pub fn autocorrelation(series: &[f64]) -> Result<(f64, f64)> {
    let len = series.len();
    if len < 100 {
        return Err(Error::InvalidParams(format!(
            "autocorrelation needs >= 100 points, got {len}"
        )));
    }
    let mean = series.iter().sum::<f64>() / len as f64;
    let c0 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / len as f64;
    if c0 <= 1e-24 * (1.0 + mean * mean) {
        return Err(Error::Numerical(
            "degenerate (constant) series has no autocorrelation time".into(),
        ));
    }
    let max_lag = len / 3;
    let mut tau = 0.5;
    let mut window = max_lag;
    for k in 1..=max_lag {
        let mut ck = 0.0;
        for t in 0..len - k {
            ck += (series[t] - mean) * (series[t + k] - mean);
        }
        ck /= len as f64;
        tau += ck / c0;
        if k as f64 >= 6.0 * tau {
            window = k;
            break;
        }
    }
    let _ = window;
    let tau = tau.max(0.5);
    Ok((tau, len as f64 / (2.0 * tau)))
}

/// Run `n_replicas` independent chains on the same disorder and record the
/// overlap for every pair after burn-in, one value per retained sweep.
pub fn run_replicas(
    disorder: &Disorder,
    params: &ModelParams,
    n_replicas: usize,
    cfg: &SamplerConfig,
) -> Result<Vec<OverlapSeries>> {
    let ids: Vec<u64> = (0..n_replicas as u64).collect();
    run_replicas_with_streams(disorder, params, &ids, cfg)
}

/// As [`run_replicas`] but with explicit per-replica stream ids, so that
/// relabeling replicas is exactly a permutation of the streams.
pub fn run_replicas_with_streams(
    disorder: &Disorder,
    params: &ModelParams,
    stream_ids: &[u64],
    cfg: &SamplerConfig,
) -> Result<Vec<OverlapSeries>> {
    let n_replicas = stream_ids.len();
    if n_replicas < 2 {
        return Err(Error::InvalidParams("need at least 2 replicas".into()));
    }
    cfg.validate()?;
    let retained = (cfg.sweeps - cfg.burn_in_sweeps).div_ceil(cfg.thin);
    if retained < 100 {
        return Err(Error::InvalidParams(format!(
            "only {retained} retained sweeps; need >= 100 for diagnostics"
        )));
    }
    let index = CouplingIndex::new(params.n(), params.p())?;
    let mut set = ReplicaSet::with_streams(disorder, &index, params, cfg, stream_ids)?;

    let pairs: Vec<(usize, usize)> = (0..n_replicas)
        .flat_map(|l| ((l + 1)..n_replicas).map(move |m| (l, m)))
        .collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(retained); pairs.len()];
    for s in 0..cfg.sweeps {
        set.sweep_all();
        if s >= cfg.burn_in_sweeps && (s - cfg.burn_in_sweeps) % cfg.thin == 0 {
            for (series, &(l, m)) in values.iter_mut().zip(&pairs) {
                series.push(overlap(set.config(l), set.config(m)));
            }
        }
    }
    pairs
        .into_iter()
        .zip(values)
        .map(|(pair, vals)| {
            let (tau, ess) = autocorrelation(&vals)?;
            Ok(OverlapSeries {
                pair,
                values: vals,
                tau,
                ess,
            })
        })
        .collect()
}
