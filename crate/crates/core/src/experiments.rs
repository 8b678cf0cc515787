//! Noise sweeps, feed-forward noise maps, depth studies and naive baselines.
//!
//! Every (channel, γ, replica) training run is independent. Runs execute on a
//! rayon pool of `workers` threads and results are assembled in a fixed
//! order, so output never depends on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::{ChannelKind, NoiseSpec};
use crate::data::PreparedDataset;
use crate::error::{Error, Result};
use crate::qnn::{AnsatzConfig, QnnModel};
use crate::training::{self, TrainConfig, TrainingRecord};

/// Ascending list of noise strengths in [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaGrid {
    gammas: Vec<f64>,
}

impl GammaGrid {
    /// `10^p` for `p = min_exp, min_exp + step, …, max_exp`, optionally
    /// preceded by an exact 0.
    pub fn decades(min_exp: f64, max_exp: f64, step: f64, include_zero: bool) -> Result<Self> {
        if !(step > 0.0) || !(min_exp <= max_exp) || max_exp > 0.0 {
            return Err(Error::invalid(format!(
                "grid needs step > 0 and min_exp <= max_exp <= 0 (got {min_exp}..{max_exp} step {step})"
            )));
        }
        let count = ((max_exp - min_exp) / step + 1e-9).floor() as usize + 1;
        let mut gammas: Vec<f64> = include_zero.then_some(0.0).into_iter().collect();
        gammas.extend((0..count).map(|k| 10f64.powf(min_exp + k as f64 * step)));
        Self::from_gammas(gammas)
    }

    pub fn from_gammas(gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::invalid("gamma grid is empty"));
        }
        if !gammas.iter().all(|g| (0.0..=1.0).contains(g)) {
            return Err(Error::invalid("gamma grid values must lie in [0, 1]"));
        }
        if !gammas.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("gamma grid must be strictly ascending"));
        }
        Ok(Self { gammas })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

impl Default for GammaGrid {
    /// Quarter-decade grid 10^-5 … 10^0 (21 points) plus γ = 0.
    fn default() -> Self {
        Self::decades(-5.0, 0.0, 0.25, true).expect("default grid is valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub layers: usize,
    pub n_seeds: usize,
    pub master_seed: u64,
    /// Epochs, batch size, optimizer and metric mode; its `seed` is ignored
    /// in favour of the per-run derived seed.
    pub train: TrainConfig,
    pub noise_after_encoding: bool,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            layers: 5,
            n_seeds: 16,
            master_seed: 0,
            train: TrainConfig::default(),
            noise_after_encoding: true,
            workers: 0,
        }
    }
}

/// Seed of replica `replica` for `channel`. Independent of γ so that a
/// replica starts from the same parameters at every noise level.
pub fn run_seed(master_seed: u64, channel: &str, replica: usize) -> u64 {
    let digest = Sha256::digest(format!("{master_seed}:{channel}:{replica}").as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub channel: ChannelKind,
    pub gamma: f64,
    pub replica: usize,
    pub record: TrainingRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub channel: ChannelKind,
    pub gamma: f64,
    pub mean_final_train_mse: f64,
    pub mean_final_val_mse: f64,
    pub stderr_train: f64,
    pub stderr_val: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub channel: ChannelKind,
    pub layers: usize,
    pub noise_after_encoding: bool,
    pub gammas: Vec<f64>,
    pub n_seeds: usize,
    /// Sorted by (γ, replica).
    pub runs: Vec<RunRecord>,
    /// One row per γ, ascending.
    pub summary: Vec<SummaryRow>,
}

impl SweepResult {
    pub fn runs_at(&self, gamma_index: usize) -> &[RunRecord] {
        &self.runs[gamma_index * self.n_seeds..(gamma_index + 1) * self.n_seeds]
    }
}

/// Mean and standard error (sample standard deviation / √n; 0 for n = 1).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn model_for(channel: ChannelKind, gamma: f64, layers: usize, noise_after_encoding: bool) -> Result<QnnModel> {
    QnnModel::new(
        AnsatzConfig {
            noise_after_encoding,
            ..AnsatzConfig::new(layers)
        },
        NoiseSpec::new(channel, gamma)?,
    )
}

/// Train `n_seeds` models at every γ of `grid` under `channel`.
pub fn run_noise_sweep(
    channel: ChannelKind,
    grid: &GammaGrid,
    data: &PreparedDataset,
    config: &SweepConfig,
) -> Result<SweepResult> {
    if config.n_seeds < 1 {
        return Err(Error::invalid("a sweep needs at least one seed"));
    }
    let tasks: Vec<(f64, usize)> = grid
        .gammas()
        .iter()
        .flat_map(|&g| (0..config.n_seeds).map(move |r| (g, r)))
        .collect();
    let runs = with_pool(config.workers, || {
        tasks
            .par_iter()
            .map(|&(gamma, replica)| {
                let seed = run_seed(config.master_seed, channel.label(), replica);
                let wrap = |source| Error::Run {
                    channel: channel.label().into(),
                    gamma,
                    seed,
                    source: Box::new(source),
                };
                let model = model_for(channel, gamma, config.layers, config.noise_after_encoding).map_err(wrap)?;
                let train_cfg = TrainConfig {
                    seed,
                    ..config.train.clone()
                };
                let record = training::train(&model, data, &train_cfg).map_err(wrap)?;
                Ok(RunRecord {
                    channel,
                    gamma,
                    replica,
                    record,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let summary = grid
        .gammas()
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let group = &runs[gi * config.n_seeds..(gi + 1) * config.n_seeds];
            let finals_train: Vec<f64> = group.iter().map(|r| r.record.final_train_mse()).collect();
            let finals_val: Vec<f64> = group.iter().map(|r| r.record.final_val_mse()).collect();
            let (mean_train, se_train) = mean_and_stderr(&finals_train);
            let (mean_val, se_val) = mean_and_stderr(&finals_val);
            SummaryRow {
                channel,
                gamma,
                mean_final_train_mse: mean_train,
                mean_final_val_mse: mean_val,
                stderr_train: se_train,
                stderr_val: se_val,
            }
        })
        .collect();

    Ok(SweepResult {
        channel,
        layers: config.layers,
        noise_after_encoding: config.noise_after_encoding,
        gammas: grid.gammas().to_vec(),
        n_seeds: config.n_seeds,
        runs,
        summary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub channel: ChannelKind,
    pub gamma: f64,
    pub val_mse: f64,
    pub val_mse_noiseless: f64,
    /// `1 − loss(γ*) / loss(0)`
    pub improvement: f64,
}

/// γ minimizing the mean final validation loss (ties go to the smaller γ)
/// and its relative improvement over γ = 0.
pub fn find_optimum(summary: &[SummaryRow]) -> Result<Optimum> {
    let baseline = summary
        .iter()
        .find(|r| r.gamma == 0.0)
        .ok_or_else(|| Error::invalid("summary has no γ = 0 baseline"))?;
    let best = summary
        .iter()
        .fold(None::<&SummaryRow>, |best, r| match best {
            Some(b) if b.mean_final_val_mse < r.mean_final_val_mse => Some(b),
            Some(b) if b.mean_final_val_mse == r.mean_final_val_mse && b.gamma <= r.gamma => Some(b),
            _ => Some(r),
        })
        .expect("summary is non-empty");
    Ok(Optimum {
        channel: best.channel,
        gamma: best.gamma,
        val_mse: best.mean_final_val_mse,
        val_mse_noiseless: baseline.mean_final_val_mse,
        improvement: 1.0 - best.mean_final_val_mse / baseline.mean_final_val_mse,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMapResult {
    pub channel: ChannelKind,
    pub gammas: Vec<f64>,
    /// `mean_val_mse[t][f]`: models trained at `gammas[t]`, evaluated at
    /// `gammas[f]`.
    pub mean_val_mse: Vec<Vec<f64>>,
    /// For each evaluation γ_F, the training γ_T with the lowest loss.
    pub best_train_gamma: Vec<f64>,
}

/// Re-evaluate the trained models of `trained` on the validation set at every
/// evaluation noise level of `grid`.
pub fn run_noise_map(
    channel: ChannelKind,
    grid: &GammaGrid,
    trained: &SweepResult,
    data: &PreparedDataset,
    workers: usize,
) -> Result<NoiseMapResult> {
    if trained.channel != channel {
        return Err(Error::invalid(format!(
            "sweep was run for channel {}, not {channel}",
            trained.channel
        )));
    }
    if trained.gammas.as_slice() != grid.gammas() {
        return Err(Error::invalid("noise-map grid does not match the sweep grid"));
    }
    let n = grid.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|t| (0..n).map(move |f| (t, f))).collect();
    let values = with_pool(workers, || {
        cells
            .par_iter()
            .map(|&(t, f)| {
                let model = model_for(channel, grid.gammas()[f], trained.layers, trained.noise_after_encoding)?;
                let losses = trained
                    .runs_at(t)
                    .iter()
                    .map(|run| training::evaluate_mse(&model, &run.record.final_params, &data.validation))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(losses.iter().sum::<f64>() / losses.len() as f64)
            })
            .collect::<Result<Vec<f64>>>()
    })??;
    let mean_val_mse: Vec<Vec<f64>> = values.chunks(n).map(<[f64]>::to_vec).collect();
    let best_train_gamma = (0..n)
        .map(|f| {
            let t = (0..n)
                .fold(0, |best, t| if mean_val_mse[t][f] < mean_val_mse[best][f] { t } else { best });
            grid.gammas()[t]
        })
        .collect();
    Ok(NoiseMapResult {
        channel,
        gammas: grid.gammas().to_vec(),
        mean_val_mse,
        best_train_gamma,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub channel: ChannelKind,
    pub layers: usize,
    pub gamma_opt: f64,
    pub val_mse_at_opt: f64,
    pub val_mse_noiseless: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthAggregate {
    pub channel: ChannelKind,
    pub arithmetic_mean: f64,
    pub geometric_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthStudyResult {
    pub rows: Vec<DepthRow>,
    pub aggregates: Vec<DepthAggregate>,
    pub sweeps: Vec<SweepResult>,
}

pub const DEFAULT_DEPTHS: [usize; 6] = [3, 4, 5, 6, 8, 10];

/// Optimum γ per (depth, channel), plus arithmetic and geometric means of
/// the optima across depths.
pub fn run_depth_study(
    channels: &[ChannelKind],
    layer_set: &[usize],
    grid: &GammaGrid,
    data: &PreparedDataset,
    config: &SweepConfig,
) -> Result<DepthStudyResult> {
    if channels.is_empty() || layer_set.is_empty() {
        return Err(Error::invalid("depth study needs at least one channel and one depth"));
    }
    let mut rows = Vec::new();
    let mut sweeps = Vec::new();
    for &channel in channels {
        for &layers in layer_set {
            let sweep = run_noise_sweep(channel, grid, data, &SweepConfig { layers, ..config.clone() })?;
            let opt = find_optimum(&sweep.summary)?;
            rows.push(DepthRow {
                channel,
                layers,
                gamma_opt: opt.gamma,
                val_mse_at_opt: opt.val_mse,
                val_mse_noiseless: opt.val_mse_noiseless,
            });
            sweeps.push(sweep);
        }
    }
    let aggregates = channels
        .iter()
        .map(|&channel| {
            let optima: Vec<f64> = rows.iter().filter(|r| r.channel == channel).map(|r| r.gamma_opt).collect();
            let n = optima.len() as f64;
            DepthAggregate {
                channel,
                arithmetic_mean: optima.iter().sum::<f64>() / n,
                geometric_mean: (optima.iter().map(|g| g.ln()).sum::<f64>() / n).exp(),
            }
        })
        .collect();
    Ok(DepthStudyResult { rows, aggregates, sweeps })
}

/// Validation MSE of the constant predictors ŷ = 0 and ŷ = 1.
pub fn naive_baseline_losses(data: &PreparedDataset) -> Result<(f64, f64)> {
    if data.validation.is_empty() {
        return Err(Error::invalid("validation set is empty"));
    }
    let n = data.validation.len() as f64;
    let at = |c: f64| data.validation.iter().map(|s| training::mse(c, s.target)).sum::<f64>() / n;
    Ok((at(0.0), at(1.0)))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut end = k;
        while end + 1 < idx.len() && values[idx[end + 1]] == values[idx[k]] {
            end += 1;
        }
        let avg = (k + end) as f64 / 2.0 + 1.0;
        for &i in &idx[k..=end] {
            out[i] = avg;
        }
        k = end + 1;
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}
