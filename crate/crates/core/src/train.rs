//! Adam training loop with the μ schedule, post-step `λ` renormalization,
//! best-validation checkpointing, and generator read-out.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::autodiff::Tape;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval;
use crate::lie::{self, CanonicalForm, Generator};
use crate::model::{LossKind, Model};
use crate::spectral::{self, FrequencyVector, LambdaEstimate};

/// Shape of μ after warm-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuRamp {
    Constant,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub mu_init: f64,
    pub mu_max_scale: f64,
    pub warmup_epochs: usize,
    pub mu_ramp: MuRamp,
    pub bandwidth: u32,
    pub hidden: Vec<usize>,
    pub seed: u64,
    pub loss_kind: LossKind,
    /// Relative coefficient-norm threshold for surviving frequencies.
    pub surviving_threshold: f64,
    pub invariance_x_samples: usize,
    pub invariance_t_samples: usize,
    /// Invariance-error times are drawn from `U[−tRange, tRange]`.
    pub t_range: f64,
    /// Multiplier on the fan-in standard deviation of the first layer.
    pub first_layer_gain: f64,
    /// Independent initializations sharing one split; the lowest best
    /// validation loss wins.
    pub restarts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            lr: 2e-3,
            batch_size: 128,
            mu_init: 0.1,
            mu_max_scale: 2.0,
            warmup_epochs: 10,
            mu_ramp: MuRamp::Linear,
            bandwidth: 2,
            hidden: vec![64, 64, 64],
            seed: 0,
            loss_kind: LossKind::SquaredError,
            surviving_threshold: 0.1,
            invariance_x_samples: 256,
            invariance_t_samples: 16,
            t_range: std::f64::consts::PI,
            first_layer_gain: 0.1,
            restarts: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Argument(what.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.batch_size == 0 {
            return bad("batchSize must be positive");
        }
        if !(self.mu_init >= 0.0 && self.mu_init.is_finite()) {
            return bad("muInit must be non-negative");
        }
        if !(self.mu_max_scale > 0.0 && self.mu_max_scale.is_finite()) {
            return bad("muMaxScale must be positive");
        }
        if self.warmup_epochs > self.epochs {
            return bad("warmupEpochs exceeds epochs");
        }
        if self.bandwidth == 0 {
            return bad("bandwidth must be positive");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if !(self.surviving_threshold > 0.0 && self.surviving_threshold <= 1.0) {
            return bad("survivingThreshold must lie in (0, 1]");
        }
        if self.invariance_x_samples == 0 || self.invariance_t_samples == 0 {
            return bad("invariance budgets must be positive");
        }
        if !(self.t_range > 0.0 && self.t_range.is_finite()) {
            return bad("tRange must be positive");
        }
        if !(self.first_layer_gain > 0.0 && self.first_layer_gain.is_finite()) {
            return bad("firstLayerGain must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        Ok(())
    }
}

/// Resonance weight for `epoch`: `muInit` through warm-up, then (for the
/// linear ramp) rising to `muInit · muMaxScale` at the last epoch.
pub fn mu_schedule(epoch: usize, cfg: &TrainConfig) -> f64 {
    if epoch < cfg.warmup_epochs || cfg.mu_ramp == MuRamp::Constant {
        return cfg.mu_init;
    }
    let span = cfg
        .epochs
        .saturating_sub(1)
        .saturating_sub(cfg.warmup_epochs);
    let frac = if span == 0 {
        1.0
    } else {
        ((epoch - cfg.warmup_epochs) as f64 / span as f64).min(1.0)
    };
    cfg.mu_init * (1.0 + (cfg.mu_max_scale - 1.0) * frac)
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seeded 80/10/10 train/validation/test split of `0..len`.
pub fn split_indices(len: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if len < 3 {
        return Err(Error::Argument(format!(
            "need at least 3 samples to split, got {len}"
        )));
    }
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut rng_for(seed, 22));
    let n_val = (len / 10).max(1);
    let n_test = (len / 10).max(1);
    let n_train = len - n_val - n_test;
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Ok((idx, val, test))
}

/// Stream `base` for restart `restart`; restart 0 uses `base` itself.
fn restart_stream(base: u64, restart: usize) -> u64 {
    base + ((restart as u64) << 32)
}

/// Seeded initial parameters for the first restart.
pub fn initial_model(n: usize, outputs: usize, cfg: &TrainConfig) -> Result<Model> {
    initial_model_for(n, outputs, cfg, 0)
}

/// Seeded initial parameters for restart `restart`.
pub fn initial_model_for(
    n: usize,
    outputs: usize,
    cfg: &TrainConfig,
    restart: usize,
) -> Result<Model> {
    let mut model = Model::new(n, cfg.bandwidth, &cfg.hidden, outputs)?;
    let mut rng = rng_for(cfg.seed, restart_stream(21, restart));
    let skew_dist = Normal::new(0.0, 0.1).expect("valid std");
    let params = model.params_mut();
    for v in params.skew_mut() {
        *v = skew_dist.sample(&mut rng);
    }
    for v in params.lambda_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    params.normalize_lambda();
    let layout = params.layout().clone();
    let layers = layout.layer_count();
    for l in 0..layers {
        let fan_in = layout.widths[l] as f64;
        let var = if l + 1 == layers {
            1.0 / fan_in
        } else {
            2.0 / fan_in
        };
        let gain = if l == 0 { cfg.first_layer_gain } else { 1.0 };
        let dist = Normal::new(0.0, gain * var.sqrt()).expect("valid std");
        for w in params.weights_mut(l) {
            *w = dist.sample(&mut rng);
        }
    }
    Ok(model)
}

/// Generator read-out from trained parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    /// `Q (⊕ λ_k J) Qᵀ` with the learned `λ`.
    pub direct: Generator,
    /// Same `Q` with `λ` re-estimated from the surviving frequencies.
    pub spectral: Generator,
    pub estimate: LambdaEstimate,
    pub surviving: Vec<FrequencyVector>,
    /// `|cos|` between the two estimates.
    pub agreement: Option<f64>,
}

impl Discovery {
    /// The spectral estimate is trusted only when the nullspace is a line.
    pub fn spectral_reliable(&self) -> bool {
        self.estimate.is_unique()
    }
}

pub fn discover(model: &Model, surviving_threshold: f64) -> Result<Discovery> {
    let cf = model.canonical_form()?;
    let direct = lie::assemble_generator(&cf);
    let surviving =
        spectral::surviving_frequencies(&model.coefficient_norms(), surviving_threshold);
    let estimate = spectral::estimate_lambda(&surviving, model.rank())?;
    let spectral_cf = CanonicalForm::new(cf.q().clone(), estimate.lambda.clone())?;
    let spectral = lie::assemble_generator(&spectral_cf);
    let cos = lie::generator_cosine_similarity(&direct, &spectral)?;
    Ok(Discovery {
        direct,
        spectral,
        estimate,
        surviving,
        agreement: (!cos.degenerate).then(|| cos.value.abs()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Outcome of one run. Metrics are `null` when undefined or when the run
/// failed; `failure` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub task_name: String,
    pub seed: u64,
    pub config: TrainConfig,
    pub split: SplitSizes,
    pub test_mse: Option<f64>,
    pub accuracy: Option<f64>,
    pub test_loss: Option<f64>,
    pub invariance_error: Option<f64>,
    pub cosine_similarity: Option<f64>,
    pub spectral_cosine_similarity: Option<f64>,
    pub agreement: Option<f64>,
    pub recovered_lambda: Vec<f64>,
    pub spectral_lambda: Vec<f64>,
    pub nullity: usize,
    pub spectral_reliable: bool,
    pub surviving_frequencies: Vec<FrequencyVector>,
    pub learned_generator: Option<Generator>,
    pub loss_curve: Vec<f64>,
    pub penalty_curve: Vec<f64>,
    pub val_curve: Vec<f64>,
    pub mu_curve: Vec<f64>,
    pub best_epoch: Option<usize>,
    /// Index of the restart whose model is reported.
    pub restart: usize,
    /// Best validation loss of every restart; `null` for failed ones.
    pub restart_val_losses: Vec<Option<f64>>,
    pub failure: Option<String>,
    pub wall_clock: f64,
}

impl RunReport {
    /// The report as JSON with `wallClock` removed.
    pub fn metrics_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wallClock");
        }
        v
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Test-set metrics and generator read-out for a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub test_mse: Option<f64>,
    pub accuracy: Option<f64>,
    pub test_loss: Option<f64>,
    pub invariance_error: Option<f64>,
    pub cosine_similarity: Option<f64>,
    pub spectral_cosine_similarity: Option<f64>,
    pub discovery: Discovery,
    pub recovered_lambda: Vec<f64>,
}

/// Evaluates `model` on `test` against the dataset's true generator, if any.
pub fn assess(model: &Model, test: &Dataset, cfg: &TrainConfig) -> Result<Assessment> {
    let classification = cfg.loss_kind == LossKind::Logistic;
    let test_loss = eval::mean_loss(model, test, cfg.loss_kind)?;
    let (test_mse, accuracy) = if classification {
        (None, finite(eval::accuracy(model, test)?))
    } else {
        (finite(eval::test_mse(model, test)?), None)
    };
    let discovery = discover(model, cfg.surviving_threshold)?;
    let (invariance_error, cosine_similarity, spectral_cosine_similarity) =
        match &test.meta.true_generator {
            Some(truth) => {
                let k = cfg.invariance_x_samples.min(test.len());
                let ts = eval::invariance_times(cfg.invariance_t_samples, cfg.t_range, cfg.seed);
                let inv = eval::invariance_error(model, &test.x[..k], truth, &ts)?;
                let abs_cos = |g: &Generator| -> Result<Option<f64>> {
                    let c = lie::generator_cosine_similarity(g, truth)?;
                    Ok((!c.degenerate).then(|| c.value.abs()))
                };
                (
                    finite(inv),
                    abs_cos(&discovery.direct)?,
                    abs_cos(&discovery.spectral)?,
                )
            }
            None => (None, None, None),
        };
    Ok(Assessment {
        test_mse,
        accuracy,
        test_loss: finite(test_loss),
        invariance_error,
        cosine_similarity,
        spectral_cosine_similarity,
        recovered_lambda: model.params().lambda().to_vec(),
        discovery,
    })
}

struct Curves {
    loss: Vec<f64>,
    penalty: Vec<f64>,
    val: Vec<f64>,
    mu: Vec<f64>,
}

/// Trains on the 80% split of `ds`, keeps the best-validation parameters,
/// and reports test metrics. A non-finite objective stops the run and the
/// report carries the reason.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<(Model, RunReport)> {
    train_observed(ds, cfg, |_, _| {})
}

/// Summary handed to the observer of [`train_observed`] after each epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub restart: usize,
    pub epoch: usize,
    pub mu: f64,
    pub train_loss: f64,
    pub val_loss: f64,
    pub penalty: f64,
}

/// One restart: its best-validation model and curves.
struct Fit {
    best: Option<(usize, f64, Model)>,
    last: Model,
    curves: Curves,
    failure: Option<String>,
}

fn fit<F>(
    ds: &Dataset,
    cfg: &TrainConfig,
    train_idx: &[usize],
    val: &Dataset,
    restart: usize,
    observe: &mut F,
) -> Result<Fit>
where
    F: FnMut(&EpochStats, &Model),
{
    let mut model = initial_model_for(ds.meta.n, ds.meta.outputs, cfg, restart)?;
    let mut adam = Adam::new(model.params().values().len(), cfg.lr);
    let mut tape = Tape::new();
    let mut order = train_idx.to_vec();
    let mut shuffle_rng = rng_for(cfg.seed, restart_stream(23, restart));
    let mut curves = Curves {
        loss: Vec::with_capacity(cfg.epochs),
        penalty: Vec::with_capacity(cfg.epochs),
        val: Vec::with_capacity(cfg.epochs),
        mu: Vec::with_capacity(cfg.epochs),
    };
    let mut best: Option<(usize, f64, Model)> = None;
    let mut failure = None;

    'epochs: for epoch in 0..cfg.epochs {
        let mu = mu_schedule(epoch, cfg);
        order.shuffle(&mut shuffle_rng);
        let mut weighted_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| ds.x[i].as_slice()).collect();
            let ys: Vec<&[f64]> = batch.iter().map(|&i| ds.y[i].as_slice()).collect();
            tape.clear();
            let obj = match model.objective_on_tape(&mut tape, &xs, &ys, mu, cfg.loss_kind) {
                Err(Error::Numeric(msg)) => {
                    failure = Some(format!("objective failed in epoch {epoch}: {msg}"));
                    break 'epochs;
                }
                r => r?,
            };
            if !obj.total.value().is_finite() {
                failure = Some(format!("non-finite objective in epoch {epoch}"));
                break 'epochs;
            }
            weighted_loss += obj.data.value() * batch.len() as f64;
            let grads = tape.backward(obj.total)?;
            let g = grads.block(obj.params);
            if g.iter().any(|v| !v.is_finite()) {
                failure = Some(format!("non-finite gradient in epoch {epoch}"));
                break 'epochs;
            }
            let params = model.params_mut();
            adam.step(params.values_mut(), g);
            params.normalize_lambda();
            if params.values().iter().any(|v| !v.is_finite()) {
                failure = Some(format!("non-finite parameters in epoch {epoch}"));
                break 'epochs;
            }
        }
        let val_loss = eval::mean_loss(&model, val, cfg.loss_kind)?;
        if !val_loss.is_finite() {
            failure = Some(format!("non-finite validation loss in epoch {epoch}"));
            break;
        }
        let stats = EpochStats {
            restart,
            epoch,
            mu,
            train_loss: weighted_loss / order.len() as f64,
            val_loss,
            penalty: model.resonance_penalty(),
        };
        observe(&stats, &model);
        curves.loss.push(stats.train_loss);
        curves.penalty.push(stats.penalty);
        curves.val.push(val_loss);
        curves.mu.push(mu);
        if best.as_ref().is_none_or(|(_, v, _)| val_loss < *v) {
            best = Some((epoch, val_loss, model.clone()));
        }
    }
    Ok(Fit {
        best,
        last: model,
        curves,
        failure,
    })
}

/// [`train`] with a callback after every completed epoch of every restart.
pub fn train_observed<F>(
    ds: &Dataset,
    cfg: &TrainConfig,
    mut observe: F,
) -> Result<(Model, RunReport)>
where
    F: FnMut(&EpochStats, &Model),
{
    cfg.validate()?;
    let started = Instant::now();
    let (train_idx, val_idx, test_idx) = split_indices(ds.len(), cfg.seed)?;
    let val = ds.subset(&val_idx);
    let test = ds.subset(&test_idx);

    let mut fits = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        fits.push(fit(ds, cfg, &train_idx, &val, restart, &mut observe)?);
    }
    let restart_val_losses: Vec<Option<f64>> = fits
        .iter()
        .map(|f| match (&f.failure, &f.best) {
            (None, Some((_, v, _))) => Some(*v),
            _ => None,
        })
        .collect();
    let mut chosen = 0;
    for (k, v) in restart_val_losses.iter().enumerate() {
        if let Some(v) = v {
            if restart_val_losses[chosen].is_none_or(|c| *v < c) {
                chosen = k;
            }
        }
    }
    let Fit {
        best,
        last,
        curves,
        failure,
    } = fits.swap_remove(chosen);
    let best_epoch = best.as_ref().map(|(e, _, _)| *e);
    let model = best.map_or(last, |(_, _, m)| m);

    let assessment = assess(&model, &test, cfg);
    let mut report = RunReport {
        task_name: ds.meta.task_name.clone(),
        seed: cfg.seed,
        config: cfg.clone(),
        split: SplitSizes {
            train: train_idx.len(),
            val: val_idx.len(),
            test: test_idx.len(),
        },
        test_mse: None,
        accuracy: None,
        test_loss: None,
        invariance_error: None,
        cosine_similarity: None,
        spectral_cosine_similarity: None,
        agreement: None,
        recovered_lambda: model.params().lambda().to_vec(),
        spectral_lambda: Vec::new(),
        nullity: 0,
        spectral_reliable: false,
        surviving_frequencies: Vec::new(),
        learned_generator: None,
        loss_curve: curves.loss,
        penalty_curve: curves.penalty,
        val_curve: curves.val,
        mu_curve: curves.mu,
        best_epoch,
        restart: chosen,
        restart_val_losses,
        failure,
        wall_clock: 0.0,
    };
    match assessment {
        Ok(a) if report.failure.is_none() || best_epoch.is_some() => fill(&mut report, a),
        Ok(_) => {}
        Err(e) => {
            let reason = format!("assessment failed: {e}");
            report.failure = Some(match report.failure.take() {
                Some(prev) => format!("{prev}; {reason}"),
                None => reason,
            });
        }
    }
    report.wall_clock = started.elapsed().as_secs_f64();
    Ok((model, report))
}

/// Copies an assessment into a report.
pub fn fill(report: &mut RunReport, a: Assessment) {
    report.test_mse = a.test_mse;
    report.accuracy = a.accuracy;
    report.test_loss = a.test_loss;
    report.invariance_error = a.invariance_error;
    report.cosine_similarity = a.cosine_similarity;
    report.spectral_cosine_similarity = a.spectral_cosine_similarity;
    report.agreement = a.discovery.agreement;
    report.recovered_lambda = a.recovered_lambda;
    report.spectral_lambda = a.discovery.estimate.lambda.clone();
    report.nullity = a.discovery.estimate.nullity;
    report.spectral_reliable = a.discovery.spectral_reliable();
    report.surviving_frequencies = a.discovery.surviving.clone();
    report.learned_generator = Some(a.discovery.direct);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_schedule_examples() {
        let cfg = TrainConfig::default();
        assert_eq!(mu_schedule(0, &cfg), 0.1);
        assert_eq!(mu_schedule(9, &cfg), 0.1);
        assert_eq!(mu_schedule(10, &cfg), 0.1);
        assert!((mu_schedule(39, &cfg) - 0.2).abs() < 1e-15);
        let constant = TrainConfig {
            mu_ramp: MuRamp::Constant,
            ..cfg
        };
        assert_eq!(mu_schedule(39, &constant), 0.1);
    }

    #[test]
    fn mu_schedule_is_monotone_and_bounded() {
        let cfg = TrainConfig::default();
        let mut prev = 0.0;
        for e in 0..cfg.epochs {
            let mu = mu_schedule(e, &cfg);
            assert!(mu >= prev && mu <= cfg.mu_init * cfg.mu_max_scale + 1e-15);
            prev = mu;
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            warmup_epochs: 41,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_json_uses_camel_case_and_defaults() {
        let cfg: TrainConfig = serde_json::from_str(r#"{"batchSize": 32}"#).unwrap();
        assert_eq!(cfg.batch_size, 32);
        assert_eq!(cfg.epochs, 40);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"bogus": 1}"#).is_err());
        let text = serde_json::to_string(&TrainConfig::default()).unwrap();
        assert!(text.contains(r#""lossKind":"squared-error""#));
        assert!(text.contains(r#""muRamp":"linear""#));
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut adam = Adam::new(2, 0.01);
        let mut p = [1.0, -1.0];
        adam.step(&mut p, &[3.0, -0.5]);
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] + 0.99).abs() < 1e-9);
    }

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut adam = Adam::new(1, 0.05);
        let mut p = [3.0];
        for _ in 0..2000 {
            let g = [2.0 * (p[0] - 1.0)];
            adam.step(&mut p, &g);
        }
        assert!((p[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn split_is_disjoint_and_covering() {
        let (a, b, c) = split_indices(103, 4).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (83, 10, 10));
        let mut all: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        all.sort();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
        assert_eq!(split_indices(103, 4).unwrap().0, a);
        assert!(split_indices(2, 0).is_err());
    }

    #[test]
    fn initial_lambda_is_unit() {
        let cfg = TrainConfig::default();
        let m = initial_model(6, 1, &cfg).unwrap();
        let norm: f64 = m
            .params()
            .lambda()
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(m.params().bias(0).iter().all(|&b| b == 0.0));
    }

    #[test]
    fn discover_on_a_resonant_only_model() {
        // Q = I, λ = (1, −1)/√2, first layer touching only (1, 1).
        let mut model = Model::new(4, 1, &[3], 1).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let k = model
            .frequencies()
            .iter()
            .position(|m| m.entries() == [1, 1])
            .unwrap();
        let in_w = model.params().layout().input_width();
        {
            let p = model.params_mut();
            p.lambda_mut().copy_from_slice(&[h, -h]);
            p.weights_mut(0)[2 * k] = 1.0;
            p.weights_mut(0)[in_w + 2 * k + 1] = 0.5;
        }
        let d = discover(&model, 0.1).unwrap();
        assert_eq!(d.surviving.len(), 1);
        assert!(d.spectral_reliable());
        assert!((d.agreement.unwrap() - 1.0).abs() < 1e-12);
        let truth = lie::block_diagonal(&[h, -h]);
        assert!((d.spectral.matrix() - &truth).norm() < 1e-12);
    }

    #[test]
    fn full_rank_survivors_flag_nullity_zero() {
        let mut model = Model::new(4, 1, &[2], 1).unwrap();
        let in_w = model.params().layout().input_width();
        {
            let p = model.params_mut();
            p.lambda_mut().copy_from_slice(&[1.0, 0.0]);
            p.weights_mut(0)[..in_w - 2].fill(1.0);
        }
        let d = discover(&model, 0.1).unwrap();
        assert_eq!(d.estimate.nullity, 0);
        assert!(!d.spectral_reliable());
        assert!(d.direct.matrix().norm() > 0.0);
    }
}
