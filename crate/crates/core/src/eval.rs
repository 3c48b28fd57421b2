//! Metrics (test error, accuracy, invariance error) and the noise and
//! sample-size sweeps.

use std::fmt::Write as _;

use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset};
use crate::error::{Error, Result};
use crate::lie::{self, CanonicalForm, Generator};
use crate::model::{LossKind, Model};
use crate::train::{self, RunReport, TrainConfig};

fn nonempty(ds: &Dataset) -> Result<()> {
    if ds.is_empty() {
        Err(Error::Argument("evaluation set is empty".into()))
    } else {
        Ok(())
    }
}

/// Mean over samples and outputs of the squared error.
pub fn test_mse(model: &Model, ds: &Dataset) -> Result<f64> {
    mean_loss(model, ds, LossKind::SquaredError)
}

/// Mean per-output loss of `kind`.
pub fn mean_loss(model: &Model, ds: &Dataset, kind: LossKind) -> Result<f64> {
    nonempty(ds)?;
    let eval = model.evaluator();
    let losses =
        ds.x.par_iter()
            .zip(&ds.y)
            .map(|(x, y)| Ok(kind.sample_loss(&eval.predict(x)?, y)))
            .collect::<Result<Vec<f64>>>()?;
    let count = ds.len() * ds.meta.outputs.max(1);
    Ok(losses.iter().sum::<f64>() / count as f64)
}

/// Fraction of samples whose logit sign matches the `{0, 1}` label.
pub fn accuracy(model: &Model, ds: &Dataset) -> Result<f64> {
    nonempty(ds)?;
    let eval = model.evaluator();
    let hits =
        ds.x.par_iter()
            .zip(&ds.y)
            .map(|(x, y)| {
                let p = eval.predict(x)?;
                Ok(((p[0] > 0.0) == (y[0] > 0.5)) as usize)
            })
            .collect::<Result<Vec<usize>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / ds.len() as f64)
}

/// `count` times drawn uniformly from `[−range, range]`.
pub fn invariance_times(count: usize, range: f64, seed: u64) -> Vec<f64> {
    let dist = Uniform::new_inclusive(-range, range).expect("valid range");
    let mut rng = train::rng_for(seed, 24);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}

/// Monte-Carlo estimate of `E_{x,t} ‖f(x) − f(exp(tB)x)‖²` over every pair in
/// `xs × ts`.
pub fn invariance_error(model: &Model, xs: &[Vec<f64>], b: &Generator, ts: &[f64]) -> Result<f64> {
    if xs.is_empty() || ts.is_empty() {
        return Err(Error::Argument("invariance error needs samples".into()));
    }
    let rotations = ts
        .iter()
        .map(|&t| lie::matrix_exp(b, t))
        .collect::<Result<Vec<_>>>()?;
    let eval = model.evaluator();
    let per_x = xs
        .par_iter()
        .map(|x| {
            let base = eval.predict(x)?;
            let xv = nalgebra::DVector::from_column_slice(x);
            let mut acc = 0.0;
            for rot in &rotations {
                let moved = eval.predict((rot * &xv).as_slice())?;
                acc += base
                    .iter()
                    .zip(&moved)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_x.iter().sum::<f64>() / (xs.len() * ts.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Noise,
    Samples,
}

impl SweepAxis {
    pub fn default_values(&self) -> Vec<f64> {
        match self {
            SweepAxis::Noise => (1..=10).map(|k| k as f64 / 10.0).collect(),
            SweepAxis::Samples => vec![8000.0, 16000.0, 32000.0, 64000.0],
        }
    }
}

/// Repeated runs of the rotated four-dimensional task along one axis. The
/// other axis is held at `baseNoise` or `baseSamples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub repeats: usize,
    pub base: TrainConfig,
    pub base_samples: usize,
    pub base_noise: f64,
}

impl SweepSpec {
    pub fn new(axis: SweepAxis) -> Self {
        Self {
            axis,
            values: axis.default_values(),
            repeats: 3,
            base: TrainConfig::default(),
            base_samples: 8000,
            base_noise: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Argument(
                "sweep values must be nonempty and positive".into(),
            ));
        }
        if self.axis == SweepAxis::Samples && self.values.iter().any(|v| v.fract() != 0.0) {
            return Err(Error::Argument("sample counts must be integers".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Argument("repeats must be positive".into()));
        }
        self.base.validate()
    }

    /// Seed of repeat `k`; shared across axis values.
    pub fn seed_for(&self, repeat: usize) -> u64 {
        self.base.seed.wrapping_add(repeat as u64)
    }
}

/// The rotated four-dimensional task: random frame, `λ = (1, −1)/√2`.
pub fn rotated_task(samples: usize, noise: f64, seed: u64, bandwidth: u32) -> Result<Dataset> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cf = CanonicalForm::new(data::random_rotation(4, seed)?, vec![h, -h])?;
    data::synth_invariant_regression(&cf, samples, noise, seed, bandwidth)
}

/// One run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRun {
    pub value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

impl SweepRun {
    fn usable(&self) -> Option<(f64, f64)> {
        let r = self.report.as_ref()?;
        if r.failure.is_some() {
            return None;
        }
        Some((r.cosine_similarity?, r.test_loss?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepPoint {
    pub value: f64,
    pub mean_cos: f64,
    pub std_cos: f64,
    pub mean_loss: f64,
    pub std_loss: f64,
    pub n_runs: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl Aggregate {
    pub fn point(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.value == value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("axisValue,meanCos,stdCos,meanLoss,stdLoss,nRuns\n");
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.value, p.mean_cos, p.std_cos, p.mean_loss, p.std_loss, p.n_runs
            )
            .expect("string write");
        }
        out
    }
}

/// Mean and sample standard deviation; `(NaN, NaN)` when empty and a zero
/// deviation for a single value.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Recomputes the per-value summary from the runs alone.
pub fn aggregate(axis: SweepAxis, values: &[f64], runs: &[SweepRun]) -> Aggregate {
    let points = values
        .iter()
        .map(|&v| {
            let at: Vec<&SweepRun> = runs.iter().filter(|r| r.value == v).collect();
            let ok: Vec<(f64, f64)> = at.iter().filter_map(|r| r.usable()).collect();
            let cos: Vec<f64> = ok.iter().map(|p| p.0).collect();
            let loss: Vec<f64> = ok.iter().map(|p| p.1).collect();
            let (mean_cos, std_cos) = mean_std(&cos);
            let (mean_loss, std_loss) = mean_std(&loss);
            SweepPoint {
                value: v,
                mean_cos,
                std_cos,
                mean_loss,
                std_loss,
                n_runs: ok.len(),
                n_failed: at.len() - ok.len(),
            }
        })
        .collect();
    Aggregate { axis, points }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    pub aggregate: Aggregate,
}

fn sweep_one(spec: &SweepSpec, value: f64, repeat: usize) -> SweepRun {
    let seed = spec.seed_for(repeat);
    let (samples, noise) = match spec.axis {
        SweepAxis::Noise => (spec.base_samples, value),
        SweepAxis::Samples => (value as usize, spec.base_noise),
    };
    let cfg = TrainConfig {
        seed,
        ..spec.base.clone()
    };
    let outcome =
        rotated_task(samples, noise, seed, cfg.bandwidth).and_then(|ds| train::train(&ds, &cfg));
    let (report, error) = match outcome {
        Ok((_, report)) => (Some(report), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepRun {
        value,
        repeat,
        seed,
        report,
        error,
    }
}

/// Runs `repeats` seeds per axis value on up to `jobs` threads.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    spec.validate()?;
    let grid: Vec<(f64, usize)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.repeats).map(move |k| (v, k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::State(format!("thread pool: {e}")))?;
    let runs: Vec<SweepRun> = pool.install(|| {
        grid.par_iter()
            .map(|&(v, k)| sweep_one(spec, v, k))
            .collect()
    });
    let aggregate = aggregate(spec.axis, &spec.values, &runs);
    Ok(SweepResult { runs, aggregate })
}
