//! Synthetic tasks with known generators, noise injection, and the
//! JSON-lines dataset format.
//!
//! A dataset file starts with a header line `{"meta": {...}}` followed by one
//! `{"x": [...], "y": [...]}` object per sample.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, CanonicalForm, Generator};
use crate::linalg;
use crate::spectral::{self, FrequencyVector};

/// Tolerance of the generation-time invariance audit.
pub const AUDIT_TOL: f64 = 1e-9;
/// Number of `(x, t)` pairs checked by the audit.
pub const AUDIT_PAIRS: usize = 64;

/// Task-level description carried in the dataset header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetMeta {
    pub task_name: String,
    pub n: usize,
    pub outputs: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default)]
    pub classification: bool,
    pub true_generator: Option<Generator>,
    pub true_lambda: Option<Vec<f64>>,
}

/// Inputs `x ∈ ℝⁿ` and targets `y ∈ ℝᵐ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, meta: DatasetMeta) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Argument("dataset needs at least one sample".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "{} inputs but {} targets",
                x.len(),
                y.len()
            )));
        }
        if let Some(row) = x.iter().find(|r| r.len() != meta.n) {
            return Err(Error::Shape(format!(
                "input row of length {} in a dataset with n = {}",
                row.len(),
                meta.n
            )));
        }
        if let Some(row) = y.iter().find(|r| r.len() != meta.outputs) {
            return Err(Error::Shape(format!(
                "target row of length {} in a dataset with {} outputs",
                row.len(),
                meta.outputs
            )));
        }
        if let Some(g) = &meta.true_generator {
            if g.n() != meta.n {
                return Err(Error::Shape("true generator size differs from n".into()));
            }
        }
        Ok(Self { x, y, meta })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i].clone()).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        serde_json::to_writer(&mut *w, &Header { meta: &self.meta })?;
        w.write_all(b"\n")?;
        for (x, y) in self.x.iter().zip(&self.y) {
            serde_json::to_writer(&mut *w, &SampleRef { x, y })?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Dataset> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "empty file, expected a meta header".into(),
        })?;
        let header: HeaderOwned = serde_json::from_str(&header?).map_err(|e| Error::Parse {
            line: 1,
            reason: format!("bad meta header: {e}"),
        })?;
        let meta = header.meta;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let s: Sample = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
            if s.x.len() != meta.n || s.y.len() != meta.outputs {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!(
                        "sample shape ({}, {}) does not match header ({}, {})",
                        s.x.len(),
                        s.y.len(),
                        meta.n,
                        meta.outputs
                    ),
                });
            }
            x.push(s.x);
            y.push(s.y);
        }
        Dataset::new(x, y, meta)
    }
}

#[derive(Serialize)]
struct Header<'a> {
    meta: &'a DatasetMeta,
}

#[derive(Deserialize)]
struct HeaderOwned {
    meta: DatasetMeta,
}

#[derive(Serialize)]
struct SampleRef<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

#[derive(Deserialize)]
struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

/// Uniformly distributed element of SO(n): polar factor of a Gaussian matrix.
pub fn random_rotation(n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = rng_for(seed, 11);
    loop {
        let raw = DMatrix::from_row_slice(n, n, &gaussian_vec(&mut rng, n * n));
        match lie::retract_orthogonal(&raw) {
            Ok(q) => return Ok(q),
            Err(Error::Singular(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// How [`make_random_generator`] picks its canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorPreset {
    /// Random `Q`; `λ` rationally dependent (small integer entries) or
    /// generic Gaussian with equal probability.
    Random,
    /// `Q = I`, `λ = (1, −1, 0, …)/√2`.
    Diagonal,
}

/// Random canonical form with unit-norm `λ`.
pub fn make_random_generator(
    n: usize,
    seed: u64,
    preset: GeneratorPreset,
) -> Result<CanonicalForm> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Dimension(format!("n must be even, got {n}")));
    }
    let r = n / 2;
    match preset {
        GeneratorPreset::Diagonal => {
            let mut lambda = vec![0.0; r];
            lambda[0] = 1.0;
            if r > 1 {
                lambda[1] = -1.0;
            }
            CanonicalForm::identity(unit(lambda))
        }
        GeneratorPreset::Random => {
            let q = random_rotation(n, seed)?;
            let mut rng = rng_for(seed, 12);
            let lambda = if r == 1 {
                vec![1.0]
            } else if rng.random_bool(0.5) {
                // Integer rates in [-2, 2] always admit a resonant primitive
                // (λ_j, −λ_i, 0, …) inside bandwidth 2.
                loop {
                    let v: Vec<f64> = (0..r).map(|_| rng.random_range(-2i32..=2) as f64).collect();
                    if v.iter().any(|&a| a != 0.0) {
                        break unit(v);
                    }
                }
            } else {
                unit(gaussian_vec(&mut rng, r))
            };
            CanonicalForm::new(q, lambda)
        }
    }
}

/// One torus character term `amplitude · env(r) · cos(⟨m, θ⟩ + phase)`,
/// with `env(r) = Π r_k^{|m_k|}` when `enveloped`, else 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterTerm {
    pub m: Vec<i64>,
    pub amplitude: f64,
    pub phase: f64,
    pub enveloped: bool,
}

/// Target `f(x) = Σ_k a_k r_k² / 2 + Σ terms`, all read in the frame
/// `z = Qᵀx`. Invariant under `exp(tB)` whenever every term is resonant.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantTarget {
    cf: CanonicalForm,
    qt: Vec<f64>,
    pub radial: Vec<f64>,
    pub terms: Vec<CharacterTerm>,
}

impl InvariantTarget {
    pub fn new(cf: CanonicalForm, radial: Vec<f64>, terms: Vec<CharacterTerm>) -> Result<Self> {
        let r = cf.lambda().len();
        if radial.len() != r || terms.iter().any(|t| t.m.len() != r) {
            return Err(Error::Shape("target terms do not match n / 2".into()));
        }
        let n = cf.n();
        let q = lie::to_row_major(cf.q());
        let mut qt = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                qt[j * n + i] = q[i * n + j];
            }
        }
        Ok(Self {
            cf,
            qt,
            radial,
            terms,
        })
    }

    pub fn canonical_form(&self) -> &CanonicalForm {
        &self.cf
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.cf.n();
        let z: Vec<f64> = (0..n)
            .map(|i| linalg::dot(&self.qt[i * n..(i + 1) * n], x))
            .collect();
        let p = spectral::block_polar(&z).expect("finite input");
        let mut f = 0.0;
        for (a, r) in self.radial.iter().zip(&p.radii) {
            f += 0.5 * a * r * r;
        }
        for t in &self.terms {
            let phase: f64 =
                t.m.iter()
                    .zip(&p.angles)
                    .map(|(&m, th)| m as f64 * th)
                    .sum();
            let env = if t.enveloped {
                t.m.iter()
                    .zip(&p.radii)
                    .map(|(&m, r)| r.powi(m.unsigned_abs() as i32))
                    .product()
            } else {
                1.0
            };
            f += t.amplitude * env * (phase + t.phase).cos();
        }
        f
    }

    /// Largest `|f(exp(tB)x) − f(x)|` over `pairs` random standard-normal
    /// `x` and `t ~ U[−π, π]`.
    pub fn audit(&self, pairs: usize, seed: u64) -> Result<f64> {
        let b = lie::assemble_generator(&self.cf);
        let n = self.cf.n();
        let mut rng = rng_for(seed, 13);
        let t_dist = Uniform::new(-PI, PI).expect("valid range");
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let x = gaussian_vec(&mut rng, n);
            let t = t_dist.sample(&mut rng);
            let rot = lie::matrix_exp(&b, t)?;
            let xr = &rot * nalgebra::DVector::from_column_slice(&x);
            worst = worst.max((self.eval(xr.as_slice()) - self.eval(&x)).abs());
        }
        Ok(worst)
    }
}

/// Samples `x ~ N(0, I)`, audits `target`, and labels with `f(x)` plus noise
/// (or the thresholded value when `classification`).
pub fn sample_target(
    target: &InvariantTarget,
    task_name: &str,
    samples: usize,
    noise_sigma: f64,
    seed: u64,
    classification: bool,
) -> Result<Dataset> {
    if samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::Argument(format!("noise sigma {noise_sigma} < 0")));
    }
    let worst = target.audit(AUDIT_PAIRS, seed)?;
    if worst > AUDIT_TOL {
        return Err(Error::Numeric(format!(
            "target failed the invariance audit (max deviation {worst:e})"
        )));
    }
    let n = target.cf.n();
    let mut rng = rng_for(seed, 14);
    let x: Vec<Vec<f64>> = (0..samples).map(|_| gaussian_vec(&mut rng, n)).collect();
    let clean: Vec<f64> = x.iter().map(|xi| target.eval(xi)).collect();
    let mut noise_rng = rng_for(seed, 15);
    let noisy: Vec<f64> = clean
        .iter()
        .map(|&f| {
            let e: f64 = StandardNormal.sample(&mut noise_rng);
            f + noise_sigma * e
        })
        .collect();
    let y: Vec<Vec<f64>> = if classification {
        let mut sorted = clean.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        noisy
            .iter()
            .map(|&v| vec![if v > median { 1.0 } else { 0.0 }])
            .collect()
    } else {
        noisy.into_iter().map(|v| vec![v]).collect()
    };
    let meta = DatasetMeta {
        task_name: task_name.to_string(),
        n,
        outputs: 1,
        noise_sigma,
        seed,
        classification,
        true_generator: Some(lie::assemble_generator(&target.cf)),
        true_lambda: Some(target.cf.lambda().to_vec()),
    };
    Dataset::new(x, y, meta)
}

/// Random invariant target for `cf`: distinct radial weights plus up to three
/// resonant characters of the primitive set; radial-only when nothing in the
/// bandwidth resonates.
pub fn random_invariant_target(
    cf: &CanonicalForm,
    seed: u64,
    bandwidth: u32,
) -> Result<InvariantTarget> {
    let r = cf.lambda().len();
    let mut rng = rng_for(seed, 16);
    // Evenly spread weights in [0.2, 1.0], randomly assigned to planes.
    let mut radial: Vec<f64> = (0..r)
        .map(|k| {
            if r == 1 {
                0.6
            } else {
                1.0 - 0.8 * k as f64 / (r - 1) as f64
            }
        })
        .collect();
    radial.shuffle(&mut rng);
    let candidates = spectral::primitive_set(bandwidth, r);
    let mut resonant = spectral::resonant_subset(cf.lambda(), &candidates, 1e-9).members;
    resonant.shuffle(&mut rng);
    let terms = resonant
        .into_iter()
        .take(3)
        .map(|m| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            CharacterTerm {
                m: m.entries().to_vec(),
                amplitude: sign * rng.random_range(0.6..1.0),
                phase: rng.random_range(0.0..2.0 * PI),
                enveloped: false,
            }
        })
        .collect();
    InvariantTarget::new(cf.clone(), radial, terms)
}

/// Regression data whose noiseless target is invariant under `exp(tB)`.
pub fn synth_invariant_regression(
    cf: &CanonicalForm,
    samples: usize,
    noise_sigma: f64,
    seed: u64,
    bandwidth: u32,
) -> Result<Dataset> {
    let target = random_invariant_target(cf, seed, bandwidth)?;
    sample_target(
        &target,
        "invariant-regression",
        samples,
        noise_sigma,
        seed,
        false,
    )
}

/// Binary labels `1[f(x) + ε > median f]` over the same invariant targets.
pub fn synth_invariant_classification(
    cf: &CanonicalForm,
    samples: usize,
    noise_sigma: f64,
    seed: u64,
    bandwidth: u32,
) -> Result<Dataset> {
    let target = random_invariant_target(cf, seed, bandwidth)?;
    sample_target(
        &target,
        "invariant-classification",
        samples,
        noise_sigma,
        seed,
        true,
    )
}

/// Target of the six-dimensional coupled-oscillator analog.
///
/// Three planes with distinct stiffnesses, the spring-coupling surrogate
/// `c Σ_{k<l} r_k r_l cos(θ_k − θ_l)`, and phase-locking terms
/// `d Σ_{k<l} cos(θ_k − θ_l + φ_kl)`. The first two alone form a quadratic
/// form, which is invariant under a whole maximal torus; the phase-locking
/// terms cut the symmetry down to the diagonal rotation.
pub fn pendulum_target() -> Result<InvariantTarget> {
    let lambda = vec![1.0 / 3f64.sqrt(); 3];
    let cf = CanonicalForm::identity(lambda)?;
    let pairs: [[i64; 3]; 3] = [[1, -1, 0], [1, 0, -1], [0, 1, -1]];
    let phases = [0.0, 0.9, 2.1];
    let mut terms = Vec::new();
    for m in pairs {
        terms.push(CharacterTerm {
            m: m.to_vec(),
            amplitude: 0.3,
            phase: 0.0,
            enveloped: true,
        });
    }
    for (m, phase) in pairs.iter().zip(phases) {
        terms.push(CharacterTerm {
            m: m.to_vec(),
            amplitude: 0.5,
            phase,
            enveloped: false,
        });
    }
    InvariantTarget::new(cf, vec![1.0, 0.7, 0.4], terms)
}

/// Six-dimensional analog with the diagonal generator
/// `blockdiag(J, J, J)/√3`.
pub fn double_pendulum_task(samples: usize, noise_sigma: f64, seed: u64) -> Result<Dataset> {
    sample_target(
        &pendulum_target()?,
        "pendulum6d",
        samples,
        noise_sigma,
        seed,
        false,
    )
}

/// Adds `N(0, σ²)` noise to every target entry.
pub fn add_noise(ds: &Dataset, sigma: f64, seed: u64) -> Result<Dataset> {
    if !(sigma >= 0.0) {
        return Err(Error::Argument(format!("noise sigma {sigma} < 0")));
    }
    let mut out = ds.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    let mut rng = rng_for(seed, 17);
    for row in &mut out.y {
        for v in row.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * e;
        }
    }
    out.meta.noise_sigma = (ds.meta.noise_sigma.powi(2) + sigma * sigma).sqrt();
    Ok(out)
}

/// Frequencies used by a target.
pub fn target_frequencies(t: &InvariantTarget) -> Vec<FrequencyVector> {
    t.terms
        .iter()
        .map(|c| FrequencyVector::new(c.m.clone()))
        .collect()
}
