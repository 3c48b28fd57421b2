//! Skew-symmetric generator algebra.
//!
//! Generators are built from a canonical form `B = Q (⊕_k λ_k J) Qᵀ` with
//! `J = [[0, -1], [1, 0]]`; arbitrary `B` are never decomposed.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;

/// Orthogonality and determinant tolerance for canonical forms.
pub const ORTHO_TOL: f64 = 1e-10;
/// Denominator guard for generator cosine similarity.
pub const COSINE_EPS: f64 = 1e-12;

fn check_even(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "ambient dimension must be even and positive, got {n}"
        )));
    }
    Ok(())
}

/// Row-major copy of a matrix.
pub fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// A skew-symmetric `n × n` matrix with `n` even.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    entries: DMatrix<f64>,
}

impl Generator {
    pub fn zeros(n: usize) -> Result<Self> {
        check_even(n)?;
        Ok(Self {
            entries: DMatrix::zeros(n, n),
        })
    }

    /// Accepts a matrix that is skew-symmetric up to `1e-12` (relative to its
    /// Frobenius norm) and stores its exact skew part `(M - Mᵀ) / 2`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "generator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_even(m.nrows())?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite generator entry".into()));
        }
        let asym = (&m + m.transpose()).norm();
        if asym > 1e-12 * m.norm().max(1.0) {
            return Err(Error::Argument(format!(
                "matrix is not skew-symmetric (|M + Mᵀ| = {asym:e})"
            )));
        }
        Ok(Self {
            entries: skew_part(&m),
        })
    }

    /// Builds `A = Σ_{i<j} p_ij (e_j e_iᵀ - e_i e_jᵀ)` from the upper-triangle
    /// parameters in row-major order, so `p = 1` with `n = 2` gives `J`.
    pub fn from_skew_params(n: usize, params: &[f64]) -> Result<Self> {
        check_even(n)?;
        if params.len() != skew_param_count(n) {
            return Err(Error::Shape(format!(
                "expected {} skew parameters for n = {n}, got {}",
                skew_param_count(n),
                params.len()
            )));
        }
        let mut m = DMatrix::zeros(n, n);
        for (idx, (i, j)) in skew_index_pairs(n).enumerate() {
            m[(j, i)] = params[idx];
            m[(i, j)] = -params[idx];
        }
        Ok(Self { entries: m })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn scaled(&self, a: f64) -> Generator {
        Generator {
            entries: &self.entries * a,
        }
    }

    /// Frobenius norm of `B + Bᵀ`.
    pub fn skew_defect(&self) -> f64 {
        (&self.entries + self.entries.transpose()).norm()
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratorRepr {
    n: usize,
    entries: Vec<f64>,
}

impl Serialize for Generator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeneratorRepr {
            n: self.n(),
            entries: to_row_major(&self.entries),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GeneratorRepr::deserialize(d)?;
        if repr.entries.len() != repr.n * repr.n {
            return Err(serde::de::Error::custom(format!(
                "generator with n = {} needs {} entries, got {}",
                repr.n,
                repr.n * repr.n,
                repr.entries.len()
            )));
        }
        Generator::from_matrix(from_row_major(repr.n, repr.n, &repr.entries))
            .map_err(serde::de::Error::custom)
    }
}

fn skew_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Number of free parameters of a skew-symmetric `n × n` matrix.
pub fn skew_param_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `(i, j)` with `i < j` in row-major order.
pub fn skew_index_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Orthogonal alignment `q ∈ SO(n)` and per-plane rotation rates.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    q: DMatrix<f64>,
    lambda: Vec<f64>,
    normalized: bool,
}

impl CanonicalForm {
    pub fn new(q: DMatrix<f64>, lambda: Vec<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::Shape("alignment matrix must be square".into()));
        }
        let n = q.nrows();
        check_even(n)?;
        if lambda.len() != n / 2 {
            return Err(Error::Shape(format!(
                "expected {} rotation rates for n = {n}, got {}",
                n / 2,
                lambda.len()
            )));
        }
        if lambda.iter().any(|v| !v.is_finite()) || q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite canonical form".into()));
        }
        let ortho = (q.transpose() * &q - DMatrix::identity(n, n)).norm();
        if ortho > ORTHO_TOL {
            return Err(Error::Argument(format!(
                "alignment is not orthogonal (|QᵀQ - I| = {ortho:e})"
            )));
        }
        let det = q.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::Argument(format!(
                "alignment determinant is {det}, expected +1"
            )));
        }
        let norm = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Self {
            q,
            lambda,
            normalized: (norm - 1.0).abs() <= 1e-12,
        })
    }

    pub fn identity(lambda: Vec<f64>) -> Result<Self> {
        let n = 2 * lambda.len();
        Self::new(DMatrix::identity(n, n), lambda)
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

#[derive(Serialize, Deserialize)]
struct CanonicalRepr {
    q: Vec<Vec<f64>>,
    lambda: Vec<f64>,
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        CanonicalRepr {
            q: (0..n)
                .map(|i| (0..n).map(|j| self.q[(i, j)]).collect())
                .collect(),
            lambda: self.lambda.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CanonicalRepr::deserialize(d)?;
        let n = repr.q.len();
        if repr.q.iter().any(|row| row.len() != n) {
            return Err(serde::de::Error::custom("q must be square"));
        }
        let flat: Vec<f64> = repr.q.into_iter().flatten().collect();
        CanonicalForm::new(from_row_major(n, n, &flat), repr.lambda)
            .map_err(serde::de::Error::custom)
    }
}

/// `blockdiag(λ_1 J, …, λ_r J)`.
pub fn block_diagonal(lambda: &[f64]) -> DMatrix<f64> {
    let n = 2 * lambda.len();
    let mut d = DMatrix::zeros(n, n);
    for (k, &l) in lambda.iter().enumerate() {
        d[(2 * k + 1, 2 * k)] = l;
        d[(2 * k, 2 * k + 1)] = -l;
    }
    d
}

/// `B = Q (⊕ λ_k J) Qᵀ`.
pub fn assemble_generator(cf: &CanonicalForm) -> Generator {
    let d = block_diagonal(&cf.lambda);
    let n = cf.n();
    if cf.q == DMatrix::<f64>::identity(n, n) {
        return Generator { entries: d };
    }
    let b = &cf.q * d * cf.q.transpose();
    Generator {
        entries: skew_part(&b),
    }
}

/// `exp(tB)` by scaling-and-squaring with an order-10 Taylor series.
pub fn matrix_exp(b: &Generator, t: f64) -> Result<DMatrix<f64>> {
    if !t.is_finite() || b.entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite input to matrix_exp".into()));
    }
    let n = b.n();
    let scaled: Vec<f64> = to_row_major(&b.entries).iter().map(|v| v * t).collect();
    let out = linalg::expm_row_major(&scaled, n);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix_exp overflowed".into()));
    }
    Ok(from_row_major(n, n, &out))
}

/// Special-orthogonal polar factor of a full-rank square matrix.
pub fn retract_orthogonal(raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if raw.nrows() != raw.ncols() {
        return Err(Error::Shape("retraction needs a square matrix".into()));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite matrix".into()));
    }
    let n = raw.nrows();
    let svd = raw.clone().svd(true, true);
    let (Some(mut u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::Numeric("svd failed to converge".into()));
    };
    let sigma = &svd.singular_values;
    let (max, min) = sigma
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if max == 0.0 || min <= 1e-12 * max {
        return Err(Error::Singular(format!(
            "matrix is rank deficient (σ_min / σ_max = {:e})",
            if max == 0.0 { 0.0 } else { min / max }
        )));
    }
    let mut q = &u * &v_t;
    if q.determinant() < 0.0 {
        // Flip the direction paired with the smallest singular value.
        let k = sigma
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(n - 1);
        for i in 0..n {
            u[(i, k)] = -u[(i, k)];
        }
        q = &u * &v_t;
    }
    Ok(q)
}

/// Cosine similarity between two generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cosine {
    pub value: f64,
    /// Set when either generator is zero; `value` is then 0.
    pub degenerate: bool,
}

/// `⟨vec X, vec Y⟩ / (‖X‖ ‖Y‖ + ε)`.
pub fn generator_cosine_similarity(x: &Generator, y: &Generator) -> Result<Cosine> {
    if x.n() != y.n() {
        return Err(Error::Shape(format!(
            "cannot compare generators of size {} and {}",
            x.n(),
            y.n()
        )));
    }
    let nx = x.entries.norm();
    let ny = y.entries.norm();
    if nx == 0.0 || ny == 0.0 {
        return Ok(Cosine {
            value: 0.0,
            degenerate: true,
        });
    }
    let inner = x.entries.dot(&y.entries);
    Ok(Cosine {
        value: (inner / (nx * ny + COSINE_EPS)).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// Applies the gauge move `Q ↦ Q S Pᵀ`, `λ'_k = λ_{perm[k]}`, where
/// `S = ⊕ R(α_k)` and `P` moves block `perm[k]` to slot `k`.
pub fn gauge_equivalent(
    cf: &CanonicalForm,
    block_angles: &[f64],
    perm: &[usize],
) -> Result<CanonicalForm> {
    let r = cf.lambda.len();
    if block_angles.len() != r || perm.len() != r {
        return Err(Error::Shape(format!(
            "gauge move needs {r} angles and a permutation of {r}"
        )));
    }
    let mut seen = vec![false; r];
    for &p in perm {
        if p >= r || seen[p] {
            return Err(Error::Argument(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let n = cf.n();
    let mut s = DMatrix::zeros(n, n);
    for (k, &a) in block_angles.iter().enumerate() {
        let (sin, cos) = a.sin_cos();
        s[(2 * k, 2 * k)] = cos;
        s[(2 * k, 2 * k + 1)] = -sin;
        s[(2 * k + 1, 2 * k)] = sin;
        s[(2 * k + 1, 2 * k + 1)] = cos;
    }
    // Column block k of Pᵀ is e-block perm[k].
    let mut p_t = DMatrix::zeros(n, n);
    for (k, &src) in perm.iter().enumerate() {
        p_t[(2 * src, 2 * k)] = 1.0;
        p_t[(2 * src + 1, 2 * k + 1)] = 1.0;
    }
    let q = &cf.q * s * p_t;
    let lambda = perm.iter().map(|&p| cf.lambda[p]).collect();
    CanonicalForm::new(q, lambda)
}
