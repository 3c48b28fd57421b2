//! The predictor: alignment `z = Qᵀx` with `Q = exp(A)`, per-block polar
//! coordinates, torus Fourier features `(cos⟨m,θ⟩, sin⟨m,θ⟩)` for every
//! primitive `m`, the block radii, and a ReLU MLP head.
//!
//! The first-layer input is laid out as
//! `[cos m₁, sin m₁, …, cos m_K, sin m_K, r₁, …, r_r]`.
//!
//! There are two forward paths over the same parameters: plain `f64`
//! evaluation ([`Evaluator`]) and a taped one ([`Model::objective_on_tape`]).
//! They perform the same floating-point operations in the same order, so
//! predictions agree exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Block, Tape, Var};
use crate::error::{Error, Result};
use crate::lie::{self, CanonicalForm, Generator};
use crate::linalg;
use crate::spectral::{self, FrequencyVector};

/// Radius assigned to a block whose squared norm is below `RADIUS_FLOOR²`.
/// Its angle is then 0 and carries no gradient.
pub const RADIUS_FLOOR: f64 = 1e-9;

/// Offsets of each parameter group inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub n: usize,
    /// Layer widths from input to output, e.g. `[2K + r, 64, 64, 64, m]`.
    pub widths: Vec<usize>,
}

impl ParamLayout {
    pub fn new(n: usize, widths: Vec<usize>) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::Dimension(format!("n must be even, got {n}")));
        }
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::Shape(format!("invalid layer widths {widths:?}")));
        }
        Ok(Self { n, widths })
    }

    pub fn rank(&self) -> usize {
        self.n / 2
    }

    pub fn skew_len(&self) -> usize {
        lie::skew_param_count(self.n)
    }

    pub fn skew_offset(&self) -> usize {
        0
    }

    pub fn lambda_offset(&self) -> usize {
        self.skew_len()
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    /// `(weights offset, bias offset)` of layer `l`; weights are row-major
    /// `out × in`.
    pub fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let mut off = self.lambda_offset() + self.rank();
        for k in 0..l {
            off += self.widths[k + 1] * self.widths[k] + self.widths[k + 1];
        }
        (off, off + self.widths[l + 1] * self.widths[l])
    }

    pub fn total(&self) -> usize {
        let (_, b) = self.layer_offsets(self.layer_count() - 1);
        b + self.widths[self.layer_count()]
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("layout has layers")
    }
}

/// Learnable parameters: skew parameters of `A`, rates `λ`, and MLP weights,
/// stored in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    layout: ParamLayout,
    values: Vec<f64>,
}

impl GeneratorParams {
    pub fn zeros(layout: ParamLayout) -> Self {
        let values = vec![0.0; layout.total()];
        Self { layout, values }
    }

    pub fn from_values(layout: ParamLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.total() {
            return Err(Error::Shape(format!(
                "layout needs {} parameters, got {}",
                layout.total(),
                values.len()
            )));
        }
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn skew(&self) -> &[f64] {
        let o = self.layout.skew_offset();
        &self.values[o..o + self.layout.skew_len()]
    }

    pub fn skew_mut(&mut self) -> &mut [f64] {
        let o = self.layout.skew_offset();
        let len = self.layout.skew_len();
        &mut self.values[o..o + len]
    }

    pub fn lambda(&self) -> &[f64] {
        let o = self.layout.lambda_offset();
        &self.values[o..o + self.layout.rank()]
    }

    pub fn lambda_mut(&mut self) -> &mut [f64] {
        let o = self.layout.lambda_offset();
        let r = self.layout.rank();
        &mut self.values[o..o + r]
    }

    /// Rescales `λ` to unit norm; a zero `λ` is left unchanged.
    pub fn normalize_lambda(&mut self) {
        let lambda = self.lambda_mut();
        let norm = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            lambda.iter_mut().for_each(|v| *v /= norm);
        }
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        let (w, b) = self.layout.layer_offsets(l);
        &self.values[w..b]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let (w, b) = self.layout.layer_offsets(l);
        &mut self.values[w..b]
    }

    pub fn bias(&self, l: usize) -> &[f64] {
        let (_, b) = self.layout.layer_offsets(l);
        &self.values[b..b + self.layout.widths[l + 1]]
    }

    pub fn bias_mut(&mut self, l: usize) -> &mut [f64] {
        let (_, b) = self.layout.layer_offsets(l);
        let w = self.layout.widths[l + 1];
        &mut self.values[b..b + w]
    }

    /// `Q = exp(A)`, row-major.
    pub fn alignment(&self) -> Vec<f64> {
        let n = self.layout.n;
        let a = skew_matrix_row_major(n, self.skew());
        linalg::expm_row_major(&a, n)
    }
}

fn skew_matrix_row_major(n: usize, params: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for (idx, (i, j)) in lie::skew_index_pairs(n).enumerate() {
        a[j * n + i] = params[idx];
        a[i * n + j] = -params[idx];
    }
    a
}

fn transpose(m: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = m[i * n + j];
        }
    }
    t
}

/// Per-frequency `(cos, sin)` pairs and block radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub u: Vec<(f64, f64)>,
    pub radii: Vec<f64>,
}

/// Training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    SquaredError,
    /// Binary cross-entropy on a single logit; targets in `{0, 1}`.
    Logistic,
}

impl LossKind {
    pub fn sample_loss(&self, pred: &[f64], target: &[f64]) -> f64 {
        match self {
            LossKind::SquaredError => pred
                .iter()
                .zip(target)
                .map(|(p, y)| (p - y) * (p - y))
                .sum(),
            LossKind::Logistic => pred
                .iter()
                .zip(target)
                .map(|(&z, &y)| crate::autodiff::softplus(z) - y * z)
                .sum(),
        }
    }
}

/// The full predictor: frequencies plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    bandwidth: u32,
    frequencies: Vec<FrequencyVector>,
    /// Frequencies as `f64`, row-major `K × r`.
    freq_table: Vec<f64>,
    params: GeneratorParams,
}

impl Model {
    /// Model with all parameters zero and `hidden.len()` hidden layers.
    pub fn new(n: usize, bandwidth: u32, hidden: &[usize], out: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::Dimension(format!("n must be even, got {n}")));
        }
        if bandwidth == 0 {
            return Err(Error::Argument("bandwidth must be at least 1".into()));
        }
        let frequencies = spectral::primitive_set(bandwidth, n / 2);
        let mut widths = vec![2 * frequencies.len() + n / 2];
        widths.extend_from_slice(hidden);
        widths.push(out);
        let layout = ParamLayout::new(n, widths)?;
        Self::with_params(bandwidth, frequencies, GeneratorParams::zeros(layout))
    }

    pub fn with_params(
        bandwidth: u32,
        frequencies: Vec<FrequencyVector>,
        params: GeneratorParams,
    ) -> Result<Self> {
        let layout = params.layout();
        let r = layout.rank();
        if frequencies.iter().any(|m| m.rank() != r) {
            return Err(Error::Shape("frequency rank does not match n / 2".into()));
        }
        if layout.input_width() != 2 * frequencies.len() + r {
            return Err(Error::Shape(format!(
                "input width {} does not match 2·{} + {r}",
                layout.input_width(),
                frequencies.len()
            )));
        }
        let freq_table = frequencies
            .iter()
            .flat_map(|m| m.entries().iter().map(|&v| v as f64))
            .collect();
        Ok(Self {
            bandwidth,
            frequencies,
            freq_table,
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.params.layout.n
    }

    pub fn rank(&self) -> usize {
        self.params.layout.rank()
    }

    pub fn bandwidth(&self) -> u32 {
        self.bandwidth
    }

    pub fn frequencies(&self) -> &[FrequencyVector] {
        &self.frequencies
    }

    pub fn params(&self) -> &GeneratorParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut GeneratorParams {
        &mut self.params
    }

    pub fn output_width(&self) -> usize {
        self.params.layout.output_width()
    }

    fn freq_row(&self, i: usize) -> &[f64] {
        let r = self.rank();
        &self.freq_table[i * r..(i + 1) * r]
    }

    /// Plain evaluator with `Qᵀ` precomputed.
    pub fn evaluator(&self) -> Evaluator<'_> {
        let n = self.n();
        Evaluator {
            model: self,
            qt: transpose(&self.params.alignment(), n),
        }
    }

    pub fn align(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.evaluator().align(x)
    }

    pub fn featurize(&self, x: &[f64]) -> Result<FeatureBundle> {
        self.evaluator().featurize(x)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.evaluator().predict(x)
    }

    /// `Σ_j W₁[j][cos m]² + W₁[j][sin m]²` for every frequency, in frequency
    /// order.
    fn coefficient_sq(&self) -> Vec<f64> {
        let w = self.params.weights(0);
        let width = self.params.layout.input_width();
        let hidden = self.params.layout.widths[1];
        (0..self.frequencies.len())
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..hidden {
                    let c = w[j * width + 2 * i];
                    let s = w[j * width + 2 * i + 1];
                    acc += c * c;
                    acc += s * s;
                }
                acc
            })
            .collect()
    }

    /// `C_m`: Euclidean norm of every first-layer weight reading the cos or
    /// sin channel of `m`.
    pub fn coefficient_norms(&self) -> BTreeMap<FrequencyVector, f64> {
        self.frequencies
            .iter()
            .cloned()
            .zip(self.coefficient_sq().into_iter().map(f64::sqrt))
            .collect()
    }

    /// `Σ_m (C_m ⟨m, λ⟩)²`.
    pub fn resonance_penalty(&self) -> f64 {
        let lambda = self.params.lambda();
        let sq = self.coefficient_sq();
        let mut total: Option<f64> = None;
        for (i, c2) in sq.iter().enumerate() {
            let d = linalg::dot(self.freq_row(i), lambda);
            let term = c2 * (d * d);
            total = Some(match total {
                None => term,
                Some(acc) => acc + term,
            });
        }
        total.unwrap_or(0.0)
    }

    /// Learned canonical form `(exp(A), λ)` with `exp(A)` retracted onto
    /// SO(n) to remove round-off drift.
    pub fn canonical_form(&self) -> Result<CanonicalForm> {
        let n = self.n();
        let q = lie::retract_orthogonal(&lie::from_row_major(n, n, &self.params.alignment()))?;
        CanonicalForm::new(q, self.params.lambda().to_vec())
    }

    pub fn generator(&self) -> Result<Generator> {
        Ok(lie::assemble_generator(&self.canonical_form()?))
    }

    /// Records the objective `L(y, φ(U, R)) + μ Σ_m (C_m⟨m,λ⟩)²` for a batch
    /// on `tape`; the parameters are the first leaves on the tape.
    pub fn objective_on_tape(
        &self,
        tape: &mut Tape,
        xs: &[&[f64]],
        ys: &[&[f64]],
        mu: f64,
        loss: LossKind,
    ) -> Result<Objective> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::Shape("batch inputs and targets differ".into()));
        }
        let layout = &self.params.layout;
        let n = layout.n;
        let r = layout.rank();
        let out_w = layout.output_width();
        let params = tape.leaves(&self.params.values);

        let qt = taped_alignment_transpose(tape, params, n);
        let layers: Vec<(Block, Block)> = (0..layout.layer_count())
            .map(|l| {
                let (w, b) = layout.layer_offsets(l);
                (params.sub(w, b - w), params.sub(b, layout.widths[l + 1]))
            })
            .collect();
        let freq_block = tape.constants(&self.freq_table);

        let mut sample_losses = Vec::with_capacity(xs.len() * out_w);
        for (x, y) in xs.iter().zip(ys) {
            if x.len() != n || y.len() != out_w {
                return Err(Error::Shape(format!(
                    "sample has shape ({}, {}), model expects ({n}, {out_w})",
                    x.len(),
                    y.len()
                )));
            }
            let input = self.taped_features(tape, &qt, freq_block, x)?;
            let pred = taped_mlp(tape, layout, &layers, input);
            for (k, &p) in pred.iter().enumerate() {
                let target = y[k];
                let term = match loss {
                    LossKind::SquaredError => {
                        let d = tape.offset(p, -target);
                        tape.square(d)
                    }
                    LossKind::Logistic => {
                        let sp = tape.softplus(p);
                        let yz = tape.scale(p, target);
                        tape.sub(sp, yz)
                    }
                };
                sample_losses.push(term);
            }
        }
        let total_loss = tape.sum_vars(&sample_losses);
        let data = tape.scale(total_loss, 1.0 / sample_losses.len() as f64);

        let lambda = params.sub(layout.lambda_offset(), r);
        let penalty = self.taped_penalty(tape, params, freq_block, lambda);
        let weighted = tape.scale(penalty, mu);
        let total = tape.add(data, weighted);
        Ok(Objective {
            params,
            total,
            data,
            penalty,
        })
    }

    fn taped_features(
        &self,
        tape: &mut Tape,
        qt: &[Block],
        freq_block: Block,
        x: &[f64],
    ) -> Result<Block> {
        let r = self.rank();
        let xb = tape.constants(x);
        let z: Vec<Var> = qt.iter().map(|&row| tape.dot(row, xb)).collect();
        let mut sq = Vec::with_capacity(r);
        for k in 0..r {
            let a = tape.square(z[2 * k]);
            let b = tape.square(z[2 * k + 1]);
            sq.push(tape.add(a, b));
        }
        let mut radii = Vec::with_capacity(r);
        for &s in &sq {
            radii.push(if s.value() < RADIUS_FLOOR * RADIUS_FLOOR {
                tape.constant(RADIUS_FLOOR)
            } else {
                tape.sqrt(s)?
            });
        }
        let theta_start = tape.len();
        for (k, &s) in sq.iter().enumerate() {
            if s.value() < RADIUS_FLOOR * RADIUS_FLOOR {
                tape.constant(0.0);
            } else {
                tape.atan2(z[2 * k + 1], z[2 * k])?;
            }
        }
        let theta = block_at(theta_start, r);
        let k_count = self.frequencies.len();
        let phases: Vec<Var> = (0..k_count)
            .map(|i| tape.dot(freq_block.sub(i * r, r), theta))
            .collect();
        let start = tape.len();
        for &p in &phases {
            tape.cos(p);
            tape.sin(p);
        }
        tape.gather(&radii);
        Ok(block_at(start, 2 * k_count + r))
    }

    fn taped_penalty(
        &self,
        tape: &mut Tape,
        params: Block,
        freq_block: Block,
        lambda: Block,
    ) -> Var {
        let layout = &self.params.layout;
        let r = layout.rank();
        let width = layout.input_width();
        let hidden = layout.widths[1];
        let (w_off, _) = layout.layer_offsets(0);
        let mut terms = Vec::with_capacity(self.frequencies.len());
        for i in 0..self.frequencies.len() {
            let mut acc: Option<Var> = None;
            for j in 0..hidden {
                for ch in 0..2 {
                    let w = tape.at(params, w_off + j * width + 2 * i + ch);
                    let sq = tape.square(w);
                    // The plain path starts from 0.0 and `0.0 + c² == c²`.
                    acc = Some(match acc {
                        None => sq,
                        Some(a) => tape.add(a, sq),
                    });
                }
            }
            let c2 = acc.expect("at least one hidden unit");
            let d = tape.dot(freq_block.sub(i * r, r), lambda);
            let d2 = tape.square(d);
            terms.push(tape.mul(c2, d2));
        }
        tape.sum_vars(&terms)
    }
}

/// Handles returned by [`Model::objective_on_tape`].
#[derive(Debug, Clone, Copy)]
pub struct Objective {
    /// All parameters, in [`GeneratorParams::values`] order.
    pub params: Block,
    pub total: Var,
    pub data: Var,
    pub penalty: Var,
}

fn block_at(start: usize, len: usize) -> Block {
    Block::from_raw(start as u32, len as u32)
}

/// Rows of `Qᵀ = exp(A)ᵀ` as contiguous blocks.
fn taped_alignment_transpose(tape: &mut Tape, params: Block, n: usize) -> Vec<Block> {
    let zero = tape.constant(0.0);
    let mut a = vec![zero; n * n];
    for (idx, (i, j)) in lie::skew_index_pairs(n).enumerate() {
        let p = tape.at(params, idx);
        a[j * n + i] = p;
        a[i * n + j] = tape.neg(p);
    }
    let q = taped_expm(tape, &a, n);
    let start = tape.len();
    let mut qt = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            qt.push(q[i * n + j]);
        }
    }
    tape.gather(&qt);
    (0..n).map(|row| block_at(start + row * n, n)).collect()
}

fn taped_matmul(tape: &mut Tape, a: &[Var], b: &[Var], n: usize) -> Vec<Var> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = tape.mul(a[i * n], b[j]);
            // The plain kernel starts from 0.0; `0.0 + p == p` exactly.
            for k in 1..n {
                let p = tape.mul(a[i * n + k], b[k * n + j]);
                acc = tape.add(acc, p);
            }
            out.push(acc);
        }
    }
    out
}

/// Same algorithm and operation order as [`linalg::expm_row_major`].
fn taped_expm(tape: &mut Tape, a: &[Var], n: usize) -> Vec<Var> {
    let primal: Vec<f64> = a.iter().map(|v| v.value()).collect();
    let s = linalg::squaring_count(linalg::norm_one(&primal, n));
    let scale = 0.5f64.powi(s as i32);
    let x: Vec<Var> = a.iter().map(|&v| tape.scale(v, scale)).collect();
    let one = tape.constant(1.0);
    let zero = tape.constant(0.0);
    let mut p: Vec<Var> = (0..n * n)
        .map(|idx| if idx / n == idx % n { one } else { zero })
        .collect();
    for k in (1..=linalg::EXP_TAYLOR_ORDER).rev() {
        let xp = taped_matmul(tape, &x, &p, n);
        let inv = 1.0 / k as f64;
        p = xp.iter().map(|&v| tape.scale(v, inv)).collect();
        for i in 0..n {
            p[i * n + i] = tape.offset(p[i * n + i], 1.0);
        }
    }
    for _ in 0..s {
        p = taped_matmul(tape, &p, &p, n);
    }
    p
}

fn taped_mlp(
    tape: &mut Tape,
    layout: &ParamLayout,
    layers: &[(Block, Block)],
    input: Block,
) -> Vec<Var> {
    let mut x = input;
    let last = layers.len() - 1;
    for (l, &(w, b)) in layers.iter().enumerate() {
        let (out_w, in_w) = (layout.widths[l + 1], layout.widths[l]);
        let pre_start = tape.len();
        for j in 0..out_w {
            let bias = tape.at(b, j);
            tape.affine(w.sub(j * in_w, in_w), x, bias);
        }
        let pre = block_at(pre_start, out_w);
        if l == last {
            return (0..out_w).map(|j| tape.at(pre, j)).collect();
        }
        let act_start = tape.len();
        for j in 0..out_w {
            let v = tape.at(pre, j);
            tape.relu(v);
        }
        x = block_at(act_start, out_w);
    }
    unreachable!("layout has at least one layer")
}

/// Plain forward evaluation with the alignment precomputed.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    model: &'a Model,
    qt: Vec<f64>,
}

impl Evaluator<'_> {
    /// `Z(x) = Qᵀx`.
    pub fn align(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.model.n();
        if x.len() != n {
            return Err(Error::Shape(format!(
                "expected {n} inputs, got {}",
                x.len()
            )));
        }
        Ok((0..n)
            .map(|i| linalg::dot(&self.qt[i * n..(i + 1) * n], x))
            .collect())
    }

    fn polar(&self, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r = z.len() / 2;
        let mut radii = Vec::with_capacity(r);
        let mut theta = Vec::with_capacity(r);
        for k in 0..r {
            let (a, b) = (z[2 * k], z[2 * k + 1]);
            let s = a * a + b * b;
            if s < RADIUS_FLOOR * RADIUS_FLOOR {
                radii.push(RADIUS_FLOOR);
                theta.push(0.0);
            } else {
                radii.push(s.sqrt());
                theta.push(b.atan2(a));
            }
        }
        (radii, theta)
    }

    pub fn featurize(&self, x: &[f64]) -> Result<FeatureBundle> {
        let z = self.align(x)?;
        let (radii, theta) = self.polar(&z);
        let u = (0..self.model.frequencies.len())
            .map(|i| {
                let p = linalg::dot(self.model.freq_row(i), &theta);
                (p.cos(), p.sin())
            })
            .collect();
        Ok(FeatureBundle { u, radii })
    }

    /// First-layer input vector.
    pub fn input(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.featurize(x)?;
        let mut v = Vec::with_capacity(2 * f.u.len() + f.radii.len());
        for (c, s) in f.u {
            v.push(c);
            v.push(s);
        }
        v.extend(f.radii);
        Ok(v)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let input = self.input(x)?;
        Ok(mlp_forward(self.model.params(), input))
    }
}

fn mlp_forward(params: &GeneratorParams, input: Vec<f64>) -> Vec<f64> {
    let layout = params.layout();
    let last = layout.layer_count() - 1;
    let mut x = input;
    for l in 0..=last {
        let (out_w, in_w) = (layout.widths[l + 1], layout.widths[l]);
        let w = params.weights(l);
        let b = params.bias(l);
        let mut y: Vec<f64> = (0..out_w)
            .map(|j| linalg::dot(&w[j * in_w..(j + 1) * in_w], &x) + b[j])
            .collect();
        if l != last {
            y.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        x = y;
    }
    x
}

/// Dense layer in checkpoint form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRepr {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// JSON checkpoint `{n, bandwidth, frequencies, skewParams, lambda, layers}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Checkpoint {
    pub n: usize,
    pub bandwidth: u32,
    pub frequencies: Vec<FrequencyVector>,
    pub skew_params: Vec<f64>,
    pub lambda: Vec<f64>,
    pub layers: Vec<LayerRepr>,
}

impl From<&Model> for Checkpoint {
    fn from(m: &Model) -> Self {
        let p = m.params();
        let layout = p.layout();
        let layers = (0..layout.layer_count())
            .map(|l| {
                let in_w = layout.widths[l];
                LayerRepr {
                    weights: p.weights(l).chunks(in_w).map(<[f64]>::to_vec).collect(),
                    bias: p.bias(l).to_vec(),
                }
            })
            .collect();
        Checkpoint {
            n: m.n(),
            bandwidth: m.bandwidth,
            frequencies: m.frequencies.clone(),
            skew_params: p.skew().to_vec(),
            lambda: p.lambda().to_vec(),
            layers,
        }
    }
}

impl Checkpoint {
    pub fn into_model(self) -> Result<Model> {
        if self.layers.is_empty() {
            return Err(Error::Shape("checkpoint has no layers".into()));
        }
        let mut widths = vec![self.layers[0].weights.first().map_or(0, Vec::len)];
        for layer in &self.layers {
            if layer.weights.len() != layer.bias.len() {
                return Err(Error::Shape("weight rows and bias differ".into()));
            }
            widths.push(layer.bias.len());
        }
        let layout = ParamLayout::new(self.n, widths)?;
        let mut values = Vec::with_capacity(layout.total());
        values.extend_from_slice(&self.skew_params);
        values.extend_from_slice(&self.lambda);
        for (l, layer) in self.layers.iter().enumerate() {
            for row in &layer.weights {
                if row.len() != layout.widths[l] {
                    return Err(Error::Shape(format!("ragged weights in layer {l}")));
                }
                values.extend_from_slice(row);
            }
            values.extend_from_slice(&layer.bias);
        }
        let params = GeneratorParams::from_values(layout, values)?;
        Model::with_params(self.bandwidth, self.frequencies, params)
    }
}
