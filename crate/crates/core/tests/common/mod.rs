//! Independent oracles shared by the integration tests and the acceptance
//! runner.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torusym_core::autodiff::Tape;
use torusym_core::lie::{self, CanonicalForm, Generator};
use torusym_core::{LossKind, Model};

pub type Q = Ratio<i128>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Row-reduces `rows` over the rationals; returns the reduced rows and the
/// pivot columns.
pub fn rref(rows: &[Vec<i64>], cols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| Q::from_integer(v as i128)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&i| m[i][col] != Q::from_integer(0)) else {
            continue;
        };
        m.swap(row, p);
        let lead = m[row][col];
        for v in m[row].iter_mut() {
            *v /= lead;
        }
        for i in 0..m.len() {
            if i != row && m[i][col] != Q::from_integer(0) {
                let f = m[i][col];
                for j in 0..cols {
                    let d = f * m[row][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    (m, pivots)
}

pub fn rational_rank(rows: &[Vec<i64>], cols: usize) -> usize {
    rref(rows, cols).1.len()
}

/// Basis of the rational nullspace of the matrix with the given integer rows.
pub fn rational_nullspace(rows: &[Vec<i64>], cols: usize) -> Vec<Vec<Q>> {
    let (m, pivots) = rref(rows, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::from_integer(0); cols];
            v[f] = Q::from_integer(1);
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -m[i][f];
            }
            v
        })
        .collect()
}

/// Unit vector along a rational direction.
pub fn unit(v: &[Q]) -> Vec<f64> {
    let f: Vec<f64> = v
        .iter()
        .map(|q| *q.numer() as f64 / *q.denom() as f64)
        .collect();
    let n = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    f.iter().map(|x| x / n).collect()
}

/// Random integer matrix with `r` columns and rational rank exactly `r − 1`.
pub fn random_corank_one(rng: &mut ChaCha8Rng, r: usize) -> Vec<Vec<i64>> {
    loop {
        let basis: Vec<Vec<i64>> = (0..r - 1)
            .map(|_| (0..r).map(|_| rng.random_range(-4..=4)).collect())
            .collect();
        let rows = rng.random_range(r - 1..=r + 2);
        let m: Vec<Vec<i64>> = (0..rows)
            .map(|_| {
                let c: Vec<i64> = (0..r - 1).map(|_| rng.random_range(-3..=3)).collect();
                (0..r)
                    .map(|j| (0..r - 1).map(|k| c[k] * basis[k][j]).sum())
                    .collect()
            })
            .collect();
        if rational_rank(&m, r) == r - 1 && m.iter().all(|row| row.iter().any(|&v| v != 0)) {
            return m;
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Every nonzero lattice point in `[-B, B]^r`, divided by its gcd and
/// flipped so the first nonzero entry is positive.
pub fn brute_primitive_set(bandwidth: i64, r: usize) -> BTreeSet<Vec<i64>> {
    let side = (2 * bandwidth + 1) as usize;
    let mut out = BTreeSet::new();
    for code in 0..side.pow(r as u32) {
        let mut c = code;
        let mut m = Vec::with_capacity(r);
        for _ in 0..r {
            m.push((c % side) as i64 - bandwidth);
            c /= side;
        }
        let g = m.iter().fold(0, |g, &v| gcd(g, v));
        if g == 0 {
            continue;
        }
        let lead = *m.iter().find(|&&v| v != 0).unwrap();
        let s = if lead < 0 { -1 } else { 1 };
        out.insert(m.iter().map(|&v| s * v / g).collect());
    }
    out
}

/// Trapezoid-rule `(2π)^{-r} ∫ F(θ) e^{-i⟨m,θ⟩} dθ` on a `grid^r` lattice.
pub fn trapezoid_coefficient(f: &dyn Fn(&[f64]) -> Complex64, m: &[i64], grid: usize) -> Complex64 {
    let r = m.len();
    let h = std::f64::consts::TAU / grid as f64;
    let total = grid.pow(r as u32);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut theta = vec![0.0; r];
    for code in 0..total {
        let mut c = code;
        for t in theta.iter_mut() {
            *t = (c % grid) as f64 * h;
            c /= grid;
        }
        let phase: f64 = m.iter().zip(&theta).map(|(&k, t)| k as f64 * t).sum();
        acc += f(&theta) * Complex64::from_polar(1.0, -phase);
    }
    acc / total as f64
}

/// Random generator with standard-normal skew parameters times `scale`.
pub fn random_generator(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Generator {
    let params: Vec<f64> = (0..lie::skew_param_count(n))
        .map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    Generator::from_skew_params(n, &params).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng, r: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..r)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// `exp(tB)` for `B = Q (⊕ λ_k J) Qᵀ` as `Q (⊕ R(λ_k t)) Qᵀ`.
pub fn closed_form_exp(cf: &CanonicalForm, t: f64) -> DMatrix<f64> {
    let n = cf.n();
    let mut d = DMatrix::zeros(n, n);
    for (k, &l) in cf.lambda().iter().enumerate() {
        let (s, c) = (l * t).sin_cos();
        d[(2 * k, 2 * k)] = c;
        d[(2 * k, 2 * k + 1)] = -s;
        d[(2 * k + 1, 2 * k)] = s;
        d[(2 * k + 1, 2 * k + 1)] = c;
    }
    cf.q() * d * cf.q().transpose()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn objective_value(
    model: &Model,
    xs: &[&[f64]],
    ys: &[&[f64]],
    mu: f64,
    kind: LossKind,
) -> f64 {
    let mut tape = Tape::new();
    model
        .objective_on_tape(&mut tape, xs, ys, mu, kind)
        .unwrap()
        .total
        .value()
}

/// Largest `|g_ad − g_fd| / max(|g_ad|, |g_fd|, floor)` over all parameters.
/// `g_fd` is Ridders' extrapolation of central differences, starting at step
/// `h` and shrinking by 1.4 per stage; the estimate with the smallest error
/// bound is kept.
pub fn gradient_check(
    model: &Model,
    xs: &[&[f64]],
    ys: &[&[f64]],
    mu: f64,
    kind: LossKind,
    h: f64,
    floor: f64,
) -> f64 {
    let mut tape = Tape::new();
    let obj = model
        .objective_on_tape(&mut tape, xs, ys, mu, kind)
        .unwrap();
    let grads = tape.backward(obj.total).unwrap();
    let ad = grads.block(obj.params).to_vec();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (i, &g) in ad.iter().enumerate() {
        let v = probe.params().values()[i];
        let mut central = |step: f64| {
            probe.params_mut().values_mut()[i] = v + step;
            let up = objective_value(&probe, xs, ys, mu, kind);
            probe.params_mut().values_mut()[i] = v - step;
            let down = objective_value(&probe, xs, ys, mu, kind);
            probe.params_mut().values_mut()[i] = v;
            (up - down) / (2.0 * step)
        };
        let fd = ridders(&mut central, h);
        let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(floor);
        worst = worst.max(rel);
    }
    worst
}

/// Ridders' polynomial extrapolation of `d(step)` to `step → 0`.
pub fn ridders(d: &mut dyn FnMut(f64) -> f64, h: f64) -> f64 {
    const SHRINK: f64 = 1.4;
    const STAGES: usize = 10;
    let shrink2 = SHRINK * SHRINK;
    let mut table = vec![vec![0.0; STAGES]; STAGES];
    let mut step = h;
    table[0][0] = d(step);
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..STAGES {
        step /= SHRINK;
        table[0][i] = d(step);
        let mut fac = shrink2;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= shrink2;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    best
}

/// Model with every parameter drawn at random.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    n: usize,
    bandwidth: u32,
    hidden: &[usize],
    out: usize,
) -> Model {
    let mut model = Model::new(n, bandwidth, hidden, out).unwrap();
    let skew_len = lie::skew_param_count(n);
    for (i, v) in model.params_mut().values_mut().iter_mut().enumerate() {
        let scale = if i < skew_len { 0.5 } else { 0.4 };
        *v = scale * rng.sample::<f64, _>(rand_distr::StandardNormal);
    }
    model.params_mut().normalize_lambda();
    model
}

pub fn random_batch(
    rng: &mut ChaCha8Rng,
    n: usize,
    out: usize,
    len: usize,
    binary: bool,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let xs = (0..len)
        .map(|_| {
            (0..n)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect()
        })
        .collect();
    let ys = (0..len)
        .map(|_| {
            (0..out)
                .map(|_| {
                    if binary {
                        f64::from(rng.random_bool(0.5))
                    } else {
                        rng.sample::<f64, _>(rand_distr::StandardNormal)
                    }
                })
                .collect()
        })
        .collect();
    (xs, ys)
}
