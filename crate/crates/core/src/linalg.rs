//! Small dense helpers shared by the plain and taped forward paths.
//!
//! Both paths call [`dot`] so that a taped forward pass reproduces the plain
//! evaluation bit-for-bit.

/// Inner product with four independent accumulators.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let chunks = n / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..chunks {
        let i = 4 * c;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major square matrix product `a · b` for `n × n` operands.
pub fn matmul_square(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Maximum absolute column sum.
pub fn norm_one(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Number of squarings `s` such that `norm / 2^s <= SCALED_NORM_TARGET`.
pub fn squaring_count(norm: f64) -> u32 {
    let mut s = 0u32;
    let mut scaled = norm;
    while scaled > SCALED_NORM_TARGET {
        scaled *= 0.5;
        s += 1;
    }
    s
}

/// Upper bound on `‖A‖₁ / 2^s` before the series is evaluated.
pub const SCALED_NORM_TARGET: f64 = 0.25;

/// Taylor order used inside scaling-and-squaring.
pub const EXP_TAYLOR_ORDER: usize = 10;

/// `exp(a)` for a row-major `n × n` matrix by scaling-and-squaring with a
/// truncated Taylor series evaluated in Horner form.
pub fn expm_row_major(a: &[f64], n: usize) -> Vec<f64> {
    let s = squaring_count(norm_one(a, n));
    let scale = 0.5f64.powi(s as i32);
    let x: Vec<f64> = a.iter().map(|v| v * scale).collect();
    let mut p = identity(n);
    for k in (1..=EXP_TAYLOR_ORDER).rev() {
        let xp = matmul_square(&x, &p, n);
        let inv = 1.0 / k as f64;
        p = xp.iter().map(|v| v * inv).collect();
        for i in 0..n {
            p[i * n + i] += 1.0;
        }
    }
    for _ in 0..s {
        p = matmul_square(&p, &p, n);
    }
    p
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}
