//! Torus-side machinery: polar block coordinates, the primitive frequency
//! lattice, torus characters, resonant sets, and rate recovery from the
//! frequencies that survive training.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used to count the nullity of `M`.
pub const NULLITY_CUTOFF: f64 = 1e-8;

/// Integer frequency `m ∈ ℤ^r` indexing the torus character `e^{i⟨m,θ⟩}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyVector {
    m: Vec<i64>,
    primitive: bool,
}

impl FrequencyVector {
    /// Wraps `m` as-is; the primitive flag is computed, not assumed.
    pub fn new(m: Vec<i64>) -> Self {
        let primitive = is_sign_canonical_primitive(&m);
        Self { m, primitive }
    }

    pub fn entries(&self) -> &[i64] {
        &self.m
    }

    pub fn rank(&self) -> usize {
        self.m.len()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|&v| v == 0)
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.m.iter().zip(v).map(|(&a, &b)| a as f64 * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.m.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> i64 {
        self.m.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.m.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for FrequencyVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrequencyVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(FrequencyVector::new(Vec::<i64>::deserialize(d)?))
    }
}

fn gcd_abs(m: &[i64]) -> i64 {
    m.iter().fold(0i64, |g, &v| g.gcd(&v))
}

fn first_nonzero(m: &[i64]) -> Option<i64> {
    m.iter().copied().find(|&v| v != 0)
}

fn is_sign_canonical_primitive(m: &[i64]) -> bool {
    gcd_abs(m) == 1 && first_nonzero(m).is_some_and(|v| v > 0)
}

/// Radii and angles of the `r = n/2` planar blocks of an aligned vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
}

impl TorusPoint {
    pub fn rank(&self) -> usize {
        self.angles.len()
    }

    /// Moves every angle by `delta` (no wrapping; characters are periodic).
    pub fn shifted(&self, delta: &[f64]) -> TorusPoint {
        TorusPoint {
            radii: self.radii.clone(),
            angles: self.angles.iter().zip(delta).map(|(a, d)| a + d).collect(),
        }
    }
}

/// Polar coordinates of consecutive coordinate pairs. A zero block maps to
/// radius 0 and angle 0.
pub fn block_polar(z: &[f64]) -> Result<TorusPoint> {
    if !z.len().is_multiple_of(2) || z.is_empty() {
        return Err(Error::Dimension(format!(
            "block decomposition needs an even length, got {}",
            z.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite coordinate".into()));
    }
    let r = z.len() / 2;
    let mut radii = Vec::with_capacity(r);
    let mut angles = Vec::with_capacity(r);
    for pair in z.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        radii.push(a.hypot(b));
        angles.push(wrap_angle(if a == 0.0 && b == 0.0 {
            0.0
        } else {
            b.atan2(a)
        }));
    }
    Ok(TorusPoint { radii, angles })
}

/// Maps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Primitive representative `m / gcd(|m_1|, …, |m_r|)` with its first
/// nonzero entry made positive.
pub fn primitive(m: &[i64]) -> Result<FrequencyVector> {
    let g = gcd_abs(m);
    if g == 0 {
        return Err(Error::Argument(
            "the zero vector has no primitive direction".into(),
        ));
    }
    let sign = if first_nonzero(m).unwrap_or(1) < 0 {
        -1
    } else {
        1
    };
    Ok(FrequencyVector::new(
        m.iter().map(|&v| sign * v / g).collect(),
    ))
}

/// All sign-canonical primitive directions with entries in `[-B, B]`, in
/// lexicographic order.
///
/// A primitive `m` is its own representative, so it suffices to walk the box
/// in lexicographic order and keep points that are already canonical.
pub fn primitive_set(bandwidth: u32, r: usize) -> Vec<FrequencyVector> {
    if r == 0 || bandwidth == 0 {
        return Vec::new();
    }
    let b = bandwidth as i64;
    let mut out = Vec::new();
    let mut point = vec![-b; r];
    loop {
        if is_sign_canonical_primitive(&point) {
            out.push(FrequencyVector {
                m: point.clone(),
                primitive: true,
            });
        }
        // Odometer increment, last coordinate fastest.
        let mut k = r;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if point[k] < b {
                point[k] += 1;
                break;
            }
            point[k] = -b;
        }
    }
}

/// `e^{i⟨m, θ⟩}`.
pub fn character(m: &FrequencyVector, p: &TorusPoint) -> Complex64 {
    let phase = m.dot(&p.angles);
    let (s, c) = phase.sin_cos();
    Complex64::new(c, s)
}

/// Frequencies satisfying the resonance condition `⟨m, λ⟩ = 0` up to a
/// relative tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonantSet {
    pub lambda: Vec<f64>,
    pub tol: f64,
    pub members: Vec<FrequencyVector>,
}

impl ResonantSet {
    pub fn contains(&self, m: &FrequencyVector) -> bool {
        self.members.binary_search(m).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
}

pub fn is_resonant(m: &FrequencyVector, lambda: &[f64], tol: f64) -> bool {
    let lnorm = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
    m.dot(lambda).abs() <= tol * m.norm() * lnorm
}

/// Members `m` of `candidates` with `|⟨m, λ⟩| ≤ tol ‖m‖ ‖λ‖`.
pub fn resonant_subset(lambda: &[f64], candidates: &[FrequencyVector], tol: f64) -> ResonantSet {
    let mut members: Vec<FrequencyVector> = candidates
        .iter()
        .filter(|m| is_resonant(m, lambda, tol))
        .cloned()
        .collect();
    members.sort();
    members.dedup();
    ResonantSet {
        lambda: lambda.to_vec(),
        tol,
        members,
    }
}

/// Result of recovering `λ` from surviving frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    /// Unit right-singular vector for the smallest singular value of `M`,
    /// first nonzero component positive.
    pub lambda: Vec<f64>,
    /// Number of singular values at or below `1e-8 σ_max` (`r` if `M` is empty).
    pub nullity: usize,
    pub singular_values: Vec<f64>,
}

impl LambdaEstimate {
    /// `λ` is determined up to sign only when the nullspace is a line.
    pub fn is_unique(&self) -> bool {
        self.nullity == 1
    }
}

/// Flips `v` so that its first component with magnitude above `1e-12` is
/// positive.
pub fn sign_canonicalize(v: &mut [f64]) {
    if let Some(&lead) = v.iter().find(|x| x.abs() > 1e-12) {
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Solves `min ‖Mλ‖ s.t. ‖λ‖ = 1` where the rows of `M` are the surviving
/// frequencies.
pub fn estimate_lambda(surviving: &[FrequencyVector], r: usize) -> Result<LambdaEstimate> {
    if r == 0 {
        return Err(Error::Argument("rank must be positive".into()));
    }
    if let Some(bad) = surviving.iter().find(|m| m.rank() != r) {
        return Err(Error::Shape(format!(
            "frequency {bad} does not have {r} entries"
        )));
    }
    if surviving.is_empty() {
        let mut lambda = vec![0.0; r];
        lambda[0] = 1.0;
        return Ok(LambdaEstimate {
            lambda,
            nullity: r,
            singular_values: vec![0.0; r],
        });
    }
    // Pad to at least r rows so the SVD returns a full right basis.
    let rows = surviving.len().max(r);
    let mut m = DMatrix::<f64>::zeros(rows, r);
    for (i, f) in surviving.iter().enumerate() {
        for (j, &v) in f.entries().iter().enumerate() {
            m[(i, j)] = v as f64;
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("svd did not return right singular vectors".into()))?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let nullity = if sigma_max == 0.0 {
        r
    } else {
        sigma
            .iter()
            .filter(|&&s| s <= NULLITY_CUTOFF * sigma_max)
            .count()
    };
    let idx = sigma
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut lambda: Vec<f64> = (0..r).map(|j| v_t[(idx, j)]).collect();
    let norm = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
    lambda.iter_mut().for_each(|v| *v /= norm);
    sign_canonicalize(&mut lambda);
    let mut singular_values = sigma;
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(LambdaEstimate {
        lambda,
        nullity,
        singular_values,
    })
}

/// Frequencies whose coefficient is at least `rel_threshold` times the
/// largest one, in key order. An all-zero map has no survivors.
pub fn surviving_frequencies(
    coeffs: &BTreeMap<FrequencyVector, f64>,
    rel_threshold: f64,
) -> Vec<FrequencyVector> {
    let max = coeffs.values().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    coeffs
        .iter()
        .filter(|(_, &c)| c >= rel_threshold * max)
        .map(|(m, _)| m.clone())
        .collect()
}
