//! Spectral discovery of one-parameter rotation symmetries.
//!
//! A predictor is trained on `(x, y)` pairs through a learned orthogonal
//! alignment `Q = exp(A)`, maximal-torus Fourier features and radii, and an
//! MLP head. A resonance penalty `Σ_m (C_m ⟨m, λ⟩)²` pushes first-layer mass
//! onto frequencies orthogonal to the learned rotation rates `λ`, from which
//! the generator `B = Q (⊕ λ_k J) Qᵀ` is reassembled.
//!
//! Module map:
//!
//! - [`lie`]: skew-symmetric generators, matrix exponential, gauge moves.
//! - [`spectral`]: polar block coordinates, primitive frequencies, characters,
//!   resonant sets and rate recovery.
//! - [`autodiff`]: scalar reverse-mode tape.
//! - [`model`]: features, MLP, coefficient norms, resonance penalty.
//! - [`train`]: Adam loop with the μ schedule and generator read-out.
//! - [`data`]: synthetic invariant tasks and the JSON-lines dataset format.
//! - [`eval`]: metrics and sweeps.

pub mod autodiff;
pub mod data;
pub mod error;
pub mod eval;
pub mod lie;
pub mod linalg;
pub mod model;
pub mod spectral;
pub mod train;

pub use autodiff::{Gradients, Tape, Var};
pub use data::{Dataset, DatasetMeta};
pub use error::{Error, Result};
pub use eval::{SweepAxis, SweepSpec};
pub use lie::{CanonicalForm, Generator};
pub use model::{Checkpoint, FeatureBundle, GeneratorParams, LossKind, Model};
pub use spectral::{FrequencyVector, ResonantSet, TorusPoint};
pub use train::{MuRamp, RunReport, TrainConfig};
