//! Numerical geometry of hypersurfaces in the Heisenberg group `H^n`.
//!
//! Points are stored in exponential coordinates `(x, y, t)` with the group law
//!
//! ```text
//! (x, y, t) * (x', y', t') = (x + x', y + y', t + t' + 1/2 * sum_j (x_j y'_j - y_j x'_j))
//! ```
//!
//! The crate covers the group and its left-invariant frame `X_j, Y_j, T`,
//! exterior algebra with the Hodge operator, horizontal gradients of scalar
//! fields, characteristic points of parametrized patches and level sets, and
//! Euclidean / Heisenberg orientability verdicts.
//!
//! Grid scans run on rayon when the `parallel` feature is enabled (the
//! default). Every scan also takes an [`Execution`] so both paths can be
//! compared in one build.

pub mod calculus;
pub mod error;
pub mod exterior;
pub mod frame;
pub mod group;
pub mod orientability;
mod par;
pub mod surfaces;

pub use calculus::{directional_derivative, horizontal_gradient, Polynomial, ScalarField};
pub use error::{Error, Result};
pub use exterior::{MultiForm, MultiVector};
pub use frame::{change_basis, BasisChange, FrameIndex, FrameVector};
pub use group::{Automorphism, GroupElement};
pub use par::Execution;
pub use orientability::{
    invariance_audit, levelset_orientability, orientability_verdict, InvarianceReport, Mode,
    OrientabilityReport, Verdict, VerdictOptions,
};
pub use surfaces::{
    find_characteristic_points, AxisBox, CharacteristicPoint, LevelSetSurface, ParametrizedPatch,
    SearchOptions, Seam, Surface,
};
