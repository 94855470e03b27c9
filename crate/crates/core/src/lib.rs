//! Numerical curvature laboratory for the modified Einstein tensors
//! `Ein_k = Scal·g − k·Ric` and the constants built from them.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: pointwise tensor algebra (spectra relative to a metric,
//!   `Ein_k`, Schouten tensor, σ-invariants, Q-curvature).
//! * [`spaces`]: curvature points from closed-form model geometries and from
//!   coordinate charts via finite differences.
//! * [`constants`]: the metric constants `Ein(g)`, `ein(g)`, the vanishing
//!   thresholds `k₁`, `k₂` and the Nayatani expansion.
//! * [`double_forms`]: exterior algebra of double forms and the Weitzenböck
//!   curvature term on p-forms.
//! * [`conformal4d`]: four-dimensional bounds from the Yamabe constant and
//!   the total σ₂-curvature.
//!
//! Curvature conventions: the unit round sphere has `R[i][j][i][j] = +1` in an
//! orthonormal frame, `ricci[j][l] = Σ g^{ik} R[i][j][k][l]`, so that
//! `Ric = (n−1)g` and `Scal = n(n−1)` on the unit sphere.

pub mod conformal4d;
pub mod constants;
pub mod double_forms;
mod error;
mod extended;
pub mod spaces;
pub mod tensor;

pub use error::{Error, Result};
pub use extended::Extended;

/// Relative tolerance used for strict positivity decisions.
pub const POSITIVITY_TOL: f64 = 1e-9;
