//! Four-dimensional bounds on the conformal constants from the Yamabe
//! constant `Y` and the total σ₂-curvature `I = ∫σ₂(A)μ_g`.
//!
//! For `I < 0` set `c = −24I/Y²`. A conformal metric with `Ein_{−2/α} > 0` and
//! `Ein_{2/(α+1)} > 0` exists whenever `4I + α(α+1)Y²/6 > 0`, which holds for
//! all `α > (√(4c+1) − 1)/2`. The closed-form bounds are the values of
//! `2/(α+1)` and `−2/α` at that critical `α`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::tensor::SymTensor2;
use crate::{Error, Extended, Result};

/// Relative tolerance for comparing the two closed forms.
pub const FORM_TOL: f64 = 1e-12;

/// Relative margin of the strict inequality in [`gv_condition`].
pub const GV_MARGIN: f64 = 1e-12;

const ALPHA_MIN: f64 = 1e-6;
const ALPHA_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalData4D {
    pub yamabe: f64,
    pub sigma2_integral: f64,
}

impl ConformalData4D {
    pub fn new(yamabe: f64, sigma2_integral: f64) -> Result<Self> {
        if !(yamabe > 0.0) || !yamabe.is_finite() {
            return Err(Error::NonPositiveYamabe(yamabe));
        }
        if !sigma2_integral.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma2 integral must be finite, got {sigma2_integral}"
            )));
        }
        Ok(Self {
            yamabe,
            sigma2_integral,
        })
    }

    /// `c = −24I/Y²`, defined for `I ≤ 0`.
    pub fn c(&self) -> Option<f64> {
        (self.sigma2_integral <= 0.0)
            .then(|| -24.0 * self.sigma2_integral / (self.yamabe * self.yamabe))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundCase {
    Positive,
    Zero,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub case: BoundCase,
    /// Lower bound for `Ein([g])`.
    #[serde(rename = "Ein_bound")]
    pub ein_bound: f64,
    /// Whether the `Ein` bound is strict.
    pub strict: bool,
    /// Upper bound for `ein([g])`.
    #[serde(rename = "ein_bound")]
    pub ein_lower_bound: Extended<f64>,
    pub c: Option<f64>,
    /// Largest relative difference between the `Y`-form and the `c`-form.
    pub form_agreement: Option<f64>,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn theorem_c_bounds(d: &ConformalData4D) -> Result<BoundReport> {
    let d = ConformalData4D::new(d.yamabe, d.sigma2_integral)?;
    let (y, i) = (d.yamabe, d.sigma2_integral);
    if i > 0.0 {
        return Ok(BoundReport {
            case: BoundCase::Positive,
            ein_bound: 2.0,
            strict: true,
            ein_lower_bound: Extended::NegInfinity,
            c: None,
            form_agreement: None,
        });
    }
    if i == 0.0 {
        return Ok(BoundReport {
            case: BoundCase::Zero,
            ein_bound: 2.0,
            strict: false,
            ein_lower_bound: Extended::NegInfinity,
            c: Some(0.0),
            form_agreement: None,
        });
    }
    let c = -24.0 * i / (y * y);
    // Y-form: 4Y/(√(Y²−96I)+Y) and −4Y/(√(Y²−96I)−Y), the latter rationalized.
    let root = (y * y - 96.0 * i).sqrt();
    let up_y = 4.0 * y / (root + y);
    let low_y = y * (root + y) / (24.0 * i);
    // c-form: 4/(√(4c+1)+1) and −4/(√(4c+1)−1) = −(√(4c+1)+1)/c.
    let s = (4.0 * c + 1.0).sqrt();
    let up_c = 4.0 / (s + 1.0);
    let low_c = -(s + 1.0) / c;
    let agreement = rel_diff(up_y, up_c).max(rel_diff(low_y, low_c));
    Ok(BoundReport {
        case: BoundCase::Negative,
        ein_bound: up_y,
        strict: false,
        ein_lower_bound: Extended::Finite(low_y),
        c: Some(c),
        form_agreement: Some(agreement),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(())
}

fn gv_holds(y: f64, i: f64, alpha: f64) -> bool {
    let a = 4.0 * i;
    let b = alpha * (alpha + 1.0) / 6.0 * y * y;
    a + b > GV_MARGIN * a.abs().max(b.abs())
}

/// `4I + α(α+1)Y²/6 > 0`, strict up to a relative margin.
pub fn gv_condition(d: &ConformalData4D, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    Ok(gv_holds(d.yamabe, d.sigma2_integral, alpha))
}

/// `(−2/α, 2/(α+1))`.
pub fn gv_pair(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    Ok((-2.0 / alpha, 2.0 / (alpha + 1.0)))
}

/// Result of the α scan: the extremal pair over admitted α, and the values at
/// the last rejected grid point below, which bracket the exact bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub grid: f64,
    pub points: usize,
    pub admitted: usize,
    pub alpha_admitted: f64,
    pub alpha_rejected: Option<f64>,
    #[serde(rename = "Ein_bound")]
    pub ein_bound: f64,
    #[serde(rename = "ein_bound")]
    pub ein_lower_bound: f64,
    /// `2/(α+1)` and `−2/α` at `alpha_rejected`.
    #[serde(rename = "Ein_bracket")]
    pub ein_bracket: Option<f64>,
    #[serde(rename = "ein_bracket")]
    pub ein_lower_bracket: Option<f64>,
}

impl OracleReport {
    /// Whether `value` lies between the admitted and rejected values of the
    /// `Ein` side, with a relative slack.
    pub fn brackets_ein(&self, value: f64, slack: f64) -> bool {
        let hi = self.ein_bracket.unwrap_or(self.ein_bound);
        let tol = slack * value.abs().max(1.0);
        value >= self.ein_bound - tol && value <= hi + tol
    }

    pub fn brackets_ein_lower(&self, value: f64, slack: f64) -> bool {
        let lo = self.ein_lower_bracket.unwrap_or(f64::NEG_INFINITY);
        let tol = slack * value.abs().max(1.0);
        value <= self.ein_lower_bound + tol && value >= lo - tol
    }
}

/// Scans `α` over a logarithmic grid on `[1e−6, 1e6]` with step `grid` in
/// `ln α` and keeps the admitted values.
pub fn optimize_alpha(d: &ConformalData4D, grid: f64) -> Result<OracleReport> {
    if !(grid > 0.0) || !grid.is_finite() {
        return Err(Error::InvalidParameter(format!("grid must be positive, got {grid}")));
    }
    if !(d.sigma2_integral < 0.0) {
        return Err(Error::InvalidParameter(
            "the alpha scan requires a negative sigma2 integral".into(),
        ));
    }
    let (y, i) = (d.yamabe, d.sigma2_integral);
    let lo = ALPHA_MIN.ln();
    let points = ((ALPHA_MAX.ln() - lo) / grid).ceil() as usize + 1;
    let mut admitted = 0;
    let mut best: Option<f64> = None;
    let mut rejected_before: Option<f64> = None;
    let mut sup_up = f64::NEG_INFINITY;
    let mut inf_low = f64::INFINITY;
    for k in 0..points {
        let alpha = (lo + k as f64 * grid).exp();
        if gv_holds(y, i, alpha) {
            admitted += 1;
            best.get_or_insert(alpha);
            sup_up = sup_up.max(2.0 / (alpha + 1.0));
            inf_low = inf_low.min(-2.0 / alpha);
        } else if best.is_none() {
            rejected_before = Some(alpha);
        }
    }
    let alpha_admitted = best.ok_or_else(|| {
        Error::InvalidParameter("no admitted alpha on the grid".into())
    })?;
    Ok(OracleReport {
        grid,
        points,
        admitted,
        alpha_admitted,
        alpha_rejected: rejected_before,
        ein_bound: sup_up,
        ein_lower_bound: inf_low,
        ein_bracket: rejected_before.map(|a| 2.0 / (a + 1.0)),
        ein_lower_bracket: rejected_before.map(|a| -2.0 / a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonMaclaurin {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs = (4/3)‖H − (σ₁/4)I‖²`.
    pub gap: f64,
    pub holds: bool,
    pub equality: bool,
}

/// `σ₁(H)² ≥ (8/3)σ₂(H)` for a symmetric 4×4 `H`.
pub fn newton_maclaurin_check(h: &SymTensor2) -> Result<NewtonMaclaurin> {
    if h.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: h.dim(),
        });
    }
    let m = h.matrix();
    let s1 = m.trace();
    let norm2 = m.norm_squared();
    let s2 = 0.5 * (s1 * s1 - norm2);
    let lhs = s1 * s1;
    let rhs = 8.0 / 3.0 * s2;
    let traceless = m - DMatrix::identity(4, 4) * (s1 / 4.0);
    let gap = 4.0 / 3.0 * traceless.norm_squared();
    let scale = norm2.max(lhs);
    Ok(NewtonMaclaurin {
        lhs,
        rhs,
        gap,
        holds: lhs >= rhs - 1e-12 * scale,
        equality: gap <= 1e-12 * scale,
    })
}
