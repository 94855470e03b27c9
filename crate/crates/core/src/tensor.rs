//! Pointwise tensor algebra on a single tangent space.
//!
//! A [`SymTensor2`] holds the coordinate components of a symmetric (0,2)
//! tensor. Everything spectral is computed relative to a positive definite
//! metric `g`, i.e. as solutions of `det(T − λg) = 0`, so results do not depend
//! on the coordinate frame in which the components are given.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::{Error, Result, POSITIVITY_TOL};

const SYMMETRY_TOL: f64 = 1e-10;

/// Symmetric (0,2) tensor in coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    m: DMatrix<f64>,
}

impl SymTensor2 {
    /// Builds a tensor from a square matrix, rejecting asymmetric input and
    /// storing the exactly symmetrised components.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let scale = m.amax().max(1.0);
        let asymmetry = (&m - m.transpose()).amax();
        if asymmetry > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self { m: (m + t) * 0.5 }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        Self {
            m: DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    /// `PᵀTP`, the components after the coordinate change `x = P y`.
    pub fn congruence(&self, p: &DMatrix<f64>) -> Result<Self> {
        check_dims(self.dim(), p.nrows())?;
        Ok(Self::symmetrized(p.transpose() * &self.m * p))
    }

    /// Trace of `self` relative to `g`, i.e. `Σ g^{ij} T_ij`.
    pub fn trace_rel(&self, g: &SymTensor2) -> Result<f64> {
        check_dims(g.dim(), self.dim())?;
        let chol = cholesky(g)?;
        Ok((chol.inverse() * &self.m).trace())
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.m.amax()
    }
}

impl Add for &SymTensor2 {
    type Output = SymTensor2;
    fn add(self, rhs: &SymTensor2) -> SymTensor2 {
        SymTensor2 { m: &self.m + &rhs.m }
    }
}

impl Sub for &SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, rhs: &SymTensor2) -> SymTensor2 {
        SymTensor2 { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, rhs: f64) -> SymTensor2 {
        SymTensor2 { m: &self.m * rhs }
    }
}

impl Neg for &SymTensor2 {
    type Output = SymTensor2;
    fn neg(self) -> SymTensor2 {
        SymTensor2 { m: -&self.m }
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn cholesky(g: &SymTensor2) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let chol = Cholesky::new(g.m.clone()).ok_or(Error::NotPositiveDefinite)?;
    // Cholesky succeeds on numerically singular input; require a margin.
    let l = chol.l_dirty();
    let diag_max = (0..g.dim()).map(|i| l[(i, i)]).fold(0.0, f64::max);
    let diag_min = (0..g.dim()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    if !(diag_min > 1e-7 * diag_max) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(chol)
}

/// Lower-triangular factor `L` with `g = L Lᵀ`.
pub(crate) fn cholesky_factor(g: &SymTensor2) -> Result<DMatrix<f64>> {
    Ok(cholesky(g)?.l())
}

/// Eigenvalues of a symmetric tensor relative to a metric, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Wraps a list of eigenvalues, sorting them ascending.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Sum of the `p` smallest eigenvalues.
    pub fn sum_lowest(&self, p: usize) -> f64 {
        self.values.iter().take(p).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Generalized eigenvalues of `t` relative to `g`, ascending.
///
/// Reduces `det(T − λg) = 0` to an ordinary symmetric problem with the
/// Cholesky factor of `g`: `L⁻¹ T L⁻ᵀ`.
pub fn spectrum_rel(g: &SymTensor2, t: &SymTensor2) -> Result<Spectrum> {
    check_dims(g.dim(), t.dim())?;
    let l = cholesky_factor(g)?;
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(g.dim(), g.dim()))
        .ok_or(Error::NotPositiveDefinite)?;
    let reduced = &l_inv * &t.m * l_inv.transpose();
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eigen = SymmetricEigen::new(reduced);
    Ok(Spectrum::from_values(eigen.eigenvalues.iter().copied().collect()))
}

/// Whether `t` is positive definite relative to `g`, with the strict margin
/// `tol · scale` on its smallest generalized eigenvalue.
pub fn is_positive_definite(g: &SymTensor2, t: &SymTensor2, scale: f64, tol: f64) -> Result<bool> {
    let spectrum = spectrum_rel(g, t)?;
    let scale = if scale > 0.0 { scale } else { spectrum.max_abs() };
    Ok(spectrum.min() > tol * scale)
}

/// All pointwise curvature data of a metric at one point.
///
/// `riemann` stores the (0,4) components `R[i][j][k][l]` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePoint {
    n: usize,
    g: SymTensor2,
    riemann: Vec<f64>,
    ricci: SymTensor2,
    scal: f64,
}

/// Largest violations of the algebraic identities a curvature point must obey.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureResiduals {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
    pub ricci: f64,
    pub scal: f64,
}

impl CurvatureResiduals {
    pub fn max(&self) -> f64 {
        [
            self.antisymmetry,
            self.pair_symmetry,
            self.bianchi,
            self.ricci,
            self.scal,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl CurvaturePoint {
    /// Builds a point from the metric and the (0,4) Riemann components,
    /// contracting to Ricci and scalar curvature.
    pub fn from_riemann(g: SymTensor2, riemann: Vec<f64>) -> Result<Self> {
        let n = g.dim();
        check_dims(n * n * n * n, riemann.len())?;
        let chol = cholesky(&g)?;
        let g_inv = chol.inverse();
        let ricci = SymTensor2::new(ricci_contraction(n, &g_inv, &riemann))?;
        let scal = (&g_inv * &ricci.m).trace();
        Ok(Self {
            n,
            g,
            riemann,
            ricci,
            scal,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> &SymTensor2 {
        &self.g
    }

    pub fn ricci(&self) -> &SymTensor2 {
        &self.ricci
    }

    pub fn scal(&self) -> f64 {
        self.scal
    }

    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riemann[self.index(i, j, k, l)]
    }

    pub fn riemann_components(&self) -> &[f64] {
        &self.riemann
    }

    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    /// The same curvature for the metric `c·g` (`c > 0`): the (0,4) tensor
    /// scales by `c`, Ricci is unchanged and `Scal` scales by `1/c`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "metric scale factor must be positive, got {c}"
            )));
        }
        let riemann = self.riemann.iter().map(|r| r * c).collect();
        Self::from_riemann(&self.g * c, riemann)
    }

    /// Symmetry, Bianchi and contraction residuals, relative to the largest
    /// Riemann component (absolute when the curvature vanishes).
    pub fn residuals(&self) -> CurvatureResiduals {
        let n = self.n;
        let scale = self.riemann.iter().fold(1.0f64, |acc, r| acc.max(r.abs()));
        let mut antisymmetry: f64 = 0.0;
        let mut pair_symmetry: f64 = 0.0;
        let mut bianchi: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.riemann(i, j, k, l);
                        antisymmetry = antisymmetry
                            .max((r + self.riemann(j, i, k, l)).abs())
                            .max((r + self.riemann(i, j, l, k)).abs());
                        pair_symmetry = pair_symmetry.max((r - self.riemann(k, l, i, j)).abs());
                        let cyclic = r + self.riemann(i, k, l, j) + self.riemann(i, l, j, k);
                        bianchi = bianchi.max(cyclic.abs());
                    }
                }
            }
        }
        let g_inv = cholesky(&self.g).map(|c| c.inverse());
        let (ricci, scal) = match g_inv {
            Ok(g_inv) => {
                let contracted = ricci_contraction(n, &g_inv, &self.riemann);
                let ricci = (&contracted - &self.ricci.m).amax();
                let scal = ((&g_inv * &self.ricci.m).trace() - self.scal).abs();
                (ricci, scal)
            }
            Err(_) => (f64::INFINITY, f64::INFINITY),
        };
        CurvatureResiduals {
            antisymmetry: antisymmetry / scale,
            pair_symmetry: pair_symmetry / scale,
            bianchi: bianchi / scale,
            ricci: ricci / scale,
            scal: scal / scale,
        }
    }
}

fn ricci_contraction(n: usize, g_inv: &DMatrix<f64>, riemann: &[f64]) -> DMatrix<f64> {
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    DMatrix::from_fn(n, n, |j, l| {
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                acc += g_inv[(i, k)] * riemann[idx(i, j, k, l)];
            }
        }
        acc
    })
}

/// `Ein_k = Scal·g − k·Ric`.
pub fn ein_k(p: &CurvaturePoint, k: f64) -> SymTensor2 {
    &(&p.g * p.scal) - &(&p.ricci * k)
}

/// Schouten tensor `A = (Ric − Scal/(2(n−1))·g)/(n−2)`.
pub fn schouten(p: &CurvaturePoint) -> Result<SymTensor2> {
    let n = p.n;
    if n < 3 {
        return Err(Error::SchoutenUndefined { n });
    }
    let nf = n as f64;
    let shifted = &p.ricci - &(&p.g * (p.scal / (2.0 * (nf - 1.0))));
    Ok(&shifted * (1.0 / (nf - 2.0)))
}

/// First and second elementary symmetric functions of the eigenvalues of `a`
/// relative to `g`.
pub fn sigma_invariants(g: &SymTensor2, a: &SymTensor2) -> Result<(f64, f64)> {
    let spectrum = spectrum_rel(g, a)?;
    Ok(sigma_from_values(spectrum.values()))
}

/// `(σ₁, σ₂)` of a list of eigenvalues. σ₂ is taken as `(σ₁² − Σλ²)/2`.
pub fn sigma_from_values(values: &[f64]) -> (f64, f64) {
    let s1: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    (s1, 0.5 * (s1 * s1 - sq))
}

/// Q-curvature `−ΔScal/12 + 2σ₂(A)` of a four-dimensional point; the
/// Laplacian of the scalar curvature is supplied by the caller.
pub fn q_curvature(p: &CurvaturePoint, laplacian_scal: f64) -> Result<f64> {
    if p.n != 4 {
        return Err(Error::QCurvatureDimension { n: p.n });
    }
    let a = schouten(p)?;
    let (_, sigma2) = sigma_invariants(&p.g, &a)?;
    Ok(-laplacian_scal / 12.0 + 2.0 * sigma2)
}

/// Membership of the curvature in the open cone `{Ein_k > 0}`.
pub fn cone_member(p: &CurvaturePoint, k: f64) -> bool {
    cone_member_with_tol(p, k, POSITIVITY_TOL)
}

/// [`cone_member`] with an explicit relative tolerance. The margin is
/// `tol · |Scal|`, the largest eigenvalue magnitude of `Scal·g`.
pub fn cone_member_with_tol(p: &CurvaturePoint, k: f64, tol: f64) -> bool {
    is_positive_definite(&p.g, &ein_k(p, k), p.scal.abs(), tol).unwrap_or(false)
}
