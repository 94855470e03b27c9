//! Curvature of a chart metric by finite differences.
//!
//! Christoffel symbols come from central differences of the metric, the
//! Riemann tensor from central differences of the Christoffel symbols plus the
//! quadratic `Γ·Γ` terms. Every derivative is a central difference at steps
//! `h` and `h/2` combined by one Richardson pass, which is fourth order.

use nalgebra::DMatrix;

use super::chart::Chart;
use crate::tensor::CurvaturePoint;
use crate::{Error, Result};

pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Richardson-extrapolated central difference of a vector-valued function
/// along coordinate `axis`.
fn derivative(
    x: &[f64],
    axis: usize,
    h: f64,
    f: &impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let central = |step: f64| -> Result<Vec<f64>> {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[axis] += step;
        minus[axis] -= step;
        let (fp, fm) = (f(&plus)?, f(&minus)?);
        Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

fn metric_components(chart: &Chart, x: &[f64]) -> Result<Vec<f64>> {
    Ok(chart.metric_at(x)?.matrix().iter().copied().collect())
}

/// `Γ^k_ij` at `x`, stored as `[k][i][j]`.
fn christoffel(chart: &Chart, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = chart.dim();
    let g = chart.metric_at(x)?;
    let g_inv = g
        .matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .inverse();
    // dg[l] = ∂_l g, column-major like nalgebra storage.
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            derivative(x, l, h, &|y| metric_components(chart, y))
                .map(|v| DMatrix::from_column_slice(n, n, &v))
        })
        .collect::<Result<_>>()?;
    let mut gamma = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma[(k * n + i) * n + j] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

/// Curvature of the chart metric at `point` with base step `step`.
pub fn curvature_fd(chart: &Chart, point: &[f64], step: f64) -> Result<CurvaturePoint> {
    let n = chart.dim();
    if point.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: point.len(),
        });
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let g = chart.metric_at(point)?;
    let gamma = christoffel(chart, point, step)?;
    let d_gamma: Vec<Vec<f64>> = (0..n)
        .map(|m| derivative(point, m, step, &|y| christoffel(chart, y, step)))
        .collect::<Result<_>>()?;

    let gm = |k: usize, i: usize, j: usize| gamma[(k * n + i) * n + j];
    let dgm = |m: usize, k: usize, i: usize, j: usize| d_gamma[m][(k * n + i) * n + j];

    // R^r_{s m v} = ∂_m Γ^r_{v s} − ∂_v Γ^r_{m s} + Γ^r_{m l} Γ^l_{v s} − Γ^r_{v l} Γ^l_{m s}
    let mut mixed = vec![0.0; n * n * n * n];
    for r in 0..n {
        for s in 0..n {
            for m in 0..n {
                for v in 0..n {
                    let mut acc = dgm(m, r, v, s) - dgm(v, r, m, s);
                    for l in 0..n {
                        acc += gm(r, m, l) * gm(l, v, s) - gm(r, v, l) * gm(l, m, s);
                    }
                    mixed[((r * n + s) * n + m) * n + v] = acc;
                }
            }
        }
    }
    let mut riemann = vec![0.0; n * n * n * n];
    for r in 0..n {
        for s in 0..n {
            for m in 0..n {
                for v in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        acc += g.get(r, a) * mixed[((a * n + s) * n + m) * n + v];
                    }
                    riemann[((r * n + s) * n + m) * n + v] = acc;
                }
            }
        }
    }
    CurvaturePoint::from_riemann(g, riemann)
}

/// Laplace–Beltrami operator `g^{ij}(∂_i∂_j f − Γ^k_ij ∂_k f)` of a function
/// on the chart, by Richardson-extrapolated central differences at `step`.
pub fn laplacian_fd(
    chart: &Chart,
    point: &[f64],
    step: f64,
    f: impl Fn(&[f64]) -> Result<f64>,
) -> Result<f64> {
    let n = chart.dim();
    if point.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: point.len(),
        });
    }
    let g_inv = chart
        .metric_at(point)?
        .matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    let gamma = christoffel(chart, point, DEFAULT_FD_STEP)?;
    let at = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut y = point.to_vec();
        for &(axis, d) in offsets {
            y[axis] += d;
        }
        f(&y)
    };
    let f0 = f(point)?;
    let second = |i: usize, j: usize, h: f64| -> Result<f64> {
        if i == j {
            Ok((at(&[(i, h)])? - 2.0 * f0 + at(&[(i, -h)])?) / (h * h))
        } else {
            Ok((at(&[(i, h), (j, h)])? - at(&[(i, h), (j, -h)])? - at(&[(i, -h), (j, h)])?
                + at(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h))
        }
    };
    let first = |k: usize, h: f64| -> Result<f64> { Ok((at(&[(k, h)])? - at(&[(k, -h)])?) / (2.0 * h)) };
    let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
    let grad: Vec<f64> = (0..n)
        .map(|k| Ok(richardson(first(k, step)?, first(k, step / 2.0)?)))
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    for i in 0..n {
        for j in i..n {
            let weight = if i == j { g_inv[(i, j)] } else { 2.0 * g_inv[(i, j)] };
            if weight == 0.0 {
                continue;
            }
            let hess = richardson(second(i, j, step)?, second(i, j, step / 2.0)?);
            let christ: f64 = (0..n).map(|k| gamma[(k * n + i) * n + j] * grad[k]).sum();
            acc += weight * (hess - christ);
        }
    }
    Ok(acc)
}

/// Laplacian of the scalar curvature, a nested finite difference; the outer
/// step should be much larger than [`DEFAULT_FD_STEP`].
pub fn scal_laplacian_fd(chart: &Chart, point: &[f64], step: f64) -> Result<f64> {
    laplacian_fd(chart, point, step, |y| {
        Ok(curvature_fd(chart, y, DEFAULT_FD_STEP)?.scal())
    })
}

/// Default outer step for [`scal_laplacian_fd`].
pub const DEFAULT_LAPLACIAN_STEP: f64 = 2e-2;

/// Ricci spectrum relative to the metric, a frame-independent summary.
pub fn ricci_spectrum(p: &CurvaturePoint) -> Result<Vec<f64>> {
    Ok(crate::tensor::spectrum_rel(p.metric(), p.ricci())?
        .values()
        .to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::SpaceSpec;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn stereographic_three_sphere() {
        let pt = [0.1, -0.2, 0.3];
        let chart = Chart::stereographic_sphere(3, vec![pt.to_vec()]).unwrap();
        let p = curvature_fd(&chart, &pt, DEFAULT_FD_STEP).unwrap();
        let catalog = SpaceSpec::space_form(3, 1.0).unwrap().curvature_at(None).unwrap();
        assert!((p.scal() - catalog.scal()).abs() < 1e-6, "{}", p.scal());
        assert!((p.scal() - 6.0).abs() < 1e-6);
        let ric = ricci_spectrum(&p).unwrap();
        assert!(max_diff(&ric, &[2.0, 2.0, 2.0]) < 1e-6, "{ric:?}");
        assert!(p.residuals().max() < 1e-6, "{:?}", p.residuals());
    }

    #[test]
    fn flat_chart_has_no_curvature() {
        let chart = Chart::flat(3, vec![]).unwrap();
        let p = curvature_fd(&chart, &[0.4, 0.1, -2.0], DEFAULT_FD_STEP).unwrap();
        assert!(p.riemann_components().iter().all(|r| r.abs() < 1e-10));
    }

    #[test]
    fn half_plane() {
        let chart = Chart::half_space(2, vec![]).unwrap();
        let p = curvature_fd(&chart, &[0.0, 1.0], DEFAULT_FD_STEP).unwrap();
        assert!((p.scal() + 2.0).abs() < 1e-6, "{}", p.scal());
    }

    #[test]
    fn laplacians() {
        let flat = Chart::flat(3, vec![]).unwrap();
        let lap = laplacian_fd(&flat, &[0.3, 0.1, 0.2], 1e-2, |y| Ok(y[0] * y[0] + 3.0 * y[1] * y[2])).unwrap();
        assert!((lap - 2.0).abs() < 1e-8, "{lap}");
        // Hyperbolic plane: Δ = y²(∂x² + ∂y²).
        let h2 = Chart::half_space(2, vec![]).unwrap();
        let at = [0.4, 1.5];
        let lap = laplacian_fd(&h2, &at, 1e-2, |y| Ok(y[1])).unwrap();
        assert!(lap.abs() < 1e-8, "{lap}");
        let lap = laplacian_fd(&h2, &at, 1e-2, |y| Ok(y[1] * y[1])).unwrap();
        assert!((lap - 2.0 * 1.5 * 1.5).abs() < 1e-7, "{lap}");
        let lap = laplacian_fd(&h2, &at, 1e-2, |y| Ok(y[0] * y[1])).unwrap();
        assert!(lap.abs() < 1e-8, "{lap}");
        // Round S^3: constant scalar curvature.
        let s3 = Chart::stereographic_sphere(3, vec![]).unwrap();
        let lap = scal_laplacian_fd(&s3, &[0.1, 0.2, -0.1], DEFAULT_LAPLACIAN_STEP).unwrap();
        assert!(lap.abs() < 1e-4, "{lap}");
    }

    #[test]
    fn stencil_leaving_domain_is_an_error() {
        let chart = Chart::from_sources(2, &["1", "0", "x2"], vec![]).unwrap();
        assert!(curvature_fd(&chart, &[0.0, 1.0], DEFAULT_FD_STEP).is_ok());
        assert_eq!(
            curvature_fd(&chart, &[0.0, 5e-4], DEFAULT_FD_STEP),
            Err(Error::NotPositiveDefinite)
        );
        assert!(curvature_fd(&chart, &[0.0, 1.0], 0.0).is_err());
    }
}
