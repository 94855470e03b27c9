//! The metric constants `Ein(g)`, `ein(g)` and the closed-form thresholds
//! built from them.
//!
//! At a point with Ricci eigenvalues `λ₁ ≤ … ≤ λn` (relative to `g`) and
//! `S = Σλᵢ`, the tensor `Ein_k` has eigenvalues `S − kλᵢ`. Positivity for all
//! `i` reduces to `k < S/λᵢ` for each positive `λᵢ` and `k > S/λᵢ` for each
//! negative one, which gives the per-point thresholds below.

use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::spaces::SpaceSpec;
use crate::tensor::{spectrum_rel, CurvaturePoint, SymTensor2};
use crate::{Error, Extended, Result, POSITIVITY_TOL};

/// Per-point values of the two constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointThresholds {
    #[serde(rename = "Ein")]
    pub ein_up: f64,
    #[serde(rename = "ein")]
    pub ein_low: Extended<f64>,
    /// Scalar curvature not positive, both constants set to 0.
    pub convention_zero: bool,
    pub einstein: bool,
}

/// Thresholds from a Ricci spectrum (relative to `g`); see the module docs.
pub fn thresholds_from_spectrum(values: &[f64], tol: f64) -> PointThresholds {
    let n = values.len() as f64;
    let s: f64 = values.iter().sum();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || s <= tol * scale {
        return PointThresholds {
            ein_up: 0.0,
            ein_low: Extended::Finite(0.0),
            convention_zero: true,
            einstein: false,
        };
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= tol * scale {
        return PointThresholds {
            ein_up: n,
            ein_low: Extended::NegInfinity,
            convention_zero: false,
            einstein: true,
        };
    }
    let margin = tol * scale;
    let ein_up = values
        .iter()
        .filter(|&&l| l > margin)
        .map(|l| s / l)
        .fold(n, f64::min);
    let ein_low = values
        .iter()
        .filter(|&&l| l < -margin)
        .map(|l| s / l)
        .fold(Extended::NegInfinity, |acc, v| match acc {
            Extended::Finite(a) if a >= v => acc,
            _ => Extended::Finite(v),
        });
    PointThresholds {
        ein_up,
        ein_low,
        convention_zero: false,
        einstein: false,
    }
}

pub fn thresholds_at_point(p: &CurvaturePoint) -> Result<PointThresholds> {
    thresholds_at_point_with_tol(p, POSITIVITY_TOL)
}

pub fn thresholds_at_point_with_tol(p: &CurvaturePoint, tol: f64) -> Result<PointThresholds> {
    let spectrum = spectrum_rel(p.metric(), p.ricci())?;
    Ok(thresholds_from_spectrum(spectrum.values(), tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleThresholds {
    pub id: usize,
    pub point: Vec<f64>,
    #[serde(flatten)]
    pub thresholds: PointThresholds,
}

/// `Ein(g)` and `ein(g)` of a metric, aggregated over sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinProfile {
    pub n: usize,
    #[serde(rename = "Ein")]
    pub ein_upper: f64,
    #[serde(rename = "ein")]
    pub ein_lower: Extended<f64>,
    pub per_point: Vec<SampleThresholds>,
    pub convention_zero: bool,
}

pub fn ein_profile(spec: &SpaceSpec, samples: &[Vec<f64>]) -> Result<EinProfile> {
    ein_profile_with_tol(spec, samples, POSITIVITY_TOL)
}

/// Infimum of the per-point `Ein` and supremum of the per-point `ein`; a
/// single non-positive scalar curvature sets both to 0.
pub fn ein_profile_with_tol(spec: &SpaceSpec, samples: &[Vec<f64>], tol: f64) -> Result<EinProfile> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let per_point = samples
        .iter()
        .enumerate()
        .map(|(id, x)| {
            let p = spec.curvature_at(Some(x))?;
            Ok(SampleThresholds {
                id,
                point: x.clone(),
                thresholds: thresholds_at_point_with_tol(&p, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let convention_zero = per_point.iter().any(|s| s.thresholds.convention_zero);
    let (ein_upper, ein_lower) = if convention_zero {
        (0.0, Extended::Finite(0.0))
    } else {
        let up = per_point
            .iter()
            .map(|s| s.thresholds.ein_up)
            .fold(f64::INFINITY, f64::min);
        let low = per_point
            .iter()
            .map(|s| s.thresholds.ein_low)
            .fold(Extended::NegInfinity, |acc, v| if v > acc { v } else { acc });
        (up, low)
    };
    Ok(EinProfile {
        n: spec.dim(),
        ein_upper,
        ein_lower,
        per_point,
        convention_zero,
    })
}

/// Exact class constants of `S^{n−d−1}(+1) × H^{d+1}(−1)`:
/// `((n−1)(2d−n+2)/(d−n+2), −(n−1)(n−2d−2)/d)`.
pub fn corollary_a(n: usize, d: usize) -> Result<(Rational64, Rational64)> {
    if d < 1 || 2 * d + 2 >= n {
        return Err(Error::InvalidParameter(format!(
            "requires 1 <= d < (n-2)/2 (sphere-hyperbolic product hypothesis), got n = {n}, d = {d}"
        )));
    }
    let (n, d) = (n as i64, d as i64);
    let up = Rational64::new((n - 1) * (2 * d - n + 2), d - n + 2);
    let low = Rational64::new(-(n - 1) * (n - 2 * d - 2), d);
    Ok((up, low))
}

/// The thresholds `k₁ = (n−1)(2p−n)/(p−1)` and `k₂ = (n−1)(n−2p)/(n−p−1)` in
/// degree `p`. `k₂` has a pole at `p = n−1` with limit `−∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingThresholds {
    pub p: usize,
    pub k1: Rational64,
    pub k2: Extended<Rational64>,
}

pub fn vanishing_thresholds(n: usize, p: usize) -> Result<VanishingThresholds> {
    if p <= 1 || p >= n {
        return Err(Error::InvalidParameter(format!(
            "requires 1 < p < n, got n = {n}, p = {p}"
        )));
    }
    let (ni, pi) = (n as i64, p as i64);
    let k1 = Rational64::new((ni - 1) * (2 * pi - ni), pi - 1);
    let k2 = if ni - pi - 1 == 0 {
        Extended::NegInfinity
    } else {
        Extended::Finite(Rational64::new((ni - 1) * (ni - 2 * pi), ni - pi - 1))
    };
    Ok(VanishingThresholds { p, k1, k2 })
}

pub fn rational_to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One degree `p` for which the bounds force `b_p = b_{n−p} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingWitness {
    pub p: usize,
    pub companion: usize,
    /// Which bound fired: `"Ein"` or `"ein"`.
    pub bound: &'static str,
    /// Which threshold it beat: `"k1"` or `"k2"`.
    pub threshold: &'static str,
    pub threshold_value: f64,
}

/// Degrees where the Weitzenböck term is forced positive, with the bound and
/// threshold responsible. For `n ≥ 2p` the bounds are compared with
/// `Ein > k₂`, `ein < k₁`; for `n < 2p` with `Ein > k₁`, `ein < k₂`. At
/// `n = 2p` both thresholds are 0.
pub fn vanishing_witnesses(n: usize, ein_up_lb: f64, ein_low_ub: Extended<f64>) -> Vec<VanishingWitness> {
    let mut out = Vec::new();
    for p in 2..n {
        let Ok(t) = vanishing_thresholds(n, p) else {
            continue;
        };
        let k1 = rational_to_f64(t.k1);
        let k2 = t.k2.map(rational_to_f64);
        // (threshold for Ein, name), (threshold for ein, name)
        let (up, low) = if n >= 2 * p {
            ((k2, "k2"), (Extended::Finite(k1), "k1"))
        } else {
            ((Extended::Finite(k1), "k1"), (k2, "k2"))
        };
        let witness = |bound, threshold, value| VanishingWitness {
            p,
            companion: n - p,
            bound,
            threshold,
            threshold_value: value,
        };
        match up.0 {
            Extended::Finite(k) if ein_up_lb > k => out.push(witness("Ein", up.1, k)),
            Extended::NegInfinity if ein_up_lb > 0.0 => {
                out.push(witness("Ein", up.1, f64::NEG_INFINITY))
            }
            _ => {
                if let (Extended::Finite(k), Extended::Finite(e)) = (low.0, ein_low_ub) {
                    if e < k {
                        out.push(witness("ein", low.1, k));
                    }
                }
            }
        }
    }
    out
}

/// Set of degrees with forced vanishing Betti numbers.
pub fn betti_vanishing_report(n: usize, ein_up_lb: f64, ein_low_ub: Extended<f64>) -> BTreeSet<usize> {
    vanishing_witnesses(n, ein_up_lb, ein_low_ub)
        .into_iter()
        .flat_map(|w| [w.p, w.companion])
        .collect()
}

/// Data of the canonical conformally flat metric on a Kleinian quotient:
/// `Ric = −(n−2)(δ+1)𝒜 + (n−2−δ)(tr_g 𝒜)g` with `𝒜 ≥ 0`, `tr_g 𝒜 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NayataniParams {
    n: usize,
    delta: f64,
    a: SymTensor2,
    trace: f64,
}

impl NayataniParams {
    pub fn new(delta: f64, a: SymTensor2, g: &SymTensor2) -> Result<Self> {
        let n = a.dim();
        if n < 3 {
            return Err(Error::InvalidParameter(format!("requires n >= 3, got n = {n}")));
        }
        check_delta(n, delta)?;
        let spectrum = spectrum_rel(g, &a)?;
        let trace = spectrum.sum();
        if !(trace > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tr_g A must be positive, got {trace}"
            )));
        }
        if spectrum.min() < -POSITIVITY_TOL * spectrum.max_abs() {
            return Err(Error::InvalidParameter(format!(
                "A must be positive semidefinite, smallest eigenvalue {}",
                spectrum.min()
            )));
        }
        Ok(Self { n, delta, a, trace })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tensor(&self) -> &SymTensor2 {
        &self.a
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn ricci(&self, g: &SymTensor2) -> SymTensor2 {
        let nf = self.n as f64;
        let d = self.delta;
        &(&self.a * (-(nf - 2.0) * (d + 1.0))) + &(g * ((nf - 2.0 - d) * self.trace))
    }
}

fn check_delta(n: usize, delta: f64) -> Result<()> {
    let nf = n as f64;
    if delta == nf - 2.0 {
        return Err(Error::InvalidParameter(format!(
            "delta = n-2 = {} is a pole of the threshold",
            nf - 2.0
        )));
    }
    if !(delta > 0.0 && delta < nf - 2.0) {
        return Err(Error::InvalidParameter(format!(
            "requires 0 < delta < n-2, got delta = {delta}, n = {n}"
        )));
    }
    Ok(())
}

/// `Ein_k = ((n−1)(n−2−2δ) − k(n−2−δ))·tr𝒜·g + k(n−2)(δ+1)·𝒜`.
pub fn nayatani_ein_k(params: &NayataniParams, g: &SymTensor2, k: f64) -> Result<SymTensor2> {
    if g.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            found: g.dim(),
        });
    }
    let nf = params.n as f64;
    let d = params.delta;
    let g_coeff = ((nf - 1.0) * (nf - 2.0 - 2.0 * d) - k * (nf - 2.0 - d)) * params.trace;
    let a_coeff = k * (nf - 2.0) * (d + 1.0);
    Ok(&(g * g_coeff) + &(&params.a * a_coeff))
}

/// Lower bound `(n−1)(2δ−n+2)/(δ−n+2)` for the class constant.
pub fn nayatani_threshold(n: usize, delta: f64) -> Result<f64> {
    check_delta(n, delta)?;
    let nf = n as f64;
    Ok((nf - 1.0) * (2.0 * delta - nf + 2.0) / (delta - nf + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{ein_k, is_positive_definite};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GRID_STEP: f64 = 1e-4;

    /// Brute-force oracle: scan k over a grid and record where the smallest
    /// eigenvalue `min_i (S − kλ_i)` of the diagonal `Ein_k` stays positive.
    /// Returns (sup of positive k in (0, n), inf of positive k < 0) over the grid.
    fn k_grid(values: &[f64], lo: f64) -> (f64, f64) {
        let n = values.len() as f64;
        let s: f64 = values.iter().sum();
        let positive = |k: f64| values.iter().map(|l| s - k * l).fold(f64::INFINITY, f64::min) > 0.0;
        let mut up = 0.0;
        let mut i = 1;
        loop {
            let k = i as f64 * GRID_STEP;
            if k >= n || !positive(k) {
                break;
            }
            up = k;
            i += 1;
        }
        let mut low = 0.0;
        let mut i = 1;
        loop {
            let k = -(i as f64) * GRID_STEP;
            if k < lo || !positive(k) {
                break;
            }
            low = k;
            i += 1;
        }
        (up, low)
    }

    #[test]
    fn spectrum_examples_against_grid() {
        let t = thresholds_from_spectrum(&[2.0, 2.0, -1.0], POSITIVITY_TOL);
        assert_eq!(t.ein_up, 1.5);
        assert_eq!(t.ein_low, Extended::Finite(-3.0));
        let (up, low) = k_grid(&[2.0, 2.0, -1.0], -20.0);
        assert!((up - 1.5).abs() <= GRID_STEP && (low + 3.0).abs() <= GRID_STEP);

        let t = thresholds_from_spectrum(&[3.0, 0.0, 0.0], POSITIVITY_TOL);
        assert_eq!(t.ein_up, 1.0);
        assert_eq!(t.ein_low, Extended::NegInfinity);
        let (up, low) = k_grid(&[3.0, 0.0, 0.0], -20.0);
        assert!((up - 1.0).abs() <= GRID_STEP);
        assert!(low <= -20.0 + GRID_STEP);
    }

    #[test]
    fn sphere_is_einstein() {
        for n in 2..10 {
            let p = SpaceSpec::space_form(n, 1.0).unwrap().curvature_at(None).unwrap();
            let t = thresholds_at_point(&p).unwrap();
            assert_eq!(t.ein_up, n as f64);
            assert_eq!(t.ein_low, Extended::NegInfinity);
            assert!(t.einstein);
        }
    }

    #[test]
    fn profiles() {
        let prof = ein_profile(&SpaceSpec::sphere_hyperbolic(9, 2).unwrap(), &[vec![]]).unwrap();
        assert!((prof.ein_upper - 24.0 / 5.0).abs() < 1e-12);
        assert!((prof.ein_lower.finite().unwrap() + 12.0).abs() < 1e-12);

        for n in 3..10 {
            let prof = ein_profile(&SpaceSpec::cylinder(n).unwrap(), &[vec![]]).unwrap();
            assert_eq!(prof.ein_upper, (n - 1) as f64);
            assert_eq!(prof.ein_lower, Extended::NegInfinity);

            let prof = ein_profile(&SpaceSpec::space_form(n, -1.0).unwrap(), &[vec![]]).unwrap();
            assert_eq!((prof.ein_upper, prof.ein_lower), (0.0, Extended::Finite(0.0)));
            assert!(prof.convention_zero);
        }
        assert_eq!(
            ein_profile(&SpaceSpec::cylinder(4).unwrap(), &[]),
            Err(Error::EmptySamples)
        );
    }

    #[test]
    fn profile_aggregates_over_points() {
        // A conformally flat chart with varying curvature: inf of Ein, sup of ein.
        let chart = crate::spaces::Chart::conformal(
            3,
            "exp(0.3*x1^2-0.2*x2)",
            vec![vec![0.0, 0.0, 0.0], vec![0.7, -0.4, 0.2], vec![1.1, 0.5, 0.0]],
        )
        .unwrap();
        let spec = SpaceSpec::Chart(chart);
        let prof = ein_profile(&spec, &spec.sample_points()).unwrap();
        assert_eq!(prof.per_point.len(), 3);
        if !prof.convention_zero {
            let min_up = prof
                .per_point
                .iter()
                .map(|s| s.thresholds.ein_up)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(prof.ein_upper, min_up);
            for s in &prof.per_point {
                assert!(s.thresholds.ein_low <= prof.ein_lower);
            }
        } else {
            assert_eq!(prof.ein_upper, 0.0);
        }
    }

    #[test]
    fn corollary_values() {
        let r = |a, b| Rational64::new(a, b);
        assert_eq!(corollary_a(9, 2).unwrap(), (r(24, 5), r(-12, 1)));
        // n = 2p−1, d = p−2 at p = 5.
        assert_eq!(corollary_a(9, 3).unwrap(), (r(2, 1), r(-8, 3)));
        assert_eq!(corollary_a(5, 1).unwrap(), (r(2, 1), r(-4, 1)));
        let prof = ein_profile(&SpaceSpec::sphere_hyperbolic(5, 1).unwrap(), &[vec![]]).unwrap();
        assert_eq!(prof.ein_upper, 2.0);
        assert_eq!(prof.ein_lower, Extended::Finite(-4.0));
        assert!(corollary_a(6, 2).is_err());
        assert!(corollary_a(6, 0).is_err());
        assert!(corollary_a(6, 2).unwrap_err().to_string().contains("d < (n-2)/2"));
    }

    #[test]
    fn threshold_values() {
        let r = |a, b| Rational64::new(a, b);
        let t = vanishing_thresholds(9, 3).unwrap();
        assert_eq!((t.k1, t.k2), (r(-12, 1), Extended::Finite(r(24, 5))));
        // p = n − d − 1 swaps the roles relative to the product formula.
        let (up, low) = corollary_a(9, 2).unwrap();
        let t6 = vanishing_thresholds(9, 6).unwrap();
        assert_eq!((t6.k1, t6.k2), (up, Extended::Finite(low)));
        for p in 1..6 {
            let t = vanishing_thresholds(2 * p + 2, p + 1).unwrap();
            assert_eq!((t.k1, t.k2), (r(0, 1), Extended::Finite(r(0, 1))));
        }
        let t = vanishing_thresholds(6, 2).unwrap();
        assert_eq!((t.k1, t.k2), (r(-10, 1), Extended::Finite(r(10, 3))));
        // Low-degree family at n = 6: (n−1)(n−4)/(n−3) and −(n−1)(n−4).
        assert_eq!(t.k2, Extended::Finite(r(5 * 2, 3)));
        assert_eq!(t.k1, r(-5 * 2, 1));
        assert_eq!(vanishing_thresholds(5, 4).unwrap().k2, Extended::NegInfinity);
        assert!(vanishing_thresholds(5, 1).is_err());
        assert!(vanishing_thresholds(5, 5).is_err());
        // Opposite signs away from the middle degree.
        for n in 3..12usize {
            for p in 2..(n - 1) {
                let t = vanishing_thresholds(n, p).unwrap();
                let k2 = t.k2.finite().unwrap();
                if n != 2 * p {
                    assert!(t.k1 * k2 < r(0, 1), "n = {n}, p = {p}");
                }
            }
        }
    }

    #[test]
    fn vanishing_reports() {
        let degrees = betti_vanishing_report(9, 5.0, Extended::Finite(0.0));
        assert!(degrees.contains(&3) && degrees.contains(&6));
        assert!(!degrees.contains(&2) && !degrees.contains(&7));
        let at_threshold = betti_vanishing_report(9, 24.0 / 5.0, Extended::Finite(0.0));
        assert!(!at_threshold.contains(&3));

        let six = betti_vanishing_report(6, 10.0 / 3.0 + 1e-9, Extended::Finite(0.0));
        assert_eq!(six.into_iter().collect::<Vec<_>>(), vec![2, 3, 4]);
        let six_low = betti_vanishing_report(6, 0.0, Extended::Finite(-10.0 - 1e-9));
        assert_eq!(six_low.into_iter().collect::<Vec<_>>(), vec![2, 3, 4]);

        assert!(betti_vanishing_report(9, 0.0, Extended::Finite(0.0)).is_empty());
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> SymTensor2 {
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for _ in 0..rank {
            let v = nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            m += &v * v.transpose();
        }
        SymTensor2::new(m).unwrap()
    }

    #[test]
    fn nayatani_expansion_matches_ricci() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 3..8 {
            let g = SymTensor2::identity(n);
            let params = NayataniParams::new(0.4 * (n as f64 - 2.0), random_psd(&mut rng, n, n), &g).unwrap();
            let ric = params.ricci(&g);
            let scal = ric.trace_rel(&g).unwrap();
            for k in [0.0, 0.7, 2.5] {
                let direct = &(&g * scal) - &(&ric * k);
                let expanded = nayatani_ein_k(&params, &g, k).unwrap();
                assert!((&direct - &expanded).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn nayatani_examples() {
        let g = SymTensor2::identity(5);
        let params = NayataniParams::new(1.5, SymTensor2::identity(5), &g).unwrap();
        let tr = params.trace();
        let e0 = nayatani_ein_k(&params, &g, 0.0).unwrap();
        assert!((&e0 - &(&g * (4.0 * (3.0 - 3.0) * tr))).max_abs() < 1e-12);
        let iso = SymTensor2::identity(5);
        let params = NayataniParams::new(0.5, iso, &g).unwrap();
        let tr = params.trace();
        let k = 1.3;
        let (nf, d) = (5.0, 0.5);
        let expected = tr * ((nf - 1.0) * (nf - 2.0 - 2.0 * d) - k * (nf - 2.0 - d) + k * (nf - 2.0) * (d + 1.0) / nf);
        let e = nayatani_ein_k(&params, &g, k).unwrap();
        assert!((&e - &(&g * expected)).max_abs() < 1e-12);

        assert!((nayatani_threshold(9, 2.0).unwrap() - 24.0 / 5.0).abs() < 1e-12);
        assert!((nayatani_threshold(5, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let (up, _) = corollary_a(5, 1).unwrap();
        assert_eq!(nayatani_threshold(5, 1.0).unwrap(), rational_to_f64(up));
        for n in 3..10 {
            assert!((nayatani_threshold(n, 1e-12).unwrap() - (n - 1) as f64).abs() < 1e-9);
        }
        assert!(nayatani_threshold(5, 3.0).is_err());
        assert!(nayatani_threshold(5, 0.0).is_err());
        assert!(NayataniParams::new(1.0, SymTensor2::diagonal(&[1.0, -1.0, 1.0]), &SymTensor2::identity(3)).is_err());
        assert!(NayataniParams::new(0.5, SymTensor2::zeros(3), &SymTensor2::identity(3)).is_err());
    }

    #[test]
    fn nayatani_random_psd_positive_below_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(4..=8);
            let g = SymTensor2::identity(n);
            let delta = rng.gen_range(0.01..0.99) * (n as f64 - 2.0) / 2.0;
            let rank = rng.gen_range(1..=n);
            let a = random_psd(&mut rng, n, rank);
            let params = NayataniParams::new(delta, a, &g).unwrap();
            let thr = nayatani_threshold(n, delta).unwrap();
            for frac in [0.5, 0.9, 0.99] {
                let e = nayatani_ein_k(&params, &g, frac * thr).unwrap();
                assert!(is_positive_definite(&g, &e, 0.0, POSITIVITY_TOL).unwrap());
            }
        }
    }

    #[test]
    fn monotone_and_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..=6);
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            if values.iter().sum::<f64>() <= 0.0 {
                continue;
            }
            let t = thresholds_from_spectrum(&values, POSITIVITY_TOL);
            let g = SymTensor2::identity(n);
            let ric = SymTensor2::diagonal(&values);
            let s: f64 = values.iter().sum();
            // Positive at some k implies positive at every smaller positive k.
            let ks: Vec<f64> = (1..50).map(|i| i as f64 * n as f64 / 50.0).collect();
            let pos: Vec<bool> = ks
                .iter()
                .map(|k| is_positive_definite(&g, &(&(&g * s) - &(&ric * *k)), s, POSITIVITY_TOL).unwrap())
                .collect();
            for w in pos.windows(2) {
                assert!(w[0] || !w[1]);
            }
            // Scaling the metric by c scales the spectrum by 1/c.
            for c in [0.25, 3.0] {
                let scaled: Vec<f64> = values.iter().map(|v| v / c).collect();
                let ts = thresholds_from_spectrum(&scaled, POSITIVITY_TOL);
                assert!((ts.ein_up - t.ein_up).abs() < 1e-12);
                match (ts.ein_low, t.ein_low) {
                    (Extended::Finite(a), Extended::Finite(b)) => assert!((a - b).abs() < 1e-12 * b.abs().max(1.0)),
                    (a, b) => assert_eq!(a, b),
                }
            }
        }
        // Same through the full curvature path.
        let p = SpaceSpec::sphere_hyperbolic(7, 2).unwrap().curvature_at(None).unwrap();
        let base = thresholds_at_point(&p).unwrap();
        let scaled = thresholds_at_point(&p.rescaled(2.5).unwrap()).unwrap();
        assert!((base.ein_up - scaled.ein_up).abs() < 1e-12);
        let (a, b) = (base.ein_low.finite().unwrap(), scaled.ein_low.finite().unwrap());
        assert!((a - b).abs() < 1e-12);
        assert!(ein_k(&p, 0.0).max_abs() > 0.0);
    }
}
