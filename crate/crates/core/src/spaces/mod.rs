//! Model geometries and coordinate charts as sources of curvature points.
//!
//! Homogeneous catalog spaces are evaluated at one representative point in an
//! orthonormal frame, so their curvature is assembled from exact constants.
//! Chart metrics go through [`fd::curvature_fd`].

pub mod chart;
pub mod expr;
pub mod fd;

use std::fmt;
use std::str::FromStr;

pub use chart::Chart;
pub use expr::{parse_metric, Expr, MetricExpression, ParseError};
pub use fd::{curvature_fd, laplacian_fd, scal_laplacian_fd, DEFAULT_FD_STEP, DEFAULT_LAPLACIAN_STEP};

use nalgebra::DMatrix;

use crate::tensor::{CurvaturePoint, SymTensor2};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    /// Constant sectional curvature `c` in dimension `n`.
    SpaceForm { n: usize, c: f64 },
    /// Riemannian product; the point argument is split between the factors.
    Product(Box<SpaceSpec>, Box<SpaceSpec>),
    /// `S^{n−d−1}(+1) × H^{d+1}(−1)`.
    SphereHyperbolic { n: usize, d: usize },
    /// `S^{n−1}(+1) × ℝ`.
    Cylinder { n: usize },
    Chart(Chart),
}

impl SpaceSpec {
    pub fn space_form(n: usize, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "space-form requires n >= 2, got n = {n}"
            )));
        }
        if !c.is_finite() {
            return Err(Error::InvalidParameter("space-form curvature must be finite".into()));
        }
        Ok(SpaceSpec::SpaceForm { n, c })
    }

    pub fn product(a: SpaceSpec, b: SpaceSpec) -> Self {
        SpaceSpec::Product(Box::new(a), Box::new(b))
    }

    pub fn sphere_hyperbolic(n: usize, d: usize) -> Result<Self> {
        if d < 1 || n < d + 3 {
            return Err(Error::InvalidParameter(format!(
                "sphere-hyperbolic requires d >= 1 and a sphere factor of dimension n-d-1 >= 2, got n = {n}, d = {d}"
            )));
        }
        Ok(SpaceSpec::SphereHyperbolic { n, d })
    }

    pub fn cylinder(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "cylinder requires n >= 3, got n = {n}"
            )));
        }
        Ok(SpaceSpec::Cylinder { n })
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceSpec::SpaceForm { n, .. }
            | SpaceSpec::SphereHyperbolic { n, .. }
            | SpaceSpec::Cylinder { n } => *n,
            SpaceSpec::Product(a, b) => a.dim() + b.dim(),
            SpaceSpec::Chart(c) => c.dim(),
        }
    }

    /// Number of coordinates a point argument must carry (0 when homogeneous).
    pub fn coord_dim(&self) -> usize {
        match self {
            SpaceSpec::Chart(c) => c.dim(),
            SpaceSpec::Product(a, b) => a.coord_dim() + b.coord_dim(),
            _ => 0,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.coord_dim() == 0
    }

    /// Sample points: the chart's declared points, or the single empty point
    /// of a homogeneous space. Products of charts use the Cartesian product.
    pub fn sample_points(&self) -> Vec<Vec<f64>> {
        match self {
            SpaceSpec::Chart(c) => c.points().to_vec(),
            SpaceSpec::Product(a, b) => {
                let mut out = Vec::new();
                for pa in a.sample_points() {
                    for pb in b.sample_points() {
                        out.push([pa.clone(), pb].concat());
                    }
                }
                out
            }
            _ => vec![Vec::new()],
        }
    }

    /// Curvature at `point`; homogeneous spaces ignore an empty or absent
    /// point.
    pub fn curvature_at(&self, point: Option<&[f64]>) -> Result<CurvaturePoint> {
        let point = point.unwrap_or(&[]);
        let needed = self.coord_dim();
        if needed > 0 && point.len() != needed {
            return Err(Error::DimensionMismatch {
                expected: needed,
                found: point.len(),
            });
        }
        match self {
            SpaceSpec::SpaceForm { n, c } => Ok(constant_curvature(*n, *c)),
            SpaceSpec::SphereHyperbolic { n, d } => Ok(block_product(
                &constant_curvature(n - d - 1, 1.0),
                &constant_curvature(d + 1, -1.0),
            )),
            SpaceSpec::Cylinder { n } => Ok(block_product(
                &constant_curvature(n - 1, 1.0),
                &constant_curvature(1, 0.0),
            )),
            SpaceSpec::Product(a, b) => {
                let split = a.coord_dim();
                let (pa, pb) = if needed > 0 {
                    point.split_at(split)
                } else {
                    (&[][..], &[][..])
                };
                Ok(block_product(
                    &a.curvature_at(Some(pa))?,
                    &b.curvature_at(Some(pb))?,
                ))
            }
            SpaceSpec::Chart(chart) => curvature_fd(chart, point, DEFAULT_FD_STEP),
        }
    }

    /// Human-readable label, also accepted by [`SpaceSpec::from_str`] for
    /// catalog kinds.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

/// Curvature point at the origin of a space form, in an orthonormal frame:
/// `R_ijkl = c(δ_ik δ_jl − δ_il δ_jk)`.
fn constant_curvature(n: usize, c: f64) -> CurvaturePoint {
    let mut riemann = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            riemann[((i * n + j) * n + i) * n + j] = c;
            riemann[((i * n + j) * n + j) * n + i] = -c;
        }
    }
    CurvaturePoint::from_riemann(SymTensor2::identity(n), riemann)
        .expect("identity metric is positive definite")
}

/// Block-diagonal assembly of two curvature points: no mixed components.
fn block_product(a: &CurvaturePoint, b: &CurvaturePoint) -> CurvaturePoint {
    let (na, nb) = (a.dim(), b.dim());
    let n = na + nb;
    let g = DMatrix::from_fn(n, n, |i, j| match (i < na, j < na) {
        (true, true) => a.metric().get(i, j),
        (false, false) => b.metric().get(i - na, j - na),
        _ => 0.0,
    });
    let mut riemann = vec![0.0; n * n * n * n];
    for (src, offset, m) in [(a, 0, na), (b, na, nb)] {
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        riemann[(((i + offset) * n + j + offset) * n + k + offset) * n + l + offset] =
                            src.riemann(i, j, k, l);
                    }
                }
            }
        }
    }
    let g = SymTensor2::new(g).expect("block metric is symmetric");
    CurvaturePoint::from_riemann(g, riemann).expect("block metric is positive definite")
}

/// Curvature at a point; see [`SpaceSpec::curvature_at`].
pub fn curvature_of(spec: &SpaceSpec, point: Option<&[f64]>) -> Result<CurvaturePoint> {
    spec.curvature_at(point)
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::SpaceForm { n, c } => write!(f, "space-form({n},{c})"),
            SpaceSpec::Product(a, b) => write!(f, "product({a},{b})"),
            SpaceSpec::SphereHyperbolic { n, d } => write!(f, "sphere-hyperbolic({n},{d})"),
            SpaceSpec::Cylinder { n } => write!(f, "cylinder({n})"),
            SpaceSpec::Chart(c) => write!(f, "chart({})", c.dim()),
        }
    }
}

/// Parses `space-form(n,c)`, `sphere-hyperbolic(n,d)`, `cylinder(n)` and
/// `product(A,B)`. Charts come from files and are not accepted here.
impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (spec, rest) = parse_spec(&compact)?;
        if !rest.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "trailing input '{rest}' in space spec '{s}'"
            )));
        }
        Ok(spec)
    }
}

fn parse_spec(s: &str) -> Result<(SpaceSpec, &str)> {
    let bad = |msg: &str| Error::InvalidParameter(format!("{msg} in space spec '{s}'"));
    let open = s.find('(').ok_or_else(|| bad("expected '('"))?;
    let name = s[..open].replace('_', "-").to_ascii_lowercase();
    let body = &s[open + 1..];
    if name == "product" {
        let (a, rest) = parse_spec(body)?;
        let rest = rest.strip_prefix(',').ok_or_else(|| bad("expected ','"))?;
        let (b, rest) = parse_spec(rest)?;
        let rest = rest.strip_prefix(')').ok_or_else(|| bad("expected ')'"))?;
        return Ok((SpaceSpec::product(a, b), rest));
    }
    let close = body.find(')').ok_or_else(|| bad("expected ')'"))?;
    let args: Vec<&str> = body[..close].split(',').collect();
    let rest = &body[close + 1..];
    let int = |v: &str| -> Result<usize> {
        v.parse()
            .map_err(|_| Error::InvalidParameter(format!("expected a non-negative integer, got '{v}'")))
    };
    let arity = |k: usize| -> Result<()> {
        if args.len() != k {
            return Err(Error::InvalidParameter(format!(
                "{name} takes {k} argument(s), got {}",
                args.len()
            )));
        }
        Ok(())
    };
    let spec = match name.as_str() {
        "space-form" => {
            arity(2)?;
            let c: f64 = args[1]
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("invalid curvature '{}'", args[1])))?;
            SpaceSpec::space_form(int(args[0])?, c)?
        }
        "sphere-hyperbolic" => {
            arity(2)?;
            SpaceSpec::sphere_hyperbolic(int(args[0])?, int(args[1])?)?
        }
        "cylinder" => {
            arity(1)?;
            SpaceSpec::cylinder(int(args[0])?)?
        }
        other => {
            return Err(Error::InvalidParameter(format!("unknown space kind '{other}'")));
        }
    };
    Ok((spec, rest))
}
