//! One function per subcommand. Each returns the resolved configuration echo
//! and the report body.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Value};

use einlab::conformal4d::{optimize_alpha, theorem_c_bounds, ConformalData4D};
use einlab::constants::{
    corollary_a, ein_profile_with_tol, rational_to_f64, vanishing_thresholds, vanishing_witnesses,
    betti_vanishing_report,
};
use einlab::double_forms::{
    k1, sum_lowest_p, weitzenbock_cflat, weitzenbock_cflat_companion, weitzenbock_general, weyl_residual,
    OperatorSummary,
};
use einlab::spaces::fd::ricci_spectrum;
use einlab::spaces::{scal_laplacian_fd, Chart, SpaceSpec, DEFAULT_LAPLACIAN_STEP};
use einlab::tensor::{ein_k, q_curvature, schouten, sigma_invariants, spectrum_rel, CurvaturePoint};
use einlab::{Error, Extended};
use num_rational::Rational64;

use crate::report::round_sig;

pub type Outcome = Result<Report, CliError>;

pub struct Report {
    pub config: Value,
    pub body: Value,
    pub exit_code: u8,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: PathBuf, message: String },
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io_error",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io { path, message } => format!("{}: {message}", path.display()),
            CliError::Usage(m) => m.clone(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse_point(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid coordinate '{}' in point '{s}'", t.trim())))
        })
        .collect()
}

#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// Catalog space: a kind (space-form, sphere, hyperbolic, sphere-hyperbolic,
    /// cylinder) completed by --n/--d/--c, or a full spec such as
    /// `product(space-form(2,1),cylinder(3))`.
    #[arg(long, conflicts_with = "chart")]
    pub space: Option<String>,
    /// Dimension for a catalog kind.
    #[arg(long)]
    pub n: Option<usize>,
    /// Hyperbolic parameter d of sphere-hyperbolic.
    #[arg(long)]
    pub d: Option<usize>,
    /// Sectional curvature of space-form.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Chart file with metric components and sample points.
    #[arg(long)]
    pub chart: Option<PathBuf>,
    /// Sample point `x1,x2,...`; repeatable; replaces the chart's points.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<String>,
}

impl SpaceArgs {
    pub fn resolve(&self) -> Result<(SpaceSpec, Vec<Vec<f64>>), CliError> {
        let points: Vec<Vec<f64>> = self.points.iter().map(|p| parse_point(p)).collect::<Result<_, _>>()?;
        if let Some(path) = &self.chart {
            let mut chart = Chart::parse_file(&read_file(path)?)?;
            if !points.is_empty() {
                chart = chart.with_points(points)?;
            }
            if chart.points().is_empty() {
                return Err(CliError::Usage(
                    "chart has no sample points; add 'points = (...)' or --point".into(),
                ));
            }
            let spec = SpaceSpec::Chart(chart);
            let samples = spec.sample_points();
            return Ok((spec, samples));
        }
        let Some(name) = &self.space else {
            return Err(CliError::Usage("one of --space or --chart is required".into()));
        };
        let spec = self.catalog(name)?;
        if !points.is_empty() && spec.is_homogeneous() {
            return Err(CliError::Usage("--point applies to charts only".into()));
        }
        let samples = spec.sample_points();
        Ok((spec, samples))
    }

    fn catalog(&self, name: &str) -> Result<SpaceSpec, CliError> {
        if name.contains('(') {
            return Ok(name.parse()?);
        }
        let need_n = || {
            self.n
                .ok_or_else(|| CliError::Usage(format!("--space {name} requires --n")))
        };
        let kind = name.replace('_', "-").to_ascii_lowercase();
        let spec = match kind.as_str() {
            "space-form" => {
                let c = self
                    .c
                    .ok_or_else(|| CliError::Usage("--space space-form requires --c".into()))?;
                SpaceSpec::space_form(need_n()?, c)?
            }
            "sphere" => SpaceSpec::space_form(need_n()?, 1.0)?,
            "hyperbolic" => SpaceSpec::space_form(need_n()?, -1.0)?,
            "flat" | "euclidean" => SpaceSpec::space_form(need_n()?, 0.0)?,
            "sphere-hyperbolic" => {
                let d = self
                    .d
                    .ok_or_else(|| CliError::Usage("--space sphere-hyperbolic requires --d".into()))?;
                SpaceSpec::sphere_hyperbolic(need_n()?, d)?
            }
            "cylinder" => SpaceSpec::cylinder(need_n()?)?,
            other => return Err(CliError::Usage(format!("unknown space kind '{other}'"))),
        };
        Ok(spec)
    }

    pub fn echo(&self, spec: &SpaceSpec, samples: &[Vec<f64>]) -> Value {
        json!({
            "space": spec.label(),
            "chart": self.chart.as_ref().map(|p| p.display().to_string()),
            "points": samples,
        })
    }
}

pub fn spaces_list() -> Outcome {
    let body = json!({
        "spaces": [
            {
                "kind": "space-form",
                "syntax": "space-form(n,c) | --space space-form --n N --c C",
                "constraints": "n >= 2, c finite",
                "description": "constant sectional curvature c; aliases sphere (c = 1), hyperbolic (c = -1), flat (c = 0)",
            },
            {
                "kind": "sphere-hyperbolic",
                "syntax": "sphere-hyperbolic(n,d) | --space sphere-hyperbolic --n N --d D",
                "constraints": "d >= 1, n >= d + 3; exact constants need d < (n-2)/2",
                "description": "S^(n-d-1)(+1) x H^(d+1)(-1)",
            },
            {
                "kind": "cylinder",
                "syntax": "cylinder(n) | --space cylinder --n N",
                "constraints": "n >= 3",
                "description": "S^(n-1)(+1) x R",
            },
            {
                "kind": "product",
                "syntax": "product(A,B)",
                "constraints": "A, B catalog specs",
                "description": "Riemannian product, block-diagonal curvature",
            },
            {
                "kind": "chart",
                "syntax": "--chart FILE [--point x1,...,xn]",
                "constraints": "metric positive definite on the finite-difference stencil",
                "description": "metric components as expressions in x1..xn, curvature by finite differences",
            },
        ]
    });
    Ok(Report {
        config: json!({}),
        body,
        exit_code: 0,
    })
}

fn exact(r: Rational64) -> Value {
    json!({ "value": rational_to_f64(r), "exact": r.to_string() })
}

fn exact_ext(r: Extended<Rational64>) -> Value {
    match r {
        Extended::NegInfinity => json!("-inf"),
        Extended::Finite(r) => exact(r),
    }
}

fn closed_form(spec: &SpaceSpec) -> Value {
    match spec {
        SpaceSpec::SphereHyperbolic { n, d } => match corollary_a(*n, *d) {
            Ok((up, low)) => json!({ "applicable": true, "Ein": exact(up), "ein": exact(low) }),
            Err(e) => json!({ "applicable": false, "reason": e.to_string() }),
        },
        SpaceSpec::SpaceForm { n, c } if *c > 0.0 => {
            json!({ "applicable": true, "Ein": *n, "ein": "-inf" })
        }
        SpaceSpec::Cylinder { n } => json!({ "applicable": true, "Ein": n - 1, "ein": "-inf" }),
        _ => Value::Null,
    }
}

fn point_details(spec: &SpaceSpec, p: &CurvaturePoint, x: &[f64]) -> Result<Value, CliError> {
    let n = p.dim();
    let mut v = json!({
        "point": x,
        "scal": p.scal(),
        "ricci_spectrum": ricci_spectrum(p)?,
        "curvature_residual": p.residuals().max(),
    });
    if n >= 3 {
        let a = schouten(p)?;
        let (s1, s2) = sigma_invariants(p.metric(), &a)?;
        v["schouten_spectrum"] = to_value(&spectrum_rel(p.metric(), &a)?);
        v["sigma1"] = json!(s1);
        v["sigma2"] = json!(s2);
    }
    if n == 4 {
        let lap = match spec {
            SpaceSpec::Chart(chart) => scal_laplacian_fd(chart, x, DEFAULT_LAPLACIAN_STEP)?,
            _ if spec.is_homogeneous() => 0.0,
            _ => return Ok(v),
        };
        v["laplacian_scal"] = json!(lap);
        v["q_curvature"] = json!(q_curvature(p, lap)?);
    }
    Ok(v)
}

pub fn compute(args: &SpaceArgs, tol: f64) -> Outcome {
    let (spec, samples) = args.resolve()?;
    let profile = ein_profile_with_tol(&spec, &samples, tol)?;
    let mut points = Vec::new();
    for x in &samples {
        let p = spec.curvature_at(Some(x))?;
        points.push(point_details(&spec, &p, x)?);
    }
    let body = json!({
        "space": spec.label(),
        "n": spec.dim(),
        "profile": to_value(&profile),
        "closed_form": closed_form(&spec),
        "points": points,
    });
    Ok(Report {
        config: args.echo(&spec, &samples),
        body,
        exit_code: 0,
    })
}

pub fn weitzenbock(args: &SpaceArgs, deg: usize, tol: f64) -> Outcome {
    let (spec, samples) = args.resolve()?;
    let n = spec.dim();
    let mut per_point = Vec::new();
    for x in &samples {
        let p = spec.curvature_at(Some(x))?;
        let general = weitzenbock_general(&p, deg)?;
        let mut entry = json!({
            "point": x,
            "general": to_value(&OperatorSummary::of(&general, tol)),
        });
        let k = k1(n, deg);
        entry["sum_lowest_p_ein_k1"] = json!(sum_lowest_p(&ein_k(&p, k), p.metric(), deg)?);
        entry["weyl_residual"] = json!(weyl_residual(&p)?);
        match weitzenbock_cflat(&p, deg) {
            Ok(cflat) => {
                entry["conformally_flat"] = to_value(&OperatorSummary::of(&cflat, tol));
                entry["reduction_residual"] = json!(general.max_abs_diff(&cflat)?);
            }
            Err(e @ Error::WeylNonzero { .. }) => {
                entry["conformally_flat"] = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
                entry["reduction_residual"] = Value::Null;
            }
            Err(e) => return Err(e.into()),
        }
        entry["companion"] = if deg + 2 <= n {
            match weitzenbock_cflat_companion(&p, deg) {
                Ok(op) => to_value(&OperatorSummary::of(&op, tol)),
                Err(Error::WeylNonzero { .. }) => Value::Null,
                Err(e) => return Err(e.into()),
            }
        } else {
            Value::Null
        };
        per_point.push(entry);
    }
    let t = vanishing_thresholds(n, deg)?;
    let body = json!({
        "space": spec.label(),
        "n": n,
        "p": deg,
        "k1": exact(t.k1),
        "k2": exact_ext(t.k2),
        "per_point": per_point,
    });
    let mut config = args.echo(&spec, &samples);
    config["p"] = json!(deg);
    Ok(Report {
        config,
        body,
        exit_code: 0,
    })
}

pub fn parse_extended(s: &str) -> Result<Extended<f64>, String> {
    match s.trim() {
        "-inf" | "-infinity" | "-Inf" => Ok(Extended::NegInfinity),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Extended::Finite)
            .ok_or_else(|| format!("expected a real number or -inf, got '{s}'")),
    }
}

pub struct ThresholdArgs {
    pub n: usize,
    pub p: Option<usize>,
    pub ein_up: Option<f64>,
    pub ein_low: Option<Extended<f64>>,
    pub betti: Option<Vec<u64>>,
}

pub fn thresholds(a: &ThresholdArgs) -> Outcome {
    let n = a.n;
    if n < 3 {
        return Err(CliError::Usage(format!("thresholds need n >= 3, got n = {n}")));
    }
    let degrees: Vec<usize> = match a.p {
        Some(p) => {
            vanishing_thresholds(n, p)?;
            vec![p]
        }
        None => (2..n).collect(),
    };
    let table: Vec<Value> = degrees
        .iter()
        .map(|&p| {
            let t = vanishing_thresholds(n, p).expect("degree range checked");
            json!({ "p": p, "companion": n - p, "k1": exact(t.k1), "k2": exact_ext(t.k2) })
        })
        .collect();
    let mut body = json!({ "n": n, "table": table });
    if let Some(b) = &a.betti {
        if b.len() != n + 1 {
            return Err(CliError::Usage(format!(
                "--betti needs n+1 = {} entries b_0..b_n, got {}",
                n + 1,
                b.len()
            )));
        }
    }
    if a.ein_up.is_some() || a.ein_low.is_some() {
        // Absent bounds are replaced by 0, which never beats a threshold.
        let up = a.ein_up.unwrap_or(0.0);
        let low = a.ein_low.unwrap_or(Extended::Finite(0.0));
        let witnesses = vanishing_witnesses(n, up, low);
        let forced = betti_vanishing_report(n, up, low);
        body["bounds"] = json!({ "Ein": a.ein_up, "ein": a.ein_low.map(|e| to_value(&e)) });
        body["vanishing"] = json!({ "degrees": forced, "witnesses": to_value(&witnesses) });
        if let Some(b) = &a.betti {
            let contradictions: Vec<Value> = forced
                .iter()
                .filter(|&&p| b[p] != 0)
                .map(|&p| {
                    let w = witnesses
                        .iter()
                        .find(|w| w.p == p || w.companion == p)
                        .expect("forced degrees come from witnesses");
                    let bound = if w.bound == "Ein" {
                        format!("Ein = {}", a.ein_up.unwrap_or(0.0))
                    } else {
                        format!("ein = {}", low)
                    };
                    let rel = if w.bound == "Ein" { ">" } else { "<" };
                    json!({
                        "p": p,
                        "b_p": b[p],
                        "reason": format!(
                            "{bound} {rel} {} = {} at p = {} forces b_{} = b_{} = 0",
                            w.threshold,
                            round_sig(w.threshold_value),
                            w.p, w.p, w.companion
                        ),
                    })
                })
                .collect();
            body["betti"] = json!({
                "declared": b,
                "consistent": contradictions.is_empty(),
                "contradictions": contradictions,
            });
        }
    } else if let Some(b) = &a.betti {
        body["betti"] = json!({ "declared": b, "consistent": true, "contradictions": [] });
    }
    let config = json!({
        "n": n,
        "p": a.p,
        "Ein": a.ein_up,
        "ein": a.ein_low.map(|e| to_value(&e)),
        "betti": a.betti,
    });
    Ok(Report {
        config,
        body,
        exit_code: 0,
    })
}

pub struct TheoremCArgs {
    pub yamabe: f64,
    pub sigma2_integral: Option<f64>,
    pub space: Option<String>,
    pub volume: Option<f64>,
    pub oracle: Option<f64>,
}

fn sigma2_from_space(spec: &str, volume: f64) -> Result<f64, CliError> {
    let spec: SpaceSpec = spec.parse()?;
    if spec.dim() != 4 {
        return Err(Error::QCurvatureDimension { n: spec.dim() }.into());
    }
    if !spec.is_homogeneous() {
        return Err(CliError::Usage("--space needs a homogeneous catalog space".into()));
    }
    if !(volume > 0.0) {
        return Err(CliError::Usage(format!("--volume must be positive, got {volume}")));
    }
    let p = spec.curvature_at(None)?;
    let (_, s2) = sigma_invariants(p.metric(), &schouten(&p)?)?;
    Ok(s2 * volume)
}

pub fn theorem_c(a: &TheoremCArgs) -> Outcome {
    let integral = match (a.sigma2_integral, &a.space, a.volume) {
        (Some(i), None, _) => i,
        (None, Some(s), Some(v)) => sigma2_from_space(s, v)?,
        (None, Some(_), None) => return Err(CliError::Usage("--space requires --volume".into())),
        _ => {
            return Err(CliError::Usage(
                "give either --sigma2-integral or --space with --volume".into(),
            ))
        }
    };
    let data = ConformalData4D::new(a.yamabe, integral)?;
    let bounds = theorem_c_bounds(&data)?;
    let mut body = json!({ "yamabe": data.yamabe, "sigma2_integral": integral });
    if let (Value::Object(dst), Value::Object(src)) = (&mut body, to_value(&bounds)) {
        dst.extend(src);
    }
    if let Some(grid) = a.oracle {
        if integral < 0.0 {
            let o = optimize_alpha(&data, grid)?;
            let closed_low = bounds.ein_lower_bound.finite().unwrap_or(f64::NEG_INFINITY);
            let up_ok = o.brackets_ein(bounds.ein_bound, 1e-12);
            let low_ok = o.brackets_ein_lower(closed_low, 1e-12);
            let mut ov = to_value(&o);
            ov["agreement"] = json!(up_ok && low_ok);
            ov["summary"] = json!(format!(
                "oracle agreement: Ein bound {} vs scan {} ({}), ein bound {} vs scan {} ({})",
                round_sig(bounds.ein_bound),
                round_sig(o.ein_bound),
                if up_ok { "within one grid step" } else { "MISMATCH" },
                round_sig(closed_low),
                round_sig(o.ein_lower_bound),
                if low_ok { "within one grid step" } else { "MISMATCH" },
            ));
            body["oracle"] = ov;
        } else {
            body["oracle"] = json!({ "skipped": "the alpha scan needs a negative sigma2 integral" });
        }
    }
    let config = json!({
        "yamabe": a.yamabe,
        "sigma2_integral": a.sigma2_integral,
        "space": a.space,
        "volume": a.volume,
        "oracle": a.oracle,
    });
    Ok(Report {
        config,
        body,
        exit_code: 0,
    })
}

pub fn validate_chart(file: &Path, against: &str, tolerance: f64) -> Outcome {
    let chart = Chart::parse_file(&read_file(file)?)?;
    let catalog: SpaceSpec = against.parse()?;
    if catalog.dim() != chart.dim() {
        return Err(Error::DimensionMismatch {
            expected: catalog.dim(),
            found: chart.dim(),
        }
        .into());
    }
    if chart.points().is_empty() {
        return Err(CliError::Usage("chart has no sample points".into()));
    }
    let exact = catalog.curvature_at(None)?;
    let expected = ricci_spectrum(&exact)?;
    let mut worst = 0.0f64;
    let mut points = Vec::new();
    for x in chart.points() {
        let p = einlab::spaces::curvature_fd(&chart, x, einlab::spaces::DEFAULT_FD_STEP)?;
        let got = ricci_spectrum(&p)?;
        let dev = got
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .fold((p.scal() - exact.scal()).abs(), f64::max);
        worst = worst.max(dev);
        points.push(json!({
            "point": x,
            "ricci_spectrum": got,
            "scal": p.scal(),
            "deviation": dev,
        }));
    }
    let pass = worst <= tolerance;
    let body = json!({
        "against": catalog.label(),
        "catalog_ricci_spectrum": expected,
        "catalog_scal": exact.scal(),
        "points": points,
        "max_deviation": worst,
        "tolerance": tolerance,
        "pass": pass,
    });
    let config = json!({
        "file": file.display().to_string(),
        "against": against,
        "tolerance": tolerance,
    });
    Ok(Report {
        config,
        body,
        exit_code: if pass { 0 } else { 3 },
    })
}
