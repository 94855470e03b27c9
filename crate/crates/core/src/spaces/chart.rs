//! Coordinate-chart metrics and the chart input file.
//!
//! File format, one statement per line:
//!
//! ```text
//! # comment (also after a statement)
//! n = 3
//! g[1][1] = 4/(1+x1^2+x2^2+x3^2)^2
//! g[1][2] = 0
//! ...                                  # every i <= j exactly once
//! points = (0.1, -0.2, 0.3), (0, 0, 0.5)
//! ```
//!
//! `n` must precede the components. Indices are 1-based, `g[j][i]` is accepted
//! for `g[i][j]`, and all `n(n+1)/2` components must be present. `points` may be
//! given more than once; tuples accumulate.

use nalgebra::DMatrix;

use super::expr::{MetricExpression, ParseError};
use crate::tensor::SymTensor2;
use crate::{Error, Result};

/// A metric given by component expressions in coordinates `x1..xn`, together
/// with the sample points at which it is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    n: usize,
    /// Upper triangle, row-major: (0,0), (0,1), …, (n−1,n−1).
    components: Vec<MetricExpression>,
    points: Vec<Vec<f64>>,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Chart {
    /// `components` is the upper triangle in row-major order.
    pub fn new(n: usize, components: Vec<MetricExpression>, points: Vec<Vec<f64>>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("chart dimension must be at least 1".into()));
        }
        let expected = n * (n + 1) / 2;
        if components.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "chart of dimension {n} needs {expected} component expressions, got {}",
                components.len()
            )));
        }
        for c in &components {
            if c.ast.max_var() > n {
                return Err(Error::InvalidParameter(format!(
                    "unknown identifier x{} in '{}' (chart dimension {n})",
                    c.ast.max_var(),
                    c.source
                )));
            }
        }
        for pt in &points {
            if pt.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: pt.len(),
                });
            }
        }
        Ok(Self {
            n,
            components,
            points,
        })
    }

    /// Builds a chart from upper-triangle source strings.
    pub fn from_sources<S: AsRef<str>>(n: usize, sources: &[S], points: Vec<Vec<f64>>) -> Result<Self> {
        let components = super::expr::parse_metric(sources)?;
        Self::new(n, components, points)
    }

    /// Conformally flat chart `factor(x)·δ_ij`.
    pub fn conformal(n: usize, factor: &str, points: Vec<Vec<f64>>) -> Result<Self> {
        let mut sources = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                sources.push(if i == j { factor.to_string() } else { "0".to_string() });
            }
        }
        Self::from_sources(n, &sources, points)
    }

    /// Stereographic chart of the unit sphere: `4/(1+|x|²)² δ_ij`.
    pub fn stereographic_sphere(n: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        let squares: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
        Self::conformal(n, &format!("4/(1+{})^2", squares.join("+")), points)
    }

    /// Upper half-space chart of hyperbolic space: `δ_ij / x_n²`.
    pub fn half_space(n: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        Self::conformal(n, &format!("1/x{n}^2"), points)
    }

    pub fn flat(n: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        Self::conformal(n, "1", points)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// The same metric with a different list of sample points.
    pub fn with_points(self, points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.n, self.components, points)
    }

    pub fn component(&self, i: usize, j: usize) -> &MetricExpression {
        &self.components[upper_index(self.n, i, j)]
    }

    /// Raw component matrix at `x`, without any definiteness check.
    pub(crate) fn matrix_at(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.component(i, j).eval(x))
    }

    /// Metric at `x`; fails when it is not finite and positive definite.
    pub fn metric_at(&self, x: &[f64]) -> Result<SymTensor2> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let m = self.matrix_at(x);
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        let g = SymTensor2::new(m)?;
        crate::tensor::cholesky_factor(&g)?;
        Ok(g)
    }

    /// Parses the chart file format described in the module documentation.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut slots: Vec<Option<MetricExpression>> = Vec::new();
        let mut points = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(syntax(line, raw, content.trim_start(), "expected 'key = value'"));
            };
            let key = content[..eq].trim();
            let value = &content[eq + 1..];
            let value_col = column_of(raw, eq + 1) + leading_ws(value);

            if key == "n" {
                if n.is_some() {
                    return Err(syntax(line, raw, key, "duplicate 'n'"));
                }
                let parsed: usize = value.trim().parse().map_err(|_| Error::ChartSyntax {
                    line,
                    column: value_col,
                    message: format!("invalid dimension '{}'", value.trim()),
                })?;
                if parsed == 0 {
                    return Err(Error::ChartSyntax {
                        line,
                        column: value_col,
                        message: "dimension must be positive".into(),
                    });
                }
                n = Some(parsed);
                slots = vec![None; parsed * (parsed + 1) / 2];
            } else if key == "points" {
                let dim = n.ok_or_else(|| syntax(line, raw, key, "'n' must be declared first"))?;
                for tuple in parse_points(value, line, value_col - leading_ws(value))? {
                    if tuple.len() != dim {
                        return Err(Error::ChartSyntax {
                            line,
                            column: value_col,
                            message: format!("point has {} coordinates, expected {dim}", tuple.len()),
                        });
                    }
                    points.push(tuple);
                }
            } else if key.starts_with("g[") {
                let dim = n.ok_or_else(|| syntax(line, raw, key, "'n' must be declared first"))?;
                let (i, j) = parse_indices(key)
                    .ok_or_else(|| syntax(line, raw, key, "expected g[i][j]"))?;
                if i == 0 || j == 0 || i > dim || j > dim {
                    return Err(syntax(
                        line,
                        raw,
                        key,
                        &format!("component index out of range 1..{dim}"),
                    ));
                }
                let slot = upper_index(dim, i - 1, j - 1);
                if slots[slot].is_some() {
                    return Err(syntax(line, raw, key, "duplicate component"));
                }
                let expr = MetricExpression::parse_at(value.trim(), line).map_err(|e| {
                    Error::Parse(ParseError {
                        column: e.column + value_col - 1,
                        ..e
                    })
                })?;
                if expr.ast.max_var() > dim {
                    return Err(Error::ChartSyntax {
                        line,
                        column: value_col,
                        message: format!("unknown identifier x{}", expr.ast.max_var()),
                    });
                }
                slots[slot] = Some(expr);
            } else {
                return Err(syntax(line, raw, key, &format!("unknown key '{key}'")));
            }
        }

        let dim = n.ok_or(Error::ChartSyntax {
            line: 0,
            column: 0,
            message: "missing 'n'".into(),
        })?;
        let mut components = Vec::with_capacity(slots.len());
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(c) => components.push(c),
                None => {
                    let (a, b) = upper_pair(dim, i);
                    return Err(Error::ChartSyntax {
                        line: 0,
                        column: 0,
                        message: format!("missing component g[{}][{}]", a + 1, b + 1),
                    });
                }
            }
        }
        Self::new(dim, components, points)
    }
}

fn upper_pair(n: usize, index: usize) -> (usize, usize) {
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if k == index {
                return (i, j);
            }
            k += 1;
        }
    }
    unreachable!("index within the upper triangle")
}

fn leading_ws(s: &str) -> usize {
    s.chars().take_while(|c| c.is_whitespace()).count()
}

fn column_of(raw: &str, byte: usize) -> usize {
    raw[..byte.min(raw.len())].chars().count() + 1
}

fn syntax(line: usize, raw: &str, token: &str, message: &str) -> Error {
    let column = raw.find(token).map_or(1, |b| column_of(raw, b));
    Error::ChartSyntax {
        line,
        column,
        message: message.to_string(),
    }
}

fn parse_indices(key: &str) -> Option<(usize, usize)> {
    let rest = key.strip_prefix("g[")?;
    let (i, rest) = rest.split_once(']')?;
    let rest = rest.trim_start().strip_prefix('[')?;
    let (j, rest) = rest.split_once(']')?;
    if !rest.trim().is_empty() {
        return None;
    }
    Some((i.trim().parse().ok()?, j.trim().parse().ok()?))
}

fn parse_points(value: &str, line: usize, base_col: usize) -> Result<Vec<Vec<f64>>> {
    let err = |offset: usize, message: String| Error::ChartSyntax {
        line,
        column: base_col + value[..offset].chars().count(),
        message,
    };
    let mut out = Vec::new();
    let mut rest = value;
    let mut offset = 0;
    loop {
        let skip = rest.len() - rest.trim_start_matches(|c: char| c.is_whitespace() || c == ',' || c == ';').len();
        rest = &rest[skip..];
        offset += skip;
        if rest.is_empty() {
            break;
        }
        if !rest.starts_with('(') {
            return Err(err(offset, "expected '(' to start a point".into()));
        }
        let close = rest
            .find(')')
            .ok_or_else(|| err(offset, "unclosed point tuple".into()))?;
        let inner = &rest[1..close];
        let mut coords = Vec::new();
        let mut inner_offset = offset + 1;
        for part in inner.split(',') {
            let trimmed = part.trim();
            let v: f64 = trimmed.parse().map_err(|_| {
                err(
                    inner_offset + leading_ws(part),
                    format!("invalid coordinate '{trimmed}'"),
                )
            })?;
            coords.push(v);
            inner_offset += part.len() + 1;
        }
        out.push(coords);
        rest = &rest[close + 1..];
        offset += close + 1;
    }
    if out.is_empty() {
        return Err(err(0, "no points given".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE3: &str = "\
# stereographic 3-sphere
n = 3
g[1][1] = 4/(1+x1^2+x2^2+x3^2)^2
g[2][2] = 4/(1+x1^2+x2^2+x3^2)^2
g[3][3] = 4/(1+x1^2+x2^2+x3^2)^2
g[1][2] = 0
g[2][1 ] = 0   # symmetric duplicate below is rejected
g[1][3] = 0
points = (0.1, -0.2, 0.3), (0, 0, 0)
";

    #[test]
    fn parse_valid_file() {
        let text = SPHERE3.replace("g[2][1 ]", "g[3][2]");
        let chart = Chart::parse_file(&text).unwrap();
        assert_eq!(chart.dim(), 3);
        assert_eq!(chart.points().len(), 2);
        let g = chart.metric_at(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.get(0, 0), 4.0);
        assert_eq!(g.get(1, 2), 0.0);
        assert_eq!(
            chart,
            Chart::stereographic_sphere(3, chart.points().to_vec()).unwrap()
        );
    }

    #[test]
    fn duplicate_symmetric_component_rejected() {
        let text = SPHERE3.replace("g[2][1 ]", "g[2][1]").replace("g[1][2] = 0\n", "g[1][2] = 0\ng[2][3] = 0\n");
        let err = Chart::parse_file(&text).unwrap_err();
        match err {
            Error::ChartSyntax { line, message, .. } => {
                assert_eq!(line, 8);
                assert_eq!(message, "duplicate component");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_component_reported() {
        let text = SPHERE3.replace("g[2][1 ] = 0   # symmetric duplicate below is rejected\n", "");
        let err = Chart::parse_file(&text).unwrap_err();
        assert!(err.to_string().contains("missing component g[2][3]"), "{err}");
    }

    #[test]
    fn expression_error_positions_are_file_columns() {
        let text = "n = 1\ng[1][1] = sin(x1\npoints = (0)\n";
        match Chart::parse_file(text).unwrap_err() {
            Error::Parse(e) => {
                assert_eq!(e.line, 2);
                assert_eq!(e.column, 17);
                assert_eq!(e.message, "unclosed parenthesis");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_lines() {
        for (text, line) in [
            ("g[1][1] = 1\n", 1),
            ("n = 2\nfoo = 1\n", 2),
            ("n = 1\ng[1][1] = 1\npoints = (a)\n", 3),
            ("n = 1\ng[1][1] = 1\npoints = (1, 2)\n", 3),
            ("n = 1\ng[2][1] = 1\n", 2),
            ("n = 1\njunk\n", 2),
            ("n = 1\ng[1][1] = x2\n", 2),
        ] {
            match Chart::parse_file(text) {
                Err(Error::ChartSyntax { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn indefinite_metric_rejected() {
        let chart = Chart::from_sources(2, &["1", "0", "-1"], vec![]).unwrap();
        assert_eq!(chart.metric_at(&[0.0, 0.0]), Err(Error::NotPositiveDefinite));
        let hyp = Chart::half_space(2, vec![]).unwrap();
        assert_eq!(hyp.metric_at(&[0.0, 0.0]), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn wrong_component_count() {
        assert!(Chart::from_sources(2, &["1", "0"], vec![]).is_err());
        assert!(Chart::from_sources(1, &["x2"], vec![]).is_err());
    }
}
