//! Report envelope, float normalization and the table renderer.

use serde_json::{json, Map, Value};

use einlab::double_forms::WEYL_TOL;
use einlab::spaces::{DEFAULT_FD_STEP, DEFAULT_LAPLACIAN_STEP};

/// Significant digits kept for every float in a report.
pub const SIG_DIGITS: usize = 12;

pub fn header(command: &str, config: Value, positivity_tol: f64) -> Value {
    json!({
        "tool": "einlab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "conventions": {
            "riemann_sign": "R[i][j][i][j] = +1 on the unit sphere (orthonormal frame)",
            "ricci_contraction": "Ric[j][l] = g^{ik} R[i][j][k][l]",
            "ein_k": "Ein_k = Scal*g - k*Ric",
            "schouten": "A = (Ric - Scal/(2(n-1)) g)/(n-2)",
            "double_forms": "shuffle-sum product; R(unit sphere) = g^2/2; operator of g^p/p! is the identity",
            "pform_basis": "lexicographic p-subsets of {1..n}",
            "spectra": "eigenvalues relative to g, ascending",
        },
        "tolerances": {
            "positivity": positivity_tol,
            "fd_step": DEFAULT_FD_STEP,
            "laplacian_step": DEFAULT_LAPLACIAN_STEP,
            "weyl_residual": WEYL_TOL,
            "closed_forms": einlab::conformal4d::FORM_TOL,
        },
    })
}

/// Rounds to `SIG_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Applies [`round_sig`] to every float in the tree; `-0` becomes `0`.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap_or(0.0));
            let x = if x == 0.0 { 0.0 } else { x };
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub fn render_json(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is valid JSON");
    s.push('\n');
    s
}

/// Indented `key: value` listing. Short arrays of scalars stay on one line.
pub fn render_table(report: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, report, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn inline_array(a: &[Value]) -> Option<String> {
    let parts: Option<Vec<String>> = a
        .iter()
        .map(|v| match v {
            Value::Array(inner) => inline_array(inner),
            other => scalar(other),
        })
        .collect();
    let parts = parts?;
    let line = format!("[{}]", parts.join(", "));
    (line.len() <= 100).then_some(line)
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Object(map) => write_object(out, map, depth),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                let pad = "  ".repeat(depth);
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}- [{i}]\n"));
                        write_value(out, item, depth + 1);
                    }
                }
            }
        }
        other => {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&scalar(other).unwrap_or_default());
            out.push('\n');
        }
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, depth: usize) {
    let pad = "  ".repeat(depth);
    for (k, v) in map {
        if let Some(s) = scalar(v) {
            out.push_str(&format!("{pad}{k}: {s}\n"));
        } else if let Some(s) = v.as_array().and_then(|a| inline_array(a)) {
            out.push_str(&format!("{pad}{k}: {s}\n"));
        } else {
            out.push_str(&format!("{pad}{k}:\n"));
            write_value(out, v, depth + 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(24.0 / 5.0), 4.8);
        assert_eq!(round_sig(4.800000000000001), 4.8);
        assert_eq!(round_sig(-12.000000000000002), -12.0);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(123456789012345.0), 123456789012000.0);
    }

    #[test]
    fn normalize_keeps_integers_and_strings() {
        let v = normalize(json!({"a": 1, "b": 0.1 + 0.2, "c": "-inf", "d": [-0.0, 2.5]}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":1,"b":0.3,"c":"-inf","d":[0.0,2.5]}"#);
    }

    #[test]
    fn table_layout() {
        let t = render_table(&json!({"x": 1, "spectrum": [1.0, 2.0], "inner": {"y": "z"}}));
        assert_eq!(t, "x: 1\nspectrum: [1.0, 2.0]\ninner:\n  y: z\n");
    }
}
