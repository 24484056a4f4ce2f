//! Static SVG renderings of JSON summaries.

use std::fmt::Write as _;

use riskbound::Error;
use serde_json::Value;

use crate::error::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn missing(name: &str) -> CliError {
    CliError::Core(Error::MissingField(name.into()))
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value, CliError> {
    v.get(name).filter(|x| !x.is_null()).ok_or_else(|| missing(name))
}

fn number(v: &Value, name: &str) -> Result<f64, CliError> {
    field(v, name)?.as_f64().ok_or_else(|| missing(name))
}

fn numbers(v: &Value, name: &str) -> Result<Vec<f64>, CliError> {
    let arr = field(v, name)?.as_array().ok_or_else(|| missing(name))?;
    let out: Option<Vec<f64>> = arr.iter().map(Value::as_f64).collect();
    out.filter(|xs| !xs.is_empty()).ok_or_else(|| missing(name))
}

fn text(v: &Value, name: &str) -> Result<String, CliError> {
    Ok(field(v, name)?.as_str().ok_or_else(|| missing(name))?.to_owned())
}

/// Renders a rate or ordering summary.
pub fn render(summary: &str) -> Result<String, CliError> {
    let v: Value = serde_json::from_str(summary)?;
    match text(&v, "kind")?.as_str() {
        "rate" => rate_svg(&v),
        "ordering" => ordering_svg(&v),
        other => Err(CliError::Config(format!("no plot for summaries of kind `{other}`"))),
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN:.2},{:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, from: f64, to: f64) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
        Self { lo: lo - pad, hi: hi + pad, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn rate_svg(v: &Value) -> Result<String, CliError> {
    let ns = numbers(v, "n_values")?;
    let means = numbers(v, "means")?;
    if ns.len() != means.len() {
        return Err(missing("means"));
    }
    let scenario = text(v, "scenario")?;
    let method = text(v, "method")?;
    let pts: Vec<(f64, f64)> = ns.iter().zip(&means).filter(|(_, m)| **m > 0.0).map(|(n, m)| (n.ln(), m.ln())).collect();
    let slope = v.get("slope").and_then(Value::as_f64);
    let intercept = v.get("intercept").and_then(Value::as_f64);
    let xa = Axis::new(ns.iter().map(|n| n.ln()), MARGIN, WIDTH - MARGIN);
    let ya = Axis::new(pts.iter().map(|p| p.1), HEIGHT - MARGIN, MARGIN);
    let mut s = open(&format!("{scenario}: mean excess risk of {method}"));
    for n in &ns {
        let x = xa.map(n.ln());
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#, HEIGHT - MARGIN + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n (log scale)</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">excess risk (log scale)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, xa.map(*x), ya.map(*y));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10">{:.3e}</text>"#,
            xa.map(*x) + 6.0,
            ya.map(*y) - 6.0,
            y.exp()
        );
    }
    match (slope, intercept) {
        (Some(b), Some(a)) => {
            let (x0, x1) = (ns[0].ln(), ns[ns.len() - 1].ln());
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
                xa.map(x0),
                ya.map(a + b * x0),
                xa.map(x1),
                ya.map(a + b * x1)
            );
            let expected = v.get("expected_slope").and_then(Value::as_f64).map_or(String::new(), |e| format!(" (expected {e:.4})"));
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="firebrick">fitted slope {b:.4}{}</text>"#,
                WIDTH - MARGIN,
                MARGIN - 8.0,
                escape(&expected)
            );
        }
        _ => {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">no fit: excess is zero or the sweep is too short</text>"#,
                WIDTH - MARGIN,
                MARGIN - 8.0
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn ordering_svg(v: &Value) -> Result<String, CliError> {
    let bars = [
        ("delta_bar", number(v, "delta_bar")?, "#4e79a7"),
        ("delta_hat (mean)", number(v, "delta_hat_mean")?, "#f28e2b"),
        ("delta_tilde", number(v, "delta_tilde")?, "#59a14f"),
    ];
    let lo = number(v, "delta_hat_min")?;
    let hi = number(v, "delta_hat_max")?;
    let freq = number(v, "frequency")?;
    let scenario = text(v, "scenario")?;
    let top = bars.iter().map(|b| b.1).fold(hi, f64::max).max(f64::MIN_POSITIVE);
    let scale = |x: f64| (HEIGHT - MARGIN) - x / top * (HEIGHT - 2.0 * MARGIN - 20.0);
    let mut s = open(&format!("{scenario}: bound ordering, ordered in {:.1}% of trials", 100.0 * freq));
    let slot = (WIDTH - 2.0 * MARGIN) / bars.len() as f64;
    for (i, (name, value, color)) in bars.iter().enumerate() {
        let x = MARGIN + slot * (i as f64 + 0.2);
        let w = slot * 0.6;
        let y = scale(*value);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{:.2}" fill="{color}"/>"#,
            HEIGHT - MARGIN - y
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{value:.4e}</text>"#, x + w / 2.0, y - 6.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#, x + w / 2.0, HEIGHT - MARGIN + 18.0);
        if i == 1 {
            let cx = x + w / 2.0;
            let _ = writeln!(
                s,
                r#"<path d="M{cx:.2},{:.2} V{:.2} M{:.2},{:.2} H{:.2} M{:.2},{:.2} H{:.2}" stroke="black"/>"#,
                scale(lo),
                scale(hi),
                cx - 8.0,
                scale(lo),
                cx + 8.0,
                cx - 8.0,
                scale(hi),
                cx + 8.0
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_summary_is_an_error() {
        assert!(matches!(render("{}"), Err(CliError::Core(Error::MissingField(f))) if f == "kind"));
        let partial = r#"{"kind": "rate", "n_values": [], "means": []}"#;
        assert!(matches!(render(partial), Err(CliError::Core(Error::MissingField(_)))));
        assert!(render("").is_err());
    }

    #[test]
    fn rate_plot_has_fit_annotation() {
        let json = r#"{"kind": "rate", "scenario": "s", "method": "erm", "n_values": [64, 128, 256],
            "means": [0.04, 0.02, 0.01], "slope": -1.0, "intercept": 0.94, "expected_slope": -1.0}"#;
        let svg = render(json).unwrap();
        assert!(svg.contains("fitted slope -1.0000"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg, render(json).unwrap());
    }

    #[test]
    fn ordering_plot_has_three_bars() {
        let json = r#"{"kind": "ordering", "scenario": "s", "delta_bar": 0.01, "delta_hat_mean": 0.02,
            "delta_hat_min": 0.015, "delta_hat_max": 0.03, "delta_tilde": 0.05, "frequency": 0.97}"#;
        let svg = render(json).unwrap();
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains("delta_tilde"));
    }
}
