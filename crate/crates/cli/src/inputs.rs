//! Parsing of command-line values: function specs, point lists, gauges.

use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gaugecalc_core::checkers::level_endpoints;
use gaugecalc_core::funcmodel::cantor::{parse_rational, to_f64};
use gaugecalc_core::{Counterexample, FunctionModel, Gauge};

/// Inline JSON, `-` for stdin, or a path to a file.
pub fn read_text(arg: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
}

pub fn function(arg: &str) -> Result<FunctionModel> {
    let text = read_text(arg)?;
    Ok(FunctionModel::from_json(&text)?)
}

/// A decimal or `p/q` number.
pub fn number(s: &str) -> Result<f64> {
    let s = s.trim();
    if s.contains('/') {
        return Ok(to_f64(&parse_rational(s)?));
    }
    s.parse::<f64>().with_context(|| format!("not a number: {s:?}"))
}

pub fn number_list(s: &str) -> Result<Vec<f64>> {
    let out = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(number)
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        bail!("empty number list");
    }
    Ok(out)
}

/// Points as `0.5,1/3`, `level:N` (counterexample level endpoints),
/// `grid:K` (K + 1 equispaced points of the domain), a JSON array, or a file
/// holding any of these.
pub fn points(arg: &str, f: &FunctionModel) -> Result<Vec<f64>> {
    if let Some(n) = arg.strip_prefix("level:") {
        let n: u32 = n.parse().with_context(|| format!("bad level {n:?}"))?;
        let c = match f.as_counterexample() {
            Some(c) => c.clone(),
            None => Counterexample::default(),
        };
        return Ok(level_endpoints(&c, n)?);
    }
    if let Some(k) = arg.strip_prefix("grid:") {
        let k: usize = k.parse().with_context(|| format!("bad grid size {k:?}"))?;
        if k == 0 {
            bail!("grid needs at least one step");
        }
        let d = f.domain();
        return Ok((0..=k).map(|i| d.lo() + (d.hi() - d.lo()) * i as f64 / k as f64).collect());
    }
    let text = if Path::new(arg).is_file() { read_text(arg)? } else { arg.to_string() };
    let text = text.trim();
    if text.starts_with('[') {
        let raw: Vec<serde_json::Value> = serde_json::from_str(text).context("point list")?;
        return raw
            .iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => n.as_f64().context("point out of range"),
                serde_json::Value::String(s) => number(s),
                other => bail!("not a point: {other}"),
            })
            .collect();
    }
    number_list(text)
}

/// Each argument is a JSON gauge spec, a file holding one, or a comma list
/// of constant gauge values.
pub fn gauges(args: &[String]) -> Result<Vec<Gauge>> {
    let mut out = Vec::new();
    for arg in args {
        let t = arg.trim_start();
        if t.starts_with('{') || Path::new(arg).is_file() {
            out.push(Gauge::from_json(&read_text(arg)?)?);
        } else {
            for v in number_list(arg)? {
                out.push(Gauge::constant(v)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_lists() {
        assert_eq!(number("1/4").unwrap(), 0.25);
        assert_eq!(number_list("0.5, 1/2 2").unwrap(), vec![0.5, 0.5, 2.0]);
        assert!(number("x").is_err());
        assert!(number_list(" , ").is_err());
    }

    #[test]
    fn point_forms() {
        let f = FunctionModel::polynomial(&[0.0, 1.0], 0.0, 2.0).unwrap();
        assert_eq!(points("grid:4", &f).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(points(r#"[0.5, "1/4"]"#, &f).unwrap(), vec![0.5, 0.25]);
        let c = FunctionModel::counterexample();
        assert_eq!(points("level:1", &c).unwrap().len(), 4);
    }

    #[test]
    fn gauge_forms() {
        let g = gauges(&["0.1,0.01".into(), r#"{"kind":"constant","value":0.5}"#.into()]).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g[2].at(0.3).unwrap(), 0.5);
    }
}
