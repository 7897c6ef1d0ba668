//! Parsing of command-line values: points, metric and map references,
//! conditions and weight lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hermcurv::certify::Condition;
use hermcurv::metric::{self, MetricSpec};
use hermcurv::schwarz::MapSpec;
use hermcurv::C64;

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        bail!("empty complex literal");
    }
    let bad = || anyhow!("invalid complex literal '{text}'");
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coef = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, coef(&body[k..])?))
        }
        None => Ok(C64::new(0.0, coef(body)?)),
    }
}

/// Comma-separated complex literals.
pub fn parse_point(text: &str) -> Result<Vec<C64>> {
    text.split(',').map(parse_complex).collect()
}

pub fn parse_indices(text: &str) -> Result<[usize; 4]> {
    let v: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| anyhow!("invalid index '{s}'")))
        .collect::<Result<_>>()?;
    let arr: [usize; 4] = v
        .try_into()
        .map_err(|_| anyhow!("expected four comma-separated indices, got '{text}'"))?;
    if arr.contains(&0) {
        bail!("indices are 1-based");
    }
    Ok(arr.map(|i| i - 1))
}

/// `uniform` or a comma-separated list of nonnegative weights.
pub fn parse_weights(text: &str, n: usize) -> Result<Vec<f64>> {
    if text == "uniform" {
        return Ok(vec![1.0; n]);
    }
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("invalid weight '{s}'")))
        .collect::<Result<_>>()?;
    if v.len() != n {
        bail!("expected {n} weights, got {}", v.len());
    }
    Ok(v)
}

/// `pos`, `nonneg`, `neg`, `nonpos`, `gt:c`, `ge:c`, `lt:c`, `le:c` or `B>=c` style.
pub fn parse_condition(text: &str) -> Result<Condition> {
    let s = text.trim();
    let rewritten = match s {
        "pos" => "B>0".to_string(),
        "nonneg" => "B>=0".to_string(),
        "neg" => "B<0".to_string(),
        "nonpos" => "B<=0".to_string(),
        _ => match s.split_once(':') {
            Some((op, c)) => {
                let rel = match op {
                    "gt" => ">",
                    "ge" => ">=",
                    "lt" => "<",
                    "le" => "<=",
                    _ => bail!("unknown condition '{text}'"),
                };
                format!("B{rel}{c}")
            }
            None => s.to_string(),
        },
    };
    Condition::parse(&rewritten).map_err(|e| anyhow!("invalid condition '{text}': {e}"))
}

/// `key=value` pairs.
pub fn parse_assignments(items: &[String]) -> Result<BTreeMap<String, f64>> {
    items
        .iter()
        .map(|item| {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value, got '{item}'"))?;
            let v = v.trim().parse::<f64>().map_err(|_| anyhow!("invalid value in '{item}'"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn is_file_ref(r: &str) -> bool {
    r.ends_with(".json") || Path::new(r).is_file()
}

/// A catalog name (with parameters filled from defaults) or a metric JSON file.
pub fn load_metric(reference: &str, given: &BTreeMap<String, f64>) -> Result<MetricSpec> {
    if is_file_ref(reference) {
        let text = fs::read_to_string(reference).with_context(|| format!("reading metric file {reference}"))?;
        return Ok(MetricSpec::from_json(&text)?);
    }
    let mut params = metric::default_params(reference);
    if metric::canonical_name(reference).is_none() {
        bail!("unknown metric '{reference}' (see `catalog list`)");
    }
    params.extend(given.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(metric::catalog(reference, &params)?)
}

/// `identity`, `constant`, a map JSON file, or `;`-separated components in
/// `z1..zm`.
pub fn load_map(reference: &str, m: usize, n: usize) -> Result<MapSpec> {
    match reference {
        "identity" => {
            if m != n {
                bail!("identity map needs equal dimensions, got {m} and {n}");
            }
            Ok(MapSpec::identity(m))
        }
        "constant" => Ok(MapSpec::constant(m, &vec![C64::new(0.0, 0.0); n])),
        r if is_file_ref(r) => {
            let text = fs::read_to_string(r).with_context(|| format!("reading map file {r}"))?;
            Ok(MapSpec::from_json(&text)?)
        }
        r => {
            let comps: Vec<String> = r.split(';').map(|s| s.trim().to_string()).collect();
            Ok(MapSpec::parse(m, comps.len(), &comps)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let cases = [
            ("0.3", C64::new(0.3, 0.0)),
            ("-2", C64::new(-2.0, 0.0)),
            ("0.1+0.2i", C64::new(0.1, 0.2)),
            ("0.1-0.2i", C64::new(0.1, -0.2)),
            ("-1e-3+2e-2i", C64::new(-1e-3, 2e-2)),
            ("0.5i", C64::new(0.0, 0.5)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("1-i", C64::new(1.0, -1.0)),
            (" 2 + 3i ", C64::new(2.0, 3.0)),
        ];
        for (s, want) in cases {
            assert_eq!(parse_complex(s).unwrap(), want, "{s}");
        }
        for bad in ["", "x", "1+", "1+2", "1..2i"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_point("0,0.1i").unwrap().len(), 2);
    }

    #[test]
    fn conditions() {
        assert_eq!(parse_condition("nonneg").unwrap().to_string(), "B>=0");
        assert_eq!(parse_condition("gt:-0.5").unwrap().to_string(), "B>-0.5");
        assert_eq!(parse_condition("B<=1").unwrap().to_string(), "B<=1");
        assert!(parse_condition("positive").is_err());
        assert!(parse_condition("eq:1").is_err());
    }

    #[test]
    fn indices_and_weights() {
        assert_eq!(parse_indices("1,1,2,2").unwrap(), [0, 0, 1, 1]);
        assert!(parse_indices("0,1,1,1").is_err());
        assert!(parse_indices("1,2,3").is_err());
        assert_eq!(parse_weights("uniform", 3).unwrap(), vec![1.0; 3]);
        assert!(parse_weights("1,2", 3).is_err());
    }
}
