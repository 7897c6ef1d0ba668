//! The JSON report envelope shared by all subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use hermcurv::curvature::TORSION_FACTOR;
use hermcurv::Tolerances;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionBlock {
    pub metric_matrix: String,
    pub inverse_metric: String,
    pub curvature: String,
    pub index_pairs: String,
    pub torsion: String,
    pub torsion_factor: f64,
    pub unitary_frame: String,
    pub fubini_study: String,
    pub fubini_study_hsc: f64,
    pub complex_encoding: String,
}

impl ConventionBlock {
    pub fn current() -> Self {
        Self {
            metric_matrix: "G[(i,j)] = g_{i jbar}".into(),
            inverse_metric: "g^{p qbar} = (G^-1)[(q,p)]".into(),
            curvature: "R_{i jbar k lbar} = -d_i d_jbar g_{k lbar} + g^{b abar} d_i g_{k abar} d_jbar g_{b lbar}".into(),
            index_pairs: "first pair (i, jbar) carries the derivative directions; Ric1 traces the second pair, Ric2 the first, Ric3 pairs i with lbar".into(),
            torsion: "T^k_{ij} = sigma (Gamma^k_{ij} - Gamma^k_{ji}), Gamma^k_{ij} = g^{k qbar} d_i g_{j qbar}; eta_j = sum_i T^i_{ij}".into(),
            torsion_factor: TORSION_FACTOR,
            unitary_frame: "columns E_a with sum g_{i jbar} E_{ia} conj(E_{jb}) = delta_{ab}".into(),
            fubini_study: "g_{i jbar} = delta_ij/(1+|z|^2) - zbar_i z_j/(1+|z|^2)^2".into(),
            fubini_study_hsc: 2.0,
            complex_encoding: "[re, im]; tensors nested in index order (i, j, k, l)".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub convention_block: ConventionBlock,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub inputs: Value,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64, tolerances: Tolerances, inputs: Value, results: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            convention_block: ConventionBlock::current(),
            tolerances,
            seed,
            inputs,
            results,
            timings: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::env::current_dir()?,
    };
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| -> Result<()> {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn report_roundtrip() {
        let r = Report::new("eval", 7, Tolerances::default(), json!({"metric": "flat"}), json!({"x": [1.0, -0.5]}));
        let text = r.to_json().unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("hermcurv-report-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.json");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
