//! Sweep manifests: a base run configuration and one swept model parameter.
//!
//! ```text
//! [sweep]
//! name = fig3
//! base = fig1.cfg
//! parameter = d2
//! values = 0.02, 0.05, 0.08, 0.1
//! t_end = 50
//! ```
//!
//! `base` is resolved relative to the manifest file. `t_end` optionally
//! overrides the base solver horizon.

use std::path::Path;

use fearbd_core::ModelParams;

use crate::config::{parse_f64, Document, RunConfig};
use crate::error::ConfigError;

pub const AGGREGATE_FILE: &str = "aggregate.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepManifest {
    pub name: String,
    pub base: RunConfig,
    pub base_ref: String,
    pub parameter: String,
    pub values: Vec<f64>,
    pub t_end: Option<f64>,
}

impl SweepManifest {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(None, "file", format!("cannot read {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, |base| RunConfig::from_file(&dir.join(base)))
    }

    /// `load_base` turns the `base` reference into a configuration.
    pub fn parse(text: &str, load_base: impl FnOnce(&str) -> Result<RunConfig, ConfigError>) -> Result<Self, ConfigError> {
        let mut doc = Document::parse(text)?;
        let name = doc.required_str("sweep", "name")?;
        let base_ref = doc.required_str("sweep", "base")?;
        let parameter = doc.required_str("sweep", "parameter")?;
        if !ModelParams::NAMES.contains(&parameter.as_str()) {
            return Err(ConfigError::field("sweep.parameter", format!("unknown model parameter `{parameter}`")));
        }
        let (line, raw) = doc
            .take("sweep", "values")
            .ok_or_else(|| ConfigError::field("sweep.values", "missing required key"))?;
        let values = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_f64(s, line, "sweep", "values"))
            .collect::<Result<Vec<f64>, _>>()?;
        if values.is_empty() {
            return Err(ConfigError::new(Some(line), "sweep.values", "value list is empty"));
        }
        for (i, a) in values.iter().enumerate() {
            if values[..i].contains(a) {
                return Err(ConfigError::new(Some(line), "sweep.values", format!("duplicate value {a}")));
            }
        }
        let t_end = doc.optional_f64("sweep", "t_end")?;
        doc.finish()?;
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(ConfigError::field("sweep.name", "must be a non-empty plain file name"));
        }
        let base = load_base(&base_ref)?;
        let manifest = Self { name, base, base_ref, parameter, values, t_end };
        manifest.runs()?;
        Ok(manifest)
    }

    /// One configuration per value, in manifest order.
    pub fn runs(&self) -> Result<Vec<(f64, RunConfig)>, ConfigError> {
        self.values
            .iter()
            .map(|&value| {
                let mut cfg = self.base.clone();
                cfg.params.set(&self.parameter, value);
                if let Some(t) = self.t_end {
                    cfg.solver.t_end = t;
                }
                cfg.name = format!("{}={}", self.parameter, value);
                cfg.output_dir = None;
                let cfg = RunConfig::parse(&cfg.to_ini())
                    .map_err(|e| ConfigError::field("sweep.values", format!("value {value}: {e}")))?;
                Ok((value, cfg))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[model]\nr = 2\nd = 0.5\na = 0.3\nc = 2\nm = 1\np = 1\nq = 1\nk = 0.4\nd1 = 0.01\nd2 = 0.5\n[grid]\nn = 32\n[solver]\ndt = 0.01\nt_end = 1\n";

    fn parse(text: &str) -> Result<SweepManifest, ConfigError> {
        SweepManifest::parse(text, |_| RunConfig::parse(BASE))
    }

    #[test]
    fn expands_runs() {
        let m = parse("[sweep]\nname = s\nbase = b.cfg\nparameter = d2\nvalues = 0.1, 0.2,0.3\nt_end = 2\n").unwrap();
        let runs = m.runs().unwrap();
        assert_eq!(runs.len(), 3);
        assert_eq!(runs[1].1.params.d2, 0.2);
        assert_eq!(runs[1].1.solver.t_end, 2.0);
        assert_eq!(runs[1].1.name, "d2=0.2");
    }

    #[test]
    fn rejects_bad_value_lists() {
        assert!(parse("[sweep]\nname = s\nbase = b\nparameter = d2\nvalues = \n").is_err());
        assert!(parse("[sweep]\nname = s\nbase = b\nparameter = d2\nvalues = 0.1, 0.1\n").is_err());
        assert!(parse("[sweep]\nname = s\nbase = b\nparameter = zz\nvalues = 0.1\n").is_err());
        assert!(parse("[sweep]\nname = s\nbase = b\nparameter = d2\nvalues = -1\n").is_err());
    }
}
