//! INI-style run configuration.
//!
//! ```text
//! [model]      r d a c m p q k d1 d2
//! [grid]       L n
//! [solver]     dt t_end scheme snapshot_stride steady_tol positivity_mode
//! [initial]    kind = constant | equilibrium-cosine | file, plus its keys
//! [analysis]   n_modes mu_lower poincare_const
//! [output]     name dir
//! ```
//!
//! Blank lines and lines starting with `#` or `;` are ignored. Every key in
//! `[model]` is required; the other sections fall back to defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fearbd_core::{Grid1D, ModelParams, PositivityMode, Scheme, SolverConfig};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Constant { u: f64, v: f64 },
    /// (u~ + amp_u cos(freq_u x), v~ + amp_v cos(freq_v x)) around the
    /// coexistence state.
    EquilibriumCosine { amp_u: f64, freq_u: f64, amp_v: f64, freq_v: f64 },
    /// CSV with columns u and v (and optionally t, x); the rows with the
    /// largest t are used.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub n_modes: usize,
    pub mu_lower: Option<f64>,
    pub poincare_const: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { n_modes: 20, mu_lower: None, poincare_const: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub params: ModelParams,
    pub length: f64,
    pub n: usize,
    pub solver: SolverConfig,
    pub initial: InitialCondition,
    pub analysis: AnalysisOptions,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        Grid1D::new(self.length, self.n).map_err(|e| ConfigError::field("grid", e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(None, "file", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let InitialCondition::File { path: p } = &mut cfg.initial {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Document::parse(text)?;
        let mut params = ModelParams { r: 0.0, d: 0.0, a: 0.0, c: 0.0, m: 0.0, p: 0.0, q: 0.0, k: 0.0, d1: 0.0, d2: 0.0 };
        for name in ModelParams::NAMES {
            let (line, raw) =
                doc.take("model", name).ok_or_else(|| ConfigError::field(format!("model.{name}"), "missing required key"))?;
            let value = parse_f64(&raw, line, "model", name)?;
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::new(Some(line), format!("model.{name}"), format!("must be finite and > 0, got {value}")));
            }
            params.set(name, value);
        }

        let length = doc.f64_or("grid", "L", PI)?;
        let n = doc.usize_or("grid", "n", 256)?;

        let defaults = SolverConfig::default();
        let scheme = match doc.take("solver", "scheme") {
            None => defaults.scheme,
            Some((line, v)) => match v.as_str() {
                "imex" => Scheme::Imex,
                "explicit" => Scheme::Explicit,
                other => return Err(ConfigError::new(Some(line), "solver.scheme", format!("expected imex or explicit, got `{other}`"))),
            },
        };
        let positivity_mode = match doc.take("solver", "positivity_mode") {
            None => defaults.positivity_mode,
            Some((line, v)) => match v.as_str() {
                "reject" => PositivityMode::Reject,
                "halve-dt" => PositivityMode::HalveDt,
                other => {
                    return Err(ConfigError::new(Some(line), "solver.positivity_mode", format!("expected reject or halve-dt, got `{other}`")))
                }
            },
        };
        let solver = SolverConfig {
            dt: doc.f64_or("solver", "dt", defaults.dt)?,
            t_end: doc.f64_or("solver", "t_end", defaults.t_end)?,
            scheme,
            snapshot_stride: doc.usize_or("solver", "snapshot_stride", defaults.snapshot_stride)?,
            steady_tol: doc.f64_or("solver", "steady_tol", defaults.steady_tol)?,
            positivity_mode,
        };

        let initial = match doc.take("initial", "kind") {
            None => InitialCondition::EquilibriumCosine { amp_u: 0.01, freq_u: 0.5, amp_v: 0.01, freq_v: 1.0 },
            Some((line, kind)) => match kind.as_str() {
                "constant" => InitialCondition::Constant { u: doc.required_f64("initial", "u")?, v: doc.required_f64("initial", "v")? },
                "equilibrium-cosine" => InitialCondition::EquilibriumCosine {
                    amp_u: doc.f64_or("initial", "amp_u", 0.0)?,
                    freq_u: doc.f64_or("initial", "freq_u", 0.0)?,
                    amp_v: doc.f64_or("initial", "amp_v", 0.0)?,
                    freq_v: doc.f64_or("initial", "freq_v", 0.0)?,
                },
                "file" => InitialCondition::File { path: PathBuf::from(doc.required_str("initial", "path")?) },
                other => {
                    return Err(ConfigError::new(
                        Some(line),
                        "initial.kind",
                        format!("expected constant, equilibrium-cosine or file, got `{other}`"),
                    ))
                }
            },
        };

        let analysis = AnalysisOptions {
            n_modes: doc.usize_or("analysis", "n_modes", 20)?,
            mu_lower: doc.optional_f64("analysis", "mu_lower")?,
            poincare_const: doc.optional_f64("analysis", "poincare_const")?,
        };
        let name = doc.take("output", "name").map_or_else(|| "run".to_string(), |(_, v)| v);
        let output_dir = doc.take("output", "dir").map(|(_, v)| PathBuf::from(v));
        doc.finish()?;

        let cfg = Self { name, params, length, n, solver, initial, analysis, output_dir };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(ConfigError::field("output.name", "must be a non-empty plain file name"));
        }
        let grid = self.grid()?;
        self.solver
            .validate(&grid, self.params.d1, self.params.d2)
            .map_err(|e| ConfigError::field("solver", e.to_string()))?;
        if self.analysis.n_modes == 0 {
            return Err(ConfigError::field("analysis.n_modes", "must be >= 1"));
        }
        match &self.initial {
            InitialCondition::Constant { u, v } if !(*u >= 0.0 && *v >= 0.0) || (*u == 0.0 && *v == 0.0) => {
                Err(ConfigError::field("initial", "constant data must be nonnegative and not identically zero"))
            }
            _ => Ok(()),
        }
    }

    /// Canonical text form; `parse(to_ini(c)) == c`.
    pub fn to_ini(&self) -> String {
        let mut s = self.body_ini();
        s.push_str("\n[output]\n");
        writeln!(s, "name = {}", self.name).unwrap();
        if let Some(dir) = &self.output_dir {
            writeln!(s, "dir = {}", dir.display()).unwrap();
        }
        s
    }

    /// Everything except `[output]`.
    fn body_ini(&self) -> String {
        let mut s = String::new();
        s.push_str("[model]\n");
        for name in ModelParams::NAMES {
            writeln!(s, "{name} = {}", self.params.get(name).unwrap()).unwrap();
        }
        writeln!(s, "\n[grid]\nL = {}\nn = {}", self.length, self.n).unwrap();
        let sc = &self.solver;
        let scheme = match sc.scheme {
            Scheme::Imex => "imex",
            Scheme::Explicit => "explicit",
        };
        let mode = match sc.positivity_mode {
            PositivityMode::Reject => "reject",
            PositivityMode::HalveDt => "halve-dt",
        };
        writeln!(
            s,
            "\n[solver]\ndt = {}\nt_end = {}\nscheme = {scheme}\nsnapshot_stride = {}\nsteady_tol = {}\npositivity_mode = {mode}",
            sc.dt, sc.t_end, sc.snapshot_stride, sc.steady_tol
        )
        .unwrap();
        s.push_str("\n[initial]\n");
        match &self.initial {
            InitialCondition::Constant { u, v } => writeln!(s, "kind = constant\nu = {u}\nv = {v}").unwrap(),
            InitialCondition::EquilibriumCosine { amp_u, freq_u, amp_v, freq_v } => writeln!(
                s,
                "kind = equilibrium-cosine\namp_u = {amp_u}\nfreq_u = {freq_u}\namp_v = {amp_v}\nfreq_v = {freq_v}"
            )
            .unwrap(),
            InitialCondition::File { path } => writeln!(s, "kind = file\npath = {}", path.display()).unwrap(),
        }
        writeln!(s, "\n[analysis]\nn_modes = {}", self.analysis.n_modes).unwrap();
        if let Some(mu) = self.analysis.mu_lower {
            writeln!(s, "mu_lower = {mu}").unwrap();
        }
        if let Some(cp) = self.analysis.poincare_const {
            writeln!(s, "poincare_const = {cp}").unwrap();
        }
        s
    }

    /// SHA-256 of the canonical form without the `[output]` section.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.body_ini().as_bytes()))
    }
}

/// Parsed `[section] key = value` pairs with line numbers; keys are removed
/// as they are consumed so leftovers can be reported.
pub(crate) struct Document {
    entries: BTreeMap<(String, String), (usize, String)>,
}

impl Document {
    pub(crate) fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(Some(line_no), "section", format!("unterminated header `{line}`")))?;
                section = Some(name.trim().to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(Some(line_no), "syntax", format!("expected `key = value`, got `{line}`")))?;
            let sec = section
                .clone()
                .ok_or_else(|| ConfigError::new(Some(line_no), key.trim(), "key outside of any [section]"))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::new(Some(line_no), "syntax", "empty key"));
            }
            if let Some((first, _)) = entries.insert((sec.clone(), key.clone()), (line_no, value.trim().to_string())) {
                return Err(ConfigError::new(Some(line_no), format!("{sec}.{key}"), format!("duplicate key (first on line {first})")));
            }
        }
        Ok(Self { entries })
    }

    pub(crate) fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    pub(crate) fn required_str(&mut self, section: &str, key: &str) -> Result<String, ConfigError> {
        self.take(section, key)
            .map(|(_, v)| v)
            .ok_or_else(|| ConfigError::new(None, format!("{section}.{key}"), "missing required key"))
    }

    pub(crate) fn optional_f64(&mut self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        self.take(section, key).map(|(line, v)| parse_f64(&v, line, section, key)).transpose()
    }

    pub(crate) fn required_f64(&mut self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.optional_f64(section, key)?
            .ok_or_else(|| ConfigError::new(None, format!("{section}.{key}"), "missing required key"))
    }

    pub(crate) fn f64_or(&mut self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.optional_f64(section, key)?.unwrap_or(default))
    }

    pub(crate) fn usize_or(&mut self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(section, key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| ConfigError::new(Some(line), format!("{section}.{key}"), format!("expected a nonnegative integer, got `{v}`"))),
        }
    }

    /// Errors on any key that was never consumed.
    pub(crate) fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some(((sec, key), (line, _))) => Err(ConfigError::new(Some(line), format!("{sec}.{key}"), "unknown key")),
        }
    }
}

/// Accepts plain floats plus `pi` and `<x>*pi`.
pub(crate) fn parse_f64(text: &str, line: usize, section: &str, key: &str) -> Result<f64, ConfigError> {
    let value = if text == "pi" {
        Some(PI)
    } else if let Some(factor) = text.strip_suffix("*pi") {
        factor.trim().parse::<f64>().ok().map(|f| f * PI)
    } else {
        text.parse::<f64>().ok()
    };
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::new(Some(line), format!("{section}.{key}"), format!("expected a finite number, got `{text}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample
[model]
r = 2
d = 0.5
a = 0.3
c = 2
m = 1
p = 1
q = 1
k = 0.4
d1 = 0.01
d2 = 0.5

[grid]
L = pi
n = 64

[solver]
dt = 0.01
t_end = 5
snapshot_stride = 10

[output]
name = sample
";

    #[test]
    fn parses_with_defaults() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.params.k, 0.4);
        assert_eq!(cfg.length, PI);
        assert_eq!(cfg.solver.scheme, Scheme::Imex);
        assert_eq!(cfg.name, "sample");
        assert!(matches!(cfg.initial, InitialCondition::EquilibriumCosine { .. }));
    }

    #[test]
    fn round_trip_keeps_hash() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        let again = RunConfig::parse(&cfg.to_ini()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn output_section_does_not_change_hash() {
        let a = RunConfig::parse(SAMPLE).unwrap();
        let b = RunConfig::parse(&SAMPLE.replace("name = sample", "name = other\ndir = /tmp/x")).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse(&SAMPLE.replace("k = 0.4", "k = 0.41")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn diagnostics_carry_line_and_field() {
        let err = RunConfig::parse(&SAMPLE.replace("a = 0.3", "a = abc")).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert_eq!(err.field, "model.a");
        let err = RunConfig::parse(&SAMPLE.replace("k = 0.4\n", "")).unwrap_err();
        assert_eq!(err.field, "model.k");
        let err = RunConfig::parse(&SAMPLE.replace("n = 64", "n = 64\nbogus = 1")).unwrap_err();
        assert_eq!(err.field, "grid.bogus");
        let err = RunConfig::parse(&SAMPLE.replace("n = 64", "n = 64\nn = 32")).unwrap_err();
        assert!(err.message.contains("duplicate"));
        assert!(RunConfig::parse(&SAMPLE.replace("n = 64", "n = 8")).is_err());
        assert!(RunConfig::parse(&SAMPLE.replace("d1 = 0.01", "d1 = -1")).is_err());
        assert!(RunConfig::parse("r = 1").is_err());
    }

    #[test]
    fn pi_multiples() {
        assert_eq!(parse_f64("2*pi", 1, "grid", "L").unwrap(), 2.0 * PI);
        assert!(parse_f64("inf", 1, "grid", "L").is_err());
    }
}
