//! Linear stability of the coexistence state under diffusion.
//!
//! For a Neumann eigenvalue mu of -Laplacian, the linearized operator on that
//! eigenspace has determinant H(mu) / (d1 d2), where
//!
//! ```text
//! H(d1, d2; mu) = d1 d2 mu^2 + (Q d1 - M d2) mu + PN - MQ.
//! ```
//!
//! Modes with H(mu_i) < 0 are unstable. The index parity gamma counts them
//! (with multiplicity); an odd gamma together with M/d1 in (mu_j, mu_{j+1}),
//! j >= 1, is the hypothesis set for nonconstant steady states at large d2.
//!
//! For large equal-ish diffusion (d* <= d1 <= d2) no nonconstant solution
//! exists; [`nonexistence_threshold`] evaluates the explicit d*.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::equilibria::{constant_equilibria, solve_coexistence, Equilibrium, EquilibriumKind, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::model::{jacobian_at, JacobianEntries, ModelParams};

/// Relative distance below which an eigenvalue is treated as sitting on a
/// window endpoint (and excluded from the open window).
pub const TIE_TOL: f64 = 1e-12;

/// Default Harnack-type constant used for the heuristic uniform lower bound
/// mu_lower = m / (C* c p).
pub const DEFAULT_HARNACK_CONST: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub index: usize,
    pub mu: f64,
    pub multiplicity: usize,
}

/// Neumann eigenvalues of -d^2/dx^2 on (0, L): mu_i = (i pi / L)^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub domain_length: f64,
    pub modes: Vec<Mode>,
}

impl Spectrum {
    pub fn eigenvalue(length: f64, index: usize) -> f64 {
        let w = index as f64 * PI / length;
        w * w
    }

    pub fn mus(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.mu).collect()
    }
}

/// The first `n_modes + 1` eigenvalues (index 0 through `n_modes`).
pub fn spectrum(length: f64, n_modes: usize) -> Result<Spectrum> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidParameter { name: "L", reason: format!("must be > 0, got {length}") });
    }
    if n_modes == 0 {
        return Err(Error::InvalidParameter { name: "n_modes", reason: "must be >= 1".into() });
    }
    let modes = (0..=n_modes)
        .map(|index| Mode { index, mu: Spectrum::eigenvalue(length, index), multiplicity: 1 })
        .collect();
    Ok(Spectrum { domain_length: length, modes })
}

/// Poincare-Wirtinger constant on (0, L): the inverse first nonzero eigenvalue.
pub fn poincare_constant(length: f64) -> f64 {
    1.0 / Spectrum::eigenvalue(length, 1)
}

pub(crate) fn h_value(e: &JacobianEntries, d1: f64, d2: f64, mu: f64) -> f64 {
    d1 * d2 * mu * mu + (e.predator_self * d1 - e.prey_self * d2) * mu + e.kinetic_det()
}

/// A_i = mu I - diag(1/d1, 1/d2) J, whose determinant is H(mu) / (d1 d2).
pub fn mode_matrix(e: &JacobianEntries, d1: f64, d2: f64, mu: f64) -> [[f64; 2]; 2] {
    [
        [mu - e.prey_self / d1, e.prey_by_predator / d1],
        [-e.predator_by_prey / d2, mu + e.predator_self / d2],
    ]
}

fn coexistence_entries(params: &ModelParams, eq: &Equilibrium) -> Result<JacobianEntries> {
    if eq.kind != EquilibriumKind::Coexistence {
        return Err(Error::Domain(format!(
            "dispersion analysis needs the coexistence equilibrium, got {:?}",
            eq.kind
        )));
    }
    jacobian_at(params, eq.u_star, eq.v_star)
}

/// H(d1, d2; mu) at the coexistence equilibrium.
pub fn dispersion_h(params: &ModelParams, eq: &Equilibrium, mu: f64) -> Result<f64> {
    let entries = coexistence_entries(params, eq)?;
    Ok(h_value(&entries, params.d1, params.d2, mu))
}

/// |M d2 - Q d1| > 2 sqrt(d1 d2 (PN - MQ)); false when PN - MQ < 0.
pub fn condition_two_real_roots(e: &JacobianEntries, d1: f64, d2: f64) -> bool {
    let det = e.kinetic_det();
    det >= 0.0 && (e.prey_self * d2 - e.predator_self * d1).abs() > 2.0 * (d1 * d2 * det).sqrt()
}

fn window_from_entries(e: &JacobianEntries, d1: f64, d2: f64) -> Option<(f64, f64)> {
    let b = e.prey_self * d2 - e.predator_self * d1;
    let det = e.kinetic_det();
    let disc = b * b - 4.0 * d1 * d2 * det;
    if !(b > 0.0 && disc > 0.0) {
        return None;
    }
    let plus = (b + disc.sqrt()) / (2.0 * d1 * d2);
    // Vieta: mu_- mu_+ = det / (d1 d2); avoids cancellation in b - sqrt(disc).
    let minus = det / (d1 * d2 * plus);
    Some((minus, plus))
}

/// The open window (mu_-, mu_+) where H < 0, when it exists on the positive
/// half-line. mu_- is negative only for a saddle equilibrium (PN < MQ).
pub fn mode_window(params: &ModelParams, eq: &Equilibrium) -> Option<(f64, f64)> {
    let entries = coexistence_entries(params, eq).ok()?;
    window_from_entries(&entries, params.d1, params.d2)
}

fn inside_open(mu: f64, lo: f64, hi: f64) -> bool {
    let tie = |edge: f64| (mu - edge).abs() <= TIE_TOL * edge.abs().max(f64::MIN_POSITIVE);
    mu > lo && mu < hi && !tie(lo) && !tie(hi)
}

/// Linear stability summary at the coexistence equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub equilibrium: Equilibrium,
    pub entries: JacobianEntries,
    pub d1: f64,
    pub d2: f64,
    pub domain_length: f64,
    /// Trace M - Q < 0 and determinant PN - MQ > 0 of the reaction Jacobian.
    pub kinetically_stable: bool,
    pub two_real_roots: bool,
    pub mu_minus: Option<f64>,
    pub mu_plus: Option<f64>,
    pub unstable_modes: Vec<Mode>,
    pub gamma: usize,
    pub m_over_d1: f64,
    /// j with M/d1 strictly inside (mu_j, mu_{j+1}).
    pub interval_index: Option<usize>,
    /// Sum of multiplicities of mu_1..mu_j.
    pub gamma_j: Option<usize>,
    /// Practical surrogate: some spectrum eigenvalue has H(mu_i) < 0.
    pub some_mode_unstable: bool,
    pub pattern_predicted: bool,
    pub spectrum: Spectrum,
}

impl DispersionReport {
    pub fn unstable_indices(&self) -> Vec<usize> {
        self.unstable_modes.iter().map(|m| m.index).collect()
    }
}

/// Full dispersion analysis on (0, L). The spectrum covers at least
/// `n_modes` and is extended past mu_+ and M/d1 so the mode count is never
/// truncated.
pub fn analyze(params: &ModelParams, length: f64, n_modes: usize) -> Result<DispersionReport> {
    params.validate()?;
    let eq = solve_coexistence(params, DEFAULT_ROOT_TOL)?;
    let entries = coexistence_entries(params, &eq)?;
    let (d1, d2) = (params.d1, params.d2);
    let window = window_from_entries(&entries, d1, d2);
    let m_over_d1 = entries.prey_self / d1;

    let reach = window.map_or(0.0, |(_, hi)| hi).max(m_over_d1).max(0.0);
    let needed = (length * reach.sqrt() / PI).ceil() as usize + 1;
    let spec = spectrum(length, n_modes.max(needed))?;

    let unstable_modes: Vec<Mode> = match window {
        Some((lo, hi)) => spec.modes.iter().copied().filter(|m| inside_open(m.mu, lo, hi)).collect(),
        None => Vec::new(),
    };
    let gamma = unstable_modes.iter().map(|m| m.multiplicity).sum();

    let interval_index = spec
        .modes
        .windows(2)
        .find(|w| inside_open(m_over_d1, w[0].mu, w[1].mu))
        .map(|w| w[0].index);
    let gamma_j = interval_index.map(|j| spec.modes[1..=j].iter().map(|m| m.multiplicity).sum());

    let condition = condition_two_real_roots(&entries, d1, d2);
    let some_mode_unstable = spec.modes.iter().any(|m| h_value(&entries, d1, d2, m.mu) < 0.0);
    let pattern_predicted = entries.prey_self > 0.0
        && condition
        && gamma % 2 == 1
        && interval_index.is_some_and(|j| j >= 1);

    Ok(DispersionReport {
        equilibrium: eq,
        entries,
        d1,
        d2,
        domain_length: length,
        kinetically_stable: entries.prey_self - entries.predator_self < 0.0 && entries.kinetic_det() > 0.0,
        two_real_roots: condition,
        mu_minus: window.map(|w| w.0),
        mu_plus: window.map(|w| w.1),
        unstable_modes,
        gamma,
        m_over_d1,
        interval_index,
        gamma_j,
        some_mode_unstable,
        pattern_predicted,
        spectrum: spec,
    })
}

/// Explicit large-diffusion nonexistence threshold d*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonexistenceReport {
    pub chi: f64,
    /// Uniform lower bound for u; a configured input, not derived.
    pub mu_lower: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
    pub poincare_const: f64,
    pub d_star: f64,
}

/// Heuristic default for the uniform lower bound: m / (C* c p) with C* = 10.
pub fn default_mu_lower(params: &ModelParams) -> f64 {
    params.m / (DEFAULT_HARNACK_CONST * params.c * params.p)
}

pub fn nonexistence_threshold(params: &ModelParams, mu_lower: f64, poincare_const: f64) -> Result<NonexistenceReport> {
    let ModelParams { r, d, a, c, m, p, q, k, .. } = *params;
    if r <= d {
        return Err(Error::NoPositiveChi { r, d });
    }
    let cap = m / (c * p);
    if !(mu_lower > 0.0 && mu_lower < cap) {
        return Err(Error::InvalidParameter {
            name: "mu_lower",
            reason: format!("must lie in (0, m/(cp) = {cap}), got {mu_lower}"),
        });
    }
    if !(poincare_const > 0.0 && poincare_const.is_finite()) {
        return Err(Error::InvalidParameter { name: "C_p", reason: format!("must be > 0, got {poincare_const}") });
    }
    let chi = (r - d) / a;
    // Bound on v: c (r + m) chi / m.
    let v_bound = c * (r + m) * chi / m;
    let half_cross = (r * k + p * (1.0 + q * chi)) / 2.0;
    let c1 = half_cross + c * p * q * (r + m) * chi / m - a;
    let c2 = half_cross;
    let c3 = c * c * p * (r + m) * chi / (2.0 * m) * (1.0 + v_bound);
    let c4 = c * p * (chi * (1.0 + q * chi) + v_bound / 2.0) * (1.0 + v_bound);
    let floor = |x: f64| x.max(0.0);
    let d_star = (chi * chi * poincare_const * (floor(c1) + floor(c3)) / mu_lower)
        .max(poincare_const * (floor(c2) + floor(c4)));
    Ok(NonexistenceReport { chi, mu_lower, c1, c2, c3, c4, poincare_const, d_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PatternPredicted,
    NoPatternPredicted,
    NoCoexistence,
}

/// Everything the `analyze` command reports.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub params: ModelParams,
    pub equilibria: Vec<Equilibrium>,
    pub dispersion: Option<DispersionReport>,
    pub nonexistence: Option<NonexistenceReport>,
    pub hypothesis_failure: Option<String>,
    pub verdict: Verdict,
}

impl AnalysisReport {
    /// `mu_lower` and `poincare_const` default to [`default_mu_lower`] and the
    /// Poincare constant of (0, L).
    pub fn build(
        params: &ModelParams,
        length: f64,
        n_modes: usize,
        mu_lower: Option<f64>,
        poincare_const: Option<f64>,
    ) -> Result<Self> {
        params.validate()?;
        let equilibria = constant_equilibria(params);
        let (dispersion, hypothesis_failure) = match analyze(params, length, n_modes) {
            Ok(report) => (Some(report), None),
            Err(e) if e.is_hypothesis_failure() => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        let nonexistence = if params.r > params.d {
            let mu = mu_lower.unwrap_or_else(|| default_mu_lower(params));
            let cp = poincare_const.unwrap_or_else(|| poincare_constant(length));
            Some(nonexistence_threshold(params, mu, cp)?)
        } else {
            None
        };
        let verdict = match &dispersion {
            None => Verdict::NoCoexistence,
            Some(d) if d.pattern_predicted => Verdict::PatternPredicted,
            Some(_) => Verdict::NoPatternPredicted,
        };
        Ok(Self { params: *params, equilibria, dispersion, nonexistence, hypothesis_failure, verdict })
    }

    /// Machine-readable form. Top-level keys include `entries` (M, N, P, Q),
    /// `mu_minus`, `mu_plus`, `unstable_modes`, `gamma`, `pattern_predicted`
    /// and `d_star`; absent quantities are `null`.
    pub fn to_json(&self) -> Value {
        let mut map = match &self.dispersion {
            Some(d) => match serde_json::to_value(d).expect("serializable") {
                Value::Object(m) => m,
                _ => unreachable!(),
            },
            None => {
                let mut m = Map::new();
                for key in ["entries", "mu_minus", "mu_plus", "equilibrium"] {
                    m.insert(key.into(), Value::Null);
                }
                m.insert("unstable_modes".into(), json!([]));
                m.insert("gamma".into(), json!(0));
                m.insert("pattern_predicted".into(), json!(false));
                m.insert("two_real_roots".into(), json!(false));
                m
            }
        };
        map.insert("d_star".into(), json!(self.nonexistence.map(|n| n.d_star)));
        map.insert("nonexistence".into(), serde_json::to_value(self.nonexistence).expect("serializable"));
        map.insert("constant_equilibria".into(), serde_json::to_value(&self.equilibria).expect("serializable"));
        map.insert("params".into(), serde_json::to_value(self.params).expect("serializable"));
        map.insert("hypothesis_failure".into(), json!(self.hypothesis_failure));
        map.insert("verdict".into(), serde_json::to_value(self.verdict).expect("serializable"));
        Value::Object(map)
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |v| format!("{v:.6}"))
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "constant equilibria:")?;
        for eq in &self.equilibria {
            writeln!(f, "  {:<13} u = {:.5}  v = {:.5}  residual = {:.2e}", format!("{:?}", eq.kind), eq.u_star, eq.v_star, eq.residual)?;
        }
        match &self.dispersion {
            Some(d) => {
                let e = &d.entries;
                writeln!(f, "linearization at coexistence state:")?;
                writeln!(f, "  M = {:.6e}  N = {:.6e}  P = {:.6e}  Q = {:.6e}", e.prey_self, e.prey_by_predator, e.predator_by_prey, e.predator_self)?;
                writeln!(f, "  kinetically stable: {}", d.kinetically_stable)?;
                writeln!(f, "  M/d1 = {:.4}  interval index j = {}", d.m_over_d1, d.interval_index.map_or("none".into(), |j| j.to_string()))?;
                writeln!(f, "  two real roots condition: {}", d.two_real_roots)?;
                writeln!(f, "  mode window: ({}, {})", fmt_opt(d.mu_minus), fmt_opt(d.mu_plus))?;
                let idx: Vec<String> = d.unstable_modes.iter().map(|m| format!("mu_{}={}", m.index, m.mu)).collect();
                writeln!(f, "  unstable modes: [{}]  gamma = {} ({})", idx.join(", "), d.gamma, if d.gamma % 2 == 1 { "odd" } else { "even" })?;
                writeln!(f, "  some H(mu_i) < 0: {}", d.some_mode_unstable)?;
                writeln!(f, "  pattern predicted: {}", d.pattern_predicted)?;
            }
            None => {
                writeln!(f, "no coexistence equilibrium: {}", self.hypothesis_failure.as_deref().unwrap_or("hypotheses fail"))?;
            }
        }
        if let Some(n) = &self.nonexistence {
            writeln!(f, "large-diffusion nonexistence threshold:")?;
            writeln!(f, "  chi = {:.6}  mu_lower = {:.6e} (configured)  C_p = {:.6}", n.chi, n.mu_lower, n.poincare_const)?;
            writeln!(f, "  C1 = {:.6e}  C2 = {:.6e}  C3 = {:.6e}  C4 = {:.6e}", n.c1, n.c2, n.c3, n.c4)?;
            writeln!(f, "  d* = {:.6e}", n.d_star)?;
        }
        write!(f, "verdict: {}", serde_json::to_value(self.verdict).expect("serializable").as_str().unwrap_or(""))
    }
}
