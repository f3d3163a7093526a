//! Constant steady states.
//!
//! Besides the trivial state (0, 0) and the predator-free state (chi, 0), a
//! positive constant state exists iff cp > mq and r > d + a*lambda. On that
//! branch the predator equation forces u = lambda (v + 1); substituting into the
//! prey equation and clearing the denominators (1 + kv)(1 + v) leaves the cubic
//!
//! ```text
//! F(v) = alpha1 v^3 - alpha2 v^2 - alpha3 v - alpha4
//! ```
//!
//! with F(0) = -alpha4 < 0 and alpha1 > 0, so a positive root exists, and it is
//! unique because F' has at most one positive zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{reaction, ModelParams};

/// Default relative tolerance on v for the coexistence root.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const MAX_NEWTON_ITERS: usize = 20;
const MAX_BISECTIONS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
}

impl CubicCoeffs {
    /// F(v).
    pub fn eval(&self, v: f64) -> f64 {
        ((self.alpha1 * v - self.alpha2) * v - self.alpha3) * v - self.alpha4
    }

    /// F'(v) = 3 alpha1 v^2 - 2 alpha2 v - alpha3.
    pub fn derivative(&self, v: f64) -> f64 {
        (3.0 * self.alpha1 * v - 2.0 * self.alpha2) * v - self.alpha3
    }

    /// Coefficients of F in standard form, highest degree first.
    pub fn standard_form(&self) -> [f64; 4] {
        [self.alpha1, -self.alpha2, -self.alpha3, -self.alpha4]
    }

    /// Positive zero of F', if any.
    pub fn derivative_positive_root(&self) -> Option<f64> {
        let disc = 4.0 * self.alpha2 * self.alpha2 + 12.0 * self.alpha1 * self.alpha3;
        if disc < 0.0 {
            return None;
        }
        let root = (2.0 * self.alpha2 + disc.sqrt()) / (6.0 * self.alpha1);
        (root > 0.0).then_some(root)
    }
}

/// Number of sign changes in a coefficient sequence, zeros skipped.
pub fn sign_changes(coeffs: &[f64]) -> usize {
    coeffs
        .iter()
        .filter(|c| **c != 0.0)
        .map(|c| c.is_sign_positive())
        .collect::<Vec<_>>()
        .windows(2)
        .filter(|w| w[0] != w[1])
        .count()
}

pub fn cubic_coeffs(params: &ModelParams) -> Result<CubicCoeffs> {
    let ModelParams { r, d, a, c, m, p, q, k, .. } = *params;
    let lambda = params.lambda().ok_or(Error::NoCoexistenceStructure { cp: c * p, mq: m * q })?;
    let al = a * lambda;
    let capture = p / (1.0 + q * lambda);
    Ok(CubicCoeffs {
        lambda,
        alpha1: al * k,
        alpha2: -capture * k - (al * (1.0 + 2.0 * k) + k * d),
        // The v-coefficient also collects -a*lambda from the (1 + v) factor.
        alpha3: r - capture - (al + d) * (1.0 + k) - al,
        alpha4: r - (d + al),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    Trivial,
    SemiTrivial,
    Coexistence,
}

/// A constant steady state with the max-norm of the reaction rates there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub u_star: f64,
    pub v_star: f64,
    pub residual: f64,
}

impl Equilibrium {
    fn at(params: &ModelParams, kind: EquilibriumKind, u: f64, v: f64) -> Self {
        let rates = reaction(params, u, v).expect("equilibria are nonnegative");
        Self {
            kind,
            u_star: u,
            v_star: v,
            residual: rates.prey.abs().max(rates.predator.abs()),
        }
    }
}

/// Checks cp > mq and r > d + a*lambda; returns the cubic on success.
pub fn coexistence_hypotheses(params: &ModelParams) -> Result<CubicCoeffs> {
    let coeffs = cubic_coeffs(params)?;
    if coeffs.alpha4 <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "r > d + a*lambda fails: r = {}, d + a*lambda = {}",
            params.r,
            params.d + params.a * coeffs.lambda
        )));
    }
    Ok(coeffs)
}

/// The unique positive constant equilibrium, by bracketing, bisection to `tol`
/// (relative, on v) and a short Newton polish.
pub fn solve_coexistence(params: &ModelParams, tol: f64) -> Result<Equilibrium> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("must lie in (0, 1), got {tol}") });
    }
    let cubic = coexistence_hypotheses(params)?;

    let mut hi = 1.0;
    while cubic.eval(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::RootBracket("no sign change of F found on (0, inf)".into()));
        }
    }
    let mut lo = 0.0;
    let mut iters = 0;
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || iters > MAX_BISECTIONS {
            break;
        }
        if cubic.eval(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    let bisected = 0.5 * (lo + hi);

    let mut v = bisected;
    for _ in 0..MAX_NEWTON_ITERS {
        let slope = cubic.derivative(v);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = v - cubic.eval(v) / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        let done = (next - v).abs() <= 4.0 * f64::EPSILON * v;
        v = next;
        if done {
            break;
        }
    }
    if cubic.eval(v).abs() > cubic.eval(bisected).abs() {
        v = bisected;
    }

    let u = cubic.lambda * (v + 1.0);
    Ok(Equilibrium::at(params, EquilibriumKind::Coexistence, u, v))
}

/// All nonnegative constant equilibria: always (0, 0); (chi, 0) iff r > d; the
/// coexistence state iff its hypotheses hold.
pub fn constant_equilibria(params: &ModelParams) -> Vec<Equilibrium> {
    let mut out = vec![Equilibrium::at(params, EquilibriumKind::Trivial, 0.0, 0.0)];
    if params.r > params.d {
        out.push(Equilibrium::at(params, EquilibriumKind::SemiTrivial, params.chi(), 0.0));
    }
    if let Ok(eq) = solve_coexistence(params, DEFAULT_ROOT_TOL) {
        out.push(eq);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ModelParams {
        ModelParams::new(2.0, 0.5, 0.3, 2.0, 1.0, 1.0, 1.0, 0.4, 0.01, 0.5).unwrap()
    }

    #[test]
    fn lambda_example() {
        let coeffs = cubic_coeffs(&base()).unwrap();
        assert_eq!(coeffs.lambda, 1.0);
        assert_eq!(coeffs.eval(0.0), -coeffs.alpha4);
        assert!(coeffs.alpha4 > 0.0);
        assert!(coeffs.alpha1 > 0.0 && coeffs.alpha2 < 0.0);
    }

    #[test]
    fn cubic_matches_direct_substitution() {
        let params = base();
        let coeffs = cubic_coeffs(&params).unwrap();
        let ModelParams { r, d, a, p, q, k, .. } = params;
        for i in 0..200 {
            let v = 0.05 * i as f64;
            let u = coeffs.lambda * (v + 1.0);
            let prey_eq = r / (1.0 + k * v) - d - a * u - p * v / (1.0 + q * u + v);
            let substituted = -(1.0 + k * v) * (1.0 + v) * prey_eq;
            let f = coeffs.eval(v);
            assert!((f - substituted).abs() <= 1e-12 * f.abs().max(1.0), "v={v}: {f} vs {substituted}");
        }
    }

    #[test]
    fn no_structure_when_cp_le_mq() {
        let mut params = base();
        params.c = 1.0; // cp = mq = 1
        assert!(matches!(cubic_coeffs(&params), Err(Error::NoCoexistenceStructure { .. })));
        assert!(solve_coexistence(&params, 1e-12).unwrap_err().is_hypothesis_failure());
    }

    #[test]
    fn boundary_r_equals_d_plus_a_lambda_is_a_failure() {
        let mut params = base();
        params.r = params.d + params.a * 1.0;
        assert!(matches!(solve_coexistence(&params, 1e-12), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn coexistence_state_is_a_zero_of_the_kinetics() {
        let params = base();
        let eq = solve_coexistence(&params, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(eq.kind, EquilibriumKind::Coexistence);
        assert!(eq.u_star > 0.0 && eq.v_star > 0.0);
        assert!(eq.residual < 1e-9);
        let lambda = params.lambda().unwrap();
        assert!((eq.u_star - lambda * (eq.v_star + 1.0)).abs() <= 1e-10 * eq.u_star);
        let coarse = solve_coexistence(&params, 1e-11).unwrap();
        assert!((coarse.v_star - eq.v_star).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_lists() {
        let mut params = base();
        params.r = 0.9 * params.d;
        let eqs = constant_equilibria(&params);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].kind, EquilibriumKind::Trivial);

        let mut params = base();
        params.m = params.c * params.p * params.chi() + 0.1;
        let eqs = constant_equilibria(&params);
        let kinds: Vec<_> = eqs.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EquilibriumKind::Trivial, EquilibriumKind::SemiTrivial]);

        assert_eq!(constant_equilibria(&base()).len(), 3);
    }

    #[test]
    fn sign_change_count() {
        assert_eq!(sign_changes(&[1.0, 2.0, -1.0, -3.0]), 1);
        assert_eq!(sign_changes(&[1.0, 0.0, -1.0, 2.0]), 2);
        assert_eq!(sign_changes(&[-1.0]), 0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(solve_coexistence(&base(), 0.0).is_err());
    }
}
