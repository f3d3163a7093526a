//! Spatially homogeneous comparison system.
//!
//! Dropping predation from the prey equation and the fear factor gives the
//! logistic upper solution u' = u(r - d - a u), with closed form u*(t). The
//! predator is then forced by v' = v(-m + c p u).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Fixed RK4 step used for oracle integration.
pub const RK4_DT: f64 = 1e-4;

/// Trajectory samples are kept every this many RK4 steps.
const SAMPLE_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub r: f64,
    pub d: f64,
    pub a: f64,
    pub u0_star: f64,
}

impl LogisticParams {
    pub fn new(r: f64, d: f64, a: f64, u0_star: f64) -> Result<Self> {
        if !(u0_star > 0.0 && u0_star.is_finite()) {
            return Err(Error::InvalidParameter { name: "u0_star", reason: format!("must be > 0, got {u0_star}") });
        }
        if !(a > 0.0 && r.is_finite() && d.is_finite()) {
            return Err(Error::InvalidParameter { name: "a", reason: "a must be > 0 and rates finite".into() });
        }
        Ok(Self { r, d, a, u0_star })
    }

    pub fn from_params(params: &ModelParams, u0_star: f64) -> Result<Self> {
        Self::new(params.r, params.d, params.a, u0_star)
    }

    fn growth(&self) -> f64 {
        self.r - self.d
    }

    /// K = (r - d) u0 / (r - d - a u0); `None` when r = d or r - d = a u0.
    pub fn k(&self) -> Option<f64> {
        let s = self.growth();
        let denom = s - self.a * self.u0_star;
        (s != 0.0 && denom != 0.0).then(|| s * self.u0_star / denom)
    }

    /// K~ = a K / (r - d).
    pub fn k_tilde(&self) -> Option<f64> {
        self.k().map(|k| self.a * k / self.growth())
    }

    /// Long-time limit: chi when r > d, else 0.
    pub fn limit(&self) -> f64 {
        (self.growth() / self.a).max(0.0)
    }
}

/// Closed-form solution of u' = u(r - d - a u), u(0) = u0_star.
pub fn u_star(t: f64, lp: &LogisticParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t must be >= 0, got {t}")));
    }
    if !(lp.u0_star > 0.0) {
        return Err(Error::InvalidParameter { name: "u0_star", reason: format!("must be > 0, got {}", lp.u0_star) });
    }
    let s = lp.growth();
    let u0 = lp.u0_star;
    if s == 0.0 {
        return Ok(u0 / (1.0 + lp.a * t * u0));
    }
    let (Some(k), Some(kt)) = (lp.k(), lp.k_tilde()) else {
        // r - d = a u0: the start is the equilibrium chi.
        return Ok(u0);
    };
    Ok(if s > 0.0 {
        k / ((-s * t).exp() + kt)
    } else {
        let e = (s * t).exp();
        k * e / (1.0 + kt * e)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, f64, f64) {
        let i = self.t.len() - 1;
        (self.t[i], self.u[i], self.v[i])
    }
}

/// RK4 integration of u' = u(r - d - a u), v' = v(-m + c p u) with step
/// [`RK4_DT`], sampled every 0.01 time units and at `t_end`.
pub fn comparison_system(t_end: f64, params: &ModelParams, u0_star: f64, v0_star: f64) -> Result<Trajectory> {
    if !(u0_star > 0.0 && v0_star > 0.0) {
        return Err(Error::Domain(format!("initial values must be > 0, got ({u0_star}, {v0_star})")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    let ModelParams { r, d, a, c, m, p, .. } = *params;
    let f = |u: f64, v: f64| (u * (r - d - a * u), v * (-m + c * p * u));

    let steps = (t_end / RK4_DT).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    if steps > 0 && !(dt > 0.0) {
        return Err(Error::StepUnderflow { t: 0.0, dt });
    }
    let mut out = Trajectory { t: vec![0.0], u: vec![u0_star], v: vec![v0_star] };
    let (mut u, mut v) = (u0_star, v0_star);
    for i in 1..=steps {
        let (k1u, k1v) = f(u, v);
        let (k2u, k2v) = f(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v);
        let (k3u, k3v) = f(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v);
        let (k4u, k4v) = f(u + dt * k3u, v + dt * k3v);
        u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let t = i as f64 * dt;
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        if i % SAMPLE_EVERY == 0 || i == steps {
            out.t.push(t);
            out.u.push(u);
            out.v.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero() {
        let lp = LogisticParams::new(1.0, 1.0, 0.5, 0.7).unwrap();
        assert_eq!(u_star(0.0, &lp).unwrap(), 0.7);
        let lp = LogisticParams::new(2.0, 1.0, 0.5, 0.7).unwrap();
        assert!((u_star(0.0, &lp).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn long_time_limit_is_chi() {
        let lp = LogisticParams::new(1.5, 0.5, 0.25, 0.1).unwrap();
        let chi = 4.0;
        let t = 1e4 / (lp.r - lp.d);
        assert!((u_star(t, &lp).unwrap() - chi).abs() < 1e-8 * chi);
        let lp = LogisticParams::new(0.5, 1.5, 0.25, 3.0).unwrap();
        assert!(u_star(1e4, &lp).unwrap() < 1e-12);
        assert_eq!(lp.limit(), 0.0);
    }

    #[test]
    fn removable_singularity_returns_start() {
        let lp = LogisticParams::new(1.5, 0.5, 0.25, 4.0).unwrap();
        assert!(lp.k().is_none());
        assert_eq!(u_star(37.0, &lp).unwrap(), 4.0);
    }

    #[test]
    fn decaying_example_matches_rk4() {
        let params = ModelParams::new(0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0001, 1.0, 1.0).unwrap();
        let traj = comparison_system(10.0, &params, 1.0, 0.5).unwrap();
        let lp = LogisticParams::from_params(&params, 1.0).unwrap();
        let (t, u, _) = traj.last();
        assert!((t - 10.0).abs() < 1e-12);
        assert!((u - u_star(10.0, &lp).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn fixed_point_at_chi() {
        let params = ModelParams::new(2.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let traj = comparison_system(5.0, &params, params.chi(), 0.3).unwrap();
        assert!(traj.u.iter().all(|u| (u - params.chi()).abs() < 1e-10));
        assert!(traj.v.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(LogisticParams::new(1.0, 1.0, 1.0, 0.0).is_err());
        let lp = LogisticParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(u_star(-1.0, &lp).is_err());
        let params = ModelParams::new(2.0, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        assert!(comparison_system(1.0, &params, 0.0, 1.0).is_err());
    }
}
