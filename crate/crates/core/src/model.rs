//! Model parameters and pointwise kinetics.
//!
//! Prey `u` and predator `v` evolve by
//!
//! ```text
//! u_t - d1 u_xx = r u / (1 + k v) - d u - a u^2 - p u v / (1 + q u + v)
//! v_t - d2 v_xx = v (-m + c p u / (1 + q u + v))
//! ```
//!
//! The kinetics here reject negative densities instead of clamping them; keeping
//! the state nonnegative is the solver's responsibility.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ten positive model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Prey birth rate.
    pub r: f64,
    /// Prey natural death rate.
    pub d: f64,
    /// Intra-species competition death rate.
    pub a: f64,
    /// Conversion rate of prey biomass into predators.
    pub c: f64,
    /// Predator death rate.
    pub m: f64,
    /// Capture rate.
    pub p: f64,
    /// Handling / saturation coefficient.
    pub q: f64,
    /// Fear parameter.
    pub k: f64,
    /// Prey diffusivity.
    pub d1: f64,
    /// Predator diffusivity.
    pub d2: f64,
}

impl ModelParams {
    pub const NAMES: [&'static str; 10] = ["r", "d", "a", "c", "m", "p", "q", "k", "d1", "d2"];

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        d: f64,
        a: f64,
        c: f64,
        m: f64,
        p: f64,
        q: f64,
        k: f64,
        d1: f64,
        d2: f64,
    ) -> Result<Self> {
        let params = Self { r, d, a, c, m, p, q, k, d1, d2 };
        params.validate()?;
        Ok(params)
    }

    /// All ten constants must be finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        for name in Self::NAMES {
            let value = self.get(name).expect("known name");
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "r" => self.r,
            "d" => self.d,
            "a" => self.a,
            "c" => self.c,
            "m" => self.m,
            "p" => self.p,
            "q" => self.q,
            "k" => self.k,
            "d1" => self.d1,
            "d2" => self.d2,
            _ => return None,
        })
    }

    /// Sets a constant by name. Returns `false` for an unknown name.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "r" => &mut self.r,
            "d" => &mut self.d,
            "a" => &mut self.a,
            "c" => &mut self.c,
            "m" => &mut self.m,
            "p" => &mut self.p,
            "q" => &mut self.q,
            "k" => &mut self.k,
            "d1" => &mut self.d1,
            "d2" => &mut self.d2,
            _ => return false,
        };
        *slot = value;
        true
    }

    /// chi = (r - d) / a, the carrying capacity of the predator-free prey.
    /// Negative when r < d.
    pub fn chi(&self) -> f64 {
        (self.r - self.d) / self.a
    }

    /// lambda = m / (cp - mq), defined only when cp > mq.
    pub fn lambda(&self) -> Option<f64> {
        let denom = self.c * self.p - self.m * self.q;
        (denom > 0.0).then(|| self.m / denom)
    }
}

/// Prey (`prey`, A) and predator (`predator`, B) reaction rates at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionRates {
    pub prey: f64,
    pub predator: f64,
}

/// Linearization of the kinetics: the reaction Jacobian is
/// `[[M, -N], [P, -Q]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianEntries {
    /// M = dA/du.
    #[serde(rename = "M")]
    pub prey_self: f64,
    /// N = -dA/dv.
    #[serde(rename = "N")]
    pub prey_by_predator: f64,
    /// P = dB/du.
    #[serde(rename = "P")]
    pub predator_by_prey: f64,
    /// Q = -dB/dv.
    #[serde(rename = "Q")]
    pub predator_self: f64,
}

impl JacobianEntries {
    /// Row-major reaction Jacobian.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [
            [self.prey_self, -self.prey_by_predator],
            [self.predator_by_prey, -self.predator_self],
        ]
    }

    /// PN - MQ, the determinant of the reaction Jacobian.
    pub fn kinetic_det(&self) -> f64 {
        self.predator_by_prey * self.prey_by_predator - self.prey_self * self.predator_self
    }
}

fn check_density(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and >= 0, got {value}")))
    }
}

/// f(k, v) = 1 / (1 + k v).
pub fn fear_factor(k: f64, v: f64) -> Result<f64> {
    check_density("fear parameter k", k)?;
    check_density("predator density v", v)?;
    Ok(1.0 / (1.0 + k * v))
}

/// g = p / (1 + q u + v).
pub fn functional_response(params: &ModelParams, u: f64, v: f64) -> Result<f64> {
    check_density("prey density u", u)?;
    check_density("predator density v", v)?;
    Ok(params.p / (1.0 + params.q * u + v))
}

/// Unchecked kinetics for the solver hot path. Callers guarantee u, v >= 0.
#[inline]
pub(crate) fn rates(params: &ModelParams, u: f64, v: f64) -> (f64, f64) {
    let ModelParams { r, d, a, c, m, p, q, k, .. } = *params;
    let predation = p * u * v / (1.0 + q * u + v);
    let prey = r * u / (1.0 + k * v) - d * u - a * u * u - predation;
    let predator = -m * v + c * predation;
    (prey, predator)
}

pub fn reaction(params: &ModelParams, u: f64, v: f64) -> Result<ReactionRates> {
    check_density("prey density u", u)?;
    check_density("predator density v", v)?;
    let (prey, predator) = rates(params, u, v);
    Ok(ReactionRates { prey, predator })
}

pub fn jacobian_at(params: &ModelParams, u: f64, v: f64) -> Result<JacobianEntries> {
    check_density("prey density u", u)?;
    check_density("predator density v", v)?;
    let ModelParams { r, d, a, c, m, p, q, k, .. } = *params;
    let den = 1.0 + q * u + v;
    let den2 = den * den;
    let fear = 1.0 + k * v;
    Ok(JacobianEntries {
        prey_self: u * (-2.0 * a + p * q * v / den2) + r / fear - d - p * v / den,
        prey_by_predator: r * k * u / (fear * fear) + p * u * (1.0 + q * u) / den2,
        predator_by_prey: c * p * (1.0 + v) * v / den2,
        predator_self: m - c * p * (1.0 + q * u) * u / den2,
    })
}
