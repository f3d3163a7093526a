//! Completing a partially specified parameter set from a target equilibrium.
//!
//! Given (u~, v~), a, d2 and a target M/d1, and free choices of (m, c, q, k, d),
//! the remaining constants are forced:
//!
//! ```text
//! lambda = u~ / (1 + v~)
//! p      = m (1/lambda + q) / c
//! r      = (1 + k v~) (d + a u~ + p v~ / (1 + q u~ + v~))
//! d1     = M / (M/d1 target)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{jacobian_at, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletionTarget {
    pub u_tilde: f64,
    pub v_tilde: f64,
    pub a: f64,
    pub d2: f64,
    pub m_over_d1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeChoice {
    pub m: f64,
    pub c: f64,
    pub q: f64,
    pub k: f64,
    pub d: f64,
}

/// Fills in p, r and d1. Fails when the target M is not positive.
pub fn complete(target: &CompletionTarget, free: &FreeChoice) -> Result<ModelParams> {
    let CompletionTarget { u_tilde: u, v_tilde: v, a, d2, m_over_d1 } = *target;
    let FreeChoice { m, c, q, k, d } = *free;
    let lambda = u / (1.0 + v);
    let p = m * (1.0 / lambda + q) / c;
    let r = (1.0 + k * v) * (d + a * u + p * v / (1.0 + q * u + v));
    let mut params = ModelParams { r, d, a, c, m, p, q, k, d1: 1.0, d2 };
    let big_m = jacobian_at(&params, u, v)?.prey_self;
    if !(big_m > 0.0) {
        return Err(Error::Hypothesis(format!("M = {big_m} at the target equilibrium is not positive")));
    }
    params.d1 = big_m / m_over_d1;
    params.validate()?;
    Ok(params)
}

/// Targets for the a = 0.1 family (d2 = 0.1, M/d1 = 2.407).
pub const FIG1_TARGET: CompletionTarget =
    CompletionTarget { u_tilde: 0.16608, v_tilde: 3.89934, a: 0.1, d2: 0.1, m_over_d1: 2.407 };

/// Targets for the a = 0.055 family (d2 = 0.2, M/d1 = 10.095).
pub const FIG2_TARGET: CompletionTarget =
    CompletionTarget { u_tilde: 0.16675, v_tilde: 3.91904, a: 0.055, d2: 0.2, m_over_d1: 10.095 };

/// Committed free choices for the a = 0.1 family.
pub const FIG1_FREE: FreeChoice = FreeChoice { m: 1.0, c: 650.0, q: 1000.0, k: 0.01, d: 0.01 };

/// Committed free choices for the a = 0.055 family.
pub const FIG2_FREE: FreeChoice = FreeChoice { m: 3.0, c: 965.0, q: 1000.0, k: 0.01, d: 0.01 };
