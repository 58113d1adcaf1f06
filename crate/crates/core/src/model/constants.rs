//! Closed-form constants of the coverage limit.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::RadiusLaw;
use crate::error::{invalid, Result};

/// `Gamma(n / 2)` for a positive integer `n`, by the half-integer recursion.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n > 0, "Gamma(0) is undefined");
    let (mut g, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Volume of the unit ball in `R^d`, `pi^{d/2} / Gamma(1 + d/2)`.
pub fn theta(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    PI.powf(d as f64 / 2.0) / gamma_half(d as u32 + 2)
}

/// Expected volume of a ball of radius `Y`.
pub fn alpha(d: usize, law: &RadiusLaw) -> f64 {
    theta(d) * law.moment(d as u32)
}

/// The coverage-limit constant `c_{d,k,Y}`.
pub fn constant_cdky(d: usize, k: usize, law: &RadiusLaw) -> f64 {
    assert!(d >= 2 && k >= 1);
    let ratio = PI.sqrt() * gamma_half(d as u32 + 2) / gamma_half(d as u32 + 1);
    let m1 = law.moment(d as u32 - 1);
    let m0 = law.moment(d as u32);
    ratio.powi(d as i32 - 1) * m1.powi(d as i32) / m0.powi(d as i32 - 1) / (factorial(d) * factorial(k - 1))
}

fn g_prefactor(d: usize) -> f64 {
    PI.powf((d * d - 1) as f64 / 2.0) / (factorial(d) * gamma_half(d as u32 + 1).powi(d as i32 - 1))
}

/// Closed form of `G(s_1, ..., s_d)`, the normalized volume of configurations
/// of `d - 1` balls around a ball at the origin whose upper intersection point
/// is a local minimum.
pub fn closed_form_g(radii: &[f64]) -> f64 {
    let d = radii.len();
    assert!(d >= 2);
    g_prefactor(d) * radii.iter().map(|s| s.powi(d as i32 - 1)).product::<f64>()
}

/// `c_0 = E[G(Y_1, ..., Y_d)]` for independent marks.
pub fn constant_c0(d: usize, law: &RadiusLaw) -> f64 {
    assert!(d >= 2);
    g_prefactor(d) * law.moment(d as u32 - 1).powi(d as i32)
}

/// Default truncation exponent: half the admissible bound
/// `E[min(Y, 1/2)^d] / (8 d E[Y^d])`.
pub fn default_zeta(d: usize, law: &RadiusLaw) -> f64 {
    0.5 * law.capped_moment(0.5, d as u32) / (8.0 * d as f64 * law.moment(d as u32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleVariant {
    /// `alpha t r^d = log t + (d+k-2) log log t + beta`.
    HallJanson,
    /// Adds `(d+k-2)^2 log log t / log t` to the right-hand side.
    Corrected,
}

/// Parameters mapping an intensity `t` to the radius scale `r_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSchedule {
    pub d: usize,
    pub k: usize,
    #[serde(default)]
    pub beta: f64,
    pub variant: ScheduleVariant,
}

impl ScalingSchedule {
    pub fn new(d: usize, k: usize, beta: f64, variant: ScheduleVariant) -> Result<Self> {
        let s = ScalingSchedule { d, k, beta, variant };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(invalid(format!("d must be at least 2, got {}", self.d)));
        }
        if self.k < 1 {
            return Err(invalid("k must be at least 1"));
        }
        if !self.beta.is_finite() {
            return Err(invalid("beta must be finite"));
        }
        Ok(())
    }

    /// `log t + (d+k-2) log log t` plus the correction term for the
    /// corrected variant; `log log t` is taken as 0 for `t <= e`.
    pub fn centering(&self, t: f64) -> f64 {
        let lt = t.ln();
        let llt = if t > E { lt.ln() } else { 0.0 };
        let m = (self.d + self.k - 2) as f64;
        let mut c = lt + m * llt;
        if self.variant == ScheduleVariant::Corrected {
            c += m * m * llt / lt;
        }
        c
    }

    /// The clamped right-hand side `alpha t r_t^d`.
    pub fn rhs(&self, t: f64) -> f64 {
        (self.centering(t) + self.beta).max(0.0)
    }
}

/// Radius scale `r_t` solving `alpha t r_t^d = rhs(t)`.
pub fn scaling_radius(t: f64, sched: &ScalingSchedule, law: &RadiusLaw) -> Result<f64> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(invalid(format!("intensity must exceed 1, got {t}")));
    }
    let a = alpha(sched.d, law);
    Ok((sched.rhs(t) / (a * t)).powf(1.0 / sched.d as f64))
}

/// Limiting coverage probability `exp(-c_{d,k,Y} |A| e^{-beta})`.
pub fn limit_probability(sched: &ScalingSchedule, law: &RadiusLaw, area: f64) -> f64 {
    (-constant_cdky(sched.d, sched.k, law) * area * (-sched.beta).exp()).exp()
}
