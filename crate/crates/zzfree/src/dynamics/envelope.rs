//! Coupler ramp and CR pulse envelopes.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampKind {
    Tanh,
    FlatTopGaussian,
}

impl std::str::FromStr for RampKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(RampKind::Tanh),
            "gaussian" | "flat-top-gaussian" => Ok(RampKind::FlatTopGaussian),
            _ => Err(Error::InvalidParameter { name: "ramp", reason: format!("unknown ramp `{s}`") }),
        }
    }
}

/// Rising edge `0 -> 1` over `[0, tau0]`, rescaled so both ends are exact.
pub fn ramp_fraction(kind: RampKind, tau0: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= tau0 {
        return 1.0;
    }
    match kind {
        RampKind::Tanh => {
            let k = 8.0 / tau0;
            let edge = (k * tau0 / 2.0).tanh();
            ((k * (t - tau0 / 2.0)).tanh() + edge) / (2.0 * edge)
        }
        RampKind::FlatTopGaussian => {
            let sigma = tau0 / 4.0;
            let g = |x: f64| (-(x - tau0).powi(2) / (2.0 * sigma * sigma)).exp();
            let g0 = g(0.0);
            (g(t) - g0) / (1.0 - g0)
        }
    }
}

/// Coupler frequency on the rising ramp from `wi` to `we`.
pub fn coupler_ramp_envelope(kind: RampKind, wi: f64, we: f64, tau0: f64, t: f64) -> Result<f64> {
    if !(tau0 > 0.0) {
        return Err(Error::InvalidParameter { name: "tau0", reason: format!("{tau0} must be positive") });
    }
    Ok(wi + (we - wi) * ramp_fraction(kind, tau0, t))
}

/// Round-square pulse: cosine rise, flat top `tau`, cosine fall.
pub fn cr_pulse_envelope(omega: f64, rise: f64, fall: f64, tau: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t < rise {
        omega * 0.5 * (1.0 - (PI * t / rise).cos())
    } else if t <= rise + tau {
        omega
    } else if t < rise + tau + fall {
        omega * 0.5 * (1.0 + (PI * (t - rise - tau) / fall).cos())
    } else {
        0.0
    }
}
