//! Generalized sine and the volume distortion coefficients.
//!
//! Every curvature inequality in the crate is phrased through `sigma` and
//! `tau_coeff`. Infinite coefficients are carried as [`CoeffValue::Infinite`]
//! so branch tests never compare against a sentinel float.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this value of `|kappa| * theta^2` the ratio form is replaced by its series.
pub const SERIES_THRESHOLD: f64 = 1e-8;

/// Nonnegative extended real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffValue {
    Finite(f64),
    Infinite,
}

impl CoeffValue {
    pub fn is_finite(self) -> bool {
        matches!(self, CoeffValue::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            CoeffValue::Finite(v) => Some(v),
            CoeffValue::Infinite => None,
        }
    }

    /// Lossy view as `f64`, mapping the infinite branch to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            CoeffValue::Finite(v) => v,
            CoeffValue::Infinite => f64::INFINITY,
        }
    }

    pub fn powf(self, e: f64) -> CoeffValue {
        match self {
            CoeffValue::Finite(v) => CoeffValue::Finite(v.powf(e)),
            CoeffValue::Infinite if e > 0.0 => CoeffValue::Infinite,
            CoeffValue::Infinite if e == 0.0 => CoeffValue::Finite(1.0),
            CoeffValue::Infinite => CoeffValue::Finite(0.0),
        }
    }
}

/// Arguments of a single distortion coefficient evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionQuery {
    pub kappa_eff: f64,
    pub t: f64,
    pub theta: f64,
}

impl DistortionQuery {
    pub fn new(kappa_eff: f64, t: f64, theta: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&t), "t = {t} outside [0,1]");
        debug_assert!(theta >= 0.0, "theta = {theta} negative");
        Self {
            kappa_eff,
            t,
            theta,
        }
    }
}

/// `sin(sqrt(k) x)/sqrt(k)`, `0` for `k = 0`, `sinh(sqrt(-k) x)/sqrt(-k)` for `k < 0`.
pub fn generalized_sin(kappa: f64, theta: f64) -> f64 {
    if kappa > 0.0 {
        let r = kappa.sqrt();
        (r * theta).sin() / r
    } else if kappa == 0.0 {
        0.0
    } else {
        let r = (-kappa).sqrt();
        (r * theta).sinh() / r
    }
}

// sin(sqrt(u))/sqrt(u) as a power series in u, valid for tiny |u|.
fn sinc_series(u: f64) -> f64 {
    1.0 - u / 6.0 + u * u / 120.0 - u * u * u / 5040.0
}

/// Ratio `s(t sqrt|u|)/s(sqrt|u|)` for the rescaled curvature `u = kappa*theta^2`.
fn sigma_rescaled(u: f64, t: f64) -> CoeffValue {
    if u == 0.0 {
        return CoeffValue::Finite(t);
    }
    if u >= PI * PI {
        return CoeffValue::Infinite;
    }
    if u.abs() < SERIES_THRESHOLD {
        return CoeffValue::Finite(t * sinc_series(t * t * u) / sinc_series(u));
    }
    if u > 0.0 {
        let x = u.sqrt();
        return CoeffValue::Finite((t * x).sin() / x.sin());
    }
    let x = (-u).sqrt();
    if x > 30.0 {
        // sinh(tx)/sinh(x) without overflow
        let num = -(-2.0 * t * x).exp_m1();
        let den = -(-2.0 * x).exp_m1();
        return CoeffValue::Finite(((t - 1.0) * x).exp() * num / den);
    }
    CoeffValue::Finite((t * x).sinh() / x.sinh())
}

/// `sigma_kappa^{(t)}(theta)` for a single effective curvature.
pub fn sigma(q: DistortionQuery) -> CoeffValue {
    let u = q.kappa_eff * q.theta * q.theta;
    sigma_rescaled(u, q.t)
}

/// Shorthand for `sigma(DistortionQuery::new(kappa, t, theta))`.
pub fn sigma_kappa(kappa: f64, t: f64, theta: f64) -> CoeffValue {
    sigma(DistortionQuery::new(kappa, t, theta))
}

/// `sigma_{K,N}^{(t)}(theta)`, i.e. `sigma` at `kappa = K/N`.
pub fn sigma_kn(k: f64, n: f64, t: f64, theta: f64) -> CoeffValue {
    if theta == 0.0 {
        return CoeffValue::Finite(t);
    }
    sigma_kappa(k / n, t, theta)
}

/// `tau_{K,N}^{(t)}(theta) = (t * sigma_{K,N-1}^{(t)}(theta)^{N-1})^{1/N}`.
pub fn tau_coeff(k: f64, n: f64, t: f64, theta: f64) -> CoeffValue {
    debug_assert!(n >= 1.0, "N = {n} below 1");
    if n == 1.0 {
        return if k <= 0.0 {
            CoeffValue::Finite(t)
        } else {
            CoeffValue::Infinite
        };
    }
    match sigma_kn(k, n - 1.0, t, theta) {
        CoeffValue::Infinite => {
            if t == 0.0 {
                CoeffValue::Finite(0.0)
            } else {
                CoeffValue::Infinite
            }
        }
        CoeffValue::Finite(s) => CoeffValue::Finite((t * s.powf(n - 1.0)).powf(1.0 / n)),
    }
}
