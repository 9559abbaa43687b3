//! One-dimensional densities on intervals and the CD(K,N)-density tests.
//!
//! A profile `h` is always handled through its root `g = h^{1/(N-1)}`, which is the
//! function whose `eta`-concavity the curvature-dimension condition constrains.

use crate::bump::mollifier_weights;
use crate::coeffs::{sigma_kappa, CoeffValue};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

/// Closed-form model roots `g`; the density is `g(scale * r)^{N-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Sin,
    Sinh,
    Cosh,
    Id,
    Const,
    Exp,
}

impl ModelTag {
    pub const ALL: [ModelTag; 6] = [
        ModelTag::Sin,
        ModelTag::Sinh,
        ModelTag::Cosh,
        ModelTag::Id,
        ModelTag::Const,
        ModelTag::Exp,
    ];

    /// The `eta` for which `g'' + eta g = 0` holds identically (unit scale).
    pub fn equality_eta(self) -> f64 {
        match self {
            ModelTag::Sin => 1.0,
            ModelTag::Sinh | ModelTag::Cosh | ModelTag::Exp => -1.0,
            ModelTag::Id | ModelTag::Const => 0.0,
        }
    }

    /// Natural domain used when no other is requested.
    pub fn default_domain(self) -> [f64; 2] {
        match self {
            ModelTag::Sin => [0.0, std::f64::consts::PI],
            _ => [0.0, 1.0],
        }
    }

    /// `(g, g', g'')` at `x`.
    pub fn root(self, x: f64) -> (f64, f64, f64) {
        match self {
            ModelTag::Sin => (x.sin(), x.cos(), -x.sin()),
            ModelTag::Sinh => (x.sinh(), x.cosh(), x.sinh()),
            ModelTag::Cosh => (x.cosh(), x.sinh(), x.cosh()),
            ModelTag::Id => (x, 1.0, 0.0),
            ModelTag::Const => (1.0, 0.0, 0.0),
            ModelTag::Exp => {
                let e = x.exp();
                (e, e, e)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Sin => "sin",
            ModelTag::Sinh => "sinh",
            ModelTag::Cosh => "cosh",
            ModelTag::Id => "id",
            ModelTag::Const => "const",
            ModelTag::Exp => "exp",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(ModelTag::Sin),
            "sinh" => Ok(ModelTag::Sinh),
            "cosh" => Ok(ModelTag::Cosh),
            "id" => Ok(ModelTag::Id),
            "const" | "constant" | "one" => Ok(ModelTag::Const),
            "exp" => Ok(ModelTag::Exp),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// A piecewise-linear term `slope * |r - at|` added to a model root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kink {
    pub at: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Model {
        tag: ModelTag,
        scale: f64,
        kink: Option<Kink>,
    },
    /// Uniform samples of `h` on the domain (first and last at the endpoints).
    Sampled { values: Vec<f64> },
    /// `[h^{1/m} * phi_eps]^m` of a source profile.
    Mollified {
        source: Box<DensityProfile>,
        epsilon: f64,
        exponent_base: f64,
    },
}

/// Density `h` on `[a, b]` with dimension parameter `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRecord", into = "DensityRecord")]
pub struct DensityProfile {
    pub domain: [f64; 2],
    pub n: f64,
    pub kind: DensityKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityRecord {
    domain: [f64; 2],
    kind: String,
    #[serde(rename = "N")]
    n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<ModelTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kink: Option<Kink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<Box<DensityProfile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent_base: Option<f64>,
}

impl TryFrom<DensityRecord> for DensityProfile {
    type Error = Error;
    fn try_from(r: DensityRecord) -> Result<Self> {
        let missing =
            |what: &str| Error::Domain(format!("density kind `{}` needs `{what}`", r.kind));
        let kind = match r.kind.as_str() {
            "model" | "closed_form" => DensityKind::Model {
                tag: r.tag.ok_or_else(|| missing("tag"))?,
                scale: r.scale.unwrap_or(1.0),
                kink: r.kink,
            },
            "sampled" => DensityKind::Sampled {
                values: r.values.clone().ok_or_else(|| missing("values"))?,
            },
            "mollified" => DensityKind::Mollified {
                source: r.source.clone().ok_or_else(|| missing("source"))?,
                epsilon: r.epsilon.ok_or_else(|| missing("epsilon"))?,
                exponent_base: r.exponent_base.ok_or_else(|| missing("exponent_base"))?,
            },
            other => return Err(Error::Domain(format!("unknown density kind `{other}`"))),
        };
        DensityProfile::new(r.domain, r.n, kind)
    }
}

impl From<DensityProfile> for DensityRecord {
    fn from(p: DensityProfile) -> Self {
        let mut rec = DensityRecord {
            domain: p.domain,
            kind: String::new(),
            n: p.n,
            tag: None,
            scale: None,
            kink: None,
            values: None,
            source: None,
            epsilon: None,
            exponent_base: None,
        };
        match p.kind {
            DensityKind::Model { tag, scale, kink } => {
                rec.kind = "model".into();
                rec.tag = Some(tag);
                rec.scale = (scale != 1.0).then_some(scale);
                rec.kink = kink;
            }
            DensityKind::Sampled { values } => {
                rec.kind = "sampled".into();
                rec.values = Some(values);
            }
            DensityKind::Mollified {
                source,
                epsilon,
                exponent_base,
            } => {
                rec.kind = "mollified".into();
                rec.source = Some(source);
                rec.epsilon = Some(epsilon);
                rec.exponent_base = Some(exponent_base);
            }
        }
        rec
    }
}

const MOLLIFIER_PANELS: usize = 64;

impl DensityProfile {
    pub fn new(domain: [f64; 2], n: f64, kind: DensityKind) -> Result<Self> {
        let [a, b] = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!(
                "density domain [{a}, {b}] is not a proper interval"
            )));
        }
        if !(n > 1.0) {
            return Err(Error::Domain(format!(
                "density exponent N = {n} must exceed 1"
            )));
        }
        match &kind {
            DensityKind::Sampled { values } => {
                if values.len() < 3 {
                    return Err(Error::Grid(format!(
                        "{} samples, need at least 3",
                        values.len()
                    )));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Domain(
                        "sampled density has a negative or non-finite value".into(),
                    ));
                }
            }
            DensityKind::Model { scale, .. } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::Domain(format!(
                        "model scale {scale} must be positive"
                    )));
                }
            }
            DensityKind::Mollified {
                epsilon,
                exponent_base,
                ..
            } => {
                if !(*epsilon > 0.0 && *exponent_base > 0.0) {
                    return Err(Error::Domain(
                        "mollifier needs epsilon > 0 and exponent > 0".into(),
                    ));
                }
            }
        }
        Ok(Self { domain, n, kind })
    }

    pub fn a(&self) -> f64 {
        self.domain[0]
    }

    pub fn b(&self) -> f64 {
        self.domain[1]
    }

    pub fn len(&self) -> f64 {
        self.domain[1] - self.domain[0]
    }

    /// Sample spacing of a sampled profile.
    pub fn grid_step(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Sampled { values } => Some(self.len() / (values.len() - 1) as f64),
            _ => None,
        }
    }

    /// Same density viewed with another dimension parameter.
    pub fn with_n(&self, n: f64) -> Result<Self> {
        Self::new(self.domain, n, self.kind.clone())
    }

    /// Density value `h(r)`.
    pub fn h(&self, r: f64) -> f64 {
        match &self.kind {
            DensityKind::Mollified { .. } => self.mollified_h(r),
            _ => self.root(r).powf(self.n - 1.0),
        }
    }

    /// Root `g(r) = h(r)^{1/(N-1)}`.
    pub fn root(&self, r: f64) -> f64 {
        match &self.kind {
            DensityKind::Model { tag, scale, kink } => {
                let mut g = tag.root(scale * r).0;
                if let Some(k) = kink {
                    g += k.slope * (r - k.at).abs();
                }
                g.max(0.0)
            }
            DensityKind::Sampled { values } => {
                let [a, b] = self.domain;
                let n = values.len() - 1;
                let x = ((r - a) / (b - a) * n as f64).clamp(0.0, n as f64);
                let i = (x.floor() as usize).min(n - 1);
                let w = x - i as f64;
                let e = 1.0 / (self.n - 1.0);
                (1.0 - w) * values[i].powf(e) + w * values[i + 1].powf(e)
            }
            DensityKind::Mollified { .. } => self.mollified_h(r).powf(1.0 / (self.n - 1.0)),
        }
    }

    /// Analytic `(g, g', g'')` for closed-form profiles (kinks contribute only their
    /// piecewise slope).
    pub fn root_derivs(&self, r: f64) -> Option<(f64, f64, f64)> {
        match &self.kind {
            DensityKind::Model { tag, scale, kink } => {
                let (g, d1, d2) = tag.root(scale * r);
                let (mut g, mut d1, d2) = (g, d1 * scale, d2 * scale * scale);
                if let Some(k) = kink {
                    g += k.slope * (r - k.at).abs();
                    d1 += k.slope * (r - k.at).signum();
                }
                Some((g, d1, d2))
            }
            _ => None,
        }
    }

    /// `g''/g` at `r`, analytic when available and by central differences otherwise.
    pub fn root_log_second(&self, r: f64) -> f64 {
        if let Some((g, _, d2)) = self.root_derivs(r) {
            return d2 / g;
        }
        let d = (self.len() * 1e-4).min(1e-3);
        let g = self.root(r);
        (self.root(r + d) - 2.0 * g + self.root(r - d)) / (d * d * g)
    }

    fn mollified_h(&self, r: f64) -> f64 {
        let DensityKind::Mollified {
            source,
            epsilon,
            exponent_base,
        } = &self.kind
        else {
            unreachable!()
        };
        let m = *exponent_base;
        static WEIGHTS: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
        let inner: f64 = WEIGHTS
            .get_or_init(|| mollifier_weights(MOLLIFIER_PANELS))
            .iter()
            .map(|&(x, w)| w * source.h(r - epsilon * (2.0 * x - 1.0)).powf(1.0 / m))
            .sum();
        inner.powf(m)
    }

    /// Bound on `|g''''|` used to size finite-difference steps, when known.
    fn fourth_derivative_bound(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Model { tag, scale, .. } => {
                let l4 = scale.powi(4);
                let edge = scale * self.a().abs().max(self.b().abs());
                Some(match tag {
                    ModelTag::Sin => l4,
                    ModelTag::Sinh | ModelTag::Cosh => l4 * edge.cosh(),
                    ModelTag::Exp => l4 * (scale * self.b()).exp(),
                    ModelTag::Id | ModelTag::Const => 0.0,
                })
            }
            _ => None,
        }
    }
}

/// Closed-form catalog density `g^{N-1}` on `domain`.
pub fn model_density(name: &str, n: f64, domain: [f64; 2]) -> Result<DensityProfile> {
    let tag: ModelTag = name.parse()?;
    DensityProfile::new(
        domain,
        n,
        DensityKind::Model {
            tag,
            scale: 1.0,
            kink: None,
        },
    )
}

/// Where an inequality check found its worst margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Witness {
    None,
    Triple { r0: f64, r1: f64, s: f64 },
    Point { t: f64 },
    SheetPoint { t: f64, r: f64, a: f64, b: f64 },
}

/// Outcome of a one-dimensional inequality sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCheckResult {
    pub passed: bool,
    /// Most negative margin, normalized by `1 + sup|g|`.
    pub min_slack: f64,
    pub witness: Witness,
    pub tolerance: f64,
    /// Largest normalized second-difference residual of `g'' + eta g`.
    pub ode_residual: f64,
    pub samples: usize,
    pub vanishing: bool,
}

impl DensityCheckResult {
    pub(crate) fn from_slack(min_slack: f64, witness: Witness, tol: f64, samples: usize) -> Self {
        Self {
            passed: min_slack >= -tol,
            // no negative zero in reports
            min_slack: min_slack + 0.0,
            witness,
            tolerance: tol,
            ode_residual: f64::NAN,
            samples,
            vanishing: false,
        }
    }
}

pub const TRIPLE_GRID_NODES: usize = 101;
pub const TRIPLE_S_STEPS: usize = 16;
pub const ODE_GRID_NODES: usize = 2001;

/// Margin of `g(mid) >= sigma^{(1-s)} g0 + sigma^{(s)} g1` for the curvature `eta`.
pub(crate) fn concavity_margin(eta: f64, theta: f64, s: f64, g0: f64, g1: f64, gm: f64) -> f64 {
    let term = |c: CoeffValue, g: f64| match c {
        CoeffValue::Finite(v) => v * g,
        CoeffValue::Infinite if g == 0.0 => 0.0,
        CoeffValue::Infinite => f64::INFINITY,
    };
    gm - term(sigma_kappa(eta, 1.0 - s, theta), g0) - term(sigma_kappa(eta, s, theta), g1)
}

/// Tests whether `h` is a CD((N-1) eta, N) density.
///
/// Two sweeps run: the integrated sigma-concavity of `g = h^{1/(N-1)}` over
/// triples `(r0, r1, s)`, and the differential form `g'' + eta g <= 0` by central
/// second differences. Margins are normalized by `1 + sup|g|`.
pub fn check_cd_density(
    h: &DensityProfile,
    eta: f64,
    n: f64,
    tol: f64,
) -> Result<DensityCheckResult> {
    if !(n > 1.0) {
        return Err(Error::Domain(format!("N = {n} must exceed 1")));
    }
    let h = if (h.n - n).abs() > 0.0 {
        h.with_n(n)?
    } else {
        h.clone()
    };
    let [a, b] = h.domain;

    // Nodes of the triple grid and their root values.
    let (nodes, sampled): (Vec<f64>, bool) = match &h.kind {
        DensityKind::Sampled { values } => {
            let m = values.len();
            let stride = ((m - 1) + (TRIPLE_GRID_NODES - 2)) / (TRIPLE_GRID_NODES - 1);
            let stride = stride.max(1);
            let idx: Vec<usize> = (0..m).step_by(stride).collect();
            if idx.len() < 3 {
                return Err(Error::Grid(format!("only {} usable nodes", idx.len())));
            }
            let step = h.len() / (m - 1) as f64;
            (idx.iter().map(|&i| a + i as f64 * step).collect(), true)
        }
        _ => (
            (0..TRIPLE_GRID_NODES)
                .map(|i| a + (b - a) * i as f64 / (TRIPLE_GRID_NODES - 1) as f64)
                .collect(),
            false,
        ),
    };
    let interior: &[f64] = if nodes.len() >= 5 {
        &nodes[1..nodes.len() - 1]
    } else {
        &nodes
    };
    let g: Vec<f64> = interior.iter().map(|&r| h.root(r)).collect();
    let gmax = g.iter().cloned().fold(0.0, f64::max);

    let fine: Vec<f64> = (0..ODE_GRID_NODES)
        .map(|i| a + (b - a) * i as f64 / (ODE_GRID_NODES - 1) as f64)
        .collect();
    let gsup = fine.iter().map(|&r| h.root(r)).fold(gmax, f64::max);
    if gsup == 0.0 {
        let mut res = DensityCheckResult::from_slack(0.0, Witness::None, tol, 0);
        res.vanishing = true;
        res.ode_residual = 0.0;
        return Ok(res);
    }
    let norm = 1.0 + gsup;

    let mut min_slack = f64::INFINITY;
    let mut witness = Witness::None;
    let mut samples = 0usize;
    for i in 0..interior.len() {
        for j in (i + 1)..interior.len() {
            let (r0, r1) = (interior[i], interior[j]);
            let theta = r1 - r0;
            if sampled {
                // exact on nodes: the intermediate point must be a node as well
                for k in (i + 1)..j {
                    let s = (k - i) as f64 / (j - i) as f64;
                    let m = concavity_margin(eta, theta, s, g[i], g[j], g[k]) / norm;
                    samples += 1;
                    if m < min_slack {
                        min_slack = m;
                        witness = Witness::Triple { r0, r1, s };
                    }
                }
            } else {
                for k in 0..=TRIPLE_S_STEPS {
                    let s = k as f64 / TRIPLE_S_STEPS as f64;
                    let gm = h.root((1.0 - s) * r0 + s * r1);
                    let m = concavity_margin(eta, theta, s, g[i], g[j], gm) / norm;
                    samples += 1;
                    if m < min_slack {
                        min_slack = m;
                        witness = Witness::Triple { r0, r1, s };
                    }
                }
            }
        }
    }

    // Differential form by second differences.
    let (ode_nodes, delta): (Vec<f64>, f64) = if sampled {
        let step = h.grid_step().unwrap();
        let DensityKind::Sampled { values } = &h.kind else {
            unreachable!()
        };
        (
            (1..values.len() - 1).map(|i| a + i as f64 * step).collect(),
            step,
        )
    } else {
        let spacing = (b - a) / (ODE_GRID_NODES - 1) as f64;
        let delta = match h.fourth_derivative_bound() {
            Some(m4) if m4 > 0.0 => (1.2 * tol / m4).sqrt().clamp(1e-4 * (b - a), spacing),
            Some(_) => spacing,
            None => spacing,
        };
        let lo = a + delta;
        let hi = b - delta;
        (
            fine.iter()
                .cloned()
                .filter(|&r| r >= lo && r <= hi)
                .collect(),
            delta,
        )
    };
    let mut ode_worst = f64::NEG_INFINITY;
    for &r in &ode_nodes {
        let gm = h.root(r);
        let d2 = (h.root(r + delta) - 2.0 * gm + h.root(r - delta)) / (delta * delta);
        let res = (d2 + eta * gm) / norm;
        if res > ode_worst {
            ode_worst = res;
        }
        if -res < min_slack {
            min_slack = -res;
            witness = Witness::Triple {
                r0: r - delta,
                r1: r + delta,
                s: 0.5,
            };
        }
    }
    samples += ode_nodes.len();

    let mut res = DensityCheckResult::from_slack(min_slack, witness, tol, samples);
    res.ode_residual = ode_worst;
    Ok(res)
}

/// Power-like convolution `[h^{1/m} * phi_eps]^m` on `[a + eps, b - eps]`.
pub fn power_convolution(
    h: &DensityProfile,
    epsilon: f64,
    exponent_base: f64,
) -> Result<DensityProfile> {
    if !(epsilon > 0.0) || epsilon >= 0.5 * h.len() {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} must lie in (0, {})",
            0.5 * h.len()
        )));
    }
    if !(exponent_base > 0.0) {
        return Err(Error::Domain(format!(
            "exponent base {exponent_base} must be positive"
        )));
    }
    DensityProfile::new(
        [h.a() + epsilon, h.b() - epsilon],
        h.n,
        DensityKind::Mollified {
            source: Box::new(h.clone()),
            epsilon,
            exponent_base,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn model_values() {
        let p = model_density("sin", 2.0, [0.0, PI]).unwrap();
        assert!((p.h(PI / 2.0) - 1.0).abs() < 1e-15);
        let p = model_density("const", 4.5, [0.0, 1.0]).unwrap();
        assert_eq!(p.h(0.3), 1.0);
        let p = model_density("id", 3.0, [0.0, 2.0]).unwrap();
        assert!((p.h(2.0) - 4.0).abs() < 1e-14);
        assert!(matches!(
            model_density("tan", 2.0, [0.0, 1.0]),
            Err(Error::UnknownModel(_))
        ));
    }

    #[test]
    fn sin_equality_passes() {
        let p = model_density("sin", 3.0, [0.0, PI]).unwrap();
        let r = check_cd_density(&p, 1.0, 3.0, 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.min_slack.abs() < 1e-6);
    }

    #[test]
    fn id_with_positive_eta_fails_inside() {
        let p = model_density("id", 2.0, [0.1, 2.0]).unwrap();
        let r = check_cd_density(&p, 1.0, 2.0, 1e-6).unwrap();
        assert!(!r.passed);
        let Witness::Triple { r0, r1, s } = r.witness else {
            panic!()
        };
        let mid = (1.0 - s) * r0 + s * r1;
        assert!(mid > 0.1 && mid < 2.0);
    }

    #[test]
    fn rejects_small_n() {
        let p = model_density("const", 2.0, [0.0, 1.0]).unwrap();
        assert!(matches!(
            check_cd_density(&p, 0.0, 1.0, 1e-6),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sampled_needs_three_nodes() {
        let e = DensityProfile::new(
            [0.0, 1.0],
            2.0,
            DensityKind::Sampled {
                values: vec![1.0, 1.0],
            },
        );
        assert!(matches!(e, Err(Error::Grid(_))));
    }

    #[test]
    fn zero_density_flagged() {
        let p = DensityProfile::new(
            [0.0, 1.0],
            2.0,
            DensityKind::Sampled {
                values: vec![0.0; 10],
            },
        )
        .unwrap();
        let r = check_cd_density(&p, 1.0, 2.0, 1e-6).unwrap();
        assert!(r.passed && r.vanishing);
    }

    #[test]
    fn convolution_of_constant_is_constant() {
        let p = DensityProfile::new(
            [0.0, 1.0],
            3.0,
            DensityKind::Sampled {
                values: vec![2.5; 11],
            },
        )
        .unwrap();
        let q = power_convolution(&p, 0.1, 2.0).unwrap();
        assert_eq!(q.domain, [0.1, 0.9]);
        for r in [0.1, 0.3, 0.77, 0.9] {
            assert!((q.h(r) - 2.5).abs() < 1e-13);
        }
        assert!(power_convolution(&p, 0.6, 2.0).is_err());
    }

    #[test]
    fn record_round_trip() {
        let p = model_density("sinh", 2.5, [0.0, 2.0]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"model\"") && s.contains("\"N\":2.5"));
        let q: DensityProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"domain":[0,1],"kind":"model","tag":"sin","N":2,"colour":1}"#;
        assert!(serde_json::from_str::<DensityProfile>(bad).is_err());
    }
}
