//! Warping functions, their curvature budgets, the model catalog and the
//! weighted Ricci form of two-dimensional sheets.

use crate::bump::bump;
use crate::densities::{DensityCheckResult, DensityProfile, ModelTag, Witness};
use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    #[serde(alias = "riem", alias = "+")]
    Riemannian,
    #[serde(alias = "lorentz", alias = "-")]
    Lorentzian,
}

impl Signature {
    /// `+1` for the positive definite base, `-1` for the negative definite one.
    pub fn sign(self) -> f64 {
        match self {
            Signature::Riemannian => 1.0,
            Signature::Lorentzian => -1.0,
        }
    }
}

impl FromStr for Signature {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "riemannian" | "riemann" | "riem" | "metric" | "+" => Ok(Signature::Riemannian),
            "lorentzian" | "lorentz" | "-" => Ok(Signature::Lorentzian),
            other => Err(Error::Domain(format!("unknown signature `{other}`"))),
        }
    }
}

/// Multiplicative perturbation `1 + amplitude * bump((t - center)/width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpTerm {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// Values of `f` at or below this are treated as the apex.
pub const ZERO_TOL: f64 = 1e-13;

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WarperForm {
    /// `amplitude * base(frequency * t)`, optionally times a bump factor.
    Model {
        tag: ModelTag,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        amplitude: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        frequency: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bump: Option<BumpTerm>,
    },
    /// Uniform samples on the truncated interval; derivatives by differences.
    Sampled { values: Vec<f64> },
}

fn default_box() -> [f64; 2] {
    [-20.0, 20.0]
}

/// Warping function `f` on a base interval with a declared signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpingFunction {
    #[serde(with = "crate::serde_ext::pair")]
    pub interval: [f64; 2],
    pub signature: Signature,
    pub form: WarperForm,
    #[serde(default = "default_box", with = "crate::serde_ext::pair")]
    pub truncation: [f64; 2],
}

impl WarpingFunction {
    pub fn new(interval: [f64; 2], signature: Signature, form: WarperForm) -> Result<Self> {
        let w = Self {
            interval,
            signature,
            form,
            truncation: default_box(),
        };
        w.validate()?;
        Ok(w)
    }

    pub fn model(tag: ModelTag, interval: [f64; 2], signature: Signature) -> Self {
        Self {
            interval,
            signature,
            form: WarperForm::Model {
                tag,
                amplitude: 1.0,
                frequency: 1.0,
                bump: None,
            },
            truncation: default_box(),
        }
    }

    pub fn with_truncation(mut self, lo: f64, hi: f64) -> Self {
        self.truncation = [lo, hi];
        self
    }

    pub fn with_signature(mut self, signature: Signature) -> Self {
        self.signature = signature;
        self
    }

    pub fn with_interval(mut self, interval: [f64; 2]) -> Self {
        self.interval = interval;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.interval;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Domain(format!(
                "base interval [{lo}, {hi}] is empty"
            )));
        }
        self.truncated()?;
        match &self.form {
            WarperForm::Sampled { values } if values.len() < 5 => Err(Error::Grid(format!(
                "{} warper samples, need at least 5",
                values.len()
            ))),
            WarperForm::Model { bump: Some(b), .. } if !(b.width > 0.0) => {
                Err(Error::Domain("bump width must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Base interval intersected with the truncation box.
    pub fn truncated(&self) -> Result<[f64; 2]> {
        let lo = self.interval[0].max(self.truncation[0]);
        let hi = self.interval[1].min(self.truncation[1]);
        if !(lo < hi) {
            return Err(Error::Truncation(format!(
                "box [{}, {}] misses interval [{}, {}]",
                self.truncation[0], self.truncation[1], self.interval[0], self.interval[1]
            )));
        }
        Ok([lo, hi])
    }

    /// Truncated interval shrunk by `frac * width` at endpoints where `f` vanishes.
    pub fn collared(&self, frac: f64) -> Result<[f64; 2]> {
        let [lo, hi] = self.truncated()?;
        let c = frac * (hi - lo);
        let lo = if self.vanishes_at(lo) { lo + c } else { lo };
        let hi = if self.vanishes_at(hi) { hi - c } else { hi };
        Ok([lo, hi])
    }

    /// True where `f` is zero up to rounding (`sin(pi)` counts as zero).
    pub fn vanishes_at(&self, t: f64) -> bool {
        self.f(t).abs() <= ZERO_TOL
    }

    /// `(f, f', f'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match &self.form {
            WarperForm::Model {
                tag,
                amplitude,
                frequency,
                bump: bt,
            } => {
                let (b, b1, b2) = tag.root(frequency * t);
                let (f, f1, f2) = (
                    amplitude * b,
                    amplitude * frequency * b1,
                    amplitude * frequency * frequency * b2,
                );
                match bt {
                    None => (f, f1, f2),
                    Some(bt) => {
                        let (p, p1, p2) = bump((t - bt.center) / bt.width);
                        let m = 1.0 + bt.amplitude * p;
                        let m1 = bt.amplitude * p1 / bt.width;
                        let m2 = bt.amplitude * p2 / (bt.width * bt.width);
                        (f * m, f1 * m + f * m1, f2 * m + 2.0 * f1 * m1 + f * m2)
                    }
                }
            }
            WarperForm::Sampled { values } => self.sampled_eval(values, t),
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        match &self.form {
            WarperForm::Model {
                bump: None,
                tag,
                amplitude,
                frequency,
            } => amplitude * tag.root(frequency * t).0,
            _ => self.eval(t).0,
        }
    }

    fn sampled_eval(&self, values: &[f64], t: f64) -> (f64, f64, f64) {
        let [lo, hi] = self.truncated().unwrap_or(self.truncation);
        let n = values.len() - 1;
        let h = (hi - lo) / n as f64;
        let d1 = |i: usize| {
            if i == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if i == n {
                (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        };
        let d2 = |i: usize| {
            let i = i.clamp(1, n - 1);
            (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h)
        };
        let x = ((t - lo) / h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let w = x - i as f64;
        let lerp = |a: f64, b: f64| (1.0 - w) * a + w * b;
        (
            lerp(values[i], values[i + 1]),
            lerp(d1(i), d1(i + 1)),
            lerp(d2(i), d2(i + 1)),
        )
    }

    /// Tag of an unperturbed catalog model on its natural interval.
    pub fn natural_model(&self) -> Option<ModelTag> {
        match &self.form {
            WarperForm::Model {
                tag,
                amplitude,
                frequency,
                bump: None,
            } if *amplitude == 1.0
                && *frequency == 1.0
                && self.interval == natural_interval(*tag) =>
            {
                Some(*tag)
            }
            _ => None,
        }
    }

    /// `int_s^t du / f(u)`, `+inf` when the integral diverges.
    pub fn inv_f_integral(&self, s: f64, t: f64) -> f64 {
        if s == t {
            return 0.0;
        }
        if s > t {
            return -self.inv_f_integral(t, s);
        }
        if self.vanishes_at(s) || self.vanishes_at(t) {
            return f64::INFINITY;
        }
        if let WarperForm::Model {
            tag,
            amplitude,
            frequency,
            bump: None,
        } = &self.form
        {
            let anti = |x: f64| match tag {
                ModelTag::Sin => (0.5 * x).tan().ln(),
                ModelTag::Sinh => (0.5 * x).tanh().ln(),
                ModelTag::Cosh => 2.0 * (0.5 * x).tanh().atan(),
                ModelTag::Id => x.ln(),
                ModelTag::Const => x,
                ModelTag::Exp => -(-x).exp(),
            };
            let (x0, x1) = (frequency * s, frequency * t);
            let v = match tag {
                // log-ratio form keeps accuracy for nearby endpoints
                ModelTag::Id => (x1 / x0).ln(),
                ModelTag::Const => x1 - x0,
                ModelTag::Exp => (-x0).exp() * -(-(x1 - x0)).exp_m1(),
                _ => anti(x1) - anti(x0),
            };
            return v / (amplitude * frequency);
        }
        quad::integrate(|u| 1.0 / self.f(u), s, t, 1e-14, 1e-12).value
    }

    /// `int_s^t f(u)^p du`.
    pub fn pow_integral(&self, s: f64, t: f64, p: f64) -> quad::Quadrature {
        quad::integrate(|u| self.f(u).max(0.0).powf(p), s, t, 1e-14, 1e-13)
    }

    /// Checks that `f` vanishes only at endpoints and that `1/f` is not
    /// integrable toward such endpoints.
    pub fn check_zero_set(&self) -> Result<()> {
        let [lo, hi] = self.truncated()?;
        for i in 1..2000 {
            let t = lo + (hi - lo) * i as f64 / 2000.0;
            if self.f(t) <= 0.0 {
                return Err(Error::Domain(format!(
                    "f vanishes in the interior at t = {t}"
                )));
            }
        }
        for (end, inward) in [(lo, 1.0), (hi, -1.0)] {
            if self.vanishes_at(end) {
                let probe = |e: f64| {
                    self.inv_f_integral(end + inward * e, end + inward * 0.1 * (hi - lo))
                        .abs()
                };
                let (a, b) = (probe(1e-4), probe(1e-8));
                if !(b > a + 1.0) {
                    return Err(Error::Domain(format!(
                        "1/f appears integrable toward the zero at t = {end}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Natural interval of each catalog model.
pub fn natural_interval(tag: ModelTag) -> [f64; 2] {
    match tag {
        ModelTag::Sin => [0.0, PI],
        ModelTag::Id | ModelTag::Sinh => [0.0, f64::INFINITY],
        ModelTag::Const | ModelTag::Exp | ModelTag::Cosh => [f64::NEG_INFINITY, f64::INFINITY],
    }
}

/// Curvature parameters attached to a warper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureBudget {
    pub kappa: f64,
    #[serde(with = "crate::serde_ext")]
    pub eta: f64,
    pub eta_is_sup: bool,
    /// Set when the numerical supremum sits on an artificial truncation edge.
    #[serde(default)]
    pub truncated: bool,
}

/// Residual sweep of `f'' + kappa f` (Riemannian) or `f'' - kappa f` (Lorentzian).
///
/// Residuals are scaled by `max(1, |f|)` so exponentially large warpers are judged
/// relative to their size.
pub fn check_warper(f: &WarpingFunction, kappa: f64, tol: f64) -> Result<DensityCheckResult> {
    const NODES: usize = 2001;
    let [lo, hi] = f.truncated()?;
    let sign = f.signature.sign();
    let mut min_slack = f64::INFINITY;
    let mut witness = Witness::None;
    let mut witness_f = f64::INFINITY;
    for i in 0..NODES {
        let t = lo + (hi - lo) * i as f64 / (NODES - 1) as f64;
        let (v, _, v2) = f.eval(t);
        let res = (v2 + sign * kappa * v) / v.abs().max(1.0);
        // near-ties go to the smallest |f|, where the scaling is mildest
        let tie = (-res - min_slack).abs() <= 1e-12 * min_slack.abs().max(1.0);
        if -res < min_slack && !tie || tie && v.abs() < witness_f {
            min_slack = min_slack.min(-res);
            witness = Witness::Point { t };
            witness_f = v.abs();
        }
    }
    // polish the worst node between its neighbours
    if let Witness::Point { t } = witness {
        let step = (hi - lo) / (NODES - 1) as f64;
        let slack = |t: f64| {
            let (v, _, v2) = f.eval(t);
            -(v2 + sign * kappa * v) / v.abs().max(1.0)
        };
        let (mut a, mut b) = ((t - step).max(lo), (t + step).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if slack(c) < slack(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let tm = 0.5 * (a + b);
        let sm = slack(tm);
        if sm.is_finite() && sm < min_slack - 1e-12 * min_slack.abs().max(1.0) {
            min_slack = sm;
            witness = Witness::Point { t: tm };
        }
    }
    Ok(DensityCheckResult::from_slack(
        min_slack, witness, tol, NODES,
    ))
}

fn closed_form_eta(tag: ModelTag, sig: Signature, k: f64) -> f64 {
    let inf = f64::INFINITY;
    match (tag, sig) {
        (ModelTag::Const, _) => k,
        (ModelTag::Id, s) => {
            if k > 0.0 {
                inf
            } else {
                s.sign()
            }
        }
        (ModelTag::Sin, Signature::Riemannian) => k.max(1.0),
        (ModelTag::Sin, Signature::Lorentzian) => k.max(-1.0),
        (ModelTag::Sinh, Signature::Riemannian) => {
            if k <= -1.0 {
                1.0
            } else {
                inf
            }
        }
        (ModelTag::Sinh, Signature::Lorentzian) => {
            if k <= 1.0 {
                -1.0
            } else {
                inf
            }
        }
        (ModelTag::Cosh, Signature::Riemannian) => {
            if k <= -1.0 {
                k
            } else {
                inf
            }
        }
        (ModelTag::Cosh, Signature::Lorentzian) => {
            if k <= 1.0 {
                k
            } else {
                inf
            }
        }
        (ModelTag::Exp, Signature::Riemannian) => {
            if k <= -1.0 {
                0.0
            } else {
                inf
            }
        }
        (ModelTag::Exp, Signature::Lorentzian) => {
            if k <= 1.0 {
                0.0
            } else {
                inf
            }
        }
    }
}

/// `sup (+-(f')^2 + kappa f^2)` over the base interval.
///
/// Unperturbed catalog models on their natural intervals use closed forms; anything
/// else is sampled on 2001 nodes of the truncated interval and refined by golden
/// section around the best node.
pub fn compute_eta(f: &WarpingFunction, kappa: f64) -> CurvatureBudget {
    if let Some(tag) = f.natural_model() {
        return CurvatureBudget {
            kappa,
            eta: closed_form_eta(tag, f.signature, kappa),
            eta_is_sup: true,
            truncated: false,
        };
    }
    const NODES: usize = 2001;
    let sign = f.signature.sign();
    let e = |t: f64| {
        let (v, v1, _) = f.eval(t);
        sign * v1 * v1 + kappa * v * v
    };
    let Ok([lo, hi]) = f.truncated() else {
        return CurvatureBudget {
            kappa,
            eta: f64::NAN,
            eta_is_sup: false,
            truncated: true,
        };
    };
    let h = (hi - lo) / (NODES - 1) as f64;
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..NODES {
        let v = e(lo + i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let a = lo + best_i.saturating_sub(1) as f64 * h;
    let b = (lo + (best_i + 1) as f64 * h).min(hi);
    let (_, refined) = quad::golden_max(e, a, b, 1e-12 * (1.0 + (hi - lo)));
    let eta = best.max(refined);
    let at_artificial_edge =
        (best_i == 0 && f.interval[0] < lo) || (best_i == NODES - 1 && f.interval[1] > hi);
    CurvatureBudget {
        kappa,
        eta,
        eta_is_sup: true,
        truncated: at_artificial_edge,
    }
}

/// The twelve model cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CatalogEntry {
    L1,
    L2,
    L3,
    L4,
    L5,
    L6,
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

impl CatalogEntry {
    pub const ALL: [CatalogEntry; 12] = [
        CatalogEntry::L1,
        CatalogEntry::L2,
        CatalogEntry::L3,
        CatalogEntry::L4,
        CatalogEntry::L5,
        CatalogEntry::L6,
        CatalogEntry::R1,
        CatalogEntry::R2,
        CatalogEntry::R3,
        CatalogEntry::R4,
        CatalogEntry::R5,
        CatalogEntry::R6,
    ];

    pub fn signature(self) -> Signature {
        use CatalogEntry::*;
        match self {
            L1 | L2 | L3 | L4 | L5 | L6 => Signature::Lorentzian,
            _ => Signature::Riemannian,
        }
    }

    pub fn tag(self) -> ModelTag {
        use CatalogEntry::*;
        match self {
            L1 | R1 => ModelTag::Sin,
            L2 | R2 => ModelTag::Id,
            L3 | R3 => ModelTag::Const,
            L4 | R4 => ModelTag::Sinh,
            L5 | R5 => ModelTag::Exp,
            L6 | R6 => ModelTag::Cosh,
        }
    }

    /// Table values `(kappa, eta)`.
    pub fn kappa_eta(self) -> (f64, f64) {
        use CatalogEntry::*;
        match self {
            L1 => (-1.0, -1.0),
            L2 => (0.0, -1.0),
            L3 => (0.0, 0.0),
            L4 => (1.0, -1.0),
            L5 => (1.0, 0.0),
            L6 => (1.0, 1.0),
            R1 => (1.0, 1.0),
            R2 => (0.0, 1.0),
            R3 => (0.0, 0.0),
            R4 => (-1.0, 1.0),
            R5 => (-1.0, 0.0),
            R6 => (-1.0, -1.0),
        }
    }

    pub fn name(self) -> &'static str {
        use CatalogEntry::*;
        match self {
            L1 => "L1",
            L2 => "L2",
            L3 => "L3",
            L4 => "L4",
            L5 => "L5",
            L6 => "L6",
            R1 => "R1",
            R2 => "R2",
            R3 => "R3",
            R4 => "R4",
            R5 => "R5",
            R6 => "R6",
        }
    }

    /// Interval written the way the tables write it.
    pub fn interval_label(self) -> &'static str {
        match self.tag() {
            ModelTag::Sin => "[0,pi]",
            ModelTag::Id | ModelTag::Sinh => "[0,inf)",
            _ => "R",
        }
    }

    /// Warper label: `1` for the constant, the function name otherwise.
    pub fn warper_label(self) -> &'static str {
        match self.tag() {
            ModelTag::Const => "1",
            t => t.name(),
        }
    }
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CatalogEntry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CatalogEntry::ALL
            .iter()
            .copied()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Warper and budget of a catalog row.
pub fn catalog(entry: CatalogEntry) -> (WarpingFunction, CurvatureBudget) {
    let tag = entry.tag();
    let w = WarpingFunction::model(tag, natural_interval(tag), entry.signature());
    let (kappa, eta) = entry.kappa_eta();
    (
        w,
        CurvatureBudget {
            kappa,
            eta,
            eta_is_sup: true,
            truncated: false,
        },
    )
}

/// Parses a catalog tag and returns its row.
pub fn catalog_by_name(name: &str) -> Result<(WarpingFunction, CurvatureBudget)> {
    Ok(catalog(name.parse()?))
}

/// Weighted Ricci form of the sheet evaluated on one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetRicci {
    pub point: (f64, f64),
    pub direction: (f64, f64),
    pub value_ricci: f64,
    pub value_metric: f64,
}

/// Ricci form of `I x_f [a,b]` with weight `f^{N-1} h` and dimension `N + 1`.
///
/// Components: `R_tt = -N f''/f`, `R_tr = 0`,
/// `R_rr = -(N-1) g''/g - (e f''/f + (N-1) e f'^2/f^2) f^2` where `g = h^{1/(N-1)}`
/// and `e = +1` (Riemannian) or `-1` (Lorentzian).
pub fn sheet_ricci_n(
    f: &WarpingFunction,
    h: &DensityProfile,
    n: f64,
    point: (f64, f64),
    direction: (f64, f64),
) -> Result<SheetRicci> {
    let (t, r) = point;
    let (a, b) = direction;
    let (v, v1, v2) = f.eval(t);
    if v <= 0.0 {
        return Err(Error::SingularPoint(t));
    }
    let e = f.signature.sign();
    let glog = h.root_log_second(r);
    let r_tt = -n * v2 / v;
    let r_rr = -(n - 1.0) * glog - (e * v2 / v + (n - 1.0) * e * v1 * v1 / (v * v)) * v * v;
    Ok(SheetRicci {
        point,
        direction,
        value_ricci: a * a * r_tt + b * b * r_rr,
        value_metric: e * a * a + v * v * b * b,
    })
}

/// Worst margin of `Ric >= kappa N g` at a point over sampled directions
/// (timelike rays for Lorentzian sheets, all rays otherwise).
pub fn ricci_comparison_slack(
    f: &WarpingFunction,
    h: &DensityProfile,
    n: f64,
    kappa: f64,
    point: (f64, f64),
) -> Result<f64> {
    const RAYS: usize = 64;
    const MARGIN: f64 = 1e-3;
    let fv = f.f(point.0);
    let mut worst = f64::INFINITY;
    for k in 0..RAYS {
        let dir = match f.signature {
            Signature::Lorentzian => {
                let v = -1.0 + MARGIN + (2.0 - 2.0 * MARGIN) * k as f64 / (RAYS - 1) as f64;
                (1.0, v / fv)
            }
            Signature::Riemannian => {
                let th = PI * k as f64 / RAYS as f64;
                (th.cos(), th.sin() / fv)
            }
        };
        let s = sheet_ricci_n(f, h, n, point, dir)?;
        worst = worst.min(s.value_ricci - kappa * n * s.value_metric);
    }
    Ok(worst)
}

/// Negative semidefiniteness of `Hess u + kappa u g` for `u = f(t) g(r)`, the root
/// of `G = f^{N-1} h`, using the Christoffel terms of the warped sheet. Densities
/// without closed-form derivatives are differenced.
pub fn check_g_concavity(
    f: &WarpingFunction,
    h: &DensityProfile,
    kappa: f64,
    n: f64,
    tol: f64,
) -> Result<DensityCheckResult> {
    const GRID: usize = 41;
    const COLLAR: f64 = 1e-3;
    if !(n > 1.0) {
        return Err(Error::Domain(format!("N = {n} must exceed 1")));
    }
    let h = h.with_n(n)?;
    let [t_lo, t_hi] = f.collared(COLLAR)?;
    let [r_lo, r_hi] = [h.a(), h.b()];
    let rc = COLLAR * (r_hi - r_lo);
    let (r_lo, r_hi) = (r_lo + rc, r_hi - rc);
    let e = f.signature.sign();
    let u = |t: f64, r: f64| f.f(t) * h.root(r);
    let dr = 1e-4 * (r_hi - r_lo).min(1.0);
    let g_derivs = |r: f64| {
        h.root_derivs(r).unwrap_or_else(|| {
            let (gm, g0, gp) = (h.root(r - dr), h.root(r), h.root(r + dr));
            (g0, (gp - gm) / (2.0 * dr), (gp - 2.0 * g0 + gm) / (dr * dr))
        })
    };

    let mut points = Vec::with_capacity(GRID * GRID);
    let mut umax: f64 = 0.0;
    for i in 0..GRID {
        for j in 0..GRID {
            let t = t_lo + (t_hi - t_lo) * i as f64 / (GRID - 1) as f64;
            let r = r_lo + (r_hi - r_lo) * j as f64 / (GRID - 1) as f64;
            umax = umax.max(u(t, r).abs());
            points.push((t, r));
        }
    }
    let norm = 1.0 + umax;
    let mut min_slack = f64::INFINITY;
    let mut witness = Witness::None;
    for &(t, r) in &points {
        let (fv, f1, f2) = f.eval(t);
        if fv <= 0.0 {
            continue;
        }
        let (g0, g1, g2) = g_derivs(r);
        let u0 = fv * g0;
        let (u_t, u_r) = (f1 * g0, fv * g1);
        let (u_tt, u_tr, u_rr) = (f2 * g0, f1 * g1, fv * g2);
        // Christoffel symbols of e dt^2 + f^2 dr^2
        let gamma_r_tr = f1 / fv;
        let gamma_t_rr = -e * fv * f1;
        let m_tt = u_tt + kappa * u0 * e;
        let m_tr = u_tr - gamma_r_tr * u_r;
        let m_rr = u_rr - gamma_t_rr * u_t + kappa * u0 * fv * fv;
        // orthonormal frame (d_t, d_r / f)
        let (p, q, s) = (m_tt, m_tr / fv, m_rr / (fv * fv));
        let lam_max = 0.5 * (p + s) + (0.25 * (p - s) * (p - s) + q * q).sqrt();
        let th = 0.5 * (2.0 * q).atan2(p - s);
        let slack = -lam_max / norm;
        if slack < min_slack {
            min_slack = slack;
            witness = Witness::SheetPoint {
                t,
                r,
                a: th.cos(),
                b: th.sin() / fv,
            };
        }
    }
    Ok(DensityCheckResult::from_slack(
        min_slack,
        witness,
        tol,
        points.len(),
    ))
}

/// `(log f)'` at `r`, the mean curvature of a slice divided by `N`.
pub fn log_derivative(f: &WarpingFunction, r: f64) -> f64 {
    let (v, v1, _) = f.eval(r);
    v1 / v
}
