//! Timelike maximizers on a Lorentzian sheet by shooting on the conserved constant.
//!
//! Parametrized by the base, a maximizer from `(t0, 0)` to `(t1, d)` has
//! `dr/dt = c / (f sqrt(f^2 + c^2))` and proper time density `f / sqrt(f^2 + c^2)`.
//! The displacement `D(c)` is increasing and concave in `c`, so Newton started
//! from the left converges monotonically; a bisection bracket guards it anyway.

use crate::error::{Error, Result};
use crate::quad::{adaptive_panels, gk15_nodes};
use crate::warp::WarpingFunction;

const PANEL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

#[derive(Debug, Clone)]
pub struct TimelikeSolution {
    pub t0: f64,
    pub t1: f64,
    pub d: f64,
    /// Conserved `f^2 v_beta`.
    pub c: f64,
    pub tau: f64,
    panels: Vec<(f64, f64)>,
    /// Quadrature nodes `(t, weight, f(t))`, fifteen per panel.
    nodes: Vec<(f64, f64, f64)>,
    cum_tau: Vec<f64>,
    cum_r: Vec<f64>,
}

fn tau_density(f: f64, c: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    let q = f / c;
    q / (1.0 + q * q).sqrt()
}

fn r_density(f: f64, c: f64) -> f64 {
    c / (f * (f * f + c * c).sqrt())
}

impl TimelikeSolution {
    /// Requires `t0 < t1`, `d > 0`, `f > 0` on `[t0, t1]` and `d < int 1/f`.
    pub fn solve(w: &WarpingFunction, t0: f64, t1: f64, d: f64) -> Result<Self> {
        let inv = |t: f64| 1.0 / w.f(t);
        let inv2 = |t: f64| {
            let v = w.f(t);
            1.0 / (v * v)
        };
        let panels = adaptive_panels(&[&inv, &inv2], t0, t1, PANEL_TOL);
        let nodes: Vec<(f64, f64, f64)> = panels
            .iter()
            .flat_map(|&(a, b)| gk15_nodes(a, b))
            .map(|(t, wt)| (t, wt, w.f(t)))
            .collect();
        let disp = |c: f64| -> (f64, f64) {
            let mut v = 0.0;
            let mut dv = 0.0;
            for &(_, wt, f) in &nodes {
                let s = (f * f + c * c).sqrt();
                v += wt * c / (f * s);
                dv += wt * f / (s * s * s);
            }
            (v, dv)
        };
        let (_, slope0) = disp(0.0);
        let mut c = d / slope0;
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut history = Vec::new();
        let mut done = false;
        for _ in 0..MAX_ITER {
            let (v, dv) = disp(c);
            let res = v - d;
            history.push((c, res));
            if res < 0.0 {
                lo = lo.max(c);
            } else {
                hi = hi.min(c);
            }
            if res.abs() <= 4.0 * f64::EPSILON * d || (hi.is_finite() && hi - lo <= 1e-15 * hi) {
                done = true;
                break;
            }
            let mut next = c - res / dv;
            if !(next > lo && next < hi) {
                next = if hi.is_finite() {
                    if lo > 0.0 {
                        (lo * hi).sqrt()
                    } else {
                        0.5 * hi
                    }
                } else {
                    4.0 * c.max(lo)
                };
            }
            if next == c {
                done = true;
                break;
            }
            c = next;
        }
        if !done {
            return Err(Error::Convergence {
                message: format!("shooting on [{t0}, {t1}] with d = {d} did not converge"),
                history,
            });
        }
        let mut cum_tau = Vec::with_capacity(panels.len() + 1);
        let mut cum_r = Vec::with_capacity(panels.len() + 1);
        let (mut acc_tau, mut acc_r) = (0.0, 0.0);
        cum_tau.push(0.0);
        cum_r.push(0.0);
        for chunk in nodes.chunks(15) {
            for &(_, wt, f) in chunk {
                acc_tau += wt * tau_density(f, c);
                acc_r += wt * r_density(f, c);
            }
            cum_tau.push(acc_tau);
            cum_r.push(acc_r);
        }
        Ok(Self {
            t0,
            t1,
            d,
            c,
            tau: acc_tau,
            panels,
            nodes,
            cum_tau,
            cum_r,
        })
    }

    /// Number of quadrature nodes carried by the solution.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `(t, rho)` at proper-time fraction `s`.
    pub fn point_at(&self, w: &WarpingFunction, s: f64) -> (f64, f64) {
        if s <= 0.0 {
            return (self.t0, 0.0);
        }
        if s >= 1.0 {
            return (self.t1, self.d);
        }
        let target = s * self.tau;
        let p = match self.cum_tau.partition_point(|&v| v <= target) {
            0 => 0,
            k => (k - 1).min(self.panels.len() - 1),
        };
        let (a, b) = self.panels[p];
        let want = target - self.cum_tau[p];
        let span = self.cum_tau[p + 1] - self.cum_tau[p];
        let partial = |t: f64, dens: &dyn Fn(f64) -> f64| -> f64 {
            if t <= a {
                return 0.0;
            }
            gk15_nodes(a, t)
                .iter()
                .map(|&(x, wt)| wt * dens(w.f(x)))
                .sum()
        };
        let c = self.c;
        let mut t = a + (b - a) * (want / span).clamp(0.0, 1.0);
        for _ in 0..40 {
            let g = partial(t, &|f| tau_density(f, c)) - want;
            let next = (t - g / tau_density(w.f(t), c)).clamp(a, b);
            let step = (next - t).abs();
            t = next;
            if step <= 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        let rho = self.cum_r[p] + partial(t, &|f| r_density(f, c));
        (t, rho.min(self.d))
    }
}
