//! Minimizing geodesics of a Riemannian sheet: lattice shortest path for the
//! global picture, then discrete-energy minimization on a polyline refined from
//! coarse to fine.

use crate::error::{Error, Result};
use crate::warp::WarpingFunction;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricOptions {
    /// Lattice nodes per side.
    pub lattice: usize,
    /// Final polyline segments; `0` means `lattice / 4`.
    #[serde(default)]
    pub segments: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            lattice: 400,
            segments: 0,
        }
    }
}

impl MetricOptions {
    pub fn with_lattice(lattice: usize) -> Self {
        Self {
            lattice,
            segments: 0,
        }
    }

    fn final_segments(&self) -> usize {
        if self.segments > 0 {
            self.segments
        } else {
            (self.lattice / 4).max(8)
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricSolution {
    /// Polyline `(t, rho)` with nearly equal segment lengths.
    pub nodes: Vec<(f64, f64)>,
    pub length: f64,
}

/// Squared midpoint length of a chart segment: `dt^2 + f(t_mid)^2 dr^2`.
fn seg_q(w: &WarpingFunction, a: (f64, f64), b: (f64, f64)) -> f64 {
    let f = w.f(0.5 * (a.0 + b.0));
    let (dt, dr) = (b.0 - a.0, b.1 - a.1);
    dt * dt + f * f * dr * dr
}

fn polyline_length(w: &WarpingFunction, nodes: &[(f64, f64)]) -> f64 {
    nodes.windows(2).map(|p| seg_q(w, p[0], p[1]).sqrt()).sum()
}

fn energy(w: &WarpingFunction, nodes: &[(f64, f64)]) -> f64 {
    nodes.windows(2).map(|p| seg_q(w, p[0], p[1])).sum()
}

type M2 = [[f64; 2]; 2];

fn inv2(m: &M2) -> Option<M2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(m[0][0] > 0.0 && det > 0.0) {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut o = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    o
}

fn mulv(a: &M2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

fn transpose(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Solves the block tridiagonal system `(H + mu I) x = -g`; `None` if not positive definite.
fn block_solve(diag: &[M2], upper: &[M2], grad: &[[f64; 2]], mu: f64) -> Option<Vec<[f64; 2]>> {
    let m = diag.len();
    let mut chat: Vec<M2> = Vec::with_capacity(m);
    let mut ghat: Vec<[f64; 2]> = Vec::with_capacity(m);
    for i in 0..m {
        let mut d = diag[i];
        d[0][0] += mu;
        d[1][1] += mu;
        let mut rhs = [-grad[i][0], -grad[i][1]];
        if i > 0 {
            let a = transpose(&upper[i - 1]);
            let ac = mul(&a, &chat[i - 1]);
            for r in 0..2 {
                for c in 0..2 {
                    d[r][c] -= ac[r][c];
                }
            }
            let ag = mulv(&a, ghat[i - 1]);
            rhs = [rhs[0] - ag[0], rhs[1] - ag[1]];
        }
        let di = inv2(&d)?;
        chat.push(if i + 1 < m {
            mul(&di, &upper[i])
        } else {
            [[0.0; 2]; 2]
        });
        ghat.push(mulv(&di, rhs));
    }
    let mut x = vec![[0.0; 2]; m];
    for i in (0..m).rev() {
        x[i] = ghat[i];
        if i + 1 < m {
            let cx = mulv(&chat[i], x[i + 1]);
            x[i] = [x[i][0] - cx[0], x[i][1] - cx[1]];
        }
    }
    Some(x)
}

/// Projected damped Newton on the discrete energy with fixed endpoints.
fn minimize_energy(w: &WarpingFunction, nodes: &mut [(f64, f64)], bounds: (f64, f64)) {
    let k = nodes.len() - 1;
    if k < 2 {
        return;
    }
    let m = k - 1;
    let scale = polyline_length(w, nodes).max(1e-300);
    let mut mu = 0.0;
    for _ in 0..100 {
        let mut diag = vec![[[0.0; 2]; 2]; m];
        let mut upper = vec![[[0.0; 2]; 2]; m.saturating_sub(1)];
        let mut grad = vec![[0.0; 2]; m];
        for s in 0..k {
            let (a, b) = (nodes[s], nodes[s + 1]);
            let (f, f1, f2) = w.eval(0.5 * (a.0 + b.0));
            let (ff, ff1, ff2) = (f * f, 2.0 * f * f1, 2.0 * (f1 * f1 + f * f2));
            let (dt, dr) = (b.0 - a.0, b.1 - a.1);
            let htt = 2.0 + 0.25 * ff2 * dr * dr;
            let ga = [-2.0 * dt + 0.5 * ff1 * dr * dr, -2.0 * ff * dr];
            let gb = [2.0 * dt + 0.5 * ff1 * dr * dr, 2.0 * ff * dr];
            let haa = [[htt, -ff1 * dr], [-ff1 * dr, 2.0 * ff]];
            let hbb = [[htt, ff1 * dr], [ff1 * dr, 2.0 * ff]];
            let hab = [
                [-2.0 + 0.25 * ff2 * dr * dr, ff1 * dr],
                [-ff1 * dr, -2.0 * ff],
            ];
            // node s is unknown index s - 1
            if s >= 1 {
                let i = s - 1;
                for r in 0..2 {
                    grad[i][r] += ga[r];
                    for c in 0..2 {
                        diag[i][r][c] += haa[r][c];
                    }
                }
            }
            if s < m {
                let j = s;
                for r in 0..2 {
                    grad[j][r] += gb[r];
                    for c in 0..2 {
                        diag[j][r][c] += hbb[r][c];
                    }
                }
                if s >= 1 {
                    upper[s - 1] = hab;
                }
            }
        }
        // freeze base coordinates held at a bound and pushed outward
        for i in 0..m {
            let t = nodes[i + 1].0;
            let at_lo = t <= bounds.0 && grad[i][0] > 0.0;
            let at_hi = t >= bounds.1 && grad[i][0] < 0.0;
            if at_lo || at_hi {
                grad[i][0] = 0.0;
                diag[i][0] = [1.0, 0.0];
                diag[i][1][0] = 0.0;
                if i > 0 {
                    upper[i - 1][0][0] = 0.0;
                    upper[i - 1][1][0] = 0.0;
                }
                if i < m - 1 {
                    upper[i][0] = [0.0, 0.0];
                }
            }
        }
        let e0 = energy(w, nodes);
        let step = loop {
            match block_solve(&diag, &upper, &grad, mu) {
                Some(x) => break x,
                None => mu = if mu == 0.0 { 1e-8 } else { mu * 10.0 },
            }
            if mu > 1e12 {
                return;
            }
        };
        let mut alpha = 1.0;
        let trial = |alpha: f64| -> Vec<(f64, f64)> {
            let mut out = nodes.to_vec();
            for i in 0..m {
                let (t, r) = out[i + 1];
                out[i + 1] = (
                    (t + alpha * step[i][0]).clamp(bounds.0, bounds.1),
                    r + alpha * step[i][1],
                );
            }
            out
        };
        let mut accepted = None;
        for _ in 0..30 {
            let cand = trial(alpha);
            if energy(w, &cand) <= e0 {
                accepted = Some(cand);
                break;
            }
            alpha *= 0.5;
        }
        let Some(cand) = accepted else { return };
        let moved = cand
            .iter()
            .zip(nodes.iter())
            .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
            .fold(0.0, f64::max);
        nodes.copy_from_slice(&cand);
        mu *= 0.1;
        if mu < 1e-14 {
            mu = 0.0;
        }
        if moved <= 1e-14 * scale.max(1.0) {
            break;
        }
    }
}

/// Resamples a polyline to `k + 1` nodes equally spaced in warped length.
fn resample(w: &WarpingFunction, path: &[(f64, f64)], k: usize) -> Vec<(f64, f64)> {
    let mut cum = vec![0.0];
    for p in path.windows(2) {
        cum.push(cum.last().unwrap() + seg_q(w, p[0], p[1]).sqrt());
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(k + 1);
    let mut j = 0;
    for i in 0..=k {
        let target = total * i as f64 / k as f64;
        while j + 2 < cum.len() && cum[j + 1] < target {
            j += 1;
        }
        let span = cum[j + 1] - cum[j];
        let u = if span > 0.0 {
            ((target - cum[j]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (path[j], path[j + 1]);
        out.push((a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1)));
    }
    out[0] = path[0];
    out[k] = *path.last().unwrap();
    out
}

fn refine(nodes: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2 * nodes.len());
    for p in nodes.windows(2) {
        out.push(p[0]);
        out.push((0.5 * (p[0].0 + p[1].0), 0.5 * (p[0].1 + p[1].1)));
    }
    out.push(*nodes.last().unwrap());
    out
}

fn lattice_path(
    w: &WarpingFunction,
    t0: f64,
    t1: f64,
    d: f64,
    n: usize,
    bounds: (f64, f64),
) -> Vec<(f64, f64)> {
    let (tl, th) = bounds;
    let ht = (th - tl) / (n - 1) as f64;
    let hr = d / (n - 1) as f64;
    let ft: Vec<f64> = (0..n).map(|i| w.f(tl + i as f64 * ht)).collect();
    let fm: Vec<f64> = (0..n - 1)
        .map(|i| w.f(tl + (i as f64 + 0.5) * ht))
        .collect();
    let snap = |t: f64| (((t - tl) / ht).round() as usize).min(n - 1);
    let (si, ti) = (snap(t0), snap(t1));
    let start = si * n;
    let goal = ti * n + (n - 1);
    let mut dist = vec![f64::INFINITY; n * n];
    let mut prev = vec![usize::MAX; n * n];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Reverse((0u64, start)));
    while let Some(Reverse((key, u))) = heap.pop() {
        let du = f64::from_bits(key);
        if du > dist[u] {
            continue;
        }
        if u == goal {
            break;
        }
        let (i, j) = (u / n, u % n);
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                let wgt = match (di, dj) {
                    (_, 0) => ht,
                    (0, _) => ft[i] * hr,
                    _ => {
                        let f = fm[i.min(ni)];
                        (ht * ht + f * f * hr * hr).sqrt()
                    }
                };
                let v = ni * n + nj;
                let nd = du + wgt;
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(Reverse((nd.to_bits(), v)));
                }
            }
        }
    }
    let mut path = Vec::new();
    let mut u = goal;
    while u != usize::MAX {
        path.push((tl + (u / n) as f64 * ht, (u % n) as f64 * hr));
        u = prev[u];
    }
    path.reverse();
    if path.len() < 2 {
        path = vec![(t0, 0.0), (t1, d)];
    }
    path[0] = (t0, 0.0);
    let last = path.len() - 1;
    path[last] = (t1, d);
    path
}

impl MetricSolution {
    pub fn solve(
        w: &WarpingFunction,
        t0: f64,
        t1: f64,
        d: f64,
        opts: &MetricOptions,
    ) -> Result<Self> {
        if opts.lattice < 3 {
            return Err(Error::Grid(format!(
                "lattice of {} nodes per side",
                opts.lattice
            )));
        }
        let [ilo, ihi] = w.interval;
        // bound on the length: travel in base to t*, across the fiber, then back
        let crude = (t1 - t0).abs() + w.f(t0).min(w.f(t1)) * d;
        let (lo_s, hi_s) = (
            (t0.min(t1) - 0.5 * crude).max(ilo),
            (t0.max(t1) + 0.5 * crude).min(ihi),
        );
        let mut bound = crude;
        for i in 0..=512 {
            let ts = lo_s + (hi_s - lo_s) * i as f64 / 512.0;
            bound = bound.min((t0 - ts).abs() + w.f(ts) * d + (t1 - ts).abs());
        }
        let bounds = (
            (0.5 * (t0 + t1 - bound)).max(ilo).min(t0.min(t1)),
            (0.5 * (t0 + t1 + bound)).min(ihi).max(t0.max(t1)),
        );
        let coarse = lattice_path(w, t0, t1, d, opts.lattice, bounds);
        let target = opts.final_segments();
        let mut k = 8.min(target);
        let mut nodes = resample(w, &coarse, k);
        minimize_energy(w, &mut nodes, bounds);
        while k < target {
            nodes = refine(&nodes);
            k *= 2;
            minimize_energy(w, &mut nodes, bounds);
        }
        let mut length = polyline_length(w, &nodes);
        // the apex is a single point, so passing through it costs only base travel
        for apex in [ilo, ihi] {
            if apex.is_finite() && w.vanishes_at(apex) {
                let via = (t0 - apex).abs() + (t1 - apex).abs();
                if via < length {
                    let radial = [(t0, 0.0), (apex, 0.0), (apex, d), (t1, d)];
                    nodes = resample(w, &radial, target);
                    length = via;
                }
            }
        }
        if !length.is_finite() {
            return Err(Error::Convergence {
                message: "metric geodesic length is not finite".into(),
                history: vec![],
            });
        }
        Ok(Self { nodes, length })
    }

    pub fn point_at(&self, s: f64) -> (f64, f64) {
        let k = self.nodes.len() - 1;
        let x = s.clamp(0.0, 1.0) * k as f64;
        let i = (x.floor() as usize).min(k - 1);
        let u = x - i as f64;
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1))
    }

    /// Average of `f^2 dr/ds` over the segments.
    pub fn shooting_constant(&self, w: &WarpingFunction) -> f64 {
        let k = self.nodes.len() - 1;
        let mut acc = 0.0;
        let mut count = 0;
        for p in self.nodes.windows(2) {
            let len = seg_q(w, p[0], p[1]).sqrt();
            if len > 0.0 {
                let f = w.f(0.5 * (p[0].0 + p[1].0));
                acc += f * f * (p[1].1 - p[0].1) / len;
                count += 1;
            }
        }
        if count == 0 || k == 0 {
            0.0
        } else {
            acc / count as f64
        }
    }
}

/// Unit-speed geodesic from `(t0, 0)` leaving at `angle` from the base direction,
/// followed for `length`. Returns the endpoint `(t, r)`.
pub fn exp_map(w: &WarpingFunction, t0: f64, angle: f64, length: f64, steps: usize) -> (f64, f64) {
    let f0 = w.f(t0);
    let c = f0 * angle.sin();
    let rhs = |t: f64, p: f64| -> (f64, f64, f64) {
        let (f, f1, _) = w.eval(t);
        (p, c * c * f1 / (f * f * f), c / (f * f))
    };
    let h = length / steps as f64;
    let (mut t, mut p, mut r) = (t0, angle.cos(), 0.0);
    for _ in 0..steps {
        let k1 = rhs(t, p);
        let k2 = rhs(t + 0.5 * h * k1.0, p + 0.5 * h * k1.1);
        let k3 = rhs(t + 0.5 * h * k2.0, p + 0.5 * h * k2.1);
        let k4 = rhs(t + h * k3.0, p + h * k3.1);
        t += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        p += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        r += h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
    }
    (t, r)
}

/// Newton on `(angle, length)` so that the exponential map hits `(t1, d)`.
pub fn shoot_metric(
    w: &WarpingFunction,
    t0: f64,
    t1: f64,
    d: f64,
    guess: (f64, f64),
    steps: usize,
) -> Result<(f64, f64)> {
    let (mut a, mut l) = guess;
    let mut history = Vec::new();
    for _ in 0..50 {
        let (t, r) = exp_map(w, t0, a, l, steps);
        let (e0, e1) = (t - t1, r - d);
        let res = e0.hypot(e1);
        history.push((a, res));
        if res <= 1e-11 * (1.0 + l) {
            return Ok((a, l));
        }
        let ha = 1e-7;
        let hl = 1e-7 * l.max(1.0);
        let (ta, ra) = exp_map(w, t0, a + ha, l, steps);
        let (tl, rl) = exp_map(w, t0, a, l + hl, steps);
        let j = [
            [(ta - t) / ha, (tl - t) / hl],
            [(ra - r) / ha, (rl - r) / hl],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = (j[1][1] * e0 - j[0][1] * e1) / det;
        let dl = (-j[1][0] * e0 + j[0][0] * e1) / det;
        a -= da;
        l = (l - dl).max(1e-12);
    }
    Err(Error::Convergence {
        message: format!("metric shooting from t = {t0} to ({t1}, {d}) failed"),
        history,
    })
}
