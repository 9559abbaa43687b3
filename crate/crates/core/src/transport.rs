//! Exact discrete optimal transport: Wasserstein and Lorentz-Wasserstein values,
//! cyclical monotonicity certificates and displacement interpolation.

use crate::cone_geom::{ConeGeodesic, ConePoint, ConeSpec, MetricOptions};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteMeasure {
    pub support: Vec<ConePoint>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<ConePoint>, weights: Vec<f64>) -> Result<Self> {
        let m = Self { support, weights };
        m.validate()?;
        Ok(m)
    }

    pub fn dirac(p: ConePoint) -> Self {
        Self {
            support: vec![p],
            weights: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.is_empty() || self.support.len() != self.weights.len() {
            return Err(Error::InvalidMeasure(
                "support and weights must be nonempty and aligned".into(),
            ));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidMeasure("negative or missing weight".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub matrix: Vec<Vec<f64>>,
    /// Attained functional: `W_p`, `l_p`, or `-inf` when no causal coupling exists.
    #[serde(with = "crate::serde_ext")]
    pub value: f64,
    pub optimal: bool,
    pub causal_feasible: bool,
}

impl TransportPlan {
    /// Sparse `(i, j, mass)` entries with positive mass.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, &m) in row.iter().enumerate() {
                if m > MASS_TOL {
                    out.push((i, j, m));
                }
            }
        }
        out
    }

    /// Largest violation of the coupling constraints.
    pub fn marginal_error(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.matrix.iter().enumerate() {
            worst = worst.max((row.iter().sum::<f64>() - a[i]).abs());
        }
        for (j, &bj) in b.iter().enumerate() {
            worst = worst.max((self.matrix.iter().map(|r| r[j]).sum::<f64>() - bj).abs());
        }
        worst
    }
}

/// Minimizes `sum c_ij pi_ij` over couplings of `a` and `b` avoiding `None` cells.
///
/// Successive shortest paths with Dijkstra potentials on the bipartite network.
/// Returns `None` when the masked problem has no coupling.
pub fn min_cost_coupling(
    a: &[f64],
    b: &[f64],
    cost: &[Vec<Option<f64>>],
) -> Option<(Vec<Vec<f64>>, f64)> {
    let (m, n) = (a.len(), b.len());
    let lo = cost
        .iter()
        .flatten()
        .flatten()
        .fold(f64::INFINITY, |x, &c| x.min(c));
    let shift = if lo.is_finite() { lo.min(0.0) } else { 0.0 };
    let c = |i: usize, j: usize| cost[i][j].map(|v| v - shift);
    let mut flow = vec![vec![0.0f64; n]; m];
    let mut supply: Vec<f64> = a.to_vec();
    let mut demand: Vec<f64> = b.to_vec();
    // potentials of rows then columns
    let mut pot = vec![0.0f64; m + n];
    let total: f64 = a.iter().sum();
    let mut shipped = 0.0;
    let mut guard = 0;
    while total - shipped > MASS_TOL {
        guard += 1;
        if guard > 4 * (m + n) * (m + n) + 64 {
            break;
        }
        // Dijkstra from a virtual source feeding every row with remaining supply
        let nn = m + n;
        let mut dist = vec![f64::INFINITY; nn];
        let mut prev = vec![usize::MAX; nn];
        let mut done = vec![false; nn];
        for i in 0..m {
            if supply[i] > MASS_TOL {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..nn {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < m {
                for j in 0..n {
                    if let Some(cij) = c(u, j) {
                        let v = m + j;
                        let rc = (cij + pot[u] - pot[v]).max(0.0);
                        if dist[u] + rc < dist[v] {
                            dist[v] = dist[u] + rc;
                            prev[v] = u;
                        }
                    }
                }
            } else {
                let j = u - m;
                for i in 0..m {
                    if flow[i][j] > MASS_TOL {
                        let cij = c(i, j).unwrap_or(0.0);
                        let rc = (-cij + pot[u] - pot[i]).max(0.0);
                        if dist[u] + rc < dist[i] {
                            dist[i] = dist[u] + rc;
                            prev[i] = u;
                        }
                    }
                }
            }
        }
        // cheapest column with unmet demand
        let mut target = usize::MAX;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if demand[j] > MASS_TOL && dist[m + j] < best {
                best = dist[m + j];
                target = m + j;
            }
        }
        if target == usize::MAX {
            return None;
        }
        for v in 0..nn {
            if dist[v].is_finite() {
                pot[v] += dist[v];
            }
        }
        // bottleneck along the path
        let mut amount = demand[target - m];
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u >= m {
                amount = amount.min(flow[v][u - m]);
            }
            v = u;
        }
        amount = amount.min(supply[v]);
        let origin = v;
        let mut v = target;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u < m {
                flow[u][v - m] += amount;
            } else {
                flow[v][u - m] -= amount;
                if flow[v][u - m] < MASS_TOL {
                    flow[v][u - m] = 0.0;
                }
            }
            v = u;
        }
        supply[origin] -= amount;
        demand[target - m] -= amount;
        shipped += amount;
    }
    if total - shipped > 1e-9 {
        return None;
    }
    let value = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| flow[i][j] > 0.0)
        .map(|(i, j)| flow[i][j] * cost[i][j].unwrap_or(0.0))
        .sum();
    Some((flow, value))
}

/// `W_p(mu, nu)` for `p >= 1` with distance oracle `dist`.
pub fn wasserstein_p<D>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    mut dist: D,
) -> Result<(f64, TransportPlan)>
where
    D: FnMut(&ConePoint, &ConePoint) -> Result<f64>,
{
    if !(p >= 1.0) {
        return Err(Error::Domain(format!(
            "Wasserstein exponent {p} must be at least 1"
        )));
    }
    mu.validate()?;
    nu.validate()?;
    let mut cost = vec![vec![None; nu.len()]; mu.len()];
    for (i, x) in mu.support.iter().enumerate() {
        for (j, y) in nu.support.iter().enumerate() {
            cost[i][j] = Some(dist(x, y)?.powf(p));
        }
    }
    let (matrix, opt) = min_cost_coupling(&mu.weights, &nu.weights, &cost)
        .ok_or_else(|| Error::InvalidMeasure("product coupling rejected".into()))?;
    let value = opt.max(0.0).powf(1.0 / p);
    Ok((
        value,
        TransportPlan {
            matrix,
            value,
            optimal: true,
            causal_feasible: true,
        },
    ))
}

/// `l_p(mu, nu)` for `p in (0, 1)`; `tau` returns `None` for pairs that are not causal.
pub fn lorentz_wasserstein_p<T>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    mut tau: T,
) -> Result<(f64, TransportPlan)>
where
    T: FnMut(&ConePoint, &ConePoint) -> Result<Option<f64>>,
{
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "Lorentz-Wasserstein exponent {p} must lie in (0, 1)"
        )));
    }
    mu.validate()?;
    nu.validate()?;
    let mut cost = vec![vec![None; nu.len()]; mu.len()];
    for (i, x) in mu.support.iter().enumerate() {
        for (j, y) in nu.support.iter().enumerate() {
            cost[i][j] = tau(x, y)?.map(|t| -t.max(0.0).powf(p));
        }
    }
    match min_cost_coupling(&mu.weights, &nu.weights, &cost) {
        Some((matrix, neg)) => {
            let value = (-neg).max(0.0).powf(1.0 / p);
            Ok((
                value,
                TransportPlan {
                    matrix,
                    value,
                    optimal: true,
                    causal_feasible: true,
                },
            ))
        }
        None => Ok((
            f64::NEG_INFINITY,
            TransportPlan {
                matrix: vec![vec![0.0; nu.len()]; mu.len()],
                value: f64::NEG_INFINITY,
                optimal: true,
                causal_feasible: false,
            },
        )),
    }
}

/// Time-separation oracle of a Lorentzian cone in the form `lorentz_wasserstein_p` expects.
pub fn cone_tau(cone: &ConeSpec) -> impl FnMut(&ConePoint, &ConePoint) -> Result<Option<f64>> + '_ {
    move |x, y| {
        let v = crate::cone_geom::causal_relation(cone, *x, *y)?;
        if !v.is_causal() {
            return Ok(None);
        }
        Ok(Some(crate::cone_geom::time_separation(cone, *x, *y)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityMode {
    /// `sum c(x_i, y_i) <= sum c(x_i, y_{i+1})`.
    Min,
    /// `sum l(x_i, y_i) >= sum l(x_{i+1}, y_i)`, with `-inf` for non-causal pairs.
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicalCheck {
    pub monotone: bool,
    /// Indices of the most violating cycle (empty when monotone).
    pub worst_cycle: Vec<usize>,
    /// Smallest cycle gap; negative means violation.
    #[serde(with = "crate::serde_ext")]
    pub worst_gap: f64,
    pub cycles_checked: usize,
}

pub const DEFAULT_CYCLE_CAP: usize = 8;

/// Exhaustive cycle check on pairs `(x_i, y_i)` with `cost[i][j] = c(x_i, y_j)`.
pub fn check_cyclical_monotonicity(
    cost: &[Vec<f64>],
    mode: MonotonicityMode,
    cap: usize,
) -> Result<CyclicalCheck> {
    let k = cost.len();
    if k > cap {
        return Err(Error::CapExceeded { len: k, cap });
    }
    let mut best = CyclicalCheck {
        monotone: true,
        worst_cycle: vec![],
        worst_gap: f64::INFINITY,
        cycles_checked: 0,
    };
    let scale = cost
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    for mask in 1u32..(1u32 << k) {
        if mask.count_ones() < 2 {
            continue;
        }
        let members: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let first = members[0];
        let mut rest = members[1..].to_vec();
        permute(&mut rest, 0, &mut |perm| {
            let mut cyc = Vec::with_capacity(perm.len() + 1);
            cyc.push(first);
            cyc.extend_from_slice(perm);
            let len = cyc.len();
            let mut diag = 0.0;
            let mut shifted = 0.0;
            for idx in 0..len {
                let (i, nxt) = (cyc[idx], cyc[(idx + 1) % len]);
                diag += cost[i][i];
                shifted += match mode {
                    MonotonicityMode::Min => cost[i][nxt],
                    MonotonicityMode::Max => cost[nxt][i],
                };
            }
            let gap = match mode {
                MonotonicityMode::Min => shifted - diag,
                MonotonicityMode::Max => diag - shifted,
            };
            let gap = if gap.is_nan() { 0.0 } else { gap };
            best.cycles_checked += 1;
            if gap < best.worst_gap {
                best.worst_gap = gap;
                if gap < -tol {
                    best.monotone = false;
                    best.worst_cycle = cyc;
                }
            }
        });
    }
    Ok(best)
}

fn permute(v: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// Support pairs of a plan and the cost matrix among them, for the cycle check.
pub fn plan_support_costs<C>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    plan: &TransportPlan,
    mut c: C,
) -> Result<Vec<Vec<f64>>>
where
    C: FnMut(&ConePoint, &ConePoint) -> Result<f64>,
{
    let pairs = plan.triplets();
    let mut m = vec![vec![0.0; pairs.len()]; pairs.len()];
    for (a, &(i, _, _)) in pairs.iter().enumerate() {
        for (b, &(_, j, _)) in pairs.iter().enumerate() {
            m[a][b] = c(&mu.support[i], &nu.support[j])?;
        }
    }
    Ok(m)
}

/// `(e_s)_# pi`: plan mass moved to the `s`-point of each charged pair's geodesic.
pub fn displacement_interpolate<G>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    plan: &TransportPlan,
    s: f64,
    mut geodesy: G,
) -> Result<DiscreteMeasure>
where
    G: FnMut(&ConePoint, &ConePoint, f64) -> Result<ConePoint>,
{
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!(
            "interpolation time {s} outside [0, 1]"
        )));
    }
    let mut support = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (i, j, m) in plan.triplets() {
        let p = match geodesy(&mu.support[i], &nu.support[j], s) {
            Ok(p) => p,
            Err(Error::NoCausalCurve) | Err(Error::InvalidFiber(_)) => {
                return Err(Error::NoGeodesic(i, j))
            }
            Err(e) => return Err(e),
        };
        if let Some(k) = support.iter().position(|q| *q == p) {
            weights[k] += m;
        } else {
            support.push(p);
            weights.push(m);
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    DiscreteMeasure::new(support, weights)
}

/// Geodesic oracle of a cone: the `s`-point of the maximizer or minimizer.
pub fn cone_geodesy(
    cone: &ConeSpec,
    opts: MetricOptions,
) -> impl FnMut(&ConePoint, &ConePoint, f64) -> Result<ConePoint> + '_ {
    move |x, y, s| ConeGeodesic::new(cone, *x, *y, &opts)?.point(s)
}
