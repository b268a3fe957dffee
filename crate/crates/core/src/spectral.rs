//! The transition kernel as an operator: Dirichlet norms, exact heat kernels,
//! hitting statistics, growth rates, and the closed-form bounds they are
//! compared against.
//!
//! The kernel is `p(u,v) = w((u,v)) / w(u)` on non-frontier vertices; mass
//! stepping onto the frontier is killed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::linalg::SparseSymmetric;

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_MAX_ITER: usize = 100_000;

fn require_interior(g: &WeightedGraph, x: usize) -> Result<()> {
    if x >= g.num_vertices() {
        return Err(Error::UnknownVertex(format!("#{x}")));
    }
    if g.is_frontier(x) {
        return Err(Error::FrontierViolation(g.id(x).to_string()));
    }
    Ok(())
}

/// One application of the killed kernel to a measure: `out = μ P`, with the
/// mass sent to the frontier returned.
pub fn push_measure(g: &WeightedGraph, mu: &[f64], out: &mut [f64]) -> f64 {
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut killed = 0.0;
    for (u, &m) in mu.iter().enumerate() {
        if m == 0.0 || g.is_frontier(u) {
            continue;
        }
        let scale = m / g.vertex_weight(u);
        for &(v, w) in g.neighbors(u) {
            if g.is_frontier(v) {
                killed += scale * w;
            } else {
                out[v] += scale * w;
            }
        }
    }
    killed
}

/// `(P f)(v) = Σ_u p(v,u) f(u)`, with `f = 0` on the frontier.
pub fn apply_kernel(g: &WeightedGraph, f: &[f64], out: &mut [f64]) {
    for (v, slot) in out.iter_mut().enumerate().take(g.num_vertices()) {
        *slot = if g.is_frontier(v) {
            0.0
        } else {
            g.neighbors(v)
                .iter()
                .filter(|(u, _)| !g.is_frontier(*u))
                .map(|&(u, w)| w * f[u])
                .sum::<f64>()
                / g.vertex_weight(v)
        };
    }
}

/// `‖f‖` in `L²(w)`.
pub fn weighted_norm(g: &WeightedGraph, f: &[f64]) -> f64 {
    f.iter()
        .enumerate()
        .map(|(v, x)| g.vertex_weight(v) * x * x)
        .sum::<f64>()
        .sqrt()
}

/// Operator norm of the killed kernel on `L²(V \ frontier, w)`.
///
/// Power iteration on `A²` for the symmetric `A = D^{-1/2} W D^{-1/2}`
/// restricted to the interior, which is unitarily equivalent to `P`.
pub fn dirichlet_norm(g: &WeightedGraph) -> Result<f64> {
    let interior: Vec<usize> = g.interior().iter().collect();
    if interior.is_empty() {
        return Err(Error::NoInteriorVertex);
    }
    let n = g.num_vertices();
    let root_w: Vec<f64> = (0..n).map(|v| g.vertex_weight(v).sqrt()).collect();
    let apply = |x: &[f64], out: &mut [f64]| {
        for &v in &interior {
            out[v] = g
                .neighbors(v)
                .iter()
                .filter(|(u, _)| !g.is_frontier(*u))
                .map(|&(u, w)| w * x[u] / root_w[u])
                .sum::<f64>()
                / root_w[v];
        }
    };
    let mut x = vec![0.0; n];
    for (k, &v) in interior.iter().enumerate() {
        x[v] = 1.0 + 1e-3 * ((k * 7919) % 101) as f64 / 101.0;
    }
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut previous = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        apply(&x, &mut y);
        apply(&y, &mut z);
        // ⟨x, A² x⟩ = ‖A x‖²
        let estimate = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if estimate == 0.0 {
            return Ok(0.0);
        }
        if (estimate - previous).abs() <= POWER_TOLERANCE * estimate {
            return Ok(estimate);
        }
        previous = estimate;
        std::mem::swap(&mut x, &mut z);
    }
    Err(Error::NonConvergence {
        what: "power iteration",
        iterations: POWER_MAX_ITER,
    })
}

/// Exact `n`-step killed-walk distribution from `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatRow {
    /// `p^n(x, v)` indexed by vertex; zero on the frontier.
    pub probs: Vec<f64>,
    /// Mass absorbed at the frontier by time `n`.
    pub killed: f64,
}

pub fn heat_kernel_row(g: &WeightedGraph, x: usize, n: usize) -> Result<HeatRow> {
    require_interior(g, x)?;
    let mut cur = vec![0.0; g.num_vertices()];
    cur[x] = 1.0;
    let mut next = vec![0.0; g.num_vertices()];
    let mut killed = 0.0;
    for _ in 0..n {
        killed += push_measure(g, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(HeatRow { probs: cur, killed })
}

/// One row of the heat table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatStep {
    pub n: usize,
    pub sup: f64,
    pub diagonal: f64,
    pub killed: f64,
}

/// `sup_y p^n(x,y)`, `p^n(x,x)` and the killed mass for `n = 0..=n_max`.
pub fn heat_series(g: &WeightedGraph, x: usize, n_max: usize) -> Result<Vec<HeatStep>> {
    require_interior(g, x)?;
    let mut cur = vec![0.0; g.num_vertices()];
    cur[x] = 1.0;
    let mut next = vec![0.0; g.num_vertices()];
    let mut killed = 0.0;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            killed += push_measure(g, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        let sup = cur.iter().cloned().fold(0.0, f64::max);
        out.push(HeatStep {
            n,
            sup,
            diagonal: cur[x],
            killed,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatBoundParams {
    pub i_anchor: f64,
    pub w0: f64,
    pub alpha: f64,
}

impl HeatBoundParams {
    /// `α = i² (w0²/2)^{-1/3} / 9`.
    pub fn new(i_anchor: f64, w0: f64) -> Result<Self> {
        if !(i_anchor > 0.0) || !(w0 > 0.0) {
            return Err(Error::BadParameter(format!(
                "heat bound needs i>0 and w0>0, got {i_anchor}, {w0}"
            )));
        }
        let alpha = i_anchor * i_anchor * (w0 * w0 / 2.0).powf(-1.0 / 3.0) / 9.0;
        Ok(Self {
            i_anchor,
            w0,
            alpha,
        })
    }

    /// `exp(-α n^{1/3})`.
    pub fn reference(&self, n: usize) -> f64 {
        (-self.alpha * (n as f64).cbrt()).exp()
    }
}

/// Bounds on the time spent in `S` by a walk from `x`:
/// `(P_x(T>0), E_x T, E_x T²)` upper bounds, none clamped to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBounds {
    pub p_bound: f64,
    pub e_bound: f64,
    pub e2_bound: f64,
}

pub fn lemma_time_bounds(
    w_x: f64,
    i: f64,
    i_prime: f64,
    n: u32,
    boundary_volume: f64,
    set_volume: f64,
) -> Result<TimeBounds> {
    if !(0.0 < i_prime && i_prime <= i && i < 1.0)
        || !(w_x > 0.0)
        || boundary_volume < 0.0
        || set_volume < 0.0
    {
        return Err(Error::BadParameter(format!(
            "time bounds need 0 < i' <= i < 1 and w(x) > 0; got i={i}, i'={i_prime}, w(x)={w_x}"
        )));
    }
    let decay = (1.0 - i * i).powf(n as f64 / 2.0) / w_x.sqrt();
    Ok(TimeBounds {
        p_bound: 2.0 * decay * boundary_volume.sqrt() / (i * i),
        e_bound: 2.0 * decay * set_volume.sqrt() / (i_prime * i_prime),
        e2_bound: 8.0 * decay * set_volume.sqrt() / i_prime.powi(4),
    })
}

/// Exact statistics of `T = #{n >= 0 : X_n ∈ S}` for the killed walk from `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingStats {
    pub p_hit: f64,
    pub mean: f64,
    pub second_moment: f64,
}

/// Solves `(D - W) f = b` on `members` with zero boundary values elsewhere.
fn dirichlet_solve(
    g: &WeightedGraph,
    members: &[usize],
    rhs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let n = g.num_vertices();
    let mut local = vec![usize::MAX; n];
    for (k, &v) in members.iter().enumerate() {
        local[v] = k;
    }
    let mut a = SparseSymmetric::new(members.len());
    for (k, &v) in members.iter().enumerate() {
        a.add(k, k, g.vertex_weight(v) - g.loop_weight(v));
        for &(u, w) in g.neighbors(v) {
            if u != v && local[u] != usize::MAX {
                a.add(k, local[u], -w);
            }
        }
    }
    let local_rhs: Vec<Vec<f64>> = rhs
        .iter()
        .map(|b| members.iter().map(|&v| b[v]).collect())
        .collect();
    let sols = a.solve(&local_rhs)?;
    Ok(sols
        .into_iter()
        .map(|s| {
            let mut full = vec![0.0; n];
            for (k, &v) in members.iter().enumerate() {
                full[v] = s[k];
            }
            full
        })
        .collect())
}

pub fn exact_hitting_stats(g: &WeightedGraph, x: usize, s: &VertexSet) -> Result<HittingStats> {
    require_interior(g, x)?;
    g.check(s)?;
    let interior = g.interior();
    let component = g
        .components_within(&interior)
        .into_iter()
        .find(|c| c.contains(x))
        .expect("x is interior");
    let target = s.intersection(&component);
    if target.is_empty() {
        return Ok(HittingStats {
            p_hit: 0.0,
            mean: 0.0,
            second_moment: 0.0,
        });
    }
    let leaks = component
        .iter()
        .any(|v| g.neighbors(v).iter().any(|&(u, _)| g.is_frontier(u)));
    if !leaks {
        return Err(Error::SingularSystem(format!(
            "walk from {} is never killed, so the time in S is infinite",
            g.id(x)
        )));
    }
    let n = g.num_vertices();

    let p_hit = if target.contains(x) {
        1.0
    } else {
        let rest: Vec<usize> = component.difference(&target).iter().collect();
        let mut b = vec![0.0; n];
        for &v in &rest {
            b[v] = g
                .neighbors(v)
                .iter()
                .filter(|(u, _)| target.contains(*u))
                .map(|(_, w)| w)
                .sum();
        }
        dirichlet_solve(g, &rest, &[b])?.remove(0)[x]
    };

    let members: Vec<usize> = component.iter().collect();
    let mut b = vec![0.0; n];
    for v in target.iter() {
        b[v] = g.vertex_weight(v);
    }
    let t = dirichlet_solve(g, &members, &[b])?.remove(0);
    let mut b2 = vec![0.0; n];
    for v in target.iter() {
        b2[v] = g.vertex_weight(v) * t[v];
    }
    let u = dirichlet_solve(g, &members, &[b2])?.remove(0);
    Ok(HittingStats {
        p_hit,
        mean: t[x],
        second_moment: 2.0 * u[x] - t[x],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEstimate {
    /// `|B(anchor, n)|^{1/n}` for `n = 1..=radius`, volumes weighted.
    pub ratios: Vec<f64>,
    pub g: f64,
}

pub fn growth_rate(g: &WeightedGraph, anchor: usize) -> Result<GrowthEstimate> {
    if anchor >= g.num_vertices() {
        return Err(Error::UnknownVertex(format!("#{anchor}")));
    }
    let dist = g.bfs_distances(anchor);
    let radius = dist.iter().flatten().copied().max().unwrap_or(0);
    let mut shell = vec![0.0; radius + 1];
    for (v, d) in dist.iter().enumerate() {
        if let Some(d) = d {
            shell[*d] += g.vertex_weight(v);
        }
    }
    let mut ball = 0.0;
    let mut ratios = Vec::with_capacity(radius);
    for (n, s) in shell.iter().enumerate() {
        ball += s;
        if n > 0 {
            ratios.push(ball.powf(1.0 / n as f64));
        }
    }
    let start = ratios.len() * 2 / 3;
    let g_est = ratios[start..].iter().cloned().fold(1.0, f64::max);
    Ok(GrowthEstimate { ratios, g: g_est })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedBounds {
    /// `|log(1 - i²)| / log w0`, for the induced chain.
    pub induced: f64,
    /// `i^7 w0^{-3}`, without the unspecified constant.
    pub main_shape: f64,
    /// `|log(1 - i²)| / log g`, infinite when `g <= 1`.
    pub growth: f64,
}

pub fn speed_lower_bounds(i: f64, w0: f64, growth: f64) -> Result<SpeedBounds> {
    if !(0.0 < i && i < 1.0) || !(w0 > 1.0) {
        return Err(Error::BadParameter(format!(
            "speed bounds need 0<i<1 and w0>1, got i={i}, w0={w0}"
        )));
    }
    let gap = (1.0 - i * i).ln().abs();
    Ok(SpeedBounds {
        induced: gap / w0.ln(),
        main_shape: i.powi(7) / w0.powi(3),
        growth: if growth > 1.0 {
            gap / growth.ln()
        } else {
            f64::INFINITY
        },
    })
}

/// `-2 log ‖P‖ / log g`.
pub fn growth_speed_bound(norm: f64, growth: f64) -> f64 {
    -2.0 * norm.ln() / growth.ln()
}

/// Partial sums `Σ_{m<=M} ‖P^m 1_x‖` for `M = 0..=m_max`.
pub fn green_partial_norms(g: &WeightedGraph, x: usize, m_max: usize) -> Result<Vec<f64>> {
    require_interior(g, x)?;
    let mut f = vec![0.0; g.num_vertices()];
    f[x] = 1.0;
    let mut next = vec![0.0; g.num_vertices()];
    let mut total = 0.0;
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        if m > 0 {
            apply_kernel(g, &f, &mut next);
            std::mem::swap(&mut f, &mut next);
        }
        total += weighted_norm(g, &f);
        out.push(total);
    }
    Ok(out)
}

/// `P(X_1, ..., X_{steps} < n)` for the nearest-neighbour walk on the
/// nonnegative integers started at 0 (reflected at 0), by transfer matrix.
pub fn confinement_probability(n: usize, steps: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut cur = vec![0.0; n];
    cur[0] = 1.0;
    let mut next = vec![0.0; n];
    for _ in 0..steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (k, &m) in cur.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            if k == 0 {
                if n > 1 {
                    next[1] += m;
                }
            } else {
                next[k - 1] += 0.5 * m;
                if k + 1 < n {
                    next[k + 1] += 0.5 * m;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur.iter().sum()
}

/// Smallest `a` with `P(X_1..X_{n³} < n) >= e^{-a n}` for `2 <= n <= n_max`.
/// (`n = 1` is excluded: the reflected walk leaves 0 at once.)
pub fn confinement_constant(n_max: usize) -> f64 {
    (2..=n_max.max(2))
        .map(|n| -confinement_probability(n, n * n * n).ln() / n as f64)
        .fold(0.0, f64::max)
}
