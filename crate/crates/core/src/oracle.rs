//! Exhaustive reference computations over all subsets of a small vertex list.
//!
//! Nothing in here touches the flow solver; these are the independent
//! references the polynomial-time routines are checked against.

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

/// Default cap on the number of vertices an enumeration may range over.
pub const ENUMERATION_CAP: usize = 20;

/// Absolute comparison tolerance for isolation values on `g`.
pub fn delta_tolerance(g: &WeightedGraph) -> f64 {
    let total: f64 = (0..g.num_vertices()).map(|v| g.vertex_weight(v)).sum();
    1e-9 * total.max(1.0)
}

/// Volume and boundary weight of every subset of `members`, indexed by bitmask
/// (bit `k` set means `members[k]` is in the subset).
pub struct SubsetTable {
    pub members: Vec<usize>,
    pub volume: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl SubsetTable {
    pub fn new(g: &WeightedGraph, members: &[usize]) -> Result<Self> {
        let n = members.len();
        if n > ENUMERATION_CAP {
            return Err(Error::TooLargeForEnumeration {
                size: n,
                cap: ENUMERATION_CAP,
            });
        }
        let local: Vec<Vec<f64>> = members
            .iter()
            .map(|&u| {
                members
                    .iter()
                    .map(|&v| if u == v { 0.0 } else { g.edge_weight(u, v) })
                    .collect()
            })
            .collect();
        // weight of non-loop edges leaving each member (in g)
        let open: Vec<f64> = members
            .iter()
            .map(|&v| g.vertex_weight(v) - g.loop_weight(v))
            .collect();
        let size = 1usize << n;
        let mut volume = vec![0.0; size];
        let mut internal = vec![0.0; size];
        let mut boundary = vec![0.0; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            volume[mask] = volume[rest] + g.vertex_weight(members[low]);
            let mut add = 0.0;
            let mut r = rest;
            while r != 0 {
                let k = r.trailing_zeros() as usize;
                add += local[low][k];
                r &= r - 1;
            }
            internal[mask] = internal[rest] + add;
            let mut open_sum = 0.0;
            let mut r = mask;
            while r != 0 {
                let k = r.trailing_zeros() as usize;
                open_sum += open[k];
                r &= r - 1;
            }
            boundary[mask] = open_sum - 2.0 * internal[mask];
        }
        Ok(Self {
            members: members.to_vec(),
            volume,
            boundary,
        })
    }

    pub fn len(&self) -> usize {
        self.volume.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volume.is_empty()
    }

    pub fn isolation(&self, i: f64, mask: usize) -> f64 {
        i * self.volume[mask] - self.boundary[mask]
    }

    pub fn to_set(&self, mask: usize) -> VertexSet {
        (0..self.members.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| self.members[k])
            .collect()
    }

    pub fn to_mask(&self, s: &VertexSet) -> Option<usize> {
        let mut mask = 0;
        for v in s.iter() {
            mask |= 1 << self.members.iter().position(|&m| m == v)?;
        }
        Some(mask)
    }
}

/// The inclusion-minimal maximizer of `Δ_i` over frontier-avoiding sets, by
/// enumerating all subsets of the interior. Maximizers of a supermodular
/// function are closed under intersection, so the minimal one is the
/// intersection of all of them; that closure is checked, not assumed.
pub fn minimal_maximizer(g: &WeightedGraph, i: f64) -> Result<VertexSet> {
    let members: Vec<usize> = g.interior().iter().collect();
    let table = SubsetTable::new(g, &members)?;
    Ok(table.to_set(minimal_maximizer_mask(&table, i, delta_tolerance(g))))
}

pub fn minimal_maximizer_mask(table: &SubsetTable, i: f64, tol: f64) -> usize {
    let best = (0..table.len())
        .map(|m| table.isolation(i, m))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut meet = table.len() - 1;
    for m in 0..table.len() {
        if table.isolation(i, m) >= best - tol {
            meet &= m;
        }
    }
    assert!(
        table.isolation(i, meet) >= best - tol,
        "maximizers of the isolation are not closed under intersection"
    );
    meet
}

/// Whether `Δ_i(mask) > Δ_i(sub)` for every proper submask `sub`.
pub fn is_core_mask(table: &SubsetTable, i: f64, mask: usize, tol: f64) -> bool {
    if mask == 0 {
        return false;
    }
    let top = table.isolation(i, mask);
    // iterate proper submasks, including 0
    let mut sub = (mask - 1) & mask;
    loop {
        if table.isolation(i, sub) >= top - tol {
            return false;
        }
        if sub == 0 {
            return true;
        }
        sub = (sub - 1) & mask;
    }
}

/// Union of all `i`-isolated cores, straight from the definition.
/// Costs `3^n` for `n` interior vertices.
pub fn union_of_cores(g: &WeightedGraph, i: f64) -> Result<VertexSet> {
    let members: Vec<usize> = g.interior().iter().collect();
    let table = SubsetTable::new(g, &members)?;
    let tol = delta_tolerance(g);
    let union = (1..table.len())
        .filter(|&m| is_core_mask(&table, i, m, tol))
        .fold(0, |acc, m| acc | m);
    Ok(table.to_set(union))
}

/// Minimum of `|∂S|/|S|` over nonempty frontier-avoiding `S` with positive
/// volume, optionally restricted to connected sets containing `anchor`.
/// Returns `(ratio, witness)`; the first minimizer in mask order wins ties.
pub fn min_ratio(g: &WeightedGraph, anchor: Option<usize>) -> Result<(f64, VertexSet)> {
    let members: Vec<usize> = g.interior().iter().collect();
    if members.is_empty() {
        return Err(Error::NoInteriorVertex);
    }
    let table = SubsetTable::new(g, &members)?;
    let anchor_bit = match anchor {
        Some(v) => Some(
            1usize
                << members.iter().position(|&m| m == v).ok_or_else(|| {
                    if v < g.num_vertices() {
                        Error::FrontierViolation(g.id(v).to_string())
                    } else {
                        Error::UnknownVertex(format!("#{v}"))
                    }
                })?,
        ),
        None => None,
    };
    let mut best: Option<(f64, usize)> = None;
    for mask in 1..table.len() {
        if table.volume[mask] <= 0.0 {
            continue;
        }
        if let Some(bit) = anchor_bit {
            if mask & bit == 0 || !g.is_connected_set(&table.to_set(mask)) {
                continue;
            }
        }
        let ratio = table.boundary[mask] / table.volume[mask];
        if best.is_none_or(|(r, _)| ratio < r) {
            best = Some((ratio, mask));
        }
    }
    match best {
        Some((r, mask)) => Ok((r, table.to_set(mask))),
        None => Err(Error::NoInteriorVertex),
    }
}
