//! The chain watched only while it is in the ocean.
//!
//! From an ocean vertex `u`, a step either lands in `V \ A_i` directly or
//! enters an island, wanders there and leaves through the island's outer
//! vertex boundary. Pushing the entering mass through each island's exit
//! distribution gives the induced weights `w_i((u,v)) = w(u) P_u(X_{N_1} = v)`.
//! Frontier vertices stay in the induced graph as absorbing endpoints, so the
//! mass the walk loses there remains visible as `w_i((u, f))`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, VertexSet, WeightedGraph};
use crate::isolation::IslandDecomposition;
use crate::linalg::SparseSymmetric;
use crate::oracle::{delta_tolerance, SubsetTable, ENUMERATION_CAP};
use crate::par;

/// First-exit distribution of an island.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitMatrix {
    /// Island vertices, ascending.
    pub island: Vec<usize>,
    /// Outer vertex boundary of the island (ocean and frontier), ascending.
    pub exits: Vec<usize>,
    /// `rows[a][x]`: probability that the walk from `island[a]` first leaves
    /// the island at `exits[x]`.
    pub rows: Vec<Vec<f64>>,
}

impl ExitMatrix {
    pub fn row_of(&self, v: usize) -> Option<&[f64]> {
        self.island
            .iter()
            .position(|&a| a == v)
            .map(|k| self.rows[k].as_slice())
    }
}

/// Solves `(I - Q) H = R` for the island's exit distribution.
pub fn island_exit_matrix(g: &WeightedGraph, island: &VertexSet) -> Result<ExitMatrix> {
    g.check(island)?;
    let members: Vec<usize> = island.iter().collect();
    let (_, outer) = g.vertex_boundaries(island)?;
    let exits: Vec<usize> = outer.iter().collect();
    if exits.is_empty() {
        return Err(Error::SingularSystem(format!(
            "island containing {} has no exit",
            members.first().map(|&v| g.id(v)).unwrap_or("<empty>")
        )));
    }
    let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let exit_pos: BTreeMap<usize, usize> = exits.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut a = SparseSymmetric::new(members.len());
    let mut rhs = vec![vec![0.0; members.len()]; exits.len()];
    for (k, &v) in members.iter().enumerate() {
        a.add(k, k, g.vertex_weight(v) - g.loop_weight(v));
        for &(u, w) in g.neighbors(v) {
            if u == v {
                continue;
            }
            if let Some(&j) = local.get(&u) {
                a.add(k, j, -w);
            } else {
                rhs[exit_pos[&u]][k] += w;
            }
        }
    }
    let columns = a.solve(&rhs)?;
    let rows: Vec<Vec<f64>> = (0..members.len())
        .map(|k| columns.iter().map(|col| col[k]).collect())
        .collect();
    for (k, row) in rows.iter().enumerate() {
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::SingularSystem(format!(
                "exit distribution from {} sums to {total}",
                g.id(members[k])
            )));
        }
    }
    Ok(ExitMatrix {
        island: members,
        exits,
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct InducedGraph {
    pub i: f64,
    /// Graph on `V \ A_i` (frontier marks preserved) carrying `w_i`.
    pub graph: WeightedGraph,
    /// Directional values `w(u) P_u(X_{N_1} = v)` in base-graph indices, for
    /// every ocean vertex `u`.
    pub directed: BTreeMap<(usize, usize), f64>,
}

impl InducedGraph {
    /// `Σ_v w(u) P_u(X_{N_1} = v)` restricted to frontier `v`.
    pub fn killed_weight(&self, base: &WeightedGraph, u: usize) -> f64 {
        self.directed
            .range((u, 0)..(u + 1, 0))
            .filter(|((_, v), _)| base.is_frontier(*v))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn row_total(&self, u: usize) -> f64 {
        self.directed
            .range((u, 0)..(u + 1, 0))
            .map(|(_, w)| w)
            .sum()
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn build_induced_graph(g: &WeightedGraph, dec: &IslandDecomposition) -> Result<InducedGraph> {
    // an island without exits is a whole closed component: the ocean never reaches it
    let exits: Vec<Option<ExitMatrix>> = par::try_map(&dec.islands, |island| {
        let (_, outer) = g.vertex_boundaries(island)?;
        if outer.is_empty() {
            Ok(None)
        } else {
            island_exit_matrix(g, island).map(Some)
        }
    })?;
    let island_of = dec.island_index(g.num_vertices());
    let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for u in dec.ocean.iter() {
        for &(v, w) in g.neighbors(u) {
            match island_of[v] {
                None => *directed.entry((u, v)).or_insert(0.0) += w,
                Some(k) => {
                    let m = exits[k]
                        .as_ref()
                        .expect("an island next to the ocean has exits");
                    let row = m.row_of(v).expect("island member");
                    for (x, &p) in m.exits.iter().zip(row) {
                        if p != 0.0 {
                            *directed.entry((u, *x)).or_insert(0.0) += w * p;
                        }
                    }
                }
            }
        }
    }

    let mut b = GraphBuilder::new();
    for v in 0..g.num_vertices() {
        if !dec.in_land(v) {
            b.vertex(g.id(v), g.is_frontier(v))?;
        }
    }
    for (&(u, v), &forward) in &directed {
        if v < u && !g.is_frontier(v) {
            continue;
        }
        if !g.is_frontier(v) && v != u {
            let backward = directed.get(&(v, u)).copied().unwrap_or(0.0);
            if relative_gap(forward, backward) > 1e-9 {
                return Err(Error::AsymmetricInducedWeights {
                    u: g.id(u).into(),
                    v: g.id(v).into(),
                    forward,
                    backward,
                });
            }
        }
        if forward > 0.0 {
            b.edge(g.id(u), g.id(v), forward)?;
        }
    }
    for e in g.edges() {
        if g.is_frontier(e.u) && g.is_frontier(e.v) {
            b.edge(g.id(e.u), g.id(e.v), e.weight)?;
        }
    }
    Ok(InducedGraph {
        i: dec.i,
        graph: b.build(),
        directed,
    })
}

/// Checks `|∂S| >= i|S|` in the induced graph for every nonempty
/// frontier-avoiding `S`, by enumeration.
pub fn induced_cheeger_check(ind: &InducedGraph, i: f64) -> Result<bool> {
    let g = &ind.graph;
    let members: Vec<usize> = g.interior().iter().collect();
    if members.len() > ENUMERATION_CAP {
        return Err(Error::TooLargeForEnumeration {
            size: members.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let table = SubsetTable::new(g, &members)?;
    let tol = delta_tolerance(g);
    Ok((1..table.len()).all(|m| table.boundary[m] >= i * table.volume[m] - tol))
}
