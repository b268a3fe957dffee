//! Finite weighted graphs with an open boundary ("frontier").
//!
//! Vertices are identified externally by opaque string ids and internally by
//! their rank in the lexicographic order of those ids, so every index-based
//! tie-break downstream is also an id-based tie-break.
//!
//! Edge weights live on unordered pairs. A self-loop contributes its weight
//! once to the vertex weight `w(v)` and never to an edge boundary.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

/// A set of vertices of a particular graph, stored as sorted indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(BTreeSet<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self(BTreeSet::new())
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: usize) -> bool {
        self.0.remove(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        Self(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        Self(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        Self(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// Membership vector of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for v in self.iter() {
            if v < n {
                m[v] = true;
            }
        }
        m
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub w0: f64,
    pub min_edge_weight: f64,
    pub is_w0_bounded: bool,
}

/// An undirected edge `(u, v)` with `u <= v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Immutable weighted graph. Build with [`GraphBuilder`] or [`build_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    frontier: Vec<bool>,
    edges: Vec<Edge>,
    /// Per-vertex `(neighbor, weight)` sorted by neighbor; a self-loop appears once.
    adj: Vec<Vec<(usize, f64)>>,
    vertex_weight: Vec<f64>,
    loop_weight: Vec<f64>,
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.starts_with('#') && !id.chars().any(char::is_whitespace)
}

/// Incremental construction of a [`WeightedGraph`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: BTreeMap<String, bool>,
    edges: BTreeMap<(String, String), f64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a vertex; `frontier` is sticky (once marked, stays marked).
    pub fn vertex(&mut self, id: &str, frontier: bool) -> Result<&mut Self> {
        if !valid_id(id) {
            return Err(if frontier {
                Error::FrontierVertexUnknown(id.to_string())
            } else {
                Error::InvalidVertexId(id.to_string())
            });
        }
        let slot = self.vertices.entry(id.to_string()).or_insert(false);
        *slot |= frontier;
        Ok(self)
    }

    pub fn edge(&mut self, u: &str, v: &str, weight: f64) -> Result<&mut Self> {
        for id in [u, v] {
            if !valid_id(id) {
                return Err(Error::InvalidVertexId(id.to_string()));
            }
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::NonPositiveWeight {
                u: u.into(),
                v: v.into(),
                weight,
            });
        }
        let key = if u <= v {
            (u.to_string(), v.to_string())
        } else {
            (v.to_string(), u.to_string())
        };
        if self.edges.contains_key(&key) {
            return Err(Error::DuplicateEdge { u: key.0, v: key.1 });
        }
        self.edges.insert(key, weight);
        self.vertices.entry(u.to_string()).or_insert(false);
        self.vertices.entry(v.to_string()).or_insert(false);
        Ok(self)
    }

    pub fn build(&self) -> WeightedGraph {
        let ids: Vec<String> = self.vertices.keys().cloned().collect();
        let index: HashMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let frontier: Vec<bool> = self.vertices.values().copied().collect();
        let n = ids.len();
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut adj = vec![Vec::new(); n];
        let mut vertex_weight = vec![0.0; n];
        let mut loop_weight = vec![0.0; n];
        for ((a, b), &w) in &self.edges {
            let (u, v) = (index[a], index[b]);
            let (u, v) = if u <= v { (u, v) } else { (v, u) };
            edges.push(Edge { u, v, weight: w });
            if u == v {
                adj[u].push((u, w));
                vertex_weight[u] += w;
                loop_weight[u] += w;
            } else {
                adj[u].push((v, w));
                adj[v].push((u, w));
                vertex_weight[u] += w;
                vertex_weight[v] += w;
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
        }
        WeightedGraph {
            ids,
            index,
            frontier,
            edges,
            adj,
            vertex_weight,
            loop_weight,
        }
    }
}

/// Builds a graph from an edge list plus frontier ids.
pub fn build_graph<S: AsRef<str>>(
    edge_list: &[(S, S, f64)],
    frontier: &[S],
) -> Result<WeightedGraph> {
    let mut b = GraphBuilder::new();
    for (u, v, w) in edge_list {
        b.edge(u.as_ref(), v.as_ref(), *w)?;
    }
    for f in frontier {
        b.vertex(f.as_ref(), true)?;
    }
    Ok(b.build())
}

impl WeightedGraph {
    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    /// Resolves a list of ids into a [`VertexSet`].
    pub fn set<S: AsRef<str>>(&self, ids: &[S]) -> Result<VertexSet> {
        ids.iter().map(|s| self.index_of(s.as_ref())).collect()
    }

    pub fn ids_of(&self, s: &VertexSet) -> Vec<String> {
        s.iter().map(|v| self.ids[v].clone()).collect()
    }

    pub fn is_frontier(&self, v: usize) -> bool {
        self.frontier[v]
    }

    pub fn frontier(&self) -> VertexSet {
        (0..self.num_vertices())
            .filter(|&v| self.frontier[v])
            .collect()
    }

    /// Non-frontier vertices.
    pub fn interior(&self) -> VertexSet {
        (0..self.num_vertices())
            .filter(|&v| !self.frontier[v])
            .collect()
    }

    pub fn all(&self) -> VertexSet {
        (0..self.num_vertices()).collect()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    /// `w(v)`: sum of incident edge weights, self-loop counted once.
    pub fn vertex_weight(&self, v: usize) -> f64 {
        self.vertex_weight[v]
    }

    pub fn loop_weight(&self, v: usize) -> f64 {
        self.loop_weight[v]
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> f64 {
        match self.adj[u].binary_search_by_key(&v, |&(x, _)| x) {
            Ok(k) => self.adj[u][k].1,
            Err(_) => 0.0,
        }
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub(crate) fn check(&self, s: &VertexSet) -> Result<()> {
        match s.iter().find(|&v| v >= self.num_vertices()) {
            Some(v) => Err(Error::UnknownVertex(format!("#{v}"))),
            None => Ok(()),
        }
    }

    pub(crate) fn check_frontier_free(&self, s: &VertexSet) -> Result<()> {
        self.check(s)?;
        match s.iter().find(|&v| self.frontier[v]) {
            Some(v) => Err(Error::FrontierViolation(self.ids[v].clone())),
            None => Ok(()),
        }
    }

    /// `|S| = Σ_{v∈S} w(v)`.
    pub fn volume(&self, s: &VertexSet) -> Result<f64> {
        self.check(s)?;
        Ok(s.iter().map(|v| self.vertex_weight[v]).sum())
    }

    /// Edges with exactly one endpoint in `S`, and their total weight.
    pub fn edge_boundary(&self, s: &VertexSet) -> Result<(Vec<Edge>, f64)> {
        self.check(s)?;
        let inside = s.mask(self.num_vertices());
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| inside[e.u] != inside[e.v])
            .copied()
            .collect();
        let weight = edges.iter().map(|e| e.weight).sum();
        Ok((edges, weight))
    }

    pub fn boundary_weight(&self, s: &VertexSet) -> Result<f64> {
        Ok(self.edge_boundary(s)?.1)
    }

    /// Inner and outer vertex boundaries of `S`.
    pub fn vertex_boundaries(&self, s: &VertexSet) -> Result<(VertexSet, VertexSet)> {
        self.check(s)?;
        let inside = s.mask(self.num_vertices());
        let mut inner = VertexSet::new();
        let mut outer = VertexSet::new();
        for v in s.iter() {
            for &(u, _) in &self.adj[v] {
                if !inside[u] {
                    inner.insert(v);
                    outer.insert(u);
                }
            }
        }
        Ok((inner, outer))
    }

    /// Hop distances from `source` (edge weights ignored); `None` if unreachable.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &(v, _) in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn graph_distance(&self, u: usize, v: usize) -> Result<Option<usize>> {
        let n = self.num_vertices();
        if u >= n || v >= n {
            return Err(Error::UnknownVertex(format!("#{}", u.max(v))));
        }
        Ok(self.bfs_distances(u)[v])
    }

    pub fn geometry_summary(&self) -> Result<GeometrySummary> {
        if self.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let w0 = self.vertex_weight.iter().copied().fold(0.0, f64::max);
        let min_edge_weight = self
            .edges
            .iter()
            .map(|e| e.weight)
            .fold(f64::INFINITY, f64::min);
        Ok(GeometrySummary {
            w0,
            min_edge_weight,
            is_w0_bounded: min_edge_weight >= 1.0 && self.vertex_weight.iter().all(|&w| w <= w0),
        })
    }

    /// Connected components of the subgraph induced by `s`, each sorted, ordered
    /// by smallest member.
    pub fn components_within(&self, s: &VertexSet) -> Vec<VertexSet> {
        let inside = s.mask(self.num_vertices());
        let mut seen = vec![false; self.num_vertices()];
        let mut out = Vec::new();
        for start in s.iter() {
            if seen[start] {
                continue;
            }
            let mut comp = VertexSet::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                comp.insert(u);
                for &(v, _) in &self.adj[u] {
                    if inside[v] && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected_set(&self, s: &VertexSet) -> bool {
        !s.is_empty() && self.components_within(s).len() == 1
    }

    /// The subgraph induced by `keep`: its vertices (with frontier marks) and
    /// the edges with both endpoints in `keep`.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> WeightedGraph {
        let inside = keep.mask(self.num_vertices());
        let mut b = GraphBuilder::new();
        for v in keep.iter() {
            b.vertex(&self.ids[v], self.frontier[v])
                .expect("ids already validated");
        }
        for e in &self.edges {
            if inside[e.u] && inside[e.v] {
                b.edge(&self.ids[e.u], &self.ids[e.v], e.weight)
                    .expect("edge already validated");
            }
        }
        b.build()
    }

    /// Builder pre-populated with this graph's vertices and edges.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new();
        for (v, id) in self.ids.iter().enumerate() {
            b.vertex(id, self.frontier[v]).expect("valid id");
        }
        for e in &self.edges {
            b.edge(&self.ids[e.u], &self.ids[e.v], e.weight)
                .expect("valid edge");
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn kite_construction() {
        let g = fixtures::kite();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.vertex_weight(g.index_of("c").unwrap()), 3.0);
        assert!(g.is_frontier(g.index_of("d").unwrap()));
    }

    #[test]
    fn self_loop_counts_once() {
        let g = build_graph(&[("v", "v", 1.0)], &[]).unwrap();
        assert_eq!(g.vertex_weight(0), 1.0);
        assert_eq!(g.boundary_weight(&g.all()).unwrap(), 0.0);
        assert_eq!(g.boundary_weight(&VertexSet::new()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_graph(&[("a", "b", -1.0)], &[]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            build_graph(&[("a", "b", 1.0), ("b", "a", 2.0)], &[]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            build_graph(&[("a", "b", 1.0)], &["has space"]),
            Err(Error::FrontierVertexUnknown(_))
        ));
    }

    #[test]
    fn volumes() {
        let c4 = fixtures::c4();
        let s = c4.set(&["v0", "v1"]).unwrap();
        assert_eq!(c4.volume(&s).unwrap(), 4.0);
        assert_eq!(c4.volume(&VertexSet::new()).unwrap(), 0.0);
        let kite = fixtures::kite();
        assert_eq!(
            kite.volume(&kite.set(&["a", "b", "c"]).unwrap()).unwrap(),
            7.0
        );
        let bogus: VertexSet = [17].into_iter().collect();
        assert!(matches!(kite.volume(&bogus), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn boundaries() {
        let kite = fixtures::kite();
        let (edges, w) = kite
            .edge_boundary(&kite.set(&["a", "b", "c"]).unwrap())
            .unwrap();
        assert_eq!(w, 1.0);
        assert_eq!(edges.len(), 1);
        assert_eq!((kite.id(edges[0].u), kite.id(edges[0].v)), ("c", "d"));

        let c4 = fixtures::c4();
        assert_eq!(c4.edge_boundary(&c4.all()).unwrap(), (vec![], 0.0));
        let (edges, w) = c4.edge_boundary(&c4.set(&["v0"]).unwrap()).unwrap();
        assert_eq!((edges.len(), w), (2, 2.0));
    }

    #[test]
    fn vertex_boundary_examples() {
        let kite = fixtures::kite();
        let (inner, outer) = kite
            .vertex_boundaries(&kite.set(&["a", "b", "c"]).unwrap())
            .unwrap();
        assert_eq!(kite.ids_of(&inner), vec!["c"]);
        assert_eq!(kite.ids_of(&outer), vec!["d"]);
        let (inner, outer) = kite.vertex_boundaries(&kite.set(&["d"]).unwrap()).unwrap();
        assert_eq!(kite.ids_of(&inner), vec!["d"]);
        assert_eq!(kite.ids_of(&outer), vec!["c"]);
        let c4 = fixtures::c4();
        let (inner, outer) = c4.vertex_boundaries(&c4.all()).unwrap();
        assert!(inner.is_empty() && outer.is_empty());
    }

    #[test]
    fn distances() {
        let c4 = fixtures::c4();
        let (v0, v2) = (c4.index_of("v0").unwrap(), c4.index_of("v2").unwrap());
        assert_eq!(c4.graph_distance(v0, v2).unwrap(), Some(2));
        assert_eq!(c4.graph_distance(v0, v0).unwrap(), Some(0));
        let g = build_graph(&[("a", "b", 1.0), ("c", "d", 1.0)], &[]).unwrap();
        assert_eq!(g.graph_distance(0, 3).unwrap(), None);
    }

    #[test]
    fn geometry() {
        let trap = fixtures::trap();
        let s = trap.geometry_summary().unwrap();
        assert_eq!(s.w0, 4.0);
        assert!(s.is_w0_bounded);
        let g = build_graph(&[("a", "b", 0.5), ("b", "c", 1.0)], &[]).unwrap();
        assert!(!g.geometry_summary().unwrap().is_w0_bounded);
        let g = build_graph(&[("v", "v", 1.0)], &[]).unwrap();
        let s = g.geometry_summary().unwrap();
        assert_eq!(s.w0, 1.0);
        assert!(s.is_w0_bounded);
        assert_eq!(
            GraphBuilder::new().build().geometry_summary(),
            Err(Error::EmptyGraph)
        );
    }
}
