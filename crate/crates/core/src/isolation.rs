//! Isolation `Δ_i S = i|S| - |∂S|`, the island/ocean decomposition and
//! isoperimetric constants of finite surrogates.
//!
//! `A_i`, the union of all `i`-isolated cores, is the inclusion-minimal
//! maximizer of `Δ_i` over frontier-avoiding sets. It is found with a single
//! minimum cut: the source feeds every interior vertex `v` with capacity
//! `i·w(v)`, graph edges become arcs in both directions, and the frontier is
//! merged into the sink. A cut with source side `S` costs `i·|interior| - Δ_i S`,
//! and the vertices still reachable from the source in the residual network
//! form the minimal maximizer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::graph::{VertexSet, WeightedGraph};
use crate::oracle::{self, delta_tolerance, SubsetTable, ENUMERATION_CAP};

pub fn check_parameter(i: f64) -> Result<()> {
    if i > 0.0 && i < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParameter(format!(
            "isolation parameter must lie in (0,1), got {i}"
        )))
    }
}

/// `Δ_i S = i|S| - |∂S|` for a frontier-avoiding `S`.
pub fn isolation(g: &WeightedGraph, i: f64, s: &VertexSet) -> Result<f64> {
    check_parameter(i)?;
    g.check_frontier_free(s)?;
    Ok(i * g.volume(s)? - g.boundary_weight(s)?)
}

/// Whether `S` is an `i`-isolated core, checked against all `2^#S` subsets.
/// The empty set is never a core.
pub fn is_isolated_core_bruteforce(g: &WeightedGraph, i: f64, s: &VertexSet) -> Result<bool> {
    check_parameter(i)?;
    g.check(s)?;
    if s.len() > ENUMERATION_CAP {
        return Err(Error::TooLargeForEnumeration {
            size: s.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let members: Vec<usize> = s.iter().collect();
    let table = SubsetTable::new(g, &members)?;
    Ok(oracle::is_core_mask(
        &table,
        i,
        table.len() - 1,
        delta_tolerance(g),
    ))
}

/// Inclusion-minimal maximizer of `λ|S| - |∂S|` over frontier-avoiding sets,
/// for any `λ > 0`.
pub(crate) fn minimal_maximizer(g: &WeightedGraph, lambda: f64) -> VertexSet {
    let n = g.num_vertices();
    let (s, t) = (n, n + 1);
    let mut total = 0.0;
    let mut arcs = Vec::new();
    for v in g.interior().iter() {
        let cap = lambda * g.vertex_weight(v);
        if cap > 0.0 {
            arcs.push((s, v, cap, 0.0));
            total += cap;
        }
    }
    for e in g.edges() {
        if e.is_loop() {
            continue;
        }
        match (g.is_frontier(e.u), g.is_frontier(e.v)) {
            (false, false) => arcs.push((e.u, e.v, e.weight, e.weight)),
            (false, true) => arcs.push((e.u, t, e.weight, 0.0)),
            (true, false) => arcs.push((e.v, t, e.weight, 0.0)),
            (true, true) => continue,
        }
        total += e.weight;
    }
    let mut net = FlowNetwork::new(n + 2, 1e-9 * total.max(1.0));
    for (u, v, c, b) in arcs {
        net.add_arc_pair(u, v, c, b);
    }
    net.max_flow(s, t);
    let side = net.residual_reachable(s);
    (0..n).filter(|&v| side[v]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IslandDecomposition {
    pub i: f64,
    /// Union of all `i`-isolated cores.
    pub a_i: VertexSet,
    /// Connected components of `a_i`, ordered by smallest vertex id.
    pub islands: Vec<VertexSet>,
    /// Non-frontier vertices outside `a_i`.
    pub ocean: VertexSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionJson {
    pub i: f64,
    pub islands: Vec<Vec<String>>,
    pub ocean: Vec<String>,
    #[serde(rename = "A_i_volume")]
    pub a_i_volume: f64,
    pub delta_i: f64,
}

impl IslandDecomposition {
    pub fn in_land(&self, v: usize) -> bool {
        self.a_i.contains(v)
    }

    /// Island index for every vertex, `None` off land.
    pub fn island_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut idx = vec![None; n];
        for (k, island) in self.islands.iter().enumerate() {
            for v in island.iter() {
                idx[v] = Some(k);
            }
        }
        idx
    }

    pub fn to_json(&self, g: &WeightedGraph) -> DecompositionJson {
        let volume = g.volume(&self.a_i).unwrap_or(0.0);
        let boundary = g.boundary_weight(&self.a_i).unwrap_or(0.0);
        DecompositionJson {
            i: self.i,
            islands: self.islands.iter().map(|s| g.ids_of(s)).collect(),
            ocean: g.ids_of(&self.ocean),
            a_i_volume: volume,
            delta_i: self.i * volume - boundary,
        }
    }
}

/// Decomposes `g` into `i`-islands and ocean.
pub fn compute_a_i(g: &WeightedGraph, i: f64) -> Result<IslandDecomposition> {
    check_parameter(i)?;
    let a_i = minimal_maximizer(g, i);
    let islands = g.components_within(&a_i);
    let ocean = g.interior().difference(&a_i);
    Ok(IslandDecomposition {
        i,
        a_i,
        islands,
        ocean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheegerMethod {
    ExactEnumeration,
    RatioSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheegerReport {
    pub value: f64,
    pub witness: VertexSet,
    pub method: CheegerMethod,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheegerJson {
    pub value: f64,
    pub witness: Vec<String>,
    pub method: CheegerMethod,
}

impl CheegerReport {
    pub fn to_json(&self, g: &WeightedGraph) -> CheegerJson {
        CheegerJson {
            value: self.value,
            witness: g.ids_of(&self.witness),
            method: self.method,
        }
    }
}

const DINKELBACH_MAX_ITERATIONS: usize = 100;

/// Cheeger constant of the frontier-avoiding sets: exact enumeration when the
/// interior has at most 20 vertices, ratio search otherwise.
pub fn cheeger_constant(g: &WeightedGraph) -> Result<CheegerReport> {
    if g.interior().len() <= ENUMERATION_CAP {
        cheeger_constant_with(g, CheegerMethod::ExactEnumeration)
    } else {
        cheeger_constant_with(g, CheegerMethod::RatioSearch)
    }
}

pub fn cheeger_constant_with(g: &WeightedGraph, method: CheegerMethod) -> Result<CheegerReport> {
    match method {
        CheegerMethod::ExactEnumeration => {
            let (value, witness) = oracle::min_ratio(g, None)?;
            Ok(CheegerReport {
                value,
                witness,
                method,
            })
        }
        CheegerMethod::RatioSearch => dinkelbach(g),
    }
}

fn ratio(g: &WeightedGraph, s: &VertexSet) -> f64 {
    g.boundary_weight(s).unwrap() / g.volume(s).unwrap()
}

fn dinkelbach(g: &WeightedGraph) -> Result<CheegerReport> {
    let mut current: VertexSet = g
        .interior()
        .iter()
        .filter(|&v| g.vertex_weight(v) > 0.0)
        .collect();
    if current.is_empty() {
        return Err(Error::NoInteriorVertex);
    }
    let tol = delta_tolerance(g);
    let mut lambda = ratio(g, &current);
    for _ in 0..DINKELBACH_MAX_ITERATIONS {
        if lambda <= 0.0 {
            break;
        }
        let next = minimal_maximizer(g, lambda);
        let gain = lambda * g.volume(&next)? - g.boundary_weight(&next)?;
        if next.is_empty() || gain <= tol {
            return Ok(CheegerReport {
                value: lambda,
                witness: current,
                method: CheegerMethod::RatioSearch,
            });
        }
        let next_ratio = ratio(g, &next);
        if next_ratio >= lambda {
            break;
        }
        current = next;
        lambda = next_ratio;
    }
    if lambda <= 0.0 {
        return Ok(CheegerReport {
            value: 0.0,
            witness: current,
            method: CheegerMethod::RatioSearch,
        });
    }
    let next = minimal_maximizer(g, lambda);
    if next.is_empty() || lambda * g.volume(&next)? - g.boundary_weight(&next)? <= tol {
        Ok(CheegerReport {
            value: lambda,
            witness: current,
            method: CheegerMethod::RatioSearch,
        })
    } else {
        Err(Error::NonConvergence {
            what: "ratio search",
            iterations: DINKELBACH_MAX_ITERATIONS,
        })
    }
}

/// Minimum of `|∂S|/|S|` over connected frontier-avoiding `S` containing `v`:
/// the finite-surrogate proxy for the anchored expansion constant.
pub fn anchored_ratio(g: &WeightedGraph, v: usize) -> Result<CheegerReport> {
    if v >= g.num_vertices() {
        return Err(Error::UnknownVertex(format!("#{v}")));
    }
    if g.is_frontier(v) {
        return Err(Error::FrontierViolation(g.id(v).to_string()));
    }
    let (value, witness) = oracle::min_ratio(g, Some(v))?;
    Ok(CheegerReport {
        value,
        witness,
        method: CheegerMethod::ExactEnumeration,
    })
}

/// Checks that every `i`-island of volume at most `1/i'` misses `A_{i'}`.
/// Requires `0 < i' <= i < 1` and edge weights at least 1.
pub fn verify_sink(g: &WeightedGraph, i: f64, i_prime: f64) -> Result<bool> {
    check_parameter(i)?;
    check_parameter(i_prime)?;
    if i_prime > i {
        return Err(Error::BadParameter(format!(
            "need i' <= i, got i'={i_prime} > i={i}"
        )));
    }
    if g.edges().iter().any(|e| e.weight < 1.0) {
        return Err(Error::BadParameter(
            "edge weights must be at least 1".into(),
        ));
    }
    let coarse = compute_a_i(g, i)?;
    let fine = compute_a_i(g, i_prime)?;
    let limit = 1.0 / i_prime + delta_tolerance(g);
    for island in &coarse.islands {
        if g.volume(island)? <= limit && !island.is_disjoint(&fine.a_i) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn isolation_examples() {
        let c4 = fixtures::c4();
        let s = c4.set(&["v0", "v1"]).unwrap();
        assert!((isolation(&c4, 0.6, &s).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(isolation(&c4, 0.6, &VertexSet::new()).unwrap(), 0.0);
        let kite = fixtures::kite();
        let s = kite.set(&["a", "b", "c"]).unwrap();
        assert!((isolation(&kite, 0.6, &s).unwrap() - 3.2).abs() < 1e-12);
        assert!(matches!(
            isolation(&kite, 1.0, &s),
            Err(Error::BadParameter(_))
        ));
        let d = kite.set(&["d"]).unwrap();
        assert!(matches!(
            isolation(&kite, 0.5, &d),
            Err(Error::FrontierViolation(_))
        ));
    }

    #[test]
    fn core_examples() {
        let kite = fixtures::kite();
        assert!(
            is_isolated_core_bruteforce(&kite, 0.6, &kite.set(&["a", "b", "c"]).unwrap()).unwrap()
        );
        let c4 = fixtures::c4();
        assert!(!is_isolated_core_bruteforce(&c4, 0.6, &c4.set(&["v0"]).unwrap()).unwrap());
        assert!(!is_isolated_core_bruteforce(&c4, 0.6, &VertexSet::new()).unwrap());
        let big =
            crate::generators::truncate(&crate::generators::LazyGraph::binary_tree(), 5).unwrap();
        let all = big.interior();
        assert!(matches!(
            is_isolated_core_bruteforce(&big, 0.5, &all),
            Err(Error::TooLargeForEnumeration { .. })
        ));
    }

    #[test]
    fn decomposition_examples() {
        let kite = fixtures::kite();
        let dec = compute_a_i(&kite, 0.6).unwrap();
        assert_eq!(kite.ids_of(&dec.a_i), vec!["a", "b", "c"]);
        assert_eq!(dec.islands.len(), 1);
        assert!(dec.ocean.is_empty());

        let trap = fixtures::trap();
        let dec = compute_a_i(&trap, 0.25).unwrap();
        assert_eq!(trap.ids_of(&dec.a_i), vec!["a", "b", "c"]);
        assert_eq!(trap.ids_of(&dec.ocean), vec!["r", "x1", "x2"]);
        let json = dec.to_json(&trap);
        assert!((json.delta_i - 0.75).abs() < 1e-15);
        assert_eq!(json.a_i_volume, 7.0);

        let c4 = fixtures::c4();
        assert_eq!(compute_a_i(&c4, 0.6).unwrap().a_i, c4.all());
        assert!(compute_a_i(&c4, 0.0).is_err());
    }

    #[test]
    fn cheeger_examples() {
        let t = fixtures::tree3();
        for method in [CheegerMethod::ExactEnumeration, CheegerMethod::RatioSearch] {
            let r = cheeger_constant_with(&t, method).unwrap();
            assert!((r.value - 0.4).abs() < 1e-12, "{method:?}: {}", r.value);
            assert_eq!(r.witness, t.interior());
        }
        let g = crate::graph::build_graph(&[("v", "f", 2.0), ("v", "v", 3.0)], &["f"]).unwrap();
        let r = cheeger_constant(&g).unwrap();
        assert_eq!(r.value, 2.0 / 5.0);
        let c4 = fixtures::c4();
        let r = cheeger_constant(&c4).unwrap();
        assert_eq!((r.value, r.witness), (0.0, c4.all()));
        let r = cheeger_constant_with(&c4, CheegerMethod::RatioSearch).unwrap();
        assert_eq!((r.value, r.witness), (0.0, c4.all()));
        let only_frontier = crate::graph::build_graph(&[("f", "g", 1.0)], &["f", "g"]).unwrap();
        assert_eq!(
            cheeger_constant(&only_frontier),
            Err(Error::NoInteriorVertex)
        );
    }

    #[test]
    fn anchored_examples() {
        let t = fixtures::tree3();
        let root = t.index_of("o").unwrap();
        let r = anchored_ratio(&t, root).unwrap();
        assert!((r.value - 0.4).abs() < 1e-12);
        let g = crate::graph::build_graph(&[("v", "v", 1.0)], &[]).unwrap();
        assert_eq!(anchored_ratio(&g, 0).unwrap().value, 0.0);
        let trap = fixtures::trap();
        let y1 = trap.index_of("y1").unwrap();
        assert!(matches!(
            anchored_ratio(&trap, y1),
            Err(Error::FrontierViolation(_))
        ));
    }

    #[test]
    fn sink_examples() {
        let trap = fixtures::trap();
        assert!(verify_sink(&trap, 0.25, 1.0 / 7.0).unwrap());
        assert!(verify_sink(&trap, 0.25, 0.25).unwrap());
        assert!(verify_sink(&trap, 0.25, 0.5).is_err());
    }
}
