//! Bridges, `i`-length, `dist_i` and the grouping of islands into countries.
//!
//! `dist_i(v, S)` is one plus the fewest ocean vertices a bridge from `v` to
//! `S` must use. It is computed as a shortest path where passing through an
//! ocean (or frontier) vertex costs 1 and passing through land costs 0, with
//! the endpoints themselves free.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::isolation::IslandDecomposition;

/// `#(B \ A_i)`; frontier vertices count as ocean.
pub fn i_length(g: &WeightedGraph, dec: &IslandDecomposition, b: &VertexSet) -> Result<usize> {
    g.check(b)?;
    Ok(b.iter().filter(|&v| !dec.in_land(v)).count())
}

struct Search {
    dist: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
}

fn search_from(
    g: &WeightedGraph,
    dec: &IslandDecomposition,
    s: &VertexSet,
    stop: Option<&VertexSet>,
) -> Search {
    let n = g.num_vertices();
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut parent = vec![None; n];
    let mut queue = VecDeque::new();
    for v in s.iter() {
        dist[v] = Some(0);
        queue.push_back(v);
    }
    while let Some(x) = queue.pop_front() {
        if stop.is_some_and(|t| t.contains(x)) {
            continue;
        }
        let dx = dist[x].unwrap();
        // leaving x costs 1 if x is a source (the "1 plus") or an ocean intermediate
        let step = if s.contains(x) || !dec.in_land(x) {
            1
        } else {
            0
        };
        for &(y, _) in g.neighbors(x) {
            if s.contains(y) {
                continue;
            }
            let cand = dx + step;
            if dist[y].is_none_or(|d| cand < d) {
                dist[y] = Some(cand);
                parent[y] = Some(x);
                if step == 0 {
                    queue.push_front(y);
                } else {
                    queue.push_back(y);
                }
            }
        }
    }
    Search { dist, parent }
}

/// `dist_i(v, S)` for every vertex `v`; `None` where no bridge exists.
pub fn dist_i_from_set(
    g: &WeightedGraph,
    dec: &IslandDecomposition,
    s: &VertexSet,
) -> Result<Vec<Option<usize>>> {
    g.check(s)?;
    Ok(search_from(g, dec, s, None).dist)
}

pub fn dist_i(
    g: &WeightedGraph,
    dec: &IslandDecomposition,
    v: usize,
    s: &VertexSet,
) -> Result<usize> {
    if v >= g.num_vertices() {
        return Err(Error::UnknownVertex(format!("#{v}")));
    }
    dist_i_from_set(g, dec, s)?[v].ok_or_else(|| Error::Unreachable(g.id(v).to_string()))
}

/// A vertex set connecting two vertex sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Bridge {
    pub vertices: VertexSet,
    pub endpoints: (VertexSet, VertexSet),
}

impl Bridge {
    /// Whether `B ∪ S1 ∪ S2` has a component meeting both endpoint sets.
    pub fn connects(&self, g: &WeightedGraph) -> bool {
        let all = self
            .vertices
            .union(&self.endpoints.0)
            .union(&self.endpoints.1);
        g.components_within(&all)
            .iter()
            .any(|c| !c.is_disjoint(&self.endpoints.0) && !c.is_disjoint(&self.endpoints.1))
    }
}

/// A shortest bridge (minimal `i`-length) between `s1` and `s2`, recovered by
/// backtracking the `dist_i` search.
pub fn shortest_bridge(
    g: &WeightedGraph,
    dec: &IslandDecomposition,
    s1: &VertexSet,
    s2: &VertexSet,
) -> Result<Bridge> {
    g.check(s1)?;
    g.check(s2)?;
    let endpoints = (s1.clone(), s2.clone());
    if !s1.is_disjoint(s2) {
        return Ok(Bridge {
            vertices: VertexSet::new(),
            endpoints,
        });
    }
    let search = search_from(g, dec, s1, Some(s2));
    let target = s2
        .iter()
        .filter_map(|y| search.dist[y].map(|d| (d, y)))
        .min()
        .ok_or_else(|| {
            Error::Unreachable(format!("set containing {}", g.id(s2.first().unwrap_or(0))))
        })?
        .1;
    let mut vertices = VertexSet::new();
    let mut cur = search.parent[target];
    while let Some(x) = cur {
        if s1.contains(x) {
            break;
        }
        vertices.insert(x);
        cur = search.parent[x];
    }
    Ok(Bridge {
        vertices,
        endpoints,
    })
}

/// `r(ℓ) = a 2^ℓ / ℓ²` with `a = (3 / (2π²)) i / w0`.
pub fn r_of_level(level: u32, i: f64, w0: f64) -> Result<f64> {
    if level == 0 || !(i > 0.0) || !(w0 > 0.0) {
        return Err(Error::BadParameter(format!(
            "r(ℓ) needs ℓ>=1, i>0, w0>0; got ℓ={level}, i={i}, w0={w0}"
        )));
    }
    let a = 3.0 / (2.0 * PI * PI) * i / w0;
    Ok(a * 2f64.powi(level as i32) / (level as f64).powi(2))
}

/// Quantitative finiteness condition for a region `R` reached
/// by a bridge structure with `ocean_count = #(B ∪ {v} \ A_i)`:
/// `w0 · ocean_count / |R| <= anchored - i`.
pub fn connect_condition(
    w0: f64,
    ocean_count: usize,
    region_volume: f64,
    anchored: f64,
    i: f64,
) -> bool {
    w0 * ocean_count as f64 / region_volume <= anchored - i
}

/// Merge history of a region.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionTree {
    /// Index into the decomposition's island list.
    Island(usize),
    Merge {
        left: Box<RegionTree>,
        right: Box<RegionTree>,
        bridge: VertexSet,
    },
}

impl RegionTree {
    pub fn islands(&self) -> Vec<usize> {
        match self {
            RegionTree::Island(k) => vec![*k],
            RegionTree::Merge { left, right, .. } => {
                let mut v = left.islands();
                v.extend(right.islands());
                v
            }
        }
    }

    /// `B(R)`: union of all bridges used in the merges.
    pub fn bridge_structure(&self) -> VertexSet {
        match self {
            RegionTree::Island(_) => VertexSet::new(),
            RegionTree::Merge {
                left,
                right,
                bridge,
            } => left
                .bridge_structure()
                .union(&right.bridge_structure())
                .union(bridge),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Country {
    pub level: u32,
    pub land: VertexSet,
    pub waters: VertexSet,
    pub region_tree: RegionTree,
    pub r: f64,
}

impl Country {
    pub fn vertices(&self) -> VertexSet {
        self.land.union(&self.waters)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountryJson {
    pub level: u32,
    pub land: Vec<String>,
    pub waters: Vec<String>,
    pub r: f64,
}

pub fn countries_json(g: &WeightedGraph, countries: &[Country]) -> Vec<CountryJson> {
    countries
        .iter()
        .map(|c| CountryJson {
            level: c.level,
            land: g.ids_of(&c.land),
            waters: g.ids_of(&c.waters),
            r: c.r,
        })
        .collect()
}

/// Level with `volume ∈ [2^{ℓ-1}, 2^ℓ)`; volumes below 1 are put on level 1.
pub fn level_of_volume(volume: f64) -> u32 {
    if volume < 1.0 {
        return 1;
    }
    let mut level = volume.log2().floor() as u32 + 1;
    // guard against log2 rounding at exact powers of two
    while 2f64.powi(level as i32 - 1) > volume {
        level -= 1;
    }
    while 2f64.powi(level as i32) <= volume {
        level += 1;
    }
    level
}

struct Region {
    land: VertexSet,
    tree: RegionTree,
}

fn waters(g: &WeightedGraph, dec: &IslandDecomposition, land: &VertexSet, r: f64) -> VertexSet {
    let dist = search_from(g, dec, land, None).dist;
    dec.ocean
        .iter()
        .filter(|&v| dist[v].is_some_and(|d| d as f64 <= r))
        .collect()
}

/// Groups islands into countries: islands start as regions on their volume
/// level; on each level, from the bottom up, a greedy maximal matching pairs
/// regions whose waters meet and promotes each pair one level up. Regions
/// left unmatched become countries together with their waters.
pub fn build_countries(
    g: &WeightedGraph,
    dec: &IslandDecomposition,
    w0: f64,
) -> Result<Vec<Country>> {
    let mut pending: std::collections::BTreeMap<u32, Vec<Region>> = Default::default();
    for (k, island) in dec.islands.iter().enumerate() {
        let level = level_of_volume(g.volume(island)?);
        pending.entry(level).or_default().push(Region {
            land: island.clone(),
            tree: RegionTree::Island(k),
        });
    }
    let mut countries = Vec::new();
    while let Some((level, mut regions)) = pending.pop_first() {
        let r = r_of_level(level, dec.i, w0)?;
        regions.sort_by_key(|reg| reg.land.first());
        let wet: Vec<VertexSet> = regions
            .iter()
            .map(|reg| waters(g, dec, &reg.land, r))
            .collect();
        let mut partner: Vec<Option<usize>> = vec![None; regions.len()];
        for a in 0..regions.len() {
            if partner[a].is_some() {
                continue;
            }
            for b in a + 1..regions.len() {
                if partner[b].is_none() && !wet[a].is_disjoint(&wet[b]) {
                    partner[a] = Some(b);
                    partner[b] = Some(a);
                    break;
                }
            }
        }
        let mut slots: Vec<Option<Region>> = regions.into_iter().map(Some).collect();
        for a in 0..slots.len() {
            match partner[a] {
                None => {
                    let reg = slots[a].take().expect("unmatched region visited once");
                    countries.push(Country {
                        level,
                        land: reg.land,
                        waters: wet[a].clone(),
                        region_tree: reg.tree,
                        r,
                    });
                }
                Some(b) if b > a => {
                    let left = slots[a].take().expect("first of pair");
                    let right = slots[b].take().expect("second of pair");
                    let bridge = shortest_bridge(g, dec, &left.land, &right.land)?;
                    pending.entry(level + 1).or_default().push(Region {
                        land: left.land.union(&right.land),
                        tree: RegionTree::Merge {
                            left: Box::new(left.tree),
                            right: Box::new(right.tree),
                            bridge: bridge.vertices,
                        },
                    });
                }
                Some(_) => {}
            }
        }
    }
    countries.sort_by_key(|c| (c.level, c.land.first()));
    Ok(countries)
}

/// Checks the defining properties of a country decomposition exactly and
/// reports the first violation.
pub fn check_countries(
    g: &WeightedGraph,
    dec: &IslandDecomposition,
    w0: f64,
    countries: &[Country],
) -> std::result::Result<(), String> {
    let island_of = dec.island_index(g.num_vertices());
    for c in countries {
        let name = format!(
            "level-{} country at {}",
            c.level,
            c.land.first().map(|v| g.id(v)).unwrap_or("?")
        );
        // land: a union of whole islands with volume in [2^{ℓ-1}, 2^ℓ)
        for v in c.land.iter() {
            let k = island_of[v]
                .ok_or_else(|| format!("{name}: land vertex {} is not on an island", g.id(v)))?;
            if !dec.islands[k].is_subset(&c.land) {
                return Err(format!("{name}: island {k} only partly in the land"));
            }
        }
        let vol = g.volume(&c.land).map_err(|e| e.to_string())?;
        let lo = 2f64.powi(c.level as i32 - 1);
        let hi = 2f64.powi(c.level as i32);
        if !(vol < hi && (vol >= lo || c.level == 1)) {
            return Err(format!("{name}: land volume {vol} outside [{lo}, {hi})"));
        }
        // waters: exactly the dist_i ball of radius r(ℓ) inside the ocean
        let r = r_of_level(c.level, dec.i, w0).map_err(|e| e.to_string())?;
        let dist = dist_i_from_set(g, dec, &c.land).map_err(|e| e.to_string())?;
        let ball: VertexSet = dec
            .ocean
            .iter()
            .filter(|&v| dist[v].is_some_and(|d| d as f64 <= r))
            .collect();
        if ball != c.waters {
            return Err(format!("{name}: waters differ from the radius-{r} ball"));
        }
    }
    // same-level countries are disjoint
    for (x, a) in countries.iter().enumerate() {
        for b in &countries[x + 1..] {
            if a.level == b.level && !a.vertices().is_disjoint(&b.vertices()) {
                return Err(format!("two level-{} countries overlap", a.level));
            }
        }
    }
    // every island lies in some country
    for (k, island) in dec.islands.iter().enumerate() {
        if !countries.iter().any(|c| island.is_subset(&c.land)) {
            return Err(format!("island {k} is in no country"));
        }
    }
    // each vertex in finitely many countries: at most one per level
    let levels: std::collections::BTreeSet<u32> = countries.iter().map(|c| c.level).collect();
    for v in 0..g.num_vertices() {
        let count = countries
            .iter()
            .filter(|c| c.vertices().contains(v))
            .count();
        if count > levels.len() {
            return Err(format!("vertex {} lies in {count} countries", g.id(v)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::isolation::compute_a_i;

    #[test]
    fn i_length_examples() {
        let g = fixtures::trap();
        let dec = compute_a_i(&g, 0.25).unwrap();
        assert_eq!(i_length(&g, &dec, &g.set(&["a", "b"]).unwrap()).unwrap(), 0);
        assert_eq!(i_length(&g, &dec, &g.set(&["x1"]).unwrap()).unwrap(), 1);
        assert_eq!(
            i_length(&g, &dec, &g.set(&["x1", "a"]).unwrap()).unwrap(),
            1
        );
        assert_eq!(i_length(&g, &dec, &g.set(&["y1"]).unwrap()).unwrap(), 1);
    }

    #[test]
    fn dist_i_examples() {
        let g = fixtures::trap();
        let dec = compute_a_i(&g, 0.25).unwrap();
        let land = g.set(&["a", "b", "c"]).unwrap();
        let id = |s| g.index_of(s).unwrap();
        assert_eq!(dist_i(&g, &dec, id("x1"), &land).unwrap(), 1);
        assert_eq!(dist_i(&g, &dec, id("r"), &land).unwrap(), 2);
        assert_eq!(dist_i(&g, &dec, id("b"), &land).unwrap(), 0);
        let cut = crate::graph::build_graph(&[("a", "b", 1.0), ("c", "d", 1.0)], &[]).unwrap();
        let dec = compute_a_i(&cut, 0.5).unwrap();
        assert!(matches!(
            dist_i(&cut, &dec, 0, &cut.set(&["c"]).unwrap()),
            Err(Error::Unreachable(_))
        ));
    }

    #[test]
    fn land_is_free_to_cross() {
        // u - a - b - v with {a,b} an island: dist_i(u, {v}) = 1
        let g = crate::graph::build_graph(
            &[
                ("u", "a", 1.0),
                ("a", "b", 8.0),
                ("b", "v", 1.0),
                ("u", "f", 4.0),
                ("v", "h", 4.0),
            ],
            &["f", "h"],
        )
        .unwrap();
        let dec = compute_a_i(&g, 0.5).unwrap();
        assert_eq!(g.ids_of(&dec.a_i), vec!["a", "b"]);
        let (u, v) = (g.index_of("u").unwrap(), g.index_of("v").unwrap());
        assert_eq!(dist_i(&g, &dec, u, &[v].into_iter().collect()).unwrap(), 1);
        assert_eq!(g.graph_distance(u, v).unwrap(), Some(3));
        let bridge = shortest_bridge(
            &g,
            &dec,
            &[u].into_iter().collect(),
            &[v].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(g.ids_of(&bridge.vertices), vec!["a", "b"]);
        assert!(bridge.connects(&g));
        assert_eq!(i_length(&g, &dec, &bridge.vertices).unwrap(), 0);
    }

    #[test]
    fn radius_examples() {
        let r3 = r_of_level(3, 0.3, 4.0).unwrap();
        assert!((r3 - 0.010_132_1).abs() < 1e-7, "{r3}");
        let r1 = r_of_level(1, 0.3, 4.0).unwrap();
        assert!((r1 - 0.022_797_3).abs() < 1e-7, "{r1}");
        let doubled = r_of_level(5, 0.6, 4.0).unwrap();
        assert!((doubled - 2.0 * r_of_level(5, 0.3, 4.0).unwrap()).abs() < 1e-15);
        assert!(r_of_level(0, 0.3, 4.0).is_err());
    }

    #[test]
    fn levels() {
        assert_eq!(level_of_volume(1.0), 1);
        assert_eq!(level_of_volume(1.99), 1);
        assert_eq!(level_of_volume(2.0), 2);
        assert_eq!(level_of_volume(5.0), 3);
        assert_eq!(level_of_volume(7.0), 3);
        assert_eq!(level_of_volume(8.0), 4);
        assert_eq!(level_of_volume(0.5), 1);
    }

    #[test]
    fn trap_has_one_dry_country() {
        let g = fixtures::trap();
        let dec = compute_a_i(&g, 0.25).unwrap();
        let cs = build_countries(&g, &dec, 4.0).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].level, 3);
        assert_eq!(g.ids_of(&cs[0].land), vec!["a", "b", "c"]);
        assert!(cs[0].waters.is_empty());
        check_countries(&g, &dec, 4.0, &cs).unwrap();
    }

    #[test]
    fn no_islands_no_countries() {
        let g = fixtures::tree3();
        let dec = compute_a_i(&g, 0.3).unwrap();
        assert!(build_countries(&g, &dec, 3.0).unwrap().is_empty());
    }

    #[test]
    fn two_islands_merge() {
        let g = fixtures::two_islands();
        let dec = compute_a_i(&g, 0.5).unwrap();
        assert_eq!(dec.islands.len(), 2);
        let w0 = 0.05;
        assert!(r_of_level(3, 0.5, w0).unwrap() >= 1.0);
        let cs = build_countries(&g, &dec, w0).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].level, 4);
        assert_eq!(g.ids_of(&cs[0].land), vec!["a1", "a2", "b1", "b2"]);
        assert_eq!(g.ids_of(&cs[0].waters), vec!["u"]);
        assert_eq!(cs[0].region_tree.islands(), vec![0, 1]);
        assert_eq!(g.ids_of(&cs[0].region_tree.bridge_structure()), vec!["u"]);
        check_countries(&g, &dec, w0, &cs).unwrap();
    }

    #[test]
    fn connect_condition_threshold() {
        assert!(connect_condition(3.0, 1, 30.0, 0.4, 0.3));
        assert!(!connect_condition(3.0, 2, 30.0, 0.4, 0.3));
    }
}
