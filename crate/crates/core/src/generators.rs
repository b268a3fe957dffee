//! Infinite tree families, generated lazily, plus finite truncations and
//! Bernoulli percolation.
//!
//! Vertex ids encode the position: the root is `o`, its second child is
//! `o.1`, and `o.0.1~3` is the third vertex of the unit (pendant or pipe)
//! hanging off tree vertex `o.0.1`. `|v|` is the distance to the root, which
//! for unit vertices runs through the junction.
//!
//! Walks use a [`Cursor`], which moves in O(1) per step regardless of depth.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, VertexSet, WeightedGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    BinaryTree,
    /// Pendant of total weight 1 at every tree vertex of depth `n >= 2`.
    TrapTree,
    /// Pipe with a geometric weight profile at every tree vertex of depth `n >= 2`.
    GeometricPipeTree,
    /// Unit pipe of length `ℓ` at the leftmost vertex of depth `ℓ`, for each `ℓ` in the list.
    PipeTree {
        lengths: Vec<u64>,
    },
    GaltonWatson {
        probs: Vec<f64>,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LazyGraph {
    family: Family,
}

/// Position of a walker (or any vertex) in a lazy graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cursor {
    path: Vec<u32>,
    keys: Vec<u64>,
    nonzero: usize,
    attach: u32,
}

impl Cursor {
    /// Depth of the tree vertex (the junction, for unit vertices).
    pub fn tree_depth(&self) -> usize {
        self.path.len()
    }

    /// Position inside the attached unit; 0 on the tree.
    pub fn attach(&self) -> u32 {
        self.attach
    }

    /// `|v|`, the graph distance to the root.
    pub fn distance(&self) -> usize {
        self.path.len() + self.attach as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Parent,
    Child(u32),
    /// From a junction into the first unit vertex.
    Enter,
    /// One step back toward the junction.
    Back,
    /// One step deeper into the unit.
    Forward,
    Stay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Unit {
    Pendant { p: f64 },
    Geometric { k: u32 },
    Plain { len: u32 },
}

impl Unit {
    fn len(self) -> u32 {
        match self {
            Unit::Pendant { .. } => 1,
            Unit::Geometric { k } => 2 * k,
            Unit::Plain { len } => len,
        }
    }

    /// Weight of the edge between unit vertices `j-1` and `j` (0 = junction).
    fn edge(self, j: u32) -> f64 {
        match self {
            Unit::Pendant { p } => p,
            Unit::Geometric { k } => 2f64.powi(-((k - j.abs_diff(k)) as i32)),
            Unit::Plain { .. } => 1.0,
        }
    }

    fn self_loop(self, j: u32) -> f64 {
        match self {
            Unit::Pendant { p } if j == 1 => 1.0 - p,
            _ => 0.0,
        }
    }

    fn volume(self) -> f64 {
        (1..=self.len())
            .map(|j| {
                self.edge(j)
                    + self.self_loop(j)
                    + if j < self.len() {
                        self.edge(j + 1)
                    } else {
                        0.0
                    }
            })
            .sum()
    }
}

/// Pendant edge weight `1 / (n ln n)` at depth `n >= 2`.
pub fn trap_weight(depth: usize) -> f64 {
    let n = depth as f64;
    1.0 / (n * n.ln())
}

/// `k = ⌈log2(n ln n)⌉`, at least 1; the pipe at depth `n` has `2k` edges.
pub fn pipe_half_length(depth: usize) -> u32 {
    let n = depth as f64;
    ((n * n.ln()).log2().ceil() as u32).max(1)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::BadDistribution(
            "offspring distribution is empty".into(),
        ));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::BadDistribution(format!(
            "negative or non-finite probability in {probs:?}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(())
}

impl LazyGraph {
    pub fn binary_tree() -> Self {
        Self {
            family: Family::BinaryTree,
        }
    }

    pub fn trap_tree() -> Self {
        Self {
            family: Family::TrapTree,
        }
    }

    pub fn geometric_pipe_tree() -> Self {
        Self {
            family: Family::GeometricPipeTree,
        }
    }

    /// Pipes at depths `4, 16, 64, ...`.
    pub fn pipe_tree_default() -> Self {
        Self {
            family: Family::PipeTree {
                lengths: (1..=15).map(|n| 4u64.pow(n)).collect(),
            },
        }
    }

    pub fn pipe_tree(lengths: Vec<u64>) -> Result<Self> {
        if lengths.first().is_some_and(|&l| l == 0) || lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadParameter(format!(
                "pipe lengths must be positive and strictly increasing: {lengths:?}"
            )));
        }
        if lengths.last().is_some_and(|&l| l > u32::MAX as u64) {
            return Err(Error::BadParameter("pipe length exceeds 2^32".into()));
        }
        Ok(Self {
            family: Family::PipeTree { lengths },
        })
    }

    pub fn galton_watson(probs: Vec<f64>, seed: u64) -> Result<Self> {
        check_distribution(&probs)?;
        Ok(Self {
            family: Family::GaltonWatson { probs, seed },
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Short name used on the command line.
    pub fn name(&self) -> &'static str {
        match self.family {
            Family::BinaryTree => "binary",
            Family::TrapTree => "trap",
            Family::GeometricPipeTree => "geometric-pipe",
            Family::PipeTree { .. } => "pipe",
            Family::GaltonWatson { .. } => "galton-watson",
        }
    }

    pub fn root(&self) -> Cursor {
        let key = match &self.family {
            Family::GaltonWatson { seed, .. } => splitmix64(*seed),
            _ => 0,
        };
        Cursor {
            path: Vec::new(),
            keys: vec![key],
            nonzero: 0,
            attach: 0,
        }
    }

    fn children(&self, c: &Cursor) -> u32 {
        match &self.family {
            Family::GaltonWatson { probs, .. } => {
                let key = *c.keys.last().expect("root key");
                let u =
                    (splitmix64(key ^ 0x6a09_e667_f3bc_c908) >> 11) as f64 / (1u64 << 53) as f64;
                let mut acc = 0.0;
                for (k, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k as u32;
                    }
                }
                // rounding: fall back to the last value with positive mass
                probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
            }
            _ => 2,
        }
    }

    fn unit(&self, c: &Cursor) -> Option<Unit> {
        let depth = c.path.len();
        match &self.family {
            Family::TrapTree if depth >= 2 => Some(Unit::Pendant {
                p: trap_weight(depth),
            }),
            Family::GeometricPipeTree if depth >= 2 => Some(Unit::Geometric {
                k: pipe_half_length(depth),
            }),
            Family::PipeTree { lengths }
                if c.nonzero == 0 && lengths.binary_search(&(depth as u64)).is_ok() =>
            {
                Some(Unit::Plain { len: depth as u32 })
            }
            _ => None,
        }
    }

    /// Available moves from `c` with their edge weights (a self-loop once).
    pub fn moves(&self, c: &Cursor, out: &mut Vec<(Move, f64)>) {
        out.clear();
        if c.attach == 0 {
            if !c.path.is_empty() {
                out.push((Move::Parent, 1.0));
            }
            for k in 0..self.children(c) {
                out.push((Move::Child(k), 1.0));
            }
            if let Some(unit) = self.unit(c) {
                out.push((Move::Enter, unit.edge(1)));
            }
        } else {
            let unit = self.unit(c).expect("cursor inside a unit");
            let j = c.attach;
            out.push((Move::Back, unit.edge(j)));
            if j < unit.len() {
                out.push((Move::Forward, unit.edge(j + 1)));
            }
            let l = unit.self_loop(j);
            if l > 0.0 {
                out.push((Move::Stay, l));
            }
        }
    }

    pub fn apply(&self, c: &mut Cursor, m: Move) {
        match m {
            Move::Parent => {
                let k = c.path.pop().expect("parent of root");
                c.keys.pop();
                if k != 0 {
                    c.nonzero -= 1;
                }
            }
            Move::Child(k) => {
                if let Family::GaltonWatson { .. } = self.family {
                    let parent = *c.keys.last().expect("root key");
                    c.keys.push(splitmix64(
                        parent.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ (k as u64 + 1),
                    ));
                } else {
                    c.keys.push(0);
                }
                c.path.push(k);
                if k != 0 {
                    c.nonzero += 1;
                }
            }
            Move::Enter | Move::Forward => c.attach += 1,
            Move::Back => c.attach -= 1,
            Move::Stay => {}
        }
    }

    /// Volume of the unit the cursor sits in; 0 on the tree.
    pub fn cursor_island_volume(&self, c: &Cursor) -> f64 {
        if c.attach == 0 {
            0.0
        } else {
            self.unit(c).map(Unit::volume).unwrap_or(0.0)
        }
    }

    pub fn id_of(&self, c: &Cursor) -> String {
        let mut s = String::from("o");
        for k in &c.path {
            s.push('.');
            s.push_str(&k.to_string());
        }
        if c.attach > 0 {
            s.push('~');
            s.push_str(&c.attach.to_string());
        }
        s
    }

    pub fn cursor_of(&self, id: &str) -> Result<Cursor> {
        let bad = || Error::UnknownVertex(id.to_string());
        let (tree, attach) = match id.split_once('~') {
            Some((t, a)) => (t, a.parse::<u32>().ok().filter(|&a| a > 0).ok_or_else(bad)?),
            None => (id, 0),
        };
        let mut parts = tree.split('.');
        if parts.next() != Some("o") {
            return Err(bad());
        }
        let mut c = self.root();
        for p in parts {
            let k: u32 = p.parse().map_err(|_| bad())?;
            if p != k.to_string() || k >= self.children(&c) {
                return Err(bad());
            }
            self.apply(&mut c, Move::Child(k));
        }
        if attach > 0 {
            match self.unit(&c) {
                Some(u) if attach <= u.len() => c.attach = attach,
                _ => return Err(bad()),
            }
        }
        Ok(c)
    }

    /// Neighbor oracle: `(neighbor id, weight)`, a self-loop listed once.
    pub fn neighbors(&self, id: &str) -> Result<Vec<(String, f64)>> {
        let c = self.cursor_of(id)?;
        let mut moves = Vec::new();
        self.moves(&c, &mut moves);
        Ok(moves
            .into_iter()
            .map(|(m, w)| {
                let mut d = c.clone();
                self.apply(&mut d, m);
                (self.id_of(&d), w)
            })
            .collect())
    }

    /// Distance oracle `|v|`.
    pub fn distance(&self, id: &str) -> Result<usize> {
        Ok(self.cursor_of(id)?.distance())
    }

    /// Island-volume oracle: volume of the unit containing `id`, else 0.
    pub fn island_volume(&self, id: &str) -> Result<f64> {
        Ok(self.cursor_island_volume(&self.cursor_of(id)?))
    }
}

/// Finite piece of `lz`: tree vertices with depth at most `radius`, those at
/// depth exactly `radius` on the frontier, and every unit whose junction has
/// depth below `radius` kept whole.
pub fn truncate(lz: &LazyGraph, radius: usize) -> Result<WeightedGraph> {
    if radius < 1 {
        return Err(Error::BadParameter(format!(
            "truncation radius must be at least 1, got {radius}"
        )));
    }
    let mut b = GraphBuilder::new();
    let mut stack = vec![lz.root()];
    while let Some(c) = stack.pop() {
        let id = lz.id_of(&c);
        let depth = c.tree_depth();
        b.vertex(&id, depth == radius)?;
        if depth == radius {
            continue;
        }
        for k in 0..lz.children(&c) {
            let mut d = c.clone();
            lz.apply(&mut d, Move::Child(k));
            b.edge(&id, &lz.id_of(&d), 1.0)?;
            stack.push(d);
        }
        if let Some(unit) = lz.unit(&c) {
            let mut prev = id;
            for j in 1..=unit.len() {
                let uid = format!("{}~{j}", lz.id_of(&c));
                b.edge(&prev, &uid, unit.edge(j))?;
                if unit.self_loop(j) > 0.0 {
                    b.edge(&uid, &uid, unit.self_loop(j))?;
                }
                prev = uid;
            }
        }
    }
    Ok(b.build())
}

/// Which edges of `base` stay open, in edge order. Only edges between two
/// non-frontier vertices are random.
pub fn open_edges(base: &WeightedGraph, p: f64, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    base.edges()
        .iter()
        .map(|e| base.is_frontier(e.u) || base.is_frontier(e.v) || rng.random::<f64>() < p)
        .collect()
}

/// Keeps every edge between two non-frontier vertices independently with
/// probability `p` (edges touching the frontier are always kept) and returns
/// the cluster of `anchor`.
pub fn percolation(base: &WeightedGraph, p: f64, seed: u64, anchor: &str) -> Result<WeightedGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParameter(format!(
            "retention probability {p} outside [0,1]"
        )));
    }
    let a = base.index_of(anchor)?;
    let kept = open_edges(base, p, seed);
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, &k) in base.edges().iter().zip(&kept) {
        if k && !e.is_loop() {
            adj.entry(e.u).or_default().push(e.v);
            adj.entry(e.v).or_default().push(e.u);
        }
    }
    let mut cluster = VertexSet::new();
    cluster.insert(a);
    let mut stack = vec![a];
    while let Some(v) = stack.pop() {
        for &u in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if cluster.insert(u) {
                stack.push(u);
            }
        }
    }
    let mut b = GraphBuilder::new();
    for v in cluster.iter() {
        b.vertex(base.id(v), base.is_frontier(v))?;
    }
    for (e, &k) in base.edges().iter().zip(&kept) {
        if k && cluster.contains(e.u) {
            b.edge(base.id(e.u), base.id(e.v), e.weight)?;
        }
    }
    Ok(b.build())
}
