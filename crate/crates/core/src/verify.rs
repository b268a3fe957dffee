//! Verification suites. Each suite checks fast routines against exhaustive
//! references, closed-form bounds, or Monte Carlo trends, and reports counts
//! plus the first few counterexamples.

use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures;
use crate::generators::{truncate, LazyGraph};
use crate::graph::{GraphBuilder, VertexSet, WeightedGraph};
use crate::induced::{build_induced_graph, induced_cheeger_check};
use crate::io::{read_wg, walk_csv, write_wg};
use crate::isolation::{cheeger_constant, compute_a_i};
use crate::oracle::{self, SubsetTable};
use crate::par::{self, Execution};
use crate::spectral::{
    confinement_constant, dirichlet_norm, exact_hitting_stats, heat_kernel_row, heat_series,
    lemma_time_bounds, speed_lower_bounds,
};
use crate::territories::{build_countries, check_countries, dist_i_from_set};
use crate::walker::{
    induced_speed_estimate, simulate_ensemble, speed_estimate, Source, WalkOptions,
};

pub const SUITES: [&str; 11] = [
    "cores",
    "identities",
    "ocean",
    "induced",
    "time",
    "cheeger",
    "speed",
    "induced-speed",
    "heat",
    "countries",
    "repro",
];

pub const CORPUS_SIZE: usize = 300;
pub const CORPUS_MAX_INTERIOR: usize = 14;
pub const CORPUS_SEED: u64 = 0x5eed_0001;
/// The corpus runs `i = k/10` for `k = 1..=9`.
pub const CORPUS_TENTHS: std::ops::RangeInclusive<u32> = 1..=9;
const MAX_COUNTEREXAMPLES: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checked: u64,
    pub violations: u64,
    pub summary: String,
    pub counterexamples: Vec<String>,
    pub seconds: f64,
}

#[derive(Default)]
struct Tally {
    checked: u64,
    violations: u64,
    counterexamples: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(what());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.violations += other.violations;
        for c in other.counterexamples {
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(c);
            }
        }
    }

    fn report(self, suite: &str, passed: bool, summary: String, start: Instant) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            passed,
            checked: self.checked,
            violations: self.violations,
            summary,
            counterexamples: self.counterexamples,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Random connected instance: up to `max_interior` interior vertices joined
/// by a random spanning tree plus random extra edges, weights in `{1,2,4}`,
/// occasional self-loops, and 0 to 3 frontier vertices.
pub fn random_instance(seed: u64, max_interior: usize) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = [1.0, 2.0, 4.0];
    let n = rng.random_range(1..=max_interior.max(1));
    let ids: Vec<String> = (0..n).map(|k| format!("v{k:02}")).collect();
    let mut b = GraphBuilder::new();
    for id in &ids {
        b.vertex(id, false).expect("valid id");
    }
    let density = rng.random_range(0.1..0.5);
    for k in 1..n {
        let parent = rng.random_range(0..k);
        b.edge(&ids[parent], &ids[k], *weights.choose(&mut rng).unwrap())
            .expect("fresh edge");
    }
    let mut seen = std::collections::BTreeSet::new();
    for k in 1..n {
        // the spanning tree edge is already there; record it so extras skip it
        seen.insert(k);
    }
    let tree = b.build();
    for u in 0..n {
        for v in u + 1..n {
            if tree.edge_weight(
                tree.index_of(&ids[u]).unwrap(),
                tree.index_of(&ids[v]).unwrap(),
            ) == 0.0
                && rng.random::<f64>() < density
            {
                b.edge(&ids[u], &ids[v], *weights.choose(&mut rng).unwrap())
                    .expect("fresh edge");
            }
        }
        if rng.random::<f64>() < 0.15 {
            b.edge(&ids[u], &ids[u], *weights.choose(&mut rng).unwrap())
                .expect("fresh loop");
        }
    }
    let frontier = rng.random_range(0..=3);
    for f in 0..frontier {
        let fid = format!("f{f}");
        b.vertex(&fid, true).expect("valid id");
        let links = rng.random_range(1..=2usize.min(n));
        let mut targets: Vec<usize> = (0..n).collect();
        for _ in 0..links {
            let k = rng.random_range(0..targets.len());
            let t = targets.swap_remove(k);
            b.edge(&fid, &ids[t], *weights.choose(&mut rng).unwrap())
                .expect("fresh edge");
        }
    }
    b.build()
}

pub fn corpus() -> Vec<WeightedGraph> {
    (0..CORPUS_SIZE)
        .map(|k| random_instance(CORPUS_SEED.wrapping_add(k as u64), CORPUS_MAX_INTERIOR))
        .collect()
}

fn show(g: &WeightedGraph, s: &VertexSet) -> String {
    format!("{{{}}}", g.ids_of(s).join(","))
}

fn per_graph<F>(graphs: &[WeightedGraph], exec: Execution, f: F) -> Tally
where
    F: Fn(usize, &WeightedGraph) -> Tally + Sync + Send,
{
    let mut total = Tally::default();
    for t in par::map_range(graphs.len(), exec, |k| f(k, &graphs[k])) {
        total.merge(t);
    }
    total
}

/// Exact integer isolation table: `10 Δ_{k/10}` for every subset of the interior.
struct ScaledTable {
    table: SubsetTable,
    volume: Vec<i64>,
    boundary: Vec<i64>,
}

impl ScaledTable {
    fn new(g: &WeightedGraph, members: &[usize]) -> Result<Self> {
        let table = SubsetTable::new(g, members)?;
        let volume = table.volume.iter().map(|&x| x as i64).collect();
        let boundary = table.boundary.iter().map(|&x| x as i64).collect();
        Ok(Self {
            table,
            volume,
            boundary,
        })
    }

    fn delta(&self, tenths: u32, mask: usize) -> i64 {
        tenths as i64 * self.volume[mask] - 10 * self.boundary[mask]
    }
}

fn suite_cores(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let graphs = corpus();
    let tally = per_graph(&graphs, exec, |k, g| {
        let mut t = Tally::default();
        for tenths in CORPUS_TENTHS {
            let i = tenths as f64 / 10.0;
            let flow = compute_a_i(g, i).map(|d| d.a_i);
            let brute = oracle::minimal_maximizer(g, i);
            match (flow, brute) {
                (Ok(a), Ok(b)) => t.check(a == b, || {
                    format!(
                        "graph #{k} i={i}: flow {} vs oracle {}",
                        show(g, &a),
                        show(g, &b)
                    )
                }),
                (a, b) => t.check(false, || format!("graph #{k} i={i}: {a:?} / {b:?}")),
            }
            if g.interior().len() <= 9 {
                let union = oracle::union_of_cores(g, i).expect("small");
                let brute = oracle::minimal_maximizer(g, i).expect("small");
                t.check(union == brute, || {
                    format!(
                        "graph #{k} i={i}: union of cores {} vs {}",
                        show(g, &union),
                        show(g, &brute)
                    )
                });
            }
        }
        t
    });
    let elapsed = start.elapsed().as_secs_f64();
    let passed = tally.violations == 0 && elapsed < 60.0;
    let summary = format!(
        "{} comparisons over {} graphs x 9 values of i in {elapsed:.2}s",
        tally.checked,
        graphs.len()
    );
    Ok(tally.report("cores", passed, summary, start))
}

fn suite_identities(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let graphs = corpus();
    let mut tally = Tally::default();

    // union identity with dyadic i, compared exactly
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 0x1d);
    for _ in 0..10_000 {
        let k = rng.random_range(0..graphs.len());
        let g = &graphs[k];
        let i = rng.random_range(1..=7) as f64 / 8.0;
        let mut b = VertexSet::new();
        let mut c = VertexSet::new();
        for v in g.interior().iter() {
            match rng.random_range(0..3) {
                0 => {
                    b.insert(v);
                }
                1 => {
                    c.insert(v);
                }
                _ => {}
            }
        }
        let delta = |s: &VertexSet| i * g.volume(s).unwrap() - g.boundary_weight(s).unwrap();
        let shared: f64 = g
            .edges()
            .iter()
            .filter(|e| {
                (b.contains(e.u) && c.contains(e.v)) || (c.contains(e.u) && b.contains(e.v))
            })
            .map(|e| e.weight)
            .sum();
        let lhs = delta(&b.union(&c));
        let rhs = delta(&b) + delta(&c) + 2.0 * shared;
        tally.check(lhs == rhs, || {
            format!(
                "graph #{k} i={i}: union identity {lhs} vs {rhs} for B={} C={}",
                show(g, &b),
                show(g, &c)
            )
        });
    }

    // monotonicity in i
    for _ in 0..1_000 {
        let k = rng.random_range(0..graphs.len());
        let g = &graphs[k];
        let hi = rng.random_range(2..=9u32);
        let lo = rng.random_range(1..hi);
        let (a_lo, a_hi) = (
            compute_a_i(g, lo as f64 / 10.0)?.a_i,
            compute_a_i(g, hi as f64 / 10.0)?.a_i,
        );
        tally.check(a_lo.is_subset(&a_hi), || {
            format!(
                "graph #{k}: A_0.{lo}={} not inside A_0.{hi}={}",
                show(g, &a_lo),
                show(g, &a_hi)
            )
        });
    }

    // core growth: Δ(A ∪ S) > Δ(A) for every core S and every A not containing S
    let growth = per_graph(&graphs, exec, |k, g| {
        let mut t = Tally::default();
        let members: Vec<usize> = g.interior().iter().collect();
        let table = ScaledTable::new(g, &members).expect("corpus is small");
        let size = table.table.len();
        for tenths in CORPUS_TENTHS {
            let d: Vec<i64> = (0..size).map(|m| table.delta(tenths, m)).collect();
            let mut below = vec![i64::MIN; size];
            for mask in 1..size {
                let mut best = i64::MIN;
                let mut r = mask;
                while r != 0 {
                    let sub = mask & !(r & r.wrapping_neg());
                    best = best.max(d[sub]).max(below[sub]);
                    r &= r - 1;
                }
                below[mask] = best;
            }
            let cores: Vec<usize> = (1..size).filter(|&m| d[m] > below[m]).collect();
            let mut pairs = 0u64;
            let mut bad: Option<(usize, usize)> = None;
            for &s in &cores {
                // smallest gain over every A with S ⊄ A; supersets are skipped
                let (gain, arg) = (0..size)
                    .filter(|&a| a & s != s)
                    .map(|a| (d[a | s] - d[a], a))
                    .min()
                    .unwrap_or((1, 0));
                pairs += (size - (size >> s.count_ones())) as u64;
                if gain <= 0 && bad.is_none() {
                    bad = Some((s, arg));
                }
            }
            t.checked += pairs.saturating_sub(1);
            t.check(bad.is_none(), || {
                let (s, a) = bad.unwrap();
                format!(
                    "graph #{k} i=0.{tenths}: core {} does not grow {}",
                    show(g, &table.table.to_set(s)),
                    show(g, &table.table.to_set(a))
                )
            });
        }
        t
    });
    tally.merge(growth);
    let passed = tally.violations == 0;
    let summary = format!(
        "10000 union identities, 1000 monotonicity pairs, {} checks in total",
        tally.checked
    );
    Ok(tally.report("identities", passed, summary, start))
}

fn suite_ocean(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let graphs = corpus();
    let tally = per_graph(&graphs, exec, |k, g| {
        let mut t = Tally::default();
        for tenths in CORPUS_TENTHS {
            let i = tenths as f64 / 10.0;
            let dec = compute_a_i(g, i).expect("valid i");
            let members: Vec<usize> = dec.ocean.iter().collect();
            let table = SubsetTable::new(g, &members).expect("corpus is small");
            let worst = (1..table.len())
                .map(|m| (table.boundary[m] - i * table.volume[m], m))
                .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
            t.checked += table.len().saturating_sub(2) as u64;
            t.check(worst.0 >= -1e-9, || {
                format!(
                    "graph #{k} i={i}: ocean set {} has |∂S| - i|S| = {}",
                    show(g, &table.to_set(worst.1)),
                    worst.0
                )
            });
        }
        t
    });
    let passed = tally.violations == 0;
    let summary = format!("{} ocean subsets checked", tally.checked);
    Ok(tally.report("ocean", passed, summary, start))
}

fn suite_induced(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let graphs = corpus();
    let mut tally = per_graph(&graphs, exec, |k, g| {
        let mut t = Tally::default();
        for tenths in CORPUS_TENTHS {
            let i = tenths as f64 / 10.0;
            let dec = compute_a_i(g, i).expect("valid i");
            let ind = match build_induced_graph(g, &dec) {
                Ok(ind) => ind,
                Err(e) => {
                    t.check(false, || format!("graph #{k} i={i}: {e}"));
                    continue;
                }
            };
            for (&(u, v), &fwd) in &ind.directed {
                if u < v && !g.is_frontier(v) {
                    let back = ind.directed.get(&(v, u)).copied().unwrap_or(0.0);
                    t.check((fwd - back).abs() <= 1e-9 * fwd.max(back), || {
                        format!(
                            "graph #{k} i={i}: w_i({},{})={fwd} vs {back}",
                            g.id(u),
                            g.id(v)
                        )
                    });
                }
            }
            for u in dec.ocean.iter() {
                let w = g.vertex_weight(u);
                let wi = ind
                    .graph
                    .vertex_weight(ind.graph.index_of(g.id(u)).expect("ocean vertex kept"));
                t.check((wi - w).abs() <= 1e-9 * w, || {
                    format!("graph #{k} i={i}: w_i({})={wi} vs w={w}", g.id(u))
                });
            }
            if dec.ocean.len() <= 12 {
                let ok = induced_cheeger_check(&ind, i).unwrap_or(false);
                t.check(ok, || {
                    format!("graph #{k} i={i}: induced chain has a set with |∂S| < i|S|")
                });
            }
        }
        t
    });
    let trap = fixtures::trap();
    let ind = build_induced_graph(&trap, &compute_a_i(&trap, 0.25)?)?;
    let x1 = ind.graph.index_of("x1")?;
    let loop_w = ind.graph.loop_weight(x1);
    tally.check((loop_w - 1.0).abs() <= 1e-12, || {
        format!("trap: self-loop at x1 is {loop_w}")
    });
    let passed = tally.violations == 0;
    let summary = format!(
        "{} symmetry, weight and Cheeger checks; trap self-loop {loop_w}",
        tally.checked
    );
    Ok(tally.report("induced", passed, summary, start))
}

fn suite_time(_exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut tally = Tally::default();
    let mut instances = 0u64;
    let mut graphs_used = 0usize;
    // the corpus first, then fresh seeds past it until enough instances qualify
    'outer: for k in 0..10 * CORPUS_SIZE {
        let g = &random_instance(CORPUS_SEED.wrapping_add(k as u64), CORPUS_MAX_INTERIOR);
        graphs_used = k + 1;
        for tenths in CORPUS_TENTHS {
            let i = tenths as f64 / 10.0;
            let dec = compute_a_i(g, i)?;
            for s in &dec.islands {
                let volume = g.volume(s)?;
                // largest admissible i' among 1/|S| and the smaller tenths
                let mut candidates: Vec<f64> = (1..tenths).map(|j| j as f64 / 10.0).collect();
                if 1.0 / volume <= i {
                    candidates.push(1.0 / volume);
                }
                candidates.sort_by(|a, b| b.total_cmp(a));
                let mut i_prime = None;
                for c in candidates {
                    if compute_a_i(g, c)?.a_i.is_disjoint(s) {
                        i_prime = Some(c);
                        break;
                    }
                }
                let Some(i_prime) = i_prime else { continue };
                let boundary = g.boundary_weight(s)?;
                let dist = dist_i_from_set(g, &dec, s)?;
                let mut used = false;
                for x in dec.ocean.iter() {
                    let Some(d) = dist[x] else { continue };
                    let stats = match exact_hitting_stats(g, x, s) {
                        Ok(st) => st,
                        Err(Error::SingularSystem(_)) => continue,
                        Err(e) => return Err(e),
                    };
                    let bound = lemma_time_bounds(
                        g.vertex_weight(x),
                        i,
                        i_prime,
                        d as u32 - 1,
                        boundary,
                        volume,
                    )?;
                    let slack = |b: f64| b * (1.0 + 1e-12);
                    used = true;
                    tally.check(
                        stats.p_hit <= slack(bound.p_bound)
                            && stats.mean <= slack(bound.e_bound)
                            && stats.second_moment <= slack(bound.e2_bound),
                        || format!("graph #{k} i={i} x={}: {stats:?} vs {bound:?}", g.id(x)),
                    );
                }
                if used {
                    instances += 1;
                    if instances >= 100 {
                        break 'outer;
                    }
                }
            }
        }
    }
    let trap = fixtures::trap();
    let st = exact_hitting_stats(&trap, trap.index_of("r")?, &trap.set(&["a", "b", "c"])?)?;
    tally.check((st.p_hit - 3.0 / 17.0).abs() <= 1e-10, || {
        format!("trap: P(T>0)={}", st.p_hit)
    });
    tally.check((st.mean - 1.75).abs() <= 1e-10, || {
        format!("trap: E T={}", st.mean)
    });
    let passed = tally.violations == 0 && instances >= 100;
    let summary = format!(
        "{instances} qualifying instances from {graphs_used} graphs, {} comparisons; trap P(T>0)={} E[T]={}",
        tally.checked, st.p_hit, st.mean
    );
    Ok(tally.report("time", passed, summary, start))
}

fn suite_cheeger(_exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut tally = Tally::default();
    let mut instances: Vec<(String, WeightedGraph)> = vec![("tree3".into(), fixtures::tree3())];
    instances.extend(
        corpus()
            .into_iter()
            .enumerate()
            .filter(|(_, g)| !g.frontier().is_empty())
            .take(50)
            .map(|(k, g)| (format!("graph #{k}"), g)),
    );
    let mut tree_line = String::new();
    for (name, g) in &instances {
        let h = cheeger_constant(g)?.value;
        let norm = dirichlet_norm(g)?;
        let bound = (1.0 - h * h).sqrt();
        if name == "tree3" {
            tree_line = format!("tree3: h={h}, ‖P‖={norm:.6} <= {bound:.6}");
        }
        tally.check(norm <= bound + 1e-9, || {
            format!("{name}: ‖P‖={norm} > sqrt(1-h²)={bound} (h={h})")
        });
    }
    let passed = tally.violations == 0 && instances.len() == 51;
    let summary = format!("{} instances; {tree_line}", instances.len());
    Ok(tally.report("cheeger", passed, summary, start))
}

pub const SPEED_SEED: u64 = 7;

fn suite_speed(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let lz = LazyGraph::binary_tree();
    let recs = simulate_ensemble(
        Source::Lazy(&lz),
        "o",
        100_000,
        SPEED_SEED,
        100,
        WalkOptions::default(),
        exec,
    )?;
    let est = speed_estimate(&recs, 0.5)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut tally = Tally::default();
    tally.check((0.323..=0.343).contains(&est.mean), || {
        format!("mean speed {} outside [0.323, 0.343]", est.mean)
    });
    tally.check(elapsed < 30.0, || format!("took {elapsed:.1}s"));
    let passed = tally.violations == 0;
    let summary = format!(
        "binary tree, 100 x 1e5 steps: mean {:.4}, 95% CI [{:.4}, {:.4}], {elapsed:.2}s",
        est.mean, est.ci95.0, est.ci95.1
    );
    Ok(tally.report("speed", passed, summary, start))
}

pub const TRAP_HORIZONS: [u64; 3] = [10_000, 100_000, 1_000_000];
pub const TRAP_TRAJECTORIES: u64 = 200;

fn suite_induced_speed(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut tally = Tally::default();
    let (i, w0) = (1.0 / 3.0, 3.0);
    let bound = speed_lower_bounds(i, w0, 2.0)?.induced;
    let piece = truncate(&LazyGraph::binary_tree(), 10)?;
    let dry = compute_a_i(&piece, i)?.a_i.is_empty();
    tally.check(dry, || "binary tree truncation has islands at i=1/3".into());
    let lz = LazyGraph::binary_tree();
    let opts = WalkOptions {
        sample_every: 1,
        track_ocean: true,
    };
    let recs = simulate_ensemble(Source::Lazy(&lz), "o", 100_000, SPEED_SEED, 20, opts, exec)?;
    let induced = induced_speed_estimate(&recs, 0.5)?;
    tally.check(induced.mean >= bound, || {
        format!("induced speed {} below {bound}", induced.mean)
    });

    let trap = LazyGraph::trap_tree();
    let horizon = *TRAP_HORIZONS.last().unwrap();
    let recs = simulate_ensemble(
        Source::Lazy(&trap),
        "o",
        horizon,
        SPEED_SEED,
        TRAP_TRAJECTORIES,
        WalkOptions::default(),
        exec,
    )?;
    let mut means = Vec::new();
    for &h in &TRAP_HORIZONS {
        let cut: Vec<_> = recs.iter().map(|r| r.truncated(h)).collect();
        means.push(speed_estimate(&cut, 0.5)?.mean);
    }
    tally.check(means.windows(2).all(|w| w[1] < w[0]), || {
        format!("trap-tree speed proxy not decreasing: {means:?}")
    });
    tally.check(means[2] < 0.05, || {
        format!(
            "trap-tree speed proxy at 1e6 is {:.4}, not below 0.05",
            means[2]
        )
    });
    let passed = tally.violations == 0;
    let summary = format!(
        "binary tree induced speed {:.4} >= {bound:.4}; trap tree proxies at 1e4/1e5/1e6: {:.4}/{:.4}/{:.4}",
        induced.mean, means[0], means[1], means[2]
    );
    Ok(tally.report("induced-speed", passed, summary, start))
}

/// Squared correlation of two samples.
pub fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

pub const HEAT_RADIUS: usize = 16;
pub const HEAT_PIPE: usize = 4;

fn suite_heat(_exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut tally = Tally::default();
    let c4 = fixtures::c4();
    let p2 = heat_kernel_row(&c4, c4.index_of("v0")?, 2)?.probs[c4.index_of("v0")?];
    tally.check(p2 == 0.5, || format!("C4: p^2(v0,v0) = {p2}"));

    let g = truncate(&LazyGraph::pipe_tree_default(), HEAT_RADIUS)?;
    let o = g.index_of("o")?;
    let a = confinement_constant(HEAT_RADIUS);
    let l = HEAT_PIPE as f64;
    let c = 4.0 * 4f64.ln() + a;
    let series = heat_series(&g, o, 512)?;
    let p_l3 = series[HEAT_PIPE.pow(3)].diagonal;
    let floor = (-c * l).exp();
    tally.check(p_l3 > floor, || {
        format!("p^64(o,o) = {p_l3} not above e^(-cℓ) = {floor}")
    });

    let (xs, ys): (Vec<f64>, Vec<f64>) = (64..=512)
        .step_by(2)
        .map(|n| ((n as f64).cbrt(), series[n].diagonal.ln()))
        .unzip();
    let r2 = r_squared(&xs, &ys);
    tally.check(r2 >= 0.85, || format!("R² of log p^n vs n^(1/3) is {r2}"));
    let passed = tally.violations == 0;
    let summary = format!("a={a:.4}, c={c:.4}: p^64(o,o)={p_l3:.4e} > {floor:.4e}; R²={r2:.4} over even n in [64,512]");
    Ok(tally.report("heat", passed, summary, start))
}

fn suite_countries(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut tally = Tally::default();
    let two = fixtures::two_islands();
    let dec = compute_a_i(&two, 0.5)?;
    let cs = build_countries(&two, &dec, 0.05)?;
    tally.check(cs.len() == 1 && cs[0].level == 4, || {
        format!("two-island fixture gave {} countries", cs.len())
    });
    tally.check(check_countries(&two, &dec, 0.05, &cs).is_ok(), || {
        "two-island fixture fails the country properties".into()
    });

    let graphs: Vec<WeightedGraph> = corpus().into_iter().take(100).collect();
    let t = per_graph(&graphs, exec, |k, g| {
        let mut t = Tally::default();
        let i = (1 + k % 9) as f64 / 10.0;
        let w0 = g.geometry_summary().map(|s| s.w0).unwrap_or(1.0).max(1.0);
        let dec = compute_a_i(g, i).expect("valid i");
        match (build_countries(g, &dec, w0), build_countries(g, &dec, w0)) {
            (Ok(a), Ok(b)) => {
                t.check(a == b, || format!("graph #{k}: two runs differ"));
                let res = check_countries(g, &dec, w0, &a);
                t.check(res.is_ok(), || {
                    format!("graph #{k} i={i}: {}", res.unwrap_err())
                });
            }
            (Err(e), _) | (_, Err(e)) => t.check(false, || format!("graph #{k}: {e}")),
        }
        t
    });
    tally.merge(t);
    let passed = tally.violations == 0;
    let summary = format!(
        "two-island fixture plus 100 random instances, {} checks",
        tally.checked
    );
    Ok(tally.report("countries", passed, summary, start))
}

fn suite_repro(exec: Execution) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut tally = Tally::default();
    let trap = fixtures::trap();
    let lazy = LazyGraph::trap_tree();
    for (name, source, x0) in [
        ("trap", Source::finite(&trap), "r"),
        ("trap-tree", Source::Lazy(&lazy), "o"),
    ] {
        let run = |exec| -> Result<String> {
            let recs = simulate_ensemble(source, x0, 5_000, 42, 8, WalkOptions::default(), exec)?;
            Ok(walk_csv(&recs, &["seed 42".into()]))
        };
        let (a, b, c) = (run(exec)?, run(exec)?, run(Execution::Sequential)?);
        tally.check(a == b && a == c, || {
            format!("{name}: walk CSVs differ between runs")
        });
    }
    let mut graphs = vec![
        fixtures::kite(),
        fixtures::trap(),
        fixtures::tree3(),
        fixtures::two_islands(),
    ];
    graphs.push(truncate(&LazyGraph::geometric_pipe_tree(), 5)?);
    graphs.extend(corpus());
    for (k, g) in graphs.iter().enumerate() {
        let text = write_wg(g, &["round trip".into()]);
        let again = read_wg(&text).map(|h| write_wg(&h, &["round trip".into()]));
        tally.check(again.as_ref() == Ok(&text), || {
            format!("graph #{k}: .wg round trip changed the bytes")
        });
    }
    let passed = tally.violations == 0;
    let summary = format!(
        "walk CSVs identical across runs and execution modes; {} .wg round trips",
        graphs.len()
    );
    Ok(tally.report("repro", passed, summary, start))
}

pub fn run_suite(name: &str, exec: Execution) -> Result<SuiteReport> {
    match name {
        "cores" => suite_cores(exec),
        "identities" => suite_identities(exec),
        "ocean" => suite_ocean(exec),
        "induced" => suite_induced(exec),
        "time" => suite_time(exec),
        "cheeger" => suite_cheeger(exec),
        "speed" => suite_speed(exec),
        "induced-speed" => suite_induced_speed(exec),
        "heat" => suite_heat(exec),
        "countries" => suite_countries(exec),
        "repro" => suite_repro(exec),
        other => Err(Error::BadParameter(format!(
            "unknown suite {other:?}; expected one of {SUITES:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_seeded_and_bounded() {
        for s in 0..40 {
            let g = random_instance(s, 14);
            assert_eq!(g, random_instance(s, 14));
            assert!(g.interior().len() <= 14 && g.frontier().len() <= 3);
            assert!(g.is_connected_set(&g.all()));
            assert!(g
                .edges()
                .iter()
                .all(|e| [1.0, 2.0, 4.0].contains(&e.weight)));
        }
    }

    #[test]
    fn r_squared_of_a_line() {
        assert!((r_squared(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]) - 0.9959).abs() < 1e-3);
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", Execution::Sequential).is_err());
    }
}
