//! Seeded random walks on finite graphs and on lazy infinite families.
//!
//! Randomness: trajectory `k` of a run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `k` (rand_chacha 0.9).
//! Each step draws one `f64` in `[0,1)`, scales it by the current vertex
//! weight and walks the neighbour list (ascending ids for finite graphs,
//! parent/children/unit order for lazy ones) until the running weight
//! exceeds it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{Cursor, LazyGraph, Move};
use crate::graph::WeightedGraph;
use crate::isolation::IslandDecomposition;
use crate::par::{self, Execution};

/// Where walks run.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Finite {
        graph: &'a WeightedGraph,
        dec: Option<&'a IslandDecomposition>,
    },
    Lazy(&'a LazyGraph),
}

impl<'a> Source<'a> {
    pub fn finite(graph: &'a WeightedGraph) -> Self {
        Source::Finite { graph, dec: None }
    }

    pub fn with_decomposition(graph: &'a WeightedGraph, dec: &'a IslandDecomposition) -> Self {
        Source::Finite {
            graph,
            dec: Some(dec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkOptions {
    /// Record `|X_n|` for every `n` divisible by this (and the final step).
    pub sample_every: u64,
    /// Track `N_m`, `H_m`, `M_m`: needs a decomposition on finite graphs; on
    /// lazy graphs the generator's trap/pipe units are the islands.
    pub track_ocean: bool,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self {
            sample_every: 1,
            track_ocean: false,
        }
    }
}

/// Ocean-visit statistics; index `m` runs over ocean visits.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OceanTrace {
    /// `N_m`: time of the `m`-th ocean visit (`N_0` is the first one).
    pub times: Vec<u64>,
    /// `|X_{N_m}|`.
    pub dist: Vec<u32>,
    /// `H_m = min_{N_{m-1} < n <= N_m} |X_n|`; `H_0 = |X_{N_0}|`.
    pub h: Vec<u32>,
    /// `M_m`: largest island volume visited up to `N_m`.
    pub max_land: Vec<f64>,
}

impl OceanTrace {
    /// `K_m = N_m - m`, time spent on land.
    pub fn island_time(&self, m: usize) -> u64 {
        self.times[m] - m as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkRecord {
    pub seed: u64,
    pub stream: u64,
    pub steps: u64,
    pub sample_every: u64,
    /// `|X_n|` for `n = 0, k, 2k, ...` with `k = sample_every`.
    pub grid: Vec<u32>,
    /// `(n, |X_n|)` for the last step taken when it is off the grid.
    pub tail: Option<(u64, u32)>,
    pub ocean: Option<OceanTrace>,
    /// Step at which the walk entered the frontier.
    pub killed_at: Option<u64>,
}

impl WalkRecord {
    /// `(n, |X_n|)` on the sampling grid, ending at the last step taken.
    pub fn samples(&self) -> impl Iterator<Item = (u64, u32)> + Clone + '_ {
        let every = self.sample_every;
        self.grid
            .iter()
            .enumerate()
            .map(move |(k, &d)| (k as u64 * every, d))
            .chain(self.tail)
    }

    pub fn last_step(&self) -> u64 {
        match self.tail {
            Some((n, _)) => n,
            None => self.grid.len().saturating_sub(1) as u64 * self.sample_every,
        }
    }

    /// Record restricted to `n <= horizon`.
    pub fn truncated(&self, horizon: u64) -> WalkRecord {
        let mut r = self.clone();
        let keep = (horizon / self.sample_every + 1) as usize;
        r.grid.truncate(keep);
        if r.tail.is_some_and(|t| t.0 > horizon) {
            r.tail = None;
        }
        r.steps = r.steps.min(horizon);
        if r.killed_at.is_some_and(|k| k > horizon) {
            r.killed_at = None;
        }
        if let Some(o) = r.ocean.as_mut() {
            let keep = o.times.iter().take_while(|&&t| t <= horizon).count();
            o.times.truncate(keep);
            o.dist.truncate(keep);
            o.h.truncate(keep);
            o.max_land.truncate(keep);
        }
        r
    }

    /// Checks the step and ocean-trace invariants; returns the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.sample_every == 1 {
            let samples: Vec<(u64, u32)> = self.samples().collect();
            for w in samples.windows(2) {
                if w[1].1.abs_diff(w[0].1) > 1 {
                    return Err(format!(
                        "|X_n| jumps from {} to {} at n={}",
                        w[0].1, w[1].1, w[1].0
                    ));
                }
            }
        }
        if let Some(o) = &self.ocean {
            for m in 0..o.times.len() {
                let d = o.dist[m] as f64;
                let h = o.h[m] as f64;
                if h > d {
                    return Err(format!("H_{m}={h} exceeds |X_N_{m}|={d}"));
                }
                if d - o.max_land[m] - 1.0 > h {
                    return Err(format!(
                        "|X_N_{m}| - M_{m} - 1 = {} exceeds H_{m}={h}",
                        d - o.max_land[m] - 1.0
                    ));
                }
            }
        }
        Ok(())
    }
}

trait Stepper {
    fn distance(&self) -> u32;
    /// `None` in the ocean, else the volume of the current island.
    fn land_volume(&self) -> Option<f64>;
    /// Takes one step; `true` if the walk was killed.
    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<bool>;
    fn at_start(&self) -> bool;
}

struct FiniteStepper<'a> {
    g: &'a WeightedGraph,
    dist: Vec<Option<usize>>,
    island_of: Vec<Option<usize>>,
    island_volume: Vec<f64>,
    start: usize,
    pos: usize,
}

impl Stepper for FiniteStepper<'_> {
    fn distance(&self) -> u32 {
        self.dist[self.pos].expect("walk stays in the start component") as u32
    }

    fn land_volume(&self) -> Option<f64> {
        self.island_of[self.pos].map(|k| self.island_volume[k])
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<bool> {
        let total = self.g.vertex_weight(self.pos);
        let nb = self.g.neighbors(self.pos);
        if nb.is_empty() {
            return Err(Error::GeneratorExhausted(format!(
                "vertex {} has no edges",
                self.g.id(self.pos)
            )));
        }
        let mut u = rng.random::<f64>() * total;
        let mut next = nb[nb.len() - 1].0;
        for &(v, w) in nb {
            if u < w {
                next = v;
                break;
            }
            u -= w;
        }
        self.pos = next;
        Ok(self.g.is_frontier(next))
    }

    fn at_start(&self) -> bool {
        self.pos == self.start
    }
}

struct LazyStepper<'a> {
    lz: &'a LazyGraph,
    cursor: Cursor,
    start: Cursor,
    moves: Vec<(Move, f64)>,
}

impl Stepper for LazyStepper<'_> {
    fn distance(&self) -> u32 {
        self.cursor.distance() as u32
    }

    fn land_volume(&self) -> Option<f64> {
        (self.cursor.attach() > 0).then(|| self.lz.cursor_island_volume(&self.cursor))
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<bool> {
        self.lz.moves(&self.cursor, &mut self.moves);
        if self.moves.is_empty() {
            return Err(Error::GeneratorExhausted(format!(
                "{} has no neighbours",
                self.lz.id_of(&self.cursor)
            )));
        }
        let total: f64 = self.moves.iter().map(|m| m.1).sum();
        let mut u = rng.random::<f64>() * total;
        let mut chosen = self.moves[self.moves.len() - 1].0;
        for &(m, w) in &self.moves {
            if u < w {
                chosen = m;
                break;
            }
            u -= w;
        }
        self.lz.apply(&mut self.cursor, chosen);
        Ok(false)
    }

    fn at_start(&self) -> bool {
        self.cursor == self.start
    }
}

/// The RNG for trajectory `stream` of a run seeded with `seed`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn stepper<'a>(source: Source<'a>, x0: &str, track_ocean: bool) -> Result<Box<dyn Stepper + 'a>> {
    match source {
        Source::Finite { graph, dec } => {
            let start = graph.index_of(x0)?;
            if graph.is_frontier(start) {
                return Err(Error::FrontierViolation(x0.to_string()));
            }
            let (island_of, island_volume) = match dec {
                Some(d) => (
                    d.island_index(graph.num_vertices()),
                    d.islands
                        .iter()
                        .map(|s| graph.volume(s))
                        .collect::<Result<Vec<f64>>>()?,
                ),
                None if track_ocean => return Err(Error::MissingDecomposition),
                None => (vec![None; graph.num_vertices()], Vec::new()),
            };
            Ok(Box::new(FiniteStepper {
                g: graph,
                dist: graph.bfs_distances(start),
                island_of,
                island_volume,
                start,
                pos: start,
            }))
        }
        Source::Lazy(lz) => {
            let cursor = lz.cursor_of(x0)?;
            Ok(Box::new(LazyStepper {
                lz,
                start: cursor.clone(),
                cursor,
                moves: Vec::new(),
            }))
        }
    }
}

/// Runs one trajectory of `steps` steps from `x0`.
///
/// On lazy graphs `|X_n|` is the distance to the root `o`; on finite graphs
/// it is the distance to `x0`.
pub fn simulate(
    source: Source<'_>,
    x0: &str,
    steps: u64,
    seed: u64,
    stream: u64,
    opts: WalkOptions,
) -> Result<WalkRecord> {
    if opts.sample_every == 0 {
        return Err(Error::BadParameter(
            "sample interval must be positive".into(),
        ));
    }
    let track = opts.track_ocean || matches!(source, Source::Finite { dec: Some(_), .. });
    let mut walker = stepper(source, x0, track)?;
    let mut rng = trajectory_rng(seed, stream);
    let mut grid = Vec::with_capacity((steps / opts.sample_every) as usize + 1);
    let mut tail = None;
    let mut ocean = track.then(OceanTrace::default);
    let mut running_min = u32::MAX;
    let mut max_land = 0.0f64;
    let mut killed_at = None;

    let mut observe = |n: u64, d: u32, land: Option<f64>, ocean: &mut Option<OceanTrace>| {
        if let Some(o) = ocean.as_mut() {
            running_min = running_min.min(d);
            match land {
                Some(vol) => max_land = max_land.max(vol),
                None => {
                    o.times.push(n);
                    o.dist.push(d);
                    o.h.push(running_min);
                    o.max_land.push(max_land);
                    running_min = u32::MAX;
                }
            }
        }
    };

    let d0 = walker.distance();
    grid.push(d0);
    observe(0, d0, walker.land_volume(), &mut ocean);
    for n in 1..=steps {
        let killed = walker.step(&mut rng)?;
        let d = walker.distance();
        let on_grid = n % opts.sample_every == 0;
        if on_grid {
            grid.push(d);
        } else if killed || n == steps {
            tail = Some((n, d));
        }
        if killed {
            killed_at = Some(n);
            break;
        }
        observe(n, d, walker.land_volume(), &mut ocean);
    }
    Ok(WalkRecord {
        seed,
        stream,
        steps,
        sample_every: opts.sample_every,
        grid,
        tail,
        ocean,
        killed_at,
    })
}

/// `trials` independent trajectories on streams `0..trials`.
pub fn simulate_ensemble(
    source: Source<'_>,
    x0: &str,
    steps: u64,
    seed: u64,
    trials: u64,
    opts: WalkOptions,
    exec: Execution,
) -> Result<Vec<WalkRecord>> {
    par::map_range(trials as usize, exec, |k| {
        simulate(source, x0, steps, seed, k as u64, opts)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedEstimate {
    pub per_trajectory: Vec<f64>,
    pub mean: f64,
    pub ci95: (f64, f64),
    pub n_used: u64,
}

fn aggregate(per_trajectory: Vec<f64>, n_used: u64) -> SpeedEstimate {
    let k = per_trajectory.len() as f64;
    let mean = per_trajectory.iter().sum::<f64>() / k;
    let var = if per_trajectory.len() > 1 {
        per_trajectory
            .iter()
            .map(|x| (x - mean).powi(2))
            .sum::<f64>()
            / (k - 1.0)
    } else {
        0.0
    };
    let half = 1.96 * (var / k).sqrt();
    SpeedEstimate {
        per_trajectory,
        mean,
        ci95: (mean - half, mean + half),
        n_used,
    }
}

fn tail_min(
    points: impl Iterator<Item = (u64, f64)> + Clone,
    horizon: u64,
    tail_fraction: f64,
) -> f64 {
    let from = ((1.0 - tail_fraction) * horizon as f64).ceil() as u64;
    points
        .filter(|&(n, _)| n >= from.max(1))
        .map(|(n, d)| d / n as f64)
        .fold(f64::INFINITY, f64::min)
        .clamp(0.0, 1.0)
}

fn check_tail(records: &[WalkRecord], tail_fraction: f64) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::BadParameter(format!(
            "tail fraction {tail_fraction} outside (0,1)"
        )));
    }
    Ok(())
}

/// Per trajectory, the minimum of `|X_n|/n` over the final `tail_fraction`
/// of the recorded samples; a proxy for `liminf |X_n|/n`.
pub fn speed_estimate(records: &[WalkRecord], tail_fraction: f64) -> Result<SpeedEstimate> {
    check_tail(records, tail_fraction)?;
    let n_used = records.iter().map(WalkRecord::last_step).min().unwrap_or(0);
    let per = records
        .iter()
        .map(|r| {
            let horizon = r.last_step();
            if horizon == 0 {
                return 0.0;
            }
            tail_min(
                r.samples().map(|(n, d)| (n, d as f64)),
                horizon,
                tail_fraction,
            )
        })
        .collect();
    Ok(aggregate(per, n_used))
}

/// Same proxy over the ocean index: `m ↦ |X_{N_m}| / m`.
pub fn induced_speed_estimate(records: &[WalkRecord], tail_fraction: f64) -> Result<SpeedEstimate> {
    check_tail(records, tail_fraction)?;
    let traces: Vec<&OceanTrace> = records
        .iter()
        .map(|r| r.ocean.as_ref().ok_or(Error::MissingDecomposition))
        .collect::<Result<_>>()?;
    let n_used = traces
        .iter()
        .map(|o| o.times.len().saturating_sub(1) as u64)
        .min()
        .unwrap_or(0);
    let per = traces
        .iter()
        .map(|o| {
            let horizon = o.times.len().saturating_sub(1) as u64;
            if horizon == 0 {
                return 0.0;
            }
            tail_min(
                o.dist
                    .iter()
                    .enumerate()
                    .map(|(m, &d)| (m as u64, d as f64)),
                horizon,
                tail_fraction,
            )
        })
        .collect();
    Ok(aggregate(per, n_used))
}

/// Monte Carlo estimate of `p^n(x0, x0)` with its binomial standard error.
/// Trial `k` uses stream `k`.
pub fn return_probability_mc(
    source: Source<'_>,
    x0: &str,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::BadParameter("at least one trial is needed".into()));
    }
    let hits = par::map_range(trials as usize, Execution::default(), |k| -> Result<bool> {
        let mut walker = stepper(source, x0, false)?;
        let mut rng = trajectory_rng(seed, k as u64);
        for _ in 0..n {
            if walker.step(&mut rng)? {
                return Ok(false);
            }
        }
        Ok(walker.at_start())
    })
    .into_iter()
    .collect::<Result<Vec<bool>>>()?;
    let p = hits.iter().filter(|&&h| h).count() as f64 / trials as f64;
    Ok((p, (p * (1.0 - p) / trials as f64).sqrt()))
}

/// First-step empirical distribution from `x0` over `samples` draws, in the
/// order of `g.neighbors(x0)`.
pub fn one_step_counts(g: &WeightedGraph, x0: usize, samples: u64, seed: u64) -> Result<Vec<u64>> {
    let nb = g.neighbors(x0);
    let mut counts = vec![0u64; nb.len()];
    let mut st = FiniteStepper {
        g,
        dist: vec![Some(0); g.num_vertices()],
        island_of: vec![None; g.num_vertices()],
        island_volume: Vec::new(),
        start: x0,
        pos: x0,
    };
    let mut rng = trajectory_rng(seed, 0);
    for _ in 0..samples {
        st.pos = x0;
        st.step(&mut rng)?;
        let k = nb
            .iter()
            .position(|&(v, _)| v == st.pos)
            .expect("step goes to a neighbour");
        counts[k] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::build_graph;
    use crate::isolation::compute_a_i;

    #[test]
    fn self_loop_never_moves() {
        let g = build_graph(&[("x", "x", 1.0)], &[]).unwrap();
        let r = simulate(Source::finite(&g), "x", 100, 3, 0, WalkOptions::default()).unwrap();
        assert_eq!(r.grid.len(), 101);
        assert!(r.samples().all(|s| s.1 == 0));
        assert_eq!(speed_estimate(&[r], 0.5).unwrap().mean, 0.0);
    }

    #[test]
    fn determinism_and_streams() {
        let lz = LazyGraph::binary_tree();
        let a = simulate(Source::Lazy(&lz), "o", 2000, 11, 4, WalkOptions::default()).unwrap();
        let b = simulate(Source::Lazy(&lz), "o", 2000, 11, 4, WalkOptions::default()).unwrap();
        let c = simulate(Source::Lazy(&lz), "o", 2000, 11, 5, WalkOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        a.check_invariants().unwrap();
    }

    #[test]
    fn ensemble_paths_agree() {
        let lz = LazyGraph::trap_tree();
        let opts = WalkOptions {
            sample_every: 1,
            track_ocean: true,
        };
        let seq = simulate_ensemble(
            Source::Lazy(&lz),
            "o",
            500,
            1,
            8,
            opts,
            Execution::Sequential,
        )
        .unwrap();
        let par = simulate_ensemble(Source::Lazy(&lz), "o", 500, 1, 8, opts, Execution::Parallel)
            .unwrap();
        assert_eq!(seq, par);
        for r in &seq {
            r.check_invariants().unwrap();
        }
    }

    #[test]
    fn killed_walks_stop() {
        let g = fixtures::kite();
        let r = simulate(
            Source::finite(&g),
            "a",
            10_000,
            2,
            0,
            WalkOptions::default(),
        )
        .unwrap();
        let k = r.killed_at.expect("the frontier is reachable");
        assert_eq!(r.last_step(), k);
        assert_eq!(r.samples().last().unwrap().1, 2);
        assert!(simulate(Source::finite(&g), "d", 10, 2, 0, WalkOptions::default()).is_err());
    }

    #[test]
    fn c4_two_steps() {
        let g = fixtures::c4();
        let trials = 10_000u64;
        let mut home = 0;
        for s in 0..trials {
            let r = simulate(Source::finite(&g), "v0", 2, s, 0, WalkOptions::default()).unwrap();
            let d = r.grid[2];
            assert!(d == 0 || d == 2);
            home += (d == 0) as u64;
        }
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((home as f64 - trials as f64 / 2.0).abs() < 4.0 * sigma);
    }

    #[test]
    fn return_probability_examples() {
        let g = fixtures::c4();
        let (p, se) = return_probability_mc(Source::finite(&g), "v0", 2, 100_000, 5).unwrap();
        assert!((p - 0.5).abs() < 4.0 * se, "{p} ± {se}");
        assert_eq!(
            return_probability_mc(Source::finite(&g), "v0", 0, 10, 5).unwrap(),
            (1.0, 0.0)
        );
        assert_eq!(
            return_probability_mc(Source::finite(&g), "v0", 3, 1000, 5)
                .unwrap()
                .0,
            0.0
        );
    }

    #[test]
    fn ocean_trace_on_trap() {
        let g = fixtures::trap();
        let dec = compute_a_i(&g, 0.25).unwrap();
        for s in 0..50 {
            let r = simulate(
                Source::with_decomposition(&g, &dec),
                "r",
                200,
                s,
                0,
                WalkOptions::default(),
            )
            .unwrap();
            let o = r.ocean.as_ref().unwrap();
            assert_eq!(o.times[0], 0);
            for m in 0..o.times.len() {
                assert!(o.island_time(m) <= o.times[m]);
                assert!(o.max_land[m] == 0.0 || o.max_land[m] == 7.0);
            }
            r.check_invariants().unwrap();
        }
        assert!(matches!(
            simulate(
                Source::finite(&g),
                "r",
                10,
                1,
                0,
                WalkOptions {
                    sample_every: 1,
                    track_ocean: true
                }
            ),
            Err(Error::MissingDecomposition)
        ));
    }

    #[test]
    fn no_islands_means_same_speed() {
        let g = crate::generators::truncate(&LazyGraph::binary_tree(), 12).unwrap();
        let dec = compute_a_i(&g, 0.3).unwrap();
        assert!(dec.a_i.is_empty());
        let recs: Vec<WalkRecord> = (0..5)
            .map(|s| {
                simulate(
                    Source::with_decomposition(&g, &dec),
                    "o",
                    300,
                    s,
                    0,
                    WalkOptions::default(),
                )
                .unwrap()
            })
            .collect();
        let plain = speed_estimate(&recs, 0.5).unwrap();
        let induced = induced_speed_estimate(&recs, 0.5).unwrap();
        assert_eq!(plain.per_trajectory, induced.per_trajectory);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let lz = LazyGraph::trap_tree();
        let opts = WalkOptions {
            sample_every: 1,
            track_ocean: true,
        };
        let long = simulate(Source::Lazy(&lz), "o", 1000, 9, 0, opts).unwrap();
        let short = simulate(Source::Lazy(&lz), "o", 400, 9, 0, opts).unwrap();
        assert_eq!(long.truncated(400), short);
    }

    #[test]
    fn errors() {
        assert_eq!(speed_estimate(&[], 0.5), Err(Error::EmptyInput));
        let lz = LazyGraph::binary_tree();
        let r = simulate(Source::Lazy(&lz), "o", 10, 1, 0, WalkOptions::default()).unwrap();
        assert_eq!(
            induced_speed_estimate(&[r], 0.5),
            Err(Error::MissingDecomposition)
        );
        assert!(simulate(Source::Lazy(&lz), "o.7", 10, 1, 0, WalkOptions::default()).is_err());
    }
}
