//! Dinic's max-flow on real capacities.
//!
//! Residual capacities at or below `eps` count as saturated; callers pick
//! `eps` relative to the total capacity of the network.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
    eps: f64,
}

impl FlowNetwork {
    pub fn new(nodes: usize, eps: f64) -> Self {
        Self {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
            eps,
        }
    }

    pub fn nodes(&self) -> usize {
        self.out.len()
    }

    /// Adds `u -> v` with capacity `cap` and `v -> u` with capacity `back`.
    pub fn add_arc_pair(&mut self, u: usize, v: usize, cap: f64, back: f64) {
        let k = self.arcs.len();
        self.arcs.push(Arc { to: v, cap });
        self.arcs.push(Arc { to: u, cap: back });
        self.out[u].push(k);
        self.out[v].push(k + 1);
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64) {
        self.add_arc_pair(u, v, cap, 0.0);
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.nodes()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &k in &self.out[u] {
                let a = &self.arcs[k];
                if a.cap > self.eps && level[a.to] == usize::MAX {
                    level[a.to] = level[u] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    /// Pushes one blocking-flow augmenting path; returns the amount pushed.
    fn augment(&mut self, s: usize, t: usize, level: &[usize], next: &mut [usize]) -> f64 {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        while u != t {
            let mut advanced = false;
            while next[u] < self.out[u].len() {
                let k = self.out[u][next[u]];
                let a = &self.arcs[k];
                if a.cap > self.eps && level[a.to] == level[u] + 1 {
                    path.push(k);
                    u = a.to;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                match path.pop() {
                    None => return 0.0,
                    Some(k) => {
                        u = self.arcs[k ^ 1].to;
                        next[u] += 1;
                    }
                }
            }
        }
        let pushed = path
            .iter()
            .map(|&k| self.arcs[k].cap)
            .fold(f64::INFINITY, f64::min);
        for &k in &path {
            self.arcs[k].cap -= pushed;
            self.arcs[k ^ 1].cap += pushed;
        }
        pushed
    }

    /// Runs max-flow from `s` to `t` and returns its value. The network keeps
    /// the residual capacities afterwards.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0; self.nodes()];
            loop {
                let pushed = self.augment(s, t, &level, &mut next);
                if pushed <= self.eps {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    /// Nodes reachable from `s` through arcs with residual capacity above `eps`:
    /// the inclusion-minimal source side of a minimum cut.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &k in &self.out[u] {
                let a = &self.arcs[k];
                if a.cap > self.eps && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_network() {
        // CLRS figure 26.1, max flow 23.
        let mut net = FlowNetwork::new(6, 1e-12);
        for &(u, v, c) in &[
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 3, 12.0),
            (2, 1, 4.0),
            (2, 4, 14.0),
            (3, 2, 9.0),
            (3, 5, 20.0),
            (4, 3, 7.0),
            (4, 5, 4.0),
        ] {
            net.add_arc(u, v, c);
        }
        assert_eq!(net.max_flow(0, 5), 23.0);
        let side = net.residual_reachable(0);
        assert_eq!(side, vec![true, true, true, false, true, false]);
    }

    #[test]
    fn minimal_source_side_on_ties() {
        // s -> a (1), a -> t (1): both {s} and {s,a} are min cuts.
        let mut net = FlowNetwork::new(3, 1e-12);
        net.add_arc(0, 1, 1.0);
        net.add_arc(1, 2, 1.0);
        assert_eq!(net.max_flow(0, 2), 1.0);
        assert_eq!(net.residual_reachable(0), vec![true, false, false]);
    }
}
