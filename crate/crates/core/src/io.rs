//! Text formats.
//!
//! `.wg` is line based: `# ...` comments, `v <id> [frontier]` for every
//! vertex, then `e <u> <v> <weight>` for every edge, both in index order.
//! Weights are written in the shortest form that parses back to the same
//! `f64`, so write → read → write is byte-identical. CSV output uses `,` and
//! `.` regardless of locale.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedGraph};
use crate::spectral::{HeatBoundParams, HeatStep};
use crate::walker::WalkRecord;

fn comment_block(out: &mut String, header: &[String]) {
    for line in header {
        for part in line.lines() {
            out.push_str("# ");
            out.push_str(part);
            out.push('\n');
        }
    }
}

pub fn write_wg(g: &WeightedGraph, header: &[String]) -> String {
    let mut out = String::new();
    comment_block(&mut out, header);
    for v in 0..g.num_vertices() {
        if g.is_frontier(v) {
            writeln!(out, "v {} frontier", g.id(v)).unwrap();
        } else {
            writeln!(out, "v {}", g.id(v)).unwrap();
        }
    }
    for e in g.edges() {
        writeln!(out, "e {} {} {}", g.id(e.u), g.id(e.v), e.weight).unwrap();
    }
    out
}

pub fn read_wg(text: &str) -> Result<WeightedGraph> {
    let mut b = GraphBuilder::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse = |msg: String| Error::Parse { line, msg };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields.as_slice() {
            ["v", id] => {
                b.vertex(id, false).map_err(|e| parse(e.to_string()))?;
            }
            ["v", id, "frontier"] => {
                b.vertex(id, true).map_err(|e| parse(e.to_string()))?;
            }
            ["e", u, v, w] => {
                let weight: f64 = w.parse().map_err(|_| parse(format!("bad weight {w:?}")))?;
                b.edge(u, v, weight).map_err(|e| parse(e.to_string()))?;
            }
            _ => return Err(parse(format!("unrecognised line {trimmed:?}"))),
        }
    }
    let g = b.build();
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(g)
}

/// Comment lines of a `.wg` or CSV file, without the `# ` marker.
pub fn header_lines(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|l| l.strip_prefix(' ').unwrap_or(l).to_string())
        .collect()
}

/// Header line marking a `.wg` file as an induced chain.
pub fn induced_header(i: f64) -> String {
    format!("induced i={i}")
}

/// Columns `trajectory,n,dist,ratio`, one row per recorded sample; the
/// ratio at `n = 0` is written as 0.
pub fn walk_csv(records: &[WalkRecord], header: &[String]) -> String {
    let mut out = String::new();
    comment_block(&mut out, header);
    out.push_str("trajectory,n,dist,ratio\n");
    for (k, r) in records.iter().enumerate() {
        for (n, d) in r.samples() {
            let ratio = if n == 0 { 0.0 } else { d as f64 / n as f64 };
            writeln!(out, "{k},{n},{d},{ratio}").unwrap();
        }
    }
    out
}

/// Columns `n,sup,p_nn,killed,reference` with `reference = exp(-α n^{1/3})`.
pub fn heat_csv(steps: &[HeatStep], params: &HeatBoundParams, header: &[String]) -> String {
    let mut out = String::new();
    comment_block(&mut out, header);
    out.push_str("n,sup,p_nn,killed,reference\n");
    for s in steps {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.n,
            s.sup,
            s.diagonal,
            s.killed,
            params.reference(s.n)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::spectral::heat_series;
    use crate::walker::{simulate, Source, WalkOptions};

    #[test]
    fn wg_round_trip() {
        for g in [
            fixtures::kite(),
            fixtures::trap(),
            fixtures::tree3(),
            fixtures::two_islands(),
        ] {
            let header = vec!["family test".to_string()];
            let text = write_wg(&g, &header);
            let back = read_wg(&text).unwrap();
            assert_eq!(back, g);
            assert_eq!(write_wg(&back, &header), text);
            assert_eq!(header_lines(&text), header);
        }
    }

    #[test]
    fn awkward_weights_survive() {
        let g = crate::graph::build_graph(
            &[
                ("a", "b", 0.1 + 0.2),
                ("b", "c", 1e-300),
                ("c", "c", 1.0 / 3.0),
            ],
            &["c"],
        )
        .unwrap();
        let text = write_wg(&g, &[]);
        assert_eq!(read_wg(&text).unwrap(), g);
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(
            read_wg("v a\nx b\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_wg("e a b -1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_wg("e a b 1\ne b a 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(read_wg("# nothing\n"), Err(Error::EmptyGraph)));
        assert_eq!(read_wg("  # comment\n\nv a\n").unwrap().num_vertices(), 1);
    }

    #[test]
    fn walk_csv_is_reproducible() {
        let g = fixtures::c4();
        let a = simulate(Source::finite(&g), "v0", 50, 4, 0, WalkOptions::default()).unwrap();
        let b = simulate(Source::finite(&g), "v0", 50, 4, 0, WalkOptions::default()).unwrap();
        let csv = walk_csv(&[a], &["seed 4".into()]);
        assert_eq!(csv, walk_csv(&[b], &["seed 4".into()]));
        assert!(csv.starts_with("# seed 4\ntrajectory,n,dist,ratio\n0,0,0,0\n"));
    }

    #[test]
    fn heat_csv_point_mass() {
        let g = fixtures::c4();
        let steps = heat_series(&g, 0, 0).unwrap();
        let params = HeatBoundParams::new(0.5, 2.0).unwrap();
        assert_eq!(
            heat_csv(&steps, &params, &[]),
            "n,sup,p_nn,killed,reference\n0,1,1,0,1\n"
        );
    }
}
