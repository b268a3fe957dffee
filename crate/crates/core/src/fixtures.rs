//! Small named graphs used throughout the tests, the verification suites and
//! the documentation.

use crate::generators::{truncate, LazyGraph};
use crate::graph::{build_graph, WeightedGraph};

/// Triangle `a,b,c` with a pendant frontier vertex `d` hanging off `c`.
pub fn kite() -> WeightedGraph {
    build_graph(
        &[
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
            ("c", "d", 1.0),
        ],
        &["d"],
    )
    .expect("static fixture")
}

/// Unit-weight 4-cycle `v0-v1-v2-v3`, no frontier.
pub fn c4() -> WeightedGraph {
    build_graph(
        &[
            ("v0", "v1", 1.0),
            ("v1", "v2", 1.0),
            ("v2", "v3", 1.0),
            ("v3", "v0", 1.0),
        ],
        &[],
    )
    .expect("static fixture")
}

/// Depth-2 binary tree rooted at `r` whose four leaves are frontier, with a
/// unit triangle `a,b,c` attached to the child `x1` by the edge `x1-a`.
pub fn trap() -> WeightedGraph {
    build_graph(
        &[
            ("r", "x1", 1.0),
            ("r", "x2", 1.0),
            ("x1", "y1", 1.0),
            ("x1", "y2", 1.0),
            ("x2", "y3", 1.0),
            ("x2", "y4", 1.0),
            ("x1", "a", 1.0),
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "a", 1.0),
        ],
        &["y1", "y2", "y3", "y4"],
    )
    .expect("static fixture")
}

/// Depth-3 binary tree with its eight depth-3 vertices on the frontier.
pub fn tree3() -> WeightedGraph {
    truncate(&LazyGraph::binary_tree(), 3).expect("radius is positive")
}

/// Two volume-5 islands `{a1,b1}` and `{a2,b2}` sharing the ocean vertex `u`,
/// which is tied to the frontier vertex `f` by a heavy edge.
///
/// With `i = 1/2` the islands are exactly the decomposition's islands; with
/// `w0 = 1/20` the level-3 radius exceeds 1, so both islands reach `u`.
pub fn two_islands() -> WeightedGraph {
    build_graph(
        &[
            ("a1", "b1", 2.0),
            ("b1", "u", 1.0),
            ("a2", "b2", 2.0),
            ("b2", "u", 1.0),
            ("u", "f", 8.0),
        ],
        &["f"],
    )
    .expect("static fixture")
}
