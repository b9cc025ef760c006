use std::fmt::Write;

use super::Graph;

/// DIMACS CNF for "`g` has a proper `c`-coloring". Variable `x_{v,t}` is
/// numbered `v·c + t + 1`; one at-least-one-color clause per vertex, then
/// `c` clauses per edge.
pub fn export_dimacs_cnf(g: &Graph, c: usize) -> String {
    assert!(c >= 1, "at least one color");
    let n = g.vertex_count();
    let m = g.edge_count();
    let var = |v: usize, t: usize| v * c + t + 1;
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", n * c, n + m * c).unwrap();
    for v in 0..n {
        for t in 0..c {
            write!(out, "{} ", var(v, t)).unwrap();
        }
        out.push_str("0\n");
    }
    for (u, v) in g.edges() {
        for t in 0..c {
            writeln!(out, "-{} -{} 0", var(u, t), var(v, t)).unwrap();
        }
    }
    out
}
