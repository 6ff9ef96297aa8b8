//! Graphviz export for debugging. The layout of the output is not stable.

use std::fmt::Write;

use super::{DdManager, Edge, Node};

impl DdManager {
    /// DOT source for the diagrams rooted at `roots`. Solid edges are `then`
    /// branches, dashed edges are `else` branches.
    pub fn to_dot(&self, roots: &[(&str, Edge)]) -> String {
        let mut out = String::from("digraph quidd {\n");
        let edges: Vec<Edge> = roots.iter().map(|&(_, e)| e).collect();
        let mut nodes = self.reachable(&edges);
        nodes.sort();
        for e in &nodes {
            match self.node(*e) {
                Node::Terminal(v) => {
                    let _ = writeln!(out, "  n{} [shape=box,label=\"{}\"];", e.index(), v);
                }
                Node::Internal {
                    var,
                    then_edge,
                    else_edge,
                } => {
                    let _ = writeln!(out, "  n{} [shape=circle,label=\"{}\"];", e.index(), var);
                    let _ = writeln!(out, "  n{} -> n{};", e.index(), then_edge.index());
                    let _ = writeln!(out, "  n{} -> n{} [style=dashed];", e.index(), else_edge.index());
                }
            }
        }
        for (i, (name, e)) in roots.iter().enumerate() {
            let _ = writeln!(out, "  root{i} [shape=plaintext,label=\"{name}\"];");
            let _ = writeln!(out, "  root{i} -> n{};", e.index());
        }
        out.push_str("}\n");
        out
    }
}
