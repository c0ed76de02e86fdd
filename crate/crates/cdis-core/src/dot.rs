//! Graphviz DOT rendering.
//!
//! Deterministic text output: vertices and edges are emitted in index
//! order, so equal graphs render to equal strings.

use std::fmt::Write as _;

use crate::graph::{DagWithSelection, VertexKind};
use crate::mixed::{Mark, MixedGraph};
use crate::twin::TwinGraph;

fn arrowhead(mark: Mark) -> &'static str {
    match mark {
        Mark::Tail => "none",
        Mark::Arrow => "normal",
        Mark::Circle => "odot",
    }
}

/// The base causal graph: observed vertices as circles, selection vertices
/// as double circles.
pub fn dag_dot(g: &DagWithSelection) -> String {
    let mut out = String::from("digraph model {\n  node [shape=circle];\n");
    let d = g.d();
    for v in 0..d {
        let _ = writeln!(out, "  X{v};");
    }
    for s in 0..g.t() {
        let _ = writeln!(out, "  S{s} [shape=doublecircle];");
    }
    for (p, c) in g.edges() {
        let from = format!("X{p}");
        let to = if (c as usize) < d { format!("X{c}") } else { format!("S{}", c as usize - d) };
        let _ = writeln!(out, "  {from} -> {to};");
    }
    out.push_str("}\n");
    out
}

/// The twin graph, with the reality world (ζ and the reality copies) and
/// the basal world (basal copies, shared noises, selection) in separate
/// clusters.
pub fn twin_dot(tw: &TwinGraph) -> String {
    let d = tw.base().d();
    let n = tw.graph().n();
    let mut id = vec![String::new(); n];
    let mut label = vec![String::new(); n];
    id[tw.zeta() as usize] = "Z".into();
    label[tw.zeta() as usize] = "ζ".into();
    for i in 0..d as u32 {
        let v = tw.x(i).unwrap() as usize;
        id[v] = format!("X{i}");
        label[v] = format!("X{i}");
        if let Some(star) = tw.x_star(i) {
            id[star as usize] = format!("Xs{i}");
            label[star as usize] = format!("X{i}*");
        }
        if let Some(e) = tw.noise_vertex(i) {
            id[e as usize] = format!("E{i}");
            label[e as usize] = format!("ε{i}");
        }
    }
    for (j, &s) in tw.s_star().iter().enumerate() {
        id[s as usize] = format!("Ss{j}");
        label[s as usize] = format!("S{j}*");
    }

    let mut out = String::from("digraph twin {\n  node [shape=circle];\n");
    out.push_str("  subgraph cluster_reality {\n    label=\"reality\";\n    style=solid;\n");
    let _ = writeln!(out, "    Z [label=\"ζ\" shape=point];");
    for i in 0..d as u32 {
        let v = tw.x(i).unwrap() as usize;
        let _ = writeln!(out, "    {} [label=\"{}\"];", id[v], label[v]);
    }
    out.push_str("  }\n");
    out.push_str("  subgraph cluster_basal {\n    label=\"basal\";\n    style=dashed;\n");
    for v in 0..n {
        let shape = match tw.graph().kinds()[v] {
            VertexKind::Counterfactual | VertexKind::Noise => "box",
            VertexKind::Selection => "doublecircle",
            _ => continue,
        };
        let _ = writeln!(
            out,
            "    {} [label=\"{}\" shape={shape} style=filled fillcolor=lightgrey];",
            id[v], label[v]
        );
    }
    out.push_str("  }\n");
    for (p, c) in tw.graph().edges() {
        let _ = writeln!(out, "  {} -> {};", id[p as usize], id[c as usize]);
    }
    out.push_str("}\n");
    out
}

/// A graph with endpoint marks: tails render as plain line ends, arrows as
/// normal heads, circles as odot heads.
pub fn mixed_dot(m: &MixedGraph) -> String {
    let mut id = Vec::with_capacity(m.n());
    let mut obs = 0usize;
    let mut sel = 0usize;
    for v in 0..m.n() {
        match m.kinds()[v] {
            VertexKind::Zeta => id.push(("Z".to_string(), "ζ".to_string())),
            VertexKind::Selection => {
                id.push((format!("S{sel}"), format!("S{sel}")));
                sel += 1;
            }
            _ => {
                id.push((format!("X{obs}"), format!("X{obs}")));
                obs += 1;
            }
        }
    }
    let mut out = String::from("digraph marks {\n  node [shape=circle];\n  edge [dir=both];\n");
    for (node, label) in &id {
        let _ = writeln!(out, "  {node} [label=\"{label}\"];");
    }
    for e in m.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [arrowtail={} arrowhead={}];",
            id[e.i as usize].0,
            id[e.j as usize].0,
            arrowhead(e.mark_i),
            arrowhead(e.mark_j),
        );
    }
    out.push_str("}\n");
    out
}
