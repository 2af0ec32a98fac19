use std::fmt::Write;

use super::PolicyTreeNode;
use crate::game::GameModel;

/// Darkness in `[0, 1]` of a belief: how far its mean adaptability sits below
/// the uniform belief's. A uniform belief is white; mass on low adaptability
/// is dark.
pub fn belief_shade(model: &GameModel, belief: &[f64]) -> f64 {
    let alphas: Vec<f64> = model.types().types().iter().map(|t| t.adaptability).collect();
    let uniform = alphas.iter().sum::<f64>() / alphas.len() as f64;
    if uniform <= 0.0 {
        return 0.0;
    }
    let mean: f64 = belief.iter().zip(&alphas).map(|(p, a)| p * a).sum();
    ((uniform - mean) / uniform).clamp(0.0, 1.0)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: node label is the robot action and the belief (4
/// decimals), fill darkens with mass on low adaptability, edges carry the
/// observed human action in red (disagreement) or green (agreement).
pub fn to_dot(tree: &PolicyTreeNode, model: &GameModel) -> String {
    let mut out = String::from("digraph policy {\n  node [shape=circle, style=filled, fontname=\"Helvetica\"];\n");
    let mut ids = 0usize;
    emit(tree, model, &mut out, &mut ids);
    out.push_str("}\n");
    out
}

fn emit(node: &PolicyTreeNode, model: &GameModel, out: &mut String, next_id: &mut usize) -> usize {
    let id = *next_id;
    *next_id += 1;
    let action = node.action.map_or("-", |a| model.robot_actions()[a].as_str());
    let belief: Vec<String> = node.belief.iter().map(|p| format!("{p:.4}")).collect();
    let shade = belief_shade(model, &node.belief);
    let level = (255.0 * (1.0 - shade)).round() as u8;
    let font = if shade > 0.5 { "white" } else { "black" };
    writeln!(
        out,
        "  n{id} [label=\"{}\\n[{}]\", fillcolor=\"#{level:02x}{level:02x}{level:02x}\", fontcolor=\"{font}\"];",
        escape(action),
        belief.join(", ")
    )
    .unwrap();
    for edge in &node.children {
        let child = emit(&edge.node, model, out, next_id);
        let color = if edge.disagree { "red" } else { "green" };
        writeln!(
            out,
            "  n{id} -> n{child} [label=\"{}\", color=\"{color}\"];",
            escape(&model.human_actions()[edge.human_action])
        )
        .unwrap();
    }
    id
}
