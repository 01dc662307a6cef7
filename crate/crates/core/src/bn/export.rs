//! JSON and Graphviz renderings of learned structures.

use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{Dag, SearchTrace};
use crate::data::{FoodCategory, TimeSlot};

/// Node names for an 8-node category graph (snake-case keys).
pub fn category_names() -> Vec<String> {
    FoodCategory::ALL
        .iter()
        .map(|c| c.key().to_string())
        .collect()
}

fn category_labels() -> Vec<String> {
    FoodCategory::ALL
        .iter()
        .map(|c| c.label().to_string())
        .collect()
}

/// Labels for display: category labels for 8-node graphs, `names` otherwise.
fn labels_for(dag: &Dag, names: &[String]) -> Vec<String> {
    if dag.n_nodes() == FoodCategory::COUNT && names == category_names().as_slice() {
        category_labels()
    } else {
        names.to_vec()
    }
}

/// `(Parent → Child)` pairs, sorted by node order.
pub fn format_edges(dag: &Dag, names: &[String]) -> Vec<String> {
    let labels = labels_for(dag, names);
    dag.edges()
        .into_iter()
        .map(|(p, c)| format!("({} → {})", labels[p], labels[c]))
        .collect()
}

pub fn dag_json(slot: Option<TimeSlot>, names: &[String], trace: &SearchTrace) -> String {
    let dag = &trace.final_graph;
    let edges: Vec<Value> = dag
        .edges()
        .into_iter()
        .map(|(p, c)| json!({ "parent": names[p], "child": names[c] }))
        .collect();
    let steps: Vec<Value> = trace
        .iterations
        .iter()
        .map(|s| {
            json!({
                "move": s.mv.kind,
                "edge": { "parent": names[s.mv.parent], "child": names[s.mv.child] },
                "delta": s.delta(),
                "score_before": s.score_before,
                "score_after": s.score_after,
            })
        })
        .collect();
    let score = &trace.final_score;
    let doc = json!({
        "slot": slot.map(|s| s.key()),
        "score": score.total_bic,
        "log_likelihood": score.log_likelihood,
        "penalty": score.penalty,
        "d": score.d,
        "n_rows": score.n_rows,
        "converged": trace.converged,
        "initial_edges": trace.initial_graph.edges().into_iter()
            .map(|(p, c)| json!({ "parent": names[p], "child": names[c] }))
            .collect::<Vec<_>>(),
        "edges": edges,
        "edges_display": format_edges(dag, names),
        "singular_families": score.singular_families.iter().map(|&v| names[v].clone()).collect::<Vec<_>>(),
        "trace": steps,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("dag serializes");
    s.push('\n');
    s
}

pub fn dag_dot(slot: Option<TimeSlot>, names: &[String], dag: &Dag) -> String {
    let labels = labels_for(dag, names);
    let mut out = String::new();
    let title = slot.map_or("structure".to_string(), |s| {
        format!("{} ({})", s.key(), s.clock_range())
    });
    writeln!(out, "digraph \"{title}\" {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    for (name, label) in names.iter().zip(&labels) {
        writeln!(out, "  \"{name}\" [label=\"{label}\"];").unwrap();
    }
    for (p, c) in dag.edges() {
        writeln!(out, "  \"{}\" -> \"{}\";", names[p], names[c]).unwrap();
    }
    out.push_str("}\n");
    out
}
