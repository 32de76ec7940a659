//! Graphviz export.

use std::fmt::Write;

use thiserror::Error;

use crate::dpg::Dpg;
use crate::metrics::CommunityReport;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DotError {
    #[error("community report does not partition the {nodes} graph nodes")]
    Partition { nodes: usize },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions<'a> {
    /// Fill nodes by community.
    pub communities: Option<&'a CommunityReport>,
    /// Draw class nodes with a heavy border.
    pub highlight_classes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotDocument {
    pub text: String,
}

const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
];

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One line per node in id order, then one line per edge in `(src, dst)`
/// order. Decisions are boxes, classes ellipses.
pub fn export_dot(g: &Dpg, opts: &DotOptions) -> Result<DotDocument, DotError> {
    let membership = match opts.communities {
        Some(r) if !r.is_partition_of(g.len()) => return Err(DotError::Partition { nodes: g.len() }),
        Some(r) => Some(r.membership(g.len())),
        None => None,
    };
    let mut text = String::from("digraph dpg {\n");
    for n in g.nodes() {
        let class = n.predicate.is_class();
        let mut attrs = vec![
            format!("label={}", quote(&g.label(n.id))),
            format!("shape={}", if class { "ellipse" } else { "box" }),
        ];
        if let Some(of) = &membership {
            let c = of[n.id].expect("partition covers every node");
            attrs.push("style=filled".to_string());
            attrs.push(format!("fillcolor={}", quote(PALETTE[c % PALETTE.len()])));
        }
        if class && opts.highlight_classes {
            attrs.push("penwidth=3".to_string());
        }
        writeln!(text, "  n{} [{}];", n.id, attrs.join(", ")).unwrap();
    }
    for e in g.edges() {
        writeln!(text, "  n{} -> n{} [label=\"{}\"];", e.src, e.dst, e.weight).unwrap();
    }
    text.push_str("}\n");
    Ok(DotDocument { text })
}
