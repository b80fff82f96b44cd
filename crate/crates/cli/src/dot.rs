//! DOT rendering of an abstract result.
//!
//! One node per atom, numbered in deterministic traversal order (results are
//! canonically ordered sets). Solid edges point to children; a dashed edge
//! points from each stub back to the labeled ancestor carrying the same tag,
//! making cut cycles visible.

use std::fmt::Write as _;

use puredemand::analyzer::{render_tag, AbsAtom, AbsRes, Tag};
use puredemand::StackInterner;

struct Dot<'a> {
    st: &'a StackInterner,
    nodes: Vec<String>,
    edges: Vec<String>,
    /// Stack of (tag, node id) for labeled ancestors on the current path.
    parents: Vec<(Tag, usize)>,
    /// Dangling stubs: (stub node id, tag) with no ancestor at render time.
    unresolved: Vec<(usize, Tag)>,
}

impl<'a> Dot<'a> {
    fn node(&mut self, caption: &str, shape: &str) -> usize {
        let id = self.nodes.len();
        self.nodes.push(format!(
            "  n{id} [label=\"{}\", shape={shape}];",
            escape(caption)
        ));
        id
    }

    fn edge(&mut self, from: usize, to: usize, label: &str, dashed: bool) {
        let mut attrs = Vec::new();
        if !label.is_empty() {
            attrs.push(format!("label=\"{}\"", escape(label)));
        }
        if dashed {
            attrs.push("style=dashed".to_string());
        }
        if attrs.is_empty() {
            self.edges.push(format!("  n{from} -> n{to};"));
        } else {
            self.edges.push(format!("  n{from} -> n{to} [{}];", attrs.join(", ")));
        }
    }

    fn walk_set(&mut self, parent: usize, r: &AbsRes, edge_label: &str) {
        for atom in r {
            let child = self.walk_atom(atom);
            self.edge(parent, child, edge_label, false);
        }
    }

    fn walk_atom(&mut self, atom: &AbsAtom) -> usize {
        match atom {
            AbsAtom::Int(i) => self.node(&i.to_string(), "box"),
            AbsAtom::Bool(b) => self.node(&b.to_string(), "box"),
            AbsAtom::Fun(l, s) => {
                let cap = format!("fun@{l} {}", self.st.render(*s));
                self.node(&cap, "box")
            }
            AbsAtom::Record(fields) => {
                let id = self.node("record", "box");
                for (name, sub) in fields {
                    self.walk_set(id, sub, name.as_str());
                }
                id
            }
            AbsAtom::Op(l, op, r) => {
                let id = self.node(&format!("{op}"), "circle");
                self.walk_set(id, l, "lhs");
                self.walk_set(id, r, "rhs");
                id
            }
            AbsAtom::Proj(r, field) => {
                let id = self.node(&format!(".{field}"), "circle");
                self.walk_set(id, r, "");
                id
            }
            AbsAtom::Inspect(field, r) => {
                let id = self.node(&format!("{field}?"), "circle");
                self.walk_set(id, r, "");
                id
            }
            AbsAtom::Labeled(inner, tag) => {
                let cap = format!("r^{}", render_tag(tag, self.st));
                let id = self.node(&cap, "ellipse");
                self.parents.push((tag.clone(), id));
                self.walk_set(id, inner, "");
                self.parents.pop();
                id
            }
            AbsAtom::Stub(tag) => {
                let cap = format!("stub^{}", render_tag(tag, self.st));
                let id = self.node(&cap, "diamond");
                match self.parents.iter().rev().find(|(t, _)| t == tag) {
                    Some(&(_, parent)) => self.edge(id, parent, "cycle", true),
                    None => self.unresolved.push((id, tag.clone())),
                }
                id
            }
            AbsAtom::Guarded(g, inner) => {
                let id = self.node(&format!("guard = {}", g.expect), "ellipse");
                self.walk_set(id, &g.cond, "cond");
                self.walk_set(id, inner, "then");
                id
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Render an abstract result as a deterministic DOT digraph.
pub fn render_dot(r: &AbsRes, st: &StackInterner) -> String {
    let mut d = Dot { st, nodes: Vec::new(), edges: Vec::new(), parents: Vec::new(), unresolved: Vec::new() };
    let root = d.node("result", "plaintext");
    d.walk_set(root, r, "");
    // A stub can appear outside the subtree of its labeled parent after
    // set-level rewrites; link it to the first node carrying the same tag.
    let unresolved = std::mem::take(&mut d.unresolved);
    for (id, tag) in unresolved {
        let cap = format!("r^{}", render_tag(&tag, d.st));
        if let Some(target) = d
            .nodes
            .iter()
            .position(|n| n.contains(&escape(&cap)))
        {
            d.edge(id, target, "cycle", true);
        }
    }
    let mut out = String::from("digraph absres {\n  rankdir=TB;\n");
    for n in &d.nodes {
        let _ = writeln!(out, "{n}");
    }
    for e in &d.edges {
        let _ = writeln!(out, "{e}");
    }
    out.push_str("}\n");
    out
}
