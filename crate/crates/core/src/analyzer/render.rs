//! Stable text rendering of abstract results.
//!
//! Atoms render in their canonical set order, so equal results always
//! produce byte-identical text.

use crate::stack::StackInterner;

use super::{AbsAtom, AbsRes, Site, Tag};

pub fn render_site(site: &Site) -> String {
    match site {
        Site::App(l) => format!("@{l}"),
        Site::Var(x, l) => format!("{x}^{l}"),
    }
}

pub fn render_tag(tag: &Tag, st: &StackInterner) -> String {
    format!("<{}, {}>", render_site(&tag.0), st.render(tag.1))
}

pub fn render_absres(r: &AbsRes, st: &StackInterner) -> String {
    let parts: Vec<String> = r.iter().map(|a| render_atom(a, st)).collect();
    format!("{{{}}}", parts.join(", "))
}

fn render_atom(a: &AbsAtom, st: &StackInterner) -> String {
    match a {
        AbsAtom::Int(n) => n.to_string(),
        AbsAtom::Bool(b) => b.to_string(),
        AbsAtom::Fun(l, s) => format!("<fun@{} {}>", l, st.render(*s)),
        AbsAtom::Record(fields) => {
            let parts: Vec<String> = fields
                .iter()
                .map(|(n, r)| format!("{} = {}", n, render_absres(r, st)))
                .collect();
            format!("{{{}}}", parts.join("; "))
        }
        AbsAtom::Op(l, op, r) => {
            format!("({} {} {})", render_absres(l, st), op.symbol(), render_absres(r, st))
        }
        AbsAtom::Proj(r, f) => format!("({}.{})", render_absres(r, st), f),
        AbsAtom::Inspect(f, r) => format!("({} in {})", f, render_absres(r, st)),
        AbsAtom::Labeled(r, tag) => {
            format!("{}^{}", render_absres(r, st), render_tag(tag, st))
        }
        AbsAtom::Stub(tag) => format!("stub^{}", render_tag(tag, st)),
        AbsAtom::Guarded(g, r) => format!(
            "({} = {} |> {})",
            render_absres(&g.cond, st),
            g.expect,
            render_absres(r, st)
        ),
    }
}
