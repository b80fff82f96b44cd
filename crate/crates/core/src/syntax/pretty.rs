//! Fully parenthesized pretty-printer.
//!
//! The output is deliberately over-parenthesized so that re-parsing it yields
//! the same tree with the same labels, which the round-trip tests rely on.

use num_bigint::BigInt;
use num_traits::Signed;

use super::ast::{Label, Node, Program};

/// Render the whole program back to concrete syntax.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    write_expr(p, p.root(), &mut out);
    out
}

fn write_int(n: &BigInt, out: &mut String) {
    if n.is_negative() {
        out.push('(');
        out.push_str(&n.to_string());
        out.push(')');
    } else {
        out.push_str(&n.to_string());
    }
}

fn write_expr(p: &Program, l: Label, out: &mut String) {
    match p.node(l) {
        Node::App { func, arg } => {
            out.push('(');
            write_expr(p, *func, out);
            out.push(' ');
            write_expr(p, *arg, out);
            out.push(')');
        }
        Node::Fun { param, body } => {
            out.push_str("(fun ");
            out.push_str(param);
            out.push_str(" -> ");
            write_expr(p, *body, out);
            out.push(')');
        }
        Node::Var { name } => out.push_str(name),
        Node::Int(n) => write_int(n, out),
        Node::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Node::Op { op, lhs, rhs } => {
            out.push('(');
            write_expr(p, *lhs, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(p, *rhs, out);
            out.push(')');
        }
        Node::If { cond, then_branch, else_branch } => {
            out.push_str("(if ");
            write_expr(p, *cond, out);
            out.push_str(" then ");
            write_expr(p, *then_branch, out);
            out.push_str(" else ");
            write_expr(p, *else_branch, out);
            out.push(')');
        }
        Node::Record(fields) => {
            out.push('{');
            for (i, (name, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                } else {
                    out.push(' ');
                }
                out.push_str(name);
                out.push_str(" = ");
                write_expr(p, *v, out);
            }
            out.push_str(" }");
        }
        Node::Proj { rec, field } => {
            out.push('(');
            write_expr(p, *rec, out);
            out.push('.');
            out.push_str(field);
            out.push(')');
        }
        Node::Inspect { field, rec } => {
            out.push('(');
            out.push_str(field);
            out.push_str(" in ");
            write_expr(p, *rec, out);
            out.push(')');
        }
        Node::LetAssert { name, bound, pred } => {
            out.push_str("(letassert ");
            out.push_str(name);
            out.push_str(" = ");
            write_expr(p, *bound, out);
            out.push_str(" in ");
            write_expr(p, *pred, out);
            out.push(')');
        }
    }
}
