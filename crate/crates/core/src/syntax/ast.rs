//! Labeled AST and static indices.
//!
//! Every node of a program carries a `Label` assigned densely in a
//! deterministic pre-order traversal. All semantics and analyses index into
//! the program by label; the AST itself is immutable after construction.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;

/// A program point. Dense, assigned in pre-order, stable across re-parses of
/// identical text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Variable and record-field names.
pub type Sym = String;

/// Binary operators of the extended language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Lt,
    Le,
    Ge,
    And,
    Or,
    Xor,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One AST node. Children are referenced by label into `Program::nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    App { func: Label, arg: Label },
    Fun { param: Sym, body: Label },
    Var { name: Sym },
    Int(BigInt),
    Bool(bool),
    Op { op: BinOp, lhs: Label, rhs: Label },
    If { cond: Label, then_branch: Label, else_branch: Label },
    Record(Vec<(Sym, Label)>),
    Proj { rec: Label, field: Sym },
    Inspect { field: Sym, rec: Label },
    LetAssert { name: Sym, bound: Label, pred: Label },
}

impl Node {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Node::App { .. } => "app",
            Node::Fun { .. } => "fun",
            Node::Var { .. } => "var",
            Node::Int(_) => "int",
            Node::Bool(_) => "bool",
            Node::Op { .. } => "op",
            Node::If { .. } => "if",
            Node::Record(_) => "record",
            Node::Proj { .. } => "proj",
            Node::Inspect { .. } => "inspect",
            Node::LetAssert { .. } => "letassert",
        }
    }

    pub fn children(&self) -> Vec<Label> {
        match self {
            Node::App { func, arg } => vec![*func, *arg],
            Node::Fun { body, .. } => vec![*body],
            Node::Var { .. } | Node::Int(_) | Node::Bool(_) => vec![],
            Node::Op { lhs, rhs, .. } => vec![*lhs, *rhs],
            Node::If { cond, then_branch, else_branch } => {
                vec![*cond, *then_branch, *else_branch]
            }
            Node::Record(fields) => fields.iter().map(|(_, l)| *l).collect(),
            Node::Proj { rec, .. } => vec![*rec],
            Node::Inspect { rec, .. } => vec![*rec],
            Node::LetAssert { bound, pred, .. } => vec![*bound, *pred],
        }
    }
}

/// A validated, labeled program together with its static indices.
#[derive(Debug, Clone)]
pub struct Program {
    nodes: Vec<Node>,
    root: Label,
    parent: Vec<Option<Label>>,
    /// Nearest enclosing function node, per label.
    myfun: Vec<Option<Label>>,
    /// For variable occurrences: the function node that binds them.
    binder: HashMap<Label, Label>,
    /// For variable occurrences: enclosing non-binding functions between the
    /// occurrence and its binder (DeBruijn-style, counting from 0).
    depth: HashMap<Label, u32>,
}

impl Program {
    pub(crate) fn new(
        nodes: Vec<Node>,
        root: Label,
        parent: Vec<Option<Label>>,
        myfun: Vec<Option<Label>>,
        binder: HashMap<Label, Label>,
        depth: HashMap<Label, u32>,
    ) -> Self {
        Program { nodes, root, parent, myfun, binder, depth }
    }

    pub fn root(&self) -> Label {
        self.root
    }

    pub fn node(&self, l: Label) -> &Node {
        &self.nodes[l.0 as usize]
    }

    pub fn get(&self, l: Label) -> Option<&Node> {
        self.nodes.get(l.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> {
        (0..self.nodes.len() as u32).map(Label)
    }

    pub fn parent(&self, l: Label) -> Option<Label> {
        self.parent[l.0 as usize]
    }

    /// The nearest function node strictly enclosing `l`, if any.
    pub fn my_fun(&self, l: Label) -> Result<Option<Label>, StaticQueryError> {
        self.myfun
            .get(l.0 as usize)
            .copied()
            .ok_or(StaticQueryError::UnknownLabel(l))
    }

    /// Lexical depth of a variable occurrence: 0 when its binder is the
    /// nearest enclosing function, n > 0 otherwise.
    pub fn lexical_depth(&self, l: Label) -> Result<u32, StaticQueryError> {
        match self.get(l) {
            None => Err(StaticQueryError::UnknownLabel(l)),
            Some(Node::Var { .. }) => Ok(self.depth[&l]),
            Some(_) => Err(StaticQueryError::NotAVariable(l)),
        }
    }

    /// The function node binding a variable occurrence.
    pub fn binder_of(&self, l: Label) -> Option<Label> {
        self.binder.get(&l).copied()
    }

    /// True when the program uses only functions, applications, variables and
    /// literal values (the fragment the chain/display/optimized semantics
    /// support).
    pub fn is_core(&self) -> bool {
        self.nodes.iter().all(|n| {
            matches!(
                n,
                Node::App { .. } | Node::Fun { .. } | Node::Var { .. } | Node::Int(_) | Node::Bool(_)
            )
        })
    }

    /// Debug dump: one node per line, `label<TAB>kind<TAB>children-labels`.
    pub fn dump_ast(&self) -> String {
        let mut out = String::new();
        for l in self.labels() {
            let node = self.node(l);
            let children: Vec<String> =
                node.children().iter().map(|c| c.0.to_string()).collect();
            out.push_str(&format!("{}\t{}\t{}\n", l.0, node.kind_name(), children.join(",")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StaticQueryError {
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("label {0} is not a variable occurrence")]
    NotAVariable(Label),
}
