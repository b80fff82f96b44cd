//! Recursive-descent parser producing a validated, labeled `Program`.
//!
//! `let x = e1 in e2` desugars to `(fun x -> e2) e1` during parsing, so the
//! labeled tree only ever contains the abstract grammar's constructors plus
//! `letassert`.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;

use super::ast::{BinOp, Label, Node, Program, Sym};
use super::lexer::{lex, Tok, Token};
use super::SyntaxError;

enum PExpr {
    App(Box<PExpr>, Box<PExpr>),
    Fun(Sym, Box<PExpr>),
    Var(Sym),
    Int(BigInt),
    Bool(bool),
    Op(BinOp, Box<PExpr>, Box<PExpr>),
    If(Box<PExpr>, Box<PExpr>, Box<PExpr>),
    Record(Vec<(Sym, PExpr)>),
    Proj(Box<PExpr>, Sym),
    Inspect(Sym, Box<PExpr>),
    LetAssert(Sym, Box<PExpr>, Box<PExpr>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError::at(line, col, msg)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<Sym, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    /// `allow_in` is false while parsing the bound expression of a
    /// `let`/`letassert`, where a top-level `l in e` would swallow the
    /// binding's own `in`. Parentheses reset it.
    fn expr(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        match self.peek() {
            Some(Tok::Fun) => {
                self.bump();
                let param = self.ident("parameter name after `fun`")?;
                self.expect(Tok::Arrow, "`->`")?;
                let body = self.expr(allow_in)?;
                Ok(PExpr::Fun(param, Box::new(body)))
            }
            Some(Tok::If) => {
                self.bump();
                let cond = self.expr(allow_in)?;
                self.expect(Tok::Then, "`then`")?;
                let thence = self.expr(allow_in)?;
                self.expect(Tok::Else, "`else`")?;
                let otherwise = self.expr(allow_in)?;
                Ok(PExpr::If(Box::new(cond), Box::new(thence), Box::new(otherwise)))
            }
            Some(Tok::Let) => {
                self.bump();
                let name = self.ident("binding name after `let`")?;
                self.expect(Tok::Eq, "`=`")?;
                let bound = self.expr(false)?;
                self.expect(Tok::In, "`in`")?;
                let body = self.expr(allow_in)?;
                // let x = e1 in e2  ==>  (fun x -> e2) e1
                Ok(PExpr::App(Box::new(PExpr::Fun(name, Box::new(body))), Box::new(bound)))
            }
            Some(Tok::LetAssert) => {
                self.bump();
                let name = self.ident("binding name after `letassert`")?;
                self.expect(Tok::Eq, "`=`")?;
                let bound = self.expr(false)?;
                self.expect(Tok::In, "`in`")?;
                let pred = self.expr(allow_in)?;
                Ok(PExpr::LetAssert(name, Box::new(bound), Box::new(pred)))
            }
            _ => self.inspect_level(allow_in),
        }
    }

    fn inspect_level(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        if allow_in {
            if let (Some(Tok::Ident(field)), Some(Tok::In)) = (self.peek(), self.peek2()) {
                let field = field.clone();
                self.pos += 2;
                let rec = self.inspect_level(allow_in)?;
                return Ok(PExpr::Inspect(field, Box::new(rec)));
            }
        }
        self.or_level(allow_in)
    }

    fn or_level(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        let mut lhs = self.and_level(allow_in)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Or) => BinOp::Or,
                Some(Tok::Xor) => BinOp::Xor,
                _ => break,
            };
            self.bump();
            let rhs = self.and_level(allow_in)?;
            lhs = PExpr::Op(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_level(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        let mut lhs = self.cmp_level(allow_in)?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.cmp_level(allow_in)?;
            lhs = PExpr::Op(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp_level(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        let lhs = self.add_level(allow_in)?;
        let op = match self.peek() {
            Some(Tok::Eq) => BinOp::Eq,
            Some(Tok::Lt) => BinOp::Lt,
            Some(Tok::Le) => BinOp::Le,
            Some(Tok::Ge) => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_level(allow_in)?;
        Ok(PExpr::Op(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_level(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        let mut lhs = self.app_level(allow_in)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.app_level(allow_in)?;
            lhs = PExpr::Op(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                Tok::Ident(_)
                    | Tok::Int(_)
                    | Tok::True
                    | Tok::False
                    | Tok::LParen
                    | Tok::LBrace
            )
        )
    }

    fn app_level(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        let mut head = self.post_level(allow_in)?;
        while self.starts_atom() {
            let arg = self.post_level(allow_in)?;
            head = PExpr::App(Box::new(head), Box::new(arg));
        }
        Ok(head)
    }

    fn post_level(&mut self, allow_in: bool) -> Result<PExpr, SyntaxError> {
        let mut e = self.atom(allow_in)?;
        while self.peek() == Some(&Tok::Dot) {
            self.bump();
            let field = self.ident("field name after `.`")?;
            e = PExpr::Proj(Box::new(e), field);
        }
        Ok(e)
    }

    fn atom(&mut self, _allow_in: bool) -> Result<PExpr, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.bump();
                Ok(PExpr::Var(s))
            }
            Some(Tok::Int(n)) => {
                self.bump();
                Ok(PExpr::Int(n))
            }
            Some(Tok::Minus) => {
                // negative integer literal, used by the pretty-printer
                self.bump();
                match self.bump() {
                    Some(Tok::Int(n)) => Ok(PExpr::Int(-n)),
                    _ => Err(self.err("expected integer after unary `-`")),
                }
            }
            Some(Tok::True) => {
                self.bump();
                Ok(PExpr::Bool(true))
            }
            Some(Tok::False) => {
                self.bump();
                Ok(PExpr::Bool(false))
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr(true)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::LBrace) => {
                self.bump();
                let mut fields = Vec::new();
                if self.peek() != Some(&Tok::RBrace) {
                    loop {
                        let name = self.ident("record field name")?;
                        self.expect(Tok::Eq, "`=`")?;
                        let val = self.expr(true)?;
                        fields.push((name, val));
                        if self.peek() == Some(&Tok::Semi) {
                            self.bump();
                            if self.peek() == Some(&Tok::RBrace) {
                                break;
                            }
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace, "`}`")?;
                Ok(PExpr::Record(fields))
            }
            _ => Err(self.err("expected an expression")),
        }
    }
}

/// Parse and validate a source program.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(SyntaxError::at(1, 1, "empty program"));
    }
    let mut p = Parser { toks, pos: 0 };
    let tree = p.expr(true)?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input after program"));
    }
    build(tree)
}

/// Flatten the parse tree in pre-order, assign dense labels and validate.
fn build(tree: PExpr) -> Result<Program, SyntaxError> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut parent: Vec<Option<Label>> = Vec::new();

    fn flatten(e: PExpr, par: Option<Label>, nodes: &mut Vec<Node>, parent: &mut Vec<Option<Label>>) -> Label {
        let label = Label(nodes.len() as u32);
        // placeholder replaced once children are flattened
        nodes.push(Node::Bool(false));
        parent.push(par);
        let node = match e {
            PExpr::App(f, a) => {
                let func = flatten(*f, Some(label), nodes, parent);
                let arg = flatten(*a, Some(label), nodes, parent);
                Node::App { func, arg }
            }
            PExpr::Fun(param, body) => {
                let body = flatten(*body, Some(label), nodes, parent);
                Node::Fun { param, body }
            }
            PExpr::Var(name) => Node::Var { name },
            PExpr::Int(n) => Node::Int(n),
            PExpr::Bool(b) => Node::Bool(b),
            PExpr::Op(op, l, r) => {
                let lhs = flatten(*l, Some(label), nodes, parent);
                let rhs = flatten(*r, Some(label), nodes, parent);
                Node::Op { op, lhs, rhs }
            }
            PExpr::If(c, t, e) => {
                let cond = flatten(*c, Some(label), nodes, parent);
                let then_branch = flatten(*t, Some(label), nodes, parent);
                let else_branch = flatten(*e, Some(label), nodes, parent);
                Node::If { cond, then_branch, else_branch }
            }
            PExpr::Record(fields) => {
                let mut out = Vec::with_capacity(fields.len());
                for (name, v) in fields {
                    let l = flatten(v, Some(label), nodes, parent);
                    out.push((name, l));
                }
                Node::Record(out)
            }
            PExpr::Proj(r, field) => {
                let rec = flatten(*r, Some(label), nodes, parent);
                Node::Proj { rec, field }
            }
            PExpr::Inspect(field, r) => {
                let rec = flatten(*r, Some(label), nodes, parent);
                Node::Inspect { field, rec }
            }
            PExpr::LetAssert(name, b, pr) => {
                let bound = flatten(*b, Some(label), nodes, parent);
                let pred = flatten(*pr, Some(label), nodes, parent);
                Node::LetAssert { name, bound, pred }
            }
        };
        nodes[label.0 as usize] = node;
        label
    }

    let root = flatten(tree, None, &mut nodes, &mut parent);

    // Global binder uniqueness (fun parameters and letassert names).
    let mut seen: HashSet<&str> = HashSet::new();
    for n in &nodes {
        let name = match n {
            Node::Fun { param, .. } => Some(param.as_str()),
            Node::LetAssert { name, .. } => Some(name.as_str()),
            _ => None,
        };
        if let Some(name) = name {
            if !seen.insert(name) {
                return Err(SyntaxError::Validation(format!("duplicate binder `{name}`")));
            }
        }
    }

    // Record fields pairwise distinct.
    for n in &nodes {
        if let Node::Record(fields) = n {
            let mut fs: HashSet<&str> = HashSet::new();
            for (f, _) in fields {
                if !fs.insert(f.as_str()) {
                    return Err(SyntaxError::Validation(format!("duplicate record field `{f}`")));
                }
            }
        }
    }

    // myfun: nearest enclosing function node, per label.
    let mut myfun: Vec<Option<Label>> = vec![None; nodes.len()];
    for i in 0..nodes.len() {
        let mut cur = parent[i];
        while let Some(p) = cur {
            if matches!(nodes[p.0 as usize], Node::Fun { .. }) {
                myfun[i] = Some(p);
                break;
            }
            cur = parent[p.0 as usize];
        }
    }

    // Variable binders and lexical depths; closedness check.
    let mut binder: HashMap<Label, Label> = HashMap::new();
    let mut depth: HashMap<Label, u32> = HashMap::new();
    for i in 0..nodes.len() {
        let name = match &nodes[i] {
            Node::Var { name } => name.clone(),
            _ => continue,
        };
        let occ = Label(i as u32);
        let mut funs_crossed = 0u32;
        let mut child = occ;
        let mut cur = parent[i];
        let mut found = false;
        while let Some(p) = cur {
            match &nodes[p.0 as usize] {
                Node::Fun { param, .. } => {
                    if *param == name {
                        binder.insert(occ, p);
                        depth.insert(occ, funs_crossed);
                        found = true;
                        break;
                    }
                    funs_crossed += 1;
                }
                Node::LetAssert { name: la, pred, .. }
                    // the letassert name is in scope only inside the predicate
                    if *la == name && child == *pred => {
                        binder.insert(occ, p);
                        depth.insert(occ, funs_crossed);
                        found = true;
                        break;
                    }
                _ => {}
            }
            child = p;
            cur = parent[p.0 as usize];
        }
        if !found {
            return Err(SyntaxError::Validation(format!("unbound variable `{name}`")));
        }
    }

    Ok(Program::new(nodes, root, parent, myfun, binder, depth))
}
