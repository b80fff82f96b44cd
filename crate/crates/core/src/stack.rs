//! Interned call stacks.
//!
//! Stacks are persistent cons lists of application-site labels, hash-consed
//! in an arena so that structural equality coincides with id equality and
//! hashing a stack costs O(1). One interner serves one evaluation or
//! analysis session.

use std::collections::HashMap;

use crate::syntax::Label;

/// Identity of an interned stack within its [`StackInterner`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackId(pub u32);

impl StackId {
    pub const EMPTY: StackId = StackId(0);
}

#[derive(Debug, Clone)]
pub struct StackInterner {
    /// `nodes[0]` is the empty stack; every other entry is `(head, tail)`.
    nodes: Vec<Option<(Label, StackId)>>,
    map: HashMap<(Label, StackId), StackId>,
}

impl Default for StackInterner {
    fn default() -> Self {
        Self::new()
    }
}

impl StackInterner {
    pub fn new() -> Self {
        StackInterner { nodes: vec![None], map: HashMap::new() }
    }

    pub fn empty(&self) -> StackId {
        StackId::EMPTY
    }

    /// Push `frame` on top of `tail`, interning the result.
    pub fn push(&mut self, frame: Label, tail: StackId) -> StackId {
        if let Some(&id) = self.map.get(&(frame, tail)) {
            return id;
        }
        let id = StackId(self.nodes.len() as u32);
        self.nodes.push(Some((frame, tail)));
        self.map.insert((frame, tail), id);
        id
    }

    /// Top frame and remaining stack, or `None` for the empty stack.
    pub fn pop(&self, s: StackId) -> Option<(Label, StackId)> {
        self.nodes[s.0 as usize]
    }

    pub fn len(&self, s: StackId) -> usize {
        let mut n = 0;
        let mut cur = s;
        while let Some((_, rest)) = self.pop(cur) {
            n += 1;
            cur = rest;
        }
        n
    }

    pub fn is_empty(&self, s: StackId) -> bool {
        s == StackId::EMPTY
    }

    /// Frames from most recent to oldest.
    pub fn frames(&self, s: StackId) -> Vec<Label> {
        let mut out = Vec::new();
        let mut cur = s;
        while let Some((l, rest)) = self.pop(cur) {
            out.push(l);
            cur = rest;
        }
        out
    }

    /// Intern a stack given head-first frames.
    pub fn from_frames(&mut self, frames: &[Label]) -> StackId {
        let mut id = StackId::EMPTY;
        for &l in frames.iter().rev() {
            id = self.push(l, id);
        }
        id
    }

    /// Prepend `frame` and truncate to at most `k` frames.
    pub fn push_k(&mut self, frame: Label, s: StackId, k: usize) -> StackId {
        debug_assert!(k >= 1);
        let mut frames = self.frames(s);
        frames.insert(0, frame);
        frames.truncate(k);
        self.from_frames(&frames)
    }

    pub fn render(&self, s: StackId) -> String {
        let parts: Vec<String> = self.frames(s).iter().map(|l| l.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }
}
