//! Ground congruence closure over hash-consed terms.
//!
//! Predicate atoms are encoded as applications of the predicate symbol that
//! are merged with a distinguished `TRUE` node when asserted.

use std::collections::HashMap;

use crate::model::{SymbolRef, Term};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Fun {
    Op(SymbolRef),
    Pred(SymbolRef),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Leaf(Term),
    App(Fun, Vec<NodeId>),
    True,
}

#[derive(Clone, Debug)]
pub struct Closure {
    keys: Vec<Key>,
    /// Original term of each term node; `None` for atoms and `TRUE`.
    terms: Vec<Option<Term>>,
    port_free: Vec<bool>,
    index: HashMap<Key, NodeId>,
    parent: Vec<NodeId>,
    dirty: bool,
    true_node: NodeId,
}

impl Default for Closure {
    fn default() -> Self {
        Self::new()
    }
}

impl Closure {
    pub fn new() -> Self {
        let mut c = Closure {
            keys: Vec::new(),
            terms: Vec::new(),
            port_free: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
            dirty: false,
            true_node: 0,
        };
        c.true_node = c.intern(Key::True, None, true);
        c
    }

    fn intern(&mut self, key: Key, term: Option<Term>, port_free: bool) -> NodeId {
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.keys.len();
        self.keys.push(key.clone());
        self.terms.push(term);
        self.port_free.push(port_free);
        self.parent.push(id);
        self.index.insert(key, id);
        self.dirty = true;
        id
    }

    pub fn add_term(&mut self, t: &Term) -> NodeId {
        match t {
            Term::Var(_) => self.intern(Key::Leaf(t.clone()), Some(t.clone()), true),
            Term::Port(_) => self.intern(Key::Leaf(t.clone()), Some(t.clone()), false),
            Term::App(f, args) => {
                let ids: Vec<NodeId> = args.iter().map(|a| self.add_term(a)).collect();
                let pf = ids.iter().all(|&i| self.port_free[i]);
                self.intern(Key::App(Fun::Op(f.clone()), ids), Some(t.clone()), pf)
            }
        }
    }

    pub fn add_atom(&mut self, p: &SymbolRef, args: &[Term]) -> NodeId {
        let ids: Vec<NodeId> = args.iter().map(|a| self.add_term(a)).collect();
        self.intern(Key::App(Fun::Pred(p.clone()), ids), None, false)
    }

    pub fn true_node(&self) -> NodeId {
        self.true_node
    }

    pub fn find(&self, mut x: NodeId) -> NodeId {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: NodeId, b: NodeId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn merge(&mut self, a: NodeId, b: NodeId) {
        if self.union(a, b) {
            self.dirty = true;
        }
    }

    /// Restore the congruence invariant: applications of the same symbol
    /// to pairwise-equal arguments are equal.
    pub fn close(&mut self) {
        while self.dirty {
            self.dirty = false;
            let mut table: HashMap<(Fun, Vec<NodeId>), NodeId> = HashMap::new();
            for id in 0..self.keys.len() {
                if let Key::App(f, args) = &self.keys[id] {
                    let sig = (f.clone(), args.iter().map(|&a| self.find(a)).collect());
                    match table.get(&sig) {
                        Some(&other) => {
                            if self.union(other, id) {
                                self.dirty = true;
                            }
                        }
                        None => {
                            table.insert(sig, id);
                        }
                    }
                }
            }
        }
    }

    pub fn equal(&mut self, a: NodeId, b: NodeId) -> bool {
        self.close();
        self.find(a) == self.find(b)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Applications of `f` with `arity` arguments in the class of `class`,
    /// in creation order.
    pub fn apps_in_class(&mut self, class: NodeId, f: &Fun, arity: usize) -> Vec<Vec<NodeId>> {
        self.close();
        let root = self.find(class);
        (0..self.keys.len())
            .filter(|&id| self.find(id) == root)
            .filter_map(|id| match &self.keys[id] {
                Key::App(g, args) if g == f && args.len() == arity => Some(args.clone()),
                _ => None,
            })
            .collect()
    }

    /// Root ids of all classes that contain a term node, in creation order.
    pub fn term_classes(&mut self) -> Vec<NodeId> {
        self.close();
        let mut seen = Vec::new();
        for id in 0..self.keys.len() {
            if self.terms[id].is_some() {
                let r = self.find(id);
                if !seen.contains(&r) {
                    seen.push(r);
                }
            }
        }
        seen
    }

    /// Smallest port-free term in the class of `class`, ties broken by
    /// creation order.
    pub fn port_free_representative(&mut self, class: NodeId) -> Option<Term> {
        self.close();
        let root = self.find(class);
        (0..self.keys.len())
            .filter(|&id| self.port_free[id] && self.find(id) == root)
            .filter_map(|id| self.terms[id].clone())
            .min_by_key(|t| t.size())
    }
}
