//! Reduced multi-valued decision diagram encoding of PB(AMO) constraints.
//! Layer `i` branches on group `i`: one labelled edge per group literal and
//! an else edge for "no literal of this group".

use std::collections::HashMap;

use crate::cnf::{CnfBuilder, Lit, Prop};
use crate::error::EncodeError;

use super::PbLits;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Bot,
    Top,
    Inner(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Inner {
    layer: usize,
    edges: Vec<(Lit, Node)>,
    other: Node,
}

struct Builder<'a> {
    p: &'a PbLits,
    /// maximum sum of groups i.. for each layer i
    suffix_max: Vec<i64>,
    memo: HashMap<(usize, i64), Node>,
    unique: HashMap<Inner, usize>,
    nodes: Vec<Inner>,
    limit: usize,
}

impl Builder<'_> {
    fn node(&mut self, layer: usize, r: i64) -> Result<Node, EncodeError> {
        if r < 0 {
            return Ok(Node::Bot);
        }
        if r >= self.suffix_max[layer] {
            return Ok(Node::Top);
        }
        if let Some(&n) = self.memo.get(&(layer, r)) {
            return Ok(n);
        }
        let other = self.node(layer + 1, r)?;
        let mut edges = Vec::with_capacity(self.p.groups[layer].len());
        for &(w, l) in &self.p.groups[layer] {
            edges.push((l, self.node(layer + 1, r - w)?));
        }
        let n = if edges.iter().all(|e| e.1 == other) {
            other
        } else {
            let inner = Inner { layer, edges, other };
            let id = match self.unique.get(&inner) {
                Some(&id) => id,
                None => {
                    if self.nodes.len() >= self.limit {
                        return Err(EncodeError::SizeAbort { cap: self.limit });
                    }
                    let id = self.nodes.len();
                    self.unique.insert(inner.clone(), id);
                    self.nodes.push(inner);
                    id
                }
            };
            Node::Inner(id)
        };
        self.memo.insert((layer, r), n);
        Ok(n)
    }
}

pub fn encode(p: &PbLits, b: &mut CnfBuilder) -> Result<(), EncodeError> {
    let m = p.groups.len();
    let mut suffix_max = vec![0i64; m + 1];
    for i in (0..m).rev() {
        let w = p.groups[i].iter().map(|t| t.0).max().unwrap_or(0);
        suffix_max[i] = suffix_max[i + 1].saturating_add(w);
    }
    let mut mb = Builder {
        p,
        suffix_max,
        memo: HashMap::new(),
        unique: HashMap::new(),
        nodes: Vec::new(),
        limit: b.cap(),
    };
    let root = mb.node(0, p.bound)?;
    let vars: Vec<Lit> = (0..mb.nodes.len()).map(|_| b.new_var()).collect();
    let prop = |n: Node| match n {
        Node::Bot => Prop::False,
        Node::Top => Prop::True,
        Node::Inner(i) => Prop::Lit(vars[i]),
    };
    match root {
        Node::Top => return Ok(()),
        Node::Bot => return b.add(&[]),
        Node::Inner(_) => b.add(&[prop(root)])?,
    }
    for (i, n) in mb.nodes.iter().enumerate() {
        let parent = Prop::Lit(vars[i]);
        for &(l, child) in &n.edges {
            b.add(&[!parent, Prop::Lit(!l), prop(child)])?;
        }
        b.add(&[!parent, prop(n.other)])?;
    }
    Ok(())
}
