//! Mutable union-find arena used to build and unify structures.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{Clash, Fs, Node, NodeId, SlotLogic};
use crate::simplify::{Name, NormalForm};

pub(crate) struct Graph {
    nodes: Vec<Node>,
    parent: Vec<usize>,
    /// Content changed by a merge; clears the expanded mark.
    changed: Vec<bool>,
}

pub(crate) type Failure = (usize, String);

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new(), parent: Vec::new(), changed: Vec::new() }
    }

    pub fn from_fs(fs: &Fs) -> Self {
        let mut g = Graph::new();
        g.graft(fs);
        g
    }

    pub fn add(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.parent.push(self.parent.len());
        self.changed.push(false);
        self.nodes.len() - 1
    }

    /// Copies `fs` into the arena; returns its root.
    pub fn graft(&mut self, fs: &Fs) -> usize {
        let off = self.nodes.len();
        for n in &fs.nodes {
            let mut n = n.clone();
            for v in n.arcs.values_mut() {
                *v += off;
            }
            self.add(n);
        }
        off + fs.root
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    /// The child of `x` under `attr`, created empty if missing.
    pub fn child(&mut self, x: usize, attr: &str) -> usize {
        let r = self.find(x);
        if let Some(&c) = self.nodes[r].arcs.get(attr) {
            return self.find(c);
        }
        let c = self.add(Node::top());
        self.nodes[r].arcs.insert(Name::from(attr), c);
        self.changed[r] = true;
        c
    }

    pub fn unify(&mut self, a: usize, b: usize, logic: &dyn SlotLogic) -> Result<(), Failure> {
        let mut work = vec![(a, b)];
        while let Some((x, y)) = work.pop() {
            let (x, y) = (self.find(x), self.find(y));
            if x == y {
                continue;
            }
            let slot = logic.meet(&self.nodes[x].slot, &self.nodes[y].slot).map_err(|e| (x, e))?;
            if slot.is_bottom() {
                let reason = format!("{} and {} are incompatible", self.nodes[x].slot, self.nodes[y].slot);
                return Err((x, reason));
            }
            let yn = std::mem::replace(&mut self.nodes[y], Node::top());
            self.parent[y] = x;
            let xn = &mut self.nodes[x];
            let mut changed = slot != xn.slot || slot != yn.slot || self.changed[y];
            if xn.arcs.keys().ne(yn.arcs.keys()) {
                changed = true;
            }
            xn.slot = slot;
            xn.applied.extend(yn.applied);
            xn.expanded = xn.expanded && yn.expanded;
            for (attr, t) in yn.arcs {
                match xn.arcs.get(&attr) {
                    Some(&s) => work.push((s, t)),
                    None => {
                        xn.arcs.insert(attr, t);
                    }
                }
            }
            self.changed[x] |= changed;
            if !self.nodes[x].arcs.is_empty() && logic.is_leaf(&self.nodes[x].slot) {
                let reason = format!("{} cannot carry features", self.nodes[x].slot);
                return Err((x, reason));
            }
        }
        Ok(())
    }

    /// Restricts the slot of `x` to `slot` (conjoined with what is there).
    pub fn constrain(&mut self, x: usize, slot: NormalForm, logic: &dyn SlotLogic) -> Result<(), Failure> {
        let fresh = self.add(Node { slot, ..Node::top() });
        self.unify(x, fresh, logic)
    }

    /// Shortest attribute path from `root` to `target`.
    pub fn path_to(&mut self, root: usize, target: usize) -> Vec<Name> {
        let (root, target) = (self.find(root), self.find(target));
        let mut prev: HashMap<usize, (usize, Name)> = HashMap::new();
        let mut queue = VecDeque::from([root]);
        let mut seen = vec![false; self.nodes.len()];
        seen[root] = true;
        while let Some(x) = queue.pop_front() {
            if x == target {
                let mut path = Vec::new();
                let mut cur = x;
                while let Some((p, a)) = prev.get(&cur) {
                    path.push(a.clone());
                    cur = *p;
                }
                path.reverse();
                return path;
            }
            let arcs: Vec<(Name, usize)> = self.nodes[x].arcs.iter().map(|(a, &c)| (a.clone(), c)).collect();
            for (a, c) in arcs {
                let c = self.find(c);
                if !seen[c] {
                    seen[c] = true;
                    prev.insert(c, (x, a));
                    queue.push_back(c);
                }
            }
        }
        Vec::new()
    }

    pub fn clash(&mut self, root: usize, (node, reason): Failure) -> Clash {
        Clash { path: self.path_to(root, node), reason }
    }

    /// Compacts the part reachable from `root` into a canonical structure:
    /// breadth-first numbering over sorted attributes.
    pub fn finish(&mut self, root: usize, logic: &dyn SlotLogic) -> Result<Fs, Clash> {
        let root = self.find(root);
        let mut index: HashMap<usize, NodeId> = HashMap::new();
        let mut order = vec![root];
        index.insert(root, 0);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            let kids: Vec<usize> = self.nodes[x].arcs.values().copied().collect();
            for c in kids {
                let c = self.find(c);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(c) {
                    e.insert(order.len());
                    order.push(c);
                }
            }
            i += 1;
        }
        let mut nodes = Vec::with_capacity(order.len());
        for &x in &order {
            if !self.nodes[x].arcs.is_empty() && logic.is_leaf(&self.nodes[x].slot) {
                let reason = format!("{} cannot carry features", self.nodes[x].slot);
                return Err(self.clash(root, (x, reason)));
            }
            let arcs: BTreeMap<Name, NodeId> = self.nodes[x]
                .arcs
                .clone()
                .into_iter()
                .map(|(a, c)| {
                    let c = self.find(c);
                    (a, index[&c])
                })
                .collect();
            let n = &self.nodes[x];
            nodes.push(Node {
                slot: n.slot.clone(),
                arcs,
                applied: n.applied.clone(),
                expanded: n.expanded && !self.changed[x],
            });
        }
        // a node stays marked only if its whole substructure is
        loop {
            let mut dirty = false;
            for k in 0..nodes.len() {
                if nodes[k].expanded && nodes[k].arcs.values().any(|&c| !nodes[c].expanded) {
                    nodes[k].expanded = false;
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        Ok(Fs { nodes, root: 0 })
    }
}
