//! AVM rendering in surface syntax. Shared and cyclic nodes get a tag at
//! their first occurrence; later occurrences print the tag alone.

use std::collections::HashMap;

use super::{Fs, NodeId};
use crate::simplify::{Literal, NormalForm};
use crate::syntax::{LIST_CONS, LIST_FIRST, LIST_NULL, LIST_REST};

struct Printer<'a> {
    fs: &'a Fs,
    shared: Vec<bool>,
    tags: HashMap<NodeId, usize>,
    out: String,
}

fn is_named(slot: &NormalForm, name: &str) -> bool {
    matches!(slot.as_literal(), Some(Literal::Type(n)) if &**n == name)
}

pub(crate) fn render(fs: &Fs) -> String {
    let mut indeg = vec![0usize; fs.nodes.len()];
    indeg[fs.root] = 1;
    for n in &fs.nodes {
        for &c in n.arcs.values() {
            indeg[c] += 1;
        }
    }
    let mut p = Printer { fs, shared: indeg.iter().map(|&d| d > 1).collect(), tags: HashMap::new(), out: String::new() };
    p.node(fs.root);
    p.out
}

impl Printer<'_> {
    fn slot_text(slot: &NormalForm, grouped: bool) -> String {
        let s = slot.to_string();
        match slot {
            NormalForm::Clauses { clauses, .. } if grouped && clauses.len() > 1 => format!("({s})"),
            _ => s,
        }
    }

    /// The elements and tail of a list starting at `x`, if it prints as one.
    fn list_cells(&self, x: NodeId) -> Option<(Vec<NodeId>, Option<NodeId>)> {
        let mut elems = Vec::new();
        let mut cur = x;
        loop {
            let n = &self.fs.nodes[cur];
            let is_cell = is_named(&n.slot, LIST_CONS)
                && n.arcs.len() == 2
                && n.arcs.contains_key(LIST_FIRST)
                && n.arcs.contains_key(LIST_REST)
                && (cur == x || !self.shared[cur]);
            if !is_cell {
                if cur == x {
                    return None;
                }
                let end = is_named(&n.slot, LIST_NULL) && n.arcs.is_empty() && !self.shared[cur];
                return Some((elems, if end { None } else { Some(cur) }));
            }
            elems.push(n.arcs[LIST_FIRST]);
            cur = n.arcs[LIST_REST];
            if cur == x {
                return Some((elems, Some(cur)));
            }
        }
    }

    fn node(&mut self, x: NodeId) {
        if let Some(&t) = self.tags.get(&x) {
            self.out.push_str(&format!("#{t}"));
            return;
        }
        let n = &self.fs.nodes[x];
        let bare = n.slot.is_top() && n.arcs.is_empty();
        if self.shared[x] {
            let t = self.tags.len() + 1;
            self.tags.insert(x, t);
            self.out.push_str(&format!("#{t}"));
            if bare {
                return;
            }
            self.out.push_str(" & ");
        }
        if let Some((elems, tail)) = self.list_cells(x) {
            self.out.push('<');
            for (i, e) in elems.into_iter().enumerate() {
                if i > 0 {
                    self.out.push_str(", ");
                }
                self.node(e);
            }
            if let Some(t) = tail {
                self.out.push_str(" . ");
                self.node(t);
            }
            self.out.push('>');
            return;
        }
        if is_named(&n.slot, LIST_NULL) && n.arcs.is_empty() {
            self.out.push_str("< >");
            return;
        }
        if n.arcs.is_empty() {
            self.out.push_str(&Self::slot_text(&n.slot, self.shared[x]));
            return;
        }
        if !n.slot.is_top() {
            self.out.push_str(&Self::slot_text(&n.slot, true));
            self.out.push_str(" & ");
        }
        self.out.push('[');
        let arcs: Vec<(String, NodeId)> = n.arcs.iter().map(|(a, &c)| (a.to_string(), c)).collect();
        for (i, (a, c)) in arcs.into_iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.out.push_str(&a);
            self.out.push(' ');
            self.node(c);
        }
        self.out.push(']');
    }
}
