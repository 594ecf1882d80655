//! Typed feature structures: rooted, possibly cyclic graphs whose nodes
//! carry a type slot (a DNF over type symbols and atoms) and attribute arcs.

mod graph;
mod print;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::hierarchy::expr_from_ast;
use crate::simplify::{normalize, Expr, Literal, Name, NormalForm, Target};
use crate::syntax::{desugar_lists, TypeExprAst};

pub(crate) use graph::Graph;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub slot: NormalForm,
    pub arcs: BTreeMap<Name, NodeId>,
    /// Types whose definitional constraints were unified in here (or whose
    /// disjunction was split here).
    pub applied: BTreeSet<Name>,
    /// The node and everything below it is fully expanded.
    pub expanded: bool,
}

impl Node {
    pub fn top() -> Self {
        Node { slot: NormalForm::Top, arcs: BTreeMap::new(), applied: BTreeSet::new(), expanded: false }
    }
}

/// A compacted structure: node 0 is the root and nodes are numbered
/// breadth-first over sorted attributes, so equal numbering means
/// isomorphic graphs.
#[derive(Debug, Clone)]
pub struct Fs {
    nodes: Vec<Node>,
    root: NodeId,
}

/// Where and why a unification failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unification failure at {}: {reason}", display_path(path))]
pub struct Clash {
    pub path: Vec<Name>,
    pub reason: String,
}

pub fn display_path(path: &[Name]) -> String {
    if path.is_empty() {
        "<root>".into()
    } else {
        path.iter().map(|a| &**a).collect::<Vec<_>>().join("|")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Clash(#[from] Clash),
    #[error("disjunction or negation over feature terms is not supported")]
    FeatureDisjunction,
    #[error("unexpanded template call `@{0}`")]
    Template(String),
    #[error("{0}")]
    Slot(String),
}

/// Type-level decisions delegated by unification.
pub trait SlotLogic {
    /// Conjunction of two slots; `Bottom` signals failure.
    fn meet(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm, String>;
    fn slot_subsumes(&self, general: &NormalForm, specific: &NormalForm) -> bool;
    /// Slots that must not carry features (atoms, sorts).
    fn is_leaf(&self, slot: &NormalForm) -> bool;
    /// Slot for a feature-free type expression.
    fn slot(&self, e: &Expr) -> Result<NormalForm, String>;
}

/// Syntactic slot logic with no hierarchy: types are only related by the
/// boolean rules, atoms are leaves and pairwise disjoint.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlainLogic;

impl SlotLogic for PlainLogic {
    fn meet(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm, String> {
        normalize(&Expr::And(vec![a.to_expr(), b.to_expr()]), Target::Dnf, None).map_err(|e| e.to_string())
    }

    fn slot_subsumes(&self, general: &NormalForm, specific: &NormalForm) -> bool {
        term_cover(general, specific, |g, s| g == s)
    }

    fn is_leaf(&self, slot: &NormalForm) -> bool {
        let terms = slot.dnf_terms();
        !terms.is_empty() && terms.iter().all(|t| t.iter().any(|l| matches!(l, Literal::Atom(_))))
    }

    fn slot(&self, e: &Expr) -> Result<NormalForm, String> {
        normalize(e, Target::Dnf, None).map_err(|e| e.to_string())
    }
}

/// `general` ⊒ `specific` for DNF slots: every term of `specific` implies
/// some term of `general`, literal-wise via `implies(g, s)`.
pub fn term_cover(general: &NormalForm, specific: &NormalForm, implies: impl Fn(&Literal, &Literal) -> bool) -> bool {
    if general.is_top() || specific.is_bottom() {
        return true;
    }
    let g = general.dnf_terms();
    specific
        .dnf_terms()
        .iter()
        .all(|st| g.iter().any(|gt| gt.iter().all(|gl| st.iter().any(|sl| implies(gl, sl)))))
}

impl Fs {
    /// The unconstrained structure.
    pub fn top() -> Self {
        Fs { nodes: vec![Node::top()], root: 0 }
    }

    pub fn from_slot(slot: NormalForm) -> Self {
        Fs { nodes: vec![Node { slot, ..Node::top() }], root: 0 }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root_slot(&self) -> &NormalForm {
        &self.nodes[self.root].slot
    }

    pub fn get_path<S: AsRef<str>>(&self, path: &[S]) -> Option<NodeId> {
        let mut cur = self.root;
        for a in path {
            cur = *self.nodes[cur].arcs.get(a.as_ref())?;
        }
        Some(cur)
    }

    /// Breadth-first tree paths: the first path found to each node.
    pub fn paths(&self) -> Vec<Vec<Name>> {
        let mut paths: Vec<Option<Vec<Name>>> = vec![None; self.nodes.len()];
        paths[self.root] = Some(Vec::new());
        let mut queue = VecDeque::from([self.root]);
        while let Some(x) = queue.pop_front() {
            for (a, &c) in &self.nodes[x].arcs {
                if paths[c].is_none() {
                    let mut p = paths[x].clone().unwrap();
                    p.push(a.clone());
                    paths[c] = Some(p);
                    queue.push_back(c);
                }
            }
        }
        paths.into_iter().map(|p| p.unwrap_or_default()).collect()
    }

    /// Breadth-first parent of every node other than the root.
    pub fn tree_parents(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        seen[self.root] = true;
        let mut queue = VecDeque::from([self.root]);
        while let Some(x) = queue.pop_front() {
            for &c in self.nodes[x].arcs.values() {
                if !seen[c] {
                    seen[c] = true;
                    parent[c] = Some(x);
                    queue.push_back(c);
                }
            }
        }
        parent
    }

    /// The substructure rooted at `node`.
    pub fn sub(&self, node: NodeId, logic: &dyn SlotLogic) -> Fs {
        let mut g = Graph::from_fs(self);
        g.finish(node, logic).expect("a well-formed structure has well-formed parts")
    }

    pub fn unify(&self, other: &Fs, logic: &dyn SlotLogic) -> Result<Fs, Clash> {
        let mut g = Graph::from_fs(self);
        let b = g.graft(other);
        if let Err(f) = g.unify(self.root, b, logic) {
            return Err(g.clash(self.root, f));
        }
        g.finish(self.root, logic)
    }

    /// Unifies `other`'s root into `node` of this structure.
    pub fn unify_at(&self, node: NodeId, other: &Fs, logic: &dyn SlotLogic) -> Result<Fs, Clash> {
        self.unify_at_many(&[(node, other)], logic)
    }

    /// Unifies each structure into its node of this one, in one pass.
    pub fn unify_at_many(&self, items: &[(NodeId, &Fs)], logic: &dyn SlotLogic) -> Result<Fs, Clash> {
        let mut g = Graph::from_fs(self);
        for &(node, other) in items {
            let b = g.graft(other);
            if let Err(f) = g.unify(node, b, logic) {
                return Err(g.clash(self.root, f));
            }
        }
        g.finish(self.root, logic)
    }

    /// Replaces the slot of `node` by its conjunction with `slot`.
    pub fn constrain(&self, node: NodeId, slot: NormalForm, logic: &dyn SlotLogic) -> Result<Fs, Clash> {
        let mut g = Graph::from_fs(self);
        if let Err(f) = g.constrain(node, slot, logic) {
            return Err(g.clash(self.root, f));
        }
        g.finish(self.root, logic)
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id]
    }

    /// `self` subsumes `other`: a root-preserving map of nodes that keeps
    /// arcs and sharing and whose slots subsume their images.
    pub fn subsumes(&self, other: &Fs, logic: &dyn SlotLogic) -> bool {
        let mut map: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        let mut queue = VecDeque::from([(self.root, other.root)]);
        while let Some((x, y)) = queue.pop_front() {
            match map[x] {
                Some(z) if z == y => continue,
                Some(_) => return false,
                None => map[x] = Some(y),
            }
            if !logic.slot_subsumes(&self.nodes[x].slot, &other.nodes[y].slot) {
                return false;
            }
            for (a, &c) in &self.nodes[x].arcs {
                match other.nodes[y].arcs.get(a) {
                    Some(&d) => queue.push_back((c, d)),
                    None => return false,
                }
            }
        }
        true
    }

    /// Same graph up to node identity (ignoring expansion bookkeeping).
    pub fn isomorphic(&self, other: &Fs) -> bool {
        self.root == other.root
            && self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| a.slot == b.slot && a.arcs == b.arcs)
    }

    /// Nodes reachable from themselves.
    pub fn cyclic_nodes(&self) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for start in 0..self.nodes.len() {
            let mut seen = vec![false; self.nodes.len()];
            let mut stack: Vec<NodeId> = self.nodes[start].arcs.values().copied().collect();
            while let Some(x) = stack.pop() {
                if x == start {
                    out.insert(start);
                    break;
                }
                if !seen[x] {
                    seen[x] = true;
                    stack.extend(self.nodes[x].arcs.values());
                }
            }
        }
        out
    }
}

/// Builds a structure from a surface expression: feature terms become
/// arcs, equal tags one shared node, conjunctions unify.
pub fn build_fs(ast: &TypeExprAst, logic: &dyn SlotLogic) -> Result<Fs, BuildError> {
    let mut b = Builder { g: Graph::new(), tags: HashMap::new(), logic };
    let root = b.g.add(Node::top());
    b.build(root, &desugar_lists(ast)).map_err(|e| match e {
        Fail::At(f) => BuildError::Clash(b.g.clash(root, f)),
        Fail::Other(e) => e,
    })?;
    Ok(b.g.finish(root, logic)?)
}

enum Fail {
    At(graph::Failure),
    Other(BuildError),
}

struct Builder<'a> {
    g: Graph,
    tags: HashMap<String, usize>,
    logic: &'a dyn SlotLogic,
}

impl Builder<'_> {
    fn build(&mut self, node: usize, e: &TypeExprAst) -> Result<(), Fail> {
        match e {
            TypeExprAst::Conj(xs) => {
                for x in xs {
                    self.build(node, x)?;
                }
                Ok(())
            }
            TypeExprAst::FeatureTerm(fs) => {
                for (attr, v) in fs {
                    let c = self.g.child(node, attr);
                    self.build(c, v)?;
                }
                Ok(())
            }
            TypeExprAst::Coref(tag) => match self.tags.get(tag) {
                Some(&t) => self.g.unify(node, t, self.logic).map_err(Fail::At),
                None => {
                    self.tags.insert(tag.clone(), node);
                    Ok(())
                }
            },
            TypeExprAst::TemplateCall { name, .. } => Err(Fail::Other(BuildError::Template(name.clone()))),
            TypeExprAst::ListTerm { .. } => self.build(node, &desugar_lists(e)),
            _ => {
                let expr = expr_from_ast(e).ok_or(Fail::Other(BuildError::FeatureDisjunction))?;
                let slot = self.logic.slot(&expr).map_err(|m| Fail::Other(BuildError::Slot(m)))?;
                if slot.is_bottom() {
                    let reason = format!("{} denotes the empty set", crate::syntax::print_expr(e));
                    return Err(Fail::At((self.g.find(node), reason)));
                }
                self.g.constrain(node, slot, self.logic).map_err(Fail::At)
            }
        }
    }
}

impl fmt::Display for Fs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(self))
    }
}

#[cfg(test)]
mod tests;
