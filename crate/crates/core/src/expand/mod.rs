//! Type expansion: unify the definitional constraints of every type in a
//! structure into it, lazily for recursive types, under user controls.

mod control;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

pub use control::{Control, ControlError, Mode, PathPattern, DEFAULT_MAX_NODES, DEFAULT_MAX_PATH_LENGTH, DEFAULT_STEP_BUDGET};

use crate::fs::{display_path, Clash, Fs, NodeId};
use crate::hierarchy::{Hierarchy, Kind, TypeId};
use crate::simplify::{Expr, Literal, Name, NormalForm, Target};
use crate::typesys::{conj_ancestors, TypeSystem};

/// Maximal number of open alternatives before giving up.
const MAX_ALTERNATIVES: usize = 4096;

/// Types on a cycle of the dependency graph (definition bodies, parents
/// and alternatives).
pub fn detect_recursive(h: &Hierarchy) -> BTreeSet<TypeId> {
    let mut g: DiGraph<TypeId, ()> = DiGraph::new();
    let mut index = HashMap::new();
    for t in h.ids() {
        index.insert(t, g.add_node(t));
    }
    let mut out = BTreeSet::new();
    for t in h.ids() {
        for d in h.dependencies(t) {
            if let Some(&j) = index.get(&d) {
                g.add_edge(index[&t], j, ());
            }
            if d == t {
                out.insert(t);
            }
        }
    }
    for scc in tarjan_scc(&g) {
        if scc.len() > 1 {
            out.extend(scc.iter().map(|&n| g[n]));
        }
    }
    out
}

/// Refreshes the recursive flags of every type.
pub fn mark_recursive(ts: &mut TypeSystem) -> BTreeSet<TypeId> {
    let rec = detect_recursive(ts.hierarchy());
    ts.hierarchy_mut().set_recursive(&rec);
    rec
}

#[derive(Debug, Clone)]
pub enum Outcome {
    /// The alternatives that survived, each expanded.
    Consistent(Vec<Fs>),
    Inconsistent(Clash),
    /// Completeness was abandoned, not refuted.
    Bounded(String),
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Consistent(_) => "consistent",
            Outcome::Inconsistent(_) => "inconsistent",
            Outcome::Bounded(_) => "bounded",
        }
    }
}

/// Renders alternatives one per line, continuation lines starting `| `.
pub fn render_alternatives(alts: &[Fs]) -> String {
    alts.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("\n| ")
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Consistent(alts) => f.write_str(&render_alternatives(alts)),
            Outcome::Inconsistent(c) => write!(f, "*bottom* at {}: {}", display_path(&c.path), c.reason),
            Outcome::Bounded(why) => write!(f, "bounded: {why}"),
        }
    }
}

enum Status {
    Done,
    /// Left symbolic by a control or the lazy rule.
    Stopped,
    /// Replacement alternatives; failures are pruned.
    Work(Vec<Result<Fs, Clash>>),
    /// Skeletons of these conjunctive ancestors are due.
    Apply(BTreeSet<TypeId>),
}

pub struct Expander<'a> {
    ts: &'a TypeSystem,
    control: &'a Control,
    contributes: RefCell<HashMap<TypeId, bool>>,
    inherited: RefCell<HashMap<TypeId, Option<Fs>>>,
}

impl<'a> Expander<'a> {
    pub fn new(ts: &'a TypeSystem, control: &'a Control) -> Self {
        Expander { ts, control, contributes: RefCell::default(), inherited: RefCell::default() }
    }

    fn h(&self) -> &Hierarchy {
        self.ts.hierarchy()
    }

    fn known(&self, name: &str) -> Option<TypeId> {
        self.h().id(name).filter(|&t| self.h().entry(t).alive)
    }

    fn disjunctive(&self, t: TypeId) -> bool {
        !self.h().entry(t).disj_alts.is_empty()
    }

    fn has_skeleton(&self, t: TypeId) -> bool {
        self.h().entry(t).skeleton.is_some()
    }

    /// Expanding `t` can add feature constraints.
    fn contributes(&self, t: TypeId) -> bool {
        if let Some(&v) = self.contributes.borrow().get(&t) {
            return v;
        }
        self.contributes.borrow_mut().insert(t, false);
        let v = conj_ancestors(self.h(), t).into_iter().any(|u| {
            self.has_skeleton(u) || (self.disjunctive(u) && self.h().entry(u).disj_alts.iter().any(|&a| self.contributes(a)))
        });
        self.contributes.borrow_mut().insert(t, v);
        v
    }

    fn literal_contributes(&self, l: &Literal) -> bool {
        match l {
            Literal::Type(n) => self.known(n).is_some_and(|t| self.contributes(t)),
            _ => false,
        }
    }

    /// The boolean meaning of `t`, spelling out intermediates.
    fn type_expr(&self, t: TypeId) -> Expr {
        let e = self.h().entry(t);
        if e.kind != Kind::Intermediate {
            return Expr::ty(&e.name);
        }
        if !e.disj_alts.is_empty() {
            return Expr::Or(e.disj_alts.iter().map(|&a| self.type_expr(a)).collect());
        }
        if !e.components.is_empty() {
            return Expr::And(e.components.iter().map(|&a| self.type_expr(a)).collect());
        }
        match self.h().declarations().iter().find(|s| s.members.contains(&t)) {
            Some(s) => Expr::not(self.type_expr(s.members.iter().copied().find(|&m| m != t).unwrap_or(t))),
            None => Expr::ty(&e.name),
        }
    }

    /// Unification of all skeletons `t` inherits; `None` when they clash.
    fn inherited(&self, t: TypeId) -> Option<Fs> {
        if let Some(v) = self.inherited.borrow().get(&t) {
            return v.clone();
        }
        let mut acc = Some(Fs::top());
        for u in conj_ancestors(self.h(), t) {
            let Some(f) = acc.take() else { break };
            acc = match self.ts.skeleton(u) {
                Ok(None) => Some(f),
                Ok(Some(s)) => f.unify(&s, self.ts).ok(),
                Err(_) => None,
            };
        }
        self.inherited.borrow_mut().insert(t, acc.clone());
        acc
    }

    fn matches_any(&self, names: &BTreeSet<String>, t: TypeId) -> bool {
        names.iter().any(|n| self.known(n).is_some_and(|g| self.h().subsumes(g, t)))
    }

    /// How often `t` was already expanded on the tree path above `x`.
    fn prefix_count(fs: &Fs, parents: &[Option<NodeId>], x: NodeId, name: &str) -> usize {
        let mut n = 0;
        let mut cur = parents[x];
        while let Some(p) = cur {
            if fs.node(p).applied.contains(name) {
                n += 1;
            }
            cur = parents[p];
        }
        n
    }

    /// The node's substructure adds nothing to what `t` itself provides,
    /// so expanding it again would only repeat a prefix.
    fn lazy_stop(&self, fs: &Fs, x: NodeId, t: TypeId) -> bool {
        let mut sub = fs.sub(x, self.ts);
        let root = sub.root();
        sub.node_mut(root).slot = NormalForm::Top;
        let alts = if self.disjunctive(t) { self.h().entry(t).disj_alts.clone() } else { vec![t] };
        alts.into_iter().all(|a| match self.inherited(a) {
            None => true,
            Some(i) => sub.subsumes(&i, self.ts),
        })
    }

    fn too_long(&self, path: &[Name]) -> Option<String> {
        let m = self.control.max_path_length?;
        (path.len() > m).then(|| format!("path {} exceeds max-path-length {m}", display_path(path)))
    }

    fn status(&self, fs: &Fs, x: NodeId, path: &[Name], parents: &[Option<NodeId>]) -> Result<Status, String> {
        if self.control.blocked_path(path) {
            return Ok(Status::Stopped);
        }
        let node = fs.node(x);
        let terms = node.slot.dnf_terms();
        if terms.len() > 1 {
            if !terms.iter().flatten().any(|l| self.literal_contributes(l)) {
                return Ok(Status::Done);
            }
            if let Some(why) = self.too_long(path) {
                return Err(why);
            }
            let alts = terms
                .into_iter()
                .map(|t| {
                    let slot = NormalForm::Clauses { target: Target::Dnf, clauses: vec![t] };
                    fs.constrain(x, slot, self.ts)
                })
                .collect();
            return Ok(Status::Work(alts));
        }
        let forced = self.control.forced_path(path);
        let mut stopped = false;
        let mut apply: BTreeSet<TypeId> = BTreeSet::new();
        let own: Vec<TypeId> = terms
            .iter()
            .flatten()
            .filter_map(|l| match l {
                Literal::Type(n) => self.known(n),
                _ => None,
            })
            .collect();
        // a disjunction the node's own types already decide needs no split
        let decided = |u: TypeId| self.h().entry(u).disj_alts.iter().any(|&a| own.iter().any(|&t| self.h().subsumes(a, t)));
        for lit in terms.into_iter().flatten() {
            let Literal::Type(n) = &lit else { continue };
            let Some(t) = self.known(n) else { continue };
            if self.matches_any(&self.control.never, t) {
                stopped = true;
                continue;
            }
            let pending: Vec<TypeId> = conj_ancestors(self.h(), t)
                .into_iter()
                .filter(|&u| !node.applied.contains(&**self.h().name(u)) && !apply.contains(&u))
                .collect();
            let splits = pending.iter().copied().find(|&u| self.disjunctive(u) && self.contributes(u) && !decided(u));
            if splits.is_none() && !pending.iter().any(|&u| self.has_skeleton(u)) {
                continue;
            }
            let count = Self::prefix_count(fs, parents, x, n);
            if let Some(&d) = self.control.depth.get(&**n) {
                if count >= d {
                    match self.control.mode {
                        Mode::Complete => return Err(format!("depth bound {d} for {n} reached at {}", display_path(path))),
                        Mode::Resolved => {
                            stopped = true;
                            continue;
                        }
                    }
                }
            }
            if self.control.mode == Mode::Resolved
                && !forced
                && count >= 1
                && self.h().entry(t).recursive
                && !self.matches_any(&self.control.always, t)
                && self.lazy_stop(fs, x, t)
            {
                stopped = true;
                continue;
            }
            if let Some(why) = self.too_long(path) {
                return Err(why);
            }
            if let Some(u) = splits {
                return Ok(Status::Work(self.split(fs, x, path, u)));
            }
            apply.extend(pending);
        }
        if !apply.is_empty() {
            return Ok(Status::Apply(apply));
        }
        Ok(if stopped { Status::Stopped } else { Status::Done })
    }

    fn mark(fs: &mut Fs, path: &[Name], names: impl IntoIterator<Item = Name>) {
        let x = fs.get_path(path).expect("unification keeps paths");
        fs.node_mut(x).applied.extend(names);
    }

    fn skeleton_clash(path: &[Name], e: String) -> Clash {
        Clash { path: path.to_vec(), reason: e }
    }

    /// One alternative per disjunct of `u`, each carrying `u`'s own
    /// skeleton.
    fn split(&self, fs: &Fs, x: NodeId, path: &[Name], u: TypeId) -> Vec<Result<Fs, Clash>> {
        let name = self.h().name(u).clone();
        let own = self.ts.skeleton(u);
        self.h()
            .entry(u)
            .disj_alts
            .iter()
            .map(|&a| {
                let slot = self.ts.simplify(&self.type_expr(a), Target::Dnf).map_err(|e| Self::skeleton_clash(path, e.to_string()))?;
                let mut f = fs.constrain(x, slot, self.ts)?;
                match &own {
                    Ok(Some(s)) => f = f.unify_at(f.get_path(path).expect("path survives"), s, self.ts)?,
                    Ok(None) => {}
                    Err(e) => return Err(Self::skeleton_clash(path, e.clone())),
                }
                Self::mark(&mut f, path, [name.clone()]);
                Ok(f)
            })
            .collect()
    }

    /// Unifies the due skeletons into their nodes and records them as
    /// applied.
    fn apply(&self, fs: &Fs, due: &[(NodeId, BTreeSet<TypeId>)]) -> Result<Fs, Clash> {
        let paths = fs.paths();
        let mut skeletons = Vec::new();
        for (x, types) in due {
            for &u in types {
                match self.ts.skeleton(u) {
                    Ok(Some(s)) => skeletons.push((*x, s)),
                    Ok(None) => {}
                    Err(e) => return Err(Self::skeleton_clash(&paths[*x], e)),
                }
            }
        }
        let items: Vec<(NodeId, &Fs)> = skeletons.iter().map(|(x, s)| (*x, s)).collect();
        let mut f = fs.unify_at_many(&items, self.ts)?;
        for (x, types) in due {
            Self::mark(&mut f, &paths[*x], types.iter().map(|&u| self.h().name(u).clone()));
        }
        Ok(f)
    }

    /// The next replacement. Complete mode applies every due skeleton
    /// found in one scan at once, except below a node already in the
    /// batch, whose prefix counts are not final yet.
    fn next(&self, fs: &Fs) -> Result<Option<Vec<Result<Fs, Clash>>>, String> {
        let paths = fs.paths();
        let parents = fs.tree_parents();
        let batch = self.control.mode == Mode::Complete;
        let mut due: Vec<(NodeId, BTreeSet<TypeId>)> = Vec::new();
        let mut waiting = vec![false; fs.len()];
        for x in 0..fs.len() {
            if fs.node(x).expanded {
                continue;
            }
            if let Some(p) = parents[x] {
                if waiting[p] {
                    waiting[x] = true;
                    continue;
                }
            }
            let status = match self.status(fs, x, &paths[x], &parents) {
                Err(_) if !due.is_empty() => break,
                s => s?,
            };
            match status {
                Status::Work(v) if due.is_empty() => return Ok(Some(v)),
                Status::Work(_) => break,
                Status::Apply(types) => {
                    due.push((x, types));
                    waiting[x] = true;
                    if !batch {
                        break;
                    }
                }
                Status::Done | Status::Stopped => {}
            }
        }
        Ok((!due.is_empty()).then(|| vec![self.apply(fs, &due)]))
    }

    /// Sets the fully-expanded marks: locally complete and everything
    /// below as well.
    fn finalize(&self, mut fs: Fs) -> Fs {
        let paths = fs.paths();
        let parents = fs.tree_parents();
        let mut ok: Vec<bool> = (0..fs.len())
            .map(|x| fs.node(x).expanded || matches!(self.status(&fs, x, &paths[x], &parents), Ok(Status::Done)))
            .collect();
        loop {
            let mut dirty = false;
            for x in 0..fs.len() {
                if ok[x] && fs.node(x).arcs.values().any(|&c| !ok[c]) {
                    ok[x] = false;
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        for (x, v) in ok.into_iter().enumerate() {
            fs.node_mut(x).expanded = v;
        }
        fs
    }

    pub fn expand(&self, fs: &Fs) -> Outcome {
        let mut stack = vec![fs.clone()];
        let mut done = Vec::new();
        let mut clash: Option<Clash> = None;
        let mut steps = 0usize;
        while let Some(f) = stack.pop() {
            steps += 1;
            if steps > self.control.step_budget {
                return Outcome::Bounded(format!("step budget {} exhausted", self.control.step_budget));
            }
            if f.len() > self.control.max_nodes {
                return Outcome::Bounded(format!("structure exceeds {} nodes", self.control.max_nodes));
            }
            match self.next(&f) {
                Err(why) => return Outcome::Bounded(why),
                Ok(None) => done.push(self.finalize(f)),
                Ok(Some(alts)) => {
                    for a in alts.into_iter().rev() {
                        match a {
                            Ok(g) => stack.push(g),
                            Err(c) => {
                                clash.get_or_insert(c);
                            }
                        }
                    }
                }
            }
            if stack.len() + done.len() > MAX_ALTERNATIVES {
                return Outcome::Bounded(format!("more than {MAX_ALTERNATIVES} alternatives"));
            }
        }
        if done.is_empty() {
            Outcome::Inconsistent(clash.unwrap_or_else(|| Clash { path: Vec::new(), reason: "no alternative survives".into() }))
        } else {
            Outcome::Consistent(done)
        }
    }
}

pub fn expand(ts: &TypeSystem, fs: &Fs, control: &Control) -> Outcome {
    Expander::new(ts, control).expand(fs)
}

/// Expands the bare type `name`.
pub fn expand_type(ts: &TypeSystem, name: &str, control: &Control) -> Outcome {
    match ts.simplify(&Expr::ty(name), Target::Dnf) {
        Ok(slot) if slot.is_bottom() => {
            Outcome::Inconsistent(Clash { path: Vec::new(), reason: format!("{name} denotes the empty set") })
        }
        Ok(slot) => expand(ts, &Fs::from_slot(slot), control),
        Err(e) => Outcome::Inconsistent(Clash { path: Vec::new(), reason: e.to_string() }),
    }
}

/// Expands every defined user type, then every instance.
pub fn check_consistency(ts: &TypeSystem, instances: &[(String, Fs)], control: &Control) -> Vec<(String, Outcome)> {
    let h = ts.hierarchy();
    let ex = Expander::new(ts, control);
    let mut report: Vec<(String, Outcome)> = h
        .user_types()
        .filter(|&t| h.entry(t).defined && h.entry(t).alive)
        .map(|t| {
            let name = h.name(t).to_string();
            let out = match ts.simplify(&Expr::ty(&name), Target::Dnf) {
                Ok(slot) => ex.expand(&Fs::from_slot(slot)),
                Err(e) => Outcome::Inconsistent(Clash { path: Vec::new(), reason: e.to_string() }),
            };
            (name, out)
        })
        .collect();
    for (name, fs) in instances {
        report.push((name.clone(), ex.expand(fs)));
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sat {
    Yes,
    No,
    Bounded,
}

impl fmt::Display for Sat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sat::Yes => "yes",
            Sat::No => "no",
            Sat::Bounded => "bounded",
        })
    }
}

/// Unifies and expands: is there anything described by both?
pub fn satisfiable(ts: &TypeSystem, f: &Fs, g: &Fs, control: &Control) -> (Sat, Outcome) {
    let u = match f.unify(g, ts) {
        Ok(u) => u,
        Err(c) => return (Sat::No, Outcome::Inconsistent(c)),
    };
    let out = expand(ts, &u, control);
    let sat = match out {
        Outcome::Consistent(_) => Sat::Yes,
        Outcome::Inconsistent(_) => Sat::No,
        Outcome::Bounded(_) => Sat::Bounded,
    };
    (sat, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    FeatureUnify,
    SkipFeatureUnify,
    Fail,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::FeatureUnify => "feature-unify",
            Action::SkipFeatureUnify => "skip-feature-unify",
            Action::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone)]
pub struct GlbVerdict {
    /// `None` is ⊥.
    pub result: Option<Fs>,
    pub action: Action,
}

impl fmt::Display for GlbVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.result {
            Some(r) => write!(f, "{r}"),
            None => f.write_str("*bottom*"),
        }
    }
}

/// Type-level GLB of two operands, each a type, an atom, a feature
/// constraint or a combination.
pub fn glb_typed(ts: &TypeSystem, a: &Fs, b: &Fs, control: &Control) -> GlbVerdict {
    let fail = GlbVerdict { result: None, action: Action::Fail };
    let slot = match ts.glb(a.root_slot(), b.root_slot()) {
        Ok(s) if !s.is_bottom() => s,
        _ => return fail,
    };
    let features = !a.node(a.root()).arcs.is_empty() || !b.node(b.root()).arcs.is_empty();
    if !features {
        let residual = slot.dnf_terms().iter().any(|t| t.iter().filter(|l| matches!(l, Literal::Type(_))).count() > 1);
        let action = if residual { Action::FeatureUnify } else { Action::SkipFeatureUnify };
        return GlbVerdict { result: Some(Fs::from_slot(slot)), action };
    }
    let Ok(u) = a.unify(b, ts) else { return fail };
    let typed = u.root_slot().dnf_terms().iter().flatten().any(|l| matches!(l, Literal::Type(_)));
    if typed && matches!(expand(ts, &u, control), Outcome::Inconsistent(_)) {
        return fail;
    }
    GlbVerdict { result: Some(u), action: Action::FeatureUnify }
}

#[cfg(test)]
pub(crate) mod tests;
