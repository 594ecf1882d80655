//! Definitions: splitting bodies, decomposition into intermediates,
//! incompatibility and partition declarations, garbage collection of
//! orphaned intermediates.

use std::collections::BTreeSet;

use super::{Entry, Hierarchy, HierarchyError, Incompat, Kind, Origin, TypeId, TOP_ID};
use crate::simplify::{normalize, Expr, Literal, NormalForm, Target};
use crate::syntax::{self, KindHint, TypeExprAst};

/// Outcome of a type definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefineReport {
    pub id: TypeId,
    pub redefined: bool,
    /// Types whose meaning depended on the old definition.
    pub dependents: BTreeSet<TypeId>,
}

/// Converts a feature-free type expression. `None` when `e` carries
/// feature constraints, coreferences or unexpanded template calls.
pub fn expr_from_ast(e: &TypeExprAst) -> Option<Expr> {
    Some(match e {
        TypeExprAst::TypeName(n) if n == syntax::TOP => Expr::Top,
        TypeExprAst::TypeName(n) => Expr::ty(n),
        TypeExprAst::Atom(a) => Expr::Lit(Literal::Atom(a.clone())),
        TypeExprAst::Neg(x) => Expr::not(expr_from_ast(x)?),
        TypeExprAst::Conj(xs) => Expr::And(xs.iter().map(expr_from_ast).collect::<Option<_>>()?),
        TypeExprAst::Disj(xs) => Expr::Or(xs.iter().map(expr_from_ast).collect::<Option<_>>()?),
        TypeExprAst::Xor(a, b) => Expr::xor(expr_from_ast(a)?, expr_from_ast(b)?),
        TypeExprAst::FeatureTerm(_) | TypeExprAst::ListTerm { .. } | TypeExprAst::Coref(_) => return None,
        TypeExprAst::TemplateCall { .. } => return None,
    })
}

fn flatten<'a>(e: &'a TypeExprAst, out: &mut Vec<&'a TypeExprAst>) {
    match e {
        TypeExprAst::Conj(xs) => xs.iter().for_each(|x| flatten(x, out)),
        _ => out.push(e),
    }
}

/// Splits a body into its type part and its feature part.
fn split_body(name: &str, body: &TypeExprAst) -> Result<(Expr, Option<TypeExprAst>), HierarchyError> {
    let mut conjuncts = Vec::new();
    flatten(body, &mut conjuncts);
    let mut types = Vec::new();
    let mut feats = Vec::new();
    for c in conjuncts {
        match c {
            TypeExprAst::FeatureTerm(_) | TypeExprAst::ListTerm { .. } | TypeExprAst::Coref(_) => feats.push(c.clone()),
            TypeExprAst::Atom(a) => {
                return Err(HierarchyError::AtomAsType { name: name.into(), atom: a.to_string() });
            }
            _ => match expr_from_ast(c) {
                Some(x) => types.push(x),
                None => return Err(HierarchyError::FeatureDisjunction(name.into())),
            },
        }
    }
    let ty = match types.len() {
        0 => Expr::Top,
        1 => types.pop().unwrap(),
        _ => Expr::And(types),
    };
    let skeleton = match feats.len() {
        0 => None,
        1 => feats.pop(),
        _ => Some(TypeExprAst::Conj(feats)),
    };
    Ok((ty, skeleton))
}

fn compact_name(nf: &NormalForm) -> String {
    format!("|{}|", nf.to_string().replace(' ', ""))
}

impl Hierarchy {
    /// Returns the live id for `name`, creating (or reviving) an undefined
    /// placeholder.
    pub(super) fn intern(&mut self, name: &str) -> TypeId {
        self.intern_kind(name, Kind::Avm)
    }

    fn intern_kind(&mut self, name: &str, kind: Kind) -> TypeId {
        let id = match self.ids.get(name) {
            Some(&id) if self.entries[id].alive => return id,
            Some(&id) => {
                self.entries[id] = Entry::new(name, kind);
                self.closure[id] = crate::hierarchy::Code::singleton(id);
                id
            }
            None => self.push(Entry::new(name, kind)),
        };
        self.closure[TOP_ID].set(id);
        id
    }

    /// Keeps `name` alive as a type even if no definition mentions it.
    pub fn pin(&mut self, name: &str) -> TypeId {
        let id = self.intern(name);
        self.entries[id].pinned = true;
        self.finish_codes();
        id
    }

    fn edge_set(&self) -> BTreeSet<(TypeId, TypeId)> {
        let mut s = BTreeSet::new();
        for t in self.ids() {
            for &p in &self.entries[t].conj_parents {
                s.insert((t, p));
            }
            for &a in &self.entries[t].disj_alts {
                s.insert((a, t));
            }
        }
        s
    }

    /// Defines or redefines `name`. On error the hierarchy is unchanged.
    pub fn define_type(&mut self, name: &str, kind: KindHint, body: &TypeExprAst) -> Result<DefineReport, HierarchyError> {
        if Self::is_builtin_name(name) {
            return Err(HierarchyError::Builtin(name.into()));
        }
        let backup = self.clone();
        let r = self.define_inner(name, kind, body);
        if r.is_err() {
            *self = backup;
        }
        r
    }

    fn define_inner(&mut self, name: &str, kind: KindHint, body: &TypeExprAst) -> Result<DefineReport, HierarchyError> {
        let (ty, skeleton) = split_body(name, body)?;
        if kind == KindHint::Sort && skeleton.is_some() {
            return Err(HierarchyError::SortFeatures(name.into()));
        }
        let existing = self.id(name).filter(|&i| self.entries[i].defined);
        let dependents = existing.map(|i| self.dependents(i)).unwrap_or_default();
        let before = self.edge_set();
        let id = self.intern(name);
        let mut names = Vec::new();
        body.for_each_type_name(&mut |n| names.push(n.to_string()));
        for n in names.iter().filter(|n| *n != syntax::TOP) {
            self.intern(n);
        }
        {
            let e = &mut self.entries[id];
            e.kind = if kind == KindHint::Sort { Kind::Sort } else { Kind::Avm };
            e.sort = kind == KindHint::Sort;
            e.defined = true;
            e.body = Some(body.clone());
            e.skeleton = skeleton;
            e.conj_parents.clear();
            e.disj_alts.clear();
        }
        let nf = normalize(&ty, self.target, None)?;
        if nf.is_bottom() {
            return Err(HierarchyError::Inconsistent(name.into()));
        }
        let has_skel = self.entries[id].skeleton.is_some();
        self.decompose(id, &nf, has_skel)?;
        self.finish(existing.is_some(), &before)?;
        Ok(DefineReport { id, redefined: existing.is_some(), dependents })
    }

    fn lit_component(&mut self, owner: TypeId, l: &Literal) -> Result<TypeId, HierarchyError> {
        match l {
            Literal::Type(n) => Ok(self.intern(n)),
            Literal::Neg(n) => Ok(self.neg_intermediate(n, self.entries[owner].sort)),
            Literal::Atom(a) => {
                Err(HierarchyError::AtomAsType { name: self.entries[owner].name.to_string(), atom: a.to_string() })
            }
            Literal::Feature(_) => Err(HierarchyError::FeatureDisjunction(self.entries[owner].name.to_string())),
        }
    }

    fn intermediate(&mut self, name: &str, sort: bool) -> (TypeId, bool) {
        if let Some(id) = self.id(name) {
            return (id, false);
        }
        let id = self.intern_kind(name, Kind::Intermediate);
        let e = &mut self.entries[id];
        e.defined = true;
        e.sort = sort;
        (id, true)
    }

    /// `|~t|`, declared incompatible with `t`.
    fn neg_intermediate(&mut self, t: &str, sort: bool) -> TypeId {
        let target = self.intern(t);
        let (id, created) = self.intermediate(&format!("|~{t}|"), sort);
        if created {
            self.incompat.push(Incompat { members: vec![target, id], origin: Origin::Negation });
        }
        id
    }

    fn disj_intermediate(&mut self, name: &str, alts: Vec<TypeId>, sort: bool) -> TypeId {
        let (id, created) = self.intermediate(name, sort);
        if created {
            self.entries[id].disj_alts = alts;
        }
        id
    }

    fn conj_intermediate(&mut self, name: &str, mut comps: Vec<TypeId>, sort: bool) -> TypeId {
        comps.sort_unstable();
        comps.dedup();
        let (id, created) = self.intermediate(name, sort);
        if created {
            self.entries[id].conj_parents = comps.clone();
            self.entries[id].components = comps;
        }
        id
    }

    fn decompose(&mut self, id: TypeId, nf: &NormalForm, has_skel: bool) -> Result<(), HierarchyError> {
        let sort = self.entries[id].sort;
        let NormalForm::Clauses { target, clauses } = nf else { return Ok(()) };
        match target {
            Target::Cnf if clauses.len() == 1 && clauses[0].len() > 1 && !has_skel => {
                let alts = clauses[0].iter().map(|l| self.lit_component(id, l)).collect::<Result<Vec<_>, _>>()?;
                self.entries[id].disj_alts = alts;
            }
            Target::Cnf => {
                let mut comps = Vec::new();
                for c in clauses {
                    comps.push(if c.len() == 1 {
                        self.lit_component(id, &c[0])?
                    } else {
                        let alts = c.iter().map(|l| self.lit_component(id, l)).collect::<Result<Vec<_>, _>>()?;
                        let single = NormalForm::Clauses { target: Target::Cnf, clauses: vec![c.clone()] };
                        self.disj_intermediate(&compact_name(&single), alts, sort)
                    });
                }
                self.conjoin(id, comps, has_skel, nf);
            }
            Target::Dnf if clauses.len() == 1 => {
                let comps = clauses[0].iter().map(|l| self.lit_component(id, l)).collect::<Result<Vec<_>, _>>()?;
                self.conjoin(id, comps, has_skel, nf);
            }
            Target::Dnf => {
                let mut alts = Vec::new();
                for t in clauses {
                    alts.push(if t.len() == 1 {
                        self.lit_component(id, &t[0])?
                    } else {
                        let comps = t.iter().map(|l| self.lit_component(id, l)).collect::<Result<Vec<_>, _>>()?;
                        let single = NormalForm::Clauses { target: Target::Dnf, clauses: vec![t.clone()] };
                        self.conj_intermediate(&compact_name(&single), comps, sort)
                    });
                }
                if has_skel {
                    let d = self.disj_intermediate(&compact_name(nf), alts, sort);
                    self.entries[id].conj_parents = vec![d];
                } else {
                    self.entries[id].disj_alts = alts;
                }
            }
        }
        Ok(())
    }

    fn conjoin(&mut self, id: TypeId, mut comps: Vec<TypeId>, has_skel: bool, nf: &NormalForm) {
        comps.sort_unstable();
        comps.dedup();
        if has_skel && comps.len() >= 2 {
            let c = self.conj_intermediate(&compact_name(nf), comps, self.entries[id].sort);
            self.entries[id].conj_parents = vec![c];
        } else {
            self.entries[id].conj_parents = comps;
        }
    }

    /// Declares the conjunction of `names` empty.
    pub fn declare_incompatible(&mut self, names: &[String]) -> Result<(), HierarchyError> {
        let backup = self.clone();
        let r = self.declare_incompatible_inner(names);
        if r.is_err() {
            *self = backup;
        }
        r
    }

    fn member_ids(&mut self, names: &[String]) -> Result<Vec<TypeId>, HierarchyError> {
        let mut ids: Vec<TypeId> = names.iter().map(|n| self.intern(n)).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() < 2 {
            return Err(HierarchyError::Arity);
        }
        for &a in &ids {
            for &b in &ids {
                if a != b && self.subsumes(a, b) {
                    return Err(HierarchyError::Subsuming {
                        general: self.entries[a].name.to_string(),
                        specific: self.entries[b].name.to_string(),
                    });
                }
            }
        }
        Ok(ids)
    }

    fn declare_incompatible_inner(&mut self, names: &[String]) -> Result<(), HierarchyError> {
        let before = self.edge_set();
        let members = self.member_ids(names)?;
        let decl = Incompat { members, origin: Origin::Declared };
        if !self.incompat.contains(&decl) {
            self.incompat.push(decl);
        }
        self.finish(false, &before)
    }

    /// Splits `supertype` exhaustively into pairwise incompatible `members`.
    pub fn declare_partition(&mut self, supertype: &str, members: &[String]) -> Result<(), HierarchyError> {
        let backup = self.clone();
        let r = self.declare_partition_inner(supertype, members);
        if r.is_err() {
            *self = backup;
        }
        r
    }

    fn declare_partition_inner(&mut self, supertype: &str, members: &[String]) -> Result<(), HierarchyError> {
        if Self::is_builtin_name(supertype) {
            return Err(HierarchyError::Builtin(supertype.into()));
        }
        let sup = self.intern(supertype);
        let ids = self.member_ids(members)?;
        for &m in &ids {
            if self.is_incompatible(&[m, sup]) {
                return Err(HierarchyError::PartitionIncompatible {
                    member: self.entries[m].name.to_string(),
                    supertype: supertype.into(),
                });
            }
        }
        self.entries[sup].defined = true;
        if !self.partitions.iter().any(|(s, m)| *s == sup && *m == ids) {
            self.partitions.push((sup, ids.clone()));
        }
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let decl = Incompat { members: vec![a, b], origin: Origin::Partition(sup) };
                if !self.incompat.contains(&decl) {
                    self.incompat.push(decl);
                }
            }
        }
        self.finish(true, &BTreeSet::new())
    }

    fn apply_partitions(&mut self) -> Result<(), HierarchyError> {
        for (sup, members) in self.partitions.clone() {
            let e = &mut self.entries[sup];
            if !e.conj_parents.is_empty() {
                return Err(HierarchyError::PartitionConj(e.name.to_string()));
            }
            if e.disj_alts.is_empty() {
                e.disj_alts = members;
            } else {
                let mut alts = e.disj_alts.clone();
                alts.sort_unstable();
                if alts != members {
                    return Err(HierarchyError::PartitionAlts(e.name.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Tombstones intermediates and placeholders no longer reachable from
    /// a definition or declaration. Returns whether anything died.
    fn collect_garbage(&mut self) -> bool {
        let mut marked = vec![false; self.entries.len()];
        let mut stack: Vec<TypeId> = self
            .ids()
            .filter(|&t| {
                let e = &self.entries[t];
                e.kind == Kind::Builtin || e.pinned || (matches!(e.kind, Kind::Avm | Kind::Sort) && e.defined)
            })
            .collect();
        for s in &self.incompat {
            if s.origin != Origin::Negation {
                stack.extend(&s.members);
            }
        }
        for (sup, members) in &self.partitions {
            stack.push(*sup);
            stack.extend(members);
        }
        while let Some(t) = stack.pop() {
            if marked[t] {
                continue;
            }
            marked[t] = true;
            let e = &self.entries[t];
            if e.components.is_empty() {
                stack.extend(&e.conj_parents);
            } else {
                stack.extend(&e.components);
            }
            stack.extend(&e.disj_alts);
            if let Some(body) = &e.body {
                body.for_each_type_name(&mut |n| {
                    if let Some(&id) = self.ids.get(n) {
                        stack.push(id);
                    }
                });
            }
            for s in &self.incompat {
                if s.origin == Origin::Negation && s.members.contains(&t) && s.members[1] == t {
                    stack.push(s.members[0]);
                }
            }
        }
        let dead: Vec<TypeId> = self.ids().filter(|&t| !marked[t]).collect();
        for &t in &dead {
            let name = self.entries[t].name.clone();
            let kind = self.entries[t].kind;
            self.entries[t] = Entry { alive: false, ..Entry::new(&name, kind) };
        }
        self.incompat.retain(|s| s.members.iter().all(|&m| marked[m]));
        !dead.is_empty()
    }

    /// Recomputes the direct parents of conjunctive intermediates so that
    /// one whose components strictly contain another's sits below it.
    fn relink_conjunctions(&mut self) {
        let conj: Vec<TypeId> = self
            .ids()
            .filter(|&t| self.entries[t].kind == Kind::Intermediate && !self.entries[t].components.is_empty())
            .collect();
        let comps = |t: TypeId| -> BTreeSet<TypeId> { self.entries[t].components.iter().copied().collect() };
        let mut updates = Vec::new();
        for &b in &conj {
            let cb = comps(b);
            let subs: Vec<TypeId> = conj
                .iter()
                .copied()
                .filter(|&a| a != b && {
                    let ca = comps(a);
                    ca.is_subset(&cb) && ca != cb
                })
                .collect();
            let maximal: Vec<TypeId> = subs
                .iter()
                .copied()
                .filter(|&a| {
                    let ca = comps(a);
                    !subs.iter().any(|&o| o != a && {
                        let co = comps(o);
                        ca.is_subset(&co) && ca != co
                    })
                })
                .collect();
            let covered: BTreeSet<TypeId> = maximal.iter().flat_map(|&a| comps(a)).collect();
            let mut parents: Vec<TypeId> = maximal;
            parents.extend(cb.difference(&covered));
            parents.sort_unstable();
            parents.dedup();
            updates.push((b, parents));
        }
        for (b, parents) in updates {
            self.entries[b].conj_parents = parents;
        }
    }

    /// Common tail of every mutation: partitions, garbage collection,
    /// linking, cycle check and codes.
    fn finish(&mut self, full: bool, before: &BTreeSet<(TypeId, TypeId)>) -> Result<(), HierarchyError> {
        self.apply_partitions()?;
        let removed = self.collect_garbage();
        self.relink_conjunctions();
        for t in self.ids() {
            let e = &self.entries[t];
            if e.conj_parents.contains(&t) || e.disj_alts.contains(&t) {
                return Err(HierarchyError::Cycle(e.name.to_string()));
            }
        }
        if let Some(t) = self.find_cycle() {
            return Err(HierarchyError::Cycle(self.entries[t].name.to_string()));
        }
        if full || removed {
            self.recompute_codes();
        } else {
            for (u, v) in self.edge_set().difference(before) {
                self.add_edge(*u, *v);
            }
            self.finish_codes();
        }
        self.generation += 1;
        Ok(())
    }
}
