//! Hierarchy-aware type logic: the bridge between codes, the simplifier
//! and feature-structure unification.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Mutex;

use crate::fs::{build_fs, term_cover, Fs, SlotLogic};
use crate::hierarchy::{Hierarchy, Kind, TypeId};
use crate::simplify::{
    normalize_with_budget, simplify, Expr, Literal, Meet, MemoStats, MemoTable, NormalForm, NormalizeError,
    Target, TypeOracle,
};

fn known(h: &Hierarchy, name: &str) -> Option<TypeId> {
    h.id(name).filter(|&t| h.entry(t).alive)
}

fn is_sort_name(h: &Hierarchy, name: &str) -> bool {
    known(h, name).is_some_and(|t| h.is_sort(t))
}

fn subsumes_name(h: &Hierarchy, general: &str, specific: &str) -> bool {
    if general == specific {
        return true;
    }
    match (known(h, general), known(h, specific)) {
        (Some(g), Some(s)) => h.subsumes(g, s),
        _ => false,
    }
}

fn incompatible_names(h: &Hierarchy, names: &[&str]) -> bool {
    let ids: Option<Vec<TypeId>> = names.iter().map(|n| known(h, n)).collect();
    ids.is_some_and(|ids| h.is_incompatible(&ids))
}

/// Literal meet over codes alone; `None` for two unrelated avm types.
fn code_meet(h: &Hierarchy, a: &Literal, b: &Literal) -> Option<Meet> {
    match (a, b) {
        (Literal::Type(x), Literal::Type(y)) => {
            if subsumes_name(h, x, y) {
                return Some(Meet::Alternatives(vec![b.clone()]));
            }
            if subsumes_name(h, y, x) {
                return Some(Meet::Alternatives(vec![a.clone()]));
            }
            let (i, j) = (known(h, x)?, known(h, y)?);
            if h.is_incompatible(&[i, j]) {
                return Some(Meet::Bottom);
            }
            match (h.is_sort(i), h.is_sort(j)) {
                (true, true) => {
                    let glb: Vec<Literal> = h
                        .glb_codes(i, j)
                        .into_iter()
                        .filter(|&t| h.is_sort(t))
                        .map(|t| Literal::Type(h.name(t).clone()))
                        .collect();
                    Some(if glb.is_empty() { Meet::Bottom } else { Meet::Alternatives(glb) })
                }
                (false, false) => None,
                _ => Some(Meet::Bottom),
            }
        }
        (Literal::Atom(x), Literal::Type(t)) | (Literal::Type(t), Literal::Atom(x)) => {
            if is_sort_name(h, t) && subsumes_name(h, t, x.builtin()) {
                Some(Meet::Alternatives(vec![Literal::Atom(x.clone())]))
            } else {
                Some(Meet::Bottom)
            }
        }
        _ => None,
    }
}

/// `g` ⊒ `s` for single literals.
fn literal_implies(h: &Hierarchy, g: &Literal, s: &Literal) -> bool {
    if g == s {
        return true;
    }
    match (g, s) {
        (Literal::Type(x), Literal::Type(y)) => subsumes_name(h, x, y),
        (Literal::Neg(x), Literal::Neg(y)) => subsumes_name(h, y, x),
        (Literal::Neg(x), Literal::Type(y)) => incompatible_names(h, &[x, y]),
        (Literal::Type(t), Literal::Atom(a)) => is_sort_name(h, t) && subsumes_name(h, t, a.builtin()),
        (Literal::Neg(t), Literal::Atom(a)) => !(is_sort_name(h, t) && subsumes_name(h, t, a.builtin())),
        _ => false,
    }
}

fn leaf_slot(h: &Hierarchy, slot: &NormalForm) -> bool {
    let terms = slot.dnf_terms();
    !terms.is_empty()
        && terms.iter().all(|t| {
            t.iter().any(|l| match l {
                Literal::Atom(_) => true,
                Literal::Type(n) => is_sort_name(h, n),
                _ => false,
            })
        })
}

/// Code-level logic without skeleton verification. Unrelated avm types
/// stay symbolic.
#[derive(Clone, Copy)]
pub struct CodeLogic<'a>(pub &'a Hierarchy);

impl TypeOracle for CodeLogic<'_> {
    fn subsumes(&self, general: &str, specific: &str) -> bool {
        subsumes_name(self.0, general, specific)
    }

    fn incompatible(&self, types: &[&str]) -> bool {
        incompatible_names(self.0, types)
    }

    fn meet(&self, a: &Literal, b: &Literal) -> Option<Meet> {
        code_meet(self.0, a, b)
    }

    fn fingerprint(&self) -> u64 {
        self.0.generation() << 1
    }
}

impl SlotLogic for CodeLogic<'_> {
    fn meet(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm, String> {
        self.slot(&Expr::And(vec![a.to_expr(), b.to_expr()]))
    }

    fn slot_subsumes(&self, general: &NormalForm, specific: &NormalForm) -> bool {
        term_cover(general, specific, |g, s| literal_implies(self.0, g, s))
    }

    fn is_leaf(&self, slot: &NormalForm) -> bool {
        leaf_slot(self.0, slot)
    }

    fn slot(&self, e: &Expr) -> Result<NormalForm, String> {
        normalize_with_budget(e, Target::Dnf, Some(self), crate::simplify::DEFAULT_BUDGET).map_err(|e| e.to_string())
    }
}

/// Types whose definitional skeletons `t` inherits: `t` and its
/// conjunctive ancestors, most general first.
pub fn conj_ancestors(h: &Hierarchy, t: TypeId) -> Vec<TypeId> {
    let mut seen = BTreeSet::from([t]);
    let mut queue = VecDeque::from([t]);
    while let Some(x) = queue.pop_front() {
        for &p in &h.entry(x).conj_parents {
            if seen.insert(p) {
                queue.push_back(p);
            }
        }
    }
    let mut v: Vec<TypeId> = seen.into_iter().collect();
    v.sort_by_key(|&u| (std::cmp::Reverse(h.code(u).count()), u));
    v
}

type Cached<T> = Mutex<HashMap<TypeId, T>>;

/// The hierarchy together with memoized simplification and cached
/// skeleton structures.
pub struct TypeSystem {
    hierarchy: Hierarchy,
    memo: Mutex<MemoTable>,
    verified: Mutex<HashMap<(TypeId, TypeId), Option<TypeId>>>,
    skeletons: Cached<Result<Option<Fs>, String>>,
    code_skeletons: Cached<Option<Fs>>,
    inherited: Cached<Option<Fs>>,
}

impl TypeSystem {
    pub fn new(hierarchy: Hierarchy, memo: MemoTable) -> Self {
        TypeSystem {
            hierarchy,
            memo: Mutex::new(memo),
            verified: Mutex::default(),
            skeletons: Mutex::default(),
            code_skeletons: Mutex::default(),
            inherited: Mutex::default(),
        }
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    /// Mutable access; drops every cached result derived from the old
    /// hierarchy.
    pub fn hierarchy_mut(&mut self) -> &mut Hierarchy {
        self.invalidate();
        &mut self.hierarchy
    }

    pub fn invalidate(&mut self) {
        self.verified.get_mut().unwrap().clear();
        self.skeletons.get_mut().unwrap().clear();
        self.code_skeletons.get_mut().unwrap().clear();
        self.inherited.get_mut().unwrap().clear();
    }

    pub fn memo_stats(&self) -> MemoStats {
        self.memo.lock().unwrap().stats()
    }

    pub fn clear_memo(&self) {
        self.memo.lock().unwrap().clear();
    }

    /// Normalizes with hierarchy rules, through the memo table when it is
    /// free.
    pub fn simplify(&self, e: &Expr, target: Target) -> Result<NormalForm, NormalizeError> {
        match self.memo.try_lock() {
            Ok(mut m) => simplify(e, target, Some(self), &mut m),
            Err(_) => normalize_with_budget(e, target, Some(self), crate::simplify::DEFAULT_BUDGET),
        }
    }

    /// Type-level GLB of two slots.
    pub fn glb(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm, NormalizeError> {
        self.simplify(&Expr::And(vec![a.to_expr(), b.to_expr()]), Target::Dnf)
    }

    fn cached<T: Clone>(cache: &Cached<T>, t: TypeId, make: impl FnOnce() -> T) -> T {
        if let Some(v) = cache.lock().unwrap().get(&t) {
            return v.clone();
        }
        let v = make();
        cache.lock().unwrap().insert(t, v.clone());
        v
    }

    /// The local skeleton of `t` as a structure, unexpanded.
    pub fn skeleton(&self, t: TypeId) -> Result<Option<Fs>, String> {
        Self::cached(&self.skeletons, t, || match &self.hierarchy.entry(t).skeleton {
            None => Ok(None),
            Some(ast) => build_fs(ast, self).map(Some).map_err(|e| e.to_string()),
        })
    }

    fn code_skeleton(&self, t: TypeId) -> Option<Fs> {
        Self::cached(&self.code_skeletons, t, || {
            let ast = self.hierarchy.entry(t).skeleton.as_ref()?;
            build_fs(ast, &CodeLogic(&self.hierarchy)).ok()
        })
    }

    /// Unification of all inherited skeletons under code logic; `None`
    /// when they clash.
    fn inherited_skeleton(&self, t: TypeId) -> Option<Fs> {
        Self::cached(&self.inherited, t, || {
            let logic = CodeLogic(&self.hierarchy);
            let mut acc = Fs::top();
            for u in conj_ancestors(&self.hierarchy, t) {
                if let Some(s) = self.code_skeleton(u) {
                    acc = acc.unify(&s, &logic).ok()?;
                }
            }
            Some(acc)
        })
    }

    /// Components a conjunctively defined type is built from, with
    /// conjunctive intermediates flattened.
    fn conj_components(&self, c: TypeId) -> Vec<TypeId> {
        let h = &self.hierarchy;
        let mut out = Vec::new();
        let mut stack: Vec<TypeId> = h.entry(c).conj_parents.clone();
        while let Some(p) = stack.pop() {
            let e = h.entry(p);
            if e.kind == Kind::Intermediate && !e.components.is_empty() {
                stack.extend(&e.components);
            } else {
                out.push(p);
            }
        }
        out
    }

    /// GLB over feature-structure subsumption for two unrelated avm types:
    /// the code candidate if its own definition adds nothing beyond `a`
    /// and `b`.
    pub fn verified_glb(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.verified.lock().unwrap().get(&key) {
            return v;
        }
        let v = self.verify(a, b);
        self.verified.lock().unwrap().insert(key, v);
        v
    }

    fn verify(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        let h = &self.hierarchy;
        let glb = h.glb_codes(a, b);
        let &[c] = glb.as_slice() else { return None };
        let e = h.entry(c);
        if e.kind != Kind::Avm || !e.disj_alts.is_empty() || c == a || c == b {
            return None;
        }
        let comps = self.conj_components(c);
        if comps.is_empty() || !comps.iter().all(|&p| h.subsumes(p, a) || h.subsumes(p, b)) {
            return None;
        }
        let Some(local) = self.code_skeleton(c) else { return Some(c) };
        let logic = CodeLogic(h);
        let combined = self.inherited_skeleton(a)?.unify(&self.inherited_skeleton(b)?, &logic).ok()?;
        local.subsumes(&combined, &logic).then_some(c)
    }
}

impl TypeOracle for TypeSystem {
    fn subsumes(&self, general: &str, specific: &str) -> bool {
        subsumes_name(&self.hierarchy, general, specific)
    }

    fn incompatible(&self, types: &[&str]) -> bool {
        incompatible_names(&self.hierarchy, types)
    }

    fn meet(&self, a: &Literal, b: &Literal) -> Option<Meet> {
        let h = &self.hierarchy;
        if let Some(m) = code_meet(h, a, b) {
            return Some(m);
        }
        let (Literal::Type(x), Literal::Type(y)) = (a, b) else { return None };
        let c = self.verified_glb(known(h, x)?, known(h, y)?)?;
        Some(Meet::Alternatives(vec![Literal::Type(h.name(c).clone())]))
    }

    fn fingerprint(&self) -> u64 {
        (self.hierarchy.generation() << 1) | 1
    }
}

impl SlotLogic for TypeSystem {
    fn meet(&self, a: &NormalForm, b: &NormalForm) -> Result<NormalForm, String> {
        self.glb(a, b).map_err(|e| e.to_string())
    }

    fn slot_subsumes(&self, general: &NormalForm, specific: &NormalForm) -> bool {
        term_cover(general, specific, |g, s| literal_implies(&self.hierarchy, g, s))
    }

    fn is_leaf(&self, slot: &NormalForm) -> bool {
        leaf_slot(&self.hierarchy, slot)
    }

    fn slot(&self, e: &Expr) -> Result<NormalForm, String> {
        self.simplify(e, Target::Dnf).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests;
