//! The type hierarchy: entries, bit-set codes, GLB/LUB/subsumption queries,
//! decomposition into intermediates and incompatibility bookkeeping.

pub mod code;
mod define;
mod dump;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::simplify::{Name, NormalizeError, Target};
use crate::syntax::{self, TypeExprAst};

pub use code::Code;
pub use define::expr_from_ast;

pub type TypeId = usize;

pub const TOP_ID: TypeId = 0;

/// Built-in sorts typing the atoms.
pub const SYMBOL: &str = "symbol";
pub const STRING: &str = "string";
pub const NUMBER: &str = "number";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Avm,
    Sort,
    Builtin,
    Intermediate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Encoding {
    #[default]
    TransitiveClosure,
    Compact,
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: Name,
    pub kind: Kind,
    /// Closed-world type: sorts, atom sorts and intermediates built from sort
    /// definitions.
    pub sort: bool,
    /// False for placeholders created by a use before definition.
    pub defined: bool,
    pub alive: bool,
    pub conj_parents: Vec<TypeId>,
    pub disj_alts: Vec<TypeId>,
    /// Feature-constraint part of the definition, unexpanded.
    pub skeleton: Option<TypeExprAst>,
    /// Whole definition body of a user type.
    pub body: Option<TypeExprAst>,
    /// Conjunctive intermediates: the full component set.
    pub components: Vec<TypeId>,
    pub recursive: bool,
    /// Kept alive even when no definition mentions it.
    pub pinned: bool,
}

impl Entry {
    fn new(name: &str, kind: Kind) -> Self {
        Entry {
            name: Name::from(name),
            kind,
            sort: false,
            defined: false,
            alive: true,
            conj_parents: Vec::new(),
            disj_alts: Vec::new(),
            skeleton: None,
            body: None,
            components: Vec::new(),
            recursive: false,
            pinned: false,
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self.kind {
            Kind::Avm if !self.defined => "undefined",
            Kind::Avm => "avm",
            Kind::Sort => "sort",
            Kind::Builtin => "builtin",
            Kind::Intermediate => "intermediate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Declared,
    Partition(TypeId),
    Negation,
}

/// A declared incompatible set ("specialized bottom").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incompat {
    pub members: Vec<TypeId>,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("cannot redefine built-in type `{0}`")]
    Builtin(String),
    #[error("cyclic inheritance involving `{0}`")]
    Cycle(String),
    #[error("the type part of `{0}` simplifies to bottom")]
    Inconsistent(String),
    #[error("atom {atom} cannot be used as a type in the definition of `{name}`")]
    AtomAsType { name: String, atom: String },
    #[error("sort `{0}` cannot carry feature constraints")]
    SortFeatures(String),
    #[error("feature constraints under a disjunction or negation in `{0}`; name the alternatives as types")]
    FeatureDisjunction(String),
    #[error("an incompatibility needs at least two distinct types")]
    Arity,
    #[error("`{general}` subsumes `{specific}`; an incompatible set must be an antichain")]
    Subsuming { general: String, specific: String },
    #[error("partition member `{member}` is already incompatible with `{supertype}`")]
    PartitionIncompatible { member: String, supertype: String },
    #[error("cannot partition `{0}`: it is defined as a conjunction")]
    PartitionConj(String),
    #[error("cannot partition `{0}`: it already has different alternatives")]
    PartitionAlts(String),
    #[error("unknown type `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    entries: Vec<Entry>,
    ids: HashMap<Name, TypeId>,
    /// Reflexive-transitive lower sets.
    closure: Vec<Code>,
    /// Codes of the active encoding (equal to `closure` for transitive
    /// closure).
    codes: Vec<Code>,
    decode: HashMap<Code, TypeId>,
    encoding: Encoding,
    target: Target,
    incompat: Vec<Incompat>,
    partitions: Vec<(TypeId, Vec<TypeId>)>,
    generation: u64,
}

impl Default for Hierarchy {
    fn default() -> Self {
        Hierarchy::new(Encoding::default(), Target::Cnf)
    }
}

const BUILTIN_SORTS: [&str; 3] = [SYMBOL, STRING, NUMBER];

impl Hierarchy {
    /// A hierarchy holding `*top*`, the atom sorts and the list types.
    pub fn new(encoding: Encoding, target: Target) -> Self {
        let mut h = Hierarchy {
            entries: Vec::new(),
            ids: HashMap::new(),
            closure: Vec::new(),
            codes: Vec::new(),
            decode: HashMap::new(),
            encoding,
            target,
            incompat: Vec::new(),
            partitions: Vec::new(),
            generation: 0,
        };
        h.push(Entry::new(syntax::TOP, Kind::Builtin));
        for s in BUILTIN_SORTS {
            let id = h.push(Entry::new(s, Kind::Builtin));
            h.entries[id].sort = true;
        }
        let list = h.push(Entry::new(syntax::LIST, Kind::Builtin));
        let null = h.push(Entry::new(syntax::LIST_NULL, Kind::Builtin));
        let cons = h.push(Entry::new(syntax::LIST_CONS, Kind::Builtin));
        for e in &mut h.entries {
            e.defined = true;
        }
        h.entries[list].disj_alts = vec![null, cons];
        h.partitions.push((list, vec![null, cons]));
        h.incompat.push(Incompat { members: vec![null, cons], origin: Origin::Partition(list) });
        h.recompute_codes();
        h
    }

    fn push(&mut self, e: Entry) -> TypeId {
        let id = self.entries.len();
        self.ids.insert(e.name.clone(), id);
        self.entries.push(e);
        self.closure.push(Code::singleton(id));
        self.codes.push(Code::singleton(id));
        id
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// Bumped on every change; distinguishes memo entries across states.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn is_builtin_name(name: &str) -> bool {
        name == syntax::TOP
            || BUILTIN_SORTS.contains(&name)
            || [syntax::LIST, syntax::LIST_CONS, syntax::LIST_NULL].contains(&name)
    }

    pub fn id(&self, name: &str) -> Option<TypeId> {
        self.ids.get(name).copied().filter(|&i| self.entries[i].alive)
    }

    pub fn require(&self, name: &str) -> Result<TypeId, HierarchyError> {
        self.id(name).ok_or_else(|| HierarchyError::Unknown(name.to_string()))
    }

    pub fn entry(&self, id: TypeId) -> &Entry {
        &self.entries[id]
    }

    pub fn name(&self, id: TypeId) -> &Name {
        &self.entries[id].name
    }

    pub fn code(&self, id: TypeId) -> &Code {
        &self.codes[id]
    }

    /// Live type ids in creation order.
    pub fn ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.entries.len()).filter(|&i| self.entries[i].alive)
    }

    pub fn len(&self) -> usize {
        self.ids().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// User-visible types (neither builtin nor intermediate).
    pub fn user_types(&self) -> impl Iterator<Item = TypeId> + '_ {
        self.ids().filter(|&i| matches!(self.entries[i].kind, Kind::Avm | Kind::Sort))
    }

    pub fn undefined_types(&self) -> Vec<&str> {
        self.user_types().filter(|&i| !self.entries[i].defined).map(|i| &*self.entries[i].name).collect()
    }

    pub fn is_sort(&self, id: TypeId) -> bool {
        self.entries[id].sort
    }

    /// `general` subsumes `specific`: γ(specific) ⊆ γ(general).
    pub fn subsumes(&self, general: TypeId, specific: TypeId) -> bool {
        self.codes[specific].is_subset(&self.codes[general])
    }

    /// Decodes a code: the type with exactly this code, otherwise the
    /// ⪯-maximal types whose codes lie within it.
    pub fn decode_lower(&self, c: &Code) -> Vec<TypeId> {
        if let Some(&t) = self.decode.get(c) {
            return vec![t];
        }
        let below: Vec<TypeId> = self.ids().filter(|&t| self.codes[t].is_subset(c)).collect();
        below.iter().copied().filter(|&u| !below.iter().any(|&v| v != u && self.subsumes(v, u))).collect()
    }

    /// Dual of [`Self::decode_lower`]: the type with exactly this code,
    /// otherwise the ⪯-minimal types whose codes contain it.
    pub fn decode_upper(&self, c: &Code) -> Vec<TypeId> {
        if let Some(&t) = self.decode.get(c) {
            return vec![t];
        }
        let above: Vec<TypeId> = self.ids().filter(|&t| c.is_subset(&self.codes[t])).collect();
        above.iter().copied().filter(|&u| !above.iter().any(|&v| v != u && self.subsumes(u, v))).collect()
    }

    /// GLB over the type order alone. Empty means ⊥; more than one element
    /// is the disjunction of the antichain.
    pub fn glb_codes(&self, a: TypeId, b: TypeId) -> Vec<TypeId> {
        self.decode_lower(&self.codes[a].and(&self.codes[b]))
    }

    pub fn lub_codes(&self, a: TypeId, b: TypeId) -> Vec<TypeId> {
        self.decode_upper(&self.codes[a].or(&self.codes[b]))
    }

    /// All live supertypes of `t` (including `t`), most general first.
    pub fn ancestors(&self, t: TypeId) -> Vec<TypeId> {
        let mut v: Vec<TypeId> = self.ids().filter(|&u| self.subsumes(u, t)).collect();
        v.sort_by_key(|&u| (std::cmp::Reverse(self.closure[u].count()), u));
        v
    }

    /// The conjunction of `types` is declared empty: some declared set has
    /// every member above one of `types`.
    pub fn is_incompatible(&self, types: &[TypeId]) -> bool {
        self.incompat.iter().any(|s| s.members.iter().all(|&m| types.iter().any(|&t| self.subsumes(m, t))))
    }

    /// The declaration responsible for [`Self::is_incompatible`], if any.
    pub fn incompatibility_witness(&self, types: &[TypeId]) -> Option<&Incompat> {
        self.incompat.iter().find(|s| s.members.iter().all(|&m| types.iter().any(|&t| self.subsumes(m, t))))
    }

    pub fn declarations(&self) -> &[Incompat] {
        &self.incompat
    }

    /// Incompatible sets materialized at `t`: each declared set with a
    /// member above `t` replaced by `t`.
    pub fn incompatible_sets(&self, t: TypeId) -> Vec<Vec<TypeId>> {
        let mut out: BTreeSet<Vec<TypeId>> = BTreeSet::new();
        for s in &self.incompat {
            for (i, &m) in s.members.iter().enumerate() {
                if self.subsumes(m, t) {
                    let mut set = s.members.clone();
                    set[i] = t;
                    set.sort_unstable();
                    set.dedup();
                    out.insert(set);
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn set_recursive(&mut self, recursive: &BTreeSet<TypeId>) {
        for (i, e) in self.entries.iter_mut().enumerate() {
            e.recursive = recursive.contains(&i);
        }
    }

    /// Types mentioned by the definition of `t`: body names, parents and
    /// alternatives.
    pub fn dependencies(&self, t: TypeId) -> BTreeSet<TypeId> {
        let e = &self.entries[t];
        let mut deps: BTreeSet<TypeId> = e.conj_parents.iter().chain(&e.disj_alts).copied().collect();
        if let Some(body) = &e.body {
            body.for_each_type_name(&mut |n| {
                if let Some(id) = self.id(n) {
                    deps.insert(id);
                }
            });
        }
        deps.remove(&TOP_ID);
        deps
    }

    /// Every type whose meaning depends on `t`, transitively (excluding `t`
    /// unless it depends on itself).
    pub fn dependents(&self, t: TypeId) -> BTreeSet<TypeId> {
        let mut rev: HashMap<TypeId, Vec<TypeId>> = HashMap::new();
        for u in self.ids() {
            for d in self.dependencies(u) {
                rev.entry(d).or_default().push(u);
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![t];
        while let Some(x) = stack.pop() {
            for &u in rev.get(&x).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(u) {
                    stack.push(u);
                }
            }
        }
        seen
    }

    fn children(&self) -> Vec<Vec<TypeId>> {
        let mut ch = vec![Vec::new(); self.entries.len()];
        for t in self.ids() {
            let e = &self.entries[t];
            for &p in &e.conj_parents {
                ch[p].push(t);
            }
            ch[t].extend(e.disj_alts.iter().copied());
        }
        ch
    }

    /// A type lying on a cycle of the order, if any.
    fn find_cycle(&self) -> Option<TypeId> {
        let ch = self.children();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.entries.len()];
        for root in self.ids() {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (n, ref mut i)) = stack.last_mut() {
                if *i < ch[n].len() {
                    let c = ch[n][*i];
                    *i += 1;
                    match state[c] {
                        0 => {
                            state[c] = 1;
                            stack.push((c, 0));
                        }
                        1 => return Some(c),
                        _ => {}
                    }
                } else {
                    state[n] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Rebuilds all codes from the edges.
    fn recompute_codes(&mut self) {
        let n = self.entries.len();
        let ch = self.children();
        let mut done = vec![false; n];
        let mut closure: Vec<Code> = (0..n).map(Code::singleton).collect();
        for t in self.ids().filter(|&t| t != TOP_ID).collect::<Vec<_>>() {
            let mut stack = vec![(t, false)];
            while let Some((x, expanded)) = stack.pop() {
                if done[x] {
                    continue;
                }
                if expanded {
                    let mut c = Code::singleton(x);
                    for &y in &ch[x] {
                        c.or_assign(&closure[y]);
                    }
                    closure[x] = c;
                    done[x] = true;
                } else {
                    stack.push((x, true));
                    stack.extend(ch[x].iter().filter(|&&y| !done[y]).map(|&y| (y, false)));
                }
            }
        }
        closure[TOP_ID] = self.ids().collect();
        for (i, e) in self.entries.iter().enumerate() {
            if !e.alive {
                closure[i] = Code::new();
            }
        }
        self.closure = closure;
        self.finish_codes();
    }

    /// Incremental update for a new edge `u ⪯ v`: every supertype of `v`
    /// absorbs the lower set of `u`.
    fn add_edge(&mut self, u: TypeId, v: TypeId) {
        let lower = self.closure[u].clone();
        for a in 0..self.entries.len() {
            if self.closure[a].get(v) {
                self.closure[a].or_assign(&lower);
            }
        }
    }

    /// Derives the active codes and the decode table from the closure.
    fn finish_codes(&mut self) {
        self.codes = match self.encoding {
            Encoding::TransitiveClosure => self.closure.clone(),
            Encoding::Compact => self.compact_codes(),
        };
        self.decode = self.ids().map(|t| (self.codes[t].clone(), t)).collect();
    }

    /// Keeps only the bits needed to distinguish the order: bottom-up, a
    /// type's own bit is dropped when its remaining lower set already fails
    /// to fit under every type it is not below.
    fn compact_codes(&self) -> Vec<Code> {
        let mut order: Vec<TypeId> = self.ids().collect();
        order.sort_by_key(|&t| (self.closure[t].count(), t));
        let mut kept = Code::new();
        for &s in &order {
            let lower = self.closure[s].and(&kept);
            let separable = !lower.is_empty()
                && self.ids().all(|t| self.closure[t].get(s) || !lower.is_subset(&self.closure[t]));
            if !separable {
                kept.set(s);
            }
        }
        (0..self.entries.len()).map(|t| self.closure[t].and(&kept)).collect()
    }

    /// Number of bits in use by the active encoding.
    pub fn code_bits(&self) -> usize {
        match self.encoding {
            Encoding::TransitiveClosure => self.len(),
            Encoding::Compact => {
                let mut all = Code::new();
                for t in self.ids() {
                    all.or_assign(&self.codes[t]);
                }
                all.count()
            }
        }
    }
}
