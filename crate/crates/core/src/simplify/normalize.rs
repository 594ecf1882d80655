use super::memo::MemoTable;
use super::order::compare_clauses;
use super::{Expr, Literal, Meet, NormalForm, NormalizeError, Target, TypeOracle};

/// Default literal budget for a single normalization.
pub const DEFAULT_BUDGET: usize = 10_000;

/// Negation normal form: negation pushed onto type symbols, ⊕ eliminated.
#[derive(Debug, Clone)]
enum Nnf {
    Top,
    Bottom,
    Lit(Literal),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

impl Nnf {
    fn key(&self) -> String {
        match self {
            Nnf::Top => "T".into(),
            Nnf::Bottom => "F".into(),
            Nnf::Lit(l) => l.to_string(),
            Nnf::And(xs) | Nnf::Or(xs) => {
                let mut keys: Vec<String> = xs.iter().map(Nnf::key).collect();
                keys.sort();
                let op = if matches!(self, Nnf::And(_)) { "&" } else { "|" };
                format!("{op}({})", keys.join(","))
            }
        }
    }

    fn literal_count(&self) -> usize {
        match self {
            Nnf::Top | Nnf::Bottom => 0,
            Nnf::Lit(_) => 1,
            Nnf::And(xs) | Nnf::Or(xs) => xs.iter().map(Nnf::literal_count).sum(),
        }
    }
}

fn to_nnf(e: &Expr, positive: bool) -> Result<Nnf, NormalizeError> {
    Ok(match e {
        Expr::Top => if positive { Nnf::Top } else { Nnf::Bottom },
        Expr::Bottom => if positive { Nnf::Bottom } else { Nnf::Top },
        Expr::Lit(l) if positive => Nnf::Lit(l.clone()),
        Expr::Lit(l) => Nnf::Lit(l.complement().ok_or_else(|| NormalizeError::InvalidNegation(l.to_string()))?),
        Expr::Not(inner) => to_nnf(inner, !positive)?,
        Expr::And(xs) | Expr::Or(xs) => {
            let items = xs.iter().map(|x| to_nnf(x, positive)).collect::<Result<Vec<_>, _>>()?;
            if matches!(e, Expr::And(_)) == positive {
                Nnf::And(items)
            } else {
                Nnf::Or(items)
            }
        }
        Expr::Xor(a, b) => {
            // a ⊕ b = (a ∧ ¬b) ∨ (¬a ∧ b);  ¬(a ⊕ b) = (a ∧ b) ∨ (¬a ∧ ¬b)
            let (ap, an) = (to_nnf(a, true)?, to_nnf(a, false)?);
            let (bp, bn) = (to_nnf(b, true)?, to_nnf(b, false)?);
            if positive {
                Nnf::Or(vec![Nnf::And(vec![ap, bn]), Nnf::And(vec![an, bp])])
            } else {
                Nnf::Or(vec![Nnf::And(vec![ap, bp]), Nnf::And(vec![an, bn])])
            }
        }
    })
}

type ClauseSet = Vec<Vec<Literal>>;

enum ClauseOutcome {
    /// Identity of the outer connective; drop the clause.
    Drop,
    Keep(Vec<Literal>),
    Split(Vec<Vec<Literal>>),
}

pub(super) struct Engine<'a> {
    target: Target,
    oracle: Option<&'a dyn TypeOracle>,
    memo: Option<&'a mut MemoTable>,
    budget: usize,
}

impl<'a> Engine<'a> {
    fn fingerprint(&self) -> u64 {
        self.oracle.map(|o| o.fingerprint()).unwrap_or(0)
    }

    /// `d` denotes a subset of `c`.
    fn implies(&self, d: &Literal, c: &Literal) -> bool {
        if d == c {
            return true;
        }
        let Some(o) = self.oracle else { return false };
        match (d, c) {
            (Literal::Type(a), Literal::Type(b)) => o.subsumes(b, a),
            (Literal::Neg(a), Literal::Neg(b)) => o.subsumes(a, b),
            (Literal::Type(a), Literal::Neg(b)) => o.incompatible(&[a, b]),
            (Literal::Atom(_), Literal::Type(_)) => {
                matches!(o.meet(d, c), Some(Meet::Alternatives(ref v)) if v.len() == 1 && v[0] == *d)
            }
            (Literal::Atom(_), Literal::Neg(b)) => {
                matches!(o.meet(d, &Literal::Type(b.clone())), Some(Meet::Bottom))
            }
            _ => false,
        }
    }

    /// Literals `x` and `y` cover everything when joined.
    fn exhaustive(&self, x: &Literal, y: &Literal) -> bool {
        if x.complement().as_ref() == Some(y) {
            return true;
        }
        let Some(o) = self.oracle else { return false };
        match (x, y) {
            (Literal::Neg(t), Literal::Type(s)) | (Literal::Type(s), Literal::Neg(t)) => o.subsumes(s, t),
            (Literal::Neg(t), Literal::Neg(u)) => o.incompatible(&[t, u]),
            _ => false,
        }
    }

    /// Literals `x` and `y` are disjoint.
    fn disjoint(&self, x: &Literal, y: &Literal) -> bool {
        if x.complement().as_ref() == Some(y) {
            return true;
        }
        if let (Literal::Atom(a), Literal::Atom(b)) = (x, y) {
            return a != b;
        }
        let Some(o) = self.oracle else { return false };
        match (x, y) {
            (Literal::Neg(t), Literal::Type(s)) | (Literal::Type(s), Literal::Neg(t)) => o.subsumes(t, s),
            (Literal::Type(a), Literal::Type(b)) => o.incompatible(&[a, b]),
            _ => false,
        }
    }

    fn sort_clause(c: &mut Vec<Literal>) {
        c.sort();
        c.dedup();
    }

    /// Rules inside one disjunctive clause (CNF).
    fn reduce_disjunction(&self, mut c: Vec<Literal>) -> ClauseOutcome {
        Self::sort_clause(&mut c);
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                if self.exhaustive(&c[i], &c[j]) {
                    return ClauseOutcome::Drop;
                }
            }
        }
        if self.oracle.is_some() {
            // l ∨ m with l ⊆ m keeps m
            let mut i = 0;
            while i < c.len() {
                let redundant = (0..c.len()).any(|j| j != i && self.implies(&c[i], &c[j]));
                if redundant {
                    c.remove(i);
                } else {
                    i += 1;
                }
            }
        }
        ClauseOutcome::Keep(c)
    }

    /// Rules inside one conjunctive term (DNF).
    fn reduce_conjunction(&self, mut c: Vec<Literal>) -> ClauseOutcome {
        Self::sort_clause(&mut c);
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                if self.disjoint(&c[i], &c[j]) {
                    return ClauseOutcome::Drop;
                }
            }
        }
        let Some(o) = self.oracle else { return ClauseOutcome::Keep(c) };
        let positives: Vec<&str> = c
            .iter()
            .filter_map(|l| match l {
                Literal::Type(n) => Some(&**n),
                _ => None,
            })
            .collect();
        if positives.len() >= 2 && o.incompatible(&positives) {
            return ClauseOutcome::Drop;
        }
        // l ∧ m with l ⊆ m keeps l
        let mut i = 0;
        while i < c.len() {
            let redundant = (0..c.len()).any(|j| j != i && self.implies(&c[j], &c[i]) && !(self.implies(&c[i], &c[j]) && i < j));
            if redundant {
                c.remove(i);
            } else {
                i += 1;
            }
        }
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                match o.meet(&c[i], &c[j]) {
                    None => {}
                    Some(Meet::Bottom) => return ClauseOutcome::Drop,
                    Some(Meet::Alternatives(alts)) => {
                        let rest: Vec<Literal> =
                            c.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, l)| l.clone()).collect();
                        if alts.is_empty() {
                            return ClauseOutcome::Drop;
                        }
                        if alts.len() == 1 {
                            let mut next = rest;
                            next.push(alts[0].clone());
                            return match self.reduce_conjunction(next) {
                                ClauseOutcome::Keep(k) => ClauseOutcome::Keep(k),
                                other => other,
                            };
                        }
                        return ClauseOutcome::Split(
                            alts.into_iter()
                                .map(|a| {
                                    let mut t = rest.clone();
                                    t.push(a);
                                    t
                                })
                                .collect(),
                        );
                    }
                }
            }
        }
        ClauseOutcome::Keep(c)
    }

    fn reduce_clause(&self, c: Vec<Literal>) -> ClauseOutcome {
        match self.target {
            Target::Cnf => self.reduce_disjunction(c),
            Target::Dnf => self.reduce_conjunction(c),
        }
    }

    /// The whole set collapses to the absorbing element of the outer
    /// connective (⊥ for CNF, ⊤ for DNF).
    fn absorbing() -> ClauseSet {
        vec![vec![]]
    }

    /// Clause `small` makes `big` redundant under the outer connective.
    fn absorbs(&self, small: &[Literal], big: &[Literal]) -> bool {
        match self.target {
            // conjunction of disjunctions: small ⊆ big (as sets of denotation)
            Target::Cnf => small.iter().all(|d| big.iter().any(|c| self.implies(d, c))),
            // disjunction of conjunctions: big ⊆ small
            Target::Dnf => small.iter().all(|d| big.iter().any(|t| self.implies(t, d))),
        }
    }

    fn reduce(&self, set: ClauseSet) -> ClauseSet {
        let mut work = set;
        loop {
            let mut next: ClauseSet = Vec::with_capacity(work.len());
            for c in work.iter().cloned() {
                match self.reduce_clause(c) {
                    ClauseOutcome::Drop => {}
                    ClauseOutcome::Keep(k) => next.push(k),
                    ClauseOutcome::Split(parts) => next.extend(parts),
                }
            }
            if next.iter().any(Vec::is_empty) {
                return Self::absorbing();
            }
            let conj = self.target == Target::Dnf;
            next.sort_by(|a, b| compare_clauses(a, b, conj));
            next.dedup();

            // Unit interactions under the outer connective.
            if let Some(collapsed) = self.unit_rules(&mut next) {
                return collapsed;
            }

            // Absorption.
            let mut keep = vec![true; next.len()];
            for i in 0..next.len() {
                for j in 0..next.len() {
                    if i != j && keep[j] && keep[i] && self.absorbs(&next[j], &next[i]) {
                        // ties (mutual absorption) keep the earlier clause
                        if self.absorbs(&next[i], &next[j]) && i < j {
                            continue;
                        }
                        keep[i] = false;
                    }
                }
            }
            let mut reduced: ClauseSet = next.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect();
            reduced.sort_by(|a, b| compare_clauses(a, b, conj));
            if reduced == work {
                return reduced;
            }
            work = reduced;
        }
    }

    /// Returns `Some` when the unit clauses collapse the whole form.
    fn unit_rules(&self, set: &mut ClauseSet) -> Option<ClauseSet> {
        let units: Vec<Literal> = set.iter().filter(|c| c.len() == 1).map(|c| c[0].clone()).collect();
        match self.target {
            Target::Cnf => {
                // units are conjoined
                let term = self.reduce_conjunction(units.clone());
                match term {
                    ClauseOutcome::Drop => return Some(Self::absorbing()),
                    ClauseOutcome::Keep(k) if k != units => {
                        set.retain(|c| c.len() != 1);
                        set.extend(k.into_iter().map(|l| vec![l]));
                    }
                    ClauseOutcome::Split(alts) => {
                        // units ⇒ disjunction of alternative unit sets; only
                        // representable when each alternative is one literal
                        // beyond a shared rest.
                        let shared: Vec<Literal> = alts[0]
                            .iter()
                            .filter(|l| alts.iter().all(|a| a.contains(l)))
                            .cloned()
                            .collect();
                        let mut clause: Vec<Literal> = Vec::new();
                        let mut ok = true;
                        for a in &alts {
                            let extra: Vec<&Literal> = a.iter().filter(|l| !shared.contains(l)).collect();
                            if extra.len() == 1 {
                                clause.push(extra[0].clone());
                            } else {
                                ok = false;
                            }
                        }
                        if ok {
                            set.retain(|c| c.len() != 1);
                            set.extend(shared.into_iter().map(|l| vec![l]));
                            Self::sort_clause(&mut clause);
                            set.push(clause);
                        }
                    }
                    ClauseOutcome::Keep(_) => {}
                }
            }
            Target::Dnf => {
                // units are disjoined
                for i in 0..units.len() {
                    for j in i + 1..units.len() {
                        if self.exhaustive(&units[i], &units[j]) {
                            return Some(Self::absorbing());
                        }
                    }
                }
            }
        }
        None
    }

    fn outer_is_and(&self) -> bool {
        self.target == Target::Cnf
    }

    fn literal_total(set: &ClauseSet) -> usize {
        set.iter().map(Vec::len).sum()
    }

    fn product(&self, children: Vec<ClauseSet>) -> Result<ClauseSet, NormalizeError> {
        let mut acc: ClauseSet = vec![vec![]];
        for child in children {
            let mut next = Vec::with_capacity(acc.len() * child.len());
            for a in &acc {
                for b in &child {
                    let mut c = a.clone();
                    c.extend(b.iter().cloned());
                    next.push(c);
                }
            }
            if Self::literal_total(&next) > self.budget {
                return Err(NormalizeError::FormTooLarge { budget: self.budget });
            }
            acc = self.reduce(next);
        }
        Ok(acc)
    }

    fn nf(&mut self, e: &Nnf) -> Result<ClauseSet, NormalizeError> {
        let and_outer = self.outer_is_and();
        match e {
            Nnf::Top => Ok(if and_outer { vec![] } else { vec![vec![]] }),
            Nnf::Bottom => Ok(if and_outer { vec![vec![]] } else { vec![] }),
            Nnf::Lit(l) => Ok(self.reduce(vec![vec![l.clone()]])),
            Nnf::And(xs) | Nnf::Or(xs) => {
                let key = format!("{}|{}|{}", self.target, self.fingerprint(), e.key());
                if let Some(memo) = self.memo.as_deref_mut() {
                    if let Some(hit) = memo.lookup(&key) {
                        return Ok(hit);
                    }
                }
                let mut children = Vec::with_capacity(xs.len());
                for x in xs {
                    children.push(self.nf(x)?);
                }
                let is_outer = matches!(e, Nnf::And(_)) == and_outer;
                let result = if is_outer {
                    let union: ClauseSet = children.into_iter().flatten().collect();
                    if Self::literal_total(&union) > self.budget {
                        return Err(NormalizeError::FormTooLarge { budget: self.budget });
                    }
                    self.reduce(union)
                } else {
                    self.product(children)?
                };
                if let Some(memo) = self.memo.as_deref_mut() {
                    memo.insert(key, result.clone(), e.literal_count(), Self::literal_total(&result));
                }
                Ok(result)
            }
        }
    }

    fn finish(&self, set: ClauseSet) -> NormalForm {
        match self.target {
            Target::Cnf if set.is_empty() => NormalForm::Top,
            Target::Cnf if set.iter().any(Vec::is_empty) => NormalForm::Bottom,
            Target::Dnf if set.is_empty() => NormalForm::Bottom,
            Target::Dnf if set.iter().any(Vec::is_empty) => NormalForm::Top,
            target => NormalForm::Clauses { target, clauses: set },
        }
    }
}

fn run(
    expr: &Expr,
    target: Target,
    oracle: Option<&dyn TypeOracle>,
    memo: Option<&mut MemoTable>,
    budget: usize,
) -> Result<NormalForm, NormalizeError> {
    let nnf = to_nnf(expr, true)?;
    let mut engine = Engine { target, oracle, memo, budget };
    let set = engine.nf(&nnf)?;
    Ok(engine.finish(set))
}

/// Rewrites `expr` to the sorted normal form `target`. With an oracle,
/// hierarchy-aware rules apply as well.
pub fn normalize(expr: &Expr, target: Target, oracle: Option<&dyn TypeOracle>) -> Result<NormalForm, NormalizeError> {
    run(expr, target, oracle, None, DEFAULT_BUDGET)
}

pub fn normalize_with_budget(
    expr: &Expr,
    target: Target,
    oracle: Option<&dyn TypeOracle>,
    budget: usize,
) -> Result<NormalForm, NormalizeError> {
    run(expr, target, oracle, None, budget)
}

/// Like [`normalize`], consulting and filling `memo` for every compound
/// subexpression.
pub fn simplify(
    expr: &Expr,
    target: Target,
    oracle: Option<&dyn TypeOracle>,
    memo: &mut MemoTable,
) -> Result<NormalForm, NormalizeError> {
    let budget = memo.budget();
    run(expr, target, oracle, Some(memo), budget)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::syntax::Atom;
    use proptest::prelude::*;

    fn t(s: &str) -> Expr {
        Expr::ty(s)
    }

    fn lits(xs: &[&str]) -> Vec<Literal> {
        xs.iter()
            .map(|x| match x.strip_prefix('~') {
                Some(n) => Literal::neg(n),
                None => Literal::ty(x),
            })
            .collect()
    }

    #[test]
    fn double_negation() {
        let nf = normalize(&Expr::not(Expr::not(t("a"))), Target::Cnf, None).unwrap();
        assert_eq!(nf, NormalForm::Clauses { target: Target::Cnf, clauses: vec![lits(&["a"])] });
        assert_eq!(nf.to_string(), "a");
    }

    #[test]
    fn xor_to_cnf() {
        let nf = normalize(&Expr::xor(t("b"), t("c")), Target::Cnf, None).unwrap();
        assert_eq!(
            nf,
            NormalForm::Clauses { target: Target::Cnf, clauses: vec![lits(&["b", "c"]), lits(&["~b", "~c"])] }
        );
        assert_eq!(nf.to_string(), "(b | c) & (~b | ~c)");
    }

    #[test]
    fn xor_to_dnf() {
        let nf = normalize(&Expr::xor(t("b"), t("c")), Target::Dnf, None).unwrap();
        assert_eq!(nf.to_string(), "b & ~c | c & ~b");
    }

    #[test]
    fn complement_detects_bottom() {
        let e = Expr::And(vec![t("x1"), t("x2"), Expr::not(t("x2")), t("x3")]);
        assert_eq!(normalize(&e, Target::Cnf, None).unwrap(), NormalForm::Bottom);
        assert_eq!(normalize(&e, Target::Dnf, None).unwrap(), NormalForm::Bottom);
        let taut = Expr::Or(vec![t("x"), Expr::not(t("x"))]);
        assert_eq!(normalize(&taut, Target::Dnf, None).unwrap(), NormalForm::Top);
    }

    #[test]
    fn identity_annihilation_absorption() {
        let e = Expr::And(vec![t("x"), Expr::Top]);
        assert_eq!(normalize(&e, Target::Dnf, None).unwrap().to_string(), "x");
        let e = Expr::Or(vec![t("x"), Expr::Top]);
        assert_eq!(normalize(&e, Target::Dnf, None).unwrap(), NormalForm::Top);
        let e = Expr::And(vec![t("x"), Expr::Or(vec![t("x"), t("y")])]);
        assert_eq!(normalize(&e, Target::Cnf, None).unwrap().to_string(), "x");
        assert_eq!(normalize(&e, Target::Dnf, None).unwrap().to_string(), "x");
        let e = Expr::Or(vec![t("x"), Expr::And(vec![t("x"), t("y")])]);
        assert_eq!(normalize(&e, Target::Dnf, None).unwrap().to_string(), "x");
    }

    #[test]
    fn distinct_atoms_are_disjoint() {
        let e = Expr::And(vec![Expr::Lit(Literal::Atom(Atom::Number(1))), Expr::Lit(Literal::Atom(Atom::Number(2)))]);
        assert_eq!(normalize(&e, Target::Dnf, None).unwrap(), NormalForm::Bottom);
    }

    #[test]
    fn negated_atom_is_rejected() {
        let e = Expr::not(Expr::Lit(Literal::Atom(Atom::Number(1))));
        assert!(matches!(normalize(&e, Target::Dnf, None), Err(NormalizeError::InvalidNegation(_))));
    }

    #[test]
    fn budget_guard() {
        // (a1 ∧ b1) ∨ … ∨ (a12 ∧ b12) in CNF has 2^12 clauses of 12 literals.
        let e = Expr::Or((0..12).map(|i| Expr::And(vec![t(&format!("a{i}")), t(&format!("b{i}"))])).collect());
        assert!(matches!(
            normalize_with_budget(&e, Target::Cnf, None, 1000),
            Err(NormalizeError::FormTooLarge { budget: 1000 })
        ));
        assert!(normalize(&e, Target::Dnf, None).is_ok());
    }

    /// Small explicit hierarchy: `order` lists (specific, general) pairs,
    /// closed reflexively/transitively on construction.
    #[derive(Debug, Clone)]
    pub(crate) struct TestOracle {
        pub names: Vec<String>,
        pub below: Vec<Vec<bool>>,
        pub incompatible: Vec<Vec<usize>>,
    }

    impl TestOracle {
        pub fn new(names: Vec<String>, pairs: &[(usize, usize)], incompatible: Vec<Vec<usize>>) -> Self {
            let n = names.len();
            let mut below = vec![vec![false; n]; n];
            for (i, row) in below.iter_mut().enumerate() {
                row[i] = true;
            }
            for &(s, g) in pairs {
                below[s][g] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if below[i][k] && below[k][j] {
                            below[i][j] = true;
                        }
                    }
                }
            }
            TestOracle { names, below, incompatible }
        }

        fn idx(&self, s: &str) -> Option<usize> {
            self.names.iter().position(|n| n == s)
        }

        /// Valuations of the symbols (one universe element suffices for
        /// boolean denotations) consistent with order and incompatibility.
        pub fn valuations(&self) -> Vec<Vec<bool>> {
            let n = self.names.len();
            (0u32..1 << n)
                .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
                .filter(|v| {
                    (0..n).all(|i| (0..n).all(|j| !self.below[i][j] || !v[i] || v[j]))
                        && self.incompatible.iter().all(|set| !set.iter().all(|&m| v[m]))
                })
                .collect()
        }
    }

    impl TypeOracle for TestOracle {
        fn subsumes(&self, general: &str, specific: &str) -> bool {
            match (self.idx(general), self.idx(specific)) {
                (Some(g), Some(s)) => self.below[s][g],
                _ => general == specific,
            }
        }

        fn incompatible(&self, types: &[&str]) -> bool {
            let ids: Vec<usize> = types.iter().filter_map(|t| self.idx(t)).collect();
            self.incompatible.iter().any(|set| set.iter().all(|&m| ids.iter().any(|&i| self.below[i][m])))
        }
    }

    pub(crate) fn eval_expr(e: &Expr, oracle: &TestOracle, v: &[bool]) -> bool {
        match e {
            Expr::Top => true,
            Expr::Bottom => false,
            Expr::Lit(l) => eval_lit(l, oracle, v),
            Expr::Not(x) => !eval_expr(x, oracle, v),
            Expr::And(xs) => xs.iter().all(|x| eval_expr(x, oracle, v)),
            Expr::Or(xs) => xs.iter().any(|x| eval_expr(x, oracle, v)),
            Expr::Xor(a, b) => eval_expr(a, oracle, v) != eval_expr(b, oracle, v),
        }
    }

    fn eval_lit(l: &Literal, oracle: &TestOracle, v: &[bool]) -> bool {
        match l {
            Literal::Type(n) => v[oracle.idx(n).unwrap()],
            Literal::Neg(n) => !v[oracle.idx(n).unwrap()],
            _ => unreachable!("type-only test expressions"),
        }
    }

    pub(crate) fn random_expr(names: usize) -> impl Strategy<Value = Expr> {
        let leaf = (0..names).prop_map(|i| Expr::ty(&format!("t{i}")));
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(Expr::not),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::And),
                prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Or),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::xor(a, b)),
            ]
        })
    }

    pub(crate) fn random_oracle(names: usize) -> impl Strategy<Value = TestOracle> {
        (
            prop::collection::vec((0..names, 0..names), 0..names),
            prop::collection::vec(prop::collection::vec(0..names, 2..3), 0..2),
        )
            .prop_map(move |(pairs, incompat)| {
                // keep edges acyclic: specific index > general index
                let pairs: Vec<(usize, usize)> =
                    pairs.into_iter().filter(|(a, b)| a != b).map(|(a, b)| (a.max(b), a.min(b))).collect();
                let incompat = incompat.into_iter().filter(|s| s[0] != s[1]).collect();
                TestOracle::new((0..names).map(|i| format!("t{i}")).collect(), &pairs, incompat)
            })
    }

    fn literal_set() -> impl Strategy<Value = ClauseSet> {
        prop::collection::vec(
            prop::collection::vec(
                prop_oneof![(0..4usize).prop_map(|i| Literal::ty(&format!("t{i}"))), (0..4usize).prop_map(|i| Literal::neg(&format!("t{i}")))],
                1..4,
            ),
            0..5,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn denotation_preserved(e in random_expr(5), oracle in random_oracle(5), dnf in any::<bool>()) {
            let target = if dnf { Target::Dnf } else { Target::Cnf };
            let plain = normalize(&e, target, None).unwrap().to_expr();
            let semantic = normalize(&e, target, Some(&oracle)).unwrap().to_expr();
            for v in oracle.valuations() {
                let want = eval_expr(&e, &oracle, &v);
                prop_assert_eq!(eval_expr(&plain, &oracle, &v), want);
                prop_assert_eq!(eval_expr(&semantic, &oracle, &v), want);
            }
        }

        #[test]
        fn idempotent(e in random_expr(5), oracle in random_oracle(5), dnf in any::<bool>()) {
            let target = if dnf { Target::Dnf } else { Target::Cnf };
            let once = normalize(&e, target, Some(&oracle)).unwrap();
            let twice = normalize(&once.to_expr(), target, Some(&oracle)).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn guard_rules_never_grow(set in literal_set(), dnf in any::<bool>(), oracle in random_oracle(4)) {
            let target = if dnf { Target::Dnf } else { Target::Cnf };
            for o in [None, Some(&oracle as &dyn TypeOracle)] {
                let engine = Engine { target, oracle: o, memo: None, budget: DEFAULT_BUDGET };
                let before = Engine::literal_total(&set);
                let after = engine.reduce(set.clone());
                prop_assert!(Engine::literal_total(&after) <= before);
            }
        }

        #[test]
        fn memo_is_transparent(es in prop::collection::vec(random_expr(4), 1..8), oracle in random_oracle(4)) {
            let mut memo = MemoTable::default();
            for e in &es {
                for target in [Target::Cnf, Target::Dnf] {
                    let with = simplify(e, target, Some(&oracle), &mut memo).unwrap();
                    let without = normalize(e, target, Some(&oracle)).unwrap();
                    prop_assert_eq!(with, without);
                }
            }
        }
    }

    #[test]
    fn semantic_rules() {
        // names: a=0, b=1, c=2; a ⪯ b; a,c incompatible
        let o = TestOracle::new(vec!["a".into(), "b".into(), "c".into()], &[(0, 1)], vec![vec![0, 2]]);
        let and_ab = Expr::And(vec![t("a"), t("b")]);
        assert_eq!(normalize(&and_ab, Target::Dnf, Some(&o)).unwrap().to_string(), "a");
        assert_eq!(normalize(&and_ab, Target::Cnf, Some(&o)).unwrap().to_string(), "a");
        let or_ab = Expr::Or(vec![t("a"), t("b")]);
        assert_eq!(normalize(&or_ab, Target::Dnf, Some(&o)).unwrap().to_string(), "b");
        assert_eq!(normalize(&or_ab, Target::Cnf, Some(&o)).unwrap().to_string(), "b");
        let and_ac = Expr::And(vec![t("a"), t("c")]);
        assert_eq!(normalize(&and_ac, Target::Dnf, Some(&o)).unwrap(), NormalForm::Bottom);
        assert_eq!(normalize(&and_ac, Target::Cnf, Some(&o)).unwrap(), NormalForm::Bottom);
        // without the hierarchy the conjunction stays
        assert_eq!(normalize(&and_ab, Target::Dnf, None).unwrap().to_string(), "a & b");
    }

    #[test]
    fn literals_are_not_memoized() {
        let mut memo = MemoTable::default();
        simplify(&t("a"), Target::Dnf, None, &mut memo).unwrap();
        assert_eq!(memo.stats().entries, 0);
        let e = Expr::And(vec![t("a"), t("b")]);
        simplify(&e, Target::Dnf, None, &mut memo).unwrap();
        assert_eq!(memo.stats().entries, 1);
        let again = simplify(&Expr::And(vec![t("b"), t("a")]), Target::Dnf, None, &mut memo).unwrap();
        assert_eq!(memo.stats().hits, 1);
        assert_eq!(again.to_string(), "a & b");
    }
}
