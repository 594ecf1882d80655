//! Total order on normal-form terms.
//!
//! Category ranks: type < negated type < feature term < conjunction <
//! disjunction < symbol < string < number. Names and strings compare
//! lexicographically, numbers numerically, compound terms element-wise with
//! the shorter sequence first on a common prefix.

use std::cmp::Ordering;

use super::{Literal, NfTerm};
use crate::syntax::Atom;

fn lit_rank(l: &Literal) -> u8 {
    match l {
        Literal::Type(_) => 0,
        Literal::Neg(_) => 1,
        Literal::Feature(_) => 2,
        Literal::Atom(Atom::Symbol(_)) => 5,
        Literal::Atom(Atom::Str(_)) => 6,
        Literal::Atom(Atom::Number(_)) => 7,
    }
}

const CONJ_RANK: u8 = 3;
const DISJ_RANK: u8 = 4;

pub fn compare_literals(a: &Literal, b: &Literal) -> Ordering {
    lit_rank(a).cmp(&lit_rank(b)).then_with(|| match (a, b) {
        (Literal::Type(x), Literal::Type(y)) | (Literal::Neg(x), Literal::Neg(y)) => x.cmp(y),
        (Literal::Feature(x), Literal::Feature(y)) => x.cmp(y),
        (Literal::Atom(Atom::Symbol(x)), Literal::Atom(Atom::Symbol(y)))
        | (Literal::Atom(Atom::Str(x)), Literal::Atom(Atom::Str(y))) => x.cmp(y),
        (Literal::Atom(Atom::Number(x)), Literal::Atom(Atom::Number(y))) => x.cmp(y),
        _ => Ordering::Equal,
    })
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_literals(self, other)
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn term_rank(t: &NfTerm) -> u8 {
    match t {
        NfTerm::Lit(l) => lit_rank(l),
        NfTerm::And(_) => CONJ_RANK,
        NfTerm::Or(_) => DISJ_RANK,
    }
}

fn compare_seq<T>(xs: &[T], ys: &[T], cmp: impl Fn(&T, &T) -> Ordering) -> Ordering {
    for (x, y) in xs.iter().zip(ys) {
        match cmp(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    xs.len().cmp(&ys.len())
}

/// Compares two normal-form terms.
pub fn compare_nf(a: &NfTerm, b: &NfTerm) -> Ordering {
    term_rank(a).cmp(&term_rank(b)).then_with(|| match (a, b) {
        (NfTerm::Lit(x), NfTerm::Lit(y)) => compare_literals(x, y),
        (NfTerm::And(xs), NfTerm::And(ys)) | (NfTerm::Or(xs), NfTerm::Or(ys)) => compare_seq(xs, ys, compare_nf),
        _ => Ordering::Equal,
    })
}

/// Compares two clauses of one normal form; a clause with a single literal
/// ranks as that literal, longer clauses as the compound `compound_rank`.
pub(crate) fn compare_clauses(a: &[Literal], b: &[Literal], conj: bool) -> Ordering {
    let rank = |c: &[Literal]| match c {
        [l] => lit_rank(l),
        _ if conj => CONJ_RANK,
        _ => DISJ_RANK,
    };
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        ([x], [y]) => compare_literals(x, y),
        _ => compare_seq(a, b, compare_literals),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ty(s: &str) -> NfTerm {
        NfTerm::Lit(Literal::ty(s))
    }
    fn neg(s: &str) -> NfTerm {
        NfTerm::Lit(Literal::neg(s))
    }
    fn num(n: i64) -> NfTerm {
        NfTerm::Lit(Literal::Atom(Atom::Number(n)))
    }

    #[test]
    fn documented_chain() {
        let chain = vec![
            ty("a"),
            ty("b"),
            ty("bb"),
            neg("a"),
            NfTerm::And(vec![ty("a"), ty("b")]),
            NfTerm::And(vec![ty("a"), neg("a")]),
            NfTerm::Or(vec![ty("a"), ty("b")]),
            NfTerm::Or(vec![ty("a"), ty("b"), ty("c")]),
            NfTerm::Or(vec![ty("a"), num(1)]),
        ];
        for (i, x) in chain.iter().enumerate() {
            for (j, y) in chain.iter().enumerate() {
                assert_eq!(compare_nf(x, y), i.cmp(&j), "{x:?} vs {y:?}");
            }
        }
    }

    #[test]
    fn reflexive() {
        let x = NfTerm::Or(vec![ty("a"), NfTerm::And(vec![ty("b"), neg("c")])]);
        assert_eq!(compare_nf(&x, &x), Ordering::Equal);
    }

    #[test]
    fn atoms_after_compounds() {
        let s = NfTerm::Lit(Literal::Atom(Atom::Symbol("a".into())));
        let st = NfTerm::Lit(Literal::Atom(Atom::Str("a".into())));
        assert_eq!(compare_nf(&NfTerm::Or(vec![ty("z"), ty("zz")]), &s), Ordering::Less);
        assert_eq!(compare_nf(&s, &st), Ordering::Less);
        assert_eq!(compare_nf(&st, &num(0)), Ordering::Less);
        assert_eq!(compare_nf(&num(2), &num(10)), Ordering::Less);
    }

    pub(crate) fn literal() -> impl Strategy<Value = Literal> {
        prop_oneof![
            "[a-c]{1,2}".prop_map(|s| Literal::ty(&s)),
            "[a-c]{1,2}".prop_map(|s| Literal::neg(&s)),
            (0u32..3).prop_map(Literal::Feature),
            "[a-c]".prop_map(|s| Literal::Atom(Atom::Symbol(s))),
            "[a-c]".prop_map(|s| Literal::Atom(Atom::Str(s))),
            (-3i64..20).prop_map(|n| Literal::Atom(Atom::Number(n))),
        ]
    }

    fn term() -> impl Strategy<Value = NfTerm> {
        prop_oneof![
            3 => literal().prop_map(NfTerm::Lit),
            1 => prop::collection::vec(literal().prop_map(NfTerm::Lit), 2..4).prop_map(NfTerm::And),
            1 => prop::collection::vec(literal().prop_map(NfTerm::Lit), 2..4).prop_map(NfTerm::Or),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn total_order_laws(a in term(), b in term(), c in term()) {
            let ab = compare_nf(&a, &b);
            prop_assert_eq!(ab, compare_nf(&b, &a).reverse());
            if ab == Ordering::Equal {
                prop_assert_eq!(&a, &b);
            }
            if ab != Ordering::Greater && compare_nf(&b, &c) != Ordering::Greater {
                prop_assert_ne!(compare_nf(&a, &c), Ordering::Greater);
            }
        }
    }
}
