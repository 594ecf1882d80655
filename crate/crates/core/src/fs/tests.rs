use proptest::prelude::*;

use super::*;
use crate::syntax::parse_expr;

fn fs(src: &str) -> Fs {
    build_fs(&parse_expr(src).unwrap(), &PlainLogic).unwrap()
}

fn slot_at(f: &Fs, path: &[&str]) -> String {
    f.node(f.get_path(path).unwrap()).slot.to_string()
}

const PHI: &str = "np & [AGR #x & agreement & [NUM sg, PERS 3rd], SUBJ #x]";

#[test]
fn builds_shared_agreement() {
    let f = fs(PHI);
    assert_eq!(f.get_path(&["AGR"]), f.get_path(&["SUBJ"]));
    assert_eq!(slot_at(&f, &["AGR"]), "agreement");
    assert_eq!(slot_at(&f, &["AGR", "NUM"]), "sg");
    assert_eq!(slot_at(&f, &["SUBJ", "PERS"]), "3rd");
    assert_eq!(f.root_slot().to_string(), "np");
}

#[test]
fn smallest_feature_term() {
    let f = fs("[A 1]");
    assert_eq!(f.len(), 2);
    assert_eq!(slot_at(&f, &["A"]), "1");
    assert_eq!(f.get_path(&[] as &[&str]), Some(f.root()));
    assert_eq!(f.get_path(&["B"]), None);
}

#[test]
fn complement_fails_at_build() {
    let err = build_fs(&parse_expr("[F a & ~a]").unwrap(), &PlainLogic).unwrap_err();
    match err {
        BuildError::Clash(c) => assert_eq!(display_path(&c.path), "F"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn atoms_are_leaves() {
    let err = build_fs(&parse_expr("3 & [F 1]").unwrap(), &PlainLogic).unwrap_err();
    assert!(matches!(err, BuildError::Clash(_)));
    let f = fs("[A 1]");
    let g = fs("[A [B 2]]");
    assert!(f.unify(&g, &PlainLogic).is_err());
}

#[test]
fn unify_shares_agreement() {
    let f = fs("[AGR #1, SUBJ #1]");
    let g = fs("[AGR [NUM sg]]");
    let u = f.unify(&g, &PlainLogic).unwrap();
    assert_eq!(u.get_path(&["AGR"]), u.get_path(&["SUBJ"]));
    assert_eq!(slot_at(&u, &["SUBJ", "NUM"]), "sg");
    assert_eq!(u.to_string(), "[AGR #1 & [NUM sg], SUBJ #1]");
}

#[test]
fn atom_clash_reports_path() {
    let err = fs("[a [b 1]]").unify(&fs("[a [b 2]]"), &PlainLogic).unwrap_err();
    assert_eq!(display_path(&err.path), "a|b");
}

#[test]
fn top_is_unit() {
    let f = fs(PHI);
    assert!(f.unify(&Fs::top(), &PlainLogic).unwrap().isomorphic(&f));
    assert!(Fs::top().unify(&f, &PlainLogic).unwrap().isomorphic(&f));
}

#[test]
fn subsumption_examples() {
    let f = fs(PHI);
    assert!(f.subsumes(&f, &PlainLogic));
    let g = fs("[AGR #1 & [NUM sg, PERS 3rd], SUBJ #1]");
    assert!(fs("[AGR [NUM sg]]").subsumes(&g, &PlainLogic));
    assert!(!g.subsumes(&fs("[AGR [NUM sg]]"), &PlainLogic));
    let shared = fs("[A #1, B #1]");
    let free = fs("[A *top*, B *top*]");
    assert!(!shared.subsumes(&free, &PlainLogic));
    assert!(free.subsumes(&shared, &PlainLogic));
}

#[test]
fn cycles_print_with_tags() {
    let f = fs("#1 & [F #1]");
    assert_eq!(f.len(), 1);
    assert_eq!(f.to_string(), "#1 & [F #1]");
    assert_eq!(f.cyclic_nodes().len(), 1);
    let g = fs("[F #1 & a & [G #1]]");
    assert_eq!(g.to_string(), "[F #1 & a & [G #1]]");
}

#[test]
fn lists_print_in_angle_brackets() {
    assert_eq!(fs("[W <1, 'x>]").to_string(), "[W <1, 'x>]");
    assert_eq!(fs("[W <1 . #t>, T #t]").to_string(), "[T #1, W <1 . #1>]");
    assert_eq!(fs("[W < >]").to_string(), "[W < >]");
}

#[test]
fn disjunctive_slots_print_grouped() {
    assert_eq!(fs("(a | b) & [F 1]").to_string(), "(a | b) & [F 1]");
    assert_eq!(fs("[F a | b]").to_string(), "[F a | b]");
}

#[test]
fn substructure() {
    let f = fs(PHI);
    let agr = f.sub(f.get_path(&["AGR"]).unwrap(), &PlainLogic);
    assert_eq!(agr.to_string(), "agreement & [NUM sg, PERS 3rd]");
}

#[test]
fn expanded_marks_survive_only_unchanged_merges() {
    let mut f = fs("[F a]");
    for i in 0..f.len() {
        f.node_mut(i).expanded = true;
    }
    let same = f.unify(&f.clone(), &PlainLogic).unwrap();
    assert!(same.nodes().iter().all(|n| n.expanded));
    let g = fs("[F [G 1]]");
    let u = f.unify(&g, &PlainLogic).unwrap();
    assert!(!u.node(u.get_path(&["F"]).unwrap()).expanded);
    assert!(!u.node(u.root()).expanded);
}

/// Random structure with at most 6 nodes over types a..d and two atoms.
pub(crate) fn random_fs() -> impl Strategy<Value = Fs> {
    let slot = prop_oneof![
        3 => Just(None),
        4 => (0..4usize).prop_map(|i| Some(Literal::ty(["a", "b", "c", "d"][i]))),
        1 => (1..3i64).prop_map(|n| Some(Literal::Atom(crate::syntax::Atom::Number(n)))),
    ];
    (1..=6usize)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(slot.clone(), n),
                prop::collection::vec((0..n, 0..2usize, 0..n), 0..=n + 1),
            )
        })
        .prop_map(|(slots, arcs)| {
            let mut nodes: Vec<Node> = slots
                .into_iter()
                .map(|s| Node { slot: s.map(NormalForm::literal).unwrap_or(NormalForm::Top), ..Node::top() })
                .collect();
            for (from, attr, to) in arcs {
                if matches!(nodes[from].slot.as_literal(), Some(Literal::Atom(_))) {
                    continue;
                }
                let a = ["F", "G"][attr];
                nodes[from].arcs.insert(Name::from(a), to);
            }
            let raw = Fs { nodes, root: 0 };
            Graph::from_fs(&raw).finish(0, &PlainLogic).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn commutative(f in random_fs(), g in random_fs()) {
        match (f.unify(&g, &PlainLogic), g.unify(&f, &PlainLogic)) {
            (Ok(a), Ok(b)) => prop_assert!(a.isomorphic(&b), "{} vs {}", a, b),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn associative(f in random_fs(), g in random_fs(), h in random_fs()) {
        let l = f.unify(&g, &PlainLogic).and_then(|x| x.unify(&h, &PlainLogic));
        let r = g.unify(&h, &PlainLogic).and_then(|x| f.unify(&x, &PlainLogic));
        match (l, r) {
            (Ok(a), Ok(b)) => prop_assert!(a.isomorphic(&b)),
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn idempotent_and_coherent(f in random_fs(), g in random_fs(), k in random_fs()) {
        prop_assert!(f.unify(&f, &PlainLogic).unwrap().isomorphic(&f));
        if let Ok(u) = f.unify(&g, &PlainLogic) {
            prop_assert!(f.subsumes(&u, &PlainLogic));
            prop_assert!(g.subsumes(&u, &PlainLogic));
            if let Ok(h) = u.unify(&k, &PlainLogic) {
                prop_assert!(u.subsumes(&h, &PlainLogic));
            }
        }
    }

    #[test]
    fn print_round_trip(f in random_fs()) {
        let printed = f.to_string();
        let back = build_fs(&parse_expr(&printed).unwrap(), &PlainLogic).unwrap();
        prop_assert!(back.isomorphic(&f), "{}", printed);
    }

    #[test]
    fn sharing_persists(f in random_fs(), g in random_fs()) {
        if let Ok(u) = f.unify(&g, &PlainLogic) {
            let paths = f.paths();
            for (i, p) in paths.iter().enumerate() {
                for q in paths.iter().skip(i + 1) {
                    if f.get_path(p) == f.get_path(q) {
                        prop_assert_eq!(u.get_path(p), u.get_path(q));
                    }
                }
            }
            // shared via a second path as well
            for (x, n) in f.nodes().iter().enumerate() {
                for (a, &c) in &n.arcs {
                    let mut p = paths[x].clone();
                    p.push(a.clone());
                    prop_assert_eq!(u.get_path(&p), u.get_path(&paths[c]));
                }
            }
        }
    }
}
