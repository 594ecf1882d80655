use super::*;
use crate::fs::build_fs;
use crate::hierarchy::tests::build;
use crate::hierarchy::Encoding;
use crate::syntax::parse_expr;

fn ts(src: &str) -> TypeSystem {
    TypeSystem::new(build(src, Encoding::TransitiveClosure, Target::Cnf).unwrap(), MemoTable::new(10_000))
}

fn glb(t: &TypeSystem, a: &str, b: &str) -> String {
    let a = t.slot(&Expr::ty(a)).unwrap();
    let b = t.slot(&Expr::ty(b)).unwrap();
    t.glb(&a, &b).unwrap().to_string()
}

fn slot(t: &TypeSystem, src: &str) -> NormalForm {
    let e = crate::hierarchy::expr_from_ast(&parse_expr(src).unwrap()).unwrap();
    SlotLogic::slot(t, &e).unwrap()
}

#[test]
fn verified_glb_separates_skeletons() {
    let t = ts("x := y & z. x' := y' & z' & [a 1].");
    assert_eq!(glb(&t, "y", "z"), "x");
    assert_eq!(t.hierarchy().glb_codes(t.hierarchy().id("y'").unwrap(), t.hierarchy().id("z'").unwrap()).len(), 1);
    assert_eq!(glb(&t, "y'", "z'"), "y' & z'");
}

#[test]
fn intermediates_are_never_returned() {
    // the code candidate is |y&z|, which is just the conjunction itself
    let t = ts("y := [a 1]. x := y & z & [a 1].");
    assert_eq!(glb(&t, "y", "z"), "y & z");
    assert_eq!(glb(&t, "x", "y"), "x");
}

#[test]
fn open_world_and_incompatibility() {
    let t = ts("a := *top*. b := *top*. c := *top*. bottom = a & c.");
    assert_eq!(glb(&t, "a", "b"), "a & b");
    assert_eq!(glb(&t, "a", "c"), "*bottom*");
    assert_eq!(glb(&t, "a", "a"), "a");
    let t = ts("A := [a 1]. B := [b 1]. bottom = A & B.");
    assert_eq!(glb(&t, "A", "B"), "*bottom*");
}

#[test]
fn closed_world_sorts() {
    let t = ts("sort s1. sort s2. sort s3 := s1 & s2. sort s4.");
    assert_eq!(glb(&t, "s1", "s2"), "s3");
    assert_eq!(glb(&t, "s1", "s4"), "*bottom*");
    let t = ts("sort s. a := *top*.");
    assert_eq!(glb(&t, "s", "a"), "*bottom*");
}

#[test]
fn atoms_against_sorts() {
    let t = ts("a := *top*.");
    assert_eq!(slot(&t, "3 & number").to_string(), "3");
    assert_eq!(slot(&t, "3 & string").to_string(), "*bottom*");
    assert_eq!(slot(&t, "'sg & symbol").to_string(), "'sg");
    assert_eq!(slot(&t, "3 & a").to_string(), "*bottom*");
    assert_eq!(slot(&t, "3 & 4").to_string(), "*bottom*");
    assert_eq!(slot(&t, "3 & ~string").to_string(), "3");
}

#[test]
fn leaves_reject_features() {
    let t = ts("sort s. a := *top*.");
    assert!(build_fs(&parse_expr("s & [F 1]").unwrap(), &t).is_err());
    assert!(build_fs(&parse_expr("a & [F 1]").unwrap(), &t).is_ok());
}

#[test]
fn slot_subsumption() {
    let t = ts("b := a & [F 1]. c := *top*.");
    assert!(t.slot_subsumes(&slot(&t, "a"), &slot(&t, "b")));
    assert!(!t.slot_subsumes(&slot(&t, "b"), &slot(&t, "a")));
    assert!(t.slot_subsumes(&slot(&t, "number"), &slot(&t, "7")));
    assert!(t.slot_subsumes(&slot(&t, "a | c"), &slot(&t, "b")));
}

#[test]
fn skeletons_and_ancestors() {
    let t = ts("y := [a 1]. z := [b 2]. x := y & z.");
    let h = t.hierarchy();
    let x = h.id("x").unwrap();
    let anc: Vec<&str> = conj_ancestors(h, x).iter().map(|&i| &**h.name(i)).collect();
    assert_eq!(anc.last(), Some(&"x"));
    assert_eq!(anc.len(), 3);
    assert!(t.skeleton(x).unwrap().is_none());
    assert_eq!(t.skeleton(h.id("y").unwrap()).unwrap().unwrap().to_string(), "[a 1]");
}

#[test]
fn memo_records_and_reuses() {
    let t = ts("a := *top*. b := *top*. c := a & b.");
    for _ in 0..3 {
        glb(&t, "a", "b");
    }
    let s = t.memo_stats();
    assert!(s.entries > 0);
    assert!(s.hits >= 2);
}

#[test]
fn caches_drop_on_mutation() {
    let mut t = ts("x := y & z.");
    assert_eq!(glb(&t, "y", "z"), "x");
    let body = parse_expr("y & z & [a 1]").unwrap();
    t.hierarchy_mut().define_type("x", crate::syntax::KindHint::Avm, &body).unwrap();
    assert_eq!(glb(&t, "y", "z"), "y & z");
}

