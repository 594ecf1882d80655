use super::*;
use crate::fs::build_fs;
use crate::hierarchy::tests::build;
use crate::hierarchy::Encoding;
use crate::simplify::MemoTable;
use crate::syntax::parse_expr;

pub(crate) const APPEND: &str = "
append := append0 | append1.
append0 := [FRONT < >, BACK #1 & list, WHOLE #1].
append1 := [FRONT <#first . #rest1>, BACK #back & list, WHOLE <#first . #rest2>,
            PATCH append & [FRONT #rest1, BACK #back, WHOLE #rest2]].
";

fn ts(src: &str) -> TypeSystem {
    let mut t = TypeSystem::new(build(src, Encoding::TransitiveClosure, Target::Cnf).unwrap(), MemoTable::new(10_000));
    mark_recursive(&mut t);
    t
}

fn fs(t: &TypeSystem, src: &str) -> Fs {
    build_fs(&parse_expr(src).unwrap(), t).unwrap()
}

fn names(t: &TypeSystem, ids: &BTreeSet<TypeId>) -> Vec<String> {
    ids.iter().map(|&i| t.hierarchy().name(i).to_string()).collect()
}

fn resolved() -> Control {
    Control { mode: Mode::Resolved, ..Control::default() }
}

fn consistent(o: Outcome) -> Vec<Fs> {
    match o {
        Outcome::Consistent(v) => v,
        other => panic!("expected consistent, got {other}"),
    }
}

fn slot_at(f: &Fs, path: &str) -> String {
    let p: Vec<&str> = path.split('|').collect();
    f.node(f.get_path(&p).unwrap_or_else(|| panic!("no path {path} in {f}"))).slot.to_string()
}

#[test]
fn recursive_types_of_append() {
    let t = ts(APPEND);
    assert_eq!(names(&t, &detect_recursive(t.hierarchy())), ["append", "append1"]);
    assert!(detect_recursive(ts("a := [F b]. b := [G c]. c := d & [H 1].").hierarchy()).is_empty());
    let m = ts("t1 := [F t2]. t2 := [G t1]. t3 := [H t1].");
    assert_eq!(names(&m, &detect_recursive(m.hierarchy())), ["t1", "t2"]);
    let s = ts("t := [F t].");
    assert_eq!(names(&s, &detect_recursive(s.hierarchy())), ["t"]);
}

#[test]
fn lazy_append() {
    let t = ts(APPEND);
    let alts = consistent(expand_type(&t, "append", &resolved()));
    assert_eq!(alts.len(), 2);
    assert_eq!(alts[0].root_slot().to_string(), "append0");
    assert_eq!(alts[0].get_path(&["BACK"]), alts[0].get_path(&["WHOLE"]));
    assert!(alts[0].node(0).expanded);
    let a1 = &alts[1];
    assert_eq!(a1.root_slot().to_string(), "append1");
    assert_eq!(slot_at(a1, "PATCH"), "append");
    assert_eq!(a1.get_path(&["PATCH", "PATCH"]), None);
    assert!(!a1.node(a1.get_path(&["PATCH"]).unwrap()).expanded);
    assert!(!a1.node(0).expanded);
    assert_eq!(a1.get_path(&["PATCH", "BACK"]), a1.get_path(&["BACK"]));
}

#[test]
fn path_control_unfolds_three_levels() {
    let t = ts(APPEND);
    let mut c = resolved();
    c.apply_line("expand-path PATCH|PATCH|PATCH").unwrap();
    let alts = consistent(expand_type(&t, "append", &c));
    assert_eq!(alts.len(), 5);
    let deepest = alts.iter().find(|a| a.get_path(&["PATCH", "PATCH", "PATCH", "PATCH"]).is_some()).unwrap();
    assert_eq!(slot_at(deepest, "PATCH|PATCH|PATCH"), "append1");
    assert_eq!(slot_at(deepest, "PATCH|PATCH|PATCH|PATCH"), "append");
    assert_eq!(deepest.get_path(&["PATCH", "PATCH", "PATCH", "PATCH", "PATCH"]), None);
}

#[test]
fn complete_mode_diverges_honestly() {
    let t = ts(APPEND);
    let c = Control { max_path_length: Some(20), ..Control::default() };
    assert!(matches!(expand_type(&t, "append", &c), Outcome::Bounded(_)));
    let t = ts("t := [F t].");
    assert!(matches!(expand_type(&t, "t", &c), Outcome::Bounded(_)));
    let alts = consistent(expand_type(&t, "t", &resolved()));
    assert_eq!(alts[0].to_string(), "t & [F t]");
}

#[test]
fn depth_bounds() {
    let t = ts("t := [F t].");
    let mut c = Control::default();
    c.apply_line("depth t 3").unwrap();
    assert!(matches!(expand_type(&t, "t", &c), Outcome::Bounded(_)));
    c.apply_line("mode resolved").unwrap();
    c.apply_line("expand-always t").unwrap();
    let alts = consistent(expand_type(&t, "t", &c));
    assert!(alts[0].get_path(&["F", "F", "F"]).is_some());
    assert!(alts[0].get_path(&["F", "F", "F", "F"]).is_none());
}

#[test]
fn atoms_stay() {
    let t = ts("a := [F 1].");
    let f = fs(&t, "3");
    let alts = consistent(expand(&t, &f, &Control::default()));
    assert!(alts[0].isomorphic(&f));
}

#[test]
fn conjunction_inherits_both_skeletons() {
    let t = ts("y := [a 1]. z := [b 2]. x := y & z.");
    let alts = consistent(expand_type(&t, "x", &Control::default()));
    let x = &alts[0];
    assert_eq!(x.to_string(), "x & [a 1, b 2]");
    for p in ["y", "z"] {
        assert!(t.skeleton(t.hierarchy().id(p).unwrap()).unwrap().unwrap().subsumes(x, &t));
    }
    assert!(x.node(0).expanded);
}

#[test]
fn never_and_negated_paths_block() {
    let t = ts("y := [a 1]. w := [F y, G y].");
    let mut c = Control::default();
    c.apply_line("expand-never y").unwrap();
    let alts = consistent(expand_type(&t, "w", &c));
    assert_eq!(alts[0].to_string(), "w & [F y, G y]");
    let mut c = Control::default();
    c.apply_line("expand-path !G").unwrap();
    let alts = consistent(expand_type(&t, "w", &c));
    assert_eq!(alts[0].to_string(), "w & [F y & [a 1], G y]");
}

#[test]
fn consistency_report() {
    let t = ts("A := [a 1]. B := A & [a 2].");
    let r = check_consistency(&t, &[], &Control::default());
    assert_eq!(r.len(), 2);
    assert_eq!(r[0].1.label(), "consistent");
    match &r[1].1 {
        Outcome::Inconsistent(c) => assert_eq!(display_path(&c.path), "a"),
        other => panic!("{other}"),
    }
    assert!(check_consistency(&ts(""), &[], &Control::default()).is_empty());
    let t = ts(APPEND);
    let r = check_consistency(&t, &[], &resolved());
    assert_eq!(r.iter().map(|(_, o)| o.label()).collect::<Vec<_>>(), ["consistent"; 3]);
}

#[test]
fn satisfiability() {
    let t = ts("A := [a 1]. B := [b 1]. bottom = A & B.");
    assert_eq!(satisfiable(&t, &Fs::top(), &Fs::top(), &Control::default()).0, Sat::Yes);
    assert_eq!(satisfiable(&t, &fs(&t, "A"), &fs(&t, "B"), &Control::default()).0, Sat::No);
    let t = ts(APPEND);
    let (sat, out) = satisfiable(&t, &fs(&t, "append & [FRONT <1>]"), &fs(&t, "[BACK <2>]"), &resolved());
    assert_eq!(sat, Sat::Yes);
    let alts = consistent(out);
    assert_eq!(alts.len(), 1);
    let whole = alts[0].sub(alts[0].get_path(&["WHOLE"]).unwrap(), &t);
    assert_eq!(whole.to_string(), "<1, 2>");
}

#[test]
fn glb_table() {
    let t = ts("x := y & z. x' := y' & z' & [a 1]. A := [a 1]. B := [b 1]. bottom = A & B. u := *top*. v := *top*.");
    let g = |a: &str, b: &str| glb_typed(&t, &fs(&t, a), &fs(&t, b), &Control::default());
    assert_eq!(g("y", "z").to_string(), "x");
    assert_eq!(g("y", "z").action, Action::SkipFeatureUnify);
    assert_eq!(g("y'", "z'").to_string(), "y' & z'");
    assert_eq!(g("u", "v").action, Action::FeatureUnify);
    assert_eq!(g("A", "B").action, Action::Fail);
    assert_eq!(g("[a 1]", "[b 1]").to_string(), "[a 1, b 1]");
    assert_eq!(g("3", "number").to_string(), "3");
    assert_eq!(g("3", "string").action, Action::Fail);
    assert_eq!(g("3", "4").action, Action::Fail);
    assert_eq!(g("3", "[F 1]").action, Action::Fail);
    assert_eq!(g("A", "[a 2]").action, Action::Fail);
    assert_eq!(g("A", "[b 2]").action, Action::FeatureUnify);
    assert_eq!(g("A", "B & [c 1]").action, Action::Fail);
}

#[test]
fn expansion_extends_and_is_idempotent() {
    let t = ts(APPEND);
    for src in ["append", "append & [FRONT <1, 2>]", "[X append1, Y append0]"] {
        let f = fs(&t, src);
        for alt in consistent(expand(&t, &f, &resolved())) {
            assert!(f.subsumes(&alt, &t), "{src}");
            let again = consistent(expand(&t, &alt, &resolved()));
            assert_eq!(again.len(), 1);
            assert!(again[0].isomorphic(&alt), "{alt} vs {}", again[0]);
        }
    }
}

#[test]
fn batched_applications_match_single_steps() {
    // resolved mode applies one node at a time and, without recursion,
    // never stops lazily
    let grammars = [
        ("a := [F b, G c]. b := [H 1, K c]. c := d & [L 2]. d := [M 3].", "a"),
        ("x := y & z & [P q]. y := [A 1]. z := [B #1, C #1]. q := [D y].", "x"),
        ("s := [A t, B t]. t := u | v. u := [C 1]. v := [C 2, D s2]. s2 := [E 1].", "s"),
        ("bottom = m & n. p := [F m, G #1 & r, H #1]. r := [K n].", "p & [F [K 2]]"),
    ];
    for (src, query) in grammars {
        let t = ts(src);
        let f = fs(&t, query);
        let batched = consistent(expand(&t, &f, &Control::default()));
        let single = consistent(expand(&t, &f, &resolved()));
        assert_eq!(batched.len(), single.len(), "{src}");
        for (a, b) in batched.iter().zip(&single) {
            assert!(a.isomorphic(b), "{src}: {a} vs {b}");
        }
    }
}

#[test]
fn nested_uses_count_towards_depth() {
    let t = ts("t := [F t].");
    let mut c = Control::default();
    c.apply_line("depth t 1").unwrap();
    let f = fs(&t, "[A t & [F t]]");
    assert!(matches!(expand(&t, &f, &c), Outcome::Bounded(_)));
}

/// A random grammar whose types only mention earlier ones, so nothing is
/// recursive.
fn random_grammar(seed: u64) -> (String, usize) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=7);
    let mut src = String::new();
    for i in 0..n {
        let mut parts = Vec::new();
        if i > 0 && rng.gen_bool(0.6) {
            let a = rng.gen_range(0..i);
            let b = rng.gen_range(0..i);
            parts.push(if a != b && rng.gen_bool(0.3) { format!("(t{a} | t{b})") } else { format!("t{a}") });
        }
        let mut arcs = Vec::new();
        for attr in ["F", "G"] {
            if rng.gen_bool(0.5) {
                let v = match rng.gen_range(0..4) {
                    0 => "1".to_string(),
                    1 => "2".to_string(),
                    _ if i > 0 => format!("t{}", rng.gen_range(0..i)),
                    _ => "*top*".to_string(),
                };
                arcs.push(format!("{attr} {v}"));
            }
        }
        if !arcs.is_empty() {
            parts.push(format!("[{}]", arcs.join(", ")));
        }
        let body = if parts.is_empty() { "*top*".to_string() } else { parts.join(" & ") };
        src.push_str(&format!("t{i} := {body}.\n"));
    }
    if n > 2 && rng.gen_bool(0.3) {
        src.push_str(&format!("bottom = t{} & t{}.\n", n - 1, n - 2));
    }
    (src, n)
}

fn try_ts(src: &str) -> Option<TypeSystem> {
    let mut t = TypeSystem::new(build(src, Encoding::TransitiveClosure, Target::Cnf).ok()?, MemoTable::new(10_000));
    mark_recursive(&mut t);
    Some(t)
}

fn unmarked(f: &Fs) -> Fs {
    let mut g = f.clone();
    for x in 0..g.len() {
        let n = g.node_mut(x);
        n.expanded = false;
        n.applied.clear();
    }
    g
}

mod properties {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn expansion_extends_and_modes_agree(seed in any::<u64>(), pick in 0usize..8) {
            let (src, n) = random_grammar(seed);
            let Some(t) = try_ts(&src) else { return Ok(()) };
            prop_assert!(detect_recursive(t.hierarchy()).is_empty());
            let f = fs(&t, &format!("t{}", pick % n));
            let eager = expand(&t, &f, &Control::default());
            let lazy = expand(&t, &f, &resolved());
            match (&eager, &lazy) {
                (Outcome::Consistent(a), Outcome::Consistent(b)) => {
                    prop_assert_eq!(a.len(), b.len(), "{}", src);
                    for (x, y) in a.iter().zip(b) {
                        prop_assert!(x.isomorphic(y), "{}: {} vs {}", src, x, y);
                        prop_assert!(f.subsumes(x, &t), "{}: {}", src, x);
                    }
                }
                (Outcome::Inconsistent(_), Outcome::Inconsistent(_)) => {}
                other => prop_assert!(false, "{}: {:?}", src, other),
            }
        }

        #[test]
        fn resolved_expansion_is_idempotent(seed in any::<u64>(), pick in 0usize..8) {
            let (src, n) = random_grammar(seed);
            let Some(t) = try_ts(&src) else { return Ok(()) };
            let f = fs(&t, &format!("t{}", pick % n));
            if let Outcome::Consistent(alts) = expand(&t, &f, &resolved()) {
                for a in alts {
                    let again = consistent(expand(&t, &unmarked(&a), &resolved()));
                    prop_assert_eq!(again.len(), 1, "{}: {}", src, a);
                    prop_assert_eq!(again[0].to_string(), a.to_string());
                }
            }
        }

        #[test]
        fn expanded_marks_are_sound(seed in any::<u64>(), pick in 0usize..8) {
            let (src, n) = random_grammar(seed);
            let Some(t) = try_ts(&src) else { return Ok(()) };
            let f = fs(&t, &format!("[A t{}, B t{}]", pick % n, (pick + 1) % n));
            if let Outcome::Consistent(alts) = expand(&t, &f, &Control::default()) {
                for a in alts {
                    for x in (0..a.len()).filter(|&x| a.node(x).expanded) {
                        let sub = a.sub(x, &t);
                        let again = consistent(expand(&t, &unmarked(&sub), &Control::default()));
                        prop_assert_eq!(again.len(), 1);
                        prop_assert_eq!(again[0].to_string(), sub.to_string(), "{}", src);
                    }
                }
            }
        }

        #[test]
        fn no_is_stable_under_loosening(seed in any::<u64>(), pick in 0usize..8, never in 0usize..8) {
            let (src, n) = random_grammar(seed);
            let Some(t) = try_ts(&src) else { return Ok(()) };
            let f = fs(&t, &format!("[A t{}, B t{}]", pick % n, (pick + 3) % n));
            let mut strict = Control::default();
            strict.apply_line(&format!("expand-never t{}", never % n)).unwrap();
            if let Outcome::Inconsistent(_) = expand(&t, &f, &strict) {
                let loose = expand(&t, &f, &Control::default());
                prop_assert!(matches!(loose, Outcome::Inconsistent(_)), "{}: {}", src, loose);
            }
        }
    }
}
