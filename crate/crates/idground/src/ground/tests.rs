use super::*;
use crate::bounds::{copy_closure, make_tolerant, refine, to_bottom_up, trivial_cmap, StopPolicy};
use crate::logic::{parse_theory, to_tnf, Theory};
use crate::structure::parse_structure;

fn theory(text: &str) -> Theory {
    to_tnf(&parse_theory(text).unwrap())
}

fn lines(g: &GroundTheory) -> Vec<String> {
    g.sentences.iter().map(|f| g.formula_text(f)).collect()
}

const SUBGRAPH: &str = "vocab { pred Edge/2. pred Sub/2. } input { Edge } theory {
    ! u v : Sub(u,v) => Edge(u,v).
    ! x y z : Sub(x,y) & Sub(x,z) => y = z. }";

const FUNCTIONAL_ONLY: &str = "vocab { pred Edge/2. pred Sub/2. } input { Edge } theory {
    ! x y z : Sub(x,y) & Sub(x,z) => y = z. }";

fn graph(t: &Theory, n: usize, edges: &[(u32, u32)]) -> FiniteStructure {
    let mut s = FiniteStructure::with_size(t.vocab.clone(), n);
    let edge = t.vocab.lookup("Edge").unwrap();
    s.set_pred(edge, edges.iter().map(|(a, b)| vec![*a, *b]));
    s
}

#[test]
fn universal_becomes_conjunction_over_domain() {
    let t = theory("vocab { pred P/1. } theory { ! x : P(x). }");
    let s = parse_structure("domain = { a; b }", &t.vocab).unwrap();
    let (g, _) = ground_full(&t, &s).unwrap();
    assert_eq!(lines(&g), ["P(a)", "P(b)"]);
    assert_eq!(grounding_size(&g), 2);
}

#[test]
fn full_grounding_size_counts_domain() {
    let t = theory("vocab { pred P/1. } theory { ! x : P(x). }");
    let s = FiniteStructure::with_size(t.vocab.clone(), 5);
    assert_eq!(grounding_size(&ground_full(&t, &s).unwrap().0), 5);
}

#[test]
fn full_grounding_of_functional_sentence() {
    let t = theory(FUNCTIONAL_ONLY);
    let s = graph(&t, 3, &[(0, 1)]);
    let (g, stats) = ground_full(&t, &s).unwrap();
    assert_eq!(g.sentences.len(), 27);
    assert!(g.sentences.iter().all(|f| matches!(f, GFormula::Or(gs) if gs.len() == 3)));
    // 27 substitutions for the clause, 81 for its literals.
    assert_eq!(stats.instantiations, 108);
}

#[test]
fn rules_instantiated_per_head_tuple() {
    let t = theory("vocab { pred P/1. pred Q/1. } theory { define { P(x) <- Q(x). } }");
    let s = parse_structure("domain = { a; b }", &t.vocab).unwrap();
    let (g, _) = ground_full(&t, &s).unwrap();
    let fog = g.to_fog();
    assert_eq!(fog, "fog 1\n{\nP(a) <- Q(a).\nP(b) <- Q(b).\n}\n");
    assert_eq!(grounding_size(&g), 4);
}

#[test]
fn head_variables_missing_from_body_range_over_domain() {
    let t = theory("vocab { pred P/2. pred Q/1. } theory { define { P(x,y) <- Q(x). } }");
    let s = FiniteStructure::with_size(t.vocab.clone(), 2);
    let (g, _) = ground_full(&t, &s).unwrap();
    assert_eq!(g.rules().count(), 4);
}

#[test]
fn reduced_grounding_of_subgraph_sentence() {
    let t = theory("vocab { pred Edge/2. pred Sub/2. } input { Edge } theory { ! u v : Sub(u,v) => Edge(u,v). }");
    let edges = [(0, 1), (1, 2), (2, 2)];
    let s = graph(&t, 3, &edges);
    let (g, _) = ground_reduced(&t, &s).unwrap();
    let mut want = Vec::new();
    for i in 0..3u32 {
        for j in 0..3u32 {
            if !edges.contains(&(i, j)) {
                want.push(format!("~Sub(d{i},d{j})"));
            }
        }
    }
    assert_eq!(lines(&g), want);
}

#[test]
fn input_only_sentence_true_in_structure_disappears() {
    let t = theory("vocab { pred Edge/2. pred P/0. } input { Edge } theory { ? x y : Edge(x,y). P. }");
    let s = graph(&t, 2, &[(0, 1)]);
    let (g, _) = ground_reduced(&t, &s).unwrap();
    assert_eq!(lines(&g), ["P"]);
}

#[test]
fn reduced_functional_sentence_has_binary_clauses() {
    let t = theory(FUNCTIONAL_ONLY);
    for n in 1..5 {
        let s = graph(&t, n, &[]);
        let (g, _) = ground_reduced(&t, &s).unwrap();
        let mut expected = 0;
        for _x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if y != z {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(g.sentences.len(), expected);
        assert!(g.sentences.iter().all(|f| f.literal_count() == 2));
        let sub = t.vocab.lookup("Sub").unwrap();
        let mut mentions_edge = false;
        for f in &g.sentences {
            f.visit_atoms(&mut |a| mentions_edge |= a.sym != sub);
        }
        assert!(!mentions_edge);
    }
}

#[test]
fn bounds_shrink_functional_sentence_to_edge_join() {
    let t = theory(SUBGRAPH);
    let edges = [(0, 1), (0, 2), (1, 2), (3, 0), (3, 1), (3, 2)];
    let s = graph(&t, 5, &edges);
    let (c, _) = refine(&t, &StopPolicy::nodes(4, 4));
    let c = copy_closure(c, &t);
    let c = to_bottom_up(c, &t);
    let mut c = make_tolerant(c, &t);
    let (g, _) = ground_with_bounds(&t, &s, &mut c).unwrap();
    let binary = g.sentences.iter().filter(|f| f.literal_count() == 2).count();
    let mut join = 0;
    for (a, b) in edges {
        for (c, d) in edges {
            if a == c && b != d {
                join += 1;
            }
        }
    }
    assert_eq!(binary, join);
}

#[test]
fn certainly_false_sentence_gives_false_without_work() {
    let t = theory("vocab { pred P/1. } theory { ! x : P(x) & ~P(x). ! x : P(x). }");
    let (c, _) = refine(&t, &StopPolicy::nodes(4, 4));
    assert!(c.mgr.is_top(c.cf(t.sentences[0].id)));
    let mut c = make_tolerant(to_bottom_up(copy_closure(c, &t), &t), &t);
    let s = FiniteStructure::with_size(t.vocab.clone(), 3);
    let (g, stats) = ground_with_bounds(&t, &s, &mut c).unwrap();
    assert!(g.is_unsat_marker());
    assert_eq!(stats.instantiations, 0);
}

#[test]
fn certainly_true_sentence_is_skipped() {
    let t = theory("vocab { pred P/1. } theory { ! x : P(x) | ~P(x). ! x : P(x). }");
    let mut c = copy_closure(trivial_cmap(&t), &t);
    let bound = crate::bounds::Bound { ct: c.mgr.top(), cf: c.mgr.bot() };
    c.set(t.sentences[0].id, bound);
    let s = FiniteStructure::with_size(t.vocab.clone(), 2);
    let (g, _) = ground_with_bounds(&t, &s, &mut c).unwrap();
    assert_eq!(lines(&g), ["P(d0)", "P(d1)"]);
}

#[test]
fn bottom_up_map_keeps_tautology() {
    let t = theory("vocab { pred P/1. } theory { ! x : P(x) | ~P(x). }");
    let (c, _) = refine(&t, &StopPolicy::nodes(4, 4));
    let mut c = make_tolerant(to_bottom_up(copy_closure(c, &t), &t), &t);
    let s = FiniteStructure::with_size(t.vocab.clone(), 2);
    let (g, _) = ground_with_bounds(&t, &s, &mut c).unwrap();
    assert_eq!(lines(&g), ["P(d0) | ~P(d0)", "P(d1) | ~P(d1)"]);
}

#[test]
fn trivial_map_matches_full_grounding() {
    let t = theory(SUBGRAPH);
    let s = graph(&t, 3, &[(0, 1), (1, 2)]);
    let (full, _) = ground_full(&t, &s).unwrap();
    let mut c = copy_closure(trivial_cmap(&t), &t);
    let (g, _) = ground_with_bounds(&t, &s, &mut c).unwrap();
    assert_eq!(full.to_fog(), g.to_fog());
}

#[test]
fn intolerant_map_is_rejected() {
    let t = theory("vocab { pred P/0. } theory { P. define { P <- P. } }");
    let mut c = trivial_cmap(&t);
    let body = t.definitions[0].rules[0].body.id;
    let bound = crate::bounds::Bound { ct: c.mgr.top(), cf: c.mgr.bot() };
    c.set(body, bound);
    let s = FiniteStructure::with_size(t.vocab.clone(), 1);
    assert_eq!(ground_with_bounds(&t, &s, &mut c).unwrap_err(), GroundError::NotTolerant(body));
}

#[test]
fn non_tnf_theory_is_rejected() {
    let t = parse_theory("vocab { pred P/1. func F/1. } theory { ! x : P(F(x)). }").unwrap();
    let s = FiniteStructure::with_size(t.vocab.clone(), 1);
    assert_eq!(ground_full(&t, &s).unwrap_err(), GroundError::NotTnf);
}

#[test]
fn size_of_small_groundings() {
    let t = theory("vocab { pred P/1. pred Q/1. } theory { }");
    let mut g = GroundTheory::new(t.vocab.clone(), vec!["a".into(), "b".into()]);
    assert_eq!(grounding_size(&g), 0);
    let p = t.vocab.lookup("P").unwrap();
    let q = t.vocab.lookup("Q").unwrap();
    g.sentences.push(GFormula::and(vec![GFormula::atom(p, vec![0]), GFormula::not(GFormula::atom(q, vec![1]))]));
    assert_eq!(grounding_size(&g), 2);
    assert_eq!(lines(&g), ["P(a) & ~Q(b)"]);
}

#[test]
fn sharing_replaces_repeated_conjunction() {
    let t = theory("vocab { pred P/1. pred Q/1. pred R/1. } theory { }");
    let sym = |n: &str| t.vocab.lookup(n).unwrap();
    let conj = GFormula::And(vec![
        GFormula::atom(sym("P"), vec![0]),
        GFormula::atom(sym("Q"), vec![0]),
        GFormula::atom(sym("R"), vec![0]),
    ]);
    let mut g = GroundTheory::new(t.vocab.clone(), vec!["a".into(), "b".into()]);
    g.sentences.push(GFormula::Or(vec![conj.clone(), GFormula::atom(sym("P"), vec![1])]));
    g.sentences.push(GFormula::Or(vec![conj, GFormula::atom(sym("Q"), vec![1])]));
    let h = apply_sharing(&g);
    assert_eq!(lines(&h), ["_S1 | P(b)", "_S1 | Q(b)", "_S1 <=> P(a) & Q(a) & R(a)"]);

    let plain = apply_sharing(&h);
    assert_eq!(plain.to_fog(), h.to_fog());
}

#[test]
fn sharing_preserves_models_over_original_atoms() {
    let t = theory("vocab { pred P/1. pred Q/1. } theory { }");
    let (p, q) = (t.vocab.lookup("P").unwrap(), t.vocab.lookup("Q").unwrap());
    let shared = GFormula::Or(vec![GFormula::atom(p, vec![0]), GFormula::not(GFormula::atom(q, vec![1]))]);
    let mut g = GroundTheory::new(t.vocab.clone(), vec!["a".into(), "b".into()]);
    g.sentences.push(GFormula::And(vec![shared.clone(), GFormula::atom(q, vec![0])]));
    g.sentences.push(GFormula::Or(vec![shared, GFormula::atom(p, vec![1])]));
    let h = apply_sharing(&g);
    assert_eq!(h.vocab.len(), t.vocab.len() + 1);
    let share = h.vocab.lookup("_S1").unwrap();
    for bits in 0..16u32 {
        let mut m = FiniteStructure::with_size(h.vocab.clone(), 2);
        m.set_pred_bits(p, vec![bits & 1 != 0, bits & 2 != 0]);
        m.set_pred_bits(q, vec![bits & 4 != 0, bits & 8 != 0]);
        let before = g.holds(&m).unwrap();
        let after = [false, true].iter().any(|v| {
            m.set_pred_bits(share, vec![*v]);
            h.holds(&m).unwrap()
        });
        assert_eq!(before, after, "valuation {bits:04b}");
    }
}

#[test]
fn propositional_names_and_equality() {
    let t = theory("vocab { pred P/2. func F/1. } theory { }");
    let p = t.vocab.lookup("P").unwrap();
    let mut g = GroundTheory::new(t.vocab.clone(), vec!["a".into(), "b".into()]);
    g.sentences.push(GFormula::Or(vec![GFormula::atom(p, vec![0, 1]), GFormula::Eq(0, 1)]));
    g.sentences.push(GFormula::Eq(0, 0));
    let s = FiniteStructure::with_size(t.vocab.clone(), 2);
    let pt = to_propositional(&g, &s).unwrap();
    assert_eq!(pt.atoms[0].name, "P_a_b");
    assert_eq!(pt.sentences[0], PFormula::Var(0));
    let names: Vec<&str> = pt.atoms.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["P_a_b", "F_a_a", "F_a_b", "F_b_a", "F_b_b"]);
    let v = |i: u32| PFormula::Var(i);
    let n = |i: u32| PFormula::Not(Box::new(PFormula::Var(i)));
    assert_eq!(
        pt.sentences[1..],
        [
            PFormula::Or(vec![v(1), v(2)]),
            PFormula::Or(vec![n(1), n(2)]),
            PFormula::Or(vec![v(3), v(4)]),
            PFormula::Or(vec![n(3), n(4)]),
        ]
    );
}

#[test]
fn unequal_constants_become_false() {
    let t = theory("vocab { pred P/0. } theory { }");
    let mut g = GroundTheory::new(t.vocab.clone(), vec!["a".into(), "b".into()]);
    g.sentences.push(GFormula::Eq(0, 1));
    let s = FiniteStructure::with_size(t.vocab.clone(), 2);
    assert_eq!(to_propositional(&g, &s).unwrap().sentences, [PFormula::False]);
}

#[test]
fn clausification_preserves_satisfying_valuations() {
    let t = theory("vocab { pred P/1. } theory { ! x : ? y : (P(x) & P(y)) | ~(P(y) | x = y). }");
    let s = FiniteStructure::with_size(t.vocab.clone(), 3);
    let (g, _) = ground_full(&t, &s).unwrap();
    let g = apply_sharing(&g);
    let pt = to_propositional(&g, &s).unwrap();
    let cnf = to_cnf(&pt).unwrap();
    let atoms = pt.atoms.len();
    let aux = cnf.vars as usize - atoms;
    assert!(aux <= 20);
    for bits in 0u64..(1 << atoms) {
        let vals: Vec<bool> = (0..atoms).map(|i| bits >> i & 1 == 1).collect();
        let want = pt.sentences.iter().all(|f| f.eval(&vals));
        let got = (0u64..(1 << aux)).any(|ab| {
            let mut full = vals.clone();
            full.extend((0..aux).map(|i| ab >> i & 1 == 1));
            cnf.satisfied_by(&full)
        });
        assert_eq!(want, got);
    }
}

#[test]
fn dimacs_lists_atoms_and_rejects_rules() {
    let t = theory("vocab { pred P/1. pred Q/1. } theory { ! x : P(x) | Q(x). }");
    let s = parse_structure("domain = { a }", &t.vocab).unwrap();
    let (g, _) = ground_full(&t, &s).unwrap();
    let cnf = to_cnf(&to_propositional(&g, &s).unwrap()).unwrap();
    assert_eq!(cnf.to_dimacs(), "c atom 1 = P(a)\nc atom 2 = Q(a)\np cnf 2 1\n1 2 0\n");

    let t = theory("vocab { pred P/1. pred Q/1. } theory { define { P(x) <- Q(x). } }");
    let (g, _) = ground_full(&t, &s).unwrap();
    assert_eq!(to_cnf(&to_propositional(&g, &s).unwrap()).unwrap_err(), GroundError::RulesInCnf);
}

#[test]
fn fog_round_trip() {
    let t = theory(
        "vocab { pred P/1. pred Q/2. func F/1. } theory {
            ! x : P(x) | ? y : Q(x,y) & F(y) ~= x.
            define { P(x) <- ~Q(x,x) | F(x) = x. } }",
    );
    let s = FiniteStructure::with_size(t.vocab.clone(), 2);
    let (g, _) = ground_full(&t, &s).unwrap();
    let g = apply_sharing(&g);
    let text = g.to_fog();
    let back = parse_fog(&text, &t.vocab, s.domain()).unwrap();
    assert_eq!(back.to_fog(), text);
    assert_eq!(grounding_size(&back), grounding_size(&g));
}

#[test]
fn fog_rejects_missing_header() {
    assert_eq!(parse_fog("P.\n", &Vocabulary::new(), &[]).unwrap_err(), FogError::Header);
}

#[test]
fn ground_loop_has_only_the_empty_model() {
    let t = theory("vocab { pred P/0. } theory { define { P <- P. } }");
    let s = FiniteStructure::with_size(t.vocab.clone(), 1);
    let (g, _) = ground_full(&t, &s).unwrap();
    let p = t.vocab.lookup("P").unwrap();
    let mut m = s.clone();
    m.set_pred_bits(p, vec![false]);
    assert!(g.holds(&m).unwrap());
    m.set_pred_bits(p, vec![true]);
    assert!(!g.holds(&m).unwrap());
}

#[test]
fn implied_literals_follow_rules_and_completion() {
    let t = theory("vocab { pred P/0. pred Q/0. pred R/0. pred S/0. } theory { P. define { Q <- P. R <- R. S <- ~Q. } }");
    let s = parse_structure("domain = { a }", &t.vocab).unwrap();
    let (g, _) = ground_full(&t, &s).unwrap();
    let known = g.implied_literals(&s).unwrap();
    let text: Vec<String> = known.iter().map(|(a, v)| format!("{}{}", if *v { "" } else { "~" }, g.atom_text(a))).collect();
    assert_eq!(text, ["P", "Q", "~R", "~S"]);
}

#[test]
fn unit_facts_forced_by_rules_are_dropped() {
    // ct(P) comes from the sentence, ct(Q(x)) from the rule; only P is needed.
    let t = theory("vocab { pred P/0. pred Q/1. pred R/1. } theory { P. ! x : R(x) | Q(x). define { Q(x) <- P. } }");
    let s = parse_structure("domain = { a; b }", &t.vocab).unwrap();
    let (c, _) = refine(&t, &StopPolicy::nodes(4, 4));
    let mut c = make_tolerant(to_bottom_up(copy_closure(c, &t), &t), &t);
    let (g, _) = ground_with_bounds(&t, &s, &mut c).unwrap();
    assert_eq!(lines(&g), ["P"]);
    assert_eq!(g.rules().count(), 2);
}

#[test]
fn function_value_implies_the_other_inequalities() {
    let t = theory("vocab { func F/1. } theory { ! x : F(x) = x. }");
    let s = parse_structure("domain = { a; b }", &t.vocab).unwrap();
    let (c, _) = refine(&t, &StopPolicy::nodes(4, 4));
    let mut c = make_tolerant(to_bottom_up(copy_closure(c, &t), &t), &t);
    let (g, _) = ground_with_bounds(&t, &s, &mut c).unwrap();
    assert_eq!(lines(&g), ["F(a) = a", "F(b) = b"]);
}
