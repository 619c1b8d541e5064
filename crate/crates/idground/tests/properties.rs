//! Randomized invariants over the generator's small instances.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use idground::bounds::{c_transform, cbar_a, copy_closure, make_tolerant, refine, to_bottom_up, CMap, StopPolicy};
use idground::gen::{instance, random_input, FormulaGen, GenConfig, Instance};
use idground::logic::tnf::formula_to_tnf;
use idground::logic::{completion, push_quantifiers, to_tnf, Formula, Theory, Var, VarPool, Vocabulary};
use idground::oracle::{enumerate_expansions, DEFAULT_CAP};
use idground::pipeline::{run, Mode, Options};
use idground::structure::{all_tuples, answers, eval3, evaluate, Assignment, FiniteStructure, ThreeValued, Tv};
use idground::wfs::{classify_totality, materialize_input_definitions, satisfies_definition, wfm, Totality};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A structure interpreting every symbol of `vocab` at random.
fn random_full(rng: &mut ChaCha8Rng, vocab: &Vocabulary, n: usize) -> FiniteStructure {
    let mut all = vocab.clone();
    for p in vocab.ids() {
        all.set_input(p);
    }
    let mut s = random_input(rng, &all, n, 0.5);
    s.vocab = vocab.clone();
    s
}

/// A random formula over `vocab` with free variables among two fresh ones.
fn open_formula(rng: &mut ChaCha8Rng, vocab: &Vocabulary) -> (Formula, Vec<Var>, VarPool) {
    let mut vars = VarPool::new();
    let scope = vec![vars.named("a"), vars.named("b")];
    let f = FormulaGen::new(vocab).formula(rng, &mut vars, &mut scope.clone(), 3);
    (f, scope, vars)
}

fn model_texts(t: &Theory, s: &FiniteStructure) -> Vec<String> {
    enumerate_expansions(t, s, DEFAULT_CAP).unwrap().iter().map(FiniteStructure::to_text).collect()
}

fn ids(t: &Theory) -> Vec<u32> {
    let mut out = Vec::new();
    for root in t.roots() {
        root.visit(&mut |f| out.push(f.id));
    }
    out
}

fn refined(t: &Theory) -> CMap {
    let (c, _) = refine(t, &StopPolicy::nodes(4, 4));
    to_bottom_up(copy_closure(c, t), t)
}

fn assert_sound(t: &Theory, c: &CMap, s: &FiniteStructure) {
    for m in enumerate_expansions(t, s, DEFAULT_CAP).unwrap() {
        for root in t.roots() {
            root.visit(&mut |f| {
                let vars: Vec<Var> = f.free_vars().into_iter().collect();
                let truth: BTreeSet<Vec<u32>> = answers(&vars, f, &m).unwrap().into_iter().collect();
                for tuple in c.mgr.query_all(c.ct(f.id), &m, &vars).unwrap() {
                    assert!(truth.contains(&tuple), "unsound ct on {}\n{}", t.show(f), t.to_text());
                }
                for tuple in c.mgr.query_all(c.cf(f.id), &m, &vars).unwrap() {
                    assert!(!truth.contains(&tuple), "unsound cf on {}\n{}", t.show(f), t.to_text());
                }
            });
        }
    }
}

fn small(seed: u64) -> Instance {
    instance(&mut rng(seed), &GenConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_forms_keep_answers(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = small(seed);
        let (f, scope, mut vars) = open_formula(&mut r, &inst.theory.vocab);
        let tnf = formula_to_tnf(&f, &mut vars);
        let pushed = push_quantifiers(&f);
        for n in 1..=3 {
            let s = random_full(&mut r, &inst.theory.vocab, n);
            let want = answers(&scope, &f, &s).unwrap();
            prop_assert_eq!(&answers(&scope, &tnf, &s).unwrap(), &want);
            prop_assert_eq!(&answers(&scope, &pushed, &s).unwrap(), &want);
        }
    }

    #[test]
    fn tnf_is_idempotent_and_ids_stay_unique(seed in any::<u64>()) {
        let t = small(seed).theory;
        let once = to_tnf(&t);
        prop_assert_eq!(to_tnf(&once).to_text(), once.to_text());
        for u in [&t, &once, &completion(&once)] {
            let all = ids(u);
            let distinct: BTreeSet<u32> = all.iter().copied().collect();
            prop_assert_eq!(distinct.len(), all.len());
        }
    }

    #[test]
    fn models_satisfy_the_completion(seed in any::<u64>()) {
        let inst = small(seed);
        let comp = completion(&inst.theory);
        for m in enumerate_expansions(&inst.theory, &inst.structure, DEFAULT_CAP).unwrap() {
            for f in &comp.sentences {
                prop_assert!(evaluate(f, &m, &Assignment::new()).unwrap());
            }
        }
    }

    #[test]
    fn three_valued_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = small(seed);
        let vocab = &inst.theory.vocab;
        let (f, scope, _) = open_formula(&mut r, vocab);
        let n = r.gen_range(1..=3);
        let s = random_full(&mut r, vocab, n);
        let exact = ThreeValued::from_two(&s);
        let mut vague = exact.clone();
        for p in vocab.ids().filter(|p| !vocab.is_func(*p)) {
            for args in all_tuples(vocab.arity(p), n) {
                if r.gen_bool(0.3) {
                    vague.set(p, &args, Tv::U);
                }
            }
        }
        for t in all_tuples(2, n) {
            let a = Assignment::from_pairs(&[(scope[0], t[0]), (scope[1], t[1])]);
            let two = evaluate(&f, &s, &a).unwrap();
            let precise = eval3(&f, &exact, &a).unwrap();
            prop_assert_eq!(precise, Tv::from_bool(two));
            prop_assert!(eval3(&f, &vague, &a).unwrap().leq_p(precise));
        }
        let yes: BTreeSet<Vec<u32>> = answers(&scope, &f, &s).unwrap().into_iter().collect();
        let no: BTreeSet<Vec<u32>> = answers(&scope, &Formula::not(f.clone()), &s).unwrap().into_iter().collect();
        prop_assert!(yes.is_disjoint(&no));
        prop_assert_eq!(yes.len() + no.len(), n * n);
    }

    #[test]
    fn total_definitions_have_two_valued_models(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = small(seed);
        for d in &inst.theory.definitions {
            if classify_totality(d) == Totality::Unknown {
                continue;
            }
            for n in 1..=3 {
                let open = random_full(&mut r, &inst.theory.vocab, n);
                prop_assert!(wfm(d, &open).unwrap().is_two_valued());
            }
        }
    }

    #[test]
    fn flipping_a_defined_atom_breaks_the_definition(seed in any::<u64>()) {
        let inst = small(seed);
        let Some(d) = inst.theory.definitions.first() else { return Ok(()) };
        let mut only = inst.theory.clone();
        only.sentences.clear();
        only.definitions = vec![d.clone()];
        for m in enumerate_expansions(&only, &inst.structure, DEFAULT_CAP).unwrap() {
            prop_assert!(satisfies_definition(&m, d));
            for p in d.defined() {
                for args in all_tuples(m.vocab.arity(p), m.size()) {
                    let mut flipped = m.clone();
                    let was = m.holds(p, &args).unwrap();
                    let mut bits = m.pred_bits(p).unwrap().to_vec();
                    let at = idground::structure::rank(&args, m.size());
                    bits[at] = !was;
                    flipped.set_pred_bits(p, bits);
                    prop_assert!(!satisfies_definition(&flipped, d));
                }
            }
        }
    }

    #[test]
    fn materialization_keeps_the_models(seed in any::<u64>()) {
        let inst = small(seed);
        let t = to_tnf(&inst.theory);
        let before: Vec<FiniteStructure> = enumerate_expansions(&t, &inst.structure, DEFAULT_CAP).unwrap();
        // Rejected when an input-only definition is three-valued, so no model exists.
        let Ok(mat) = materialize_input_definitions(&t, &inst.structure) else {
            prop_assert!(before.is_empty());
            return Ok(());
        };
        let after: Vec<FiniteStructure> = enumerate_expansions(&mat.theory, &mat.structure, DEFAULT_CAP).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for m in &after {
            prop_assert!(idground::oracle::satisfies(&t, m).unwrap());
        }
    }

    #[test]
    fn refined_bounds_are_sound(seed in any::<u64>()) {
        let inst = small(seed);
        let t = to_tnf(&inst.theory);
        let c = refined(&t);
        assert_sound(&t, &c, &inst.structure);
        let tolerant = make_tolerant(c, &t);
        assert_sound(&t, &tolerant, &inst.structure);
    }

    #[test]
    fn tolerant_transform_keeps_the_models(seed in any::<u64>()) {
        let inst = small(seed);
        let t = to_tnf(&inst.theory);
        let c = make_tolerant(refined(&t), &t);
        let mut u = c_transform(&t, &c);
        u.sentences.extend(cbar_a(&c, &t).unwrap().sentences);
        u.renumber();
        prop_assert_eq!(model_texts(&u, &inst.structure), model_texts(&t, &inst.structure));
    }

    #[test]
    fn refinement_stays_within_budget(seed in any::<u64>(), factor in 1usize..6) {
        let inst = small(seed);
        let t = to_tnf(&inst.theory);
        for policy in [StopPolicy::nodes(factor, 4), StopPolicy::ratio(factor, &inst.structure)] {
            let (_, stats) = refine(&t, &policy);
            prop_assert!(stats.installed <= stats.budget.unwrap_or(usize::MAX));
        }
    }

    #[test]
    fn pipeline_output_is_deterministic(seed in any::<u64>()) {
        let inst = small(seed);
        for mode in Mode::ALL {
            let Ok(a) = run(&inst.theory, &inst.structure, &Options::with_mode(mode)) else { continue };
            let b = run(&inst.theory, &inst.structure, &Options::with_mode(mode)).unwrap();
            prop_assert_eq!(a.grounding.to_fog(), b.grounding.to_fog());
        }
    }
}
