//! Quantifier pushing, completion and polarity.

use std::collections::HashMap;

use super::tnf::{canonicalize_heads, simplify};
use super::{Formula, Kind, LogicError, OccId, Theory, Var};

/// Moves quantifiers inward: `∀` through `∧` and past disjuncts that do not
/// mention the variable; dually for `∃`.
pub fn push_quantifiers(f: &Formula) -> Formula {
    simplify(&push(f))
}

fn push(f: &Formula) -> Formula {
    match &f.kind {
        Kind::Not(g) => Formula::not(push(g)),
        Kind::And(fs) => Formula::and(fs.iter().map(push).collect()),
        Kind::Or(fs) => Formula::or(fs.iter().map(push).collect()),
        Kind::Forall(v, g) => push_quant(*v, simplify(&push(g)), true),
        Kind::Exists(v, g) => push_quant(*v, simplify(&push(g)), false),
        _ => f.clone(),
    }
}

fn quant(v: Var, g: Formula, universal: bool) -> Formula {
    if universal {
        Formula::forall(v, g)
    } else {
        Formula::exists(v, g)
    }
}

fn push_quant(v: Var, g: Formula, universal: bool) -> Formula {
    if !g.free_vars().contains(&v) {
        return g;
    }
    match (&g.kind, universal) {
        // ∀ distributes over ∧, ∃ over ∨.
        (Kind::And(parts), true) => Formula::and(parts.iter().map(|p| push_quant(v, p.clone(), true)).collect()),
        (Kind::Or(parts), false) => Formula::or(parts.iter().map(|p| push_quant(v, p.clone(), false)).collect()),
        (Kind::Or(parts), true) | (Kind::And(parts), false) => {
            let (with, without): (Vec<&Formula>, Vec<&Formula>) =
                parts.iter().partition(|p| p.free_vars().contains(&v));
            if without.is_empty() {
                return quant(v, g.clone(), universal);
            }
            let inner = if with.len() == 1 {
                with[0].clone()
            } else if universal {
                Formula::or(with.iter().map(|p| (*p).clone()).collect())
            } else {
                Formula::and(with.iter().map(|p| (*p).clone()).collect())
            };
            let moved = push_quant(v, inner, universal);
            let first = parts.iter().position(|p| p.free_vars().contains(&v)).unwrap();
            let mut out = Vec::new();
            for (i, p) in parts.iter().enumerate() {
                if i == first {
                    out.push(moved.clone());
                } else if !p.free_vars().contains(&v) {
                    out.push(p.clone());
                }
            }
            simplify(&if universal { Formula::or(out) } else { Formula::and(out) })
        }
        _ => quant(v, g, universal),
    }
}

/// Replaces every definition by one `≡`-sentence per defined predicate:
/// `∀x̄ ((¬P(x̄) ∨ φ₁ ∨ … ∨ φₖ) ∧ (P(x̄) ∨ ¬(φ₁ ∨ … ∨ φₖ)))`, with the
/// negated copy in negation normal form.
///
/// Sentences of `t` and the first copy of every rule body keep their
/// occurrence identifiers; all new nodes get fresh ones.
pub fn completion(t: &Theory) -> Theory {
    let mut src = t.clone();
    canonicalize_heads(&mut src);
    let max_id = src.occurrence_ids().into_iter().max().map_or(0, |m| m + 1);
    let mut out = Theory { vocab: src.vocab.clone(), vars: src.vars.clone(), ..Default::default() };
    out.sentences = src.sentences.clone();
    let mut next = max_id;
    for d in &src.definitions {
        for p in d.defined() {
            let rules: Vec<_> = d.rules.iter().filter(|r| r.head == p).collect();
            let head_vars = rules[0].head_vars.clone();
            let bodies: Vec<Formula> = rules.iter().map(|r| shift_ids(&r.body)).collect();
            let negated: Vec<Formula> = bodies
                .iter()
                .map(|b| {
                    let copy = b.rename_bound(&mut out.vars);
                    super::tnf::formula_to_tnf(&Formula::not(copy), &mut out.vars)
                })
                .collect();
            let head = Formula::atom_vars(p, &head_vars);
            let mut pos = vec![Formula::not(head.clone())];
            pos.extend(bodies);
            let neg = if negated.len() == 1 { negated.into_iter().next().unwrap() } else { Formula::and(negated) };
            let body = Formula::and(vec![Formula::or(pos), Formula::or(vec![head, neg])]);
            let mut s = Formula::forall_all(&head_vars, body);
            fill_ids(&mut s, &mut next);
            out.sentences.push(s);
        }
    }
    out
}

fn shift_ids(f: &Formula) -> Formula {
    let mut g = f.clone();
    fn go(f: &mut Formula) {
        f.id += 1;
        for c in f.children_mut() {
            go(c);
        }
    }
    go(&mut g);
    g
}

fn fill_ids(f: &mut Formula, next: &mut OccId) {
    if f.id == 0 {
        f.id = *next;
        *next += 1;
    } else {
        f.id -= 1;
    }
    for c in f.children_mut() {
        fill_ids(c, next);
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Polarity of an occurrence: positive under an even number of negations.
pub fn polarity(t: &Theory, occ: OccId) -> Result<Polarity, LogicError> {
    fn walk(f: &Formula, occ: OccId, negs: usize) -> Option<usize> {
        if f.id == occ {
            return Some(negs);
        }
        let add = usize::from(matches!(f.kind, Kind::Not(_)));
        f.children().into_iter().find_map(|c| walk(c, occ, negs + add))
    }
    for root in t.roots() {
        if let Some(n) = walk(root, occ, 0) {
            return Ok(if n % 2 == 0 { Polarity::Positive } else { Polarity::Negative });
        }
    }
    Err(LogicError::UnknownOccurrence(occ))
}

/// Polarity of every occurrence, keyed by identifier.
pub fn polarities(t: &Theory) -> HashMap<OccId, Polarity> {
    fn walk(f: &Formula, negs: usize, out: &mut HashMap<OccId, Polarity>) {
        out.insert(f.id, if negs % 2 == 0 { Polarity::Positive } else { Polarity::Negative });
        let add = usize::from(matches!(f.kind, Kind::Not(_)));
        for c in f.children() {
            walk(c, negs + add, out);
        }
    }
    let mut out = HashMap::new();
    for root in t.roots() {
        walk(root, 0, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;
    use crate::logic::{parse_theory, to_tnf, VarPool, Vocabulary};

    fn vocab() -> Vocabulary {
        let mut v = Vocabulary::new();
        v.add_pred("P", 2).unwrap();
        v.add_pred("Q", 2).unwrap();
        v.add_pred("R", 1).unwrap();
        v.add_pred("S", 1).unwrap();
        v
    }

    fn show(v: &Vocabulary, vars: &VarPool, f: &Formula) -> String {
        crate::logic::display::Shown { vocab: v, vars, f }.to_string()
    }

    #[test]
    fn clause_splitting_shape() {
        let v = vocab();
        let mut vars = VarPool::new();
        let f = parse_formula("! z : ! x : ! y : P(x,z) | Q(y,z)", &v, &mut vars).unwrap();
        let g = push_quantifiers(&f);
        assert_eq!(show(&v, &vars, &g), "! z : (! x : P(x,z)) | (! y : Q(y,z))");
        let f = parse_formula("? x : ? y : R(x) & S(y)", &v, &mut vars).unwrap();
        assert_eq!(show(&v, &vars, &push_quantifiers(&f)), "(? x_1 : R(x_1)) & (? y_1 : S(y_1))");
    }

    #[test]
    fn inner_quantifier_moves_past_outer_disjunct() {
        let v = vocab();
        let mut vars = VarPool::new();
        let f = parse_formula("! x : ! y : (R(x) | P(x,y)) | S(y)", &v, &mut vars).unwrap();
        let g = push_quantifiers(&f);
        assert_eq!(show(&v, &vars, &g), "! x : R(x) | (! y : P(x,y) | S(y))");
        let f = parse_formula("! x : ! y : R(x) | S(y)", &v, &mut vars).unwrap();
        assert_eq!(show(&v, &vars, &push_quantifiers(&f)), "(! x_1 : R(x_1)) | (! y_1 : S(y_1))");
    }

    #[test]
    fn nothing_to_move() {
        let v = vocab();
        let mut vars = VarPool::new();
        let f = parse_formula("! x : R(x) | S(x)", &v, &mut vars).unwrap();
        assert_eq!(push_quantifiers(&f), f);
    }

    #[test]
    fn transitive_closure_completion() {
        let t = parse_theory(
            "vocab { pred R/2. pred TC/2. } input { R }
             theory { define { TC(x,y) <- R(x,y). TC(x,y) <- ? z : TC(x,z) & TC(z,y). } }",
        )
        .unwrap();
        let c = completion(&t);
        assert_eq!(c.sentences.len(), 1);
        assert!(c.definitions.is_empty());
        assert_eq!(
            c.show(&c.sentences[0]).to_string(),
            "! x y : (~TC(x,y) | R(x,y) | (? z : TC(x,z) & TC(z,y))) & (TC(x,y) | ~R(x,y) & (! _v1 : ~TC(x,_v1) | ~TC(_v1,y)))"
        );
        c.validate().unwrap();
        // Original bodies survive with their occurrence identifiers.
        let mut canon = t.clone();
        canonicalize_heads(&mut canon);
        for r in &canon.definitions[0].rules {
            assert_eq!(c.find(r.body.id), Some(&r.body));
        }
    }

    #[test]
    fn self_loop_completion() {
        let t = parse_theory("vocab { pred P/0. } theory { define { P <- P. } }").unwrap();
        let c = completion(&t);
        assert_eq!(c.show(&c.sentences[0]).to_string(), "(~P | P) & (P | ~P)");
    }

    #[test]
    fn reached_completion_has_two_disjuncts() {
        let t = to_tnf(
            &parse_theory(
                "vocab { pred Reached/1. pred Ham/2. func Start/0. }
                 theory { define { Reached(v) <- v = Start. Reached(v) <- ? w : Reached(w) & Ham(w,v). } }",
            )
            .unwrap(),
        );
        let c = completion(&t);
        assert_eq!(c.sentences.len(), 1);
        let Kind::Forall(_, body) = &c.sentences[0].kind else { panic!() };
        let Kind::And(parts) = &body.kind else { panic!() };
        let Kind::Or(first) = &parts[0].kind else { panic!() };
        assert_eq!(first.len(), 3);
    }

    #[test]
    fn polarity_examples() {
        let t = parse_theory("vocab { pred P/0. pred Q/0. } theory { ~P | Q. ~~P. }").unwrap();
        let s0 = &t.sentences[0];
        assert_eq!(polarity(&t, s0.id), Ok(Polarity::Positive));
        let p_occ = s0.children()[0].children()[0].id;
        assert_eq!(polarity(&t, p_occ), Ok(Polarity::Negative));
        let s1 = &t.sentences[1];
        let inner = s1.children()[0].children()[0].id;
        assert_eq!(polarity(&t, inner), Ok(Polarity::Positive));
        assert_eq!(polarity(&t, 999), Err(LogicError::UnknownOccurrence(999)));
    }
}
