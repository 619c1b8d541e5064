//! Term normal form: negations only in front of atoms, atoms of the shape
//! `P(x̄)`, `F(x̄) = y` or `x = y`.

use std::collections::HashMap;

use super::{Formula, Kind, Term, Theory, Var, VarPool};

/// Converts every sentence and rule body to TNF.
///
/// Nested terms are flattened innermost-first, left-to-right, with fresh
/// variables from the reserved namespace. Rules of one predicate are renamed
/// to share the head variables of its first rule.
pub fn to_tnf(t: &Theory) -> Theory {
    let mut out = t.clone();
    let mut vars = std::mem::take(&mut out.vars);
    for s in &mut out.sentences {
        *s = formula_to_tnf(s, &mut vars);
    }
    for d in &mut out.definitions {
        for r in &mut d.rules {
            r.body = formula_to_tnf(&r.body, &mut vars);
        }
    }
    out.vars = vars;
    canonicalize_heads(&mut out);
    out.renumber();
    out
}

/// TNF of a single formula; occurrence identifiers are reset to zero.
pub fn formula_to_tnf(f: &Formula, vars: &mut VarPool) -> Formula {
    simplify(&nnf(&flatten(f, vars), false))
}

/// Gives all rules of a predicate the head variables of its first rule.
pub fn canonicalize_heads(t: &mut Theory) {
    for d in &mut t.definitions {
        let mut canon: HashMap<super::SymId, Vec<Var>> = HashMap::new();
        for r in &mut d.rules {
            match canon.get(&r.head) {
                None => {
                    canon.insert(r.head, r.head_vars.clone());
                }
                Some(hv) => {
                    if *hv != r.head_vars {
                        let map: HashMap<Var, Var> =
                            r.head_vars.iter().copied().zip(hv.iter().copied()).collect();
                        r.body = r.body.subst_vars(&map);
                        r.head_vars = hv.clone();
                    }
                }
            }
        }
    }
}

fn flatten(f: &Formula, vars: &mut VarPool) -> Formula {
    match &f.kind {
        Kind::True | Kind::False => f.clone(),
        Kind::Atom(p, args) => {
            let mut defs = Vec::new();
            let flat: Vec<Term> = args.iter().map(|a| Term::Var(flatten_term(a, vars, &mut defs))).collect();
            wrap(defs, Formula::atom(*p, flat))
        }
        Kind::Eq(a, b) => {
            let mut defs = Vec::new();
            let core = match (a, b) {
                (Term::Var(_), Term::Var(_)) => Formula::eq(a.clone(), b.clone()),
                (Term::App(..), Term::Var(_)) => Formula::eq(flatten_app(a, vars, &mut defs), b.clone()),
                (Term::Var(_), Term::App(..)) => Formula::eq(flatten_app(b, vars, &mut defs), a.clone()),
                (Term::App(..), Term::App(..)) => {
                    let lhs = flatten_app(a, vars, &mut defs);
                    let y = flatten_term(b, vars, &mut defs);
                    Formula::eq(lhs, Term::Var(y))
                }
            };
            wrap(defs, core)
        }
        Kind::Not(g) => Formula::not(flatten(g, vars)),
        Kind::And(fs) => Formula::and(fs.iter().map(|g| flatten(g, vars)).collect()),
        Kind::Or(fs) => Formula::or(fs.iter().map(|g| flatten(g, vars)).collect()),
        Kind::Exists(v, g) => Formula::exists(*v, flatten(g, vars)),
        Kind::Forall(v, g) => Formula::forall(*v, flatten(g, vars)),
    }
}

/// Flattens the arguments of an application, keeping the application itself.
fn flatten_app(t: &Term, vars: &mut VarPool, defs: &mut Vec<(Term, Var)>) -> Term {
    match t {
        Term::App(f, args) => {
            Term::App(*f, args.iter().map(|a| Term::Var(flatten_term(a, vars, defs))).collect())
        }
        Term::Var(_) => t.clone(),
    }
}

/// Reduces a term to a variable, recording `F(v̄) = y` definitions innermost-first.
fn flatten_term(t: &Term, vars: &mut VarPool, defs: &mut Vec<(Term, Var)>) -> Var {
    match t {
        Term::Var(v) => *v,
        Term::App(..) => {
            let app = flatten_app(t, vars, defs);
            let y = vars.fresh();
            defs.push((app, y));
            y
        }
    }
}

/// `∃y₁ (d₁ ∧ ∃y₂ (d₂ ∧ … core))`.
fn wrap(defs: Vec<(Term, Var)>, core: Formula) -> Formula {
    defs.into_iter()
        .rev()
        .fold(core, |acc, (app, y)| Formula::exists(y, Formula::and(vec![Formula::eq(app, Term::Var(y)), acc])))
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match &f.kind {
        Kind::True => {
            if neg {
                Formula::bot()
            } else {
                Formula::top()
            }
        }
        Kind::False => {
            if neg {
                Formula::top()
            } else {
                Formula::bot()
            }
        }
        Kind::Atom(..) | Kind::Eq(..) => {
            let a = Formula::new(f.kind.clone());
            if neg {
                Formula::not(a)
            } else {
                a
            }
        }
        Kind::Not(g) => nnf(g, !neg),
        Kind::And(fs) | Kind::Or(fs) => {
            let parts = fs.iter().map(|g| nnf(g, neg)).collect();
            if matches!(f.kind, Kind::And(_)) != neg {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        }
        Kind::Exists(v, g) | Kind::Forall(v, g) => {
            let body = nnf(g, neg);
            if matches!(f.kind, Kind::Exists(..)) != neg {
                Formula::exists(*v, body)
            } else {
                Formula::forall(*v, body)
            }
        }
    }
}

/// Removes constant leaves, nested connectives of the same kind and vacuous quantifiers.
pub(crate) fn simplify(f: &Formula) -> Formula {
    match &f.kind {
        Kind::And(fs) | Kind::Or(fs) => {
            let is_and = matches!(f.kind, Kind::And(_));
            let mut parts = Vec::new();
            for g in fs {
                let g = simplify(g);
                match (&g.kind, is_and) {
                    (Kind::True, true) | (Kind::False, false) => {}
                    (Kind::False, true) => return Formula::bot(),
                    (Kind::True, false) => return Formula::top(),
                    (Kind::And(inner), true) | (Kind::Or(inner), false) => parts.extend(inner.iter().cloned()),
                    _ => parts.push(g),
                }
            }
            match parts.len() {
                0 => {
                    if is_and {
                        Formula::top()
                    } else {
                        Formula::bot()
                    }
                }
                1 => parts.pop().unwrap(),
                _ => {
                    if is_and {
                        Formula::and(parts)
                    } else {
                        Formula::or(parts)
                    }
                }
            }
        }
        Kind::Exists(v, g) | Kind::Forall(v, g) => {
            let body = simplify(g);
            if matches!(body.kind, Kind::True | Kind::False) || !body.free_vars().contains(v) {
                return body;
            }
            if matches!(f.kind, Kind::Exists(..)) {
                Formula::exists(*v, body)
            } else {
                Formula::forall(*v, body)
            }
        }
        Kind::Not(g) => {
            let g = simplify(g);
            match g.kind {
                Kind::True => Formula::bot(),
                Kind::False => Formula::top(),
                Kind::Not(h) => *h,
                _ => Formula::not(g),
            }
        }
        _ => Formula::new(f.kind.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;
    use crate::logic::{parse_theory, Vocabulary};

    fn setup() -> (Vocabulary, VarPool) {
        let mut v = Vocabulary::new();
        v.add_pred("P", 1).unwrap();
        v.add_pred("Q", 1).unwrap();
        v.add_func("F", 1).unwrap();
        v.add_func("G", 1).unwrap();
        (v, VarPool::new())
    }

    #[test]
    fn de_morgan() {
        let (v, mut vars) = setup();
        let f = parse_formula("! x : ~(P(x) & Q(x))", &v, &mut vars).unwrap();
        let g = formula_to_tnf(&f, &mut vars);
        let Kind::Forall(x, _) = &f.kind else { panic!() };
        let (p, q) = (v.lookup("P").unwrap(), v.lookup("Q").unwrap());
        let expected = Formula::forall(
            *x,
            Formula::or(vec![Formula::not(Formula::atom_vars(p, &[*x])), Formula::not(Formula::atom_vars(q, &[*x]))]),
        );
        assert_eq!(g, expected);
    }

    #[test]
    fn flattening_introduces_fresh_variable() {
        let (v, mut vars) = setup();
        let f = parse_formula("! x : P(F(x))", &v, &mut vars).unwrap();
        let g = formula_to_tnf(&f, &mut vars);
        let Kind::Forall(x, body) = &g.kind else { panic!() };
        let Kind::Exists(y, inner) = &body.kind else { panic!("{body:?}") };
        assert_ne!(x, y);
        assert!(vars.name(*y).starts_with("_v"));
        let fid = v.lookup("F").unwrap();
        let pid = v.lookup("P").unwrap();
        let expected = Formula::and(vec![
            Formula::eq(Term::App(fid, vec![Term::Var(*x)]), Term::Var(*y)),
            Formula::atom_vars(pid, &[*y]),
        ]);
        assert_eq!(**inner, expected);
        assert!(g.is_tnf());
    }

    #[test]
    fn innermost_first_left_to_right() {
        let (v, mut vars) = setup();
        let f = parse_formula("! x : F(G(x)) = x", &v, &mut vars).unwrap();
        let g = formula_to_tnf(&f, &mut vars);
        assert!(g.is_tnf());
        let Kind::Forall(_, body) = &g.kind else { panic!() };
        let Kind::Exists(y, inner) = &body.kind else { panic!() };
        let Kind::And(parts) = &inner.kind else { panic!() };
        // G(x) = y is introduced first, then F(y) = x.
        let gid = v.lookup("G").unwrap();
        assert!(matches!(&parts[0].kind, Kind::Eq(Term::App(s, _), Term::Var(w)) if *s == gid && w == y));
    }

    #[test]
    fn tnf_input_is_unchanged() {
        let (v, mut vars) = setup();
        let f = parse_formula("! x : ~P(x) | Q(x)", &v, &mut vars).unwrap();
        assert!(f.is_tnf());
        assert_eq!(formula_to_tnf(&f, &mut vars), f);
    }

    #[test]
    fn idempotent_and_unique_ids() {
        let t = parse_theory(
            "vocab { pred P/1. pred R/2. func F/1. func C/0. } input { R }
             theory { ! x : ~(P(F(x)) => R(x, C)) | (? y : F(y) = F(x)).
                      define { P(x) <- ~R(x,x). P(z) <- P(F(z)). } }",
        )
        .unwrap();
        let once = to_tnf(&t);
        assert!(once.is_tnf());
        once.validate().unwrap();
        let twice = to_tnf(&once);
        assert_eq!(once.to_text(), twice.to_text());
        let d = &once.definitions[0];
        assert_eq!(d.rules[0].head_vars, d.rules[1].head_vars);
    }
}
