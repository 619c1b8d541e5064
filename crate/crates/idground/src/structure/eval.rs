use super::{EvalError, FiniteStructure, Interp, Tv};
use crate::logic::{Formula, Kind, Term, Var};

/// A partial map from variables to domain elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(Vec<Option<u32>>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(Var, u32)]) -> Self {
        let mut a = Self::new();
        for (v, d) in pairs {
            a.set(*v, Some(*d));
        }
        a
    }

    pub fn get(&self, v: Var) -> Option<u32> {
        self.0.get(v.0 as usize).copied().flatten()
    }

    /// Sets `v` and returns its previous value.
    pub fn set(&mut self, v: Var, d: Option<u32>) -> Option<u32> {
        let i = v.0 as usize;
        if i >= self.0.len() {
            self.0.resize(i + 1, None);
        }
        std::mem::replace(&mut self.0[i], d)
    }
}

fn term<I: Interp + ?Sized>(t: &Term, s: &I, a: &Assignment) -> Result<u32, EvalError> {
    match t {
        Term::Var(v) => a.get(*v).ok_or(EvalError::Unassigned(*v)),
        Term::App(f, args) => {
            let vals = args.iter().map(|x| term(x, s, a)).collect::<Result<Vec<_>, _>>()?;
            s.func(*f, &vals).ok_or_else(|| EvalError::Uninterpreted(s.vocab().name(*f).to_string()))
        }
    }
}

/// Two-valued satisfaction.
pub fn evaluate(f: &Formula, s: &FiniteStructure, a: &Assignment) -> Result<bool, EvalError> {
    let mut a = a.clone();
    eval2(f, s, &mut a)
}

fn eval2(f: &Formula, s: &FiniteStructure, a: &mut Assignment) -> Result<bool, EvalError> {
    Ok(match &f.kind {
        Kind::True => true,
        Kind::False => false,
        Kind::Atom(p, args) => {
            let vals = args.iter().map(|x| term(x, s, a)).collect::<Result<Vec<_>, _>>()?;
            s.holds(*p, &vals).ok_or_else(|| EvalError::Uninterpreted(s.vocab.name(*p).to_string()))?
        }
        Kind::Eq(x, y) => term(x, s, a)? == term(y, s, a)?,
        Kind::Not(g) => !eval2(g, s, a)?,
        Kind::And(fs) => {
            for g in fs {
                if !eval2(g, s, a)? {
                    return Ok(false);
                }
            }
            true
        }
        Kind::Or(fs) => {
            for g in fs {
                if eval2(g, s, a)? {
                    return Ok(true);
                }
            }
            false
        }
        Kind::Exists(v, g) | Kind::Forall(v, g) => {
            let want = matches!(f.kind, Kind::Exists(..));
            let old = a.get(*v);
            for d in 0..s.size() as u32 {
                a.set(*v, Some(d));
                let r = eval2(g, s, a);
                if !matches!(r, Ok(b) if b != want) {
                    a.set(*v, old);
                    return r;
                }
            }
            a.set(*v, old);
            !want
        }
    })
}

/// Kleene evaluation.
pub fn eval3<I: Interp + ?Sized>(f: &Formula, s: &I, a: &Assignment) -> Result<Tv, EvalError> {
    let mut a = a.clone();
    eval3_mut(f, s, &mut a)
}

pub(crate) fn eval3_mut<I: Interp + ?Sized>(f: &Formula, s: &I, a: &mut Assignment) -> Result<Tv, EvalError> {
    Ok(match &f.kind {
        Kind::True => Tv::T,
        Kind::False => Tv::F,
        Kind::Atom(p, args) => {
            let vals = args.iter().map(|x| term(x, s, a)).collect::<Result<Vec<_>, _>>()?;
            s.pred3(*p, &vals).ok_or_else(|| EvalError::Uninterpreted(s.vocab().name(*p).to_string()))?
        }
        Kind::Eq(x, y) => Tv::from_bool(term(x, s, a)? == term(y, s, a)?),
        Kind::Not(g) => eval3_mut(g, s, a)?.not(),
        Kind::And(fs) => {
            let mut acc = Tv::T;
            for g in fs {
                acc = acc.min(eval3_mut(g, s, a)?);
                if acc == Tv::F {
                    break;
                }
            }
            acc
        }
        Kind::Or(fs) => {
            let mut acc = Tv::F;
            for g in fs {
                acc = acc.max(eval3_mut(g, s, a)?);
                if acc == Tv::T {
                    break;
                }
            }
            acc
        }
        Kind::Exists(v, g) | Kind::Forall(v, g) => {
            let exists = matches!(f.kind, Kind::Exists(..));
            let (mut acc, stop) = if exists { (Tv::F, Tv::T) } else { (Tv::T, Tv::F) };
            let old = a.get(*v);
            for d in 0..s.domain_size() as u32 {
                a.set(*v, Some(d));
                let r = match eval3_mut(g, s, a) {
                    Ok(r) => r,
                    Err(e) => {
                        a.set(*v, old);
                        return Err(e);
                    }
                };
                acc = if exists { acc.max(r) } else { acc.min(r) };
                if acc == stop {
                    break;
                }
            }
            a.set(*v, old);
            acc
        }
    })
}

/// `{x̄ | φ}`: tuples over `vars` satisfying `f`, in domain order.
pub fn answers(vars: &[Var], f: &Formula, s: &FiniteStructure) -> Result<Vec<Vec<u32>>, EvalError> {
    if let Some(v) = f.free_vars().into_iter().find(|v| !vars.contains(v)) {
        return Err(EvalError::Unassigned(v));
    }
    let mut out = Vec::new();
    let mut a = Assignment::new();
    for t in super::all_tuples(vars.len(), s.size()) {
        for (v, d) in vars.iter().zip(&t) {
            a.set(*v, Some(*d));
        }
        if eval2(f, s, &mut a)? {
            out.push(t);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_formula;
    use crate::logic::{VarPool, Vocabulary};
    use crate::structure::ThreeValued;

    fn setup() -> (FiniteStructure, VarPool) {
        let mut v = Vocabulary::new();
        let p = v.add_pred("P", 1).unwrap();
        let q = v.add_pred("Q", 2).unwrap();
        let e = v.add_pred("Edge", 2).unwrap();
        let mut s = FiniteStructure::new(v, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        s.set_pred(p, vec![vec![1]]);
        s.set_pred(q, vec![vec![1, 1]]);
        s.set_pred(e, vec![vec![0, 1], vec![1, 2]]);
        (s, VarPool::new())
    }

    #[test]
    fn conjunction_with_assignment() {
        let (s, mut vars) = setup();
        let f = parse_formula("? x y : P(x) & Q(x,y)", &s.vocab, &mut vars).unwrap();
        let Kind::Exists(x, inner) = &f.kind else { panic!() };
        let Kind::Exists(y, body) = &inner.kind else { panic!() };
        let a = Assignment::from_pairs(&[(*x, 1), (*y, 1)]);
        assert_eq!(evaluate(body, &s, &a), Ok(true));
        let a = Assignment::from_pairs(&[(*x, 0), (*y, 1)]);
        assert_eq!(evaluate(body, &s, &a), Ok(false));
        assert_eq!(evaluate(body, &s, &Assignment::new()), Err(EvalError::Unassigned(*x)));
    }

    #[test]
    fn reflexive_equality() {
        let (s, mut vars) = setup();
        let f = parse_formula("! x : x = x", &s.vocab, &mut vars).unwrap();
        assert_eq!(evaluate(&f, &s, &Assignment::new()), Ok(true));
    }

    #[test]
    fn uninterpreted_symbol() {
        let (mut s, mut vars) = setup();
        let mut v = s.vocab.clone();
        v.add_pred("R", 0).unwrap();
        s.extend_vocab(v);
        let f = parse_formula("R", &s.vocab, &mut vars).unwrap();
        assert_eq!(evaluate(&f, &s, &Assignment::new()), Err(EvalError::Uninterpreted("R".into())));
    }

    #[test]
    fn answer_sets() {
        let (s, mut vars) = setup();
        let f = parse_formula("Edge(x, y)", &s.vocab, &mut vars);
        assert!(f.is_err());
        let f = parse_formula("! x y : Edge(x, y)", &s.vocab, &mut vars).unwrap();
        let Kind::Forall(x, inner) = &f.kind else { panic!() };
        let Kind::Forall(y, body) = &inner.kind else { panic!() };
        let e = s.vocab.lookup("Edge").unwrap();
        assert_eq!(answers(&[*x, *y], body, &s).unwrap(), s.tuples(e));

        let f = parse_formula("! x : ? y : Edge(x, y)", &s.vocab, &mut vars).unwrap();
        let Kind::Forall(x, body) = &f.kind else { panic!() };
        assert_eq!(answers(&[*x], body, &s).unwrap(), vec![vec![0], vec![1]]);
        assert_eq!(answers(&[*x], &Formula::bot(), &s).unwrap(), Vec::<Vec<u32>>::new());
        assert!(answers(&[], body, &s).is_err());
    }

    #[test]
    fn kleene_connectives() {
        let mut v = Vocabulary::new();
        let p = v.add_pred("P", 1).unwrap();
        let u = v.add_pred("U", 0).unwrap();
        let t = v.add_pred("T", 0).unwrap();
        let f = v.add_pred("F", 0).unwrap();
        let mut s = FiniteStructure::new(v, vec!["a".into(), "b".into()]).unwrap();
        s.set_pred(p, vec![vec![0], vec![1]]);
        s.set_pred(t, vec![vec![]]);
        s.clear_pred(f);
        s.clear_pred(u);
        let mut s3 = ThreeValued::from_two(&s);
        s3.set_unknown(u);
        s3.set(p, &[1], Tv::U);
        let mut vars = VarPool::new();
        let vocab = s.vocab.clone();
        let mut check = |text: &str, want: Tv| {
            let g = parse_formula(text, &vocab, &mut vars).unwrap();
            assert_eq!(eval3(&g, &s3, &Assignment::new()), Ok(want), "{text}");
        };
        check("U | T", Tv::T);
        check("U & F", Tv::F);
        check("! x : P(x)", Tv::U);
        check("? x : P(x)", Tv::T);
        check("~U", Tv::U);
        check("U | F", Tv::U);
    }
}
