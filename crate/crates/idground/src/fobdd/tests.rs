use super::*;
use crate::logic::parse::parse_formula;
use crate::logic::{Formula, Kind};
use crate::structure::{answers, evaluate, Assignment, FiniteStructure};
use proptest::prelude::*;

struct Fx {
    vocab: Vocabulary,
    vars: VarPool,
    m: Manager,
}

impl Fx {
    fn new() -> Self {
        let mut vocab = Vocabulary::new();
        vocab.add_pred("P", 1).unwrap();
        vocab.add_pred("Q", 2).unwrap();
        vocab.add_pred("R", 1).unwrap();
        vocab.add_func("F", 1).unwrap();
        Fx { vocab, vars: VarPool::new(), m: Manager::new() }
    }

    fn sym(&self, name: &str) -> SymId {
        self.vocab.lookup(name).unwrap()
    }

    /// Parses `! v̄ : body` and returns the variables and the body.
    fn open(&mut self, text: &str) -> (Vec<Var>, Formula) {
        let mut f = parse_formula(text, &self.vocab, &mut self.vars).unwrap();
        let mut vs = Vec::new();
        while let Kind::Forall(v, g) = f.kind {
            vs.push(v);
            f = *g;
        }
        (vs, f)
    }

    fn structure(&self) -> FiniteStructure {
        let mut s = FiniteStructure::new(self.vocab.clone(), vec!["a".into(), "b".into()]).unwrap();
        s.set_pred(self.sym("P"), vec![vec![1]]);
        s.clear_pred(self.sym("R"));
        s.set_pred(self.sym("Q"), vec![vec![1, 1]]);
        s.set_func(self.sym("F"), vec![1, 0]);
        s
    }
}

#[test]
fn case_split_diagram() {
    let mut fx = Fx::new();
    let (_, f) = fx.open("! x y : (P(x) & Q(x,y)) | (~P(x) & R(x))");
    let b = fx.m.build(&f);
    assert_eq!(fx.m.node_count(b), 3);
    let (k, hi, lo) = fx.m.node(b).unwrap();
    assert!(matches!(k, Kernel::Pred(p, _) if *p == fx.sym("P")));
    let (kh, hh, hl) = fx.m.node(hi).unwrap();
    assert!(matches!(kh, Kernel::Pred(q, _) if *q == fx.sym("Q")));
    assert!(fx.m.is_top(hh) && fx.m.is_bot(hl));
    let (kl, lh, ll) = fx.m.node(lo).unwrap();
    assert!(matches!(kl, Kernel::Pred(r, _) if *r == fx.sym("R")));
    assert!(fx.m.is_top(lh) && fx.m.is_bot(ll));
    assert!(fx.m.is_reduced(b));
    let dump = fx.m.dump(b, &fx.vocab, &fx.vars);
    assert!(dump.starts_with("P(x)\n"), "{dump}");
}

#[test]
fn example_query() {
    let mut fx = Fx::new();
    let (vs, f) = fx.open("! x y : (P(x) & Q(x,y)) | (~P(x) & R(x))");
    let b = fx.m.build(&f);
    let s = fx.structure();
    assert_eq!(fx.m.query_all(b, &s, &vs).unwrap(), vec![vec![1, 1]]);
    assert_eq!(fx.m.query_one(b, &s, &vs).unwrap(), Some(vec![1, 1]));
    let bot = fx.m.bot();
    assert_eq!(fx.m.query_one(bot, &s, &vs).unwrap(), None);
    assert!(fx.m.query_all(bot, &s, &vs).unwrap().is_empty());
}

#[test]
fn excluded_middle_is_top() {
    let mut fx = Fx::new();
    let (_, f) = fx.open("! x : P(x) | ~P(x)");
    let b = fx.m.build(&f);
    assert!(fx.m.is_top(b));
}

#[test]
fn reordered_formulas_share_handles() {
    let mut fx = Fx::new();
    let (_, f) = fx.open("! x y : (R(x) & (Q(x,y) | P(y))) | ((P(y) | Q(x,y)) & R(x))");
    let Kind::Or(parts) = &f.kind else { panic!() };
    let (b1, b2) = (fx.m.build(&parts[0]), fx.m.build(&parts[1]));
    assert_eq!(b1, b2);
}

#[test]
fn quantifier_rules() {
    let mut fx = Fx::new();
    let (vs, f) = fx.open("! x y : P(x)");
    let (x, y) = (vs[0], vs[1]);
    let b = fx.m.build(&f);
    assert_eq!(fx.m.forall(y, b), b);
    assert_eq!(fx.m.exists(y, b), b);
    // ∃y (x = y ∧ P(y)) collapses to P(x).
    let p_y = fx.m.pred(fx.sym("P"), &[y]);
    let eq = fx.m.eq(x, y);
    let conj = fx.m.and(eq, p_y);
    assert_eq!(fx.m.exists(y, conj), b);
    // Independent root tests leave the quantifier.
    let (_, g) = fx.open("! x : ? y : P(x) & Q(x,y)");
    let gb = fx.m.build(&g);
    let (k, _, lo) = fx.m.node(gb).unwrap();
    assert!(matches!(k, Kernel::Pred(p, _) if *p == fx.sym("P")));
    assert!(fx.m.is_bot(lo));
    // α-equivalent quantified formulas give one handle.
    let (_, h) = fx.open("! x : (? y : Q(x,y)) | (? z : Q(x,z))");
    let Kind::Or(parts) = &h.kind else { panic!() };
    assert_eq!(fx.m.build(&parts[0]), fx.m.build(&parts[1]));
}

#[test]
fn cross_manager_operands_are_rejected() {
    let mut fx = Fx::new();
    let other = Manager::new();
    let a = fx.m.top();
    let b = other.bot();
    assert_eq!(fx.m.combine(&Op::And, &[a, b]), Err(BddError::ForeignHandle));
    assert_eq!(fx.m.combine(&Op::Neg, &[a]), Ok(fx.m.bot()));
    assert!(matches!(fx.m.combine(&Op::Neg, &[a, a]), Err(BddError::Operands(..))));
}

#[test]
fn rename_must_be_injective() {
    let mut fx = Fx::new();
    let (vs, f) = fx.open("! x y : Q(x,y)");
    let b = fx.m.build(&f);
    let map: HashMap<Var, Var> = [(vs[1], vs[0])].into_iter().collect();
    assert_eq!(fx.m.combine(&Op::Rename(map.clone()), &[b]), Err(BddError::NotInjective));
    let collapsed = fx.m.subst(b, &map);
    assert_eq!(fx.m.free_vars(collapsed), vec![vs[0]]);
}

#[test]
fn functions_are_flattened() {
    let mut fx = Fx::new();
    let (vs, f) = fx.open("! x : P(F(F(x))) | F(x) = x");
    let b = fx.m.build(&f);
    let s = fx.structure();
    assert_eq!(fx.m.query_all(b, &s, &vs).unwrap(), answers(&vs, &f, &s).unwrap());
    assert_eq!(fx.m.free_vars(b), vs);
}

#[test]
fn simplify_substitutes_equalities() {
    let mut fx = Fx::new();
    let (vs, f) = fx.open("! x y : x = y & Q(x,y) & P(y)");
    let b = fx.m.build(&f);
    let sb = fx.m.simplify(b);
    assert!(fx.m.node_count(sb) <= fx.m.node_count(b));
    let mut seen_y = false;
    fx.m.walk(sb.id, &mut |k| {
        if let Kernel::Pred(_, args) = k {
            seen_y |= args.contains(&BVar::Free(vs[1]));
        }
    });
    assert!(!seen_y, "{}", fx.m.dump(sb, &fx.vocab, &fx.vars));
    let s = fx.structure();
    assert_eq!(fx.m.query_all(sb, &s, &vs).unwrap(), fx.m.query_all(b, &s, &vs).unwrap());
}

#[test]
fn estimates() {
    let mut fx = Fx::new();
    let (vs, f) = fx.open("! x y : P(x)");
    let s = fx.structure();
    let top = fx.m.top();
    let e = fx.m.estimate(top, &s, &vs);
    assert_eq!(e.reward, 4.0);
    assert_eq!(e.cost, 1.0);
    let bot = fx.m.bot();
    let e = fx.m.estimate(bot, &s, &vs);
    assert_eq!((e.cost, e.reward, e.ratio), (1.0, 0.0, 1.0));
    let b = fx.m.build(&f);
    let e = fx.m.estimate(b, &s, &vs[..1]);
    assert_eq!(e.reward, 1.0);
    assert!(e.ratio <= 1.0);
}

#[test]
fn round_trip_through_formulas() {
    let mut fx = Fx::new();
    let (_, f) = fx.open("! x : (? y : Q(x,y) & ~(? z : Q(y,z) & R(z))) | P(F(x))");
    let b = fx.m.build(&f);
    let g = fx.m.to_formula(b, &mut fx.vars);
    assert_eq!(fx.m.build(&g), b);
}

// ---- randomized checks ----

fn leaf() -> impl Strategy<Value = (u8, u8, u8)> {
    (0u8..5, 0u8..3, 0u8..3)
}

#[derive(Clone, Debug)]
enum Shape {
    Leaf(u8, u8, u8),
    Not(Box<Shape>),
    And(Box<Shape>, Box<Shape>),
    Or(Box<Shape>, Box<Shape>),
    Ex(u8, Box<Shape>),
    All(u8, Box<Shape>),
}

fn shape() -> impl Strategy<Value = Shape> {
    leaf().prop_map(|(a, b, c)| Shape::Leaf(a, b, c)).prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| Shape::Not(Box::new(s))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Or(Box::new(a), Box::new(b))),
            (0u8..3, inner.clone()).prop_map(|(v, s)| Shape::Ex(v, Box::new(s))),
            (0u8..3, inner).prop_map(|(v, s)| Shape::All(v, Box::new(s))),
        ]
    })
}

fn to_formula(fx: &Fx, vs: &[Var], s: &Shape) -> Formula {
    use crate::logic::Term;
    match s {
        Shape::Leaf(k, a, b) => {
            let (a, b) = (vs[*a as usize], vs[*b as usize]);
            match k {
                0 => Formula::atom_vars(fx.sym("P"), &[a]),
                1 => Formula::atom_vars(fx.sym("Q"), &[a, b]),
                2 => Formula::atom_vars(fx.sym("R"), &[a]),
                3 => Formula::eq(Term::Var(a), Term::Var(b)),
                _ => Formula::eq(Term::App(fx.sym("F"), vec![Term::Var(a)]), Term::Var(b)),
            }
        }
        Shape::Not(g) => Formula::not(to_formula(fx, vs, g)),
        Shape::And(a, b) => Formula::and(vec![to_formula(fx, vs, a), to_formula(fx, vs, b)]),
        Shape::Or(a, b) => Formula::or(vec![to_formula(fx, vs, a), to_formula(fx, vs, b)]),
        Shape::Ex(v, g) => Formula::exists(vs[*v as usize], to_formula(fx, vs, g)),
        Shape::All(v, g) => Formula::forall(vs[*v as usize], to_formula(fx, vs, g)),
    }
}

fn random_structure(fx: &Fx, bits: &[bool], n: usize) -> FiniteStructure {
    let mut s = FiniteStructure::with_size(fx.vocab.clone(), n);
    let mut it = bits.iter().cycle();
    for name in ["P", "Q", "R"] {
        let p = fx.sym(name);
        let len = n.pow(fx.vocab.arity(p) as u32);
        s.set_pred_bits(p, (0..len).map(|_| *it.next().unwrap()).collect());
    }
    let f: Vec<u32> = (0..n).map(|i| (i as u32 * 7 + bits.len() as u32) % n as u32).collect();
    s.set_func(fx.sym("F"), f);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diagrams_agree_with_formulas(sh in shape(), bits in prop::collection::vec(any::<bool>(), 1..20), n in 1usize..4) {
        let mut fx = Fx::new();
        let vs = vec![fx.vars.named("x"), fx.vars.named("y"), fx.vars.named("z")];
        let f = to_formula(&fx, &vs, &sh);
        let b = fx.m.build(&f);
        prop_assert!(fx.m.is_reduced(b));
        let s = random_structure(&fx, &bits, n);
        let want = answers(&vs, &f, &s).unwrap();
        prop_assert_eq!(fx.m.query_all(b, &s, &vs).unwrap(), want.clone());
        for t in crate::structure::all_tuples(3, n) {
            let a = Assignment::from_pairs(&[(vs[0], t[0]), (vs[1], t[1]), (vs[2], t[2])]);
            prop_assert_eq!(fx.m.holds(b, &s, &a).unwrap(), evaluate(&f, &s, &a).unwrap());
        }
        let sb = fx.m.simplify(b);
        prop_assert!(fx.m.node_count(sb) <= fx.m.node_count(b));
        prop_assert_eq!(fx.m.query_all(sb, &s, &vs).unwrap(), want);
        let g = fx.m.to_formula(b, &mut fx.vars);
        prop_assert_eq!(fx.m.build(&g), b);
        let fa = fx.m.forall(vs[0], b);
        let fg = fx.m.build(&Formula::forall(vs[0], g));
        prop_assert_eq!(fa, fg);
    }
}
