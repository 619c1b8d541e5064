//! Random small theories and structures for differential testing.
//!
//! Instances are sized so that brute-force enumeration of all expansions
//! stays within a configurable budget.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::{Definition, Formula, Rule, SymId, Term, Theory, Var, VarPool, Vocabulary};
use crate::structure::{tuple_count, FiniteStructure};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_domain: usize,
    /// Expansion predicates per instance.
    pub max_expansion: usize,
    pub max_arity: usize,
    pub max_definitions: usize,
    pub max_sentences: usize,
    pub depth: usize,
    /// Allow one unary expansion function.
    pub functions: bool,
    /// Upper bound on the number of expansions of the input structure.
    pub max_configurations: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_domain: 3,
            max_expansion: 3,
            max_arity: 2,
            max_definitions: 1,
            max_sentences: 2,
            depth: 3,
            functions: true,
            max_configurations: 1 << 11,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub theory: Theory,
    pub structure: FiniteStructure,
}

/// Random formulas over a fixed set of symbols.
pub struct FormulaGen<'a> {
    pub vocab: &'a Vocabulary,
    pub preds: Vec<SymId>,
    pub funcs: Vec<SymId>,
    pub equality: bool,
}

impl<'a> FormulaGen<'a> {
    /// Uses every symbol of `vocab`.
    pub fn new(vocab: &'a Vocabulary) -> Self {
        let (funcs, preds) = vocab.ids().partition(|s| vocab.is_func(*s));
        FormulaGen { vocab, preds, funcs, equality: true }
    }

    fn leaf<R: Rng>(&self, rng: &mut R, scope: &[Var]) -> Formula {
        let pick = |rng: &mut R| Term::Var(*scope.choose(rng).unwrap());
        if !scope.is_empty() {
            let roll = rng.gen_range(0..10);
            if roll == 0 && self.equality {
                return Formula::eq(pick(rng), pick(rng));
            }
            if roll == 1 && !self.funcs.is_empty() {
                let f = *self.funcs.choose(rng).unwrap();
                let args = (0..self.vocab.arity(f)).map(|_| pick(rng)).collect();
                return Formula::eq(Term::App(f, args), pick(rng));
            }
        }
        let usable: Vec<SymId> = self.preds.iter().copied().filter(|p| !scope.is_empty() || self.vocab.arity(*p) == 0).collect();
        match usable.choose(rng) {
            Some(p) if rng.gen_range(0..12) > 0 => Formula::atom(*p, (0..self.vocab.arity(*p)).map(|_| pick(rng)).collect()),
            _ => {
                if rng.gen_bool(0.5) {
                    Formula::top()
                } else {
                    Formula::bot()
                }
            }
        }
    }

    /// A formula whose free variables are among `scope`.
    pub fn formula<R: Rng>(&self, rng: &mut R, vars: &mut VarPool, scope: &mut Vec<Var>, depth: usize) -> Formula {
        if depth == 0 || rng.gen_range(0..10) < 2 {
            return self.leaf(rng, scope);
        }
        match rng.gen_range(0..9) {
            0 => Formula::not(self.formula(rng, vars, scope, depth - 1)),
            1 | 2 => Formula::and(vec![self.formula(rng, vars, scope, depth - 1), self.formula(rng, vars, scope, depth - 1)]),
            3 | 4 => Formula::or(vec![self.formula(rng, vars, scope, depth - 1), self.formula(rng, vars, scope, depth - 1)]),
            5 => Formula::implies(self.formula(rng, vars, scope, depth - 1), self.formula(rng, vars, scope, depth - 1)),
            k => {
                let v = vars.named("x");
                scope.push(v);
                let body = self.formula(rng, vars, scope, depth - 1);
                scope.pop();
                if k == 6 {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
        }
    }

    /// A sentence, usually starting with a quantifier.
    pub fn sentence<R: Rng>(&self, rng: &mut R, vars: &mut VarPool, depth: usize) -> Formula {
        let mut scope = Vec::new();
        if depth > 0 && rng.gen_bool(0.7) {
            let v = vars.named("x");
            scope.push(v);
            let body = self.formula(rng, vars, &mut scope, depth - 1);
            return Formula::forall(v, body);
        }
        self.formula(rng, vars, &mut scope, depth)
    }

    /// One or two rules for each predicate of `heads`.
    pub fn definition<R: Rng>(&self, rng: &mut R, vars: &mut VarPool, heads: &[SymId], depth: usize) -> Definition {
        let mut d = Definition::default();
        for &p in heads {
            for _ in 0..rng.gen_range(1..=2) {
                let head_vars: Vec<Var> = (0..self.vocab.arity(p)).map(|_| vars.named("y")).collect();
                let mut scope = head_vars.clone();
                let body = self.formula(rng, vars, &mut scope, depth);
                d.rules.push(Rule { head: p, head_vars, body });
            }
        }
        d
    }
}

/// Interprets every input symbol of `vocab` randomly over `n` elements.
pub fn random_input<R: Rng>(rng: &mut R, vocab: &Vocabulary, n: usize, density: f64) -> FiniteStructure {
    let mut s = FiniteStructure::with_size(vocab.clone(), n);
    for p in vocab.input().iter().copied() {
        let count = tuple_count(vocab.arity(p), n);
        if vocab.is_func(p) {
            s.set_func(p, (0..count).map(|_| rng.gen_range(0..n as u32)).collect());
        } else {
            s.set_pred_bits(p, (0..count).map(|_| rng.gen_bool(density)).collect());
        }
    }
    s
}

/// Number of expansions of an `n`-element input structure over the expansion symbols.
pub fn expansion_space(vocab: &Vocabulary, n: usize) -> Option<u64> {
    let mut space: u64 = 1;
    for p in vocab.expansion() {
        let cells = tuple_count(vocab.arity(p), n) as u32;
        let base: u64 = if vocab.is_func(p) { n as u64 } else { 2 };
        space = space.checked_mul(base.checked_pow(cells)?)?;
    }
    Some(space)
}

/// A random theory over input symbols `E/2`, `U/1` and a few expansion
/// symbols, together with a random input structure.
pub fn instance<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Instance {
    loop {
        let n = rng.gen_range(1..=cfg.max_domain);
        let mut vocab = Vocabulary::new();
        let e = vocab.add_pred("E", 2).unwrap();
        let u = vocab.add_pred("U", 1).unwrap();
        vocab.set_input(e);
        vocab.set_input(u);
        let k = rng.gen_range(1..=cfg.max_expansion);
        let mut expansion = Vec::new();
        for i in 0..k {
            expansion.push(vocab.add_pred(&format!("P{i}"), rng.gen_range(0..=cfg.max_arity)).unwrap());
        }
        if cfg.functions && rng.gen_bool(0.2) {
            vocab.add_func("F", 1).unwrap();
        }
        if expansion_space(&vocab, n).map_or(true, |s| s > cfg.max_configurations) {
            continue;
        }

        let mut t = Theory::new(vocab.clone());
        let gen = FormulaGen::new(&vocab);
        let defs = rng.gen_range(0..=cfg.max_definitions);
        let mut free: Vec<SymId> = expansion.clone();
        free.shuffle(rng);
        for _ in 0..defs {
            let take = rng.gen_range(1..=2).min(free.len());
            let heads: Vec<SymId> = free.drain(..take).collect();
            if heads.is_empty() {
                break;
            }
            let d = gen.definition(rng, &mut t.vars, &heads, cfg.depth.saturating_sub(1));
            t.definitions.push(d);
        }
        for _ in 0..rng.gen_range(1..=cfg.max_sentences) {
            let f = gen.sentence(rng, &mut t.vars, cfg.depth);
            t.sentences.push(f);
        }
        t.renumber();
        if t.validate().is_err() {
            continue;
        }
        let density = rng.gen_range(0.2..0.7);
        let structure = random_input(rng, &vocab, n, density);
        return Instance { theory: t, structure };
    }
}

/// Every structure over `vocab` with `n` elements, interpreting all
/// predicate symbols; functions are not supported.
pub fn all_structures(vocab: &Vocabulary, n: usize) -> Vec<FiniteStructure> {
    let preds: Vec<SymId> = vocab.ids().collect();
    assert!(preds.iter().all(|p| !vocab.is_func(*p)), "functions are not enumerated");
    let sizes: Vec<usize> = preds.iter().map(|p| tuple_count(vocab.arity(*p), n)).collect();
    let bits: usize = sizes.iter().sum();
    let mut out = Vec::new();
    for code in 0u64..(1 << bits) {
        let mut s = FiniteStructure::with_size(vocab.clone(), n);
        let mut at = 0;
        for (p, size) in preds.iter().zip(&sizes) {
            s.set_pred_bits(*p, (0..*size).map(|i| code >> (at + i) & 1 == 1).collect());
            at += size;
        }
        out.push(s);
    }
    out
}
