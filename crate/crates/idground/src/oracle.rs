//! Brute-force model enumeration, used as ground truth in tests.
//!
//! Every interpretation of the expansion symbols is tried, so instances must
//! stay tiny. Predicates range over all subsets of their tuples and
//! functions over all total maps.

use crate::ground::GroundTheory;
use crate::logic::{SymId, Theory, Vocabulary};
use crate::structure::{evaluate, tuple_count, Assignment, EvalError, FiniteStructure};
use crate::wfs::satisfies_definition;

/// Configurations tried before the oracle refuses an instance.
pub const DEFAULT_CAP: u64 = 1 << 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space exceeds the cap of {cap} configurations")]
    CapExceeded { cap: u64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub enum Equivalence {
    Equivalent,
    /// An expansion of the input structure on which the theory and the grounding disagree.
    Counterexample(FiniteStructure),
}

/// One cell per predicate tuple or function argument tuple.
struct Cells {
    syms: Vec<(SymId, bool, usize)>,
    digits: Vec<u32>,
    radix: Vec<u32>,
}

impl Cells {
    fn new(vocab: &Vocabulary, syms: &[SymId], n: usize, cap: u64) -> Result<Self, OracleError> {
        let mut out = Cells { syms: Vec::new(), digits: Vec::new(), radix: Vec::new() };
        let mut space: u64 = 1;
        for &p in syms {
            let cells = tuple_count(vocab.arity(p), n);
            let func = vocab.is_func(p);
            let r = if func { n as u32 } else { 2 };
            for _ in 0..cells {
                space = space.checked_mul(r as u64).filter(|s| *s <= cap).ok_or(OracleError::CapExceeded { cap })?;
            }
            out.syms.push((p, func, cells));
            out.digits.extend(std::iter::repeat(0).take(cells));
            out.radix.extend(std::iter::repeat(r).take(cells));
        }
        Ok(out)
    }

    fn write(&self, m: &mut FiniteStructure) {
        let mut at = 0;
        for &(p, func, cells) in &self.syms {
            let ds = &self.digits[at..at + cells];
            if func {
                m.set_func(p, ds.to_vec());
            } else {
                m.set_pred_bits(p, ds.iter().map(|d| *d == 1).collect());
            }
            at += cells;
        }
    }

    /// Advances to the next configuration; false after the last one.
    fn step(&mut self) -> bool {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.radix[i] {
                return true;
            }
            self.digits[i] = 0;
        }
        false
    }
}

/// Calls `visit` on every expansion of `base` over `syms` until it returns false.
fn for_each_expansion(
    base: &FiniteStructure,
    syms: &[SymId],
    cap: u64,
    visit: &mut dyn FnMut(&mut FiniteStructure) -> Result<bool, OracleError>,
) -> Result<(), OracleError> {
    let mut cells = Cells::new(&base.vocab, syms, base.size(), cap)?;
    let mut m = base.clone();
    loop {
        cells.write(&mut m);
        if !visit(&mut m)? {
            return Ok(());
        }
        if !cells.step() {
            return Ok(());
        }
    }
}

fn base_for(vocab: &Vocabulary, s: &FiniteStructure) -> FiniteStructure {
    let mut m = s.clone();
    m.extend_vocab(vocab.clone());
    m
}

/// Whether `m` satisfies every sentence and every definition of `t`.
pub fn satisfies(t: &Theory, m: &FiniteStructure) -> Result<bool, EvalError> {
    for f in &t.sentences {
        if !evaluate(f, m, &Assignment::new())? {
            return Ok(false);
        }
    }
    Ok(t.definitions.iter().all(|d| satisfies_definition(m, d)))
}

/// All models of `t` expanding `s`, in enumeration order.
pub fn enumerate_expansions(t: &Theory, s: &FiniteStructure, cap: u64) -> Result<Vec<FiniteStructure>, OracleError> {
    let mut out = Vec::new();
    for_each_expansion(&base_for(&t.vocab, s), &t.vocab.expansion(), cap, &mut |m| {
        if satisfies(t, m)? {
            out.push(m.clone());
        }
        Ok(true)
    })?;
    Ok(out)
}

/// All models of `g` expanding `s`; the atom universe is every tuple of
/// every non-input symbol of `g`'s vocabulary.
pub fn models_of_grounding(g: &GroundTheory, s: &FiniteStructure, cap: u64) -> Result<Vec<FiniteStructure>, OracleError> {
    let mut out = Vec::new();
    for_each_expansion(&base_for(&g.vocab, s), &g.vocab.expansion(), cap, &mut |m| {
        if g.holds(m)? {
            out.push(m.clone());
        }
        Ok(true)
    })?;
    Ok(out)
}

/// Compares the expansions of `s` satisfying `t` with those that extend to a
/// model of `g`. Symbols `g` adds beyond `t`'s vocabulary are projected away.
pub fn check_isigma_equivalence(t: &Theory, g: &GroundTheory, s: &FiniteStructure, cap: u64) -> Result<Equivalence, OracleError> {
    let extra: Vec<SymId> = g.vocab.ids().filter(|p| p.0 as usize >= t.vocab.len()).collect();
    // Fail early if the combined space is too large.
    let outer = Cells::new(&t.vocab, &t.vocab.expansion(), s.size(), cap)?;
    let outer_space: u64 = outer.radix.iter().map(|r| *r as u64).product();
    Cells::new(&g.vocab, &extra, s.size(), cap / outer_space.max(1))?;

    let mut found = None;
    for_each_expansion(&base_for(&g.vocab, s), &t.vocab.expansion(), cap, &mut |m| {
        let want = satisfies(t, m)?;
        let mut got = false;
        for_each_expansion(&m.clone(), &extra, cap, &mut |m2| {
            got = g.holds(m2)?;
            Ok(!got)
        })?;
        if want != got {
            found = Some(m.restrict(|p| (p.0 as usize) < t.vocab.len()));
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(match found {
        Some(m) => Equivalence::Counterexample(m),
        None => Equivalence::Equivalent,
    })
}
