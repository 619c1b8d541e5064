//! Well-founded semantics for definitions.
//!
//! The fixpoint runs over an abstract [`WfState`] so the same code serves
//! first-order definitions over a structure and ground definitions.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::{Definition, Formula, Kind, LogicError, SymId, Theory};
use crate::structure::{all_tuples, eval3_mut, rank, tuple_count, Assignment, EvalError, FiniteStructure, ThreeValued, Tv};

/// Defined atoms `0..n` with their rules, plus a current three-valued valuation.
pub trait WfState {
    fn atom_count(&self) -> usize;
    /// Rule identifiers whose head is `atom`.
    fn rules_of(&self, atom: usize) -> &[usize];
    fn value(&self, atom: usize) -> Tv;
    fn assign(&mut self, atom: usize, v: Tv);
    fn body(&mut self, rule: usize) -> Tv;
}

fn best_body<S: WfState>(st: &mut S, atom: usize) -> Tv {
    let rules = st.rules_of(atom).to_vec();
    let mut acc = Tv::F;
    for r in rules {
        acc = acc.max(st.body(r));
        if acc == Tv::T {
            break;
        }
    }
    acc
}

fn unknown_atoms<S: WfState>(st: &S) -> Vec<usize> {
    (0..st.atom_count()).filter(|a| st.value(*a) == Tv::U).collect()
}

/// Derives true atoms until nothing changes.
fn derive<S: WfState>(st: &mut S) {
    loop {
        let mut changed = false;
        for a in unknown_atoms(st) {
            if best_body(st, a) == Tv::T {
                st.assign(a, Tv::T);
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// The greatest unfounded set among the unknown atoms: everything outside the
/// least set of atoms that could still be supported when the rest is false.
fn greatest_unfounded<S: WfState>(st: &mut S) -> Vec<usize> {
    let unknown = unknown_atoms(st);
    for &a in &unknown {
        st.assign(a, Tv::F);
    }
    let mut supported = BTreeSet::new();
    loop {
        let mut changed = false;
        for &a in &unknown {
            if !supported.contains(&a) && best_body(st, a) != Tv::F {
                supported.insert(a);
                st.assign(a, Tv::U);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for &a in &unknown {
        st.assign(a, Tv::U);
    }
    unknown.into_iter().filter(|a| !supported.contains(a)).collect()
}

/// Runs a terminal well-founded induction from the current valuation.
pub fn well_founded<S: WfState>(st: &mut S) {
    loop {
        derive(st);
        let u = greatest_unfounded(st);
        if u.is_empty() {
            return;
        }
        for a in u {
            st.assign(a, Tv::F);
        }
    }
}

/// A terminal induction built from randomly chosen single steps: one derived
/// atom, one singleton unfounded set, or the greatest unfounded set.
pub fn well_founded_random<S: WfState, R: Rng>(st: &mut S, rng: &mut R) {
    enum Step {
        True(usize),
        False(Vec<usize>),
    }
    loop {
        let mut steps = Vec::new();
        for a in unknown_atoms(st) {
            if best_body(st, a) == Tv::T {
                steps.push(Step::True(a));
            }
            st.assign(a, Tv::F);
            let single = best_body(st, a) == Tv::F;
            st.assign(a, Tv::U);
            if single {
                steps.push(Step::False(vec![a]));
            }
        }
        let u = greatest_unfounded(st);
        if !u.is_empty() {
            steps.push(Step::False(u));
        }
        match steps.choose(rng) {
            None => return,
            Some(Step::True(a)) => st.assign(*a, Tv::T),
            Some(Step::False(u)) => {
                for a in u {
                    st.assign(*a, Tv::F);
                }
            }
        }
    }
}

/// First-order state: defined atoms of a definition over a three-valued structure.
struct FoState<'a> {
    j: ThreeValued,
    atoms: Vec<(SymId, usize)>,
    rules_of: Vec<Vec<usize>>,
    instances: Vec<(&'a Formula, Assignment)>,
    error: Option<EvalError>,
}

impl<'a> FoState<'a> {
    fn new(d: &'a Definition, above: &ThreeValued) -> Self {
        let mut j = above.clone();
        let n = j.size();
        let mut atoms = Vec::new();
        let mut rules_of = Vec::new();
        let mut instances = Vec::new();
        for p in d.defined() {
            j.set_unknown(p);
            let arity = j.base.vocab.arity(p);
            for t in all_tuples(arity, n) {
                let mut ids = Vec::new();
                for r in d.rules.iter().filter(|r| r.head == p) {
                    let pairs: Vec<_> = r.head_vars.iter().copied().zip(t.iter().copied()).collect();
                    ids.push(instances.len());
                    instances.push((&r.body, Assignment::from_pairs(&pairs)));
                }
                atoms.push((p, rank(&t, n)));
                rules_of.push(ids);
            }
        }
        FoState { j, atoms, rules_of, instances, error: None }
    }
}

impl WfState for FoState<'_> {
    fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    fn rules_of(&self, atom: usize) -> &[usize] {
        &self.rules_of[atom]
    }

    fn value(&self, atom: usize) -> Tv {
        let (p, r) = self.atoms[atom];
        self.j.table(p).unwrap().get(r)
    }

    fn assign(&mut self, atom: usize, v: Tv) {
        let (p, r) = self.atoms[atom];
        self.j.table_mut(p).unwrap().set(r, v);
    }

    fn body(&mut self, rule: usize) -> Tv {
        let (f, a) = &mut self.instances[rule];
        match eval3_mut(f, &self.j, a) {
            Ok(v) => v,
            Err(e) => {
                self.error.get_or_insert(e);
                Tv::U
            }
        }
    }
}

/// The well-founded model of `d` extending the open symbols of `above`.
pub fn wfm_above(d: &Definition, above: &ThreeValued) -> Result<ThreeValued, EvalError> {
    let mut st = FoState::new(d, above);
    well_founded(&mut st);
    match st.error {
        Some(e) => Err(e),
        None => Ok(st.j),
    }
}

/// The well-founded model of `d` over a two-valued interpretation of its open symbols.
pub fn wfm(d: &Definition, open: &FiniteStructure) -> Result<ThreeValued, EvalError> {
    wfm_above(d, &ThreeValued::from_two(open))
}

/// [`wfm`] with a randomized step schedule.
pub fn wfm_random<R: Rng>(d: &Definition, open: &FiniteStructure, rng: &mut R) -> Result<ThreeValued, EvalError> {
    let mut st = FoState::new(d, &ThreeValued::from_two(open));
    well_founded_random(&mut st, rng);
    match st.error {
        Some(e) => Err(e),
        None => Ok(st.j),
    }
}

/// `m ⊨ Δ`: the well-founded model over `m`'s open symbols is two-valued and agrees with `m`.
pub fn satisfies_definition(m: &FiniteStructure, d: &Definition) -> bool {
    let Ok(w) = wfm(d, m) else { return false };
    if !w.is_two_valued() {
        return false;
    }
    d.defined().into_iter().all(|p| {
        let n = tuple_count(m.vocab.arity(p), m.size());
        let t = w.table(p).unwrap();
        match m.pred_bits(p) {
            Some(bits) => (0..n).all(|r| bits[r] == t.ct[r]),
            None => false,
        }
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Totality {
    TotalByMonotone,
    TotalByStratification,
    Unknown,
}

/// Predicate occurrences in `f` with their sign (true = positive).
fn signed_atoms(f: &Formula, positive: bool, out: &mut Vec<(SymId, bool)>) {
    match &f.kind {
        Kind::Atom(p, _) => out.push((*p, positive)),
        Kind::Not(g) => signed_atoms(g, !positive, out),
        _ => f.children().into_iter().for_each(|c| signed_atoms(c, positive, out)),
    }
}

/// Syntactic totality check.
///
/// Monotone means no predicate occurs negatively in a body; stratified means
/// no cycle of the dependency graph between defined predicates runs through
/// a negative edge.
pub fn classify_totality(d: &Definition) -> Totality {
    let defined = d.defined();
    let mut edges: BTreeMap<SymId, Vec<(SymId, bool)>> = BTreeMap::new();
    let mut any_negative = false;
    for r in &d.rules {
        let mut occ = Vec::new();
        signed_atoms(&r.body, true, &mut occ);
        any_negative |= occ.iter().any(|(_, pos)| !pos);
        edges.entry(r.head).or_default().extend(occ.into_iter().filter(|(q, _)| defined.contains(q)));
    }
    if !any_negative {
        return Totality::TotalByMonotone;
    }
    let reach = |from: SymId| -> BTreeSet<SymId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(p) = stack.pop() {
            for (q, _) in edges.get(&p).into_iter().flatten() {
                if seen.insert(*q) {
                    stack.push(*q);
                }
            }
        }
        seen
    };
    for (p, out) in &edges {
        for (q, pos) in out {
            if !pos && reach(*q).contains(p) {
                return Totality::Unknown;
            }
        }
    }
    Totality::TotalByStratification
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WfsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Result of evaluating the definitions that only depend on input symbols.
#[derive(Clone, Debug)]
pub struct Materialized {
    /// The theory without those definitions; its input vocabulary is τ.
    pub theory: Theory,
    /// The input structure extended with the computed tables.
    pub structure: FiniteStructure,
    pub symbols: Vec<SymId>,
}

/// Computes every definition whose open symbols are input symbols, in
/// dependency order, and turns its defined predicates into input symbols.
pub fn materialize_input_definitions(t: &Theory, s: &FiniteStructure) -> Result<Materialized, WfsError> {
    let mut theory = t.clone();
    let mut structure = s.clone();
    let mut symbols = Vec::new();
    loop {
        let ready = theory
            .definitions
            .iter()
            .position(|d| d.open().iter().all(|q| theory.vocab.is_input(*q)));
        let Some(i) = ready else { break };
        let d = theory.definitions.remove(i);
        let w = wfm(&d, &structure)?;
        if !w.is_two_valued() {
            let names: Vec<&str> = d.defined().into_iter().map(|p| theory.vocab.name(p)).collect();
            return Err(LogicError::IllFormed(format!(
                "definition of {} has a three-valued well-founded model on this structure",
                names.join(", ")
            ))
            .into());
        }
        for p in d.defined() {
            structure.set_pred_bits(p, w.table(p).unwrap().ct.clone());
            theory.vocab.set_input(p);
            symbols.push(p);
        }
    }
    structure.vocab = theory.vocab.clone();
    theory.renumber();
    Ok(Materialized { theory, structure, symbols })
}

/// A small explicit propositional program; used by tests and the oracle.
#[derive(Clone, Debug, Default)]
pub struct PropProgram {
    pub values: Vec<Tv>,
    pub rules_of: Vec<Vec<usize>>,
    pub bodies: Vec<PropBody>,
}

/// A ground body: a formula over program atoms and fixed truth values.
#[derive(Clone, Debug)]
pub enum PropBody {
    Const(Tv),
    Atom(usize),
    Not(Box<PropBody>),
    And(Vec<PropBody>),
    Or(Vec<PropBody>),
}

impl PropBody {
    pub fn eval(&self, vals: &[Tv]) -> Tv {
        match self {
            PropBody::Const(v) => *v,
            PropBody::Atom(a) => vals[*a],
            PropBody::Not(b) => b.eval(vals).not(),
            PropBody::And(bs) => bs.iter().map(|b| b.eval(vals)).min().unwrap_or(Tv::T),
            PropBody::Or(bs) => bs.iter().map(|b| b.eval(vals)).max().unwrap_or(Tv::F),
        }
    }
}

impl PropProgram {
    /// `n` atoms, all unknown and without rules (so they become false).
    pub fn new(n: usize) -> Self {
        PropProgram { values: vec![Tv::U; n], rules_of: vec![Vec::new(); n], bodies: Vec::new() }
    }

    pub fn add_rule(&mut self, head: usize, body: PropBody) {
        self.rules_of[head].push(self.bodies.len());
        self.bodies.push(body);
    }
}

impl WfState for PropProgram {
    fn atom_count(&self) -> usize {
        self.values.len()
    }

    fn rules_of(&self, atom: usize) -> &[usize] {
        &self.rules_of[atom]
    }

    fn value(&self, atom: usize) -> Tv {
        self.values[atom]
    }

    fn assign(&mut self, atom: usize, v: Tv) {
        self.values[atom] = v;
    }

    fn body(&mut self, rule: usize) -> Tv {
        self.bodies[rule].eval(&self.values)
    }
}
