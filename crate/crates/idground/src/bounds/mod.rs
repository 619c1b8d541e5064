//! Certainly-true and certainly-false bounds for subformula occurrences.
//!
//! A [`CMap`] assigns every occurrence of a theory a pair of diagrams over
//! the input vocabulary: when the ct-bound holds for a tuple the occurrence is
//! true in every model, when the cf-bound holds it is false in every model.

mod derive;
mod refine;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::fobdd::{Bdd, Manager};
use crate::logic::{Formula, Kind, OccId, SymId, Term, Theory, Var, VarPool, Vocabulary};

pub use derive::{
    c_transform, cbar, cbar_a, check_consistency, copy_closure, dump, intolerant_occurrence, make_tolerant, to_bottom_up, Consistency,
};
pub use refine::{refine, Limit, RefineStats, StopPolicy};
pub(crate) use derive::atom_args;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("unknown occurrence {0}")]
    UnknownOccurrence(OccId),
    #[error("refinement does not apply to occurrence {occ}: {why}")]
    Mismatch { occ: OccId, why: &'static str },
    #[error("no canonical bounds for symbol {0}; run copy_closure first")]
    NotCopyClosed(String),
}

/// A ct/cf pair.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub ct: Bdd,
    pub cf: Bdd,
}

/// Bounds shared by all atoms over one symbol, stated over placeholder
/// variables: the arguments, plus the result for a function.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub vars: Vec<Var>,
    pub ct: Bdd,
    pub cf: Bdd,
}

pub struct CMap {
    pub mgr: Manager,
    /// Variables of the theory plus the placeholders introduced here.
    pub vars: VarPool,
    bounds: BTreeMap<OccId, Bound>,
    canonical: BTreeMap<SymId, Canonical>,
}

impl CMap {
    fn empty(t: &Theory) -> Self {
        CMap { mgr: Manager::new(), vars: t.vars.clone(), bounds: BTreeMap::new(), canonical: BTreeMap::new() }
    }

    pub fn get(&self, occ: OccId) -> Option<Bound> {
        self.bounds.get(&occ).copied()
    }

    pub fn ct(&self, occ: OccId) -> Bdd {
        self.bounds.get(&occ).map_or(self.mgr.bot(), |b| b.ct)
    }

    pub fn cf(&self, occ: OccId) -> Bdd {
        self.bounds.get(&occ).map_or(self.mgr.bot(), |b| b.cf)
    }

    fn side(&self, occ: OccId, ct: bool) -> Bdd {
        if ct {
            self.ct(occ)
        } else {
            self.cf(occ)
        }
    }

    pub fn set(&mut self, occ: OccId, b: Bound) {
        self.bounds.insert(occ, b);
    }

    fn set_side(&mut self, occ: OccId, ct: bool, b: Bdd) {
        let bot = self.mgr.bot();
        let e = self.bounds.entry(occ).or_insert(Bound { ct: bot, cf: bot });
        if ct {
            e.ct = b;
        } else {
            e.cf = b;
        }
    }

    /// Occurrences with an entry, in identifier order.
    pub fn occurrences(&self) -> impl Iterator<Item = OccId> + '_ {
        self.bounds.keys().copied()
    }

    pub fn canonical(&self, sym: SymId) -> Option<&Canonical> {
        self.canonical.get(&sym)
    }

    pub fn canonicals(&self) -> impl Iterator<Item = (SymId, &Canonical)> {
        self.canonical.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_trivial(&self, occ: OccId) -> bool {
        self.mgr.is_bot(self.ct(occ)) && self.mgr.is_bot(self.cf(occ))
    }

    /// Keeps the entries of `ids` only.
    fn restrict(&mut self, ids: &BTreeSet<OccId>) {
        self.bounds.retain(|k, _| ids.contains(k));
    }
}

/// Maps every occurrence of `t` to `(⊥, ⊥)`.
pub fn trivial_cmap(t: &Theory) -> CMap {
    let mut c = CMap::empty(t);
    let bot = c.mgr.bot();
    for id in t.occurrence_ids() {
        c.set(id, Bound { ct: bot, cf: bot });
    }
    c
}

/// Maps atoms over the input vocabulary (equality included) to `(φ, ¬φ)`,
/// everything else to `(⊥, ⊥)`.
pub fn input_cmap(t: &Theory) -> CMap {
    let mut c = trivial_cmap(t);
    join_input_bounds(&mut c, t);
    c
}

/// Joins `(φ, ¬φ)` into the bounds of every atom `φ` over the input
/// vocabulary. Afterwards a bound contradicting the input structure on such an
/// atom shows up as an overlap in [`check_consistency`].
pub fn join_input_bounds(c: &mut CMap, t: &Theory) {
    for root in t.roots() {
        root.visit(&mut |f| {
            if matches!(f.kind, Kind::Atom(..) | Kind::Eq(..)) && over_input(f, &t.vocab) {
                let b = c.mgr.build(f);
                let n = c.mgr.not(b);
                let ct = c.mgr.or(c.ct(f.id), b);
                let cf = c.mgr.or(c.cf(f.id), n);
                c.set(f.id, Bound { ct, cf });
            }
        });
    }
}

fn over_input(f: &Formula, vocab: &Vocabulary) -> bool {
    f.symbols().iter().all(|s| vocab.is_input(*s))
}

// ---------------------------------------------------------------------------
// Occurrence index

#[derive(Clone, Debug)]
pub(crate) struct Occ {
    pub formula: Formula,
    pub parent: Option<OccId>,
    pub children: Vec<OccId>,
    pub free: Vec<Var>,
    pub sentence: bool,
    pub over_input: bool,
}

/// Parent/child structure of all occurrences of a theory.
#[derive(Clone, Debug, Default)]
pub(crate) struct Occurrences {
    pub map: BTreeMap<OccId, Occ>,
    /// Preorder.
    pub order: Vec<OccId>,
}

impl Occurrences {
    pub fn new(t: &Theory) -> Self {
        let mut out = Occurrences::default();
        let sentences = t.sentences.len();
        for (i, root) in t.roots().into_iter().enumerate() {
            out.add(root, None, i < sentences, &t.vocab);
        }
        out
    }

    fn add(&mut self, f: &Formula, parent: Option<OccId>, sentence: bool, vocab: &Vocabulary) {
        let children: Vec<OccId> = f.children().iter().map(|c| c.id).collect();
        self.order.push(f.id);
        self.map.insert(
            f.id,
            Occ {
                formula: f.clone(),
                parent,
                children,
                free: f.free_vars().into_iter().collect(),
                sentence,
                over_input: over_input(f, vocab),
            },
        );
        for c in f.children() {
            self.add(c, Some(f.id), false, vocab);
        }
    }

    pub fn get(&self, occ: OccId) -> Result<&Occ, BoundsError> {
        self.map.get(&occ).ok_or(BoundsError::UnknownOccurrence(occ))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }
}

// ---------------------------------------------------------------------------
// Refinement bounds

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    Input,
    Axiom,
    BottomUp,
    TopDown,
    Functional,
    /// Copy from the given source occurrence.
    Copy(OccId),
}

/// One-step refinement of the ct-bound (`ct = true`) or cf-bound of `target`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefinementTask {
    pub kind: TaskKind,
    pub target: OccId,
    pub ct: bool,
}

impl RefinementTask {
    pub fn new(kind: TaskKind, target: OccId, ct: bool) -> Self {
        RefinementTask { kind, target, ct }
    }
}

/// The refinement bound of `task` with respect to `c`.
pub fn refinement_bound(task: &RefinementTask, c: &mut CMap, t: &Theory) -> Result<Bdd, BoundsError> {
    compute(task, c, &Occurrences::new(t))
}

fn mismatch(occ: OccId, why: &'static str) -> BoundsError {
    BoundsError::Mismatch { occ, why }
}

pub(crate) fn compute(task: &RefinementTask, c: &mut CMap, occs: &Occurrences) -> Result<Bdd, BoundsError> {
    let occ = occs.get(task.target)?;
    let id = task.target;
    let ct = task.ct;
    let raw = match task.kind {
        TaskKind::Input => {
            if !occ.over_input {
                return Err(mismatch(id, "not over the input vocabulary"));
            }
            let b = c.mgr.build(&occ.formula);
            if ct {
                b
            } else {
                c.mgr.not(b)
            }
        }
        TaskKind::Axiom => {
            if !occ.sentence || !ct {
                return Err(mismatch(id, "axiom refinement needs the ct-bound of a sentence"));
            }
            c.mgr.top()
        }
        TaskKind::BottomUp => bottom_up(c, occ, ct).ok_or_else(|| mismatch(id, "occurrence has no children"))?,
        TaskKind::TopDown => {
            let parent = occ.parent.ok_or_else(|| mismatch(id, "occurrence has no parent"))?;
            top_down(c, occs.get(parent)?, id, ct)
        }
        TaskKind::Functional => {
            let y = functional_result(&occ.formula).ok_or_else(|| mismatch(id, "not a function atom F(x) = y with y not in x"))?;
            let other = c.side(id, !ct);
            let y2 = c.mgr.fresh_temp();
            let moved = c.mgr.subst(other, &HashMap::from([(y, y2)]));
            let e = c.mgr.eq(y, y2);
            if ct {
                // ∀y'(y' ≠ y ⊃ cf[y/y'])
                let body = c.mgr.or(e, moved);
                c.mgr.forall(y2, body)
            } else {
                // ∃y'(ct[y/y'] ∧ y ≠ y')
                let ne = c.mgr.not(e);
                let body = c.mgr.and(moved, ne);
                c.mgr.exists(y2, body)
            }
        }
        TaskKind::Copy(src) => {
            let source = occs.get(src)?;
            let pairs = match_shapes(&occ.formula, &source.formula)
                .ok_or_else(|| mismatch(id, "copy source has a different shape"))?;
            copy_bound(c, c.side(src, ct), &source.free, &pairs)
        }
    };
    Ok(close(c, raw, &occ.free))
}

/// The result variable `y` of `F(x̄) = y` when `y` is not among `x̄`. With
/// `y` among the arguments the atom says nothing about other values.
pub(crate) fn functional_result(f: &Formula) -> Option<Var> {
    match &f.kind {
        Kind::Eq(Term::App(_, args), Term::Var(y)) if args.iter().all(|a| a.as_var() != Some(*y)) => Some(*y),
        _ => None,
    }
}

/// Existentially quantifies the variables of `b` outside `keep`.
fn close(c: &mut CMap, b: Bdd, keep: &[Var]) -> Bdd {
    let extra: Vec<Var> = c.mgr.free_vars(b).into_iter().filter(|v| !keep.contains(v)).collect();
    c.mgr.exists_all(&extra, b)
}

fn bottom_up(c: &mut CMap, occ: &Occ, ct: bool) -> Option<Bdd> {
    let kids = &occ.children;
    Some(match &occ.formula.kind {
        Kind::Not(_) => c.side(kids[0], !ct),
        Kind::Forall(x, _) | Kind::Exists(x, _) => {
            let universal = matches!(occ.formula.kind, Kind::Forall(..));
            let b = c.side(kids[0], ct);
            if universal == ct {
                c.mgr.forall(*x, b)
            } else {
                c.mgr.exists(*x, b)
            }
        }
        Kind::And(_) | Kind::Or(_) => {
            let conj = matches!(occ.formula.kind, Kind::And(_));
            let parts: Vec<Bdd> = kids.iter().map(|k| c.side(*k, ct)).collect();
            if conj == ct {
                c.mgr.and_all(parts)
            } else {
                c.mgr.or_all(parts)
            }
        }
        _ => return None,
    })
}

fn top_down(c: &mut CMap, parent: &Occ, child: OccId, ct: bool) -> Bdd {
    let pid = parent.formula.id;
    match &parent.formula.kind {
        Kind::Not(_) => c.side(pid, !ct),
        Kind::Forall(x, _) | Kind::Exists(x, _) => {
            let universal = matches!(parent.formula.kind, Kind::Forall(..));
            let own = c.side(pid, ct);
            if universal == ct {
                return own;
            }
            // The other instances of the child are certain, so this one decides the parent.
            let x2 = c.mgr.fresh_temp();
            let other = c.side(child, !ct);
            let moved = c.mgr.subst(other, &HashMap::from([(*x, x2)]));
            let e = c.mgr.eq(*x, x2);
            let body = c.mgr.or(e, moved);
            let all = c.mgr.forall(x2, body);
            c.mgr.and(own, all)
        }
        Kind::And(_) | Kind::Or(_) => {
            let conj = matches!(parent.formula.kind, Kind::And(_));
            let own = c.side(pid, ct);
            if conj == ct {
                return own;
            }
            let mut parts = vec![own];
            parts.extend(parent.children.iter().filter(|k| **k != child).map(|k| c.side(*k, conj)));
            c.mgr.and_all(parts)
        }
        _ => c.mgr.bot(),
    }
}

/// `∃ȳ'(b[ȳ/ȳ'] ∧ ⋀ E)` where `ȳ` are the free variables of the source.
fn copy_bound(c: &mut CMap, b: Bdd, source_free: &[Var], pairs: &[(Var, Var)]) -> Bdd {
    let fresh: HashMap<Var, Var> = source_free.iter().map(|v| (*v, c.mgr.fresh_temp())).collect();
    let moved = c.mgr.subst(b, &fresh);
    let mut parts = vec![moved];
    for (a, s) in pairs {
        let e = c.mgr.eq(*a, fresh[s]);
        parts.push(e);
    }
    let conj = c.mgr.and_all(parts);
    let temps: Vec<Var> = source_free.iter().map(|v| fresh[v]).collect();
    c.mgr.exists_all(&temps, conj)
}

/// Pairs of free variables at corresponding positions when `a` and `b` agree
/// up to free-variable names and renaming of bound variables.
pub(crate) fn match_shapes(a: &Formula, b: &Formula) -> Option<Vec<(Var, Var)>> {
    let mut pairs = Vec::new();
    let mut bound = Vec::new();
    if walk_pair(a, b, &mut bound, &mut pairs) {
        pairs.sort();
        pairs.dedup();
        Some(pairs)
    } else {
        None
    }
}

fn var_pair(x: Var, y: Var, bound: &[(Var, Var)], pairs: &mut Vec<(Var, Var)>) -> bool {
    let bx = bound.iter().rposition(|(p, _)| *p == x);
    let by = bound.iter().rposition(|(_, q)| *q == y);
    match (bx, by) {
        (Some(i), Some(j)) => i == j,
        (None, None) => {
            pairs.push((x, y));
            true
        }
        _ => false,
    }
}

fn term_pair(s: &Term, t: &Term, bound: &[(Var, Var)], pairs: &mut Vec<(Var, Var)>) -> bool {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => var_pair(*x, *y, bound, pairs),
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(a, b)| term_pair(a, b, bound, pairs))
        }
        _ => false,
    }
}

fn walk_pair(a: &Formula, b: &Formula, bound: &mut Vec<(Var, Var)>, pairs: &mut Vec<(Var, Var)>) -> bool {
    match (&a.kind, &b.kind) {
        (Kind::True, Kind::True) | (Kind::False, Kind::False) => true,
        (Kind::Atom(p, xs), Kind::Atom(q, ys)) => {
            p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(s, t)| term_pair(s, t, bound, pairs))
        }
        (Kind::Eq(s1, s2), Kind::Eq(t1, t2)) => term_pair(s1, t1, bound, pairs) && term_pair(s2, t2, bound, pairs),
        (Kind::Not(f), Kind::Not(g)) => walk_pair(f, g, bound, pairs),
        (Kind::And(fs), Kind::And(gs)) | (Kind::Or(fs), Kind::Or(gs)) => {
            fs.len() == gs.len() && fs.iter().zip(gs).all(|(f, g)| walk_pair(f, g, bound, pairs))
        }
        (Kind::Exists(x, f), Kind::Exists(y, g)) | (Kind::Forall(x, f), Kind::Forall(y, g)) => {
            bound.push((*x, *y));
            let ok = walk_pair(f, g, bound, pairs);
            bound.pop();
            ok
        }
        _ => false,
    }
}

/// Structure of a formula with free variables erased and bound variables
/// replaced by binder depth; equal keys mean [`match_shapes`] succeeds.
pub(crate) fn shape_key(f: &Formula) -> String {
    fn var(x: Var, bound: &[Var], out: &mut String) {
        match bound.iter().rposition(|b| *b == x) {
            Some(i) => out.push_str(&format!("#{i}")),
            None => out.push('z'),
        }
    }
    fn term(t: &Term, bound: &[Var], out: &mut String) {
        match t {
            Term::Var(x) => var(*x, bound, out),
            Term::App(f, args) => {
                out.push_str(&format!("f{}(", f.0));
                for a in args {
                    term(a, bound, out);
                    out.push(',');
                }
                out.push(')');
            }
        }
    }
    fn go(f: &Formula, bound: &mut Vec<Var>, out: &mut String) {
        match &f.kind {
            Kind::True => out.push('T'),
            Kind::False => out.push('F'),
            Kind::Atom(p, args) => {
                out.push_str(&format!("p{}(", p.0));
                for a in args {
                    term(a, bound, out);
                    out.push(',');
                }
                out.push(')');
            }
            Kind::Eq(a, b) => {
                out.push_str("=(");
                term(a, bound, out);
                out.push(',');
                term(b, bound, out);
                out.push(')');
            }
            Kind::Not(g) => {
                out.push('~');
                go(g, bound, out);
            }
            Kind::And(gs) | Kind::Or(gs) => {
                out.push(if matches!(f.kind, Kind::And(_)) { '&' } else { '|' });
                out.push('[');
                for g in gs {
                    go(g, bound, out);
                    out.push(';');
                }
                out.push(']');
            }
            Kind::Exists(x, g) | Kind::Forall(x, g) => {
                out.push(if matches!(f.kind, Kind::Exists(..)) { 'E' } else { 'A' });
                bound.push(*x);
                go(g, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = String::new();
    go(f, &mut Vec::new(), &mut out);
    out
}
