//! Maps derived from a c-map, and the theories it induces.

use std::collections::{BTreeMap, HashMap};

use super::{bottom_up, BoundsError, Bound, CMap, Canonical, Occurrences};
use crate::fobdd::Bdd;
use crate::logic::display::Shown;
use crate::logic::{Definition, Formula, Kind, OccId, Rule, SymId, Term, Theory, Var, VarPool};
use crate::structure::{EvalError, FiniteStructure};
use crate::wfs::{classify_totality, Totality};

/// Symbol and argument variables of an atomic occurrence `P(x̄)` or `F(x̄) = y`.
pub(crate) fn atom_args(f: &Formula) -> Option<(SymId, Vec<Var>)> {
    match &f.kind {
        Kind::Atom(p, args) => Some((*p, args.iter().map(|a| a.as_var()).collect::<Option<Vec<_>>>()?)),
        Kind::Eq(Term::App(g, args), Term::Var(y)) => {
            let mut vs = args.iter().map(|a| a.as_var()).collect::<Option<Vec<_>>>()?;
            vs.push(*y);
            Some((*g, vs))
        }
        _ => None,
    }
}

/// The atom over `sym` with the given variables.
fn atom_formula(t: &Theory, sym: SymId, vars: &[Var]) -> Formula {
    if t.vocab.is_func(sym) {
        let (args, y) = vars.split_at(vars.len() - 1);
        Formula::eq(Term::App(sym, args.iter().map(|v| Term::Var(*v)).collect()), Term::Var(y[0]))
    } else {
        Formula::atom_vars(sym, vars)
    }
}

/// Gives every atom over a symbol the disjunction of the bounds of all atoms
/// over that symbol, each moved onto the atom's arguments through equalities.
/// Non-atomic occurrences keep their bounds.
pub fn copy_closure(mut c: CMap, t: &Theory) -> CMap {
    let occs = Occurrences::new(t);
    let mut groups: BTreeMap<SymId, Vec<(OccId, Vec<Var>)>> = BTreeMap::new();
    for &id in &occs.order {
        if let Some((sym, args)) = atom_args(&occs.map[&id].formula) {
            groups.entry(sym).or_default().push((id, args));
        }
    }
    for (sym, members) in groups {
        let arity = members[0].1.len();
        let name = t.vocab.name(sym).to_lowercase();
        let place: Vec<Var> = (1..=arity).map(|i| c.vars.named(&format!("{name}{i}"))).collect();
        let mut canon = [c.mgr.bot(), c.mgr.bot()];
        for (side, ct) in [(0, true), (1, false)] {
            let mut parts = Vec::new();
            for (id, args) in &members {
                let b = c.side(*id, ct);
                parts.push(glue(&mut c, b, args, &place));
            }
            let joined = c.mgr.or_all(parts);
            canon[side] = c.mgr.simplify(joined);
        }
        for (id, args) in &members {
            let map: HashMap<Var, Var> = place.iter().copied().zip(args.iter().copied()).collect();
            let ct = c.mgr.subst(canon[0], &map);
            let cf = c.mgr.subst(canon[1], &map);
            let b = Bound { ct: c.mgr.simplify(ct), cf: c.mgr.simplify(cf) };
            c.set(*id, b);
        }
        c.canonical.insert(sym, Canonical { vars: place, ct: canon[0], cf: canon[1] });
    }
    c
}

/// `∃ā'(b[ā/ā'] ∧ ⋀ place_j = a'_j)`.
fn glue(c: &mut CMap, b: Bdd, args: &[Var], place: &[Var]) -> Bdd {
    if c.mgr.is_bot(b) {
        return b;
    }
    let mut fresh: HashMap<Var, Var> = HashMap::new();
    for a in args {
        if !fresh.contains_key(a) {
            let v = c.mgr.fresh_temp();
            fresh.insert(*a, v);
        }
    }
    let moved = c.mgr.subst(b, &fresh);
    let mut parts = vec![moved];
    for (p, a) in place.iter().zip(args) {
        let e = c.mgr.eq(*p, fresh[a]);
        parts.push(e);
    }
    let conj = c.mgr.and_all(parts);
    let temps: Vec<Var> = fresh.values().copied().collect();
    let r = c.mgr.exists_all(&temps, conj);
    c.mgr.simplify(r)
}

/// Keeps the bounds of atoms and recomputes every other bound from its
/// children, leaves first. Leaves without a symbol (truth constants and
/// variable equalities) get their exact bound.
pub fn to_bottom_up(mut c: CMap, t: &Theory) -> CMap {
    let occs = Occurrences::new(t);
    for &id in occs.order.iter().rev() {
        let occ = &occs.map[&id];
        if occ.children.is_empty() {
            if atom_args(&occ.formula).is_none() {
                let ct = c.mgr.build(&occ.formula);
                let cf = c.mgr.not(ct);
                c.set(id, Bound { ct, cf });
            }
            continue;
        }
        let ct = bottom_up(&mut c, occ, true).unwrap();
        let cf = bottom_up(&mut c, occ, false).unwrap();
        let b = Bound { ct: c.mgr.simplify(ct), cf: c.mgr.simplify(cf) };
        c.set(id, b);
    }
    c
}

/// Defined predicates occurring in `f`, with their sign relative to `f`.
fn signed_defined(f: &Formula, defined: &[SymId], positive: bool, out: &mut Vec<bool>) {
    match &f.kind {
        Kind::Atom(p, _) if defined.contains(p) => out.push(positive),
        Kind::Not(g) => signed_defined(g, defined, !positive, out),
        _ => f.children().into_iter().for_each(|g| signed_defined(g, defined, positive, out)),
    }
}

/// Zeroes the bounds that could change the well-founded models of a
/// definition once inserted into its rule bodies.
pub fn make_tolerant(mut c: CMap, t: &Theory) -> CMap {
    let bot = c.mgr.bot();
    for (id, ct) in tolerance_demands(t) {
        c.set_side(id, ct, bot);
    }
    c
}

/// The first occurrence whose bounds break the tolerance conditions, if any.
pub fn intolerant_occurrence(c: &CMap, t: &Theory) -> Option<OccId> {
    tolerance_demands(t).into_iter().find(|(id, ct)| !c.mgr.is_bot(c.side(*id, *ct))).map(|(id, _)| id)
}

/// Bound sides that tolerance forces to false, as `(occurrence, ct side)`.
fn tolerance_demands(t: &Theory) -> Vec<(OccId, bool)> {
    let mut out = Vec::new();
    for d in &t.definitions {
        let defined = d.defined();
        let total = classify_totality(d) != Totality::Unknown;
        for r in &d.rules {
            tolerate(&mut out, &r.body, &defined, total, true);
        }
    }
    out
}

fn tolerate(out: &mut Vec<(OccId, bool)>, f: &Formula, defined: &[SymId], total: bool, positive: bool) {
    let mut signs = Vec::new();
    signed_defined(f, defined, true, &mut signs);
    if !signs.is_empty() {
        if !total {
            out.push((f.id, true));
            out.push((f.id, false));
        } else {
            if positive && signs.contains(&true) {
                out.push((f.id, true));
            }
            if !positive && signs.contains(&false) {
                out.push((f.id, false));
            }
        }
    }
    let flip = matches!(f.kind, Kind::Not(_));
    for g in f.children() {
        tolerate(out, g, defined, total, positive != flip);
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    /// Some tuple satisfies both bounds of the occurrence in the input structure.
    IsigmaInconsistent(OccId),
    /// Both bounds hold everywhere.
    Inconsistent(OccId),
}

/// Looks for an occurrence whose ct- and cf-bound overlap.
pub fn check_consistency(c: &mut CMap, s: Option<&FiniteStructure>) -> Result<Consistency, EvalError> {
    let ids: Vec<OccId> = c.occurrences().collect();
    for id in ids {
        let (ct, cf) = (c.ct(id), c.cf(id));
        let both = c.mgr.and(ct, cf);
        if c.mgr.is_bot(both) {
            continue;
        }
        match s {
            Some(s) => {
                let vars = c.mgr.free_vars(both);
                if c.mgr.query_one(both, s, &vars)?.is_some() {
                    return Ok(Consistency::IsigmaInconsistent(id));
                }
            }
            None => {
                if c.mgr.is_top(both) {
                    return Ok(Consistency::Inconsistent(id));
                }
            }
        }
    }
    Ok(Consistency::Consistent)
}

/// Rewrites every occurrence `φ` into `(φ' ∧ ¬cf) ∨ ct`, where `φ'` has its
/// children rewritten. Occurrences with trivial bounds stay as they are.
pub fn c_transform(t: &Theory, c: &CMap) -> Theory {
    let mut out = Theory { vocab: t.vocab.clone(), vars: c.vars.clone(), ..Default::default() };
    out.sentences = t.sentences.iter().map(|f| transform(f, c, &mut out.vars)).collect();
    for d in &t.definitions {
        let rules = d
            .rules
            .iter()
            .map(|r| Rule { head: r.head, head_vars: r.head_vars.clone(), body: transform(&r.body, c, &mut out.vars) })
            .collect();
        out.definitions.push(Definition { rules });
    }
    out.renumber();
    out
}

fn transform(f: &Formula, c: &CMap, vars: &mut VarPool) -> Formula {
    let inner = match &f.kind {
        Kind::Not(g) => Formula::not(transform(g, c, vars)),
        Kind::And(gs) => Formula::and(gs.iter().map(|g| transform(g, c, vars)).collect()),
        Kind::Or(gs) => Formula::or(gs.iter().map(|g| transform(g, c, vars)).collect()),
        Kind::Exists(x, g) => Formula::exists(*x, transform(g, c, vars)),
        Kind::Forall(x, g) => Formula::forall(*x, transform(g, c, vars)),
        _ => f.clone(),
    };
    let (ct, cf) = (c.ct(f.id), c.cf(f.id));
    let guarded = if c.mgr.is_bot(cf) {
        inner
    } else {
        Formula::and(vec![inner, Formula::not(c.mgr.to_formula(cf, vars))])
    };
    if c.mgr.is_bot(ct) {
        guarded
    } else {
        Formula::or(vec![guarded, c.mgr.to_formula(ct, vars)])
    }
}

fn bound_sentence(c: &CMap, b: Bdd, body: Formula, free: &[Var], vars: &mut VarPool) -> Option<Formula> {
    if c.mgr.is_bot(b) {
        return None;
    }
    Some(Formula::forall_all(free, Formula::implies(c.mgr.to_formula(b, vars), body)))
}

/// The sentences `∀x̄(ct ⊃ φ)` and `∀x̄(cf ⊃ ¬φ)` for every occurrence with a
/// non-trivial bound.
pub fn cbar(c: &CMap, t: &Theory) -> Theory {
    let occs = Occurrences::new(t);
    let mut out = Theory { vocab: t.vocab.clone(), vars: c.vars.clone(), ..Default::default() };
    for &id in &occs.order {
        let occ = &occs.map[&id];
        let f = occ.formula.clone();
        out.sentences.extend(bound_sentence(c, c.ct(id), f.clone(), &occ.free, &mut out.vars));
        out.sentences.extend(bound_sentence(c, c.cf(id), Formula::not(f), &occ.free, &mut out.vars));
    }
    out.renumber();
    out
}

/// The atomic part of [`cbar`], one pair of sentences per expansion symbol,
/// stated with the canonical bounds.
pub fn cbar_a(c: &CMap, t: &Theory) -> Result<Theory, BoundsError> {
    let occs = Occurrences::new(t);
    for &id in &occs.order {
        if let Some((sym, _)) = atom_args(&occs.map[&id].formula) {
            if c.canonical(sym).is_none() {
                return Err(BoundsError::NotCopyClosed(t.vocab.name(sym).to_string()));
            }
        }
    }
    let mut out = Theory { vocab: t.vocab.clone(), vars: c.vars.clone(), ..Default::default() };
    for (sym, canon) in c.canonicals() {
        if t.vocab.is_input(sym) {
            continue;
        }
        let atom = atom_formula(t, sym, &canon.vars);
        out.sentences.extend(bound_sentence(c, canon.ct, atom.clone(), &canon.vars, &mut out.vars));
        out.sentences.extend(bound_sentence(c, canon.cf, Formula::not(atom), &canon.vars, &mut out.vars));
    }
    out.renumber();
    Ok(out)
}

/// Text listing of all bounds: one block per occurrence in preorder, then the
/// canonical bounds.
pub fn dump(c: &CMap, t: &Theory) -> String {
    let occs = Occurrences::new(t);
    let mut vars = c.vars.clone();
    let mut out = String::new();
    let line = |label: &str, f: &Formula, vars: &VarPool, out: &mut String| {
        out.push_str(&format!("  {label}: {}\n", Shown { vocab: &t.vocab, vars, f }));
    };
    for &id in &occs.order {
        let occ = &occs.map[&id];
        out.push_str(&format!("[{id}] {}\n", Shown { vocab: &t.vocab, vars: &vars, f: &occ.formula }));
        for (label, b) in [("ct", c.ct(id)), ("cf", c.cf(id))] {
            let f = c.mgr.to_formula(b, &mut vars);
            line(label, &f, &vars, &mut out);
        }
    }
    for (sym, canon) in c.canonicals() {
        let atom = atom_formula(t, sym, &canon.vars);
        out.push_str(&format!("canonical {}\n", Shown { vocab: &t.vocab, vars: &vars, f: &atom }));
        for (label, b) in [("ct", canon.ct), ("cf", canon.cf)] {
            let f = c.mgr.to_formula(b, &mut vars);
            line(label, &f, &vars, &mut out);
        }
    }
    out
}
