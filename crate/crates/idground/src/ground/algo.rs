//! Grounding guided by certainly-true and certainly-false bounds.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{GAtom, GDefinition, GFormula, GRule, GroundError, GroundTheory};
use crate::bounds::{check_consistency, intolerant_occurrence, input_cmap, trivial_cmap, CMap, Consistency};
use crate::fobdd::{Bdd, Querier};
use crate::logic::{Definition, Formula, Kind, OccId, SymId, Term, Theory, Var, Vocabulary};
use crate::structure::{all_tuples, tuple_count, Assignment, FiniteStructure};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundStats {
    /// Substitutions tried and head instances produced.
    pub instantiations: u64,
    /// Diagram evaluations spent answering bound queries.
    pub probes: u64,
}

/// Per-occurrence diagrams needed while grounding.
#[derive(Clone)]
struct Prep {
    free: Vec<Var>,
    ct: Bdd,
    cf: Bdd,
    /// Neither bound holds.
    open: Bdd,
    /// The bound is not certainly false.
    possible: Bdd,
    /// Iterate the whole domain instead of querying `open`.
    dense: bool,
}

fn prepare(c: &mut CMap, t: &Theory, s: &FiniteStructure) -> HashMap<OccId, Prep> {
    let mut out = HashMap::new();
    for root in t.roots() {
        root.visit(&mut |f| {
            let (mut ct, mut cf) = (c.ct(f.id), c.cf(f.id));
            if let Kind::Not(g) = &f.kind {
                if f.is_literal() {
                    let (gct, gcf) = (c.ct(g.id), c.cf(g.id));
                    ct = c.mgr.or(ct, gcf);
                    cf = c.mgr.or(cf, gct);
                }
            }
            let nct = c.mgr.not(ct);
            let ncf = c.mgr.not(cf);
            let open = c.mgr.and(nct, ncf);
            let free: Vec<Var> = f.free_vars().into_iter().collect();
            let space = tuple_count(free.len(), s.size()) as f64;
            let dense = c.mgr.is_top(open) || c.mgr.estimate(open, s, &free).reward > space / 2.0;
            out.insert(f.id, Prep { free, ct, cf, open, possible: ncf, dense });
        });
    }
    out
}

/// Definitions ordered so that a definition comes after those defining its open symbols.
fn dependency_order(defs: &[Definition]) -> Vec<&Definition> {
    let mut done = vec![false; defs.len()];
    let mut out = Vec::new();
    while out.len() < defs.len() {
        let before = out.len();
        for (i, d) in defs.iter().enumerate() {
            if done[i] {
                continue;
            }
            let open = d.open();
            let waits = defs
                .iter()
                .enumerate()
                .any(|(j, e)| !done[j] && j != i && e.defined().iter().any(|p| open.contains(p)));
            if !waits {
                done[i] = true;
                out.push(d);
            }
        }
        if out.len() == before {
            // Mutually dependent definitions keep their textual order.
            for (i, d) in defs.iter().enumerate() {
                if !done[i] {
                    done[i] = true;
                    out.push(d);
                }
            }
        }
    }
    out
}

struct Grounder<'a> {
    q: Querier<'a>,
    prep: HashMap<OccId, Prep>,
    n: usize,
    work: u64,
}

fn bind(env: &mut Assignment, vars: &[Var], vals: &[u32]) {
    for (v, d) in vars.iter().zip(vals) {
        env.set(*v, Some(*d));
    }
}

fn unbind(env: &mut Assignment, vars: &[Var]) {
    for v in vars {
        env.set(*v, None);
    }
}

fn value(t: &Term, env: &Assignment) -> u32 {
    let v = t.as_var().expect("argument is a variable");
    env.get(v).expect("argument is assigned")
}

/// The ground instance of a literal under a total assignment of its variables.
fn instance(f: &Formula, env: &Assignment) -> GFormula {
    match &f.kind {
        Kind::True => GFormula::True,
        Kind::False => GFormula::False,
        Kind::Atom(p, args) => GFormula::atom(*p, args.iter().map(|a| value(a, env)).collect()),
        Kind::Eq(Term::App(g, args), y) | Kind::Eq(y, Term::App(g, args)) => {
            let mut vals: Vec<u32> = args.iter().map(|a| value(a, env)).collect();
            vals.push(value(y, env));
            GFormula::atom(*g, vals)
        }
        Kind::Eq(a, b) => GFormula::Eq(value(a, env), value(b, env)),
        Kind::Not(g) => GFormula::not(instance(g, env)),
        _ => unreachable!("not a literal"),
    }
}

impl Grounder<'_> {
    /// Tuples over `vars` to expand for `id`, or `None` when some tuple
    /// makes the whole context decided (`cf` in a conjunctive context, `ct`
    /// in a disjunctive one).
    fn scan(&mut self, p: &Prep, conj: bool, env: &mut Assignment, vars: &[Var]) -> Result<Option<Vec<Vec<u32>>>, GroundError> {
        let (hit, skip) = if conj { (p.cf, p.ct) } else { (p.ct, p.cf) };
        if p.dense {
            let mut out = Vec::new();
            for t in all_tuples(vars.len(), self.n) {
                bind(env, vars, &t);
                let decided = self.q.holds(hit, env);
                let skipped = self.q.holds(skip, env);
                unbind(env, vars);
                if decided? {
                    return Ok(None);
                }
                if !skipped? {
                    out.push(t);
                }
            }
            return Ok(Some(out));
        }
        let mut found = false;
        self.q.for_each(hit, env, vars, &mut |_| {
            found = true;
            false
        })?;
        if found {
            return Ok(None);
        }
        let mut out = Vec::new();
        self.q.for_each(p.open, env, vars, &mut |t| {
            out.push(t.to_vec());
            true
        })?;
        out.sort();
        Ok(Some(out))
    }

    fn unassigned(&self, f: &Formula, env: &Assignment) -> (Prep, Vec<Var>) {
        let p = self.prep[&f.id].clone();
        let vars = p.free.iter().copied().filter(|v| env.get(*v).is_none()).collect();
        (p, vars)
    }

    /// Grounding of the universal closure of `f` over its unassigned variables.
    fn conj(&mut self, f: &Formula, env: &mut Assignment) -> Result<GFormula, GroundError> {
        match &f.kind {
            Kind::Forall(v, g) => {
                let old = env.set(*v, None);
                let r = self.conj(g, env);
                env.set(*v, old);
                r
            }
            Kind::And(gs) => {
                let mut out = Vec::with_capacity(gs.len());
                for g in gs {
                    let r = self.conj(g, env)?;
                    if r == GFormula::False {
                        return Ok(r);
                    }
                    out.push(r);
                }
                Ok(GFormula::and(out))
            }
            _ => self.expand(f, env, true),
        }
    }

    /// Grounding of the existential closure of `f` over its unassigned variables.
    fn disj(&mut self, f: &Formula, env: &mut Assignment) -> Result<GFormula, GroundError> {
        match &f.kind {
            Kind::Exists(v, g) => {
                let old = env.set(*v, None);
                let r = self.disj(g, env);
                env.set(*v, old);
                r
            }
            Kind::Or(gs) => {
                let mut out = Vec::with_capacity(gs.len());
                for g in gs {
                    let r = self.disj(g, env)?;
                    if r == GFormula::True {
                        return Ok(r);
                    }
                    out.push(r);
                }
                Ok(GFormula::or(out))
            }
            _ => self.expand(f, env, false),
        }
    }

    /// Instantiates the unassigned variables of a literal, or of a formula
    /// whose connective does not match the context.
    fn expand(&mut self, f: &Formula, env: &mut Assignment, conj: bool) -> Result<GFormula, GroundError> {
        let (p, vars) = self.unassigned(f, env);
        let Some(tuples) = self.scan(&p, conj, env, &vars)? else {
            return Ok(if conj { GFormula::False } else { GFormula::True });
        };
        let absorbing = if conj { GFormula::False } else { GFormula::True };
        let mut out = Vec::with_capacity(tuples.len());
        for t in tuples {
            self.work += 1;
            bind(env, &vars, &t);
            let g = if f.is_literal() {
                Ok(instance(f, env))
            } else if conj {
                self.disj(f, env)
            } else {
                self.conj(f, env)
            };
            unbind(env, &vars);
            let g = g?;
            if g == absorbing {
                return Ok(g);
            }
            out.push(g);
        }
        Ok(if conj { GFormula::and(out) } else { GFormula::or(out) })
    }

    fn definition(&mut self, d: &Definition) -> Result<GDefinition, GroundError> {
        let mut out = GDefinition { defined: d.defined(), rules: Vec::new() };
        for r in &d.rules {
            let p = self.prep[&r.body.id].clone();
            let z: Vec<Var> = r.head_vars.iter().copied().filter(|v| !p.free.contains(v)).collect();
            let mut env = Assignment::new();
            let mut tuples = Vec::new();
            self.q.for_each(p.possible, &env, &p.free, &mut |t| {
                tuples.push(t.to_vec());
                true
            })?;
            tuples.sort();
            for t in tuples {
                self.work += 1;
                bind(&mut env, &p.free, &t);
                let body = if self.q.holds(p.ct, &env)? { GFormula::True } else { self.conj(&r.body, &mut env)? };
                if body != GFormula::False {
                    for extra in all_tuples(z.len(), self.n) {
                        self.work += 1;
                        bind(&mut env, &z, &extra);
                        let args = r.head_vars.iter().map(|v| env.get(*v).expect("head variable bound")).collect();
                        out.rules.push(GRule { head: GAtom { sym: r.head, args }, body: body.clone() });
                    }
                    unbind(&mut env, &z);
                }
                unbind(&mut env, &p.free);
            }
        }
        Ok(out)
    }

    /// Unit literals for the atoms the bounds decide, deduplicated per symbol.
    fn unit_literals(&mut self, c: &CMap, t: &Theory) -> Result<BTreeSet<(GAtom, bool)>, GroundError> {
        let mut facts: BTreeSet<(GAtom, bool)> = BTreeSet::new();
        let mut covered: BTreeSet<SymId> = BTreeSet::new();
        for (sym, can) in c.canonicals() {
            if t.vocab.is_input(sym) {
                continue;
            }
            covered.insert(sym);
            for (b, truth) in [(can.ct, true), (can.cf, false)] {
                if c.mgr.is_bot(b) {
                    continue;
                }
                for args in self.q.all(b, &can.vars)? {
                    facts.insert((GAtom { sym, args }, truth));
                }
            }
        }
        let mut atoms = Vec::new();
        for root in t.roots() {
            root.visit(&mut |f| {
                if let Some((sym, vars)) = crate::bounds::atom_args(f) {
                    if !t.vocab.is_input(sym) && !covered.contains(&sym) {
                        atoms.push((f.id, sym, vars));
                    }
                }
            });
        }
        for (id, sym, vars) in atoms {
            for (b, truth) in [(c.ct(id), true), (c.cf(id), false)] {
                if c.mgr.is_bot(b) {
                    continue;
                }
                let mut distinct = vars.clone();
                distinct.sort();
                distinct.dedup();
                for vals in self.q.all(b, &distinct)? {
                    let args = vars.iter().map(|v| vals[distinct.binary_search(v).unwrap()]).collect();
                    facts.insert((GAtom { sym, args }, truth));
                }
            }
        }
        Ok(facts)
    }
}

/// Whether `a` is `F(x̄) = v` and `known` gives `F(x̄)` a different value.
fn other_value_known(vocab: &Vocabulary, known: &BTreeMap<GAtom, bool>, a: &GAtom) -> bool {
    if !vocab.is_func(a.sym) {
        return false;
    }
    let (args, _) = a.args.split_at(a.args.len() - 1);
    let mut lo = args.to_vec();
    lo.push(0);
    let mut hi = args.to_vec();
    hi.push(u32::MAX);
    let lo = GAtom { sym: a.sym, args: lo };
    let hi = GAtom { sym: a.sym, args: hi };
    known.range(lo..=hi).any(|(b, v)| *v && b.args != a.args)
}

/// Grounds `t` over `s`, skipping instances decided by the bounds of `c`.
///
/// `c` must be tolerant for the definitions of `t` and its bounds may not
/// overlap in `s`.
pub fn ground_with_bounds(t: &Theory, s: &FiniteStructure, c: &mut CMap) -> Result<(GroundTheory, GroundStats), GroundError> {
    if !t.is_tnf() {
        return Err(GroundError::NotTnf);
    }
    let domain = s.domain().to_vec();
    if t.sentences.iter().any(|f| c.mgr.is_top(c.cf(f.id))) {
        return Ok((GroundTheory::unsat(t.vocab.clone(), domain), GroundStats::default()));
    }
    if let Some(id) = intolerant_occurrence(c, t) {
        return Err(GroundError::NotTolerant(id));
    }
    match check_consistency(c, Some(s))? {
        Consistency::Consistent => {}
        Consistency::IsigmaInconsistent(id) | Consistency::Inconsistent(id) => return Err(GroundError::Inconsistent(id)),
    }
    let prep = prepare(c, t, s);
    let c: &CMap = c;
    let mut gr = Grounder { q: Querier::new(&c.mgr, s), prep, n: s.size(), work: 0 };
    let mut g = GroundTheory::new(t.vocab.clone(), domain);
    for d in dependency_order(&t.definitions) {
        let gd = gr.definition(d)?;
        g.definitions.push(gd);
    }
    for f in &t.sentences {
        if c.mgr.is_top(c.ct(f.id)) {
            continue;
        }
        let r = gr.conj(f, &mut Assignment::new())?;
        g.push_sentence(r);
    }
    // Facts the rest of the grounding already forces would only add size.
    let mut known = g.implied_literals(s)?;
    let mut units: Vec<(GAtom, bool)> = gr.unit_literals(c, t)?.into_iter().collect();
    // Positive function values first, since they imply the negative ones.
    units.sort_by_key(|(_, truth)| !truth);
    for (a, truth) in units {
        if known.get(&a) == Some(&truth) || (!truth && other_value_known(&g.vocab, &known, &a)) {
            continue;
        }
        g.push_sentence(if truth { GFormula::Atom(a.clone()) } else { GFormula::not(GFormula::Atom(a.clone())) });
        known.insert(a, truth);
        g.close_literals(s, &mut known)?;
    }
    let stats = GroundStats { instantiations: gr.work, probes: gr.q.probes() };
    Ok((g, stats))
}

/// Instantiates every quantifier over the whole domain.
pub fn ground_full(t: &Theory, s: &FiniteStructure) -> Result<(GroundTheory, GroundStats), GroundError> {
    ground_with_bounds(t, s, &mut trivial_cmap(t))
}

/// Replaces input-vocabulary instances by their value in `s` while instantiating.
pub fn ground_reduced(t: &Theory, s: &FiniteStructure) -> Result<(GroundTheory, GroundStats), GroundError> {
    ground_with_bounds(t, s, &mut input_cmap(t))
}
