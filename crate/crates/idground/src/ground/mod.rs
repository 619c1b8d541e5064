//! Ground theories in ground normal form and the algorithms producing them.

mod algo;
mod fog;
mod prop;
mod share;
#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::bounds::BoundsError;
use crate::logic::{OccId, SymId, Vocabulary};
use crate::structure::{all_tuples, EvalError, FiniteStructure, Tv};
use crate::wfs::{well_founded, PropBody, PropProgram};

pub use algo::{ground_full, ground_reduced, ground_with_bounds, GroundStats};
pub use fog::{parse_fog, FogError};
pub use prop::{to_cnf, to_propositional, Cnf, PFormula, PropTheory};
pub use share::apply_sharing;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GroundError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("bounds of occurrence {0} overlap in the input structure")]
    Inconsistent(OccId),
    #[error("bounds of occurrence {0} are not tolerant for the definitions")]
    NotTolerant(OccId),
    #[error("the theory is not in term normal form")]
    NotTnf,
    #[error("ground definitions cannot be written as clauses")]
    RulesInCnf,
}

/// A ground atom. For a function symbol the last argument is the value,
/// so `F(a) = b` is stored as `F` applied to `[a, b]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GAtom {
    pub sym: SymId,
    pub args: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GFormula {
    True,
    False,
    Atom(GAtom),
    Eq(u32, u32),
    Not(Box<GFormula>),
    And(Vec<GFormula>),
    Or(Vec<GFormula>),
    Equiv(Box<GFormula>, Box<GFormula>),
}

impl GFormula {
    pub fn atom(sym: SymId, args: Vec<u32>) -> Self {
        GFormula::Atom(GAtom { sym, args })
    }

    pub fn not(f: GFormula) -> Self {
        match f {
            GFormula::True => GFormula::False,
            GFormula::False => GFormula::True,
            GFormula::Not(g) => *g,
            f => GFormula::Not(Box::new(f)),
        }
    }

    /// Conjunction that flattens nested conjunctions and absorbs constants.
    pub fn and(fs: Vec<GFormula>) -> Self {
        let mut out = Vec::with_capacity(fs.len());
        for f in fs {
            match f {
                GFormula::True => {}
                GFormula::False => return GFormula::False,
                GFormula::And(gs) => out.extend(gs),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => GFormula::True,
            1 => out.pop().unwrap(),
            _ => GFormula::And(out),
        }
    }

    pub fn or(fs: Vec<GFormula>) -> Self {
        let mut out = Vec::with_capacity(fs.len());
        for f in fs {
            match f {
                GFormula::False => {}
                GFormula::True => return GFormula::True,
                GFormula::Or(gs) => out.extend(gs),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => GFormula::False,
            1 => out.pop().unwrap(),
            _ => GFormula::Or(out),
        }
    }

    pub fn is_literal(&self) -> bool {
        match self {
            GFormula::Atom(_) | GFormula::Eq(..) | GFormula::True | GFormula::False => true,
            GFormula::Not(g) => matches!(**g, GFormula::Atom(_) | GFormula::Eq(..)),
            _ => false,
        }
    }

    /// Number of literal leaves; `true` and `false` count as one each.
    pub fn literal_count(&self) -> usize {
        match self {
            GFormula::True | GFormula::False | GFormula::Atom(_) | GFormula::Eq(..) => 1,
            GFormula::Not(g) => g.literal_count(),
            GFormula::And(gs) | GFormula::Or(gs) => gs.iter().map(|g| g.literal_count()).sum(),
            GFormula::Equiv(a, b) => a.literal_count() + b.literal_count(),
        }
    }

    pub fn visit_atoms(&self, f: &mut dyn FnMut(&GAtom)) {
        match self {
            GFormula::Atom(a) => f(a),
            GFormula::True | GFormula::False | GFormula::Eq(..) => {}
            GFormula::Not(g) => g.visit_atoms(f),
            GFormula::And(gs) | GFormula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
            GFormula::Equiv(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Truth in a total structure interpreting every symbol that occurs.
    pub fn holds(&self, m: &FiniteStructure) -> Result<bool, EvalError> {
        Ok(match self {
            GFormula::True => true,
            GFormula::False => false,
            GFormula::Atom(a) => atom_value(a, m)?,
            GFormula::Eq(a, b) => a == b,
            GFormula::Not(g) => !g.holds(m)?,
            GFormula::And(gs) => {
                for g in gs {
                    if !g.holds(m)? {
                        return Ok(false);
                    }
                }
                true
            }
            GFormula::Or(gs) => {
                for g in gs {
                    if g.holds(m)? {
                        return Ok(true);
                    }
                }
                false
            }
            GFormula::Equiv(a, b) => a.holds(m)? == b.holds(m)?,
        })
    }
}

pub(crate) fn atom_value(a: &GAtom, m: &FiniteStructure) -> Result<bool, EvalError> {
    let missing = || EvalError::Uninterpreted(m.vocab.name(a.sym).to_string());
    if m.vocab.is_func(a.sym) {
        let (args, val) = a.args.split_at(a.args.len() - 1);
        Ok(m.apply(a.sym, args).ok_or_else(missing)? == val[0])
    } else {
        m.holds(a.sym, &a.args).ok_or_else(missing)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GRule {
    pub head: GAtom,
    pub body: GFormula,
}

/// The ground rules stemming from one definition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GDefinition {
    pub defined: Vec<SymId>,
    pub rules: Vec<GRule>,
}

impl GDefinition {
    /// Evaluates the ground rules to their well-founded model, valuing atoms
    /// of other symbols with `leaf`. Returns the offset of each defined symbol
    /// into the solved program.
    fn solve(&self, m: &FiniteStructure, leaf: &dyn Fn(&GAtom) -> Result<Tv, EvalError>) -> Result<(Vec<(SymId, usize)>, PropProgram), EvalError> {
        let n = m.size();
        let mut offset = Vec::new();
        let mut total = 0;
        for p in &self.defined {
            offset.push((*p, total));
            total += crate::structure::tuple_count(m.vocab.arity(*p), n);
        }
        let index = |a: &GAtom| -> Option<usize> {
            offset.iter().find(|(p, _)| *p == a.sym).map(|(_, o)| o + crate::structure::rank(&a.args, n))
        };
        let mut prog = PropProgram::new(total);
        for r in &self.rules {
            let head = index(&r.head).expect("head of a defined symbol");
            prog.add_rule(head, to_body(&r.body, m, &index, leaf)?);
        }
        well_founded(&mut prog);
        Ok((offset, prog))
    }

    /// Whether the defined atoms of `m` form the two-valued well-founded
    /// model of the ground rules given the rest of `m`.
    pub fn satisfied(&self, m: &FiniteStructure) -> Result<bool, EvalError> {
        let (offset, prog) = self.solve(m, &|a| atom_value(a, m).map(Tv::from_bool))?;
        for (p, o) in &offset {
            for (i, t) in all_tuples(m.vocab.arity(*p), m.size()).enumerate() {
                let want = Tv::from_bool(m.holds(*p, &t).ok_or_else(|| EvalError::Uninterpreted(m.vocab.name(*p).to_string()))?);
                if prog.values[o + i] != want {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Defined atoms the well-founded model decides when other atoms are valued by `leaf`.
    fn decided(&self, s: &FiniteStructure, leaf: &dyn Fn(&GAtom) -> Result<Tv, EvalError>) -> Result<Vec<(GAtom, bool)>, EvalError> {
        let (offset, prog) = self.solve(s, leaf)?;
        let mut out = Vec::new();
        for (p, o) in &offset {
            for (i, args) in all_tuples(s.vocab.arity(*p), s.size()).enumerate() {
                match prog.values[o + i] {
                    Tv::T => out.push((GAtom { sym: *p, args }, true)),
                    Tv::F => out.push((GAtom { sym: *p, args }, false)),
                    Tv::U => {}
                }
            }
        }
        Ok(out)
    }
}

fn to_body(
    f: &GFormula,
    m: &FiniteStructure,
    index: &dyn Fn(&GAtom) -> Option<usize>,
    leaf: &dyn Fn(&GAtom) -> Result<Tv, EvalError>,
) -> Result<PropBody, EvalError> {
    let rec = |g: &GFormula| to_body(g, m, index, leaf);
    Ok(match f {
        GFormula::Atom(a) => match index(a) {
            Some(i) => PropBody::Atom(i),
            None => PropBody::Const(leaf(a)?),
        },
        GFormula::True | GFormula::False | GFormula::Eq(..) => PropBody::Const(Tv::from_bool(f.holds(m)?)),
        GFormula::Not(g) => PropBody::Not(Box::new(rec(g)?)),
        GFormula::And(gs) => PropBody::And(gs.iter().map(rec).collect::<Result<_, _>>()?),
        GFormula::Or(gs) => PropBody::Or(gs.iter().map(rec).collect::<Result<_, _>>()?),
        GFormula::Equiv(a, b) => {
            let (a, b) = (rec(a)?, rec(b)?);
            let both = PropBody::And(vec![a.clone(), b.clone()]);
            let neither = PropBody::And(vec![PropBody::Not(Box::new(a)), PropBody::Not(Box::new(b))]);
            PropBody::Or(vec![both, neither])
        }
    })
}

/// A theory without quantifiers whose atoms take domain elements as arguments.
#[derive(Clone, Debug)]
pub struct GroundTheory {
    pub vocab: Vocabulary,
    pub domain: Vec<String>,
    pub sentences: Vec<GFormula>,
    pub definitions: Vec<GDefinition>,
}

impl GroundTheory {
    /// Ground literals true in every model expanding the input structure `s`:
    /// the literal sentences, closed under the completion and the
    /// well-founded model of every definition.
    pub fn implied_literals(&self, s: &FiniteStructure) -> Result<BTreeMap<GAtom, bool>, EvalError> {
        let mut known = BTreeMap::new();
        for f in &self.sentences {
            match f {
                GFormula::Atom(a) => known.insert(a.clone(), true),
                GFormula::Not(g) => match g.as_ref() {
                    GFormula::Atom(a) => known.insert(a.clone(), false),
                    _ => None,
                },
                _ => None,
            };
        }
        self.close_literals(s, &mut known)?;
        Ok(known)
    }

    /// Extends `known` with the literals it forces through the definitions.
    pub fn close_literals(&self, s: &FiniteStructure, known: &mut BTreeMap<GAtom, bool>) -> Result<(), EvalError> {
        if self.definitions.is_empty() {
            return Ok(());
        }
        let mut heads: BTreeMap<&GAtom, Vec<&GFormula>> = BTreeMap::new();
        for r in self.rules() {
            heads.entry(&r.head).or_default().push(&r.body);
        }
        loop {
            let mut found = Vec::new();
            {
                let leaf = |a: &GAtom| {
                    if s.vocab.is_input(a.sym) {
                        atom_value(a, s).map(Tv::from_bool)
                    } else {
                        Ok(known.get(a).map_or(Tv::U, |v| Tv::from_bool(*v)))
                    }
                };
                for d in &self.definitions {
                    found.extend(d.decided(s, &leaf)?);
                }
                // Completion: a head holds iff one of its bodies does.
                for (head, bodies) in &heads {
                    let mut best = Tv::F;
                    for b in bodies {
                        best = best.max(to_body(b, s, &|_| None, &leaf)?.eval(&[]));
                    }
                    if best != Tv::U {
                        found.push(((*head).clone(), best == Tv::T));
                    }
                }
            }
            let before = known.len();
            for (a, v) in found {
                known.entry(a).or_insert(v);
            }
            if known.len() == before {
                return Ok(());
            }
        }
    }

    pub fn new(vocab: Vocabulary, domain: Vec<String>) -> Self {
        GroundTheory { vocab, domain, sentences: Vec::new(), definitions: Vec::new() }
    }

    /// The theory `{false}`.
    pub fn unsat(vocab: Vocabulary, domain: Vec<String>) -> Self {
        let mut g = Self::new(vocab, domain);
        g.sentences.push(GFormula::False);
        g
    }

    pub fn rules(&self) -> impl Iterator<Item = &GRule> {
        self.definitions.iter().flat_map(|d| d.rules.iter())
    }

    pub fn is_unsat_marker(&self) -> bool {
        self.sentences == [GFormula::False] && self.definitions.is_empty()
    }

    /// Adds a sentence, splitting top-level conjunctions and dropping `true`.
    pub fn push_sentence(&mut self, f: GFormula) {
        match f {
            GFormula::True => {}
            GFormula::And(gs) => self.sentences.extend(gs),
            f => self.sentences.push(f),
        }
    }

    pub fn holds(&self, m: &FiniteStructure) -> Result<bool, EvalError> {
        for s in &self.sentences {
            if !s.holds(m)? {
                return Ok(false);
            }
        }
        for d in &self.definitions {
            if !d.satisfied(m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn atom_text(&self, a: &GAtom) -> String {
        let mut s = String::new();
        self.write_atom(&mut s, a);
        s
    }

    fn write_atom(&self, s: &mut String, a: &GAtom) {
        s.push_str(self.vocab.name(a.sym));
        let (args, val) = if self.vocab.is_func(a.sym) { a.args.split_at(a.args.len() - 1) } else { (&a.args[..], &[][..]) };
        if !args.is_empty() {
            s.push('(');
            for (i, d) in args.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&self.domain[*d as usize]);
            }
            s.push(')');
        }
        if let Some(v) = val.first() {
            s.push_str(" = ");
            s.push_str(&self.domain[*v as usize]);
        }
    }

    /// Writes `f`; `ctx` is the binding strength of the surrounding
    /// operator (0 top, 1 `|`, 2 `&`, 3 unary).
    fn write(&self, s: &mut String, f: &GFormula, ctx: u8) {
        match f {
            GFormula::True => s.push_str("true"),
            GFormula::False => s.push_str("false"),
            GFormula::Atom(a) => {
                let paren = ctx >= 3 && self.vocab.is_func(a.sym);
                if paren {
                    s.push('(');
                }
                self.write_atom(s, a);
                if paren {
                    s.push(')');
                }
            }
            GFormula::Eq(a, b) => {
                let _ = write!(s, "{}{} = {}{}", if ctx >= 3 { "(" } else { "" }, self.domain[*a as usize], self.domain[*b as usize], if ctx >= 3 { ")" } else { "" });
            }
            GFormula::Not(g) => {
                s.push('~');
                self.write(s, g, 3);
            }
            GFormula::And(gs) | GFormula::Or(gs) => {
                let (op, level) = if matches!(f, GFormula::And(_)) { (" & ", 2) } else { (" | ", 1) };
                let paren = ctx > level;
                if paren {
                    s.push('(');
                }
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        s.push_str(op);
                    }
                    self.write(s, g, level + 1);
                }
                if paren {
                    s.push(')');
                }
            }
            GFormula::Equiv(a, b) => {
                if ctx > 0 {
                    s.push('(');
                }
                self.write(s, a, 1);
                s.push_str(" <=> ");
                self.write(s, b, 1);
                if ctx > 0 {
                    s.push(')');
                }
            }
        }
    }

    pub fn formula_text(&self, f: &GFormula) -> String {
        let mut s = String::new();
        self.write(&mut s, f, 0);
        s
    }

    /// The `.fog` serialization: a header line, one sentence per line, and
    /// each definition as a braced block of `Head <- body.` lines.
    pub fn to_fog(&self) -> String {
        let mut s = String::from("fog 1\n");
        for f in &self.sentences {
            self.write(&mut s, f, 0);
            s.push_str(".\n");
        }
        for d in &self.definitions {
            s.push_str("{\n");
            for r in &d.rules {
                self.write_atom(&mut s, &r.head);
                s.push_str(" <- ");
                self.write(&mut s, &r.body, 0);
                s.push_str(".\n");
            }
            s.push_str("}\n");
        }
        s
    }
}

/// Literal occurrences in sentences and rule bodies, plus one per rule.
pub fn grounding_size(g: &GroundTheory) -> usize {
    let sentences: usize = g.sentences.iter().map(|f| f.literal_count()).sum();
    let rules: usize = g.rules().map(|r| r.body.literal_count() + 1).sum();
    sentences + rules
}
