//! Propositional form of a grounding, clausification and DIMACS output.

use std::collections::HashMap;
use std::fmt::Write;

use super::{atom_value, GAtom, GFormula, GroundError, GroundTheory};
use crate::structure::{all_tuples, EvalError, FiniteStructure};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PFormula {
    True,
    False,
    Var(u32),
    Not(Box<PFormula>),
    And(Vec<PFormula>),
    Or(Vec<PFormula>),
    Equiv(Box<PFormula>, Box<PFormula>),
}

impl PFormula {
    fn not(f: PFormula) -> Self {
        match f {
            PFormula::True => PFormula::False,
            PFormula::False => PFormula::True,
            PFormula::Not(g) => *g,
            f => PFormula::Not(Box::new(f)),
        }
    }

    fn junction(fs: Vec<PFormula>, conj: bool) -> Self {
        let (unit, zero) = if conj { (PFormula::True, PFormula::False) } else { (PFormula::False, PFormula::True) };
        let mut out = Vec::new();
        for f in fs {
            if f == unit {
                continue;
            }
            if f == zero {
                return zero;
            }
            match f {
                PFormula::And(gs) if conj => out.extend(gs),
                PFormula::Or(gs) if !conj => out.extend(gs),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => unit,
            1 => out.pop().unwrap(),
            _ if conj => PFormula::And(out),
            _ => PFormula::Or(out),
        }
    }

    fn equiv(a: PFormula, b: PFormula) -> Self {
        match (a, b) {
            (PFormula::True, f) | (f, PFormula::True) => f,
            (PFormula::False, f) | (f, PFormula::False) => PFormula::not(f),
            (a, b) => PFormula::Equiv(Box::new(a), Box::new(b)),
        }
    }

    pub fn eval(&self, vals: &[bool]) -> bool {
        match self {
            PFormula::True => true,
            PFormula::False => false,
            PFormula::Var(v) => vals[*v as usize],
            PFormula::Not(g) => !g.eval(vals),
            PFormula::And(gs) => gs.iter().all(|g| g.eval(vals)),
            PFormula::Or(gs) => gs.iter().any(|g| g.eval(vals)),
            PFormula::Equiv(a, b) => a.eval(vals) == b.eval(vals),
        }
    }
}

/// A propositional variable and the ground atom it stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropAtom {
    /// `P_a_b` for `P(a,b)`, `F_a_b` for `F(a) = b`.
    pub name: String,
    /// The atom in ground syntax.
    pub text: String,
}

#[derive(Clone, Debug, Default)]
pub struct PropTheory {
    pub atoms: Vec<PropAtom>,
    pub sentences: Vec<PFormula>,
    /// Ground rules as `(head variable, body)`, grouped per definition.
    pub definitions: Vec<Vec<(u32, PFormula)>>,
}

struct Translator<'a> {
    g: &'a GroundTheory,
    s: &'a FiniteStructure,
    index: HashMap<GAtom, u32>,
    atoms: Vec<PropAtom>,
}

impl Translator<'_> {
    fn var(&mut self, a: &GAtom) -> u32 {
        if let Some(v) = self.index.get(a) {
            return *v;
        }
        let v = self.atoms.len() as u32;
        let mut name = self.g.vocab.name(a.sym).to_string();
        for d in &a.args {
            name.push('_');
            name.push_str(&self.g.domain[*d as usize]);
        }
        self.atoms.push(PropAtom { name, text: self.g.atom_text(a) });
        self.index.insert(a.clone(), v);
        v
    }

    fn formula(&mut self, f: &GFormula) -> Result<PFormula, EvalError> {
        Ok(match f {
            GFormula::True => PFormula::True,
            GFormula::False => PFormula::False,
            GFormula::Eq(a, b) => if a == b { PFormula::True } else { PFormula::False },
            GFormula::Atom(a) if self.g.vocab.is_input(a.sym) => {
                if atom_value(a, self.s)? {
                    PFormula::True
                } else {
                    PFormula::False
                }
            }
            GFormula::Atom(a) => PFormula::Var(self.var(a)),
            GFormula::Not(g) => PFormula::not(self.formula(g)?),
            GFormula::And(gs) | GFormula::Or(gs) => {
                let parts = gs.iter().map(|g| self.formula(g)).collect::<Result<Vec<_>, _>>()?;
                PFormula::junction(parts, matches!(f, GFormula::And(_)))
            }
            GFormula::Equiv(a, b) => PFormula::equiv(self.formula(a)?, self.formula(b)?),
        })
    }
}

/// Maps ground atoms to propositional variables, evaluates input atoms and
/// equality in `s`, and adds the exactly-one constraints of every
/// expansion function.
pub fn to_propositional(g: &GroundTheory, s: &FiniteStructure) -> Result<PropTheory, EvalError> {
    let mut tr = Translator { g, s, index: HashMap::new(), atoms: Vec::new() };
    let mut out = PropTheory::default();
    for f in &g.sentences {
        match tr.formula(f)? {
            PFormula::True => {}
            PFormula::And(gs) => out.sentences.extend(gs),
            f => out.sentences.push(f),
        }
    }
    for d in &g.definitions {
        let mut rules = Vec::new();
        for r in &d.rules {
            let head = tr.var(&r.head);
            let body = tr.formula(&r.body)?;
            if body != PFormula::False {
                rules.push((head, body));
            }
        }
        out.definitions.push(rules);
    }
    let n = g.domain.len();
    for f in g.vocab.ids().filter(|f| g.vocab.is_func(*f) && !g.vocab.is_input(*f)) {
        for args in all_tuples(g.vocab.arity(f), n) {
            let vars: Vec<u32> = (0..n as u32)
                .map(|d| {
                    let mut full = args.clone();
                    full.push(d);
                    tr.var(&GAtom { sym: f, args: full })
                })
                .collect();
            out.sentences.push(PFormula::Or(vars.iter().map(|v| PFormula::Var(*v)).collect()));
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    let neg = |v: u32| PFormula::not(PFormula::Var(v));
                    out.sentences.push(PFormula::Or(vec![neg(vars[i]), neg(vars[j])]));
                }
            }
        }
    }
    out.atoms = tr.atoms;
    Ok(out)
}

/// Clauses over variables `1..=vars`; the first `atoms.len()` variables are
/// the atoms of the propositional theory, the rest are auxiliary.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub atoms: Vec<PropAtom>,
    pub vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

struct Tseitin {
    vars: u32,
    clauses: Vec<Vec<i32>>,
    cache: HashMap<PFormula, i32>,
}

impl Tseitin {
    fn fresh(&mut self) -> i32 {
        self.vars += 1;
        self.vars as i32
    }

    /// A literal equivalent to `f`, adding defining clauses for compound parts.
    fn lit(&mut self, f: &PFormula) -> i32 {
        match f {
            PFormula::Var(v) => return *v as i32 + 1,
            PFormula::Not(g) => return -self.lit(g),
            PFormula::True | PFormula::False => {
                let x = self.fresh();
                self.clauses.push(vec![if *f == PFormula::True { x } else { -x }]);
                return x;
            }
            _ => {}
        }
        if let Some(x) = self.cache.get(f) {
            return *x;
        }
        let x = match f {
            PFormula::And(gs) | PFormula::Or(gs) => {
                let sign = if matches!(f, PFormula::And(_)) { 1 } else { -1 };
                let ls: Vec<i32> = gs.iter().map(|g| self.lit(g) * sign).collect();
                let x = self.fresh() * sign;
                for l in &ls {
                    self.clauses.push(vec![-x, *l]);
                }
                let mut long: Vec<i32> = ls.iter().map(|l| -l).collect();
                long.push(x);
                self.clauses.push(long);
                x * sign
            }
            PFormula::Equiv(a, b) => {
                let (a, b) = (self.lit(a), self.lit(b));
                let x = self.fresh();
                self.clauses.extend([vec![-x, -a, b], vec![-x, a, -b], vec![x, a, b], vec![x, -a, -b]]);
                x
            }
            _ => unreachable!(),
        };
        self.cache.insert(f.clone(), x);
        x
    }

    fn sentence(&mut self, f: &PFormula) {
        match f {
            PFormula::True => {}
            PFormula::False => self.clauses.push(vec![]),
            PFormula::And(gs) => gs.iter().for_each(|g| self.sentence(g)),
            PFormula::Or(gs) => {
                let clause = gs.iter().map(|g| self.lit(g)).collect();
                self.clauses.push(clause);
            }
            PFormula::Equiv(a, b) => {
                let (a, b) = (self.lit(a), self.lit(b));
                self.clauses.extend([vec![-a, b], vec![a, -b]]);
            }
            f => {
                let l = self.lit(f);
                self.clauses.push(vec![l]);
            }
        }
    }
}

/// Definitional clausification; identical subformulas share one auxiliary variable.
pub fn to_cnf(p: &PropTheory) -> Result<Cnf, GroundError> {
    if p.definitions.iter().any(|d| !d.is_empty()) {
        return Err(GroundError::RulesInCnf);
    }
    let mut ts = Tseitin { vars: p.atoms.len() as u32, clauses: Vec::new(), cache: HashMap::new() };
    for f in &p.sentences {
        ts.sentence(f);
    }
    Ok(Cnf { atoms: p.atoms.clone(), vars: ts.vars, clauses: ts.clauses })
}

impl Cnf {
    pub fn to_dimacs(&self) -> String {
        let mut s = String::new();
        for (i, a) in self.atoms.iter().enumerate() {
            let _ = writeln!(s, "c atom {} = {}", i + 1, a.text);
        }
        let _ = writeln!(s, "p cnf {} {}", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(s, "{l} ");
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn satisfied_by(&self, vals: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| vals[l.unsigned_abs() as usize - 1] == (*l > 0)))
    }
}
