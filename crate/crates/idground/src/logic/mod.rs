//! Vocabularies, terms, formulas, definitions and theories.

pub mod display;
pub mod parse;
pub mod tnf;
pub mod transform;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use parse::parse_theory;
pub use tnf::to_tnf;
pub use transform::{completion, polarity, push_quantifiers, Polarity};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

/// Position of a formula node inside a theory.
pub type OccId = u32;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("arity mismatch for {name}: declared {expected}, used with {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("symbol {0} declared twice")]
    Redeclared(String),
    #[error("undeclared symbol {0}")]
    Undeclared(String),
    #[error("unknown occurrence {0}")]
    UnknownOccurrence(OccId),
    #[error("ill-formed theory: {0}")]
    IllFormed(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymKind {
    Pred,
    Func,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
    pub kind: SymKind,
}

/// Predicate and function symbols plus the input marker.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymId>,
    input: BTreeSet<SymId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    fn add(&mut self, name: &str, arity: usize, kind: SymKind) -> Result<SymId, LogicError> {
        if self.by_name.contains_key(name) {
            return Err(LogicError::Redeclared(name.to_string()));
        }
        let id = SymId(self.symbols.len() as u32);
        self.symbols.push(Symbol { name: name.to_string(), arity, kind });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_pred(&mut self, name: &str, arity: usize) -> Result<SymId, LogicError> {
        self.add(name, arity, SymKind::Pred)
    }

    pub fn add_func(&mut self, name: &str, arity: usize) -> Result<SymId, LogicError> {
        self.add(name, arity, SymKind::Func)
    }

    pub fn lookup(&self, name: &str) -> Option<SymId> {
        self.by_name.get(name).copied()
    }

    pub fn sym(&self, id: SymId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn name(&self, id: SymId) -> &str {
        &self.symbols[id.0 as usize].name
    }

    pub fn arity(&self, id: SymId) -> usize {
        self.symbols[id.0 as usize].arity
    }

    pub fn is_func(&self, id: SymId) -> bool {
        self.symbols[id.0 as usize].kind == SymKind::Func
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SymId> {
        (0..self.symbols.len() as u32).map(SymId)
    }

    pub fn is_input(&self, id: SymId) -> bool {
        self.input.contains(&id)
    }

    pub fn set_input(&mut self, id: SymId) {
        assert!((id.0 as usize) < self.symbols.len());
        self.input.insert(id);
    }

    pub fn input(&self) -> &BTreeSet<SymId> {
        &self.input
    }

    /// Symbols outside the input vocabulary.
    pub fn expansion(&self) -> Vec<SymId> {
        self.ids().filter(|s| !self.is_input(*s)).collect()
    }
}

/// Variable names. Names starting with `_` are reserved for generated variables.
#[derive(Clone, Debug, Default)]
pub struct VarPool {
    names: Vec<String>,
    counter: usize,
}

impl VarPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// A new variable displayed as `name`, or `name_k` when `name` is taken.
    pub fn named(&mut self, name: &str) -> Var {
        let shown = if self.names.iter().any(|n| n == name) {
            let mut k = 1;
            loop {
                let cand = format!("{name}_{k}");
                if !self.names.contains(&cand) {
                    break cand;
                }
                k += 1;
            }
        } else {
            name.to_string()
        };
        self.names.push(shown);
        Var(self.names.len() as u32 - 1)
    }

    /// A fresh variable in the reserved namespace.
    pub fn fresh(&mut self) -> Var {
        self.counter += 1;
        let name = format!("_v{}", self.counter);
        self.names.push(name);
        Var(self.names.len() as u32 - 1)
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.0 as usize]
    }

    /// The variable displayed as `name`, if any.
    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name).map(|i| Var(i as u32))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    App(SymId, Vec<Term>),
}

impl Term {
    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(..) => None,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn subst(&self, map: &HashMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(*map.get(v).unwrap_or(v)),
            Term::App(f, args) => Term::App(*f, args.iter().map(|a| a.subst(map)).collect()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Kind {
    True,
    False,
    Atom(SymId, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

/// A formula node tagged with its occurrence identifier.
///
/// Equality ignores occurrence identifiers.
#[derive(Clone, Debug)]
pub struct Formula {
    pub id: OccId,
    pub kind: Kind,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::True, Kind::True) | (Kind::False, Kind::False) => true,
            (Kind::Atom(p, a), Kind::Atom(q, b)) => p == q && a == b,
            (Kind::Eq(a1, a2), Kind::Eq(b1, b2)) => a1 == b1 && a2 == b2,
            (Kind::Not(a), Kind::Not(b)) => a == b,
            (Kind::And(a), Kind::And(b)) | (Kind::Or(a), Kind::Or(b)) => a == b,
            (Kind::Exists(x, a), Kind::Exists(y, b)) | (Kind::Forall(x, a), Kind::Forall(y, b)) => {
                x == y && a == b
            }
            _ => false,
        }
    }
}

impl Formula {
    pub fn new(kind: Kind) -> Self {
        Formula { id: 0, kind }
    }

    pub fn top() -> Self {
        Self::new(Kind::True)
    }

    pub fn bot() -> Self {
        Self::new(Kind::False)
    }

    pub fn atom(p: SymId, args: Vec<Term>) -> Self {
        Self::new(Kind::Atom(p, args))
    }

    pub fn atom_vars(p: SymId, vars: &[Var]) -> Self {
        Self::atom(p, vars.iter().map(|v| Term::Var(*v)).collect())
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Self::new(Kind::Eq(a, b))
    }

    pub fn not(f: Formula) -> Self {
        Self::new(Kind::Not(Box::new(f)))
    }

    pub fn and(fs: Vec<Formula>) -> Self {
        Self::new(Kind::And(fs))
    }

    pub fn or(fs: Vec<Formula>) -> Self {
        Self::new(Kind::Or(fs))
    }

    pub fn exists(v: Var, f: Formula) -> Self {
        Self::new(Kind::Exists(v, Box::new(f)))
    }

    pub fn forall(v: Var, f: Formula) -> Self {
        Self::new(Kind::Forall(v, Box::new(f)))
    }

    pub fn forall_all(vs: &[Var], f: Formula) -> Self {
        vs.iter().rev().fold(f, |acc, v| Self::forall(*v, acc))
    }

    pub fn exists_all(vs: &[Var], f: Formula) -> Self {
        vs.iter().rev().fold(f, |acc, v| Self::exists(*v, acc))
    }

    /// `a ⊃ b` as `¬a ∨ b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Self::or(vec![Self::not(a), b])
    }

    /// `a ≡ b` as `(¬a ∨ b) ∧ (a ∨ ¬b)`.
    pub fn equiv(a: Formula, b: Formula) -> Self {
        Self::and(vec![Self::implies(a.clone(), b.clone()), Self::implies(b, a)])
    }

    pub fn children(&self) -> Vec<&Formula> {
        match &self.kind {
            Kind::Not(f) | Kind::Exists(_, f) | Kind::Forall(_, f) => vec![f],
            Kind::And(fs) | Kind::Or(fs) => fs.iter().collect(),
            _ => vec![],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Formula> {
        match &mut self.kind {
            Kind::Not(f) | Kind::Exists(_, f) | Kind::Forall(_, f) => vec![f],
            Kind::And(fs) | Kind::Or(fs) => fs.iter_mut().collect(),
            _ => vec![],
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, Kind::True | Kind::False | Kind::Atom(..) | Kind::Eq(..))
    }

    pub fn is_literal(&self) -> bool {
        match &self.kind {
            Kind::Not(f) => f.is_atomic(),
            _ => self.is_atomic(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match &self.kind {
            Kind::True | Kind::False => {}
            Kind::Atom(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Kind::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Kind::Not(f) => f.collect_free(out),
            Kind::And(fs) | Kind::Or(fs) => fs.iter().for_each(|f| f.collect_free(out)),
            Kind::Exists(v, f) | Kind::Forall(v, f) => {
                let mut inner = BTreeSet::new();
                f.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    /// Every variable occurring in the formula, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match &f.kind {
            Kind::Atom(_, args) => args.iter().for_each(|t| t.collect_vars(&mut out)),
            Kind::Eq(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Kind::Exists(v, _) | Kind::Forall(v, _) => {
                out.insert(*v);
            }
            _ => {}
        });
        out
    }

    /// Preorder traversal.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn symbols(&self) -> BTreeSet<SymId> {
        fn term_syms(t: &Term, out: &mut BTreeSet<SymId>) {
            if let Term::App(s, args) = t {
                out.insert(*s);
                args.iter().for_each(|a| term_syms(a, out));
            }
        }
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match &f.kind {
            Kind::Atom(p, args) => {
                out.insert(*p);
                args.iter().for_each(|t| term_syms(t, &mut out));
            }
            Kind::Eq(a, b) => {
                term_syms(a, &mut out);
                term_syms(b, &mut out);
            }
            _ => {}
        });
        out
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Renames free occurrences of variables.
    pub fn subst_vars(&self, map: &HashMap<Var, Var>) -> Formula {
        let kind = match &self.kind {
            Kind::True => Kind::True,
            Kind::False => Kind::False,
            Kind::Atom(p, args) => Kind::Atom(*p, args.iter().map(|t| t.subst(map)).collect()),
            Kind::Eq(a, b) => Kind::Eq(a.subst(map), b.subst(map)),
            Kind::Not(f) => Kind::Not(Box::new(f.subst_vars(map))),
            Kind::And(fs) => Kind::And(fs.iter().map(|f| f.subst_vars(map)).collect()),
            Kind::Or(fs) => Kind::Or(fs.iter().map(|f| f.subst_vars(map)).collect()),
            Kind::Exists(v, f) | Kind::Forall(v, f) => {
                let inner = if map.contains_key(v) {
                    let mut m = map.clone();
                    m.remove(v);
                    f.subst_vars(&m)
                } else {
                    f.subst_vars(map)
                };
                if matches!(self.kind, Kind::Exists(..)) {
                    Kind::Exists(*v, Box::new(inner))
                } else {
                    Kind::Forall(*v, Box::new(inner))
                }
            }
        };
        Formula { id: self.id, kind }
    }

    /// Copies the formula giving every bound variable a fresh name.
    pub fn rename_bound(&self, vars: &mut VarPool) -> Formula {
        self.rename_bound_with(vars, &HashMap::new())
    }

    fn rename_bound_with(&self, vars: &mut VarPool, map: &HashMap<Var, Var>) -> Formula {
        let kind = match &self.kind {
            Kind::Exists(v, f) | Kind::Forall(v, f) => {
                let nv = vars.fresh();
                let mut m = map.clone();
                m.insert(*v, nv);
                let inner = Box::new(f.rename_bound_with(vars, &m));
                if matches!(self.kind, Kind::Exists(..)) {
                    Kind::Exists(nv, inner)
                } else {
                    Kind::Forall(nv, inner)
                }
            }
            Kind::Not(f) => Kind::Not(Box::new(f.rename_bound_with(vars, map))),
            Kind::And(fs) => Kind::And(fs.iter().map(|f| f.rename_bound_with(vars, map)).collect()),
            Kind::Or(fs) => Kind::Or(fs.iter().map(|f| f.rename_bound_with(vars, map)).collect()),
            _ => return self.subst_vars(map),
        };
        Formula { id: self.id, kind }
    }

    /// True when negations sit only on atoms and atoms are flat.
    pub fn is_tnf(&self) -> bool {
        match &self.kind {
            Kind::True | Kind::False => true,
            Kind::Atom(_, args) => args.iter().all(|t| t.as_var().is_some()),
            Kind::Eq(a, b) => {
                b.as_var().is_some()
                    && match a {
                        Term::Var(_) => true,
                        Term::App(_, args) => args.iter().all(|t| t.as_var().is_some()),
                    }
            }
            Kind::Not(f) => matches!(f.kind, Kind::Atom(..) | Kind::Eq(..)) && f.is_tnf(),
            _ => self.children().iter().all(|c| c.is_tnf()),
        }
    }

    fn renumber(&mut self, next: &mut OccId) {
        self.id = *next;
        *next += 1;
        for c in self.children_mut() {
            c.renumber(next);
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub head: SymId,
    pub head_vars: Vec<Var>,
    pub body: Formula,
}

#[derive(Clone, Debug, Default)]
pub struct Definition {
    pub rules: Vec<Rule>,
}

impl Definition {
    /// Defined predicates in first-appearance order.
    pub fn defined(&self) -> Vec<SymId> {
        let mut out: Vec<SymId> = Vec::new();
        for r in &self.rules {
            if !out.contains(&r.head) {
                out.push(r.head);
            }
        }
        out
    }

    /// Symbols used in bodies that this definition does not define.
    pub fn open(&self) -> BTreeSet<SymId> {
        let def = self.defined();
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.extend(r.body.symbols().into_iter().filter(|s| !def.contains(s)));
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct Theory {
    pub vocab: Vocabulary,
    pub vars: VarPool,
    pub sentences: Vec<Formula>,
    pub definitions: Vec<Definition>,
}

impl Theory {
    pub fn new(vocab: Vocabulary) -> Self {
        Theory { vocab, ..Default::default() }
    }

    /// Reassigns occurrence identifiers in preorder: sentences first, then rule bodies.
    pub fn renumber(&mut self) {
        let mut next = 0;
        for s in &mut self.sentences {
            s.renumber(&mut next);
        }
        for d in &mut self.definitions {
            for r in &mut d.rules {
                r.body.renumber(&mut next);
            }
        }
    }

    /// Roots of all sentences and rule bodies.
    pub fn roots(&self) -> Vec<&Formula> {
        let mut out: Vec<&Formula> = self.sentences.iter().collect();
        for d in &self.definitions {
            out.extend(d.rules.iter().map(|r| &r.body));
        }
        out
    }

    pub fn find(&self, occ: OccId) -> Option<&Formula> {
        let mut found = None;
        for root in self.roots() {
            root.visit(&mut |f| {
                if f.id == occ && found.is_none() {
                    found = Some(f);
                }
            });
        }
        found
    }

    pub fn occurrence_ids(&self) -> Vec<OccId> {
        let mut out = Vec::new();
        for root in self.roots() {
            root.visit(&mut |f| out.push(f.id));
        }
        out
    }

    pub fn is_tnf(&self) -> bool {
        self.roots().iter().all(|f| f.is_tnf())
    }

    pub fn defined_preds(&self) -> BTreeSet<SymId> {
        self.definitions.iter().flat_map(|d| d.defined()).collect()
    }

    /// Checks the structural invariants of a theory.
    pub fn validate(&self) -> Result<(), LogicError> {
        let mut ids = BTreeSet::new();
        for id in self.occurrence_ids() {
            if !ids.insert(id) {
                return Err(LogicError::IllFormed(format!("occurrence {id} is not unique")));
            }
        }
        for s in &self.sentences {
            if !s.free_vars().is_empty() {
                return Err(LogicError::IllFormed(format!("sentence {} has free variables", self.show(s))));
            }
        }
        let mut seen = BTreeSet::new();
        for d in &self.definitions {
            for p in d.defined() {
                if self.vocab.is_input(p) {
                    return Err(LogicError::IllFormed(format!(
                        "input predicate {} is defined",
                        self.vocab.name(p)
                    )));
                }
                if !seen.insert(p) {
                    return Err(LogicError::IllFormed(format!(
                        "predicate {} is defined by two definitions",
                        self.vocab.name(p)
                    )));
                }
            }
            for r in &d.rules {
                let distinct: BTreeSet<Var> = r.head_vars.iter().copied().collect();
                if distinct.len() != r.head_vars.len() {
                    return Err(LogicError::IllFormed(format!(
                        "head arguments of {} are not distinct variables",
                        self.vocab.name(r.head)
                    )));
                }
                if !r.body.free_vars().is_subset(&distinct) {
                    return Err(LogicError::IllFormed(format!(
                        "rule body for {} has variables not in the head",
                        self.vocab.name(r.head)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn show<'a>(&'a self, f: &'a Formula) -> display::Shown<'a> {
        display::Shown { vocab: &self.vocab, vars: &self.vars, f }
    }

    pub fn show_rule(&self, r: &Rule) -> String {
        display::rule_text(&self.vocab, &self.vars, r)
    }

    /// The theory in the input file syntax.
    pub fn to_text(&self) -> String {
        display::theory_text(self)
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
