//! Finite two- and three-valued structures and formula evaluation.

mod eval;
mod parse;

use std::collections::HashMap;
use std::fmt::Write;

pub use eval::{answers, eval3, evaluate, Assignment};
pub(crate) use eval::eval3_mut;
pub use parse::parse_structure;

use crate::logic::{SymId, Vocabulary};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StructError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("unknown domain element {0}")]
    UnknownElement(String),
    #[error("domain element {0} listed twice")]
    DuplicateElement(String),
    #[error("empty domain")]
    EmptyDomain,
    #[error("arity mismatch for {name}: declared {expected}, tuple has {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("function {0} is not total")]
    NotTotal(String),
    #[error("function {0} maps a tuple to two values")]
    Conflict(String),
    #[error("symbol {0} interpreted twice")]
    Reinterpreted(String),
    #[error("structures have different domains or function tables")]
    DomainMismatch,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable {0:?} is not assigned")]
    Unassigned(crate::logic::Var),
    #[error("symbol {0} is not interpreted")]
    Uninterpreted(String),
}

/// Truth values ordered by the truth order `f < u < t`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tv {
    F,
    U,
    T,
}

impl Tv {
    pub fn from_bool(b: bool) -> Tv {
        if b {
            Tv::T
        } else {
            Tv::F
        }
    }

    pub fn not(self) -> Tv {
        match self {
            Tv::T => Tv::F,
            Tv::F => Tv::T,
            Tv::U => Tv::U,
        }
    }

    /// Precision order: `u` below both `t` and `f`.
    pub fn leq_p(self, other: Tv) -> bool {
        self == Tv::U || self == other
    }
}

/// Lexicographic index of a tuple over a domain of size `n`.
pub fn rank(args: &[u32], n: usize) -> usize {
    args.iter().fold(0, |acc, &a| acc * n + a as usize)
}

pub fn unrank(mut r: usize, arity: usize, n: usize) -> Vec<u32> {
    let mut out = vec![0; arity];
    for i in (0..arity).rev() {
        out[i] = (r % n) as u32;
        r /= n;
    }
    out
}

/// `n^arity`, the number of tuples.
pub fn tuple_count(arity: usize, n: usize) -> usize {
    n.pow(arity as u32)
}

/// All tuples of the given arity in lexicographic domain order.
pub fn all_tuples(arity: usize, n: usize) -> impl Iterator<Item = Vec<u32>> {
    (0..tuple_count(arity, n)).map(move |r| unrank(r, arity, n))
}

/// Access to symbol interpretations, shared by the two- and three-valued evaluators.
pub trait Interp {
    fn domain_size(&self) -> usize;
    /// `None` when the predicate is not interpreted.
    fn pred3(&self, p: SymId, args: &[u32]) -> Option<Tv>;
    fn func(&self, f: SymId, args: &[u32]) -> Option<u32>;
    fn vocab(&self) -> &Vocabulary;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncTable {
    pub arity: usize,
    pub values: Vec<u32>,
}

/// A finite domain with tables for some of the symbols of a vocabulary.
#[derive(Clone, Debug)]
pub struct FiniteStructure {
    pub vocab: Vocabulary,
    domain: Vec<String>,
    index: HashMap<String, u32>,
    preds: Vec<Option<Vec<bool>>>,
    funcs: Vec<Option<FuncTable>>,
}

impl FiniteStructure {
    pub fn new(vocab: Vocabulary, domain: Vec<String>) -> Result<Self, StructError> {
        if domain.is_empty() {
            return Err(StructError::EmptyDomain);
        }
        let mut index = HashMap::new();
        for (i, d) in domain.iter().enumerate() {
            if index.insert(d.clone(), i as u32).is_some() {
                return Err(StructError::DuplicateElement(d.clone()));
            }
        }
        let n = vocab.len();
        Ok(FiniteStructure { vocab, domain, index, preds: vec![None; n], funcs: vec![None; n] })
    }

    /// A structure over `{d0, …, d(n-1)}`.
    pub fn with_size(vocab: Vocabulary, n: usize) -> Self {
        Self::new(vocab, (0..n).map(|i| format!("d{i}")).collect()).expect("nonempty domain")
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn element(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn element_name(&self, d: u32) -> &str {
        &self.domain[d as usize]
    }

    pub fn interprets(&self, s: SymId) -> bool {
        self.preds.get(s.0 as usize).is_some_and(Option::is_some)
            || self.funcs.get(s.0 as usize).is_some_and(Option::is_some)
    }

    /// Grows the symbol tables after symbols were added to the vocabulary.
    pub fn extend_vocab(&mut self, vocab: Vocabulary) {
        self.preds.resize(vocab.len(), None);
        self.funcs.resize(vocab.len(), None);
        self.vocab = vocab;
    }

    /// Interprets `p` as the empty relation.
    pub fn clear_pred(&mut self, p: SymId) {
        let a = self.vocab.arity(p);
        self.preds[p.0 as usize] = Some(vec![false; tuple_count(a, self.size())]);
    }

    pub fn set_pred(&mut self, p: SymId, tuples: impl IntoIterator<Item = Vec<u32>>) {
        self.clear_pred(p);
        for t in tuples {
            self.insert(p, &t);
        }
    }

    pub fn set_pred_bits(&mut self, p: SymId, bits: Vec<bool>) {
        assert_eq!(bits.len(), tuple_count(self.vocab.arity(p), self.size()));
        self.preds[p.0 as usize] = Some(bits);
    }

    pub fn insert(&mut self, p: SymId, args: &[u32]) {
        let n = self.size();
        let table = self.preds[p.0 as usize].get_or_insert_with(Vec::new);
        if table.is_empty() {
            table.resize(tuple_count(args.len(), n), false);
        }
        table[rank(args, n)] = true;
    }

    pub fn holds(&self, p: SymId, args: &[u32]) -> Option<bool> {
        self.preds[p.0 as usize].as_ref().map(|t| t[rank(args, self.size())])
    }

    pub fn pred_bits(&self, p: SymId) -> Option<&[bool]> {
        self.preds.get(p.0 as usize)?.as_deref()
    }

    /// True tuples of `p` in domain order.
    pub fn tuples(&self, p: SymId) -> Vec<Vec<u32>> {
        let (a, n) = (self.vocab.arity(p), self.size());
        match &self.preds[p.0 as usize] {
            Some(bits) => bits.iter().enumerate().filter(|(_, b)| **b).map(|(r, _)| unrank(r, a, n)).collect(),
            None => Vec::new(),
        }
    }

    pub fn count(&self, p: SymId) -> usize {
        self.preds[p.0 as usize].as_ref().map_or(0, |t| t.iter().filter(|b| **b).count())
    }

    pub fn set_func(&mut self, f: SymId, values: Vec<u32>) {
        let arity = self.vocab.arity(f);
        assert_eq!(values.len(), tuple_count(arity, self.size()));
        self.funcs[f.0 as usize] = Some(FuncTable { arity, values });
    }

    pub fn func_table(&self, f: SymId) -> Option<&FuncTable> {
        self.funcs.get(f.0 as usize)?.as_ref()
    }

    pub fn apply(&self, f: SymId, args: &[u32]) -> Option<u32> {
        self.funcs[f.0 as usize].as_ref().map(|t| t.values[rank(args, self.size())])
    }

    /// Drops every table except those of `keep`.
    pub fn restrict(&self, keep: impl Fn(SymId) -> bool) -> FiniteStructure {
        let mut out = self.clone();
        for s in self.vocab.ids() {
            if !keep(s) {
                out.preds[s.0 as usize] = None;
                out.funcs[s.0 as usize] = None;
            }
        }
        out
    }

    /// Serializes in the structure file syntax.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "domain = {{ {} }}", self.domain.join("; "));
        for id in self.vocab.ids() {
            let name = self.vocab.name(id);
            let arity = self.vocab.arity(id);
            if let Some(t) = self.func_table(id) {
                if arity == 0 {
                    let _ = writeln!(s, "{name} = {}", self.domain[t.values[0] as usize]);
                } else {
                    let entries: Vec<String> = t
                        .values
                        .iter()
                        .enumerate()
                        .map(|(r, v)| format!("{} -> {}", self.tuple_text(&unrank(r, arity, self.size())), self.domain[*v as usize]))
                        .collect();
                    let _ = writeln!(s, "{name} = {{ {} }}", entries.join("; "));
                }
            } else if self.pred_bits(id).is_some() {
                let entries: Vec<String> = self.tuples(id).iter().map(|t| self.tuple_text(t)).collect();
                let _ = writeln!(s, "{name} = {{ {} }}", entries.join("; "));
            }
        }
        s
    }

    pub fn tuple_text(&self, t: &[u32]) -> String {
        let names: Vec<&str> = t.iter().map(|d| self.domain[*d as usize].as_str()).collect();
        format!("({})", names.join(","))
    }
}

impl Interp for FiniteStructure {
    fn domain_size(&self) -> usize {
        self.size()
    }

    fn pred3(&self, p: SymId, args: &[u32]) -> Option<Tv> {
        self.holds(p, args).map(Tv::from_bool)
    }

    fn func(&self, f: SymId, args: &[u32]) -> Option<u32> {
        self.apply(f, args)
    }

    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }
}

/// Disjoint certainly-true and certainly-false tuple sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table3 {
    pub ct: Vec<bool>,
    pub cf: Vec<bool>,
}

impl Table3 {
    pub fn unknown(len: usize) -> Self {
        Table3 { ct: vec![false; len], cf: vec![false; len] }
    }

    pub fn get(&self, r: usize) -> Tv {
        if self.ct[r] {
            Tv::T
        } else if self.cf[r] {
            Tv::F
        } else {
            Tv::U
        }
    }

    pub fn set(&mut self, r: usize, v: Tv) {
        self.ct[r] = v == Tv::T;
        self.cf[r] = v == Tv::F;
    }

    pub fn is_two_valued(&self) -> bool {
        self.ct.iter().zip(&self.cf).all(|(t, f)| *t || *f)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Precision {
    Less,
    Equal,
    Greater,
    Incomparable,
}

/// A structure whose predicates are three-valued; functions stay two-valued.
#[derive(Clone, Debug)]
pub struct ThreeValued {
    pub base: FiniteStructure,
    preds: Vec<Option<Table3>>,
}

impl ThreeValued {
    /// Lifts a two-valued structure; every interpreted predicate becomes exact.
    pub fn from_two(s: &FiniteStructure) -> Self {
        let preds = s
            .preds
            .iter()
            .map(|t| t.as_ref().map(|bits| Table3 { ct: bits.clone(), cf: bits.iter().map(|b| !b).collect() }))
            .collect();
        ThreeValued { base: s.clone(), preds }
    }

    pub fn size(&self) -> usize {
        self.base.size()
    }

    /// Makes `p` interpreted with every tuple unknown.
    pub fn set_unknown(&mut self, p: SymId) {
        let len = tuple_count(self.base.vocab.arity(p), self.size());
        self.preds[p.0 as usize] = Some(Table3::unknown(len));
    }

    pub fn table(&self, p: SymId) -> Option<&Table3> {
        self.preds.get(p.0 as usize)?.as_ref()
    }

    pub fn table_mut(&mut self, p: SymId) -> Option<&mut Table3> {
        self.preds.get_mut(p.0 as usize)?.as_mut()
    }

    pub fn set_table(&mut self, p: SymId, t: Table3) {
        self.preds[p.0 as usize] = Some(t);
    }

    pub fn get(&self, p: SymId, args: &[u32]) -> Option<Tv> {
        self.table(p).map(|t| t.get(rank(args, self.size())))
    }

    pub fn set(&mut self, p: SymId, args: &[u32], v: Tv) {
        let r = rank(args, self.size());
        self.preds[p.0 as usize].as_mut().expect("interpreted predicate").set(r, v);
    }

    pub fn is_two_valued(&self) -> bool {
        self.preds.iter().flatten().all(Table3::is_two_valued)
    }

    /// The two-valued structure, if every predicate is two-valued.
    pub fn to_two(&self) -> Option<FiniteStructure> {
        if !self.is_two_valued() {
            return None;
        }
        let mut out = self.base.clone();
        for (i, t) in self.preds.iter().enumerate() {
            if let Some(t) = t {
                out.preds[i] = Some(t.ct.clone());
            }
        }
        Some(out)
    }

    /// Pointwise comparison in the precision order.
    pub fn compare_precision(&self, other: &ThreeValued) -> Result<Precision, StructError> {
        if self.base.domain != other.base.domain || self.base.funcs != other.base.funcs {
            return Err(StructError::DomainMismatch);
        }
        let (mut le, mut ge) = (true, true);
        for (a, b) in self.preds.iter().zip(&other.preds) {
            let (a, b) = match (a, b) {
                (Some(a), Some(b)) => (a, b),
                (None, None) => continue,
                _ => return Err(StructError::DomainMismatch),
            };
            for r in 0..a.ct.len() {
                let (x, y) = (a.get(r), b.get(r));
                le &= x.leq_p(y);
                ge &= y.leq_p(x);
            }
        }
        Ok(match (le, ge) {
            (true, true) => Precision::Equal,
            (true, false) => Precision::Less,
            (false, true) => Precision::Greater,
            (false, false) => Precision::Incomparable,
        })
    }
}

impl Interp for ThreeValued {
    fn domain_size(&self) -> usize {
        self.size()
    }

    fn pred3(&self, p: SymId, args: &[u32]) -> Option<Tv> {
        self.get(p, args)
    }

    fn func(&self, f: SymId, args: &[u32]) -> Option<u32> {
        self.base.apply(f, args)
    }

    fn vocab(&self) -> &Vocabulary {
        &self.base.vocab
    }
}
