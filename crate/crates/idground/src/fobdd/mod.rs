//! First-order binary decision diagrams.
//!
//! Decision nodes test *kernels*: atoms `P(v̄)`, `F(v̄) = w`, `v = w`, or an
//! existentially quantified sub-diagram. Diagrams are reduced, ordered and
//! hash-consed inside a [`Manager`], so equal handles mean equal diagrams.
//! Quantified variables inside kernels are de Bruijn indices, which makes
//! α-equivalent kernels identical.

mod convert;
mod query;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;
use std::sync::atomic::{AtomicU32, Ordering};

pub use query::{Estimate, Querier};

use crate::logic::{SymId, Var, VarPool, Vocabulary};

static NEXT_MANAGER: AtomicU32 = AtomicU32::new(1);

/// First variable id used for temporaries while building diagrams.
const TEMP_BASE: u32 = 0x8000_0000;

/// A variable inside a kernel: free, or bound by the `i`-th enclosing quantifier kernel.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BVar {
    Free(Var),
    Bound(u32),
}

impl BVar {
    fn enc(self) -> u64 {
        match self {
            BVar::Bound(i) => 2 * i as u64,
            BVar::Free(v) => 2 * v.0 as u64 + 1,
        }
    }

    fn shift(self, d: u32) -> BVar {
        match self {
            BVar::Bound(i) => BVar::Bound(i + d),
            v => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    Pred(SymId, Vec<BVar>),
    FuncEq(SymId, Vec<BVar>, BVar),
    Eq(BVar, BVar),
    /// `∃ body`, where `Bound(0)` in `body` is the quantified variable.
    Exists(u32),
}

/// Handle to a diagram owned by one manager.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bdd {
    mgr: u32,
    id: u32,
}

impl Bdd {
    pub fn id(self) -> u32 {
        self.id
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BddError {
    #[error("diagram belongs to a different manager")]
    ForeignHandle,
    #[error("{0} expects {1} operand(s)")]
    Operands(&'static str, usize),
    #[error("renaming is not injective on the free variables")]
    NotInjective,
}

/// Boolean and quantifier operations accepted by [`Manager::combine`].
#[derive(Clone, Debug)]
pub enum Op {
    Neg,
    And,
    Or,
    Exists(Var),
    Forall(Var),
    Rename(HashMap<Var, Var>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    depth: u32,
    sym: u32,
    args: Vec<u64>,
    body: u32,
}

struct KernelData {
    kernel: Kernel,
    key: Key,
    free: Vec<Var>,
    bmask: u64,
}

struct NodeData {
    kernel: u32,
    hi: u32,
    lo: u32,
    free: Vec<Var>,
    bmask: u64,
}

const FALSE: u32 = 0;
const TRUE: u32 = 1;

pub struct Manager {
    id: u32,
    kernels: Vec<KernelData>,
    kernel_ids: HashMap<Kernel, u32>,
    nodes: Vec<NodeData>,
    unique: HashMap<(u32, u32, u32), u32>,
    not_memo: HashMap<u32, u32>,
    and_memo: HashMap<(u32, u32), u32>,
    or_memo: HashMap<(u32, u32), u32>,
    next_temp: u32,
}

impl Default for Manager {
    fn default() -> Self {
        Self::new()
    }
}

fn union(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut out: Vec<Var> = a.iter().chain(b).copied().collect();
    out.sort();
    out.dedup();
    out
}

impl Manager {
    pub fn new() -> Self {
        let leaf = || NodeData { kernel: u32::MAX, hi: 0, lo: 0, free: Vec::new(), bmask: 0 };
        Manager {
            id: NEXT_MANAGER.fetch_add(1, Ordering::Relaxed),
            kernels: Vec::new(),
            kernel_ids: HashMap::new(),
            nodes: vec![leaf(), leaf()],
            unique: HashMap::new(),
            not_memo: HashMap::new(),
            and_memo: HashMap::new(),
            or_memo: HashMap::new(),
            next_temp: TEMP_BASE,
        }
    }

    fn h(&self, id: u32) -> Bdd {
        Bdd { mgr: self.id, id }
    }

    fn own(&self, b: Bdd) -> u32 {
        assert_eq!(b.mgr, self.id, "diagram used with a foreign manager");
        b.id
    }

    pub fn owns(&self, b: Bdd) -> bool {
        b.mgr == self.id
    }

    pub fn top(&self) -> Bdd {
        self.h(TRUE)
    }

    pub fn bot(&self) -> Bdd {
        self.h(FALSE)
    }

    pub fn is_top(&self, b: Bdd) -> bool {
        self.own(b) == TRUE
    }

    pub fn is_bot(&self, b: Bdd) -> bool {
        self.own(b) == FALSE
    }

    /// Number of hash-consed nodes, leaves included.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn fresh_temp(&mut self) -> Var {
        self.next_temp += 1;
        Var(self.next_temp)
    }

    // ---- kernels and nodes ----

    fn intern(&mut self, kernel: Kernel) -> u32 {
        if let Some(&k) = self.kernel_ids.get(&kernel) {
            return k;
        }
        let (key, free, bmask) = match &kernel {
            Kernel::Pred(p, args) => (
                Key { depth: 0, sym: p.0 + 1, args: args.iter().map(|a| a.enc()).collect(), body: 0 },
                args.clone(),
                None,
            ),
            Kernel::FuncEq(f, args, r) => {
                let mut all = args.clone();
                all.push(*r);
                (Key { depth: 0, sym: f.0 + 1, args: all.iter().map(|a| a.enc()).collect(), body: 0 }, all, None)
            }
            Kernel::Eq(a, b) => (Key { depth: 0, sym: 0, args: vec![a.enc(), b.enc()], body: 0 }, vec![*a, *b], None),
            Kernel::Exists(body) => {
                let depth = 1 + self.max_depth(*body);
                let n = &self.nodes[*body as usize];
                (Key { depth, sym: u32::MAX, args: Vec::new(), body: *body }, Vec::new(), Some((n.free.clone(), n.bmask >> 1)))
            }
        };
        let (free, bmask) = match bmask {
            Some(x) => x,
            None => {
                let mut fr: Vec<Var> = free.iter().filter_map(|v| if let BVar::Free(x) = v { Some(*x) } else { None }).collect();
                fr.sort();
                fr.dedup();
                let mask = free.iter().fold(0u64, |m, v| match v {
                    BVar::Bound(i) => {
                        assert!(*i < 64, "quantifier nesting too deep");
                        m | (1 << i)
                    }
                    _ => m,
                });
                (fr, mask)
            }
        };
        let id = self.kernels.len() as u32;
        self.kernels.push(KernelData { kernel: kernel.clone(), key, free, bmask });
        self.kernel_ids.insert(kernel, id);
        id
    }

    fn max_depth(&self, node: u32) -> u32 {
        let mut seen = BTreeSet::new();
        let mut stack = vec![node];
        let mut depth = 0;
        while let Some(n) = stack.pop() {
            if n <= TRUE || !seen.insert(n) {
                continue;
            }
            let nd = &self.nodes[n as usize];
            depth = depth.max(self.kernels[nd.kernel as usize].key.depth);
            stack.push(nd.hi);
            stack.push(nd.lo);
        }
        depth
    }

    fn mk(&mut self, kernel: u32, hi: u32, lo: u32) -> u32 {
        if hi == lo {
            return hi;
        }
        if let Some(&n) = self.unique.get(&(kernel, hi, lo)) {
            return n;
        }
        let k = &self.kernels[kernel as usize];
        debug_assert!(self.root_key(hi).map_or(true, |key| k.key < *key));
        debug_assert!(self.root_key(lo).map_or(true, |key| k.key < *key));
        let (h, l) = (&self.nodes[hi as usize], &self.nodes[lo as usize]);
        let free = union(&union(&k.free, &h.free), &l.free);
        let bmask = k.bmask | h.bmask | l.bmask;
        let id = self.nodes.len() as u32;
        self.nodes.push(NodeData { kernel, hi, lo, free, bmask });
        self.unique.insert((kernel, hi, lo), id);
        id
    }

    fn root_key(&self, n: u32) -> Option<&Key> {
        if n <= TRUE {
            None
        } else {
            Some(&self.kernels[self.nodes[n as usize].kernel as usize].key)
        }
    }

    fn kernel_node(&mut self, kernel: Kernel) -> u32 {
        let k = self.intern(kernel);
        self.mk(k, TRUE, FALSE)
    }

    fn pred_raw(&mut self, p: SymId, args: Vec<BVar>) -> u32 {
        self.kernel_node(Kernel::Pred(p, args))
    }

    fn func_eq_raw(&mut self, f: SymId, args: Vec<BVar>, r: BVar) -> u32 {
        self.kernel_node(Kernel::FuncEq(f, args, r))
    }

    fn eq_raw(&mut self, a: BVar, b: BVar) -> u32 {
        if a == b {
            return TRUE;
        }
        let (a, b) = if a.enc() < b.enc() { (a, b) } else { (b, a) };
        self.kernel_node(Kernel::Eq(a, b))
    }

    pub fn pred(&mut self, p: SymId, args: &[Var]) -> Bdd {
        let id = self.pred_raw(p, args.iter().map(|v| BVar::Free(*v)).collect());
        self.h(id)
    }

    pub fn func_eq(&mut self, f: SymId, args: &[Var], r: Var) -> Bdd {
        let id = self.func_eq_raw(f, args.iter().map(|v| BVar::Free(*v)).collect(), BVar::Free(r));
        self.h(id)
    }

    pub fn eq(&mut self, a: Var, b: Var) -> Bdd {
        let id = self.eq_raw(BVar::Free(a), BVar::Free(b));
        self.h(id)
    }

    // ---- boolean operations ----

    fn not_id(&mut self, a: u32) -> u32 {
        match a {
            FALSE => return TRUE,
            TRUE => return FALSE,
            _ => {}
        }
        if let Some(&r) = self.not_memo.get(&a) {
            return r;
        }
        let NodeData { kernel, hi, lo, .. } = self.nodes[a as usize];
        let (h, l) = (self.not_id(hi), self.not_id(lo));
        let r = self.mk(kernel, h, l);
        self.not_memo.insert(a, r);
        self.not_memo.insert(r, a);
        r
    }

    fn cofactors(&self, n: u32, kernel: u32) -> (u32, u32) {
        if n > TRUE && self.nodes[n as usize].kernel == kernel {
            (self.nodes[n as usize].hi, self.nodes[n as usize].lo)
        } else {
            (n, n)
        }
    }

    fn top_kernel(&self, a: u32, b: u32) -> u32 {
        match (self.root_key(a), self.root_key(b)) {
            (Some(ka), Some(kb)) => {
                if ka <= kb {
                    self.nodes[a as usize].kernel
                } else {
                    self.nodes[b as usize].kernel
                }
            }
            (Some(_), None) => self.nodes[a as usize].kernel,
            (None, Some(_)) => self.nodes[b as usize].kernel,
            (None, None) => unreachable!(),
        }
    }

    fn and_id(&mut self, a: u32, b: u32) -> u32 {
        if a == FALSE || b == FALSE {
            return FALSE;
        }
        if a == TRUE {
            return b;
        }
        if b == TRUE || a == b {
            return a;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&r) = self.and_memo.get(&key) {
            return r;
        }
        let k = self.top_kernel(a, b);
        let (ah, al) = self.cofactors(a, k);
        let (bh, bl) = self.cofactors(b, k);
        let h = self.and_id(ah, bh);
        let l = self.and_id(al, bl);
        let r = self.mk(k, h, l);
        self.and_memo.insert(key, r);
        r
    }

    fn or_id(&mut self, a: u32, b: u32) -> u32 {
        if a == TRUE || b == TRUE {
            return TRUE;
        }
        if a == FALSE {
            return b;
        }
        if b == FALSE || a == b {
            return a;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&r) = self.or_memo.get(&key) {
            return r;
        }
        let k = self.top_kernel(a, b);
        let (ah, al) = self.cofactors(a, k);
        let (bh, bl) = self.cofactors(b, k);
        let h = self.or_id(ah, bh);
        let l = self.or_id(al, bl);
        let r = self.mk(k, h, l);
        self.or_memo.insert(key, r);
        r
    }

    fn ite_id(&mut self, f: u32, g: u32, h: u32) -> u32 {
        match (f, g, h) {
            (TRUE, _, _) => g,
            (FALSE, _, _) => h,
            _ if g == h => g,
            (_, TRUE, FALSE) => f,
            (_, FALSE, TRUE) => self.not_id(f),
            _ => {
                let a = self.and_id(f, g);
                let nf = self.not_id(f);
                let b = self.and_id(nf, h);
                self.or_id(a, b)
            }
        }
    }

    pub fn not(&mut self, a: Bdd) -> Bdd {
        let a = self.own(a);
        let r = self.not_id(a);
        self.h(r)
    }

    pub fn and(&mut self, a: Bdd, b: Bdd) -> Bdd {
        let (a, b) = (self.own(a), self.own(b));
        let r = self.and_id(a, b);
        self.h(r)
    }

    pub fn or(&mut self, a: Bdd, b: Bdd) -> Bdd {
        let (a, b) = (self.own(a), self.own(b));
        let r = self.or_id(a, b);
        self.h(r)
    }

    pub fn and_all(&mut self, xs: impl IntoIterator<Item = Bdd>) -> Bdd {
        xs.into_iter().fold(self.top(), |acc, x| self.and(acc, x))
    }

    pub fn or_all(&mut self, xs: impl IntoIterator<Item = Bdd>) -> Bdd {
        xs.into_iter().fold(self.bot(), |acc, x| self.or(acc, x))
    }

    /// `f → g; h`.
    pub fn ite(&mut self, f: Bdd, g: Bdd, h: Bdd) -> Bdd {
        let (f, g, h) = (self.own(f), self.own(g), self.own(h));
        let r = self.ite_id(f, g, h);
        self.h(r)
    }

    pub fn implies(&mut self, a: Bdd, b: Bdd) -> Bdd {
        let na = self.not(a);
        self.or(na, b)
    }

    // ---- variable maps ----

    /// Rebuilds `n` with every variable mapped by `f`; `f` sees variables as
    /// seen from the root of `n`.
    fn remap(&mut self, n: u32, f: &dyn Fn(BVar) -> BVar) -> u32 {
        let mut memo = HashMap::new();
        self.remap_at(n, 0, f, &mut memo)
    }

    fn remap_at(&mut self, n: u32, d: u32, f: &dyn Fn(BVar) -> BVar, memo: &mut HashMap<(u32, u32), u32>) -> u32 {
        if n <= TRUE {
            return n;
        }
        if let Some(&r) = memo.get(&(n, d)) {
            return r;
        }
        let NodeData { kernel, hi, lo, .. } = self.nodes[n as usize];
        let k = self.map_kernel(kernel, d, f, memo);
        let h = self.remap_at(hi, d, f, memo);
        let l = self.remap_at(lo, d, f, memo);
        let r = self.ite_id(k, h, l);
        memo.insert((n, d), r);
        r
    }

    fn map_kernel(&mut self, kernel: u32, d: u32, f: &dyn Fn(BVar) -> BVar, memo: &mut HashMap<(u32, u32), u32>) -> u32 {
        let mv = |v: BVar| match v {
            BVar::Bound(j) if j < d => v,
            BVar::Bound(j) => f(BVar::Bound(j - d)).shift(d),
            BVar::Free(_) => f(v).shift(d),
        };
        match self.kernels[kernel as usize].kernel.clone() {
            Kernel::Pred(p, args) => self.pred_raw(p, args.into_iter().map(mv).collect()),
            Kernel::FuncEq(g, args, r) => self.func_eq_raw(g, args.into_iter().map(mv).collect(), mv(r)),
            Kernel::Eq(a, b) => self.eq_raw(mv(a), mv(b)),
            Kernel::Exists(body) => {
                let nb = self.remap_at(body, d + 1, f, memo);
                self.exists_body(nb)
            }
        }
    }

    /// `∃` over a body in which `Bound(0)` is the quantified variable.
    fn exists_body(&mut self, body: u32) -> u32 {
        let lower = |v: BVar| match v {
            BVar::Bound(j) => BVar::Bound(j - 1),
            v => v,
        };
        if body <= TRUE || self.nodes[body as usize].bmask & 1 == 0 {
            return self.remap(body, &lower);
        }
        let NodeData { kernel, hi, lo, .. } = self.nodes[body as usize];
        let kd = &self.kernels[kernel as usize];
        if kd.bmask & 1 == 0 {
            // The root test does not mention the quantified variable.
            let kn = self.mk(kernel, TRUE, FALSE);
            let k = self.remap(kn, &lower);
            let h = self.exists_body(hi);
            let l = self.exists_body(lo);
            return self.ite_id(k, h, l);
        }
        if let Kernel::Eq(BVar::Bound(0), t) = kd.kernel {
            if lo == FALSE {
                let t = lower(t);
                return self.remap(hi, &move |v| match v {
                    BVar::Bound(0) => t,
                    BVar::Bound(j) => BVar::Bound(j - 1),
                    v => v,
                });
            }
        }
        self.kernel_node(Kernel::Exists(body))
    }

    fn exists_id(&mut self, x: Var, b: u32) -> u32 {
        if !self.nodes[b as usize].free.contains(&x) {
            return b;
        }
        let body = self.remap(b, &|v| match v {
            BVar::Free(y) if y == x => BVar::Bound(0),
            BVar::Bound(j) => BVar::Bound(j + 1),
            v => v,
        });
        self.exists_body(body)
    }

    pub fn exists(&mut self, x: Var, b: Bdd) -> Bdd {
        let b = self.own(b);
        let r = self.exists_id(x, b);
        self.h(r)
    }

    pub fn forall(&mut self, x: Var, b: Bdd) -> Bdd {
        let nb = self.not(b);
        let e = self.exists(x, nb);
        self.not(e)
    }

    pub fn exists_all(&mut self, xs: &[Var], b: Bdd) -> Bdd {
        xs.iter().rev().fold(b, |acc, x| self.exists(*x, acc))
    }

    pub fn forall_all(&mut self, xs: &[Var], b: Bdd) -> Bdd {
        xs.iter().rev().fold(b, |acc, x| self.forall(*x, acc))
    }

    /// Replaces free variables; the map need not be injective.
    pub fn subst(&mut self, b: Bdd, map: &HashMap<Var, Var>) -> Bdd {
        let b = self.own(b);
        if map.iter().all(|(k, v)| k == v) {
            return self.h(b);
        }
        let r = self.remap(b, &|v| match v {
            BVar::Free(x) => BVar::Free(*map.get(&x).unwrap_or(&x)),
            v => v,
        });
        self.h(r)
    }

    /// Checked entry point for boolean and quantifier operations.
    pub fn combine(&mut self, op: &Op, operands: &[Bdd]) -> Result<Bdd, BddError> {
        if operands.iter().any(|b| !self.owns(*b)) {
            return Err(BddError::ForeignHandle);
        }
        let unary = |name| if operands.len() == 1 { Ok(operands[0]) } else { Err(BddError::Operands(name, 1)) };
        Ok(match op {
            Op::Neg => {
                let a = unary("neg")?;
                self.not(a)
            }
            Op::And => self.and_all(operands.iter().copied()),
            Op::Or => self.or_all(operands.iter().copied()),
            Op::Exists(x) => {
                let a = unary("exists")?;
                self.exists(*x, a)
            }
            Op::Forall(x) => {
                let a = unary("forall")?;
                self.forall(*x, a)
            }
            Op::Rename(map) => {
                let a = unary("rename")?;
                let free = self.free_vars(a);
                let images: BTreeSet<Var> = free.iter().map(|v| *map.get(v).unwrap_or(v)).collect();
                if images.len() != free.len() {
                    return Err(BddError::NotInjective);
                }
                self.subst(a, map)
            }
        })
    }

    // ---- inspection ----

    pub fn free_vars(&self, b: Bdd) -> Vec<Var> {
        self.nodes[self.own(b) as usize].free.clone()
    }

    pub fn mentions(&self, b: Bdd, v: Var) -> bool {
        self.nodes[self.own(b) as usize].free.contains(&v)
    }

    /// Symbols occurring in the diagram.
    pub fn symbols(&self, b: Bdd) -> BTreeSet<SymId> {
        let mut out = BTreeSet::new();
        self.walk(self.own(b), &mut |k| match k {
            Kernel::Pred(p, _) | Kernel::FuncEq(p, _, _) => {
                out.insert(*p);
            }
            _ => {}
        });
        out
    }

    /// Visits every kernel reachable from `n`, including kernels inside quantified bodies.
    fn walk(&self, n: u32, f: &mut dyn FnMut(&Kernel)) {
        let mut seen = BTreeSet::new();
        let mut stack = vec![n];
        while let Some(n) = stack.pop() {
            if n <= TRUE || !seen.insert(n) {
                continue;
            }
            let nd = &self.nodes[n as usize];
            let k = &self.kernels[nd.kernel as usize].kernel;
            f(k);
            if let Kernel::Exists(body) = k {
                stack.push(*body);
            }
            stack.push(nd.hi);
            stack.push(nd.lo);
        }
    }

    /// Internal nodes reachable from `b`, counting nodes inside quantified kernels.
    pub fn node_count(&self, b: Bdd) -> usize {
        let mut n = 0;
        self.walk(self.own(b), &mut |_| n += 1);
        n
    }

    /// Checks that no node has equal children and that kernels strictly
    /// increase along every edge, inside quantified bodies too.
    pub fn is_reduced(&self, b: Bdd) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.own(b)];
        while let Some(n) = stack.pop() {
            if n <= TRUE || !seen.insert(n) {
                continue;
            }
            let nd = &self.nodes[n as usize];
            let key = &self.kernels[nd.kernel as usize].key;
            if nd.hi == nd.lo {
                return false;
            }
            for c in [nd.hi, nd.lo] {
                if self.root_key(c).is_some_and(|ck| ck <= key) {
                    return false;
                }
                stack.push(c);
            }
            if let Kernel::Exists(body) = self.kernels[nd.kernel as usize].kernel {
                stack.push(body);
            }
        }
        true
    }

    /// Root kernel and branches, `None` for leaves.
    pub fn node(&self, b: Bdd) -> Option<(&Kernel, Bdd, Bdd)> {
        let n = self.own(b);
        if n <= TRUE {
            return None;
        }
        let nd = &self.nodes[n as usize];
        Some((&self.kernels[nd.kernel as usize].kernel, self.h(nd.hi), self.h(nd.lo)))
    }

    /// Indented text form: one kernel per line, branches marked `+` (hi) and `-` (lo).
    pub fn dump(&self, b: Bdd, vocab: &Vocabulary, vars: &VarPool) -> String {
        let mut out = String::new();
        self.dump_rec(self.own(b), vocab, vars, 0, 0, &mut out);
        out
    }

    fn var_name(v: BVar, vars: &VarPool, depth: u32) -> String {
        match v {
            BVar::Free(x) if x.0 >= TEMP_BASE => format!("_t{}", x.0 - TEMP_BASE),
            BVar::Free(x) => vars.name(x).to_string(),
            BVar::Bound(j) => format!("#{}", depth as i64 - 1 - j as i64),
        }
    }

    fn kernel_text(&self, k: &Kernel, vocab: &Vocabulary, vars: &VarPool, depth: u32) -> String {
        let names = |args: &[BVar]| args.iter().map(|a| Self::var_name(*a, vars, depth)).collect::<Vec<_>>().join(",");
        match k {
            Kernel::Pred(p, args) if args.is_empty() => vocab.name(*p).to_string(),
            Kernel::Pred(p, args) => format!("{}({})", vocab.name(*p), names(args)),
            Kernel::FuncEq(f, args, r) if args.is_empty() => {
                format!("{} = {}", vocab.name(*f), Self::var_name(*r, vars, depth))
            }
            Kernel::FuncEq(f, args, r) => format!("{}({}) = {}", vocab.name(*f), names(args), Self::var_name(*r, vars, depth)),
            Kernel::Eq(a, b) => format!("{} = {}", Self::var_name(*a, vars, depth), Self::var_name(*b, vars, depth)),
            Kernel::Exists(_) => format!("? #{depth}"),
        }
    }

    fn dump_rec(&self, n: u32, vocab: &Vocabulary, vars: &VarPool, indent: usize, depth: u32, out: &mut String) {
        let pad = "  ".repeat(indent);
        match n {
            TRUE => {
                let _ = writeln!(out, "{pad}true");
            }
            FALSE => {
                let _ = writeln!(out, "{pad}false");
            }
            _ => {
                let nd = &self.nodes[n as usize];
                let k = &self.kernels[nd.kernel as usize].kernel;
                let _ = writeln!(out, "{pad}{}", self.kernel_text(k, vocab, vars, depth));
                if let Kernel::Exists(body) = k {
                    let _ = writeln!(out, "{pad}  :");
                    self.dump_rec(*body, vocab, vars, indent + 2, depth + 1, out);
                }
                let _ = writeln!(out, "{pad}+");
                self.dump_rec(nd.hi, vocab, vars, indent + 1, depth, out);
                let _ = writeln!(out, "{pad}-");
                self.dump_rec(nd.lo, vocab, vars, indent + 1, depth, out);
            }
        }
    }

    // ---- simplification ----

    /// Bounded rewriting: below the hi branch of `a = b`, `b` is replaced by
    /// `a`; at most three passes; never returns a larger diagram.
    pub fn simplify(&mut self, b: Bdd) -> Bdd {
        let orig = self.own(b);
        let mut cur = orig;
        for _ in 0..3 {
            let mut memo = HashMap::new();
            let next = self.simplify_rec(cur, &mut memo);
            if next == cur {
                break;
            }
            cur = next;
        }
        if self.node_count(self.h(cur)) > self.node_count(b) {
            return b;
        }
        self.h(cur)
    }

    fn simplify_rec(&mut self, n: u32, memo: &mut HashMap<u32, u32>) -> u32 {
        if n <= TRUE {
            return n;
        }
        if let Some(&r) = memo.get(&n) {
            return r;
        }
        let NodeData { kernel, hi, lo, .. } = self.nodes[n as usize];
        let k = match self.kernels[kernel as usize].kernel {
            Kernel::Exists(body) => {
                let nb = self.simplify_rec(body, memo);
                self.exists_body(nb)
            }
            _ => self.mk(kernel, TRUE, FALSE),
        };
        let mut h = self.simplify_rec(hi, memo);
        if let Kernel::Eq(a, b) = self.kernels[kernel as usize].kernel {
            h = self.remap(h, &move |v| if v == b { a } else { v });
        }
        let l = self.simplify_rec(lo, memo);
        let r = self.ite_id(k, h, l);
        memo.insert(n, r);
        r
    }
}

#[cfg(test)]
mod tests;
