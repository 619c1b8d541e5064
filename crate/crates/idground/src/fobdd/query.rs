//! Answer enumeration and cost estimation over a two-valued structure.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::{BVar, Bdd, Kernel, Manager, NodeData, FALSE, TRUE};
use crate::logic::{SymId, Var};
use crate::structure::{all_tuples, Assignment, EvalError, FiniteStructure};

/// Evaluates diagrams against one structure, caching predicate tuple lists.
pub struct Querier<'a> {
    mgr: &'a Manager,
    s: &'a FiniteStructure,
    tables: RefCell<HashMap<SymId, Rc<Vec<Vec<u32>>>>>,
    probes: Cell<u64>,
}

type Visit<'f> = dyn FnMut(&[u32]) -> bool + 'f;

impl<'a> Querier<'a> {
    pub fn new(mgr: &'a Manager, s: &'a FiniteStructure) -> Self {
        Querier { mgr, s, tables: RefCell::new(HashMap::new()), probes: Cell::new(0) }
    }

    /// Kernel evaluations and table rows inspected so far.
    pub fn probes(&self) -> u64 {
        self.probes.get()
    }

    fn tick(&self, n: u64) {
        self.probes.set(self.probes.get() + n);
    }

    fn table(&self, p: SymId) -> Result<Rc<Vec<Vec<u32>>>, EvalError> {
        if let Some(t) = self.tables.borrow().get(&p) {
            return Ok(t.clone());
        }
        if self.s.pred_bits(p).is_none() {
            return Err(self.uninterpreted(p));
        }
        let t = Rc::new(self.s.tuples(p));
        self.tables.borrow_mut().insert(p, t.clone());
        Ok(t)
    }

    fn uninterpreted(&self, p: SymId) -> EvalError {
        EvalError::Uninterpreted(self.s.vocab.name(p).to_string())
    }

    fn resolve(v: BVar, env: &Assignment, stack: &[u32]) -> Result<u32, EvalError> {
        match v {
            BVar::Free(x) => env.get(x).ok_or(EvalError::Unassigned(x)),
            BVar::Bound(j) => Ok(stack[stack.len() - 1 - j as usize]),
        }
    }

    fn eval_kernel(&self, k: &Kernel, env: &Assignment, stack: &mut Vec<u32>) -> Result<bool, EvalError> {
        self.tick(1);
        let vals = |args: &[BVar], stack: &[u32]| args.iter().map(|a| Self::resolve(*a, env, stack)).collect::<Result<Vec<_>, _>>();
        Ok(match k {
            Kernel::Pred(p, args) => self.s.holds(*p, &vals(args, stack)?).ok_or_else(|| self.uninterpreted(*p))?,
            Kernel::FuncEq(f, args, r) => {
                let v = self.s.apply(*f, &vals(args, stack)?).ok_or_else(|| self.uninterpreted(*f))?;
                v == Self::resolve(*r, env, stack)?
            }
            Kernel::Eq(a, b) => Self::resolve(*a, env, stack)? == Self::resolve(*b, env, stack)?,
            Kernel::Exists(body) => {
                for d in 0..self.s.size() as u32 {
                    stack.push(d);
                    let r = self.eval_node(*body, env, stack);
                    stack.pop();
                    if r? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    fn eval_node(&self, mut n: u32, env: &Assignment, stack: &mut Vec<u32>) -> Result<bool, EvalError> {
        while n > TRUE {
            let nd = &self.mgr.nodes[n as usize];
            let k = &self.mgr.kernels[nd.kernel as usize].kernel;
            n = if self.eval_kernel(k, env, stack)? { nd.hi } else { nd.lo };
        }
        Ok(n == TRUE)
    }

    /// Truth of `b` under a total assignment of its free variables.
    pub fn holds(&self, b: Bdd, env: &Assignment) -> Result<bool, EvalError> {
        self.eval_node(self.mgr.own(b), env, &mut Vec::new())
    }

    /// Calls `visit` with the values of `vars` for every extension of `env`
    /// satisfying `b`, until `visit` returns false. Variables of `vars` that
    /// `b` does not constrain range over the whole domain.
    pub fn for_each(&self, b: Bdd, env: &Assignment, vars: &[Var], visit: &mut Visit) -> Result<(), EvalError> {
        let n = self.mgr.own(b);
        if let Some(v) = self.mgr.nodes[n as usize].free.iter().find(|v| env.get(**v).is_none() && !vars.contains(v)) {
            return Err(EvalError::Unassigned(*v));
        }
        let mut env = env.clone();
        for v in vars {
            env.set(*v, None);
        }
        self.walk(n, &mut env, vars, visit).map(|_| ())
    }

    /// All answers over `vars`, in domain order.
    pub fn all(&self, b: Bdd, vars: &[Var]) -> Result<Vec<Vec<u32>>, EvalError> {
        let mut out = Vec::new();
        self.for_each(b, &Assignment::new(), vars, &mut |t| {
            out.push(t.to_vec());
            true
        })?;
        out.sort();
        Ok(out)
    }

    /// Some answer over `vars`, or `None` when `b` is unsatisfiable in the structure.
    pub fn one(&self, b: Bdd, vars: &[Var]) -> Result<Option<Vec<u32>>, EvalError> {
        let mut out = None;
        self.for_each(b, &Assignment::new(), vars, &mut |t| {
            out = Some(t.to_vec());
            false
        })?;
        Ok(out)
    }

    fn walk(&self, n: u32, env: &mut Assignment, vars: &[Var], visit: &mut Visit) -> Result<bool, EvalError> {
        if n == FALSE {
            return Ok(true);
        }
        if n == TRUE {
            let open: Vec<Var> = vars.iter().copied().filter(|v| env.get(*v).is_none()).collect::<BTreeSet<_>>().into_iter().collect();
            for t in all_tuples(open.len(), self.s.size()) {
                for (v, d) in open.iter().zip(&t) {
                    env.set(*v, Some(*d));
                }
                let vals: Vec<u32> = vars.iter().map(|v| env.get(*v).expect("assigned")).collect();
                let go = visit(&vals);
                if !go {
                    for v in &open {
                        env.set(*v, None);
                    }
                    return Ok(false);
                }
            }
            for v in &open {
                env.set(*v, None);
            }
            return Ok(true);
        }
        let NodeData { kernel, hi, lo, .. } = self.mgr.nodes[n as usize];
        let kd = &self.mgr.kernels[kernel as usize];
        let new: Vec<Var> = kd.free.iter().copied().filter(|v| env.get(*v).is_none()).collect();
        if new.is_empty() {
            let next = if self.eval_kernel(&kd.kernel, env, &mut Vec::new())? { hi } else { lo };
            return self.walk(next, env, vars, visit);
        }
        let want = if lo == FALSE {
            Some(true)
        } else if hi == FALSE {
            Some(false)
        } else {
            None
        };
        let cands = self.candidates(&kd.kernel, env, &new, want)?;
        let mut go = true;
        for (vals, truth) in cands {
            for (v, d) in new.iter().zip(&vals) {
                env.set(*v, Some(*d));
            }
            go = self.walk(if truth { hi } else { lo }, env, vars, visit)?;
            if !go {
                break;
            }
        }
        for v in &new {
            env.set(*v, None);
        }
        Ok(go)
    }

    /// Values for the unassigned kernel variables `new`, with the kernel's truth value.
    /// With `want` set, only tuples giving that truth value are returned.
    fn candidates(&self, k: &Kernel, env: &mut Assignment, new: &[Var], want: Option<bool>) -> Result<Vec<(Vec<u32>, bool)>, EvalError> {
        let pos = |v: Var| new.iter().position(|x| *x == v);
        match (k, want) {
            (Kernel::Pred(p, args), Some(true)) => {
                let table = self.table(*p)?;
                self.tick(table.len() as u64);
                let mut out = Vec::new();
                'rows: for row in table.iter() {
                    let mut vals = vec![u32::MAX; new.len()];
                    for (a, d) in args.iter().zip(row) {
                        let BVar::Free(x) = a else { unreachable!("bound variable at top level") };
                        match pos(*x) {
                            Some(i) if vals[i] == u32::MAX || vals[i] == *d => vals[i] = *d,
                            Some(_) => continue 'rows,
                            None if env.get(*x) == Some(*d) => {}
                            None => continue 'rows,
                        }
                    }
                    out.push((vals, true));
                }
                return Ok(out);
            }
            (Kernel::Eq(BVar::Free(a), BVar::Free(b)), Some(true)) => {
                self.tick(1);
                return Ok(match (env.get(*a), env.get(*b)) {
                    (Some(d), None) | (None, Some(d)) => vec![(vec![d], true)],
                    _ => (0..self.s.size() as u32).map(|d| (vec![d, d], true)).collect(),
                });
            }
            (Kernel::FuncEq(f, args, BVar::Free(r)), Some(true)) if new == [*r] && !args.contains(&BVar::Free(*r)) => {
                let vals = args.iter().map(|a| Self::resolve(*a, env, &[])).collect::<Result<Vec<_>, _>>()?;
                self.tick(1);
                let v = self.s.apply(*f, &vals).ok_or_else(|| self.uninterpreted(*f))?;
                return Ok(vec![(vec![v], true)]);
            }
            _ => {}
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for t in all_tuples(new.len(), self.s.size()) {
            for (v, d) in new.iter().zip(&t) {
                env.set(*v, Some(*d));
            }
            let r = self.eval_kernel(k, env, &mut stack);
            let truth = match r {
                Ok(b) => b,
                Err(e) => {
                    for v in new {
                        env.set(*v, None);
                    }
                    return Err(e);
                }
            };
            if want.map_or(true, |w| w == truth) {
                out.push((t, truth));
            }
        }
        for v in new {
            env.set(*v, None);
        }
        Ok(out)
    }
}

/// Predicted query effort and answer count.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Estimate {
    /// One plus the expected number of probes that do not end in an answer.
    pub cost: f64,
    /// Expected number of answers.
    pub reward: f64,
    /// `cost / (reward + 1)`.
    pub ratio: f64,
}

struct Est<'a> {
    mgr: &'a Manager,
    s: &'a FiniteStructure,
    n: f64,
    prob: HashMap<u32, f64>,
    eval: HashMap<u32, f64>,
    kprob: HashMap<u32, f64>,
}

impl Est<'_> {
    /// Probability that a kernel holds under a uniformly random assignment,
    /// treating distinct kernels as independent.
    fn kernel_prob(&mut self, k: u32) -> f64 {
        if let Some(&p) = self.kprob.get(&k) {
            return p;
        }
        let p = match &self.mgr.kernels[k as usize].kernel {
            Kernel::Pred(p, _) => match self.s.pred_bits(*p) {
                Some(bits) => self.s.count(*p) as f64 / bits.len().max(1) as f64,
                None => 0.5,
            },
            Kernel::FuncEq(..) | Kernel::Eq(..) => 1.0 / self.n,
            Kernel::Exists(body) => {
                let pb = self.node_prob(*body);
                1.0 - (1.0 - pb).powf(self.n)
            }
        };
        self.kprob.insert(k, p);
        p
    }

    fn node_prob(&mut self, n: u32) -> f64 {
        match n {
            TRUE => return 1.0,
            FALSE => return 0.0,
            _ => {}
        }
        if let Some(&p) = self.prob.get(&n) {
            return p;
        }
        let NodeData { kernel, hi, lo, .. } = self.mgr.nodes[n as usize];
        let pk = self.kernel_prob(kernel);
        let p = pk * self.node_prob(hi) + (1.0 - pk) * self.node_prob(lo);
        self.prob.insert(n, p);
        p
    }

    fn kernel_cost(&mut self, k: u32) -> f64 {
        match self.mgr.kernels[k as usize].kernel {
            Kernel::Exists(body) => self.n * self.eval_cost(body),
            _ => 1.0,
        }
    }

    /// Expected probes to evaluate `n` under a total assignment.
    fn eval_cost(&mut self, n: u32) -> f64 {
        if n <= TRUE {
            return 0.0;
        }
        if let Some(&c) = self.eval.get(&n) {
            return c;
        }
        let NodeData { kernel, hi, lo, .. } = self.mgr.nodes[n as usize];
        let pk = self.kernel_prob(kernel);
        let c = self.kernel_cost(kernel) + pk * self.eval_cost(hi) + (1.0 - pk) * self.eval_cost(lo);
        self.eval.insert(n, c);
        c
    }

    /// Expected probes of the answer walk from `n` with `assigned` bound.
    fn work(&mut self, n: u32, assigned: &BTreeSet<Var>, memo: &mut HashMap<(u32, Vec<Var>), f64>) -> f64 {
        if n <= TRUE {
            return 0.0;
        }
        let key = (n, assigned.iter().copied().collect::<Vec<_>>());
        if let Some(&w) = memo.get(&key) {
            return w;
        }
        let NodeData { kernel, hi, lo, .. } = self.mgr.nodes[n as usize];
        let kd = &self.mgr.kernels[kernel as usize];
        let new: Vec<Var> = kd.free.iter().copied().filter(|v| !assigned.contains(v)).collect();
        let pk = self.kernel_prob(kernel);
        let kc = self.kernel_cost(kernel);
        let mut next = assigned.clone();
        next.extend(new.iter().copied());
        let tuples = self.n.powi(new.len() as i32);
        let w = if new.is_empty() {
            kc + pk * self.work(hi, &next, memo) + (1.0 - pk) * self.work(lo, &next, memo)
        } else if lo == FALSE {
            let scan = match &kd.kernel {
                Kernel::Pred(p, _) => self.s.count(*p) as f64,
                Kernel::Eq(..) => 1.0,
                Kernel::FuncEq(_, _, BVar::Free(r)) if new == [*r] => 1.0,
                _ => tuples * kc,
            };
            scan + tuples * pk * self.work(hi, &next, memo)
        } else if hi == FALSE {
            tuples * kc + tuples * (1.0 - pk) * self.work(lo, &next, memo)
        } else {
            tuples * kc + tuples * (pk * self.work(hi, &next, memo) + (1.0 - pk) * self.work(lo, &next, memo))
        };
        memo.insert(key, w);
        w
    }
}

impl Manager {
    /// Answers of `b` over `vars` in `s`, in domain order.
    pub fn query_all(&self, b: Bdd, s: &FiniteStructure, vars: &[Var]) -> Result<Vec<Vec<u32>>, EvalError> {
        Querier::new(self, s).all(b, vars)
    }

    pub fn query_one(&self, b: Bdd, s: &FiniteStructure, vars: &[Var]) -> Result<Option<Vec<u32>>, EvalError> {
        Querier::new(self, s).one(b, vars)
    }

    pub fn holds(&self, b: Bdd, s: &FiniteStructure, env: &Assignment) -> Result<bool, EvalError> {
        Querier::new(self, s).holds(b, env)
    }

    /// Naive cost and answer-count prediction for querying `b` over `vars`.
    pub fn estimate(&self, b: Bdd, s: &FiniteStructure, vars: &[Var]) -> Estimate {
        let mut e = Est { mgr: self, s, n: s.size() as f64, prob: HashMap::new(), eval: HashMap::new(), kprob: HashMap::new() };
        let root = self.own(b);
        let reward = e.n.powi(vars.len() as i32) * e.node_prob(root);
        let work = e.work(root, &BTreeSet::new(), &mut HashMap::new());
        let cost = 1.0 + (work - reward).max(0.0);
        Estimate { cost, reward, ratio: cost / (reward + 1.0) }
    }
}
