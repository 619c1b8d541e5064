//! Translation between formulas and diagrams.

use super::{BVar, Bdd, Kernel, Manager, NodeData, FALSE, TRUE};
use crate::logic::{Formula, Kind, Term, Var, VarPool};

impl Manager {
    /// Builds the diagram of an arbitrary formula. Nested function terms are
    /// flattened into `F(v̄) = y` kernels under fresh existential variables.
    pub fn build(&mut self, f: &Formula) -> Bdd {
        match &f.kind {
            Kind::True => self.top(),
            Kind::False => self.bot(),
            Kind::Atom(p, args) => {
                let mut temps = Vec::new();
                let vars: Vec<Var> = args.iter().map(|t| self.flatten(t, &mut temps)).collect();
                let a = self.pred(*p, &vars);
                self.close_temps(a, temps)
            }
            Kind::Eq(a, b) => {
                let mut temps = Vec::new();
                let r = match (a, b) {
                    (Term::App(g, args), Term::Var(y)) | (Term::Var(y), Term::App(g, args)) => {
                        let vs: Vec<Var> = args.iter().map(|t| self.flatten(t, &mut temps)).collect();
                        self.func_eq(*g, &vs, *y)
                    }
                    _ => {
                        let x = self.flatten(a, &mut temps);
                        let y = self.flatten(b, &mut temps);
                        self.eq(x, y)
                    }
                };
                self.close_temps(r, temps)
            }
            Kind::Not(g) => {
                let b = self.build(g);
                self.not(b)
            }
            Kind::And(fs) => {
                let parts: Vec<Bdd> = fs.iter().map(|g| self.build(g)).collect();
                self.and_all(parts)
            }
            Kind::Or(fs) => {
                let parts: Vec<Bdd> = fs.iter().map(|g| self.build(g)).collect();
                self.or_all(parts)
            }
            Kind::Exists(v, g) => {
                let b = self.build(g);
                self.exists(*v, b)
            }
            Kind::Forall(v, g) => {
                let b = self.build(g);
                self.forall(*v, b)
            }
        }
    }

    /// Returns a variable standing for `t`, recording `F(v̄) = y` constraints for applications.
    fn flatten(&mut self, t: &Term, temps: &mut Vec<(Var, Bdd)>) -> Var {
        match t {
            Term::Var(v) => *v,
            Term::App(g, args) => {
                let vs: Vec<Var> = args.iter().map(|a| self.flatten(a, temps)).collect();
                let y = self.fresh_temp();
                let c = self.func_eq(*g, &vs, y);
                temps.push((y, c));
                y
            }
        }
    }

    fn close_temps(&mut self, mut b: Bdd, temps: Vec<(Var, Bdd)>) -> Bdd {
        for (y, c) in temps.into_iter().rev() {
            let body = self.and(c, b);
            b = self.exists(y, body);
        }
        b
    }

    /// An if-then-else formula equivalent to `b`. Quantified kernels get fresh variables from `vars`.
    pub fn to_formula(&self, b: Bdd, vars: &mut VarPool) -> Formula {
        let mut bound = Vec::new();
        self.node_formula(self.own(b), vars, &mut bound)
    }

    fn node_formula(&self, n: u32, vars: &mut VarPool, bound: &mut Vec<Var>) -> Formula {
        match n {
            TRUE => return Formula::top(),
            FALSE => return Formula::bot(),
            _ => {}
        }
        let NodeData { kernel, hi, lo, .. } = self.nodes[n as usize];
        let k = self.kernel_formula(&self.kernels[kernel as usize].kernel, vars, bound);
        let branch = |m: &Self, c: u32, vars: &mut VarPool, bound: &mut Vec<Var>| m.node_formula(c, vars, bound);
        match (hi, lo) {
            (TRUE, FALSE) => k,
            (FALSE, TRUE) => Formula::not(k),
            (_, FALSE) => Formula::and(vec![k, branch(self, hi, vars, bound)]),
            (FALSE, _) => Formula::and(vec![Formula::not(k), branch(self, lo, vars, bound)]),
            (TRUE, _) => Formula::or(vec![k, branch(self, lo, vars, bound)]),
            (_, TRUE) => Formula::or(vec![Formula::not(k), branch(self, hi, vars, bound)]),
            _ => {
                let h = branch(self, hi, vars, bound);
                let l = branch(self, lo, vars, bound);
                Formula::or(vec![Formula::and(vec![k.clone(), h]), Formula::and(vec![Formula::not(k), l])])
            }
        }
    }

    fn kernel_formula(&self, k: &Kernel, vars: &mut VarPool, bound: &mut Vec<Var>) -> Formula {
        let var = |v: &BVar, bound: &Vec<Var>| match v {
            BVar::Free(x) => *x,
            BVar::Bound(j) => bound[bound.len() - 1 - *j as usize],
        };
        match k {
            Kernel::Pred(p, args) => Formula::atom_vars(*p, &args.iter().map(|a| var(a, bound)).collect::<Vec<_>>()),
            Kernel::FuncEq(f, args, r) => Formula::eq(
                Term::App(*f, args.iter().map(|a| Term::Var(var(a, bound))).collect()),
                Term::Var(var(r, bound)),
            ),
            Kernel::Eq(a, b) => Formula::eq(Term::Var(var(a, bound)), Term::Var(var(b, bound))),
            Kernel::Exists(body) => {
                let v = vars.fresh();
                bound.push(v);
                let inner = self.node_formula(*body, vars, bound);
                bound.pop();
                Formula::exists(v, inner)
            }
        }
    }
}
