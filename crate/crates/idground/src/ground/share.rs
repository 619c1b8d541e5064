//! Sharing of repeated ground conjunctions and disjunctions.

use std::collections::HashMap;

use super::{GFormula, GroundTheory};
use crate::logic::SymId;

fn count(f: &GFormula, seen: &mut HashMap<GFormula, usize>) {
    match f {
        GFormula::And(gs) | GFormula::Or(gs) => {
            *seen.entry(f.clone()).or_default() += 1;
            gs.iter().for_each(|g| count(g, seen));
        }
        GFormula::Not(g) => count(g, seen),
        GFormula::Equiv(a, b) => {
            count(a, seen);
            count(b, seen);
        }
        _ => {}
    }
}

struct Sharer<'a> {
    g: &'a mut GroundTheory,
    counts: HashMap<GFormula, usize>,
    names: HashMap<GFormula, SymId>,
    defs: Vec<GFormula>,
    next: usize,
}

impl Sharer<'_> {
    fn fresh(&mut self) -> SymId {
        loop {
            self.next += 1;
            let name = format!("_S{}", self.next);
            if self.g.vocab.lookup(&name).is_none() {
                return self.g.vocab.add_pred(&name, 0).expect("unused name");
            }
        }
    }

    fn rewrite(&mut self, f: &GFormula) -> GFormula {
        match f {
            GFormula::And(gs) | GFormula::Or(gs) => {
                let parts: Vec<GFormula> = gs.iter().map(|g| self.rewrite(g)).collect();
                let body = if matches!(f, GFormula::And(_)) { GFormula::And(parts) } else { GFormula::Or(parts) };
                if self.counts[f] < 2 {
                    return body;
                }
                if let Some(p) = self.names.get(f) {
                    return GFormula::atom(*p, vec![]);
                }
                let p = self.fresh();
                self.names.insert(f.clone(), p);
                let atom = GFormula::atom(p, vec![]);
                self.defs.push(GFormula::Equiv(Box::new(atom.clone()), Box::new(body)));
                atom
            }
            GFormula::Not(g) => GFormula::not(self.rewrite(g)),
            GFormula::Equiv(a, b) => GFormula::Equiv(Box::new(self.rewrite(a)), Box::new(self.rewrite(b))),
            _ => f.clone(),
        }
    }
}

/// Replaces every conjunction or disjunction occurring more than once in the
/// sentences by a fresh propositional atom, adding one `<=>` sentence per atom.
///
/// Rule bodies are left alone: an atom constrained only by a sentence would
/// change the well-founded model of a definition.
pub fn apply_sharing(g: &GroundTheory) -> GroundTheory {
    let mut counts = HashMap::new();
    for f in &g.sentences {
        count(f, &mut counts);
    }
    if counts.values().all(|n| *n < 2) {
        return g.clone();
    }
    let mut out = g.clone();
    let sentences = std::mem::take(&mut out.sentences);
    let mut sh = Sharer { g: &mut out, counts, names: HashMap::new(), defs: Vec::new(), next: 0 };
    let rewritten: Vec<GFormula> = sentences.iter().map(|f| sh.rewrite(f)).collect();
    let defs = std::mem::take(&mut sh.defs);
    out.sentences = rewritten;
    out.sentences.extend(defs);
    out
}
