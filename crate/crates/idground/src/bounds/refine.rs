//! The scheduling loop that applies one-step refinements.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::{compute, functional_result, shape_key, trivial_cmap, CMap, Occurrences, RefinementTask, TaskKind};
use crate::fobdd::Bdd;
use crate::logic::{completion, Kind, OccId, Theory};
use crate::structure::FiniteStructure;

/// Complexity gate for a new bound.
#[derive(Copy, Clone, Debug)]
pub enum Limit<'a> {
    None,
    /// At most this many internal nodes.
    Nodes(usize),
    /// The estimated cost/reward ratio may not grow.
    Ratio(&'a FiniteStructure),
}

#[derive(Copy, Clone, Debug)]
pub struct StopPolicy<'a> {
    /// Installed refinements allowed per subformula; `None` means unbounded.
    pub factor: Option<usize>,
    pub limit: Limit<'a>,
}

impl StopPolicy<'_> {
    pub fn nodes(factor: usize, max_nodes: usize) -> Self {
        StopPolicy { factor: Some(factor), limit: Limit::Nodes(max_nodes) }
    }
}

impl<'a> StopPolicy<'a> {
    pub fn ratio(factor: usize, s: &'a FiniteStructure) -> Self {
        StopPolicy { factor: Some(factor), limit: Limit::Ratio(s) }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct RefineStats {
    pub popped: usize,
    pub installed: usize,
    pub rejected: usize,
    pub budget: Option<usize>,
    /// Whether the queue still held tasks when the loop stopped.
    pub exhausted: bool,
}

/// Every task the loop may run, with the bounds each one reads.
struct Schedule {
    readers: HashMap<(OccId, bool), Vec<RefinementTask>>,
}

fn reads(task: &RefinementTask, occs: &Occurrences) -> Vec<(OccId, bool)> {
    let occ = &occs.map[&task.target];
    let ct = task.ct;
    match task.kind {
        TaskKind::Input | TaskKind::Axiom => vec![],
        TaskKind::BottomUp => {
            let flip = matches!(occ.formula.kind, Kind::Not(_));
            occ.children.iter().map(|k| (*k, ct != flip)).collect()
        }
        TaskKind::TopDown => {
            let pid = occ.parent.unwrap();
            let parent = &occs.map[&pid];
            match &parent.formula.kind {
                Kind::Not(_) => vec![(pid, !ct)],
                Kind::Forall(..) | Kind::Exists(..) => {
                    let universal = matches!(parent.formula.kind, Kind::Forall(..));
                    if universal == ct {
                        vec![(pid, ct)]
                    } else {
                        vec![(pid, ct), (task.target, !ct)]
                    }
                }
                Kind::And(_) | Kind::Or(_) => {
                    let conj = matches!(parent.formula.kind, Kind::And(_));
                    let mut out = vec![(pid, ct)];
                    if conj != ct {
                        out.extend(parent.children.iter().filter(|k| **k != task.target).map(|k| (*k, conj)));
                    }
                    out
                }
                _ => vec![],
            }
        }
        TaskKind::Functional => vec![(task.target, !ct)],
        TaskKind::Copy(src) => vec![(src, ct)],
    }
}

fn all_tasks(occs: &Occurrences) -> Vec<RefinementTask> {
    let mut out = Vec::new();
    let mut buckets: HashMap<String, Vec<OccId>> = HashMap::new();
    for &id in &occs.order {
        let occ = &occs.map[&id];
        for ct in [true, false] {
            if !occ.children.is_empty() {
                out.push(RefinementTask::new(TaskKind::BottomUp, id, ct));
            }
            if occ.parent.is_some() {
                out.push(RefinementTask::new(TaskKind::TopDown, id, ct));
            }
            if functional_result(&occ.formula).is_some() {
                out.push(RefinementTask::new(TaskKind::Functional, id, ct));
            }
        }
        if !matches!(occ.formula.kind, Kind::True | Kind::False) {
            buckets.entry(shape_key(&occ.formula)).or_default().push(id);
        }
    }
    let mut keys: Vec<&String> = buckets.keys().collect();
    keys.sort();
    for k in keys {
        let ids = &buckets[k];
        for &a in ids {
            for &b in ids {
                if a != b {
                    for ct in [true, false] {
                        out.push(RefinementTask::new(TaskKind::Copy(b), a, ct));
                    }
                }
            }
        }
    }
    out
}

/// FIFO queue that ignores tasks already waiting.
#[derive(Default)]
struct TaskQueue {
    queue: VecDeque<RefinementTask>,
    pending: HashSet<RefinementTask>,
}

impl TaskQueue {
    fn push(&mut self, t: RefinementTask) {
        if self.pending.insert(t) {
            self.queue.push_back(t);
        }
    }

    fn pop(&mut self) -> RefinementTask {
        let t = self.queue.pop_front().unwrap();
        self.pending.remove(&t);
        t
    }

    fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

impl Schedule {
    fn new(occs: &Occurrences) -> Self {
        let mut readers: HashMap<(OccId, bool), Vec<RefinementTask>> = HashMap::new();
        for task in all_tasks(occs) {
            for key in reads(&task, occs) {
                readers.entry(key).or_default().push(task);
            }
        }
        Schedule { readers }
    }
}

fn accept(c: &CMap, policy: &StopPolicy, old: Bdd, new: Bdd, vars: &[crate::logic::Var]) -> bool {
    match policy.limit {
        Limit::None => true,
        Limit::Nodes(n) => c.mgr.node_count(new) <= n,
        Limit::Ratio(s) => c.mgr.estimate(new, s, vars).ratio <= c.mgr.estimate(old, s, vars).ratio,
    }
}

/// Derives a c-map for `t` by repeated one-step refinement.
///
/// Theories with definitions are refined through their completion and the
/// result is restricted to the occurrences of `t`.
pub fn refine(t: &Theory, policy: &StopPolicy) -> (CMap, RefineStats) {
    let work = if t.definitions.is_empty() { t.clone() } else { completion(t) };
    let occs = Occurrences::new(&work);
    let mut c = trivial_cmap(&work);
    let schedule = Schedule::new(&occs);
    let budget = policy.factor.map(|f| f * occs.len());
    let mut stats = RefineStats { budget, ..Default::default() };

    let mut queue = TaskQueue::default();
    for &id in &occs.order {
        if occs.map[&id].sentence {
            queue.push(RefinementTask::new(TaskKind::Axiom, id, true));
        }
    }
    for &id in &occs.order {
        if occs.map[&id].over_input {
            queue.push(RefinementTask::new(TaskKind::Input, id, true));
            queue.push(RefinementTask::new(TaskKind::Input, id, false));
        }
    }

    while !queue.is_empty() {
        if budget.is_some_and(|b| stats.installed >= b) {
            break;
        }
        let task = queue.pop();
        stats.popped += 1;
        // Input occurrences get their exact bound, plus the axiom when they are sentences.
        let exact = task.kind == TaskKind::Input;
        if occs.map[&task.target].over_input && !exact && task.kind != TaskKind::Axiom {
            continue;
        }
        let Ok(candidate) = compute(&task, &mut c, &occs) else { continue };
        let old = c.side(task.target, task.ct);
        let joined = c.mgr.or(old, candidate);
        let joined = c.mgr.simplify(joined);
        if joined == old {
            continue;
        }
        if !exact && !accept(&c, policy, old, joined, &occs.map[&task.target].free) {
            stats.rejected += 1;
            continue;
        }
        c.set_side(task.target, task.ct, joined);
        stats.installed += 1;
        for r in schedule.readers.get(&(task.target, task.ct)).into_iter().flatten() {
            queue.push(*r);
        }
    }
    stats.exhausted = !queue.is_empty();
    if !t.definitions.is_empty() {
        let keep: BTreeSet<OccId> = t.occurrence_ids().into_iter().collect();
        c.restrict(&keep);
    }
    (c, stats)
}
