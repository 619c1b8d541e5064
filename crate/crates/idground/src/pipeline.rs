//! End-to-end grounding: normalization, bounds, grounding and emission.

use std::time::{Duration, Instant};

use crate::bounds::{
    check_consistency, copy_closure, dump, input_cmap, join_input_bounds, make_tolerant, refine, to_bottom_up, trivial_cmap, CMap, Consistency,
    RefineStats, StopPolicy,
};
use crate::ground::{apply_sharing, ground_with_bounds, grounding_size, GFormula, GroundError, GroundTheory};
use crate::logic::{push_quantifiers, to_tnf, LogicError, Theory};
use crate::structure::{all_tuples, EvalError, FiniteStructure};
use crate::wfs::{materialize_input_definitions, WfsError};

/// Bound construction strategies.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[derive(clap::ValueEnum)]
pub enum Mode {
    /// No bounds: every instance is produced.
    Full,
    /// Input atoms are bounded by their value in the input structure.
    Nb,
    /// Input-atom bounds propagated bottom-up.
    Bu,
    /// Refinement with a node limit per diagram.
    Mn,
    /// Refinement gated by estimated cost and reward.
    R,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Full, Mode::Nb, Mode::Bu, Mode::Mn, Mode::R];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Nb => "nb",
            Mode::Bu => "bu",
            Mode::Mn => "mn",
            Mode::R => "r",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub mode: Mode,
    /// Installed refinements allowed per subformula.
    pub max_refine_factor: usize,
    /// Internal nodes allowed per bound in mode `mn`.
    pub max_bdd_nodes: usize,
    pub share: bool,
    pub push_quantifiers: bool,
    pub dump_cmap: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { mode: Mode::R, max_refine_factor: 4, max_bdd_nodes: 4, share: false, push_quantifiers: false, dump_cmap: false }
    }
}

impl Options {
    pub fn with_mode(mode: Mode) -> Self {
        Options { mode, ..Default::default() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub grounding_size: usize,
    pub sentences: usize,
    pub rules: usize,
    pub instantiations: u64,
    pub probes: u64,
    pub refine: Option<RefineStats>,
    /// Input-only definitions evaluated before grounding.
    pub materialized: usize,
    /// The bounds contradict each other on the input structure.
    pub inconsistent: bool,
    pub phases: Vec<(&'static str, Duration)>,
}

impl Stats {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("grounding_size {}\n", self.grounding_size));
        s.push_str(&format!("sentences {}\n", self.sentences));
        s.push_str(&format!("rules {}\n", self.rules));
        s.push_str(&format!("instantiations {}\n", self.instantiations));
        s.push_str(&format!("probes {}\n", self.probes));
        s.push_str(&format!("materialized {}\n", self.materialized));
        if let Some(r) = &self.refine {
            s.push_str(&format!("refine_installed {}\nrefine_rejected {}\nrefine_exhausted {}\n", r.installed, r.rejected, r.exhausted));
        }
        s.push_str(&format!("inconsistent {}\n", self.inconsistent));
        for (name, d) in &self.phases {
            s.push_str(&format!("time_{name} {:.6}\n", d.as_secs_f64()));
        }
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

impl From<WfsError> for PipelineError {
    fn from(e: WfsError) -> Self {
        match e {
            WfsError::Eval(e) => PipelineError::Eval(e),
            WfsError::Logic(e) => PipelineError::Logic(e),
        }
    }
}

pub struct Output {
    /// The input theory in term normal form; the grounding is over its vocabulary.
    pub theory: Theory,
    pub grounding: GroundTheory,
    pub stats: Stats,
    pub cmap_dump: Option<String>,
}

struct Clock {
    at: Instant,
    phases: Vec<(&'static str, Duration)>,
}

impl Clock {
    fn lap(&mut self, name: &'static str) {
        let now = Instant::now();
        self.phases.push((name, now - self.at));
        self.at = now;
    }
}

fn build_cmap(t: &Theory, s: &FiniteStructure, opts: &Options) -> (CMap, Option<RefineStats>) {
    match opts.mode {
        Mode::Full => (trivial_cmap(t), None),
        Mode::Nb | Mode::Bu => (input_cmap(t), None),
        Mode::Mn => {
            let (c, st) = refine(t, &StopPolicy::nodes(opts.max_refine_factor, opts.max_bdd_nodes));
            (c, Some(st))
        }
        Mode::R => {
            let (c, st) = refine(t, &StopPolicy::ratio(opts.max_refine_factor, s));
            (c, Some(st))
        }
    }
}

/// Grounds `t` over the input structure `s`.
pub fn run(t: &Theory, s: &FiniteStructure, opts: &Options) -> Result<Output, PipelineError> {
    t.validate()?;
    let mut clock = Clock { at: Instant::now(), phases: Vec::new() };
    let mut tnf = to_tnf(t);
    if opts.push_quantifiers {
        for f in &mut tnf.sentences {
            *f = push_quantifiers(f);
        }
        for d in &mut tnf.definitions {
            for r in &mut d.rules {
                r.body = push_quantifiers(&r.body);
            }
        }
        tnf = to_tnf(&tnf);
    }
    clock.lap("normalize");

    let mat = materialize_input_definitions(&tnf, s)?;
    let (work, structure) = (&mat.theory, &mat.structure);
    let mut facts = Vec::new();
    for &p in &mat.symbols {
        for args in all_tuples(tnf.vocab.arity(p), structure.size()) {
            let atom = GFormula::atom(p, args.clone());
            facts.push(if structure.holds(p, &args) == Some(true) { atom } else { GFormula::not(atom) });
        }
    }
    clock.lap("materialize");

    let (mut c, refine_stats) = build_cmap(work, structure, opts);
    if matches!(opts.mode, Mode::Mn | Mode::R) {
        join_input_bounds(&mut c, work);
    }
    clock.lap("bounds");

    let mut stats = Stats { refine: refine_stats, materialized: mat.symbols.len(), ..Default::default() };
    let domain = structure.domain().to_vec();
    let inconsistent = !matches!(check_consistency(&mut c, Some(structure))?, Consistency::Consistent);
    let mut cmap_dump = None;
    let grounded = if inconsistent {
        None
    } else {
        let c = copy_closure(c, work);
        let c = if matches!(opts.mode, Mode::Full | Mode::Nb) { c } else { to_bottom_up(c, work) };
        let mut c = make_tolerant(c, work);
        if opts.dump_cmap {
            cmap_dump = Some(dump(&c, work));
        }
        clock.lap("transform");
        match ground_with_bounds(work, structure, &mut c) {
            Ok(r) => Some(r),
            Err(GroundError::Inconsistent(_)) => None,
            Err(e) => return Err(e.into()),
        }
    };
    let mut g = match grounded {
        Some((mut g, gs)) => {
            stats.instantiations = gs.instantiations;
            stats.probes = gs.probes;
            g.vocab = tnf.vocab.clone();
            let rest = std::mem::take(&mut g.sentences);
            g.sentences = facts;
            g.sentences.extend(rest);
            g
        }
        None => {
            stats.inconsistent = true;
            GroundTheory::unsat(tnf.vocab.clone(), domain)
        }
    };
    clock.lap("ground");
    if opts.share {
        g = apply_sharing(&g);
        clock.lap("share");
    }
    stats.grounding_size = grounding_size(&g);
    stats.sentences = g.sentences.len();
    stats.rules = g.rules().count();
    stats.phases = clock.phases;
    Ok(Output { theory: tnf, grounding: g, stats, cmap_dump })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_reduced, parse_fog};
    use crate::logic::parse_theory;
    use crate::oracle::{check_isigma_equivalence, Equivalence, DEFAULT_CAP};
    use crate::structure::parse_structure;

    const SUBGRAPH: &str = "vocab { pred Edge/2. pred Sub/2. } input { Edge } theory {
        ! u v : Sub(u,v) => Edge(u,v).
        ! x y z : Sub(x,y) & Sub(x,z) => y = z. }";

    const GRAPH: &str = "domain = { a; b; c } Edge = { (a,b); (b,c); (a,c) }";

    fn setup(theory: &str, structure: &str) -> (Theory, FiniteStructure) {
        let t = parse_theory(theory).unwrap();
        let s = parse_structure(structure, &t.vocab).unwrap();
        (t, s)
    }

    #[test]
    fn nb_output_matches_reduced_grounding() {
        let (t, s) = setup(SUBGRAPH, GRAPH);
        let out = run(&t, &s, &Options::with_mode(Mode::Nb)).unwrap();
        let (reduced, _) = ground_reduced(&to_tnf(&t), &s).unwrap();
        assert_eq!(out.grounding.to_fog(), reduced.to_fog());
    }

    #[test]
    fn every_mode_is_equivalent_on_t1() {
        let (t, s) = setup(SUBGRAPH, GRAPH);
        for mode in Mode::ALL {
            let out = run(&t, &s, &Options::with_mode(mode)).unwrap();
            let eq = check_isigma_equivalence(&t, &out.grounding, &s, DEFAULT_CAP).unwrap();
            assert!(matches!(eq, Equivalence::Equivalent), "{}", mode.name());
        }
    }

    #[test]
    fn mn_is_smaller_than_nb_on_sparse_graph() {
        let (t, s) = setup(SUBGRAPH, GRAPH);
        let nb = run(&t, &s, &Options::with_mode(Mode::Nb)).unwrap().stats.grounding_size;
        let mn = run(&t, &s, &Options::with_mode(Mode::Mn)).unwrap().stats.grounding_size;
        assert!(mn < nb, "mn {mn} nb {nb}");
    }

    #[test]
    fn reported_size_matches_reparsed_output() {
        let (t, s) = setup(SUBGRAPH, GRAPH);
        for share in [false, true] {
            let opts = Options { share, ..Options::with_mode(Mode::Bu) };
            let out = run(&t, &s, &opts).unwrap();
            let back = parse_fog(&out.grounding.to_fog(), &t.vocab, s.domain()).unwrap();
            assert_eq!(grounding_size(&back), out.stats.grounding_size);
            assert_eq!(back.sentences.len(), out.stats.sentences);
        }
    }

    #[test]
    fn materialized_definitions_become_leading_facts() {
        let (t, s) = setup(
            "vocab { pred Edge/2. pred T/2. pred P/1. } input { Edge } theory {
                define { T(x,y) <- Edge(x,y). T(x,y) <- ? z : T(x,z) & Edge(z,y). }
                ! x : P(x) => T(x,x). }",
            "domain = { a; b } Edge = { (a,b); (b,a) }",
        );
        let out = run(&t, &s, &Options::default()).unwrap();
        assert_eq!(out.stats.materialized, 1);
        let g = &out.grounding;
        let text: Vec<String> = g.sentences.iter().map(|f| g.formula_text(f)).collect();
        assert_eq!(text[..4], ["T(a,a)", "T(a,b)", "T(b,a)", "T(b,b)"]);
        assert!(g.definitions.is_empty());
        assert!(matches!(check_isigma_equivalence(&t, g, &s, DEFAULT_CAP).unwrap(), Equivalence::Equivalent));
    }

    #[test]
    fn inconsistent_bounds_yield_false() {
        let (t, s) = setup("vocab { pred Edge/2. } input { Edge } theory { ! x y : Edge(x,y). }", GRAPH);
        let out = run(&t, &s, &Options::default()).unwrap();
        assert!(out.stats.inconsistent);
        assert_eq!(out.grounding.to_fog(), "fog 1\nfalse.\n");
        assert_eq!(out.stats.instantiations, 0);
    }

    #[test]
    fn three_valued_input_definition_is_rejected() {
        let (t, s) = setup("vocab { pred P/0. } theory { define { P <- ~P. } }", "domain = { a }");
        assert!(matches!(run(&t, &s, &Options::default()), Err(PipelineError::Logic(LogicError::IllFormed(_)))));
    }

    #[test]
    fn pushed_quantifiers_keep_models() {
        let (t, s) = setup(
            "vocab { pred Edge/2. pred P/1. pred Q/1. } input { Edge } theory {
                ! x y : P(x) | (Edge(x,y) & Q(y)). }",
            GRAPH,
        );
        let opts = Options { push_quantifiers: true, ..Options::default() };
        let out = run(&t, &s, &opts).unwrap();
        assert!(matches!(check_isigma_equivalence(&t, &out.grounding, &s, DEFAULT_CAP).unwrap(), Equivalence::Equivalent));
    }

    #[test]
    fn cmap_dump_is_optional() {
        let (t, s) = setup(SUBGRAPH, GRAPH);
        assert!(run(&t, &s, &Options::default()).unwrap().cmap_dump.is_none());
        let opts = Options { dump_cmap: true, ..Options::default() };
        assert!(!run(&t, &s, &opts).unwrap().cmap_dump.unwrap().is_empty());
    }
}
