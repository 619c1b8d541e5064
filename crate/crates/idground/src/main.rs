use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use idground::ground::{to_cnf, to_propositional, GroundError};
use idground::logic::parse_theory;
use idground::oracle::{check_isigma_equivalence, Equivalence, OracleError, DEFAULT_CAP};
use idground::pipeline::{run, Mode, Options, PipelineError};
use idground::structure::parse_structure;

const EXIT_IO: u8 = 3;
const EXIT_THEORY: u8 = 4;
const EXIT_STRUCTURE: u8 = 5;
const EXIT_ILL_FORMED: u8 = 6;
const EXIT_RULES_IN_CNF: u8 = 7;
const EXIT_ORACLE_CAP: u8 = 8;
const EXIT_ORACLE_MISMATCH: u8 = 9;
const EXIT_INCONSISTENT: u8 = 10;

/// Grounds a theory with inductive definitions over a finite input structure.
///
/// Exit codes: 0 success, 2 usage, 3 I/O, 4 theory syntax, 5 structure
/// syntax, 6 ill-formed input, 7 --dimacs with rules, 8 oracle search space
/// too large, 9 oracle found a counterexample, 10 bounds inconsistent with
/// the structure (an unsatisfiable grounding is still written).
#[derive(Parser, Debug)]
#[command(name = "idground", version)]
struct Cli {
    #[arg(long)]
    theory: PathBuf,
    #[arg(long)]
    structure: PathBuf,
    #[arg(long, value_enum, default_value = "r")]
    mode: Mode,
    #[arg(long, default_value_t = 4)]
    max_refine_factor: usize,
    #[arg(long, default_value_t = 4)]
    max_bdd_nodes: usize,
    /// Name repeated subformulas with fresh atoms.
    #[arg(long)]
    share: bool,
    #[arg(long)]
    push_quantifiers: bool,
    /// Write DIMACS CNF instead of the ground theory.
    #[arg(long)]
    dimacs: bool,
    /// Print statistics to stderr.
    #[arg(long)]
    stats: bool,
    /// Compare against brute-force model enumeration.
    #[arg(long)]
    oracle_check: bool,
    /// Print the final bounds to stderr.
    #[arg(long)]
    dump_cmap: bool,
    /// Recorded in the statistics; the pipeline itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("idground: {msg}");
    ExitCode::from(code)
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) | Err(code) => code,
    }
}

fn execute(cli: &Cli) -> Result<ExitCode, ExitCode> {
    let theory = parse_theory(&read(&cli.theory)?).map_err(|e| fail(EXIT_THEORY, format!("{}: {e}", cli.theory.display())))?;
    let structure = parse_structure(&read(&cli.structure)?, &theory.vocab)
        .map_err(|e| fail(EXIT_STRUCTURE, format!("{}: {e}", cli.structure.display())))?;
    let opts = Options {
        mode: cli.mode,
        max_refine_factor: cli.max_refine_factor,
        max_bdd_nodes: cli.max_bdd_nodes,
        share: cli.share,
        push_quantifiers: cli.push_quantifiers,
        dump_cmap: cli.dump_cmap,
    };
    let out = run(&theory, &structure, &opts).map_err(|e| match e {
        PipelineError::Ground(GroundError::RulesInCnf) => fail(EXIT_RULES_IN_CNF, &e),
        _ => fail(EXIT_ILL_FORMED, &e),
    })?;

    let text = if cli.dimacs {
        let p = to_propositional(&out.grounding, &structure).map_err(|e| fail(EXIT_ILL_FORMED, e))?;
        match to_cnf(&p) {
            Ok(cnf) => cnf.to_dimacs(),
            Err(e) => return Err(fail(EXIT_RULES_IN_CNF, format!("{e}; --dimacs needs a definition-free theory"))),
        }
    } else {
        out.grounding.to_fog()
    };
    match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }

    if let Some(d) = &out.cmap_dump {
        eprint!("{d}");
    }
    if cli.stats {
        eprintln!("mode {}", cli.mode.name());
        eprintln!("seed {}", cli.seed);
        eprint!("{}", out.stats.to_text());
    }
    if cli.oracle_check {
        match check_isigma_equivalence(&out.theory, &out.grounding, &structure, DEFAULT_CAP) {
            Ok(Equivalence::Equivalent) => eprintln!("oracle: equivalent"),
            Ok(Equivalence::Counterexample(m)) => {
                return Err(fail(EXIT_ORACLE_MISMATCH, format!("oracle: grounding disagrees with the theory on\n{}", m.to_text())))
            }
            Err(e @ OracleError::CapExceeded { .. }) => return Err(fail(EXIT_ORACLE_CAP, e)),
            Err(e) => return Err(fail(EXIT_ILL_FORMED, e)),
        }
    }
    if out.stats.inconsistent {
        eprintln!("idground: bounds are inconsistent with the input structure; the theory has no model");
        return Ok(ExitCode::from(EXIT_INCONSISTENT));
    }
    Ok(ExitCode::SUCCESS)
}
