use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use idground::ground::{grounding_size, parse_fog};
use idground::logic::parse_theory;
use idground::structure::parse_structure;

const SUBGRAPH: &str = "vocab { pred Edge/2. pred Sub/2. } input { Edge } theory {
    ! u v : Sub(u,v) => Edge(u,v).
    ! x y z : Sub(x,y) & Sub(x,z) => y = z. }";

const GRAPH: &str = "domain = { a; b; c } Edge = { (a,b); (a,c) }";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn idground(theory: &Path, structure: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idground"))
        .arg("--theory")
        .arg(theory)
        .arg("--structure")
        .arg(structure)
        .args(extra)
        .output()
        .unwrap()
}

fn stat(stderr: &str, key: &str) -> String {
    stderr
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no {key} in\n{stderr}"))
        .to_string()
}

#[test]
fn every_mode_passes_the_oracle_and_reports_its_size() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "subgraph.idp", SUBGRAPH);
    let s = write(dir.path(), "g.st", GRAPH);
    let theory = parse_theory(SUBGRAPH).unwrap();
    let structure = parse_structure(GRAPH, &theory.vocab).unwrap();
    for mode in ["full", "nb", "bu", "mn", "r"] {
        let out = idground(&t, &s, &["--mode", mode, "--stats", "--oracle-check"]);
        let stderr = String::from_utf8(out.stderr).unwrap();
        assert!(out.status.success(), "{mode}: {stderr}");
        assert!(stderr.contains("oracle: equivalent"));
        let g = parse_fog(&String::from_utf8(out.stdout).unwrap(), &theory.vocab, structure.domain()).unwrap();
        assert_eq!(stat(&stderr, "grounding_size"), grounding_size(&g).to_string(), "{mode}");
        assert_eq!(stat(&stderr, "mode"), mode);
    }
}

#[test]
fn output_file_and_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "subgraph.idp", SUBGRAPH);
    let s = write(dir.path(), "g.st", GRAPH);
    let target = dir.path().join("out.cnf");
    let out = idground(&t, &s, &["--dimacs", "-o", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let cnf = std::fs::read_to_string(&target).unwrap();
    let header = cnf.lines().find(|l| l.starts_with("p cnf")).unwrap();
    let clauses = cnf.lines().filter(|l| !l.starts_with('c') && !l.starts_with('p')).count();
    assert_eq!(header.split_whitespace().nth(3).unwrap(), clauses.to_string());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "subgraph.idp", SUBGRAPH);
    let s = write(dir.path(), "g.st", GRAPH);
    let junk = write(dir.path(), "junk", "junk");
    let code = |o: Output| o.status.code().unwrap();

    assert_eq!(code(idground(&dir.path().join("missing"), &s, &[])), 3);
    assert_eq!(code(idground(&junk, &s, &[])), 4);
    assert_eq!(code(idground(&t, &junk, &[])), 5);
    assert_eq!(code(idground(&t, &s, &["--mode", "fast"])), 2);

    let rules = write(dir.path(), "rules.idp", "vocab { pred P/0. pred Q/0. } theory { Q. define { P <- Q. } }");
    let one = write(dir.path(), "one.st", "domain = { a }");
    assert_eq!(code(idground(&rules, &one, &["--dimacs"])), 7);

    let wide = write(dir.path(), "wide.idp", "vocab { pred P/2. } theory { ! x : P(x,x). }");
    let big = write(dir.path(), "big.st", "domain = { a; b; c; d; e; f }");
    assert_eq!(code(idground(&wide, &big, &["--oracle-check"])), 8);

    let all = write(dir.path(), "all.idp", "vocab { pred Edge/2. } input { Edge } theory { ! x y : Edge(x,y). }");
    let out = idground(&all, &s, &[]);
    assert_eq!(String::from_utf8(out.stdout.clone()).unwrap(), "fog 1\nfalse.\n");
    assert_eq!(code(out), 10);
}
