use std::fmt::{self, Write};

use super::{Formula, Kind, Rule, Term, Theory, VarPool, Vocabulary};

pub struct Shown<'a> {
    pub vocab: &'a Vocabulary,
    pub vars: &'a VarPool,
    pub f: &'a Formula,
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_formula(&mut s, self.vocab, self.vars, self.f, 0);
        out.write_str(&s)
    }
}

fn write_term(s: &mut String, vocab: &Vocabulary, vars: &VarPool, t: &Term) {
    match t {
        Term::Var(v) => s.push_str(vars.name(*v)),
        Term::App(f, args) => {
            s.push_str(vocab.name(*f));
            if !args.is_empty() {
                write_args(s, vocab, vars, args);
            }
        }
    }
}

fn write_args(s: &mut String, vocab: &Vocabulary, vars: &VarPool, args: &[Term]) {
    s.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write_term(s, vocab, vars, a);
    }
    s.push(')');
}

// Binding strength: 0 = quantifier/top, 1 = |, 2 = &, 3 = unary.
fn write_formula(s: &mut String, vocab: &Vocabulary, vars: &VarPool, f: &Formula, ctx: u8) {
    match &f.kind {
        Kind::True => s.push_str("true"),
        Kind::False => s.push_str("false"),
        Kind::Atom(p, args) => {
            s.push_str(vocab.name(*p));
            if !args.is_empty() {
                write_args(s, vocab, vars, args);
            }
        }
        Kind::Eq(a, b) => {
            let paren = ctx >= 3;
            if paren {
                s.push('(');
            }
            write_term(s, vocab, vars, a);
            s.push_str(" = ");
            write_term(s, vocab, vars, b);
            if paren {
                s.push(')');
            }
        }
        Kind::Not(g) => {
            if let Kind::Eq(a, b) = &g.kind {
                let paren = ctx >= 3;
                if paren {
                    s.push('(');
                }
                write_term(s, vocab, vars, a);
                s.push_str(" ~= ");
                write_term(s, vocab, vars, b);
                if paren {
                    s.push(')');
                }
            } else {
                s.push('~');
                write_formula(s, vocab, vars, g, 3);
            }
        }
        Kind::And(fs) | Kind::Or(fs) => {
            let (op, level, empty) = match f.kind {
                Kind::And(_) => (" & ", 2, "true"),
                _ => (" | ", 1, "false"),
            };
            if fs.is_empty() {
                s.push_str(empty);
                return;
            }
            if fs.len() == 1 {
                write_formula(s, vocab, vars, &fs[0], ctx);
                return;
            }
            let paren = ctx > level;
            if paren {
                s.push('(');
            }
            for (i, c) in fs.iter().enumerate() {
                if i > 0 {
                    s.push_str(op);
                }
                write_formula(s, vocab, vars, c, level + 1);
            }
            if paren {
                s.push(')');
            }
        }
        Kind::Exists(..) | Kind::Forall(..) => {
            let paren = ctx > 0;
            if paren {
                s.push('(');
            }
            let sym = if matches!(f.kind, Kind::Exists(..)) { '?' } else { '!' };
            let mut cur = f;
            s.push(sym);
            loop {
                match (&cur.kind, sym) {
                    (Kind::Exists(v, g), '?') | (Kind::Forall(v, g), '!') => {
                        s.push(' ');
                        s.push_str(vars.name(*v));
                        cur = g;
                    }
                    _ => break,
                }
            }
            s.push_str(" : ");
            write_formula(s, vocab, vars, cur, 0);
            if paren {
                s.push(')');
            }
        }
    }
}

pub fn rule_text(vocab: &Vocabulary, vars: &VarPool, r: &Rule) -> String {
    let mut s = String::new();
    s.push_str(vocab.name(r.head));
    if !r.head_vars.is_empty() {
        s.push('(');
        for (i, v) in r.head_vars.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(vars.name(*v));
        }
        s.push(')');
    }
    s.push_str(" <- ");
    write_formula(&mut s, vocab, vars, &r.body, 0);
    s.push('.');
    s
}

pub fn theory_text(t: &Theory) -> String {
    let mut s = String::new();
    s.push_str("vocab {\n");
    for id in t.vocab.ids() {
        let sym = t.vocab.sym(id);
        let kw = if t.vocab.is_func(id) { "func" } else { "pred" };
        let _ = writeln!(s, "  {kw} {}/{}.", sym.name, sym.arity);
    }
    s.push_str("}\n");
    if !t.vocab.input().is_empty() {
        let names: Vec<&str> = t.vocab.input().iter().map(|i| t.vocab.name(*i)).collect();
        let _ = writeln!(s, "input {{ {} }}", names.join(", "));
    }
    s.push_str("theory {\n");
    for f in &t.sentences {
        let _ = writeln!(s, "  {}.", t.show(f));
    }
    for d in &t.definitions {
        s.push_str("  define {\n");
        for r in &d.rules {
            let _ = writeln!(s, "    {}", rule_text(&t.vocab, &t.vars, r));
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}
