//! Recursive-descent parser for theory files.
//!
//! ```text
//! vocab { pred Edge/2. pred Sub/2. func Colour/1. }
//! input { Edge }
//! theory {
//!   ! u v : Sub(u,v) => Edge(u,v).
//!   define { Reach(x) <- Start(x) | ? y : Reach(y) & Edge(y,x). }
//! }
//! ```

use std::collections::BTreeSet;

use super::{Definition, Formula, LogicError, Rule, SymKind, Term, Theory, Var, VarPool, Vocabulary};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(usize),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 20] = [
    "<=>", "<-", "=>", "->", "~=", "{", "}", "(", ")", ",", ".", ":", ";", "/", "!", "?", "&", "|", "~", "=",
];

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, LogicError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token { tok: Tok::Ident(s), line: start_line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let mut n = 0usize;
            while i < chars.len() && chars[i].is_ascii_digit() {
                n = n * 10 + chars[i].to_digit(10).unwrap() as usize;
                i += 1;
                col += 1;
            }
            out.push(Token { tok: Tok::Int(n), line: start_line, col: start_col });
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), line: start_line, col: start_col });
            }
            None => {
                return Err(LogicError::Syntax { line, col, msg: format!("unexpected character '{c}'") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T, LogicError> {
        let t = self.peek();
        Err(LogicError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), LogicError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected '{s}', found {}", describe(&self.peek().tok)))
        }
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == s)
    }

    pub fn ident(&mut self) -> Result<String, LogicError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            t => self.error(format!("expected identifier, found {}", describe(t))),
        }
    }

    pub fn int(&mut self) -> Result<usize, LogicError> {
        match self.peek().tok {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            ref t => self.error(format!("expected number, found {}", describe(t))),
        }
    }
}

pub(crate) fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Int(n) => format!("'{n}'"),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses a complete theory file.
pub fn parse_theory(text: &str) -> Result<Theory, LogicError> {
    let mut c = Cursor::new(lex(text)?);
    let mut t = Theory::default();
    loop {
        if matches!(c.peek().tok, Tok::Eof) {
            break;
        }
        let kw = c.ident()?;
        match kw.as_str() {
            "vocab" => parse_vocab(&mut c, &mut t.vocab)?,
            "input" => parse_input(&mut c, &mut t.vocab)?,
            "theory" => parse_body(&mut c, &mut t)?,
            other => {
                return Err(LogicError::Syntax {
                    line: c.toks[c.pos.saturating_sub(1)].line,
                    col: c.toks[c.pos.saturating_sub(1)].col,
                    msg: format!("unknown section '{other}'"),
                })
            }
        }
    }
    t.renumber();
    t.validate()?;
    Ok(t)
}

fn parse_vocab(c: &mut Cursor, v: &mut Vocabulary) -> Result<(), LogicError> {
    c.expect_sym("{")?;
    while !c.eat_sym("}") {
        let kind = c.ident()?;
        let kind = match kind.as_str() {
            "pred" => SymKind::Pred,
            "func" => SymKind::Func,
            _ => return c.error(format!("expected 'pred' or 'func', found '{kind}'")),
        };
        let name = c.ident()?;
        c.expect_sym("/")?;
        let arity = c.int()?;
        c.expect_sym(".")?;
        match kind {
            SymKind::Pred => v.add_pred(&name, arity)?,
            SymKind::Func => v.add_func(&name, arity)?,
        };
    }
    Ok(())
}

fn parse_input(c: &mut Cursor, v: &mut Vocabulary) -> Result<(), LogicError> {
    c.expect_sym("{")?;
    if c.eat_sym("}") {
        return Ok(());
    }
    loop {
        let name = c.ident()?;
        let id = v.lookup(&name).ok_or(LogicError::Undeclared(name))?;
        v.set_input(id);
        if c.eat_sym("}") {
            return Ok(());
        }
        c.expect_sym(",")?;
    }
}

fn parse_body(c: &mut Cursor, t: &mut Theory) -> Result<(), LogicError> {
    c.expect_sym("{")?;
    while !c.eat_sym("}") {
        if c.is_ident("define") && matches!(c.peek_at(1), Tok::Sym("{")) {
            c.next();
            c.next();
            let mut def = Definition::default();
            while !c.eat_sym("}") {
                def.rules.push(parse_rule(c, t)?);
            }
            t.definitions.push(def);
        } else {
            let mut p = FormulaParser { c, vocab: &t.vocab, vars: &mut t.vars, scope: Vec::new() };
            let f = p.formula()?;
            c.expect_sym(".")?;
            t.sentences.push(f);
        }
    }
    Ok(())
}

fn parse_rule(c: &mut Cursor, t: &mut Theory) -> Result<Rule, LogicError> {
    let name = c.ident()?;
    let head = t.vocab.lookup(&name).ok_or_else(|| LogicError::Undeclared(name.clone()))?;
    if t.vocab.is_func(head) {
        return c.error(format!("rule head {name} is a function symbol"));
    }
    let mut names = Vec::new();
    if c.eat_sym("(") {
        loop {
            names.push(c.ident()?);
            if c.eat_sym(")") {
                break;
            }
            c.expect_sym(",")?;
        }
    }
    if names.len() != t.vocab.arity(head) {
        return Err(LogicError::Arity { name, expected: t.vocab.arity(head), found: names.len() });
    }
    let distinct: BTreeSet<&String> = names.iter().collect();
    if distinct.len() != names.len() {
        return Err(LogicError::IllFormed(format!("head arguments of {name} are not distinct variables")));
    }
    let mut scope = Vec::new();
    let mut head_vars = Vec::new();
    for n in &names {
        if t.vocab.lookup(n).is_some() {
            return Err(LogicError::IllFormed(format!("head argument {n} of {name} is a declared symbol")));
        }
        let v = t.vars.named(n);
        scope.push((n.clone(), v));
        head_vars.push(v);
    }
    let body = if c.eat_sym("<-") {
        let mut p = FormulaParser { c, vocab: &t.vocab, vars: &mut t.vars, scope };
        p.formula()?
    } else {
        Formula::top()
    };
    c.expect_sym(".")?;
    Ok(Rule { head, head_vars, body })
}

/// Parses a single formula over `vocab`; free identifiers must be symbols.
pub fn parse_formula(text: &str, vocab: &Vocabulary, vars: &mut VarPool) -> Result<Formula, LogicError> {
    let mut c = Cursor::new(lex(text)?);
    let mut p = FormulaParser { c: &mut c, vocab, vars, scope: Vec::new() };
    let f = p.formula()?;
    if !matches!(c.peek().tok, Tok::Eof) {
        return c.error(format!("unexpected {}", describe(&c.peek().tok)));
    }
    Ok(f)
}

struct FormulaParser<'a> {
    c: &'a mut Cursor,
    vocab: &'a Vocabulary,
    vars: &'a mut VarPool,
    scope: Vec<(String, Var)>,
}

impl FormulaParser<'_> {
    fn lookup_var(&self, name: &str) -> Option<Var> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let mut f = self.implication()?;
        while self.c.eat_sym("<=>") {
            let g = self.implication()?;
            f = Formula::equiv(f, g);
        }
        Ok(f)
    }

    fn implication(&mut self) -> Result<Formula, LogicError> {
        let f = self.disjunction()?;
        if self.c.eat_sym("=>") {
            let g = self.implication()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut parts = vec![self.conjunction()?];
        while self.c.eat_sym("|") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut parts = vec![self.unary()?];
        while self.c.eat_sym("&") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::and(parts) })
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if self.c.eat_sym("~") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.c.is_sym("!") || self.c.is_sym("?") {
            let universal = self.c.is_sym("!");
            self.c.next();
            let mut bound = Vec::new();
            while let Tok::Ident(name) = &self.c.peek().tok {
                let name = name.clone();
                if self.vocab.lookup(&name).is_some() {
                    return self.c.error(format!("cannot quantify over declared symbol '{name}'"));
                }
                self.c.next();
                let v = self.vars.named(&name);
                bound.push((name, v));
            }
            if bound.is_empty() {
                return self.c.error("expected variable after quantifier");
            }
            self.c.expect_sym(":")?;
            let depth = self.scope.len();
            self.scope.extend(bound.iter().cloned());
            let body = self.formula()?;
            self.scope.truncate(depth);
            let vs: Vec<Var> = bound.iter().map(|(_, v)| *v).collect();
            return Ok(if universal { Formula::forall_all(&vs, body) } else { Formula::exists_all(&vs, body) });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, LogicError> {
        if self.c.is_sym("(") {
            let open = self.c.peek().clone();
            self.c.next();
            let f = self.formula()?;
            if !self.c.eat_sym(")") {
                return self.c.error(format!(
                    "expected ')' to close '(' opened at {}:{}, found {}",
                    open.line,
                    open.col,
                    describe(&self.c.peek().tok)
                ));
            }
            return Ok(f);
        }
        if self.c.is_ident("true") {
            self.c.next();
            return Ok(Formula::top());
        }
        if self.c.is_ident("false") {
            self.c.next();
            return Ok(Formula::bot());
        }
        let name = match &self.c.peek().tok {
            Tok::Ident(s) => s.clone(),
            t => return self.c.error(format!("expected formula, found {}", describe(t))),
        };
        if self.lookup_var(&name).is_none() {
            if let Some(p) = self.vocab.lookup(&name) {
                if !self.vocab.is_func(p) {
                    self.c.next();
                    let args = self.args(&name)?;
                    if args.len() != self.vocab.arity(p) {
                        return Err(LogicError::Arity { name, expected: self.vocab.arity(p), found: args.len() });
                    }
                    return Ok(Formula::atom(p, args));
                }
            }
        }
        let lhs = self.term()?;
        if self.c.eat_sym("=") {
            let rhs = self.term()?;
            Ok(Formula::eq(lhs, rhs))
        } else if self.c.eat_sym("~=") {
            let rhs = self.term()?;
            Ok(Formula::not(Formula::eq(lhs, rhs)))
        } else {
            self.c.error(format!("expected '=' after term, found {}", describe(&self.c.peek().tok)))
        }
    }

    fn args(&mut self, owner: &str) -> Result<Vec<Term>, LogicError> {
        let mut args = Vec::new();
        if self.c.is_sym("(") {
            let open = self.c.peek().clone();
            self.c.next();
            loop {
                args.push(self.term()?);
                if self.c.eat_sym(")") {
                    break;
                }
                if !self.c.eat_sym(",") {
                    return self.c.error(format!(
                        "expected ',' or ')' in arguments of {owner} opened at {}:{}, found {}",
                        open.line,
                        open.col,
                        describe(&self.c.peek().tok)
                    ));
                }
            }
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let name = self.c.ident()?;
        if let Some(v) = self.lookup_var(&name) {
            return Ok(Term::Var(v));
        }
        match self.vocab.lookup(&name) {
            Some(f) if self.vocab.is_func(f) => {
                let args = self.args(&name)?;
                if args.len() != self.vocab.arity(f) {
                    return Err(LogicError::Arity { name, expected: self.vocab.arity(f), found: args.len() });
                }
                Ok(Term::App(f, args))
            }
            Some(_) => self.c.error(format!("predicate {name} used as a term")),
            None => Err(LogicError::Undeclared(name)),
        }
    }
}
