//! Reader for the `.fog` ground format written by [`GroundTheory::to_fog`].

use std::collections::HashMap;

use super::{GAtom, GDefinition, GFormula, GRule, GroundTheory};
use crate::logic::{SymId, Vocabulary};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FogError {
    #[error("missing `fog 1` header")]
    Header,
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 12] = ["<=>", "<-", "~=", "~", "&", "|", "(", ")", ",", "=", ".", "{"];

fn lex(line: &str, no: usize) -> Result<Vec<Tok>, FogError> {
    let mut out = Vec::new();
    let mut rest = line.trim_start();
    while !rest.is_empty() {
        if let Some(sym) = SYMBOLS.iter().chain(["}"].iter()).find(|s| rest.starts_with(**s)) {
            out.push(Tok::Sym(sym));
            rest = &rest[sym.len()..];
        } else {
            let end = rest.find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\'')).unwrap_or(rest.len());
            if end == 0 {
                return Err(FogError::Syntax { line: no, msg: format!("unexpected `{}`", rest.chars().next().unwrap()) });
            }
            out.push(Tok::Ident(rest[..end].to_string()));
            rest = &rest[end..];
        }
        rest = rest.trim_start();
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
    vocab: &'a mut Vocabulary,
    elements: &'a HashMap<String, u32>,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FogError> {
        Err(FogError::Syntax { line: self.line, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), FogError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> Result<String, FogError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn element(&mut self) -> Result<u32, FogError> {
        let name = self.ident()?;
        match self.elements.get(&name) {
            Some(d) => Ok(*d),
            None => self.err(format!("unknown domain element `{name}`")),
        }
    }

    fn symbol(&mut self, name: &str, arity: usize) -> Result<SymId, FogError> {
        match self.vocab.lookup(name) {
            Some(p) if self.vocab.arity(p) == arity => Ok(p),
            Some(_) => self.err(format!("`{name}` used with the wrong arity")),
            None => Ok(self.vocab.add_pred(name, arity).expect("fresh name")),
        }
    }

    fn equiv(&mut self) -> Result<GFormula, FogError> {
        let a = self.or()?;
        if self.eat("<=>") {
            let b = self.or()?;
            return Ok(GFormula::Equiv(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn or(&mut self) -> Result<GFormula, FogError> {
        let mut parts = vec![self.and()?];
        while self.eat("|") {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { GFormula::Or(parts) })
    }

    fn and(&mut self) -> Result<GFormula, FogError> {
        let mut parts = vec![self.unary()?];
        while self.eat("&") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { GFormula::And(parts) })
    }

    fn unary(&mut self) -> Result<GFormula, FogError> {
        if self.eat("~") {
            return Ok(GFormula::Not(Box::new(self.unary()?)));
        }
        if self.eat("(") {
            let f = self.equiv()?;
            self.expect(")")?;
            return Ok(f);
        }
        self.atomic()
    }

    fn atomic(&mut self) -> Result<GFormula, FogError> {
        let name = self.ident()?;
        match name.as_str() {
            "true" => return Ok(GFormula::True),
            "false" => return Ok(GFormula::False),
            _ => {}
        }
        let mut args = Vec::new();
        let parens = self.eat("(");
        if parens {
            loop {
                args.push(self.element()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        let func = self.vocab.lookup(&name).filter(|f| self.vocab.is_func(*f));
        let negated = if self.eat("=") {
            false
        } else if self.eat("~=") {
            true
        } else {
            if func.is_some() {
                return self.err(format!("function `{name}` without a value"));
            }
            let p = self.symbol(&name, args.len())?;
            return Ok(GFormula::atom(p, args));
        };
        let atom = match func {
            Some(f) => {
                args.push(self.element()?);
                GFormula::atom(f, args)
            }
            None if !parens => match self.elements.get(&name) {
                Some(a) => GFormula::Eq(*a, self.element()?),
                None => return self.err(format!("unknown domain element `{name}`")),
            },
            None => return self.err(format!("`{name}` is not a function")),
        };
        Ok(if negated { GFormula::Not(Box::new(atom)) } else { atom })
    }

    fn head(&mut self) -> Result<GAtom, FogError> {
        match self.atomic()? {
            GFormula::Atom(a) if !self.vocab.is_func(a.sym) => Ok(a),
            _ => self.err("rule head must be a predicate atom"),
        }
    }

    fn done(&self) -> Result<(), FogError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("trailing input")
        }
    }
}

/// Parses `.fog` text. Names not in `vocab` become predicates of the arity
/// they are used with.
pub fn parse_fog(text: &str, vocab: &Vocabulary, domain: &[String]) -> Result<GroundTheory, FogError> {
    let elements: HashMap<String, u32> = domain.iter().enumerate().map(|(i, d)| (d.clone(), i as u32)).collect();
    let mut g = GroundTheory::new(vocab.clone(), domain.to_vec());
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == "fog 1" => {}
        _ => return Err(FogError::Header),
    }
    let mut open: Option<GDefinition> = None;
    for (i, line) in lines {
        let toks = lex(line, i + 1)?;
        if toks == [Tok::Sym("{")] {
            if open.is_some() {
                return Err(FogError::Syntax { line: i + 1, msg: "nested definition".into() });
            }
            open = Some(GDefinition::default());
            continue;
        }
        if toks == [Tok::Sym("}")] {
            match open.take() {
                Some(d) => g.definitions.push(d),
                None => return Err(FogError::Syntax { line: i + 1, msg: "unmatched `}`".into() }),
            }
            continue;
        }
        let mut p = Parser { toks, pos: 0, line: i + 1, vocab: &mut g.vocab, elements: &elements };
        match open.as_mut() {
            Some(d) => {
                let head = p.head()?;
                p.expect("<-")?;
                let body = p.equiv()?;
                p.expect(".")?;
                p.done()?;
                if !d.defined.contains(&head.sym) {
                    d.defined.push(head.sym);
                }
                d.rules.push(GRule { head, body });
            }
            None => {
                let f = p.equiv()?;
                p.expect(".")?;
                p.done()?;
                g.sentences.push(f);
            }
        }
    }
    if open.is_some() {
        return Err(FogError::Syntax { line: text.lines().count(), msg: "unterminated definition".into() });
    }
    Ok(g)
}
