//! Structure files.
//!
//! ```text
//! domain = { a; b; c }
//! Edge = { (a,b); (b,c) }
//! Colour = { (a) -> b; (b) -> a; (c) -> a }
//! Start = a
//! ```

use super::{rank, tuple_count, FiniteStructure, StructError};
use crate::logic::parse::{describe, lex, Cursor, Tok};
use crate::logic::{LogicError, Vocabulary};

fn lift(e: LogicError) -> StructError {
    match e {
        LogicError::Syntax { line, col, msg } => StructError::Syntax { line, col, msg },
        other => StructError::Syntax { line: 0, col: 0, msg: other.to_string() },
    }
}

fn element(c: &mut Cursor) -> Result<String, StructError> {
    match c.peek().tok.clone() {
        Tok::Ident(s) => {
            c.next();
            Ok(s)
        }
        Tok::Int(n) => {
            c.next();
            Ok(n.to_string())
        }
        t => c.error(format!("expected domain element, found {}", describe(&t))).map_err(lift),
    }
}

/// A tuple `(d1,…,dn)`, or a bare element for unary tuples.
fn tuple(c: &mut Cursor) -> Result<Vec<String>, StructError> {
    if !c.eat_sym("(") {
        return Ok(vec![element(c)?]);
    }
    let mut out = Vec::new();
    if c.eat_sym(")") {
        return Ok(out);
    }
    loop {
        out.push(element(c)?);
        if c.eat_sym(")") {
            return Ok(out);
        }
        c.expect_sym(",").map_err(lift)?;
    }
}

/// Parses a structure over `vocab`. Symbols absent from the file stay uninterpreted.
pub fn parse_structure(text: &str, vocab: &Vocabulary) -> Result<FiniteStructure, StructError> {
    let mut c = Cursor::new(lex(text).map_err(lift)?);
    if !c.is_ident("domain") {
        return c.error("structure must start with 'domain'").map_err(lift);
    }
    c.next();
    c.expect_sym("=").map_err(lift)?;
    c.expect_sym("{").map_err(lift)?;
    let mut domain = Vec::new();
    while !c.eat_sym("}") {
        domain.push(element(&mut c)?);
        if !c.eat_sym(";") && !c.is_sym("}") {
            return c.error("expected ';' or '}' in domain").map_err(lift);
        }
    }
    let mut s = FiniteStructure::new(vocab.clone(), domain)?;
    let n = s.size();
    let lookup = |s: &FiniteStructure, name: &str| s.element(name).ok_or_else(|| StructError::UnknownElement(name.into()));
    while !matches!(c.peek().tok, Tok::Eof) {
        let name = c.ident().map_err(lift)?;
        let sym = vocab.lookup(&name).ok_or_else(|| StructError::UnknownSymbol(name.clone()))?;
        if s.interprets(sym) {
            return Err(StructError::Reinterpreted(name));
        }
        let arity = vocab.arity(sym);
        c.expect_sym("=").map_err(lift)?;
        if vocab.is_func(sym) {
            if arity == 0 && !c.is_sym("{") {
                let d = element(&mut c)?;
                let d = lookup(&s, &d)?;
                s.set_func(sym, vec![d]);
            } else {
                c.expect_sym("{").map_err(lift)?;
                let mut values: Vec<Option<u32>> = vec![None; tuple_count(arity, n)];
                while !c.eat_sym("}") {
                    let t = tuple(&mut c)?;
                    if t.len() != arity {
                        return Err(StructError::Arity { name, expected: arity, found: t.len() });
                    }
                    c.expect_sym("->").map_err(lift)?;
                    let v = element(&mut c)?;
                    let args = t.iter().map(|d| lookup(&s, d)).collect::<Result<Vec<_>, _>>()?;
                    let v = lookup(&s, &v)?;
                    let slot = &mut values[rank(&args, n)];
                    if slot.is_some_and(|old| old != v) {
                        return Err(StructError::Conflict(name));
                    }
                    *slot = Some(v);
                    if !c.eat_sym(";") && !c.is_sym("}") {
                        return c.error("expected ';' or '}'").map_err(lift);
                    }
                }
                let total: Option<Vec<u32>> = values.into_iter().collect();
                s.set_func(sym, total.ok_or(StructError::NotTotal(name))?);
            }
        } else if arity == 0 && (c.is_ident("true") || c.is_ident("false")) {
            let v = c.is_ident("true");
            c.next();
            s.set_pred(sym, if v { vec![vec![]] } else { vec![] });
        } else {
            c.expect_sym("{").map_err(lift)?;
            s.clear_pred(sym);
            while !c.eat_sym("}") {
                let t = tuple(&mut c)?;
                if t.len() != arity {
                    return Err(StructError::Arity { name, expected: arity, found: t.len() });
                }
                let args = t.iter().map(|d| lookup(&s, d)).collect::<Result<Vec<_>, _>>()?;
                s.insert(sym, &args);
                if !c.eat_sym(";") && !c.is_sym("}") {
                    return c.error("expected ';' or '}'").map_err(lift);
                }
            }
        }
        c.eat_sym(".");
    }
    Ok(s)
}
