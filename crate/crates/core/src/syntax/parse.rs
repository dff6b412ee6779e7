//! Concrete grammar (Unicode form first, ASCII aliases after the slash):
//!
//! ```text
//! sequent  := [formula {"," formula}] ("∘–" | "⟹" | "=>") formula | formula
//! formula  := disj ["→" | "->" formula]
//! disj     := conj {("∨" | "\/" | "⊔" | "||") conj}
//! conj     := unary {("∧" | "/\" | "⊓" | "&&") unary}
//! unary    := ("¬" | "~") unary | quant var unary | "(" formula ")"
//!           | "⊤" | "top" | "⊥" | "bot" | atom
//! quant    := "∀" | "∃" | "⊓" | "⊔" | "!" | "?" | "&&" | "||"   (ASCII forms take "var:")
//! atom     := term rel term | ident ["(" term {"," term} ")"]
//! rel      := "=" | "≠" | "!=" | "≤" | "<=" | "<"
//! term     := prod {"+" prod}
//! prod     := post {("×" | "·" | "*") post}
//! post     := prim {"′" | "'" | adjacent binary digits}
//! prim     := numeral | var | ident "(" terms ")" | "|" term "|" | "2^" post
//!           | "[" term "]_" post ["^" post] | "(" term ")"
//! ```
//!
//! Binary operators are right-nested. A digit directly after a term is a binary
//! successor: `x0` is `0′′×x` and `x1` is `(0′′×x)′`. A quantifier's variable is
//! one letter with an optional `_n` suffix, so `∀xp(x)` reads as `∀x p(x)`.

use super::ast::{fresh_var, Atom, BinOp, Formula, QuantOp, Sequent, Term};
use super::numeral::Numeral;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("arity mismatch for {name}: used with {a} and {b} arguments")]
    Arity { name: String, a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Bits(String),
    Pow2,
    LParen,
    RParen,
    LBrack,
    BrackSub, // "]_"
    Caret,
    Bar,
    Comma,
    Colon,
    Prime,
    Plus,
    Times,
    Eq,
    Ne,
    Le,
    Lt,
    Not,
    And,
    Or,
    Meet,
    Join,
    All,
    Ex,
    Imp,
    Turnstile,
    Top,
    Bot,
    /// ASCII quantifier prefixes `!` and `?`
    Bang,
    Query,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: usize,
    /// preceded by whitespace
    spaced: bool,
}

fn lex(input: &str) -> Result<(Vec<Token>, usize), ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut spaced = false;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            spaced = true;
            i += 1;
            continue;
        }
        let start = i;
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, len) = if rest.starts_with("∘–") || rest.starts_with("∘-") {
            (Tok::Turnstile, 2)
        } else if rest.starts_with("=>") {
            (Tok::Turnstile, 2)
        } else if rest.starts_with("->") {
            (Tok::Imp, 2)
        } else if rest.starts_with("/\\") {
            (Tok::And, 2)
        } else if rest.starts_with("\\/") {
            (Tok::Or, 2)
        } else if rest.starts_with("&&") {
            (Tok::Meet, 2)
        } else if rest.starts_with("||") {
            (Tok::Join, 2)
        } else if rest.starts_with("!=") {
            (Tok::Ne, 2)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if rest.starts_with("]_") {
            (Tok::BrackSub, 2)
        } else if rest.starts_with("2^") {
            (Tok::Pow2, 2)
        } else {
            match c {
                '⟹' => (Tok::Turnstile, 1),
                '→' => (Tok::Imp, 1),
                '∧' => (Tok::And, 1),
                '∨' => (Tok::Or, 1),
                '⊓' => (Tok::Meet, 1),
                '⊔' => (Tok::Join, 1),
                '∀' => (Tok::All, 1),
                '∃' => (Tok::Ex, 1),
                '¬' | '~' => (Tok::Not, 1),
                '⊤' => (Tok::Top, 1),
                '⊥' => (Tok::Bot, 1),
                '=' => (Tok::Eq, 1),
                '≠' => (Tok::Ne, 1),
                '≤' => (Tok::Le, 1),
                '<' => (Tok::Lt, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBrack, 1),
                '^' => (Tok::Caret, 1),
                '|' => (Tok::Bar, 1),
                ',' => (Tok::Comma, 1),
                ':' => (Tok::Colon, 1),
                '′' | '\'' => (Tok::Prime, 1),
                '+' => (Tok::Plus, 1),
                '×' | '·' | '*' => (Tok::Times, 1),
                '!' => (Tok::Bang, 1),
                '?' => (Tok::Query, 1),
                '0' | '1' => {
                    let mut j = i;
                    while j < chars.len() && (chars[j] == '0' || chars[j] == '1') {
                        j += 1;
                    }
                    let bits: String = chars[i..j].iter().collect();
                    (Tok::Bits(bits), j - i)
                }
                c if c.is_ascii_alphabetic() => {
                    let mut j = i;
                    while j < chars.len() && chars[j].is_ascii_alphabetic() {
                        j += 1;
                    }
                    if j + 1 < chars.len() && chars[j] == '_' && chars[j + 1].is_ascii_digit() {
                        j += 1;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                    let name: String = chars[i..j].iter().collect();
                    let tok = match name.as_str() {
                        "top" => Tok::Top,
                        "bot" => Tok::Bot,
                        _ => Tok::Ident(name),
                    };
                    (tok, j - i)
                }
                _ => {
                    return Err(ParseError::Syntax { offset: i, msg: format!("unexpected character {c:?}") })
                }
            }
        };
        out.push(Token { tok, pos: start, spaced });
        spaced = false;
        i += len;
    }
    Ok((out, chars.len()))
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    end: usize,
    /// furthest failure, reported if every alternative fails
    best: Option<(usize, String)>,
}

type PResult<T> = Result<T, (usize, String)>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.end)
    }

    fn fail<T>(&mut self, msg: &str) -> PResult<T> {
        let p = self.pos();
        if self.best.as_ref().map_or(true, |(b, _)| p >= *b) {
            self.best = Some((p, msg.to_string()));
        }
        Err((p, msg.to_string()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let left = self.disj()?;
        if self.eat(&Tok::Imp) {
            let right = self.formula()?;
            Ok(Formula::imp(left, right))
        } else {
            Ok(left)
        }
    }

    fn disj(&mut self) -> PResult<Formula> {
        let left = self.conj()?;
        let op = match self.peek() {
            Some(Tok::Or) => BinOp::Or,
            Some(Tok::Join) => BinOp::Join,
            _ => return Ok(left),
        };
        self.i += 1;
        let right = self.disj()?;
        Ok(Formula::bin(op, left, right))
    }

    fn conj(&mut self) -> PResult<Formula> {
        let left = self.unary()?;
        let op = match self.peek() {
            Some(Tok::And) => BinOp::And,
            Some(Tok::Meet) => BinOp::Meet,
            _ => return Ok(left),
        };
        self.i += 1;
        let right = self.conj()?;
        Ok(Formula::bin(op, left, right))
    }

    fn quant_var(&mut self, ascii: bool) -> PResult<String> {
        let name = match self.peek() {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return self.fail("expected a variable after quantifier"),
        };
        if ascii {
            self.i += 1;
            self.expect(&Tok::Colon, "':' after quantified variable")?;
            return Ok(name);
        }
        // one letter (plus `_n`), the rest of the identifier starts the body
        let mut chars = name.chars();
        let first = chars.next().unwrap();
        let rest: String = chars.collect();
        if rest.is_empty() || rest.starts_with('_') {
            self.i += 1;
            return Ok(name);
        }
        let pos = self.toks[self.i].pos;
        self.toks[self.i] = Token { tok: Tok::Ident(rest), pos: pos + 1, spaced: false };
        Ok(first.to_string())
    }

    fn unary(&mut self) -> PResult<Formula> {
        let spaced_ascii = |p: &Parser| matches!(p.toks.get(p.i + 2).map(|t| &t.tok), Some(Tok::Colon));
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.i += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Top) => {
                self.i += 1;
                Ok(Formula::True)
            }
            Some(Tok::Bot) => {
                self.i += 1;
                Ok(Formula::False)
            }
            Some(t @ (Tok::All | Tok::Ex | Tok::Meet | Tok::Join | Tok::Bang | Tok::Query)) => {
                let op = match t {
                    Tok::All | Tok::Bang => QuantOp::All,
                    Tok::Ex | Tok::Query => QuantOp::Ex,
                    Tok::Meet => QuantOp::Meet,
                    _ => QuantOp::Join,
                };
                let ascii = matches!(t, Tok::Bang | Tok::Query) || spaced_ascii(self);
                self.i += 1;
                let v = self.quant_var(ascii)?;
                let body = self.unary()?;
                Ok(Formula::Quant(op, v, Box::new(body)))
            }
            Some(Tok::LParen) => {
                let save = self.i;
                if let Ok(a) = self.atom() {
                    return Ok(a);
                }
                self.i = save + 1;
                let f = self.formula()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(_) => self.atom(),
            None => self.fail("unexpected end of input"),
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        let start = self.i;
        // bare predicate letter
        if let Some(Tok::Ident(name)) = self.peek().cloned() {
            let save = self.i;
            let t = self.term()?;
            if let Some((r, pos)) = self.relation() {
                let u = self.term()?;
                return Ok(Formula::Lit(pos, r(t, u)));
            }
            self.i = save;
            self.i += 1;
            let args = if self.peek() == Some(&Tok::LParen) && !self.toks[self.i].spaced {
                self.i += 1;
                self.term_list()?
            } else {
                Vec::new()
            };
            // a predicate atom may not be followed by term operators
            if matches!(self.peek(), Some(Tok::Plus | Tok::Times | Tok::Prime)) {
                self.i = start;
                return self.fail("expected a relation");
            }
            return Ok(Formula::lit(Atom::Pred(name, args)));
        }
        let t = self.term()?;
        match self.relation() {
            Some((r, pos)) => {
                let u = self.term()?;
                Ok(Formula::Lit(pos, r(t, u)))
            }
            None => {
                self.i = start;
                self.fail("expected a relation")
            }
        }
    }

    fn relation(&mut self) -> Option<(fn(Term, Term) -> Atom, bool)> {
        let r: (fn(Term, Term) -> Atom, bool) = match self.peek() {
            Some(Tok::Eq) => (Atom::Eq, true),
            Some(Tok::Ne) => (Atom::Eq, false),
            Some(Tok::Le) => (Atom::Le, true),
            Some(Tok::Lt) => (Atom::Lt, true),
            _ => return None,
        };
        self.i += 1;
        Some(r)
    }

    fn term_list(&mut self) -> PResult<Vec<Term>> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(&Tok::RParen, "')' after arguments")?;
            return Ok(args);
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut t = self.prod()?;
        while self.eat(&Tok::Plus) {
            let u = self.prod()?;
            t = Term::add(t, u);
        }
        Ok(t)
    }

    fn prod(&mut self) -> PResult<Term> {
        let mut t = self.post()?;
        while self.eat(&Tok::Times) {
            let u = self.post()?;
            t = Term::mul(t, u);
        }
        Ok(t)
    }

    fn post(&mut self) -> PResult<Term> {
        let mut t = self.prim()?;
        loop {
            match self.peek() {
                Some(Tok::Prime) => {
                    self.i += 1;
                    t = Term::succ(t);
                }
                Some(Tok::Bits(b)) if !self.toks[self.i].spaced => {
                    let b = b.clone();
                    self.i += 1;
                    for c in b.chars() {
                        t = if c == '0' { Term::bin0(t) } else { Term::bin1(t) };
                    }
                }
                _ => return Ok(t),
            }
        }
    }

    fn prim(&mut self) -> PResult<Term> {
        match self.peek().cloned() {
            Some(Tok::Bits(b)) => {
                self.i += 1;
                match Numeral::parse(&b) {
                    Some(n) => Ok(Term::Num(n)),
                    None => {
                        self.i -= 1;
                        self.fail("numerals may not have leading zeros")
                    }
                }
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                if self.peek() == Some(&Tok::LParen) && !self.toks[self.i].spaced {
                    self.i += 1;
                    let args = self.term_list()?;
                    Ok(Term::App(name, args))
                } else {
                    Ok(Term::Var(name))
                }
            }
            Some(Tok::Bar) => {
                self.i += 1;
                let t = self.term()?;
                self.expect(&Tok::Bar, "closing '|'")?;
                Ok(Term::size(t))
            }
            Some(Tok::Pow2) => {
                self.i += 1;
                let t = self.post()?;
                Ok(Term::Pow2(Box::new(t)))
            }
            Some(Tok::LBrack) => {
                self.i += 1;
                let x = self.term()?;
                self.expect(&Tok::BrackSub, "']_'")?;
                let y = self.post()?;
                if self.eat(&Tok::Caret) {
                    let z = self.post()?;
                    Ok(Term::Substr(Box::new(x), Box::new(y), Box::new(z)))
                } else {
                    Ok(Term::Bit(Box::new(x), Box::new(y)))
                }
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let t = self.term()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(t)
            }
            _ => self.fail("expected a term"),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if self.i < self.toks.len() {
            return self.fail("unexpected trailing input");
        }
        Ok(())
    }
}

fn to_error(p: &Parser, e: (usize, String)) -> ParseError {
    let (offset, msg) = p.best.clone().filter(|(b, _)| *b >= e.0).unwrap_or(e);
    ParseError::Syntax { offset, msg }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let s = parse_sequent(text)?;
    if !s.ant.is_empty() || text_has_turnstile(text) {
        return Err(ParseError::Syntax { offset: 0, msg: "expected a formula, found a sequent".into() });
    }
    Ok(s.succ)
}

fn text_has_turnstile(text: &str) -> bool {
    lex(text).map(|(t, _)| t.iter().any(|t| t.tok == Tok::Turnstile)).unwrap_or(false)
}

pub fn parse_sequent(text: &str) -> Result<Sequent, ParseError> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, i: 0, end, best: None };
    let mut forms = Vec::new();
    let seq = (|| -> PResult<Sequent> {
        if p.eat(&Tok::Turnstile) {
            let succ = p.formula()?;
            p.finish()?;
            return Ok(Sequent::new(vec![], succ));
        }
        loop {
            forms.push(p.formula()?);
            if p.eat(&Tok::Comma) {
                continue;
            }
            break;
        }
        if p.eat(&Tok::Turnstile) {
            let succ = p.formula()?;
            p.finish()?;
            Ok(Sequent::new(std::mem::take(&mut forms), succ))
        } else {
            p.finish()?;
            if forms.len() != 1 {
                return p.fail("expected '∘–' after antecedent");
            }
            Ok(Sequent::new(vec![], forms.pop().unwrap()))
        }
    })();
    let seq = seq.map_err(|e| to_error(&p, e))?;
    check_arity(&seq)?;
    Ok(hygiene(seq))
}

/// Renames bound variables that clash with free ones (x, x_1, x_2, ...).
pub fn hygiene(s: Sequent) -> Sequent {
    let free = s.free_vars();
    let bound = s.bound_vars();
    let clashes: Vec<String> = bound.intersection(&free).cloned().collect();
    if clashes.is_empty() {
        return s;
    }
    let mut taken: BTreeSet<String> = s.all_vars();
    let mut out = s;
    for c in clashes {
        let fresh = fresh_var(&c, &taken);
        taken.insert(fresh.clone());
        out.ant = out.ant.iter().map(|f| f.rename_bound(&c, &fresh)).collect();
        out.succ = out.succ.rename_bound(&c, &fresh);
    }
    out
}

fn check_arity(s: &Sequent) -> Result<(), ParseError> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    fn term(t: &Term, seen: &mut BTreeMap<String, usize>) -> Result<(), ParseError> {
        match t {
            Term::App(n, args) => {
                note(&format!("f:{n}"), args.len(), seen)?;
                args.iter().try_for_each(|a| term(a, seen))
            }
            Term::Succ(a) | Term::Size(a) | Term::Pow2(a) => term(a, seen),
            Term::Add(a, b) | Term::Mul(a, b) | Term::Bit(a, b) => {
                term(a, seen)?;
                term(b, seen)
            }
            Term::Substr(a, b, c) => {
                term(a, seen)?;
                term(b, seen)?;
                term(c, seen)
            }
            _ => Ok(()),
        }
    }
    fn note(key: &str, n: usize, seen: &mut BTreeMap<String, usize>) -> Result<(), ParseError> {
        if let Some(&m) = seen.get(key) {
            if m != n {
                return Err(ParseError::Arity { name: key[2..].to_string(), a: m, b: n });
            }
        }
        seen.insert(key.to_string(), n);
        Ok(())
    }
    fn form(f: &Formula, seen: &mut BTreeMap<String, usize>) -> Result<(), ParseError> {
        match f {
            Formula::Lit(_, a) => {
                if let Atom::Pred(n, args) = a {
                    note(&format!("p:{n}"), args.len(), seen)?;
                }
                a.terms().into_iter().try_for_each(|t| term(t, seen))
            }
            Formula::Bin(_, a, b) => {
                form(a, seen)?;
                form(b, seen)
            }
            Formula::Quant(_, _, b) => form(b, seen),
            _ => Ok(()),
        }
    }
    for f in s.formulas() {
        form(f, &mut seen)?;
    }
    Ok(())
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, i: 0, end, best: None };
    let r = (|| -> PResult<Term> {
        let t = p.term()?;
        p.finish()?;
        Ok(t)
    })();
    r.map_err(|e| to_error(&p, e))
}
