use super::ast::{Atom, BinOp, Formula, Sequent, Term};

pub fn term_to_string(t: &Term) -> String {
    term_at(t, 0)
}

fn needs_digit_parens(s: &str, t: &Term) -> bool {
    match t {
        Term::Num(_) => true,
        Term::Var(v) => v.contains('_'),
        _ => s.ends_with(|c: char| c.is_ascii_digit()) && t.as_bin0().is_none() && t.as_bin1().is_none(),
    }
}

fn term_prec(t: &Term) -> u8 {
    if t.as_bin0().is_some() || t.as_bin1().is_some() {
        return 3;
    }
    match t {
        Term::Add(..) => 1,
        Term::Mul(..) => 2,
        _ => 3,
    }
}

fn term_at(t: &Term, min: u8) -> String {
    let s = term_raw(t);
    if term_prec(t) < min {
        format!("({s})")
    } else {
        s
    }
}

fn postfix_operand(t: &Term) -> String {
    term_at(t, 3)
}

fn term_raw(t: &Term) -> String {
    if let Some(inner) = t.as_bin1() {
        return digit_postfix(inner, '1');
    }
    if let Some(inner) = t.as_bin0() {
        return digit_postfix(inner, '0');
    }
    match t {
        Term::Var(v) => v.clone(),
        Term::Num(n) => n.bits(),
        Term::Succ(a) => format!("{}′", postfix_operand(a)),
        Term::Add(a, b) => format!("{}+{}", term_at(a, 1), term_at(b, 2)),
        Term::Mul(a, b) => format!("{}×{}", term_at(a, 2), term_at(b, 3)),
        Term::App(f, args) => {
            let a: Vec<String> = args.iter().map(|x| term_at(x, 0)).collect();
            format!("{f}({})", a.join(","))
        }
        Term::Size(a) => format!("|{}|", term_at(a, 0)),
        Term::Pow2(a) => format!("2^{}", postfix_operand(a)),
        Term::Bit(a, b) => format!("[{}]_{}", term_at(a, 0), postfix_operand(b)),
        Term::Substr(a, b, c) => {
            format!("[{}]_{}^{}", term_at(a, 0), postfix_operand(b), postfix_operand(c))
        }
    }
}

fn digit_postfix(inner: &Term, d: char) -> String {
    let s = postfix_operand(inner);
    if needs_digit_parens(&s, inner) && !s.starts_with('(') {
        format!("({s}){d}")
    } else {
        format!("{s}{d}")
    }
}

fn atom_to_string(a: &Atom, pos: bool) -> String {
    match (a, pos) {
        (Atom::Pred(p, args), _) => {
            let body = if args.is_empty() {
                p.clone()
            } else {
                let a: Vec<String> = args.iter().map(term_to_string).collect();
                format!("{p}({})", a.join(","))
            };
            if pos {
                body
            } else {
                format!("¬{body}")
            }
        }
        (Atom::Eq(x, y), true) => format!("{}={}", term_to_string(x), term_to_string(y)),
        (Atom::Eq(x, y), false) => format!("{}≠{}", term_to_string(x), term_to_string(y)),
        (Atom::Le(x, y), p) => {
            let s = format!("{}≤{}", term_to_string(x), term_to_string(y));
            if p {
                s
            } else {
                format!("¬{s}")
            }
        }
        (Atom::Lt(x, y), p) => {
            let s = format!("{}<{}", term_to_string(x), term_to_string(y));
            if p {
                s
            } else {
                format!("¬{s}")
            }
        }
    }
}

/// Whether `a ∨ b` is shown as `ā → b`.
fn sugared(a: &Formula) -> bool {
    if matches!(a, Formula::True | Formula::False) {
        return false;
    }
    let d = a.neg();
    d.negation_count() <= a.negation_count() && a.negation_count() > 0
}

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Bin(BinOp::Or, a, _) if sugared(a) => 0,
        Formula::Bin(BinOp::Or | BinOp::Join, ..) => 1,
        Formula::Bin(BinOp::And | BinOp::Meet, ..) => 2,
        _ => 3,
    }
}

fn paren_if(s: String, cond: bool) -> String {
    if cond {
        format!("({s})")
    } else {
        s
    }
}

pub fn formula_to_string(f: &Formula) -> String {
    match f {
        Formula::True => "⊤".into(),
        Formula::False => "⊥".into(),
        Formula::Lit(p, a) => atom_to_string(a, *p),
        Formula::Bin(BinOp::Or, a, b) if sugared(a) => {
            let l = a.neg();
            let ls = paren_if(formula_to_string(&l), prec(&l) == 0);
            format!("{ls} → {}", formula_to_string(b))
        }
        Formula::Bin(op, a, b) => {
            let lvl = prec(f);
            let ls = paren_if(formula_to_string(a), prec(a) <= lvl);
            let rs = paren_if(
                formula_to_string(b),
                prec(b) < lvl || (prec(b) == lvl && !same_top(b, *op)),
            );
            format!("{ls} {} {rs}", op.symbol())
        }
        Formula::Quant(op, v, body) => {
            let bs = formula_to_string(body);
            let wrap = prec(body) < 3
                || matches!(body.as_ref(), Formula::Lit(_, Atom::Eq(..) | Atom::Le(..) | Atom::Lt(..)));
            if wrap {
                format!("{}{v}({bs})", op.symbol())
            } else if bs.starts_with(|c: char| c.is_alphanumeric() || c == '_') {
                format!("{}{v} {bs}", op.symbol())
            } else {
                format!("{}{v}{bs}", op.symbol())
            }
        }
    }
}

fn same_top(f: &Formula, op: BinOp) -> bool {
    matches!(f, Formula::Bin(o, ..) if *o == op)
}

pub fn sequent_to_string(s: &Sequent) -> String {
    let ants: Vec<String> = s.ant.iter().map(formula_to_string).collect();
    if ants.is_empty() {
        format!("∘– {}", formula_to_string(&s.succ))
    } else {
        format!("{} ∘– {}", ants.join(", "), formula_to_string(&s.succ))
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&formula_to_string(self))
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&term_to_string(self))
    }
}

impl std::fmt::Display for Sequent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&sequent_to_string(self))
    }
}
