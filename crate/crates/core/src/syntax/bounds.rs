use super::ast::{Atom, BinOp, Formula, QuantOp, Term};

/// `|x| ≤ τ(|y1|,…,|yn|)` with τ built from numerals, `′`, `+`, `×` and sizes of
/// variables other than `x`.
pub fn is_polynomial_sizebound(s: &Formula, x: &str) -> bool {
    match s {
        Formula::Lit(true, Atom::Le(Term::Size(lhs), tau)) => {
            matches!(lhs.as_ref(), Term::Var(v) if v == x) && size_combination(tau, x)
        }
        _ => false,
    }
}

fn size_combination(t: &Term, x: &str) -> bool {
    match t {
        Term::Num(_) => true,
        Term::Succ(a) => size_combination(a, x),
        Term::Add(a, b) | Term::Mul(a, b) => size_combination(a, x) && size_combination(b, x),
        Term::Size(a) => matches!(a.as_ref(), Term::Var(v) if v != x),
        _ => false,
    }
}

/// Checks that every `⊓x G` has `G = S(x) → H(x)` and every `⊔x G` has
/// `G = S(x) ∧ H(x)` with `S` a polynomial sizebound. On failure returns the
/// path (child selectors, through any operator) of the offending quantifier.
pub fn check_polynomially_bounded(f: &Formula) -> Result<(), Vec<usize>> {
    fn go(f: &Formula, path: &mut Vec<usize>) -> Result<(), Vec<usize>> {
        match f {
            Formula::Bin(_, a, b) => {
                path.push(0);
                go(a, path)?;
                path.pop();
                path.push(1);
                go(b, path)?;
                path.pop();
                Ok(())
            }
            Formula::Quant(op, v, body) => {
                let ok = match op {
                    QuantOp::Meet => matches!(body.as_ref(),
                        Formula::Bin(BinOp::Or, s, _) if is_polynomial_sizebound(&s.neg(), v)),
                    QuantOp::Join => matches!(body.as_ref(),
                        Formula::Bin(BinOp::And, s, _) if is_polynomial_sizebound(s, v)),
                    _ => true,
                };
                if !ok {
                    return Err(path.clone());
                }
                path.push(0);
                go(body, path)?;
                path.pop();
                Ok(())
            }
            _ => Ok(()),
        }
    }
    go(f, &mut Vec::new())
}

pub fn is_polynomially_bounded(f: &Formula) -> bool {
    check_polynomially_bounded(f).is_ok()
}

/// For `⊔y(S ∧ H)` with `S` a sizebound for `y`, returns `S`.
pub fn guarding_sizebound<'a>(v: &str, body: &'a Formula) -> Option<&'a Formula> {
    match body {
        Formula::Bin(BinOp::And, s, _) if is_polynomial_sizebound(s, v) => Some(s),
        _ => None,
    }
}
