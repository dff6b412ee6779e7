use super::numeral::Numeral;
use num_bigint::BigUint;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Num(Numeral),
    Succ(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    App(String, Vec<Term>),
    /// `|t|`
    Size(Box<Term>),
    /// `2^t`
    Pow2(Box<Term>),
    /// `[t]_u`
    Bit(Box<Term>, Box<Term>),
    /// `[t]_u^v`
    Substr(Box<Term>, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn num(v: u64) -> Term {
        Term::Num(Numeral::from_u64(v))
    }

    pub fn big(v: BigUint) -> Term {
        Term::Num(Numeral::from_value(v))
    }

    pub fn zero() -> Term {
        Term::num(0)
    }

    pub fn succ(t: Term) -> Term {
        Term::Succ(Box::new(t))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn size(t: Term) -> Term {
        Term::Size(Box::new(t))
    }

    /// `t0`, i.e. `0′′ × t`.
    pub fn bin0(t: Term) -> Term {
        Term::mul(Term::succ(Term::succ(Term::zero())), t)
    }

    /// `t1`, i.e. `(0′′ × t)′`.
    pub fn bin1(t: Term) -> Term {
        Term::succ(Term::bin0(t))
    }

    /// If the term is `0′′ × t`, returns `t`.
    pub fn as_bin0(&self) -> Option<&Term> {
        if let Term::Mul(a, b) = self {
            if let Term::Succ(a1) = a.as_ref() {
                if let Term::Succ(a2) = a1.as_ref() {
                    if let Term::Num(n) = a2.as_ref() {
                        if n.size() == 0 {
                            return Some(b);
                        }
                    }
                }
            }
        }
        None
    }

    pub fn as_bin1(&self) -> Option<&Term> {
        if let Term::Succ(inner) = self {
            return inner.as_bin0();
        }
        None
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Num(_) => {}
            Term::Succ(a) | Term::Size(a) | Term::Pow2(a) => a.vars(out),
            Term::Add(a, b) | Term::Mul(a, b) | Term::Bit(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Term::Substr(a, b, c) => {
                a.vars(out);
                b.vars(out);
                c.vars(out);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut s = BTreeSet::new();
        self.vars(&mut s);
        s.is_empty()
    }

    pub fn map_vars(&self, f: &dyn Fn(&str) -> Option<Term>) -> Term {
        let b = |t: &Term| Box::new(t.map_vars(f));
        match self {
            Term::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Term::Num(_) => self.clone(),
            Term::Succ(a) => Term::Succ(b(a)),
            Term::Size(a) => Term::Size(b(a)),
            Term::Pow2(a) => Term::Pow2(b(a)),
            Term::Add(x, y) => Term::Add(b(x), b(y)),
            Term::Mul(x, y) => Term::Mul(b(x), b(y)),
            Term::Bit(x, y) => Term::Bit(b(x), b(y)),
            Term::Substr(x, y, z) => Term::Substr(b(x), b(y), b(z)),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    /// Whether only `0`, `′`, `+`, `×` and variables occur.
    pub fn is_arithmetic(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Num(n) => n.size() == 0,
            Term::Succ(a) => a.is_arithmetic(),
            Term::Add(a, b) | Term::Mul(a, b) => a.is_arithmetic() && b.is_arithmetic(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Pred(String, Vec<Term>),
    Eq(Term, Term),
    Le(Term, Term),
    Lt(Term, Term),
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Pred(_, args) => args.iter().collect(),
            Atom::Eq(a, b) | Atom::Le(a, b) | Atom::Lt(a, b) => vec![a, b],
        }
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Atom {
        match self {
            Atom::Pred(n, args) => Atom::Pred(n.clone(), args.iter().map(f).collect()),
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Le(a, b) => Atom::Le(f(a), f(b)),
            Atom::Lt(a, b) => Atom::Lt(f(a), f(b)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    /// choice conjunction ⊓
    Meet,
    /// choice disjunction ⊔
    Join,
}

impl BinOp {
    pub fn dual(self) -> BinOp {
        match self {
            BinOp::And => BinOp::Or,
            BinOp::Or => BinOp::And,
            BinOp::Meet => BinOp::Join,
            BinOp::Join => BinOp::Meet,
        }
    }

    pub fn is_choice(self) -> bool {
        matches!(self, BinOp::Meet | BinOp::Join)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "∧",
            BinOp::Or => "∨",
            BinOp::Meet => "⊓",
            BinOp::Join => "⊔",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantOp {
    All,
    Ex,
    /// choice universal ⊓x
    Meet,
    /// choice existential ⊔x
    Join,
}

impl QuantOp {
    pub fn dual(self) -> QuantOp {
        match self {
            QuantOp::All => QuantOp::Ex,
            QuantOp::Ex => QuantOp::All,
            QuantOp::Meet => QuantOp::Join,
            QuantOp::Join => QuantOp::Meet,
        }
    }

    pub fn is_choice(self) -> bool {
        matches!(self, QuantOp::Meet | QuantOp::Join)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            QuantOp::All => "∀",
            QuantOp::Ex => "∃",
            QuantOp::Meet => "⊓",
            QuantOp::Join => "⊔",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    /// `pos = false` is a negated atom; negation only ever sits on atoms.
    Lit(bool, Atom),
    Bin(BinOp, Box<Formula>, Box<Formula>),
    Quant(QuantOp, String, Box<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub ant: Vec<Formula>,
    pub succ: Formula,
}

impl Sequent {
    pub fn new(ant: Vec<Formula>, succ: Formula) -> Self {
        Sequent { ant, succ }
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.ant.iter().chain(std::iter::once(&self.succ))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for f in self.formulas() {
            s.extend(f.free_vars());
        }
        s
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for f in self.formulas() {
            s.extend(f.all_vars());
        }
        s
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for f in self.formulas() {
            f.bound_vars_into(&mut s);
        }
        s
    }

    pub fn is_elementary(&self) -> bool {
        self.formulas().all(|f| f.is_elementary())
    }

    /// `‖G1‖ ∧ … ∧ ‖Gn‖ → ‖F‖`, or just `‖F‖` with an empty antecedent.
    pub fn elementarize(&self) -> Formula {
        let mut it = self.ant.iter().map(|g| g.elementarize());
        match it.next() {
            None => self.succ.elementarize(),
            Some(first) => {
                let conj = it.fold(first, Formula::and);
                Formula::imp(conj, self.succ.elementarize())
            }
        }
    }

    /// Order-insensitive comparison key (antecedent as a multiset, bound names normalized).
    pub fn key(&self) -> String {
        let mut ants: Vec<String> = self.ant.iter().map(|f| f.alpha_key()).collect();
        ants.sort();
        format!("{} |- {}", ants.join(" ,, "), self.succ.alpha_key())
    }

    pub fn constants(&self) -> BTreeSet<Numeral> {
        let mut s = BTreeSet::new();
        for f in self.formulas() {
            f.constants_into(&mut s);
        }
        s
    }
}

impl Formula {
    pub fn lit(atom: Atom) -> Formula {
        Formula::Lit(true, atom)
    }

    pub fn nlit(atom: Atom) -> Formula {
        Formula::Lit(false, atom)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::lit(Atom::Eq(a, b))
    }

    pub fn pred(name: &str, args: Vec<Term>) -> Formula {
        Formula::lit(Atom::Pred(name.to_string(), args))
    }

    pub fn bin(op: BinOp, a: Formula, b: Formula) -> Formula {
        Formula::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::And, a, b)
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Or, a, b)
    }

    pub fn meet(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Meet, a, b)
    }

    pub fn join(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Join, a, b)
    }

    pub fn quant(op: QuantOp, v: &str, body: Formula) -> Formula {
        Formula::Quant(op, v.to_string(), Box::new(body))
    }

    /// `a → b`, stored as `¬a ∨ b`.
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::or(a.neg(), b)
    }

    /// Negation pushed to atoms (DeMorgan dual).
    pub fn neg(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Lit(p, a) => Formula::Lit(!p, a.clone()),
            Formula::Bin(op, a, b) => Formula::bin(op.dual(), a.neg(), b.neg()),
            Formula::Quant(op, v, b) => Formula::Quant(op.dual(), v.clone(), Box::new(b.neg())),
        }
    }

    pub fn negation_count(&self) -> usize {
        match self {
            Formula::Lit(false, _) => 1,
            Formula::Bin(_, a, b) => a.negation_count() + b.negation_count(),
            Formula::Quant(_, _, b) => b.negation_count(),
            _ => 0,
        }
    }

    pub fn is_elementary(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Lit(..) => true,
            Formula::Bin(op, a, b) => !op.is_choice() && a.is_elementary() && b.is_elementary(),
            Formula::Quant(op, _, b) => !op.is_choice() && b.is_elementary(),
        }
    }

    /// ⊔/⊔x subformulas become ⊥, ⊓/⊓x subformulas become ⊤.
    pub fn elementarize(&self) -> Formula {
        match self {
            Formula::Bin(BinOp::Meet, ..) | Formula::Quant(QuantOp::Meet, ..) => Formula::True,
            Formula::Bin(BinOp::Join, ..) | Formula::Quant(QuantOp::Join, ..) => Formula::False,
            Formula::Bin(op, a, b) => Formula::bin(*op, a.elementarize(), b.elementarize()),
            Formula::Quant(op, v, b) => Formula::quant(*op, v, b.elementarize()),
            other => other.clone(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Lit(_, a) => {
                let mut s = BTreeSet::new();
                for t in a.terms() {
                    t.vars(&mut s);
                }
                for v in s {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Formula::Bin(_, a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::Quant(_, v, b) => {
                bound.push(v.clone());
                b.free_vars_into(bound, out);
                bound.pop();
            }
        }
    }

    pub fn bound_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Bin(_, a, b) => {
                a.bound_vars_into(out);
                b.bound_vars_into(out);
            }
            Formula::Quant(_, v, b) => {
                out.insert(v.clone());
                b.bound_vars_into(out);
            }
            _ => {}
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.bound_vars_into(&mut s);
        s
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut s = self.bound_vars();
        self.term_vars_into(&mut s);
        s
    }

    fn term_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Lit(_, a) => a.terms().iter().for_each(|t| t.vars(out)),
            Formula::Bin(_, a, b) => {
                a.term_vars_into(out);
                b.term_vars_into(out);
            }
            Formula::Quant(_, _, b) => b.term_vars_into(out),
            _ => {}
        }
    }

    pub fn constants_into(&self, out: &mut BTreeSet<Numeral>) {
        fn term(t: &Term, out: &mut BTreeSet<Numeral>) {
            match t {
                Term::Num(n) => {
                    out.insert(n.clone());
                }
                Term::Var(_) => {}
                Term::Succ(a) | Term::Size(a) | Term::Pow2(a) => term(a, out),
                Term::Add(a, b) | Term::Mul(a, b) | Term::Bit(a, b) => {
                    term(a, out);
                    term(b, out);
                }
                Term::Substr(a, b, c) => {
                    term(a, out);
                    term(b, out);
                    term(c, out);
                }
                Term::App(_, args) => args.iter().for_each(|a| term(a, out)),
            }
        }
        match self {
            Formula::Lit(_, a) => a.terms().into_iter().for_each(|t| term(t, out)),
            Formula::Bin(_, a, b) => {
                a.constants_into(out);
                b.constants_into(out);
            }
            Formula::Quant(_, _, b) => b.constants_into(out),
            _ => {}
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Replaces free occurrences of variables. A replacement term mentioning a
    /// variable bound at the point of replacement is a capture and is rejected.
    pub fn substitute(&self, map: &[(String, Term)]) -> Result<Formula, String> {
        self.subst_inner(map, &mut Vec::new())
    }

    pub fn substitute1(&self, v: &str, t: &Term) -> Result<Formula, String> {
        self.substitute(&[(v.to_string(), t.clone())])
    }

    fn subst_inner(&self, map: &[(String, Term)], bound: &mut Vec<String>) -> Result<Formula, String> {
        Ok(match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Lit(p, a) => {
                let mut err = None;
                let a2 = a.map_terms(&|t| {
                    t.map_vars(&|v| {
                        if bound.iter().any(|b| b == v) {
                            return None;
                        }
                        map.iter().find(|(x, _)| x == v).map(|(_, r)| r.clone())
                    })
                });
                // capture check: any replacement actually used must avoid bound names
                let mut used = BTreeSet::new();
                for t in a.terms() {
                    t.vars(&mut used);
                }
                for (x, r) in map {
                    if used.contains(x) && !bound.contains(x) {
                        let mut rv = BTreeSet::new();
                        r.vars(&mut rv);
                        if let Some(c) = rv.iter().find(|c| bound.contains(c)) {
                            err = Some(format!("substituting for {x} would capture {c}"));
                        }
                    }
                }
                if let Some(e) = err {
                    return Err(e);
                }
                Formula::Lit(*p, a2)
            }
            Formula::Bin(op, a, b) => Formula::bin(*op, a.subst_inner(map, bound)?, b.subst_inner(map, bound)?),
            Formula::Quant(op, v, b) => {
                bound.push(v.clone());
                let r = b.subst_inner(map, bound);
                bound.pop();
                Formula::Quant(*op, v.clone(), Box::new(r?))
            }
        })
    }

    /// Renames one bound variable occurrence chain (the binder and its uses).
    pub fn rename_bound(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Bin(op, a, b) => Formula::bin(*op, a.rename_bound(from, to), b.rename_bound(from, to)),
            Formula::Quant(op, v, b) if v == from => {
                let body = b.rename_free(from, to);
                Formula::Quant(*op, to.to_string(), Box::new(body.rename_bound(from, to)))
            }
            Formula::Quant(op, v, b) => Formula::Quant(*op, v.clone(), Box::new(b.rename_bound(from, to))),
            other => other.clone(),
        }
    }

    fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Lit(p, a) => Formula::Lit(
                *p,
                a.map_terms(&|t| t.map_vars(&|v| if v == from { Some(Term::var(to)) } else { None })),
            ),
            Formula::Bin(op, a, b) => Formula::bin(*op, a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Quant(_, v, _) if v == from => self.clone(),
            Formula::Quant(op, v, b) => Formula::Quant(*op, v.clone(), Box::new(b.rename_free(from, to))),
            other => other.clone(),
        }
    }

    /// Canonical text with bound variables renamed by binding depth; equal keys
    /// mean alpha-equivalent formulas.
    pub fn alpha_key(&self) -> String {
        let norm = self.alpha_normalize(&mut Vec::new());
        super::print::formula_to_string(&norm)
    }

    fn alpha_normalize(&self, env: &mut Vec<(String, String)>) -> Formula {
        match self {
            Formula::Lit(p, a) => Formula::Lit(
                *p,
                a.map_terms(&|t| {
                    t.map_vars(&|v| env.iter().rev().find(|(o, _)| o == v).map(|(_, n)| Term::var(n)))
                }),
            ),
            Formula::Bin(op, a, b) => Formula::bin(*op, a.alpha_normalize(env), b.alpha_normalize(env)),
            Formula::Quant(op, v, b) => {
                let fresh = format!("#{}", env.len());
                env.push((v.clone(), fresh.clone()));
                let body = b.alpha_normalize(env);
                env.pop();
                Formula::Quant(*op, fresh, Box::new(body))
            }
            other => other.clone(),
        }
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.alpha_key() == other.alpha_key()
    }

    /// Prefixes quantifiers over the free variables in lexicographic order.
    pub fn closure(&self, op: QuantOp) -> Formula {
        let mut f = self.clone();
        for v in self.free_vars().into_iter().rev() {
            f = Formula::Quant(op, v, Box::new(f));
        }
        f
    }

    /// Number of moves in the longest legal run of the game.
    pub fn choice_depth(&self) -> usize {
        match self {
            Formula::Bin(op, a, b) if op.is_choice() => 1 + a.choice_depth().max(b.choice_depth()),
            Formula::Bin(_, a, b) => a.choice_depth() + b.choice_depth(),
            Formula::Quant(op, _, b) if op.is_choice() => 1 + b.choice_depth(),
            Formula::Quant(_, _, b) => b.choice_depth(),
            _ => 0,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Bin(_, a, b) => 1 + a.size() + b.size(),
            Formula::Quant(_, _, b) => 1 + b.size(),
            _ => 1,
        }
    }
}

/// Fresh variable named after `base`: `base`, `base_1`, `base_2`, ... avoiding `taken`.
pub fn fresh_var(base: &str, taken: &BTreeSet<String>) -> String {
    let stem = match base.find('_') {
        Some(i) => &base[..i],
        None => base,
    };
    if !taken.contains(stem) {
        return stem.to_string();
    }
    let mut k = 1;
    loop {
        let cand = format!("{stem}_{k}");
        if !taken.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}
