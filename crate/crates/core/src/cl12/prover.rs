//! Classical validity for elementary formulas, with `=` as identity and every
//! other symbol (including `′ + ×` and numerals) uninterpreted.
//!
//! Validity of `E` is shown by refuting `¬E`: negate, Skolemize (free variables
//! become constants), then run a ground tableau. Universals are instantiated
//! with ground terms already on the branch, one round at a time, with iterative
//! deepening on the number of rounds. Literals are kept in a congruence closure.

use crate::syntax::{Atom, BinOp, Formula, QuantOp, Term};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// Ground-or-open first-order term over plain function symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GTerm {
    Var(String),
    Fn(String, Vec<GTerm>),
}

impl GTerm {
    fn is_ground(&self) -> bool {
        match self {
            GTerm::Var(_) => false,
            GTerm::Fn(_, a) => a.iter().all(|t| t.is_ground()),
        }
    }

    fn subst(&self, x: &str, t: &GTerm) -> GTerm {
        match self {
            GTerm::Var(v) if v == x => t.clone(),
            GTerm::Var(_) => self.clone(),
            GTerm::Fn(f, a) => GTerm::Fn(f.clone(), a.iter().map(|s| s.subst(x, t)).collect()),
        }
    }

    fn ground_subterms(&self, out: &mut BTreeSet<GTerm>) {
        if let GTerm::Fn(_, a) = self {
            for s in a {
                s.ground_subterms(out);
            }
            if self.is_ground() {
                out.insert(self.clone());
            }
        }
    }

    /// Parses the `Display` form back.
    pub fn parse(s: &str) -> Option<GTerm> {
        let (t, rest) = parse_gterm(s.trim())?;
        rest.trim().is_empty().then_some(t)
    }
}

fn parse_gterm(s: &str) -> Option<(GTerm, &str)> {
    let end = s.find(['(', ',', ')']).unwrap_or(s.len());
    let sym = s[..end].trim();
    if sym.is_empty() {
        return None;
    }
    if let Some(v) = sym.strip_prefix('?') {
        return Some((GTerm::Var(v.to_string()), &s[end..]));
    }
    let rest = &s[end..];
    if let Some(mut r) = rest.strip_prefix('(') {
        let mut args = Vec::new();
        loop {
            let (a, r2) = parse_gterm(r)?;
            args.push(a);
            let r2 = r2.trim_start();
            if let Some(r3) = r2.strip_prefix(',') {
                r = r3;
            } else if let Some(r3) = r2.strip_prefix(')') {
                return Some((GTerm::Fn(sym.to_string(), args), r3));
            } else {
                return None;
            }
        }
    }
    Some((GTerm::Fn(sym.to_string(), Vec::new()), rest))
}

impl fmt::Display for GTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GTerm::Var(v) => write!(f, "?{v}"),
            GTerm::Fn(s, a) if a.is_empty() => write!(f, "{s}"),
            GTerm::Fn(s, a) => {
                write!(f, "{s}(")?;
                for (i, t) in a.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Function-symbol view of a term. Variables in `bound` stay variables, other
/// variables become constants `c:name`.
pub fn flatten_term(t: &Term, bound: &dyn Fn(&str) -> Option<GTerm>) -> GTerm {
    let f = |s: &str, args: Vec<&Term>| GTerm::Fn(s.to_string(), args.into_iter().map(|a| flatten_term(a, bound)).collect());
    match t {
        Term::Var(v) => bound(v).unwrap_or_else(|| GTerm::Fn(format!("c:{v}"), vec![])),
        Term::Num(n) => GTerm::Fn(format!("n:{}", n.bits()), vec![]),
        Term::Succ(a) => f("′", vec![a]),
        Term::Add(a, b) => f("+", vec![a, b]),
        Term::Mul(a, b) => f("×", vec![a, b]),
        Term::App(name, args) => f(name, args.iter().collect()),
        Term::Size(a) => f("||", vec![a]),
        Term::Pow2(a) => f("2^", vec![a]),
        Term::Bit(a, b) => f("bit", vec![a, b]),
        Term::Substr(a, b, c) => f("sub", vec![a, b, c]),
    }
}

/// Literal over plain symbols; `=` is the only interpreted predicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GLit {
    Eq(GTerm, GTerm),
    Pred(String, Vec<GTerm>),
}

pub fn flatten_atom(a: &Atom, bound: &dyn Fn(&str) -> Option<GTerm>) -> GLit {
    match a {
        Atom::Eq(x, y) => GLit::Eq(flatten_term(x, bound), flatten_term(y, bound)),
        Atom::Le(x, y) => GLit::Pred("≤".into(), vec![flatten_term(x, bound), flatten_term(y, bound)]),
        Atom::Lt(x, y) => GLit::Pred("<".into(), vec![flatten_term(x, bound), flatten_term(y, bound)]),
        Atom::Pred(p, args) => GLit::Pred(p.clone(), args.iter().map(|t| flatten_term(t, bound)).collect()),
    }
}

/// Skolemized negation normal form.
#[derive(Clone, Debug)]
enum Nf {
    True,
    False,
    Lit(bool, GLit),
    And(Vec<Nf>),
    Or(Vec<Nf>),
    All(String, Box<Nf>),
}

impl Nf {
    fn subst(&self, x: &str, t: &GTerm) -> Nf {
        match self {
            Nf::Lit(p, GLit::Eq(a, b)) => Nf::Lit(*p, GLit::Eq(a.subst(x, t), b.subst(x, t))),
            Nf::Lit(p, GLit::Pred(q, args)) => {
                Nf::Lit(*p, GLit::Pred(q.clone(), args.iter().map(|a| a.subst(x, t)).collect()))
            }
            Nf::And(v) => Nf::And(v.iter().map(|f| f.subst(x, t)).collect()),
            Nf::Or(v) => Nf::Or(v.iter().map(|f| f.subst(x, t)).collect()),
            Nf::All(y, _) if y == x => self.clone(),
            Nf::All(y, b) => Nf::All(y.clone(), Box::new(b.subst(x, t))),
            other => other.clone(),
        }
    }

    fn ground_terms(&self, out: &mut BTreeSet<GTerm>) {
        match self {
            Nf::Lit(_, GLit::Eq(a, b)) => {
                a.ground_subterms(out);
                b.ground_subterms(out);
            }
            Nf::Lit(_, GLit::Pred(_, args)) => args.iter().for_each(|a| a.ground_subterms(out)),
            Nf::And(v) | Nf::Or(v) => v.iter().for_each(|f| f.ground_terms(out)),
            Nf::All(_, b) => b.ground_terms(out),
            _ => {}
        }
    }
}

struct Skolemizer {
    counter: usize,
}

impl Skolemizer {
    /// `f` must be in negation normal form (always true for our formulas).
    fn convert(&mut self, f: &Formula, scope: &mut Vec<(String, GTerm)>, univ: &mut Vec<String>) -> Nf {
        match f {
            Formula::True => Nf::True,
            Formula::False => Nf::False,
            Formula::Lit(p, a) => {
                let lookup = |v: &str| scope.iter().rev().find(|(n, _)| n == v).map(|(_, t)| t.clone());
                Nf::Lit(*p, flatten_atom(a, &lookup))
            }
            Formula::Bin(op, a, b) => {
                let l = self.convert(a, scope, univ);
                let r = self.convert(b, scope, univ);
                match op {
                    BinOp::And | BinOp::Meet => Nf::And(vec![l, r]),
                    BinOp::Or | BinOp::Join => Nf::Or(vec![l, r]),
                }
            }
            Formula::Quant(op, x, body) => match op {
                QuantOp::All | QuantOp::Meet => {
                    let name = format!("u{}", self.counter);
                    self.counter += 1;
                    scope.push((x.clone(), GTerm::Var(name.clone())));
                    univ.push(name.clone());
                    let b = self.convert(body, scope, univ);
                    univ.pop();
                    scope.pop();
                    Nf::All(name, Box::new(b))
                }
                QuantOp::Ex | QuantOp::Join => {
                    let sk = GTerm::Fn(
                        format!("sk{}", self.counter),
                        univ.iter().map(|u| GTerm::Var(u.clone())).collect(),
                    );
                    self.counter += 1;
                    scope.push((x.clone(), sk));
                    let b = self.convert(body, scope, univ);
                    scope.pop();
                    b
                }
            },
        }
    }
}

/// Congruence closure over interned ground terms.
#[derive(Clone, Default)]
struct Cc {
    ids: HashMap<GTerm, usize>,
    nodes: Vec<(String, Vec<usize>)>,
    parent: Vec<usize>,
    neqs: Vec<(usize, usize)>,
    preds: Vec<(bool, String, Vec<usize>)>,
}

impl Cc {
    fn intern(&mut self, t: &GTerm) -> usize {
        if let Some(&i) = self.ids.get(t) {
            return i;
        }
        let (sym, args) = match t {
            GTerm::Fn(s, a) => (s.clone(), a.iter().map(|x| self.intern(x)).collect::<Vec<_>>()),
            GTerm::Var(v) => (format!("?{v}"), vec![]),
        };
        let i = self.nodes.len();
        self.nodes.push((sym, args));
        self.parent.push(i);
        self.ids.insert(t.clone(), i);
        // a new node may be congruent to an old one
        self.propagate();
        i
    }

    fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
            self.propagate();
        }
    }

    fn propagate(&mut self) {
        loop {
            let mut sig: HashMap<(&str, Vec<usize>), usize> = HashMap::new();
            let mut merge = None;
            for (i, (s, args)) in self.nodes.iter().enumerate() {
                let key = (s.as_str(), args.iter().map(|&a| self.find(a)).collect::<Vec<_>>());
                match sig.get(&key) {
                    Some(&j) if self.find(j) != self.find(i) => {
                        merge = Some((i, j));
                        break;
                    }
                    Some(_) => {}
                    None => {
                        sig.insert(key, i);
                    }
                }
            }
            match merge {
                Some((i, j)) => {
                    let (ri, rj) = (self.find(i), self.find(j));
                    self.parent[ri.max(rj)] = ri.min(rj);
                }
                None => return,
            }
        }
    }

    fn same(&self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    fn args_same(&self, a: &[usize], b: &[usize]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| self.same(*x, *y))
    }

    fn closed(&self) -> bool {
        if self.neqs.iter().any(|&(a, b)| self.same(a, b)) {
            return true;
        }
        for (i, (p, s, a)) in self.preds.iter().enumerate() {
            for (q, t, b) in &self.preds[i + 1..] {
                if p != q && s == t && self.args_same(a, b) {
                    return true;
                }
            }
        }
        false
    }

    fn add(&mut self, pos: bool, l: &GLit) {
        match l {
            GLit::Eq(a, b) => {
                let (x, y) = (self.intern(a), self.intern(b));
                if pos {
                    self.union(x, y);
                } else {
                    self.neqs.push((x, y));
                }
            }
            GLit::Pred(p, args) => {
                let ids: Vec<usize> = args.iter().map(|a| self.intern(a)).collect();
                self.preds.push((pos, p.clone(), ids));
            }
        }
    }

    /// Whether the literal already holds on the branch.
    fn entails(&mut self, pos: bool, l: &GLit) -> bool {
        match l {
            GLit::Eq(a, b) => {
                let (x, y) = (self.intern(a), self.intern(b));
                if pos {
                    self.same(x, y)
                } else {
                    self.neqs.iter().any(|&(u, v)| {
                        (self.same(u, x) && self.same(v, y)) || (self.same(u, y) && self.same(v, x))
                    })
                }
            }
            GLit::Pred(p, args) => {
                let ids: Vec<usize> = args.iter().map(|a| self.intern(a)).collect();
                self.preds.iter().any(|(q, s, b)| *q == pos && s == p && self.args_same(&ids, b))
            }
        }
    }

    fn terms(&self) -> Vec<GTerm> {
        let mut v: Vec<_> = self.ids.keys().filter(|t| t.is_ground()).cloned().collect();
        v.sort();
        v
    }
}

#[derive(Clone)]
struct Branch {
    cc: Cc,
    todo: Vec<Nf>,
    pending: Vec<Vec<Nf>>,
    universals: Vec<(String, Nf)>,
    done: HashSet<(usize, GTerm)>,
    extra: BTreeSet<GTerm>,
}

enum Outcome {
    Closed,
    Open,
    Budget,
}

struct Tableau<'a> {
    nodes: usize,
    budget: usize,
    /// Restricts instantiation to these terms when replaying a certificate.
    only: Option<&'a BTreeSet<GTerm>>,
    used: BTreeSet<GTerm>,
}

impl Tableau<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes > self.budget
    }

    fn run(&mut self, mut b: Branch, rounds: usize) -> Outcome {
        let mut rounds = rounds;
        loop {
            // non-branching work
            while let Some(f) = b.todo.pop() {
                if self.tick() {
                    return Outcome::Budget;
                }
                match f {
                    Nf::True => {}
                    Nf::False => return Outcome::Closed,
                    Nf::Lit(p, l) => {
                        b.cc.add(p, &l);
                        if b.cc.closed() {
                            return Outcome::Closed;
                        }
                    }
                    Nf::And(v) => b.todo.extend(v),
                    Nf::Or(v) => b.pending.push(flatten_or(v)),
                    Nf::All(x, body) => {
                        body.ground_terms(&mut b.extra);
                        b.universals.push((x, *body));
                    }
                }
            }
            // unit propagation over pending disjunctions
            let mut progress = false;
            let mut keep = Vec::new();
            for d in std::mem::take(&mut b.pending) {
                let mut live = Vec::new();
                let mut satisfied = false;
                for c in d {
                    match &c {
                        Nf::True => satisfied = true,
                        Nf::False => {}
                        Nf::Lit(p, l) => {
                            if b.cc.entails(*p, l) {
                                satisfied = true;
                            } else if !closes(&b.cc, *p, l) {
                                live.push(c);
                            }
                        }
                        _ => live.push(c),
                    }
                    if satisfied {
                        break;
                    }
                }
                if satisfied {
                    progress = true;
                    continue;
                }
                match live.len() {
                    0 => return Outcome::Closed,
                    1 => {
                        b.todo.push(live.pop().unwrap());
                        progress = true;
                    }
                    _ => keep.push(live),
                }
            }
            b.pending = keep;
            if progress {
                continue;
            }
            if rounds > 0 && self.instantiate(&mut b) {
                rounds -= 1;
                continue;
            }
            if let Some(d) = b.pending.pop() {
                let mut all_closed = true;
                for c in d {
                    if self.tick() {
                        return Outcome::Budget;
                    }
                    let mut nb = b.clone();
                    nb.todo.push(c);
                    match self.run(nb, rounds) {
                        Outcome::Closed => {}
                        Outcome::Budget => return Outcome::Budget,
                        Outcome::Open => {
                            all_closed = false;
                            break;
                        }
                    }
                }
                return if all_closed { Outcome::Closed } else { Outcome::Open };
            }
            return Outcome::Open;
        }
    }

    /// One round: every universal with every ground term known so far.
    fn instantiate(&mut self, b: &mut Branch) -> bool {
        let mut universe: BTreeSet<GTerm> = b.cc.terms().into_iter().collect();
        universe.extend(b.extra.iter().cloned());
        if universe.is_empty() {
            universe.insert(GTerm::Fn("c:#".into(), vec![]));
        }
        if let Some(only) = self.only {
            universe.retain(|t| only.contains(t));
        }
        let mut added = false;
        let n = b.universals.len();
        for i in 0..n {
            for t in &universe {
                if b.done.insert((i, t.clone())) {
                    let (x, body) = &b.universals[i];
                    b.todo.push(body.subst(x, t));
                    self.used.insert(t.clone());
                    added = true;
                }
            }
        }
        added
    }
}

fn flatten_or(v: Vec<Nf>) -> Vec<Nf> {
    let mut out = Vec::new();
    for f in v {
        match f {
            Nf::Or(w) => out.extend(flatten_or(w)),
            other => out.push(other),
        }
    }
    out
}

fn closes(cc: &Cc, p: bool, l: &GLit) -> bool {
    let mut c = cc.clone();
    c.add(p, l);
    c.closed()
}

/// Replayable evidence of validity: the instantiation terms and round count
/// that close the tableau.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub rounds: usize,
    pub terms: Vec<GTerm>,
}

impl Certificate {
    pub fn to_text(&self) -> String {
        let mut s = format!("rounds {}\n", self.rounds);
        for t in &self.terms {
            s.push_str(&format!("term {t}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Option<Certificate> {
        let mut rounds = None;
        let mut terms = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(r) = line.strip_prefix("rounds ") {
                rounds = Some(r.trim().parse().ok()?);
            } else if let Some(t) = line.strip_prefix("term ") {
                terms.push(GTerm::parse(t)?);
            } else {
                return None;
            }
        }
        Some(Certificate { rounds: rounds?, terms })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid(Certificate),
    /// Countermodel, printed.
    Refuted(String),
    Unknown,
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid(_))
    }
}

pub const DEFAULT_BUDGET: usize = 100_000;
const MAX_ROUNDS: usize = 4;

fn initial_branch(f: &Formula) -> Branch {
    let neg = f.neg();
    let nf = Skolemizer { counter: 0 }.convert(&neg, &mut Vec::new(), &mut Vec::new());
    Branch {
        cc: Cc::default(),
        todo: vec![nf],
        pending: Vec::new(),
        universals: Vec::new(),
        done: HashSet::new(),
        extra: BTreeSet::new(),
    }
}

/// Tableau only: `Valid` or `Unknown`.
pub fn prove(f: &Formula, budget: usize) -> Validity {
    let start = initial_branch(f);
    let mut tab = Tableau { nodes: 0, budget, only: None, used: BTreeSet::new() };
    for rounds in 0..=MAX_ROUNDS {
        tab.used.clear();
        match tab.run(start.clone(), rounds) {
            Outcome::Closed => {
                return Validity::Valid(Certificate { rounds, terms: tab.used.iter().cloned().collect() })
            }
            Outcome::Budget => return Validity::Unknown,
            Outcome::Open => {}
        }
    }
    Validity::Unknown
}

/// Checks a certificate by rerunning the tableau restricted to its terms.
pub fn replay(f: &Formula, cert: &Certificate) -> bool {
    let only: BTreeSet<GTerm> = cert.terms.iter().cloned().collect();
    let mut tab = Tableau { nodes: 0, budget: DEFAULT_BUDGET, only: Some(&only), used: BTreeSet::new() };
    matches!(tab.run(initial_branch(f), cert.rounds), Outcome::Closed)
}

/// Tableau first, then a countermodel search on domains of size ≤ 4.
pub fn decide(f: &Formula, budget: usize) -> Validity {
    match prove(f, budget) {
        Validity::Unknown => match super::models::countermodel(f, 4, budget) {
            Some(m) => Validity::Refuted(m),
            None => Validity::Unknown,
        },
        v => v,
    }
}
