//! Polynomial graph-terms and explicit polynomial functions, the complexity
//! certificates attached to extracted strategies.
//!
//! Text format, topologically sorted:
//!
//! ```text
//! def f1
//! 0: y
//! 1: mul(0,0)
//! root 1
//! def f2
//! 0: y
//! 1: f1(0)
//! 2: succ(1)
//! root 2
//! ```

use crate::syntax::Term;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Zero,
    Var,
    Succ(usize),
    Add(usize, usize),
    Mul(usize, usize),
    /// placeholder `f_k` (1-based) applied to a node
    Ph(usize, usize),
}

impl Node {
    fn children(&self) -> Vec<usize> {
        match *self {
            Node::Zero | Node::Var => vec![],
            Node::Succ(a) | Node::Ph(_, a) => vec![a],
            Node::Add(a, b) | Node::Mul(a, b) => vec![a, b],
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("placeholder f{0} is unbound")]
    Unbound(usize),
    #[error("f{index} depends on f{letter}, which is not defined before it")]
    Stratification { index: usize, letter: usize },
    #[error("node {0} refers to a later node")]
    Cycle(usize),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// A rooted DAG whose nodes only refer to earlier nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphTerm {
    nodes: Vec<Node>,
    root: usize,
}

/// Incremental construction; identical nodes are shared.
#[derive(Default)]
pub struct Builder {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, n: Node) -> usize {
        if let Some(&i) = self.index.get(&n) {
            return i;
        }
        self.nodes.push(n);
        self.index.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    pub fn zero(&mut self) -> usize {
        self.node(Node::Zero)
    }
    pub fn var(&mut self) -> usize {
        self.node(Node::Var)
    }
    pub fn succ(&mut self, a: usize) -> usize {
        self.node(Node::Succ(a))
    }
    pub fn add(&mut self, a: usize, b: usize) -> usize {
        self.node(Node::Add(a, b))
    }
    pub fn mul(&mut self, a: usize, b: usize) -> usize {
        self.node(Node::Mul(a, b))
    }
    pub fn ph(&mut self, k: usize, a: usize) -> usize {
        self.node(Node::Ph(k, a))
    }

    /// A constant, by binary expansion.
    pub fn constant(&mut self, v: &BigUint) -> usize {
        let mut acc = self.zero();
        let one = self.succ(acc);
        let two = self.succ(one);
        for i in (0..v.bits()).rev() {
            acc = self.mul(acc, two);
            if v.bit(i) {
                acc = self.succ(acc);
            }
        }
        if v.is_zero() {
            self.zero()
        } else {
            acc
        }
    }

    pub fn finish(self, root: usize) -> GraphTerm {
        GraphTerm { nodes: self.nodes, root }
    }
}

impl GraphTerm {
    pub fn from_nodes(nodes: Vec<Node>, root: usize) -> Result<Self, PolyError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.children().iter().any(|&c| c >= i) {
                return Err(PolyError::Cycle(i));
            }
        }
        if root >= nodes.len() {
            return Err(PolyError::Cycle(root));
        }
        Ok(GraphTerm { nodes, root })
    }

    pub fn identity() -> Self {
        GraphTerm { nodes: vec![Node::Var], root: 0 }
    }

    pub fn zero() -> Self {
        GraphTerm { nodes: vec![Node::Zero], root: 0 }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Highest placeholder index used, 0 if none.
    pub fn max_placeholder(&self) -> usize {
        self.nodes.iter().filter_map(|n| if let Node::Ph(k, _) = n { Some(*k) } else { None }).max().unwrap_or(0)
    }

    /// Evaluates every node once.
    pub fn eval(&self, y: &BigUint, f: &mut dyn FnMut(usize, &BigUint) -> Result<BigUint, PolyError>) -> Result<BigUint, PolyError> {
        let mut vals: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match *n {
                Node::Zero => BigUint::zero(),
                Node::Var => y.clone(),
                Node::Succ(a) => &vals[a] + 1u32,
                Node::Add(a, b) => &vals[a] + &vals[b],
                Node::Mul(a, b) => &vals[a] * &vals[b],
                Node::Ph(k, a) => f(k, &vals[a])?,
            };
            vals.push(v);
        }
        Ok(vals.swap_remove(self.root))
    }

    /// Evaluation with every placeholder unbound.
    pub fn eval_closed(&self, y: &BigUint) -> Result<BigUint, PolyError> {
        self.eval(y, &mut |k, _| Err(PolyError::Unbound(k)))
    }

    /// Nodes reachable from the root, counted as a tree.
    pub fn tree_size(&self) -> BigUint {
        let mut sz: Vec<BigUint> = Vec::new();
        for n in &self.nodes {
            let s = n.children().iter().fold(BigUint::one(), |acc, &c| acc + &sz[c]);
            sz.push(s);
        }
        sz.swap_remove(self.root)
    }

    /// `(τ1 + τ2)` as a graph with shared leaves.
    pub fn sum(&self, other: &GraphTerm) -> GraphTerm {
        let mut b = Builder::new();
        let r1 = b.import(self);
        let r2 = b.import(other);
        let r = b.add(r1, r2);
        b.finish(r)
    }

    /// The graph-term for a (0,′,+,×) term, each `|z|` or variable read as `y`.
    pub fn from_size_term(t: &Term) -> Option<GraphTerm> {
        let mut b = Builder::new();
        let r = b.term(t)?;
        Some(b.finish(r))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let body = match *n {
                Node::Zero => "0".to_string(),
                Node::Var => "y".to_string(),
                Node::Succ(a) => format!("succ({a})"),
                Node::Add(a, b) => format!("add({a},{b})"),
                Node::Mul(a, b) => format!("mul({a},{b})"),
                Node::Ph(k, a) => format!("f{k}({a})"),
            };
            s.push_str(&format!("{i}: {body}\n"));
        }
        s.push_str(&format!("root {}\n", self.root));
        s
    }
}

impl Builder {
    /// Copies a graph in, returning its root here.
    pub fn import(&mut self, g: &GraphTerm) -> usize {
        self.import_shifted(g, 0)
    }

    fn import_shifted(&mut self, g: &GraphTerm, shift: usize) -> usize {
        let mut map = Vec::with_capacity(g.nodes.len());
        for n in &g.nodes {
            let m = match *n {
                Node::Zero => Node::Zero,
                Node::Var => Node::Var,
                Node::Succ(a) => Node::Succ(map[a]),
                Node::Add(a, b) => Node::Add(map[a], map[b]),
                Node::Mul(a, b) => Node::Mul(map[a], map[b]),
                Node::Ph(k, a) => Node::Ph(k + shift, map[a]),
            };
            map.push(self.node(m));
        }
        map[g.root]
    }

    fn term(&mut self, t: &Term) -> Option<usize> {
        Some(match t {
            Term::Var(_) | Term::Size(_) => self.var(),
            Term::Num(n) => self.constant(n.value()),
            Term::Succ(a) => {
                let a = self.term(a)?;
                self.succ(a)
            }
            Term::Add(a, b) => {
                let (a, b) = (self.term(a)?, self.term(b)?);
                self.add(a, b)
            }
            Term::Mul(a, b) => {
                let (a, b) = (self.term(a)?, self.term(b)?);
                self.mul(a, b)
            }
            _ => return None,
        })
    }
}

/// `⟨τ_f1,…,τ_fk⟩`: `τ_fi` may use `f1…f(i−1)`; the whole denotes `fk`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitPolyFn {
    defs: Vec<GraphTerm>,
}

impl ExplicitPolyFn {
    pub fn new(defs: Vec<GraphTerm>) -> Result<Self, PolyError> {
        if defs.is_empty() {
            return Err(PolyError::Format { line: 0, msg: "empty function sequence".into() });
        }
        for (i, d) in defs.iter().enumerate() {
            let m = d.max_placeholder();
            if m > i {
                return Err(PolyError::Stratification { index: i + 1, letter: m });
            }
        }
        Ok(ExplicitPolyFn { defs })
    }

    pub fn single(t: GraphTerm) -> Self {
        Self::new(vec![t]).expect("placeholder-free term")
    }

    pub fn identity() -> Self {
        Self::single(GraphTerm::identity())
    }

    pub fn zero() -> Self {
        Self::single(GraphTerm::zero())
    }

    pub fn defs(&self) -> &[GraphTerm] {
        &self.defs
    }

    /// Total node count of all definitions.
    pub fn size(&self) -> usize {
        self.defs.iter().map(|d| d.size()).sum()
    }

    pub fn eval(&self, y: &BigUint) -> BigUint {
        let mut memo: HashMap<(usize, BigUint), BigUint> = HashMap::new();
        self.eval_def(self.defs.len(), y, &mut memo)
    }

    pub fn eval_u64(&self, y: u64) -> BigUint {
        self.eval(&BigUint::from(y))
    }

    fn eval_def(&self, k: usize, y: &BigUint, memo: &mut HashMap<(usize, BigUint), BigUint>) -> BigUint {
        if let Some(v) = memo.get(&(k, y.clone())) {
            return v.clone();
        }
        let v = self.defs[k - 1]
            .eval(y, &mut |j, a| Ok(self.eval_def(j, a, memo)))
            .expect("stratified by construction");
        memo.insert((k, y.clone()), v.clone());
        v
    }

    pub fn to_text(&self) -> String {
        self.defs.iter().enumerate().map(|(i, d)| format!("def f{}\n{}", i + 1, d.to_text())).collect()
    }

    pub fn parse(text: &str) -> Result<Self, PolyError> {
        let mut defs = Vec::new();
        let mut nodes: Vec<Node> = Vec::new();
        let mut open = false;
        for (i, raw) in text.lines().enumerate() {
            let err = |msg: &str| PolyError::Format { line: i + 1, msg: msg.to_string() };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if let Some(name) = t.strip_prefix("def ") {
                if open {
                    return Err(err("missing root"));
                }
                if name.trim() != format!("f{}", defs.len() + 1) {
                    return Err(err("definitions must be f1, f2, … in order"));
                }
                open = true;
                nodes.clear();
                continue;
            }
            if let Some(r) = t.strip_prefix("root ") {
                let r: usize = r.trim().parse().map_err(|_| err("bad root"))?;
                defs.push(GraphTerm::from_nodes(std::mem::take(&mut nodes), r).map_err(|e| err(&e.to_string()))?);
                open = false;
                continue;
            }
            if !open {
                return Err(err("node outside a definition"));
            }
            let (id, body) = t.split_once(':').ok_or_else(|| err("expected `id: op(args)`"))?;
            if id.trim().parse::<usize>().ok() != Some(nodes.len()) {
                return Err(err("node ids must count up from 0"));
            }
            nodes.push(parse_node(body.trim()).ok_or_else(|| err("bad node"))?);
        }
        if open {
            return Err(PolyError::Format { line: text.lines().count(), msg: "missing root".into() });
        }
        Self::new(defs)
    }
}

fn parse_node(s: &str) -> Option<Node> {
    match s {
        "0" => return Some(Node::Zero),
        "y" => return Some(Node::Var),
        _ => {}
    }
    let (op, rest) = s.split_once('(')?;
    let args: Vec<usize> = rest.strip_suffix(')')?.split(',').map(|a| a.trim().parse().ok()).collect::<Option<_>>()?;
    match (op, args.as_slice()) {
        ("succ", [a]) => Some(Node::Succ(*a)),
        ("add", [a, b]) => Some(Node::Add(*a, *b)),
        ("mul", [a, b]) => Some(Node::Mul(*a, *b)),
        (f, [a]) => Some(Node::Ph(f.strip_prefix('f')?.parse().ok()?, *a)),
        _ => None,
    }
}

impl fmt::Display for ExplicitPolyFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Appends `g`'s definitions, shifting its letters by `shift`.
fn shifted(g: &GraphTerm, shift: usize) -> GraphTerm {
    let nodes = g
        .nodes
        .iter()
        .map(|n| match *n {
            Node::Ph(k, a) => Node::Ph(k + shift, a),
            n => n,
        })
        .collect();
    GraphTerm { nodes, root: g.root }
}

/// `τ(g1,…,gn)` by concatenating the sequences; nothing is expanded.
pub fn compose(tau: &GraphTerm, gs: &[ExplicitPolyFn]) -> Result<ExplicitPolyFn, PolyError> {
    let m = tau.max_placeholder();
    if m > gs.len() {
        return Err(PolyError::Unbound(m));
    }
    let mut defs = Vec::new();
    let mut last = Vec::new();
    for g in gs {
        let shift = defs.len();
        defs.extend(g.defs.iter().map(|d| shifted(d, shift)));
        last.push(defs.len());
    }
    let mut map = Vec::with_capacity(tau.nodes.len());
    let mut b = Builder::new();
    for n in &tau.nodes {
        let x = match *n {
            Node::Zero => Node::Zero,
            Node::Var => Node::Var,
            Node::Succ(a) => Node::Succ(map[a]),
            Node::Add(a, c) => Node::Add(map[a], map[c]),
            Node::Mul(a, c) => Node::Mul(map[a], map[c]),
            Node::Ph(k, a) => Node::Ph(last[k - 1], map[a]),
        };
        map.push(b.node(x));
    }
    defs.push(b.finish(map[tau.root]));
    ExplicitPolyFn::new(defs)
}

/// `g1 + g2`: exactly four nodes beyond the two inputs.
pub fn sum_bounds(a: &ExplicitPolyFn, b: &ExplicitPolyFn) -> ExplicitPolyFn {
    let mut bl = Builder::new();
    let y = bl.var();
    let p = bl.ph(1, y);
    let q = bl.ph(2, y);
    let r = bl.add(p, q);
    compose(&bl.finish(r), &[a.clone(), b.clone()]).expect("two letters")
}

/// `c·g` for a constant `c`.
pub fn scale_bounds(a: &ExplicitPolyFn, c: u64) -> ExplicitPolyFn {
    let mut bl = Builder::new();
    let y = bl.var();
    let p = bl.ph(1, y);
    let k = bl.constant(&BigUint::from(c));
    let r = bl.mul(k, p);
    compose(&bl.finish(r), &[a.clone()]).expect("one letter")
}

/// `g(h(y))`.
pub fn apply_bounds(g: &ExplicitPolyFn, h: &ExplicitPolyFn) -> ExplicitPolyFn {
    let mut bl = Builder::new();
    let y = bl.var();
    let p = bl.ph(2, y);
    let r = bl.ph(1, p);
    compose(&bl.finish(r), &[g.clone(), h.clone()]).expect("two letters")
}

/// `h∘h∘…∘h`, `n` times; size grows linearly in `n`.
pub fn iterate_bounds(h: &ExplicitPolyFn, n: usize) -> ExplicitPolyFn {
    let mut defs = h.defs.clone();
    let base = defs.len();
    let mut prev = 0;
    for _ in 0..n {
        let mut bl = Builder::new();
        let y = bl.var();
        let inner = if prev == 0 { y } else { bl.ph(prev, y) };
        let r = bl.ph(base, inner);
        defs.push(bl.finish(r));
        prev = defs.len();
    }
    if n == 0 {
        return ExplicitPolyFn::identity();
    }
    ExplicitPolyFn::new(defs).expect("stratified")
}

/// The constant function `c`.
pub fn constant_bound(c: u64) -> ExplicitPolyFn {
    let mut b = Builder::new();
    let r = b.constant(&BigUint::from(c));
    ExplicitPolyFn::single(b.finish(r))
}

/// Figure 1: `y⁸` by three shared squarings.
pub fn figure1() -> GraphTerm {
    let mut b = Builder::new();
    let y = b.var();
    let s = b.mul(y, y);
    let q = b.mul(s, s);
    let r = b.mul(q, q);
    b.finish(r)
}

/// The tree-term companion of Figure 1.
pub fn figure1_tree() -> GraphTerm {
    let mut nodes = Vec::new();
    fn build(depth: usize, nodes: &mut Vec<Node>) -> usize {
        if depth == 0 {
            nodes.push(Node::Var);
        } else {
            let a = build(depth - 1, nodes);
            let b = build(depth - 1, nodes);
            nodes.push(Node::Mul(a, b));
        }
        nodes.len() - 1
    }
    let r = build(3, &mut nodes);
    GraphTerm { nodes, root: r }
}

/// Figure 2: `f2(f1(y) + f2(y))`.
pub fn figure2() -> GraphTerm {
    let mut b = Builder::new();
    let y = b.var();
    let a = b.ph(1, y);
    let c = b.ph(2, y);
    let s = b.add(a, c);
    let r = b.ph(2, s);
    b.finish(r)
}
