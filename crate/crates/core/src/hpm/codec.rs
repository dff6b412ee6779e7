//! Configurations as numbers. Every symbol gets a code of the same width
//! `K = 2^k` whose top bit is 1, and a sequence of symbols is the
//! concatenation of their codes.

use super::{Configuration, Dir, HpmSpec};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("code length {0} is not a multiple of the symbol width")]
    Width(u64),
    #[error("block {0} is not a symbol code")]
    Block(usize),
    #[error("not a configuration: {0}")]
    Layout(&'static str),
}

/// A symbol: a state, or a tape symbol on the work (hat) or run (check)
/// tape, underlined when a head is on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sym {
    State(usize),
    Hat(usize, bool),
    Check(usize, bool),
}

/// Three-valued answer for the predicates that search over steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    /// the fuel ran out first
    Unknown,
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

/// `x·2^|y| + y`.
pub fn concat_codes(x: &BigUint, y: &BigUint) -> BigUint {
    (x << y.bits()) + y
}

struct Layout {
    /// first run block
    run: usize,
    wu: usize,
    ru: usize,
}

#[derive(Clone, Debug)]
pub struct Codec {
    spec: HpmSpec,
    width: usize,
}

impl Codec {
    /// Picks the smallest width `K = 2^k` with room for every symbol.
    pub fn new(spec: &HpmSpec) -> Self {
        let n = spec.states().len() + 4 * spec.symbols().len();
        let mut width = 2;
        while (1usize << (width - 1)) < n {
            width *= 2;
        }
        Codec { spec: spec.clone(), width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn spec(&self) -> &HpmSpec {
        &self.spec
    }

    fn index(&self, s: Sym) -> usize {
        let st = self.spec.states().len();
        match s {
            Sym::State(q) => q,
            Sym::Hat(t, u) => st + 4 * t + if u { 2 } else { 0 },
            Sym::Check(t, u) => st + 4 * t + if u { 3 } else { 1 },
        }
    }

    fn sym(&self, idx: usize) -> Option<Sym> {
        let st = self.spec.states().len();
        if idx < st {
            return Some(Sym::State(idx));
        }
        let (t, v) = ((idx - st) / 4, (idx - st) % 4);
        if t >= self.spec.symbols().len() {
            return None;
        }
        Some(match v {
            0 => Sym::Hat(t, false),
            1 => Sym::Check(t, false),
            2 => Sym::Hat(t, true),
            _ => Sym::Check(t, true),
        })
    }

    pub fn symbol_code(&self, s: Sym) -> BigUint {
        (BigUint::one() << (self.width - 1)) + self.index(s)
    }

    pub fn encode_seq(&self, syms: &[Sym]) -> BigUint {
        syms.iter().fold(BigUint::zero(), |acc, &s| (acc << self.width) + self.symbol_code(s))
    }

    fn blocks(&self, code: &BigUint) -> Result<Vec<Sym>, CodecError> {
        let bits = code.bits();
        if bits % self.width as u64 != 0 {
            return Err(CodecError::Width(bits));
        }
        let n = (bits / self.width as u64) as usize;
        let mask = (BigUint::one() << self.width) - 1u32;
        let top = 1usize << (self.width - 1);
        let mut out = vec![Sym::State(0); n];
        for k in 0..n {
            let b = ((code >> ((n - 1 - k) * self.width)) & &mask).to_usize().ok_or(CodecError::Block(k))?;
            out[k] = b.checked_sub(top).and_then(|i| self.sym(i)).ok_or(CodecError::Block(k))?;
        }
        Ok(out)
    }

    pub fn decode_seq(&self, code: &BigUint) -> Result<Vec<Sym>, CodecError> {
        self.blocks(code)
    }

    /// The codes of the checked (run tape) versions of `s`'s characters.
    pub fn checks(&self, s: &str) -> Option<BigUint> {
        let syms: Option<Vec<Sym>> = s.chars().map(|c| self.spec.symbol_index(c).map(|t| Sym::Check(t, false))).collect();
        syms.map(|v| self.encode_seq(&v))
    }

    /// The codes of the hatted (work tape) versions of `s`'s characters.
    pub fn hats(&self, s: &str) -> Option<BigUint> {
        let syms: Option<Vec<Sym>> = s.chars().map(|c| self.spec.symbol_index(c).map(|t| Sym::Hat(t, false))).collect();
        syms.map(|v| self.encode_seq(&v))
    }

    fn layout(&self, b: &[Sym]) -> Result<Layout, CodecError> {
        if !matches!(b.first(), Some(Sym::State(_))) {
            return Err(CodecError::Layout("no leading state"));
        }
        let run = b.iter().position(|s| matches!(s, Sym::Check(..))).ok_or(CodecError::Layout("no run tape"))?;
        let tape = |lo: usize, hi: usize, hat: bool| -> Result<usize, CodecError> {
            let mut under = None;
            for (k, s) in b[lo..hi].iter().enumerate() {
                let (t, u) = match (s, hat) {
                    (Sym::Hat(t, u), true) | (Sym::Check(t, u), false) => (*t, *u),
                    _ => return Err(CodecError::Layout("symbol out of place")),
                };
                let last = lo + k + 1 == hi;
                if (t == 0) != last {
                    return Err(CodecError::Layout("blank must be exactly the last cell"));
                }
                if u {
                    if under.is_some() {
                        return Err(CodecError::Layout("two heads on one tape"));
                    }
                    under = Some(lo + k);
                }
            }
            under.ok_or(CodecError::Layout("missing head"))
        };
        if run < 2 {
            return Err(CodecError::Layout("empty work tape"));
        }
        let wu = tape(1, run, true)?;
        let ru = tape(run, b.len(), false)?;
        Ok(Layout { run, wu, ru })
    }

    pub fn encode(&self, c: &Configuration) -> BigUint {
        let mut v = vec![Sym::State(c.state)];
        v.extend((0..=c.work.len()).map(|k| Sym::Hat(c.work.get(k).copied().unwrap_or(0), k == c.i)));
        v.extend((0..=c.run.len()).map(|k| Sym::Check(c.run.get(k).copied().unwrap_or(0), k == c.j)));
        self.encode_seq(&v)
    }

    pub fn decode(&self, code: &BigUint) -> Result<Configuration, CodecError> {
        let b = self.blocks(code)?;
        let l = self.layout(&b)?;
        let t = |s: &Sym| match s {
            Sym::Hat(t, _) | Sym::Check(t, _) => *t,
            Sym::State(_) => unreachable!(),
        };
        let Sym::State(state) = b[0] else { unreachable!() };
        Ok(Configuration {
            state,
            work: b[1..l.run - 1].iter().map(t).collect(),
            run: b[l.run..b.len() - 1].iter().map(t).collect(),
            i: l.wu - 1,
            j: l.ru - l.run,
        })
    }

    /// The deterministic successor, computed on the blocks of the code.
    pub fn successor(&self, code: &BigUint) -> Result<BigUint, CodecError> {
        let b = self.blocks(code)?;
        let l = self.layout(&b)?;
        let Sym::State(q) = b[0] else { unreachable!() };
        let (Sym::Hat(w, _), Sym::Check(r, _)) = (b[l.wu], b[l.ru]) else { unreachable!() };
        let a = self.spec.action(q, w, r);
        let mut work: Vec<Sym> = b[1..l.run].iter().map(|s| plain(*s)).collect();
        let p = l.wu - 1;
        work[p] = Sym::Hat(a.write, false);
        if p + 1 == work.len() {
            work.push(Sym::Hat(0, false));
        }
        let np = match a.dw {
            Dir::L => p.saturating_sub(1),
            Dir::R => p + 1,
        };
        work[np] = underline(work[np]);
        let mut run: Vec<Sym> = b[l.run..].iter().map(|s| plain(*s)).collect();
        if self.spec.is_move_state(q) {
            let blank = run.pop().expect("run tape ends in a blank");
            run.push(Sym::Check(1, false));
            run.extend(b[1..l.wu].iter().map(|s| match s {
                Sym::Hat(t, _) => Sym::Check(*t, false),
                _ => unreachable!(),
            }));
            run.push(blank);
        }
        let jr = l.ru - l.run;
        let nj = match a.dr {
            Dir::L => jr.saturating_sub(1),
            Dir::R if r == 0 => jr,
            Dir::R => jr + 1,
        };
        run[nj] = underline(run[nj]);
        let mut out = vec![Sym::State(a.next)];
        out.extend(work);
        out.extend(run);
        Ok(self.encode_seq(&out))
    }

    /// ℕ(x,y): if `x` codes hatted symbols, `y` codes their checked versions.
    pub fn is_n(&self, x: &BigUint, y: &BigUint) -> bool {
        let Ok(b) = self.blocks(x) else { return true };
        if !b.iter().all(|s| matches!(s, Sym::Hat(..))) {
            return true;
        }
        let checked: Vec<Sym> = b
            .iter()
            .map(|s| match s {
                Sym::Hat(t, u) => Sym::Check(*t, *u),
                s => *s,
            })
            .collect();
        self.encode_seq(&checked) == *y
    }

    /// ℂ(x): `x` codes a configuration.
    pub fn is_c(&self, x: &BigUint) -> bool {
        self.decode(x).is_ok()
    }

    /// 𝕀(x,y): the work head of configuration `x` is on cell `y`.
    pub fn is_i(&self, x: &BigUint, y: &BigUint) -> bool {
        self.decode(x).is_ok_and(|c| BigUint::from(c.i) == *y)
    }

    /// 𝕁(x,y): the run head of configuration `x` is on cell `y`.
    pub fn is_j(&self, x: &BigUint, y: &BigUint) -> bool {
        self.decode(x).is_ok_and(|c| BigUint::from(c.j) == *y)
    }

    /// 𝕄(x,y): the leftmost blank work cell of configuration `x` is `y`.
    pub fn is_m(&self, x: &BigUint, y: &BigUint) -> bool {
        self.decode(x).is_ok_and(|c| BigUint::from(c.work.len()) == *y)
    }

    /// 𝔼(x,y): `y` codes the binary numeral of `x` in checked bits.
    pub fn is_e(&self, x: &BigUint, y: &BigUint) -> bool {
        self.checks(&x.to_str_radix(2)).is_some_and(|c| c == *y)
    }

    /// 𝔻(x,y): `x` codes hatted bits without a leading 0, read as `y`.
    pub fn is_d(&self, x: &BigUint, y: &BigUint) -> bool {
        let Ok(b) = self.blocks(x) else { return false };
        let (zero, one) = (self.spec.symbol_index('0'), self.spec.symbol_index('1'));
        let mut v = BigUint::zero();
        for (k, s) in b.iter().enumerate() {
            let bit = match s {
                Sym::Hat(t, false) if Some(*t) == one => 1u32,
                Sym::Hat(t, false) if Some(*t) == zero && k > 0 => 0,
                _ => return false,
            };
            v = (v << 1u32) + bit;
        }
        v == *y
    }

    /// 𝕊(x,y): `y` is the deterministic successor of configuration `x`.
    pub fn is_s(&self, x: &BigUint, y: &BigUint) -> bool {
        self.successor(x).is_ok_and(|s| s == *y)
    }

    fn in_move_state(&self, code: &BigUint) -> bool {
        matches!(self.blocks(code).ok().and_then(|b| b.first().copied()), Some(Sym::State(q)) if self.spec.is_move_state(q))
    }

    /// 𝔸(z,x,y): without environment moves, `z` reaches `x` in `y` steps and
    /// none of the configurations on the way, both ends included, is in a
    /// move state. Any configuration counts as legitimate here.
    pub fn is_a(&self, z: &BigUint, x: &BigUint, y: &BigUint, fuel: usize) -> Truth {
        if !self.is_c(z) {
            return Truth::False;
        }
        let Some(y) = y.to_usize().filter(|&y| y <= fuel) else { return Truth::Unknown };
        let mut c = z.clone();
        for k in 0..=y {
            if self.in_move_state(&c) {
                return Truth::False;
            }
            if k < y {
                c = self.successor(&c).expect("successors stay well formed");
            }
        }
        (c == *x).into()
    }

    /// 𝔸′(z,y): no move during the `y` steps after `z`.
    pub fn is_a_prime(&self, z: &BigUint, y: &BigUint, fuel: usize) -> Truth {
        if !self.is_c(z) {
            return Truth::False;
        }
        let Some(y) = y.to_usize().filter(|&y| y <= fuel) else { return Truth::Unknown };
        let mut c = z.clone();
        for k in 0..=y {
            if self.in_move_state(&c) {
                return Truth::False;
            }
            if k < y {
                c = self.successor(&c).expect("successors stay well formed");
            }
        }
        Truth::True
    }

    /// 𝔹(z,x): `x` is the first configuration from `z` on that is in a move
    /// state, absent environment moves.
    pub fn is_b(&self, z: &BigUint, x: &BigUint, fuel: usize) -> Truth {
        if !self.is_c(z) {
            return Truth::False;
        }
        let mut c = z.clone();
        for _ in 0..=fuel {
            if self.in_move_state(&c) {
                return (c == *x).into();
            }
            if c == *x {
                return Truth::False;
            }
            c = self.successor(&c).expect("successors stay well formed");
        }
        Truth::Unknown
    }
}

fn plain(s: Sym) -> Sym {
    match s {
        Sym::Hat(t, _) => Sym::Hat(t, false),
        Sym::Check(t, _) => Sym::Check(t, false),
        s => s,
    }
}

fn underline(s: Sym) -> Sym {
    match s {
        Sym::Hat(t, _) => Sym::Hat(t, true),
        Sym::Check(t, _) => Sym::Check(t, true),
        s => s,
    }
}
