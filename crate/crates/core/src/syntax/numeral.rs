use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::fmt;

/// Binary numeral over `ε ∪ 1(0∪1)*`; `ε` is spelled "0".
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Numeral(BigUint);

impl Numeral {
    pub fn zero() -> Self {
        Numeral(BigUint::zero())
    }

    pub fn from_value(v: BigUint) -> Self {
        Numeral(v)
    }

    pub fn from_u64(v: u64) -> Self {
        Numeral(BigUint::from(v))
    }

    /// Accepts "0" (and the empty string) for zero, otherwise a 1 followed by bits.
    pub fn parse(bits: &str) -> Option<Self> {
        if bits.is_empty() || bits == "0" {
            return Some(Self::zero());
        }
        if !bits.starts_with('1') || !bits.chars().all(|c| c == '0' || c == '1') {
            return None;
        }
        BigUint::parse_bytes(bits.as_bytes(), 2).map(Numeral)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_value(self) -> BigUint {
        self.0
    }

    /// Length of the underlying bit string; `|0| = 0`.
    pub fn size(&self) -> usize {
        self.0.bits() as usize
    }

    pub fn bits(&self) -> String {
        if self.0.is_zero() {
            "0".to_string()
        } else {
            self.0.to_str_radix(2)
        }
    }

    /// Raw bits, empty for zero.
    pub fn raw_bits(&self) -> String {
        if self.0.is_zero() {
            String::new()
        } else {
            self.0.to_str_radix(2)
        }
    }

    pub fn succ(&self) -> Self {
        Numeral(&self.0 + BigUint::one())
    }
}

impl fmt::Display for Numeral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bits())
    }
}

/// Number of bits of `v`'s numeral.
pub fn size_of(v: &BigUint) -> u64 {
    v.bits()
}

/// `[x]_y`: bit number `y` counted from the left starting at 0; out of range gives 0.
pub fn bit_at(x: &BigUint, y: &BigUint) -> BigUint {
    let n = x.bits();
    match u64::try_from(y) {
        Ok(i) if i < n => {
            if x.bit(n - 1 - i) {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        }
        _ => BigUint::zero(),
    }
}

/// `[x]_y^z`: value of the substring of length `z` starting at bit `y`.
/// Positions past the end are dropped.
pub fn substring(x: &BigUint, y: &BigUint, z: &BigUint) -> BigUint {
    let n = x.bits();
    let start = match u64::try_from(y) {
        Ok(s) if s < n => s,
        _ => return BigUint::zero(),
    };
    let len = u64::try_from(z).unwrap_or(u64::MAX).min(n - start);
    if len == 0 {
        return BigUint::zero();
    }
    let shifted = x >> (n - start - len);
    let mask = (BigUint::one() << len) - BigUint::one();
    shifted & mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_zero() {
        let z = Numeral::parse("0").unwrap();
        assert_eq!(z.size(), 0);
        assert_eq!(z.bits(), "0");
        assert_eq!(Numeral::parse(""), Some(z));
        assert!(Numeral::parse("01").is_none());
        assert!(Numeral::parse("12").is_none());
    }

    #[test]
    fn substring_example() {
        let x = BigUint::from(0b111010u32);
        assert_eq!(
            substring(&x, &BigUint::from(2u32), &BigUint::from(3u32)),
            BigUint::from(0b101u32)
        );
        assert_eq!(bit_at(&x, &BigUint::from(3u32)), BigUint::zero());
        assert_eq!(bit_at(&x, &BigUint::from(4u32)), BigUint::one());
        assert_eq!(bit_at(&x, &BigUint::from(9u32)), BigUint::zero());
    }
}
