//! Dense polynomials over F2 in the variable theta, bit-packed into u64 limbs.
//!
//! Degrees stay small in practice (bounded by the generator count of the Floer
//! complex), so a dense representation is both exact and fast.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

/// A polynomial in F2[theta]. Coefficient of theta^i is bit `i % 64` of limb
/// `i / 64`. Invariant: no trailing zero limbs (the zero polynomial has no
/// limbs at all).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyF2 {
    limbs: Vec<u64>,
}

impl PolyF2 {
    pub fn zero() -> Self {
        PolyF2 { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        PolyF2 { limbs: vec![1] }
    }

    /// theta^k
    pub fn theta_pow(k: usize) -> Self {
        let mut limbs = vec![0u64; k / 64 + 1];
        limbs[k / 64] = 1u64 << (k % 64);
        PolyF2 { limbs }
    }

    /// Build from a list of exponents with odd coefficient.
    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut p = PolyF2::zero();
        for &e in exps {
            p.toggle(e);
        }
        p
    }

    fn trim(&mut self) {
        while let Some(&last) = self.limbs.last() {
            if last == 0 {
                self.limbs.pop();
            } else {
                break;
            }
        }
    }

    pub fn toggle(&mut self, exp: usize) {
        let limb = exp / 64;
        if limb >= self.limbs.len() {
            self.limbs.resize(limb + 1, 0);
        }
        self.limbs[limb] ^= 1u64 << (exp % 64);
        self.trim();
    }

    pub fn coeff(&self, exp: usize) -> bool {
        let limb = exp / 64;
        limb < self.limbs.len() && (self.limbs[limb] >> (exp % 64)) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.limbs.len() == 1 && self.limbs[0] == 1
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = *self.limbs.last()?;
        Some((self.limbs.len() - 1) * 64 + (63 - last.leading_zeros() as usize))
    }

    /// Largest k with theta^k dividing self; None for zero.
    pub fn theta_valuation(&self) -> Option<usize> {
        for (i, &l) in self.limbs.iter().enumerate() {
            if l != 0 {
                return Some(i * 64 + l.trailing_zeros() as usize);
            }
        }
        None
    }

    /// True iff self is theta^k for some k >= 0 (units included via k = 0).
    pub fn is_theta_power(&self) -> bool {
        match (self.degree(), self.theta_valuation()) {
            (Some(d), Some(v)) => d == v,
            _ => false,
        }
    }

    pub fn shl_theta(&self, k: usize) -> PolyF2 {
        if self.is_zero() {
            return PolyF2::zero();
        }
        let mut out = PolyF2::zero();
        for (i, &l) in self.limbs.iter().enumerate() {
            let mut bits = l;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.toggle(i * 64 + b + k);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Carryless (XOR) long division: returns (quotient, remainder).
    pub fn divrem(&self, divisor: &PolyF2) -> (PolyF2, PolyF2) {
        let dd = divisor
            .degree()
            .expect("division by the zero polynomial");
        let mut rem = self.clone();
        let mut quo = PolyF2::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            quo.toggle(shift);
            rem += divisor.shl_theta(shift);
        }
        (quo, rem)
    }

    pub fn divides(&self, other: &PolyF2) -> bool {
        if other.is_zero() {
            return true;
        }
        if self.is_zero() {
            return false;
        }
        other.divrem(self).1.is_zero()
    }

    pub fn gcd(a: &PolyF2, b: &PolyF2) -> PolyF2 {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let r = x.divrem(&y).1;
            x = y;
            y = r;
        }
        x
    }

    /// Evaluate at theta = 1 (sum of coefficients).
    pub fn eval_one(&self) -> bool {
        self.limbs.iter().map(|l| l.count_ones()).sum::<u32>() % 2 == 1
    }

    /// Reduce modulo theta^k (truncation).
    pub fn truncate(&self, k: usize) -> PolyF2 {
        let mut out = self.clone();
        let limb = k / 64;
        if limb < out.limbs.len() {
            out.limbs.truncate(limb + 1);
            let keep = k % 64;
            let mask = (1u64 << keep).wrapping_sub(1);
            out.limbs[limb] &= mask;
        }
        out.trim();
        out
    }
}

impl Add for &PolyF2 {
    type Output = PolyF2;
    fn add(self, rhs: &PolyF2) -> PolyF2 {
        let mut out = self.clone();
        out += rhs.clone();
        out
    }
}

impl AddAssign for PolyF2 {
    fn add_assign(&mut self, rhs: PolyF2) {
        if rhs.limbs.len() > self.limbs.len() {
            self.limbs.resize(rhs.limbs.len(), 0);
        }
        for (i, l) in rhs.limbs.iter().enumerate() {
            self.limbs[i] ^= l;
        }
        self.trim();
    }
}

impl Mul for &PolyF2 {
    type Output = PolyF2;
    fn mul(self, rhs: &PolyF2) -> PolyF2 {
        let mut out = PolyF2::zero();
        for (i, &l) in self.limbs.iter().enumerate() {
            let mut bits = l;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out += rhs.shl_theta(i * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }
}

impl fmt::Debug for PolyF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut terms = Vec::new();
        for i in 0..=self.degree().unwrap() {
            if self.coeff(i) {
                terms.push(match i {
                    0 => "1".to_string(),
                    1 => "t".to_string(),
                    _ => format!("t^{}", i),
                });
            }
        }
        write!(f, "{}", terms.join("+"))
    }
}

impl fmt::Display for PolyF2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = PolyF2> {
        prop::collection::vec(any::<bool>(), 0..=max_deg).prop_map(|bits| {
            let mut p = PolyF2::zero();
            for (i, b) in bits.iter().enumerate() {
                if *b {
                    p.toggle(i);
                }
            }
            p
        })
    }

    #[test]
    fn basic_arith() {
        let t = PolyF2::theta_pow(1);
        let t2 = &t * &t;
        assert_eq!(t2, PolyF2::theta_pow(2));
        let s = &t2 + &t; // t^2 + t
        assert_eq!(s.degree(), Some(2));
        assert_eq!(s.theta_valuation(), Some(1));
        assert!(!s.is_theta_power());
        assert!(t.divides(&s));
        let (q, r) = s.divrem(&t);
        assert!(r.is_zero());
        assert_eq!(q, &PolyF2::theta_pow(1) + &PolyF2::one());
    }

    #[test]
    fn truncation() {
        let mut p = PolyF2::zero();
        for i in [0usize, 3, 65, 130] {
            p.toggle(i);
        }
        let q = p.truncate(66);
        assert!(q.coeff(0) && q.coeff(3) && q.coeff(65));
        assert!(!q.coeff(130));
    }

    proptest! {
        #[test]
        fn divrem_identity(a in arb_poly(90), b in arb_poly(40)) {
            prop_assume!(!b.is_zero());
            let (q, r) = a.divrem(&b);
            let back = &(&q * &b) + &r;
            prop_assert_eq!(back, a.clone());
            if let (Some(rd), Some(bd)) = (r.degree(), b.degree()) {
                prop_assert!(rd < bd);
            }
        }

        #[test]
        fn mul_distributes(a in arb_poly(50), b in arb_poly(50), c in arb_poly(50)) {
            let lhs = &a * &(&b + &c);
            let rhs = &(&a * &b) + &(&a * &c);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
