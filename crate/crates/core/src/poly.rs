//! Dense univariate polynomials, lowest degree first.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{add_mod, inv_mod, mul_mod, sub_mod};

/// Polynomial with arbitrary-precision integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        IntPoly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> IntPoly {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: &BigInt) -> IntPoly {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Division by a polynomial whose leading coefficient is `±1`.
    pub fn div_rem(&self, d: &IntPoly) -> (IntPoly, IntPoly) {
        let lead = d.leading();
        assert!(lead.abs().is_one(), "divisor must have unit leading coefficient");
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = &r[i] * &lead;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[i - dd + j] -= &c * dj;
            }
            q[i - dd] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    pub fn rem(&self, d: &IntPoly) -> IntPoly {
        self.div_rem(d).1
    }

    /// Exact quotient; panics when `d` does not divide `self`.
    pub fn exact_div(&self, d: &IntPoly) -> IntPoly {
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// `self(x^k)`
    pub fn inflate(&self, k: usize) -> IntPoly {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * k] = c.clone();
        }
        Self::new(out)
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `self(g(x))`
    pub fn compose(&self, g: &IntPoly) -> IntPoly {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| acc.mul(g).add(&Self::new(vec![c.clone()])))
    }

    pub fn reduce_mod(&self, m: u64) -> ZnPoly {
        let mb = BigInt::from(m);
        ZnPoly::new(
            self.coeffs
                .iter()
                .map(|c| c.mod_floor(&mb).to_u64().unwrap())
                .collect(),
            m,
        )
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}x", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}x^{i}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

/// Polynomial over `Z/mZ` with word-size modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZnPoly {
    pub c: Vec<u64>,
    pub m: u64,
}

impl ZnPoly {
    pub fn new(mut c: Vec<u64>, m: u64) -> Self {
        for x in c.iter_mut() {
            *x %= m;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        ZnPoly { c, m }
    }

    pub fn from_i64(c: &[i64], m: u64) -> Self {
        Self::new(c.iter().map(|&x| crate::arith::reduce_i128(x as i128, m)).collect(), m)
    }

    pub fn zero(m: u64) -> Self {
        ZnPoly { c: Vec::new(), m }
    }

    pub fn constant(a: u64, m: u64) -> Self {
        Self::new(vec![a], m)
    }

    pub fn x(m: u64) -> Self {
        Self::new(vec![0, 1], m)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.c.get(i).copied().unwrap_or(0)
    }

    pub fn leading(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1 % self.m
    }

    pub fn add(&self, o: &ZnPoly) -> ZnPoly {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|i| add_mod(self.coeff(i), o.coeff(i), self.m)).collect(), self.m)
    }

    pub fn sub(&self, o: &ZnPoly) -> ZnPoly {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|i| sub_mod(self.coeff(i), o.coeff(i), self.m)).collect(), self.m)
    }

    pub fn neg(&self) -> ZnPoly {
        Self::new(self.c.iter().map(|&x| sub_mod(0, x, self.m)).collect(), self.m)
    }

    pub fn scale(&self, s: u64) -> ZnPoly {
        Self::new(self.c.iter().map(|&x| mul_mod(x, s, self.m)).collect(), self.m)
    }

    pub fn mul(&self, o: &ZnPoly) -> ZnPoly {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.m);
        }
        let m = self.m as u128;
        let mut acc = vec![0u128; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % m;
            }
        }
        Self::new(acc.into_iter().map(|x| x as u64).collect(), self.m)
    }

    /// Division by a polynomial with invertible leading coefficient.
    pub fn div_rem(&self, d: &ZnPoly) -> (ZnPoly, ZnPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = inv_mod(d.leading(), self.m).expect("leading coefficient must be a unit");
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Self::zero(self.m), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = mul_mod(r[i], inv, self.m);
            if c == 0 {
                continue;
            }
            for (j, &dj) in d.c.iter().enumerate() {
                r[i - dd + j] = sub_mod(r[i - dd + j], mul_mod(c, dj, self.m), self.m);
            }
            q[i - dd] = c;
        }
        r.truncate(dd);
        (Self::new(q, self.m), Self::new(r, self.m))
    }

    pub fn rem(&self, d: &ZnPoly) -> ZnPoly {
        self.div_rem(d).1
    }

    pub fn mul_mod_poly(&self, o: &ZnPoly, modulus: &ZnPoly) -> ZnPoly {
        self.mul(o).rem(modulus)
    }

    /// `self^e mod modulus`
    pub fn pow_mod_poly(&self, mut e: u128, modulus: &ZnPoly) -> ZnPoly {
        let mut base = self.rem(modulus);
        let mut acc = Self::constant(1, self.m).rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod_poly(&base, modulus);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod_poly(&base, modulus);
            }
        }
        acc
    }

    pub fn make_monic(&self) -> ZnPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.leading(), self.m).expect("leading coefficient must be a unit");
        self.scale(inv)
    }

    /// Monic gcd; the modulus must be prime.
    pub fn gcd(&self, o: &ZnPoly) -> ZnPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// `(g, s, t)` with `s·a + t·b = g` monic; the modulus must be prime.
    pub fn ext_gcd(&self, o: &ZnPoly) -> (ZnPoly, ZnPoly, ZnPoly) {
        let m = self.m;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Self::constant(1, m), Self::zero(m));
        let (mut t0, mut t1) = (Self::zero(m), Self::constant(1, m));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        let inv = inv_mod(r0.leading(), m).expect("nonzero gcd");
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.c.iter().rev().fold(0, |acc, &c| add_mod(mul_mod(acc, x, self.m), c, self.m))
    }

    /// Reinterpret the coefficients modulo a divisor of `m`.
    pub fn reduce(&self, m2: u64) -> ZnPoly {
        Self::new(self.c.clone(), m2)
    }

    /// Symmetric lift to integers.
    pub fn lift_symmetric(&self) -> IntPoly {
        IntPoly::new(
            self.c
                .iter()
                .map(|&x| BigInt::from(crate::arith::symmetric(x, self.m)))
                .collect(),
        )
    }

    pub fn lift(&self) -> IntPoly {
        IntPoly::new(self.c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn derivative(&self) -> ZnPoly {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &x)| mul_mod(x, i as u64 % self.m, self.m))
                .collect(),
            self.m,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_division() {
        let a = IntPoly::from_i64(&[-1, 0, 0, 1]);
        let b = IntPoly::from_i64(&[-1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, IntPoly::from_i64(&[1, 1, 1]));
        assert!(r.is_zero());
        assert_eq!(IntPoly::from_i64(&[1, -1, 1]).to_string(), "x^2 - x + 1");
    }

    #[test]
    fn compose_and_inflate() {
        let p = IntPoly::from_i64(&[1, 1]);
        assert_eq!(p.inflate(3), IntPoly::from_i64(&[1, 0, 0, 1]));
        let sq = IntPoly::from_i64(&[-2, 0, 1]);
        assert_eq!(sq.compose(&sq), IntPoly::from_i64(&[2, 0, -4, 0, 1]));
    }

    #[test]
    fn zn_ext_gcd() {
        let a = ZnPoly::from_i64(&[-2, 1], 7);
        let b = ZnPoly::from_i64(&[-4, 1], 7);
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(g, ZnPoly::constant(1, 7));
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }
}
