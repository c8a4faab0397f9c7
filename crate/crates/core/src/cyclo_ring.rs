//! Exact arithmetic in `Z[μ_n]` and in `Z[x]/(Φ_g, p^n)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{
    divisors, euler_phi, factorize, gcd, inv_mod, is_prime, multiplicative_order, mul_mod, pow_mod,
    valuation,
};
use crate::error::{Error, Result};
use crate::poly::{IntPoly, ZnPoly};

/// `Φ_n` by exact division of `x^n - 1` by the lower cyclotomic polynomials.
pub fn cyclotomic_polynomial(n: u64) -> IntPoly {
    let mut memo = HashMap::new();
    cyclotomic_memo(n, &mut memo)
}

fn cyclotomic_memo(n: u64, memo: &mut HashMap<u64, IntPoly>) -> IntPoly {
    assert!(n >= 1);
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    let mut num = IntPoly::monomial(n as usize).sub(&IntPoly::one());
    for d in divisors(n) {
        if d < n {
            let phi_d = cyclotomic_memo(d, memo);
            num = num.exact_div(&phi_d);
        }
    }
    memo.insert(n, num.clone());
    num
}

/// `Φ_{nq}` and, when `q ∤ n`, `Φ_n`, checked against `Φ_n(X^q)`.
pub fn cyclotomic_shift_identity(n: u64, q: u64) -> Result<(IntPoly, Option<IntPoly>)> {
    if !is_prime(q) {
        return Err(Error::Domain(format!("{q} is not prime")));
    }
    let phi_n = cyclotomic_polynomial(n);
    let phi_nq = cyclotomic_polynomial(n * q);
    let lhs = phi_n.inflate(q as usize);
    if n % q == 0 {
        if lhs != phi_nq {
            return Err(Error::Verification(format!("Φ_{n}(X^{q}) ≠ Φ_{}", n * q)));
        }
        Ok((phi_nq, None))
    } else {
        if lhs != phi_nq.mul(&phi_n) {
            return Err(Error::Verification(format!("Φ_{n}(X^{q}) ≠ Φ_{}·Φ_{n}", n * q)));
        }
        Ok((phi_nq, Some(phi_n)))
    }
}

/// `1 + x + ... + x^a`; `a = -1` gives zero.
fn geometric(a: i64) -> IntPoly {
    IntPoly::new(vec![BigInt::one(); (a + 1).max(0) as usize])
}

/// Quotient of `G_m` by `G_n` in the geometric Euclid step, and the remainder index.
fn geometric_div(m: i64, n: i64) -> (IntPoly, i64) {
    let (q, r) = (m + 1).div_rem(&(n + 1));
    let mut c = vec![BigInt::zero(); (m + 1) as usize];
    for k in 1..=q {
        c[(m + 1 - k * (n + 1)) as usize] = BigInt::one();
    }
    (IntPoly::new(c), r - 1)
}

/// `(A, B)` with `A·Φ_{l1} + B·Φ_{l2} = 1` for distinct primes.
pub fn geometric_bezout(l1: u64, l2: u64) -> Result<(IntPoly, IntPoly)> {
    if l1 == l2 || !is_prime(l1) || !is_prime(l2) {
        return Err(Error::Domain(format!("({l1}, {l2}) is not a pair of distinct primes")));
    }
    // Extended Euclid on (G_{l1-1}, G_{l2-1}); all remainders stay geometric.
    let (mut a, mut b) = (l1 as i64 - 1, l2 as i64 - 1);
    let (mut s0, mut s1) = (IntPoly::one(), IntPoly::zero());
    let (mut t0, mut t1) = (IntPoly::zero(), IntPoly::one());
    while b >= 0 {
        let (q, r) = geometric_div(a, b);
        a = b;
        b = r;
        let s = s0.sub(&q.mul(&s1));
        s0 = std::mem::replace(&mut s1, s);
        let t = t0.sub(&q.mul(&t1));
        t0 = std::mem::replace(&mut t1, t);
    }
    debug_assert_eq!(a, 0);
    let phi1 = geometric(l1 as i64 - 1);
    let phi2 = geometric(l2 as i64 - 1);
    if s0.mul(&phi1).add(&t0.mul(&phi2)) != IntPoly::one() {
        return Err(Error::Verification(format!("Bezout certificate for ({l1}, {l2})")));
    }
    Ok((s0, t0))
}

/// `N_{n,l}(X) = Σ_{i<l} X^{(n/l) i}`
pub fn nu_polynomial(n: u64, l: u64) -> IntPoly {
    geometric(l as i64 - 1).inflate((n / l) as usize)
}

/// Bezout pair for `Φ_{n/li}` and `Φ_{n/lj}`, `n` square-free.
fn comaximal_pair(n: u64, li: u64, lj: u64) -> (IntPoly, IntPoly) {
    if n == li * lj {
        return geometric_bezout(lj, li).expect("distinct primes");
    }
    let q = factorize(n)
        .into_iter()
        .map(|(q, _)| q)
        .find(|&q| q != li && q != lj)
        .expect("a third prime");
    let n1 = n / q;
    let (a, b) = comaximal_pair(n1, li, lj);
    (
        a.inflate(q as usize).mul(&cyclotomic_polynomial(n1 / li)),
        b.inflate(q as usize).mul(&cyclotomic_polynomial(n1 / lj)),
    )
}

fn nu_squarefree(n: u64) -> BTreeMap<u64, IntPoly> {
    let primes: Vec<u64> = factorize(n).into_iter().map(|(l, _)| l).collect();
    if primes.len() == 1 {
        return BTreeMap::from([(n, IntPoly::one())]);
    }
    let (li, lj) = (primes[0], primes[1]);
    let (u, v) = comaximal_pair(n, li, lj);
    let mut out: BTreeMap<u64, IntPoly> = primes.iter().map(|&l| (l, IntPoly::zero())).collect();
    for (lk, w) in [(li, u), (lj, v)] {
        // Φ_n·Φ_{n/lk} = Σ_{s≠k} A_s(X^{lk})·N_{n,s}
        for (s, a) in nu_squarefree(n / lk) {
            let term = w.mul(&a.inflate(lk as usize));
            let e = out.get_mut(&s).unwrap();
            *e = e.add(&term);
        }
    }
    out
}

/// Coefficients `A_l` with `Φ_n = Σ_l A_l·N_{n,l}`, verified exactly.
pub fn nu_decomposition(n: u64) -> Result<BTreeMap<u64, IntPoly>> {
    if n < 2 {
        return Err(Error::Domain("nu_decomposition needs n ≥ 2".into()));
    }
    let rad: u64 = factorize(n).iter().map(|&(l, _)| l).product();
    let k = (n / rad) as usize;
    let out: BTreeMap<u64, IntPoly> = nu_squarefree(rad)
        .into_iter()
        .map(|(l, a)| (l, a.inflate(k)))
        .collect();
    let sum = out
        .iter()
        .fold(IntPoly::zero(), |acc, (&l, a)| acc.add(&a.mul(&nu_polynomial(n, l))));
    if sum != cyclotomic_polynomial(n) {
        return Err(Error::Verification(format!("N-decomposition of Φ_{n}")));
    }
    Ok(out)
}

/// Element of `Q(μ_n)` as `num / den` with `num` reduced modulo `Φ_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicElement {
    pub level: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CyclotomicElement {
    /// From a polynomial in `ζ_n` of any degree and a positive denominator.
    pub fn from_poly(level: u64, p: &IntPoly, den: BigInt) -> Self {
        let phi = cyclotomic_polynomial(level);
        let r = p.rem(&phi);
        Self::from_reduced(level, r, den)
    }

    fn from_reduced(level: u64, r: IntPoly, den: BigInt) -> Self {
        let d = euler_phi(level) as usize;
        let mut num: Vec<BigInt> = (0..d).map(|i| r.coeff(i)).collect();
        let mut den = den;
        if den.is_negative() {
            den = -den;
            num.iter_mut().for_each(|c| *c = -&*c);
        }
        let g = num.iter().fold(den.clone(), |acc, c| acc.gcd(c));
        if !g.is_zero() && !g.is_one() {
            num.iter_mut().for_each(|c| *c = &*c / &g);
            den /= &g;
        }
        CyclotomicElement { level, num, den }
    }

    pub fn from_integer(level: u64, a: i64) -> Self {
        Self::from_poly(level, &IntPoly::from_i64(&[a]), BigInt::one())
    }

    /// `Σ c_k ζ^{e_k}` over integer terms.
    pub fn from_terms(level: u64, terms: &[(u64, BigInt)], den: BigInt) -> Self {
        let mut c = vec![BigInt::zero(); level.max(1) as usize];
        for (e, v) in terms {
            c[(*e % level.max(1)) as usize] += v;
        }
        Self::from_poly(level, &IntPoly::new(c), den)
    }

    pub fn numerator(&self) -> IntPoly {
        IntPoly::new(self.num.clone())
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|c| BigRational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.level, o.level);
        let a = self.numerator().scale(&o.den);
        let b = o.numerator().scale(&self.den);
        Self::from_reduced(self.level, a.add(&b), &self.den * &o.den)
    }

    pub fn neg(&self) -> Self {
        Self::from_reduced(self.level, self.numerator().neg(), self.den.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.level, o.level);
        Self::from_poly(self.level, &self.numerator().mul(&o.numerator()), &self.den * &o.den)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::from_reduced(
            self.level,
            self.numerator().scale(r.numer()),
            &self.den * r.denom(),
        )
    }

    /// Image under `ζ ↦ ζ^a`, `gcd(a, n) = 1`.
    pub fn conjugate(&self, a: u64) -> Self {
        let n = self.level;
        let terms: Vec<(u64, BigInt)> = self
            .num
            .iter()
            .enumerate()
            .map(|(i, c)| (mul_mod(i as u64, a, n.max(1)), c.clone()))
            .collect();
        Self::from_terms(n, &terms, self.den.clone())
    }

    /// Exact norm down to `Q`.
    pub fn norm(&self) -> BigRational {
        let num = exact_norm(self.level, &self.num);
        let d = euler_phi(self.level) as u32;
        BigRational::new(num, num_traits::pow::pow(self.den.clone(), d as usize))
    }
}

impl fmt::Display for CyclotomicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.numerator().to_string().replace('x', "z");
        if self.den.is_one() {
            write!(f, "{p}")
        } else {
            write!(f, "({p})/{}", self.den)
        }
    }
}

fn primes_one_mod(n: u64) -> impl Iterator<Item = u64> {
    let top = (1u64 << 62) / n * n + 1;
    let mut cand = top;
    std::iter::from_fn(move || loop {
        cand -= n;
        if is_prime(cand) {
            return Some(cand);
        }
    })
}

fn primitive_root_of_unity(n: u64, l: u64) -> u64 {
    let qs: Vec<u64> = factorize(n).into_iter().map(|(q, _)| q).collect();
    (2..)
        .map(|a| pow_mod(a, (l - 1) / n, l))
        .find(|&w| qs.iter().all(|&q| pow_mod(w, n / q, l) != 1))
        .expect("a primitive root of unity exists")
}

/// `∏_{k ∈ (Z/n)^×} X(ω^k)` by multimodular evaluation and CRT.
pub fn exact_norm(n: u64, coeffs: &[BigInt]) -> BigInt {
    let n = n.max(1);
    let d = euler_phi(n);
    let l1: BigInt = coeffs.iter().map(|c| c.abs()).sum();
    if l1.is_zero() {
        return BigInt::zero();
    }
    let bound_bits = l1.bits() * d + 2;
    let mut acc = BigInt::zero();
    let mut modulus = BigInt::one();
    let units: Vec<u64> = (1..=n).filter(|&k| gcd(k, n) == 1).collect();
    for l in primes_one_mod(n) {
        let w = if n == 1 { 1 } else { primitive_root_of_unity(n, l) };
        let lb = BigInt::from(l);
        let red: Vec<u64> = coeffs.iter().map(|c| c.mod_floor(&lb).to_u64().unwrap()).collect();
        let mut prod = 1u64;
        for &k in &units {
            let x = pow_mod(w, k, l);
            let v = red.iter().rev().fold(0u64, |a, &c| (mul_mod(a, x, l) + c) % l);
            prod = mul_mod(prod, v, l);
        }
        // CRT step
        let cur = acc.mod_floor(&lb).to_u64().unwrap();
        let mm = modulus.mod_floor(&lb).to_u64().unwrap();
        let t = mul_mod((prod + l - cur) % l, inv_mod(mm, l).unwrap(), l);
        acc += &modulus * BigInt::from(t);
        modulus *= &lb;
        if modulus.bits() > bound_bits {
            break;
        }
    }
    let half = &modulus >> 1;
    if acc > half {
        acc - modulus
    } else {
        acc
    }
}

/// A `𝔭`-adic valuation known exactly, or only bounded below at the working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Exact(u64),
    AtLeast(u64),
}

impl Valuation {
    pub fn value(self) -> u64 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Exact(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// `Z[x]/(Φ_g, p^n)` with its lifted factors `P_φ` and idempotents `e_φ`.
#[derive(Clone, Debug)]
pub struct PadicCyclotomicContext {
    pub g: u64,
    pub p: u64,
    pub n: u32,
    pub modulus: u64,
    pub cyclotomic: ZnPoly,
    /// Irreducible factors of `Φ_{g0}` mod `p`, `g0` the prime-to-`p` part of `g`.
    pub residue_factors: Vec<ZnPoly>,
    pub factors: Vec<ZnPoly>,
    pub idempotents: Vec<ZnPoly>,
    pub ramification: u64,
    pub residue_degree: u64,
}

/// Equal-degree splitting of a squarefree product of degree-`d` irreducibles mod `p`.
fn equal_degree_split(f: &ZnPoly, d: usize, rng: &mut ChaCha8Rng) -> Vec<ZnPoly> {
    let p = f.m;
    let deg = f.degree().unwrap();
    if deg == d {
        return vec![f.clone()];
    }
    loop {
        let a = ZnPoly::new((0..deg).map(|_| rng.gen_range(0..p)).collect(), p);
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let b = if p == 2 {
            let mut t = a.clone();
            let mut s = a.clone();
            for _ in 1..d {
                t = t.mul_mod_poly(&t, f);
                s = s.add(&t);
            }
            s
        } else {
            // a^{(p^d - 1)/2} = ∏_{i<d} Frob^i(a^{(p-1)/2})
            let mut h = a.pow_mod_poly(((p - 1) / 2) as u128, f);
            let mut acc = h.clone();
            for _ in 1..d {
                h = h.pow_mod_poly(p as u128, f);
                acc = acc.mul_mod_poly(&h, f);
            }
            acc.sub(&ZnPoly::constant(1, p))
        };
        let g = f.gcd(&b);
        let gd = g.degree().unwrap_or(0);
        if gd > 0 && gd < deg {
            let h = f.div_rem(&g).0.make_monic();
            let mut out = equal_degree_split(&g, d, rng);
            out.extend(equal_degree_split(&h, d, rng));
            return out;
        }
    }
}

fn sort_key(q: &ZnPoly) -> Vec<i64> {
    q.c.iter().map(|&x| crate::arith::symmetric(x, q.m)).collect()
}

/// Irreducible factors of `Φ_{g0}` mod `p` (`p ∤ g0`), ordered by their symmetric coefficients.
pub fn factor_cyclotomic_mod_p(g0: u64, p: u64) -> Vec<ZnPoly> {
    let phi = cyclotomic_polynomial(g0).reduce_mod(p);
    let d = multiplicative_order(p % g0.max(1), g0.max(1)) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (g0 << 16) ^ p);
    let mut out = equal_degree_split(&phi, d.max(1), &mut rng);
    out.sort_by_key(sort_key);
    out
}

impl PadicCyclotomicContext {
    pub fn new(g: u64, p: u64, n: u32) -> Result<Self> {
        if g == 0 || n == 0 || !is_prime(p) {
            return Err(Error::Domain(format!("invalid context (g={g}, p={p}, n={n})")));
        }
        let modulus = p
            .checked_pow(n)
            .filter(|&m| m < (1 << 62))
            .ok_or_else(|| Error::Domain(format!("{p}^{n} exceeds the word-size modulus")))?;
        let k = valuation(g, p);
        let g0 = g / p.pow(k);
        let ramification = if k == 0 { 1 } else { euler_phi(p.pow(k)) };
        let residue_degree = multiplicative_order(p % g0.max(1), g0.max(1));
        let residue_factors = factor_cyclotomic_mod_p(g0, p);
        let cyclotomic = cyclotomic_polynomial(g).reduce_mod(modulus);
        let initial: Vec<ZnPoly> = residue_factors
            .iter()
            .map(|q| {
                (1..ramification).fold(q.clone(), |acc, _| acc.mul(q))
            })
            .collect();
        let factors = hensel_lift(&cyclotomic, &initial, p, n);
        let idempotents = idempotents(&cyclotomic, &factors, p, n);
        let ctx = PadicCyclotomicContext {
            g,
            p,
            n,
            modulus,
            cyclotomic,
            residue_factors,
            factors,
            idempotents,
            ramification,
            residue_degree,
        };
        ctx.verify()?;
        Ok(ctx)
    }

    fn verify(&self) -> Result<()> {
        let m = self.modulus;
        let prod = self
            .factors
            .iter()
            .fold(ZnPoly::constant(1, m), |acc, f| acc.mul(f));
        if prod != self.cyclotomic {
            return Err(Error::Verification(format!("factor product for Φ_{} mod {m}", self.g)));
        }
        let one = ZnPoly::constant(1, m);
        let sum = self
            .idempotents
            .iter()
            .fold(ZnPoly::zero(m), |acc, e| acc.add(e))
            .rem(&self.cyclotomic);
        if sum != one.rem(&self.cyclotomic) {
            return Err(Error::Verification("idempotents do not sum to 1".into()));
        }
        for (i, e) in self.idempotents.iter().enumerate() {
            if e.mul_mod_poly(e, &self.cyclotomic) != *e {
                return Err(Error::Verification(format!("e_{i} is not idempotent")));
            }
            for (j, f) in self.factors.iter().enumerate() {
                if i != j && !e.rem(f).is_zero() {
                    return Err(Error::Verification(format!("e_{i} is nonzero modulo P_{j}")));
                }
            }
        }
        Ok(())
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Index of the factor vanishing at `ζ^a`, where `ζ` is a root of the first factor.
    pub fn factor_for_exponent(&self, a: u64) -> usize {
        let q0 = &self.residue_factors[0];
        let g0 = self.g / self.p.pow(valuation(self.g, self.p));
        let xa = ZnPoly::x(self.p).pow_mod_poly((a % g0.max(1)) as u128, q0);
        self.residue_factors
            .iter()
            .position(|q| {
                let v = q.c.iter().rev().fold(ZnPoly::zero(self.p), |acc, &c| {
                    acc.mul_mod_poly(&xa, q0).add(&ZnPoly::constant(c, self.p))
                });
                v.rem(q0).is_zero()
            })
            .expect("ζ^a is a root of some factor")
    }

    /// Reduce an integral polynomial modulo `(P_i, p^n)`.
    pub fn reduce(&self, x: &IntPoly, i: usize) -> ZnPoly {
        x.reduce_mod(self.modulus).rem(&self.factors[i])
    }

    /// `𝔭_i`-adic valuation of an integral element, `v(p) = e`.
    pub fn valuation_int(&self, x: &IntPoly, i: usize) -> Valuation {
        let y = self.reduce(x, i);
        if y.is_zero() {
            return Valuation::AtLeast(self.n as u64 * self.ramification);
        }
        let c = y
            .c
            .iter()
            .filter(|&&v| v != 0)
            .map(|&v| valuation(v, self.p))
            .min()
            .unwrap();
        let pc = self.p.pow(c);
        let yr = ZnPoly::new(y.c.iter().map(|&v| (v / pc) % self.p).collect(), self.p);
        let q = &self.residue_factors[i];
        let mut mult = 0u64;
        let mut cur = yr;
        while !cur.is_zero() && mult < self.ramification {
            let (quo, r) = cur.div_rem(q);
            if !r.is_zero() {
                break;
            }
            cur = quo;
            mult += 1;
        }
        Valuation::Exact(self.ramification * c as u64 + mult)
    }

    /// `𝔭_i`-adic valuation of a rational cyclotomic element of level `g`.
    pub fn phi_valuation(&self, x: &CyclotomicElement, i: usize) -> Result<Valuation> {
        if x.level != self.g {
            return Err(Error::Domain(format!("element of level {} in context of level {}", x.level, self.g)));
        }
        let dv = self.ramification * dvaluation(x.denominator(), self.p);
        Ok(match self.valuation_int(&x.numerator(), i) {
            Valuation::Exact(v) => {
                if v < dv {
                    return Err(Error::Domain("element is not 𝔭-integral".into()));
                }
                Valuation::Exact(v - dv)
            }
            Valuation::AtLeast(v) => Valuation::AtLeast(v.saturating_sub(dv)),
        })
    }
}

fn dvaluation(d: &BigInt, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut x = d.abs();
    while !x.is_zero() && (&x % &pb).is_zero() {
        x /= &pb;
        v += 1;
    }
    v
}

/// Linear multi-factor Hensel lifting of `f ≡ ∏ P_i (mod p)` to `p^n`.
fn hensel_lift(f: &ZnPoly, initial: &[ZnPoly], p: u64, n: u32) -> Vec<ZnPoly> {
    let modulus = p.pow(n);
    if initial.len() == 1 {
        return vec![f.clone()];
    }
    let fp = f.reduce(p);
    let cof: Vec<ZnPoly> = (0..initial.len())
        .map(|i| {
            initial
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(ZnPoly::constant(1, p), |acc, (_, q)| acc.mul(q))
        })
        .collect();
    // s_i ≡ (∏_{j≠i} P_j)^{-1} mod P_i over F_p
    let inv: Vec<ZnPoly> = initial
        .iter()
        .zip(&cof)
        .map(|(q, c)| {
            let (g, s, _) = c.rem(q).ext_gcd(q);
            debug_assert_eq!(g.degree(), Some(0));
            s
        })
        .collect();
    let mut factors: Vec<ZnPoly> = initial.iter().map(|q| q.reduce(modulus)).collect();
    let mut pk = p;
    for _ in 1..n {
        let prod = factors.iter().fold(ZnPoly::constant(1, modulus), |acc, q| acc.mul(q));
        let err = f.sub(&prod);
        let e = ZnPoly::new(err.c.iter().map(|&v| (v / pk) % p).collect(), p);
        if !e.is_zero() {
            for (i, fac) in factors.iter_mut().enumerate() {
                let delta = e.mul(&inv[i]).rem(&initial[i]);
                let lifted = ZnPoly::new(delta.c.iter().map(|&v| v * pk).collect(), modulus);
                *fac = fac.add(&lifted);
            }
        }
        pk *= p;
    }
    let _ = fp;
    factors
}

/// `e_i = U_i·∏_{j≠i} P_j`, `U_i` the inverse of that product modulo `(P_i, p^n)`.
fn idempotents(f: &ZnPoly, factors: &[ZnPoly], p: u64, n: u32) -> Vec<ZnPoly> {
    let modulus = p.pow(n);
    if factors.len() == 1 {
        return vec![ZnPoly::constant(1, modulus).rem(f)];
    }
    factors
        .iter()
        .enumerate()
        .map(|(i, fi)| {
            let cof = factors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(ZnPoly::constant(1, modulus), |acc, (_, q)| acc.mul(q));
            let a = cof.rem(fi);
            let (_, s, _) = a.reduce(p).ext_gcd(&fi.reduce(p));
            // Newton: u ← u(2 - a·u)
            let mut u = s.reduce(modulus);
            let mut prec = 1;
            let two = ZnPoly::constant(2, modulus);
            while prec < n {
                let au = a.mul_mod_poly(&u, fi);
                u = u.mul_mod_poly(&two.sub(&au), fi);
                prec *= 2;
            }
            u.mul(&cof).rem(f)
        })
        .collect()
}

/// Convenience wrapper matching the operation name.
pub fn build_padic_context(g: u64, p: u64, n: u32) -> Result<PadicCyclotomicContext> {
    PadicCyclotomicContext::new(g, p, n)
}

/// `α + βj` with `j² + j + 1 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EisensteinInt {
    pub a: i64,
    pub b: i64,
}

impl EisensteinInt {
    pub const fn new(a: i64, b: i64) -> Self {
        EisensteinInt { a, b }
    }

    pub fn norm(self) -> i128 {
        let (a, b) = (self.a as i128, self.b as i128);
        a * a - a * b + b * b
    }

    pub fn mul(self, o: Self) -> Self {
        // (a + bj)(c + dj) = ac + (ad + bc)j + bd j², j² = -1 - j
        let (a, b, c, d) = (self.a, self.b, o.a, o.b);
        EisensteinInt::new(a * c - b * d, a * d + b * c - b * d)
    }

    /// `j ↦ j²`
    pub fn conj(self) -> Self {
        EisensteinInt::new(self.a - self.b, -self.b)
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// The six associates `u·x`, `u ∈ {±1, ±j, ±j²}`.
    pub fn associates(self) -> [Self; 6] {
        let j = EisensteinInt::new(0, 1);
        let x1 = self.mul(j);
        let x2 = x1.mul(j);
        let neg = |x: Self| EisensteinInt::new(-x.a, -x.b);
        [self, x1, x2, neg(self), neg(x1), neg(x2)]
    }

    /// Associate with `a > b ≥ 0` (zero maps to itself).
    pub fn canonical(self) -> Self {
        if self.is_zero() {
            return self;
        }
        *self
            .associates()
            .iter()
            .find(|x| x.a > x.b && x.b >= 0)
            .expect("one associate lies in the sector")
    }

    /// Rounded quotient for the Euclidean algorithm.
    fn div_round(self, o: Self) -> Self {
        let n = o.norm();
        let num = self.mul(o.conj());
        let r = |x: i64| -> i64 { ((2 * x as i128 + n).div_euclid(2 * n)) as i64 };
        EisensteinInt::new(r(num.a), r(num.b))
    }

    fn sub(self, o: Self) -> Self {
        EisensteinInt::new(self.a - o.a, self.b - o.b)
    }

    pub fn gcd(self, o: Self) -> Self {
        let (mut x, mut y) = (self, o);
        while !y.is_zero() {
            let q = x.div_round(y);
            let r = x.sub(q.mul(y));
            x = y;
            y = r;
        }
        x
    }
}

impl fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, b) => write!(f, "{b}*j"),
            (a, b) if b < 0 => write!(f, "{a} - {}*j", -b),
            (a, b) => write!(f, "{a} + {b}*j"),
        }
    }
}

/// Roots `R_1, R_2` of `y² + y + 1` modulo `p^n`, ordered like the factors of `Φ_3`.
pub fn cube_roots_of_unity(p: u64, n: u32) -> Result<[u64; 2]> {
    if p % 3 != 1 {
        return Err(Error::Domain(format!("{p} does not split in Q(j)")));
    }
    let ctx = PadicCyclotomicContext::new(3, p, n)?;
    let r = |f: &ZnPoly| (f.m - f.coeff(0)) % f.m;
    Ok([r(&ctx.factors[0]), r(&ctx.factors[1])])
}

/// `(π_1, π_2)` of norm `p` with `π_i ∈ 𝔭_i`, the prime above `p` where `j ≡ R_i`.
pub fn eisenstein_factor(p: u64) -> Result<(EisensteinInt, EisensteinInt)> {
    if p % 3 != 1 || !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not a prime ≡ 1 mod 3")));
    }
    let [r1, r2] = cube_roots_of_unity(p, 1)?;
    let pick = |r: u64| -> EisensteinInt {
        let c = crate::arith::symmetric((p - r) % p, p);
        let cand = EisensteinInt::new(c, 1);
        if cand.norm() == p as i128 {
            return cand;
        }
        let alt = EisensteinInt::new(c - p as i64, 1);
        if alt.norm() == p as i128 {
            return alt;
        }
        EisensteinInt::new(p as i64, 0).gcd(cand).canonical()
    };
    let (pi1, pi2) = (pick(r1), pick(r2));
    debug_assert_eq!(pi1.norm(), p as i128);
    debug_assert_eq!(pi2.norm(), p as i128);
    Ok((pi1, pi2))
}

/// Valuations of `α + βj` at `(𝔭_1, 𝔭_2)`, computed modulo `p^n`.
pub fn eisenstein_valuations(x: EisensteinInt, p: u64, n: u32) -> Result<[Valuation; 2]> {
    let ctx = PadicCyclotomicContext::new(3, p, n)?;
    let poly = IntPoly::from_i64(&[x.a, x.b]);
    Ok([ctx.valuation_int(&poly, 0), ctx.valuation_int(&poly, 1)])
}
