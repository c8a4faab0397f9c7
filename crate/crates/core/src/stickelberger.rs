//! Stickelberger elements, their integral twists and annihilator ideals, and
//! the finite-level limit elements `A_{K,n}(c)` governing `p`-adic torsion.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{crt, factorize, gcd, inv_mod, is_power_of, is_prime, mul_mod, valuation};
use crate::characters::{padic_orbits, RationalCharacter, ResidueCharacter, UnitGroupStructure};
use crate::cyclo_ring::{CyclotomicElement, PadicCyclotomicContext, Valuation};
use crate::error::{Error, Result};
use crate::minus_part::{bernoulli_b1, cyclotomic_prime};
use crate::poly::IntPoly;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Element of `Q[G]` for `G = ⟨σ⟩` cyclic of order `g`; index `i` holds the coefficient of `σ^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    pub coeffs: Vec<BigRational>,
}

impl GroupRingElement {
    pub fn zero(g: u64) -> Self {
        GroupRingElement { coeffs: vec![BigRational::zero(); g as usize] }
    }

    pub fn scalar(g: u64, c: BigRational) -> Self {
        let mut x = Self::zero(g);
        x.coeffs[0] = c;
        x
    }

    /// `c·σ^k`
    pub fn monomial(g: u64, k: u64, c: BigRational) -> Self {
        let mut x = Self::zero(g);
        x.coeffs[(k % g) as usize] = c;
        x
    }

    pub fn order(&self) -> u64 {
        self.coeffs.len() as u64
    }

    pub fn add(&self, o: &Self) -> Self {
        GroupRingElement { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        GroupRingElement { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        GroupRingElement { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let g = self.coeffs.len();
        let mut out = vec![BigRational::zero(); g];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[(i + j) % g] += a * b;
                }
            }
        }
        GroupRingElement { coeffs: out }
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn sum(&self) -> BigRational {
        self.coeffs.iter().sum()
    }

    /// Image under `σ ↦ ζ_g^a` in `Q(μ_g)`.
    pub fn character_image(&self, a: u64) -> CyclotomicElement {
        let g = self.order();
        let den = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let terms: Vec<(u64, BigInt)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (mul_mod(i as u64, a, g), (c * BigRational::from_integer(den.clone())).to_integer()))
            .collect();
        CyclotomicElement::from_terms(g, &terms, den)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A cyclic field `K` of conductor `f`, given by a primitive character cutting it out.
#[derive(Clone, Debug)]
pub struct CyclicFieldSelector {
    pub f: u64,
    pub g: u64,
    pub psi: ResidueCharacter,
    /// Smallest residue whose Artin symbol is the chosen generator `σ`.
    pub generator: u64,
}

impl CyclicFieldSelector {
    pub fn from_character(psi: &ResidueCharacter) -> Result<Self> {
        let psi = psi.primitive();
        let f = psi.modulus();
        if f <= 1 {
            return Err(Error::Domain("the selector needs conductor f > 1".into()));
        }
        let g = psi.order;
        let generator = (1..f)
            .find(|&a| psi.value(a) == Some(1 % g))
            .ok_or_else(|| Error::Domain("no residue maps to the generator".into()))?;
        Ok(CyclicFieldSelector { f, g, psi, generator })
    }

    pub fn from_rational(chi: &RationalCharacter) -> Result<Self> {
        Self::from_character(&chi.representative)
    }

    /// `K = Q(μ_f)` for `f` with cyclic unit group.
    pub fn cyclotomic(f: u64) -> Result<Self> {
        let group = Arc::new(UnitGroupStructure::new(f));
        if group.generators.len() > 1 {
            return Err(Error::Domain(format!("(Z/{f}Z)^× is not cyclic")));
        }
        let n = group.generators.len();
        let psi = ResidueCharacter::new(group, vec![1; n]);
        Self::from_character(&psi)
    }

    /// Power `k` with `σ_a|_K = σ^k`.
    pub fn class_of(&self, a: u64) -> Option<u64> {
        self.psi.value(a % self.f)
    }

    pub fn is_imaginary(&self) -> bool {
        self.psi.odd
    }

    fn units(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.f).filter(move |&a| gcd(a, self.f) == 1)
    }

    /// Position of `σ_a^{-1}` in a coefficient vector.
    pub fn inverse_index(&self, a: u64) -> u64 {
        let k = self.class_of(a).expect("unit");
        (self.g - k) % self.g
    }
}

/// `B_K = -Σ (a/f - ½)·σ_a^{-1}` restricted to `K`.
#[derive(Clone, Debug)]
pub struct StickelbergerElement {
    pub selector: CyclicFieldSelector,
    pub element: GroupRingElement,
}

impl StickelbergerElement {
    /// Coefficient sum over the class of `a`, written at `σ_a^{-1}`.
    pub fn coefficient_at(&self, a: u64) -> BigRational {
        self.element.coeffs[self.selector.inverse_index(a) as usize].clone()
    }
}

pub fn stickelberger_element(sel: &CyclicFieldSelector) -> Result<StickelbergerElement> {
    if sel.f <= 1 {
        return Err(Error::Domain("Stickelberger element needs f > 1".into()));
    }
    let f = sel.f as i64;
    let mut el = GroupRingElement::zero(sel.g);
    for a in sel.units() {
        let i = sel.inverse_index(a) as usize;
        el.coeffs[i] -= q(2 * a as i64 - f, 2 * f);
    }
    Ok(StickelbergerElement { selector: sel.clone(), element: el })
}

/// `θ_K = (1/f)·Σ a·σ_a^{-1}` restricted to `K`.
pub fn theta_element(sel: &CyclicFieldSelector) -> GroupRingElement {
    let mut el = GroupRingElement::zero(sel.g);
    for a in sel.units() {
        el.coeffs[sel.inverse_index(a) as usize] += q(a as i64, sel.f as i64);
    }
    el
}

/// `α_σ = Σ_{σ_a|_K = σ} a`, indexed by the power of `σ`.
pub fn alpha_coefficients(sel: &CyclicFieldSelector) -> Vec<u64> {
    let mut out = vec![0u64; sel.g as usize];
    for a in sel.units() {
        out[sel.class_of(a).unwrap() as usize] += a;
    }
    out
}

#[derive(Clone, Debug)]
pub struct Twist {
    pub c: u64,
    pub element: GroupRingElement,
    /// `B'^c` with `B^c = B'^c·(1 - s)`, when `K` is imaginary.
    pub half: Option<GroupRingElement>,
}

/// `λ_a(c) = (a'·c - a)/f` with `a'·c ≡ a (mod f)`, `a' ∈ [1, f]`.
pub fn lambda_a(a: u64, c: u64, f: u64) -> i64 {
    let cinv = inv_mod(c % f, f).expect("c prime to f");
    let mut ap = mul_mod(a % f, cinv, f);
    if ap == 0 {
        ap = f;
    }
    ((ap as i128 * c as i128 - a as i128) / f as i128) as i64
}

pub fn twist_c(b: &StickelbergerElement, c: u64) -> Result<Twist> {
    let sel = &b.selector;
    if c % 2 == 0 || gcd(c, sel.f) != 1 {
        return Err(Error::Domain(format!("c = {c} must be odd and prime to {}", sel.f)));
    }
    let g = sel.g;
    let shift = q(1 - c as i64, 2);
    let mut el = GroupRingElement::zero(g);
    let mut half = GroupRingElement::zero(g);
    for a in sel.units() {
        let coef = BigRational::from_integer(lambda_a(a, c, sel.f).into()) + &shift;
        let i = sel.inverse_index(a) as usize;
        if 2 * a < sel.f {
            half.coeffs[i] += &coef;
        }
        el.coeffs[i] += coef;
    }
    // (1 - c·σ_c^{-1})·B_K
    let kc = sel.inverse_index(c);
    let factor = GroupRingElement::scalar(g, BigRational::one())
        .sub(&GroupRingElement::monomial(g, kc, BigRational::from_integer(c.into())));
    if factor.mul(&b.element) != el {
        return Err(Error::Verification(format!("twist by c = {c} disagrees with (1 - cσ_c^-1)B")));
    }
    if !el.is_integral() {
        return Err(Error::Verification(format!("twist by c = {c} is not integral")));
    }
    let half = if sel.is_imaginary() {
        let s = sel.inverse_index(sel.f - 1);
        let one_minus_s = GroupRingElement::scalar(g, BigRational::one())
            .sub(&GroupRingElement::monomial(g, s, BigRational::one()));
        if half.mul(&one_minus_s) != el {
            return Err(Error::Verification("half-range factorization failed".into()));
        }
        Some(half)
    } else {
        None
    };
    Ok(Twist { c, element: el, half })
}

/// `Λ_K = f / gcd(f, α_1)`
pub fn lambda_k(sel: &CyclicFieldSelector) -> u64 {
    let a1 = alpha_coefficients(sel)[0];
    sel.f / gcd(sel.f, a1)
}

/// Generators `(σ_γ - γ, Λ_K)` of the ideal `𝔄_K`, each checked to make `θ_K` integral.
pub fn ideal_a_generators(sel: &CyclicFieldSelector) -> Result<Vec<GroupRingElement>> {
    let g = sel.g;
    let lam = lambda_k(sel);
    let theta = theta_element(sel);
    let gen = GroupRingElement::monomial(g, 1 % g, BigRational::one())
        .sub(&GroupRingElement::scalar(g, BigRational::from_integer(sel.generator.into())));
    let scal = GroupRingElement::scalar(g, BigRational::from_integer(lam.into()));
    for (name, x) in [("σ - γ", &gen), ("Λ", &scal)] {
        if !x.mul(&theta).is_integral() {
            return Err(Error::Verification(format!("generator {name} does not integralize θ")));
        }
    }
    Ok(vec![gen, scal])
}

/// Coefficients of `B_{Q(μ_f)}` keyed by the residue `a` of `σ_a^{-1}`.
pub fn stickelberger_full(f: u64) -> BTreeMap<u64, BigRational> {
    (1..f)
        .filter(|&a| gcd(a, f) == 1)
        .map(|a| (a, -q(2 * a as i64 - f as i64, 2 * f as i64)))
        .collect()
}

/// `(1 - c·σ_c^{-1})·B` on all of `Q(μ_f)` and its half-system factor, keyed by residue.
pub fn twist_full(f: u64, c: u64) -> Result<(BTreeMap<u64, BigRational>, BTreeMap<u64, BigRational>)> {
    if f <= 2 || c % 2 == 0 || gcd(c, f) != 1 {
        return Err(Error::Domain(format!("c = {c} must be odd and prime to f = {f} > 2")));
    }
    let shift = q(1 - c as i64, 2);
    let twist: BTreeMap<u64, BigRational> = (1..f)
        .filter(|&a| gcd(a, f) == 1)
        .map(|a| (a, BigRational::from_integer(lambda_a(a, c, f).into()) + &shift))
        .collect();
    let b = stickelberger_full(f);
    let cinv = inv_mod(c % f, f).unwrap();
    let cq = BigRational::from_integer(c.into());
    for (&a, x) in &twist {
        if *x != &b[&a] - &cq * &b[&mul_mod(a, cinv, f)] {
            return Err(Error::Verification(format!("twist by c = {c} disagrees with (1 - cσ_c^-1)B at {a}")));
        }
        if !x.is_integer() {
            return Err(Error::Verification(format!("twist by c = {c} is not integral at {a}")));
        }
        if !(x + &twist[&(f - a)]).is_zero() {
            return Err(Error::Verification("half-range factorization failed".into()));
        }
    }
    let half = twist.iter().filter(|(&a, _)| 2 * a < f).map(|(&a, x)| (a, x.clone())).collect();
    Ok((twist, half))
}

/// Both sides of the norm identity from `Q(μ_f)` down to `Q(μ_m)`.
pub fn norm_descent(f: u64, m: u64) -> Result<(BTreeMap<u64, BigRational>, BTreeMap<u64, BigRational>)> {
    if m <= 1 || f % m != 0 {
        return Err(Error::Domain(format!("need 1 < m | f, got f = {f}, m = {m}")));
    }
    let mut lhs: BTreeMap<u64, BigRational> = (1..m).filter(|&a| gcd(a, m) == 1).map(|a| (a, BigRational::zero())).collect();
    for (a, c) in stickelberger_full(f) {
        *lhs.get_mut(&(a % m)).unwrap() += c;
    }
    let mut rhs = stickelberger_full(m);
    for (l, _) in factorize(f) {
        if m % l == 0 {
            continue;
        }
        let linv = inv_mod(l % m, m).unwrap();
        // (1 - σ_l^{-1})·X: coefficient at b is X[b] - X[b·l^{-1}]
        rhs = rhs
            .iter()
            .map(|(&b, x)| (b, x - &rhs[&mul_mod(b, linv, m)]))
            .collect();
    }
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothingIdeal {
    Unit,
    PrimeAboveP,
    Four,
}

impl fmt::Display for SmoothingIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoothingIdeal::Unit => "unit",
            SmoothingIdeal::PrimeAboveP => "prime-above-p",
            SmoothingIdeal::Four => "(4)",
        })
    }
}

#[derive(Clone, Debug)]
pub struct AnnihilatorReport {
    pub seed: u64,
    pub factor: usize,
    pub bernoulli: CyclotomicElement,
    /// `𝔭`-exponent of `½B_1(ψ^{-1})`.
    pub bernoulli_valuation: i64,
    pub lambda: u64,
    pub smoothing: SmoothingIdeal,
    pub smoothing_valuation: u64,
}

/// Per `φ | χ` above `p`: Bernoulli part and the class of `(ψ(γ) - γ, Λ_χ)`.
pub fn annihilator_minus(chi: &RationalCharacter, p: u64) -> Result<Vec<AnnihilatorReport>> {
    if !chi.odd || chi.order == 1 {
        return Err(Error::Domain("annihilator_minus needs an odd character".into()));
    }
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let sel = CyclicFieldSelector::from_rational(chi)?;
    let lam = lambda_k(&sel);
    let b = bernoulli_b1(&sel.psi);
    let half_b = b.scale(&q(1, 2));
    let nb = half_b.norm();
    let vb = {
        let pb = BigInt::from(p);
        let mut v = 0i64;
        let mut x = nb.numer().abs();
        while !x.is_zero() && (&x % &pb).is_zero() {
            x /= &pb;
            v += 1;
        }
        v
    };
    let n = (vb as u32 + valuation(lam, p) + 4).max(4);
    let ctx = PadicCyclotomicContext::new(sel.g, p, n)?;
    let e = ctx.ramification;
    let q4 = cyclotomic_prime(chi) == Some(2);
    let mut out = Vec::new();
    for phi in padic_orbits(chi, p) {
        let factor = ctx.factor_for_exponent(phi.seed());
        // ψ(γ) - γ = ζ - γ
        let gen = IntPoly::from_i64(&[-(sel.generator as i64), 1]);
        let v1 = ctx.valuation_int(&gen, factor).value();
        let v2 = e * valuation(lam, p) as u64;
        let sv = v1.min(v2);
        let smoothing = if q4 && p == 2 {
            SmoothingIdeal::Four
        } else if sv == 0 {
            SmoothingIdeal::Unit
        } else {
            SmoothingIdeal::PrimeAboveP
        };
        let predicted = predicted_smoothing(chi, &sel, lam, p, phi.seed(), &ctx);
        if predicted != smoothing || (smoothing == SmoothingIdeal::PrimeAboveP && sv != 1) {
            return Err(Error::Verification(format!(
                "smoothing ideal {smoothing} (valuation {sv}) contradicts the predicted {predicted}"
            )));
        }
        let bv = ctx.phi_valuation(&half_b, factor);
        let bernoulli_valuation = match bv {
            Ok(Valuation::Exact(v)) => v as i64,
            Ok(Valuation::AtLeast(_)) => return Err(Error::PrecisionCap { level: n }),
            Err(_) => {
                // p in the denominator: only for the Teichmüller component
                let num = ctx.valuation_int(&half_b.numerator(), factor).value() as i64;
                num - (e as i64) * valuation_big(half_b.denominator(), p)
            }
        };
        out.push(AnnihilatorReport {
            seed: phi.seed(),
            factor,
            bernoulli: b.clone(),
            bernoulli_valuation,
            lambda: lam,
            smoothing,
            smoothing_valuation: sv,
        });
    }
    Ok(out)
}

fn valuation_big(x: &BigInt, p: u64) -> i64 {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut y = x.abs();
    while !y.is_zero() && (&y % &pb).is_zero() {
        y /= &pb;
        v += 1;
    }
    v
}

fn predicted_smoothing(
    chi: &RationalCharacter,
    sel: &CyclicFieldSelector,
    lam: u64,
    p: u64,
    seed: u64,
    ctx: &PadicCyclotomicContext,
) -> SmoothingIdeal {
    if cyclotomic_prime(chi) == Some(2) {
        return if p == 2 { SmoothingIdeal::Four } else { SmoothingIdeal::Unit };
    }
    // K ⊇ Q(μ_p) with p-power relative degree: f = p^k·f' forces the p-part of ψ
    // to have order (p-1)p^j and g = (p-1)p^j.
    let g = chi.order;
    let contains_mu_p = p > 2 && {
        let k = valuation(sel.f, p);
        k >= 1 && g % (p - 1) == 0 && is_power_of(g / (p - 1), p) && sel.f == p.pow(k)
    };
    if !contains_mu_p || lam % p != 0 {
        return SmoothingIdeal::Unit;
    }
    let psi = &sel.psi;
    let gamma = psi.group.generators[0];
    let f = sel.f;
    let t = crate::arith::pow_mod(gamma, f / p, f);
    let k = psi.value(t).unwrap() * seed % g;
    let r0 = (p - ctx.residue_factors[0].coeff(0)) % p;
    let target = crate::arith::pow_mod(r0, k, p);
    let lambda = (0..p - 1).find(|&l| crate::arith::pow_mod(gamma % p, l, p) == target).unwrap();
    if lambda == 1 {
        SmoothingIdeal::PrimeAboveP
    } else {
        SmoothingIdeal::Unit
    }
}

/// Which summation range to use for the limit element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Range {
    Full,
    Half,
}

/// `f_n`, the conductor of `K·Q(μ_{qp^n})`.
pub fn level_conductor(f: u64, p: u64, n: u32) -> u64 {
    let k = valuation(f, p);
    let fp = f / p.pow(k);
    let extra = if p == 2 { 2 } else { 1 };
    fp * p.pow(k.max(n + extra))
}

/// `Σ_{a ≤ B, (a, f_n) = 1} λ^n_a(c)·a^{-1}·x^{k(a)}` in `Z/p^n[x]/(x^g - 1)`, where `k(a)`
/// is the exponent of `ψ(a)`.
pub fn limit_sum(psi: &ResidueCharacter, p: u64, n: u32, c: u64, range: Range) -> Result<Vec<u64>> {
    let psi = psi.primitive();
    let g = psi.order.max(1) as usize;
    let fk = psi.modulus();
    let k = valuation(fk, p);
    let pk = p.pow(k);
    let fp = fk / pk;
    let extra = if p == 2 { 2 } else { 1 };
    let big_p = p
        .checked_pow(k.max(n + extra))
        .ok_or(Error::PrecisionCap { level: n })?;
    let m = fp.checked_mul(big_p).ok_or(Error::PrecisionCap { level: n })?;
    let pn = p.pow(n);
    if c == 0 || gcd(c, m) != 1 {
        return Err(Error::Domain(format!("c = {c} is not prime to f_n = {m}")));
    }
    if c == 1 {
        return Ok(vec![0; g]);
    }
    let minv_c = inv_mod(m % c, c).unwrap();
    // ψ = ψ'·ψ_p
    let lift = |y: u64, to_fp: bool| -> u64 {
        if to_fp {
            if pk == 1 { y } else { crt(&[(y % fp, fp), (1, pk)]).0 }
        } else if fp == 1 {
            y
        } else {
            crt(&[(1, fp), (y % pk, pk)]).0
        }
    };
    let kp: Vec<Option<u64>> = (0..pk).map(|v| psi.value(lift(v, false))).collect();
    let kprime: Vec<Option<u64>> = (0..fp)
        .map(|y| if gcd(y, fp) == 1 { psi.value(lift(y, true)) } else { None })
        .collect();
    // prefix counts Ψ'(x)[j] = #{y < x : ψ'(y) = ζ^j}
    let mut prefix = vec![0u32; (fp as usize + 1) * g];
    for y in 0..fp as usize {
        let (head, tail) = prefix.split_at_mut((y + 1) * g);
        tail[..g].copy_from_slice(&head[y * g..]);
        if let Some(j) = kprime[y] {
            tail[j as usize] += 1;
        }
    }
    let h = mul_mod(c % fp.max(1), big_p % fp.max(1), fp.max(1));
    let kh = if fp == 1 { 0 } else { kprime[h as usize].expect("c·P is a unit") } as usize;
    let hinv = if fp == 1 { 0 } else { inv_mod(h, fp).unwrap() };
    let bound = match range {
        Range::Full => m,
        Range::Half => m / 2,
    };
    let range_counts = |start: u64, len: u64, out: &mut [u64]| {
        let q = len / fp;
        let r = len % fp;
        let fpu = fp as usize;
        for (j, o) in out.iter_mut().enumerate() {
            let full = prefix[fpu * g + j] as u64;
            let s = start as usize;
            let e = s + r as usize;
            let part = if e <= fpu {
                prefix[e * g + j] as u64 - prefix[s * g + j] as u64
            } else {
                full - prefix[s * g + j] as u64 + prefix[(e - fpu) * g + j] as u64
            };
            *o = q * full + part;
        }
    };
    let total = (1..big_p)
        .into_par_iter()
        .filter(|v| v % p != 0)
        .fold(
            || vec![0u64; g],
            |mut acc, v| {
                let tv = if v > bound { 0 } else { ((bound - v) / big_p + 1).min(fp) };
                if tv == 0 {
                    return acc;
                }
                let mut local = vec![0u128; g];
                let mut counts = vec![0u64; g];
                for u in 0..c.min(tv) {
                    let a_mod_c = ((v % c) + mul_mod(u, big_p % c, c)) % c;
                    let lam = (c - mul_mod(a_mod_c, minv_c, c)) % c;
                    if lam == 0 {
                        continue;
                    }
                    let len = (tv - u).div_ceil(c);
                    let b = ((v % fp.max(1)) + mul_mod(u, big_p % fp.max(1), fp.max(1))) % fp.max(1);
                    let start = if fp == 1 { 0 } else { mul_mod(b, hinv, fp) };
                    range_counts(start, len, &mut counts);
                    for j in 0..g {
                        local[(j + kh) % g] += lam as u128 * counts[j] as u128;
                    }
                }
                let w = inv_mod(v % pn, pn).unwrap();
                let shift = kp[(v % pk) as usize].expect("unit") as usize;
                for j in 0..g {
                    let x = (local[j] % pn as u128) as u64;
                    let idx = (j + shift) % g;
                    acc[idx] = (acc[idx] + mul_mod(x, w, pn)) % pn;
                }
                acc
            },
        )
        .reduce(|| vec![0u64; g], |a, b| a.iter().zip(&b).map(|(x, y)| (x + y) % pn).collect());
    Ok(total)
}

/// Naive evaluation of [`limit_sum`] straight from the definition; for cross-checks only.
pub fn limit_sum_naive(psi: &ResidueCharacter, p: u64, n: u32, c: u64, range: Range) -> Result<Vec<u64>> {
    let psi = psi.primitive();
    let g = psi.order.max(1) as usize;
    let m = level_conductor(psi.modulus(), p, n);
    let pn = p.pow(n);
    if gcd(c, m) != 1 {
        return Err(Error::Domain(format!("c = {c} is not prime to f_n = {m}")));
    }
    let bound = match range {
        Range::Full => m,
        Range::Half => m / 2,
    };
    let mut acc = vec![0u64; g];
    for a in 1..=bound {
        if gcd(a, m) != 1 {
            continue;
        }
        let lam = lambda_a(a, c, m) as u64;
        let w = mul_mod(lam % pn, inv_mod(a % pn, pn).unwrap(), pn);
        let j = psi.value(a % psi.modulus()).unwrap() as usize;
        acc[j] = (acc[j] + w) % pn;
    }
    Ok(acc)
}

/// `A_{K,n}(c)` and `A'_{K,n}(c)` as elements of `Z/p^n[G_K]`.
#[derive(Clone, Debug)]
pub struct LimitElement {
    pub modulus: u64,
    pub level_conductor: u64,
    pub c: u64,
    pub full: Vec<u64>,
    pub half: Vec<u64>,
}

pub fn limit_element(sel: &CyclicFieldSelector, p: u64, n: u32, c: u64) -> Result<LimitElement> {
    if sel.is_imaginary() {
        return Err(Error::Domain("limit elements are defined for real fields".into()));
    }
    Ok(LimitElement {
        modulus: p.pow(n),
        level_conductor: level_conductor(sel.f, p, n),
        c,
        full: limit_sum(&sel.psi, p, n, c, Range::Full)?,
        half: limit_sum(&sel.psi, p, n, c, Range::Half)?,
    })
}

#[derive(Clone, Debug)]
pub struct TorsionPhi {
    pub seed: u64,
    pub factor: usize,
    /// `𝔭`-valuation of `ψ(A_{K,n}(c))`.
    pub raw: Valuation,
    /// The torsion exponent `m_φ`.
    pub value: u64,
}

#[derive(Clone, Debug)]
pub struct TorsionReport {
    pub p: u64,
    pub n: u32,
    pub c: u64,
    pub n0: u32,
    pub wc: bool,
    pub residue_degree: u64,
    pub per_phi: Vec<TorsionPhi>,
}

impl TorsionReport {
    /// `val_p(#T_χ)`
    pub fn total(&self) -> u64 {
        self.per_phi.iter().map(|t| t.value).sum::<u64>() * self.residue_degree
    }

    /// At `p = 2`, the total when the factor `½` is counted once for the whole product
    /// instead of once per `ψ`.
    pub fn total_half_once(&self, g: u64) -> Option<u64> {
        (self.p == 2).then(|| (self.total() + g).saturating_sub(1))
    }

    pub fn values(&self) -> Vec<u64> {
        self.per_phi.iter().map(|t| t.value).collect()
    }
}

/// `n_0` with `[K ∩ Q^c : Q] = p^{n_0}`.
pub fn cyclotomic_depth(psi: &ResidueCharacter, p: u64) -> u32 {
    let g = psi.order;
    let mut best = 0;
    let mut i = 1;
    while g % p.pow(i) == 0 {
        let sub = psi.pow(g / p.pow(i));
        if is_power_of(sub.conductor, p) {
            best = i;
        }
        i += 1;
    }
    best
}

fn auxiliary_candidates(fp_odd: bool, p: u64, f: u64) -> impl Iterator<Item = u64> {
    let first = fp_odd.then_some(2);
    first
        .into_iter()
        .chain((3..).step_by(2).filter(move |&c| gcd(c, 2 * p * f) == 1))
}

fn choose_c(psi: &ResidueCharacter, p: u64, ctx: &PadicCyclotomicContext, orbits: &[usize]) -> Result<u64> {
    let f = psi.modulus();
    let fn_odd = p != 2 && f % 2 == 1;
    let g = psi.order;
    let unit_possible = !is_power_of(g, p);
    for c in auxiliary_candidates(fn_odd, p, f).take(500) {
        let kc = psi.value(c % f).unwrap();
        if kc == 0 {
            continue;
        }
        let one_minus = one_minus_power(kc, g);
        let ok = orbits
            .iter()
            .all(|&i| !unit_possible || ctx.valuation_int(&one_minus, i) == Valuation::Exact(0));
        if ok {
            return Ok(c);
        }
    }
    Err(Error::SearchBound { bound: 500, what: "auxiliary c with 1 - ψ(c) ≠ 0".into() })
}

fn one_minus_power(k: u64, g: u64) -> IntPoly {
    let mut c = vec![BigInt::zero(); (k % g) as usize + 1];
    c[0] += 1;
    c[(k % g) as usize] -= 1;
    IntPoly::new(c)
}

fn torsion_at(
    chi: &RationalCharacter,
    psi: &ResidueCharacter,
    p: u64,
    n: u32,
    c: u64,
    n0: u32,
    wc: bool,
) -> Result<TorsionReport> {
    let g = chi.order;
    let ctx = PadicCyclotomicContext::new(g, p, n)?;
    let sum = limit_sum(psi, p, n, c, Range::Full)?;
    let elem = IntPoly::new(sum.iter().map(|&x| BigInt::from(x)).collect());
    let kc = psi.value(c % psi.modulus()).unwrap();
    let one_minus = one_minus_power(kc, g);
    let e = ctx.ramification;
    let v2 = if p == 2 { e } else { 0 };
    let mut per_phi = Vec::new();
    for phi in padic_orbits(chi, p) {
        let factor = ctx.factor_for_exponent(phi.seed());
        let raw = ctx.valuation_int(&elem, factor);
        let vc = ctx.valuation_int(&one_minus, factor).value();
        let adj = raw.value() as i64 - vc as i64 - v2 as i64 + i64::from(wc);
        if adj < 0 {
            return Err(Error::Verification(format!("negative torsion exponent {adj} at φ seed {}", phi.seed())));
        }
        per_phi.push(TorsionPhi { seed: phi.seed(), factor, raw, value: adj as u64 });
    }
    Ok(TorsionReport { p, n, c, n0, wc, residue_degree: ctx.residue_degree, per_phi })
}

/// `m_φ(T)` for each `φ | χ`. With `n = None` the level is raised until the valuations
/// are clear of the precision cap and stable under `n ↦ n + 2`.
pub fn torsion_valuations(
    chi: &RationalCharacter,
    p: u64,
    n: Option<u32>,
    c: Option<u64>,
) -> Result<TorsionReport> {
    torsion_valuations_with(chi, &chi.representative, p, n, c)
}

/// As [`torsion_valuations`], with an explicit representative `ψ | χ` fixing the `φ` labels.
pub fn torsion_valuations_with(
    chi: &RationalCharacter,
    psi: &ResidueCharacter,
    p: u64,
    n: Option<u32>,
    c: Option<u64>,
) -> Result<TorsionReport> {
    if chi.odd || chi.order == 1 {
        return Err(Error::Domain("torsion needs an even nontrivial character".into()));
    }
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let psi = psi.primitive();
    let g = chi.order;
    let n0 = cyclotomic_depth(&psi, p);
    let wc = is_power_of(chi.conductor, p) && is_power_of(g, p);
    let c = match c {
        Some(c) => {
            if gcd(c, level_conductor(psi.modulus(), p, 1)) != 1 || psi.value(c % psi.modulus()) == Some(0) {
                return Err(Error::Domain(format!("auxiliary c = {c} is not admissible")));
            }
            c
        }
        None => {
            let ctx = PadicCyclotomicContext::new(g, p, 2)?;
            let idx: Vec<usize> = padic_orbits(chi, p).iter().map(|phi| ctx.factor_for_exponent(phi.seed())).collect();
            choose_c(&psi, p, &ctx, &idx)?
        }
    };
    if let Some(n) = n {
        return torsion_at(chi, &psi, p, n, c, n0, wc);
    }
    let e = PadicCyclotomicContext::new(g, p, 1)?.ramification;
    let cap = 40u32;
    let mut level = n0 + 2;
    loop {
        if level > cap || level_conductor(psi.modulus(), p, level + 2) / psi.modulus() > 400_000_000 {
            return Err(Error::PrecisionCap { level });
        }
        let r = torsion_at(chi, &psi, p, level, c, n0, wc)?;
        let limit = (level - n0) as u64 * e;
        if r.per_phi.iter().all(|t| t.raw.is_exact() && t.raw.value() < limit) {
            let r2 = torsion_at(chi, &psi, p, level + 2, c, n0, wc)?;
            if r2.values() == r.values() {
                return Ok(r);
            }
        }
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::rational_orbits;

    #[test]
    fn q_mu5() {
        let sel = CyclicFieldSelector::cyclotomic(5).unwrap();
        assert_eq!(sel.generator, 2);
        let b = stickelberger_element(&sel).unwrap();
        let by_a: Vec<BigRational> = (1..5).map(|a| b.coefficient_at(a)).collect();
        assert_eq!(by_a, vec![q(3, 10), q(1, 10), q(-1, 10), q(-3, 10)]);
        let t = twist_c(&b, 3).unwrap();
        let by_a: Vec<BigRational> = (1..5).map(|a| t.element.coeffs[sel.inverse_index(a) as usize].clone()).collect();
        assert_eq!(by_a, vec![q(0, 1), q(1, 1), q(-1, 1), q(0, 1)]);
        assert_eq!(lambda_k(&sel), 5);
        assert!(twist_c(&b, 1).unwrap().element.is_zero());
    }

    #[test]
    fn real_quadratic_five() {
        let chi = rational_orbits(5).into_iter().find(|c| c.order == 2).unwrap();
        let sel = CyclicFieldSelector::from_rational(&chi).unwrap();
        let b = stickelberger_element(&sel).unwrap();
        assert!(b.element.coeffs[0].is_zero());
        assert_eq!(lambda_k(&sel), 1);
    }

    #[test]
    fn fast_sum_matches_naive() {
        for (f, g, p, n, c) in [(7u64, 3u64, 7u64, 2u32, 2u64), (13, 3, 13, 1, 2), (8, 2, 3, 2, 5), (9, 3, 7, 2, 2), (63, 3, 7, 2, 2), (21, 6, 7, 1, 5)] {
            for chi in rational_orbits(f).into_iter().filter(|x| x.order == g && x.conductor == f && !x.odd) {
                for range in [Range::Full, Range::Half] {
                    let a = limit_sum(&chi.representative, p, n, c, range).unwrap();
                    let b = limit_sum_naive(&chi.representative, p, n, c, range).unwrap();
                    assert_eq!(a, b, "f={f} p={p} n={n} c={c} {range:?}");
                }
            }
        }
    }

    #[test]
    fn norm_descent_identities() {
        for (f, m) in [(15, 5), (21, 7), (30, 15)] {
            let (l, r) = norm_descent(f, m).unwrap();
            assert_eq!(l, r, "({f}, {m})");
        }
    }
}



#[cfg(test)]
mod annihilator_tests {
    use super::*;
    use crate::characters::rational_orbits;

    #[test]
    fn classifications() {
        let chi = rational_orbits(47).into_iter().find(|c| c.order == 46).unwrap();
        let r = annihilator_minus(&chi, 139).unwrap();
        assert!(r.iter().all(|x| x.smoothing == SmoothingIdeal::Unit && x.lambda == 47));
        assert_eq!(r.iter().map(|x| x.bernoulli_valuation).sum::<i64>(), 1);
        let chi = rational_orbits(4).into_iter().find(|c| c.order == 2).unwrap();
        let r = annihilator_minus(&chi, 2).unwrap();
        assert_eq!(r[0].smoothing, SmoothingIdeal::Four);
        for p in [3u64, 5, 7] {
            for chi in rational_orbits(p).into_iter().filter(|c| c.odd) {
                let r = annihilator_minus(&chi, p).unwrap();
                assert!(r.iter().all(|x| x.bernoulli_valuation + x.smoothing_valuation as i64 >= 0));
            }
        }
    }
}
