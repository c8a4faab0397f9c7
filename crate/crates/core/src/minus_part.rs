//! Generalized Bernoulli numbers and relative class numbers of cyclic fields.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{gcd, is_power_of, is_prime, pow_mod, prime_power_base, euler_phi};
use crate::characters::{padic_orbits, PadicCharacter, RationalCharacter, ResidueCharacter};
use crate::cyclo_ring::{CyclotomicElement, PadicCyclotomicContext, Valuation};
use crate::error::{Error, Result};

/// `B_1(ψ^{-1}) = (1/f) Σ_{0<a<f, (a,f)=1} ψ^{-1}(a)·a` in `Q(μ_g)`.
pub fn bernoulli_b1(psi: &ResidueCharacter) -> CyclotomicElement {
    let psi = psi.primitive();
    let f = psi.modulus();
    let g = psi.order.max(1);
    let terms: Vec<(u64, BigInt)> = (1..f.max(2))
        .filter(|&a| gcd(a, f) == 1)
        .map(|a| {
            let k = psi.value(a).expect("unit");
            ((g - k) % g, BigInt::from(a))
        })
        .collect();
    CyclotomicElement::from_terms(g, &terms, BigInt::from(f))
}

/// `-½·B_1(ψ^{-1})`
pub fn half_bernoulli(psi: &ResidueCharacter) -> CyclotomicElement {
    bernoulli_b1(psi).scale(&BigRational::new((-1).into(), 2.into()))
}

/// `K_χ = Q(μ_{p^n})`; returns `p`.
pub fn cyclotomic_prime(chi: &RationalCharacter) -> Option<u64> {
    let f = chi.conductor;
    if f == 4 && chi.order == 2 {
        return Some(2);
    }
    let p = prime_power_base(f)?;
    (p != 2 && chi.order == euler_phi(f)).then_some(p)
}

#[derive(Clone, Debug)]
pub struct PhiMinus {
    pub seed: u64,
    pub degree: u64,
    pub factor: usize,
    /// `val_p` of the product of `-½B_1(ψ^{-1})` over `ψ | φ`, before the exceptional cases.
    pub raw: i64,
    /// The invariant after the exceptional cases.
    pub value: i64,
    /// The same invariant as an exponent of the prime `𝔭` above `p`.
    pub p_exponent: i64,
    pub teichmuller_lambda: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct MinusClassReport {
    pub chi: RationalCharacter,
    pub alpha: u32,
    pub w: u64,
    pub product: BigRational,
    pub class_number: BigInt,
    pub p: Option<u64>,
    pub per_phi: Vec<PhiMinus>,
}

impl MinusClassReport {
    pub fn phi_total(&self) -> i64 {
        self.per_phi.iter().map(|m| m.value).sum()
    }

    /// Total including `α_χ`, meaningful when `p = 2` and `g_χ` is a 2-power.
    pub fn phi_total_alpha(&self) -> i64 {
        self.phi_total() + if self.p == Some(2) { self.alpha as i64 } else { 0 }
    }
}

fn require_odd(chi: &RationalCharacter) -> Result<()> {
    if chi.order == 1 || !chi.odd {
        return Err(Error::Domain(format!(
            "character of order {} and conductor {} is not odd and nontrivial",
            chi.order, chi.conductor
        )));
    }
    Ok(())
}

fn rational_valuation(x: &BigRational, p: u64) -> i64 {
    let pb = BigInt::from(p);
    let v = |mut n: BigInt| {
        let mut k = 0i64;
        while !n.is_zero() && (&n % &pb).is_zero() {
            n /= &pb;
            k += 1;
        }
        k
    };
    v(x.numer().abs()) - v(x.denom().abs())
}

pub fn minus_class_number(chi: &RationalCharacter, p: Option<u64>) -> Result<MinusClassReport> {
    require_odd(chi)?;
    let psi = chi.representative.primitive();
    let x = half_bernoulli(&psi);
    let product = x.norm();
    let alpha = u32::from(is_power_of(chi.order, 2));
    let w = cyclotomic_prime(chi).unwrap_or(1);
    let h = &product * BigRational::from_integer(BigInt::from((1u64 << alpha) * w));
    if !h.is_integer() || !h.is_positive() {
        return Err(Error::Verification(format!(
            "relative class number {h} for conductor {} order {} is not a positive integer",
            chi.conductor, chi.order
        )));
    }
    let per_phi = match p {
        Some(p) => phi_minus(chi, &psi, &x, p)?,
        None => Vec::new(),
    };
    Ok(MinusClassReport {
        chi: chi.clone(),
        alpha,
        w,
        product,
        class_number: h.to_integer(),
        p,
        per_phi,
    })
}

fn phi_minus(chi: &RationalCharacter, psi: &ResidueCharacter, x: &CyclotomicElement, p: u64) -> Result<Vec<PhiMinus>> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let g = chi.order;
    let norm = x.norm();
    let total = rational_valuation(&norm, p);
    let den = rational_valuation(&BigRational::from_integer(x.denominator().clone()), p);
    let n = ((total.max(0) + den.max(0) + 3) as u32).max(2);
    let ctx = PadicCyclotomicContext::new(g, p, n)?;
    let d = ctx.residue_degree as i64;
    let e = ctx.ramification as i64;
    let cyc = cyclotomic_prime(chi);
    let mut out = Vec::new();
    for phi in padic_orbits(chi, p) {
        let factor = ctx.factor_for_exponent(phi.seed());
        let v_num = ctx.valuation_int(&x.numerator(), factor);
        let v = match v_num {
            Valuation::Exact(v) => v as i64 - e * den,
            Valuation::AtLeast(_) => {
                return Err(Error::PrecisionCap { level: n });
            }
        };
        let raw = d * v;
        let mut value = raw;
        let mut lambda = None;
        if cyc == Some(p) {
            if p == 2 {
                value = 0;
            } else {
                let l = teichmuller_lambda(psi, &phi, &ctx);
                if l == 1 {
                    value = 0;
                }
                lambda = Some(l);
            }
        }
        out.push(PhiMinus {
            seed: phi.seed(),
            degree: phi.degree,
            factor,
            raw,
            value,
            p_exponent: if d == 0 { 0 } else { value / d },
            teichmuller_lambda: lambda,
        });
    }
    Ok(out)
}

/// `λ mod (p-1)` with `ψ^a = ω^λ·ψ_p` for the seed `a` of `φ`, `ψ` of conductor `p^n`.
fn teichmuller_lambda(psi: &ResidueCharacter, phi: &PadicCharacter, ctx: &PadicCyclotomicContext) -> u64 {
    let p = ctx.p;
    let gamma = psi.group.generators[0];
    let f = psi.modulus();
    let t = pow_mod(gamma, f / p, f);
    let k = psi.value(t).expect("unit") * phi.seed() % psi.order;
    let q0 = &ctx.residue_factors[0];
    let r0 = (p - q0.coeff(0)) % p;
    let target = pow_mod(r0, k, p);
    let gp = gamma % p;
    (0..p - 1)
        .find(|&l| pow_mod(gp, l, p) == target)
        .expect("γ generates (Z/p)^×")
}

/// `m^an_φ(H^-)` for each `φ | χ` above `p`.
pub fn m_an_minus(chi: &RationalCharacter, p: u64) -> Result<Vec<PhiMinus>> {
    Ok(minus_class_number(chi, Some(p))?.per_phi)
}

/// Odd rational characters of conductor exactly `f`.
pub fn odd_characters_of_conductor(f: u64) -> Vec<RationalCharacter> {
    crate::characters::rational_orbits(f)
        .into_iter()
        .filter(|c| c.odd && c.conductor == f && c.order > 1)
        .collect()
}

/// `h^-` of `Q(μ_f)`'s subfield lattice: product over all odd `χ` with `f_χ | f`.
pub fn minus_class_number_of_cyclotomic(f: u64) -> Result<BigInt> {
    let mut h = BigInt::one();
    for chi in crate::characters::rational_orbits(f) {
        if chi.odd && chi.order > 1 {
            h *= minus_class_number(&chi, None)?.class_number;
        }
    }
    Ok(h)
}
