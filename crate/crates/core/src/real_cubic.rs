//! Cyclic cubic fields: conductors and defining polynomials, Galois data,
//! cyclotomic-unit logarithms, the annihilator `α + βσ` of units modulo
//! cyclotomic units, and the φ-structure of ingested class groups.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, inv_mod, is_prime, isqrt, mul_mod, valuation};
use crate::characters::{characters_of_order_dividing, RationalCharacter, ResidueCharacter};
use crate::cyclo_ring::{cube_roots_of_unity, eisenstein_valuations, EisensteinInt};
use crate::error::{Error, Result};
use crate::poly::{IntPoly, ZnPoly};

/// Default working precision in decimal digits, and the escalation ladder.
pub const DEFAULT_DIGITS: u32 = 60;
pub const PRECISION_LADDER: [u32; 3] = [60, 100, 150];

pub const ROUNDING_TOL: f64 = 1e-6;
pub const INDEX_TOL: f64 = 1e-10;
pub const REGULATOR_TOL: f64 = 1e-20;
const FROBENIUS_BOUND: u64 = 200_000;

fn bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32
}

fn big_to_float(x: &BigInt, prec: u32) -> Float {
    let i: rug::Integer = x.to_string().parse().expect("decimal integer");
    Float::with_val(prec, i)
}

fn float_to_big(x: &Float) -> Option<BigInt> {
    x.to_integer().map(|i| i.to_string().parse().expect("decimal integer"))
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `x³ + c₂x² + c₁x + c₀` with `4f = a² + 27b²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicFieldRecord {
    pub f: u64,
    pub a: i64,
    pub b: i64,
    /// Coefficients `c₀, c₁, c₂, c₃`.
    pub poly: [BigInt; 4],
}

impl CubicFieldRecord {
    pub fn int_poly(&self) -> IntPoly {
        IntPoly::new(self.poly.to_vec())
    }

    pub fn discriminant(&self) -> BigInt {
        let [c0, c1, c2, _] = &self.poly;
        let n = |x: i64| BigInt::from(x);
        n(18) * c2 * c1 * c0 - n(4) * c2.pow(3) * c0 + c2.pow(2) * c1.pow(2) - n(4) * c1.pow(3) - n(27) * c0.pow(2)
    }
}

impl fmt::Display for CubicFieldRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.int_poly())
    }
}

/// Conductors of cyclic cubic fields: `3^h·F` with `h ∈ {0, 2}`, `F` squarefree with every
/// prime `≡ 1 (mod 3)`.
pub fn is_cubic_conductor(f: u64) -> bool {
    if f < 7 {
        return false;
    }
    let h = valuation(f, 3);
    if h != 0 && h != 2 {
        return false;
    }
    factorize(f / 3u64.pow(h)).iter().all(|&(q, e)| e == 1 && q % 3 == 1)
}

/// Every `(a, b)` solution for `f`, normalized like the reference enumeration.
pub fn cubic_fields_of_conductor(f: u64) -> Vec<CubicFieldRecord> {
    if !is_cubic_conductor(f) {
        return Vec::new();
    }
    let hf = valuation(f, 3);
    let fb = BigInt::from(f);
    let mut out = Vec::new();
    let mut b = 1u64;
    while 27 * b * b <= 4 * f {
        if !(hf == 2 && b % 3 == 0) {
            let big_a = 4 * f - 27 * b * b;
            let r = isqrt(big_a);
            if r * r == big_a {
                let mut a = r as i64;
                let poly = if hf == 0 {
                    if a.rem_euclid(3) == 1 {
                        a = -a;
                    }
                    let c0 = (&fb * BigInt::from(a - 3) + 1i32) / 27i32;
                    let c1 = (BigInt::one() - &fb) / 3i32;
                    [c0, c1, BigInt::one(), BigInt::one()]
                } else {
                    if a.rem_euclid(9) == 3 {
                        a = -a;
                    }
                    let c0 = -(&fb * BigInt::from(a)) / 27i32;
                    let c1 = -(&fb / 3i32);
                    [c0, c1, BigInt::zero(), BigInt::one()]
                };
                out.push(CubicFieldRecord { f, a, b: b as i64, poly });
            }
        }
        b += 1;
    }
    out
}

pub fn enumerate_cubic_conductors(lo: u64, hi: u64) -> Vec<CubicFieldRecord> {
    (lo.max(1)..=hi).flat_map(cubic_fields_of_conductor).collect()
}

/// Elements of `Q[x]/(P)` on the basis `1, x, x²`.
type Elt = [BigRational; 3];

fn elt_mul(x: &Elt, y: &Elt, modulus: &[BigInt; 4]) -> Elt {
    let mut prod = vec![BigRational::zero(); 5];
    for i in 0..3 {
        for j in 0..3 {
            prod[i + j] += &x[i] * &y[j];
        }
    }
    // x³ = -(c₂x² + c₁x + c₀)
    for k in (3..5).rev() {
        let t = prod[k].clone();
        if t.is_zero() {
            continue;
        }
        for i in 0..3 {
            prod[k - 3 + i] -= &t * BigRational::from_integer(modulus[i].clone());
        }
    }
    [prod[0].clone(), prod[1].clone(), prod[2].clone()]
}

fn elt_x(k: usize, modulus: &[BigInt; 4]) -> Elt {
    let mut e: Elt = [rat(1), rat(0), rat(0)];
    let x: Elt = [rat(0), rat(1), rat(0)];
    for _ in 0..k {
        e = elt_mul(&e, &x, modulus);
    }
    e
}

/// `g(y)` for `g` a quadratic with rational coefficients and `y ∈ Q[x]/(P)`.
fn elt_compose(g: &Elt, y: &Elt, modulus: &[BigInt; 4]) -> Elt {
    let y2 = elt_mul(y, y, modulus);
    [0, 1, 2].map(|i| &g[0] * if i == 0 { rat(1) } else { rat(0) } + &g[1] * &y[i] + &g[2] * &y2[i])
}

/// `N(y) = det(multiplication by y)`.
pub fn elt_norm(y: &Elt, modulus: &[BigInt; 4]) -> BigRational {
    let cols: Vec<Elt> = (0..3).map(|k| elt_mul(y, &elt_x(k, modulus), modulus)).collect();
    let m = |i: usize, j: usize| &cols[j][i];
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

fn count_roots_mod(poly: &IntPoly, q: u64) -> usize {
    let pq = poly.reduce_mod(q);
    let xq = ZnPoly::x(q).pow_mod_poly(q as u128, &pq);
    let g = xq.sub(&ZnPoly::x(q)).gcd(&pq);
    g.degree().unwrap_or(0)
}

/// Roots of a monic cubic with three real roots, ascending.
fn real_roots(rec: &CubicFieldRecord, prec: u32) -> Result<[Float; 3]> {
    let c: Vec<f64> = rec.poly.iter().map(|x| x.to_f64().unwrap()).collect();
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2.powi(3) / 27.0 - c2 * c1 / 3.0 + c0;
    if p >= 0.0 {
        return Err(Error::Domain(format!("{rec} does not have three real roots")));
    }
    let r = 2.0 * (-p / 3.0).sqrt();
    let arg = ((3.0 * q / (p * r)).clamp(-1.0, 1.0)).acos() / 3.0;
    let mut seeds: Vec<f64> = (0..3)
        .map(|k| r * (arg - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - c2 / 3.0)
        .collect();
    seeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let coeffs: Vec<Float> = rec.poly.iter().map(|x| big_to_float(x, prec)).collect();
    let eval = |x: &Float| -> (Float, Float) {
        let mut v = coeffs[3].clone();
        let mut d = Float::with_val(prec, 0);
        for k in (0..3).rev() {
            d = d * x + &v;
            v = v * x + &coeffs[k];
        }
        (v, d)
    };
    let mut out = Vec::with_capacity(3);
    for s in seeds {
        let mut x = Float::with_val(prec, s);
        let mut iters = 0;
        loop {
            let (v, d) = eval(&x);
            let step = Float::with_val(prec, &v / &d);
            x -= &step;
            iters += 1;
            let small = step.is_zero() || step.clone().abs() < Float::with_val(prec, x.clone().abs() + 1u32) >> (prec as i32 - 8);
            if small || iters > 200 {
                break;
            }
        }
        out.push(x);
    }
    if out[0] >= out[1] || out[1] >= out[2] {
        return Err(Error::RealPrecision { digits: prec, reason: "roots collided".into() });
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

/// `g` with `g(ρ) = ρ^σ`, recovered numerically and verified exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisMap {
    pub coeffs: [BigRational; 3],
}

impl GaloisMap {
    pub fn compose(&self, other: &GaloisMap, modulus: &[BigInt; 4]) -> GaloisMap {
        let y = other.coeffs.clone();
        GaloisMap { coeffs: elt_compose(&self.coeffs, &y, modulus) }
    }
}

impl fmt::Display for GaloisMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "x".into(),
                _ => "x^2".into(),
            };
            let body = if mono.is_empty() {
                c.abs().to_string()
            } else if c.abs().is_one() {
                mono
            } else {
                format!("{}*{mono}", c.abs())
            };
            let sign = if c.is_negative() { "-" } else { "+" };
            terms.push((sign, body));
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, b)) in terms.iter().enumerate() {
            match (i, *s) {
                (0, "-") => write!(f, "-{b}")?,
                (0, _) => write!(f, "{b}")?,
                (_, s) => write!(f, " {s} {b}")?,
            }
        }
        Ok(())
    }
}

/// Exact check `P(g(x)) ≡ 0` and `g∘g∘g ≡ x` modulo `P`.
pub fn verify_galois_map(rec: &CubicFieldRecord, g: &GaloisMap) -> bool {
    let m = &rec.poly;
    let g2 = g.compose(g, m);
    let g3 = g.compose(&g2, m);
    let x: Elt = [rat(0), rat(1), rat(0)];
    let y = &g.coeffs;
    let y2 = elt_mul(y, y, m);
    let y3 = elt_mul(&y2, y, m);
    let p_of_g: Vec<BigRational> = (0..3)
        .map(|i| {
            let c = |k: usize| BigRational::from_integer(m[k].clone());
            let one = if i == 0 { c(0) } else { rat(0) };
            &y3[i] + c(2) * &y2[i] + c(1) * &y[i] + one
        })
        .collect();
    p_of_g.iter().all(|c| c.is_zero()) && g3.coeffs == x && g.coeffs != x
}

/// The Galois map sending `ρ_i ↦ ρ_{perm[i]}` on the ascending roots.
fn interpolate_galois(rec: &CubicFieldRecord, roots: &[Float; 3], perm: [usize; 3], digits: u32) -> Result<GaloisMap> {
    let prec = roots[0].prec();
    let disc = rec.discriminant();
    let d = disc.sqrt();
    if &d * &d != disc || d.is_zero() {
        return Err(Error::Domain(format!("{rec} is not cyclic: discriminant {disc} is not a nonzero square")));
    }
    let mut c = [Float::with_val(prec, 0), Float::with_val(prec, 0), Float::with_val(prec, 0)];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let den = Float::with_val(prec, &roots[i] - &roots[j]) * Float::with_val(prec, &roots[i] - &roots[k]);
        let w = Float::with_val(prec, &roots[perm[i]] / &den);
        c[2] += &w;
        c[1] -= Float::with_val(prec, &roots[j] + &roots[k]) * &w;
        c[0] += Float::with_val(prec, &roots[j] * &roots[k]) * &w;
    }
    let df = big_to_float(&d, prec);
    let tol = Float::with_val(prec, 10).pow(-(digits as i32) / 3);
    let mut coeffs = [rat(0), rat(0), rat(0)];
    for (k, ck) in c.iter().enumerate() {
        let scaled = Float::with_val(prec, ck * &df);
        let n = scaled.clone().round();
        if Float::with_val(prec, &scaled - &n).abs() > tol {
            return Err(Error::RealPrecision { digits, reason: "Galois map coefficients not recognized".into() });
        }
        coeffs[k] = BigRational::new(float_to_big(&n).unwrap(), d.clone());
    }
    let g = GaloisMap { coeffs };
    if !verify_galois_map(rec, &g) {
        return Err(Error::RealPrecision { digits, reason: "recognized Galois map fails exact verification".into() });
    }
    Ok(g)
}

/// `ρ₁ ↦ ρ₃` on the ascending roots; the other generator is its square.
pub fn recover_galois_map(rec: &CubicFieldRecord, digits: u32) -> Result<GaloisMap> {
    let roots = real_roots(rec, bits(digits))?;
    interpolate_galois(rec, &roots, [2, 0, 1], digits)
}

/// Smallest prime `q ∤ f` inert in the field, and the residue labeling `σ` (`q` or `q² mod f`).
pub fn frobenius_exponent(rec: &CubicFieldRecord, g: &GaloisMap) -> Result<(u64, u64)> {
    let p = rec.int_poly();
    let q = (2..FROBENIUS_BOUND)
        .filter(|&q| is_prime(q) && rec.f % q != 0)
        .find(|&q| count_roots_mod(&p, q) == 0)
        .ok_or_else(|| Error::SearchBound { bound: FROBENIUS_BOUND, what: "inert prime".into() })?;
    // x^q - g(x) in Q[x]/(P)
    let mut xq: Elt = [rat(1), rat(0), rat(0)];
    let mut base: Elt = [rat(0), rat(1), rat(0)];
    let mut e = q;
    while e > 0 {
        if e & 1 == 1 {
            xq = elt_mul(&xq, &base, &rec.poly);
        }
        base = elt_mul(&base, &base, &rec.poly);
        e >>= 1;
    }
    let diff: Elt = [0, 1, 2].map(|i| &xq[i] - &g.coeffs[i]);
    let n = elt_norm(&diff, &rec.poly);
    let qb = BigInt::from(q);
    let divisible = !n.is_zero() && n.numer().is_multiple_of(&qb) || n.is_zero();
    let label = if divisible { q % rec.f } else { mul_mod(q, q, rec.f) };
    Ok((q, label))
}

/// The cubic character cutting out the field, normalized so that `ψ(σ) = ζ₃`.
pub fn field_character(rec: &CubicFieldRecord, sigma: u64) -> Result<ResidueCharacter> {
    let f = rec.f;
    let mut cands: Vec<ResidueCharacter> = characters_of_order_dividing(f, 3)
        .into_iter()
        .filter(|c| c.order == 3 && c.conductor == f)
        .collect();
    let p = rec.int_poly();
    let same_field = |c: &[ResidueCharacter]| {
        c.iter().all(|x| x.exponents == c[0].exponents || x.exponents == c[0].inverse().exponents)
    };
    let mut q = 2u64;
    while !cands.is_empty() && !same_field(&cands) {
        if q > FROBENIUS_BOUND {
            return Err(Error::SearchBound { bound: FROBENIUS_BOUND, what: "splitting prime".into() });
        }
        if is_prime(q) && f % q != 0 {
            let roots = count_roots_mod(&p, q);
            if roots == 3 || roots == 0 {
                cands.retain(|c| (c.value(q % f) == Some(0)) == (roots == 3));
            }
        }
        q += 1;
    }
    let psi = cands.into_iter().next().ok_or_else(|| Error::Verification(format!("no cubic character matches {rec}")))?;
    match psi.value(sigma % f) {
        Some(1) => Ok(psi),
        Some(2) => Ok(psi.inverse()),
        _ => Err(Error::Verification(format!("σ label {sigma} lies in the kernel of the field character"))),
    }
}

/// `η₀ = Σ_{ψ(a) = 1} cos(2πa/f)`.
pub fn gauss_period(psi: &ResidueCharacter) -> f64 {
    let f = psi.modulus();
    let w = 2.0 * std::f64::consts::PI / f as f64;
    (1..f).filter(|&a| psi.value(a) == Some(0)).map(|a| (w * a as f64).cos()).sum()
}

/// Galois data of a field at a given working precision.
#[derive(Clone, Debug)]
pub struct CubicField {
    pub record: CubicFieldRecord,
    pub digits: u32,
    pub roots: [Float; 3],
    pub galois_map: GaloisMap,
    /// Root matching the embedding `ζ_f ↦ e^{2πi/f}`, when found among `±η₀`.
    pub base_root: usize,
    pub base_is_period: bool,
    /// Index `i` with `ρ_base^σ = ρ_i`.
    pub image_of_base: usize,
    pub inert_prime: u64,
    pub sigma: u64,
    pub psi: ResidueCharacter,
}

impl CubicField {
    /// With `sigma = Some(s)` the generator is the one whose residue label is `s`.
    pub fn new(record: CubicFieldRecord, digits: u32, sigma: Option<u64>) -> Result<Self> {
        let roots = real_roots(&record, bits(digits))?;
        let mut chosen = None;
        for perm in [[2usize, 0, 1], [1, 2, 0]] {
            let g = interpolate_galois(&record, &roots, perm, digits)?;
            let (q, label) = frobenius_exponent(&record, &g)?;
            if sigma.map_or(true, |s| s % record.f == label) {
                chosen = Some((g, perm, q, label));
                break;
            }
        }
        let (galois_map, perm, inert_prime, sigma) = chosen.ok_or_else(|| {
            Error::FixtureIntegrity(format!("σ label {} matches neither generator of Gal for f = {}", sigma.unwrap(), record.f))
        })?;
        let psi = field_character(&record, sigma)?;
        let period = gauss_period(&psi);
        let found = roots.iter().position(|r| {
            let x = r.to_f64();
            (x - period).abs() < 1e-6 * (1.0 + x.abs())
        });
        let base_root = found.unwrap_or(0);
        Ok(CubicField {
            record,
            digits,
            galois_map,
            base_root,
            base_is_period: found.is_some(),
            image_of_base: perm[base_root],
            roots,
            inert_prime,
            sigma,
            psi,
        })
    }

    pub fn is_prime_conductor(&self) -> bool {
        is_prime(self.record.f)
    }

    pub fn rational_character(&self) -> RationalCharacter {
        RationalCharacter::from_representative(self.psi.clone())
    }
}

/// `log|C|` and `log|C^σ|` for the half-system cyclotomic unit.
#[derive(Clone, Debug)]
pub struct CyclotomicLogs {
    pub l1: Float,
    pub l2: Float,
}

pub fn cyclotomic_unit_logs(field: &CubicField) -> Result<CyclotomicLogs> {
    let f = field.record.f;
    let prec = bits(field.digits) + 2 * (64 - f.leading_zeros());
    let half = (f - 1) / 2;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let step = Float::with_val(prec, &pi / f);
    let (s1, c1) = step.clone().sin_cos(Float::new(prec));
    let mut prod = [Float::with_val(prec, 1), Float::with_val(prec, 1)];
    let mut count = [0u64; 2];
    const CHUNK: u64 = 2048;
    let mut a0 = 1u64;
    let mut t1 = Float::new(prec);
    let mut t2 = Float::new(prec);
    while a0 <= half {
        let angle = Float::with_val(prec, &step * a0);
        let (mut s, mut c) = angle.sin_cos(Float::new(prec));
        let end = (a0 + CHUNK).min(half + 1);
        for a in a0..end {
            if let Some(k) = field.psi.value(a) {
                if k < 2 {
                    prod[k as usize] *= &s;
                    count[k as usize] += 1;
                }
            }
            // (c, s) ← rotation by π/f
            t1.assign_mul(&c, &c1, &s, &s1, true);
            t2.assign_mul(&s, &c1, &c, &s1, false);
            std::mem::swap(&mut c, &mut t1);
            std::mem::swap(&mut s, &mut t2);
        }
        a0 = end;
    }
    let ln2 = Float::with_val(prec, rug::float::Constant::Log2);
    let mut logs = [0, 1].map(|k| Float::with_val(prec, prod[k].ln_ref()) + Float::with_val(prec, &ln2 * count[k]));
    if field.is_prime_conductor() {
        let lf = Float::with_val(prec, f).ln() / 2u32;
        for l in logs.iter_mut() {
            *l *= 3u32;
            *l -= &lf;
        }
    }
    let [l1, l2] = logs;
    Ok(CyclotomicLogs { l1, l2 })
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float, c: &Float, d: &Float, minus: bool);
}

impl AssignMul for Float {
    /// `self = a·b ∓ c·d`
    fn assign_mul(&mut self, a: &Float, b: &Float, c: &Float, d: &Float, minus: bool) {
        use rug::Assign;
        let prec = self.prec();
        let cd = Float::with_val(prec, c * d);
        self.assign(a * b);
        if minus {
            *self -= &cd;
        } else {
            *self += &cd;
        }
    }
}

/// Minkowski unit `ε = (e₀ + e₁x + e₂x²)/den` with its regulator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitFixture {
    pub epsilon: [BigInt; 3],
    pub denominator: BigInt,
    pub regulator: Option<String>,
    pub precision: u32,
}

impl UnitFixture {
    pub fn element(&self) -> Elt {
        self.epsilon.clone().map(|e| BigRational::new(e, self.denominator.clone()))
    }

    /// `N(ε) = ±1`
    pub fn check_norm(&self, rec: &CubicFieldRecord) -> Result<()> {
        let n = elt_norm(&self.element(), &rec.poly);
        if n.abs().is_one() {
            Ok(())
        } else {
            Err(Error::FixtureIntegrity(format!("unit has norm {n}, not ±1")))
        }
    }

    /// `log|ε(ρ₁)|`, `log|ε(ρ₁^σ)|`
    pub fn logs(&self, field: &CubicField) -> (Float, Float) {
        let prec = field.roots[0].prec();
        let e = self.epsilon.clone().map(|x| big_to_float(&x, prec));
        let den = big_to_float(&self.denominator, prec);
        let at = |r: &Float| -> Float {
            let v = Float::with_val(prec, &e[2] * r) + &e[1];
            let v = v * r + &e[0];
            Float::with_val(prec, v / &den).abs().ln()
        };
        (at(&field.roots[field.base_root]), at(&field.roots[field.image_of_base]))
    }
}

/// `η = ε^{α + βσ}` together with the numerical evidence.
#[derive(Clone, Debug)]
pub struct AlphaBeta {
    pub digits: u32,
    pub alpha_real: Float,
    pub beta_real: Float,
    pub value: EisensteinInt,
    pub index_real: Float,
    pub index: BigInt,
    pub regulator: Float,
    pub regulator_quotient: Option<Float>,
}

fn round_gate(x: &Float, digits: u32, what: &str) -> Result<i64> {
    let prec = x.prec();
    let r = x.clone().round();
    let resid = Float::with_val(prec, x - &r).abs();
    if resid.to_f64() >= ROUNDING_TOL || !r.is_finite() {
        return Err(Error::RealPrecision { digits, reason: format!("{what} = {} is not within 1e-6 of an integer", x.to_f64()) });
    }
    r.to_f64().to_i64().ok_or_else(|| Error::RealPrecision { digits, reason: format!("{what} out of range") })
}

pub fn solve_alpha_beta(field: &CubicField, unit: &UnitFixture, logs: &CyclotomicLogs) -> Result<AlphaBeta> {
    let digits = field.digits;
    let prec = logs.l1.prec();
    let (e1, e2) = unit.logs(field);
    let (e1, e2) = (Float::with_val(prec, e1), Float::with_val(prec, e2));
    let reg = Float::with_val(prec, &e1 * &e1) + Float::with_val(prec, &e1 * &e2) + Float::with_val(prec, &e2 * &e2);
    let (l1, l2) = (&logs.l1, &logs.l2);
    let e12 = Float::with_val(prec, &e1 + &e2);
    let mut alpha = (Float::with_val(prec, &e12 * l1) + Float::with_val(prec, &e2 * l2)) / &reg;
    let mut beta = (Float::with_val(prec, &e2 * l1) - Float::with_val(prec, &e1 * l2)) / &reg;
    let regc = Float::with_val(prec, l1 * l1) + Float::with_val(prec, l1 * l2) + Float::with_val(prec, l2 * l2);
    let mut index_real = Float::with_val(prec, &regc / &reg);
    if field.is_prime_conductor() {
        let a0 = Float::with_val(prec, &alpha + &beta) / 3u32;
        let b0 = (Float::with_val(prec, &beta * 2u32) - &alpha) / 3u32;
        alpha = a0;
        beta = b0;
        index_real /= 3u32;
    }
    let a = round_gate(&alpha, digits, "alpha")?;
    let b = round_gate(&beta, digits, "beta")?;
    let value = EisensteinInt::new(a, b);
    if value.is_zero() {
        return Err(Error::RealPrecision { digits, reason: "alpha + beta*j rounds to zero".into() });
    }
    let index = float_to_big(&index_real.clone().round())
        .ok_or_else(|| Error::RealPrecision { digits, reason: "index is not finite".into() })?;
    let resid = Float::with_val(prec, &index_real - big_to_float(&index, prec)).abs();
    if resid.to_f64() >= INDEX_TOL {
        return Err(Error::RealPrecision { digits, reason: format!("index {} is not within 1e-10 of an integer", index_real.to_f64()) });
    }
    if index != BigInt::from(value.norm()) {
        return Err(Error::Verification(format!("index {index} differs from the norm {} of {value}", value.norm())));
    }
    let regulator_quotient = match &unit.regulator {
        Some(s) => {
            let supplied = Float::with_val(prec, Float::parse(s).map_err(|e| Error::FixtureParse(format!("regulator: {e}")))?);
            let qt = Float::with_val(prec, &reg / &supplied);
            let dev = Float::with_val(prec, &qt - 1u32).abs();
            let tol = if digits >= 30 { REGULATOR_TOL } else { 10f64.powi(-(digits as i32) + 8) };
            if dev.to_f64() >= tol {
                return Err(Error::FixtureIntegrity(format!("regulator quotient {} is not 1", qt.to_f64())));
            }
            Some(qt)
        }
        None => None,
    };
    Ok(AlphaBeta { digits, alpha_real: alpha, beta_real: beta, value, index_real, index, regulator: reg, regulator_quotient })
}

/// Precision levels tried and the outcome at the final one.
#[derive(Clone, Debug)]
pub struct UnitAnalysis {
    pub field: CubicField,
    pub logs: CyclotomicLogs,
    pub alpha_beta: AlphaBeta,
    pub rejected: Vec<(u32, String)>,
}

/// Runs the unit pipeline at `digits`, escalating along the ladder on precision failures.
pub fn analyze_units(rec: &CubicFieldRecord, sigma: Option<u64>, unit: &UnitFixture, digits: u32) -> Result<UnitAnalysis> {
    unit.check_norm(rec)?;
    let mut levels = vec![digits];
    levels.extend(PRECISION_LADDER.iter().copied().filter(|&d| d > digits));
    let mut rejected = Vec::new();
    for d in levels {
        let attempt = CubicField::new(rec.clone(), d, sigma).and_then(|field| {
            let logs = cyclotomic_unit_logs(&field)?;
            let ab = solve_alpha_beta(&field, unit, &logs)?;
            Ok((field, logs, ab))
        });
        match attempt {
            Ok((field, logs, alpha_beta)) => return Ok(UnitAnalysis { field, logs, alpha_beta, rejected }),
            Err(Error::RealPrecision { reason, .. }) => rejected.push((d, reason)),
            Err(e) => return Err(e),
        }
    }
    let (d, reason) = rejected.pop().unwrap();
    Err(Error::RealPrecision { digits: d, reason })
}

/// Exponents `n_i` with `M_𝔭 ≅ ⊕ Z_p[j]/𝔭^{n_i}`, for `𝔭₁` and `𝔭₂`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PhiDecomposition {
    pub p1: Vec<u32>,
    pub p2: Vec<u32>,
}

impl PhiDecomposition {
    pub fn totals(&self) -> (u32, u32) {
        (self.p1.iter().sum(), self.p2.iter().sum())
    }

    pub fn swapped(&self) -> Self {
        PhiDecomposition { p1: self.p2.clone(), p2: self.p1.clone() }
    }

    fn normalize(mut self) -> Self {
        for v in [&mut self.p1, &mut self.p2] {
            v.retain(|&x| x > 0);
            v.sort_unstable_by(|a, b| b.cmp(a));
        }
        self
    }
}

/// Index `N(α + βj)`, its `p`-part and the valuations at `𝔭₁`, `𝔭₂`.
pub fn unit_index_and_valuations(ab: EisensteinInt, p: u64) -> Result<(BigInt, u64, PhiDecomposition)> {
    if ab.is_zero() {
        return Err(Error::Domain("α + βj = 0 is degenerate".into()));
    }
    let n = ab.norm();
    let mut np = n as u128;
    let mut vp = 0u32;
    while np % p as u128 == 0 {
        np /= p as u128;
        vp += 1;
    }
    let v = eisenstein_valuations(ab, p, vp + 2)?;
    let pattern = PhiDecomposition { p1: vec![v[0].value() as u32], p2: vec![v[1].value() as u32] }.normalize();
    Ok((BigInt::from(n), p.pow(vp), pattern))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub h: Vec<i64>,
    pub sh: Vec<i64>,
    #[serde(default)]
    pub q: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupFixture {
    pub cyc: Vec<u64>,
    pub p: u64,
    pub exponent_e: u32,
    pub records: Vec<ClassRecord>,
}

/// Class-side structure with the evidence used to obtain it.
#[derive(Clone, Debug)]
pub struct ClassStructure {
    pub decomposition: PhiDecomposition,
    /// Matrix of `σ` on the `p`-part, row-major, entries modulo `p^E`.
    pub sigma_matrix: Vec<Vec<u64>>,
    pub roots: [u64; 2],
    /// `σh·h^{-1}` in the rank-one case.
    pub u: Option<u64>,
}

fn local_snf_valuations(mut a: Vec<Vec<u64>>, p: u64, e: u32) -> Vec<u32> {
    let m = p.pow(e);
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let val = |x: u64| if x == 0 { e } else { valuation(x, p).min(e) };
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best = (e, t, t);
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = val(x);
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (v, bi, bj) = best;
        out.push(v);
        if v == e {
            continue;
        }
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let pv = p.pow(v);
        let unit = a[t][t] / pv;
        let uinv = inv_mod(unit % m, m).unwrap();
        for i in t + 1..rows {
            let f = mul_mod(a[i][t] / pv, uinv, m);
            if f == 0 {
                continue;
            }
            for j in t..cols {
                a[i][j] = (a[i][j] + m - mul_mod(f, a[t][j], m)) % m;
            }
        }
        for j in t + 1..cols {
            let f = mul_mod(a[t][j] / pv, uinv, m);
            if f == 0 {
                continue;
            }
            for row in a.iter_mut() {
                row[j] = (row[j] + m - mul_mod(f, row[t], m)) % m;
            }
        }
    }
    out
}

fn mat_inv_mod(h: &[Vec<u64>], p: u64, m: u64) -> Option<Vec<Vec<u64>>> {
    let r = h.len();
    let mut a: Vec<Vec<u64>> = h
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut x = row.clone();
            x.extend((0..r).map(|j| u64::from(i == j)));
            x
        })
        .collect();
    for c in 0..r {
        let piv = (c..r).find(|&i| a[i][c] % p != 0)?;
        a.swap(c, piv);
        let inv = inv_mod(a[c][c], m)?;
        for x in a[c].iter_mut() {
            *x = mul_mod(*x, inv, m);
        }
        for i in 0..r {
            if i != c && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..2 * r {
                    a[i][j] = (a[i][j] + m - mul_mod(f, a[c][j], m)) % m;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[r..].to_vec()).collect())
}

fn mat_mul_mod(a: &[Vec<u64>], b: &[Vec<u64>], m: u64) -> Vec<Vec<u64>> {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r)
        .map(|i| (0..c).map(|j| (0..k).fold(0, |acc, t| (acc + mul_mod(a[i][t], b[t][j], m)) % m)).collect())
        .collect()
}

/// `φ`-structure of the `p`-class group from its `σ`-records.
pub fn class_phi_structure(fix: &ClassGroupFixture, p: u64) -> Result<ClassStructure> {
    if p % 3 != 1 || !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not a prime ≡ 1 mod 3")));
    }
    if fix.p != p {
        return Err(Error::FixtureIntegrity(format!("fixture is for p = {}, not {p}", fix.p)));
    }
    let coords: Vec<(usize, u32)> = fix
        .cyc
        .iter()
        .enumerate()
        .filter_map(|(i, &d)| {
            let v = valuation(d, p);
            (v > 0).then_some((i, v))
        })
        .collect();
    let r = coords.len();
    let e = coords.iter().map(|c| c.1).max().unwrap_or(0);
    if r == 0 || !(1..=3).contains(&r) {
        return Err(Error::FixtureIntegrity(format!("p-rank {r} outside 1..=3")));
    }
    if e != fix.exponent_e {
        return Err(Error::FixtureIntegrity(format!("exponent {e} from cyc differs from exponent_e = {}", fix.exponent_e)));
    }
    if fix.records.len() != r {
        return Err(Error::FixtureIntegrity(format!("{} records for p-rank {r}", fix.records.len())));
    }
    let m = p.pow(e);
    let mut hm = vec![vec![0u64; r]; r];
    let mut sm = vec![vec![0u64; r]; r];
    for (k, rec) in fix.records.iter().enumerate() {
        if rec.h.len() != fix.cyc.len() || rec.sh.len() != fix.cyc.len() {
            return Err(Error::FixtureIntegrity("record length differs from cyc".into()));
        }
        for (i, &(c, v)) in coords.iter().enumerate() {
            let pv = p.pow(v) as i64;
            hm[i][k] = rec.h[c].rem_euclid(pv) as u64;
            sm[i][k] = rec.sh[c].rem_euclid(pv) as u64;
        }
    }
    let hinv = mat_inv_mod(&hm, p, m)
        .ok_or_else(|| Error::FixtureIntegrity("records do not generate the p-class group".into()))?;
    let sigma: Vec<Vec<u64>> = mat_mul_mod(&sm, &hinv, m)
        .into_iter()
        .enumerate()
        .map(|(i, row)| row.into_iter().map(|x| x % p.pow(coords[i].1)).collect())
        .collect();
    // σ must preserve the relation lattice and satisfy 1 + σ + σ² = 0.
    for i in 0..r {
        for j in 0..r {
            let vi = coords[i].1;
            let vj = coords[j].1;
            if vj < vi && sigma[i][j] % p.pow(vi - vj) != 0 {
                return Err(Error::FixtureIntegrity(format!("σ does not preserve relations at ({i}, {j})")));
            }
        }
    }
    let s2 = mat_mul_mod(&sigma, &sigma, m);
    for i in 0..r {
        let pv = p.pow(coords[i].1);
        for j in 0..r {
            let x = (u64::from(i == j) + sigma[i][j] + s2[i][j]) % m;
            if x % pv != 0 {
                return Err(Error::FixtureIntegrity("1 + σ + σ² does not annihilate the class group".into()));
            }
        }
    }
    let roots = cube_roots_of_unity(p, e)?;
    let mut parts = Vec::new();
    for &c in &roots {
        let mut a = vec![vec![0u64; 2 * r]; r];
        for i in 0..r {
            for j in 0..r {
                a[i][j] = (sigma[i][j] + if i == j { m - c } else { 0 }) % m;
            }
            a[i][r + i] = p.pow(coords[i].1) % m;
        }
        parts.push(local_snf_valuations(a, p, e));
    }
    let decomposition = PhiDecomposition { p1: parts[0].clone(), p2: parts[1].clone() }.normalize();
    let (t1, t2) = decomposition.totals();
    let vp: u32 = coords.iter().map(|c| c.1).sum();
    if t1 + t2 != vp {
        return Err(Error::FixtureIntegrity(format!("φ-parts have order p^{} but the p-class group has order p^{vp}", t1 + t2)));
    }
    let u = (r == 1).then(|| mul_mod(sm[0][0], inv_mod(hm[0][0], m).unwrap(), m));
    Ok(ClassStructure { decomposition, sigma_matrix: sigma, roots, u })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FieldToml {
    f: u64,
    a: i64,
    b: i64,
    #[serde(rename = "P")]
    poly: Vec<String>,
    #[serde(default)]
    sigma: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct UnitsToml {
    epsilon: Vec<String>,
    #[serde(default)]
    denominator: Option<String>,
    #[serde(default)]
    regulator: Option<String>,
    #[serde(default = "default_digits")]
    precision: u32,
}

fn default_digits() -> u32 {
    DEFAULT_DIGITS
}

/// Printed reference values for a field.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default)]
    pub index: Option<u64>,
    #[serde(default)]
    pub alpha_beta: Option<[i64; 2]>,
    #[serde(default)]
    pub unit_valuations: Option<[u32; 2]>,
    #[serde(default)]
    pub class_valuations: Option<[u32; 2]>,
    #[serde(default)]
    pub torsion: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FixtureToml {
    field: FieldToml,
    units: UnitsToml,
    #[serde(default)]
    classgroup: Option<ClassGroupFixture>,
    #[serde(default)]
    expected: Option<Expected>,
}

/// One fixture document: field, unit and optional class-group data.
#[derive(Clone, Debug)]
pub struct CubicFixture {
    pub record: CubicFieldRecord,
    pub sigma: Option<u64>,
    pub units: UnitFixture,
    pub classgroup: Option<ClassGroupFixture>,
    pub expected: Expected,
}

fn parse_big(s: &str, what: &str) -> Result<BigInt> {
    s.trim().parse().map_err(|_| Error::FixtureParse(format!("{what}: {s:?} is not an integer")))
}

impl CubicFixture {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let raw: FixtureToml = toml::from_str(s).map_err(|e| Error::FixtureParse(e.to_string()))?;
        if raw.field.poly.len() != 4 || raw.units.epsilon.len() != 3 {
            return Err(Error::FixtureParse("P needs 4 coefficients and epsilon 3".into()));
        }
        let poly: Vec<BigInt> = raw.field.poly.iter().map(|c| parse_big(c, "P")).collect::<Result<_>>()?;
        let record = CubicFieldRecord {
            f: raw.field.f,
            a: raw.field.a,
            b: raw.field.b,
            poly: [poly[0].clone(), poly[1].clone(), poly[2].clone(), poly[3].clone()],
        };
        let eps: Vec<BigInt> = raw.units.epsilon.iter().map(|c| parse_big(c, "epsilon")).collect::<Result<_>>()?;
        let denominator = match &raw.units.denominator {
            Some(d) => parse_big(d, "denominator")?,
            None => BigInt::one(),
        };
        let fx = CubicFixture {
            record,
            sigma: raw.field.sigma,
            units: UnitFixture {
                epsilon: [eps[0].clone(), eps[1].clone(), eps[2].clone()],
                denominator,
                regulator: raw.units.regulator,
                precision: raw.units.precision,
            },
            classgroup: raw.classgroup,
            expected: raw.expected.unwrap_or_default(),
        };
        fx.check_integrity()?;
        Ok(fx)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::FixtureParse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    /// The defining polynomial must be the one the enumeration produces for `(f, a, b)`.
    pub fn check_integrity(&self) -> Result<()> {
        let rec = &self.record;
        let known = cubic_fields_of_conductor(rec.f);
        if !known.iter().any(|k| k == rec) {
            return Err(Error::FixtureIntegrity(format!("P = {rec} is not the polynomial of (f, a, b) = ({}, {}, {})", rec.f, rec.a, rec.b)));
        }
        if let Some(cg) = &self.classgroup {
            if cg.records.iter().any(|r| r.h.len() != cg.cyc.len() || r.sh.len() != cg.cyc.len()) {
                return Err(Error::FixtureIntegrity("class record length differs from cyc".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "MATCH")]
    Match,
    #[serde(rename = "CONVENTION-SWAP")]
    ConventionSwap,
    #[serde(rename = "MISMATCH")]
    Mismatch,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Match => "MATCH",
            Verdict::ConventionSwap => "CONVENTION-SWAP",
            Verdict::Mismatch => "MISMATCH",
        })
    }
}

/// Unit side against class side for one field and one prime.
#[derive(Clone, Debug)]
pub struct MainConjectureReport {
    pub units: UnitAnalysis,
    pub index: BigInt,
    pub index_p_part: u64,
    pub unit_pattern: PhiDecomposition,
    pub class: ClassStructure,
    pub verdict: Verdict,
}

pub fn verify_main_conjecture(fx: &CubicFixture, p: u64, digits: u32) -> Result<MainConjectureReport> {
    let cg = fx
        .classgroup
        .as_ref()
        .ok_or_else(|| Error::FixtureIntegrity("fixture has no class-group data".into()))?;
    let class = class_phi_structure(cg, p)?;
    let units = analyze_units(&fx.record, fx.sigma, &fx.units, digits)?;
    let (index, index_p_part, unit_pattern) = unit_index_and_valuations(units.alpha_beta.value, p)?;
    let (u1, u2) = unit_pattern.totals();
    let (c1, c2) = class.decomposition.totals();
    let verdict = if (u1, u2) == (c1, c2) {
        Verdict::Match
    } else if (u1, u2) == (c2, c1) {
        Verdict::ConventionSwap
    } else {
        Verdict::Mismatch
    };
    Ok(MainConjectureReport { units, index, index_p_part, unit_pattern, class, verdict })
}

/// Whether two values of `α + βj` agree up to units of `Z[j]` and conjugation.
pub fn same_up_to_associates(x: EisensteinInt, y: EisensteinInt) -> bool {
    x.canonical() == y.canonical() || x.canonical() == y.conj().canonical()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(f: u64) -> CubicFieldRecord {
        cubic_fields_of_conductor(f).remove(0)
    }

    #[test]
    fn small_conductors() {
        let r = rec(7);
        assert_eq!(r.int_poly(), IntPoly::from_i64(&[-1, -2, 1, 1]));
        assert_eq!((r.a, r.b), (-1, 1));
        let r = rec(9);
        assert_eq!(r.int_poly(), IntPoly::from_i64(&[1, -3, 0, 1]));
        let r = rec(313);
        assert_eq!((r.a, r.b), (35, 1));
        assert_eq!(r.int_poly(), IntPoly::from_i64(&[371, -104, 1, 1]));
        assert_eq!(cubic_fields_of_conductor(91).len(), 2);
        assert!(cubic_fields_of_conductor(21).is_empty());
    }

    #[test]
    fn galois_maps() {
        for f in [7, 9] {
            let g = recover_galois_map(&rec(f), 40).unwrap();
            assert_eq!(g.coeffs, [rat(-2), rat(0), rat(1)]);
        }
    }

    #[test]
    fn frobenius_labels() {
        let r = rec(313);
        let field = CubicField::new(r, 40, Some(4)).unwrap();
        assert_eq!(field.sigma, 4);
        assert_eq!(field.psi.value(4), Some(1));
        let r = rec(10267);
        let ok = cubic_fields_of_conductor(10267)
            .into_iter()
            .any(|r| CubicField::new(r, 40, Some(2)).is_ok());
        assert!(ok);
        assert!(CubicField::new(r, 40, None).is_ok());
    }

    #[test]
    fn class_structure_rank_one() {
        let fx = ClassGroupFixture { cyc: vec![49], p: 7, exponent_e: 2, records: vec![ClassRecord { h: vec![48], sh: vec![19], q: None }] };
        let s = class_phi_structure(&fx, 7).unwrap();
        assert_eq!(s.u, Some(30));
        assert_eq!(s.decomposition.totals(), (2, 0));
        let bad = ClassGroupFixture { cyc: vec![7], p: 7, exponent_e: 1, records: vec![ClassRecord { h: vec![1], sh: vec![3], q: None }] };
        assert!(matches!(class_phi_structure(&bad, 7), Err(Error::FixtureIntegrity(_))));
    }

    #[test]
    fn unit_patterns() {
        let (n, np, pat) = unit_index_and_valuations(EisensteinInt::new(-3, -2), 7).unwrap();
        assert_eq!((n, np), (BigInt::from(7), 7));
        assert_eq!(pat.totals(), (1, 0));
        let (_, _, pat) = unit_index_and_valuations(EisensteinInt::new(5, 8), 7).unwrap();
        assert_eq!(pat.totals(), (2, 0));
        let (n, _, pat) = unit_index_and_valuations(EisensteinInt::new(1, 0), 7).unwrap();
        assert_eq!(n, BigInt::one());
        assert_eq!(pat.totals(), (0, 0));
    }
}
