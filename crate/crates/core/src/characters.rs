//! Dirichlet characters as exponent vectors on fixed generators of `(Z/mZ)^×`.
//!
//! A character value is never a complex number: `ψ(a)` is the exponent `k`
//! with `ψ(a) = ζ_g^k`, where `g` is the order of `ψ`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::arith::{crt, euler_phi, factorize, gcd, moebius, mul_mod, pow_mod};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Local {
    /// `(Z/p^k)^×` for odd `p`, or `(Z/4)^×`: one cyclic generator.
    Cyclic,
    /// `(Z/2^k)^×`, `k ≥ 3`: generators `-1` and `5`.
    TwoPower,
}

#[derive(Debug, Clone)]
struct Component {
    p: u64,
    k: u32,
    q: u64,
    kind: Local,
    /// Index of the first generator of this component in the global list.
    first_gen: usize,
    /// Local generator residue(s) modulo `q`.
    local_gens: Vec<u64>,
}

/// Structure of `(Z/mZ)^×` with deterministic generators.
#[derive(Debug)]
pub struct UnitGroupStructure {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    components: Vec<Component>,
    logs: OnceLock<Vec<Vec<u32>>>,
}

fn smallest_primitive_root(p: u64, k: u32) -> u64 {
    let q = p.pow(k);
    let phi = euler_phi(q);
    let primes: Vec<u64> = factorize(phi).into_iter().map(|(r, _)| r).collect();
    (2..q)
        .find(|&g| gcd(g, q) == 1 && primes.iter().all(|&r| pow_mod(g, phi / r, q) != 1))
        .expect("odd prime powers are cyclic")
}

impl UnitGroupStructure {
    pub fn new(m: u64) -> Self {
        assert!(m >= 1);
        let fac = factorize(m);
        let mut generators = Vec::new();
        let mut orders = Vec::new();
        let mut components = Vec::new();
        for &(p, k) in &fac {
            let q = p.pow(k);
            let others = m / q;
            let lift = |r: u64| -> u64 {
                if others == 1 {
                    r % q
                } else {
                    crt(&[(r % q, q), (1, others)]).0
                }
            };
            let first_gen = generators.len();
            if p == 2 {
                match k {
                    1 => continue,
                    2 => {
                        generators.push(lift(3));
                        orders.push(2);
                        components.push(Component { p, k, q, kind: Local::Cyclic, first_gen, local_gens: vec![3] });
                    }
                    _ => {
                        generators.push(lift(q - 1));
                        orders.push(2);
                        generators.push(lift(5));
                        orders.push(q / 4);
                        components.push(Component { p, k, q, kind: Local::TwoPower, first_gen, local_gens: vec![q - 1, 5] });
                    }
                }
            } else {
                let g = smallest_primitive_root(p, k);
                generators.push(lift(g));
                orders.push(euler_phi(q));
                components.push(Component { p, k, q, kind: Local::Cyclic, first_gen, local_gens: vec![g] });
            }
        }
        UnitGroupStructure { modulus: m, generators, orders, components, logs: OnceLock::new() }
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    fn log_tables(&self) -> &Vec<Vec<u32>> {
        self.logs.get_or_init(|| {
            self.components
                .iter()
                .map(|c| {
                    let mut table = vec![u32::MAX; c.q as usize];
                    match c.kind {
                        Local::Cyclic => {
                            let mut x = 1u64;
                            for e in 0..euler_phi(c.q) {
                                table[x as usize] = e as u32;
                                x = mul_mod(x, c.local_gens[0], c.q);
                            }
                        }
                        Local::TwoPower => {
                            let half = c.q / 4;
                            let mut x = 1u64;
                            for e1 in 0..half {
                                table[x as usize] = e1 as u32;
                                table[(c.q - x) as usize] = (half + e1) as u32;
                                x = mul_mod(x, 5, c.q);
                            }
                        }
                    }
                    table
                })
                .collect()
        })
    }

    /// Exponents of `a` on the generators, or `None` when `gcd(a, m) > 1`.
    pub fn discrete_log(&self, a: u64) -> Option<Vec<u64>> {
        if gcd(a, self.modulus) != 1 {
            return None;
        }
        let tables = self.log_tables();
        let mut out = vec![0u64; self.generators.len()];
        for (c, table) in self.components.iter().zip(tables) {
            let t = table[(a % c.q) as usize];
            if t == u32::MAX {
                return None;
            }
            match c.kind {
                Local::Cyclic => out[c.first_gen] = t as u64,
                Local::TwoPower => {
                    let half = (c.q / 4) as u32;
                    out[c.first_gen] = (t / half) as u64;
                    out[c.first_gen + 1] = (t % half) as u64;
                }
            }
        }
        Some(out)
    }
}

/// A character `ψ` of `(Z/mZ)^×`.
#[derive(Debug, Clone)]
pub struct ResidueCharacter {
    pub group: Arc<UnitGroupStructure>,
    pub exponents: Vec<u64>,
    pub order: u64,
    pub conductor: u64,
    pub odd: bool,
}

impl PartialEq for ResidueCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.exponents == other.exponents
    }
}
impl Eq for ResidueCharacter {}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl ResidueCharacter {
    pub fn new(group: Arc<UnitGroupStructure>, exponents: Vec<u64>) -> Self {
        assert_eq!(exponents.len(), group.generators.len());
        let exponents: Vec<u64> = exponents.iter().zip(&group.orders).map(|(e, o)| e % o).collect();
        let order = exponents
            .iter()
            .zip(&group.orders)
            .fold(1, |acc, (&e, &o)| lcm(acc, o / gcd(e, o)));
        let conductor = local_conductor(&group, &exponents);
        let mut chi = ResidueCharacter { group, exponents, order, conductor, odd: false };
        let m = chi.group.modulus;
        chi.odd = m > 2 && chi.value(m - 1) != Some(0);
        chi
    }

    pub fn trivial(m: u64) -> Self {
        let group = Arc::new(UnitGroupStructure::new(m));
        let n = group.generators.len();
        Self::new(group, vec![0; n])
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    /// `k` with `ψ(a) = ζ_g^k`, or `None` when `a` is not a unit mod `m`.
    pub fn value(&self, a: u64) -> Option<u64> {
        let logs = self.group.discrete_log(a % self.group.modulus)?;
        let g = self.order;
        let mut k = 0u64;
        for ((&e, &o), &l) in self.exponents.iter().zip(&self.group.orders).zip(&logs) {
            if e == 0 {
                continue;
            }
            let d = gcd(e, o);
            let local = o / d;
            let mult = mul_mod((e / d) % local, g / local, g);
            k = (k + mul_mod(mult, l, g)) % g;
        }
        Some(k)
    }

    pub fn pow(&self, a: u64) -> ResidueCharacter {
        let exps = self
            .exponents
            .iter()
            .zip(&self.group.orders)
            .map(|(&e, &o)| mul_mod(e, a % o, o))
            .collect();
        ResidueCharacter::new(self.group.clone(), exps)
    }

    pub fn inverse(&self) -> ResidueCharacter {
        let exps = self
            .exponents
            .iter()
            .zip(&self.group.orders)
            .map(|(&e, &o)| (o - e % o) % o)
            .collect();
        ResidueCharacter::new(self.group.clone(), exps)
    }

    /// The primitive character of modulus `conductor` inducing `ψ`.
    pub fn primitive(&self) -> ResidueCharacter {
        let f = self.conductor.max(1);
        if f == self.group.modulus {
            return self.clone();
        }
        let group = Arc::new(UnitGroupStructure::new(f));
        let m = self.group.modulus;
        let g = self.order;
        let exps = group
            .generators
            .iter()
            .zip(&group.orders)
            .map(|(&gen, &o)| {
                let lift = (0..)
                    .map(|t| gen + t * f)
                    .find(|&a| gcd(a, m) == 1)
                    .expect("a coprime lift exists");
                let k = self.value(lift).expect("lift is a unit");
                // ψ(gen) = ζ_g^k = ζ_o^{k o / g}
                (k * o / g) % o
            })
            .collect();
        ResidueCharacter::new(group, exps)
    }
}

fn local_conductor(group: &UnitGroupStructure, exps: &[u64]) -> u64 {
    let mut f = 1u64;
    for c in &group.components {
        let i = c.first_gen;
        match c.kind {
            Local::Cyclic => {
                let o = group.orders[i];
                let lo = o / gcd(exps[i], o);
                if lo > 1 {
                    if c.p == 2 {
                        f *= 4;
                    } else {
                        let v = crate::arith::valuation(lo, c.p);
                        f *= c.p.pow(v + 1);
                    }
                }
            }
            Local::TwoPower => {
                let o1 = group.orders[i + 1];
                let lo1 = o1 / gcd(exps[i + 1], o1);
                if lo1 > 1 {
                    f *= 1 << (crate::arith::valuation(lo1, 2) + 2);
                } else if exps[i] % 2 == 1 {
                    f *= 4;
                }
            }
        }
        let _ = c.k;
    }
    f
}

/// All characters modulo `m`, in lexicographic order of exponent vectors.
pub fn enumerate_characters(m: u64) -> Vec<ResidueCharacter> {
    let group = Arc::new(UnitGroupStructure::new(m));
    exponent_tuples(&group.orders, &vec![1; group.orders.len()])
        .into_iter()
        .map(|e| ResidueCharacter::new(group.clone(), e))
        .collect()
}

/// Characters modulo `m` whose order divides `d`.
pub fn characters_of_order_dividing(m: u64, d: u64) -> Vec<ResidueCharacter> {
    let group = Arc::new(UnitGroupStructure::new(m));
    let steps: Vec<u64> = group.orders.iter().map(|&o| o / gcd(o, d)).collect();
    exponent_tuples(&group.orders, &steps)
        .into_iter()
        .map(|e| ResidueCharacter::new(group.clone(), e))
        .collect()
}

fn exponent_tuples(orders: &[u64], steps: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for (&o, &s) in orders.iter().zip(steps) {
        let mut next = Vec::new();
        for t in &out {
            let mut e = 0;
            while e < o {
                let mut v = t.clone();
                v.push(e);
                next.push(v);
                e += s;
            }
        }
        out = next;
    }
    out
}

/// Galois orbit of characters under `ψ ↦ ψ^a`, `gcd(a, g) = 1`.
#[derive(Debug, Clone)]
pub struct RationalCharacter {
    pub representative: ResidueCharacter,
    /// Exponents `a` (units mod `g`) acting on the representative.
    pub orbit: Vec<u64>,
    pub order: u64,
    pub conductor: u64,
    pub odd: bool,
}

impl RationalCharacter {
    pub fn from_representative(rep: ResidueCharacter) -> Self {
        let g = rep.order;
        let orbit = (1..=g.max(1)).filter(|&a| gcd(a, g) == 1 && (a < g || g == 1)).collect();
        RationalCharacter { order: g, conductor: rep.conductor, odd: rep.odd, representative: rep, orbit }
    }

    pub fn members(&self) -> Vec<ResidueCharacter> {
        self.orbit.iter().map(|&a| self.representative.pow(a)).collect()
    }
}

/// Partition of all characters mod `m` into rational orbits.
pub fn rational_orbits(m: u64) -> Vec<RationalCharacter> {
    let all = enumerate_characters(m);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for psi in all {
        if seen.contains(&psi.exponents) {
            continue;
        }
        let chi = RationalCharacter::from_representative(psi);
        for member in chi.members() {
            seen.insert(member.exponents);
        }
        out.push(chi);
    }
    out
}

/// An orbit of `ψ ↦ ψ^u` for `u` in the decomposition group of `p` in `(Z/g)^×`.
#[derive(Debug, Clone)]
pub struct PadicCharacter {
    pub parent: RationalCharacter,
    pub p: u64,
    pub orbit: Vec<u64>,
    pub degree: u64,
}

impl PadicCharacter {
    pub fn seed(&self) -> u64 {
        self.orbit[0]
    }
}

/// Decomposition group of `p` in `(Z/gZ)^×`: residues that reduce into `⟨p⟩` modulo
/// the prime-to-`p` part of `g`.
pub fn decomposition_group(g: u64, p: u64) -> Vec<u64> {
    let mut g0 = g;
    while g0 % p == 0 {
        g0 /= p;
    }
    let mut powers = std::collections::HashSet::new();
    let mut x = 1 % g0.max(1);
    loop {
        if !powers.insert(x) {
            break;
        }
        x = mul_mod(x, p % g0.max(1), g0.max(1));
    }
    (1..=g.max(1))
        .filter(|&u| (u < g || g == 1) && gcd(u, g) == 1 && powers.contains(&(u % g0.max(1))))
        .collect()
}

pub fn padic_orbits(chi: &RationalCharacter, p: u64) -> Vec<PadicCharacter> {
    let g = chi.order;
    let dec = decomposition_group(g, p);
    let mut left: std::collections::BTreeSet<u64> = chi.orbit.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(&seed) = left.iter().next() {
        let mut orbit: Vec<u64> = dec.iter().map(|&u| mul_mod(u, seed, g.max(1)).max(if g == 1 { 1 } else { 0 })).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for a in &orbit {
            left.remove(a);
        }
        let degree = orbit.len() as u64;
        out.push(PadicCharacter { parent: chi.clone(), p, orbit, degree });
    }
    out
}

/// Values in a commutative group, used for divisor-lattice inversion.
pub trait LatticeValue: Clone {
    fn identity() -> Self;
    fn combine(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
}

impl LatticeValue for i64 {
    fn identity() -> Self {
        0
    }
    fn combine(&self, other: &Self) -> Self {
        self + other
    }
    fn inverse(&self) -> Self {
        -self
    }
}

impl LatticeValue for num_rational::BigRational {
    fn identity() -> Self {
        num_traits::One::one()
    }
    fn combine(&self, other: &Self) -> Self {
        self * other
    }
    fn inverse(&self) -> Self {
        num_traits::Inv::inv(self.clone())
    }
}

/// Recover per-character values `A_d` (indexed by the order `d` of `χ`) from the
/// subfield products `V_d = ∏_{d' | d} A_{d'}`.
pub fn chi_deconvolution<T: LatticeValue>(g: u64, values: &BTreeMap<u64, T>) -> Result<BTreeMap<u64, T>> {
    let divs = crate::arith::divisors(g);
    for &d in &divs {
        if !values.contains_key(&d) {
            return Err(Error::IncompleteLattice { order: g, missing: d });
        }
    }
    let mut out = BTreeMap::new();
    for &d in &divs {
        let mut acc = T::identity();
        for &e in &crate::arith::divisors(d) {
            let mu = moebius(d / e);
            let v = &values[&e];
            acc = match mu {
                1 => acc.combine(v),
                -1 => acc.combine(&v.inverse()),
                _ => acc,
            };
        }
        out.insert(d, acc);
    }
    Ok(out)
}

/// Inverse of [`chi_deconvolution`].
pub fn chi_convolution<T: LatticeValue>(g: u64, per_chi: &BTreeMap<u64, T>) -> Result<BTreeMap<u64, T>> {
    let divs = crate::arith::divisors(g);
    let mut out = BTreeMap::new();
    for &d in &divs {
        let mut acc = T::identity();
        for e in crate::arith::divisors(d) {
            let v = per_chi.get(&e).ok_or(Error::IncompleteLattice { order: g, missing: e })?;
            acc = acc.combine(v);
        }
        out.insert(d, acc);
    }
    Ok(out)
}

/// Smallest residue `a` with `ψ(a) = ζ_g`; its Artin symbol generates `Gal(K_ψ/Q)`.
pub fn artin_generator(psi: &ResidueCharacter) -> u64 {
    let m = psi.modulus();
    (1..m.max(2))
        .find(|&a| psi.value(a) == Some(1 % psi.order.max(1)))
        .unwrap_or(1)
}
