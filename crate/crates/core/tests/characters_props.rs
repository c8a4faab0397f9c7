use std::collections::BTreeMap;

use phiarith::arith::{divisors, euler_phi, gcd, mul_mod};
use phiarith::characters::*;

/// Smallest `d | m` such that `ψ` is trivial on units `≡ 1 mod d`.
fn conductor_oracle(psi: &ResidueCharacter) -> u64 {
    let m = psi.modulus();
    divisors(m)
        .into_iter()
        .find(|&d| (1..m).filter(|&a| gcd(a, m) == 1 && a % d == 1 % d).all(|a| psi.value(a) == Some(0)))
        .unwrap()
}

#[test]
fn characters_up_to_200() {
    for m in 1..=200u64 {
        let chars = enumerate_characters(m);
        assert_eq!(chars.len() as u64, euler_phi(m), "m = {m}");
        let units: Vec<u64> = (1..=m).filter(|&a| gcd(a, m) == 1).map(|a| a % m).collect();
        for psi in &chars {
            let g = psi.order;
            assert_eq!(psi.conductor, conductor_oracle(psi), "m = {m} {:?}", psi.exponents);
            if m > 2 {
                assert_eq!(psi.odd, psi.value(m - 1) != Some(0));
            }
            // values hit every power of ζ_g equally often
            let mut hits = BTreeMap::new();
            for &a in &units {
                *hits.entry(psi.value(a).unwrap()).or_insert(0u64) += 1;
            }
            assert_eq!(hits.len() as u64, g);
            assert!(hits.values().all(|&c| c == euler_phi(m) / g));
            if m % 7 == 0 {
                for &a in units.iter().take(12) {
                    for &b in units.iter().take(12) {
                        let ab = mul_mod(a, b, m);
                        assert_eq!(psi.value(ab).unwrap(), (psi.value(a).unwrap() + psi.value(b).unwrap()) % g);
                    }
                }
            }
            for a in 1..m {
                assert_eq!(psi.value(a).is_some(), gcd(a, m) == 1, "m = {m} a = {a}");
            }
        }
        let orbits = rational_orbits(m);
        assert_eq!(orbits.iter().map(|c| euler_phi(c.order)).sum::<u64>(), euler_phi(m));
        for chi in &orbits {
            assert_eq!(chi.orbit.len() as u64, euler_phi(chi.order));
            for p in [2u64, 3, 7] {
                let phis = padic_orbits(chi, p);
                assert_eq!(phis.iter().map(|x| x.degree).sum::<u64>(), chi.orbit.len() as u64);
                let degree = phis[0].degree;
                assert!(phis.iter().all(|x| x.degree == degree));
            }
        }
    }
}

#[test]
fn artin_generators() {
    for f in [7u64, 9, 13, 16, 31, 63] {
        for chi in rational_orbits(f).into_iter().filter(|c| c.order > 1) {
            let a = artin_generator(&chi.representative);
            assert_eq!(chi.representative.value(a), Some(1));
        }
    }
}
