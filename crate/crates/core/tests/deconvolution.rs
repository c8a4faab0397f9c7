use std::collections::BTreeMap;

use num_rational::BigRational;
use phiarith::arith::divisors;
use phiarith::characters::{chi_convolution, chi_deconvolution};
use phiarith::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `V_d = Σ_{e | d} A_e` by brute force over all pairs.
fn subfield_sums(g: u64, per_chi: &BTreeMap<u64, i64>) -> BTreeMap<u64, i64> {
    (1..=g)
        .filter(|d| g % d == 0)
        .map(|d| (d, (1..=d).filter(|e| d % e == 0).map(|e| per_chi[&e]).sum()))
        .collect()
}

#[test]
fn additive_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    for g in 1..=60u64 {
        for _ in 0..4 {
            let per: BTreeMap<u64, i64> = divisors(g).into_iter().map(|d| (d, rng.gen_range(0..8))).collect();
            let sub = subfield_sums(g, &per);
            assert_eq!(chi_convolution(g, &per).unwrap(), sub);
            assert_eq!(chi_deconvolution(g, &sub).unwrap(), per, "g = {g}");
        }
    }
}

#[test]
fn multiplicative_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for g in 1..=60u64 {
        let per: BTreeMap<u64, BigRational> = divisors(g)
            .into_iter()
            .map(|d| (d, BigRational::from_integer(rng.gen_range(1..50i64).into())))
            .collect();
        let sub: BTreeMap<u64, BigRational> = divisors(g)
            .into_iter()
            .map(|d| (d, divisors(d).iter().map(|e| per[e].clone()).product()))
            .collect();
        assert_eq!(chi_convolution(g, &per).unwrap(), sub);
        assert_eq!(chi_deconvolution(g, &sub).unwrap(), per, "g = {g}");
    }
}

#[test]
fn incomplete_lattice() {
    let sub: BTreeMap<u64, i64> = [(1, 0), (2, 1), (3, 2)].into();
    match chi_deconvolution(6, &sub) {
        Err(Error::IncompleteLattice { order: 6, missing: 6 }) => {}
        other => panic!("unexpected {other:?}"),
    }
}
