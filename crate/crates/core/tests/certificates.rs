use num_bigint::BigInt;
use num_traits::ToPrimitive;
use phiarith::arith::{divisors, euler_phi, is_prime, moebius};
use phiarith::cyclo_ring::{cyclotomic_polynomial, cyclotomic_shift_identity, geometric_bezout, nu_decomposition, nu_polynomial};
use phiarith::poly::IntPoly;

/// `Φ_n = ∏_{d | n} (1 - x^d)^{μ(n/d)}` as a power series truncated past `φ(n)`.
fn phi_oracle(n: u64) -> Vec<i128> {
    let deg = euler_phi(n) as usize;
    let mut s = vec![0i128; deg + 1];
    s[0] = 1;
    for d in divisors(n) {
        let d = d as usize;
        match moebius(n / d as u64) {
            1 => {
                for i in (d..=deg).rev() {
                    s[i] -= s[i - d];
                }
            }
            -1 => {
                for i in d..=deg {
                    s[i] += s[i - d];
                }
            }
            _ => {}
        }
    }
    if n == 1 {
        return vec![-1, 1];
    }
    s
}

fn small(p: &IntPoly) -> Vec<i128> {
    p.coeffs().iter().map(|c| c.to_i128().expect("coefficient fits")).collect()
}

fn mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn add(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    trim(out)
}

fn trim(mut v: Vec<i128>) -> Vec<i128> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn inflate(a: &[i128], k: usize) -> Vec<i128> {
    let mut out = vec![0i128; (a.len() - 1) * k + 1];
    for (i, x) in a.iter().enumerate() {
        out[i * k] = *x;
    }
    out
}

#[test]
fn cyclotomic_polynomials_match_moebius_product() {
    for n in 1..=360 {
        assert_eq!(small(&cyclotomic_polynomial(n)), phi_oracle(n), "Φ_{n}");
    }
}

#[test]
fn shift_identities() {
    for n in 1..=120u64 {
        for q in [2u64, 3, 5, 7, 11, 13] {
            let (phi_nq, rest) = cyclotomic_shift_identity(n, q).unwrap();
            let lhs = inflate(&phi_oracle(n), q as usize);
            assert_eq!(small(&phi_nq), phi_oracle(n * q));
            match rest {
                Some(phi_n) => {
                    assert!(n % q != 0);
                    assert_eq!(lhs, mul(&small(&phi_nq), &small(&phi_n)), "n={n} q={q}");
                }
                None => {
                    assert_eq!(n % q, 0);
                    assert_eq!(lhs, small(&phi_nq), "n={n} q={q}");
                }
            }
        }
    }
    assert!(cyclotomic_shift_identity(10, 4).is_err());
}

#[test]
fn bezout_for_prime_pairs() {
    let primes: Vec<u64> = (2..=31).filter(|&l| is_prime(l)).collect();
    for &l1 in &primes {
        for &l2 in &primes {
            if l1 == l2 {
                assert!(geometric_bezout(l1, l2).is_err());
                continue;
            }
            let (a, b) = geometric_bezout(l1, l2).unwrap();
            let s = add(&mul(&small(&a), &phi_oracle(l1)), &mul(&small(&b), &phi_oracle(l2)));
            assert_eq!(s, vec![1], "({l1}, {l2})");
        }
    }
}

#[test]
fn nu_decompositions() {
    for n in 2..=120u64 {
        let parts = nu_decomposition(n).unwrap();
        let mut total = Vec::new();
        for (&l, a) in &parts {
            assert_eq!(n % l, 0);
            let nu = inflate(&vec![1i128; l as usize], (n / l) as usize);
            assert_eq!(small(&nu_polynomial(n, l)), nu);
            total = add(&total, &mul(&small(a), &nu));
        }
        assert_eq!(total, phi_oracle(n), "n = {n}");
    }
    assert!(nu_decomposition(1).is_err());
}

#[test]
fn bezout_coefficients_are_integral_for_large_pairs() {
    let (a, b) = geometric_bezout(101, 103).unwrap();
    let one = a.mul(&cyclotomic_polynomial(101)).add(&b.mul(&cyclotomic_polynomial(103)));
    assert_eq!(one.coeffs(), &[BigInt::from(1)]);
}
