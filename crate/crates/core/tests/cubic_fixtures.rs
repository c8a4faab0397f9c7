use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use phiarith::arith::{factorize, is_prime};
use phiarith::cyclo_ring::EisensteinInt;
use phiarith::real_cubic::*;
use phiarith::Error;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(f: u64) -> CubicFixture {
    CubicFixture::load(&fixture_dir().join(format!("cubic/f{f}.toml"))).unwrap()
}

fn conductor_oracle(f: u64) -> Option<u32> {
    let fac = factorize(f);
    let ok = f > 1 && fac.iter().all(|&(q, e)| (q == 3 && e == 2) || (q % 3 == 1 && e == 1));
    ok.then_some(fac.len() as u32)
}

#[test]
fn enumeration_matches_conductor_count() {
    let mut total = 0;
    for f in 1..=3000u64 {
        let fields = cubic_fields_of_conductor(f);
        match conductor_oracle(f) {
            Some(t) => {
                assert!(is_cubic_conductor(f), "f = {f}");
                assert_eq!(fields.len(), 1 << (t - 1), "f = {f}");
            }
            None => {
                assert!(!is_cubic_conductor(f), "f = {f}");
                assert!(fields.is_empty());
            }
        }
        for rec in &fields {
            let d = rec.discriminant();
            assert!(d.is_positive());
            let r = d.sqrt();
            assert_eq!(&r * &r, d, "disc of {rec}");
            assert!((&d % BigInt::from(f * f)).is_zero());
        }
        total += fields.len();
    }
    assert_eq!(enumerate_cubic_conductors(1, 3000).len(), total);
    assert_eq!(enumerate_cubic_conductors(1, 100).iter().map(|r| r.f).collect::<Vec<_>>(), vec![7, 9, 13, 19, 31, 37, 43, 61, 63, 63, 67, 73, 79, 91, 91, 97]);
}

#[test]
fn galois_maps_are_exact() {
    for rec in enumerate_cubic_conductors(7, 400) {
        let g = recover_galois_map(&rec, DEFAULT_DIGITS).unwrap();
        assert!(verify_galois_map(&rec, &g), "{rec}");
        let g2 = g.compose(&g, &rec.poly);
        assert!(verify_galois_map(&rec, &g2));
        assert_ne!(g2, g);
        let field = CubicField::new(rec.clone(), DEFAULT_DIGITS, None).unwrap();
        assert!(is_prime(field.inert_prime));
        assert_eq!(field.psi.order, 3);
        assert_eq!(field.psi.value(field.sigma), Some(1));
    }
}

fn check_fixture(f: u64, p: u64, digits: u32) {
    let fx = load(f);
    fx.check_integrity().unwrap();
    let r = verify_main_conjecture(&fx, p, digits).unwrap();
    let exp = &fx.expected;
    assert_eq!(r.verdict, Verdict::Match, "f = {f}");
    assert_eq!(r.index, BigInt::from(exp.index.unwrap()), "index of f = {f}");
    let [a, b] = exp.alpha_beta.unwrap();
    let ab = r.units.alpha_beta.value;
    assert!(same_up_to_associates(ab, EisensteinInt::new(a, b)), "f = {f}: {ab} vs ({a}, {b})");
    assert_eq!(ab.norm(), EisensteinInt::new(a, b).norm());
    let mut unit = [r.unit_pattern.totals().0, r.unit_pattern.totals().1];
    let mut class = [r.class.decomposition.totals().0, r.class.decomposition.totals().1];
    let mut printed = exp.unit_valuations.unwrap();
    unit.sort();
    class.sort();
    printed.sort();
    assert_eq!(unit, printed, "f = {f}");
    assert_eq!(class, printed, "f = {f}");
    assert_eq!(r.index_p_part, p.pow(unit[0] + unit[1]));
    let q = r.units.alpha_beta.regulator_quotient.as_ref().expect("shipped regulator");
    assert!((q.to_f64() - 1.0).abs() < 1e-20);
}

#[test]
fn printed_blocks_p7() {
    for f in [313, 7351, 231019, 10267, 165889, 1360729, 2653621] {
        check_fixture(f, 7, DEFAULT_DIGITS);
    }
}

#[test]
fn printed_blocks_p13_and_up() {
    for (f, p) in [(45589, 13), (197587, 13), (559561, 13), (715549, 13), (411813, 19), (487909, 19), (191413, 31), (228013, 31)] {
        check_fixture(f, p, DEFAULT_DIGITS);
    }
}

#[test]
fn rank_three_systems() {
    let fx = load(14376321);
    let r = verify_main_conjecture(&fx, 7, 100).unwrap();
    assert_eq!(r.class.decomposition.p1, vec![1, 1]);
    assert_eq!(r.class.decomposition.p2, vec![1]);
    assert_eq!(r.unit_pattern.totals(), (2, 1));
    assert_eq!(r.verdict, Verdict::Match);
    for f in [39368623, 43367263] {
        check_fixture(f, 7, DEFAULT_DIGITS);
    }
}

#[test]
fn rank_one_class_structure() {
    let fx = load(7351);
    let s = class_phi_structure(fx.classgroup.as_ref().unwrap(), 7).unwrap();
    assert_eq!(s.u, Some(30));
    assert_eq!(s.decomposition.totals(), (2, 0));
    let fx = load(10267);
    let s = class_phi_structure(fx.classgroup.as_ref().unwrap(), 7).unwrap();
    assert_eq!((s.decomposition.p1.clone(), s.decomposition.p2.clone()), (vec![1], vec![1]));
}

#[test]
fn starved_precision_escalates() {
    let fx = load(42667);
    let field = CubicField::new(fx.record.clone(), 50, fx.sigma).unwrap();
    let logs = cyclotomic_unit_logs(&field).unwrap();
    assert!(matches!(solve_alpha_beta(&field, &fx.units, &logs), Err(Error::RealPrecision { digits: 50, .. })));
    let r = analyze_units(&fx.record, fx.sigma, &fx.units, 50).unwrap();
    assert_eq!(r.rejected.first().map(|x| x.0), Some(50));
    assert_eq!(r.alpha_beta.digits, 150);
    let field = CubicField::new(fx.record.clone(), 150, fx.sigma).unwrap();
    let logs = cyclotomic_unit_logs(&field).unwrap();
    let ab = solve_alpha_beta(&field, &fx.units, &logs).unwrap();
    assert_eq!(ab.value, r.alpha_beta.value);
    assert_eq!(ab.index, BigInt::from(ab.value.norm()));
}

#[test]
fn corrupted_fixtures() {
    let bad = CubicFixture::load(&fixture_dir().join("corrupted/f313_sigma.toml")).unwrap();
    bad.check_integrity().unwrap();
    assert!(matches!(verify_main_conjecture(&bad, 7, DEFAULT_DIGITS), Err(Error::FixtureIntegrity(_))));
    let text = std::fs::read_to_string(fixture_dir().join("cubic/f313.toml")).unwrap();
    let wrong_poly = CubicFixture::from_toml_str(&text.replace("\"-104\"", "\"-103\""));
    assert!(matches!(wrong_poly, Err(Error::FixtureIntegrity(_))));
    let wrong_unit = CubicFixture::from_toml_str(&text.replace("[\"73\", \"-6\", \"-1\"]", "[\"2\", \"0\", \"0\"]")).unwrap();
    assert!(wrong_unit.units.check_norm(&wrong_unit.record).is_err());
    assert!(CubicFixture::from_toml_str("[field]\nf = 313").is_err());
}
