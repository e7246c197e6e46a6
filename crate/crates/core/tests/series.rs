mod common;

use std::collections::BTreeMap;

use abelian_census::group::{GroupData, OmegaSet, ParamVector};
use abelian_census::profile::*;
use abelian_census::series::*;
use abelian_census::CensusError;
use common::*;

fn iv(e: &[(u64, u64)]) -> IndexValue {
    IndexValue::from_exponents(e.to_vec(), 1)
}

#[test]
fn quadratic_mu_coefficients() {
    let gd = GroupData::new(&[2]).unwrap();
    let mu = mu_series(&gd, &ParamVector::ones(1), &OmegaSet::empty(), 0, 10).unwrap();
    assert_eq!(mu.get(&iv(&[])), 1);
    assert_eq!(mu.get(&iv(&[(2, 1)])), 3);
    assert_eq!(mu.get(&iv(&[(3, 1)])), 1);
    assert_eq!(mu.get(&iv(&[(2, 1), (3, 1)])), 3);
    assert_eq!(mu.kind, SeriesKind::Mu);
}

#[test]
fn klein_mu_single_omega_prime() {
    let (gd, x, om) = klein((1, 1));
    let mu = mu_series(&gd, &x, &om, 1, 10).unwrap();
    assert_eq!(mu.get(&iv(&[(3, 1)])), 2);
    // p = 5 has the same local picture as p = 3.
    assert_eq!(mu.get(&iv(&[(5, 1)])), 2);
}

#[test]
fn quadratic_pi_coefficients() {
    let gd = GroupData::new(&[2]).unwrap();
    let x = ParamVector::ones(1);
    let pi = pi_series(&gd, &x, &OmegaSet::empty(), 0, 10).unwrap();
    assert_eq!(pi.get(&iv(&[(2, 1)])), 3);
    assert_eq!(pi.get(&iv(&[])), 0);
    let inv = pi_slices_by_inversion(&gd, &x, &OmegaSet::empty(), 10, 0).unwrap();
    assert_eq!(inv[&Slice::Gamma(0)], pi);
}

#[test]
fn klein_never_surjective_from_one_tame_prime() {
    let gd = GroupData::new(&[2, 2]).unwrap();
    let x = ParamVector::ones(3);
    let pi = pi_series(&gd, &x, &OmegaSet::empty(), 0, 1000).unwrap();
    for d in pi.coefficients.keys() {
        if d.exponents.len() == 1 {
            assert_eq!(d.exponents[0].0, 2, "{d}");
        }
    }
}

fn two_paths(gd: &GroupData, x: &ParamVector, om: &OmegaSet, bound: u64, gmax: u32) {
    common::checks::two_paths(gd, x, om, bound, gmax).unwrap();
}

#[test]
fn convolution_matches_enumeration() {
    for f in [vec![2u64], vec![3], vec![4], vec![2, 2], vec![6]] {
        let gd = GroupData::new(&f).unwrap();
        two_paths(&gd, &ParamVector::ones(gd.class_count()), &OmegaSet::empty(), 1000, 0);
    }
    let (gd, x, om) = klein((1, 1));
    two_paths(&gd, &x, &om, 1000, 3);
    let (gd, x, om) = klein((3, 2));
    two_paths(&gd, &x, &om, 1000, 3);
    let gd = GroupData::new(&[6]).unwrap();
    let x = ParamVector::from_integers(&[5, 4, 3]).unwrap();
    two_paths(&gd, &x, &omega_of(&gd, &[&[3]]), 100_000, 2);
}

#[test]
fn summatory_totals_match_census() {
    let (gd, x, om) = klein((1, 1));
    let t = enumerate_census(CensusQuery::new(&gd, &x, &om, 2000).with_gamma_max(2), 1).unwrap();
    for g in 0..=2 {
        assert_eq!(pi_series(&gd, &x, &om, g, 2000).unwrap().total(), t.last().sur_at(g));
        assert_eq!(mu_series(&gd, &x, &om, g, 2000).unwrap().total(), t.last().hom_at(g));
    }
}

#[test]
fn sandwich_on_klein() {
    // With t = 1/2 the Omega primes only cost p^(1/2), so a smaller bound keeps the series small.
    for (t, bound) in [((1, 1), 1000), ((2, 1), 1000), ((1, 2), 60)] {
        let (gd, x, om) = klein(t);
        for g in 1..=2 {
            let mu = mu_series(&gd, &x, &om, g, bound).unwrap();
            let pi = pi_series(&gd, &x, &om, g, bound).unwrap();
            let psi = psi_series(&gd, &x, &om, g, bound).unwrap();
            assert!(mu.dominates(&pi), "{t:?} {g}");
            assert!(psi.dominates(&pi), "{t:?} {g}: {:?}", psi.violations_below(&pi));
            if t.0 > t.1 {
                // Every Omega-meeting tame prime is expensive, so no witness keeps delta at 0.
                assert!(matches!(tau_series(&gd, &x, &om, g, bound), Err(CensusError::WitnessNotFound { .. })));
                continue;
            }
            let tau = tau_series(&gd, &x, &om, g, bound).unwrap();
            assert!(pi.dominates(&tau), "{t:?} {g}: {:?}", pi.violations_below(&tau));
            assert!(psi.dominates(&tau));
            assert!(!tau.is_empty());
        }
    }
}

#[test]
fn psi_empty_without_admissible_partition() {
    let gd = GroupData::new(&[3, 3]).unwrap();
    let all: Vec<usize> = (1..=gd.class_count()).collect();
    let om = gd.omega_from_indices(&all).unwrap();
    let psi = psi_series(&gd, &ParamVector::ones(gd.class_count()), &om, 0, 1000).unwrap();
    assert!(psi.is_empty());
}

#[test]
fn psi_equals_pi_for_prime_cyclic_on_tame_support() {
    let gd = GroupData::new(&[3]).unwrap();
    let om = omega_of(&gd, &[&[1]]);
    let x = ParamVector::ones(1);
    for g in 1..=2 {
        let psi = psi_series(&gd, &x, &om, g, 5000).unwrap();
        let pi = pi_series(&gd, &x, &om, g, 5000).unwrap();
        let tame = |s: &GeneratingSeries| -> BTreeMap<IndexValue, u128> {
            s.coefficients
                .iter()
                .filter(|(d, _)| d.primes().all(|p| p != 3))
                .map(|(d, c)| (d.clone(), *c))
                .collect()
        };
        assert_eq!(tame(&psi), tame(&pi));
    }
}

#[test]
fn quadratic_tau() {
    let gd = GroupData::new(&[2]).unwrap();
    let om = omega_of(&gd, &[&[1]]);
    let x = ParamVector::ones(1);
    let anchor = tau_anchor(&gd, &x, &om, 1).unwrap();
    // The wild image at 2 already meets Omega; the anchor lives at 2 only.
    assert!(anchor.d0.primes().all(|p| p == 2));
    let tau = tau_series(&gd, &x, &om, 1, 1000).unwrap();
    let pi = pi_series(&gd, &x, &om, 1, 1000).unwrap();
    assert!(pi.dominates(&tau));
    assert!(!tau.is_empty());
    for d in tau.coefficients.keys() {
        let tame: Vec<u64> = d.primes().filter(|&p| p != 2).collect();
        assert_eq!(tame.len(), 1, "{d}");
        assert!(tame[0] > anchor.q);
    }
}

#[test]
fn tau_below_gamma_x_has_no_witness() {
    let gd = GroupData::new(&[2, 2, 2, 2, 2]).unwrap();
    let mut v = vec![(2u64, 1u64); gd.class_count()];
    let g1 = el(&gd, &[1, 0, 0, 0, 0]);
    v[gd.class_of(g1).unwrap()] = (1, 1);
    v[gd.class_of(el(&gd, &[0, 1, 0, 0, 0])).unwrap()] = (1, 1);
    let x = params(&gd, &v);
    let mask = abelian_census::ElementSet(gd.group.all().0 & !1 & !(1u64 << g1));
    let om = gd.validate_omega(mask).unwrap();
    assert!(matches!(tau_series(&gd, &x, &om, 1, 100), Err(CensusError::WitnessNotFound { .. })));
}

#[test]
fn dump_format() {
    let gd = GroupData::new(&[2]).unwrap();
    let mu = mu_series(&gd, &ParamVector::ones(1), &OmegaSet::empty(), 0, 7).unwrap();
    assert_eq!(mu.dump(), "1\t1\n2^1\t3\n2^1,3^1\t3\n3^1\t1\n5^1\t1\n");
}

#[test]
fn mobius_inversion_with_induced_omega() {
    let gd = GroupData::new(&[2, 4]).unwrap();
    let om = omega_of(&gd, &[&[0, 2]]);
    two_paths(&gd, &ParamVector::ones(gd.class_count()), &om, 500, 2);
}
