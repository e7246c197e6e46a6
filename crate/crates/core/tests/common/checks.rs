//! Shared exact checks. Each returns a description of the first violation
//! instead of panicking, so the acceptance runner can report it.

use std::collections::BTreeMap;

use abelian_census::arith::{euler_phi, gcd, is_prime};
use abelian_census::group::{ElementSet, GroupData, OmegaSet, ParamVector};
use abelian_census::local::{hom_count, sur_count, wild_images, SurTable};
use abelian_census::profile::{coefficients, enumerate_census, CensusQuery, IndexValue, Mode};
use abelian_census::series::{mu_slices, pi_slices_by_inversion};
use num_rational::Ratio;

use super::oracle::brute_census;
use super::{el, params};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Invariant factor lists `d1 | d2 | ... ` of every abelian group of order in `2..=max`.
pub fn all_groups(max: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, order: u64, max: u64, out: &mut Vec<Vec<u64>>) {
        let last = prefix.last().copied().unwrap_or(1);
        let mut d = last.max(2);
        while order * d <= max {
            if d % last == 0 {
                prefix.push(d);
                out.push(prefix.clone());
                rec(prefix, order * d, max, out);
                prefix.pop();
            }
            d += 1;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, max, &mut out);
    out
}

pub fn p_part(n: u64, p: u64) -> u64 {
    let mut n = n;
    let mut out = 1;
    while n % p == 0 {
        n /= p;
        out *= p;
    }
    out
}

/// Elements of `h` killed by `c`.
pub fn torsion_in(gd: &GroupData, h: ElementSet, c: u64) -> u64 {
    h.iter().filter(|&e| gd.group.mul(c, e) == gd.group.identity()).count() as u64
}

/// Homomorphisms from the wild unit quotient at `p` into `h`, counted from the
/// cyclic decomposition of `Z_p^*` modulo `exp(G)`-th powers.
pub fn wild_hom_reference(gd: &GroupData, p: u64, h: ElementSet) -> u64 {
    let exp = gd.group.exponent();
    let torsion = if p == 2 { 2 } else { gcd(p - 1, exp) };
    torsion_in(gd, h, torsion) * torsion_in(gd, h, p_part(exp, p))
}

/// Unions of whole power classes chosen by the bits of `pick`.
pub fn class_union(gd: &GroupData, pick: u64) -> (ElementSet, usize) {
    let mut mask = ElementSet::EMPTY;
    let mut count = 0;
    for (i, c) in gd.classes.iter().enumerate() {
        if pick >> (i % 64) & 1 == 1 {
            mask = mask.union(c.mask);
            count += 1;
        }
    }
    (mask, count)
}

pub fn small_groups() -> Vec<Vec<u64>> {
    all_groups(16)
}

/// Brute force `delta_x`: every choice of attainable wild images and every
/// subset of the expensive cyclic subgroups; non-xi and cheap subgroups are
/// always included since they never cost anything.
pub fn delta_reference(gd: &GroupData, x: &ParamVector, omega: &OmegaSet) -> u32 {
    let n = gd.group.order() as u64;
    let x1 = x.min();
    let mut base = ElementSet::singleton(gd.group.identity());
    let mut expensive = Vec::new();
    for c in &gd.classes {
        let elements = gd.lattice.get(c.generated).elements;
        if elements.meets(omega.mask) && x.values[c.index] > x1 {
            expensive.push(elements);
        } else {
            base = gd.group.span(base.union(elements));
        }
    }
    let mut wild_options: Vec<ElementSet> = vec![base];
    for p in (2..=n).filter(|&p| n % p == 0 && is_prime(p)) {
        let images = wild_images(p, gd).unwrap();
        let mut next = Vec::new();
        for &w in &wild_options {
            for &h in &images {
                next.push(gd.group.span(w.union(gd.lattice.get(h).elements)));
            }
        }
        next.sort_by_key(|s| s.0);
        next.dedup();
        wild_options = next;
    }
    let all = gd.group.all();
    let mut best = u32::MAX;
    for subset in 0u64..(1 << expensive.len()) {
        let size = subset.count_ones();
        if size >= best {
            continue;
        }
        let extra = expensive
            .iter()
            .enumerate()
            .filter(|(i, _)| subset >> i & 1 == 1)
            .fold(ElementSet::EMPTY, |acc, (_, &s)| acc.union(s));
        if wild_options.iter().any(|&w| gd.group.span(w.union(extra)) == all) {
            best = size;
        }
    }
    best
}

/// Parameters with the least value `min` on the classes outside `support`
/// and `min + bump_i` on the classes inside.
pub fn params_with_support(gd: &GroupData, support: u64, min: Ratio<u64>, bumps: &[u64]) -> ParamVector {
    let values = (0..gd.class_count())
        .map(|i| {
            if support >> i & 1 == 1 {
                min + Ratio::new(bumps[i % bumps.len()], 2)
            } else {
                min
            }
        })
        .collect();
    ParamVector::for_group(gd, values).unwrap()
}

pub fn omega_from_bits(gd: &GroupData, bits: u64) -> OmegaSet {
    gd.validate_omega(class_union(gd, bits).0).unwrap()
}

/// Supports with at least one class at the minimum.
pub fn support_bits(gd: &GroupData, bits: u64) -> u64 {
    let all = (1u64 << gd.class_count()) - 1;
    let s = bits & all;
    if s == all {
        s & !1
    } else {
        s
    }
}


/// Sur counts summed over subgroups equal hom counts at every wild prime,
/// and hom counts match the unit-group decomposition.
pub fn mobius_consistency(groups: &[Vec<u64>]) -> Check {
    for factors in groups {
        let gd = GroupData::new(factors).map_err(|e| e.to_string())?;
        let n = gd.group.order() as u64;
        for p in (2..=n).filter(|&p| n % p == 0 && is_prime(p)) {
            for h in gd.lattice.iter() {
                let below: u64 = gd
                    .lattice
                    .iter()
                    .filter(|k| k.elements.is_subset(h.elements))
                    .map(|k| sur_count(p, k.id, &gd))
                    .sum();
                let hom = hom_count(p, h.id, &gd);
                ensure!(below == hom, "G={factors:?} p={p} H={:?}: {below} != {hom}", h.elements);
                let reference = wild_hom_reference(&gd, p, h.elements);
                ensure!(hom == reference, "G={factors:?} p={p} H={:?}: hom {hom}, expected {reference}", h.elements);
            }
        }
    }
    Ok(())
}

/// Tame counts are `phi(|H|)` for cyclic `H` with `|H| | p - 1`, zero
/// otherwise, and agree with the per-residue table.
pub fn tame_periodicity(groups: &[Vec<u64>], prime_limit: u64) -> Check {
    let primes: Vec<u64> = (3..prime_limit).filter(|&p| is_prime(p)).collect();
    for factors in groups {
        let gd = GroupData::new(factors).map_err(|e| e.to_string())?;
        let n = gd.group.order() as u64;
        let table = SurTable::new(&gd);
        for &p in primes.iter().filter(|&&p| (2 * n) % p != 0) {
            let by_residue = table.tame_residue(p % n).ok_or(format!("no residue table for {p}"))?;
            for h in gd.lattice.iter() {
                let expected = if h.is_cyclic() && (p - 1) % h.order() as u64 == 0 {
                    euler_phi(h.order() as u64)
                } else {
                    0
                };
                let got = sur_count(p, h.id, &gd);
                ensure!(got == expected, "G={factors:?} p={p} H={:?}: {got} != {expected}", h.elements);
                ensure!(by_residue[h.id] == expected, "G={factors:?} residue {} H={:?}", p % n, h.elements);
            }
        }
    }
    Ok(())
}

/// Summing a cyclic subgroup's tame count over all unit residues gives `phi(|G|)`.
pub fn residue_sums(groups: &[Vec<u64>]) -> Check {
    for factors in groups {
        let gd = GroupData::new(factors).map_err(|e| e.to_string())?;
        let n = gd.group.order() as u64;
        let table = SurTable::new(&gd);
        for h in gd.lattice.iter().filter(|h| h.is_cyclic()) {
            let sum: u64 = (1..n.max(2))
                .filter(|&r| gcd(r, n) == 1)
                .map(|r| table.tame_residue(r).unwrap()[h.id])
                .sum();
            ensure!(sum == euler_phi(n), "G={factors:?} H={:?}: {sum}", h.elements);
        }
    }
    Ok(())
}

/// Euler convolution (mu directly, pi by Moebius inversion) against profile
/// enumeration, coefficient by coefficient and slice by slice.
pub fn two_paths(gd: &GroupData, x: &ParamVector, om: &OmegaSet, bound: u64, gmax: u32) -> Check {
    let enumerated = coefficients(CensusQuery::new(gd, x, om, bound).with_gamma_max(gmax), 1).map_err(|e| e.to_string())?;
    let mu = mu_slices(gd, x, om, gd.lattice.whole(), bound, gmax).map_err(|e| e.to_string())?;
    let pi = pi_slices_by_inversion(gd, x, om, bound, gmax).map_err(|e| e.to_string())?;
    for (mode, series) in [(Mode::Hom, &mu), (Mode::Sur, &pi)] {
        for (slice, s) in series {
            let expected: BTreeMap<IndexValue, u128> = enumerated
                .iter()
                .map(|(d, c)| (d.clone(), c.get(mode, Some(*slice))))
                .filter(|(_, c)| *c > 0)
                .collect();
            if s.coefficients != expected {
                let bad = expected
                    .iter()
                    .find(|(d, c)| s.get(d) != **c)
                    .map(|(d, c)| format!("{d}: {c} vs {}", s.get(d)))
                    .or_else(|| s.coefficients.keys().find(|d| !expected.contains_key(*d)).map(|d| format!("extra {d}")));
                return Err(format!("{:?} {mode:?} {slice:?}: {}", gd.group.invariant_factors(), bad.unwrap_or_default()));
            }
        }
    }
    Ok(())
}

/// Census slices, totals and coefficients against the brute-force oracle.
pub fn oracle_agreement(gd: &GroupData, x: &ParamVector, om: &OmegaSet, bound: u64) -> Check {
    let g = gd.group.invariant_factors().to_vec();
    let o = brute_census(gd, x, om, bound);
    let t = enumerate_census(CensusQuery::new(gd, x, om, bound).with_gamma_max(3), 1).map_err(|e| e.to_string())?;
    let row = t.last();
    ensure!(row.total_hom() == o.total_hom(), "{g:?} X={bound}: hom {} vs {}", row.total_hom(), o.total_hom());
    ensure!(row.total_sur() == o.total_sur(), "{g:?} X={bound}: sur {} vs {}", row.total_sur(), o.total_sur());
    for k in 0..row.sur.len() as u32 {
        ensure!(row.sur_at(k) == o.sur.get(&Some(k)).copied().unwrap_or(0), "{g:?} X={bound} sur slice {k}");
        ensure!(row.hom_at(k) == o.hom.get(&Some(k)).copied().unwrap_or(0), "{g:?} X={bound} hom slice {k}");
    }
    ensure!(row.unsliced_sur == o.sur.get(&None).copied().unwrap_or(0), "{g:?} X={bound} unsliced sur");
    ensure!(row.unsliced_hom == o.hom.get(&None).copied().unwrap_or(0), "{g:?} X={bound} unsliced hom");
    let coeffs = coefficients(CensusQuery::new(gd, x, om, bound), 1).map_err(|e| e.to_string())?;
    for (k, (h, s)) in &o.coefficients {
        let got = coeffs.get(&IndexValue::from_exponents(k.clone(), x.denom)).cloned().unwrap_or_default();
        ensure!(
            (got.get(Mode::Hom, None), got.get(Mode::Sur, None)) == (*h, *s),
            "{g:?} X={bound} coefficient {k:?}"
        );
    }
    ensure!(coeffs.len() == o.coefficients.len(), "{g:?} X={bound}: coefficient supports differ");
    Ok(())
}

/// C2^n with parameter 1 on g1 and g2, t elsewhere, and Omega = G \ {1, g1}.
pub fn elementary_example(n: usize, t: (u64, u64)) -> (GroupData, ParamVector, OmegaSet) {
    let gd = GroupData::new(&vec![2; n]).unwrap();
    let mut e1 = vec![0; n];
    e1[0] = 1;
    let mut e2 = vec![0; n];
    e2[1] = 1;
    let g1 = el(&gd, &e1);
    let g2 = el(&gd, &e2);
    let mut v = vec![t; gd.class_count()];
    v[gd.class_of(g1).unwrap()] = (1, 1);
    v[gd.class_of(g2).unwrap()] = (1, 1);
    let x = params(&gd, &v);
    let mask = ElementSet(gd.group.all().0 & !1 & !(1u64 << g1));
    let om = gd.validate_omega(mask).unwrap();
    (gd, x, om)
}
