//! Brute-force census used as an independent reference.
//!
//! Every continuous homomorphism `prod_p Z_p^* -> G` with small invariant is
//! enumerated one by one as a tuple of local homomorphisms (generator images
//! for each prime's finite unit quotient). Images, the invariant and
//! surjectivity are recomputed here from element arithmetic alone; the
//! library is consulted only for group arithmetic and to label classes with
//! their parameter.

use std::collections::BTreeMap;

use abelian_census::group::{Elem, GroupData, OmegaSet, ParamVector};
use num_bigint::BigUint;
use num_traits::One;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleCounts {
    /// Key `Some(gamma)` for sliced homomorphisms, `None` for the unsliced bucket.
    pub hom: BTreeMap<Option<u32>, u128>,
    pub sur: BTreeMap<Option<u32>, u128>,
    /// Scaled exponent map -> (hom, sur), all slices together.
    pub coefficients: BTreeMap<Vec<(u64, u64)>, (u128, u128)>,
}

impl OracleCounts {
    pub fn total_hom(&self) -> u128 {
        self.hom.values().sum()
    }
    pub fn total_sur(&self) -> u128 {
        self.sur.values().sum()
    }
}

fn primes_upto(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Orders of the cyclic factors of the unit-group quotient relevant for `G`.
fn unit_quotient(p: u64, order: u64, exponent: u64) -> Vec<u64> {
    let mut v = Vec::new();
    if order % p == 0 {
        v.push(if p == 2 { 2 } else { gcd(p - 1, exponent) });
        let mut pv = 1;
        let mut e = exponent;
        while e % p == 0 {
            e /= p;
            pv *= p;
        }
        v.push(pv);
    } else {
        v.push(gcd(p - 1, exponent));
    }
    v
}

fn span(gd: &GroupData, gens: &[Elem]) -> u64 {
    let g = &gd.group;
    let mut set: u64 = 1;
    loop {
        let mut next = set;
        for a in 0..g.order() as u8 {
            if set >> a & 1 == 1 {
                for &b in gens {
                    next |= 1 << g.add(a, b);
                }
            }
        }
        if next == set {
            return set;
        }
        set = next;
    }
}

fn cyclic_mask(gd: &GroupData, e: Elem) -> u64 {
    span(gd, &[e])
}

/// `D * x(H)`: parameters of the classes whose cyclic subgroup is maximal among
/// cyclic subgroups of `H`.
fn scaled_x(gd: &GroupData, h: u64, x: &ParamVector) -> u64 {
    let elems: Vec<Elem> = (1..gd.group.order() as u8).filter(|&e| h >> e & 1 == 1).collect();
    let mut cyclics: Vec<(u64, Elem)> = Vec::new();
    for &e in &elems {
        let c = cyclic_mask(gd, e);
        if !cyclics.iter().any(|&(m, _)| m == c) {
            cyclics.push((c, e));
        }
    }
    cyclics
        .iter()
        .filter(|&&(c, _)| !cyclics.iter().any(|&(d, _)| d != c && c & d == c))
        .map(|&(_, e)| {
            let class = gd.class_of(e).unwrap();
            (x.values[class] * x.denom).to_integer()
        })
        .sum()
}

/// All local homomorphisms at `p`, as image subgroups (one entry per homomorphism).
fn local_images(gd: &GroupData, p: u64) -> Vec<u64> {
    let g = &gd.group;
    let quotient = unit_quotient(p, g.order() as u64, g.exponent());
    let mut out = Vec::new();
    let mut choice = vec![0u8; quotient.len()];
    loop {
        let ok = choice.iter().zip(&quotient).all(|(&e, &c)| g.mul(c, e) == 0);
        if ok {
            out.push(span(gd, &choice));
        }
        let mut j = 0;
        loop {
            if j == choice.len() {
                return out;
            }
            choice[j] += 1;
            if (choice[j] as usize) < g.order() {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
}

/// Census of all homomorphisms with invariant `< bound`.
pub fn brute_census(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, bound: u64) -> OracleCounts {
    let order = gd.group.order() as u64;
    let limit = BigUint::from(bound).pow(x.denom as u32);
    let full: u64 = if order == 64 { u64::MAX } else { (1u64 << order) - 1 };
    // A prime can only contribute if p^{D min x} < bound^D.
    let min_scaled = x.values.iter().map(|v| (v * x.denom).to_integer()).min().unwrap();
    let mut pmax = 1u64;
    while BigUint::from(pmax + 1).pow(min_scaled as u32) < limit {
        pmax += 1;
    }
    let per_prime: Vec<(u64, Vec<(u64, u64)>)> = primes_upto(pmax)
        .into_iter()
        .map(|p| {
            let imgs = local_images(gd, p).into_iter().map(|h| (h, scaled_x(gd, h, x))).collect();
            (p, imgs)
        })
        .collect();
    let mut out = OracleCounts::default();
    let mut stack: Vec<(u64, u64, u64)> = Vec::new();
    walk(gd, omega, &per_prime, 0, &BigUint::one(), &limit, &mut stack, full, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn walk(
    gd: &GroupData,
    omega: &OmegaSet,
    per_prime: &[(u64, Vec<(u64, u64)>)],
    i: usize,
    value: &BigUint,
    limit: &BigUint,
    stack: &mut Vec<(u64, u64, u64)>,
    full: u64,
    out: &mut OracleCounts,
) {
    if i == per_prime.len() {
        if value >= limit {
            return;
        }
        let order = gd.group.order() as u64;
        let mut tame = 0;
        let mut wild = false;
        for &(p, h, _) in stack.iter() {
            if h & omega.mask.0 != 0 {
                if order % p == 0 {
                    wild = true;
                } else {
                    tame += 1;
                }
            }
        }
        let key = if tame == 0 && wild { None } else { Some(tame) };
        let joined = stack.iter().fold(1u64, |acc, &(_, h, _)| {
            let gens: Vec<Elem> = (0..order as u8).filter(|&e| (acc | h) >> e & 1 == 1).collect();
            span(gd, &gens)
        });
        let surj = joined == full;
        *out.hom.entry(key).or_default() += 1;
        if surj {
            *out.sur.entry(key).or_default() += 1;
        }
        let exps: Vec<(u64, u64)> = stack.iter().filter(|s| s.2 > 0).map(|&(p, _, e)| (p, e)).collect();
        let c = out.coefficients.entry(exps).or_default();
        c.0 += 1;
        if surj {
            c.1 += 1;
        }
        return;
    }
    let (p, imgs) = &per_prime[i];
    for &(h, e) in imgs {
        let v = value * BigUint::from(*p).pow(e as u32);
        if &v >= limit {
            continue;
        }
        stack.push((*p, h, e));
        walk(gd, omega, per_prime, i + 1, &v, limit, stack, full, out);
        stack.pop();
    }
}
