//! Homomorphisms and surjections from the unit group of `Q_p` into subgroups of `G`.
//!
//! Every homomorphism `Z_p^* -> G` factors through a finite quotient, the
//! [`LocalUnitModel`]. For `p` not dividing `|G|` this is the cyclic group of
//! order `gcd(p - 1, exp G)`; for `p | |G|` it is `C_{p-1} x C_{p^v}` (odd `p`)
//! or `C_2 x C_{2^v}` (`p = 2`) with `v` the valuation of `exp G`.
//!
//! Surjection counts come from hom counts by inclusion-exclusion over the
//! subgroup lattice: `Sur(H) = Hom(H) - sum_{K < H} Sur(K)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::arith::{gcd, is_prime, valuation};
use crate::error::{CensusError, Result};
use crate::group::{GroupData, SubgroupId};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalUnitModel {
    pub p: u64,
    /// Orders of the cyclic factors of the finite quotient (factors of order 1 dropped).
    pub cyclic_orders: Vec<u64>,
    pub wild: bool,
}

impl LocalUnitModel {
    pub fn new(p: u64, gd: &GroupData) -> Self {
        let n = gd.group.order() as u64;
        let exp = gd.group.exponent();
        let wild = n % p == 0;
        let mut orders = Vec::new();
        if wild {
            let v = valuation(exp, p);
            let tame = if p == 2 { 2 } else { gcd(p - 1, exp) };
            orders.push(tame);
            orders.push(p.pow(v));
        } else {
            orders.push(gcd(p - 1, exp));
        }
        orders.retain(|&o| o > 1);
        LocalUnitModel {
            p,
            cyclic_orders: orders,
            wild,
        }
    }
}

/// Number of homomorphisms from the model into subgroup `h`:
/// the product over cyclic factors `C_c` of `#{g in H : c g = 0}`.
pub fn hom_count_model(model: &LocalUnitModel, h: SubgroupId, gd: &GroupData) -> u64 {
    let elems = gd.lattice.get(h).elements;
    model
        .cyclic_orders
        .iter()
        .map(|&c| elems.iter().filter(|&g| c % gd.group.order_of(g) == 0).count() as u64)
        .product()
}

pub fn hom_count(p: u64, h: SubgroupId, gd: &GroupData) -> u64 {
    hom_count_model(&LocalUnitModel::new(p, gd), h, gd)
}

/// Surjection counts onto every subgroup for one model, indexed by subgroup id.
pub fn sur_vector(model: &LocalUnitModel, gd: &GroupData) -> Vec<u64> {
    let n = gd.lattice.len();
    let hom: Vec<u64> = (0..n).map(|h| hom_count_model(model, h, gd)).collect();
    let mut sur = vec![0i64; n];
    // Lattice order lists subgroups by size, so proper subgroups come first.
    for h in 0..n {
        let mask = gd.lattice.get(h).elements;
        let below: i64 = (0..h)
            .filter(|&k| gd.lattice.get(k).elements.is_subset(mask))
            .map(|k| sur[k])
            .sum();
        sur[h] = hom[h] as i64 - below;
        debug_assert!(sur[h] >= 0);
    }
    sur.into_iter().map(|s| s as u64).collect()
}

pub fn sur_count(p: u64, h: SubgroupId, gd: &GroupData) -> u64 {
    sur_vector(&LocalUnitModel::new(p, gd), gd)[h]
}

/// Subgroups that occur as the image of some homomorphism from `Z_p^*`.
pub fn attainable_images(p: u64, gd: &GroupData) -> Vec<SubgroupId> {
    let sur = sur_vector(&LocalUnitModel::new(p, gd), gd);
    (0..sur.len()).filter(|&h| sur[h] > 0).collect()
}

/// Images at a prime dividing `|G|`; the trivial subgroup is always among them.
pub fn wild_images(p: u64, gd: &GroupData) -> Result<Vec<SubgroupId>> {
    if !is_prime(p) {
        return Err(CensusError::NotPrime(p));
    }
    if gd.group.order() as u64 % p != 0 {
        return Err(CensusError::NotWild(p));
    }
    Ok(attainable_images(p, gd))
}

/// Memoised surjection counts. Tame entries are keyed by `p mod |G|`,
/// wild entries by the prime itself.
#[derive(Clone, Debug)]
pub struct SurTable {
    modulus: u64,
    tame: Vec<Option<Arc<Vec<u64>>>>,
    wild: HashMap<u64, Arc<Vec<u64>>>,
}

impl SurTable {
    pub fn new(gd: &GroupData) -> Self {
        let modulus = gd.group.order() as u64;
        let mut tame = vec![None; modulus as usize];
        let mut cache: HashMap<Vec<u64>, Arc<Vec<u64>>> = HashMap::new();
        for r in 0..modulus {
            if gcd(r, modulus) != 1 {
                continue;
            }
            // Any prime in this residue class has the same model; use the residue
            // arithmetic directly rather than searching for a representative.
            let orders: Vec<u64> = [gcd((r + modulus - 1) % modulus, gd.group.exponent())]
                .into_iter()
                .map(|g| if g == 0 { gd.group.exponent() } else { g })
                .filter(|&o| o > 1)
                .collect();
            let v = cache
                .entry(orders.clone())
                .or_insert_with(|| {
                    let model = LocalUnitModel {
                        p: 0,
                        cyclic_orders: orders,
                        wild: false,
                    };
                    Arc::new(sur_vector(&model, gd))
                })
                .clone();
            tame[r as usize] = Some(v);
        }
        let mut wild = HashMap::new();
        for (p, _) in crate::arith::factorize(modulus) {
            wild.insert(p, Arc::new(sur_vector(&LocalUnitModel::new(p, gd), gd)));
        }
        SurTable {
            modulus,
            tame,
            wild,
        }
    }

    pub fn is_wild(&self, p: u64) -> bool {
        self.modulus % p == 0
    }

    /// Surjection counts at prime `p` for every subgroup.
    pub fn at(&self, p: u64) -> &[u64] {
        if let Some(v) = self.wild.get(&p) {
            v
        } else {
            self.tame[(p % self.modulus) as usize]
                .as_deref()
                .expect("tame prime is a unit mod |G|")
        }
    }

    pub fn sur(&self, p: u64, h: SubgroupId) -> u64 {
        self.at(p)[h]
    }

    /// Tame counts for a unit residue class mod `|G|`.
    pub fn tame_residue(&self, r: u64) -> Option<&[u64]> {
        self.tame.get(r as usize).and_then(|o| o.as_deref().map(|v| v.as_slice()))
    }

    pub fn wild_primes(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.wild.keys().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}
