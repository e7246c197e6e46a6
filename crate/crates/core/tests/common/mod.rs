#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use abelian_census::group::{GroupData, OmegaSet, ParamVector};
use num_rational::Ratio;

/// Element with the given coordinates.
pub fn el(gd: &GroupData, coords: &[u64]) -> u8 {
    gd.group.element(coords).unwrap()
}

/// Cyclic subgroup generated by the element with the given coordinates.
pub fn cyc(gd: &GroupData, coords: &[u64]) -> usize {
    gd.lattice.id_of(gd.group.cyclic(el(gd, coords))).unwrap()
}

pub fn params(gd: &GroupData, v: &[(u64, u64)]) -> ParamVector {
    ParamVector::for_group(gd, v.iter().map(|&(n, d)| Ratio::new(n, d)).collect()).unwrap()
}

/// Omega generated (under invertible powering) by the listed elements.
pub fn omega_of(gd: &GroupData, elems: &[&[u64]]) -> OmegaSet {
    let mut mask = abelian_census::ElementSet::EMPTY;
    for c in elems {
        let e = el(gd, c);
        mask = mask.union(gd.classes[gd.class_of(e).unwrap()].mask);
    }
    gd.validate_omega(mask).unwrap()
}

/// The C2 x C2 setup with Omega = {g2, g1g2} and parameters (1, t, t).
pub fn klein(t: (u64, u64)) -> (GroupData, ParamVector, OmegaSet) {
    let gd = GroupData::new(&[2, 2]).unwrap();
    let om = omega_of(&gd, &[&[0, 1], &[1, 1]]);
    let mut v = vec![(0, 1); 3];
    v[gd.class_of(el(&gd, &[1, 0])).unwrap()] = (1, 1);
    v[gd.class_of(el(&gd, &[0, 1])).unwrap()] = t;
    v[gd.class_of(el(&gd, &[1, 1])).unwrap()] = t;
    let x = params(&gd, &v);
    (gd, x, om)
}
