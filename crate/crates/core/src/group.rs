//! Finite abelian groups of order at most 64.
//!
//! Elements are stored as indices into a mixed-radix enumeration in which the
//! first coordinate varies fastest, so `(1,0)` precedes `(0,1)`. Element sets
//! are `u64` bitmasks, which is what bounds the supported order.
//!
//! The module also carries the combinatorics built on top of the group: the
//! subgroup lattice, classes under invertible powering (`g ~ h` iff each is a
//! power of the other) with their containment poset, parameter vectors over
//! the classes, and the `x(H)` / `beta` bookkeeping.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, factorize, gcd, lcm};
use crate::error::{CensusError, Result};

/// Index of an element in the canonical enumeration.
pub type Elem = u8;

/// Index of a subgroup in [`SubgroupLattice`].
pub type SubgroupId = usize;

/// Default cap on the number of subgroups (C2^6 has 2825).
pub const DEFAULT_LATTICE_CAP: usize = 4096;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ElementSet(pub u64);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn singleton(e: Elem) -> Self {
        ElementSet(1u64 << e)
    }

    pub fn contains(self, e: Elem) -> bool {
        self.0 >> e & 1 == 1
    }

    pub fn insert(&mut self, e: Elem) {
        self.0 |= 1u64 << e;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn meets(self, other: ElementSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Elem> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as Elem;
                bits &= bits - 1;
                Some(e)
            }
        })
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Coordinate form of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<u64>,
}

#[derive(Clone)]
pub struct AbelianGroup {
    factors: Vec<u64>,
    order: usize,
    exponent: u64,
    add: Vec<Elem>,
    neg: Vec<Elem>,
    elem_order: Vec<u64>,
}

impl fmt::Debug for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AbelianGroup{:?}", self.factors)
    }
}

/// Rewrites an arbitrary list of cyclic orders as invariant factors
/// `d1 | d2 | ... | dk` via the primary decomposition.
pub fn invariant_factors(orders: &[u64]) -> Vec<u64> {
    let mut by_prime: HashMap<u64, Vec<u32>> = HashMap::new();
    for &d in orders {
        for (p, e) in factorize(d) {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let rank = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; rank];
    for (p, mut exps) in by_prime {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        for (slot, e) in exps.into_iter().enumerate() {
            out[rank - 1 - slot] *= p.pow(e);
        }
    }
    out
}

impl AbelianGroup {
    /// Builds the group `C_{d1} x ... x C_{dk}`. Lists that are not a
    /// divisibility chain are normalised to invariant factors first, and the
    /// element coordinates then refer to the normalised factors.
    pub fn new(factors: &[u64]) -> Result<Self> {
        if factors.is_empty() {
            return Err(CensusError::EmptyFactors);
        }
        if let Some(&bad) = factors.iter().find(|&&d| d < 2) {
            return Err(CensusError::InvalidFactor(bad));
        }
        let order: u64 = factors
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d))
            .unwrap_or(u64::MAX);
        if order > 64 {
            return Err(CensusError::GroupTooLarge(order));
        }
        let factors = invariant_factors(factors);
        let order = order as usize;
        let exponent = *factors.last().unwrap();

        let mut coords = Vec::with_capacity(order);
        for idx in 0..order {
            coords.push(Self::decode(&factors, idx));
        }
        let encode = |c: &[u64]| -> usize {
            let mut idx = 0usize;
            for (i, &d) in factors.iter().enumerate().rev() {
                idx = idx * d as usize + c[i] as usize;
            }
            idx
        };
        let mut add = vec![0; order * order];
        let mut neg = vec![0; order];
        let mut elem_order = vec![1; order];
        for a in 0..order {
            let ca = &coords[a];
            let na: Vec<u64> = ca
                .iter()
                .zip(&factors)
                .map(|(&x, &d)| (d - x) % d)
                .collect();
            neg[a] = encode(&na) as Elem;
            elem_order[a] = ca
                .iter()
                .zip(&factors)
                .map(|(&x, &d)| d / gcd(x, d))
                .fold(1, lcm);
            for b in 0..order {
                let s: Vec<u64> = ca
                    .iter()
                    .zip(&coords[b])
                    .zip(&factors)
                    .map(|((&x, &y), &d)| (x + y) % d)
                    .collect();
                add[a * order + b] = encode(&s) as Elem;
            }
        }
        Ok(AbelianGroup {
            factors,
            order,
            exponent,
            add,
            neg,
            elem_order,
        })
    }

    fn decode(factors: &[u64], mut idx: usize) -> Vec<u64> {
        factors
            .iter()
            .map(|&d| {
                let c = idx as u64 % d;
                idx /= d as usize;
                c
            })
            .collect()
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn identity(&self) -> Elem {
        0
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    pub fn all(&self) -> ElementSet {
        if self.order == 64 {
            ElementSet(u64::MAX)
        } else {
            ElementSet((1u64 << self.order) - 1)
        }
    }

    pub fn coords(&self, e: Elem) -> GroupElement {
        GroupElement {
            coords: Self::decode(&self.factors, e as usize),
        }
    }

    pub fn element(&self, coords: &[u64]) -> Result<Elem> {
        if coords.len() != self.factors.len() {
            return Err(CensusError::CoordinateLength {
                expected: self.factors.len(),
                got: coords.len(),
            });
        }
        let mut idx = 0usize;
        for (i, &d) in self.factors.iter().enumerate().rev() {
            idx = idx * d as usize + (coords[i] % d) as usize;
        }
        Ok(idx as Elem)
    }

    /// The `i`-th standard generator (coordinate vector with a single 1).
    pub fn generator(&self, i: usize) -> Elem {
        let mut c = vec![0; self.factors.len()];
        c[i] = 1;
        self.element(&c).expect("in range")
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.order + b as usize]
    }

    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    pub fn mul(&self, k: u64, a: Elem) -> Elem {
        let k = k % self.elem_order[a as usize];
        let mut acc = 0;
        for _ in 0..k {
            acc = self.add(acc, a);
        }
        acc
    }

    /// Order r(g) of an element.
    pub fn order_of(&self, a: Elem) -> u64 {
        self.elem_order[a as usize]
    }

    pub fn cyclic(&self, a: Elem) -> ElementSet {
        let mut s = ElementSet::singleton(0);
        let mut cur = a;
        while cur != 0 {
            s.insert(cur);
            cur = self.add(cur, a);
        }
        s
    }

    /// Sum set `A + B`; for subgroups this is the subgroup they generate.
    pub fn sumset(&self, a: ElementSet, b: ElementSet) -> ElementSet {
        let mut out = ElementSet::EMPTY;
        for x in a.iter() {
            let row = &self.add[x as usize * self.order..(x as usize + 1) * self.order];
            for y in b.iter() {
                out.insert(row[y as usize]);
            }
        }
        out
    }

    /// Subgroup generated by an arbitrary element set.
    pub fn span(&self, gens: ElementSet) -> ElementSet {
        gens.iter()
            .fold(ElementSet::singleton(0), |acc, g| self.sumset(acc, self.cyclic(g)))
    }

    pub fn is_subgroup(&self, s: ElementSet) -> bool {
        s.contains(0) && self.sumset(s, s) == s
    }
}

#[derive(Clone, Debug)]
pub struct Subgroup {
    pub id: SubgroupId,
    pub elements: ElementSet,
    /// A generating set of minimum size.
    pub generators: Vec<Elem>,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_cyclic(&self) -> bool {
        self.generators.len() <= 1
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct SubgroupLattice {
    subgroups: Vec<Subgroup>,
    index: HashMap<u64, SubgroupId>,
}

impl SubgroupLattice {
    /// All subgroups, found by joining cyclic subgroups level by level. A
    /// subgroup first appears at the level equal to its minimal number of
    /// generators, which gives the minimal generating set for free.
    pub fn build(group: &AbelianGroup, cap: usize) -> Result<Self> {
        let mut cyclic: Vec<(ElementSet, Elem)> = Vec::new();
        let mut seen_cyclic: HashMap<u64, ()> = HashMap::new();
        for e in group.elements().skip(1) {
            let c = group.cyclic(e);
            if seen_cyclic.insert(c.0, ()).is_none() {
                cyclic.push((c, e));
            }
        }
        let trivial = ElementSet::singleton(0);
        let mut found: HashMap<u64, Vec<Elem>> = HashMap::new();
        found.insert(trivial.0, Vec::new());
        let mut level: Vec<ElementSet> = vec![trivial];
        while !level.is_empty() {
            let mut next = Vec::new();
            for s in &level {
                let gens = found[&s.0].clone();
                for &(c, g) in &cyclic {
                    if c.is_subset(*s) {
                        continue;
                    }
                    let j = group.sumset(*s, c);
                    if !found.contains_key(&j.0) {
                        let mut gj = gens.clone();
                        gj.push(g);
                        found.insert(j.0, gj);
                        next.push(j);
                        if found.len() > cap {
                            return Err(CensusError::LatticeTooLarge(cap));
                        }
                    }
                }
            }
            level = next;
        }
        let mut list: Vec<(ElementSet, Vec<Elem>)> = found
            .into_iter()
            .map(|(m, g)| (ElementSet(m), g))
            .collect();
        list.sort_by_key(|(m, _)| (m.len(), m.0));
        let mut subgroups = Vec::with_capacity(list.len());
        let mut index = HashMap::with_capacity(list.len());
        for (id, (elements, generators)) in list.into_iter().enumerate() {
            index.insert(elements.0, id);
            subgroups.push(Subgroup {
                id,
                elements,
                generators,
            });
        }
        Ok(SubgroupLattice { subgroups, index })
    }

    pub fn len(&self) -> usize {
        self.subgroups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgroups.is_empty()
    }

    pub fn get(&self, id: SubgroupId) -> &Subgroup {
        &self.subgroups[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Subgroup> {
        self.subgroups.iter()
    }

    pub fn id_of(&self, elements: ElementSet) -> Option<SubgroupId> {
        self.index.get(&elements.0).copied()
    }

    pub fn trivial(&self) -> SubgroupId {
        0
    }

    pub fn whole(&self) -> SubgroupId {
        self.subgroups.len() - 1
    }

    /// Subgroups of `h` (including `h`), in lattice order.
    pub fn subgroups_of(&self, h: SubgroupId) -> impl Iterator<Item = SubgroupId> + '_ {
        let mask = self.subgroups[h].elements;
        self.subgroups
            .iter()
            .filter(move |s| s.elements.is_subset(mask))
            .map(|s| s.id)
    }
}

/// One class of non-identity elements under invertible powering.
#[derive(Clone, Debug)]
pub struct PowerClass {
    /// Zero-based position in the class list; user-facing indices add one.
    pub index: usize,
    pub members: Vec<Elem>,
    pub mask: ElementSet,
    /// The cyclic subgroup generated by any member.
    pub generated: SubgroupId,
}

/// Containment order on classes: `i <= j` iff `H_i` is contained in `H_j`.
#[derive(Clone, Debug)]
pub struct ClassPoset {
    n: usize,
    rel: Vec<bool>,
}

impl ClassPoset {
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.rel[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Classes in `set` that are maximal within `set`.
    pub fn maximal_in(&self, set: &[usize]) -> Vec<usize> {
        set.iter()
            .copied()
            .filter(|&i| !set.iter().any(|&j| j != i && self.le(i, j)))
            .collect()
    }
}

/// A group together with its lattice, classes and class poset.
#[derive(Clone, Debug)]
pub struct GroupData {
    pub group: AbelianGroup,
    pub lattice: SubgroupLattice,
    pub classes: Vec<PowerClass>,
    pub poset: ClassPoset,
    class_of_element: Vec<Option<usize>>,
    class_of_subgroup: Vec<Option<usize>>,
}

impl GroupData {
    pub fn new(factors: &[u64]) -> Result<Self> {
        Self::with_cap(factors, DEFAULT_LATTICE_CAP)
    }

    pub fn with_cap(factors: &[u64], cap: usize) -> Result<Self> {
        let group = AbelianGroup::new(factors)?;
        let lattice = SubgroupLattice::build(&group, cap)?;
        let (classes, poset) = power_classes(&group, &lattice);
        let mut class_of_element = vec![None; group.order()];
        let mut class_of_subgroup = vec![None; lattice.len()];
        for c in &classes {
            for &m in &c.members {
                class_of_element[m as usize] = Some(c.index);
            }
            class_of_subgroup[c.generated] = Some(c.index);
        }
        Ok(GroupData {
            group,
            lattice,
            classes,
            poset,
            class_of_element,
            class_of_subgroup,
        })
    }

    /// Number of classes `l`.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, e: Elem) -> Option<usize> {
        self.class_of_element[e as usize]
    }

    /// The class whose generated subgroup is `h`, if `h` is non-trivial cyclic.
    pub fn class_of_cyclic(&self, h: SubgroupId) -> Option<usize> {
        self.class_of_subgroup[h]
    }

    /// Classes contained in subgroup `h`.
    pub fn classes_in(&self, h: SubgroupId) -> Vec<usize> {
        let mask = self.lattice.get(h).elements;
        self.classes
            .iter()
            .filter(|c| c.mask.is_subset(mask))
            .map(|c| c.index)
            .collect()
    }

    /// Maximal classes of `h`; they index the maximal cyclic subgroups of `h`.
    pub fn maximal_classes(&self, h: SubgroupId) -> Vec<usize> {
        self.poset.maximal_in(&self.classes_in(h))
    }

    /// `x(H)`: sum of the parameters of the maximal classes inside `H`.
    pub fn x_of_subgroup(&self, h: SubgroupId, x: &ParamVector) -> Ratio<u64> {
        self.maximal_classes(h)
            .into_iter()
            .fold(Ratio::zero(), |acc, i| acc + x.values[i])
    }

    /// Join of two subgroups.
    pub fn join(&self, a: SubgroupId, b: SubgroupId) -> SubgroupId {
        let s = self
            .group
            .sumset(self.lattice.get(a).elements, self.lattice.get(b).elements);
        self.lattice.id_of(s).expect("lattice is complete")
    }

    /// Subgroup generated by a collection of subgroups.
    pub fn join_all(&self, ids: impl IntoIterator<Item = SubgroupId>) -> SubgroupId {
        ids.into_iter()
            .fold(self.lattice.trivial(), |acc, h| self.join(acc, h))
    }

    /// Cyclic non-trivial subgroups, in lattice order.
    pub fn cyclic_subgroups(&self) -> Vec<SubgroupId> {
        self.lattice
            .iter()
            .filter(|s| s.is_cyclic() && !s.is_trivial())
            .map(|s| s.id)
            .collect()
    }

    /// beta(Lambda) = sum over non-identity g in Lambda of 1/phi(r(g)).
    pub fn beta_of_class_set(&self, lambda: ElementSet) -> Result<u64> {
        let lambda = ElementSet(lambda.0 & !1);
        for e in lambda.iter() {
            let c = &self.classes[self.class_of(e).expect("non-identity")];
            if !c.mask.is_subset(lambda) {
                return Err(CensusError::NotClosed);
            }
        }
        let sum = lambda.iter().fold(Ratio::<u64>::zero(), |acc, g| {
            acc + Ratio::new(1, euler_phi(self.group.order_of(g)))
        });
        if !sum.is_integer() {
            return Err(CensusError::NonIntegralBeta(sum.to_string()));
        }
        Ok(sum.to_integer())
    }

    /// Checks that `elements` is a union of whole classes avoiding the identity.
    pub fn validate_omega(&self, elements: ElementSet) -> Result<OmegaSet> {
        if elements.contains(0) {
            return Err(CensusError::IdentityInOmega);
        }
        let mut classes = Vec::new();
        for c in &self.classes {
            if c.mask.meets(elements) {
                if !c.mask.is_subset(elements) {
                    return Err(CensusError::NotClosed);
                }
                classes.push(c.index);
            }
        }
        Ok(OmegaSet {
            classes,
            mask: elements,
        })
    }

    /// Omega from one-based class indices, as used in configuration files.
    pub fn omega_from_indices(&self, one_based: &[usize]) -> Result<OmegaSet> {
        let mut mask = ElementSet::EMPTY;
        for &i in one_based {
            if i == 0 || i > self.classes.len() {
                return Err(CensusError::ClassIndex(i));
            }
            mask = mask.union(self.classes[i - 1].mask);
        }
        self.validate_omega(mask)
    }

    /// Indices xi_1 < ... < xi_u of the classes lying above some class of Omega.
    pub fn xi_classes(&self, omega: &OmegaSet) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&i| omega.classes.iter().any(|&lam| self.poset.le(lam, i)))
            .collect()
    }

    /// Same set, characterised as the classes whose cyclic subgroup meets Omega.
    pub fn xi_classes_by_intersection(&self, omega: &OmegaSet) -> Vec<usize> {
        self.classes
            .iter()
            .filter(|c| self.lattice.get(c.generated).elements.meets(omega.mask))
            .map(|c| c.index)
            .collect()
    }

    /// `(x0, beta)`: the least parameter outside the xi-classes and the summed
    /// beta of the non-xi classes attaining it.
    pub fn beta_aggregate(&self, x: &ParamVector, omega: &OmegaSet) -> Result<(Ratio<u64>, u64)> {
        let xi = self.xi_classes(omega);
        let outside: Vec<usize> = (0..self.classes.len()).filter(|i| !xi.contains(i)).collect();
        let x0 = outside
            .iter()
            .map(|&i| x.values[i])
            .min()
            .ok_or(CensusError::UndefinedX0)?;
        let mut beta = 0;
        for &i in &outside {
            if x.values[i] == x0 {
                beta += self.beta_of_class_set(self.classes[i].mask)?;
            }
        }
        Ok((x0, beta))
    }

    /// Elements whose order is exactly divisible by `q^l`.
    pub fn omega_of_type(&self, q: u64, l: u32) -> ElementSet {
        let mut s = ElementSet::EMPTY;
        let ql = q.pow(l);
        for e in self.group.elements() {
            let r = self.group.order_of(e);
            if r % ql == 0 && (r / ql) % q != 0 {
                s.insert(e);
            }
        }
        s
    }

    /// Human readable description of an element in terms of the standard
    /// generators, e.g. `g1g2^3` or `id`.
    pub fn element_name(&self, e: Elem) -> String {
        let c = self.group.coords(e).coords;
        let parts: Vec<String> = c
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| {
                if v == 1 {
                    format!("g{}", i + 1)
                } else {
                    format!("g{}^{}", i + 1, v)
                }
            })
            .collect();
        if parts.is_empty() {
            "id".into()
        } else {
            parts.join("")
        }
    }
}

/// Classes under invertible powering together with their containment poset.
///
/// Classes are ordered by the order of the generated subgroup, largest first,
/// then by least member in the element enumeration.
pub fn power_classes(group: &AbelianGroup, lattice: &SubgroupLattice) -> (Vec<PowerClass>, ClassPoset) {
    let mut by_cyclic: HashMap<u64, Vec<Elem>> = HashMap::new();
    for e in group.elements().skip(1) {
        by_cyclic.entry(group.cyclic(e).0).or_default().push(e);
    }
    let mut raw: Vec<(ElementSet, Vec<Elem>)> = by_cyclic
        .into_iter()
        .map(|(m, mut members)| {
            members.sort_unstable();
            (ElementSet(m), members)
        })
        .collect();
    raw.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1[0].cmp(&b.1[0])));
    let classes: Vec<PowerClass> = raw
        .into_iter()
        .enumerate()
        .map(|(index, (cyc, members))| {
            let mask = members.iter().fold(ElementSet::EMPTY, |mut m, &e| {
                m.insert(e);
                m
            });
            PowerClass {
                index,
                members,
                mask,
                generated: lattice.id_of(cyc).expect("cyclic subgroup in lattice"),
            }
        })
        .collect();
    let n = classes.len();
    let mut rel = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let hi = lattice.get(classes[i].generated).elements;
            let hj = lattice.get(classes[j].generated).elements;
            rel[i * n + j] = hi.is_subset(hj);
        }
    }
    (classes, ClassPoset { n, rel })
}

/// Positive rational parameters, one per class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<Ratio<u64>>,
    /// Least common denominator of all values.
    pub denom: u64,
}

impl ParamVector {
    pub fn new(values: Vec<Ratio<u64>>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| v.is_zero()) {
            return Err(CensusError::NonPositiveParam);
        }
        let denom = values.iter().fold(1, |acc, v| lcm(acc, *v.denom()));
        Ok(ParamVector { values, denom })
    }

    pub fn from_integers(values: &[u64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Ratio::from_integer(v)).collect())
    }

    pub fn ones(n: usize) -> Self {
        Self::from_integers(&vec![1; n]).expect("positive")
    }

    pub fn for_group(gd: &GroupData, values: Vec<Ratio<u64>>) -> Result<Self> {
        if values.len() != gd.class_count() {
            return Err(CensusError::ParamLength {
                expected: gd.class_count(),
                got: values.len(),
            });
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Ratio<u64> {
        *self.values.iter().min().expect("non-empty")
    }

    pub fn scaled(&self, a: Ratio<u64>) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * a).collect())
    }

    /// `v * denom` as an integer.
    pub fn to_scaled(&self, v: Ratio<u64>) -> u64 {
        (v * self.denom).to_integer()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// A subset of `G \ {id}` closed under invertible powering, as class indices.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OmegaSet {
    /// Zero-based class indices, ascending.
    pub classes: Vec<usize>,
    pub mask: ElementSet,
}

impl OmegaSet {
    pub fn empty() -> Self {
        OmegaSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}
