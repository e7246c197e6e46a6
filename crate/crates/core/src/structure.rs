//! Structure constants: `delta_x`, `gamma_x`, admissible partitions and the
//! conjecture classifier.
//!
//! A surjection is described up to the primes it uses by a
//! [`GeneratingFamily`]: one attainable image per wild prime plus a list of
//! cyclic "tame slots", each standing for one tame prime. Cyclic subgroups
//! split three ways:
//!
//! * non-xi subgroups (they avoid Omega) cost nothing,
//! * cheap xi subgroups (parameter equal to the global minimum `x_1`) raise `gamma` only,
//! * expensive xi subgroups (parameter above `x_1`) raise both `gamma` and `delta`.
//!
//! `delta_x` and `gamma_x` are then a lexicographic shortest path in the
//! subgroup lattice: start from (wild image) v (all non-xi subgroups) and join
//! expensive or cheap subgroups until the whole group is reached.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::error::{CensusError, Result};
use crate::group::{GroupData, OmegaSet, ParamVector, SubgroupId};
use crate::local::SurTable;
use crate::profile::RamificationProfile;

/// Largest number of wild image combinations the searches will consider.
pub const WILD_COMBINATION_CAP: usize = 1_000_000;
/// Default bound for the prime scan that realizes tame slots.
pub const DEFAULT_PRIME_SCAN_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratingFamily {
    /// One image per prime dividing `|G|` (trivial images included), by prime.
    pub wild: Vec<(u64, SubgroupId)>,
    /// Cyclic images at distinct tame primes.
    pub tame_slots: Vec<SubgroupId>,
}

impl GeneratingFamily {
    pub fn generated(&self, gd: &GroupData) -> SubgroupId {
        gd.join_all(self.wild.iter().map(|w| w.1).chain(self.tame_slots.iter().copied()))
    }

    pub fn generates(&self, gd: &GroupData) -> bool {
        self.generated(gd) == gd.lattice.whole()
    }

    /// Number of tame slots meeting Omega.
    pub fn gamma(&self, gd: &GroupData, omega: &OmegaSet) -> u32 {
        self.tame_slots
            .iter()
            .filter(|&&h| gd.lattice.get(h).elements.meets(omega.mask))
            .count() as u32
    }
}

/// Tame slots meeting Omega whose invariant exceeds the least parameter.
pub fn delta_of_family(gd: &GroupData, fam: &GeneratingFamily, x: &ParamVector, omega: &OmegaSet) -> Result<u32> {
    if !fam.generates(gd) {
        return Err(CensusError::NotGenerating);
    }
    Ok(count_expensive(gd, fam.tame_slots.iter().copied(), x, omega))
}

fn count_expensive(gd: &GroupData, slots: impl Iterator<Item = SubgroupId>, x: &ParamVector, omega: &OmegaSet) -> u32 {
    let x1 = x.min();
    slots
        .filter(|&h| gd.lattice.get(h).elements.meets(omega.mask) && gd.x_of_subgroup(h, x) > x1)
        .count() as u32
}

/// `delta_x(rho)` of a concrete profile: expensive Omega-meeting tame primes.
pub fn delta_of_profile(gd: &GroupData, profile: &RamificationProfile, x: &ParamVector, omega: &OmegaSet) -> u32 {
    let n = gd.group.order() as u64;
    count_expensive(
        gd,
        profile.assignments.iter().filter(|(&p, _)| n % p != 0).map(|(_, &h)| h),
        x,
        omega,
    )
}

/// Cyclic subgroups sorted into the three cost categories.
#[derive(Clone, Debug)]
pub struct SlotKinds {
    pub free: Vec<SubgroupId>,
    pub cheap: Vec<SubgroupId>,
    pub expensive: Vec<SubgroupId>,
    /// Cyclic subgroups of the xi classes, in xi order.
    pub xi: Vec<SubgroupId>,
}

impl SlotKinds {
    pub fn new(gd: &GroupData, x: &ParamVector, omega: &OmegaSet) -> Self {
        let x1 = x.min();
        let xi_classes = gd.xi_classes(omega);
        let mut kinds = SlotKinds {
            free: Vec::new(),
            cheap: Vec::new(),
            expensive: Vec::new(),
            xi: xi_classes.iter().map(|&i| gd.classes[i].generated).collect(),
        };
        for c in &gd.classes {
            if !xi_classes.contains(&c.index) {
                kinds.free.push(c.generated);
            } else if x.values[c.index] > x1 {
                kinds.expensive.push(c.generated);
            } else {
                kinds.cheap.push(c.generated);
            }
        }
        kinds
    }
}

/// Joins of wild image combinations, each with the first combination (in
/// lexicographic order of image ids) that produces it.
pub fn wild_joins(gd: &GroupData) -> Result<BTreeMap<SubgroupId, Vec<(u64, SubgroupId)>>> {
    wild_joins_filtered(gd, |_| true)
}

fn wild_joins_filtered(
    gd: &GroupData,
    keep: impl Fn(SubgroupId) -> bool,
) -> Result<BTreeMap<SubgroupId, Vec<(u64, SubgroupId)>>> {
    let table = SurTable::new(gd);
    let mut combos: Vec<(SubgroupId, Vec<(u64, SubgroupId)>)> = vec![(gd.lattice.trivial(), Vec::new())];
    for p in table.wild_primes() {
        let sur = table.at(p);
        let images: Vec<SubgroupId> = (0..sur.len()).filter(|&h| sur[h] > 0 && keep(h)).collect();
        if combos.len() * images.len() > WILD_COMBINATION_CAP {
            return Err(CensusError::Resource("too many wild image combinations".into()));
        }
        let mut next = Vec::with_capacity(combos.len() * images.len());
        for (j, c) in &combos {
            for &h in &images {
                let mut c2 = c.clone();
                c2.push((p, h));
                next.push((gd.join(*j, h), c2));
            }
        }
        combos = next;
    }
    let mut out = BTreeMap::new();
    for (j, c) in combos {
        out.entry(j).or_insert(c);
    }
    Ok(out)
}

/// Result of the lexicographic search.
#[derive(Clone, Debug)]
struct Search {
    delta: u32,
    extra_cheap: u32,
    family: GeneratingFamily,
}

fn search(gd: &GroupData, x: &ParamVector, omega: &OmegaSet) -> Result<Search> {
    let kinds = SlotKinds::new(gd, x, omega);
    let free_join = gd.join_all(kinds.free.iter().copied());
    let joins = wild_joins(gd)?;
    let n = gd.lattice.len();
    let mut dist: Vec<Option<(u32, u32)>> = vec![None; n];
    let mut pred: Vec<Option<(SubgroupId, SubgroupId)>> = vec![None; n];
    let mut origin: Vec<Option<SubgroupId>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    // Larger wild images first, so witnesses lean on the wild primes.
    for &w in joins.keys().rev() {
        let s = gd.join(w, free_join);
        if dist[s].is_none() {
            dist[s] = Some((0, 0));
            origin[s] = Some(w);
            heap.push(Reverse((0u32, 0u32, s)));
        }
    }
    let target = gd.lattice.whole();
    let edges: Vec<(SubgroupId, (u32, u32))> = kinds
        .expensive
        .iter()
        .map(|&h| (h, (1, 0)))
        .chain(kinds.cheap.iter().map(|&h| (h, (0, 1))))
        .collect();
    while let Some(Reverse((e, c, s))) = heap.pop() {
        if dist[s] != Some((e, c)) {
            continue;
        }
        if s == target {
            break;
        }
        for &(h, (de, dc)) in &edges {
            let t = gd.join(s, h);
            if t == s {
                continue;
            }
            let cand = (e + de, c + dc);
            if dist[t].map_or(true, |d| cand < d) {
                dist[t] = Some(cand);
                pred[t] = Some((s, h));
                origin[t] = origin[s];
                heap.push(Reverse((cand.0, cand.1, t)));
            }
        }
    }
    let (delta, extra_cheap) = dist[target].expect("all cyclic subgroups generate the group");
    let mut slots = Vec::new();
    let mut cur = target;
    while let Some((prev, h)) = pred[cur] {
        slots.push(h);
        cur = prev;
    }
    slots.reverse();
    let w = origin[target].expect("origin recorded");
    let mut family = GeneratingFamily {
        wild: joins[&w].clone(),
        tame_slots: kinds.free.iter().copied().chain(slots).collect(),
    };
    prune_free_slots(gd, &mut family, &kinds.free);
    Ok(Search {
        delta,
        extra_cheap,
        family,
    })
}

/// Drops free slots that are not needed for generation, first to last.
fn prune_free_slots(gd: &GroupData, fam: &mut GeneratingFamily, free: &[SubgroupId]) {
    let mut i = 0;
    while i < fam.tame_slots.len() {
        if free.contains(&fam.tame_slots[i]) {
            let mut trial = fam.clone();
            trial.tame_slots.remove(i);
            if trial.generates(gd) {
                *fam = trial;
                continue;
            }
        }
        i += 1;
    }
}

/// `delta_x` and a family attaining it.
pub fn delta_x(gd: &GroupData, x: &ParamVector, omega: &OmegaSet) -> Result<(u32, GeneratingFamily)> {
    let s = search(gd, x, omega)?;
    Ok((s.delta, s.family))
}

/// `gamma_x` and a family attaining it (with `delta = delta_x`).
pub fn gamma_x(gd: &GroupData, x: &ParamVector, omega: &OmegaSet) -> Result<(u32, GeneratingFamily)> {
    let s = search(gd, x, omega)?;
    Ok((s.delta + s.extra_cheap, s.family))
}

/// A generating family with `delta = delta_x` and exactly `gamma` Omega-meeting tame slots.
///
/// For `gamma = 0` the wild images must avoid Omega as well, since otherwise the
/// homomorphism is not counted in the zero slice.
pub fn witness_family(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gamma: u32) -> Result<GeneratingFamily> {
    let s = search(gd, x, omega)?;
    let gx = s.delta + s.extra_cheap;
    let not_found = CensusError::WitnessNotFound { gamma };
    if gamma == 0 {
        if gx != 0 {
            return Err(not_found);
        }
        let kinds = SlotKinds::new(gd, x, omega);
        let free_join = gd.join_all(kinds.free.iter().copied());
        let joins = wild_joins_filtered(gd, |h| !gd.lattice.get(h).elements.meets(omega.mask))?;
        let (_, wild) = joins
            .iter()
            .find(|(&w, _)| gd.join(w, free_join) == gd.lattice.whole())
            .ok_or(not_found)?;
        let mut fam = GeneratingFamily {
            wild: wild.clone(),
            tame_slots: kinds.free.clone(),
        };
        prune_free_slots(gd, &mut fam, &kinds.free);
        return Ok(fam);
    }
    if gamma < gx {
        return Err(not_found);
    }
    let mut fam = s.family;
    if gamma > gx {
        let kinds = SlotKinds::new(gd, x, omega);
        let &cheap = kinds.cheap.first().ok_or(not_found)?;
        fam.tame_slots.extend(std::iter::repeat(cheap).take((gamma - gx) as usize));
    }
    Ok(fam)
}

/// Realizes a family by actual primes: wild images at their primes, and each
/// tame slot `H` at the least unused prime `p = 1 mod |H|` not dividing `|G|`.
pub fn realize_family(gd: &GroupData, fam: &GeneratingFamily, scan_cap: u64) -> Result<RamificationProfile> {
    let n = gd.group.order() as u64;
    let mut profile = RamificationProfile::new();
    for &(p, h) in &fam.wild {
        if h != gd.lattice.trivial() {
            profile.assignments.insert(p, h);
        }
    }
    for &h in &fam.tame_slots {
        let m = gd.lattice.get(h).order() as u64;
        let mut p = m + 1;
        loop {
            if p > scan_cap {
                return Err(CensusError::Resource(format!(
                    "no prime = 1 mod {m} below the scan cap {scan_cap}"
                )));
            }
            if n % p != 0 && crate::arith::is_prime(p) && !profile.assignments.contains_key(&p) {
                break;
            }
            p += m;
        }
        profile.assignments.insert(p, h);
    }
    Ok(profile)
}

/// Counts of tame slots per xi subgroup, in xi order.
pub fn partition_of(gd: &GroupData, omega: &OmegaSet, slots: &[SubgroupId]) -> Vec<u32> {
    let xi: Vec<SubgroupId> = gd.xi_classes(omega).iter().map(|&i| gd.classes[i].generated).collect();
    xi.iter()
        .map(|&h| slots.iter().filter(|&&s| s == h).count() as u32)
        .collect()
}

/// All compositions of `total` into `parts` non-negative parts, largest first part first.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(total: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Decides admissibility of partitions by their support.
pub struct AdmissibilityChecker<'a> {
    gd: &'a GroupData,
    base: SubgroupId,
    xi: Vec<SubgroupId>,
    wild: Vec<SubgroupId>,
    cache: HashMap<Vec<bool>, bool>,
}

impl<'a> AdmissibilityChecker<'a> {
    pub fn new(gd: &'a GroupData, omega: &OmegaSet) -> Result<Self> {
        let xi_classes = gd.xi_classes(omega);
        let free = gd
            .classes
            .iter()
            .filter(|c| !xi_classes.contains(&c.index))
            .map(|c| c.generated);
        Ok(AdmissibilityChecker {
            gd,
            base: gd.join_all(free),
            xi: xi_classes.iter().map(|&i| gd.classes[i].generated).collect(),
            wild: wild_joins(gd)?.keys().copied().collect(),
            cache: HashMap::new(),
        })
    }

    pub fn xi_subgroups(&self) -> &[SubgroupId] {
        &self.xi
    }

    pub fn is_admissible(&mut self, partition: &[u32]) -> bool {
        let support: Vec<bool> = partition.iter().map(|&n| n > 0).collect();
        if let Some(&v) = self.cache.get(&support) {
            return v;
        }
        let gd = self.gd;
        let s = self
            .xi
            .iter()
            .zip(&support)
            .filter(|(_, &on)| on)
            .fold(self.base, |acc, (&h, _)| gd.join(acc, h));
        let ok = self.wild.iter().any(|&w| gd.join(w, s) == gd.lattice.whole());
        self.cache.insert(support, ok);
        ok
    }
}

/// Admissible partitions of `gamma` over the xi classes.
pub fn admissible_partitions(gd: &GroupData, omega: &OmegaSet, gamma: u32) -> Result<Vec<Vec<u32>>> {
    let mut checker = AdmissibilityChecker::new(gd, omega)?;
    let u = checker.xi_subgroups().len();
    Ok(compositions(gamma, u)
        .into_iter()
        .filter(|p| checker.is_admissible(p))
        .collect())
}

/// Whether the counting conjecture holds for this ordering: the least
/// parameter among the xi classes is the global minimum.
pub fn conjecture_classifier(gd: &GroupData, x: &ParamVector, omega: &OmegaSet) -> Result<bool> {
    if omega.is_empty() {
        return Err(CensusError::NotApplicable("Omega is empty".into()));
    }
    let min_xi: Ratio<u64> = gd
        .xi_classes(omega)
        .iter()
        .map(|&i| x.values[i])
        .min()
        .expect("non-empty Omega has xi classes");
    Ok(min_xi == x.min())
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub delta_x: u32,
    pub gamma_x: u32,
    pub delta_witness: GeneratingFamily,
    pub gamma_witness: GeneratingFamily,
    /// Admissible partitions for each requested gamma.
    pub admissible: Vec<(u32, Vec<Vec<u32>>)>,
    pub conjecture: Option<bool>,
}

impl StructureReport {
    pub fn compute(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gammas: &[u32]) -> Result<Self> {
        let s = search(gd, x, omega)?;
        let admissible = if omega.is_empty() {
            Vec::new()
        } else {
            let mut checker = AdmissibilityChecker::new(gd, omega)?;
            let u = checker.xi_subgroups().len();
            gammas
                .iter()
                .map(|&g| {
                    let parts = compositions(g, u)
                        .into_iter()
                        .filter(|p| checker.is_admissible(p))
                        .collect();
                    (g, parts)
                })
                .collect()
        };
        Ok(StructureReport {
            delta_x: s.delta,
            gamma_x: s.delta + s.extra_cheap,
            delta_witness: s.family.clone(),
            gamma_witness: s.family,
            admissible,
            conjecture: conjecture_classifier(gd, x, omega).ok(),
        })
    }

    /// Deterministic text rendering.
    pub fn to_text(&self, gd: &GroupData) -> String {
        let name = |h: SubgroupId| subgroup_name(gd, h);
        let fam = |f: &GeneratingFamily| {
            let wild: Vec<String> = f.wild.iter().map(|&(p, h)| format!("{p}:{}", name(h))).collect();
            let tame: Vec<String> = f.tame_slots.iter().map(|&h| name(h)).collect();
            format!("wild=[{}] tame=[{}]", wild.join(" "), tame.join(" "))
        };
        let mut s = String::new();
        let _ = writeln!(s, "delta_x = {}", self.delta_x);
        let _ = writeln!(s, "gamma_x = {}", self.gamma_x);
        let _ = writeln!(s, "delta_witness: {}", fam(&self.delta_witness));
        let _ = writeln!(s, "gamma_witness: {}", fam(&self.gamma_witness));
        for (g, parts) in &self.admissible {
            let ps: Vec<String> = parts
                .iter()
                .map(|p| format!("({})", p.iter().map(u32::to_string).collect::<Vec<_>>().join(",")))
                .collect();
            let _ = writeln!(s, "admissible[{g}] = {}", if ps.is_empty() { "none".into() } else { ps.join(" ") });
        }
        let _ = writeln!(
            s,
            "conjecture = {}",
            match self.conjecture {
                Some(true) => "holds",
                Some(false) => "fails",
                None => "n/a",
            }
        );
        s
    }
}

/// `<g1,g2>`-style name from the minimal generators.
pub fn subgroup_name(gd: &GroupData, h: SubgroupId) -> String {
    let gens: Vec<String> = gd.lattice.get(h).generators.iter().map(|&e| gd.element_name(e)).collect();
    format!("<{}>", gens.join(","))
}
