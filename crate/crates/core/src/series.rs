//! Truncated generating series built by Euler-product convolution.
//!
//! A series is a finite map `d -> a_d` over index values `d < X`. The
//! convolution engine multiplies local factors prime by prime, tracking a
//! small state per term (Omega counts, partition vectors, ...), and drops any
//! term whose invariant reaches the bound. Everything is exact integer
//! arithmetic.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive};

use crate::error::{CensusError, Result};
use crate::group::{GroupData, OmegaSet, ParamVector, SubgroupId};
use crate::local::SurTable;
use crate::primes::PrimeTable;
use crate::profile::{theta, IndexValue, Scale, Slice};
use crate::structure::{partition_of, realize_family, witness_family, AdmissibilityChecker, DEFAULT_PRIME_SCAN_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SeriesKind {
    Mu,
    Pi,
    Psi,
    Tau,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratingSeries {
    pub kind: SeriesKind,
    /// Terms are kept for `d < bound`.
    pub bound: u64,
    pub denom: u64,
    pub coefficients: BTreeMap<IndexValue, u128>,
}

impl GeneratingSeries {
    pub fn empty(kind: SeriesKind, bound: u64, denom: u64) -> Self {
        GeneratingSeries {
            kind,
            bound,
            denom,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn get(&self, d: &IndexValue) -> u128 {
        self.coefficients.get(d).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Sum of all coefficients, i.e. the counting function at the bound.
    pub fn total(&self) -> u128 {
        self.coefficients.values().sum()
    }

    /// Indices `d` with `self[d] < other[d]`.
    pub fn violations_below(&self, other: &GeneratingSeries) -> Vec<IndexValue> {
        let mut keys: Vec<&IndexValue> = self.coefficients.keys().chain(other.coefficients.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|d| self.get(d) < other.get(d))
            .cloned()
            .collect()
    }

    /// `true` iff `self[d] >= other[d]` for every `d`.
    pub fn dominates(&self, other: &GeneratingSeries) -> bool {
        self.violations_below(other).is_empty()
    }

    /// One line per coefficient: exponent map, a tab, the coefficient.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (d, c) in &self.coefficients {
            let _ = writeln!(s, "{d}\t{c}");
        }
        s
    }

    fn from_terms<S>(kind: SeriesKind, bound: u64, denom: u64, terms: Vec<Term<S>>, keep: impl Fn(&S) -> bool) -> Self {
        let mut coefficients = BTreeMap::new();
        for t in terms {
            if keep(&t.state) && t.coeff > 0 {
                *coefficients
                    .entry(IndexValue::from_exponents(t.exps, denom))
                    .or_insert(0) += t.coeff;
            }
        }
        GeneratingSeries {
            kind,
            bound,
            denom,
            coefficients,
        }
    }
}

#[derive(Clone, Debug)]
struct Term<S> {
    mag: u128,
    exps: Vec<(u64, u64)>,
    coeff: u128,
    state: S,
}

/// One non-trivial option of a local factor: `coeff * p^{-e s}` moving to a new state.
struct LocalOption<S> {
    scaled_exp: u64,
    coeff: u128,
    state: S,
}

/// Truncated Euler-product machinery shared by every series.
struct Convolver<'a> {
    gd: &'a GroupData,
    scale: Scale,
    limit: u128,
    table: SurTable,
}

impl<'a> Convolver<'a> {
    fn new(gd: &'a GroupData, x: &ParamVector, bound: u64) -> Result<Self> {
        if bound < 1 {
            return Err(CensusError::InvalidBound("bound must be >= 1".into()));
        }
        let scale = Scale::new(gd, x, Ratio::one())?;
        let limit = scale
            .limit(bound)
            .to_u128()
            .filter(|l| l.leading_zeros() >= 2)
            .ok_or_else(|| CensusError::Resource("series truncation bound too large".into()))?;
        Ok(Convolver {
            gd,
            scale,
            limit,
            table: SurTable::new(gd),
        })
    }

    /// Tame primes that can still contribute given the least comparison exponent.
    fn tame_primes(&self, above: u64) -> Result<Vec<u64>> {
        let min_exp = self.scale.exps.iter().copied().filter(|&e| e > 0).min().unwrap_or(1);
        let pmax = crate::arith::integer_root(self.limit - 1, min_exp);
        let pmax = u64::try_from(pmax).map_err(|_| CensusError::Resource("prime range too large".into()))?;
        let n = self.gd.group.order() as u64;
        Ok(PrimeTable::sieve(pmax)?
            .primes()
            .iter()
            .map(|&p| p as u64)
            .filter(|&p| p > above && n % p != 0)
            .collect())
    }

    fn times_pow(&self, mag: u128, p: u64, e: u32) -> Option<u128> {
        let mut v = mag;
        for _ in 0..e {
            v = v.checked_mul(p as u128)?;
            if v >= self.limit {
                return None;
            }
        }
        (v < self.limit).then_some(v)
    }

    /// Multiplies every term by the local factor `1 + sum options` at `p`.
    /// Used for the handful of wild primes.
    fn apply<S: Clone>(&self, terms: &mut Vec<Term<S>>, p: u64, options: impl Fn(&S) -> Vec<LocalOption<S>>) {
        let n = terms.len();
        for i in 0..n {
            for opt in options(&terms[i].state) {
                if let Some(t) = self.extend(&terms[i], p, opt) {
                    terms.push(t);
                }
            }
        }
    }

    fn extend<S>(&self, t: &Term<S>, p: u64, opt: LocalOption<S>) -> Option<Term<S>> {
        let mag = self.times_pow(t.mag, p, self.scale.reduce(opt.scaled_exp))?;
        let mut exps = t.exps.clone();
        exps.push((p, opt.scaled_exp));
        Some(Term {
            mag,
            exps,
            coeff: t.coeff * opt.coeff,
            state: opt.state,
        })
    }

    /// Multiplies `roots` by the local factors of every prime in `primes`
    /// (ascending). Works depth-first so each prime only touches the terms it
    /// can extend below the bound.
    fn expand<S: Clone>(
        &self,
        roots: Vec<Term<S>>,
        primes: &[u64],
        options: &dyn Fn(u64, &S) -> Vec<LocalOption<S>>,
    ) -> Vec<Term<S>> {
        let emin = self.scale.exps.iter().copied().filter(|&e| e > 0).min().unwrap_or(1);
        let mut out = Vec::new();
        for r in roots {
            self.dfs(r, 0, primes, emin, options, &mut out);
        }
        out
    }

    fn dfs<S: Clone>(
        &self,
        t: Term<S>,
        start: usize,
        primes: &[u64],
        emin: u32,
        options: &dyn Fn(u64, &S) -> Vec<LocalOption<S>>,
        out: &mut Vec<Term<S>>,
    ) {
        for (i, &p) in primes.iter().enumerate().skip(start) {
            if self.times_pow(t.mag, p, emin).is_none() {
                break;
            }
            for opt in options(p, &t.state) {
                if let Some(child) = self.extend(&t, p, opt) {
                    self.dfs(child, i + 1, primes, emin, options, out);
                }
            }
        }
        out.push(t);
    }

    fn weight(&self, h: SubgroupId) -> u64 {
        self.scale.weights.scaled[h]
    }

    fn meets(&self, h: SubgroupId, omega: &OmegaSet) -> bool {
        self.gd.lattice.get(h).elements.meets(omega.mask)
    }
}

/// Hom-mode series of homomorphisms into `target`, split by slice.
///
/// The wild factor runs over all attainable images at `p | |G|`; each tame prime
/// contributes an Omega-avoiding part and an Omega-meeting part, the latter
/// raising the tame count. Slices above `gamma_max` are not computed.
pub fn mu_slices(
    gd: &GroupData,
    x: &ParamVector,
    omega: &OmegaSet,
    target: SubgroupId,
    bound: u64,
    gamma_max: u32,
) -> Result<BTreeMap<Slice, GeneratingSeries>> {
    let cv = Convolver::new(gd, x, bound)?;
    let target_mask = gd.lattice.get(target).elements;
    let inside = |h: SubgroupId| h != gd.lattice.trivial() && gd.lattice.get(h).elements.is_subset(target_mask);
    let mut terms = vec![Term {
        mag: 1,
        exps: Vec::new(),
        coeff: 1,
        state: (0u32, false),
    }];
    for p in cv.table.wild_primes() {
        let sur = cv.table.at(p).to_vec();
        cv.apply(&mut terms, p, |&(g, w)| {
            (0..sur.len())
                .filter(|&h| sur[h] > 0 && inside(h))
                .map(|h| LocalOption {
                    scaled_exp: cv.weight(h),
                    coeff: sur[h] as u128,
                    state: (g, w || cv.meets(h, omega)),
                })
                .collect()
        });
    }
    let cyclic = gd.cyclic_subgroups();
    let primes = cv.tame_primes(0)?;
    let terms = cv.expand(terms, &primes, &|p, &(g, w)| {
        let sur = cv.table.at(p);
            cyclic
                .iter()
                .filter(|&&h| sur[h] > 0 && inside(h))
                .filter_map(|&h| {
                    let g2 = g + cv.meets(h, omega) as u32;
                    (g2 <= gamma_max).then(|| LocalOption {
                        scaled_exp: cv.weight(h),
                        coeff: sur[h] as u128,
                        state: (g2, w),
                    })
                })
                .collect()
    });
    let mut out = BTreeMap::new();
    for g in 0..=gamma_max {
        out.insert(
            Slice::Gamma(g),
            GeneratingSeries::empty(SeriesKind::Mu, bound, x.denom),
        );
    }
    out.insert(Slice::Unsliced, GeneratingSeries::empty(SeriesKind::Mu, bound, x.denom));
    let mut grouped: HashMap<Slice, Vec<Term<(u32, bool)>>> = HashMap::new();
    for t in terms {
        let (g, w) = t.state;
        let slice = if g == 0 && w { Slice::Unsliced } else { Slice::Gamma(g) };
        grouped.entry(slice).or_default().push(t);
    }
    for (slice, ts) in grouped {
        out.insert(slice, GeneratingSeries::from_terms(SeriesKind::Mu, bound, x.denom, ts, |_| true));
    }
    Ok(out)
}

/// `mu_gamma`: all homomorphisms to `G` in slice `gamma`.
pub fn mu_series(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gamma: u32, bound: u64) -> Result<GeneratingSeries> {
    Ok(mu_slices(gd, x, omega, gd.lattice.whole(), bound, gamma)?
        .remove(&Slice::Gamma(gamma))
        .expect("slice computed"))
}

/// Möbius function `mu(H, G)` of the subgroup lattice, for every `H`.
pub fn lattice_mobius_to_top(gd: &GroupData) -> Vec<i64> {
    let n = gd.lattice.len();
    let mut mob = vec![0i64; n];
    let top = gd.lattice.whole();
    mob[top] = 1;
    for h in (0..top).rev() {
        let mask = gd.lattice.get(h).elements;
        mob[h] = -((h + 1)..n)
            .filter(|&k| mask.is_subset(gd.lattice.get(k).elements))
            .map(|k| mob[k])
            .sum::<i64>();
    }
    mob
}

/// Surjection series by Möbius inversion of the hom series over the subgroup
/// lattice: `pi_G = sum_H mu(H, G) mu_H`, slice by slice.
pub fn pi_slices_by_inversion(
    gd: &GroupData,
    x: &ParamVector,
    omega: &OmegaSet,
    bound: u64,
    gamma_max: u32,
) -> Result<BTreeMap<Slice, GeneratingSeries>> {
    let mob = lattice_mobius_to_top(gd);
    let mut acc: BTreeMap<Slice, BTreeMap<IndexValue, i128>> = BTreeMap::new();
    for (h, &m) in mob.iter().enumerate() {
        if m == 0 {
            continue;
        }
        for (slice, series) in mu_slices(gd, x, omega, h, bound, gamma_max)? {
            let e = acc.entry(slice).or_default();
            for (d, c) in series.coefficients {
                *e.entry(d).or_insert(0) += m as i128 * c as i128;
            }
        }
    }
    let mut out = BTreeMap::new();
    for (slice, coeffs) in acc {
        let mut s = GeneratingSeries::empty(SeriesKind::Pi, bound, x.denom);
        for (d, c) in coeffs {
            if c < 0 {
                return Err(CensusError::Resource(format!("negative inverted coefficient at {d}")));
            }
            if c > 0 {
                s.coefficients.insert(d, c as u128);
            }
        }
        out.insert(slice, s);
    }
    Ok(out)
}

/// `pi_gamma` from the profile enumeration in surjection mode.
pub fn pi_series(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gamma: u32, bound: u64) -> Result<GeneratingSeries> {
    pi_series_slice(gd, x, omega, Slice::Gamma(gamma), bound, gd.lattice.whole())
}

/// Surjections onto `target` in one slice, by enumeration.
pub fn pi_series_slice(
    gd: &GroupData,
    x: &ParamVector,
    omega: &OmegaSet,
    slice: Slice,
    bound: u64,
    target: SubgroupId,
) -> Result<GeneratingSeries> {
    let q = crate::profile::CensusQuery::new(gd, x, omega, bound)
        .with_target(target)
        .with_gamma_max(match slice {
            Slice::Gamma(g) => g,
            Slice::Unsliced => 0,
        });
    let coeffs = crate::profile::count_by_index(q, crate::profile::Mode::Sur, Some(slice))?;
    Ok(GeneratingSeries {
        kind: SeriesKind::Pi,
        bound,
        denom: x.denom,
        coefficients: coeffs,
    })
}

/// All subsets of `items` of size at most `k`, in lexicographic order.
fn small_subsets(items: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l: &usize| l + 1);
            for i in start..items {
                let mut t: Vec<usize> = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `psi_gamma`: the admissible-partition upper bound for `pi_gamma`.
///
/// Each tame prime contributes `(1 + sum_{non-xi i} Sur_p(H_i) p^{-x_i s})` times,
/// for every xi class `k`, an optional `Sur_p(H_k) p^{-x_k s}` counted into
/// part `n_k` of the partition. Terms are kept when the partition sums to
/// `gamma` and is admissible. Returns an empty series when no partition is.
pub fn psi_series(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gamma: u32, bound: u64) -> Result<GeneratingSeries> {
    let cv = Convolver::new(gd, x, bound)?;
    let mut checker = AdmissibilityChecker::new(gd, omega)?;
    let xi: Vec<SubgroupId> = checker.xi_subgroups().to_vec();
    let u = xi.len();
    let xi_classes = gd.xi_classes(omega);
    let free: Vec<SubgroupId> = gd
        .classes
        .iter()
        .filter(|c| !xi_classes.contains(&c.index))
        .map(|c| c.generated)
        .collect();
    let mut terms = vec![Term {
        mag: 1,
        exps: Vec::new(),
        coeff: 1,
        state: vec![0u32; u],
    }];
    for p in cv.table.wild_primes() {
        let sur = cv.table.at(p).to_vec();
        cv.apply(&mut terms, p, |st: &Vec<u32>| {
            (1..sur.len())
                .filter(|&h| sur[h] > 0)
                .map(|h| LocalOption {
                    scaled_exp: cv.weight(h),
                    coeff: sur[h] as u128,
                    state: st.clone(),
                })
                .collect()
        });
    }
    let subsets = small_subsets(u, gamma as usize);
    let primes = cv.tame_primes(0)?;
    let terms = cv.expand(terms, &primes, &|p, st: &Vec<u32>| {
        let sur = cv.table.at(p);
            let used: u32 = st.iter().sum();
            let mut opts = Vec::new();
            let avoid = std::iter::once(None).chain(free.iter().filter(|&&h| sur[h] > 0).map(Some));
            for a in avoid {
                for s in &subsets {
                    if a.is_none() && s.is_empty() {
                        continue;
                    }
                    if used + s.len() as u32 > gamma || s.iter().any(|&k| sur[xi[k]] == 0) {
                        continue;
                    }
                    let mut e = a.map_or(0, |&h| cv.weight(h));
                    let mut c = a.map_or(1, |&h| sur[h] as u128);
                    let mut st2 = st.clone();
                    for &k in s {
                        e += cv.weight(xi[k]);
                        c *= sur[xi[k]] as u128;
                        st2[k] += 1;
                    }
                    opts.push(LocalOption {
                        scaled_exp: e,
                        coeff: c,
                        state: st2,
                    });
                }
            }
            opts
    });
    let admissible: HashMap<Vec<u32>, bool> = terms
        .iter()
        .map(|t| t.state.clone())
        .filter(|st| st.iter().sum::<u32>() == gamma)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .map(|st| {
            let ok = checker.is_admissible(&st);
            (st, ok)
        })
        .collect();
    Ok(GeneratingSeries::from_terms(SeriesKind::Psi, bound, x.denom, terms, |st| {
        admissible.get(st).copied().unwrap_or(false)
    }))
}

/// Anchor data of the lower-bound series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauAnchor {
    /// The witness profile `rho`.
    pub witness: crate::profile::RamificationProfile,
    /// Partition `(n_xi_1, ..., n_xi_u)` of the witness.
    pub partition: Vec<u32>,
    /// `theta(rho_0)`.
    pub d0: IndexValue,
    /// Largest prime where `rho_0` is non-trivial (0 if none).
    pub q: u64,
}

pub fn tau_anchor(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gamma: u32) -> Result<TauAnchor> {
    let fam = witness_family(gd, x, omega, gamma)?;
    let witness = realize_family(gd, &fam, DEFAULT_PRIME_SCAN_CAP)?;
    let n = gd.group.order() as u64;
    let mut rho0 = crate::profile::RamificationProfile::new();
    for (&p, &h) in &witness.assignments {
        if n % p == 0 || !gd.lattice.get(h).elements.meets(omega.mask) {
            rho0.assignments.insert(p, h);
        }
    }
    let q = rho0.assignments.keys().copied().max().unwrap_or(0);
    let tame_omega: Vec<SubgroupId> = witness
        .assignments
        .iter()
        .filter(|(&p, &h)| n % p != 0 && gd.lattice.get(h).elements.meets(omega.mask))
        .map(|(_, &h)| h)
        .collect();
    Ok(TauAnchor {
        partition: partition_of(gd, omega, &tame_omega),
        d0: theta(gd, &rho0, x),
        q,
        witness,
    })
}

/// `tau_gamma`: the lower bound for `pi_gamma` anchored at a witness.
///
/// Terms are `d0 * p_1^{x_k1} ... p_gamma^{x_kgamma}` times Omega-avoiding local
/// factors, over primes above `q`. The Omega primes satisfy `p = 1 mod |G|`
/// and are assigned to xi classes in increasing order following the
/// witness partition.
pub fn tau_series(gd: &GroupData, x: &ParamVector, omega: &OmegaSet, gamma: u32, bound: u64) -> Result<GeneratingSeries> {
    let anchor = tau_anchor(gd, x, omega, gamma)?;
    let cv = Convolver::new(gd, x, bound)?;
    let n = gd.group.order() as u64;
    let xi_classes = gd.xi_classes(omega);
    let xi: Vec<SubgroupId> = xi_classes.iter().map(|&i| gd.classes[i].generated).collect();
    // Class of the j-th Omega prime (0-based j).
    let block: Vec<SubgroupId> = anchor
        .partition
        .iter()
        .zip(&xi)
        .flat_map(|(&c, &h)| std::iter::repeat(h).take(c as usize))
        .collect();
    let free: Vec<SubgroupId> = gd
        .classes
        .iter()
        .filter(|c| !xi_classes.contains(&c.index))
        .map(|c| c.generated)
        .collect();

    let mut mag = 1u128;
    for &(p, e) in &anchor.d0.exponents {
        match cv.times_pow(mag, p, cv.scale.reduce(e)) {
            Some(m) => mag = m,
            None => return Ok(GeneratingSeries::empty(SeriesKind::Tau, bound, x.denom)),
        }
    }
    let terms = vec![Term {
        mag,
        exps: anchor.d0.exponents.clone(),
        coeff: 1,
        state: 0u32,
    }];
    let primes = cv.tame_primes(anchor.q)?;
    let terms = cv.expand(terms, &primes, &|p, &j| {
        let sur = cv.table.at(p);
            let mut opts: Vec<LocalOption<u32>> = free
                .iter()
                .filter(|&&h| sur[h] > 0)
                .map(|&h| LocalOption {
                    scaled_exp: cv.weight(h),
                    coeff: sur[h] as u128,
                    state: j,
                })
                .collect();
            if p % n == 1 && j < gamma {
                opts.push(LocalOption {
                    scaled_exp: cv.weight(block[j as usize]),
                    coeff: 1,
                    state: j + 1,
                });
            }
            opts
    });
    Ok(GeneratingSeries::from_terms(SeriesKind::Tau, bound, x.denom, terms, |&j| j == gamma))
}
