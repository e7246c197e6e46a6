//! Ramification profiles and the exact census.
//!
//! A homomorphism `prod_p Z_p^* -> G` is recorded by its local images: a
//! finite map from primes to non-trivial subgroups. The number of
//! homomorphisms with a given profile is the product of the local surjection
//! counts, the invariant is `theta = prod_p p^{x(H_p)}`, and the homomorphism
//! is surjective exactly when the images generate `G`.
//!
//! The census walks all profiles with `theta < X` depth first. Primes dividing
//! `|G|` are fixed first (one root per combination of wild images); the tame
//! primes are then added in increasing order, pruning as soon as
//! `theta * p^{min exponent}` reaches the bound. The work is split into
//! branches (root, range of the first tame prime) that are counted
//! independently and summed, so the result does not depend on scheduling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{integer_root, is_prime};
use crate::error::{CensusError, Result};
use crate::group::{GroupData, OmegaSet, ParamVector, SubgroupId};
use crate::local::SurTable;
use crate::primes::PrimeTable;

/// Largest tame prime the census will sieve for.
pub const DEFAULT_MAX_PRIME: u64 = 1_000_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RamificationProfile {
    /// Prime to non-trivial local image.
    pub assignments: BTreeMap<u64, SubgroupId>,
}

impl RamificationProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(u64, SubgroupId)]) -> Self {
        RamificationProfile {
            assignments: pairs.iter().copied().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// An element of the index set: `prod p^{e_p / D}` stored by its integer
/// exponents `e_p` (scaled by the common denominator `D`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexValue {
    pub exponents: Vec<(u64, u64)>,
    pub log_value: f64,
}

impl IndexValue {
    pub fn one() -> Self {
        IndexValue {
            exponents: Vec::new(),
            log_value: 0.0,
        }
    }

    pub fn from_exponents(mut exponents: Vec<(u64, u64)>, denom: u64) -> Self {
        exponents.retain(|&(_, e)| e > 0);
        exponents.sort_unstable();
        let log_value = exponents
            .iter()
            .map(|&(p, e)| e as f64 * (p as f64).ln())
            .sum::<f64>()
            / denom as f64;
        IndexValue {
            exponents,
            log_value,
        }
    }

    /// `prod p^{e_p}`, i.e. `d^D`.
    pub fn scaled_value(&self) -> BigUint {
        self.exponents
            .iter()
            .fold(<BigUint as One>::one(), |acc, &(p, e)| acc * BigUint::from(p).pow(e as u32))
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.exponents.iter().map(|&(p, _)| p)
    }
}

impl PartialEq for IndexValue {
    fn eq(&self, other: &Self) -> bool {
        self.exponents == other.exponents
    }
}

impl Eq for IndexValue {}

impl Hash for IndexValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.exponents.hash(state);
    }
}

impl PartialOrd for IndexValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IndexValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.exponents.cmp(&other.exponents)
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        for (i, (p, e)) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}^{e}")?;
        }
        Ok(())
    }
}

/// The threshold `base^exponent`; counts use the strict inequality `theta < threshold`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub base: u64,
    pub exponent: Ratio<u64>,
}

impl Bound {
    pub fn new(base: u64) -> Self {
        Bound {
            base,
            exponent: Ratio::one(),
        }
    }

    pub fn with_exponent(base: u64, exponent: Ratio<u64>) -> Self {
        Bound { base, exponent }
    }

    /// Exact test `d < base^exponent` for an index value scaled by `denom`:
    /// `(prod p^{e_p})^q < base^{r D}` where `exponent = r / q`.
    pub fn admits(&self, d: &IndexValue, denom: u64) -> bool {
        let q = *self.exponent.denom() as u32;
        let r = *self.exponent.numer();
        let lhs = d.scaled_value().pow(q);
        let rhs = BigUint::from(self.base).pow((r * denom) as u32);
        lhs < rhs
    }
}

/// Per-subgroup weights of the invariant: `D * x(H)`.
#[derive(Clone, Debug)]
pub struct ThetaWeights {
    pub scaled: Vec<u64>,
    pub denom: u64,
}

impl ThetaWeights {
    pub fn new(gd: &GroupData, x: &ParamVector) -> Result<Self> {
        if x.len() != gd.class_count() {
            return Err(CensusError::ParamLength {
                expected: gd.class_count(),
                got: x.len(),
            });
        }
        let scaled = (0..gd.lattice.len())
            .map(|h| x.to_scaled(gd.x_of_subgroup(h, x)))
            .collect();
        Ok(ThetaWeights {
            scaled,
            denom: x.denom,
        })
    }
}

/// Integer form of the comparison `theta < base^exponent`.
///
/// With `exponent = r/q` and `D` the parameter denominator, `theta < base^{r/q}`
/// iff `prod p^{q D x(H_p)} < base^{r D}`. All exponents are divided by their
/// common gcd `g` to keep the integers small.
#[derive(Clone, Debug)]
pub struct Scale {
    pub weights: ThetaWeights,
    q: u64,
    g: u64,
    /// Reduced exponent of the bound.
    pub m: u32,
    /// Reduced comparison exponent of every subgroup.
    pub exps: Vec<u32>,
}

impl Scale {
    pub fn new(gd: &GroupData, x: &ParamVector, exponent: Ratio<u64>) -> Result<Self> {
        if exponent.is_zero() {
            return Err(CensusError::InvalidBound("bound exponent must be positive".into()));
        }
        let weights = ThetaWeights::new(gd, x)?;
        let q = *exponent.denom();
        let big_m = *exponent.numer() * weights.denom;
        let g = weights.scaled.iter().fold(big_m, |acc, &w| acc.gcd(&(w * q)));
        let too_big = || CensusError::Resource("comparison exponent too large".into());
        let m = u32::try_from(big_m / g).map_err(|_| too_big())?;
        let exps = weights
            .scaled
            .iter()
            .map(|&w| u32::try_from(w * q / g).map_err(|_| too_big()))
            .collect::<Result<_>>()?;
        Ok(Scale { weights, q, g, m, exps })
    }

    /// Comparison exponent for a `D`-scaled index exponent (a sum of subgroup weights).
    pub fn reduce(&self, scaled: u64) -> u32 {
        (scaled * self.q / self.g) as u32
    }

    /// `base^m`, the reduced threshold.
    pub fn limit(&self, base: u64) -> BigUint {
        BigUint::from(base).pow(self.m)
    }
}

/// `theta_x` of a profile as an exact index value.
pub fn theta(gd: &GroupData, profile: &RamificationProfile, x: &ParamVector) -> IndexValue {
    let exps = profile
        .assignments
        .iter()
        .map(|(&p, &h)| (p, x.to_scaled(gd.x_of_subgroup(h, x))))
        .collect();
    IndexValue::from_exponents(exps, x.denom)
}

/// Where a homomorphism lands when slicing by the number of Omega-meeting tame primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slice {
    Gamma(u32),
    /// Some wild image meets Omega and no tame one does: every indicator vanishes.
    Unsliced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Indicator {
    pub gamma_tame: u32,
    pub wild_meets: bool,
}

impl Indicator {
    /// `1_(Omega, gamma)`.
    pub fn flag(&self, gamma: u32) -> bool {
        if gamma == 0 {
            self.gamma_tame == 0 && !self.wild_meets
        } else {
            self.gamma_tame == gamma
        }
    }

    pub fn slice(&self) -> Slice {
        if self.gamma_tame == 0 && self.wild_meets {
            Slice::Unsliced
        } else {
            Slice::Gamma(self.gamma_tame)
        }
    }
}

pub fn indicator_gamma(gd: &GroupData, profile: &RamificationProfile, omega: &OmegaSet) -> Indicator {
    let n = gd.group.order() as u64;
    let mut ind = Indicator {
        gamma_tame: 0,
        wild_meets: false,
    };
    for (&p, &h) in &profile.assignments {
        if gd.lattice.get(h).elements.meets(omega.mask) {
            if n % p == 0 {
                ind.wild_meets = true;
            } else {
                ind.gamma_tame += 1;
            }
        }
    }
    ind
}

/// Number of homomorphisms with exactly this profile.
pub fn weight(profile: &RamificationProfile, table: &SurTable) -> u128 {
    profile
        .assignments
        .iter()
        .map(|(&p, &h)| table.sur(p, h) as u128)
        .product()
}

pub fn is_generating(gd: &GroupData, profile: &RamificationProfile) -> bool {
    gd.join_all(profile.assignments.values().copied()) == gd.lattice.whole()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Hom,
    Sur,
}

/// Everything that determines a census.
#[derive(Clone, Debug)]
pub struct CensusQuery<'a> {
    pub gd: &'a GroupData,
    pub x: &'a ParamVector,
    pub omega: &'a OmegaSet,
    /// Ascending checkpoint bases; the last one is the bound `X`.
    pub checkpoints: Vec<u64>,
    /// Every checkpoint threshold is `base^exponent`.
    pub exponent: Ratio<u64>,
    /// Homomorphisms are counted into this subgroup; surjective means onto it.
    pub target: SubgroupId,
    pub gamma_max: u32,
    pub max_prime: u64,
}

impl<'a> CensusQuery<'a> {
    pub fn new(gd: &'a GroupData, x: &'a ParamVector, omega: &'a OmegaSet, bound: u64) -> Self {
        CensusQuery {
            gd,
            x,
            omega,
            checkpoints: vec![bound],
            exponent: Ratio::one(),
            target: gd.lattice.whole(),
            gamma_max: 0,
            max_prime: DEFAULT_MAX_PRIME,
        }
    }

    pub fn with_checkpoints(mut self, mut cps: Vec<u64>) -> Self {
        cps.sort_unstable();
        cps.dedup();
        self.checkpoints = cps;
        self
    }

    pub fn with_exponent(mut self, e: Ratio<u64>) -> Self {
        self.exponent = e;
        self
    }

    pub fn with_target(mut self, h: SubgroupId) -> Self {
        self.target = h;
        self
    }

    pub fn with_gamma_max(mut self, g: u32) -> Self {
        self.gamma_max = g;
        self
    }

    pub fn bound(&self) -> u64 {
        *self.checkpoints.last().expect("at least one checkpoint")
    }
}

/// Default checkpoint schedule `X, X/2, X/4, ...` (integer parts), ascending.
pub fn geometric_checkpoints(bound: u64, count: usize) -> Vec<u64> {
    let mut v: Vec<u64> = (0..count)
        .map(|k| bound >> k)
        .take_while(|&b| b >= 1)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// `floor(10^(k / per_decade))` for `k` from `lo * per_decade` to `hi * per_decade`.
pub fn decade_checkpoints(lo: u32, hi: u32, per_decade: u32) -> Vec<u64> {
    let per = per_decade.max(1);
    let mut v: Vec<u64> = (lo * per..=hi * per)
        .filter_map(|k| 10u128.checked_pow(k))
        .map(|n| crate::arith::integer_root(n, per) as u64)
        .collect();
    v.dedup();
    v
}

/// Counts for one checkpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub bound: u64,
    /// Indexed by gamma.
    pub sur: Vec<u128>,
    pub hom: Vec<u128>,
    pub unsliced_sur: u128,
    pub unsliced_hom: u128,
}

impl CensusRow {
    pub fn total_sur(&self) -> u128 {
        self.sur.iter().sum::<u128>() + self.unsliced_sur
    }

    pub fn total_hom(&self) -> u128 {
        self.hom.iter().sum::<u128>() + self.unsliced_hom
    }

    pub fn sur_at(&self, gamma: u32) -> u128 {
        self.sur.get(gamma as usize).copied().unwrap_or(0)
    }

    pub fn hom_at(&self, gamma: u32) -> u128 {
        self.hom.get(gamma as usize).copied().unwrap_or(0)
    }

    pub fn count(&self, mode: Mode, gamma: Option<u32>) -> u128 {
        match (mode, gamma) {
            (Mode::Sur, Some(g)) => self.sur_at(g),
            (Mode::Hom, Some(g)) => self.hom_at(g),
            (Mode::Sur, None) => self.total_sur(),
            (Mode::Hom, None) => self.total_hom(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusTable {
    pub exponent: Ratio<u64>,
    pub rows: Vec<CensusRow>,
}

impl CensusTable {
    pub fn last(&self) -> &CensusRow {
        self.rows.last().expect("non-empty table")
    }

    pub fn slices(&self) -> usize {
        self.rows.first().map_or(0, |r| r.sur.len())
    }

    /// `(X, N)` pairs for plotting and fitting.
    pub fn series(&self, mode: Mode, gamma: Option<u32>) -> Vec<(f64, f64)> {
        let e = self.exponent.to_f64().unwrap_or(1.0);
        self.rows
            .iter()
            .map(|r| ((r.bound as f64).powf(e), r.count(mode, gamma) as f64))
            .collect()
    }
}

/// Visit of one profile during enumeration.
pub struct ProfileView<'p> {
    pub path: &'p [(u64, SubgroupId)],
    pub weight: u128,
    pub surjective: bool,
    pub indicator: Indicator,
    /// Index of the first checkpoint whose threshold exceeds theta.
    pub bucket: usize,
}

pub trait Sink: Send + Sized {
    fn visit(&mut self, view: &ProfileView<'_>);
    fn merge(&mut self, other: Self);
}

/// Per-bucket counts, later turned into cumulative checkpoint rows.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketSink {
    pub sur: Vec<Vec<u128>>,
    pub hom: Vec<Vec<u128>>,
    pub unsliced_sur: Vec<u128>,
    pub unsliced_hom: Vec<u128>,
}

impl BucketSink {
    pub fn new(buckets: usize) -> Self {
        BucketSink {
            sur: vec![Vec::new(); buckets],
            hom: vec![Vec::new(); buckets],
            unsliced_sur: vec![0; buckets],
            unsliced_hom: vec![0; buckets],
        }
    }

    pub fn into_table(self, query: &CensusQuery<'_>) -> CensusTable {
        let slices = self
            .sur
            .iter()
            .chain(&self.hom)
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .max(query.gamma_max as usize + 1);
        let mut rows = Vec::with_capacity(query.checkpoints.len());
        let mut acc = CensusRow {
            bound: 0,
            sur: vec![0; slices],
            hom: vec![0; slices],
            unsliced_sur: 0,
            unsliced_hom: 0,
        };
        for (b, &cp) in query.checkpoints.iter().enumerate() {
            for (g, v) in self.sur[b].iter().enumerate() {
                acc.sur[g] += v;
            }
            for (g, v) in self.hom[b].iter().enumerate() {
                acc.hom[g] += v;
            }
            acc.unsliced_sur += self.unsliced_sur[b];
            acc.unsliced_hom += self.unsliced_hom[b];
            acc.bound = cp;
            rows.push(acc.clone());
        }
        CensusTable {
            exponent: query.exponent,
            rows,
        }
    }
}

fn add_at(v: &mut Vec<u128>, i: usize, w: u128) {
    if v.len() <= i {
        v.resize(i + 1, 0);
    }
    v[i] += w;
}

fn add_vec(a: &mut Vec<u128>, b: &[u128]) {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

impl Sink for BucketSink {
    fn visit(&mut self, v: &ProfileView<'_>) {
        match v.indicator.slice() {
            Slice::Gamma(g) => {
                add_at(&mut self.hom[v.bucket], g as usize, v.weight);
                if v.surjective {
                    add_at(&mut self.sur[v.bucket], g as usize, v.weight);
                }
            }
            Slice::Unsliced => {
                self.unsliced_hom[v.bucket] += v.weight;
                if v.surjective {
                    self.unsliced_sur[v.bucket] += v.weight;
                }
            }
        }
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.sur.iter_mut().zip(&other.sur) {
            add_vec(a, b);
        }
        for (a, b) in self.hom.iter_mut().zip(&other.hom) {
            add_vec(a, b);
        }
        for (a, b) in self.unsliced_sur.iter_mut().zip(&other.unsliced_sur) {
            *a += b;
        }
        for (a, b) in self.unsliced_hom.iter_mut().zip(&other.unsliced_hom) {
            *a += b;
        }
    }
}

/// Hom and Sur counts of one index value, split by slice.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SliceCounts {
    pub hom: BTreeMap<Slice, u128>,
    pub sur: BTreeMap<Slice, u128>,
}

impl SliceCounts {
    pub fn get(&self, mode: Mode, slice: Option<Slice>) -> u128 {
        let m = match mode {
            Mode::Hom => &self.hom,
            Mode::Sur => &self.sur,
        };
        match slice {
            Some(s) => m.get(&s).copied().unwrap_or(0),
            None => m.values().sum(),
        }
    }
}

/// Coefficients `d -> (a_d, b_d)` per slice.
pub struct CoefficientSink {
    index_exps: Vec<u64>,
    denom: u64,
    pub map: HashMap<IndexValue, SliceCounts>,
}

impl Sink for CoefficientSink {
    fn visit(&mut self, v: &ProfileView<'_>) {
        let exps = v.path.iter().map(|&(p, h)| (p, self.index_exps[h])).collect();
        let key = IndexValue::from_exponents(exps, self.denom);
        let e = self.map.entry(key).or_default();
        let s = v.indicator.slice();
        *e.hom.entry(s).or_default() += v.weight;
        if v.surjective {
            *e.sur.entry(s).or_default() += v.weight;
        }
    }

    fn merge(&mut self, other: Self) {
        for (k, v) in other.map {
            let e = self.map.entry(k).or_default();
            for (s, c) in v.hom {
                *e.hom.entry(s).or_default() += c;
            }
            for (s, c) in v.sur {
                *e.sur.entry(s).or_default() += c;
            }
        }
    }
}

/// Thresholds in reduced integer form: theta is below checkpoint `j` iff
/// `prod p^{exps[H_p]} < limits[j]`.
#[derive(Clone, Debug)]
enum Limits {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

trait Magnitude: Clone + Send + Sync + Sized {
    fn unit() -> Self;
    /// `self * p^e` if it stays below `limit`.
    fn times_pow(&self, p: u64, e: u32, limit: &Self) -> Option<Self>;
    fn lt(&self, other: &Self) -> bool;
}

impl Magnitude for u128 {
    fn unit() -> Self {
        1
    }

    #[inline]
    fn times_pow(&self, p: u64, e: u32, limit: &Self) -> Option<Self> {
        let mut v = *self;
        for _ in 0..e {
            v = v.checked_mul(p as u128)?;
            if v >= *limit {
                return None;
            }
        }
        (v < *limit).then_some(v)
    }

    fn lt(&self, other: &Self) -> bool {
        self < other
    }
}

impl Magnitude for BigUint {
    fn unit() -> Self {
        <BigUint as One>::one()
    }

    fn times_pow(&self, p: u64, e: u32, limit: &Self) -> Option<Self> {
        let v = self * BigUint::from(p).pow(e);
        (v < *limit).then_some(v)
    }

    fn lt(&self, other: &Self) -> bool {
        self < other
    }
}

#[derive(Clone, Debug)]
struct TameImage {
    id: SubgroupId,
    /// Position in the cyclic list, for the join table.
    slot: usize,
    sur: u64,
    exp: u32,
    meets: bool,
}

#[derive(Clone, Debug)]
struct WildRoot {
    assignments: Vec<(u64, SubgroupId)>,
    weight: u128,
    gen: SubgroupId,
    wild_meets: bool,
}

/// A unit of enumeration work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub root: usize,
    /// `None`: the root profile alone. Otherwise the first tame prime has
    /// index in this half-open range of the tame prime list.
    pub first_prime: Option<(usize, usize)>,
}

/// Prepared census: image tables, thresholds and the branch list.
pub struct Enumerator<'a> {
    query: CensusQuery<'a>,
    modulus: u64,
    exps: Vec<u32>,
    index_exps: Vec<u64>,
    limits: Limits,
    tame_images: Vec<Vec<TameImage>>,
    min_tame_exp: u32,
    join_cyclic: Vec<Vec<SubgroupId>>,
    tame_primes: Vec<u32>,
    roots: Vec<WildRoot>,
    branches: Vec<Branch>,
}

impl<'a> Enumerator<'a> {
    pub fn new(query: CensusQuery<'a>) -> Result<Self> {
        Self::with_primes(query, None)
    }

    /// `primes` may supply a cached table; it is used when it reaches far enough.
    pub fn with_primes(query: CensusQuery<'a>, primes: Option<&PrimeTable>) -> Result<Self> {
        let gd = query.gd;
        if query.checkpoints.is_empty() || query.checkpoints[0] < 1 {
            return Err(CensusError::InvalidBound("checkpoints must be >= 1".into()));
        }
        if query.exponent.is_zero() {
            return Err(CensusError::InvalidBound("bound exponent must be positive".into()));
        }
        let scale = Scale::new(gd, query.x, query.exponent)?;
        let exps = scale.exps.clone();
        let big_limits: Vec<BigUint> = query.checkpoints.iter().map(|&b| scale.limit(b)).collect();
        let lmax = big_limits.last().unwrap().clone();
        let limits = if lmax.bits() <= 126 {
            Limits::Small(big_limits.iter().map(|l| l.to_u128().unwrap()).collect())
        } else {
            Limits::Big(big_limits)
        };

        let table = SurTable::new(gd);
        let modulus = table.modulus();
        let target_mask = gd.lattice.get(query.target).elements;
        let inside = |h: SubgroupId| gd.lattice.get(h).elements.is_subset(target_mask);
        let meets = |h: SubgroupId| gd.lattice.get(h).elements.meets(query.omega.mask);

        let cyclic = gd.cyclic_subgroups();
        let slot_of: HashMap<SubgroupId, usize> = cyclic.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let mut tame_images = vec![Vec::new(); modulus as usize];
        let mut min_tame_exp = u32::MAX;
        for (res, images) in tame_images.iter_mut().enumerate() {
            let Some(sur) = table.tame_residue(res as u64) else { continue };
            for &h in &cyclic {
                if sur[h] > 0 && inside(h) {
                    images.push(TameImage {
                        id: h,
                        slot: slot_of[&h],
                        sur: sur[h],
                        exp: exps[h],
                        meets: meets(h),
                    });
                    min_tame_exp = min_tame_exp.min(exps[h]);
                }
            }
            images.sort_by_key(|i| (i.exp, i.id));
        }
        let join_cyclic = (0..gd.lattice.len())
            .map(|s| cyclic.iter().map(|&c| gd.join(s, c)).collect())
            .collect();

        // Wild roots: every combination of images at the primes dividing |G|.
        let mut roots = vec![WildRoot {
            assignments: Vec::new(),
            weight: 1,
            gen: gd.lattice.trivial(),
            wild_meets: false,
        }];
        let mut root_values: Vec<BigUint> = vec![<BigUint as One>::one()];
        for p in table.wild_primes() {
            let sur = table.at(p);
            let mut next = Vec::new();
            let mut next_values = Vec::new();
            for (root, value) in roots.iter().zip(&root_values) {
                for h in 0..gd.lattice.len() {
                    if sur[h] == 0 || !inside(h) {
                        continue;
                    }
                    let v = value * BigUint::from(p).pow(exps[h]);
                    if v >= lmax {
                        continue;
                    }
                    let mut a = root.assignments.clone();
                    if h != gd.lattice.trivial() {
                        a.push((p, h));
                    }
                    next.push(WildRoot {
                        assignments: a,
                        weight: root.weight * sur[h] as u128,
                        gen: gd.join(root.gen, h),
                        wild_meets: root.wild_meets || meets(h),
                    });
                    next_values.push(v);
                }
            }
            roots = next;
            root_values = next_values;
        }

        let tame_primes: Vec<u32> = if min_tame_exp == u32::MAX {
            Vec::new()
        } else {
            let lmax_u = lmax.to_u128().unwrap_or(u128::MAX);
            let pmax = integer_root(lmax_u.saturating_sub(1), min_tame_exp);
            if pmax > query.max_prime as u128 {
                return Err(CensusError::Resource(format!(
                    "bound needs primes up to {pmax}, above the cap {}",
                    query.max_prime
                )));
            }
            let pmax = pmax as u64;
            let owned;
            let all: &[u32] = match primes {
                Some(t) if t.limit() >= pmax => t.primes(),
                _ => {
                    owned = PrimeTable::sieve(pmax)?;
                    owned.primes()
                }
            };
            all.iter()
                .copied()
                .take_while(|&p| p as u64 <= pmax)
                .filter(|&p| modulus % p as u64 != 0)
                .collect()
        };

        let mut branches = Vec::new();
        for root in 0..roots.len() {
            branches.push(Branch {
                root,
                first_prime: None,
            });
            // First-prime ranges [2^k, 2^{k+1}) carry roughly equal work.
            let mut lo = 0usize;
            let mut edge = 4u64;
            while lo < tame_primes.len() {
                let hi = tame_primes.partition_point(|&p| (p as u64) < edge).max(lo + 1);
                branches.push(Branch {
                    root,
                    first_prime: Some((lo, hi)),
                });
                lo = hi;
                edge *= 2;
            }
        }

        Ok(Enumerator {
            index_exps: scale.weights.scaled.clone(),
            query,
            modulus,
            exps,
            limits,
            tame_images,
            min_tame_exp,
            join_cyclic,
            tame_primes,
            roots,
            branches,
        })
    }

    pub fn query(&self) -> &CensusQuery<'a> {
        &self.query
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn bucket_sink(&self) -> BucketSink {
        BucketSink::new(self.query.checkpoints.len())
    }

    pub fn coefficient_sink(&self) -> CoefficientSink {
        CoefficientSink {
            index_exps: self.index_exps.clone(),
            denom: self.query.x.denom,
            map: HashMap::new(),
        }
    }

    /// Runs the given branches on `threads` workers and merges in branch order.
    pub fn run<S, F>(&self, branch_ids: &[usize], threads: usize, make: F) -> Result<S>
    where
        S: Sink,
        F: Fn() -> S + Sync,
    {
        let work = |id: &usize| {
            let mut s = make();
            self.run_branch(self.branches[*id], &mut s);
            s
        };
        let parts: Vec<S> = if threads <= 1 {
            branch_ids.iter().map(work).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CensusError::Resource(e.to_string()))?;
            pool.install(|| branch_ids.par_iter().map(work).collect())
        };
        let mut it = parts.into_iter();
        let mut acc = it.next().unwrap_or_else(&make);
        for p in it {
            acc.merge(p);
        }
        Ok(acc)
    }

    pub fn run_all<S, F>(&self, threads: usize, make: F) -> Result<S>
    where
        S: Sink,
        F: Fn() -> S + Sync,
    {
        let ids: Vec<usize> = (0..self.branches.len()).collect();
        self.run(&ids, threads, make)
    }

    pub fn run_branch<S: Sink>(&self, branch: Branch, sink: &mut S) {
        match &self.limits {
            Limits::Small(l) => self.branch_with::<u128, S>(branch, l, sink),
            Limits::Big(l) => self.branch_with::<BigUint, S>(branch, l, sink),
        }
    }

    fn branch_with<M: Magnitude, S: Sink>(&self, branch: Branch, limits: &[M], sink: &mut S) {
        let root = &self.roots[branch.root];
        let lmax = limits.last().unwrap();
        let mut value = M::unit();
        for &(p, h) in &root.assignments {
            value = value
                .times_pow(p, self.exps[h], lmax)
                .expect("roots are below the bound");
        }
        let node = Node {
            value,
            weight: root.weight,
            gen: root.gen,
            gamma: 0,
            wild_meets: root.wild_meets,
        };
        let mut path = root.assignments.clone();
        match branch.first_prime {
            None => self.emit(&node, &path, limits, sink),
            Some((lo, hi)) => self.descend(&node, lo, Some(hi), &mut path, limits, sink),
        }
    }

    fn emit<M: Magnitude, S: Sink>(&self, node: &Node<M>, path: &[(u64, SubgroupId)], limits: &[M], sink: &mut S) {
        let bucket = limits.partition_point(|l| !node.value.lt(l));
        sink.visit(&ProfileView {
            path,
            weight: node.weight,
            surjective: node.gen == self.query.target,
            indicator: Indicator {
                gamma_tame: node.gamma,
                wild_meets: node.wild_meets,
            },
            bucket,
        });
    }

    fn descend<M: Magnitude, S: Sink>(
        &self,
        node: &Node<M>,
        start: usize,
        stop: Option<usize>,
        path: &mut Vec<(u64, SubgroupId)>,
        limits: &[M],
        sink: &mut S,
    ) {
        let lmax = limits.last().unwrap();
        let end = stop.unwrap_or(self.tame_primes.len());
        for idx in start..end {
            let p = self.tame_primes[idx] as u64;
            if node.value.times_pow(p, self.min_tame_exp, lmax).is_none() {
                break;
            }
            for img in &self.tame_images[(p % self.modulus) as usize] {
                let Some(value) = node.value.times_pow(p, img.exp, lmax) else {
                    break;
                };
                let child = Node {
                    value,
                    weight: node.weight * img.sur as u128,
                    gen: self.join_cyclic[node.gen][img.slot],
                    gamma: node.gamma + img.meets as u32,
                    wild_meets: node.wild_meets,
                };
                path.push((p, img.id));
                self.emit(&child, path, limits, sink);
                self.descend(&child, idx + 1, None, path, limits, sink);
                path.pop();
            }
        }
    }

    /// Calls `f` on every profile below the bound, single threaded.
    pub fn visit_profiles<F: FnMut(&ProfileView<'_>) + Send>(&self, f: F) {
        let mut sink = FnSink(f);
        for b in self.branches.clone() {
            self.run_branch(b, &mut sink);
        }
    }
}

struct FnSink<F>(F);

impl<F: FnMut(&ProfileView<'_>) + Send> Sink for FnSink<F> {
    fn visit(&mut self, view: &ProfileView<'_>) {
        (self.0)(view)
    }

    fn merge(&mut self, _other: Self) {
        unreachable!("visitor sinks are never merged")
    }
}

struct Node<M> {
    value: M,
    weight: u128,
    gen: SubgroupId,
    gamma: u32,
    wild_meets: bool,
}

/// Exact census with cumulative counts at every checkpoint.
pub fn enumerate_census(query: CensusQuery<'_>, threads: usize) -> Result<CensusTable> {
    let e = Enumerator::new(query)?;
    let sink = e.run_all(threads, || e.bucket_sink())?;
    Ok(sink.into_table(e.query()))
}

/// Largest tame prime the census at the query's final checkpoint can involve;
/// callers use it to size a cached prime table.
pub fn tame_prime_limit(query: &CensusQuery<'_>) -> Result<u64> {
    let gd = query.gd;
    let scale = Scale::new(gd, query.x, query.exponent)?;
    let emin = gd
        .cyclic_subgroups()
        .into_iter()
        .map(|h| scale.exps[h])
        .min()
        .unwrap_or(1)
        .max(1);
    let lmax = scale
        .limit(query.bound())
        .to_u128()
        .ok_or_else(|| CensusError::Resource("bound too large".into()))?;
    let pmax = integer_root(lmax.saturating_sub(1), emin);
    u64::try_from(pmax)
        .ok()
        .filter(|&p| p <= query.max_prime)
        .ok_or_else(|| CensusError::Resource(format!("bound needs primes up to {pmax}, above the cap {}", query.max_prime)))
}

/// All coefficients below the bound, with hom/sur counts per slice.
pub fn coefficients(query: CensusQuery<'_>, threads: usize) -> Result<BTreeMap<IndexValue, SliceCounts>> {
    let e = Enumerator::new(query)?;
    let sink = e.run_all(threads, || e.coefficient_sink())?;
    Ok(sink.map.into_iter().collect())
}

/// `d -> a_d` (hom) or `d -> b_d` (sur) for one slice (`None`: all homomorphisms).
pub fn count_by_index(
    query: CensusQuery<'_>,
    mode: Mode,
    slice: Option<Slice>,
) -> Result<BTreeMap<IndexValue, u128>> {
    Ok(coefficients(query, 1)?
        .into_iter()
        .map(|(k, v)| (k, v.get(mode, slice)))
        .filter(|(_, c)| *c > 0)
        .collect())
}

/// Checks an element set is a subgroup-closed Omega and the params match; used by callers
/// that build queries from user input.
pub fn check_inputs(gd: &GroupData, x: &ParamVector, omega: &OmegaSet) -> Result<()> {
    if x.len() != gd.class_count() {
        return Err(CensusError::ParamLength {
            expected: gd.class_count(),
            got: x.len(),
        });
    }
    gd.validate_omega(omega.mask).map(|_| ())
}

/// True if `p` is prime and divides `|G|`.
pub fn is_wild_prime(gd: &GroupData, p: u64) -> bool {
    is_prime(p) && gd.group.order() as u64 % p == 0
}
