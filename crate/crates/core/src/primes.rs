//! Prime tables: a segmented sieve, residue tags, and an on-disk cache.
//!
//! Cache files are `primes-<limit>.bin`:
//! magic `ABPRIME1`, limit (u64 LE), count (u64 LE), the primes as u32 LE,
//! then the SHA-256 of everything before it. A file that fails any check is
//! rebuilt.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CensusError, Result};

/// Environment variable naming the sieve cache directory.
pub const CACHE_ENV: &str = "ABELCENSUS_CACHE_DIR";

const MAGIC: &[u8; 8] = b"ABPRIME1";
const SEGMENT: usize = 1 << 16;

/// pi(10^k) for k = 0..=9.
pub const PI_POWERS_OF_TEN: [u64; 10] = [0, 4, 25, 168, 1229, 9592, 78498, 664579, 5761455, 50847534];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeTable {
    /// All primes `<= limit`.
    pub fn sieve(limit: u64) -> Result<Self> {
        if limit > u32::MAX as u64 {
            return Err(CensusError::Resource(format!(
                "prime limit {limit} exceeds the 32-bit table format"
            )));
        }
        Ok(PrimeTable {
            limit,
            primes: segmented_sieve(limit),
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Residue of each prime modulo `m`.
    pub fn residue_tags(&self, m: u64) -> Vec<u16> {
        assert!(m <= u16::MAX as u64);
        self.primes.iter().map(|&p| (p as u64 % m) as u16).collect()
    }

    /// Number of primes `<= x`.
    pub fn count_upto(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p as u64 <= x)
    }

    /// Sanity checks against the known values of pi(10^k).
    pub fn validate(&self) -> bool {
        if self.primes.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        if self.primes.last().is_some_and(|&p| p as u64 > self.limit) {
            return false;
        }
        let mut pow = 1u64;
        for &expected in &PI_POWERS_OF_TEN {
            if pow > self.limit {
                break;
            }
            if self.count_upto(pow) as u64 != expected {
                return false;
            }
            pow *= 10;
        }
        true
    }

    fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(24 + 4 * self.primes.len() + 32);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&self.limit.to_le_bytes());
        buf.extend_from_slice(&(self.primes.len() as u64).to_le_bytes());
        for &p in &self.primes {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        buf
    }

    fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() < 24 + 32 || &bytes[..8] != MAGIC {
            return None;
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return None;
        }
        let limit = u64::from_le_bytes(body[8..16].try_into().ok()?);
        let count = u64::from_le_bytes(body[16..24].try_into().ok()?) as usize;
        let payload = &body[24..];
        if payload.len() != count * 4 {
            return None;
        }
        let primes = payload
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let t = PrimeTable { limit, primes };
        t.validate().then_some(t)
    }
}

/// Cache directory from the environment, if set.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

/// Loads the table for `limit` from `dir`, rebuilding and rewriting it when the
/// file is missing or corrupt.
pub fn sieve_cache(limit: u64, dir: Option<&Path>) -> Result<PrimeTable> {
    let Some(dir) = dir else {
        return PrimeTable::sieve(limit);
    };
    let path = dir.join(format!("primes-{limit}.bin"));
    if let Ok(bytes) = fs::read(&path) {
        if let Some(t) = PrimeTable::decode(&bytes) {
            if t.limit == limit {
                return Ok(t);
            }
        }
    }
    let t = PrimeTable::sieve(limit)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&t.encode())?;
    f.sync_all()?;
    fs::rename(&tmp, &path)?;
    Ok(t)
}

/// Segmented sieve of Eratosthenes over odd numbers.
fn segmented_sieve(limit: u64) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = simple_sieve(root);
    let mut out: Vec<u32> = Vec::with_capacity(estimate_count(limit));
    out.push(2);
    let mut low = 3u64;
    let mut seg = vec![true; SEGMENT];
    // seg[i] stands for low + 2i
    while low <= limit {
        let high = (low + 2 * SEGMENT as u64 - 1).min(limit);
        let len = ((high - low) / 2 + 1) as usize;
        seg[..len].fill(true);
        for &p in base.iter().skip(1) {
            let p = p as u64;
            if p * p > high {
                break;
            }
            let mut start = (low.div_ceil(p) * p).max(p * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut j = ((start - low) / 2) as usize;
            while j < len {
                seg[j] = false;
                j += p as usize;
            }
        }
        for (i, &is_p) in seg[..len].iter().enumerate() {
            if is_p {
                out.push((low + 2 * i as u64) as u32);
            }
        }
        low = high + 1;
        if low % 2 == 0 {
            low += 1;
        }
    }
    out
}

/// Plain byte-per-number sieve; used for base primes and as a reference in tests.
pub fn simple_sieve(limit: u64) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut is = vec![true; n + 1];
    is[0] = false;
    is[1] = false;
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i as u32)
        .collect()
}

fn estimate_count(limit: u64) -> usize {
    let x = limit as f64;
    if x < 17.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}
