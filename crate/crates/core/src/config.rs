//! Run configuration: a `key=value` text format.
//!
//! ```text
//! group=2,2
//! params=1,3/2,3/2
//! omega=2,3
//! gamma=0..3
//! bound=1e6
//! mode=sur
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. `group`, `params` and
//! `bound` are required; everything else has a default.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CensusError, Result};
use crate::group::{GroupData, OmegaSet, ParamVector};
use crate::profile::{decade_checkpoints, Mode};

const KEYS: [&str; 9] = ["group", "params", "omega", "gamma", "bound", "checkpoints", "mode", "threads", "out"];
const DEFAULT_PER_DECADE: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckpointSpec {
    /// `per` checkpoints per decade from 10 up to the bound.
    Decades(u32),
    List(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub group: Vec<u64>,
    pub params: Vec<Ratio<u64>>,
    /// One-based class indices.
    pub omega: Vec<usize>,
    /// Inclusive range of slices reported on.
    pub gamma: (u32, u32),
    pub bound: u64,
    pub checkpoints: CheckpointSpec,
    pub mode: Mode,
    pub threads: usize,
    pub out: PathBuf,
}

/// The configuration turned into engine objects.
pub struct Resolved {
    pub gd: GroupData,
    pub x: ParamVector,
    pub omega: OmegaSet,
    pub checkpoints: Vec<u64>,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved> {
        let gd = GroupData::new(&self.group)?;
        let x = ParamVector::for_group(&gd, self.params.clone())?;
        let omega = gd.omega_from_indices(&self.omega)?;
        Ok(Resolved {
            gd,
            x,
            omega,
            checkpoints: self.checkpoint_list(),
        })
    }

    pub fn checkpoint_list(&self) -> Vec<u64> {
        let mut v: Vec<u64> = match &self.checkpoints {
            CheckpointSpec::Decades(per) => {
                let hi = (self.bound as f64).log10().floor() as u32 + 1;
                decade_checkpoints(1, hi, *per)
                    .into_iter()
                    .filter(|&c| c < self.bound)
                    .collect()
            }
            CheckpointSpec::List(l) => l.iter().copied().filter(|&c| c < self.bound).collect(),
        };
        v.push(self.bound);
        v.sort_unstable();
        v.dedup();
        v
    }

    /// SHA-256 over the fields that affect results (not `threads` or `out`).
    pub fn semantic_hash(&self) -> String {
        #[derive(Serialize)]
        struct Semantic<'a> {
            group: &'a [u64],
            params: Vec<String>,
            omega: BTreeSet<usize>,
            gamma: (u32, u32),
            bound: u64,
            checkpoints: Vec<u64>,
            mode: Mode,
        }
        let s = Semantic {
            group: &self.group,
            params: self.params.iter().map(|p| p.to_string()).collect(),
            omega: self.omega.iter().copied().collect(),
            gamma: self.gamma,
            bound: self.bound,
            checkpoints: self.checkpoint_list(),
            mode: self.mode,
        };
        let bytes = serde_json::to_vec(&s).expect("plain data serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> CensusError {
    CensusError::Parse { line, msg: msg.into() }
}

/// Integers written as `1000000`, `1e6`, `2.5e3` or `10^6`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    let bad = || format!("not a whole number: `{s}`");
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        let e: u32 = e.trim().parse().map_err(|_| bad())?;
        return b.checked_pow(e).ok_or_else(|| format!("`{s}` overflows"));
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let e: u32 = e.trim().parse().map_err(|_| bad())?;
        let (int, frac) = m.split_once('.').unwrap_or((m, ""));
        if frac.len() as u32 > e {
            return Err(bad());
        }
        let digits: u64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
        return 10u64
            .checked_pow(e - frac.len() as u32)
            .and_then(|p| digits.checked_mul(p))
            .ok_or_else(|| format!("`{s}` overflows"));
    }
    s.parse().map_err(|_| bad())
}

fn parse_list<T>(line: usize, v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|t| f(t.trim()).map_err(|m| parse_err(line, m))).collect()
}

fn parse_gamma(s: &str) -> std::result::Result<(u32, u32), String> {
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad gamma `{t}`"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let g = num(s)?;
            (g, g)
        }
    };
    if lo > hi {
        return Err(format!("empty gamma range {s}"));
    }
    Ok((lo, hi))
}

pub fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s.trim() {
        "sur" => Ok(Mode::Sur),
        "hom" => Ok(Mode::Hom),
        other => Err(format!("unknown mode `{other}` (expected sur or hom)")),
    }
}

fn parse_checkpoints(s: &str) -> std::result::Result<CheckpointSpec, String> {
    let s = s.trim();
    if s == "auto" {
        return Ok(CheckpointSpec::Decades(DEFAULT_PER_DECADE));
    }
    if let Some(per) = s.strip_prefix("decades:") {
        let per: u32 = per.trim().parse().map_err(|_| format!("bad checkpoint density `{per}`"))?;
        if per == 0 {
            return Err("checkpoint density must be positive".into());
        }
        return Ok(CheckpointSpec::Decades(per));
    }
    let v = s.split(',').map(parse_count).collect::<std::result::Result<Vec<_>, _>>()?;
    if v.contains(&0) {
        return Err("checkpoints must be >= 1".into());
    }
    Ok(CheckpointSpec::List(v))
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut seen: Vec<(&str, usize, &str)> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key=value, got `{t}`")))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(parse_err(line, format!("unknown key `{k}`")));
        }
        if seen.iter().any(|(s, _, _)| *s == k) {
            return Err(parse_err(line, format!("duplicate key `{k}`")));
        }
        seen.push((k, line, v.trim()));
    }
    let get = |k: &str| seen.iter().find(|(s, _, _)| *s == k).map(|&(_, l, v)| (l, v));
    let require = |k: &str| get(k).ok_or_else(|| parse_err(last_line + 1, format!("missing required key `{k}`")));

    let (gl, gv) = require("group")?;
    let group = parse_list(gl, gv, |t| t.parse::<u64>().map_err(|_| format!("bad invariant factor `{t}`")))?;
    let (pl, pv) = require("params")?;
    let params = parse_list(pl, pv, |t| {
        let r = Ratio::<u64>::from_str(t).map_err(|_| format!("malformed rational `{t}`"))?;
        if *r.denom() == 0 || *r.numer() == 0 {
            return Err(format!("non-positive parameter `{t}`"));
        }
        Ok(r)
    })?;
    let (bl, bv) = require("bound")?;
    let bound = parse_count(bv).map_err(|m| parse_err(bl, m))?;
    if bound < 1 {
        return Err(parse_err(bl, "bound must be >= 1"));
    }
    let omega = match get("omega") {
        Some((l, v)) => parse_list(l, v, |t| t.parse::<usize>().map_err(|_| format!("bad class index `{t}`")))?,
        None => Vec::new(),
    };
    let gamma = match get("gamma") {
        Some((l, v)) => parse_gamma(v).map_err(|m| parse_err(l, m))?,
        None => (0, 0),
    };
    let checkpoints = match get("checkpoints") {
        Some((l, v)) => parse_checkpoints(v).map_err(|m| parse_err(l, m))?,
        None => CheckpointSpec::Decades(DEFAULT_PER_DECADE),
    };
    let mode = match get("mode") {
        Some((l, v)) => parse_mode(v).map_err(|m| parse_err(l, m))?,
        None => Mode::Sur,
    };
    let threads = match get("threads") {
        Some((l, v)) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => return Err(parse_err(l, format!("threads must be a positive integer, got `{v}`"))),
        },
        None => 1,
    };
    let out = get("out").map_or_else(|| PathBuf::from("census-out"), |(_, v)| PathBuf::from(v));

    let cfg = RunConfig {
        group,
        params,
        omega,
        gamma,
        bound,
        checkpoints,
        mode,
        threads,
        out,
    };
    // Semantic validation, reported against the offending line.
    let gd = GroupData::new(&cfg.group).map_err(|e| parse_err(gl, e.to_string()))?;
    ParamVector::for_group(&gd, cfg.params.clone()).map_err(|e| parse_err(pl, e.to_string()))?;
    if let Some((l, _)) = get("omega") {
        gd.omega_from_indices(&cfg.omega).map_err(|e| parse_err(l, e.to_string()))?;
    }
    Ok(cfg)
}
