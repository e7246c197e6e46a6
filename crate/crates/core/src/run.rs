//! Census runs: enumeration with checkpoint/resume, and deterministic output files.
//!
//! A run writes into the configured output directory:
//!
//! * `census.csv`: `X,gamma,count_sur,count_hom,unsliced_sur`, one row per
//!   checkpoint and slice plus a `total` row per checkpoint;
//! * `summary.json`: structure constants, singularity data, predicted shapes,
//!   exponent fits and ratio trends;
//! * `plot.csv`: counts next to the fitted curves;
//! * `manifest.json`: config hash, class table, constants, version.
//!
//! When a branch budget stops a run early the merged partial counts and the
//! set of finished branches go to `resume.json`; a resumed run picks up from
//! there and, once complete, produces exactly the files an uninterrupted run
//! would have.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{delange_shape, fit_exponents, ratio_r, singularity_data, FitResult, TrendThresholds};
use crate::config::{Resolved, RunConfig};
use crate::error::{CensusError, Result};
use crate::primes::sieve_cache;
use crate::profile::{tame_prime_limit, BucketSink, CensusQuery, CensusTable, Enumerator, Mode};
use crate::structure::{subgroup_name, StructureReport};

pub const CSV_FILE: &str = "census.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESUME_FILE: &str = "resume.json";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory for the prime table cache.
    pub cache_dir: Option<PathBuf>,
    /// Continue from `resume.json` in the output directory if present.
    pub resume: bool,
    /// Stop after this many enumeration branches in this invocation.
    pub max_branches: Option<usize>,
}

/// Saved progress of an interrupted run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResumeToken {
    pub config_hash: String,
    pub total_branches: usize,
    pub completed: BTreeSet<usize>,
    pub partial: BucketSink,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    /// Stopped at the branch budget; `remaining` branches are left.
    Partial { remaining: usize },
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub status: RunStatus,
    pub table: CensusTable,
    pub out_dir: PathBuf,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs (or resumes) the census and writes every output file.
pub fn run_census(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport> {
    let r = cfg.resolve()?;
    let hash = cfg.semantic_hash();
    let query = CensusQuery::new(&r.gd, &r.x, &r.omega, cfg.bound)
        .with_checkpoints(r.checkpoints.clone())
        .with_gamma_max(cfg.gamma.1);
    let primes = match &opts.cache_dir {
        Some(dir) => Some(sieve_cache(tame_prime_limit(&query)?.max(2), Some(dir))?),
        None => None,
    };
    let e = Enumerator::with_primes(query, primes.as_ref())?;
    let n_branches = e.branches().len();

    fs::create_dir_all(&cfg.out)?;
    let token_path = cfg.out.join(RESUME_FILE);
    let mut token = if opts.resume && token_path.exists() {
        let t: ResumeToken = serde_json::from_str(&fs::read_to_string(&token_path)?)
            .map_err(|err| CensusError::Io(format!("unreadable resume token: {err}")))?;
        if t.config_hash != hash || t.total_branches != n_branches {
            return Err(CensusError::InvalidBound("resume token belongs to a different configuration".into()));
        }
        t
    } else {
        ResumeToken {
            config_hash: hash.clone(),
            total_branches: n_branches,
            completed: BTreeSet::new(),
            partial: e.bucket_sink(),
        }
    };

    let todo: Vec<usize> = (0..n_branches).filter(|b| !token.completed.contains(b)).collect();
    let batch: Vec<usize> = todo.iter().copied().take(opts.max_branches.unwrap_or(usize::MAX)).collect();
    let sink = e.run(&batch, cfg.threads, || e.bucket_sink())?;
    crate::profile::Sink::merge(&mut token.partial, sink);
    token.completed.extend(batch.iter().copied());
    let remaining = n_branches - token.completed.len();

    let table = token.partial.clone().into_table(e.query());
    if remaining > 0 {
        write_atomic(&token_path, &serde_json::to_string(&token).expect("token serializes"))?;
        write_atomic(&cfg.out.join(CSV_FILE), &census_csv(&table, cfg))?;
        return Ok(RunReport {
            status: RunStatus::Partial { remaining },
            table,
            out_dir: cfg.out.clone(),
        });
    }
    if token_path.exists() {
        fs::remove_file(&token_path)?;
    }
    let outputs = render_outputs(cfg, &r, &table, &hash);
    for (name, body) in &outputs {
        write_atomic(&cfg.out.join(name), body)?;
    }
    Ok(RunReport {
        status: RunStatus::Complete,
        table,
        out_dir: cfg.out.clone(),
    })
}

/// Slices shown in the CSV: the configured range and every slice with data,
/// so that slices plus the unsliced bucket always add up to the totals.
fn shown_slices(table: &CensusTable, cfg: &RunConfig) -> u32 {
    let data = table.rows.iter().map(|r| r.sur.len().max(r.hom.len())).max().unwrap_or(0) as u32;
    data.max(cfg.gamma.1 + 1)
}

pub fn census_csv(table: &CensusTable, cfg: &RunConfig) -> String {
    let mut s = String::from("X,gamma,count_sur,count_hom,unsliced_sur\n");
    let slices = shown_slices(table, cfg);
    for row in &table.rows {
        for g in 0..slices {
            let _ = writeln!(s, "{},{},{},{},{}", row.bound, g, row.sur_at(g), row.hom_at(g), row.unsliced_sur);
        }
        let _ = writeln!(
            s,
            "{},total,{},{},{}",
            row.bound,
            row.total_sur(),
            row.total_hom(),
            row.unsliced_sur
        );
    }
    s
}

fn or_error<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("serializable"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn fitted_value(fit: &FitResult, x: f64) -> f64 {
    (fit.intercept + fit.sigma_hat * x.ln() + fit.logpow_hat * x.ln().ln()).exp()
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Sur => "sur",
        Mode::Hom => "hom",
    }
}

/// Decades below the bound that fits and ratio trends look at.
pub const ANALYSIS_DECADES: u32 = 4;

/// The rows with `X >= bound / 10^ANALYSIS_DECADES`, or every row when that
/// window is too small to fit. Small-`X` counts are dominated by the first
/// few primes and bias both the exponent fits and the ratio trends.
pub fn analysis_window(table: &CensusTable) -> CensusTable {
    let Some(last) = table.rows.last() else {
        return table.clone();
    };
    let from = last.bound / 10u64.pow(ANALYSIS_DECADES);
    let rows: Vec<_> = table.rows.iter().filter(|r| r.bound >= from).cloned().collect();
    let first = rows.first().map_or(0, |r| r.bound);
    let decades = (last.bound as f64 / first.max(1) as f64).log10();
    if rows.len() < 8 || decades < 3.0 {
        return table.clone();
    }
    CensusTable {
        exponent: table.exponent,
        rows,
    }
}

/// All output files of a completed run, as `(file name, contents)`.
///
/// Exponent fits and ratio trends use [`analysis_window`]; `plot.csv` lists
/// every checkpoint.
pub fn render_outputs(cfg: &RunConfig, r: &Resolved, table: &CensusTable, hash: &str) -> Vec<(&'static str, String)> {
    let gd = &r.gd;
    let window = analysis_window(table);
    let gammas: Vec<u32> = (cfg.gamma.0..=cfg.gamma.1).collect();
    let structure = StructureReport::compute(gd, &r.x, &r.omega, &gammas);

    let mut slices = Vec::new();
    let mut fits: Vec<(String, FitResult)> = Vec::new();
    for &g in &gammas {
        let sd = singularity_data(gd, &r.x, &r.omega, g);
        let shape = sd.as_ref().ok().map(|s| delange_shape(s).to_string());
        let fit = fit_exponents(&window, cfg.mode, Some(g));
        if let Ok(f) = &fit {
            fits.push((g.to_string(), f.clone()));
        }
        slices.push(json!({
            "gamma": g,
            "singularity": or_error(sd),
            "shape": shape,
            "fit": or_error(fit),
        }));
    }
    let total_fit = fit_exponents(&window, cfg.mode, None);
    if let Ok(f) = &total_fit {
        fits.push(("total".into(), f.clone()));
    }
    let ratios: Vec<Value> = gammas
        .windows(2)
        .map(|w| or_error(ratio_r(w[0], w[1], &window, &TrendThresholds::default())))
        .collect();

    let structure_json = match &structure {
        Ok(s) => json!({
            "delta_x": s.delta_x,
            "gamma_x": s.gamma_x,
            "admissible": s.admissible,
            "conjecture": s.conjecture,
            "text": s.to_text(gd),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let summary = json!({
        "config_hash": hash,
        "mode": mode_name(cfg.mode),
        "analysis_from": window.rows.first().map(|r| r.bound),
        "structure": structure_json,
        "slices": slices,
        "total_fit": or_error(total_fit),
        "ratios": ratios,
    });

    let classes: Vec<Value> = gd
        .classes
        .iter()
        .map(|c| {
            json!({
                "index": c.index + 1,
                "members": c.members.iter().map(|&m| gd.element_name(m)).collect::<Vec<_>>(),
                "subgroup": subgroup_name(gd, c.generated),
                "param": r.x.values[c.index].to_string(),
                "in_omega": r.omega.classes.contains(&c.index),
            })
        })
        .collect();
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "group": cfg.group,
        "bound": cfg.bound,
        "checkpoints": r.checkpoints,
        "classes": classes,
        "structure_constants": structure.as_ref().ok().map(|s| json!({"delta_x": s.delta_x, "gamma_x": s.gamma_x})),
        "singularity": gammas
            .iter()
            .map(|&g| or_error(singularity_data(gd, &r.x, &r.omega, g)))
            .collect::<Vec<_>>(),
    });

    let mut plot = String::from("X,gamma,N,fitted\n");
    for (label, fit) in &fits {
        let g = label.parse::<u32>().ok();
        for row in &table.rows {
            let fitted = fitted_value(fit, row.bound as f64);
            let _ = writeln!(plot, "{},{},{},{}", row.bound, label, row.count(cfg.mode, g), fitted);
        }
    }

    vec![
        (CSV_FILE, census_csv(table, cfg)),
        (SUMMARY_FILE, pretty(&summary)),
        (PLOT_FILE, plot),
        (MANIFEST_FILE, pretty(&manifest)),
    ]
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}
