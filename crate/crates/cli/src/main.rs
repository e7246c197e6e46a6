use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use abelian_census::analysis::{delange_shape, singularity_data};
use abelian_census::config::{parse_config, RunConfig};
use abelian_census::primes::cache_dir_from_env;
use abelian_census::profile::{coefficients, CensusQuery, Mode, Slice};
use abelian_census::run::{run_census, RunOptions, RunStatus};
use abelian_census::series::{mu_slices, pi_series, pi_slices_by_inversion, psi_series, tau_series, GeneratingSeries};
use abelian_census::structure::StructureReport;
use abelian_census::CensusError;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact census of abelian extensions of Q ordered by parametric invariants.
#[derive(Parser)]
#[command(name = "abelcensus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count fields up to the bound and write CSV/JSON outputs.
    Census {
        #[command(flatten)]
        keys: ConfigKeys,
        /// Continue an interrupted run from its resume token.
        #[arg(long)]
        resume: bool,
        /// Process at most this many enumeration branches, then stop with a resume token.
        #[arg(long)]
        max_branches: Option<usize>,
        /// Prime table cache directory (defaults to $ABELCENSUS_CACHE_DIR).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Print structure constants and singularity data.
    Constants {
        #[command(flatten)]
        keys: ConfigKeys,
    },
    /// Dump a truncated generating series.
    Series {
        #[command(flatten)]
        keys: ConfigKeys,
        #[arg(long, value_enum, default_value = "pi")]
        kind: Kind,
    },
    /// Cross-check the convolution and enumeration paths and the coefficient bounds.
    Verify {
        #[command(flatten)]
        keys: ConfigKeys,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Mu,
    Pi,
    Psi,
    Tau,
}

/// Configuration file plus per-key overrides.
#[derive(Args)]
struct ConfigKeys {
    /// key=value configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl ConfigKeys {
    fn load(&self) -> Result<RunConfig, CensusError> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        let overrides = [
            ("group", &self.group),
            ("params", &self.params),
            ("omega", &self.omega),
            ("gamma", &self.gamma),
            ("bound", &self.bound),
            ("checkpoints", &self.checkpoints),
            ("mode", &self.mode),
            ("threads", &self.threads),
            ("out", &self.out),
        ];
        if overrides.iter().all(|(_, v)| v.is_none()) {
            return parse_config(&text);
        }
        // Re-render with overrides replacing the file's lines for the same key.
        let mut lines: Vec<String> = Vec::new();
        let mut set: BTreeMap<&str, &String> = BTreeMap::new();
        for (k, v) in &overrides {
            if let Some(v) = v {
                set.insert(k, v);
            }
        }
        for line in text.lines() {
            let key = line.split_once('=').map(|(k, _)| k.trim());
            if key.is_some_and(|k| set.contains_key(k)) {
                continue;
            }
            lines.push(line.to_string());
        }
        for (k, v) in set {
            lines.push(format!("{k}={v}"));
        }
        parse_config(&lines.join("\n"))
    }
}

fn exit_code(e: &CensusError) -> u8 {
    match e {
        CensusError::Resource(_) => 3,
        CensusError::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, CensusError> {
    match cmd {
        Command::Census {
            keys,
            resume,
            max_branches,
            cache_dir,
        } => {
            let cfg = keys.load()?;
            let opts = RunOptions {
                cache_dir: cache_dir.or_else(cache_dir_from_env),
                resume,
                max_branches,
            };
            let started = std::time::Instant::now();
            let report = run_census(&cfg, &opts)?;
            match report.status {
                RunStatus::Complete => {
                    let last = report.table.last();
                    eprintln!(
                        "X={} fields={} homs={} ({:.2?}) -> {}",
                        last.bound,
                        last.total_sur(),
                        last.total_hom(),
                        started.elapsed(),
                        report.out_dir.display()
                    );
                    Ok(0)
                }
                RunStatus::Partial { remaining } => {
                    eprintln!("stopped with {remaining} branches left; rerun with --resume");
                    Ok(3)
                }
            }
        }
        Command::Constants { keys } => {
            let cfg = keys.load()?;
            let r = cfg.resolve()?;
            let gammas: Vec<u32> = (cfg.gamma.0..=cfg.gamma.1).collect();
            let report = StructureReport::compute(&r.gd, &r.x, &r.omega, &gammas)?;
            print!("{}", report.to_text(&r.gd));
            for g in gammas {
                match singularity_data(&r.gd, &r.x, &r.omega, g) {
                    Ok(sd) => {
                        let amb = if sd.is_ambiguous() { " (log log exponent ambiguous)" } else { "" };
                        println!(
                            "gamma={g}: sigma0={} pole={} logs={} shape: {}{amb}",
                            sd.sigma0,
                            sd.pole_order,
                            sd.log_power,
                            delange_shape(&sd)
                        );
                    }
                    Err(e) => println!("gamma={g}: {e}"),
                }
            }
            Ok(0)
        }
        Command::Series { keys, kind } => {
            let cfg = keys.load()?;
            let r = cfg.resolve()?;
            let g = cfg.gamma.0;
            let s: GeneratingSeries = match kind {
                Kind::Mu => mu_slices(&r.gd, &r.x, &r.omega, r.gd.lattice.whole(), cfg.bound, g)?
                    .remove(&Slice::Gamma(g))
                    .expect("slice computed"),
                Kind::Pi => pi_series(&r.gd, &r.x, &r.omega, g, cfg.bound)?,
                Kind::Psi => {
                    let s = psi_series(&r.gd, &r.x, &r.omega, g, cfg.bound)?;
                    if s.is_empty() {
                        eprintln!("warning: no admissible partition for gamma={g}; series is empty");
                    }
                    s
                }
                Kind::Tau => tau_series(&r.gd, &r.x, &r.omega, g, cfg.bound)?,
            };
            print!("{}", s.dump());
            Ok(0)
        }
        Command::Verify { keys } => {
            let cfg = keys.load()?;
            let r = cfg.resolve()?;
            let gmax = cfg.gamma.1;
            let enumerated = coefficients(
                CensusQuery::new(&r.gd, &r.x, &r.omega, cfg.bound).with_gamma_max(gmax),
                cfg.threads,
            )?;
            let mut ok = true;
            let mut report = |name: String, pass: bool| {
                println!("{} {name}", if pass { "PASS" } else { "FAIL" });
                ok &= pass;
            };
            let mu = mu_slices(&r.gd, &r.x, &r.omega, r.gd.lattice.whole(), cfg.bound, gmax)?;
            let pi = pi_slices_by_inversion(&r.gd, &r.x, &r.omega, cfg.bound, gmax)?;
            for (mode, series, label) in [(Mode::Hom, &mu, "mu"), (Mode::Sur, &pi, "pi")] {
                for (slice, s) in series {
                    let agree = enumerated
                        .iter()
                        .all(|(d, c)| c.get(mode, Some(*slice)) == s.get(d))
                        && s.coefficients.keys().all(|d| enumerated.contains_key(d));
                    report(format!("{label} convolution = enumeration, slice {slice:?}"), agree);
                }
            }
            for g in cfg.gamma.0..=gmax {
                let p = &pi[&Slice::Gamma(g)];
                report(format!("mu >= pi, gamma={g}"), mu[&Slice::Gamma(g)].dominates(p));
                if !r.omega.is_empty() {
                    let psi = psi_series(&r.gd, &r.x, &r.omega, g, cfg.bound)?;
                    report(format!("psi >= pi, gamma={g}"), psi.dominates(p));
                }
                match tau_series(&r.gd, &r.x, &r.omega, g, cfg.bound) {
                    Ok(tau) => report(format!("tau <= pi, gamma={g}"), p.dominates(&tau)),
                    Err(CensusError::WitnessNotFound { .. }) => println!("SKIP tau, gamma={g}: no witness"),
                    Err(e) => return Err(e),
                }
            }
            Ok(if ok { 0 } else { 1 })
        }
    }
}
