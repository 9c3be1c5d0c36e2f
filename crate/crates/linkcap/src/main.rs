//! Command-line front end: generate instances, evaluate sets, run the
//! scheduling algorithms and oracles, score Rayleigh fading, drive the
//! seeded studies, and print growth-index tables.
//!
//! Exit codes: 0 success, 2 invalid input or config, 3 size-guard refusal
//! (exhaustive searches are capped at desk scale; see `oracle --help`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use linkcap::error::{Error, Result};
use linkcap::experiments::config::RunConfig;
use linkcap::experiments::scenario::{generate, Scenario};
use linkcap::model::{Instance, LinkId};
use linkcap::oracle::{brute_force_opt, brute_force_opt_pc, max_sir_power_control};
use linkcap::rayleigh::{fading_report, mc_fading, optimize_probs, ProbVector};
use linkcap::rng::{domain, substream};
use linkcap::sched::{cluster_select, equilength_capacity, general_capacity};
use linkcap::shadowing::{gn, sample_realization, Family, ShadowingSpec};

#[derive(Parser)]
#[command(
    name = "linkcap",
    version,
    about = "SINR link-capacity toolbox: shadowed instances, scheduling \
             algorithms, exact small-instance oracles, Rayleigh fading, and \
             seeded studies"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    /// Greedy strong-signal selection over the whole instance as one cluster.
    Cluster,
    /// Cluster decomposition pipeline for near-equal lengths (max/min < 2).
    Equilength,
    /// Length-partitioned pipeline for arbitrary length spreads.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Lognormal,
    HeavyTail,
    Degenerate,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance from a scenario config and write it as JSON.
    Gen {
        /// Scenario config file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a link set on an instance: signals, affectance, SIR.
    Eval {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Comma-separated link ids; all links when omitted.
        #[arg(long)]
        set: Option<String>,
        /// Override the instance's SIR threshold.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Run a scheduling algorithm on an instance, optionally shadowed.
    Solve {
        /// Instance file (JSON).
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::General)]
        alg: Algorithm,
        /// Shadowing spec file (JSON); deterministic pathloss when omitted.
        #[arg(long)]
        shadowing: Option<PathBuf>,
        /// Seed for the shadowing realization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive search for the optimum feasible set. Desk-scale only:
    /// refuses more than 22 links (18 under power control).
    Oracle {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Search under per-link power control instead of uniform power.
        #[arg(long)]
        pc: bool,
        /// Maximize total link weight instead of cardinality.
        #[arg(long)]
        weighted: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Rayleigh-fading success probabilities and bounds per link.
    Fading {
        /// Instance file (JSON).
        instance: PathBuf,
        /// Comma-separated transmit probabilities; optimized when omitted.
        #[arg(long)]
        probs: Option<String>,
        /// Monte Carlo trials; 0 skips the simulation columns.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        /// Seed for the Monte Carlo run.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a configured study and write its CSV/JSON report files.
    Study {
        /// Run config file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's, defaults to ".".
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the trial count.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Growth-index table for a shadowing family across instance sizes.
    Gn {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Log-normal sigma; required for that family, rejected otherwise.
        #[arg(long)]
        sigma: Option<f64>,
        /// Comma-separated instance sizes.
        #[arg(long, default_value = "100,1000,10000,100000,1000000")]
        n: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::SizeGuard { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen { config, seed, out } => cmd_gen(&config, seed, out.as_deref()),
        Cmd::Eval {
            instance,
            set,
            beta,
            format,
        } => cmd_eval(&instance, set.as_deref(), beta, format),
        Cmd::Solve {
            instance,
            alg,
            shadowing,
            seed,
            format,
            out,
        } => cmd_solve(&instance, alg, shadowing.as_deref(), seed, format, out.as_deref()),
        Cmd::Oracle {
            instance,
            pc,
            weighted,
            format,
        } => cmd_oracle(&instance, pc, weighted, format),
        Cmd::Fading {
            instance,
            probs,
            trials,
            seed,
            format,
            out,
        } => cmd_fading(&instance, probs.as_deref(), trials, seed, format, out.as_deref()),
        Cmd::Study {
            config,
            out,
            seed,
            trials,
        } => cmd_study(&config, out.as_deref(), seed, trials),
        Cmd::Gn {
            family,
            sigma,
            n,
            format,
        } => cmd_gn(family, sigma, &n, format),
    }
}

// ---- helpers -------------------------------------------------------------

fn emit(text: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Invalid(format!("bad {what} entry: {s:?}")))
        })
        .collect()
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::Json)? + "\n")
}

fn read_shadowing(path: Option<&Path>) -> Result<ShadowingSpec> {
    match path {
        None => Ok(ShadowingSpec::degenerate()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(Error::Io)?;
            serde_json::from_str(&text).map_err(Error::Json)
        }
    }
}

/// Validate an id list against the instance: in range, strictly ascending.
fn check_set(inst: &Instance, set: &[LinkId]) -> Result<()> {
    for pair in set.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::Invalid(format!(
                "set must be strictly ascending, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    if let Some(&last) = set.last() {
        if last >= inst.len() {
            return Err(Error::Invalid(format!(
                "link id {last} out of range for an instance of {} links",
                inst.len()
            )));
        }
    }
    Ok(())
}

// ---- subcommands -----------------------------------------------------------

fn cmd_gen(config: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(config).map_err(Error::Io)?;
    let mut scenario: Scenario = serde_json::from_str(&text).map_err(Error::Json)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    scenario.validate()?;
    let mut rng = substream(scenario.seed, domain::SCENARIO, 0);
    let inst = generate(&scenario.kind, scenario.params, &mut rng)?;
    emit(inst.to_json() + "\n", out)
}

#[derive(Serialize)]
struct EvalLink {
    id: LinkId,
    signal: f64,
    affectance: f64,
    sir: f64,
    ok: bool,
}

#[derive(Serialize)]
struct EvalOut {
    beta: f64,
    set: Vec<LinkId>,
    feasible: bool,
    links: Vec<EvalLink>,
}

fn cmd_eval(
    instance: &Path,
    set: Option<&str>,
    beta: Option<f64>,
    format: OutputFormat,
) -> Result<()> {
    let inst = Instance::read_file(instance)?;
    let set: Vec<LinkId> = match set {
        Some(text) => parse_list(text, "link id")?,
        None => (0..inst.len()).collect(),
    };
    check_set(&inst, &set)?;
    let beta = beta.unwrap_or(inst.params().beta);
    if !(beta.is_finite() && beta >= 1.0) {
        return Err(Error::Invalid(format!("beta must be ≥ 1, got {beta}")));
    }
    let gains = inst.gpl_gains()?;
    let links: Vec<EvalLink> = set
        .iter()
        .map(|&i| {
            let a = gains.set_affectance(&set, i);
            EvalLink {
                id: i,
                signal: gains.signal(i),
                affectance: a,
                sir: gains.sir(&set, i),
                ok: a < 1.0 / beta,
            }
        })
        .collect();
    let report = EvalOut {
        beta,
        feasible: gains.is_feasible(&set, beta),
        set,
        links,
    };
    match format {
        OutputFormat::Json => emit(to_json_pretty(&report)?, None),
        OutputFormat::Csv => {
            let mut text = String::from("link,signal,affectance,sir,ok\n");
            for l in &report.links {
                text += &format!("{},{},{},{},{}\n", l.id, l.signal, l.affectance, l.sir, l.ok);
            }
            emit(text, None)
        }
    }
}

fn cmd_solve(
    instance: &Path,
    alg: Algorithm,
    shadowing: Option<&Path>,
    seed: u64,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let inst = Instance::read_file(instance)?;
    if inst.is_empty() {
        return Err(Error::Invalid("instance has no links".into()));
    }
    let spec = read_shadowing(shadowing)?;
    let mut rng = substream(seed, domain::SHADOWING, 0);
    let gains = sample_realization(&inst, &spec, &mut rng)?;
    let beta = inst.params().beta;
    let ids: Vec<LinkId> = (0..inst.len()).collect();
    let result = match alg {
        Algorithm::Cluster => {
            let gpl = inst.gpl_gains()?;
            let s_bar = ids.iter().map(|&i| gpl.signal(i)).fold(0.0, f64::max);
            cluster_select(&gains, &ids, beta, s_bar)
        }
        Algorithm::Equilength => equilength_capacity(&inst, &ids, &gains, beta)?,
        Algorithm::General => general_capacity(&inst, &gains, beta)?,
    };
    match format {
        OutputFormat::Json => emit(to_json_pretty(&result)?, out),
        OutputFormat::Csv => {
            let mut text = String::from("link,weight\n");
            for &i in &result.selected {
                text += &format!("{},{}\n", i, inst.links()[i].weight);
            }
            emit(text, out)
        }
    }
}

#[derive(Serialize)]
struct OracleOut {
    mode: &'static str,
    set: Vec<LinkId>,
    value: f64,
    /// Best SIR the set reaches under power control (power-control mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    max_sir: Option<f64>,
}

fn cmd_oracle(instance: &Path, pc: bool, weighted: bool, format: OutputFormat) -> Result<()> {
    let inst = Instance::read_file(instance)?;
    let gains = inst.gpl_gains()?;
    let beta = inst.params().beta;
    let weights = inst.weights();
    let report = if pc {
        if weighted {
            return Err(Error::Invalid(
                "the power-control search maximizes cardinality; \
                 --weighted applies to the uniform search"
                    .into(),
            ));
        }
        let sel = brute_force_opt_pc(&gains, beta)?;
        let max_sir = if sel.set.len() >= 2 {
            Some(max_sir_power_control(&gains, &sel.set)?)
        } else {
            None
        };
        OracleOut {
            mode: "power_control",
            set: sel.set,
            value: sel.value,
            max_sir,
        }
    } else {
        let sel = brute_force_opt(&gains, beta, weighted.then_some(&weights[..]))?;
        OracleOut {
            mode: if weighted { "weighted" } else { "uniform" },
            set: sel.set,
            value: sel.value,
            max_sir: None,
        }
    };
    match format {
        OutputFormat::Json => emit(to_json_pretty(&report)?, None),
        OutputFormat::Csv => {
            let mut text = String::from("link,weight\n");
            for &i in &report.set {
                text += &format!("{},{}\n", i, inst.links()[i].weight);
            }
            emit(text, None)
        }
    }
}

#[derive(Serialize)]
struct FadingOut {
    expected_weight: f64,
    links: Vec<FadingLink>,
}

#[derive(Serialize)]
struct FadingLink {
    id: LinkId,
    q: f64,
    success: f64,
    lower: f64,
    upper: f64,
    affectance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_freq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_se: Option<f64>,
}

fn cmd_fading(
    instance: &Path,
    probs: Option<&str>,
    trials: u64,
    seed: u64,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let inst = Instance::read_file(instance)?;
    if inst.is_empty() {
        return Err(Error::Invalid("instance has no links".into()));
    }
    let gains = inst.gpl_gains()?;
    let beta = inst.params().beta;
    let weights = inst.weights();
    let p = match probs {
        Some(text) => {
            let values: Vec<f64> = parse_list(text, "probability")?;
            if values.len() != inst.len() {
                return Err(Error::Invalid(format!(
                    "expected {} probabilities, got {}",
                    inst.len(),
                    values.len()
                )));
            }
            ProbVector::new(values)?
        }
        None => optimize_probs(&gains, &weights, beta),
    };
    let report = fading_report(&gains, &weights, &p, beta);
    let mc = if trials > 0 {
        Some(mc_fading(&gains, &p, beta, trials, seed))
    } else {
        None
    };
    let links: Vec<FadingLink> = (0..inst.len())
        .map(|i| FadingLink {
            id: i,
            q: report.q[i],
            success: report.success[i],
            lower: report.lower[i],
            upper: report.upper[i],
            affectance: report.affectance[i],
            mc_freq: mc.as_ref().map(|m| m.freq[i]),
            mc_se: mc.as_ref().map(|m| m.se[i]),
        })
        .collect();
    match format {
        OutputFormat::Json => emit(
            to_json_pretty(&FadingOut {
                expected_weight: report.expected_weight,
                links,
            })?,
            out,
        ),
        OutputFormat::Csv => {
            let mut text = String::from(if mc.is_some() {
                "link,q,success,lower,upper,affectance,mc_freq,mc_se\n"
            } else {
                "link,q,success,lower,upper,affectance\n"
            });
            for l in &links {
                text += &format!(
                    "{},{},{},{},{},{}",
                    l.id, l.q, l.success, l.lower, l.upper, l.affectance
                );
                if let (Some(f), Some(s)) = (l.mc_freq, l.mc_se) {
                    text += &format!(",{f},{s}");
                }
                text.push('\n');
            }
            emit(text, out)
        }
    }
}

fn cmd_study(
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    trials: Option<u64>,
) -> Result<()> {
    let mut cfg = RunConfig::read_file(config)?;
    if let Some(seed) = seed {
        cfg.scenario.seed = seed;
    }
    if let Some(trials) = trials {
        cfg.scenario.trials = trials;
    }
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let written = linkcap::experiments::config::run(&cfg, &out_dir)?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_gn(family: FamilyArg, sigma: Option<f64>, n: &str, format: OutputFormat) -> Result<()> {
    let family = match (family, sigma) {
        (FamilyArg::Lognormal, Some(sigma)) => Family::LogNormal { sigma },
        (FamilyArg::Lognormal, None) => {
            return Err(Error::Invalid("--sigma is required for lognormal".into()))
        }
        (_, Some(_)) => {
            return Err(Error::Invalid(
                "--sigma only applies to the lognormal family".into(),
            ))
        }
        (FamilyArg::HeavyTail, None) => Family::HeavyTail,
        (FamilyArg::Degenerate, None) => Family::Degenerate,
    };
    let sizes: Vec<u64> = parse_list(n, "n")?;
    if sizes.is_empty() {
        return Err(Error::Invalid("--n needs at least one size".into()));
    }
    let estimates = sizes
        .iter()
        .map(|&n| gn(family, n))
        .collect::<Result<Vec<_>>>()?;
    match format {
        OutputFormat::Json => emit(to_json_pretty(&estimates)?, None),
        OutputFormat::Csv => {
            let mut text = String::from("n,g,f_at_g,bracket_lo,bracket_hi,in_band\n");
            for e in &estimates {
                text += &format!(
                    "{},{},{},{},{},{}\n",
                    e.n, e.g, e.f_at_g, e.bracket.0, e.bracket.1, e.in_band
                );
            }
            emit(text, None)
        }
    }
}
