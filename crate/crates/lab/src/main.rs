use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hartree_core::exponents::{scattering_pairs, ExponentSet, IdentityCheck, ModelParams, DEFAULT_EPSILON};
use hartree_core::grid::RadialGrid;
use hartree_core::groundstate::{
    pohozaev_check, sharp_constant, solve_ground_state, threshold_functions, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use hartree_core::io::save_field;
use hartree_core::potentials::{audit_hypotheses, DEFAULT_AUDIT_EXPONENTS};
use hartree_core::riesz::RieszKernel;
use hartree_core::scalar::ExactScalar;
use hartree_lab::run::{ErrorReport, RunOptions, REPORT_FILE};
use hartree_lab::sweep::thread_cap;
use hartree_lab::{load_scenario, parse_potential, run_scenario, sweep, Axis, LabError};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hartree-lab", version, about = "Radial generalized Hartree equation experiments")]
struct Cli {
    /// Directory for every file the command writes.
    #[arg(long, global = true, default_value = "./out")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent set of the scattering argument and its identities.
    Exponents {
        #[arg(long)]
        p: String,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        eps: Option<String>,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Evaluate in exact rational arithmetic (decimals and a/b accepted).
        #[arg(long)]
        exact: bool,
    },
    /// Kato norm and hypothesis audit of a potential.
    Kato {
        /// Potential in the scenario grammar, e.g. '{ kind = "gaussian", amplitude = 1.0, width = 1.0 }'.
        #[arg(long)]
        potential: String,
        #[arg(long, default_value_t = 40.0)]
        r_max: f64,
        #[arg(long, default_value_t = 2048)]
        n: usize,
    },
    /// Solve for the ground state and write it with its threshold record.
    GroundState {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = 40.0)]
        r_max: f64,
        #[arg(long, default_value_t = 2048)]
        n: usize,
    },
    /// Run a scenario file.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a scenario and write the virial identity, average and monitor verdict.
    Morawetz {
        #[arg(long)]
        config: PathBuf,
        /// Monitor level used when the scenario has no monitor section.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Repeat a scenario over one parameter axis.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        axis: Axis,
        /// Comma separated values; empty for none.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
}

/// Exit status for configuration and numerical errors; `1` means a verdict failed.
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", ErrorReport::new(&e).to_json());
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, LabError> {
    let out = &cli.output_dir;
    match &cli.command {
        Command::Exponents { p, gamma, eps, json, exact } => {
            let eps = eps.clone().unwrap_or_else(|| DEFAULT_EPSILON.to_string());
            if *exact {
                exponents(&parse_exact(p)?, &parse_exact(gamma)?, &parse_exact(&eps)?, *json)
            } else {
                exponents(&parse_f64(p)?, &parse_f64(gamma)?, &parse_f64(&eps)?, *json)
            }
        }
        Command::Kato { potential, r_max, n } => {
            let v = parse_potential(potential)?;
            let grid = RadialGrid::new(*r_max, *n)?;
            let audit = audit_hypotheses(&v, &grid, &DEFAULT_AUDIT_EXPONENTS)?;
            #[derive(Serialize)]
            struct Out<'a> {
                format: &'static str,
                potential: &'a hartree_core::potentials::PotentialSpec,
                r_max: f64,
                n: usize,
                audit: hartree_core::potentials::PotentialAudit,
            }
            let text = to_json(&Out { format: "hartree-kato/1", potential: &v, r_max: *r_max, n: *n, audit })?;
            write_out(out, "kato.json", &text)?;
            print!("{text}");
            Ok(0)
        }
        Command::GroundState { p, gamma, tol, max_iter, r_max, n } => {
            let params = ModelParams::with_default_epsilon(*p, *gamma)?;
            let grid = RadialGrid::new(*r_max, *n)?;
            let kern = RieszKernel::build(*gamma, &grid)?;
            let gs = solve_ground_state(&params, &grid, &kern, *tol, *max_iter)?;
            #[derive(Serialize)]
            struct Out {
                format: &'static str,
                summary: hartree_core::groundstate::GroundStateSummary,
                pohozaev: hartree_core::groundstate::PohozaevReport,
                sharp_constant: hartree_core::groundstate::SharpConstant,
                threshold_functions: hartree_core::groundstate::ThresholdFunctionsReport,
            }
            let record = Out {
                format: "hartree-ground-state/1",
                summary: gs.summary(),
                pohozaev: pohozaev_check(&gs),
                sharp_constant: sharp_constant(&gs),
                threshold_functions: threshold_functions(&gs),
            };
            std::fs::create_dir_all(out)?;
            save_field(&out.join("ground_state.csv"), &gs.q)?;
            let text = to_json(&record)?;
            write_out(out, "ground_state.json", &text)?;
            print!("{text}");
            Ok(0)
        }
        Command::Evolve { config } => {
            let s = load_scenario(config)?;
            let report = run_scenario(&s, out, RunOptions::default())?;
            summarize(&report, out);
            Ok(report.exit_code() as u8)
        }
        Command::Morawetz { config, eps } => {
            let s = load_scenario(config)?;
            let report = run_scenario(&s, out, RunOptions { morawetz: Some(*eps) })?;
            summarize(&report, out);
            Ok(report.exit_code() as u8)
        }
        Command::Sweep { config, axis, values } => {
            let s = load_scenario(config)?;
            let report = sweep(&s, *axis, values, out, thread_cap()?)?;
            print!("{}", report.to_csv());
            Ok(if report.all_pass() { 0 } else { 1 })
        }
    }
}

fn summarize(report: &hartree_lab::RunReport, out: &Path) {
    for v in &report.verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("report: {}", out.join(REPORT_FILE).display());
}

fn to_json<S: Serialize>(v: &S) -> Result<String, LabError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| LabError::Io(e.to_string()))
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<(), LabError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text).map_err(|e| LabError::Io(format!("{}: {e}", dir.join(name).display())))
}

fn parse_f64(s: &str) -> Result<f64, LabError> {
    s.trim().parse().map_err(|_| LabError::Parse(format!("not a number: {s:?}")))
}

/// Exact rational from `a/b`, an integer or a finite decimal.
fn parse_exact(s: &str) -> Result<BigRational, LabError> {
    let t = s.trim();
    let bad = || LabError::Parse(format!("not an exact rational: {s:?}"));
    if let Ok(q) = t.parse::<BigRational>() {
        return Ok(q);
    }
    let (neg, body) = t.strip_prefix('-').map_or((false, t), |b| (true, b));
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num_traits_pow10(frac.len());
    let q = BigRational::new(digits, scale);
    Ok(if neg { -q } else { q })
}

fn num_traits_pow10(k: usize) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, _| acc * 10)
}

fn exponents<T: ExactScalar + Display>(p: &T, gamma: &T, eps: &T, json: bool) -> Result<u8, LabError> {
    let params = ModelParams::new(p.clone(), gamma.clone(), eps.clone())?;
    let set = scattering_pairs(&params)?;
    let checks = set.check_identities(&params);
    let ok = checks.iter().all(|c| c.pass);
    if json {
        #[derive(Serialize)]
        struct Out {
            format: &'static str,
            exponents: Vec<(&'static str, String)>,
            identities: Vec<IdentityCheck>,
            all_pass: bool,
        }
        let exps = named(&set).into_iter().map(|(k, v)| (k, v.to_string())).collect();
        print!("{}", to_json(&Out { format: "hartree-exponents/1", exponents: exps, identities: checks, all_pass: ok })?);
    } else {
        for (k, v) in named(&set) {
            println!("{k:>10} = {v}");
        }
        for c in &checks {
            println!("{} {} (defect {:e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.defect);
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn named<T: Clone>(s: &ExponentSet<T>) -> Vec<(&'static str, T)> {
    vec![
        ("s_c", s.s_c.clone()),
        ("sigma_c", s.sigma_c.clone()),
        ("A", s.a.clone()),
        ("B", s.b.clone()),
        ("r_bar", s.r_bar.clone()),
        ("a_bar", s.a_bar.clone()),
        ("p_tilde", s.p_tilde.clone()),
        ("3-", s.r3_minus.clone()),
        ("4+", s.q4_plus.clone()),
        ("q", s.q.clone()),
        ("r", s.r.clone()),
        ("m", s.m.clone()),
        ("n", s.n.clone()),
        ("s", s.s.clone()),
        ("theta", s.theta.clone()),
        ("theta_bar", s.theta_bar.clone()),
        ("dp_theta", s.distant.theta.clone()),
        ("dp_l", s.distant.l.clone()),
        ("dp_p_bar", s.distant.p_bar.clone()),
    ]
}
