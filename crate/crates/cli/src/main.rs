//! Command-line front end: inversion traces and Stark-shift sweeps as CSV,
//! NOON branch reports, the interaction-time optimizer, protocol file
//! execution, and the oracle validation suite.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 runtime abort,
//! 3 validation failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use noonsim::observables::{inversion_trace, noon_fidelity, NoonTarget, RelativeSign};
use noonsim::oracle::{equivalence_check, EquivalenceReport};
use noonsim::protocol::{self, MeasureMode, Program, Step};
use noonsim::sweep::{chi_sweep, find_optimal_tau, noon_report};
use noonsim::{dsl, AtomLevel, CavityLabel, JointState, Params};

#[derive(Parser)]
#[command(
    name = "noonsim",
    version,
    about = "Two-photon atom-cavity simulator: inversion traces, NOON protocols, sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    /// Human-readable report.
    Text,
    /// Line-delimited key=value pairs.
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Write the atomic inversion W(tau) of an excited atom in cavity A as CSV.
    Inversion {
        /// Initial photon number of the cavity.
        #[arg(long, default_value_t = 2)]
        n0: usize,
        /// Stark-shift coefficient (units of the coupling).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        chi: f64,
        /// Detuning (units of the coupling).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        delta: f64,
        /// End of the scaled-time grid.
        #[arg(long, default_value_t = 4.0)]
        tau_max: f64,
        /// Number of grid points (inclusive of both ends).
        #[arg(long, default_value_t = 801)]
        steps: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the NOON sequence and report both detection branches.
    Noon {
        /// Scaled interaction time per cavity.
        #[arg(long, default_value_t = 3.16)]
        tau: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        chi: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Sweep the ground-branch fidelity over the Stark shift, written as CSV.
    SweepChi {
        #[arg(long, default_value_t = 3.16)]
        tau: f64,
        /// Upper end of the Stark-shift grid (lower end is 0).
        #[arg(long, default_value_t = 1.0)]
        chi_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Fixed detuning for every grid point.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search an interval for the interaction time maximizing the
    /// ground-branch NOON fidelity at resonance.
    FindTau {
        #[arg(long, default_value_t = 2.5)]
        lo: f64,
        #[arg(long, default_value_t = 3.5)]
        hi: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Parse and execute a .qproto protocol file.
    Run {
        /// Protocol source file.
        file: PathBuf,
        /// Override the seed of every sampled measurement (step index added).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Compare the closed-form propagator against the dense-matrix oracle on
    /// seeded random states.
    Validate {
        #[arg(long, default_value_t = 24)]
        cutoff: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Validation(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) | Failure::Validation(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let _ = err.print();
            return if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Inversion {
            n0,
            chi,
            delta,
            tau_max,
            steps,
            out,
        } => cmd_inversion(n0, chi, delta, tau_max, steps, &out),
        Command::Noon {
            tau,
            chi,
            delta,
            report,
        } => cmd_noon(tau, chi, delta, report),
        Command::SweepChi {
            tau,
            chi_max,
            steps,
            delta,
            out,
        } => cmd_sweep_chi(tau, chi_max, steps, delta, &out),
        Command::FindTau { lo, hi, tol, report } => cmd_find_tau(lo, hi, tol, report),
        Command::Run { file, seed, report } => cmd_run(&file, seed, report),
        Command::Validate {
            cutoff,
            trials,
            seed,
        } => cmd_validate(cutoff, trials, seed),
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure::Runtime(message.into())
}

fn cmd_inversion(
    n0: usize,
    chi: f64,
    delta: f64,
    tau_max: f64,
    steps: usize,
    out: &Path,
) -> Result<(), Failure> {
    let params = Params::new(chi, delta, Params::default().cutoff)
        .map_err(|e| usage(e.to_string()))?;
    if steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(usage("--tau-max must be positive"));
    }
    if n0 + 2 > params.cutoff {
        return Err(usage(format!(
            "--n0 must be at most {} so the pair coupling stays within the cutoff",
            params.cutoff - 2
        )));
    }
    let series = inversion_trace(AtomLevel::Excited, n0, CavityLabel::A, &params, tau_max, steps);
    let mut writer = csv_writer(out)?;
    write_line(&mut writer, "tau,w", out)?;
    for (tau, w) in series.taus.iter().zip(series.w.iter()) {
        write_line(&mut writer, &format!("{tau},{w}"), out)?;
    }
    finish(writer, out)
}

fn cmd_noon(tau: f64, chi: f64, delta: f64, format: ReportFormat) -> Result<(), Failure> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(usage("--tau must be non-negative"));
    }
    let report = noon_report(tau, chi, delta).map_err(|e| usage(e.to_string()))?;
    match format {
        ReportFormat::Structured => {
            println!("tau={}", report.tau);
            println!("chi={}", report.chi);
            println!("delta={}", report.delta);
            println!("p_ground={}", report.p_ground);
            println!("fidelity_ground={}", report.fidelity_ground);
            println!("p_excited={}", report.p_excited);
            println!("fidelity_excited={}", report.fidelity_excited);
        }
        ReportFormat::Text => {
            println!(
                "NOON sequence at tau={}, chi={}, delta={}",
                report.tau, report.chi, report.delta
            );
            println!(
                "  ground detection:  P = {:.6}   fidelity to (|4,0>+|0,4>)/sqrt2 = {:.6}",
                report.p_ground, report.fidelity_ground
            );
            println!(
                "  excited detection: P = {:.6}   fidelity to (|4,0>-|0,4>)/sqrt2 = {:.6}",
                report.p_excited, report.fidelity_excited
            );
        }
    }
    Ok(())
}

fn cmd_sweep_chi(
    tau: f64,
    chi_max: f64,
    steps: usize,
    delta: f64,
    out: &Path,
) -> Result<(), Failure> {
    if steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(usage("--tau must be non-negative"));
    }
    if !(chi_max.is_finite() && chi_max > 0.0) {
        return Err(usage("--chi-max must be positive"));
    }
    let rows = chi_sweep(tau, chi_max, steps, delta).map_err(|e| usage(e.to_string()))?;
    let mut writer = csv_writer(out)?;
    write_line(&mut writer, "chi,delta,fidelity,p_ground", out)?;
    for row in rows {
        write_line(
            &mut writer,
            &format!("{},{},{},{}", row.chi, row.delta, row.fidelity, row.p_ground),
            out,
        )?;
    }
    finish(writer, out)
}

fn cmd_find_tau(lo: f64, hi: f64, tol: f64, format: ReportFormat) -> Result<(), Failure> {
    let (tau_star, fidelity) = find_optimal_tau(lo, hi, tol).map_err(|e| usage(e.to_string()))?;
    match format {
        ReportFormat::Structured => {
            println!("tau_star={tau_star}");
            println!("fidelity={fidelity}");
        }
        ReportFormat::Text => {
            println!(
                "best interaction time in [{lo}, {hi}]: tau = {tau_star:.6} with ground-branch fidelity {fidelity:.6}"
            );
        }
    }
    Ok(())
}

fn cmd_run(file: &Path, seed: Option<u64>, format: ReportFormat) -> Result<(), Failure> {
    let source = std::fs::read_to_string(file)
        .map_err(|e| runtime(format!("cannot read {}: {e}", file.display())))?;
    let mut program = dsl::parse(&source).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    if let Some(base) = seed {
        reseed_samples(&mut program, base);
    }
    let result = protocol::run(&program).map_err(|e| runtime(e.to_string()))?;

    match format {
        ReportFormat::Structured => {
            println!("steps={}", program.steps.len());
            println!("chi={}", program.params.chi);
            println!("delta={}", program.params.delta);
            println!("cutoff={}", program.params.cutoff);
            for event in &result.events {
                println!("step_{}={}", event.step, event.description);
                if let Some(p) = event.probability {
                    println!("step_{}_probability={}", event.step, p);
                }
            }
            println!("joint_probability={}", result.joint_postselect_probability);
            for (label, cavity) in [("a", CavityLabel::A), ("b", CavityLabel::B)] {
                let dist = noonsim::observables::photon_distribution(&result.final_state, cavity);
                for (n, p) in dist.iter().enumerate() {
                    if *p > 1e-12 {
                        println!("dist_{label}_{n}={p}");
                    }
                }
            }
            if let Some(n) = infer_noon_support(&result.final_state) {
                println!("noon_n={n}");
                let plus = noon_fidelity(
                    &result.final_state,
                    &NoonTarget::new(n, RelativeSign::Plus),
                );
                let minus = noon_fidelity(
                    &result.final_state,
                    &NoonTarget::new(n, RelativeSign::Minus),
                );
                println!("noon_fidelity_plus={plus}");
                println!("noon_fidelity_minus={minus}");
            }
        }
        ReportFormat::Text => {
            println!(
                "{}: {} steps, chi={}, delta={}, cutoff={}",
                file.display(),
                program.steps.len(),
                program.params.chi,
                program.params.delta,
                program.params.cutoff
            );
            for event in &result.events {
                match event.probability {
                    Some(p) => println!("  [{}] {}   p = {:.6}", event.step, event.description, p),
                    None => println!("  [{}] {}", event.step, event.description),
                }
            }
            println!(
                "joint post-selection probability: {:.6}",
                result.joint_postselect_probability
            );
            for (name, cavity) in [("A", CavityLabel::A), ("B", CavityLabel::B)] {
                let dist = noonsim::observables::photon_distribution(&result.final_state, cavity);
                let support: Vec<String> = dist
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p > 1e-12)
                    .map(|(n, p)| format!("{n}: {p:.6}"))
                    .collect();
                println!("cavity {name} photon distribution: {}", support.join(", "));
            }
            if let Some(n) = infer_noon_support(&result.final_state) {
                let plus = noon_fidelity(
                    &result.final_state,
                    &NoonTarget::new(n, RelativeSign::Plus),
                );
                let minus = noon_fidelity(
                    &result.final_state,
                    &NoonTarget::new(n, RelativeSign::Minus),
                );
                println!(
                    "NOON support detected (N = {n}): fidelity {:.6} (plus), {:.6} (minus)",
                    plus, minus
                );
            }
        }
    }
    Ok(())
}

/// Replaces the seed of every sampled measurement by `base + step index`.
fn reseed_samples(program: &mut Program, base: u64) {
    for (i, step) in program.steps.iter_mut().enumerate() {
        if let Step::MeasureAtom {
            mode: MeasureMode::Sample { seed },
            ..
        } = step
        {
            *seed = base.wrapping_add(i as u64);
        }
    }
}

/// Returns `N` when the two-mode support of the state is exactly
/// `{(N, 0), (0, N)}` for some `N >= 1`.
fn infer_noon_support(state: &JointState) -> Option<usize> {
    let eps = 1e-9;
    let cutoff = state.cutoff();
    let mut support = Vec::new();
    for na in 0..=cutoff {
        for nb in 0..=cutoff {
            let p: f64 = [AtomLevel::Excited, AtomLevel::Ground]
                .iter()
                .map(|&atom| state.amplitude(atom, na, nb).norm_sqr())
                .sum();
            if p > eps {
                support.push((na, nb));
            }
        }
    }
    match support.as_slice() {
        [(0, n1), (n2, 0)] | [(n2, 0), (0, n1)] if n1 == n2 && *n1 >= 1 => Some(*n1),
        _ => None,
    }
}

fn cmd_validate(cutoff: usize, trials: usize, seed: u64) -> Result<(), Failure> {
    if cutoff < Params::MIN_CUTOFF {
        return Err(usage(format!(
            "--cutoff must be at least {}",
            Params::MIN_CUTOFF
        )));
    }
    if trials < 1 {
        return Err(usage("--trials must be at least 1"));
    }
    let report = equivalence_check(cutoff, trials, seed);
    println!(
        "oracle equivalence: cutoff={} trials={} seed={}",
        report.cutoff, report.trials, report.seed
    );
    println!("max_deviation={:e}", report.max_deviation);
    println!(
        "boundary_guard={}",
        if report.boundary_guard_ok {
            "rejected"
        } else {
            "NOT-REJECTED"
        }
    );
    if report.passed() {
        println!("PASS (tolerance {:e})", EquivalenceReport::TOLERANCE);
        Ok(())
    } else {
        println!("FAIL (tolerance {:e})", EquivalenceReport::TOLERANCE);
        Err(Failure::Validation(format!(
            "max deviation {:e} exceeds {:e} or boundary guard failed",
            report.max_deviation,
            EquivalenceReport::TOLERANCE
        )))
    }
}

fn csv_writer(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_line(writer: &mut BufWriter<File>, line: &str, path: &Path) -> Result<(), Failure> {
    writeln!(writer, "{line}").map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn finish(mut writer: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    writer
        .flush()
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}
