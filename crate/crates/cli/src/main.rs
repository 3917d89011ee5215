//! Command-line surface for the insdel-code verification toolkit.
//!
//! Exit codes are a stable contract: 0 = pass, 1 = a check or verification
//! failed, 2 = usage error (bad arguments, unreadable or invalid files,
//! violated preconditions), 3 = a capability sweep whose rows disagree.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qinsdel::channel::spanning_kraus_family;
use qinsdel::code::{parse_code_file, QuantumCode};
use qinsdel::kl::{
    build_recovery, check_kl, sweep_agreement, theorem_sweep, verify_recovery, ChannelSpec,
    KLVerdict,
};
use qinsdel::channel::InsdelSpec;
use qinsdel::selftest::{run_all, SelftestConfig, SuiteResult};
use qinsdel::word::KrausWord;
use qinsdel::RunConfig;

use report::{
    CheckSection, CodeSection, ConfigSection, MachineReport, RecoverySection, SuiteSection,
};

const BUNDLED_CODE: &str = include_str!("../../../data/four_qubit_deletion.code");

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DISAGREEMENT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qinsdel",
    version,
    about = "Verify insertion/deletion error-correcting quantum codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Args)]
struct CommonOpts {
    /// Absolute tolerance on Gram-matrix violations.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Maximum number of Kraus words a family enumeration may produce.
    #[arg(long, default_value_t = 100_000)]
    cap: usize,
    /// Random code states drawn during recovery verification.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Seed for all randomized behavior.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads for Gram computations; 0 uses the default pool.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl CommonOpts {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            tolerance: self.tol,
            enumeration_cap: self.cap,
            samples: self.samples,
            seed: self.seed,
        }
    }

    fn config_section(&self) -> ConfigSection {
        ConfigSection {
            tolerance: self.tol,
            enumeration_cap: self.cap,
            samples: self.samples,
            seed: self.seed,
        }
    }

    fn install_workers(&self) {
        if self.workers > 0 {
            // Ignore the error if a pool is already installed.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build_global();
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a code corrects the (t1, t2) insdel channel.
    Check {
        /// Path to the code file.
        #[arg(long)]
        code: PathBuf,
        /// Number of insertions.
        t1: usize,
        /// Number of deletions (must be less than the code length).
        t2: usize,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Check every split (s1, s2) of a total error budget and report whether
    /// the verdicts agree.
    Sweep {
        #[arg(long)]
        code: PathBuf,
        /// Total error budget s1 + s2.
        total: usize,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the seeded randomized property suites and validate the bundled
    /// code.
    Selftest {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Build a recovery channel for a passing check and verify it against
    /// the uniform (t1, t2) insdel channel.
    Recover {
        #[arg(long)]
        code: PathBuf,
        t1: usize,
        t2: usize,
        /// Maximum accepted deviation of recovered states.
        #[arg(long, default_value_t = 1e-8)]
        recovery_tol: f64,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Print code statistics.
    Describe {
        #[arg(long)]
        code: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check {
            code,
            t1,
            t2,
            opts,
        } => cmd_check(&code, t1, t2, &opts),
        Command::Sweep { code, total, opts } => cmd_sweep(&code, total, &opts),
        Command::Selftest { opts } => cmd_selftest(&opts),
        Command::Recover {
            code,
            t1,
            t2,
            recovery_tol,
            opts,
        } => cmd_recover(&code, t1, t2, recovery_tol, &opts),
        Command::Describe { code } => cmd_describe(&code),
    };
    ExitCode::from(code)
}

fn usage_error(message: impl AsRef<str>) -> u8 {
    eprintln!("error: {}", message.as_ref());
    EXIT_USAGE
}

fn load_code(path: &Path) -> Result<QuantumCode, u8> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage_error(format!("cannot read {}: {e}", path.display())))?;
    parse_code_file(&text).map_err(|e| usage_error(format!("{}: {e}", path.display())))
}

fn code_section(code: &QuantumCode) -> CodeSection {
    CodeSection {
        label: code.label().to_string(),
        q: code.q(),
        sites: code.sites(),
        dimension: code.dimension(),
    }
}

fn check_section(t1: usize, t2: usize, verdict: &KLVerdict) -> CheckSection {
    CheckSection {
        t1,
        t2,
        family_size: verdict.family_size,
        max_offdiag: verdict.report.max_offdiag,
        max_diag_spread: verdict.report.max_diag_spread,
        passed: verdict.passed,
        worst_pair: verdict.report.worst_pair.map(|(u, v)| [u, v]),
    }
}

/// Render a verdict's worst pair with the words spelled out.
fn describe_worst_pair(verdict: &KLVerdict, family: &[KrausWord]) -> String {
    match verdict.report.worst_pair {
        Some((u, v)) => format!(
            "worst pair ({u}, {v}): E_{u} = {} ; E_{v} = {}",
            family[u], family[v]
        ),
        None => "no pairs".to_string(),
    }
}

fn g_summary(verdict: &KLVerdict) -> String {
    let mut max_g = 0.0f64;
    let mut nonzero = 0usize;
    for pair in &verdict.report.pairs {
        let mag = pair.g.norm();
        if mag > 1e-12 {
            nonzero += 1;
        }
        max_g = max_g.max(mag);
    }
    format!(
        "{} pairs, {} with non-vanishing g, max |g| = {:.6}",
        verdict.report.pairs.len(),
        nonzero,
        max_g
    )
}

fn cmd_check(path: &Path, t1: usize, t2: usize, opts: &CommonOpts) -> u8 {
    opts.install_workers();
    let code = match load_code(path) {
        Ok(c) => c,
        Err(rc) => return rc,
    };
    if t2 >= code.sites() {
        return usage_error(format!(
            "t2 = {t2} must be less than the code length N = {}",
            code.sites()
        ));
    }
    let started = Instant::now();
    let family = match spanning_kraus_family(code.sites(), code.q(), t1, t2, opts.cap) {
        Ok(f) => f,
        Err(e) => return usage_error(e.to_string()),
    };
    let verdict = match check_kl(&code, &family, opts.tol) {
        Ok(v) => v,
        Err(e) => return usage_error(e.to_string()),
    };
    let elapsed = started.elapsed();

    match opts.format {
        Format::Machine => {
            let mut report = MachineReport::new("check", opts.config_section());
            report.code = Some(code_section(&code));
            report.checks = Some(vec![check_section(t1, t2, &verdict)]);
            report.passed = verdict.passed;
            println!("{}", report.to_json());
        }
        Format::Text => {
            println!(
                "code '{}': q = {}, N = {}, d = {}",
                code.label(),
                code.q(),
                code.sites(),
                code.dimension()
            );
            println!(
                "check ({t1},{t2}): family of {} words, tolerance {:.1e}",
                verdict.family_size, opts.tol
            );
            println!(
                "  max off-diagonal   = {:.3e}",
                verdict.report.max_offdiag
            );
            println!(
                "  max diagonal slack = {:.3e}",
                verdict.report.max_diag_spread
            );
            println!("  g summary: {}", g_summary(&verdict));
            println!("  {}", describe_worst_pair(&verdict, &family));
            println!("  wall time: {elapsed:.2?}");
            println!(
                "verdict: {}",
                if verdict.passed { "PASS" } else { "FAIL" }
            );
        }
    }
    if verdict.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_sweep(path: &Path, total: usize, opts: &CommonOpts) -> u8 {
    opts.install_workers();
    let code = match load_code(path) {
        Ok(c) => c,
        Err(rc) => return rc,
    };
    if total >= code.sites() {
        return usage_error(format!(
            "total budget {total} must be less than the code length N = {}",
            code.sites()
        ));
    }
    let started = Instant::now();
    let rows = match theorem_sweep(&code, total, opts.tol, opts.cap) {
        Ok(r) => r,
        Err(e) => return usage_error(e.to_string()),
    };
    let agreement = sweep_agreement(&rows);
    let elapsed = started.elapsed();

    match opts.format {
        Format::Machine => {
            let mut report = MachineReport::new("sweep", opts.config_section());
            report.code = Some(code_section(&code));
            report.checks = Some(
                rows.iter()
                    .map(|r| check_section(r.s1, r.s2, &r.verdict))
                    .collect(),
            );
            report.agreement = Some(agreement);
            report.passed = agreement && rows.iter().all(|r| r.verdict.passed);
            println!("{}", report.to_json());
        }
        Format::Text => {
            println!(
                "code '{}': sweep over s1 + s2 = {total}, tolerance {:.1e}",
                code.label(),
                opts.tol
            );
            println!("  s1  s2  family  max_offdiag  max_diag_slack  verdict");
            for row in &rows {
                println!(
                    "  {:<3} {:<3} {:<7} {:<12.3e} {:<15.3e} {}",
                    row.s1,
                    row.s2,
                    row.verdict.family_size,
                    row.verdict.report.max_offdiag,
                    row.verdict.report.max_diag_spread,
                    if row.verdict.passed { "pass" } else { "fail" }
                );
            }
            println!("  wall time: {elapsed:.2?}");
            println!(
                "{}",
                if agreement {
                    "AGREEMENT: all splits share one verdict"
                } else {
                    "DISAGREEMENT: splits differ; numerical or implementation issue"
                }
            );
        }
    }
    if agreement {
        EXIT_PASS
    } else {
        EXIT_DISAGREEMENT
    }
}

fn suite_section(suite: &SuiteResult) -> SuiteSection {
    SuiteSection {
        name: suite.name.to_string(),
        instances: suite.instances,
        failures: suite.failures,
        worst_deviation: suite.worst_deviation,
        tolerance: suite.tolerance,
        contractions: suite.contractions,
        passed: suite.passed(),
        counterexample: suite.counterexample.clone(),
    }
}

fn cmd_selftest(opts: &CommonOpts) -> u8 {
    opts.install_workers();
    let cfg = SelftestConfig {
        seed: opts.seed,
        ..SelftestConfig::default()
    };
    let started = Instant::now();
    let mut suites = run_all(&cfg);

    // The bundled code ships as data, not source; validate it here.
    let bundled = qinsdel::selftest::validate_bundled_code(BUNDLED_CODE, opts.tol, opts.cap);
    let bundled_suite = match bundled {
        Ok(verdict) => SuiteResult {
            name: "bundled-code-validation",
            instances: 1,
            failures: usize::from(!verdict.passed),
            worst_deviation: verdict
                .report
                .max_offdiag
                .max(verdict.report.max_diag_spread),
            tolerance: opts.tol,
            counterexample: (!verdict.passed)
                .then(|| "bundled four-qubit code failed its single-deletion check".to_string()),
            contractions: 0,
        },
        Err(e) => return usage_error(e.to_string()),
    };
    suites.push(bundled_suite);
    let elapsed = started.elapsed();
    let all_passed = suites.iter().all(SuiteResult::passed);

    match opts.format {
        Format::Machine => {
            let mut report = MachineReport::new("selftest", opts.config_section());
            report.suites = Some(suites.iter().map(suite_section).collect());
            report.passed = all_passed;
            println!("{}", report.to_json());
        }
        Format::Text => {
            println!("selftest (seed {}):", cfg.seed);
            println!(
                "  {:<28} {:>9} {:>9} {:>13} {:>9}  outcome",
                "suite", "instances", "failures", "worst", "tol"
            );
            for s in &suites {
                println!(
                    "  {:<28} {:>9} {:>9} {:>13.3e} {:>9.1e}  {}",
                    s.name,
                    s.instances,
                    s.failures,
                    s.worst_deviation,
                    s.tolerance,
                    if s.passed() { "pass" } else { "FAIL" }
                );
                if let Some(ref ce) = s.counterexample {
                    println!("      counterexample: {ce}");
                }
            }
            println!("  wall time: {elapsed:.2?}");
            println!("result: {}", if all_passed { "PASS" } else { "FAIL" });
        }
    }
    if all_passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_recover(path: &Path, t1: usize, t2: usize, recovery_tol: f64, opts: &CommonOpts) -> u8 {
    opts.install_workers();
    let code = match load_code(path) {
        Ok(c) => c,
        Err(rc) => return rc,
    };
    if t2 >= code.sites() {
        return usage_error(format!(
            "t2 = {t2} must be less than the code length N = {}",
            code.sites()
        ));
    }
    let started = Instant::now();
    let family = match spanning_kraus_family(code.sites(), code.q(), t1, t2, opts.cap) {
        Ok(f) => f,
        Err(e) => return usage_error(e.to_string()),
    };
    let verdict = match check_kl(&code, &family, opts.tol) {
        Ok(v) => v,
        Err(e) => return usage_error(e.to_string()),
    };
    if !verdict.passed {
        eprintln!(
            "check ({t1},{t2}) fails (off-diagonal {:.3e}, diagonal slack {:.3e}); no recovery exists",
            verdict.report.max_offdiag, verdict.report.max_diag_spread
        );
        return EXIT_FAIL;
    }
    let recovery = match build_recovery(&code, &family, opts.tol) {
        Ok(r) => r,
        Err(e) => return usage_error(e.to_string()),
    };
    let channel = match InsdelSpec::uniform(code.sites(), code.q(), t1, t2) {
        Ok(c) => ChannelSpec::Insdel(c),
        Err(e) => return usage_error(e.to_string()),
    };
    let run_config = opts.run_config();
    let rep = match verify_recovery(&code, &channel, &recovery, &run_config) {
        Ok(r) => r,
        Err(e) => return usage_error(e.to_string()),
    };
    let elapsed = started.elapsed();
    let passed = rep.max_deviation <= recovery_tol && rep.completeness_violation <= 1e-10;

    match opts.format {
        Format::Machine => {
            let mut report = MachineReport::new("recover", opts.config_section());
            report.code = Some(code_section(&code));
            report.checks = Some(vec![check_section(t1, t2, &verdict)]);
            report.recovery = Some(RecoverySection {
                elements: recovery.len(),
                samples: rep.samples,
                max_deviation: rep.max_deviation,
                completeness_violation: rep.completeness_violation,
                recovery_tolerance: recovery_tol,
                passed,
            });
            report.passed = passed;
            println!("{}", report.to_json());
        }
        Format::Text => {
            println!(
                "code '{}': recovery for the uniform ({t1},{t2}) insdel channel",
                code.label()
            );
            println!("  recovery elements: {}", recovery.len());
            println!(
                "  completeness violation: {:.3e}",
                rep.completeness_violation
            );
            println!(
                "  max deviation over {} random code states: {:.3e} (tolerance {:.1e})",
                rep.samples, rep.max_deviation, recovery_tol
            );
            println!("  wall time: {elapsed:.2?}");
            println!("verdict: {}", if passed { "PASS" } else { "FAIL" });
        }
    }
    if passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_describe(path: &Path) -> u8 {
    let code = match load_code(path) {
        Ok(c) => c,
        Err(rc) => return rc,
    };
    println!("label:     {}", code.label());
    println!("q:         {}", code.q());
    println!("N (sites): {}", code.sites());
    println!("dimension: {}", code.dimension());
    for (i, w) in code.codewords().iter().enumerate() {
        let support = w
            .amplitudes()
            .iter()
            .filter(|a| a.norm() > 1e-12)
            .count();
        println!("codeword {i}: {support} supported basis states");
    }
    println!(
        "orthonormality violation: {:.3e}",
        code.orthonormality_violation()
    );
    EXIT_PASS
}
