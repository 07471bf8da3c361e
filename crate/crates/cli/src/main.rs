//! gkfade: closed-form BER sweeps over generalized-K selection-combining
//! links, raw bivariate Meijer-G evaluation, and analytic-vs-Monte-Carlo
//! validation reports.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 usage/parse error, 3 numeric
//! non-convergence.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use gkfade_core::ber::{ber_closed_form_report, Modulation, ScLink};
use gkfade_core::egbmgf::{contours_for, eval_egbmgf_report, ConvergenceClass, EgbmgfSpec};
use gkfade_core::gk_channel::GkParams;
use gkfade_core::montecarlo::{estimate_ber, McConfig, McEstimate, McMode};
use gkfade_core::Error as CoreError;

const CSV_HEADER: &str = "modulation,snr_db,ber_analytic,ber_mc,mc_stderr";

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;

const DEFAULT_MODS: &str = "bpsk,dpsk,bfsk";
const DEFAULT_SNR: &str = "0:20:5";
const DEFAULT_SHAPE: f64 = 1.0;
const DEFAULT_SAMPLES: u64 = 1_000_000;
const DEFAULT_SEED: u64 = 42;
const DEFAULT_STREAMS: u32 = 4;

/// Below this effective sample size the MC stderr estimate itself is
/// unreliable (for bit-level runs this is the observed error count).
const MIN_EFFECTIVE_SAMPLES: f64 = 100.0;

#[derive(Parser)]
#[command(
    name = "gkfade",
    version,
    about = "BER of binary modulations with dual-branch selection combining over generalized-K fading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep BER over an SNR grid and emit CSV.
    Ber(BerArgs),
    /// Evaluate a bivariate Meijer-G spec from a JSON file.
    Egbmgf(EgbmgfArgs),
    /// Check the closed form against the seeded Monte Carlo estimator.
    Validate(ValidateArgs),
}

/// Flags shared by `ber` and `validate`. Precedence: flag > config file >
/// default.
#[derive(Args, Debug, Default)]
struct SweepFlags {
    /// Comma-separated modulations: bpsk, dpsk, bfsk [default: all three].
    #[arg(long = "mod", value_name = "LIST")]
    modulations: Option<String>,

    /// Branch-1 multipath shape m_m1 [default: 1].
    #[arg(long)]
    mm1: Option<f64>,

    /// Branch-1 shadowing shape m_s1 [default: 1].
    #[arg(long)]
    ms1: Option<f64>,

    /// Branch-2 multipath shape m_m2 [default: 1].
    #[arg(long)]
    mm2: Option<f64>,

    /// Branch-2 shadowing shape m_s2 [default: 1].
    #[arg(long)]
    ms2: Option<f64>,

    /// Average SNR grid in dB, inclusive: start:stop:step [default: 0:20:5].
    /// Both branch powers are set to 10^(dB/10).
    #[arg(long, value_name = "START:STOP:STEP")]
    snr: Option<String>,

    /// Branch-1 mean power (linear). Mutually exclusive with --snr; the
    /// snr_db CSV column then reports 10 log10(omega1).
    #[arg(long)]
    omega1: Option<f64>,

    /// Branch-2 mean power (linear); required with --omega1.
    #[arg(long)]
    omega2: Option<f64>,

    /// Monte Carlo sample count; for `ber` its presence enables the MC
    /// columns [default when MC runs: 1000000].
    #[arg(long)]
    samples: Option<u64>,

    /// RNG seed [default: 42].
    #[arg(long)]
    seed: Option<u64>,

    /// Independent RNG streams; must divide --samples [default: 4].
    #[arg(long)]
    streams: Option<u32>,

    /// Monte Carlo estimator flavor [default: semi-analytic].
    #[arg(long = "mc-mode", value_enum)]
    mc_mode: Option<McModeFlag>,

    /// JSON config file supplying any of the sweep fields (same keys as the
    /// long flags, "mod" included).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BerArgs {
    #[command(flatten)]
    sweep: SweepFlags,

    /// Which BER columns to fill [default: analytic, or both when --samples
    /// is given].
    #[arg(long, value_enum)]
    outputs: Option<OutputsFlag>,

    /// Output CSV path, or `-` for stdout [default: -].
    #[arg(long)]
    out: Option<String>,

    /// Also write `<out>.plot.py`, a plotting-tool-agnostic stub over the CSV.
    #[arg(long)]
    emit_plot_stub: bool,
}

#[derive(Args)]
struct EgbmgfArgs {
    /// JSON spec file (same dialect as the config file's `egbmgf` objects).
    spec: PathBuf,

    /// Multiply the printed value by this prefactor.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,

    /// Override the contour quadrature relative tolerance.
    #[arg(long, value_name = "TOL")]
    rel_tol: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    sweep: SweepFlags,

    /// Scale both branch powers on the Monte Carlo side only. Fault
    /// injection for exercising the validator; anything != 1 should FAIL.
    #[arg(long, value_name = "FACTOR", default_value_t = 1.0)]
    inject_omega_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McModeFlag {
    /// Average the conditional error probability over fading draws.
    SemiAnalytic,
    /// Simulate individual bit decisions.
    BitLevel,
}

impl From<McModeFlag> for McMode {
    fn from(f: McModeFlag) -> Self {
        match f {
            McModeFlag::SemiAnalytic => McMode::SemiAnalytic,
            McModeFlag::BitLevel => McMode::BitLevel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputsFlag {
    Analytic,
    Mc,
    Both,
}

/// Optional config-file counterparts of the sweep flags.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(rename = "mod")]
    modulations: Option<String>,
    mm1: Option<f64>,
    ms1: Option<f64>,
    mm2: Option<f64>,
    ms2: Option<f64>,
    snr: Option<String>,
    omega1: Option<f64>,
    omega2: Option<f64>,
    samples: Option<u64>,
    seed: Option<u64>,
    streams: Option<u32>,
    mc_mode: Option<String>,
    outputs: Option<String>,
    out: Option<String>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, msg: msg.into() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::Convergence(_) | CoreError::ResidualImag { .. } | CoreError::NoStrip(_) | CoreError::Pole(_) => {
                EXIT_NONCONVERGENCE
            }
            _ => EXIT_USAGE,
        };
        Self { code, msg: e.to_string() }
    }
}

#[derive(Debug, Clone, Copy)]
struct SweepPoint {
    snr_db: f64,
    omega1: f64,
    omega2: f64,
}

struct SweepRequest {
    modulations: Vec<Modulation>,
    shapes: (f64, f64, f64, f64),
    points: Vec<SweepPoint>,
    mc: Option<McConfig>,
    outputs: OutputsFlag,
}

impl SweepRequest {
    fn link_at(&self, point: &SweepPoint, omega_scale: f64) -> Result<ScLink, Failure> {
        let (mm1, ms1, mm2, ms2) = self.shapes;
        Ok(ScLink::new(
            GkParams::new(mm1, ms1, point.omega1 * omega_scale)?,
            GkParams::new(mm2, ms2, point.omega2 * omega_scale)?,
        ))
    }
}

fn parse_mc_mode(s: &str) -> Result<McModeFlag, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "semi-analytic" | "semi_analytic" => Ok(McModeFlag::SemiAnalytic),
        "bit-level" | "bit_level" => Ok(McModeFlag::BitLevel),
        other => Err(Failure::usage(format!("unknown mc_mode '{other}'"))),
    }
}

fn parse_outputs(s: &str) -> Result<OutputsFlag, Failure> {
    match s.to_ascii_lowercase().as_str() {
        "analytic" => Ok(OutputsFlag::Analytic),
        "mc" => Ok(OutputsFlag::Mc),
        "both" => Ok(OutputsFlag::Both),
        other => Err(Failure::usage(format!("unknown outputs '{other}'"))),
    }
}

fn parse_snr_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::usage(format!(
            "--snr expects start:stop:step, got '{s}'"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("--snr component '{p}' is not a number")))
        })
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !step.is_finite() || step <= 0.0 {
        return Err(Failure::usage(format!("--snr step must be > 0, got {step}")));
    }
    if !start.is_finite() || !stop.is_finite() || start > stop {
        return Err(Failure::usage(format!(
            "--snr grid {start}:{stop}:{step} is empty"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

/// Apply precedence (flag > config > default) and build the request.
fn resolve_request(
    flags: &SweepFlags,
    outputs: Option<OutputsFlag>,
    mc_always: bool,
) -> Result<SweepRequest, Failure> {
    let cfg: ConfigFile = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };

    let mods_text = flags
        .modulations
        .clone()
        .or(cfg.modulations)
        .unwrap_or_else(|| DEFAULT_MODS.into());
    let mut modulations = Vec::new();
    for name in mods_text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        modulations.push(Modulation::from_name(name)?);
    }
    if modulations.is_empty() {
        return Err(Failure::usage("no modulations selected"));
    }

    let shapes = (
        flags.mm1.or(cfg.mm1).unwrap_or(DEFAULT_SHAPE),
        flags.ms1.or(cfg.ms1).unwrap_or(DEFAULT_SHAPE),
        flags.mm2.or(cfg.mm2).unwrap_or(DEFAULT_SHAPE),
        flags.ms2.or(cfg.ms2).unwrap_or(DEFAULT_SHAPE),
    );

    let snr = flags.snr.clone().or(cfg.snr);
    let omega1 = flags.omega1.or(cfg.omega1);
    let omega2 = flags.omega2.or(cfg.omega2);
    let points = match (snr, omega1, omega2) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Failure::usage("--snr and --omega1/--omega2 are mutually exclusive"));
        }
        (None, Some(o1), Some(o2)) => {
            if !(o1 > 0.0) || !(o2 > 0.0) {
                return Err(Failure::usage("branch powers must be positive"));
            }
            vec![SweepPoint { snr_db: 10.0 * o1.log10(), omega1: o1, omega2: o2 }]
        }
        (None, Some(_), None) | (None, None, Some(_)) => {
            return Err(Failure::usage("--omega1 and --omega2 must be given together"));
        }
        (snr, None, None) => parse_snr_grid(&snr.unwrap_or_else(|| DEFAULT_SNR.into()))?
            .into_iter()
            .map(|db| {
                let omega = 10f64.powf(db / 10.0);
                SweepPoint { snr_db: db, omega1: omega, omega2: omega }
            })
            .collect(),
    };

    let outputs = match outputs {
        Some(o) => o,
        None => match cfg.outputs.as_deref() {
            Some(text) => parse_outputs(text)?,
            None if flags.samples.or(cfg.samples).is_some() || mc_always => OutputsFlag::Both,
            None => OutputsFlag::Analytic,
        },
    };

    let samples = flags.samples.or(cfg.samples);
    let mc = if mc_always || outputs != OutputsFlag::Analytic {
        let mode = match &flags.mc_mode {
            Some(m) => *m,
            None => match cfg.mc_mode.as_deref() {
                Some(text) => parse_mc_mode(text)?,
                None => McModeFlag::SemiAnalytic,
            },
        };
        Some(McConfig::new(
            samples.unwrap_or(DEFAULT_SAMPLES),
            flags.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
            flags.streams.or(cfg.streams).unwrap_or(DEFAULT_STREAMS),
            mode.into(),
        )?)
    } else {
        if samples.is_some() && outputs == OutputsFlag::Analytic {
            return Err(Failure::usage(
                "--samples has no effect with --outputs analytic; drop one of them",
            ));
        }
        None
    };

    Ok(SweepRequest { modulations, shapes, points, mc, outputs })
}

fn config_out(flags: &SweepFlags) -> Option<String> {
    let path = flags.config.as_ref()?;
    let text = fs::read_to_string(path).ok()?;
    serde_json::from_str::<ConfigFile>(&text).ok()?.out
}

struct Row {
    modulation: String,
    snr_db: f64,
    analytic: Option<f64>,
    mc: Option<McEstimate>,
}

impl Row {
    fn csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_default();
        format!(
            "{},{:.6},{},{},{}",
            self.modulation,
            self.snr_db,
            fmt(self.analytic),
            fmt(self.mc.map(|e| e.ber)),
            fmt(self.mc.map(|e| e.stderr)),
        )
    }
}

fn sweep_rows(req: &SweepRequest) -> Vec<Result<Row, Failure>> {
    let mut jobs = Vec::new();
    for m in &req.modulations {
        for p in &req.points {
            jobs.push((m.clone(), *p));
        }
    }
    jobs.par_iter()
        .map(|(m, point)| {
            let link = req.link_at(point, 1.0)?;
            let analytic = if req.outputs == OutputsFlag::Mc {
                None
            } else {
                Some(ber_closed_form_report(&link, m)?.ber)
            };
            let mc = match &req.mc {
                Some(cfg) => Some(estimate_ber(&link, m, cfg)?),
                None => None,
            };
            Ok(Row { modulation: m.name().to_string(), snr_db: point.snr_db, analytic, mc })
        })
        .collect()
}

fn plot_stub(csv_path: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Reads {csv_path} and groups its rows by modulation; wire `series` into the
# plotting tool of your choice (log-scale BER against snr_db).
import csv
from collections import defaultdict

series = defaultdict(list)
with open({csv_path:?}) as fh:
    for row in csv.DictReader(fh):
        series[row["modulation"]].append((
            float(row["snr_db"]),
            float(row["ber_analytic"]) if row["ber_analytic"] else None,
            float(row["ber_mc"]) if row["ber_mc"] else None,
            float(row["mc_stderr"]) if row["mc_stderr"] else None,
        ))

for name, pts in sorted(series.items()):
    print(name, "->", len(pts), "points")
"#
    )
}

fn cmd_ber(args: &BerArgs) -> Result<(), Failure> {
    let req = resolve_request(&args.sweep, args.outputs, false)?;
    let out = args
        .out
        .clone()
        .or_else(|| config_out(&args.sweep))
        .unwrap_or_else(|| "-".into());
    if args.emit_plot_stub && out == "-" {
        return Err(Failure::usage("--emit-plot-stub requires --out FILE"));
    }

    let rows = sweep_rows(&req);

    let mut sink: Box<dyn Write> = if out == "-" {
        Box::new(std::io::stdout().lock())
    } else {
        Box::new(fs::File::create(&out).map_err(|e| Failure::usage(format!("--out {out}: {e}")))?)
    };
    let mut write = |line: &str| -> Result<(), Failure> {
        writeln!(sink, "{line}").map_err(|e| Failure::usage(format!("write {out}: {e}")))
    };

    write(CSV_HEADER)?;
    let mut first_failure: Option<Failure> = None;
    let mut failures = 0usize;
    for row in rows {
        match row {
            Ok(r) => {
                if first_failure.is_none() {
                    write(&r.csv())?;
                }
            }
            Err(f) => {
                eprintln!("error: {}", f.msg);
                failures += 1;
                first_failure.get_or_insert(f);
            }
        }
    }
    sink.flush().ok();
    if let Some(f) = first_failure {
        return Err(Failure {
            code: f.code,
            msg: format!("{failures} sweep point(s) failed; partial CSV flushed"),
        });
    }

    if args.emit_plot_stub {
        let stub_path = format!("{out}.plot.py");
        fs::write(&stub_path, plot_stub(&out))
            .map_err(|e| Failure::usage(format!("write {stub_path}: {e}")))?;
    }
    Ok(())
}

fn cmd_egbmgf(args: &EgbmgfArgs) -> Result<(), Failure> {
    if !args.scale.is_finite() {
        return Err(Failure::usage("--scale must be finite"));
    }
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| Failure::usage(format!("spec {}: {e}", args.spec.display())))?;
    let spec: EgbmgfSpec = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("spec {}: {e}", args.spec.display())))?;
    let pair = contours_for(&spec)?;
    let (mut cfg_s, mut cfg_t) = (pair.s, pair.t);
    if let Some(rt) = args.rel_tol {
        if !(rt > 0.0) || rt > 1e-4 {
            return Err(Failure::usage(format!(
                "--rel-tol must lie in (0, 1e-4], got {rt}"
            )));
        }
        cfg_s.rel_tol = rt;
        cfg_t.rel_tol = rt;
    }
    let report = eval_egbmgf_report(&spec, &cfg_s, &cfg_t)?;
    println!("value {:.12e}", report.value * args.scale);
    println!("imag_residual {:.3e}", report.imag_residual);
    println!(
        "convergence {}",
        match report.convergence {
            ConvergenceClass::Strict => "strict",
            ConvergenceClass::Marginal => "marginal",
        }
    );
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    if !(args.inject_omega_scale > 0.0) || !args.inject_omega_scale.is_finite() {
        return Err(Failure::usage("--inject-omega-scale must be positive"));
    }
    let req = resolve_request(&args.sweep, Some(OutputsFlag::Both), true)?;
    let mc_cfg = req.mc.expect("validate always carries an MC config");

    struct Check {
        modulation: String,
        snr_db: f64,
        analytic: f64,
        est: McEstimate,
        z: f64,
        conclusive: bool,
    }

    let mut jobs = Vec::new();
    for m in &req.modulations {
        for p in &req.points {
            jobs.push((m.clone(), *p));
        }
    }
    let checks: Vec<Result<Check, Failure>> = jobs
        .par_iter()
        .map(|(m, point)| {
            let link = req.link_at(point, 1.0)?;
            let analytic = ber_closed_form_report(&link, m)?.ber;
            let mc_link = req.link_at(point, args.inject_omega_scale)?;
            let est = estimate_ber(&mc_link, m, &mc_cfg)?;
            let diff = (analytic - est.ber).abs();
            let z = if diff == 0.0 { 0.0 } else { diff / est.stderr };
            Ok(Check {
                modulation: m.name().to_string(),
                snr_db: point.snr_db,
                analytic,
                est,
                z,
                conclusive: est.effective_samples >= MIN_EFFECTIVE_SAMPLES
                    && 3.0 * est.stderr < analytic,
            })
        })
        .collect();

    let mut failed = 0usize;
    let mut inconclusive = 0usize;
    let mut total = 0usize;
    let mut worst: Option<(String, f64, f64)> = None;
    for c in checks {
        let c = c?;
        total += 1;
        let status = if !c.conclusive {
            inconclusive += 1;
            "INCONCLUSIVE (stderr too large to discriminate)"
        } else if c.z <= 3.0 {
            "PASS"
        } else {
            failed += 1;
            "FAIL"
        };
        println!(
            "{} {:.6} analytic={:.9e} mc={:.9e} stderr={:.3e} z={:.2} {}",
            c.modulation, c.snr_db, c.analytic, c.est.ber, c.est.stderr, c.z, status
        );
        if c.conclusive && worst.as_ref().map_or(true, |w| c.z > w.2) {
            worst = Some((c.modulation.clone(), c.snr_db, c.z));
        }
    }
    if let Some((m, db, z)) = worst {
        println!("worst offender: {m} @ {db:.6} dB (z = {z:.2})");
    }
    if failed > 0 {
        println!("result: FAIL ({failed} of {total} points)");
        return Err(Failure {
            code: EXIT_VALIDATION,
            msg: format!("{failed} of {total} points outside 3 standard errors"),
        });
    }
    println!(
        "result: PASS ({} of {total} points conclusive)",
        total - inconclusive
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ber(args) => cmd_ber(args),
        Command::Egbmgf(args) => cmd_egbmgf(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
