//! Command-line front end.
//!
//! `parse_config` turns an argument list (without the program name) into a
//! validated [`CliConfig`]; `run_command` executes it and returns the
//! process exit code: 0 on success, 1 on numeric failure, 2 on usage errors.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::acceptance;
use crate::anisotropy::SurfaceTension;
use crate::dropsolve::{log_space, lower_bound_constant, predicted_minimizer, sweep_gamma_partial, total_energy, SweepConfig};
use crate::error::{Error, Result};
use crate::geometry::{lemma_graph_bounds, wulff_shape, BoundaryCurve, ConvexPolygon, Target, WulffBoundary};
use crate::riesz::{riesz_energy, riesz_energy_mc, RieszSpec};
use crate::variations::{default_step, el_residual, mu2_integral, stretch_derivatives, StretchFamily};

type Poly = ConvexPolygon<f64>;
type Tension = SurfaceTension<f64>;

#[derive(Parser, Debug)]
#[command(
    name = "anisodrop",
    version,
    about = "Anisotropic liquid-drop energies for planar convex sets",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Wulff shape of a tension as polygon JSON.
    Wulff(Flags),
    /// Anisotropic perimeter, Riesz energy and total energy of a shape.
    Energy(Flags),
    /// Variation coefficients of the stretch family at a0.
    Coeffs(Flags),
    /// Minimize over the stretch family for a list of gamma values.
    Sweep(Flags),
    /// Normal-graph bounds between the Wulff boundary and a convex target.
    Lemma(Flags),
    /// Euler-Lagrange residual on the Wulff boundary.
    El(Flags),
    /// Run the acceptance checks.
    Verify(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Tension JSON file.
    #[arg(long, value_name = "PATH")]
    tension: Option<PathBuf>,
    /// Polygon JSON file (energy: shape to evaluate; lemma: target set).
    #[arg(long, value_name = "PATH")]
    shape: Option<PathBuf>,
    /// Riesz exponent in (0, 2).
    #[arg(long, value_name = "A")]
    alpha: Option<f64>,
    #[arg(long, value_name = "G")]
    gamma: Option<f64>,
    /// "start:stop:Nlog" or a comma-separated list.
    #[arg(long, value_name = "SPEC")]
    gammas: Option<String>,
    /// Family parameter of the reference set (default: the Wulff parameter).
    #[arg(long, value_name = "A0")]
    a0: Option<f64>,
    /// Support directions for smooth Wulff shapes, or boundary nodes.
    #[arg(long, value_name = "N")]
    directions: Option<usize>,
    #[arg(long = "quad-tol", value_name = "T")]
    quad_tol: Option<f64>,
    #[arg(long = "mc-samples", value_name = "N")]
    mc_samples: Option<usize>,
    #[arg(long, value_name = "S", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Wulff,
    Energy,
    Coeffs,
    Sweep,
    Lemma,
    El,
    Verify,
}

/// A validated invocation.
#[derive(Clone, Debug)]
pub struct CliConfig {
    pub command: Command,
    pub tension_path: Option<PathBuf>,
    pub tension: Option<Tension>,
    pub shape: Option<Poly>,
    pub alpha: f64,
    pub gamma: f64,
    pub gammas: Vec<f64>,
    pub a0: Option<f64>,
    pub directions: usize,
    pub quad_tol: Option<f64>,
    pub mc_samples: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Usage error: exit code 2. `help` marks requested help or version text,
/// which exits 0.
#[derive(Debug, Clone)]
pub struct UsageError {
    pub message: String,
    pub help: bool,
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> UsageError {
    UsageError { message: message.into(), help: false }
}

const FLAGS: &str = "--tension, --shape, --alpha, --gamma, --gammas, --a0, --directions, --quad-tol, \
--mc-samples, --seed, --out, --format, --help";

/// Parses a `γ` list: `"start:stop:Nlog"` or `"g1,g2,..."`.
pub fn parse_gammas(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let spec = spec.trim();
    if let Some((range, n)) = spec.rsplit_once(':') {
        let n = n
            .strip_suffix("log")
            .ok_or_else(|| format!("expected start:stop:Nlog, got {spec:?}"))?;
        let (a, b) = range
            .split_once(':')
            .ok_or_else(|| format!("expected start:stop:Nlog, got {spec:?}"))?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
        let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
        return log_space(parse(a)?, parse(b)?, n).map_err(|e| e.to_string());
    }
    let gs = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    if gs.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err("gamma values must be finite and non-negative".into());
    }
    Ok(gs)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, flag: &str) -> std::result::Result<T, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{flag} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{flag} {}: {e}", path.display())))
}

/// Parses and validates an argument list that excludes the program name.
pub fn parse_config<I, S>(argv: I) -> std::result::Result<CliConfig, UsageError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("anisodrop")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
        let mut message = e.render().to_string();
        if e.kind() == ErrorKind::UnknownArgument {
            message.push_str(&format!("\nvalid flags: {FLAGS}\n"));
        }
        UsageError { message, help }
    })?;
    let (command, flags) = match cli.command {
        Cmd::Wulff(f) => (Command::Wulff, f),
        Cmd::Energy(f) => (Command::Energy, f),
        Cmd::Coeffs(f) => (Command::Coeffs, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::Lemma(f) => (Command::Lemma, f),
        Cmd::El(f) => (Command::El, f),
        Cmd::Verify(f) => (Command::Verify, f),
    };
    let needs_tension = command != Command::Verify;
    let tension: Option<Tension> = match &flags.tension {
        Some(p) => {
            let t: Tension = read_json(p, "--tension")?;
            t.validate().map_err(|e| usage(format!("--tension {}: {e}", p.display())))?;
            Some(t)
        }
        None if needs_tension => return Err(usage(format!("{command:?} requires --tension PATH").to_lowercase())),
        None => None,
    };
    let shape: Option<Poly> = flags.shape.as_deref().map(|p| read_json(p, "--shape")).transpose()?;
    if command == Command::Lemma && shape.is_none() {
        return Err(usage("lemma requires --shape PATH (the target polygon)"));
    }
    let alpha = flags.alpha.unwrap_or(1.0);
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(usage(format!("--alpha {alpha}: must lie in (0, 2)")));
    }
    let gamma = flags.gamma.unwrap_or(if command == Command::El { 0.1 } else { 0.0 });
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(usage(format!("--gamma {gamma}: must be finite and non-negative")));
    }
    let gammas = match &flags.gammas {
        Some(s) => parse_gammas(s).map_err(|e| usage(format!("--gammas: {e}")))?,
        None => log_space(1e-1, 1e-4, 8).expect("valid default"),
    };
    if command == Command::Sweep {
        let pos: Vec<f64> = gammas.iter().copied().filter(|g| *g > 0.0).collect();
        let (lo, hi) = pos.iter().fold((f64::INFINITY, 0.0f64), |(l, h), g| (l.min(*g), h.max(*g)));
        if pos.len() < 4 || hi / lo < 100.0 * (1.0 - 1e-12) {
            return Err(usage("--gammas: need at least four positive values spanning two decades"));
        }
    }
    if let Some(a0) = flags.a0 {
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(usage(format!("--a0 {a0}: must be positive")));
        }
    }
    let directions = flags.directions.unwrap_or(720);
    if directions < 8 {
        return Err(usage(format!("--directions {directions}: need at least 8")));
    }
    if let Some(t) = flags.quad_tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(usage(format!("--quad-tol {t}: must lie in (0, 1)")));
        }
    }
    if let Some(n) = flags.mc_samples {
        if n < 10_000 {
            return Err(usage(format!("--mc-samples {n}: need at least 10000")));
        }
    }
    let format = flags.format.unwrap_or_else(|| {
        let csv_out = flags.out.as_deref().and_then(Path::extension).is_some_and(|e| e == "csv");
        if command == Command::Sweep && csv_out {
            Format::Csv
        } else {
            Format::Json
        }
    });
    if format == Format::Csv && command != Command::Sweep {
        return Err(usage("--format csv: only sweep writes CSV"));
    }
    Ok(CliConfig {
        command,
        tension_path: flags.tension,
        tension,
        shape,
        alpha,
        gamma,
        gammas,
        a0: flags.a0,
        directions,
        quad_tol: flags.quad_tol,
        mc_samples: flags.mc_samples,
        seed: flags.seed,
        out: flags.out,
        format,
    })
}

/// The report text and, on numeric failure, the error that cut it short.
struct Output {
    text: String,
    error: Option<Error>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, error: None }
    }
}

fn pretty(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn tension(config: &CliConfig) -> Result<&Tension> {
    config
        .tension
        .as_ref()
        .ok_or_else(|| Error::Domain("--tension is required".into()))
}

fn family(config: &CliConfig) -> Result<(StretchFamily, f64)> {
    let (mut fam, a_wulff) = StretchFamily::from_tension(tension(config)?, config.alpha)?;
    if let Some(t) = config.quad_tol {
        fam = fam.with_quad_tol(t)?;
    }
    Ok((fam, config.a0.unwrap_or(a_wulff)))
}

fn spec(config: &CliConfig) -> Result<RieszSpec> {
    let mut s = RieszSpec::new(config.alpha)?;
    if let Some(t) = config.quad_tol {
        s = s.with_quad_tol(t)?;
    }
    Ok(s.with_mc(config.mc_samples.unwrap_or(s.mc_samples), config.seed))
}

fn wulff_cmd(config: &CliConfig) -> Result<Output> {
    Ok(Output::ok(pretty(&wulff_shape(tension(config)?, config.directions)?)?))
}

fn energy_cmd(config: &CliConfig) -> Result<Output> {
    let f = tension(config)?;
    let shape = match &config.shape {
        Some(s) => s.clone(),
        None => wulff_shape(f, config.directions)?,
    };
    let spec = spec(config)?;
    let perimeter = shape.anisotropic_perimeter(f);
    let mut report = json!({
        "alpha": config.alpha,
        "gamma": config.gamma,
        "area": shape.area(),
        "perimeter": perimeter,
    });
    let riesz = match riesz_energy(&shape, &spec) {
        Ok(v) => v,
        Err(e) => return Ok(Output { text: with_error(report, &e)?, error: Some(e) }),
    };
    report["riesz"] = json!(riesz);
    report["energy"] = json!(total_energy(&shape, f, config.gamma, &spec)?);
    if config.mc_samples.is_some() {
        let (est, se) = riesz_energy_mc(&shape, &spec)?;
        report["riesz_mc"] = json!({"estimate": est, "std_error": se, "samples": spec.mc_samples, "seed": spec.mc_seed});
    }
    Ok(Output::ok(pretty(&report)?))
}

fn with_error(mut report: Value, e: &Error) -> Result<String> {
    report["error"] = json!(e.to_string());
    pretty(&report)
}

fn coeffs_cmd(config: &CliConfig) -> Result<Output> {
    let (fam, a0) = family(config)?;
    let mut report = json!({"a0": a0, "alpha": config.alpha});
    let run = |report: &mut Value| -> Result<()> {
        let c = stretch_derivatives(&fam, a0, default_step(a0))?;
        report["coefficients"] = serde_json::to_value(c)?;
        let mu2 = mu2_integral(&fam, a0)?;
        report["mu2_integral"] = json!(mu2);
        let c = crate::variations::VariationCoefficients { mu2, ..c };
        report["lower_bound_constant"] = json!(lower_bound_constant(&c)?);
        let p = predicted_minimizer(a0, config.gamma, &c)?;
        report["prediction"] = serde_json::to_value(p)?;
        Ok(())
    };
    match run(&mut report) {
        Ok(()) => Ok(Output::ok(pretty(&report)?)),
        Err(e) => Ok(Output { text: with_error(report, &e)?, error: Some(e) }),
    }
}

fn sweep_cmd(config: &CliConfig) -> Result<Output> {
    let (fam, a0) = family(config)?;
    let sweep = SweepConfig::new(fam, a0, config.gammas.clone())?;
    let (report, error) = sweep_gamma_partial(&sweep);
    let text = match config.format {
        Format::Csv => report.to_csv()?,
        Format::Json => report.to_json()? + "\n",
    };
    Ok(Output { text, error })
}

fn lemma_cmd(config: &CliConfig) -> Result<Output> {
    let f = tension(config)?;
    let target = config.shape.as_ref().ok_or_else(|| Error::Domain("--shape is required".into()))?;
    let base = BoundaryCurve::sample(&WulffBoundary::new(f.clone(), 1.0)?, config.directions)?;
    Ok(Output::ok(pretty(&lemma_graph_bounds(&base, Target::Polygon(target))?)?))
}

fn el_cmd(config: &CliConfig) -> Result<Output> {
    let f = tension(config)?;
    let curve = BoundaryCurve::sample(&WulffBoundary::new(f.clone(), 1.0)?, config.directions)?;
    let rep = el_residual(&curve, f, &curve.to_polygon()?, config.gamma, config.alpha)?;
    let report = json!({
        "alpha": config.alpha,
        "gamma": rep.gamma,
        "nodes": curve.len(),
        "lambda_hat": rep.lambda_hat,
        "residual_std": rep.residual_std,
        "nonconstancy": rep.nonconstancy(),
    });
    Ok(Output::ok(pretty(&report)?))
}

fn verify_cmd() -> Output {
    let mut text = String::new();
    let mut failed = 0;
    for outcome in acceptance::run_all() {
        failed += usize::from(!outcome.passed);
        text += &format!("{outcome}\n");
    }
    text += &format!("{} of 12 criteria passed\n", 12 - failed);
    let error = (failed > 0).then(|| Error::Domain(format!("{failed} acceptance criteria failed")));
    Output { text, error }
}

fn emit(config: &CliConfig, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &config.out {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Executes a validated configuration and returns the exit code.
pub fn run_command(config: &CliConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match config.command {
        Command::Wulff => wulff_cmd(config),
        Command::Energy => energy_cmd(config),
        Command::Coeffs => coeffs_cmd(config),
        Command::Sweep => sweep_cmd(config),
        Command::Lemma => lemma_cmd(config),
        Command::El => el_cmd(config),
        Command::Verify => Ok(verify_cmd()),
    };
    let out = match result {
        Ok(o) => o,
        Err(e) => Output {
            text: with_error(json!({"command": config.command}), &e).unwrap_or_default(),
            error: Some(e),
        },
    };
    if let Err(e) = emit(config, &out.text, stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    match out.error {
        Some(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
        None => 0,
    }
}

/// Parses and runs; the entry point of the binary.
pub fn main_with_args<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match parse_config(argv) {
        Ok(config) => run_command(&config, stdout, stderr),
        Err(e) if e.help => {
            let _ = stdout.write_all(e.message.as_bytes());
            0
        }
        Err(e) => {
            let _ = stderr.write_all(e.message.as_bytes());
            if !e.message.ends_with('\n') {
                let _ = writeln!(stderr);
            }
            2
        }
    }
}

/// Full help text.
pub fn help_text() -> String {
    Cli::command().render_long_help().to_string()
}
