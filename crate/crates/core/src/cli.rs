//! Command-line front end: `constants`, `apply`, `extend` and `verify`.
//!
//! Options come from flags and from an optional flat JSON config file whose
//! keys are the flag names without the leading dashes; flags win. Exit status
//! is 0 on success, 1 when a check fails or a computation errors, 2 on a
//! configuration error.

use crate::error::{Error, Result};
use crate::extension as ext;
use crate::field::{write_atomic, GridSpec, ScalarField, SpaceTimeFunction, TestFunction};
use crate::fracops::{self as fo, FracConstants, FracOrder};
use crate::heatsg::{self as hs, Method};
use crate::report::{CheckReport, Status};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "fraxion", version, about = "Fractional Laplacians, fractional heat operators and their extensions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print γ(n,s), α(n,s), the elliptic D-t-N constant and K(s).
    Constants(Flags),
    /// Apply an operator to a test function and write the field as CSV.
    Apply(Flags),
    /// Solve an extension problem, write per-rung CSVs and the D-t-N comparison.
    Extend(Flags),
    /// Run verification suites and write the JSON report.
    Verify(Flags),
}

#[derive(Debug, Args, Default, Clone)]
pub struct Flags {
    /// Spatial dimension (1..=3).
    #[arg(long)]
    pub n: Option<usize>,
    /// Order s (non-integer for fractional operators).
    #[arg(long)]
    pub s: Option<f64>,
    /// Test function, e.g. `gaussian`, `gaussian:2`, `modulated_gaussian:3.14:0.5`, `polynomial_gaussian:2:3.14`.
    #[arg(long)]
    pub function: Option<String>,
    /// Points per spatial axis (power of two ≥ 32).
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Half-width L of the box [−L, L)ⁿ.
    #[arg(long = "half-width")]
    pub half_width: Option<f64>,
    /// apply: spectral | pointwise | balakrishnan | convolution.
    #[arg(long)]
    pub method: Option<String>,
    /// apply: fraclap | fracheat | heat | riesz. extend: elliptic | parabolic | higher.
    #[arg(long)]
    pub op: Option<String>,
    /// Heat time for `apply --op heat`.
    #[arg(long)]
    pub t: Option<f64>,
    /// Time points for space-time fields.
    #[arg(long = "time-points")]
    pub time_points: Option<usize>,
    /// Half-width of the time window.
    #[arg(long = "time-half-width")]
    pub time_half_width: Option<f64>,
    /// Width c of the time factor e^{−c t²}.
    #[arg(long = "time-c")]
    pub time_c: Option<f64>,
    /// verify: specfun | quad | field | heatsg | fracops | extension | all.
    #[arg(long)]
    pub suite: Option<String>,
    /// Multiplies every check tolerance.
    #[arg(long = "tol-scale")]
    pub tol_scale: Option<f64>,
    /// Output file (constants, apply) or directory (extend).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Flat JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write runtime_ms as 0 so reports are byte-reproducible.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
}

/// Fully resolved options; echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub s: f64,
    pub function: String,
    pub grid_points: usize,
    pub half_width: f64,
    pub method: String,
    pub op: String,
    pub t: f64,
    pub time_points: usize,
    pub time_half_width: f64,
    pub time_c: f64,
    pub suite: String,
    pub tol_scale: f64,
    pub out: Option<String>,
    pub report: Option<String>,
    pub no_timing: bool,
}

const CONFIG_KEYS: [&str; 16] = [
    "n",
    "s",
    "function",
    "grid-points",
    "half-width",
    "method",
    "op",
    "t",
    "time-points",
    "time-half-width",
    "time-c",
    "suite",
    "tol-scale",
    "out",
    "report",
    "no-timing",
];

fn cfg_err(msg: String) -> Error {
    Error::Config(msg)
}

fn read_config(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| cfg_err(format!("invalid JSON in {}: {e}", path.display())))?;
    let Value::Object(m) = v else {
        return Err(cfg_err("config must be a JSON object".into()));
    };
    for k in m.keys() {
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(cfg_err(format!("unknown config key '{k}'")));
        }
    }
    Ok(m)
}

fn get_f64(m: &Map<String, Value>, k: &str) -> Result<Option<f64>> {
    m.get(k)
        .map(|v| v.as_f64().ok_or_else(|| cfg_err(format!("config key '{k}' must be a number"))))
        .transpose()
}

fn get_usize(m: &Map<String, Value>, k: &str) -> Result<Option<usize>> {
    m.get(k)
        .map(|v| {
            v.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| cfg_err(format!("config key '{k}' must be a nonnegative integer")))
        })
        .transpose()
}

fn get_str(m: &Map<String, Value>, k: &str) -> Result<Option<String>> {
    m.get(k)
        .map(|v| v.as_str().map(str::to_string).ok_or_else(|| cfg_err(format!("config key '{k}' must be a string"))))
        .transpose()
}

fn get_bool(m: &Map<String, Value>, k: &str) -> Result<Option<bool>> {
    m.get(k)
        .map(|v| v.as_bool().ok_or_else(|| cfg_err(format!("config key '{k}' must be a boolean"))))
        .transpose()
}

impl RunConfig {
    /// Merges flags over the config file over defaults and validates.
    pub fn resolve(command: &str, f: &Flags) -> Result<RunConfig> {
        let m = match &f.config {
            Some(p) => read_config(p)?,
            None => Map::new(),
        };
        let n = f.n.or(get_usize(&m, "n")?).unwrap_or(1);
        if !(1..=3).contains(&n) {
            return Err(cfg_err(format!("n must be 1, 2 or 3, got {n}")));
        }
        let default_grid = GridSpec::default_for(n)?;
        let op_default = match command {
            "extend" => "auto",
            _ => "fraclap",
        };
        let c = RunConfig {
            command: command.to_string(),
            n,
            s: f.s.or(get_f64(&m, "s")?).unwrap_or(0.5),
            function: f.function.clone().or(get_str(&m, "function")?).unwrap_or_else(|| "gaussian".into()),
            grid_points: f.grid_points.or(get_usize(&m, "grid-points")?).unwrap_or(default_grid.points_per_axis),
            half_width: f.half_width.or(get_f64(&m, "half-width")?).unwrap_or(default_grid.half_width),
            method: f.method.clone().or(get_str(&m, "method")?).unwrap_or_else(|| "spectral".into()),
            op: f.op.clone().or(get_str(&m, "op")?).unwrap_or_else(|| op_default.into()),
            t: f.t.or(get_f64(&m, "t")?).unwrap_or(1.0),
            time_points: f.time_points.or(get_usize(&m, "time-points")?).unwrap_or(32),
            time_half_width: f.time_half_width.or(get_f64(&m, "time-half-width")?).unwrap_or(4.0),
            time_c: f.time_c.or(get_f64(&m, "time-c")?).unwrap_or(1.0),
            suite: f.suite.clone().or(get_str(&m, "suite")?).unwrap_or_else(|| "all".into()),
            tol_scale: f.tol_scale.or(get_f64(&m, "tol-scale")?).unwrap_or(1.0),
            out: f
                .out
                .as_ref()
                .map(|p| p.display().to_string())
                .or(get_str(&m, "out")?),
            report: f
                .report
                .as_ref()
                .map(|p| p.display().to_string())
                .or(get_str(&m, "report")?),
            no_timing: f.no_timing || get_bool(&m, "no-timing")?.unwrap_or(false),
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        self.grid().map_err(|e| cfg_err(e.to_string()))?;
        TestFunction::parse(&self.function)?;
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return Err(cfg_err(format!("tol-scale must be positive, got {}", self.tol_scale)));
        }
        if !(self.time_c > 0.0) {
            return Err(cfg_err("time-c must be positive".into()));
        }
        let fractional = match self.command.as_str() {
            "constants" | "extend" => true,
            "apply" => self.op != "heat",
            _ => false,
        };
        if fractional {
            FracOrder::new(self.s).map_err(|e| cfg_err(e.to_string()))?;
        }
        let ok_method = ["spectral", "pointwise", "balakrishnan", "convolution"];
        if !ok_method.contains(&self.method.as_str()) {
            return Err(cfg_err(format!("unknown method '{}'", self.method)));
        }
        match self.command.as_str() {
            "apply" if !["fraclap", "fracheat", "heat", "riesz"].contains(&self.op.as_str()) => {
                Err(cfg_err(format!("unknown op '{}' for apply", self.op)))
            }
            "extend" if !["auto", "elliptic", "parabolic", "higher"].contains(&self.op.as_str()) => {
                Err(cfg_err(format!("unknown op '{}' for extend", self.op)))
            }
            "verify" if self.suite != "all" && !crate::suites::SUITES.contains(&self.suite.as_str()) => {
                Err(cfg_err(format!("unknown suite '{}'", self.suite)))
            }
            "extend" if self.out.is_none() => Err(cfg_err("extend needs --out <directory>".into())),
            _ => Ok(()),
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.grid_points, self.half_width)
    }

    pub fn space_time_grid(&self) -> Result<GridSpec> {
        self.grid()?.with_time(self.time_points, self.time_half_width)
    }
}

/// `{"schema": 1, "config_echo": …, "checks": […]}`
pub fn report_json(config: &RunConfig, checks: &[CheckReport], extra: Option<Value>) -> Result<String> {
    let mut checks = checks.to_vec();
    if config.no_timing {
        for c in &mut checks {
            c.runtime_ms = 0;
        }
    }
    let mut v = json!({
        "schema": 1,
        "config_echo": config,
        "checks": checks,
    });
    if let Some(e) = extra {
        v["summary"] = e;
    }
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_text(path: Option<&str>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(Path::new(p), text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn constants(c: &RunConfig) -> Result<i32> {
    let order = FracOrder::new(c.s)?;
    let k = FracConstants::new(c.n, order);
    let show = |v: Option<f64>| v.map(crate::field::fmt_g17).unwrap_or_else(|| "undefined".into());
    println!("{:<12} {}", "n", c.n);
    println!("{:<12} {}", "s", crate::field::fmt_g17(c.s));
    println!("{:<12} {}", "gamma_ns", show(k.gamma_ns));
    println!("{:<12} {}", "riesz_const", show(k.riesz_const));
    println!("{:<12} {}", "dtn_const", show(k.dtn_const));
    println!("{:<12} {}", "K", crate::field::fmt_g17(k.k_s));
    let v = json!({
        "n": c.n,
        "s": c.s,
        "gamma_ns": k.gamma_ns,
        "riesz_const": k.riesz_const,
        "dtn_const": k.dtn_const,
        "K": k.k_s,
    });
    let text = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))? + "\n";
    match &c.out {
        Some(p) => write_atomic(Path::new(p), text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn space_time_function(c: &RunConfig) -> Result<SpaceTimeFunction> {
    Ok(SpaceTimeFunction {
        space: TestFunction::parse(&c.function)?,
        time_c: c.time_c,
    })
}

fn apply(c: &RunConfig) -> Result<i32> {
    let tf = TestFunction::parse(&c.function)?;
    let method = c.method.as_str();
    let out: ScalarField = match c.op.as_str() {
        "fraclap" => {
            let u = tf.sample(c.grid()?);
            let order = FracOrder::new(c.s)?;
            let pad = fo::default_padding(c.n);
            match method {
                "spectral" => fo::fraclap_spectral_padded(&u, c.s, pad)?,
                "pointwise" => fo::fraclap_pointwise_field(&u, order)?,
                "balakrishnan" => fo::fraclap_balakrishnan(&u, order, pad)?,
                m => return Err(cfg_err(format!("method '{m}' not available for fraclap"))),
            }
        }
        "fracheat" => {
            let f = space_time_function(c)?.sample(c.space_time_grid()?)?;
            match method {
                "spectral" => fo::fracheat_multiplier(&f, c.s)?,
                "balakrishnan" => fo::fracheat(&f, FracOrder::new(c.s)?)?,
                m => return Err(cfg_err(format!("method '{m}' not available for fracheat"))),
            }
        }
        "heat" => {
            let u = tf.sample(c.grid()?);
            let m = match method {
                "spectral" => Method::Spectral,
                "convolution" => Method::Convolution,
                m => return Err(cfg_err(format!("method '{m}' not available for heat"))),
            };
            hs::apply_pt(&u, c.t, m)?
        }
        "riesz" => fo::riesz_potential(&tf.sample(c.grid()?), 2.0 * c.s)?,
        other => return Err(cfg_err(format!("unknown op '{other}'"))),
    };
    for w in &out.warnings {
        eprintln!("warning: {w:?}");
    }
    write_text(c.out.as_deref(), &out.to_csv(None))?;
    Ok(0)
}

fn extend(c: &RunConfig) -> Result<i32> {
    let start = std::time::Instant::now();
    let order = FracOrder::new(c.s)?;
    let variant = match c.op.as_str() {
        "auto" if order.k == 0 => "elliptic",
        "auto" => "higher",
        v => v,
    };
    let dir = PathBuf::from(c.out.as_ref().expect("validated"));
    let ladder = ext::default_ladder();
    let (field, d, oracle, interior) = match variant {
        "elliptic" => {
            let u = TestFunction::parse(&c.function)?.sample(c.grid()?);
            let e = ext::solve_elliptic(&u, c.s, &ladder)?;
            let d = ext::dtn_elliptic(&e, c.s)?;
            let oracle = fo::fraclap_spectral_padded(&u, c.s, fo::default_padding(c.n))?;
            (e, d, oracle, true)
        }
        "parabolic" | "higher" => {
            let f = space_time_function(c)?.sample(c.space_time_grid()?)?;
            let (e, d) = if variant == "parabolic" {
                let e = ext::solve_parabolic(&f, c.s, &ladder)?;
                let d = ext::dtn_parabolic(&e, c.s)?;
                (e, d)
            } else {
                let e = ext::solve_higher(&f, c.s, &ladder)?;
                let d = ext::dtn_higher(&e, &f)?;
                (e, d)
            };
            (e, d, fo::fracheat_multiplier(&f, c.s)?, false)
        }
        other => return Err(cfg_err(format!("unknown extension '{other}'"))),
    };
    for (k, (_, text)) in field.to_csv().iter().enumerate() {
        write_atomic(&dir.join(format!("rung_{k}.csv")), text.as_bytes())?;
    }
    write_atomic(&dir.join("dtn.csv"), d.value.to_csv(None).as_bytes())?;
    let g = oracle.grid;
    let rel = if interior {
        let keep = |i: usize| g.in_interior(i, 0.5);
        d.value.max_diff_where(&oracle, keep) / oracle.max_abs_where(keep)
    } else {
        d.value.sub(&oracle)?.max_abs() / oracle.max_abs()
    };
    let tol = if variant == "elliptic" { 1e-2 } else { 2e-2 } * c.tol_scale;
    let mut check = CheckReport::bound(&format!("extend.dtn_{variant}"), rel, tol);
    check.runtime_ms = start.elapsed().as_millis() as u64;
    let trace = match variant {
        "elliptic" => field.trace_errors(&TestFunction::parse(&c.function)?.sample(field.grid), 2.0)?,
        _ => field.trace_errors(&space_time_function(c)?.sample(field.grid)?, 2.0)?,
    };
    let summary = json!({
        "variant": variant,
        "y_ladder": field.y_ladder,
        "trace_errors_l2": trace,
        "dtn_rel_error": rel,
        "extrapolation_error_estimate": d.error_estimate,
        "rungs": (0..field.rungs.len()).map(|k| format!("rung_{k}.csv")).collect::<Vec<_>>(),
    });
    let text = report_json(c, std::slice::from_ref(&check), Some(summary))?;
    write_atomic(&dir.join("dtn.json"), text.as_bytes())?;
    if let Some(r) = &c.report {
        write_atomic(Path::new(r), text.as_bytes())?;
    }
    println!("{} {:?} rel_error={}", check.check_id, check.status, crate::field::fmt_g17(rel));
    Ok(if check.passed() { 0 } else { 1 })
}

fn verify(c: &RunConfig) -> Result<i32> {
    let checks = crate::suites::run_suite(&c.suite, c.tol_scale)?;
    let failed = checks.iter().filter(|r| r.status == Status::Fail).count();
    for r in &checks {
        eprintln!(
            "{:<48} {:<4} measured={}",
            r.check_id,
            match r.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            },
            crate::field::fmt_g17(r.measured)
        );
    }
    let text = report_json(c, &checks, None)?;
    write_text(c.report.as_deref(), &text)?;
    eprintln!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { 0 } else { 1 })
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FRAXION_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| cfg_err(format!("FRAXION_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| cfg_err(e.to_string()))?;
    }
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (name, flags) = match &cli.command {
        Command::Constants(f) => ("constants", f),
        Command::Apply(f) => ("apply", f),
        Command::Extend(f) => ("extend", f),
        Command::Verify(f) => ("verify", f),
    };
    let resolved = configure_threads().and_then(|_| RunConfig::resolve(name, flags));
    let config = match resolved {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let r = match name {
        "constants" => constants(&config),
        "apply" => apply(&config),
        "extend" => extend(&config),
        _ => verify(&config),
    };
    match r {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
