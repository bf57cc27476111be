//! Command line driver for the warped-metric curvature audit.
//!
//! Every subcommand prints a JSON summary to stdout; commands that take
//! `--out-dir` additionally write CSV tables there for plotting and
//! regression diffing. Numeric CSV cells use 17 significant digits so
//! that diffs of two runs are meaningful at full precision; non-finite
//! values appear in JSON as strings because JSON has no literal for
//! them.
//!
//! Exit status: 0 on success, 1 when a check or certification fails
//! (a curvature maximum reaches zero, a constant misses its tolerance),
//! 2 on usage, configuration, or I/O errors.
//!
//! Configuration is resolved in three layers: built-in defaults, then an
//! optional JSON config file (`--config`), then explicit flags. The env
//! var `WARPCURV_THREADS` caps the worker pool used for the radial grid.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};
use warpcurv::{
    audit_profile, aregularity_probe, build_profile, curvature_components,
    curvature_components_log, default_scan_bounds, model_components, model_state,
    region6_components, region6_reduced_vertex, solve_alpha, AuditOptions, AuditReport,
    ProfileConfig, TailProbeOptions, WarpProfile,
};

#[derive(Parser)]
#[command(
    name = "warpcurv",
    version,
    about = "Builds doubly warped collar metrics and audits their curvature for negativity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the piecewise warp profile and report breakpoints and
    /// smoothing windows
    BuildProfile(BuildProfileArgs),
    /// Audit the profile: pointwise certificates plus a randomized
    /// plane search over a radial grid
    Audit(AuditArgs),
    /// Evaluate the background metric's curvature constants over a
    /// radius sweep
    CheckModel(CheckModelArgs),
    /// Solve for the structure constants of the orthonormal frame
    /// bracket on the background metric
    SolveAlpha(SolveAlphaArgs),
    /// Compare the closed interpolation-region curvature forms with the
    /// general formulas
    Region6Check(Region6Args),
    /// Probe curvature and derivative growth deep in the cusp tail
    TailProbe(TailArgs),
    /// Export warp-function and curvature tables as CSV
    ExportCsv(ExportArgs),
}

/// Flags shared by every profile-building subcommand.
#[derive(Args, Debug, Default)]
struct ProfileFlags {
    /// Angular scale of the collar metric, in (0, 0.05)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Steepness of the warp interpolation cubic, at least 2
    #[arg(long)]
    k: Option<f64>,
    /// Half-width of the corner smoothing windows
    #[arg(long)]
    smoothing_delta: Option<f64>,
    /// Close the collar with the finite-volume cusp tail
    #[arg(long)]
    with_tail: bool,
    /// JSON config file; explicit flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Flags shared by the grid-scanning subcommands.
#[derive(Args, Debug, Default)]
struct ScanFlags {
    /// Far end of the audited radial interval
    #[arg(long)]
    r_max: Option<f64>,
    /// Deep end of the audited radial interval
    #[arg(long)]
    scan_min: Option<f64>,
    /// Number of radial grid points, at least 100
    #[arg(long)]
    grid_points: Option<usize>,
    /// Tangent planes sampled per grid point, at least 1000
    #[arg(long)]
    plane_samples: Option<usize>,
    /// Local refinement steps after plane sampling
    #[arg(long)]
    refine_steps: Option<usize>,
    /// Seed of the plane-search RNG
    #[arg(long)]
    seed: Option<u64>,
    /// Directory that receives CSV artifacts
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildProfileArgs {
    #[command(flatten)]
    profile: ProfileFlags,
    #[command(flatten)]
    scan: ScanFlags,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[command(flatten)]
    profile: ProfileFlags,
    #[command(flatten)]
    scan: ScanFlags,
}

#[derive(Args, Debug)]
struct CheckModelArgs {
    /// Number of sweep radii
    #[arg(long, default_value_t = 64)]
    radii: usize,
}

#[derive(Args, Debug)]
struct SolveAlphaArgs {
    /// Radii at which the bracket system is solved
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    r: Vec<f64>,
}

#[derive(Args, Debug)]
struct Region6Args {
    #[command(flatten)]
    profile: ProfileFlags,
    /// Number of comparison points inside the interpolation region
    #[arg(long, default_value_t = 500)]
    grid: usize,
}

#[derive(Args, Debug)]
struct TailArgs {
    #[command(flatten)]
    profile: ProfileFlags,
    #[command(flatten)]
    scan: ScanFlags,
    /// Finite-difference step of the derivative probe
    #[arg(long)]
    fd_step: Option<f64>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    profile: ProfileFlags,
    #[command(flatten)]
    scan: ScanFlags,
}

// ---------------------------------------------------------------------------
// Configuration resolution
// ---------------------------------------------------------------------------

/// Fully resolved run configuration: defaults, then config file, then flags.
#[derive(Debug, Clone)]
struct Resolved {
    epsilon: f64,
    k: f64,
    smoothing_delta: f64,
    with_tail: bool,
    r_max: Option<f64>,
    scan_min: Option<f64>,
    grid_points: usize,
    plane_samples: usize,
    refine_steps: usize,
    seed: u64,
    out_dir: Option<PathBuf>,
}

/// Errors that end the process: `exit_code` is 2 for usage/config/I/O
/// problems, 1 for failed checks reported through `Err` paths.
struct CliError {
    message: String,
    exit_code: u8,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            exit_code: 2,
        }
    }

    fn io(context: &str, err: impl std::fmt::Display) -> Self {
        CliError {
            message: format!("{context}: {err}"),
            exit_code: 2,
        }
    }
}

fn json_f64(value: &Value, key: &str) -> Option<f64> {
    value.get(key).and_then(Value::as_f64)
}

fn json_u64(value: &Value, key: &str) -> Option<u64> {
    value.get(key).and_then(Value::as_u64)
}

fn resolve(
    profile: &ProfileFlags,
    scan: &ScanFlags,
    default_epsilon: f64,
) -> Result<Resolved, CliError> {
    let file: Value = match &profile.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::io(&format!("reading {}", path.display()), e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::io(&format!("parsing {}", path.display()), e))?
        }
        None => Value::Null,
    };

    let resolved = Resolved {
        epsilon: profile
            .epsilon
            .or_else(|| json_f64(&file, "epsilon"))
            .unwrap_or(default_epsilon),
        k: profile.k.or_else(|| json_f64(&file, "k")).unwrap_or(40.0),
        smoothing_delta: profile
            .smoothing_delta
            .or_else(|| json_f64(&file, "smoothing_delta"))
            .unwrap_or(0.05),
        with_tail: profile.with_tail
            || file.get("with_tail").and_then(Value::as_bool).unwrap_or(false),
        r_max: scan.r_max.or_else(|| json_f64(&file, "r_max")),
        scan_min: scan.scan_min.or_else(|| json_f64(&file, "scan_min")),
        grid_points: scan
            .grid_points
            .or_else(|| json_u64(&file, "grid_points").map(|n| n as usize))
            .unwrap_or(2000),
        plane_samples: scan
            .plane_samples
            .or_else(|| json_u64(&file, "plane_samples").map(|n| n as usize))
            .unwrap_or(10_000),
        refine_steps: scan
            .refine_steps
            .or_else(|| json_u64(&file, "refine_steps").map(|n| n as usize))
            .unwrap_or(50),
        seed: scan.seed.or_else(|| json_u64(&file, "seed")).unwrap_or(42),
        out_dir: scan.out_dir.clone().or_else(|| {
            file.get("out_dir")
                .and_then(Value::as_str)
                .map(PathBuf::from)
        }),
    };

    if !(resolved.epsilon > 0.0 && resolved.epsilon < 0.05) {
        return Err(CliError::config(format!(
            "epsilon must lie in (0, 0.05), got {}",
            resolved.epsilon
        )));
    }
    if resolved.k < 2.0 {
        return Err(CliError::config(format!(
            "k must be at least 2, got {}",
            resolved.k
        )));
    }
    if resolved.grid_points < 100 {
        return Err(CliError::config(format!(
            "grid_points must be at least 100, got {}",
            resolved.grid_points
        )));
    }
    if resolved.plane_samples < 1000 {
        return Err(CliError::config(format!(
            "plane_samples must be at least 1000, got {}",
            resolved.plane_samples
        )));
    }
    Ok(resolved)
}

impl Resolved {
    fn profile_config(&self) -> ProfileConfig {
        ProfileConfig {
            epsilon: self.epsilon,
            k: self.k,
            smoothing_delta: self.smoothing_delta,
            with_tail: self.with_tail,
        }
    }

    fn audit_options(&self) -> AuditOptions {
        AuditOptions {
            grid_points: self.grid_points,
            plane_samples: self.plane_samples,
            refine_steps: self.refine_steps,
            seed: self.seed,
            scan_min: self.scan_min,
            scan_max: self.r_max,
        }
    }

    fn build(&self) -> Result<WarpProfile, CliError> {
        build_profile(&self.profile_config()).map_err(|e| CliError::config(e.to_string()))
    }

    fn as_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("epsilon".into(), num(self.epsilon));
        m.insert("k".into(), num(self.k));
        m.insert("smoothing_delta".into(), num(self.smoothing_delta));
        m.insert("with_tail".into(), Value::Bool(self.with_tail));
        m.insert("grid_points".into(), Value::from(self.grid_points));
        m.insert("plane_samples".into(), Value::from(self.plane_samples));
        m.insert("refine_steps".into(), Value::from(self.refine_steps));
        m.insert("seed".into(), Value::from(self.seed));
        Value::Object(m)
    }
}

// ---------------------------------------------------------------------------
// JSON and CSV helpers
// ---------------------------------------------------------------------------

/// JSON has no literal for non-finite floats; fall back to a string so
/// the summary never silently drops a NaN that a check should surface.
fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(format!("{x}")),
    }
}

fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(summary: &Value) {
    // Maps are ordered by key, so identical configurations reproduce
    // byte-identical summaries. Write errors (a closed pipe when piped
    // into `head`) are deliberately ignored.
    use std::io::Write;
    let text = serde_json::to_string_pretty(summary).expect("json");
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn schedule_json(profile: &WarpProfile) -> Value {
    let s = &profile.schedule;
    let mut m = Map::new();
    m.insert("a".into(), num(s.a));
    m.insert("m".into(), num(s.m));
    m.insert("b".into(), num(s.b));
    m.insert("c".into(), num(s.c));
    m.insert("d".into(), num(s.d));
    m.insert("e".into(), num(s.e));
    m.insert("f".into(), num(s.f));
    m.insert("r_eps".into(), num(s.r_eps));
    if let Some(ln_tau) = s.ln_tau {
        m.insert("ln_tau".into(), num(ln_tau));
    }
    Value::Object(m)
}

fn report_json(resolved: &Resolved, profile: &WarpProfile, report: &AuditReport) -> Value {
    let mut regions = Vec::new();
    for stats in &report.per_region {
        let mut m = Map::new();
        m.insert("region".into(), Value::from(stats.region));
        m.insert("points".into(), Value::from(stats.points));
        m.insert("certified".into(), Value::from(stats.certified));
        m.insert("with_slack".into(), Value::from(stats.with_slack));
        m.insert("scan_only".into(), Value::from(stats.scan_only));
        m.insert("sup_k_max".into(), num(stats.sup_k_max));
        regions.push(Value::Object(m));
    }

    let mut slack = Vec::new();
    for &i in &report.slack_rows() {
        let row = &report.rows[i];
        let mut m = Map::new();
        m.insert("r".into(), num(row.r));
        m.insert("region".into(), Value::from(row.region));
        m.insert(
            "failing".into(),
            Value::from(row.certificate.failing.unwrap_or("")),
        );
        m.insert("deficit".into(), num(row.certificate.deficit));
        m.insert("budget".into(), num(row.certificate.budget));
        slack.push(Value::Object(m));
    }

    let scan_only: Vec<&warpcurv::AuditRow> = report
        .rows
        .iter()
        .filter(|row| !row.certificate.is_negative_certified())
        .collect();
    let mut scan_summary = Map::new();
    scan_summary.insert("count".into(), Value::from(scan_only.len()));
    if let (Some(first), Some(last)) = (scan_only.first(), scan_only.last()) {
        scan_summary.insert("min_radius".into(), num(first.r));
        scan_summary.insert("max_radius".into(), num(last.r));
    }

    let mut m = Map::new();
    m.insert("config".into(), resolved.as_json());
    m.insert("schedule".into(), schedule_json(profile));
    m.insert("scan_min".into(), num(report.scan_min));
    m.insert("scan_max".into(), num(report.scan_max));
    m.insert("points".into(), Value::from(report.rows.len()));
    m.insert("sup_k_max".into(), num(report.sup_k_max));
    m.insert("sup_k_max_radius".into(), num(report.sup_k_max_radius));
    m.insert(
        "all_points_certified".into(),
        Value::Bool(report.all_points_certified),
    );
    m.insert("negative_everywhere".into(), Value::Bool(report.sup_k_max < 0.0));
    m.insert("regions".into(), Value::Array(regions));
    m.insert("slack_points".into(), Value::Array(slack));
    m.insert("scan_only".into(), Value::Object(scan_summary));
    Value::Object(m)
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("creating {}", dir.display()), e))?;
    let path = dir.join(name);
    csv::Writer::from_path(&path)
        .map_err(|e| CliError::io(&format!("opening {}", path.display()), e))
}

/// Warp-function table: radius, region and the three warps, both as
/// values (which can under- or overflow deep in the collar) and as
/// logarithms (which never do).
fn write_warp_csv(
    dir: &Path,
    profile: &WarpProfile,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<(), CliError> {
    let mut w = csv_writer(dir, "warp-functions.csv")?;
    w.write_record([
        "r",
        "region_id",
        "v",
        "h_theta",
        "h_r",
        "ln_v",
        "ln_h_theta",
        "ln_h_r",
    ])
    .map_err(|e| CliError::io("writing warp-functions.csv", e))?;
    let n = points.max(2);
    for i in 0..n {
        let r = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let s = profile.log_state(r);
        let record = [
            cell(r),
            profile.region_id(r).to_string(),
            cell(s.ln_v.exp()),
            cell(s.ln_h_theta.exp()),
            cell(s.ln_h_r.exp()),
            cell(s.ln_v),
            cell(s.ln_h_theta),
            cell(s.ln_h_r),
        ];
        w.write_record(&record)
            .map_err(|e| CliError::io("writing warp-functions.csv", e))?;
    }
    w.flush()
        .map_err(|e| CliError::io("flushing warp-functions.csv", e))
}

/// Curvature table for plotting: radius, region, the nine components
/// and the plane-search extremes.
fn write_curvature_csv(dir: &Path, report: &AuditReport) -> Result<(), CliError> {
    let mut w = csv_writer(dir, "curvature.csv")?;
    let mut header = vec!["r".to_string(), "region_id".to_string()];
    header.extend(
        warpcurv::CurvatureComponents::NAMES
            .iter()
            .map(|s| s.to_string()),
    );
    header.push("k_min".into());
    header.push("k_max".into());
    w.write_record(&header)
        .map_err(|e| CliError::io("writing curvature.csv", e))?;
    for row in &report.rows {
        let mut record = vec![cell(row.r), row.region.to_string()];
        record.extend(row.components.as_array().iter().map(|&x| cell(x)));
        record.push(cell(row.k_min));
        record.push(cell(row.k_max));
        w.write_record(&record)
            .map_err(|e| CliError::io("writing curvature.csv", e))?;
    }
    w.flush()
        .map_err(|e| CliError::io("flushing curvature.csv", e))
}

/// Full per-point audit table: components, certificate margins and the
/// certificate outcome.
fn write_audit_csv(dir: &Path, report: &AuditReport) -> Result<(), CliError> {
    let mut w = csv_writer(dir, "audit-points.csv")?;
    let mut header = vec!["r".to_string(), "region_id".to_string()];
    header.extend(
        warpcurv::CurvatureComponents::NAMES
            .iter()
            .map(|s| s.to_string()),
    );
    header.extend(
        warpcurv::InequalityMargins::NAMES
            .iter()
            .map(|s| format!("m_{s}")),
    );
    header.extend(
        ["k_min", "k_max", "status", "route", "failing", "deficit"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header)
        .map_err(|e| CliError::io("writing audit-points.csv", e))?;
    for row in &report.rows {
        let mut record = vec![cell(row.r), row.region.to_string()];
        record.extend(row.components.as_array().iter().map(|&x| cell(x)));
        record.extend(row.margins.as_array().iter().map(|&x| cell(x)));
        record.push(cell(row.k_min));
        record.push(cell(row.k_max));
        record.push(row.certificate.status.name().to_string());
        record.push(
            row.certificate
                .route
                .map(|r| r.name())
                .unwrap_or("")
                .to_string(),
        );
        record.push(row.certificate.failing.unwrap_or("").to_string());
        record.push(cell(row.certificate.deficit));
        w.write_record(&record)
            .map_err(|e| CliError::io("writing audit-points.csv", e))?;
    }
    w.flush()
        .map_err(|e| CliError::io("flushing audit-points.csv", e))
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_check_model(args: &CheckModelArgs) -> Result<ExitCode, CliError> {
    let reference = model_components();
    let n = args.radii.max(2);
    let (lo, hi) = (0.05f64, 6.0f64);
    let mut max_dev = 0.0f64;
    let mut worst_r = lo;
    for i in 0..n {
        let r = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let state = model_state(r).map_err(|e| CliError::config(e.to_string()))?;
        let dev = curvature_components(&state)
            .map_err(|e| CliError::config(e.to_string()))?
            .max_abs_diff(&reference);
        if dev > max_dev {
            max_dev = dev;
            worst_r = r;
        }
    }

    let mut constants = Map::new();
    for (name, value) in warpcurv::CurvatureComponents::NAMES
        .iter()
        .zip(reference.as_array())
    {
        constants.insert((*name).into(), num(value));
    }
    let pass = max_dev < 1e-10;
    let mut m = Map::new();
    m.insert("constants".into(), Value::Object(constants));
    m.insert("radii".into(), Value::from(n));
    m.insert("max_deviation".into(), num(max_dev));
    m.insert("worst_radius".into(), num(worst_r));
    m.insert("pass".into(), Value::Bool(pass));
    emit(&Value::Object(m));
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_solve_alpha(args: &SolveAlphaArgs) -> Result<ExitCode, CliError> {
    if args.r.is_empty() {
        return Err(CliError::config("at least one radius is required"));
    }
    let expected = [0.5, 0.5, -0.5];
    let mut rows = Vec::new();
    let mut pass = true;
    for &r in &args.r {
        let sol = solve_alpha(r).map_err(|e| CliError::config(e.to_string()))?;
        let dev = [
            (sol.alpha1 - expected[0]).abs(),
            (sol.alpha2 - expected[1]).abs(),
            (sol.alpha3 - expected[2]).abs(),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        pass &= dev < 1e-10 && sol.condition_number < 1e6;
        let mut m = Map::new();
        m.insert("r".into(), num(r));
        m.insert("alpha1".into(), num(sol.alpha1));
        m.insert("alpha2".into(), num(sol.alpha2));
        m.insert("alpha3".into(), num(sol.alpha3));
        m.insert("condition_number".into(), num(sol.condition_number));
        m.insert("deviation".into(), num(dev));
        rows.push(Value::Object(m));
    }
    let mut m = Map::new();
    m.insert(
        "expected".into(),
        Value::Array(expected.iter().map(|&x| num(x)).collect()),
    );
    m.insert("solutions".into(), Value::Array(rows));
    m.insert("pass".into(), Value::Bool(pass));
    emit(&Value::Object(m));
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_build_profile(args: &BuildProfileArgs) -> Result<ExitCode, CliError> {
    let resolved = resolve(&args.profile, &args.scan, 0.01)?;
    let profile = resolved.build()?;
    let (lo, hi) = default_scan_bounds(&profile);
    let lo = resolved.scan_min.unwrap_or(lo);
    let hi = resolved.r_max.unwrap_or(hi);

    let windows: Vec<Value> = profile
        .smoothing_windows()
        .iter()
        .map(|&(a, b)| Value::Array(vec![num(a), num(b)]))
        .collect();

    let mut m = Map::new();
    m.insert("config".into(), resolved.as_json());
    m.insert("schedule".into(), schedule_json(&profile));
    m.insert("smoothing_windows".into(), Value::Array(windows));
    m.insert(
        "scan_bounds".into(),
        Value::Array(vec![num(lo), num(hi)]),
    );
    emit(&Value::Object(m));

    if let Some(dir) = &resolved.out_dir {
        write_warp_csv(dir, &profile, lo, hi, resolved.grid_points)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit(args: &AuditArgs) -> Result<ExitCode, CliError> {
    let resolved = resolve(&args.profile, &args.scan, 0.01)?;
    let profile = resolved.build()?;
    let report = audit_profile(&profile, &resolved.audit_options())
        .map_err(|e| CliError::config(e.to_string()))?;

    emit(&report_json(&resolved, &profile, &report));

    if let Some(dir) = &resolved.out_dir {
        write_audit_csv(dir, &report)?;
    }
    Ok(if report.sup_k_max < 0.0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_region6(args: &Region6Args) -> Result<ExitCode, CliError> {
    let resolved = resolve(&args.profile, &ScanFlags::default(), 0.01)?;
    let profile = resolved.build()?;
    let (e, f) = (profile.schedule.e, profile.schedule.f);
    let n = args.grid.max(2);

    // Compare on the raw pieces: the closed forms describe the
    // interpolation cubic itself, not its smoothed corners.
    let mut max_dev = 0.0f64;
    let mut worst_r = e;
    for i in 0..n {
        let r = e + (f - e) * (i as f64 + 0.5) / n as f64;
        let ls = profile.log_state_raw(r);
        let phi = ls.ln_h_r.exp();
        let closed = region6_components(r, phi, phi * ls.l_r, phi * ls.q_r);
        let general = curvature_components_log(&ls);
        let dev = closed.max_abs_diff(&general);
        if dev > max_dev {
            max_dev = dev;
            worst_r = r;
        }
    }

    // With the model warp in place of the cubic the closed forms must
    // reproduce the background constants.
    let reference = model_components();
    let mut model_dev = 0.0f64;
    for i in 0..n {
        let r = e + (f - e) * (i as f64 + 0.5) / n as f64;
        let closed = region6_components(r, r.cosh(), r.sinh(), r.cosh());
        model_dev = model_dev.max(closed.max_abs_diff(&reference));
    }

    let vertex = region6_reduced_vertex(resolved.k);
    let pass = max_dev < 1e-9 && model_dev < 1e-10;
    let mut m = Map::new();
    m.insert("interval".into(), Value::Array(vec![num(e), num(f)]));
    m.insert("grid".into(), Value::from(n));
    m.insert("max_deviation".into(), num(max_dev));
    m.insert("worst_radius".into(), num(worst_r));
    m.insert("model_deviation".into(), num(model_dev));
    m.insert("alpha_star".into(), num(vertex.alpha_star));
    m.insert("p_min".into(), num(vertex.p_min));
    m.insert("pass".into(), Value::Bool(pass));
    emit(&Value::Object(m));
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_tail(args: &TailArgs) -> Result<ExitCode, CliError> {
    // The tail needs a moderately large epsilon to have room for its
    // stabilizing section, so this subcommand defaults to 0.045 instead
    // of the audit default 0.01.
    let mut resolved = resolve(&args.profile, &args.scan, 0.045)?;
    resolved.with_tail = true;
    let profile = resolved.build()?;
    let opts = TailProbeOptions {
        grid_points: resolved.grid_points.min(1000),
        fd_step: args.fd_step.unwrap_or(1e-3),
        plane_samples: resolved.plane_samples.min(2000),
        refine_steps: resolved.refine_steps,
        seed: resolved.seed,
    };
    let probe =
        aregularity_probe(&profile, &opts).map_err(|e| CliError::config(e.to_string()))?;

    let pass = probe.k_max < 0.0 && probe.all_finite;
    let mut m = Map::new();
    m.insert("config".into(), resolved.as_json());
    m.insert("floor_deep".into(), num(probe.floor_deep));
    m.insert("floor_shallow".into(), num(probe.floor_shallow));
    m.insert("top".into(), num(probe.top));
    m.insert("k_max".into(), num(probe.k_max));
    m.insert("k_max_radius".into(), num(probe.k_max_radius));
    m.insert(
        "sup_derivative".into(),
        Value::Array(probe.sup_derivative.iter().map(|&x| num(x)).collect()),
    );
    m.insert(
        "sup_derivative_shallow".into(),
        Value::Array(
            probe
                .sup_derivative_shallow
                .iter()
                .map(|&x| num(x))
                .collect(),
        ),
    );
    m.insert(
        "derivative_growth".into(),
        Value::Array(probe.growth.iter().map(|&x| num(x)).collect()),
    );
    m.insert("all_finite".into(), Value::Bool(probe.all_finite));
    m.insert("pass".into(), Value::Bool(pass));
    emit(&Value::Object(m));
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_export(args: &ExportArgs) -> Result<ExitCode, CliError> {
    let resolved = resolve(&args.profile, &args.scan, 0.01)?;
    let dir = resolved
        .out_dir
        .clone()
        .ok_or_else(|| CliError::config("export-csv requires --out-dir"))?;
    let profile = resolved.build()?;
    let report = audit_profile(&profile, &resolved.audit_options())
        .map_err(|e| CliError::config(e.to_string()))?;

    write_warp_csv(&dir, &profile, report.scan_min, report.scan_max, resolved.grid_points)?;
    write_curvature_csv(&dir, &report)?;

    let mut m = Map::new();
    m.insert("out_dir".into(), Value::String(dir.display().to_string()));
    m.insert(
        "files".into(),
        Value::Array(vec![
            Value::String("warp-functions.csv".into()),
            Value::String("curvature.csv".into()),
        ]),
    );
    m.insert("rows".into(), Value::from(report.rows.len()));
    emit(&Value::Object(m));
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------

fn configure_threads() -> Result<(), CliError> {
    match std::env::var("WARPCURV_THREADS") {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| {
                    CliError::config(format!(
                        "WARPCURV_THREADS must be a positive integer, got {s:?}"
                    ))
                })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::config(format!("thread pool: {e}")))
        }
        Err(_) => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::BuildProfile(args) => cmd_build_profile(args),
        Command::Audit(args) => cmd_audit(args),
        Command::CheckModel(args) => cmd_check_model(args),
        Command::SolveAlpha(args) => cmd_solve_alpha(args),
        Command::Region6Check(args) => cmd_region6(args),
        Command::TailProbe(args) => cmd_tail(args),
        Command::ExportCsv(args) => cmd_export(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Clap exits 2 on usage errors and 0 on --help/--version.
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit_code)
        }
    }
}
