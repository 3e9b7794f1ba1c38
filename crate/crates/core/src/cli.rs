//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a numerical check fails, 2 on a usage error.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::functionals::{
    octagon_area_branch, octagon_area_oracle, octagon_coefficients, octagon_perimeter, pair_from_angles,
    BRANCH_ANCHORS,
};
use crate::geometry::{build_frame, project_vertices_3d, sample_stream, sample_unit_vector};
use crate::hull::{convex_hull_3d, to_off};
use crate::moments::{
    closed_form_table, joint_moment_table, verify_octagon_report, verify_report, REPORT_VERSION,
};
use crate::quad::{
    moment_integral_suite, pi_over_128_suite, zeta3_hypergeometric, zeta3_quadrature, zeta4_quadrature,
    zeta5_reduction_check,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Published value of ζ₄.
const ZETA4_REFERENCE: f64 = 7.118558716719735;

#[derive(Debug, Parser)]
#[command(name = "cube-shadows", version, about = "Moments and constants of 4-cube shadows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Cube dimension.
    #[arg(long, global = true, default_value_t = 4)]
    pub n: usize,
    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Absolute tolerance for quadrature checks.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive_f64)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form moment, joint-moment and extreme-value tables.
    Moments,
    /// Monte Carlo against the closed forms, with hull cross-checks.
    Verify {
        /// Rank-2 octagon statistics instead of corank-1 shadows.
        #[arg(long)]
        octagon: bool,
    },
    /// Quadrature reproduction of the analytic constants.
    Constants {
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
    },
    /// The six local octagon-area formulas at their anchors.
    Octagon,
    /// One sampled shadow as OFF text.
    HullDump {
        /// Sample index within the seeded stream.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Zeta3,
    Zeta4,
    Zeta5,
    Pi128,
    Moments,
    All,
}

/// A finished command: the rendered report and its exit status.
pub struct Outcome {
    pub output: String,
    pub status: i32,
}

impl Outcome {
    fn usage(message: impl Into<String>) -> Self {
        Outcome { output: message.into(), status: EXIT_USAGE }
    }
}

/// Parses `args` (program name first), runs the command and writes its report.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return status;
        }
    };
    let outcome = match cli.config.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t as usize).build() {
            Ok(pool) => pool.install(|| execute(&cli.command, &cli.config)),
            Err(e) => Outcome::usage(format!("cannot start {t} threads: {e}")),
        },
        None => execute(&cli.command, &cli.config),
    };
    if outcome.status == EXIT_USAGE {
        let _ = writeln!(stderr, "error: {}", outcome.output);
        return EXIT_USAGE;
    }
    let written = match &cli.config.out {
        Some(path) => std::fs::write(path, &outcome.output).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(outcome.output.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    outcome.status
}

pub fn execute(command: &Command, config: &RunConfig) -> Outcome {
    match command {
        Command::Moments => cmd_moments(config),
        Command::Verify { octagon } => cmd_verify(config, *octagon),
        Command::Constants { which } => cmd_constants(config, *which),
        Command::Octagon => cmd_octagon(config),
        Command::HullDump { index } => cmd_hull_dump(config, *index),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// name/value pairs rendered as CSV or aligned text.
fn key_values(rows: &[(String, f64)], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "value"]).expect("in memory");
            for (k, v) in rows {
                w.write_record([k.clone(), format!("{v:.17e}")]).expect("in memory");
            }
            String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
        }
        _ => rows.iter().fold(String::new(), |mut s, (k, v)| {
            writeln!(s, "{k:<12} {v:.15}").unwrap();
            s
        }),
    }
}

pub fn cmd_moments(config: &RunConfig) -> Outcome {
    let table = match closed_form_table(config.n) {
        Ok(t) => t,
        Err(e) => return Outcome::usage(e.to_string()),
    };
    let joint = (config.n == 4).then(joint_moment_table);
    let output = match config.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                spec_version: &'static str,
                n: usize,
                table: &'a crate::moments::MomentTable,
                joint: Option<crate::moments::JointMoments>,
            }
            json(&Doc { spec_version: REPORT_VERSION, n: config.n, table: &table, joint })
        }
        format => {
            let ex = table.extremes;
            let mut rows = vec![
                ("E(vl)".to_string(), table.e_vl),
                ("E(vl^2)".into(), table.e_vl2),
                ("E(ar)".into(), table.e_ar),
                ("E(ar^2)".into(), table.e_ar2),
                ("E(mw)".into(), table.e_mw),
            ];
            if let Some(m) = table.e_mw2 {
                rows.push(("E(mw^2)".into(), m));
            }
            rows.push(("zeta".into(), table.zeta_used));
            if let Some(j) = joint {
                rows.extend([
                    ("E(vl*ar)".into(), j.e_vl_ar),
                    ("E(vl*mw)".into(), j.e_vl_mw),
                    ("E(ar*mw)".into(), j.e_ar_mw),
                    ("corr(vl,ar)".into(), j.corr_vl_ar),
                    ("corr(vl,mw)".into(), j.corr_vl_mw),
                    ("corr(ar,mw)".into(), j.corr_ar_mw),
                ]);
            }
            rows.extend([
                ("min(vl)".into(), ex.vl.min),
                ("max(vl)".into(), ex.vl.max),
                ("min(ar)".into(), ex.ar.min),
                ("max(ar)".into(), ex.ar.max),
                ("min(mw)".into(), ex.mw.min),
                ("max(mw)".into(), ex.mw.max),
            ]);
            let body = key_values(&rows, format);
            if format == Format::Text {
                format!("n = {}\n{body}", config.n)
            } else {
                body
            }
        }
    };
    Outcome { output, status: EXIT_OK }
}

pub fn cmd_verify(config: &RunConfig, octagon: bool) -> Outcome {
    let report = if octagon {
        verify_octagon_report(config.samples, config.seed)
    } else {
        verify_report(config.n, config.samples, config.seed)
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => return Outcome::usage(e.to_string()),
    };
    let mut output = match config.format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    if !report.pass && config.format == Format::Text {
        for r in report.failing_rows() {
            writeln!(output, "failed: {} (z = {:.3})", r.name, r.z).unwrap();
        }
    }
    Outcome { output, status: if report.pass { EXIT_OK } else { EXIT_NUMERIC } }
}

/// One reproduced constant.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantRow {
    pub name: String,
    pub target: f64,
    pub computed: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConstantRow {
    fn new(name: impl Into<String>, target: f64, computed: f64, tolerance: f64) -> Self {
        let discrepancy = (computed - target).abs();
        ConstantRow { name: name.into(), target, computed, discrepancy, tolerance, pass: discrepancy <= tolerance }
    }
}

fn constant_rows(which: Which, tol: f64) -> Result<Vec<ConstantRow>, String> {
    let e = |err: crate::quad::QuadError| err.to_string();
    let all = which == Which::All;
    let mut rows = Vec::new();
    if all || which == Which::Zeta4 {
        rows.push(ConstantRow::new("zeta4", ZETA4_REFERENCE, zeta4_quadrature().map_err(e)?.value, tol));
    }
    if all || which == Which::Zeta3 {
        let quad = zeta3_quadrature().map_err(e)?.value;
        let hyp = zeta3_hypergeometric();
        rows.push(ConstantRow::new("zeta3 (3F2)", ZETA4_REFERENCE, hyp, tol));
        rows.push(ConstantRow::new("zeta3 (integral)", hyp, quad, tol));
    }
    if all || which == Which::Zeta5 {
        let check = zeta5_reduction_check().map_err(e)?;
        rows.push(ConstantRow::new("zeta5 = zeta4", check.zeta4.value, check.zeta5.value, tol));
    }
    if all || which == Which::Pi128 {
        let s = pi_over_128_suite().map_err(e)?;
        let [first, second, third] = s.scaled_components();
        rows.push(ConstantRow::new("pi/96", PI / 96.0, first, tol));
        rows.push(ConstantRow::new("pi/128 (middle)", PI / 128.0, second, tol));
        rows.push(ConstantRow::new("pi/192", PI / 192.0, third, tol));
        rows.push(ConstantRow::new("pi/128", PI / 128.0, s.combination, tol));
    }
    if all || which == Which::Moments {
        for entry in moment_integral_suite().map_err(e)? {
            rows.push(ConstantRow::new(
                entry.name,
                entry.closed_form,
                entry.numeric.value,
                tol.max(entry.tolerance),
            ));
        }
    }
    Ok(rows)
}

pub fn cmd_constants(config: &RunConfig, which: Which) -> Outcome {
    let rows = match constant_rows(which, config.tol) {
        Ok(r) => r,
        Err(msg) => return Outcome { output: format!("quadrature failed: {msg}\n"), status: EXIT_NUMERIC },
    };
    let pass = rows.iter().all(|r| r.pass);
    let output = match config.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                spec_version: &'static str,
                rows: &'a [ConstantRow],
                pass: bool,
            }
            json(&Doc { spec_version: REPORT_VERSION, rows: &rows, pass })
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "target", "computed", "discrepancy", "tolerance", "pass"]).expect("in memory");
            for r in &rows {
                w.write_record([
                    r.name.clone(),
                    format!("{:.17e}", r.target),
                    format!("{:.17e}", r.computed),
                    format!("{:.3e}", r.discrepancy),
                    format!("{:.1e}", r.tolerance),
                    r.pass.to_string(),
                ])
                .expect("in memory");
            }
            String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
        }
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                writeln!(
                    s,
                    "{:<20} target {:>20.15} computed {:>20.15} |diff| {:.2e}  {}",
                    r.name,
                    r.target,
                    r.computed,
                    r.discrepancy,
                    if r.pass { "PASS" } else { "FAIL" }
                )
                .unwrap();
            }
            s
        }
    };
    Outcome { output, status: if pass { EXIT_OK } else { EXIT_NUMERIC } }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnchorRow {
    pub branch: usize,
    pub angles: [f64; 5],
    pub branch_area: f64,
    pub hull_area: f64,
    pub perimeter: f64,
    pub pass: bool,
}

pub fn cmd_octagon(config: &RunConfig) -> Outcome {
    let mut rows = Vec::new();
    for (i, &angles) in BRANCH_ANCHORS.iter().enumerate() {
        let (u, v) = pair_from_angles(angles);
        let computed = octagon_coefficients(&u, &v)
            .and_then(|k| octagon_area_branch(i + 1, &k))
            .and_then(|a| Ok((a, octagon_area_oracle(&u, &v)?, octagon_perimeter(&u, &v)?)));
        match computed {
            Ok((branch_area, hull_area, perimeter)) => rows.push(AnchorRow {
                branch: i + 1,
                angles,
                branch_area,
                hull_area,
                perimeter,
                pass: (branch_area - hull_area).abs() <= config.tol,
            }),
            Err(e) => return Outcome { output: format!("branch {}: {e}\n", i + 1), status: EXIT_NUMERIC },
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    let output = match config.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                spec_version: &'static str,
                rows: &'a [AnchorRow],
                pass: bool,
            }
            json(&Doc { spec_version: REPORT_VERSION, rows: &rows, pass })
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["branch", "branch_area", "hull_area", "perimeter", "pass"]).expect("in memory");
            for r in &rows {
                w.write_record([
                    r.branch.to_string(),
                    format!("{:.17e}", r.branch_area),
                    format!("{:.17e}", r.hull_area),
                    format!("{:.17e}", r.perimeter),
                    r.pass.to_string(),
                ])
                .expect("in memory");
            }
            String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8")
        }
        Format::Text => rows.iter().fold(String::new(), |mut s, r| {
            writeln!(
                s,
                "branch {} at {:?}: formula {:.15} hull {:.15} perimeter {:.15}  {}",
                r.branch,
                r.angles,
                r.branch_area,
                r.hull_area,
                r.perimeter,
                if r.pass { "PASS" } else { "FAIL" }
            )
            .unwrap();
            s
        }),
    };
    Outcome { output, status: if pass { EXIT_OK } else { EXIT_NUMERIC } }
}

pub fn cmd_hull_dump(config: &RunConfig, index: u64) -> Outcome {
    if config.n != 4 {
        return Outcome::usage(format!("hull-dump needs --n 4, got {}", config.n));
    }
    let u = sample_unit_vector(4, &mut sample_stream(config.seed, index)).expect("n = 4");
    let pts = project_vertices_3d(&build_frame(&u)).expect("n = 4");
    match convex_hull_3d(&pts) {
        Ok(mesh) => Outcome { output: to_off(&mesh), status: EXIT_OK },
        Err(e) => Outcome { output: format!("hull failed: {e}\n"), status: EXIT_NUMERIC },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["cube-shadows"];
        full.extend_from_slice(args);
        let status = run(full, &mut out, &mut err);
        (status, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn moments_tables() {
        let (s, out, _) = run_args(&["moments", "--n", "4"]);
        assert_eq!(s, EXIT_OK);
        assert!(out.contains("1.697652726313550"));
        assert!(out.contains("64.136130261087"));
        let (s, out, _) = run_args(&["moments", "--n", "3"]);
        assert_eq!(s, EXIT_OK);
        assert!(out.contains("2.253091059149751"));
        let (s, _, err) = run_args(&["moments", "--n", "2"]);
        assert_eq!(s, EXIT_USAGE);
        assert!(err.contains("n = 2"));
    }

    #[test]
    fn moments_formats() {
        let (_, out, _) = run_args(&["moments", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["spec_version"], REPORT_VERSION);
        assert!(v["joint"]["e_ar_mw"].as_f64().is_some());
        let (_, out, _) = run_args(&["moments", "--format", "csv", "--n", "6"]);
        assert!(out.starts_with("name,value\n"));
        assert!(!out.contains("E(mw^2)"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["verify", "--samples", "0"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["verify", "--samples", "10"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["constants", "--tol", "-1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["hull-dump", "--n", "5"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn verify_json_is_reproducible() {
        let args = ["verify", "--samples", "5000", "--seed", "7", "--format", "json"];
        let (s1, a, _) = run_args(&args);
        let (s2, b, _) = run_args(&[&args[..], &["--threads", "3"]].concat());
        assert_eq!((s1, s2), (EXIT_OK, EXIT_OK));
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["rows"].as_array().unwrap().len(), 9);
    }

    #[test]
    fn octagon_anchors() {
        let (s, out, _) = run_args(&["octagon"]);
        assert_eq!(s, EXIT_OK, "{out}");
        assert_eq!(out.lines().count(), 6);
    }

    #[test]
    fn hull_dump_is_off() {
        let (s, out, _) = run_args(&["hull-dump", "--seed", "3"]);
        assert_eq!(s, EXIT_OK);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(lines.next(), Some("14 12 24"));
    }

    #[test]
    fn constants_pi128() {
        let (s, out, _) = run_args(&["constants", "--which", "pi128", "--format", "csv"]);
        assert_eq!(s, EXIT_OK, "{out}");
        assert_eq!(out.lines().count(), 5);
    }
}
