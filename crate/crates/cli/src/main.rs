//! `klab`: command-line front end of the laboratory.
//!
//! Exit codes: 0 all checks pass, 1 an identity failed, 2 usage, 3 I/O.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kirchhoff_core::acs::{validate_acs, AcsResiduals, ACS_TOL};
use kirchhoff_core::algebra::AlgebraLevel;
use kirchhoff_core::config::{Format, Model, RunConfig};
use kirchhoff_core::geometry::{gram, Matrix, SpherePoint, Vector, DEFAULT_EPS_POLE, DEFAULT_H};
use kirchhoff_core::hspace::{sample_defect, DefectOp, HMultiplication};
use kirchhoff_core::kirchhoff::{classical_frame, frame_field, kirchhoff_frame, pole, sigma_tilde};
use kirchhoff_core::parallelism::constancy_scan;
use kirchhoff_core::report::{self, ConstancyJson, DefectJson, Envelope};
use kirchhoff_core::sampling::{par_sample, random_point_outside_caps};
use kirchhoff_core::verify::{verify, Bound, VerificationSummary};
use kirchhoff_core::{LabError, Result};

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "LAB_OUT_DIR";

#[derive(Parser)]
#[command(name = "klab", version, about = "Frames, almost complex structures and H-space multiplications on spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structure constants of the doubled algebras.
    #[command(subcommand)]
    Tables(TablesCmd),
    /// Almost complex structure diagnostics.
    #[command(subcommand)]
    Acs(AcsCmd),
    /// Kirchhoff frame evaluation and scans.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Structure-function scans of global frames.
    #[command(subcommand)]
    Parallelism(ParallelismCmd),
    /// Defect statistics of the induced multiplications.
    #[command(subcommand)]
    Hspace(HspaceCmd),
    /// Runs the full identity suite for one model.
    Verify {
        #[arg(long, value_parser = parse_model)]
        model: Model,
        #[command(flatten)]
        common: Common,
    },
    /// Writes every report for every model into one directory.
    Report {
        /// Output directory; defaults to $LAB_OUT_DIR, then ./lab-out.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum TablesCmd {
    /// Emits every nonzero a_ijk as [i, j, k, sign].
    Export {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        level: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AcsCmd {
    /// Max residuals of J² = −Id, tangency and hermitian compatibility.
    Check {
        #[arg(long, value_parser = parse_model)]
        model: Model,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum FrameCmd {
    /// One frame vector X_i(x); `index` is 1-based.
    Eval {
        #[arg(long, value_parser = parse_model)]
        model: Model,
        /// Comma-separated coordinates of x ∈ R^{n+2}; normalised before use.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 1)]
        rotation_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-point Gram residuals |G − Id| of the frame.
    Scan {
        #[arg(long, value_parser = parse_model)]
        model: Model,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ParallelismCmd {
    /// Constancy of the structure functions over random points.
    Scan {
        #[arg(long, value_enum)]
        frame: FrameKind,
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        level: u8,
        /// Use the rotated structure for the Kirchhoff frame (level 3 only).
        #[arg(long)]
        rotated: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum HspaceCmd {
    /// Associativity or Moufang defect over random unit triples.
    Defects {
        #[arg(long, value_parser = parse_model)]
        model: Model,
        #[arg(long, value_enum)]
        op: OpArg,
        #[arg(long, value_enum, default_value = "sphere")]
        mult: MultArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Central-difference step.
    #[arg(long, default_value_t = DEFAULT_H)]
    h: f64,
    /// Radius of the excluded caps around ±e and chart poles.
    #[arg(long, default_value_t = DEFAULT_EPS_POLE)]
    eps_pole: f64,
    /// Seed of the rotation used by the rotated model.
    #[arg(long, default_value_t = 1)]
    rotation_seed: u64,
    /// Tolerance override NAME=VALUE; repeatable.
    #[arg(long = "tol", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameKind {
    Classical,
    Kirchhoff,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Assoc,
    Moufang,
}

#[derive(Clone, Copy, ValueEnum)]
enum MultArg {
    /// m(x, y) on the unit sphere.
    Sphere,
    /// m̂(x, y) on the ambient space.
    Ambient,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn parse_model(s: &str) -> std::result::Result<Model, String> {
    s.parse::<Model>().map_err(|e| e.to_string())
}

fn parse_tolerance(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = value.parse().map_err(|e| format!("{value}: {e}"))?;
    Ok((name.to_string(), v))
}

impl Common {
    fn config(&self, model: Model, default_name: &str) -> Result<RunConfig> {
        let format = match self.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
        let config = RunConfig {
            level: model.level().get(),
            model,
            h: self.h,
            eps_pole: self.eps_pole,
            tolerance_overrides: self.tolerances.iter().cloned().collect(),
            samples: self.samples,
            seed: self.seed,
            rotation_seed: self.rotation_seed,
            out: resolve_out(self.out.clone(), default_name),
            format,
        };
        config.validate()?;
        Ok(config)
    }
}

/// `--out` when given, otherwise `$LAB_OUT_DIR/<default_name>`, otherwise stdout.
fn resolve_out(out: Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    out.or_else(|| {
        std::env::var_os(OUT_DIR_VAR)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(default_name))
    })
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

fn exit_code(err: &LabError) -> u8 {
    match err {
        LabError::Usage(_) | LabError::LevelMismatch { .. } => 2,
        LabError::Io(_) | LabError::Json(_) => 3,
        LabError::Degenerate { .. } | LabError::Validation(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("klab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Ok(false) means the command ran but an identity failed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Tables(TablesCmd::Export { level, out }) => {
            let level = AlgebraLevel::new(level)?;
            let out = resolve_out(out, &format!("tables-level{}.json", level.get()));
            report::write_output(out.as_deref(), &report::to_json(&report::tables_export(level))?)?;
            Ok(true)
        }
        Command::Acs(AcsCmd::Check { model, common }) => {
            let config = common.config(model, "acs-check.json")?;
            let (body, pass) = acs_check(&config);
            report::write_output(config.out.as_deref(), &report::to_json(&Envelope::new(&config, body))?)?;
            Ok(pass)
        }
        Command::Frame(FrameCmd::Eval {
            model,
            point,
            index,
            rotation_seed,
            out,
        }) => {
            let body = frame_eval(model, &point, index, rotation_seed)?;
            let config = RunConfig {
                rotation_seed,
                out: resolve_out(out, "frame-eval.json"),
                ..RunConfig::for_model(model)
            };
            report::write_output(config.out.as_deref(), &report::to_json(&Envelope::new(&config, body))?)?;
            Ok(true)
        }
        Command::Frame(FrameCmd::Scan { model, common }) => {
            let name = format!("frame-scan-{model}.{}", extension(common_format(&common)));
            let config = common.config(model, &name)?;
            let content = frame_scan(&config)?;
            report::write_output(config.out.as_deref(), &content)?;
            Ok(true)
        }
        Command::Parallelism(ParallelismCmd::Scan {
            frame,
            level,
            rotated,
            common,
        }) => {
            let model = match (level, rotated) {
                (2, false) => Model::Quaternion,
                (3, false) => Model::Octonion,
                (3, true) => Model::Rotated,
                _ => return Err(LabError::Usage("--rotated needs --level 3".into())),
            };
            let kind = frame_name(frame);
            let name = format!("parallelism-{kind}-{model}.{}", extension(common_format(&common)));
            let config = common.config(model, &name)?;
            let content = parallelism_scan(&config, frame)?;
            report::write_output(config.out.as_deref(), &content)?;
            Ok(true)
        }
        Command::Hspace(HspaceCmd::Defects {
            model,
            op,
            mult,
            common,
        }) => {
            let op = defect_op(op);
            let name = format!("hspace-{model}-{}.{}", op.name(), extension(common_format(&common)));
            let config = common.config(model, &name)?;
            let content = hspace_defects(&config, op, mult)?;
            report::write_output(config.out.as_deref(), &content)?;
            Ok(true)
        }
        Command::Verify { model, common } => {
            let config = common.config(model, &format!("verify-{model}.json"))?;
            let summary = verify(&config)?;
            print!("{}", verify_table(&summary));
            if let Some(path) = &config.out {
                report::write_output(Some(path), &report::to_json(&Envelope::new(&config, &summary))?)?;
            }
            Ok(summary.pass)
        }
        Command::Report { dir, common } => {
            let dir = dir
                .or_else(|| std::env::var_os(OUT_DIR_VAR).filter(|d| !d.is_empty()).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("lab-out"));
            write_report(&dir, &common)
        }
    }
}

fn common_format(common: &Common) -> Format {
    match common.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    }
}

fn frame_name(frame: FrameKind) -> &'static str {
    match frame {
        FrameKind::Classical => "classical",
        FrameKind::Kirchhoff => "kirchhoff",
    }
}

fn defect_op(op: OpArg) -> DefectOp {
    match op {
        OpArg::Assoc => DefectOp::Assoc,
        OpArg::Moufang => DefectOp::Moufang,
    }
}

#[derive(Serialize)]
struct AcsCheck {
    model: Model,
    structure: String,
    samples: usize,
    tolerance: f64,
    residuals: AcsResiduals,
    hermitian: bool,
    pass: bool,
}

/// Hermitian compatibility is reported but does not decide `pass`.
fn acs_check(config: &RunConfig) -> (AcsCheck, bool) {
    let acs = config.acs();
    let residuals = validate_acs(acs.as_ref(), config.samples, config.seed);
    let pass = residuals.square <= ACS_TOL && residuals.tangency <= ACS_TOL;
    let body = AcsCheck {
        model: config.model,
        structure: acs.label(),
        samples: config.samples,
        tolerance: ACS_TOL,
        residuals,
        hermitian: residuals.hermitian <= ACS_TOL,
        pass,
    };
    (body, pass)
}

#[derive(Serialize)]
struct FrameEval {
    model: Model,
    point: Vec<f64>,
    index: usize,
    alpha: f64,
    beta: f64,
    fallback: bool,
    vector: Vec<f64>,
}

fn frame_eval(model: Model, point: &str, index: usize, rotation_seed: u64) -> Result<FrameEval> {
    let coords: Vec<f64> = point
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| LabError::Usage(format!("bad coordinate '{c}': {e}")))
        })
        .collect::<Result<_>>()?;
    let dim = model.level().dim();
    if coords.len() != dim {
        return Err(LabError::Usage(format!(
            "{model} frame lives on S^{} in R^{dim}, got {} coordinates",
            dim - 1,
            coords.len()
        )));
    }
    if index == 0 || index > dim - 1 {
        return Err(LabError::Usage(format!("--index must lie in 1..={}", dim - 1)));
    }
    let acs = model.acs(rotation_seed);
    let x = SpherePoint::from_slice(&coords)?;
    let frame = sigma_tilde(acs.as_ref(), x.as_vector())?;
    let v = frame_field(acs.as_ref(), index - 1, &x)?;
    Ok(FrameEval {
        model,
        point: x.as_vector().as_slice().to_vec(),
        index,
        alpha: frame.alpha,
        beta: frame.beta,
        fallback: frame.fallback,
        vector: v.v.as_slice().to_vec(),
    })
}

#[derive(Serialize)]
struct ScanRow {
    point: Vec<f64>,
    gram_residual: f64,
}

#[derive(Serialize)]
struct FrameScan<'a> {
    eps_pole: f64,
    max_gram_residual: f64,
    rows: &'a [ScanRow],
}

fn frame_scan(config: &RunConfig) -> Result<String> {
    let acs = config.acs();
    let dim = acs.ambient_dim() + 1;
    let e = pole(dim);
    let frame = kirchhoff_frame(&acs);
    let rows: Vec<ScanRow> = par_sample(config.samples, config.seed, |rng, _| {
        let p = random_point_outside_caps(rng, &e, config.eps_pole);
        let cols: Vec<Vector> = frame.iter().map(|f| f.eval(p.as_vector())).collect();
        let g = gram(&cols) - Matrix::identity(cols.len(), cols.len());
        ScanRow {
            point: p.into_vector().as_slice().to_vec(),
            gram_residual: g.amax(),
        }
    });
    let max = rows.iter().map(|r| r.gram_residual).fold(0.0, f64::max);
    let body = FrameScan {
        eps_pole: config.eps_pole,
        max_gram_residual: max,
        rows: &rows,
    };
    report::render(config.format, &Envelope::new(config, &body), || {
        let mut s = report::provenance(config);
        s.push_str(&format!("# max_gram_residual={max}\n"));
        let header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        s.push_str(&format!("sample,{},gram_residual\n", header.join(",")));
        for (n, r) in rows.iter().enumerate() {
            let coords: Vec<String> = r.point.iter().map(|c| c.to_string()).collect();
            s.push_str(&format!("{n},{},{}\n", coords.join(","), r.gram_residual));
        }
        s
    })
}

fn parallelism_scan(config: &RunConfig, frame: FrameKind) -> Result<String> {
    let level = config.model.level();
    let fields = match frame {
        FrameKind::Classical => classical_frame(level)?,
        FrameKind::Kirchhoff => kirchhoff_frame(&config.acs()),
    };
    let r = constancy_scan(&fields, config.samples, config.seed, &config.params())?;
    let json = ConstancyJson::new(config, frame_name(frame), level.get(), &r);
    report::render(config.format, &json, || json.to_csv())
}

fn hspace_defects(config: &RunConfig, op: DefectOp, mult: MultArg) -> Result<String> {
    let acs = config.acs();
    let (m, name) = match mult {
        MultArg::Sphere => (HMultiplication::sphere(acs), "sphere"),
        MultArg::Ambient => (HMultiplication::ambient(acs), "ambient"),
    };
    let r = sample_defect(&m, op, config.samples, config.seed)?;
    let json = DefectJson::new(config, name, &r);
    report::render(config.format, &json, || json.to_csv())
}

fn verify_table(summary: &VerificationSummary) -> String {
    let mut s = format!(
        "verify model={} seed={} samples={}\n",
        summary.model, summary.seed, summary.samples
    );
    for c in &summary.checks {
        let op = match c.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        s.push_str(&format!(
            "{:4}  {:<28} {:>12.3e} {op} {:<9.1e} {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance,
            c.anchor
        ));
        if let Some(err) = &c.error {
            s.push_str(&format!("      error: {err}\n"));
        }
    }
    s.push_str(if summary.pass { "all checks pass\n" } else { "some checks FAILED\n" });
    s
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    report::write_output(Some(&dir.join(name)), content)
}

/// Every report for every model, in both formats where both exist.
fn write_report(dir: &Path, common: &Common) -> Result<bool> {
    std::fs::create_dir_all(dir)?;
    let mut pass = true;
    for level in 1..=3 {
        let t = report::tables_export(AlgebraLevel::new(level)?);
        write_file(dir, &format!("tables-level{level}.json"), &report::to_json(&t)?)?;
    }
    for model in [Model::Quaternion, Model::Octonion, Model::Rotated] {
        let mut config = common.config(model, "")?;
        config.out = Some(dir.to_path_buf());
        let (body, ok) = acs_check(&config);
        pass &= ok;
        write_file(dir, &format!("acs-{model}.json"), &report::to_json(&Envelope::new(&config, body))?)?;

        for format in [Format::Json, Format::Csv] {
            config.format = format;
            let ext = extension(format);
            write_file(dir, &format!("frame-scan-{model}.{ext}"), &frame_scan(&config)?)?;
            let mut frames = vec![FrameKind::Kirchhoff];
            if model != Model::Rotated {
                frames.push(FrameKind::Classical);
            }
            for frame in frames {
                let name = format!("parallelism-{}-{model}.{ext}", frame_name(frame));
                write_file(dir, &name, &parallelism_scan(&config, frame)?)?;
            }
            for op in [DefectOp::Assoc, DefectOp::Moufang] {
                let name = format!("hspace-{model}-{}.{ext}", op.name());
                write_file(dir, &name, &hspace_defects(&config, op, MultArg::Sphere)?)?;
            }
        }
        config.format = Format::Json;
        let summary = verify(&config)?;
        pass &= summary.pass;
        print!("{}", verify_table(&summary));
        write_file(dir, &format!("verify-{model}.json"), &report::to_json(&Envelope::new(&config, &summary))?)?;
    }
    println!("reports written to {}", dir.display());
    Ok(pass)
}
