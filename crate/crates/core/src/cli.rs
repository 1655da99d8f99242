//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{EffectiveParams, ParamOverrides};
use crate::error::{Error, Result};
use crate::plot;
use crate::steady_state::SecondMoments;
use crate::steering::{steering_report_with, MomentSource, SteeringReport};
use crate::sweep::{figure_preset, run_sweep_with, Execution, SweepResult, SweepSpec};
use crate::verify::{run_verification, VerifyOptions, DEFAULT_SAMPLES, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(
    name = "cascade-steering",
    version,
    about = "Gaussian steering of a two-mode cascade laser in a squeezed vacuum"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Parameter file with `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file (point, sweep) or directory (figure). Defaults to stdout / the current directory.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format. Defaults to json for `point`, csv for `sweep` and `figure`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(flatten)]
    pub params: ParamFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    ClosedForm,
    LinearSolve,
}

impl From<Source> for MomentSource {
    fn from(s: Source) -> Self {
        match s {
            Source::ClosedForm => MomentSource::ClosedForm,
            Source::LinearSolve => MomentSource::LinearSolve,
        }
    }
}

/// Parameter overrides; these win over values from `--config`.
#[derive(Debug, Default, Args)]
pub struct ParamFlags {
    /// Cavity decay rate, kHz.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa_khz: Option<f64>,
    /// Linear gain coefficient, kHz.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gain_khz: Option<f64>,
    /// Population inversion in [0, 1].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Squeezing parameter of the reservoir.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub squeeze_r: Option<f64>,
    /// Atomic injection rate, kHz.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r0_khz: Option<f64>,
    /// Atom-field coupling, kHz.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub g_khz: Option<f64>,
    /// Atomic decay rate, kHz.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma_khz: Option<f64>,
}

impl ParamFlags {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            kappa_khz: self.kappa_khz,
            gain_khz: self.gain_khz,
            eta: self.eta,
            squeeze_r: self.squeeze_r,
            r0_khz: self.r0_khz,
            g_khz: self.g_khz,
            gamma_khz: self.gamma_khz,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steering report at a single parameter point.
    Point {
        #[arg(long, value_enum, default_value = "closed-form")]
        source: Source,
    },
    /// Run a sweep described by a JSON spec file.
    Sweep {
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Evaluate grid points one after another on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Reproduce one of the preset figures.
    Figure {
        /// One of fig2a, fig2b, fig3a, fig3b, fig4a, fig4b.
        name: String,
        /// Also write an SVG plot.
        #[arg(long)]
        plot: bool,
    },
    /// Run the seeded self-consistency checks.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1.0, hide = true)]
        tolerance_scale: f64,
    },
}

/// The record printed by `point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub parameters: EffectiveParams,
    pub source: MomentSource,
    #[serde(flatten)]
    pub report: SteeringReport,
    pub n1: f64,
    pub n2: f64,
    pub m12: f64,
}

impl PointRecord {
    pub fn new(params: EffectiveParams, source: MomentSource, report: SteeringReport, m: &SecondMoments) -> Self {
        Self {
            parameters: params,
            source,
            report,
            n1: m.n1,
            n2: m.n2,
            m12: m.m12,
        }
    }

    fn to_csv(&self) -> String {
        let p = &self.parameters;
        let r = &self.report;
        let nums = [
            p.kappa_khz,
            p.gain_khz,
            p.eta,
            p.squeeze_r,
            r.g_ab,
            r.g_ba,
            r.asymmetry,
        ]
        .map(|v| format!("{v:.16e}"))
        .join(",");
        let tail = [r.intensity_diff, r.nu_minus, self.n1, self.n2, self.m12]
            .map(|v| format!("{v:.16e}"))
            .join(",");
        format!(
            "kappa_khz,gain_khz,eta,squeeze_r,g_ab,g_ba,asymmetry,regime,intensity_diff,nu_minus,n1,n2,m12\n{nums},{},{tail}\n",
            r.regime
        )
    }
}

#[derive(Debug, Serialize)]
struct FigureSummary<'a> {
    figure: &'a str,
    files: Vec<String>,
    spec: &'a SweepSpec,
    min: serde_json::Map<String, serde_json::Value>,
    max: serde_json::Map<String, serde_json::Value>,
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn render_sweep(result: &SweepResult, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(result.to_csv()),
        Format::Json => to_json(&result.to_json_value()),
    }
}

impl Cli {
    fn overrides(&self) -> Result<ParamOverrides> {
        let file = match &self.config {
            Some(path) => ParamOverrides::load(path)?,
            None => ParamOverrides::default(),
        };
        Ok(file.overridden_by(&self.params.overrides()))
    }

    fn has_parameter_input(&self) -> bool {
        self.config.is_some() || self.params.overrides() != ParamOverrides::default()
    }
}

/// Runs a parsed command, writing primary output to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Point { source } => {
            let (laser, reservoir) = cli.overrides()?.resolve()?;
            let source = MomentSource::from(*source);
            let (report, m) = steering_report_with(&laser, &reservoir, source)?;
            let record = PointRecord::new(EffectiveParams::new(&laser, &reservoir), source, report, &m);
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&record)?,
                Format::Csv => record.to_csv(),
            };
            emit(out, &text, stdout)
        }
        Command::Sweep { spec, sequential } => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", spec.display())))?;
            let mut spec: SweepSpec = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("sweep spec {}: {e}", spec.display())))?;
            let o = cli.overrides()?;
            if o.r0_khz.is_some() || o.g_khz.is_some() || o.gamma_khz.is_some() {
                return Err(Error::Usage("sweeps take gain_khz directly, not r0/g/gamma".into()));
            }
            let f = &mut spec.fixed;
            f.kappa_khz = o.kappa_khz.unwrap_or(f.kappa_khz);
            f.gain_khz = o.gain_khz.unwrap_or(f.gain_khz);
            f.eta = o.eta.unwrap_or(f.eta);
            f.squeeze_r = o.squeeze_r.unwrap_or(f.squeeze_r);
            let exec = if *sequential { Execution::Sequential } else { Execution::default() };
            let result = run_sweep_with(&spec, exec)?;
            emit(out, &render_sweep(&result, cli.format.unwrap_or(Format::Csv))?, stdout)
        }
        Command::Figure { name, plot } => {
            let spec = figure_preset(name)?;
            if cli.has_parameter_input() {
                return Err(Error::Usage("figure presets fix their own parameters".into()));
            }
            let result = run_sweep_with(&spec, Execution::default())?;
            let dir = out.unwrap_or(Path::new("."));
            std::fs::create_dir_all(dir)?;
            let format = cli.format.unwrap_or(Format::Csv);
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            let data_path = dir.join(format!("{name}.{ext}"));
            std::fs::write(&data_path, render_sweep(&result, format)?)?;
            let mut files = vec![data_path.display().to_string()];
            if *plot {
                let svg_path = dir.join(format!("{name}.svg"));
                std::fs::write(&svg_path, plot::render(&result, name)?)?;
                files.push(svg_path.display().to_string());
            }
            let (mut min, mut max) = (serde_json::Map::new(), serde_json::Map::new());
            for &o in &spec.outputs {
                if let Some(col) = result.column(o) {
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    min.insert(o.name().into(), lo.into());
                    max.insert(o.name().into(), hi.into());
                }
            }
            let summary = FigureSummary {
                figure: name,
                files,
                spec: &spec,
                min,
                max,
            };
            stdout.write_all(to_json(&summary)?.as_bytes())?;
            Ok(())
        }
        Command::Verify {
            samples,
            seed,
            tolerance_scale,
        } => {
            let report = run_verification(&VerifyOptions {
                samples: *samples,
                seed: *seed,
                tolerance_scale: *tolerance_scale,
            })?;
            match cli.format {
                Some(Format::Json) => stdout.write_all(to_json(&report)?.as_bytes())?,
                _ => {
                    writeln!(stdout, "verify: {} samples, seed {}", report.samples, report.seed)?;
                    for c in &report.checks {
                        writeln!(stdout, "{c}")?;
                    }
                }
            }
            match report.failures() {
                0 => Ok(()),
                k => Err(Error::Verification(k)),
            }
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
