#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vortexmix::analysis::{fringe_charge_with, winding_number, FringeSettings};
use vortexmix::config::ScenarioConfig;
use vortexmix::field::{synthesize_lg, GridSpec, Intensity, LgSpec};
use vortexmix::hologram::{
    diffract_and_extract, fork_transmission, HologramSpec, MaskMode, OrderWindow,
};
use vortexmix::interferometer::{analyze, BlockedArm};
use vortexmix::pipeline::{self, measure_charge, EmitFlags, RunConfig, SweepRanges};
use vortexmix::{io, Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "vortexmix",
    version,
    about = "Optical-vortex four-wave-mixing simulator"
)]
struct Cli {
    /// Scenario file (`key = value` lines) or preset name.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size override (samples per side).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Noise seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifacts to write: images,png,fields,csv,report (or all).
    #[arg(long, global = true)]
    emit: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a Laguerre-Gaussian field.
    Lg(LgArgs),
    /// Write a fork-hologram mask and the field of one diffraction order.
    Hologram(HologramArgs),
    /// Mix the scenario's three beams into the signal.
    Mix,
    /// Pass a field dump through the Mach-Zehnder analyzer.
    Interfere(InterfereArgs),
    /// Read the charge of a field dump or a PGM interferogram.
    Analyze(AnalyzeArgs),
    /// Run a full scenario (preset name or file).
    Run(RunArgs),
    /// Charge-conservation table over LG input charges.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct LgArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    charge: i32,
    #[arg(long, default_value_t = 0)]
    radial: u32,
    /// Waist in meters (defaults to the scenario waist).
    #[arg(long)]
    waist: Option<f64>,
}

#[derive(Args, Debug)]
struct HologramArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    charge: i32,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    order: i32,
    /// Grating period in meters (defaults to the scenario period).
    #[arg(long)]
    period: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Fork position `x,y` in meters.
    #[arg(long, allow_hyphen_values = true)]
    fork_offset: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Binary,
    Sinusoidal,
}

#[derive(Args, Debug)]
struct InterfereArgs {
    /// Input field dump.
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    phase: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    #[arg(long, value_enum, default_value = "none")]
    block: BlockArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BlockArg {
    None,
    Reflected,
    Direct,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Field dump or binary PGM.
    input: PathBuf,
    /// Ring radius in meters.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Preset name or scenario file; falls back to --config.
    scenario: Option<String>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Forward-pump charges `lo:hi`.
    #[arg(long, allow_hyphen_values = true, default_value = "-2:2")]
    lf: String,
    /// Backward-pump charges `lo:hi`.
    #[arg(long, allow_hyphen_values = true, default_value = "-2:2")]
    lb: String,
    /// Probe charges `lo:hi`.
    #[arg(long, allow_hyphen_values = true, default_value = "-2:2")]
    lp: String,
}

struct Context {
    scenario: ScenarioConfig,
    out: PathBuf,
    emit: Option<EmitFlags>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let run = run_config(cli, cli.config.clone().unwrap_or_else(|| "gaussian".into()))?;
        Ok(Context {
            scenario: run.load_scenario()?,
            out: cli.out.clone().unwrap_or_else(|| PathBuf::from(".")),
            emit: cli.emit.as_deref().map(EmitFlags::parse).transpose()?,
        })
    }

    fn emit(&self, default: EmitFlags) -> EmitFlags {
        self.emit.unwrap_or(default)
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }
}

fn run_config(cli: &Cli, scenario: String) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(scenario);
    cfg.grid = cli.grid;
    cfg.seed = cli.seed;
    cfg.out_dir = cli.out.clone();
    cfg.emit = match &cli.emit {
        Some(list) => EmitFlags::parse(list)?,
        None => EmitFlags {
            images: true,
            fields: true,
            csv: true,
            report: true,
            png: false,
        },
    };
    Ok(cfg)
}

fn images_and_fields() -> EmitFlags {
    EmitFlags {
        images: true,
        fields: true,
        ..EmitFlags::default()
    }
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(x), Ok(y)) => Ok((x, y)),
            _ => Err(Error::Parameter(format!("bad pair `{text}`"))),
        },
        _ => Err(Error::Parameter(format!("expected `x,y`, got `{text}`"))),
    }
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<i32>> {
    let bad = || Error::Parameter(format!("expected range `lo:hi`, got `{text}`"));
    let (lo, hi) = match text.split_once(':') {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let v: i32 = text.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn write_outputs(
    ctx: &Context,
    emit: EmitFlags,
    stem: &str,
    field: &vortexmix::field::ComplexField,
) -> Result<()> {
    if emit.fields {
        io::write_field(&ctx.path(&format!("{stem}.field"))?, field)?;
    }
    if emit.images {
        io::write_pgm(&ctx.path(&format!("{stem}.pgm"))?, &field.intensity())?;
    }
    if emit.png {
        io::write_png(&ctx.path(&format!("{stem}.png"))?, &field.intensity())?;
    }
    Ok(())
}

/// Returns whether every physics check passed.
fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Lg(args) => {
            let ctx = Context::new(cli)?;
            let grid = ctx.scenario.grid_spec()?;
            let waist = args.waist.unwrap_or(ctx.scenario.waist);
            let f = synthesize_lg(&LgSpec::new(args.charge, args.radial, waist), &grid)?;
            write_outputs(&ctx, ctx.emit(images_and_fields()), "lg", &f)?;
            let est = measure_charge(&f, ctx.scenario.ring_fraction * waist)?;
            println!("{est}");
            Ok(est.charge == args.charge)
        }
        Command::Hologram(args) => {
            let ctx = Context::new(cli)?;
            let s = &ctx.scenario;
            let grid = s.grid_spec()?;
            let period = args.period.unwrap_or(s.hologram.period);
            let mode = match args.mode {
                Some(ModeArg::Binary) => MaskMode::Binary,
                Some(ModeArg::Sinusoidal) => MaskMode::Sinusoidal,
                None => s.hologram.mode,
            };
            let offset = args
                .fork_offset
                .as_deref()
                .map(parse_pair)
                .transpose()?
                .unwrap_or((0.0, 0.0));
            let spec = HologramSpec::new(args.charge, period)
                .with_mode(mode)
                .with_fill(s.hologram.fill)
                .with_offset(offset);
            let mask = fork_transmission(&spec, &grid)?;
            let window = OrderWindow::new(args.order, s.hologram.window_fraction / period);
            let gaussian = synthesize_lg(&LgSpec::gaussian(s.waist), &grid)?;
            let order = diffract_and_extract(&gaussian, &spec, &window)?;
            let emit = ctx.emit(images_and_fields());
            if emit.images {
                io::write_pgm(&ctx.path("hologram_mask.pgm")?, &mask.intensity())?;
            }
            if emit.png {
                io::write_png(&ctx.path("hologram_mask.png")?, &mask.intensity())?;
            }
            write_outputs(&ctx, emit, "hologram_order", &order)?;
            let ring = s.ring_fraction * s.waist;
            let est = measure_charge(&order, ring)?;
            let expected = if offset.0.hypot(offset.1) < ring {
                args.order * args.charge
            } else {
                0
            };
            println!("{est} expected={expected}");
            Ok(est.charge == expected)
        }
        Command::Mix => {
            let ctx = Context::new(cli)?;
            let (report, art) = pipeline::simulate(&ctx.scenario)?;
            write_outputs(&ctx, ctx.emit(images_and_fields()), "signal", &art.signal)?;
            for c in &report.charges {
                println!(
                    "{} expected={} measured={} residual={:e}",
                    c.label, c.expected, c.measured, c.residual
                );
            }
            let pm = &report.phase_match;
            println!(
                "signal_wavelength_m={:e} k_residual_per_m={:e}",
                pm.signal_wavelength, pm.k_residual
            );
            Ok(report.charges.iter().all(|c| c.passed()))
        }
        Command::Interfere(args) => {
            let ctx = Context::new(cli)?;
            let input = io::read_field(&args.input)?;
            let mut icfg = ctx.scenario.interferometer;
            if let Some(p) = args.phase {
                icfg.phase = p;
            }
            if let Some(e) = args.eta {
                icfg.eta = e;
            }
            icfg.blocked_arm = match args.block {
                BlockArg::None => BlockedArm::None,
                BlockArg::Reflected => BlockedArm::Reflected,
                BlockArg::Direct => BlockedArm::Direct,
            };
            let image = analyze(&input, &icfg)?;
            let emit = ctx.emit(EmitFlags {
                images: true,
                ..EmitFlags::default()
            });
            if emit.images {
                io::write_pgm(&ctx.path("interferogram.pgm")?, &image)?;
            }
            if emit.png {
                io::write_png(&ctx.path("interferogram.png")?, &image)?;
            }
            if emit.csv {
                let rows: Vec<Vec<String>> = pipeline::azimuthal_profile(&image)
                    .map(|p| {
                        p.into_iter()
                            .map(|(a, v)| vec![format!("{a:e}"), format!("{v:e}")])
                            .collect()
                    })
                    .unwrap_or_default();
                io::write_csv(
                    &ctx.path("azimuthal_profile.csv")?,
                    &["angle_rad", "intensity"],
                    &rows,
                )?;
            }
            Ok(true)
        }
        Command::Analyze(args) => {
            let ctx = Context::new(cli)?;
            let bytes = fs::read(&args.input)?;
            let est = if bytes.starts_with(b"P5") {
                let raw = io::decode_pgm(&bytes, 1.0)?;
                let n = raw.grid().n();
                let extent = ctx.scenario.extent_waists * ctx.scenario.waist;
                let image =
                    Intensity::new(GridSpec::with_extent(n, extent)?, raw.values().to_vec())?;
                let settings = FringeSettings {
                    ring_radius: args.radius,
                    mismatch_sign: if ctx.scenario.interferometer.eta < 0.0 {
                        -1.0
                    } else {
                        1.0
                    },
                    ..FringeSettings::default()
                };
                fringe_charge_with(&image, &settings)?
            } else {
                let text = String::from_utf8(bytes)
                    .map_err(|_| Error::Format("field dump is not UTF-8".into()))?;
                let field = io::parse_field(&text)?;
                match args.radius {
                    Some(r) => winding_number(&field, r)?,
                    None => {
                        measure_charge(&field, ctx.scenario.ring_fraction * ctx.scenario.waist)?
                    }
                }
            };
            println!("{est}");
            Ok(true)
        }
        Command::Run(args) => {
            let scenario = args
                .scenario
                .clone()
                .or_else(|| cli.config.clone())
                .ok_or_else(|| {
                    Error::Parameter("run needs a preset name or scenario file".into())
                })?;
            let cfg = run_config(cli, scenario)?;
            let report = pipeline::run_scenario(&cfg)?;
            print!("{}", report.render());
            for (stage, t) in &report.timings {
                println!("time {stage} {:.3}s", t.as_secs_f64());
            }
            Ok(report.passed())
        }
        Command::Sweep(args) => {
            let ctx = Context::new(cli)?;
            let ranges = SweepRanges {
                forward: parse_range(&args.lf)?,
                backward: parse_range(&args.lb)?,
                probe: parse_range(&args.lp)?,
            };
            let rows = pipeline::sweep(&ranges, &ctx.scenario)?;
            let csv = pipeline::sweep_csv(&rows);
            match &cli.out {
                Some(_) => fs::write(ctx.path("sweep.csv")?, &csv)?,
                None => std::io::stdout().write_all(csv.as_bytes())?,
            }
            let failed = rows.iter().filter(|r| !r.passed()).count();
            eprintln!("sweep: {} cases, {failed} failed", rows.len());
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
