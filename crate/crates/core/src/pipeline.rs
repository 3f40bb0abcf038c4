//! End-to-end scenario runs: holograms, mixing, analyzer and charge checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    fringe_charge_with, harmonic_dominance, radial_profile, ring_samples, winding_number,
    ChargeEstimate, FringeSettings, DEFAULT_RING_SAMPLES,
};
use crate::config::{BeamConfig, BeamSource, ScenarioConfig};
use crate::error::{Error, Result};
use crate::field::{
    reflect, synthesize_lg, translate, Axis, ComplexField, GridSpec, Intensity, LgSpec,
};
use crate::hologram::{diffract_and_extract, fork_transmission, HologramSpec, OrderWindow};
use crate::interferometer::{analyze, BlockedArm};
use crate::io;
use crate::mixer::{
    charge_ledger, mix, phase_match, BeamLine, BeamRole, MatchReport, MixingScenario,
};

/// Ring radii tried, in units of the nominal ring, when the phase is
/// undefined on the first choice.
const RING_FALLBACKS: [f64; 5] = [1.0, 0.7, 1.4, 0.5, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmitFlags {
    pub images: bool,
    pub png: bool,
    pub fields: bool,
    pub csv: bool,
    pub report: bool,
}

impl EmitFlags {
    pub fn all() -> Self {
        EmitFlags {
            images: true,
            png: true,
            fields: true,
            csv: true,
            report: true,
        }
    }

    /// Comma-separated list of `images`, `png`, `fields`, `csv`, `report`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut flags = EmitFlags::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "images" => flags.images = true,
                "png" => flags.png = true,
                "fields" => flags.fields = true,
                "csv" => flags.csv = true,
                "report" => flags.report = true,
                "all" => flags = EmitFlags::all(),
                other => {
                    return Err(Error::Parameter(format!("unknown emit kind `{other}`")));
                }
            }
        }
        Ok(flags)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Preset name or scenario file path.
    pub scenario: String,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub emit: EmitFlags,
}

impl RunConfig {
    pub fn new(scenario: impl Into<String>) -> Self {
        RunConfig {
            scenario: scenario.into(),
            grid: None,
            seed: None,
            out_dir: None,
            emit: EmitFlags::default(),
        }
    }

    pub fn load_scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::resolve(&self.scenario)?;
        if let Some(n) = self.grid {
            cfg = cfg.with_grid(n)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageCharge {
    pub label: String,
    pub expected: i32,
    pub measured: i32,
    pub residual: f64,
    pub ring_radius: f64,
}

impl StageCharge {
    pub fn passed(&self) -> bool {
        self.expected == self.measured
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    /// Forward pump, backward pump, probe, then the signal.
    pub charges: Vec<StageCharge>,
    pub expected_arms: usize,
    pub measured_arms: usize,
    /// Signed charge recovered from the interferogram (0 when no fringes).
    pub fringe_charge: i32,
    pub fringe_residual: f64,
    /// Dominant azimuthal harmonic at the interferogram's peak ring and its
    /// amplitude ratio to the next one.
    pub dominant_harmonic: usize,
    pub harmonic_ratio: f64,
    /// Blocked-arm image: intensity at the beam axis over the peak.
    pub blocked_center_ratio: f64,
    pub phase_match: MatchReport,
    pub timings: Vec<(&'static str, Duration)>,
}

impl RunReport {
    pub fn signal(&self) -> &StageCharge {
        self.charges.last().expect("report always holds the signal")
    }

    /// Named pass/fail checks.
    pub fn checks(&self) -> Vec<(String, bool)> {
        let mut checks: Vec<(String, bool)> = self
            .charges
            .iter()
            .map(|c| (format!("{} charge", c.label), c.passed()))
            .collect();
        checks.push(("arm count".into(), self.measured_arms == self.expected_arms));
        checks
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|(_, ok)| *ok)
    }

    /// Plain-text report. Timings are left out so reruns are byte-identical.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.scenario);
        let _ = writeln!(
            out,
            "stage            expected  measured  residual      ring_m"
        );
        for c in &self.charges {
            let _ = writeln!(
                out,
                "{:<16} {:>8}  {:>8}  {:<12.3e}  {:.4e}",
                c.label, c.expected, c.measured, c.residual, c.ring_radius
            );
        }
        let _ = writeln!(
            out,
            "arms expected={} measured={} fringe_charge={} fringe_residual={:.3e}",
            self.expected_arms, self.measured_arms, self.fringe_charge, self.fringe_residual
        );
        let _ = writeln!(
            out,
            "dominant_harmonic={} harmonic_ratio={:.3} blocked_center_ratio={:.3e}",
            self.dominant_harmonic, self.harmonic_ratio, self.blocked_center_ratio
        );
        let pm = &self.phase_match;
        let _ = writeln!(
            out,
            "signal_wavelength_m={:e} k_residual_per_m={:.6e} omega_residual={:.3e} signal_direction={:.9},{:.9},{:.9}",
            pm.signal_wavelength,
            pm.k_residual,
            pm.omega_residual,
            pm.signal_direction[0],
            pm.signal_direction[1],
            pm.signal_direction[2]
        );
        for (name, ok) in self.checks() {
            let _ = writeln!(out, "check {name}: {}", if ok { "pass" } else { "FAIL" });
        }
        let _ = writeln!(
            out,
            "result {}",
            if self.passed() { "pass" } else { "FAIL" }
        );
        out
    }
}

/// Everything a scenario run produces in memory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub forward: ComplexField,
    pub backward: ComplexField,
    pub probe: ComplexField,
    pub signal: ComplexField,
    pub interferogram: Intensity,
    pub blocked: Intensity,
    pub masks: Vec<(&'static str, ComplexField)>,
}

struct PreparedBeam {
    field: ComplexField,
    expected: i32,
    mask: Option<ComplexField>,
}

fn prepare_beam(cfg: &ScenarioConfig, beam: &BeamConfig, grid: &GridSpec) -> Result<PreparedBeam> {
    let waist = cfg.beam_waist(beam);
    let ring = cfg.ring_fraction * waist;
    let (mut field, mut expected, mask) = match beam.source {
        BeamSource::Gaussian => (synthesize_lg(&LgSpec::gaussian(waist), grid)?, 0, None),
        BeamSource::Lg {
            charge,
            radial_index,
        } => (
            synthesize_lg(&LgSpec::new(charge, radial_index, waist), grid)?,
            charge,
            None,
        ),
        BeamSource::Hologram {
            charge,
            order,
            fork_offset,
        } => {
            let spec = HologramSpec::new(charge, cfg.hologram.period)
                .with_mode(cfg.hologram.mode)
                .with_fill(cfg.hologram.fill)
                .with_offset(fork_offset);
            let window =
                OrderWindow::new(order, cfg.hologram.window_fraction / cfg.hologram.period);
            let gaussian = synthesize_lg(&LgSpec::gaussian(waist), grid)?;
            let diffracted = diffract_and_extract(&gaussian, &spec, &window)?;
            // the fork only counts when the measurement ring encloses it
            let inside = fork_offset.0.hypot(fork_offset.1) < ring;
            let expected = if inside { order * charge } else { 0 };
            (diffracted, expected, Some(fork_transmission(&spec, grid)?))
        }
    };
    if beam.mirrors % 2 == 1 {
        field = reflect(&field, Axis::Vertical);
        expected = -expected;
    }
    Ok(PreparedBeam {
        field,
        expected,
        mask,
    })
}

/// Winding at `nominal`, retrying other radii where the phase is undefined.
pub fn measure_charge(f: &ComplexField, nominal: f64) -> Result<ChargeEstimate> {
    let mut last = None;
    for factor in RING_FALLBACKS {
        match winding_number(f, nominal * factor) {
            Ok(est) => return Ok(est),
            Err(e @ (Error::UndefinedPhase { .. } | Error::RingOutside(_))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one radius tried"))
}

fn add_noise(image: &Intensity, fraction: f64, seed: u64) -> Result<Intensity> {
    if fraction == 0.0 {
        return Ok(image.clone());
    }
    let amplitude = fraction * image.peak();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = image
        .values()
        .iter()
        .map(|&v| v + amplitude * rng.gen::<f64>())
        .collect();
    Intensity::new(*image.grid(), values)
}

/// Arm count read from an interferogram: `2|l|` from the fringe estimator,
/// 0 when there are no fringes.
fn read_arms(image: &Intensity, eta: f64) -> Result<(usize, i32, f64)> {
    let settings = FringeSettings {
        mismatch_sign: if eta < 0.0 { -1.0 } else { 1.0 },
        ..FringeSettings::default()
    };
    match fringe_charge_with(image, &settings) {
        Ok(est) => Ok((
            2 * est.charge.unsigned_abs() as usize,
            est.charge,
            est.residual,
        )),
        Err(Error::NoFringe) => Ok((0, 0, 1.0)),
        Err(Error::InconsistentInterferogram(h)) => Ok((h, 0, 1.0)),
        Err(e) => Err(e),
    }
}

/// Runs one scenario and returns the report plus the in-memory artifacts.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(RunReport, RunArtifacts)> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        timings.push((name, clock.elapsed()));
        clock = Instant::now();
    };

    let grid = cfg.grid_spec().map_err(Error::at("grid"))?;
    let forward = prepare_beam(cfg, &cfg.forward, &grid).map_err(Error::at("forward beam"))?;
    let backward = prepare_beam(cfg, &cfg.backward, &grid).map_err(Error::at("backward beam"))?;
    let mut probe = prepare_beam(cfg, &cfg.probe, &grid).map_err(Error::at("probe beam"))?;
    if cfg.probe_offset != (0.0, 0.0) {
        probe.field = translate(&probe.field, cfg.probe_offset.0, cfg.probe_offset.1);
    }
    lap("beams", &mut timings);

    let line = |p: &PreparedBeam, b: &BeamConfig, role| {
        BeamLine::new(p.field.clone(), b.wavelength, b.direction, role)
    };
    let scenario = MixingScenario::new(
        line(&forward, &cfg.forward, BeamRole::ForwardPump)?,
        line(&backward, &cfg.backward, BeamRole::BackwardPump)?,
        line(&probe, &cfg.probe, BeamRole::Probe)?,
        cfg.chi3,
    )
    .map_err(Error::at("mix"))?;
    let signal = mix(&scenario).map_err(Error::at("mix"))?;
    let matching = phase_match(&scenario, None).map_err(Error::at("phase match"))?;
    lap("mix", &mut timings);

    let open = analyze(&signal, &cfg.interferometer).map_err(Error::at("interferometer"))?;
    let open = add_noise(&open, cfg.noise, cfg.seed).map_err(Error::at("interferometer"))?;
    let blocked = analyze(
        &signal,
        &cfg.interferometer.with_blocked(BlockedArm::Reflected),
    )
    .map_err(Error::at("interferometer"))?;
    lap("interferometer", &mut timings);

    let mut charges = Vec::with_capacity(4);
    for (label, prepared, beam) in [
        ("forward_pump", &forward, &cfg.forward),
        ("backward_pump", &backward, &cfg.backward),
        ("probe", &probe, &cfg.probe),
    ] {
        let est = measure_charge(&prepared.field, cfg.ring_fraction * cfg.beam_waist(beam))
            .map_err(Error::at("analysis"))?;
        charges.push(StageCharge {
            label: label.into(),
            expected: prepared.expected,
            measured: est.charge,
            residual: est.residual,
            ring_radius: est.ring_radius,
        });
    }
    let expected_signal = charge_ledger(forward.expected, backward.expected, probe.expected);
    let est =
        measure_charge(&signal, cfg.ring_fraction * cfg.waist).map_err(Error::at("analysis"))?;
    charges.push(StageCharge {
        label: "signal".into(),
        expected: expected_signal,
        measured: est.charge,
        residual: est.residual,
        ring_radius: est.ring_radius,
    });

    let (measured_arms, fringe, fringe_residual) =
        read_arms(&open, cfg.interferometer.eta).map_err(Error::at("analysis"))?;
    let (dominant_harmonic, harmonic_ratio) = match crate::analysis::peak_ring_radius(&open) {
        Some(_) if measured_arms == 0 => (0, 0.0),
        Some(r) => harmonic_dominance(
            &ring_samples(&open, r, DEFAULT_RING_SAMPLES).map_err(Error::at("analysis"))?,
        ),
        None => (0, 0.0),
    };
    let blocked_peak = blocked.peak();
    let blocked_center_ratio = if blocked_peak > 0.0 {
        blocked.sample(0.0, 0.0).unwrap_or(0.0) / blocked_peak
    } else {
        0.0
    };
    lap("analysis", &mut timings);

    let mut masks = Vec::new();
    if let Some(m) = backward.mask {
        masks.push(("backward", m));
    }
    if let Some(m) = probe.mask {
        masks.push(("probe", m));
    }

    let report = RunReport {
        scenario: cfg.name.clone(),
        charges,
        expected_arms: 2 * expected_signal.unsigned_abs() as usize,
        measured_arms,
        fringe_charge: fringe,
        fringe_residual,
        dominant_harmonic,
        harmonic_ratio,
        blocked_center_ratio,
        phase_match: matching,
        timings,
    };
    let artifacts = RunArtifacts {
        forward: forward.field,
        backward: backward.field,
        probe: probe.field,
        signal,
        interferogram: open,
        blocked,
        masks,
    };
    Ok((report, artifacts))
}

/// Azimuthal profile of `image` at its peak ring as `(angle, intensity)`.
pub fn azimuthal_profile(image: &Intensity) -> Result<Vec<(f64, f64)>> {
    let r = crate::analysis::peak_ring_radius(image).ok_or(Error::NoFringe)?;
    let samples = ring_samples(image, r, DEFAULT_RING_SAMPLES)?;
    let n = samples.len();
    Ok(samples
        .into_iter()
        .enumerate()
        .map(|(k, v)| (2.0 * PI * k as f64 / n as f64, v))
        .collect())
}

/// Writes the requested artifacts; returns the paths written.
pub fn write_artifacts(
    dir: &Path,
    emit: &EmitFlags,
    report: &RunReport,
    art: &RunArtifacts,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    if emit.images {
        io::write_pgm(&put("interferogram.pgm"), &art.interferogram)?;
        io::write_pgm(&put("blocked.pgm"), &art.blocked)?;
        io::write_pgm(&put("signal_intensity.pgm"), &art.signal.intensity())?;
        for (name, mask) in &art.masks {
            io::write_pgm(&put(&format!("hologram_{name}.pgm")), &mask.intensity())?;
        }
    }
    if emit.png {
        io::write_png(&put("interferogram.png"), &art.interferogram)?;
        io::write_png(&put("blocked.png"), &art.blocked)?;
    }
    if emit.fields {
        io::write_field(&put("signal.field"), &art.signal)?;
        io::write_field(&put("forward.field"), &art.forward)?;
        io::write_field(&put("backward.field"), &art.backward)?;
        io::write_field(&put("probe.field"), &art.probe)?;
    }
    if emit.csv {
        let rows: Vec<Vec<String>> = match azimuthal_profile(&art.interferogram) {
            Ok(profile) => profile
                .into_iter()
                .map(|(a, v)| vec![format!("{a:e}"), format!("{v:e}")])
                .collect(),
            Err(_) => Vec::new(),
        };
        io::write_csv(
            &put("azimuthal_profile.csv"),
            &["angle_rad", "intensity"],
            &rows,
        )?;
        let radial: Vec<Vec<String>> = radial_profile(&art.interferogram)
            .into_iter()
            .map(|(r, v)| vec![format!("{r:e}"), format!("{v:e}")])
            .collect();
        io::write_csv(
            &put("radial_profile.csv"),
            &["radius_m", "intensity"],
            &radial,
        )?;
    }
    if emit.report {
        fs::write(put("report.txt"), report.render())?;
    }
    Ok(written)
}

/// Loads the scenario, runs it and writes the requested artifacts.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunReport> {
    let scenario = cfg.load_scenario()?;
    let (report, artifacts) = simulate(&scenario)?;
    if let Some(dir) = &cfg.out_dir {
        write_artifacts(dir, &cfg.emit, &report, &artifacts).map_err(Error::at("output"))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRanges {
    pub forward: std::ops::RangeInclusive<i32>,
    pub backward: std::ops::RangeInclusive<i32>,
    pub probe: std::ops::RangeInclusive<i32>,
}

impl SweepRanges {
    pub fn cube(lo: i32, hi: i32) -> Self {
        SweepRanges {
            forward: lo..=hi,
            backward: lo..=hi,
            probe: lo..=hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub forward: i32,
    pub backward: i32,
    pub probe: i32,
    pub expected: i32,
    pub measured: i32,
    pub residual: f64,
    pub arms: usize,
}

impl SweepRow {
    pub fn passed(&self) -> bool {
        self.measured == self.expected && self.arms == 2 * self.expected.unsigned_abs() as usize
    }
}

/// Full-factorial charge-conservation table with analytic LG (p = 0) inputs.
pub fn sweep(ranges: &SweepRanges, cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    let grid = cfg.grid_spec()?;
    let mut modes = BTreeMap::new();
    for l in ranges
        .forward
        .clone()
        .chain(ranges.backward.clone())
        .chain(ranges.probe.clone())
    {
        if let std::collections::btree_map::Entry::Vacant(slot) = modes.entry(l) {
            slot.insert(synthesize_lg(&LgSpec::new(l, 0, cfg.waist), &grid)?);
        }
    }
    let mut cases = Vec::new();
    for lf in ranges.forward.clone() {
        for lb in ranges.backward.clone() {
            for lp in ranges.probe.clone() {
                cases.push((lf, lb, lp));
            }
        }
    }
    let beam = |l: i32, b: &BeamConfig, role| {
        BeamLine::new(modes[&l].clone(), b.wavelength, b.direction, role)
    };
    cases
        .into_par_iter()
        .map(|(lf, lb, lp)| {
            let scenario = MixingScenario::new(
                beam(lf, &cfg.forward, BeamRole::ForwardPump)?,
                beam(lb, &cfg.backward, BeamRole::BackwardPump)?,
                beam(lp, &cfg.probe, BeamRole::Probe)?,
                cfg.chi3,
            )?;
            let signal = mix(&scenario)?;
            let est = measure_charge(&signal, cfg.ring_fraction * cfg.waist)?;
            let (arms, _, _) = read_arms(
                &analyze(&signal, &cfg.interferometer)?,
                cfg.interferometer.eta,
            )?;
            Ok(SweepRow {
                forward: lf,
                backward: lb,
                probe: lp,
                expected: charge_ledger(lf, lb, lp),
                measured: est.charge,
                residual: est.residual,
                arms,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.forward.to_string(),
                r.backward.to_string(),
                r.probe.to_string(),
                r.expected.to_string(),
                r.measured.to_string(),
                format!("{:e}", r.residual),
                r.arms.to_string(),
                if r.passed() { "true" } else { "false" }.to_string(),
            ]
        })
        .collect();
    io::format_csv(
        &[
            "l_f", "l_b", "l_p", "expected", "measured", "residual", "arms", "pass",
        ],
        &body,
    )
}
