//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use sha2::{Digest, Sha256};

use vortexmix::analysis::radial_profile;
use vortexmix::config::ScenarioConfig;
use vortexmix::field::{conjugate, reflect, synthesize_lg, Axis, ComplexField, GridSpec, LgSpec};
use vortexmix::hologram::{
    diffract_and_extract, diffraction_efficiency, HologramSpec, MaskMode, OrderWindow,
};
use vortexmix::interferometer::{analyze, rotate_image, InterferometerConfig};
use vortexmix::mixer::{angle_between, phase_match, BeamLine, BeamRole, MixingScenario};
use vortexmix::pipeline::{measure_charge, simulate, sweep, SweepRanges};

const W: f64 = 1e-3;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn grid() -> GridSpec {
    GridSpec::with_extent(512, 8.0 * W).unwrap()
}

fn charge_conservation_sweep() -> Outcome {
    let cfg = ScenarioConfig::default();
    let start = Instant::now();
    let rows = sweep(&SweepRanges::cube(-2, 2), &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let bad: Vec<_> = rows
        .iter()
        .filter(|r| r.measured != r.expected || r.residual >= 1e-3)
        .map(|r| (r.forward, r.backward, r.probe))
        .collect();
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    check(
        rows.len() == 125 && bad.is_empty() && elapsed < 120.0,
        format!(
            "{} cases, {} mismatched {:?}, max residual {worst:.2e}, {elapsed:.1}s",
            rows.len(),
            bad.len(),
            bad
        ),
    )
}

fn fig2_reproduction() -> Outcome {
    let cfg = ScenarioConfig::resolve("fig2").map_err(|e| e.to_string())?;
    let (report, art) = simulate(&cfg).map_err(|e| e.to_string())?;
    // annular: the blocked-arm radial profile peaks off the axis
    let profile = radial_profile(&art.blocked);
    let (r_peak, _) = profile
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    check(
        report.blocked_center_ratio < 0.01
            && r_peak > 2.0 * art.blocked.grid().pitch()
            && report.dominant_harmonic == 2
            && report.harmonic_ratio > 5.0,
        format!(
            "blocked center/peak {:.2e}, ring peak at {:.2}w, harmonic {} ratio {:.1}",
            report.blocked_center_ratio,
            r_peak / W,
            report.dominant_harmonic,
            report.harmonic_ratio
        ),
    )
}

fn fig3_reproduction() -> Outcome {
    let cfg = ScenarioConfig::resolve("fig3").map_err(|e| e.to_string())?;
    let (report, _) = simulate(&cfg).map_err(|e| e.to_string())?;
    check(
        report.signal().measured == 2 && report.dominant_harmonic == 4,
        format!(
            "signal charge {}, harmonic {} ratio {:.1}",
            report.signal().measured,
            report.dominant_harmonic,
            report.harmonic_ratio
        ),
    )
}

fn hologram_charge_law() -> Outcome {
    let g = grid();
    let period = 16.0 * g.pitch();
    let gaussian = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
    let mut wrong = Vec::new();
    for lh in -2..=2 {
        for m in -1..=1 {
            let spec = HologramSpec::new(lh, period);
            let order = diffract_and_extract(&gaussian, &spec, &OrderWindow::for_period(m, period))
                .map_err(|e| e.to_string())?;
            let got = measure_charge(&order, 0.7 * W)
                .map_err(|e| e.to_string())?
                .charge;
            if got != m * lh {
                wrong.push((lh, m, got));
            }
        }
    }
    let shifted = HologramSpec::new(1, period).with_offset((3.0 * W, 0.0));
    let order = diffract_and_extract(&gaussian, &shifted, &OrderWindow::for_period(1, period))
        .map_err(|e| e.to_string())?;
    let offset_charge = measure_charge(&order, 0.7 * W)
        .map_err(|e| e.to_string())?
        .charge;
    check(
        wrong.is_empty() && offset_charge == 0,
        format!("15 orders, mismatches {wrong:?}; fork at 3w gives charge {offset_charge}"),
    )
}

fn binary_efficiency() -> Outcome {
    let g = grid();
    let period = 16.0 * g.pitch();
    let gaussian = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
    let spec = HologramSpec::new(1, period).with_mode(MaskMode::Binary);
    let eta = diffraction_efficiency(&spec, &OrderWindow::for_period(1, period), &gaussian)
        .map_err(|e| e.to_string())?;
    let target = 1.0 / (PI * PI);
    let rel = (eta - target).abs() / target;
    check(
        rel <= 0.05,
        format!("efficiency {eta:.5} vs 1/pi^2 = {target:.5}, relative error {rel:.4}"),
    )
}

fn reflection_antisymmetry() -> Outcome {
    let g = grid();
    let mut wrong = Vec::new();
    for l in -5..=5 {
        let f = synthesize_lg(&LgSpec::new(l, 0, W), &g).unwrap();
        let w = |f: &ComplexField| {
            measure_charge(f, 0.9 * W)
                .map(|e| e.charge)
                .map_err(|e| e.to_string())
        };
        let base = w(&f)?;
        let rx = w(&reflect(&f, Axis::Horizontal))?;
        let ry = w(&reflect(&f, Axis::Vertical))?;
        let cj = w(&conjugate(&f))?;
        if base != l || rx != -l || ry != -l || cj != -l {
            wrong.push((l, base, rx, ry, cj));
        }
    }
    check(
        wrong.is_empty(),
        format!("l in -5..=5, mismatches {wrong:?}"),
    )
}

fn rotation_law() -> Outcome {
    let g = grid();
    let mut details = Vec::new();
    let mut ok = true;
    for l in [1, 2] {
        let f = synthesize_lg(&LgSpec::new(l, 0, W), &g).unwrap();
        let cfg = InterferometerConfig::default().with_eta(2.0 * PI / W);
        let base = analyze(&f, &cfg).map_err(|e| e.to_string())?;
        let turned = analyze(&f, &cfg.with_phase(PI / 2.0)).map_err(|e| e.to_string())?;
        let predicted = rotate_image(&base, -PI / (4.0 * l as f64));
        let mae = turned
            .values()
            .iter()
            .zip(predicted.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / turned.values().len() as f64;
        let rel = mae / turned.peak();
        ok &= rel < 0.01;
        details.push(format!("l={l}: MAE/peak {rel:.2e}"));
    }
    check(ok, details.join(", "))
}

fn wavelength_bookkeeping() -> Outcome {
    let cfg = ScenarioConfig::resolve("fig2").map_err(|e| e.to_string())?;
    let g = grid();
    let f = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
    let line = |b: &vortexmix::config::BeamConfig, role| {
        BeamLine::new(f.clone(), b.wavelength, b.direction, role).unwrap()
    };
    let s = MixingScenario::new(
        line(&cfg.forward, BeamRole::ForwardPump),
        line(&cfg.backward, BeamRole::BackwardPump),
        line(&cfg.probe, BeamRole::Probe),
        cfg.chi3,
    )
    .map_err(|e| e.to_string())?;
    let m = phase_match(&s, None).map_err(|e| e.to_string())?;
    let p = cfg.probe.direction;
    let angle = angle_between(m.signal_direction, [-p[0], -p[1], -p[2]]);
    check(
        m.signal_wavelength == 780e-9 && angle <= 1e-9,
        format!(
            "signal wavelength {:e} m (exact: {}), angle to -probe {angle:.3e} rad (limit 1e-9)",
            m.signal_wavelength,
            m.signal_wavelength == 780e-9
        ),
    )
}

fn hash_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let bytes = std::fs::read(e.path()).unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                Sha256::digest(&bytes).to_vec(),
            )
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut hashes = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_vortexmix"))
            .args(["run", "fig3", "--emit", "all", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("run fig3 exited with {}", status.status));
        }
        hashes.push(hash_dir(&out));
    }
    check(
        hashes[0] == hashes[1] && hashes[0].len() >= 10,
        format!(
            "{} artifacts, identical hashes: {}",
            hashes[0].len(),
            hashes[0] == hashes[1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("charge conservation sweep", charge_conservation_sweep),
        ("fig2 reproduction", fig2_reproduction),
        ("fig3 reproduction", fig3_reproduction),
        ("hologram charge law", hologram_charge_law),
        ("binary mask efficiency", binary_efficiency),
        (
            "reflection/conjugation antisymmetry",
            reflection_antisymmetry,
        ),
        ("rotation law", rotation_law),
        ("energy/wavelength bookkeeping", wavelength_bookkeeping),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
