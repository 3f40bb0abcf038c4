use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vortexmix::analysis::{fringe_charge, winding_number};
use vortexmix::config::{BeamSource, ScenarioConfig};
use vortexmix::field::{synthesize_lg, GridSpec, Intensity, LgSpec};
use vortexmix::interferometer::{analyze, InterferometerConfig};
use vortexmix::pipeline::simulate;

const W: f64 = 1e-3;

fn grid() -> GridSpec {
    GridSpec::with_extent(256, 8.0 * W).unwrap()
}

fn interferogram(l: i32) -> Intensity {
    let f = synthesize_lg(&LgSpec::new(l, 0, W), &grid()).unwrap();
    analyze(&f, &InterferometerConfig::default().with_eta(2.0 * PI / W)).unwrap()
}

fn with_noise(img: &Intensity, fraction: f64, seed: u64) -> Intensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = fraction * img.peak();
    let values = img
        .values()
        .iter()
        .map(|v| v + a * rng.gen::<f64>())
        .collect();
    Intensity::new(*img.grid(), values).unwrap()
}

#[test]
fn fringe_and_winding_agree() {
    for l in [-3, -2, -1, 1, 2, 3] {
        let f = synthesize_lg(&LgSpec::new(l, 0, W), &grid()).unwrap();
        let winding = winding_number(&f, 0.7 * W).unwrap().charge;
        let fringe = fringe_charge(&interferogram(l), None).unwrap().charge;
        assert_eq!(winding, l);
        assert_eq!(fringe, winding, "l = {l}");
    }
}

#[test]
fn fringe_and_winding_agree_on_mixed_signals() {
    let mut cfg = ScenarioConfig::resolve("gaussian")
        .unwrap()
        .with_grid(256)
        .unwrap();
    for (lf, lb, lp) in [(0, 1, 0), (1, 1, -1), (0, -2, 1), (-1, 0, 0)] {
        cfg.forward.source = BeamSource::Lg {
            charge: lf,
            radial_index: 0,
        };
        cfg.backward.source = BeamSource::Lg {
            charge: lb,
            radial_index: 0,
        };
        cfg.probe.source = BeamSource::Lg {
            charge: lp,
            radial_index: 0,
        };
        let (report, _) = simulate(&cfg).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert_eq!(report.fringe_charge, report.signal().measured);
    }
}

#[test]
fn fringe_magnitude_survives_noise() {
    for fraction in [0.05, 0.10] {
        for l in [-3, -2, -1, 1, 2, 3] {
            for seed in 0..3 {
                let noisy = with_noise(&interferogram(l), fraction, seed);
                let est = fringe_charge(&noisy, None).unwrap();
                assert_eq!(
                    est.charge.abs(),
                    l.abs(),
                    "l={l} noise={fraction} seed={seed}"
                );
            }
        }
    }
}

#[test]
fn pipeline_noise_is_seeded() {
    let mut cfg = ScenarioConfig::resolve("fig2")
        .unwrap()
        .with_grid(256)
        .unwrap();
    cfg.hologram.period = 16.0 * cfg.grid_spec().unwrap().pitch();
    cfg.noise = 0.05;
    let (a, art_a) = simulate(&cfg).unwrap();
    let (b, art_b) = simulate(&cfg).unwrap();
    assert_eq!(art_a.interferogram, art_b.interferogram);
    assert_eq!(a.measured_arms, 2);
    assert!(b.passed());
    cfg.seed = 7;
    let (_, art_c) = simulate(&cfg).unwrap();
    assert_ne!(art_a.interferogram, art_c.interferogram);
}
