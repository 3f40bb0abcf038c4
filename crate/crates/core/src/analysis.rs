//! Topological-charge measurement.
//!
//! Two independent estimators: the phase-winding integral on a complex field,
//! and azimuthal harmonic analysis of an intensity-only interferogram. The
//! interferogram of an asymmetric Mach-Zehnder analyzer varies on a ring as
//! `1 + cos(2 l phi + psi(r))`, so its dominant harmonic is `2|l|` and the
//! radial drift of `psi` gives the sign of `l`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Intensity, PhaseConvention};

pub const DEFAULT_RING_SAMPLES: usize = 512;
/// Winding requires at least this many samples on the loop.
pub const MIN_RING_SAMPLES: usize = 256;
/// Ring amplitude floor relative to the field maximum.
pub const PHASE_FLOOR: f64 = 1e-6;
/// Minimum fringe contrast (dominant harmonic amplitude over ring mean).
pub const MIN_FRINGE_CONTRAST: f64 = 0.01;
/// Second ring for the spiral-skew comparison, relative to the first.
pub const SKEW_RING_STEP: f64 = 0.1;
/// Phase drift below this (radians) is treated as no skew.
pub const SKEW_TIE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeMethod {
    Winding,
    Fringe,
}

impl ChargeMethod {
    pub fn name(self) -> &'static str {
        match self {
            ChargeMethod::Winding => "winding",
            ChargeMethod::Fringe => "fringe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeEstimate {
    pub charge: i32,
    pub method: ChargeMethod,
    /// 0 is a perfect measurement. For the fringe method a residual of 1
    /// flags a magnitude-only result whose sign could not be recovered.
    pub residual: f64,
    /// Ring radius in meters (grid units for images without a physical pitch).
    pub ring_radius: f64,
}

impl std::fmt::Display for ChargeEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "charge={} method={} residual={:e}",
            self.charge,
            self.method.name(),
            self.residual
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingSettings {
    pub samples: usize,
    pub convention: PhaseConvention,
}

impl Default for WindingSettings {
    fn default() -> Self {
        WindingSettings {
            samples: DEFAULT_RING_SAMPLES,
            convention: PhaseConvention::Negative,
        }
    }
}

/// Charge of `f` enclosed by the circle of `radius` about the origin.
pub fn winding_number(f: &ComplexField, radius: f64) -> Result<ChargeEstimate> {
    winding_number_with(f, radius, &WindingSettings::default())
}

pub fn winding_number_with(
    f: &ComplexField,
    radius: f64,
    settings: &WindingSettings,
) -> Result<ChargeEstimate> {
    if settings.samples < MIN_RING_SAMPLES {
        return Err(Error::Parameter(format!(
            "{} ring samples, need at least {MIN_RING_SAMPLES}",
            settings.samples
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!(
            "ring radius must be positive, got {radius}"
        )));
    }
    let ring = ring_points(settings.samples, radius)
        .map(|(x, y)| f.sample(x, y))
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::RingOutside(radius))?;

    let peak = f.max_abs();
    let floor = ring.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(peak > 0.0) || floor <= PHASE_FLOOR * peak {
        return Err(Error::UndefinedPhase {
            radius,
            ratio: if peak > 0.0 { floor / peak } else { 0.0 },
        });
    }

    let turns = (0..ring.len())
        .map(|k| (ring[(k + 1) % ring.len()] / ring[k]).arg())
        .sum::<f64>()
        / (2.0 * PI);
    // exp(s i l phi) winds by s*l turns
    let signed = turns * settings.convention.sign();
    let charge = signed.round();
    Ok(ChargeEstimate {
        charge: charge as i32,
        method: ChargeMethod::Winding,
        residual: (signed - charge).abs(),
        ring_radius: radius,
    })
}

fn ring_points(samples: usize, radius: f64) -> impl Iterator<Item = (f64, f64)> {
    (0..samples).map(move |k| {
        let t = 2.0 * PI * k as f64 / samples as f64;
        (radius * t.cos(), radius * t.sin())
    })
}

/// Bilinear samples of `image` on a centered ring, starting at angle 0 and
/// running counter-clockwise.
pub fn ring_samples(image: &Intensity, radius: f64, samples: usize) -> Result<Vec<f64>> {
    ring_points(samples, radius)
        .map(|(x, y)| image.sample(x, y))
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::RingOutside(radius))
}

/// Complex field on a centered ring.
pub fn ring_samples_complex(
    f: &ComplexField,
    radius: f64,
    samples: usize,
) -> Result<Vec<Complex64>> {
    ring_points(samples, radius)
        .map(|(x, y)| f.sample(x, y))
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::RingOutside(radius))
}

/// Azimuthal Fourier coefficients `c_h = (1/N) sum f_k exp(-i h theta_k)` for
/// `h = 0..=N/2`.
pub fn azimuthal_spectrum(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    (0..=n / 2)
        .map(|h| {
            samples
                .iter()
                .enumerate()
                .map(|(k, &v)| Complex64::from_polar(v, -2.0 * PI * (h * k) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Strongest nonzero harmonic and its amplitude ratio to the runner-up.
pub fn harmonic_dominance(samples: &[f64]) -> (usize, f64) {
    let spec = azimuthal_spectrum(samples);
    let mut amps: Vec<(usize, f64)> = spec
        .iter()
        .enumerate()
        .skip(1)
        .map(|(h, c)| (h, c.norm()))
        .collect();
    amps.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (h, top) = amps[0];
    let next = amps.get(1).map_or(0.0, |a| a.1);
    (
        h,
        if next > 0.0 {
            top / next
        } else {
            f64::INFINITY
        },
    )
}

/// Prominent local maxima on a closed ring: each counted maximum is separated
/// from the next by an excursion below the ring mean, so interpolation ripple
/// near dark fringes is ignored.
pub fn count_local_maxima(samples: &[f64]) -> usize {
    let n = samples.len();
    if n == 0 {
        return 0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let above: Vec<bool> = samples.iter().map(|&v| v > mean).collect();
    if above.iter().all(|&a| a) || above.iter().all(|&a| !a) {
        return 0;
    }
    (0..n)
        .filter(|&k| above[k] && !above[(k + n - 1) % n])
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeSettings {
    /// Ring radius; `None` selects the ring of maximum mean intensity.
    pub ring_radius: Option<f64>,
    pub samples: usize,
    /// Sign of the divergence mismatch that produced the spiral.
    pub mismatch_sign: f64,
    pub convention: PhaseConvention,
}

impl Default for FringeSettings {
    fn default() -> Self {
        FringeSettings {
            ring_radius: None,
            samples: DEFAULT_RING_SAMPLES,
            mismatch_sign: 1.0,
            convention: PhaseConvention::Negative,
        }
    }
}

/// Charge from a two-arm interferogram of a single-charge beam.
pub fn fringe_charge(image: &Intensity, ring_radius: Option<f64>) -> Result<ChargeEstimate> {
    fringe_charge_with(
        image,
        &FringeSettings {
            ring_radius,
            ..FringeSettings::default()
        },
    )
}

pub fn fringe_charge_with(image: &Intensity, settings: &FringeSettings) -> Result<ChargeEstimate> {
    let radius = match settings.ring_radius {
        Some(r) => r,
        None => peak_ring_radius(image).ok_or(Error::NoFringe)?,
    };
    let ring = ring_samples(image, radius, settings.samples)?;
    let spec = azimuthal_spectrum(&ring);
    let dc = spec[0].norm();
    let (h, dominant) = spec
        .iter()
        .enumerate()
        .skip(1)
        .map(|(h, c)| (h, c.norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::NoFringe)?;
    // cos(h phi) puts amplitude 1/2 into c_h
    if !(dc > 0.0) || 2.0 * dominant < MIN_FRINGE_CONTRAST * dc {
        return Err(Error::NoFringe);
    }
    if h % 2 != 0 {
        return Err(Error::InconsistentInterferogram(h));
    }
    let total: f64 = spec.iter().skip(1).map(|c| c.norm_sqr()).sum();
    let mut residual = 1.0 - dominant * dominant / total;

    // Fringe phase psi(r) drifts by mismatch * dr; for l < 0 the harmonic
    // coefficient carries -psi instead of psi.
    let outer = ring_samples(image, radius * (1.0 + SKEW_RING_STEP), settings.samples)?;
    let drift = (harmonic(&outer, h) / spec[h]).arg();
    let sign = if drift.abs() < SKEW_TIE_TOLERANCE {
        residual = 1.0;
        1
    } else {
        let s = drift.signum() * settings.mismatch_sign.signum() * -settings.convention.sign();
        s as i32
    };

    Ok(ChargeEstimate {
        charge: sign * (h / 2) as i32,
        method: ChargeMethod::Fringe,
        residual,
        ring_radius: radius,
    })
}

fn harmonic(samples: &[f64], h: usize) -> Complex64 {
    let n = samples.len();
    samples
        .iter()
        .enumerate()
        .map(|(k, &v)| Complex64::from_polar(v, -2.0 * PI * (h * k) as f64 / n as f64))
        .sum::<Complex64>()
        / n as f64
}

/// Radius of the 1-pixel ring with the largest mean intensity.
pub fn peak_ring_radius(image: &Intensity) -> Option<f64> {
    radial_profile(image)
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|(_, v)| *v > 0.0)
        .map(|(r, _)| r)
}

/// Azimuthal mean on concentric 1-pixel rings about the origin, out to the
/// largest full circle inside the grid. Radii are ring mid-points.
pub fn radial_profile(image: &Intensity) -> Vec<(f64, f64)> {
    let grid = image.grid();
    let pitch = grid.pitch();
    let bins = grid.n() / 2;
    let mut sum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for ((_, _, x, y), &v) in grid.coords().zip(image.values()) {
        let k = (x.hypot(y) / pitch) as usize;
        if k < bins {
            sum[k] += v;
            count[k] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .enumerate()
        .filter(|(_, (_, &c))| c > 0)
        .map(|(k, (&s, &c))| ((k as f64 + 0.5) * pitch, s / c as f64))
        .collect()
}

pub fn radial_profile_field(f: &ComplexField) -> Vec<(f64, f64)> {
    radial_profile(&f.intensity())
}
