//! Four-wave-mixing signal synthesis and energy/momentum bookkeeping.
//!
//! The signal is the pointwise product `chi3 * E_F * E_B * conj(E_P)` on a
//! single transverse plane. Its charge follows `l_S = l_F + l_B - l_P`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{pointwise_product, ComplexField};

/// Rb D1 line used by the forward pump and probe presets (meters).
pub const RB_D1_WAVELENGTH: f64 = 795e-9;
/// Rb D2 line used by the backward pump preset (meters).
pub const RB_D2_WAVELENGTH: f64 = 780e-9;

const UNIT_TOLERANCE: f64 = 1e-12;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamRole {
    ForwardPump,
    BackwardPump,
    Probe,
}

impl BeamRole {
    pub fn label(self) -> &'static str {
        match self {
            BeamRole::ForwardPump => "forward_pump",
            BeamRole::BackwardPump => "backward_pump",
            BeamRole::Probe => "probe",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamLine {
    field: ComplexField,
    wavelength: f64,
    direction: Vec3,
    role: BeamRole,
}

impl BeamLine {
    pub fn new(
        field: ComplexField,
        wavelength: f64,
        direction: Vec3,
        role: BeamRole,
    ) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Parameter(format!(
                "{}: wavelength must be positive, got {wavelength}",
                role.label()
            )));
        }
        if (norm(direction) - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Parameter(format!(
                "{}: direction {direction:?} is not a unit vector",
                role.label()
            )));
        }
        Ok(BeamLine {
            field,
            wavelength,
            direction,
            role,
        })
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn role(&self) -> BeamRole {
        self.role
    }

    /// Wavevector `2 pi / lambda * direction`.
    pub fn wavevector(&self) -> Vec3 {
        scale(self.direction, 2.0 * PI / self.wavelength)
    }

    pub fn with_field(&self, field: ComplexField) -> BeamLine {
        BeamLine {
            field,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingScenario {
    forward: BeamLine,
    backward: BeamLine,
    probe: BeamLine,
    chi3: Complex64,
}

impl MixingScenario {
    pub fn new(
        forward: BeamLine,
        backward: BeamLine,
        probe: BeamLine,
        chi3: Complex64,
    ) -> Result<Self> {
        let grid = forward.field.grid();
        if backward.field.grid() != grid || probe.field.grid() != grid {
            return Err(Error::ShapeMismatch);
        }
        if !(chi3.re.is_finite() && chi3.im.is_finite()) {
            return Err(Error::Parameter("chi3 must be finite".into()));
        }
        Ok(MixingScenario {
            forward,
            backward,
            probe,
            chi3,
        })
    }

    pub fn forward(&self) -> &BeamLine {
        &self.forward
    }

    pub fn backward(&self) -> &BeamLine {
        &self.backward
    }

    pub fn probe(&self) -> &BeamLine {
        &self.probe
    }

    pub fn chi3(&self) -> Complex64 {
        self.chi3
    }

    pub fn with_chi3(&self, chi3: Complex64) -> MixingScenario {
        MixingScenario {
            chi3,
            ..self.clone()
        }
    }

    pub fn with_probe(&self, probe: BeamLine) -> Result<MixingScenario> {
        Self::new(
            self.forward.clone(),
            self.backward.clone(),
            probe,
            self.chi3,
        )
    }
}

/// Signal field `chi3 * E_F * E_B * conj(E_P)`.
pub fn mix(s: &MixingScenario) -> Result<ComplexField> {
    let product = pointwise_product(
        &[&s.forward.field, &s.backward.field, &s.probe.field],
        &[false, false, true],
    )?;
    let chi3 = s.chi3;
    product.map(|v| chi3 * v)
}

/// Expected signal charge `l_F + l_B - l_P`.
pub fn charge_ledger(l_forward: i32, l_backward: i32, l_probe: i32) -> i32 {
    signed_charge_sum(&[(l_forward, false), (l_backward, false), (l_probe, true)])
}

/// Charge of an N-wave product: each `(charge, conjugated)` input contributes
/// `+charge`, or `-charge` when it enters conjugated.
pub fn signed_charge_sum(inputs: &[(i32, bool)]) -> i32 {
    inputs
        .iter()
        .map(|&(l, conj)| if conj { -l } else { l })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchReport {
    pub signal_wavelength: f64,
    /// `|k_F + k_B - k_P - k_S|` in 1/m.
    pub k_residual: f64,
    /// `|nu_F + nu_B - nu_P - nu_S| / nu_S`.
    pub omega_residual: f64,
    pub signal_direction: Vec3,
}

/// Solves energy conservation for the signal wavelength and reports how well
/// the wavevectors close.
pub fn phase_match(s: &MixingScenario, signal_direction_hint: Option<Vec3>) -> Result<MatchReport> {
    let (f, b, p) = (&s.forward, &s.backward, &s.probe);
    // Cancel the probe against the closer pump first so equal wavelengths
    // drop out exactly; the result is symmetric in the two pumps.
    let inv_p = 1.0 / p.wavelength;
    let (near, other) = if (1.0 / f.wavelength - inv_p).abs() <= (1.0 / b.wavelength - inv_p).abs()
    {
        (f.wavelength, b.wavelength)
    } else {
        (b.wavelength, f.wavelength)
    };
    let denom = 1.0 + other * (1.0 / near - inv_p);
    let inv = denom / other;
    if !(denom > 0.0) {
        return Err(Error::Unphysical {
            inverse_wavelength: inv,
        });
    }
    let signal_wavelength = other / denom;

    let k_sum = sub(add(f.wavevector(), b.wavevector()), p.wavevector());
    let magnitude = norm(k_sum);
    // relative to |k_S| so exact cancellation is not mistaken for a direction
    let signal_direction = if magnitude > 1e-12 * 2.0 * PI * inv {
        scale(k_sum, 1.0 / magnitude)
    } else {
        let hint = signal_direction_hint.ok_or(Error::DirectionUndefined)?;
        let len = norm(hint);
        if !(len > 0.0) {
            return Err(Error::DirectionUndefined);
        }
        scale(hint, 1.0 / len)
    };
    let k_signal = scale(signal_direction, 2.0 * PI / signal_wavelength);
    let nu_signal = 1.0 / signal_wavelength;
    let nu_balance = 1.0 / f.wavelength + 1.0 / b.wavelength - inv_p;
    Ok(MatchReport {
        signal_wavelength,
        k_residual: norm(sub(k_sum, k_signal)),
        omega_residual: (nu_balance - nu_signal).abs() / nu_signal,
        signal_direction,
    })
}

/// Angle in radians between two nonzero vectors.
pub fn angle_between(a: Vec3, b: Vec3) -> f64 {
    // atan2 of |a x b| and a.b stays accurate for nearly parallel vectors
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    norm(cross).atan2(dot(a, b))
}

/// Unit vector in the x-z plane tilted by `angle` from +z toward +x.
pub fn tilted_z(angle: f64) -> Vec3 {
    [angle.sin(), 0.0, angle.cos()]
}

pub fn normalize(v: Vec3) -> Result<Vec3> {
    let len = norm(v);
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::Parameter(format!("cannot normalize {v:?}")));
    }
    Ok(scale(v, 1.0 / len))
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}
