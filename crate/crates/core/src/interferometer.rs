//! Asymmetric Mach-Zehnder analyzer.
//!
//! One arm passes the beam unchanged, the other mirrors it once, so a charge
//! `l` beam interferes with its own charge `-l` image. The mirrored arm also
//! carries the path phase `phase` and a radial wavefront mismatch `eta * r`
//! (or `eta * r^2`), which twists the `2|l|` petals into a spiral.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{reflect, Axis, ComplexField, Intensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockedArm {
    #[default]
    None,
    /// Only the direct arm reaches the camera.
    Reflected,
    /// Only the mirrored arm reaches the camera.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MismatchProfile {
    /// `eta * r`, eta in radians per meter.
    #[default]
    Linear,
    /// `eta * r^2`, eta in radians per square meter (ideal defocus).
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig {
    pub eta: f64,
    pub phase: f64,
    pub arm_balance: f64,
    pub blocked_arm: BlockedArm,
    pub profile: MismatchProfile,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        InterferometerConfig {
            eta: 0.0,
            phase: 0.0,
            arm_balance: 1.0,
            blocked_arm: BlockedArm::None,
            profile: MismatchProfile::Linear,
        }
    }
}

impl InterferometerConfig {
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_blocked(mut self, blocked: BlockedArm) -> Self {
        self.blocked_arm = blocked;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arm_balance >= 0.0 && self.arm_balance.is_finite()) {
            return Err(Error::Parameter(format!(
                "arm balance must be non-negative, got {}",
                self.arm_balance
            )));
        }
        if !(self.eta.is_finite() && self.phase.is_finite()) {
            return Err(Error::Parameter("eta and phase must be finite".into()));
        }
        Ok(())
    }

    fn mismatch(&self, r: f64) -> f64 {
        match self.profile {
            MismatchProfile::Linear => self.eta * r,
            MismatchProfile::Quadratic => self.eta * r * r,
        }
    }
}

/// Camera intensity `|direct + balance * exp(i (phase + mismatch(r))) * mirrored|^2`.
pub fn analyze(input: &ComplexField, cfg: &InterferometerConfig) -> Result<Intensity> {
    cfg.validate()?;
    let grid = *input.grid();
    let mirrored = reflect(input, Axis::Horizontal);
    let values = grid
        .coords()
        .zip(input.values().iter().zip(mirrored.values()))
        .map(|((_, _, x, y), (&direct, &image))| {
            let r = x.hypot(y);
            let turned =
                image * Complex64::from_polar(cfg.arm_balance, cfg.phase + cfg.mismatch(r));
            match cfg.blocked_arm {
                BlockedArm::None => (direct + turned).norm_sqr(),
                BlockedArm::Reflected => direct.norm_sqr(),
                BlockedArm::Direct => turned.norm_sqr(),
            }
        })
        .collect();
    Intensity::new(grid, values)
}

/// Angle `(phase_a - phase_b) / (2 l)`: the interferogram at `phase_a` is the
/// one at `phase_b` turned clockwise by this angle.
pub fn rotation_check(l: i32, phase_a: f64, phase_b: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::UndefinedRotation);
    }
    Ok((phase_a - phase_b) / (2.0 * l as f64))
}

/// Image rotated counter-clockwise by `angle` about the origin, bilinear,
/// zero outside the source grid.
pub fn rotate_image(image: &Intensity, angle: f64) -> Intensity {
    let grid = *image.grid();
    let (s, c) = (-angle).sin_cos();
    let values = grid
        .coords()
        .map(|(_, _, x, y)| image.sample(c * x - s * y, s * x + c * y).unwrap_or(0.0))
        .collect();
    Intensity::new(grid, values).expect("bilinear samples of a valid image stay valid")
}
