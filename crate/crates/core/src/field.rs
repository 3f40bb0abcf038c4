//! Complex scalar fields on square sample grids, analytic Laguerre-Gaussian
//! synthesis, and the elementary transforms applied between optical elements.
//!
//! Grids are symmetric about their center: sample `j` of a row sits at
//! `x = (j - (n-1)/2) * pitch + center.x`. The center therefore falls between
//! pixels, which keeps mirror operations pixel-exact and keeps the vortex core
//! off any sample.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral;

/// Largest |l| accepted by [`synthesize_lg`].
pub const MAX_LG_CHARGE: i32 = 32;

/// Sign of the azimuthal factor carried by a mode of charge `l`.
///
/// `Negative` is the `exp(-i l phi)` form and is the default everywhere in the
/// crate. Charge estimators report charges in the convention they are given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    #[default]
    Negative,
    Positive,
}

impl PhaseConvention {
    /// Multiplier of `l * phi` in the exponent.
    pub fn sign(self) -> f64 {
        match self {
            PhaseConvention::Negative => -1.0,
            PhaseConvention::Positive => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    pitch: f64,
    center: (f64, f64),
}

impl GridSpec {
    pub fn new(n: usize, pitch: f64) -> Result<Self> {
        Self::with_center(n, pitch, (0.0, 0.0))
    }

    pub fn with_center(n: usize, pitch: f64, center: (f64, f64)) -> Result<Self> {
        if n < 16 {
            return Err(Error::Grid(format!("n = {n} is below the minimum of 16")));
        }
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::Grid(format!("pitch must be positive, got {pitch}")));
        }
        if !(center.0.is_finite() && center.1.is_finite()) {
            return Err(Error::Grid("center must be finite".into()));
        }
        Ok(GridSpec { n, pitch, center })
    }

    /// Grid whose side spans `extent` meters.
    pub fn with_extent(n: usize, extent: f64) -> Result<Self> {
        Self::new(n, extent / n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Side length in meters.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.pitch
    }

    fn offset(&self, k: usize) -> f64 {
        (k as f64 - (self.n as f64 - 1.0) / 2.0) * self.pitch
    }

    /// Physical x of column `j`.
    pub fn x(&self, j: usize) -> f64 {
        self.offset(j) + self.center.0
    }

    /// Physical y of row `i`.
    pub fn y(&self, i: usize) -> f64 {
        self.offset(i) + self.center.1
    }

    /// Fractional (row, column) of a physical point.
    pub fn to_index(&self, x: f64, y: f64) -> (f64, f64) {
        let half = (self.n as f64 - 1.0) / 2.0;
        (
            (y - self.center.1) / self.pitch + half,
            (x - self.center.0) / self.pitch + half,
        )
    }

    /// Iterates `(row, col, x, y)` in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let y = self.y(i);
            (0..self.n).map(move |j| (i, j, self.x(j), y))
        })
    }
}

/// Bilinear interpolation of row-major samples. `None` outside the sample hull.
pub(crate) fn bilinear<T>(grid: &GridSpec, values: &[T], x: f64, y: f64) -> Option<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = grid.n();
    let (fi, fj) = grid.to_index(x, y);
    let last = (n - 1) as f64;
    if !(fi >= 0.0 && fj >= 0.0 && fi <= last && fj <= last) {
        return None;
    }
    let i0 = (fi.floor() as usize).min(n - 2);
    let j0 = (fj.floor() as usize).min(n - 2);
    let ti = fi - i0 as f64;
    let tj = fj - j0 as f64;
    let at = |i: usize, j: usize| values[i * n + j];
    let top = at(i0, j0) * (1.0 - tj) + at(i0, j0 + 1) * tj;
    let bottom = at(i0 + 1, j0) * (1.0 - tj) + at(i0 + 1, j0 + 1) * tj;
    Some(top * (1.0 - ti) + bottom * ti)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite(k));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let values = grid.coords().map(|(_, _, x, y)| f(x, y)).collect();
        Self::new(grid, values)
    }

    pub fn filled(grid: GridSpec, value: Complex64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.grid.n + col]
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ComplexField { grid, values }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Integrated intensity, `sum |E|^2 * pitch^2`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.pitch * self.grid.pitch
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sample(&self, x: f64, y: f64) -> Option<Complex64> {
        bilinear(&self.grid, &self.values, x, y)
    }

    pub fn intensity(&self) -> Intensity {
        Intensity {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }
}

/// Non-negative real image on a grid (camera frames, interferograms).
#[derive(Debug, Clone, PartialEq)]
pub struct Intensity {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Intensity {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite(k));
        }
        Ok(Intensity { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.n + col]
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        bilinear(&self.grid, &self.values, x, y)
    }

    /// Mirror about the horizontal axis (rows reversed).
    pub fn flip_vertical(&self) -> Intensity {
        let n = self.grid.n;
        let values = self
            .values
            .chunks(n)
            .rev()
            .flat_map(|row| row.iter().copied())
            .collect();
        Intensity {
            grid: self.grid,
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgSpec {
    pub l: i32,
    pub p: u32,
    /// Half-beam width `w` in meters.
    pub waist: f64,
    pub amplitude: f64,
    pub convention: PhaseConvention,
}

impl LgSpec {
    pub fn new(l: i32, p: u32, waist: f64) -> Self {
        LgSpec {
            l,
            p,
            waist,
            amplitude: 1.0,
            convention: PhaseConvention::Negative,
        }
    }

    pub fn gaussian(waist: f64) -> Self {
        Self::new(0, 0, waist)
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_convention(mut self, convention: PhaseConvention) -> Self {
        self.convention = convention;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.l.abs() > MAX_LG_CHARGE {
            return Err(Error::Parameter(format!(
                "|l| = {} exceeds the cap of {MAX_LG_CHARGE}",
                self.l.abs()
            )));
        }
        if !(self.waist > 0.0 && self.waist.is_finite()) {
            return Err(Error::Parameter(format!(
                "waist must be positive, got {}",
                self.waist
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Parameter("amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Field value at polar coordinates about the beam axis.
    pub fn evaluate(&self, r: f64, phi: f64) -> Complex64 {
        let abs_l = self.l.unsigned_abs();
        let rho = r / self.waist;
        let radial = self.amplitude
            * (SQRT_2 * rho).powi(abs_l as i32)
            * (-rho * rho).exp()
            * laguerre(self.p, abs_l, 2.0 * rho * rho);
        Complex64::from_polar(radial, self.convention.sign() * self.l as f64 * phi)
    }
}

/// Generalized Laguerre polynomial `L_p^alpha(x)` by the three-term recurrence.
pub fn laguerre(p: u32, alpha: u32, x: f64) -> f64 {
    let a = alpha as f64;
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Samples an LG mode centered on the physical origin.
pub fn synthesize_lg(spec: &LgSpec, grid: &GridSpec) -> Result<ComplexField> {
    spec.validate()?;
    let required = 4.0 * spec.waist;
    if grid.extent() < required {
        return Err(Error::Containment {
            extent: grid.extent(),
            required,
        });
    }
    ComplexField::from_fn(*grid, |x, y| spec.evaluate(x.hypot(y), y.atan2(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Mirror about the horizontal axis: `y -> -y`.
    Horizontal,
    /// Mirror about the vertical axis: `x -> -x`.
    Vertical,
}

/// Mirror image of the samples about the grid center.
pub fn reflect(f: &ComplexField, axis: Axis) -> ComplexField {
    let n = f.grid.n;
    let mut values = Vec::with_capacity(f.values.len());
    for i in 0..n {
        for j in 0..n {
            let (si, sj) = match axis {
                Axis::Horizontal => (n - 1 - i, j),
                Axis::Vertical => (i, n - 1 - j),
            };
            values.push(f.values[si * n + sj]);
        }
    }
    ComplexField::from_parts(f.grid, values)
}

pub fn conjugate(f: &ComplexField) -> ComplexField {
    ComplexField::from_parts(f.grid, f.values.iter().map(|v| v.conj()).collect())
}

/// Per-pixel product of `fields`, conjugating those whose mask bit is set.
pub fn pointwise_product(
    fields: &[&ComplexField],
    conjugate_mask: &[bool],
) -> Result<ComplexField> {
    if fields.len() != conjugate_mask.len() {
        return Err(Error::Parameter(format!(
            "{} fields but {} mask bits",
            fields.len(),
            conjugate_mask.len()
        )));
    }
    let first = fields
        .first()
        .ok_or_else(|| Error::Parameter("empty product".into()))?;
    if fields.iter().any(|f| f.grid != first.grid) {
        return Err(Error::ShapeMismatch);
    }
    let mut values = vec![Complex64::new(1.0, 0.0); first.grid.len()];
    for (f, &conj) in fields.iter().zip(conjugate_mask) {
        for (acc, &v) in values.iter_mut().zip(&f.values) {
            *acc *= if conj { v.conj() } else { v };
        }
    }
    ComplexField::new(first.grid, values)
}

/// Shifts the field by `(dx, dy)` meters using the Fourier shift theorem.
/// The grid is treated as periodic.
pub fn translate(f: &ComplexField, dx: f64, dy: f64) -> ComplexField {
    let grid = f.grid;
    let n = grid.n;
    let mut data = f.values.clone();
    spectral::fft2(&mut data, n);
    for ki in 0..n {
        let fy = spectral::bin_frequency(ki, n, grid.pitch);
        for kj in 0..n {
            let fx = spectral::bin_frequency(kj, n, grid.pitch);
            data[ki * n + kj] *= Complex64::from_polar(1.0, -2.0 * PI * (fx * dx + fy * dy));
        }
    }
    spectral::ifft2(&mut data, n);
    ComplexField::from_parts(grid, data)
}
