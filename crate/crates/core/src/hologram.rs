//! Fork-dislocation amplitude holograms and far-field order extraction.
//!
//! A grating with an edge dislocation of charge `l_h` writes the phase
//! `m * (2 pi x / period - l_h * theta)` onto diffraction order `m`. Orders are
//! separated in the discrete spectrum of `input * transmission`, filtered with
//! a circular window and demodulated back to the optical axis.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec};
use crate::spectral;

pub const MAX_HOLOGRAM_CHARGE: i32 = 8;

/// Default window half-width as a fraction of the carrier frequency `1/period`.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskMode {
    Sinusoidal,
    #[default]
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HologramSpec {
    /// Embedded dislocation charge `l_h`.
    pub charge: i32,
    /// Grating period in meters.
    pub period: f64,
    /// Position of the fork center relative to the beam axis (meters).
    pub offset: (f64, f64),
    pub mode: MaskMode,
    /// Binary mode only: pixels whose sinusoidal transmission reaches `fill`
    /// become transparent.
    pub fill: f64,
}

impl HologramSpec {
    pub fn new(charge: i32, period: f64) -> Self {
        HologramSpec {
            charge,
            period,
            offset: (0.0, 0.0),
            mode: MaskMode::Binary,
            fill: 0.5,
        }
    }

    pub fn with_mode(mut self, mode: MaskMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_offset(mut self, offset: (f64, f64)) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_fill(mut self, fill: f64) -> Self {
        self.fill = fill;
        self
    }

    fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.charge.abs() > MAX_HOLOGRAM_CHARGE {
            return Err(Error::Parameter(format!(
                "hologram charge {} exceeds the cap of {MAX_HOLOGRAM_CHARGE}",
                self.charge
            )));
        }
        if !(0.0..=1.0).contains(&self.fill) {
            return Err(Error::Parameter(format!(
                "fill {} outside [0, 1]",
                self.fill
            )));
        }
        if !(self.period > 2.0 * grid.pitch()) || !self.period.is_finite() {
            return Err(Error::Sampling {
                period: self.period,
                pitch: grid.pitch(),
            });
        }
        Ok(())
    }

    /// Grating phase `2 pi x / period - l_h * atan2(y - y0, x - x0)`.
    pub fn phase(&self, x: f64, y: f64) -> f64 {
        2.0 * PI * x / self.period
            - self.charge as f64 * (y - self.offset.1).atan2(x - self.offset.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderWindow {
    pub order: i32,
    /// Radius of the circular pass band in cycles per meter.
    pub half_width: f64,
}

impl OrderWindow {
    pub fn new(order: i32, half_width: f64) -> Self {
        OrderWindow { order, half_width }
    }

    /// Window with the default half-width for a grating of `period`.
    pub fn for_period(order: i32, period: f64) -> Self {
        Self::new(order, DEFAULT_WINDOW_FRACTION / period)
    }
}

/// Real transmission of the fork grating, values in `[0, 1]`.
pub fn fork_transmission(spec: &HologramSpec, grid: &GridSpec) -> Result<ComplexField> {
    spec.validate(grid)?;
    ComplexField::from_fn(*grid, |x, y| {
        let t = 0.5 * (1.0 + spec.phase(x, y).cos());
        let t = match spec.mode {
            MaskMode::Sinusoidal => t,
            MaskMode::Binary if t >= spec.fill => 1.0,
            MaskMode::Binary => 0.0,
        };
        Complex64::new(t, 0.0)
    })
}

/// Illuminates the hologram with `input` and returns diffraction order
/// `window.order`, shifted back onto the optical axis.
pub fn diffract_and_extract(
    input: &ComplexField,
    spec: &HologramSpec,
    window: &OrderWindow,
) -> Result<ComplexField> {
    let t = fork_transmission(spec, input.grid())?;
    extract_order(input, &t, spec.period, window)
}

/// Order extraction for an arbitrary transmission mask with carrier `period`.
pub fn extract_order(
    input: &ComplexField,
    transmission: &ComplexField,
    period: f64,
    window: &OrderWindow,
) -> Result<ComplexField> {
    let grid = *input.grid();
    if transmission.grid() != &grid {
        return Err(Error::ShapeMismatch);
    }
    let carrier = 1.0 / period;
    if !(window.half_width > 0.0 && window.half_width < 0.5 * carrier) {
        return Err(Error::Extraction(format!(
            "half-width {:.4e} must lie in (0, {:.4e}) so adjacent orders stay disjoint",
            window.half_width,
            0.5 * carrier
        )));
    }
    let nyquist = 0.5 / grid.pitch();
    let center = window.order as f64 * carrier;
    if center.abs() + window.half_width > nyquist {
        return Err(Error::Extraction(format!(
            "order {} at {center:.4e} 1/m exceeds the grid Nyquist limit {nyquist:.4e} 1/m",
            window.order
        )));
    }

    let n = grid.n();
    let mut spectrum: Vec<Complex64> = input
        .values()
        .iter()
        .zip(transmission.values())
        .map(|(a, b)| a * b)
        .collect();
    spectral::fft2(&mut spectrum, n);

    let r2 = window.half_width * window.half_width;
    for ki in 0..n {
        let fy = spectral::bin_frequency(ki, n, grid.pitch());
        for kj in 0..n {
            let fx = spectral::bin_frequency(kj, n, grid.pitch()) - center;
            if fx * fx + fy * fy > r2 {
                spectrum[ki * n + kj] = Complex64::new(0.0, 0.0);
            }
        }
    }
    spectral::ifft2(&mut spectrum, n);

    // Demodulate the carrier exactly, including non-integer bin offsets.
    for (idx, v) in spectrum.iter_mut().enumerate() {
        let x = grid.x(idx % n);
        *v *= Complex64::from_polar(1.0, -2.0 * PI * center * x);
    }
    ComplexField::new(grid, spectrum)
}

/// Fraction of the input power carried into the selected order.
pub fn diffraction_efficiency(
    spec: &HologramSpec,
    window: &OrderWindow,
    input: &ComplexField,
) -> Result<f64> {
    let t = fork_transmission(spec, input.grid())?;
    efficiency_of(input, &t, spec.period, window)
}

/// [`diffraction_efficiency`] for an arbitrary transmission mask.
pub fn efficiency_of(
    input: &ComplexField,
    transmission: &ComplexField,
    period: f64,
    window: &OrderWindow,
) -> Result<f64> {
    let p_in = input.power();
    if p_in <= 0.0 {
        return Err(Error::DegenerateInput);
    }
    let order = extract_order(input, transmission, period, window)?;
    Ok((order.power() / p_in).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{conjugate, synthesize_lg, LgSpec};

    const W: f64 = 1e-3;

    fn grid(n: usize) -> GridSpec {
        GridSpec::with_extent(n, 8.0 * W).unwrap()
    }

    /// Raw winding in turns of samples on a circle about the origin.
    fn turns(f: &ComplexField, radius: f64) -> f64 {
        let m = 1024;
        let pts: Vec<_> = (0..=m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                f.sample(radius * t.cos(), radius * t.sin()).unwrap()
            })
            .collect();
        pts.windows(2).map(|w| (w[1] / w[0]).arg()).sum::<f64>() / (2.0 * PI)
    }

    #[test]
    fn straight_grating_without_dislocation() {
        let g = grid(64);
        let t = fork_transmission(&HologramSpec::new(0, 16.0 * g.pitch()), &g).unwrap();
        let first: Vec<_> = (0..64).map(|j| t.get(0, j)).collect();
        for i in 1..64 {
            for (j, v) in first.iter().enumerate() {
                assert_eq!(t.get(i, j), *v);
            }
        }
        assert!(t.values().iter().all(|v| v.re == 0.0 || v.re == 1.0));
    }

    #[test]
    fn sinusoidal_mask_stays_in_unit_interval() {
        let g = grid(64);
        let spec = HologramSpec::new(2, 8.0 * g.pitch()).with_mode(MaskMode::Sinusoidal);
        let t = fork_transmission(&spec, &g).unwrap();
        assert!(t
            .values()
            .iter()
            .all(|v| (0.0..=1.0).contains(&v.re) && v.im == 0.0));
    }

    /// Grating-line terminations: a loop around the fork crosses
    /// `|m * l_h|` more bright lines on one side than on the other.
    fn dislocation_multiplicity(spec: &HologramSpec) -> i32 {
        let m = 4096;
        let radius = 3.0 * spec.period;
        let phases: Vec<f64> = (0..=m)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / m as f64;
                let (x, y) = (radius * t.cos(), radius * t.sin());
                spec.phase(x, y)
            })
            .collect();
        let mut total = 0.0;
        for w in phases.windows(2) {
            let d = w[1] - w[0];
            total += (d + PI).rem_euclid(2.0 * PI) - PI;
        }
        (total / (2.0 * PI)).round() as i32
    }

    #[test]
    fn fork_multiplicity_matches_embedded_charge() {
        for l in -3..=3 {
            let spec = HologramSpec::new(l, 1e-4);
            assert_eq!(dislocation_multiplicity(&spec), -l);
        }
    }

    #[test]
    fn single_fork_has_one_extra_line_on_one_side() {
        // Count bright-dark transitions along rows above and below the fork.
        let g = grid(256);
        let spec = HologramSpec::new(1, 16.0 * g.pitch());
        let t = fork_transmission(&spec, &g).unwrap();
        let edges = |row: usize| {
            (1..256)
                .filter(|&j| t.get(row, j).re != t.get(row, j - 1).re)
                .count() as i64
        };
        // mirror-image rows 10.5 pixels either side of the fork
        let above = edges(138);
        let below = edges(117);
        assert_eq!(
            (above - below).abs(),
            2,
            "one extra bright line = two extra edges"
        );

        let plain = fork_transmission(&HologramSpec::new(0, 16.0 * g.pitch()), &g).unwrap();
        let plain_edges = |row: usize| {
            (1..256)
                .filter(|&j| plain.get(row, j).re != plain.get(row, j - 1).re)
                .count()
        };
        assert_eq!(plain_edges(117), plain_edges(138));
    }

    #[test]
    fn rejects_undersampled_grating_and_bad_windows() {
        let g = grid(64);
        let p = g.pitch();
        assert!(matches!(
            fork_transmission(&HologramSpec::new(1, 2.0 * p), &g),
            Err(Error::Sampling { .. })
        ));
        let input = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
        let spec = HologramSpec::new(1, 8.0 * p);
        let too_wide = OrderWindow::new(1, 0.5 / spec.period);
        assert!(matches!(
            diffract_and_extract(&input, &spec, &too_wide),
            Err(Error::Extraction(_))
        ));
        let beyond_nyquist = OrderWindow::for_period(4, spec.period);
        assert!(matches!(
            diffract_and_extract(&input, &spec, &beyond_nyquist),
            Err(Error::Extraction(_))
        ));
        assert!(HologramSpec::new(9, 8.0 * p).validate(&g).is_err());
    }

    #[test]
    fn orders_carry_m_times_lh() {
        let g = grid(256);
        let input = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
        let spec = HologramSpec::new(1, 16.0 * g.pitch());
        for m in -1..=1 {
            let out = diffract_and_extract(&input, &spec, &OrderWindow::for_period(m, spec.period))
                .unwrap();
            // exp(-i l phi) convention: charge l winds by -l turns
            assert!((turns(&out, W) + m as f64).abs() < 1e-6, "order {m}");
        }
    }

    #[test]
    fn zero_input_is_degenerate() {
        let g = grid(64);
        let zero = ComplexField::filled(g, Complex64::new(0.0, 0.0)).unwrap();
        let spec = HologramSpec::new(1, 8.0 * g.pitch());
        assert!(matches!(
            diffraction_efficiency(&spec, &OrderWindow::for_period(1, spec.period), &zero),
            Err(Error::DegenerateInput)
        ));
    }

    #[test]
    fn transparent_mask_passes_everything_in_zeroth_order() {
        let g = grid(512);
        let input = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
        let ones = ComplexField::filled(g, Complex64::new(1.0, 0.0)).unwrap();
        let period = 16.0 * g.pitch();
        let eff =
            efficiency_of(&input, &ones, period, &OrderWindow::for_period(0, period)).unwrap();
        assert!((eff - 1.0).abs() < 1e-12, "{eff}");
    }

    #[test]
    fn sinusoidal_first_order_is_one_sixteenth() {
        // 0.5 (1 + cos psi) = 0.5 + 0.25 e^{i psi} + 0.25 e^{-i psi}
        let g = grid(512);
        let input = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
        let spec = HologramSpec::new(1, 16.0 * g.pitch()).with_mode(MaskMode::Sinusoidal);
        for m in [-1, 1] {
            let eff =
                diffraction_efficiency(&spec, &OrderWindow::for_period(m, spec.period), &input)
                    .unwrap();
            assert!((eff - 1.0 / 16.0).abs() < 0.002, "order {m}: {eff}");
        }
    }

    #[test]
    fn efficiency_grows_toward_half_duty() {
        let g = grid(256);
        let input = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
        let base = HologramSpec::new(1, 16.0 * g.pitch());
        let w = OrderWindow::for_period(1, base.period);
        let eff = |fill| diffraction_efficiency(&base.with_fill(fill), &w, &input).unwrap();
        let (a, b, c) = (eff(0.9), eff(0.7), eff(0.5));
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    #[test]
    fn opposite_orders_are_conjugate() {
        let g = grid(256);
        let input = synthesize_lg(&LgSpec::gaussian(W), &g).unwrap();
        let spec = HologramSpec::new(2, 16.0 * g.pitch());
        let plus =
            diffract_and_extract(&input, &spec, &OrderWindow::for_period(1, spec.period)).unwrap();
        let minus =
            diffract_and_extract(&input, &spec, &OrderWindow::for_period(-1, spec.period)).unwrap();
        let (pp, pm) = (plus.power(), minus.power());
        assert!(((pp - pm) / pp).abs() < 1e-9);
        let peak = plus.max_abs();
        for (a, b) in conjugate(&plus).values().iter().zip(minus.values()) {
            assert!((a - b).norm() < 1e-9 * peak);
        }
    }

    #[test]
    fn disjoint_orders_never_exceed_input_power() {
        let g = grid(256);
        let input = synthesize_lg(&LgSpec::new(1, 0, W), &g).unwrap();
        let spec = HologramSpec::new(1, 16.0 * g.pitch());
        let total: f64 = (-3..=3)
            .map(|m| {
                diffraction_efficiency(&spec, &OrderWindow::for_period(m, spec.period), &input)
                    .unwrap()
            })
            .sum();
        assert!(total <= 1.0 + 1e-6, "{total}");
        // binary 50% duty: 1/4 + 2/pi^2 + 2/(9 pi^2)
        let expected = 0.25 + 2.0 / (PI * PI) * (1.0 + 1.0 / 9.0);
        assert!((total - expected).abs() < 0.01, "{total} vs {expected}");
    }
}
