//! Two-dimensional discrete Fourier transforms over square row-major buffers.

use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

fn transform(data: &mut [Complex64], n: usize, direction: Direction) {
    debug_assert_eq!(data.len(), n * n);
    let mut planner = FftPlanner::<f64>::new();
    let fft = match direction {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    // rows
    fft.process(data);
    // columns via transpose
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    transpose(data, &mut t, n);
    fft.process(&mut t);
    transpose(&t, data, n);
    if direction == Direction::Inverse {
        let scale = 1.0 / (n * n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

/// Unnormalized forward transform, `F[k] = sum f[j] exp(-2 pi i jk/n)` per axis.
pub fn fft2(data: &mut [Complex64], n: usize) {
    transform(data, n, Direction::Forward);
}

/// Inverse of [`fft2`], including the `1/n^2` factor.
pub fn ifft2(data: &mut [Complex64], n: usize) {
    transform(data, n, Direction::Inverse);
}

/// Spatial frequency (cycles per meter) of DFT bin `k` on `n` samples at `pitch`.
pub fn bin_frequency(k: usize, n: usize, pitch: f64) -> f64 {
    let signed = if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    };
    signed / (n as f64 * pitch)
}
