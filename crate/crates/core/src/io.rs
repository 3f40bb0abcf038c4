//! Artifact formats: complex-field text dumps, 8-bit PGM/PNG images and CSV.
//!
//! Field dump: first line `n pitch_meters`, then `n*n` lines `re im` in
//! row-major order. Images are written top row first with +y pointing up, so
//! row `n-1` of the grid is the first image row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec, Intensity};

pub fn format_field(f: &ComplexField) -> String {
    let grid = f.grid();
    let mut out = String::with_capacity(grid.len() * 48);
    let _ = writeln!(out, "{} {:e}", grid.n(), grid.pitch());
    for v in f.values() {
        let _ = writeln!(out, "{:e} {:e}", v.re, v.im);
    }
    out
}

pub fn parse_field(text: &str) -> Result<ComplexField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty field dump".into()))?;
    let mut parts = header.split_whitespace();
    let n: usize = parse_token(parts.next(), "grid size")?;
    let pitch: f64 = parse_token(parts.next(), "pitch")?;
    let grid = GridSpec::new(n, pitch)?;
    let mut values = Vec::with_capacity(grid.len());
    for (k, line) in lines.enumerate() {
        let mut parts = line.split_whitespace();
        let re: f64 = parse_token(parts.next(), "real part")?;
        let im: f64 = parse_token(parts.next(), "imaginary part")?;
        if parts.next().is_some() {
            return Err(Error::Format(format!("sample {k}: expected two columns")));
        }
        values.push(Complex64::new(re, im));
    }
    ComplexField::new(grid, values)
}

fn parse_token<T: std::str::FromStr>(token: Option<&str>, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::Format(format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::Format(format!("bad {what}: {token:?}")))
}

pub fn write_field(path: &Path, f: &ComplexField) -> Result<()> {
    fs::write(path, format_field(f))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ComplexField> {
    parse_field(&fs::read_to_string(path)?)
}

/// Peak-normalized 8-bit gray levels, top image row first.
pub fn gray_levels(image: &Intensity) -> Vec<u8> {
    let n = image.grid().n();
    let peak = image.peak();
    let scale = if peak > 0.0 { 255.0 / peak } else { 0.0 };
    let mut out = Vec::with_capacity(n * n);
    for row in (0..n).rev() {
        for col in 0..n {
            out.push((image.get(row, col) * scale).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}

pub fn encode_pgm(image: &Intensity) -> Vec<u8> {
    let n = image.grid().n();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.extend(gray_levels(image));
    out
}

pub fn write_pgm(path: &Path, image: &Intensity) -> Result<()> {
    fs::write(path, encode_pgm(image))?;
    Ok(())
}

pub fn write_png(path: &Path, image: &Intensity) -> Result<()> {
    let n = image.grid().n() as u32;
    let buf = image::GrayImage::from_raw(n, n, gray_levels(image))
        .ok_or_else(|| Error::Format("image buffer size mismatch".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Format(format!("png encode: {e}")))
}

/// Decodes a square binary PGM (P5, maxval <= 255) onto a grid of `pitch`.
pub fn decode_pgm(bytes: &[u8], pitch: f64) -> Result<Intensity> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() {
            match bytes[pos] {
                b'#' => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(Error::Format(format!(
            "not a binary PGM (magic {:?})",
            fields[0]
        )));
    }
    let width: usize = parse_token(Some(&fields[1]), "width")?;
    let height: usize = parse_token(Some(&fields[2]), "height")?;
    let maxval: usize = parse_token(Some(&fields[3]), "maxval")?;
    if width != height {
        return Err(Error::Format(format!(
            "image is {width}x{height}, expected square"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    // single whitespace byte after maxval
    pos += 1;
    let data = bytes
        .get(pos..pos + width * height)
        .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
    let grid = GridSpec::new(width, pitch)?;
    let values = data
        .chunks(width)
        .rev()
        .flat_map(|row| row.iter().map(|&b| b as f64 / maxval as f64))
        .collect();
    Intensity::new(grid, values)
}

pub fn read_pgm(path: &Path, pitch: f64) -> Result<Intensity> {
    decode_pgm(&fs::read(path)?, pitch)
}

/// Comma-separated rows under a header line, `\n` terminated.
pub fn format_csv<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.as_ref().join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<R: AsRef<[String]>>(path: &Path, header: &[&str], rows: &[R]) -> Result<()> {
    fs::write(path, format_csv(header, rows))?;
    Ok(())
}
