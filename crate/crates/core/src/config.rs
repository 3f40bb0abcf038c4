//! Scenario files: line-oriented `key = value` text with `#` comments.
//!
//! Every key is optional and falls back to the defaults of
//! [`ScenarioConfig::default`]; unknown keys are rejected so typos surface as
//! config errors.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::hologram::{MaskMode, DEFAULT_WINDOW_FRACTION};
use crate::interferometer::{InterferometerConfig, MismatchProfile};
use crate::mixer::{normalize, tilted_z, Vec3, RB_D1_WAVELENGTH, RB_D2_WAVELENGTH};

const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.cfg")),
    ("fig3", include_str!("../presets/fig3.cfg")),
    ("gaussian", include_str!("../presets/gaussian.cfg")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamSource {
    Gaussian,
    /// Analytic LG mode.
    Lg {
        charge: i32,
        radial_index: u32,
    },
    /// Gaussian diffracted by a fork hologram.
    Hologram {
        charge: i32,
        order: i32,
        fork_offset: (f64, f64),
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub source: BeamSource,
    /// Half-beam width in meters; `None` uses the scenario waist.
    pub waist: Option<f64>,
    pub wavelength: f64,
    pub direction: Vec3,
    /// Mirror reflections before the cell; an odd count flips the charge.
    pub mirrors: u32,
}

impl BeamConfig {
    fn with(wavelength: f64, direction: Vec3) -> Self {
        BeamConfig {
            source: BeamSource::Gaussian,
            waist: None,
            wavelength,
            direction,
            mirrors: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HologramSettings {
    pub period: f64,
    pub mode: MaskMode,
    pub fill: f64,
    /// Window half-width as a fraction of `1/period`.
    pub window_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: usize,
    /// Reference half-beam width `w` in meters.
    pub waist: f64,
    /// Grid side in units of `waist`.
    pub extent_waists: f64,
    pub chi3: Complex64,
    pub forward: BeamConfig,
    pub backward: BeamConfig,
    pub probe: BeamConfig,
    pub hologram: HologramSettings,
    /// Transverse shift of the probe before mixing (partial overlap).
    pub probe_offset: (f64, f64),
    pub interferometer: InterferometerConfig,
    /// Measurement ring radius in units of each beam's waist.
    pub ring_fraction: f64,
    /// Additive uniform noise on the interferogram, fraction of its peak.
    pub noise: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let waist = 1e-3;
        let grid = 512;
        let extent_waists = 8.0;
        ScenarioConfig {
            name: "custom".into(),
            grid,
            waist,
            extent_waists,
            chi3: Complex64::new(1.0, 0.0),
            forward: BeamConfig::with(RB_D1_WAVELENGTH, [0.0, 0.0, 1.0]),
            backward: BeamConfig::with(RB_D2_WAVELENGTH, [0.0, 0.0, -1.0]),
            probe: BeamConfig::with(RB_D1_WAVELENGTH, tilted_z(0.01)),
            hologram: HologramSettings {
                // 16 samples per period on the default grid
                period: 16.0 * extent_waists * waist / grid as f64,
                mode: MaskMode::Binary,
                fill: 0.5,
                window_fraction: DEFAULT_WINDOW_FRACTION,
            },
            probe_offset: (0.0, 0.0),
            interferometer: InterferometerConfig {
                eta: 2.0 * std::f64::consts::PI / waist,
                ..InterferometerConfig::default()
            },
            ring_fraction: 0.7,
            noise: 0.0,
            seed: 0,
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got {content:?}"),
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config {
                line,
                message: "empty key".into(),
            });
        }
        let entry = Entry {
            value: value.trim().to_string(),
            line,
        };
        if let Some(prev) = map.insert(key.clone(), entry) {
            return Err(Error::Config {
                line,
                message: format!("duplicate key `{key}` (first on line {})", prev.line),
            });
        }
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, Entry>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| Error::Config {
                line: e.line,
                message: format!("`{key}`: cannot parse {:?}", e.value),
            }),
        }
    }

    fn floats(&mut self, key: &str, count: usize) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        let parts: std::result::Result<Vec<f64>, _> = e
            .value
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect();
        match parts {
            Ok(v) if v.len() == count && v.iter().all(|x| x.is_finite()) => Ok(Some(v)),
            _ => Err(Error::Config {
                line: e.line,
                message: format!(
                    "`{key}`: expected {count} comma-separated numbers, got {:?}",
                    e.value
                ),
            }),
        }
    }

    fn pair(&mut self, key: &str) -> Result<Option<(f64, f64)>> {
        Ok(self.floats(key, 2)?.map(|v| (v[0], v[1])))
    }

    fn word(&mut self, key: &str, choices: &[&str]) -> Result<Option<(usize, usize)>> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        let value = e.value.to_ascii_lowercase();
        choices
            .iter()
            .position(|c| *c == value)
            .map(|idx| Some((idx, e.line)))
            .ok_or_else(|| Error::Config {
                line: e.line,
                message: format!("`{key}`: expected one of {choices:?}, got {:?}", e.value),
            })
    }

    fn beam(&mut self, prefix: &str, base: BeamConfig) -> Result<BeamConfig> {
        let mut beam = base;
        let key = |k: &str| format!("{prefix}.{k}");
        let charge: Option<i32> = self.parse(&key("charge"))?;
        let radial: Option<u32> = self.parse(&key("radial_index"))?;
        let order: Option<i32> = self.parse(&key("order"))?;
        let fork = self.pair(&key("fork_offset"))?;
        let source = self.word(&key("source"), &["gaussian", "lg", "hologram"])?;
        beam.source = match source.map(|s| s.0) {
            None | Some(0) => BeamSource::Gaussian,
            Some(1) => BeamSource::Lg {
                charge: charge.unwrap_or(0),
                radial_index: radial.unwrap_or(0),
            },
            _ => BeamSource::Hologram {
                charge: charge.unwrap_or(0),
                order: order.unwrap_or(1),
                fork_offset: fork.unwrap_or((0.0, 0.0)),
            },
        };
        if let Some(w) = self.parse::<f64>(&key("waist"))? {
            beam.waist = Some(w);
        }
        if let Some(l) = self.parse(&key("wavelength"))? {
            beam.wavelength = l;
        }
        let direction_line = self.map.get(&key("direction")).map(|e| e.line);
        let tilt: Option<f64> = self.parse(&key("tilt_mrad"))?;
        if let Some(d) = self.floats(&key("direction"), 3)? {
            let line = direction_line.unwrap_or(0);
            if tilt.is_some() {
                return Err(Error::Config {
                    line,
                    message: format!("`{prefix}`: give either direction or tilt_mrad"),
                });
            }
            beam.direction = normalize([d[0], d[1], d[2]]).map_err(|e| Error::Config {
                line,
                message: e.to_string(),
            })?;
        } else if let Some(t) = tilt {
            beam.direction = tilted_z(t * 1e-3);
        }
        if let Some(m) = self.parse(&key("mirrors"))? {
            beam.mirrors = m;
        }
        Ok(beam)
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader {
            map: parse_pairs(text)?,
        };
        let mut cfg = ScenarioConfig::default();
        if let Some(name) = r.take("name") {
            cfg.name = name.value;
        }
        if let Some(n) = r.parse("grid")? {
            cfg.grid = n;
        }
        if let Some(w) = r.parse("waist")? {
            cfg.waist = w;
            cfg.interferometer.eta = 2.0 * std::f64::consts::PI / w;
        }
        if let Some(e) = r.parse("extent_waists")? {
            cfg.extent_waists = e;
        }
        // period default follows the (possibly overridden) grid
        cfg.hologram.period = 16.0 * cfg.extent_waists * cfg.waist / cfg.grid as f64;
        if let Some(c) = r.pair("chi3")? {
            cfg.chi3 = Complex64::new(c.0, c.1);
        }
        if let Some(v) = r.parse("ring_fraction")? {
            cfg.ring_fraction = v;
        }
        if let Some(v) = r.parse("noise")? {
            cfg.noise = v;
        }
        if let Some(v) = r.parse("seed")? {
            cfg.seed = v;
        }
        if let Some(v) = r.pair("probe_offset")? {
            cfg.probe_offset = v;
        }

        if let Some(v) = r.parse("hologram.period")? {
            cfg.hologram.period = v;
        }
        if let Some((idx, _)) = r.word("hologram.mode", &["sinusoidal", "binary"])? {
            cfg.hologram.mode = if idx == 0 {
                MaskMode::Sinusoidal
            } else {
                MaskMode::Binary
            };
        }
        if let Some(v) = r.parse("hologram.fill")? {
            cfg.hologram.fill = v;
        }
        if let Some(v) = r.parse("hologram.window")? {
            cfg.hologram.window_fraction = v;
        }

        if let Some(v) = r.parse("interferometer.eta")? {
            cfg.interferometer.eta = v;
        }
        if let Some(v) = r.parse("interferometer.phase")? {
            cfg.interferometer.phase = v;
        }
        if let Some(v) = r.parse("interferometer.balance")? {
            cfg.interferometer.arm_balance = v;
        }
        if let Some((idx, _)) = r.word("interferometer.mismatch", &["linear", "quadratic"])? {
            cfg.interferometer.profile = if idx == 0 {
                MismatchProfile::Linear
            } else {
                MismatchProfile::Quadratic
            };
        }

        cfg.forward = r.beam("forward", cfg.forward)?;
        cfg.backward = r.beam("backward", cfg.backward)?;
        cfg.probe = r.beam("probe", cfg.probe)?;

        if let Some((key, entry)) = r.map.iter().next() {
            return Err(Error::Config {
                line: entry.line,
                message: format!("unknown key `{key}`"),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Preset name or path to a scenario file.
    pub fn resolve(scenario: &str) -> Result<Self> {
        match preset_text(scenario) {
            Some(text) => Self::parse(text),
            None => Self::load(Path::new(scenario)),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: 0,
            message: format!("cannot read scenario {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Overrides the grid size, keeping the physical extent.
    pub fn with_grid(mut self, n: usize) -> Result<Self> {
        self.grid = n;
        self.validate()?;
        Ok(self)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::with_extent(self.grid, self.extent_waists * self.waist)
    }

    pub fn beam_waist(&self, beam: &BeamConfig) -> f64 {
        beam.waist.unwrap_or(self.waist)
    }

    fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::Config { line: 0, message };
        if self.grid < 16 {
            return Err(bad(format!("grid = {} is below 16", self.grid)));
        }
        if !(self.waist > 0.0) || !(self.extent_waists > 0.0) {
            return Err(bad("waist and extent_waists must be positive".into()));
        }
        if !(self.ring_fraction > 0.0) {
            return Err(bad("ring_fraction must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(bad(format!("noise {} outside [0, 1]", self.noise)));
        }
        for beam in [&self.forward, &self.backward, &self.probe] {
            if !(beam.wavelength > 0.0) {
                return Err(bad(format!(
                    "wavelength must be positive, got {}",
                    beam.wavelength
                )));
            }
            if let Some(w) = beam.waist {
                if !(w > 0.0) {
                    return Err(bad(format!("beam waist must be positive, got {w}")));
                }
            }
        }
        Ok(())
    }
}
