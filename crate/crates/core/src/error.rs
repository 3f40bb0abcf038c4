use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "grid extent {extent:.3e} m does not contain the beam (needs at least {required:.3e} m)"
    )]
    Containment { extent: f64, required: f64 },

    #[error("fields are sampled on different grids")]
    ShapeMismatch,

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("grating period {period:.3e} m is under-sampled at pitch {pitch:.3e} m")]
    Sampling { period: f64, pitch: f64 },

    #[error("order window invalid: {0}")]
    Extraction(String),

    #[error("input field carries no power")]
    DegenerateInput,

    #[error("implied signal frequency is not positive ({inverse_wavelength:.6e} 1/m)")]
    Unphysical { inverse_wavelength: f64 },

    #[error("signal direction undefined: wavevector sum vanishes and no hint given")]
    DirectionUndefined,

    #[error("rotation is undefined for zero charge")]
    UndefinedRotation,

    #[error("phase undefined on ring r={radius:.3e} m (min/max amplitude {ratio:.3e})")]
    UndefinedPhase { radius: f64, ratio: f64 },

    #[error("ring of radius {0:.3e} m leaves the grid")]
    RingOutside(f64),

    #[error("dominant azimuthal harmonic {0} is odd")]
    InconsistentInterferogram(usize),

    #[error("no fringes: azimuthal spectrum is flat")]
    NoFringe,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_usage(),
            Error::Config { .. } | Error::Parameter(_) | Error::Grid(_) | Error::Format(_) => true,
            Error::Containment { .. } | Error::Sampling { .. } | Error::Extraction(_) => true,
            Error::Io(_) => true,
            _ => false,
        }
    }
}
