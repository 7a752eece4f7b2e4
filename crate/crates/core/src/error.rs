use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coincident points: |x - y| = {distance:e} is below the kernel cutoff")]
    Coincident { distance: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("plates intersect at shift s = {shift}: minimum separation {separation:e}")]
    PlateIntersection { shift: f64, separation: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular collocation matrix (pivot {pivot} vanished)")]
    SingularMatrix { pivot: usize },

    #[error("collocation matrix ill-conditioned: estimated condition number {estimate:e}")]
    IllConditioned { estimate: f64 },

    #[error("point ({x}, {y}) lies {distance:e} from a plate, closer than one element length {element:e}")]
    SourceTooClose {
        x: f64,
        y: f64,
        distance: f64,
        element: f64,
    },

    #[error("integration path at x0 = {x0} leaves the vacuum gap: {reason}")]
    PathOutsideGap { x0: f64, reason: String },

    #[error("{what} did not converge: achieved estimate {achieved:e}")]
    NonConvergent { what: String, achieved: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
