use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its admissible range.
    #[error("{name} = {value} violates {bound}")]
    Domain {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    /// Two ways of specifying the same quantity disagree.
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),

    /// The verbatim closed form carries 1/eta^2 factors and is not evaluated near eta = 0.
    #[error("closed form is singular at eta = {eta:e} (< {eta_min:e}); use the linear-solve path instead")]
    SingularForm { eta: f64, eta_min: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("covariance matrix is unphysical: nu_minus = {nu_minus}")]
    Unphysical { nu_minus: f64 },

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("drift matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("integration diverged at t = {time} ms")]
    Diverged { time: f64 },

    #[error("sweep failed at {coordinates}: {source}")]
    SweepPoint {
        coordinates: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{0} verification check(s) failed")]
    Verification(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Domain { .. }
            | Error::Inconsistent(_)
            | Error::Config(_)
            | Error::Precondition(_)
            | Error::Unphysical { .. } => 2,
            Error::SingularForm { .. }
            | Error::Degenerate(_)
            | Error::Singular { .. }
            | Error::Diverged { .. } => 3,
            Error::SweepPoint { source, .. } => source.exit_code(),
            Error::Verification(_) => 4,
            Error::Io(_) | Error::Json(_) => 2,
        }
    }
}
