use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A gradient was requested at the tip of the cone (zero vector).
    #[error("degenerate point: {0}")]
    DegeneratePoint(String),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    /// The discrete normal estimate is too short to identify a reduced-boundary point.
    #[error("non-reduced boundary point: normal ratio {ratio:.3} below {threshold}")]
    NonReducedPoint { ratio: f64, threshold: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error(
        "solver diverged after {iterations} iterations: {reason} (primal {primal_energy:e}, gap {gap:e})"
    )]
    SolverDiverged {
        iterations: usize,
        reason: String,
        primal_energy: f64,
        gap: f64,
    },

    /// The prescribed datum admits no bounded minimizer.
    #[error("energy unbounded below: {0}")]
    Unbounded(String),

    #[error("invalid construction: {0}")]
    ConstructionInvalid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn ensure_finite(what: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has non-finite components: {v:?}"
        )))
    }
}
