use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("no overlap: point cannot be expressed in chart `{target}`")]
    NoOverlap { target: String },

    #[error("model `{0}` has no closed-form geodesic oracle")]
    NoOracle(String),

    #[error("distance {distance:.6} exceeds injectivity floor {radius:.6}{}", node_suffix(.node))]
    OutOfInjectivityRange {
        distance: f64,
        radius: f64,
        node: Option<usize>,
    },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("grid too coarse: {nodes} nodes, at least {required} required")]
    GridTooCoarse { nodes: usize, required: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("normal system is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("chart continuation failed at node {node}: no admissible chart")]
    ChartContinuationFailure { node: usize },

    #[error("curve is not immersed: speed {speed:.3e} at node {node}")]
    NotImmersed { node: usize, speed: f64 },

    #[error("singular frame: columns are linearly dependent")]
    SingularFrame,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn node_suffix(node: &Option<usize>) -> String {
    match node {
        Some(n) => format!(" at node {n}"),
        None => String::new(),
    }
}

impl Error {
    /// Input problems detectable before any numerical work starts.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidInput(_)
                | Error::GridTooCoarse { .. }
                | Error::SingularFrame
        )
    }
}
