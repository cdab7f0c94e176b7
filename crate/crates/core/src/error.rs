use thiserror::Error;

/// Errors raised by graph construction and the numerical routines built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("edge {0}-{1} listed with two different weights")]
    AsymmetricWeight(String, String),
    #[error("vertex `{0}` has non-positive measure")]
    NonpositiveMeasure(String),
    #[error("edge {0}-{1} has negative weight")]
    NegativeWeight(String, String),
    #[error("self-loop with positive weight at `{0}`")]
    SelfLoop(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex `{0}` has no value in the field")]
    MissingValue(String),
    #[error("edge {0}-{1} has no length but the metric uses edge lengths")]
    MissingLength(String, String),
    #[error("edge {0}-{1} has a non-positive length")]
    NonpositiveLength(String, String),
    #[error("vertices `{0}` and `{1}` lie in different components")]
    DisconnectedQuery(String, String),
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("support of the test function touches the window boundary at `{0}`")]
    SupportTouchesBoundary(String),
    #[error("the finite set touches the window boundary at `{0}`")]
    KTouchesBoundary(String),
    #[error("window too small: `{0}` is needed but lies on the boundary or has uncertified distances")]
    WindowTooSmall(String),
    #[error("invalid salami partition: {0}")]
    InvalidPartition(String),

    #[error("curvature needs two distinct vertices")]
    InvalidPair,
    #[error("neighbourhood of `{0}` touches the window boundary")]
    BallTouchesBoundary(String),
    #[error("`{0}` and `{1}` are not connected in the metric")]
    NotAdjacentMetric(String, String),
    #[error("transport marginals are infeasible")]
    InfeasibleMarginals,
    #[error("graph is not a tree")]
    NotATree,
    #[error("`{0}` and `{1}` are not adjacent")]
    NotAdjacent(String, String),
    #[error("neighbourhood of `{0}` is not lattice-like: {1}")]
    NotLatticeLike(String, String),
    #[error("step size {epsilon} exceeds the admissible bound {bound}")]
    EpsilonTooLarge { epsilon: f64, bound: f64 },
    #[error("field is not 1-Lipschitz: f({1}) - f({0}) = {2} exceeds d = {3}")]
    NotLipschitz(String, String, f64, f64),
    #[error("curvature is negative on the edge {0}-{1} inside W")]
    CurvatureNegativeInW(String, String),

    #[error("distance between `{0}` and `{1}` is not certified by the window")]
    UnreliableDistance(String, String),
    #[error("values on K are not 1-Lipschitz at {0}-{1}")]
    NotLipschitzOnK(String, String),
    #[error("window buffer too small around K at `{0}`")]
    WindowBufferTooSmall(String),
    #[error("monotonicity hypothesis fails at `{0}`")]
    HypothesisFails(String),

    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("field is not a Lipschitz-sharp harmonic function at `{0}`")]
    NotInH0(String),
    #[error("band [{0}, {1}) reaches values outside the reliable range")]
    BandTouchesBoundary(f64, f64),
    #[error("edge {0}-{1} has weight below epsilon")]
    WeightBelowEpsilon(String, String),
    #[error("radius zero gives a vanishing test function")]
    DegenerateTestFunction,
    #[error("field is constant across every edge")]
    NoJumpEdges,
    #[error("window is not of bounded geometry: {0}")]
    NotBoundedGeometry(String),
    #[error("Dirichlet solution is not positive at `{0}`")]
    NonpositiveHarmonic(String),
    #[error("harmonic function is not normalised against the end flux (residual {0})")]
    NormalizationFailed(f64),
    #[error("linear system is singular")]
    SingularSystem,

    #[error("bad family specification: {0}")]
    BadSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
