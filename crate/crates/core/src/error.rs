use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    // -- embedded complexes -------------------------------------------------
    #[error("vertices {0} and {1} lie in different connected components")]
    DisconnectedPair(usize, usize),
    #[error("complex is disconnected ({components} components)")]
    DisconnectedComplex { components: usize },
    #[error("edge ({a},{b}) weight {weight} differs from Euclidean length {euclidean}")]
    EdgeWeightMismatch {
        a: usize,
        b: usize,
        weight: f64,
        euclidean: f64,
    },
    #[error("triangle ({0},{1},{2}) references a missing edge")]
    MissingTriangleEdge(usize, usize, usize),
    #[error("vertices {0} and {1} coincide within duplicate tolerance")]
    DuplicateVertex(usize, usize),
    #[error("vertex index {0} out of bounds ({1} vertices)")]
    VertexOutOfBounds(usize, usize),
    #[error("path step ({0},{1}) is not an edge of the complex")]
    NotAnEdge(usize, usize),
    #[error("loops have different basepoints ({0} vs {1})")]
    BasepointMismatch(usize, usize),

    // -- homology ------------------------------------------------------------
    #[error("simplex budget exceeded: {count} > cap {cap}")]
    SizeBudgetExceeded { count: usize, cap: usize },
    #[error("cycle is not null-homologous in the full complex")]
    NeverFills,
    #[error("chain complex carries no vertex positions; metric query unavailable")]
    NoPositions,
    #[error("chain is not a cycle (non-zero boundary)")]
    NotACycle,
    #[error("integer overflow during normal-form reduction")]
    IntegerOverflow,
    #[error("homology in dimension {0} requires simplices of dimension {1}")]
    DimensionUnavailable(usize, usize),

    // -- polynomial systems and sampling --------------------------------------
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("germ mode requires zero constant terms (polynomial {0} has one)")]
    NonZeroConstantTerm(usize),
    #[error("system has no non-zero polynomial")]
    EmptySystem,
    #[error("variable arity mismatch: polynomial {0} uses more variables than declared")]
    ArityMismatch(usize),
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error(
        "insufficient convergence: {converged}/{requested} points converged \
         (need at least half)"
    )]
    InsufficientConvergence { converged: usize, requested: usize },
    #[error("empty input point set")]
    EmptyInput,
    #[error("polynomial expansion exceeds the term budget ({0} terms)")]
    ExpansionTooLarge(usize),
    #[error("operation requires a hypersurface (single polynomial), got {0}")]
    NotHypersurface(usize),

    // -- transfer -------------------------------------------------------------
    #[error("breakpoint {index} has no target vertex within eps = {eps}")]
    NoNearbyPoint { index: usize, eps: f64 },
    #[error("transfer hypothesis violated: {quantity} = {value} >= bound {bound}")]
    HypothesisViolated {
        quantity: &'static str,
        value: f64,
        bound: f64,
    },

    // -- pipeline ---------------------------------------------------------------
    #[error("reduced tangent cone is not a linear subspace")]
    ConeNotLinear,
    #[error("fiber solves remained unstable after {attempts} direction draws")]
    FiberUnstable { attempts: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
