use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({0}, {1}) is shared by more than two cells or twice with the same orientation")]
    NonManifoldEdge(usize, usize),
    #[error("cell {0} has non-positive signed area (clockwise or degenerate)")]
    NegativeArea(usize),
    #[error("cell {0} is not a simple polygon")]
    SelfIntersecting(usize),
    #[error("vertex {0} is not referenced by any cell")]
    DanglingVertex(usize),
    #[error("cell {cell} references missing vertex {vertex}")]
    MissingVertex { cell: usize, vertex: usize },
    #[error("cell {0} has fewer than three distinct vertices")]
    DegenerateCell(usize),
    #[error("boundary entry ({0}, {1}) is not a boundary edge of the mesh")]
    UnknownBoundaryEdge(usize, usize),
    #[error("unsupported domain for mesh family: {0}")]
    UnsupportedDomain(String),
    #[error("polygon triangulation failed: {0}")]
    TriangulationFailure(String),
    #[error("Gram matrix is singular")]
    SingularGram,
    #[error("local DoF system is rank deficient on cell {0}")]
    RankDeficiency(usize),
    #[error("coefficient {name} evaluates to {value} <= 0")]
    CoefficientOutOfBounds { name: &'static str, value: f64 },
    #[error("the temperature problem needs a non-empty Dirichlet boundary")]
    NoDirichletBoundary,
    #[error("sparse matrix is singular (relative residual {0:e})")]
    SingularMatrix(f64),
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("Newton Jacobian is singular")]
    SingularJacobian,
    #[error("no convergence after {iterations} iterations (last increment {last_increment:e})")]
    NoConvergence {
        iterations: usize,
        last_increment: f64,
        trace: Box<crate::solver::SolveTrace>,
    },
    #[error("rate table has two reports with the same mesh size {0}")]
    DuplicateMeshSize(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
