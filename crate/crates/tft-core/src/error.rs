use thiserror::Error;

/// Errors raised by the library. Each variant carries a human-readable message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("composition error: {0}")]
    Composition(String),
    #[error("partition error: {0}")]
    Partition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("element error: {0}")]
    Element(String),
    #[error("not in group: {0}")]
    NotInGroup(String),
    #[error("interval error: {0}")]
    Interval(String),
    #[error("dyadic error: {0}")]
    Dyadic(String),
    #[error("not a diffeomorphism: {0}")]
    NotDiffeo(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("degeneracy error: {0}")]
    Degeneracy(String),
    #[error("degenerate blob: {0}")]
    DegenerateBlob(String),
    #[error("forest error: {0}")]
    Forest(String),
    #[error("vacuum error: {0}")]
    Vacuum(String),
    #[error("refinement error: {0}")]
    Refinement(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("support error: {0}")]
    Support(String),
    #[error("singular eigenvalue: {0}")]
    SingularEigenvalue(String),
    #[error("irreducible diagram: {0}")]
    Irreducible(String),
    #[error("gram error: {0}")]
    Gram(String),
    #[error("parameter error: {0}")]
    Parameter(String),
}

impl Error {
    /// Stable short name of the variant, used in structured CLI output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Composition(_) => "CompositionError",
            Error::Partition(_) => "PartitionError",
            Error::Parse(_) => "ParseError",
            Error::Element(_) => "ElementError",
            Error::NotInGroup(_) => "NotInGroupError",
            Error::Interval(_) => "IntervalError",
            Error::Dyadic(_) => "DyadicError",
            Error::NotDiffeo(_) => "NotDiffeoError",
            Error::Shape(_) => "ShapeError",
            Error::Degeneracy(_) => "DegeneracyError",
            Error::DegenerateBlob(_) => "DegenerateBlobError",
            Error::Forest(_) => "ForestError",
            Error::Vacuum(_) => "VacuumError",
            Error::Refinement(_) => "RefinementError",
            Error::Resource(_) => "ResourceError",
            Error::Support(_) => "SupportError",
            Error::SingularEigenvalue(_) => "SingularEigenvalueError",
            Error::Irreducible(_) => "IrreducibleError",
            Error::Gram(_) => "GramError",
            Error::Parameter(_) => "ParameterError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
