use thiserror::Error;

/// Every failure mode of the library. The variant name is what the CLI prints on stderr.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("WindowOverflow: exponent {exponent} outside truncation window [-{depth}, {depth}]")]
    WindowOverflow { exponent: i32, depth: i32 },
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("NotInU: {0}")]
    NotInU(String),
    #[error("UnsupportedElement: {0}")]
    UnsupportedElement(String),
    #[error("NonzeroC: the Y -> X block of the element does not vanish")]
    NonzeroC,
    #[error("NotInStabilizer: the element does not fix r")]
    NotInStabilizer,
    #[error("NoWitness: {0}")]
    NoWitness(String),
    #[error("PrecisionFailure: {0}")]
    PrecisionFailure(String),
    #[error("UnsupportedTwoAdic: {0}")]
    UnsupportedTwoAdic(String),
    #[error("InvalidShape: {0}")]
    InvalidShape(String),
    #[error("ModulesDiffer")]
    ModulesDiffer,
    #[error("TensorsDiffer")]
    TensorsDiffer,
    #[error("UnsupportedPrime: {0}")]
    UnsupportedPrime(u64),
    #[error("MassMismatch: {0}")]
    MassMismatch(String),
    #[error("NormalizationFailure: {0}")]
    NormalizationFailure(String),
    #[error("IrrationalEigenvalue: {0}")]
    IrrationalEigenvalue(String),
    #[error("DivergentTail: minimal eigenvalue {0} is not positive")]
    DivergentTail(f64),
    #[error("DepthOverflow: tail target {0} not reached within 64 depths")]
    DepthOverflow(f64),
    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    /// Short variant name, used for diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::WindowOverflow { .. } => "WindowOverflow",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NotInU(_) => "NotInU",
            Error::UnsupportedElement(_) => "UnsupportedElement",
            Error::NonzeroC => "NonzeroC",
            Error::NotInStabilizer => "NotInStabilizer",
            Error::NoWitness(_) => "NoWitness",
            Error::PrecisionFailure(_) => "PrecisionFailure",
            Error::UnsupportedTwoAdic(_) => "UnsupportedTwoAdic",
            Error::InvalidShape(_) => "InvalidShape",
            Error::ModulesDiffer => "ModulesDiffer",
            Error::TensorsDiffer => "TensorsDiffer",
            Error::UnsupportedPrime(_) => "UnsupportedPrime",
            Error::MassMismatch(_) => "MassMismatch",
            Error::NormalizationFailure(_) => "NormalizationFailure",
            Error::IrrationalEigenvalue(_) => "IrrationalEigenvalue",
            Error::DivergentTail(_) => "DivergentTail",
            Error::DepthOverflow(_) => "DepthOverflow",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
