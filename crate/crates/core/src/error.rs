use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("analytic eigensystem is only available for the XXX coupling")]
    NoClosedForm,

    #[error("eigen-decomposition residual {residual:.3e} exceeds tolerance")]
    EigenResidual { residual: f64 },

    #[error("transition frequencies spanning {spread:.3e} were grouped together (tolerance {tol:.3e})")]
    FrequencyGrouping { spread: f64, tol: f64 },

    #[error("zero-frequency component with amplitude {amplitude:.3e} in the coupling operator")]
    ZeroFrequency { amplitude: f64 },

    #[error("steady state is not unique: singular value ratio {ratio:.3e} below 1e3")]
    NullSpaceDegenerate { ratio: f64 },

    #[error("null vector has vanishing trace {trace:.3e}")]
    TraceVanishing { trace: f64 },

    #[error("linear solve failed: {0}")]
    SingularSystem(String),

    #[error("integration step rejected at t = {t}: drift {drift:.3e}")]
    StepRejected { t: f64, drift: f64 },

    #[error("heat power has imaginary part {imag:.3e}")]
    ImaginaryLeak { imag: f64 },

    #[error("work heat flow {p_w:.3e} too small for an efficiency")]
    WorkFlowZero { p_w: f64 },

    #[error("virtual temperature diverges: denominator {denominator:.3e}")]
    VirtualDivergence { denominator: f64 },
}

impl Error {
    /// Short machine-readable tag, used as the status field of CSV rows.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NoClosedForm => "no_closed_form",
            Error::EigenResidual { .. } => "eigen_residual",
            Error::FrequencyGrouping { .. } => "frequency_grouping",
            Error::ZeroFrequency { .. } => "zero_frequency",
            Error::NullSpaceDegenerate { .. } => "null_space_degenerate",
            Error::TraceVanishing { .. } => "trace_vanishing",
            Error::SingularSystem(_) => "singular_system",
            Error::StepRejected { .. } => "step_rejected",
            Error::ImaginaryLeak { .. } => "imaginary_leak",
            Error::WorkFlowZero { .. } => "work_flow_zero",
            Error::VirtualDivergence { .. } => "virtual_divergence",
        }
    }
}
