use std::fmt;

use rinzelkit::certificate::CertError;
use rinzelkit::crosscheck::CrossCheckError;
use rinzelkit::kernel::KernelError;
use rinzelkit::model::ModelError;
use rinzelkit::ode::IntegrateError;
use rinzelkit::pde::PdeError;
use rinzelkit::scan::ScanError;

/// Failures sorted by exit code: 2 for configuration and hypothesis
/// problems, 3 for numerical failures.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("I/O: {e}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CertError> for CliError {
    fn from(e: CertError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::InvalidConfig(_)
            | IntegrateError::InvalidInterval { .. }
            | IntegrateError::DimensionMismatch { .. }
            | IntegrateError::NonFiniteInitial
            | IntegrateError::MissingJacobian => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Domain(_) | KernelError::Model(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::Integrate(i) => i.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<CrossCheckError> for CliError {
    fn from(e: CrossCheckError) -> Self {
        match e {
            CrossCheckError::Kernel(k) => k.into(),
            CrossCheckError::Pde(p) => p.into(),
            CrossCheckError::Refine => CliError::Config(e.to_string()),
        }
    }
}
