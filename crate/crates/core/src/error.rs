//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the library. Each variant names the module that failed
/// so that pipeline reports can tag where a run stopped.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("quadfield: {0}")]
    Field(String),

    #[error("residue: {0}")]
    Residue(String),

    #[error("unitgenus: {0}")]
    UnitGenus(String),

    #[error("hecke: {0}")]
    Hecke(String),

    #[error("frey: {0}")]
    Frey(String),

    #[error("irred: {0}")]
    Irred(String),

    #[error("forms: {0}")]
    Forms(String),

    #[error("analytic: {0}")]
    Analytic(String),

    #[error("solutions: {0}")]
    Solutions(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short module tag, used by the CLI and the C ABI.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Field(_) => "quadfield",
            Error::Residue(_) => "residue",
            Error::UnitGenus(_) => "unitgenus",
            Error::Hecke(_) => "hecke",
            Error::Frey(_) => "frey",
            Error::Irred(_) => "irred",
            Error::Forms(_) => "forms",
            Error::Analytic(_) => "analytic",
            Error::Solutions(_) => "solutions",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
