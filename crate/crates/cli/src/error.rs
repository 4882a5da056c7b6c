use cartier_lab_core::cartier::CartierError;
use cartier_lab_core::dieudonne::DieudonneError;
use cartier_lab_core::drw::DrwError;
use cartier_lab_core::eta::EtaError;
use cartier_lab_core::filtered::FilteredError;
use cartier_lab_core::suite::SuiteError;
use cartier_lab_core::witt::WittError;
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Filtered(#[from] FilteredError),
    #[error(transparent)]
    Cartier(#[from] CartierError),
    #[error(transparent)]
    Drw(#[from] DrwError),
    #[error(transparent)]
    Dieudonne(#[from] DieudonneError),
    #[error(transparent)]
    Eta(#[from] EtaError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
}

/// Leading identifier of a `Debug` rendering, i.e. the variant name.
fn variant(d: &impl std::fmt::Debug) -> String {
    format!("{d:?}").chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Profile(_) => "profile",
            CliError::Io { .. } => "io",
            CliError::Schema(_) => "schema",
            CliError::Witt(_) => "witt",
            CliError::Filtered(_) => "filtered",
            CliError::Cartier(_) => "cartier",
            CliError::Drw(_) => "drw",
            CliError::Dieudonne(_) => "dieudonne",
            CliError::Eta(_) => "eta",
            CliError::Suite(_) => "suite",
        }
    }

    pub fn code(&self) -> String {
        match self {
            CliError::Witt(e) => variant(e),
            CliError::Filtered(e) => variant(e),
            CliError::Cartier(e) => variant(e),
            CliError::Drw(e) => variant(e),
            CliError::Dieudonne(DieudonneError::Cartier(e)) => variant(e),
            CliError::Dieudonne(e) => variant(e),
            CliError::Eta(e) => variant(e),
            CliError::Suite(e) => variant(e),
            CliError::Usage(_) => "InvalidArgument".into(),
            CliError::Profile(_) => "InvalidProfile".into(),
            CliError::Io { .. } => "Unreadable".into(),
            CliError::Schema(_) => "SchemaViolation".into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": cartier_lab_core::json::SCHEMA,
            "error": {"kind": self.kind(), "code": self.code(), "message": self.to_string()},
        })
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
