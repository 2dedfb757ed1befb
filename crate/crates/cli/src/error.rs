use std::fmt;

use blamescope::attribution::AttributionError;
use blamescope::blame::BlameError;
use blamescope::caselog::FormatError;
use blamescope::hitl::HitlError;
use blamescope::metrics::MetricsError;
use blamescope::model_file::ModelFileError;
use blamescope::synthetic::SyntheticError;
use blamescope::ScmError;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Data,
    Model,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Model => 4,
        }
    }
}

/// A failed command, rendered on stderr as `{"error": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    /// Name of the underlying error variant, e.g. `CyclicGraph`.
    #[serde(rename = "type")]
    pub type_: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.context {
            Some(c) => write!(f, "{c}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for CliError {}

/// Variant name of a fieldful enum value from its `Debug` form.
fn variant<E: fmt::Debug>(e: &E) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

impl CliError {
    fn new(kind: ErrorKind, type_: impl Into<String>, message: impl Into<String>) -> Self {
        Self { kind, type_: type_.into(), message: message.into(), context: None }
    }

    pub fn config(type_: &str, message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, type_, message)
    }

    pub fn data(type_: &str, message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Data, type_, message)
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = Some(match self.context.take() {
            Some(inner) => format!("{}: {inner}", context.into()),
            None => context.into(),
        });
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        let kind = if e.is_io() { ErrorKind::Config } else { ErrorKind::Data };
        let type_ = if e.is_io() { "FileNotReadable".to_string() } else { variant(&e) };
        Self::new(kind, type_, e.to_string())
    }
}

impl From<ScmError> for CliError {
    fn from(e: ScmError) -> Self {
        Self::new(ErrorKind::Model, variant(&e), e.to_string())
    }
}

impl From<BlameError> for CliError {
    fn from(e: BlameError) -> Self {
        match e {
            BlameError::Scm(e) => e.into(),
            e => Self::new(ErrorKind::Model, variant(&e), e.to_string()),
        }
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        match e {
            ModelFileError::Format(e) => e.into(),
            ModelFileError::Scm(e) => e.into(),
            ModelFileError::Blame(e) => e.into(),
            ModelFileError::Named { context, source } => CliError::from(*source).with_context(context),
        }
    }
}

impl From<HitlError> for CliError {
    fn from(e: HitlError) -> Self {
        match e {
            HitlError::Scm(e) => e.into(),
            HitlError::Blame(e) => e.into(),
            HitlError::InvalidPolicy { .. } | HitlError::InvalidCost { .. } => {
                Self::new(ErrorKind::Config, variant(&e), e.to_string())
            }
            e => Self::new(ErrorKind::Data, variant(&e), e.to_string()),
        }
    }
}

impl From<AttributionError> for CliError {
    fn from(e: AttributionError) -> Self {
        match e {
            AttributionError::Hitl(e) => e.into(),
            e => Self::new(ErrorKind::Data, variant(&e), e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        Self::new(ErrorKind::Data, variant(&e), e.to_string())
    }
}

impl From<SyntheticError> for CliError {
    fn from(e: SyntheticError) -> Self {
        Self::new(ErrorKind::Config, variant(&e), e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names() {
        assert_eq!(variant(&ScmError::CyclicGraph { vars: vec!["X".into()] }), "CyclicGraph");
        assert_eq!(variant(&ScmError::UnknownVariable("Q".into())), "UnknownVariable");
        assert_eq!(variant(&MetricsError::DegenerateMarginals), "DegenerateMarginals");
    }

    #[test]
    fn exit_codes() {
        let missing = FormatError::Io { path: "x".into(), message: "gone".into() };
        assert_eq!(CliError::from(missing).exit_code(), 2);
        assert_eq!(CliError::from(FormatError::MissingColumn("truth".into())).exit_code(), 3);
        assert_eq!(CliError::from(ScmError::CyclicGraph { vars: vec![] }).exit_code(), 4);
        assert_eq!(CliError::from(HitlError::InvalidPolicy { l: 0.9, u: 0.1 }).exit_code(), 2);
    }

    #[test]
    fn json_shape() {
        let e = CliError::from(FormatError::MissingColumn("truth".into())).with_context("cases.csv");
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "data");
        assert_eq!(v["error"]["type"], "MissingColumn");
        assert_eq!(v["error"]["context"], "cases.csv");
        assert!(v["error"]["message"].as_str().unwrap().contains("truth"));
    }
}
