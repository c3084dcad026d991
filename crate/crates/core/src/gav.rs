use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GavError {
    #[error("coordinate field `{0}` is empty")]
    Empty(&'static str),
    #[error("version `{0}` contains range syntax")]
    RangeVersion(String),
    #[error("`{0}` is not a groupId:artifactId:version coordinate")]
    Malformed(String),
    #[error("unknown scope `{0}`")]
    UnknownScope(String),
}

/// A fully resolved artifact coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Gav {
    pub group_id: String,
    pub artifact_id: String,
    pub version: String,
}

impl Gav {
    pub fn new(
        group_id: impl Into<String>,
        artifact_id: impl Into<String>,
        version: impl Into<String>,
    ) -> Result<Self, GavError> {
        let gav = Gav {
            group_id: group_id.into(),
            artifact_id: artifact_id.into(),
            version: version.into(),
        };
        gav.check()?;
        Ok(gav)
    }

    fn check(&self) -> Result<(), GavError> {
        if self.group_id.is_empty() {
            return Err(GavError::Empty("groupId"));
        }
        if self.artifact_id.is_empty() {
            return Err(GavError::Empty("artifactId"));
        }
        if self.version.is_empty() {
            return Err(GavError::Empty("version"));
        }
        if self.version.contains(['[', ']', '(', ')', ',']) {
            return Err(GavError::RangeVersion(self.version.clone()));
        }
        Ok(())
    }

    pub fn key(&self) -> GaKey {
        GaKey::new(&self.group_id, &self.artifact_id)
    }
}

impl fmt::Display for Gav {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.group_id, self.artifact_id, self.version)
    }
}

impl FromStr for Gav {
    type Err = GavError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [g, a, v] => Gav::new(*g, *a, *v),
            _ => Err(GavError::Malformed(s.to_string())),
        }
    }
}

/// The (groupId, artifactId) conflict key used for mediation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GaKey {
    pub group_id: String,
    pub artifact_id: String,
}

impl GaKey {
    pub fn new(group_id: &str, artifact_id: &str) -> Self {
        GaKey {
            group_id: group_id.to_string(),
            artifact_id: artifact_id.to_string(),
        }
    }
}

impl fmt::Display for GaKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group_id, self.artifact_id)
    }
}

/// Classpath scope of a dependency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    #[default]
    Compile,
    Provided,
    Runtime,
    Test,
}

impl Scope {
    pub const ALL: [Scope; 4] = [Scope::Compile, Scope::Provided, Scope::Runtime, Scope::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Compile => "compile",
            Scope::Provided => "provided",
            Scope::Runtime => "runtime",
            Scope::Test => "test",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scope {
    type Err = GavError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compile" => Ok(Scope::Compile),
            "provided" => Ok(Scope::Provided),
            "runtime" => Ok(Scope::Runtime),
            "test" => Ok(Scope::Test),
            other => Err(GavError::UnknownScope(other.to_string())),
        }
    }
}
