//! Project manifest model.
//!
//! [`parse_pom`] reads the supported subset of `pom.xml` without
//! interpolating anything; [`effective_pom`] merges the parent chain and
//! substitutes properties to produce the model the resolver consumes.

mod effective;
mod parse;
mod write;

pub use effective::{effective_pom, interpolate_properties, interpolate_text, MAX_INTERPOLATION_DEPTH, MAX_PARENT_DEPTH};
pub use parse::parse_pom;
pub(crate) use write::{dependency_xml, escape, pin_xml};

use indexmap::IndexMap;
use thiserror::Error;

use crate::gav::{GaKey, Gav, GavError, Scope};
use crate::version::{parse_version_spec, VersionSpec, VersionSpecError};

pub const DEFAULT_PLUGIN_GROUP: &str = "org.apache.maven.plugins";

#[derive(Debug, Error)]
pub enum PomError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("line {line}: <{element}> is missing <{field}>")]
    MissingField { element: String, field: &'static str, line: u32 },
    #[error("line {line}: unsupported element <{element}>: {reason}")]
    Unsupported { element: String, reason: &'static str, line: u32 },
    #[error("line {line}: invalid value `{value}` in <{element}>")]
    InvalidValue { element: String, value: String, line: u32 },
    #[error("line {line}: module path `{path}` must be relative")]
    AbsoluteModule { path: String, line: u32 },
    #[error("unresolvable property reference `{token}`")]
    UnresolvedProperty { token: String },
    #[error("property reference `{token}` exceeds substitution depth (cycle)")]
    PropertyCycle { token: String },
    #[error("parent {gav} could not be loaded: {reason}")]
    ParentUnavailable { gav: Gav, reason: String },
    #[error("parent chain exceeds {max} levels at {gav}")]
    ParentChainTooDeep { gav: Gav, max: usize },
    #[error("parent chain revisits {gav}")]
    ParentCycle { gav: Gav },
    #[error("project is missing its {0} (not declared or inherited)")]
    MissingCoordinate(&'static str),
    #[error(transparent)]
    Coordinate(#[from] GavError),
    #[error("dependency {key}: {source}")]
    VersionSpec { key: GaKey, source: VersionSpecError },
}

/// An exclusion pattern; `*` in either position matches anything.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exclusion {
    pub group_id: String,
    pub artifact_id: String,
}

impl Exclusion {
    pub fn new(group_id: &str, artifact_id: &str) -> Self {
        Exclusion { group_id: group_id.into(), artifact_id: artifact_id.into() }
    }

    pub fn matches(&self, group_id: &str, artifact_id: &str) -> bool {
        (self.group_id == "*" || self.group_id == group_id)
            && (self.artifact_id == "*" || self.artifact_id == artifact_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyDecl {
    pub group_id: String,
    pub artifact_id: String,
    /// Raw version text; `None` defers to dependency management.
    pub version: Option<String>,
    pub scope: Scope,
    pub optional: bool,
    pub exclusions: Vec<Exclusion>,
    /// The `<type>` of the dependency.
    pub packaging: String,
    pub classifier: Option<String>,
}

impl DependencyDecl {
    pub fn new(group_id: &str, artifact_id: &str, version: Option<&str>) -> Self {
        DependencyDecl {
            group_id: group_id.into(),
            artifact_id: artifact_id.into(),
            version: version.map(Into::into),
            scope: Scope::Compile,
            optional: false,
            exclusions: Vec::new(),
            packaging: "jar".into(),
            classifier: None,
        }
    }

    pub fn key(&self) -> GaKey {
        GaKey::new(&self.group_id, &self.artifact_id)
    }

    pub fn version_spec(&self) -> Result<Option<VersionSpec>, PomError> {
        self.version
            .as_deref()
            .map(parse_version_spec)
            .transpose()
            .map_err(|source| PomError::VersionSpec { key: self.key(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentRef {
    pub group_id: String,
    pub artifact_id: String,
    pub version: String,
    pub relative_path: Option<String>,
}

impl ParentRef {
    pub fn gav(&self) -> Result<Gav, GavError> {
        Gav::new(&self.group_id, &self.artifact_id, &self.version)
    }
}

/// Build plugin coordinates; configuration bodies are not modelled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluginDecl {
    pub group_id: String,
    pub artifact_id: String,
    pub version: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PomModel {
    pub group_id: Option<String>,
    pub artifact_id: String,
    pub version: Option<String>,
    pub packaging: String,
    pub parent: Option<ParentRef>,
    pub properties: IndexMap<String, String>,
    pub dependencies: Vec<DependencyDecl>,
    pub dependency_management: Vec<DependencyDecl>,
    pub modules: Vec<String>,
    pub plugins: Vec<PluginDecl>,
    pub plugin_management: Vec<PluginDecl>,
}

impl PomModel {
    pub fn new(artifact_id: &str) -> Self {
        PomModel {
            group_id: None,
            artifact_id: artifact_id.into(),
            version: None,
            packaging: "jar".into(),
            parent: None,
            properties: IndexMap::new(),
            dependencies: Vec::new(),
            dependency_management: Vec::new(),
            modules: Vec::new(),
            plugins: Vec::new(),
            plugin_management: Vec::new(),
        }
    }

    /// Group id, falling back to the parent's.
    pub fn effective_group_id(&self) -> Option<&str> {
        self.group_id.as_deref().or(self.parent.as_ref().map(|p| p.group_id.as_str()))
    }

    /// Version, falling back to the parent's.
    pub fn effective_version(&self) -> Option<&str> {
        self.version.as_deref().or(self.parent.as_ref().map(|p| p.version.as_str()))
    }

    /// Serializes the model as a minimal POM document.
    pub fn to_xml(&self) -> String {
        write::model_to_xml(self)
    }
}

/// The manifest after parent inheritance and property interpolation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectivePom {
    pub coordinates: Gav,
    pub packaging: String,
    pub properties: IndexMap<String, String>,
    pub dependencies: Vec<DependencyDecl>,
    pub dependency_management: Vec<DependencyDecl>,
    pub modules: Vec<String>,
    pub plugins: Vec<PluginDecl>,
}

impl EffectivePom {
    /// A `pom`-packaged project that only enumerates modules.
    pub fn is_aggregator(&self) -> bool {
        self.packaging == "pom" && !self.modules.is_empty()
    }

    pub fn managed(&self, key: &GaKey) -> Option<&DependencyDecl> {
        self.dependency_management.iter().find(|d| d.group_id == key.group_id && d.artifact_id == key.artifact_id)
    }

    /// Back to a parentless model, e.g. to re-run [`effective_pom`] on it.
    pub fn to_model(&self) -> PomModel {
        PomModel {
            group_id: Some(self.coordinates.group_id.clone()),
            artifact_id: self.coordinates.artifact_id.clone(),
            version: Some(self.coordinates.version.clone()),
            packaging: self.packaging.clone(),
            parent: None,
            properties: self.properties.clone(),
            dependencies: self.dependencies.clone(),
            dependency_management: self.dependency_management.clone(),
            modules: self.modules.clone(),
            plugins: self.plugins.clone(),
            plugin_management: Vec::new(),
        }
    }
}
