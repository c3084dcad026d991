//! The `lockfile.json` schema.
//!
//! Serialization is canonical: keys in schema order, siblings sorted by
//! (groupId, artifactId), two-space indentation, `\n` line endings and a
//! trailing newline. [`serialize`] and [`parse_lockfile`] are inverse on
//! canonical input.

mod diff;
pub(crate) mod generate;

pub use diff::{diff, Change, ChangeKind, DiffError};
pub use generate::{checksum_all, generate_all, generate_lockfile, parallel_map, GenerateError, GenerateOptions, Generated, ModuleLockfile};

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gav::{GaKey, Gav, Scope};
use crate::repo::{Artifact, ChecksumAlgorithm, ChecksumMode, ChecksumRecord};

pub const LOCKFILE_VERSION: u32 = 1;
pub const LOCKFILE_NAME: &str = "lockfile.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LockfileConfig {
    pub include_plugins: bool,
    pub include_environment: bool,
    pub checksum_mode: ChecksumMode,
    pub checksum_algorithm: ChecksumAlgorithm,
    pub include_test: bool,
}

impl Default for LockfileConfig {
    fn default() -> Self {
        LockfileConfig {
            include_plugins: false,
            include_environment: false,
            checksum_mode: ChecksumMode::Local,
            checksum_algorithm: ChecksumAlgorithm::Sha256,
            include_test: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EnvironmentMetadata {
    pub os_name: String,
    pub maven_version: String,
    pub java_version: String,
    pub tool_version: String,
}

impl EnvironmentMetadata {
    /// Probes the running environment. `JAVA_VERSION` and `MAVEN_VERSION`
    /// are read from the process environment; absent values become
    /// `unknown`.
    pub fn probe() -> Self {
        let var = |name: &str| {
            std::env::var(name).ok().filter(|v| !v.trim().is_empty()).unwrap_or_else(|| "unknown".to_string())
        };
        EnvironmentMetadata {
            os_name: std::env::consts::OS.to_string(),
            maven_version: var("MAVEN_VERSION"),
            java_version: var("JAVA_VERSION"),
            tool_version: crate::TOOL_VERSION.to_string(),
        }
    }

    pub fn fields(&self) -> [(&'static str, &str); 4] {
        [
            ("osName", &self.os_name),
            ("mavenVersion", &self.maven_version),
            ("javaVersion", &self.java_version),
            ("toolVersion", &self.tool_version),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockedDependency {
    pub group_id: String,
    pub artifact_id: String,
    pub version: String,
    pub scope: Scope,
    pub checksum: ChecksumRecord,
    pub repository_source: String,
    pub direct: bool,
    /// False for occurrences that lost mediation; those are leaves.
    pub selected: bool,
    pub packaging: String,
    pub classifier: Option<String>,
    pub children: Vec<LockedDependency>,
}

impl LockedDependency {
    pub fn key(&self) -> GaKey {
        GaKey::new(&self.group_id, &self.artifact_id)
    }

    pub fn gav(&self) -> Gav {
        Gav {
            group_id: self.group_id.clone(),
            artifact_id: self.artifact_id.clone(),
            version: self.version.clone(),
        }
    }

    pub fn artifact(&self) -> Artifact {
        Artifact::new(self.gav(), &self.packaging, self.classifier.as_deref())
    }

    fn sort_key(&self) -> (&str, &str, bool, &str) {
        (&self.group_id, &self.artifact_id, !self.selected, &self.version)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockedPlugin {
    pub gav: Gav,
    pub checksum: ChecksumRecord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lockfile {
    pub lockfile_version: u32,
    pub module: Gav,
    pub config: LockfileConfig,
    pub environment: Option<EnvironmentMetadata>,
    pub dependencies: Vec<LockedDependency>,
    pub plugins: Option<Vec<LockedPlugin>>,
}

/// Sorts siblings at every level into canonical order.
pub fn sort_forest(forest: &mut [LockedDependency]) {
    forest.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    for dep in forest.iter_mut() {
        sort_forest(&mut dep.children);
    }
}

impl Lockfile {
    /// Every entry in breadth-first order over the canonical forest.
    pub fn entries(&self) -> Vec<&LockedDependency> {
        let mut out = Vec::new();
        let mut queue: VecDeque<&LockedDependency> = self.dependencies.iter().collect();
        while let Some(dep) = queue.pop_front() {
            out.push(dep);
            queue.extend(dep.children.iter());
        }
        out
    }

    /// Selected entries only: one per (groupId, artifactId).
    pub fn selected_entries(&self) -> Vec<&LockedDependency> {
        self.entries().into_iter().filter(|d| d.selected).collect()
    }

    pub fn selected_by_key(&self) -> BTreeMap<GaKey, &LockedDependency> {
        self.selected_entries().into_iter().map(|d| (d.key(), d)).collect()
    }
}

#[derive(Debug, Error)]
pub enum LockfileError {
    #[error("invalid lockfile JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported lockfileVersion {0} (this tool reads version {LOCKFILE_VERSION})")]
    UnsupportedVersion(String),
    #[error("invalid lockfile field `{field}`: {message}")]
    Schema { field: String, message: String },
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> LockfileError {
    LockfileError::Schema { field: field.into(), message: message.into() }
}

fn is_true(b: &bool) -> bool {
    *b
}

fn is_jar(s: &String) -> bool {
    s == "jar"
}

fn default_true() -> bool {
    true
}

fn default_jar() -> String {
    "jar".into()
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct DependencyRepr {
    group_id: String,
    artifact_id: String,
    version: String,
    scope: Scope,
    checksum_algorithm: ChecksumAlgorithm,
    checksum: String,
    checksum_mode: ChecksumMode,
    repository_source: String,
    direct: bool,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    selected: bool,
    #[serde(rename = "type", default = "default_jar", skip_serializing_if = "is_jar")]
    packaging: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classifier: Option<String>,
    children: Vec<DependencyRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct PluginRepr {
    group_id: String,
    artifact_id: String,
    version: String,
    checksum_algorithm: ChecksumAlgorithm,
    checksum: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct LockfileRepr {
    lockfile_version: u32,
    group_id: String,
    artifact_id: String,
    version: String,
    config: LockfileConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    environment: Option<EnvironmentMetadata>,
    dependencies: Vec<DependencyRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    plugins: Option<Vec<PluginRepr>>,
}

fn dep_to_repr(dep: &LockedDependency) -> DependencyRepr {
    DependencyRepr {
        group_id: dep.group_id.clone(),
        artifact_id: dep.artifact_id.clone(),
        version: dep.version.clone(),
        scope: dep.scope,
        checksum_algorithm: dep.checksum.algorithm(),
        checksum: dep.checksum.digest().to_string(),
        checksum_mode: dep.checksum.mode(),
        repository_source: dep.repository_source.clone(),
        direct: dep.direct,
        selected: dep.selected,
        packaging: dep.packaging.clone(),
        classifier: dep.classifier.clone(),
        children: dep.children.iter().map(dep_to_repr).collect(),
    }
}

fn dep_from_repr(repr: DependencyRepr, field: &str, depth: usize) -> Result<LockedDependency, LockfileError> {
    let checksum = ChecksumRecord::new(repr.checksum_algorithm, &repr.checksum, repr.checksum_mode)
        .map_err(|e| schema(format!("{field}.checksum"), e.to_string()))?;
    Gav::new(&repr.group_id, &repr.artifact_id, &repr.version).map_err(|e| schema(field, e.to_string()))?;
    if repr.direct != (depth == 1) {
        return Err(schema(format!("{field}.direct"), format!("must be {} at depth {depth}", depth == 1)));
    }
    if !repr.selected && !repr.children.is_empty() {
        return Err(schema(format!("{field}.children"), "an unselected entry cannot have children"));
    }
    if repr.repository_source.is_empty() {
        return Err(schema(format!("{field}.repositorySource"), "must not be empty"));
    }
    let children = repr
        .children
        .into_iter()
        .enumerate()
        .map(|(i, c)| dep_from_repr(c, &format!("{field}.children[{i}]"), depth + 1))
        .collect::<Result<Vec<_>, _>>()?;
    check_sorted(&children, &format!("{field}.children"))?;
    Ok(LockedDependency {
        group_id: repr.group_id,
        artifact_id: repr.artifact_id,
        version: repr.version,
        scope: repr.scope,
        checksum,
        repository_source: repr.repository_source,
        direct: repr.direct,
        selected: repr.selected,
        packaging: repr.packaging,
        classifier: repr.classifier,
        children,
    })
}

fn check_sorted(siblings: &[LockedDependency], field: &str) -> Result<(), LockfileError> {
    if siblings.windows(2).any(|w| w[0].sort_key() > w[1].sort_key()) {
        return Err(schema(field, "entries are not sorted by (groupId, artifactId)"));
    }
    Ok(())
}

/// Canonical bytes of a lockfile.
pub fn serialize(lockfile: &Lockfile) -> Vec<u8> {
    let mut deps = lockfile.dependencies.clone();
    sort_forest(&mut deps);
    let mut plugins = lockfile.plugins.clone();
    if let Some(list) = &mut plugins {
        list.sort_by(|a, b| a.gav.cmp(&b.gav));
    }
    let repr = LockfileRepr {
        lockfile_version: lockfile.lockfile_version,
        group_id: lockfile.module.group_id.clone(),
        artifact_id: lockfile.module.artifact_id.clone(),
        version: lockfile.module.version.clone(),
        config: lockfile.config,
        environment: lockfile.environment.clone(),
        dependencies: deps.iter().map(dep_to_repr).collect(),
        plugins: plugins.map(|list| {
            list.iter()
                .map(|p| PluginRepr {
                    group_id: p.gav.group_id.clone(),
                    artifact_id: p.gav.artifact_id.clone(),
                    version: p.gav.version.clone(),
                    checksum_algorithm: p.checksum.algorithm(),
                    checksum: p.checksum.digest().to_string(),
                })
                .collect()
        }),
    };
    let mut out = serde_json::to_vec_pretty(&repr).expect("lockfile serialization cannot fail");
    out.push(b'\n');
    out
}

pub fn parse_lockfile(bytes: &[u8]) -> Result<Lockfile, LockfileError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    match value.get("lockfileVersion") {
        Some(v) if v.as_u64() == Some(LOCKFILE_VERSION as u64) => {}
        Some(v) => return Err(LockfileError::UnsupportedVersion(v.to_string())),
        None => return Err(schema("lockfileVersion", "missing")),
    }
    let repr: LockfileRepr = serde_json::from_slice(bytes)?;
    let module = Gav::new(&repr.group_id, &repr.artifact_id, &repr.version)
        .map_err(|e| schema("groupId/artifactId/version", e.to_string()))?;
    let config = repr.config;

    match (&repr.environment, config.include_environment) {
        (Some(env), true) => {
            for (name, value) in env.fields() {
                if value.trim().is_empty() {
                    return Err(schema(format!("environment.{name}"), "must not be empty"));
                }
            }
        }
        (None, false) => {}
        (Some(_), false) => return Err(schema("environment", "present although includeEnvironment is false")),
        (None, true) => return Err(schema("environment", "missing although includeEnvironment is true")),
    }

    let dependencies = repr
        .dependencies
        .into_iter()
        .enumerate()
        .map(|(i, d)| dep_from_repr(d, &format!("dependencies[{i}]"), 1))
        .collect::<Result<Vec<_>, _>>()?;
    check_sorted(&dependencies, "dependencies")?;

    let plugins = match (repr.plugins, config.include_plugins) {
        (Some(list), true) => Some(
            list.into_iter()
                .enumerate()
                .map(|(i, p)| {
                    let field = format!("plugins[{i}]");
                    let gav = Gav::new(&p.group_id, &p.artifact_id, &p.version)
                        .map_err(|e| schema(field.clone(), e.to_string()))?;
                    let checksum = ChecksumRecord::new(p.checksum_algorithm, &p.checksum, config.checksum_mode)
                        .map_err(|e| schema(format!("{field}.checksum"), e.to_string()))?;
                    Ok(LockedPlugin { gav, checksum })
                })
                .collect::<Result<Vec<_>, LockfileError>>()?,
        ),
        (None, false) => None,
        (Some(_), false) => return Err(schema("plugins", "present although includePlugins is false")),
        (None, true) => return Err(schema("plugins", "missing although includePlugins is true")),
    };

    let lockfile = Lockfile { lockfile_version: LOCKFILE_VERSION, module, config, environment: repr.environment, dependencies, plugins };
    let mut seen = BTreeMap::new();
    for dep in lockfile.selected_entries() {
        if seen.insert(dep.key(), ()).is_some() {
            return Err(schema("dependencies", format!("{} is selected more than once", dep.key())));
        }
    }
    Ok(lockfile)
}
