//! Validation of a project and its artifact cache against a lockfile.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gav::{GaKey, Gav};
use crate::lockfile::generate::{parallel_map, plugin_gavs};
use crate::lockfile::{EnvironmentMetadata, GenerateError, LockedDependency, LockedPlugin, Lockfile};
use crate::pom::EffectivePom;
use crate::repo::{Artifact, ArtifactRepository, ChecksumMode, ChecksumRecord, RepoError};
use crate::resolver::{resolve, ResolveError};

pub const UNAVAILABLE: &str = "<unavailable>";
pub const ABSENT: &str = "<absent>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    VersionMismatch,
    ChecksumMismatch,
    MissingDependency,
    ExtraDependency,
    EnvironmentDrift,
    SourceMismatch,
}

impl FindingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::VersionMismatch => "version-mismatch",
            FindingKind::ChecksumMismatch => "checksum-mismatch",
            FindingKind::MissingDependency => "missing-dependency",
            FindingKind::ExtraDependency => "extra-dependency",
            FindingKind::EnvironmentDrift => "environment-drift",
            FindingKind::SourceMismatch => "source-mismatch",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            FindingKind::EnvironmentDrift => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Finding {
    pub kind: FindingKind,
    pub group_id: String,
    pub artifact_id: String,
    /// Version of the artifact a checksum finding concerns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    pub expected: String,
    pub actual: String,
    pub severity: Severity,
}

impl Finding {
    pub fn new(kind: FindingKind, key: &GaKey, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Finding {
            kind,
            group_id: key.group_id.clone(),
            artifact_id: key.artifact_id.clone(),
            version: None,
            expected: expected.into(),
            actual: actual.into(),
            severity: kind.severity(),
        }
    }

    fn with_version(mut self, version: &str) -> Self {
        self.version = Some(version.to_string());
        self
    }

    pub fn key(&self) -> GaKey {
        GaKey::new(&self.group_id, &self.artifact_id)
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{severity}: {} {}:{}", self.kind.as_str(), self.group_id, self.artifact_id)?;
        if let Some(v) = &self.version {
            write!(f, ":{v}")?;
        }
        write!(f, " expected {} actual {}", self.expected, self.actual)
    }
}

fn serialize_display<T: fmt::Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    #[serde(serialize_with = "serialize_display")]
    pub module: Gav,
    pub findings: Vec<Finding>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn new(module: Gav, mut findings: Vec<Finding>) -> Self {
        findings.sort();
        findings.dedup();
        let passed = findings.iter().all(|f| f.severity != Severity::Error);
        ValidationReport { module, findings, passed, notes: Vec::new() }
    }

    pub fn skipped(module: Gav) -> Self {
        ValidationReport { module, findings: Vec::new(), passed: true, notes: vec!["validation skipped for this module".into()] }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let status = if self.passed { "PASSED" } else { "FAILED" };
        let _ = writeln!(out, "{}: {status}", self.module);
        for note in &self.notes {
            let _ = writeln!(out, "  note: {note}");
        }
        for finding in &self.findings {
            let _ = writeln!(out, "  {finding}");
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("lockfile belongs to {locked}, but the POM describes {actual}")]
    ModuleMismatch { locked: Gav, actual: Gav },
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Plugins(#[from] GenerateError),
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Verify in this mode instead of the one recorded in the lockfile.
    pub mode_override: Option<ChecksumMode>,
    /// The current environment; drift is only reported when given.
    pub environment: Option<EnvironmentMetadata>,
    pub jobs: usize,
}

/// Field-wise comparison of environment metadata. Every finding is a
/// warning.
pub fn check_environment(expected: Option<&EnvironmentMetadata>, actual: &EnvironmentMetadata) -> Vec<Finding> {
    let Some(expected) = expected else { return Vec::new() };
    let key = |name: &str| GaKey::new("environment", name);
    expected
        .fields()
        .iter()
        .zip(actual.fields())
        .filter(|((_, e), (_, a))| e != a)
        .map(|((name, e), (_, a))| Finding::new(FindingKind::EnvironmentDrift, &key(name), *e, a))
        .collect()
}

struct Check {
    key: GaKey,
    artifact: Artifact,
    recorded: ChecksumRecord,
}

fn digest_or_unavailable(result: &Result<ChecksumRecord, RepoError>) -> String {
    match result {
        Ok(c) => c.digest().to_string(),
        Err(_) => UNAVAILABLE.to_string(),
    }
}

fn verify(checks: &[Check], repo: &(impl ArtifactRepository + ?Sized), mode_override: Option<ChecksumMode>, jobs: usize) -> Vec<Finding> {
    let results = parallel_map(checks, jobs, |check| {
        let algorithm = check.recorded.algorithm();
        let mode = mode_override.unwrap_or(check.recorded.mode());
        let expected = check.recorded.digest();
        let finding = |kind, actual: String| {
            Some(Finding::new(kind, &check.key, expected, actual).with_version(&check.artifact.gav.version))
        };
        match mode {
            ChecksumMode::Local => {
                let local = repo.checksum(&check.artifact, ChecksumMode::Local, algorithm);
                let actual = digest_or_unavailable(&local);
                (actual != expected).then(|| finding(FindingKind::ChecksumMismatch, actual)).flatten()
            }
            ChecksumMode::Remote => {
                let remote = digest_or_unavailable(&repo.checksum(&check.artifact, ChecksumMode::Remote, algorithm));
                if remote != expected {
                    return finding(FindingKind::ChecksumMismatch, remote);
                }
                let local = digest_or_unavailable(&repo.checksum(&check.artifact, ChecksumMode::Local, algorithm));
                (local != remote).then(|| finding(FindingKind::SourceMismatch, local)).flatten()
            }
        }
    });
    results.into_iter().flatten().collect()
}

fn dependency_checks<'a>(entries: impl Iterator<Item = &'a LockedDependency>) -> Vec<Check> {
    let mut seen = HashSet::new();
    entries
        .filter(|d| seen.insert(d.artifact().rel_path()))
        .map(|d| Check { key: d.key(), artifact: d.artifact(), recorded: d.checksum.clone() })
        .collect()
}

fn plugin_checks(plugins: &[LockedPlugin]) -> Vec<Check> {
    plugins
        .iter()
        .map(|p| Check { key: p.gav.key(), artifact: Artifact::jar(p.gav.clone()), recorded: p.checksum.clone() })
        .collect()
}

/// Recomputes the digest of every artifact in a locked forest, each file
/// once.
pub fn verify_checksums<R: ArtifactRepository + ?Sized>(
    forest: &[LockedDependency],
    repo: &R,
    mode_override: Option<ChecksumMode>,
    jobs: usize,
) -> Vec<Finding> {
    fn all<'a>(nodes: &'a [LockedDependency], out: &mut Vec<&'a LockedDependency>) {
        for n in nodes {
            out.push(n);
            all(&n.children, out);
        }
    }
    let mut entries = Vec::new();
    all(forest, &mut entries);
    verify(&dependency_checks(entries.into_iter()), repo, mode_override, jobs)
}

fn compare_sets(locked: &BTreeMap<GaKey, String>, resolved: &BTreeMap<GaKey, String>) -> Vec<Finding> {
    let keys: BTreeSet<&GaKey> = locked.keys().chain(resolved.keys()).collect();
    let mut out = Vec::new();
    for key in keys {
        match (locked.get(key), resolved.get(key)) {
            (Some(l), Some(r)) if l != r => out.push(Finding::new(FindingKind::VersionMismatch, key, l, r)),
            (Some(l), None) => out.push(Finding::new(FindingKind::MissingDependency, key, l, ABSENT)),
            (None, Some(r)) => out.push(Finding::new(FindingKind::ExtraDependency, key, ABSENT, r)),
            _ => {}
        }
    }
    out
}

/// Re-resolves `pom` with the lockfile's recorded configuration and compares
/// the result, then the artifact digests and the environment, against the
/// lockfile.
pub fn validate<R: ArtifactRepository + ?Sized>(
    pom: &EffectivePom,
    lockfile: &Lockfile,
    repo: &R,
    skip: bool,
    options: &ValidateOptions,
) -> Result<ValidationReport, ValidateError> {
    if skip {
        return Ok(ValidationReport::skipped(lockfile.module.clone()));
    }
    if pom.coordinates != lockfile.module {
        return Err(ValidateError::ModuleMismatch { locked: lockfile.module.clone(), actual: pom.coordinates.clone() });
    }
    let config = lockfile.config;
    let tree = if pom.is_aggregator() { None } else { Some(resolve(pom, repo, config.include_test)?) };

    let locked: BTreeMap<GaKey, String> =
        lockfile.selected_entries().into_iter().map(|d| (d.key(), d.version.clone())).collect();
    let resolved: BTreeMap<GaKey, String> = tree
        .as_ref()
        .map(|t| t.flattened.iter().map(|n| (n.gav.key(), n.gav.version.clone())).collect())
        .unwrap_or_default();
    let mut findings = compare_sets(&locked, &resolved);

    // Only artifacts the current resolution still uses are hashed; drifted
    // entries are already reported above.
    let still_used: HashSet<Gav> = tree.as_ref().map(|t| t.walk().into_iter().map(|n| n.gav.clone()).collect()).unwrap_or_default();
    let mut checks = dependency_checks(lockfile.entries().into_iter().filter(|d| still_used.contains(&d.gav())));

    if let Some(plugins) = &lockfile.plugins {
        let locked: BTreeMap<GaKey, String> = plugins.iter().map(|p| (p.gav.key(), p.gav.version.clone())).collect();
        let current: BTreeMap<GaKey, String> =
            plugin_gavs(pom)?.into_iter().map(|g| (g.key(), g.version)).collect();
        findings.extend(compare_sets(&locked, &current));
        let unchanged: Vec<LockedPlugin> =
            plugins.iter().filter(|p| current.get(&p.gav.key()) == Some(&p.gav.version)).cloned().collect();
        checks.extend(plugin_checks(&unchanged));
    }

    findings.extend(verify(&checks, repo, options.mode_override, options.jobs));
    if let Some(actual) = &options.environment {
        findings.extend(check_environment(lockfile.environment.as_ref(), actual));
    }
    Ok(ValidationReport::new(lockfile.module.clone(), findings))
}
