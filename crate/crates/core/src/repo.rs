//! Maven-layout repository access.
//!
//! A [`Repository`] reads artifacts from a local cache directory laid out
//! exactly like `~/.m2/repository`, filling it from an ordered list of
//! remote base URLs (`https://`, `http://` or `file://`). Checksums are
//! either computed over the cached file (local mode) or read from the
//! remote `.sha1`/`.sha256`/`.sha512` sidecar (remote mode).

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::Digest;
use thiserror::Error;
use url::Url;

use crate::gav::Gav;
use crate::version::sort_versions;

const ORIGIN_SUFFIX: &str = ".mvnlock-origin";
const CACHED_METADATA: &str = "maven-metadata-mvnlock.xml";

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("{what} not found in any repository")]
    NotFound { what: String },
    #[error("transport error fetching {url}: {message}")]
    Transport { url: String, message: String },
    #[error("{what} is not cached and the repository is offline")]
    Offline { what: String },
    #[error("no {algorithm} checksum published for {what}")]
    ChecksumUnavailable { what: String, algorithm: ChecksumAlgorithm },
    #[error("malformed checksum for {what}: {reason}")]
    IntegrityFormat { what: String, reason: String },
    #[error("remote checksums require online mode")]
    OfflineRemoteChecksum,
    #[error("invalid repository URL `{0}`")]
    BadUrl(String),
    #[error("malformed metadata for {what}: {message}")]
    Metadata { what: String, message: String },
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RepoError + '_ {
    move |source| RepoError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChecksumAlgorithm {
    Sha1,
    #[default]
    Sha256,
    Sha512,
}

impl ChecksumAlgorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            ChecksumAlgorithm::Sha1 => "sha1",
            ChecksumAlgorithm::Sha256 => "sha256",
            ChecksumAlgorithm::Sha512 => "sha512",
        }
    }

    /// Sidecar file extension; identical to the algorithm name.
    pub fn extension(self) -> &'static str {
        self.as_str()
    }

    pub fn hex_len(self) -> usize {
        match self {
            ChecksumAlgorithm::Sha1 => 40,
            ChecksumAlgorithm::Sha256 => 64,
            ChecksumAlgorithm::Sha512 => 128,
        }
    }

    pub fn digest_hex(self, bytes: &[u8]) -> String {
        match self {
            ChecksumAlgorithm::Sha1 => hex::encode(sha1::Sha1::digest(bytes)),
            ChecksumAlgorithm::Sha256 => hex::encode(sha2::Sha256::digest(bytes)),
            ChecksumAlgorithm::Sha512 => hex::encode(sha2::Sha512::digest(bytes)),
        }
    }
}

impl fmt::Display for ChecksumAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChecksumAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sha1" => Ok(ChecksumAlgorithm::Sha1),
            "sha256" => Ok(ChecksumAlgorithm::Sha256),
            "sha512" => Ok(ChecksumAlgorithm::Sha512),
            other => Err(format!("unknown checksum algorithm `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChecksumMode {
    #[default]
    Local,
    Remote,
}

impl ChecksumMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ChecksumMode::Local => "local",
            ChecksumMode::Remote => "remote",
        }
    }
}

impl fmt::Display for ChecksumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChecksumMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(ChecksumMode::Local),
            "remote" => Ok(ChecksumMode::Remote),
            other => Err(format!("unknown checksum mode `{other}`")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DigestError {
    #[error("{algorithm} digest must have {expected} hex characters, got {actual}")]
    Length { algorithm: ChecksumAlgorithm, expected: usize, actual: usize },
    #[error("digest contains non-hex characters")]
    NotHex,
}

/// A digest together with the algorithm and the mode that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChecksumRecord {
    algorithm: ChecksumAlgorithm,
    digest: String,
    mode: ChecksumMode,
}

impl ChecksumRecord {
    /// Validates the digest; upper-case hex is normalized to lower case.
    pub fn new(algorithm: ChecksumAlgorithm, digest: &str, mode: ChecksumMode) -> Result<Self, DigestError> {
        let digest = digest.to_ascii_lowercase();
        if digest.len() != algorithm.hex_len() {
            return Err(DigestError::Length { algorithm, expected: algorithm.hex_len(), actual: digest.len() });
        }
        if !digest.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(DigestError::NotHex);
        }
        Ok(ChecksumRecord { algorithm, digest, mode })
    }

    pub fn algorithm(&self) -> ChecksumAlgorithm {
        self.algorithm
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn mode(&self) -> ChecksumMode {
        self.mode
    }
}

/// One artifact file: coordinates plus `<type>` and optional classifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Artifact {
    pub gav: Gav,
    pub packaging: String,
    pub classifier: Option<String>,
}

impl Artifact {
    pub fn new(gav: Gav, packaging: &str, classifier: Option<&str>) -> Self {
        Artifact { gav, packaging: packaging.into(), classifier: classifier.map(Into::into) }
    }

    pub fn jar(gav: Gav) -> Self {
        Artifact::new(gav, "jar", None)
    }

    pub fn rel_path(&self) -> String {
        artifact_rel_path(&self.gav, &self.packaging, self.classifier.as_deref())
    }
}

impl fmt::Display for Artifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gav)?;
        if let Some(c) = &self.classifier {
            write!(f, ":{c}")?;
        }
        if self.packaging != "jar" {
            write!(f, "@{}", self.packaging)?;
        }
        Ok(())
    }
}

/// Repository-relative path of an artifact in the standard Maven layout.
pub fn artifact_rel_path(gav: &Gav, packaging: &str, classifier: Option<&str>) -> String {
    let group = gav.group_id.replace('.', "/");
    let (a, v) = (&gav.artifact_id, &gav.version);
    match classifier {
        Some(c) if !c.is_empty() => format!("{group}/{a}/{v}/{a}-{v}-{c}.{packaging}"),
        _ => format!("{group}/{a}/{v}/{a}-{v}.{packaging}"),
    }
}

fn metadata_dir(group_id: &str, artifact_id: &str) -> String {
    format!("{}/{artifact_id}", group_id.replace('.', "/"))
}

/// POM text and version listings: everything dependency resolution needs.
pub trait PomSource: Send + Sync {
    fn fetch_pom(&self, gav: &Gav) -> Result<String, RepoError>;
    /// Available versions, ascending by version order.
    fn list_versions(&self, group_id: &str, artifact_id: &str) -> Result<Vec<String>, RepoError>;
}

/// A [`PomSource`] that can also vouch for artifact contents.
pub trait ArtifactRepository: PomSource {
    fn checksum(
        &self,
        artifact: &Artifact,
        mode: ChecksumMode,
        algorithm: ChecksumAlgorithm,
    ) -> Result<ChecksumRecord, RepoError>;

    /// Base URL the artifact was obtained from, or `local`.
    fn source_of(&self, artifact: &Artifact) -> String;
}

#[derive(Debug, Clone)]
pub struct RepositoryConfig {
    pub remote_base_urls: Vec<String>,
    pub local_repo_root: PathBuf,
    pub offline: bool,
    pub timeout: Duration,
}

impl RepositoryConfig {
    pub fn local(root: impl Into<PathBuf>) -> Self {
        RepositoryConfig {
            remote_base_urls: Vec::new(),
            local_repo_root: root.into(),
            offline: false,
            timeout: Duration::from_secs(30),
        }
    }

    pub fn with_remote(mut self, url: impl Into<String>) -> Self {
        self.remote_base_urls.push(url.into());
        self
    }

    pub fn offline(mut self, offline: bool) -> Self {
        self.offline = offline;
        self
    }
}

enum Remote {
    File { base: String, root: PathBuf },
    Http { base: String },
}

impl Remote {
    fn base(&self) -> &str {
        match self {
            Remote::File { base, .. } | Remote::Http { base } => base,
        }
    }
}

pub struct Repository {
    config: RepositoryConfig,
    remotes: Vec<Remote>,
    agent: ureq::Agent,
}

impl Repository {
    pub fn new(config: RepositoryConfig) -> Result<Self, RepoError> {
        let mut remotes = Vec::new();
        for raw in &config.remote_base_urls {
            let base = raw.trim_end_matches('/').to_string();
            let url = Url::parse(&base).map_err(|_| RepoError::BadUrl(raw.clone()))?;
            match url.scheme() {
                "file" => {
                    let root = url.to_file_path().map_err(|_| RepoError::BadUrl(raw.clone()))?;
                    remotes.push(Remote::File { base, root });
                }
                "http" | "https" => remotes.push(Remote::Http { base }),
                _ => return Err(RepoError::BadUrl(raw.clone())),
            }
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Repository { config, remotes, agent })
    }

    pub fn config(&self) -> &RepositoryConfig {
        &self.config
    }

    pub fn local_path(&self, rel: &str) -> PathBuf {
        self.config.local_repo_root.join(rel)
    }

    /// `Ok(None)` means the remote does not have the file.
    fn get_remote(&self, remote: &Remote, rel: &str) -> Result<Option<Vec<u8>>, RepoError> {
        match remote {
            Remote::File { root, .. } => {
                let path = root.join(rel);
                match fs::read(&path) {
                    Ok(bytes) => Ok(Some(bytes)),
                    Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
                    Err(source) => Err(RepoError::Io { path, source }),
                }
            }
            Remote::Http { base } => {
                let url = format!("{base}/{rel}");
                let transport = |message: String| RepoError::Transport { url: url.clone(), message };
                let mut resp = self.agent.get(&url).call().map_err(|e| transport(e.to_string()))?;
                match resp.status().as_u16() {
                    200..=299 => resp
                        .body_mut()
                        .with_config()
                        .limit(u64::MAX)
                        .read_to_vec()
                        .map(Some)
                        .map_err(|e| transport(e.to_string())),
                    404 | 410 => Ok(None),
                    status => Err(transport(format!("HTTP status {status}"))),
                }
            }
        }
    }

    /// Makes `rel` present in the local cache, fetching it if needed and
    /// permitted. Returns the cached path.
    pub fn ensure_cached(&self, rel: &str) -> Result<PathBuf, RepoError> {
        let path = self.local_path(rel);
        if path.is_file() {
            return Ok(path);
        }
        if self.config.offline {
            return Err(RepoError::Offline { what: rel.to_string() });
        }
        for remote in &self.remotes {
            if let Some(bytes) = self.get_remote(remote, rel)? {
                write_atomic(&path_with_suffix(&path, ORIGIN_SUFFIX), remote.base().as_bytes())?;
                write_atomic(&path, &bytes)?;
                return Ok(path);
            }
        }
        Err(RepoError::NotFound { what: rel.to_string() })
    }

    pub fn checksum_local(&self, artifact: &Artifact, algorithm: ChecksumAlgorithm) -> Result<ChecksumRecord, RepoError> {
        let path = self.ensure_cached(&artifact.rel_path()).map_err(|e| match e {
            RepoError::NotFound { .. } | RepoError::Offline { .. } => RepoError::NotFound { what: artifact.to_string() },
            other => other,
        })?;
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let digest = algorithm.digest_hex(&bytes);
        Ok(ChecksumRecord::new(algorithm, &digest, ChecksumMode::Local).expect("hasher output is well-formed"))
    }

    pub fn checksum_remote(&self, artifact: &Artifact, algorithm: ChecksumAlgorithm) -> Result<ChecksumRecord, RepoError> {
        if self.config.offline {
            return Err(RepoError::OfflineRemoteChecksum);
        }
        let rel = format!("{}.{}", artifact.rel_path(), algorithm.extension());
        for remote in &self.remotes {
            if let Some(bytes) = self.get_remote(remote, &rel)? {
                let text = String::from_utf8_lossy(&bytes);
                let digest = parse_checksum_file(&text, algorithm).map_err(|reason| RepoError::IntegrityFormat {
                    what: artifact.to_string(),
                    reason,
                })?;
                return Ok(ChecksumRecord::new(algorithm, &digest, ChecksumMode::Remote).expect("validated by parser"));
            }
        }
        Err(RepoError::ChecksumUnavailable { what: artifact.to_string(), algorithm })
    }

    fn remote_versions(&self, dir: &str) -> Result<Option<Vec<String>>, RepoError> {
        let rel = format!("{dir}/maven-metadata.xml");
        let mut found = None::<Vec<String>>;
        for remote in &self.remotes {
            if let Some(bytes) = self.get_remote(remote, &rel)? {
                let versions = parse_metadata_versions(&String::from_utf8_lossy(&bytes)).map_err(|message| {
                    RepoError::Metadata { what: rel.clone(), message }
                })?;
                found.get_or_insert_with(Vec::new).extend(versions);
            }
        }
        Ok(found)
    }

    fn local_versions(&self, dir: &str) -> Result<Option<Vec<String>>, RepoError> {
        let base = self.local_path(dir);
        for name in [CACHED_METADATA, "maven-metadata.xml", "maven-metadata-local.xml"] {
            let path = base.join(name);
            if path.is_file() {
                let text = fs::read_to_string(&path).map_err(io_err(&path))?;
                let versions = parse_metadata_versions(&text)
                    .map_err(|message| RepoError::Metadata { what: path.display().to_string(), message })?;
                return Ok(Some(versions));
            }
        }
        // no metadata: version directories that hold a POM
        let Ok(entries) = fs::read_dir(&base) else {
            return Ok(None);
        };
        let artifact_id = dir.rsplit('/').next().unwrap_or_default();
        let mut versions = Vec::new();
        for entry in entries.flatten() {
            let name = entry.file_name().to_string_lossy().to_string();
            if entry.path().join(format!("{artifact_id}-{name}.pom")).is_file() {
                versions.push(name);
            }
        }
        Ok((!versions.is_empty()).then_some(versions))
    }
}

impl PomSource for Repository {
    fn fetch_pom(&self, gav: &Gav) -> Result<String, RepoError> {
        let rel = artifact_rel_path(gav, "pom", None);
        let path = self.ensure_cached(&rel).map_err(|e| match e {
            RepoError::NotFound { .. } => RepoError::NotFound { what: format!("POM of {gav}") },
            RepoError::Offline { .. } => RepoError::Offline { what: format!("POM of {gav}") },
            other => other,
        })?;
        fs::read_to_string(&path).map_err(io_err(&path))
    }

    fn list_versions(&self, group_id: &str, artifact_id: &str) -> Result<Vec<String>, RepoError> {
        let dir = metadata_dir(group_id, artifact_id);
        let mut versions = None;
        if !self.config.offline && !self.remotes.is_empty() {
            versions = self.remote_versions(&dir)?;
            if let Some(list) = &mut versions {
                sort_versions(list);
                let cached = self.local_path(&dir).join(CACHED_METADATA);
                let xml = metadata_xml(group_id, artifact_id, list);
                if fs::read(&cached).ok().as_deref() != Some(xml.as_bytes()) {
                    write_atomic(&cached, xml.as_bytes())?;
                }
            }
        }
        if versions.is_none() {
            versions = self.local_versions(&dir)?;
        }
        let mut versions = versions.ok_or_else(|| RepoError::NotFound { what: format!("metadata of {group_id}:{artifact_id}") })?;
        sort_versions(&mut versions);
        Ok(versions)
    }
}

impl ArtifactRepository for Repository {
    fn checksum(&self, artifact: &Artifact, mode: ChecksumMode, algorithm: ChecksumAlgorithm) -> Result<ChecksumRecord, RepoError> {
        match mode {
            ChecksumMode::Local => self.checksum_local(artifact, algorithm),
            ChecksumMode::Remote => self.checksum_remote(artifact, algorithm),
        }
    }

    fn source_of(&self, artifact: &Artifact) -> String {
        let path = path_with_suffix(&self.local_path(&artifact.rel_path()), ORIGIN_SUFFIX);
        fs::read_to_string(path).map(|s| s.trim().to_string()).unwrap_or_else(|_| "local".to_string())
    }
}

fn path_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so concurrent writers never expose a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RepoError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| RepoError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// Extracts the digest from a sidecar file. Accepts `<hex>`, `<hex>  name`
/// and BSD-style `SHA256 (name) = <hex>`.
pub fn parse_checksum_file(text: &str, algorithm: ChecksumAlgorithm) -> Result<String, String> {
    let want = algorithm.hex_len();
    let is_digest = |t: &str| t.len() == want && t.bytes().all(|b| b.is_ascii_hexdigit());
    let first = text.split_whitespace().next().ok_or_else(|| "empty checksum file".to_string())?;
    if is_digest(first) {
        return Ok(first.to_ascii_lowercase());
    }
    if let Some(last) = text.split_whitespace().last().filter(|t| is_digest(t)) {
        if text.contains('=') {
            return Ok(last.to_ascii_lowercase());
        }
    }
    Err(format!("`{}` is not a {algorithm} digest", first.chars().take(80).collect::<String>()))
}

pub fn parse_metadata_versions(xml: &str) -> Result<Vec<String>, String> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| e.to_string())?;
    let versions = doc
        .descendants()
        .filter(|n| n.has_tag_name("versions") && n.parent().is_some_and(|p| p.has_tag_name("versioning")))
        .flat_map(|n| n.children().filter(|c| c.has_tag_name("version")))
        .filter_map(|n| n.text().map(|t| t.trim().to_string()))
        .filter(|t| !t.is_empty())
        .collect();
    Ok(versions)
}

pub fn metadata_xml(group_id: &str, artifact_id: &str, versions: &[String]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<metadata>\n");
    out.push_str(&format!("  <groupId>{group_id}</groupId>\n  <artifactId>{artifact_id}</artifactId>\n"));
    out.push_str("  <versioning>\n    <versions>\n");
    for v in versions {
        out.push_str(&format!("      <version>{v}</version>\n"));
    }
    out.push_str("    </versions>\n  </versioning>\n</metadata>\n");
    out
}
