//! Test fixtures for mvnlock: on-disk repositories, sample projects, and
//! random dependency universes with an independent resolution oracle.

pub mod projects;
pub mod universe;

use std::fs;
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use mvnlock_core::pom::{DependencyDecl, Exclusion, ParentRef, PomModel};
use mvnlock_core::repo::{artifact_rel_path, metadata_xml};
use mvnlock_core::version::sort_versions;
use mvnlock_core::{ChecksumAlgorithm, Gav, Repository, RepositoryConfig, Scope};
use tempfile::TempDir;

pub use projects::{all_fixtures, Fixture, FixtureKind};

/// A POM model for `g:a:v` with jar packaging.
pub fn package(g: &str, a: &str, v: &str) -> PomModel {
    let mut model = PomModel::new(a);
    model.group_id = Some(g.to_string());
    model.version = Some(v.to_string());
    model
}

pub fn dep(g: &str, a: &str, spec: &str) -> DependencyDecl {
    DependencyDecl::new(g, a, Some(spec))
}

pub fn dep_scoped(g: &str, a: &str, spec: &str, scope: Scope) -> DependencyDecl {
    let mut d = dep(g, a, spec);
    d.scope = scope;
    d
}

pub fn dep_excluding(g: &str, a: &str, spec: &str, exclusions: &[(&str, &str)]) -> DependencyDecl {
    let mut d = dep(g, a, spec);
    d.exclusions = exclusions.iter().map(|(g, a)| Exclusion::new(g, a)).collect();
    d
}

pub fn parent_ref(g: &str, a: &str, v: &str) -> ParentRef {
    ParentRef { group_id: g.into(), artifact_id: a.into(), version: v.into(), relative_path: None }
}

/// Deterministic stand-in for a jar's contents.
pub fn jar_bytes(gav: &Gav) -> Vec<u8> {
    let line = format!("fixture-jar {gav}\n");
    line.repeat(16 + gav.artifact_id.len() % 7).into_bytes()
}

/// A scratch area holding a remote repository, a local cache and a project
/// directory, removed on drop.
pub struct Workspace {
    dir: TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().expect("create temp dir");
        for sub in ["remote", "cache", "project"] {
            fs::create_dir_all(dir.path().join(sub)).expect("create fixture dirs");
        }
        Workspace { dir }
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn remote(&self) -> PathBuf {
        self.dir.path().join("remote")
    }

    pub fn cache(&self) -> PathBuf {
        self.dir.path().join("cache")
    }

    pub fn project(&self) -> PathBuf {
        self.dir.path().join("project")
    }

    pub fn remote_url(&self) -> String {
        url_of(&self.remote())
    }

    pub fn repository_config(&self) -> RepositoryConfig {
        RepositoryConfig::local(self.cache()).with_remote(self.remote_url())
    }

    pub fn repository(&self) -> Repository {
        Repository::new(self.repository_config()).expect("fixture repository")
    }

    /// Publishes a POM and, unless it is `pom`-packaged, a jar with sha1,
    /// sha256 and sha512 sidecars, then refreshes the version metadata.
    pub fn publish(&self, model: &PomModel) -> Gav {
        let g = model.group_id.clone().or(model.parent.as_ref().map(|p| p.group_id.clone())).expect("group id");
        let v = model.version.clone().or(model.parent.as_ref().map(|p| p.version.clone())).expect("version");
        let gav = Gav::new(g, &model.artifact_id, v).expect("valid fixture coordinates");
        write_file(&self.remote().join(artifact_rel_path(&gav, "pom", None)), model.to_xml().as_bytes());
        if model.packaging != "pom" {
            let jar = self.remote().join(artifact_rel_path(&gav, "jar", None));
            let bytes = jar_bytes(&gav);
            write_file(&jar, &bytes);
            for alg in [ChecksumAlgorithm::Sha1, ChecksumAlgorithm::Sha256, ChecksumAlgorithm::Sha512] {
                let mut sidecar = jar.as_os_str().to_owned();
                sidecar.push(format!(".{}", alg.extension()));
                write_file(Path::new(&sidecar), alg.digest_hex(&bytes).as_bytes());
            }
        }
        self.refresh_metadata(&gav.group_id, &gav.artifact_id);
        gav
    }

    pub fn refresh_metadata(&self, group_id: &str, artifact_id: &str) {
        let dir = self.remote().join(group_id.replace('.', "/")).join(artifact_id);
        let versions = published_versions(&dir);
        write_file(&dir.join("maven-metadata.xml"), metadata_xml(group_id, artifact_id, &versions).as_bytes());
    }

    /// Versions of `g:a` present in the remote repository, ascending.
    pub fn remote_versions(&self, group_id: &str, artifact_id: &str) -> Vec<String> {
        published_versions(&self.remote().join(group_id.replace('.', "/")).join(artifact_id))
    }

    /// Writes `model` as `pom.xml` under `rel` inside the project directory.
    pub fn write_project_pom(&self, rel: &str, model: &PomModel) -> PathBuf {
        let dir = if rel == "." { self.project() } else { self.project().join(rel) };
        write_file(&dir.join("pom.xml"), model.to_xml().as_bytes());
        dir
    }

    /// Path of a locally cached artifact file.
    pub fn cached_jar(&self, gav: &Gav) -> PathBuf {
        self.cache().join(artifact_rel_path(gav, "jar", None))
    }
}

impl Default for Workspace {
    fn default() -> Self {
        Self::new()
    }
}

fn published_versions(dir: &Path) -> Vec<String> {
    let mut versions: Vec<String> = fs::read_dir(dir)
        .map(|entries| {
            entries
                .flatten()
                .filter(|e| e.path().is_dir())
                .map(|e| e.file_name().to_string_lossy().to_string())
                .collect()
        })
        .unwrap_or_default();
    sort_versions(&mut versions);
    versions
}

pub fn url_of(path: &Path) -> String {
    let absolute = fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    url::Url::from_directory_path(absolute).expect("absolute path").to_string()
}

pub fn write_file(path: &Path, bytes: &[u8]) {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).expect("create parent dir");
    }
    fs::write(path, bytes).expect("write fixture file");
}

/// Flips every bit of the byte at `offset`, in place.
pub fn flip_byte(path: &Path, offset: usize) {
    let mut file = fs::OpenOptions::new().read(true).write(true).open(path).expect("open file to tamper");
    let mut byte = [0u8];
    file.seek(SeekFrom::Start(offset as u64)).expect("seek");
    file.read_exact(&mut byte).expect("read byte to tamper");
    byte[0] ^= 0xff;
    file.seek(SeekFrom::Start(offset as u64)).expect("seek");
    file.write_all(&byte).expect("write tampered byte");
}
