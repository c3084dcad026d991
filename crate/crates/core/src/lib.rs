//! Lockfiles for Maven projects.
//!
//! The crate parses `pom.xml` manifests, resolves the full dependency tree
//! with Maven's nearest-wins mediation, records every artifact with its
//! checksum in a canonical `lockfile.json`, validates a build environment
//! against that record, and emits a frozen `pom.lockfile.xml` that pins the
//! recorded resolution for rebuilds.

#![allow(clippy::result_large_err)]

pub mod freezer;
pub mod gav;
pub mod integrity;
pub mod lockfile;
pub mod pom;
pub mod project;
pub mod repo;
pub mod resolver;
pub mod version;

pub use gav::{GaKey, Gav, GavError, Scope};
pub use lockfile::{Lockfile, LockfileConfig, LockedDependency};
pub use pom::{EffectivePom, PomModel};
pub use repo::{ArtifactRepository, ChecksumAlgorithm, ChecksumMode, ChecksumRecord, Repository, RepositoryConfig};
pub use resolver::{resolve, ResolvedNode, ResolvedTree};

/// Version of this tool, recorded in lockfiles and frozen POM headers.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Name written into generated-file headers.
pub const TOOL_NAME: &str = "mvnlock";
