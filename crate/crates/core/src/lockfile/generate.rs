use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use super::{sort_forest, EnvironmentMetadata, LockedDependency, LockedPlugin, Lockfile, LockfileConfig, LOCKFILE_VERSION};
use crate::gav::{Gav, GavError};
use crate::pom::EffectivePom;
use crate::project::{discover_modules, module_effective, ModuleInfo, ProjectError};
use crate::repo::{Artifact, ArtifactRepository, ChecksumAlgorithm, ChecksumMode, ChecksumRecord, RepoError};
use crate::resolver::{resolve, ResolveError, ResolvedNode};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("plugin {group_id}:{artifact_id} has no version and none is managed")]
    PluginVersionMissing { group_id: String, artifact_id: String },
    #[error("plugin {group_id}:{artifact_id} has invalid coordinates: {source}")]
    BadPlugin { group_id: String, artifact_id: String, source: GavError },
    #[error("cannot checksum {artifact}: {source}")]
    Checksum { artifact: String, source: RepoError },
    #[error("no published remote checksum for: {}", .0.join(", "))]
    RemoteChecksumsMissing(Vec<String>),
    #[error("module {module}: {source}")]
    Module { module: String, source: Box<GenerateError> },
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub config: LockfileConfig,
    /// Recorded only when `config.include_environment` is set.
    pub environment: EnvironmentMetadata,
    /// Concurrent checksum workers; 0 picks a default.
    pub jobs: usize,
}

impl GenerateOptions {
    pub fn new(config: LockfileConfig) -> Self {
        GenerateOptions { config, environment: EnvironmentMetadata::probe(), jobs: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub lockfile: Lockfile,
    pub warnings: Vec<String>,
}

/// A generated lockfile together with the module it belongs to.
#[derive(Debug, Clone)]
pub struct ModuleLockfile {
    pub module: ModuleInfo,
    pub effective: EffectivePom,
    pub lockfile: Lockfile,
    pub warnings: Vec<String>,
}

fn worker_count(jobs: usize, work: usize) -> usize {
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).min(8);
    let n = if jobs == 0 { default } else { jobs };
    n.clamp(1, work.max(1))
}

/// Applies `f` to every item on a pool of workers. Output order follows
/// input order, whatever the completion order.
pub fn parallel_map<T: Sync, U: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<U>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..worker_count(jobs, items.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let result = f(item);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot is filled")).collect()
}

/// Checksum and repository source of each artifact.
pub fn checksum_all<R: ArtifactRepository + ?Sized>(
    repo: &R,
    artifacts: &[Artifact],
    mode: ChecksumMode,
    algorithm: ChecksumAlgorithm,
    jobs: usize,
) -> Vec<Result<(ChecksumRecord, String), RepoError>> {
    parallel_map(artifacts, jobs, |artifact| {
        repo.checksum(artifact, mode, algorithm).map(|c| (c, repo.source_of(artifact)))
    })
}

pub(crate) fn plugin_gavs(pom: &EffectivePom) -> Result<Vec<Gav>, GenerateError> {
    pom.plugins
        .iter()
        .map(|p| {
            let version = p.version.as_deref().ok_or_else(|| GenerateError::PluginVersionMissing {
                group_id: p.group_id.clone(),
                artifact_id: p.artifact_id.clone(),
            })?;
            Gav::new(&p.group_id, &p.artifact_id, version).map_err(|source| GenerateError::BadPlugin {
                group_id: p.group_id.clone(),
                artifact_id: p.artifact_id.clone(),
                source,
            })
        })
        .collect()
}

fn lock_node(node: &ResolvedNode, sums: &BTreeMap<String, (ChecksumRecord, String)>) -> LockedDependency {
    let (checksum, source) = sums[&node.artifact().rel_path()].clone();
    LockedDependency {
        group_id: node.gav.group_id.clone(),
        artifact_id: node.gav.artifact_id.clone(),
        version: node.gav.version.clone(),
        scope: node.effective_scope,
        checksum,
        repository_source: source,
        direct: node.depth == 1,
        selected: node.selected,
        packaging: node.packaging.clone(),
        classifier: node.classifier.clone(),
        children: node.children.iter().map(|c| lock_node(c, sums)).collect(),
    }
}

/// Resolves one effective POM and records every occurrence with its
/// checksum. Aggregator POMs get an empty forest.
pub fn generate_lockfile<R: ArtifactRepository + ?Sized>(
    pom: &EffectivePom,
    repo: &R,
    options: &GenerateOptions,
) -> Result<Generated, GenerateError> {
    let config = options.config;
    let tree = if pom.is_aggregator() { None } else { Some(resolve(pom, repo, config.include_test)?) };
    let nodes: Vec<&ResolvedNode> = tree.as_ref().map(|t| t.walk()).unwrap_or_default();
    let plugins = if config.include_plugins { plugin_gavs(pom)? } else { Vec::new() };

    let mut artifacts: Vec<Artifact> = Vec::new();
    let mut index = BTreeMap::new();
    for artifact in nodes.iter().map(|n| n.artifact()).chain(plugins.iter().cloned().map(Artifact::jar)) {
        index.entry(artifact.rel_path()).or_insert_with(|| {
            artifacts.push(artifact.clone());
            artifacts.len() - 1
        });
    }

    let results = checksum_all(repo, &artifacts, config.checksum_mode, config.checksum_algorithm, options.jobs);
    let mut sums = BTreeMap::new();
    let mut missing = Vec::new();
    for (artifact, result) in artifacts.iter().zip(results) {
        match result {
            Ok(found) => {
                sums.insert(artifact.rel_path(), found);
            }
            Err(RepoError::ChecksumUnavailable { .. }) if config.checksum_mode == ChecksumMode::Remote => {
                missing.push(artifact.to_string());
            }
            Err(source) => return Err(GenerateError::Checksum { artifact: artifact.to_string(), source }),
        }
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(GenerateError::RemoteChecksumsMissing(missing));
    }

    let mut dependencies: Vec<LockedDependency> = tree
        .as_ref()
        .map(|t| t.nodes.iter().map(|n| lock_node(n, &sums)).collect())
        .unwrap_or_default();
    sort_forest(&mut dependencies);

    let plugins = config.include_plugins.then(|| {
        let mut locked: Vec<LockedPlugin> = plugins
            .iter()
            .map(|gav| LockedPlugin { gav: gav.clone(), checksum: sums[&Artifact::jar(gav.clone()).rel_path()].0.clone() })
            .collect();
        locked.sort_by(|a, b| a.gav.cmp(&b.gav));
        locked.dedup_by(|a, b| a.gav == b.gav);
        locked
    });

    Ok(Generated {
        lockfile: Lockfile {
            lockfile_version: LOCKFILE_VERSION,
            module: pom.coordinates.clone(),
            config,
            environment: config.include_environment.then(|| options.environment.clone()),
            dependencies,
            plugins,
        },
        warnings: tree.map(|t| t.warnings).unwrap_or_default(),
    })
}

/// Generates a lockfile for the project at `root` and for each of its
/// modules. Nothing is written; any failure aborts the whole run.
pub fn generate_all<R: ArtifactRepository + ?Sized>(
    root: &Path,
    repo: &R,
    options: &GenerateOptions,
    skip: &[String],
) -> Result<Vec<ModuleLockfile>, GenerateError> {
    let modules: Vec<ModuleInfo> = discover_modules(root)?
        .into_iter()
        .filter(|m| !skip.iter().any(|s| s.trim_end_matches('/') == m.rel_path))
        .collect();
    let results = parallel_map(&modules, options.jobs, |module| {
        let wrap = |e: GenerateError| GenerateError::Module { module: module.rel_path.clone(), source: Box::new(e) };
        let effective = module_effective(module, repo).map_err(|e| wrap(e.into()))?;
        let generated = generate_lockfile(&effective, repo, options).map_err(wrap)?;
        Ok((effective, generated))
    });
    modules
        .into_iter()
        .zip(results)
        .map(|(module, r)| {
            r.map(|(effective, g)| ModuleLockfile { module, effective, lockfile: g.lockfile, warnings: g.warnings })
        })
        .collect()
}
