//! Dependency tree resolution.
//!
//! Nodes are expanded breadth-first in declaration order. The first
//! occurrence of a (groupId, artifactId) at the shallowest depth wins
//! mediation; later occurrences are kept as unselected leaves and never
//! expanded. Root dependency management overrides every transitive version.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gav::{GaKey, Gav, GavError, Scope};
use crate::pom::{effective_pom, parse_pom, DependencyDecl, EffectivePom, Exclusion, PomError};
use crate::repo::{Artifact, PomSource, RepoError};
use crate::version::{parse_version_spec, VersionSpec, VersionSpecError};

pub use crate::version::resolve_range;

/// Dependency path from the root project, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepPath(pub Vec<Gav>);

impl fmt::Display for DepPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, gav) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            write!(f, "{gav}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("cannot fetch POM of {gav} (via {path}): {source}")]
    PomUnavailable { gav: Gav, path: DepPath, source: RepoError },
    #[error("invalid POM of {gav} (via {path}): {source}")]
    InvalidPom { gav: Gav, path: DepPath, source: PomError },
    #[error("cannot list versions of {key} (via {path}): {source}")]
    VersionsUnavailable { key: GaKey, path: DepPath, source: RepoError },
    #[error("no available version of {key} matches {spec} (via {path})")]
    EmptyRange { key: GaKey, spec: String, path: DepPath },
    #[error("dependency {key} has no version and none is managed (via {path})")]
    MissingVersion { key: GaKey, path: DepPath },
    #[error("dependency {key} has an invalid version (via {path}): {source}")]
    BadVersion { key: GaKey, path: DepPath, source: VersionSpecError },
    #[error("dependency {key} has invalid coordinates (via {path}): {source}")]
    BadCoordinate { key: GaKey, path: DepPath, source: GavError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedNode {
    pub gav: Gav,
    pub packaging: String,
    pub classifier: Option<String>,
    pub effective_scope: Scope,
    pub declared_scope: Scope,
    /// 1 for direct dependencies.
    pub depth: usize,
    /// Gavs from the root project down to this node's parent.
    pub parent_path: Vec<Gav>,
    pub selected: bool,
    pub children: Vec<ResolvedNode>,
}

impl ResolvedNode {
    pub fn key(&self) -> GaKey {
        self.gav.key()
    }

    pub fn artifact(&self) -> Artifact {
        Artifact::new(self.gav.clone(), &self.packaging, self.classifier.as_deref())
    }
}

/// A selected node without its subtree, in resolution order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlatNode {
    pub gav: Gav,
    pub scope: Scope,
    pub depth: usize,
    pub packaging: String,
    pub classifier: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedTree {
    pub root: Gav,
    pub nodes: Vec<ResolvedNode>,
    pub flattened: Vec<FlatNode>,
    pub warnings: Vec<String>,
}

impl ResolvedTree {
    /// Every node, selected or not, in depth-first order.
    pub fn walk(&self) -> Vec<&ResolvedNode> {
        fn go<'a>(nodes: &'a [ResolvedNode], out: &mut Vec<&'a ResolvedNode>) {
            for n in nodes {
                out.push(n);
                go(&n.children, out);
            }
        }
        let mut out = Vec::new();
        go(&self.nodes, &mut out);
        out
    }
}

/// Scope of a transitive edge, or `None` when the dependency is not
/// propagated.
pub fn derive_scope(parent_edge_scope: Scope, declared_scope: Scope) -> Option<Scope> {
    match declared_scope {
        Scope::Compile => Some(parent_edge_scope),
        Scope::Runtime => Some(match parent_edge_scope {
            Scope::Compile => Scope::Runtime,
            other => other,
        }),
        Scope::Provided | Scope::Test => None,
    }
}

pub fn is_excluded(excluded: &[Exclusion], group_id: &str, artifact_id: &str) -> bool {
    excluded.iter().any(|e| e.matches(group_id, artifact_id))
}

pub fn apply_exclusions(decls: &[DependencyDecl], excluded: &[Exclusion]) -> Vec<DependencyDecl> {
    decls
        .iter()
        .filter(|d| !is_excluded(excluded, &d.group_id, &d.artifact_id))
        .cloned()
        .collect()
}

struct Slot {
    gav: Gav,
    packaging: String,
    classifier: Option<String>,
    effective_scope: Scope,
    declared_scope: Scope,
    depth: usize,
    parent: Option<usize>,
    selected: bool,
    exclusions: Vec<Exclusion>,
    children: Vec<usize>,
}

struct Resolver<'a, S: PomSource + ?Sized> {
    source: &'a S,
    root: &'a EffectivePom,
    poms: HashMap<Gav, Arc<EffectivePom>>,
    versions: HashMap<GaKey, Vec<String>>,
    slots: Vec<Slot>,
    warnings: Vec<String>,
}

impl<S: PomSource + ?Sized> Resolver<'_, S> {
    fn path_of(&self, parent: Option<usize>) -> Vec<Gav> {
        let mut path = Vec::new();
        let mut cursor = parent;
        while let Some(i) = cursor {
            path.push(self.slots[i].gav.clone());
            cursor = self.slots[i].parent;
        }
        path.push(self.root.coordinates.clone());
        path.reverse();
        path
    }

    fn effective(&mut self, gav: &Gav, parent: Option<usize>) -> Result<Arc<EffectivePom>, ResolveError> {
        if let Some(pom) = self.poms.get(gav) {
            return Ok(pom.clone());
        }
        let path = || DepPath(self.path_of(parent));
        let text = self
            .source
            .fetch_pom(gav)
            .map_err(|source| ResolveError::PomUnavailable { gav: gav.clone(), path: path(), source })?;
        let model = parse_pom(&text).map_err(|source| ResolveError::InvalidPom { gav: gav.clone(), path: path(), source })?;
        let source = self.source;
        let pom = effective_pom(&model, |p| {
            let gav = p.gav().map_err(|e| e.to_string())?;
            let text = source.fetch_pom(&gav).map_err(|e| e.to_string())?;
            parse_pom(&text).map_err(|e| e.to_string())
        })
        .map_err(|source| ResolveError::InvalidPom { gav: gav.clone(), path: path(), source })?;
        let pom = Arc::new(pom);
        self.poms.insert(gav.clone(), pom.clone());
        Ok(pom)
    }

    fn pick_version(&mut self, key: &GaKey, text: Option<&str>, parent: Option<usize>) -> Result<String, ResolveError> {
        let path = |r: &Self| DepPath(r.path_of(parent));
        let text = text.ok_or_else(|| ResolveError::MissingVersion { key: key.clone(), path: path(self) })?;
        let spec = parse_version_spec(text)
            .map_err(|source| ResolveError::BadVersion { key: key.clone(), path: path(self), source })?;
        if let VersionSpec::SoftPin(v) = &spec {
            return Ok(v.clone());
        }
        if !self.versions.contains_key(key) {
            let list = self
                .source
                .list_versions(&key.group_id, &key.artifact_id)
                .map_err(|source| ResolveError::VersionsUnavailable { key: key.clone(), path: path(self), source })?;
            self.versions.insert(key.clone(), list);
        }
        resolve_range(&spec, &self.versions[key]).map_err(|e| ResolveError::EmptyRange {
            key: key.clone(),
            spec: e.spec,
            path: path(self),
        })
    }

    fn push(&mut self, slot: Slot, selected: &mut HashMap<GaKey, usize>, queue: &mut VecDeque<usize>) {
        let index = self.slots.len();
        let key = slot.gav.key();
        let mut slot = slot;
        if let std::collections::hash_map::Entry::Vacant(e) = selected.entry(key) {
            e.insert(index);
            slot.selected = true;
            queue.push_back(index);
        }
        if let Some(parent) = slot.parent {
            self.slots[parent].children.push(index);
        }
        self.slots.push(slot);
    }

    fn run(&mut self, include_test: bool) -> Result<(), ResolveError> {
        let mut selected: HashMap<GaKey, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let root_key = self.root.coordinates.key();

        for decl in &self.root.dependencies {
            if decl.scope == Scope::Test && !include_test {
                continue;
            }
            let key = decl.key();
            if key == root_key {
                self.warnings.push(format!("{} depends on itself; dropped", self.root.coordinates));
                continue;
            }
            let version = self.pick_version(&key, decl.version.as_deref(), None)?;
            let gav = Gav::new(&decl.group_id, &decl.artifact_id, version).map_err(|source| {
                ResolveError::BadCoordinate { key: key.clone(), path: DepPath(self.path_of(None)), source }
            })?;
            let slot = Slot {
                gav,
                packaging: decl.packaging.clone(),
                classifier: decl.classifier.clone(),
                effective_scope: decl.scope,
                declared_scope: decl.scope,
                depth: 1,
                parent: None,
                selected: false,
                exclusions: decl.exclusions.clone(),
                children: Vec::new(),
            };
            self.push(slot, &mut selected, &mut queue);
        }

        while let Some(index) = queue.pop_front() {
            let gav = self.slots[index].gav.clone();
            let pom = self.effective(&gav, Some(index))?;
            let parent_scope = self.slots[index].effective_scope;
            let depth = self.slots[index].depth + 1;
            let excluded = self.slots[index].exclusions.clone();
            let on_path: HashSet<Gav> = self.path_of(Some(index)).into_iter().collect();
            let mut seen_here = HashSet::new();

            for decl in apply_exclusions(&pom.dependencies, &excluded) {
                if decl.optional {
                    continue;
                }
                let Some(scope) = derive_scope(parent_scope, decl.scope) else {
                    continue;
                };
                let key = decl.key();
                if !seen_here.insert(key.clone()) {
                    continue;
                }
                let version_text = match self.root.managed(&key).and_then(|m| m.version.clone()) {
                    Some(managed) => Some(managed),
                    None => decl.version.clone(),
                };
                let version = self.pick_version(&key, version_text.as_deref(), Some(index))?;
                let child = Gav::new(&decl.group_id, &decl.artifact_id, version).map_err(|source| {
                    ResolveError::BadCoordinate { key: key.clone(), path: DepPath(self.path_of(Some(index))), source }
                })?;
                if on_path.contains(&child) || key == root_key {
                    self.warnings.push(format!(
                        "cycle: {} -> {} dropped",
                        DepPath(self.path_of(Some(index))),
                        child
                    ));
                    continue;
                }
                let mut exclusions = excluded.clone();
                for e in &decl.exclusions {
                    if !exclusions.contains(e) {
                        exclusions.push(e.clone());
                    }
                }
                let slot = Slot {
                    gav: child,
                    packaging: decl.packaging.clone(),
                    classifier: decl.classifier.clone(),
                    effective_scope: scope,
                    declared_scope: decl.scope,
                    depth,
                    parent: Some(index),
                    selected: false,
                    exclusions,
                    children: Vec::new(),
                };
                self.push(slot, &mut selected, &mut queue);
            }
        }
        Ok(())
    }

    fn build(&self, index: usize) -> ResolvedNode {
        let s = &self.slots[index];
        ResolvedNode {
            gav: s.gav.clone(),
            packaging: s.packaging.clone(),
            classifier: s.classifier.clone(),
            effective_scope: s.effective_scope,
            declared_scope: s.declared_scope,
            depth: s.depth,
            parent_path: self.path_of(s.parent),
            selected: s.selected,
            children: s.children.iter().map(|&c| self.build(c)).collect(),
        }
    }
}

/// Resolves the full dependency tree of `pom`. With `include_test` unset,
/// direct test-scoped dependencies are left out.
pub fn resolve<S: PomSource + ?Sized>(pom: &EffectivePom, source: &S, include_test: bool) -> Result<ResolvedTree, ResolveError> {
    let mut r = Resolver {
        source,
        root: pom,
        poms: HashMap::new(),
        versions: HashMap::new(),
        slots: Vec::new(),
        warnings: Vec::new(),
    };
    r.run(include_test)?;

    let nodes = (0..r.slots.len()).filter(|&i| r.slots[i].parent.is_none()).map(|i| r.build(i)).collect();
    let flattened = r
        .slots
        .iter()
        .filter(|s| s.selected)
        .map(|s| FlatNode {
            gav: s.gav.clone(),
            scope: s.effective_scope,
            depth: s.depth,
            packaging: s.packaging.clone(),
            classifier: s.classifier.clone(),
        })
        .collect();
    Ok(ResolvedTree { root: pom.coordinates.clone(), nodes, flattened, warnings: r.warnings })
}
