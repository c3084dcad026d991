//! Random dependency universes and a brute-force resolution oracle.
//!
//! Universes are generated as plain data. The resolver under test sees them
//! only as POM XML served from a [`MemorySource`]; the oracle walks the data
//! directly, compares versions by their position on a fixed ladder, and
//! evaluates ranges as index intervals.

use std::collections::{BTreeMap, HashMap};

use mvnlock_core::pom::{DependencyDecl, Exclusion, PomModel};
use mvnlock_core::repo::{Artifact, ArtifactRepository, ChecksumRecord, PomSource, RepoError};
use mvnlock_core::{ChecksumAlgorithm, ChecksumMode, GaKey, Gav, Scope};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::{jar_bytes, package};

/// Every version used in a universe, in ascending order.
pub const LADDER: [&str; 6] = ["1.0-alpha", "1.0", "1.0.1", "1.1", "2.0-rc1", "2.0"];
pub const GROUP: &str = "org.rand";
pub const MAX_PACKAGES: usize = 30;
pub const MAX_VERSIONS: usize = 4;
pub const MAX_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Spec {
    Exact(usize),
    /// Bounds are ladder indices with an inclusive flag.
    Range { lo: Option<(usize, bool)>, hi: Option<(usize, bool)> },
}

impl Spec {
    pub fn admits(&self, v: usize) -> bool {
        match self {
            Spec::Exact(x) => *x == v,
            Spec::Range { lo, hi } => {
                let above = match lo {
                    None => true,
                    Some((b, true)) => v >= *b,
                    Some((b, false)) => v > *b,
                };
                let below = match hi {
                    None => true,
                    Some((b, true)) => v <= *b,
                    Some((b, false)) => v < *b,
                };
                above && below
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            Spec::Exact(x) => LADDER[*x].to_string(),
            Spec::Range { lo, hi } => {
                let (open, lo_text) = match lo {
                    None => ('(', String::new()),
                    Some((b, inc)) => (if *inc { '[' } else { '(' }, LADDER[*b].to_string()),
                };
                let (close, hi_text) = match hi {
                    None => (')', String::new()),
                    Some((b, inc)) => (if *inc { ']' } else { ')' }, LADDER[*b].to_string()),
                };
                format!("{open}{lo_text},{hi_text}{close}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct UDep {
    pub target: usize,
    /// `None` only for root dependencies whose version is managed.
    pub spec: Option<Spec>,
    pub scope: Scope,
    pub optional: bool,
    pub exclusions: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct UPackage {
    pub level: usize,
    /// Ladder indices, ascending.
    pub versions: Vec<usize>,
    pub deps: BTreeMap<usize, Vec<UDep>>,
}

#[derive(Debug, Clone)]
pub struct Universe {
    pub packages: Vec<UPackage>,
    pub root_deps: Vec<UDep>,
    /// Root dependency management: package index to ladder index.
    pub managed: BTreeMap<usize, usize>,
}

pub fn artifact_name(index: usize) -> String {
    format!("p{index}")
}

fn random_scope(rng: &mut impl Rng) -> Scope {
    match rng.gen_range(0..20) {
        0..=11 => Scope::Compile,
        12..=14 => Scope::Runtime,
        15..=16 => Scope::Provided,
        _ => Scope::Test,
    }
}

fn random_spec(rng: &mut impl Rng, available: &[usize]) -> Spec {
    let pick = *available.choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        return Spec::Exact(pick);
    }
    // bounds are drawn around `pick` so the range is never empty
    let lo = rng.gen_bool(0.7).then(|| {
        let b = rng.gen_range(0..=pick);
        (b, b == pick || rng.gen_bool(0.5))
    });
    let hi = rng.gen_bool(0.7).then(|| {
        let b = rng.gen_range(pick..LADDER.len());
        (b, b == pick || rng.gen_bool(0.5))
    });
    match (lo, hi) {
        (None, None) => Spec::Range { lo: Some((0, true)), hi: None },
        (lo, hi) => Spec::Range { lo, hi },
    }
}

fn random_dep(rng: &mut impl Rng, packages: &[UPackage], target: usize, excludable: &[usize]) -> UDep {
    UDep {
        target,
        spec: Some(random_spec(rng, &packages[target].versions)),
        scope: random_scope(rng),
        optional: rng.gen_bool(0.1),
        exclusions: if rng.gen_bool(0.15) { excludable.choose(rng).into_iter().copied().collect() } else { Vec::new() },
    }
}

impl Universe {
    /// A universe of at most [`MAX_PACKAGES`] packages with at most
    /// [`MAX_VERSIONS`] versions each. Packages only depend on packages of a
    /// strictly higher level, so paths are at most [`MAX_DEPTH`] deep.
    pub fn random(rng: &mut impl Rng) -> Universe {
        let n = rng.gen_range(1..=MAX_PACKAGES);
        let mut packages: Vec<UPackage> = (0..n)
            .map(|_| {
                let mut ladder: Vec<usize> = (0..LADDER.len()).collect();
                ladder.shuffle(rng);
                let mut versions: Vec<usize> = ladder[..rng.gen_range(1..=MAX_VERSIONS)].to_vec();
                versions.sort();
                UPackage { level: rng.gen_range(0..MAX_DEPTH), versions, deps: BTreeMap::new() }
            })
            .collect();

        for i in 0..n {
            let deeper: Vec<usize> = (0..n).filter(|&j| packages[j].level > packages[i].level).collect();
            let mut deps = BTreeMap::new();
            for &v in &packages[i].versions {
                let mut targets = deeper.clone();
                targets.shuffle(rng);
                targets.truncate(rng.gen_range(1..=3));
                let list: Vec<UDep> = targets.iter().map(|&t| random_dep(rng, &packages, t, &deeper)).collect();
                deps.insert(v, list);
            }
            packages[i].deps = deps;
        }

        let mut managed = BTreeMap::new();
        for (i, p) in packages.iter().enumerate() {
            if rng.gen_bool(0.2) {
                managed.insert(i, *p.versions.choose(rng).unwrap());
            }
        }

        let all: Vec<usize> = (0..n).collect();
        let mut roots = all.clone();
        roots.shuffle(rng);
        // shallow packages first, so trees reach the full depth
        roots.sort_by_key(|&i| packages[i].level);
        roots.truncate(rng.gen_range(1..=n.min(5)));
        let mut root_deps: Vec<UDep> = roots.iter().map(|&t| random_dep(rng, &packages, t, &all)).collect();
        for d in &mut root_deps {
            if managed.contains_key(&d.target) && rng.gen_bool(0.5) {
                d.spec = None;
            }
        }
        Universe { packages, root_deps, managed }
    }

    fn decl(&self, d: &UDep) -> DependencyDecl {
        let spec = d.spec.as_ref().map(Spec::render);
        let mut decl = DependencyDecl::new(GROUP, &artifact_name(d.target), spec.as_deref());
        decl.scope = d.scope;
        decl.optional = d.optional;
        decl.exclusions = d.exclusions.iter().map(|&e| Exclusion::new(GROUP, &artifact_name(e))).collect();
        decl
    }

    pub fn package_model(&self, index: usize, version: usize) -> PomModel {
        let mut model = package(GROUP, &artifact_name(index), LADDER[version]);
        model.dependencies = self.packages[index].deps[&version].iter().map(|d| self.decl(d)).collect();
        model
    }

    pub fn root_model(&self) -> PomModel {
        let mut model = package(GROUP, "root", "1.0");
        model.dependencies = self.root_deps.iter().map(|d| self.decl(d)).collect();
        model.dependency_management = self
            .managed
            .iter()
            .map(|(&p, &v)| DependencyDecl::new(GROUP, &artifact_name(p), Some(LADDER[v])))
            .collect();
        model
    }

    pub fn source(&self) -> MemorySource {
        let mut source = MemorySource::default();
        for (i, p) in self.packages.iter().enumerate() {
            for &v in &p.versions {
                source.add(&self.package_model(i, v));
            }
            source.versions.insert(GaKey::new(GROUP, &artifact_name(i)), p.versions.iter().map(|&v| LADDER[v].to_string()).collect());
        }
        source
    }
}

/// POMs and version lists held in memory; artifact digests are computed
/// from [`jar_bytes`].
#[derive(Debug, Default, Clone)]
pub struct MemorySource {
    pub poms: HashMap<Gav, String>,
    pub versions: HashMap<GaKey, Vec<String>>,
}

impl MemorySource {
    pub fn add(&mut self, model: &PomModel) {
        let gav = Gav::new(model.group_id.clone().unwrap(), &model.artifact_id, model.version.clone().unwrap()).unwrap();
        self.poms.insert(gav, model.to_xml());
    }
}

impl PomSource for MemorySource {
    fn fetch_pom(&self, gav: &Gav) -> Result<String, RepoError> {
        self.poms.get(gav).cloned().ok_or_else(|| RepoError::NotFound { what: format!("POM of {gav}") })
    }

    fn list_versions(&self, group_id: &str, artifact_id: &str) -> Result<Vec<String>, RepoError> {
        self.versions
            .get(&GaKey::new(group_id, artifact_id))
            .cloned()
            .ok_or_else(|| RepoError::NotFound { what: format!("metadata of {group_id}:{artifact_id}") })
    }
}

impl ArtifactRepository for MemorySource {
    fn checksum(&self, artifact: &Artifact, mode: ChecksumMode, algorithm: ChecksumAlgorithm) -> Result<ChecksumRecord, RepoError> {
        let digest = algorithm.digest_hex(&jar_bytes(&artifact.gav));
        Ok(ChecksumRecord::new(algorithm, &digest, mode).expect("computed digest is well formed"))
    }

    fn source_of(&self, _artifact: &Artifact) -> String {
        "memory".to_string()
    }
}

/// One selected node as the oracle sees it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OracleNode {
    pub artifact_id: String,
    pub version: String,
    pub scope: Scope,
    pub depth: usize,
}

fn transitive_scope(parent: Scope, declared: Scope) -> Option<Scope> {
    use Scope::*;
    match (parent, declared) {
        (Compile, Compile) => Some(Compile),
        (Compile, Runtime) => Some(Runtime),
        (Runtime, Compile) | (Runtime, Runtime) => Some(Runtime),
        (Provided, Compile) | (Provided, Runtime) => Some(Provided),
        (Test, Compile) | (Test, Runtime) => Some(Test),
        (_, Provided) | (_, Test) => None,
    }
}

fn highest_admitted(spec: &Spec, available: &[usize]) -> Option<usize> {
    available.iter().copied().filter(|&v| spec.admits(v)).max()
}

#[derive(Debug, Clone)]
struct Candidate {
    /// Declaration indices from the root.
    seq: Vec<usize>,
    package: usize,
    version: usize,
    scope: Scope,
    excluded: Vec<usize>,
}

/// Selected nodes of `u`, computed depth by depth: at every depth the
/// candidates are the dependencies of nodes selected one level up, ordered
/// by their declaration-index path, and a package is taken by its first
/// candidate unless an earlier depth already took it. Returns `None` when a
/// version requirement cannot be met.
pub fn oracle_resolve(u: &Universe, include_test: bool) -> Option<Vec<OracleNode>> {
    let mut taken: BTreeMap<usize, OracleNode> = BTreeMap::new();
    let mut level: Vec<Candidate> = Vec::new();
    for (i, d) in u.root_deps.iter().enumerate() {
        if d.scope == Scope::Test && !include_test {
            continue;
        }
        let available = &u.packages[d.target].versions;
        let version = match &d.spec {
            Some(spec) => highest_admitted(spec, available)?,
            None => u.managed[&d.target],
        };
        level.push(Candidate { seq: vec![i], package: d.target, version, scope: d.scope, excluded: d.exclusions.clone() });
    }

    let mut depth = 1;
    while !level.is_empty() {
        level.sort_by(|a, b| a.seq.cmp(&b.seq));
        let mut winners = Vec::new();
        for c in level {
            if taken.contains_key(&c.package) {
                continue;
            }
            taken.insert(
                c.package,
                OracleNode { artifact_id: artifact_name(c.package), version: LADDER[c.version].to_string(), scope: c.scope, depth },
            );
            winners.push(c);
        }
        let mut next = Vec::new();
        for w in &winners {
            for (j, d) in u.packages[w.package].deps[&w.version].iter().enumerate() {
                if d.optional || w.excluded.contains(&d.target) {
                    continue;
                }
                let Some(scope) = transitive_scope(w.scope, d.scope) else { continue };
                let version = match u.managed.get(&d.target) {
                    Some(&v) => v,
                    None => highest_admitted(d.spec.as_ref()?, &u.packages[d.target].versions)?,
                };
                let mut excluded = w.excluded.clone();
                excluded.extend(d.exclusions.iter().copied());
                let mut seq = w.seq.clone();
                seq.push(j);
                next.push(Candidate { seq, package: d.target, version, scope, excluded });
            }
        }
        level = next;
        depth += 1;
    }
    Some(taken.into_values().collect())
}
