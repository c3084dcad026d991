use std::fs;

use mvnlock_core::integrity::{validate, verify_checksums, FindingKind, Severity, ValidateOptions};
use mvnlock_core::lockfile::{
    diff, generate_all, generate_lockfile, parse_lockfile, serialize, ChangeKind, EnvironmentMetadata, GenerateError,
    GenerateOptions, ModuleLockfile,
};
use mvnlock_core::project::{discover_modules, module_effective, ProjectError};
use mvnlock_core::repo::artifact_rel_path;
use mvnlock_core::{ChecksumAlgorithm, ChecksumMode, EffectivePom, GaKey, LockfileConfig, Repository};
use mvnlock_fixtures::{dep, flip_byte, package, write_file, Fixture, FixtureKind, Workspace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: &[u8] = include_bytes!("data/golden_lockfile.json");
// sha256 of the gson fixture jar, computed with Python's hashlib.
const GSON_SHA256: &str = "895d0f89630ec46f142b9026de10d837d9c58f4ae24f212843894a82b14ecc11";

fn env(java: &str) -> EnvironmentMetadata {
    EnvironmentMetadata {
        os_name: "linux".into(),
        maven_version: "3.9.6".into(),
        java_version: java.into(),
        tool_version: mvnlock_core::TOOL_VERSION.into(),
    }
}

fn options(config: LockfileConfig) -> GenerateOptions {
    GenerateOptions { config, environment: env("17"), jobs: 4 }
}

fn root_effective(ws: &Workspace, repo: &Repository) -> EffectivePom {
    module_effective(&discover_modules(&ws.project()).unwrap()[0], repo).unwrap()
}

fn generate(f: &Fixture, config: LockfileConfig) -> Vec<ModuleLockfile> {
    generate_all(&f.root(), &f.workspace.repository(), &options(config), &[]).unwrap()
}

#[test]
fn golden_lockfile_round_trips() {
    let lockfile = parse_lockfile(GOLDEN).unwrap();
    assert_eq!(serialize(&lockfile), GOLDEN);
    assert_eq!(lockfile.entries().len(), 7);
    assert_eq!(lockfile.selected_entries().len(), 6);
    assert_eq!(lockfile.plugins.as_ref().map(Vec::len), Some(1));
    let netty = lockfile.entries().into_iter().find(|d| d.artifact_id.starts_with("netty")).unwrap();
    assert_eq!(netty.classifier.as_deref(), Some("linux-x86_64"));
    assert!(netty.artifact().rel_path().ends_with("-4.1.100.Final-linux-x86_64.jar"));

    let compact = serde_json::to_vec(&serde_json::from_slice::<serde_json::Value>(GOLDEN).unwrap()).unwrap();
    assert_eq!(serialize(&parse_lockfile(&compact).unwrap()), GOLDEN);
}

#[test]
fn module_without_dependencies_has_empty_forest() {
    let ws = Workspace::new();
    ws.write_project_pom(".", &package("org.example", "empty", "1.0"));
    let repo = ws.repository();
    let generated = generate_lockfile(&root_effective(&ws, &repo), &repo, &options(LockfileConfig::default())).unwrap();
    assert!(generated.lockfile.dependencies.is_empty());
    assert!(generated.lockfile.environment.is_none());
    assert!(generated.lockfile.plugins.is_none());
}

#[test]
fn direct_dependency_records_independent_digest() {
    let ws = Workspace::new();
    ws.publish(&package("com.google.code.gson", "gson", "2.13.2"));
    let mut app = package("org.example", "app", "1.0");
    app.dependencies.push(dep("com.google.code.gson", "gson", "2.13.2"));
    ws.write_project_pom(".", &app);
    let repo = ws.repository();
    let lockfile = generate_lockfile(&root_effective(&ws, &repo), &repo, &options(LockfileConfig::default())).unwrap().lockfile;
    assert_eq!(lockfile.dependencies.len(), 1);
    let gson = &lockfile.dependencies[0];
    assert!(gson.direct && gson.selected && gson.children.is_empty());
    assert_eq!(gson.checksum.digest(), GSON_SHA256);
    assert_eq!(gson.repository_source.trim_end_matches('/'), ws.remote_url().trim_end_matches('/'));
}

#[test]
fn diamond_selects_the_shared_dependency_once() {
    let f = Fixture::build(FixtureKind::Diamond);
    let lockfile = &generate(&f, LockfileConfig::default())[0].lockfile;
    let d = GaKey::new("org.diamond", "d");
    let selected: Vec<_> = lockfile.selected_entries().into_iter().filter(|e| e.key() == d).collect();
    assert_eq!(selected.len(), 1);
    let b = lockfile.dependencies.iter().find(|e| e.artifact_id == "b").unwrap();
    assert!(b.children.iter().any(|c| c.key() == d && c.selected));
    let c = lockfile.dependencies.iter().find(|e| e.artifact_id == "c").unwrap();
    assert!(c.children.iter().any(|x| x.key() == d && !x.selected));
    assert!(lockfile.entries().iter().all(|e| e.artifact_id != "e" && e.artifact_id != "opt"));
}

#[test]
fn one_lockfile_per_module() {
    let ws = Workspace::new();
    let mut root = package("org.example", "parent", "1.0");
    root.packaging = "pom".into();
    root.modules = vec!["one".into(), "two".into()];
    ws.write_project_pom(".", &root);
    for name in ["one", "two"] {
        let mut m = package("org.example", name, "1.0");
        m.parent = Some(mvnlock_fixtures::parent_ref("org.example", "parent", "1.0"));
        ws.write_project_pom(name, &m);
    }
    let repo = ws.repository();
    let modules = generate_all(&ws.project(), &repo, &options(LockfileConfig::default()), &[]).unwrap();
    let paths: Vec<&str> = modules.iter().map(|m| m.module.rel_path.as_str()).collect();
    assert_eq!(paths, [".", "one", "two"]);

    fs::remove_dir_all(ws.project().join("two")).unwrap();
    let err = generate_all(&ws.project(), &repo, &options(LockfileConfig::default()), &[]).unwrap_err();
    assert!(matches!(err, GenerateError::Project(ProjectError::MissingModule { .. })), "{err}");
    assert!(err.to_string().contains("two"), "{err}");
}

#[test]
fn generation_is_repeatable() {
    for kind in FixtureKind::ALL {
        let f = Fixture::build(kind);
        let first: Vec<Vec<u8>> = generate(&f, LockfileConfig::default()).iter().map(|m| serialize(&m.lockfile)).collect();
        let second: Vec<Vec<u8>> = generate(&f, LockfileConfig::default()).iter().map(|m| serialize(&m.lockfile)).collect();
        assert_eq!(first, second, "{}", f.name());
    }
}

fn remote_config() -> LockfileConfig {
    LockfileConfig { checksum_mode: ChecksumMode::Remote, checksum_algorithm: ChecksumAlgorithm::Sha512, ..LockfileConfig::default() }
}

#[test]
fn remote_mode_detects_altered_sidecars_and_local_divergence() {
    let f = Fixture::build(FixtureKind::SingleModule);
    let repo = f.workspace.repository();
    let m = &generate(&f, remote_config())[0];
    assert!(m.lockfile.entries().iter().all(|e| e.checksum.mode() == ChecksumMode::Remote));
    let clean = validate(&m.effective, &m.lockfile, &repo, false, &ValidateOptions::default()).unwrap();
    assert!(clean.passed && clean.findings.is_empty(), "{}", clean.to_text());

    let gson = m.lockfile.dependencies.iter().find(|d| d.artifact_id == "gson").unwrap().gav();
    let jar = artifact_rel_path(&gson, "jar", None);
    flip_byte(&f.workspace.cache().join(&jar), 10);
    let report = validate(&m.effective, &m.lockfile, &repo, false, &ValidateOptions::default()).unwrap();
    let kinds: Vec<_> = report.findings.iter().map(|f| (f.kind, f.artifact_id.as_str())).collect();
    assert_eq!(kinds, [(FindingKind::SourceMismatch, "gson")]);
    flip_byte(&f.workspace.cache().join(&jar), 10);

    write_file(&f.workspace.remote().join(format!("{jar}.sha512")), "ab".repeat(64).as_bytes());
    let report = validate(&m.effective, &m.lockfile, &repo, false, &ValidateOptions::default()).unwrap();
    let kinds: Vec<_> = report.findings.iter().map(|f| (f.kind, f.artifact_id.as_str())).collect();
    assert_eq!(kinds, [(FindingKind::ChecksumMismatch, "gson")]);
    assert!(!report.passed);
}

#[test]
fn mode_override_verifies_locally() {
    let f = Fixture::build(FixtureKind::SingleModule);
    let repo = f.workspace.repository();
    let m = &generate(&f, LockfileConfig::default())[0];
    let offline = Repository::new(mvnlock_core::RepositoryConfig::local(f.workspace.cache()).offline(true)).unwrap();
    assert!(verify_checksums(&m.lockfile.dependencies, &offline, None, 2).is_empty());
    let remote = verify_checksums(&m.lockfile.dependencies, &repo, Some(ChecksumMode::Remote), 2);
    assert!(remote.is_empty(), "{remote:?}");
}

#[test]
fn newer_in_range_release_is_reported_as_drift() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in FixtureKind::ALL {
        let f = Fixture::build(kind);
        let modules = generate(&f, LockfileConfig::default());
        let published = f.mutate(&mut rng);
        let repo = f.workspace.repository();
        let mut drift = 0;
        for m in &modules {
            let effective = module_effective(&m.module, &repo).unwrap();
            let report = validate(&effective, &m.lockfile, &repo, false, &ValidateOptions::default()).unwrap();
            drift += report
                .findings
                .iter()
                .filter(|f| matches!(f.kind, FindingKind::VersionMismatch | FindingKind::MissingDependency | FindingKind::ExtraDependency))
                .count();
            if report.findings.iter().any(|f| f.kind == FindingKind::ChecksumMismatch) {
                panic!("{}: {}", f.name(), report.to_text());
            }
        }
        assert!(drift > 0, "{}: no drift after publishing {published:?}", f.name());
    }
}

#[test]
fn environment_drift_only_warns() {
    let f = Fixture::build(FixtureKind::SingleModule);
    let repo = f.workspace.repository();
    let config = LockfileConfig { include_environment: true, ..LockfileConfig::default() };
    let m = &generate(&f, config)[0];
    let options = ValidateOptions { environment: Some(env("21")), ..ValidateOptions::default() };
    let report = validate(&m.effective, &m.lockfile, &repo, false, &options).unwrap();
    assert!(report.passed);
    assert_eq!(report.findings.len(), 1);
    assert_eq!((report.findings[0].kind, report.findings[0].severity), (FindingKind::EnvironmentDrift, Severity::Warning));
    assert_eq!((report.findings[0].expected.as_str(), report.findings[0].actual.as_str()), ("17", "21"));
}

#[test]
fn diff_follows_a_regeneration() {
    let f = Fixture::build(FixtureKind::SingleModule);
    let before = generate(&f, LockfileConfig::default()).remove(0).lockfile;
    let gson = GaKey::new("com.google.code.gson", "gson");
    let newer = f.publish_newer(&mut ChaCha8Rng::seed_from_u64(3), &gson, 2);
    let after = generate(&f, LockfileConfig::default()).remove(0).lockfile;
    let changes = diff(&before, &after).unwrap();
    let bump = changes.iter().find(|c| c.key == gson).unwrap();
    assert_eq!(bump.kind, ChangeKind::VersionChanged);
    assert_eq!(bump.after.as_deref(), Some(newer.version.as_str()));
    assert!(changes.iter().filter(|c| c.key != gson).all(|c| c.kind == ChangeKind::Added));
    assert!(diff(&after, &after).unwrap().is_empty());
}
