use std::fs;

use mvnlock_cli::{run_with, Io};
use mvnlock_core::freezer::FROZEN_POM_NAME;
use mvnlock_core::lockfile::{parse_lockfile, LOCKFILE_NAME};
use mvnlock_core::project::read_pom;
use mvnlock_core::{ChecksumAlgorithm, Lockfile};
use mvnlock_fixtures::{dep, flip_byte, Fixture, FixtureKind};
use serde_json::Value;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn mvnlock(f: &Fixture, command: &str, extra: &[&str]) -> Outcome {
    let root = f.root().display().to_string();
    let remote = f.workspace.remote_url();
    let cache = f.workspace.cache().display().to_string();
    let mut args = vec!["mvnlock", command, "--project", &root, "--repo-url", &remote, "--local-repo", &cache];
    args.extend_from_slice(extra);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(args, &mut Io { out: &mut out, err: &mut err });
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn lockfile(f: &Fixture, module: &str) -> Lockfile {
    parse_lockfile(&fs::read(f.module_dir(module).join(LOCKFILE_NAME)).unwrap()).unwrap()
}

fn add_dependency(f: &Fixture, g: &str, a: &str, v: &str) {
    let pom = f.root().join("pom.xml");
    let (_, mut model) = read_pom(&pom).unwrap();
    model.dependencies.push(dep(g, a, v));
    fs::write(&pom, model.to_xml()).unwrap();
}

#[test]
fn generate_writes_and_rerun_is_identical() {
    let f = Fixture::build(FixtureKind::Aggregator);
    let first = mvnlock(&f, "generate", &[]);
    assert_eq!(first.code, 0, "{}", first.err);
    assert!(first.out.contains("core: "), "{}", first.out);
    let bytes: Vec<Vec<u8>> = f.modules.iter().map(|m| fs::read(f.module_dir(m).join(LOCKFILE_NAME)).unwrap()).collect();
    assert_eq!(mvnlock(&f, "generate", &[]).code, 0);
    let again: Vec<Vec<u8>> = f.modules.iter().map(|m| fs::read(f.module_dir(m).join(LOCKFILE_NAME)).unwrap()).collect();
    assert_eq!(bytes, again);
}

#[test]
fn unresolvable_dependency_fails_with_its_coordinates() {
    let f = Fixture::build(FixtureKind::SingleModule);
    add_dependency(&f, "org.none", "ghost", "1.0");
    let run = mvnlock(&f, "generate", &[]);
    assert_eq!(run.code, 2);
    assert!(run.err.contains("org.none:ghost:1.0"), "{}", run.err);
    assert!(!f.root().join(LOCKFILE_NAME).exists());
}

#[test]
fn flags_round_trip_into_config() {
    let f = Fixture::build(FixtureKind::SingleModule);
    let flags = ["--include-plugins", "--checksum-algorithm", "sha1", "--include-test", "false", "--include-environment", "--env-java", "21"];
    assert_eq!(mvnlock(&f, "generate", &flags).code, 0);
    let lock = lockfile(&f, ".");
    assert!(lock.config.include_plugins && lock.config.include_environment && !lock.config.include_test);
    assert_eq!(lock.config.checksum_algorithm, ChecksumAlgorithm::Sha1);
    assert_eq!(lock.environment.as_ref().unwrap().java_version, "21");
    assert!(lock.entries().iter().all(|e| e.artifact_id != "junit"));

    let validated = mvnlock(&f, "validate", &["--env-java", "17"]);
    assert_eq!(validated.code, 0, "{}", validated.out);
    assert!(validated.out.contains("environment-drift"), "{}", validated.out);
}

#[test]
fn validate_exit_codes() {
    let f = Fixture::build(FixtureKind::SingleModule);
    assert_eq!(mvnlock(&f, "validate", &[]).code, 2);
    assert_eq!(mvnlock(&f, "generate", &[]).code, 0);
    let clean = mvnlock(&f, "validate", &[]);
    assert_eq!(clean.code, 0, "{}", clean.out);
    assert!(clean.out.contains("validation passed"));

    let gson = lockfile(&f, ".").selected_entries().iter().find(|d| d.artifact_id == "gson").unwrap().gav();
    flip_byte(&f.workspace.cached_jar(&gson), 0);
    let tampered = mvnlock(&f, "validate", &[]);
    assert_eq!(tampered.code, 1);
    assert!(tampered.out.contains(&format!("error: checksum-mismatch {gson}")), "{}", tampered.out);

    fs::write(f.root().join(LOCKFILE_NAME), "{").unwrap();
    assert_eq!(mvnlock(&f, "validate", &[]).code, 2);
}

#[test]
fn machine_report_carries_every_finding_field() {
    let f = Fixture::build(FixtureKind::SingleModule);
    assert_eq!(mvnlock(&f, "generate", &[]).code, 0);
    let gson = lockfile(&f, ".").selected_entries().iter().find(|d| d.artifact_id == "gson").unwrap().gav();
    flip_byte(&f.workspace.cached_jar(&gson), 5);
    let run = mvnlock(&f, "validate", &["--format", "machine"]);
    assert_eq!(run.code, 1);
    let doc: Value = serde_json::from_str(&run.out).unwrap();
    assert_eq!(doc["passed"], false);
    let report = &doc["modules"][0]["report"];
    assert_eq!(report["module"], "org.example:single-app:1.0.0");
    let finding = &report["findings"][0];
    for field in ["kind", "groupId", "artifactId", "version", "expected", "actual", "severity"] {
        assert!(!finding[field].is_null(), "{field} missing in {finding}");
    }
    assert_eq!(finding["expected"], lockfile(&f, ".").selected_entries().iter().find(|d| d.artifact_id == "gson").unwrap().checksum.digest());
}

#[test]
fn skipped_modules_are_not_validated_or_frozen() {
    let f = Fixture::build(FixtureKind::Aggregator);
    assert_eq!(mvnlock(&f, "generate", &[]).code, 0);
    fs::remove_file(f.module_dir("api").join(LOCKFILE_NAME)).unwrap();
    assert_eq!(mvnlock(&f, "validate", &[]).code, 2);
    let skipped = mvnlock(&f, "validate", &["--skip-module", "api"]);
    assert_eq!(skipped.code, 0, "{}{}", skipped.out, skipped.err);
    assert!(skipped.out.contains("[api]"), "{}", skipped.out);
    assert_eq!(mvnlock(&f, "freeze", &["--skip-module", "api/"]).code, 0);
    assert!(f.module_dir("core").join(FROZEN_POM_NAME).exists());
    assert!(!f.module_dir("api").join(FROZEN_POM_NAME).exists());
}

#[test]
fn freeze_exit_codes_and_rerun() {
    let f = Fixture::build(FixtureKind::Diamond);
    assert_eq!(mvnlock(&f, "generate", &[]).code, 0);
    assert_eq!(mvnlock(&f, "freeze", &[]).code, 0);
    let frozen = fs::read(f.root().join(FROZEN_POM_NAME)).unwrap();
    assert!(String::from_utf8_lossy(&frozen).contains("Generated by mvnlock"));
    assert_eq!(mvnlock(&f, "freeze", &[]).code, 0);
    assert_eq!(fs::read(f.root().join(FROZEN_POM_NAME)).unwrap(), frozen);

    f.workspace.publish(&mvnlock_fixtures::package("org.late", "lib", "1.0"));
    add_dependency(&f, "org.late", "lib", "1.0");
    let stale = mvnlock(&f, "freeze", &[]);
    assert_eq!(stale.code, 2);
    assert!(stale.err.contains("org.late:lib"), "{}", stale.err);
}

#[test]
fn ci_check_without_drift_leaves_files_alone() {
    let f = Fixture::build(FixtureKind::Ranges);
    assert_eq!(mvnlock(&f, "generate", &["--checksum-algorithm", "sha512"]).code, 0);
    let before = fs::read(f.root().join(LOCKFILE_NAME)).unwrap();
    // the recorded configuration wins over the command-line default
    let run = mvnlock(&f, "ci-check", &["--changed-file", "pom.xml"]);
    assert_eq!(run.code, 0, "{}{}", run.out, run.err);
    assert_eq!(fs::read(f.root().join(LOCKFILE_NAME)).unwrap(), before);
}

#[test]
fn ci_check_failure_keeps_existing_lockfiles() {
    let f = Fixture::build(FixtureKind::SingleModule);
    assert_eq!(mvnlock(&f, "generate", &[]).code, 0);
    let before = fs::read(f.root().join(LOCKFILE_NAME)).unwrap();
    add_dependency(&f, "org.none", "ghost", "1.0");
    assert_eq!(mvnlock(&f, "ci-check", &["--changed-file", "sub/dir/pom.xml"]).code, 2);
    assert_eq!(fs::read(f.root().join(LOCKFILE_NAME)).unwrap(), before);
}

#[test]
fn diff_lists_changes() {
    let f = Fixture::build(FixtureKind::SingleModule);
    assert_eq!(mvnlock(&f, "generate", &[]).code, 0);
    let old = f.workspace.path().join("old.json");
    fs::copy(f.root().join(LOCKFILE_NAME), &old).unwrap();
    assert_eq!(mvnlock(&f, "generate", &["--include-test", "false"]).code, 0);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let new = f.root().join(LOCKFILE_NAME);
    let args = ["mvnlock", "diff", old.to_str().unwrap(), new.to_str().unwrap()];
    assert_eq!(run_with(args, &mut Io { out: &mut out, err: &mut err }), 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.lines().any(|l| l.starts_with("removed") && l.contains("junit:junit")), "{text}");
}

#[test]
fn argument_errors_and_help() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(run_with(["mvnlock", "explode"], &mut Io { out: &mut out, err: &mut err }), 2);
    assert_eq!(run_with(["mvnlock", "validate", "--checksum-mode", "psychic"], &mut Io { out: &mut out, err: &mut err }), 2);
    assert_eq!(run_with(["mvnlock", "--help"], &mut Io { out: &mut out, err: &mut err }), 0);
    assert!(String::from_utf8(out).unwrap().contains("ci-check"));
}
