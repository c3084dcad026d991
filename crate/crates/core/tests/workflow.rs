use std::collections::BTreeSet;
use std::fs;

use mvnlock_core::freezer::{emit_frozen_xml, freeze, FROZEN_POM_NAME};
use mvnlock_core::integrity::{validate, FindingKind, ValidateOptions};
use mvnlock_core::lockfile::{generate_all, parse_lockfile, serialize, GenerateOptions, ModuleLockfile};
use mvnlock_core::project::{effective_from_disk, read_pom};
use mvnlock_core::{resolve, GaKey, LockfileConfig, Repository, Scope};
use mvnlock_fixtures::projects::dual_path_shared;
use mvnlock_fixtures::{Fixture, FixtureKind};

fn generate(f: &Fixture, repo: &Repository) -> Vec<ModuleLockfile> {
    generate_all(&f.root(), repo, &GenerateOptions::new(LockfileConfig::default()), &[]).unwrap()
}

#[test]
fn every_fixture_generates_and_validates() {
    for kind in FixtureKind::ALL {
        let f = Fixture::build(kind);
        let repo = f.workspace.repository();
        let modules = generate(&f, &repo);
        assert_eq!(modules.len(), f.modules.len(), "{}", f.name());
        for m in &modules {
            let bytes = serialize(&m.lockfile);
            assert_eq!(serialize(&parse_lockfile(&bytes).unwrap()), bytes);
            let report = validate(&m.effective, &m.lockfile, &repo, false, &ValidateOptions::default()).unwrap();
            assert!(report.passed && report.findings.is_empty(), "{}: {}", f.name(), report.to_text());
        }
        println!("{}: {}", f.name(), String::from_utf8(serialize(&modules[0].lockfile)).unwrap());
    }
}

#[test]
fn dual_path_pin_is_compile() {
    let f = Fixture::build(FixtureKind::TestScopeDualPath);
    let repo = f.workspace.repository();
    let m = &generate(&f, &repo)[0];
    let frozen = freeze(&m.module.xml, &m.effective, &m.lockfile).unwrap();
    let pin = frozen.managed_pins.iter().find(|p| p.key == dual_path_shared()).unwrap();
    assert_eq!(pin.scope, Scope::Compile);
    println!("{}", emit_frozen_xml(&frozen));
}

#[test]
fn frozen_pom_resolves_to_lockfile() {
    for kind in FixtureKind::ALL {
        let f = Fixture::build(kind);
        let repo = f.workspace.repository();
        for m in generate(&f, &repo) {
            let frozen = freeze(&m.module.xml, &m.effective, &m.lockfile).unwrap();
            let path = m.module.dir.join(FROZEN_POM_NAME);
            fs::write(&path, emit_frozen_xml(&frozen)).unwrap();
            let (_, model) = read_pom(&path).unwrap();
            let eff = effective_from_disk(&m.module.dir, &model, &repo).unwrap();
            let expected: BTreeSet<_> = m.lockfile.selected_entries().iter().map(|d| (d.gav(), d.scope)).collect();
            if eff.is_aggregator() {
                assert!(expected.is_empty());
                continue;
            }
            let tree = resolve(&eff, &repo, true).unwrap();
            let actual: BTreeSet<_> = tree.flattened.iter().map(|n| (n.gav.clone(), n.scope)).collect();
            assert_eq!(actual, expected, "{} {}", f.name(), m.module.rel_path);
        }
    }
}

#[test]
fn tampering_is_reported_once() {
    let f = Fixture::build(FixtureKind::SingleModule);
    let repo = f.workspace.repository();
    let m = &generate(&f, &repo)[0];
    let gson = m.lockfile.selected_entries().into_iter().find(|d| d.artifact_id == "gson").unwrap().gav();
    mvnlock_fixtures::flip_byte(&f.workspace.cached_jar(&gson), 3);
    let report = validate(&m.effective, &m.lockfile, &repo, false, &ValidateOptions::default()).unwrap();
    assert!(!report.passed);
    assert_eq!(report.findings.len(), 1, "{}", report.to_text());
    assert_eq!(report.findings[0].kind, FindingKind::ChecksumMismatch);
    assert_eq!(report.findings[0].key(), GaKey::new("com.google.code.gson", "gson"));
}
