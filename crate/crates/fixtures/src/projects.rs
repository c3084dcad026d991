//! The fixture corpus: five small projects with their repositories.

use std::path::PathBuf;

use mvnlock_core::pom::{parse_pom, PluginDecl, PomModel};
use mvnlock_core::{GaKey, Gav, Scope};
use rand::Rng;

use crate::{dep, dep_excluding, dep_scoped, package, parent_ref, Workspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    SingleModule,
    Aggregator,
    Diamond,
    Ranges,
    TestScopeDualPath,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 5] = [
        FixtureKind::SingleModule,
        FixtureKind::Aggregator,
        FixtureKind::Diamond,
        FixtureKind::Ranges,
        FixtureKind::TestScopeDualPath,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::SingleModule => "single-module",
            FixtureKind::Aggregator => "aggregator",
            FixtureKind::Diamond => "diamond",
            FixtureKind::Ranges => "ranges",
            FixtureKind::TestScopeDualPath => "test-scope-dual-path",
        }
    }
}

/// A ready-to-use project: the repository is published and the project
/// POMs are written, but nothing is cached or locked yet.
pub struct Fixture {
    pub kind: FixtureKind,
    pub workspace: Workspace,
    /// Module directories relative to the project root; `.` is the root.
    pub modules: Vec<&'static str>,
    /// Artifacts selected through a version range, with the major version
    /// every range on them admits. Publishing a newer `major.x` version of
    /// any of them changes what the original POMs resolve to.
    pub ranged: Vec<(GaKey, u64)>,
}

pub fn all_fixtures() -> Vec<Fixture> {
    FixtureKind::ALL.into_iter().map(Fixture::build).collect()
}

fn publish_all(ws: &Workspace, models: Vec<PomModel>) {
    for m in models {
        ws.publish(&m);
    }
}

fn with_deps(mut model: PomModel, deps: Vec<mvnlock_core::pom::DependencyDecl>) -> PomModel {
    model.dependencies = deps;
    model
}

fn key(g: &str, a: &str) -> GaKey {
    GaKey::new(g, a)
}

impl Fixture {
    pub fn build(kind: FixtureKind) -> Fixture {
        let ws = Workspace::new();
        let (modules, ranged) = match kind {
            FixtureKind::SingleModule => single_module(&ws),
            FixtureKind::Aggregator => aggregator(&ws),
            FixtureKind::Diamond => diamond(&ws),
            FixtureKind::Ranges => ranges(&ws),
            FixtureKind::TestScopeDualPath => dual_path(&ws),
        };
        Fixture { kind, workspace: ws, modules, ranged }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn root(&self) -> PathBuf {
        self.workspace.project()
    }

    pub fn module_dir(&self, rel: &str) -> PathBuf {
        if rel == "." { self.root() } else { self.root().join(rel) }
    }

    /// Publishes a version of `key` newer than any existing one but inside
    /// `major.x`, copying the dependencies of the current newest version and
    /// sometimes adding a brand-new dependency.
    pub fn publish_newer(&self, rng: &mut impl Rng, key: &GaKey, major: u64) -> Gav {
        let ws = &self.workspace;
        let versions = ws.remote_versions(&key.group_id, &key.artifact_id);
        let latest = versions.last().expect("ranged artifact has versions").clone();
        let minor: u64 = latest
            .split('.')
            .nth(1)
            .map(|s| s.chars().take_while(char::is_ascii_digit).collect::<String>())
            .and_then(|s| s.parse().ok())
            .unwrap_or(0);
        let version = format!("{major}.{}.{}", minor + 1 + rng.gen_range(0..3), rng.gen_range(0..10));
        let latest_gav = Gav::new(&key.group_id, &key.artifact_id, &latest).unwrap();
        let pom_path = ws.remote().join(mvnlock_core::repo::artifact_rel_path(&latest_gav, "pom", None));
        let mut model = parse_pom(&std::fs::read_to_string(pom_path).expect("latest POM")).expect("fixture POM parses");
        model.version = Some(version.clone());
        if rng.gen_bool(0.5) {
            let extra = format!("extra-{}-{}", key.artifact_id, version.replace('.', "-"));
            ws.publish(&package("org.fixture.extra", &extra, "1.0"));
            model.dependencies.push(dep("org.fixture.extra", &extra, "1.0"));
        }
        ws.publish(&model)
    }

    /// Publishes newer versions of one to three ranged artifacts.
    pub fn mutate(&self, rng: &mut impl Rng) -> Vec<Gav> {
        let count = rng.gen_range(1..=self.ranged.len().min(3));
        let mut picks: Vec<usize> = (0..self.ranged.len()).collect();
        let mut out = Vec::new();
        for _ in 0..count {
            let i = picks.remove(rng.gen_range(0..picks.len()));
            let (key, major) = &self.ranged[i];
            out.push(self.publish_newer(rng, key, *major));
        }
        out
    }
}

fn single_module(ws: &Workspace) -> (Vec<&'static str>, Vec<(GaKey, u64)>) {
    let gson = "com.google.code.gson";
    publish_all(
        ws,
        vec![
            package(gson, "gson", "2.10.1"),
            with_deps(package(gson, "gson", "2.13.2"), vec![dep("com.google.errorprone", "error_prone_annotations", "2.41.0")]),
            package("com.google.errorprone", "error_prone_annotations", "2.41.0"),
            package("org.slf4j", "slf4j-api", "2.0.9"),
            with_deps(package("junit", "junit", "4.13.2"), vec![dep("org.hamcrest", "hamcrest-core", "1.3")]),
            package("org.hamcrest", "hamcrest-core", "1.3"),
        ],
    );
    let mut app = package("org.example", "single-app", "1.0.0");
    app.properties.insert("gson.version".into(), "[2.0,3.0)".into());
    app.dependencies = vec![
        dep(gson, "gson", "${gson.version}"),
        dep("org.slf4j", "slf4j-api", "2.0.9"),
        dep_scoped("junit", "junit", "4.13.2", Scope::Test),
    ];
    ws.write_project_pom(".", &app);
    (vec!["."], vec![(key(gson, "gson"), 2)])
}

fn aggregator(ws: &Workspace) -> (Vec<&'static str>, Vec<(GaKey, u64)>) {
    let jackson = "com.fasterxml.jackson.core";
    publish_all(
        ws,
        vec![
            package("org.apache.commons", "commons-lang3", "3.12.0"),
            package("org.apache.commons", "commons-lang3", "3.14.0"),
            with_deps(
                package(jackson, "jackson-databind", "2.15.2"),
                vec![dep(jackson, "jackson-core", "[2.15,3)"), dep(jackson, "jackson-annotations", "[2.15,3)")],
            ),
            with_deps(
                package(jackson, "jackson-databind", "2.17.0"),
                vec![dep(jackson, "jackson-core", "[2.17,3)"), dep(jackson, "jackson-annotations", "[2.17,3)")],
            ),
            package(jackson, "jackson-core", "2.15.2"),
            package(jackson, "jackson-core", "2.17.0"),
            package(jackson, "jackson-annotations", "2.15.2"),
            package(jackson, "jackson-annotations", "2.17.0"),
            with_deps(
                package("com.google.guava", "guava", "32.1.3-jre"),
                vec![
                    dep("com.google.guava", "failureaccess", "1.0.1"),
                    dep("org.checkerframework", "checker-qual", "[3.37,4)"),
                ],
            ),
            package("com.google.guava", "failureaccess", "1.0.1"),
            package("org.checkerframework", "checker-qual", "3.37.0"),
            package("org.checkerframework", "checker-qual", "3.41.0"),
            package("org.slf4j", "slf4j-api", "2.0.7"),
            package("org.slf4j", "slf4j-api", "2.0.9"),
            with_deps(
                package("ch.qos.logback", "logback-classic", "1.4.14"),
                vec![dep("ch.qos.logback", "logback-core", "1.4.14"), dep("org.slf4j", "slf4j-api", "2.0.7")],
            ),
            package("ch.qos.logback", "logback-core", "1.4.14"),
            with_deps(package("junit", "junit", "4.13.2"), vec![dep("org.hamcrest", "hamcrest-core", "1.3")]),
            package("org.hamcrest", "hamcrest-core", "1.3"),
            package("org.apache.maven.plugins", "maven-compiler-plugin", "3.11.0"),
        ],
    );

    let mut root = package("org.example", "multi-parent", "1.0.0");
    root.packaging = "pom".into();
    root.modules = vec!["core".into(), "api".into(), "web".into()];
    root.properties.insert("jackson.range".into(), "[2.15,3)".into());
    root.dependency_management = vec![dep("org.apache.commons", "commons-lang3", "[3.12,4.0)")];
    root.dependencies = vec![dep_scoped("junit", "junit", "4.13.2", Scope::Test)];
    root.plugin_management = vec![PluginDecl {
        group_id: "org.apache.maven.plugins".into(),
        artifact_id: "maven-compiler-plugin".into(),
        version: Some("3.11.0".into()),
    }];
    root.plugins = vec![PluginDecl {
        group_id: "org.apache.maven.plugins".into(),
        artifact_id: "maven-compiler-plugin".into(),
        version: None,
    }];
    ws.write_project_pom(".", &root);

    let module = |name: &str, deps| {
        let mut m = PomModel::new(name);
        m.parent = Some(parent_ref("org.example", "multi-parent", "1.0.0"));
        m.dependencies = deps;
        m
    };
    let mut lang = dep("org.apache.commons", "commons-lang3", "");
    lang.version = None;
    ws.write_project_pom("core", &module("multi-core", vec![lang, dep(jackson, "jackson-databind", "${jackson.range}")]));
    ws.write_project_pom("api", &module("multi-api", vec![dep("com.google.guava", "guava", "32.1.3-jre")]));
    ws.write_project_pom(
        "web",
        &module(
            "multi-web",
            vec![dep("org.slf4j", "slf4j-api", "[2.0,3)"), dep("ch.qos.logback", "logback-classic", "1.4.14")],
        ),
    );
    (
        vec![".", "core", "api", "web"],
        vec![
            (key("org.apache.commons", "commons-lang3"), 3),
            (key(jackson, "jackson-databind"), 2),
            (key(jackson, "jackson-core"), 2),
            (key(jackson, "jackson-annotations"), 2),
            (key("org.checkerframework", "checker-qual"), 3),
            (key("org.slf4j", "slf4j-api"), 2),
        ],
    )
}

fn diamond(ws: &Workspace) -> (Vec<&'static str>, Vec<(GaKey, u64)>) {
    let g = "org.diamond";
    publish_all(
        ws,
        vec![
            with_deps(package(g, "b", "1.0"), vec![dep(g, "d", "[1.0,2.0)")]),
            with_deps(package(g, "c", "1.0"), vec![dep(g, "d", "1.1"), dep(g, "e", "1.0"), {
                let mut o = dep(g, "opt", "1.0");
                o.optional = true;
                o
            }]),
            package(g, "d", "1.0"),
            package(g, "d", "1.1"),
            with_deps(package(g, "d", "1.3"), vec![dep(g, "leaf", "[1.0,2.0)")]),
            package(g, "e", "1.0"),
            package(g, "opt", "1.0"),
            package(g, "leaf", "1.0"),
            package(g, "leaf", "1.2"),
        ],
    );
    let mut app = package("org.example", "diamond-app", "1.0.0");
    app.dependencies = vec![dep(g, "b", "1.0"), dep_excluding(g, "c", "1.0", &[(g, "e")])];
    ws.write_project_pom(".", &app);
    (vec!["."], vec![(key(g, "d"), 1), (key(g, "leaf"), 1)])
}

fn ranges(ws: &Workspace) -> (Vec<&'static str>, Vec<(GaKey, u64)>) {
    let g = "org.range";
    publish_all(
        ws,
        vec![
            package(g, "open", "1.0"),
            with_deps(package(g, "open", "1.5"), vec![dep(g, "deep", "[1.0,2.0)")]),
            package(g, "deep", "1.0"),
            package(g, "deep", "1.1"),
            package(g, "upper", "1.0"),
            package(g, "upper", "1.5"),
            package(g, "upper", "1.7"),
            package(g, "multi", "1.1"),
            package(g, "multi", "1.2"),
            package(g, "multi", "1.3.0"),
            package(g, "exclusive", "1.0"),
            package(g, "exclusive", "1.2"),
            package(g, "exclusive", "1.4"),
            package(g, "qual", "1.0"),
            package(g, "qual", "1.1-beta-1"),
        ],
    );
    let mut app = package("org.example", "ranges-app", "1.0.0");
    app.dependencies = vec![
        dep(g, "open", "[1.0,)"),
        dep(g, "upper", "(,1.5]"),
        dep(g, "multi", "[1.0,1.2),[1.3,2.0)"),
        dep(g, "exclusive", "(1.0,1.4)"),
        dep_scoped(g, "qual", "[1.0,2.0)", Scope::Runtime),
    ];
    ws.write_project_pom(".", &app);
    (
        vec!["."],
        vec![(key(g, "open"), 1), (key(g, "deep"), 1), (key(g, "multi"), 1), (key(g, "qual"), 1)],
    )
}

fn dual_path(ws: &Workspace) -> (Vec<&'static str>, Vec<(GaKey, u64)>) {
    let g = "org.dual";
    publish_all(
        ws,
        vec![
            with_deps(package(g, "testkit", "1.0"), vec![dep(g, "shared", "[1.0,2.0)")]),
            with_deps(package(g, "core", "1.0"), vec![dep(g, "shared", "1.0")]),
            package(g, "shared", "1.0"),
            package(g, "shared", "1.4"),
        ],
    );
    let mut app = package("org.example", "dualpath-app", "1.0.0");
    app.dependencies = vec![dep_scoped(g, "testkit", "1.0", Scope::Test), dep(g, "core", "1.0")];
    ws.write_project_pom(".", &app);
    (vec!["."], vec![(key(g, "shared"), 1)])
}

/// The artifact reachable through both a test and a compile path in the
/// dual-path fixture.
pub fn dual_path_shared() -> GaKey {
    key("org.dual", "shared")
}
