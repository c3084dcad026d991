//! The `mvnlock` command line.
//!
//! Exit codes: 0 success, 1 validation found errors, 2 operational failure,
//! 3 `ci-check` rewrote lockfiles that should be committed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mvnlock_core::freezer::{emit_frozen_xml, freeze, FROZEN_POM_NAME};
use mvnlock_core::integrity::{validate, ValidateOptions, ValidationReport};
use mvnlock_core::lockfile::{
    diff, generate_lockfile, parallel_map, parse_lockfile, serialize, EnvironmentMetadata, GenerateOptions, Lockfile, LOCKFILE_NAME,
};
use mvnlock_core::project::{discover_modules, module_effective, ModuleInfo};
use mvnlock_core::repo::write_atomic;
use mvnlock_core::{ChecksumAlgorithm, ChecksumMode, LockfileConfig, Repository, RepositoryConfig};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_REWRITTEN: i32 = 3;

const MAVEN_CENTRAL: &str = "https://repo.maven.apache.org/maven2";

#[derive(Debug, Parser)]
#[command(name = "mvnlock", version, about = "Lockfiles for Maven projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resolve every module and write its lockfile.
    Generate(Common),
    /// Check the project and artifact cache against the lockfiles.
    Validate(Common),
    /// Write pom.lockfile.xml beside each module's pom.xml.
    Freeze(Common),
    /// Regenerate when a POM or lockfile changed, validate otherwise.
    CiCheck {
        #[command(flatten)]
        common: Common,
        /// A path changed by the pull request; repeatable.
        #[arg(long = "changed-file", value_name = "PATH")]
        changed_files: Vec<PathBuf>,
    },
    /// List the changes between two lockfiles of one module.
    Diff {
        old: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Project root holding the top-level pom.xml.
    #[arg(long, default_value = ".")]
    project: PathBuf,
    /// File name of the per-module lockfile.
    #[arg(long, default_value = LOCKFILE_NAME)]
    lockfile_name: String,
    /// Remote repository base URL (http, https or file); repeatable.
    #[arg(long = "repo-url", value_name = "URL")]
    repo_urls: Vec<String>,
    /// Local artifact cache; defaults to ~/.m2/repository.
    #[arg(long)]
    local_repo: Option<PathBuf>,
    /// Never contact remote repositories.
    #[arg(long)]
    offline: bool,
    /// Network timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    #[arg(long)]
    include_plugins: bool,
    #[arg(long)]
    include_environment: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_test: bool,
    #[arg(long, default_value = "local")]
    checksum_mode: ChecksumMode,
    #[arg(long, default_value = "sha256")]
    checksum_algorithm: ChecksumAlgorithm,
    /// Verify checksums in this mode instead of the recorded one.
    #[arg(long)]
    override_checksum_mode: Option<ChecksumMode>,
    /// Module path (or artifactId) to leave out of validation and freezing;
    /// repeatable.
    #[arg(long = "skip-module", value_name = "MODULE")]
    skip_modules: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Operating system name to record or compare against.
    #[arg(long)]
    env_os: Option<String>,
    #[arg(long)]
    env_java: Option<String>,
    #[arg(long)]
    env_maven: Option<String>,
    /// Concurrent checksum workers; 0 picks a default.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

/// Standard output and error of one invocation.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// A failure reported on standard error with exit code 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

impl Common {
    fn config(&self) -> LockfileConfig {
        LockfileConfig {
            include_plugins: self.include_plugins,
            include_environment: self.include_environment,
            checksum_mode: self.checksum_mode,
            checksum_algorithm: self.checksum_algorithm,
            include_test: self.include_test,
        }
    }

    fn environment(&self) -> EnvironmentMetadata {
        let mut env = EnvironmentMetadata::probe();
        if let Some(os) = &self.env_os {
            env.os_name = os.clone();
        }
        if let Some(java) = &self.env_java {
            env.java_version = java.clone();
        }
        if let Some(maven) = &self.env_maven {
            env.maven_version = maven.clone();
        }
        env
    }

    fn repository(&self) -> Result<Repository, Failure> {
        let local = match &self.local_repo {
            Some(p) => p.clone(),
            None => home_dir().ok_or_else(|| Failure("cannot locate the home directory; pass --local-repo".into()))?
                .join(".m2/repository"),
        };
        let mut config = RepositoryConfig::local(local).offline(self.offline);
        config.timeout = Duration::from_secs(self.timeout);
        let urls = if self.repo_urls.is_empty() && !self.offline { vec![MAVEN_CENTRAL.to_string()] } else { self.repo_urls.clone() };
        for url in urls {
            config = config.with_remote(url);
        }
        Ok(Repository::new(config)?)
    }

    fn options(&self, config: LockfileConfig) -> GenerateOptions {
        GenerateOptions { config, environment: self.environment(), jobs: self.jobs }
    }

    fn skipped(&self, module: &ModuleInfo) -> bool {
        self.skip_modules
            .iter()
            .map(|s| s.trim_end_matches('/'))
            .any(|s| s == module.rel_path || s == module.model.artifact_id)
    }

    fn lockfile_path(&self, module: &ModuleInfo) -> PathBuf {
        module.dir.join(&self.lockfile_name)
    }
}

fn home_dir() -> Option<PathBuf> {
    std::env::var_os("HOME").or_else(|| std::env::var_os("USERPROFILE")).map(PathBuf::from)
}

fn read_lockfile(path: &Path) -> Result<Lockfile, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    parse_lockfile(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Lockfile bytes for every module, computed without writing anything.
/// `recorded` picks, per module, the configuration to generate with.
fn generate_modules(
    common: &Common,
    repo: &Repository,
    recorded: impl Fn(&ModuleInfo) -> LockfileConfig + Sync,
) -> Result<Vec<(ModuleInfo, Lockfile, Vec<String>)>, Failure> {
    let modules = discover_modules(&common.project)?;
    let results = parallel_map(&modules, common.jobs, |module| {
        let effective = module_effective(module, repo).map_err(|e| Failure(format!("module {}: {e}", module.rel_path)))?;
        generate_lockfile(&effective, repo, &common.options(recorded(module)))
            .map_err(|e| Failure(format!("module {}: {e}", module.rel_path)))
    });
    modules.into_iter().zip(results).map(|(m, r)| r.map(|g| (m, g.lockfile, g.warnings))).collect()
}

fn cmd_generate(common: &Common, io: &mut Io) -> Result<i32, Failure> {
    let repo = common.repository()?;
    let config = common.config();
    let modules = generate_modules(common, &repo, |_| config)?;
    let mut summary = Vec::new();
    for (module, lockfile, warnings) in &modules {
        let path = common.lockfile_path(module);
        write_atomic(&path, &serialize(lockfile))?;
        for w in warnings {
            writeln!(io.err, "warning: {}: {w}", module.rel_path)?;
        }
        summary.push((module, path, lockfile.selected_entries().len()));
    }
    match common.format {
        Format::Text => {
            for (module, path, count) in &summary {
                writeln!(io.out, "{}: {count} dependencies locked in {}", module.rel_path, path.display())?;
            }
        }
        Format::Machine => {
            let modules: Vec<_> = summary
                .iter()
                .map(|(m, p, c)| json!({"module": m.rel_path, "lockfile": p.display().to_string(), "dependencies": c}))
                .collect();
            writeln!(io.out, "{}", json!({ "modules": modules }))?;
        }
    }
    Ok(EXIT_OK)
}

fn validate_module(common: &Common, repo: &Repository, module: &ModuleInfo) -> Result<ValidationReport, Failure> {
    let lockfile = if common.skipped(module) { None } else { Some(read_lockfile(&common.lockfile_path(module))?) };
    let effective = module_effective(module, repo)?;
    let Some(lockfile) = lockfile else {
        return Ok(ValidationReport::skipped(effective.coordinates.clone()));
    };
    let options = ValidateOptions {
        mode_override: common.override_checksum_mode,
        environment: Some(common.environment()),
        jobs: common.jobs,
    };
    validate(&effective, &lockfile, repo, false, &options).map_err(|e| Failure(format!("module {}: {e}", module.rel_path)))
}

fn cmd_validate(common: &Common, io: &mut Io) -> Result<i32, Failure> {
    let repo = common.repository()?;
    let modules = discover_modules(&common.project)?;
    let results = parallel_map(&modules, common.jobs, |module| validate_module(common, &repo, module));
    let reports = modules.iter().map(|m| m.rel_path.clone()).zip(results).map(|(p, r)| r.map(|r| (p, r))).collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().all(|(_, r)| r.passed);
    match common.format {
        Format::Text => {
            for (path, report) in &reports {
                write!(io.out, "[{path}] {}", report.to_text())?;
            }
            let errors: usize = reports.iter().map(|(_, r)| r.errors().count()).sum();
            if passed {
                writeln!(io.out, "validation passed")?;
            } else {
                writeln!(io.out, "validation failed: {errors} error finding(s)")?;
            }
        }
        Format::Machine => {
            let modules: Vec<_> = reports.iter().map(|(p, r)| json!({"module": p, "report": r})).collect();
            writeln!(io.out, "{}", json!({"passed": passed, "modules": modules}))?;
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_freeze(common: &Common, io: &mut Io) -> Result<i32, Failure> {
    let repo = common.repository()?;
    for module in discover_modules(&common.project)? {
        if common.skipped(&module) {
            continue;
        }
        let lockfile = read_lockfile(&common.lockfile_path(&module))?;
        let effective = module_effective(&module, &repo)?;
        let frozen = freeze(&module.xml, &effective, &lockfile).map_err(|e| Failure(format!("module {}: {e}", module.rel_path)))?;
        let path = module.dir.join(FROZEN_POM_NAME);
        write_atomic(&path, emit_frozen_xml(&frozen).as_bytes())?;
        writeln!(io.out, "{}: {} managed pins written to {}", module.rel_path, frozen.managed_pins.len(), path.display())?;
    }
    Ok(EXIT_OK)
}

fn cmd_ci_check(common: &Common, changed: &[PathBuf], io: &mut Io) -> Result<i32, Failure> {
    let triggers = ["pom.xml", common.lockfile_name.as_str()];
    let relevant = changed
        .iter()
        .filter_map(|p| p.file_name())
        .any(|name| triggers.iter().any(|t| name == *t));
    if !relevant {
        writeln!(io.out, "no POM or lockfile changed; validating")?;
        return cmd_validate(common, io);
    }

    let repo = common.repository()?;
    let fallback = common.config();
    // a module keeps the configuration its lockfile was generated with
    let modules = generate_modules(common, &repo, |m| {
        fs::read(common.lockfile_path(m))
            .ok()
            .and_then(|b| parse_lockfile(&b).ok())
            .map(|l| l.config)
            .unwrap_or(fallback)
    })?;
    let mut rewritten = Vec::new();
    for (module, lockfile, _) in &modules {
        let path = common.lockfile_path(module);
        let bytes = serialize(lockfile);
        if fs::read(&path).ok().as_deref() != Some(&bytes[..]) {
            rewritten.push((path, bytes));
        }
    }
    for (path, bytes) in &rewritten {
        write_atomic(path, bytes)?;
        writeln!(io.out, "updated {}", path.display())?;
    }
    if rewritten.is_empty() {
        writeln!(io.out, "lockfiles are up to date")?;
        Ok(EXIT_OK)
    } else {
        writeln!(io.out, "{} lockfile(s) rewritten; commit them", rewritten.len())?;
        Ok(EXIT_REWRITTEN)
    }
}

fn cmd_diff(old: &Path, new: &Path, format: Format, io: &mut Io) -> Result<i32, Failure> {
    let changes = diff(&read_lockfile(old)?, &read_lockfile(new)?)?;
    match format {
        Format::Text => {
            for c in &changes {
                writeln!(io.out, "{c}")?;
            }
        }
        Format::Machine => writeln!(io.out, "{}", serde_json::to_string(&changes)?)?,
    }
    Ok(EXIT_OK)
}

/// Runs one invocation and returns its exit code.
pub fn run_with<I, T>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(io.err, "{e}") } else { write!(io.out, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Generate(c) => cmd_generate(c, io),
        Command::Validate(c) => cmd_validate(c, io),
        Command::Freeze(c) => cmd_freeze(c, io),
        Command::CiCheck { common, changed_files } => cmd_ci_check(common, changed_files, io),
        Command::Diff { old, new, format } => cmd_diff(old, new, *format, io),
    };
    match result {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(io.err, "error: {message}");
            EXIT_FAILURE
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    run_with(args, &mut Io { out: &mut out, err: &mut err })
}
