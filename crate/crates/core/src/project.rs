//! Project layout on disk: the root POM, its modules and local parents.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::pom::{effective_pom, parse_pom, EffectivePom, ParentRef, PomError, PomModel};
use crate::repo::PomSource;

pub const POM_NAME: &str = "pom.xml";

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Pom { path: PathBuf, source: PomError },
    #[error("module `{module}` declared in {} has no pom.xml", declared_in.display())]
    MissingModule { module: String, declared_in: PathBuf },
    #[error("module `{module}` declared in {} is already part of the build", declared_in.display())]
    ModuleCycle { module: String, declared_in: PathBuf },
}

/// One module of a build, with its POM as read from disk.
#[derive(Debug, Clone)]
pub struct ModuleInfo {
    /// Path relative to the project root, using `/`; `.` for the root.
    pub rel_path: String,
    pub dir: PathBuf,
    pub pom_path: PathBuf,
    pub xml: String,
    pub model: PomModel,
}

pub fn read_pom(path: &Path) -> Result<(String, PomModel), ProjectError> {
    let xml = fs::read_to_string(path).map_err(|source| ProjectError::Io { path: path.to_path_buf(), source })?;
    let model = parse_pom(&xml).map_err(|source| ProjectError::Pom { path: path.to_path_buf(), source })?;
    Ok((xml, model))
}

/// The root module followed by every declared module, depth first in
/// declaration order.
pub fn discover_modules(root: &Path) -> Result<Vec<ModuleInfo>, ProjectError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    visit(root, ".".to_string(), &mut out, &mut seen)?;
    Ok(out)
}

fn visit(dir: &Path, rel_path: String, out: &mut Vec<ModuleInfo>, seen: &mut HashSet<PathBuf>) -> Result<(), ProjectError> {
    let pom_path = dir.join(POM_NAME);
    let (xml, model) = read_pom(&pom_path)?;
    seen.insert(fs::canonicalize(dir).unwrap_or_else(|_| dir.to_path_buf()));
    let modules = model.modules.clone();
    out.push(ModuleInfo { rel_path: rel_path.clone(), dir: dir.to_path_buf(), pom_path: pom_path.clone(), xml, model });
    for module in modules {
        let child = dir.join(&module);
        if !child.join(POM_NAME).is_file() {
            return Err(ProjectError::MissingModule { module, declared_in: pom_path });
        }
        let canonical = fs::canonicalize(&child).unwrap_or_else(|_| child.clone());
        if seen.contains(&canonical) {
            return Err(ProjectError::ModuleCycle { module, declared_in: pom_path });
        }
        let child_rel = if rel_path == "." { module.clone() } else { format!("{rel_path}/{module}") };
        visit(&child, child_rel, out, seen)?;
    }
    Ok(())
}

fn matches_ref(model: &PomModel, parent: &ParentRef) -> bool {
    model.effective_group_id() == Some(parent.group_id.as_str())
        && model.artifact_id == parent.artifact_id
        && model.effective_version() == Some(parent.version.as_str())
}

/// Effective model of a POM on disk. Parents are looked up through
/// `relativePath` (default `../pom.xml`) when the file there has matching
/// coordinates, and in the repository otherwise.
pub fn effective_from_disk<S: PomSource + ?Sized>(
    pom_dir: &Path,
    model: &PomModel,
    source: &S,
) -> Result<EffectivePom, PomError> {
    let mut current: Option<PathBuf> = Some(pom_dir.to_path_buf());
    effective_pom(model, |parent: &ParentRef| -> Result<PomModel, String> {
        let rel = parent.relative_path.clone().unwrap_or_else(|| "../pom.xml".to_string());
        if let (Some(dir), false) = (&current, rel.is_empty()) {
            let mut candidate = dir.join(&rel);
            if candidate.is_dir() {
                candidate = candidate.join(POM_NAME);
            }
            if let Ok((_, found)) = read_pom(&candidate) {
                if matches_ref(&found, parent) {
                    current = candidate.parent().map(Path::to_path_buf);
                    return Ok(found);
                }
            }
        }
        current = None;
        let gav = parent.gav().map_err(|e| e.to_string())?;
        let xml = source.fetch_pom(&gav).map_err(|e| e.to_string())?;
        parse_pom(&xml).map_err(|e| e.to_string())
    })
}

pub fn module_effective<S: PomSource + ?Sized>(module: &ModuleInfo, source: &S) -> Result<EffectivePom, ProjectError> {
    effective_from_disk(&module.dir, &module.model, source)
        .map_err(|source| ProjectError::Pom { path: module.pom_path.clone(), source })
}
