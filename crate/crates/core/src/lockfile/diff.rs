use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::Lockfile;
use crate::gav::{GaKey, Gav};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    Added,
    Removed,
    VersionChanged,
    ChecksumChanged,
    ScopeChanged,
}

impl ChangeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::Added => "added",
            ChangeKind::Removed => "removed",
            ChangeKind::VersionChanged => "version-changed",
            ChangeKind::ChecksumChanged => "checksum-changed",
            ChangeKind::ScopeChanged => "scope-changed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Change {
    pub kind: ChangeKind,
    pub key: GaKey,
    pub before: Option<String>,
    pub after: Option<String>,
}

impl fmt::Display for Change {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let before = self.before.as_deref().unwrap_or("-");
        let after = self.after.as_deref().unwrap_or("-");
        write!(f, "{} {} {before} -> {after}", self.kind.as_str(), self.key)
    }
}

#[derive(Debug, Error)]
#[error("lockfiles describe different modules: {old} and {new}")]
pub struct DiffError {
    pub old: Gav,
    pub new: Gav,
}

/// Changes between the selected entries of two lockfiles of one module,
/// sorted by (groupId, artifactId). A version change subsumes checksum and
/// scope changes of the same entry.
pub fn diff(old: &Lockfile, new: &Lockfile) -> Result<Vec<Change>, DiffError> {
    if old.module != new.module {
        return Err(DiffError { old: old.module.clone(), new: new.module.clone() });
    }
    let before = old.selected_by_key();
    let after = new.selected_by_key();
    let keys: BTreeSet<&GaKey> = before.keys().chain(after.keys()).collect();
    let mut out = Vec::new();
    for key in keys {
        let change = |kind, b: Option<&str>, a: Option<&str>| Change {
            kind,
            key: key.clone(),
            before: b.map(str::to_string),
            after: a.map(str::to_string),
        };
        match (before.get(key), after.get(key)) {
            (Some(b), None) => out.push(change(ChangeKind::Removed, Some(&b.version), None)),
            (None, Some(a)) => out.push(change(ChangeKind::Added, None, Some(&a.version))),
            (Some(b), Some(a)) => {
                if b.version != a.version {
                    out.push(change(ChangeKind::VersionChanged, Some(&b.version), Some(&a.version)));
                    continue;
                }
                if b.checksum.digest() != a.checksum.digest() || b.checksum.algorithm() != a.checksum.algorithm() {
                    let fmt = |d: &super::LockedDependency| format!("{}:{}", d.checksum.algorithm(), d.checksum.digest());
                    out.push(change(ChangeKind::ChecksumChanged, Some(&fmt(b)), Some(&fmt(a))));
                }
                if b.scope != a.scope {
                    out.push(change(ChangeKind::ScopeChanged, Some(b.scope.as_str()), Some(a.scope.as_str())));
                }
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(out)
}
