//! Emits `pom.lockfile.xml`: the original POM with direct versions replaced
//! by locked ones and every selected transitive dependency pinned in
//! `dependencyManagement`.
//!
//! Edits are spliced into the original text, so everything the freezer does
//! not touch (comments, formatting, plugin configuration) is kept byte for
//! byte.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Range;

use roxmltree::{Document, Node};
use thiserror::Error;

use crate::gav::{GaKey, Gav, Scope};
use crate::lockfile::{serialize, LockedDependency, Lockfile};
use crate::pom::{dependency_xml, escape, interpolate_text, parse_pom, pin_xml, DependencyDecl, EffectivePom, PomError, PomModel};
use crate::repo::ChecksumAlgorithm;

pub const FROZEN_POM_NAME: &str = "pom.lockfile.xml";
const HEADER_PREFIX: &str = " Generated by ";

#[derive(Debug, Error)]
pub enum FreezeError {
    #[error("lockfile is stale: direct dependency {0} is not locked")]
    StaleLockfile(GaKey),
    #[error("lockfile belongs to {locked}, but the POM describes {actual}")]
    ModuleMismatch { locked: Gav, actual: Gav },
    #[error("cannot parse the original POM: {0}")]
    Pom(#[from] PomError),
    #[error("{0} does not occur in the lockfile")]
    UnknownKey(GaKey),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagedPin {
    pub key: GaKey,
    pub version: String,
    pub scope: Scope,
}

#[derive(Debug, Clone)]
pub struct FrozenPom {
    pub base: PomModel,
    /// The original text, without any header from an earlier freeze.
    pub source_xml: String,
    /// Locked versions of direct dependencies declared in `base`.
    pub direct_overrides: BTreeMap<GaKey, String>,
    /// Direct dependencies inherited from a parent POM, re-declared with
    /// their locked versions.
    pub inherited: Vec<DependencyDecl>,
    /// Sorted by key.
    pub managed_pins: Vec<ManagedPin>,
    /// sha256 of the canonical lockfile bytes.
    pub lockfile_digest: String,
    /// Interpolated keys of `base.dependencies` and
    /// `base.dependency_management`, in document order.
    dependency_keys: Vec<GaKey>,
    managed_keys: Vec<GaKey>,
}

fn all_entries(forest: &[LockedDependency]) -> Vec<(usize, &LockedDependency)> {
    let mut out = Vec::new();
    let mut queue: VecDeque<(usize, &LockedDependency)> = forest.iter().map(|d| (1, d)).collect();
    while let Some((depth, dep)) = queue.pop_front() {
        out.push((depth, dep));
        queue.extend(dep.children.iter().map(|c| (depth + 1, c)));
    }
    out
}

fn precedence(scope: Scope) -> u8 {
    match scope {
        Scope::Compile => 3,
        Scope::Runtime => 2,
        Scope::Provided => 1,
        Scope::Test => 0,
    }
}

/// Scope to pin `key` with: the widest non-test scope it occurs with
/// anywhere in the forest (compile > runtime > provided), and test only when
/// every occurrence is test-scoped.
pub fn scope_for_pin(key: &GaKey, forest: &[LockedDependency]) -> Result<Scope, FreezeError> {
    all_entries(forest)
        .into_iter()
        .filter(|(_, d)| d.group_id == key.group_id && d.artifact_id == key.artifact_id)
        .map(|(_, d)| d.scope)
        .max_by_key(|s| precedence(*s))
        .ok_or_else(|| FreezeError::UnknownKey(key.clone()))
}

fn direct_entries(lockfile: &Lockfile) -> BTreeMap<GaKey, &LockedDependency> {
    let mut out = BTreeMap::new();
    for dep in &lockfile.dependencies {
        let slot = out.entry(dep.key()).or_insert(dep);
        if dep.selected && !slot.selected {
            *slot = dep;
        }
    }
    out
}

/// Computes the overrides and pins that reproduce `lockfile` from the POM in
/// `source_xml`, whose effective form is `effective`.
pub fn freeze(source_xml: &str, effective: &EffectivePom, lockfile: &Lockfile) -> Result<FrozenPom, FreezeError> {
    let source_xml = strip_header(source_xml);
    let base = parse_pom(&source_xml)?;
    if effective.coordinates != lockfile.module {
        return Err(FreezeError::ModuleMismatch { locked: lockfile.module.clone(), actual: effective.coordinates.clone() });
    }
    let props = effective.to_model();
    let key = |d: &DependencyDecl| {
        let text = |t: &str| interpolate_text(&props, t).unwrap_or_else(|_| t.to_string());
        GaKey::new(&text(&d.group_id), &text(&d.artifact_id))
    };
    let dependency_keys: Vec<GaKey> = base.dependencies.iter().map(key).collect();
    let managed_keys: Vec<GaKey> = base.dependency_management.iter().map(key).collect();

    let directs = direct_entries(lockfile);
    let mut direct_overrides = BTreeMap::new();
    let mut inherited: Vec<DependencyDecl> = Vec::new();
    // aggregators resolve nothing, so they have nothing to pin
    let declared = if effective.is_aggregator() { &[][..] } else { &effective.dependencies[..] };
    for decl in declared {
        let key = decl.key();
        let Some(locked) = directs.get(&key) else {
            if decl.scope == Scope::Test && !lockfile.config.include_test {
                continue;
            }
            return Err(FreezeError::StaleLockfile(key));
        };
        if dependency_keys.contains(&key) {
            direct_overrides.entry(key).or_insert_with(|| locked.version.clone());
        } else if !inherited.iter().any(|d| d.key() == key) {
            let mut decl = decl.clone();
            decl.version = Some(locked.version.clone());
            inherited.push(decl);
        }
    }

    let mut managed_pins = Vec::new();
    let mut seen = BTreeSet::new();
    for (depth, dep) in all_entries(&lockfile.dependencies) {
        if depth >= 2 && dep.selected && seen.insert(dep.key()) {
            managed_pins.push(ManagedPin {
                key: dep.key(),
                version: dep.version.clone(),
                scope: scope_for_pin(&dep.key(), &lockfile.dependencies)?,
            });
        }
    }
    managed_pins.sort_by(|a, b| a.key.cmp(&b.key));

    Ok(FrozenPom {
        base,
        source_xml,
        direct_overrides,
        inherited,
        managed_pins,
        lockfile_digest: ChecksumAlgorithm::Sha256.digest_hex(&serialize(lockfile)),
        dependency_keys,
        managed_keys,
    })
}

fn header(frozen: &FrozenPom) -> String {
    format!(
        "<!--{HEADER_PREFIX}{name} {version} from lockfile sha256:{digest}. Do not edit; regenerate with `{name} freeze`. -->\n",
        name = crate::TOOL_NAME,
        version = crate::TOOL_VERSION,
        digest = frozen.lockfile_digest,
    )
}

/// Removes a header left by an earlier freeze, with its line break.
fn strip_header(xml: &str) -> String {
    let marker = format!("<!--{HEADER_PREFIX}{}", crate::TOOL_NAME);
    let Some(start) = xml.find(&marker) else { return xml.to_string() };
    if xml.find("<project").is_some_and(|root| start > root) {
        return xml.to_string();
    }
    let Some(len) = xml[start..].find("-->") else { return xml.to_string() };
    let mut end = start + len + 3;
    if xml[end..].starts_with("\r\n") {
        end += 2;
    } else if xml[end..].starts_with('\n') {
        end += 1;
    }
    format!("{}{}", &xml[..start], &xml[end..])
}

struct Splicer<'a> {
    text: &'a str,
    edits: Vec<(Range<usize>, String)>,
}

impl Splicer<'_> {
    fn replace(&mut self, range: Range<usize>, with: String) {
        self.edits.push((range, with));
    }

    fn insert(&mut self, at: usize, with: String) {
        self.edits.push((at..at, with));
    }

    fn finish(mut self) -> String {
        self.edits.sort_by_key(|(r, _)| (r.start, r.end));
        let mut out = String::with_capacity(self.text.len() + 1024);
        let mut pos = 0;
        for (range, with) in self.edits {
            out.push_str(&self.text[pos..range.start]);
            out.push_str(&with);
            pos = range.end;
        }
        out.push_str(&self.text[pos..]);
        out
    }
}

/// Whitespace between the start of `pos`'s line and `pos`.
fn line_indent(text: &str, pos: usize) -> &str {
    let line_start = text[..pos].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let prefix = &text[line_start..pos];
    &prefix[..prefix.len() - prefix.trim_start().len()]
}

fn element_children<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|n| n.is_element())
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    element_children(node).find(|n| n.tag_name().name() == name)
}

fn dependency_nodes<'a, 'i>(container: Option<Node<'a, 'i>>) -> Vec<Node<'a, 'i>> {
    container
        .map(|c| element_children(c).filter(|n| n.tag_name().name() == "dependency").collect())
        .unwrap_or_default()
}

/// Lines of `xml` re-indented to start at `base`, without a trailing line
/// break.
fn indent_block(xml: &str, base: &str) -> String {
    xml.lines().map(|l| format!("{base}{l}")).collect::<Vec<_>>().join("\n")
}

/// Adds `blocks` as the last element children of `container`, skipping
/// children listed in `removed`. Each block is placed on its own line.
fn append_children(s: &mut Splicer, container: Node, removed: &[Node], blocks: &[String]) {
    let text = s.text;
    let indent = line_indent(text, container.range().start);
    let name = container.tag_name().name();
    let body: String = blocks.iter().map(|b| format!("\n{b}")).collect();
    if text[container.range()].ends_with("/>") {
        s.replace(container.range(), format!("<{name}>{body}\n{indent}</{name}>"));
        return;
    }
    let close = text[..container.range().end].rfind("</").expect("element has a closing tag");
    let open_end = container.range().start + text[container.range()].find('>').expect("element has an open tag") + 1;
    let at = element_children(container)
        .filter(|n| !removed.contains(n))
        .last()
        .map(|n| n.range().end)
        .unwrap_or(open_end);
    let mut insertion = body;
    if !text[at..close].contains('\n') {
        insertion.push('\n');
        insertion.push_str(indent);
    }
    s.insert(at, insertion);
}

/// The frozen POM text. Deterministic for a given input.
pub fn emit_frozen_xml(frozen: &FrozenPom) -> String {
    let text = frozen.source_xml.as_str();
    let doc = Document::parse(text).expect("the source parsed when it was frozen");
    let project = doc.root_element();
    let mut s = Splicer { text, edits: Vec::new() };

    let unit = match element_children(project).next().map(|n| line_indent(text, n.range().start)) {
        Some(i) if !i.is_empty() => i.to_string(),
        _ => "  ".to_string(),
    };
    let project_close = text[..project.range().end].rfind("</").unwrap_or(text.len());
    let deps = child(project, "dependencies");

    let mut overridden = BTreeSet::new();
    for (dep, key) in dependency_nodes(deps).into_iter().zip(&frozen.dependency_keys) {
        let Some(version) = frozen.direct_overrides.get(key) else { continue };
        if !overridden.insert(key) {
            continue;
        }
        let element = format!("<version>{}</version>", escape(version));
        match (child(dep, "version"), child(dep, "artifactId")) {
            (Some(v), _) => s.replace(v.range(), element),
            (None, Some(anchor)) => {
                let indent = line_indent(text, anchor.range().start);
                s.insert(anchor.range().end, format!("\n{indent}{element}"));
            }
            (None, None) => {}
        }
    }

    if !frozen.inherited.is_empty() {
        let base = match deps {
            Some(d) => format!("{}{unit}", line_indent(text, d.range().start)),
            None => format!("{unit}{unit}"),
        };
        let blocks: Vec<String> = frozen.inherited.iter().map(|d| indent_block(&dependency_xml(d, &unit, 0), &base)).collect();
        match deps {
            Some(d) => append_children(&mut s, d, &[], &blocks),
            None => s.insert(project_close, format!("{unit}<dependencies>\n{}\n{unit}</dependencies>\n", blocks.join("\n"))),
        }
    }

    if !frozen.managed_pins.is_empty() {
        let pinned: BTreeSet<&GaKey> = frozen.managed_pins.iter().map(|p| &p.key).collect();
        let dm = child(project, "dependencyManagement");
        let pin_blocks = |base: &str| -> Vec<String> {
            frozen
                .managed_pins
                .iter()
                .map(|p| indent_block(&pin_xml(&p.key.group_id, &p.key.artifact_id, &p.version, p.scope, &unit), base))
                .collect()
        };
        match dm.and_then(|dm| child(dm, "dependencies")) {
            Some(container) => {
                let removed: Vec<Node> = dependency_nodes(Some(container))
                    .into_iter()
                    .zip(&frozen.managed_keys)
                    .filter(|(_, key)| pinned.contains(key))
                    .map(|(node, _)| node)
                    .collect();
                for node in &removed {
                    let start = node.prev_sibling().filter(|p| p.is_text()).map(|p| p.range().start).unwrap_or(node.range().start);
                    s.replace(start..node.range().end, String::new());
                }
                let base = format!("{}{unit}", line_indent(text, container.range().start));
                append_children(&mut s, container, &removed, &pin_blocks(&base));
            }
            None => {
                let anchor = dm.or(deps);
                let base = anchor.map(|n| line_indent(text, n.range().start).to_string()).unwrap_or_else(|| unit.clone());
                let inner = format!("{base}{unit}");
                let block = format!(
                    "<dependencyManagement>\n{inner}<dependencies>\n{}\n{inner}</dependencies>\n{base}</dependencyManagement>",
                    pin_blocks(&format!("{inner}{unit}")).join("\n")
                );
                match (dm, anchor) {
                    (Some(dm), _) => s.replace(dm.range(), block),
                    (None, Some(d)) => s.insert(d.range().start, format!("{block}\n{base}")),
                    (None, None) => s.insert(project_close, format!("{base}{block}\n")),
                }
            }
        }
    }

    let body = s.finish();
    let head = header(frozen);
    let declaration_end = body
        .trim_start()
        .starts_with("<?xml")
        .then(|| body.find("?>"))
        .flatten()
        .map(|i| i + 2);
    match declaration_end {
        Some(end) => {
            let rest = &body[end..];
            let newline = if rest.starts_with("\r\n") {
                2
            } else if rest.starts_with('\n') {
                1
            } else {
                0
            };
            let sep = if newline == 0 { "\n" } else { "" };
            format!("{}{sep}{head}{}", &body[..end + newline], &body[end + newline..])
        }
        None => format!("{head}{body}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lockfile::LockfileConfig;
    use crate::repo::{ChecksumMode, ChecksumRecord};

    fn entry(a: &str, v: &str, scope: Scope, depth: usize, children: Vec<LockedDependency>) -> LockedDependency {
        LockedDependency {
            group_id: "org.example".into(),
            artifact_id: a.into(),
            version: v.into(),
            scope,
            checksum: ChecksumRecord::new(ChecksumAlgorithm::Sha256, &"0".repeat(64), ChecksumMode::Local).unwrap(),
            repository_source: "local".into(),
            direct: depth == 1,
            selected: true,
            packaging: "jar".into(),
            classifier: None,
            children,
        }
    }

    fn key(a: &str) -> GaKey {
        GaKey::new("org.example", a)
    }

    #[test]
    fn scope_precedence() {
        let mut loser = entry("s", "1.0", Scope::Compile, 2, vec![]);
        loser.selected = false;
        let forest = vec![
            entry("c", "1.0", Scope::Compile, 1, vec![loser]),
            entry("t", "1.0", Scope::Test, 1, vec![entry("s", "1.0", Scope::Test, 2, vec![]), entry("x", "1", Scope::Test, 2, vec![])]),
            entry("r", "1.0", Scope::Runtime, 1, vec![entry("y", "1", Scope::Runtime, 2, vec![])]),
            entry("p", "1.0", Scope::Provided, 1, vec![entry("y", "1", Scope::Provided, 2, vec![])]),
        ];
        assert_eq!(scope_for_pin(&key("s"), &forest).unwrap(), Scope::Compile);
        assert_eq!(scope_for_pin(&key("x"), &forest).unwrap(), Scope::Test);
        assert_eq!(scope_for_pin(&key("y"), &forest).unwrap(), Scope::Runtime);
        assert!(matches!(scope_for_pin(&key("zzz"), &forest), Err(FreezeError::UnknownKey(_))));
    }

    const POM: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<project>
  <modelVersion>4.0.0</modelVersion>
  <groupId>org.example</groupId>
  <artifactId>app</artifactId>
  <version>1.0</version>
  <!-- kept as is -->
  <dependencies>
    <dependency>
      <groupId>org.example</groupId>
      <artifactId>b</artifactId>
      <version>[1.0,2.0)</version>
    </dependency>
  </dependencies>
</project>
"#;

    fn effective(xml: &str) -> EffectivePom {
        crate::pom::effective_pom(&parse_pom(xml).unwrap(), |_: &crate::pom::ParentRef| Err::<PomModel, _>("no parent"))
            .unwrap()
    }

    fn lockfile(deps: Vec<LockedDependency>) -> Lockfile {
        Lockfile {
            lockfile_version: 1,
            module: Gav::new("org.example", "app", "1.0").unwrap(),
            config: LockfileConfig::default(),
            environment: None,
            dependencies: deps,
            plugins: None,
        }
    }

    #[test]
    fn zero_pins_only_adds_header_and_versions() {
        let lock = lockfile(vec![entry("b", "1.0", Scope::Compile, 1, vec![])]);
        let frozen = freeze(POM, &effective(POM), &lock).unwrap();
        assert!(frozen.managed_pins.is_empty());
        let xml = emit_frozen_xml(&frozen);
        let expected_body = POM.replace("[1.0,2.0)", "1.0");
        let (decl, rest) = expected_body.split_once('\n').unwrap();
        assert_eq!(xml, format!("{decl}\n{}{rest}", header(&frozen)));
        assert!(header(&frozen).starts_with("<!-- Generated by mvnlock "));
    }

    #[test]
    fn pins_transitives_and_is_idempotent() {
        let lock = lockfile(vec![entry(
            "b",
            "1.5",
            Scope::Compile,
            1,
            vec![entry("d", "2.0", Scope::Compile, 2, vec![entry("e", "3.0", Scope::Runtime, 3, vec![])])],
        )]);
        let frozen = freeze(POM, &effective(POM), &lock).unwrap();
        let xml = emit_frozen_xml(&frozen);
        let model = parse_pom(&xml).unwrap();
        assert_eq!(model.dependencies[0].version.as_deref(), Some("1.5"));
        let pins: Vec<_> = model
            .dependency_management
            .iter()
            .map(|d| (d.artifact_id.as_str(), d.version.as_deref().unwrap(), d.scope))
            .collect();
        assert_eq!(pins, vec![("d", "2.0", Scope::Compile), ("e", "3.0", Scope::Runtime)]);
        assert!(xml.contains("<scope>compile</scope>"));
        assert!(xml.contains("<!-- kept as is -->"));

        assert_eq!(emit_frozen_xml(&frozen), xml);
        let again = emit_frozen_xml(&freeze(&xml, &effective(&xml), &lock).unwrap());
        assert_eq!(again, xml);
    }

    #[test]
    fn stale_lockfile_and_coordinate_mismatch() {
        let err = freeze(POM, &effective(POM), &lockfile(vec![])).unwrap_err();
        assert!(matches!(err, FreezeError::StaleLockfile(ref k) if k.artifact_id == "b"));
        let mut lock = lockfile(vec![entry("b", "1.0", Scope::Compile, 1, vec![])]);
        lock.module.version = "2.0".into();
        assert!(matches!(freeze(POM, &effective(POM), &lock), Err(FreezeError::ModuleMismatch { .. })));
    }

    #[test]
    fn merges_into_existing_management() {
        let pom = POM.replace(
            "  <!-- kept as is -->\n",
            "  <dependencyManagement>\n    <dependencies>\n      <dependency>\n        <groupId>org.example</groupId>\n        <artifactId>d</artifactId>\n        <version>0.1</version>\n      </dependency>\n      <dependency>\n        <groupId>org.example</groupId>\n        <artifactId>other</artifactId>\n        <version>9</version>\n      </dependency>\n    </dependencies>\n  </dependencyManagement>\n",
        );
        let lock = lockfile(vec![entry("b", "1.0", Scope::Compile, 1, vec![entry("d", "2.0", Scope::Compile, 2, vec![])])]);
        let frozen = freeze(&pom, &effective(&pom), &lock).unwrap();
        let xml = emit_frozen_xml(&frozen);
        let model = parse_pom(&xml).unwrap();
        let managed: Vec<_> =
            model.dependency_management.iter().map(|d| (d.artifact_id.as_str(), d.version.as_deref().unwrap())).collect();
        assert_eq!(managed, vec![("other", "9"), ("d", "2.0")]);
        let again = emit_frozen_xml(&freeze(&xml, &effective(&xml), &lock).unwrap());
        assert_eq!(again, xml);
    }
}
