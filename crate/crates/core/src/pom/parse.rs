use roxmltree::{Document, Node};

use super::{DependencyDecl, Exclusion, ParentRef, PluginDecl, PomError, PomModel, DEFAULT_PLUGIN_GROUP};
use crate::gav::Scope;

/// Parses `pom.xml` text. Unknown elements are ignored; property references
/// are kept verbatim.
pub fn parse_pom(xml_text: &str) -> Result<PomModel, PomError> {
    let doc = Document::parse(xml_text).map_err(|e| {
        let pos = e.pos();
        PomError::Xml { line: pos.row, column: pos.col, message: e.to_string() }
    })?;
    let project = doc.root_element();
    if project.tag_name().name() != "project" {
        return Err(PomError::Unsupported {
            element: project.tag_name().name().to_string(),
            reason: "root element must be <project>",
            line: line_of(&doc, project),
        });
    }
    let cx = Cx { doc: &doc };

    if let Some(profiles) = child(project, "profiles") {
        if elements(profiles).next().is_some() {
            return Err(cx.unsupported(profiles, "profiles are not supported"));
        }
    }

    let artifact_id = text_of(project, "artifactId")
        .ok_or_else(|| cx.missing(project, "project", "artifactId"))?;
    let mut model = PomModel::new(&artifact_id);
    model.group_id = text_of(project, "groupId");
    model.version = text_of(project, "version");
    if let Some(packaging) = text_of(project, "packaging") {
        model.packaging = packaging;
    }

    if let Some(parent) = child(project, "parent") {
        model.parent = Some(ParentRef {
            group_id: text_of(parent, "groupId").ok_or_else(|| cx.missing(parent, "parent", "groupId"))?,
            artifact_id: text_of(parent, "artifactId").ok_or_else(|| cx.missing(parent, "parent", "artifactId"))?,
            version: text_of(parent, "version").ok_or_else(|| cx.missing(parent, "parent", "version"))?,
            relative_path: child(parent, "relativePath").map(|n| n.text().unwrap_or("").trim().to_string()),
        });
    }

    if let Some(props) = child(project, "properties") {
        for prop in elements(props) {
            let value = prop.text().unwrap_or("").trim().to_string();
            model.properties.insert(prop.tag_name().name().to_string(), value);
        }
    }

    if let Some(deps) = child(project, "dependencies") {
        model.dependencies = cx.dependencies(deps, false)?;
    }
    if let Some(dm) = child(project, "dependencyManagement") {
        if let Some(deps) = child(dm, "dependencies") {
            model.dependency_management = cx.dependencies(deps, true)?;
        }
    }

    if let Some(modules) = child(project, "modules") {
        for module in elements(modules).filter(|n| n.tag_name().name() == "module") {
            let path = module.text().unwrap_or("").trim().to_string();
            if path.starts_with('/') || path.starts_with('\\') || path.chars().nth(1) == Some(':') {
                return Err(PomError::AbsoluteModule { path, line: line_of(&doc, module) });
            }
            if path.is_empty() {
                return Err(cx.invalid(module, "module", ""));
            }
            model.modules.push(path);
        }
    }

    if let Some(build) = child(project, "build") {
        if let Some(ext) = child(build, "extensions") {
            if elements(ext).next().is_some() {
                return Err(cx.unsupported(ext, "build extensions are not supported"));
            }
        }
        if let Some(plugins) = child(build, "plugins") {
            model.plugins = cx.plugins(plugins)?;
        }
        if let Some(pm) = child(build, "pluginManagement") {
            if let Some(plugins) = child(pm, "plugins") {
                model.plugin_management = cx.plugins(plugins)?;
            }
        }
    }

    Ok(model)
}

struct Cx<'a, 'input> {
    doc: &'a Document<'input>,
}

impl Cx<'_, '_> {
    fn missing(&self, node: Node, element: &str, field: &'static str) -> PomError {
        PomError::MissingField { element: element.to_string(), field, line: line_of(self.doc, node) }
    }

    fn unsupported(&self, node: Node, reason: &'static str) -> PomError {
        PomError::Unsupported { element: node.tag_name().name().to_string(), reason, line: line_of(self.doc, node) }
    }

    fn invalid(&self, node: Node, element: &str, value: &str) -> PomError {
        PomError::InvalidValue { element: element.to_string(), value: value.to_string(), line: line_of(self.doc, node) }
    }

    fn dependencies(&self, list: Node, managed: bool) -> Result<Vec<DependencyDecl>, PomError> {
        let mut out = Vec::new();
        for dep in elements(list).filter(|n| n.tag_name().name() == "dependency") {
            let group_id = text_of(dep, "groupId").ok_or_else(|| self.missing(dep, "dependency", "groupId"))?;
            let artifact_id = text_of(dep, "artifactId").ok_or_else(|| self.missing(dep, "dependency", "artifactId"))?;
            let mut decl = DependencyDecl::new(&group_id, &artifact_id, text_of(dep, "version").as_deref());
            if let Some(scope) = text_of(dep, "scope") {
                if managed && scope == "import" {
                    return Err(self.unsupported(dep, "dependencyManagement import (BOM) is not supported"));
                }
                decl.scope = scope.parse::<Scope>().map_err(|_| self.invalid(dep, "scope", &scope))?;
            }
            if let Some(optional) = text_of(dep, "optional") {
                decl.optional = match optional.as_str() {
                    "true" => true,
                    "false" => false,
                    other => return Err(self.invalid(dep, "optional", other)),
                };
            }
            if let Some(kind) = text_of(dep, "type") {
                decl.packaging = kind;
            }
            decl.classifier = text_of(dep, "classifier");
            if let Some(exclusions) = child(dep, "exclusions") {
                for ex in elements(exclusions).filter(|n| n.tag_name().name() == "exclusion") {
                    let g = text_of(ex, "groupId").ok_or_else(|| self.missing(ex, "exclusion", "groupId"))?;
                    let a = text_of(ex, "artifactId").ok_or_else(|| self.missing(ex, "exclusion", "artifactId"))?;
                    decl.exclusions.push(Exclusion::new(&g, &a));
                }
            }
            out.push(decl);
        }
        Ok(out)
    }

    fn plugins(&self, list: Node) -> Result<Vec<PluginDecl>, PomError> {
        let mut out = Vec::new();
        for plugin in elements(list).filter(|n| n.tag_name().name() == "plugin") {
            out.push(PluginDecl {
                group_id: text_of(plugin, "groupId").unwrap_or_else(|| DEFAULT_PLUGIN_GROUP.to_string()),
                artifact_id: text_of(plugin, "artifactId").ok_or_else(|| self.missing(plugin, "plugin", "artifactId"))?,
                version: text_of(plugin, "version"),
            });
        }
        Ok(out)
    }
}

pub(crate) fn line_of(doc: &Document, node: Node) -> u32 {
    doc.text_pos_at(node.range().start).row
}

pub(crate) fn elements<'a, 'input>(node: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(|n| n.is_element())
}

pub(crate) fn child<'a, 'input>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    elements(node).find(|n| n.tag_name().name() == name)
}

/// Trimmed text of a child element; empty text counts as absent.
pub(crate) fn text_of(node: Node, name: &str) -> Option<String> {
    child(node, name)
        .map(|n| n.text().unwrap_or("").trim().to_string())
        .filter(|s| !s.is_empty())
}
