use std::fmt::Write;

use super::{DependencyDecl, PluginDecl, PomModel};
use crate::gav::Scope;

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            other => out.push(other),
        }
    }
    out
}

struct XmlWriter {
    out: String,
    indent: String,
    depth: usize,
}

impl XmlWriter {
    fn pad(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str(&self.indent);
        }
    }

    fn open(&mut self, tag: &str) {
        self.pad();
        let _ = writeln!(self.out, "<{tag}>");
        self.depth += 1;
    }

    fn close(&mut self, tag: &str) {
        self.depth -= 1;
        self.pad();
        let _ = writeln!(self.out, "</{tag}>");
    }

    fn leaf(&mut self, tag: &str, value: &str) {
        self.pad();
        let _ = writeln!(self.out, "<{tag}>{}</{tag}>", escape(value));
    }
}

/// Writes one `<dependency>` element, indented `depth` levels of `indent`.
pub(crate) fn dependency_xml(decl: &DependencyDecl, indent: &str, depth: usize) -> String {
    let mut w = XmlWriter { out: String::new(), indent: indent.to_string(), depth };
    write_dependency(&mut w, decl);
    w.out
}

fn write_dependency(w: &mut XmlWriter, decl: &DependencyDecl) {
    w.open("dependency");
    w.leaf("groupId", &decl.group_id);
    w.leaf("artifactId", &decl.artifact_id);
    if let Some(v) = &decl.version {
        w.leaf("version", v);
    }
    if decl.packaging != "jar" {
        w.leaf("type", &decl.packaging);
    }
    if let Some(c) = &decl.classifier {
        w.leaf("classifier", c);
    }
    if decl.scope != Scope::Compile {
        w.leaf("scope", decl.scope.as_str());
    }
    if decl.optional {
        w.leaf("optional", "true");
    }
    if !decl.exclusions.is_empty() {
        w.open("exclusions");
        for ex in &decl.exclusions {
            w.open("exclusion");
            w.leaf("groupId", &ex.group_id);
            w.leaf("artifactId", &ex.artifact_id);
            w.close("exclusion");
        }
        w.close("exclusions");
    }
    w.close("dependency");
}

fn write_plugins(w: &mut XmlWriter, plugins: &[PluginDecl]) {
    w.open("plugins");
    for p in plugins {
        w.open("plugin");
        w.leaf("groupId", &p.group_id);
        w.leaf("artifactId", &p.artifact_id);
        if let Some(v) = &p.version {
            w.leaf("version", v);
        }
        w.close("plugin");
    }
    w.close("plugins");
}

pub(crate) fn model_to_xml(model: &PomModel) -> String {
    let mut w = XmlWriter { out: String::new(), indent: "  ".into(), depth: 0 };
    w.out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    w.out.push_str("<project xmlns=\"http://maven.apache.org/POM/4.0.0\">\n");
    w.depth = 1;
    w.leaf("modelVersion", "4.0.0");
    if let Some(parent) = &model.parent {
        w.open("parent");
        w.leaf("groupId", &parent.group_id);
        w.leaf("artifactId", &parent.artifact_id);
        w.leaf("version", &parent.version);
        if let Some(rel) = &parent.relative_path {
            if rel.is_empty() {
                w.pad();
                w.out.push_str("<relativePath/>\n");
            } else {
                w.leaf("relativePath", rel);
            }
        }
        w.close("parent");
    }
    if let Some(g) = &model.group_id {
        w.leaf("groupId", g);
    }
    w.leaf("artifactId", &model.artifact_id);
    if let Some(v) = &model.version {
        w.leaf("version", v);
    }
    w.leaf("packaging", &model.packaging);
    if !model.modules.is_empty() {
        w.open("modules");
        for m in &model.modules {
            w.leaf("module", m);
        }
        w.close("modules");
    }
    if !model.properties.is_empty() {
        w.open("properties");
        for (k, v) in &model.properties {
            w.leaf(k, v);
        }
        w.close("properties");
    }
    if !model.dependency_management.is_empty() {
        w.open("dependencyManagement");
        w.open("dependencies");
        for d in &model.dependency_management {
            write_dependency(&mut w, d);
        }
        w.close("dependencies");
        w.close("dependencyManagement");
    }
    if !model.dependencies.is_empty() {
        w.open("dependencies");
        for d in &model.dependencies {
            write_dependency(&mut w, d);
        }
        w.close("dependencies");
    }
    if !model.plugins.is_empty() || !model.plugin_management.is_empty() {
        w.open("build");
        if !model.plugin_management.is_empty() {
            w.open("pluginManagement");
            write_plugins(&mut w, &model.plugin_management);
            w.close("pluginManagement");
        }
        if !model.plugins.is_empty() {
            write_plugins(&mut w, &model.plugins);
        }
        w.close("build");
    }
    w.out.push_str("</project>\n");
    w.out
}

/// A `dependencyManagement` pin, which always spells out its scope.
pub(crate) fn pin_xml(group_id: &str, artifact_id: &str, version: &str, scope: Scope, indent: &str) -> String {
    let mut w = XmlWriter { out: String::new(), indent: indent.to_string(), depth: 0 };
    w.open("dependency");
    w.leaf("groupId", group_id);
    w.leaf("artifactId", artifact_id);
    w.leaf("version", version);
    w.leaf("scope", scope.as_str());
    w.close("dependency");
    w.out
}
