use std::fmt::Display;

use super::{DependencyDecl, EffectivePom, Exclusion, ParentRef, PluginDecl, PomError, PomModel};
use crate::gav::{Gav, GaKey};

pub const MAX_INTERPOLATION_DEPTH: usize = 10;
pub const MAX_PARENT_DEPTH: usize = 10;

struct Interpolator<'a> {
    model: &'a PomModel,
}

impl Interpolator<'_> {
    fn lookup(&self, name: &str) -> Option<String> {
        let m = self.model;
        let parent = m.parent.as_ref();
        match name {
            "project.groupId" | "pom.groupId" => m.effective_group_id().map(Into::into),
            "project.artifactId" | "pom.artifactId" => Some(m.artifact_id.clone()),
            "project.version" | "pom.version" => m.effective_version().map(Into::into),
            "project.packaging" => Some(m.packaging.clone()),
            "project.parent.groupId" => parent.map(|p| p.group_id.clone()),
            "project.parent.artifactId" => parent.map(|p| p.artifact_id.clone()),
            "project.parent.version" => parent.map(|p| p.version.clone()),
            _ => m.properties.get(name).cloned(),
        }
    }

    fn expand(&self, text: &str, depth: usize) -> Result<String, PomError> {
        if !text.contains("${") {
            return Ok(text.to_string());
        }
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        while let Some(start) = rest.find("${") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let Some(end) = after.find('}') else {
                // unterminated reference stays literal
                out.push_str(&rest[start..]);
                return Ok(out);
            };
            let name = &after[..end];
            let token = format!("${{{name}}}");
            if depth >= MAX_INTERPOLATION_DEPTH {
                return Err(PomError::PropertyCycle { token });
            }
            let value = self.lookup(name).ok_or(PomError::UnresolvedProperty { token })?;
            out.push_str(&self.expand(&value, depth + 1)?);
            rest = &after[end + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn opt(&self, text: &Option<String>) -> Result<Option<String>, PomError> {
        text.as_deref().map(|t| self.expand(t, 0)).transpose()
    }

    fn dependency(&self, d: &DependencyDecl) -> Result<DependencyDecl, PomError> {
        Ok(DependencyDecl {
            group_id: self.expand(&d.group_id, 0)?,
            artifact_id: self.expand(&d.artifact_id, 0)?,
            version: self.opt(&d.version)?,
            scope: d.scope,
            optional: d.optional,
            exclusions: d
                .exclusions
                .iter()
                .map(|e| Ok(Exclusion::new(&self.expand(&e.group_id, 0)?, &self.expand(&e.artifact_id, 0)?)))
                .collect::<Result<_, PomError>>()?,
            packaging: self.expand(&d.packaging, 0)?,
            classifier: self.opt(&d.classifier)?,
        })
    }

    fn plugin(&self, p: &PluginDecl) -> Result<PluginDecl, PomError> {
        Ok(PluginDecl {
            group_id: self.expand(&p.group_id, 0)?,
            artifact_id: self.expand(&p.artifact_id, 0)?,
            version: self.opt(&p.version)?,
        })
    }
}

/// Expands `${...}` references in `text` against the model's properties and
/// the `project.*` built-ins.
pub fn interpolate_text(model: &PomModel, text: &str) -> Result<String, PomError> {
    Interpolator { model }.expand(text, 0)
}

/// Substitutes every property reference in the model, including inside
/// property values. The parent reference itself is left untouched.
pub fn interpolate_properties(model: &PomModel) -> Result<PomModel, PomError> {
    let ip = Interpolator { model };
    let mut out = model.clone();
    for value in out.properties.values_mut() {
        *value = ip.expand(value, 0)?;
    }
    out.group_id = ip.opt(&model.group_id)?;
    out.artifact_id = ip.expand(&model.artifact_id, 0)?;
    out.version = ip.opt(&model.version)?;
    out.packaging = ip.expand(&model.packaging, 0)?;
    out.dependencies = model.dependencies.iter().map(|d| ip.dependency(d)).collect::<Result<_, _>>()?;
    out.dependency_management =
        model.dependency_management.iter().map(|d| ip.dependency(d)).collect::<Result<_, _>>()?;
    out.plugins = model.plugins.iter().map(|p| ip.plugin(p)).collect::<Result<_, _>>()?;
    out.plugin_management = model.plugin_management.iter().map(|p| ip.plugin(p)).collect::<Result<_, _>>()?;
    Ok(out)
}

/// Merges the parent chain (child entries shadow parent entries with the
/// same group:artifact), then interpolates and fills versions deferred to
/// dependency management.
pub fn effective_pom<F, E>(model: &PomModel, mut parent_loader: F) -> Result<EffectivePom, PomError>
where
    F: FnMut(&ParentRef) -> Result<PomModel, E>,
    E: Display,
{
    let merged = inherit(model.clone(), &mut parent_loader, &mut Vec::new())?;
    let model = interpolate_properties(&merged)?;

    let group_id = model.effective_group_id().ok_or(PomError::MissingCoordinate("groupId"))?;
    let version = model.effective_version().ok_or(PomError::MissingCoordinate("version"))?;
    let coordinates = Gav::new(group_id, &model.artifact_id, version)?;

    let mut dependencies = model.dependencies.clone();
    for dep in dependencies.iter_mut().filter(|d| d.version.is_none()) {
        dep.version = model
            .dependency_management
            .iter()
            .find(|m| m.group_id == dep.group_id && m.artifact_id == dep.artifact_id)
            .and_then(|m| m.version.clone());
    }
    let mut plugins = model.plugins.clone();
    for plugin in plugins.iter_mut().filter(|p| p.version.is_none()) {
        plugin.version = model
            .plugin_management
            .iter()
            .find(|m| m.group_id == plugin.group_id && m.artifact_id == plugin.artifact_id)
            .and_then(|m| m.version.clone());
    }

    Ok(EffectivePom {
        coordinates,
        packaging: model.packaging,
        properties: model.properties,
        dependencies,
        dependency_management: model.dependency_management,
        modules: model.modules,
        plugins,
    })
}

fn inherit<F, E>(model: PomModel, loader: &mut F, chain: &mut Vec<Gav>) -> Result<PomModel, PomError>
where
    F: FnMut(&ParentRef) -> Result<PomModel, E>,
    E: Display,
{
    let Some(parent_ref) = model.parent.clone() else {
        return Ok(model);
    };
    let gav = parent_ref.gav()?;
    if chain.contains(&gav) {
        return Err(PomError::ParentCycle { gav });
    }
    if chain.len() >= MAX_PARENT_DEPTH {
        return Err(PomError::ParentChainTooDeep { gav, max: MAX_PARENT_DEPTH });
    }
    chain.push(gav.clone());
    let parent = loader(&parent_ref).map_err(|e| PomError::ParentUnavailable { gav, reason: e.to_string() })?;
    let parent = inherit(parent, loader, chain)?;
    Ok(merge(model, parent))
}

fn merge_by_key<T: Clone>(child: &[T], parent: &[T], key: impl Fn(&T) -> GaKey) -> Vec<T> {
    let mut out = child.to_vec();
    for item in parent {
        let k = key(item);
        if !child.iter().any(|c| key(c) == k) {
            out.push(item.clone());
        }
    }
    out
}

fn merge(child: PomModel, parent: PomModel) -> PomModel {
    let mut properties = parent.properties.clone();
    for (k, v) in &child.properties {
        properties.insert(k.clone(), v.clone());
    }
    PomModel {
        group_id: child.effective_group_id().map(Into::into),
        version: child.effective_version().map(Into::into),
        artifact_id: child.artifact_id.clone(),
        packaging: child.packaging.clone(),
        parent: child.parent.clone(),
        properties,
        dependencies: merge_by_key(&child.dependencies, &parent.dependencies, DependencyDecl::key),
        dependency_management: merge_by_key(
            &child.dependency_management,
            &parent.dependency_management,
            DependencyDecl::key,
        ),
        modules: child.modules.clone(),
        plugins: merge_by_key(&child.plugins, &parent.plugins, |p| GaKey::new(&p.group_id, &p.artifact_id)),
        plugin_management: merge_by_key(&child.plugin_management, &parent.plugin_management, |p| {
            GaKey::new(&p.group_id, &p.artifact_id)
        }),
    }
}
