//! Symbol registry for the domain entities that requirements mention:
//! actors, classes and their properties, instances, model elements and
//! UI component types.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::span::Span;

pub const SEEDED_UI_COMPONENT_TYPES: [&str; 8] =
    ["tab", "page", "bar", "field", "calendar", "checkbox", "menu", "message"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance `{instance}` refers to unknown class `{class}`")]
    UnresolvedClass { instance: String, class: String },
    #[error("`{name}` is already declared as {existing}")]
    Conflict { name: String, existing: String },
    #[error("invalid declaration: {0}")]
    Invalid(String),
    #[error("malformed model document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Actor,
    Class,
    Property,
    Instance,
    Element,
    UiComponent,
    Text,
    Number,
    ValueLiteral,
}

impl SymbolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::Actor => "actor",
            SymbolKind::Class => "class",
            SymbolKind::Property => "property",
            SymbolKind::Instance => "instance",
            SymbolKind::Element => "element",
            SymbolKind::UiComponent => "ui_component",
            SymbolKind::Text => "text",
            SymbolKind::Number => "number",
            SymbolKind::ValueLiteral => "value_literal",
        }
    }
}

/// A reference from requirement text to a (possibly undeclared) model entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolRef {
    pub kind: SymbolKind,
    /// Dot-notation components; `[owner, property]` for property references.
    pub path: Vec<String>,
    /// Whether the name was found in the symbol table (or a local binding).
    pub resolved: bool,
    pub span: Span,
}

impl SymbolRef {
    pub fn new(kind: SymbolKind, path: Vec<String>, resolved: bool) -> Self {
        SymbolRef { kind, path, resolved, span: Span::default() }
    }

    pub fn name(&self) -> String {
        self.path.join(".")
    }

    pub fn head(&self) -> &str {
        &self.path[0]
    }
}

/// What `declare` adds to the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclKind {
    Actor,
    Class,
    Property,
    Instance,
    Element,
    UiComponent,
}

/// Extra information for a declaration: the owning/instantiated class, or the
/// property list of a class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeclDetail {
    Class(String),
    Properties(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    pub actors: BTreeSet<String>,
    pub classes: BTreeMap<String, BTreeSet<String>>,
    pub instances: BTreeMap<String, String>,
    pub elements: BTreeSet<String>,
    pub ui_component_types: BTreeSet<String>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        SymbolTable {
            actors: BTreeSet::new(),
            classes: BTreeMap::new(),
            instances: BTreeMap::new(),
            elements: BTreeSet::new(),
            ui_component_types: SEEDED_UI_COMPONENT_TYPES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Category a top-level name is declared in, if any (class wins over
    /// instance when both share a name).
    pub fn category_of(&self, name: &str) -> Option<SymbolKind> {
        if self.actors.contains(name) {
            Some(SymbolKind::Actor)
        } else if self.classes.contains_key(name) {
            Some(SymbolKind::Class)
        } else if self.instances.contains_key(name) {
            Some(SymbolKind::Instance)
        } else if self.elements.contains(name) {
            Some(SymbolKind::Element)
        } else if self.ui_component_types.contains(name) {
            Some(SymbolKind::UiComponent)
        } else {
            None
        }
    }

    fn ensure_free(&self, name: &str, wanted: SymbolKind) -> Result<(), ModelError> {
        let clash = |existing: SymbolKind| ModelError::Conflict {
            name: name.to_string(),
            existing: existing.as_str().to_string(),
        };
        let checks = [
            (SymbolKind::Actor, self.actors.contains(name)),
            (SymbolKind::Class, self.classes.contains_key(name)),
            (SymbolKind::Instance, self.instances.contains_key(name)),
            (SymbolKind::Element, self.elements.contains(name)),
            (SymbolKind::UiComponent, self.ui_component_types.contains(name)),
        ];
        for (kind, present) in checks {
            let allowed_overlap = matches!(
                (wanted, kind),
                (SymbolKind::Instance, SymbolKind::Class) | (SymbolKind::Class, SymbolKind::Instance)
            );
            if present && kind != wanted && !allowed_overlap {
                return Err(clash(kind));
            }
        }
        Ok(())
    }

    /// Returns a new table with `name` added. Re-declaring with identical
    /// detail is a no-op.
    pub fn declare(
        &self,
        kind: DeclKind,
        name: &str,
        detail: Option<&DeclDetail>,
    ) -> Result<SymbolTable, ModelError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ModelError::Invalid("name must not be empty".into()));
        }
        let mut next = self.clone();
        match kind {
            DeclKind::Actor | DeclKind::Element | DeclKind::UiComponent => {
                if detail.is_some() {
                    return Err(ModelError::Invalid(format!("`{name}` takes no detail")));
                }
                let (sym, set) = match kind {
                    DeclKind::Actor => (SymbolKind::Actor, &mut next.actors),
                    DeclKind::Element => (SymbolKind::Element, &mut next.elements),
                    _ => (SymbolKind::UiComponent, &mut next.ui_component_types),
                };
                self.ensure_free(name, sym)?;
                set.insert(name.to_string());
            }
            DeclKind::Class => {
                let props: BTreeSet<String> = match detail {
                    None => BTreeSet::new(),
                    Some(DeclDetail::Properties(p)) => p.iter().map(|s| s.trim().to_string()).collect(),
                    Some(DeclDetail::Class(_)) => {
                        return Err(ModelError::Invalid("class detail must be a property list".into()))
                    }
                };
                if props.iter().any(|p| p.is_empty()) {
                    return Err(ModelError::Invalid("property names must not be empty".into()));
                }
                self.ensure_free(name, SymbolKind::Class)?;
                match next.classes.get(name) {
                    Some(existing) if detail.is_some() && *existing != props => {
                        return Err(ModelError::Conflict {
                            name: name.to_string(),
                            existing: format!(
                                "class with properties {{{}}}",
                                existing.iter().cloned().collect::<Vec<_>>().join(", ")
                            ),
                        });
                    }
                    Some(_) => {}
                    None => {
                        next.classes.insert(name.to_string(), props);
                    }
                }
            }
            DeclKind::Property => {
                let Some(DeclDetail::Class(class)) = detail else {
                    return Err(ModelError::Invalid("property detail must name its class".into()));
                };
                let props = next.classes.get_mut(class.as_str()).ok_or_else(|| {
                    ModelError::UnresolvedClass { instance: name.to_string(), class: class.clone() }
                })?;
                props.insert(name.to_string());
            }
            DeclKind::Instance => {
                let Some(DeclDetail::Class(class)) = detail else {
                    return Err(ModelError::Invalid("instance detail must name its class".into()));
                };
                if !self.classes.contains_key(class.as_str()) {
                    return Err(ModelError::UnresolvedClass {
                        instance: name.to_string(),
                        class: class.clone(),
                    });
                }
                self.ensure_free(name, SymbolKind::Instance)?;
                match self.instances.get(name) {
                    Some(existing) if existing != class => {
                        return Err(ModelError::Conflict {
                            name: name.to_string(),
                            existing: format!("instance of {existing}"),
                        });
                    }
                    _ => {
                        next.instances.insert(name.to_string(), class.clone());
                    }
                }
            }
        }
        Ok(next)
    }

    /// Class of an instance, or the class itself.
    pub fn class_of(&self, name: &str) -> Option<&str> {
        if let Some(c) = self.instances.get(name) {
            return Some(c.as_str());
        }
        self.classes.get_key_value(name).map(|(k, _)| k.as_str())
    }

    pub fn properties_of(&self, owner: &str) -> Option<&BTreeSet<String>> {
        self.class_of(owner).and_then(|c| self.classes.get(c))
    }

    /// Resolves a dot-notation path. Single names resolve in the order
    /// actor, instance, class, element; `Owner.Prop` resolves when `Prop` is
    /// a property of the class (or the instance's class) `Owner`.
    pub fn resolve_operand(&self, path: &[&str]) -> Option<SymbolRef> {
        match path {
            [] => None,
            [name] => {
                let kind = if self.actors.contains(*name) {
                    SymbolKind::Actor
                } else if self.instances.contains_key(*name) {
                    SymbolKind::Instance
                } else if self.classes.contains_key(*name) {
                    SymbolKind::Class
                } else if self.elements.contains(*name) {
                    SymbolKind::Element
                } else {
                    return None;
                };
                Some(SymbolRef::new(kind, vec![name.to_string()], true))
            }
            [owner, prop] => {
                let props = self.properties_of(owner)?;
                props.contains(*prop).then(|| {
                    SymbolRef::new(
                        SymbolKind::Property,
                        vec![owner.to_string(), prop.to_string()],
                        true,
                    )
                })
            }
            _ => None,
        }
    }

    /// Resolution where an instance is expected: a bare class name stands for
    /// the implicit sole instance of that class.
    pub fn resolve_instance(&self, name: &str) -> Option<SymbolRef> {
        if self.instances.contains_key(name) || self.classes.contains_key(name) {
            Some(SymbolRef::new(SymbolKind::Instance, vec![name.to_string()], true))
        } else {
            None
        }
    }

    /// Names declared in `kind`, sorted.
    pub fn names(&self, kind: SymbolKind) -> Vec<&str> {
        match kind {
            SymbolKind::Actor => self.actors.iter().map(String::as_str).collect(),
            SymbolKind::Class => self.classes.keys().map(String::as_str).collect(),
            SymbolKind::Instance => self.instances.keys().map(String::as_str).collect(),
            SymbolKind::Element => self.elements.iter().map(String::as_str).collect(),
            SymbolKind::UiComponent => self.ui_component_types.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }

    pub fn is_ui_component_type(&self, word: &str) -> bool {
        self.ui_component_types.contains(word)
            || self.ui_component_types.contains(&word.to_lowercase())
    }

    fn check_invariants(&self) -> Result<(), ModelError> {
        for (inst, class) in &self.instances {
            if !self.classes.contains_key(class) {
                return Err(ModelError::UnresolvedClass { instance: inst.clone(), class: class.clone() });
            }
        }
        for seeded in SEEDED_UI_COMPONENT_TYPES {
            if !self.ui_component_types.contains(seeded) {
                return Err(ModelError::Invalid(format!("seeded UI component type `{seeded}` missing")));
            }
        }
        let mut seen: BTreeMap<&str, SymbolKind> = BTreeMap::new();
        let groups: [(SymbolKind, Vec<&str>); 4] = [
            (SymbolKind::Actor, self.actors.iter().map(String::as_str).collect()),
            (SymbolKind::Class, self.classes.keys().map(String::as_str).collect()),
            (SymbolKind::Element, self.elements.iter().map(String::as_str).collect()),
            (SymbolKind::UiComponent, self.ui_component_types.iter().map(String::as_str).collect()),
        ];
        for (kind, names) in groups {
            for n in names {
                if n.trim().is_empty() {
                    return Err(ModelError::Invalid("empty name".into()));
                }
                if let Some(prev) = seen.insert(n, kind) {
                    return Err(ModelError::Conflict { name: n.to_string(), existing: prev.as_str().to_string() });
                }
            }
        }
        for inst in self.instances.keys() {
            if let Some(prev) = seen.get(inst.as_str()) {
                if *prev != SymbolKind::Class {
                    return Err(ModelError::Conflict { name: inst.clone(), existing: prev.as_str().to_string() });
                }
            }
        }
        Ok(())
    }

    pub fn export_model(&self) -> String {
        serde_json::to_string_pretty(self).expect("symbol table serializes")
    }

    pub fn import_model(doc: &str) -> Result<SymbolTable, ModelError> {
        let table: SymbolTable =
            serde_json::from_str(doc).map_err(|e| ModelError::Format(e.to_string()))?;
        table.check_invariants().map_err(|e| ModelError::Format(e.to_string()))?;
        Ok(table)
    }
}
