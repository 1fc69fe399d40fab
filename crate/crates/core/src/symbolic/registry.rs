use std::collections::HashMap;
use std::sync::Arc;

use super::ExprError;

/// Chart role of a registered symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Config,
    Velocity,
    Momentum,
    Acceleration,
    /// Free symbol with no chart meaning (parameters, scratch variables).
    Parameter,
}

/// Ordered, immutable set of symbol names. The order fixes the monomial order
/// of every expression built over it.
#[derive(Debug)]
pub struct VariableRegistry {
    names: Vec<String>,
    roles: Vec<Role>,
    index: HashMap<String, usize>,
}

impl VariableRegistry {
    pub fn new<S: AsRef<str>>(vars: &[(S, Role)]) -> Result<Arc<Self>, ExprError> {
        let mut names = Vec::with_capacity(vars.len());
        let mut roles = Vec::with_capacity(vars.len());
        let mut index = HashMap::new();
        for (name, role) in vars {
            let name = name.as_ref();
            if !is_identifier(name) {
                return Err(ExprError::InvalidName(name.to_string()));
            }
            if index.insert(name.to_string(), names.len()).is_some() {
                return Err(ExprError::DuplicateName(name.to_string()));
            }
            names.push(name.to_string());
            roles.push(*role);
        }
        Ok(Arc::new(VariableRegistry { names, roles, index }))
    }

    /// Registry of plain parameters, handy for tests and scratch work.
    pub fn with_names<S: AsRef<str>>(names: &[S]) -> Result<Arc<Self>, ExprError> {
        let vars: Vec<(&str, Role)> = names.iter().map(|n| (n.as_ref(), Role::Parameter)).collect();
        Self::new(&vars)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn role(&self, i: usize) -> Role {
        self.roles[i]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, ExprError> {
        self.lookup(name).ok_or_else(|| ExprError::UnknownVariable(name.to_string()))
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.roles[i] == role).collect()
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
