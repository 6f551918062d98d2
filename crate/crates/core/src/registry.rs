//! Name-keyed registries for interchangeable strategies.
//!
//! Every family of algorithm variants in this crate (step-size rules, start
//! strategies, landscape certificates, polar solvers, vector transports) is a
//! trait object registered under a short name. The CLI and experiment configs
//! select variants by that name at runtime.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Insertion-ordered registry of shared trait objects.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    pub fn register(&mut self, name: impl Into<String>, item: Arc<T>) -> Result<()> {
        let name = name.into();
        if self.entries.iter().any(|(n, _)| *n == name) {
            return Err(Error::Config(format!(
                "{} `{}` is already registered",
                self.kind, name
            )));
        }
        self.entries.push((name, item));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, item)| Arc::clone(item))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<T>)> {
        self.entries.iter().map(|(n, item)| (n.as_str(), item))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.names())
            .finish()
    }
}
