use std::collections::HashSet;

use super::clean::fold_lower;
use crate::{Error, Result};

pub const DEFAULT_NAME_TAG: &str = "<name>";

/// Case-insensitive set of given names and surnames plus the replacement tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NameDictionary {
    names: HashSet<String>,
    tag: String,
}

impl NameDictionary {
    pub fn new<I, S>(names: I, tag: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let names: HashSet<String> = names
            .into_iter()
            .flat_map(|n| {
                fold_lower(n.as_ref(), true)
                    .split_whitespace()
                    .map(str::to_string)
                    .collect::<Vec<_>>()
            })
            .collect();
        let tag = tag.into();
        if names.is_empty() {
            return Err(Error::config("name dictionary is empty"));
        }
        if names.contains(&tag.to_lowercase()) {
            return Err(Error::config(format!("tag `{tag}` is itself a dictionary name")));
        }
        Ok(NameDictionary { names, tag })
    }

    /// One name per line; blank lines and `#` comments are ignored.
    pub fn from_text(text: &str, tag: impl Into<String>) -> Result<Self> {
        let lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        NameDictionary::new(lines, tag)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.names.contains(token) || self.names.contains(&token.to_lowercase())
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Names in sorted order.
    pub fn names(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.names.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}

/// Replace dictionary names with the tag; adjacent tags collapse to one.
pub fn anonymize_names(tokens: Vec<String>, dict: &NameDictionary) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    for token in tokens {
        if dict.contains(&token) {
            if out.last().map(String::as_str) != Some(dict.tag()) {
                out.push(dict.tag().to_string());
            }
        } else {
            out.push(token);
        }
    }
    out
}
