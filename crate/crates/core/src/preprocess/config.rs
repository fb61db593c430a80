use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A set of equivalent words or phrases; only the first occurrence in a
/// description survives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynonymClass {
    pub canonical: String,
    pub members: Vec<String>,
}

/// Removal patterns, lexicons and synonym sets driving [`super::Cleaner`].
///
/// Pattern classes run in field order (dates, account details, amounts and
/// currencies, miscellaneous), then the city lexicon, then tokenization, stop
/// words, synonyms and repeated tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleaningConfig {
    #[serde(default = "yes")]
    pub fold_diacritics: bool,
    /// Characters replaced by spaces before whitespace tokenization.
    #[serde(default = "default_punctuation")]
    pub punctuation: String,
    /// Rewrite a surviving synonym to its class's canonical form. When off the
    /// first occurrence is kept as written.
    #[serde(default)]
    pub rewrite_synonyms: bool,
    #[serde(default)]
    pub date_patterns: Vec<String>,
    #[serde(default)]
    pub account_patterns: Vec<String>,
    #[serde(default)]
    pub amount_currency_patterns: Vec<String>,
    #[serde(default)]
    pub misc_patterns: Vec<String>,
    /// City names (one or more words), removed as location information.
    #[serde(default)]
    pub city_lexicon: Vec<String>,
    #[serde(default)]
    pub stop_words: Vec<String>,
    #[serde(default)]
    pub synonym_classes: Vec<SynonymClass>,
}

fn yes() -> bool {
    true
}

fn default_punctuation() -> String {
    ",;:/()*=.'\"!?+#&-".to_string()
}

impl Default for CleaningConfig {
    /// The identity-ish config: lowercase and tokenize, nothing removed.
    fn default() -> Self {
        CleaningConfig {
            fold_diacritics: true,
            punctuation: default_punctuation(),
            rewrite_synonyms: false,
            date_patterns: Vec::new(),
            account_patterns: Vec::new(),
            amount_currency_patterns: Vec::new(),
            misc_patterns: Vec::new(),
            city_lexicon: Vec::new(),
            stop_words: Vec::new(),
            synonym_classes: Vec::new(),
        }
    }
}

impl CleaningConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CleaningConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("cleaning config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CleaningConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("cleaning config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Synonym classes must be pairwise disjoint and non-empty. Pattern
    /// compilation is checked by [`super::Cleaner::new`].
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for class in &self.synonym_classes {
            if class.members.is_empty() {
                return Err(Error::config(format!(
                    "synonym class `{}` has no members",
                    class.canonical
                )));
            }
            for m in &class.members {
                let key = m.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
                if key.is_empty() {
                    return Err(Error::config("empty synonym member"));
                }
                if !seen.insert(key) {
                    return Err(Error::config(format!(
                        "synonym `{m}` appears in more than one class"
                    )));
                }
            }
        }
        Ok(())
    }
}
