//! Description cleaning and human-name anonymization.

mod clean;
mod config;
mod names;

pub use clean::{fold_lower, Cleaner};
pub use config::{CleaningConfig, SynonymClass};
pub use names::{anonymize_names, NameDictionary, DEFAULT_NAME_TAG};

use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;

/// Cleaned, lowercase tokens of one transaction description.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub source_id: String,
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn new(source_id: impl Into<String>, tokens: Vec<String>) -> Self {
        TokenSequence {
            source_id: source_id.into(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Clean a raw description into a token sequence.
pub fn clean(description: &str, cleaner: &Cleaner) -> TokenSequence {
    TokenSequence::new(String::new(), cleaner.clean(description))
}

/// Clean then anonymize every record, order-aligned with `dataset.records()`.
pub fn preprocess_dataset(
    dataset: &Dataset,
    cleaner: &Cleaner,
    names: &NameDictionary,
) -> Vec<TokenSequence> {
    dataset
        .records()
        .iter()
        .map(|tx| {
            let tokens = anonymize_names(cleaner.clean(&tx.description), names);
            TokenSequence::new(tx.id.clone(), tokens)
        })
        .collect()
}

/// Cleaning rules and name dictionary applied together.
#[derive(Clone, Debug)]
pub struct Preprocessor {
    cleaner: Cleaner,
    names: NameDictionary,
}

impl Preprocessor {
    pub fn new(config: CleaningConfig, names: NameDictionary) -> crate::Result<Self> {
        Ok(Preprocessor {
            cleaner: Cleaner::new(config)?,
            names,
        })
    }

    pub fn cleaner(&self) -> &Cleaner {
        &self.cleaner
    }

    pub fn config(&self) -> &CleaningConfig {
        self.cleaner.config()
    }

    pub fn names(&self) -> &NameDictionary {
        &self.names
    }

    pub fn tokens(&self, description: &str) -> Vec<String> {
        anonymize_names(self.cleaner.clean(description), &self.names)
    }

    pub fn process(&self, dataset: &Dataset) -> Vec<TokenSequence> {
        preprocess_dataset(dataset, &self.cleaner, &self.names)
    }
}
