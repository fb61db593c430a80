use std::collections::HashSet;

use regex::Regex;

use super::config::CleaningConfig;
use crate::{Error, Result};

/// Lowercase, folding accented letters to ASCII when `fold` is set.
/// Other non-ASCII characters become spaces.
pub fn fold_lower(text: &str, fold: bool) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_ascii() {
            out.push(c.to_ascii_lowercase());
        } else if !fold {
            out.extend(c.to_lowercase());
        } else if c.is_alphabetic() {
            match deunicode::deunicode_char(c) {
                Some(s) => out.extend(s.chars().map(|ch| ch.to_ascii_lowercase())),
                None => out.push(' '),
            }
        } else {
            out.push(' ');
        }
    }
    out
}

#[derive(Clone, Debug)]
struct CompiledSynonym {
    tokens: Vec<String>,
    class: usize,
}

/// A compiled, immutable [`CleaningConfig`].
#[derive(Clone, Debug)]
pub struct Cleaner {
    config: CleaningConfig,
    removal: Vec<Regex>,
    punctuation: Vec<char>,
    stop_words: HashSet<String>,
    synonyms: Vec<CompiledSynonym>,
    canonical: Vec<Vec<String>>,
}

impl Cleaner {
    pub fn new(config: CleaningConfig) -> Result<Self> {
        config.validate()?;
        let mut removal = Vec::new();
        for (class, patterns) in [
            ("date_patterns", &config.date_patterns),
            ("account_patterns", &config.account_patterns),
            ("amount_currency_patterns", &config.amount_currency_patterns),
            ("misc_patterns", &config.misc_patterns),
        ] {
            for p in patterns {
                let re = Regex::new(p)
                    .map_err(|e| Error::config(format!("{class}: pattern `{p}`: {e}")))?;
                removal.push(re);
            }
        }
        if let Some(re) = lexicon_regex(&config.city_lexicon, config.fold_diacritics)? {
            removal.push(re);
        }
        let fold = config.fold_diacritics;
        let norm_tokens =
            |s: &str| -> Vec<String> { fold_lower(s, fold).split_whitespace().map(str::to_string).collect() };
        let stop_words = config
            .stop_words
            .iter()
            .flat_map(|w| norm_tokens(w))
            .collect();
        let mut synonyms = Vec::new();
        let mut canonical = Vec::new();
        for (class, syn) in config.synonym_classes.iter().enumerate() {
            canonical.push(norm_tokens(&syn.canonical));
            for m in &syn.members {
                synonyms.push(CompiledSynonym {
                    tokens: norm_tokens(m),
                    class,
                });
            }
        }
        // longest phrase first so "carte bancaire" wins over "carte"
        synonyms.sort_by(|a, b| b.tokens.len().cmp(&a.tokens.len()));
        Ok(Cleaner {
            punctuation: config.punctuation.chars().collect(),
            config,
            removal,
            stop_words,
            synonyms,
            canonical,
        })
    }

    pub fn config(&self) -> &CleaningConfig {
        &self.config
    }

    /// Does any removal pattern match somewhere in `token`?
    pub fn is_removable(&self, token: &str) -> bool {
        self.removal.iter().any(|re| re.is_match(token))
    }

    pub fn is_stop_word(&self, token: &str) -> bool {
        self.stop_words.contains(token)
    }

    /// Clean a raw description into tokens.
    pub fn clean(&self, description: &str) -> Vec<String> {
        let mut text = fold_lower(description, self.config.fold_diacritics);
        for re in &self.removal {
            if re.is_match(&text) {
                text = re.replace_all(&text, " ").into_owned();
            }
        }
        let text: String = text
            .chars()
            .map(|c| if self.punctuation.contains(&c) { ' ' } else { c })
            .collect();
        let tokens: Vec<&str> = text
            .split_whitespace()
            .filter(|t| !self.is_removable(t) && !self.is_stop_word(t))
            .collect();

        let mut out: Vec<String> = Vec::with_capacity(tokens.len());
        let mut seen_classes = vec![false; self.canonical.len()];
        let mut i = 0;
        while i < tokens.len() {
            let hit = self.synonyms.iter().find(|s| {
                tokens.len() - i >= s.tokens.len()
                    && s.tokens.iter().zip(&tokens[i..]).all(|(a, b)| a == b)
            });
            match hit {
                Some(syn) => {
                    let width = syn.tokens.len();
                    if !seen_classes[syn.class] {
                        seen_classes[syn.class] = true;
                        if self.config.rewrite_synonyms {
                            out.extend(self.canonical[syn.class].iter().cloned());
                        } else {
                            out.extend(tokens[i..i + width].iter().map(|t| t.to_string()));
                        }
                    }
                    i += width;
                }
                None => {
                    out.push(tokens[i].to_string());
                    i += 1;
                }
            }
        }
        let mut unique = HashSet::with_capacity(out.len());
        out.retain(|t| unique.insert(t.clone()));
        out
    }
}

fn lexicon_regex(words: &[String], fold: bool) -> Result<Option<Regex>> {
    let mut phrases: Vec<Vec<String>> = words
        .iter()
        .map(|w| {
            fold_lower(w, fold)
                .replace('-', " ")
                .split_whitespace()
                .map(regex::escape)
                .collect::<Vec<_>>()
        })
        .filter(|p| !p.is_empty())
        .collect();
    if phrases.is_empty() {
        return Ok(None);
    }
    phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    phrases.dedup();
    let alternation = phrases
        .iter()
        .map(|p| p.join(r"[\s\-]+"))
        .collect::<Vec<_>>()
        .join("|");
    Regex::new(&format!(r"\b(?:{alternation})\b"))
        .map(Some)
        .map_err(|e| Error::config(format!("city_lexicon: {e}")))
}
