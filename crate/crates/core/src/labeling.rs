//! Keyword rules with a value-sign constraint, applied to raw descriptions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Amount, Dataset, SignConstraint, Transaction};
use crate::preprocess::fold_lower;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryRule {
    pub category: String,
    /// Every phrase must occur (case-insensitive substring).
    pub include: Vec<String>,
    /// No phrase may occur.
    #[serde(default)]
    pub exclude: Vec<String>,
    #[serde(default = "any_sign")]
    pub sign: SignConstraint,
    #[serde(default)]
    pub priority: i64,
}

fn any_sign() -> SignConstraint {
    SignConstraint::Any
}

fn default_unlabeled() -> String {
    "UNLABELED".to_string()
}

/// Ordered rules. File order breaks priority ties.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    #[serde(default)]
    pub rules: Vec<CategoryRule>,
    /// Marker used in reports for records no rule matches.
    #[serde(default = "default_unlabeled")]
    pub unlabeled: String,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            rules: Vec::new(),
            unlabeled: default_unlabeled(),
        }
    }
}

impl RuleSet {
    pub fn from_toml(text: &str) -> Result<Self> {
        let rs: RuleSet =
            toml::from_str(text).map_err(|e| Error::config(format!("ruleset: {e}")))?;
        rs.validate()?;
        Ok(rs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rs: RuleSet =
            serde_json::from_str(text).map_err(|e| Error::config(format!("ruleset: {e}")))?;
        rs.validate()?;
        Ok(rs)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, rule) in self.rules.iter().enumerate() {
            let include: BTreeSet<String> = rule.include.iter().map(|p| norm(p)).collect();
            if include.is_empty() || include.iter().any(String::is_empty) {
                return Err(Error::config(format!(
                    "rule {} ({}): include list must hold non-empty phrases",
                    i + 1,
                    rule.category
                )));
            }
            if let Some(p) = rule.exclude.iter().map(|p| norm(p)).find(|p| include.contains(p)) {
                return Err(Error::config(format!(
                    "rule {} ({}): `{p}` is both included and excluded",
                    i + 1,
                    rule.category
                )));
            }
        }
        Ok(())
    }

    /// Every rule category must belong to `taxonomy`.
    pub fn check_taxonomy(&self, taxonomy: &BTreeSet<String>) -> Result<()> {
        match self.rules.iter().find(|r| !taxonomy.contains(&r.category)) {
            Some(r) => Err(Error::config(format!(
                "rule category `{}` is not in the taxonomy",
                r.category
            ))),
            None => Ok(()),
        }
    }

    pub fn categories(&self) -> BTreeSet<String> {
        self.rules.iter().map(|r| r.category.clone()).collect()
    }

    pub fn compile(&self) -> CompiledRules<'_> {
        CompiledRules {
            rules: self
                .rules
                .iter()
                .map(|r| CompiledRule {
                    category: &r.category,
                    include: r.include.iter().map(|p| norm(p)).collect(),
                    exclude: r.exclude.iter().map(|p| norm(p)).collect(),
                    sign: r.sign,
                    priority: r.priority,
                })
                .collect(),
        }
    }
}

fn norm(phrase: &str) -> String {
    fold_lower(phrase, true)
}

#[derive(Debug)]
struct CompiledRule<'a> {
    category: &'a str,
    include: Vec<String>,
    exclude: Vec<String>,
    sign: SignConstraint,
    priority: i64,
}

/// Rules with pre-normalized phrases.
#[derive(Debug)]
pub struct CompiledRules<'a> {
    rules: Vec<CompiledRule<'a>>,
}

impl<'a> CompiledRules<'a> {
    /// Label for a raw description and value, or `None` when no rule fires.
    pub fn label(&self, description: &str, value: Amount) -> Option<&'a str> {
        let text = fold_lower(description, true);
        let mut best: Option<&CompiledRule<'a>> = None;
        for rule in &self.rules {
            let fires = rule.sign.admits(value)
                && rule.include.iter().all(|p| text.contains(p.as_str()))
                && !rule.exclude.iter().any(|p| text.contains(p.as_str()));
            // strict comparison keeps the earliest rule on ties
            if fires && best.map_or(true, |b| rule.priority > b.priority) {
                best = Some(rule);
            }
        }
        best.map(|r| r.category)
    }
}

/// Category for `tx`, or `None` (unlabeled).
pub fn apply_rules<'a>(tx: &Transaction, rules: &'a RuleSet) -> Option<&'a str> {
    rules.compile().label(&tx.description, tx.value)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub total: usize,
    pub per_category: BTreeMap<String, usize>,
    pub unlabeled: usize,
    pub unlabeled_fraction: f64,
    /// Records that kept a pre-existing label (no `force`).
    pub kept_existing: usize,
    /// Among records that had a label before, how many the rules reproduced.
    pub agreement_with_existing: Option<f64>,
}

/// Label every record. Existing labels are overwritten only with `force`.
pub fn label_dataset(dataset: &Dataset, rules: &RuleSet, force: bool) -> (Dataset, CoverageReport) {
    let compiled = rules.compile();
    let mut report = CoverageReport {
        total: dataset.len(),
        ..Default::default()
    };
    let mut had_label = 0usize;
    let mut agreed = 0usize;
    let mut labels = Vec::with_capacity(dataset.len());
    for tx in dataset.records() {
        let fired = compiled.label(&tx.description, tx.value);
        if let Some(existing) = &tx.category {
            had_label += 1;
            if fired == Some(existing.as_str()) {
                agreed += 1;
            }
        }
        let label = match (&tx.category, force) {
            (Some(existing), false) => {
                report.kept_existing += 1;
                Some(existing.clone())
            }
            _ => fired.map(str::to_string),
        };
        match &label {
            Some(l) => *report.per_category.entry(l.clone()).or_default() += 1,
            None => report.unlabeled += 1,
        }
        labels.push(label);
    }
    if report.total > 0 {
        report.unlabeled_fraction = report.unlabeled as f64 / report.total as f64;
    }
    if had_label > 0 {
        report.agreement_with_existing = Some(agreed as f64 / had_label as f64);
    }
    (dataset.with_labels(labels), report)
}
