//! The shipped default configs, embedded at compile time.

use crate::corpus::SynthConfig;
use crate::labeling::RuleSet;
use crate::preprocess::{Cleaner, CleaningConfig, NameDictionary, DEFAULT_NAME_TAG};

pub const CLEANING_TOML: &str = include_str!("../../../configs/cleaning.default.toml");
pub const NAMES_TXT: &str = include_str!("../../../configs/names.sample.txt");
pub const SYNTH_TOML: &str = include_str!("../../../configs/synth.default.toml");
pub const RULES_TOML: &str = include_str!("../../../configs/rules.sample.toml");

pub fn cleaning_config() -> CleaningConfig {
    CleaningConfig::from_toml(CLEANING_TOML).expect("shipped cleaning config is valid")
}

pub fn cleaner() -> Cleaner {
    Cleaner::new(cleaning_config()).expect("shipped cleaning config compiles")
}

pub fn name_dictionary() -> NameDictionary {
    NameDictionary::from_text(NAMES_TXT, DEFAULT_NAME_TAG).expect("shipped name list is valid")
}

pub fn name_list() -> Vec<String> {
    NAMES_TXT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn synth_config() -> SynthConfig {
    SynthConfig::from_toml(SYNTH_TOML).expect("shipped synth config is valid")
}

pub fn ruleset() -> RuleSet {
    RuleSet::from_toml(RULES_TOML).expect("shipped ruleset is valid")
}
