//! Seeded synthetic transaction generator.
//!
//! Each category carries description templates with `{placeholder}` slots.
//! Built-in placeholders:
//!
//! | placeholder | rendering |
//! |---|---|
//! | `{ddmmyy}` | transaction date as `030522` |
//! | `{dmy}` | `03/05/2022` |
//! | `{dmy_dot}` | `03.05.2022` |
//! | `{my}` | `05.2022` |
//! | `{month}` | French month name of the date |
//! | `{card}` | four random digits (templates write `cb****{card}`) |
//! | `{ref}` | 6 to 10 random digits |
//! | `{ref3}` | 3 random digits |
//! | `{amount}` | absolute value as `29,55eur` |
//! | `{amount_plain}` | absolute value as `29.55` |
//! | `{name}` | two entries of the name list, e.g. `jean dupont` |
//! | `{city}` | an entry of the global `city` pool |
//!
//! Any other placeholder is looked up in the category's `slots`, then in the
//! global `slots`. Near-duplicates copy an earlier record's plan and redraw
//! the name, the city and the amount.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, Duration, NaiveDate};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Amount, Dataset, Transaction};
use crate::{derive_seed, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConstraint {
    Income,
    Expense,
    Any,
}

impl SignConstraint {
    pub fn admits(self, value: Amount) -> bool {
        match self {
            SignConstraint::Income => value.is_income(),
            SignConstraint::Expense => value.is_expense(),
            SignConstraint::Any => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    pub label: String,
    pub sign: SignConstraint,
    /// Relative frequency; must be positive.
    pub weight: f64,
    /// Inclusive absolute amount range in euros, sampled log-uniformly.
    pub amount: [f64; 2],
    pub templates: Vec<String>,
    #[serde(default)]
    pub slots: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_records: usize,
    #[serde(default)]
    pub duplicate_rate: f64,
    /// Inclusive `[first, last]` dates.
    pub date_range: [NaiveDate; 2],
    /// Names drawn for `{name}`. Defaults to the shipped name dictionary.
    #[serde(default = "default_names")]
    pub names: Vec<String>,
    /// Global slot pools; must contain `city`.
    #[serde(default)]
    pub slots: BTreeMap<String, Vec<String>>,
    pub categories: Vec<CategorySpec>,
}

fn default_names() -> Vec<String> {
    crate::defaults::name_list()
}

const BUILTINS: &[&str] = &[
    "ddmmyy",
    "dmy",
    "dmy_dot",
    "my",
    "month",
    "card",
    "ref",
    "ref3",
    "amount",
    "amount_plain",
    "name",
    "city",
    "site",
];

const MONTHS: [&str; 12] = [
    "janvier", "fevrier", "mars", "avril", "mai", "juin", "juillet", "aout", "septembre",
    "octobre", "novembre", "decembre",
];

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SynthConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("synth config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SynthConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("synth config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.duplicate_rate) {
            return Err(Error::config(format!(
                "duplicate_rate must lie in [0, 1], got {}",
                self.duplicate_rate
            )));
        }
        if self.date_range[0] > self.date_range[1] {
            return Err(Error::config("date_range start is after its end"));
        }
        if self.categories.is_empty() {
            return Err(Error::config("at least one category is required"));
        }
        let mut labels = BTreeSet::new();
        for cat in &self.categories {
            if !labels.insert(cat.label.as_str()) {
                return Err(Error::config(format!("duplicate category `{}`", cat.label)));
            }
            if !(cat.weight > 0.0 && cat.weight.is_finite()) {
                return Err(Error::config(format!(
                    "category `{}`: weight must be positive",
                    cat.label
                )));
            }
            let [lo, hi] = cat.amount;
            if !(lo >= 0.01 && lo <= hi && hi.is_finite()) {
                return Err(Error::config(format!(
                    "category `{}`: amount range must satisfy 0.01 <= min <= max",
                    cat.label
                )));
            }
            if cat.templates.is_empty() {
                return Err(Error::config(format!("category `{}` has no templates", cat.label)));
            }
            for (name, pool) in cat.slots.iter().chain(self.slots.iter()) {
                if pool.is_empty() {
                    return Err(Error::config(format!("slot `{name}` is empty")));
                }
            }
            for template in &cat.templates {
                for ph in placeholders(template)? {
                    let known = BUILTINS.contains(&ph)
                        || cat.slots.contains_key(ph)
                        || self.slots.contains_key(ph);
                    if !known {
                        return Err(Error::config(format!(
                            "category `{}`: unknown placeholder `{{{ph}}}`",
                            cat.label
                        )));
                    }
                    if ph == "city" && !self.slots.contains_key("city") {
                        return Err(Error::config("`{city}` used but no global `city` slot"));
                    }
                    if ph == "name" && self.names.is_empty() {
                        return Err(Error::config("`{name}` used but the name list is empty"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn taxonomy(&self) -> BTreeSet<String> {
        self.categories.iter().map(|c| c.label.clone()).collect()
    }
}

fn placeholders(template: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        let end = after
            .find('}')
            .ok_or_else(|| Error::config(format!("unclosed placeholder in `{template}`")))?;
        out.push(&after[..end]);
        rest = &after[end + 1..];
    }
    Ok(out)
}

/// Everything needed to render one description; near-duplicates clone it.
#[derive(Clone, Debug)]
struct Plan {
    category: usize,
    template: usize,
    date: NaiveDate,
    card: u32,
    reference: String,
    ref3: u32,
    name: (usize, usize),
    city: usize,
    cents: i64,
    slot_picks: BTreeMap<String, usize>,
    site: String,
}

/// Pronounceable two or three syllable token standing in for a branch or
/// terminal name, so that unrelated records rarely collide after cleaning.
fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
    const VOWELS: &[u8] = b"aeiou";
    let syllables = rng.gen_range(2..=3);
    let mut word = String::with_capacity(2 * syllables);
    for _ in 0..syllables {
        word.push(char::from(CONSONANTS[rng.gen_range(0..CONSONANTS.len())]));
        word.push(char::from(VOWELS[rng.gen_range(0..VOWELS.len())]));
    }
    word
}

struct Sampler<'a> {
    config: &'a SynthConfig,
    categories: WeightedIndex<f64>,
    n_days: i64,
    city_pool: &'a [String],
}

impl<'a> Sampler<'a> {
    fn new(config: &'a SynthConfig) -> Result<Self> {
        let weights: Vec<f64> = config.categories.iter().map(|c| c.weight).collect();
        let categories = WeightedIndex::new(weights)
            .map_err(|e| Error::config(format!("category weights: {e}")))?;
        Ok(Sampler {
            config,
            categories,
            n_days: (config.date_range[1] - config.date_range[0]).num_days() + 1,
            city_pool: config.slots.get("city").map(Vec::as_slice).unwrap_or(&[]),
        })
    }

    fn sample_cents(&self, category: usize, rng: &mut ChaCha8Rng) -> i64 {
        let spec = &self.config.categories[category];
        let [lo, hi] = spec.amount;
        let magnitude = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
        let cents = ((magnitude * 100.0).round() as i64).max(1);
        let negative = match spec.sign {
            SignConstraint::Expense => true,
            SignConstraint::Income => false,
            SignConstraint::Any => rng.gen_bool(0.5),
        };
        if negative {
            -cents
        } else {
            cents
        }
    }

    fn sample_name(&self, rng: &mut ChaCha8Rng) -> (usize, usize) {
        let n = self.config.names.len().max(1);
        (rng.gen_range(0..n), rng.gen_range(0..n))
    }

    fn sample_city(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(0..self.city_pool.len().max(1))
    }

    fn fresh(&self, rng: &mut ChaCha8Rng) -> Plan {
        let category = self.categories.sample(rng);
        let spec = &self.config.categories[category];
        let template = rng.gen_range(0..spec.templates.len());
        let date = self.config.date_range[0] + Duration::days(rng.gen_range(0..self.n_days));
        let card = rng.gen_range(0..10_000);
        let ref_len = rng.gen_range(6..=10);
        let reference: String = (0..ref_len)
            .map(|_| char::from(b'0' + rng.gen_range(0..10u8)))
            .collect();
        let ref3 = rng.gen_range(0..1000);
        let name = self.sample_name(rng);
        let city = self.sample_city(rng);
        let cents = self.sample_cents(category, rng);
        let mut slot_picks = BTreeMap::new();
        for (slot, pool) in spec.slots.iter().chain(self.config.slots.iter()) {
            if slot_picks.contains_key(slot) {
                continue;
            }
            slot_picks.insert(slot.clone(), rng.gen_range(0..pool.len()));
        }
        let site = pseudo_word(rng);
        Plan {
            category,
            template,
            date,
            card,
            reference,
            ref3,
            name,
            city,
            cents,
            slot_picks,
            site,
        }
    }

    fn perturb(&self, source: &Plan, rng: &mut ChaCha8Rng) -> Plan {
        let mut plan = source.clone();
        plan.name = self.sample_name(rng);
        plan.city = self.sample_city(rng);
        plan.cents = self.sample_cents(plan.category, rng);
        plan
    }

    fn render(&self, plan: &Plan) -> String {
        let spec = &self.config.categories[plan.category];
        let template = &spec.templates[plan.template];
        let mut out = String::with_capacity(template.len() + 32);
        let mut rest = template.as_str();
        while let Some(start) = rest.find('{') {
            out.push_str(&rest[..start]);
            let after = &rest[start + 1..];
            let end = after.find('}').expect("validated template");
            self.render_placeholder(&after[..end], plan, &mut out);
            rest = &after[end + 1..];
        }
        out.push_str(rest);
        out
    }

    fn render_placeholder(&self, ph: &str, plan: &Plan, out: &mut String) {
        use std::fmt::Write;
        let abs = plan.cents.unsigned_abs();
        let d = plan.date;
        let _ = match ph {
            "ddmmyy" => write!(out, "{}", d.format("%d%m%y")),
            "dmy" => write!(out, "{}", d.format("%d/%m/%Y")),
            "dmy_dot" => write!(out, "{}", d.format("%d.%m.%Y")),
            "my" => write!(out, "{}", d.format("%m.%Y")),
            "month" => write!(out, "{}", MONTHS[d.month0() as usize]),
            "card" => write!(out, "{:04}", plan.card),
            "ref" => write!(out, "{}", plan.reference),
            "ref3" => write!(out, "{:03}", plan.ref3),
            "amount" => write!(out, "{},{:02}eur", abs / 100, abs % 100),
            "amount_plain" => write!(out, "{}.{:02}", abs / 100, abs % 100),
            "name" => {
                let names = &self.config.names;
                write!(out, "{} {}", names[plan.name.0], names[plan.name.1])
            }
            "city" => write!(out, "{}", self.city_pool[plan.city]),
            "site" => write!(out, "{}", plan.site),
            slot => {
                let spec = &self.config.categories[plan.category];
                let pool = spec
                    .slots
                    .get(slot)
                    .or_else(|| self.config.slots.get(slot))
                    .expect("validated slot");
                write!(out, "{}", pool[plan.slot_picks[slot]])
            }
        };
    }
}

/// Generate `config.n_records` labeled transactions.
///
/// Record `i` draws from its own ChaCha stream seeded by `(seed, i)`, so the
/// output is a pure function of the config.
pub fn generate_synthetic(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let sampler = Sampler::new(config)?;
    let width = config.n_records.max(1).to_string().len().max(6);
    let mut plans: Vec<Plan> = Vec::with_capacity(config.n_records);
    let mut records = Vec::with_capacity(config.n_records);
    for i in 0..config.n_records {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, i as u64));
        let duplicate = i > 0 && rng.gen::<f64>() < config.duplicate_rate;
        let plan = if duplicate {
            let source = rng.gen_range(0..i);
            sampler.perturb(&plans[source], &mut rng)
        } else {
            sampler.fresh(&mut rng)
        };
        records.push(Transaction {
            id: format!("tx{i:0width$}"),
            description: sampler.render(&plan),
            value: Amount(plan.cents),
            date: plan.date,
            category: Some(config.categories[plan.category].label.clone()),
        });
        plans.push(plan);
    }
    Dataset::new(records, config.taxonomy())
}
