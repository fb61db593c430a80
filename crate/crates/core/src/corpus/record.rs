use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Signed amount in euro cents.
///
/// Serialized as a decimal string with exactly two fraction digits so that
/// datasets are byte-identical across platforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Amount(pub i64);

impl Amount {
    pub fn from_cents(cents: i64) -> Self {
        Amount(cents)
    }

    pub fn cents(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn is_expense(self) -> bool {
        self.0 < 0
    }

    pub fn is_income(self) -> bool {
        self.0 > 0
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Amount {
    type Err = String;

    /// Accepts `-29.55`, `1000`, `-2.2`, `+12,50` and the unicode minus sign.
    /// Fraction digits beyond the second must be zeros.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (neg, body) = match t.chars().next() {
            Some('-') => (true, &t[1..]),
            Some('\u{2212}') => (true, &t['\u{2212}'.len_utf8()..]),
            Some('+') => (false, &t[1..]),
            _ => (false, t),
        };
        if body.is_empty() {
            return Err(format!("not a decimal amount: {s:?}"));
        }
        let (int_part, frac_part) = match body.find(['.', ',']) {
            Some(pos) => (&body[..pos], &body[pos + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(format!("not a decimal amount: {s:?}"));
        }
        if frac_part.len() > 2 && frac_part[2..].bytes().any(|b| b != b'0') {
            return Err(format!("more than two significant fraction digits: {s:?}"));
        }
        let units: i64 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| format!("amount out of range: {s:?}"))?
        };
        let mut frac = frac_part.bytes().take(2).map(|b| (b - b'0') as i64);
        let cents_frac = frac.next().unwrap_or(0) * 10 + frac.next().unwrap_or(0);
        let cents = units
            .checked_mul(100)
            .and_then(|c| c.checked_add(cents_frac))
            .ok_or_else(|| format!("amount out of range: {s:?}"))?;
        Ok(Amount(if neg { -cents } else { cents }))
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Repr::deserialize(deserializer)? {
            Repr::Text(s) => s,
            Repr::Number(n) => n.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// One bank transaction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub id: String,
    pub description: String,
    pub value: Amount,
    pub date: NaiveDate,
    #[serde(default)]
    pub category: Option<String>,
}

impl Transaction {
    pub fn new(
        id: impl Into<String>,
        description: impl Into<String>,
        value: Amount,
        date: NaiveDate,
        category: Option<String>,
    ) -> Self {
        Transaction {
            id: id.into(),
            description: description.into(),
            value,
            date,
            category,
        }
    }
}

/// Ordered transactions plus the admissible category labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<Transaction>,
    taxonomy: BTreeSet<String>,
}

impl Dataset {
    /// Build a dataset, checking id uniqueness, non-blank descriptions and
    /// that every label belongs to `taxonomy`.
    pub fn new(records: Vec<Transaction>, taxonomy: BTreeSet<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for (row, tx) in records.iter().enumerate() {
            if !seen.insert(tx.id.as_str()) {
                return Err(Error::DuplicateId(tx.id.clone()));
            }
            if tx.description.trim().is_empty() {
                return Err(Error::Schema {
                    row: row + 1,
                    field: "description".into(),
                    message: "empty after trimming".into(),
                });
            }
            if let Some(cat) = &tx.category {
                if !taxonomy.contains(cat) {
                    return Err(Error::Schema {
                        row: row + 1,
                        field: "category".into(),
                        message: format!("`{cat}` is not in the taxonomy"),
                    });
                }
            }
        }
        Ok(Dataset { records, taxonomy })
    }

    /// Build a dataset whose taxonomy is the set of observed labels.
    pub fn from_records(records: Vec<Transaction>) -> Result<Self> {
        let taxonomy = records.iter().filter_map(|t| t.category.clone()).collect();
        Dataset::new(records, taxonomy)
    }

    pub fn records(&self) -> &[Transaction] {
        &self.records
    }

    pub fn taxonomy(&self) -> &BTreeSet<String> {
        &self.taxonomy
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<Transaction> {
        self.records
    }

    /// Keep the records at `indices` (in the given order), same taxonomy.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            taxonomy: self.taxonomy.clone(),
        }
    }

    /// Replace record labels; taxonomy is widened to include any new label.
    pub fn with_labels(&self, labels: Vec<Option<String>>) -> Dataset {
        let mut taxonomy = self.taxonomy.clone();
        let records = self
            .records
            .iter()
            .zip(labels)
            .map(|(tx, label)| {
                if let Some(l) = &label {
                    taxonomy.insert(l.clone());
                }
                Transaction {
                    category: label,
                    ..tx.clone()
                }
            })
            .collect();
        Dataset { records, taxonomy }
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|t| t.id.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amount_parsing() {
        assert_eq!("-29.55".parse::<Amount>().unwrap(), Amount(-2955));
        assert_eq!("1000".parse::<Amount>().unwrap(), Amount(100_000));
        assert_eq!("1000.0".parse::<Amount>().unwrap(), Amount(100_000));
        assert_eq!("-2.2".parse::<Amount>().unwrap(), Amount(-220));
        assert_eq!("2,20".parse::<Amount>().unwrap(), Amount(220));
        assert_eq!("\u{2212}29.55".parse::<Amount>().unwrap(), Amount(-2955));
        assert_eq!("1.000000".parse::<Amount>().unwrap(), Amount(100));
        assert!("1.005".parse::<Amount>().is_err());
        assert!("abc".parse::<Amount>().is_err());
        assert!("-".parse::<Amount>().is_err());
        assert!("".parse::<Amount>().is_err());
    }

    #[test]
    fn amount_display() {
        assert_eq!(Amount(-2955).to_string(), "-29.55");
        assert_eq!(Amount(100_000).to_string(), "1000.00");
        assert_eq!(Amount(-5).to_string(), "-0.05");
        assert_eq!(Amount(0).to_string(), "0.00");
    }

    #[test]
    fn dataset_rejects_duplicate_ids() {
        let d = NaiveDate::from_ymd_opt(2022, 5, 3).unwrap();
        let a = Transaction::new("x", "a", Amount(1), d, None);
        let err = Dataset::from_records(vec![a.clone(), a]).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(id) if id == "x"));
    }

    #[test]
    fn dataset_rejects_unknown_label() {
        let d = NaiveDate::from_ymd_opt(2022, 5, 3).unwrap();
        let a = Transaction::new("x", "a", Amount(1), d, Some("A".into()));
        assert!(Dataset::new(vec![a], BTreeSet::new()).is_err());
    }
}
