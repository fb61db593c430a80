use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde_json::Value;

use super::{Amount, Dataset, Transaction};
use crate::{Error, Result};

/// On-disk dataset format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// Guess from the file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

pub fn read_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset_from(BufReader::new(file), format)
}

/// Parse a dataset, preserving input order. Malformed rows are errors.
pub fn read_dataset_from<R: Read>(reader: R, format: Format) -> Result<Dataset> {
    let records = match format {
        Format::Jsonl => read_jsonl(BufReader::new(reader))?,
        Format::Csv => read_csv(reader)?,
    };
    Dataset::from_records(records)
}

fn schema(row: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        row,
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_value(row: usize, raw: &str) -> Result<Amount> {
    raw.parse::<Amount>().map_err(|m| schema(row, "value", m))
}

fn parse_date(row: usize, raw: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d")
        .map_err(|e| schema(row, "date", format!("expected YYYY-MM-DD: {e}")))
}

fn check_description(row: usize, s: &str) -> Result<()> {
    if s.trim().is_empty() {
        return Err(schema(row, "description", "empty after trimming"));
    }
    Ok(())
}

fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Transaction>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let row = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(&line).map_err(|e| schema(row, "<record>", e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| schema(row, "<record>", "expected a JSON object"))?;
        let text = |field: &str| -> Result<String> {
            match obj.get(field) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) if field == "value" => Ok(n.to_string()),
                Some(_) => Err(schema(row, field, "expected a string")),
                None => Err(schema(row, field, "missing")),
            }
        };
        let id = text("id")?;
        let description = text("description")?;
        check_description(row, &description)?;
        let value = parse_value(row, &text("value")?)?;
        let date = parse_date(row, &text("date")?)?;
        let category = match obj.get("category") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if s.is_empty() => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(schema(row, "category", "expected a string or null")),
        };
        out.push(Transaction {
            id,
            description,
            value,
            date,
            category,
        });
    }
    Ok(out)
}

fn read_csv<R: Read>(reader: R) -> Result<Vec<Transaction>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| schema(1, "<header>", e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let required = |name: &str| column(name).ok_or_else(|| schema(1, name, "missing column"));
    let (id_col, desc_col, value_col, date_col) = (
        required("id")?,
        required("description")?,
        required("value")?,
        required("date")?,
    );
    let cat_col = column("category");

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1
        let row = i + 2;
        let rec = rec.map_err(|e| schema(row, "<record>", e.to_string()))?;
        let get = |col: usize, name: &str| -> Result<&str> {
            rec.get(col).ok_or_else(|| schema(row, name, "missing"))
        };
        let description = get(desc_col, "description")?.to_string();
        check_description(row, &description)?;
        let category = match cat_col.and_then(|c| rec.get(c)) {
            Some(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
            _ => None,
        };
        out.push(Transaction {
            id: get(id_col, "id")?.to_string(),
            description,
            value: parse_value(row, get(value_col, "value")?)?,
            date: parse_date(row, get(date_col, "date")?)?,
            category,
        });
    }
    Ok(out)
}

pub fn write_jsonl(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_jsonl_to(&mut w, dataset)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// One JSON object per line, fields in schema order.
pub fn write_jsonl_to<W: Write>(mut writer: W, dataset: &Dataset) -> Result<()> {
    for tx in dataset.records() {
        serde_json::to_writer(&mut writer, tx)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_csv_is_empty() {
        let d = read_dataset_from("id,description,value,date,category\n".as_bytes(), Format::Csv)
            .unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn empty_jsonl_is_empty() {
        assert!(read_dataset_from("".as_bytes(), Format::Jsonl)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn table_row_parses() {
        let csv = "id,description,value,date,category\n\
                   t1,030522 cb****1234 super_market_name city_name,-29.55,2022-05-03,GROCERIES\n";
        let d = read_dataset_from(csv.as_bytes(), Format::Csv).unwrap();
        let tx = &d.records()[0];
        assert_eq!(tx.description, "030522 cb****1234 super_market_name city_name");
        assert_eq!(tx.value, Amount(-2955));
        assert_eq!(tx.date, NaiveDate::from_ymd_opt(2022, 5, 3).unwrap());
        assert_eq!(tx.category.as_deref(), Some("GROCERIES"));
    }

    #[test]
    fn csv_missing_column_is_schema_error() {
        let err = read_dataset_from("id,description,date\n".as_bytes(), Format::Csv).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "value"));
    }

    #[test]
    fn jsonl_bad_date_names_row_and_field() {
        let text = "{\"id\":\"a\",\"description\":\"x\",\"value\":\"1.00\",\"date\":\"2022-01-01\",\"category\":null}\n\
                    {\"id\":\"b\",\"description\":\"y\",\"value\":\"1.00\",\"date\":\"01/01/2022\",\"category\":null}\n";
        match read_dataset_from(text.as_bytes(), Format::Jsonl).unwrap_err() {
            Error::Schema { row, field, .. } => {
                assert_eq!(row, 2);
                assert_eq!(field, "date");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn jsonl_duplicate_id_rejected() {
        let line = "{\"id\":\"a\",\"description\":\"x\",\"value\":\"1.00\",\"date\":\"2022-01-01\",\"category\":null}\n";
        let text = format!("{line}{line}");
        assert!(matches!(
            read_dataset_from(text.as_bytes(), Format::Jsonl),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn jsonl_blank_description_rejected() {
        let text = "{\"id\":\"a\",\"description\":\"   \",\"value\":\"1.00\",\"date\":\"2022-01-01\"}\n";
        assert!(matches!(
            read_dataset_from(text.as_bytes(), Format::Jsonl),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn jsonl_serialization_shape() {
        let tx = Transaction::new(
            "t1",
            "030522 cb****1234",
            Amount(-2955),
            NaiveDate::from_ymd_opt(2022, 5, 3).unwrap(),
            None,
        );
        let d = Dataset::from_records(vec![tx]).unwrap();
        let mut buf = Vec::new();
        write_jsonl_to(&mut buf, &d).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"id\":\"t1\",\"description\":\"030522 cb****1234\",\"value\":\"-29.55\",\"date\":\"2022-05-03\",\"category\":null}\n"
        );
    }
}
