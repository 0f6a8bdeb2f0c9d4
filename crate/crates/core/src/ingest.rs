//! Grouped income-share datasets: CSV parsing and the built-in reference rows.
//!
//! Input format (UTF-8, LF or CRLF, no quoting):
//!
//! ```text
//! label,year,group_index,population_weight,income_share
//! U.S.A.,2019,1,0.2,3.1
//! ```

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read};
use std::path::Path;

use thiserror::Error;

use crate::model::{Group, GroupedDistribution, ModelError};

pub const CSV_HEADER: &str = "label,year,group_index,population_weight,income_share";

/// Weight-sum tolerance for text input; decimal rounding in files is looser
/// than the in-memory invariant.
pub const FILE_WEIGHT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("malformed header: expected `{CSV_HEADER}`, found `{0}`")]
    MalformedHeader(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: duplicate group {group_index} for {label} {year}")]
    DuplicateGroup {
        line: usize,
        label: String,
        year: i32,
        group_index: usize,
    },
    #[error("{label} {year}: group indices must form 1..{count}")]
    GroupIndexGap {
        label: String,
        year: i32,
        count: usize,
    },
    #[error("{label} {year} (line {line}): {source}")]
    ValidationFailed {
        label: String,
        year: i32,
        line: usize,
        #[source]
        source: ModelError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub line: usize,
    pub label: String,
    pub year: i32,
    pub group_index: usize,
    pub population_weight: f64,
    pub income_share: f64,
}

/// Parses all rows, grouped by `(label, year)` in first-appearance order.
/// Any failure rejects the whole input.
pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<GroupedDistribution>, IngestError> {
    let (dists, errors) = parse_csv_partial(reader)?;
    match errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(dists),
    }
}

pub fn parse_csv_path(path: impl AsRef<Path>) -> Result<Vec<GroupedDistribution>, IngestError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(file)
}

/// Structural errors (header, malformed rows, duplicates) reject the input;
/// per-`(label, year)` validation failures are returned alongside the
/// distributions that did validate.
pub fn parse_csv_partial<R: Read>(
    mut reader: R,
) -> Result<(Vec<GroupedDistribution>, Vec<IngestError>), IngestError> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|source| IngestError::Io {
            path: "<input>".into(),
            source,
        })?;
    let text = String::from_utf8(bytes).map_err(|_| IngestError::NotUtf8)?;
    let records = parse_records(&text)?;

    let mut order: Vec<(String, i32)> = Vec::new();
    let mut grouped: HashMap<(String, i32), Vec<DatasetRecord>> = HashMap::new();
    for rec in records {
        let key = (rec.label.clone(), rec.year);
        let bucket = grouped.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        if bucket.iter().any(|r| r.group_index == rec.group_index) {
            return Err(IngestError::DuplicateGroup {
                line: rec.line,
                label: rec.label,
                year: rec.year,
                group_index: rec.group_index,
            });
        }
        bucket.push(rec);
    }

    let mut dists = Vec::new();
    let mut errors = Vec::new();
    for key in order {
        let mut rows = grouped.remove(&key).unwrap_or_default();
        let (label, year) = key;
        rows.sort_by_key(|r| r.group_index);
        if rows.iter().enumerate().any(|(i, r)| r.group_index != i + 1) {
            errors.push(IngestError::GroupIndexGap {
                label,
                year,
                count: rows.len(),
            });
            continue;
        }
        let line = rows.iter().map(|r| r.line).min().unwrap_or(0);
        let groups = rows
            .iter()
            .map(|r| Group::new(r.population_weight, r.income_share))
            .collect();
        match GroupedDistribution::with_weight_tolerance(
            label.clone(),
            year,
            groups,
            FILE_WEIGHT_TOLERANCE,
        ) {
            Ok(d) => dists.push(d),
            Err(source) => errors.push(IngestError::ValidationFailed {
                label,
                year,
                line,
                source,
            }),
        }
    }
    Ok((dists, errors))
}

fn parse_records(text: &str) -> Result<Vec<DatasetRecord>, IngestError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l.trim(),
            None => return Err(IngestError::MalformedHeader(String::new())),
        }
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.join(",") != CSV_HEADER {
        return Err(IngestError::MalformedHeader(header.to_string()));
    }

    let mut records = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        let bad = |reason: String| IngestError::MalformedRow { line, reason };
        if fields.len() != 5 {
            return Err(bad(format!(
                "expected 5 fields, found {} (labels may not contain commas)",
                fields.len()
            )));
        }
        if fields[0].is_empty() {
            return Err(bad("empty label".into()));
        }
        let year = fields[1]
            .parse::<i32>()
            .map_err(|_| bad(format!("invalid year `{}`", fields[1])))?;
        let group_index = fields[2]
            .parse::<usize>()
            .ok()
            .filter(|&g| g >= 1)
            .ok_or_else(|| bad(format!("invalid group_index `{}`", fields[2])))?;
        let number = |s: &str, name: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("invalid {name} `{s}`")))
        };
        let population_weight = number(fields[3], "population_weight")?;
        let income_share = number(fields[4], "income_share")?;
        records.push(DatasetRecord {
            line,
            label: fields[0].to_string(),
            year,
            group_index,
            population_weight,
            income_share,
        });
    }
    Ok(records)
}

/// A built-in reference row and the short name used to select it.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinDataset {
    pub name: &'static str,
    pub label: &'static str,
    pub year: i32,
    pub quintile_shares: [f64; 5],
}

/// Household income quintile shares (percent) for four countries.
pub const BUILTINS: [BuiltinDataset; 4] = [
    BuiltinDataset {
        name: "usa",
        label: "U.S.A.",
        year: 2019,
        quintile_shares: [3.1, 8.3, 14.1, 22.7, 51.9],
    },
    BuiltinDataset {
        name: "china",
        label: "China",
        year: 2016,
        quintile_shares: [6.5, 10.7, 15.3, 22.2, 45.3],
    },
    BuiltinDataset {
        name: "finland",
        label: "Finland",
        year: 2017,
        quintile_shares: [9.4, 14.0, 17.4, 22.3, 36.9],
    },
    BuiltinDataset {
        name: "south-africa",
        label: "South Africa",
        year: 2014,
        quintile_shares: [2.4, 4.8, 8.2, 16.5, 68.2],
    },
];

impl BuiltinDataset {
    pub fn distribution(&self) -> GroupedDistribution {
        let groups = self
            .quintile_shares
            .iter()
            .map(|&s| Group::new(0.2, s))
            .collect();
        GroupedDistribution::new(self.label, self.year, groups).expect("built-in rows are valid")
    }
}

pub fn builtin_datasets() -> Vec<GroupedDistribution> {
    BUILTINS.iter().map(BuiltinDataset::distribution).collect()
}

/// Case-insensitive lookup by short name or label; spaces, underscores and
/// dots are ignored ("South Africa", "south_africa", "U.S.A." all match).
pub fn builtin(name: &str) -> Option<GroupedDistribution> {
    let key = normalize(name);
    BUILTINS
        .iter()
        .find(|b| normalize(b.name) == key || normalize(b.label) == key)
        .map(BuiltinDataset::distribution)
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-' | '.'))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Writes distributions in the input CSV format at full precision.
pub fn emit_csv(dists: &[GroupedDistribution]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for d in dists {
        for (i, g) in d.groups().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                d.label(),
                d.year(),
                i + 1,
                g.population_weight,
                g.income_share
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const USA_CSV: &str = "label,year,group_index,population_weight,income_share\n\
        USA,2019,1,0.2,3.1\nUSA,2019,2,0.2,8.3\nUSA,2019,3,0.2,14.1\n\
        USA,2019,4,0.2,22.7\nUSA,2019,5,0.2,51.9\n";

    #[test]
    fn parses_usa_file() {
        let d = parse_csv(USA_CSV.as_bytes()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].label(), "USA");
        assert_eq!(d[0].year(), 2019);
        assert!((d[0].total_income() - 100.1).abs() < 1e-9);
    }

    #[test]
    fn crlf_and_bom() {
        let text = format!("\u{feff}{}", USA_CSV.replace('\n', "\r\n"));
        let d = parse_csv(text.as_bytes()).unwrap();
        assert_eq!(d[0].shares(), vec![3.1, 8.3, 14.1, 22.7, 51.9]);
    }

    #[test]
    fn header_only_is_empty() {
        let d = parse_csv(format!("{CSV_HEADER}\n").as_bytes()).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn duplicate_group() {
        let text = format!("{USA_CSV}USA,2019,3,0.2,14.1\n");
        match parse_csv(text.as_bytes()) {
            Err(IngestError::DuplicateGroup {
                line, group_index, ..
            }) => {
                assert_eq!(line, 7);
                assert_eq!(group_index, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            parse_csv("".as_bytes()),
            Err(IngestError::MalformedHeader(_))
        ));
        let missing_weight = "label,year,group_index,income_share\nA,1,1,3\n";
        assert!(matches!(
            parse_csv(missing_weight.as_bytes()),
            Err(IngestError::MalformedHeader(_))
        ));
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let cases = [
            "A,x,1,0.5,1",
            "A,1,0,0.5,1",
            "A,1,1,abc,1",
            "A,1,1,0.5,NaN",
            "A,B,1,1,0.5,1",
            ",1,1,0.5,1",
        ];
        for row in cases {
            let text = format!("{CSV_HEADER}\nA,1,2,0.5,2\n{row}\n");
            match parse_csv(text.as_bytes()) {
                Err(IngestError::MalformedRow { line, .. }) => assert_eq!(line, 3, "{row}"),
                other => panic!("{row}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn validation_errors_are_wrapped() {
        let text = format!("{CSV_HEADER}\nA,1,1,0.5,10\nA,1,2,0.5,-1\n");
        assert!(matches!(
            parse_csv(text.as_bytes()),
            Err(IngestError::ValidationFailed {
                source: ModelError::NegativeShare { .. },
                ..
            })
        ));
        let text = format!("{CSV_HEADER}\nA,1,1,0.5,10\nA,1,2,0.4,20\n");
        assert!(matches!(
            parse_csv(text.as_bytes()),
            Err(IngestError::ValidationFailed {
                source: ModelError::BadWeights { .. },
                ..
            })
        ));
        let text = format!("{CSV_HEADER}\nA,1,1,0.5,10\nA,1,3,0.5,20\n");
        assert!(matches!(
            parse_csv(text.as_bytes()),
            Err(IngestError::GroupIndexGap { .. })
        ));
    }

    #[test]
    fn loose_weight_tolerance() {
        let text =
            format!("{CSV_HEADER}\nA,1,1,0.3333333,1\nA,1,2,0.3333333,2\nA,1,3,0.3333333,3\n");
        assert_eq!(parse_csv(text.as_bytes()).unwrap().len(), 1);
        let text = format!("{CSV_HEADER}\nA,1,1,0.33333,1\nA,1,2,0.33333,2\nA,1,3,0.33333,3\n");
        assert!(parse_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn partial_keeps_good_years() {
        let text = format!(
            "{CSV_HEADER}\nC,1990,1,0.5,10\nC,1990,2,0.5,20\nC,1991,1,0.5,-3\nC,1991,2,0.5,20\nC,1992,2,0.5,30\nC,1992,1,0.5,5\n"
        );
        let (good, bad) = parse_csv_partial(text.as_bytes()).unwrap();
        assert_eq!(
            good.iter().map(|d| d.year()).collect::<Vec<_>>(),
            vec![1990, 1992]
        );
        assert_eq!(bad.len(), 1);
    }

    #[test]
    fn builtins() {
        let all = builtin_datasets();
        assert_eq!(all.len(), 4);
        let fin = builtin("Finland").unwrap();
        assert_eq!(fin.shares(), vec![9.4, 14.0, 17.4, 22.3, 36.9]);
        assert_eq!(builtin("south africa").unwrap().year(), 2014);
        assert_eq!(builtin("U.S.A.").unwrap().label(), "U.S.A.");
        assert!(builtin("atlantis").is_none());
        for d in &all {
            assert_eq!(
                GroupedDistribution::new(d.label(), d.year(), d.groups().to_vec()).unwrap(),
                *d
            );
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            parse_csv_path("/nonexistent/missing.csv"),
            Err(IngestError::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn emit_parse_round_trip(
            sets in prop::collection::vec(
                (prop::collection::vec((0.01f64..1.0, 0.0f64..100.0), 2..8), 1900i32..2100),
                1..4,
            )
        ) {
            let dists: Vec<GroupedDistribution> = sets
                .into_iter()
                .enumerate()
                .map(|(i, (groups, year))| {
                    let total: f64 = groups.iter().map(|g| g.0).sum();
                    let groups = groups.iter().map(|&(w, s)| Group::new(w / total, s)).collect();
                    GroupedDistribution::with_weight_tolerance(format!("L{i}"), year, groups, 1e-6).unwrap()
                })
                .collect();
            let text = emit_csv(&dists);
            let back = parse_csv(text.as_bytes()).unwrap();
            prop_assert_eq!(back, dists);
        }
    }
}
