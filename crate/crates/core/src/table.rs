//! CSV feature tables and score files.
//!
//! Feature tables have the header `id,label,f0..f69[,s0..]`, one row per
//! instance in input order. Labels are `1`, `0`, or empty for unknown; values
//! carry 9 significant digits. Score files are `id,score`.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::descriptors::{descriptor, FeatureVariant, GranularityConfig, DESCRIPTOR_DIM};
use crate::estimator::FeatureMatrix;
use crate::trajectory::{normalize_length, Label, Trajectory, MAX_TOKENS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub labels: Vec<Label>,
    pub columns: Vec<String>,
    pub values: FeatureMatrix,
}

fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

fn parse_label(field: &str, line: usize) -> Result<Label> {
    match field.trim() {
        "1" => Ok(Label::Correct),
        "0" => Ok(Label::Incorrect),
        "" => Ok(Label::Unknown),
        other => Err(Error::Table(format!("line {line}: label {other:?} is not 0, 1 or empty"))),
    }
}

fn label_field(label: Label) -> &'static str {
    match label {
        Label::Correct => "1",
        Label::Incorrect => "0",
        Label::Unknown => "",
    }
}

impl FeatureTable {
    /// Extracts descriptors for every record, optionally appending the
    /// semantic embedding. Records are processed in parallel; row order
    /// always matches input order.
    pub fn from_trajectories(
        records: &[Trajectory],
        granularity: &GranularityConfig,
        with_semantic: bool,
    ) -> Result<Self> {
        granularity.validate()?;
        let semantic_dim = if with_semantic {
            let dim = records
                .first()
                .map(|r| r.semantic.as_ref().map_or(0, Vec::len))
                .unwrap_or(0);
            if records.iter().any(|r| r.semantic.as_ref().map_or(0, Vec::len) != dim) || (dim == 0 && !records.is_empty()) {
                return Err(Error::InvalidArgument(
                    "semantic columns requested but records lack a consistent semantic embedding (STRJ flags bit1)".into(),
                ));
            }
            dim
        } else {
            0
        };

        let rows: Vec<Vec<f64>> = records
            .par_iter()
            .map(|record| -> Result<Vec<f64>> {
                let record = normalize_length(record.clone(), MAX_TOKENS)?;
                let mut row = descriptor(record.matrix(), granularity)
                    .map_err(|e| Error::InvalidArgument(format!("record {:?}: {e}", record.id)))?
                    .to_vec();
                if with_semantic {
                    row.extend(record.semantic.iter().flatten().map(|&v| v as f64));
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;

        let mut columns: Vec<String> = (0..DESCRIPTOR_DIM).map(|i| format!("f{i}")).collect();
        columns.extend((0..semantic_dim).map(|i| format!("s{i}")));
        let cols = columns.len();
        Ok(FeatureTable {
            ids: records.iter().map(|r| r.id.clone()).collect(),
            labels: records.iter().map(|r| r.label).collect(),
            columns,
            values: FeatureMatrix::new(rows.concat(), records.len(), cols)?,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(sink);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.columns.iter().cloned());
        out.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for (i, row) in self.values.iter_rows().enumerate() {
            record.clear();
            record.push(self.ids[i].clone());
            record.push(label_field(self.labels[i]).to_string());
            record.extend(row.iter().map(|&v| format_value(v)));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
        let header = reader.headers()?.clone();
        if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
            return Err(Error::Table("header must start with id,label".into()));
        }
        let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();

        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            if record.len() != header.len() {
                return Err(Error::Table(format!(
                    "line {line}: {} fields, header has {}",
                    record.len(),
                    header.len()
                )));
            }
            ids.push(record[0].to_string());
            labels.push(parse_label(&record[1], line)?);
            for (field, name) in record.iter().skip(2).zip(&columns) {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Table(format!("line {line}: column {name}: {field:?} is not a number")))?;
                if !v.is_finite() {
                    return Err(Error::Table(format!("line {line}: column {name} is not finite")));
                }
                data.push(v);
            }
        }
        let rows = ids.len();
        Ok(FeatureTable {
            ids,
            labels,
            values: FeatureMatrix::new(data, rows, columns.len())?,
            columns,
        })
    }

    /// Column indices a variant trains on, resolved by column name.
    pub fn variant_columns(&self, variant: FeatureVariant) -> Result<Vec<usize>> {
        let position: HashMap<&str, usize> =
            self.columns.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let mut out = Vec::new();
        for f in variant.descriptor_range() {
            let name = format!("f{f}");
            let &i = position.get(name.as_str()).ok_or_else(|| {
                Error::Table(format!("variant {variant} needs column {name}, which is absent"))
            })?;
            out.push(i);
        }
        if variant.needs_semantic() {
            let before = out.len();
            out.extend(
                self.columns
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.starts_with('s') && c[1..].parse::<usize>().is_ok())
                    .map(|(i, _)| i),
            );
            if out.len() == before {
                return Err(Error::Table(format!(
                    "variant {variant} needs semantic columns s0.., which are absent (STRJ flags bit1)"
                )));
            }
        }
        Ok(out)
    }

    /// Labels as booleans, failing on the first unknown one.
    pub fn binary_labels(&self) -> Result<Vec<bool>> {
        self.labels
            .iter()
            .zip(&self.ids)
            .map(|(l, id)| {
                l.as_bool()
                    .ok_or_else(|| Error::InvalidArgument(format!("instance {id:?} is unlabeled")))
            })
            .collect()
    }
}

pub fn write_scores<W: Write>(ids: &[String], scores: &[f64], sink: W) -> Result<()> {
    if ids.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: ids.len(),
            actual: scores.len(),
        });
    }
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(["id", "score"])?;
    for (id, score) in ids.iter().zip(scores) {
        out.write_record([id.as_str(), &score.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_scores<R: Read>(source: R) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::Reader::from_reader(source);
    let header = reader.headers()?;
    if header.len() != 2 || &header[0] != "id" || &header[1] != "score" {
        return Err(Error::Table("score file header must be id,score".into()));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let score: f64 = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::Table(format!("line {}: score {:?} is not a number", i + 2, &record[1])))?;
        out.push((record[0].to_string(), score));
    }
    Ok(out)
}

/// Pairs each score with its label by id. Every scored id must have a known
/// label and every labeled id must have a score.
pub fn join_scores(scores: &[(String, f64)], labels: &[(String, Label)]) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut by_id: HashMap<&str, f64> = HashMap::with_capacity(scores.len());
    for (id, s) in scores {
        if by_id.insert(id.as_str(), *s).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate score id {id:?}")));
        }
    }
    let missing: Vec<&str> = labels
        .iter()
        .map(|(id, _)| id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidArgument(format!("ids missing from scores: {}", missing.join(", "))));
    }
    if scores.len() != labels.len() {
        let known: std::collections::HashSet<&str> = labels.iter().map(|(id, _)| id.as_str()).collect();
        let extra: Vec<&str> = scores
            .iter()
            .map(|(id, _)| id.as_str())
            .filter(|id| !known.contains(id))
            .collect();
        return Err(Error::InvalidArgument(format!("scored ids without labels: {}", extra.join(", "))));
    }
    let mut joined_scores = Vec::with_capacity(labels.len());
    let mut joined_labels = Vec::with_capacity(labels.len());
    for (id, label) in labels {
        let y = label
            .as_bool()
            .ok_or_else(|| Error::InvalidArgument(format!("instance {id:?} is unlabeled")))?;
        joined_scores.push(by_id[id.as_str()]);
        joined_labels.push(y);
    }
    Ok((joined_scores, joined_labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> FeatureTable {
        FeatureTable {
            ids: vec!["a".into(), "b,c".into()],
            labels: vec![Label::Correct, Label::Unknown],
            columns: vec!["f0".into(), "s0".into()],
            values: FeatureMatrix::new(vec![0.1, -2.5e-7, 1.0, 123456.789], 2, 2).unwrap(),
        }
    }

    #[test]
    fn nine_significant_digits() {
        let mut buf = Vec::new();
        table().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "id,label,f0,s0\na,1,1.00000000e-1,-2.50000000e-7\n\"b,c\",,1.00000000e0,1.23456789e5\n"
        );
        let back = FeatureTable::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.ids, table().ids);
        assert_eq!(back.labels, table().labels);
        assert_eq!(back.values.get(1, 1), 123456.789);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(FeatureTable::read_csv("x,label\n".as_bytes()).is_err());
        assert!(FeatureTable::read_csv("id,label,f0\na,2,1\n".as_bytes()).is_err());
        assert!(FeatureTable::read_csv("id,label,f0\na,1,abc\n".as_bytes()).is_err());
        assert!(FeatureTable::read_csv("id,label,f0\na,1,NaN\n".as_bytes()).is_err());
    }

    #[test]
    fn variant_needs_its_columns() {
        let t = table();
        assert!(t.variant_columns(FeatureVariant::StructOnly).is_err());
        assert!(t.variant_columns(FeatureVariant::SemanticOnly).is_ok());
    }

    #[test]
    fn join_reports_missing_ids() {
        let scores = vec![("a".to_string(), 0.9)];
        let labels = vec![("a".to_string(), Label::Correct), ("zz".to_string(), Label::Incorrect)];
        let err = join_scores(&scores, &labels).unwrap_err();
        assert!(err.to_string().contains("zz"));
        let labels = vec![("a".to_string(), Label::Unknown)];
        assert!(join_scores(&scores, &labels).unwrap_err().to_string().contains("unlabeled"));
    }

    #[test]
    fn scores_round_trip() {
        let ids = vec!["x".to_string(), "y".to_string()];
        let scores = vec![0.1 + 0.2, 1e-300];
        let mut buf = Vec::new();
        write_scores(&ids, &scores, &mut buf).unwrap();
        let back = read_scores(&buf[..]).unwrap();
        assert_eq!(back, vec![("x".to_string(), 0.1 + 0.2), ("y".to_string(), 1e-300)]);
    }
}
