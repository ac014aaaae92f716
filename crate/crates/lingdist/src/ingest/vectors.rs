//! Concept-vector TSV: a label preamble `#label<TAB>concept<TAB>dim<TAB>text`
//! defining the dimension labels shared by all languages, followed by sparse
//! data rows `lang<TAB>concept<TAB>dim<TAB>value`. Unspecified dimensions
//! default to 0.0; an all-zero vector is kept alive by a single explicit
//! zero row. Label and data rows may appear in any order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{ConceptVectorSet, LanguageId, ModelError};

use super::{lines, nfc, parse_language, ParseError};

const LABEL_MARKER: &str = "#label";

struct LabelRow {
    line: usize,
    concept: String,
    dim_raw: String,
    text: String,
}

struct DataRow {
    line: usize,
    lang: LanguageId,
    concept: String,
    dim_raw: String,
    value_raw: String,
}

pub fn parse_concept_vectors(input: &str) -> Result<ConceptVectorSet, ParseError> {
    let mut label_rows: Vec<LabelRow> = Vec::new();
    let mut data_rows: Vec<DataRow> = Vec::new();
    let mut concept_order: Vec<String> = Vec::new();

    for (line, row) in lines(input) {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 4 {
            return Err(ParseError::MalformedRow {
                line,
                expected: "4".into(),
                found: fields.len(),
            });
        }
        let concept = nfc(fields[1]);
        if concept.is_empty() {
            return Err(ParseError::EmptyField {
                line,
                field: "concept",
            });
        }
        if !concept_order.contains(&concept) {
            concept_order.push(concept.clone());
        }
        if fields[0] == LABEL_MARKER {
            let text = nfc(fields[3]);
            if text.is_empty() {
                return Err(ParseError::EmptyField { line, field: "label" });
            }
            label_rows.push(LabelRow {
                line,
                concept,
                dim_raw: fields[2].to_string(),
                text,
            });
        } else {
            data_rows.push(DataRow {
                line,
                lang: parse_language(line, fields[0])?,
                concept,
                dim_raw: fields[2].to_string(),
                value_raw: fields[3].to_string(),
            });
        }
    }

    // The dimensionality is whatever the deepest label block declares; every
    // block must then cover 1..=dims completely.
    let dims = label_rows
        .iter()
        .filter_map(|r| r.dim_raw.parse::<usize>().ok())
        .max()
        .unwrap_or(0);

    let mut labels: BTreeMap<String, BTreeMap<usize, String>> = BTreeMap::new();
    for row in &label_rows {
        let dim = parse_dim(row.line, &row.dim_raw, dims)?;
        let block = labels.entry(row.concept.clone()).or_default();
        if let Some(existing) = block.get(&dim) {
            if existing != &row.text {
                return Err(ParseError::ConflictingLabel {
                    line: row.line,
                    concept: row.concept.clone(),
                    dim,
                });
            }
        } else {
            block.insert(dim, row.text.clone());
        }
    }
    for (concept, block) in &labels {
        if block.len() != dims {
            return Err(ParseError::IncompleteLabelBlock {
                concept: concept.clone(),
                expected: dims,
                found: block.len(),
            });
        }
    }

    let mut values: BTreeMap<(LanguageId, String), BTreeMap<usize, f64>> = BTreeMap::new();
    for row in &data_rows {
        if !labels.contains_key(&row.concept) {
            return Err(ParseError::MissingLabelBlock {
                concept: row.concept.clone(),
            });
        }
        let dim = parse_dim(row.line, &row.dim_raw, dims)?;
        let value: f64 = row.value_raw.parse().map_err(|_| ParseError::BadValue {
            line: row.line,
            raw: row.value_raw.clone(),
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(ParseError::ValueOutOfRange {
                line: row.line,
                raw: row.value_raw.clone(),
            });
        }
        let cell = values
            .entry((row.lang.clone(), row.concept.clone()))
            .or_default();
        if cell.insert(dim, value).is_some() {
            return Err(ParseError::DuplicateValue {
                line: row.line,
                lang: row.lang.clone(),
                concept: row.concept.clone(),
                dim,
            });
        }
    }

    let concept_set: Vec<String> = concept_order
        .into_iter()
        .filter(|c| labels.contains_key(c))
        .collect();
    let mut set = ConceptVectorSet::new(concept_set, dims)
        .map_err(|e| ParseError::Invalid { line: 1, source: e })?;
    for (concept, block) in labels {
        let ordered: Vec<String> = block.into_values().collect();
        set.set_labels(concept, ordered)
            .map_err(|e| ParseError::Invalid { line: 1, source: e })?;
    }
    for ((lang, concept), sparse) in values {
        let mut vector = vec![0.0; dims];
        for (dim, value) in sparse {
            vector[dim - 1] = value;
        }
        set.insert_vector(lang, concept, vector)
            .map_err(|e| ParseError::Invalid { line: 1, source: e })?;
    }
    Ok(set)
}

fn parse_dim(line: usize, raw: &str, dims: usize) -> Result<usize, ParseError> {
    match raw.parse::<usize>() {
        Ok(d) if d >= 1 && d <= dims => Ok(d),
        _ => Err(ParseError::DimOutOfRange {
            line,
            dim: raw.to_string(),
            dims,
        }),
    }
}

/// Serialize in the `parse_concept_vectors` grammar: full label preamble in
/// concept-set order, then sparse nonzero values in (language, concept) key
/// order. Values use the shortest decimal that round-trips exactly.
pub fn write_concept_vectors(set: &ConceptVectorSet) -> Result<String, ModelError> {
    let mut out = String::new();
    for concept in set.concept_set() {
        let labels = set
            .labels(concept)
            .ok_or_else(|| ModelError::MissingLabels(concept.clone()))?;
        for (i, label) in labels.iter().enumerate() {
            writeln!(out, "{LABEL_MARKER}\t{concept}\t{}\t{label}", i + 1)
                .expect("string write cannot fail");
        }
    }
    for (lang, concept, vector) in set.iter() {
        let mut wrote_any = false;
        for (i, &v) in vector.iter().enumerate() {
            if v != 0.0 {
                writeln!(out, "{lang}\t{concept}\t{}\t{v}", i + 1)
                    .expect("string write cannot fail");
                wrote_any = true;
            }
        }
        if !wrote_any && !vector.is_empty() {
            // Keep all-zero vectors alive across a round trip.
            writeln!(out, "{lang}\t{concept}\t1\t0").expect("string write cannot fail");
        }
    }
    Ok(out)
}
