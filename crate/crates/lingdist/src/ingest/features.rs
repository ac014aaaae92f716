//! Feature-table CSV: header `lang,F1,...,Fn`; cell grammar: empty string =
//! Missing, `?` = Unknown, a single decimal digit 0-9 = Coded.

use crate::model::{CellValue, FeatureTable, ModelError};

use super::{lines, nfc, parse_language, ParseError};

pub fn parse_feature_table(input: &str) -> Result<FeatureTable, ParseError> {
    let mut rows = lines(input);
    let (header_line, header) = rows.next().ok_or(ParseError::MalformedHeader {
        line: 1,
        detail: "missing header".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols[0] != "lang" {
        return Err(ParseError::MalformedHeader {
            line: header_line,
            detail: format!("first header cell must be \"lang\", found {:?}", cols[0]),
        });
    }
    let features: Vec<String> = cols[1..].iter().map(|f| nfc(f)).collect();
    let mut table = FeatureTable::new(features.clone()).map_err(|e| match e {
        ModelError::DuplicateFeature(f) => ParseError::MalformedHeader {
            line: header_line,
            detail: format!("duplicate feature {f:?}"),
        },
        ModelError::EmptyConcept => ParseError::MalformedHeader {
            line: header_line,
            detail: "empty feature name".into(),
        },
        other => ParseError::Invalid {
            line: header_line,
            source: other,
        },
    })?;

    for (line, row) in rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != features.len() + 1 {
            return Err(ParseError::MalformedRow {
                line,
                expected: format!("{}", features.len() + 1),
                found: fields.len(),
            });
        }
        let lang = parse_language(line, fields[0])?;
        let mut cells = Vec::with_capacity(features.len());
        for (feature, raw) in features.iter().zip(&fields[1..]) {
            cells.push(parse_cell(raw).ok_or_else(|| ParseError::BadCell {
                lang: lang.clone(),
                feature: feature.clone(),
                raw: (*raw).to_string(),
            })?);
        }
        table.insert_row(lang, cells).map_err(|e| match e {
            ModelError::DuplicateLanguageRow(lang) => {
                ParseError::DuplicateLanguageRow { line, lang }
            }
            other => ParseError::Invalid { line, source: other },
        })?;
    }
    Ok(table)
}

fn parse_cell(raw: &str) -> Option<CellValue> {
    match raw {
        "" => Some(CellValue::Missing),
        "?" => Some(CellValue::Unknown),
        _ => {
            let mut chars = raw.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_digit() => {
                    Some(CellValue::Coded(c as u8 - b'0'))
                }
                _ => None,
            }
        }
    }
}
