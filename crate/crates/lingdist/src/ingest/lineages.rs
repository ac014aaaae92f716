//! Lineage TSV: rows `lang<TAB>Node1>Node2>...>NodeK`, nodes from the
//! top-level family down to the language leaf.

use std::collections::BTreeMap;

use crate::model::{LanguageId, LanguageProfile, LineagePath, ModelError};

use super::{lines, nfc, parse_language, ParseError};

pub fn parse_lineages(input: &str) -> Result<BTreeMap<LanguageId, LanguageProfile>, ParseError> {
    let mut profiles = BTreeMap::new();
    for (line, row) in lines(input) {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 2 {
            return Err(ParseError::MalformedRow {
                line,
                expected: "2".into(),
                found: fields.len(),
            });
        }
        let lang = parse_language(line, fields[0])?;
        let nodes: Vec<String> = if fields[1].is_empty() {
            Vec::new()
        } else {
            fields[1].split('>').map(|n| nfc(n.trim())).collect()
        };
        if nodes.iter().any(String::is_empty) {
            return Err(ParseError::EmptyPath { line, lang });
        }
        let path = LineagePath::new(nodes).map_err(|e| match e {
            ModelError::EmptyLineage | ModelError::EmptyLineageNode => {
                ParseError::EmptyPath { line, lang: lang.clone() }
            }
            other => ParseError::InvalidPath {
                line,
                lang: lang.clone(),
                source: other,
            },
        })?;
        if profiles.contains_key(&lang) {
            return Err(ParseError::DuplicateLanguage { line, lang });
        }
        profiles.insert(lang.clone(), LanguageProfile::new(lang, path));
    }
    Ok(profiles)
}
