//! Word-list TSV: header `lang<TAB>concept<TAB>form`, one entry per row.

use crate::model::{ModelError, WordListTable};

use super::{lines, nfc, parse_language, ParseError};

pub fn parse_wordlist(input: &str) -> Result<WordListTable, ParseError> {
    let mut rows = lines(input);
    match rows.next() {
        Some((_, "lang\tconcept\tform")) => {}
        Some((line, other)) => {
            return Err(ParseError::MalformedHeader {
                line,
                detail: format!("expected \"lang\\tconcept\\tform\", found {other:?}"),
            })
        }
        None => {
            return Err(ParseError::MalformedHeader {
                line: 1,
                detail: "missing header".into(),
            })
        }
    }

    let mut table = WordListTable::new();
    for (line, row) in rows {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 3 {
            return Err(ParseError::MalformedRow {
                line,
                expected: "3".into(),
                found: fields.len(),
            });
        }
        let lang = parse_language(line, fields[0])?;
        let concept = nfc(fields[1]);
        if concept.is_empty() {
            return Err(ParseError::EmptyField {
                line,
                field: "concept",
            });
        }
        let form = nfc(fields[2]);
        if form.trim().is_empty() {
            return Err(ParseError::EmptyForm { line });
        }
        table.insert(lang, concept, form).map_err(|e| match e {
            ModelError::DuplicateEntry { lang, concept } => {
                ParseError::DuplicateEntry { line, lang, concept }
            }
            ModelError::EmptyForm { .. } => ParseError::EmptyForm { line },
            other => ParseError::Invalid { line, source: other },
        })?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LanguageId;

    fn lang(s: &str) -> LanguageId {
        LanguageId::new(s).unwrap()
    }

    #[test]
    fn parses_two_rows() {
        let t = parse_wordlist("lang\tconcept\tform\ndeu\thand\thant\neng\thand\th8nd\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.concepts(), &["hand".to_string()]);
        assert_eq!(t.form(&lang("deu"), "hand"), Some("hant"));
        assert_eq!(t.form(&lang("eng"), "hand"), Some("h8nd"));
    }

    #[test]
    fn header_only_is_empty_table() {
        let t = parse_wordlist("lang\tconcept\tform\n").unwrap();
        assert!(t.is_empty());
        assert!(t.concepts().is_empty());
    }

    #[test]
    fn two_field_row_is_malformed() {
        let err = parse_wordlist("lang\tconcept\tform\ndeu\thand\n").unwrap_err();
        assert!(matches!(err, ParseError::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn duplicate_entry_reports_pair() {
        let err =
            parse_wordlist("lang\tconcept\tform\ndeu\thand\thant\ndeu\thand\tx\n").unwrap_err();
        match err {
            ParseError::DuplicateEntry { line, lang: l, concept } => {
                assert_eq!(line, 3);
                assert_eq!(l, lang("deu"));
                assert_eq!(concept, "hand");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn whitespace_only_form_is_empty() {
        let err = parse_wordlist("lang\tconcept\tform\ndeu\thand\t  \n").unwrap_err();
        assert!(matches!(err, ParseError::EmptyForm { line: 2 }));
    }

    #[test]
    fn crlf_accepted() {
        let t = parse_wordlist("lang\tconcept\tform\r\ndeu\thand\thant\r\n").unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn forms_are_nfc_normalized() {
        // "e" + combining acute (NFD) must compare equal to the precomposed form.
        let t = parse_wordlist("lang\tconcept\tform\ndeu\thand\te\u{0301}\n").unwrap();
        assert_eq!(t.form(&lang("deu"), "hand"), Some("\u{00e9}"));
    }
}
