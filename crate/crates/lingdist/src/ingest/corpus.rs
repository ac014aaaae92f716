//! Verse-aligned parallel corpus: TSV rows `verse_id<TAB>lang<TAB>text`.
//! Alignment may be partial; a verse need not cover every language.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::LanguageId;

use super::{lines, nfc, parse_language, ParseError};

/// A corpus of texts keyed by (verse id, language), NFC-normalized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerseAlignedCorpus {
    verses: BTreeMap<String, BTreeMap<LanguageId, String>>,
    languages: BTreeSet<LanguageId>,
}

impl VerseAlignedCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert one (verse, language) text. Returns false if that cell was
    /// already filled.
    pub fn insert(
        &mut self,
        verse_id: impl Into<String>,
        lang: LanguageId,
        text: impl Into<String>,
    ) -> bool {
        let entry = self.verses.entry(verse_id.into()).or_default();
        if entry.contains_key(&lang) {
            return false;
        }
        self.languages.insert(lang.clone());
        entry.insert(lang, text.into());
        true
    }

    pub fn languages(&self) -> &BTreeSet<LanguageId> {
        &self.languages
    }

    pub fn n_verses(&self) -> usize {
        self.verses.len()
    }

    pub fn text(&self, verse_id: &str, lang: &LanguageId) -> Option<&str> {
        self.verses
            .get(verse_id)
            .and_then(|m| m.get(lang))
            .map(String::as_str)
    }

    /// Verse ids covered by both languages, in sorted order.
    pub fn shared_verses<'a>(
        &'a self,
        a: &'a LanguageId,
        b: &'a LanguageId,
    ) -> impl Iterator<Item = &'a str> {
        self.verses
            .iter()
            .filter(move |(_, texts)| texts.contains_key(a) && texts.contains_key(b))
            .map(|(id, _)| id.as_str())
    }

    /// All verses in sorted verse-id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeMap<LanguageId, String>)> {
        self.verses.iter().map(|(id, texts)| (id.as_str(), texts))
    }
}

pub fn parse_parallel_corpus(input: &str) -> Result<VerseAlignedCorpus, ParseError> {
    let mut corpus = VerseAlignedCorpus::new();
    for (line, row) in lines(input) {
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 3 {
            return Err(ParseError::MalformedRow {
                line,
                expected: "3".into(),
                found: fields.len(),
            });
        }
        let verse_id = nfc(fields[0]);
        if verse_id.is_empty() {
            return Err(ParseError::EmptyField {
                line,
                field: "verse_id",
            });
        }
        let lang = parse_language(line, fields[1])?;
        let text = nfc(fields[2]);
        if !corpus.insert(verse_id.clone(), lang.clone(), text) {
            return Err(ParseError::DuplicateVerseText {
                line,
                verse: verse_id,
                lang,
            });
        }
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang(s: &str) -> LanguageId {
        LanguageId::new(s).unwrap()
    }

    #[test]
    fn parses_partial_alignment() {
        let corpus = parse_parallel_corpus("v1\taaa\thello x\nv1\tbbb\tsalut x\nv2\taaa\tbye\n")
            .unwrap();
        assert_eq!(corpus.languages().len(), 2);
        assert_eq!(corpus.n_verses(), 2);
        assert_eq!(corpus.text("v1", &lang("bbb")), Some("salut x"));
        // v2 present only in aaa: accepted, simply not shared.
        let shared: Vec<&str> = corpus.shared_verses(&lang("aaa"), &lang("bbb")).collect();
        assert_eq!(shared, vec!["v1"]);
    }

    #[test]
    fn duplicate_cell_rejected() {
        let err = parse_parallel_corpus("v1\taaa\tx\nv1\taaa\ty\n").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateVerseText { line: 2, .. }));
    }

    #[test]
    fn texts_are_nfc_normalized() {
        let corpus = parse_parallel_corpus("v1\taaa\te\u{0301}te\u{0301}\n").unwrap();
        assert_eq!(corpus.text("v1", &lang("aaa")), Some("\u{00e9}t\u{00e9}"));
    }
}
