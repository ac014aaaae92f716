//! Parsers and writers for all external file formats.
//!
//! Every format is line-oriented UTF-8; `\n` and `\r\n` line endings are
//! both accepted on input, output always uses `\n`. Text content is
//! NFC-normalized at this boundary so that downstream string metrics never
//! depend on the normalization form of the source files. Blank lines are
//! ignored. Parsers are total: every input yields either a value or a
//! structured error with a line number.

mod corpus;
mod features;
mod lineages;
mod matrix;
mod vectors;
mod wordlist;

pub use corpus::{parse_parallel_corpus, VerseAlignedCorpus};
pub use features::parse_feature_table;
pub use lineages::parse_lineages;
pub use matrix::{read_distance_matrix, write_distance_matrix};
pub use vectors::{parse_concept_vectors, write_concept_vectors};
pub use wordlist::parse_wordlist;

use thiserror::Error;

use crate::model::{LanguageId, ModelError};

#[derive(Error, Debug)]
pub enum ParseError {
    #[error("line {line}: expected {expected} tab- or comma-separated fields, found {found}")]
    MalformedRow {
        line: usize,
        expected: String,
        found: usize,
    },
    #[error("line {line}: malformed header: {detail}")]
    MalformedHeader { line: usize, detail: String },
    #[error("line {line}: empty {field} field")]
    EmptyField { line: usize, field: &'static str },
    #[error("line {line}: invalid language id {code:?}")]
    InvalidLanguage { line: usize, code: String },
    #[error("line {line}: duplicate entry for ({lang}, {concept})")]
    DuplicateEntry {
        line: usize,
        lang: LanguageId,
        concept: String,
    },
    #[error("line {line}: empty form")]
    EmptyForm { line: usize },
    #[error("bad cell for ({lang}, {feature}): {raw:?} is not empty, \"?\", or a digit 0-9")]
    BadCell {
        lang: LanguageId,
        feature: String,
        raw: String,
    },
    #[error("line {line}: duplicate row for language {lang}")]
    DuplicateLanguageRow { line: usize, lang: LanguageId },
    #[error("line {line}: empty lineage path for language {lang}")]
    EmptyPath { line: usize, lang: LanguageId },
    #[error("line {line}: duplicate language {lang}")]
    DuplicateLanguage { line: usize, lang: LanguageId },
    #[error("line {line}: invalid lineage path for {lang}: {source}")]
    InvalidPath {
        line: usize,
        lang: LanguageId,
        source: ModelError,
    },
    #[error("line {line}: dimension index {dim} out of range 1..={dims}")]
    DimOutOfRange { line: usize, dim: String, dims: usize },
    #[error("line {line}: value {raw:?} outside [0, 1]")]
    ValueOutOfRange { line: usize, raw: String },
    #[error("no dimension label block for concept {concept:?}")]
    MissingLabelBlock { concept: String },
    #[error("line {line}: conflicting label for concept {concept:?} dimension {dim}")]
    ConflictingLabel {
        line: usize,
        concept: String,
        dim: usize,
    },
    #[error("label block for concept {concept:?} covers {found} of {expected} dimensions")]
    IncompleteLabelBlock {
        concept: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: duplicate value row for ({lang}, {concept}, dim {dim})")]
    DuplicateValue {
        line: usize,
        lang: LanguageId,
        concept: String,
        dim: usize,
    },
    #[error("line {line}: duplicate text for verse {verse:?} in language {lang}")]
    DuplicateVerseText {
        line: usize,
        verse: String,
        lang: LanguageId,
    },
    #[error("asymmetry between {x} and {y}: |{v_xy} - {v_yx}| = {delta} exceeds 1e-9")]
    AsymmetryDetected {
        x: LanguageId,
        y: LanguageId,
        v_xy: f64,
        v_yx: f64,
        delta: f64,
    },
    #[error("nonzero diagonal for {lang} in a distance matrix: {value}")]
    NonzeroDiagonal { lang: LanguageId, value: f64 },
    #[error("line {line}: bad numeric value {raw:?}")]
    BadValue { line: usize, raw: String },
    #[error("line {line}: row label {found:?} does not match index language {expected}")]
    RowLabelMismatch {
        line: usize,
        expected: LanguageId,
        found: String,
    },
    #[error("expected {expected} data rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: ModelError },
}

/// Numbered non-blank lines with `\r\n` tolerated; line numbers are
/// 1-based over the raw input.
pub(crate) fn lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn nfc(s: &str) -> String {
    use unicode_normalization::UnicodeNormalization;
    s.nfc().collect()
}

pub(crate) fn parse_language(line: usize, raw: &str) -> Result<LanguageId, ParseError> {
    LanguageId::new(nfc(raw)).map_err(|_| ParseError::InvalidLanguage {
        line,
        code: raw.to_string(),
    })
}
