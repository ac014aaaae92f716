//! Central data types shared by all other modules: language identity,
//! genealogical lineage, representation containers, and the distance matrix.
//!
//! All types are immutable after construction and safe to share read-only
//! across parallel workers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid language id {0:?}: must be nonempty and contain no whitespace")]
    InvalidLanguageId(String),
    #[error("lineage path must contain at least one node")]
    EmptyLineage,
    #[error("duplicate node {0:?} within one lineage path")]
    DuplicateLineageNode(String),
    #[error("empty node name in lineage path")]
    EmptyLineageNode,
    #[error("duplicate entry for ({lang}, {concept})")]
    DuplicateEntry { lang: LanguageId, concept: String },
    #[error("empty form for ({lang}, {concept})")]
    EmptyForm { lang: LanguageId, concept: String },
    #[error("empty concept name")]
    EmptyConcept,
    #[error("duplicate feature {0:?} in table header")]
    DuplicateFeature(String),
    #[error("duplicate row for language {0}")]
    DuplicateLanguageRow(LanguageId),
    #[error("row for {lang} has {found} cells, table has {expected} features")]
    RowArity {
        lang: LanguageId,
        expected: usize,
        found: usize,
    },
    #[error("unknown concept {0:?} (not in the concept set)")]
    UnknownConcept(String),
    #[error("language {lang} has no vector for concept {concept:?}")]
    MissingConcept { lang: LanguageId, concept: String },
    #[error("vector for ({lang}, {concept}) has {found} dims, expected {expected}")]
    VectorArity {
        lang: LanguageId,
        concept: String,
        expected: usize,
        found: usize,
    },
    #[error("vector entry {value} for ({lang}, {concept}) outside [0, 1]")]
    VectorRange {
        lang: LanguageId,
        concept: String,
        value: f64,
    },
    #[error("label list for concept {concept:?} has {found} labels, expected {expected}")]
    LabelArity {
        concept: String,
        expected: usize,
        found: usize,
    },
    #[error("no dimension labels set for concept {0:?}")]
    MissingLabels(String),
    #[error("duplicate language {0} in matrix index")]
    DuplicateIndexLanguage(LanguageId),
    #[error("matrix value at ({i}, {j}) is {value}, must be a nonnegative number")]
    BadMatrixValue { i: usize, j: usize, value: f64 },
    #[error("expected {expected} off-diagonal values for {n} languages, got {found}")]
    PairCount {
        n: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot serialize: {0}")]
    Unserializable(String),
}

/// ISO-639-3-style language code, treated as an opaque UTF-8 token.
///
/// Total order is lexicographic by Unicode scalar values; it is used for
/// deterministic tie-breaking throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LanguageId(String);

impl LanguageId {
    pub fn new(code: impl Into<String>) -> Result<Self, ModelError> {
        let code = code.into();
        if code.is_empty() || code.chars().any(char::is_whitespace) {
            return Err(ModelError::InvalidLanguageId(code));
        }
        Ok(LanguageId(code))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for LanguageId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Ordered genealogical path from the top-level family down to the
/// language leaf, inclusive. Node names are unique within one path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineagePath {
    nodes: Vec<String>,
}

impl LineagePath {
    pub fn new(nodes: Vec<String>) -> Result<Self, ModelError> {
        if nodes.is_empty() {
            return Err(ModelError::EmptyLineage);
        }
        let mut seen = BTreeSet::new();
        for node in &nodes {
            if node.is_empty() {
                return Err(ModelError::EmptyLineageNode);
            }
            if !seen.insert(node.as_str()) {
                return Err(ModelError::DuplicateLineageNode(node.clone()));
            }
        }
        Ok(LineagePath { nodes })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Top-level family, i.e. the root of the path.
    pub fn family(&self) -> &str {
        &self.nodes[0]
    }

    /// The language leaf, i.e. the last node.
    pub fn leaf(&self) -> &str {
        self.nodes.last().expect("path is nonempty")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A language together with its genealogical lineage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageProfile {
    pub id: LanguageId,
    pub lineage: LineagePath,
}

impl LanguageProfile {
    pub fn new(id: LanguageId, lineage: LineagePath) -> Self {
        LanguageProfile { id, lineage }
    }
}

/// Top-level family of a profile: the first node of its lineage path.
pub fn top_level_family(profile: &LanguageProfile) -> &str {
    profile.lineage.family()
}

/// Sparse (language, concept) -> form table, e.g. an ASJP-style word list.
///
/// Forms are stored with surrounding whitespace stripped; empty forms are
/// rejected. The concept list keeps first-appearance order, which defines
/// the canonical iteration order for all per-concept computations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordListTable {
    concepts: Vec<String>,
    entries: BTreeMap<LanguageId, BTreeMap<String, String>>,
}

impl WordListTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        lang: LanguageId,
        concept: impl Into<String>,
        form: impl Into<String>,
    ) -> Result<(), ModelError> {
        let concept = concept.into();
        if concept.is_empty() {
            return Err(ModelError::EmptyConcept);
        }
        let form = form.into().trim().to_string();
        if form.is_empty() {
            return Err(ModelError::EmptyForm {
                lang,
                concept,
            });
        }
        let row = self.entries.entry(lang.clone()).or_default();
        if row.contains_key(&concept) {
            return Err(ModelError::DuplicateEntry { lang, concept });
        }
        if !self.concepts.iter().any(|c| c == &concept) {
            self.concepts.push(concept.clone());
        }
        row.insert(concept, form);
        Ok(())
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn languages(&self) -> impl Iterator<Item = &LanguageId> {
        self.entries.keys()
    }

    pub fn form(&self, lang: &LanguageId, concept: &str) -> Option<&str> {
        self.entries
            .get(lang)
            .and_then(|row| row.get(concept))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Concepts attested in both languages, in concept-list order.
    pub fn shared_concepts<'a>(
        &'a self,
        x: &'a LanguageId,
        y: &'a LanguageId,
    ) -> impl Iterator<Item = &'a str> {
        self.concepts.iter().map(String::as_str).filter(move |c| {
            self.form(x, c).is_some() && self.form(y, c).is_some()
        })
    }
}

/// State of one feature-table cell.
///
/// `Unknown` is an explicit "?" entry in the source data; `Missing` is the
/// absence of any entry. Downstream comparability excludes both, but
/// coverage analysis counts them separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellValue {
    Coded(u8),
    Unknown,
    Missing,
}

impl CellValue {
    pub fn is_coded(&self) -> bool {
        matches!(self, CellValue::Coded(_))
    }
}

/// Categorical feature table (URIEL- or Grambank-style): one row per
/// language, one column per feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureTable {
    features: Vec<String>,
    feature_index: HashMap<String, usize>,
    rows: BTreeMap<LanguageId, Vec<CellValue>>,
    /// Observed coded symbols per feature, aligned with `features`.
    symbols: Vec<BTreeSet<u8>>,
}

impl FeatureTable {
    pub fn new(features: Vec<String>) -> Result<Self, ModelError> {
        let mut feature_index = HashMap::new();
        for (i, f) in features.iter().enumerate() {
            if f.is_empty() {
                return Err(ModelError::EmptyConcept);
            }
            if feature_index.insert(f.clone(), i).is_some() {
                return Err(ModelError::DuplicateFeature(f.clone()));
            }
        }
        let symbols = vec![BTreeSet::new(); features.len()];
        Ok(FeatureTable {
            features,
            feature_index,
            rows: BTreeMap::new(),
            symbols,
        })
    }

    pub fn insert_row(
        &mut self,
        lang: LanguageId,
        cells: Vec<CellValue>,
    ) -> Result<(), ModelError> {
        if cells.len() != self.features.len() {
            return Err(ModelError::RowArity {
                lang,
                expected: self.features.len(),
                found: cells.len(),
            });
        }
        if self.rows.contains_key(&lang) {
            return Err(ModelError::DuplicateLanguageRow(lang));
        }
        for (i, cell) in cells.iter().enumerate() {
            if let CellValue::Coded(sym) = cell {
                self.symbols[i].insert(*sym);
            }
        }
        self.rows.insert(lang, cells);
        Ok(())
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn languages(&self) -> impl Iterator<Item = &LanguageId> {
        self.rows.keys()
    }

    pub fn n_languages(&self) -> usize {
        self.rows.len()
    }

    /// Cell state for (lang, feature); absent rows or unknown features read
    /// as `Missing`.
    pub fn cell(&self, lang: &LanguageId, feature: &str) -> CellValue {
        match (self.rows.get(lang), self.feature_index.get(feature)) {
            (Some(row), Some(&i)) => row[i],
            _ => CellValue::Missing,
        }
    }

    /// Distinct coded symbols observed for one feature.
    pub fn coded_symbols(&self, feature: &str) -> Option<&BTreeSet<u8>> {
        self.feature_index.get(feature).map(|&i| &self.symbols[i])
    }

    /// Number of distinct coded symbols observed for one feature.
    pub fn feature_arity(&self, feature: &str) -> Option<usize> {
        self.coded_symbols(feature).map(BTreeSet::len)
    }
}

/// Per-language, per-concept real vectors of a fixed dimensionality, plus
/// the dimension labels shared by all languages.
///
/// Vectors are stored per concept and concatenated lazily so that the
/// different concept subsets reuse the same blocks. The label of dimension
/// 1 is the source-language realization of the concept itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptVectorSet {
    concept_set: Vec<String>,
    dims_per_concept: usize,
    dimension_labels: BTreeMap<String, Vec<String>>,
    vectors: BTreeMap<LanguageId, BTreeMap<String, Vec<f64>>>,
}

impl ConceptVectorSet {
    pub fn new(concept_set: Vec<String>, dims_per_concept: usize) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for c in &concept_set {
            if c.is_empty() {
                return Err(ModelError::EmptyConcept);
            }
            if !seen.insert(c.as_str()) {
                return Err(ModelError::DuplicateFeature(c.clone()));
            }
        }
        Ok(ConceptVectorSet {
            concept_set,
            dims_per_concept,
            dimension_labels: BTreeMap::new(),
            vectors: BTreeMap::new(),
        })
    }

    pub fn concept_set(&self) -> &[String] {
        &self.concept_set
    }

    pub fn dims_per_concept(&self) -> usize {
        self.dims_per_concept
    }

    pub fn set_labels(
        &mut self,
        concept: impl Into<String>,
        labels: Vec<String>,
    ) -> Result<(), ModelError> {
        let concept = concept.into();
        if !self.concept_set.iter().any(|c| c == &concept) {
            return Err(ModelError::UnknownConcept(concept));
        }
        if labels.len() != self.dims_per_concept {
            return Err(ModelError::LabelArity {
                concept,
                expected: self.dims_per_concept,
                found: labels.len(),
            });
        }
        self.dimension_labels.insert(concept, labels);
        Ok(())
    }

    pub fn labels(&self, concept: &str) -> Option<&[String]> {
        self.dimension_labels.get(concept).map(Vec::as_slice)
    }

    pub fn insert_vector(
        &mut self,
        lang: LanguageId,
        concept: impl Into<String>,
        vector: Vec<f64>,
    ) -> Result<(), ModelError> {
        let concept = concept.into();
        if !self.concept_set.iter().any(|c| c == &concept) {
            return Err(ModelError::UnknownConcept(concept));
        }
        if vector.len() != self.dims_per_concept {
            return Err(ModelError::VectorArity {
                lang,
                concept,
                expected: self.dims_per_concept,
                found: vector.len(),
            });
        }
        if let Some(&bad) = vector.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ModelError::VectorRange {
                lang,
                concept,
                value: bad,
            });
        }
        self.vectors.entry(lang).or_default().insert(concept, vector);
        Ok(())
    }

    pub fn vector(&self, lang: &LanguageId, concept: &str) -> Option<&[f64]> {
        self.vectors
            .get(lang)
            .and_then(|m| m.get(concept))
            .map(Vec::as_slice)
    }

    pub fn languages(&self) -> impl Iterator<Item = &LanguageId> {
        self.vectors.keys()
    }

    /// Iterate (language, concept, vector) in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&LanguageId, &str, &[f64])> {
        self.vectors.iter().flat_map(|(lang, m)| {
            m.iter().map(move |(c, v)| (lang, c.as_str(), v.as_slice()))
        })
    }

    /// Concatenate the language's concept blocks for the given subset, in
    /// concept-set order. The result has `|subset| * dims_per_concept`
    /// entries.
    pub fn concatenate(
        &self,
        lang: &LanguageId,
        subset: &[String],
    ) -> Result<Vec<f64>, ModelError> {
        for c in subset {
            if !self.concept_set.iter().any(|s| s == c) {
                return Err(ModelError::UnknownConcept(c.clone()));
            }
        }
        let wanted: BTreeSet<&str> = subset.iter().map(String::as_str).collect();
        let mut out = Vec::with_capacity(wanted.len() * self.dims_per_concept);
        for concept in &self.concept_set {
            if !wanted.contains(concept.as_str()) {
                continue;
            }
            match self.vector(lang, concept) {
                Some(block) => out.extend_from_slice(block),
                None => {
                    return Err(ModelError::MissingConcept {
                        lang: lang.clone(),
                        concept: concept.clone(),
                    })
                }
            }
        }
        Ok(out)
    }
}

/// Concatenate a language's vectors over a concept subset.
pub fn concatenate_language_vector(
    set: &ConceptVectorSet,
    lang: &LanguageId,
    concepts: &[String],
) -> Result<Vec<f64>, ModelError> {
    set.concatenate(lang, concepts)
}

/// Binarize an association vector: a dimension is 1 iff its value is
/// strictly positive, i.e. the associated concept was found at all.
pub fn binarize(v: &[f64]) -> Vec<u8> {
    v.iter().map(|&x| u8::from(x > 0.0)).collect()
}

/// Whether a matrix holds distances (smaller = closer) or similarities
/// (larger = closer).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Distance,
    Similarity,
}

impl MatrixKind {
    /// Canonical self-comparison value: 0 for distances, 1 for similarities.
    pub fn self_value(&self) -> f64 {
        match self {
            MatrixKind::Distance => 0.0,
            MatrixKind::Similarity => 1.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixKind::Distance => "distance",
            MatrixKind::Similarity => "similarity",
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Symmetric matrix of pairwise values over an ordered language index.
///
/// Values are stored once (upper triangle plus diagonal) and mirrored on
/// read, so asymmetry cannot be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    index: Vec<LanguageId>,
    pos: HashMap<LanguageId, usize>,
    kind: MatrixKind,
    metric_tag: String,
    /// Upper triangle including the diagonal, row-major.
    values: Vec<f64>,
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl DistanceMatrix {
    /// Build from the off-diagonal upper triangle, row-major: the value for
    /// (i, j) with i < j sits at position `i*n - i*(i+1)/2 + (j - i - 1)`.
    /// The diagonal is set to the kind's canonical self-value.
    pub fn from_pairs(
        index: Vec<LanguageId>,
        kind: MatrixKind,
        metric_tag: impl Into<String>,
        off_diagonal: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = index.len();
        let expected = tri_len(n) - n;
        if off_diagonal.len() != expected {
            return Err(ModelError::PairCount {
                n,
                expected,
                found: off_diagonal.len(),
            });
        }
        let mut m = Self::filled(index, kind, metric_tag, kind.self_value())?;
        let mut it = off_diagonal.into_iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = it.next().expect("length checked");
                if v.is_nan() || v < 0.0 {
                    return Err(ModelError::BadMatrixValue { i, j, value: v });
                }
                m.values[m.tri_index(i, j)] = v;
            }
        }
        Ok(m)
    }

    fn filled(
        index: Vec<LanguageId>,
        kind: MatrixKind,
        metric_tag: impl Into<String>,
        fill: f64,
    ) -> Result<Self, ModelError> {
        let mut pos = HashMap::with_capacity(index.len());
        for (i, lang) in index.iter().enumerate() {
            if pos.insert(lang.clone(), i).is_some() {
                return Err(ModelError::DuplicateIndexLanguage(lang.clone()));
            }
        }
        let n = index.len();
        Ok(DistanceMatrix {
            index,
            pos,
            kind,
            metric_tag: metric_tag.into(),
            values: vec![fill; tri_len(n)],
        })
    }

    /// Build from a full square of values that the caller has already
    /// validated for symmetry; the upper triangle is kept.
    pub(crate) fn from_rows_unchecked(
        index: Vec<LanguageId>,
        kind: MatrixKind,
        metric_tag: String,
        rows: &[Vec<f64>],
    ) -> Result<Self, ModelError> {
        let n = index.len();
        let mut m = Self::filled(index, kind, metric_tag, 0.0)?;
        for i in 0..n {
            for j in i..n {
                m.values[m.tri_index(i, j)] = rows[i][j];
            }
        }
        Ok(m)
    }

    fn tri_index(&self, i: usize, j: usize) -> usize {
        let n = self.index.len();
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * n - i * (i + 1) / 2 + j
    }

    pub fn index(&self) -> &[LanguageId] {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn metric_tag(&self) -> &str {
        &self.metric_tag
    }

    pub fn position(&self, lang: &LanguageId) -> Option<usize> {
        self.pos.get(lang).copied()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.tri_index(i, j)]
    }

    pub fn get_by_lang(&self, x: &LanguageId, y: &LanguageId) -> Option<f64> {
        Some(self.get(self.position(x)?, self.position(y)?))
    }
}
