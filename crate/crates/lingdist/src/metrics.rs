//! Pairwise similarity and distance functions, and the matrix builder that
//! evaluates one of them over every language pair.
//!
//! Strings are compared as sequences of Unicode scalar values of
//! NFC-normalized text, not grapheme clusters; ASJP-style transcriptions are
//! ASCII, so this is a documented limitation only for other scripts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    binarize, CellValue, ConceptVectorSet, DistanceMatrix, FeatureTable, LanguageId,
    LanguageProfile, LineagePath, MatrixKind, ModelError, WordListTable,
};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MetricError {
    #[error("vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cosine similarity is undefined for an all-zero vector")]
    NullVector,
    #[error("both strings are empty")]
    BothEmpty,
    #[error("{x} and {y} share no concepts (need at least {min_shared})")]
    NoSharedConcepts {
        x: LanguageId,
        y: LanguageId,
        min_shared: usize,
    },
    #[error("{x} and {y} are not comparable; not coded for: {missing_features:?}")]
    NotComparable {
        x: LanguageId,
        y: LanguageId,
        missing_features: Vec<String>,
    },
    #[error("empty feature subset")]
    EmptyFeatureSubset,
    #[error("unknown metric name {0:?}")]
    UnknownMetric(String),
    #[error("metric {metric} cannot be computed from {provided} data")]
    WrongInputKind {
        metric: MetricName,
        provided: &'static str,
    },
    #[error("no lineage for language {0}")]
    MissingLineage(LanguageId),
    #[error("pair ({x}, {y}) failed: {source}")]
    PairFailed {
        x: LanguageId,
        y: LanguageId,
        source: Box<MetricError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Cosine similarity of two componentwise-nonnegative vectors, in [0, 1].
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, MetricError> {
    if u.len() != v.len() {
        return Err(MetricError::LengthMismatch(u.len(), v.len()));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(MetricError::NullVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(0.0, 1.0))
}

/// Number of positions where the two binary vectors differ.
pub fn hamming_distance(u: &[u8], v: &[u8]) -> Result<usize, MetricError> {
    if u.len() != v.len() {
        return Err(MetricError::LengthMismatch(u.len(), v.len()));
    }
    Ok(u.iter().zip(v).filter(|(a, b)| a != b).count())
}

/// Levenshtein edit distance (insert/delete/substitute, unit costs) over
/// Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            let next = (diag + cost).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// Levenshtein distance normalized by the longer string's length.
pub fn ldn(a: &str, b: &str) -> Result<f64, MetricError> {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return Err(MetricError::BothEmpty);
    }
    Ok(levenshtein(a, b) as f64 / max_len as f64)
}

/// Mean normalized Levenshtein distance over the concepts attested in both
/// languages.
pub fn ldn_mean(
    table: &WordListTable,
    x: &LanguageId,
    y: &LanguageId,
    min_shared: usize,
) -> Result<f64, MetricError> {
    mean_over_shared(table, x, y, min_shared, ldn)
}

/// Length of the longest common contiguous substring, normalized by the
/// longer string's length.
pub fn lcs_similarity(a: &str, b: &str) -> Result<f64, MetricError> {
    let ca: Vec<char> = a.chars().collect();
    let cb: Vec<char> = b.chars().collect();
    let max_len = ca.len().max(cb.len());
    if max_len == 0 {
        return Err(MetricError::BothEmpty);
    }
    let mut best = 0usize;
    let mut row = vec![0usize; cb.len() + 1];
    for ch_a in &ca {
        let mut diag = 0usize;
        for (j, ch_b) in cb.iter().enumerate() {
            let next = if ch_a == ch_b { diag + 1 } else { 0 };
            diag = row[j + 1];
            row[j + 1] = next;
            best = best.max(next);
        }
    }
    Ok(best as f64 / max_len as f64)
}

/// Mean longest-common-substring similarity over shared concepts.
pub fn lcs_mean(
    table: &WordListTable,
    x: &LanguageId,
    y: &LanguageId,
    min_shared: usize,
) -> Result<f64, MetricError> {
    mean_over_shared(table, x, y, min_shared, lcs_similarity)
}

fn mean_over_shared(
    table: &WordListTable,
    x: &LanguageId,
    y: &LanguageId,
    min_shared: usize,
    f: impl Fn(&str, &str) -> Result<f64, MetricError>,
) -> Result<f64, MetricError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for concept in table.shared_concepts(x, y) {
        let a = table.form(x, concept).expect("shared concept");
        let b = table.form(y, concept).expect("shared concept");
        sum += f(a, b)?;
        count += 1;
    }
    if count < min_shared.max(1) {
        return Err(MetricError::NoSharedConcepts {
            x: x.clone(),
            y: y.clone(),
            min_shared: min_shared.max(1),
        });
    }
    Ok(sum / count as f64)
}

/// Jaccard index of the two paths' node-name sets, leaf included.
pub fn path_jaccard(p: &LineagePath, q: &LineagePath) -> f64 {
    let a: BTreeSet<&str> = p.nodes().iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = q.nodes().iter().map(String::as_str).collect();
    let intersection = a.intersection(&b).count();
    let union = a.union(&b).count();
    intersection as f64 / union as f64
}

/// Tree distance between two lineage leaves; paths sharing no node
/// (distinct top-level families) are infinitely far apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeDistance {
    Finite(usize),
    Infinite,
}

impl TreeDistance {
    pub fn as_f64(&self) -> f64 {
        match self {
            TreeDistance::Finite(d) => *d as f64,
            TreeDistance::Infinite => f64::INFINITY,
        }
    }
}

/// Edge count from each leaf up to the lowest common node of the two paths,
/// summed. The lowest common node is the shared name minimizing that total.
pub fn lca_edge_distance(p: &LineagePath, q: &LineagePath) -> TreeDistance {
    let q_depth: BTreeMap<&str, usize> = q
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let p_leaf = p.len() - 1;
    let q_leaf = q.len() - 1;
    let mut best: Option<usize> = None;
    for (i, node) in p.nodes().iter().enumerate() {
        if let Some(&j) = q_depth.get(node.as_str()) {
            let total = (p_leaf - i) + (q_leaf - j);
            best = Some(best.map_or(total, |b| b.min(total)));
        }
    }
    match best {
        Some(d) => TreeDistance::Finite(d),
        None => TreeDistance::Infinite,
    }
}

/// Fraction of features in the subset on which the two languages carry
/// different coded symbols. Both languages must be coded for every feature
/// in the subset to be comparable; for a fixed subset the normalization
/// leaves the induced neighbor ranking unchanged.
pub fn feature_hamming(
    table: &FeatureTable,
    x: &LanguageId,
    y: &LanguageId,
    features: &[String],
) -> Result<f64, MetricError> {
    if features.is_empty() {
        return Err(MetricError::EmptyFeatureSubset);
    }
    let mut missing = Vec::new();
    let mut differing = 0usize;
    for feature in features {
        match (table.cell(x, feature), table.cell(y, feature)) {
            (CellValue::Coded(a), CellValue::Coded(b)) => {
                if a != b {
                    differing += 1;
                }
            }
            _ => missing.push(feature.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(MetricError::NotComparable {
            x: x.clone(),
            y: y.clone(),
            missing_features: missing,
        });
    }
    Ok(differing as f64 / features.len() as f64)
}

/// The closed set of metrics a distance matrix can be built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricName {
    CosineConceptual,
    HammingConceptual,
    LdnMean,
    LcsMean,
    PathJaccard,
    LcaEdges,
    FeatureHamming,
}

impl MetricName {
    pub const ALL: [MetricName; 7] = [
        MetricName::CosineConceptual,
        MetricName::HammingConceptual,
        MetricName::LdnMean,
        MetricName::LcsMean,
        MetricName::PathJaccard,
        MetricName::LcaEdges,
        MetricName::FeatureHamming,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricName::CosineConceptual => "cosine_conceptual",
            MetricName::HammingConceptual => "hamming_conceptual",
            MetricName::LdnMean => "ldn_mean",
            MetricName::LcsMean => "lcs_mean",
            MetricName::PathJaccard => "path_jaccard",
            MetricName::LcaEdges => "lca_edges",
            MetricName::FeatureHamming => "feature_hamming",
        }
    }

    pub fn kind(&self) -> MatrixKind {
        match self {
            MetricName::CosineConceptual | MetricName::LcsMean | MetricName::PathJaccard => {
                MatrixKind::Similarity
            }
            MetricName::HammingConceptual
            | MetricName::LdnMean
            | MetricName::LcaEdges
            | MetricName::FeatureHamming => MatrixKind::Distance,
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricName::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MetricError::UnknownMetric(s.to_string()))
    }
}

/// A metric plus its parameters: which concept or feature subset to use,
/// and the minimum shared-concept count for word-list metrics.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub name: MetricName,
    /// Concept subset for the conceptual metrics; None = all concepts.
    pub concepts: Option<Vec<String>>,
    /// Feature subset for feature_hamming; None = all features.
    pub features: Option<Vec<String>>,
    /// Minimum shared concepts for ldn_mean / lcs_mean.
    pub min_shared: usize,
}

impl MetricSpec {
    pub fn new(name: MetricName) -> Self {
        MetricSpec {
            name,
            concepts: None,
            features: None,
            min_shared: 1,
        }
    }

    pub fn metric_tag(&self) -> String {
        self.name.as_str().to_string()
    }
}

/// The data a metric is evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum MetricInput<'a> {
    Concept(&'a ConceptVectorSet),
    Words(&'a WordListTable),
    Lineages(&'a BTreeMap<LanguageId, LanguageProfile>),
    Features(&'a FeatureTable),
}

impl MetricInput<'_> {
    fn kind_name(&self) -> &'static str {
        match self {
            MetricInput::Concept(_) => "concept-vector",
            MetricInput::Words(_) => "word-list",
            MetricInput::Lineages(_) => "lineage",
            MetricInput::Features(_) => "feature-table",
        }
    }
}

enum PairFn<'a> {
    Vectors(Vec<Vec<f64>>),
    Binary(Vec<Vec<u8>>),
    Words {
        table: &'a WordListTable,
        langs: &'a [LanguageId],
        min_shared: usize,
        similarity: bool,
    },
    Paths(Vec<&'a LineagePath>, MetricName),
    Features {
        table: &'a FeatureTable,
        langs: &'a [LanguageId],
        subset: Vec<String>,
    },
}

impl PairFn<'_> {
    fn eval(&self, i: usize, j: usize) -> Result<f64, MetricError> {
        match self {
            PairFn::Vectors(vs) => cosine_similarity(&vs[i], &vs[j]),
            PairFn::Binary(vs) => hamming_distance(&vs[i], &vs[j]).map(|d| d as f64),
            PairFn::Words {
                table,
                langs,
                min_shared,
                similarity,
            } => {
                if *similarity {
                    lcs_mean(table, &langs[i], &langs[j], *min_shared)
                } else {
                    ldn_mean(table, &langs[i], &langs[j], *min_shared)
                }
            }
            PairFn::Paths(paths, name) => Ok(match name {
                MetricName::PathJaccard => path_jaccard(paths[i], paths[j]),
                _ => lca_edge_distance(paths[i], paths[j]).as_f64(),
            }),
            PairFn::Features { table, langs, subset } => {
                feature_hamming(table, &langs[i], &langs[j], subset)
            }
        }
    }
}

/// Evaluate the metric over every unordered language pair. Pairs are
/// computed in parallel and written into a triangular store in (i, j)
/// order, so the result does not depend on the worker schedule. A failing
/// pair aborts the build; the smallest failing pair index is reported.
pub fn build_distance_matrix(
    spec: &MetricSpec,
    input: MetricInput<'_>,
    languages: &[LanguageId],
) -> Result<DistanceMatrix, MetricError> {
    let name = spec.name;
    let pair_fn = prepare(spec, input, languages)?;

    let n = languages.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let computed: Vec<Result<f64, MetricError>> = pairs
        .par_iter()
        .map(|&(i, j)| pair_fn.eval(i, j))
        .collect();
    let mut off_diagonal = Vec::with_capacity(pairs.len());
    for (&(i, j), result) in pairs.iter().zip(computed) {
        match result {
            Ok(v) => off_diagonal.push(v),
            Err(e) => {
                return Err(MetricError::PairFailed {
                    x: languages[i].clone(),
                    y: languages[j].clone(),
                    source: Box::new(e),
                })
            }
        }
    }
    DistanceMatrix::from_pairs(
        languages.to_vec(),
        name.kind(),
        spec.metric_tag(),
        off_diagonal,
    )
    .map_err(MetricError::from)
}

fn prepare<'a>(
    spec: &MetricSpec,
    input: MetricInput<'a>,
    languages: &'a [LanguageId],
) -> Result<PairFn<'a>, MetricError> {
    let wrong = |provided: &'static str| MetricError::WrongInputKind {
        metric: spec.name,
        provided,
    };
    match spec.name {
        MetricName::CosineConceptual | MetricName::HammingConceptual => match input {
            MetricInput::Concept(set) => {
                let subset: Vec<String> = match &spec.concepts {
                    Some(c) => c.clone(),
                    None => set.concept_set().to_vec(),
                };
                let mut vectors = Vec::with_capacity(languages.len());
                for lang in languages {
                    vectors.push(set.concatenate(lang, &subset)?);
                }
                if spec.name == MetricName::HammingConceptual {
                    Ok(PairFn::Binary(
                        vectors.iter().map(|v| binarize(v)).collect(),
                    ))
                } else {
                    Ok(PairFn::Vectors(vectors))
                }
            }
            other => Err(wrong(other.kind_name())),
        },
        MetricName::LdnMean | MetricName::LcsMean => match input {
            MetricInput::Words(table) => Ok(PairFn::Words {
                table,
                langs: languages,
                min_shared: spec.min_shared,
                similarity: spec.name == MetricName::LcsMean,
            }),
            other => Err(wrong(other.kind_name())),
        },
        MetricName::PathJaccard | MetricName::LcaEdges => match input {
            MetricInput::Lineages(profiles) => {
                let mut paths = Vec::with_capacity(languages.len());
                for lang in languages {
                    let profile = profiles
                        .get(lang)
                        .ok_or_else(|| MetricError::MissingLineage(lang.clone()))?;
                    paths.push(&profile.lineage);
                }
                Ok(PairFn::Paths(paths, spec.name))
            }
            other => Err(wrong(other.kind_name())),
        },
        MetricName::FeatureHamming => match input {
            MetricInput::Features(table) => {
                let subset = match &spec.features {
                    Some(f) => f.clone(),
                    None => table.features().to_vec(),
                };
                if subset.is_empty() {
                    return Err(MetricError::EmptyFeatureSubset);
                }
                Ok(PairFn::Features {
                    table,
                    langs: languages,
                    subset,
                })
            }
            other => Err(wrong(other.kind_name())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang(s: &str) -> LanguageId {
        LanguageId::new(s).unwrap()
    }

    fn path(nodes: &[&str]) -> LineagePath {
        LineagePath::new(nodes.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn hun_path() -> LineagePath {
        path(&["Uralic", "Hungarian"])
    }

    fn ekk_path() -> LineagePath {
        path(&[
            "Uralic",
            "Finnic",
            "Coastal Finnic",
            "Neva",
            "Central Finnic",
            "Estonian",
        ])
    }

    #[test]
    fn cosine_identity_orthogonal_and_oblique() {
        let v = vec![0.2, 0.8, 0.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((c - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cosine_rejects_null_vector() {
        assert_eq!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(MetricError::NullVector)
        );
    }

    #[test]
    fn cosine_scale_invariance() {
        let u = vec![0.1, 0.5, 0.9];
        let v = vec![0.7, 0.0, 0.3];
        let su: Vec<f64> = u.iter().map(|x| x * 0.125).collect();
        let base = cosine_similarity(&u, &v).unwrap();
        let scaled = cosine_similarity(&su, &v).unwrap();
        assert!((base - scaled).abs() <= 1e-12 * base.abs());
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&[1, 0, 1], &[1, 0, 1]).unwrap(), 0);
        assert_eq!(hamming_distance(&[1, 0, 1], &[0, 1, 0]).unwrap(), 3);
        assert_eq!(hamming_distance(&[1, 0, 1], &[1, 1, 0]).unwrap(), 2);
        assert!(hamming_distance(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("same", "same"), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn ldn_examples() {
        assert_eq!(ldn("abc", "abc").unwrap(), 0.0);
        assert!((ldn("abc", "abd").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(ldn("a", "bcd").unwrap(), 1.0);
        assert_eq!(ldn("", ""), Err(MetricError::BothEmpty));
    }

    #[test]
    fn ldn_mean_examples() {
        let mut t = WordListTable::new();
        t.insert(lang("x"), "hand", "abc").unwrap();
        t.insert(lang("y"), "hand", "abd").unwrap();
        let d = ldn_mean(&t, &lang("x"), &lang("y"), 1).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);

        // Two shared concepts with ldn 0 and 1 average to 0.5.
        let mut t = WordListTable::new();
        t.insert(lang("x"), "c1", "aa").unwrap();
        t.insert(lang("y"), "c1", "aa").unwrap();
        t.insert(lang("x"), "c2", "a").unwrap();
        t.insert(lang("y"), "c2", "bcd").unwrap();
        assert_eq!(ldn_mean(&t, &lang("x"), &lang("y"), 1).unwrap(), 0.5);

        // Identical word lists are at distance zero.
        let mut t = WordListTable::new();
        for c in ["c1", "c2"] {
            t.insert(lang("x"), c, "zz").unwrap();
            t.insert(lang("y"), c, "zz").unwrap();
        }
        assert_eq!(ldn_mean(&t, &lang("x"), &lang("y"), 1).unwrap(), 0.0);
    }

    #[test]
    fn ldn_mean_requires_shared_concepts() {
        let mut t = WordListTable::new();
        t.insert(lang("x"), "c1", "aa").unwrap();
        t.insert(lang("y"), "c2", "bb").unwrap();
        assert!(matches!(
            ldn_mean(&t, &lang("x"), &lang("y"), 1),
            Err(MetricError::NoSharedConcepts { .. })
        ));
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_similarity("same", "same").unwrap(), 1.0);
        assert_eq!(lcs_similarity("entrance", "trance").unwrap(), 0.75);
        assert_eq!(lcs_similarity("abc", "xyz").unwrap(), 0.0);
    }

    #[test]
    fn path_jaccard_examples() {
        let hun = hun_path();
        let ekk = ekk_path();
        assert_eq!(path_jaccard(&hun, &hun), 1.0);
        assert_eq!(path_jaccard(&hun, &ekk), 1.0 / 7.0);
        assert_eq!(path_jaccard(&path(&["A", "x"]), &path(&["B", "y"])), 0.0);
    }

    #[test]
    fn lca_edge_examples() {
        let hun = hun_path();
        let ekk = ekk_path();
        assert_eq!(lca_edge_distance(&hun, &hun), TreeDistance::Finite(0));
        assert_eq!(lca_edge_distance(&hun, &ekk), TreeDistance::Finite(6));
        assert_eq!(
            lca_edge_distance(&path(&["A", "x"]), &path(&["B", "y"])),
            TreeDistance::Infinite
        );
    }

    #[test]
    fn feature_hamming_examples() {
        let mut t = FeatureTable::new((1..=50).map(|i| format!("F{i}")).collect()).unwrap();
        t.insert_row(lang("x"), vec![CellValue::Coded(0); 50]).unwrap();
        let mut row = vec![CellValue::Coded(0); 50];
        row[7] = CellValue::Coded(1);
        t.insert_row(lang("y"), row).unwrap();
        let subset: Vec<String> = t.features().to_vec();
        assert_eq!(feature_hamming(&t, &lang("x"), &lang("x"), &subset).unwrap(), 0.0);
        assert_eq!(feature_hamming(&t, &lang("x"), &lang("y"), &subset).unwrap(), 0.02);
    }

    #[test]
    fn feature_hamming_unknown_is_not_comparable() {
        let mut t = FeatureTable::new(vec!["F1".into(), "F2".into()]).unwrap();
        t.insert_row(lang("x"), vec![CellValue::Coded(0), CellValue::Coded(1)])
            .unwrap();
        t.insert_row(lang("y"), vec![CellValue::Coded(0), CellValue::Unknown])
            .unwrap();
        let subset: Vec<String> = t.features().to_vec();
        match feature_hamming(&t, &lang("x"), &lang("y"), &subset) {
            Err(MetricError::NotComparable { missing_features, .. }) => {
                assert_eq!(missing_features, vec!["F2".to_string()]);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn metric_names_round_trip() {
        for name in MetricName::ALL {
            assert_eq!(name.as_str().parse::<MetricName>().unwrap(), name);
        }
        assert!("euclidean".parse::<MetricName>().is_err());
    }

    #[test]
    fn builder_matches_direct_call() {
        let mut t = WordListTable::new();
        t.insert(lang("x"), "hand", "abc").unwrap();
        t.insert(lang("y"), "hand", "abd").unwrap();
        let spec = MetricSpec::new(MetricName::LdnMean);
        let langs = vec![lang("x"), lang("y")];
        let m = build_distance_matrix(&spec, MetricInput::Words(&t), &langs).unwrap();
        assert_eq!(
            m.get(0, 1),
            ldn_mean(&t, &lang("x"), &lang("y"), 1).unwrap()
        );
        assert_eq!(m.kind(), MatrixKind::Distance);
        assert_eq!(m.metric_tag(), "ldn_mean");
    }

    #[test]
    fn builder_identical_languages_all_zero() {
        let concepts: Vec<String> = vec!["c1".into(), "c2".into()];
        let mut set = ConceptVectorSet::new(concepts.clone(), 3).unwrap();
        for l in ["x", "y", "z"] {
            for c in &concepts {
                set.insert_vector(lang(l), c.clone(), vec![0.5, 0.0, 0.9]).unwrap();
            }
        }
        let spec = MetricSpec::new(MetricName::HammingConceptual);
        let langs = vec![lang("x"), lang("y"), lang("z")];
        let m = build_distance_matrix(&spec, MetricInput::Concept(&set), &langs).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn builder_reports_offending_pair() {
        let mut t = WordListTable::new();
        t.insert(lang("x"), "c1", "aa").unwrap();
        t.insert(lang("y"), "c1", "ab").unwrap();
        t.insert(lang("z"), "c2", "zz").unwrap();
        let spec = MetricSpec::new(MetricName::LdnMean);
        let langs = vec![lang("x"), lang("y"), lang("z")];
        match build_distance_matrix(&spec, MetricInput::Words(&t), &langs) {
            Err(MetricError::PairFailed { x, y, .. }) => {
                // (x, z) is the first failing pair in index order.
                assert_eq!((x, y), (lang("x"), lang("z")));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn builder_rejects_wrong_input_kind() {
        let t = WordListTable::new();
        let spec = MetricSpec::new(MetricName::PathJaccard);
        assert!(matches!(
            build_distance_matrix(&spec, MetricInput::Words(&t), &[]),
            Err(MetricError::WrongInputKind { .. })
        ));
    }

    #[test]
    fn builder_feature_hamming_matches_nested_loop_oracle() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let features: Vec<String> = (0..20).map(|i| format!("F{i:02}")).collect();
        let mut t = FeatureTable::new(features.clone()).unwrap();
        let langs: Vec<LanguageId> = (0..10).map(|i| lang(&format!("l{i:02}"))).collect();
        for l in &langs {
            let row: Vec<CellValue> = (0..20)
                .map(|_| CellValue::Coded(u8::from(rng.gen_bool(0.5))))
                .collect();
            t.insert_row(l.clone(), row).unwrap();
        }
        let spec = MetricSpec::new(MetricName::FeatureHamming);
        let m = build_distance_matrix(&spec, MetricInput::Features(&t), &langs).unwrap();
        for (i, x) in langs.iter().enumerate() {
            for (j, y) in langs.iter().enumerate() {
                let mut differing = 0;
                for f in &features {
                    if t.cell(x, f) != t.cell(y, f) {
                        differing += 1;
                    }
                }
                let expected = differing as f64 / features.len() as f64;
                assert_eq!(m.get(i, j), expected, "pair ({i}, {j})");
            }
        }
    }

    #[test]
    fn lca_matrix_carries_infinity() {
        let mut profiles = BTreeMap::new();
        for (code, nodes) in [("aaa", vec!["F1", "x"]), ("bbb", vec!["F2", "y"])] {
            let l = lang(code);
            profiles.insert(l.clone(), LanguageProfile::new(l, path(&nodes)));
        }
        let spec = MetricSpec::new(MetricName::LcaEdges);
        let langs = vec![lang("aaa"), lang("bbb")];
        let m = build_distance_matrix(&spec, MetricInput::Lineages(&profiles), &langs).unwrap();
        assert_eq!(m.get(0, 1), f64::INFINITY);
    }
}
