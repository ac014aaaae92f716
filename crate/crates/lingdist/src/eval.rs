//! The evaluation protocol on top of distance matrices and feature tables:
//! k-nearest-neighbor majority-family classification, neighbor-family
//! distributions, feature coverage per family, and the trade-off between
//! feature-set size and the number of comparable languages.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{
    top_level_family, CellValue, DistanceMatrix, FeatureTable, LanguageId, LanguageProfile,
    MatrixKind,
};

pub type Lineages = BTreeMap<LanguageId, LanguageProfile>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EvalError {
    #[error("language {0} is not in the matrix index")]
    UnknownLanguage(LanguageId),
    #[error("k = {k} exceeds the {max} other languages in the matrix")]
    KTooLarge { k: usize, max: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("no lineage for language {0}")]
    MissingLineage(LanguageId),
    #[error("family {0:?} has no languages in the data")]
    EmptyFamily(String),
    #[error("n = {n} exceeds the {available} features in the table")]
    NTooLarge { n: usize, available: usize },
    #[error("n must be positive")]
    ZeroN,
    #[error("n values must be sorted ascending")]
    UnsortedNValues,
}

/// The k other languages closest to `lang`: smallest distance or largest
/// similarity first, exact ties broken by language-id order. Self is
/// excluded; the result is deterministic.
pub fn k_nearest(
    m: &DistanceMatrix,
    lang: &LanguageId,
    k: usize,
) -> Result<Vec<LanguageId>, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let pos = m
        .position(lang)
        .ok_or_else(|| EvalError::UnknownLanguage(lang.clone()))?;
    let max = m.len() - 1;
    if k > max {
        return Err(EvalError::KTooLarge { k, max });
    }
    let mut others: Vec<(f64, &LanguageId)> = (0..m.len())
        .filter(|&j| j != pos)
        .map(|j| (m.get(pos, j), &m.index()[j]))
        .collect();
    match m.kind() {
        MatrixKind::Distance => {
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        }
        MatrixKind::Similarity => {
            others.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)))
        }
    }
    Ok(others.into_iter().take(k).map(|(_, l)| l.clone()).collect())
}

fn family_of<'a>(lineages: &'a Lineages, lang: &LanguageId) -> Result<&'a str, EvalError> {
    lineages
        .get(lang)
        .map(top_level_family)
        .ok_or_else(|| EvalError::MissingLineage(lang.clone()))
}

/// Whether a strict majority (> k/2) of the language's k nearest neighbors
/// share its top-level family. Exactly k/2 counts as failure.
pub fn majority_family_correct(
    m: &DistanceMatrix,
    lang: &LanguageId,
    k: usize,
    lineages: &Lineages,
) -> Result<bool, EvalError> {
    let own_family = family_of(lineages, lang)?;
    let mut same = 0usize;
    for neighbor in k_nearest(m, lang, k)? {
        if family_of(lineages, &neighbor)? == own_family {
            same += 1;
        }
    }
    Ok(2 * same > k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyAccuracy {
    pub accuracy: f64,
    pub n_languages: usize,
}

/// Per-family and overall classification accuracy at one k.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyAccuracyReport {
    pub k: usize,
    pub metric_tag: String,
    /// In the order the families were requested.
    pub per_family: Vec<(String, FamilyAccuracy)>,
    /// Micro-average over the union of all listed families' languages.
    pub overall: f64,
    pub overall_n: usize,
}

/// Matrix languages grouped by top-level family, in matrix index order.
/// Languages without a lineage belong to no listed family (they still act
/// as neighbors).
fn family_members<'a>(
    m: &'a DistanceMatrix,
    lineages: &Lineages,
    family: &str,
) -> Vec<&'a LanguageId> {
    m.index()
        .iter()
        .filter(|lang| {
            lineages
                .get(lang)
                .is_some_and(|p| top_level_family(p) == family)
        })
        .collect()
}

/// Majority-family classification accuracy for each listed family. The
/// neighbor pool is the whole matrix, not only the listed families.
pub fn family_accuracy(
    m: &DistanceMatrix,
    lineages: &Lineages,
    families: &[String],
    k: usize,
) -> Result<FamilyAccuracyReport, EvalError> {
    let mut per_family = Vec::with_capacity(families.len());
    let mut total_correct = 0usize;
    let mut total = 0usize;
    for family in families {
        let members = family_members(m, lineages, family);
        if members.is_empty() {
            return Err(EvalError::EmptyFamily(family.clone()));
        }
        let mut correct = 0usize;
        for lang in &members {
            if majority_family_correct(m, lang, k, lineages)? {
                correct += 1;
            }
        }
        total_correct += correct;
        total += members.len();
        per_family.push((
            family.clone(),
            FamilyAccuracy {
                accuracy: correct as f64 / members.len() as f64,
                n_languages: members.len(),
            },
        ));
    }
    Ok(FamilyAccuracyReport {
        k,
        metric_tag: m.metric_tag().to_string(),
        per_family,
        overall: total_correct as f64 / total as f64,
        overall_n: total,
    })
}

/// Mean percentage of each listed family among the k nearest neighbors of
/// each source family's languages. Rows do not include neighbors outside
/// the listed families, so they may sum to less than 100.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborDistributionReport {
    pub k: usize,
    pub metric_tag: String,
    pub families: Vec<String>,
    /// One row per source family, percentages aligned with `families`.
    pub rows: Vec<(String, Vec<f64>)>,
}

pub fn neighbor_family_distribution(
    m: &DistanceMatrix,
    lineages: &Lineages,
    families: &[String],
    k: usize,
) -> Result<NeighborDistributionReport, EvalError> {
    let mut rows = Vec::with_capacity(families.len());
    for family in families {
        let members = family_members(m, lineages, family);
        if members.is_empty() {
            return Err(EvalError::EmptyFamily(family.clone()));
        }
        let mut sums = vec![0.0f64; families.len()];
        for lang in &members {
            let neighbors = k_nearest(m, lang, k)?;
            let mut counts = vec![0usize; families.len()];
            for neighbor in &neighbors {
                let neighbor_family = family_of(lineages, neighbor)?;
                if let Some(i) = families.iter().position(|f| f == neighbor_family) {
                    counts[i] += 1;
                }
            }
            for (sum, count) in sums.iter_mut().zip(&counts) {
                *sum += 100.0 * *count as f64 / k as f64;
            }
        }
        for sum in &mut sums {
            *sum /= members.len() as f64;
        }
        rows.push((family.clone(), sums));
    }
    Ok(NeighborDistributionReport {
        k,
        metric_tag: m.metric_tag().to_string(),
        families: families.to_vec(),
        rows,
    })
}

/// Fractions of a family's languages per cell state for one feature; the
/// three parts sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageBreakdown {
    pub coded: f64,
    pub unknown: f64,
    pub missing: f64,
}

/// Fraction of the family's languages (among the table's rows) whose cell
/// is Coded, per feature. Unknown and Missing both count as uncovered.
pub fn feature_coverage(
    table: &FeatureTable,
    lineages: &Lineages,
    family: &str,
) -> Result<BTreeMap<String, f64>, EvalError> {
    Ok(feature_coverage_detailed(table, lineages, family)?
        .into_iter()
        .map(|(f, b)| (f, b.coded))
        .collect())
}

/// Like [`feature_coverage`] but keeping Unknown and Missing apart.
pub fn feature_coverage_detailed(
    table: &FeatureTable,
    lineages: &Lineages,
    family: &str,
) -> Result<BTreeMap<String, CoverageBreakdown>, EvalError> {
    let members: Vec<&LanguageId> = table
        .languages()
        .filter(|lang| {
            lineages
                .get(lang)
                .is_some_and(|p| top_level_family(p) == family)
        })
        .collect();
    if members.is_empty() {
        return Err(EvalError::EmptyFamily(family.to_string()));
    }
    let n = members.len() as f64;
    let mut out = BTreeMap::new();
    for feature in table.features() {
        let mut coded = 0usize;
        let mut unknown = 0usize;
        let mut missing = 0usize;
        for lang in &members {
            match table.cell(lang, feature) {
                CellValue::Coded(_) => coded += 1,
                CellValue::Unknown => unknown += 1,
                CellValue::Missing => missing += 1,
            }
        }
        out.insert(
            feature.clone(),
            CoverageBreakdown {
                coded: coded as f64 / n,
                unknown: unknown as f64 / n,
                missing: missing as f64 / n,
            },
        );
    }
    Ok(out)
}

/// The n features coded for the most languages, descending; ties broken by
/// lexicographic feature name.
pub fn select_most_frequent_features(
    table: &FeatureTable,
    n: usize,
) -> Result<Vec<String>, EvalError> {
    if n == 0 {
        return Err(EvalError::ZeroN);
    }
    if n > table.features().len() {
        return Err(EvalError::NTooLarge {
            n,
            available: table.features().len(),
        });
    }
    let mut ranked: Vec<(usize, &String)> = table
        .features()
        .iter()
        .map(|feature| {
            let coded = table
                .languages()
                .filter(|lang| table.cell(lang, feature).is_coded())
                .count();
            (coded, feature)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(ranked.into_iter().take(n).map(|(_, f)| f.clone()).collect())
}

/// Languages coded for every feature in the subset. An empty subset places
/// no constraint, so every language qualifies.
pub fn comparable_languages(
    table: &FeatureTable,
    features: &[String],
) -> BTreeSet<LanguageId> {
    table
        .languages()
        .filter(|lang| {
            features
                .iter()
                .all(|feature| table.cell(lang, feature).is_coded())
        })
        .cloned()
        .collect()
}

/// For each n, how many languages remain comparable when representing them
/// by the n most frequent features. Monotone non-increasing in n.
pub fn feature_tradeoff_curve(
    table: &FeatureTable,
    n_values: &[usize],
) -> Result<Vec<(usize, usize)>, EvalError> {
    if n_values.windows(2).any(|w| w[0] > w[1]) {
        return Err(EvalError::UnsortedNValues);
    }
    let mut curve = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let subset = select_most_frequent_features(table, n)?;
        curve.push((n, comparable_languages(table, &subset).len()));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LineagePath;

    fn lang(s: &str) -> LanguageId {
        LanguageId::new(s).unwrap()
    }

    fn profile(code: &str, family: &str) -> (LanguageId, LanguageProfile) {
        let id = lang(code);
        let path = LineagePath::new(vec![family.to_string(), format!("leaf-{code}")]).unwrap();
        (id.clone(), LanguageProfile::new(id, path))
    }

    fn lineages_of(pairs: &[(&str, &str)]) -> Lineages {
        pairs.iter().map(|(c, f)| profile(c, f)).collect()
    }

    fn matrix(index: &[&str], kind: MatrixKind, off_diagonal: Vec<f64>) -> DistanceMatrix {
        DistanceMatrix::from_pairs(
            index.iter().map(|s| lang(s)).collect(),
            kind,
            "test",
            off_diagonal,
        )
        .unwrap()
    }

    #[test]
    fn k_nearest_basic_and_full() {
        let m = matrix(&["a", "b", "c"], MatrixKind::Distance, vec![0.2, 0.9, 0.1]);
        assert_eq!(
            k_nearest(&m, &lang("a"), 2).unwrap(),
            vec![lang("b"), lang("c")]
        );
        // k = n - 1 returns all other languages.
        assert_eq!(k_nearest(&m, &lang("b"), 2).unwrap().len(), 2);
    }

    #[test]
    fn k_nearest_breaks_ties_lexicographically() {
        // b and c are both at distance 0.5 from a.
        let m = matrix(&["a", "c", "b"], MatrixKind::Distance, vec![0.5, 0.5, 0.3]);
        assert_eq!(
            k_nearest(&m, &lang("a"), 2).unwrap(),
            vec![lang("b"), lang("c")]
        );
    }

    #[test]
    fn k_nearest_similarity_sorts_descending() {
        let m = matrix(&["a", "b", "c"], MatrixKind::Similarity, vec![0.2, 0.9, 0.5]);
        assert_eq!(
            k_nearest(&m, &lang("a"), 2).unwrap(),
            vec![lang("c"), lang("b")]
        );
    }

    #[test]
    fn k_nearest_errors() {
        let m = matrix(&["a", "b"], MatrixKind::Distance, vec![0.5]);
        assert_eq!(
            k_nearest(&m, &lang("zz"), 1),
            Err(EvalError::UnknownLanguage(lang("zz")))
        );
        assert_eq!(
            k_nearest(&m, &lang("a"), 2),
            Err(EvalError::KTooLarge { k: 2, max: 1 })
        );
        assert_eq!(k_nearest(&m, &lang("a"), 0), Err(EvalError::ZeroK));
    }

    #[test]
    fn k_nearest_is_permutation_invariant() {
        let m1 = matrix(&["a", "b", "c"], MatrixKind::Distance, vec![0.2, 0.9, 0.1]);
        // Same pairwise values with a permuted index: (b,c)=0.1, (b,a)=0.2, (c,a)=0.9.
        let m2 = matrix(&["b", "c", "a"], MatrixKind::Distance, vec![0.1, 0.2, 0.9]);
        for l in ["a", "b", "c"] {
            assert_eq!(
                k_nearest(&m1, &lang(l), 2).unwrap(),
                k_nearest(&m2, &lang(l), 2).unwrap()
            );
        }
    }

    /// 5 languages; a's neighbors in distance order are b, c, d, e.
    fn ladder_matrix() -> DistanceMatrix {
        // pairs in order: (a,b) (a,c) (a,d) (a,e) (b,c) (b,d) (b,e) (c,d) (c,e) (d,e)
        matrix(
            &["a", "b", "c", "d", "e"],
            MatrixKind::Distance,
            vec![0.1, 0.2, 0.3, 0.4, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9],
        )
    }

    #[test]
    fn majority_requires_strict_majority() {
        let m = ladder_matrix();
        // k=4: 3 of {b,c,d,e} in a's family -> true.
        let lin = lineages_of(&[("a", "F"), ("b", "F"), ("c", "F"), ("d", "F"), ("e", "G")]);
        assert!(majority_family_correct(&m, &lang("a"), 4, &lin).unwrap());
        // k=4: exactly 2 same-family is not a strict majority.
        let lin = lineages_of(&[("a", "F"), ("b", "F"), ("c", "F"), ("d", "G"), ("e", "G")]);
        assert!(!majority_family_correct(&m, &lang("a"), 4, &lin).unwrap());
        // k=2: 1 same-family is not > 1.
        assert!(!majority_family_correct(&m, &lang("a"), 2, &lin).unwrap());
    }

    #[test]
    fn majority_reports_missing_lineage() {
        let m = ladder_matrix();
        let lin = lineages_of(&[("a", "F"), ("b", "F")]);
        assert_eq!(
            majority_family_correct(&m, &lang("a"), 2, &lin),
            Err(EvalError::MissingLineage(lang("c")))
        );
    }

    /// Three families of four languages each; all within-family distances
    /// are strictly below all cross-family distances.
    fn clustered() -> (DistanceMatrix, Lineages, Vec<String>) {
        let codes: Vec<String> = (0..12).map(|i| format!("l{i:02}")).collect();
        let family = |i: usize| format!("FAM{}", i / 4);
        let index: Vec<LanguageId> = codes.iter().map(|c| lang(c)).collect();
        let mut off = Vec::new();
        for i in 0..12 {
            for j in (i + 1)..12 {
                off.push(if family(i) == family(j) { 0.1 } else { 0.8 });
            }
        }
        let m = DistanceMatrix::from_pairs(index, MatrixKind::Distance, "test", off).unwrap();
        let lineages: Lineages = codes
            .iter()
            .enumerate()
            .map(|(i, c)| profile(c, &family(i)))
            .collect();
        let families = vec!["FAM0".into(), "FAM1".into(), "FAM2".into()];
        (m, lineages, families)
    }

    #[test]
    fn clustered_fixture_has_perfect_accuracy() {
        let (m, lineages, families) = clustered();
        for k in [2usize, 3] {
            let report = family_accuracy(&m, &lineages, &families, k).unwrap();
            assert_eq!(report.overall, 1.0);
            assert_eq!(report.overall_n, 12);
            for (_, acc) in &report.per_family {
                assert_eq!(acc.accuracy, 1.0);
                assert_eq!(acc.n_languages, 4);
            }
        }
    }

    #[test]
    fn accuracy_invariant_under_monotone_transform() {
        let (m, lineages, families) = clustered();
        let squared: Vec<f64> = {
            let mut off = Vec::new();
            for i in 0..m.len() {
                for j in (i + 1)..m.len() {
                    let d = m.get(i, j);
                    off.push(d * d);
                }
            }
            off
        };
        let m2 =
            DistanceMatrix::from_pairs(m.index().to_vec(), MatrixKind::Distance, "test", squared)
                .unwrap();
        for k in [2usize, 3, 5] {
            let a = family_accuracy(&m, &lineages, &families, k).unwrap();
            let b = family_accuracy(&m2, &lineages, &families, k).unwrap();
            assert_eq!(a.per_family, b.per_family);
            assert_eq!(a.overall, b.overall);
        }
    }

    #[test]
    fn accuracy_rejects_empty_family() {
        let (m, lineages, _) = clustered();
        let err = family_accuracy(&m, &lineages, &["NOPE".into()], 2).unwrap_err();
        assert_eq!(err, EvalError::EmptyFamily("NOPE".into()));
    }

    #[test]
    fn clustered_distribution_is_diagonal() {
        let (m, lineages, families) = clustered();
        let report = neighbor_family_distribution(&m, &lineages, &families, 3).unwrap();
        for (i, (source, row)) in report.rows.iter().enumerate() {
            for (j, pct) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(*pct, 100.0, "diagonal for {source}");
                } else {
                    assert_eq!(*pct, 0.0);
                }
            }
        }
    }

    #[test]
    fn equal_distances_distribution_matches_exhaustive_oracle() {
        // Two families of equal size with all distances equal: neighbors
        // are decided purely by the lexicographic tie-break, and the rows
        // come out close to the family proportions (minus self).
        let codes = ["a0", "b0", "a1", "b1", "a2", "b2"];
        let n = codes.len();
        let m = matrix(
            &codes,
            MatrixKind::Distance,
            vec![0.5; n * (n - 1) / 2],
        );
        let lineages = lineages_of(&[
            ("a0", "A"),
            ("a1", "A"),
            ("a2", "A"),
            ("b0", "B"),
            ("b1", "B"),
            ("b2", "B"),
        ]);
        let families = vec!["A".to_string(), "B".to_string()];
        let k = 3;
        let report = neighbor_family_distribution(&m, &lineages, &families, k).unwrap();

        // Oracle: sorted ids minus self, first k, count by family prefix.
        for (fi, family_prefix) in ["a", "b"].iter().enumerate() {
            let mut expected = vec![0.0f64; 2];
            let members: Vec<&str> = codes
                .iter()
                .copied()
                .filter(|c| c.starts_with(family_prefix))
                .collect();
            for member in &members {
                let mut others: Vec<&str> =
                    codes.iter().copied().filter(|c| c != member).collect();
                others.sort_unstable();
                for neighbor in &others[..k] {
                    let idx = usize::from(neighbor.starts_with('b'));
                    expected[idx] += 100.0 / k as f64;
                }
            }
            for e in &mut expected {
                *e /= members.len() as f64;
            }
            assert_eq!(report.rows[fi].1, expected);
        }
    }

    fn coverage_table() -> (FeatureTable, Lineages) {
        let mut t = FeatureTable::new(vec!["F1".into(), "F2".into(), "F3".into()]).unwrap();
        t.insert_row(
            lang("a0"),
            vec![CellValue::Coded(1), CellValue::Coded(0), CellValue::Unknown],
        )
        .unwrap();
        t.insert_row(
            lang("a1"),
            vec![CellValue::Coded(0), CellValue::Missing, CellValue::Unknown],
        )
        .unwrap();
        let lineages = lineages_of(&[("a0", "A"), ("a1", "A")]);
        (t, lineages)
    }

    #[test]
    fn coverage_counts_only_coded() {
        let (t, lineages) = coverage_table();
        let coverage = feature_coverage(&t, &lineages, "A").unwrap();
        assert_eq!(coverage["F1"], 1.0);
        assert_eq!(coverage["F2"], 0.5);
        assert_eq!(coverage["F3"], 0.0);
        let detail = feature_coverage_detailed(&t, &lineages, "A").unwrap();
        assert_eq!(detail["F3"].unknown, 1.0);
        assert_eq!(detail["F3"].missing, 0.0);
        assert_eq!(detail["F2"].missing, 0.5);
    }

    #[test]
    fn coverage_rejects_family_absent_from_table() {
        let (t, lineages) = coverage_table();
        assert_eq!(
            feature_coverage(&t, &lineages, "B"),
            Err(EvalError::EmptyFamily("B".into()))
        );
    }

    /// Coded counts per feature: Fa=5, Fc=3, Fb=3, Fd=1.
    fn counted_table() -> FeatureTable {
        let mut t = FeatureTable::new(vec![
            "Fa".into(),
            "Fc".into(),
            "Fb".into(),
            "Fd".into(),
        ])
        .unwrap();
        for i in 0..5 {
            let row = vec![
                CellValue::Coded(1),
                if i < 3 { CellValue::Coded(1) } else { CellValue::Missing },
                if i < 3 { CellValue::Coded(1) } else { CellValue::Unknown },
                if i < 1 { CellValue::Coded(1) } else { CellValue::Missing },
            ];
            t.insert_row(lang(&format!("l{i}")), row).unwrap();
        }
        t
    }

    #[test]
    fn select_ranks_by_count_then_name() {
        let t = counted_table();
        assert_eq!(
            select_most_frequent_features(&t, 4).unwrap(),
            vec!["Fa", "Fb", "Fc", "Fd"]
        );
        // The two 3-count features tie; the lexicographically first wins.
        assert_eq!(select_most_frequent_features(&t, 2).unwrap(), vec!["Fa", "Fb"]);
        assert_eq!(select_most_frequent_features(&t, 0), Err(EvalError::ZeroN));
        assert_eq!(
            select_most_frequent_features(&t, 5),
            Err(EvalError::NTooLarge { n: 5, available: 4 })
        );
    }

    #[test]
    fn comparable_languages_cases() {
        let t = counted_table();
        let all: Vec<String> = t.features().to_vec();
        assert!(comparable_languages(&t, &all).is_empty() == false);
        // Fa+Fd coded together only for l0.
        let subset = vec!["Fa".to_string(), "Fd".to_string()];
        let langs = comparable_languages(&t, &subset);
        assert_eq!(langs.into_iter().collect::<Vec<_>>(), vec![lang("l0")]);
        // Empty subset constrains nothing.
        assert_eq!(comparable_languages(&t, &[]).len(), 5);

        let mut empty_t = FeatureTable::new(vec!["F1".into(), "F2".into()]).unwrap();
        empty_t
            .insert_row(lang("x"), vec![CellValue::Coded(1), CellValue::Missing])
            .unwrap();
        empty_t
            .insert_row(lang("y"), vec![CellValue::Missing, CellValue::Coded(1)])
            .unwrap();
        let subset: Vec<String> = empty_t.features().to_vec();
        assert!(comparable_languages(&empty_t, &subset).is_empty());
    }

    #[test]
    fn tradeoff_curve_is_non_increasing() {
        let t = counted_table();
        let curve = feature_tradeoff_curve(&t, &[1, 2, 3, 4]).unwrap();
        assert_eq!(curve[0], (1, 5));
        for w in curve.windows(2) {
            assert!(w[1].1 <= w[0].1, "{curve:?}");
        }
        assert_eq!(
            feature_tradeoff_curve(&t, &[3, 1]),
            Err(EvalError::UnsortedNValues)
        );
    }
}
