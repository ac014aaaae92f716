//! Two-pass concept alignment over a verse-aligned corpus.
//!
//! For a concept given by query strings in a source language, the forward
//! pass greedily retrieves the target-language character n-grams most
//! associated with the verses containing the query; the backward pass runs
//! the same search in the opposite direction and retrieves the source
//! n-grams most associated with the accepted target strings. Association is
//! measured by the chi-square statistic of the 2x2 verse-presence table,
//! clamped to positive association only; chi-square is the standard
//! co-occurrence test and its 95% critical value (3.84 at one degree of
//! freedom) doubles as the default acceptance threshold.
//!
//! Candidate strings are character n-grams within whitespace-delimited
//! tokens, with a word-boundary marker prepended and appended, so a
//! candidate can pin itself to a token edge. The verse universe for a
//! language pair is the set of verses where both languages have text, so
//! partial corpus coverage does not create spurious negative evidence.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ingest::VerseAlignedCorpus;
use crate::model::LanguageId;

/// Word-boundary marker wrapped around each token before n-gram extraction.
pub const BOUNDARY_MARKER: char = '\u{00B7}';

/// Reserved label for dimensions with no associated n-gram; those
/// dimensions are always zero.
pub const UNUSED_LABEL: &str = "<unused>";

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ConceptError {
    #[error("query strings for concept {0:?} must be nonempty")]
    EmptyQueryString(String),
    #[error(
        "concept {concept:?}: no query string occurs in {source_lang} \
         within the verses shared with {target}"
    )]
    ConceptNotInSource {
        concept: String,
        source_lang: LanguageId,
        target: LanguageId,
    },
    #[error("got {found} dimension labels, config says {expected} dims per concept")]
    LabelArity { expected: usize, found: usize },
}

/// Search parameters for the forward and backward passes.
#[derive(Debug, Clone)]
pub struct ConceptualizerConfig {
    /// Smallest candidate n-gram length, in chars including the marker.
    pub min_n: usize,
    /// Largest candidate n-gram length.
    pub max_n: usize,
    /// A candidate must occur in at least this many universe verses.
    pub min_count: usize,
    /// Greedy search stops when the best association falls below this.
    pub min_score: f64,
    /// Iteration bound for the forward pass.
    pub max_targets: usize,
    /// Vector dimensionality; the backward pass retrieves up to
    /// `dims_per_concept - 1` source n-grams.
    pub dims_per_concept: usize,
}

impl Default for ConceptualizerConfig {
    fn default() -> Self {
        ConceptualizerConfig {
            min_n: 1,
            max_n: 10,
            min_count: 2,
            min_score: 3.84,
            max_targets: 5,
            dims_per_concept: 100,
        }
    }
}

/// A concept to align: its name and the strings realizing it in the source
/// language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptQuery {
    pub concept_name: String,
    pub source_lang: LanguageId,
    pub source_strings: BTreeSet<String>,
}

impl ConceptQuery {
    pub fn new(
        concept_name: impl Into<String>,
        source_lang: LanguageId,
        source_strings: impl IntoIterator<Item = String>,
    ) -> Result<Self, ConceptError> {
        let concept_name = concept_name.into();
        let source_strings: BTreeSet<String> = source_strings
            .into_iter()
            .map(|s| s.trim().to_string())
            .collect();
        if source_strings.is_empty() || source_strings.iter().any(String::is_empty) {
            return Err(ConceptError::EmptyQueryString(concept_name));
        }
        Ok(ConceptQuery {
            concept_name,
            source_lang,
            source_strings,
        })
    }
}

/// Result of both passes for one (concept, target language) cell; both
/// lists are sorted by score descending, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    pub target_strings: Vec<(String, f64)>,
    pub backward_concepts: Vec<(String, f64)>,
}

/// Chi-square statistic of the 2x2 presence/absence contingency table of
/// `a` and `b` over the universe, clamped to 0 when any marginal is
/// degenerate or the observed co-occurrence does not exceed expectation
/// (only positive association counts).
pub fn association_score<T: Ord>(
    a: &BTreeSet<T>,
    b: &BTreeSet<T>,
    universe: &BTreeSet<T>,
) -> f64 {
    let n_a = a.iter().filter(|x| universe.contains(x)).count();
    let n_b = b.iter().filter(|x| universe.contains(x)).count();
    let n_ab = a
        .intersection(b)
        .filter(|x| universe.contains(x))
        .count();
    chi_square_counts(n_a, n_b, n_ab, universe.len())
}

fn chi_square_counts(n_a: usize, n_b: usize, n_ab: usize, n: usize) -> f64 {
    if n_a == 0 || n_b == 0 || n_a == n || n_b == n {
        return 0.0;
    }
    let expected = n_a as f64 * n_b as f64 / n as f64;
    if n_ab as f64 <= expected {
        return 0.0;
    }
    let n11 = n_ab as f64;
    let n10 = (n_a - n_ab) as f64;
    let n01 = (n_b - n_ab) as f64;
    let n00 = (n - n_a - n_b + n_ab) as f64;
    let det = n11 * n00 - n10 * n01;
    n as f64 * det * det
        / (n_a as f64 * n_b as f64 * (n - n_a) as f64 * (n - n_b) as f64)
}

/// Tokens of one verse, each wrapped in boundary markers.
fn wrapped_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|tok| format!("{BOUNDARY_MARKER}{tok}{BOUNDARY_MARKER}"))
        .collect()
}

/// Read-only view of the verses shared by a language pair.
struct PairContext {
    universe: usize,
    source_tokens: Vec<Vec<String>>,
    target_tokens: Vec<Vec<String>>,
}

impl PairContext {
    fn build(corpus: &VerseAlignedCorpus, source: &LanguageId, target: &LanguageId) -> Self {
        let mut source_tokens = Vec::new();
        let mut target_tokens = Vec::new();
        for (_, texts) in corpus.iter() {
            if let (Some(s), Some(t)) = (texts.get(source), texts.get(target)) {
                source_tokens.push(wrapped_tokens(s));
                target_tokens.push(wrapped_tokens(t));
            }
        }
        PairContext {
            universe: source_tokens.len(),
            source_tokens,
            target_tokens,
        }
    }
}

/// Verse indices where any of the strings occurs inside a wrapped token.
fn matching_verses(tokens_per_verse: &[Vec<String>], strings: &BTreeSet<String>) -> Vec<u32> {
    tokens_per_verse
        .iter()
        .enumerate()
        .filter(|(_, tokens)| {
            tokens
                .iter()
                .any(|tok| strings.iter().any(|s| tok.contains(s.as_str())))
        })
        .map(|(v, _)| v as u32)
        .collect()
}

/// All candidate n-grams with their verse occurrence sets, filtered to
/// those occurring in at least `min_count` verses.
fn ngram_occurrences(
    tokens_per_verse: &[Vec<String>],
    config: &ConceptualizerConfig,
) -> BTreeMap<String, Vec<u32>> {
    let mut occurrences: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for (v, tokens) in tokens_per_verse.iter().enumerate() {
        let mut seen: BTreeSet<String> = BTreeSet::new();
        for token in tokens {
            let chars: Vec<char> = token.chars().collect();
            for n in config.min_n..=config.max_n.min(chars.len()) {
                for window in chars.windows(n) {
                    seen.insert(window.iter().collect());
                }
            }
        }
        for gram in seen {
            occurrences.entry(gram).or_default().push(v as u32);
        }
    }
    occurrences.retain(|_, verses| verses.len() >= config.min_count);
    occurrences
}

/// Greedy association loop: repeatedly accept the candidate with the
/// highest chi-square against the uncovered seed verses (ties broken by the
/// lexicographically smaller n-gram), remove the verses it covers, and stop
/// when the best score drops below `min_score`, the seed is exhausted, or
/// `max_picks` is reached. Returns picks in acceptance order.
fn greedy_associate(
    candidates: &BTreeMap<String, Vec<u32>>,
    seed: &[u32],
    universe: usize,
    max_picks: usize,
    min_score: f64,
) -> Vec<(String, f64)> {
    let mut covered = vec![false; universe];
    let mut remaining = 0usize;
    for &v in seed {
        if !covered[v as usize] {
            covered[v as usize] = true;
            remaining += 1;
        }
    }
    let mut picks: Vec<(String, f64)> = Vec::new();
    let mut picked: BTreeSet<&str> = BTreeSet::new();
    for _ in 0..max_picks {
        if remaining == 0 {
            break;
        }
        let mut best: Option<(f64, &String, &Vec<u32>)> = None;
        for (gram, verses) in candidates {
            if picked.contains(gram.as_str()) {
                continue;
            }
            let overlap = verses.iter().filter(|&&v| covered[v as usize]).count();
            let score = chi_square_counts(verses.len(), remaining, overlap, universe);
            // Strict > keeps the lexicographically smallest of tied grams,
            // because the map iterates in ascending key order.
            if best.map_or(true, |(s, _, _)| score > s) {
                best = Some((score, gram, verses));
            }
        }
        let Some((score, gram, verses)) = best else { break };
        if score < min_score {
            break;
        }
        picks.push((gram.clone(), score));
        picked.insert(gram.as_str());
        for &v in verses {
            if covered[v as usize] {
                covered[v as usize] = false;
                remaining -= 1;
            }
        }
    }
    picks
}

fn sort_by_score(items: &mut [(String, f64)]) {
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

/// Forward pass: the target-language n-grams most associated with the
/// verses realizing the concept in the source language, sorted by score.
pub fn forward_pass(
    corpus: &VerseAlignedCorpus,
    query: &ConceptQuery,
    target: &LanguageId,
    config: &ConceptualizerConfig,
) -> Result<Vec<(String, f64)>, ConceptError> {
    let ctx = PairContext::build(corpus, &query.source_lang, target);
    let seed = matching_verses(&ctx.source_tokens, &query.source_strings);
    if seed.is_empty() {
        return Err(ConceptError::ConceptNotInSource {
            concept: query.concept_name.clone(),
            source_lang: query.source_lang.clone(),
            target: target.clone(),
        });
    }
    let candidates = ngram_occurrences(&ctx.target_tokens, config);
    let mut picks = greedy_associate(
        &candidates,
        &seed,
        ctx.universe,
        config.max_targets,
        config.min_score,
    );
    sort_by_score(&mut picks);
    Ok(picks)
}

/// Backward pass: the source-language n-grams most associated with the
/// verses containing any accepted target string. Returns up to
/// `dims_per_concept - 1` n-grams, sorted by score; empty when the target
/// strings cover no verses.
pub fn backward_pass(
    corpus: &VerseAlignedCorpus,
    target_strings: &[(String, f64)],
    target: &LanguageId,
    source_lang: &LanguageId,
    config: &ConceptualizerConfig,
) -> Vec<(String, f64)> {
    if target_strings.is_empty() {
        return Vec::new();
    }
    let ctx = PairContext::build(corpus, source_lang, target);
    let strings: BTreeSet<String> = target_strings.iter().map(|(g, _)| g.clone()).collect();
    let seed = matching_verses(&ctx.target_tokens, &strings);
    if seed.is_empty() {
        return Vec::new();
    }
    let candidates = ngram_occurrences(&ctx.source_tokens, config);
    let mut picks = greedy_associate(
        &candidates,
        &seed,
        ctx.universe,
        config.dims_per_concept.saturating_sub(1),
        config.min_score,
    );
    sort_by_score(&mut picks);
    picks
}

/// Run both passes for one (concept, target) cell.
pub fn conceptualize(
    corpus: &VerseAlignedCorpus,
    query: &ConceptQuery,
    target: &LanguageId,
    config: &ConceptualizerConfig,
) -> Result<AssociationResult, ConceptError> {
    let target_strings = forward_pass(corpus, query, target, config)?;
    let backward_concepts =
        backward_pass(corpus, &target_strings, target, &query.source_lang, config);
    Ok(AssociationResult {
        target_strings,
        backward_concepts,
    })
}

/// Whether a source n-gram is part of the concept's own realization, i.e. a
/// substring of some query string wrapped in boundary markers. Such grams
/// belong to dimension 1, not to the associated-concept dimensions.
fn is_own_realization(gram: &str, query: &ConceptQuery) -> bool {
    query.source_strings.iter().any(|q| {
        let wrapped = format!("{BOUNDARY_MARKER}{q}{BOUNDARY_MARKER}");
        wrapped.contains(gram)
    })
}

/// Fix the globally shared dimension labels for one concept: label 1 is the
/// concept itself, labels 2..d are the source n-grams with the highest
/// total backward score summed over the reference languages (the concept's
/// own realization excluded), the remainder padded with [`UNUSED_LABEL`].
pub fn fix_dimension_labels(
    corpus: &VerseAlignedCorpus,
    query: &ConceptQuery,
    reference_langs: &BTreeSet<LanguageId>,
    config: &ConceptualizerConfig,
) -> Vec<String> {
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for target in reference_langs {
        let Ok(forward) = forward_pass(corpus, query, target, config) else {
            continue;
        };
        let backward = backward_pass(corpus, &forward, target, &query.source_lang, config);
        for (gram, score) in backward {
            if is_own_realization(&gram, query) {
                continue;
            }
            *sums.entry(gram).or_insert(0.0) += score;
        }
    }
    let mut ranked: Vec<(String, f64)> = sums.into_iter().collect();
    sort_by_score(&mut ranked);

    let mut labels = Vec::with_capacity(config.dims_per_concept);
    labels.push(query.concept_name.clone());
    labels.extend(
        ranked
            .into_iter()
            .take(config.dims_per_concept.saturating_sub(1))
            .map(|(gram, _)| gram),
    );
    while labels.len() < config.dims_per_concept {
        labels.push(UNUSED_LABEL.to_string());
    }
    labels.truncate(config.dims_per_concept);
    labels
}

/// Build the concept's vector for one target language: dimension 1 holds
/// the forward score of the concept's own realization, the labeled
/// dimensions hold the backward scores of their n-grams, and the whole
/// block is normalized by its maximum raw score (an all-zero block stays
/// all zeros).
pub fn build_concept_vector(
    corpus: &VerseAlignedCorpus,
    query: &ConceptQuery,
    target: &LanguageId,
    dimension_labels: &[String],
    config: &ConceptualizerConfig,
) -> Result<Vec<f64>, ConceptError> {
    if dimension_labels.len() != config.dims_per_concept {
        return Err(ConceptError::LabelArity {
            expected: config.dims_per_concept,
            found: dimension_labels.len(),
        });
    }
    let forward = forward_pass(corpus, query, target, config)?;
    let backward = backward_pass(corpus, &forward, target, &query.source_lang, config);
    let scores: BTreeMap<&str, f64> = backward
        .iter()
        .map(|(gram, score)| (gram.as_str(), *score))
        .collect();

    let mut raw = vec![0.0; config.dims_per_concept];
    raw[0] = forward.first().map_or(0.0, |(_, score)| *score);
    for (i, label) in dimension_labels.iter().enumerate().skip(1) {
        if label == UNUSED_LABEL {
            continue;
        }
        if let Some(&score) = scores.get(label.as_str()) {
            raw[i] = score;
        }
    }
    let max = raw.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        for v in &mut raw {
            *v /= max;
        }
    }
    Ok(raw)
}
