//! Latent diversity: genre embeddings from tag co-occurrence, language
//! typology vectors, the normalized mean-deviation metric, and bootstrap
//! counterfactual circuits filtered by producer-country thresholds.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{Attribute, MissingPolicy};
use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::ingest::{FilmIdentity, ScreeningRecord};
use crate::socioeconomic::CountryProfile;

pub const DEFAULT_GENRE_DIMENSION: usize = 8;
pub const DEFAULT_REPEATS: usize = 100;
const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Genre,
    Language,
}

/// Labelled vectors of one fixed dimension.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingSpace {
    pub kind: SpaceKind,
    pub dimension: usize,
    pub labels: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
    /// Largest pairwise Euclidean distance among `vectors`.
    pub max_distance: f64,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl EmbeddingSpace {
    pub fn new(kind: SpaceKind, labels: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptySample);
        }
        if labels.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                found: labels.len(),
            });
        }
        let dimension = vectors[0].len();
        if let Some(v) = vectors.iter().find(|v| v.len() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: v.len(),
            });
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite vector component".into()));
        }
        let max_distance = (0..vectors.len())
            .into_par_iter()
            .map(|i| {
                vectors[i + 1..]
                    .iter()
                    .map(|w| euclidean(&vectors[i], w))
                    .fold(0.0f64, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(EmbeddingSpace {
            kind,
            dimension,
            labels,
            vectors,
            max_distance,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.position(label).map(|i| self.vectors[i].as_slice())
    }

    pub fn distance(&self, a: &str, b: &str) -> Option<f64> {
        Some(euclidean(self.get(a)?, self.get(b)?))
    }
}

/// Distinct tag sets per film, one entry per film identity.
fn film_tag_sets(records: &[ScreeningRecord]) -> Vec<BTreeSet<&str>> {
    let mut films: BTreeMap<FilmIdentity, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        films
            .entry(r.identity())
            .or_default()
            .extend(r.genre_tags.iter().map(String::as_str));
    }
    films.into_values().collect()
}

/// Positive pointwise mutual information over film-level tag co-occurrence,
/// diagonal included. Returns the sorted tag list and the matrix.
pub fn ppmi_matrix(records: &[ScreeningRecord]) -> Result<(Vec<String>, DMatrix<f64>)> {
    let films = film_tag_sets(records);
    let tags: Vec<String> = films
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(String::from)
        .collect();
    if tags.len() < 2 || !films.iter().any(|f| f.len() >= 2) {
        return Err(Error::DegenerateCooccurrence(format!(
            "{} distinct tags, no film carries two or more",
            tags.len()
        )));
    }
    let pos: HashMap<&str, usize> = tags
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let n = tags.len();
    let mut counts = DMatrix::<f64>::zeros(n, n);
    for film in &films {
        let idx: Vec<usize> = film.iter().map(|t| pos[t]).collect();
        for &a in &idx {
            for &b in &idx {
                counts[(a, b)] += 1.0;
            }
        }
    }
    let total: f64 = counts.sum();
    let marginal: Vec<f64> = (0..n).map(|i| counts.row(i).sum() / total).collect();
    let ppmi = DMatrix::from_fn(n, n, |a, b| {
        let joint = counts[(a, b)] / total;
        if joint == 0.0 {
            0.0
        } else {
            (joint / (marginal[a] * marginal[b])).ln().max(0.0)
        }
    });
    Ok((tags, ppmi))
}

/// Spectral rank-`dimension` factorization of the PPMI matrix: each tag's
/// vector is its row of `U * sqrt(max(Λ, 0))` over the largest eigenvalues.
/// Eigenvector signs are fixed so the largest-magnitude component is positive.
pub fn train_genre_embeddings(
    records: &[ScreeningRecord],
    dimension: usize,
) -> Result<EmbeddingSpace> {
    if dimension == 0 {
        return Err(Error::InvalidInput(
            "embedding dimension must be positive".into(),
        ));
    }
    let (tags, ppmi) = ppmi_matrix(records)?;
    let n = tags.len();
    let eigen = SymmetricEigen::new(ppmi);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .total_cmp(&eigen.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut vectors = vec![vec![0.0; dimension]; n];
    for (k, &col) in order.iter().take(dimension).enumerate() {
        let lambda = eigen.eigenvalues[col].max(0.0);
        let u = eigen.eigenvectors.column(col);
        let pivot = (0..n).fold(0, |best, i| {
            if u[i].abs() > u[best].abs() + 1e-12 {
                i
            } else {
                best
            }
        });
        let sign = if u[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = lambda.sqrt() * sign;
        for i in 0..n {
            vectors[i][k] = u[i] * scale;
        }
    }
    EmbeddingSpace::new(SpaceKind::Genre, tags, vectors)
}

/// Reads `language_id, v1, ..., vd`. Ids are lowercased to match records.
pub fn load_language_vectors(path: &Path) -> Result<EmbeddingSpace> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_language_vectors_from_reader(file, &path.display().to_string())
}

pub fn load_language_vectors_from_reader<R: Read>(
    reader: R,
    source_name: &str,
) -> Result<EmbeddingSpace> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::csv(source_name, e))?
        .clone();
    if headers.get(0) != Some("language_id") {
        return Err(Error::Schema {
            source_name: source_name.to_string(),
            missing: vec!["language_id".into()],
        });
    }
    let dimension = headers.len() - 1;
    let mut labels = Vec::new();
    let mut vectors = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(source_name, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() - 1 != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: rec.len() - 1,
            });
        }
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Malformed {
                source_name: source_name.to_string(),
                line,
                message: e.to_string(),
            })?;
        labels.push(rec[0].to_lowercase());
        vectors.push(values);
    }
    if vectors.is_empty() {
        return Err(Error::Malformed {
            source_name: source_name.to_string(),
            line: 1,
            message: "no language vectors".into(),
        });
    }
    EmbeddingSpace::new(SpaceKind::Language, labels, vectors)
}

/// Diversity of a weighted vector sample: the weighted mean Euclidean
/// deviation from the weighted centroid, divided by half the space's maximum
/// pairwise distance and capped at 1. Two equal-weight points at the maximum
/// distance score exactly 1.
pub fn diversity(samples: &[(&[f64], f64)], space: &EmbeddingSpace) -> Result<f64> {
    diversity_with_max(samples, space.max_distance)
}

pub fn diversity_with_max(samples: &[(&[f64], f64)], max_distance: f64) -> Result<f64> {
    let weight: f64 = samples.iter().map(|(_, w)| w).sum();
    if samples.is_empty() || weight.is_nan() || weight <= 0.0 {
        return Err(Error::EmptySample);
    }
    let dim = samples[0].0.len();
    if let Some((v, _)) = samples.iter().find(|(v, _)| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    if samples.iter().any(|(_, w)| *w < 0.0) {
        return Err(Error::InvalidInput("negative sample weight".into()));
    }
    let first = samples[0].0;
    if samples.iter().all(|(v, _)| *v == first) {
        return Ok(0.0);
    }
    let mut mean = vec![0.0; dim];
    for (v, w) in samples {
        for (m, x) in mean.iter_mut().zip(v.iter()) {
            *m += w * x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= weight);
    let deviation = samples
        .iter()
        .map(|(v, w)| w * euclidean(v, &mean))
        .sum::<f64>()
        / weight;
    if deviation == 0.0 || max_distance <= 0.0 {
        return Ok(0.0);
    }
    Ok((deviation / (max_distance / 2.0)).min(1.0))
}

/// One film's contributions to the two latent metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct FilmVector {
    /// Mean of the film's known tag vectors.
    pub genre_vector: Option<Vec<f64>>,
    /// (language index in the space, weight); weights sum to 1 when non-empty.
    pub language_contributions: Vec<(usize, f64)>,
    /// Indices into [`Circuit::languages`] of every listed language.
    pub listed_languages: Vec<usize>,
}

/// All records of a circuit prepared for repeated diversity evaluation.
#[derive(Debug, Clone)]
pub struct Circuit<'a> {
    pub genre_space: &'a EmbeddingSpace,
    pub language_space: &'a EmbeddingSpace,
    pub films: Vec<FilmVector>,
    /// Distinct listed languages across the whole circuit, sorted.
    pub languages: Vec<String>,
    /// Records without any tag present in the genre space.
    pub skipped_genre: usize,
    /// Records without any language present in the language space.
    pub skipped_language: usize,
    /// Listed languages absent from the language space.
    pub unknown_languages: Vec<String>,
}

impl<'a> Circuit<'a> {
    pub fn new(
        records: &[ScreeningRecord],
        genre_space: &'a EmbeddingSpace,
        language_space: &'a EmbeddingSpace,
    ) -> Self {
        let languages: Vec<String> = records
            .iter()
            .flat_map(|r| r.languages.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lang_pos: HashMap<&str, usize> = languages
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut unknown = BTreeSet::new();
        let mut skipped_genre = 0;
        let mut skipped_language = 0;
        let films = records
            .iter()
            .map(|r| {
                let tag_vectors: Vec<&[f64]> = r
                    .genre_tags
                    .iter()
                    .filter_map(|t| genre_space.get(t))
                    .collect();
                let genre_vector = if tag_vectors.is_empty() {
                    skipped_genre += 1;
                    None
                } else {
                    let mut mean = vec![0.0; genre_space.dimension];
                    for v in &tag_vectors {
                        mean.iter_mut().zip(v.iter()).for_each(|(m, x)| *m += x);
                    }
                    let k = tag_vectors.len() as f64;
                    mean.iter_mut().for_each(|m| *m /= k);
                    Some(mean)
                };
                let known: Vec<usize> = r
                    .languages
                    .iter()
                    .filter_map(|l| {
                        let p = language_space.position(l);
                        if p.is_none() {
                            unknown.insert(l.clone());
                        }
                        p
                    })
                    .collect();
                if known.is_empty() {
                    skipped_language += 1;
                }
                let w = 1.0 / known.len().max(1) as f64;
                FilmVector {
                    genre_vector,
                    language_contributions: known.into_iter().map(|i| (i, w)).collect(),
                    listed_languages: r.languages.iter().map(|l| lang_pos[l.as_str()]).collect(),
                }
            })
            .collect();
        let unknown_languages: Vec<String> = unknown.into_iter().collect();
        if !unknown_languages.is_empty() {
            log::warn!(
                "{} listed languages have no typology vector and are skipped: {}",
                unknown_languages.len(),
                unknown_languages.join(", ")
            );
        }
        Circuit {
            genre_space,
            language_space,
            films,
            languages,
            skipped_genre,
            skipped_language,
            unknown_languages,
        }
    }

    pub fn len(&self) -> usize {
        self.films.len()
    }

    pub fn is_empty(&self) -> bool {
        self.films.is_empty()
    }

    /// Metrics over a multiset of film indices.
    pub fn evaluate(&self, sample: &[usize]) -> SampleMetrics {
        let genre: Vec<(&[f64], f64)> = sample
            .iter()
            .filter_map(|&i| self.films[i].genre_vector.as_deref().map(|v| (v, 1.0)))
            .collect();
        let language: Vec<(&[f64], f64)> = sample
            .iter()
            .flat_map(|&i| self.films[i].language_contributions.iter())
            .map(|&(l, w)| (self.language_space.vectors[l].as_slice(), w))
            .collect();
        let mut present = vec![false; self.languages.len()];
        for &i in sample {
            for &l in &self.films[i].listed_languages {
                present[l] = true;
            }
        }
        SampleMetrics {
            latent_genre: diversity(&genre, self.genre_space).ok(),
            latent_language: diversity(&language, self.language_space).ok(),
            language_count: present.iter().filter(|p| **p).count(),
        }
    }

    /// Point metrics of the unfiltered circuit.
    pub fn point_metrics(&self) -> SampleMetrics {
        let all: Vec<usize> = (0..self.len()).collect();
        self.evaluate(&all)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub latent_genre: Option<f64>,
    pub latent_language: Option<f64>,
    pub language_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below,
    Above,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Below => value < threshold,
            Comparison::Above => value > threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Below => "<",
            Comparison::Above => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub attribute: Attribute,
    pub op: Comparison,
    pub threshold: f64,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.attribute.as_str(),
            self.op.symbol(),
            self.threshold
        )
    }
}

/// Indices of records whose producers all satisfy `criterion` at the event
/// year, plus the number of records dropped for missing values (always zero
/// under [`MissingPolicy::Fail`]).
pub fn matching_indices(
    records: &[ScreeningRecord],
    criterion: &Criterion,
    profiles: &BTreeMap<CountryCode, CountryProfile>,
    missing: MissingPolicy,
) -> Result<(Vec<usize>, usize)> {
    let mut kept = Vec::new();
    let mut dropped = 0;
    'records: for (i, r) in records.iter().enumerate() {
        let mut all = true;
        for p in &r.producer_countries {
            let value = profiles
                .get(p)
                .ok_or_else(|| Error::UnknownCountry(p.clone()))
                .and_then(|prof| prof.value(criterion.attribute.selector(), r.event_year));
            match (value, missing) {
                (Ok(v), _) => all &= criterion.op.holds(v, criterion.threshold),
                (Err(_), MissingPolicy::Skip) => {
                    dropped += 1;
                    continue 'records;
                }
                (Err(e), MissingPolicy::Fail) => return Err(e),
            }
        }
        if all {
            kept.push(i);
        }
    }
    Ok((kept, dropped))
}

pub fn filter_by_criterion(
    records: &[ScreeningRecord],
    criterion: &Criterion,
    profiles: &BTreeMap<CountryCode, CountryProfile>,
    missing: MissingPolicy,
) -> Result<Vec<ScreeningRecord>> {
    let (idx, _) = matching_indices(records, criterion, profiles, missing)?;
    Ok(idx.into_iter().map(|i| records[i].clone()).collect())
}

/// Mean and normal-approximation 95% interval of the mean over repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Repeats contributing a defined value.
    pub n: usize,
}

impl Summary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = Z_95 * sd / n.sqrt();
        Some(Summary {
            mean,
            sd,
            ci_low: mean - half,
            ci_high: mean + half,
            n: values.len(),
        })
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityEstimate {
    /// `None` for the unfiltered circuit.
    pub criterion: Option<Criterion>,
    pub repeats: usize,
    pub seed: u64,
    pub sample_size: usize,
    pub filtered_records: usize,
    /// Records dropped because a producer lacked the attribute.
    pub missing_records: usize,
    /// Filtered records without a genre vector.
    pub skipped_genre: usize,
    /// Filtered records without a known language.
    pub skipped_language: usize,
    pub circuit_languages: usize,
    /// `None` when the filtered set is empty or the metric never defined.
    pub latent_genre: Option<Summary>,
    pub latent_language: Option<Summary>,
    pub language_count: Option<Summary>,
    pub language_count_pct: Option<Summary>,
}

impl DiversityEstimate {
    pub fn is_defined(&self) -> bool {
        self.filtered_records > 0
    }

    pub fn label(&self) -> String {
        self.criterion
            .map_or_else(|| "circuit".to_string(), |c| c.to_string())
    }
}

/// Seed of repeat `index` for a run seeded with `seed`.
pub fn repeat_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Each repeat draws `circuit.len()` films with replacement from `subset`.
/// Repeats run in parallel and are reduced in index order.
pub fn bootstrap_diversity(
    circuit: &Circuit<'_>,
    subset: &[usize],
    criterion: Option<Criterion>,
    missing_records: usize,
    repeats: usize,
    seed: u64,
) -> Result<DiversityEstimate> {
    if repeats == 0 {
        return Err(Error::InvalidInput("repeats must be at least 1".into()));
    }
    let n = circuit.len();
    let mut estimate = DiversityEstimate {
        criterion,
        repeats,
        seed,
        sample_size: n,
        filtered_records: subset.len(),
        missing_records,
        skipped_genre: subset
            .iter()
            .filter(|&&i| circuit.films[i].genre_vector.is_none())
            .count(),
        skipped_language: subset
            .iter()
            .filter(|&&i| circuit.films[i].language_contributions.is_empty())
            .count(),
        circuit_languages: circuit.languages.len(),
        latent_genre: None,
        latent_language: None,
        language_count: None,
        language_count_pct: None,
    };
    if subset.is_empty() || n == 0 {
        return Ok(estimate);
    }
    let metrics: Vec<SampleMetrics> = (0..repeats)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(repeat_seed(seed, i));
            let draw: Vec<usize> = (0..n)
                .map(|_| subset[rng.random_range(0..subset.len())])
                .collect();
            circuit.evaluate(&draw)
        })
        .collect();
    let genre: Vec<f64> = metrics.iter().filter_map(|m| m.latent_genre).collect();
    let language: Vec<f64> = metrics.iter().filter_map(|m| m.latent_language).collect();
    let counts: Vec<f64> = metrics.iter().map(|m| m.language_count as f64).collect();
    estimate.latent_genre = Summary::from_values(&genre);
    estimate.latent_language = Summary::from_values(&language);
    estimate.language_count = Summary::from_values(&counts);
    if !circuit.languages.is_empty() {
        let total = circuit.languages.len() as f64;
        let pct: Vec<f64> = counts.iter().map(|c| 100.0 * c / total).collect();
        estimate.language_count_pct = Summary::from_values(&pct);
    }
    Ok(estimate)
}

/// The unfiltered baseline followed by `<` and `>` estimates at each threshold.
#[allow(clippy::too_many_arguments)]
pub fn threshold_sweep(
    records: &[ScreeningRecord],
    circuit: &Circuit<'_>,
    attribute: Attribute,
    thresholds: &[f64],
    profiles: &BTreeMap<CountryCode, CountryProfile>,
    missing: MissingPolicy,
    repeats: usize,
    seed: u64,
) -> Result<Vec<DiversityEstimate>> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput(
            "thresholds must be sorted ascending".into(),
        ));
    }
    let all: Vec<usize> = (0..records.len()).collect();
    let mut out = vec![bootstrap_diversity(circuit, &all, None, 0, repeats, seed)?];
    for &threshold in thresholds {
        for op in [Comparison::Below, Comparison::Above] {
            let criterion = Criterion {
                attribute,
                op,
                threshold,
            };
            let (subset, dropped) = matching_indices(records, &criterion, profiles, missing)?;
            if subset.is_empty() {
                log::warn!("no records match {criterion}; estimate undefined");
            }
            out.push(bootstrap_diversity(
                circuit,
                &subset,
                Some(criterion),
                dropped,
                repeats,
                seed,
            )?);
        }
    }
    Ok(out)
}
