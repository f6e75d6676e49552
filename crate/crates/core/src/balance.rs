//! Representation balance: per-entry log attribute distributions, geometric
//! means, and the uniform / proportional baselines, globally and per split.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::country::{CountryCode, RegionTable};
use crate::error::{Error, Result};
use crate::ingest::{Period, ScreeningRecord};
use crate::socioeconomic::{weighted_period_average, CountryProfile, SeriesSelector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Population,
    GdpPerCapita,
}

impl Attribute {
    pub fn selector(self) -> SeriesSelector {
        match self {
            Attribute::Population => SeriesSelector::Population,
            Attribute::GdpPerCapita => SeriesSelector::GdpPerCapita,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Population => "population",
            Attribute::GdpPerCapita => "gdp_per_capita",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Accreditation {
    A,
    B,
}

/// FIAPF-style classification of festival series; unlisted series are B.
#[derive(Debug, Clone, Default)]
pub struct AccreditationTable {
    series: BTreeMap<String, Accreditation>,
}

#[derive(Deserialize)]
struct AccreditationRow {
    festival_series_id: String,
    accreditation: String,
}

impl AccreditationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, series: &str, class: Accreditation) {
        self.series.insert(series.to_string(), class);
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = Self::new();
        for row in rdr.deserialize::<AccreditationRow>() {
            let row = row.map_err(|e| Error::csv(source_name, e))?;
            let class = match row.accreditation.to_uppercase().as_str() {
                "A" | "A-LIST" | "A_LIST" => Accreditation::A,
                "B" | "B-LIST" | "B_LIST" | "" => Accreditation::B,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "{source_name}: unknown accreditation {other:?} for {}",
                        row.festival_series_id
                    )))
                }
            };
            table.insert(&row.festival_series_id, class);
        }
        Ok(table)
    }

    pub fn classify(&self, series: &str) -> Accreditation {
        self.series.get(series).copied().unwrap_or(Accreditation::B)
    }

    pub fn a_list_len(&self) -> usize {
        self.series
            .values()
            .filter(|c| **c == Accreditation::A)
            .count()
    }
}

/// What to do with a producer whose attribute is unavailable in the event year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    Fail,
    Skip,
}

/// log10 of the producer attribute at the record's event year, one value
/// per (record, producer) pair. Returns the values and the number of
/// skipped pairs (always zero under [`MissingPolicy::Fail`]).
pub fn entry_log_values(
    records: &[ScreeningRecord],
    attribute: Attribute,
    profiles: &BTreeMap<CountryCode, CountryProfile>,
    missing: MissingPolicy,
) -> Result<(Vec<f64>, usize)> {
    let mut values = Vec::new();
    let mut skipped = 0;
    for record in records {
        for producer in &record.producer_countries {
            let value = profiles
                .get(producer)
                .ok_or_else(|| Error::UnknownCountry(producer.clone()))
                .and_then(|p| p.value(attribute.selector(), record.event_year));
            match (value, missing) {
                (Ok(v), _) => values.push(v.log10()),
                (Err(_), MissingPolicy::Skip) => skipped += 1,
                (Err(e), MissingPolicy::Fail) => return Err(e),
            }
        }
    }
    Ok((values, skipped))
}

/// Arithmetic mean of log values, i.e. the log of the geometric mean.
pub fn geometric_mean_log(log_values: &[f64]) -> Result<f64> {
    if log_values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(log_values.iter().sum::<f64>() / log_values.len() as f64)
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "attribute must be positive, got {v}"
        )));
    }
    Ok(())
}

/// Log-mean when every participating country shows the same number of films.
pub fn uniform_expectation(values: &[f64]) -> Result<f64> {
    check_positive(values)?;
    Ok(values.iter().map(|v| v.log10()).sum::<f64>() / values.len() as f64)
}

/// Log-mean when each country's share of entries is proportional to its attribute.
pub fn proportional_expectation(values: &[f64]) -> Result<f64> {
    check_positive(values)?;
    // Scale by the maximum so the weights stay representable for populations ~1e9.
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let (num, den) = values.iter().fold((0.0, 0.0), |(n, d), v| {
        let w = v / max;
        (n + w * v.log10(), d + w)
    });
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceModel {
    Uniform,
    Proportional,
}

/// Monte Carlo version of the expectations: draws `draws` entries from the
/// countries under the given model and returns the mean log value.
pub fn simulated_expectation<R: Rng>(
    values: &[f64],
    model: BalanceModel,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    check_positive(values)?;
    if draws == 0 {
        return Err(Error::EmptySample);
    }
    let weights: Vec<f64> = match model {
        BalanceModel::Uniform => vec![1.0; values.len()],
        BalanceModel::Proportional => values.to_vec(),
    };
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let total: f64 = (0..draws).map(|_| values[dist.sample(rng)].log10()).sum();
    Ok(total / draws as f64)
}

/// Appearance-weighted period averages of the attribute for each country.
/// Countries without data are left out.
pub fn country_attribute_means(
    profiles: &BTreeMap<CountryCode, CountryProfile>,
    attribute: Attribute,
    period: Period,
) -> BTreeMap<CountryCode, f64> {
    profiles
        .iter()
        .filter_map(|(code, p)| {
            weighted_period_average(p, attribute.selector(), period)
                .ok()
                .map(|avg| (code.clone(), avg.value))
        })
        .collect()
}

/// How to partition records for [`split_report`].
#[derive(Debug, Clone, Copy)]
pub enum Split<'a> {
    All,
    Accreditation(&'a AccreditationTable),
    /// Grouped by the region of the host country.
    Region(&'a RegionTable),
    /// One group per festival series and event year.
    FestivalSeries,
}

impl Split<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Split::All => "all",
            Split::Accreditation(_) => "accreditation",
            Split::Region(_) => "region",
            Split::FestivalSeries => "festival_series",
        }
    }

    fn group_of(&self, record: &ScreeningRecord) -> (String, Option<i32>) {
        match self {
            Split::All => ("all".to_string(), None),
            Split::Accreditation(table) => {
                let g = match table.classify(&record.festival_series_id) {
                    Accreditation::A => "A",
                    Accreditation::B => "B",
                };
                (g.to_string(), None)
            }
            Split::Region(regions) => (
                regions
                    .region(&record.host_country)
                    .unwrap_or("unknown")
                    .to_string(),
                None,
            ),
            Split::FestivalSeries => (record.festival_series_id.clone(), Some(record.event_year)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub split: String,
    pub group: String,
    pub year: Option<i32>,
    pub attribute: Attribute,
    pub log_values: Vec<f64>,
    pub observed_log_mean: f64,
    pub uniform_expectation: f64,
    pub proportional_expectation: f64,
    pub n_entries: usize,
    pub skipped_pairs: usize,
    pub participating_countries: usize,
}

/// One report per group. Baselines use the countries that appear in the
/// group, each at its appearance-weighted period average.
pub fn split_report(
    records: &[ScreeningRecord],
    split: Split<'_>,
    attribute: Attribute,
    profiles: &BTreeMap<CountryCode, CountryProfile>,
    period: Period,
    missing: MissingPolicy,
) -> Result<Vec<BalanceReport>> {
    let means = country_attribute_means(profiles, attribute, period);
    let mut groups: BTreeMap<(String, Option<i32>), Vec<ScreeningRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(split.group_of(r)).or_default().push(r.clone());
    }
    let mut reports = Vec::with_capacity(groups.len());
    for ((group, year), members) in groups {
        let (log_values, skipped_pairs) = entry_log_values(&members, attribute, profiles, missing)?;
        if log_values.is_empty() {
            continue;
        }
        let participants: BTreeSet<&CountryCode> = members
            .iter()
            .flat_map(|r| r.producer_countries.iter())
            .collect();
        let mut country_values = Vec::with_capacity(participants.len());
        for code in participants {
            match (means.get(code), missing) {
                (Some(v), _) => country_values.push(*v),
                (None, MissingPolicy::Skip) => {}
                (None, MissingPolicy::Fail) => {
                    return Err(Error::MissingValue {
                        what: attribute.as_str(),
                        country: code.clone(),
                        year: period.start,
                    })
                }
            }
        }
        reports.push(BalanceReport {
            split: split.name().to_string(),
            group,
            year,
            attribute,
            observed_log_mean: geometric_mean_log(&log_values)?,
            uniform_expectation: uniform_expectation(&country_values)?,
            proportional_expectation: proportional_expectation(&country_values)?,
            n_entries: log_values.len(),
            log_values,
            skipped_pairs,
            participating_countries: country_values.len(),
        });
    }
    Ok(reports)
}
