//! Country covariates: World Bank population and GDP series, gap filling,
//! GDP per capita, appearance-weighted period averages, hosted events, and
//! capital-to-capital distances.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::country::{CapitalTable, CountryAliasTable, CountryCode, LatLon, RegionTable, Resolver};
use crate::error::{Error, Result};
use crate::ingest::{appearances_by_year, Period, ScreeningRecord};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Yearly observations of one quantity for one country.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct YearSeries(BTreeMap<i32, f64>);

impl YearSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, year: i32, value: f64) {
        self.0.insert(year, value);
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        self.0.get(&year).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.0.iter().map(|(y, v)| (*y, *v))
    }

    /// First and last observed year.
    pub fn span(&self) -> Option<(i32, i32)> {
        Some((*self.0.keys().next()?, *self.0.keys().next_back()?))
    }

    /// Value at `year`: observed, linearly interpolated between the nearest
    /// observed neighbours, or carried from the nearest endpoint outside the span.
    pub fn value_at(&self, year: i32) -> Result<f64> {
        if let Some(v) = self.0.get(&year) {
            return Ok(*v);
        }
        let before = self.0.range(..year).next_back();
        let after = self.0.range(year..).next();
        match (before, after) {
            (Some((&y0, &v0)), Some((&y1, &v1))) => {
                let t = f64::from(year - y0) / f64::from(y1 - y0);
                Ok(v0 + t * (v1 - v0))
            }
            (Some((_, &v)), None) | (None, Some((_, &v))) => Ok(v),
            (None, None) => Err(Error::EmptySeries),
        }
    }
}

impl FromIterator<(i32, f64)> for YearSeries {
    fn from_iter<I: IntoIterator<Item = (i32, f64)>>(iter: I) -> Self {
        YearSeries(iter.into_iter().collect())
    }
}

/// Fills every year of the observed span (extended to `cover`, if given).
/// Interior gaps are linear; years outside the observed span carry the
/// nearest endpoint.
pub fn interpolate_series(series: &YearSeries, cover: Option<Period>) -> Result<YearSeries> {
    let (first, last) = series.span().ok_or(Error::EmptySeries)?;
    let (lo, hi) = match cover {
        Some(p) => (first.min(p.start), last.max(p.end)),
        None => (first, last),
    };
    (lo..=hi).map(|y| Ok((y, series.value_at(y)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Population,
    Gdp,
}

impl Indicator {
    /// Recognises World Bank indicator codes and their display names.
    pub fn parse(label: &str) -> Option<Self> {
        let l = label.trim().to_lowercase();
        match l.as_str() {
            "sp.pop.totl" | "population, total" | "population" => Some(Indicator::Population),
            "ny.gdp.mktp.cd" | "gdp (current us$)" | "gdp" => Some(Indicator::Gdp),
            _ => None,
        }
    }
}

/// World Bank series keyed by canonical country code.
#[derive(Debug, Clone, Default)]
pub struct WorldBankData {
    pub population: BTreeMap<CountryCode, YearSeries>,
    pub gdp: BTreeMap<CountryCode, YearSeries>,
    /// Country names without an alias (aggregates such as "World" land here).
    pub unmapped_names: Vec<String>,
    pub ignored_indicators: BTreeSet<String>,
}

impl WorldBankData {
    pub fn series(&self, indicator: Indicator, code: &CountryCode) -> Option<&YearSeries> {
        match indicator {
            Indicator::Population => self.population.get(code),
            Indicator::Gdp => self.gdp.get(code),
        }
    }
}

#[derive(Deserialize)]
struct WbRow {
    country_name: String,
    indicator: String,
    year: i32,
    value: String,
}

fn parse_value(raw: &str) -> Option<std::result::Result<f64, std::num::ParseFloatError>> {
    let t = raw.trim();
    if t.is_empty() || t == ".." || t.eq_ignore_ascii_case("na") {
        None
    } else {
        Some(t.parse())
    }
}

pub fn load_world_bank(path: &Path, aliases: Option<&CountryAliasTable>) -> Result<WorldBankData> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_world_bank_from_reader(file, &path.display().to_string(), aliases)
}

/// Reads the long-format `country_name,indicator,year,value` file.
///
/// Missing values (empty or `..`) are skipped; non-positive values are errors.
pub fn load_world_bank_from_reader<R: Read>(
    reader: R,
    source_name: &str,
    aliases: Option<&CountryAliasTable>,
) -> Result<WorldBankData> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::csv(source_name, e))?
        .clone();
    let mut out = WorldBankData::default();
    let mut resolver = Resolver::new(aliases);
    for raw in rdr.records() {
        let raw = raw.map_err(|e| Error::csv(source_name, e))?;
        let line = raw.position().map(|p| p.line()).unwrap_or(0);
        let malformed = |message: String| Error::Malformed {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let row: WbRow = raw
            .deserialize(Some(&headers))
            .map_err(|e| malformed(e.to_string()))?;
        let Some(indicator) = Indicator::parse(&row.indicator) else {
            out.ignored_indicators.insert(row.indicator);
            continue;
        };
        let Some(value) = parse_value(&row.value) else {
            continue;
        };
        let value = value.map_err(|e| malformed(format!("bad value {:?}: {e}", row.value)))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(malformed(format!(
                "{indicator:?} must be positive, got {value}"
            )));
        }
        let Some(code) = resolver.resolve(&row.country_name) else {
            continue;
        };
        let target = match indicator {
            Indicator::Population => &mut out.population,
            Indicator::Gdp => &mut out.gdp,
        };
        target.entry(code).or_default().insert(row.year, value);
    }
    out.unmapped_names = resolver.into_unmapped();
    Ok(out)
}

/// UNESCO feature-film production counts per country and year.
#[derive(Debug, Clone, Default)]
pub struct UisData {
    pub films: BTreeMap<CountryCode, BTreeMap<i32, f64>>,
    pub unmapped_names: Vec<String>,
}

impl UisData {
    /// Sum of production counts over the years of `period` with data.
    pub fn total_in(&self, period: Period) -> BTreeMap<CountryCode, f64> {
        self.films
            .iter()
            .filter_map(|(code, years)| {
                let total: f64 = years
                    .iter()
                    .filter(|(y, _)| period.contains(**y))
                    .map(|(_, v)| *v)
                    .sum();
                let any = years.keys().any(|y| period.contains(*y));
                any.then(|| (code.clone(), total))
            })
            .collect()
    }
}

#[derive(Deserialize)]
struct UisRow {
    country_name: String,
    year: i32,
    feature_films_produced: String,
}

pub fn load_uis(path: &Path, aliases: Option<&CountryAliasTable>) -> Result<UisData> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_uis_from_reader(file, &path.display().to_string(), aliases)
}

pub fn load_uis_from_reader<R: Read>(
    reader: R,
    source_name: &str,
    aliases: Option<&CountryAliasTable>,
) -> Result<UisData> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::csv(source_name, e))?
        .clone();
    let mut out = UisData::default();
    let mut resolver = Resolver::new(aliases);
    for raw in rdr.records() {
        let raw = raw.map_err(|e| Error::csv(source_name, e))?;
        let line = raw.position().map(|p| p.line()).unwrap_or(0);
        let malformed = |message: String| Error::Malformed {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let row: UisRow = raw
            .deserialize(Some(&headers))
            .map_err(|e| malformed(e.to_string()))?;
        let Some(value) = parse_value(&row.feature_films_produced) else {
            continue;
        };
        let value = value.map_err(|e| malformed(e.to_string()))?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(malformed(format!("negative production count {value}")));
        }
        if let Some(code) = resolver.resolve(&row.country_name) {
            out.films.entry(code).or_default().insert(row.year, value);
        }
    }
    out.unmapped_names = resolver.into_unmapped();
    Ok(out)
}

/// Everything known about one country for the analysis period.
#[derive(Debug, Clone, Serialize)]
pub struct CountryProfile {
    pub code: CountryCode,
    pub name: String,
    pub region: Option<String>,
    /// Gap-filled over the analysis period; empty when the source has no data.
    pub population_by_year: YearSeries,
    pub gdp_by_year: YearSeries,
    pub capital: Option<LatLon>,
    pub hosted_events: usize,
    /// Unweighted film-festival pair counts per event year.
    pub appearance_weight_by_year: BTreeMap<i32, u64>,
}

impl CountryProfile {
    pub fn population(&self, year: i32) -> Result<f64> {
        self.population_by_year
            .get(year)
            .ok_or_else(|| Error::MissingValue {
                what: "population",
                country: self.code.clone(),
                year,
            })
    }

    pub fn gdp(&self, year: i32) -> Result<f64> {
        self.gdp_by_year
            .get(year)
            .ok_or_else(|| Error::MissingValue {
                what: "GDP",
                country: self.code.clone(),
                year,
            })
    }

    pub fn value(&self, selector: SeriesSelector, year: i32) -> Result<f64> {
        match selector {
            SeriesSelector::Population => self.population(year),
            SeriesSelector::Gdp => self.gdp(year),
            SeriesSelector::GdpPerCapita => gdp_per_capita(self, year),
        }
    }

    pub fn appearances(&self) -> u64 {
        self.appearance_weight_by_year.values().sum()
    }
}

pub fn gdp_per_capita(profile: &CountryProfile, year: i32) -> Result<f64> {
    let gdp = profile.gdp(year)?;
    let population = profile.population(year)?;
    if !(gdp > 0.0 && population > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{}: GDP and population must be positive in {year}",
            profile.code
        )));
    }
    Ok(gdp / population)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesSelector {
    Population,
    Gdp,
    GdpPerCapita,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodAverage {
    pub value: f64,
    /// Set when the country has no appearances in the period and the plain
    /// mean over the period was used instead.
    pub unweighted_fallback: bool,
}

/// Mean of the selected yearly value over `period`, weighted by the
/// country's appearance count in each year.
pub fn weighted_period_average(
    profile: &CountryProfile,
    selector: SeriesSelector,
    period: Period,
) -> Result<PeriodAverage> {
    let weight_sum: u64 = period
        .years()
        .map(|y| {
            profile
                .appearance_weight_by_year
                .get(&y)
                .copied()
                .unwrap_or(0)
        })
        .sum();
    if weight_sum == 0 {
        let mut total = 0.0;
        for y in period.years() {
            total += profile.value(selector, y)?;
        }
        return Ok(PeriodAverage {
            value: total / period.len() as f64,
            unweighted_fallback: true,
        });
    }
    let mut total = 0.0;
    for y in period.years() {
        let w = profile
            .appearance_weight_by_year
            .get(&y)
            .copied()
            .unwrap_or(0);
        if w > 0 {
            total += w as f64 * profile.value(selector, y)?;
        }
    }
    Ok(PeriodAverage {
        value: total / weight_sum as f64,
        unweighted_fallback: false,
    })
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(a: LatLon, b: LatLon) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

pub fn capital_distance_km(
    a: &CountryCode,
    b: &CountryCode,
    capitals: &CapitalTable,
) -> Result<f64> {
    if a == b {
        capitals.location(a)?;
        return Ok(0.0);
    }
    Ok(haversine_km(capitals.location(a)?, capitals.location(b)?))
}

/// Distinct festival editions hosted per country.
pub fn hosted_event_counts(records: &[ScreeningRecord]) -> BTreeMap<CountryCode, usize> {
    let mut editions: BTreeMap<CountryCode, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        editions
            .entry(r.host_country.clone())
            .or_default()
            .insert(r.festival_id.as_str());
    }
    editions.into_iter().map(|(c, s)| (c, s.len())).collect()
}

/// Distinct festival series hosted per country.
pub fn hosted_series_counts(records: &[ScreeningRecord]) -> BTreeMap<CountryCode, usize> {
    let mut series: BTreeMap<CountryCode, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        series
            .entry(r.host_country.clone())
            .or_default()
            .insert(r.festival_series_id.as_str());
    }
    series.into_iter().map(|(c, s)| (c, s.len())).collect()
}

/// Builds a profile for every producer or host country in `records`
/// (which should already be restricted to `period`).
pub fn build_profiles(
    records: &[ScreeningRecord],
    world_bank: &WorldBankData,
    capitals: &CapitalTable,
    regions: &RegionTable,
    period: Period,
) -> Result<BTreeMap<CountryCode, CountryProfile>> {
    let appearances = appearances_by_year(records);
    let hosted = hosted_event_counts(records);
    let mut codes: BTreeSet<CountryCode> = appearances.keys().cloned().collect();
    codes.extend(hosted.keys().cloned());

    let fill = |series: Option<&YearSeries>| -> Result<YearSeries> {
        match series {
            Some(s) if !s.is_empty() => interpolate_series(s, Some(period)),
            _ => Ok(YearSeries::new()),
        }
    };

    codes
        .into_iter()
        .map(|code| {
            let profile = CountryProfile {
                name: regions.name(&code).unwrap_or(code.as_str()).to_string(),
                region: regions.region(&code).map(str::to_string),
                population_by_year: fill(world_bank.population.get(&code))?,
                gdp_by_year: fill(world_bank.gdp.get(&code))?,
                capital: capitals.get(&code).map(|c| c.location),
                hosted_events: hosted.get(&code).copied().unwrap_or(0),
                appearance_weight_by_year: appearances.get(&code).cloned().unwrap_or_default(),
                code: code.clone(),
            };
            Ok((code, profile))
        })
        .collect()
}

/// Period-level covariates of one country, ready for the regression design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateRow {
    pub code: CountryCode,
    pub mean_population: f64,
    pub mean_gdp_per_capita: f64,
    pub events: usize,
    pub distance_from_reference_km: f64,
    pub appearances: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub code: CountryCode,
    pub reason: String,
}

/// Covariate rows for every country with at least one appearance. Countries
/// lacking population, GDP or a capital are returned as exclusions.
pub fn covariate_rows(
    profiles: &BTreeMap<CountryCode, CountryProfile>,
    reference: &CountryCode,
    period: Period,
) -> Result<(Vec<CovariateRow>, Vec<Exclusion>)> {
    let reference_location = profiles
        .get(reference)
        .and_then(|p| p.capital)
        .ok_or_else(|| Error::MissingCapital(reference.clone()))?;
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (code, profile) in profiles {
        let appearances = profile.appearances();
        if appearances == 0 {
            continue;
        }
        let attempt = || -> Result<CovariateRow> {
            let location = profile
                .capital
                .ok_or_else(|| Error::MissingCapital(code.clone()))?;
            Ok(CovariateRow {
                code: code.clone(),
                mean_population: weighted_period_average(
                    profile,
                    SeriesSelector::Population,
                    period,
                )?
                .value,
                mean_gdp_per_capita: weighted_period_average(
                    profile,
                    SeriesSelector::GdpPerCapita,
                    period,
                )?
                .value,
                events: profile.hosted_events,
                distance_from_reference_km: haversine_km(location, reference_location),
                appearances,
            })
        };
        match attempt() {
            Ok(row) => rows.push(row),
            Err(e) => {
                log::warn!("excluding {code} from covariates: {e}");
                excluded.push(Exclusion {
                    code: code.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok((rows, excluded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(points: &[(i32, f64)]) -> YearSeries {
        points.iter().copied().collect()
    }

    fn profile(pop: &[(i32, f64)], gdp: &[(i32, f64)], weights: &[(i32, u64)]) -> CountryProfile {
        CountryProfile {
            code: CountryCode::new("XXX"),
            name: "X".into(),
            region: None,
            population_by_year: series(pop),
            gdp_by_year: series(gdp),
            capital: None,
            hosted_events: 0,
            appearance_weight_by_year: weights.iter().copied().collect(),
        }
    }

    #[test]
    fn interior_gap_is_linear() {
        let s = interpolate_series(&series(&[(2010, 100.0), (2012, 200.0)]), None).unwrap();
        assert_eq!(s.get(2011), Some(150.0));
        let s = interpolate_series(&series(&[(2010, 100.0), (2013, 400.0)]), None).unwrap();
        assert_abs_diff_eq!(s.get(2011).unwrap(), 200.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.get(2012).unwrap(), 300.0, epsilon = 1e-12);
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn single_point_carries_everywhere() {
        let s = series(&[(2015, 7.0)]);
        for y in [1990, 2015, 2040] {
            assert_eq!(s.value_at(y).unwrap(), 7.0);
        }
        let filled = interpolate_series(&s, Some(Period::new(2012, 2021).unwrap())).unwrap();
        assert_eq!(filled.len(), 10);
        assert!(filled.iter().all(|(_, v)| v == 7.0));
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(matches!(
            interpolate_series(&YearSeries::new(), None),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn gdp_per_capita_divides() {
        let p = profile(&[(2015, 1.0e7)], &[(2015, 5.0e11)], &[]);
        assert_abs_diff_eq!(gdp_per_capita(&p, 2015).unwrap(), 5.0e4);
        assert!(matches!(
            gdp_per_capita(&p, 2016),
            Err(Error::MissingValue { .. })
        ));
        let zero = profile(&[(2015, 1.0e7)], &[(2015, 0.0)], &[]);
        assert!(gdp_per_capita(&zero, 2015).is_err());
    }

    #[test]
    fn world_bank_rows_feed_gdp_per_capita() {
        let text = "country_name,indicator,year,value\n\
                    Estonia,SP.POP.TOTL,2019,1326898\n\
                    Estonia,NY.GDP.MKTP.CD,2019,31038000000\n\
                    Estonia,NY.GDP.MKTP.CD,2018,..\n\
                    World,SP.POP.TOTL,2019,7700000000\n\
                    Estonia,SP.URB.TOTL,2019,900000\n";
        let aliases = CountryAliasTable::bundled();
        let wb = load_world_bank_from_reader(text.as_bytes(), "wb", Some(&aliases)).unwrap();
        assert_eq!(wb.unmapped_names, ["World"]);
        assert!(wb.ignored_indicators.contains("SP.URB.TOTL"));
        let est = CountryCode::new("EST");
        let mut p = profile(&[], &[], &[]);
        p.population_by_year = wb.population[&est].clone();
        p.gdp_by_year = wb.gdp[&est].clone();
        // 31,038,000,000 / 1,326,898 by hand
        assert_abs_diff_eq!(gdp_per_capita(&p, 2019).unwrap(), 23391.3, epsilon = 0.1);
    }

    #[test]
    fn world_bank_rejects_non_positive() {
        let text = "country_name,indicator,year,value\nEstonia,SP.POP.TOTL,2019,-5\n";
        let err = load_world_bank_from_reader(text.as_bytes(), "wb", None).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
    }

    #[test]
    fn weighted_average_matches_hand_values() {
        let p = profile(&[(2012, 10.0), (2013, 20.0)], &[], &[(2012, 1), (2013, 3)]);
        let period = Period::new(2012, 2013).unwrap();
        let avg = weighted_period_average(&p, SeriesSelector::Population, period).unwrap();
        assert_abs_diff_eq!(avg.value, 17.5);
        assert!(!avg.unweighted_fallback);

        let eq = profile(&[(2012, 10.0), (2013, 20.0)], &[], &[(2012, 2), (2013, 2)]);
        assert_abs_diff_eq!(
            weighted_period_average(&eq, SeriesSelector::Population, period)
                .unwrap()
                .value,
            15.0
        );
    }

    #[test]
    fn weighted_average_nine_years_brute_force() {
        let values: Vec<(i32, f64)> = (2012..=2020)
            .map(|y| (y, 1.0e6 * f64::from(y - 2000).sqrt()))
            .collect();
        let weights: Vec<(i32, u64)> = (2012..=2020).map(|y| (y, ((y * 7) % 5) as u64)).collect();
        let p = profile(&values, &[], &weights);
        let period = Period::new(2012, 2020).unwrap();
        let got = weighted_period_average(&p, SeriesSelector::Population, period)
            .unwrap()
            .value;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..9 {
            num += weights[i].1 as f64 * values[i].1;
            den += weights[i].1 as f64;
        }
        assert_abs_diff_eq!(got, num / den, epsilon = 1e-6);
    }

    #[test]
    fn zero_weights_fall_back_to_plain_mean() {
        let p = profile(&[(2012, 10.0), (2013, 20.0)], &[], &[]);
        let avg = weighted_period_average(
            &p,
            SeriesSelector::Population,
            Period::new(2012, 2013).unwrap(),
        )
        .unwrap();
        assert!(avg.unweighted_fallback);
        assert_abs_diff_eq!(avg.value, 15.0);
    }

    #[test]
    fn distances() {
        let capitals = CapitalTable::bundled();
        let fra = CountryCode::new("FRA");
        let deu = CountryCode::new("DEU");
        assert_eq!(capital_distance_km(&fra, &fra, &capitals).unwrap(), 0.0);
        let d = capital_distance_km(&fra, &deu, &capitals).unwrap();
        assert!((d - 878.0).abs() <= 2.0, "{d}");
        assert_eq!(d, capital_distance_km(&deu, &fra, &capitals).unwrap());
        assert!(matches!(
            capital_distance_km(&fra, &CountryCode::new("ZZZ"), &capitals),
            Err(Error::MissingCapital(_))
        ));
    }

    #[test]
    fn hosted_events_count_distinct_editions() {
        let mk = |fest: &str, series: &str, host: &str| ScreeningRecord {
            title: "t".into(),
            film_key: None,
            festival_id: fest.into(),
            festival_series_id: series.into(),
            event_year: 2015,
            host_country: CountryCode::new(host),
            producer_countries: vec![CountryCode::new("FRA")],
            production_year: 2015,
            languages: vec![],
            genre_tags: vec![],
            source_line: 0,
        };
        let records = vec![
            mk("A2015", "A", "XXX"),
            mk("A2015", "A", "XXX"),
            mk("A2016", "A", "XXX"),
            mk("B2015", "B", "XXX"),
            mk("C2015", "C", "YYY"),
        ];
        let events = hosted_event_counts(&records);
        assert_eq!(events[&CountryCode::new("XXX")], 3);
        assert_eq!(
            events.get(&CountryCode::new("ZZZ")).copied().unwrap_or(0),
            0
        );
        assert_eq!(hosted_series_counts(&records)[&CountryCode::new("XXX")], 2);
    }
}
