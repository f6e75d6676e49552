//! Festival programming entries: parsing the long-format listing file,
//! collapsing per-producer rows, film identification, period filtering and
//! per-country appearance counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use indexmap::IndexMap;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Deserialize;

use crate::country::{CountryAliasTable, CountryCode, Resolver};
use crate::error::{Error, Result};

/// Exact co-production weight. Denominators are producer-list lengths.
pub type Weight = Ratio<u64>;

pub const ENTRY_COLUMNS: [&str; 9] = [
    "film_title",
    "production_year",
    "festival_id",
    "festival_series_id",
    "event_year",
    "host_country",
    "producer_country",
    "languages",
    "genre_tags",
];

/// Canonical film identity: normalized title plus production year.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FilmIdentity {
    pub normalized_title: String,
    pub production_year: i32,
}

impl FilmIdentity {
    pub fn new(title: &str, production_year: i32) -> Self {
        FilmIdentity {
            normalized_title: normalize_title(title),
            production_year,
        }
    }
}

fn is_terminal_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '…' | '¡' | '¿' | '«' | '»' | '“' | '”' | '‘' | '’' | '„' | '–' | '—' | '·'
        )
}

/// Lowercases, collapses whitespace runs, and strips punctuation from both ends.
pub fn normalize_title(raw: &str) -> String {
    let folded = raw.to_lowercase();
    let collapsed = folded.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_matches(|c: char| is_terminal_punctuation(c) || c.is_whitespace())
        .to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FilmKey(pub u32);

/// One film listed in one festival edition, with its full producer list.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningRecord {
    pub title: String,
    pub film_key: Option<FilmKey>,
    pub festival_id: String,
    pub festival_series_id: String,
    pub event_year: i32,
    pub host_country: CountryCode,
    /// Source order is preserved but never consulted.
    pub producer_countries: Vec<CountryCode>,
    pub production_year: i32,
    pub languages: Vec<String>,
    pub genre_tags: Vec<String>,
    /// Line of the first source row of this listing.
    pub source_line: u64,
}

impl ScreeningRecord {
    pub fn identity(&self) -> FilmIdentity {
        FilmIdentity::new(&self.title, self.production_year)
    }

    pub fn producer_count(&self) -> usize {
        self.producer_countries.len()
    }

    pub fn coproduction_weight(&self) -> Weight {
        Ratio::new(1, self.producer_count() as u64)
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.producer_count() as f64
    }
}

/// Inclusive range of event years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Period {
    pub start: i32,
    pub end: i32,
}

impl Period {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidInput(format!(
                "period start {start} is after end {end}"
            )));
        }
        Ok(Period { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::str::FromStr for Period {
    type Err = Error;

    /// Accepts `2012-2021`, `2012:2021` or a single year.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| Error::InvalidInput(format!("bad period {s:?}")))
        };
        match s.split_once(['-', ':']) {
            Some((a, b)) => Period::new(parse(a)?, parse(b)?),
            None => {
                let y = parse(s)?;
                Period::new(y, y)
            }
        }
    }
}

#[derive(Deserialize)]
struct EntryRow {
    film_title: String,
    production_year: i32,
    festival_id: String,
    festival_series_id: String,
    event_year: i32,
    host_country: String,
    producer_country: String,
    #[serde(default)]
    languages: String,
    #[serde(default)]
    genre_tags: String,
}

fn split_list(field: &str) -> impl Iterator<Item = String> + '_ {
    field
        .split(';')
        .map(|s| s.trim().to_lowercase())
        .filter(|s| !s.is_empty())
}

fn push_unique<T: PartialEq>(list: &mut Vec<T>, item: T) {
    if !list.contains(&item) {
        list.push(item);
    }
}

pub fn parse_screenings(
    path: &Path,
    aliases: Option<&CountryAliasTable>,
) -> Result<Vec<ScreeningRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_screenings_from_reader(file, &path.display().to_string(), aliases)
}

/// Parses the entries file, collapsing the one-row-per-producer layout into
/// one record per (festival edition, title, production year).
///
/// All unmapped country names are reported together.
pub fn parse_screenings_from_reader<R: Read>(
    reader: R,
    source_name: &str,
    aliases: Option<&CountryAliasTable>,
) -> Result<Vec<ScreeningRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::csv(source_name, e))?
        .clone();
    if headers.is_empty() {
        log::warn!("{source_name} is empty");
        return Ok(Vec::new());
    }
    let missing: Vec<String> = ENTRY_COLUMNS
        .iter()
        .filter(|c| !headers.iter().any(|h| h == **c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema {
            source_name: source_name.to_string(),
            missing,
        });
    }

    let mut resolver = Resolver::new(aliases);
    let mut listings: IndexMap<(String, String, i32), ScreeningRecord> = IndexMap::new();

    for raw in rdr.records() {
        let raw = raw.map_err(|e| Error::csv(source_name, e))?;
        let line = raw.position().map(|p| p.line()).unwrap_or(0);
        let row: EntryRow = raw
            .deserialize(Some(&headers))
            .map_err(|e| Error::Malformed {
                source_name: source_name.to_string(),
                line,
                message: e.to_string(),
            })?;
        let malformed = |message: String| Error::Malformed {
            source_name: source_name.to_string(),
            line,
            message,
        };
        if row.producer_country.is_empty() {
            return Err(malformed("empty producer_country".into()));
        }
        if row.host_country.is_empty() {
            return Err(malformed("empty host_country".into()));
        }
        let host = resolver.resolve(&row.host_country);
        let producer = resolver.resolve(&row.producer_country);

        let key = (
            row.festival_id.clone(),
            row.film_title.clone(),
            row.production_year,
        );
        let record = listings.entry(key).or_insert_with(|| ScreeningRecord {
            title: row.film_title.clone(),
            film_key: None,
            festival_id: row.festival_id.clone(),
            festival_series_id: row.festival_series_id.clone(),
            event_year: row.event_year,
            host_country: host.clone().unwrap_or_else(|| CountryCode::new("")),
            producer_countries: Vec::new(),
            production_year: row.production_year,
            languages: Vec::new(),
            genre_tags: Vec::new(),
            source_line: line,
        });
        let host_conflict = matches!(&host, Some(h) if *h != record.host_country);
        if record.event_year != row.event_year
            || record.festival_series_id != row.festival_series_id
            || host_conflict
        {
            return Err(malformed(format!(
                "listing of {:?} at {} disagrees with line {} on year, series or host",
                row.film_title, row.festival_id, record.source_line
            )));
        }
        if let Some(p) = producer {
            push_unique(&mut record.producer_countries, p);
        }
        for lang in split_list(&row.languages) {
            push_unique(&mut record.languages, lang);
        }
        for tag in split_list(&row.genre_tags) {
            push_unique(&mut record.genre_tags, tag);
        }
    }
    resolver.finish()?;

    Ok(listings.into_values().collect())
}

/// Number of rows the records occupy in the one-row-per-producer layout.
pub fn expanded_row_count(records: &[ScreeningRecord]) -> usize {
    records.iter().map(ScreeningRecord::producer_count).sum()
}

/// Sets `film_key` from the film identity and returns the number of distinct films.
///
/// Keys are ranks of identities in sorted order, so the result does not depend
/// on record order and re-running is a no-op.
pub fn assign_film_keys(records: &mut [ScreeningRecord]) -> usize {
    let identities: BTreeSet<FilmIdentity> =
        records.iter().map(ScreeningRecord::identity).collect();
    let index: HashMap<FilmIdentity, FilmKey> = identities
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id, FilmKey(i as u32)))
        .collect();
    for record in records.iter_mut() {
        record.film_key = Some(index[&record.identity()]);
    }
    index.len()
}

pub fn filter_period(records: &[ScreeningRecord], period: Period) -> Vec<ScreeningRecord> {
    records
        .iter()
        .filter(|r| period.contains(r.event_year))
        .cloned()
        .collect()
}

/// Per-country appearance counts.
///
/// Unweighted: one per (record, producer) pair. Weighted: `1/n` per producer,
/// so each record contributes exactly one in total.
pub fn country_appearance_counts(
    records: &[ScreeningRecord],
    weighted: bool,
) -> BTreeMap<CountryCode, Weight> {
    let mut counts: BTreeMap<CountryCode, Weight> = BTreeMap::new();
    for record in records {
        let w = if weighted {
            record.coproduction_weight()
        } else {
            Weight::from_integer(1)
        };
        for p in &record.producer_countries {
            let slot = counts.entry(p.clone()).or_insert_with(Weight::zero);
            *slot += w;
        }
    }
    counts
}

pub fn total_count(counts: &BTreeMap<CountryCode, Weight>) -> Weight {
    counts.values().fold(Weight::zero(), |acc, w| acc + w)
}

pub fn weight_to_f64(w: &Weight) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

/// Unweighted (record, producer) pair counts per country and event year.
pub fn appearances_by_year(
    records: &[ScreeningRecord],
) -> BTreeMap<CountryCode, BTreeMap<i32, u64>> {
    let mut out: BTreeMap<CountryCode, BTreeMap<i32, u64>> = BTreeMap::new();
    for record in records {
        for p in &record.producer_countries {
            *out.entry(p.clone())
                .or_default()
                .entry(record.event_year)
                .or_insert(0) += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "film_title,production_year,festival_id,festival_series_id,event_year,host_country,producer_country,languages,genre_tags\n";

    fn parse(body: &str) -> Result<Vec<ScreeningRecord>> {
        let text = format!("{HEADER}{body}");
        parse_screenings_from_reader(text.as_bytes(), "fixture", None)
    }

    #[test]
    fn empty_file_with_header_gives_no_records() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse_screenings_from_reader(&b""[..], "fixture", None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn producer_rows_collapse_into_one_record() {
        let records = parse(
            "Film,2015,F1,S1,2016,FRA,DEU,german,drama\n\
             Film,2015,F1,S1,2016,FRA,AUT,german;english,drama;comedy\n\
             Film,2015,F1,S1,2016,FRA,CHE,,\n",
        )
        .unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        let codes: Vec<&str> = r.producer_countries.iter().map(|c| c.as_str()).collect();
        assert_eq!(codes, ["DEU", "AUT", "CHE"]);
        assert_eq!(r.coproduction_weight(), Ratio::new(1, 3));
        assert_eq!(r.languages, ["german", "english"]);
        assert_eq!(r.genre_tags, ["drama", "comedy"]);
        assert_eq!(expanded_row_count(&records), 3);
    }

    #[test]
    fn repeated_producer_row_is_deduplicated() {
        let records = parse(
            "Film,2015,F1,S1,2016,FRA,DEU,,\n\
             Film,2015,F1,S1,2016,FRA,DEU,,\n",
        )
        .unwrap();
        assert_eq!(records[0].producer_countries.len(), 1);
    }

    #[test]
    fn missing_producer_reports_line() {
        let err = parse("A,2015,F1,S1,2016,FRA,DEU,,\nB,2015,F1,S1,2016,FRA,,,\n").unwrap_err();
        match err {
            Error::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_year_reports_line() {
        let err = parse("A,20x5,F1,S1,2016,FRA,DEU,,\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn conflicting_rows_are_rejected() {
        let err = parse("A,2015,F1,S1,2016,FRA,DEU,,\nA,2015,F1,S1,2017,FRA,AUT,,\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn missing_column_is_a_schema_error() {
        let text = "film_title,production_year\nA,2015\n";
        let err = parse_screenings_from_reader(text.as_bytes(), "fixture", None).unwrap_err();
        match err {
            Error::Schema { missing, .. } => assert!(missing.contains(&"festival_id".to_string())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_countries_are_listed() {
        let aliases = CountryAliasTable::bundled();
        let text = format!(
            "{HEADER}A,2015,F1,S1,2016,France,Narnia,,\nB,2015,F1,S1,2016,Atlantis,Germany,,\n"
        );
        let err =
            parse_screenings_from_reader(text.as_bytes(), "fixture", Some(&aliases)).unwrap_err();
        match err {
            Error::UnmappedCountries(names) => assert_eq!(names, ["Atlantis", "Narnia"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn aliases_resolve_to_codes() {
        let aliases = CountryAliasTable::bundled();
        let text = format!("{HEADER}A,2015,F1,S1,2016,France,\"Korea, Rep.\",,\n");
        let records =
            parse_screenings_from_reader(text.as_bytes(), "fixture", Some(&aliases)).unwrap();
        assert_eq!(records[0].host_country.as_str(), "FRA");
        assert_eq!(records[0].producer_countries[0].as_str(), "KOR");
    }

    #[test]
    fn title_normalization() {
        assert_eq!(normalize_title("The Ring"), normalize_title("the ring "));
        assert_eq!(normalize_title("  Hello,   World!  "), "hello, world");
        assert_eq!(normalize_title("¿Qué?"), "qué");
        assert_eq!(
            FilmIdentity::new("The Ring", 1927),
            FilmIdentity::new("the  ring ", 1927)
        );
        assert_ne!(
            FilmIdentity::new("Ring", 2012),
            FilmIdentity::new("Ring", 2013)
        );
    }

    #[test]
    fn film_keys_follow_identity() {
        let mut records = parse(
            "The Ring,1927,F1,S1,2012,FRA,GBR,,\n\
             the ring ,1927,F2,S2,2013,DEU,GBR,,\n\
             Ring,2012,F1,S1,2012,FRA,JPN,,\n\
             Ring,2013,F1,S1,2012,FRA,JPN,,\n",
        )
        .unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(assign_film_keys(&mut records), 3);
        assert_eq!(records[0].film_key, records[1].film_key);
        assert_ne!(records[2].film_key, records[3].film_key);
    }

    #[test]
    fn period_filter() {
        let records = parse("A,2010,F1,S1,2011,FRA,FRA,,\nB,2011,F2,S1,2012,FRA,FRA,,\n").unwrap();
        let kept = filter_period(&records, Period::new(2012, 2012).unwrap());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].event_year, 2012);
        assert!(filter_period(&records, Period::new(2050, 2051).unwrap()).is_empty());
        assert!(Period::new(2013, 2012).is_err());
        assert_eq!(
            "2012-2021".parse::<Period>().unwrap(),
            Period::new(2012, 2021).unwrap()
        );
        assert_eq!(
            "2015".parse::<Period>().unwrap(),
            Period::new(2015, 2015).unwrap()
        );
    }

    #[test]
    fn weighted_and_unweighted_counts() {
        let records = parse("A,2015,F1,S1,2016,FRA,ARG,,\nA,2015,F1,S1,2016,FRA,URY,,\n").unwrap();
        let weighted = country_appearance_counts(&records, true);
        assert_eq!(weighted[&CountryCode::new("ARG")], Ratio::new(1, 2));
        assert_eq!(weighted[&CountryCode::new("URY")], Ratio::new(1, 2));
        let plain = country_appearance_counts(&records, false);
        assert_eq!(plain[&CountryCode::new("ARG")], Weight::from_integer(1));
        assert_eq!(total_count(&plain), Weight::from_integer(2));
        assert_eq!(total_count(&weighted), Weight::from_integer(1));
    }
}
