//! Canonical country codes, name aliasing, and the bundled reference tables
//! (capital coordinates and region labels).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_ALIASES: &str = include_str!("../data/aliases.csv");
const BUNDLED_CAPITALS: &str = include_str!("../data/capitals.csv");
const BUNDLED_REGIONS: &str = include_str!("../data/regions.csv");

/// Canonical country code (ISO 3166-1 alpha-3 in the bundled tables).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountryCode(String);

impl CountryCode {
    pub fn new(code: &str) -> Self {
        CountryCode(code.trim().to_uppercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CountryCode {
    fn from(s: &str) -> Self {
        CountryCode::new(s)
    }
}

fn alias_key(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Maps raw country names as they appear in the input files onto canonical codes.
///
/// Lookup is case-insensitive and ignores repeated whitespace. Every canonical
/// code also resolves to itself.
#[derive(Debug, Clone, Default)]
pub struct CountryAliasTable {
    map: HashMap<String, CountryCode>,
}

#[derive(Deserialize)]
struct AliasRow {
    raw_name: String,
    canonical_code: String,
}

impl CountryAliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Aliases shipped with the crate: canonical codes, display names from the
    /// bundled region table, and common World Bank / festival-database spellings.
    pub fn bundled() -> Self {
        let mut table = Self::new();
        let regions = RegionTable::bundled();
        for (code, name) in regions.names() {
            table.insert(code.as_str(), code.clone());
            table.insert(name, code.clone());
        }
        table
            .extend_from_reader(BUNDLED_ALIASES.as_bytes(), "bundled aliases")
            .expect("bundled alias table is valid");
        table
    }

    pub fn insert(&mut self, raw: &str, code: CountryCode) {
        self.map.insert(alias_key(&code.0), code.clone());
        self.map.insert(alias_key(raw), code);
    }

    /// Loads a `raw_name,canonical_code` CSV on top of the current entries.
    /// Later entries win.
    pub fn extend_from_path(&mut self, path: &Path) -> Result<()> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        self.extend_from_reader(file, &path.display().to_string())
    }

    pub fn extend_from_reader<R: Read>(&mut self, reader: R, source_name: &str) -> Result<()> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        for row in rdr.deserialize::<AliasRow>() {
            let row = row.map_err(|e| Error::csv(source_name, e))?;
            if row.canonical_code.is_empty() {
                continue;
            }
            self.insert(&row.raw_name, CountryCode::new(&row.canonical_code));
        }
        Ok(())
    }

    pub fn resolve(&self, raw: &str) -> Option<&CountryCode> {
        self.map.get(&alias_key(raw))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Resolves names in bulk, collecting every offender before failing.
pub(crate) struct Resolver<'a> {
    aliases: Option<&'a CountryAliasTable>,
    unmapped: BTreeSet<String>,
}

impl<'a> Resolver<'a> {
    pub(crate) fn new(aliases: Option<&'a CountryAliasTable>) -> Self {
        Resolver {
            aliases,
            unmapped: BTreeSet::new(),
        }
    }

    /// Without an alias table, raw names are taken as codes verbatim.
    pub(crate) fn resolve(&mut self, raw: &str) -> Option<CountryCode> {
        match self.aliases {
            None => Some(CountryCode::new(raw)),
            Some(table) => match table.resolve(raw) {
                Some(code) => Some(code.clone()),
                None => {
                    self.unmapped.insert(raw.trim().to_string());
                    None
                }
            },
        }
    }

    pub(crate) fn finish(self) -> Result<()> {
        if self.unmapped.is_empty() {
            Ok(())
        } else {
            Err(Error::UnmappedCountries(
                self.unmapped.into_iter().collect(),
            ))
        }
    }

    pub(crate) fn into_unmapped(self) -> Vec<String> {
        self.unmapped.into_iter().collect()
    }
}

/// Latitude and longitude in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidInput(format!(
                "coordinates out of range: {lat}, {lon}"
            )));
        }
        Ok(LatLon { lat, lon })
    }
}

#[derive(Debug, Clone)]
pub struct Capital {
    pub name: String,
    pub location: LatLon,
}

#[derive(Debug, Clone, Default)]
pub struct CapitalTable {
    capitals: BTreeMap<CountryCode, Capital>,
}

#[derive(Deserialize)]
struct CapitalRow {
    code: String,
    capital: String,
    lat: f64,
    lon: f64,
}

impl CapitalTable {
    pub fn bundled() -> Self {
        Self::from_reader(BUNDLED_CAPITALS.as_bytes(), "bundled capitals")
            .expect("bundled capitals table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut capitals = BTreeMap::new();
        for row in rdr.deserialize::<CapitalRow>() {
            let row = row.map_err(|e| Error::csv(source_name, e))?;
            capitals.insert(
                CountryCode::new(&row.code),
                Capital {
                    name: row.capital,
                    location: LatLon::new(row.lat, row.lon)?,
                },
            );
        }
        Ok(CapitalTable { capitals })
    }

    pub fn insert(&mut self, code: CountryCode, capital: Capital) {
        self.capitals.insert(code, capital);
    }

    pub fn get(&self, code: &CountryCode) -> Option<&Capital> {
        self.capitals.get(code)
    }

    pub fn location(&self, code: &CountryCode) -> Result<LatLon> {
        self.get(code)
            .map(|c| c.location)
            .ok_or_else(|| Error::MissingCapital(code.clone()))
    }

    pub fn len(&self) -> usize {
        self.capitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capitals.is_empty()
    }
}

/// Display names and region labels keyed by code.
#[derive(Debug, Clone, Default)]
pub struct RegionTable {
    entries: BTreeMap<CountryCode, (String, String)>,
}

#[derive(Deserialize)]
struct RegionRow {
    code: String,
    name: String,
    region: String,
}

impl RegionTable {
    pub fn bundled() -> Self {
        Self::from_reader(BUNDLED_REGIONS.as_bytes(), "bundled regions")
            .expect("bundled region table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = BTreeMap::new();
        for row in rdr.deserialize::<RegionRow>() {
            let row = row.map_err(|e| Error::csv(source_name, e))?;
            entries.insert(CountryCode::new(&row.code), (row.name, row.region));
        }
        Ok(RegionTable { entries })
    }

    pub fn region(&self, code: &CountryCode) -> Option<&str> {
        self.entries.get(code).map(|(_, r)| r.as_str())
    }

    pub fn name(&self, code: &CountryCode) -> Option<&str> {
        self.entries.get(code).map(|(n, _)| n.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = (&CountryCode, &str)> {
        self.entries.iter().map(|(c, (n, _))| (c, n.as_str()))
    }

    /// Replaces region labels through `groups` (label -> group); unlisted labels are kept.
    pub fn regrouped(&self, groups: &BTreeMap<String, String>) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(c, (n, r))| {
                let group = groups.get(r).cloned().unwrap_or_else(|| r.clone());
                (c.clone(), (n.clone(), group))
            })
            .collect();
        RegionTable { entries }
    }
}
