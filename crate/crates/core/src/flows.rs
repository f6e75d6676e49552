//! Producer-to-host flow accounting: the weighted matrix, export shares,
//! trade balances and single-country star networks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::ingest::ScreeningRecord;

/// Tolerance for cumulative-coverage comparisons.
const COVERAGE_EPSILON: f64 = 1e-12;

/// Square matrix of weighted entries, producer rows and host columns over one
/// country list. A record adds `1/n` to `(p, host)` for each of its `n` producers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowMatrix {
    pub countries: Vec<CountryCode>,
    pub cells: Vec<Vec<f64>>,
    #[serde(skip)]
    index: BTreeMap<CountryCode, usize>,
}

impl FlowMatrix {
    pub fn len(&self) -> usize {
        self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.countries.is_empty()
    }

    pub fn index_of(&self, code: &CountryCode) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn cell(&self, producer: &CountryCode, host: &CountryCode) -> f64 {
        match (self.index_of(producer), self.index_of(host)) {
            (Some(p), Some(h)) => self.cells[p][h],
            _ => 0.0,
        }
    }

    pub fn row_total(&self, i: usize) -> f64 {
        self.cells[i].iter().sum()
    }

    pub fn column_total(&self, j: usize) -> f64 {
        self.cells.iter().map(|row| row[j]).sum()
    }

    pub fn total(&self) -> f64 {
        (0..self.len()).map(|i| self.row_total(i)).sum()
    }
}

/// Countries are ordered by weighted production total, descending, then code.
pub fn build_flow_matrix(records: &[ScreeningRecord]) -> FlowMatrix {
    let mut sparse: BTreeMap<(CountryCode, CountryCode), f64> = BTreeMap::new();
    let mut produced: BTreeMap<CountryCode, f64> = BTreeMap::new();
    let mut seen: BTreeSet<CountryCode> = BTreeSet::new();
    for r in records {
        let w = r.weight();
        seen.insert(r.host_country.clone());
        for p in &r.producer_countries {
            *sparse
                .entry((p.clone(), r.host_country.clone()))
                .or_default() += w;
            *produced.entry(p.clone()).or_default() += w;
            seen.insert(p.clone());
        }
    }
    let mut countries: Vec<CountryCode> = seen.into_iter().collect();
    countries.sort_by(|a, b| {
        let wa = produced.get(a).copied().unwrap_or(0.0);
        let wb = produced.get(b).copied().unwrap_or(0.0);
        wb.total_cmp(&wa).then_with(|| a.cmp(b))
    });
    let index: BTreeMap<CountryCode, usize> = countries
        .iter()
        .enumerate()
        .map(|(i, c)| (c.clone(), i))
        .collect();
    let mut cells = vec![vec![0.0; countries.len()]; countries.len()];
    for ((p, h), w) in sparse {
        cells[index[&p]][index[&h]] = w;
    }
    FlowMatrix {
        countries,
        cells,
        index,
    }
}

/// Row-normalized export shares; `totals` holds each row's absolute sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareMatrix {
    pub producers: Vec<CountryCode>,
    pub hosts: Vec<CountryCode>,
    pub shares: Vec<Vec<f64>>,
    pub totals: Vec<f64>,
}

/// Producers with an empty row are dropped.
pub fn row_normalize(matrix: &FlowMatrix) -> ShareMatrix {
    let mut producers = Vec::new();
    let mut shares = Vec::new();
    let mut totals = Vec::new();
    for (i, c) in matrix.countries.iter().enumerate() {
        let total = matrix.row_total(i);
        if total <= 0.0 {
            continue;
        }
        producers.push(c.clone());
        shares.push(matrix.cells[i].iter().map(|v| v / total).collect());
        totals.push(total);
    }
    ShareMatrix {
        producers,
        hosts: matrix.countries.clone(),
        shares,
        totals,
    }
}

/// `log2(imports / exports)`, or the reason it is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Balance {
    Finite(f64),
    NoImports,
    NoExports,
    NoTrade,
}

impl Balance {
    pub fn from_flows(imports: f64, exports: f64) -> Self {
        match (imports > 0.0, exports > 0.0) {
            (true, true) => Balance::Finite((imports / exports).log2()),
            (false, true) => Balance::NoImports,
            (true, false) => Balance::NoExports,
            (false, false) => Balance::NoTrade,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Balance::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Balance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Balance::Finite(v) => f.write_str(&crate::format::fixed(*v)),
            Balance::NoImports => f.write_str("no-imports"),
            Balance::NoExports => f.write_str("no-exports"),
            Balance::NoTrade => f.write_str("no-trade"),
        }
    }
}

impl Serialize for Balance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Balance::Finite(v) => s.serialize_f64(crate::format::round6(*v)),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeBalance {
    pub country: CountryCode,
    pub hosted_events: usize,
    pub imports: f64,
    pub exports: f64,
    pub domestic: f64,
    pub balance: Balance,
    /// `domestic / (domestic + exports)`; `None` when the country produced nothing.
    pub domestic_share: Option<f64>,
}

pub fn trade_balance(matrix: &FlowMatrix, i: usize, hosted_events: usize) -> TradeBalance {
    let domestic = matrix.cells[i][i];
    let imports = matrix.column_total(i) - domestic;
    let exports = matrix.row_total(i) - domestic;
    // subtraction can leave tiny negative residue
    let imports = imports.max(0.0);
    let exports = exports.max(0.0);
    let produced = domestic + exports;
    TradeBalance {
        country: matrix.countries[i].clone(),
        hosted_events,
        imports,
        exports,
        domestic,
        balance: Balance::from_flows(imports, exports),
        domestic_share: (produced > 0.0).then(|| domestic / produced),
    }
}

/// Balances for every matrix country hosting at least `min_hosted_events`
/// editions, in matrix order.
pub fn trade_balances(
    matrix: &FlowMatrix,
    hosted_events: &BTreeMap<CountryCode, usize>,
    min_hosted_events: usize,
) -> Vec<TradeBalance> {
    matrix
        .countries
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let hosted = hosted_events.get(c).copied().unwrap_or(0);
            (hosted >= min_hosted_events).then(|| trade_balance(matrix, i, hosted))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partner {
    pub country: CountryCode,
    /// Weight the centre country sends to this partner (its exports there).
    pub outgoing: f64,
    /// Weight this partner sends to the centre country.
    pub incoming: f64,
}

impl Partner {
    pub fn combined(&self) -> f64 {
        self.outgoing + self.incoming
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarNetwork {
    pub country: CountryCode,
    pub coverage: f64,
    pub partners: Vec<Partner>,
    pub others: Partner,
    pub others_count: usize,
    pub self_loop: f64,
    /// Row total plus column total with the domestic cell counted once.
    pub total: f64,
}

/// Partners sorted by combined weight; the smallest prefix reaching
/// `coverage` of all partner traffic is kept and the rest pooled as Others.
pub fn star_network(
    matrix: &FlowMatrix,
    country: &CountryCode,
    coverage: f64,
) -> Result<StarNetwork> {
    if !(0.0..=1.0).contains(&coverage) {
        return Err(Error::InvalidInput(format!(
            "coverage {coverage} outside [0, 1]"
        )));
    }
    let i = matrix
        .index_of(country)
        .ok_or_else(|| Error::UnknownCountry(country.clone()))?;
    let mut all: Vec<Partner> = matrix
        .countries
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, c)| Partner {
            country: c.clone(),
            outgoing: matrix.cells[i][j],
            incoming: matrix.cells[j][i],
        })
        .filter(|p| p.combined() > 0.0)
        .collect();
    all.sort_by(|a, b| {
        b.combined()
            .total_cmp(&a.combined())
            .then_with(|| a.country.cmp(&b.country))
    });

    let partner_total: f64 = all.iter().map(Partner::combined).sum();
    let target = coverage * partner_total;
    let mut kept = 0;
    let mut running = 0.0;
    while kept < all.len() && running + COVERAGE_EPSILON * partner_total.max(1.0) < target {
        running += all[kept].combined();
        kept += 1;
    }
    let rest = all.split_off(kept);
    let others = Partner {
        country: CountryCode::new("OTHERS"),
        outgoing: rest.iter().map(|p| p.outgoing).sum(),
        incoming: rest.iter().map(|p| p.incoming).sum(),
    };
    let self_loop = matrix.cells[i][i];
    Ok(StarNetwork {
        country: country.clone(),
        coverage,
        partners: all,
        others,
        others_count: rest.len(),
        self_loop,
        total: matrix.row_total(i) + matrix.column_total(i) - self_loop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn record(host: &str, producers: &[&str]) -> ScreeningRecord {
        ScreeningRecord {
            title: "t".into(),
            film_key: None,
            festival_id: format!("{host}-2015"),
            festival_series_id: host.into(),
            event_year: 2015,
            host_country: CountryCode::new(host),
            producer_countries: producers.iter().map(|p| CountryCode::new(p)).collect(),
            production_year: 2014,
            languages: vec![],
            genre_tags: vec![],
            source_line: 2,
        }
    }

    fn code(s: &str) -> CountryCode {
        CountryCode::new(s)
    }

    #[test]
    fn coproduction_splits_weight() {
        let m = build_flow_matrix(&[record("XXX", &["AAA", "BBB"])]);
        assert_eq!(m.cell(&code("AAA"), &code("XXX")), 0.5);
        assert_eq!(m.cell(&code("BBB"), &code("XXX")), 0.5);
        assert_eq!(m.total(), 1.0);
    }

    #[test]
    fn domestic_cell() {
        let m = build_flow_matrix(&[record("AAA", &["AAA"])]);
        assert_eq!(m.cell(&code("AAA"), &code("AAA")), 1.0);
        let tb = trade_balances(&m, &BTreeMap::new(), 0);
        assert_eq!(tb[0].domestic_share, Some(1.0));
        assert_eq!(tb[0].balance, Balance::NoTrade);
    }

    #[test]
    fn ten_records_total_ten() {
        let recs: Vec<_> = (0..10)
            .map(|i| match i % 3 {
                0 => record("FRA", &["FRA", "DEU"]),
                1 => record("DEU", &["USA", "GBR", "FRA"]),
                _ => record("ITA", &["ITA"]),
            })
            .collect();
        let m = build_flow_matrix(&recs);
        assert_abs_diff_eq!(m.total(), 10.0, epsilon = 1e-12);
        let tb = trade_balances(&m, &BTreeMap::new(), 0);
        let imports: f64 = tb.iter().map(|t| t.imports).sum();
        let exports: f64 = tb.iter().map(|t| t.exports).sum();
        assert_abs_diff_eq!(imports, exports, epsilon = 1e-12);
    }

    #[test]
    fn ordering_by_production_total() {
        let m = build_flow_matrix(&[
            record("ZZZ", &["BBB"]),
            record("ZZZ", &["BBB"]),
            record("ZZZ", &["AAA"]),
        ]);
        assert_eq!(m.countries, vec![code("BBB"), code("AAA"), code("ZZZ")]);
    }

    #[test]
    fn single_row_normalization() {
        let m = build_flow_matrix(&[
            record("XXX", &["AAA"]),
            record("XXX", &["AAA"]),
            record("YYY", &["AAA"]),
            record("YYY", &["AAA"]),
        ]);
        let s = row_normalize(&m);
        assert_eq!(s.producers, vec![code("AAA")]);
        let i = m.index_of(&code("XXX")).unwrap();
        let j = m.index_of(&code("YYY")).unwrap();
        assert_eq!((s.shares[0][i], s.shares[0][j]), (0.5, 0.5));
        assert_eq!(s.totals, vec![4.0]);
    }

    #[test]
    fn parity_and_sentinels() {
        assert_eq!(Balance::from_flows(3.0, 3.0), Balance::Finite(0.0));
        assert_eq!(Balance::from_flows(0.0, 2.0).to_string(), "no-imports");
        assert_eq!(Balance::from_flows(2.0, 0.0).to_string(), "no-exports");
        let m = build_flow_matrix(&[record("AAA", &["BBB"]), record("BBB", &["AAA"])]);
        for tb in trade_balances(&m, &BTreeMap::new(), 0) {
            assert_eq!(tb.balance, Balance::Finite(0.0));
        }
    }

    #[test]
    fn hosting_threshold_filters() {
        let m = build_flow_matrix(&[record("AAA", &["BBB"])]);
        let hosted: BTreeMap<_, _> = [(code("AAA"), 5)].into_iter().collect();
        let tb = trade_balances(&m, &hosted, 5);
        assert_eq!(tb.len(), 1);
        assert_eq!(tb[0].country, code("AAA"));
        assert_eq!(tb[0].balance, Balance::NoExports);
    }

    #[test]
    fn star_coverage_prefix() {
        let mut recs = Vec::new();
        for (partner, n) in [("PPP", 5), ("QQQ", 3), ("RRR", 2)] {
            for _ in 0..n {
                recs.push(record(partner, &["CCC"]));
            }
        }
        recs.push(record("CCC", &["CCC"]));
        let m = build_flow_matrix(&recs);
        let star = star_network(&m, &code("CCC"), 0.5).unwrap();
        assert_eq!(star.partners.len(), 1);
        assert_eq!(star.partners[0].country, code("PPP"));
        assert_eq!(star.others.combined(), 5.0);
        assert_eq!(star.self_loop, 1.0);
        let sum: f64 = star.partners.iter().map(Partner::combined).sum::<f64>()
            + star.others.combined()
            + star.self_loop;
        assert_abs_diff_eq!(sum, star.total, epsilon = 1e-12);

        let full = star_network(&m, &code("CCC"), 1.0).unwrap();
        assert_eq!(full.partners.len(), 3);
        assert_eq!(full.others_count, 0);
        assert!(star_network(&m, &code("NOPE"), 0.5).is_err());
    }
}
