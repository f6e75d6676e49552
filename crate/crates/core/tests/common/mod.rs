//! Independent reference implementations and synthetic fixtures shared by
//! the property suites and the acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;

use festcircuit::diversity::{EmbeddingSpace, SpaceKind};
use festcircuit::ingest::ScreeningRecord;
use festcircuit::CountryCode;
use rand::Rng;

/// Standard normal draw (Box-Muller).
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Gaussian elimination with partial pivoting on a dense square system.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (target, source) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *target -= f * source;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// OLS coefficients from the normal equations XᵀX β = Xᵀy.
pub fn normal_equations_ols(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, yi) in x.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    gauss_solve(xtx, xty)
}

/// Well-conditioned design: intercept plus `p - 1` standard normal columns.
pub fn synthetic_design<R: Rng>(rng: &mut R, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let mut row = vec![1.0];
            row.extend((1..p).map(|_| gaussian(rng)));
            row
        })
        .collect()
}

pub fn linear_response<R: Rng>(rng: &mut R, x: &[Vec<f64>], beta: &[f64], noise: f64) -> Vec<f64> {
    x.iter()
        .map(|row| row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>() + noise * gaussian(rng))
        .collect()
}

pub fn record(id: usize, host: &str, producers: &[&str], year: i32) -> ScreeningRecord {
    ScreeningRecord {
        title: format!("film {id}"),
        film_key: None,
        festival_id: format!("{host}-{year}"),
        festival_series_id: host.to_string(),
        event_year: year,
        host_country: CountryCode::new(host),
        producer_countries: producers.iter().map(|p| CountryCode::new(p)).collect(),
        production_year: year - 1,
        languages: vec![],
        genre_tags: vec![],
        source_line: id as u64 + 2,
    }
}

pub fn country_pool(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("C{i:02}")).collect()
}

/// Records with 1-4 distinct producers and a host drawn from `countries`.
pub fn random_records<R: Rng>(rng: &mut R, n: usize, countries: &[String]) -> Vec<ScreeningRecord> {
    (0..n)
        .map(|i| {
            let host = &countries[rng.random_range(0..countries.len())];
            let k = rng.random_range(1..=4.min(countries.len()));
            let mut producers: Vec<&str> = Vec::new();
            while producers.len() < k {
                let c = countries[rng.random_range(0..countries.len())].as_str();
                if !producers.contains(&c) {
                    producers.push(c);
                }
            }
            record(i, host, &producers, rng.random_range(2012..=2021))
        })
        .collect()
}

/// Cell sums accumulated directly from records, keyed by (producer, host).
pub fn naive_flow_cells(records: &[ScreeningRecord]) -> BTreeMap<(String, String), f64> {
    let mut cells = BTreeMap::new();
    for r in records {
        let w = 1.0 / r.producer_countries.len() as f64;
        for p in &r.producer_countries {
            *cells
                .entry((p.to_string(), r.host_country.to_string()))
                .or_insert(0.0) += w;
        }
    }
    cells
}

/// Random orthogonal matrix by Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

pub fn apply(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Fixture for bootstrap checks: `n` films over eight genre tags in 2-D and
/// twelve languages in 3-D, tags and languages drawn with a skew.
pub fn bootstrap_fixture<R: Rng>(
    rng: &mut R,
    n: usize,
) -> (Vec<ScreeningRecord>, EmbeddingSpace, EmbeddingSpace) {
    let tags: Vec<String> = (0..8).map(|i| format!("tag{i}")).collect();
    let genre = EmbeddingSpace::new(
        SpaceKind::Genre,
        tags.clone(),
        (0..8)
            .map(|i| {
                let a = i as f64 * std::f64::consts::PI / 4.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
    )
    .unwrap();
    let langs: Vec<String> = (0..12).map(|i| format!("lang{i}")).collect();
    let language = EmbeddingSpace::new(
        SpaceKind::Language,
        langs.clone(),
        (0..12)
            .map(|_| (0..3).map(|_| gaussian(rng)).collect())
            .collect(),
    )
    .unwrap();
    let skewed = |rng: &mut R, m: usize| -> usize {
        let u: f64 = rng.random();
        ((u * u) * m as f64) as usize
    };
    let records = (0..n)
        .map(|i| {
            let mut r = record(i, "HHH", &["PPP"], 2015);
            let nt = rng.random_range(1..=3);
            let mut t: Vec<String> = (0..nt).map(|_| tags[skewed(rng, 8)].clone()).collect();
            t.sort();
            t.dedup();
            r.genre_tags = t;
            let nl = rng.random_range(1..=2);
            let mut l: Vec<String> = (0..nl).map(|_| langs[skewed(rng, 12)].clone()).collect();
            l.sort();
            l.dedup();
            r.languages = l;
            r
        })
        .collect();
    (records, genre, language)
}

/// Profiles with random population and GDP for 2012-2021 and no capital.
pub fn synthetic_profiles<R: Rng>(
    rng: &mut R,
    countries: &[String],
) -> BTreeMap<CountryCode, festcircuit::socioeconomic::CountryProfile> {
    countries
        .iter()
        .map(|c| {
            let code = CountryCode::new(c);
            let pop = 10f64.powf(rng.random_range(5.0..9.0));
            let gdppc = 10f64.powf(rng.random_range(2.5..5.0));
            let profile = festcircuit::socioeconomic::CountryProfile {
                code: code.clone(),
                name: c.clone(),
                region: None,
                population_by_year: (2012..=2021)
                    .map(|y| (y, pop * (1.0 + 0.01 * (y - 2012) as f64)))
                    .collect(),
                gdp_by_year: (2012..=2021).map(|y| (y, pop * gdppc)).collect(),
                capital: None,
                hosted_events: 0,
                appearance_weight_by_year: (2012..=2021).map(|y| (y, 1)).collect(),
            };
            (code, profile)
        })
        .collect()
}
