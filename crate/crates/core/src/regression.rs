//! Log-log OLS model of country appearance counts, with inference,
//! collinearity and residual diagnostics, and the one-predictor comparison
//! against UNESCO production counts.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

use crate::country::CountryCode;
use crate::error::{Error, Result};
use crate::socioeconomic::{CovariateRow, Exclusion};

pub const POPULATION_CENTER: f64 = 1e7;
pub const GDP_PER_CAPITA_CENTER: f64 = 1e4;
pub const VIF_FLAG_THRESHOLD: f64 = 10.0;

pub const TERMS: [&str; 6] = [
    "intercept",
    "population",
    "gdp_per_capita",
    "events",
    "distance",
    "population:gdp_per_capita",
];

const REFERENCE_COEFFICIENTS: &str = include_str!("../data/reference_coefficients.csv");

/// Raw (unscaled) predictor values for one country.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predictors {
    pub population: f64,
    pub gdp_per_capita: f64,
    pub events: f64,
    pub distance_km: f64,
}

/// `[1, log10(pop/1e7), log10(gdppc/1e4), log10(events+1), km/1000, pop_c*gdppc_c]`
pub fn design_row(p: &Predictors) -> [f64; 6] {
    let pop = (p.population / POPULATION_CENTER).log10();
    let gdppc = (p.gdp_per_capita / GDP_PER_CAPITA_CENTER).log10();
    [
        1.0,
        pop,
        gdppc,
        (p.events + 1.0).log10(),
        p.distance_km / 1000.0,
        pop * gdppc,
    ]
}

#[derive(Debug, Clone)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub countries: Vec<CountryCode>,
    pub excluded: Vec<Exclusion>,
}

/// Rows with no appearances or non-positive covariates are excluded, not fatal.
pub fn build_design(rows: &[CovariateRow]) -> Design {
    let mut data = Vec::with_capacity(rows.len() * TERMS.len());
    let mut y = Vec::with_capacity(rows.len());
    let mut countries = Vec::with_capacity(rows.len());
    let mut excluded = Vec::new();
    for row in rows {
        let reason = if row.appearances == 0 {
            Some("no appearances (log undefined)")
        } else if !(row.mean_population > 0.0 && row.mean_gdp_per_capita > 0.0) {
            Some("non-positive population or GDP per capita")
        } else if row.distance_from_reference_km.is_nan() || row.distance_from_reference_km < 0.0 {
            Some("invalid distance")
        } else {
            None
        };
        if let Some(reason) = reason {
            log::warn!("excluding {} from design: {reason}", row.code);
            excluded.push(Exclusion {
                code: row.code.clone(),
                reason: reason.to_string(),
            });
            continue;
        }
        data.extend(design_row(&Predictors {
            population: row.mean_population,
            gdp_per_capita: row.mean_gdp_per_capita,
            events: row.events as f64,
            distance_km: row.distance_from_reference_km,
        }));
        y.push((row.appearances as f64).log10());
        countries.push(row.code.clone());
    }
    Design {
        x: DMatrix::from_row_slice(countries.len(), TERMS.len(), &data),
        y: DVector::from_vec(y),
        countries,
        excluded,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionFit {
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    /// (predictors excluding intercept, residual degrees of freedom)
    pub df: (usize, usize),
    pub residual_se: f64,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl RegressionFit {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }
}

fn two_sided_p(t: f64, df: usize) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df > 0");
    2.0 * dist.sf(t.abs())
}

/// Ordinary least squares via Householder QR. The first column of `x` must be
/// the intercept.
pub fn ols_fit(x: &DMatrix<f64>, y: &DVector<f64>, terms: &[&str]) -> Result<RegressionFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    if terms.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: terms.len(),
        });
    }
    if n <= p {
        return Err(Error::TooFewRows {
            rows: n,
            columns: p,
        });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = diag_max * 1e-10;
    let rank = r.diagonal().iter().filter(|v| v.abs() > tol).count();
    if rank < p {
        return Err(Error::RankDeficient { rank, columns: p });
    }

    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { rank, columns: p })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient { rank, columns: p })?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let fitted = x * &beta;
    let residuals = y - &fitted;
    let sse = residuals.norm_squared();
    let y_mean = y.mean();
    let sst: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let df_resid = n - p;
    let k = p - 1;
    let sigma2 = sse / df_resid as f64;

    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) as f64 / df_resid as f64;
    let (f_statistic, f_p_value) = if k == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let f = ((sst - sse) / k as f64) / sigma2;
        let pv = if f.is_infinite() {
            0.0
        } else {
            FisherSnedecor::new(k as f64, df_resid as f64)
                .expect("positive df")
                .sf(f)
        };
        (f, pv)
    };

    let standard_errors: Vec<f64> = (0..p)
        .map(|j| (sigma2 * xtx_inv[(j, j)]).max(0.0).sqrt())
        .collect();
    let t_stats: Vec<f64> = beta
        .iter()
        .zip(&standard_errors)
        .map(|(b, se)| {
            if *se > 0.0 {
                b / se
            } else if *b == 0.0 {
                0.0
            } else {
                b.signum() * f64::INFINITY
            }
        })
        .collect();
    let p_values = t_stats.iter().map(|t| two_sided_p(*t, df_resid)).collect();

    Ok(RegressionFit {
        terms: terms.iter().map(|t| t.to_string()).collect(),
        coefficients: beta.iter().copied().collect(),
        standard_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        df: (k, df_resid),
        residual_se: sigma2.sqrt(),
        fitted: fitted.iter().copied().collect(),
        residuals: residuals.iter().copied().collect(),
    })
}

/// Fits the appearance model on a design built by [`build_design`].
pub fn fit_design(design: &Design) -> Result<RegressionFit> {
    ols_fit(&design.x, &design.y, &TERMS)
}

/// Coefficients of the six-term appearance model, in [`TERMS`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients(pub [f64; 6]);

impl Coefficients {
    /// Two-decimal reference coefficients shipped with the crate.
    pub fn reference() -> Self {
        let mut rdr = csv::Reader::from_reader(REFERENCE_COEFFICIENTS.as_bytes());
        let mut values = [0.0; 6];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.expect("bundled coefficients are valid");
            assert_eq!(&rec[0], TERMS[i]);
            values[i] = rec[1].parse().expect("bundled coefficients are numeric");
        }
        Coefficients(values)
    }

    pub fn from_fit(fit: &RegressionFit) -> Result<Self> {
        if fit.terms.iter().map(String::as_str).ne(TERMS) {
            return Err(Error::InvalidInput(
                "fit does not use the appearance-model terms".into(),
            ));
        }
        let mut values = [0.0; 6];
        values.copy_from_slice(&fit.coefficients);
        Ok(Coefficients(values))
    }
}

/// Expected appearance count on the linear scale.
pub fn predict_appearances(coefficients: &Coefficients, predictors: &Predictors) -> Result<f64> {
    if !(predictors.population > 0.0 && predictors.gdp_per_capita > 0.0) {
        return Err(Error::InvalidInput(
            "population and GDP per capita must be positive".into(),
        ));
    }
    let row = design_row(predictors);
    let log_n: f64 = row
        .iter()
        .zip(coefficients.0.iter())
        .map(|(x, b)| x * b)
        .sum();
    Ok(10f64.powf(log_n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedResidual {
    pub country: CountryCode,
    pub residual: f64,
    pub observed: f64,
    pub predicted: f64,
}

/// Countries ordered from most over-represented to most under-represented.
pub fn residual_ranking(fit: &RegressionFit, design: &Design) -> Vec<RankedResidual> {
    let mut ranked: Vec<RankedResidual> = design
        .countries
        .iter()
        .enumerate()
        .map(|(i, c)| RankedResidual {
            country: c.clone(),
            residual: fit.residuals[i],
            observed: 10f64.powf(design.y[i]),
            predicted: 10f64.powf(fit.fitted[i]),
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.residual
            .total_cmp(&a.residual)
            .then_with(|| a.country.cmp(&b.country))
    });
    ranked
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// (term, VIF) for every non-intercept column.
    pub vif: Vec<(String, f64)>,
    pub high_vif: Vec<String>,
    pub residual_vs_fitted: Vec<(f64, f64)>,
    pub residual_skewness: f64,
    pub residual_excess_kurtosis: f64,
    /// Breusch-Pagan LM statistic (n R² of squared residuals on the design).
    pub breusch_pagan_lm: f64,
    pub breusch_pagan_p: f64,
}

/// Variance inflation factors from auxiliary regressions of each predictor
/// on the remaining columns (intercept included).
pub fn variance_inflation_factors(x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let p = x.ncols();
    (1..p)
        .map(|j| {
            let target = x.column(j).into_owned();
            let others: Vec<usize> = (0..p).filter(|c| *c != j).collect();
            let aux = x.select_columns(&others);
            let names = vec!["x"; others.len()];
            let fit = ols_fit(&aux, &target, &names)?;
            Ok(if fit.r_squared >= 1.0 {
                f64::INFINITY
            } else {
                1.0 / (1.0 - fit.r_squared)
            })
        })
        .collect()
}

fn standardized_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if m2 == 0.0 {
        return (0.0, 0.0);
    }
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

pub fn diagnostics(fit: &RegressionFit, x: &DMatrix<f64>) -> Result<Diagnostics> {
    let vif_values = variance_inflation_factors(x)?;
    let vif: Vec<(String, f64)> = fit.terms[1..].iter().cloned().zip(vif_values).collect();
    let high_vif = vif
        .iter()
        .filter(|(_, v)| *v > VIF_FLAG_THRESHOLD)
        .map(|(t, _)| t.clone())
        .collect();
    let (residual_skewness, residual_excess_kurtosis) = standardized_moments(&fit.residuals);

    let squared = DVector::from_iterator(fit.n(), fit.residuals.iter().map(|r| r * r));
    let names = vec!["x"; x.ncols()];
    let (breusch_pagan_lm, breusch_pagan_p) = match ols_fit(x, &squared, &names) {
        Ok(aux) => {
            let lm = fit.n() as f64 * aux.r_squared;
            let dist = ChiSquared::new((x.ncols() - 1) as f64).expect("df > 0");
            (lm, dist.sf(lm))
        }
        Err(_) => (f64::NAN, f64::NAN),
    };

    Ok(Diagnostics {
        vif,
        high_vif,
        residual_vs_fitted: fit
            .fitted
            .iter()
            .copied()
            .zip(fit.residuals.iter().copied())
            .collect(),
        residual_skewness,
        residual_excess_kurtosis,
        breusch_pagan_lm,
        breusch_pagan_p,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UisCorrelation {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n: usize,
    /// (country, log10 residual); positive means above the regression line.
    pub residuals: Vec<(CountryCode, f64)>,
}

/// One-predictor log-log fit of festival appearances on produced feature films,
/// over countries present in both maps with both counts at least one.
pub fn uis_correlation(
    appearances: &BTreeMap<CountryCode, f64>,
    production: &BTreeMap<CountryCode, f64>,
) -> Result<UisCorrelation> {
    let pairs: Vec<(&CountryCode, f64, f64)> = appearances
        .iter()
        .filter_map(|(c, a)| production.get(c).map(|p| (c, *a, *p)))
        .filter(|(_, a, p)| *a >= 1.0 && *p >= 1.0)
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = pairs.len();
    let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { pairs[i].2.log10() });
    let y = DVector::from_iterator(n, pairs.iter().map(|(_, a, _)| a.log10()));
    let fit = ols_fit(&x, &y, &["intercept", "log10_features_produced"])?;
    Ok(UisCorrelation {
        slope: fit.coefficients[1],
        intercept: fit.coefficients[0],
        r_squared: fit.r_squared,
        adj_r_squared: fit.adj_r_squared,
        n,
        residuals: pairs
            .iter()
            .zip(&fit.residuals)
            .map(|((c, _, _), r)| ((*c).clone(), *r))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn row(code: &str, pop: f64, gdppc: f64, events: usize, km: f64, n: u64) -> CovariateRow {
        CovariateRow {
            code: CountryCode::new(code),
            mean_population: pop,
            mean_gdp_per_capita: gdppc,
            events,
            distance_from_reference_km: km,
            appearances: n,
        }
    }

    #[test]
    fn design_rows_center_and_smooth() {
        let r = design_row(&Predictors {
            population: 1e7,
            gdp_per_capita: 1e4,
            events: 0.0,
            distance_km: 0.0,
        });
        assert_eq!(r, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let r = design_row(&Predictors {
            population: 1e8,
            gdp_per_capita: 1e5,
            events: 9.0,
            distance_km: 2500.0,
        });
        for (got, want) in r.iter().zip([1.0, 1.0, 1.0, 1.0, 2.5, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_appearance_rows_are_excluded() {
        let d = build_design(&[
            row("AAA", 1e7, 1e4, 0, 0.0, 10),
            row("BBB", 1e7, 1e4, 0, 0.0, 0),
        ]);
        assert_eq!(d.countries.len(), 1);
        assert_eq!(d.excluded.len(), 1);
        assert_eq!(d.excluded[0].code.as_str(), "BBB");
        assert_abs_diff_eq!(d.y[0], 1.0);
    }

    #[test]
    fn reference_anchor_predictions() {
        let c = Coefficients::reference();
        let base = Predictors {
            population: 1e7,
            gdp_per_capita: 1e4,
            events: 0.0,
            distance_km: 0.0,
        };
        let n0 = predict_appearances(&c, &base).unwrap();
        assert!((n0 - 112.2).abs() <= 0.1, "{n0}");
        let n1 = predict_appearances(
            &c,
            &Predictors {
                population: 1.01e7,
                ..base
            },
        )
        .unwrap();
        assert!((n1 - n0 - 0.8).abs() <= 0.05, "{}", n1 - n0);
        let far = predict_appearances(
            &c,
            &Predictors {
                distance_km: 1000.0,
                ..base
            },
        )
        .unwrap();
        assert!((far / n0 - 0.891).abs() <= 0.001, "{}", far / n0);
    }

    #[test]
    fn prediction_rejects_non_positive() {
        let c = Coefficients::reference();
        let p = Predictors {
            population: 0.0,
            gdp_per_capita: 1e4,
            events: 0.0,
            distance_km: 0.0,
        };
        assert!(predict_appearances(&c, &p).is_err());
    }

    #[test]
    fn noiseless_recovery() {
        let n = 30;
        let x = DMatrix::from_fn(n, 3, |i, j| match j {
            0 => 1.0,
            1 => i as f64,
            _ => ((i * 7) % 11) as f64,
        });
        let beta = DVector::from_vec(vec![1.5, -0.25, 2.0]);
        let y = &x * &beta;
        let fit = ols_fit(&x, &y, &["c", "a", "b"]).unwrap();
        for (g, w) in fit.coefficients.iter().zip(beta.iter()) {
            assert_abs_diff_eq!(*g, *w, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficiency_and_shape_errors() {
        let x = DMatrix::from_fn(10, 3, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_fn(10, |i, _| i as f64);
        assert!(matches!(
            ols_fit(&x, &y, &["a", "b", "c"]),
            Err(Error::RankDeficient { .. })
        ));
        let small = DMatrix::from_element(2, 3, 1.0);
        assert!(matches!(
            ols_fit(&small, &DVector::zeros(2), &["a", "b", "c"]),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn orthogonal_predictors_have_unit_vif() {
        // centred, mutually orthogonal columns
        let x = DMatrix::from_row_slice(
            4,
            3,
            &[
                1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0,
            ],
        );
        for v in variance_inflation_factors(&x).unwrap() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ranking_is_descending() {
        let rows: Vec<CovariateRow> = (0..12)
            .map(|i| {
                let f = i as f64;
                row(
                    &format!("C{i:02}"),
                    1e6 * (1.0 + f),
                    2e3 * (1.0 + (f * 1.3) % 7.0),
                    i % 4,
                    300.0 * f,
                    5 + (i as u64 * 37) % 50,
                )
            })
            .collect();
        let design = build_design(&rows);
        let fit = fit_design(&design).unwrap();
        let ranked = residual_ranking(&fit, &design);
        assert!(ranked.windows(2).all(|w| w[0].residual >= w[1].residual));
        for r in &ranked {
            assert_abs_diff_eq!(
                r.residual,
                (r.observed / r.predicted).log10(),
                epsilon = 1e-9
            );
        }
        let diag = diagnostics(&fit, &design.x).unwrap();
        assert_eq!(diag.vif.len(), 5);
        assert!(diag.vif.iter().all(|(_, v)| *v >= 1.0 - 1e-9));
    }

    #[test]
    fn proportional_counts_give_unit_slope() {
        let appearances: BTreeMap<CountryCode, f64> = (1..=8)
            .map(|i| {
                (
                    CountryCode::new(&format!("C{i}")),
                    3.0 * i as f64 * i as f64,
                )
            })
            .collect();
        let production: BTreeMap<CountryCode, f64> = (1..=8)
            .map(|i| (CountryCode::new(&format!("C{i}")), i as f64 * i as f64))
            .collect();
        let fit = uis_correlation(&appearances, &production).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.intercept, 3f64.log10(), epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert!(uis_correlation(&appearances, &BTreeMap::new()).is_err());
    }
}
