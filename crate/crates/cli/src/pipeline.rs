//! Loading inputs, validation, and the per-analysis output writers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use festcircuit::balance::{split_report, AccreditationTable, Attribute, MissingPolicy, Split};
use festcircuit::country::{CapitalTable, CountryAliasTable, RegionTable};
use festcircuit::diversity::{
    load_language_vectors, threshold_sweep, train_genre_embeddings, Circuit, DiversityEstimate,
    EmbeddingSpace, Summary,
};
use festcircuit::flows::{build_flow_matrix, row_normalize, star_network, trade_balances};
use festcircuit::ingest::{
    appearances_by_year, assign_film_keys, country_appearance_counts, expanded_row_count,
    filter_period, parse_screenings, weight_to_f64, Period, ScreeningRecord,
};
use festcircuit::regression::{
    build_design, diagnostics, fit_design, residual_ranking, uis_correlation,
};
use festcircuit::socioeconomic::{
    build_profiles, covariate_rows, load_uis, load_world_bank, weighted_period_average,
    CountryProfile, SeriesSelector, UisData, WorldBankData,
};
use festcircuit::CountryCode;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::manifest::{digest_file, Exclusion, FileDigest, Manifest};
use crate::output::{jnum, jopt, num, opt_num, write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Balance,
    Fit,
    Flows,
    Diversity,
    All,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Balance => "balance",
            Analysis::Fit => "fit",
            Analysis::Flows => "flows",
            Analysis::Diversity => "diversity",
            Analysis::All => "all",
        }
    }

    fn includes(self, other: Analysis) -> bool {
        self == Analysis::All || self == other
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "balance" => Analysis::Balance,
            "fit" => Analysis::Fit,
            "flows" => Analysis::Flows,
            "diversity" => Analysis::Diversity,
            "all" => Analysis::All,
            other => bail!("unknown analysis {other:?}"),
        })
    }
}

/// Everything read from disk, plus derived per-country profiles.
pub struct Inputs {
    pub records: Vec<ScreeningRecord>,
    pub period_records: Vec<ScreeningRecord>,
    pub world_bank: WorldBankData,
    pub uis: Option<UisData>,
    pub capitals: CapitalTable,
    pub regions: RegionTable,
    pub accreditation: Option<AccreditationTable>,
    pub languages: Option<EmbeddingSpace>,
    pub profiles: BTreeMap<CountryCode, CountryProfile>,
    pub digests: Vec<FileDigest>,
}

pub fn load_inputs(config: &RunConfig) -> Result<Inputs> {
    let mut digests = Vec::new();
    for (role, path) in config.input_paths() {
        digests.push(digest_file(role, path)?);
    }

    let mut aliases = CountryAliasTable::bundled();
    if let Some(p) = &config.aliases {
        aliases.extend_from_path(p).context("ingest: aliases")?;
    }
    let mut records =
        parse_screenings(&config.entries, Some(&aliases)).context("ingest: entries")?;
    assign_film_keys(&mut records);
    let period_records = filter_period(&records, config.period);

    let world_bank =
        load_world_bank(&config.world_bank, Some(&aliases)).context("socioeconomic: world bank")?;
    let uis = config
        .uis
        .as_deref()
        .map(|p| load_uis(p, Some(&aliases)))
        .transpose()
        .context("socioeconomic: uis")?;
    let capitals = match &config.capitals {
        Some(p) => CapitalTable::from_path(p).context("socioeconomic: capitals")?,
        None => CapitalTable::bundled(),
    };
    let regions = match &config.regions {
        Some(p) => RegionTable::from_path(p).context("socioeconomic: regions")?,
        None => RegionTable::bundled(),
    };
    let accreditation = config
        .accreditation
        .as_deref()
        .map(AccreditationTable::from_path)
        .transpose()
        .context("balance: accreditation")?;
    let languages = config
        .language_vectors
        .as_deref()
        .map(load_language_vectors)
        .transpose()
        .context("diversity: language vectors")?;
    let profiles = build_profiles(
        &period_records,
        &world_bank,
        &capitals,
        &regions,
        config.period,
    )
    .context("socioeconomic: profiles")?;

    Ok(Inputs {
        records,
        period_records,
        world_bank,
        uis,
        capitals,
        regions,
        accreditation,
        languages,
        profiles,
        digests,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub source_rows: usize,
    pub records: usize,
    pub films: usize,
    pub festivals: usize,
    pub festival_series: usize,
    pub countries: usize,
    pub producer_countries: usize,
    pub host_countries: usize,
    pub period: Period,
    pub period_records: usize,
    pub unmapped_world_bank: Vec<String>,
    pub unmapped_uis: Vec<String>,
    pub missing_population: Vec<String>,
    pub missing_gdp: Vec<String>,
    pub missing_capital: Vec<String>,
    pub unknown_languages: Vec<String>,
}

pub fn validate(config: &RunConfig) -> Result<ValidationReport> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    Ok(validation_report(config, &inputs))
}

fn codes<'a>(it: impl Iterator<Item = &'a CountryCode>) -> Vec<String> {
    it.map(|c| c.to_string()).collect()
}

pub fn validation_report(config: &RunConfig, inputs: &Inputs) -> ValidationReport {
    let records = &inputs.records;
    let producers: BTreeSet<&CountryCode> = records
        .iter()
        .flat_map(|r| r.producer_countries.iter())
        .collect();
    let hosts: BTreeSet<&CountryCode> = records.iter().map(|r| &r.host_country).collect();
    let films: BTreeSet<_> = records.iter().map(|r| r.film_key).collect();
    let unknown_languages = match &inputs.languages {
        Some(space) => records
            .iter()
            .flat_map(|r| r.languages.iter())
            .filter(|l| space.position(l).is_none())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        None => Vec::new(),
    };
    let p = &inputs.profiles;
    ValidationReport {
        source_rows: expanded_row_count(records),
        records: records.len(),
        films: films.len(),
        festivals: records
            .iter()
            .map(|r| &r.festival_id)
            .collect::<BTreeSet<_>>()
            .len(),
        festival_series: records
            .iter()
            .map(|r| &r.festival_series_id)
            .collect::<BTreeSet<_>>()
            .len(),
        countries: producers.union(&hosts).count(),
        producer_countries: producers.len(),
        host_countries: hosts.len(),
        period: config.period,
        period_records: inputs.period_records.len(),
        unmapped_world_bank: inputs.world_bank.unmapped_names.clone(),
        unmapped_uis: inputs
            .uis
            .as_ref()
            .map(|u| u.unmapped_names.clone())
            .unwrap_or_default(),
        missing_population: codes(
            p.values()
                .filter(|x| x.population_by_year.is_empty())
                .map(|x| &x.code),
        ),
        missing_gdp: codes(
            p.values()
                .filter(|x| x.gdp_by_year.is_empty())
                .map(|x| &x.code),
        ),
        missing_capital: codes(p.values().filter(|x| x.capital.is_none()).map(|x| &x.code)),
        unknown_languages,
    }
}

/// Collects written files and manifest entries for one run.
struct RunContext<'a> {
    dir: &'a Path,
    files: Vec<String>,
    manifest: Manifest,
}

impl RunContext<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.manifest.warnings.push(message);
    }

    fn exclude(&mut self, stage: &str, item: impl ToString, reason: impl ToString) {
        self.manifest.exclusions.push(Exclusion {
            stage: stage.to_string(),
            item: item.to_string(),
            reason: reason.to_string(),
        });
    }

    fn note(&mut self, key: &str, value: Value) {
        self.manifest.notes.insert(key.to_string(), value);
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
    pub manifest: Manifest,
}

/// Runs `analysis`, writing outputs and `manifest.json` into the configured
/// output directory.
pub fn run(config: &RunConfig, analysis: Analysis) -> Result<RunOutcome> {
    config.validate()?;
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot start worker pool")?
            .install(|| run_inner(config, analysis)),
        None => run_inner(config, analysis),
    }
}

fn run_inner(config: &RunConfig, analysis: Analysis) -> Result<RunOutcome> {
    let inputs = load_inputs(config)?;
    let dir = config.out_dir.as_path();
    std::fs::create_dir_all(dir)
        .with_context(|| format!("output: cannot create {}", dir.display()))?;
    let mut ctx = RunContext {
        dir,
        files: Vec::new(),
        manifest: Manifest::new(analysis.name(), config),
    };
    ctx.manifest.inputs = inputs.digests.clone();
    for name in &inputs.world_bank.unmapped_names {
        ctx.exclude("world_bank", name, "unmapped country name");
    }
    if let Some(uis) = &inputs.uis {
        for name in &uis.unmapped_names {
            ctx.exclude("uis", name, "unmapped country name");
        }
    }

    if analysis.includes(Analysis::Balance) {
        run_balance(config, &inputs, &mut ctx).context("balance")?;
    }
    if analysis.includes(Analysis::Fit) {
        run_fit(config, &inputs, &mut ctx).context("regression")?;
    }
    if analysis.includes(Analysis::Flows) {
        run_flows(config, &inputs, &mut ctx).context("flows")?;
    }
    if analysis.includes(Analysis::Diversity) {
        if inputs.languages.is_some() || analysis == Analysis::Diversity {
            run_diversity(config, &inputs, &mut ctx).context("diversity")?;
        } else {
            ctx.warn("diversity skipped: no language vectors configured".into());
        }
    }

    ctx.files.sort();
    for name in &ctx.files {
        let d = digest_file("output", &dir.join(name))?;
        ctx.manifest.outputs.push(FileDigest {
            path: name.clone(),
            ..d
        });
    }
    ctx.manifest.write(dir)?;
    Ok(RunOutcome {
        out_dir: dir.to_path_buf(),
        outputs: ctx.files,
        manifest: ctx.manifest,
    })
}

const ATTRIBUTES: [Attribute; 2] = [Attribute::Population, Attribute::GdpPerCapita];

fn run_balance(config: &RunConfig, inputs: &Inputs, ctx: &mut RunContext<'_>) -> Result<()> {
    let records = &inputs.period_records;
    let mut splits = vec![Split::All];
    if let Some(a) = &inputs.accreditation {
        splits.push(Split::Accreditation(a));
    }
    splits.push(Split::Region(&inputs.regions));
    splits.push(Split::FestivalSeries);

    let mut report_rows = Vec::new();
    let mut value_rows = Vec::new();
    for attribute in ATTRIBUTES {
        for split in &splits {
            let reports = split_report(
                records,
                *split,
                attribute,
                &inputs.profiles,
                config.period,
                MissingPolicy::Skip,
            )?;
            for r in reports {
                let skipped = r.skipped_pairs;
                report_rows.push(vec![
                    r.split.clone(),
                    r.group.clone(),
                    r.year.map(|y| y.to_string()).unwrap_or_default(),
                    attribute.as_str().to_string(),
                    r.n_entries.to_string(),
                    r.participating_countries.to_string(),
                    skipped.to_string(),
                    num(r.observed_log_mean),
                    num(10f64.powf(r.observed_log_mean)),
                    num(r.uniform_expectation),
                    num(r.proportional_expectation),
                ]);
                if !matches!(split, Split::FestivalSeries) {
                    for v in &r.log_values {
                        value_rows.push(vec![
                            r.split.clone(),
                            r.group.clone(),
                            attribute.as_str().to_string(),
                            num(*v),
                        ]);
                    }
                }
            }
        }
    }
    let path = ctx.path("balance_reports.csv");
    write_csv(
        &path,
        &[
            "split",
            "group",
            "year",
            "attribute",
            "n_entries",
            "participating_countries",
            "skipped_pairs",
            "observed_log10_mean",
            "observed_geometric_mean",
            "uniform_expectation",
            "proportional_expectation",
        ],
        report_rows,
    )?;
    let path = ctx.path("balance_log_values.csv");
    write_csv(
        &path,
        &["split", "group", "attribute", "log10_value"],
        value_rows,
    )?;

    let weighted = country_appearance_counts(records, true);
    let unweighted = country_appearance_counts(records, false);
    let mut rows = Vec::new();
    for (code, profile) in &inputs.profiles {
        let mean = |s: SeriesSelector| {
            weighted_period_average(profile, s, config.period)
                .ok()
                .map(|a| a.value)
        };
        rows.push(vec![
            code.to_string(),
            profile.name.clone(),
            profile.region.clone().unwrap_or_default(),
            unweighted
                .get(code)
                .map(|w| num(weight_to_f64(w)))
                .unwrap_or_else(|| num(0.0)),
            weighted
                .get(code)
                .map(|w| num(weight_to_f64(w)))
                .unwrap_or_else(|| num(0.0)),
            opt_num(mean(SeriesSelector::Population)),
            opt_num(mean(SeriesSelector::GdpPerCapita)),
            profile.hosted_events.to_string(),
        ]);
    }
    let path = ctx.path("country_aggregates.csv");
    write_csv(
        &path,
        &[
            "country",
            "name",
            "region",
            "appearances",
            "weighted_appearances",
            "mean_population",
            "mean_gdp_per_capita",
            "hosted_events",
        ],
        rows,
    )?;
    Ok(())
}

fn run_fit(config: &RunConfig, inputs: &Inputs, ctx: &mut RunContext<'_>) -> Result<()> {
    let reference = CountryCode::new(&config.reference_country);
    let (rows, excluded) = covariate_rows(&inputs.profiles, &reference, config.period)?;
    for e in &excluded {
        ctx.exclude("covariates", &e.code, &e.reason);
    }
    let design = build_design(&rows);
    for e in &design.excluded {
        ctx.exclude("regression", &e.code, &e.reason);
    }
    let fit = fit_design(&design)?;
    let diag = diagnostics(&fit, &design.x)?;
    if !diag.high_vif.is_empty() {
        ctx.warn(format!(
            "variance inflation above 10 for: {}",
            diag.high_vif.join(", ")
        ));
    }

    let table: Vec<Vec<String>> = (0..fit.terms.len())
        .map(|i| {
            vec![
                fit.terms[i].clone(),
                num(fit.coefficients[i]),
                num(fit.standard_errors[i]),
                num(fit.t_stats[i]),
                num(fit.p_values[i]),
            ]
        })
        .collect();
    let path = ctx.path("coefficients.csv");
    write_csv(&path, &["term", "beta", "se", "t", "p"], table)?;

    let ranked = residual_ranking(&fit, &design);
    let path = ctx.path("residual_ranking.csv");
    write_csv(
        &path,
        &["rank", "country", "observed", "predicted", "residual_log10"],
        ranked.iter().enumerate().map(|(i, r)| {
            vec![
                (i + 1).to_string(),
                r.country.to_string(),
                num(r.observed),
                num(r.predicted),
                num(r.residual),
            ]
        }),
    )?;

    let diag_json = json!({
        "n_countries": fit.n(),
        "df_model": fit.df.0,
        "df_residual": fit.df.1,
        "r_squared": jnum(fit.r_squared),
        "adj_r_squared": jnum(fit.adj_r_squared),
        "f_statistic": jnum(fit.f_statistic),
        "f_p_value": jnum(fit.f_p_value),
        "residual_se": jnum(fit.residual_se),
        "vif": diag.vif.iter().map(|(t, v)| json!({"term": t, "vif": jnum(*v)})).collect::<Vec<_>>(),
        "high_vif": diag.high_vif,
        "residual_skewness": jnum(diag.residual_skewness),
        "residual_excess_kurtosis": jnum(diag.residual_excess_kurtosis),
        "breusch_pagan_lm": jnum(diag.breusch_pagan_lm),
        "breusch_pagan_p": jnum(diag.breusch_pagan_p),
        "residual_vs_fitted": design.countries.iter().zip(&diag.residual_vs_fitted)
            .map(|(c, (f, r))| json!({"country": c, "fitted": jnum(*f), "residual": jnum(*r)}))
            .collect::<Vec<_>>(),
    });
    let path = ctx.path("diagnostics.json");
    write_json(&path, &diag_json)?;

    match &inputs.uis {
        Some(uis) => run_uis(config, inputs, uis, ctx)?,
        None => ctx.warn("UIS comparison skipped: no UIS file configured".into()),
    }
    Ok(())
}

fn run_uis(
    config: &RunConfig,
    inputs: &Inputs,
    uis: &UisData,
    ctx: &mut RunContext<'_>,
) -> Result<()> {
    let crop = filter_period(&inputs.records, config.uis_period);
    let appearances: BTreeMap<CountryCode, f64> = appearances_by_year(&crop)
        .into_iter()
        .map(|(c, years)| (c, years.values().sum::<u64>() as f64))
        .collect();
    let production = uis.total_in(config.uis_period);
    let corr = uis_correlation(&appearances, &production)?;
    let rows = corr.residuals.iter().map(|(c, r)| {
        vec![
            c.to_string(),
            num(appearances[c]),
            num(production[c]),
            num(*r),
        ]
    });
    let path = ctx.path("uis_correlation.csv");
    write_csv(
        &path,
        &[
            "country",
            "appearances",
            "features_produced",
            "residual_log10",
        ],
        rows,
    )?;
    let summary = json!({
        "period": config.uis_period,
        "n_countries": corr.n,
        "slope": jnum(corr.slope),
        "intercept": jnum(corr.intercept),
        "r_squared": jnum(corr.r_squared),
        "adj_r_squared": jnum(corr.adj_r_squared),
    });
    let path = ctx.path("uis_summary.json");
    write_json(&path, &summary)
}

fn run_flows(config: &RunConfig, inputs: &Inputs, ctx: &mut RunContext<'_>) -> Result<()> {
    let matrix = build_flow_matrix(&inputs.period_records);
    let mut header: Vec<&str> = vec!["producer"];
    header.extend(matrix.countries.iter().map(CountryCode::as_str));

    let path = ctx.path("flow_matrix.csv");
    write_csv(
        &path,
        &header,
        matrix.countries.iter().zip(&matrix.cells).map(|(c, row)| {
            let mut out = vec![c.to_string()];
            out.extend(row.iter().map(|v| num(*v)));
            out
        }),
    )?;

    let shares = row_normalize(&matrix);
    let mut share_header = header.clone();
    share_header.push("total");
    let path = ctx.path("flow_shares.csv");
    write_csv(
        &path,
        &share_header,
        shares.producers.iter().enumerate().map(|(i, c)| {
            let mut out = vec![c.to_string()];
            out.extend(shares.shares[i].iter().map(|v| num(*v)));
            out.push(num(shares.totals[i]));
            out
        }),
    )?;

    let hosted: BTreeMap<CountryCode, usize> = inputs
        .profiles
        .iter()
        .map(|(c, p)| (c.clone(), p.hosted_events))
        .collect();
    let balances = trade_balances(&matrix, &hosted, config.min_hosted_events);
    let path = ctx.path("trade_balance.csv");
    write_csv(
        &path,
        &[
            "country",
            "hosted_events",
            "imports",
            "exports",
            "domestic",
            "domestic_share",
            "balance_log2",
        ],
        balances.iter().map(|b| {
            vec![
                b.country.to_string(),
                b.hosted_events.to_string(),
                num(b.imports),
                num(b.exports),
                num(b.domestic),
                opt_num(b.domestic_share),
                b.balance.to_string(),
            ]
        }),
    )?;

    let centres: Vec<CountryCode> = if config.star_countries.is_empty() {
        matrix.countries.iter().take(10).cloned().collect()
    } else {
        config
            .star_countries
            .iter()
            .map(|c| CountryCode::new(c))
            .collect()
    };
    let mut networks = Vec::new();
    for centre in &centres {
        let star = match star_network(&matrix, centre, config.star_coverage) {
            Ok(s) => s,
            Err(e) => {
                ctx.warn(format!("star network for {centre} skipped: {e}"));
                continue;
            }
        };
        let mut nodes = vec![json!({"id": centre, "kind": "centre"})];
        let mut edges = Vec::new();
        for p in star.partners.iter().chain(std::iter::once(&star.others)) {
            let kind = if p.country.as_str() == "OTHERS" {
                "others"
            } else {
                "partner"
            };
            nodes.push(json!({"id": p.country, "kind": kind}));
            edges.push(json!({"from": centre, "to": p.country, "weight": jnum(p.outgoing)}));
            edges.push(json!({"from": p.country, "to": centre, "weight": jnum(p.incoming)}));
        }
        networks.push(json!({
            "country": centre,
            "coverage": jnum(star.coverage),
            "total": jnum(star.total),
            "self_loop": jnum(star.self_loop),
            "others_count": star.others_count,
            "nodes": nodes,
            "edges": edges,
        }));
    }
    let path = ctx.path("star_networks.json");
    write_json(&path, &json!({ "networks": networks }))
}

fn summary_rows(estimate: &DiversityEstimate, config: &RunConfig) -> Vec<Vec<String>> {
    let (attribute, op, threshold) = match &estimate.criterion {
        Some(c) => (
            c.attribute.as_str().to_string(),
            c.op.symbol().to_string(),
            num(c.threshold),
        ),
        None => ("circuit".to_string(), String::new(), String::new()),
    };
    let metrics: [(&str, Option<Summary>, usize); 4] = [
        (
            "latent_genre",
            estimate.latent_genre,
            estimate.skipped_genre,
        ),
        (
            "latent_language",
            estimate.latent_language,
            estimate.skipped_language,
        ),
        ("language_count", estimate.language_count, 0),
        ("language_count_pct", estimate.language_count_pct, 0),
    ];
    metrics
        .iter()
        .map(|(metric, s, skipped)| {
            vec![
                attribute.clone(),
                op.clone(),
                threshold.clone(),
                metric.to_string(),
                opt_num(s.map(|s| s.mean)),
                opt_num(s.map(|s| s.ci_low)),
                opt_num(s.map(|s| s.ci_high)),
                estimate.repeats.to_string(),
                config.seed.to_string(),
                estimate.filtered_records.to_string(),
                (estimate.missing_records + skipped).to_string(),
            ]
        })
        .collect()
}

fn run_diversity(config: &RunConfig, inputs: &Inputs, ctx: &mut RunContext<'_>) -> Result<()> {
    let languages = inputs
        .languages
        .as_ref()
        .ok_or_else(|| anyhow!("no language vectors configured"))?;
    let records = &inputs.period_records;
    let genre = train_genre_embeddings(records, config.genre_dimension)?;
    let circuit = Circuit::new(records, &genre, languages);
    for l in &circuit.unknown_languages {
        ctx.exclude("diversity", l, "language without typology vector");
    }

    let mut rows = Vec::new();
    let mut baseline_written = false;
    for (attribute, thresholds) in [
        (Attribute::Population, &config.population_thresholds),
        (Attribute::GdpPerCapita, &config.gdp_per_capita_thresholds),
    ] {
        let sweep = threshold_sweep(
            records,
            &circuit,
            attribute,
            thresholds,
            &inputs.profiles,
            MissingPolicy::Skip,
            config.repeats,
            config.seed,
        )?;
        for estimate in &sweep {
            if estimate.criterion.is_none() {
                if baseline_written {
                    continue;
                }
                baseline_written = true;
            }
            if !estimate.is_defined() {
                ctx.warn(format!(
                    "diversity estimate for {} undefined: empty filtered set",
                    estimate.label()
                ));
            }
            rows.extend(summary_rows(estimate, config));
        }
    }
    let path = ctx.path("diversity_sweep.csv");
    write_csv(
        &path,
        &[
            "attribute",
            "op",
            "threshold",
            "metric",
            "mean",
            "ci_low",
            "ci_high",
            "repeats",
            "seed",
            "filtered_records",
            "skipped_records",
        ],
        rows,
    )?;

    let mut header = vec!["tag".to_string()];
    header.extend((1..=genre.dimension).map(|i| format!("v{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let path = ctx.path("genre_embeddings.csv");
    write_csv(
        &path,
        &header_refs,
        genre.labels.iter().zip(&genre.vectors).map(|(t, v)| {
            let mut row = vec![t.clone()];
            row.extend(v.iter().map(|x| num(*x)));
            row
        }),
    )?;

    let point = circuit.point_metrics();
    ctx.note(
        "diversity",
        json!({
            "genre_dimension": genre.dimension,
            "genre_tags": genre.len(),
            "genre_max_distance": jnum(genre.max_distance),
            "language_max_distance": jnum(languages.max_distance),
            "circuit_languages": circuit.languages.len(),
            "circuit_latent_genre": jopt(point.latent_genre),
            "circuit_latent_language": jopt(point.latent_language),
            "skipped_genre_records": circuit.skipped_genre,
            "skipped_language_records": circuit.skipped_language,
        }),
    );
    Ok(())
}
