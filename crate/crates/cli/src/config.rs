//! Run configuration: a TOML file, command-line overrides, and path resolution
//! against the dataset root.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use festcircuit::ingest::Period;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DATA_DIR_ENV: &str = "FESTCIRCUIT_DATA_DIR";

/// Optional inputs picked up from the dataset root when not configured.
const CONVENTIONAL_UIS: &str = "uis.csv";
const CONVENTIONAL_ACCREDITATION: &str = "accreditation.csv";
const CONVENTIONAL_LANGUAGES: &str = "language_vectors.csv";
const CONVENTIONAL_ALIASES: &str = "aliases.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root for relative dataset paths.
    pub data_dir: Option<PathBuf>,
    pub entries: PathBuf,
    pub world_bank: PathBuf,
    pub uis: Option<PathBuf>,
    /// Replaces the bundled capital table when set.
    pub capitals: Option<PathBuf>,
    /// Extra aliases on top of the bundled table.
    pub aliases: Option<PathBuf>,
    /// Replaces the bundled region table when set.
    pub regions: Option<PathBuf>,
    pub accreditation: Option<PathBuf>,
    pub language_vectors: Option<PathBuf>,
    pub period: Period,
    pub uis_period: Period,
    pub reference_country: String,
    pub seed: u64,
    pub repeats: usize,
    pub genre_dimension: usize,
    pub min_hosted_events: usize,
    pub star_coverage: f64,
    /// Countries to draw star networks for; empty means the ten largest producers.
    pub star_countries: Vec<String>,
    pub population_thresholds: Vec<f64>,
    pub gdp_per_capita_thresholds: Vec<f64>,
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: None,
            entries: "entries.csv".into(),
            world_bank: "world_bank.csv".into(),
            uis: None,
            capitals: None,
            aliases: None,
            regions: None,
            accreditation: None,
            language_vectors: None,
            period: Period {
                start: 2012,
                end: 2021,
            },
            uis_period: Period {
                start: 2011,
                end: 2017,
            },
            reference_country: "FRA".into(),
            seed: 1,
            repeats: 100,
            genre_dimension: festcircuit::diversity::DEFAULT_GENRE_DIMENSION,
            min_hosted_events: 5,
            star_coverage: 0.2,
            star_countries: Vec::new(),
            population_thresholds: vec![5e6, 2e7, 1e8, 3e8],
            gdp_per_capita_thresholds: vec![3e3, 1e4, 2.5e4, 5e4],
            out_dir: "out".into(),
            workers: None,
        }
    }
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data_dir: Option<PathBuf>,
    pub period: Option<Period>,
    pub seed: Option<u64>,
    pub repeats: Option<usize>,
    pub reference_country: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("config: invalid TOML")
    }

    /// Reads `path` (if given), applies overrides and resolves dataset paths.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let (mut config, config_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("config: cannot read {}", p.display()))?;
                let config =
                    Self::from_toml(&text).with_context(|| format!("config: {}", p.display()))?;
                (config, p.parent().map(Path::to_path_buf))
            }
            None => (Self::default(), None),
        };
        config.apply(overrides);
        let root = config
            .data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .or(config_dir)
            .unwrap_or_else(|| PathBuf::from("."));
        config.resolve(&root);
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.data_dir {
            self.data_dir = Some(v.clone());
        }
        if let Some(v) = o.period {
            self.period = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.repeats {
            self.repeats = v;
        }
        if let Some(v) = &o.reference_country {
            self.reference_country = v.clone();
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
    }

    /// Joins relative paths onto `root` and fills optional inputs that exist
    /// under their conventional names.
    pub fn resolve(&mut self, root: &Path) {
        let join = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                root.join(p)
            }
        };
        self.data_dir = Some(root.to_path_buf());
        self.entries = join(&self.entries);
        self.world_bank = join(&self.world_bank);
        for (slot, conventional) in [
            (&mut self.uis, Some(CONVENTIONAL_UIS)),
            (&mut self.accreditation, Some(CONVENTIONAL_ACCREDITATION)),
            (&mut self.language_vectors, Some(CONVENTIONAL_LANGUAGES)),
            (&mut self.aliases, Some(CONVENTIONAL_ALIASES)),
            (&mut self.capitals, None),
            (&mut self.regions, None),
        ] {
            match (slot.as_ref(), conventional) {
                (Some(p), _) => *slot = Some(join(p)),
                (None, Some(name)) => {
                    let candidate = root.join(name);
                    if candidate.is_file() {
                        *slot = Some(candidate);
                    }
                }
                (None, None) => {}
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.period.start <= self.period.end,
            "config: period start {} after end {}",
            self.period.start,
            self.period.end
        );
        ensure!(
            self.uis_period.start <= self.uis_period.end,
            "config: uis_period start after end"
        );
        ensure!(self.repeats >= 1, "config: repeats must be at least 1");
        ensure!(
            self.genre_dimension >= 1,
            "config: genre_dimension must be at least 1"
        );
        ensure!(
            (0.0..=1.0).contains(&self.star_coverage),
            "config: star_coverage must lie in [0, 1]"
        );
        ensure!(
            self.workers != Some(0),
            "config: workers must be at least 1"
        );
        for (name, list) in [
            ("population_thresholds", &self.population_thresholds),
            ("gdp_per_capita_thresholds", &self.gdp_per_capita_thresholds),
        ] {
            ensure!(
                list.windows(2).all(|w| w[0] < w[1]),
                "config: {name} must be strictly increasing"
            );
        }
        let mut missing = Vec::new();
        for (role, path) in self.input_paths() {
            if !path.is_file() {
                missing.push(format!("{role} ({})", path.display()));
            }
        }
        if !missing.is_empty() {
            bail!("config: missing input files: {}", missing.join(", "));
        }
        Ok(())
    }

    /// Every configured input with its role name.
    pub fn input_paths(&self) -> Vec<(&'static str, &Path)> {
        let mut out: Vec<(&'static str, &Path)> =
            vec![("entries", &self.entries), ("world_bank", &self.world_bank)];
        for (role, p) in [
            ("uis", &self.uis),
            ("capitals", &self.capitals),
            ("aliases", &self.aliases),
            ("regions", &self.regions),
            ("accreditation", &self.accreditation),
            ("language_vectors", &self.language_vectors),
        ] {
            if let Some(p) = p {
                out.push((role, p));
            }
        }
        out
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration,
    /// ignoring the output directory and worker count.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        canonical.workers = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
