use std::path::PathBuf;

use thiserror::Error;

use crate::country::CountryCode;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Malformed {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("{source_name}: missing required column(s): {}", missing.join(", "))]
    Schema {
        source_name: String,
        missing: Vec<String>,
    },

    #[error("unmapped country name(s): {}", .0.join(", "))]
    UnmappedCountries(Vec<String>),

    #[error("series has no observed values")]
    EmptySeries,

    #[error("no {what} value for {country} in {year}")]
    MissingValue {
        what: &'static str,
        country: CountryCode,
        year: i32,
    },

    #[error("no capital coordinates for {0}")]
    MissingCapital(CountryCode),

    #[error("unknown country {0}")]
    UnknownCountry(CountryCode),

    #[error("design matrix is rank deficient (rank {rank} of {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("need more rows than columns, got {rows} rows for {columns} columns")]
    TooFewRows { rows: usize, columns: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate co-occurrence: {0}")]
    DegenerateCooccurrence(String),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(source_name: &str, err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        let message = err.to_string();
        match err.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: source_name.into(),
                source,
            },
            _ => Error::Malformed {
                source_name: source_name.to_string(),
                line,
                message,
            },
        }
    }
}
