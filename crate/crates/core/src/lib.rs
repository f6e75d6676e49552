//! Quantitative analysis of national representation in the film festival
//! circuit.
//!
//! The modules follow the data flow: [`ingest`] turns the programming
//! listings into collapsed [`ingest::ScreeningRecord`]s, [`socioeconomic`]
//! attaches population/GDP covariates, and the analysis modules
//! ([`balance`], [`regression`], [`flows`], [`diversity`]) consume both.

pub mod balance;
pub mod country;
pub mod diversity;
pub mod error;
pub mod flows;
pub mod format;
pub mod ingest;
pub mod regression;
pub mod socioeconomic;

pub use country::CountryCode;
pub use error::{Error, Result};
