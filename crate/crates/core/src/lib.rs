//! Sector-level activity forecasting for mmWave initial access.
//!
//! Call-detail-record counts are aggregated per sector and per 10-minute
//! slot ([`ingest`]), forecast one slot ahead with a gated recurrent unit
//! ([`gru`], [`train`]), turned into an SSB sweep order ([`sweep`]) and
//! scored by the access delay they produce in a discrete-event cell-search
//! simulator ([`sim`]).

pub mod fixture;
pub mod gru;
pub mod ingest;
pub mod sector;
pub mod sim;
pub mod sweep;
pub mod train;

pub use sector::{Sector, SECTORS};
