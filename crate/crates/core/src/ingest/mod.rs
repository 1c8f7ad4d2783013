//! Timetable sources: GTFS feed directories and a seeded generator.

pub mod gtfs;
pub mod synthetic;

pub use gtfs::{load_gtfs, IngestError, IngestReport};
pub use synthetic::{generate_synthetic, GeneratorError, GeneratorSpec};
