//! Datum files, result records, corpus generation, and the command runner.

pub mod command;
pub mod corpus;
pub mod datum_file;
pub mod record;

pub use command::{run_command, Flags, Verb};
pub use datum_file::{datum_digest, parse_datum, parse_datum_str, serialize_datum, Datum, ParsedDatum, SCHEMA_VERSION};
pub use record::{ResultRecord, Status, ValueRecord};
