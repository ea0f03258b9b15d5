//! Library half of the `flowsched` command: grid parsing, solve pipelines
//! and the JSON report types (see `docs/schemas.md`).

pub mod bench;
pub mod grid;
pub mod run;
