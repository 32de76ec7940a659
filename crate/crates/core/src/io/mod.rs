//! File formats and artifact plumbing.

mod csv;
mod dot;
mod fs;
mod manifest;
mod report;

pub use self::csv::{csv_string, load_csv, parse_csv, write_csv, LABEL_COLUMN};
pub use dot::{export_dot, DotDocument, DotError, DotOptions};
pub use fs::write_atomic;
pub use manifest::{config_digest, manifest_path, RunManifest};
pub use report::{
    communities_csv, constraints_csv, ranked, ranking_csv, report, CommunityRow, RankedPredicate, ReportBundle,
    ReportRequest,
};
