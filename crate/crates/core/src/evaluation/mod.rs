//! Official-semantics scoring, significance testing and voting ensembles.

mod ensemble;
mod records;
mod scorer;
mod significance;

pub use ensemble::ensemble_vote;
pub use records::{
    format_predictions, parse_key_file, parse_predictions, read_gold, read_predictions,
    write_predictions, PredictionRecord,
};
pub use scorer::{macro_f1, EvalReport, FamilyScore};
pub use significance::{significance_z_test, ZTest};

/// A sentence id with its label.
pub type IdLabel = (u64, crate::corpus::RelationLabel);
