//! ISO 9241-411 multidirectional tapping: layouts, trial logs and their
//! aggregation into condition-level error rates and movement times.

mod aggregate;
mod design;
mod layout;
mod log_csv;
mod trial;

pub use aggregate::{
    aggregate, trial_measures, AggregateReport, ConditionSummary, GrandSummary, ParticipantSummary,
    Rejection, TrialMeasure,
};
pub use design::{latin_square_order, ExperimentDesign};
pub use layout::{click_order, generate_layout, is_hit, TargetLayout};
pub use log_csv::{read_trials_csv, write_trials_csv, TRIAL_CSV_HEADER};
pub use trial::{Block, Point, SessionLog, TrialRecord};
