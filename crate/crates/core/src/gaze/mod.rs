//! Gold reading orders from eye-tracking data.

mod align;
mod consolidate;
mod scanpath;

pub use align::{
    assign_gaze, first_visit_order, gold_pipeline, last_visit_order, repair_missing, AlignmentConfig, GoldOrder,
    RawAssignment,
};
pub use consolidate::consolidate;
pub use scanpath::{classify_pattern, scanpath_stats, Compass, PatternThresholds, ReadingPattern, ScanpathStats};
