//! Decision trees over the sector product space: DISCOVER, the exploration
//! algorithm `A_k`, revealments, influences and exact OSSS checks.

mod algorithm;
mod discrete;
mod estimate;

pub use algorithm::{discover, discover_world, run_algorithm_k, run_algorithm_k_world, DecisionTrace, Discovery, Reason, TraceStep};
pub use discrete::{verify_osss_discrete, Coordinate, DecisionTree, DiscreteOSSSCase, OsssReport, MAX_INPUTS};
pub use estimate::{
    estimate_influence, estimate_revealment, lemma4_audit, resample_stream, write_sector_csv, InfluenceReport,
    Lemma4Report, RevealmentReport, SectorMap,
};
