//! Datasets: loading, unit scaling, synthetic generation, assignment
//! synthesis, and descriptive and psychometric checks.

mod csv_io;
mod dataset;
mod describe;
mod fuzzy;
mod synth;

pub use csv_io::{load_csv, read_csv, save_csv, write_csv};
pub use dataset::{prepare, Dataset, Manifest, DEFAULT_EPSILON};
pub use describe::{
    all_covariances_positive, assignment_stats, covariance_matrix, dataset_stats, pair_violates,
    sum_area_violation_test, ArrangementResult, Arrangements, DatasetStats, ViolationReport,
};
pub use fuzzy::{
    calibrate_lambda, fuzzy_cmeans, lambda_cut_row, synth_assignment, AssignmentSynthSpec, FuzzyParams,
    SynthMode, SynthReport, CARDINALITY_TOLERANCE,
};
pub use synth::{mcdonald_omega, synth_congeneric, CongenericSpec, Instrument};

/// A synthetic stand-in for an instrument's dataset with sum-score classes.
pub fn instrument_dataset(instrument: Instrument, m: usize, seed: u64) -> crate::Result<Dataset> {
    let ds = synth_congeneric(&instrument.spec(m), seed)?;
    let (cutoffs, names) = instrument.classes();
    let (y, _) = synth_assignment(&ds, &AssignmentSynthSpec::sumscore(cutoffs))?;
    ds.with_assignment(y, names)
}
