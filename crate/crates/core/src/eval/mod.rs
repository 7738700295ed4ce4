//! Metrics, repeated-split experiments, grid search and the dominance and
//! echelon ranking of models.

mod experiment;
mod metrics;
mod ranking;

pub use experiment::{
    compare_models, draw_split, fit_split, grid_search, run_experiment, split_seed, to_label_predictions,
    ConfidenceInterval, Experiment, ExperimentSettings, GridRow, GridSearchResult, ModelSpec, RunResult, Split,
    MAX_REDRAWS,
};
pub use metrics::{
    f1_macro, f1_micro, f1_weighted, hamming_loss, interval_jaccard, jaccsim, kendall_tau, kendall_tau_row,
    lr_accuracy, lr_loss, metric, subset_accuracy, MetricKind,
};
pub use ranking::{
    average_ranks, dominance_and_echelons, echelons, read_results_csv, write_results_csv, DominanceMatrix, Echelon, EchelonRanking,
    RankingReport,
};
