//! Census statistics, moment predictions and empirical checks.

pub mod census;
pub mod concentration;
pub mod moments;
pub mod summary;
pub mod tv;

pub use census::{multigraph_census, Census};
pub use concentration::{
    concentration_report, exact_mean_matchings, matching_count, ConcentrationModel, ConcentrationReport, ExceedanceRow,
};
pub use moments::{predicted_moments, MomentPrediction, ThetaEval};
pub use summary::{empirical_summary, evaluate, SampleSummary, Statistic};
pub use tv::{tv_against, tv_empirical, tv_exact, TvEstimate};
