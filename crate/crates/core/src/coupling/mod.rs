//! Constructive couplings between the models.

pub mod blossom;
pub mod dout;
pub mod extract;
pub mod quantile;
pub mod rejection;
pub mod report;
pub mod sandwich;
pub mod strassen;
pub mod threshold;

pub use blossom::{find_perfect_matching, maximum_matching};
pub use dout::{dout_gnp_embed, dout_gnp_embed_with_state, OutCouplingState, Regime};
pub use extract::{extract_perfect_matching, matchings_via_2out, split_dout, split_out_set, ExtractedMatching};
pub use quantile::{dominates, quantile_coupling, IntDistribution, QuantileCoupling};
pub use rejection::{rejection_embed, rejection_embed_with, AcceptScale, RejectionSampler};
pub use report::EmbeddingReport;
pub use sandwich::{sandwich_run, sandwich_run_with, SandwichOptions, SandwichReport, StageRecord};
pub use strassen::{
    build_optimal_coupling, build_optimal_coupling_weights, degree_coupling, strassen_deficiency,
    strassen_deficiency_weights, Deficiency, DegreeCoupling, JointCoupling, Relation,
};
pub use threshold::{lambert_w_lower, theta, Threshold, ThresholdFunctions};
