//! Exact counting oracles and the asymptotic enumeration formulas they check.

pub mod avoiding;
pub mod bipartite;
pub mod distribution;
pub mod matchings;
pub mod pairs;

pub use avoiding::{exact_avoiding_count, mckay_avoiding_estimate, AvoidanceEstimate, AvoidanceInstance};
pub use bipartite::{
    conditional_edge_probability, exact_bipartite_count, exact_bipartite_count_avoiding, mckay_bipartite_estimate,
    BipartiteDegreePair, BipartiteEstimate, EdgeProbability, ProbabilityMode,
};
pub use distribution::{
    enumerate_pairings, exact_gnp_distribution, exact_model_distribution, exact_model_law, multigraphs_with_degrees,
    pairing_fiber_size, ExactModel, FiniteDistribution, Weight,
};
pub use matchings::{
    all_perfect_matchings, count_perfect_matchings, list_perfect_matchings, MatchingConstraints, ParallelEdges,
};
pub use pairs::{matching_overlap_histogram, matching_pair_count, PairCount, PairCountMode};
