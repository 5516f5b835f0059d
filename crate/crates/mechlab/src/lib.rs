//! A laboratory for candidate-constrained facility location on metric
//! spaces: mechanisms that pick a lottery over fixed candidate locations
//! from agent reports, plus the analysis toolkit around them — social-cost
//! evaluation, incentive audits, profile-compression arguments, reductions
//! between input formats, and adversarial lower-bound searches.

pub mod adversary;
pub mod compression;
pub mod evaluation;
pub mod geometry;
pub mod mechanisms;
pub mod reductions;
pub mod truthfulness;

pub use adversary::{
    gap_audit, gap_deterministic_bound, gap_instances, gap_randomized_bound,
    nonstrategic_pair_bound, ratio_search, rd_worst_instance, rd_worst_ratio, replay_bound,
    replay_record, simplex_audit, simplex_vertices, triangle_audit, AdversaryError, BoundAudit,
    BoundReport, SearchConfig, SearchMetric, SearchRecord, SearchReport,
};
pub use compression::{
    compress_fully, left_compress, outward_votes, right_compress, spike_three_block_ratio,
    three_block_instance, tight_profile, CompressionError, ThreeBlock,
};
pub use evaluation::{
    agent_expected_cost, approximation_ratio, candidate_cost, lottery_cost, optimal_candidate,
    truthful_action_profiles, worst_truthful_social_cost, EvaluationError, RatioReport, WorstCase,
};
pub use geometry::{
    distance, favorite_candidates, ranking_zones_line, true_rankings, voting_borders,
    CandidateSet, ExplicitMetric, GeometryError, Instance, MetricSpace, Point, RankingZone,
    ZonePartition,
};
pub use mechanisms::{
    line_profile, locations_of, mechanism_from_name, ranking_profile, rankings_of, spike_as_wpv,
    spike_cdf, spike_weights, vote_profile, votes_of, Action, ActionProfile, CandidateView,
    Claim1, Claim4, Claim5, InputKind, Lottery, Mechanism, MechanismError, Median, Percentile,
    RandomDictator, Spike, UniformRanking, Wpv,
};
pub use reductions::{
    check_reduction, lift, project_location_to_ranking, project_location_to_voting_2cand,
    BorderFraction, ConsistentMap, Lifted, RankingProjection, ReducedMechanism, ReductionCheck,
    ReductionError, ReductionMismatch, VotingProjection,
};
pub use truthfulness::{
    audit_all_percentiles, audit_gsp, audit_unilateral, audit_universal_wpv, border_equal_probe,
    AuditOptions, AuditReport, AuditViolation, BorderProbe, GroupViolation, GspReport,
    TruthfulnessError, UniversalWpvReport,
};
