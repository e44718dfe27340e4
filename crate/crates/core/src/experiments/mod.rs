//! Structural studies: exhaustive small hypergraphs, community rewiring
//! with finite-size scaling, and the budget-multiplier sweep.

mod budget;
mod communities;
mod enumerate;
mod fit;

pub use budget::{budget_sweep, snowball_tasks, sub_instance, BudgetSweep, SweepPoint, SweepRow};
pub use communities::{
    build_communities, rewire, scaling_experiment, swap_memberships, CommunitySpec, ScalingFit, ScalingMode,
    ScalingResult, ScalingRow, Scheme,
};
pub use enumerate::{
    admissible_edges, candidate_count, canonical_form, consensus_time, diffusion_comparison, encode_edges,
    enumerate_small, enumeration_csv, representatives, EnumeratedHypergraph, MAX_CANDIDATES,
};
pub use fit::{fit_power_law, t_quantile_975, PowerLawFit};
