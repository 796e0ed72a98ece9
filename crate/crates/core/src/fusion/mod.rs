//! Cluster organization, weak-SU discarding, decision combining and the
//! closed-form cooperative detection analytics.

mod analytic;
mod rules;
mod topology;

pub use analytic::{
    cluster_coop_prob, coop_pd, coop_pfa, global_coop_prob, max_snr_pdf, QuadratureSettings,
};
pub use rules::{fuse_decisions, fuse_values, FusionRule, GlobalDecision};
pub use topology::{
    assign_clusters, discard_weak, Cluster, ClusterId, ClusterSpec, ClusterTopology,
    DiscardPolicy,
};
