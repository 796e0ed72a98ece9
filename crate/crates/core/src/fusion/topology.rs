//! SU-to-cluster assignment and the weak-SU discard step.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::signal::SuId;

/// Identifier of a cluster within a topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClusterId(pub u32);

/// One cluster: its members and the head that reports for them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    /// Non-empty, ascending member ids.
    pub members: Vec<SuId>,
    pub head: SuId,
}

/// Disjoint clusters covering all `l_total` SUs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterTopology {
    clusters: Vec<Cluster>,
    l_total: usize,
}

impl ClusterTopology {
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn l_total(&self) -> usize {
        self.l_total
    }
}

/// How SUs are grouped: an equal split into a given number of clusters (any
/// remainder spread round-robin over the first clusters) or an explicit
/// member list per cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClusterSpec {
    EqualSplit(usize),
    Explicit(Vec<Vec<u32>>),
}

/// Builds a validated topology over SUs `0..l_total`. Heads default to the
/// lowest member id of each cluster.
pub fn assign_clusters(l_total: usize, spec: &ClusterSpec) -> Result<ClusterTopology> {
    if l_total == 0 {
        return Err(Error::invalid("need at least one SU"));
    }
    let clusters = match spec {
        ClusterSpec::EqualSplit(j) => {
            let j = *j;
            if j == 0 || j > l_total {
                return Err(Error::invalid(format!(
                    "cluster count {j} must lie in 1..={l_total}"
                )));
            }
            let base = l_total / j;
            let remainder = l_total % j;
            let mut next = 0u32;
            (0..j)
                .map(|c| {
                    let size = base + usize::from(c < remainder);
                    let members: Vec<SuId> =
                        (0..size).map(|_| { let id = SuId(next); next += 1; id }).collect();
                    Cluster {
                        id: ClusterId(c as u32),
                        head: members[0],
                        members,
                    }
                })
                .collect()
        }
        ClusterSpec::Explicit(groups) => {
            if groups.is_empty() {
                return Err(Error::invalid("explicit assignment needs at least one cluster"));
            }
            let mut seen = BTreeSet::new();
            let mut clusters = Vec::with_capacity(groups.len());
            for (c, group) in groups.iter().enumerate() {
                if group.is_empty() {
                    return Err(Error::invalid(format!("cluster {c} has no members")));
                }
                let mut members: Vec<SuId> = group.iter().map(|&id| SuId(id)).collect();
                members.sort_unstable();
                for su in &members {
                    if su.0 as usize >= l_total {
                        return Err(Error::invalid(format!(
                            "SU {} out of range for L={l_total}",
                            su.0
                        )));
                    }
                    if !seen.insert(*su) {
                        return Err(Error::invalid(format!(
                            "SU {} assigned to more than one cluster",
                            su.0
                        )));
                    }
                }
                clusters.push(Cluster {
                    id: ClusterId(c as u32),
                    head: members[0],
                    members,
                });
            }
            if seen.len() != l_total {
                return Err(Error::invalid(format!(
                    "explicit assignment covers {} of {l_total} SUs",
                    seen.len()
                )));
            }
            clusters
        }
    };
    Ok(ClusterTopology { clusters, l_total })
}

/// Minimum received power an SU must show to stay in its cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscardPolicy {
    pub delta: f64,
}

impl DiscardPolicy {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::invalid("discard threshold must be finite and >= 0"));
        }
        Ok(DiscardPolicy { delta })
    }
}

/// Keeps exactly the SUs whose power reaches the threshold (boundary
/// inclusive). An empty result is legal; the caller decides what a trial
/// with no reporting SUs means.
pub fn discard_weak(powers: &[(SuId, f64)], policy: &DiscardPolicy) -> Vec<SuId> {
    let mut retained: Vec<SuId> = powers
        .iter()
        .filter(|(_, p)| *p >= policy.delta)
        .map(|(id, _)| *id)
        .collect();
    retained.sort_unstable();
    retained
}
