//! Hard decision combining at cluster heads and the fusion center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::{Decision, LocalDecision};

/// Hard combining rule.
///
/// `Majority` declares occupied on more than half the votes; an exact tie on
/// an even count also declares occupied, erring toward protecting the
/// licensed transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionRule {
    And,
    Or,
    Majority,
}

/// The fusion center's verdict with its inputs for auditability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalDecision {
    pub value: Decision,
    pub contributing: Vec<Decision>,
    pub rule_used: FusionRule,
}

/// Combines bare decisions under a rule.
pub fn fuse_values(values: &[Decision], rule: FusionRule) -> Result<Decision> {
    if values.is_empty() {
        return Err(Error::invalid("cannot fuse an empty decision list"));
    }
    let occupied = values.iter().filter(|d| **d == Decision::Occupied).count();
    let n = values.len();
    let value = match rule {
        FusionRule::And => occupied == n,
        FusionRule::Or => occupied > 0,
        FusionRule::Majority => occupied * 2 >= n,
    };
    Ok(if value { Decision::Occupied } else { Decision::Free })
}

/// Combines local decisions into a global one.
pub fn fuse_decisions(decisions: &[LocalDecision], rule: FusionRule) -> Result<GlobalDecision> {
    let contributing: Vec<Decision> = decisions.iter().map(|d| d.value).collect();
    let value = fuse_values(&contributing, rule)?;
    Ok(GlobalDecision {
        value,
        contributing,
        rule_used: rule,
    })
}
