use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Point within a column update at which `Ω` is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// New off-diagonal column written, diagonal still the old `ω₂₂`.
    AfterBeta,
    /// Diagonal rewritten as `γ + βᵀΩ₁₁⁻¹β`.
    AfterGamma,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::AfterBeta => "after_beta",
            Stage::AfterGamma => "after_gamma",
        }
    }
}

/// Positive-definiteness audit over column updates.
///
/// `updates_total` counts column updates; an update is a violation if `Ω`
/// failed the check at any of its stages. `by_column_stage` keeps the raw
/// per-stage failure counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationAudit {
    pub updates_total: u64,
    pub violations: u64,
    pub by_column_stage: BTreeMap<String, u64>,
}

impl ViolationAudit {
    pub fn new() -> Self {
        let mut by_column_stage = BTreeMap::new();
        for stage in [Stage::AfterBeta, Stage::AfterGamma] {
            by_column_stage.insert(stage.label().to_string(), 0);
        }
        ViolationAudit {
            updates_total: 0,
            violations: 0,
            by_column_stage,
        }
    }

    pub(crate) fn record_update(&mut self, failed: &[Stage]) {
        self.updates_total += 1;
        if !failed.is_empty() {
            self.violations += 1;
        }
        for stage in failed {
            *self.by_column_stage.entry(stage.label().to_string()).or_insert(0) += 1;
        }
    }

    pub fn stage_count(&self, stage: Stage) -> u64 {
        self.by_column_stage.get(stage.label()).copied().unwrap_or(0)
    }

    /// Fraction of column updates that produced a non-PD `Ω`.
    pub fn violation_ratio(&self) -> f64 {
        if self.updates_total == 0 {
            0.0
        } else {
            self.violations as f64 / self.updates_total as f64
        }
    }

    pub fn merge(&mut self, other: &ViolationAudit) {
        self.updates_total += other.updates_total;
        self.violations += other.violations;
        for (k, v) in &other.by_column_stage {
            *self.by_column_stage.entry(k.clone()).or_insert(0) += v;
        }
    }
}
