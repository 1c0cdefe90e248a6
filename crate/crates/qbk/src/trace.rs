//! Per-stage counters recorded by the solvers.

/// Per-stage counters of one solver run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveTrace {
    pub stages: Vec<StageRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    pub round: usize,
    pub stage: &'static str,
    pub disjuncts: usize,
    /// Selector groups, cover count or largest class count, depending on the stage.
    pub groups: usize,
    pub variables: usize,
}

impl SolveTrace {
    pub fn push(&mut self, round: usize, stage: &'static str, disjuncts: usize, groups: usize, variables: usize) {
        self.stages.push(StageRecord { round, stage, disjuncts, groups, variables });
    }
}
