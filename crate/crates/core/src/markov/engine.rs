use std::num::NonZeroUsize;

use serde::Serialize;

use super::{Alphabet, MarkovError, Rule};

/// Step budget used when the caller does not pick one.
pub const DEFAULT_STEP_LIMIT: NonZeroUsize = match NonZeroUsize::new(10_000) {
    Some(n) => n,
    None => unreachable!(),
};

/// An ordered list of ground rules over an alphabet.
///
/// `origins[i]` is the 0-based index of the source line (rule or schema)
/// that produced `rules[i]`; schema expansions share one origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovProgram {
    alphabet: Alphabet,
    rules: Vec<Rule>,
    origins: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule_index: usize,
    pub position: usize,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Terminated,
    Blocked,
    StepLimit,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Terminated => "terminated",
            RunStatus::Blocked => "blocked",
            RunStatus::StepLimit => "step_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    #[serde(rename = "final")]
    pub final_string: String,
    pub trace: Vec<TraceStep>,
}

impl MarkovProgram {
    /// Builds a program where every rule is its own origin.
    pub fn new(alphabet: Alphabet, rules: Vec<Rule>) -> Result<Self, MarkovError> {
        let origins = (0..rules.len()).collect();
        Self::with_origins(alphabet, rules, origins)
    }

    pub(crate) fn with_origins(
        alphabet: Alphabet,
        rules: Vec<Rule>,
        origins: Vec<usize>,
    ) -> Result<Self, MarkovError> {
        if rules.is_empty() {
            return Err(MarkovError::EmptyProgram);
        }
        debug_assert_eq!(rules.len(), origins.len());
        for rule in &rules {
            rule.validate(&alphabet)?;
        }
        Ok(Self {
            alphabet,
            rules,
            origins,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Source rule that the ground rule at `rule_index` came from.
    pub fn origin(&self, rule_index: usize) -> usize {
        self.origins[rule_index]
    }

    /// Applies the first rule whose left-hand side occurs in `seq`.
    pub fn step(&self, seq: &str) -> Option<TraceStep> {
        self.rules.iter().enumerate().find_map(|(rule_index, rule)| {
            rule.apply_once(seq).map(|(after, position)| TraceStep {
                rule_index,
                position,
                before: seq.to_string(),
                after,
            })
        })
    }

    /// Runs until a stop rule fires, no rule applies, or `step_limit`
    /// steps have been taken. When the budget runs out on a string that
    /// no rule matches, the run counts as blocked.
    pub fn run(&self, seq: &str, step_limit: NonZeroUsize) -> RunOutcome {
        let mut current = seq.to_string();
        let mut trace = Vec::new();
        for _ in 0..step_limit.get() {
            let Some(step) = self.step(&current) else {
                return RunOutcome {
                    status: RunStatus::Blocked,
                    final_string: current,
                    trace,
                };
            };
            let stop = self.rules[step.rule_index].is_stop;
            current.clone_from(&step.after);
            trace.push(step);
            if stop {
                return RunOutcome {
                    status: RunStatus::Terminated,
                    final_string: current,
                    trace,
                };
            }
        }
        let status = if self.rules.iter().any(|r| r.matches(&current)) {
            RunStatus::StepLimit
        } else {
            RunStatus::Blocked
        };
        RunOutcome {
            status,
            final_string: current,
            trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nz(n: usize) -> NonZeroUsize {
        NonZeroUsize::new(n).unwrap()
    }

    #[test]
    fn blocked_when_nothing_matches() {
        let p = MarkovProgram::new(Alphabet::lowercase(), vec![Rule::new("a", "b")]).unwrap();
        assert_eq!(p.step("ccc"), None);
        let out = p.run("ccc", DEFAULT_STEP_LIMIT);
        assert_eq!(out.status, RunStatus::Blocked);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn pure_stop_rule_deletes_and_halts() {
        let p = MarkovProgram::new(Alphabet::lowercase(), vec![Rule::stop("a", "")]).unwrap();
        let out = p.run("a", DEFAULT_STEP_LIMIT);
        assert_eq!(out.status, RunStatus::Terminated);
        assert_eq!(out.final_string, "");
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn exhausted_budget_on_dead_string_is_blocked() {
        let p = MarkovProgram::new(Alphabet::lowercase(), vec![Rule::new("ab", "ba")]).unwrap();
        let out = p.run("ab", nz(1));
        assert_eq!(out.final_string, "ba");
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.status, RunStatus::Blocked);
    }

    #[test]
    fn looping_program_hits_step_limit() {
        let p = MarkovProgram::new(Alphabet::lowercase(), vec![Rule::new("a", "a")]).unwrap();
        let out = p.run("a", nz(3));
        assert_eq!(out.status, RunStatus::StepLimit);
        assert_eq!(out.trace.len(), 3);
    }

    #[test]
    fn first_rule_wins_over_leftmost_position() {
        let p = MarkovProgram::new(
            Alphabet::lowercase(),
            vec![Rule::new("c", "x"), Rule::new("a", "y")],
        )
        .unwrap();
        let s = p.step("abc").unwrap();
        assert_eq!((s.rule_index, s.position, s.after.as_str()), (0, 2, "abx"));
    }

    #[test]
    fn rejects_stop_marker_and_unknown_symbols() {
        let a = Alphabet::lowercase();
        assert_eq!(
            MarkovProgram::new(a.clone(), vec![Rule::new("a·", "b")]),
            Err(MarkovError::StopMarkerInRule)
        );
        assert_eq!(
            MarkovProgram::new(a.clone(), vec![Rule::new("A", "b")]),
            Err(MarkovError::UnknownSymbol('A'))
        );
        assert_eq!(MarkovProgram::new(a, vec![]), Err(MarkovError::EmptyProgram));
    }
}
