use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    pub fn holds(self, statistic: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => statistic <= threshold,
            Relation::AtLeast => statistic >= threshold,
        }
    }
}

/// `statistics[statistic] <relation> thresholds[threshold]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub statistic: String,
    pub relation: Relation,
    pub threshold: String,
}

/// Result of one experiment. Maps are ordered, so serialisation is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: ExperimentKind,
    pub parameters: Value,
    pub statistics: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub notes: Vec<String>,
    pub samples_written: Option<String>,
}

impl Report {
    pub fn new(kind: ExperimentKind, parameters: Value) -> Self {
        Self {
            kind,
            parameters,
            statistics: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            notes: Vec::new(),
            samples_written: None,
        }
    }

    pub fn stat(&mut self, key: impl Into<String>, value: f64) {
        self.statistics.insert(key.into(), value);
    }

    pub fn threshold(&mut self, key: impl Into<String>, value: f64) {
        self.thresholds.insert(key.into(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Records a statistic, its threshold and the verdict comparing them.
    pub fn check(
        &mut self,
        name: impl Into<String>,
        (stat_key, value): (impl Into<String>, f64),
        relation: Relation,
        (threshold_key, bound): (impl Into<String>, f64),
    ) -> bool {
        let statistic = stat_key.into();
        let threshold = threshold_key.into();
        let passed = relation.holds(value, bound);
        self.statistics.insert(statistic.clone(), value);
        self.thresholds.insert(threshold.clone(), bound);
        self.verdicts.insert(
            name.into(),
            Verdict {
                passed,
                statistic,
                relation,
                threshold,
            },
        );
        passed
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.values().all(|v| v.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.verdicts
            .iter()
            .filter(|(_, v)| !v.passed)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// Every verdict refers to a statistic and threshold present in the
    /// report and agrees with them.
    pub fn is_consistent(&self) -> bool {
        self.verdicts.values().all(|v| {
            match (
                self.statistics.get(&v.statistic),
                self.thresholds.get(&v.threshold),
            ) {
                (Some(&s), Some(&t)) => v.relation.holds(s, t) == v.passed,
                _ => false,
            }
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}
