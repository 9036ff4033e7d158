//! Stopping rules for the sweep algorithms.

use std::fmt;
use std::sync::Arc;

use crate::tgraph::TGraph;
use crate::weight::{ParseWeightError, Weight};

pub type StopPredicate = Arc<dyn Fn(&TGraph, Weight) -> bool + Send + Sync>;

/// Evaluated after every step on the expanded T-graph and the exponent of
/// that step. `BucketEmpty` never fires early.
#[derive(Clone, Default)]
pub enum StopCriterion {
    #[default]
    BucketEmpty,
    /// Stop once a single arc is left in the bucket (enough for eigenvalues
    /// and optimal W-graphs).
    BucketSizeOne,
    /// Stop after the first step whose exponent is at least the threshold.
    ExponentThreshold(Weight),
    /// Stop once some nontrivial closed class of the T-graph contains a state
    /// of `first` and a state of `second`.
    ClosedClassCovering {
        first: Vec<usize>,
        second: Vec<usize>,
    },
    Custom(StopPredicate),
}

impl fmt::Debug for StopCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopCriterion::BucketEmpty => write!(f, "BucketEmpty"),
            StopCriterion::BucketSizeOne => write!(f, "BucketSizeOne"),
            StopCriterion::ExponentThreshold(d) => write!(f, "ExponentThreshold({d})"),
            StopCriterion::ClosedClassCovering { first, second } => {
                write!(f, "ClosedClassCovering({first:?}, {second:?})")
            }
            StopCriterion::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl StopCriterion {
    /// Whether the run stops after a step. `bucket_len` is the bucket size
    /// after the step.
    pub fn fires(&self, t: &TGraph, exponent: Weight, bucket_len: usize) -> bool {
        match self {
            StopCriterion::BucketEmpty => false,
            StopCriterion::BucketSizeOne => bucket_len <= 1,
            StopCriterion::ExponentThreshold(d) => exponent >= *d,
            StopCriterion::ClosedClassCovering { first, second } => t
                .closed_classes()
                .nontrivial
                .iter()
                .any(|c| c.iter().any(|v| first.contains(v)) && c.iter().any(|v| second.contains(v))),
            StopCriterion::Custom(p) => p(t, exponent),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StopCriterion::BucketEmpty => "bucket-empty".into(),
            StopCriterion::BucketSizeOne => "bucket-size-one".into(),
            StopCriterion::ExponentThreshold(d) => format!("exponent:{d}"),
            StopCriterion::ClosedClassCovering { .. } => "closed-class-covering".into(),
            StopCriterion::Custom(_) => "custom".into(),
        }
    }
}

/// Textual stop rule as given on the command line, before state names are
/// resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopSpec {
    BucketEmpty,
    BucketSizeOne,
    ExponentThreshold(Weight),
    Covering { first: Vec<String>, second: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StopParseError {
    #[error("unknown stop rule `{0}` (expected bucket-empty, bucket-size-one, exponent:<U> or cover:<a,b>/<c,d>)")]
    Unknown(String),
    #[error("stop threshold: {0}")]
    Threshold(#[from] ParseWeightError),
    #[error("cover rule `{0}` needs two nonempty state lists separated by `/`")]
    Cover(String),
    #[error("stop rule names unknown state `{0}`")]
    UnknownState(String),
}

impl std::str::FromStr for StopSpec {
    type Err = StopParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "bucket-empty" => return Ok(StopSpec::BucketEmpty),
            "bucket-size-one" => return Ok(StopSpec::BucketSizeOne),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("exponent:") {
            return Ok(StopSpec::ExponentThreshold(rest.parse()?));
        }
        if let Some(rest) = s.strip_prefix("cover:") {
            let (a, b) = rest
                .split_once('/')
                .ok_or_else(|| StopParseError::Cover(s.to_string()))?;
            let list = |t: &str| -> Vec<String> {
                t.split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(String::from)
                    .collect()
            };
            let (first, second) = (list(a), list(b));
            if first.is_empty() || second.is_empty() {
                return Err(StopParseError::Cover(s.to_string()));
            }
            return Ok(StopSpec::Covering { first, second });
        }
        Err(StopParseError::Unknown(s.to_string()))
    }
}

impl StopSpec {
    pub fn resolve(&self, g: &crate::graph::ChainGraph) -> Result<StopCriterion, StopParseError> {
        let ids = |names: &[String]| -> Result<Vec<usize>, StopParseError> {
            names
                .iter()
                .map(|n| g.state_index(n).ok_or_else(|| StopParseError::UnknownState(n.clone())))
                .collect()
        };
        Ok(match self {
            StopSpec::BucketEmpty => StopCriterion::BucketEmpty,
            StopSpec::BucketSizeOne => StopCriterion::BucketSizeOne,
            StopSpec::ExponentThreshold(d) => StopCriterion::ExponentThreshold(*d),
            StopSpec::Covering { first, second } => StopCriterion::ClosedClassCovering {
                first: ids(first)?,
                second: ids(second)?,
            },
        })
    }
}
