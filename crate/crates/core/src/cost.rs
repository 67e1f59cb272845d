//! Cost models and per-object trace costs.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::trace::{Ref, Rule, StepLabel};

/// A weight for every rule kind.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel<W> {
    pub name: String,
    weights: BTreeMap<Rule, W>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("no weight for rule kind {0}")]
    Missing(Rule),
    #[error("unknown built-in cost model `{0}` (expected `steps` or `memory`)")]
    UnknownBuiltin(String),
}

impl<W: Clone> CostModel<W> {
    pub fn from_fn(name: &str, weight: impl Fn(Rule) -> W) -> Self {
        CostModel { name: name.to_string(), weights: Rule::ALL.iter().map(|&r| (r, weight(r))).collect() }
    }

    pub fn weight(&self, r: Rule) -> &W {
        &self.weights[&r]
    }
}

impl<W: Clone + Zero + One> CostModel<W> {
    /// Every executed statement costs one.
    pub fn steps() -> Self {
        CostModel::from_fn("steps", |_| W::one())
    }

    /// Only object creation costs.
    pub fn memory() -> Self {
        CostModel::from_fn("memory", |r| if r == Rule::New { W::one() } else { W::zero() })
    }

    pub fn builtin(name: &str) -> Result<Self, ModelError> {
        match name {
            "steps" => Ok(Self::steps()),
            "memory" => Ok(Self::memory()),
            other => Err(ModelError::UnknownBuiltin(other.to_string())),
        }
    }
}

impl<W: Clone + FromStr> CostModel<W>
where
    W::Err: fmt::Display,
{
    /// Parses a model file: the first non-blank line is the name, then one
    /// `Rule=weight` per line. `*=weight` sets every rule not listed.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut name = None;
        let mut weights = BTreeMap::new();
        let mut default = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ModelError::Syntax { line: i + 1, message };
            if name.is_none() {
                if line.contains('=') {
                    return Err(err("expected a model name before the weights".into()));
                }
                name = Some(line.to_string());
                continue;
            }
            let (kind, w) = line.split_once('=').ok_or_else(|| err(format!("expected `kind=weight`, got `{line}`")))?;
            let w: W = w.trim().parse().map_err(|e: W::Err| err(format!("bad weight `{}`: {e}", w.trim())))?;
            match kind.trim() {
                "*" => default = Some(w),
                k => {
                    let r: Rule = k.parse().map_err(err)?;
                    weights.insert(r, w);
                }
            }
        }
        let name = name.ok_or(ModelError::Syntax { line: 1, message: "empty model file".into() })?;
        for r in Rule::ALL {
            if let std::collections::btree_map::Entry::Vacant(slot) = weights.entry(r) {
                slot.insert(default.clone().ok_or(ModelError::Missing(r))?);
            }
        }
        Ok(CostModel { name, weights })
    }
}

/// Cost per object; objects without steps are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport<W> {
    pub per_object: BTreeMap<Ref, W>,
    pub total: W,
}

impl<W: Clone + Zero> CostReport<W> {
    /// Cost attributed to `o`; zero if it never ran.
    pub fn of(&self, o: Ref) -> W {
        self.per_object.get(&o).cloned().unwrap_or_else(W::zero)
    }
}

/// Sums the weights of the steps each object performed.
pub fn cost_of_trace<W>(steps: impl IntoIterator<Item = (Ref, Rule)>, model: &CostModel<W>) -> CostReport<W>
where
    W: Clone + Zero + Add<Output = W>,
{
    let mut per_object: BTreeMap<Ref, W> = BTreeMap::new();
    for (o, r) in steps {
        let w = model.weight(r).clone();
        let slot = per_object.entry(o).or_insert_with(W::zero);
        *slot = slot.clone() + w;
    }
    let total = per_object.values().cloned().fold(W::zero(), |a, b| a + b);
    CostReport { per_object, total }
}

pub fn label_costs<'a>(steps: &'a [StepLabel]) -> impl Iterator<Item = (Ref, Rule)> + 'a {
    steps.iter().map(|s| (s.object, s.rule))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preservation<W> {
    pub equal: bool,
    /// `(object, runtime cost, source cost)` for every object that differs.
    pub diff: Vec<(Ref, W, W)>,
}

/// Compares the per-object costs of a runtime trace and its source replay.
pub fn check_preservation<W>(rt: &[StepLabel], src: &[StepLabel], model: &CostModel<W>) -> Preservation<W>
where
    W: Clone + Zero + Add<Output = W> + PartialEq,
{
    let a = cost_of_trace(label_costs(rt), model);
    let b = cost_of_trace(label_costs(src), model);
    let mut objects: Vec<Ref> = a.per_object.keys().chain(b.per_object.keys()).copied().collect();
    objects.sort_unstable();
    objects.dedup();
    let diff: Vec<(Ref, W, W)> = objects
        .into_iter()
        .filter_map(|o| {
            let (x, y) = (a.of(o), b.of(o));
            (x != y).then_some((o, x, y))
        })
        .collect();
    Preservation { equal: diff.is_empty(), diff }
}

/// Non-strict check of the cost of `o` against an upper bound.
pub fn check_bound<W: Clone + Zero + PartialOrd>(report: &CostReport<W>, o: Ref, bound: &W) -> bool {
    report.of(o) <= *bound
}

/// One row of a bounds file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BoundRow {
    pub program: String,
    pub n: u64,
    pub object: Ref,
    pub bound: String,
}

pub fn read_bounds(text: &str) -> Result<Vec<BoundRow>, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    rdr.deserialize().collect()
}
