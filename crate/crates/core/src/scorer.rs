use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::{Condition, Energy, Error, Proposal, ProposalKind, ScorerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capability {
    EnergyOnly,
    EnergyAndGradient,
}

/// One expert in the ensemble.
///
/// Implementations must be pure: the same `(proposal, condition)` always
/// yields the same energy. Degenerate inputs should be clamped or reported
/// through [`ScorerError`], never returned as NaN.
pub trait Scorer<P>: Send + Sync {
    fn name(&self) -> &str;

    fn accepts(&self) -> ProposalKind;

    fn capability(&self) -> Capability {
        Capability::EnergyOnly
    }

    fn energy(&self, proposal: &P, condition: &Condition) -> Result<f64, ScorerError>;

    /// Gradient of [`Scorer::energy`] with respect to the proposal coordinates.
    fn gradient(&self, _proposal: &P, _condition: &Condition) -> Result<Vec<f64>, ScorerError> {
        Err(ScorerError::GradientUnsupported)
    }
}

/// A scorer together with its ensemble weight.
pub struct ScorerHandle<P> {
    name: String,
    weight: f64,
    capability: Capability,
    scorer: Arc<dyn Scorer<P>>,
}

impl<P> Clone for ScorerHandle<P> {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            weight: self.weight,
            capability: self.capability,
            scorer: Arc::clone(&self.scorer),
        }
    }
}

impl<P> fmt::Debug for ScorerHandle<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScorerHandle")
            .field("name", &self.name)
            .field("weight", &self.weight)
            .field("capability", &self.capability)
            .finish()
    }
}

impl<P> ScorerHandle<P> {
    /// Wraps a scorer with unit weight.
    pub fn new(scorer: impl Scorer<P> + 'static) -> Self {
        Self::from_arc(Arc::new(scorer))
    }

    pub fn from_arc(scorer: Arc<dyn Scorer<P>>) -> Self {
        Self {
            name: scorer.name().to_string(),
            weight: 1.0,
            capability: scorer.capability(),
            scorer,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    /// Overrides the scorer's own name, e.g. to run two copies side by side.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn capability(&self) -> Capability {
        self.capability
    }

    pub fn scorer(&self) -> &dyn Scorer<P> {
        self.scorer.as_ref()
    }
}

/// Energies of every ensemble member for one proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Unweighted per-scorer energies, in ensemble order.
    pub per_scorer: Vec<f64>,
    /// Weighted sum, reduced in ensemble order.
    pub composed: Energy,
}

/// An ordered, non-empty set of weighted scorers.
pub struct EnsembleSpec<P> {
    scorers: Vec<ScorerHandle<P>>,
}

impl<P> Clone for EnsembleSpec<P> {
    fn clone(&self) -> Self {
        Self {
            scorers: self.scorers.clone(),
        }
    }
}

impl<P> fmt::Debug for EnsembleSpec<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.scorers).finish()
    }
}

impl<P> EnsembleSpec<P> {
    pub fn new(scorers: Vec<ScorerHandle<P>>) -> Result<Self, Error> {
        if scorers.is_empty() {
            return Err(Error::InvalidEnsemble("ensemble must not be empty".into()));
        }
        let mut seen = HashSet::new();
        for h in &scorers {
            if !(h.weight.is_finite() && h.weight >= 0.0) {
                return Err(Error::InvalidEnsemble(format!(
                    "scorer `{}` has invalid weight {}",
                    h.name, h.weight
                )));
            }
            if !seen.insert(h.name.as_str()) {
                return Err(Error::InvalidEnsemble(format!(
                    "duplicate scorer name `{}`",
                    h.name
                )));
            }
        }
        Ok(Self { scorers })
    }

    pub fn single(scorer: impl Scorer<P> + 'static) -> Self {
        Self {
            scorers: vec![ScorerHandle::new(scorer)],
        }
    }

    pub fn scorers(&self) -> &[ScorerHandle<P>] {
        &self.scorers
    }

    pub fn len(&self) -> usize {
        self.scorers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scorers.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.scorers.iter().map(|h| h.name()).collect()
    }

    /// `self` followed by `other`. Fails on name collisions.
    pub fn concat(&self, other: &EnsembleSpec<P>) -> Result<Self, Error> {
        let mut all = self.scorers.clone();
        all.extend(other.scorers.iter().cloned());
        Self::new(all)
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, Error> {
        Self::new(
            self.scorers
                .iter()
                .cloned()
                .map(|h| {
                    let w = h.weight * factor;
                    h.with_weight(w)
                })
                .collect(),
        )
    }

    /// The members whose names appear in `names`, keeping ensemble order.
    pub fn subset(&self, names: &[&str]) -> Result<Self, Error> {
        for n in names {
            if !self.scorers.iter().any(|h| h.name() == *n) {
                return Err(Error::InvalidEnsemble(format!("no scorer named `{n}`")));
            }
        }
        Self::new(
            self.scorers
                .iter()
                .filter(|h| names.contains(&h.name()))
                .cloned()
                .collect(),
        )
    }
}

impl<P: Proposal> EnsembleSpec<P> {
    /// Scores `proposal` with every member and reduces in list order.
    pub fn evaluate(&self, proposal: &P, condition: &Condition) -> Result<Evaluation, Error> {
        let mut per_scorer = Vec::with_capacity(self.scorers.len());
        let mut total = 0.0;
        for h in &self.scorers {
            let e = h.energy(proposal, condition)?;
            total += h.weight * e;
            per_scorer.push(e);
        }
        let composed = Energy::new(total).ok_or_else(|| Error::NonFinite {
            scorer: "<ensemble>".into(),
            value: total,
        })?;
        Ok(Evaluation {
            per_scorer,
            composed,
        })
    }
}

impl<P: Proposal> ScorerHandle<P> {
    /// Unweighted energy with kind and finiteness checks.
    pub fn energy(&self, proposal: &P, condition: &Condition) -> Result<f64, Error> {
        let got = proposal.kind();
        let expected = self.scorer.accepts();
        if got != expected {
            return Err(Error::KindMismatch {
                scorer: self.name.clone(),
                expected,
                got,
            });
        }
        let e = self
            .scorer
            .energy(proposal, condition)
            .map_err(|source| Error::Scorer {
                scorer: self.name.clone(),
                source,
            })?;
        if !e.is_finite() {
            return Err(Error::NonFinite {
                scorer: self.name.clone(),
                value: e,
            });
        }
        Ok(e)
    }
}
