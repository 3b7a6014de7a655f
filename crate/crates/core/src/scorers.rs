//! Closed-form scorers that work for any continuous proposal.

use crate::{Capability, Condition, Continuous, Proposal, ProposalKind, Scorer, ScorerError};

/// `E(x) = scale / 2 * |x - center|^2`.
#[derive(Debug, Clone)]
pub struct QuadraticEnergy {
    name: String,
    center: Vec<f64>,
    scale: f64,
}

impl QuadraticEnergy {
    pub fn new(name: impl Into<String>, center: Vec<f64>, scale: f64) -> Self {
        Self {
            name: name.into(),
            center,
            scale,
        }
    }

    pub fn centered(name: impl Into<String>, center: Vec<f64>) -> Self {
        Self::new(name, center, 1.0)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn check(&self, x: &[f64]) -> Result<(), ScorerError> {
        if x.len() != self.center.len() {
            return Err(ScorerError::Degenerate(format!(
                "dimension {} does not match center dimension {}",
                x.len(),
                self.center.len()
            )));
        }
        Ok(())
    }
}

impl<P: Continuous> Scorer<P> for QuadraticEnergy {
    fn name(&self) -> &str {
        &self.name
    }

    fn accepts(&self) -> ProposalKind {
        ProposalKind::Continuous
    }

    fn capability(&self) -> Capability {
        Capability::EnergyAndGradient
    }

    fn energy(&self, proposal: &P, _condition: &Condition) -> Result<f64, ScorerError> {
        let x = proposal.coords();
        self.check(x)?;
        let sq: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        Ok(0.5 * self.scale * sq)
    }

    fn gradient(&self, proposal: &P, _condition: &Condition) -> Result<Vec<f64>, ScorerError> {
        let x = proposal.coords();
        self.check(x)?;
        Ok(x.iter()
            .zip(&self.center)
            .map(|(a, c)| self.scale * (a - c))
            .collect())
    }
}

/// Returns the same energy for every proposal. Energy-only.
#[derive(Debug, Clone)]
pub struct ConstantEnergy {
    name: String,
    value: f64,
    kind: ProposalKind,
}

impl ConstantEnergy {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            kind: ProposalKind::Continuous,
        }
    }

    pub fn accepting(mut self, kind: ProposalKind) -> Self {
        self.kind = kind;
        self
    }
}

impl<P: Proposal> Scorer<P> for ConstantEnergy {
    fn name(&self) -> &str {
        &self.name
    }

    fn accepts(&self) -> ProposalKind {
        self.kind
    }

    fn energy(&self, _proposal: &P, _condition: &Condition) -> Result<f64, ScorerError> {
        Ok(self.value)
    }
}
