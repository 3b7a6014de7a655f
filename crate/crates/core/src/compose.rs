use crate::{Capability, Condition, Continuous, Energy, EnsembleSpec, Error, Proposal};

/// Weighted ensemble energy `sum_n w_n * E_n(proposal, condition)`, summed in
/// list order.
pub fn compose_energies<P: Proposal>(
    proposal: &P,
    ensemble: &EnsembleSpec<P>,
    condition: &Condition,
) -> Result<Energy, Error> {
    ensemble.evaluate(proposal, condition).map(|e| e.composed)
}

/// Weighted ensemble gradient `sum_n w_n * grad E_n`.
///
/// Every member must advertise [`Capability::EnergyAndGradient`]; the check
/// happens before any gradient is evaluated.
pub fn compose_gradients<P: Continuous>(
    proposal: &P,
    ensemble: &EnsembleSpec<P>,
    condition: &Condition,
) -> Result<Vec<f64>, Error> {
    if let Some(h) = ensemble
        .scorers()
        .iter()
        .find(|h| h.capability() != Capability::EnergyAndGradient)
    {
        return Err(Error::Capability {
            scorer: h.name().to_string(),
        });
    }
    let dim = proposal.coords().len();
    let mut total = vec![0.0; dim];
    for h in ensemble.scorers() {
        let expected = h.scorer().accepts();
        if proposal.kind() != expected {
            return Err(Error::KindMismatch {
                scorer: h.name().to_string(),
                expected,
                got: proposal.kind(),
            });
        }
        let g = h
            .scorer()
            .gradient(proposal, condition)
            .map_err(|source| Error::Scorer {
                scorer: h.name().to_string(),
                source,
            })?;
        if g.len() != dim {
            return Err(Error::DimensionMismatch {
                scorer: h.name().to_string(),
                expected: dim,
                got: g.len(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient {
                scorer: h.name().to_string(),
            });
        }
        for (t, gi) in total.iter_mut().zip(&g) {
            *t += h.weight() * gi;
        }
    }
    Ok(total)
}

/// Index and energy of the lowest composed energy among `candidates`.
///
/// Ties go to the lowest index. Returns `Ok(None)` for an empty slice.
pub fn argmin_composed<P: Proposal>(
    candidates: &[P],
    ensemble: &EnsembleSpec<P>,
    condition: &Condition,
) -> Result<Option<(usize, Energy)>, Error> {
    let mut best: Option<(usize, Energy)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let e = compose_energies(c, ensemble, condition)?;
        if best.is_none_or(|(_, b)| e.value() < b.value()) {
            best = Some((i, e));
        }
    }
    Ok(best)
}
