//! Predictive and retrodictive quantum conditionals.
//!
//! A measurement is a [`Pom`]: positive elements `Π_j` that sum to the
//! identity, with `P(b_j | a_i) = Tr(ρ_i Π_j)`. The state retrodicted from
//! outcome `b_j` is the normalized element `Π_j / Tr Π_j` ([`retro_state`]).
//! For an unbiased source (prior-weighted mixture equal to `1/D`), the
//! preparation events form a POM of their own, `Ξ_i = D P(a_i) ρ_i`, and
//! retrodictive conditionals are plain Born probabilities
//! `Tr(ρ_retr Ξ_i)`. Biased sources go through [`BiasedElements`] and an
//! explicit normalization instead.
//!
//! All lookups are keyed by event label, never by operator equality.

use num_complex::Complex64;
use thiserror::Error;

use crate::bayes::Distribution;
use crate::hilbert::{HilbertError, ModeDims, Operator, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrodictError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("no elements given")]
    Empty,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("element `{0}` is not positive semidefinite")]
    NotPositive(String),
    #[error("elements do not sum to the identity (max deviation {0:e})")]
    Incomplete(f64),
    #[error("state `{label}` has trace {trace}, not 1")]
    NotNormalized { label: String, trace: f64 },
    #[error("prior for `{label}` is {value}, outside [0, 1]")]
    InvalidPrior { label: String, value: f64 },
    #[error("priors sum to {0}, not 1")]
    PriorsNotNormalized(f64),
    #[error("probability {0} outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange(f64),
    #[error("source is biased (max deviation {0:e} from the maximally mixed state); use the biased pathway")]
    BiasedSource(f64),
    #[error("outcome has zero probability (trace {0:e}); its retrodictive state is undefined")]
    ZeroProbabilityOutcome(f64),
    #[error("posterior undefined: every preparation event has zero probability for this outcome")]
    UndefinedPosterior,
    #[error("outcome `{0}` is not in the selected subset")]
    OutsideSubset(String),
}

fn check_unique<'a>(labels: impl Iterator<Item = &'a str>) -> Result<(), RetrodictError> {
    let mut seen: Vec<&str> = Vec::new();
    for l in labels {
        if seen.contains(&l) {
            return Err(RetrodictError::DuplicateLabel(l.to_owned()));
        }
        seen.push(l);
    }
    Ok(())
}

fn common_dims<'a>(ops: impl Iterator<Item = &'a Operator>) -> Result<ModeDims, RetrodictError> {
    let mut dims: Option<&ModeDims> = None;
    for op in ops {
        match dims {
            None => dims = Some(op.dims()),
            Some(d) if d != op.dims() => {
                return Err(HilbertError::DimensionMismatch {
                    left: d.dims().to_vec(),
                    right: op.dims().dims().to_vec(),
                }
                .into())
            }
            _ => {}
        }
    }
    dims.cloned().ok_or(RetrodictError::Empty)
}

fn completeness_deviation<'a>(dims: &ModeDims, ops: impl Iterator<Item = &'a Operator>) -> Result<f64, HilbertError> {
    let mut sum = Operator::zeros(dims);
    for op in ops {
        sum = sum.add(op)?;
    }
    sum.max_abs_diff(&Operator::identity(dims))
}

/// A labelled element of a measurement or preparation POM.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub label: String,
    pub op: Operator,
}

/// Measurement POM: positive elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Pom {
    elements: Vec<Element>,
    dims: ModeDims,
}

impl Pom {
    pub fn new(elements: Vec<(String, Operator)>) -> Result<Self, RetrodictError> {
        Self::with_tol(elements, DEFAULT_TOL)
    }

    pub fn with_tol(elements: Vec<(String, Operator)>, tol: f64) -> Result<Self, RetrodictError> {
        let elements: Vec<Element> = elements.into_iter().map(|(label, op)| Element { label, op }).collect();
        check_unique(elements.iter().map(|e| e.label.as_str()))?;
        let dims = common_dims(elements.iter().map(|e| &e.op))?;
        if let Some(bad) = elements.iter().find(|e| !e.op.is_psd(tol)) {
            return Err(RetrodictError::NotPositive(bad.label.clone()));
        }
        let dev = completeness_deviation(&dims, elements.iter().map(|e| &e.op))?;
        if dev > tol {
            return Err(RetrodictError::Incomplete(dev));
        }
        Ok(Self { elements, dims })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn dims(&self) -> &ModeDims {
        &self.dims
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.elements.iter().map(|e| e.label.as_str())
    }

    pub fn element(&self, label: &str) -> Result<&Operator, RetrodictError> {
        self.elements
            .iter()
            .find(|e| e.label == label)
            .map(|e| &e.op)
            .ok_or_else(|| RetrodictError::UnknownLabel(label.to_owned()))
    }
}

/// One preparation event: label, prior probability and predictive state.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationEvent {
    pub label: String,
    pub prior: f64,
    pub state: Operator,
}

/// Preparation events `a_i` with priors and predictive density operators.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationEnsemble {
    events: Vec<PreparationEvent>,
    dims: ModeDims,
}

impl PreparationEnsemble {
    pub fn new(events: Vec<(String, f64, Operator)>) -> Result<Self, RetrodictError> {
        let events: Vec<PreparationEvent> =
            events.into_iter().map(|(label, prior, state)| PreparationEvent { label, prior, state }).collect();
        check_unique(events.iter().map(|e| e.label.as_str()))?;
        let dims = common_dims(events.iter().map(|e| &e.state))?;
        for e in &events {
            if !e.prior.is_finite() || e.prior < 0.0 || e.prior > 1.0 + DEFAULT_TOL {
                return Err(RetrodictError::InvalidPrior { label: e.label.clone(), value: e.prior });
            }
            if !e.state.is_psd(DEFAULT_TOL) {
                return Err(RetrodictError::NotPositive(e.label.clone()));
            }
            let tr = e.state.trace();
            if (tr.re - 1.0).abs() > DEFAULT_TOL || tr.im.abs() > DEFAULT_TOL {
                return Err(RetrodictError::NotNormalized { label: e.label.clone(), trace: tr.re });
            }
        }
        let sum: f64 = events.iter().map(|e| e.prior).sum();
        if (sum - 1.0).abs() > DEFAULT_TOL {
            return Err(RetrodictError::PriorsNotNormalized(sum));
        }
        Ok(Self { events, dims })
    }

    pub fn events(&self) -> &[PreparationEvent] {
        &self.events
    }

    pub fn dims(&self) -> &ModeDims {
        &self.dims
    }

    /// `Σ_i P(a_i) ρ_i`.
    pub fn mixture(&self) -> Operator {
        self.events.iter().fold(Operator::zeros(&self.dims), |acc, e| {
            acc.add(&e.state.scale_real(e.prior)).expect("ensemble dims are uniform")
        })
    }

    pub fn event(&self, label: &str) -> Result<&PreparationEvent, RetrodictError> {
        self.events.iter().find(|e| e.label == label).ok_or_else(|| RetrodictError::UnknownLabel(label.to_owned()))
    }
}

/// Preparation POM elements `Ξ_i = D P(a_i) ρ_i` of an unbiased source.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparationPom {
    elements: Vec<Element>,
    dims: ModeDims,
}

impl PreparationPom {
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn dims(&self) -> &ModeDims {
        &self.dims
    }

    pub fn element(&self, label: &str) -> Result<&Operator, RetrodictError> {
        self.elements
            .iter()
            .find(|e| e.label == label)
            .map(|e| &e.op)
            .ok_or_else(|| RetrodictError::UnknownLabel(label.to_owned()))
    }

    /// Largest elementwise deviation of `Σ_i Ξ_i` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        completeness_deviation(&self.dims, self.elements.iter().map(|e| &e.op)).expect("uniform dims")
    }
}

/// Weighted preparation operators `Λ_i = P_B(a_i) ρ_i` of a (possibly) biased source.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedElements {
    elements: Vec<Element>,
    dims: ModeDims,
}

impl BiasedElements {
    pub fn new(elements: Vec<(String, Operator)>) -> Result<Self, RetrodictError> {
        let elements: Vec<Element> = elements.into_iter().map(|(label, op)| Element { label, op }).collect();
        check_unique(elements.iter().map(|e| e.label.as_str()))?;
        let dims = common_dims(elements.iter().map(|e| &e.op))?;
        if let Some(bad) = elements.iter().find(|e| !e.op.is_psd(DEFAULT_TOL)) {
            return Err(RetrodictError::NotPositive(bad.label.clone()));
        }
        let total: f64 = elements.iter().map(|e| e.op.trace().re).sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(RetrodictError::PriorsNotNormalized(total));
        }
        Ok(Self { elements, dims })
    }

    pub fn from_ensemble(ens: &PreparationEnsemble) -> Self {
        Self {
            elements: ens
                .events
                .iter()
                .map(|e| Element { label: e.label.clone(), op: e.state.scale_real(e.prior) })
                .collect(),
            dims: ens.dims.clone(),
        }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn dims(&self) -> &ModeDims {
        &self.dims
    }

    /// Deviation of `Σ_i Λ_i` from `(1/D) Σ_i Tr(Λ_i) · 1`.
    pub fn bias(&self) -> f64 {
        let d = self.dims.total() as f64;
        let mut sum = Operator::zeros(&self.dims);
        let mut total = 0.0;
        for e in &self.elements {
            sum = sum.add(&e.op).expect("uniform dims");
            total += e.op.trace().re;
        }
        sum.max_abs_diff(&Operator::identity(&self.dims).scale_real(total / d)).expect("uniform dims")
    }

    pub fn is_biased(&self, tol: f64) -> bool {
        self.bias() > tol
    }
}

/// `Tr(state · element)`, checked to lie in `[−tol, 1+tol]` and clamped to `[0, 1]`.
pub fn born_probability(state: &Operator, element: &Operator) -> Result<f64, RetrodictError> {
    let p = state.trace_product(element)?;
    if p.re < -DEFAULT_TOL || p.re > 1.0 + DEFAULT_TOL || p.im.abs() > DEFAULT_TOL || !p.re.is_finite() {
        return Err(RetrodictError::ProbabilityOutOfRange(p.re));
    }
    Ok(p.re.clamp(0.0, 1.0))
}

/// Whether `Σ_i P(a_i) ρ_i` equals `1/D` within `tol`, elementwise.
pub fn is_unbiased(ens: &PreparationEnsemble, tol: f64) -> bool {
    unbiased_deviation(ens) <= tol
}

fn unbiased_deviation(ens: &PreparationEnsemble) -> f64 {
    let d = ens.dims.total() as f64;
    ens.mixture().max_abs_diff(&Operator::identity(&ens.dims).scale_real(1.0 / d)).expect("uniform dims")
}

/// Preparation POM of an unbiased ensemble.
pub fn preparation_pom(ens: &PreparationEnsemble) -> Result<PreparationPom, RetrodictError> {
    let dev = unbiased_deviation(ens);
    if dev > DEFAULT_TOL {
        return Err(RetrodictError::BiasedSource(dev));
    }
    let d = ens.dims.total() as f64;
    let elements =
        ens.events.iter().map(|e| Element { label: e.label.clone(), op: e.state.scale_real(d * e.prior) }).collect();
    Ok(PreparationPom { elements, dims: ens.dims.clone() })
}

/// Retrodictive density operator `Π / Tr Π` for a measurement element.
pub fn retro_state(element: &Operator) -> Result<Operator, RetrodictError> {
    let tr = element.trace();
    if tr.re <= DEFAULT_TOL {
        return Err(RetrodictError::ZeroProbabilityOutcome(tr.re));
    }
    Ok(element.scale(Complex64::new(1.0 / tr.re, 0.0)))
}

/// Prior probability `Tr(Π)/D` of an outcome under an unbiased source.
pub fn outcome_prior(element: &Operator) -> f64 {
    element.trace().re / element.dims().total() as f64
}

/// `P(a_i | b_j) = Tr(ρ_retr Ξ_i)` for an unbiased source.
pub fn retro_conditional_unbiased(
    prep: &PreparationPom,
    element: &Operator,
    event: &str,
) -> Result<f64, RetrodictError> {
    let retro = retro_state(element)?;
    born_probability(&retro, prep.element(event)?)
}

/// Posterior over every preparation event of an unbiased source.
pub fn retro_distribution_unbiased(prep: &PreparationPom, element: &Operator) -> Result<Distribution, RetrodictError> {
    let retro = retro_state(element)?;
    let probs = prep.elements.iter().map(|e| born_probability(&retro, &e.op)).collect::<Result<Vec<_>, _>>()?;
    Ok(Distribution { labels: prep.elements.iter().map(|e| e.label.clone()).collect(), probs })
}

/// `P(a_i | b_j) = Tr(Λ_i Π_j) / Σ_k Tr(Λ_k Π_j)`.
pub fn retro_conditional_biased(lam: &BiasedElements, element: &Operator, event: &str) -> Result<f64, RetrodictError> {
    let post = retro_distribution_biased(lam, element)?;
    post.get(event).ok_or_else(|| RetrodictError::UnknownLabel(event.to_owned()))
}

/// Posterior over every preparation event of a biased source.
pub fn retro_distribution_biased(lam: &BiasedElements, element: &Operator) -> Result<Distribution, RetrodictError> {
    let weights = lam
        .elements
        .iter()
        .map(|e| Ok(e.op.trace_product(element)?.re.max(0.0)))
        .collect::<Result<Vec<f64>, RetrodictError>>()?;
    let norm: f64 = weights.iter().sum();
    if norm <= DEFAULT_TOL {
        return Err(RetrodictError::UndefinedPosterior);
    }
    Ok(Distribution {
        labels: lam.elements.iter().map(|e| e.label.clone()).collect(),
        probs: weights.iter().map(|w| w / norm).collect(),
    })
}

/// `P(b_j | a)` restricted to a subset of outcomes and renormalized over it.
pub fn predictive_conditional_subset(
    state: &Operator,
    pom: &Pom,
    subset: &[&str],
    outcome: &str,
) -> Result<f64, RetrodictError> {
    if !subset.contains(&outcome) {
        return Err(RetrodictError::OutsideSubset(outcome.to_owned()));
    }
    let mut norm = 0.0;
    let mut hit = 0.0;
    for &label in subset {
        let p = born_probability(state, pom.element(label)?)?;
        norm += p;
        if label == outcome {
            hit = p;
        }
    }
    if norm <= DEFAULT_TOL {
        return Err(RetrodictError::ZeroProbabilityOutcome(norm));
    }
    Ok(hit / norm)
}
