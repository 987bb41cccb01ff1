//! Random instance generators and independent oracles shared by the
//! integration tests. Nothing here calls into the retrodiction code paths
//! under test; traces and Bayes posteriors are recomputed by hand.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qretro::hilbert::{ModeDims, Operator};
use rand::Rng;

pub type Rows = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// `A A†` for a random square `A`; full rank with probability one.
pub fn random_psd<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    &a * a.adjoint()
}

/// Random density operator, either mixed or (with `pure`) a projector.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize, pure: bool) -> DMatrix<Complex64> {
    let m = if pure {
        let v = DMatrix::from_fn(dim, 1, |_, _| random_complex(rng));
        &v * v.adjoint()
    } else {
        random_psd(rng, dim)
    };
    let tr = m.trace();
    m / tr
}

pub fn inverse_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let d = eig.eigenvalues.map(|x| c(1.0 / x.sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// `k` positive elements summing to the identity: `S^{-1/2} M_i S^{-1/2}`.
pub fn random_pom_matrices<R: Rng>(rng: &mut R, dim: usize, k: usize) -> Vec<DMatrix<Complex64>> {
    let ms: Vec<_> = (0..k).map(|_| random_psd(rng, dim)).collect();
    let sum = ms.iter().fold(DMatrix::zeros(dim, dim), |acc, m| acc + m);
    let s = inverse_sqrt(&sum);
    ms.iter().map(|m| hermitize(&(&s * m * &s))).collect()
}

pub fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub fn op(m: &DMatrix<Complex64>) -> Operator {
    Operator::from_matrix(ModeDims::single(m.nrows()).unwrap(), m.clone()).unwrap()
}

/// Explicit double loop `Σ_jk a_jk b_kj`.
pub fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::ZERO;
    for j in 0..n {
        for k in 0..n {
            s += a[(j, k)] * b[(k, j)];
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub dim: usize,
    pub priors: Vec<f64>,
    pub states: Vec<DMatrix<Complex64>>,
    pub pom: Vec<DMatrix<Complex64>>,
    pub unbiased: bool,
}

impl Instance {
    pub fn event_labels(&self) -> Vec<String> {
        (0..self.states.len()).map(|i| format!("a{i}")).collect()
    }

    pub fn outcome_labels(&self) -> Vec<String> {
        (0..self.pom.len()).map(|j| format!("b{j}")).collect()
    }

    /// `P(a_i, b_j) = P(a_i) Tr(ρ_i Π_j)`.
    pub fn joint(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .zip(&self.priors)
            .map(|(rho, p)| self.pom.iter().map(|pi| p * trace_product(rho, pi).re).collect())
            .collect()
    }

    /// Column-normalized joint; `None` where the outcome cannot occur.
    pub fn bayes_posterior(&self, outcome: usize) -> Option<Vec<f64>> {
        let joint = self.joint();
        let col: Vec<f64> = joint.iter().map(|r| r[outcome]).collect();
        let total: f64 = col.iter().sum();
        (total > 1e-9).then(|| col.iter().map(|x| x / total).collect())
    }
}

/// Unbiased source: preparation elements `Ξ_i` from a random POM, with
/// `P(a_i) = Tr Ξ_i / D` and `ρ_i = Ξ_i / Tr Ξ_i`.
pub fn unbiased_instance<R: Rng>(rng: &mut R, dim: usize, events: usize, outcomes: usize) -> Instance {
    let xi = random_pom_matrices(rng, dim, events);
    let priors = xi.iter().map(|x| x.trace().re / dim as f64).collect();
    let states = xi.iter().map(|x| x / x.trace()).collect();
    Instance { dim, priors, states, pom: random_pom_matrices(rng, dim, outcomes), unbiased: true }
}

pub fn biased_instance<R: Rng>(rng: &mut R, dim: usize, events: usize, outcomes: usize) -> Instance {
    let raw: Vec<f64> = (0..events).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let priors = raw.iter().map(|x| x / total).collect();
    let states = (0..events)
        .map(|_| {
            let pure = rng.random_bool(0.5);
            random_density(rng, dim, pure)
        })
        .collect();
    Instance { dim, priors, states, pom: random_pom_matrices(rng, dim, outcomes), unbiased: false }
}

/// `η^{n+1} C(k, n) (1−η)^{k−n}` for `k ≥ n`, else 0.
pub fn detector_closed_form(k: usize, n: usize, eta: f64) -> f64 {
    if k < n {
        return 0.0;
    }
    let mut binom = 1.0;
    for i in 0..n {
        binom *= (k - i) as f64 / (i + 1) as f64;
    }
    eta.powi(n as i32 + 1) * binom * (1.0 - eta).powi((k - n) as i32)
}

/// `|⟨a|b⟩|²` for normalized kets, recomputed here.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

/// `⟨ψ|ρ|ψ⟩` with `ψ` normalized.
pub fn state_fidelity(rho: &Operator, psi: &[Complex64]) -> f64 {
    let m = rho.matrix();
    let mut s = Complex64::ZERO;
    for (j, a) in psi.iter().enumerate() {
        for (k, b) in psi.iter().enumerate() {
            s += a.conj() * m[(j, k)] * b;
        }
    }
    s.re
}
