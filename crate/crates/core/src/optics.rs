//! Two-mode optics on a truncated Fock space.
//!
//! Mode `b` carries the unknown input, mode `c` the known reference field.
//! Both are truncated at the same maximum photon number `N`, and two-mode
//! operators use dims `[N+1, N+1]` with `b` as the slower index.
//!
//! The beam splitter `U = exp[iθ(b†c + c†b)]` conserves total photon number,
//! so it is built block by block. Blocks with total `≤ N` are exactly the
//! untruncated ones; higher blocks are clipped but still unitary. Anything
//! whose answer lives in the `≤ N` sector (projection synthesis, scissors) is
//! therefore exact, while the inefficient-detector element loses a geometric
//! tail, reported by [`detector_tail_bound`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{normalize, HilbertError, ModeDims, Operator, DEFAULT_TOL};
use crate::parallel::{self, Strategy};
use crate::retrodict::{retro_state, RetrodictError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("photon-number cutoff must be at least 1")]
    InvalidCutoff,
    #[error("beam-splitter angle must be finite, got {0}")]
    InvalidTheta(f64),
    #[error("efficiency {0} outside the allowed range")]
    EfficiencyOutOfRange(f64),
    #[error("reference state has squared norm {0}, not 1")]
    ReferenceNotNormalized(f64),
    #[error("reference state has {len} amplitudes but the mode holds only {dim} levels")]
    ReferenceTooLong { len: usize, dim: usize },
    #[error("photon count {count} exceeds cutoff {cutoff}")]
    CountExceedsCutoff { count: usize, cutoff: usize },
    #[error("{0} is not a unit-trace positive state")]
    NotDensity(&'static str),
    #[error("{0} is not positive semidefinite")]
    NotPositive(&'static str),
    #[error("outcome has zero probability (weight {0:e})")]
    ZeroProbabilityOutcome(f64),
}

impl From<RetrodictError> for OpticsError {
    fn from(e: RetrodictError) -> Self {
        match e {
            RetrodictError::Hilbert(h) => OpticsError::Hilbert(h),
            RetrodictError::ZeroProbabilityOutcome(w) => OpticsError::ZeroProbabilityOutcome(w),
            other => unreachable!("retro_state only fails on zero trace: {other}"),
        }
    }
}

/// Single-mode Fock space holding `0..=cutoff` photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Result<Self, OpticsError> {
        if cutoff < 1 {
            return Err(OpticsError::InvalidCutoff);
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn mode_dims(&self) -> ModeDims {
        ModeDims::single(self.dim()).expect("dim >= 2")
    }

    pub fn two_mode_dims(&self) -> ModeDims {
        ModeDims::new(vec![self.dim(), self.dim()]).expect("dim >= 2")
    }

    /// Flat index of `|nb⟩_b |nc⟩_c`.
    pub fn index(&self, nb: usize, nc: usize) -> usize {
        nb * self.dim() + nc
    }

    /// Fock basis ket `|k⟩`.
    pub fn ket(&self, k: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; self.dim()];
        v[k] = Complex64::ONE;
        v
    }

    pub fn check_count(&self, count: usize) -> Result<(), OpticsError> {
        if count > self.cutoff {
            return Err(OpticsError::CountExceedsCutoff { count, cutoff: self.cutoff });
        }
        Ok(())
    }
}

/// Lossless beam splitter with coupling angle `θ`; transmittance `cos²θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    theta: f64,
}

impl BeamSplitter {
    pub fn new(theta: f64) -> Result<Self, OpticsError> {
        if !theta.is_finite() {
            return Err(OpticsError::InvalidTheta(theta));
        }
        Ok(Self { theta })
    }

    /// Splitter whose transmittance into mode `b` is `eta`.
    pub fn from_efficiency(eta: f64) -> Result<Self, OpticsError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(OpticsError::EfficiencyOutOfRange(eta));
        }
        Ok(Self { theta: eta.sqrt().acos() })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn efficiency(&self) -> f64 {
        self.theta.cos().powi(2)
    }
}

/// Pure reference state `Σ c_k |k⟩` for the input mode `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    amps: Vec<Complex64>,
}

impl ReferenceState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self, OpticsError> {
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if amps.is_empty() || !norm.is_finite() || (norm - 1.0).abs() > DEFAULT_TOL {
            return Err(OpticsError::ReferenceNotNormalized(norm));
        }
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitudes zero-padded to the mode dimension.
    pub fn padded(&self, space: &FockSpace) -> Result<Vec<Complex64>, OpticsError> {
        let dim = space.dim();
        if self.amps.len() > dim {
            if self.amps[dim..].iter().any(|z| z.norm() > 0.0) {
                return Err(OpticsError::ReferenceTooLong { len: self.amps.len(), dim });
            }
            return Ok(self.amps[..dim].to_vec());
        }
        let mut v = self.amps.clone();
        v.resize(dim, Complex64::ZERO);
        Ok(v)
    }

    fn amp(&self, k: usize) -> Complex64 {
        self.amps.get(k).copied().unwrap_or(Complex64::ZERO)
    }
}

/// Truncated annihilation operator: `⟨k−1|b|k⟩ = √k`.
pub fn annihilation(space: &FockSpace) -> Operator {
    let d = space.dim();
    let mat = DMatrix::from_fn(
        d,
        d,
        |i, j| if j == i + 1 { Complex64::new((j as f64).sqrt(), 0.0) } else { Complex64::ZERO },
    );
    Operator::from_matrix(space.mode_dims(), mat).expect("finite entries")
}

pub fn creation(space: &FockSpace) -> Operator {
    annihilation(space).adjoint()
}

/// Photon-number operator `b†b`.
pub fn number(space: &FockSpace) -> Operator {
    let diag: Vec<f64> = (0..space.dim()).map(|k| k as f64).collect();
    Operator::real_diagonal(&diag).expect("finite entries")
}

/// One fixed-total-photon-number block of the beam-splitter unitary.
#[derive(Debug, Clone)]
struct PhotonBlock {
    /// Smallest `n_b` in the block; local index `r` is `n_b = nb_min + r`.
    nb_min: usize,
    u: DMatrix<Complex64>,
}

/// Beam-splitter unitary held as its photon-number blocks.
#[derive(Debug, Clone)]
pub struct BeamSplitterUnitary {
    space: FockSpace,
    splitter: BeamSplitter,
    blocks: Vec<PhotonBlock>,
}

impl BeamSplitterUnitary {
    pub fn new(bs: &BeamSplitter, space: &FockSpace) -> Result<Self, OpticsError> {
        let n = space.cutoff();
        let mut blocks = Vec::with_capacity(2 * n + 1);
        for total in 0..=2 * n {
            let nb_min = total.saturating_sub(n);
            let nb_max = total.min(n);
            let size = nb_max - nb_min + 1;
            // i θ (b†c + c†b): ⟨nb+1, nc−1| b†c |nb, nc⟩ = √((nb+1) nc)
            let mut generator = DMatrix::<Complex64>::zeros(size, size);
            for r in 0..size - 1 {
                let nb = nb_min + r;
                let nc = total - nb;
                let amp = ((nb + 1) as f64 * nc as f64).sqrt() * bs.theta();
                generator[(r + 1, r)] = Complex64::new(0.0, amp);
                generator[(r, r + 1)] = Complex64::new(0.0, amp);
            }
            let u = Operator::from_matrix(ModeDims::single(size)?, generator)?.matrix_exp()?.into_matrix();
            blocks.push(PhotonBlock { nb_min, u });
        }
        Ok(Self { space: *space, splitter: *bs, blocks })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn splitter(&self) -> &BeamSplitter {
        &self.splitter
    }

    /// The block acting on states with `total` photons, basis ordered by increasing `n_b`.
    pub fn block(&self, total: usize) -> Option<&DMatrix<Complex64>> {
        self.blocks.get(total).map(|b| &b.u)
    }

    fn apply_impl(&self, psi: &[Complex64], adjoint: bool) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; psi.len()];
        for (total, block) in self.blocks.iter().enumerate() {
            let size = block.u.nrows();
            let idx = |r: usize| self.space.index(block.nb_min + r, total - block.nb_min - r);
            for r in 0..size {
                let mut acc = Complex64::ZERO;
                for s in 0..size {
                    let coeff = if adjoint { block.u[(s, r)].conj() } else { block.u[(r, s)] };
                    acc += coeff * psi[idx(s)];
                }
                out[idx(r)] = acc;
            }
        }
        out
    }

    /// `U |ψ⟩` for a two-mode state vector.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        self.apply_impl(psi, false)
    }

    /// `U† |ψ⟩` for a two-mode state vector.
    pub fn apply_adjoint(&self, psi: &[Complex64]) -> Vec<Complex64> {
        self.apply_impl(psi, true)
    }

    /// Dense two-mode matrix on dims `[N+1, N+1]`.
    pub fn to_operator(&self) -> Operator {
        let dims = self.space.two_mode_dims();
        let total_dim = dims.total();
        let mut mat = DMatrix::<Complex64>::zeros(total_dim, total_dim);
        for (total, block) in self.blocks.iter().enumerate() {
            let size = block.u.nrows();
            for r in 0..size {
                for s in 0..size {
                    let row = self.space.index(block.nb_min + r, total - block.nb_min - r);
                    let col = self.space.index(block.nb_min + s, total - block.nb_min - s);
                    mat[(row, col)] = block.u[(r, s)];
                }
            }
        }
        Operator::from_matrix(dims, mat).expect("finite entries")
    }

    /// Measurement element on mode `b`: `Tr_c(ρ_c U† (π_b ⊗ π_c) U)`.
    pub fn compose_pom(
        &self,
        rho_c: &Operator,
        pi_b: &Operator,
        pi_c: &Operator,
        strategy: Strategy,
    ) -> Result<Operator, OpticsError> {
        let mode = self.space.mode_dims();
        for op in [rho_c, pi_b, pi_c] {
            if op.dims() != &mode {
                return Err(HilbertError::DimensionMismatch {
                    left: mode.dims().to_vec(),
                    right: op.dims().dims().to_vec(),
                }
                .into());
            }
        }
        let tr = rho_c.trace();
        if !rho_c.is_psd(DEFAULT_TOL) || (tr.re - 1.0).abs() > DEFAULT_TOL || tr.im.abs() > DEFAULT_TOL {
            return Err(OpticsError::NotDensity("reference state"));
        }
        if !pi_b.is_psd(DEFAULT_TOL) {
            return Err(OpticsError::NotPositive("mode-b detector element"));
        }
        if !pi_c.is_psd(DEFAULT_TOL) {
            return Err(OpticsError::NotPositive("mode-c detector element"));
        }

        let d = self.space.dim();
        // ρ_c = Σ_r p_r |φ_r⟩⟨φ_r|, so the element is Σ_r p_r V_r† (π_b ⊗ π_c) V_r
        // with V_r |l⟩ = U |l⟩_b |φ_r⟩_c.
        let herm = (rho_c.matrix() + rho_c.matrix().adjoint()).map(|z| z * 0.5);
        let eig = herm.symmetric_eigen();
        let pi_c_t = pi_c.matrix().transpose();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for (r, &weight) in eig.eigenvalues.iter().enumerate() {
            if weight <= f64::EPSILON {
                continue;
            }
            let phi = eig.eigenvectors.column(r);
            let evolved: Vec<Vec<Complex64>> = parallel::map_range(strategy, d, |l| {
                let mut psi = vec![Complex64::ZERO; d * d];
                for c in 0..d {
                    psi[self.space.index(l, c)] = phi[c];
                }
                self.apply(&psi)
            });
            // (π_b ⊗ π_c) acting on a row-major reshaped state X is π_b X π_cᵀ.
            let weighted: Vec<Vec<Complex64>> = parallel::map(strategy, &evolved, |v| {
                let x = DMatrix::from_fn(d, d, |b, c| v[self.space.index(b, c)]);
                let y = pi_b.matrix() * x * &pi_c_t;
                (0..d * d).map(|i| y[(i / d, i % d)]).collect()
            });
            for k in 0..d {
                for l in 0..d {
                    let amp: Complex64 = evolved[k].iter().zip(&weighted[l]).map(|(a, b)| a.conj() * b).sum();
                    out[(k, l)] += amp * weight;
                }
            }
        }
        Ok(Operator::from_matrix(mode, out)?)
    }
}

/// Dense beam-splitter unitary `exp[iθ(b†c + c†b)]` on dims `[N+1, N+1]`.
pub fn beam_splitter_unitary(bs: &BeamSplitter, space: &FockSpace) -> Result<Operator, OpticsError> {
    Ok(BeamSplitterUnitary::new(bs, space)?.to_operator())
}

/// Measurement element for mode `b` of the device: reference `ρ_c` in mode `c`,
/// beam splitter, then detectors `π_b` and `π_c` on the outputs.
pub fn compose_measurement_pom(
    rho_c: &Operator,
    pi_b: &Operator,
    pi_c: &Operator,
    bs: &BeamSplitter,
    space: &FockSpace,
) -> Result<Operator, OpticsError> {
    BeamSplitterUnitary::new(bs, space)?.compose_pom(rho_c, pi_b, pi_c, Strategy::default())
}

/// Normal-ordered `:exp(−η b†b):`, diagonal with entries `(1−η)^k`.
pub fn normal_ordered_damping(eta: f64, space: &FockSpace) -> Result<Operator, OpticsError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(OpticsError::EfficiencyOutOfRange(eta));
    }
    let diag: Vec<f64> = (0..space.dim()).map(|k| (1.0 - eta).powi(k as i32)).collect();
    Ok(Operator::real_diagonal(&diag)?)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Retrodictive state for `n` counts on a detector of efficiency `eta`:
/// `η^(n+1)/n! · (b†)^n :exp(−η b†b): b^n`, truncated at the cutoff.
///
/// Not renormalized; its trace falls short of 1 by the tail beyond the
/// cutoff (see [`detector_tail_bound`]).
pub fn inefficient_detector_retro(n: usize, eta: f64, space: &FockSpace) -> Result<Operator, OpticsError> {
    space.check_count(n)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(OpticsError::EfficiencyOutOfRange(eta));
    }
    let lower = annihilation(space);
    let raise = creation(space);
    let mut op = normal_ordered_damping(eta, space)?;
    for _ in 0..n {
        op = raise.matmul(&op)?.matmul(&lower)?;
    }
    Ok(op.scale_real(eta.powi(n as i32 + 1) / factorial(n)))
}

/// Upper bound on `1 − Tr` of [`inefficient_detector_retro`] due to truncation.
///
/// The missing weight is `Σ_{k>N} η^(n+1) C(k,n) (1−η)^(k−n)`. Successive
/// terms shrink by `(k+1)/(k+1−n) · (1−η)`, which decreases in `k`, so once
/// that ratio drops below 1 the tail is bounded by a geometric series.
pub fn detector_tail_bound(n: usize, eta: f64, space: &FockSpace) -> f64 {
    if eta >= 1.0 {
        return 0.0;
    }
    if eta <= 0.0 {
        return f64::INFINITY;
    }
    let big_n = space.cutoff();
    let term = |k: usize| -> f64 {
        let binom: f64 = (0..n).map(|i| (k - i) as f64 / (n - i) as f64).product();
        eta.powi(n as i32 + 1) * binom * (1.0 - eta).powi((k - n) as i32)
    };
    let ratio = |k: usize| (k + 1) as f64 / (k + 1 - n) as f64 * (1.0 - eta);
    // walk forward until the term ratio is safely below one; it tends to 1−η
    let threshold = 1.0 - 0.5 * eta;
    let mut k = big_n + 1;
    let mut partial = 0.0;
    while ratio(k) >= threshold {
        partial += term(k);
        k += 1;
    }
    partial + term(k) / (1.0 - ratio(k))
}

/// Binomial photocount probability for `k` input photons: `C(k,n) ηⁿ (1−η)^(k−n)`.
pub fn count_probability(k: usize, n: usize, eta: f64) -> f64 {
    if k < n {
        return 0.0;
    }
    let binom: f64 = (0..n).map(|i| (k - i) as f64 / (n - i) as f64).product();
    binom * eta.powi(n as i32) * (1.0 - eta).powi((k - n) as i32)
}

/// Closed-form retrodictive photon-number distribution against the device
/// pipeline, for one `(n, η)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorCheck {
    pub n: usize,
    pub eta: f64,
    pub closed_form: Vec<f64>,
    pub pipeline: Vec<f64>,
    pub max_deviation: f64,
    pub closed_form_trace: f64,
    pub tail_bound: f64,
}

/// Evaluates the detector retrodictive state both in closed form and through
/// vacuum reference + beam splitter + (`|n⟩⟨n|`, `1_c`) detectors.
pub fn check_detector(n: usize, eta: f64, space: &FockSpace, strategy: Strategy) -> Result<DetectorCheck, OpticsError> {
    let closed = inefficient_detector_retro(n, eta, space)?;
    let bs = BeamSplitter::from_efficiency(eta)?;
    let unitary = BeamSplitterUnitary::new(&bs, space)?;
    let vacuum = Operator::basis_projector(space.dim(), 0)?;
    let pi_b = Operator::basis_projector(space.dim(), n)?;
    let pi_c = Operator::identity(&space.mode_dims());
    let element = unitary.compose_pom(&vacuum, &pi_b, &pi_c, strategy)?;
    let pipeline = retro_state(&element)?;
    Ok(DetectorCheck {
        n,
        eta,
        closed_form: closed.real_diagonal_entries(),
        pipeline: pipeline.real_diagonal_entries(),
        max_deviation: closed.max_abs_diff(&pipeline)?,
        closed_form_trace: closed.trace().re,
        tail_bound: detector_tail_bound(n, eta, space),
    })
}

/// [`check_detector`] over a grid of `(n, η)` points.
pub fn sweep_detector(
    points: &[(usize, f64)],
    space: &FockSpace,
    strategy: Strategy,
) -> Vec<Result<DetectorCheck, OpticsError>> {
    // points run in parallel; each point's pipeline stays sequential
    parallel::map(strategy, points, |&(n, eta)| check_detector(n, eta, space, Strategy::Sequential))
}

/// Retrodictive state for `n` counts in `D_b` and `m` in `D_c` with a pure
/// reference state in mode `c` and perfect detectors.
pub fn projection_synthesis_retro(
    reference: &ReferenceState,
    n: usize,
    m: usize,
    bs: &BeamSplitter,
    space: &FockSpace,
) -> Result<Operator, OpticsError> {
    space.check_count(n + m)?;
    let amps = reference.padded(space)?;
    let rho_c = Operator::projector(&space.mode_dims(), &amps)?;
    let pi_b = Operator::basis_projector(space.dim(), n)?;
    let pi_c = Operator::basis_projector(space.dim(), m)?;
    let element = compose_measurement_pom(&rho_c, &pi_b, &pi_c, bs, space)?;
    Ok(retro_state(&element)?)
}

/// Closed-form ket retrodicted from one count in `D_b` and none in `D_c`:
/// `∝ c₀* cosθ |1⟩ − i c₁* sinθ |0⟩`, normalized, on `dim` levels.
pub fn single_count_retro_ket(
    reference: &ReferenceState,
    theta: f64,
    dim: usize,
) -> Result<Vec<Complex64>, OpticsError> {
    let (c0, c1) = (reference.amp(0), reference.amp(1));
    let mut ket = vec![Complex64::ZERO; dim.max(2)];
    ket[1] = c0.conj() * theta.cos();
    ket[0] = Complex64::new(0.0, -1.0) * c1.conj() * theta.sin();
    let norm = normalize(&mut ket);
    if norm * norm <= DEFAULT_TOL {
        return Err(OpticsError::ZeroProbabilityOutcome(norm * norm));
    }
    Ok(ket)
}

/// Entangled resource `(|1⟩_d|0⟩_b + i|0⟩_d|1⟩_b)/√2` as a `2 × (N+1)`
/// amplitude matrix, rows indexed by mode `d`, columns by mode `b`.
pub fn scissors_resource(space: &FockSpace) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = DMatrix::<Complex64>::zeros(2, space.dim());
    psi[(1, 0)] = Complex64::new(s, 0.0);
    psi[(0, 1)] = Complex64::new(0.0, s);
    psi
}

/// Conditional state of mode `d` after projecting a joint pure state of
/// `(d, b)` (amplitude matrix `psi`) onto the retrodictive state of `b`.
pub fn project_onto_retro(retro_b: &Operator, psi: &DMatrix<Complex64>) -> Result<Operator, OpticsError> {
    if psi.ncols() != retro_b.side() {
        return Err(HilbertError::DimensionMismatch { left: vec![psi.ncols()], right: vec![retro_b.side()] }.into());
    }
    // Tr_b[(1_d ⊗ ρ_b)|Ψ⟩⟨Ψ|] = Ψ ρ_bᵀ Ψ†
    let rho_d = psi * retro_b.matrix().transpose() * psi.adjoint();
    let tr = rho_d.trace().re;
    if tr <= DEFAULT_TOL {
        return Err(OpticsError::ZeroProbabilityOutcome(tr));
    }
    Ok(Operator::from_matrix(ModeDims::single(psi.nrows())?, rho_d.map(|z| z / tr))?)
}

/// Quantum-scissors output state of mode `d` (two levels), obtained by
/// projecting the one-count retrodictive state of `b` onto the entangled resource.
pub fn scissors_output(
    reference: &ReferenceState,
    bs: &BeamSplitter,
    space: &FockSpace,
) -> Result<Operator, OpticsError> {
    let retro = projection_synthesis_retro(reference, 1, 0, bs, space)?;
    project_onto_retro(&retro, &scissors_resource(space))
}

/// Closed-form scissors output `∝ c₀ cosθ |0⟩ + c₁ sinθ |1⟩`.
pub fn scissors_closed_form(reference: &ReferenceState, theta: f64) -> Result<[Complex64; 2], OpticsError> {
    let mut ket = [reference.amp(0) * theta.cos(), reference.amp(1) * theta.sin()];
    let norm = normalize(&mut ket);
    if norm * norm <= DEFAULT_TOL {
        return Err(OpticsError::ZeroProbabilityOutcome(norm * norm));
    }
    Ok(ket)
}
