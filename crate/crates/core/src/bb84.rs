//! Four-state polarization key distribution, seen predictively and retrodictively.
//!
//! Alice prepares one of `L, R, V, H` with equal probability; Bob picks the
//! circular or linear basis at random and measures. His measurement is the
//! POM `{½|s⟩⟨s|}` over all four states, so the same machinery that gives
//! Alice's predictive table gives Bob's retrodictive one.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::ConditionalTable;
use crate::hilbert::{ket_fidelity, ModeDims, Operator, DEFAULT_TOL};
use crate::parallel::{self, Strategy};
use crate::retrodict::{born_probability, preparation_pom, retro_conditional_unbiased, Pom, PreparationEnsemble};

/// Slots simulated per independently seeded stream.
pub const SHARD_SIZE: usize = 8192;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Bb84Error {
    #[error("slot count must be at least 1")]
    NoSlots,
    #[error("outcome {outcome} does not belong to the {basis} basis")]
    OutcomeNotInBasis { outcome: Polarization, basis: Basis },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    L,
    R,
    V,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Circular,
    Linear,
}

impl Polarization {
    /// Table order: `L, R, V, H`.
    pub const ALL: [Polarization; 4] = [Polarization::L, Polarization::R, Polarization::V, Polarization::H];

    /// Amplitudes in the `(V, H)` basis; `L, R = (V ± iH)/√2`.
    pub fn ket(self) -> [Complex64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Polarization::V => [Complex64::ONE, Complex64::ZERO],
            Polarization::H => [Complex64::ZERO, Complex64::ONE],
            Polarization::L => [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
            Polarization::R => [Complex64::new(s, 0.0), Complex64::new(0.0, -s)],
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Polarization::L | Polarization::R => Basis::Circular,
            Polarization::V | Polarization::H => Basis::Linear,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn projector(self) -> Operator {
        Operator::projector(&ModeDims::single(2).expect("qubit"), &self.ket()).expect("2-component ket")
    }

    /// Outcome labels as they appear in tables: `a_L`, `b_V`, ...
    pub fn event_label(self, prefix: char) -> String {
        format!("{prefix}_{self}")
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::L => "L",
            Polarization::R => "R",
            Polarization::V => "V",
            Polarization::H => "H",
        };
        f.write_str(s)
    }
}

impl Basis {
    pub fn states(self) -> [Polarization; 2] {
        match self {
            Basis::Circular => [Polarization::L, Polarization::R],
            Basis::Linear => [Polarization::V, Polarization::H],
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Circular => "circular",
            Basis::Linear => "linear",
        })
    }
}

/// Alice's four states, each with prior ¼.
pub fn ensemble() -> PreparationEnsemble {
    PreparationEnsemble::new(Polarization::ALL.iter().map(|&p| (p.event_label('a'), 0.25, p.projector())).collect())
        .expect("valid ensemble")
}

/// Bob's measurement: random basis choice folded into `{½|s⟩⟨s|}`.
pub fn measurement_pom() -> Pom {
    Pom::new(Polarization::ALL.iter().map(|&p| (p.event_label('b'), p.projector().scale_real(0.5))).collect())
        .expect("complete POM")
}

/// `P(b_j | a_i)`: rows Alice's choice, columns Bob's outcome, both in `L, R, V, H` order.
pub fn predictive_table() -> ConditionalTable {
    let ens = ensemble();
    let pom = measurement_pom();
    let rows = ens
        .events()
        .iter()
        .map(|e| pom.elements().iter().map(|el| born_probability(&e.state, &el.op).expect("valid")).collect())
        .collect();
    ConditionalTable::new(
        ens.events().iter().map(|e| e.label.clone()).collect(),
        pom.labels().map(str::to_owned).collect(),
        rows,
    )
    .expect("rows normalized")
}

/// `P(a_i | b_j)` from Bob's retrodictive states: rows Bob's outcome, columns Alice's choice.
pub fn retrodictive_table() -> ConditionalTable {
    let ens = ensemble();
    let prep = preparation_pom(&ens).expect("unbiased source");
    let pom = measurement_pom();
    let rows = pom
        .elements()
        .iter()
        .map(|el| {
            ens.events()
                .iter()
                .map(|e| retro_conditional_unbiased(&prep, &el.op, &e.label).expect("nonzero outcome"))
                .collect()
        })
        .collect();
    ConditionalTable::new(
        pom.labels().map(str::to_owned).collect(),
        ens.events().iter().map(|e| e.label.clone()).collect(),
        rows,
    )
    .expect("rows normalized")
}

/// One time slot: Alice's preparation and Bob's basis and result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub alice_choice: Polarization,
    pub bob_basis: Basis,
    pub bob_outcome: Polarization,
}

impl SlotRecord {
    pub fn new(alice_choice: Polarization, bob_basis: Basis, bob_outcome: Polarization) -> Result<Self, Bb84Error> {
        if bob_outcome.basis() != bob_basis {
            return Err(Bb84Error::OutcomeNotInBasis { outcome: bob_outcome, basis: bob_basis });
        }
        Ok(Self { alice_choice, bob_basis, bob_outcome })
    }

    pub fn same_basis(&self) -> bool {
        self.alice_choice.basis() == self.bob_basis
    }
}

/// Flags a slot whose predictive and retrodictive states are orthogonal.
pub fn eavesdrop_flag(slot: &SlotRecord) -> bool {
    eavesdrop_flag_with_tol(slot, DEFAULT_TOL)
}

pub fn eavesdrop_flag_with_tol(slot: &SlotRecord, tol: f64) -> bool {
    ket_fidelity(&slot.alice_choice.ket(), &slot.bob_outcome.ket()) < tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attack {
    #[default]
    None,
    /// Eve measures in a random basis and resends her result.
    InterceptResend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotSummary {
    pub slots: usize,
    /// `counts[alice][bob_outcome]`, `L, R, V, H` order.
    pub counts: [[u64; 4]; 4],
    pub flagged: u64,
    pub same_basis: u64,
    pub same_basis_errors: u64,
}

impl SlotSummary {
    fn empty() -> Self {
        Self { slots: 0, counts: [[0; 4]; 4], flagged: 0, same_basis: 0, same_basis_errors: 0 }
    }

    fn record(&mut self, slot: &SlotRecord) {
        self.slots += 1;
        self.counts[slot.alice_choice.index()][slot.bob_outcome.index()] += 1;
        if eavesdrop_flag(slot) {
            self.flagged += 1;
        }
        if slot.same_basis() {
            self.same_basis += 1;
            if slot.bob_outcome != slot.alice_choice {
                self.same_basis_errors += 1;
            }
        }
    }

    fn merge(&mut self, other: &SlotSummary) {
        self.slots += other.slots;
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
        self.flagged += other.flagged;
        self.same_basis += other.same_basis;
        self.same_basis_errors += other.same_basis_errors;
    }

    /// Empirical `P(b_j | a_i)`; rows with no slots are all zero.
    pub fn empirical_predictive(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (row, counts) in out.iter_mut().zip(&self.counts) {
            let total: u64 = counts.iter().sum();
            if total > 0 {
                for (o, &c) in row.iter_mut().zip(counts) {
                    *o = c as f64 / total as f64;
                }
            }
        }
        out
    }

    /// Fraction of same-basis slots where Bob disagrees with Alice.
    pub fn same_basis_error_rate(&self) -> f64 {
        if self.same_basis == 0 {
            0.0
        } else {
            self.same_basis_errors as f64 / self.same_basis as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub records: Vec<SlotRecord>,
    pub summary: SlotSummary,
}

fn measure<R: Rng>(rng: &mut R, state: Polarization, basis: Basis) -> Polarization {
    let [first, second] = basis.states();
    let p_first = ket_fidelity(&first.ket(), &state.ket());
    if rng.random::<f64>() < p_first {
        first
    } else {
        second
    }
}

fn random_basis<R: Rng>(rng: &mut R) -> Basis {
    if rng.random::<bool>() {
        Basis::Linear
    } else {
        Basis::Circular
    }
}

fn simulate_shard(seed: u64, shard: usize, len: usize, attack: Attack) -> Vec<SlotRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    (0..len)
        .map(|_| {
            let alice = Polarization::ALL[rng.random_range(0..4)];
            let in_flight = match attack {
                Attack::None => alice,
                Attack::InterceptResend => {
                    let eve_basis = random_basis(&mut rng);
                    measure(&mut rng, alice, eve_basis)
                }
            };
            let bob_basis = random_basis(&mut rng);
            let bob_outcome = measure(&mut rng, in_flight, bob_basis);
            SlotRecord { alice_choice: alice, bob_basis, bob_outcome }
        })
        .collect()
}

/// Monte-Carlo slots using the default execution strategy.
pub fn simulate_slots(count: usize, seed: u64, attack: Attack) -> Result<Simulation, Bb84Error> {
    simulate_slots_with(Strategy::default(), count, seed, attack)
}

/// Monte-Carlo slots. Slots are split into shards of [`SHARD_SIZE`], each
/// drawing from its own ChaCha stream of `seed`, so the output does not
/// depend on the strategy or thread count.
pub fn simulate_slots_with(
    strategy: Strategy,
    count: usize,
    seed: u64,
    attack: Attack,
) -> Result<Simulation, Bb84Error> {
    if count == 0 {
        return Err(Bb84Error::NoSlots);
    }
    let shards = count.div_ceil(SHARD_SIZE);
    let parts = parallel::map_range(strategy, shards, |s| {
        let len = SHARD_SIZE.min(count - s * SHARD_SIZE);
        let records = simulate_shard(seed, s, len, attack);
        let mut summary = SlotSummary::empty();
        records.iter().for_each(|r| summary.record(r));
        (records, summary)
    });
    let mut records = Vec::with_capacity(count);
    let mut summary = SlotSummary::empty();
    for (r, s) in parts {
        records.extend(r);
        summary.merge(&s);
    }
    Ok(Simulation { records, summary })
}
