//! Finite-round LOCC protocols and their compilation into classical-mediator
//! protocols.
//!
//! A protocol is a list of rounds; in each round one party applies an
//! instrument chosen by the transcript of all earlier outcomes. The compiled
//! protocol keeps the whole transcript in one classical register `G` of
//! dimension `n^m` (alphabet `n`, `m` rounds). A length-`k` transcript
//! `(t1, ..., tk)` is stored as the base-`n` number `t1 t2 ... tk`; at each
//! step the acting party reads the register, applies the arm selected by the
//! transcript, and writes the extended transcript back.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::channel::{choi_from_action, Channel, Side, StepChannel};
use crate::error::{Error, Result};
use crate::layout::{Subsystem, SystemLayout, LABEL_A, LABEL_B};
use crate::linalg::{self, CMatrix};
use crate::protocol::{MediatorMode, Protocol};
use crate::random;
use crate::state::DensityState;
use crate::tol;

/// Default cap on the transcript register dimension.
pub const DEFAULT_MEDIATOR_CAP: usize = 729;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
}

/// Outcome-indexed CP maps on one party, summing to a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    dim: usize,
    arms: Vec<Vec<CMatrix>>,
}

impl Instrument {
    pub fn new(arms: Vec<Vec<CMatrix>>) -> Result<Self> {
        let dim = arms
            .iter()
            .flatten()
            .next()
            .map(|k| k.ncols())
            .ok_or_else(|| Error::ShapeMismatch("instrument has no Kraus operators".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, arm) in arms.iter().enumerate() {
            if arm.is_empty() {
                return Err(Error::ShapeMismatch(format!("arm {i} is empty")));
            }
            for k in arm {
                if k.nrows() != dim || k.ncols() != dim {
                    return Err(Error::ShapeMismatch(format!(
                        "arm {i} has a {}x{} operator, expected {dim}x{dim}",
                        k.nrows(),
                        k.ncols()
                    )));
                }
                sum += k.adjoint() * k;
            }
        }
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if dev > tol::TRACE {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Instrument { dim, arms })
    }

    /// A single-arm instrument applying `u`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        Instrument::new(vec![vec![u]])
    }

    /// Projective measurement in the canonical basis.
    pub fn basis_measurement(dim: usize) -> Self {
        Instrument::new((0..dim).map(|k| vec![linalg::basis_projector(dim, k)]).collect())
            .expect("projectors resolve the identity")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arms(&self) -> &[Vec<CMatrix>] {
        &self.arms
    }

    pub fn outcomes(&self) -> usize {
        self.arms.len()
    }

    /// All arms merged into one: the underlying channel.
    pub fn coarse_grained(&self) -> Instrument {
        Instrument {
            dim: self.dim,
            arms: vec![self.arms.iter().flatten().cloned().collect()],
        }
    }
}

/// One round: the acting party and its instrument for each transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub party: Party,
    pub instruments: BTreeMap<Vec<usize>, Instrument>,
}

impl Round {
    /// The same instrument regardless of the transcript.
    pub fn unconditional(party: Party, instrument: Instrument, transcripts: &[Vec<usize>]) -> Self {
        Round {
            party,
            instruments: transcripts.iter().map(|t| (t.clone(), instrument.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoccProtocol {
    dim_a: usize,
    dim_b: usize,
    alphabet: usize,
    rounds: Vec<Round>,
}

impl LoccProtocol {
    /// Checks that every reachable transcript has an instrument of the right
    /// dimension with at most `alphabet` outcomes.
    pub fn new(dim_a: usize, dim_b: usize, alphabet: usize, rounds: Vec<Round>) -> Result<Self> {
        if rounds.is_empty() {
            return Err(Error::InvalidProtocol("an LOCC protocol needs at least one round".into()));
        }
        if alphabet == 0 || dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidProtocol("dimensions and alphabet must be positive".into()));
        }
        let protocol = LoccProtocol {
            dim_a,
            dim_b,
            alphabet,
            rounds,
        };
        let mut frontier = vec![Vec::new()];
        for round in &protocol.rounds {
            let want = protocol.party_dim(round.party);
            let mut next = Vec::new();
            for t in frontier {
                let inst = round
                    .instruments
                    .get(&t)
                    .ok_or_else(|| Error::MissingTranscriptInstrument(t.clone()))?;
                if inst.dim != want {
                    return Err(Error::DimensionMismatch {
                        expected: want,
                        found: inst.dim,
                    });
                }
                if inst.outcomes() > alphabet {
                    return Err(Error::InvalidProtocol(format!(
                        "instrument for transcript {t:?} has {} outcomes, alphabet is {alphabet}",
                        inst.outcomes()
                    )));
                }
                for i in 0..inst.outcomes() {
                    let mut ext = t.clone();
                    ext.push(i);
                    next.push(ext);
                }
            }
            frontier = next;
        }
        Ok(protocol)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn party_dim(&self, party: Party) -> usize {
        match party {
            Party::A => self.dim_a,
            Party::B => self.dim_b,
        }
    }

    /// `[A, B]` layout the protocol acts on.
    pub fn layout(&self) -> SystemLayout {
        SystemLayout::new(vec![
            Subsystem::quantum(LABEL_A, self.dim_a),
            Subsystem::quantum(LABEL_B, self.dim_b),
        ])
        .expect("positive dimensions, distinct labels")
    }

    /// Transcripts of length `round` reachable with non-zero outcome count.
    pub fn reachable_transcripts(&self, round: usize) -> Vec<Vec<usize>> {
        let mut frontier = vec![Vec::new()];
        for r in &self.rounds[..round] {
            frontier = frontier
                .into_iter()
                .flat_map(|t| {
                    let n = r.instruments.get(&t).map_or(0, Instrument::outcomes);
                    (0..n).map(move |i| {
                        let mut ext = t.clone();
                        ext.push(i);
                        ext
                    })
                })
                .collect();
        }
        frontier
    }

    fn lift(&self, party: Party, k: &CMatrix) -> CMatrix {
        match party {
            Party::A => linalg::kron(k, &linalg::identity(self.dim_b)),
            Party::B => linalg::kron(&linalg::identity(self.dim_a), k),
        }
    }

    fn branch(&self, x: &CMatrix, round: usize, transcript: &mut Vec<usize>) -> Result<CMatrix> {
        let Some(r) = self.rounds.get(round) else {
            return Ok(x.clone());
        };
        let inst = r
            .instruments
            .get(transcript.as_slice())
            .ok_or_else(|| Error::MissingTranscriptInstrument(transcript.clone()))?;
        let d = x.nrows();
        let mut total = CMatrix::zeros(d, d);
        for (i, arm) in inst.arms.iter().enumerate() {
            let mut y = CMatrix::zeros(d, d);
            for k in arm {
                let lk = self.lift(r.party, k);
                y += &lk * x * lk.adjoint();
            }
            transcript.push(i);
            total += self.branch(&y, round + 1, transcript)?;
            transcript.pop();
        }
        Ok(total)
    }

    /// The coarse-grained LOCC channel on an arbitrary `[A, B]` matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        self.branch(x, 0, &mut Vec::new())
    }

    /// Merges every final-round instrument into a single arm.
    pub fn coarse_grain_final_round(&self) -> LoccProtocol {
        let mut out = self.clone();
        if let Some(last) = out.rounds.last_mut() {
            for inst in last.instruments.values_mut() {
                *inst = inst.coarse_grained();
            }
        }
        out
    }
}

/// Applies the coarse-grained LOCC channel to a state on `[A, B]`.
pub fn simulate_locc(protocol: &LoccProtocol, input: &DensityState) -> Result<DensityState> {
    let layout = protocol.layout();
    if input.layout().dims() != layout.dims() || input.layout().labels() != layout.labels() {
        return Err(Error::LayoutMismatch(format!(
            "LOCC protocol acts on {layout}, input is on {}",
            input.layout()
        )));
    }
    let out = protocol.apply_matrix(input.matrix())?;
    Ok(DensityState::new_unchecked(input.layout().clone(), out))
}

/// Choi matrix of the coarse-grained LOCC channel.
pub fn locc_choi(protocol: &LoccProtocol) -> Result<CMatrix> {
    let d = protocol.dim_a * protocol.dim_b;
    let mut err = None;
    let choi = choi_from_action(d, d, |unit| match protocol.apply_matrix(unit) {
        Ok(m) => m,
        Err(e) => {
            err.get_or_insert(e);
            CMatrix::zeros(d, d)
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(choi),
    }
}

fn encode(transcript: &[usize], alphabet: usize) -> usize {
    transcript.iter().fold(0, |acc, &t| acc * alphabet + t)
}

/// Compiles the protocol into a classical-mediator protocol on `[A, G, B]`,
/// one step per round, with `dim(G) = n^m`.
///
/// The compiled protocol starts from `I/dA ⊗ |0⟩⟨0| ⊗ I/dB`; use
/// [`Protocol::with_initial`] for other inputs.
pub fn compile_to_mediator(protocol: &LoccProtocol, cap: usize) -> Result<Protocol> {
    let n = protocol.alphabet;
    let m = protocol.rounds.len();
    let dg = u32::try_from(m)
        .ok()
        .and_then(|m| n.checked_pow(m))
        .filter(|&d| d <= cap)
        .ok_or(Error::MediatorOverflow {
            required: n.saturating_pow(m.try_into().unwrap_or(u32::MAX)),
            cap,
        })?;
    let layout = SystemLayout::tripartite(protocol.dim_a, dg, protocol.dim_b, true)?;
    let mut steps = Vec::with_capacity(m);
    for (k, round) in protocol.rounds.iter().enumerate() {
        let d = protocol.party_dim(round.party);
        let reachable = protocol.reachable_transcripts(k);
        let read: BTreeSet<usize> = reachable.iter().map(|t| encode(t, n)).collect();
        let mut kraus = Vec::new();
        for t in &reachable {
            let from = encode(t, n);
            let inst = &round.instruments[t];
            for (i, arm) in inst.arms.iter().enumerate() {
                let to = from * n + i;
                let mut write = CMatrix::zeros(dg, dg);
                write[(to, from)] = linalg::ONE;
                for op in arm {
                    kraus.push(match round.party {
                        Party::A => linalg::kron(op, &write),
                        Party::B => linalg::kron(&write, op),
                    });
                }
            }
        }
        for g in (0..dg).filter(|g| !read.contains(g)) {
            let idle = linalg::basis_projector(dg, g);
            kraus.push(match round.party {
                Party::A => linalg::kron(&linalg::identity(d), &idle),
                Party::B => linalg::kron(&idle, &linalg::identity(d)),
            });
        }
        let (side, int_legs, by_leg): (Side, &[usize], &[usize]) = match round.party {
            Party::A => (Side::Left, &[0, 1], &[2]),
            Party::B => (Side::Right, &[1, 2], &[0]),
        };
        let int_layout = layout.restrict(int_legs);
        let interaction = Channel::from_kraus(kraus, int_layout.clone(), int_layout)?;
        steps.push(StepChannel::new(
            side,
            interaction,
            Channel::identity(layout.restrict(by_leg)),
        )?);
    }
    Protocol::new(
        layout.clone(),
        DensityState::maximally_mixed(layout.restrict(&[0])),
        DensityState::basis(layout.subsystems()[1].clone(), 0)?,
        DensityState::maximally_mixed(layout.restrict(&[2])),
        steps,
        MediatorMode::Classical,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub max_choi_deviation: f64,
    pub pass: bool,
}

/// Compares the direct LOCC Choi matrix with that of the compiled protocol's
/// `A–B` marginal channel.
pub fn verify_equivalence(protocol: &LoccProtocol) -> Result<Equivalence> {
    let direct = locc_choi(protocol)?;
    let compiled = compile_to_mediator(protocol, DEFAULT_MEDIATOR_CAP)?.marginal_channel_choi()?;
    let max_choi_deviation = linalg::max_abs_diff(&direct, &compiled);
    Ok(Equivalence {
        max_choi_deviation,
        pass: max_choi_deviation <= tol::ACCUMULATED,
    })
}

/// Alternating `A, B, A, ...` rounds with a random `alphabet`-outcome
/// instrument (each arm of Kraus rank 1 or 2) for every reachable transcript.
pub fn random_locc(
    seed: u64,
    rounds: usize,
    alphabet: usize,
    dim_a: usize,
    dim_b: usize,
) -> Result<LoccProtocol> {
    if rounds == 0 || alphabet == 0 {
        return Err(Error::ConfigOutOfRange("rounds and alphabet must be positive".into()));
    }
    let mut rng = random::rng_from_seed(seed);
    let mut built: Vec<Round> = Vec::with_capacity(rounds);
    let mut frontier = vec![Vec::new()];
    for k in 0..rounds {
        let party = if k % 2 == 0 { Party::A } else { Party::B };
        let d = if party == Party::A { dim_a } else { dim_b };
        let mut instruments = BTreeMap::new();
        for t in &frontier {
            let rank = rng.random_range(1..=2);
            let v = random::haar_isometry(&mut rng, d * alphabet * rank, d);
            let arms = (0..alphabet)
                .map(|i| {
                    (0..rank)
                        .map(|j| v.rows((i * rank + j) * d, d).into_owned())
                        .collect()
                })
                .collect();
            instruments.insert(t.clone(), Instrument::new(arms)?);
        }
        frontier = frontier
            .iter()
            .flat_map(|t| {
                (0..alphabet).map(move |i| {
                    let mut ext = t.clone();
                    ext.push(i);
                    ext
                })
            })
            .collect();
        built.push(Round { party, instruments });
    }
    LoccProtocol::new(dim_a, dim_b, alphabet, built)
}

/// `rounds` alternating rounds, each a single identity arm.
pub fn identity_locc(dim_a: usize, dim_b: usize, rounds: usize, alphabet: usize) -> Result<LoccProtocol> {
    let rs = (0..rounds)
        .map(|k| {
            let (party, d) = if k % 2 == 0 { (Party::A, dim_a) } else { (Party::B, dim_b) };
            let transcript = vec![0; k];
            Ok(Round::unconditional(party, Instrument::unitary(linalg::identity(d))?, &[transcript]))
        })
        .collect::<Result<Vec<_>>>()?;
    LoccProtocol::new(dim_a, dim_b, alphabet, rs)
}

/// Alice measures in the computational basis; Bob applies `X^i` on outcome `i`.
pub fn measure_and_correct() -> LoccProtocol {
    let x = linalg::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let mut correct = BTreeMap::new();
    correct.insert(vec![0], Instrument::unitary(linalg::identity(2)).expect("unitary"));
    correct.insert(vec![1], Instrument::unitary(x).expect("unitary"));
    LoccProtocol::new(
        2,
        2,
        2,
        vec![
            Round::unconditional(Party::A, Instrument::basis_measurement(2), &[vec![]]),
            Round {
                party: Party::B,
                instruments: correct,
            },
        ],
    )
    .expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, real_matrix};

    fn bell() -> DensityState {
        let l = measure_and_correct().layout();
        DensityState::pure(l, &[c(1.0, 0.0), linalg::ZERO, linalg::ZERO, c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn single_identity_round_is_identity() {
        let p = identity_locc(2, 2, 1, 1).unwrap();
        let out = simulate_locc(&p, &bell()).unwrap();
        assert!(out.distance(&bell()) < 1e-15);
    }

    #[test]
    fn measure_and_correct_on_bell_state() {
        // Branch 0: |00⟩⟨00|/2 untouched. Branch 1: |11⟩⟨11|/2, X on B -> |10⟩⟨10|/2.
        let out = simulate_locc(&measure_and_correct(), &bell()).unwrap();
        let expected = real_matrix(4, 4, &[
            0.5, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.5, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        ]);
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn proportional_to_identity_arms_give_identity_channel() {
        let half = linalg::identity(2) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let inst = Instrument::new(vec![vec![half.clone()], vec![half]]).unwrap();
        let p = LoccProtocol::new(
            2,
            2,
            2,
            vec![
                Round::unconditional(Party::A, inst.clone(), &[vec![]]),
                Round::unconditional(Party::B, inst, &[vec![0], vec![1]]),
            ],
        )
        .unwrap();
        let id = Channel::identity(p.layout());
        assert!(max_abs_diff(&locc_choi(&p).unwrap(), id.choi()) < 1e-15);
    }

    #[test]
    fn missing_transcript_is_reported() {
        let mut rounds = measure_and_correct().rounds().to_vec();
        rounds[1].instruments.remove(&vec![1]);
        assert_eq!(
            LoccProtocol::new(2, 2, 2, rounds).unwrap_err(),
            Error::MissingTranscriptInstrument(vec![1])
        );
    }

    #[test]
    fn instrument_must_sum_to_channel() {
        let p0 = linalg::basis_projector(2, 0);
        assert!(matches!(
            Instrument::new(vec![vec![p0]]),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn wrong_input_layout() {
        let l = SystemLayout::new(vec![Subsystem::quantum("A", 2), Subsystem::quantum("B", 3)]).unwrap();
        let rho = DensityState::maximally_mixed(l);
        assert!(matches!(
            simulate_locc(&measure_and_correct(), &rho),
            Err(Error::LayoutMismatch(_))
        ));
    }

    #[test]
    fn compile_shapes() {
        let one_round = LoccProtocol::new(
            2,
            2,
            2,
            vec![Round::unconditional(Party::A, Instrument::basis_measurement(2), &[vec![]])],
        )
        .unwrap();
        let compiled = compile_to_mediator(&one_round, DEFAULT_MEDIATOR_CAP).unwrap();
        assert_eq!(compiled.layout().dims(), vec![2, 2, 2]);
        assert_eq!(compiled.steps().len(), 1);
        assert_eq!(compiled.steps()[0].side(), Side::Left);

        let mc = compile_to_mediator(&measure_and_correct(), DEFAULT_MEDIATOR_CAP).unwrap();
        assert_eq!(mc.steps().len(), 2);
        assert_eq!(mc.layout().dims(), vec![2, 4, 2]);
        assert!(mc
            .steps()
            .iter()
            .all(|s| crate::channel::is_g_classical(s.interaction()).unwrap()));

        assert_eq!(
            compile_to_mediator(&measure_and_correct(), 3).unwrap_err(),
            Error::MediatorOverflow { required: 4, cap: 3 }
        );
    }

    #[test]
    fn identity_protocol_compiles_to_identity() {
        let p = identity_locc(2, 2, 1, 1).unwrap();
        let eq = verify_equivalence(&p).unwrap();
        assert!(eq.pass && eq.max_choi_deviation <= 1e-12);
        let compiled = compile_to_mediator(&p, DEFAULT_MEDIATOR_CAP).unwrap();
        let id = Channel::identity(p.layout());
        assert!(max_abs_diff(&compiled.marginal_channel_choi().unwrap(), id.choi()) < 1e-10);
    }

    #[test]
    fn measure_and_correct_equivalence() {
        assert!(verify_equivalence(&measure_and_correct()).unwrap().pass);
    }

    #[test]
    fn random_locc_is_deterministic() {
        let a = random_locc(5, 2, 2, 2, 2).unwrap();
        assert_eq!(a, random_locc(5, 2, 2, 2, 2).unwrap());
        assert_eq!(a.reachable_transcripts(2).len(), 4);
    }
}
