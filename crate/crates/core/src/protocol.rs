//! Sequences of local `A–G` / `G–B` steps evolved on two tracks: the density
//! matrix, and (for a classical mediator) an explicit triseparable ensemble.

use rand::Rng;

use crate::channel::{
    g_classicalize, is_g_classical, random_channel_with, random_env, step_channel, Channel, Side,
    StepChannel,
};
use crate::entanglement::{ensemble_reconstruct, ensemble_step, negativity, Cut, TriseparableEnsemble};
use crate::error::{Error, Result};
use crate::layout::{SystemLayout, LABEL_A, LABEL_B, LABEL_G};
use crate::linalg::{self, CMatrix};
use crate::random::{self, SimRng};
use crate::state::{partial_trace, product_state, DensityState};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MediatorMode {
    Classical,
    Quantum,
}

impl MediatorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MediatorMode::Classical => "classical",
            MediatorMode::Quantum => "quantum",
        }
    }
}

impl std::str::FromStr for MediatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(MediatorMode::Classical),
            "quantum" => Ok(MediatorMode::Quantum),
            other => Err(Error::InvalidProtocol(format!("unknown mediator mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Initial {
    Product {
        a: DensityState,
        g: DensityState,
        b: DensityState,
    },
    Ensemble(TriseparableEnsemble),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    layout: SystemLayout,
    initial: Initial,
    steps: Vec<StepChannel>,
    mode: MediatorMode,
}

impl Protocol {
    /// A protocol starting from the product `ω_A ⊗ ω_G ⊗ ω_B`.
    pub fn new(
        layout: SystemLayout,
        a: DensityState,
        g: DensityState,
        b: DensityState,
        steps: Vec<StepChannel>,
        mode: MediatorMode,
    ) -> Result<Self> {
        check_layout(&layout, mode)?;
        for (leg, f) in [(0, &a), (1, &g), (2, &b)] {
            if f.layout() != &layout.restrict(&[leg]) {
                return Err(Error::LayoutMismatch(format!(
                    "initial factor on {} does not match leg {leg} of {layout}",
                    f.layout()
                )));
            }
        }
        if mode == MediatorMode::Classical {
            let off = g.off_diagonal_on(LABEL_G)?;
            if off > tol::HERMITIAN {
                return Err(Error::InvalidProtocol(format!(
                    "classical mediator must start diagonal (off-diagonal {off:e})"
                )));
            }
        }
        check_steps(&layout, &steps, mode)?;
        Ok(Protocol {
            layout,
            initial: Initial::Product { a, g, b },
            steps,
            mode,
        })
    }

    /// A protocol starting from an arbitrary triseparable state.
    pub fn from_ensemble(
        ensemble: TriseparableEnsemble,
        steps: Vec<StepChannel>,
        mode: MediatorMode,
    ) -> Result<Self> {
        let layout = ensemble.layout().clone();
        check_layout(&layout, mode)?;
        check_steps(&layout, &steps, mode)?;
        Ok(Protocol {
            layout,
            initial: Initial::Ensemble(ensemble),
            steps,
            mode,
        })
    }

    /// Same steps and mode, new product initial state.
    pub fn with_initial(&self, a: DensityState, g: DensityState, b: DensityState) -> Result<Self> {
        Protocol::new(self.layout.clone(), a, g, b, self.steps.clone(), self.mode)
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn steps(&self) -> &[StepChannel] {
        &self.steps
    }

    pub fn mode(&self) -> MediatorMode {
        self.mode
    }

    pub fn initial_state(&self) -> Result<DensityState> {
        match &self.initial {
            Initial::Product { a, g, b } => {
                product_state(&[a.clone(), g.clone(), b.clone()], &self.layout)
            }
            Initial::Ensemble(e) => ensemble_reconstruct(e),
        }
    }

    /// Initial mediator state (the marginal on `G`).
    pub fn initial_mediator(&self) -> Result<DensityState> {
        match &self.initial {
            Initial::Product { g, .. } => Ok(g.clone()),
            Initial::Ensemble(_) => partial_trace(&self.initial_state()?, &[LABEL_G]),
        }
    }

    fn initial_ensemble(&self) -> Result<TriseparableEnsemble> {
        match &self.initial {
            Initial::Product { a, g, b } => {
                TriseparableEnsemble::product(a.clone(), g.clone(), b.clone())
            }
            Initial::Ensemble(e) => Ok(e.clone()),
        }
    }

    /// Runs every step on both tracks, recording negativities after each one.
    pub fn run(&self) -> Result<Trajectory> {
        let mut state = self.initial_state()?;
        let mut ensemble = match self.mode {
            MediatorMode::Classical => Some(self.initial_ensemble()?),
            MediatorMode::Quantum => None,
        };
        let mut records = Vec::with_capacity(self.steps.len() + 1);
        records.push(TrajectoryRecord::new(0, state.clone(), ensemble.clone())?);
        for (i, step) in self.steps.iter().enumerate() {
            state = step_channel(step)?.apply(&state)?;
            if let Some(e) = ensemble.as_mut() {
                *e = ensemble_step(e, step).map_err(|err| match err {
                    Error::NotGClassical { .. } => Error::NotGClassical { step: i },
                    other => other,
                })?;
            }
            records.push(TrajectoryRecord::new(i + 1, state.clone(), ensemble.clone())?);
        }
        Ok(Trajectory {
            mode: self.mode,
            records,
        })
    }

    /// Choi matrix of `ρ_AB ↦ Tr_G[steps(ρ_AB ⊗ ω_G)]` with `ω_G` the initial mediator.
    pub fn marginal_channel_choi(&self) -> Result<CMatrix> {
        let dims = self.layout.dims();
        let (da, db) = (dims[0], dims[2]);
        let omega_g = self.initial_mediator()?.into_matrix();
        let channels = self
            .steps
            .iter()
            .map(step_channel)
            .collect::<Result<Vec<Channel>>>()?;
        Ok(crate::channel::choi_from_action(da * db, da * db, |unit| {
            let mut x = insert_middle(unit, da, db, &omega_g);
            for ch in &channels {
                x = ch.apply_matrix(&x);
            }
            linalg::partial_trace(&x, &dims, &[0, 2])
        }))
    }
}

/// `X_AB ↦ X` on `[A, G, B]` with `ω_G` on the middle leg.
fn insert_middle(x: &CMatrix, da: usize, db: usize, omega_g: &CMatrix) -> CMatrix {
    let dg = omega_g.nrows();
    let n = da * dg * db;
    CMatrix::from_fn(n, n, |r, s| {
        let (ra, rg, rb) = (r / (dg * db), (r / db) % dg, r % db);
        let (sa, sg, sb) = (s / (dg * db), (s / db) % dg, s % db);
        x[(ra * db + rb, sa * db + sb)] * omega_g[(rg, sg)]
    })
}

fn check_layout(layout: &SystemLayout, mode: MediatorMode) -> Result<()> {
    if layout.labels() != [LABEL_A, LABEL_G, LABEL_B] {
        return Err(Error::InvalidProtocol(format!("protocol layout must be [A, G, B], got {layout}")));
    }
    if mode == MediatorMode::Classical && !layout.subsystems()[1].classical {
        return Err(Error::NoClassicalLeg);
    }
    Ok(())
}

fn check_steps(layout: &SystemLayout, steps: &[StepChannel], mode: MediatorMode) -> Result<()> {
    for (i, step) in steps.iter().enumerate() {
        if &step.layout() != layout {
            return Err(Error::LayoutMismatch(format!(
                "step {i} acts on {}, protocol is on {layout}",
                step.layout()
            )));
        }
        if mode == MediatorMode::Classical && !is_g_classical(step.interaction())? {
            return Err(Error::NotGClassical { step: i });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub state: DensityState,
    pub ensemble: Option<TriseparableEnsemble>,
    pub negativity_ab: f64,
    pub negativity_a_gb: f64,
    pub negativity_ag_b: f64,
    pub marginal_ab: DensityState,
    /// Max-entry distance between the ensemble reconstruction and `state`.
    pub certificate_residual: Option<f64>,
}

impl TrajectoryRecord {
    fn new(step: usize, state: DensityState, ensemble: Option<TriseparableEnsemble>) -> Result<Self> {
        let marginal_ab = partial_trace(&state, &[LABEL_A, LABEL_B])?;
        Ok(TrajectoryRecord {
            step,
            negativity_ab: negativity(&marginal_ab, &Cut::a_b())?,
            negativity_a_gb: negativity(&state, &Cut::a_gb())?,
            negativity_ag_b: negativity(&state, &Cut::ag_b())?,
            certificate_residual: ensemble.as_ref().map(|e| e.residual(&state)),
            marginal_ab,
            ensemble,
            state,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: MediatorMode,
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn final_record(&self) -> &TrajectoryRecord {
        self.records.last().expect("a trajectory always holds its initial record")
    }

    pub fn max_negativity_ab(&self) -> f64 {
        self.records.iter().map(|r| r.negativity_ab).fold(0.0, f64::max)
    }

    pub fn max_certificate_residual(&self) -> Option<f64> {
        self.records
            .iter()
            .map(|r| r.certificate_residual)
            .try_fold(0.0, |acc: f64, r| r.map(|r| acc.max(r)))
    }

    /// Classical mode only: final A|B negativity and every certificate residual within 1e-9.
    pub fn theorem_pass(&self) -> Option<bool> {
        match self.mode {
            MediatorMode::Quantum => None,
            MediatorMode::Classical => Some(
                self.final_record().negativity_ab <= tol::NEGATIVITY_ZERO
                    && self
                        .max_certificate_residual()
                        .is_some_and(|r| r <= tol::ACCUMULATED),
            ),
        }
    }
}

fn cnot() -> CMatrix {
    linalg::real_matrix(4, 4, &[
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, 1.0, 0.0,
    ])
}

fn cz() -> CMatrix {
    linalg::real_matrix(4, 4, &[
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, -1.0,
    ])
}

/// Three-qubit toy of a mediated-entanglement experiment: `A` writes into `G`
/// with a CNOT, `G` imprints a phase on `B` with a CZ, and `A` uncomputes `G`.
pub fn bmv_scenario(mode: MediatorMode) -> Protocol {
    let layout = SystemLayout::tripartite(2, 2, 2, true).expect("static layout");
    let ag = layout.restrict(&[0, 1]);
    let gb = layout.restrict(&[1, 2]);
    let prepare = |ch: Channel| match mode {
        MediatorMode::Classical => g_classicalize(&ch).expect("G is classical"),
        MediatorMode::Quantum => ch,
    };
    let left = |u: CMatrix| {
        StepChannel::new(
            Side::Left,
            prepare(Channel::unitary(u, ag.clone()).expect("unitary")),
            Channel::identity(layout.restrict(&[2])),
        )
        .expect("tiles [A, G, B]")
    };
    let right = StepChannel::new(
        Side::Right,
        prepare(Channel::unitary(cz(), gb).expect("unitary")),
        Channel::identity(layout.restrict(&[0])),
    )
    .expect("tiles [A, G, B]");
    let a = DensityState::uniform_superposition(layout.subsystems()[0].clone()).expect("qubit");
    let g = DensityState::basis(layout.subsystems()[1].clone(), 0).expect("qubit");
    let b = DensityState::uniform_superposition(layout.subsystems()[2].clone()).expect("qubit");
    Protocol::new(layout.clone(), a, g, b, vec![left(cnot()), right, left(cnot())], mode)
        .expect("valid by construction")
}

/// Upper bounds enforced by [`fuzz_protocols`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzCaps {
    pub max_da: usize,
    pub max_dg: usize,
    pub max_db: usize,
    pub max_steps: usize,
}

impl Default for FuzzCaps {
    fn default() -> Self {
        FuzzCaps {
            max_da: 3,
            max_dg: 4,
            max_db: 3,
            max_steps: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzConfig {
    pub da: usize,
    pub dg: usize,
    pub db: usize,
    pub max_steps: usize,
    pub count: usize,
    pub mode: MediatorMode,
    pub caps: FuzzCaps,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            da: 2,
            dg: 3,
            db: 2,
            max_steps: 6,
            count: 200,
            mode: MediatorMode::Classical,
            caps: FuzzCaps::default(),
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<()> {
        let caps = &self.caps;
        for (name, v, cap) in [
            ("dA", self.da, caps.max_da),
            ("dG", self.dg, caps.max_dg),
            ("dB", self.db, caps.max_db),
        ] {
            if v == 0 || v > cap {
                return Err(Error::ConfigOutOfRange(format!("{name} = {v} must lie in 1..={cap}")));
            }
        }
        if self.max_steps > caps.max_steps {
            return Err(Error::ConfigOutOfRange(format!(
                "max steps {} exceeds cap {}",
                self.max_steps, caps.max_steps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzCase {
    pub index: usize,
    pub sub_seed: u64,
    pub protocol: Protocol,
}

/// Lazily generated random protocols; case `i` depends only on `(seed, i)`.
pub fn fuzz_protocols(seed: u64, config: &FuzzConfig) -> Result<impl Iterator<Item = FuzzCase>> {
    config.validate()?;
    let config = *config;
    Ok((0..config.count).map(move |index| {
        let sub_seed = random::derive_seed(seed, index as u64);
        FuzzCase {
            index,
            sub_seed,
            protocol: fuzz_protocol(sub_seed, &config).expect("validated configuration"),
        }
    }))
}

/// The protocol the fuzzer generates from one sub-seed.
///
/// Interactions are Stinespring samples with environment dimension 1..=3,
/// bystanders with 1..=2. In classical mode interactions are pinch-sandwiched;
/// in quantum mode the identical samples are used raw.
pub fn fuzz_protocol(sub_seed: u64, config: &FuzzConfig) -> Result<Protocol> {
    config.validate()?;
    let mut rng = random::rng_from_seed(sub_seed);
    let n_steps = if config.max_steps == 0 {
        0
    } else {
        rng.random_range(1..=config.max_steps)
    };
    let layout = SystemLayout::tripartite(config.da, config.dg, config.db, true)?;
    random_protocol_with(&mut rng, layout, n_steps, config.mode)
}

/// Exactly `n_steps` random steps on `[A:da, G:dg, B:db]`, drawn the same
/// way as the fuzzer draws them. Dimensions are not capped here.
pub fn random_protocol(
    seed: u64,
    (da, dg, db): (usize, usize, usize),
    n_steps: usize,
    mode: MediatorMode,
) -> Result<Protocol> {
    let layout = SystemLayout::tripartite(da, dg, db, true)?;
    random_protocol_with(&mut random::rng_from_seed(seed), layout, n_steps, mode)
}

fn random_protocol_with(
    rng: &mut SimRng,
    layout: SystemLayout,
    n_steps: usize,
    mode: MediatorMode,
) -> Result<Protocol> {
    let a = random::random_density(rng, &layout.restrict(&[0]));
    let g = random::random_diagonal(rng, &layout.restrict(&[1]));
    let b = random::random_density(rng, &layout.restrict(&[2]));
    let steps = (0..n_steps)
        .map(|_| random_step(rng, &layout, mode))
        .collect::<Result<Vec<_>>>()?;
    Protocol::new(layout, a, g, b, steps, mode)
}

fn random_step(rng: &mut SimRng, layout: &SystemLayout, mode: MediatorMode) -> Result<StepChannel> {
    let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
    let (int_legs, by_leg): (&[usize], &[usize]) = match side {
        Side::Left => (&[0, 1], &[2]),
        Side::Right => (&[1, 2], &[0]),
    };
    let env = random_env(rng, 3);
    let interaction = random_channel_with(rng, &layout.restrict(int_legs), env)?;
    let env = random_env(rng, 2);
    let bystander = random_channel_with(rng, &layout.restrict(by_leg), env)?;
    let interaction = match mode {
        MediatorMode::Classical => g_classicalize(&interaction)?,
        MediatorMode::Quantum => interaction,
    };
    StepChannel::new(side, interaction, bystander)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn zero_step_protocol() {
        let p = bmv_scenario(MediatorMode::Classical);
        let empty = Protocol::new(
            p.layout().clone(),
            DensityState::uniform_superposition(p.layout().subsystems()[0].clone()).unwrap(),
            DensityState::basis(p.layout().subsystems()[1].clone(), 0).unwrap(),
            DensityState::uniform_superposition(p.layout().subsystems()[2].clone()).unwrap(),
            vec![],
            MediatorMode::Classical,
        )
        .unwrap();
        let t = empty.run().unwrap();
        assert_eq!(t.records.len(), 1);
        let r = &t.records[0];
        assert!(r.negativity_ab < 1e-15 && r.negativity_a_gb < 1e-15 && r.negativity_ag_b < 1e-15);
        assert!(r.ensemble.is_some());
    }

    #[test]
    fn quantum_bmv_entangles() {
        let t = bmv_scenario(MediatorMode::Quantum).run().unwrap();
        assert_eq!(t.records.len(), 4);
        let last = t.final_record();
        assert!((last.negativity_ab - 0.5).abs() < 1e-12);
        assert!(last.ensemble.is_none());
        let g = partial_trace(&last.state, &[LABEL_G]).unwrap();
        assert!(max_abs_diff(g.matrix(), &linalg::basis_projector(2, 0)) < 1e-14);
        assert_eq!(t.theorem_pass(), None);
    }

    #[test]
    fn classical_bmv_stays_separable() {
        let t = bmv_scenario(MediatorMode::Classical).run().unwrap();
        let last = t.final_record();
        assert!(last.negativity_ab < 1e-10);
        assert_eq!(t.theorem_pass(), Some(true));
        for r in &t.records {
            assert!(r.certificate_residual.unwrap() < 1e-12);
            assert!(r.state.off_diagonal_on(LABEL_G).unwrap() < 1e-12);
        }
    }

    #[test]
    fn classical_mode_rejects_raw_interactions() {
        let q = bmv_scenario(MediatorMode::Quantum);
        let err = Protocol::new(
            q.layout().clone(),
            DensityState::basis(q.layout().subsystems()[0].clone(), 0).unwrap(),
            DensityState::basis(q.layout().subsystems()[1].clone(), 0).unwrap(),
            DensityState::basis(q.layout().subsystems()[2].clone(), 0).unwrap(),
            q.steps().to_vec(),
            MediatorMode::Classical,
        )
        .unwrap_err();
        assert_eq!(err, Error::NotGClassical { step: 0 });
    }

    #[test]
    fn classical_mode_requires_diagonal_mediator() {
        let p = bmv_scenario(MediatorMode::Classical);
        let plus_g = DensityState::uniform_superposition(p.layout().subsystems()[1].clone()).unwrap();
        let a = DensityState::basis(p.layout().subsystems()[0].clone(), 0).unwrap();
        let b = DensityState::basis(p.layout().subsystems()[2].clone(), 0).unwrap();
        assert!(matches!(p.with_initial(a, plus_g, b), Err(Error::InvalidProtocol(_))));
    }

    #[test]
    fn fuzz_config_caps() {
        let mut cfg = FuzzConfig { count: 0, ..FuzzConfig::default() };
        assert_eq!(fuzz_protocols(1, &cfg).unwrap().count(), 0);
        cfg.dg = 5;
        assert!(matches!(fuzz_protocols(1, &cfg), Err(Error::ConfigOutOfRange(_))));
        cfg.dg = 3;
        cfg.max_steps = 11;
        assert!(matches!(fuzz_protocols(1, &cfg), Err(Error::ConfigOutOfRange(_))));
    }

    #[test]
    fn fuzz_is_deterministic() {
        let cfg = FuzzConfig { count: 3, ..FuzzConfig::default() };
        let a: Vec<FuzzCase> = fuzz_protocols(77, &cfg).unwrap().collect();
        let b: Vec<FuzzCase> = fuzz_protocols(77, &cfg).unwrap().collect();
        assert_eq!(a, b);
        let c = fuzz_protocol(a[2].sub_seed, &cfg).unwrap();
        assert_eq!(c, a[2].protocol);
    }

    #[test]
    fn marginal_choi_of_empty_protocol_is_identity() {
        let p = bmv_scenario(MediatorMode::Classical);
        let empty = Protocol::from_ensemble(
            TriseparableEnsemble::product(
                DensityState::basis(p.layout().subsystems()[0].clone(), 0).unwrap(),
                DensityState::basis(p.layout().subsystems()[1].clone(), 1).unwrap(),
                DensityState::basis(p.layout().subsystems()[2].clone(), 0).unwrap(),
            )
            .unwrap(),
            vec![],
            MediatorMode::Classical,
        )
        .unwrap();
        let choi = empty.marginal_channel_choi().unwrap();
        let id = Channel::identity(SystemLayout::tripartite(2, 1, 2, false).unwrap());
        assert!(max_abs_diff(&choi, id.choi()) < 1e-15);
    }
}
