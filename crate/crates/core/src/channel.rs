//! Completely positive trace-preserving maps in Kraus and Choi form.
//!
//! Choi convention: `C = Σ_ij |i⟩⟨j| ⊗ T(|i⟩⟨j|)`, input leg first, unnormalized
//! (trace equals the input dimension).

use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::layout::{Subsystem, SystemLayout, LABEL_A, LABEL_B, LABEL_G};
use crate::linalg::{self, c, CMatrix};
use crate::random::{self, SimRng};
use crate::state::DensityState;
use crate::tol;

#[derive(Debug, Clone)]
pub struct Channel {
    in_layout: SystemLayout,
    out_layout: SystemLayout,
    kraus: Vec<CMatrix>,
    // built on first use; full-step channels on [A, G, B] rarely need it
    choi: OnceLock<CMatrix>,
}

impl PartialEq for Channel {
    fn eq(&self, other: &Self) -> bool {
        self.in_layout == other.in_layout
            && self.out_layout == other.out_layout
            && self.kraus == other.kraus
    }
}

impl Channel {
    /// Validates shapes and `Σ K†K = I` (within 1e-8).
    pub fn from_kraus(
        kraus: Vec<CMatrix>,
        in_layout: SystemLayout,
        out_layout: SystemLayout,
    ) -> Result<Self> {
        let (din, dout) = (in_layout.total_dim(), out_layout.total_dim());
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("empty Kraus set".into()));
        }
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator is {}x{}, expected {dout}x{din}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let dev = tp_deviation(&kraus, din);
        if dev > tol::CONSTRUCT_TP {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Channel {
            in_layout,
            out_layout,
            kraus,
            choi: OnceLock::new(),
        })
    }

    /// Rebuilds a canonical Kraus set from the eigen-decomposition of a Choi matrix.
    pub fn from_choi(
        choi: &CMatrix,
        in_layout: SystemLayout,
        out_layout: SystemLayout,
    ) -> Result<Self> {
        let (din, dout) = (in_layout.total_dim(), out_layout.total_dim());
        if choi.nrows() != din * dout || choi.ncols() != din * dout {
            return Err(Error::ShapeMismatch(format!(
                "Choi matrix is {}x{}, expected {n}x{n}",
                choi.nrows(),
                choi.ncols(),
                n = din * dout
            )));
        }
        let (vals, vecs) = linalg::hermitian_eigen(choi);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tol::CONSTRUCT_CP {
            return Err(Error::NotCP(min));
        }
        let reduced = linalg::partial_trace(choi, &[din, dout], &[0]);
        let dev = linalg::max_abs_diff(&reduced, &linalg::identity(din));
        if dev > tol::CONSTRUCT_TP {
            return Err(Error::NotTracePreserving(dev));
        }
        let cutoff = 1e-14 * vals.iter().copied().fold(1.0, f64::max);
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let kraus: Vec<CMatrix> = order
            .into_iter()
            .filter(|&k| vals[k] > cutoff)
            .map(|k| {
                let s = vals[k].sqrt();
                CMatrix::from_fn(dout, din, |a, i| vecs[(i * dout + a, k)] * s)
            })
            .collect();
        Channel::from_kraus(kraus, in_layout, out_layout)
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        Channel::from_kraus(vec![linalg::identity(d)], layout.clone(), layout)
            .expect("identity is a channel")
    }

    /// Conjugation `ρ ↦ U ρ U†`.
    pub fn unitary(u: CMatrix, layout: SystemLayout) -> Result<Self> {
        Channel::from_kraus(vec![u], layout.clone(), layout)
    }

    /// Dephasing of the given legs in their canonical bases.
    pub fn pinch(layout: SystemLayout, legs: &[usize]) -> Self {
        let dims = layout.dims();
        let leg_dims: Vec<usize> = legs.iter().map(|&l| dims[l]).collect();
        let configs: usize = leg_dims.iter().product();
        let n = layout.total_dim();
        let kraus = (0..configs)
            .map(|cfg| {
                let want = linalg::digits(cfg, &leg_dims);
                CMatrix::from_fn(n, n, |i, j| {
                    let d = linalg::digits(i, &dims);
                    if i == j && legs.iter().zip(&want).all(|(&l, &w)| d[l] == w) {
                        linalg::ONE
                    } else {
                        linalg::ZERO
                    }
                })
            })
            .collect();
        Channel::from_kraus(kraus, layout.clone(), layout).expect("pinching is a channel")
    }

    /// Pinch on every classical leg of `layout`.
    pub fn pinch_classical(layout: SystemLayout) -> Result<Self> {
        let legs = layout.classical_legs();
        if legs.is_empty() {
            return Err(Error::NoClassicalLeg);
        }
        Ok(Channel::pinch(layout, &legs))
    }

    /// Fully depolarizing map `ρ ↦ Tr[ρ] I/d`.
    pub fn depolarizing(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        let scale = 1.0 / (d as f64).sqrt();
        let kraus = (0..d * d)
            .map(|k| {
                let mut m = CMatrix::zeros(d, d);
                m[(k / d, k % d)] = c(scale, 0.0);
                m
            })
            .collect();
        Channel::from_kraus(kraus, layout.clone(), layout).expect("depolarizing is a channel")
    }

    pub fn in_layout(&self) -> &SystemLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &SystemLayout {
        &self.out_layout
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &CMatrix {
        self.choi.get_or_init(|| {
            choi_from_kraus(&self.kraus, self.in_layout.total_dim(), self.out_layout.total_dim())
        })
    }

    pub fn tp_deviation(&self) -> f64 {
        tp_deviation(&self.kraus, self.in_layout.total_dim())
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(self.choi())
    }

    /// Linear extension of the map to arbitrary input matrices.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let dout = self.out_layout.total_dim();
        let mut out = CMatrix::zeros(dout, dout);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    pub fn apply(&self, state: &DensityState) -> Result<DensityState> {
        if state.layout() != &self.in_layout {
            return Err(Error::LayoutMismatch(format!(
                "channel expects {}, state is on {}",
                self.in_layout,
                state.layout()
            )));
        }
        Ok(DensityState::new_unchecked(
            self.out_layout.clone(),
            self.apply_matrix(state.matrix()),
        ))
    }

    /// Heisenberg-picture adjoint.
    pub fn dual(&self) -> HeisenbergMap {
        HeisenbergMap { channel: self.clone() }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Channel) -> Result<Channel> {
        if first.out_layout != self.in_layout {
            return Err(Error::LayoutMismatch(format!(
                "cannot feed {} into {}",
                first.out_layout, self.in_layout
            )));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|k| first.kraus.iter().map(move |j| k * j))
            .collect();
        Ok(Channel::from_kraus(kraus, first.in_layout.clone(), self.out_layout.clone())?.compressed())
    }

    /// Replaces an oversized Kraus set with the canonical one read off the Choi matrix.
    pub fn compressed(self) -> Channel {
        let bound = self.in_layout.total_dim() * self.out_layout.total_dim();
        if self.kraus.len() <= bound {
            return self;
        }
        Channel::from_choi(self.choi(), self.in_layout.clone(), self.out_layout.clone())
            .unwrap_or(self)
    }

    /// Reorders both input and output legs to match `target`.
    pub fn permuted(&self, target: &SystemLayout) -> Result<Channel> {
        let pin = self.in_layout.permutation_to(target)?;
        let pout = self.out_layout.permutation_to(target)?;
        let p_in = linalg::permutation_matrix(&self.in_layout.dims(), &pin);
        let p_out = linalg::permutation_matrix(&self.out_layout.dims(), &pout);
        let kraus = self
            .kraus
            .iter()
            .map(|k| &p_out * k * p_in.adjoint())
            .collect();
        Channel::from_kraus(kraus, target.clone(), target.clone())
    }
}

fn tp_deviation(kraus: &[CMatrix], din: usize) -> f64 {
    let mut sum = CMatrix::zeros(din, din);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    linalg::max_abs_diff(&sum, &linalg::identity(din))
}

/// `Σ_k vec(K) vec(K)†` with `vec(K)[(i, a)] = K[a, i]`.
pub fn choi_from_kraus(kraus: &[CMatrix], din: usize, dout: usize) -> CMatrix {
    let n = din * dout;
    let mut choi = CMatrix::zeros(n, n);
    for k in kraus {
        let v = CMatrix::from_fn(n, 1, |r, _| k[(r % dout, r / dout)]);
        choi += &v * v.adjoint();
    }
    choi
}

/// Choi matrix of any linear map given by its action on matrix units.
pub fn choi_from_action(din: usize, dout: usize, mut action: impl FnMut(&CMatrix) -> CMatrix) -> CMatrix {
    let mut choi = CMatrix::zeros(din * dout, din * dout);
    for i in 0..din {
        for j in 0..din {
            let mut unit = CMatrix::zeros(din, din);
            unit[(i, j)] = linalg::ONE;
            let image = action(&unit);
            choi.view_mut((i * dout, j * dout), (dout, dout))
                .copy_from(&image);
        }
    }
    choi
}

/// The trace-pairing adjoint `X ↦ Σ K† X K` of a channel.
#[derive(Debug, Clone)]
pub struct HeisenbergMap {
    channel: Channel,
}

impl HeisenbergMap {
    /// Maps an observable on the channel output to one on the channel input.
    pub fn apply(&self, observable: &CMatrix) -> CMatrix {
        let din = self.channel.in_layout.total_dim();
        let mut out = CMatrix::zeros(din, din);
        for k in &self.channel.kraus {
            out += k.adjoint() * observable * k;
        }
        out
    }

    pub fn unitality_deviation(&self) -> f64 {
        let dout = self.channel.out_layout.total_dim();
        let din = self.channel.in_layout.total_dim();
        linalg::max_abs_diff(&self.apply(&linalg::identity(dout)), &linalg::identity(din))
    }

    /// Choi matrix of the dual as a map from output-space to input-space operators.
    pub fn choi(&self) -> CMatrix {
        let adj: Vec<CMatrix> = self.channel.kraus.iter().map(|k| k.adjoint()).collect();
        choi_from_kraus(
            &adj,
            self.channel.out_layout.total_dim(),
            self.channel.in_layout.total_dim(),
        )
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }
}

/// `left ⊗ right` on the concatenated layouts.
pub fn tensor_channels(left: &Channel, right: &Channel) -> Result<Channel> {
    let in_layout = left.in_layout.concat(&right.in_layout)?;
    let out_layout = left.out_layout.concat(&right.out_layout)?;
    let kraus = left
        .kraus
        .iter()
        .flat_map(|k| right.kraus.iter().map(move |j| linalg::kron(k, j)))
        .collect();
    Channel::from_kraus(kraus, in_layout, out_layout)
}

/// Which quantum system interacts with the mediator during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `T_AG ⊗ φ_B`
    Left,
    /// `φ_A ⊗ T_GB`
    Right,
}

/// One local step on `[A, G, B]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepChannel {
    side: Side,
    interaction: Channel,
    bystander: Channel,
}

impl StepChannel {
    pub fn new(side: Side, interaction: Channel, bystander: Channel) -> Result<Self> {
        let (want_int, want_by): (&[&str], &[&str]) = match side {
            Side::Left => (&[LABEL_A, LABEL_G], &[LABEL_B]),
            Side::Right => (&[LABEL_G, LABEL_B], &[LABEL_A]),
        };
        for (ch, want, role) in [(&interaction, want_int, "interaction"), (&bystander, want_by, "bystander")] {
            if ch.in_layout.labels() != want || ch.out_layout != ch.in_layout {
                return Err(Error::LayoutMismatch(format!(
                    "{side:?} step {role} must act on {want:?}, found {} -> {}",
                    ch.in_layout, ch.out_layout
                )));
            }
        }
        Ok(StepChannel {
            side,
            interaction,
            bystander,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn interaction(&self) -> &Channel {
        &self.interaction
    }

    pub fn bystander(&self) -> &Channel {
        &self.bystander
    }

    /// The `[A, G, B]` layout the step tiles.
    pub fn layout(&self) -> SystemLayout {
        let (first, second) = match self.side {
            Side::Left => (&self.interaction, &self.bystander),
            Side::Right => (&self.bystander, &self.interaction),
        };
        first
            .in_layout
            .concat(&second.in_layout)
            .expect("labels are disjoint by construction")
    }
}

/// The full `[A, G, B]` channel of a step. The product is always formed as
/// `interaction ⊗ bystander` and then permuted into canonical leg order.
pub fn step_channel(step: &StepChannel) -> Result<Channel> {
    let raw = tensor_channels(&step.interaction, &step.bystander)?;
    let target = step.layout();
    if raw.in_layout == target {
        Ok(raw)
    } else {
        raw.permuted(&target)
    }
}

/// `P ∘ T ∘ P` where `P` dephases every classical leg.
pub fn g_classicalize(channel: &Channel) -> Result<Channel> {
    let pin = Channel::pinch_classical(channel.in_layout.clone())?;
    let pout = Channel::pinch_classical(channel.out_layout.clone())?;
    pout.compose(&channel.compose(&pin)?)
}

/// Whether `T = P ∘ T ∘ P` within 1e-9 in Choi max-entry distance.
///
/// Sandwiching by pinches masks the Choi matrix: entries whose row and column
/// disagree on a classical digit of either the input or the output vanish.
pub fn is_g_classical(channel: &Channel) -> Result<bool> {
    Ok(g_classical_deviation(channel)? <= tol::G_CLASSICAL)
}

pub fn g_classical_deviation(channel: &Channel) -> Result<f64> {
    let in_legs = channel.in_layout.classical_legs();
    let out_legs = channel.out_layout.classical_legs();
    if in_legs.is_empty() && out_legs.is_empty() {
        return Err(Error::NoClassicalLeg);
    }
    let mut dims = channel.in_layout.dims();
    let offset = dims.len();
    dims.extend(channel.out_layout.dims());
    let legs: Vec<usize> = in_legs
        .iter()
        .copied()
        .chain(out_legs.iter().map(|l| l + offset))
        .collect();
    let choi = channel.choi();
    Ok(linalg::max_abs_diff(&linalg::pinch(choi, &dims, &legs), choi))
}

/// Stinespring sample: Haar isometry into `input ⊗ environment`, environment traced.
pub fn random_channel(seed: u64, in_layout: &SystemLayout, env_dim: usize) -> Result<Channel> {
    random_channel_with(&mut random::rng_from_seed(seed), in_layout, env_dim)
}

pub fn random_channel_with(
    rng: &mut SimRng,
    in_layout: &SystemLayout,
    env_dim: usize,
) -> Result<Channel> {
    if env_dim == 0 {
        return Err(Error::ConfigOutOfRange("environment dimension must be at least 1".into()));
    }
    let d = in_layout.total_dim();
    let v = random::haar_isometry(rng, d * env_dim, d);
    let kraus = (0..env_dim)
        .map(|e| v.rows(e * d, d).into_owned())
        .collect();
    Channel::from_kraus(kraus, in_layout.clone(), in_layout.clone())
}

/// Classical channel on a single classical leg from a column-stochastic matrix
/// `transition[y][x] = P(y | x)`.
pub fn stochastic_channel(transition: &[Vec<f64>], label: &str) -> Result<Channel> {
    let n = transition.len();
    if n == 0 || transition.iter().any(|row| row.len() != n) {
        return Err(Error::ShapeMismatch("transition matrix must be square and non-empty".into()));
    }
    let mut kraus = Vec::with_capacity(n * n);
    for (y, row) in transition.iter().enumerate() {
        for (x, &p) in row.iter().enumerate() {
            if p < 0.0 {
                return Err(Error::NegativeProbability { index: y * n + x, value: p });
            }
            if p > 0.0 {
                let mut k = CMatrix::zeros(n, n);
                k[(y, x)] = c(p.sqrt(), 0.0);
                kraus.push(k);
            }
        }
    }
    let layout = SystemLayout::single(Subsystem::classical(label, n))?;
    Channel::from_kraus(kraus, layout.clone(), layout)
}

/// Random classical channel on an `n`-point mediator leg labelled `G`.
pub fn random_stochastic(seed: u64, n: usize) -> Result<Channel> {
    if n == 0 {
        return Err(Error::ConfigOutOfRange("classical leg needs at least one point".into()));
    }
    let s = random::random_stochastic_matrix(&mut random::rng_from_seed(seed), n);
    stochastic_channel(&s, LABEL_G)
}

/// Uniformly chosen environment dimension in `1..=max`.
pub(crate) fn random_env(rng: &mut SimRng, max: usize) -> usize {
    rng.random_range(1..=max.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, real_matrix};
    use crate::state::{partial_trace, product_state};

    fn qubit_layout(label: &str) -> SystemLayout {
        SystemLayout::single(Subsystem::quantum(label, 2)).unwrap()
    }

    fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        real_matrix(2, 2, &[h, h, h, -h])
    }

    #[test]
    fn identity_channel_choi() {
        let id = Channel::identity(qubit_layout("A"));
        let vals = linalg::hermitian_eigenvalues(id.choi());
        assert!((vals[3] - 2.0).abs() < 1e-14);
        assert!(vals[..3].iter().all(|v| v.abs() < 1e-14));
        assert!((linalg::trace(id.choi()).re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reset_channel() {
        let k0 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let k1 = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let l = qubit_layout("A");
        let reset = Channel::from_kraus(vec![k0, k1], l.clone(), l.clone()).unwrap();
        let out = reset.apply(&DensityState::maximally_mixed(l.clone())).unwrap();
        assert!(max_abs_diff(out.matrix(), &linalg::basis_projector(2, 0)) < 1e-15);
        let plus = DensityState::uniform_superposition(Subsystem::quantum("A", 2)).unwrap();
        let out = reset.apply(&plus).unwrap();
        assert!(max_abs_diff(out.matrix(), &linalg::basis_projector(2, 0)) < 1e-15);
    }

    #[test]
    fn dephasing_coherence() {
        // p = 0.25: coherence (1-p) * 1/2 - p * 1/2 = 1/4, Bloch x = 2 * 1/4.
        let p: f64 = 0.25;
        let l = qubit_layout("A");
        let k0 = linalg::identity(2) * c((1.0 - p).sqrt(), 0.0);
        let k1 = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]) * c(p.sqrt(), 0.0);
        let ch = Channel::from_kraus(vec![k0, k1], l.clone(), l).unwrap();
        let plus = DensityState::uniform_superposition(Subsystem::quantum("A", 2)).unwrap();
        let out = ch.apply(&plus).unwrap();
        assert!((2.0 * out.matrix()[(0, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kraus_errors() {
        let l = qubit_layout("A");
        assert!(matches!(
            Channel::from_kraus(vec![linalg::identity(3)], l.clone(), l.clone()),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            Channel::from_kraus(vec![linalg::identity(2) * c(0.5, 0.0)], l.clone(), l),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn depolarizing_choi_is_scaled_identity() {
        let dep = Channel::depolarizing(qubit_layout("A"));
        assert!(max_abs_diff(dep.choi(), &(linalg::identity(4) * c(0.5, 0.0))) < 1e-15);
        let back = Channel::from_choi(dep.choi(), qubit_layout("A"), qubit_layout("A")).unwrap();
        assert!(max_abs_diff(back.choi(), dep.choi()) < 1e-12);
    }

    #[test]
    fn choi_errors() {
        let l = qubit_layout("A");
        let mut bad = linalg::identity(4) * c(0.5, 0.0);
        bad[(0, 0)] = c(-0.5, 0.0);
        bad[(3, 3)] = c(1.5, 0.0);
        assert!(matches!(
            Channel::from_choi(&bad, l.clone(), l.clone()),
            Err(Error::NotCP(_))
        ));
        let not_tp = linalg::identity(4);
        assert!(matches!(
            Channel::from_choi(&not_tp, l.clone(), l),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn hadamard_conjugation() {
        let l = qubit_layout("A");
        let ch = Channel::unitary(hadamard(), l).unwrap();
        let zero = DensityState::basis(Subsystem::quantum("A", 2), 0).unwrap();
        let out = ch.apply(&zero).unwrap();
        assert!(max_abs_diff(out.matrix(), &real_matrix(2, 2, &[0.5, 0.5, 0.5, 0.5])) < 1e-15);
        let wrong = DensityState::maximally_mixed(qubit_layout("B"));
        assert!(matches!(ch.apply(&wrong), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn dual_of_unitary_is_adjoint_conjugation() {
        let s = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]) * c(0.0, 1.0);
        let u = &hadamard() * &s;
        let ch = Channel::unitary(u.clone(), qubit_layout("A")).unwrap();
        let x = real_matrix(2, 2, &[0.3, 0.2, 0.2, -1.0]);
        let dual = ch.dual().apply(&x);
        assert!(max_abs_diff(&dual, &(u.adjoint() * &x * &u)) < 1e-15);
        let id = Channel::identity(qubit_layout("A"));
        assert!(max_abs_diff(&id.dual().apply(&x), &x) < 1e-15);
    }

    #[test]
    fn step_channel_right_swap_moves_legs() {
        // swap on (G, B) with identity on A: ρA ⊗ ρG ⊗ ρB ↦ ρA ⊗ ρB ⊗ ρG
        let layout = SystemLayout::tripartite(2, 2, 2, false).unwrap();
        let gb = layout.restrict(&[1, 2]);
        let swap = linalg::permutation_matrix(&[2, 2], &[1, 0]);
        let step = StepChannel::new(
            Side::Right,
            Channel::unitary(swap, gb).unwrap(),
            Channel::identity(qubit_layout("A")),
        )
        .unwrap();
        let full = step_channel(&step).unwrap();
        assert_eq!(full.in_layout(), &layout);

        let ra = DensityState::basis(Subsystem::quantum("A", 2), 1).unwrap();
        let rg = DensityState::uniform_superposition(Subsystem::quantum("G", 2)).unwrap();
        let rb = DensityState::new(qubit_layout("B"), real_matrix(2, 2, &[0.8, 0.1, 0.1, 0.2])).unwrap();
        let input = product_state(&[ra.clone(), rg.clone(), rb.clone()], &layout).unwrap();
        let out = full.apply(&input).unwrap();
        let expected = linalg::kron_all([ra.matrix(), rb.matrix(), rg.matrix()]);
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-15);
        let on_g = partial_trace(&out, &["G"]).unwrap();
        assert!(max_abs_diff(on_g.matrix(), rb.matrix()) < 1e-15);
    }

    #[test]
    fn step_rejects_wrong_tiling() {
        let layout = SystemLayout::tripartite(2, 2, 2, false).unwrap();
        let ag = Channel::identity(layout.restrict(&[0, 1]));
        let a = Channel::identity(qubit_layout("A"));
        assert!(matches!(
            StepChannel::new(Side::Left, ag.clone(), a),
            Err(Error::LayoutMismatch(_))
        ));
        assert!(matches!(
            StepChannel::new(Side::Right, ag, Channel::identity(qubit_layout("A"))),
            Err(Error::LayoutMismatch(_))
        ));
    }

    fn cnot_ag(g_classical: bool) -> Channel {
        let layout = SystemLayout::tripartite(2, 2, 2, g_classical).unwrap().restrict(&[0, 1]);
        let cnot = real_matrix(4, 4, &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ]);
        Channel::unitary(cnot, layout).unwrap()
    }

    #[test]
    fn classicalize_identity_is_pinch() {
        let layout = SystemLayout::tripartite(2, 2, 2, true).unwrap().restrict(&[0, 1]);
        let id = Channel::identity(layout.clone());
        let cl = g_classicalize(&id).unwrap();
        let expected = Channel::pinch(layout, &[1]);
        assert!(max_abs_diff(cl.choi(), expected.choi()) < 1e-15);
        let twice = g_classicalize(&cl).unwrap();
        assert!(max_abs_diff(twice.choi(), cl.choi()) < 1e-12);
    }

    #[test]
    fn classicalized_cnot_correlates() {
        let cl = g_classicalize(&cnot_ag(true)).unwrap();
        let layout = cl.in_layout().clone();
        let plus = DensityState::uniform_superposition(Subsystem::quantum("A", 2)).unwrap();
        let zero = DensityState::basis(Subsystem::classical("G", 2), 0).unwrap();
        let out = cl.apply(&product_state(&[plus, zero], &layout).unwrap()).unwrap();
        let expected = real_matrix(4, 4, &[
            0.5, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.5,
        ]);
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn g_classical_membership() {
        let layout = SystemLayout::tripartite(2, 2, 2, true).unwrap().restrict(&[0, 1]);
        assert!(is_g_classical(&Channel::pinch(layout, &[1])).unwrap());
        assert!(!is_g_classical(&cnot_ag(true)).unwrap());
        assert_eq!(is_g_classical(&cnot_ag(false)).unwrap_err(), Error::NoClassicalLeg);
        assert_eq!(g_classicalize(&cnot_ag(false)).unwrap_err(), Error::NoClassicalLeg);
    }

    #[test]
    fn random_channel_rank_one_is_unitary() {
        let l = SystemLayout::single(Subsystem::quantum("A", 3)).unwrap();
        let ch = random_channel(42, &l, 1).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let u = &ch.kraus()[0];
        assert!(max_abs_diff(&(u * u.adjoint()), &linalg::identity(3)) < 1e-13);
        assert_eq!(random_channel(42, &l, 4).unwrap(), random_channel(42, &l, 4).unwrap());
        assert!(random_channel(42, &l, 0).is_err());
    }

    #[test]
    fn random_stochastic_on_uniform() {
        let seed = 17;
        let ch = random_stochastic(seed, 3).unwrap();
        assert!(is_g_classical(&ch).unwrap());
        let s = random::random_stochastic_matrix(&mut random::rng_from_seed(seed), 3);
        let uniform = DensityState::maximally_mixed(ch.in_layout().clone());
        let out = ch.apply(&uniform).unwrap();
        for (y, row) in s.iter().enumerate() {
            let row_sum: f64 = row.iter().sum();
            assert!((out.matrix()[(y, y)].re - row_sum / 3.0).abs() < 1e-15);
            for x in 0..3 {
                if x != y {
                    assert_eq!(out.matrix()[(y, x)], linalg::ZERO);
                }
            }
        }
    }
}
