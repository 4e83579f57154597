//! Seeded samplers for states, unitaries and isometries.
//!
//! Every sampler takes an explicit generator; there is no global RNG. The
//! generator type is fixed so that a seed maps to the same bits on every
//! platform.

use rand::{Rng, SeedableRng};
use rand_distr::{Exp1, StandardNormal};

use crate::layout::SystemLayout;
use crate::linalg::{self, c, CMatrix};
use crate::state::{ClassicalDistribution, DensityState};

pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; derives independent sub-seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    m
}

/// Haar-distributed isometry `V` with `V†V = I`, shape `rows × cols`.
pub fn haar_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols);
    let qr = ginibre(rng, rows, cols).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn haar_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    haar_isometry(rng, d, d)
}

/// Full-rank random state `G G† / Tr`.
pub fn random_density(rng: &mut impl Rng, layout: &SystemLayout) -> DensityState {
    let d = layout.total_dim();
    let g = ginibre(rng, d, d);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityState::new_unchecked(layout.clone(), m / c(tr, 0.0))
}

/// Random point of the simplex (flat Dirichlet).
pub fn random_distribution(rng: &mut impl Rng, n: usize) -> ClassicalDistribution {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    let mut p: Vec<f64> = draws.iter().map(|x| x / total).collect();
    // absorb rounding so the sum is exactly representable as 1 within tolerance
    let drift = 1.0 - p.iter().sum::<f64>();
    p[0] += drift;
    ClassicalDistribution::new(p).expect("normalized by construction")
}

/// Random diagonal state on a single-leg (or any) layout.
pub fn random_diagonal(rng: &mut impl Rng, layout: &SystemLayout) -> DensityState {
    let p = random_distribution(rng, layout.total_dim());
    let n = p.len();
    let m = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(p.probabilities()[i], 0.0)
        } else {
            linalg::ZERO
        }
    });
    DensityState::new_unchecked(layout.clone(), m)
}

/// Column-stochastic matrix `S[y][x] = P(y | x)`.
pub fn random_stochastic_matrix(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|_| random_distribution(rng, n).probabilities().to_vec())
        .collect();
    (0..n).map(|y| (0..n).map(|x| cols[x][y]).collect()).collect()
}
