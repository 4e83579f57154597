//! Operators, density states and classical distributions on a [`SystemLayout`].

use crate::error::{Error, Result};
use crate::layout::{Subsystem, SystemLayout};
use crate::linalg::{self, c, CMatrix, C64};
use crate::tol;

/// A dense operator on the full Hilbert space of a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: SystemLayout,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        check_square(&matrix, layout.total_dim())?;
        Ok(Operator { layout, matrix })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::ShapeMismatch(format!(
            "expected {dim}x{dim}, found {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// A positive unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    layout: SystemLayout,
    matrix: CMatrix,
}

impl DensityState {
    /// Checks Hermiticity, positivity and normalization.
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        check_square(&matrix, layout.total_dim())?;
        let herm = linalg::hermitian_deviation(&matrix);
        if herm > tol::HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::NotNormalized(tr));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -tol::PSD {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityState { layout, matrix })
    }

    pub(crate) fn new_unchecked(layout: SystemLayout, matrix: CMatrix) -> Self {
        DensityState { layout, matrix }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) amplitude vector.
    pub fn pure(layout: SystemLayout, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        let v: Vec<C64> = amplitudes.iter().map(|a| a / norm).collect();
        DensityState::new(layout, linalg::projector(&v))
    }

    /// Canonical basis state `|k⟩⟨k|` on a single leg.
    pub fn basis(subsystem: Subsystem, k: usize) -> Result<Self> {
        let d = subsystem.dim;
        if k >= d {
            return Err(Error::DimensionMismatch { expected: d, found: k + 1 });
        }
        DensityState::new(SystemLayout::single(subsystem)?, linalg::basis_projector(d, k))
    }

    /// `|+⟩⟨+|` on a single leg: uniform superposition of the canonical basis.
    pub fn uniform_superposition(subsystem: Subsystem) -> Result<Self> {
        let d = subsystem.dim;
        DensityState::pure(SystemLayout::single(subsystem)?, &vec![c(1.0, 0.0); d])
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        DensityState {
            layout,
            matrix: linalg::identity(d) / c(d as f64, 0.0),
        }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace pairing `Tr[X ρ]`.
    pub fn expectation(&self, observable: &Operator) -> Result<C64> {
        if observable.layout() != &self.layout {
            return Err(Error::LayoutMismatch(format!(
                "observable on {} paired with state on {}",
                observable.layout(),
                self.layout
            )));
        }
        Ok(linalg::trace(&(observable.matrix() * &self.matrix)))
    }

    pub fn distance(&self, other: &DensityState) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Max off-diagonal magnitude with respect to the digit of `label`.
    pub fn off_diagonal_on(&self, label: &str) -> Result<f64> {
        Ok(linalg::max_abs_diff(&self.matrix, pinch(self, label)?.matrix()))
    }
}

/// A probability vector over the configurations of a finite classical system.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probabilities: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = probabilities.iter().enumerate().find(|(_, p)| **p < 0.0) {
            return Err(Error::NegativeProbability { index, value });
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > tol::PROBABILITY {
            return Err(Error::NotNormalized(total));
        }
        Ok(ClassicalDistribution { probabilities })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        ClassicalDistribution::new(vec![1.0 / n as f64; n])
    }

    /// Dirac mass at configuration `x`.
    pub fn point_mass(n: usize, x: usize) -> Result<Self> {
        let mut p = vec![0.0; n];
        *p.get_mut(x).ok_or(Error::DimensionMismatch { expected: n, found: x + 1 })? = 1.0;
        ClassicalDistribution::new(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// `Σ_x p(x) f(x)`.
    pub fn expectation(&self, f: &[f64]) -> f64 {
        self.probabilities.iter().zip(f).map(|(p, v)| p * v).sum()
    }
}

/// Diagonal state carrying `dist` on a single classical leg.
pub fn classical_state(dist: &ClassicalDistribution, label: &str) -> Result<DensityState> {
    let n = dist.len();
    let m = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(dist.probabilities[i], 0.0)
        } else {
            linalg::ZERO
        }
    });
    DensityState::new(SystemLayout::single(Subsystem::classical(label, n))?, m)
}

/// Embeds a local operator on `target` with identities on every other leg.
pub fn lift_local(op: &CMatrix, target: &str, layout: &SystemLayout) -> Result<Operator> {
    let t = layout.index_of(target)?;
    let d = layout.subsystems()[t].dim;
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.nrows(),
        });
    }
    let matrix = layout
        .subsystems()
        .iter()
        .enumerate()
        .fold(CMatrix::identity(1, 1), |acc, (i, s)| {
            if i == t {
                linalg::kron(&acc, op)
            } else {
                linalg::kron(&acc, &linalg::identity(s.dim))
            }
        });
    Operator::new(layout.clone(), matrix)
}

/// Reduced state on `keep`; the original leg order is preserved.
pub fn partial_trace(state: &DensityState, keep: &[&str]) -> Result<DensityState> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let layout = state.layout();
    let legs = layout.leg_indices(keep)?;
    let m = linalg::partial_trace(state.matrix(), &layout.dims(), &legs);
    Ok(DensityState::new_unchecked(layout.restrict(&legs), m))
}

/// Dephases `target` in its canonical basis.
pub fn pinch(state: &DensityState, target: &str) -> Result<DensityState> {
    let layout = state.layout();
    let t = layout.index_of(target)?;
    let m = linalg::pinch(state.matrix(), &layout.dims(), &[t]);
    Ok(DensityState::new_unchecked(layout.clone(), m))
}

/// Tensor product of states whose legs, concatenated, match `layout`.
pub fn product_state(factors: &[DensityState], layout: &SystemLayout) -> Result<DensityState> {
    let dims: Vec<usize> = factors.iter().flat_map(|f| f.layout().dims()).collect();
    if dims != layout.dims() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            found: dims.iter().product(),
        });
    }
    let m = linalg::kron_all(factors.iter().map(|f| f.matrix()));
    Ok(DensityState::new_unchecked(layout.clone(), m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, real_matrix};

    fn qubit(label: &str) -> Subsystem {
        Subsystem::quantum(label, 2)
    }

    #[test]
    fn lift_pauli_x() {
        let layout = SystemLayout::new(vec![qubit("A"), qubit("G")]).unwrap();
        let x = real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let lifted = lift_local(&x, "A", &layout).unwrap();
        let expected = linalg::kron(&x, &linalg::identity(2));
        assert!(max_abs_diff(lifted.matrix(), &expected) < 1e-15);
        let id = lift_local(&linalg::identity(2), "G", &layout).unwrap();
        assert!(max_abs_diff(id.matrix(), &linalg::identity(4)) < 1e-15);
    }

    #[test]
    fn lift_errors() {
        let layout = SystemLayout::new(vec![qubit("A")]).unwrap();
        assert!(matches!(
            lift_local(&linalg::identity(3), "A", &layout),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            lift_local(&linalg::identity(2), "Z", &layout),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn lifted_projector_expectation_on_uniform_diagonal() {
        // Direct 8x8: Tr[(I ⊗ I ⊗ |0⟩⟨0|) I/8] = 4/8.
        let layout = SystemLayout::new(vec![qubit("A"), qubit("G"), qubit("B")]).unwrap();
        let p0 = linalg::basis_projector(2, 0);
        let op = lift_local(&p0, "B", &layout).unwrap();
        let rho = DensityState::maximally_mixed(layout);
        let e = rho.expectation(&op).unwrap();
        assert!((e.re - 0.5).abs() < 1e-15 && e.im.abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let layout = SystemLayout::new(vec![qubit("A"), qubit("B")]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityState::pure(layout, &[c(h, 0.0), linalg::ZERO, linalg::ZERO, c(h, 0.0)]).unwrap();
        let reduced = partial_trace(&bell, &["A"]).unwrap();
        assert!(max_abs_diff(reduced.matrix(), &(linalg::identity(2) * c(0.5, 0.0))) < 1e-15);
        assert_eq!(reduced.layout().labels(), vec!["A"]);
    }

    #[test]
    fn partial_trace_of_ghz_keeping_outer_legs() {
        let layout = SystemLayout::new(vec![qubit("A"), qubit("G"), qubit("B")]).unwrap();
        let mut amps = vec![linalg::ZERO; 8];
        amps[0] = c(1.0, 0.0);
        amps[7] = c(1.0, 0.0);
        let ghz = DensityState::pure(layout, &amps).unwrap();
        let ab = partial_trace(&ghz, &["B", "A"]).unwrap();
        let expected = real_matrix(4, 4, &[
            0.5, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.5,
        ]);
        assert!(max_abs_diff(ab.matrix(), &expected) < 1e-15);
        assert_eq!(ab.layout().labels(), vec!["A", "B"]);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityState::maximally_mixed(SystemLayout::new(vec![qubit("A")]).unwrap());
        assert_eq!(partial_trace(&rho, &[]).unwrap_err(), Error::EmptyKeepSet);
        assert_eq!(partial_trace(&rho, &["Q"]).unwrap_err(), Error::UnknownLabel("Q".into()));
    }

    #[test]
    fn pinch_examples() {
        let plus = DensityState::uniform_superposition(qubit("G")).unwrap();
        let pinched = pinch(&plus, "G").unwrap();
        assert!(max_abs_diff(pinched.matrix(), &(linalg::identity(2) * c(0.5, 0.0))) < 1e-15);

        let layout = SystemLayout::new(vec![qubit("A"), qubit("G")]).unwrap();
        let bell = DensityState::pure(
            layout,
            &[c(1.0, 0.0), linalg::ZERO, linalg::ZERO, c(1.0, 0.0)],
        )
        .unwrap();
        let pinched = pinch(&bell, "G").unwrap();
        let expected = real_matrix(4, 4, &[
            0.5, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.5,
        ]);
        assert!(max_abs_diff(pinched.matrix(), &expected) < 1e-15);
        assert_eq!(pinch(&pinched, "G").unwrap(), pinched);
        assert!(matches!(pinch(&bell, "X"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn product_of_maximally_mixed() {
        let layout = SystemLayout::new(vec![qubit("A"), qubit("B")]).unwrap();
        let half = DensityState::maximally_mixed(SystemLayout::single(qubit("A")).unwrap());
        let halfb = DensityState::maximally_mixed(SystemLayout::single(qubit("B")).unwrap());
        let p = product_state(&[half, halfb.clone()], &layout).unwrap();
        assert!(max_abs_diff(p.matrix(), &(linalg::identity(4) * c(0.25, 0.0))) < 1e-15);
        let bad = SystemLayout::new(vec![qubit("A"), Subsystem::quantum("B", 3)]).unwrap();
        assert!(matches!(
            product_state(&[halfb.clone(), halfb], &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classical_states() {
        let u = classical_state(&ClassicalDistribution::uniform(3).unwrap(), "G").unwrap();
        assert!(max_abs_diff(u.matrix(), &(linalg::identity(3) / c(3.0, 0.0))) < 1e-15);

        let delta = classical_state(&ClassicalDistribution::point_mass(4, 2).unwrap(), "G").unwrap();
        assert_eq!(delta.matrix()[(2, 2)], c(1.0, 0.0));
        assert!((linalg::trace(delta.matrix()).re - 1.0).abs() < 1e-15);

        let p = ClassicalDistribution::new(vec![0.7, 0.3]).unwrap();
        let s = classical_state(&p, "G").unwrap();
        assert_eq!(pinch(&s, "G").unwrap(), s);
        // 0.7 * 1 + 0.3 * (-1)
        assert!((p.expectation(&[1.0, -1.0]) - 0.4).abs() < 1e-15);
        let f = Operator::new(s.layout().clone(), real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!((s.expectation(&f).unwrap().re - 0.4).abs() < 1e-15);
    }

    #[test]
    fn distribution_errors() {
        assert!(matches!(
            ClassicalDistribution::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized(_))
        ));
        assert_eq!(
            ClassicalDistribution::new(vec![1.5, -0.5]).unwrap_err(),
            Error::NegativeProbability { index: 1, value: -0.5 }
        );
    }

    #[test]
    fn state_validation() {
        let l = SystemLayout::single(qubit("A")).unwrap();
        assert!(matches!(
            DensityState::new(l.clone(), real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0])),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            DensityState::new(l.clone(), real_matrix(2, 2, &[1.5, 0.0, 0.0, -0.5])),
            Err(Error::NotPositive(_))
        ));
        assert!(matches!(
            DensityState::new(l, real_matrix(2, 2, &[0.5, 0.1, 0.0, 0.5])),
            Err(Error::NotHermitian(_))
        ));
    }
}
