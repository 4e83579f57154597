//! Partial transposes, negativity, and explicit triseparable decompositions.
//!
//! A [`TriseparableEnsemble`] is a finite convex combination of threefold
//! product states on `[A, G, B]`. [`ensemble_step`] pushes such a
//! decomposition through one local step whose interaction commutes with
//! dephasing of `G`: after the step the `A–G` (or `G–B`) part is block
//! diagonal in the canonical basis of `G`, and each block is a product of a
//! state on the quantum leg with a basis state of `G`.

use nalgebra::DMatrix;

use crate::channel::{is_g_classical, Side, StepChannel};
use crate::error::{Error, Result};
use crate::layout::{SystemLayout, LABEL_A, LABEL_B, LABEL_G};
use crate::linalg::{self, c, CMatrix};
use crate::state::DensityState;
use crate::tol;

/// A bipartition of a layout's labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

impl Cut {
    pub fn new(left: &[&str], right: &[&str]) -> Self {
        Cut {
            left: left.iter().map(|s| s.to_string()).collect(),
            right: right.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn a_b() -> Self {
        Cut::new(&[LABEL_A], &[LABEL_B])
    }

    pub fn a_gb() -> Self {
        Cut::new(&[LABEL_A], &[LABEL_G, LABEL_B])
    }

    pub fn ag_b() -> Self {
        Cut::new(&[LABEL_A, LABEL_G], &[LABEL_B])
    }

    /// Leg indices of the right-hand side after checking the cut partitions `layout`.
    fn right_legs(&self, layout: &SystemLayout) -> Result<Vec<usize>> {
        if self.left.is_empty() || self.right.is_empty() {
            return Err(Error::BadCut("both sides of a cut must be non-empty".into()));
        }
        let mut seen = vec![false; layout.len()];
        for label in self.left.iter().chain(&self.right) {
            let i = layout
                .index_of(label)
                .map_err(|_| Error::BadCut(format!("label `{label}` is not in {layout}")))?;
            if seen[i] {
                return Err(Error::BadCut(format!("label `{label}` appears twice")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::BadCut(format!("cut does not cover {layout}")));
        }
        self.right.iter().map(|l| layout.index_of(l)).collect()
    }
}

/// Transpose of the right-hand legs of `cut`.
pub fn partial_transpose(state: &DensityState, cut: &Cut) -> Result<CMatrix> {
    let legs = cut.right_legs(state.layout())?;
    Ok(linalg::partial_transpose(state.matrix(), &state.layout().dims(), &legs))
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose.
pub fn negativity(state: &DensityState, cut: &Cut) -> Result<f64> {
    let pt = partial_transpose(state, cut)?;
    Ok(linalg::hermitian_eigenvalues(&pt)
        .into_iter()
        .filter(|v| *v < 0.0)
        .fold(0.0, |acc, v| acc - v))
}

/// One weighted product `λ · ω_A ⊗ ω_G ⊗ ω_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTerm {
    pub weight: f64,
    pub a: DensityState,
    pub g: DensityState,
    pub b: DensityState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriseparableEnsemble {
    terms: Vec<EnsembleTerm>,
    layout: SystemLayout,
}

impl TriseparableEnsemble {
    /// Validates weights, factor states, leg consistency and diagonal `G` factors.
    pub fn new(terms: Vec<EnsembleTerm>) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptyEnsemble)?;
        let layout = first
            .a
            .layout()
            .concat(first.g.layout())?
            .concat(first.b.layout())?;
        if layout.labels() != [LABEL_A, LABEL_G, LABEL_B] {
            return Err(Error::InvalidEnsemble(format!("factors must be on A, G, B; got {layout}")));
        }
        let mut total = 0.0;
        for t in &terms {
            if t.weight.is_nan() || t.weight < 0.0 {
                return Err(Error::InvalidEnsemble(format!("negative weight {}", t.weight)));
            }
            total += t.weight;
            for (f, expect) in [(&t.a, &first.a), (&t.g, &first.g), (&t.b, &first.b)] {
                if f.layout() != expect.layout() {
                    return Err(Error::InvalidEnsemble("factor layouts differ between terms".into()));
                }
                DensityState::new(f.layout().clone(), f.matrix().clone())?;
            }
            let off = t.g.off_diagonal_on(LABEL_G)?;
            if off > tol::HERMITIAN {
                return Err(Error::InvalidEnsemble(format!(
                    "mediator factor is not diagonal (off-diagonal {off:e})"
                )));
            }
        }
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(TriseparableEnsemble { terms, layout })
    }

    /// Single product term.
    pub fn product(a: DensityState, g: DensityState, b: DensityState) -> Result<Self> {
        TriseparableEnsemble::new(vec![EnsembleTerm { weight: 1.0, a, g, b }])
    }

    pub fn terms(&self) -> &[EnsembleTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    /// Max-entry distance between the reconstruction and `state`.
    pub fn residual(&self, state: &DensityState) -> f64 {
        let recon = reconstruct_matrix(&self.terms, self.layout.total_dim());
        linalg::max_abs_diff(&recon, state.matrix())
    }
}

fn reconstruct_matrix(terms: &[EnsembleTerm], dim: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(dim, dim);
    for t in terms {
        acc += linalg::kron_all([t.a.matrix(), t.g.matrix(), t.b.matrix()]) * c(t.weight, 0.0);
    }
    acc
}

/// `Σ λᵢ ω_Aⁱ ⊗ ω_Gⁱ ⊗ ω_Bⁱ`.
pub fn ensemble_reconstruct(ensemble: &TriseparableEnsemble) -> Result<DensityState> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let m = reconstruct_matrix(&ensemble.terms, ensemble.layout.total_dim());
    Ok(DensityState::new_unchecked(ensemble.layout.clone(), m))
}

#[derive(Clone)]
struct Branch {
    weight: f64,
    a: CMatrix,
    b: CMatrix,
}

/// Adds `cand` to `branch`, folding it into a term with an identical `A` or `B` factor.
fn merge_into(branch: &mut Vec<Branch>, cand: Branch) {
    for t in branch.iter_mut() {
        let total = t.weight + cand.weight;
        if linalg::max_abs_diff(&t.a, &cand.a) <= tol::MERGE_FACTOR {
            t.b = (&t.b * c(t.weight, 0.0) + &cand.b * c(cand.weight, 0.0)) / c(total, 0.0);
            t.weight = total;
            return;
        }
        if linalg::max_abs_diff(&t.b, &cand.b) <= tol::MERGE_FACTOR {
            t.a = (&t.a * c(t.weight, 0.0) + &cand.a * c(cand.weight, 0.0)) / c(total, 0.0);
            t.weight = total;
            return;
        }
    }
    branch.push(cand);
}

/// Real coordinates of a Hermitian matrix (diagonal, upper real, upper imaginary).
fn hermitian_coords(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
        for j in i + 1..n {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

/// Carathéodory pruning: while the branch holds more terms than the affine
/// dimension of the `A ⊗ B` state space allows, shift weight along an affine
/// dependency until one term vanishes. The convex combination is unchanged.
fn prune_branch(branch: &mut Vec<Branch>) {
    let Some(first) = branch.first() else { return };
    let d = first.a.nrows() * first.b.nrows();
    let bound = d * d;
    while branch.len() > bound {
        let k = bound + 1;
        let points: Vec<Vec<f64>> = branch[..k]
            .iter()
            .map(|t| hermitian_coords(&linalg::kron(&t.a, &t.b)))
            .collect();
        let rows = points[0].len() + 1;
        let size = rows.max(k);
        let mut m = DMatrix::<f64>::zeros(size, k);
        for (j, p) in points.iter().enumerate() {
            for (i, v) in p.iter().enumerate() {
                m[(i, j)] = *v;
            }
            m[(rows - 1, j)] = 1.0;
        }
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let smallest = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty");
        let mut mu: Vec<f64> = v_t.row(smallest).iter().copied().collect();
        if mu.iter().all(|x| *x <= 0.0) {
            mu.iter_mut().for_each(|x| *x = -*x);
        }
        let (drop, step) = mu
            .iter()
            .enumerate()
            .filter(|(_, x)| **x > 0.0)
            .map(|(i, x)| (i, branch[i].weight / x))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("a null vector summing to zero has a positive entry");
        for (t, x) in branch.iter_mut().zip(&mu) {
            t.weight = (t.weight - step * x).max(0.0);
        }
        branch.remove(drop);
    }
}

/// Pushes an ensemble through a step whose interaction is pinch invariant on `G`.
///
/// Each input term maps to at most `dim(G)` output terms, one per classical
/// value of the mediator. Terms sharing a mediator value and one quantum factor
/// are merged; a branch with more terms than the `A ⊗ B` state space needs is
/// pruned to an equivalent shorter convex combination.
pub fn ensemble_step(
    ensemble: &TriseparableEnsemble,
    step: &StepChannel,
) -> Result<TriseparableEnsemble> {
    if !is_g_classical(step.interaction())? {
        return Err(Error::NotGClassical { step: 0 });
    }
    let layout = ensemble.layout();
    if layout != &step.layout() {
        return Err(Error::LayoutMismatch(format!(
            "ensemble on {layout}, step on {}",
            step.layout()
        )));
    }
    let dims = layout.dims();
    let (da, dg, db) = (dims[0], dims[1], dims[2]);
    let interaction = step.interaction();
    let bystander = step.bystander();

    let mut branches: Vec<Vec<Branch>> = vec![Vec::new(); dg];
    for term in &ensemble.terms {
        match step.side() {
            Side::Left => {
                let rho = interaction.apply_matrix(&linalg::kron(term.a.matrix(), term.g.matrix()));
                let b = bystander.apply_matrix(term.b.matrix());
                for (g, branch) in branches.iter_mut().enumerate() {
                    let block = CMatrix::from_fn(da, da, |i, j| rho[(i * dg + g, j * dg + g)]);
                    let p = linalg::trace(&block).re;
                    if term.weight * p < tol::MERGE_WEIGHT {
                        continue;
                    }
                    let a = linalg::nearest_density(&block);
                    merge_into(branch, Branch { weight: term.weight * p, a, b: b.clone() });
                }
            }
            Side::Right => {
                let rho = interaction.apply_matrix(&linalg::kron(term.g.matrix(), term.b.matrix()));
                let a = bystander.apply_matrix(term.a.matrix());
                for (g, branch) in branches.iter_mut().enumerate() {
                    let block = CMatrix::from_fn(db, db, |i, j| rho[(g * db + i, g * db + j)]);
                    let p = linalg::trace(&block).re;
                    if term.weight * p < tol::MERGE_WEIGHT {
                        continue;
                    }
                    let b = linalg::nearest_density(&block);
                    merge_into(branch, Branch { weight: term.weight * p, a: a.clone(), b });
                }
            }
        }
    }

    let la = layout.restrict(&[0]);
    let lg = layout.restrict(&[1]);
    let lb = layout.restrict(&[2]);
    let mut terms = Vec::new();
    for (g, mut branch) in branches.into_iter().enumerate() {
        prune_branch(&mut branch);
        for t in branch {
            if t.weight < tol::MERGE_WEIGHT {
                continue;
            }
            terms.push(EnsembleTerm {
                weight: t.weight,
                a: DensityState::new_unchecked(la.clone(), t.a),
                g: DensityState::new_unchecked(lg.clone(), linalg::basis_projector(dg, g)),
                b: DensityState::new_unchecked(lb.clone(), t.b),
            });
        }
    }
    if terms.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let total: f64 = terms.iter().map(|t| t.weight).sum();
    for t in &mut terms {
        t.weight /= total;
    }
    Ok(TriseparableEnsemble {
        terms,
        layout: layout.clone(),
    })
}

/// One weighted product `λ · ω_A ⊗ ω_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub weight: f64,
    pub a: DensityState,
    pub b: DensityState,
}

/// Drops the mediator factor of every term: an explicit separable decomposition
/// of the `A–B` marginal.
pub fn reduced_separable_certificate(ensemble: &TriseparableEnsemble) -> Result<Vec<SeparableTerm>> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(ensemble
        .terms
        .iter()
        .map(|t| SeparableTerm {
            weight: t.weight,
            a: t.a.clone(),
            b: t.b.clone(),
        })
        .collect())
}

/// `Σ λᵢ ω_Aⁱ ⊗ ω_Bⁱ` on the `[A, B]` layout.
pub fn separable_reconstruct(terms: &[SeparableTerm]) -> Result<DensityState> {
    let first = terms.first().ok_or(Error::EmptyEnsemble)?;
    let layout = first.a.layout().concat(first.b.layout())?;
    let d = layout.total_dim();
    let mut acc = CMatrix::zeros(d, d);
    for t in terms {
        acc += linalg::kron(t.a.matrix(), t.b.matrix()) * c(t.weight, 0.0);
    }
    Ok(DensityState::new_unchecked(layout, acc))
}
