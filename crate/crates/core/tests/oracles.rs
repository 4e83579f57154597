//! Checks against results computed by hand or by an independent route.

use approx::assert_abs_diff_eq;
use mediatrix::linalg::{self, c, max_abs_diff, CMatrix, C64};
use mediatrix::locc::{identity_locc, measure_and_correct, random_locc};
use mediatrix::random::{self, rng_from_seed};
use mediatrix::{
    bmv_scenario, compile_to_mediator, ensemble_reconstruct, locc_choi, negativity,
    simulate_locc, Cut, DensityState, EnsembleTerm, MediatorMode, Subsystem, SystemLayout,
    TriseparableEnsemble,
};

/// Three-qubit statevector, index `a·4 + g·2 + b`.
fn run_bmv_statevector() -> [C64; 8] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = [c(0.0, 0.0); 8];
    for a in 0..2 {
        for b in 0..2 {
            psi[a * 4 + b] = c(h * h, 0.0);
        }
    }
    let cnot_ag = |psi: [C64; 8]| {
        let mut out = [c(0.0, 0.0); 8];
        for (i, amp) in psi.iter().enumerate() {
            let (a, g, b) = (i >> 2, (i >> 1) & 1, i & 1);
            out[a * 4 + (g ^ a) * 2 + b] = *amp;
        }
        out
    };
    psi = cnot_ag(psi);
    for (i, amp) in psi.iter_mut().enumerate() {
        if (i >> 1) & 1 == 1 && i & 1 == 1 {
            *amp = -*amp;
        }
    }
    cnot_ag(psi)
}

#[test]
fn quantum_bmv_matches_statevector() {
    let psi = run_bmv_statevector();
    // the mediator returns to |0⟩, leaving a pure A–B state
    for (i, amp) in psi.iter().enumerate() {
        if (i >> 1) & 1 == 1 {
            assert!(amp.norm() < 1e-15);
        }
    }
    let (p00, p01, p10, p11) = (psi[0], psi[1], psi[4], psi[5]);
    // pure two-qubit negativity is |ad − bc|
    let oracle = (p00 * p11 - p01 * p10).norm();
    assert_abs_diff_eq!(oracle, 0.5, epsilon = 1e-15);

    let traj = bmv_scenario(MediatorMode::Quantum).run().unwrap();
    let fin = traj.final_record();
    assert_abs_diff_eq!(fin.negativity_ab, oracle, epsilon = 1e-9);

    let layout = fin.state.layout().clone();
    let expected = DensityState::pure(layout, &psi).unwrap();
    assert!(max_abs_diff(fin.state.matrix(), expected.matrix()) <= 1e-12);
}

#[test]
fn classical_bmv_marginal_is_a_dephased_mixture() {
    let traj = bmv_scenario(MediatorMode::Classical).run().unwrap();
    let fin = traj.final_record();
    assert!(fin.negativity_ab.abs() <= 1e-10);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // ½ Σ_a |a⟩⟨a| ⊗ Z^a |+⟩⟨+| Z^a
    let mut expected = CMatrix::zeros(4, 4);
    for a in 0..2 {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        let b = linalg::projector(&[c(h, 0.0), c(sign * h, 0.0)]);
        expected += linalg::kron(&linalg::basis_projector(2, a), &b) * c(0.5, 0.0);
    }
    assert!(max_abs_diff(fin.marginal_ab.matrix(), &expected) <= 1e-12);
    assert!(traj.max_certificate_residual().unwrap() <= 1e-12);
}

#[test]
fn measure_and_correct_branch_sum() {
    let layout = SystemLayout::new(vec![Subsystem::quantum("A", 2), Subsystem::quantum("B", 2)]).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DensityState::pure(layout, &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap();
    let out = simulate_locc(&measure_and_correct(), &bell).unwrap();
    // outcome 0 leaves |00⟩, outcome 1 leaves |11⟩ and X flips B back to |10⟩
    let expected = (linalg::basis_projector(4, 0) + linalg::basis_projector(4, 2)) * c(0.5, 0.0);
    assert!(max_abs_diff(out.matrix(), &expected) <= 1e-15);
    assert!(negativity(&out, &Cut::a_b()).unwrap() <= 1e-12);
}

/// Rebuilds the Choi matrix from the action on a Hermitian spanning set:
/// `|i⟩⟨i|`, `(|i⟩+|j⟩)(⟨i|+⟨j|)` and `(|i⟩+i|j⟩)(⟨i|−i⟨j|)`.
fn choi_by_spanning_set(apply: impl Fn(&CMatrix) -> CMatrix, d: usize) -> CMatrix {
    let unit = |i: usize, j: usize| {
        let mut m = CMatrix::zeros(d, d);
        m[(i, j)] = c(1.0, 0.0);
        m
    };
    let diag: Vec<CMatrix> = (0..d).map(|i| apply(&unit(i, i))).collect();
    let mut choi = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let image = if i == j {
                diag[i].clone()
            } else {
                let re = apply(&(unit(i, i) + unit(j, j) + unit(i, j) + unit(j, i)));
                let im = apply(&(unit(i, i) + unit(j, j) + unit(i, j) * c(0.0, -1.0) + unit(j, i) * c(0.0, 1.0)));
                // |i⟩⟨j| = ½[re − diag_i − diag_j] + i·½[im − diag_i − diag_j]
                let base = &diag[i] + &diag[j];
                (&re - &base) * c(0.5, 0.0) + (&im - &base) * c(0.0, 0.5)
            };
            choi.view_mut((i * d, j * d), (d, d)).copy_from(&image);
        }
    }
    choi
}

#[test]
fn locc_choi_matches_spanning_set_reconstruction() {
    for p in [measure_and_correct(), random_locc(11, 2, 2, 2, 2).unwrap()] {
        let direct = locc_choi(&p).unwrap();
        let rebuilt = choi_by_spanning_set(|x| p.apply_matrix(x).unwrap(), 4);
        assert!(max_abs_diff(&direct, &rebuilt) <= 1e-10);
        assert_abs_diff_eq!(linalg::trace(&direct).re, 4.0, epsilon = 1e-10);
        assert!(linalg::min_eigenvalue(&direct) >= -1e-10);
    }
}

#[test]
fn identity_protocol_has_maximally_entangled_choi() {
    let p = identity_locc(2, 2, 2, 2).unwrap();
    let choi = locc_choi(&p).unwrap();
    let mut omega = vec![c(0.0, 0.0); 16];
    for i in 0..4 {
        omega[i * 4 + i] = c(1.0, 0.0);
    }
    assert!(max_abs_diff(&choi, &linalg::projector(&omega)) <= 1e-12);
}

#[test]
fn one_round_protocol_compiles_to_one_step() {
    let p = mediatrix::LoccProtocol::new(
        2,
        2,
        2,
        vec![mediatrix::Round::unconditional(
            mediatrix::Party::A,
            mediatrix::Instrument::basis_measurement(2),
            &[vec![]],
        )],
    )
    .unwrap();
    let compiled = compile_to_mediator(&p, 729).unwrap();
    assert_eq!(compiled.steps().len(), 1);
    assert_eq!(compiled.layout().dims(), vec![2, 2, 2]);
    assert_eq!(compile_to_mediator(&measure_and_correct(), 729).unwrap().steps().len(), 2);
}

#[test]
fn compiled_random_protocols_stay_separable_on_products() {
    for seed in 0..5u64 {
        let p = random_locc(seed, 2, 2, 2, 2).unwrap();
        let compiled = compile_to_mediator(&p, 729).unwrap();
        let mut rng = rng_from_seed(1000 + seed);
        let layout = compiled.layout().clone();
        let a = random::random_density(&mut rng, &layout.restrict(&[0]));
        let b = random::random_density(&mut rng, &layout.restrict(&[2]));
        let g = compiled.initial_mediator().unwrap();
        let traj = compiled.with_initial(a, g, b).unwrap().run().unwrap();
        assert!(traj.max_negativity_ab() <= 1e-9);
    }
}

#[test]
fn ensemble_reconstruction_is_order_independent() {
    let layout = SystemLayout::tripartite(2, 3, 2, true).unwrap();
    let mut rng = rng_from_seed(42);
    let weights = random::random_distribution(&mut rng, 5);
    let terms: Vec<EnsembleTerm> = (0..5)
        .map(|i| EnsembleTerm {
            weight: weights.probabilities()[i],
            a: random::random_density(&mut rng, &layout.restrict(&[0])),
            g: DensityState::basis(layout.subsystems()[1].clone(), i % 3).unwrap(),
            b: random::random_density(&mut rng, &layout.restrict(&[2])),
        })
        .collect();
    let ensemble = TriseparableEnsemble::new(terms.clone()).unwrap();
    let forward = ensemble_reconstruct(&ensemble).unwrap();

    // backwards, grouping A ⊗ (G ⊗ B) instead of (A ⊗ G) ⊗ B
    let mut backward = CMatrix::zeros(12, 12);
    for t in terms.iter().rev() {
        let gb = linalg::kron(t.g.matrix(), t.b.matrix());
        backward += linalg::kron(t.a.matrix(), &gb) * c(t.weight, 0.0);
    }
    assert!(max_abs_diff(forward.matrix(), &backward) <= 1e-12);
    assert!(ensemble.residual(&forward) <= 1e-15);
}

#[test]
fn dual_pairing_holds_on_random_pairs() {
    let layout = SystemLayout::tripartite(2, 2, 1, true).unwrap().restrict(&[0, 1]);
    let t = mediatrix::random_channel(3, &layout, 3).unwrap();
    let dual = t.dual();
    assert!(dual.unitality_deviation() <= 1e-10);
    let mut rng = rng_from_seed(4);
    for _ in 0..20 {
        let g = random::ginibre(&mut rng, 4, 4);
        let obs = &g + g.adjoint();
        let rho = random::random_density(&mut rng, &layout);
        let lhs = linalg::trace(&(&obs * t.apply_matrix(rho.matrix())));
        let rhs = linalg::trace(&(dual.apply(&obs) * rho.matrix()));
        assert!((lhs - rhs).norm() <= 1e-10);
    }
}
