use num_complex::Complex64 as C64;
use proptest::prelude::*;

use nonclassical::bases::{classical_state, seesaw_product_max_with, ClassicalParams, LambdaSolver};
use nonclassical::multipartite::{classify_three_qubit, three_tangle, ClassLabel};
use nonclassical::potential::{apply_cd, cd_conversion_check, schmidt_number, BeamSplitter, COUNT_TOL};
use nonclassical::random::{random_hermitian, random_pure_state, random_unitary, random_weights, seeded};
use nonclassical::state::coherent_state;
use nonclassical::witness::{build_witness, witness_expectation};
use nonclassical::{
    lambda_max, CMatrix, CVector, ClassicalFamily, DensityMatrix, Operator, PureState, QuantumState, Spin, State,
    TruncationConfig,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn families() -> Vec<ClassicalFamily> {
    vec![
        ClassicalFamily::discrete(4),
        ClassicalFamily::su2(Spin::from_two_j(2)),
        // small disc so the optimum stays inside the truncation
        ClassicalFamily::CanonicalCoherent { n_max: 30, tail_tol: 1e-8, radius: 2.5 },
    ]
}

fn solve(fam: &ClassicalFamily, m: &Operator) -> f64 {
    LambdaSolver::numeric().solve(fam, m).unwrap().value
}

fn psd_part(m: &Operator) -> Operator {
    Operator::new(m.entries() * m.entries().adjoint()).unwrap()
}

// tolerance of the numeric search plus slack for the sum of two searches
fn tol(fam: &ClassicalFamily, m: &Operator) -> f64 {
    match fam {
        ClassicalFamily::OrthonormalDiscrete { .. } => 1e-12,
        _ => 1e-6 * (1.0 + m.norm()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lambda_is_covariant_under_scale_and_shift(seed in any::<u64>(), a in 0.1f64..3.0, b in -2.0f64..2.0, which in 0usize..3) {
        let fam = &families()[which];
        let m = random_hermitian(fam.dim(), &mut seeded(seed));
        let lm = solve(fam, &m);
        let moved = solve(fam, &m.scale(a).shift(b));
        prop_assert!((moved - (a * lm + b)).abs() <= a * tol(fam, &m) + 1e-12, "{moved} vs {}", a * lm + b);
    }

    #[test]
    fn lambda_is_monotone(seed in any::<u64>(), which in 0usize..3) {
        let fam = &families()[which];
        let mut rng = seeded(seed);
        let m = random_hermitian(fam.dim(), &mut rng);
        let p = psd_part(&random_hermitian(fam.dim(), &mut rng));
        let bigger = Operator::hermitian(m.entries() + p.entries()).unwrap();
        prop_assert!(solve(fam, &bigger) >= solve(fam, &m) - tol(fam, &bigger));
    }

    #[test]
    fn lambda_is_convex(seed in any::<u64>(), t in 0.0f64..1.0, which in 0usize..3) {
        let fam = &families()[which];
        let mut rng = seeded(seed);
        let m1 = random_hermitian(fam.dim(), &mut rng);
        let m2 = random_hermitian(fam.dim(), &mut rng);
        let mix = Operator::hermitian(m1.entries() * c(t) + m2.entries() * c(1.0 - t)).unwrap();
        let bound = t * solve(fam, &m1) + (1.0 - t) * solve(fam, &m2);
        prop_assert!(solve(fam, &mix) <= bound + tol(fam, &mix));
    }

    #[test]
    fn numeric_lambda_dominates_every_classical_state(seed in any::<u64>(), x in -1.5f64..1.5, y in -1.5f64..1.5, th in 0.0f64..3.14, ph in 0.0f64..6.28) {
        let fams = families();
        let mut rng = seeded(seed);
        let points = [
            ClassicalParams::Index(seed as usize % 4),
            ClassicalParams::Angles { theta: th, phi: ph },
            ClassicalParams::Alpha(C64::new(x, y) * 0.8),
        ];
        for (fam, p) in fams.iter().zip(points.iter()) {
            let m = random_hermitian(fam.dim(), &mut rng);
            let lam = lambda_max(fam, &m).unwrap();
            let v = classical_state(fam, p).unwrap().expectation(&m).unwrap();
            prop_assert!(v <= lam.value + lam.certified_tolerance + 1e-9);
        }
    }

    // witnesses from the discrete family never flag Fock-diagonal mixtures
    #[test]
    fn witness_is_nonnegative_on_classical_mixtures(seed in any::<u64>(), d in 2usize..7, k in 1usize..6) {
        let mut rng = seeded(seed);
        let m = random_hermitian(d, &mut rng);
        let w = build_witness(&m, &ClassicalFamily::discrete(d)).unwrap();
        let states: Vec<PureState> = (0..k).map(|i| PureState::basis(&[d], &[(seed as usize + 3 * i) % d]).unwrap()).collect();
        let rho = DensityMatrix::mixture(&random_weights(k, &mut rng), &states).unwrap();
        prop_assert!(witness_expectation(&w, &rho).unwrap().expectation >= -1e-9);
    }

    #[test]
    fn conversion_holds_for_sparse_inputs(seed in any::<u64>(), d in 2usize..7, mask in 1u32..64) {
        let mask = mask & ((1 << d) - 1);
        prop_assume!(mask != 0);
        let base = random_pure_state(&[d], &mut seeded(seed));
        let v = CVector::from_fn(d, |k, _| if mask >> k & 1 == 1 { base.amplitudes()[k] } else { c(0.0) });
        let psi = PureState::normalized(vec![d], v).unwrap();
        let rep = cd_conversion_check(&State::Pure(psi)).unwrap();
        prop_assert!(rep.holds);
        prop_assert_eq!(rep.schmidt_number, mask.count_ones() as usize);
    }

    // depolarised inputs keep their support count through the gate
    #[test]
    fn conversion_holds_for_mixed_inputs(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = seeded(seed);
        let psi = random_pure_state(&[d], &mut rng);
        let other = random_pure_state(&[d], &mut rng);
        let rho = DensityMatrix::mixture(&[0.7, 0.3], &[psi, other]).unwrap();
        prop_assert!(cd_conversion_check(&State::Mixed(rho)).unwrap().holds);
    }

    #[test]
    fn cd_maps_basis_inputs_to_products(d in 2usize..7, i in 0usize..7, j in 0usize..7) {
        let (i, j) = (i % d, j % d);
        let out = apply_cd(&PureState::basis(&[d, d], &[i, j]).unwrap(), 0, 1).unwrap();
        prop_assert_eq!(schmidt_number(&out, [d, d], COUNT_TOL).unwrap(), 1);
        prop_assert!((out.amplitude(&[i, (i + j) % d]).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tangle_is_local_unitary_invariant(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let psi = random_pure_state(&[2, 2, 2], &mut rng);
        let u = random_unitary(2, &mut rng).kronecker(&random_unitary(2, &mut rng)).kronecker(&random_unitary(2, &mut rng));
        let moved = PureState::new(vec![2, 2, 2], &u * psi.amplitudes()).unwrap();
        prop_assert!((three_tangle(&moved).unwrap() - three_tangle(&psi).unwrap()).abs() < 1e-12);
    }

    // tau(A x B x C psi) = |det A det B det C|^2 tau(psi) / |A x B x C psi|^4
    #[test]
    fn tangle_transforms_under_slocc(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let psi = random_pure_state(&[2, 2, 2], &mut rng);
        let mut ops: Vec<CMatrix> = Vec::new();
        while ops.len() < 3 {
            let m = random_unitary(2, &mut rng) * CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(0.1 + 0.9 * rand::Rng::random::<f64>(&mut rng))])) * random_unitary(2, &mut rng);
            let s = m.singular_values();
            if s.max() / s.min() <= 10.0 {
                ops.push(m);
            }
        }
        let a = ops[0].kronecker(&ops[1]).kronecker(&ops[2]);
        let raw = &a * psi.amplitudes();
        let n2 = raw.norm_squared();
        let moved = PureState::normalized(vec![2, 2, 2], raw).unwrap();
        let dets: f64 = ops.iter().map(|m| m.determinant().norm_sqr()).product();
        let want = dets * three_tangle(&psi).unwrap() / (n2 * n2);
        prop_assert!((three_tangle(&moved).unwrap() - want).abs() < 1e-9 * (1.0 + want));
        let before = classify_three_qubit(&psi).unwrap().label;
        prop_assert_eq!(classify_three_qubit(&moved).unwrap().label, before);
        prop_assert_eq!(before, ClassLabel::Ghz);
    }

    #[test]
    fn beam_splitter_maps_coherent_products(ar in -1.0f64..1.0, ai in -1.0f64..1.0, br in -1.0f64..1.0, bi in -1.0f64..1.0) {
        let (alpha, beta) = (C64::new(ar, ai), C64::new(br, bi));
        prop_assume!(alpha.norm() <= 1.5 && beta.norm() <= 1.5);
        let t = TruncationConfig::new(40, 1e-10).unwrap();
        let bs = BeamSplitter::new(t).unwrap();
        let coh = |z: C64| coherent_state(z, &t).unwrap().state;
        let out = bs.apply(&coh(alpha), &coh(beta)).unwrap();
        let s = 2f64.sqrt();
        let want = coh((alpha - beta) / s).tensor(&coh((alpha + beta) / s));
        prop_assert!(out.fidelity(&want).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn seesaw_matches_product_of_top_eigenvectors_on_products(seed in any::<u64>()) {
        // for M = A x B with A, B PSD, the product optimum is lambda_max(A) lambda_max(B)
        let mut rng = seeded(seed);
        let a = psd_part(&random_hermitian(2, &mut rng));
        let b = psd_part(&random_hermitian(3, &mut rng));
        let top = |m: &Operator| m.entries().clone().symmetric_eigen().eigenvalues.max();
        let r = seesaw_product_max_with(&a.kron(&b), [2, 3], 5, seed).unwrap();
        prop_assert!((r.value - top(&a) * top(&b)).abs() < 1e-9 * (1.0 + r.value));
    }

    #[test]
    fn state_json_round_trips_exactly(seed in any::<u64>(), d1 in 1usize..5, d2 in 1usize..5, mixed in any::<bool>()) {
        let mut rng = seeded(seed);
        let state = if mixed {
            State::Mixed(nonclassical::random::random_density(&[d1, d2], 2, &mut rng))
        } else {
            State::Pure(random_pure_state(&[d1, d2], &mut rng))
        };
        let text = nonclassical::io::state_to_json(&state).unwrap();
        prop_assert_eq!(nonclassical::io::parse_state(&text).unwrap(), state);
    }
}
