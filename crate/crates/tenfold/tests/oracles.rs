//! Values checked against routes that do not go through the module under test.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use tenfold::ensemble::{self, Constraints, ProjectionSampler};
use tenfold::grouprep::{self, equivariant_hom, isotypic_decompose, UnitaryRep};
use tenfold::matkit::{self, c, conj, fro, kron, CMatrix, Tolerance, ONE, ZERO};
use tenfold::nambu::{AntiunitarySpec, SymmetrySetup};
use tenfold::pipeline::{self, Status};
use tenfold::pool::{self, Group};
use tenfold::presets::{self, isig2, spin_rep};

fn setup_of(name: &str) -> SymmetrySetup {
    let p = presets::preset(name, None).unwrap();
    SymmetrySetup::new(p.rep, &p.antiunitaries).unwrap()
}

/// Rank of a family of matrices viewed as real vectors.
fn real_rank(ms: &[CMatrix]) -> usize {
    if ms.is_empty() {
        return 0;
    }
    let n = ms[0].len();
    let a = matkit::RMatrix::from_fn(2 * n, ms.len(), |i, k| if i < n { ms[k][i].re } else { ms[k][i - n].im });
    ms.len() - matkit::nullspace_real(&a, Tolerance::default()).len()
}

fn nambu_h(a: &CMatrix, b: &CMatrix) -> CMatrix {
    // [[a, b], [b†, -aᵗ]] with b skew
    let n = a.nrows();
    let mut h = matkit::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(b);
    h.view_mut((n, 0), (n, n)).copy_from(&b.adjoint());
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    h
}

fn unit(n: usize, i: usize, j: usize, z: matkit::C64) -> CMatrix {
    let mut m = matkit::zeros(n, n);
    m[(i, j)] = z;
    m
}

/// Hermitian a and skew b spanning all of so(W, b) ∩ i u(W) for dim V = n.
fn hand_basis_no_symmetry(n: usize) -> Vec<CMatrix> {
    let z = matkit::zeros(n, n);
    let mut out = Vec::new();
    for i in 0..n {
        out.push(nambu_h(&unit(n, i, i, ONE), &z));
        for j in i + 1..n {
            out.push(nambu_h(&(unit(n, i, j, ONE) + unit(n, j, i, ONE)), &z));
            out.push(nambu_h(&(unit(n, i, j, matkit::I) - unit(n, j, i, matkit::I)), &z));
            for ph in [ONE, matkit::I] {
                out.push(nambu_h(&z, &(unit(n, i, j, ph) - unit(n, j, i, ph))));
            }
        }
    }
    out
}

#[test]
fn no_symmetry_dim_v_2_matches_hand_count() {
    let setup = SymmetrySetup::new(UnitaryRep::trivial(2), &[]).unwrap();
    let oracle = ensemble::hamiltonian_space(&setup, Tolerance::default()).unwrap().dim();
    let hand = hand_basis_no_symmetry(2);
    let cons = Constraints::from_setup(&setup);
    assert!(hand.iter().all(|h| cons.residual(h) < 1e-12));
    assert_eq!(real_rank(&hand), 6);
    assert_eq!(oracle, 6);
}

#[test]
fn spin_half_two_orbitals_matches_hand_parametrization() {
    // a = I₂ ⊗ α (α Hermitian), b = iσ₂ ⊗ β (β complex symmetric)
    let setup = setup_of("class_C");
    let z = matkit::zeros(4, 4);
    let mut hand = Vec::new();
    for h in matkit::hermitian_basis(2) {
        hand.push(nambu_h(&kron(&matkit::eye(2), &h), &z));
    }
    for (i, j) in [(0, 0), (1, 1), (0, 1)] {
        for ph in [ONE, matkit::I] {
            let beta = if i == j { unit(2, i, i, ph) } else { unit(2, i, j, ph) + unit(2, j, i, ph) };
            hand.push(nambu_h(&z, &kron(&isig2(), &beta)));
        }
    }
    let cons = Constraints::from_setup(&setup);
    for h in &hand {
        assert!(cons.residual(h) < 1e-10, "hand element violates constraints");
    }
    assert_eq!(real_rank(&hand), 10);
    assert_eq!(ensemble::hamiltonian_space(&setup, Tolerance::default()).unwrap().dim(), 10);
}

#[test]
fn t_equals_c_leaves_nothing() {
    let setup = setup_of("class_point");
    assert_eq!(ensemble::hamiltonian_space(&setup, Tolerance::default()).unwrap().dim(), 0);
    let a = pipeline::verify_setup(&setup, 1, Tolerance::default()).unwrap();
    assert_eq!(a.status, Status::Pass);
    assert_eq!(a.blocks[0].descriptor.family.as_str(), "point");
}

#[test]
fn verify_examples() {
    for (name, dim) in [("class_D", 15), ("class_CI", 6)] {
        let a = pipeline::verify_setup(&setup_of(name), 1, Tolerance::default()).unwrap();
        assert_eq!(a.status, Status::Pass, "{name}");
        assert_eq!((a.total_dim, a.unsplit_oracle), (dim, Some(dim)), "{name}");
    }
    // a corrupted core is a precondition violation, not a FAIL
    let mut bad = presets::preset("class_CI", None).unwrap();
    bad.antiunitaries[0].core[(0, 0)] = c(0.3, 0.0);
    assert!(SymmetrySetup::new(bad.rep, &bad.antiunitaries).is_err());
}

#[test]
fn classify_examples() {
    let a = pipeline::classify_setup(&setup_of("class_AIII_dirac"), 1).unwrap();
    let d = &a.blocks[0].descriptor;
    assert_eq!((d.family.as_str(), d.params.clone(), d.dim_h), ("AIII", vec![2, 2], 8));
    let a = pipeline::classify_setup(&setup_of("class_D"), 1).unwrap();
    assert_eq!(a.blocks[0].descriptor.family.as_str(), "D");
}

#[test]
fn z3_charge_block_is_diagonal_with_empty_cross_hom() {
    let w = matkit::C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let rep = UnitaryRep::new(vec![matkit::eye(2) * w]).unwrap();
    let setup = SymmetrySetup::new(rep.clone(), &[]).unwrap();
    let a = pipeline::classify_setup(&setup, 1).unwrap();
    assert_eq!(a.blocks.len(), 1);
    let t = &a.blocks[0].transfer;
    assert_eq!(serde_json::to_value(t.e_kind).unwrap(), "diag");
    // oracle: no equivariant map from the character to its dual
    let one = UnitaryRep::new(vec![CMatrix::from_element(1, 1, w)]).unwrap();
    assert!(equivariant_hom(&one, &one.conjugate()).unwrap().is_empty());
    assert_eq!(a.blocks[0].descriptor.family.as_str(), "A");
}

#[test]
fn q8_plus_trivial_decomposes_into_two() {
    let q8 = UnitaryRep::new(vec![
        CMatrix::from_row_slice(2, 2, &[matkit::I, ZERO, ZERO, -matkit::I]),
        isig2(),
    ])
    .unwrap();
    let rep = q8.direct_sum(&UnitaryRep::new(vec![matkit::eye(1), matkit::eye(1)]).unwrap()).unwrap();
    let comps = isotypic_decompose(&rep, 5).unwrap();
    let mut dm: Vec<(usize, usize)> = comps.iter().map(|c| (c.irrep_dim, c.multiplicity)).collect();
    dm.sort();
    assert_eq!(dm, vec![(1, 1), (2, 1)]);
    // commutant oracle: 1 + 1
    assert_eq!(grouprep::commutant(&rep).len(), 2);
}

/// Mean gap ratio of iid exponential spacings, computed without the library.
fn poisson_reference(draws: usize, levels: usize, seed: u64) -> f64 {
    let mut r = matkit::rng(seed, 77);
    let (mut sum, mut k) = (0.0, 0usize);
    for _ in 0..draws {
        let s: Vec<f64> = (0..levels - 1).map(|_| r.sample::<f64, _>(Exp1)).collect();
        for w in s.windows(2) {
            sum += w[0].min(w[1]) / w[0].max(w[1]);
            k += 1;
        }
    }
    sum / k as f64
}

#[test]
fn poisson_surrogate_matches_monte_carlo() {
    let reference = poisson_reference(10_000, 20, 1);
    let mut r = matkit::rng(2, 0);
    let spectra: Vec<Vec<f64>> = (0..2000).map(|_| (0..20).map(|_| r.sample::<f64, _>(StandardNormal)).collect()).collect();
    let st = ensemble::gap_ratio_stats(&spectra, 50).unwrap();
    assert!((st.mean_r - reference).abs() < 0.01, "{} vs {}", st.mean_r, reference);
    assert!((reference - 0.386).abs() < 0.01);
}

#[test]
fn projection_equals_basis_projection() {
    for name in ["class_CI", "class_AIII_dwave", "class_BDI"] {
        let setup = setup_of(name);
        let space = ensemble::hamiltonian_space(&setup, Tolerance::default()).unwrap();
        let ps = ProjectionSampler::new(Constraints::from_setup(&setup)).unwrap();
        let x = ensemble::gaussian_hermitian(2 * setup.nambu.n, &mut matkit::rng(9, 0));
        let direct = space.basis.iter().fold(matkit::zeros(x.nrows(), x.ncols()), |acc, b| {
            acc + b * c((b.adjoint() * &x).trace().re, 0.0)
        });
        let projected = ps.project(&x).unwrap();
        assert!(fro(&(&direct - &projected)) < 1e-8, "{name}");
    }
}

/// The transferred square of a nonmixing T, computed on Hom_G(R, V) directly:
/// τ(S) = A S̄ β⁻¹ with β : conj(R) → R, and τ² = ±1.
fn brute_force_squares(setup: &SymmetrySetup) -> Vec<(usize, i8)> {
    let a = &setup.antiunitaries[0].core;
    let comps = isotypic_decompose(&setup.rep_v, 3).unwrap();
    comps
        .iter()
        .map(|comp| {
            let r = setup.rep_v.restrict(&comp.irrep_basis);
            let homs = equivariant_hom(&r, &setup.rep_v).unwrap();
            let beta = equivariant_hom(&r.conjugate(), &r).unwrap().remove(0);
            let beta = &beta / c(fro(&beta) / (r.dim as f64).sqrt(), 0.0);
            let beta_inv = beta.adjoint();
            let m = homs.len();
            let tau = CMatrix::from_fn(m, m, |j, k| (homs[j].adjoint() * a * conj(&homs[k]) * &beta_inv).trace());
            let sq = &tau * conj(&tau);
            let s = if fro(&(&sq - matkit::eye(m))) < 1e-6 {
                1
            } else if fro(&(&sq + matkit::eye(m))) < 1e-6 {
                -1
            } else {
                panic!("τ² is not ±1")
            };
            (comp.irrep_dim, s)
        })
        .collect()
}

#[test]
fn transfer_parity_matches_brute_force_reduction() {
    let mut checked = 0;
    // presets with self-conjugate irreps and one nonmixing T
    let mut setups = vec![setup_of("class_CI")];
    for p in pool::random_pool(120, 21, 8).unwrap() {
        let s = &p.setup;
        let nonabelian = [Group::Q8, Group::S3, Group::Su2].iter().any(|g| p.label.starts_with(&g.name()));
        if nonabelian && s.antiunitaries.len() == 1 && !s.antiunitaries[0].mixing {
            setups.push(p.setup);
        }
    }
    for s in &setups {
        let mut brute = brute_force_squares(s);
        let a = pipeline::classify_setup(s, 3).unwrap();
        let mut reported: Vec<(usize, i8)> = a
            .blocks
            .iter()
            .map(|b| (b.transfer.irrep_dim, b.transfer.antiunitaries[0].transferred_square))
            .collect();
        brute.sort();
        reported.sort();
        assert_eq!(brute, reported);
        for b in &a.blocks {
            let t = &b.transfer.antiunitaries[0];
            assert_eq!(t.transferred_square, t.original_square * t.beta_parity.unwrap());
        }
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} setups");
}

#[test]
fn spin_j_kind_matches_parity_of_2j() {
    for two_j in 0..4 {
        let k = grouprep::duality_class(&spin_rep(two_j)).unwrap().kind;
        let want = if two_j % 2 == 0 { grouprep::DualityKind::Real } else { grouprep::DualityKind::Quaternionic };
        assert_eq!(k, want, "2j = {two_j}");
    }
}

#[test]
fn with_t_squared_minus_one_spin_half_is_class_ci() {
    let s = setup_of("class_CI");
    let a = pipeline::classify_setup(&s, 1).unwrap();
    let t = &a.blocks[0].transfer;
    assert_eq!(t.b_parity, Some(-1));
    assert_eq!((t.antiunitaries[0].original_square, t.antiunitaries[0].transferred_square), (-1, 1));
    // a bare spin-1/2 T without SU(2) keeps its sign
    let bare = SymmetrySetup::new(
        UnitaryRep::trivial(2),
        &[AntiunitarySpec { name: "T".into(), mixing: false, core: isig2() }],
    )
    .unwrap();
    let a = pipeline::classify_setup(&bare, 1).unwrap();
    assert_eq!(a.blocks[0].transfer.antiunitaries[0].transferred_square, -1);
}
