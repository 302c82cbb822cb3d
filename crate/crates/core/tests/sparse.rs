//! Sparse-family batteries: packing certificates, the covering and
//! interpolation lemmas, oscillation augmentation, and testing constants.

mod common;

use std::sync::Arc;

use bloomlab_core::sparse::{
    augment_oscillation, cov_check, coveq_check, fh_check, fs_check, lambda_form,
    lemma_two_check, sparse_form_b, sparse_form_b_dual, testing_constants, verify_sparseness,
    CoefficientMap, SparseFamily,
};
use bloomlab_core::weights::Weight;
use bloomlab_core::{Ext, FormParams, Mesh, StepFunction};

#[test]
fn packing_certificates_on_known_families() {
    let mesh = Arc::new(Mesh::uniform(1, 4).unwrap());
    // disjoint cubes: perfectly sparse, unit packing
    let kids = mesh.children_of(mesh.root_id()).to_vec();
    let anti = SparseFamily::from_ids(&mesh, kids).unwrap();
    let s = verify_sparseness(&anti);
    assert_eq!(s.eta, 1.0);
    assert_eq!(s.carleson, 1.0);

    // full tree of depth d: packing is exactly d+1 (dyadic sums are exact)
    let full = SparseFamily::from_ids(&mesh, mesh.ids().collect()).unwrap();
    let s = verify_sparseness(&full);
    assert_eq!(s.carleson, 5.0);
    assert_eq!(s.eta, 0.0);

    // stopping families are 1/2-sparse by construction
    for seed in 0..20 {
        let mut rng = common::rng(500 + seed);
        let fam = common::stopping_family(&mesh, &mut rng);
        let s = verify_sparseness(&fam);
        assert!(s.eta >= 0.5 - 1e-15, "eta {}", s.eta);
        assert!(s.carleson <= 2.0 + 1e-12, "carleson {}", s.carleson);
    }
}

#[test]
fn covering_equivalence_is_exact_at_p1() {
    for mesh in [
        Arc::new(Mesh::uniform(1, 5).unwrap()),
        Arc::new(Mesh::graded(5, 4).unwrap()),
    ] {
        for seed in 0..25 {
            let mut rng = common::rng(seed);
            let coeffs = common::coefficient_tree(&mesh, &mut rng, 0.3);
            let w = common::weight(&mesh, &mut rng, 1.0);
            let rep = cov_check(&coeffs, &w, 1.0).unwrap();
            assert!((rep.ratio - 1.0).abs() <= 1e-12, "ratio {}", rep.ratio);
            for p in [1.5, 2.0, 3.0] {
                let rep = cov_check(&coeffs, &w, p).unwrap();
                assert!(rep.lhs > 0.0 && rep.rhs > 0.0 && rep.ratio.is_finite());
            }
        }
    }
}

#[test]
fn pointwise_covering_slack_is_one_sided() {
    let mesh = Arc::new(Mesh::uniform(1, 5).unwrap());
    for seed in 0..50 {
        let mut rng = common::rng(100 + seed);
        let coeffs = common::coefficient_tree(&mesh, &mut rng, 0.25);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let rep = coveq_check(&coeffs, p).unwrap();
            assert!(
                rep.min_slack >= -1e-12 * rep.scale.max(1.0),
                "p={p} slack={} scale={}",
                rep.min_slack,
                rep.scale
            );
            if p == 1.0 {
                assert!(rep.min_slack.abs() <= 1e-12 * rep.scale.max(1.0));
            }
        }
    }
}

#[test]
fn packing_functional_matches_carleson_at_unit_exponents() {
    let mesh = Arc::new(Mesh::uniform(1, 6).unwrap());
    let one = Weight::constant(&mesh, 1.0).unwrap();
    let root = mesh.cube(mesh.root_id()).clone();
    for seed in 0..10 {
        let mut rng = common::rng(300 + seed);
        let fam = common::stopping_family(&mesh, &mut rng);
        let ratio = fh_check(&fam, &root, &one, &one, 1.0, 0.0, 0.0).unwrap();
        let s = verify_sparseness(&fam);
        // Σ_{Q⊆root}|Q|/|root| is the packing sum at the root
        assert!(ratio <= s.carleson + 1e-12);
        assert!(ratio >= 1.0 - 1e-15);

        // weighted variants stay finite and positive under the hypotheses
        let sigma = common::weight(&mesh, &mut rng, 1.0);
        let w = common::weight(&mesh, &mut rng, 1.0);
        for (a, b, g) in [(0.5, 0.25, 0.25), (0.7, 0.3, 0.0), (1.0, 0.5, 0.5)] {
            let r = fh_check(&fam, &root, &sigma, &w, a, b, g).unwrap();
            assert!(r.is_finite() && r > 0.0);
        }
        assert!(fh_check(&fam, &root, &sigma, &w, 0.0, 0.5, 0.5).is_err());
        assert!(fh_check(&fam, &root, &sigma, &w, 0.3, 0.3, 0.3).is_err());
    }
}

#[test]
fn fs_ratio_is_finite_and_deterministic() {
    let mesh = Arc::new(Mesh::uniform(1, 6).unwrap());
    let mut rng = common::rng(77);
    let fam = common::stopping_family(&mesh, &mut rng);
    let f = common::positive_step(&mesh, &mut rng, 1.0);
    let w = common::weight(&mesh, &mut rng, 1.0);
    let (l1, r1) = fs_check(&fam, &f, &w, 2.0, 0.5).unwrap();
    let (l2, r2) = fs_check(&fam, &f, &w, 2.0, 0.5).unwrap();
    assert!(l1 > 0.0 && r1 > 0.0);
    assert_eq!((l1, r1), (l2, r2));
    // stronger maximal weight on the right can only help
    let (_, r_small) = fs_check(&fam, &f, &w, 2.0, 0.25).unwrap();
    assert!(r_small.is_finite());
}

#[test]
fn interpolation_lemma_battery() {
    let mesh = Arc::new(Mesh::uniform(1, 5).unwrap());
    let root = mesh.cube(mesh.root_id()).clone();
    let mut worst = f64::INFINITY;
    for seed in 0..200 {
        let mut rng = common::rng(2000 + seed);
        let b = common::signed_step(&mesh, &mut rng);
        let f = common::positive_step(&mesh, &mut rng, 0.8);
        let g = common::positive_step(&mesh, &mut rng, 0.8);
        for m in 1..=4 {
            for (r, t) in [(1.0, 1.0), (1.5, 2.0), (2.0, 1.0)] {
                let (c, slack) = lemma_two_check(&b, &f, &g, &root, r, t, m).unwrap();
                let scale = c[0] + c[m as usize];
                assert!(
                    slack >= -1e-12 * scale.max(1.0),
                    "m={m} r={r} t={t} slack={slack}"
                );
                worst = worst.min(slack / scale.max(1.0));
            }
        }
    }
    assert!(worst.is_finite());
}

#[test]
fn oscillation_augmentation_certificate_recomputes() {
    let mesh = Arc::new(Mesh::uniform(1, 6).unwrap());
    let mut rng = common::rng(31);
    let b = common::signed_step(&mesh, &mut rng);
    let seedfam = SparseFamily::root_only(&mesh);
    let (aug, c) = augment_oscillation(&seedfam, &b).unwrap();
    assert!(aug.ids().contains(&mesh.root_id()));
    assert!(c.is_finite() && c > 0.0);
    // 1/2-sparse: each stopping generation loses at least half the measure
    assert!(verify_sparseness(&aug).eta >= 0.5 - 1e-15);

    // independent cellwise re-check of the pointwise bound on the root
    let root = mesh.root_id();
    let mean = b.mean(root);
    let mut rhs = vec![0.0f64; mesh.ncells()];
    for &q in aug.ids() {
        let dev = {
            let mq = b.mean(q);
            let mut acc = 0.0;
            mesh.for_each_cell(q, |cc| {
                acc += (b.value(cc) - mq).abs() * mesh.cell_measure(cc);
            });
            acc / mesh.measure(q)
        };
        mesh.for_each_cell(q, |cc| rhs[cc as usize] += dev);
    }
    let mut measured: f64 = 0.0;
    for cell in 0..mesh.ncells() as u32 {
        let lhs = (b.value(cell) - mean).abs();
        if rhs[cell as usize] > 0.0 {
            measured = measured.max(lhs / rhs[cell as usize]);
        }
    }
    assert!((measured - c).abs() <= 1e-12 * c.max(1.0));
}

#[test]
fn forms_are_monotone_and_dual_consistent() {
    let mesh = Arc::new(Mesh::uniform(1, 5).unwrap());
    let mut rng = common::rng(53);
    let b = common::signed_step(&mesh, &mut rng);
    let f = common::positive_step(&mesh, &mut rng, 0.8);
    let g = common::positive_step(&mesh, &mut rng, 0.8);
    let fam = common::stopping_family(&mesh, &mut rng);
    let sub = SparseFamily::from_ids(&mesh, fam.ids()[..fam.len() / 2].to_vec()).unwrap();
    let params = FormParams::new(1.0, Ext::Inf, 2.0, 2.0, 2).unwrap();
    let full = sparse_form_b(&fam, &b, &f, &g, &params).unwrap();
    let part = sparse_form_b(&sub, &b, &f, &g, &params).unwrap();
    assert!(part <= full + 1e-15);
    // with r = s' (both 1 here) the dual form is the plain form with the
    // roles of f and g swapped: both reduce to Σ ⟨|f|⟩₁⟨|b-⟨b⟩|^m g⟩₁ |Q|
    let dual = sparse_form_b_dual(&fam, &b, &f, &g, &params).unwrap();
    let swapped = sparse_form_b(&fam, &b, &g, &f, &params).unwrap();
    assert!((dual - swapped).abs() <= 1e-12 * swapped.max(1.0));
    assert!(full > 0.0);
}

#[test]
fn testing_single_cell_is_analytic() {
    // On a one-cell mesh with r=1 the ascent is exact in one step:
    // N = (w σ)^{-1/2} for p = q = 2, s = ∞, λ_root = 1.
    let mesh = Arc::new(Mesh::uniform(1, 0).unwrap());
    for (wv, sv) in [(1.0, 1.0), (2.0, 0.5), (5.0, 3.0)] {
        let w = Weight::constant(&mesh, wv).unwrap();
        let sigma = Weight::constant(&mesh, sv).unwrap();
        let fam = SparseFamily::root_only(&mesh);
        let coeffs = CoefficientMap::from_pairs(&mesh, vec![(mesh.root_id(), 1.0)]).unwrap();
        let start = (
            StepFunction::constant(&mesh, 1.0),
            StepFunction::constant(&mesh, 1.0),
        );
        let rep = testing_constants(
            &fam,
            &w,
            &sigma,
            &coeffs,
            2.0,
            2.0,
            1.0,
            Ext::Inf,
            &[start],
        )
        .unwrap();
        let expect = (wv * sv).powf(-0.5);
        assert!(
            (rep.n_lower - expect).abs() <= 1e-10 * expect,
            "got {} want {expect}",
            rep.n_lower
        );
        assert!(rep.test1.is_finite() && rep.test2.is_finite());
    }
}

#[test]
fn testing_ascent_dominates_its_start_and_is_deterministic() {
    let mesh = Arc::new(Mesh::uniform(1, 4).unwrap());
    for seed in 0..10 {
        let mut rng = common::rng(600 + seed);
        let fam = common::stopping_family(&mesh, &mut rng);
        let coeffs = CoefficientMap::on_family(&fam, |_| 1.0).unwrap();
        let w = common::weight(&mesh, &mut rng, 1.0);
        let sigma = common::weight(&mesh, &mut rng, 1.0);
        let f0 = common::positive_step(&mesh, &mut rng, 0.7);
        let g0 = common::positive_step(&mesh, &mut rng, 0.7);
        let (p, q, r, sx) = (2.0, 2.0, 1.0, Ext::Inf);

        let start_ratio = {
            let num = lambda_form(&coeffs, &f0, &g0, r, sx).unwrap();
            let den = bloomlab_core::weights::lp_norm(&f0, &w, Ext::Finite(p)).unwrap()
                * bloomlab_core::weights::lp_norm(&g0, &sigma, Ext::Finite(2.0)).unwrap();
            num / den
        };
        let rep1 = testing_constants(
            &fam,
            &w,
            &sigma,
            &coeffs,
            p,
            q,
            r,
            sx,
            &[(f0.clone(), g0.clone())],
        )
        .unwrap();
        let rep2 = testing_constants(&fam, &w, &sigma, &coeffs, p, q, r, sx, &[(f0, g0)]).unwrap();
        assert!(rep1.n_lower >= start_ratio - 1e-12 * start_ratio);
        assert_eq!(rep1.n_lower, rep2.n_lower);
        assert_eq!(rep1.test1, rep2.test1);
        assert_eq!(rep1.test2, rep2.test2);
    }
}
