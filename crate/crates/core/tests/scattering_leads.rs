mod common;

use std::sync::Arc;

use billiard_core::cavity::{solve_profile, BasisSpec};
use billiard_core::geometry::{apply_surface_disorder, make_darmstadt, DarmstadtParams};
use billiard_core::leads::{channel_space, overlaps, r_matrix, Side};
use billiard_core::quadrature::composite_gauss_legendre;
use billiard_core::scattering::{conductance, s_from_r, Scatterer};
use faer::{c64, Mat};
use proptest::prelude::*;

fn darmstadt_solution(basis: BasisSpec) -> Arc<billiard_core::cavity::CavitySolution> {
    let p = make_darmstadt(DarmstadtParams::default(), 4096).unwrap();
    Arc::new(solve_profile(&p, &basis).unwrap())
}

#[test]
fn overlaps_match_transverse_quadrature() {
    let sol = darmstadt_solution(BasisSpec::new(30, 12, 60).unwrap());
    let table = overlaps(&sol, 6).unwrap();
    let p = sol.profile();
    let w = p.lead_width();
    let breaks: Vec<f64> = (0..=2000).map(|i| i as f64 / 2000.0).collect();
    let (t, tw) = composite_gauss_legendre(4, &breaks);
    for (side, x) in [(Side::Left, 0.0), (Side::Right, p.length())] {
        let q = p.at(x).q;
        let pts: Vec<(f64, f64)> = t.iter().map(|&t| (x, q + t * w)).collect();
        for j in 0..20 {
            let psi = sol.eval_wavefunction(j, &pts).unwrap();
            for n in 1..=6 {
                let chi = |t: f64| (2.0 / w).sqrt() * (n as f64 * std::f64::consts::PI * t).sin();
                let oracle: f64 = psi
                    .iter()
                    .zip(&t)
                    .zip(&tw)
                    .map(|((s, t), wt)| wt * w * s * chi(*t))
                    .sum();
                let got = table.get(j, side, n);
                assert!(
                    (got - oracle).abs() < 1e-10,
                    "j={j} n={n}: {got} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn symmetric_cavity_has_mirror_overlaps() {
    let sol = darmstadt_solution(BasisSpec::new(30, 12, 80).unwrap());
    let table = overlaps(&sol, 6).unwrap();
    for j in 0..80 {
        let parity = (0..sol.basis().m_max)
            .map(|m| sol.coefficient(j, m, 1).abs())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(m, _)| if m % 2 == 0 { 1.0 } else { -1.0 })
            .unwrap();
        for n in 1..=6 {
            let (l, r) = (table.get(j, Side::Left, n), table.get(j, Side::Right, n));
            assert!(
                (r - parity * l).abs() < 1e-9 * (1.0 + l.abs()),
                "j={j} n={n}: {l} {r}"
            );
        }
    }
}

#[test]
fn overlap_table_is_reproducible_and_sum_rule_grows() {
    let small = darmstadt_solution(BasisSpec::new(30, 12, 100).unwrap());
    let big = darmstadt_solution(BasisSpec::new(30, 12, 200).unwrap());
    let a = overlaps(&small, 4).unwrap();
    let b = overlaps(&small, 4).unwrap();
    assert_eq!(a.values(), b.values());
    let c = overlaps(&big, 4).unwrap();
    for n in 1..=4 {
        for side in [Side::Left, Side::Right] {
            let (s, l) = (a.strength(side, n), c.strength(side, n));
            assert!(s.is_finite() && l > s, "n={n}: {s} -> {l}");
        }
    }
}

#[test]
fn r_eigenvalue_changes_sign_across_a_pole() {
    let sol = darmstadt_solution(BasisSpec::new(24, 10, 80).unwrap());
    let table = overlaps(&sol, 2).unwrap();
    let w = sol.profile().lead_width();
    let lo = (std::f64::consts::PI / w).powi(2);
    let hi = (2.0 * std::f64::consts::PI / w).powi(2);
    let poles: Vec<f64> = sol
        .energies()
        .iter()
        .copied()
        .filter(|&e| e > lo && e < hi)
        .collect();
    assert!(!poles.is_empty());
    for ej in poles.iter().take(4) {
        let eig = |e: f64| {
            let r = r_matrix(&sol, &table, &channel_space(e, w).unwrap()).unwrap();
            let evd = r.self_adjoint_eigen(faer::Side::Lower).unwrap();
            let s = evd.S().column_vector();
            (s[0], s[1])
        };
        let d = 1e-6 * ej;
        let below = eig(ej - d);
        let above = eig(ej + d);
        assert!(
            below.0 < -1e3 && above.1 > 1e3,
            "pole {ej}: {below:?} {above:?}"
        );
    }
}

#[test]
fn transmission_is_mirror_invariant() {
    let base = make_darmstadt(DarmstadtParams::default(), 4096).unwrap();
    let p = apply_surface_disorder(&base, 0.1, 20, 3).unwrap();
    let m = p.mirrored().unwrap();
    let basis = BasisSpec::new(30, 12, 200).unwrap();
    let a = Scatterer::new(Arc::new(solve_profile(&p, &basis).unwrap())).unwrap();
    let b = Scatterer::new(Arc::new(solve_profile(&m, &basis).unwrap())).unwrap();
    for k in [1.4, 2.3, 3.7] {
        let (sa, sb) = (a.at_reduced_k(k).unwrap(), b.at_reduced_k(k).unwrap());
        let (ta, tb) = (conductance(&sa), conductance(&sb));
        assert!((ta - tb).abs() < 1e-8, "k={k}: {ta} vs {tb}");
        let t_prime = sb.t_prime();
        let t = sa.t();
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                assert!((t[(i, j)] - t_prime[(i, j)]).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn flux_is_conserved_in_the_blocks() {
    let sc = Scatterer::new(darmstadt_solution(BasisSpec::new(30, 12, 200).unwrap())).unwrap();
    for k in [1.2, 2.5, 3.9] {
        let s = sc.at_reduced_k(k).unwrap();
        let n = s.channels() as f64;
        let t = conductance(&s);
        let r = s.r();
        let reflected: f64 = (0..r.nrows())
            .flat_map(|i| (0..r.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| r[(i, j)].norm_sqr())
            .sum();
        assert!((t + reflected - n).abs() < 1e-10);
        assert!((0.0..=n).contains(&t));
    }
}

fn random_symmetric(n: usize, seed: &[f64]) -> Mat<f64> {
    let mut r = Mat::<f64>::zeros(n, n);
    let mut it = seed.iter().cycle();
    for i in 0..n {
        for j in 0..=i {
            let v = 20.0 * it.next().unwrap();
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn s_is_unitary_and_symmetric_for_any_real_r(
        k in 1.01f64..4.9,
        entries in prop::collection::vec(-1.0f64..1.0, 55),
    ) {
        let w = 1.0;
        let energy = (k * std::f64::consts::PI / w).powi(2);
        prop_assume!(channel_space(energy, w).is_ok());
        let space = channel_space(energy, w).unwrap();
        let r = random_symmetric(2 * space.open(), &entries);
        let s = s_from_r(&r, &space).unwrap();
        prop_assert!(s.unitarity_defect() < 1e-12);
        prop_assert!(s.reciprocity_defect() < 1e-12);
        let t = conductance(&s);
        prop_assert!(t >= -1e-12 && t <= space.open() as f64 + 1e-12);
        let o = s.origin_referenced(2.0);
        let mut prod = Mat::<c64>::zeros(o.nrows(), o.ncols());
        for i in 0..o.nrows() {
            for j in 0..o.ncols() {
                prod[(i, j)] = (0..o.ncols()).map(|l| o[(i, l)] * o[(j, l)].conj()).sum();
            }
        }
        for i in 0..o.nrows() {
            for j in 0..o.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - c64::new(target, 0.0)).norm() < 1e-12);
            }
        }
    }
}
