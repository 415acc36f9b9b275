use std::f64::consts::PI;

use ndarray::Array2;
use proptest::prelude::*;

use wlab::flow::{
    classical_flow, divergence, quantum_liouville_rhs, tangency_divergence, wigner_flow, SeriesPolicy,
};
use wlab::state::{gaussian_packet, ho_eigenstate, GaussianParams};
use wlab::wigner::{
    analytic_gaussian_wigner, analytic_ho_wigner, marginal_x, negativity_volume, negativity_volume_converged,
    overlap, purity, wigner_transform, WignerGrid,
};
use wlab::{Constants, Error, Grid1D, PhaseGrid, Potential};

fn grid() -> Grid1D {
    Grid1D::new(256, -16.0, 16.0).unwrap()
}

fn linf(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn packet(x: f64, p: f64, s: f64) -> WignerGrid {
    let psi = gaussian_packet(grid(), GaussianParams::new(x, p, s).unwrap(), 0.0, Constants::default()).unwrap();
    wigner_transform(&psi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_invariants(x in -3.0f64..3.0, p in -2.0f64..2.0, s in 0.5f64..1.2, t in 0.0f64..1.0) {
        let c = Constants::default();
        let params = GaussianParams::new(x, p, s).unwrap();
        let psi = gaussian_packet(grid(), params, t, c).unwrap();
        let w = wigner_transform(&psi).unwrap();
        prop_assert!((w.integral() - 1.0).abs() < 1e-10);
        prop_assert!((purity(&w) - 1.0).abs() < 1e-10);
        prop_assert!(negativity_volume(&w) < 1e-9);
        let reference = analytic_gaussian_wigner(*w.pgrid(), params, t, c);
        prop_assert!(linf(w.values(), reference.values()) < 1e-8);
        for (a, b) in marginal_x(&w).iter().zip(psi.density()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn overlap_of_displaced_packets(dx in -2.0f64..2.0, dp in -1.5f64..1.5) {
        let s = 0.8;
        let a = packet(0.0, 0.0, s);
        let b = packet(dx, dp, s);
        // Closed form |<a|b>|^2 for equal widths, hbar = 1.
        let expected = (-dx * dx / (4.0 * s * s) - s * s * dp * dp).exp();
        prop_assert!((overlap(&a, &b).unwrap() - expected).abs() < 1e-9);
    }
}

#[test]
fn overlap_agrees_with_wave_function_inner_product() {
    let c = Constants::default();
    let g = grid();
    let a = ho_eigenstate(g, 1, 1.0, c).unwrap();
    let b = gaussian_packet(g, GaussianParams::new(0.7, -0.4, 0.6).unwrap(), 0.0, c).unwrap();
    let inner: num_complex::Complex64 =
        a.values().iter().zip(b.values()).map(|(u, v)| u.conj() * v).sum::<num_complex::Complex64>() * g.dx();
    let from_wigner = overlap(&wigner_transform(&a).unwrap(), &wigner_transform(&b).unwrap()).unwrap();
    assert!((from_wigner - inner.norm_sqr()).abs() < 1e-10);
}

#[test]
fn eigenstates_are_mutually_orthogonal_in_phase_space() {
    let c = Constants::default();
    let ws: Vec<WignerGrid> =
        (0..4).map(|n| wigner_transform(&ho_eigenstate(grid(), n, 1.0, c).unwrap()).unwrap()).collect();
    for i in 0..4 {
        for j in 0..4 {
            let o = overlap(&ws[i], &ws[j]).unwrap();
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((o - expected).abs() < 1e-10, "{i} {j}: {o}");
        }
    }
}

#[test]
fn converged_negativity_of_first_excited_state() {
    // Negative part of -(1 - 2r^2) e^{-r^2} / pi over r^2 < 1/2.
    let exact = 2.0 * (-0.5f64).exp() - 1.0;
    let c = Constants::default();
    let w = wigner_transform(&ho_eigenstate(Grid1D::new(128, -8.0, 8.0).unwrap(), 1, 1.0, c).unwrap()).unwrap();
    assert!((negativity_volume_converged(&w, 1e-12) - exact).abs() < 1e-10);
    let plain = negativity_volume(&w);
    assert!((plain - exact).abs() > 1e-6 && (plain - exact).abs() < 1e-2);
}

#[test]
fn conjugation_and_parity_act_as_reflections() {
    let c = Constants::default();
    let g = Grid1D::new(256, -10.0, 10.0).unwrap();
    let psi = gaussian_packet(g, GaussianParams::new(1.5, 0.75, 0.7).unwrap(), 0.0, c).unwrap();
    let w = wigner_transform(&psi).unwrap();
    let conj = wigner_transform(&psi.conjugate()).unwrap();
    let flipped = wigner_transform(&psi.parity().unwrap()).unwrap();
    let (np, nx) = w.pgrid().shape();
    for j in 1..np {
        for i in 1..nx {
            assert!((conj.values()[[j, i]] - w.values()[[np - j, i]]).abs() < 1e-12);
            assert!((flipped.values()[[j, i]] - w.values()[[np - j, nx - i]]).abs() < 1e-12);
        }
    }
}

#[test]
fn harmonic_flow_is_classical_and_complete() {
    let c = Constants::default();
    let v = Potential::harmonic(1.0).unwrap();
    let w = wigner_transform(&gaussian_packet(grid(), GaussianParams::new(1.0, -1.0, 0.5).unwrap(), 0.0, c).unwrap())
        .unwrap();
    let quantum = wigner_flow(&w, &v, SeriesPolicy::Exact).unwrap();
    let classical = classical_flow(&w, &v).unwrap();
    assert_eq!(quantum.truncation_l_max(), -1);
    assert!(linf(quantum.jx(), classical.jx()) == 0.0);
    assert!(linf(quantum.jp(), classical.jp()) < 1e-14);
}

#[test]
fn quartic_series_terminates_after_one_correction() {
    let c = Constants::default();
    let v = Potential::anharmonic(0.5, 0.25).unwrap();
    let w = wigner_transform(&ho_eigenstate(Grid1D::new(256, -12.0, 12.0).unwrap(), 2, 0.5, c).unwrap()).unwrap();
    let exact = wigner_flow(&w, &v, SeriesPolicy::Exact).unwrap();
    let one = wigner_flow(&w, &v, SeriesPolicy::truncated(1)).unwrap();
    let many = wigner_flow(&w, &v, SeriesPolicy::truncated(5)).unwrap();
    let classical = classical_flow(&w, &v).unwrap();
    assert_eq!(one.truncation_l_max(), -1);
    assert_eq!(classical.truncation_l_max(), 0);
    assert!(linf(exact.jp(), one.jp()) < 1e-12);
    assert!(linf(exact.jp(), many.jp()) < 1e-12);
    assert!(linf(exact.jp(), classical.jp()) > 1e-3);
}

#[test]
fn truncated_series_is_asymptotic_to_resummed_kernel() {
    let c = Constants::default();
    let v = Potential::barrier(2.0, 2.0).unwrap();
    let w = wigner_transform(&gaussian_packet(grid(), GaussianParams::new(-1.0, 1.0, 0.7).unwrap(), 0.0, c).unwrap())
        .unwrap();
    let exact = quantum_liouville_rhs(&w, &v, SeriesPolicy::Exact).unwrap();
    let errors: Vec<f64> = (0..16)
        .map(|l| linf(&quantum_liouville_rhs(&w, &v, SeriesPolicy::truncated(l)).unwrap(), &exact))
        .collect();
    // Asymptotic: low orders approach the kernel, high orders diverge.
    assert!(errors[..6].windows(2).all(|e| e[1] < e[0]), "{errors:?}");
    assert!(errors[5] < 1e-3, "{errors:?}");
    assert!(errors[15] > errors[5], "{errors:?}");
}

#[test]
fn unsupported_orders_are_capability_errors() {
    let v = Potential::barrier(64.0, 0.125).unwrap();
    let w = packet(0.0, 0.0, 1.0);
    let err = wigner_flow(&w, &v, SeriesPolicy::truncated(40)).unwrap_err();
    assert!(matches!(err.root(), Error::Capability(_)), "{err}");
}

#[test]
fn divergence_reproduces_liouville_rhs() {
    let c = Constants::default();
    for v in [Potential::anharmonic(0.5, 0.75).unwrap(), Potential::barrier(4.0, 0.5).unwrap()] {
        let w = wigner_transform(
            &gaussian_packet(grid(), GaussianParams::new(-1.0, 1.5, 0.6).unwrap(), 0.0, c).unwrap(),
        )
        .unwrap();
        let j = wigner_flow(&w, &v, SeriesPolicy::Exact).unwrap();
        let rhs = quantum_liouville_rhs(&w, &v, SeriesPolicy::Exact).unwrap();
        assert!(linf(&(-divergence(&j).unwrap()), &rhs) < 1e-10);
    }
}

#[test]
fn eigenstate_flow_follows_level_lines() {
    let c = Constants::default();
    let v = Potential::harmonic(1.0).unwrap();
    let pg = PhaseGrid::for_wavefunction(&Grid1D::new(256, -8.0, 8.0).unwrap(), &c);
    for n in 0..5 {
        let w = analytic_ho_wigner(pg, n, 1.0, c).unwrap();
        let t = tangency_divergence(&w, &wigner_flow(&w, &v, SeriesPolicy::Exact).unwrap()).unwrap();
        assert!(t.summary < 1e-8, "n = {n}: {}", t.summary);
    }
    let w = analytic_ho_wigner(pg, 0, 1.0, c).unwrap();
    let origin = (pg.p.nearest_index(0.0).unwrap(), pg.x.nearest_index(0.0).unwrap());
    assert!((w.values()[origin] - 1.0 / PI).abs() < 1e-14);
}
