use std::f64::consts::PI;

use ndarray::Array2;

use wlab::tomography::{
    check_coverage, measurement_times, radon, reconstruct, shear_angle, simulate_measurement_set, square_grid,
    uniform_angles, Sinogram,
};
use wlab::state::GaussianParams;
use wlab::wigner::{analytic_gaussian_wigner, analytic_ho_wigner, marginal_x, WignerGrid};
use wlab::{Constants, Error, Grid1D, PhaseGrid};

fn rel_l2(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn offsets() -> Vec<f64> {
    (0..512).map(|k| -16.0 + k as f64 / 16.0).collect()
}

fn phantom() -> (WignerGrid, GaussianParams) {
    let params = GaussianParams::new(-0.5, 1.0, 0.6).unwrap();
    (analytic_gaussian_wigner(square_grid(256, 8.0).unwrap(), params, 0.0, Constants::default()), params)
}

#[test]
fn reconstruction_improves_with_more_angles() {
    let (w, params) = phantom();
    let target = square_grid(128, 8.0).unwrap();
    let truth = analytic_gaussian_wigner(target, params, 0.0, Constants::default());
    let errors: Vec<f64> = [32, 64, 180]
        .iter()
        .map(|&n| {
            let sino = radon(&w, &uniform_angles(n), &offsets()).unwrap();
            rel_l2(reconstruct(&sino, target).unwrap().values(), truth.values())
        })
        .collect();
    assert!(errors[0] > errors[1], "{errors:?}");
    assert!(errors[2] < 1e-4, "{errors:?}");
}

#[test]
fn projections_preserve_normalization() {
    let c = Constants::default();
    let w = analytic_ho_wigner(square_grid(256, 8.0).unwrap(), 3, 1.0, c).unwrap();
    let sino = radon(&w, &uniform_angles(32), &offsets()).unwrap();
    for total in sino.row_integrals() {
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }
}

#[test]
fn measurement_rows_are_sheared_position_densities() {
    // Each row, read back at x = u / cos(theta), is the position density of
    // the freely evolved packet at that time.
    let c = Constants::default();
    let x = Grid1D::new(256, -16.0, 16.0).unwrap();
    let pg = PhaseGrid::for_wavefunction(&x, &c);
    let params = GaussianParams::new(0.5, 0.5, 0.7).unwrap();
    let w0 = analytic_gaussian_wigner(pg, params, 0.0, c);
    let times = [0.0, 0.4, 1.3];
    let sino = simulate_measurement_set(&w0, &times, c).unwrap();
    assert_eq!(sino.times().unwrap(), &times);
    for (row, &t) in times.iter().enumerate() {
        let theta = shear_angle(t, c.mass);
        let rho_t = marginal_x(&analytic_gaussian_wigner(pg, params, t, c));
        let cos = theta.cos();
        for (k, &u) in sino.offsets().iter().enumerate() {
            let xpos = u / cos;
            let Some(i) = x.nearest_index(xpos) else { continue };
            if (x.point(i) - xpos).abs() > 1e-12 {
                continue;
            }
            assert!((sino.values()[[row, k]] * cos - rho_t[i]).abs() < 1e-8, "t={t} u={u}");
        }
    }
}

#[test]
fn free_evolution_data_reconstruct_with_a_missing_wedge() {
    let c = Constants::default();
    let x = Grid1D::new(1024, -64.0, 64.0).unwrap();
    let params = GaussianParams::new(0.0, 0.0, 0.7).unwrap();
    let w0 = analytic_gaussian_wigner(PhaseGrid::for_wavefunction(&x, &c), params, 0.0, c);
    let times = measurement_times(64, 85f64.to_radians(), c.mass).unwrap();
    let sino = simulate_measurement_set(&w0, &times, c).unwrap();
    let target = square_grid(128, 6.0).unwrap();
    let rec = reconstruct(&sino, target).unwrap();
    let truth = analytic_gaussian_wigner(target, params, 0.0, c);
    let err = rel_l2(rec.values(), truth.values());
    assert!(err < 0.05, "{err}");
    let origin = (target.p.nearest_index(0.0).unwrap(), target.x.nearest_index(0.0).unwrap());
    assert!(rec.values()[origin] > 0.0);
}

#[test]
fn sparse_or_narrow_angle_sets_are_refused() {
    assert!(matches!(check_coverage(&uniform_angles(16)), Err(Error::Coverage(_))));
    let narrow: Vec<f64> = (0..64).map(|k| -1.0 + 2.0 * k as f64 / 63.0).collect();
    assert!(matches!(check_coverage(&narrow), Err(Error::Coverage(_))));
    let (w, _) = phantom();
    let sino = radon(&w, &narrow, &offsets()).unwrap();
    let err = reconstruct(&sino, square_grid(64, 8.0).unwrap()).unwrap_err();
    assert!(matches!(err.root(), Error::Coverage(_)));
}

#[test]
fn sinogram_shapes_are_validated() {
    let values = Array2::<f64>::zeros((3, 4));
    assert!(Sinogram::new(vec![0.0, 0.1], vec![0.0, 1.0, 2.0, 3.0], values.clone(), None).is_err());
    assert!(Sinogram::new(vec![0.0, 0.1, 0.2], vec![0.0, 1.0, 2.0, 3.0], values, Some(vec![0.0])).is_err());
}

#[test]
fn measurement_times_span_the_requested_angles() {
    let times = measurement_times(5, PI / 4.0, 2.0).unwrap();
    let angles: Vec<f64> = times.iter().map(|&t| shear_angle(t, 2.0)).collect();
    for (a, e) in angles.iter().zip([-PI / 4.0, -PI / 8.0, 0.0, PI / 8.0, PI / 4.0]) {
        assert!((a - e).abs() < 1e-14);
    }
    assert!(measurement_times(5, PI / 2.0, 1.0).is_err());
}
