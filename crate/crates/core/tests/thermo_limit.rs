use num_complex::Complex64;
use proxygap_core::models::chains::{xy_chain, XYParams};
use proxygap_core::thermo_limit::*;

#[test]
fn calibration_fits_unit_scale() {
    let cal = calibrate_dispersion_scale(12, &CALIBRATION_PROBES).unwrap();
    assert!((cal.fitted_scale - DISPERSION_SCALE).abs() < 0.01, "fitted {}", cal.fitted_scale);
    assert!(cal.max_rel_error() < 0.01, "{:?}", cal.probes);
}

#[test]
fn finite_size_error_shrinks() {
    // Inside the circle r^2 + h^2 < 1 correlations oscillate and so does
    // the finite-size error of E0; probe outside it.
    for p in [Probe { r: 1.0, h: 1.0, beta: 1.0 }, Probe { r: 0.5, h: 1.5, beta: 2.0 }, Probe { r: 1.0, h: 2.0, beta: 0.5 }] {
        let lnz = xy_lnz_density(p.r, p.h, p.beta).unwrap();
        let e0 = xy_e0_density(p.r, p.h).unwrap();
        let errs: Vec<(f64, f64)> = [8, 10, 12, 14]
            .iter()
            .map(|&n| {
                let f = xy_finite_densities(n, p.r, p.h, p.beta).unwrap();
                ((f.lnz_density - lnz).abs(), (f.e0_density - e0).abs())
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[1].0 <= w[0].0 + 1e-12 && w[1].1 <= w[0].1 + 1e-12, "{p:?}: {errs:?}");
        }
    }
}

/// Largest squared overlap of `psi` with `(cos t |0> + sin t |1>)^{(x) n}`.
fn uniform_product_overlap(psi: &[Complex64], n: usize) -> f64 {
    let steps = 4000;
    (0..steps)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / steps as f64;
            let (c, s) = (t.cos(), t.sin());
            psi.iter()
                .enumerate()
                .map(|(idx, a)| {
                    let ones = idx.count_ones() as i32;
                    a * c.powi(n as i32 - ones) * s.powi(ones)
                })
                .sum::<Complex64>()
                .norm_sqr()
        })
        .fold(0.0, f64::max)
}

#[test]
fn alpha_density_matches_finite_overlaps_in_paramagnet() {
    for h in [2.0, 5.0] {
        let limit = wei_alpha_density(1.0, h, 180).unwrap().value;
        let n = 10;
        let psi = xy_chain(&XYParams::ring(n, 1.0, h)).unwrap().eig().unwrap().eigenvector(0);
        let finite = uniform_product_overlap(&psi, n).ln() / n as f64;
        assert!((finite - limit).abs() < 1e-3, "h = {h}: {finite} vs {limit}");
    }
}

#[test]
fn alpha_density_matches_cat_overlaps_in_ferromagnet() {
    // The finite ground state is a cat state, halving the overlap.
    let limit = wei_alpha_density(1.0, 0.5, 180).unwrap().value;
    let n = 10;
    let psi = xy_chain(&XYParams::ring(n, 1.0, 0.5)).unwrap().eig().unwrap().eigenvector(0);
    let finite = (2.0 * uniform_product_overlap(&psi, n)).ln() / n as f64;
    assert!((finite - limit).abs() < 1e-3, "{finite} vs {limit}");
}

#[test]
fn alpha_density_nonpositive() {
    for r in [0.0, 0.3, 0.7, 1.0] {
        for h in [0.0, 0.4, 0.9, 1.3, 3.0] {
            let a = wei_alpha_density(r, h, 90).unwrap();
            assert!(a.value <= 2.0 * QUAD_TOL, "r = {r}, h = {h}: {}", a.value);
            assert!(a.conjecture_conditional);
        }
    }
}

#[test]
fn ising_anchor() {
    let a = wei_alpha_density(1.0, 0.5, XI_GRID).unwrap();
    assert!(a.value < 0.0);
    assert!((a.value + 3.0e-4).abs() < 2e-5, "{}", a.value);
}

#[test]
fn ising_detects_near_critical_field() {
    let hs = [0.9, 0.95, 1.0, 1.05, 1.1];
    let region = theorem3_region(1.0, &hs, &[0.02, 0.05, 0.1]).unwrap();
    assert!(region.conjecture_conditional);
    assert!(region.curve.iter().all(|p| p.t_max > 0.0), "{:?}", region.curve);
    assert_eq!(region.grid.len(), hs.len() * 3);
}

#[test]
fn detected_set_shrinks_with_temperature() {
    let ts: Vec<f64> = (1..=30).map(|k| 0.03 * k as f64).collect();
    let region = theorem3_region(1.0, &[0.6, 1.0, 1.2, 2.0], &ts).unwrap();
    for row in region.grid.chunks(ts.len()) {
        for w in row.windows(2) {
            assert!(w[1].expression <= w[0].expression + 1e-12);
            assert!(w[0].detected || !w[1].detected);
        }
        let t_max = region.curve.iter().find(|p| p.h == row[0].h).unwrap().t_max;
        for p in row {
            assert_eq!(p.detected, p.t < t_max, "h = {}, t = {}, t_max = {t_max}", p.h, p.t);
        }
    }
}

#[test]
fn infinite_temperature_never_detects() {
    for h in [0.3, 1.0, 1.7] {
        let lim = XYLimitDensities::with_grid(0.6, h, 90).unwrap();
        assert!(lim.expression(0.0).unwrap() <= 0.0);
        assert!(lim.t_max().unwrap().is_finite());
    }
}
