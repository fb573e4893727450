//! Per-site quantities of the transverse-field XY ring in the limit of
//! infinitely many sites, and the temperature window in which a small
//! ground-state overlap with product states certifies entanglement.
//!
//! The overlap density `lim ln(alpha) / N` relies on a conjectured closed
//! form; every result that uses it carries `conjecture_conditional`.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eigvalsh;
use crate::models::chains::{xy_pauli, XYParams};
use crate::models::sectors::MomentumSector;
use crate::thermo::gibbs_at;

/// Overall factor of the single-particle dispersion, fixed by
/// [`calibrate_dispersion_scale`] against exact diagonalization.
pub const DISPERSION_SCALE: f64 = 1.0;

/// Absolute tolerance of every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-9;

/// Width of the interval next to `mu = 0` integrated separately.
const SINGULAR_SPLIT: f64 = 1e-3;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and its difference to the embedded Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h)
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature of `f` over `[a, b]` to
/// absolute tolerance `tol`, bisecting the interval with the largest error.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol {
        if parts.len() >= MAX_INTERVALS || !total.is_finite() {
            return Err(Error::Quadrature(format!("error {err:.3e} on [{a}, {b}] after {} intervals", parts.len())));
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, v, e) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature(format!("interval [{lo}, {hi}] cannot be split further")));
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
        if parts.len() % 64 == 0 {
            // Refresh the running sums against accumulated cancellation.
            total = parts.iter().map(|p| p.2).sum();
            err = parts.iter().map(|p| p.3).sum();
        }
    }
    Ok(parts.iter().map(|p| p.2).sum())
}

/// Integral over consecutive breakpoints, splitting the tolerance evenly.
fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<f64> {
    let pieces = (breaks.len() - 1).max(1) as f64;
    breaks.windows(2).map(|w| integrate(&f, w[0], w[1], tol / pieces)).sum()
}

fn check_params(r: f64, h: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("need r in [0, 1] and finite h (got r = {r}, h = {h})")));
    }
    Ok(())
}

/// `eps(k) = sqrt((h - cos k)^2 + r^2 sin^2 k)`.
pub fn xy_dispersion(r: f64, h: f64, k: f64) -> f64 {
    (h - k.cos()).hypot(r * k.sin())
}

/// Breakpoints in `[0, pi]` where the dispersion may have a kink.
fn dispersion_breaks(r: f64, h: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    if r == 0.0 && h.abs() < 1.0 {
        b.push(h.acos());
    }
    b.push(PI);
    b
}

/// `ln(2 cosh x)` without overflow.
fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `(1 / 2 pi) int_0^{2 pi} ln(2 cosh(c beta eps(k))) dk` for a given
/// dispersion scale `c`.
pub fn xy_lnz_density_scaled(r: f64, h: f64, beta: f64, c: f64) -> Result<f64> {
    check_params(r, h)?;
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be nonnegative")));
    }
    if beta == 0.0 {
        return Ok(LN_2);
    }
    let v = integrate_pieces(|k| ln_two_cosh(c * beta * xy_dispersion(r, h, k)), &dispersion_breaks(r, h), PI * QUAD_TOL)?;
    Ok(v / PI)
}

/// Free entropy `ln Z / N` of the infinite ring.
pub fn xy_lnz_density(r: f64, h: f64, beta: f64) -> Result<f64> {
    xy_lnz_density_scaled(r, h, beta, DISPERSION_SCALE)
}

/// `-(c / 2 pi) int_0^{2 pi} eps(k) dk`.
pub fn xy_e0_density_scaled(r: f64, h: f64, c: f64) -> Result<f64> {
    check_params(r, h)?;
    let v = integrate_pieces(|k| xy_dispersion(r, h, k), &dispersion_breaks(r, h), PI * QUAD_TOL)?;
    Ok(-c * v / PI)
}

/// Ground-state energy per site of the infinite ring.
pub fn xy_e0_density(r: f64, h: f64) -> Result<f64> {
    xy_e0_density_scaled(r, h, DISPERSION_SCALE)
}

/// Full spectrum of the `n`-site XY ring, assembled from the momentum
/// blocks of both parity sectors.
pub fn xy_exact_spectrum(n: usize, r: f64, h: f64) -> Result<Vec<f64>> {
    let op = xy_pauli(&XYParams::ring(n, r, h))?;
    if n > 20 {
        return Err(Error::TooLarge { qubits: n, cap: 20 });
    }
    let sectors: Vec<MomentumSector> = (0..2).flat_map(|p| MomentumSector::parity(n, p)).filter(|s| s.dim() > 0).collect();
    let blocks: Vec<Vec<f64>> = sectors.par_iter().map(|s| eigvalsh(&s.block(&op))).collect::<Result<_>>()?;
    let mut spec: Vec<f64> = blocks.into_iter().flatten().collect();
    spec.sort_by(f64::total_cmp);
    Ok(spec)
}

/// Exact per-site free entropy and ground energy of a finite ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiniteDensities {
    pub lnz_density: f64,
    pub e0_density: f64,
}

pub fn xy_finite_densities(n: usize, r: f64, h: f64, beta: f64) -> Result<FiniteDensities> {
    let spec = xy_exact_spectrum(n, r, h)?;
    let g = gibbs_at(&spec, beta)?;
    Ok(FiniteDensities { lnz_density: g.ln_z / n as f64, e0_density: spec[0] / n as f64 })
}

/// A model point `(r, h, beta)` used to fit the dispersion scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub r: f64,
    pub h: f64,
    pub beta: f64,
}

pub const CALIBRATION_PROBES: [Probe; 5] = [
    Probe { r: 1.0, h: 0.0, beta: 1.0 },
    Probe { r: 1.0, h: 1.0, beta: 1.0 },
    Probe { r: 0.5, h: 0.5, beta: 2.0 },
    Probe { r: 0.0, h: 1.0, beta: 1.0 },
    Probe { r: 1.0, h: 2.0, beta: 0.5 },
];

#[derive(Clone, Debug, Serialize)]
pub struct ProbeComparison {
    pub probe: Probe,
    pub finite: FiniteDensities,
    pub lnz_limit: f64,
    pub e0_limit: f64,
    pub lnz_rel_error: f64,
    pub e0_rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub n: usize,
    /// Least-squares dispersion scale.
    pub fitted_scale: f64,
    /// Comparisons at [`DISPERSION_SCALE`].
    pub probes: Vec<ProbeComparison>,
}

impl Calibration {
    pub fn max_rel_error(&self) -> f64 {
        self.probes.iter().map(|p| p.lnz_rel_error.max(p.e0_rel_error)).fold(0.0, f64::max)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Fits the dispersion scale to exact `n`-site densities by minimizing the
/// summed squared relative errors of `ln Z / N` and `E0 / N`.
pub fn calibrate_dispersion_scale(n: usize, probes: &[Probe]) -> Result<Calibration> {
    let finite: Vec<FiniteDensities> =
        probes.iter().map(|p| xy_finite_densities(n, p.r, p.h, p.beta)).collect::<Result<_>>()?;
    let residual = |c: f64| -> Result<f64> {
        let mut s = 0.0;
        for (p, f) in probes.iter().zip(&finite) {
            s += rel(xy_lnz_density_scaled(p.r, p.h, p.beta, c)?, f.lnz_density).powi(2);
            s += rel(xy_e0_density_scaled(p.r, p.h, c)?, f.e0_density).powi(2);
        }
        Ok(s)
    };
    let fitted_scale = golden_max(|ln_c| residual(ln_c.exp()).map(|v| -v), (0.1f64).ln(), (10.0f64).ln(), 1e-10)?.0.exp();
    let probes = probes
        .iter()
        .zip(finite)
        .map(|(&probe, finite)| {
            let lnz_limit = xy_lnz_density(probe.r, probe.h, probe.beta)?;
            let e0_limit = xy_e0_density(probe.r, probe.h)?;
            Ok(ProbeComparison {
                probe,
                finite,
                lnz_limit,
                e0_limit,
                lnz_rel_error: rel(lnz_limit, finite.lnz_density),
                e0_rel_error: rel(e0_limit, finite.e0_density),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Calibration { n, fitted_scale, probes })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
fn golden_max<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// `theta(mu) = atan2(r sin 2 pi mu, h - cos 2 pi mu) / 2`, in `[-pi/2, pi/2]`.
fn wei_theta(r: f64, h: f64, mu: f64) -> f64 {
    let a = 2.0 * PI * mu;
    0.5 * (r * a.sin()).atan2(h - a.cos())
}

/// `int_0^{1/2} ln|cos(theta) cos^2(xi/2) + sin(theta) sin^2(xi/2) cot(pi mu)| dmu`.
pub fn wei_integral(r: f64, h: f64, xi: f64) -> Result<f64> {
    check_params(r, h)?;
    let (c2, s2) = ((0.5 * xi).cos().powi(2), (0.5 * xi).sin().powi(2));
    let f = |mu: f64| {
        let th = wei_theta(r, h, mu);
        (th.cos() * c2 + th.sin() * s2 / (PI * mu).tan()).abs().ln()
    };
    // mu = s^2 removes the logarithmic singularity at the origin.
    let root = SINGULAR_SPLIT.sqrt();
    let near = integrate(|s: f64| 2.0 * s * f(s * s), 0.0, root, 0.25 * QUAD_TOL)?;
    let mut breaks = vec![SINGULAR_SPLIT];
    if r == 0.0 && h.abs() < 1.0 {
        // theta jumps where cos(2 pi mu) = h.
        let mc = h.acos() / (2.0 * PI);
        if mc > SINGULAR_SPLIT && mc < 0.5 {
            breaks.push(mc);
        }
    }
    breaks.push(0.5);
    let far = integrate_pieces(f, &breaks, 0.75 * QUAD_TOL)?;
    let v = near + far;
    if !v.is_finite() {
        return Err(Error::Quadrature(format!("overlap integral diverges at r = {r}, h = {h}, xi = {xi}")));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaDensity {
    /// `lim ln(alpha) / N`.
    pub value: f64,
    /// Maximizing angle in `[0, 2 pi)`.
    pub xi: f64,
    pub conjecture_conditional: bool,
}

/// `2 max_xi wei_integral(r, h, xi)`, scanning `xi_points` angles in
/// `[0, 2 pi)` and refining the best one by golden-section search.
pub fn wei_alpha_density(r: f64, h: f64, xi_points: usize) -> Result<AlphaDensity> {
    check_params(r, h)?;
    if xi_points < 3 {
        return Err(Error::InvalidParameter("need at least three angles".into()));
    }
    let step = 2.0 * PI / xi_points as f64;
    let values: Vec<f64> =
        (0..xi_points).into_par_iter().map(|i| wei_integral(r, h, i as f64 * step)).collect::<Result<_>>()?;
    let best = (0..xi_points).max_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty");
    let centre = best as f64 * step;
    let (xi, v) = golden_max(|x| wei_integral(r, h, x), centre - step, centre + step, 1e-9)?;
    let (xi, v) = if v >= values[best] { (xi, v) } else { (centre, values[best]) };
    Ok(AlphaDensity { value: 2.0 * v, xi: xi.rem_euclid(2.0 * PI), conjecture_conditional: true })
}

/// Number of angles scanned by default.
pub const XI_GRID: usize = 720;

/// Limit densities of one `(r, h)` point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XYLimitDensities {
    pub r: f64,
    pub h: f64,
    pub e0_density: f64,
    pub alpha_density: f64,
    pub xi: f64,
    pub conjecture_conditional: bool,
}

impl XYLimitDensities {
    pub fn new(r: f64, h: f64) -> Result<Self> {
        Self::with_grid(r, h, XI_GRID)
    }

    pub fn with_grid(r: f64, h: f64, xi_points: usize) -> Result<Self> {
        let alpha = wei_alpha_density(r, h, xi_points)?;
        Ok(Self {
            r,
            h,
            e0_density: xy_e0_density(r, h)?,
            alpha_density: alpha.value,
            xi: alpha.xi,
            conjecture_conditional: true,
        })
    }

    pub fn lnz_density(&self, beta: f64) -> Result<f64> {
        xy_lnz_density(self.r, self.h, beta)
    }

    /// `-lim ln(alpha)/N - beta E0/N - ln Z/N`; positive values certify
    /// that the Gibbs state is entangled. Nondecreasing in `beta`.
    pub fn expression(&self, beta: f64) -> Result<f64> {
        Ok(-self.alpha_density - beta * self.e0_density - self.lnz_density(beta)?)
    }

    /// Largest temperature with a positive expression; zero when there is
    /// none.
    pub fn t_max(&self) -> Result<f64> {
        if self.alpha_density >= -1e-12 {
            return Ok(0.0);
        }
        if self.expression(0.0)? > 0.0 {
            return Ok(f64::INFINITY);
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.expression(hi)? <= 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e8 {
                return Ok(0.0);
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.expression(mid)? > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        Ok(1.0 / hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionPoint {
    pub r: f64,
    pub h: f64,
    pub t: f64,
    pub beta: f64,
    pub expression: f64,
    pub detected: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TmaxPoint {
    pub r: f64,
    pub h: f64,
    pub alpha_density: f64,
    pub t_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem3Region {
    pub curve: Vec<TmaxPoint>,
    pub grid: Vec<RegionPoint>,
    pub conjecture_conditional: bool,
}

/// Detection expression on the `h x T` grid and the maximal detected
/// temperature for every field.
pub fn theorem3_region(r: f64, h_grid: &[f64], t_grid: &[f64]) -> Result<Theorem3Region> {
    if h_grid.iter().chain(t_grid).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("grids must be finite".into()));
    }
    if t_grid.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidParameter("temperatures must be positive".into()));
    }
    let per_h: Vec<(TmaxPoint, Vec<RegionPoint>)> = h_grid
        .par_iter()
        .map(|&h| {
            let lim = XYLimitDensities::new(r, h)?;
            let point = TmaxPoint { r, h, alpha_density: lim.alpha_density, t_max: lim.t_max()? };
            let rows = t_grid
                .iter()
                .map(|&t| {
                    let beta = 1.0 / t;
                    let expression = lim.expression(beta)?;
                    Ok(RegionPoint { r, h, t, beta, expression, detected: expression > 0.0 })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((point, rows))
        })
        .collect::<Result<_>>()?;
    let (curve, grid): (Vec<_>, Vec<_>) = per_h.into_iter().unzip();
    Ok(Theorem3Region { curve, grid: grid.into_iter().flatten().collect(), conjecture_conditional: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomial_and_log() {
        let v = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-9).unwrap();
        assert!((v + 1.0).abs() < 1e-8);
    }

    #[test]
    fn infinite_temperature() {
        assert_eq!(xy_lnz_density(0.3, 0.7, 0.0).unwrap(), LN_2);
    }

    #[test]
    fn ising_zero_field_closed_forms() {
        assert!((xy_e0_density(1.0, 0.0).unwrap() + 1.0).abs() < 1e-12);
        let b = 0.8f64;
        assert!((xy_lnz_density(1.0, 0.0, b).unwrap() - (2.0 * b.cosh()).ln()).abs() < 1e-10);
        // Critical point: e0 = -4 / pi.
        assert!((xy_e0_density(1.0, 1.0).unwrap() + 4.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn strong_field_limit() {
        assert!((xy_e0_density(1.0, 1e4).unwrap() / 1e4 + 1.0).abs() < 1e-6);
    }

    #[test]
    fn low_temperature_limit() {
        let (r, h) = (0.6, 0.4);
        let beta = 60.0;
        let lhs = xy_lnz_density(r, h, beta).unwrap() + beta * xy_e0_density(r, h).unwrap();
        assert!(lhs.abs() < 1e-6, "{lhs}");
    }

    #[test]
    fn exact_spectrum_matches_dense() {
        let (n, r, h) = (6, 0.4, 0.3);
        let dense = crate::models::chains::xy_chain(&XYParams::ring(n, r, h)).unwrap().eigenvalues().unwrap();
        let blocks = xy_exact_spectrum(n, r, h).unwrap();
        assert_eq!(dense.len(), blocks.len());
        assert!(dense.iter().zip(&blocks).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn alpha_density_strong_field() {
        let a = wei_alpha_density(1.0, 100.0, 72).unwrap();
        assert!(a.value <= 1e-12 && a.value.abs() < 0.01, "{a:?}");
    }

    #[test]
    fn alpha_density_reflection() {
        for xi in [0.3, 1.1, 2.5] {
            let a = wei_integral(1.0, 0.5, xi).unwrap();
            let b = wei_integral(1.0, 0.5, 2.0 * PI - xi).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn expression_is_composed() {
        let lim = XYLimitDensities::with_grid(1.0, 0.9, 72).unwrap();
        let beta = 1.7;
        let direct = -lim.alpha_density - beta * lim.e0_density - xy_lnz_density(1.0, 0.9, beta).unwrap();
        assert_eq!(lim.expression(beta).unwrap(), direct);
        assert!(lim.expression(0.0).unwrap() <= 0.0);
    }
}
