//! Gibbs thermodynamics of a finite spectrum and the linear-entropy
//! maximizer at fixed mean energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln Z`, mean energy and entropy of the Gibbs state at inverse
/// temperature `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsPoint {
    pub beta: f64,
    pub ln_z: f64,
    pub energy: f64,
    pub entropy: f64,
}

fn check_spectrum(spectrum: &[f64]) -> Result<()> {
    if spectrum.is_empty() {
        return Err(Error::InvalidParameter("empty spectrum".into()));
    }
    if spectrum.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("spectrum contains non-finite values".into()));
    }
    Ok(())
}

fn min_max(spectrum: &[f64]) -> (f64, f64) {
    spectrum
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Gibbs quantities with the exponent shifted by the ground energy.
pub fn gibbs_at(spectrum: &[f64], beta: f64) -> Result<GibbsPoint> {
    check_spectrum(spectrum)?;
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let (e0, _) = min_max(spectrum);
    let (mut z, mut ez) = (0.0, 0.0);
    for &e in spectrum {
        let w = (-beta * (e - e0)).exp();
        z += w;
        ez += w * (e - e0);
    }
    let excess = ez / z;
    let ln_z_shifted = z.ln();
    let entropy = (beta * excess + ln_z_shifted).clamp(0.0, (spectrum.len() as f64).ln());
    Ok(GibbsPoint {
        beta,
        ln_z: ln_z_shifted - beta * e0,
        energy: e0 + excess,
        entropy,
    })
}

/// Gibbs weights `e^{-beta E_i} / Z`.
pub fn gibbs_weights(spectrum: &[f64], beta: f64) -> Vec<f64> {
    let (e0, _) = min_max(spectrum);
    let w: Vec<f64> = spectrum.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

const BETA_BISECTIONS: usize = 200;

/// Inverse temperature `beta >= 0` whose Gibbs energy equals `energy`.
///
/// The energy must lie in `(E_0, mean]`.
pub fn beta_from_energy(spectrum: &[f64], energy: f64) -> Result<f64> {
    check_spectrum(spectrum)?;
    let (e0, e_max) = min_max(spectrum);
    let mean = spectrum.iter().sum::<f64>() / spectrum.len() as f64;
    let spread = (e_max - e0).max(f64::MIN_POSITIVE);
    let tol = 1e-9 * spread;
    if energy > mean + tol || energy <= e0 {
        return Err(Error::EnergyOutOfRange { energy, lo: e0, hi: mean });
    }
    if energy >= mean - 1e-15 * spread {
        return Ok(0.0);
    }
    let e_at = |b: f64| gibbs_at(spectrum, b).map(|g| g.energy);
    let mut hi = 1.0 / spread;
    while e_at(hi)? > energy {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::EnergyOutOfRange { energy, lo: e0, hi: mean });
        }
    }
    let mut lo = 0.0;
    for _ in 0..BETA_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if e_at(mid)? > energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gibbs curve of a fixed spectrum.
#[derive(Clone, Debug)]
pub struct GibbsCurve {
    spectrum: Vec<f64>,
    e0: f64,
    e_max: f64,
    mean: f64,
}

impl GibbsCurve {
    pub fn new(mut spectrum: Vec<f64>) -> Result<Self> {
        check_spectrum(&spectrum)?;
        spectrum.sort_by(f64::total_cmp);
        let e0 = spectrum[0];
        let e_max = *spectrum.last().unwrap();
        let mean = spectrum.iter().sum::<f64>() / spectrum.len() as f64;
        Ok(Self { spectrum, e0, e_max, mean })
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn ground_energy(&self) -> f64 {
        self.e0
    }

    pub fn max_energy(&self) -> f64 {
        self.e_max
    }

    /// Infinite-temperature energy `tr H / d`.
    pub fn mean_energy(&self) -> f64 {
        self.mean
    }

    pub fn at_beta(&self, beta: f64) -> Result<GibbsPoint> {
        gibbs_at(&self.spectrum, beta)
    }

    pub fn beta(&self, energy: f64) -> Result<f64> {
        beta_from_energy(&self.spectrum, energy)
    }

    pub fn at_energy(&self, energy: f64) -> Result<GibbsPoint> {
        let beta = self.beta(energy)?;
        let mut g = self.at_beta(beta)?;
        g.energy = energy;
        Ok(g)
    }

    pub fn entropy(&self, energy: f64) -> Result<f64> {
        Ok(self.at_energy(energy)?.entropy)
    }
}

/// Maximal impurity `1 - tr rho^2` at mean energy `E`, attained by
/// `p_i = (a + b E_i)_+` in the eigenbasis.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEntropyMax {
    pub value: f64,
    pub a: f64,
    pub b: f64,
    /// Eigenvalue weights aligned with the sorted spectrum.
    pub weights: Vec<f64>,
}

pub fn impurity(weights: &[f64]) -> f64 {
    1.0 - weights.iter().map(|p| p * p).sum::<f64>()
}

/// Water-filling maximizer of the linear entropy on a spectrum sorted in
/// ascending order. The support is a set of lowest eigenvalue groups; the
/// two moment equations fix `(a, b)` on each candidate support.
pub fn linear_entropy_max_spectrum(spectrum: &[f64], energy: f64) -> Result<LinearEntropyMax> {
    check_spectrum(spectrum)?;
    if spectrum.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("spectrum must be sorted ascending".into()));
    }
    let d = spectrum.len();
    let e0 = spectrum[0];
    let e_max = spectrum[d - 1];
    let mean = spectrum.iter().sum::<f64>() / d as f64;
    let scale = (e_max - e0).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale.max(1.0);
    if energy < e0 - tol || energy > mean + tol {
        return Err(Error::EnergyOutOfRange { energy, lo: e0, hi: mean });
    }
    let group_tol = 1e-12 * scale.max(1.0);
    // End index of each group of equal eigenvalues.
    let mut ends = Vec::new();
    for i in 1..=d {
        if i == d || spectrum[i] - spectrum[i - 1] > group_tol {
            ends.push(i);
        }
    }
    if energy <= e0 + tol || ends.len() == 1 {
        let g = ends[0];
        let mut weights = vec![0.0; d];
        weights[..g].iter_mut().for_each(|p| *p = 1.0 / g as f64);
        if ends.len() == 1 {
            weights.iter_mut().for_each(|p| *p = 1.0 / d as f64);
        }
        return Ok(LinearEntropyMax { value: impurity(&weights), a: weights[0], b: 0.0, weights });
    }
    for &k in ends.iter().skip(1) {
        let sup = &spectrum[..k];
        let (s1, s2) = sup.iter().fold((0.0, 0.0), |(s1, s2), &e| (s1 + e, s2 + e * e));
        let kf = k as f64;
        let det = kf * s2 - s1 * s1;
        if det.abs() <= 1e-300 {
            continue;
        }
        let a = (s2 - energy * s1) / det;
        let b = (kf * energy - s1) / det;
        let feasible_support = sup.iter().all(|&e| a + b * e >= -tol);
        let inactive_ok = k == d || a + b * spectrum[k] <= tol;
        if feasible_support && inactive_ok {
            let weights: Vec<f64> = spectrum
                .iter()
                .enumerate()
                .map(|(i, &e)| if i < k { (a + b * e).max(0.0) } else { 0.0 })
                .collect();
            return Ok(LinearEntropyMax { value: impurity(&weights), a, b, weights });
        }
    }
    Err(Error::NoConvergence { what: "linear entropy water-filling", iterations: ends.len(), residual: f64::NAN })
}

/// Maximal linear entropy of states with `tr(rho H) = E`.
pub fn linear_entropy_max(h: &crate::linalg::HermitianOperator, energy: f64) -> Result<f64> {
    let ev = h.eigenvalues()?;
    Ok(linear_entropy_max_spectrum(&ev, energy)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: [f64; 6] = [-2.0, -1.0, -1.0, 0.5, 1.0, 3.0];

    #[test]
    fn infinite_temperature() {
        let g = gibbs_at(&SPEC, 0.0).unwrap();
        let d = SPEC.len() as f64;
        assert!((g.ln_z - d.ln()).abs() < 1e-15);
        assert!((g.energy - SPEC.iter().sum::<f64>() / d).abs() < 1e-15);
        assert!((g.entropy - d.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_temperature_limit() {
        let g = gibbs_at(&SPEC, 1e3).unwrap();
        assert!((g.energy + 2.0).abs() < 1e-12 && g.entropy < 1e-12);
        let g = gibbs_at(&[1.0, 1.0, 4.0], 1e3).unwrap();
        assert!((g.entropy - 2f64.ln()).abs() < 1e-12);
        assert!(gibbs_at(&[], 1.0).is_err());
    }

    #[test]
    fn beta_round_trip() {
        for beta in [0.1, 1.0, 10.0] {
            let e = gibbs_at(&SPEC, beta).unwrap().energy;
            let back = beta_from_energy(&SPEC, e).unwrap();
            assert!((back - beta).abs() < 1e-8 * beta.max(1.0), "{beta} -> {back}");
        }
        let mean = SPEC.iter().sum::<f64>() / 6.0;
        assert_eq!(beta_from_energy(&SPEC, mean).unwrap(), 0.0);
        assert!(beta_from_energy(&SPEC, -2.0).is_err());
        assert!(beta_from_energy(&SPEC, mean + 0.1).is_err());
    }

    #[test]
    fn shift_invariance() {
        let shifted: Vec<f64> = SPEC.iter().map(|x| x + 7.5).collect();
        let a = gibbs_at(&SPEC, 0.7).unwrap();
        let b = gibbs_at(&shifted, 0.7).unwrap();
        assert!((a.entropy - b.entropy).abs() < 1e-13);
        assert!((b.energy - a.energy - 7.5).abs() < 1e-13);
    }

    #[test]
    fn water_filling_cases() {
        let spec = [0.0, 1.0];
        let r = linear_entropy_max_spectrum(&spec, 0.25).unwrap();
        assert!((r.weights[0] - 0.75).abs() < 1e-14 && (r.value - 0.375).abs() < 1e-14);
        let mean = SPEC.iter().sum::<f64>() / 6.0;
        let r = linear_entropy_max_spectrum(&SPEC, mean).unwrap();
        assert!((r.value - (1.0 - 1.0 / 6.0)).abs() < 1e-12);
        let r = linear_entropy_max_spectrum(&SPEC, -1.9).unwrap();
        let energy: f64 = r.weights.iter().zip(&SPEC).map(|(p, e)| p * e).sum();
        assert!((energy + 1.9).abs() < 1e-10 && (r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let g = gibbs_weights(&SPEC, beta_from_energy(&SPEC, -1.9).unwrap());
        assert!(r.value >= impurity(&g) - 1e-12);
    }
}
