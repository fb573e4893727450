//! Hermitian eigendecomposition: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit-shift QL iterations.

use super::matrix::{Matrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `eigenvectors`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> Matrix {
        self.apply(|x| x)
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let w: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        weighted_projector_sum(&self.eigenvectors, &w)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

/// `sum_k w_k |v_k><v_k|` for the columns `v_k` of `vecs`.
pub fn weighted_projector_sum(vecs: &Matrix, w: &[f64]) -> Matrix {
    let n = vecs.rows();
    let mut out = Matrix::zeros(n, n);
    let cols: Vec<Vec<C64>> = (0..vecs.cols()).map(|k| vecs.column(k)).collect();
    for (k, col) in cols.iter().enumerate() {
        let wk = w[k];
        if wk == 0.0 {
            continue;
        }
        for i in 0..n {
            let a = col[i] * wk;
            if a == ZERO {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += a * col[j].conj();
            }
        }
    }
    out
}

const MAX_QL_SWEEPS: usize = 60;

/// Power of two bringing the largest entry of `m` close to one, so that
/// tiny or huge matrices neither underflow nor overflow. Exact in floating
/// point.
fn unit_scale(m: &Matrix) -> f64 {
    let a = m.max_abs();
    if a == 0.0 || !a.is_finite() {
        return 1.0;
    }
    2f64.powi(-(a.log2().round() as i32))
}

fn check_finite(m: &Matrix) -> Result<()> {
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eigh(m: &Matrix) -> Result<SpectralDecomposition> {
    check_finite(m)?;
    let s = unit_scale(m);
    let scaled = if s == 1.0 { m.clone() } else { m.scale(s) };
    let norm = scaled.frobenius_norm();
    let (mut d, mut e, qt) = tridiagonalize(scaled, true);
    let mut z = qt.expect("vectors requested");
    tql(&mut d, &mut e, Some(&mut z), norm)?;
    for x in &mut d {
        *x /= s;
    }
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    // `z[k]` holds eigenvector k as a contiguous row.
    let eigenvectors = Matrix::from_fn(n, n, |i, j| z[order[j]][i]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &Matrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    let s = unit_scale(m);
    let scaled = if s == 1.0 { m.clone() } else { m.scale(s) };
    let norm = scaled.frobenius_norm();
    let (mut d, mut e, _) = tridiagonalize(scaled, false);
    tql(&mut d, &mut e, None, norm)?;
    for x in &mut d {
        *x /= s;
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Reduces the Hermitian matrix to real tridiagonal form `(d, e)` where `e[i]`
/// couples `i` and `i + 1`. When requested, also returns the transposed
/// transformation: row `k` of the result is column `k` of `Q D`.
fn tridiagonalize(mut a: Matrix, want_vectors: bool) -> (Vec<f64>, Vec<f64>, Option<Vec<Vec<C64>>>) {
    assert!(a.is_square(), "eigendecomposition needs a square matrix");
    let n = a.rows();
    a.symmetrize();
    // Q^T stored as rows: qt[k][i] = Q[i][k].
    let mut qt: Option<Vec<Vec<C64>>> = want_vectors.then(|| {
        (0..n)
            .map(|k| {
                let mut row = vec![ZERO; n];
                row[k] = ONE;
                row
            })
            .collect()
    });
    let mut offdiag = vec![ZERO; n];
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];
    // Columns below this size are dropped: a reflector built from them
    // would lose orthogonality to underflow.
    let negligible = 1e-30 * a.max_abs();

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let alpha = (lo..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = a[(lo, k)];
        if alpha <= negligible {
            for i in lo..n {
                a[(i, k)] = ZERO;
                a[(k, i)] = ZERO;
            }
            offdiag[k] = ZERO;
            continue;
        }
        let tail_zero = (lo + 1..n).all(|i| a[(i, k)] == ZERO);
        if tail_zero {
            offdiag[k] = x0;
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let beta = -phase * alpha;
        for i in lo..n {
            v[i] = a[(i, k)];
        }
        v[lo] -= beta;
        let vnorm2: f64 = (lo..n).map(|i| v[i].norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // p = tau * A v on the trailing block.
        for i in lo..n {
            let mut acc = ZERO;
            for j in lo..n {
                acc += a[(i, j)] * v[j];
            }
            p[i] = acc * tau;
        }
        let vp: C64 = (lo..n).map(|i| v[i].conj() * p[i]).sum();
        let kfac = vp * (0.5 * tau);
        for i in lo..n {
            p[i] -= kfac * v[i];
        }
        // A <- A - v w^dagger - w v^dagger with w stored in p.
        for i in lo..n {
            let vi = v[i];
            let wi = p[i];
            for j in lo..n {
                let delta = vi * p[j].conj() + wi * v[j].conj();
                a[(i, j)] -= delta;
            }
        }
        a[(lo, k)] = beta;
        a[(k, lo)] = beta.conj();
        for i in lo + 1..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }
        offdiag[k] = beta;

        // Q <- Q H, i.e. for every row r of Q: Q[r,:] -= tau (Q[r,:] v) v^dagger.
        if let Some(qt) = qt.as_mut() {
            for r in 0..n {
                let mut s = ZERO;
                for i in lo..n {
                    s += qt[i][r] * v[i];
                }
                if s == ZERO {
                    continue;
                }
                let s = s * tau;
                for i in lo..n {
                    qt[i][r] -= s * v[i].conj();
                }
            }
        }
    }
    if n >= 2 {
        offdiag[n - 2] = a[(n - 1, n - 2)];
    }

    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    // Diagonal phase gauge making the off-diagonal real and non-negative.
    let mut delta = ONE;
    let mut phases = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let t = offdiag[k];
        let r = t.norm();
        e[k] = r;
        if r > 0.0 {
            delta *= t / r;
        }
        phases[k + 1] = delta;
    }
    if let Some(qt) = qt.as_mut() {
        for (k, row) in qt.iter_mut().enumerate() {
            let ph = phases[k];
            if ph != ONE {
                for z in row.iter_mut() {
                    *z *= ph;
                }
            }
        }
    }
    (d, e, qt)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. Rotations are applied
/// to the rows of `z` (each row is one basis vector).
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Vec<Vec<C64>>>, norm: f64) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let floor = 1e-15 * norm.max(f64::MIN_POSITIVE);
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                let residual = e.iter().map(|x| x.abs()).fold(0.0, f64::max);
                return Err(Error::NoConvergence {
                    what: "tridiagonal QL",
                    iterations: iter,
                    residual,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut(i + 1);
                    let zi = &mut lo[i];
                    let zi1 = &mut hi[0];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f2 = *b;
                        *b = *a * s + f2 * c;
                        *a = *a * c - f2 * s;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        m.symmetrize();
        m
    }

    #[test]
    fn pauli_x_spectrum() {
        let sx = Matrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let ev = eigvalsh(&sx).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extreme_scales() {
        let m = random_hermitian(12, 9);
        let reference = eigvalsh(&m).unwrap();
        for s in [1e-160, 1e-300, 1e150] {
            let vals = eigh(&m.scale(s)).unwrap().eigenvalues;
            for (a, b) in vals.iter().zip(&reference) {
                assert!((a / s - b).abs() < 1e-10, "scale {s}");
            }
        }
    }

    #[test]
    fn underflowing_couplings() {
        let mut m = Matrix::from_diag(&[0.975, 1.443, 1.443, 0.975]);
        m[(1, 2)] = C64::new(-0.468, 0.0);
        m[(2, 1)] = C64::new(-0.468, 0.0);
        for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
            m[(i, j)] = C64::new(1.0267870010290627e-154, 0.0);
        }
        let s = eigh(&m).unwrap();
        let expected = [0.975, 0.975, 1.443 - 0.468, 1.443 + 0.468];
        let mut e = expected.to_vec();
        e.sort_by(f64::total_cmp);
        assert!(s.eigenvalues.iter().zip(&e).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(s.reconstruct().sub(&m).max_abs() < 1e-12);
    }

    #[test]
    fn identity_spectrum() {
        let s = eigh(&Matrix::identity(7)).unwrap();
        assert!(s.eigenvalues.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn reconstruction_and_unitarity() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (8, 4), (31, 5), (64, 6)] {
            let m = random_hermitian(n, seed);
            let s = eigh(&m).unwrap();
            let err = s.reconstruct().sub(&m).frobenius_norm();
            assert!(err <= 1e-10 * m.frobenius_norm().max(1.0), "n={n} err={err}");
            let v = &s.eigenvectors;
            let gram = v.adjoint().matmul(v);
            assert!(gram.sub(&Matrix::identity(n)).max_abs() < 1e-10);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let vals = eigvalsh(&m).unwrap();
            for (a, b) in vals.iter().zip(&s.eigenvalues) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn already_diagonal_and_degenerate() {
        let m = Matrix::from_diag(&[3.0, -1.0, 3.0, 0.0]);
        let s = eigh(&m).unwrap();
        assert_eq!(s.eigenvalues.len(), 4);
        let expect = [-1.0, 0.0, 3.0, 3.0];
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
