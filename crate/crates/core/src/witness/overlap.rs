use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sampling::haar_vector;
use super::{SeparableClass, Witness};
use crate::error::{Error, Result};
use crate::linalg::matrix::{vec_dot, vec_norm};
use crate::linalg::{eigh, eigvalsh, Bipartition, HermitianOperator, Matrix, C64};

/// Restarts of the alternating optimization for multi-state projectors.
pub const ALPHA_RESTARTS: usize = 50;
const ALPHA_SWEEPS: usize = 500;

/// Strides of a mixed-radix index with subsystem 0 most significant.
fn strides(local_dims: &[usize]) -> Vec<usize> {
    let n = local_dims.len();
    let mut s = vec![1; n];
    for k in (0..n.saturating_sub(1)).rev() {
        s[k] = s[k + 1] * local_dims[k + 1];
    }
    s
}

/// Reshapes `psi` into a `d_A x d_B` matrix along `cut`.
pub fn bipartite_matrix(psi: &[C64], local_dims: &[usize], cut: &Bipartition) -> Result<Matrix> {
    cut.validate_for(local_dims)?;
    let dim: usize = local_dims.iter().product();
    if psi.len() != dim {
        return Err(Error::Dimension(format!("vector length {} vs dim {dim}", psi.len())));
    }
    let a = cut.subset();
    let b = cut.complement(local_dims.len());
    let da: usize = a.iter().map(|&k| local_dims[k]).product();
    let db: usize = b.iter().map(|&k| local_dims[k]).product();
    let st = strides(local_dims);
    let mut m = Matrix::zeros(da, db);
    for (idx, &amp) in psi.iter().enumerate() {
        let digit = |k: usize| (idx / st[k]) % local_dims[k];
        let row = a.iter().fold(0, |acc, &k| acc * local_dims[k] + digit(k));
        let col = b.iter().fold(0, |acc, &k| acc * local_dims[k] + digit(k));
        m[(row, col)] = amp;
    }
    Ok(m)
}

/// Largest squared Schmidt coefficient of `psi` across `cut`.
pub fn max_schmidt_overlap(psi: &[C64], local_dims: &[usize], cut: &Bipartition) -> Result<f64> {
    let m = bipartite_matrix(psi, local_dims, cut)?;
    let gram = if m.rows() <= m.cols() { m.matmul(&m.adjoint()) } else { m.adjoint().matmul(&m) };
    let ev = eigvalsh(&gram)?;
    Ok(ev.last().copied().unwrap_or(0.0).clamp(0.0, 1.0))
}

/// Outcome of the overlap computation for a projector witness.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorAlpha {
    pub alpha: f64,
    /// True when the value is exact: a single state (Schmidt decomposition)
    /// or states whose reduced supports are mutually orthogonal on one side
    /// of every cut.
    pub certified: bool,
    pub restarts: usize,
}

fn check_orthonormal(states: &[Vec<C64>]) -> Result<()> {
    let mut defect: f64 = 0.0;
    for (i, u) in states.iter().enumerate() {
        for (j, v) in states.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((vec_dot(u, v) - C64::new(target, 0.0)).norm());
        }
    }
    if defect > 1e-10 {
        return Err(Error::NotOrthonormal { defect });
    }
    Ok(())
}

/// Whether the reduced states of all inputs on one side of the cut have
/// pairwise orthogonal supports.
fn orthogonal_supports(mats: &[Matrix]) -> bool {
    let side = |left: bool| -> bool {
        let reduced: Vec<Matrix> = mats
            .iter()
            .map(|m| if left { m.matmul(&m.adjoint()) } else { m.adjoint().matmul(m) })
            .collect();
        (0..reduced.len()).all(|i| (i + 1..reduced.len()).all(|j| reduced[i].trace_product_re(&reduced[j]).abs() < 1e-12))
    };
    side(true) || side(false)
}

/// `max <a b| P |a b>` over unit `a`, `b` for `P = sum_k |psi_k><psi_k|`,
/// with each state given as its `d_A x d_B` matrix.
fn alternating_overlap(mats: &[Matrix], restarts: usize, seed: u64) -> Result<f64> {
    let (da, db) = (mats[0].rows(), mats[0].cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..restarts {
        let mut a = haar_vector(da, &mut rng);
        let mut last = -1.0;
        for _ in 0..ALPHA_SWEEPS {
            // Effective operator on B: sum_k (M_k^T a*) (M_k^T a*)^dagger.
            let vb: Vec<Vec<C64>> = mats
                .iter()
                .map(|m| (0..db).map(|j| (0..da).map(|i| a[i].conj() * m[(i, j)]).sum()).collect())
                .collect();
            let b = top_eigvec(&vb)?.1;
            let va: Vec<Vec<C64>> = mats
                .iter()
                .map(|m| (0..da).map(|i| (0..db).map(|j| m[(i, j)] * b[j].conj()).sum()).collect())
                .collect();
            let (val, a_new) = top_eigvec(&va)?;
            a = a_new;
            if (val - last).abs() < 1e-14 {
                last = val;
                break;
            }
            last = val;
        }
        best = best.max(last);
    }
    Ok(best.min(1.0))
}

/// Top eigenpair of `sum_k v_k v_k^dagger`.
fn top_eigvec(vs: &[Vec<C64>]) -> Result<(f64, Vec<C64>)> {
    let d = vs[0].len();
    if vs.len() == 1 {
        let mut v = vs[0].clone();
        let n = vec_norm(&v);
        if n == 0.0 {
            v[0] = C64::new(1.0, 0.0);
            return Ok((0.0, v));
        }
        v.iter_mut().for_each(|z| *z /= n);
        return Ok((n * n, v));
    }
    let mut g = Matrix::zeros(d, d);
    for v in vs {
        for i in 0..d {
            for j in 0..d {
                g[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    let s = eigh(&g)?;
    Ok((s.eigenvalues[d - 1], s.eigenvector(d - 1)))
}

/// `alpha` of the projector onto the span of `states`: the largest overlap
/// of the projector with a pure state that is product across one of the
/// cuts.
pub fn projector_alpha(states: &[Vec<C64>], local_dims: &[usize], cuts: &[Bipartition], seed: u64) -> Result<ProjectorAlpha> {
    if states.is_empty() || cuts.is_empty() {
        return Err(Error::InvalidParameter("projector witness needs at least one state and one cut".into()));
    }
    check_orthonormal(states)?;
    let mut alpha: f64 = 0.0;
    let mut certified = true;
    let mut restarts = 0;
    for (c, cut) in cuts.iter().enumerate() {
        let value = if states.len() == 1 {
            max_schmidt_overlap(&states[0], local_dims, cut)?
        } else {
            let mats = states
                .iter()
                .map(|s| bipartite_matrix(s, local_dims, cut))
                .collect::<Result<Vec<_>>>()?;
            if orthogonal_supports(&mats) {
                let mut best: f64 = 0.0;
                for s in states {
                    best = best.max(max_schmidt_overlap(s, local_dims, cut)?);
                }
                best
            } else {
                certified = false;
                restarts = ALPHA_RESTARTS;
                alternating_overlap(&mats, ALPHA_RESTARTS, seed.wrapping_add(c as u64))?
            }
        };
        alpha = alpha.max(value);
    }
    Ok(ProjectorAlpha { alpha, certified, restarts })
}

/// `W = alpha 1 - sum_k |psi_k><psi_k|` with `alpha` from [`projector_alpha`].
///
/// `cuts = None` means all bipartitions.
pub fn projector_witness(states: &[Vec<C64>], local_dims: &[usize], cuts: Option<&[Bipartition]>, seed: u64) -> Result<(Witness, ProjectorAlpha)> {
    let all;
    let cuts = match cuts {
        Some(c) => c,
        None => {
            all = Bipartition::all(local_dims.len())?;
            &all
        }
    };
    let info = projector_alpha(states, local_dims, cuts, seed)?;
    let dim: usize = local_dims.iter().product();
    let mut m = Matrix::identity(dim).scale(info.alpha);
    for s in states {
        m = m.sub(&Matrix::outer(s, s));
    }
    let op = HermitianOperator::new(m, local_dims.to_vec())?;
    let w = Witness::new(op, format!("projector_{}_states", states.len()), SeparableClass::ProductAcross(cuts.to_vec()));
    Ok((w, info))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::states::{basis_state, bell_staircase, dicke_state};

    fn singlet() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, 0.0)]
    }

    #[test]
    fn schmidt_cases() {
        let cut = Bipartition::new(vec![0], 2).unwrap();
        assert!((max_schmidt_overlap(&singlet(), &[2, 2], &cut).unwrap() - 0.5).abs() < 1e-14);
        let prod = basis_state(3, &[1]);
        let cut3 = Bipartition::new(vec![0, 2], 3).unwrap();
        assert!((max_schmidt_overlap(&prod, &[2, 2, 2], &cut3).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schmidt_of_dicke_half_cut() {
        // |D^4_2> across {0,1}|{2,3}: coefficients (1, 4, 1)/6 -> 2/3.
        let psi = dicke_state(4, 2).unwrap();
        let cut = Bipartition::new(vec![0, 1], 4).unwrap();
        assert!((max_schmidt_overlap(&psi, &[2; 4], &cut).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn projector_witness_singlet_and_product() {
        let cut = [Bipartition::new(vec![0], 2).unwrap()];
        let (w, info) = projector_witness(&[singlet()], &[2, 2], Some(&cut), 1).unwrap();
        assert!((info.alpha - 0.5).abs() < 1e-14 && info.certified);
        assert!((w.operator.expectation(&singlet()) + 0.5).abs() < 1e-14);
        let (_, info) = projector_witness(&[basis_state(3, &[])], &[2, 2, 2], None, 1).unwrap();
        assert!((info.alpha - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bell_staircase_alphas() {
        let s = bell_staircase(4).unwrap();
        let cut = [Bipartition::new(vec![0, 1], 4).unwrap()];
        let states: Vec<Vec<C64>> = (0..4).map(|k| s.eigenvector(k)).collect();
        for psi in &states {
            assert!((max_schmidt_overlap(psi, &[2; 4], &cut[0]).unwrap() - 0.25).abs() < 1e-12);
        }
        // The span of the first d states contains a product of Fourier
        // vectors, so the block projector reaches overlap one.
        let info = projector_alpha(&states, &[2; 4], &cut, 7).unwrap();
        assert!(!info.certified);
        assert!((info.alpha - 1.0).abs() < 1e-9, "alpha = {}", info.alpha);
    }

    #[test]
    fn orthogonal_support_shortcut() {
        // |00> and |11> have orthogonal reduced supports on both sides.
        let states = vec![basis_state(2, &[]), basis_state(2, &[0, 1])];
        let cut = [Bipartition::new(vec![0], 2).unwrap()];
        let info = projector_alpha(&states, &[2, 2], &cut, 0).unwrap();
        assert!(info.certified && (info.alpha - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_orthonormal() {
        let a = basis_state(2, &[]);
        let cut = [Bipartition::new(vec![0], 2).unwrap()];
        assert!(matches!(projector_alpha(&[a.clone(), a], &[2, 2], &cut, 0), Err(Error::NotOrthonormal { .. })));
    }
}
