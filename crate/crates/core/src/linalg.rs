//! Self-adjoint eigenproblems.
//!
//! Dense matrices are reduced to real symmetric tridiagonal form with
//! `nalgebra`'s Householder tridiagonalization. The tridiagonal problem is
//! solved by an implicit QL iteration with Wilkinson-type shifts, which can
//! accumulate any set of rows of the eigenvector matrix: only the first row
//! when that is all a caller needs, all rows for full decompositions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

const MAX_SWEEPS: usize = 60;

/// Eigen-decomposition failure; carries a human-readable reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoConvergence(pub String);

/// Eigenvalues and, per eigenvalue, the first component of its unit
/// eigenvector, sorted by eigenvalue.
#[derive(Clone, Debug)]
pub struct FirstRowSpectrum {
    pub eigenvalues: Vec<f64>,
    pub first_components: Vec<f64>,
}

/// Rows of the eigenvector matrix, stored row-major, updated by every
/// plane rotation of the QL sweep.
struct TrackedRows<'a> {
    data: &'a mut [f64],
    n: usize,
}

impl TrackedRows<'_> {
    fn rotate(&mut self, i: usize, s: f64, c: f64) {
        for row in self.data.chunks_exact_mut(self.n) {
            let f = row[i + 1];
            row[i + 1] = s * row[i] + c * f;
            row[i] = c * row[i] - s * f;
        }
    }
}

fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<TrackedRows<'_>>) -> Result<(), NoConvergence> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    debug_assert_eq!(e.len(), n);
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(NoConvergence(format!(
                    "QL iteration stalled at index {l} after {MAX_SWEEPS} sweeps"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
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
                if let Some(z) = z.as_mut() {
                    z.rotate(i, s, c);
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

fn check_finite(values: &[f64], what: &str) -> Result<(), NoConvergence> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NoConvergence(format!("non-finite entry in {what}")))
    }
}

/// Sorted eigenvalues of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() + 1 == diag.len()`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, NoConvergence> {
    assert_eq!(off.len() + 1, diag.len().max(1));
    check_finite(diag, "diagonal")?;
    check_finite(off, "off-diagonal")?;
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_unstable_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues plus first eigenvector components of a symmetric
/// tridiagonal matrix, in O(n²).
pub fn tridiagonal_first_row(diag: &[f64], off: &[f64]) -> Result<FirstRowSpectrum, NoConvergence> {
    assert_eq!(off.len() + 1, diag.len().max(1));
    check_finite(diag, "diagonal")?;
    check_finite(off, "off-diagonal")?;
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(TrackedRows { data: &mut z, n }))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(FirstRowSpectrum {
        eigenvalues: order.iter().map(|&k| d[k]).collect(),
        first_components: order.iter().map(|&k| z[k]).collect(),
    })
}

/// Eigenvalues and first eigenvector components of a dense real symmetric
/// matrix: Householder reduction (which fixes the first basis vector)
/// followed by [`tridiagonal_first_row`].
pub fn symmetric_first_row(m: DMatrix<f64>) -> Result<FirstRowSpectrum, NoConvergence> {
    let n = m.nrows();
    if n == 1 {
        return Ok(FirstRowSpectrum {
            eigenvalues: vec![m[(0, 0)]],
            first_components: vec![1.0],
        });
    }
    check_finite(m.as_slice(), "matrix")?;
    let (diag, off) = nalgebra::linalg::SymmetricTridiagonal::new(m).unpack_tridiagonal();
    tridiagonal_first_row(diag.as_slice(), off.as_slice())
}

/// Sorted eigenvalues and row-major eigenvector matrix (columns are
/// eigenvectors) of a symmetric tridiagonal matrix.
fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>), NoConvergence> {
    check_finite(diag, "diagonal")?;
    check_finite(off, "off-diagonal")?;
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(TrackedRows { data: &mut z, n }))?;
    let values = DVector::from_vec(d);
    let vectors = DMatrix::from_row_slice(n, n, &z);
    Ok(sorted_columns(values, vectors))
}

/// Sorted eigenvalues of a dense real symmetric matrix.
pub fn symmetric_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>, NoConvergence> {
    check_finite(m.as_slice(), "matrix")?;
    if m.nrows() <= 1 {
        return Ok(m.iter().copied().collect());
    }
    let (diag, off) = nalgebra::linalg::SymmetricTridiagonal::new(m).unpack_tridiagonal();
    tridiagonal_eigenvalues(diag.as_slice(), off.as_slice())
}

/// Full eigen-decomposition of a dense real symmetric matrix, sorted by
/// eigenvalue; eigenvectors are the columns.
pub fn symmetric_eigen(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), NoConvergence> {
    check_finite(m.as_slice(), "matrix")?;
    let n = m.nrows();
    if n <= 1 {
        return Ok((m.iter().copied().collect(), DMatrix::identity(n, n)));
    }
    let a = m.clone();
    let q = nalgebra::linalg::SymmetricTridiagonal::new(m).q();
    let t = q.transpose() * a * &q;
    // the packed off-diagonal loses its signs; take them from QᵀAQ
    let diag: Vec<f64> = (0..n).map(|i| t[(i, i)]).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| t[(i + 1, i)]).collect();
    let (values, z) = tridiagonal_eigen(&diag, &off)?;
    Ok((values, q * z))
}

/// Full eigen-decomposition of a dense complex Hermitian matrix, sorted by
/// eigenvalue; eigenvectors are the columns.
pub fn hermitian_eigen(m: DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>), NoConvergence> {
    check_finite_complex(&m)?;
    let n = m.nrows();
    if n <= 1 {
        return Ok((m.iter().map(|z| z.re).collect(), DMatrix::identity(n, n)));
    }
    let a = m.clone();
    let q = nalgebra::linalg::SymmetricTridiagonal::new(m).q();
    let t = q.adjoint() * a * &q;
    // D† T D is real for D = diag(1, φ₀, φ₀φ₁, ...) with φᵢ the phase of T[i+1, i]
    let mut phase = vec![Complex64::new(1.0, 0.0); n];
    let mut off = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let x = t[(i + 1, i)];
        let r = x.norm();
        off.push(r);
        phase[i + 1] = if r > 0.0 { phase[i] * (x / r) } else { phase[i] };
    }
    let diag: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
    let (values, z) = tridiagonal_eigen(&diag, &off)?;
    let qd = DMatrix::from_fn(n, n, |r, c| q[(r, c)] * phase[c]);
    let zc = z.map(|x| Complex64::new(x, 0.0));
    Ok((values, qd * zc))
}

/// Sorted eigenvalues of a dense complex Hermitian matrix.
pub fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Result<Vec<f64>, NoConvergence> {
    check_finite_complex(&m)?;
    if m.nrows() <= 1 {
        return Ok(m.iter().map(|z| z.re).collect());
    }
    let (diag, off) = nalgebra::linalg::SymmetricTridiagonal::new(m).unpack_tridiagonal();
    tridiagonal_eigenvalues(diag.as_slice(), off.as_slice())
}

fn check_finite_complex(m: &DMatrix<Complex64>) -> Result<(), NoConvergence> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(NoConvergence("non-finite entry in matrix".into()))
    }
}

fn sorted_columns<T: nalgebra::Scalar + Copy>(
    values: DVector<f64>,
    vectors: DMatrix<T>,
) -> (Vec<f64>, DMatrix<T>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = DMatrix::from_fn(vectors.nrows(), n, |r, c| vectors[(r, order[c])]);
    (order.iter().map(|&k| values[k]).collect(), sorted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tridiagonal(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let e = (0..n.saturating_sub(1))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        (d, e)
    }

    fn dense(d: &[f64], e: &[f64]) -> DMatrix<f64> {
        let n = d.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                d[i]
            } else if i + 1 == j {
                e[i]
            } else if j + 1 == i {
                e[j]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn tridiagonal_matches_dense_solver() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (60, 4)] {
            let (d, e) = random_tridiagonal(n, seed);
            let ql = tridiagonal_eigenvalues(&d, &e).unwrap();
            let reference = symmetric_eigenvalues(dense(&d, &e)).unwrap();
            for (a, b) in ql.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn first_row_matches_dense_eigenvectors() {
        let (d, e) = random_tridiagonal(25, 9);
        let fr = tridiagonal_first_row(&d, &e).unwrap();
        let (vals, vecs) = symmetric_eigen(dense(&d, &e)).unwrap();
        for k in 0..25 {
            assert!((fr.eigenvalues[k] - vals[k]).abs() < 1e-12);
            assert!((fr.first_components[k].abs() - vecs[(0, k)].abs()).abs() < 1e-10);
        }
        let norm: f64 = fr.first_components.iter().map(|c| c * c).sum();
        assert!((norm - 1.0).abs() < 1e-13);
    }

    #[test]
    fn householder_route_keeps_first_basis_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 30;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        let fr = symmetric_first_row(m.clone()).unwrap();
        let (vals, vecs) = symmetric_eigen(m).unwrap();
        for k in 0..n {
            assert!((fr.eigenvalues[k] - vals[k]).abs() < 1e-12);
            assert!((fr.first_components[k].abs() - vecs[(0, k)].abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_residuals_within_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in 0..i {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let norm = m.norm();
        let (vals, vecs) = hermitian_eigen(m.clone()).unwrap();
        for (k, &val) in vals.iter().enumerate() {
            let x = vecs.column(k);
            let r = &m * x - x * Complex64::new(val, 0.0);
            assert!(r.norm() <= 100.0 * n as f64 * f64::EPSILON * norm);
        }
        let gram = vecs.adjoint() * &vecs;
        assert!((gram - DMatrix::<Complex64>::identity(n, n)).norm() < 1e-12);

        let real = DMatrix::from_fn(n, n, |i, j| m[(i, j)].re);
        let norm = real.norm();
        let (vals, vecs) = symmetric_eigen(real.clone()).unwrap();
        for (k, &val) in vals.iter().enumerate() {
            let x = vecs.column(k);
            let r = &real * x - x * val;
            assert!(r.norm() <= 100.0 * n as f64 * f64::EPSILON * norm);
        }
        assert!((vecs.transpose() * &vecs - DMatrix::<f64>::identity(n, n)).norm() < 1e-12);
        for (a, b) in vals.iter().zip(symmetric_eigenvalues(real).unwrap()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        assert!(tridiagonal_eigenvalues(&[1.0, f64::NAN], &[0.5]).is_err());
    }

    #[test]
    fn diagonal_input_is_returned_sorted() {
        let ev = tridiagonal_eigenvalues(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(ev, vec![-1.0, 2.0, 3.0]);
    }
}
