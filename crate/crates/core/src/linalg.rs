//! Small dense complex linear-algebra helpers on top of `nalgebra`.
//!
//! Spectral decompositions (Hermitian eigen, SVD, general eigen) are
//! delegated to `faer`: the complex `SymmetricEigen`, `SVD` and `Schur` of
//! `nalgebra` return inaccurate vectors or stall on some inputs. `faer` in
//! turn mishandles some nearly scalar inputs, so every decomposition is
//! checked a posteriori and retried on a unitary similarity if needed.

use faer::{Mat, Side};

use crate::{CMat, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Complex matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
}

pub fn diag(values: &[C64]) -> CMat {
    let n = values.len();
    let mut m = zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

fn to_faer(m: &CMat) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Backward-error acceptance for decompositions, relative to `1 + ‖M‖_F`.
const DECOMPOSITION_CHECK: f64 = 1e-10;

/// Unitary similarities tried in turn when a decomposition fails its
/// a-posteriori check: the identity, then the Q factors of fixed dense
/// complex matrices.
fn probe_unitary(n: usize, attempt: usize) -> CMat {
    if attempt == 0 {
        return eye(n);
    }
    let a = attempt as f64;
    let x = CMat::from_fn(n, n, |i, j| {
        let t = (1.0 + i as f64) * 0.7548776662 * a + (1.0 + j as f64) * 0.5698402910;
        c((t * 12.9898).sin(), (t * 78.233).cos())
    });
    x.qr().q()
}

const ATTEMPTS: usize = 4;

/// Runs `decompose` on `QᴴMQ` for the probe unitaries until `accept`
/// (applied to the result mapped back by `Q`) succeeds.
fn robust<T>(
    m: &CMat,
    what: &str,
    decompose: impl Fn(&CMat) -> Option<T>,
    back: impl Fn(T, &CMat) -> T,
    accept: impl Fn(&T) -> bool,
) -> T {
    for attempt in 0..ATTEMPTS {
        let q = probe_unitary(m.nrows(), attempt);
        let conjugated = if attempt == 0 {
            m.clone()
        } else {
            q.adjoint() * m * &q
        };
        if let Some(result) = decompose(&conjugated) {
            let result = back(result, &q);
            if accept(&result) {
                return result;
            }
        }
    }
    panic!(
        "{what} failed its accuracy check for a {}x{} matrix",
        m.nrows(),
        m.ncols()
    )
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let fm2 = frob(m).powi(2);
    // Rows are rotated instead of a similarity so rectangular input works.
    let mut attempt = 0;
    loop {
        let q = probe_unitary(m.nrows(), attempt);
        let rotated = if attempt == 0 { m.clone() } else { q * m };
        if let Ok(sv) = to_faer(&rotated).singular_values() {
            let sum: f64 = sv.iter().map(|s| s * s).sum();
            if (sum - fm2).abs() <= DECOMPOSITION_CHECK * (1.0 + fm2)
                && sv.iter().all(|s| *s >= 0.0)
            {
                return sv;
            }
        }
        attempt += 1;
        assert!(
            attempt < ATTEMPTS,
            "SVD failed its accuracy check for a {}x{} matrix",
            m.nrows(),
            m.ncols()
        );
    }
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a matrix with at least as many rows as columns.
pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(f64::INFINITY)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `‖x − y‖_F / (1 + max(‖x‖_F, ‖y‖_F))`.
pub fn rel_diff(x: &CMat, y: &CMat) -> f64 {
    if x.shape() != y.shape() {
        return f64::INFINITY;
    }
    frob(&(x - y)) / (1.0 + frob(x).max(frob(y)))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Columns of the returned matrix are the eigenvectors.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = hermitian_part(m);
    let bound = DECOMPOSITION_CHECK * (1.0 + frob(&h));
    robust(
        &h,
        "Hermitian eigendecomposition",
        |x| {
            let eig = to_faer(x).self_adjoint_eigen(Side::Lower).ok()?;
            let (s, u) = (eig.S().column_vector(), eig.U());
            // faer sorts ascending.
            let values: Vec<f64> = (0..n).rev().map(|k| s[k].re).collect();
            Some((values, CMat::from_fn(n, n, |i, k| u[(i, n - 1 - k)])))
        },
        |(values, vectors), q| (values, q * vectors),
        |(values, vectors): &(Vec<f64>, CMat)| {
            let d = diag(&values.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
            frob(&(vectors * d * vectors.adjoint() - &h)) <= bound
                && frob(&(vectors.adjoint() * vectors - eye(n))) <= DECOMPOSITION_CHECK * n as f64
        },
    )
}

/// Eigenvalues and unit (not necessarily orthogonal) eigenvectors of a
/// general square matrix.
///
/// Accepted when every pair has residual `‖Mv − λv‖` and the eigenvalue sum
/// matches the trace, both within `DECOMPOSITION_CHECK · (1 + ‖M‖_F)`.
pub fn eigen(m: &CMat) -> (Vec<C64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let bound = DECOMPOSITION_CHECK * (1.0 + frob(m));
    robust(
        m,
        "eigendecomposition",
        |x| {
            let eig = to_faer(x).eigen().ok()?;
            let (s, u) = (eig.S().column_vector(), eig.U());
            Some((
                (0..n).map(|k| s[k]).collect(),
                CMat::from_fn(n, n, |i, k| u[(i, k)]),
            ))
        },
        |(values, vectors), q| (values, q * vectors),
        |(values, vectors): &(Vec<C64>, CMat)| {
            let trace: C64 = (0..n).map(|i| m[(i, i)]).sum();
            let sum: C64 = values.iter().sum();
            (trace - sum).norm() <= bound * n as f64
                && (0..n).all(|k| {
                    let v = vectors.column(k);
                    let norm = v.norm();
                    norm > 0.5 && (m * v - v * values[k]).norm() <= bound * norm
                })
        },
    )
}

pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    eigen(m).0
}

/// A group of nearby values produced by [`cluster`].
#[derive(Debug, Clone)]
pub struct Cluster {
    pub center: C64,
    pub members: Vec<usize>,
}

/// Single-linkage clustering at `radius`. Clusters are returned in order of
/// their first member; centers are member means.
pub fn cluster(values: &[C64], radius: f64) -> Vec<Cluster> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut j = i;
        while label[j] != r {
            let next = label[j];
            label[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut root_to_cluster = std::collections::HashMap::new();
    for i in 0..n {
        let r = find(&mut label, i);
        let k = *root_to_cluster.entry(r).or_insert_with(|| {
            clusters.push(Cluster {
                center: C64::new(0.0, 0.0),
                members: Vec::new(),
            });
            clusters.len() - 1
        });
        clusters[k].members.push(i);
    }
    for cl in &mut clusters {
        let sum: C64 = cl.members.iter().map(|&i| values[i]).sum();
        cl.center = sum / cl.members.len() as f64;
    }
    clusters
}

/// Clustered eigenvalues with the radius scaled by `1 + max|λ|`.
pub fn clustered_eigenvalues(m: &CMat, rel_radius: f64) -> Vec<C64> {
    let ev = eigenvalues(m);
    let scale = 1.0 + ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    cluster(&ev, rel_radius * scale)
        .into_iter()
        .map(|cl| cl.center)
        .collect()
}

/// Solve `A X = B` for square `A` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

pub fn inverse(a: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(zeros(0, 0));
    }
    a.clone().try_inverse()
}

/// `Σ coeffs[k] · M^k` by Horner's rule.
pub fn poly_at_matrix(coeffs: &[C64], m: &CMat) -> CMat {
    let n = m.nrows();
    let mut acc = zeros(n, n);
    for &ck in coeffs.iter().rev() {
        acc = &acc * m;
        for i in 0..n {
            acc[(i, i)] += ck;
        }
    }
    acc
}

/// Orthonormal basis of the column space of `m` (numerical rank: singular
/// values above `rel_tol · σ_max`).
///
/// Computed from the Hermitian eigenproblem of `[[0, M], [Mᴴ, 0]]`, whose
/// eigenpairs are `(±σ, [u; ±v]/√2)`; this avoids squaring the singular
/// values and does not rely on the singular vectors of the complex SVD,
/// which are unreliable for rank-deficient input.
pub fn range_basis(m: &CMat, rel_tol: f64) -> CMat {
    let (r, cols) = m.shape();
    if r == 0 || cols == 0 {
        return zeros(r, 0);
    }
    let mut aug = zeros(r + cols, r + cols);
    aug.view_mut((0, r), (r, cols)).copy_from(m);
    aug.view_mut((r, 0), (cols, r)).copy_from(&m.adjoint());
    let (values, vectors) = hermitian_eigen(&aug);
    let smax = values.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..values.len())
        .filter(|&k| values[k] > rel_tol * smax && values[k] > 0.0)
        .collect();
    if keep.is_empty() {
        return zeros(r, 0);
    }
    let mut basis = zeros(r, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        basis.set_column(col, &vectors.column(k).rows(0, r));
    }
    // Re-orthonormalize (the u-parts are orthogonal with norm 1/√2 in exact arithmetic).
    basis.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_merges_chains() {
        let v = [c(0.0, 0.0), c(1e-9, 0.0), c(2e-9, 0.0), c(1.0, 0.0)];
        let cl = cluster(&v, 1.5e-9);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].members, vec![0, 1, 2]);
        assert!((cl[0].center - c(1e-9, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn horner_matches_explicit_powers() {
        let m = from_real_rows(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let p = poly_at_matrix(&[c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)], &m);
        let expected = eye(2) + (&m * &m) * c(2.0, 0.0);
        assert!(rel_diff(&p, &expected) < 1e-15);
    }

    #[test]
    fn range_basis_of_rank_deficient_complex_matrix() {
        // a non-orthogonal rank-3 projection-like matrix on C^5
        let x = CMat::from_fn(5, 3, |i, j| {
            c(
                (i * 3 + j) as f64 * 0.37 - 1.0,
                ((i + 2 * j) % 4) as f64 * 0.5,
            )
        });
        let y = CMat::from_fn(3, 5, |i, j| {
            c(((i + j) % 3) as f64 - 0.4, (i * j) as f64 * 0.25)
        });
        let m = &x * &y;
        let q = range_basis(&m, 1e-10);
        assert_eq!(q.ncols(), 3);
        assert!(frob(&(q.adjoint() * &q - eye(3))) < 1e-12);
        let residual = &m - &q * (q.adjoint() * &m);
        assert!(frob(&residual) < 1e-12 * frob(&m));
        assert_eq!(range_basis(&zeros(3, 3), 1e-10).ncols(), 0);
    }

    #[test]
    fn eigenvalues_of_empty_nilpotent_and_cyclic() {
        assert!(eigenvalues(&zeros(0, 0)).is_empty());
        let mut shift = zeros(3, 3);
        for i in 1..3 {
            shift[(i, i - 1)] = c(1.0, 0.0);
        }
        // A 3x3 Jordan block: eigenvalues perturbed at order eps^(1/3).
        assert!(eigenvalues(&shift).iter().all(|z| z.norm() < 1e-4));
        shift[(0, 2)] = c(1.0, 0.0);
        let (values, vectors) = eigen(&shift);
        for (k, lam) in values.iter().enumerate() {
            assert!((lam.powu(3) - c(1.0, 0.0)).norm() < 1e-12);
            let v = vectors.column(k);
            assert!((&shift * v - v * *lam).norm() < 1e-12);
        }
    }

    #[test]
    fn eigen_of_nearly_scalar_matrix() {
        // Rounding-level off-diagonal entries once made the backend return 0, 0.
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                c(2.000000000000001, -1.0000000000000004),
                c(0.0, -2.220446049250313e-16),
                c(-1.6653345369377348e-16, 0.0),
                c(2.000000000000001, -1.0000000000000004),
            ],
        );
        for z in eigenvalues(&m) {
            assert!((z - c(2.0, -1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigen_reconstructs_clustered_spectra() {
        // Unitary from the QR of a fixed complex matrix; spectrum with
        // repeated values and a zero block.
        let n = 11;
        let x = CMat::from_fn(n, n, |i, j| {
            c(
                ((3 * i + 7 * j) % 11) as f64 - 5.0,
                ((5 * i + 2 * j) % 7) as f64 - 3.0,
            )
        });
        let u = x.qr().q();
        let spectrum = [
            24.0, 1.25, 1.25, 0.5625, 0.40625, 0.40625, 0.40625, 0.3, 0.0, 0.0, 0.0,
        ];
        let d = diag(&spectrum.map(|v| c(v, 0.0)));
        let h = &u * d * u.adjoint();
        let (values, vectors) = hermitian_eigen(&h);
        for (got, want) in values.iter().zip(spectrum) {
            assert!((got - want).abs() < 1e-12);
        }
        let dv = diag(&values.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
        assert!(rel_diff(&(&vectors * dv * vectors.adjoint()), &h) < 1e-14);
        assert!(rel_diff(&(vectors.adjoint() * &vectors), &eye(n)) < 1e-14);
        let sv = singular_values(&h);
        assert!((sv[0] - 24.0).abs() < 1e-12 && sv[n - 1] < 1e-12);
    }
}
