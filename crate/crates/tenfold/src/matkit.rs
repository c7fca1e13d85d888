//! Dense complex linear algebra kernels and the tolerance policy.
//!
//! Every rank decision in the crate goes through [`nullspace`] or
//! [`nullspace_real`], and every eigen-cluster decision through
//! [`eig_unitary`] or [`cluster_values`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;

/// Eigenvalues closer than this are merged into one cluster.
pub const CLUSTER_TOL: f64 = 1e-7;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Rank threshold: singular values below `rel * sigma_max + abs` count as zero.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0 && abs > 0.0) {
            return Err(Error::schema("tolerance", "rel and abs must be positive"));
        }
        Ok(Tolerance { rel, abs })
    }

    fn cutoff(&self, sigma_max: f64) -> f64 {
        self.rel * sigma_max + self.abs
    }
}

/// Deterministic generator for a (seed, stream) pair.
pub fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

pub fn conj(a: &CMatrix) -> CMatrix {
    a.map(|z| z.conj())
}

pub fn fro(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Block diagonal matrix from a list of square blocks.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(n, m);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Concatenate matrices with equal row count side by side.
pub fn hstack(cols: &[&CMatrix]) -> CMatrix {
    let rows = cols.first().map_or(0, |m| m.nrows());
    let total: usize = cols.iter().map(|m| m.ncols()).sum();
    let mut out = zeros(rows, total);
    let mut at = 0;
    for m in cols {
        out.view_mut((0, at), (rows, m.ncols())).copy_from(*m);
        at += m.ncols();
    }
    out
}

pub fn from_columns(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut out = zeros(rows, cols.len());
    for (j, v) in cols.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    fro(&(u.adjoint() * u - eye(u.ncols())))
}

pub fn check_square(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::Dimension(format!("{what} must be square and nonempty, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(())
}

pub fn check_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    check_square(u, "unitary")?;
    let d = unitarity_defect(u);
    if d > tol * (u.nrows() as f64).sqrt().max(1.0) {
        return Err(Error::NotUnitary { norm: d });
    }
    Ok(())
}

/// Singular value decomposition `a = U diag(s) Vᴴ` with full square U and V,
/// singular values in descending order.
pub fn svd(a: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    if !is_finite(a) {
        return Err(Error::Degenerate("non-finite entries in svd input".into()));
    }
    let f = faer::Mat::<C64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let d = f.svd().map_err(|e| Error::Degenerate(format!("svd did not converge: {e:?}")))?;
    let (u, v) = (d.U(), d.V());
    let s = d.S().column_vector();
    let k = a.nrows().min(a.ncols());
    Ok((
        CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]),
        (0..k).map(|i| s[i].re).collect(),
        CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)]),
    ))
}

/// Dense product through faer, single-threaded so results are reproducible.
pub fn mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "mul: inner dimensions differ");
    let mut out = zeros(a.nrows(), b.ncols());
    let lhs = faer::MatRef::from_column_major_slice(a.as_slice(), a.nrows(), a.ncols());
    let rhs = faer::MatRef::from_column_major_slice(b.as_slice(), b.nrows(), b.ncols());
    let (r, k) = (out.nrows(), out.ncols());
    let dst = faer::MatMut::from_column_major_slice_mut(out.as_mut_slice(), r, k);
    faer::linalg::matmul::matmul(dst, faer::Accum::Replace, lhs, rhs, ONE, faer::Par::Seq);
    out
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    let f = faer::Mat::<C64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let s = f.singular_values().map_err(|e| Error::Degenerate(format!("svd did not converge: {e:?}")))?;
    Ok(s)
}

/// Orthonormal kernel basis of a real matrix.
pub fn nullspace_real(a: &RMatrix, tol: Tolerance) -> Vec<DVector<f64>> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Square the system up: compress tall inputs through QR, pad short ones.
    let sq = if a.nrows() > n {
        let f = faer::Mat::<f64>::from_fn(a.nrows(), n, |i, j| a[(i, j)]);
        let r = f.qr().R().to_owned();
        RMatrix::from_fn(n, n, |i, j| if i <= j { r[(i, j)] } else { 0.0 })
    } else {
        let mut p = RMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    };
    let f = faer::Mat::<f64>::from_fn(n, n, |i, j| sq[(i, j)]);
    let d = match f.svd() {
        Ok(d) => d,
        Err(_) => return Vec::new(),
    };
    let s = d.S().column_vector();
    let v = d.V();
    let smax = if n > 0 { s[0] } else { 0.0 };
    let cut = tol.cutoff(smax);
    (0..n).filter(|&i| s[i] <= cut).map(|i| DVector::from_fn(n, |r, _| v[(r, i)])).collect()
}

/// Orthonormal basis of `{x : a x = 0}`.
///
/// With `realified` set, `a` is read as a real-linear map from real
/// parameters (its columns) to complex outputs; the system solved is
/// `[Re a; Im a] x = 0` and the returned vectors have zero imaginary part.
pub fn nullspace(a: &CMatrix, tol: Tolerance, realified: bool) -> Result<Vec<CVector>> {
    if a.ncols() == 0 {
        return Err(Error::Dimension("nullspace of a matrix with no columns".into()));
    }
    if !is_finite(a) {
        return Err(Error::Degenerate("non-finite entries in nullspace input".into()));
    }
    if realified {
        let r = realify_rows(a);
        return Ok(nullspace_real(&r, tol).into_iter().map(|v| v.map(|x| c(x, 0.0))).collect());
    }
    let n = a.ncols();
    let (_, sv, v) = svd(a)?;
    let smax = sv.first().cloned().unwrap_or(0.0);
    let cut = tol.cutoff(smax);
    Ok((0..n).filter(|&i| sv.get(i).is_none_or(|s| *s <= cut)).map(|i| v.column(i).into_owned()).collect())
}

/// Stack real and imaginary parts of a complex matrix row-wise.
pub fn realify_rows(a: &CMatrix) -> RMatrix {
    let (r, n) = a.shape();
    let mut out = RMatrix::zeros(2 * r, n);
    for i in 0..r {
        for j in 0..n {
            out[(i, j)] = a[(i, j)].re;
            out[(r + i, j)] = a[(i, j)].im;
        }
    }
    out
}

pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    fro(&(h - h.adjoint()))
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors.
pub fn eigh(h: &CMatrix, tol: Tolerance) -> Result<(Vec<f64>, CMatrix)> {
    check_square(h, "eigh input")?;
    let norm = fro(h);
    let defect = hermiticity_defect(h);
    let bound = tol.rel * norm + tol.abs;
    if defect > bound {
        return Err(Error::NotHermitian { norm: defect, bound });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let n = h.nrows();
    let f = faer::Mat::<C64>::from_fn(n, n, |i, j| sym[(i, j)]);
    let eig = f
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Degenerate(format!("eigensolver did not converge: {e:?}")))?;
    let (s, u) = (eig.S().column_vector(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let vals = order.iter().map(|&i| s[i].re).collect();
    Ok((vals, CMatrix::from_fn(n, n, |r, k| u[(r, order[k])])))
}

/// Haar unitary from a seeded complex Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> Result<CMatrix> {
    random_unitary_with(n, &mut rng(seed, 0))
}

pub fn random_unitary_with<R: Rng>(n: usize, r: &mut R) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Dimension("random_unitary needs n >= 1".into()));
    }
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = r.sample(StandardNormal);
        let im: f64 = r.sample(StandardNormal);
        c(re, im) / 2f64.sqrt()
    });
    let qr = z.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..n {
        let d = rr[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    Ok(q)
}

/// One eigenspace of a normal operator.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub value: C64,
    pub basis: CMatrix,
}

impl Cluster {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Group complex values into clusters of points within `CLUSTER_TOL` of
/// each other (single linkage). Returns index lists.
pub fn cluster_values(vals: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = vals.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (vals[i] - vals[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Clustered spectral decomposition of a unitary matrix.
///
/// Diagonalizes a generic Hermitian combination of the real and imaginary
/// parts, reads eigenvalues off as Rayleigh quotients and merges values
/// within `CLUSTER_TOL`. Clusters are ordered by eigenvalue argument.
pub fn eig_unitary(u: &CMatrix, tol: Tolerance) -> Result<Vec<Cluster>> {
    check_square(u, "eig_unitary input")?;
    let d = unitarity_defect(u);
    if d > 1e-6 * (u.nrows() as f64).sqrt() {
        return Err(Error::NotUnitary { norm: d });
    }
    let n = u.nrows();
    let herm_part = (u + u.adjoint()).scale(0.5);
    let skew_part = (u - u.adjoint()) * c(0.0, -0.5);
    let weights = [(0.754_877_666_2, 0.569_840_290_9), (0.3, 0.953_939_201_4), (0.9, -0.435_889_894_4)];
    for (a, b) in weights {
        let k = herm_part.scale(a) + skew_part.scale(b);
        let (_, vecs) = eigh(&k, tol)?;
        let vals: Vec<C64> = (0..n)
            .map(|j| {
                let v = vecs.column(j);
                (v.adjoint() * u * v)[(0, 0)]
            })
            .collect();
        let residual = (0..n)
            .map(|j| {
                let v = vecs.column(j).into_owned();
                (u * &v - &v * vals[j]).norm()
            })
            .fold(0.0, f64::max);
        if residual > 1e-6 {
            continue;
        }
        let groups = cluster_values(&vals, CLUSTER_TOL);
        let mut clusters: Vec<Cluster> = groups
            .into_iter()
            .map(|g| {
                let mean = g.iter().map(|&i| vals[i]).sum::<C64>() / (g.len() as f64);
                let cols: Vec<CVector> = g.iter().map(|&i| vecs.column(i).into_owned()).collect();
                Cluster { value: mean / mean.norm(), basis: from_columns(n, &cols) }
            })
            .collect();
        clusters.sort_by(|x, y| x.value.arg().total_cmp(&y.value.arg()));
        return Ok(clusters);
    }
    Err(Error::Degenerate("eig_unitary could not separate eigenspaces".into()))
}

/// Orthonormal basis for the column span of `a` (rank decided by `tol`).
pub fn orth(a: &CMatrix, tol: Tolerance) -> CMatrix {
    if a.ncols() == 0 {
        return zeros(a.nrows(), 0);
    }
    let (u, sv, _) = match svd(a) {
        Ok(x) => x,
        Err(_) => return zeros(a.nrows(), 0),
    };
    let smax = sv.first().cloned().unwrap_or(0.0);
    let cut = tol.cutoff(smax);
    let cols: Vec<CVector> = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cut && smax > tol.abs)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    from_columns(a.nrows(), &cols)
}

/// Orthonormal basis of the Hermitian n x n matrices under the trace form.
pub fn hermitian_basis(n: usize) -> Vec<CMatrix> {
    let s = 1.0 / 2f64.sqrt();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = zeros(n, n);
        m[(i, i)] = ONE;
        out.push(m);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = zeros(n, n);
            m[(i, j)] = c(s, 0.0);
            m[(j, i)] = c(s, 0.0);
            out.push(m);
            let mut m = zeros(n, n);
            m[(i, j)] = c(0.0, s);
            m[(j, i)] = c(0.0, -s);
            out.push(m);
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn expm(a: &CMatrix) -> CMatrix {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let theta13 = 5.371920351148152;
    let s = if norm1 > theta13 { (norm1 / theta13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(0.5f64.powi(s));
    let id = eye(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (a6.scale(B[13]) + a4.scale(B[11]) + a2.scale(B[9]))
        + a6.scale(B[7])
        + a4.scale(B[5])
        + a2.scale(B[3])
        + id.scale(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (a6.scale(B[12]) + a4.scale(B[10]) + a2.scale(B[8]))
        + a6.scale(B[6])
        + a4.scale(B[4])
        + a2.scale(B[2])
        + id.scale(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Pade denominator is invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}
