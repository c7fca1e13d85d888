//! Brute-force Hamiltonian spaces, Gaussian sampling and level statistics.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matkit::{self, c, conj, fro, CMatrix, Tolerance, C64, ZERO};
use crate::nambu::{NambuBlock, SymmetrySetup};

/// The linear conditions defining good Hamiltonians on some space.
#[derive(Clone, Debug)]
pub struct Constraints {
    pub gram: CMatrix,
    pub generators: Vec<CMatrix>,
    pub anti_cores: Vec<CMatrix>,
}

impl Constraints {
    pub fn from_setup(setup: &SymmetrySetup) -> Self {
        Constraints {
            gram: setup.nambu.gram_b.clone(),
            generators: setup.rep_w.generators.clone(),
            anti_cores: setup.antiunitaries.iter().map(|t| t.full_core.clone()).collect(),
        }
    }

    pub fn from_block(block: &NambuBlock) -> Self {
        Constraints {
            gram: block.gram_b.clone(),
            generators: block.generators.clone(),
            anti_cores: block.antiunitary_cores.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    fn residuals(&self, x: &CMatrix) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(1 + self.generators.len() + self.anti_cores.len());
        out.push(x.transpose() * &self.gram + &self.gram * x);
        for g in &self.generators {
            out.push(x * g - g * x);
        }
        for u in &self.anti_cores {
            out.push(u * conj(x) - x * u);
        }
        out
    }

    /// Largest constraint violation of `x`, including non-Hermiticity.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        self.residuals(x).iter().map(fro).fold(matkit::hermiticity_defect(x), f64::max)
    }
}

/// An orthonormal (trace form) real basis of good Hamiltonians.
#[derive(Clone, Debug)]
pub struct HamiltonianSpace {
    pub basis: Vec<CMatrix>,
    pub constraints: Constraints,
}

impl HamiltonianSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Solve all constraints at once as one real-linear system over the N²
/// real parameters of a Hermitian matrix.
pub fn solve(constraints: Constraints, tol: Tolerance) -> Result<HamiltonianSpace> {
    let n = constraints.dim();
    let herm = matkit::hermitian_basis(n);
    let per = 1 + constraints.generators.len() + constraints.anti_cores.len();
    let rows = per * n * n;
    let mut a = matkit::zeros(rows, herm.len());
    for (k, b) in herm.iter().enumerate() {
        let mut r = 0;
        for m in constraints.residuals(b) {
            for v in m.iter() {
                a[(r, k)] = *v;
                r += 1;
            }
        }
    }
    let null = matkit::nullspace(&a, tol, true)?;
    let basis = null
        .iter()
        .map(|v| herm.iter().zip(v.iter()).fold(matkit::zeros(n, n), |acc, (b, w)| acc + b * c(w.re, 0.0)))
        .collect();
    Ok(HamiltonianSpace { basis, constraints })
}

/// Brute-force oracle on the whole Nambu space.
pub fn hamiltonian_space(setup: &SymmetrySetup, tol: Tolerance) -> Result<HamiltonianSpace> {
    solve(Constraints::from_setup(setup), tol)
}

/// Brute-force oracle on one block, using the restricted structures.
pub fn block_space(block: &NambuBlock, tol: Tolerance) -> Result<HamiltonianSpace> {
    solve(Constraints::from_block(block), tol)
}

fn check_sample(constraints: &Constraints, h: &CMatrix) -> Result<()> {
    let r = constraints.residual(h);
    if r > 1e-8 * (1.0 + fro(h)) {
        return Err(Error::Degenerate(format!("sample violates its constraints by {r:.3e}")));
    }
    Ok(())
}

/// `count` Gaussian samples Σ gᵢ Xᵢ, sample i drawn from its own stream.
pub fn sample(space: &HamiltonianSpace, count: usize, seed: u64) -> Result<Vec<CMatrix>> {
    if space.basis.is_empty() {
        return Err(Error::EmptySpace);
    }
    let n = space.constraints.dim();
    (0..count)
        .map(|i| {
            let mut r = matkit::rng(seed, i as u64);
            let h = space.basis.iter().fold(matkit::zeros(n, n), |acc, b| {
                let g: f64 = r.sample(StandardNormal);
                acc + b * c(g, 0.0)
            });
            check_sample(&space.constraints, &h)?;
            Ok(h)
        })
        .collect()
}

/// Gaussian Hermitian matrix, isotropic under the trace form.
pub fn gaussian_hermitian<R: Rng>(n: usize, r: &mut R) -> CMatrix {
    let mut x = matkit::zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        x[(i, i)] = c(r.sample(StandardNormal), 0.0);
        for j in i + 1..n {
            let a: f64 = r.sample(StandardNormal);
            let b: f64 = r.sample(StandardNormal);
            x[(i, j)] = c(a * s, b * s);
            x[(j, i)] = c(a * s, -b * s);
        }
    }
    x
}

/// Gaussian real symmetric matrix with the same normalization.
pub fn gaussian_real_symmetric<R: Rng>(n: usize, r: &mut R) -> CMatrix {
    let mut x = matkit::zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        x[(i, i)] = c(r.sample(StandardNormal), 0.0);
        for j in i + 1..n {
            let a: f64 = r.sample(StandardNormal);
            x[(i, j)] = c(a * s, 0.0);
            x[(j, i)] = c(a * s, 0.0);
        }
    }
    x
}

/// A linear map stored densely or, when every row has one nonzero entry,
/// as that entry and its column.
#[derive(Clone, Debug)]
enum Lin {
    Mono { col: Vec<usize>, val: Vec<C64> },
    Dense(CMatrix),
}

impl Lin {
    fn new(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut col = Vec::with_capacity(n);
        let mut val = Vec::with_capacity(n);
        let mut seen = vec![false; m.ncols()];
        for i in 0..n {
            let nz: Vec<usize> = (0..m.ncols()).filter(|&j| m[(i, j)] != ZERO).collect();
            if nz.len() != 1 || seen[nz[0]] {
                return Lin::Dense(m.clone());
            }
            seen[nz[0]] = true;
            col.push(nz[0]);
            val.push(m[(i, nz[0])]);
        }
        Lin::Mono { col, val }
    }

    /// M x
    fn left(&self, x: &CMatrix) -> CMatrix {
        match self {
            Lin::Dense(m) => matkit::mul(m, x),
            Lin::Mono { col, val } => CMatrix::from_fn(col.len(), x.ncols(), |i, j| val[i] * x[(col[i], j)]),
        }
    }

    /// x M
    fn right(&self, x: &CMatrix) -> CMatrix {
        match self {
            Lin::Dense(m) => matkit::mul(x, m),
            Lin::Mono { col, val } => {
                let mut out = matkit::zeros(x.nrows(), col.len());
                for (i, (&j, &v)) in col.iter().zip(val).enumerate() {
                    for r in 0..x.nrows() {
                        out[(r, j)] = x[(r, i)] * v;
                    }
                }
                out
            }
        }
    }

    fn adjoint(&self) -> Self {
        match self {
            Lin::Dense(m) => Lin::Dense(m.adjoint()),
            Lin::Mono { col, val } => {
                let mut c2 = vec![0; col.len()];
                let mut v2 = vec![ZERO; col.len()];
                for (i, (&j, &v)) in col.iter().zip(val).enumerate() {
                    c2[j] = i;
                    v2[j] = v.conj();
                }
                Lin::Mono { col: c2, val: v2 }
            }
        }
    }
}

/// Orthogonal projection onto the commutant of one generator: keep the
/// blocks of X between equal eigenvalue clusters, in the eigenbasis.
#[derive(Clone, Debug)]
struct Averager {
    basis: Option<(Lin, Lin)>,
    label: Vec<usize>,
}

impl Averager {
    fn new(g: &CMatrix) -> Result<Option<Self>> {
        let n = g.nrows();
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || g[(i, j)] == ZERO));
        let (vals, basis) = if is_diag {
            ((0..n).map(|i| g[(i, i)]).collect::<Vec<_>>(), None)
        } else {
            let cl = matkit::eig_unitary(g, Tolerance::default())?;
            let mut vals = Vec::new();
            let e = matkit::hstack(&cl.iter().map(|c| &c.basis).collect::<Vec<_>>());
            for c in &cl {
                vals.extend(std::iter::repeat_n(c.value, c.dim()));
            }
            let e = Lin::new(&e);
            let ed = e.adjoint();
            (vals, Some((e, ed)))
        };
        let groups = matkit::cluster_values(&vals, matkit::CLUSTER_TOL);
        if groups.len() < 2 {
            return Ok(None);
        }
        let mut label = vec![0; n];
        for (k, grp) in groups.iter().enumerate() {
            for &i in grp {
                label[i] = k;
            }
        }
        Ok(Some(Averager { basis, label }))
    }

    fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut y = match &self.basis {
            Some((e, ed)) => e.right(&ed.left(x)),
            None => x.clone(),
        };
        for i in 0..y.nrows() {
            for j in 0..y.ncols() {
                if self.label[i] != self.label[j] {
                    y[(i, j)] = ZERO;
                }
            }
        }
        match &self.basis {
            Some((e, ed)) => ed.right(&e.left(&y)),
            None => y,
        }
    }
}

/// Sampling by orthogonal projection of an isotropic Gaussian, for spaces
/// too large for the brute-force basis. The law is the same as [`sample`].
pub struct ProjectionSampler {
    n: usize,
    gram: Lin,
    gram_inv: Lin,
    generators: Vec<Lin>,
    averagers: Vec<Averager>,
    /// (U, U†) per antiunitary.
    anti: Vec<(Lin, Lin)>,
}

impl ProjectionSampler {
    pub fn new(constraints: Constraints) -> Result<Self> {
        let gram_inv = constraints
            .gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("bilinear form is singular".into()))?;
        let mut averagers = Vec::new();
        for g in &constraints.generators {
            if let Some(a) = Averager::new(g)? {
                averagers.push(a);
            }
        }
        Ok(ProjectionSampler {
            n: constraints.dim(),
            gram: Lin::new(&constraints.gram),
            gram_inv: Lin::new(&gram_inv),
            generators: constraints.generators.iter().map(Lin::new).collect(),
            averagers,
            anti: constraints.anti_cores.iter().map(|u| (Lin::new(u), Lin::new(&u.adjoint()))).collect(),
        })
    }

    fn project_once(&self, x: &CMatrix) -> CMatrix {
        let mut y = x.clone();
        for a in &self.averagers {
            y = a.apply(&y);
        }
        y = (&y - self.gram_inv.left(&self.gram.right(&y.transpose()))) * c(0.5, 0.0);
        for (u, ud) in &self.anti {
            y = (&y + ud.right(&u.left(&conj(&y)))) * c(0.5, 0.0);
        }
        y
    }

    fn residual(&self, x: &CMatrix) -> f64 {
        let mut worst = matkit::hermiticity_defect(x);
        worst = worst.max(fro(&(self.gram.left(x) + self.gram.right(&x.transpose()))));
        for g in &self.generators {
            worst = worst.max(fro(&(g.right(x) - g.left(x))));
        }
        for (u, _) in &self.anti {
            worst = worst.max(fro(&(u.left(&conj(x)) - u.right(x))));
        }
        worst
    }

    pub fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        let mut y = self.project_once(x);
        for _ in 0..500 {
            let h = (&y + y.adjoint()) * c(0.5, 0.0);
            if self.residual(&h) <= 1e-10 * (1.0 + fro(&h)) {
                return Ok(h);
            }
            y = self.project_once(&h);
        }
        Err(Error::Degenerate("alternating projections did not converge".into()))
    }

    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<CMatrix>> {
        (0..count)
            .map(|i| {
                let mut r = matkit::rng(seed, i as u64);
                let h = self.project(&gaussian_hermitian(self.n, &mut r))?;
                if fro(&h) < 1e-12 {
                    return Err(Error::EmptySpace);
                }
                Ok(h)
            })
            .collect()
    }
}

/// Largest Nambu dimension for which `draw` picks basis sampling by default.
pub const BASIS_LIMIT: usize = 24;

/// Draw `count` Hamiltonians. `projection` forces a sampler; `None` picks the
/// basis sampler for small setups and the projection sampler otherwise.
pub fn draw(setup: &SymmetrySetup, tol: Tolerance, count: usize, seed: u64, projection: Option<bool>) -> Result<Vec<CMatrix>> {
    if projection.unwrap_or(2 * setup.nambu.n > BASIS_LIMIT) {
        ProjectionSampler::new(Constraints::from_setup(setup))?.sample(count, seed)
    } else {
        sample(&hamiltonian_space(setup, tol)?, count, seed)
    }
}

/// Eigenvalues of H on one polarization sector when H preserves V, otherwise
/// the upper half of the spectrum (the lower half mirrors it).
pub fn sector_levels(h: &CMatrix, n: usize) -> Result<Vec<f64>> {
    let off = fro(&h.view((0, n), (n, n)).into_owned());
    if off <= 1e-10 * (1.0 + fro(h)) {
        let (v, _) = matkit::eigh(&h.view((0, 0), (n, n)).into_owned(), Tolerance::default())?;
        return Ok(v);
    }
    let (v, _) = matkit::eigh(h, Tolerance::default())?;
    Ok(v[n..].to_vec())
}

/// Consecutive gap ratios min(s_i, s_{i+1}) / max(s_i, s_{i+1}) of sorted levels.
/// Pairs of vanishing gaps carry no information and are skipped.
pub fn gap_ratios(levels: &[f64]) -> Vec<f64> {
    let mut l = levels.to_vec();
    l.sort_by(f64::total_cmp);
    let scale = l.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let gaps: Vec<f64> = l.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            if b <= 1e-12 * scale {
                None
            } else {
                Some(a / b)
            }
        })
        .collect()
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct GapRatioStats {
    pub mean_r: f64,
    pub per_sample: Vec<f64>,
    pub n_ratios: usize,
    /// Spectra excluded because every level coincided.
    pub excluded: usize,
    /// (bin_left, density) over [0, 1], normalized to unit mass.
    pub histogram: Vec<(f64, f64)>,
}

pub const MIN_SAMPLES: usize = 10;
pub const MIN_LEVELS: usize = 8;

pub fn gap_ratio_stats(spectra: &[Vec<f64>], bins: usize) -> Result<GapRatioStats> {
    if spectra.len() < MIN_SAMPLES {
        return Err(Error::schema("count", format!("need at least {MIN_SAMPLES} samples, got {}", spectra.len())));
    }
    if let Some(s) = spectra.iter().find(|s| s.len() < MIN_LEVELS) {
        return Err(Error::schema("size", format!("need at least {MIN_LEVELS} levels per spectrum, got {}", s.len())));
    }
    let bins = bins.max(1);
    let mut all = Vec::new();
    let mut per_sample = Vec::new();
    let mut excluded = 0;
    for s in spectra {
        let r = gap_ratios(s);
        if r.is_empty() {
            excluded += 1;
            continue;
        }
        per_sample.push(r.iter().sum::<f64>() / r.len() as f64);
        all.extend(r);
    }
    if all.is_empty() {
        return Err(Error::Degenerate("every spectrum is fully degenerate".into()));
    }
    let mean_r = all.iter().sum::<f64>() / all.len() as f64;
    let width = 1.0 / bins as f64;
    let mut counts = vec![0usize; bins];
    for &r in &all {
        counts[((r / width) as usize).min(bins - 1)] += 1;
    }
    let histogram = counts.iter().enumerate().map(|(i, &k)| (i as f64 * width, k as f64 / (all.len() as f64 * width))).collect();
    Ok(GapRatioStats { mean_r, per_sample, n_ratios: all.len(), excluded, histogram })
}

/// How far exp(-i t H) is from respecting G₀, b and the antiunitaries.
pub fn evolution_defect(setup: &SymmetrySetup, h: &CMatrix, t: f64) -> f64 {
    let u = matkit::expm(&(h * c(0.0, -t)));
    let u_back = matkit::expm(&(h * c(0.0, t)));
    let g = &setup.nambu.gram_b;
    let mut worst = fro(&(u.transpose() * g * &u - g));
    for x in &setup.rep_w.generators {
        worst = worst.max(fro(&(&u * x - x * &u)));
    }
    for a in &setup.antiunitaries {
        // T e^{-itH} T⁻¹ = e^{itH}
        worst = worst.max(fro(&(&a.full_core * conj(&u) - &u_back * &a.full_core)));
    }
    worst
}
