//! Unitary representations given by generator matrices: commutants,
//! isotypic components, equivariant maps and the real/quaternionic/complex
//! trichotomy.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matkit::{self, c, eigh, fro, kron, CMatrix, Tolerance, CLUSTER_TOL};

/// A compact group presented by unitary generator matrices on a carrier space.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryRep {
    pub dim: usize,
    pub generators: Vec<CMatrix>,
}

impl UnitaryRep {
    pub fn new(generators: Vec<CMatrix>) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::schema("g0_generators", "generator list is empty"))?;
        let dim = first.nrows();
        for (i, g) in generators.iter().enumerate() {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::Dimension(format!("generator {i} is {}x{}, expected {dim}x{dim}", g.nrows(), g.ncols())));
            }
            matkit::check_unitary(g, 1e-8).map_err(|e| match e {
                Error::NotUnitary { norm } => Error::Structural(format!("generator {i} is not unitary (defect {norm:.3e})")),
                other => other,
            })?;
        }
        Ok(UnitaryRep { dim, generators })
    }

    /// The trivial group on `dim` dimensions.
    pub fn trivial(dim: usize) -> Self {
        UnitaryRep { dim, generators: vec![matkit::eye(dim)] }
    }

    pub fn conjugate(&self) -> Self {
        UnitaryRep { dim: self.dim, generators: self.generators.iter().map(matkit::conj).collect() }
    }

    /// Restriction to the invariant subspace spanned by the orthonormal columns of `q`.
    pub fn restrict(&self, q: &CMatrix) -> Self {
        UnitaryRep { dim: q.ncols(), generators: self.generators.iter().map(|g| q.adjoint() * g * q).collect() }
    }

    /// Conjugate every generator by a unitary change of basis.
    pub fn transform(&self, u: &CMatrix) -> Self {
        UnitaryRep { dim: self.dim, generators: self.generators.iter().map(|g| u * g * u.adjoint()).collect() }
    }

    /// Direct sum with another representation of the same abstract generators.
    pub fn direct_sum(&self, other: &UnitaryRep) -> Result<Self> {
        if self.generators.len() != other.generators.len() {
            return Err(Error::Dimension("direct sum of reps with different generator counts".into()));
        }
        let gens = self.generators.iter().zip(&other.generators).map(|(a, b)| matkit::block_diag(&[a, b])).collect();
        Ok(UnitaryRep { dim: self.dim + other.dim, generators: gens })
    }

    /// Tensor product with a multiplicity space on which the group acts trivially.
    pub fn with_multiplicity(&self, m: usize) -> Self {
        UnitaryRep { dim: self.dim * m, generators: self.generators.iter().map(|g| kron(g, &matkit::eye(m))).collect() }
    }
}

/// One isotypic component of a representation.
#[derive(Clone, Debug)]
pub struct IsotypicComponent {
    pub projector: CMatrix,
    /// Orthonormal basis of the component, one irreducible copy after another.
    pub basis: CMatrix,
    pub dim_component: usize,
    pub irrep_dim: usize,
    pub multiplicity: usize,
    /// Orthonormal basis of one embedded copy of the irreducible representation.
    pub irrep_basis: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualityKind {
    Complex,
    Real,
    Quaternionic,
}

#[derive(Clone, Debug)]
pub struct DualityClass {
    pub kind: DualityKind,
    pub psi: Option<CMatrix>,
}

fn reshape_col_major(v: &matkit::CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Basis of `{S : rep2(g) S = S rep1(g)}` for every generator.
pub fn equivariant_hom(rep1: &UnitaryRep, rep2: &UnitaryRep) -> Result<Vec<CMatrix>> {
    if rep1.generators.len() != rep2.generators.len() {
        return Err(Error::Dimension(format!(
            "generator counts differ: {} vs {}",
            rep1.generators.len(),
            rep2.generators.len()
        )));
    }
    let (a, b) = (rep1.dim, rep2.dim);
    let mut rows = matkit::zeros(a * b * rep1.generators.len(), a * b);
    for (k, (g1, g2)) in rep1.generators.iter().zip(&rep2.generators).enumerate() {
        // vec(g2 S - S g1) = (I (x) g2 - g1^t (x) I) vec S
        let blk = kron(&matkit::eye(a), g2) - kron(&g1.transpose(), &matkit::eye(b));
        rows.view_mut((k * a * b, 0), (a * b, a * b)).copy_from(&blk);
    }
    let ns = matkit::nullspace(&rows, Tolerance::default(), false)?;
    Ok(ns.iter().map(|v| reshape_col_major(v, b, a)).collect())
}

/// Basis of the commutant, orthonormal under the trace inner product.
pub fn commutant(rep: &UnitaryRep) -> Vec<CMatrix> {
    equivariant_hom(rep, rep).expect("same generator count")
}

fn is_irreducible(rep: &UnitaryRep) -> bool {
    commutant(rep).len() == 1
}

/// Split a representation into isotypic components.
///
/// A random Hermitian element of the commutant is diagonalized; generically
/// each eigenspace is one irreducible copy. Copies are then grouped by
/// testing equivalence through [`equivariant_hom`]. Probes with
/// near-degenerate spectra are retried with a fresh stream.
pub fn isotypic_decompose(rep: &UnitaryRep, seed: u64) -> Result<Vec<IsotypicComponent>> {
    let comm = commutant(rep);
    let n = rep.dim;
    const RETRIES: u64 = 8;
    for attempt in 0..=RETRIES {
        let mut r = matkit::rng(seed, 1000 + attempt);
        let mut x = matkit::zeros(n, n);
        for b in &comm {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            x += b * c(re, im);
        }
        let h = (&x + x.adjoint()).scale(0.5);
        let scale = fro(&h).max(1.0);
        let (vals, vecs) = eigh(&h, Tolerance::default())?;
        let as_c: Vec<Complex64> = vals.iter().map(|v| c(*v / scale, 0.0)).collect();
        let groups = matkit::cluster_values(&as_c, CLUSTER_TOL);
        // Reject probes whose distinct eigenvalues sit too close together.
        let mut centers: Vec<f64> = groups.iter().map(|g| as_c[g[0]].re).collect();
        centers.sort_by(f64::total_cmp);
        if centers.windows(2).any(|w| w[1] - w[0] < 1e-5) {
            continue;
        }
        let pieces: Vec<CMatrix> = groups
            .iter()
            .map(|g| {
                let cols: Vec<_> = g.iter().map(|&i| vecs.column(i).into_owned()).collect();
                matkit::from_columns(n, &cols)
            })
            .collect();
        if !pieces.iter().all(|q| is_irreducible(&rep.restrict(q))) {
            continue;
        }
        return assemble_components(rep, pieces);
    }
    Err(Error::RetryExhausted(RETRIES as usize + 1))
}

fn assemble_components(rep: &UnitaryRep, pieces: Vec<CMatrix>) -> Result<Vec<IsotypicComponent>> {
    let n = rep.dim;
    let restricted: Vec<UnitaryRep> = pieces.iter().map(|q| rep.restrict(q)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for i in 0..pieces.len() {
        for cls in classes.iter_mut() {
            let j = cls[0];
            if pieces[j].ncols() == pieces[i].ncols() && !equivariant_hom(&restricted[j], &restricted[i])?.is_empty() {
                cls.push(i);
                continue 'outer;
            }
        }
        classes.push(vec![i]);
    }
    let mut comps = Vec::new();
    for cls in classes {
        let d = pieces[cls[0]].ncols();
        let m = cls.len();
        let refs: Vec<&CMatrix> = cls.iter().map(|&i| &pieces[i]).collect();
        let basis = matkit::hstack(&refs);
        let projector = &basis * basis.adjoint();
        let tr = projector.trace().re;
        if (tr - (m * d) as f64).abs() > 1e-6 {
            return Err(Error::Reconciliation(format!("projector trace {tr:.6} does not equal m*d = {}", m * d)));
        }
        let cdim = commutant(&rep.restrict(&basis)).len();
        if cdim != m * m {
            return Err(Error::Reconciliation(format!("restricted commutant has dimension {cdim}, expected m^2 = {}", m * m)));
        }
        comps.push(IsotypicComponent {
            projector,
            basis,
            dim_component: m * d,
            irrep_dim: d,
            multiplicity: m,
            irrep_basis: pieces[cls[0]].clone(),
        });
    }
    let total: CMatrix = comps.iter().fold(matkit::zeros(n, n), |acc, c| acc + &c.projector);
    if fro(&(total - matkit::eye(n))) > 1e-8 {
        return Err(Error::Reconciliation("isotypic projectors do not sum to the identity".into()));
    }
    comps.sort_by(|a, b| {
        let key = |c: &IsotypicComponent| {
            let t = (c.projector.clone() * &rep.generators[0]).trace() / (c.dim_component as f64);
            (c.irrep_dim, c.multiplicity, (t.re * 1e6).round() as i64, (t.im * 1e6).round() as i64)
        };
        key(a).cmp(&key(b))
    });
    Ok(comps)
}

/// Decide whether an irreducible representation is complex, real or quaternionic.
pub fn duality_class(rep: &UnitaryRep) -> Result<DualityClass> {
    if !is_irreducible(rep) {
        return Err(Error::structural("duality_class needs an irreducible representation"));
    }
    // psi rho(g) = conj(rho(g)) psi, i.e. psi in Hom(rho, conj rho).
    let homs = equivariant_hom(rep, &rep.conjugate())?;
    match homs.len() {
        0 => Ok(DualityClass { kind: DualityKind::Complex, psi: None }),
        1 => {
            let psi = &homs[0] / c(fro(&homs[0]), 0.0);
            // Fix the phase so the largest entry is real.
            let big = psi.iter().cloned().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty");
            let psi = psi * (big.conj() / big.norm());
            let sym = fro(&(&psi - psi.transpose()));
            let alt = fro(&(&psi + psi.transpose()));
            if sym < 1e-7 {
                Ok(DualityClass { kind: DualityKind::Real, psi: Some(psi) })
            } else if alt < 1e-7 {
                Ok(DualityClass { kind: DualityKind::Quaternionic, psi: Some(psi) })
            } else {
                Err(Error::Degenerate(format!("psi is neither symmetric ({sym:.3e}) nor alternating ({alt:.3e})")))
            }
        }
        k => Err(Error::structural(format!("Hom(R, R*) has dimension {k}; input is not irreducible"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::{I, ONE, ZERO};
    use crate::presets::{spin_rep, su2_generators};
    use nalgebra::DVector;

    fn diag(v: &[Complex64]) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    fn q8() -> UnitaryRep {
        let s1 = CMatrix::from_row_slice(2, 2, &[ZERO, I, I, ZERO]);
        let s2 = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        UnitaryRep::new(vec![s1, s2]).unwrap()
    }

    fn omega() -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
    }

    #[test]
    fn commutant_sizes() {
        assert_eq!(commutant(&UnitaryRep::trivial(3)).len(), 9);
        assert_eq!(commutant(&q8()).len(), 1);
        assert_eq!(commutant(&q8().with_multiplicity(2)).len(), 4);
    }

    #[test]
    fn commutant_basis_is_trace_orthonormal() {
        let b = commutant(&q8().with_multiplicity(2));
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let ip = (x.adjoint() * y).trace();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn isotypic_examples() {
        let t = isotypic_decompose(&UnitaryRep::trivial(3), 1).unwrap();
        assert_eq!((t.len(), t[0].irrep_dim, t[0].multiplicity), (1, 1, 3));
        let w = omega();
        let z3 = UnitaryRep::new(vec![diag(&[ONE, w, w * w])]).unwrap();
        let comps = isotypic_decompose(&z3, 1).unwrap();
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().all(|c| c.irrep_dim == 1 && c.multiplicity == 1));
        let triv = UnitaryRep::new(vec![matkit::eye(1), matkit::eye(1)]).unwrap();
        let mixed = q8().direct_sum(&triv).unwrap();
        let mut dm: Vec<_> = isotypic_decompose(&mixed, 5).unwrap().iter().map(|c| (c.irrep_dim, c.multiplicity)).collect();
        dm.sort();
        assert_eq!(dm, vec![(1, 1), (2, 1)]);
    }

    #[test]
    fn equivariant_hom_examples() {
        let h = equivariant_hom(&q8(), &q8()).unwrap();
        assert_eq!(h.len(), 1);
        let x = &h[0];
        assert!(fro(&(x - matkit::eye(2) * x[(0, 0)])) < 1e-10);
        let w = omega();
        let a = UnitaryRep::new(vec![diag(&[w])]).unwrap();
        let b = UnitaryRep::new(vec![diag(&[w * w])]).unwrap();
        assert!(equivariant_hom(&a, &b).unwrap().is_empty());
        assert_eq!(equivariant_hom(&q8(), &q8().with_multiplicity(2)).unwrap().len(), 2);
        let two = UnitaryRep::new(vec![matkit::eye(1), matkit::eye(1)]).unwrap();
        assert!(equivariant_hom(&a, &two).is_err());
    }

    #[test]
    fn duality_examples() {
        let triv = duality_class(&UnitaryRep::trivial(1)).unwrap();
        assert_eq!(triv.kind, DualityKind::Real);
        let half = duality_class(&spin_rep(1)).unwrap();
        assert_eq!(half.kind, DualityKind::Quaternionic);
        // psi proportional to i sigma_2 = [[0,1],[-1,0]] up to phase
        let psi = half.psi.unwrap();
        assert!(psi[(0, 0)].norm() < 1e-9 && (psi[(0, 1)] + psi[(1, 0)]).norm() < 1e-9);
        assert_eq!(duality_class(&spin_rep(2)).unwrap().kind, DualityKind::Real);
        let w = omega();
        let z3 = UnitaryRep::new(vec![diag(&[w])]).unwrap();
        assert_eq!(duality_class(&z3).unwrap().kind, DualityKind::Complex);
        assert!(duality_class(&UnitaryRep::trivial(2)).is_err());
    }

    #[test]
    fn su2_generators_are_unitary() {
        for g in su2_generators(3) {
            assert!(matkit::unitarity_defect(&g) < 1e-12);
        }
    }
}
