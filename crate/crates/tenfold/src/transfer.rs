//! Transfer of a block's structure to its multiplicity space.
//!
//! A unit of a block (a C-orbit of isotypic components of W) is embedded as
//! Φ : H ⊗ R → W, where R is one irreducible copy. Every antilinear operator
//! that maps the unit to itself pulls back to a pure tensor α ⊗ β with β
//! acting on R, and only α matters for classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grouprep::{self, DualityKind, UnitaryRep};
use crate::matkit::{self, c, conj, fro, CMatrix, Tolerance, C64};
use crate::nambu::{NambuBlock, Side, SymmetrySetup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    /// The unit is one self-dual component; C acts inside it.
    Full,
    /// The unit is a pair of components swapped by C.
    Diag,
}

/// An antiunitary that maps the reference unit to itself, seen on H.
#[derive(Clone, Debug)]
pub struct TransferredT {
    pub name: String,
    pub index: usize,
    pub original_square: i8,
    pub transferred_square: i8,
    pub beta_parity: Option<i8>,
    /// Diag units only: whether the operator exchanges the two components.
    pub relative_mixing: Option<bool>,
    pub alpha: CMatrix,
}

#[derive(Clone, Debug)]
pub struct BlockData {
    pub kind: UnitKind,
    /// Full: dim H = 2n. Diag: dim H of one component is n.
    pub n: usize,
    pub irrep_dim: usize,
    pub duality: DualityKind,
    pub e_kind: UnitKind,
    pub b_parity: Option<i8>,
    /// C on the transferred space: 2n × 2n.
    pub gamma: CMatrix,
    /// Antiunitaries that stabilize the reference unit.
    pub ts: Vec<TransferredT>,
    /// Names of antiunitaries that move the reference unit.
    pub moved: Vec<String>,
    /// Number of units in the block.
    pub orbit: usize,
    /// Linear P = T T1 on the transferred space when it alone stabilizes the unit.
    pub p_op: Option<CMatrix>,
    /// Whether `p_op` exchanges the two components of a diag unit.
    pub p_mixing: bool,
    /// α_T ᾱ_T1 = c1 α_T1 ᾱ_T when both antiunitaries stabilize the unit.
    pub c1: Option<i8>,
    pub pq_split: Option<(usize, usize)>,
    pub type2: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferredSign {
    pub name: String,
    pub original_square: i8,
    pub transferred_square: i8,
    pub beta_parity: Option<i8>,
    pub relative_mixing: Option<bool>,
}

/// Serializable summary of a transfer.
#[derive(Clone, Debug, Serialize)]
pub struct TransferRecord {
    pub e_kind: UnitKind,
    pub irrep_dim: usize,
    pub duality: DualityKind,
    pub multiplicity_dim: usize,
    pub b_parity: Option<i8>,
    pub antiunitaries: Vec<TransferredSign>,
    pub moved: Vec<String>,
    pub orbit: usize,
    pub c1: Option<i8>,
}

impl BlockData {
    pub fn record(&self) -> TransferRecord {
        TransferRecord {
            e_kind: self.e_kind,
            irrep_dim: self.irrep_dim,
            duality: self.duality,
            multiplicity_dim: if self.kind == UnitKind::Full { 2 * self.n } else { self.n },
            b_parity: self.b_parity,
            antiunitaries: self
                .ts
                .iter()
                .map(|t| TransferredSign {
                    name: t.name.clone(),
                    original_square: t.original_square,
                    transferred_square: t.transferred_square,
                    beta_parity: t.beta_parity,
                    relative_mixing: t.relative_mixing,
                })
                .collect(),
            moved: self.moved.clone(),
            orbit: self.orbit,
            c1: self.c1,
        }
    }
}

/// Write `op` (m·d square, index a·d + r) as α ⊗ β with α unitary.
///
/// Uses the best rank-one approximation of the realigned matrix and fails
/// when the relative residual exceeds `tol`.
pub fn factor_pure_tensor(op: &CMatrix, d: usize, tol: f64) -> Result<(CMatrix, CMatrix)> {
    let md = op.nrows();
    if !md.is_multiple_of(d) || op.ncols() != md {
        return Err(Error::Dimension(format!("cannot factor a {}x{} operator with irrep dim {d}", md, op.ncols())));
    }
    let m = md / d;
    let mut r = matkit::zeros(m * m, d * d);
    for a in 0..m {
        for b in 0..m {
            for x in 0..d {
                for y in 0..d {
                    r[(a * m + b, x * d + y)] = op[(a * d + x, b * d + y)];
                }
            }
        }
    }
    let norm = fro(&r);
    if norm == 0.0 {
        return Err(Error::NotFactorizable { residual: 1.0 });
    }
    let (u, sv, v) = matkit::svd(&r)?;
    let s = sv[0];
    let u0 = u.column(0);
    let v0 = v.column(0).adjoint();
    let residual = fro(&(&r - u0 * &v0 * c(s, 0.0))) / norm;
    if residual > tol {
        return Err(Error::NotFactorizable { residual });
    }
    let mut alpha = CMatrix::from_fn(m, m, |a, b| u0[a * m + b]);
    let mut beta = CMatrix::from_fn(d, d, |x, y| v0[x * d + y] * s);
    let scale = fro(&alpha) / (m as f64).sqrt();
    alpha /= c(scale, 0.0);
    beta *= c(scale, 0.0);
    // fix the free phase so the largest entry of β is real positive
    let (_, big) = beta.iter().fold((0.0, C64::new(0.0, 0.0)), |acc, z| if z.norm() > acc.0 { (z.norm(), *z) } else { acc });
    let ph = big / big.norm();
    alpha *= ph;
    beta /= ph;
    Ok((alpha, beta))
}

/// Sign s with a · conj(a) = s · I, if it exists.
pub fn antilinear_square(a: &CMatrix) -> Option<i8> {
    let sq = a * conj(a);
    let s = sq.trace() / sq.nrows() as f64;
    if fro(&(&sq - matkit::eye(sq.nrows()) * s)) > 1e-7 * (1.0 + fro(&sq)) || s.im.abs() > 1e-7 || s.re.abs() < 1e-7 {
        return None;
    }
    Some(if s.re > 0.0 { 1 } else { -1 })
}

/// Eigenspace dimensions (p, q), p ≥ q, of a unitary with at most two eigenvalues.
pub fn split_pq(op: &CMatrix) -> Result<(usize, usize)> {
    let clusters = matkit::eig_unitary(&normalize_unitary(op), Tolerance::default())?;
    match clusters.len() {
        1 => Ok((clusters[0].dim(), 0)),
        2 => {
            let (a, b) = (clusters[0].dim(), clusters[1].dim());
            Ok((a.max(b), a.min(b)))
        }
        k => Err(Error::Degenerate(format!("expected at most two eigenvalues, found {k}"))),
    }
}

/// Rescale a matrix proportional to a unitary so that it is unitary.
pub fn normalize_unitary(op: &CMatrix) -> CMatrix {
    let s = fro(op) / (op.nrows() as f64).sqrt();
    op / c(s, 0.0)
}

/// Orthonormal basis of Hom_G(R, target), each map scaled to an isometry.
fn isometric_homs(r: &UnitaryRep, target: &UnitaryRep) -> Result<Vec<CMatrix>> {
    let raw = grouprep::equivariant_hom(r, target)?;
    let d = r.dim as f64;
    let mut out: Vec<CMatrix> = Vec::new();
    for h in raw {
        let mut h = h;
        for prev in &out {
            let ip = (prev.adjoint() * &h).trace() / d;
            h -= prev * ip;
        }
        let nrm = fro(&h);
        if nrm < 1e-9 {
            continue;
        }
        h *= c(d.sqrt() / nrm, 0.0);
        out.push(h);
    }
    for h in &out {
        if fro(&(h.adjoint() * h - matkit::eye(r.dim))) > 1e-7 {
            return Err(Error::Degenerate("equivariant map is not proportional to an isometry".into()));
        }
    }
    Ok(out)
}

fn unit_of(units: &[Vec<usize>], comp: usize) -> usize {
    units.iter().position(|u| u.contains(&comp)).expect("component belongs to a unit")
}

/// Normalize α so that γ ᾱ = α γ̄.
fn align_with_c(alpha: &CMatrix, gamma: &CMatrix) -> Result<CMatrix> {
    let lhs = gamma * conj(alpha);
    let rhs = alpha * conj(gamma);
    let cc = (rhs.adjoint() * &lhs).trace() / rhs.nrows() as f64;
    if fro(&(&lhs - &rhs * cc)) > 1e-7 * (1.0 + fro(&lhs)) {
        return Err(Error::structural("transferred antiunitary does not commute with C up to phase"));
    }
    let xi = (cc / cc.norm()).sqrt();
    Ok(alpha * xi)
}

/// Transfer a block's structure to the multiplicity space of its first unit.
pub fn reduce_block(setup: &SymmetrySetup, block: &NambuBlock) -> Result<BlockData> {
    let dec = &block.decomposition;
    let n = setup.nambu.n;
    let unit = &block.units[0];
    let kind = if unit.len() == 1 { UnitKind::Full } else { UnitKind::Diag };
    let has_v = |ci: usize| dec.wcomps[ci].parts.iter().any(|p| p.side == Side::V);
    let (comp, _comp_bar) = if kind == UnitKind::Full {
        (unit[0], unit[0])
    } else if has_v(unit[0]) {
        (unit[0], unit[1])
    } else {
        (unit[1], unit[0])
    };
    let j = dec.wcomps[comp]
        .parts
        .iter()
        .find(|p| p.side == Side::V)
        .map(|p| p.vcomp)
        .ok_or_else(|| Error::structural("unit has no component meeting V"))?;
    let witness = setup.rep_v.restrict(&dec.vcomps[j].irrep_basis);
    let d = witness.dim;
    let duality = grouprep::duality_class(&witness)?.kind;

    let top = isometric_homs(&witness, &setup.rep_v)?;
    let bottom = isometric_homs(&witness, &setup.rep_v.conjugate())?;
    let mut cols = Vec::new();
    for h in &top {
        let mut e = matkit::zeros(2 * n, d);
        e.view_mut((0, 0), (n, d)).copy_from(h);
        cols.push(e);
    }
    for h in &bottom {
        let mut e = matkit::zeros(2 * n, d);
        e.view_mut((n, 0), (n, d)).copy_from(h);
        cols.push(e);
    }
    let refs: Vec<&CMatrix> = cols.iter().collect();
    let phi_c = matkit::hstack(&refs);
    let mult = phi_c.ncols() / d;
    let proj = &dec.wcomps[comp].projector;
    if fro(&(proj * &phi_c - &phi_c)) > 1e-6 || phi_c.ncols() != dec.wcomps[comp].basis.ncols() {
        return Err(Error::structural("multiplicity embedding does not span its isotypic component"));
    }
    let c_core = &setup.nambu.c_core;
    let phi = match kind {
        UnitKind::Full => phi_c.clone(),
        UnitKind::Diag => matkit::hstack(&[&phi_c, &(c_core * conj(&phi_c))]),
    };
    if fro(&(phi.adjoint() * &phi - matkit::eye(phi.ncols()))) > 1e-7 {
        return Err(Error::Degenerate("multiplicity embedding is not an isometry".into()));
    }
    let ftol = 1e-8;

    // antilinear op U K pulled back through Φ
    let pull = |u: &CMatrix, left: &CMatrix, right: &CMatrix| left.adjoint() * u * conj(right);
    let phi_bar = c_core * conj(&phi_c);

    let (gamma, b_parity) = match kind {
        UnitKind::Full => {
            let (g, _) = factor_pure_tensor(&pull(c_core, &phi, &phi), d, ftol)?;
            let b = antilinear_square(&g).ok_or_else(|| Error::Degenerate("transferred C does not square to ±1".into()))?;
            (g, Some(b))
        }
        UnitKind::Diag => {
            let mut sw = matkit::zeros(2 * mult, 2 * mult);
            for i in 0..mult {
                sw[(i, mult + i)] = matkit::ONE;
                sw[(mult + i, i)] = matkit::ONE;
            }
            (sw, None)
        }
    };

    let unit_idx0 = unit_of(&block.units, comp);
    let mut ts = Vec::new();
    let mut moved = Vec::new();
    for (i, t) in setup.antiunitaries.iter().enumerate() {
        let image = dec.t_perms[i][comp];
        if unit_of(&block.units, image) != unit_idx0 {
            moved.push(t.name.clone());
            continue;
        }
        let u = &t.full_core;
        let (alpha, beta, relative_mixing) = match kind {
            UnitKind::Full => {
                let (a, b) = factor_pure_tensor(&pull(u, &phi, &phi), d, ftol)?;
                (align_with_c(&a, &gamma)?, b, None)
            }
            UnitKind::Diag => {
                let mixing = image != comp;
                let left = if mixing { &phi_bar } else { &phi_c };
                let (mut f, b) = factor_pure_tensor(&pull(u, left, &phi_c), d, ftol)?;
                if mixing {
                    // the phase of φ is free and moves φ² around the unit circle; fix φ² = +1
                    let sq = (&f * &f).trace() / mult as f64;
                    f /= (sq / sq.norm()).sqrt();
                }
                let a = if mixing {
                    let mut a = matkit::zeros(2 * mult, 2 * mult);
                    a.view_mut((0, mult), (mult, mult)).copy_from(&conj(&f));
                    a.view_mut((mult, 0), (mult, mult)).copy_from(&f);
                    a
                } else {
                    matkit::block_diag(&[&f, &conj(&f)])
                };
                (a, b, Some(mixing))
            }
        };
        let transferred_square = antilinear_square(&alpha)
        .ok_or_else(|| Error::Degenerate(format!("transferred {} does not square to ±1", t.name)))?;
        ts.push(TransferredT {
            name: t.name.clone(),
            index: i,
            original_square: t.square_sign,
            transferred_square,
            beta_parity: antilinear_square(&beta),
            relative_mixing,
            alpha,
        });
    }

    let orbit = block.units.len();
    let mut p_op = None;
    let mut p_mixing = false;
    if ts.is_empty() && setup.antiunitaries.len() == 2 && orbit == 2 {
        let pw = &setup.antiunitaries[0].full_core * conj(&setup.antiunitaries[1].full_core);
        let image = dec.t_perms[0][dec.t_perms[1][comp]];
        if unit_of(&block.units, image) == unit_idx0 {
            let (p, _) = match kind {
                UnitKind::Full => factor_pure_tensor(&(phi.adjoint() * &pw * &phi), d, ftol)?,
                UnitKind::Diag => {
                    p_mixing = image != comp;
                    let left = if p_mixing { &phi_bar } else { &phi_c };
                    factor_pure_tensor(&(left.adjoint() * &pw * &phi_c), d, ftol)?
                }
            };
            p_op = Some(p);
        }
    }

    let c1 = if ts.len() == 2 {
        let (a1, a2) = (&ts[0].alpha, &ts[1].alpha);
        let lhs = a1 * conj(a2);
        let rhs = a2 * conj(a1);
        if fro(&(&lhs - &rhs)) < 1e-7 * (1.0 + fro(&lhs)) {
            Some(1)
        } else if fro(&(&lhs + &rhs)) < 1e-7 * (1.0 + fro(&lhs)) {
            Some(-1)
        } else {
            return Err(Error::structural("transferred antiunitaries neither commute nor anticommute"));
        }
    } else {
        None
    };

    let pq_split = match (kind, ts.len()) {
        (UnitKind::Full, 1) => split_pq(&(&gamma * conj(&ts[0].alpha))).ok(),
        (UnitKind::Diag, 1) if ts[0].relative_mixing == Some(true) => {
            let g = (&gamma * conj(&ts[0].alpha)).view((0, 0), (mult, mult)).into_owned();
            split_pq(&g).ok()
        }
        _ => None,
    };

    Ok(BlockData {
        kind,
        n: if kind == UnitKind::Full { mult / 2 } else { mult },
        irrep_dim: d,
        duality,
        e_kind: kind,
        b_parity,
        gamma,
        ts,
        type2: !moved.is_empty(),
        moved,
        orbit,
        p_op,
        p_mixing,
        c1,
        pq_split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::random_unitary;
    use crate::nambu::{build_blocks, AntiunitarySpec};
    use crate::presets::{isig2, preset};

    #[test]
    fn factor_recovers_tensor() {
        let a = random_unitary(3, 1).unwrap();
        let b = random_unitary(2, 2).unwrap() * c(0.0, 2.0);
        let (fa, fb) = factor_pure_tensor(&matkit::kron(&a, &b), 2, 1e-10).unwrap();
        assert!(fro(&(matkit::kron(&fa, &fb) - matkit::kron(&a, &b))) < 1e-10);
        assert!(matkit::unitarity_defect(&fa) < 1e-10);
    }

    #[test]
    fn factor_rejects_entangled() {
        let u = random_unitary(4, 3).unwrap();
        assert!(matches!(factor_pure_tensor(&u, 2, 1e-8), Err(Error::NotFactorizable { .. })));
    }

    #[test]
    fn split_examples() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]));
        assert_eq!(split_pq(&d).unwrap(), (2, 1));
        assert_eq!(split_pq(&matkit::eye(3)).unwrap(), (3, 0));
    }

    #[test]
    fn spin_half_time_reversal_flips_sign() {
        // SU(2) spin-1/2 with T² = -1: the multiplicity space sees T² = +1 and b alternating
        let p = preset("class_CI", None).unwrap();
        let s = SymmetrySetup::new(p.rep, &p.antiunitaries).unwrap();
        let blocks = build_blocks(&s, 1).unwrap();
        assert_eq!(blocks.len(), 1);
        let bd = reduce_block(&s, &blocks[0]).unwrap();
        assert_eq!(bd.kind, UnitKind::Full);
        assert_eq!(bd.b_parity, Some(-1));
        assert_eq!(bd.ts[0].original_square, -1);
        assert_eq!(bd.ts[0].transferred_square, 1);
        assert_eq!(bd.ts[0].beta_parity, Some(-1));
    }

    #[test]
    fn trivial_group_keeps_signs() {
        let t = AntiunitarySpec { name: "T".into(), mixing: false, core: isig2() };
        let s = SymmetrySetup::new(UnitaryRep::trivial(2), &[t]).unwrap();
        let blocks = build_blocks(&s, 1).unwrap();
        let bd = reduce_block(&s, &blocks[0]).unwrap();
        assert_eq!(bd.b_parity, Some(1));
        assert_eq!(bd.ts[0].transferred_square, -1);
    }
}
