//! Nambu space W = V ⊕ V*, antiunitary symmetries stored as
//! (unitary core) ∘ (entrywise conjugation), and the split of W into
//! blocks closed under G₀, C and the antiunitaries.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grouprep::{self, IsotypicComponent, UnitaryRep};
use crate::matkit::{self, conj, fro, CMatrix, Tolerance};

/// Coordinates 0..n span V, n..2n span V*.
#[derive(Clone, Debug)]
pub struct NambuSpace {
    pub n: usize,
    pub gram_b: CMatrix,
    pub c_core: CMatrix,
}

impl NambuSpace {
    pub fn new(n: usize) -> Self {
        let mut g = matkit::zeros(2 * n, 2 * n);
        for i in 0..n {
            g[(i, n + i)] = matkit::ONE;
            g[(n + i, i)] = matkit::ONE;
        }
        NambuSpace { n, gram_b: g.clone(), c_core: g }
    }

    /// b(w1, w2) = w1ᵗ gram_b w2.
    pub fn b(&self, w1: &matkit::CVector, w2: &matkit::CVector) -> matkit::C64 {
        (w1.transpose() * &self.gram_b * w2)[(0, 0)]
    }

    pub fn apply_c(&self, w: &matkit::CVector) -> matkit::CVector {
        &self.c_core * w.map(|z| z.conj())
    }
}

/// Each generator g becomes diag(ρ(g), (ρ(g)⁻¹)ᵗ) = diag(ρ(g), conj ρ(g)).
pub fn extend_rep(rep_v: &UnitaryRep) -> UnitaryRep {
    UnitaryRep {
        dim: 2 * rep_v.dim,
        generators: rep_v.generators.iter().map(|g| matkit::block_diag(&[g, &conj(g)])).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct AntiunitaryOp {
    pub name: String,
    pub mixing: bool,
    pub core: CMatrix,
    pub full_core: CMatrix,
    pub square_sign: i8,
}

/// Build U_W from a core so that T commutes with C, and read off T².
///
/// Nonmixing: U_W = diag(A, conj A). Mixing: U_W = [[0, conj A], [A, 0]],
/// i.e. v ↦ A conj(v) lands in V*.
pub fn realize_antiunitary(name: &str, mixing: bool, core: &CMatrix, nambu: &NambuSpace) -> Result<AntiunitaryOp> {
    let n = nambu.n;
    if core.nrows() != n || core.ncols() != n {
        return Err(Error::Dimension(format!("core of {name} is {}x{}, expected {n}x{n}", core.nrows(), core.ncols())));
    }
    matkit::check_unitary(core, 1e-8).map_err(|e| match e {
        Error::NotUnitary { norm } => Error::Structural(format!("core of {name} is not unitary (defect {norm:.3e})")),
        other => other,
    })?;
    let full = if mixing {
        let mut u = matkit::zeros(2 * n, 2 * n);
        u.view_mut((0, n), (n, n)).copy_from(&conj(core));
        u.view_mut((n, 0), (n, n)).copy_from(core);
        u
    } else {
        matkit::block_diag(&[core, &conj(core)])
    };
    let sq = &full * conj(&full);
    let s = sq.trace() / (2 * n) as f64;
    let off = fro(&(&sq - matkit::eye(2 * n) * s));
    if off > 1e-8 * (2.0 * n as f64).sqrt() {
        return Err(Error::NotInvolution { name: name.to_string(), norm: off });
    }
    if s.im.abs() > 1e-8 || (s.re.abs() - 1.0).abs() > 1e-8 {
        return Err(Error::NonrealSquare { name: name.to_string(), re: s.re, im: s.im });
    }
    let commute = fro(&(&full * conj(&nambu.c_core) - &nambu.c_core * conj(&full)));
    debug_assert!(commute < 1e-10);
    Ok(AntiunitaryOp {
        name: name.to_string(),
        mixing,
        core: core.clone(),
        full_core: full,
        square_sign: if s.re > 0.0 { 1 } else { -1 },
    })
}

/// A Nambu space with G₀ and up to two antiunitaries.
#[derive(Clone, Debug)]
pub struct SymmetrySetup {
    pub nambu: NambuSpace,
    pub rep_v: UnitaryRep,
    pub rep_w: UnitaryRep,
    pub antiunitaries: Vec<AntiunitaryOp>,
    /// T₁T = sign · TT₁ when two antiunitaries are present.
    pub anticommute_sign: Option<i8>,
}

/// A user-level description of one antiunitary.
#[derive(Clone, Debug)]
pub struct AntiunitarySpec {
    pub name: String,
    pub mixing: bool,
    pub core: CMatrix,
}

impl SymmetrySetup {
    pub fn new(rep_v: UnitaryRep, specs: &[AntiunitarySpec]) -> Result<Self> {
        let nambu = NambuSpace::new(rep_v.dim);
        if specs.len() > 2 {
            return Err(Error::schema("antiunitaries", format!("at most two antiunitaries are supported, got {}", specs.len())));
        }
        let ops = specs
            .iter()
            .map(|s| realize_antiunitary(&s.name, s.mixing, &s.core, &nambu))
            .collect::<Result<Vec<_>>>()?;
        let mut sign = None;
        if ops.len() == 2 {
            if ops[0].mixing == ops[1].mixing {
                return Err(Error::structural("with two antiunitaries exactly one must be mixing and one nonmixing"));
            }
            let a = &ops[0].full_core * conj(&ops[1].full_core);
            let b = &ops[1].full_core * conj(&ops[0].full_core);
            sign = if fro(&(&a - &b)) < 1e-8 {
                Some(1)
            } else if fro(&(&a + &b)) < 1e-8 {
                Some(-1)
            } else {
                return Err(Error::structural("the two antiunitaries neither commute nor anticommute"));
            };
            let p2 = &a * &a;
            let s = p2.trace() / p2.nrows() as f64;
            if fro(&(&p2 - matkit::eye(p2.nrows()) * s)) > 1e-8 {
                return Err(Error::structural("P = T T1 does not square to a scalar"));
            }
        }
        let rep_w = extend_rep(&rep_v);
        Ok(SymmetrySetup { nambu, rep_v, rep_w, antiunitaries: ops, anticommute_sign: sign })
    }

    pub fn specs(&self) -> Vec<AntiunitarySpec> {
        self.antiunitaries
            .iter()
            .map(|t| AntiunitarySpec { name: t.name.clone(), mixing: t.mixing, core: t.core.clone() })
            .collect()
    }

    /// Same setup in the basis v ↦ U v of V.
    pub fn transform(&self, u: &CMatrix) -> Result<Self> {
        let rep = self.rep_v.transform(u);
        let specs: Vec<AntiunitarySpec> = self
            .antiunitaries
            .iter()
            .map(|t| {
                let core = if t.mixing { conj(u) * &t.core * u.transpose() } else { u * &t.core * u.transpose() };
                AntiunitarySpec { name: t.name.clone(), mixing: t.mixing, core }
            })
            .collect();
        SymmetrySetup::new(rep, &specs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    V,
    Dual,
}

/// An isotypic summand of V (side V) or its conjugate inside V* (side Dual).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Part {
    pub side: Side,
    pub vcomp: usize,
}

#[derive(Clone, Debug)]
pub struct WComponent {
    pub parts: Vec<Part>,
    pub basis: CMatrix,
    pub projector: CMatrix,
}

impl WComponent {
    pub fn tag(&self) -> String {
        self.parts
            .iter()
            .map(|p| match p.side {
                Side::V => format!("V{}", p.vcomp),
                Side::Dual => format!("V*{}", p.vcomp),
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Isotypic structure of W together with the action of C and the antiunitaries.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub vcomps: Vec<IsotypicComponent>,
    pub dual_of: Vec<Option<usize>>,
    pub wcomps: Vec<WComponent>,
    pub c_perm: Vec<usize>,
    pub t_perms: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct NambuBlock {
    pub basis: CMatrix,
    pub gram_b: CMatrix,
    pub c_core: CMatrix,
    pub generators: Vec<CMatrix>,
    pub antiunitary_cores: Vec<CMatrix>,
    pub doubled: bool,
    pub component_tags: Vec<String>,
    /// Indices into `decomposition.wcomps`.
    pub components: Vec<usize>,
    /// C-orbits of components; the first is the reference unit.
    pub units: Vec<Vec<usize>>,
    pub decomposition: Arc<Decomposition>,
}

impl NambuBlock {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

fn union_find_root(p: &mut [usize], i: usize) -> usize {
    let mut i = i;
    while p[i] != i {
        p[i] = p[p[i]];
        i = p[i];
    }
    i
}

/// Isotypic components of W and how C and each antiunitary permute them.
pub fn decompose(setup: &SymmetrySetup, seed: u64) -> Result<Decomposition> {
    let n = setup.nambu.n;
    let vcomps = grouprep::isotypic_decompose(&setup.rep_v, seed)?;
    let k = vcomps.len();
    let witnesses: Vec<UnitaryRep> = vcomps.iter().map(|c| setup.rep_v.restrict(&c.irrep_basis)).collect();
    let mut dual_of = vec![None; k];
    for j in 0..k {
        let cj = witnesses[j].conjugate();
        for (l, w) in witnesses.iter().enumerate() {
            if w.dim == cj.dim && !grouprep::equivariant_hom(&cj, w)?.is_empty() {
                dual_of[j] = Some(l);
                break;
            }
        }
    }
    // Nodes 0..k are V-parts, k..2k are V*-parts. V_j shares its class with conj(V_dual(j)).
    let mut parent: Vec<usize> = (0..2 * k).collect();
    for j in 0..k {
        if let Some(l) = dual_of[j] {
            let (a, b) = (union_find_root(&mut parent, j), union_find_root(&mut parent, k + l));
            parent[a] = b;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<Option<usize>> = vec![None; 2 * k];
    for node in 0..2 * k {
        let r = union_find_root(&mut parent, node);
        match seen[r] {
            Some(g) => groups[g].push(node),
            None => {
                seen[r] = Some(groups.len());
                groups.push(vec![node]);
            }
        }
    }
    let part_of = |node: usize| if node < k { Part { side: Side::V, vcomp: node } } else { Part { side: Side::Dual, vcomp: node - k } };
    let mut wcomps = Vec::new();
    let mut comp_of_node = vec![0; 2 * k];
    for (gi, g) in groups.iter().enumerate() {
        let mut parts: Vec<Part> = g.iter().map(|&x| part_of(x)).collect();
        parts.sort();
        let blocks: Vec<CMatrix> = parts
            .iter()
            .map(|p| {
                let b = &vcomps[p.vcomp].basis;
                let mut e = matkit::zeros(2 * n, b.ncols());
                match p.side {
                    Side::V => e.view_mut((0, 0), (n, b.ncols())).copy_from(b),
                    Side::Dual => e.view_mut((n, 0), (n, b.ncols())).copy_from(&conj(b)),
                }
                e
            })
            .collect();
        let refs: Vec<&CMatrix> = blocks.iter().collect();
        let basis = matkit::hstack(&refs);
        let projector = &basis * basis.adjoint();
        for &x in g {
            comp_of_node[x] = gi;
        }
        wcomps.push(WComponent { parts, basis, projector });
    }
    let c_perm: Vec<usize> = wcomps
        .iter()
        .map(|w| {
            let p = w.parts[0];
            let node = match p.side {
                Side::V => k + p.vcomp,
                Side::Dual => p.vcomp,
            };
            comp_of_node[node]
        })
        .collect();
    let mut t_perms = Vec::new();
    for t in &setup.antiunitaries {
        let mut perm = Vec::with_capacity(wcomps.len());
        for w in &wcomps {
            let img = &t.full_core * conj(&w.projector) * t.full_core.adjoint();
            let hit = wcomps.iter().position(|x| fro(&(&img - &x.projector)) < 1e-6 * (1.0 + fro(&x.projector)));
            match hit {
                Some(i) => perm.push(i),
                None => {
                    return Err(Error::structural(format!(
                        "antiunitary {} does not permute the isotypic components of W",
                        t.name
                    )))
                }
            }
        }
        t_perms.push(perm);
    }
    Ok(Decomposition { vcomps, dual_of, wcomps, c_perm, t_perms })
}

/// Split W into minimal subspaces closed under G₀, C and every antiunitary.
pub fn build_blocks(setup: &SymmetrySetup, seed: u64) -> Result<Vec<NambuBlock>> {
    let dec = Arc::new(decompose(setup, seed)?);
    let nc = dec.wcomps.len();
    let mut assigned = vec![false; nc];
    let mut blocks = Vec::new();
    for start in 0..nc {
        if assigned[start] {
            continue;
        }
        let mut orbit = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            if !orbit.insert(x) {
                continue;
            }
            stack.push(dec.c_perm[x]);
            for p in &dec.t_perms {
                stack.push(p[x]);
            }
        }
        for &x in &orbit {
            assigned[x] = true;
        }
        let components: Vec<usize> = orbit.into_iter().collect();
        let mut units: Vec<Vec<usize>> = Vec::new();
        for &x in &components {
            if units.iter().any(|u| u.contains(&x)) {
                continue;
            }
            let y = dec.c_perm[x];
            units.push(if y == x { vec![x] } else { vec![x, y] });
        }
        let refs: Vec<&CMatrix> = components.iter().map(|&i| &dec.wcomps[i].basis).collect();
        let q = matkit::hstack(&refs);
        let gram_b = q.transpose() * &setup.nambu.gram_b * &q;
        let smin = matkit::singular_values(&gram_b)?.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin < 1e-8 {
            return Err(Error::structural("b restricted to a block is degenerate"));
        }
        blocks.push(NambuBlock {
            c_core: q.adjoint() * &setup.nambu.c_core * conj(&q),
            generators: setup.rep_w.generators.iter().map(|g| q.adjoint() * g * &q).collect(),
            antiunitary_cores: setup.antiunitaries.iter().map(|t| q.adjoint() * &t.full_core * conj(&q)).collect(),
            doubled: units.len() > 1,
            component_tags: components.iter().map(|&i| dec.wcomps[i].tag()).collect(),
            basis: q,
            gram_b,
            components,
            units,
            decomposition: dec.clone(),
        });
    }
    Ok(blocks)
}

/// Largest distance of `span(block)` from being invariant under the generators and antiunitaries.
pub fn closure_defect(setup: &SymmetrySetup, block: &NambuBlock) -> f64 {
    let q = &block.basis;
    let proj_out = matkit::eye(q.nrows()) - q * q.adjoint();
    let mut worst: f64 = 0.0;
    for g in &setup.rep_w.generators {
        worst = worst.max(fro(&(&proj_out * g * q)));
    }
    for t in &setup.antiunitaries {
        worst = worst.max(fro(&(&proj_out * &t.full_core * conj(q))));
    }
    worst.max(fro(&(&proj_out * &setup.nambu.c_core * conj(q))))
}

pub fn default_tolerance() -> Tolerance {
    Tolerance::default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::{c, CVector, I, ONE, ZERO};
    use nalgebra::DVector;

    fn isig2() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO])
    }

    #[test]
    fn c_links_b_and_inner_product() {
        let ns = NambuSpace::new(3);
        let u = matkit::random_unitary(6, 11).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let w1: CVector = u.column(i).into_owned();
                let w2: CVector = u.column(j).into_owned();
                let lhs = ns.b(&ns.apply_c(&w1), &w2);
                let rhs = w1.dotc(&w2);
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
        assert!(fro(&(&ns.c_core * conj(&ns.c_core) - matkit::eye(6))) < 1e-15);
    }

    #[test]
    fn extend_rep_examples() {
        let ext = extend_rep(&UnitaryRep::trivial(2));
        assert!(fro(&(&ext.generators[0] - matkit::eye(4))) < 1e-15);
        let w = matkit::C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let z3 = UnitaryRep::new(vec![CMatrix::from_element(1, 1, w)]).unwrap();
        let e = extend_rep(&z3);
        assert!((e.generators[0][(1, 1)] - w.conj()).norm() < 1e-15);
        let g = matkit::random_unitary(3, 5).unwrap();
        let e = extend_rep(&UnitaryRep::new(vec![g]).unwrap());
        let ns = NambuSpace::new(3);
        let h = &e.generators[0];
        assert!(fro(&(h.transpose() * &ns.gram_b * h - &ns.gram_b)) < 1e-12);
        assert!(matkit::unitarity_defect(h) < 1e-12);
    }

    #[test]
    fn realize_examples() {
        let ns = NambuSpace::new(2);
        let t = realize_antiunitary("T", false, &isig2(), &ns).unwrap();
        assert_eq!(t.square_sign, -1);
        let t = realize_antiunitary("T", false, &matkit::eye(2), &ns).unwrap();
        assert_eq!(t.square_sign, 1);
        let t = realize_antiunitary("T", true, &matkit::eye(2), &ns).unwrap();
        assert_eq!(t.square_sign, 1);
        // hand oracle: U_W is C_core itself, which squares to +1 entrywise
        assert!(fro(&(&t.full_core - &ns.c_core)) < 1e-15);
        assert!(t.full_core.view((0, 0), (2, 2)).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn realize_rejects_bad_cores() {
        let ns = NambuSpace::new(2);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![ONE, I]));
        // diag(1, i) nonmixing: A conj(A) = diag(1, 1) is fine; as mixing A^2 = diag(1,-1) is not scalar
        assert!(matches!(realize_antiunitary("T", true, &d, &ns), Err(Error::NotInvolution { .. })));
        let ph = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 1.0), c(0.0, 1.0)]));
        assert!(matches!(realize_antiunitary("T", true, &ph, &ns), Ok(ref t) if t.square_sign == -1));
        // a nonreal scalar square on V forces a non-scalar square on W
        let w = matkit::C64::from_polar(1.0, 0.3);
        let bad = matkit::eye(2) * w;
        assert!(matches!(realize_antiunitary("T", true, &bad, &ns), Err(Error::NotInvolution { .. })));
    }

    #[test]
    fn trivial_group_gives_one_block() {
        let setup = SymmetrySetup::new(UnitaryRep::trivial(2), &[]).unwrap();
        let blocks = build_blocks(&setup, 1).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].dim(), 4);
        assert!(!blocks[0].doubled);
    }

    #[test]
    fn z3_charge_with_nonmixing_t_is_one_block() {
        let w = matkit::C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let rep = UnitaryRep::new(vec![CMatrix::from_element(1, 1, w)]).unwrap();
        let t = AntiunitarySpec { name: "T".into(), mixing: false, core: matkit::eye(1) };
        let setup = SymmetrySetup::new(rep, &[t]).unwrap();
        let blocks = build_blocks(&setup, 1).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].components.len(), 2);
    }

    #[test]
    fn z5_swap_is_doubled() {
        let z = |k: f64| matkit::C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / 5.0);
        let g = CMatrix::from_diagonal(&DVector::from_vec(vec![z(1.0), z(2.0)]));
        let swap = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let setup = SymmetrySetup::new(
            UnitaryRep::new(vec![g]).unwrap(),
            &[AntiunitarySpec { name: "T".into(), mixing: true, core: swap }],
        )
        .unwrap();
        let blocks = build_blocks(&setup, 3).unwrap();
        assert_eq!(blocks.len(), 1);
        assert!(blocks[0].doubled);
        assert!(closure_defect(&setup, &blocks[0]) < 1e-9);
    }

    #[test]
    fn transform_preserves_square_signs() {
        let t = AntiunitarySpec { name: "T".into(), mixing: false, core: isig2() };
        let s = SymmetrySetup::new(UnitaryRep::trivial(2), &[t]).unwrap();
        let u = matkit::random_unitary(2, 8).unwrap();
        let s2 = s.transform(&u).unwrap();
        assert_eq!(s2.antiunitaries[0].square_sign, -1);
    }
}
