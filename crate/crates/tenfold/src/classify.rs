//! Symmetric-space family of a block, read off from its transferred data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkit::{self, conj, fro, CMatrix, Cluster, Tolerance};
use crate::transfer::{antilinear_square, normalize_unitary, BlockData, UnitKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    A,
    AI,
    AII,
    AIII,
    D,
    C,
    DIII,
    CI,
    #[serde(rename = "D_split")]
    DSplit,
    BDI,
    CII,
    #[serde(rename = "typeII_A")]
    TypeIIA,
    #[serde(rename = "typeII_D")]
    TypeIID,
    #[serde(rename = "typeII_C")]
    TypeIIC,
    #[serde(rename = "point")]
    Point,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::A => "A",
            Family::AI => "AI",
            Family::AII => "AII",
            Family::AIII => "AIII",
            Family::D => "D",
            Family::C => "C",
            Family::DIII => "DIII",
            Family::CI => "CI",
            Family::DSplit => "D_split",
            Family::BDI => "BDI",
            Family::CII => "CII",
            Family::TypeIIA => "typeII_A",
            Family::TypeIID => "typeII_D",
            Family::TypeIIC => "typeII_C",
            Family::Point => "point",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One irreducible symmetric space with its size parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub family: Family,
    pub params: Vec<usize>,
}

impl Piece {
    fn new(family: Family, params: &[usize]) -> Self {
        Piece { family, params: params.to_vec() }
    }

    /// (dim g, dim k, dim of the center inside H).
    pub fn dims(&self) -> (usize, usize, usize) {
        let p = &self.params;
        let so = |n: usize| n * n.saturating_sub(1) / 2;
        let sp = |n: usize| n * (2 * n + 1);
        match self.family {
            Family::A => (2 * p[0] * p[0], p[0] * p[0], usize::from(p[0] > 0)),
            Family::AI => (p[0] * p[0], so(p[0]), usize::from(p[0] > 0)),
            Family::AII => (p[0] * p[0], sp(p[0] / 2), usize::from(p[0] > 0)),
            Family::AIII => {
                let n = p[0] + p[1];
                (n * n, p[0] * p[0] + p[1] * p[1], 0)
            }
            Family::D => (2 * so(2 * p[0]), so(2 * p[0]), 0),
            Family::C => (2 * sp(p[0]), sp(p[0]), 0),
            Family::DIII => (so(2 * p[0]), p[0] * p[0], 0),
            Family::CI => (sp(p[0]), p[0] * p[0], 0),
            Family::DSplit | Family::BDI => (so(p[0] + p[1]), so(p[0]) + so(p[1]), 0),
            Family::CII => (sp(p[0] + p[1]), sp(p[0]) + sp(p[1]), 0),
            Family::TypeIIA => (2 * p[0] * p[0], p[0] * p[0], usize::from(p[0] > 0)),
            Family::TypeIID => (2 * so(p[0]), so(p[0]), 0),
            Family::TypeIIC => (2 * (p[0] / 2) * (p[0] + 1), (p[0] / 2) * (p[0] + 1), 0),
            Family::Point => (0, 0, 0),
        }
    }

    pub fn dim_h(&self) -> usize {
        let (g, k, _) = self.dims();
        g - k
    }

    pub fn label(&self) -> String {
        let p = &self.params;
        match self.family {
            Family::A | Family::TypeIIA => format!("su_{} (+ center)", p[0]),
            Family::AI => format!("su_{}/so_{} (+ center)", p[0], p[0]),
            Family::AII => format!("su_{}/usp_{} (+ center)", p[0], p[0]),
            Family::AIII => format!("su_{}/s(u_{} ⊕ u_{})", p[0] + p[1], p[0], p[1]),
            Family::D => format!("so_{}(R)", 2 * p[0]),
            Family::C => format!("usp_{}", 2 * p[0]),
            Family::DIII => format!("so_{}/u_{}", 2 * p[0], p[0]),
            Family::CI => format!("usp_{}/u_{}", 2 * p[0], p[0]),
            Family::DSplit | Family::BDI => format!("so_{}/(so_{} ⊕ so_{})", p[0] + p[1], p[0], p[1]),
            Family::CII => format!("usp_{}/(usp_{} ⊕ usp_{})", 2 * (p[0] + p[1]), 2 * p[0], 2 * p[1]),
            Family::TypeIID => format!("so_{}(R)", p[0]),
            Family::TypeIIC => format!("usp_{}", p[0]),
            Family::Point => "trivial (dim 0)".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanDescriptor {
    pub family: Family,
    pub params: Vec<usize>,
    pub copies: usize,
    pub dim_g: usize,
    pub dim_k: usize,
    pub dim_h: usize,
    pub dim_p: usize,
    pub label: String,
    pub type2: bool,
    pub note: Option<String>,
}

impl CartanDescriptor {
    pub fn from_pieces(pieces: Vec<Piece>, type2: bool, note: Option<String>) -> Self {
        let live: Vec<Piece> = pieces.into_iter().filter(|p| p.dim_h() > 0).collect();
        if live.is_empty() {
            return CartanDescriptor {
                family: Family::Point,
                params: vec![],
                copies: 1,
                dim_g: 0,
                dim_k: 0,
                dim_h: 0,
                dim_p: 0,
                label: Piece::new(Family::Point, &[]).label(),
                type2,
                note,
            };
        }
        let (mut g, mut k, mut z) = (0, 0, 0);
        for p in &live {
            let (a, b, c) = p.dims();
            g += a;
            k += b;
            z += c;
        }
        let copies = if live.len() == 2 && live[0] == live[1] { 2 } else { 1 };
        let label = if copies == 2 {
            live[0].label()
        } else {
            live.iter().map(Piece::label).collect::<Vec<_>>().join(" ⊕ ")
        };
        CartanDescriptor {
            family: live[0].family,
            params: if copies == 2 { live[0].params.clone() } else { live.iter().flat_map(|p| p.params.clone()).collect() },
            copies,
            dim_g: g,
            dim_k: k,
            dim_h: g - k,
            dim_p: g - k - z,
            label,
            type2,
            note,
        }
    }
}

/// Human-readable one-liner, e.g. `so_6(R), dim H = 15`.
pub fn describe(d: &CartanDescriptor) -> String {
    if d.family == Family::Point {
        return d.label.clone();
    }
    let prefix = if d.copies == 2 { "2 × " } else { "" };
    format!("{prefix}{}, dim H = {}", d.label, d.dim_h)
}

enum Fate {
    Preserves,
    Swaps,
}

fn fate_of(img: &CMatrix, e: &CMatrix, what: &str) -> Result<Fate> {
    let inside = e.adjoint() * img;
    let outside = img - e * &inside;
    let scale = 1e-6 * (1.0 + fro(img));
    if fro(&outside) < scale {
        Ok(Fate::Preserves)
    } else if fro(&inside) < scale {
        Ok(Fate::Swaps)
    } else {
        Err(Error::Degenerate(format!("{what} neither preserves nor exchanges an eigenspace")))
    }
}

fn antilinear_fate(a: &CMatrix, e: &CMatrix, what: &str) -> Result<Fate> {
    fate_of(&(a * conj(e)), e, what)
}

fn linear_fate(l: &CMatrix, e: &CMatrix, what: &str) -> Result<Fate> {
    fate_of(&(l * e), e, what)
}

fn clusters(l: &CMatrix) -> Result<Vec<Cluster>> {
    matkit::eig_unitary(&normalize_unitary(l), Tolerance::default())
}

fn restrict_anti(a: &CMatrix, e: &CMatrix) -> CMatrix {
    e.adjoint() * a * conj(e)
}

fn restrict_lin(l: &CMatrix, e: &CMatrix) -> CMatrix {
    e.adjoint() * l * e
}

fn sign_of(a: &CMatrix, what: &str) -> Result<i8> {
    antilinear_square(a).ok_or_else(|| Error::Degenerate(format!("{what} does not square to ±1")))
}

fn two_way(l: &CMatrix, what: &str) -> Result<(usize, usize)> {
    let cl = clusters(l)?;
    match cl.len() {
        1 => Ok((cl[0].dim(), 0)),
        2 => Ok((cl[0].dim().max(cl[1].dim()), cl[0].dim().min(cl[1].dim()))),
        k => Err(Error::Degenerate(format!("{what} has {k} eigenvalues, expected at most two"))),
    }
}

/// Two eigenspaces of a linear map, or None when it is scalar.
fn two_spaces(l: &CMatrix, what: &str) -> Result<Option<(CMatrix, CMatrix)>> {
    let mut cl = clusters(l)?;
    match cl.len() {
        1 => Ok(None),
        2 => {
            let b = cl.pop().unwrap().basis;
            let a = cl.pop().unwrap().basis;
            Ok(Some((a, b)))
        }
        k => Err(Error::Degenerate(format!("{what} has {k} eigenvalue clusters, expected at most two"))),
    }
}

fn sym_or_quat(n: usize, sign: i8) -> Result<Piece> {
    if sign > 0 {
        Ok(Piece::new(Family::AI, &[n]))
    } else if n.is_multiple_of(2) {
        Ok(Piece::new(Family::AII, &[n]))
    } else {
        Err(Error::structural("quaternionic structure on an odd-dimensional space"))
    }
}

/// One antiunitary on a self-dual unit of dimension 2n.
fn one_t_full(gamma: &CMatrix, alpha: &CMatrix, b: i8) -> Result<Piece> {
    let s = sign_of(alpha, "transferred antiunitary")?;
    let n2 = gamma.nrows();
    let big_gamma = gamma * conj(alpha);
    Ok(match (b, s) {
        (1, 1) => {
            let (p, q) = two_way(&big_gamma, "C T")?;
            Piece::new(Family::DSplit, &[p, q])
        }
        (1, _) => Piece::new(Family::DIII, &[n2 / 2]),
        (_, 1) => Piece::new(Family::CI, &[n2 / 2]),
        _ => {
            let (p, q) = two_way(&big_gamma, "C T")?;
            if p % 2 != 0 || q % 2 != 0 {
                return Err(Error::structural("odd eigenspace of C T under a quaternionic structure"));
            }
            Piece::new(Family::CII, &[p / 2, q / 2])
        }
    })
}

fn classify_full(bd: &BlockData) -> Result<Vec<Piece>> {
    let gamma = &bd.gamma;
    let b = bd.b_parity.ok_or_else(|| Error::structural("self-dual unit without a C parity"))?;
    let n2 = gamma.nrows();
    let group = |n: usize| if b > 0 { Piece::new(Family::TypeIID, &[n]) } else { Piece::new(Family::TypeIIC, &[n]) };
    if bd.ts.is_empty() {
        if !bd.moved.is_empty() {
            if let Some(p) = &bd.p_op {
                return match two_spaces(p, "P")? {
                    None => Ok(vec![group(n2)]),
                    Some((e1, e2)) => match antilinear_fate(gamma, &e1, "C")? {
                        Fate::Preserves => Ok(vec![group(e1.ncols()), group(e2.ncols())]),
                        Fate::Swaps => Ok(vec![Piece::new(Family::TypeIIA, &[e1.ncols()])]),
                    },
                };
            }
            return Ok(vec![group(n2)]);
        }
        return Ok(vec![if b > 0 { Piece::new(Family::D, &[n2 / 2]) } else { Piece::new(Family::C, &[n2 / 2]) }]);
    }
    if bd.ts.len() == 1 {
        return Ok(vec![one_t_full(gamma, &bd.ts[0].alpha, b)?]);
    }
    let (a1, a2) = (&bd.ts[0].alpha, &bd.ts[1].alpha);
    let p = a1 * conj(a2);
    let Some((e1, e2)) = two_spaces(&p, "T T1")? else {
        return Ok(vec![one_t_full(gamma, a1, b)?]);
    };
    let c_fate = antilinear_fate(gamma, &e1, "C")?;
    let t_fate = antilinear_fate(a1, &e1, "T")?;
    Ok(match (c_fate, t_fate) {
        (Fate::Preserves, Fate::Preserves) => vec![
            one_t_full(&restrict_anti(gamma, &e1), &restrict_anti(a1, &e1), b)?,
            one_t_full(&restrict_anti(gamma, &e2), &restrict_anti(a1, &e2), b)?,
        ],
        (Fate::Preserves, Fate::Swaps) => vec![group(e1.ncols())],
        (Fate::Swaps, Fate::Swaps) => {
            // α γ̄ maps E1 to itself and squares to a scalar there
            let s = restrict_lin(&(a1 * conj(gamma)), &e1);
            let (p, q) = two_way(&s, "T C")?;
            vec![Piece::new(Family::AIII, &[p, q])]
        }
        (Fate::Swaps, Fate::Preserves) => {
            let tau = restrict_anti(a1, &e1);
            vec![sym_or_quat(e1.ncols(), sign_of(&tau, "T on an eigenspace")?)?]
        }
    })
}

fn classify_diag(bd: &BlockData) -> Result<Vec<Piece>> {
    let n = bd.n;
    let hh = |x: &CMatrix| x.view((0, 0), (n, n)).into_owned();
    let gamma = &bd.gamma;
    if bd.ts.is_empty() {
        if let (false, Some(p)) = (bd.moved.is_empty(), &bd.p_op) {
            if bd.p_mixing {
                let s = sign_of(p, "P")?;
                return Ok(vec![if s > 0 { Piece::new(Family::TypeIID, &[n]) } else { Piece::new(Family::TypeIIC, &[n]) }]);
            }
            return Ok(clusters(p)?.iter().map(|c| Piece::new(Family::TypeIIA, &[c.dim()])).collect());
        }
        let f = if bd.moved.is_empty() { Family::A } else { Family::TypeIIA };
        return Ok(vec![Piece::new(f, &[n])]);
    }
    // on H a relatively nonmixing T acts as τ (antilinear), a mixing one through Γ = (γ ᾱ)_HH (linear)
    let tau = |i: usize| hh(&bd.ts[i].alpha);
    let big_gamma = |i: usize| hh(&(gamma * conj(&bd.ts[i].alpha)));
    let mixing = |i: usize| bd.ts[i].relative_mixing == Some(true);
    let one = |i: usize| -> Result<Piece> {
        if mixing(i) {
            let (p, q) = two_way(&big_gamma(i), "C T")?;
            Ok(Piece::new(Family::AIII, &[p, q]))
        } else {
            sym_or_quat(n, sign_of(&tau(i), "T")?)
        }
    };
    if bd.ts.len() == 1 {
        return Ok(vec![one(0)?]);
    }
    match (mixing(0), mixing(1)) {
        (true, false) | (false, true) => {
            let (im, inm) = if mixing(0) { (0, 1) } else { (1, 0) };
            let t = tau(inm);
            let s = sign_of(&t, "T1")?;
            let Some((fp, fm)) = two_spaces(&big_gamma(im), "C T")? else {
                // H anticommutes with a scalar: nothing survives
                return Ok(vec![if s > 0 {
                    Piece::new(Family::BDI, &[n, 0])
                } else {
                    Piece::new(Family::CII, &[n / 2, 0])
                }]);
            };
            Ok(match antilinear_fate(&t, &fp, "T1")? {
                Fate::Preserves => {
                    if s > 0 {
                        vec![Piece::new(Family::BDI, &[fp.ncols().max(fm.ncols()), fp.ncols().min(fm.ncols())])]
                    } else {
                        let (a, b) = (fp.ncols().max(fm.ncols()), fp.ncols().min(fm.ncols()));
                        vec![Piece::new(Family::CII, &[a / 2, b / 2])]
                    }
                }
                Fate::Swaps => {
                    let k = fp.ncols();
                    vec![if s > 0 { Piece::new(Family::CI, &[k]) } else { Piece::new(Family::DIII, &[k]) }]
                }
            })
        }
        (false, false) => {
            let (t1, t2) = (tau(0), tau(1));
            let s = sign_of(&t1, "T")?;
            let l = &t1 * conj(&t2);
            let cl = clusters(&l)?;
            if cl.len() == 1 {
                return Ok(vec![one(0)?]);
            }
            match antilinear_fate(&t1, &cl[0].basis, "T")? {
                Fate::Preserves => cl.iter().map(|c| sym_or_quat(c.dim(), s)).collect(),
                Fate::Swaps => {
                    if cl.len() != 2 {
                        return Err(Error::Degenerate("exchanged eigenspaces must come in one pair".into()));
                    }
                    Ok(vec![Piece::new(Family::A, &[cl[0].dim()])])
                }
            }
        }
        (true, true) => {
            let (g1, g2) = (big_gamma(0), big_gamma(1));
            let l = &g1 * &g2;
            let cl = clusters(&l)?;
            if cl.len() == 1 {
                return Ok(vec![one(0)?]);
            }
            match linear_fate(&g1, &cl[0].basis, "C T")? {
                Fate::Preserves => cl
                    .iter()
                    .map(|c| {
                        let (p, q) = two_way(&restrict_lin(&g1, &c.basis), "C T")?;
                        Ok(Piece::new(Family::AIII, &[p, q]))
                    })
                    .collect(),
                Fate::Swaps => {
                    if cl.len() != 2 {
                        return Err(Error::Degenerate("exchanged eigenspaces must come in one pair".into()));
                    }
                    Ok(vec![Piece::new(Family::A, &[cl[0].dim()])])
                }
            }
        }
    }
}

/// Family, parameters and dimensions of a block from its transferred data.
pub fn classify_block(bd: &BlockData) -> Result<CartanDescriptor> {
    let pieces = match bd.kind {
        UnitKind::Full => classify_full(bd)?,
        UnitKind::Diag => classify_diag(bd)?,
    };
    let note = if !bd.moved.is_empty() {
        Some(format!("unit exchanged by {}; orbit of {} units", bd.moved.join(", "), bd.orbit))
    } else {
        None
    };
    let mut d = CartanDescriptor::from_pieces(pieces, !bd.moved.is_empty(), note);
    if d.family == Family::Point && d.note.is_none() {
        d.note = Some("no nonzero Hamiltonians".into());
    }
    Ok(d)
}
