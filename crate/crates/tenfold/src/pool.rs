//! Randomized small setups for oracle testing.
//!
//! V is a sum of irreps of one small group, each with a multiplicity
//! space. Antiunitaries are assembled sector by sector from intertwiners
//! conj(R_λ) → R_μ∘φ (nonmixing) or conj(R_λ) → conj(R_μ∘φ) (mixing), where φ
//! is the identity or, for cyclic groups, inversion. A random change of basis
//! of V hides the block structure at the end.

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::grouprep::{equivariant_hom, UnitaryRep};
use crate::matkit::{self, c, conj, fro, kron, CMatrix, C64, I, ONE, ZERO};
use crate::nambu::{AntiunitarySpec, SymmetrySetup};
use crate::presets::{isig2, su2_generators};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Group {
    Cyclic(usize),
    Q8,
    S3,
    Su2,
}

impl Group {
    pub fn name(&self) -> String {
        match self {
            Group::Cyclic(n) => format!("Z{n}"),
            Group::Q8 => "Q8".into(),
            Group::S3 => "S3".into(),
            Group::Su2 => "SU2".into(),
        }
    }

    /// Automorphisms used to twist antiunitaries: 1 is the identity, -1 inversion.
    fn twists(&self) -> &'static [i32] {
        match self {
            Group::Cyclic(_) => &[1, -1],
            _ => &[1],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Irrep {
    pub label: String,
    pub gens: Vec<CMatrix>,
}

fn m1(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

fn m2(a: [C64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &a)
}

pub fn irreps(group: Group) -> Vec<Irrep> {
    let r = |re: f64| c(re, 0.0);
    match group {
        Group::Cyclic(n) => (0..n)
            .map(|k| Irrep {
                label: format!("chi{k}"),
                gens: vec![m1(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))],
            })
            .collect(),
        Group::Q8 => {
            let mut out: Vec<Irrep> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                .iter()
                .map(|&(a, b)| Irrep { label: format!("({a:+},{b:+})"), gens: vec![m1(r(a)), m1(r(b))] })
                .collect();
            out.push(Irrep { label: "2".into(), gens: vec![m2([I, ZERO, ZERO, -I]), isig2()] });
            out
        }
        Group::S3 => {
            let (cs, sn) = ((2.0 * std::f64::consts::PI / 3.0).cos(), (2.0 * std::f64::consts::PI / 3.0).sin());
            vec![
                Irrep { label: "triv".into(), gens: vec![m1(ONE), m1(ONE)] },
                Irrep { label: "sign".into(), gens: vec![m1(-ONE), m1(ONE)] },
                Irrep {
                    label: "std".into(),
                    gens: vec![m2([ONE, ZERO, ZERO, -ONE]), m2([r(cs), r(-sn), r(sn), r(cs)])],
                },
            ]
        }
        Group::Su2 => (0..4).map(|two_j| Irrep { label: format!("j{two_j}/2"), gens: su2_generators(two_j + 1) }).collect(),
    }
}

fn twisted(gens: &[CMatrix], twist: i32) -> Vec<CMatrix> {
    if twist == 1 {
        gens.to_vec()
    } else {
        gens.iter().map(|g| g.adjoint()).collect()
    }
}

/// One isotypic sector R_λ ⊗ C^m of V.
#[derive(Clone, Debug)]
pub struct Sector {
    pub irrep: usize,
    pub m: usize,
}

#[derive(Clone, Debug)]
pub struct PoolSetup {
    pub label: String,
    pub setup: SymmetrySetup,
}

struct Layout<'a> {
    irreps: &'a [Irrep],
    sectors: &'a [Sector],
    offsets: Vec<usize>,
    dim: usize,
}

impl<'a> Layout<'a> {
    fn new(irreps: &'a [Irrep], sectors: &'a [Sector]) -> Self {
        let mut offsets = Vec::new();
        let mut dim = 0;
        for s in sectors {
            offsets.push(dim);
            dim += irreps[s.irrep].gens[0].nrows() * s.m;
        }
        Layout { irreps, sectors, offsets, dim }
    }

    fn d(&self, k: usize) -> usize {
        self.irreps[self.sectors[k].irrep].gens[0].nrows()
    }

    fn size(&self, k: usize) -> usize {
        self.d(k) * self.sectors[k].m
    }

    fn rep(&self) -> UnitaryRep {
        let ngen = self.irreps[0].gens.len();
        let generators = (0..ngen)
            .map(|g| {
                let blocks: Vec<CMatrix> =
                    self.sectors.iter().map(|s| kron(&self.irreps[s.irrep].gens[g], &matkit::eye(s.m))).collect();
                matkit::block_diag(&blocks.iter().collect::<Vec<_>>())
            })
            .collect();
        UnitaryRep { dim: self.dim, generators }
    }

    fn place(&self, a: &mut CMatrix, to: usize, from: usize, blk: &CMatrix) {
        a.view_mut((self.offsets[to], self.offsets[from]), (self.size(to), self.size(from))).copy_from(blk);
    }
}

/// The sector map of an antiunitary and its unitary irrep intertwiners.
struct Twist {
    perm: Vec<usize>,
    b: Vec<CMatrix>,
}

fn intertwiners(lay: &Layout, mixing: bool, twist: i32) -> Option<Twist> {
    let mut perm = Vec::new();
    let mut bs = Vec::new();
    for (k, s) in lay.sectors.iter().enumerate() {
        let source = UnitaryRep { dim: lay.d(k), generators: lay.irreps[s.irrep].gens.iter().map(conj).collect() };
        let mut found = None;
        for (l, t) in lay.sectors.iter().enumerate() {
            let mut gens = twisted(&lay.irreps[t.irrep].gens, twist);
            if mixing {
                gens = gens.iter().map(conj).collect();
            }
            let target = UnitaryRep { dim: lay.d(l), generators: gens };
            if target.dim != source.dim {
                continue;
            }
            let hom = equivariant_hom(&source, &target).ok()?;
            if hom.len() == 1 {
                found = Some((l, hom[0].clone()));
                break;
            }
        }
        let (l, b) = found?;
        let scale = (fro(&b).powi(2) / lay.d(k) as f64).sqrt();
        let mut b = b / c(scale, 0.0);
        if mixing && l == k {
            // B² is a scalar phase; fix it to 1.
            let ph = b.clone() * &b;
            let z = ph[(0, 0)].sqrt();
            b /= z;
        }
        perm.push(l);
        bs.push(b);
    }
    for (k, &l) in perm.iter().enumerate() {
        if perm[l] != k || lay.sectors[k].m != lay.sectors[l].m {
            return None;
        }
    }
    Some(Twist { perm, b: bs })
}

fn real_sign(z: C64) -> Option<i8> {
    if (z - ONE).norm() < 1e-8 {
        Some(1)
    } else if (z + ONE).norm() < 1e-8 {
        Some(-1)
    } else {
        None
    }
}

fn unitary(n: usize, r: &mut ChaCha20Rng) -> CMatrix {
    matkit::random_unitary_with(n, r).expect("n >= 1")
}

fn j_canonical(m: usize) -> CMatrix {
    kron(&isig2(), &matkit::eye(m / 2))
}

fn random_signs(n: usize, r: &mut ChaCha20Rng) -> CMatrix {
    CMatrix::from_diagonal(&matkit::CVector::from_fn(n, |_, _| if r.random_bool(0.5) { ONE } else { -ONE }))
}

/// Multiplicity factor a with a·ā = e (nonmixing, fixed sector).
fn nonmixing_factor(m: usize, e: i8, r: &mut ChaCha20Rng) -> Option<CMatrix> {
    let v = unitary(m, r);
    if e == 1 {
        Some(&v * v.transpose())
    } else if m.is_multiple_of(2) {
        Some(&v * j_canonical(m) * v.transpose())
    } else {
        None
    }
}

/// Multiplicity factor a with a² = s (mixing, fixed sector).
fn mixing_factor(m: usize, s: i8, r: &mut ChaCha20Rng) -> CMatrix {
    let v = unitary(m, r);
    let d = random_signs(m, r) * if s == 1 { ONE } else { I };
    &v * d * v.adjoint()
}

fn single_t(lay: &Layout, mixing: bool, twist: i32, sign: i8, r: &mut ChaCha20Rng) -> Option<CMatrix> {
    let tw = intertwiners(lay, mixing, twist)?;
    let mut a = matkit::zeros(lay.dim, lay.dim);
    let sgn = c(sign as f64, 0.0);
    for k in 0..lay.sectors.len() {
        let l = tw.perm[k];
        let m = lay.sectors[k].m;
        if l == k {
            let f = if mixing {
                mixing_factor(m, sign, r)
            } else {
                let eps = real_sign((&tw.b[k] * conj(&tw.b[k]))[(0, 0)])?;
                nonmixing_factor(m, sign * eps, r)?
            };
            lay.place(&mut a, k, k, &kron(&tw.b[k], &f));
        } else if k < l {
            let fwd = kron(&tw.b[k], &unitary(m, r));
            let back = if mixing { fwd.adjoint() } else { fwd.transpose() } * sgn;
            lay.place(&mut a, l, k, &fwd);
            lay.place(&mut a, k, l, &back);
        }
    }
    Some(a)
}

/// Canonical multiplicity pair (a, c) with a·ā = e, c² = s and c̄·a = τ·a·c.
fn menu_pair(m: usize, e: i8, s: i8, tau: C64, r: &mut ChaCha20Rng) -> Option<(CMatrix, CMatrix)> {
    let a0 = if e == 1 {
        matkit::eye(m)
    } else if m.is_multiple_of(2) {
        j_canonical(m)
    } else {
        return None;
    };
    let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let sz = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    for _ in 0..64 {
        let phase = if r.random_bool(0.5) { ONE } else { I };
        let shape = if m.is_multiple_of(2) { r.random_range(0..4) } else { 0 };
        let s0 = match shape {
            0 => random_signs(m, r),
            1 => kron(&sz, &random_signs(m / 2, r)),
            2 => kron(&sx, &random_signs(m / 2, r)),
            _ => kron(&isig2(), &random_signs(m / 2, r)),
        };
        let c0 = s0 * phase;
        let sq = &c0 * &c0 - matkit::eye(m) * c(s as f64, 0.0);
        let rel = conj(&c0) * &a0 - &a0 * &c0 * tau;
        if fro(&sq) < 1e-10 && fro(&rel) < 1e-10 {
            let u = unitary(m, r);
            return Some((&u * a0 * u.transpose(), conj(&u) * c0 * u.transpose()));
        }
    }
    None
}

/// A mixing T and a nonmixing T1 that both fix every sector and commute
/// up to `sigma`.
fn t_pair(lay: &Layout, signs: (i8, i8), sigma: i8, r: &mut ChaCha20Rng) -> Option<(CMatrix, CMatrix)> {
    let twists = [1, -1];
    let tw = twists.iter().filter_map(|&t| intertwiners(lay, true, t)).find(|t| t.perm.iter().enumerate().all(|(k, &l)| k == l))?;
    let tw1 =
        twists.iter().filter_map(|&t| intertwiners(lay, false, t)).find(|t| t.perm.iter().enumerate().all(|(k, &l)| k == l))?;
    let mut a = matkit::zeros(lay.dim, lay.dim);
    let mut a1 = matkit::zeros(lay.dim, lay.dim);
    for k in 0..lay.sectors.len() {
        let (b, b1) = (&tw.b[k], &tw1.b[k]);
        let eps = real_sign((b1 * conj(b1))[(0, 0)])?;
        // conj(B)·B1 = κ·B1·B
        let lhs = conj(b) * b1;
        let rhs = b1 * b;
        let kappa = (rhs.adjoint() * &lhs).trace() / c(lay.d(k) as f64, 0.0);
        if fro(&(&lhs - &rhs * kappa)) > 1e-8 {
            return None;
        }
        let tau = c(sigma as f64, 0.0) / kappa;
        let (f1, f) = menu_pair(lay.sectors[k].m, signs.1 * eps, signs.0, tau, r)?;
        lay.place(&mut a, k, k, &kron(b, &f));
        lay.place(&mut a1, k, k, &kron(b1, &f1));
    }
    Some((a, a1))
}

fn draw_sectors(group: Group, r: &mut ChaCha20Rng, max_dim: usize) -> Vec<Sector> {
    let reps = irreps(group);
    loop {
        let count = r.random_range(1..=3usize.min(reps.len()));
        let mut picked: Vec<usize> = Vec::new();
        while picked.len() < count {
            let k = r.random_range(0..reps.len());
            if !picked.contains(&k) {
                picked.push(k);
            }
        }
        picked.sort();
        let sectors: Vec<Sector> = picked.iter().map(|&k| Sector { irrep: k, m: r.random_range(1..=3) }).collect();
        let dim: usize = sectors.iter().map(|s| reps[s.irrep].gens[0].nrows() * s.m).sum();
        if dim <= max_dim {
            return sectors;
        }
    }
}

const GROUPS: [Group; 5] = [Group::Cyclic(3), Group::Cyclic(4), Group::Q8, Group::S3, Group::Su2];

fn sign_str(s: i8) -> &'static str {
    if s > 0 {
        "+"
    } else {
        "-"
    }
}

fn try_draw(r: &mut ChaCha20Rng, max_dim: usize) -> Option<PoolSetup> {
    let group = GROUPS[r.random_range(0..GROUPS.len())];
    let reps = irreps(group);
    let sectors = draw_sectors(group, r, max_dim);
    let lay = Layout::new(&reps, &sectors);
    let mut label = format!(
        "{}[{}]",
        group.name(),
        sectors.iter().map(|s| format!("{}x{}", reps[s.irrep].label, s.m)).collect::<Vec<_>>().join(",")
    );
    let n_t = match r.random_range(0..10) {
        0..=1 => 0,
        2..=5 => 1,
        _ => 2,
    };
    let sign = |r: &mut ChaCha20Rng| if r.random_bool(0.5) { 1i8 } else { -1 };
    let specs = match n_t {
        0 => vec![],
        1 => {
            let mixing = r.random_bool(0.5);
            let tws = group.twists();
            let twist = tws[r.random_range(0..tws.len())];
            let s = sign(r);
            let core = single_t(&lay, mixing, twist, s, r)?;
            label += &format!(" T({}{}, twist {twist})", if mixing { "mixing" } else { "nonmixing" }, sign_str(s));
            vec![AntiunitarySpec { name: "T".into(), mixing, core }]
        }
        _ => {
            let (s, s1, sigma) = (sign(r), sign(r), sign(r));
            let (a, a1) = t_pair(&lay, (s, s1), sigma, r)?;
            label += &format!(" T(mixing{}) T1(nonmixing{}) sigma{}", sign_str(s), sign_str(s1), sign_str(sigma));
            vec![
                AntiunitarySpec { name: "T".into(), mixing: true, core: a },
                AntiunitarySpec { name: "T1".into(), mixing: false, core: a1 },
            ]
        }
    };
    let setup = SymmetrySetup::new(lay.rep(), &specs).ok()?;
    let u = unitary(lay.dim, r);
    let setup = setup.transform(&u).ok()?;
    Some(PoolSetup { label, setup })
}

/// `count` random setups with dim V ≤ `max_dim`, deterministic in `seed`.
pub fn random_pool(count: usize, seed: u64, max_dim: usize) -> Result<Vec<PoolSetup>> {
    (0..count as u64)
        .map(|i| {
            let mut r = matkit::rng(seed, 1000 + i);
            for _ in 0..500 {
                if let Some(p) = try_draw(&mut r, max_dim) {
                    return Ok(p);
                }
            }
            Err(Error::structural(format!("could not draw pool setup {i}")))
        })
        .collect()
}
