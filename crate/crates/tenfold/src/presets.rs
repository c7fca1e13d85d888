//! Built-in physical setups, each with its expected symmetric-space family
//! and Hamiltonian-space dimension.

use crate::error::{Error, Result};
use crate::grouprep::UnitaryRep;
use crate::matkit::{self, c, kron, CMatrix, ONE, ZERO};
use crate::nambu::AntiunitarySpec;

/// Spin matrices (J_z, J_x) for the `dim`-dimensional irrep of SU(2).
pub fn spin_matrices(dim: usize) -> (CMatrix, CMatrix) {
    let j = (dim as f64 - 1.0) / 2.0;
    let mut jz = matkit::zeros(dim, dim);
    let mut jp = matkit::zeros(dim, dim);
    for k in 0..dim {
        let m = j - k as f64;
        jz[(k, k)] = c(m, 0.0);
        if k > 0 {
            // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>
            jp[(k - 1, k)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let jx = (&jp + jp.adjoint()) * c(0.5, 0.0);
    (jz, jx)
}

/// Two generators of a dense subgroup of SU(2) in the `dim`-dimensional irrep.
pub fn su2_generators(dim: usize) -> Vec<CMatrix> {
    let (jz, jx) = spin_matrices(dim);
    vec![matkit::expm(&(jz * c(0.0, -1.0))), matkit::expm(&(jx * c(0.0, -std::f64::consts::SQRT_2)))]
}

/// The spin-j irrep, indexed by 2j.
pub fn spin_rep(two_j: usize) -> UnitaryRep {
    UnitaryRep { dim: two_j + 1, generators: su2_generators(two_j + 1) }
}

/// i σ_y, the standard quaternionic structure on C².
pub fn isig2() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO])
}

fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

fn diag_real(v: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
}

/// U(1) particle number: every mode has charge +1, generator e^{i}.
fn charge(dim: usize) -> UnitaryRep {
    UnitaryRep { dim, generators: vec![matkit::eye(dim) * matkit::C64::from_polar(1.0, 1.0)] }
}

fn t(name: &str, mixing: bool, core: CMatrix) -> AntiunitarySpec {
    AntiunitarySpec { name: name.to_string(), mixing, core }
}

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub description: String,
    pub rep: UnitaryRep,
    pub antiunitaries: Vec<AntiunitarySpec>,
    pub expected_family: &'static str,
    pub expected_dim: usize,
}

/// The physical catalog, in display order.
pub const CATALOG: [&str; 11] = [
    "class_D",
    "class_DIII",
    "class_C",
    "class_CI",
    "class_AIII_dwave",
    "class_A",
    "class_AII",
    "class_AI",
    "class_AIII_dirac",
    "class_BDI",
    "class_CII",
];

/// Degenerate setups that are emitted on request but not listed by default.
pub const EXTRA: [&str; 1] = ["class_point"];

fn need(cond: bool, name: &str, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::schema("size", format!("{name}: {msg}")))
    }
}

/// Build a preset. `size` scales the orbital factor where the preset allows it.
pub fn preset(name: &str, size: Option<usize>) -> Result<Preset> {
    let p = match name {
        "class_D" => {
            let n = size.unwrap_or(3);
            need(n >= 1, name, "size must be positive")?;
            Preset {
                name: "class_D",
                description: format!("spinless fermions on {n} orbitals, no symmetry"),
                rep: UnitaryRep::trivial(n),
                antiunitaries: vec![],
                expected_family: "D",
                expected_dim: n * (2 * n - 1),
            }
        }
        "class_DIII" => {
            let n = size.unwrap_or(2);
            need(n >= 2 && n.is_multiple_of(2), name, "size must be even")?;
            Preset {
                name: "class_DIII",
                description: format!("spin-orbit coupled, time reversal with T^2 = -1 on {n} modes"),
                rep: UnitaryRep::trivial(n),
                antiunitaries: vec![t("T", false, kron(&isig2(), &matkit::eye(n / 2)))],
                expected_family: "DIII",
                expected_dim: n * (n - 1),
            }
        }
        "class_C" => {
            let m = size.unwrap_or(2);
            need(m >= 1, name, "size must be positive")?;
            Preset {
                name: "class_C",
                description: format!("spin-1/2 with SU(2) rotation symmetry, {m} orbitals"),
                rep: spin_rep(1).with_multiplicity(m),
                antiunitaries: vec![],
                expected_family: "C",
                expected_dim: m * (2 * m + 1),
            }
        }
        "class_CI" => {
            let m = size.unwrap_or(2);
            need(m >= 1, name, "size must be positive")?;
            Preset {
                name: "class_CI",
                description: format!("spin-1/2 with SU(2) and time reversal, {m} orbitals"),
                rep: spin_rep(1).with_multiplicity(m),
                antiunitaries: vec![t("T", false, kron(&isig2(), &matkit::eye(m)))],
                expected_family: "CI",
                expected_dim: m * (m + 1),
            }
        }
        "class_AIII_dwave" => {
            need(size.is_none(), name, "preset has a fixed size")?;
            let q = diag_real(&[1.0, 1.0, -1.0, -1.0]);
            let eq = matkit::expm(&(q * c(0.0, 1.0)));
            let mut gens: Vec<CMatrix> = su2_generators(2).iter().map(|g| kron(g, &matkit::eye(4))).collect();
            gens.push(kron(&matkit::eye(2), &eq));
            Preset {
                name: "class_AIII_dwave",
                description: "spin-1/2 with SU(2) x U(1)_Q and time reversal, Q = diag(1,1,-1,-1)".into(),
                rep: UnitaryRep { dim: 8, generators: gens },
                // T commutes with e^{iθQ}, so it anticommutes with Q and exchanges its sectors
                antiunitaries: vec![t("T", false, kron(&isig2(), &kron(&sigma_x(), &matkit::eye(2))))],
                expected_family: "AIII",
                expected_dim: 8,
            }
        }
        "class_A" => {
            let m = size.unwrap_or(3);
            need(m >= 1, name, "size must be positive")?;
            Preset {
                name: "class_A",
                description: format!("U(1) charge conservation on {m} orbitals"),
                rep: charge(m),
                antiunitaries: vec![],
                expected_family: "A",
                expected_dim: m * m,
            }
        }
        "class_AII" => {
            let m = size.unwrap_or(4);
            need(m >= 2 && m.is_multiple_of(2), name, "size must be even")?;
            Preset {
                name: "class_AII",
                description: format!("U(1) charge and time reversal with T^2 = -1 on {m} orbitals"),
                rep: charge(m),
                antiunitaries: vec![t("T", false, kron(&isig2(), &matkit::eye(m / 2)))],
                expected_family: "AII",
                expected_dim: (m / 2) * (m - 1),
            }
        }
        "class_AI" => {
            let m = size.unwrap_or(3);
            need(m >= 1, name, "size must be positive")?;
            Preset {
                name: "class_AI",
                description: format!("U(1) charge and time reversal with T^2 = +1 on {m} orbitals"),
                rep: charge(m),
                antiunitaries: vec![t("T", false, matkit::eye(m))],
                expected_family: "AI",
                expected_dim: m * (m + 1) / 2,
            }
        }
        "class_AIII_dirac" => {
            let m = size.unwrap_or(4);
            need(m >= 2 && m.is_multiple_of(2), name, "size must be even")?;
            let half = m / 2;
            let gamma: Vec<f64> = (0..m).map(|i| if i < half { 1.0 } else { -1.0 }).collect();
            Preset {
                name: "class_AIII_dirac",
                description: format!("U(1) charge with chiral particle-hole T = C Gamma on {m} orbitals"),
                rep: charge(m),
                antiunitaries: vec![t("T", true, diag_real(&gamma))],
                expected_family: "AIII",
                expected_dim: 2 * half * half,
            }
        }
        "class_BDI" => {
            need(size.is_none(), name, "preset has a fixed size")?;
            Preset {
                name: "class_BDI",
                description: "U(1) charge, T1 with T1^2 = +1 and chiral T = C Gamma, Gamma = diag(1,1,-1)".into(),
                rep: charge(3),
                antiunitaries: vec![t("T", true, diag_real(&[1.0, 1.0, -1.0])), t("T1", false, matkit::eye(3))],
                expected_family: "BDI",
                expected_dim: 2,
            }
        }
        "class_CII" => {
            need(size.is_none(), name, "preset has a fixed size")?;
            Preset {
                name: "class_CII",
                description: "U(1) charge, T1 with T1^2 = -1 and chiral T = C Gamma, Gamma = diag(1,1,-1,-1)".into(),
                rep: charge(4),
                antiunitaries: vec![
                    t("T", true, diag_real(&[1.0, 1.0, -1.0, -1.0])),
                    t("T1", false, kron(&matkit::eye(2), &isig2())),
                ],
                expected_family: "CII",
                expected_dim: 4,
            }
        }
        "class_point" => {
            let n = size.unwrap_or(2);
            need(n >= 1, name, "size must be positive")?;
            Preset {
                name: "class_point",
                description: format!("T = C on {n} orbitals, leaving no Hamiltonians"),
                rep: UnitaryRep::trivial(n),
                antiunitaries: vec![t("T", true, matkit::eye(n))],
                expected_family: "point",
                expected_dim: 0,
            }
        }
        other => return Err(Error::schema("preset", format!("unknown preset {other:?}"))),
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_matrices_satisfy_casimir() {
        for dim in 1..5 {
            let (jz, jx) = spin_matrices(dim);
            let j = (dim as f64 - 1.0) / 2.0;
            // J_y from [J_z, J_x] = i J_y
            let jy = (&jz * &jx - &jx * &jz) * c(0.0, -1.0);
            let cas = &jz * &jz + &jx * &jx + &jy * &jy;
            assert!(matkit::fro(&(cas - matkit::eye(dim) * c(j * (j + 1.0), 0.0))) < 1e-12);
        }
    }

    #[test]
    fn every_preset_builds() {
        for name in CATALOG.iter().chain(EXTRA.iter()) {
            let p = preset(name, None).unwrap();
            assert!(p.rep.dim <= 12, "{name}");
            crate::nambu::SymmetrySetup::new(p.rep.clone(), &p.antiunitaries).unwrap();
        }
    }

    #[test]
    fn bad_size_is_schema_error() {
        assert_eq!(preset("class_AII", Some(3)).unwrap_err().exit_code(), 2);
        assert_eq!(preset("nope", None).unwrap_err().exit_code(), 2);
    }
}
