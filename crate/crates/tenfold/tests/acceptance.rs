//! One line per acceptance criterion. Runs as a plain binary (no test harness)
//! and exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use tenfold::ensemble;
use tenfold::grouprep::{duality_class, DualityKind};
use tenfold::matkit::{self, fro, Tolerance};
use tenfold::pipeline::{self, Status};
use tenfold::pool;
use tenfold::presets::{self, spin_rep};
use tenfold::spec::SetupSpec;

const PRESET_DIMS: [(&str, usize); 12] = [
    ("class_D", 15),
    ("class_DIII", 2),
    ("class_C", 10),
    ("class_CI", 6),
    ("class_A", 9),
    ("class_AII", 6),
    ("class_AI", 6),
    ("class_AIII_dirac", 8),
    ("class_AIII_dwave", 8),
    ("class_BDI", 2),
    ("class_CII", 4),
    ("class_point", 0),
];
const CRIT1_SECONDS: f64 = 10.0;
const CRIT2_SECONDS: f64 = 60.0;
const CRIT6_SECONDS: f64 = 120.0;
const EVOLUTION_TOL: f64 = 1e-8;
const GAP_RATIO_TOL: f64 = 0.01;
const SPECTRA_SIZE: usize = 100;
const SPECTRA_DRAWS: usize = 500;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tenfold"));
    c.env_remove("TENFOLD_SEED");
    c
}

fn scratch() -> PathBuf {
    let d = std::env::temp_dir().join(format!("tenfold-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn emit(dir: &Path, name: &str, size: Option<usize>) -> Result<PathBuf, String> {
    let p = dir.join(format!("{name}-{}.json", size.unwrap_or(0)));
    let mut c = bin();
    c.args(["preset", "emit", name, "--out", p.to_str().unwrap()]);
    if let Some(s) = size {
        c.args(["--size", &s.to_string()]);
    }
    let o = c.output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("emit {name} exited {:?}", o.status.code()));
    }
    Ok(p)
}

fn crit1(dir: &Path) -> Result<String, String> {
    let start = Instant::now();
    for (name, want) in PRESET_DIMS {
        let p = emit(dir, name, None)?;
        let o = bin().args(["verify", p.to_str().unwrap(), "--json"]).output().map_err(|e| e.to_string())?;
        if o.status.code() != Some(0) {
            return Err(format!("{name}: exit {:?}", o.status.code()));
        }
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
        let got = v["total_dim"].as_u64().unwrap_or(u64::MAX) as usize;
        if got != want || v["total_dim_oracle"].as_u64() != Some(want as u64) {
            return Err(format!("{name}: dim {got}, oracle {}, expected {want}", v["total_dim_oracle"]));
        }
    }
    let t = start.elapsed().as_secs_f64();
    if t >= CRIT1_SECONDS {
        return Err(format!("took {t:.2} s"));
    }
    Ok(format!("{} presets, {t:.2} s", PRESET_DIMS.len()))
}

fn crit2() -> Result<String, String> {
    let start = Instant::now();
    let setups = pool::random_pool(50, 2024, 8).map_err(|e| e.to_string())?;
    for p in &setups {
        let a = pipeline::verify_setup(&p.setup, 0, Tolerance::default()).map_err(|e| format!("{}: {e}", p.label))?;
        if a.status != Status::Pass {
            return Err(format!("{}: {:?}", p.label, a.status));
        }
    }
    let t = start.elapsed().as_secs_f64();
    if t >= CRIT2_SECONDS {
        return Err(format!("took {t:.2} s"));
    }
    Ok(format!("{} setups, {t:.2} s", setups.len()))
}

fn crit3() -> Result<String, String> {
    let want = [DualityKind::Real, DualityKind::Quaternionic, DualityKind::Real, DualityKind::Quaternionic];
    for (two_j, w) in want.iter().enumerate() {
        let got = duality_class(&spin_rep(two_j)).map_err(|e| e.to_string())?.kind;
        if got != *w {
            return Err(format!("2j = {two_j}: {got:?}"));
        }
    }
    Ok("j = 0, 1/2, 1, 3/2".into())
}

fn crit4() -> Result<String, String> {
    let p = presets::preset("class_CI", None).map_err(|e| e.to_string())?;
    let setup = SetupSpec::from_preset(&p).to_setup().map_err(|e| e.to_string())?;
    let a = pipeline::classify_setup(&setup, 0).map_err(|e| e.to_string())?;
    for b in &a.blocks {
        let rec = &b.transfer;
        if rec.b_parity != Some(-1) {
            return Err(format!("b parity {:?}", rec.b_parity));
        }
        let t = rec.antiunitaries.iter().find(|t| t.name == "T").ok_or("no T")?;
        if t.original_square != -1 || t.transferred_square != 1 {
            return Err(format!("T^2 {} -> {}", t.original_square, t.transferred_square));
        }
    }
    Ok(format!("{} block(s), T^2 -1 -> +1, b alternating", a.blocks.len()))
}

fn crit5() -> Result<String, String> {
    let mut worst = 0.0f64;
    for (name, _) in PRESET_DIMS {
        let p = presets::preset(name, None).map_err(|e| e.to_string())?;
        let setup = SetupSpec::from_preset(&p).to_setup().map_err(|e| e.to_string())?;
        let space = ensemble::hamiltonian_space(&setup, Tolerance::default()).map_err(|e| e.to_string())?;
        if space.dim() == 0 {
            continue;
        }
        let g = &setup.nambu.gram_b;
        for h in ensemble::sample(&space, 20, 5).map_err(|e| e.to_string())? {
            for t in [0.1, 1.0] {
                let u = matkit::expm(&(&h * Complex64::new(0.0, -t)));
                let n = u.nrows();
                let unit = fro(&(u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)));
                let bform = fro(&(u.transpose() * g * &u - g));
                let full = ensemble::evolution_defect(&setup, &h, t);
                worst = worst.max(unit).max(bform).max(full);
                if unit.max(bform).max(full) > EVOLUTION_TOL {
                    return Err(format!("{name} t = {t}: unitarity {unit:.1e}, b {bform:.1e}, symmetries {full:.1e}"));
                }
            }
        }
    }
    Ok(format!("worst defect {worst:.1e}"))
}

fn ratios(mut levels: Vec<f64>) -> Vec<f64> {
    levels.sort_by(f64::total_cmp);
    let s: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    s.windows(2).map(|w| w[0].min(w[1]) / w[0].max(w[1])).collect()
}

/// Mean gap ratio of matrices drawn directly, without any symmetry machinery.
fn direct_mean_r(complex: bool, n: usize, draws: usize, seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut all = Vec::new();
    for _ in 0..draws {
        let mut normal = || -> f64 { StandardNormal.sample(&mut r) };
        let a = DMatrix::<Complex64>::from_fn(n, n, |_, _| Complex64::new(normal(), if complex { normal() } else { 0.0 }));
        let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        all.extend(ratios(h.symmetric_eigenvalues().iter().copied().collect()));
    }
    all.iter().sum::<f64>() / all.len() as f64
}

fn tool_mean_r(dir: &Path, name: &str) -> Result<f64, String> {
    let p = emit(dir, name, Some(SPECTRA_SIZE))?;
    let (out, stats) = (dir.join(format!("{name}-spectra.csv")), dir.join(format!("{name}-stats.json")));
    let o = bin()
        .args(["spectra", p.to_str().unwrap(), "--count", &SPECTRA_DRAWS.to_string(), "--seed", "3"])
        .args(["--out", out.to_str().unwrap(), "--stats", stats.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("spectra {name}: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    v["mean_gap_ratio"].as_f64().ok_or_else(|| "no mean_gap_ratio".into())
}

fn crit6(dir: &Path) -> Result<String, String> {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (name, complex) in [("class_A", true), ("class_AI", false)] {
        let tool = tool_mean_r(dir, name)?;
        let direct = direct_mean_r(complex, SPECTRA_SIZE, SPECTRA_DRAWS, 77);
        if (tool - direct).abs() > GAP_RATIO_TOL {
            return Err(format!("{name}: tool {tool:.4}, direct {direct:.4}"));
        }
        parts.push(format!("{name} {tool:.4} vs {direct:.4}"));
    }
    let t = start.elapsed().as_secs_f64();
    if t >= CRIT6_SECONDS {
        return Err(format!("took {t:.2} s"));
    }
    Ok(format!("{}, {t:.2} s", parts.join(", ")))
}

fn crit7(dir: &Path) -> Result<String, String> {
    let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
    for run in 0..2 {
        let mut files = Vec::new();
        for (name, _) in PRESET_DIMS {
            let p = emit(dir, name, None)?;
            let rep = dir.join(format!("{name}-report-{run}.json"));
            let o = bin().args(["verify", p.to_str().unwrap(), "--seed", "11", "--out", rep.to_str().unwrap()]).output().map_err(|e| e.to_string())?;
            files.push(o.stdout);
            files.push(std::fs::read(&rep).map_err(|e| e.to_string())?);
            if name == "class_point" {
                continue;
            }
            let s = dir.join(format!("{name}-sample-{run}.csv"));
            bin().args(["sample", p.to_str().unwrap(), "--count", "5", "--seed", "11", "--out", s.to_str().unwrap()]).output().map_err(|e| e.to_string())?;
            files.push(std::fs::read(&s).map_err(|e| e.to_string())?);
        }
        let p = emit(dir, "class_AI", Some(20))?;
        let (s, h) = (dir.join(format!("spec-{run}.csv")), dir.join(format!("hist-{run}.csv")));
        bin()
            .args(["spectra", p.to_str().unwrap(), "--count", "30", "--seed", "11"])
            .args(["--out", s.to_str().unwrap(), "--hist", h.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        files.push(std::fs::read(&s).map_err(|e| e.to_string())?);
        files.push(std::fs::read(&h).map_err(|e| e.to_string())?);
        outputs.push(files);
    }
    if outputs[0] != outputs[1] {
        return Err("outputs differ between runs".into());
    }
    Ok(format!("{} files identical", outputs[0].len()))
}

type Check<'a> = Box<dyn Fn() -> Result<String, String> + 'a>;

fn main() {
    let dir = scratch();
    let checks: Vec<(&str, Check)> = vec![
        ("1 presets verify", Box::new(|| crit1(&dir))),
        ("2 random pool", Box::new(crit2)),
        ("3 spin-j duality", Box::new(crit3)),
        ("4 CI transfer", Box::new(crit4)),
        ("5 evolution", Box::new(crit5)),
        ("6 gap ratios", Box::new(|| crit6(&dir))),
        ("7 determinism", Box::new(|| crit7(&dir))),
    ];
    let mut failed = 0;
    for (name, f) in &checks {
        match f() {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    if failed > 0 {
        std::process::exit(1);
    }
}
