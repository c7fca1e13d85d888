//! JSON setup files and reports.
//!
//! Complex matrices are stored as `{"re": [[..]], "im": [[..]]}` with rows
//! outermost; `im` may be omitted for real matrices.

use serde::{Deserialize, Serialize};

use crate::classify::Family;
use crate::error::{Error, Result};
use crate::grouprep::UnitaryRep;
use crate::matkit::{c, CMatrix, Tolerance};
use crate::nambu::{AntiunitarySpec, SymmetrySetup};
use crate::pipeline::{Analysis, Status};
use crate::presets::Preset;
use crate::transfer::TransferRecord;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntiunitaryJson {
    pub name: String,
    pub mixing: bool,
    pub core: MatrixJson,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub family: String,
    pub dim_h: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupSpec {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub dim_v: usize,
    pub g0_generators: Vec<MatrixJson>,
    #[serde(default)]
    pub antiunitaries: Vec<AntiunitaryJson>,
    #[serde(default)]
    pub options: Options,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&crate::matkit::C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        let im = rows(|z| z.im);
        let real = im.iter().flatten().all(|&x| x == 0.0);
        MatrixJson { re: rows(|z| z.re), im: if real { None } else { Some(im) } }
    }

    /// Parse an `n × n` matrix; `field` names the location for error messages.
    pub fn to_matrix(&self, n: usize, field: &str) -> Result<CMatrix> {
        let check = |part: &Vec<Vec<f64>>, which: &str| -> Result<()> {
            if part.len() != n {
                return Err(Error::schema(format!("{field}.{which}"), format!("expected {n} rows, got {}", part.len())));
            }
            for (i, row) in part.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::schema(
                        format!("{field}.{which}[{i}]"),
                        format!("expected {n} columns, got {}", row.len()),
                    ));
                }
                if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                    return Err(Error::schema(format!("{field}.{which}[{i}][{j}]"), "entry is not finite"));
                }
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        Ok(CMatrix::from_fn(n, n, |i, j| c(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))))
    }
}

/// Parse a setup file. Syntax and type errors are schema errors.
pub fn parse(text: &str) -> Result<SetupSpec> {
    let spec: SetupSpec = serde_json::from_str(text)
        .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    if spec.schema_version != SCHEMA_VERSION {
        return Err(Error::schema(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", spec.schema_version),
        ));
    }
    Ok(spec)
}

impl SetupSpec {
    pub fn tolerance(&self) -> Result<Tolerance> {
        match self.options.tolerance {
            Some(t) => Tolerance::new(t.rel, t.abs).map_err(|_| Error::schema("options.tolerance", "rel and abs must be positive")),
            None => Ok(Tolerance::default()),
        }
    }

    /// Shape checks and assembly of the setup. Numerical properties
    /// (unitarity, involution, compatibility) are checked by the library.
    pub fn to_setup(&self) -> Result<SymmetrySetup> {
        let n = self.dim_v;
        if n == 0 {
            return Err(Error::schema("dim_v", "must be at least 1"));
        }
        if self.g0_generators.is_empty() {
            return Err(Error::schema("g0_generators", "list is empty; use the identity for the trivial group"));
        }
        let gens = self
            .g0_generators
            .iter()
            .enumerate()
            .map(|(i, g)| g.to_matrix(n, &format!("g0_generators[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        if self.antiunitaries.len() > 2 {
            return Err(Error::schema("antiunitaries", format!("at most two entries, got {}", self.antiunitaries.len())));
        }
        let mut specs = Vec::new();
        for (i, a) in self.antiunitaries.iter().enumerate() {
            if a.name != "T" && a.name != "T1" {
                return Err(Error::schema(format!("antiunitaries[{i}].name"), format!("must be \"T\" or \"T1\", got {:?}", a.name)));
            }
            if specs.iter().any(|s: &AntiunitarySpec| s.name == a.name) {
                return Err(Error::schema(format!("antiunitaries[{i}].name"), format!("duplicate name {:?}", a.name)));
            }
            let core = a.core.to_matrix(n, &format!("antiunitaries[{i}].core"))?;
            specs.push(AntiunitarySpec { name: a.name.clone(), mixing: a.mixing, core });
        }
        SymmetrySetup::new(UnitaryRep::new(gens)?, &specs)
    }

    pub fn from_preset(p: &Preset) -> Self {
        let mut notes = Vec::new();
        if matches!(p.name, "class_C" | "class_CI" | "class_AIII_dwave") {
            notes.push("SU(2) is given by two topological generators exp(-i 1.0 J_z) and exp(-i sqrt(2) J_x)".to_string());
        }
        SetupSpec {
            schema_version: SCHEMA_VERSION,
            name: p.name.to_string(),
            description: p.description.clone(),
            notes,
            dim_v: p.rep.dim,
            g0_generators: p.rep.generators.iter().map(MatrixJson::from_matrix).collect(),
            antiunitaries: p
                .antiunitaries
                .iter()
                .map(|a| AntiunitaryJson { name: a.name.clone(), mixing: a.mixing, core: MatrixJson::from_matrix(&a.core) })
                .collect(),
            options: Options::default(),
            expected: Some(Expected { family: p.expected_family.to_string(), dim_h: p.expected_dim }),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub component_tags: Vec<String>,
    pub block_dim: usize,
    pub doubled: bool,
    pub family: Family,
    pub label: String,
    pub params: Vec<usize>,
    pub copies: usize,
    pub description: String,
    pub dim_g: usize,
    pub dim_k: usize,
    pub dim_p: usize,
    pub dim_formula: usize,
    pub dim_oracle: Option<usize>,
    pub type2: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub transfer: TransferRecord,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub setup: String,
    pub dim_v: usize,
    pub seed: u64,
    pub tolerance: Tolerance,
    pub blocks: Vec<BlockReport>,
    pub total_dim: usize,
    pub total_dim_oracle: Option<usize>,
    pub unsplit_oracle: Option<usize>,
    pub status: Status,
}

impl Report {
    pub fn new(command: &str, spec: &SetupSpec, seed: u64, tolerance: Tolerance, a: &Analysis) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            setup: spec.name.clone(),
            dim_v: spec.dim_v,
            seed,
            tolerance,
            blocks: a
                .blocks
                .iter()
                .map(|b| BlockReport {
                    component_tags: b.component_tags.clone(),
                    block_dim: b.block_dim,
                    doubled: b.doubled,
                    family: b.descriptor.family,
                    label: b.descriptor.label.clone(),
                    params: b.descriptor.params.clone(),
                    copies: b.descriptor.copies,
                    description: b.description.clone(),
                    dim_g: b.descriptor.dim_g,
                    dim_k: b.descriptor.dim_k,
                    dim_p: b.descriptor.dim_p,
                    dim_formula: b.dim_formula,
                    dim_oracle: b.dim_oracle,
                    type2: b.descriptor.type2,
                    note: b.descriptor.note.clone(),
                    transfer: b.transfer.clone(),
                    status: b.status,
                })
                .collect(),
            total_dim: a.total_dim,
            total_dim_oracle: a.total_dim_oracle,
            unsplit_oracle: a.unsplit_oracle,
            status: a.status,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Plain-text table, one line per block.
    pub fn table(&self) -> String {
        let mut out = format!("setup {} (dim V = {}, seed {})\n", if self.setup.is_empty() { "-" } else { &self.setup }, self.dim_v, self.seed);
        for (i, b) in self.blocks.iter().enumerate() {
            let oracle = b.dim_oracle.map_or("-".to_string(), |d| d.to_string());
            out += &format!(
                "block {i} [{}] dim {}: {} {} | formula {} oracle {} {}\n",
                b.component_tags.join(" "),
                b.block_dim,
                b.family,
                b.description,
                b.dim_formula,
                oracle,
                b.status.as_str()
            );
        }
        let unsplit = self.unsplit_oracle.map_or("-".to_string(), |d| d.to_string());
        out += &format!("total dim H = {} (unsplit oracle {unsplit}) {}\n", self.total_dim, self.status.as_str());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn preset_round_trip() {
        for name in presets::CATALOG {
            let p = presets::preset(name, None).unwrap();
            let spec = SetupSpec::from_preset(&p);
            let text = serde_json::to_string(&spec).unwrap();
            let back = parse(&text).unwrap();
            assert_eq!(back, spec);
            let s = back.to_setup().unwrap();
            assert_eq!(s.rep_v, p.rep);
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        let bad = r#"{"schema_version": 1, "dim_v": 2, "g0_generators": [{"re": [[1, 0], [0]]}]}"#;
        match parse(bad).unwrap().to_setup() {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "g0_generators[0].re[1]"),
            other => panic!("{other:?}"),
        }
        let empty = r#"{"schema_version": 1, "dim_v": 2, "g0_generators": []}"#;
        assert_eq!(parse(empty).unwrap().to_setup().unwrap_err().exit_code(), 2);
        assert_eq!(parse("{").unwrap_err().exit_code(), 2);
        let unknown = r#"{"schema_version": 1, "dim_v": 1, "g0_generators": [{"re": [[1]]}], "extra": 0}"#;
        assert_eq!(parse(unknown).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn imaginary_part_is_optional() {
        let m = MatrixJson { re: vec![vec![0.0, 1.0], vec![1.0, 0.0]], im: None };
        let x = m.to_matrix(2, "m").unwrap();
        assert_eq!(MatrixJson::from_matrix(&x), m);
    }
}
