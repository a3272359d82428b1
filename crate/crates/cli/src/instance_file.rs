//! TOML instance files.
//!
//! ```toml
//! name = "identity"
//! description = "z = x"
//! x_symbols = ["0", "1"]
//! y_symbols = ["0", "1"]
//! z_symbols = ["0", "1"]
//! p_xy = [[0.25, 0.25], [0.25, 0.25]]          # [x][y]
//! p_z_given_xy = [                              # [x][y][z]
//!   [[1.0, 0.0], [1.0, 0.0]],
//!   [[0.0, 1.0], [0.0, 1.0]],
//! ]
//! ```
//!
//! Declaration order of the symbol lists is the canonical order used for
//! every tie-break. The digest is the SHA-256 of [`to_canonical_toml`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use securefn_core::probcore::NORMALIZATION_TOL;
use securefn_core::{Alphabet, Instance};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub x_symbols: Vec<String>,
    pub y_symbols: Vec<String>,
    pub z_symbols: Vec<String>,
    pub p_xy: Vec<Vec<f64>>,
    pub p_z_given_xy: Vec<Vec<Vec<f64>>>,
}

pub fn parse_instance(path: &Path) -> CliResult<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_instance_str(&text).map_err(|e| CliError {
        message: format!("{}: {}", path.display(), e.message),
        ..e
    })
}

pub fn parse_instance_str(text: &str) -> CliResult<Instance> {
    let file: InstanceFile =
        toml::from_str(text).map_err(|e| CliError::invalid(format!("parse error: {e}")))?;
    file.validate()?;
    file.into_instance()
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        let (nx, ny, nz) = (instance.x().size(), instance.y().size(), instance.z().size());
        InstanceFile {
            name: instance.name.clone(),
            description: instance.description.clone(),
            x_symbols: instance.x().symbols().to_vec(),
            y_symbols: instance.y().symbols().to_vec(),
            z_symbols: instance.z().symbols().to_vec(),
            p_xy: (0..nx)
                .map(|x| (0..ny).map(|y| instance.p_xy_at(x, y)).collect())
                .collect(),
            p_z_given_xy: (0..nx)
                .map(|x| {
                    (0..ny)
                        .map(|y| (0..nz).map(|z| instance.p_z(z, x, y)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Checks every invariant, naming the offending field and cell.
    pub fn validate(&self) -> CliResult<()> {
        for (field, symbols) in [
            ("x_symbols", &self.x_symbols),
            ("y_symbols", &self.y_symbols),
            ("z_symbols", &self.z_symbols),
        ] {
            if symbols.is_empty() {
                return Err(CliError::invalid(format!("{field} is empty")));
            }
            for (i, s) in symbols.iter().enumerate() {
                if symbols[..i].contains(s) {
                    return Err(CliError::invalid(format!("{field} lists {s:?} twice")));
                }
            }
        }
        let (xs, ys, zs) = (&self.x_symbols, &self.y_symbols, &self.z_symbols);
        if self.p_xy.len() != xs.len() {
            return Err(CliError::invalid(format!(
                "p_xy has {} rows, expected one per x symbol ({})",
                self.p_xy.len(),
                xs.len()
            )));
        }
        let mut total = 0.0;
        for (x, row) in self.p_xy.iter().enumerate() {
            if row.len() != ys.len() {
                return Err(CliError::invalid(format!(
                    "p_xy[x={:?}] has {} entries, expected {}",
                    xs[x],
                    row.len(),
                    ys.len()
                )));
            }
            for (y, &p) in row.iter().enumerate() {
                check_entry(p, || format!("p_xy[x={:?}][y={:?}]", xs[x], ys[y]))?;
                total += p;
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(CliError::invalid(format!("p_xy sums to {total}, expected 1")));
        }
        if self.p_z_given_xy.len() != xs.len() {
            return Err(CliError::invalid(format!(
                "p_z_given_xy has {} blocks, expected one per x symbol ({})",
                self.p_z_given_xy.len(),
                xs.len()
            )));
        }
        for (x, block) in self.p_z_given_xy.iter().enumerate() {
            if block.len() != ys.len() {
                return Err(CliError::invalid(format!(
                    "p_z_given_xy[x={:?}] has {} rows, expected {}",
                    xs[x],
                    block.len(),
                    ys.len()
                )));
            }
            for (y, row) in block.iter().enumerate() {
                let cell = || format!("p_z_given_xy[x={:?}][y={:?}]", xs[x], ys[y]);
                if row.len() != zs.len() {
                    return Err(CliError::invalid(format!(
                        "{} has {} entries, expected {}",
                        cell(),
                        row.len(),
                        zs.len()
                    )));
                }
                for (z, &p) in row.iter().enumerate() {
                    check_entry(p, || format!("{}[z={:?}]", cell(), zs[z]))?;
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(CliError::invalid(format!("{} sums to {s}, expected 1", cell())));
                }
            }
        }
        Ok(())
    }

    pub fn into_instance(self) -> CliResult<Instance> {
        let x = Alphabet::new("X", self.x_symbols)?;
        let y = Alphabet::new("Y", self.y_symbols)?;
        let z = Alphabet::new("Z", self.z_symbols)?;
        let p_xy = self.p_xy.into_iter().flatten().collect();
        let t = self.p_z_given_xy.into_iter().flatten().flatten().collect();
        Ok(Instance::new(self.name, x, y, z, p_xy, t)?.with_description(self.description))
    }
}

fn check_entry(p: f64, cell: impl Fn() -> String) -> CliResult<()> {
    if !p.is_finite() {
        return Err(CliError::invalid(format!("{} is not a finite number", cell())));
    }
    if p < 0.0 {
        return Err(CliError::invalid(format!("{} = {p} is negative", cell())));
    }
    Ok(())
}

/// Fields in fixed order, symbols in declaration order, floats in shortest
/// round-trip form.
pub fn to_canonical_toml(instance: &Instance) -> String {
    toml::to_string(&InstanceFile::from_instance(instance)).expect("instance files serialize")
}

/// `sha256:` followed by the hex digest of the canonical text.
pub fn digest(instance: &Instance) -> String {
    let hash = Sha256::digest(to_canonical_toml(instance).as_bytes());
    format!("sha256:{}", hex::encode(hash))
}
