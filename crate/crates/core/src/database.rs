//! Crystal database: a TOML file with one record per crystal and an inline
//! Sellmeier model per role.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dispersion::{Role, SellmeierForm, SellmeierModel};
use crate::error::{Error, Result};
use crate::phasematch::CrystalSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// The database shipped with the crate.
pub const BUILTIN_DATABASE: &str = include_str!("../data/crystals.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub name: String,
    pub form: SellmeierForm,
    pub coefficients: Vec<f64>,
    pub validity_um: [f64; 2],
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalRecord {
    pub name: String,
    pub absorption_edge_um: f64,
    pub pump: ModelRecord,
    pub signal: ModelRecord,
    pub idler: ModelRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatabaseFile {
    pub schema_version: u32,
    #[serde(default)]
    pub crystals: Vec<CrystalRecord>,
}

impl ModelRecord {
    pub fn to_model(&self) -> Result<SellmeierModel> {
        SellmeierModel::new(
            self.name.clone(),
            self.form,
            self.coefficients.clone(),
            self.validity_um[0],
            self.validity_um[1],
            self.source.clone(),
        )
    }
}

impl CrystalRecord {
    pub fn to_crystal(&self) -> Result<CrystalSpec> {
        let model = |role: Role, rec: &ModelRecord| {
            rec.to_model().map_err(|e| {
                Error::Database(format!("crystal '{}', {role} model: {e}", self.name))
            })
        };
        CrystalSpec::new(
            self.name.clone(),
            model(Role::Pump, &self.pump)?,
            model(Role::Signal, &self.signal)?,
            model(Role::Idler, &self.idler)?,
            self.absorption_edge_um,
        )
    }
}

#[derive(Debug, Clone)]
pub struct CrystalDatabase {
    schema_version: u32,
    crystals: Vec<CrystalSpec>,
    checksum: String,
}

impl CrystalDatabase {
    pub fn builtin() -> Self {
        CrystalDatabase::from_toml_str(BUILTIN_DATABASE).expect("shipped database is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Database(format!("cannot read {}: {e}", path.display())))?;
        CrystalDatabase::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: DatabaseFile =
            toml::from_str(text).map_err(|e| Error::Database(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Database(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let mut seen = HashSet::new();
        let mut crystals = Vec::with_capacity(file.crystals.len());
        for rec in &file.crystals {
            if !seen.insert(rec.name.to_ascii_lowercase()) {
                return Err(Error::Database(format!("duplicate crystal name '{}'", rec.name)));
            }
            crystals.push(rec.to_crystal()?);
        }
        Ok(CrystalDatabase {
            schema_version: file.schema_version,
            crystals,
            checksum: sha256_hex(text.as_bytes()),
        })
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    /// SHA-256 of the database text, hex encoded.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn crystals(&self) -> &[CrystalSpec] {
        &self.crystals
    }

    pub fn names(&self) -> Vec<&str> {
        self.crystals.iter().map(|c| c.name()).collect()
    }

    /// Case-insensitive lookup by crystal name.
    pub fn get(&self, name: &str) -> Result<&CrystalSpec> {
        self.crystals
            .iter()
            .find(|c| c.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::CrystalNotFound {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    /// Drops a crystal; returns whether it was present.
    pub fn remove(&mut self, name: &str) -> bool {
        let before = self.crystals.len();
        self.crystals.retain(|c| !c.name().eq_ignore_ascii_case(name));
        self.crystals.len() != before
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}
