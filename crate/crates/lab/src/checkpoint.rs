//! Self-describing JSON checkpoints for GANs, single generators and ensembles.
//!
//! Floats are written in shortest round-trip form and parsed with full
//! precision, so `load(save(x)) == x` bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use ganlab_core::ensemble::{EnsembleKind, EnsembleModel, Member, Provenance};
use ganlab_core::gan::GanModel;
use ganlab_core::numerics::{Activation, Dense, Matrix, MlpParams};
use serde::{Deserialize, Serialize};

use crate::error::{IoContext, LabError, Result};
use crate::io::parse_json;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    /// Row-major `[out_dim, in_dim]`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetRecord {
    pub layers: Vec<LayerRecord>,
}

impl NetRecord {
    pub fn from_params(p: &MlpParams) -> Self {
        let layers = p
            .layers()
            .iter()
            .map(|l| LayerRecord {
                in_dim: l.in_dim(),
                out_dim: l.out_dim(),
                activation: l.activation(),
                weight: l.weight().as_slice().to_vec(),
                bias: l.bias().to_vec(),
            })
            .collect();
        NetRecord { layers }
    }

    fn into_params(self, path: &Path, field: &str) -> Result<MlpParams> {
        let layers = self
            .layers
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let at = format!("{field}.layers[{i}]");
                let w = Matrix::new(l.out_dim, l.in_dim, l.weight)
                    .map_err(|e| LabError::corrupt(path, format!("{at}.weight"), e))?;
                Dense::new(w, l.bias, l.activation).map_err(|e| LabError::corrupt(path, at, e))
            })
            .collect::<Result<Vec<_>>>()?;
        MlpParams::new(layers).map_err(|e| LabError::corrupt(path, format!("{field}.layers"), e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GanRecord {
    version: u32,
    epochs_trained: usize,
    init_seed: u64,
    generator: NetRecord,
    discriminator: NetRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRecord {
    version: u32,
    provenance: Provenance,
    generator: NetRecord,
}

/// Ensemble manifest: member checkpoints are separate files next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleManifest {
    pub version: u32,
    pub kind: EnsembleKind,
    /// Member checkpoint paths, relative to the manifest's directory.
    pub members: Vec<PathBuf>,
    pub provenance: Vec<Provenance>,
    pub stage_shares: Option<Vec<f64>>,
    pub gate_thresholds: Option<Vec<f64>>,
    /// Distinct member init seeds, in member order.
    pub seeds: Vec<u64>,
}

/// Writes to a temporary sibling and renames, so readers never see half a file.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, text).at(&tmp)?;
    fs::rename(&tmp, path).at(path)
}

fn to_json<T: Serialize>(path: &Path, value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| LabError::corrupt(path, "serialize", e))?;
    s.push('\n');
    Ok(s)
}

/// Parses `text`, checking the `version` field before anything else.
fn versioned<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).at(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| LabError::corrupt(path, "json", e))?;
    let found = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| LabError::corrupt(path, "version", "missing or not an integer"))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(LabError::Version {
            path: path.to_path_buf(),
            found,
            expected: FORMAT_VERSION,
        });
    }
    parse_json(path, &text)
}

pub fn save_gan(model: &GanModel, path: &Path) -> Result<()> {
    let rec = GanRecord {
        version: FORMAT_VERSION,
        epochs_trained: model.epochs_trained(),
        init_seed: model.init_seed(),
        generator: NetRecord::from_params(model.generator()),
        discriminator: NetRecord::from_params(model.discriminator()),
    };
    write_atomic(path, &to_json(path, &rec)?)
}

pub fn load_gan(path: &Path) -> Result<GanModel> {
    let rec: GanRecord = versioned(path)?;
    let g = rec.generator.into_params(path, "generator")?;
    let d = rec.discriminator.into_params(path, "discriminator")?;
    GanModel::from_parts(g, d, rec.epochs_trained, rec.init_seed)
        .map_err(|e| LabError::corrupt(path, "discriminator", e))
}

pub fn save_member(member: &Member, path: &Path) -> Result<()> {
    let rec = GeneratorRecord {
        version: FORMAT_VERSION,
        provenance: member.provenance,
        generator: NetRecord::from_params(&member.generator),
    };
    write_atomic(path, &to_json(path, &rec)?)
}

pub fn load_member(path: &Path) -> Result<Member> {
    let rec: GeneratorRecord = versioned(path)?;
    Ok(Member {
        generator: rec.generator.into_params(path, "generator")?,
        provenance: rec.provenance,
    })
}

/// Writes `manifest_path` plus `<stem>.member<i>.json` for every member.
pub fn save_ensemble(ens: &EnsembleModel, manifest_path: &Path) -> Result<EnsembleManifest> {
    let stem = manifest_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ensemble".into());
    let mut members = Vec::with_capacity(ens.len());
    for (i, m) in ens.members().iter().enumerate() {
        let name = PathBuf::from(format!("{stem}.member{i}.json"));
        save_member(m, &manifest_path.with_file_name(&name))?;
        members.push(name);
    }
    let mut seeds: Vec<u64> = Vec::new();
    for m in ens.members() {
        if !seeds.contains(&m.provenance.init_seed) {
            seeds.push(m.provenance.init_seed);
        }
    }
    let manifest = EnsembleManifest {
        version: FORMAT_VERSION,
        kind: ens.kind(),
        members,
        provenance: ens.members().iter().map(|m| m.provenance).collect(),
        stage_shares: ens.stage_shares().map(<[f64]>::to_vec),
        gate_thresholds: ens.gate_thresholds().map(<[f64]>::to_vec),
        seeds,
    };
    write_atomic(manifest_path, &to_json(manifest_path, &manifest)?)?;
    Ok(manifest)
}

pub fn load_ensemble(manifest_path: &Path) -> Result<EnsembleModel> {
    let manifest: EnsembleManifest = versioned(manifest_path)?;
    if manifest.members.len() != manifest.provenance.len() {
        return Err(LabError::corrupt(
            manifest_path,
            "provenance",
            format!(
                "{} entries for {} members",
                manifest.provenance.len(),
                manifest.members.len()
            ),
        ));
    }
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut members = Vec::with_capacity(manifest.members.len());
    for (i, rel) in manifest.members.iter().enumerate() {
        let m = load_member(&dir.join(rel))?;
        if m.provenance != manifest.provenance[i] {
            return Err(LabError::corrupt(
                manifest_path,
                format!("provenance[{i}]"),
                "disagrees with the member file",
            ));
        }
        members.push(m);
    }
    EnsembleModel::new(manifest.kind, members, manifest.stage_shares, manifest.gate_thresholds)
        .map_err(|e| LabError::corrupt(manifest_path, "members", e))
}

/// Either kind of saved model.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Gan(GanModel),
    Ensemble(EnsembleModel),
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            Checkpoint::Gan(m) => save_gan(m, path),
            Checkpoint::Ensemble(e) => save_ensemble(e, path).map(drop),
        }
    }

    /// Dispatches on the file's shape: ensemble manifests carry a `kind`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| LabError::corrupt(path, "json", e))?;
        if value.get("kind").is_some() {
            load_ensemble(path).map(Checkpoint::Ensemble)
        } else {
            load_gan(path).map(Checkpoint::Gan)
        }
    }
}
