//! JSON system-definition files mirroring `SpinSystemSpec`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spinsim_core::system::{
    Channel, EquivalentGroup, HeteroCoupling, MoleculeTemplate, SpinSystemSpec, DEFAULT_BIN_HZ,
};

#[derive(Debug, thiserror::Error)]
pub enum SysFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid system file: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unknown molecule template '{0}'")]
    Template(String),
    #[error("invalid system: {0}")]
    Invalid(spinsim_core::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelFile {
    species: String,
    #[serde(default)]
    offset_hz: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroupFile {
    channel: String,
    count: usize,
    d_homo_hz: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CouplingFile {
    a: String,
    b: String,
    #[serde(default)]
    j_hz: f64,
    #[serde(default)]
    d_hz: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SystemFile {
    name: String,
    #[serde(default)]
    template: Option<String>,
    channels: Vec<ChannelFile>,
    equivalent_group: GroupFile,
    #[serde(default)]
    hetero_couplings: Vec<CouplingFile>,
    #[serde(default)]
    bin_hz: Option<f64>,
}

/// Parse a system definition from JSON text.
pub fn parse_system(text: &str) -> Result<SpinSystemSpec, SysFileError> {
    let file: SystemFile = serde_json::from_str(text)?;
    let template = match &file.template {
        None => None,
        Some(name) => Some(
            MoleculeTemplate::parse(name).ok_or_else(|| SysFileError::Template(name.clone()))?,
        ),
    };
    let spec = SpinSystemSpec {
        name: file.name,
        template,
        channels: file
            .channels
            .into_iter()
            .map(|c| Channel {
                species: c.species,
                offset_hz: c.offset_hz,
            })
            .collect(),
        equivalent_group: EquivalentGroup {
            channel: file.equivalent_group.channel,
            count: file.equivalent_group.count,
            d_homo_hz: file.equivalent_group.d_homo_hz,
        },
        hetero_couplings: file
            .hetero_couplings
            .into_iter()
            .map(|c| HeteroCoupling {
                a: c.a,
                b: c.b,
                j_hz: c.j_hz,
                d_hz: c.d_hz,
            })
            .collect(),
        bin_hz: file.bin_hz.unwrap_or(DEFAULT_BIN_HZ),
    };
    spec.validate().map_err(SysFileError::Invalid)?;
    Ok(spec)
}

/// Load and validate a system definition from a file.
pub fn load_system(path: &Path) -> Result<SpinSystemSpec, SysFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| SysFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system(&text)
}
