//! On-disk instance format.

use std::fs;
use std::path::Path;

use assortvis::Instance;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Field order and names of the JSON file. Products keep the order they have
/// in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub prices: Vec<f64>,
    pub weights: Vec<f64>,
    pub visibility: Vec<usize>,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub k: Option<usize>,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        Self {
            prices: inst.prices().to_vec(),
            weights: inst.weights().to_vec(),
            visibility: inst.visibilities().to_vec(),
            horizon: inst.horizon(),
            k: inst.cap(),
        }
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> assortvis::Result<Instance> {
        Instance::new(self.prices, self.weights, self.visibility, self.horizon, self.k)
    }
}

pub fn parse(text: &str) -> Result<Instance, CliError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(CliError::Json)?;
    Ok(file.into_instance()?)
}

pub fn to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from(inst)).expect("instance serializes")
}

pub fn read(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}
