//! Instance files: `{"version":1,"speeds":[...],"jobs":[...]}`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::numfmt::g17_array;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    version: u32,
    speeds: Vec<f64>,
    jobs: Vec<f64>,
}

/// Serializes an instance, one line, numbers at 17 significant digits.
pub fn instance_to_json(instance: &Instance) -> String {
    format!(
        "{{\"version\":{},\"speeds\":{},\"jobs\":{}}}\n",
        FORMAT_VERSION,
        g17_array(instance.speeds()),
        g17_array(instance.jobs())
    )
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if raw.version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {} (expected {FORMAT_VERSION})",
            raw.version
        )));
    }
    Instance::new(raw.speeds, raw.jobs)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    instance_from_json(&text)
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    fs::write(path, instance_to_json(instance))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
