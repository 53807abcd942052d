//! Scenarios shipped with the library.

use super::config::Scenario;
use crate::error::{Error, Result};

/// Name and TOML source of every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("default", include_str!("../../presets/default.toml")),
    ("freeze_thaw", include_str!("../../presets/freeze_thaw.toml")),
    ("zero_forcing", include_str!("../../presets/zero_forcing.toml")),
    ("linear_regime", include_str!("../../presets/linear_regime.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

pub fn preset(name: &str) -> Result<Scenario> {
    let (_, src) = PRESETS.iter().find(|p| p.0 == name).ok_or_else(|| {
        let known: Vec<_> = preset_names().collect();
        Error::InvalidParameter(format!("unknown preset '{name}', known: {}", known.join(", ")))
    })?;
    Scenario::from_toml_str(src)
}
