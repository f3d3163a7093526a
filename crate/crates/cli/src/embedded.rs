//! Versioned figure configurations compiled into the binary.

use crate::config::RunConfig;
use crate::error::ConfigError;
use crate::manifest::SweepManifest;

pub const FILES: [(&str, &str); 7] = [
    ("fig1.cfg", include_str!("../configs/fig1.cfg")),
    ("fig2.cfg", include_str!("../configs/fig2.cfg")),
    ("fig3.sweep", include_str!("../configs/fig3.sweep")),
    ("fig4.sweep", include_str!("../configs/fig4.sweep")),
    ("fig5.sweep", include_str!("../configs/fig5.sweep")),
    ("fig6.sweep", include_str!("../configs/fig6.sweep")),
    ("decay.cfg", include_str!("../configs/decay.cfg")),
];

pub fn text(name: &str) -> Result<&'static str, ConfigError> {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| ConfigError::field("figure", format!("no embedded file `{name}`")))
}

pub fn config(name: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::parse(text(name)?)
}

pub fn figure_config(figure: u32) -> Result<RunConfig, ConfigError> {
    config(&format!("fig{figure}.cfg"))
}

pub fn figure_manifest(figure: u32) -> Result<SweepManifest, ConfigError> {
    SweepManifest::parse(text(&format!("fig{figure}.sweep"))?, config)
}
