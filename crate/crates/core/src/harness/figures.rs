//! Bundled sweep configs for the standard figures.

use super::ExperimentConfig;
use crate::error::{Error, Result};

pub const FIGURES: [(&str, &str); 4] = [
    ("simplebbp", include_str!("../../figures/simplebbp.json")),
    ("bbp", include_str!("../../figures/bbp.json")),
    ("scov1", include_str!("../../figures/scov1.json")),
    ("scov2", include_str!("../../figures/scov2.json")),
];

pub fn figure_config(name: &str) -> Result<ExperimentConfig> {
    let (_, src) = FIGURES.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = FIGURES.iter().map(|(n, _)| *n).collect();
        Error::Invalid(format!("unknown figure {name:?}; available: {}", names.join(", ")))
    })?;
    ExperimentConfig::from_json(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        for (name, _) in FIGURES {
            figure_config(name).unwrap();
        }
        assert!(figure_config("nope").is_err());
    }
}
