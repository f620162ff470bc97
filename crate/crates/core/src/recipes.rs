//! Figure-replication recipes, embedded from `recipes/*.toml`.

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const RECIPES: &[(&str, &str)] = &[
    ("cm1a", include_str!("../recipes/cm1a.toml")),
    ("cm1b", include_str!("../recipes/cm1b.toml")),
    ("ei-a", include_str!("../recipes/ei-a.toml")),
    ("ei-b", include_str!("../recipes/ei-b.toml")),
    ("bs2-a", include_str!("../recipes/bs2-a.toml")),
    ("bs2-b", include_str!("../recipes/bs2-b.toml")),
    ("bs-a", include_str!("../recipes/bs-a.toml")),
    ("bs-b", include_str!("../recipes/bs-b.toml")),
    ("billiard", include_str!("../recipes/billiard.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    RECIPES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Result<&'static str> {
    RECIPES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown figure id {name:?}, expected one of {}",
                names().collect::<Vec<_>>().join(", ")
            ))
        })
}

pub fn recipe(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_recipe_parses_under_its_name() {
        for name in names() {
            let c = recipe(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.name.as_deref(), Some(name));
        }
        assert_eq!(recipe("fig9").unwrap_err().exit_code(), 2);
    }
}
