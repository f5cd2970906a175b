//! Run manifests: everything that determines a subcommand's output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use arrival_core::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub scenario: Option<Scenario>,
    pub controls: BTreeMap<String, String>,
    pub output: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, scenario: Option<Scenario>, output: Option<&Path>) -> Self {
        RunManifest {
            subcommand: subcommand.into(),
            scenario,
            controls: BTreeMap::new(),
            output: output.map(|p| p.display().to_string()),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.controls.insert(key.into(), value.to_string());
        self
    }

    /// `key = value` lines; the scenario block is itself a valid config file.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# subcommand = {}", self.subcommand);
        let _ = writeln!(s, "# version = {}", env!("CARGO_PKG_VERSION"));
        if let Some(out) = &self.output {
            let _ = writeln!(s, "# output = {out}");
        }
        for (k, v) in &self.controls {
            let _ = writeln!(s, "# {k} = {v}");
        }
        if let Some(scn) = &self.scenario {
            let _ = writeln!(s, "# fingerprint = {:016x}", scn.fingerprint());
            s.push_str(&scn.to_config_string());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_block_parses_back() {
        let scn = Scenario::beam(1.0, 0.1, 1.0, 56.42).unwrap();
        let mut m = RunManifest::new("fisher", Some(scn), None);
        m.set("n", "1,2");
        let text = m.render();
        assert_eq!(Scenario::from_config_str(&text).unwrap(), scn);
        assert!(text.contains("# n = 1,2"));
    }
}
