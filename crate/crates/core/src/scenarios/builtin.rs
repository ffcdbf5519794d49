use super::{parse_scenario_str, Scenario};
use std::fmt;
use std::str::FromStr;

/// The six bundled workcells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::S1,
        Builtin::S2,
        Builtin::S3,
        Builtin::S4,
        Builtin::S5,
        Builtin::S6,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Builtin::S1 => "s1",
            Builtin::S2 => "s2",
            Builtin::S3 => "s3",
            Builtin::S4 => "s4",
            Builtin::S5 => "s5",
            Builtin::S6 => "s6",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Builtin::S1 => include_str!("../../scenarios/s1.toml"),
            Builtin::S2 => include_str!("../../scenarios/s2.toml"),
            Builtin::S3 => include_str!("../../scenarios/s3.toml"),
            Builtin::S4 => include_str!("../../scenarios/s4.toml"),
            Builtin::S5 => include_str!("../../scenarios/s5.toml"),
            Builtin::S6 => include_str!("../../scenarios/s6.toml"),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Builtin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.key() == s)
            .ok_or_else(|| format!("unknown builtin scenario `{s}`"))
    }
}

/// Parsed builtin scenario. The bundled files are validated by the test
/// suite, so parsing cannot fail.
pub fn builtin(b: Builtin) -> Scenario {
    parse_scenario_str(b.source(), None).unwrap_or_else(|e| panic!("builtin scenario {b} is invalid: {e}"))
}
