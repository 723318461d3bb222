//! The six benchmark configurations: which connector, which committer.

use std::fmt;

use ocbench_core::connector::legacy::LegacyProfile;
use ocbench_core::connector::stocator::{ReadOption, StocatorConfig};
use ocbench_core::connector::ConnectorSpec;
use ocbench_core::engine::CommitterKind;

/// A named pairing of connector profile and commit protocol.
///
/// The `HS` scenarios run the swift-style connector, the `S3a` scenarios the
/// s3a-style one; `Cv2` marks the single-rename committer and `FU` the
/// part-buffered fast upload. `Stocator` runs the rename-free connector with
/// the passthrough committer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    HsBase,
    S3aBase,
    Stocator,
    HsCv2,
    S3aCv2,
    S3aCv2Fu,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::HsBase,
        Scenario::S3aBase,
        Scenario::Stocator,
        Scenario::HsCv2,
        Scenario::S3aCv2,
        Scenario::S3aCv2Fu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::HsBase => "HS-Base",
            Scenario::S3aBase => "S3a-Base",
            Scenario::Stocator => "Stocator",
            Scenario::HsCv2 => "HS-Cv2",
            Scenario::S3aCv2 => "S3a-Cv2",
            Scenario::S3aCv2Fu => "S3a-Cv2-FU",
        }
    }

    pub fn parse(input: &str) -> Result<Self, String> {
        let wanted = input.trim();
        Scenario::ALL
            .into_iter()
            .find(|s| s.name().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| {
                let known: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!("unknown scenario {wanted:?}, expected one of {known:?}")
            })
    }

    /// Connector recipe. `stocator_read` only affects the Stocator scenario.
    pub fn connector(self, stocator_read: ReadOption) -> ConnectorSpec {
        match self {
            Scenario::Stocator => {
                ConnectorSpec::Stocator(StocatorConfig::with_read_option(stocator_read))
            }
            Scenario::HsBase | Scenario::HsCv2 => {
                ConnectorSpec::Legacy(LegacyProfile::swift_like())
            }
            Scenario::S3aBase | Scenario::S3aCv2 => {
                ConnectorSpec::Legacy(LegacyProfile::s3a_like())
            }
            Scenario::S3aCv2Fu => ConnectorSpec::Legacy(LegacyProfile::s3a_fast_upload()),
        }
    }

    pub fn committer(self) -> CommitterKind {
        match self {
            Scenario::HsBase | Scenario::S3aBase => CommitterKind::V1,
            Scenario::Stocator => CommitterKind::Passthrough,
            Scenario::HsCv2 | Scenario::S3aCv2 | Scenario::S3aCv2Fu => CommitterKind::V2,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
