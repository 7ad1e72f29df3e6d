//! Cryptographic parameter profiles. The standard profile uses
//! deployment-grade sizes; the test profile shrinks every primitive so
//! property suites and exhaustive checks stay fast.

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SecurityProfile {
    /// 2048-bit commitment group with 256-bit order, 1024-bit Paillier
    /// modulus, 2048-bit key-agreement group.
    #[default]
    Standard,
    /// Small parameters for fast property tests.
    Test,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unsupported security profile {0:?} (expected \"standard\" or \"test\")")]
pub struct UnsupportedProfile(pub String);

impl FromStr for SecurityProfile {
    type Err = UnsupportedProfile;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(SecurityProfile::Standard),
            "test" => Ok(SecurityProfile::Test),
            other => Err(UnsupportedProfile(other.to_string())),
        }
    }
}

impl fmt::Display for SecurityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SecurityProfile::Standard => write!(f, "standard"),
            SecurityProfile::Test => write!(f, "test"),
        }
    }
}
