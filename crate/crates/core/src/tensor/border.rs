use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How reads outside the source domain are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BorderPolicy {
    ZeroFill,
    Clamp,
    Circular,
}

impl BorderPolicy {
    /// Default for convolutions (matches standard CNN padding).
    pub const CONV_DEFAULT: BorderPolicy = BorderPolicy::ZeroFill;
    /// Default for warps and resampling.
    pub const WARP_DEFAULT: BorderPolicy = BorderPolicy::Clamp;

    /// Map a possibly out-of-range index onto `0..len`, or `None` for zero fill.
    #[inline]
    pub fn resolve(self, i: isize, len: usize) -> Option<usize> {
        let n = len as isize;
        if (0..n).contains(&i) {
            return Some(i as usize);
        }
        match self {
            BorderPolicy::ZeroFill => None,
            BorderPolicy::Clamp => Some(i.clamp(0, n - 1) as usize),
            BorderPolicy::Circular => Some(i.rem_euclid(n) as usize),
        }
    }
}

impl fmt::Display for BorderPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BorderPolicy::ZeroFill => "zero-fill",
            BorderPolicy::Clamp => "clamp",
            BorderPolicy::Circular => "circular",
        })
    }
}

impl FromStr for BorderPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero-fill" | "zero" => Ok(BorderPolicy::ZeroFill),
            "clamp" => Ok(BorderPolicy::Clamp),
            "circular" => Ok(BorderPolicy::Circular),
            other => Err(Error::invalid("border", format!("unknown border policy `{other}`"))),
        }
    }
}
