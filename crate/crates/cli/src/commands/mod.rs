pub mod basis;
pub mod equiv;
pub mod selftest;
pub mod sweep;
pub mod warp;

use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Parse a comma-separated list such as `96,192,384`.
pub fn parse_list<T: FromStr>(name: &str, value: &str) -> CliResult<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| CliError::usage(format!("--{name}: cannot parse `{s}`"))))
        .collect()
}

/// A real number written either as a decimal or as a fraction like `1/1.2`.
pub fn parse_ratio(name: &str, s: &str) -> CliResult<f64> {
    let bad = || CliError::usage(format!("--{name}: cannot parse `{s}`"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}
