//! CSV output: fixed schemas, 12-significant-digit numbers, LF endings.

use crate::CliError;
use std::path::Path;

pub const SWEEP_HEADER: [&str; 11] = [
    "param",
    "value",
    "group",
    "power_w",
    "rate_bpshz",
    "outage",
    "throughput_bpshz",
    "ee_bpshz_per_w",
    "iterations",
    "converged",
    "error",
];

pub const COMPARE_HEADER: [&str; 10] = [
    "param",
    "value",
    "ee_joint",
    "ee_power_only",
    "ratio",
    "iterations_joint",
    "iterations_power_only",
    "converged_joint",
    "converged_power_only",
    "error",
];

pub const VERIFY_HEADER: [&str; 6] = [
    "check",
    "group",
    "observed",
    "reference",
    "threshold",
    "result",
];

/// 12 significant digits, scientific; enough to make golden files
/// meaningful without pinning rounding noise.
pub fn sig12(x: f64) -> String {
    format!("{:.11e}", x)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io_err)?;
    writer.write_record(header).map_err(io_err)?;
    for row in rows {
        writer.write_record(row).map_err(io_err)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_is_stable_scientific() {
        assert_eq!(sig12(0.05888436553555991), "5.88843655356e-2");
        assert_eq!(sig12(22.165885421), "2.21658854210e1");
        assert_eq!(sig12(1.0), "1.00000000000e0");
    }
}
