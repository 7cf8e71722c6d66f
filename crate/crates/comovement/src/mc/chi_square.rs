//! Pearson chi-square and G tests with chi-square tail p-values.

use super::{BlockCounts, McError, TestReport};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Minimum expected count per cell before the chi-square approximation is
/// trusted; below this the harness refuses instead of approximating.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

pub(crate) fn chi_square_sf(statistic: f64, df: u64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive df")
        .sf(statistic)
}

/// Pearson goodness-of-fit test of the block counts against the uniform
/// distribution over the cells. Verdict: `p_value > significance`.
pub fn chi_square_uniform(counts: &BlockCounts, significance: f64) -> Result<TestReport, McError> {
    let cells = counts.cells() as f64;
    let total: u64 = counts.counts.iter().sum();
    let expected = total as f64 / cells;
    if expected < MIN_EXPECTED_COUNT {
        return Err(McError::Undersampled {
            required_reps: (MIN_EXPECTED_COUNT * cells).ceil() as u64,
            detail: format!(
                "{total} replications over {cells} cells leave {expected:.2} expected per cell"
            ),
        });
    }
    let statistic: f64 = counts
        .counts
        .iter()
        .map(|&obs| {
            let diff = obs as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let df = counts.cells() as u64 - 1;
    let p_value = chi_square_sf(statistic, df);
    Ok(TestReport {
        test_name: format!("chi-square-uniform[k={} l={}]", counts.k, counts.l),
        sample_size: total,
        statistic: Some(statistic),
        df: Some(df),
        p_value: Some(p_value),
        estimate: None,
        std_error: None,
        target: Some(1.0 / cells),
        significance,
        pass: p_value > significance,
    })
}

/// G test of independence on a rows-by-columns contingency table.
/// Refuses tables with empty margins or undersampled expected cells.
pub fn g_test_independence(
    table: &[Vec<u64>],
    test_name: String,
    significance: f64,
) -> Result<TestReport, McError> {
    let rows = table.len();
    let cols = table.first().map(|r| r.len()).unwrap_or(0);
    if rows < 2 || cols < 2 {
        return Err(McError::DegenerateTable {
            detail: format!("{rows}x{cols} table has nothing to test"),
        });
    }
    let row_totals: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_totals: Vec<u64> = (0..cols)
        .map(|c| table.iter().map(|r| r[c]).sum())
        .collect();
    let total: u64 = row_totals.iter().sum();
    if let Some(c) = col_totals.iter().position(|&t| t == 0) {
        return Err(McError::DegenerateTable {
            detail: format!("column {c} is empty (that pattern never occurs under this model)"),
        });
    }
    if let Some(r) = row_totals.iter().position(|&t| t == 0) {
        return Err(McError::DegenerateTable {
            detail: format!("row {r} is empty (that sign vector never occurs)"),
        });
    }
    let mut statistic = 0.0;
    let mut min_expected = f64::INFINITY;
    for (r, row) in table.iter().enumerate() {
        for (c, &obs) in row.iter().enumerate() {
            let expected = row_totals[r] as f64 * col_totals[c] as f64 / total as f64;
            min_expected = min_expected.min(expected);
            if obs > 0 {
                statistic += 2.0 * obs as f64 * (obs as f64 / expected).ln();
            }
        }
    }
    if min_expected < MIN_EXPECTED_COUNT {
        let scale = MIN_EXPECTED_COUNT / min_expected;
        return Err(McError::Undersampled {
            required_reps: (total as f64 * scale).ceil() as u64,
            detail: format!("smallest expected cell is {min_expected:.2}"),
        });
    }
    let df = ((rows - 1) * (cols - 1)) as u64;
    let p_value = chi_square_sf(statistic, df);
    Ok(TestReport {
        test_name,
        sample_size: total,
        statistic: Some(statistic),
        df: Some(df),
        p_value: Some(p_value),
        estimate: None,
        std_error: None,
        target: None,
        significance,
        pass: p_value > significance,
    })
}
