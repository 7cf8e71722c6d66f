//! Paired price series: CSV ingestion, sign extraction and the trend /
//! co-movement report.
//!
//! Prices enter only through the signs of their per-interval changes; a flat
//! interval counts as a down move, matching [`Sign::of_diff`]. Real data has
//! ties, so that convention is load-bearing: document it to consumers.

use crate::decompose::{decompose, Decomposition};
use crate::path::JointPath;
use crate::sign::{Sign, SignPair};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("csv parse failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("column {name:?} not found; available: {available:?}")]
    MissingColumn {
        name: String,
        available: Vec<String>,
    },
    #[error("need at least two usable rows, got {rows}")]
    TooShort { rows: usize },
    #[error("timestamps must be strictly increasing; row {row} ({value}) breaks the order")]
    NonMonotoneTimestamps { row: u64, value: String },
    #[error("row {row}: cannot parse price {value:?}")]
    BadPrice { row: u64, value: String },
    #[error("row {row}: price {value} is not positive")]
    NonPositivePrice { row: u64, value: f64 },
    #[error("row {row}: timestamp kind differs from earlier rows (mixing numbers and text)")]
    MixedTimestampKinds { row: u64 },
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("the two inputs share no timestamps")]
    NoOverlap,
}

/// A point on the sampling grid: either numeric (epoch seconds, day counts)
/// or text in a lexicographically ordered format such as ISO-8601 dates.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub enum Timestamp {
    Number(f64),
    Text(String),
}

impl Timestamp {
    fn parse(raw: &str) -> Timestamp {
        match raw.trim().parse::<f64>() {
            Ok(v) => Timestamp::Number(v),
            Err(_) => Timestamp::Text(raw.trim().to_string()),
        }
    }

    fn same_kind(&self, other: &Timestamp) -> bool {
        matches!(
            (self, other),
            (Timestamp::Number(_), Timestamp::Number(_)) | (Timestamp::Text(_), Timestamp::Text(_))
        )
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestamp::Number(v) => write!(f, "{v}"),
            Timestamp::Text(s) => write!(f, "{s}"),
        }
    }
}

/// One sampled price path on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceSeries {
    pub timestamps: Vec<Timestamp>,
    pub prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(timestamps: Vec<Timestamp>, prices: Vec<f64>) -> Result<PriceSeries, IngestError> {
        if timestamps.len() != prices.len() {
            return Err(IngestError::LengthMismatch {
                left: timestamps.len(),
                right: prices.len(),
            });
        }
        if timestamps.len() < 2 {
            return Err(IngestError::TooShort {
                rows: timestamps.len(),
            });
        }
        Ok(PriceSeries { timestamps, prices })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Column selection for CSV ingestion. `None` falls back to positional
/// defaults: the first column is the timestamp, the following columns carry
/// the prices.
#[derive(Clone, Debug, Default)]
pub struct CsvConfig {
    pub time_column: Option<String>,
    pub price_columns: Option<(String, String)>,
}

fn find_column(headers: &[String], name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| IngestError::MissingColumn {
            name: name.to_string(),
            available: headers.to_vec(),
        })
}

struct RawTable {
    headers: Vec<String>,
    /// (1-based file line, fields)
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(bytes: &[u8]) -> Result<RawTable, IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, record.iter().map(|f| f.to_string()).collect()));
    }
    Ok(RawTable { headers, rows })
}

fn column_pair(table: &RawTable, config: &CsvConfig) -> Result<(usize, usize, usize), IngestError> {
    let time_idx = match &config.time_column {
        Some(name) => find_column(&table.headers, name)?,
        None => 0,
    };
    let (a_idx, b_idx) = match &config.price_columns {
        Some((a, b)) => (
            find_column(&table.headers, a)?,
            find_column(&table.headers, b)?,
        ),
        None => {
            let mut free = (0..table.headers.len()).filter(|&i| i != time_idx);
            match (free.next(), free.next()) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(IngestError::MissingColumn {
                        name: "two price columns".to_string(),
                        available: table.headers.clone(),
                    })
                }
            }
        }
    };
    Ok((time_idx, a_idx, b_idx))
}

fn parse_price(raw: &str, row: u64) -> Result<Option<f64>, IngestError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let value: f64 = raw.parse().map_err(|_| IngestError::BadPrice {
        row,
        value: raw.to_string(),
    })?;
    if !(value.is_finite() && value > 0.0) {
        return Err(IngestError::NonPositivePrice { row, value });
    }
    Ok(Some(value))
}

fn check_monotone(timestamps: &[Timestamp], rows: &[u64]) -> Result<(), IngestError> {
    for i in 1..timestamps.len() {
        if !timestamps[i].same_kind(&timestamps[i - 1]) {
            return Err(IngestError::MixedTimestampKinds { row: rows[i] });
        }
        if timestamps[i] <= timestamps[i - 1] {
            return Err(IngestError::NonMonotoneTimestamps {
                row: rows[i],
                value: timestamps[i].to_string(),
            });
        }
    }
    Ok(())
}

/// Parses one CSV holding a timestamp column and two price columns into two
/// aligned series. Rows with a missing value in either price column are
/// dropped from both series; unparseable prices and out-of-order timestamps
/// are errors naming the offending row.
pub fn parse_csv(
    bytes: &[u8],
    config: &CsvConfig,
) -> Result<(PriceSeries, PriceSeries), IngestError> {
    let table = read_table(bytes)?;
    let (time_idx, a_idx, b_idx) = column_pair(&table, config)?;
    let mut timestamps = Vec::new();
    let mut rows = Vec::new();
    let (mut a_prices, mut b_prices) = (Vec::new(), Vec::new());
    for (line, fields) in &table.rows {
        let get = |idx: usize| fields.get(idx).map(String::as_str).unwrap_or("");
        let (a, b) = (
            parse_price(get(a_idx), *line)?,
            parse_price(get(b_idx), *line)?,
        );
        let (Some(a), Some(b)) = (a, b) else {
            continue; // dropped pairwise
        };
        timestamps.push(Timestamp::parse(get(time_idx)));
        rows.push(*line);
        a_prices.push(a);
        b_prices.push(b);
    }
    check_monotone(&timestamps, &rows)?;
    Ok((
        PriceSeries::new(timestamps.clone(), a_prices)?,
        PriceSeries::new(timestamps, b_prices)?,
    ))
}

/// Parses one CSV holding a timestamp column and a single price column.
pub fn parse_csv_single(
    bytes: &[u8],
    time_column: Option<&str>,
    price_column: Option<&str>,
) -> Result<PriceSeries, IngestError> {
    let table = read_table(bytes)?;
    let time_idx = match time_column {
        Some(name) => find_column(&table.headers, name)?,
        None => 0,
    };
    let price_idx = match price_column {
        Some(name) => find_column(&table.headers, name)?,
        None => (0..table.headers.len())
            .find(|&i| i != time_idx)
            .ok_or_else(|| IngestError::MissingColumn {
                name: "a price column".to_string(),
                available: table.headers.clone(),
            })?,
    };
    let mut timestamps = Vec::new();
    let mut rows = Vec::new();
    let mut prices = Vec::new();
    for (line, fields) in &table.rows {
        let get = |idx: usize| fields.get(idx).map(String::as_str).unwrap_or("");
        let Some(price) = parse_price(get(price_idx), *line)? else {
            continue;
        };
        timestamps.push(Timestamp::parse(get(time_idx)));
        rows.push(*line);
        prices.push(price);
    }
    check_monotone(&timestamps, &rows)?;
    PriceSeries::new(timestamps, prices)
}

/// Inner join of two series on equal timestamps, for inputs sampled on
/// different grids. Both inputs must already be strictly increasing.
pub fn align(a: &PriceSeries, b: &PriceSeries) -> Result<(PriceSeries, PriceSeries), IngestError> {
    let mut ts = Vec::new();
    let (mut pa, mut pb) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        let (ta, tb) = (&a.timestamps[i], &b.timestamps[j]);
        if !ta.same_kind(tb) {
            return Err(IngestError::MixedTimestampKinds { row: 0 });
        }
        if ta == tb {
            ts.push(ta.clone());
            pa.push(a.prices[i]);
            pb.push(b.prices[j]);
            i += 1;
            j += 1;
        } else if ta < tb {
            i += 1;
        } else {
            j += 1;
        }
    }
    if ts.len() < 2 {
        return Err(IngestError::NoOverlap);
    }
    Ok((PriceSeries::new(ts.clone(), pa)?, PriceSeries::new(ts, pb)?))
}

/// Per-interval movement signs: `+1` for a strict increase, `-1` otherwise
/// (ties are down moves). Only the order of prices matters, so any strictly
/// increasing transform of the series yields the same signs.
pub fn to_signs(series: &PriceSeries) -> Vec<Sign> {
    series
        .prices
        .windows(2)
        .map(|w| Sign::of_diff(w[1] - w[0]))
        .collect()
}

/// Direction of co-movement over a step range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// More common than counter movements; the pair trends together.
    CommonDominant,
    /// More counter than common movements; the pair diverges.
    CounterDominant,
    Balanced,
}

/// Decomposition summary over one step range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowStats {
    /// 1-based inclusive step range the stats cover.
    pub start_step: usize,
    pub end_step: usize,
    /// Net common-move walk displacement over the range.
    pub x_change: i64,
    /// Net counter-move walk displacement over the range.
    pub y_change: i64,
    /// Common and counter movement counts in the range; they sum to its
    /// length.
    pub common_moves: usize,
    pub counter_moves: usize,
    /// `common_moves / range length`, in `[0, 1]`.
    pub comovement_ratio: f64,
    /// Sign of `x_change`: the shared trend direction.
    pub market_trend: i8,
    /// Sign of `y_change`: which series outpaced the other.
    pub relative_strength: i8,
    pub regime: Regime,
}

/// Full analysis artifact for a pair of series.
#[derive(Clone, Debug, Serialize)]
pub struct TrendReport {
    /// Number of sign steps (one less than the row count).
    pub steps: usize,
    pub full: WindowStats,
    /// Trailing window, equal to `full` when the window covers everything.
    pub window: WindowStats,
    /// Per-step series for plotting: the two walks, the clock and the
    /// composed component values.
    pub series: TrendSeries,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendSeries {
    pub b: Vec<i64>,
    pub w: Vec<i64>,
    pub t: Vec<usize>,
    pub s: Vec<usize>,
    /// `X[T_n]` per step: the common component's current value.
    pub x_at_t: Vec<i64>,
    /// `Y[S_n]` per step.
    pub y_at_s: Vec<i64>,
}

fn window_stats(d: &Decomposition, start_step: usize, end_step: usize) -> WindowStats {
    let value = |series: &[i64], count: usize| if count == 0 { 0 } else { series[count - 1] };
    let (t_start, s_start) = if start_step == 1 {
        (0, 0)
    } else {
        (d.counters.t[start_step - 2], d.counters.s[start_step - 2])
    };
    let (t_end, s_end) = (d.counters.t[end_step - 1], d.counters.s[end_step - 1]);
    let x_change = value(&d.x, t_end) - value(&d.x, t_start);
    let y_change = value(&d.y, s_end) - value(&d.y, s_start);
    let common_moves = t_end - t_start;
    let counter_moves = s_end - s_start;
    let span = end_step - start_step + 1;
    debug_assert_eq!(common_moves + counter_moves, span);
    WindowStats {
        start_step,
        end_step,
        x_change,
        y_change,
        common_moves,
        counter_moves,
        comovement_ratio: common_moves as f64 / span as f64,
        market_trend: x_change.signum() as i8,
        relative_strength: y_change.signum() as i8,
        regime: match common_moves.cmp(&counter_moves) {
            std::cmp::Ordering::Greater => Regime::CommonDominant,
            std::cmp::Ordering::Less => Regime::CounterDominant,
            std::cmp::Ordering::Equal => Regime::Balanced,
        },
    }
}

/// Decomposes the co-movement of two equal-length series and reports trend
/// statistics over the whole range and a trailing window of `window` steps.
pub fn analyze(
    s1: &PriceSeries,
    s2: &PriceSeries,
    window: usize,
) -> Result<TrendReport, IngestError> {
    if s1.len() != s2.len() {
        return Err(IngestError::LengthMismatch {
            left: s1.len(),
            right: s2.len(),
        });
    }
    let signs1 = to_signs(s1);
    let signs2 = to_signs(s2);
    let pairs: Vec<SignPair> = signs1
        .into_iter()
        .zip(signs2)
        .map(|(xi, eta)| SignPair::new(xi, eta))
        .collect();
    let steps = pairs.len();
    let path = JointPath::from_pairs(pairs).expect("len >= 2 checked by PriceSeries");
    let d = decompose(&path);
    let full = window_stats(&d, 1, steps);
    let window_len = window.clamp(1, steps);
    let window = window_stats(&d, steps - window_len + 1, steps);
    let series = TrendSeries {
        b: path.b_values(),
        w: path.w_values(),
        t: d.counters.t.clone(),
        s: d.counters.s.clone(),
        x_at_t: d
            .counters
            .t
            .iter()
            .map(|&tn| if tn == 0 { 0 } else { d.x[tn - 1] })
            .collect(),
        y_at_s: d
            .counters
            .s
            .iter()
            .map(|&sn| if sn == 0 { 0 } else { d.y[sn - 1] })
            .collect(),
    };
    Ok(TrendReport {
        steps,
        full,
        window,
        series,
    })
}
