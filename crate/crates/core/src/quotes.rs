//! Quote data model: raw bid/ask rows, validated maturity slices, call-spread
//! digital estimation, and CSV ingestion.
//!
//! A [`MaturitySlice`] stores *undiscounted* call and digital prices with a
//! synthetic strike 0 in front (`C̃_0` = forward, `D̃_0` = 1), which is the
//! shape every solver in this crate consumes. The implicit sentinel beyond
//! the last strike (`C̃_{n+1} = D̃_{n+1} = K_{n+1}·D̃_{n+1} = 0`) is never
//! stored.

use crate::error::{Error, Result};
use std::fs;
use std::path::Path;

/// Strict inequalities are enforced with this much absolute slack to absorb
/// parse round-off.
pub const VALIDATION_SLACK: f64 = 1e-12;

/// One quoted strike: discounted bid/ask sides, each side optional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawQuote {
    /// Strike in quote currency.
    pub strike: f64,
    /// Discounted call bid.
    pub call_bid: Option<f64>,
    /// Discounted call ask.
    pub call_ask: Option<f64>,
    /// Discounted digital bid.
    pub digital_bid: Option<f64>,
    /// Discounted digital ask.
    pub digital_ask: Option<f64>,
}

impl RawQuote {
    /// Mid call price: mean of both sides, or the single available side.
    pub fn call_mid(&self) -> Option<f64> {
        mid(self.call_bid, self.call_ask)
    }

    /// Mid digital price: mean of both sides, or the single available side.
    pub fn digital_mid(&self) -> Option<f64> {
        mid(self.digital_bid, self.digital_ask)
    }
}

fn mid(bid: Option<f64>, ask: Option<f64>) -> Option<f64> {
    match (bid, ask) {
        (Some(b), Some(a)) => Some(0.5 * (b + a)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Slice metadata carried by a quote file's `#meta` line or CLI flags.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SliceMeta {
    /// Year-fraction to expiry.
    pub maturity: Option<f64>,
    /// Discount factor to expiry.
    pub discount_factor: Option<f64>,
    /// Undiscounted forward.
    pub forward: Option<f64>,
}

/// A validated market slice at one maturity, in undiscounted prices.
#[derive(Debug, Clone, PartialEq)]
pub struct MaturitySlice {
    /// Year-fraction to expiry (> 0).
    pub maturity: f64,
    /// Discount factor in (0, 1].
    pub discount_factor: f64,
    /// Strikes `K_0 = 0 < K_1 < … < K_n`.
    pub strikes: Vec<f64>,
    /// Undiscounted calls, `C̃_0` = forward.
    pub calls: Vec<f64>,
    /// Undiscounted digitals, `D̃_0` = 1.
    pub digitals: Vec<f64>,
}

impl MaturitySlice {
    /// Index of the last quoted strike.
    pub fn last(&self) -> usize {
        self.strikes.len() - 1
    }

    /// Undiscounted forward, `C̃_0`.
    pub fn forward(&self) -> f64 {
        self.calls[0]
    }

    /// Bucket mass `m_i = D̃_i − D̃_{i+1}` (sentinel 0 past the end).
    pub fn bucket_mass(&self, i: usize) -> f64 {
        if i == self.last() {
            self.digitals[i]
        } else {
            self.digitals[i] - self.digitals[i + 1]
        }
    }

    /// Bucket first moment
    /// `s_i = (C̃_i + K_i·D̃_i) − (C̃_{i+1} + K_{i+1}·D̃_{i+1})` (sentinel 0).
    pub fn bucket_moment(&self, i: usize) -> f64 {
        let lhs = self.calls[i] + self.strikes[i] * self.digitals[i];
        if i == self.last() {
            lhs
        } else {
            lhs - (self.calls[i + 1] + self.strikes[i + 1] * self.digitals[i + 1])
        }
    }

    /// Bucket mean-price ratio `K̄_i = s_i/m_i`; must lie inside
    /// `(K_i, K_{i+1})` for the slice to be arbitrage-free.
    pub fn bucket_mean(&self, i: usize) -> f64 {
        self.bucket_moment(i) / self.bucket_mass(i)
    }
}

/// Build a validated slice from raw quotes.
///
/// Mid prices are divided by `df`; a synthetic strike 0 with `C̃_0 = forward`
/// and `D̃_0 = 1` is prepended. A strike-0 quote row may supply the forward
/// instead of the `forward` argument (its undiscounted call mid is used).
///
/// Errors with [`Error::MissingForward`] when neither source is present and
/// [`Error::Validation`] when the resulting slice admits arbitrage.
pub fn build_slice(
    quotes: &[RawQuote],
    df: f64,
    maturity: f64,
    forward: Option<f64>,
) -> Result<MaturitySlice> {
    if !(df > 0.0 && df <= 1.0) {
        return Err(Error::Domain(format!("discount factor {df} not in (0, 1]")));
    }
    if maturity <= 0.0 {
        return Err(Error::Domain(format!("maturity {maturity} must be > 0")));
    }
    let mut sorted: Vec<&RawQuote> = quotes.iter().collect();
    sorted.sort_by(|a, b| a.strike.total_cmp(&b.strike));

    let mut fwd = forward;
    let mut strikes = vec![0.0];
    let mut calls = vec![f64::NAN]; // patched once the forward is known
    let mut digitals = vec![1.0];
    for q in sorted {
        let call = q
            .call_mid()
            .ok_or_else(|| Error::Parse(format!("strike {} has no call side", q.strike)))?;
        if q.strike == 0.0 {
            // A strike-0 row pins the forward and the unit digital directly.
            fwd = Some(call / df);
            continue;
        }
        strikes.push(q.strike);
        calls.push(call / df);
        digitals.push(
            q.digital_mid()
                .map(|d| d / df)
                .ok_or_else(|| Error::Parse(format!("strike {} has no digital side", q.strike)))?,
        );
    }
    calls[0] = fwd.ok_or(Error::MissingForward)?;

    let slice = MaturitySlice {
        maturity,
        discount_factor: df,
        strikes,
        calls,
        digitals,
    };
    let violations = validate_slice(&slice);
    if violations.is_empty() {
        Ok(slice)
    } else {
        Err(Error::Validation { violations })
    }
}

/// Check every slice invariant; returns one message per violated inequality
/// (empty means valid).
pub fn validate_slice(slice: &MaturitySlice) -> Vec<String> {
    let mut out = Vec::new();
    let n = slice.last();
    let k = &slice.strikes;
    let c = &slice.calls;
    let d = &slice.digitals;
    if k.is_empty() || c.len() != k.len() || d.len() != k.len() {
        return vec!["strike/call/digital lengths differ or slice is empty".into()];
    }
    if k[0] != 0.0 {
        out.push(format!("first strike is {} instead of 0", k[0]));
    }
    if (d[0] - 1.0).abs() > VALIDATION_SLACK {
        out.push(format!("digital at strike 0 is {} instead of 1", d[0]));
    }
    for i in 0..n {
        if k[i + 1] - k[i] <= VALIDATION_SLACK {
            out.push(format!("strikes not strictly increasing at index {i}"));
        }
        if d[i] - d[i + 1] <= VALIDATION_SLACK {
            out.push(format!(
                "digitals not strictly decreasing at bucket {i}: {} -> {}",
                d[i],
                d[i + 1]
            ));
        }
        if c[i] - c[i + 1] <= VALIDATION_SLACK {
            out.push(format!(
                "calls not strictly decreasing at bucket {i}: {} -> {}",
                c[i],
                c[i + 1]
            ));
        }
    }
    for i in 0..n {
        if c[i] <= 0.0 || d[i] <= 0.0 {
            out.push(format!("nonpositive price at strike index {i}"));
        }
    }
    if c[n] <= 0.0 {
        out.push("last call must be positive for an integrable tail".into());
    }
    if d[n] <= 0.0 {
        out.push("last digital must be positive for an integrable tail".into());
    }
    if out.is_empty() {
        // Bucket-level no-arbitrage: the mean-price ratio is strictly interior.
        for i in 0..n {
            let mass = slice.bucket_mass(i);
            if mass <= VALIDATION_SLACK {
                out.push(format!("bucket {i} carries no probability mass"));
                continue;
            }
            let kbar = slice.bucket_mean(i);
            if kbar <= k[i] + VALIDATION_SLACK || kbar >= k[i + 1] - VALIDATION_SLACK {
                out.push(format!(
                    "bucket {i} mean {kbar} not interior to ({}, {})",
                    k[i],
                    k[i + 1]
                ));
            }
        }
    }
    out
}

/// Symmetric call-spread digital `D̃_i = −(C̃_{i+1} − C̃_{i−1})/(K_{i+1} − K_{i−1})`
/// at every interior strike of `(strikes, calls)`; both inputs in the same
/// discounting convention.
///
/// Errors with [`Error::BoundaryStrike`] when fewer than three strikes exist.
pub fn digitals_from_call_spreads(strikes: &[f64], calls: &[f64]) -> Result<Vec<(f64, f64)>> {
    if strikes.len() != calls.len() {
        return Err(Error::Parse("strike/call lengths differ".into()));
    }
    if strikes.len() < 3 {
        let at = strikes.first().copied().unwrap_or(f64::NAN);
        return Err(Error::BoundaryStrike { strike: at });
    }
    Ok((1..strikes.len() - 1)
        .map(|i| {
            let dig = -(calls[i + 1] - calls[i - 1]) / (strikes[i + 1] - strikes[i - 1]);
            (strikes[i], dig)
        })
        .collect())
}

/// Parsed content of a quote CSV: raw rows plus any `#meta` metadata.
#[derive(Debug, Clone, Default)]
pub struct QuoteFile {
    /// Quote rows in file order.
    pub quotes: Vec<RawQuote>,
    /// Metadata from the `#meta` line, if present.
    pub meta: SliceMeta,
}

/// Read a quote CSV.
///
/// Expected shape: optional comment lines starting with `#`, where a line
/// `#meta,T=<years>,DF=<factor>,F=<forward>` (any subset of keys) supplies
/// slice metadata, then a header `strike,call_bid,call_ask,digital_bid,digital_ask`
/// and one row per strike with empty cells for missing sides.
pub fn read_quote_file(path: &Path) -> Result<QuoteFile> {
    let text = fs::read_to_string(path)?;
    parse_quote_csv(&text)
}

/// Parse quote CSV text; see [`read_quote_file`].
pub fn parse_quote_csv(text: &str) -> Result<QuoteFile> {
    let mut out = QuoteFile::default();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.trim().strip_prefix('#') {
            if let Some(kvs) = rest.strip_prefix("meta,") {
                out.meta = parse_meta(kvs)?;
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let expected = ["strike", "call_bid", "call_ask", "digital_bid", "digital_ask"];
    if headers.iter().ne(expected) {
        return Err(Error::Parse(format!(
            "header must be `{}`, got `{}`",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let cell = |i: usize| -> Result<Option<f64>> {
            match record.get(i).unwrap_or("") {
                "" => Ok(None),
                s => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Parse(format!("bad number `{s}`"))),
            }
        };
        let strike = cell(0)?.ok_or_else(|| Error::Parse("row without strike".into()))?;
        let quote = RawQuote {
            strike,
            call_bid: cell(1)?,
            call_ask: cell(2)?,
            digital_bid: cell(3)?,
            digital_ask: cell(4)?,
        };
        if let (Some(b), Some(a)) = (quote.call_bid, quote.call_ask) {
            if b > a {
                return Err(Error::Parse(format!("call bid {b} above ask {a} at {strike}")));
            }
        }
        if let (Some(b), Some(a)) = (quote.digital_bid, quote.digital_ask) {
            if b > a {
                return Err(Error::Parse(format!(
                    "digital bid {b} above ask {a} at {strike}"
                )));
            }
        }
        if quote.call_mid().is_none() {
            return Err(Error::Parse(format!("strike {strike} has no call side")));
        }
        out.quotes.push(quote);
    }
    Ok(out)
}

fn parse_meta(kvs: &str) -> Result<SliceMeta> {
    let mut meta = SliceMeta::default();
    for kv in kvs.split(',') {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("meta entry `{kv}` is not key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad meta number `{value}`")))?;
        match key.trim() {
            "T" => meta.maturity = Some(value),
            "DF" => meta.discount_factor = Some(value),
            "F" => meta.forward = Some(value),
            other => return Err(Error::Parse(format!("unknown meta key `{other}`"))),
        }
    }
    Ok(meta)
}
