//! Two-line element set parsing, serialization and retrieval.
//!
//! Only the classic fixed-column text format is supported. Every accepted
//! record has passed the modulo-10 line checksum (unless parsing was asked to
//! be permissive) and satisfies the range checks on its mean elements.

use std::fmt::Write as _;
use std::time::Duration;

use chrono::{DateTime, Datelike, Duration as ChronoDuration, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Length of a TLE element line including the trailing checksum digit.
pub const LINE_LEN: usize = 69;

#[derive(Debug, Error, PartialEq)]
pub enum TleError {
    #[error("line {line}: expected {LINE_LEN} characters, found {found}")]
    LineLength { line: usize, found: usize },
    #[error("line {line}: checksum mismatch (line says {found}, computed {expected})")]
    Checksum { line: usize, expected: u8, found: char },
    #[error("line {line}: cannot parse {field} from {value:?}")]
    Field { line: usize, field: &'static str, value: String },
    #[error("line {line}: expected line-number marker '{expected}', found {found:?}")]
    LineMarker { line: usize, expected: char, found: char },
    #[error("line {line}: element set is truncated")]
    Truncated { line: usize },
    #[error("line {line}: catalog number differs between line 1 and line 2")]
    CatalogMismatch { line: usize },
    #[error("line {line}: {field} = {value} is out of range")]
    OutOfRange { line: usize, field: &'static str, value: f64 },
}

/// One satellite's mean orbital elements at a reference epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TleRecord {
    pub name: String,
    pub catalog_id: u32,
    pub epoch: DateTime<Utc>,
    /// Degrees, `[0, 180]`.
    pub inclination: f64,
    /// Right ascension of the ascending node, degrees, `[0, 360)`.
    pub raan: f64,
    pub eccentricity: f64,
    /// Argument of perigee, degrees, `[0, 360)`.
    pub arg_perigee: f64,
    /// Degrees, `[0, 360)`.
    pub mean_anomaly: f64,
    /// Revolutions per day.
    pub mean_motion: f64,
    pub revolution_number: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Report checksum failures as warnings instead of errors.
    pub permissive_checksum: bool,
}

/// A checksum problem that was tolerated under [`ParseOptions::permissive_checksum`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChecksumWarning {
    pub line: usize,
    pub expected: u8,
    pub found: char,
}

impl std::fmt::Display for ChecksumWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: checksum digit {:?}, computed {}", self.line, self.found, self.expected)
    }
}

/// Modulo-10 TLE checksum: digits count at face value, `-` counts as one,
/// everything else is ignored. `body` must not include the checksum character.
pub fn checksum(body: &str) -> u8 {
    let sum: u32 = body
        .chars()
        .map(|c| match c {
            '0'..='9' => c as u32 - '0' as u32,
            '-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

/// Parses a TLE document with strict checksum handling.
pub fn parse_tle(text: &str) -> Result<Vec<TleRecord>, TleError> {
    parse_tle_with(text, ParseOptions::default()).map(|(records, _)| records)
}

/// Parses a TLE document. Groups are `(name?, line 1, line 2)`; blank lines
/// are skipped. Records come back in document order.
pub fn parse_tle_with(
    text: &str,
    options: ParseOptions,
) -> Result<(Vec<TleRecord>, Vec<ChecksumWarning>), TleError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut idx = 0;
    while idx < lines.len() {
        let (first_no, first) = lines[idx];
        let starts_pair = first.starts_with('1')
            && lines.get(idx + 1).is_some_and(|(_, next)| next.starts_with('2'));
        let name = if starts_pair {
            None
        } else {
            idx += 1;
            let name = first.strip_prefix("0 ").unwrap_or(first).trim();
            Some(name.to_string())
        };
        let (Some(&(no1, l1)), Some(&(no2, l2))) = (lines.get(idx), lines.get(idx + 1)) else {
            return Err(TleError::Truncated { line: first_no });
        };
        idx += 2;
        let record = parse_pair(name, (no1, l1), (no2, l2), options, &mut warnings)?;
        records.push(record);
    }
    Ok((records, warnings))
}

fn check_line(
    number: usize,
    line: &str,
    marker: char,
    options: ParseOptions,
    warnings: &mut Vec<ChecksumWarning>,
) -> Result<(), TleError> {
    let found_marker = line.chars().next().unwrap_or(' ');
    if found_marker != marker {
        return Err(TleError::LineMarker { line: number, expected: marker, found: found_marker });
    }
    if !line.is_ascii() || line.len() != LINE_LEN {
        return Err(TleError::LineLength { line: number, found: line.chars().count() });
    }
    let expected = checksum(&line[..LINE_LEN - 1]);
    let found = line.as_bytes()[LINE_LEN - 1] as char;
    if found.to_digit(10) != Some(expected as u32) {
        if options.permissive_checksum {
            log::warn!("line {number}: checksum mismatch (found {found}, computed {expected})");
            warnings.push(ChecksumWarning { line: number, expected, found });
        } else {
            return Err(TleError::Checksum { line: number, expected, found });
        }
    }
    Ok(())
}

/// Extracts 1-based inclusive columns `[from, to]`.
fn columns(line: &str, from: usize, to: usize) -> &str {
    &line[from - 1..to]
}

fn field<T: std::str::FromStr>(
    line_no: usize,
    line: &str,
    from: usize,
    to: usize,
    name: &'static str,
) -> Result<T, TleError> {
    let raw = columns(line, from, to);
    raw.trim().parse().map_err(|_| TleError::Field {
        line: line_no,
        field: name,
        value: raw.to_string(),
    })
}

fn parse_epoch(line_no: usize, line: &str) -> Result<DateTime<Utc>, TleError> {
    let bad = || TleError::Field {
        line: line_no,
        field: "epoch",
        value: columns(line, 19, 32).to_string(),
    };
    let yy: i32 = field(line_no, line, 19, 20, "epoch year")?;
    let day: f64 = field(line_no, line, 21, 32, "epoch day")?;
    let year = if yy >= 57 { 1900 + yy } else { 2000 + yy };
    let days_in_year = if NaiveDate::from_ymd_opt(year, 12, 31).map(|d| d.ordinal()) == Some(366) {
        366.0
    } else {
        365.0
    };
    if !(1.0..days_in_year + 1.0).contains(&day) {
        return Err(bad());
    }
    let start = Utc.with_ymd_and_hms(year, 1, 1, 0, 0, 0).single().ok_or_else(bad)?;
    let micros = ((day - 1.0) * 86_400e6).round() as i64;
    Ok(start + ChronoDuration::microseconds(micros))
}

fn parse_pair(
    name: Option<String>,
    (no1, l1): (usize, &str),
    (no2, l2): (usize, &str),
    options: ParseOptions,
    warnings: &mut Vec<ChecksumWarning>,
) -> Result<TleRecord, TleError> {
    check_line(no1, l1, '1', options, warnings)?;
    check_line(no2, l2, '2', options, warnings)?;

    let catalog_id: u32 = field(no1, l1, 3, 7, "catalog number")?;
    let catalog_2: u32 = field(no2, l2, 3, 7, "catalog number")?;
    if catalog_id != catalog_2 {
        return Err(TleError::CatalogMismatch { line: no2 });
    }
    let epoch = parse_epoch(no1, l1)?;

    let inclination: f64 = field(no2, l2, 9, 16, "inclination")?;
    let raan: f64 = field(no2, l2, 18, 25, "raan")?;
    let ecc_digits = columns(l2, 27, 33);
    if !ecc_digits.bytes().all(|b| b.is_ascii_digit() || b == b' ') {
        return Err(TleError::Field { line: no2, field: "eccentricity", value: ecc_digits.into() });
    }
    // Implied leading decimal point.
    let eccentricity: f64 = format!("0.{}", ecc_digits.trim()).parse().map_err(|_| {
        TleError::Field { line: no2, field: "eccentricity", value: ecc_digits.into() }
    })?;
    let arg_perigee: f64 = field(no2, l2, 35, 42, "argument of perigee")?;
    let mean_anomaly: f64 = field(no2, l2, 44, 51, "mean anomaly")?;
    let mean_motion: f64 = field(no2, l2, 53, 63, "mean motion")?;
    let rev_raw = columns(l2, 64, 68).trim();
    let revolution_number: u32 = if rev_raw.is_empty() {
        0
    } else {
        field(no2, l2, 64, 68, "revolution number")?
    };

    let angle_checks = [
        ("raan", raan),
        ("argument of perigee", arg_perigee),
        ("mean anomaly", mean_anomaly),
    ];
    for (name, value) in angle_checks {
        if !(0.0..360.0).contains(&value) {
            return Err(TleError::OutOfRange { line: no2, field: name, value });
        }
    }
    if !(0.0..=180.0).contains(&inclination) {
        return Err(TleError::OutOfRange { line: no2, field: "inclination", value: inclination });
    }
    if !(mean_motion > 0.0) {
        return Err(TleError::OutOfRange { line: no2, field: "mean motion", value: mean_motion });
    }

    Ok(TleRecord {
        name: name.unwrap_or_else(|| format!("{catalog_id:05}")),
        catalog_id,
        epoch,
        inclination,
        raan,
        eccentricity,
        arg_perigee,
        mean_anomaly,
        mean_motion,
        revolution_number,
    })
}

/// Formats an angle with four decimals without rounding up to 360.
fn angle_field(deg: f64) -> String {
    let s = format!("{deg:8.4}");
    if s.trim() == "360.0000" {
        format!("{:8.4}", 0.0)
    } else {
        s
    }
}

impl TleRecord {
    /// Renders the two element lines with fresh checksums. Drag terms and the
    /// international designator are written as zeros/blank.
    pub fn to_lines(&self) -> (String, String) {
        let year = self.epoch.year();
        let start = Utc.with_ymd_and_hms(year, 1, 1, 0, 0, 0).unwrap();
        let secs = (self.epoch - start).num_microseconds().unwrap_or(0) as f64 / 1e6;
        let day = 1.0 + secs / 86_400.0;
        let mut body1 = String::with_capacity(LINE_LEN);
        write!(
            body1,
            "1 {:05}U {:<8} {:02}{:012.8}  .00000000  00000-0  00000-0 0  999",
            self.catalog_id % 100_000,
            "",
            year.rem_euclid(100),
            day,
        )
        .unwrap();
        let ecc = ((self.eccentricity * 1e7).round() as u32).min(9_999_999);
        let mut body2 = String::with_capacity(LINE_LEN);
        write!(
            body2,
            "2 {:05} {} {} {:07} {} {} {:11.8}{:5}",
            self.catalog_id % 100_000,
            angle_field(self.inclination),
            angle_field(self.raan),
            ecc,
            angle_field(self.arg_perigee),
            angle_field(self.mean_anomaly),
            self.mean_motion,
            self.revolution_number % 100_000,
        )
        .unwrap();
        let c1 = checksum(&body1);
        let c2 = checksum(&body2);
        (format!("{body1}{c1}"), format!("{body2}{c2}"))
    }
}

/// Serializes records as a three-line TLE document.
pub fn format_tle(records: &[TleRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let (l1, l2) = r.to_lines();
        out.push_str(&r.name);
        out.push('\n');
        out.push_str(&l1);
        out.push('\n');
        out.push_str(&l2);
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("request to {url} timed out")]
    Timeout { url: String },
    #[error("{url} answered with HTTP status {status}")]
    Status { url: String, status: u16 },
    #[error("network failure fetching {url}: {message}")]
    Network { url: String, message: String },
}

/// Downloads a TLE document verbatim. Parsing is left to the caller.
pub fn fetch_tle(url: &str, timeout: Duration) -> Result<String, FetchError> {
    let agent = ureq::AgentBuilder::new().timeout(timeout).build();
    match agent.get(url).call() {
        Ok(resp) => resp.into_string().map_err(|e| classify_io(url, e)),
        Err(ureq::Error::Status(status, _)) => Err(FetchError::Status { url: url.into(), status }),
        Err(ureq::Error::Transport(t)) => {
            let timed_out = std::error::Error::source(&t)
                .and_then(|s| s.downcast_ref::<std::io::Error>())
                .is_some_and(|io| is_timeout(io.kind()));
            if timed_out || t.to_string().contains("timed out") {
                Err(FetchError::Timeout { url: url.into() })
            } else {
                Err(FetchError::Network { url: url.into(), message: t.to_string() })
            }
        }
    }
}

fn is_timeout(kind: std::io::ErrorKind) -> bool {
    matches!(kind, std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock)
}

fn classify_io(url: &str, e: std::io::Error) -> FetchError {
    if is_timeout(e.kind()) {
        FetchError::Timeout { url: url.into() }
    } else {
        FetchError::Network { url: url.into(), message: e.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ISS: &str = "ISS (ZARYA)
1 25544U 98067A   21316.58314353 -.00007551  00000-0 -13101-3 0  9994
2 25544  51.6442 328.9484 0004731 186.1225 318.0089 15.48559922311590
";

    /// Digit-sum oracle written independently of `checksum`.
    fn oracle(body: &str) -> u8 {
        let mut total = 0u32;
        for b in body.bytes() {
            if b.is_ascii_digit() {
                total += (b - b'0') as u32;
            } else if b == b'-' {
                total += 1;
            }
        }
        (total % 10) as u8
    }

    #[test]
    fn checksum_edge_cases() {
        assert_eq!(checksum(&"0 ".repeat(34)), 0);
        assert_eq!(checksum("  -  ABC "), 1);
        let l1 = ISS.lines().nth(1).unwrap();
        let l2 = ISS.lines().nth(2).unwrap();
        assert_eq!(checksum(&l1[..68]), 4);
        assert_eq!(checksum(&l2[..68]), 0);
        assert_eq!(checksum(&l1[..68]), oracle(&l1[..68]));
    }

    #[test]
    fn parses_published_record() {
        let recs = parse_tle(ISS).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.name, "ISS (ZARYA)");
        assert_eq!(r.catalog_id, 25544);
        assert_eq!(r.inclination, 51.6442);
        assert_eq!(r.raan, 328.9484);
        assert_eq!(r.eccentricity, 0.0004731);
        assert_eq!(r.arg_perigee, 186.1225);
        assert_eq!(r.mean_anomaly, 318.0089);
        assert_eq!(r.mean_motion, 15.48559922);
        assert_eq!(r.revolution_number, 31159);
        // Day 316.58314353 of 2021 is 12 Nov, 13:59:43.601 UTC.
        let expected = Utc.with_ymd_and_hms(2021, 11, 12, 13, 59, 43).unwrap()
            + ChronoDuration::microseconds(600_993);
        assert!((r.epoch - expected).num_microseconds().unwrap().abs() <= 1);
    }

    #[test]
    fn implied_decimal_eccentricity() {
        let mut lines: Vec<String> = ISS.lines().map(String::from).collect();
        let mut body = lines[2][..68].to_string();
        body.replace_range(26..33, "0001234");
        let c = oracle(&body);
        lines[2] = format!("{body}{c}");
        let recs = parse_tle(&lines.join("\n")).unwrap();
        assert_eq!(recs[0].eccentricity, 0.0001234);
    }

    #[test]
    fn empty_document() {
        assert!(parse_tle("").unwrap().is_empty());
        assert!(parse_tle("\n\n  \n").unwrap().is_empty());
    }

    #[test]
    fn corrupted_digit_is_reported_with_line_number() {
        let mut lines: Vec<String> = ISS.lines().map(String::from).collect();
        // Flip the last digit of the revolution number; checksum digit stays.
        lines[2].replace_range(67..68, "1");
        let text = lines.join("\n");
        match parse_tle(&text) {
            Err(TleError::Checksum { line, expected, found }) => {
                assert_eq!(line, 3);
                assert_eq!(expected, oracle(&lines[2][..68]));
                assert_eq!(found, '0');
            }
            other => panic!("unexpected {other:?}"),
        }
        let (recs, warns) =
            parse_tle_with(&text, ParseOptions { permissive_checksum: true }).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(warns.len(), 1);
        assert_eq!(warns[0].line, 3);
    }

    #[test]
    fn malformed_lines() {
        let lines: Vec<&str> = ISS.lines().collect();
        let short = format!("{}\n{}\n{}", lines[0], &lines[1][..60], lines[2]);
        assert!(matches!(parse_tle(&short), Err(TleError::LineLength { line: 2, .. })));

        let marker = format!("{}\n3{}\n{}", lines[0], &lines[1][1..], lines[2]);
        assert!(matches!(
            parse_tle(&marker),
            Err(TleError::LineMarker { line: 2, expected: '1', found: '3' })
        ));

        let truncated = format!("{}\n{}", lines[0], lines[1]);
        assert!(matches!(parse_tle(&truncated), Err(TleError::Truncated { .. })));

        let mut body = lines[2][..68].to_string();
        body.replace_range(8..16, " 51.6x42");
        let bad = format!("{}\n{}\n{}{}", lines[0], lines[1], body, oracle(&body));
        assert!(matches!(
            parse_tle(&bad),
            Err(TleError::Field { line: 3, field: "inclination", .. })
        ));
    }

    #[test]
    fn name_line_is_optional() {
        let two = ISS.lines().skip(1).collect::<Vec<_>>().join("\n");
        let recs = parse_tle(&two).unwrap();
        assert_eq!(recs[0].name, "25544");
        let zero = ISS.replacen("ISS", "0 ISS", 1);
        assert_eq!(parse_tle(&zero).unwrap()[0].name, "ISS (ZARYA)");
    }

    #[test]
    fn two_digit_year_convention() {
        let recs = parse_tle(ISS).unwrap();
        assert_eq!(recs[0].epoch.year(), 2021);
        let mut lines: Vec<String> = ISS.lines().map(String::from).collect();
        let mut body = lines[1][..68].to_string();
        body.replace_range(18..20, "98");
        lines[1] = format!("{body}{}", oracle(&body));
        assert_eq!(parse_tle(&lines.join("\n")).unwrap()[0].epoch.year(), 1998);
    }

    #[test]
    fn serialization_round_trip() {
        let rec = parse_tle(ISS).unwrap().remove(0);
        let text = format_tle(std::slice::from_ref(&rec));
        let back = parse_tle(&text).unwrap().remove(0);
        assert_eq!(back.inclination, rec.inclination);
        assert_eq!(back.raan, rec.raan);
        assert_eq!(back.eccentricity, rec.eccentricity);
        assert_eq!(back.mean_motion, rec.mean_motion);
        assert_eq!(back.revolution_number, rec.revolution_number);
        assert!((back.epoch - rec.epoch).num_milliseconds().abs() <= 1);
    }
}
