use super::series::SLOT_LEN_MS;
use super::IngestError;

/// Activity columns in the order they appear after the country code.
pub const ACTIVITY_FIELDS: [&str; 5] = ["sms_in", "sms_out", "call_in", "call_out", "internet"];

#[derive(Debug, Clone, PartialEq)]
pub struct RawCdrRecord {
    pub square_id: u64,
    /// Start of the 10-minute slot, UTC milliseconds since the epoch.
    pub slot_start: i64,
    pub country_code: Option<u32>,
    pub activity: [Option<f64>; 5],
}

impl RawCdrRecord {
    pub fn activity_sum(&self) -> f64 {
        self.activity.iter().flatten().sum()
    }

    pub fn internet(&self) -> Option<f64> {
        self.activity[4]
    }
}

/// Why a line was not turned into a record.
#[derive(Debug, Clone, PartialEq)]
pub enum LineIssue {
    Unparseable(String),
    /// Well-formed, but every activity field is empty.
    NoActivity,
    /// `slot_start` is not on a 10-minute boundary.
    Misaligned(i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineDiagnostic {
    /// 1-based line number in the input.
    pub line: usize,
    pub issue: LineIssue,
}

impl std::fmt::Display for LineDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.issue {
            LineIssue::Unparseable(why) => write!(f, "line {}: unparseable: {}", self.line, why),
            LineIssue::NoActivity => write!(f, "line {}: no activity fields present", self.line),
            LineIssue::Misaligned(ts) => {
                write!(f, "line {}: timestamp {} not on a 10-minute boundary", self.line, ts)
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedRecords {
    pub records: Vec<RawCdrRecord>,
    pub diagnostics: Vec<LineDiagnostic>,
}

/// Adapter boundary for raw CDR layouts.
pub trait RecordSchema {
    fn parse_line(&self, line: &str) -> Result<RawCdrRecord, LineIssue>;
}

/// `square_id, slot_start_ms, country_code, sms_in, sms_out, call_in,
/// call_out, internet` with empty fields allowed after the timestamp.
#[derive(Debug, Clone, Copy)]
pub struct TelecomItaliaSchema {
    pub delimiter: char,
}

impl Default for TelecomItaliaSchema {
    fn default() -> Self {
        TelecomItaliaSchema { delimiter: '\t' }
    }
}

fn bad(msg: impl Into<String>) -> LineIssue {
    LineIssue::Unparseable(msg.into())
}

impl RecordSchema for TelecomItaliaSchema {
    fn parse_line(&self, line: &str) -> Result<RawCdrRecord, LineIssue> {
        let fields: Vec<&str> = line.split(self.delimiter).map(str::trim).collect();
        if fields.len() < 2 {
            return Err(bad("expected at least square id and timestamp"));
        }
        if fields.len() > 3 + ACTIVITY_FIELDS.len() {
            return Err(bad(format!("too many fields ({})", fields.len())));
        }

        let square_id: u64 = fields[0]
            .parse()
            .map_err(|_| bad(format!("bad square id {:?}", fields[0])))?;
        if square_id == 0 {
            return Err(bad("square id must be positive"));
        }
        let slot_start: i64 = fields[1]
            .parse()
            .map_err(|_| bad(format!("bad timestamp {:?}", fields[1])))?;

        let country_code = match fields.get(2) {
            None | Some(&"") => None,
            Some(s) => Some(s.parse().map_err(|_| bad(format!("bad country code {:?}", s)))?),
        };

        let mut activity = [None; 5];
        for (slot, raw) in activity.iter_mut().zip(fields.iter().skip(3)) {
            if raw.is_empty() {
                continue;
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| bad(format!("bad activity value {:?}", raw)))?;
            if !v.is_finite() || v < 0.0 {
                return Err(bad(format!("activity value {} is not a non-negative number", v)));
            }
            *slot = Some(v);
        }

        if slot_start.rem_euclid(SLOT_LEN_MS) != 0 {
            return Err(LineIssue::Misaligned(slot_start));
        }
        if activity.iter().all(Option::is_none) {
            return Err(LineIssue::NoActivity);
        }
        Ok(RawCdrRecord { square_id, slot_start, country_code, activity })
    }
}

/// Parse every non-blank line with `schema`. Rejected lines are collected
/// as diagnostics; only an input with no content at all is an error.
pub fn parse_with<S, I, L>(schema: &S, lines: I) -> Result<ParsedRecords, IngestError>
where
    S: RecordSchema + ?Sized,
    I: IntoIterator<Item = L>,
    L: AsRef<str>,
{
    let mut out = ParsedRecords::default();
    let mut seen_content = false;
    for (i, line) in lines.into_iter().enumerate() {
        let line = line.as_ref().trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        seen_content = true;
        match schema.parse_line(line) {
            Ok(rec) => out.records.push(rec),
            Err(issue) => out.diagnostics.push(LineDiagnostic { line: i + 1, issue }),
        }
    }
    if !seen_content {
        return Err(IngestError::EmptyInput);
    }
    Ok(out)
}

pub fn parse_raw<I, L>(lines: I, delimiter: char) -> Result<ParsedRecords, IngestError>
where
    I: IntoIterator<Item = L>,
    L: AsRef<str>,
{
    parse_with(&TelecomItaliaSchema { delimiter }, lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internet_only_line() {
        let parsed = parse_raw(["5061\t1384726200000\t39\t\t\t\t\t2.5"], '\t').unwrap();
        assert!(parsed.diagnostics.is_empty());
        let rec = &parsed.records[0];
        assert_eq!(rec.square_id, 5061);
        assert_eq!(rec.slot_start, 1384726200000);
        assert_eq!(rec.country_code, Some(39));
        assert_eq!(rec.internet(), Some(2.5));
        assert_eq!(rec.activity[..4], [None; 4]);
    }

    #[test]
    fn malformed_id_is_reported_with_line_number() {
        let parsed = parse_raw(["5061\t1384726200000\t39\t1", "abc\t1384726200000"], '\t').unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.diagnostics.len(), 1);
        assert_eq!(parsed.diagnostics[0].line, 2);
        assert!(matches!(parsed.diagnostics[0].issue, LineIssue::Unparseable(_)));
    }

    #[test]
    fn empty_input() {
        let none: [&str; 0] = [];
        assert!(matches!(parse_raw(none, '\t'), Err(IngestError::EmptyInput)));
        assert!(matches!(parse_raw(["", "  "], '\t'), Err(IngestError::EmptyInput)));
    }

    #[test]
    fn record_without_activity_is_flagged() {
        let parsed = parse_raw(["5061\t1384726200000\t39\t\t\t\t\t"], '\t').unwrap();
        assert!(parsed.records.is_empty());
        assert_eq!(parsed.diagnostics[0].issue, LineIssue::NoActivity);
        let parsed = parse_raw(["5061\t1384726200000"], '\t').unwrap();
        assert_eq!(parsed.diagnostics[0].issue, LineIssue::NoActivity);
    }

    #[test]
    fn misaligned_and_negative_values() {
        let parsed = parse_raw(
            ["5061\t1384726200001\t39\t1", "5061\t1384726200000\t39\t-1", "5061\tx\t39\t1"],
            '\t',
        )
        .unwrap();
        assert!(parsed.records.is_empty());
        assert_eq!(parsed.diagnostics[0].issue, LineIssue::Misaligned(1384726200001));
        assert!(matches!(parsed.diagnostics[1].issue, LineIssue::Unparseable(_)));
        assert!(matches!(parsed.diagnostics[2].issue, LineIssue::Unparseable(_)));
    }

    #[test]
    fn custom_delimiter() {
        let parsed = parse_raw(["5061,1384726200000,,0.5"], ',').unwrap();
        assert_eq!(parsed.records[0].country_code, None);
        assert_eq!(parsed.records[0].activity[0], Some(0.5));
    }
}
