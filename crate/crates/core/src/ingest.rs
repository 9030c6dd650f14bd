//! Call-log parsing, behaviour labelling, time segmentation, and dataset CSV I/O.
//!
//! Raw call logs are CSV with the header
//! `date,time,call_type,duration,location,relationship,call_id`, optionally
//! followed by extra categorical columns. Dataset CSVs carry one column per
//! attribute and the class in the last column; a leading `id` column, when
//! present, supplies row ids.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::dataset::{validate_dataset, Attribute, AttributeSchema, Dataset, UncheckedRow};
use crate::error::{Error, Result};

pub const RAW_COLUMNS: [&str; 7] = [
    "date",
    "time",
    "call_type",
    "duration",
    "location",
    "relationship",
    "call_id",
];

pub const DAY_NAMES: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

const DAY_SECONDS: u32 = 24 * 60 * 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CallType {
    Incoming,
    Missed,
    Outgoing,
}

impl std::str::FromStr for CallType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "incoming" => Ok(CallType::Incoming),
            "missed" => Ok(CallType::Missed),
            "outgoing" => Ok(CallType::Outgoing),
            other => Err(format!("unknown call_type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviorLabel {
    Accept,
    Reject,
    Missed,
    Outgoing,
}

impl BehaviorLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BehaviorLabel::Accept => "Accept",
            BehaviorLabel::Reject => "Reject",
            BehaviorLabel::Missed => "Missed",
            BehaviorLabel::Outgoing => "Outgoing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRecord {
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub call_type: CallType,
    pub duration: u64,
    pub location: String,
    pub relationship: String,
    pub call_id: String,
    /// Extra categorical columns as `(header, value)`, in file order.
    pub extra: Vec<(String, String)>,
    /// 1-based line in the source file.
    pub line: usize,
}

/// Parses a raw call-log CSV.
pub fn parse_log<R: Read>(source: R) -> Result<Vec<CallRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.len() < RAW_COLUMNS.len() || headers[..RAW_COLUMNS.len()] != RAW_COLUMNS {
        return Err(Error::Parse {
            line: 1,
            reason: format!("header must start with `{}`", RAW_COLUMNS.join(",")),
        });
    }
    let extra_names = headers[RAW_COLUMNS.len()..].to_vec();

    let mut records = Vec::new();
    for result in reader.records() {
        let row = result.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let bad = |reason: String| Error::Parse { line, reason };
        let field = |i: usize| -> Result<&str> {
            let v = row.get(i).unwrap_or("").trim();
            if v.is_empty() {
                Err(Error::Parse {
                    line,
                    reason: format!("empty `{}`", headers[i]),
                })
            } else {
                Ok(v)
            }
        };

        let date = NaiveDate::parse_from_str(field(0)?, "%Y-%m-%d")
            .map_err(|e| bad(format!("bad date: {e}")))?;
        let time = NaiveTime::parse_from_str(field(1)?, "%H:%M:%S")
            .map_err(|e| bad(format!("bad time: {e}")))?;
        let call_type: CallType = field(2)?.parse().map_err(bad)?;
        let duration: i64 = field(3)?
            .parse()
            .map_err(|e| bad(format!("bad duration: {e}")))?;
        if duration < 0 {
            return Err(bad(format!("negative duration {duration}")));
        }
        if call_type == CallType::Missed && duration != 0 {
            return Err(bad(format!("missed call with duration {duration}")));
        }
        let extra = extra_names
            .iter()
            .enumerate()
            .map(|(j, name)| Ok((name.clone(), field(RAW_COLUMNS.len() + j)?.to_string())))
            .collect::<Result<Vec<_>>>()?;

        records.push(CallRecord {
            date,
            time,
            call_type,
            duration: duration as u64,
            location: field(4)?.to_string(),
            relationship: field(5)?.to_string(),
            call_id: field(6)?.to_string(),
            extra,
            line,
        });
    }
    Ok(records)
}

/// Incoming calls are accepted when they lasted, rejected otherwise.
pub fn derive_behavior(record: &CallRecord) -> BehaviorLabel {
    match record.call_type {
        CallType::Incoming if record.duration > 0 => BehaviorLabel::Accept,
        CallType::Incoming => BehaviorLabel::Reject,
        CallType::Missed => BehaviorLabel::Missed,
        CallType::Outgoing => BehaviorLabel::Outgoing,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    #[serde(with = "clock")]
    pub start: u32,
    #[serde(with = "clock")]
    pub end: u32,
}

/// Named half-open `[start, end)` time-of-day segments covering the whole day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentationConfig {
    segments: Vec<Segment>,
}

impl<'de> Deserialize<'de> for SegmentationConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            segments: Vec<Segment>,
        }
        let raw = Raw::deserialize(d)?;
        SegmentationConfig::new(raw.segments).map_err(serde::de::Error::custom)
    }
}

impl SegmentationConfig {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let mut names = std::collections::HashSet::new();
        for s in &segments {
            if s.name.is_empty() {
                return Err(Error::Segmentation("segment names must be non-empty".into()));
            }
            if !names.insert(s.name.as_str()) {
                return Err(Error::Segmentation(format!("duplicate segment `{}`", s.name)));
            }
            if s.start >= s.end || s.end > DAY_SECONDS {
                return Err(Error::Segmentation(format!(
                    "segment `{}` must satisfy start < end <= 24:00",
                    s.name
                )));
            }
        }
        let mut sorted: Vec<&Segment> = segments.iter().collect();
        sorted.sort_by_key(|s| s.start);
        let mut cursor = 0;
        for s in sorted {
            if s.start < cursor {
                return Err(Error::Segmentation(format!("segment `{}` overlaps another", s.name)));
            }
            if s.start > cursor {
                return Err(Error::Segmentation(format!(
                    "gap before segment `{}` at {}",
                    s.name,
                    clock::format(cursor)
                )));
            }
            cursor = s.end;
        }
        if cursor != DAY_SECONDS {
            return Err(Error::Segmentation(format!(
                "segments stop at {}; they must cover the whole day",
                clock::format(cursor)
            )));
        }
        Ok(SegmentationConfig { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Segmentation(e.to_string()))
    }

    fn segment_at(&self, second: u32) -> &Segment {
        self.segments
            .iter()
            .find(|s| s.start <= second && second < s.end)
            .expect("validated segments cover the day")
    }
}

impl Default for SegmentationConfig {
    /// S1 = [08:00, 16:00), S2 = [16:00, 24:00), S3 = [00:00, 08:00).
    fn default() -> Self {
        let seg = |name: &str, start: u32, end: u32| Segment {
            name: name.into(),
            start: start * 3600,
            end: end * 3600,
        };
        SegmentationConfig::new(vec![seg("S1", 8, 16), seg("S2", 16, 24), seg("S3", 0, 8)])
            .expect("static segmentation")
    }
}

mod clock {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn parse(s: &str) -> Option<u32> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return None;
        }
        let nums: Vec<u32> = parts.iter().map(|p| p.parse().ok()).collect::<Option<_>>()?;
        let (h, m, sec) = (nums[0], nums[1], nums.get(2).copied().unwrap_or(0));
        if m >= 60 || sec >= 60 || h > 24 || (h == 24 && (m, sec) != (0, 0)) {
            return None;
        }
        Some(h * 3600 + m * 60 + sec)
    }

    pub fn format(secs: u32) -> String {
        let (h, m, s) = (secs / 3600, secs / 60 % 60, secs % 60);
        if s == 0 {
            format!("{h:02}:{m:02}")
        } else {
            format!("{h:02}:{m:02}:{s:02}")
        }
    }

    pub fn serialize<S: Serializer>(v: &u32, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid time of day `{s}`")))
    }
}

/// `Day[Segment]` token, e.g. `Fri[S1]`.
pub fn segment_time(date: NaiveDate, time: NaiveTime, config: &SegmentationConfig) -> String {
    let day = DAY_NAMES[date.weekday().num_days_from_monday() as usize];
    let seg = config.segment_at(time.num_seconds_from_midnight());
    format!("{day}[{}]", seg.name)
}

pub const DAYTIME: &str = "DayTime";
pub const LOCATION: &str = "Location";
pub const RELATIONSHIP: &str = "Relationship";
pub const BEHAVIOR: &str = "Behavior";

/// Builds the `DayTime, Location, <extra...>, Relationship -> Behavior` dataset.
///
/// Class labels are the behaviours that occur, in first-appearance order.
pub fn to_dataset(records: &[CallRecord], config: &SegmentationConfig) -> Result<Dataset> {
    let first = records.first().ok_or(Error::EmptyRows)?;
    let extra_names: Vec<&str> = first.extra.iter().map(|(n, _)| n.as_str()).collect();

    let mut attributes = vec![Attribute::new(DAYTIME), Attribute::new(LOCATION)];
    attributes.extend(extra_names.iter().map(|n| Attribute::new(*n)));
    attributes.push(Attribute::new(RELATIONSHIP));

    let mut labels: Vec<&str> = Vec::new();
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        let label = derive_behavior(r).as_str();
        if !labels.contains(&label) {
            labels.push(label);
        }
        let mut values = vec![segment_time(r.date, r.time, config), r.location.clone()];
        values.extend(r.extra.iter().map(|(_, v)| v.clone()));
        values.push(r.relationship.clone());
        rows.push(UncheckedRow::new(values, label));
    }
    let schema = AttributeSchema::new(attributes, BEHAVIOR, labels)?;
    validate_dataset(schema, rows)
}

/// Reads a dataset CSV (attributes..., class), with an optional leading `id` column.
pub fn read_dataset_csv<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let has_id = headers.first().is_some_and(|h| h == "id");
    let first_attr = usize::from(has_id);
    if headers.len() < first_attr + 2 {
        return Err(Error::Parse {
            line: 1,
            reason: "need at least one attribute column and a class column".into(),
        });
    }
    let class_col = headers.len() - 1;

    let mut labels: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for result in reader.records() {
        let rec = result.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let cell = |i: usize| -> Result<String> {
            let v = rec.get(i).unwrap_or("").trim();
            if v.is_empty() {
                Err(Error::Parse {
                    line,
                    reason: format!("missing value for `{}`", headers[i]),
                })
            } else {
                Ok(v.to_string())
            }
        };
        let values = (first_attr..class_col).map(cell).collect::<Result<Vec<_>>>()?;
        let label = cell(class_col)?;
        if !labels.contains(&label) {
            labels.push(label.clone());
        }
        let mut row = UncheckedRow::new(values, label);
        if has_id {
            let id = cell(0)?.parse().map_err(|e| Error::Parse {
                line,
                reason: format!("bad id: {e}"),
            })?;
            row = row.with_id(id);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }

    let attributes = headers[first_attr..class_col]
        .iter()
        .map(|h| Attribute::new(h.clone()))
        .collect();
    let schema = AttributeSchema::new(attributes, headers[class_col].clone(), labels)?;
    validate_dataset(schema, rows)
}

pub fn write_dataset_csv<W: Write>(dataset: &Dataset, sink: W, with_ids: bool) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    let schema = dataset.schema();
    let mut header: Vec<&str> = Vec::new();
    if with_ids {
        header.push("id");
    }
    header.extend(schema.attribute_names());
    header.push(schema.class_attribute());
    writer.write_record(&header)?;

    for row in dataset.rows() {
        let mut out: Vec<String> = Vec::with_capacity(header.len());
        if with_ids {
            out.push(row.id.to_string());
        }
        out.extend(row.instance.values().iter().cloned());
        out.push(row.label.clone());
        writer.write_record(&out)?;
    }
    writer.flush().map_err(|e| Error::io("<dataset csv>", e))?;
    Ok(())
}

pub fn load_dataset_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset_csv(std::io::BufReader::new(file))
}

pub fn load_call_log(path: &Path) -> Result<Vec<CallRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_log(std::io::BufReader::new(file))
}
