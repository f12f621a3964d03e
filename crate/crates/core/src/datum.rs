//! The stored value universe and its textual dump encoding.
//!
//! Dump grammar:
//!
//! ```text
//! datum   := #uninit | integer | string | date | name | seq
//! integer := optional `-` then decimal digits
//! string  := `"` chars with `\"` and `\\` escapes `"`
//! date    := (date year month day)
//! name    := (name string string string string)   ; last first middle suffix
//! seq     := [ datum* ]
//! ```

use std::fmt;

use thiserror::Error;

use crate::sexpr::{self, Sexp, SexpKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DateError {
    #[error("year {0} is outside 0..=9999")]
    Year(i32),
    #[error("month {0} is outside 1..=12")]
    Month(u32),
    #[error("day {0} is outside 1..=31")]
    Day(u32),
}

/// A calendar date with coarse range checks only.
///
/// Month lengths and leap years are not checked here; that is the `date`
/// validator's job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleDate {
    year: i32,
    month: u8,
    day: u8,
}

impl SimpleDate {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self, DateError> {
        if !(0..=9999).contains(&year) {
            return Err(DateError::Year(year));
        }
        if !(1..=12).contains(&month) {
            return Err(DateError::Month(month));
        }
        if !(1..=31).contains(&day) {
            return Err(DateError::Day(day));
        }
        Ok(SimpleDate {
            year,
            month: month as u8,
            day: day as u8,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month as u32
    }

    pub fn day(&self) -> u32 {
        self.day as u32
    }

    /// True when the day exists in the given month of the given year.
    pub fn is_calendar_valid(&self) -> bool {
        self.day() <= days_in_month(self.year, self.month())
    }
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

/// A subject's name. Every part is always present; absent parts are empty
/// strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PersonName {
    pub last: String,
    pub first: String,
    pub middle: String,
    pub suffix: String,
}

impl PersonName {
    pub fn new(last: &str, first: &str, middle: &str, suffix: &str) -> Self {
        PersonName {
            last: last.to_string(),
            first: first.to_string(),
            middle: middle.to_string(),
            suffix: suffix.to_string(),
        }
    }
}

/// A stored value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum Datum {
    /// The single typed-absence value. Returned for anything that was never
    /// written, and storable in its own right.
    #[default]
    Uninitialized,
    Text(String),
    Integer(i64),
    Date(SimpleDate),
    Name(PersonName),
    Sequence(Vec<Datum>),
}

impl Datum {
    pub fn text(s: impl Into<String>) -> Self {
        Datum::Text(s.into())
    }

    pub fn is_uninitialized(&self) -> bool {
        matches!(self, Datum::Uninitialized)
    }

    /// Applies `f` unless `self` is uninitialized, which absorbs.
    pub fn maybe_map(self, f: impl FnOnce(Datum) -> Datum) -> Datum {
        match self {
            Datum::Uninitialized => Datum::Uninitialized,
            d => f(d),
        }
    }

    pub fn maybe_or_default(self, fallback: Datum) -> Datum {
        match self {
            Datum::Uninitialized => fallback,
            d => d,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Datum::Uninitialized => "uninitialized",
            Datum::Text(_) => "text",
            Datum::Integer(_) => "integer",
            Datum::Date(_) => "date",
            Datum::Name(_) => "name",
            Datum::Sequence(_) => "sequence",
        }
    }

    pub fn serialize(&self) -> Vec<u8> {
        self.to_dump().into_bytes()
    }

    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        self.write_dump(&mut out);
        out
    }

    pub fn write_dump(&self, out: &mut String) {
        match self {
            Datum::Uninitialized => out.push_str("#uninit"),
            Datum::Text(s) => sexpr::write_string(out, s),
            Datum::Integer(n) => out.push_str(&n.to_string()),
            Datum::Date(d) => {
                out.push_str(&format!("(date {} {} {})", d.year, d.month, d.day));
            }
            Datum::Name(n) => {
                out.push_str("(name ");
                for (i, part) in [&n.last, &n.first, &n.middle, &n.suffix].iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    sexpr::write_string(out, part);
                }
                out.push(')');
            }
            Datum::Sequence(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    item.write_dump(out);
                }
                out.push(']');
            }
        }
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Datum, DecodeError> {
        let text = std::str::from_utf8(bytes).map_err(|e| DecodeError {
            offset: e.valid_up_to(),
            reason: "invalid UTF-8".to_string(),
        })?;
        let form = sexpr::read_one(text).map_err(|e| DecodeError {
            offset: e.pos.offset,
            reason: e.message,
        })?;
        Datum::from_sexp(&form)
    }

    /// Interprets an already-read form as a datum.
    pub fn from_sexp(form: &Sexp) -> Result<Datum, DecodeError> {
        let fail = |at: &Sexp, reason: String| DecodeError {
            offset: at.pos.offset,
            reason,
        };
        match &form.kind {
            SexpKind::Uninit => Ok(Datum::Uninitialized),
            SexpKind::Int(n) => Ok(Datum::Integer(*n)),
            SexpKind::Str(s) => Ok(Datum::Text(s.clone())),
            SexpKind::Vector(items) => items
                .iter()
                .map(Datum::from_sexp)
                .collect::<Result<Vec<_>, _>>()
                .map(Datum::Sequence),
            SexpKind::List(items) => {
                let head = items
                    .first()
                    .and_then(|h| match &h.kind {
                        SexpKind::Symbol(s) => Some(s.as_str()),
                        _ => None,
                    })
                    .ok_or_else(|| fail(form, "expected `date` or `name` form".into()))?;
                match head {
                    "date" => {
                        if items.len() != 4 {
                            return Err(fail(form, "date takes year, month and day".into()));
                        }
                        let mut parts = [0i64; 3];
                        for (slot, item) in parts.iter_mut().zip(&items[1..]) {
                            *slot = item
                                .as_int()
                                .ok_or_else(|| fail(item, "date fields must be integers".into()))?;
                        }
                        let field = |i: usize| -> Result<u32, DecodeError> {
                            u32::try_from(parts[i]).map_err(|_| {
                                fail(&items[i + 1], format!("date field {} out of range", parts[i]))
                            })
                        };
                        let year = i32::try_from(parts[0])
                            .map_err(|_| fail(&items[1], format!("year {} out of range", parts[0])))?;
                        let (month, day) = (field(1)?, field(2)?);
                        SimpleDate::new(year, month, day).map(Datum::Date).map_err(|e| {
                            let at = match e {
                                DateError::Year(_) => &items[1],
                                DateError::Month(_) => &items[2],
                                DateError::Day(_) => &items[3],
                            };
                            fail(at, e.to_string())
                        })
                    }
                    "name" => {
                        if items.len() != 5 {
                            return Err(fail(form, "name takes four strings".into()));
                        }
                        let mut parts = Vec::with_capacity(4);
                        for item in &items[1..] {
                            parts.push(
                                item.as_str()
                                    .ok_or_else(|| fail(item, "name parts must be strings".into()))?,
                            );
                        }
                        Ok(Datum::Name(PersonName::new(parts[0], parts[1], parts[2], parts[3])))
                    }
                    other => Err(fail(form, format!("unknown datum form `{other}`"))),
                }
            }
            SexpKind::Symbol(s) => Err(fail(form, format!("bare symbol `{s}` is not a datum"))),
            SexpKind::Keyword(s) => Err(fail(form, format!("keyword `:{s}` is not a datum"))),
        }
    }
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dump())
    }
}

impl From<SimpleDate> for Datum {
    fn from(d: SimpleDate) -> Self {
        Datum::Date(d)
    }
}

impl From<PersonName> for Datum {
    fn from(n: PersonName) -> Self {
        Datum::Name(n)
    }
}

/// A malformed dump, located by the byte offset of the first violation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed datum at byte {offset}: {reason}")]
pub struct DecodeError {
    pub offset: usize,
    pub reason: String,
}
