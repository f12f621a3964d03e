//! Formatters and parsers: named functions between stored values and
//! external text.
//!
//! | name | direction | behaviour |
//! |------|-----------|-----------|
//! | `identity` | both | text unchanged |
//! | `string-upcase` | format | ASCII upper case |
//! | `format-simple-date-short`, `format-date-short` | format | `M/D/YYYY`, unpadded |
//! | `format-simple-date-long`, `format-date-long` | format | `the fourth of July, 2010` |
//! | `format-date-fbi` | format | `YYYYMMDD`, zero padded |
//! | `format-date-card` | format | `MM/DD/YYYY`, zero padded |
//! | `format-name-last-first` | format | `Doe, John S` |
//! | `format-name-first-middle-last` | format | `John, S, Doe` |
//! | `format-integer` | format | decimal |
//! | `parse-simple-date-fbi`, `parse-date-fbi` | parse | `YYYYMMDD` with optional slashes |
//! | `optional-text` | parse | empty input is uninitialized, else text |
//! | `parse-integer` | parse | decimal integer |

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::datum::{Datum, DateError, PersonName, SimpleDate};
use crate::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{formatter}` expects a {expected} value, got {found}")]
pub struct FormatError {
    pub formatter: String,
    pub expected: &'static str,
    pub found: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("`{parser}` cannot parse {input:?}: {reason}")]
    Syntax {
        parser: String,
        input: String,
        reason: String,
    },
    #[error("`{parser}` parsed {input:?} to an invalid date: {source}")]
    Range {
        parser: String,
        input: String,
        source: DateError,
    },
}

pub type FormatFn = dyn Fn(&Datum) -> Result<String, FormatError> + Send + Sync;
pub type ParseFn = dyn Fn(&str) -> Result<Datum, ParseError> + Send + Sync;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{0}` is already registered")]
pub struct DuplicateName(pub Symbol);

/// A name-to-function table. Used for both formatters and parsers.
pub struct FnRegistry<F: ?Sized> {
    entries: HashMap<Symbol, Arc<F>>,
}

impl<F: ?Sized> Clone for FnRegistry<F> {
    fn clone(&self) -> Self {
        FnRegistry {
            entries: self.entries.clone(),
        }
    }
}

impl<F: ?Sized> Default for FnRegistry<F> {
    fn default() -> Self {
        FnRegistry {
            entries: HashMap::new(),
        }
    }
}

impl<F: ?Sized> fmt::Debug for FnRegistry<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.entries.keys().collect();
        names.sort();
        f.debug_set().entries(names).finish()
    }
}

impl<F: ?Sized> FnRegistry<F> {
    pub fn register_arc(&mut self, name: impl Into<Symbol>, f: Arc<F>) -> Result<(), DuplicateName> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(DuplicateName(name));
        }
        self.entries.insert(name, f);
        Ok(())
    }

    /// Hot-patch: replaces any existing binding.
    pub fn replace_arc(&mut self, name: impl Into<Symbol>, f: Arc<F>) {
        self.entries.insert(name.into(), f);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<F>> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> Vec<&Symbol> {
        let mut names: Vec<_> = self.entries.keys().collect();
        names.sort();
        names
    }
}

pub type FormatterRegistry = FnRegistry<FormatFn>;
pub type ParserRegistry = FnRegistry<ParseFn>;

impl FormatterRegistry {
    pub fn register<G>(&mut self, name: impl Into<Symbol>, f: G) -> Result<(), DuplicateName>
    where
        G: Fn(&Datum) -> Result<String, FormatError> + Send + Sync + 'static,
    {
        self.register_arc(name, Arc::new(f))
    }

    pub fn format(&self, name: &str, d: &Datum) -> Option<Result<String, FormatError>> {
        self.get(name).map(|f| f(d))
    }

    pub fn standard() -> Self {
        let mut r = Self::default();
        let table: Vec<(&[&str], Arc<FormatFn>)> = vec![
            (&["identity"], Arc::new(format_identity)),
            (&["string-upcase"], Arc::new(format_upcase)),
            (
                &["format-simple-date-short", "format-date-short"],
                Arc::new(|d: &Datum| date_arg("format-simple-date-short", d).map(format_simple_date_short)),
            ),
            (
                &["format-simple-date-long", "format-date-long"],
                Arc::new(|d: &Datum| date_arg("format-simple-date-long", d).map(format_simple_date_long)),
            ),
            (
                &["format-date-fbi"],
                Arc::new(|d: &Datum| date_arg("format-date-fbi", d).map(format_date_fbi)),
            ),
            (
                &["format-date-card"],
                Arc::new(|d: &Datum| date_arg("format-date-card", d).map(format_date_card)),
            ),
            (
                &["format-name-last-first"],
                Arc::new(|d: &Datum| name_arg("format-name-last-first", d).map(format_name_last_first)),
            ),
            (
                &["format-name-first-middle-last"],
                Arc::new(|d: &Datum| {
                    name_arg("format-name-first-middle-last", d).map(format_name_first_middle_last)
                }),
            ),
            (
                &["format-integer"],
                Arc::new(|d: &Datum| match d {
                    Datum::Integer(n) => Ok(n.to_string()),
                    other => Err(wrong_variant("format-integer", "integer", other)),
                }),
            ),
        ];
        for (names, f) in table {
            for name in names {
                r.register_arc(*name, f.clone()).expect("distinct built-in names");
            }
        }
        r
    }
}

impl ParserRegistry {
    pub fn register<G>(&mut self, name: impl Into<Symbol>, f: G) -> Result<(), DuplicateName>
    where
        G: Fn(&str) -> Result<Datum, ParseError> + Send + Sync + 'static,
    {
        self.register_arc(name, Arc::new(f))
    }

    pub fn parse(&self, name: &str, s: &str) -> Option<Result<Datum, ParseError>> {
        self.get(name).map(|f| f(s))
    }

    pub fn standard() -> Self {
        let mut r = Self::default();
        let table: Vec<(&[&str], Arc<ParseFn>)> = vec![
            (&["identity"], Arc::new(|s: &str| Ok(parse_identity(s)))),
            (
                &["parse-simple-date-fbi", "parse-date-fbi"],
                Arc::new(|s: &str| parse_simple_date_fbi(s).map(Datum::Date)),
            ),
            (
                &["optional-text"],
                Arc::new(|s: &str| {
                    Ok(if s.is_empty() {
                        Datum::Uninitialized
                    } else {
                        Datum::text(s)
                    })
                }),
            ),
            (
                &["parse-integer"],
                Arc::new(|s: &str| {
                    s.trim().parse::<i64>().map(Datum::Integer).map_err(|e| ParseError::Syntax {
                        parser: "parse-integer".into(),
                        input: s.into(),
                        reason: e.to_string(),
                    })
                }),
            ),
        ];
        for (names, f) in table {
            for name in names {
                r.register_arc(*name, f.clone()).expect("distinct built-in names");
            }
        }
        r
    }
}

fn wrong_variant(formatter: &str, expected: &'static str, found: &Datum) -> FormatError {
    FormatError {
        formatter: formatter.to_string(),
        expected,
        found: found.variant_name(),
    }
}

fn date_arg<'a>(formatter: &str, d: &'a Datum) -> Result<&'a SimpleDate, FormatError> {
    match d {
        Datum::Date(date) => Ok(date),
        other => Err(wrong_variant(formatter, "date", other)),
    }
}

fn name_arg<'a>(formatter: &str, d: &'a Datum) -> Result<&'a PersonName, FormatError> {
    match d {
        Datum::Name(n) => Ok(n),
        other => Err(wrong_variant(formatter, "name", other)),
    }
}

pub fn format_identity(d: &Datum) -> Result<String, FormatError> {
    match d {
        Datum::Text(s) => Ok(s.clone()),
        other => Err(wrong_variant("identity", "text", other)),
    }
}

pub fn parse_identity(s: &str) -> Datum {
    Datum::text(s)
}

pub fn format_upcase(d: &Datum) -> Result<String, FormatError> {
    match d {
        Datum::Text(s) => Ok(s.to_ascii_uppercase()),
        other => Err(wrong_variant("string-upcase", "text", other)),
    }
}

/// `M/D/YYYY` with raw, unpadded fields.
pub fn format_simple_date_short(d: &SimpleDate) -> String {
    format!("{}/{}/{}", d.month(), d.day(), d.year())
}

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

const ORDINALS: [&str; 31] = [
    "first",
    "second",
    "third",
    "fourth",
    "fifth",
    "sixth",
    "seventh",
    "eighth",
    "ninth",
    "tenth",
    "eleventh",
    "twelfth",
    "thirteenth",
    "fourteenth",
    "fifteenth",
    "sixteenth",
    "seventeenth",
    "eighteenth",
    "nineteenth",
    "twentieth",
    "twenty-first",
    "twenty-second",
    "twenty-third",
    "twenty-fourth",
    "twenty-fifth",
    "twenty-sixth",
    "twenty-seventh",
    "twenty-eighth",
    "twenty-ninth",
    "thirtieth",
    "thirty-first",
];

pub fn ordinal_word(day: u32) -> Option<&'static str> {
    ORDINALS.get((day as usize).checked_sub(1)?).copied()
}

pub fn month_name(month: u32) -> Option<&'static str> {
    MONTHS.get((month as usize).checked_sub(1)?).copied()
}

/// `the fourth of July, 2010`.
pub fn format_simple_date_long(d: &SimpleDate) -> String {
    // SimpleDate guarantees both lookups are in range.
    format!(
        "the {} of {}, {}",
        ordinal_word(d.day()).expect("day in 1..=31"),
        month_name(d.month()).expect("month in 1..=12"),
        d.year()
    )
}

/// `YYYYMMDD`, the slash-free form [`parse_simple_date_fbi`] reads back.
pub fn format_date_fbi(d: &SimpleDate) -> String {
    format!("{:04}{:02}{:02}", d.year(), d.month(), d.day())
}

/// `MM/DD/YYYY`, always ten characters.
pub fn format_date_card(d: &SimpleDate) -> String {
    format!("{:02}/{:02}/{:04}", d.month(), d.day(), d.year())
}

/// Reads `YYYYMMDD` after removing every `/`.
pub fn parse_simple_date_fbi(s: &str) -> Result<SimpleDate, ParseError> {
    let stripped: String = s.chars().filter(|&c| c != '/').collect();
    let syntax = |reason: &str| ParseError::Syntax {
        parser: "parse-simple-date-fbi".into(),
        input: s.into(),
        reason: reason.into(),
    };
    if !stripped.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax("expected only digits and slashes"));
    }
    if stripped.len() != 8 {
        return Err(syntax("expected exactly eight digits"));
    }
    let year: i32 = stripped[0..4].parse().expect("digits");
    let month: u32 = stripped[4..6].parse().expect("digits");
    let day: u32 = stripped[6..8].parse().expect("digits");
    SimpleDate::new(year, month, day).map_err(|source| ParseError::Range {
        parser: "parse-simple-date-fbi".into(),
        input: s.into(),
        source,
    })
}

fn middle_initial(n: &PersonName) -> String {
    n.middle.chars().next().map(String::from).unwrap_or_default()
}

/// `Last, First M`. An empty first name or middle initial is dropped along
/// with its separating space; the suffix is not printed.
pub fn format_name_last_first(n: &PersonName) -> String {
    let initial = middle_initial(n);
    let right: Vec<&str> = [n.first.as_str(), initial.as_str()]
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    if right.is_empty() {
        format!("{},", n.last)
    } else {
        format!("{}, {}", n.last, right.join(" "))
    }
}

/// `First, M, Last`. Every comma is kept even when a part is empty.
pub fn format_name_first_middle_last(n: &PersonName) -> String {
    format!("{}, {}, {}", n.first, middle_initial(n), n.last)
}
