//! Validator algebra: named base validators composed with `and`, `or` and
//! `not`.
//!
//! Validators check external input text before it is parsed. A failing check
//! produces a [`ValidationError`] carrying the offending input and a
//! constructive message. Schema defects (an unregistered name, the wrong
//! number of arguments) are reported separately through [`ValidateError`].

use std::collections::HashMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use thiserror::Error;

use crate::datum::{Datum, SimpleDate};
use crate::sexpr::{self, Sexp, SexpKind};
use crate::symbol::Symbol;

/// The widget coordinates a validator may see. There is deliberately no
/// index: validators are invariant under the occurrence index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatorContext {
    pub name: Symbol,
    pub locale: Symbol,
    pub medium: Symbol,
}

impl ValidatorContext {
    pub fn new(name: impl Into<Symbol>, locale: impl Into<Symbol>, medium: impl Into<Symbol>) -> Self {
        ValidatorContext {
            name: name.into(),
            locale: locale.into(),
            medium: medium.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct ValidationError {
    /// The exact input that was rejected.
    pub value: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(value: &str, message: impl Into<String>) -> Self {
        ValidationError {
            value: value.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidateError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("validator `{0}` is not registered")]
    Unregistered(Symbol),
    #[error("validator `{name}` takes {expected} argument(s), got {got}")]
    Arity {
        name: Symbol,
        expected: String,
        got: usize,
    },
    #[error("validator `{name}`: {reason}")]
    BadArgument { name: Symbol, reason: String },
}

impl ValidateError {
    pub fn is_data_error(&self) -> bool {
        matches!(self, ValidateError::Invalid(_))
    }
}

/// Substitutes `~A` and `~D` directives positionally.
///
/// `~~` produces a literal tilde. Extra arguments are ignored; missing ones
/// leave the directive empty.
pub fn format_message(template: &str, args: &[&dyn fmt::Display]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut next = args.iter();
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '~' {
            out.push(c);
            continue;
        }
        match chars.peek().copied() {
            Some('A') | Some('a') | Some('D') | Some('d') => {
                chars.next();
                if let Some(arg) = next.next() {
                    out.push_str(&arg.to_string());
                }
            }
            Some('~') => {
                chars.next();
                out.push('~');
            }
            _ => out.push('~'),
        }
    }
    out
}

/// Raises a [`ValidateError::Invalid`] with a formatted message.
pub fn validation_error(input: &str, template: &str, args: &[&dyn fmt::Display]) -> ValidateError {
    ValidateError::Invalid(ValidationError::new(input, format_message(template, args)))
}

pub type BaseFn =
    dyn Fn(&ValidatorContext, &[Datum], &str) -> Result<(), ValidateError> + Send + Sync;

#[derive(Clone)]
pub struct BaseValidator {
    pub arity: RangeInclusive<usize>,
    imp: Arc<BaseFn>,
}

impl fmt::Debug for BaseValidator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseValidator").field("arity", &self.arity).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegisterError {
    #[error("`{0}` is already registered")]
    Duplicate(Symbol),
    #[error("invalid arity range {start}..={end} for `{name}`")]
    Arity { name: Symbol, start: usize, end: usize },
}

/// The validator namespace, separate from formatter and parser names.
#[derive(Clone, Default, Debug)]
pub struct ValidatorRegistry {
    entries: HashMap<Symbol, BaseValidator>,
}

impl ValidatorRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// A registry holding the built-in validators.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        let builtins: [(&str, RangeInclusive<usize>, Arc<BaseFn>); 8] = [
            ("numeric", 0..=0, Arc::new(|_, _, s| char_class(s, |c| c.is_ascii_digit(), "numeric"))),
            ("length", 2..=2, Arc::new(length)),
            (
                "alphabetic",
                0..=0,
                Arc::new(|_, _, s| {
                    char_class(s, |c| c.is_ascii_alphabetic() || c == ' ' || c == '-', "alphabetic")
                }),
            ),
            (
                "strictly-alphabetic",
                0..=0,
                Arc::new(|_, _, s| char_class(s, |c| c.is_ascii_alphabetic(), "alphabetic")),
            ),
            (
                "alphanumeric",
                0..=0,
                Arc::new(|_, _, s| char_class(s, |c| c.is_ascii_alphanumeric(), "alphanumeric")),
            ),
            ("required", 0..=0, Arc::new(required)),
            ("date", 0..=0, Arc::new(date)),
            ("always-ok", 0..=0, Arc::new(|_, _, _| Ok(()))),
        ];
        for (name, arity, imp) in builtins {
            r.register_arc(Symbol::new(name), arity, imp, false)
                .expect("built-in names are distinct");
        }
        r
    }

    pub fn register<F>(
        &mut self,
        name: impl Into<Symbol>,
        arity: RangeInclusive<usize>,
        imp: F,
    ) -> Result<(), RegisterError>
    where
        F: Fn(&ValidatorContext, &[Datum], &str) -> Result<(), ValidateError> + Send + Sync + 'static,
    {
        self.register_arc(name.into(), arity, Arc::new(imp), false)
    }

    /// Hot-patch registration: replaces an existing validator of the same name.
    pub fn replace<F>(
        &mut self,
        name: impl Into<Symbol>,
        arity: RangeInclusive<usize>,
        imp: F,
    ) -> Result<(), RegisterError>
    where
        F: Fn(&ValidatorContext, &[Datum], &str) -> Result<(), ValidateError> + Send + Sync + 'static,
    {
        self.register_arc(name.into(), arity, Arc::new(imp), true)
    }

    fn register_arc(
        &mut self,
        name: Symbol,
        arity: RangeInclusive<usize>,
        imp: Arc<BaseFn>,
        allow_replace: bool,
    ) -> Result<(), RegisterError> {
        if arity.start() > arity.end() {
            return Err(RegisterError::Arity {
                name,
                start: *arity.start(),
                end: *arity.end(),
            });
        }
        if !allow_replace && self.entries.contains_key(&name) {
            return Err(RegisterError::Duplicate(name));
        }
        self.entries.insert(name, BaseValidator { arity, imp });
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.keys()
    }

    /// Checks that every base name in `expr` is registered with a matching
    /// arity. Run at schema load so defects surface before any data does.
    pub fn check(&self, expr: &ValidatorExpr) -> Result<(), ValidateError> {
        match expr {
            ValidatorExpr::Base { name, args } => {
                let base = self
                    .entries
                    .get(name)
                    .ok_or_else(|| ValidateError::Unregistered(name.clone()))?;
                if !base.arity.contains(&args.len()) {
                    return Err(arity_error(name, &base.arity, args.len()));
                }
                Ok(())
            }
            ValidatorExpr::And(children) | ValidatorExpr::Or { children, .. } => {
                children.iter().try_for_each(|c| self.check(c))
            }
            ValidatorExpr::Not { child, .. } => self.check(child),
        }
    }

    pub fn validate(
        &self,
        expr: &ValidatorExpr,
        ctx: &ValidatorContext,
        input: &str,
    ) -> Result<(), ValidateError> {
        match expr {
            ValidatorExpr::Base { name, args } => {
                let base = self
                    .entries
                    .get(name)
                    .ok_or_else(|| ValidateError::Unregistered(name.clone()))?;
                if !base.arity.contains(&args.len()) {
                    return Err(arity_error(name, &base.arity, args.len()));
                }
                (base.imp)(ctx, args, input)
            }
            ValidatorExpr::And(children) => {
                children.iter().try_for_each(|c| self.validate(c, ctx, input))
            }
            ValidatorExpr::Or { children, message } => {
                for child in children {
                    match self.validate(child, ctx, input) {
                        Ok(()) => return Ok(()),
                        Err(ValidateError::Invalid(_)) => {}
                        Err(schema) => return Err(schema),
                    }
                }
                Err(ValidationError::new(input, message.clone()).into())
            }
            ValidatorExpr::Not { child, message } => match self.validate(child, ctx, input) {
                Ok(()) => Err(ValidationError::new(input, message.clone()).into()),
                Err(ValidateError::Invalid(_)) => Ok(()),
                Err(schema) => Err(schema),
            },
        }
    }
}

fn arity_error(name: &Symbol, arity: &RangeInclusive<usize>, got: usize) -> ValidateError {
    let expected = if arity.start() == arity.end() {
        arity.start().to_string()
    } else {
        format!("{}..={}", arity.start(), arity.end())
    };
    ValidateError::Arity {
        name: name.clone(),
        expected,
        got,
    }
}

fn char_class(input: &str, ok: impl Fn(char) -> bool, what: &str) -> Result<(), ValidateError> {
    // Walk character by character so the message can name the offender.
    for c in input.chars() {
        if !ok(c) {
            return Err(validation_error(
                input,
                "The character '~A' is not ~A",
                &[&c, &what],
            ));
        }
    }
    Ok(())
}

fn int_arg(name: &str, args: &[Datum], i: usize) -> Result<usize, ValidateError> {
    match args.get(i) {
        Some(Datum::Integer(n)) if *n >= 0 => Ok(*n as usize),
        other => Err(ValidateError::BadArgument {
            name: Symbol::new(name),
            reason: format!(
                "argument {} must be a non-negative integer, got {}",
                i + 1,
                other.map(|d| d.to_dump()).unwrap_or_else(|| "nothing".into())
            ),
        }),
    }
}

fn length(_: &ValidatorContext, args: &[Datum], input: &str) -> Result<(), ValidateError> {
    let min = int_arg("length", args, 0)?;
    let max = int_arg("length", args, 1)?;
    let len = input.chars().count();
    if len < min {
        Err(validation_error(input, "Length must be larger than ~D", &[&min]))
    } else if len > max {
        Err(validation_error(input, "Length must be smaller than ~D", &[&max]))
    } else {
        Ok(())
    }
}

fn required(_: &ValidatorContext, _: &[Datum], input: &str) -> Result<(), ValidateError> {
    if input.trim_matches(' ').is_empty() {
        Err(validation_error(input, "A value is required", &[]))
    } else {
        Ok(())
    }
}

/// Checks the slash-optional `YYYYMMDD` form, including month lengths and
/// leap years.
fn date(_: &ValidatorContext, _: &[Datum], input: &str) -> Result<(), ValidateError> {
    let digits: String = input.chars().filter(|&c| c != '/').collect();
    if digits.chars().count() != 8 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(validation_error(
            input,
            "The date '~A' must be eight digits in the form YYYYMMDD",
            &[&input],
        ));
    }
    let year: i32 = digits[0..4].parse().expect("digits");
    let month: u32 = digits[4..6].parse().expect("digits");
    let day: u32 = digits[6..8].parse().expect("digits");
    match SimpleDate::new(year, month, day) {
        Ok(d) if d.is_calendar_valid() => Ok(()),
        _ => Err(validation_error(
            input,
            "The date '~A' is not a valid calendar date",
            &[&input],
        )),
    }
}

/// A validator expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidatorExpr {
    Base { name: Symbol, args: Vec<Datum> },
    /// Fail-fast conjunction: the first failing child decides the error.
    And(Vec<ValidatorExpr>),
    /// Passes if any child passes; otherwise fails with `message`.
    Or {
        children: Vec<ValidatorExpr>,
        message: String,
    },
    /// Passes exactly when `child` fails.
    Not {
        child: Box<ValidatorExpr>,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ExprSyntaxError {
    pub pos: sexpr::Pos,
    pub message: String,
}

impl ValidatorExpr {
    pub fn base(name: &str) -> Self {
        ValidatorExpr::Base {
            name: Symbol::new(name),
            args: Vec::new(),
        }
    }

    pub fn base_with(name: &str, args: Vec<Datum>) -> Self {
        ValidatorExpr::Base {
            name: Symbol::new(name),
            args,
        }
    }

    pub fn and(children: Vec<ValidatorExpr>) -> Self {
        ValidatorExpr::And(children)
    }

    pub fn or(children: Vec<ValidatorExpr>, message: impl Into<String>) -> Self {
        ValidatorExpr::Or {
            children,
            message: message.into(),
        }
    }

    pub fn not(child: ValidatorExpr, message: impl Into<String>) -> Self {
        ValidatorExpr::Not {
            child: Box::new(child),
            message: message.into(),
        }
    }

    /// Parses `vexpr` source text, e.g.
    /// `(and (length 3 7) (or alphabetic numeric "Input must be alphabetic or numeric."))`.
    pub fn parse(src: &str) -> Result<Self, ExprSyntaxError> {
        let form = sexpr::read_one(src).map_err(|e| ExprSyntaxError {
            pos: e.pos,
            message: e.message,
        })?;
        Self::from_sexp(&form)
    }

    pub fn from_sexp(form: &Sexp) -> Result<Self, ExprSyntaxError> {
        let fail = |at: &Sexp, message: String| ExprSyntaxError {
            pos: at.pos,
            message,
        };
        match &form.kind {
            SexpKind::Symbol(name) => Ok(ValidatorExpr::Base {
                name: name.clone(),
                args: Vec::new(),
            }),
            SexpKind::List(items) => {
                let head = items
                    .first()
                    .and_then(|h| match &h.kind {
                        SexpKind::Symbol(s) => Some(s),
                        _ => None,
                    })
                    .ok_or_else(|| fail(form, "validator form must start with a name".into()))?;
                let rest = &items[1..];
                match head.as_str() {
                    "and" | "validators" => {
                        if rest.is_empty() {
                            return Err(fail(form, format!("({head}) needs at least one validator")));
                        }
                        rest.iter()
                            .map(Self::from_sexp)
                            .collect::<Result<_, _>>()
                            .map(ValidatorExpr::And)
                    }
                    "or" => {
                        let (message, children) = match rest.split_last() {
                            Some((last, children)) => match last.as_str() {
                                Some(m) => (m, children),
                                None => {
                                    return Err(fail(
                                        form,
                                        "(or ...) form requires a trailing message string".into(),
                                    ))
                                }
                            },
                            None => {
                                return Err(fail(
                                    form,
                                    "(or ...) form requires a trailing message string".into(),
                                ))
                            }
                        };
                        if children.is_empty() {
                            return Err(fail(form, "(or ...) needs at least one validator".into()));
                        }
                        if message.is_empty() {
                            return Err(fail(form, "(or ...) message must not be empty".into()));
                        }
                        Ok(ValidatorExpr::Or {
                            children: children
                                .iter()
                                .map(Self::from_sexp)
                                .collect::<Result<_, _>>()?,
                            message: message.to_string(),
                        })
                    }
                    "not" => match rest {
                        [child, msg] => {
                            let message = msg.as_str().filter(|m| !m.is_empty()).ok_or_else(|| {
                                fail(form, "(not ...) form requires a non-empty message string".into())
                            })?;
                            Ok(ValidatorExpr::Not {
                                child: Box::new(Self::from_sexp(child)?),
                                message: message.to_string(),
                            })
                        }
                        _ => Err(fail(
                            form,
                            "(not ...) takes one validator and a message string".into(),
                        )),
                    },
                    _ => {
                        let args = rest
                            .iter()
                            .map(|a| Datum::from_sexp(a).map_err(|e| fail(a, e.reason)))
                            .collect::<Result<_, _>>()?;
                        Ok(ValidatorExpr::Base {
                            name: head.clone(),
                            args,
                        })
                    }
                }
            }
            _ => Err(fail(form, format!("{} is not a validator", form.describe()))),
        }
    }

    pub fn base_names(&self) -> Vec<&Symbol> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a Symbol>) {
        match self {
            ValidatorExpr::Base { name, .. } => out.push(name),
            ValidatorExpr::And(cs) | ValidatorExpr::Or { children: cs, .. } => {
                cs.iter().for_each(|c| c.collect_names(out))
            }
            ValidatorExpr::Not { child, .. } => child.collect_names(out),
        }
    }

    /// The tightest `length` bounds imposed along the top-level conjunction
    /// chain, if any.
    pub fn length_bounds(&self) -> Option<(usize, usize)> {
        match self {
            ValidatorExpr::Base { name, args } if name.as_str() == "length" => {
                match (args.first(), args.get(1)) {
                    (Some(Datum::Integer(lo)), Some(Datum::Integer(hi))) if *lo >= 0 && lo <= hi => {
                        Some((*lo as usize, *hi as usize))
                    }
                    _ => None,
                }
            }
            ValidatorExpr::And(children) => children
                .iter()
                .filter_map(ValidatorExpr::length_bounds)
                .reduce(|(a, b), (c, d)| (a.max(c), b.min(d))),
            _ => None,
        }
    }
}

impl fmt::Display for ValidatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidatorExpr::Base { name, args } if args.is_empty() => write!(f, "{name}"),
            ValidatorExpr::Base { name, args } => {
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            ValidatorExpr::And(children) => {
                f.write_str("(and")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
            ValidatorExpr::Or { children, message } => {
                f.write_str("(or")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                let mut m = String::new();
                sexpr::write_string(&mut m, message);
                write!(f, " {m})")
            }
            ValidatorExpr::Not { child, message } => {
                let mut m = String::new();
                sexpr::write_string(&mut m, message);
                write!(f, "(not {child} {m})")
            }
        }
    }
}
