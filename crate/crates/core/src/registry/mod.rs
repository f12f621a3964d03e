//! The widget system.
//!
//! A [`Schema`] holds the locale tree and every registered [`WidgetSpec`].
//! Properties are resolved at lookup time by walking from the requested
//! locale towards the root. At each locale the exact medium is tried first,
//! then that locale's `default` entry, and only then the parent.

mod library;
mod loader;
mod spec;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::datum::Datum;
use crate::locales::{LocaleError, LocaleTree, ResolveError};
use crate::sexpr::Pos;
use crate::store::{Database, StoreError};
use crate::symbol::Symbol;
use crate::textio::{FormatError, ParseError};
use crate::validators::{ValidateError, ValidationError, ValidatorContext, ValidatorExpr};

pub use library::{table_get, table_put, GenHints, GeneratorFn, GetterFn, Library, SetterFn, Slot, NAME_PARTS};
pub use loader::LoadReport;
pub use spec::{Accessor, InputEntry, Storage, WidgetCoord, WidgetSpec};

/// How many candidates a generator may produce before giving up.
pub const GENERATOR_ATTEMPTS: usize = 1000;

/// What a resolution walk was looking for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Formatter,
    Parser,
    Storage,
    Generator,
}

/// A walk that reached the root without a hit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ResolutionFailure {
    pub property: Property,
    pub name: Symbol,
    pub locale: Symbol,
    pub medium: Option<Symbol>,
}

impl ResolutionFailure {
    pub fn coordinates(&self) -> String {
        match &self.medium {
            Some(m) => format!("widget `{}`, locale `{}`, medium `{}`", self.name, self.locale, m),
            None => format!("widget `{}`, locale `{}`", self.name, self.locale),
        }
    }
}

impl fmt::Display for ResolutionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.property {
            Property::Formatter | Property::Parser => "No formatter/parser specified.",
            Property::Storage => "No getter/setter specified.",
            Property::Generator => "No generator specified.",
        })
    }
}

#[derive(Debug, Error)]
pub enum WidgetError {
    /// Bad input data. The only variant a data-entry user should ever see.
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Unresolved(#[from] ResolutionFailure),
    #[error("unknown locale `{0}`")]
    UnknownLocale(Symbol),
    #[error("index {index} is outside 1..={max} for widget `{name}`")]
    IndexOutOfRange { name: Symbol, index: usize, max: usize },
    /// A validator expression that cannot run, e.g. an unregistered name.
    #[error("validator defect: {0}")]
    Validator(ValidateError),
    /// The parser rejected input the validator accepted.
    #[error("parser defect: {0}")]
    Parse(#[from] ParseError),
    #[error("formatter mismatch: {0}")]
    Format(#[from] FormatError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("widget `{name}` at `{locale}` has no {which}")]
    NoAccessor {
        name: Symbol,
        locale: Symbol,
        which: &'static str,
    },
    #[error("{kind} `{name}` is not registered")]
    UnknownFunction { kind: &'static str, name: Symbol },
    #[error("generator `{generator}` produced no valid value for `{name}` in {attempts} attempts")]
    GeneratorExhausted {
        generator: Symbol,
        name: Symbol,
        attempts: usize,
    },
}

impl From<ValidateError> for WidgetError {
    fn from(e: ValidateError) -> Self {
        match e {
            ValidateError::Invalid(v) => WidgetError::Validation(v),
            other => WidgetError::Validator(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaErrorKind {
    Syntax(String),
    Locale(LocaleError),
    UnresolvedReference { kind: &'static str, name: Symbol },
    Validator(ValidateError),
    InvalidIndex(i64),
    DuplicateEntry { direction: &'static str, medium: Symbol },
}

impl fmt::Display for SchemaErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            SchemaErrorKind::Locale(e) => write!(f, "{e}"),
            SchemaErrorKind::UnresolvedReference { kind, name } => {
                write!(f, "unresolved reference: {kind} `{name}` is not registered")
            }
            SchemaErrorKind::Validator(e) => write!(f, "unresolved reference: {e}"),
            SchemaErrorKind::InvalidIndex(n) => write!(f, "invalid :index {n}; must be at least 1"),
            SchemaErrorKind::DuplicateEntry { direction, medium } => {
                write!(f, "duplicate {direction} entry for medium `{medium}`")
            }
        }
    }
}

/// A schema defect, optionally located in a source file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SchemaError {
    pub origin: Option<String>,
    pub pos: Option<Pos>,
    pub kind: SchemaErrorKind,
}

impl SchemaError {
    pub fn new(kind: SchemaErrorKind) -> Self {
        SchemaError {
            origin: None,
            pos: None,
            kind,
        }
    }

    pub fn at(mut self, pos: Pos) -> Self {
        self.pos.get_or_insert(pos);
        self
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(origin) = &self.origin {
            write!(f, "{origin}:")?;
        }
        if let Some(pos) = &self.pos {
            write!(f, "{}:{}:", pos.line, pos.column)?;
        }
        if self.origin.is_some() || self.pos.is_some() {
            f.write_str(" ")?;
        }
        write!(f, "{}", self.kind)
    }
}

impl From<LocaleError> for SchemaError {
    fn from(e: LocaleError) -> Self {
        SchemaError::new(SchemaErrorKind::Locale(e))
    }
}

/// A resolved property and where the walk found it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution<T> {
    pub value: T,
    pub locale: Symbol,
    /// True when the hit was a `default` entry rather than the exact medium.
    pub via_default: bool,
}

/// The result of [`Schema::get_and_format`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formatted {
    Text(String),
    Uninitialized,
}

impl Formatted {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Formatted::Text(s) => Some(s),
            Formatted::Uninitialized => None,
        }
    }
}

impl fmt::Display for Formatted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formatted::Text(s) => f.write_str(s),
            Formatted::Uninitialized => f.write_str("#uninit"),
        }
    }
}

/// An immutable-by-convention set of locales and widget specs bound to a
/// function [`Library`]. Mutate a clone and publish it through
/// [`WidgetRegistry`] to hot-patch a running system.
#[derive(Clone, Debug)]
pub struct Schema {
    library: Arc<Library>,
    locales: LocaleTree,
    /// name -> locale -> spec
    widgets: BTreeMap<Symbol, BTreeMap<Symbol, WidgetSpec>>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema::new(Arc::new(Library::standard()))
    }
}

impl Schema {
    pub fn new(library: Arc<Library>) -> Self {
        Schema {
            library,
            locales: LocaleTree::new(),
            widgets: BTreeMap::new(),
        }
    }

    pub fn library(&self) -> &Library {
        &self.library
    }

    pub fn locales(&self) -> &LocaleTree {
        &self.locales
    }

    pub fn add_locale(&mut self, child: Symbol, parent: Option<Symbol>) -> Result<(), LocaleError> {
        self.locales.add_locale(child, parent)
    }

    pub fn spec(&self, name: &str, locale: &str) -> Option<&WidgetSpec> {
        self.widgets.get(name)?.get(locale)
    }

    pub fn specs(&self) -> impl Iterator<Item = &WidgetSpec> {
        self.widgets.values().flat_map(BTreeMap::values)
    }

    pub fn widget_names(&self) -> impl Iterator<Item = &Symbol> {
        self.widgets.keys()
    }

    /// Registers `spec` under its `(name, locale)`, replacing any previous
    /// spec for that pair. Returns true when a spec was replaced.
    pub fn define_widget(&mut self, spec: WidgetSpec) -> Result<bool, SchemaError> {
        if !self.locales.contains(&spec.locale) {
            return Err(LocaleError::UnknownLocale(spec.locale.clone()).into());
        }
        if let Some(n) = spec.max_index {
            if n < 1 {
                return Err(SchemaError::new(SchemaErrorKind::InvalidIndex(n as i64)));
            }
        }
        let lib = &self.library;
        let unresolved = |kind: &'static str, name: &Symbol| {
            SchemaError::new(SchemaErrorKind::UnresolvedReference {
                kind,
                name: name.clone(),
            })
        };
        for entry in spec.inputs.values() {
            if !lib.parsers.contains(&entry.parser) {
                return Err(unresolved("parser", &entry.parser));
            }
            lib.validators
                .check(&entry.validator)
                .map_err(|e| SchemaError::new(SchemaErrorKind::Validator(e)))?;
        }
        for formatter in spec.outputs.values() {
            if !lib.formatters.contains(formatter) {
                return Err(unresolved("formatter", formatter));
            }
        }
        if let Some(g) = &spec.generator {
            if !lib.generators.contains(g) {
                return Err(unresolved("generator", g));
            }
        }
        if let Some(g) = &spec.getter {
            if !lib.getters.contains(g) {
                return Err(unresolved("getter", g));
            }
        }
        if let Some(s) = &spec.setter {
            if !lib.setters.contains(s) {
                return Err(unresolved("setter", s));
            }
        }
        let replaced = self
            .widgets
            .entry(spec.name.clone())
            .or_default()
            .insert(spec.locale.clone(), spec)
            .is_some();
        Ok(replaced)
    }

    /// Walks the ancestry of `locale`, probing the definition of `name` at each
    /// step.
    fn walk<T>(
        &self,
        property: Property,
        name: &Symbol,
        locale: &Symbol,
        medium: Option<&Symbol>,
        mut probe: impl FnMut(&WidgetSpec) -> Option<(T, bool)>,
    ) -> Result<Resolution<T>, WidgetError> {
        let by_locale = self.widgets.get(name);
        let found = self.locales.resolve(locale, |l| by_locale?.get(l).and_then(&mut probe));
        match found {
            Ok(f) => Ok(Resolution {
                value: f.value.0,
                via_default: f.value.1,
                locale: f.locale,
            }),
            Err(ResolveError::UnknownLocale(l)) => Err(WidgetError::UnknownLocale(l)),
            Err(ResolveError::Exhausted) => Err(ResolutionFailure {
                property,
                name: name.clone(),
                locale: locale.clone(),
                medium: medium.cloned(),
            }
            .into()),
        }
    }

    fn medium_or_default<'a, V>(map: &'a BTreeMap<Symbol, V>, medium: &Symbol) -> Option<(&'a V, bool)> {
        map.get(medium)
            .map(|v| (v, false))
            .or_else(|| map.get("default").map(|v| (v, true)))
    }

    pub fn resolve_formatter(
        &self,
        name: &Symbol,
        locale: &Symbol,
        medium: &Symbol,
    ) -> Result<Resolution<Symbol>, WidgetError> {
        self.walk(Property::Formatter, name, locale, Some(medium), |spec| {
            Self::medium_or_default(&spec.outputs, medium).map(|(f, d)| (f.clone(), d))
        })
    }

    pub fn resolve_parser(
        &self,
        name: &Symbol,
        locale: &Symbol,
        medium: &Symbol,
    ) -> Result<Resolution<InputEntry>, WidgetError> {
        self.walk(Property::Parser, name, locale, Some(medium), |spec| {
            Self::medium_or_default(&spec.inputs, medium).map(|(e, d)| (e.clone(), d))
        })
    }

    pub fn resolve_storage(&self, name: &Symbol, locale: &Symbol) -> Result<Resolution<Storage>, WidgetError> {
        self.walk(Property::Storage, name, locale, None, |spec| {
            Storage::from_spec(spec).map(|s| (s, false))
        })
    }

    pub fn resolve_generator(&self, name: &Symbol, locale: &Symbol) -> Result<Resolution<Symbol>, WidgetError> {
        self.walk(Property::Generator, name, locale, None, |spec| {
            spec.generator.clone().map(|g| (g, false))
        })
    }

    /// The heading for presenting `name` on `medium`, or `None` when no
    /// ancestor declares one.
    pub fn resolve_heading(&self, name: &Symbol, locale: &Symbol, medium: &Symbol) -> Option<String> {
        self.walk(Property::Formatter, name, locale, Some(medium), |spec| {
            Self::medium_or_default(&spec.headings, medium).map(|(h, d)| (h.clone(), d))
        })
        .ok()
        .map(|r| r.value)
    }

    pub fn resolve_doc(&self, name: &Symbol, locale: &Symbol) -> Option<String> {
        self.walk(Property::Formatter, name, locale, None, |spec| {
            spec.doc.clone().map(|d| (d, false))
        })
        .ok()
        .map(|r| r.value)
    }

    fn storage_for(&self, coord: &WidgetCoord) -> Result<Storage, WidgetError> {
        let storage = self.resolve_storage(&coord.name, &coord.locale)?.value;
        if coord.index == 0 || coord.index > storage.max_index {
            return Err(WidgetError::IndexOutOfRange {
                name: coord.name.clone(),
                index: coord.index,
                max: storage.max_index,
            });
        }
        Ok(storage)
    }

    fn read(&self, db: &Database, coord: &WidgetCoord, storage: &Storage) -> Result<Datum, WidgetError> {
        let slot = Slot {
            name: &coord.name,
            locale: &coord.locale,
            index: coord.index,
            max_index: storage.max_index,
        };
        match &storage.getter {
            Some(Accessor::Table(t)) => Ok(table_get(db, t, &slot)?),
            Some(Accessor::Named(g)) => {
                let getter = self.library.getters.get(g).ok_or_else(|| WidgetError::UnknownFunction {
                    kind: "getter",
                    name: g.clone(),
                })?;
                Ok(getter(db, &slot)?)
            }
            None => Err(WidgetError::NoAccessor {
                name: coord.name.clone(),
                locale: coord.locale.clone(),
                which: "getter",
            }),
        }
    }

    fn write(&self, db: &Database, coord: &WidgetCoord, storage: &Storage, value: Datum) -> Result<(), WidgetError> {
        let slot = Slot {
            name: &coord.name,
            locale: &coord.locale,
            index: coord.index,
            max_index: storage.max_index,
        };
        match &storage.setter {
            Some(Accessor::Table(t)) => Ok(table_put(db, t, &slot, value)?),
            Some(Accessor::Named(s)) => {
                let setter = self.library.setters.get(s).ok_or_else(|| WidgetError::UnknownFunction {
                    kind: "setter",
                    name: s.clone(),
                })?;
                Ok(setter(db, &slot, value)?)
            }
            None => Err(WidgetError::NoAccessor {
                name: coord.name.clone(),
                locale: coord.locale.clone(),
                which: "setter",
            }),
        }
    }

    /// Reads the widget's datum (raw, unformatted).
    pub fn get_datum(&self, db: &Database, coord: &WidgetCoord) -> Result<Datum, WidgetError> {
        let storage = self.storage_for(coord)?;
        self.read(db, coord, &storage)
    }

    /// Getter fused with the resolved formatter. An uninitialized datum is
    /// returned as [`Formatted::Uninitialized`] and never reaches the
    /// formatter.
    pub fn get_and_format(&self, db: &Database, coord: &WidgetCoord) -> Result<Formatted, WidgetError> {
        let storage = self.storage_for(coord)?;
        let formatter = self.resolve_formatter(&coord.name, &coord.locale, &coord.medium)?.value;
        let datum = self.read(db, coord, &storage)?;
        if datum.is_uninitialized() {
            return Ok(Formatted::Uninitialized);
        }
        let f = self
            .library
            .formatters
            .get(&formatter)
            .ok_or_else(|| WidgetError::UnknownFunction {
                kind: "formatter",
                name: formatter.clone(),
            })?;
        Ok(Formatted::Text(f(&datum)?))
    }

    /// Runs the validator resolved for `coord` without touching storage.
    pub fn validate(&self, coord: &WidgetCoord, input: &str) -> Result<(), WidgetError> {
        let entry = self.resolve_parser(&coord.name, &coord.locale, &coord.medium)?.value;
        self.run_validator(&entry.validator, coord, input)
    }

    fn run_validator(&self, expr: &ValidatorExpr, coord: &WidgetCoord, input: &str) -> Result<(), WidgetError> {
        let ctx = ValidatorContext {
            name: coord.name.clone(),
            locale: coord.locale.clone(),
            medium: coord.medium.clone(),
        };
        Ok(self.library.validators.validate(expr, &ctx, input)?)
    }

    /// Validator, parser and setter fused. Storage is untouched unless every
    /// step succeeds. Returns the stored datum.
    pub fn parse_and_set(&self, db: &Database, coord: &WidgetCoord, input: &str) -> Result<Datum, WidgetError> {
        let storage = self.storage_for(coord)?;
        let entry = self.resolve_parser(&coord.name, &coord.locale, &coord.medium)?.value;
        if storage.setter.is_none() {
            return Err(WidgetError::NoAccessor {
                name: coord.name.clone(),
                locale: coord.locale.clone(),
                which: "setter",
            });
        }
        self.run_validator(&entry.validator, coord, input)?;
        let parser = self
            .library
            .parsers
            .get(&entry.parser)
            .ok_or_else(|| WidgetError::UnknownFunction {
                kind: "parser",
                name: entry.parser.clone(),
            })?;
        let datum = parser(input)?;
        self.write(db, coord, &storage, datum.clone())?;
        Ok(datum)
    }

    /// Produces input text for `(name, locale, medium)` that passes the
    /// resolved validator. Deterministic in `seed`.
    pub fn generate_random(
        &self,
        name: &Symbol,
        locale: &Symbol,
        medium: &Symbol,
        seed: u64,
    ) -> Result<String, WidgetError> {
        let generator = self.resolve_generator(name, locale)?.value;
        let entry = self.resolve_parser(name, locale, medium)?.value;
        let gen = self
            .library
            .generators
            .get(&generator)
            .ok_or_else(|| WidgetError::UnknownFunction {
                kind: "generator",
                name: generator.clone(),
            })?;
        let hints = GenHints {
            length: entry.validator.length_bounds(),
        };
        let coord = WidgetCoord {
            name: name.clone(),
            index: 1,
            locale: locale.clone(),
            medium: medium.clone(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..GENERATOR_ATTEMPTS {
            let candidate = gen(&mut rng, &hints);
            match self.run_validator(&entry.validator, &coord, &candidate) {
                Ok(()) => return Ok(candidate),
                Err(WidgetError::Validation(_)) => continue,
                Err(other) => return Err(other),
            }
        }
        Err(WidgetError::GeneratorExhausted {
            generator,
            name: name.clone(),
            attempts: GENERATOR_ATTEMPTS,
        })
    }

    /// Widgets declared somewhere whose storage cannot be resolved from the
    /// locale they are declared at.
    pub fn lint(&self) -> Vec<String> {
        let mut out = Vec::new();
        for spec in self.specs() {
            if let Err(WidgetError::Unresolved(f)) = self.resolve_storage(&spec.name, &spec.locale) {
                out.push(format!(
                    "widget `{}` at `{}` has no storage: {} ({})",
                    spec.name,
                    spec.locale,
                    f,
                    f.coordinates()
                ));
            }
        }
        out
    }
}

/// A shared, hot-patchable [`Schema`].
///
/// Readers take a cheap snapshot and keep using it for the whole operation.
/// Updates are applied to a private copy under an exclusive lock and
/// published in one step, so a reader sees either the old schema or the new
/// one, never a mix.
#[derive(Debug, Default)]
pub struct WidgetRegistry {
    current: RwLock<Arc<Schema>>,
}

impl WidgetRegistry {
    pub fn new(schema: Schema) -> Self {
        WidgetRegistry {
            current: RwLock::new(Arc::new(schema)),
        }
    }

    pub fn snapshot(&self) -> Arc<Schema> {
        self.current.read().expect("registry lock").clone()
    }

    /// Applies `f` to a copy of the current schema and publishes the copy
    /// only if `f` succeeds.
    pub fn update<R, E>(&self, f: impl FnOnce(&mut Schema) -> Result<R, E>) -> Result<R, E> {
        let mut guard = self.current.write().expect("registry lock");
        let mut staged = Schema::clone(&guard);
        let out = f(&mut staged)?;
        *guard = Arc::new(staged);
        Ok(out)
    }

    pub fn load_schema(&self, source: &str, origin: &str) -> Result<LoadReport, SchemaError> {
        self.update(|s| s.load_source(source, origin))
    }

    pub fn define_widget(&self, spec: WidgetSpec) -> Result<bool, SchemaError> {
        self.update(|s| s.define_widget(spec))
    }
}

#[cfg(test)]
mod tests;
