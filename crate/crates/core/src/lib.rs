//! Jurisdiction-dependent record fields.
//!
//! A field is addressed by `(name, index, locale, medium)`. Locales form a
//! tree rooted at `common`; each property of a field is looked up by walking
//! from the requested locale towards the root. Values are [`Datum`]s kept in
//! a small file-backed [`Database`].

pub mod datum;
pub mod fixtures;
pub mod locales;
pub mod registry;
pub mod sexpr;
pub mod store;
pub mod symbol;
pub mod textio;
pub mod validators;

pub use datum::{Datum, PersonName, SimpleDate};
pub use locales::LocaleTree;
pub use registry::{
    Formatted, LoadReport, Schema, SchemaError, WidgetCoord, WidgetError, WidgetRegistry, WidgetSpec,
};
pub use store::{Database, StoreError};
pub use symbol::Symbol;
pub use validators::{ValidationError, ValidatorExpr, ValidatorRegistry};
