//! Bundled schema sources.

use crate::registry::{Schema, SchemaError};

pub const COMMON: &str = include_str!("../fixtures/common.scm");
pub const ARKANSAS: &str = include_str!("../fixtures/arkansas.scm");
pub const WISCONSIN: &str = include_str!("../fixtures/wisconsin.scm");

/// `(file name, source)` for every bundled file, in load order.
pub const ALL: [(&str, &str); 3] = [
    ("common.scm", COMMON),
    ("arkansas.scm", ARKANSAS),
    ("wisconsin.scm", WISCONSIN),
];

/// A schema with every bundled file loaded.
pub fn schema() -> Result<Schema, SchemaError> {
    let mut schema = Schema::default();
    schema.load_sources(&ALL)?;
    Ok(schema)
}
