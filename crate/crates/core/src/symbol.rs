use std::borrow::Borrow;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

/// An interned-by-value, case-insensitive identifier.
///
/// Symbols are normalized to lower case on construction and a single leading
/// `:` is dropped, so `:COMMON`, `Common` and `common` are the same symbol.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(raw: &str) -> Self {
        let trimmed = raw.strip_prefix(':').unwrap_or(raw);
        Symbol(Arc::from(trimmed.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The reserved medium name that matches any medium.
    pub fn default_medium() -> Self {
        Symbol::new("default")
    }

    pub fn is_default(&self) -> bool {
        &*self.0 == "default"
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol::new(&s)
    }
}

impl Deref for Symbol {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_case_and_keyword_colon() {
        assert_eq!(Symbol::new(":COMMON"), Symbol::new("common"));
        assert_eq!(Symbol::new("Park-County-CO").as_str(), "park-county-co");
        assert!(Symbol::new(":DEFAULT").is_default());
    }
}
