use std::collections::BTreeMap;
use std::fmt;

use crate::symbol::Symbol;
use crate::validators::ValidatorExpr;

/// A point in widget space: which field, which occurrence, for which
/// jurisdiction, rendered for which medium.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WidgetCoord {
    pub name: Symbol,
    /// 1-based occurrence index.
    pub index: usize,
    pub locale: Symbol,
    pub medium: Symbol,
}

impl WidgetCoord {
    pub fn new(
        name: impl Into<Symbol>,
        index: usize,
        locale: impl Into<Symbol>,
        medium: impl Into<Symbol>,
    ) -> Self {
        WidgetCoord {
            name: name.into(),
            index,
            locale: locale.into(),
            medium: medium.into(),
        }
    }
}

impl fmt::Display for WidgetCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "widget `{}` index {}, locale `{}`, medium `{}`",
            self.name, self.index, self.locale, self.medium
        )
    }
}

/// How text arriving on one medium is checked and turned into a datum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputEntry {
    pub parser: Symbol,
    pub validator: ValidatorExpr,
}

/// Everything declared for one `(name, locale)` pair. Unset properties are
/// inherited from ancestor locales at lookup time, one property at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WidgetSpec {
    pub name: Symbol,
    pub locale: Symbol,
    /// Maximum occurrence index; 1 when unset.
    pub max_index: Option<usize>,
    /// Table binding; synthesizes whichever accessor is not given explicitly.
    pub table: Option<Symbol>,
    pub getter: Option<Symbol>,
    pub setter: Option<Symbol>,
    /// Keyed by medium; the `default` medium is the fallback.
    pub inputs: BTreeMap<Symbol, InputEntry>,
    pub outputs: BTreeMap<Symbol, Symbol>,
    pub headings: BTreeMap<Symbol, String>,
    pub doc: Option<String>,
    pub datatype: Option<Symbol>,
    pub generator: Option<Symbol>,
}

impl WidgetSpec {
    pub fn new(name: impl Into<Symbol>, locale: impl Into<Symbol>) -> Self {
        WidgetSpec {
            name: name.into(),
            locale: locale.into(),
            max_index: None,
            table: None,
            getter: None,
            setter: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            headings: BTreeMap::new(),
            doc: None,
            datatype: None,
            generator: None,
        }
    }

    pub fn declares_storage(&self) -> bool {
        self.table.is_some() || self.getter.is_some() || self.setter.is_some()
    }

    pub fn with_table(mut self, table: &str) -> Self {
        self.table = Some(Symbol::new(table));
        self
    }

    pub fn with_index(mut self, max_index: usize) -> Self {
        self.max_index = Some(max_index);
        self
    }

    pub fn with_input(mut self, medium: &str, parser: &str, validator: ValidatorExpr) -> Self {
        self.inputs.insert(
            Symbol::new(medium),
            InputEntry {
                parser: Symbol::new(parser),
                validator,
            },
        );
        self
    }

    pub fn with_output(mut self, medium: &str, formatter: &str) -> Self {
        self.outputs.insert(Symbol::new(medium), Symbol::new(formatter));
        self
    }

    pub fn with_generator(mut self, generator: &str) -> Self {
        self.generator = Some(Symbol::new(generator));
        self
    }
}

/// Where a widget's value is read from or written to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Accessor {
    Table(Symbol),
    Named(Symbol),
}

/// Resolved storage for a widget at some locale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Storage {
    pub getter: Option<Accessor>,
    pub setter: Option<Accessor>,
    pub max_index: usize,
}

impl Storage {
    pub(crate) fn from_spec(spec: &WidgetSpec) -> Option<Storage> {
        if !spec.declares_storage() {
            return None;
        }
        let table = spec.table.clone().map(Accessor::Table);
        Some(Storage {
            getter: spec.getter.clone().map(Accessor::Named).or_else(|| table.clone()),
            setter: spec.setter.clone().map(Accessor::Named).or(table),
            max_index: spec.max_index.unwrap_or(1),
        })
    }
}
