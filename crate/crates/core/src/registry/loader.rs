//! The schema language.
//!
//! ```text
//! file        := (locale-form | widget-form)*
//! locale-form := (locale sym :parent sym|none)
//! widget-form := (widget name locale clause*)
//! clause      := :index int | :table sym | :getter sym | :setter sym
//!              | :doc string | :type sym | :generator sym
//!              | :heading (medium string ...)
//!              | :input ((medium parser vexpr) ...)
//!              | :output ((medium formatter) ...)
//! ```
//!
//! Symbols are case-insensitive and may carry a leading colon or quote.

use std::collections::BTreeMap;
use std::fmt;

use crate::sexpr::{self, Sexp};
use crate::symbol::Symbol;
use crate::validators::ValidatorExpr;

use super::{InputEntry, Schema, SchemaError, SchemaErrorKind, WidgetSpec};

/// Summary of a successful load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub locales: usize,
    pub widgets: usize,
    pub warnings: Vec<String>,
}

impl LoadReport {
    fn absorb(&mut self, other: LoadReport) {
        self.locales += other.locales;
        self.widgets += other.widgets;
        self.warnings.extend(other.warnings);
    }
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "locales: {}, widgets: {}", self.locales, self.widgets)?;
        for w in &self.warnings {
            write!(f, "\nwarning: {w}")?;
        }
        Ok(())
    }
}

fn syntax(at: &Sexp, message: impl Into<String>) -> SchemaError {
    SchemaError::new(SchemaErrorKind::Syntax(message.into())).at(at.pos)
}

fn expect_name<'a>(at: &'a Sexp, what: &str) -> Result<&'a Symbol, SchemaError> {
    at.as_name()
        .ok_or_else(|| syntax(at, format!("expected {what}, found {}", at.describe())))
}

impl Schema {
    /// Applies every form in `source`. On any error nothing is applied.
    pub fn load_source(&mut self, source: &str, origin: &str) -> Result<LoadReport, SchemaError> {
        self.load_sources(&[(origin, source)])
    }

    /// Applies several sources as one unit, in order. On any error nothing
    /// from any of them is applied.
    pub fn load_sources(&mut self, sources: &[(&str, &str)]) -> Result<LoadReport, SchemaError> {
        let mut staged = self.clone();
        let mut report = LoadReport::default();
        for (origin, source) in sources {
            let r = staged.apply_source(source).map_err(|mut e| {
                e.origin = Some(origin.to_string());
                e
            })?;
            report.absorb(r);
        }
        *self = staged;
        Ok(report)
    }

    fn apply_source(&mut self, source: &str) -> Result<LoadReport, SchemaError> {
        let forms = sexpr::read_all(source).map_err(|e| {
            SchemaError::new(SchemaErrorKind::Syntax(e.message)).at(e.pos)
        })?;
        let mut report = LoadReport::default();
        for form in &forms {
            let items = form
                .as_list()
                .ok_or_else(|| syntax(form, format!("expected a top-level form, found {}", form.describe())))?;
            let head = items
                .first()
                .and_then(Sexp::as_name)
                .ok_or_else(|| syntax(form, "top-level form must start with `locale` or `widget`"))?;
            match head.as_str() {
                "locale" => {
                    self.apply_locale(form, items)?;
                    report.locales += 1;
                }
                "widget" | "defwidget" => {
                    let spec = parse_widget(form, items)?;
                    let (name, locale) = (spec.name.clone(), spec.locale.clone());
                    if self.define_widget(spec).map_err(|e| e.at(form.pos))? {
                        report
                            .warnings
                            .push(format!("widget `{name}` at `{locale}` replaced an earlier definition"));
                    }
                    report.widgets += 1;
                }
                other => return Err(syntax(&items[0], format!("unknown top-level form `{other}`"))),
            }
        }
        Ok(report)
    }

    fn apply_locale(&mut self, form: &Sexp, items: &[Sexp]) -> Result<(), SchemaError> {
        let [_, child, key, parent] = items else {
            return Err(syntax(form, "expected (locale <name> :parent <parent|none>)"));
        };
        if key.as_keyword().map(Symbol::as_str) != Some("parent") {
            return Err(syntax(key, "expected :parent"));
        }
        let child = expect_name(child, "a locale name")?.clone();
        let parent = match expect_name(parent, "a parent locale or `none`")? {
            p if p.as_str() == "none" || p.as_str() == "nil" => None,
            p => Some(p.clone()),
        };
        self.locales
            .add_locale(child, parent)
            .map_err(|e| SchemaError::from(e).at(form.pos))
    }

    /// Renders the schema back into loadable source: locales depth-first,
    /// then widgets sorted by name and locale.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for (_, locale) in self.locales.depth_first() {
            let parent = self.locales.parent(locale).map(Symbol::as_str).unwrap_or("none");
            out.push_str(&format!("(locale {locale} :parent {parent})\n"));
        }
        for spec in self.specs() {
            out.push('\n');
            write_widget(&mut out, spec);
        }
        out
    }
}

fn quoted(s: &str) -> String {
    let mut out = String::new();
    sexpr::write_string(&mut out, s);
    out
}

fn write_widget(out: &mut String, spec: &WidgetSpec) {
    out.push_str(&format!("(widget {} {}", spec.name, spec.locale));
    if let Some(n) = spec.max_index {
        out.push_str(&format!("\n  :index {n}"));
    }
    for (key, value) in [
        ("table", &spec.table),
        ("getter", &spec.getter),
        ("setter", &spec.setter),
        ("type", &spec.datatype),
        ("generator", &spec.generator),
    ] {
        if let Some(v) = value {
            out.push_str(&format!("\n  :{key} {v}"));
        }
    }
    if let Some(doc) = &spec.doc {
        out.push_str(&format!("\n  :doc {}", quoted(doc)));
    }
    if !spec.headings.is_empty() {
        let parts: Vec<String> = spec
            .headings
            .iter()
            .map(|(m, h)| format!("{m} {}", quoted(h)))
            .collect();
        out.push_str(&format!("\n  :heading ({})", parts.join(" ")));
    }
    if !spec.inputs.is_empty() {
        let parts: Vec<String> = spec
            .inputs
            .iter()
            .map(|(m, e)| format!("({m} {} {})", e.parser, e.validator))
            .collect();
        out.push_str(&format!("\n  :input ({})", parts.join("\n          ")));
    }
    if !spec.outputs.is_empty() {
        let parts: Vec<String> = spec.outputs.iter().map(|(m, f)| format!("({m} {f})")).collect();
        out.push_str(&format!("\n  :output ({})", parts.join("\n           ")));
    }
    out.push_str(")\n");
}

fn parse_widget(form: &Sexp, items: &[Sexp]) -> Result<WidgetSpec, SchemaError> {
    if items.len() < 3 {
        return Err(syntax(form, "expected (widget <name> <locale> clause*)"));
    }
    let name = expect_name(&items[1], "a widget name")?;
    let locale = expect_name(&items[2], "a locale name")?;
    let mut spec = WidgetSpec::new(name.clone(), locale.clone());
    let mut seen: Vec<&Symbol> = Vec::new();
    let mut rest = items[3..].iter();
    while let Some(key_form) = rest.next() {
        let key = key_form
            .as_keyword()
            .ok_or_else(|| syntax(key_form, format!("expected a clause keyword, found {}", key_form.describe())))?;
        let value = rest
            .next()
            .ok_or_else(|| syntax(key_form, format!("clause :{key} has no value")))?;
        if seen.contains(&key) {
            return Err(syntax(key_form, format!("clause :{key} given twice")));
        }
        seen.push(key);
        match key.as_str() {
            "index" => {
                let n = value
                    .as_int()
                    .ok_or_else(|| syntax(value, ":index takes an integer"))?;
                if n < 1 {
                    return Err(SchemaError::new(SchemaErrorKind::InvalidIndex(n)).at(value.pos));
                }
                spec.max_index = Some(n as usize);
            }
            "table" => spec.table = Some(expect_name(value, "a table name")?.clone()),
            "getter" => spec.getter = Some(expect_name(value, "a getter name")?.clone()),
            "setter" => spec.setter = Some(expect_name(value, "a setter name")?.clone()),
            "type" => spec.datatype = Some(expect_name(value, "a type name")?.clone()),
            "generator" => spec.generator = Some(expect_name(value, "a generator name")?.clone()),
            "doc" => {
                spec.doc = Some(
                    value
                        .as_str()
                        .ok_or_else(|| syntax(value, ":doc takes a string"))?
                        .to_string(),
                )
            }
            "heading" => spec.headings = parse_headings(value)?,
            "input" => spec.inputs = parse_inputs(value)?,
            "output" => spec.outputs = parse_outputs(value)?,
            other => return Err(syntax(key_form, format!("unknown clause :{other}"))),
        }
    }
    Ok(spec)
}

fn entries<'a>(value: &'a Sexp, clause: &str) -> Result<&'a [Sexp], SchemaError> {
    let list = value
        .as_list()
        .ok_or_else(|| syntax(value, format!(":{clause} takes a list of entries")))?;
    if list.is_empty() {
        return Err(syntax(value, format!(":{clause} needs at least one entry")));
    }
    Ok(list)
}

fn insert_unique<V>(
    map: &mut BTreeMap<Symbol, V>,
    medium: Symbol,
    value: V,
    direction: &'static str,
    at: &Sexp,
) -> Result<(), SchemaError> {
    if map.contains_key(&medium) {
        return Err(SchemaError::new(SchemaErrorKind::DuplicateEntry { direction, medium }).at(at.pos));
    }
    map.insert(medium, value);
    Ok(())
}

fn parse_headings(value: &Sexp) -> Result<BTreeMap<Symbol, String>, SchemaError> {
    let list = entries(value, "heading")?;
    if list.len() % 2 != 0 {
        return Err(syntax(value, ":heading takes medium/string pairs"));
    }
    let mut out = BTreeMap::new();
    for pair in list.chunks(2) {
        let medium = expect_name(&pair[0], "a medium")?.clone();
        let text = pair[1]
            .as_str()
            .ok_or_else(|| syntax(&pair[1], "heading text must be a string"))?;
        insert_unique(&mut out, medium, text.to_string(), "heading", &pair[0])?;
    }
    Ok(out)
}

fn parse_inputs(value: &Sexp) -> Result<BTreeMap<Symbol, InputEntry>, SchemaError> {
    let mut out = BTreeMap::new();
    for entry in entries(value, "input")? {
        let Some([medium, parser, vexpr]) = entry.as_list().and_then(|l| <&[Sexp; 3]>::try_from(l).ok()) else {
            return Err(syntax(entry, "input entry must be (medium parser validator)"));
        };
        let medium = expect_name(medium, "a medium")?.clone();
        let parser = expect_name(parser, "a parser name")?.clone();
        let validator = ValidatorExpr::from_sexp(vexpr).map_err(|e| {
            SchemaError::new(SchemaErrorKind::Syntax(e.message)).at(e.pos)
        })?;
        insert_unique(&mut out, medium, InputEntry { parser, validator }, "input", entry)?;
    }
    Ok(out)
}

fn parse_outputs(value: &Sexp) -> Result<BTreeMap<Symbol, Symbol>, SchemaError> {
    let mut out = BTreeMap::new();
    for entry in entries(value, "output")? {
        let Some([medium, formatter]) = entry.as_list().and_then(|l| <&[Sexp; 2]>::try_from(l).ok()) else {
            return Err(syntax(entry, "output entry must be (medium formatter)"));
        };
        let medium = expect_name(medium, "a medium")?.clone();
        let formatter = expect_name(formatter, "a formatter name")?.clone();
        insert_unique(&mut out, medium, formatter, "output", entry)?;
    }
    Ok(out)
}
