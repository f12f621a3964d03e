//! Browser bindings over the bundled fixture schema. Every export returns a
//! JSON string; the page in `www/` renders it.

use std::sync::OnceLock;

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;
use widgetspace::validators::ValidatorContext;
use widgetspace::{fixtures, Database, Schema, Symbol, ValidatorExpr, WidgetCoord};

fn schema() -> &'static Schema {
    static SCHEMA: OnceLock<Schema> = OnceLock::new();
    SCHEMA.get_or_init(|| fixtures::schema().expect("bundled fixtures load"))
}

/// Checks `input` against a validator expression such as
/// `(and required (length 1 20))`.
pub fn validate_json(expr: &str, input: &str) -> Value {
    let expr = match ValidatorExpr::parse(expr) {
        Ok(e) => e,
        Err(e) => return json!({ "ok": false, "kind": "syntax", "message": e.to_string() }),
    };
    let lib = schema().library();
    if let Err(e) = lib.validators.check(&expr) {
        return json!({ "ok": false, "kind": "schema", "message": e.to_string() });
    }
    let ctx = ValidatorContext::new("demo", "common", "default");
    match lib.validators.validate(&expr, &ctx, input) {
        Ok(()) => json!({ "ok": true, "expr": expr.to_string() }),
        Err(e) => json!({ "ok": false, "kind": "validation", "message": e.to_string() }),
    }
}

/// One row per ancestor of `locale`: what the widget there declares for
/// `medium`.
fn trace(name: &Symbol, locale: &Symbol, medium: &Symbol) -> Vec<Value> {
    let s = schema();
    let Ok(chain) = s.locales().ancestry(locale) else {
        return Vec::new();
    };
    chain
        .iter()
        .map(|l| match s.spec(name, l) {
            None => json!({ "locale": l.as_str(), "spec": false }),
            Some(spec) => json!({
                "locale": l.as_str(),
                "spec": true,
                "output": spec.outputs.get(medium).map(Symbol::as_str),
                "output_default": spec.outputs.get("default").map(Symbol::as_str),
                "input": spec.inputs.get(medium).map(|e| e.parser.as_str()),
                "input_default": spec.inputs.get("default").map(|e| e.parser.as_str()),
                "storage": spec.declares_storage(),
            }),
        })
        .collect()
}

/// Enters `input` for `field` at `locale` through the `entry` medium, then
/// reads it back formatted for `medium`, using a scratch database.
pub fn explain_json(field: &str, locale: &str, entry: &str, medium: &str, input: &str) -> Value {
    let s = schema();
    let (name, loc, med) = (Symbol::new(field), Symbol::new(locale), Symbol::new(medium));
    let entry = Symbol::new(entry);
    let found = |r: Result<(String, Symbol, bool), String>| match r {
        Ok((value, at, via_default)) => json!({ "value": value, "locale": at.as_str(), "via_default": via_default }),
        Err(e) => json!({ "error": e }),
    };
    let parser = s
        .resolve_parser(&name, &loc, &entry)
        .map(|r| (r.value.parser.to_string(), r.locale, r.via_default))
        .map_err(|e| e.to_string());
    let formatter = s
        .resolve_formatter(&name, &loc, &med)
        .map(|r| (r.value.to_string(), r.locale, r.via_default))
        .map_err(|e| e.to_string());
    let db = Database::in_memory();
    let entered = WidgetCoord::new(name.clone(), 1, loc.clone(), entry.clone());
    let shown_at = WidgetCoord::new(name.clone(), 1, loc.clone(), med.clone());
    let outcome = match s.parse_and_set(&db, &entered, input) {
        Err(e) => json!({ "ok": false, "message": e.to_string() }),
        Ok(datum) => {
            let shown = s.get_and_format(&db, &shown_at).map(|f| f.to_string()).map_err(|e| e.to_string());
            json!({
                "ok": true,
                "stored": datum.to_dump(),
                "formatted": shown.as_ref().ok(),
                "format_error": shown.as_ref().err(),
            })
        }
    };
    json!({
        "input_trace": trace(&name, &loc, &entry),
        "output_trace": trace(&name, &loc, &med),
        "parser": found(parser),
        "formatter": found(formatter),
        "heading": s.resolve_heading(&name, &loc, &med),
        "outcome": outcome,
    })
}

pub fn generate_json(field: &str, locale: &str, medium: &str, seed: u64) -> Value {
    let s = schema();
    match s.generate_random(&Symbol::new(field), &Symbol::new(locale), &Symbol::new(medium), seed) {
        Ok(v) => json!({ "ok": true, "value": v, "seed": seed }),
        Err(e) => json!({ "ok": false, "message": e.to_string() }),
    }
}

pub fn locales_json() -> Value {
    let tree = schema().locales();
    let rows: Vec<Value> = tree
        .depth_first()
        .into_iter()
        .map(|(depth, l)| json!({ "name": l.as_str(), "depth": depth, "parent": tree.parent(l).map(Symbol::as_str) }))
        .collect();
    Value::Array(rows)
}

pub fn widgets_json() -> Value {
    let s = schema();
    let rows: Vec<Value> = s
        .widget_names()
        .map(|name| {
            let at: Vec<&str> = s.specs().filter(|w| &w.name == name).map(|w| w.locale.as_str()).collect();
            let mut media: Vec<&str> = s
                .specs()
                .filter(|w| &w.name == name)
                .flat_map(|w| w.inputs.keys().chain(w.outputs.keys()).map(Symbol::as_str))
                .collect();
            media.sort_unstable();
            media.dedup();
            json!({ "name": name.as_str(), "locales": at, "media": media })
        })
        .collect();
    Value::Array(rows)
}

#[wasm_bindgen]
pub fn validate(expr: &str, input: &str) -> String {
    validate_json(expr, input).to_string()
}

#[wasm_bindgen]
pub fn explain(field: &str, locale: &str, entry: &str, medium: &str, input: &str) -> String {
    explain_json(field, locale, entry, medium, input).to_string()
}

/// `seed` is a JS number; fractional parts are dropped.
#[wasm_bindgen]
pub fn generate(field: &str, locale: &str, medium: &str, seed: f64) -> String {
    generate_json(field, locale, medium, seed.max(0.0) as u64).to_string()
}

#[wasm_bindgen]
pub fn locales() -> String {
    locales_json().to_string()
}

#[wasm_bindgen]
pub fn widgets() -> String {
    widgets_json().to_string()
}
