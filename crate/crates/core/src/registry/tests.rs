use std::collections::HashMap;

use proptest::prelude::*;

use super::*;
use crate::datum::SimpleDate;
use crate::fixtures;

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

fn coord(name: &str, index: usize, locale: &str, medium: &str) -> WidgetCoord {
    WidgetCoord::new(name, index, locale, medium)
}

fn schema() -> Schema {
    fixtures::schema().expect("fixtures load")
}

#[test]
fn fixtures_load_as_one_unit() {
    let mut s = Schema::default();
    let report = s
        .load_sources(&[("common.scm", fixtures::COMMON), ("arkansas.scm", fixtures::ARKANSAS)])
        .unwrap();
    assert_eq!(report.locales, 9);
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
    assert!(s.lint().is_empty(), "{:?}", s.lint());
}

#[test]
fn dob_at_arkansas_resolves_per_medium() {
    let s = schema();
    let (dob, ar) = (sym("dob"), sym("arkansas"));
    let r = s.resolve_formatter(&dob, &ar, &sym("ar-arrest")).unwrap();
    assert_eq!((r.value.as_str(), r.locale.as_str(), r.via_default), ("format-date-short", "arkansas", false));
    let r = s.resolve_formatter(&dob, &ar, &sym("transmission")).unwrap();
    assert_eq!((r.value.as_str(), r.locale.as_str(), r.via_default), ("format-date-fbi", "common", false));
    let r = s.resolve_formatter(&dob, &ar, &sym("no-such-medium")).unwrap();
    assert_eq!((r.value.as_str(), r.locale.as_str(), r.via_default), ("format-date-card", "common", true));
}

#[test]
fn default_entry_beats_parent_exact_entry() {
    let mut s = Schema::default();
    s.add_locale(sym("common"), None).unwrap();
    s.add_locale(sym("child"), Some(sym("common"))).unwrap();
    s.define_widget(WidgetSpec::new("f", "common").with_table("t").with_output("print", "format-date-fbi"))
        .unwrap();
    s.define_widget(WidgetSpec::new("f", "child").with_output("default", "format-date-card"))
        .unwrap();
    let r = s.resolve_formatter(&sym("f"), &sym("child"), &sym("print")).unwrap();
    assert_eq!(r.value.as_str(), "format-date-card");
    assert_eq!(r.locale.as_str(), "child");
    assert!(r.via_default);
    let r = s.resolve_formatter(&sym("f"), &sym("common"), &sym("print")).unwrap();
    assert_eq!(r.value.as_str(), "format-date-fbi");
}

#[test]
fn exhausted_chain_message_is_exact() {
    let s = schema();
    let err = s
        .resolve_formatter(&sym("sid"), &sym("wisconsin"), &sym("transmission"))
        .unwrap_err();
    assert_eq!(err.to_string(), "No formatter/parser specified.");
    let err = s.resolve_parser(&sym("full-name"), &sym("arkansas"), &sym("default")).unwrap_err();
    assert_eq!(err.to_string(), "No formatter/parser specified.");
}

#[test]
fn unknown_locale_is_not_exhaustion() {
    let s = schema();
    let err = s.resolve_formatter(&sym("dob"), &sym("atlantis"), &sym("default")).unwrap_err();
    assert!(matches!(err, WidgetError::UnknownLocale(_)), "{err:?}");
}

#[test]
fn sid_round_trip_through_storage() {
    let s = schema();
    let db = Database::in_memory();
    let stored = s
        .parse_and_set(&db, &coord("sid", 1, "arkansas", "ls1100-entry"), "ab12cd")
        .unwrap();
    assert_eq!(stored.to_dump(), "\"ab12cd\"");
    let get = |m| s.get_and_format(&db, &coord("sid", 1, "arkansas", m)).unwrap();
    assert_eq!(get("ls1100-entry"), Formatted::Text("AB12CD".into()));
    assert_eq!(get("transmission"), Formatted::Text("ab12cd".into()));
}

#[test]
fn dob_stores_a_date_and_formats_per_medium() {
    let s = schema();
    let db = Database::in_memory();
    let stored = s
        .parse_and_set(&db, &coord("dob", 1, "arkansas", "ls1100-entry"), "20100704")
        .unwrap();
    assert_eq!(stored, Datum::Date(SimpleDate::new(2010, 7, 4).unwrap()));
    let get = |m| s.get_and_format(&db, &coord("dob", 1, "arkansas", m)).unwrap().to_string();
    assert_eq!(get("ar-arrest"), "7/4/2010");
    assert_eq!(get("transmission"), "20100704");
    assert_eq!(get("somewhere-else"), "07/04/2010");
}

#[test]
fn unset_field_reads_as_uninitialized() {
    let s = schema();
    let db = Database::in_memory();
    let out = s.get_and_format(&db, &coord("dob", 1, "arkansas", "ar-arrest")).unwrap();
    assert_eq!(out, Formatted::Uninitialized);
    assert_eq!(out.to_string(), "#uninit");
}

#[test]
fn validation_failure_leaves_storage_untouched() {
    let s = schema();
    let db = Database::in_memory();
    s.parse_and_set(&db, &coord("sid", 1, "arkansas", "ls1100-entry"), "ab12cd")
        .unwrap();
    let before = db.dump();
    let err = s
        .parse_and_set(&db, &coord("sid", 1, "arkansas", "ls1100-entry"), "ab!")
        .unwrap_err();
    assert!(matches!(err, WidgetError::Validation(_)), "{err:?}");
    assert_eq!(err.to_string(), "The character '!' is not alphanumeric");
    assert_eq!(db.dump(), before);
}

#[test]
fn indexed_alias_slots_are_independent() {
    let s = schema();
    let db = Database::in_memory();
    s.parse_and_set(&db, &coord("alias", 2, "common", "default"), "smith").unwrap();
    let get = |i, m| s.get_and_format(&db, &coord("alias", i, "common", m)).unwrap();
    assert_eq!(get(1, "default"), Formatted::Uninitialized);
    assert_eq!(get(2, "default"), Formatted::Text("smith".into()));
    assert_eq!(get(2, "ls1100-entry"), Formatted::Text("SMITH".into()));
    let err = s.get_and_format(&db, &coord("alias", 6, "common", "default")).unwrap_err();
    assert!(matches!(err, WidgetError::IndexOutOfRange { index: 6, max: 5, .. }), "{err:?}");
    let err = s.get_and_format(&db, &coord("alias", 0, "common", "default")).unwrap_err();
    assert!(matches!(err, WidgetError::IndexOutOfRange { index: 0, .. }), "{err:?}");
}

#[test]
fn full_name_is_assembled_from_parts() {
    let s = schema();
    let db = Database::in_memory();
    for (field, value) in [("last-name", "Doe"), ("first-name", "John"), ("middle-name", "Quincy")] {
        s.parse_and_set(&db, &coord(field, 1, "wisconsin", "default"), value).unwrap();
    }
    let get = |l, m| s.get_and_format(&db, &coord("full-name", 1, l, m)).unwrap().to_string();
    assert_eq!(get("arkansas", "ar-arrest"), "Doe, John Q");
    assert_eq!(get("wisconsin", "wi-arrest"), "John, Q, Doe");
    let err = s
        .parse_and_set(&db, &coord("full-name", 1, "wisconsin", "default"), "x")
        .unwrap_err();
    assert_eq!(err.to_string(), "No formatter/parser specified.");
}

#[test]
fn optional_middle_name_stores_uninitialized() {
    let s = schema();
    let db = Database::in_memory();
    let d = s
        .parse_and_set(&db, &coord("middle-name", 1, "wisconsin", "default"), "")
        .unwrap();
    assert_eq!(d, Datum::Uninitialized);
}

#[test]
fn generator_is_deterministic_and_valid() {
    let s = schema();
    let (sid, ar, m) = (sym("sid"), sym("arkansas"), sym("ls1100-entry"));
    let a = s.generate_random(&sid, &ar, &m, 42).unwrap();
    assert_eq!(a, s.generate_random(&sid, &ar, &m, 42).unwrap());
    s.validate(&coord("sid", 1, "arkansas", "ls1100-entry"), &a).unwrap();
    let err = s.generate_random(&sym("full-name"), &ar, &m, 1).unwrap_err();
    assert_eq!(err.to_string(), "No generator specified.");
}

#[test]
fn unknown_validator_names_itself_and_location() {
    let mut s = schema();
    let src = "(widget x common :table t\n  :input ((default identity (and required frobnicate))))";
    let err = s.load_source(src, "bad.scm").unwrap_err();
    let msg = err.to_string();
    assert!(msg.starts_with("bad.scm:1:1:"), "{msg}");
    assert!(msg.contains("frobnicate"), "{msg}");
    assert!(s.spec("x", "common").is_none());
}

#[test]
fn or_without_message_is_a_syntax_error() {
    let mut s = schema();
    let src = "(widget x common :table t\n  :input ((default identity (or numeric alphabetic))))";
    let err = s.load_source(src, "bad.scm").unwrap_err();
    assert!(matches!(err.kind, SchemaErrorKind::Syntax(_)), "{err:?}");
    assert!(err.to_string().contains("(or ...)"), "{err}");
    assert_eq!(err.pos.map(|p| p.line), Some(2));
}

#[test]
fn unknown_parent_reports_its_line() {
    let mut s = schema();
    let src = "; header\n\n(locale ohio :parent midwest)\n";
    let err = s.load_source(src, "ohio.scm").unwrap_err();
    assert!(err.to_string().starts_with("ohio.scm:3:1:"), "{err}");
    assert!(err.to_string().contains("midwest"), "{err}");
    assert!(!s.locales().contains("ohio"));
}

#[test]
fn failed_load_applies_nothing() {
    let mut s = schema();
    let before = s.to_source();
    let src = "(locale ohio :parent united-states)\n(widget dob ohio :output ((default no-such-formatter)))";
    assert!(s.load_source(src, "ohio.scm").is_err());
    assert_eq!(s.to_source(), before);
}

#[test]
fn bad_index_and_duplicate_medium_are_rejected() {
    let mut s = schema();
    let err = s.load_source("(widget x common :table t :index 0)", "a").unwrap_err();
    assert_eq!(err.kind, SchemaErrorKind::InvalidIndex(0));
    let err = s
        .load_source("(widget x common :table t :output ((default identity) (default identity)))", "a")
        .unwrap_err();
    assert!(matches!(err.kind, SchemaErrorKind::DuplicateEntry { direction: "output", .. }), "{err:?}");
}

#[test]
fn redefinition_warns_and_replaces() {
    let mut s = schema();
    let report = s
        .load_source("(widget sid arkansas :table identifiers :output ((default string-upcase)))", "patch")
        .unwrap();
    assert_eq!(report.warnings.len(), 1);
    let r = s.resolve_formatter(&sym("sid"), &sym("arkansas"), &sym("ls1100-entry")).unwrap();
    assert_eq!(r.value.as_str(), "string-upcase");
    assert!(r.via_default);
}

#[test]
fn to_source_round_trips() {
    let s = schema();
    let text = s.to_source();
    let mut again = Schema::default();
    again.load_source(&text, "cache").unwrap();
    assert_eq!(again.to_source(), text);
    let a: Vec<_> = s.specs().cloned().collect();
    let b: Vec<_> = again.specs().cloned().collect();
    assert_eq!(a, b);
    assert_eq!(s.locales().depth_first(), again.locales().depth_first());
}

#[test]
fn lint_reports_orphans() {
    let mut s = schema();
    s.load_source("(widget orphan arkansas :output ((default identity)))", "x").unwrap();
    let lint = s.lint();
    assert_eq!(lint.len(), 1);
    assert!(lint[0].contains("orphan"), "{lint:?}");
}

#[test]
fn registry_update_is_all_or_nothing() {
    let reg = WidgetRegistry::new(schema());
    let before = reg.snapshot();
    let err = reg.load_schema("(locale x :parent nowhere)", "patch");
    assert!(err.is_err());
    assert!(Arc::ptr_eq(&before, &reg.snapshot()));
    reg.load_schema("(locale ohio :parent united-states)", "patch").unwrap();
    assert!(reg.snapshot().locales().contains("ohio"));
    assert!(!before.locales().contains("ohio"));
}

#[test]
fn concurrent_readers_see_whole_schemas() {
    let reg = Arc::new(WidgetRegistry::new(schema()));
    let medium = sym("ar-arrest");
    std::thread::scope(|scope| {
        for _ in 0..4 {
            let reg = reg.clone();
            let medium = medium.clone();
            scope.spawn(move || {
                for _ in 0..200 {
                    let snap = reg.snapshot();
                    let f = snap.resolve_formatter(&sym("dob"), &sym("arkansas"), &medium).unwrap();
                    // Both patches change the locale and the formatter together.
                    let expected = if snap.locales().contains("patched") {
                        "format-date-long"
                    } else {
                        "format-date-short"
                    };
                    assert_eq!(f.value.as_str(), expected);
                }
            });
        }
        reg.update(|s| {
            s.add_locale(sym("patched"), Some(sym("common")))
                .map_err(SchemaError::from)?;
            s.define_widget(WidgetSpec::new("dob", "arkansas").with_output("ar-arrest", "format-date-long"))
        })
        .unwrap();
    });
}

// Brute-force model of the lookup: list every ancestor by following parent
// links, then at each one try the exact medium, then `default`.
fn oracle<'a>(
    parents: &[Option<usize>],
    specs: &'a Specs,
    start: usize,
    medium: &str,
) -> Option<(&'a str, usize, bool)> {
    let mut chain = vec![start];
    while let Some(p) = parents[*chain.last().unwrap()] {
        chain.push(p);
    }
    for l in chain {
        if let Some(outs) = specs.get(&l) {
            if let Some(f) = outs.get(medium) {
                return Some((f, l, false));
            }
            if let Some(f) = outs.get("default") {
                return Some((f, l, true));
            }
        }
    }
    None
}

const MEDIA: [&str; 5] = ["m0", "m1", "m2", "m3", "default"];
const FORMATTERS: [&str; 3] = ["identity", "string-upcase", "format-integer"];

type Specs = HashMap<usize, HashMap<String, String>>;

fn arb_case() -> impl Strategy<Value = (Vec<Option<usize>>, Specs, usize, usize)> {
    (1usize..=50)
        .prop_flat_map(|n| {
            let parents = (1..n).map(|i| (0..i).prop_map(Some).boxed()).collect::<Vec<_>>();
            let specs = prop::collection::hash_map(
                0..n,
                prop::collection::hash_map(0..MEDIA.len(), 0..FORMATTERS.len(), 0..4),
                0..=n,
            );
            (Just(n), parents, specs, 0..n, 0..MEDIA.len() + 1)
        })
        .prop_map(|(_, rest, specs, start, medium)| {
            let mut parents = vec![None];
            parents.extend(rest);
            let specs = specs
                .into_iter()
                .map(|(l, outs)| {
                    let outs = outs
                        .into_iter()
                        .map(|(m, f)| (MEDIA[m].to_string(), FORMATTERS[f].to_string()))
                        .collect();
                    (l, outs)
                })
                .collect();
            (parents, specs, start, medium)
        })
}

fn locale_name(i: usize) -> Symbol {
    if i == 0 {
        sym("common")
    } else {
        sym(&format!("l{i}"))
    }
}

proptest! {
    #[test]
    fn resolve_formatter_matches_oracle((parents, specs, start, medium) in arb_case()) {
        let mut s = Schema::default();
        for (i, p) in parents.iter().enumerate() {
            s.add_locale(locale_name(i), p.map(locale_name)).unwrap();
        }
        for (l, outs) in &specs {
            let mut spec = WidgetSpec::new("w", locale_name(*l));
            for (m, f) in outs {
                spec = spec.with_output(m, f);
            }
            s.define_widget(spec).unwrap();
        }
        // Index MEDIA.len() stands for a medium nobody declares.
        let medium = MEDIA.get(medium).copied().unwrap_or("unlisted");
        let got = s.resolve_formatter(&sym("w"), &locale_name(start), &sym(medium));
        match oracle(&parents, &specs, start, medium) {
            Some((f, l, d)) => {
                let r = got.unwrap();
                prop_assert_eq!(r.value.as_str(), f);
                prop_assert_eq!(r.locale, locale_name(l));
                prop_assert_eq!(r.via_default, d);
            }
            None => {
                let e = got.unwrap_err();
                prop_assert_eq!(e.to_string(), "No formatter/parser specified.");
            }
        }
    }

    #[test]
    fn validation_is_index_invariant(input in "[a-zA-Z0-9 !-]{0,40}") {
        let s = schema();
        let db = Database::in_memory();
        let one = s.parse_and_set(&db, &coord("alias", 1, "arkansas", "default"), &input);
        let two = s.parse_and_set(&db, &coord("alias", 2, "arkansas", "default"), &input);
        prop_assert_eq!(
            one.map_err(|e| e.to_string()),
            two.map_err(|e| e.to_string())
        );
    }

    #[test]
    fn generated_values_pass_their_validators(seed in any::<u64>()) {
        let s = schema();
        for (name, locale, medium) in [
            ("sid", "arkansas", "ls1100-entry"),
            ("dob", "arkansas", "ls1100-entry"),
            ("alias", "common", "default"),
            ("last-name", "arkansas", "default"),
            ("suffix", "wisconsin", "default"),
        ] {
            let v = s.generate_random(&sym(name), &sym(locale), &sym(medium), seed).unwrap();
            prop_assert!(s.validate(&coord(name, 1, locale, medium), &v).is_ok(), "{} {}", name, v);
        }
    }
}
