//! Named functions a schema may refer to: validators, formatters, parsers,
//! random data generators and explicit storage accessors.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::datum::{days_in_month, Datum, PersonName, SimpleDate};
use crate::store::{Database, StoreError};
use crate::symbol::Symbol;
use crate::textio::{self, FnRegistry, FormatterRegistry, ParserRegistry};
use crate::validators::ValidatorRegistry;

/// Constraints a generator may use to aim at valid output. Generated values
/// are still checked against the full validator afterwards.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenHints {
    pub length: Option<(usize, usize)>,
}

pub type GeneratorFn = dyn Fn(&mut ChaCha8Rng, &GenHints) -> String + Send + Sync;
pub type GeneratorRegistry = FnRegistry<GeneratorFn>;

/// The storage coordinates handed to an accessor.
#[derive(Debug, Clone, Copy)]
pub struct Slot<'a> {
    pub name: &'a Symbol,
    pub locale: &'a Symbol,
    pub index: usize,
    pub max_index: usize,
}

pub type GetterFn = dyn Fn(&Database, &Slot<'_>) -> Result<Datum, StoreError> + Send + Sync;
pub type SetterFn = dyn Fn(&Database, &Slot<'_>, Datum) -> Result<(), StoreError> + Send + Sync;

/// Reads the widget's key from `table`. Single-occurrence widgets hold a
/// plain value; indexed widgets hold a `max_index`-long sequence.
pub fn table_get(db: &Database, table: &Symbol, slot: &Slot<'_>) -> Result<Datum, StoreError> {
    if slot.max_index <= 1 {
        if slot.index != 1 {
            return Err(StoreError::IndexOutOfRange {
                key: slot.name.clone(),
                index: slot.index,
                max: 1,
            });
        }
        Ok(db.get(table, slot.name))
    } else {
        db.get_indexed(table, slot.name, slot.index, slot.max_index)
    }
}

pub fn table_put(db: &Database, table: &Symbol, slot: &Slot<'_>, value: Datum) -> Result<(), StoreError> {
    if slot.max_index <= 1 {
        if slot.index != 1 {
            return Err(StoreError::IndexOutOfRange {
                key: slot.name.clone(),
                index: slot.index,
                max: 1,
            });
        }
        db.put(table, slot.name, value);
        Ok(())
    } else {
        db.put_indexed(table, slot.name, slot.index, value, slot.max_index)
    }
}

fn random_string(rng: &mut ChaCha8Rng, hints: &GenHints, alphabet: &[u8], default: (usize, usize)) -> String {
    let (lo, hi) = hints.length.unwrap_or(default);
    let hi = hi.max(lo);
    let len = rng.random_range(lo..=hi);
    (0..len)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())] as char)
        .collect()
}

const LETTERS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
const DIGITS: &[u8] = b"0123456789";
const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

fn standard_generators() -> GeneratorRegistry {
    let mut r = GeneratorRegistry::default();
    let table: [(&str, Arc<GeneratorFn>); 4] = [
        ("random-alphabetic", Arc::new(|rng, h| random_string(rng, h, LETTERS, (1, 12)))),
        ("random-numeric", Arc::new(|rng, h| random_string(rng, h, DIGITS, (1, 9)))),
        ("random-alphanumeric", Arc::new(|rng, h| random_string(rng, h, ALNUM, (1, 12)))),
        (
            "random-date-fbi",
            Arc::new(|rng, _| {
                let year = rng.random_range(1900..=2020);
                let month = rng.random_range(1..=12);
                let day = rng.random_range(1..=days_in_month(year, month));
                textio::format_date_fbi(&SimpleDate::new(year, month, day).expect("in range"))
            }),
        ),
    ];
    for (name, f) in table {
        r.register_arc(name, f).expect("distinct built-in names");
    }
    r
}

/// Fields making up the `person-name` composite, in [`PersonName`] order.
pub const NAME_PARTS: [&str; 4] = ["last-name", "first-name", "middle-name", "suffix"];

fn standard_getters() -> FnRegistry<GetterFn> {
    let mut r = FnRegistry::<GetterFn>::default();
    r.register_arc(
        "setting",
        Arc::new(|db: &Database, slot: &Slot<'_>| table_get(db, &Symbol::new("settings"), slot)),
    )
    .expect("distinct");
    // Assembles a name from the component fields in the `names` table.
    r.register_arc(
        "person-name",
        Arc::new(|db: &Database, _slot: &Slot<'_>| {
            let table = Symbol::new("names");
            let parts: Vec<Datum> = NAME_PARTS.iter().map(|p| db.get(&table, &Symbol::new(p))).collect();
            if parts.iter().all(Datum::is_uninitialized) {
                return Ok(Datum::Uninitialized);
            }
            let text = |d: &Datum| match d {
                Datum::Text(s) => s.clone(),
                _ => String::new(),
            };
            Ok(Datum::Name(PersonName {
                last: text(&parts[0]),
                first: text(&parts[1]),
                middle: text(&parts[2]),
                suffix: text(&parts[3]),
            }))
        }),
    )
    .expect("distinct");
    r
}

fn standard_setters() -> FnRegistry<SetterFn> {
    let mut r = FnRegistry::<SetterFn>::default();
    r.register_arc(
        "setting",
        Arc::new(|db: &Database, slot: &Slot<'_>, value: Datum| {
            table_put(db, &Symbol::new("settings"), slot, value)
        }),
    )
    .expect("distinct");
    r
}

/// Everything a schema can name, grouped by namespace.
#[derive(Clone, Debug)]
pub struct Library {
    pub validators: ValidatorRegistry,
    pub formatters: FormatterRegistry,
    pub parsers: ParserRegistry,
    pub generators: GeneratorRegistry,
    pub getters: FnRegistry<GetterFn>,
    pub setters: FnRegistry<SetterFn>,
}

impl Library {
    pub fn standard() -> Self {
        Library {
            validators: ValidatorRegistry::standard(),
            formatters: FormatterRegistry::standard(),
            parsers: ParserRegistry::standard(),
            generators: standard_generators(),
            getters: standard_getters(),
            setters: standard_setters(),
        }
    }
}

impl Default for Library {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generators_honour_length_hints() {
        let lib = Library::standard();
        let gen = lib.generators.get("random-alphanumeric").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = gen(&mut rng, &GenHints { length: Some((6, 12)) });
            assert!((6..=12).contains(&s.len()), "{s}");
            assert!(s.bytes().all(|b| b.is_ascii_alphanumeric()));
        }
    }

    #[test]
    fn date_generator_yields_valid_fbi_dates() {
        let lib = Library::standard();
        let gen = lib.generators.get("random-date-fbi").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let s = gen(&mut rng, &GenHints::default());
            let d = textio::parse_simple_date_fbi(&s).unwrap();
            assert!(d.is_calendar_valid(), "{s}");
        }
    }

    #[test]
    fn person_name_accessor_assembles_parts() {
        let lib = Library::standard();
        let db = Database::in_memory();
        let get = lib.getters.get("person-name").unwrap();
        let (n, l) = (Symbol::new("full-name"), Symbol::new("common"));
        let slot = Slot { name: &n, locale: &l, index: 1, max_index: 1 };
        assert_eq!(get(&db, &slot).unwrap(), Datum::Uninitialized);
        db.put(&Symbol::new("names"), &Symbol::new("last-name"), Datum::text("Doe"));
        db.put(&Symbol::new("names"), &Symbol::new("first-name"), Datum::text("John"));
        assert_eq!(
            get(&db, &slot).unwrap(),
            Datum::Name(PersonName::new("Doe", "John", "", ""))
        );
    }
}
