//! Keyed tables of [`Datum`] values with an in-memory write-back cache.
//!
//! Each table lives in one file under the database root. Writes only touch
//! memory until [`Database::checkpoint`], which rewrites every dirty table
//! through a temporary file and an atomic rename.
//!
//! Table file format (UTF-8, LF line endings, entries sorted by key):
//!
//! ```text
//! (table demographics)
//! (dob (date 2010 7 4))
//! (last-name "DOE")
//! ```
//!
//! File names are the table name with every byte outside `[a-z0-9-]`
//! written as `_xx` (lower-case hex), plus the `.tbl` extension. The encoding
//! is injective, so distinct tables never share a file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use thiserror::Error;

use crate::datum::Datum;
use crate::sexpr::{self, SexpKind};
use crate::symbol::Symbol;

const TABLE_EXT: &str = "tbl";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt table data in {file} at byte {offset}: {reason}")]
    Corrupt {
        file: String,
        offset: usize,
        reason: String,
    },
    #[error("index {index} is outside 1..={max} for `{key}`")]
    IndexOutOfRange { key: Symbol, index: usize, max: usize },
    #[error("`{table}.{key}` holds a {found} value, not an indexed slot")]
    NotASlot {
        table: Symbol,
        key: Symbol,
        found: &'static str,
    },
    #[error("database {0} is locked by another process")]
    Locked(PathBuf),
    #[error("database is not empty; use force to overwrite")]
    NotEmpty,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default)]
struct Table {
    entries: BTreeMap<Symbol, Datum>,
    generation: u64,
    flushed: u64,
}

impl Table {
    fn is_dirty(&self) -> bool {
        self.generation != self.flushed
    }

    fn touch(&mut self) {
        self.generation += 1;
    }
}

/// Encodes a table name as a file stem.
pub fn table_file_stem(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for b in name.bytes() {
        if b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-' {
            out.push(b as char);
        } else {
            out.push_str(&format!("_{b:02x}"));
        }
    }
    out
}

fn decode_file_stem(stem: &str) -> Option<String> {
    let bytes = stem.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'_' {
            let hex = stem.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

/// Renders one table in the table file format.
fn render_table(name: &Symbol, entries: &BTreeMap<Symbol, Datum>) -> String {
    let mut out = String::from("(table ");
    sexpr::write_symbol(&mut out, name);
    out.push_str(")\n");
    for (key, value) in entries {
        out.push('(');
        // A bare `table` key would read back as a header.
        if key.as_str() == "table" {
            sexpr::write_string(&mut out, key);
        } else {
            sexpr::write_symbol(&mut out, key);
        }
        out.push(' ');
        value.write_dump(&mut out);
        out.push_str(")\n");
    }
    out
}

/// Parses a stream of table sections: each `(table name)` header is followed
/// by `(key datum)` entries.
fn parse_tables(src: &str, file: &str) -> Result<BTreeMap<Symbol, BTreeMap<Symbol, Datum>>, StoreError> {
    let corrupt = |offset: usize, reason: String| StoreError::Corrupt {
        file: file.to_string(),
        offset,
        reason,
    };
    let forms = sexpr::read_all(src).map_err(|e| corrupt(e.pos.offset, e.message))?;
    let mut tables: BTreeMap<Symbol, BTreeMap<Symbol, Datum>> = BTreeMap::new();
    let mut current: Option<Symbol> = None;
    for form in &forms {
        let items = form
            .as_list()
            .ok_or_else(|| corrupt(form.pos.offset, format!("expected a list, found {}", form.describe())))?;
        let [head, value] = items else {
            return Err(corrupt(form.pos.offset, "expected a two-element form".into()));
        };
        let key = match &head.kind {
            SexpKind::Symbol(s) => s.clone(),
            SexpKind::Str(s) => Symbol::new(s),
            _ => return Err(corrupt(head.pos.offset, "expected a key symbol".into())),
        };
        if matches!(head.kind, SexpKind::Symbol(_)) && key.as_str() == "table" {
            let name = match &value.kind {
                SexpKind::Symbol(s) => Some(s.clone()),
                SexpKind::Str(s) => Some(Symbol::new(s)),
                _ => None,
            };
            if let Some(name) = name {
                if tables.insert(name.clone(), BTreeMap::new()).is_some() {
                    return Err(corrupt(value.pos.offset, format!("table `{name}` appears twice")));
                }
                current = Some(name.clone());
                continue;
            }
        }
        let Some(table) = &current else {
            return Err(corrupt(form.pos.offset, "entry before any (table ...) header".into()));
        };
        let datum = Datum::from_sexp(value).map_err(|e| corrupt(e.offset, e.reason))?;
        let entries = tables.get_mut(table).expect("current table exists");
        if entries.insert(key.clone(), datum).is_some() {
            return Err(corrupt(head.pos.offset, format!("duplicate key `{key}`")));
        }
    }
    Ok(tables)
}

struct LockFile(PathBuf);

impl Drop for LockFile {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// Summary of a [`Database::checkpoint`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckpointStats {
    pub tables_written: usize,
    pub tables_removed: usize,
}

/// A set of named tables, optionally backed by a directory.
///
/// All operations take `&self` and are safe to call from many threads. Each
/// table sits behind its own lock, so readers of one table never wait on
/// writers of another.
pub struct Database {
    root: Option<PathBuf>,
    tables: RwLock<BTreeMap<Symbol, Arc<RwLock<Table>>>>,
    removed: RwLock<BTreeSet<Symbol>>,
    flush: Mutex<()>,
    _lock: Option<LockFile>,
}

impl std::fmt::Debug for Database {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Database")
            .field("root", &self.root)
            .field("tables", &self.table_names())
            .finish()
    }
}

impl Database {
    /// A database with no backing directory; `checkpoint` only clears dirty
    /// flags.
    pub fn in_memory() -> Self {
        Database {
            root: None,
            tables: RwLock::new(BTreeMap::new()),
            removed: RwLock::new(BTreeSet::new()),
            flush: Mutex::new(()),
            _lock: None,
        }
    }

    /// Opens (creating if needed) the database rooted at `path` and reads
    /// every table file. A corrupt file fails the whole open.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = path.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let mut tables = BTreeMap::new();
        for entry in fs::read_dir(&root).map_err(io_err(&root))? {
            let entry = entry.map_err(io_err(&root))?;
            let file = entry.path();
            if file.extension().and_then(|e| e.to_str()) != Some(TABLE_EXT) {
                continue;
            }
            let display = file.display().to_string();
            let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let expected = decode_file_stem(stem).ok_or_else(|| StoreError::Corrupt {
                file: display.clone(),
                offset: 0,
                reason: "undecodable table file name".into(),
            })?;
            let bytes = fs::read(&file).map_err(io_err(&file))?;
            let text = String::from_utf8(bytes).map_err(|e| StoreError::Corrupt {
                file: display.clone(),
                offset: e.utf8_error().valid_up_to(),
                reason: "invalid UTF-8".into(),
            })?;
            let mut parsed = parse_tables(&text, &display)?;
            let (name, entries) = match parsed.pop_first() {
                Some(t) if parsed.is_empty() => t,
                _ => {
                    return Err(StoreError::Corrupt {
                        file: display,
                        offset: 0,
                        reason: "expected exactly one (table ...) header".into(),
                    })
                }
            };
            if name.as_str() != expected {
                return Err(StoreError::Corrupt {
                    file: display,
                    offset: 0,
                    reason: format!("header names table `{name}`, file name says `{expected}`"),
                });
            }
            tables.insert(
                name,
                Arc::new(RwLock::new(Table {
                    entries,
                    generation: 0,
                    flushed: 0,
                })),
            );
        }
        Ok(Database {
            root: Some(root),
            tables: RwLock::new(tables),
            removed: RwLock::new(BTreeSet::new()),
            flush: Mutex::new(()),
            _lock: None,
        })
    }

    /// Like [`Database::open`] but holds a lock file for the lifetime of the
    /// handle. A second exclusive open of the same directory fails fast.
    pub fn open_exclusive(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = path.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let lock_path = root.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock_path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(StoreError::Locked(root));
            }
            Err(e) => return Err(io_err(&lock_path)(e)),
        }
        let lock = LockFile(lock_path);
        let mut db = Self::open(&root)?;
        db._lock = Some(lock);
        Ok(db)
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn table(&self, name: &Symbol) -> Option<Arc<RwLock<Table>>> {
        self.tables.read().expect("table map lock").get(name).cloned()
    }

    fn table_or_create(&self, name: &Symbol) -> Arc<RwLock<Table>> {
        if let Some(t) = self.table(name) {
            return t;
        }
        let mut map = self.tables.write().expect("table map lock");
        map.entry(name.clone()).or_default().clone()
    }

    pub fn table_names(&self) -> Vec<Symbol> {
        self.tables.read().expect("table map lock").keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.tables
            .read()
            .expect("table map lock")
            .values()
            .all(|t| t.read().expect("table lock").entries.is_empty())
    }

    /// The stored value, or [`Datum::Uninitialized`] for a missing table or
    /// key.
    pub fn get(&self, table: &Symbol, key: &Symbol) -> Datum {
        self.table(table)
            .and_then(|t| t.read().expect("table lock").entries.get(key).cloned())
            .unwrap_or(Datum::Uninitialized)
    }

    /// Distinguishes a stored `#uninit` from a key that was never written.
    pub fn contains_key(&self, table: &Symbol, key: &Symbol) -> bool {
        self.table(table)
            .is_some_and(|t| t.read().expect("table lock").entries.contains_key(key))
    }

    pub fn put(&self, table: &Symbol, key: &Symbol, value: Datum) {
        let t = self.table_or_create(table);
        let mut t = t.write().expect("table lock");
        t.entries.insert(key.clone(), value);
        t.touch();
    }

    fn check_index(key: &Symbol, index: usize, max: usize) -> Result<(), StoreError> {
        if index == 0 || index > max {
            return Err(StoreError::IndexOutOfRange {
                key: key.clone(),
                index,
                max,
            });
        }
        Ok(())
    }

    /// Reads position `index` (1-based) of an indexed slot.
    pub fn get_indexed(
        &self,
        table: &Symbol,
        key: &Symbol,
        index: usize,
        max_index: usize,
    ) -> Result<Datum, StoreError> {
        Self::check_index(key, index, max_index)?;
        match self.get(table, key) {
            Datum::Uninitialized => Ok(Datum::Uninitialized),
            Datum::Sequence(items) => Ok(items.get(index - 1).cloned().unwrap_or_default()),
            other => Err(StoreError::NotASlot {
                table: table.clone(),
                key: key.clone(),
                found: other.variant_name(),
            }),
        }
    }

    /// Writes position `index` of an indexed slot, creating the slot as a
    /// `max_index`-long sequence of `#uninit` on first write.
    pub fn put_indexed(
        &self,
        table: &Symbol,
        key: &Symbol,
        index: usize,
        value: Datum,
        max_index: usize,
    ) -> Result<(), StoreError> {
        Self::check_index(key, index, max_index)?;
        let t = self.table_or_create(table);
        let mut t = t.write().expect("table lock");
        let slot = t
            .entries
            .entry(key.clone())
            .or_insert_with(|| Datum::Sequence(vec![Datum::Uninitialized; max_index]));
        match slot {
            Datum::Uninitialized => {
                *slot = Datum::Sequence(vec![Datum::Uninitialized; max_index]);
            }
            Datum::Sequence(_) => {}
            other => {
                return Err(StoreError::NotASlot {
                    table: table.clone(),
                    key: key.clone(),
                    found: other.variant_name(),
                })
            }
        }
        let Datum::Sequence(items) = slot else { unreachable!() };
        if items.len() < max_index {
            items.resize(max_index, Datum::Uninitialized);
        }
        items[index - 1] = value;
        t.touch();
        Ok(())
    }

    /// The table in table file format, if it exists.
    pub fn table_text(&self, table: &Symbol) -> Option<String> {
        self.table(table)
            .map(|t| render_table(table, &t.read().expect("table lock").entries))
    }

    /// Every table, sorted by name, concatenated in table file format.
    pub fn dump(&self) -> String {
        let map = self.tables.read().expect("table map lock");
        let mut out = String::new();
        for (name, t) in map.iter() {
            out.push_str(&render_table(name, &t.read().expect("table lock").entries));
        }
        out
    }

    /// Replaces the contents with a [`Database::dump`]. Nothing is applied if
    /// the dump is malformed. Refuses to touch a non-empty database unless
    /// `force` is set. Changes reach disk at the next checkpoint.
    pub fn restore(&self, dump: &str, force: bool) -> Result<(), StoreError> {
        let parsed = parse_tables(dump, "<dump>")?;
        if !force && !self.is_empty() {
            return Err(StoreError::NotEmpty);
        }
        let mut map = self.tables.write().expect("table map lock");
        let mut removed = self.removed.write().expect("removed lock");
        for old in map.keys() {
            if !parsed.contains_key(old) {
                removed.insert(old.clone());
            }
        }
        map.clear();
        for (name, entries) in parsed {
            removed.remove(&name);
            map.insert(
                name,
                Arc::new(RwLock::new(Table {
                    entries,
                    generation: 1,
                    flushed: 0,
                })),
            );
        }
        Ok(())
    }

    pub fn is_dirty(&self) -> bool {
        !self.removed.read().expect("removed lock").is_empty()
            || self
                .tables
                .read()
                .expect("table map lock")
                .values()
                .any(|t| t.read().expect("table lock").is_dirty())
    }

    /// Writes every dirty table to disk. Each write goes to a temporary file
    /// that is then renamed over the table file, so a crash leaves either the
    /// old or the new contents. On error the failing table stays dirty.
    pub fn checkpoint(&self) -> Result<CheckpointStats, StoreError> {
        let _flushing = self.flush.lock().expect("flush lock");
        let mut stats = CheckpointStats::default();
        let tables: Vec<(Symbol, Arc<RwLock<Table>>)> = self
            .tables
            .read()
            .expect("table map lock")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (name, table) in tables {
            let (text, generation) = {
                let t = table.read().expect("table lock");
                if !t.is_dirty() {
                    continue;
                }
                (render_table(&name, &t.entries), t.generation)
            };
            if let Some(root) = &self.root {
                write_atomic(root, &table_file_stem(&name), &text)?;
            }
            table.write().expect("table lock").flushed = generation;
            stats.tables_written += 1;
        }
        let removed: Vec<Symbol> = self.removed.read().expect("removed lock").iter().cloned().collect();
        for name in removed {
            if let Some(root) = &self.root {
                let path = root.join(format!("{}.{TABLE_EXT}", table_file_stem(&name)));
                match fs::remove_file(&path) {
                    Ok(()) => {}
                    Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                    Err(e) => return Err(io_err(&path)(e)),
                }
            }
            self.removed.write().expect("removed lock").remove(&name);
            stats.tables_removed += 1;
        }
        Ok(stats)
    }
}

fn write_atomic(root: &Path, stem: &str, text: &str) -> Result<(), StoreError> {
    let final_path = root.join(format!("{stem}.{TABLE_EXT}"));
    let tmp_path = root.join(format!("{stem}.{TABLE_EXT}.tmp"));
    {
        let mut f = fs::File::create(&tmp_path).map_err(io_err(&tmp_path))?;
        f.write_all(text.as_bytes()).map_err(io_err(&tmp_path))?;
        f.sync_all().map_err(io_err(&tmp_path))?;
    }
    fs::rename(&tmp_path, &final_path).map_err(io_err(&final_path))?;
    // Persist the rename itself where the platform allows opening a directory.
    if let Ok(dir) = fs::File::open(root) {
        let _ = dir.sync_all();
    }
    Ok(())
}
