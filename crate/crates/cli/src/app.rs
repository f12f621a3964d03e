use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use widgetspace::store::StoreError;
use widgetspace::{Database, Formatted, Schema, SchemaError, Symbol, WidgetCoord, WidgetError};

pub const VALIDATION: u8 = 1;
pub const SCHEMA: u8 = 2;
pub const IO: u8 = 3;
pub const USAGE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "widgetspace", version, about = "Load field schemas and manage record databases")]
pub struct Cli {
    /// Compiled schema cache written by `schema load`.
    #[arg(long, global = true, env = "WIDGETSPACE_WORKSPACE", default_value = "widgetspace.ws")]
    pub workspace: PathBuf,
    /// Database directory.
    #[arg(long, global = true, env = "WIDGETSPACE_DB", default_value = "widgetspace.db")]
    pub db: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load or inspect schema sources.
    #[command(subcommand)]
    Schema(SchemaCommand),
    /// Print the locale tree depth-first.
    Locales {
        /// Indent each locale by its depth.
        #[arg(long)]
        tree: bool,
    },
    /// Validate, parse and store one field value.
    Set {
        #[command(flatten)]
        at: FieldArgs,
        value: String,
    },
    /// Print one field formatted for a medium.
    Get {
        #[command(flatten)]
        at: FieldArgs,
    },
    /// Print every field available at a locale with its heading.
    Show {
        #[arg(long)]
        locale: String,
        #[arg(long, default_value = "default")]
        medium: String,
    },
    /// Print random input that passes the field's validator.
    Gen {
        #[command(flatten)]
        at: FieldArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export the whole database.
    Dump {
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Import a dump.
    Restore {
        input: PathBuf,
        /// Replace a non-empty database.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SchemaCommand {
    /// Load schema files as one unit and write the workspace.
    Load {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Check the files without writing the workspace.
        #[arg(long)]
        check_only: bool,
        /// Apply on top of the existing workspace instead of replacing it.
        #[arg(long)]
        append: bool,
    },
    /// Report widgets whose storage cannot be resolved.
    Lint,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub locale: String,
    /// `name` or `name.index`; the index defaults to 1.
    #[arg(long)]
    pub field: String,
    #[arg(long, default_value = "default")]
    pub medium: String,
}

impl FieldArgs {
    fn coord(&self) -> Result<WidgetCoord, Failure> {
        let (name, index) = parse_field(&self.field)?;
        Ok(WidgetCoord::new(name, index, self.locale.as_str(), self.medium.as_str()))
    }
}

/// An exit code and the text for standard error.
#[derive(Debug, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<WidgetError> for Failure {
    fn from(e: WidgetError) -> Self {
        let code = match &e {
            WidgetError::Validation(v) => return Failure::new(VALIDATION, v.to_string()),
            WidgetError::Store(s) => return s.into(),
            _ => SCHEMA,
        };
        Failure::new(code, format!("error: {e}"))
    }
}

impl From<&StoreError> for Failure {
    fn from(e: &StoreError) -> Self {
        let code = match e {
            StoreError::IndexOutOfRange { .. } => SCHEMA,
            StoreError::NotEmpty => USAGE,
            _ => IO,
        };
        Failure::new(code, format!("error: {e}"))
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        Failure::from(&e)
    }
}

impl From<SchemaError> for Failure {
    fn from(e: SchemaError) -> Self {
        Failure::new(SCHEMA, format!("error: {e}"))
    }
}

fn write_err(e: std::io::Error) -> Failure {
    Failure::new(IO, format!("error: writing output: {e}"))
}

pub fn parse_field(field: &str) -> Result<(&str, usize), Failure> {
    let bad = || Failure::new(USAGE, format!("error: bad field `{field}`; expected name or name.index"));
    let (name, index) = match field.rsplit_once('.') {
        Some((name, idx)) => (name, idx.parse::<usize>().map_err(|_| bad())?),
        None => (field, 1),
    };
    if name.is_empty() {
        return Err(bad());
    }
    Ok((name, index))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(IO, format!("error: {}: {e}", path.display())))
}

fn load_workspace(path: &Path) -> Result<Schema, Failure> {
    let source = fs::read_to_string(path).map_err(|e| {
        Failure::new(
            SCHEMA,
            format!("error: cannot read workspace {}: {e}; run `schema load` first", path.display()),
        )
    })?;
    let mut schema = Schema::default();
    schema.load_source(&source, &path.display().to_string())?;
    Ok(schema)
}

fn open_db(path: &Path) -> Result<Database, Failure> {
    Ok(Database::open_exclusive(path)?)
}

pub fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    match cli.command {
        Command::Schema(SchemaCommand::Load {
            files,
            check_only,
            append,
        }) => {
            let sources = files
                .iter()
                .map(|f| Ok((f.display().to_string(), read_file(f)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            let borrowed: Vec<(&str, &str)> = sources.iter().map(|(o, s)| (o.as_str(), s.as_str())).collect();
            let mut schema = if append {
                load_workspace(&cli.workspace)?
            } else {
                Schema::default()
            };
            let report = schema.load_sources(&borrowed)?;
            if !check_only {
                fs::write(&cli.workspace, schema.to_source())
                    .map_err(|e| Failure::new(IO, format!("error: {}: {e}", cli.workspace.display())))?;
            }
            writeln!(out, "{report}").map_err(write_err)?;
        }
        Command::Schema(SchemaCommand::Lint) => {
            let schema = load_workspace(&cli.workspace)?;
            let problems = schema.lint();
            for p in &problems {
                writeln!(out, "{p}").map_err(write_err)?;
            }
            if !problems.is_empty() {
                return Err(Failure::new(SCHEMA, format!("error: {} orphaned widget(s)", problems.len())));
            }
        }
        Command::Locales { tree } => {
            let schema = load_workspace(&cli.workspace)?;
            for (depth, locale) in schema.locales().depth_first() {
                let indent = if tree { depth * 2 } else { 0 };
                writeln!(out, "{:indent$}{locale}", "").map_err(write_err)?;
            }
        }
        Command::Set { at, value } => {
            let schema = load_workspace(&cli.workspace)?;
            let coord = at.coord()?;
            let db = open_db(&cli.db)?;
            let datum = schema.parse_and_set(&db, &coord, &value)?;
            db.checkpoint()?;
            writeln!(out, "{}", datum.to_dump()).map_err(write_err)?;
        }
        Command::Get { at } => {
            let schema = load_workspace(&cli.workspace)?;
            let coord = at.coord()?;
            let db = open_db(&cli.db)?;
            let text = schema.get_and_format(&db, &coord)?;
            writeln!(out, "{text}").map_err(write_err)?;
        }
        Command::Show { locale, medium } => {
            let schema = load_workspace(&cli.workspace)?;
            let db = open_db(&cli.db)?;
            show(&schema, &db, &Symbol::new(&locale), &Symbol::new(&medium), out)?;
        }
        Command::Gen { at, seed } => {
            let schema = load_workspace(&cli.workspace)?;
            let coord = at.coord()?;
            let text = schema.generate_random(&coord.name, &coord.locale, &coord.medium, seed)?;
            writeln!(out, "{text}").map_err(write_err)?;
        }
        Command::Dump { out: target } => {
            let db = open_db(&cli.db)?;
            let dump = db.dump();
            match target {
                Some(path) => fs::write(&path, dump)
                    .map_err(|e| Failure::new(IO, format!("error: {}: {e}", path.display())))?,
                None => out.write_all(dump.as_bytes()).map_err(write_err)?,
            }
        }
        Command::Restore { input, force } => {
            let dump = read_file(&input)?;
            let db = open_db(&cli.db)?;
            db.restore(&dump, force)?;
            db.checkpoint()?;
        }
    }
    Ok(())
}

fn show(schema: &Schema, db: &Database, locale: &Symbol, medium: &Symbol, out: &mut impl Write) -> Result<(), Failure> {
    if !schema.locales().contains(locale) {
        return Err(WidgetError::UnknownLocale(locale.clone()).into());
    }
    for name in schema.widget_names() {
        let Ok(storage) = schema.resolve_storage(name, locale) else {
            continue;
        };
        if schema.resolve_formatter(name, locale, medium).is_err() {
            continue;
        }
        let heading = schema
            .resolve_heading(name, locale, medium)
            .unwrap_or_else(|| name.to_string());
        let max = storage.value.max_index;
        for index in 1..=max {
            let coord = WidgetCoord::new(name.clone(), index, locale.clone(), medium.clone());
            let value = schema.get_and_format(db, &coord)?;
            let label = if max > 1 {
                format!("{heading} {index}")
            } else {
                heading.clone()
            };
            let value = match value {
                Formatted::Text(t) => t,
                Formatted::Uninitialized => "#uninit".to_string(),
            };
            writeln!(out, "{label}: {value}").map_err(write_err)?;
        }
    }
    Ok(())
}
