//! Fixed-format MPS export and import.
//!
//! Names are replaced by eight-character codes: `X0000001`... for columns in
//! model order, `R0000001`... for rows and `OBJ` for the objective. The
//! [`NameTable`] maps every code back to the model name, or to the printed
//! symbol for symbol-tagged variables, and is saved next to the MPS file as a
//! two-column CSV `mps_name,paper_symbol`.
//!
//! Every entry sits on its own line, in the classic field columns (2, 5, 15,
//! 25, 40). Numbers are written in their shortest round-trip form; one that
//! needs more than 12 characters simply widens its field, so the reader
//! splits lines on whitespace rather than on fixed columns. Binary columns
//! are wrapped in `INTORG`/`INTEND` markers and get `BV` bounds. Big-M rows
//! are exported as they are; nothing is turned into indicator constraints.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pwtame_core::formulation::{MipModel, Sense, Symbol, VarKind};

use crate::error::{read_file, write_file, Error, Result};

pub const OBJECTIVE_ROW: &str = "OBJ";
const BOUND_SET: &str = "BND";
const RHS_SET: &str = "RHS";

/// `mps_name -> paper_symbol` pairs in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NameTable {
    pub entries: Vec<(String, String)>,
}

impl NameTable {
    pub fn symbol_of(&self, mps_name: &str) -> Option<&str> {
        self.entries.iter().find(|(m, _)| m == mps_name).map(|(_, p)| p.as_str())
    }

    /// Lookup from the MPS code to the symbolic name.
    pub fn to_map(&self) -> BTreeMap<&str, &str> {
        self.entries.iter().map(|(m, p)| (m.as_str(), p.as_str())).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["mps_name", "paper_symbol"]).expect("in-memory write");
        for (m, p) in &self.entries {
            w.write_record([m, p]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["mps_name", "paper_symbol"] {
            return Err(Error::parse(1, "expected header mps_name,paper_symbol"));
        }
        let mut entries = Vec::new();
        for record in r.records() {
            let record = record?;
            entries.push((record[0].to_string(), record[1].to_string()));
        }
        Ok(Self { entries })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsExport {
    pub text: String,
    pub names: NameTable,
}

/// Path of the name table written next to an MPS file.
pub fn names_path(mps_path: &Path) -> PathBuf {
    mps_path.with_extension("names.csv")
}

pub fn column_code(j: usize) -> String {
    format!("X{:07}", j + 1)
}

pub fn row_code(i: usize) -> String {
    format!("R{:07}", i + 1)
}

/// Shortest of the plain and exponent forms, both of which parse back to `v`.
pub fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

fn entry(out: &mut String, col: &str, row: &str, value: f64) {
    writeln!(out, "    {col:<8}  {row:<8}  {}", format_number(value)).unwrap();
}

fn marker(out: &mut String, k: usize, kind: &str) {
    writeln!(out, "    {:<8}  {:<8}  {:<12}   '{kind}'", format!("M{k:07}"), "'MARKER'", "").unwrap();
}

fn bound(out: &mut String, kind: &str, col: &str, value: Option<f64>) {
    match value {
        Some(v) => writeln!(out, " {kind} {BOUND_SET:<8}  {col:<8}  {}", format_number(v)).unwrap(),
        None => writeln!(out, " {kind} {BOUND_SET:<8}  {col}").unwrap(),
    }
}

pub fn write_mps(model: &MipModel) -> MpsExport {
    let vars = model.variables();
    let rows = model.constraints();
    let mut names = NameTable::default();
    names.entries.push((OBJECTIVE_ROW.into(), "objective".into()));
    for (i, r) in rows.iter().enumerate() {
        names.entries.push((row_code(i), r.name.clone()));
    }
    for (j, v) in vars.iter().enumerate() {
        let symbolic = model.symbol(j).map(|s| s.to_string()).unwrap_or_else(|| v.name.clone());
        names.entries.push((column_code(j), symbolic));
    }

    let mut out = String::new();
    if model.name.is_empty() {
        out.push_str("NAME\n");
    } else {
        writeln!(out, "NAME          {}", model.name).unwrap();
    }
    out.push_str("ROWS\n");
    writeln!(out, " N  {OBJECTIVE_ROW}").unwrap();
    for (i, r) in rows.iter().enumerate() {
        let s = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        writeln!(out, " {s}  {}", row_code(i)).unwrap();
    }

    // Column-wise entries: objective first, then rows in order.
    let mut by_col: Vec<Vec<(Option<usize>, f64)>> = vec![Vec::new(); vars.len()];
    for &(j, c) in model.objective() {
        by_col[j].push((None, c));
    }
    for (i, r) in rows.iter().enumerate() {
        for &(j, c) in &r.coeffs {
            by_col[j].push((Some(i), c));
        }
    }
    out.push_str("COLUMNS\n");
    let mut markers = 0;
    let mut in_int = false;
    for (j, v) in vars.iter().enumerate() {
        let binary = v.kind == VarKind::Binary;
        if binary != in_int {
            markers += 1;
            marker(&mut out, markers, if binary { "INTORG" } else { "INTEND" });
            in_int = binary;
        }
        let col = column_code(j);
        if by_col[j].is_empty() {
            entry(&mut out, &col, OBJECTIVE_ROW, 0.0);
        }
        for &(row, c) in &by_col[j] {
            let row = row.map(row_code).unwrap_or_else(|| OBJECTIVE_ROW.into());
            entry(&mut out, &col, &row, c);
        }
    }
    if in_int {
        marker(&mut out, markers + 1, "INTEND");
    }

    out.push_str("RHS\n");
    for (i, r) in rows.iter().enumerate() {
        if r.rhs != 0.0 {
            entry(&mut out, RHS_SET, &row_code(i), r.rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for (j, v) in vars.iter().enumerate() {
        let col = column_code(j);
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            bound(&mut out, "BV", &col, None);
            continue;
        }
        match (v.lower, v.upper) {
            (lo, hi) if lo == hi => bound(&mut out, "FX", &col, Some(lo)),
            (lo, hi) if lo == f64::NEG_INFINITY && hi == f64::INFINITY => bound(&mut out, "FR", &col, None),
            (lo, hi) => {
                if lo == f64::NEG_INFINITY {
                    bound(&mut out, "MI", &col, None);
                } else if lo != 0.0 {
                    bound(&mut out, "LO", &col, Some(lo));
                }
                if hi != f64::INFINITY {
                    bound(&mut out, "UP", &col, Some(hi));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    MpsExport { text: out, names }
}

/// Writes `path` and its name table.
pub fn save_mps(path: &Path, model: &MipModel) -> Result<MpsExport> {
    let export = write_mps(model);
    write_file(path, &export.text)?;
    write_file(&names_path(path), &export.names.to_csv())?;
    Ok(export)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

struct RowDraft {
    name: String,
    sense: Sense,
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
    range: Option<f64>,
}

struct ColDraft {
    name: String,
    integer: bool,
    lower: f64,
    upper: f64,
    lower_set: bool,
}

fn number(line: usize, token: &str) -> Result<f64> {
    token.parse().map_err(|_| Error::parse(line, format!("`{token}` is not a number")))
}

/// Parses an MPS file. With a name table, columns and rows get their model
/// names back and symbol-tagged columns their symbols.
///
/// Ranged rows become two rows, `name` (lower side) and `name_hi` (upper
/// side). Zero objective entries are dropped. General integer columns are
/// rejected.
pub fn read_mps(text: &str, names: Option<&NameTable>) -> Result<MipModel> {
    let mut section = Section::None;
    let mut model_name = String::new();
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<RowDraft> = Vec::new();
    let mut row_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut cols: Vec<ColDraft> = Vec::new();
    let mut col_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut in_int = false;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match tokens[0] {
                "NAME" => {
                    model_name = tokens.get(1).copied().unwrap_or("").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(Error::parse(line, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::Rows => {
                let [kind, name] = tokens[..] else {
                    return Err(Error::parse(line, "row lines need a type and a name"));
                };
                let sense = match kind {
                    "N" => {
                        objective_row.get_or_insert_with(|| name.to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    _ => return Err(Error::parse(line, format!("unknown row type `{kind}`"))),
                };
                if row_index.insert(name.to_string(), rows.len()).is_some() {
                    return Err(Error::parse(line, format!("duplicate row `{name}`")));
                }
                rows.push(RowDraft { name: name.to_string(), sense, coeffs: Vec::new(), rhs: 0.0, range: None });
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    match tokens[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        other => return Err(Error::parse(line, format!("unknown marker `{other}`"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(Error::parse(line, "column lines hold one or two row entries"));
                }
                let name = tokens[0];
                let j = match col_index.get(name) {
                    Some(&j) => j,
                    None => {
                        col_index.insert(name.to_string(), cols.len());
                        cols.push(ColDraft { name: name.to_string(), integer: in_int, lower: 0.0, upper: f64::INFINITY, lower_set: false });
                        cols.len() - 1
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let value = number(line, pair[1])?;
                    if objective_row.as_deref() == Some(pair[0]) {
                        if value != 0.0 {
                            objective.push((j, value));
                        }
                    } else {
                        let &i = row_index.get(pair[0]).ok_or_else(|| Error::parse(line, format!("unknown row `{}`", pair[0])))?;
                        rows[i].coeffs.push((j, value));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let pairs = if tokens.len() % 2 == 1 { &tokens[1..] } else { &tokens[..] };
                if pairs.is_empty() || pairs.len() > 4 {
                    return Err(Error::parse(line, "expected one or two row entries"));
                }
                for pair in pairs.chunks(2) {
                    let value = number(line, pair[1])?;
                    if objective_row.as_deref() == Some(pair[0]) {
                        return Err(Error::parse(line, "objective constants are not supported"));
                    }
                    let &i = row_index.get(pair[0]).ok_or_else(|| Error::parse(line, format!("unknown row `{}`", pair[0])))?;
                    if section == Section::Rhs {
                        rows[i].rhs = value;
                    } else {
                        rows[i].range = Some(value);
                    }
                }
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(Error::parse(line, "bound lines need a type, a set and a column"));
                }
                let &j = col_index.get(tokens[2]).ok_or_else(|| Error::parse(line, format!("unknown column `{}`", tokens[2])))?;
                let value = || tokens.get(3).ok_or_else(|| Error::parse(line, "missing bound value")).and_then(|t| number(line, t));
                let c = &mut cols[j];
                match tokens[0] {
                    "UP" => {
                        c.upper = value()?;
                        if c.upper < 0.0 && c.lower == 0.0 && !c.lower_set {
                            c.lower = f64::NEG_INFINITY;
                        }
                    }
                    "LO" => {
                        c.lower = value()?;
                        c.lower_set = true;
                    }
                    "FX" => {
                        c.lower = value()?;
                        c.upper = c.lower;
                        c.lower_set = true;
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    "MI" => {
                        c.lower = f64::NEG_INFINITY;
                        c.lower_set = true;
                    }
                    "PL" => c.upper = f64::INFINITY,
                    "BV" => {
                        c.integer = true;
                        c.lower = 0.0;
                        c.upper = 1.0;
                    }
                    other => return Err(Error::parse(line, format!("unsupported bound type `{other}`"))),
                }
            }
            Section::None | Section::End => return Err(Error::parse(line, "data line outside a section")),
        }
    }
    if section != Section::End {
        return Err(Error::Invalid("MPS file does not end with ENDATA".into()));
    }

    let lookup = names.map(NameTable::to_map).unwrap_or_default();
    let mut model = MipModel::new(model_name);
    for c in &cols {
        let kind = if c.integer {
            if c.lower != 0.0 || c.upper != 1.0 {
                return Err(Error::Invalid(format!("column `{}` is a general integer; only binaries are supported", c.name)));
            }
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        let symbolic = lookup.get(c.name.as_str()).copied();
        let symbol = symbolic.and_then(|p| p.parse::<Symbol>().ok());
        let name = match (symbol, symbolic) {
            (Some(s), _) => s.var_name(),
            (None, Some(p)) => p.to_string(),
            (None, None) => c.name.clone(),
        };
        model.add_variable(name, c.lower, c.upper, kind, symbol)?;
    }
    for r in rows {
        let name = lookup.get(r.name.as_str()).map(|s| s.to_string()).unwrap_or(r.name);
        match r.range {
            None => {
                model.add_constraint(name, r.coeffs, r.sense, r.rhs)?;
            }
            Some(range) => {
                let (lo, hi) = match r.sense {
                    Sense::Eq if range < 0.0 => (r.rhs + range, r.rhs),
                    Sense::Eq | Sense::Ge => (r.rhs, r.rhs + range.abs()),
                    Sense::Le => (r.rhs - range.abs(), r.rhs),
                };
                model.add_constraint(format!("{name}_hi"), r.coeffs.clone(), Sense::Le, hi)?;
                model.add_constraint(name, r.coeffs, Sense::Ge, lo)?;
            }
        }
    }
    model.set_objective(objective);
    Ok(model)
}

/// Reads `path`, and its name table when one sits next to it.
pub fn load_mps(path: &Path) -> Result<MipModel> {
    let text = read_file(path)?;
    let table_path = names_path(path);
    let table = if table_path.exists() { Some(NameTable::from_csv(&read_file(&table_path)?)?) } else { None };
    read_mps(&text, table.as_ref())
}
