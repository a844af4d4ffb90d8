//! MPS reader.
//!
//! Both the fixed-column and the free (whitespace separated) dialects are
//! accepted; the dialect is chosen per file. A file is read as fixed
//! format unless some data line has text outside the fixed field windows
//! or runs past column 61.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{validate, LpProblem};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSense {
    /// Free row; the first one is the objective.
    N,
    /// `a'x <= rhs`
    L,
    /// `a'x >= rhs`
    G,
    /// `a'x = rhs`
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsRow {
    pub name: String,
    pub sense: RowSense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Up,
    Lo,
    Fx,
    Fr,
    Mi,
    Pl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRecord {
    pub kind: BoundKind,
    pub column: usize,
    pub value: Option<f64>,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dialect {
    Fixed,
    Free,
}

/// Raw contents of an MPS file before conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsModel {
    pub name: String,
    pub dialect: Dialect,
    /// Index into `rows` of the objective row.
    pub objective: usize,
    pub rows: Vec<MpsRow>,
    pub columns: Vec<String>,
    /// `(row, column, value)` in file order, objective entries included.
    pub entries: Vec<(usize, usize, f64)>,
    /// Right-hand side per row, 0 where absent.
    pub rhs: Vec<f64>,
    pub ranges: Vec<Option<f64>>,
    pub bounds: Vec<BoundRecord>,
    /// Constant term of the objective: the negated RHS of the objective row.
    pub objective_constant: f64,
}

impl MpsModel {
    pub fn objective_name(&self) -> &str {
        &self.rows[self.objective].name
    }

    /// Nonzero COLUMNS entries on constraint rows (L, G, E).
    pub fn constraint_nonzeros(&self) -> usize {
        self.entries
            .iter()
            .filter(|(r, _, v)| self.rows[*r].sense != RowSense::N && *v != 0.0)
            .count()
    }
}

/// Result of [`to_standard_form`].
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub problem: LpProblem,
    /// Non-fatal oddities such as overwritten bounds.
    pub warnings: Vec<String>,
    /// MPS row index behind every row of `G`.
    pub g_rows: Vec<usize>,
    /// MPS row index behind every row of `A`.
    pub a_rows: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

// Fixed-format field windows as 0-based half-open byte ranges.
const FIELDS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];

fn detect_dialect(lines: &[&str]) -> Dialect {
    for line in lines {
        if is_header(line) || is_comment(line) {
            continue;
        }
        let bytes = line.trim_end().as_bytes();
        if bytes.len() > 61 {
            return Dialect::Free;
        }
        for (i, b) in bytes.iter().enumerate() {
            if *b != b' ' && !FIELDS.iter().any(|(s, e)| (*s..*e).contains(&i)) {
                return Dialect::Free;
            }
        }
    }
    Dialect::Fixed
}

fn is_comment(line: &str) -> bool {
    line.starts_with('*') || line.trim().is_empty()
}

fn is_header(line: &str) -> bool {
    !line.is_empty() && !line.starts_with([' ', '\t', '*'])
}

fn fixed_fields(line: &str) -> Vec<String> {
    let bytes = line.as_bytes();
    let mut out: Vec<String> = FIELDS
        .iter()
        .map(|&(s, e)| {
            if s >= bytes.len() {
                String::new()
            } else {
                String::from_utf8_lossy(&bytes[s..e.min(bytes.len())])
                    .trim()
                    .to_string()
            }
        })
        .collect();
    while out.last().is_some_and(|f| f.is_empty()) {
        out.pop();
    }
    out
}

struct Parser {
    dialect: Dialect,
    name: String,
    rows: Vec<MpsRow>,
    row_index: HashMap<String, usize>,
    columns: Vec<String>,
    col_index: HashMap<String, usize>,
    entries: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    ranges: Vec<Option<f64>>,
    bounds: Vec<BoundRecord>,
    rhs_set: Option<String>,
    range_set: Option<String>,
    bound_set: Option<String>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Mps {
        line,
        msg: msg.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| err(line, format!("invalid number '{tok}'")))?;
    if v.is_nan() {
        return Err(err(line, format!("invalid number '{tok}'")));
    }
    Ok(v)
}

/// Accepts the first set name seen in a section and skips the others.
fn same_set(slot: &mut Option<String>, name: &str) -> bool {
    match slot {
        None => {
            *slot = Some(name.to_string());
            true
        }
        Some(first) => first == name,
    }
}

impl Parser {
    fn row(&self, name: &str, line: usize) -> Result<usize> {
        self.row_index
            .get(name)
            .copied()
            .ok_or_else(|| err(line, format!("unknown row '{name}'")))
    }

    fn fields(&self, line: &str) -> Vec<String> {
        match self.dialect {
            Dialect::Fixed => fixed_fields(line),
            Dialect::Free => line.split_whitespace().map(str::to_string).collect(),
        }
    }

    fn rows_line(&mut self, f: &[String], line: usize) -> Result<()> {
        if f.len() < 2 {
            return Err(err(line, "ROWS entry needs a sense and a name"));
        }
        let sense = match f[0].as_str() {
            "N" => RowSense::N,
            "L" => RowSense::L,
            "G" => RowSense::G,
            "E" => RowSense::E,
            other => return Err(err(line, format!("unknown row sense '{other}'"))),
        };
        let name = f[1].clone();
        if self.row_index.contains_key(&name) {
            return Err(err(line, format!("duplicate row '{name}'")));
        }
        self.row_index.insert(name.clone(), self.rows.len());
        self.rows.push(MpsRow { name, sense });
        Ok(())
    }

    fn columns_line(&mut self, f: &[String], line: usize) -> Result<()> {
        // Fixed format keeps an empty leading field; free format does not.
        let f: &[String] = match self.dialect {
            Dialect::Fixed => f.get(1..).unwrap_or(&[]),
            Dialect::Free => f,
        };
        if f.iter().any(|t| t.contains("MARKER")) {
            return Err(Error::IntegerVariables { line });
        }
        if f.len() != 3 && f.len() != 5 {
            return Err(err(line, "COLUMNS entry needs a column and one or two row/value pairs"));
        }
        let col = match self.col_index.get(&f[0]) {
            Some(&c) => c,
            None => {
                self.col_index.insert(f[0].clone(), self.columns.len());
                self.columns.push(f[0].clone());
                self.columns.len() - 1
            }
        };
        for pair in f[1..].chunks(2) {
            let row = self.row(&pair[0], line)?;
            let value = number(&pair[1], line)?;
            if !value.is_finite() {
                return Err(err(line, "infinite matrix coefficient"));
            }
            self.entries.push((row, col, value));
        }
        Ok(())
    }

    /// Splits an RHS or RANGES line into its set name and row/value pairs.
    fn set_and_pairs<'a>(&self, f: &'a [String], line: usize) -> Result<(String, &'a [String])> {
        match self.dialect {
            Dialect::Fixed => {
                let set = f.get(1).cloned().unwrap_or_default();
                let rest = f.get(2..).unwrap_or(&[]);
                if rest.len() != 2 && rest.len() != 4 {
                    return Err(err(line, "expected one or two row/value pairs"));
                }
                Ok((set, rest))
            }
            Dialect::Free => match f.len() {
                2 | 4 => Ok((String::new(), f)),
                3 | 5 => Ok((f[0].clone(), &f[1..])),
                _ => Err(err(line, "expected one or two row/value pairs")),
            },
        }
    }

    fn rhs_line(&mut self, f: &[String], line: usize) -> Result<()> {
        let (set, pairs) = self.set_and_pairs(f, line)?;
        if !same_set(&mut self.rhs_set, &set) {
            return Ok(());
        }
        for pair in pairs.chunks(2) {
            let row = self.row(&pair[0], line)?;
            let v = number(&pair[1], line)?;
            if !v.is_finite() {
                return Err(err(line, "infinite right-hand side"));
            }
            self.rhs[row] = v;
        }
        Ok(())
    }

    fn ranges_line(&mut self, f: &[String], line: usize) -> Result<()> {
        let (set, pairs) = self.set_and_pairs(f, line)?;
        if !same_set(&mut self.range_set, &set) {
            return Ok(());
        }
        for pair in pairs.chunks(2) {
            let row = self.row(&pair[0], line)?;
            if self.rows[row].sense == RowSense::N {
                return Err(err(line, format!("range on free row '{}'", pair[0])));
            }
            let v = number(&pair[1], line)?;
            if !v.is_finite() {
                return Err(err(line, "infinite range"));
            }
            self.ranges[row] = Some(v);
        }
        Ok(())
    }

    fn bounds_line(&mut self, f: &[String], line: usize) -> Result<()> {
        let code = f.first().map(String::as_str).unwrap_or("");
        let kind = match code {
            "UP" => BoundKind::Up,
            "LO" => BoundKind::Lo,
            "FX" => BoundKind::Fx,
            "FR" => BoundKind::Fr,
            "MI" => BoundKind::Mi,
            "PL" => BoundKind::Pl,
            "BV" | "LI" | "UI" | "SC" => return Err(Error::IntegerVariables { line }),
            other => return Err(err(line, format!("unknown bound type '{other}'"))),
        };
        let needs_value = matches!(kind, BoundKind::Up | BoundKind::Lo | BoundKind::Fx);
        let (set, col_name, value_tok) = match self.dialect {
            Dialect::Fixed => (
                f.get(1).cloned().unwrap_or_default(),
                f.get(2).cloned().unwrap_or_default(),
                f.get(3).cloned(),
            ),
            Dialect::Free => {
                let with_set = if needs_value { f.len() >= 4 } else { f.len() >= 3 };
                if with_set {
                    (f[1].clone(), f[2].clone(), f.get(3).cloned())
                } else {
                    (String::new(), f.get(1).cloned().unwrap_or_default(), f.get(2).cloned())
                }
            }
        };
        if !same_set(&mut self.bound_set, &set) {
            return Ok(());
        }
        let column = self
            .col_index
            .get(&col_name)
            .copied()
            .ok_or_else(|| err(line, format!("unknown column '{col_name}'")))?;
        let value = if needs_value {
            let tok = value_tok.ok_or_else(|| err(line, format!("{code} bound needs a value")))?;
            Some(number(&tok, line)?)
        } else {
            None
        };
        self.bounds.push(BoundRecord {
            kind,
            column,
            value,
            line,
        });
        Ok(())
    }
}

/// Parses MPS text.
pub fn parse_mps(text: &str) -> Result<MpsModel> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let mut p = Parser {
        dialect: detect_dialect(&lines),
        name: String::new(),
        rows: Vec::new(),
        row_index: HashMap::new(),
        columns: Vec::new(),
        col_index: HashMap::new(),
        entries: Vec::new(),
        rhs: Vec::new(),
        ranges: Vec::new(),
        bounds: Vec::new(),
        rhs_set: None,
        range_set: None,
        bound_set: None,
    };
    let mut section: Option<Section> = None;
    let mut ended = false;
    let mut rows_closed = false;

    for (idx, raw) in lines.iter().enumerate() {
        let line = idx + 1;
        if is_comment(raw) {
            continue;
        }
        if is_header(raw) {
            let mut parts = raw.split_whitespace();
            let keyword = parts.next().unwrap_or("");
            if keyword == "ROWS" && rows_closed {
                return Err(err(line, "ROWS section after COLUMNS"));
            }
            section = match keyword {
                "NAME" => {
                    p.name = raw[4..].trim().to_string();
                    None
                }
                "ROWS" => Some(Section::Rows),
                "COLUMNS" => Some(Section::Columns),
                "RHS" => Some(Section::Rhs),
                "RANGES" => Some(Section::Ranges),
                "BOUNDS" => Some(Section::Bounds),
                "ENDATA" => {
                    ended = true;
                    break;
                }
                other => return Err(err(line, format!("unknown section '{other}'"))),
            };
            if section.is_some() && section != Some(Section::Rows) && !rows_closed {
                rows_closed = true;
                p.rhs = vec![0.0; p.rows.len()];
                p.ranges = vec![None; p.rows.len()];
            }
            continue;
        }
        let f = p.fields(raw);
        match section {
            None => return Err(err(line, "data line outside of a section")),
            Some(Section::Rows) => p.rows_line(&f, line)?,
            Some(Section::Columns) => p.columns_line(&f, line)?,
            Some(Section::Rhs) => p.rhs_line(&f, line)?,
            Some(Section::Ranges) => p.ranges_line(&f, line)?,
            Some(Section::Bounds) => p.bounds_line(&f, line)?,
        }
    }
    if !ended {
        return Err(Error::MissingEndata);
    }
    let objective = p
        .rows
        .iter()
        .position(|r| r.sense == RowSense::N)
        .ok_or_else(|| err(0, "no objective (N) row"))?;
    if !rows_closed {
        p.rhs = vec![0.0; p.rows.len()];
        p.ranges = vec![None; p.rows.len()];
    }
    let objective_constant = -p.rhs[objective];
    Ok(MpsModel {
        name: p.name,
        dialect: p.dialect,
        objective,
        rows: p.rows,
        columns: p.columns,
        entries: p.entries,
        rhs: p.rhs,
        ranges: p.ranges,
        bounds: p.bounds,
        objective_constant,
    })
}

/// Parses MPS bytes; the text must be valid UTF-8.
pub fn parse_mps_bytes(bytes: &[u8]) -> Result<MpsModel> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| err(0, format!("file is not valid UTF-8: {e}")))?;
    parse_mps(text)
}

/// Reads, parses and converts an MPS file.
pub fn read_mps_file(path: impl AsRef<Path>) -> Result<StandardForm> {
    let bytes = std::fs::read(path)?;
    to_standard_form(&parse_mps_bytes(&bytes)?)
}

/// Converts a parsed model into `min c'x + const  s.t.  Gx >= h, Ax = b`.
///
/// `L` rows are negated. Ranged rows become two inequality rows, except an
/// `E` row with range 0, which stays an equality. Additional `N` rows are
/// dropped.
pub fn to_standard_form(model: &MpsModel) -> Result<StandardForm> {
    let n = model.columns.len();
    let mut warnings = Vec::new();

    // Per MPS row: list of (target, sign, rhs) it expands to.
    enum Target {
        G(usize),
        A(usize),
    }
    let mut expansions: Vec<Vec<(Target, f64)>> = Vec::with_capacity(model.rows.len());
    let mut h = Vec::new();
    let mut b = Vec::new();
    let mut g_rows = Vec::new();
    let mut a_rows = Vec::new();

    let push_g = |h: &mut Vec<f64>, g_rows: &mut Vec<usize>, rhs: f64, row: usize| {
        h.push(rhs);
        g_rows.push(row);
        h.len() - 1
    };

    for (i, row) in model.rows.iter().enumerate() {
        let rho = model.rhs[i];
        let mut exp = Vec::new();
        if row.sense != RowSense::N {
            let interval = match (row.sense, model.ranges[i]) {
                (RowSense::G, None) => (Some(rho), None),
                (RowSense::L, None) => (None, Some(rho)),
                (RowSense::E, None) | (RowSense::E, Some(0.0)) => (Some(rho), Some(rho)),
                (RowSense::G, Some(r)) => (Some(rho), Some(rho + r.abs())),
                (RowSense::L, Some(r)) => (Some(rho - r.abs()), Some(rho)),
                (RowSense::E, Some(r)) if r > 0.0 => (Some(rho), Some(rho + r)),
                (RowSense::E, Some(r)) => (Some(rho + r), Some(rho)),
                (RowSense::N, _) => unreachable!(),
            };
            match interval {
                (Some(lo), Some(hi)) if lo == hi => {
                    b.push(lo);
                    a_rows.push(i);
                    exp.push((Target::A(b.len() - 1), 1.0));
                }
                (lo, hi) => {
                    if let Some(lo) = lo {
                        let k = push_g(&mut h, &mut g_rows, lo, i);
                        exp.push((Target::G(k), 1.0));
                    }
                    if let Some(hi) = hi {
                        let k = push_g(&mut h, &mut g_rows, 0.0 - hi, i);
                        exp.push((Target::G(k), -1.0));
                    }
                }
            }
        }
        expansions.push(exp);
    }

    let mut c = vec![0.0; n];
    let mut g_trip = Vec::new();
    let mut a_trip = Vec::new();
    for &(r, col, v) in &model.entries {
        if r == model.objective {
            c[col] += v;
            continue;
        }
        for (target, sign) in &expansions[r] {
            match target {
                Target::G(k) => g_trip.push((*k, col, sign * v)),
                Target::A(k) => a_trip.push((*k, col, sign * v)),
            }
        }
    }
    let g = SparseMatrix::from_triplets(h.len(), n, &g_trip)?;
    let a = SparseMatrix::from_triplets(b.len(), n, &a_trip)?;

    let mut lower = vec![0.0; n];
    let mut upper = vec![f64::INFINITY; n];
    let mut lower_set = vec![false; n];
    let mut fixed = vec![false; n];
    let mut touched = vec![false; n];
    for rec in &model.bounds {
        let j = rec.column;
        let name = &model.columns[j];
        let v = rec.value.unwrap_or(0.0);
        match rec.kind {
            BoundKind::Up | BoundKind::Lo if fixed[j] => {
                warnings.push(format!(
                    "line {}: bound on '{name}' overrides an earlier FX bound",
                    rec.line
                ));
                fixed[j] = false;
            }
            BoundKind::Fx if touched[j] && !fixed[j] => {
                warnings.push(format!(
                    "line {}: FX bound on '{name}' overrides earlier bounds",
                    rec.line
                ));
            }
            _ => {}
        }
        match rec.kind {
            BoundKind::Up => {
                upper[j] = v;
                if v < 0.0 && !lower_set[j] && lower[j] == 0.0 {
                    lower[j] = f64::NEG_INFINITY;
                    warnings.push(format!(
                        "line {}: negative upper bound on '{name}' with default lower bound; lower bound set to -inf",
                        rec.line
                    ));
                }
            }
            BoundKind::Lo => {
                lower[j] = v;
                lower_set[j] = true;
            }
            BoundKind::Fx => {
                lower[j] = v;
                upper[j] = v;
                lower_set[j] = true;
                fixed[j] = true;
            }
            BoundKind::Fr => {
                lower[j] = f64::NEG_INFINITY;
                upper[j] = f64::INFINITY;
                lower_set[j] = true;
            }
            BoundKind::Mi => {
                lower[j] = f64::NEG_INFINITY;
                lower_set[j] = true;
            }
            BoundKind::Pl => upper[j] = f64::INFINITY,
        }
        touched[j] = true;
    }

    let problem = LpProblem {
        name: model.name.clone(),
        c,
        g,
        h,
        a,
        b,
        lower,
        upper,
        objective_offset: model.objective_constant,
    };
    let issues = validate(&problem);
    if !issues.is_empty() {
        return Err(Error::InvalidProblem(issues));
    }
    Ok(StandardForm {
        problem,
        warnings,
        g_rows,
        a_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
NAME          TINY
ROWS
 N  COST
 G  LIM1
COLUMNS
    X         COST      1.0            LIM1      1.0
    Y         COST      2.0
RHS
    RHS       LIM1      1.0
ENDATA
";

    #[test]
    fn minimal_fixed_file() {
        let m = parse_mps(MINIMAL).unwrap();
        assert_eq!(m.dialect, Dialect::Fixed);
        assert_eq!(m.name, "TINY");
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.columns, vec!["X", "Y"]);
        assert_eq!(m.entries.len(), 3);
        let sf = to_standard_form(&m).unwrap();
        assert_eq!(sf.problem.c, vec![1.0, 2.0]);
        assert_eq!(sf.problem.h, vec![1.0]);
        assert_eq!(sf.problem.g.nnz(), 1);
    }

    #[test]
    fn missing_endata() {
        let text = MINIMAL.replace("ENDATA\n", "");
        assert!(matches!(parse_mps(&text), Err(Error::MissingEndata)));
    }

    #[test]
    fn integer_marker_rejected() {
        let text = MINIMAL.replace(
            "    Y ",
            "    MARKER                 'MARKER'                 'INTORG'\n    Y ",
        );
        let e = parse_mps(&text).unwrap_err();
        assert!(e.to_string().contains("integer variables unsupported"));
    }

    #[test]
    fn less_equal_row_is_negated() {
        let text = "NAME\nROWS\n N obj\n L r\nCOLUMNS\n x r 1\nRHS\n r 5\nENDATA\n";
        let sf = to_standard_form(&parse_mps(text).unwrap()).unwrap();
        assert_eq!(sf.problem.g.to_dense(), vec![vec![-1.0]]);
        assert_eq!(sf.problem.h, vec![-5.0]);
    }

    #[test]
    fn equality_row_and_upper_bound() {
        let text = "NAME\nROWS\n N obj\n E r\nCOLUMNS\n x r 1 obj 1\nRHS\n r 2\nBOUNDS\n UP B x 3\nENDATA\n";
        let sf = to_standard_form(&parse_mps(text).unwrap()).unwrap();
        assert_eq!(sf.problem.b, vec![2.0]);
        assert_eq!(sf.problem.a.nnz(), 1);
        assert_eq!((sf.problem.lower[0], sf.problem.upper[0]), (0.0, 3.0));
    }

    #[test]
    fn unknown_row_is_an_error() {
        let text = "NAME\nROWS\n N obj\nCOLUMNS\n x nope 1\nENDATA\n";
        assert!(parse_mps(text).unwrap_err().to_string().contains("unknown row"));
    }

    #[test]
    fn objective_constant_from_rhs() {
        let text = "NAME\nROWS\n N obj\nCOLUMNS\n x obj 1\nRHS\n obj 4.5\nENDATA\n";
        let m = parse_mps(text).unwrap();
        assert_eq!(m.objective_constant, -4.5);
    }
}
