//! Solution files: one `name value` pair per line, `#` starts a comment.
//!
//! Names are model variable names (`z_1_4`) or, with a [`NameTable`], MPS
//! codes (`X0000001`). Every binary must be listed. When continuous values
//! are missing they are recomputed by solving the LP with the binaries fixed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use pwtame_core::formulation::{check_values, Assignment, FeasibilityReport, MipModel, VarKind, FEASIBILITY_TOL};
use pwtame_core::solver::complete_from_binaries;

use crate::error::{Error, Result};
use crate::mps::{format_number, NameTable};

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedSolution {
    pub assignment: Assignment,
    /// Dense values in model variable order.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Whether the continuous part was recomputed.
    pub completed: bool,
}

/// Parses `name value` lines into pairs, in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, f64)>> {
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let [name, value] = tokens[..] else {
            return Err(Error::parse(k + 1, format!("expected `name value`, got `{body}`")));
        };
        let v: f64 = value.parse().map_err(|_| Error::parse(k + 1, format!("`{value}` is not a number")))?;
        pairs.push((name.to_string(), v));
    }
    Ok(pairs)
}

fn describe(report: &FeasibilityReport) -> String {
    let shown: Vec<String> = report.violations.iter().take(5).map(|v| format!("{} by {:.3e}", v.item, v.magnitude)).collect();
    let more = report.violations.len().saturating_sub(shown.len());
    let tail = if more > 0 { format!(" and {more} more") } else { String::new() };
    format!("{}{tail}", shown.join(", "))
}

/// Reads a solution for `model`. The result always passes the feasibility
/// check; otherwise the violations are returned as [`Error::Rejected`].
pub fn import_solution(model: &MipModel, text: &str, names: Option<&NameTable>) -> Result<ImportedSolution> {
    let lookup = names.map(NameTable::to_map).unwrap_or_default();
    let mut given: BTreeMap<usize, f64> = BTreeMap::new();
    for (name, v) in parse_pairs(text)? {
        let resolved = match model.index_of(&name) {
            Some(j) => Some(j),
            None => lookup.get(name.as_str()).and_then(|symbolic| {
                model.index_of(symbolic).or_else(|| symbolic.parse().ok().and_then(|s| model.find(&s)))
            }),
        };
        let j = resolved.ok_or_else(|| {
            let hint = if names.is_none() && name.len() == 8 && name.starts_with('X') {
                "; this looks like an MPS column code, pass the name table written next to the MPS file"
            } else {
                "; names are model variable names such as z_1_4, or MPS codes listed in the name table"
            };
            Error::Core(pwtame_core::Error::UnknownVariable(format!("`{name}`{hint}")))
        })?;
        given.insert(j, v);
    }

    let vars = model.variables();
    let mut x = vec![0.0; vars.len()];
    let mut missing_continuous = false;
    for (j, v) in vars.iter().enumerate() {
        match given.get(&j) {
            Some(&value) => x[j] = value,
            None if v.kind == VarKind::Binary => {
                return Err(Error::Core(pwtame_core::Error::MissingVariable(v.name.clone())));
            }
            None => missing_continuous = true,
        }
    }
    let fractional: Vec<String> = vars
        .iter()
        .zip(&x)
        .filter(|(v, value)| v.kind == VarKind::Binary && (*value - value.round()).abs() > FEASIBILITY_TOL)
        .map(|(v, value)| format!("{} = {value}", v.name))
        .collect();
    if !fractional.is_empty() {
        return Err(Error::Rejected(format!("binaries must be 0 or 1: {}", fractional.join(", "))));
    }

    let (x, report) = if missing_continuous {
        let (x, report) = complete_from_binaries(model, &x)
            .ok_or_else(|| Error::Rejected("the binaries admit no feasible continuous completion".into()))?;
        (x, report)
    } else {
        let report = check_values(model, &x);
        (x, report)
    };
    if !report.is_feasible() {
        return Err(Error::Rejected(describe(&report)));
    }
    Ok(ImportedSolution { assignment: model.assignment(&x), objective: report.objective, x, completed: missing_continuous })
}

/// Writes every variable, or only the binaries, as `name value` lines.
pub fn write_solution(model: &MipModel, x: &[f64], binaries_only: bool) -> String {
    let mut out = String::from("# name value\n");
    for (v, value) in model.variables().iter().zip(x) {
        if binaries_only && v.kind != VarKind::Binary {
            continue;
        }
        writeln!(out, "{} {}", v.name, format_number(*value)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use pwtame_core::formulation::Sense;

    fn tiny() -> MipModel {
        // min y - b  s.t.  y >= 2 b,  y <= 3,  b binary.
        let mut m = MipModel::new("T");
        let b = m.add_variable("b", 0.0, 1.0, VarKind::Binary, None).unwrap();
        let y = m.add_variable("y", 0.0, 3.0, VarKind::Continuous, None).unwrap();
        m.add_constraint("link", vec![(y, 1.0), (b, -2.0)], Sense::Ge, 0.0).unwrap();
        m.set_objective(vec![(y, 1.0), (b, -1.0)]);
        m
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let pairs = parse_pairs("# header\n\nb 1  # trailing\n  y\t2.5\n").unwrap();
        assert_eq!(pairs, vec![("b".to_string(), 1.0), ("y".to_string(), 2.5)]);
        assert!(parse_pairs("b 1 2\n").is_err());
        assert!(parse_pairs("b one\n").is_err());
    }

    #[test]
    fn binaries_only_files_are_completed() {
        let s = import_solution(&tiny(), "b 1\n", None).unwrap();
        assert!(s.completed);
        assert_eq!(s.x, vec![1.0, 2.0]);
        assert_eq!(s.objective, 1.0);
    }

    #[test]
    fn infeasible_and_fractional_files_are_rejected() {
        assert!(matches!(import_solution(&tiny(), "b 1\ny 1\n", None), Err(Error::Rejected(_))));
        assert!(matches!(import_solution(&tiny(), "b 0.4\n", None), Err(Error::Rejected(_))));
        assert!(import_solution(&tiny(), "y 1\n", None).is_err());
    }

    #[test]
    fn unknown_names_carry_a_hint() {
        let err = import_solution(&tiny(), "X0000001 1\n", None).unwrap_err().to_string();
        assert!(err.contains("name table"), "{err}");
    }

    #[test]
    fn written_files_read_back() {
        let m = tiny();
        let s = import_solution(&m, &write_solution(&m, &[1.0, 2.5], false), None).unwrap();
        assert_eq!(s.x, vec![1.0, 2.5]);
        assert!(!s.completed);
    }
}
