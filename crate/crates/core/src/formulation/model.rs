use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::solver::lp::LpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// Amount by which `x` violates the row, 0 when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

/// One instance of a symbol of the regression-tree programs. Point, dimension
/// and monomial indices start at 1; node indices follow the tree numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Point `point` sits in leaf `leaf`.
    Z { point: usize, leaf: usize },
    /// Leaf is active.
    L { leaf: usize },
    /// Split coefficient.
    A { dim: usize, node: usize },
    /// Split offset.
    B { node: usize },
    /// Residual of a point under a leaf polynomial.
    Phi { point: usize, leaf: usize },
    /// Absolute residual of a point.
    Delta { point: usize },
    /// Leaf polynomial coefficient.
    C { leaf: usize, term: usize },
    /// Sign indicator of a hyperplane coefficient.
    O { dim: usize, node: usize },
    APlus { dim: usize, node: usize },
    AMinus { dim: usize, node: usize },
}

impl Symbol {
    /// Variable name used in models and solution files.
    pub fn var_name(&self) -> String {
        match *self {
            Symbol::Z { point, leaf } => format!("z_{point}_{leaf}"),
            Symbol::L { leaf } => format!("l_{leaf}"),
            Symbol::A { dim, node } => format!("a_{dim}_{node}"),
            Symbol::B { node } => format!("b_{node}"),
            Symbol::Phi { point, leaf } => format!("phi_{point}_{leaf}"),
            Symbol::Delta { point } => format!("delta_{point}"),
            Symbol::C { leaf, term } => format!("c_{leaf}_{term}"),
            Symbol::O { dim, node } => format!("o_{dim}_{node}"),
            Symbol::APlus { dim, node } => format!("ap_{dim}_{node}"),
            Symbol::AMinus { dim, node } => format!("am_{dim}_{node}"),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Symbol::Z { point, leaf } => write!(f, "z_{{{point},{leaf}}}"),
            Symbol::L { leaf } => write!(f, "l_{{{leaf}}}"),
            Symbol::A { dim, node } => write!(f, "a_{{{dim},{node}}}"),
            Symbol::B { node } => write!(f, "b_{{{node}}}"),
            Symbol::Phi { point, leaf } => write!(f, "phi_{{{point},{leaf}}}"),
            Symbol::Delta { point } => write!(f, "delta_{{{point}}}"),
            Symbol::C { leaf, term } => write!(f, "c_{{{leaf},{term}}}"),
            Symbol::O { dim, node } => write!(f, "o_{{{dim},{node}}}"),
            Symbol::APlus { dim, node } => write!(f, "a+_{{{dim},{node}}}"),
            Symbol::AMinus { dim, node } => write!(f, "a-_{{{dim},{node}}}"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unrecognized symbol `{s}`"));
        let (head, rest) = s.split_once("_{").ok_or_else(bad)?;
        let inner = rest.strip_suffix('}').ok_or_else(bad)?;
        let idx: Vec<usize> = inner.split(',').map(|p| p.trim().parse::<usize>()).collect::<core::result::Result<_, _>>().map_err(|_| bad())?;
        let one = |v: &[usize]| if v.len() == 1 { Ok(v[0]) } else { Err(bad()) };
        let two = |v: &[usize]| if v.len() == 2 { Ok((v[0], v[1])) } else { Err(bad()) };
        Ok(match head {
            "z" => two(&idx).map(|(point, leaf)| Symbol::Z { point, leaf })?,
            "l" => Symbol::L { leaf: one(&idx)? },
            "a" => two(&idx).map(|(dim, node)| Symbol::A { dim, node })?,
            "b" => Symbol::B { node: one(&idx)? },
            "phi" => two(&idx).map(|(point, leaf)| Symbol::Phi { point, leaf })?,
            "delta" => Symbol::Delta { point: one(&idx)? },
            "c" => two(&idx).map(|(leaf, term)| Symbol::C { leaf, term })?,
            "o" => two(&idx).map(|(dim, node)| Symbol::O { dim, node })?,
            "a+" => two(&idx).map(|(dim, node)| Symbol::APlus { dim, node })?,
            "a-" => two(&idx).map(|(dim, node)| Symbol::AMinus { dim, node })?,
            _ => return Err(bad()),
        })
    }
}

/// A minimization mixed-integer linear program with named variables and rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MipModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, f64)>,
    symbols: Vec<Option<Symbol>>,
    by_name: BTreeMap<String, usize>,
    by_symbol: BTreeMap<Symbol, usize>,
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind, symbol: Option<Symbol>) -> Result<usize> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::InvalidInput(format!("duplicate variable `{name}`")));
        }
        let j = self.variables.len();
        if let Some(s) = symbol {
            if self.by_symbol.insert(s, j).is_some() {
                return Err(Error::InvalidInput(format!("duplicate symbol {s}")));
            }
        }
        self.by_name.insert(name.clone(), j);
        self.variables.push(Variable { name, lower, upper, kind });
        self.symbols.push(symbol);
        Ok(j)
    }

    /// Adds a variable named after its symbol.
    pub fn add_symbol(&mut self, symbol: Symbol, lower: f64, upper: f64, kind: VarKind) -> usize {
        self.add_variable(symbol.var_name(), lower, upper, kind, Some(symbol)).expect("symbols are unique by construction")
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Result<usize> {
        let name = name.into();
        if let Some(&(j, _)) = coeffs.iter().find(|(j, _)| *j >= self.variables.len()) {
            return Err(Error::InvalidInput(format!("constraint `{name}` references undeclared variable {j}")));
        }
        self.constraints.push(Constraint { name, coeffs, sense, rhs });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, f64)>) {
        self.objective = coeffs;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn symbol(&self, j: usize) -> Option<Symbol> {
        self.symbols[j]
    }

    /// Attaches symbols to variables, e.g. after importing a file.
    pub fn set_symbol(&mut self, j: usize, symbol: Symbol) -> Result<()> {
        if let Some(old) = self.symbols[j].take() {
            self.by_symbol.remove(&old);
        }
        if self.by_symbol.insert(symbol, j).is_some() {
            return Err(Error::InvalidInput(format!("duplicate symbol {symbol}")));
        }
        self.symbols[j] = Some(symbol);
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn find(&self, symbol: &Symbol) -> Option<usize> {
        self.by_symbol.get(symbol).copied()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn binaries(&self) -> Vec<usize> {
        (0..self.variables.len()).filter(|&j| self.variables[j].kind == VarKind::Binary).collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    /// The continuous relaxation.
    pub fn lp_relaxation(&self) -> LpProblem {
        let mut lp = LpProblem::default();
        for v in &self.variables {
            let (lo, hi) = match v.kind {
                VarKind::Binary => (v.lower.max(0.0), v.upper.min(1.0)),
                VarKind::Continuous => (v.lower, v.upper),
            };
            lp.add_var(0.0, lo, hi);
        }
        for &(j, c) in &self.objective {
            lp.objective[j] += c;
        }
        for c in &self.constraints {
            let (lo, hi) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            lp.add_row(c.coeffs.clone(), lo, hi);
        }
        lp
    }

    /// Dense value vector from an assignment covering every variable.
    pub fn dense_values(&self, a: &Assignment) -> Result<Vec<f64>> {
        self.variables
            .iter()
            .map(|v| a.get(&v.name).ok_or_else(|| Error::MissingVariable(v.name.clone())))
            .collect()
    }

    pub fn assignment(&self, x: &[f64]) -> Assignment {
        Assignment { values: self.variables.iter().zip(x).map(|(v, &x)| (v.name.clone(), x)).collect() }
    }
}

/// Variable name to value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    pub values: BTreeMap<String, f64>,
}

impl Assignment {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }
}
