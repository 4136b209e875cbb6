//! Sparse LP/MILP container with named rows and columns.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MilpError;

/// Constraint sense of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub key: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub key: String,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization problem `min c'x + offset` over `rows` with column bounds.
///
/// Columns and rows are addressed by index; keys are unique and kept in
/// lookup tables. Coefficients are stored row-wise as `(column, value)`
/// pairs. [`SparseProblem::finalize`] merges duplicate entries and drops
/// explicit zeros; solvers require a finalized problem.
#[derive(Debug, Clone, Default)]
pub struct SparseProblem {
    columns: Vec<Column>,
    rows: Vec<Row>,
    entries: Vec<Vec<(usize, f64)>>,
    col_index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
    pub objective_offset: f64,
    finalized: bool,
}

impl SparseProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(
        &mut self,
        key: impl Into<String>,
        lower: f64,
        upper: f64,
        cost: f64,
        integer: bool,
    ) -> Result<usize, MilpError> {
        let key = key.into();
        if lower.is_nan()
            || upper.is_nan()
            || lower > upper
            || lower == f64::INFINITY
            || upper == f64::NEG_INFINITY
        {
            return Err(MilpError::InvalidBounds { key, lower, upper });
        }
        if !cost.is_finite() {
            return Err(MilpError::NonFinite(key));
        }
        if self.col_index.contains_key(&key) {
            return Err(MilpError::DuplicateColumn(key));
        }
        let idx = self.columns.len();
        self.col_index.insert(key.clone(), idx);
        self.columns.push(Column {
            key,
            lower,
            upper,
            cost,
            integer,
        });
        self.finalized = false;
        Ok(idx)
    }

    pub fn add_row(
        &mut self,
        key: impl Into<String>,
        sense: Sense,
        rhs: f64,
        terms: &[(usize, f64)],
    ) -> Result<usize, MilpError> {
        let key = key.into();
        if !rhs.is_finite() {
            return Err(MilpError::NonFinite(key));
        }
        if self.row_index.contains_key(&key) {
            return Err(MilpError::DuplicateRow(key));
        }
        for &(col, val) in terms {
            if col >= self.columns.len() {
                return Err(MilpError::UnknownColumn(format!("#{col} in row {key}")));
            }
            if !val.is_finite() {
                return Err(MilpError::NonFinite(key));
            }
        }
        let idx = self.rows.len();
        self.row_index.insert(key.clone(), idx);
        self.rows.push(Row { key, sense, rhs });
        self.entries.push(terms.to_vec());
        self.finalized = false;
        Ok(idx)
    }

    /// Adds a row whose terms reference columns by key.
    pub fn add_row_by_key(
        &mut self,
        key: impl Into<String>,
        sense: Sense,
        rhs: f64,
        terms: &[(&str, f64)],
    ) -> Result<usize, MilpError> {
        let resolved = terms
            .iter()
            .map(|(k, v)| {
                self.column_index(k)
                    .map(|c| (c, *v))
                    .ok_or_else(|| MilpError::UnknownColumn(k.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.add_row(key, sense, rhs, &resolved)
    }

    /// Merges duplicate `(row, column)` entries and removes zeros.
    pub fn finalize(&mut self) {
        for row in &mut self.entries {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|&(_, v)| v != 0.0);
            *row = merged;
        }
        self.finalized = true;
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn row(&self, idx: usize) -> &Row {
        &self.rows[idx]
    }

    pub fn row_entries(&self, idx: usize) -> &[(usize, f64)] {
        &self.entries[idx]
    }

    pub fn column_index(&self, key: &str) -> Option<usize> {
        self.col_index.get(key).copied()
    }

    pub fn row_index(&self, key: &str) -> Option<usize> {
        self.row_index.get(key).copied()
    }

    pub fn has_integers(&self) -> bool {
        self.columns.iter().any(|c| c.integer)
    }

    pub fn set_bounds(&mut self, idx: usize, lower: f64, upper: f64) {
        let col = &mut self.columns[idx];
        col.lower = lower;
        col.upper = upper;
    }

    pub fn set_cost(&mut self, idx: usize, cost: f64) {
        self.columns[idx].cost = cost;
    }

    pub fn set_rhs(&mut self, idx: usize, rhs: f64) {
        self.rows[idx].rhs = rhs;
    }

    /// Copy with every integrality mark dropped.
    pub fn relaxed(&self) -> SparseProblem {
        let mut p = self.clone();
        for c in &mut p.columns {
            c.integer = false;
        }
        p
    }

    /// Objective value `c'x + offset` for a dense primal vector.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset
            + self
                .columns
                .iter()
                .zip(x)
                .map(|(c, v)| c.cost * v)
                .sum::<f64>()
    }

    /// Row activities `A x` for a dense primal vector.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, &v) in self.columns.iter().zip(x) {
            worst = worst.max(c.lower - v).max(v - c.upper);
        }
        for (row, act) in self.rows.iter().zip(self.row_activity(x)) {
            let viol = match row.sense {
                Sense::Le => act - row.rhs,
                Sense::Ge => row.rhs - act,
                Sense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}
