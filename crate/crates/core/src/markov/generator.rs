use super::rates::TransitionRates;
use super::state::StateSpace;
use super::ModelError;
use rayon::prelude::*;
use std::io::{self, Write};

/// Sparse generator. Rows hold the off-diagonal entries sorted by column;
/// the diagonal is stored separately as the negated row sum.
#[derive(Clone, Debug)]
pub struct TransitionModel {
    rows: Vec<Vec<(usize, f64)>>,
    diagonal: Vec<f64>,
}

impl TransitionModel {
    /// Builds a generator from off-diagonal triplets. Entries on the
    /// diagonal are ignored; duplicates are summed.
    pub fn from_triplets(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self, ModelError> {
        let mut rows = vec![Vec::new(); dim];
        for &(i, j, q) in entries {
            if i >= dim || j >= dim {
                return Err(ModelError::IndexOutOfRange { row: i, col: j, dim });
            }
            if !(q >= 0.0) || !q.is_finite() {
                return Err(ModelError::InvalidRate { from: i, rate: q });
            }
            if i != j && q > 0.0 {
                rows[i].push((j, q));
            }
        }
        Ok(Self::from_rows(rows))
    }

    fn from_rows(mut rows: Vec<Vec<(usize, f64)>>) -> Self {
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, q) in row.iter() {
                match merged.last_mut() {
                    Some((lj, lq)) if *lj == j => *lq += q,
                    _ => merged.push((j, q)),
                }
            }
            *row = merged;
        }
        let diagonal = rows.iter().map(|r| -r.iter().map(|&(_, q)| q).sum::<f64>()).collect();
        Self { rows, diagonal }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diagonal[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() + self.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i];
        }
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|p| self.rows[i][p].1)
            .unwrap_or(0.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.diagonal)
            .map(|(r, d)| r.iter().map(|&(_, q)| q).sum::<f64>() + d)
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = self.diagonal[i];
            for &(j, q) in &self.rows[i] {
                row[j] = q;
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, q)| (j, q * c)).collect())
                .collect(),
            diagonal: self.diagonal.iter().map(|d| d * c).collect(),
        }
    }

    /// `‖πQ‖_∞`
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let mut acc: Vec<f64> = pi.iter().zip(&self.diagonal).map(|(p, d)| p * d).collect();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, q) in row {
                acc[j] += pi[i] * q;
            }
        }
        acc.into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Strongly connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        // Kosaraju with explicit stacks.
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for s in 0..n {
            if visited[s] {
                continue;
            }
            visited[s] = true;
            let mut stack = vec![(s, 0usize)];
            while let Some((v, next)) = stack.last_mut() {
                if let Some(&(w, _)) = self.rows[*v].get(*next) {
                    *next += 1;
                    if !visited[w] {
                        visited[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(*v);
                    stack.pop();
                }
            }
        }
        let mut incoming = vec![Vec::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, _) in row {
                incoming[j].push(i);
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for &s in order.iter().rev() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &incoming[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out.sort_by_key(|c| c[0]);
        out
    }

    pub fn is_irreducible(&self) -> bool {
        self.components().len() <= 1
    }

    /// Writes the generator as text: one `S <index> <units...>` line per
    /// state, then one `Q <from> <to> <rate>` line per non-zero entry
    /// (diagonal included).
    pub fn write_sparse<W: Write>(&self, space: Option<&StateSpace>, mut out: W) -> io::Result<()> {
        writeln!(out, "# dim {} nnz {}", self.dim(), self.nnz())?;
        if let Some(space) = space {
            for (i, s) in space.states().iter().enumerate() {
                let units: Vec<String> = s.units().iter().map(u32::to_string).collect();
                writeln!(out, "S {i} {}", units.join(" "))?;
            }
        }
        for i in 0..self.dim() {
            let mut wrote_diag = false;
            for &(j, q) in &self.rows[i] {
                if !wrote_diag && j > i {
                    writeln!(out, "Q {i} {i} {}", self.diagonal[i])?;
                    wrote_diag = true;
                }
                writeln!(out, "Q {i} {j} {q}")?;
            }
            if !wrote_diag {
                writeln!(out, "Q {i} {i} {}", self.diagonal[i])?;
            }
        }
        Ok(())
    }
}

/// Assembles `Q` row by row from the transition lists and checks that the
/// chain is irreducible.
pub fn build_generator<R: TransitionRates>(space: &StateSpace, rates: &R) -> Result<TransitionModel, ModelError> {
    if space.is_empty() {
        return Err(ModelError::EmptyStateSpace);
    }
    let rows = (0..space.len())
        .into_par_iter()
        .map(|i| {
            let from = space.state(i);
            rates
                .transitions(from)
                .into_iter()
                .map(|t| {
                    let j = space
                        .index_of(&t.target)
                        .ok_or_else(|| ModelError::TargetOutsideSpace {
                            from: i,
                            target: t.target.units().to_vec(),
                        })?;
                    if !(t.rate >= 0.0) || !t.rate.is_finite() {
                        return Err(ModelError::InvalidRate { from: i, rate: t.rate });
                    }
                    Ok((j, t.rate))
                })
                .filter(|r| !matches!(r, Ok((j, q)) if *j == i || *q == 0.0))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let model = TransitionModel::from_rows(rows);
    let comps = model.components();
    if comps.len() > 1 {
        return Err(ModelError::ReducibleChain { components: comps });
    }
    Ok(model)
}
