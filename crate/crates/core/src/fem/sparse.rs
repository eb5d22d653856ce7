use std::sync::Arc;

use super::space::FunctionSpace;

/// Compressed-row sparsity with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
}

impl SparsityPattern {
    /// Couples every pair of dofs sharing a cell.
    pub fn for_space(space: &FunctionSpace) -> Self {
        let n = space.num_dofs();
        let npc = space.degree().dofs_per_cell();
        let cells: Vec<usize> = space.cells().collect();
        let mut count = vec![0usize; n + 1];
        for &c in &cells {
            for &d in space.cell_dofs(c) {
                count[d + 1] += 1;
            }
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut incid = vec![0u32; count[n]];
        let mut fill = count.clone();
        for &c in &cells {
            for &d in space.cell_dofs(c) {
                incid[fill[d]] = c as u32;
                fill[d] += 1;
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut scratch: Vec<u32> = Vec::with_capacity(64 * npc);
        for d in 0..n {
            scratch.clear();
            for &c in &incid[count[d]..count[d + 1]] {
                scratch.extend(space.cell_dofs(c as usize).iter().map(|&x| x as u32));
            }
            scratch.sort_unstable();
            scratch.dedup();
            cols.extend_from_slice(&scratch);
            row_ptr.push(cols.len());
        }
        SparsityPattern { row_ptr, cols }
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        for r in rows {
            let mut r: Vec<u32> = r.iter().map(|&c| c as u32).collect();
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        SparsityPattern { row_ptr, cols }
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Position of entry `(i, j)` in the value array.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].binary_search(&(j as u32)).ok().map(|k| a + k)
    }
}

/// Square sparse matrix sharing a pattern.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let nnz = pattern.cols.len();
        SparseMatrix { pattern, values: vec![0.0; nnz] }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            rows[i].push(j);
        }
        let mut m = SparseMatrix::zeros(Arc::new(SparsityPattern::from_rows(&rows)));
        for &(i, j, v) in triplets {
            m.add_at(i, j, v);
        }
        m
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let mut t = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    t.push((i, j, *v));
                }
            }
        }
        Self::from_triplets(a.len(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.pattern.nrows()
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row `i` as parallel slices of column indices and values.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.pattern.row_ptr[i], self.pattern.row_ptr[i + 1]);
        (&self.pattern.cols[a..b], &self.values[a..b])
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> (&[u32], &mut [f64]) {
        let (a, b) = (self.pattern.row_ptr[i], self.pattern.row_ptr[i + 1]);
        (&self.pattern.cols[a..b], &mut self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.find(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(i, j)`; the entry must be in the pattern.
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        let k = self.pattern.find(i, j).expect("entry outside sparsity pattern");
        self.values[k] += v;
    }

    /// `self += s * other` for matrices sharing a pattern.
    pub fn add_scaled(&mut self, other: &SparseMatrix, s: f64) {
        assert!(Arc::ptr_eq(&self.pattern, &other.pattern) || *self.pattern == *other.pattern);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                s += v * x[*c as usize];
            }
            *yi = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.nrows() {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*c as usize, i)).abs());
            }
        }
        worst / scale
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.nrows();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                row[*c as usize] += v;
            }
        }
        d
    }
}
