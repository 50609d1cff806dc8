use crate::Result;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};
use std::io::Write;
use std::path::Path;

/// Triplet-assembled sparse system; duplicates are summed on compression.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub dim: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub rhs: DVector<f64>,
    /// Indices replaced by a unit row and column.
    pub constrained: Vec<usize>,
}

impl LinearSystem {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            triplets: Vec::new(),
            rhs: DVector::zeros(dim),
            constrained: Vec::new(),
        }
    }

    /// Symmetric elimination of homogeneous essential conditions.
    pub fn eliminate(&mut self, indices: &[usize]) {
        self.eliminate_with(indices, true);
    }

    /// Replaces rows by unit rows; columns are kept when `columns` is false.
    pub(crate) fn eliminate_with(&mut self, indices: &[usize], columns: bool) {
        if indices.is_empty() {
            return;
        }
        let mut mask = vec![false; self.dim];
        for &i in indices {
            mask[i] = true;
        }
        self.triplets
            .retain(|&(i, j, _)| !mask[i] && !(columns && mask[j]));
        for &i in indices {
            self.triplets.push((i, i, 1.0));
            self.rhs[i] = 0.0;
        }
        self.constrained.extend_from_slice(indices);
    }

    /// Entries sorted column-major with duplicates summed and zeros kept.
    pub fn compressed_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut t = self.triplets.clone();
        t.sort_by_key(|&(i, j, _)| (j, i));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out
    }

    pub fn matrix(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self
            .compressed_entries()
            .into_iter()
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &t)
            .map_err(|e| crate::Error::LinearSolveFailure(format!("{e:?}")))
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim);
        for &(i, j, v) in &self.triplets {
            y[i] += v * x[j];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.triplets {
            a[(i, j)] += v;
        }
        a
    }

    /// Matrix Market coordinate file of the matrix, plus `<stem>_rhs.mtx` array file.
    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        let entries = self.compressed_entries();
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(f, "{} {} {}", self.dim, self.dim, entries.len())?;
        for (i, j, v) in entries {
            writeln!(f, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        f.flush()?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("system");
        let rhs_path = path.with_file_name(format!("{stem}_rhs.mtx"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(rhs_path)?);
        writeln!(f, "%%MatrixMarket matrix array real general")?;
        writeln!(f, "{} 1", self.dim)?;
        for v in self.rhs.iter() {
            writeln!(f, "{v:.17e}")?;
        }
        f.flush()?;
        Ok(())
    }
}
