//! Real symmetric matrices stored as upper-triangle triplets.

use std::collections::BTreeSet;
use std::io::{BufRead, Read, Write};

use faer::Mat;

use crate::error::{Error, Result};

/// Real symmetric matrix in sparse triplet form.
///
/// Only entries with `row <= col` are stored, sorted by `(row, col)`, with
/// duplicates summed and exact zeros removed.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    triplets: Vec<(u32, u32, f64)>,
}

impl SymmetricMatrix {
    /// Normalizes arbitrary triplets: lower-triangle entries are mirrored,
    /// duplicates summed, zeros dropped.
    pub fn from_triplets(dim: usize, raw: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if dim > u32::MAX as usize {
            return Err(Error::Capacity { dim: dim as u128, max: u32::MAX as u64 });
        }
        let mut t: Vec<(u32, u32, f64)> = Vec::new();
        for (r, c, v) in raw {
            if r >= dim || c >= dim {
                return Err(Error::Parse(format!("entry ({r}, {c}) outside a {dim}x{dim} matrix")));
            }
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite value at ({r}, {c})")));
            }
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            t.push((r as u32, c as u32, v));
        }
        Ok(Self::from_sorted_parts(dim, t))
    }

    fn from_sorted_parts(dim: usize, mut t: Vec<(u32, u32, f64)>) -> Self {
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(u32, u32, f64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|&(_, _, v)| v != 0.0);
        SymmetricMatrix { dim, triplets: out }
    }

    /// Builds from already-normalized upper triplets (used by the Hamiltonian builders).
    pub(crate) fn from_upper_unchecked(dim: usize, t: Vec<(u32, u32, f64)>) -> Self {
        Self::from_sorted_parts(dim, t)
    }

    pub fn from_dense(a: &Mat<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Domain(format!("matrix is {}x{}", n, a.ncols())));
        }
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..=j {
                let v = a[(i, j)];
                if v != a[(j, i)] {
                    return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
                }
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored (upper-triangle) entries.
    pub fn triplets(&self) -> &[(u32, u32, f64)] {
        &self.triplets
    }

    pub fn nnz_upper(&self) -> usize {
        self.triplets.len()
    }

    /// Nonzeros of the full matrix, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.triplets.iter().map(|&(r, c, _)| if r == c { 1 } else { 2 }).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let key = if row <= col { (row as u32, col as u32) } else { (col as u32, row as u32) };
        self.triplets
            .binary_search_by_key(&key, |&(r, c, _)| (r, c))
            .map(|k| self.triplets[k].2)
            .unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(r, c, v) in &self.triplets {
            if r == c {
                d[r as usize] = v;
            }
        }
        d
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut a = Mat::<f64>::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.triplets {
            a[(r as usize, c as usize)] = v;
            a[(c as usize, r as usize)] = v;
        }
        a
    }

    /// Only the lower triangle (diagonal included) is filled; enough for the eigensolver.
    pub(crate) fn to_dense_lower(&self) -> Mat<f64> {
        let mut a = Mat::<f64>::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.triplets {
            a[(c as usize, r as usize)] = v;
        }
        a
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "vector length must match the matrix dimension");
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.triplets {
            let (r, c) = (r as usize, c as usize);
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.triplets.iter().fold(0.0, |m, &(_, _, v)| m.max(v.abs()))
    }

    /// Frobenius norm of the full matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.triplets
            .iter()
            .map(|&(r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> SymmetricMatrix {
        let t = self.triplets.iter().map(|&(r, c, v)| (r, c, v * factor)).collect();
        Self::from_sorted_parts(self.dim, t)
    }

    /// Positions of stored nonzeros in the upper triangle.
    pub fn sparsity_pattern(&self) -> BTreeSet<(usize, usize)> {
        self.triplets.iter().map(|&(r, c, _)| (r as usize, c as usize)).collect()
    }

    /// Writes `row,col,value` lines (upper triangle, zero-based) under a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# dim={}", self.dim)?;
        writeln!(w, "row,col,value")?;
        for &(r, c, v) in &self.triplets {
            writeln!(w, "{r},{c},{v:e}")?;
        }
        Ok(())
    }

    /// Parses the format of [`write_csv`](Self::write_csv). Other `#` lines are ignored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut t = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("dim=") {
                    dim = Some(v.trim().parse().map_err(|_| {
                        Error::Parse(format!("line {}: bad dimension {v:?}", lineno + 1))
                    })?);
                }
                continue;
            }
            if line == "row,col,value" {
                continue;
            }
            let mut it = line.split(',');
            let (Some(a), Some(b), Some(c), None) = (it.next(), it.next(), it.next(), it.next()) else {
                return Err(Error::Parse(format!("line {}: expected three fields", lineno + 1)));
            };
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
            let row: usize = a.trim().parse().map_err(|_| bad("row"))?;
            let col: usize = b.trim().parse().map_err(|_| bad("column"))?;
            let val: f64 = c.trim().parse().map_err(|_| bad("value"))?;
            t.push((row, col, val));
        }
        let dim = dim.ok_or_else(|| Error::Parse("missing '# dim=' header".into()))?;
        Self::from_triplets(dim, t)
    }

    /// Little-endian dump: `u64 dim, u64 nnz`, then `nnz` records of `u32 row, u32 col, f64 value`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.triplets.len() as u64).to_le_bytes())?;
        for &(r, c, v) in &self.triplets {
            w.write_all(&r.to_le_bytes())?;
            w.write_all(&c.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut u64buf = [0u8; 8];
        let mut read_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut u64buf)
                .map_err(|_| Error::Parse("truncated header".into()))?;
            Ok(u64::from_le_bytes(u64buf))
        };
        let dim = read_u64(&mut r)?;
        let nnz = read_u64(&mut r)?;
        if dim > u32::MAX as u64 {
            return Err(Error::Parse(format!("dimension {dim} too large")));
        }
        let mut t = Vec::new();
        let mut rec = [0u8; 16];
        for k in 0..nnz {
            r.read_exact(&mut rec)
                .map_err(|_| Error::Parse(format!("truncated at record {k} of {nnz}")))?;
            let row = u32::from_le_bytes(rec[0..4].try_into().unwrap()) as usize;
            let col = u32::from_le_bytes(rec[4..8].try_into().unwrap()) as usize;
            let val = f64::from_le_bytes(rec[8..16].try_into().unwrap());
            t.push((row, col, val));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Parse("trailing bytes after the last record".into()));
        }
        Self::from_triplets(dim as usize, t)
    }
}
