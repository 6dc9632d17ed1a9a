//! Dense diagonalization, scaled energies, density of states and eigenstate selection.

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::linalg::evd::tridiag;
use faer::linalg::householder;
use faer::{Conj, Mat, Par, Side};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Largest dimension handed to the dense eigensolver unless overridden.
pub const DEFAULT_DENSE_CAP: usize = 16_384;

/// Eigenvalues (ascending), scaled energies and, optionally, some or all eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eps: Vec<f64>,
    e_min: f64,
    e_max: f64,
    vectors: Option<Mat<f64>>,
    // eigenvalue index of each stored column, ascending
    vector_index: Vec<usize>,
    degenerate_clusters: usize,
}

impl Spectrum {
    /// Spectrum without eigenvectors; `values` are sorted here.
    pub fn from_eigenvalues(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("eigenvalues must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self::assemble(values, None, Vec::new()))
    }

    fn assemble(eigenvalues: Vec<f64>, vectors: Option<Mat<f64>>, vector_index: Vec<usize>) -> Self {
        let e_min = eigenvalues.first().copied().unwrap_or(0.0);
        let e_max = eigenvalues.last().copied().unwrap_or(0.0);
        let width = e_max - e_min;
        let eps = if width > 0.0 {
            let mut eps: Vec<f64> = eigenvalues.iter().map(|&e| (e - e_min) / width).collect();
            // pin the endpoints against rounding
            eps[0] = 0.0;
            *eps.last_mut().unwrap() = 1.0;
            eps
        } else {
            Vec::new()
        };
        let degenerate_clusters = count_clusters(&eigenvalues);
        Spectrum { eigenvalues, eps, e_min, e_max, vectors, vector_index, degenerate_clusters }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    /// Scaled energies `(E - E_min) / (E_max - E_min)`.
    pub fn eps(&self) -> Result<&[f64]> {
        if self.eps.len() != self.eigenvalues.len() || self.eigenvalues.is_empty() {
            return Err(Error::DegenerateRange);
        }
        Ok(&self.eps)
    }

    /// Energy at scaled energy `eps`.
    pub fn energy_at(&self, eps: f64) -> f64 {
        self.e_min + eps * (self.e_max - self.e_min)
    }

    /// Number of groups of numerically coincident eigenvalues.
    pub fn degenerate_clusters(&self) -> usize {
        self.degenerate_clusters
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    /// Eigenvalue indices whose eigenvectors are stored.
    pub fn vector_indices(&self) -> &[usize] {
        &self.vector_index
    }

    /// Eigenvector of eigenvalue `k`, if stored.
    pub fn vector(&self, k: usize) -> Option<&[f64]> {
        let v = self.vectors.as_ref()?;
        let col = self.vector_index.binary_search(&k).ok()?;
        Some(v.col_as_slice(col))
    }

    /// Drops every stored eigenvector not listed in `keep`.
    pub fn retain_vectors(&mut self, keep: &[usize]) {
        let Some(v) = self.vectors.take() else {
            return;
        };
        let mut cols: Vec<(usize, usize)> = keep
            .iter()
            .filter_map(|&k| self.vector_index.binary_search(&k).ok().map(|c| (k, c)))
            .collect();
        cols.sort_unstable();
        cols.dedup();
        let kept = Mat::from_fn(v.nrows(), cols.len(), |i, j| v[(i, cols[j].1)]);
        self.vector_index = cols.iter().map(|&(k, _)| k).collect();
        self.vectors = Some(kept);
    }
}

fn count_clusters(values: &[f64]) -> usize {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    let mut clusters = 0;
    let mut in_cluster = false;
    for w in values.windows(2) {
        if w[1] - w[0] <= tol {
            if !in_cluster {
                clusters += 1;
                in_cluster = true;
            }
        } else {
            in_cluster = false;
        }
    }
    clusters
}

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::Capacity { dim: dim as u128, max: cap as u64 });
    }
    Ok(())
}

/// All eigenvalues and, with `want_vectors`, all eigenvectors.
pub fn full_diagonalize(m: &SymmetricMatrix, want_vectors: bool) -> Result<Spectrum> {
    full_diagonalize_capped(m, want_vectors, DEFAULT_DENSE_CAP)
}

pub fn full_diagonalize_capped(m: &SymmetricMatrix, want_vectors: bool, cap: usize) -> Result<Spectrum> {
    check_cap(m.dim(), cap)?;
    diagonalize_dense(&m.to_dense_lower(), want_vectors)
}

/// Diagonalizes a dense symmetric matrix; only its lower triangle is read.
pub fn diagonalize_dense(a: &Mat<f64>, want_vectors: bool) -> Result<Spectrum> {
    if a.nrows() != a.ncols() {
        return Err(Error::Domain(format!("matrix is {}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Spectrum::assemble(Vec::new(), None, Vec::new()));
    }
    if want_vectors {
        let evd = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NonConvergence(format!("{e:?}")))?;
        let values: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
        let vectors = evd.U().to_owned();
        check_sorted(&values)?;
        Ok(Spectrum::assemble(values, Some(vectors), (0..n).collect()))
    } else {
        let values = a
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::NonConvergence(format!("{e:?}")))?;
        check_sorted(&values)?;
        Ok(Spectrum::assemble(values, None, Vec::new()))
    }
}

fn check_sorted(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NonConvergence("eigenvalues are not finite and ascending".into()));
    }
    Ok(())
}

/// All eigenvalues and the eigenvectors picked by `select`.
///
/// Works on a single dense copy of the matrix: Householder reduction to
/// tridiagonal form, implicit-shift QL for the eigenvalues, inverse iteration
/// for the requested eigenvectors and back-transformation. Memory stays at
/// one `dim x dim` array, which is what makes dimensions around 10^4 feasible.
pub fn diagonalize_selected<F>(m: &SymmetricMatrix, cap: usize, select: F) -> Result<Spectrum>
where
    F: FnOnce(&Spectrum) -> Result<Vec<usize>>,
{
    check_cap(m.dim(), cap)?;
    let n = m.dim();
    if n == 0 {
        return Ok(Spectrum::assemble(Vec::new(), None, Vec::new()));
    }
    let mut a = m.to_dense_lower();
    let bs = faer::linalg::qr::no_pivoting::factor::recommended_block_size::<f64>(n, n);
    let mut hh = Mat::<f64>::zeros(bs, n.saturating_sub(1));
    {
        let req = tridiag::tridiag_in_place_scratch::<f64>(n, Par::Seq, Default::default());
        let mut buf = MemBuffer::new(req);
        tridiag::tridiag_in_place(a.as_mut(), hh.as_mut(), Par::Seq, MemStack::new(&mut buf), Default::default());
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
    let values = tridiagonal_eigenvalues(&diag, &off)?;
    let mut spectrum = Spectrum::assemble(values, None, Vec::new());

    let mut wanted = select(&spectrum)?;
    wanted.sort_unstable();
    wanted.dedup();
    if let Some(&k) = wanted.iter().find(|&&k| k >= n) {
        return Err(Error::Domain(format!("eigenvalue index {k} out of range for dimension {n}")));
    }
    if wanted.is_empty() {
        return Ok(spectrum);
    }
    let mut z = Mat::<f64>::zeros(n, wanted.len());
    let lambdas: Vec<f64> = wanted.iter().map(|&k| spectrum.eigenvalues[k]).collect();
    tridiagonal_eigenvectors(&diag, &off, &lambdas, &mut z)?;
    if n > 1 {
        let req = householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<f64>(
            n - 1,
            bs,
            wanted.len(),
        );
        let mut buf = MemBuffer::new(StackReq::any_of(&[req]));
        householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
            a.as_ref().submatrix(1, 0, n - 1, n - 1),
            hh.as_ref(),
            Conj::No,
            z.as_mut().subrows_mut(1, n - 1),
            Par::Seq,
            MemStack::new(&mut buf),
        );
    }
    drop(a);
    spectrum.vectors = Some(z);
    spectrum.vector_index = wanted;
    Ok(spectrum)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e`, by the implicit-shift QL method, ascending.
pub fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if e.len() + 1 != n {
        return Err(Error::Domain("off-diagonal must be one shorter than the diagonal".into()));
    }
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            // look for a negligible off-diagonal element to split the matrix
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence(format!("QL iteration stalled at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("non-finite eigenvalue".into()));
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvectors of a symmetric tridiagonal matrix for the given (accurate,
/// ascending) eigenvalues by inverse iteration, written into the columns of `z`.
///
/// Vectors whose eigenvalues lie within `1e-3 ||T||` of each other are kept
/// mutually orthogonal by Gram-Schmidt inside the iteration.
pub fn tridiagonal_eigenvectors(d: &[f64], e: &[f64], lambdas: &[f64], z: &mut Mat<f64>) -> Result<()> {
    let n = d.len();
    assert_eq!(z.nrows(), n);
    assert_eq!(z.ncols(), lambdas.len());
    let norm = (0..n)
        .map(|i| {
            d[i].abs()
                + if i > 0 { e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { e[i].abs() } else { 0.0 }
        })
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    if n == 1 {
        z[(0, 0)] = 1.0;
        return Ok(());
    }
    let cluster_tol = 1e-3 * norm;
    let pivot_floor = f64::EPSILON * norm;
    let mut x = vec![0.0; n];
    let mut lu = TridiagLu::new(n);
    for (col, &lambda) in lambdas.iter().enumerate() {
        lu.factor(d, e, lambda, pivot_floor);
        // deterministic, non-degenerate start vector
        let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (col as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        for xi in x.iter_mut() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            *xi = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
        let first_close = lambdas[..col].iter().position(|&l| lambda - l <= cluster_tol).unwrap_or(col);
        let mut converged = false;
        for _ in 0..8 {
            lu.solve(&mut x);
            for prev in first_close..col {
                let v = z.col_as_slice(prev);
                let dot: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= dot * vi);
            }
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(Error::NonConvergence("inverse iteration broke down".into()));
            }
            x.iter_mut().for_each(|v| *v /= nrm);
            let res = tridiag_residual(d, e, lambda, &x);
            if res <= 1e-12 * norm * (n as f64).sqrt() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(format!(
                "inverse iteration did not converge for eigenvalue {lambda}"
            )));
        }
        z.col_as_slice_mut(col).copy_from_slice(&x);
    }
    Ok(())
}

fn tridiag_residual(d: &[f64], e: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let n = d.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut y = (d[i] - lambda) * x[i];
        if i > 0 {
            y += e[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            y += e[i] * x[i + 1];
        }
        s += y * y;
    }
    s.sqrt()
}

/// LU factorization with partial pivoting of `T - lambda I` (tridiagonal).
struct TridiagLu {
    dl: Vec<f64>,
    dd: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn new(n: usize) -> Self {
        TridiagLu {
            dl: vec![0.0; n.saturating_sub(1)],
            dd: vec![0.0; n],
            du: vec![0.0; n.saturating_sub(1)],
            du2: vec![0.0; n.saturating_sub(2)],
            swap: vec![false; n.saturating_sub(1)],
        }
    }

    fn factor(&mut self, d: &[f64], e: &[f64], lambda: f64, floor: f64) {
        let n = d.len();
        for i in 0..n {
            self.dd[i] = d[i] - lambda;
        }
        self.dl.copy_from_slice(e);
        self.du.copy_from_slice(e);
        self.du2.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n - 1 {
            if self.dd[i].abs() >= self.dl[i].abs() {
                self.swap[i] = false;
                if self.dd[i] == 0.0 {
                    self.dd[i] = floor;
                }
                let fact = self.dl[i] / self.dd[i];
                self.dl[i] = fact;
                self.dd[i + 1] -= fact * self.du[i];
            } else {
                self.swap[i] = true;
                let fact = self.dd[i] / self.dl[i];
                self.dd[i] = self.dl[i];
                self.dl[i] = fact;
                let temp = self.du[i];
                self.du[i] = self.dd[i + 1];
                self.dd[i + 1] = temp - fact * self.dd[i + 1];
                if i + 2 < n {
                    self.du2[i] = self.du[i + 1];
                    self.du[i + 1] = -fact * self.du[i + 1];
                }
            }
        }
        for v in self.dd.iter_mut() {
            if v.abs() < floor {
                *v = if *v < 0.0 { -floor } else { floor };
            }
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swap[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i + 1];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.dd[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.dd[i];
        }
    }
}

/// Residual `||A v - λ v||` of stored eigenpair `k`.
pub fn residual_norm(m: &SymmetricMatrix, s: &Spectrum, k: usize) -> Option<f64> {
    let v = s.vector(k)?;
    let lambda = s.eigenvalues()[k];
    let av = m.matvec(v);
    Some(av.iter().zip(v).map(|(a, x)| (a - lambda * x).powi(2)).sum::<f64>().sqrt())
}

/// Indices of the `k` levels closest in scaled energy to `eps_target`,
/// nearest first, ties going to the lower level.
pub fn select_near_target(s: &Spectrum, eps_target: f64, k: usize) -> Result<Vec<usize>> {
    let eps = s.eps()?;
    Ok(nearest_indices(eps, eps_target, k))
}

pub(crate) fn nearest_indices(eps: &[f64], target: f64, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eps.len()).collect();
    idx.sort_by(|&a, &b| {
        (eps[a] - target)
            .abs()
            .total_cmp(&(eps[b] - target).abs())
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Histogram of scaled energies on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DosHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Centre of the fullest bin (the lowest one on ties).
    pub eps_star: f64,
}

impl DosHistogram {
    /// Bins are right-open except the last, which also holds `eps == 1`.
    pub fn from_eps(eps: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Domain("need at least one bin".into()));
        }
        let mut counts = vec![0u64; bins];
        for &x in eps {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("scaled energy {x} outside [0, 1]")));
            }
            counts[bin_of(x, bins)] += 1;
        }
        let bin_edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut best = 0;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = i;
            }
        }
        Ok(DosHistogram { bin_edges, counts, eps_star: (best as f64 + 0.5) / bins as f64 })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bin index of `x` in `[0, 1]` split into `bins` equal right-open bins.
pub fn bin_of(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor() as usize).min(bins - 1)
}

pub fn dos_histogram(s: &Spectrum, bins: usize) -> Result<DosHistogram> {
    if s.dim() < 2 {
        return Err(Error::TooFew { need: 2, got: s.dim() });
    }
    DosHistogram::from_eps(s.eps()?, bins)
}
