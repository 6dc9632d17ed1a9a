//! Random-matrix ensembles: the bosonic two-body embedded GOE and plain GOE.

use std::collections::BTreeSet;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::assemble::{annihilate_pair, assemble, create_pair, hop};
use crate::error::{Error, Result};
use crate::fock::{BasisKind, SectorBasis, Symmetry};
use crate::matrix::SymmetricMatrix;

/// Deterministic generator for realization `stream` of an ensemble seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EgoeParams {
    pub n: usize,
    pub l: usize,
    /// Two-body strength.
    pub lambda: f64,
    /// Draw couplings invariant under the chain reflection.
    pub reflection_symmetric: bool,
    pub seed: u64,
}

impl EgoeParams {
    pub fn new(n: usize, l: usize, seed: u64) -> Self {
        EgoeParams { n, l, lambda: 1.0, reflection_symmetric: true, seed }
    }
}

/// A dense GOE matrix.
#[derive(Clone, Debug)]
pub struct GoeSample {
    pub dim: usize,
    pub matrix: Mat<f64>,
    pub seed: u64,
}

/// GOE matrix with independent `N(0, 1 + δ_ij)` entries for `i <= j`.
pub fn sample_goe(dim: usize, seed: u64) -> GoeSample {
    sample_goe_stream(dim, seed, 0)
}

pub fn sample_goe_stream(dim: usize, seed: u64, stream: u64) -> GoeSample {
    let mut rng = rng_for(seed, stream);
    GoeSample { dim, matrix: goe_matrix(dim, &mut rng), seed }
}

fn goe_matrix(dim: usize, rng: &mut impl Rng) -> Mat<f64> {
    let mut a = Mat::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let z: f64 = rng.sample(StandardNormal);
            let v = if i == j { z * std::f64::consts::SQRT_2 } else { z };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// Index of the unordered pair `i <= j` among `L (L + 1) / 2` pairs, row-major.
fn pair_index(i: usize, j: usize, l: usize) -> usize {
    debug_assert!(i <= j && j < l);
    i * l - i * (i + 1) / 2 + j
}

/// One- and two-body coupling matrices of an embedded ensemble member.
///
/// `one_body` is a symmetric `L x L` matrix; `two_body` is symmetric over the
/// `L (L + 1) / 2` unordered mode pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Couplings {
    l: usize,
    pairs: Vec<(usize, usize)>,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
}

impl Couplings {
    pub fn from_parts(l: usize, one_body: Vec<f64>, two_body: Vec<f64>) -> Result<Self> {
        let p = l * (l + 1) / 2;
        if one_body.len() != l * l || two_body.len() != p * p {
            return Err(Error::Domain(format!(
                "coupling sizes {} and {} do not fit L = {l}",
                one_body.len(),
                two_body.len()
            )));
        }
        for (a, na) in [(&one_body, l), (&two_body, p)] {
            for i in 0..na {
                for j in 0..i {
                    if a[i * na + j] != a[j * na + i] {
                        return Err(Error::Domain("coupling matrices must be symmetric".into()));
                    }
                }
            }
        }
        Ok(Couplings { l, pairs: pairs(l), one_body, two_body })
    }

    /// Draws couplings from the ensemble; with `reflection_symmetric` only one
    /// entry per orbit of `i -> L - 1 - i` is drawn and the others copy it.
    pub fn sample(l: usize, reflection_symmetric: bool, rng: &mut impl Rng) -> Self {
        let pairs = pairs(l);
        let np = pairs.len();
        let mirror = |i: usize| l - 1 - i;
        let mut one_body = vec![0.0; l * l];
        for i in 0..l {
            for j in i..l {
                let (mi, mj) = (mirror(j), mirror(i));
                let v = if reflection_symmetric && (mi, mj) < (i, j) {
                    one_body[mi * l + mj]
                } else {
                    let z: f64 = rng.sample(StandardNormal);
                    if i == j { z * std::f64::consts::SQRT_2 } else { z }
                };
                one_body[i * l + j] = v;
                one_body[j * l + i] = v;
            }
        }
        let mirror_pair = |p: usize| {
            let (i, j) = pairs[p];
            pair_index(mirror(j), mirror(i), l)
        };
        let mut two_body = vec![0.0; np * np];
        for a in 0..np {
            for b in a..np {
                let (ma, mb) = (mirror_pair(a), mirror_pair(b));
                let (ma, mb) = (ma.min(mb), ma.max(mb));
                let v = if reflection_symmetric && (ma, mb) < (a, b) {
                    two_body[ma * np + mb]
                } else {
                    let z: f64 = rng.sample(StandardNormal);
                    if a == b { z * std::f64::consts::SQRT_2 } else { z }
                };
                two_body[a * np + b] = v;
                two_body[b * np + a] = v;
            }
        }
        Couplings { l, pairs, one_body, two_body }
    }

    pub fn modes(&self) -> usize {
        self.l
    }

    pub fn one_body(&self, i: usize, j: usize) -> f64 {
        self.one_body[i * self.l + j]
    }

    /// Two-body coupling between pairs `(i, j)` and `(k, l)`, in either order within a pair.
    pub fn two_body(&self, ij: (usize, usize), kl: (usize, usize)) -> f64 {
        let a = pair_index(ij.0.min(ij.1), ij.0.max(ij.1), self.l);
        let b = pair_index(kl.0.min(kl.1), kl.0.max(kl.1), self.l);
        self.two_body[a * self.pairs.len() + b]
    }

    /// `H1 + lambda H2` in `basis`.
    ///
    /// `H1 = Σ_ij G1_ij b†_i b_j` and
    /// `H2 = Σ_{i<=j, k<=l} G2_{ij,kl} b†_i b†_j b_k b_l / sqrt((1 + δ_ij)(1 + δ_kl))`.
    pub fn hamiltonian(&self, lambda: f64, basis: &SectorBasis) -> Result<SymmetricMatrix> {
        if basis.modes() != self.l {
            return Err(Error::SectorMismatch(format!(
                "couplings have {} modes, basis has {}",
                self.l,
                basis.modes()
            )));
        }
        let l = self.l;
        let np = self.pairs.len();
        let weight: Vec<f64> = self
            .pairs
            .iter()
            .map(|&(i, j)| if i == j { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 })
            .collect();
        let mut work = vec![0u8; l];
        let mut target = vec![0u8; l];
        Ok(assemble(basis, |occ, emit| {
            let diag: f64 = (0..l).map(|i| self.one_body[i * l + i] * occ[i] as f64).sum();
            emit(occ, diag);
            for j in 0..l {
                if occ[j] == 0 {
                    continue;
                }
                for i in 0..l {
                    if i == j {
                        continue;
                    }
                    let g = self.one_body[i * l + j];
                    work.copy_from_slice(occ);
                    let amp = hop(&mut work, i, j);
                    emit(&work, g * amp);
                }
            }
            if lambda == 0.0 {
                return;
            }
            for (b, &(k, q)) in self.pairs.iter().enumerate() {
                if occ[k] == 0 || occ[q] == 0 {
                    continue;
                }
                work.copy_from_slice(occ);
                let down = annihilate_pair(&mut work, k, q);
                if down == 0.0 {
                    continue;
                }
                let down = down * weight[b] * lambda;
                for (a, &(i, j)) in self.pairs.iter().enumerate() {
                    target.copy_from_slice(&work);
                    let up = create_pair(&mut target, i, j);
                    emit(&target, self.two_body[a * np + b] * weight[a] * up * down);
                }
            }
        }))
    }
}

fn pairs(l: usize) -> Vec<(usize, usize)> {
    (0..l).flat_map(|i| (i..l).map(move |j| (i, j))).collect()
}

fn check_basis(p: &EgoeParams, b: &SectorBasis) -> Result<()> {
    let s = b.spec();
    if b.kind() != BasisKind::Interaction {
        return Err(Error::SectorMismatch(
            "the ensemble is defined over site occupations".into(),
        ));
    }
    if s.n != p.n || s.l != p.l {
        return Err(Error::SectorMismatch(format!(
            "sector {} does not match N={}, L={}",
            s.label(),
            p.n,
            p.l
        )));
    }
    match s.symmetry {
        Symmetry::Full => Ok(()),
        Symmetry::Parity(_) if p.reflection_symmetric => Ok(()),
        Symmetry::Parity(_) => Err(Error::SectorMismatch(
            "parity sectors need reflection-symmetric couplings".into(),
        )),
        Symmetry::Momentum { .. } => Err(Error::SectorMismatch(
            "the ensemble has no translation symmetry".into(),
        )),
    }
}

/// Ensemble member for stream 0 of `p.seed`.
pub fn sample_egoe(p: &EgoeParams, b: &SectorBasis) -> Result<SymmetricMatrix> {
    sample_egoe_stream(p, b, 0)
}

/// Ensemble member `stream` of `p.seed`; streams are independent and reproducible.
pub fn sample_egoe_stream(p: &EgoeParams, b: &SectorBasis, stream: u64) -> Result<SymmetricMatrix> {
    check_basis(p, b)?;
    if !(p.lambda.is_finite() && p.lambda >= 0.0) {
        return Err(Error::Domain(format!("lambda = {} must be finite and >= 0", p.lambda)));
    }
    let mut rng = rng_for(p.seed, stream);
    Couplings::sample(p.l, p.reflection_symmetric, &mut rng).hamiltonian(p.lambda, b)
}

/// Structurally nonzero positions (upper triangle).
pub fn sparsity_pattern(m: &SymmetricMatrix) -> BTreeSet<(usize, usize)> {
    m.sparsity_pattern()
}
