//! Projection of a symmetry-commuting operator onto a sector basis.

use crate::fock::{Location, SectorBasis};
use crate::matrix::SymmetricMatrix;

/// Builds the sector matrix of an operator given by its action on Fock states.
///
/// `apply(state, emit)` must call `emit(target, coefficient)` once per term of
/// `H|state⟩`, where `target` is a Fock state with the same particle number.
/// The operator has to commute with the sector's symmetry group; then
/// `⟨r̃'|H|r̃⟩ = norm(r) Σ_t c_t ⟨r̃'|t⟩`, and only the upper triangle is kept.
pub(crate) fn assemble<F>(basis: &SectorBasis, mut apply: F) -> SymmetricMatrix
where
    F: FnMut(&[u8], &mut dyn FnMut(&[u8], f64)),
{
    let l = basis.modes();
    let mut canon = vec![0u8; l];
    let mut scratch = vec![0u8; l];
    // (row, sum, sum of magnitudes) for the current column
    let mut column: Vec<(u32, f64, f64)> = Vec::new();
    let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
    for col in 0..basis.dim() {
        let rep = basis.rep(col);
        let norm = basis.norm(col);
        column.clear();
        apply(rep, &mut |target: &[u8], coeff: f64| {
            if coeff == 0.0 {
                return;
            }
            if let Location::Member { index, amplitude } =
                basis.locate_with(target, &mut canon, &mut scratch)
            {
                if index <= col {
                    let v = coeff * amplitude * norm;
                    column.push((index as u32, v, v.abs()));
                }
            }
        });
        column.sort_by_key(|&(r, _, _)| r);
        let mut k = 0;
        while k < column.len() {
            let row = column[k].0;
            let (mut sum, mut mag) = (0.0, 0.0);
            while k < column.len() && column[k].0 == row {
                sum += column[k].1;
                mag += column[k].2;
                k += 1;
            }
            // terms that cancel by symmetry leave only rounding noise behind
            if sum.abs() > 64.0 * f64::EPSILON * mag {
                triplets.push((row, col as u32, sum));
            }
        }
    }
    SymmetricMatrix::from_upper_unchecked(basis.dim(), triplets)
}

/// Applies `b†_to b_from` to `occ` in place, returning the bosonic factor (0 if `occ[from] == 0`).
#[inline]
pub(crate) fn hop(occ: &mut [u8], to: usize, from: usize) -> f64 {
    let nf = occ[from];
    if nf == 0 {
        return 0.0;
    }
    let mut amp = nf as f64;
    occ[from] -= 1;
    amp *= (occ[to] as f64) + 1.0;
    occ[to] += 1;
    amp.sqrt()
}

/// Applies `b_k b_l` (annihilating `l` first) in place; returns the factor or 0.
#[inline]
pub(crate) fn annihilate_pair(occ: &mut [u8], k: usize, l: usize) -> f64 {
    let nl = occ[l];
    if nl == 0 {
        return 0.0;
    }
    occ[l] -= 1;
    let nk = occ[k];
    if nk == 0 {
        occ[l] += 1;
        return 0.0;
    }
    occ[k] -= 1;
    ((nl as f64) * (nk as f64)).sqrt()
}

/// Applies `b†_i b†_j` in place; returns the factor.
#[inline]
pub(crate) fn create_pair(occ: &mut [u8], i: usize, j: usize) -> f64 {
    occ[j] += 1;
    let a = occ[j] as f64;
    occ[i] += 1;
    (a * occ[i] as f64).sqrt()
}
