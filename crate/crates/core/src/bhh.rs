//! The Bose-Hubbard Hamiltonian on a chain, in the site (interaction) basis or
//! in the basis of single-particle hopping eigenmodes (tunneling basis).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assemble::{annihilate_pair, assemble, create_pair, hop};
use crate::error::{Error, Result};
use crate::fock::{BasisKind, Boundary, SectorBasis};
use crate::matrix::SymmetricMatrix;

/// Hamiltonian parameters. The scaled tunneling strength is `J / (U N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BhhParams {
    pub j: f64,
    pub u: f64,
    pub n: usize,
    pub l: usize,
    pub bc: Boundary,
    pub basis: BasisKind,
}

impl BhhParams {
    /// Parameters at scaled tunneling strength `eta` in units where `U = 1`.
    pub fn from_eta(eta: f64, n: usize, l: usize, bc: Boundary, basis: BasisKind) -> Self {
        BhhParams { j: eta * n as f64, u: 1.0, n, l, bc, basis }
    }

    pub fn eta(&self) -> f64 {
        self.j / (self.u * self.n as f64)
    }

    fn check(&self, b: &SectorBasis, kind: BasisKind) -> Result<()> {
        if self.basis != kind {
            return Err(Error::SectorMismatch(format!(
                "parameters ask for the {} basis",
                self.basis
            )));
        }
        if b.kind() != kind {
            return Err(Error::SectorMismatch(format!(
                "sector basis counts {} modes, expected {kind}",
                b.kind()
            )));
        }
        let s = b.spec();
        if s.bc != self.bc || s.n != self.n || s.l != self.l {
            return Err(Error::SectorMismatch(format!(
                "sector {} does not match N={}, L={}, {}",
                s.label(),
                self.n,
                self.l,
                self.bc
            )));
        }
        if !(self.j.is_finite() && self.u.is_finite()) {
            return Err(Error::Domain("J and U must be finite".into()));
        }
        Ok(())
    }
}

/// Builds the matrix of the Hamiltonian in `b`, dispatching on `p.basis`.
pub fn build_h(p: &BhhParams, b: &SectorBasis) -> Result<SymmetricMatrix> {
    match p.basis {
        BasisKind::Interaction => build_interaction_h(p, b),
        BasisKind::Tunneling => build_tunneling_h(p, b),
    }
}

/// Nearest-neighbour bonds as 0-based site pairs.
fn bonds(bc: Boundary, l: usize) -> Vec<(usize, usize)> {
    match bc {
        Boundary::Hwbc => (0..l.saturating_sub(1)).map(|j| (j, j + 1)).collect(),
        Boundary::Pbc => (0..l).map(|j| (j, (j + 1) % l)).collect(),
    }
}

/// `H = -J Σ_bonds (a†_j a_{j+1} + h.c.) + (U/2) Σ_j n_j (n_j - 1)` in site occupations.
pub fn build_interaction_h(p: &BhhParams, b: &SectorBasis) -> Result<SymmetricMatrix> {
    p.check(b, BasisKind::Interaction)?;
    let bonds = bonds(p.bc, p.l);
    let (j, u) = (p.j, p.u);
    let mut work = vec![0u8; p.l];
    Ok(assemble(b, |occ, emit| {
        let diag: f64 = occ.iter().map(|&n| (n as f64) * (n as f64 - 1.0)).sum::<f64>() * 0.5 * u;
        emit(occ, diag);
        if j == 0.0 {
            return;
        }
        for &(a, c) in &bonds {
            for (to, from) in [(a, c), (c, a)] {
                work.copy_from_slice(occ);
                let amp = hop(&mut work, to, from);
                if amp != 0.0 {
                    emit(&work, -j * amp);
                }
            }
        }
    }))
}

/// Hopping-mode angle `φ(k)` for mode slot `slot` (see [`BasisKind::Tunneling`]).
pub fn mode_angle(bc: Boundary, l: usize, slot: usize) -> f64 {
    match bc {
        Boundary::Pbc => 2.0 * PI * slot as f64 / l as f64,
        Boundary::Hwbc => PI * (slot + 1) as f64 / (l + 1) as f64,
    }
}

/// Overlap tensor of four hopping eigenmodes, indices `k, l, m, n` in `1..=L`.
///
/// With it the on-site interaction reads `U Σ Δ b†_k b†_l b_m b_n`. Periodic
/// chains conserve quasimomentum, `k + l = m + n (mod L)`, with weight `1/(2L)`.
/// Hard walls give the signed count of `k ± l = ±m ± n (mod 2(L+1))` over `4(L+1)`.
pub fn delta_tensor(k: usize, l: usize, m: usize, n: usize, modes: usize, bc: Boundary) -> Result<f64> {
    for idx in [k, l, m, n] {
        if idx == 0 || idx > modes {
            return Err(Error::IndexOutOfRange { index: idx, max: modes });
        }
    }
    Ok(delta_unchecked(k as i64, l as i64, m as i64, n as i64, modes as i64, bc))
}

fn delta_unchecked(k: i64, l: i64, m: i64, n: i64, modes: i64, bc: Boundary) -> f64 {
    match bc {
        Boundary::Pbc => {
            if (k + l - m - n).rem_euclid(modes) == 0 {
                1.0 / (2 * modes) as f64
            } else {
                0.0
            }
        }
        Boundary::Hwbc => {
            let period = 2 * (modes + 1);
            let mut count = 0i64;
            for s1 in [1i64, -1] {
                for s2 in [1i64, -1] {
                    for s3 in [1i64, -1] {
                        if (k + s1 * l - s2 * m - s3 * n).rem_euclid(period) == 0 {
                            count += s1 * s2 * s3;
                        }
                    }
                }
            }
            count as f64 / (4 * (modes + 1)) as f64
        }
    }
}

/// Nonzero `(k, l, Δ)` for each annihilated pair `(m, n)`, all as 0-based slots.
fn interaction_table(bc: Boundary, l: usize) -> Vec<Vec<(u8, u8, f64)>> {
    // slot -> 1-based mode label; periodic slot 0 is k = L
    let label = |s: usize| -> i64 {
        match bc {
            Boundary::Hwbc => s as i64 + 1,
            Boundary::Pbc => if s == 0 { l as i64 } else { s as i64 },
        }
    };
    let mut table = vec![Vec::new(); l * l];
    for m in 0..l {
        for n in 0..l {
            for k in 0..l {
                for q in 0..l {
                    let d = delta_unchecked(label(k), label(q), label(m), label(n), l as i64, bc);
                    if d != 0.0 {
                        table[m * l + n].push((k as u8, q as u8, d));
                    }
                }
            }
        }
    }
    table
}

/// `H = -2J Σ_k cos φ(k) ñ_k + U Σ Δ b†_k b†_l b_m b_n` in hopping-mode occupations.
pub fn build_tunneling_h(p: &BhhParams, b: &SectorBasis) -> Result<SymmetricMatrix> {
    p.check(b, BasisKind::Tunneling)?;
    let l = p.l;
    let kinetic: Vec<f64> = (0..l).map(|s| -2.0 * p.j * mode_angle(p.bc, l, s).cos()).collect();
    let table = if p.u != 0.0 { interaction_table(p.bc, l) } else { Vec::new() };
    let u = p.u;
    let mut work = vec![0u8; l];
    let mut target = vec![0u8; l];
    Ok(assemble(b, |occ, emit| {
        let diag: f64 = occ.iter().zip(&kinetic).map(|(&n, &e)| n as f64 * e).sum();
        emit(occ, diag);
        if u == 0.0 {
            return;
        }
        for m in 0..l {
            if occ[m] == 0 {
                continue;
            }
            for n in 0..l {
                let entries = &table[m * l + n];
                if entries.is_empty() {
                    continue;
                }
                work.copy_from_slice(occ);
                let down = annihilate_pair(&mut work, m, n);
                if down == 0.0 {
                    continue;
                }
                for &(k, q, d) in entries {
                    target.copy_from_slice(&work);
                    let up = create_pair(&mut target, k as usize, q as usize);
                    emit(&target, u * d * down * up);
                }
            }
        }
    }))
}
