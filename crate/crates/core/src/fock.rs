//! Bosonic Fock spaces and symmetry-adapted sector bases.
//!
//! A Fock state is an occupation vector of `n` bosons over `l` modes. The full
//! space is ordered reverse-lexicographically (`[n, 0, .., 0]` first,
//! `[0, .., 0, n]` last), which admits an O(l) ranking formula.
//!
//! Sector bases are built from orbit representatives (the lexicographically
//! smallest state of each orbit) under a group of signed mode permutations
//! with a one-dimensional real character. The same machinery covers reflection
//! and translation on lattice sites (interaction basis) and the induced action
//! on single-particle eigenmodes (tunneling basis).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest Fock-space dimension enumerated without an explicit override.
pub const DEFAULT_MAX_DIM: u64 = 1 << 25;

/// Occupation-number vector of bosons over a set of modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockState(Vec<u8>);

impl FockState {
    pub fn new(occ: Vec<u8>) -> Self {
        FockState(occ)
    }

    pub fn occ(&self) -> &[u8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn particles(&self) -> usize {
        self.0.iter().map(|&x| x as usize).sum()
    }

    /// Mirror image under `j -> L + 1 - j`.
    pub fn reflect(&self) -> FockState {
        let mut occ = self.0.clone();
        occ.reverse();
        FockState(occ)
    }

    /// Cyclic shift: the occupation of site `j` moves to site `j + shift (mod L)`.
    pub fn translate(&self, shift: isize) -> FockState {
        let l = self.0.len();
        if l == 0 {
            return self.clone();
        }
        let s = shift.rem_euclid(l as isize) as usize;
        let mut occ = vec![0u8; l];
        for (j, &n) in self.0.iter().enumerate() {
            occ[(j + s) % l] = n;
        }
        FockState(occ)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

impl From<Vec<u8>> for FockState {
    fn from(occ: Vec<u8>) -> Self {
        FockState(occ)
    }
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Dimension `C(n + l - 1, n)` of the space of `n` bosons on `l` modes.
pub fn fock_dim(n: usize, l: usize) -> u128 {
    if l == 0 {
        return u128::from(n == 0);
    }
    binomial((n + l - 1) as u64, n as u64).unwrap_or(u128::MAX)
}

fn check_dim(n: usize, l: usize, max_dim: u64) -> Result<usize> {
    if l == 0 {
        return Err(Error::InvalidState("a Fock space needs at least one mode".into()));
    }
    if n > u8::MAX as usize {
        return Err(Error::InvalidState(format!("{n} particles exceed the u8 occupation range")));
    }
    let dim = fock_dim(n, l);
    if dim > max_dim as u128 {
        return Err(Error::Capacity { dim, max: max_dim });
    }
    Ok(dim as usize)
}

/// Calls `f(rank, occ)` for every state of `n` bosons on `l` modes, in basis order.
pub fn for_each_state(n: usize, l: usize, mut f: impl FnMut(usize, &[u8])) {
    if l == 0 {
        return;
    }
    let mut occ = vec![0u8; l];
    occ[0] = n as u8;
    let mut rank = 0usize;
    loop {
        f(rank, &occ);
        rank += 1;
        // successor: last non-empty mode before the final one gives up a particle,
        // everything behind it collapses onto the next mode
        let Some(j) = (0..l.saturating_sub(1)).rev().find(|&j| occ[j] > 0) else {
            return;
        };
        let tail: u8 = occ[j + 1..].iter().sum();
        occ[j] -= 1;
        occ[j + 1..].iter_mut().for_each(|x| *x = 0);
        occ[j + 1] = tail + 1;
    }
}

/// All states of `n` bosons on `l` modes, in basis order.
pub fn enumerate_basis(n: usize, l: usize) -> Result<Vec<FockState>> {
    enumerate_basis_capped(n, l, DEFAULT_MAX_DIM)
}

pub fn enumerate_basis_capped(n: usize, l: usize, max_dim: u64) -> Result<Vec<FockState>> {
    let dim = check_dim(n, l, max_dim)?;
    let mut out = Vec::with_capacity(dim);
    for_each_state(n, l, |_, occ| out.push(FockState(occ.to_vec())));
    Ok(out)
}

/// Combinatorial ranking of Fock states in basis order.
#[derive(Clone, Debug)]
pub struct Ranker {
    n: usize,
    l: usize,
    // binom[m * (l + 1) + r] = C(m, r) for m <= n + l, r <= l
    binom: Vec<u64>,
}

impl Ranker {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        check_dim(n, l, u64::MAX)?;
        let rows = n + l + 1;
        let mut binom = vec![0u64; rows * (l + 1)];
        for m in 0..rows {
            for r in 0..=l.min(m) {
                binom[m * (l + 1) + r] = if r == 0 || r == m {
                    1
                } else {
                    binom[(m - 1) * (l + 1) + r - 1] + binom[(m - 1) * (l + 1) + r]
                };
            }
        }
        Ok(Ranker { n, l, binom })
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.c(self.n + self.l - 1, self.l - 1) as usize
    }

    #[inline]
    fn c(&self, m: usize, r: usize) -> u64 {
        if r > m {
            0
        } else {
            self.binom[m * (self.l + 1) + r]
        }
    }

    /// Rank of a state known to hold `n` particles on `l` modes.
    ///
    /// Counts the states that precede `occ`: at each position, every larger
    /// occupation with the same prefix comes first, and by the hockey-stick
    /// identity their completions add up to a single binomial.
    #[inline]
    pub fn rank_unchecked(&self, occ: &[u8]) -> usize {
        let mut remaining = self.n;
        let mut rank = 0u64;
        for (j, &nj) in occ[..self.l - 1].iter().enumerate() {
            let nj = nj as usize;
            let rest = self.l - 1 - j;
            if remaining > nj {
                rank += self.c(remaining - nj - 1 + rest, rest);
            }
            remaining -= nj;
        }
        rank as usize
    }

    pub fn rank(&self, occ: &[u8]) -> Result<usize> {
        if occ.len() != self.l {
            return Err(Error::InvalidState(format!(
                "expected {} modes, got {}",
                self.l,
                occ.len()
            )));
        }
        let total: usize = occ.iter().map(|&x| x as usize).sum();
        if total != self.n {
            return Err(Error::InvalidState(format!(
                "expected {} particles, got {total}",
                self.n
            )));
        }
        Ok(self.rank_unchecked(occ))
    }
}

/// Rank of `s` in the order of [`enumerate_basis`]`(n, l)`.
pub fn state_index(s: &FockState, n: usize, l: usize) -> Result<usize> {
    Ranker::new(n, l)?.rank(s.occ())
}

/// Boundary conditions of the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Boundary {
    /// Hard walls: bonds `1..L-1`.
    Hwbc,
    /// Periodic: bonds `1..L` with `L + 1 == 1`.
    Pbc,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Hwbc => "hwbc",
            Boundary::Pbc => "pbc",
        })
    }
}

/// Reflection eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> i8 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "+1",
            Parity::Odd => "-1",
        })
    }
}

/// Which single-particle modes the Fock states count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    /// Site occupations `n_j` (eigenbasis of the on-site interaction).
    Interaction,
    /// Occupations `ñ_k` of the hopping eigenmodes.
    ///
    /// Mode slot `p` holds `k = p + 1` for hard walls and `k = p` (i.e. `k = L`
    /// for `p = 0`) for periodic chains.
    Tunneling,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Interaction => "interaction",
            BasisKind::Tunneling => "tunneling",
        })
    }
}

/// Symmetry labels of a sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    /// Unsymmetrized Fock space.
    Full,
    /// Reflection sector (hard walls).
    Parity(Parity),
    /// Total quasimomentum `q`, optionally with reflection (periodic chains).
    Momentum { q: usize, parity: Option<Parity> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub bc: Boundary,
    pub n: usize,
    pub l: usize,
    pub symmetry: Symmetry,
}

impl SectorSpec {
    pub fn full(bc: Boundary, n: usize, l: usize) -> Self {
        SectorSpec { bc, n, l, symmetry: Symmetry::Full }
    }

    pub fn hwbc(n: usize, l: usize, parity: Parity) -> Self {
        SectorSpec { bc: Boundary::Hwbc, n, l, symmetry: Symmetry::Parity(parity) }
    }

    pub fn pbc(n: usize, l: usize, q: usize, parity: Option<Parity>) -> Self {
        SectorSpec { bc: Boundary::Pbc, n, l, symmetry: Symmetry::Momentum { q, parity } }
    }

    pub fn parity(&self) -> Option<Parity> {
        match self.symmetry {
            Symmetry::Full => None,
            Symmetry::Parity(p) => Some(p),
            Symmetry::Momentum { parity, .. } => parity,
        }
    }

    pub fn q(&self) -> Option<usize> {
        match self.symmetry {
            Symmetry::Momentum { q, .. } => Some(q),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::InvalidSector("L must be at least 1".into()));
        }
        match (self.bc, self.symmetry) {
            (_, Symmetry::Full) => Ok(()),
            (Boundary::Hwbc, Symmetry::Parity(_)) => Ok(()),
            (Boundary::Pbc, Symmetry::Parity(_)) => Err(Error::InvalidSector(
                "periodic sectors are labelled by a quasimomentum".into(),
            )),
            (Boundary::Hwbc, Symmetry::Momentum { .. }) => Err(Error::InvalidSector(
                "quasimomentum is only defined for periodic chains".into(),
            )),
            (Boundary::Pbc, Symmetry::Momentum { q, parity }) => {
                if q >= self.l {
                    return Err(Error::InvalidSector(format!(
                        "Q = {q} outside 0..{}",
                        self.l
                    )));
                }
                if parity.is_some() && q != 0 && 2 * q != self.l {
                    return Err(Error::InvalidSector(format!(
                        "parity does not commute with translations at Q = {q}"
                    )));
                }
                if q != 0 {
                    return Err(Error::UnsupportedSector(format!(
                        "Q = {q} needs complex amplitudes; only Q = 0 is implemented"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Short label such as `pbc_q0_p+1`.
    pub fn label(&self) -> String {
        let sym = match self.symmetry {
            Symmetry::Full => "full".to_string(),
            Symmetry::Parity(p) => format!("p{p}"),
            Symmetry::Momentum { q, parity: None } => format!("q{q}"),
            Symmetry::Momentum { q, parity: Some(p) } => format!("q{q}_p{p}"),
        };
        format!("{}_n{}_l{}_{sym}", self.bc, self.n, self.l)
    }
}

/// A signed mode permutation `b†_p -> sign_p b†_{perm(p)}` with its character.
#[derive(Clone, Debug)]
struct GroupElement {
    // image[q] = occ[src[q]]
    src: Vec<u8>,
    // modes whose creation operator picks up a minus sign
    odd_modes: Vec<u8>,
    character: i8,
}

impl GroupElement {
    fn identity(l: usize) -> Self {
        GroupElement { src: (0..l as u8).collect(), odd_modes: Vec::new(), character: 1 }
    }

    fn permutation(perm: impl Fn(usize) -> usize, l: usize, character: i8) -> Self {
        let mut src = vec![0u8; l];
        for p in 0..l {
            src[perm(p)] = p as u8;
        }
        GroupElement { src, odd_modes: Vec::new(), character }
    }

    #[inline]
    fn phase(&self, occ: &[u8]) -> i8 {
        let odd: u32 = self.odd_modes.iter().map(|&p| occ[p as usize] as u32).sum();
        if odd % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[inline]
    fn apply_into(&self, occ: &[u8], out: &mut [u8]) {
        for (o, &s) in out.iter_mut().zip(&self.src) {
            *o = occ[s as usize];
        }
    }

    /// Lexicographic comparison of the permuted image against `occ` itself.
    #[inline]
    fn compare_image(&self, occ: &[u8]) -> std::cmp::Ordering {
        for (q, &s) in self.src.iter().enumerate() {
            match occ[s as usize].cmp(&occ[q]) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    }
}

#[derive(Clone, Debug)]
struct SymmetryGroup {
    elements: Vec<GroupElement>,
    // keep only states with sum_p p * occ[p] == q (mod L)
    momentum_filter: Option<usize>,
}

impl SymmetryGroup {
    fn for_sector(spec: &SectorSpec, kind: BasisKind) -> Self {
        let l = spec.l;
        let mut elements = vec![GroupElement::identity(l)];
        let mut momentum_filter = None;
        match (kind, spec.symmetry) {
            (_, Symmetry::Full) => {}
            (BasisKind::Interaction, Symmetry::Parity(p)) => {
                elements.push(GroupElement::permutation(|j| l - 1 - j, l, p.sign()));
            }
            (BasisKind::Interaction, Symmetry::Momentum { parity, .. }) => {
                for a in 1..l {
                    elements.push(GroupElement::permutation(|j| (j + a) % l, l, 1));
                }
                if let Some(p) = parity {
                    for a in 0..l {
                        elements.push(GroupElement::permutation(
                            |j| (2 * l - 1 - j + a) % l,
                            l,
                            p.sign(),
                        ));
                    }
                }
            }
            (BasisKind::Tunneling, Symmetry::Parity(p)) => {
                // reflection leaves mode k in place with sign (-1)^(k+1), k = slot + 1
                let mut r = GroupElement::identity(l);
                r.odd_modes = (0..l as u8).filter(|s| s % 2 == 1).collect();
                r.character = p.sign();
                elements.push(r);
            }
            (BasisKind::Tunneling, Symmetry::Momentum { q, parity }) => {
                // translations act as phases, so Q is a selection rule here;
                // reflection maps k -> -k (mod L), phase-free inside Q = 0
                momentum_filter = Some(q);
                if let Some(p) = parity {
                    elements.push(GroupElement::permutation(|k| (l - k) % l, l, p.sign()));
                }
            }
        }
        SymmetryGroup { elements, momentum_filter }
    }

    fn passes_filter(&self, occ: &[u8]) -> bool {
        match self.momentum_filter {
            None => true,
            Some(q) => {
                let l = occ.len();
                let total: usize = occ.iter().enumerate().map(|(p, &n)| p * n as usize).sum();
                total % l == q % l
            }
        }
    }

    /// For a state that passes the filter: is it its orbit's representative, and
    /// if so, the orbit size (or `None` when the projection annihilates it).
    fn classify(&self, occ: &[u8]) -> Option<Option<usize>> {
        let mut stabilizer = 0usize;
        let mut annihilated = false;
        for g in &self.elements {
            match g.compare_image(occ) {
                std::cmp::Ordering::Less => return None,
                std::cmp::Ordering::Equal => {
                    stabilizer += 1;
                    if g.character * g.phase(occ) != 1 {
                        annihilated = true;
                    }
                }
                std::cmp::Ordering::Greater => {}
            }
        }
        if annihilated {
            Some(None)
        } else {
            Some(Some(self.elements.len() / stabilizer))
        }
    }

    /// Smallest image of `occ`, written into `out`, with the factor
    /// `character(g) * phase(g, occ)` of the minimizing element.
    fn canonicalize(&self, occ: &[u8], out: &mut [u8], scratch: &mut [u8]) -> i8 {
        out.copy_from_slice(occ);
        let mut factor = 1i8;
        for g in &self.elements[1..] {
            g.apply_into(occ, scratch);
            if *scratch < *out {
                out.copy_from_slice(scratch);
                factor = g.character * g.phase(occ);
            }
        }
        factor
    }
}

/// Where a Fock state lands in a sector basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    /// Overlap `amplitude = ⟨r̃_index|s⟩` with the symmetrized basis vector.
    Member { index: usize, amplitude: f64 },
    /// The state has no component in this sector.
    Annihilated,
}

/// Symmetry-adapted orthonormal basis of one sector.
///
/// Basis vector `i` is `Σ_g χ(g) g|r_i⟩ / sqrt(|G| |Stab(r_i)|)`; every state of the
/// orbit of `r_i` enters with amplitude `±1 / norms[i]`, where `norms[i]` is the
/// square root of the orbit size.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    spec: SectorSpec,
    kind: BasisKind,
    reps: Vec<u8>,
    norms: Vec<f64>,
    rep_ranks: Vec<u64>,
    group: SymmetryGroup,
    ranker: Ranker,
}

/// Builds the interaction-basis sector for `spec`.
pub fn build_sector_basis(spec: SectorSpec) -> Result<SectorBasis> {
    SectorBasis::build(spec, BasisKind::Interaction)
}

impl SectorBasis {
    pub fn build(spec: SectorSpec, kind: BasisKind) -> Result<Self> {
        Self::build_capped(spec, kind, DEFAULT_MAX_DIM)
    }

    pub fn build_capped(spec: SectorSpec, kind: BasisKind, max_dim: u64) -> Result<Self> {
        spec.validate()?;
        check_dim(spec.n, spec.l, max_dim)?;
        let group = SymmetryGroup::for_sector(&spec, kind);
        let ranker = Ranker::new(spec.n, spec.l)?;
        let mut reps = Vec::new();
        let mut norms = Vec::new();
        let mut rep_ranks = Vec::new();
        for_each_state(spec.n, spec.l, |rank, occ| {
            if !group.passes_filter(occ) {
                return;
            }
            if let Some(Some(orbit)) = group.classify(occ) {
                reps.extend_from_slice(occ);
                norms.push((orbit as f64).sqrt());
                rep_ranks.push(rank as u64);
            }
        });
        Ok(SectorBasis { spec, kind, reps, norms, rep_ranks, group, ranker })
    }

    pub fn spec(&self) -> &SectorSpec {
        &self.spec
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.norms.len()
    }

    pub fn modes(&self) -> usize {
        self.spec.l
    }

    pub fn particles(&self) -> usize {
        self.spec.n
    }

    /// Occupations of representative `i`.
    pub fn rep(&self, i: usize) -> &[u8] {
        let l = self.spec.l;
        &self.reps[i * l..(i + 1) * l]
    }

    pub fn reps(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.reps.chunks_exact(self.spec.l)
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn ranker(&self) -> &Ranker {
        &self.ranker
    }

    /// Index of a representative, `None` if `occ` is not one.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        let rank = self.ranker.rank(occ).ok()? as u64;
        self.rep_ranks.binary_search(&rank).ok()
    }

    /// Projects an arbitrary Fock state onto the sector.
    pub fn locate(&self, occ: &[u8]) -> Result<Location> {
        self.ranker.rank(occ)?;
        let mut canon = vec![0u8; occ.len()];
        let mut scratch = vec![0u8; occ.len()];
        Ok(self.locate_with(occ, &mut canon, &mut scratch))
    }

    /// [`locate`](Self::locate) without validation, using caller-provided buffers of length `L`.
    #[inline]
    pub fn locate_with(&self, occ: &[u8], canon: &mut [u8], scratch: &mut [u8]) -> Location {
        if !self.group.passes_filter(occ) {
            return Location::Annihilated;
        }
        let factor = self.group.canonicalize(occ, canon, scratch);
        let rank = self.ranker.rank_unchecked(canon) as u64;
        match self.rep_ranks.binary_search(&rank) {
            Ok(index) => Location::Member {
                index,
                amplitude: factor as f64 / self.norms[index],
            },
            Err(_) => Location::Annihilated,
        }
    }

    /// Components of basis vector `i` in the full Fock space, as `(full rank, amplitude)`.
    pub fn symmetrized_vector(&self, i: usize) -> Vec<(usize, f64)> {
        let l = self.spec.l;
        let rep = self.rep(i);
        let mut image = vec![0u8; l];
        let scale = 1.0 / ((self.group.elements.len() as f64) * self.stabilizer_size(rep) as f64).sqrt();
        let mut out: Vec<(usize, f64)> = Vec::new();
        for g in &self.group.elements {
            g.apply_into(rep, &mut image);
            let rank = self.ranker.rank_unchecked(&image);
            let value = (g.character * g.phase(rep)) as f64 * scale;
            match out.iter_mut().find(|(r, _)| *r == rank) {
                Some(entry) => entry.1 += value,
                None => out.push((rank, value)),
            }
        }
        out.sort_by_key(|&(r, _)| r);
        out
    }

    fn stabilizer_size(&self, occ: &[u8]) -> usize {
        self.group
            .elements
            .iter()
            .filter(|g| g.compare_image(occ) == std::cmp::Ordering::Equal)
            .count()
    }
}

/// Dimensions of every implemented sector in the decomposition of the full space.
///
/// Hard walls split into the two parity sectors. Periodic chains list the two
/// `Q = 0` parity sectors plus the `Q != 0` remainder obtained by subtraction.
pub fn sector_dimensions(bc: Boundary, n: usize, l: usize) -> Result<Vec<(String, usize)>> {
    let full = check_dim(n, l, DEFAULT_MAX_DIM)?;
    let mut out = Vec::new();
    match bc {
        Boundary::Hwbc => {
            for p in [Parity::Even, Parity::Odd] {
                let b = build_sector_basis(SectorSpec::hwbc(n, l, p))?;
                out.push((format!("parity {p}"), b.dim()));
            }
        }
        Boundary::Pbc => {
            let mut covered = 0;
            for p in [Parity::Even, Parity::Odd] {
                let b = build_sector_basis(SectorSpec::pbc(n, l, 0, Some(p)))?;
                covered += b.dim();
                out.push((format!("Q=0 parity {p}"), b.dim()));
            }
            out.push(("Q!=0 (complement)".to_string(), full - covered));
        }
    }
    Ok(out)
}
