//! Particle-number-graded block operators and the XXZ operator zoo.
//!
//! Every operator on the chain is stored as a map from sector pairs
//! `(n_out, n_in)` to a dense matrix over the corresponding configuration
//! bases. Particle-conserving operators occupy only the diagonal grading
//! `n_out == n_in`; a spin flip such as `sigma^x` contributes gradings
//! `+-1`.
//!
//! The Hamiltonian convention: on an interval the free part is the sum of
//! nearest-neighbor two-site terms (hopping with amplitude `-1/(2 Delta)`
//! plus an attractive occupation-occupation term) together with the total
//! particle number, which is the same as `-1/(2 Delta)` times the hopping
//! Laplacian plus the cluster-count operator. The random part adds
//! `lambda * omega_i` per occupied site. A cut `K` removes both pieces of
//! every bond crossing the boundary of `K`; the removed boundary term is
//! available separately as `Gamma`.

use crate::error::{Error, Result};
use crate::lattice::{mask_cluster_count, SectorBasis, SiteInterval, SiteSet};
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::io::{Read, Write};

/// Scalar types the block machinery works over (`f64` and `Complex64`).
pub trait Scalar: ndarray::LinalgScalar + PartialEq + std::fmt::Debug + Send + Sync {
    fn conjugate(self) -> Self;
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
    fn real_part(self) -> f64;
    fn imag_part(self) -> f64;
}

impl Scalar for f64 {
    fn conjugate(self) -> Self {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn real_part(self) -> f64 {
        self
    }
    fn imag_part(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    fn conjugate(self) -> Self {
        self.conj()
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn real_part(self) -> f64 {
        self.re
    }
    fn imag_part(self) -> f64 {
        self.im
    }
}

/// Anisotropy and disorder strength of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    delta: f64,
    lambda: f64,
}

impl ModelParams {
    /// Requires `delta > 1` (Ising phase) and `lambda >= 0`. The clean
    /// chain is `lambda = 0` or, equivalently, an all-zero coupling vector.
    pub fn new(delta: f64, lambda: f64) -> Result<Self> {
        if !(delta > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "anisotropy must exceed 1, got {delta}"
            )));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "disorder strength must be nonnegative, got {lambda}"
            )));
        }
        Ok(ModelParams { delta, lambda })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The spectral-gap unit `1 - 1/Delta`.
    pub fn gap_unit(&self) -> f64 {
        1.0 - 1.0 / self.delta
    }

    /// Hopping amplitude `1 / (2 Delta)`.
    pub fn hopping(&self) -> f64 {
        0.5 / self.delta
    }
}

/// Where a coupling vector came from, for reproducibility metadata.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub realization: u64,
    pub distribution: String,
}

/// One sample of the random couplings on an interval: one entry of
/// `[0, 1]` per site.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    ambient: SiteInterval,
    omega: Vec<f64>,
    provenance: Option<Provenance>,
}

impl DisorderRealization {
    pub fn new(
        ambient: SiteInterval,
        omega: Vec<f64>,
        provenance: Option<Provenance>,
    ) -> Result<Self> {
        if omega.len() != ambient.len() {
            return Err(Error::InvalidParameter(format!(
                "coupling vector length {} does not match interval {ambient}",
                omega.len()
            )));
        }
        if let Some(&bad) = omega.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!(
                "coupling {bad} outside [0, 1]"
            )));
        }
        Ok(DisorderRealization {
            ambient,
            omega,
            provenance,
        })
    }

    /// All couplings equal to `value` (use 0 for the clean chain).
    pub fn constant(ambient: SiteInterval, value: f64) -> Self {
        DisorderRealization::new(ambient, vec![value; ambient.len()], None).unwrap()
    }

    pub fn ambient(&self) -> &SiteInterval {
        &self.ambient
    }

    pub fn couplings(&self) -> &[f64] {
        &self.omega
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Restriction to a sub-interval.
    pub fn restrict(&self, window: &SiteInterval) -> Result<DisorderRealization> {
        if !self.ambient.contains_interval(window) {
            return Err(Error::Geometry(format!(
                "window {window} not inside {}",
                self.ambient
            )));
        }
        let lo = self.ambient.offset(window.lo());
        let hi = self.ambient.offset(window.hi());
        DisorderRealization::new(
            *window,
            self.omega[lo..=hi].to_vec(),
            self.provenance.clone(),
        )
    }

    /// Sum of couplings over the occupied sites of a configuration mask.
    pub fn sum_over(&self, config: u64) -> f64 {
        let mut s = 0.0;
        let mut m = config;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            s += self.omega[b];
            m &= m - 1;
        }
        s
    }
}

/// A block-graded operator: map `(n_out, n_in) -> dense matrix`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator<T: Scalar = f64> {
    ambient: SiteInterval,
    blocks: BTreeMap<(usize, usize), Array2<T>>,
}

pub type ComplexBlockOperator = BlockOperator<Complex64>;

impl<T: Scalar> BlockOperator<T> {
    pub fn new(ambient: SiteInterval) -> Self {
        assert!(!ambient.is_empty());
        BlockOperator {
            ambient,
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(ambient: SiteInterval) -> Self {
        let mut op = BlockOperator::new(ambient);
        for n in 0..=ambient.len() {
            let d = op.basis(n).dim();
            op.insert_block(n, n, Array2::from_diag(&Array1::from_elem(d, T::one())));
        }
        op
    }

    pub fn ambient(&self) -> &SiteInterval {
        &self.ambient
    }

    pub fn num_sites(&self) -> usize {
        self.ambient.len()
    }

    pub fn basis(&self, n: usize) -> SectorBasis {
        SectorBasis::new(self.ambient, n)
    }

    pub fn sector_dim(&self, n: usize) -> usize {
        self.basis(n).dim()
    }

    /// Total dimension of the full product space, `2^L`.
    pub fn total_dim(&self) -> usize {
        1usize << self.num_sites()
    }

    pub fn insert_block(&mut self, n_out: usize, n_in: usize, m: Array2<T>) {
        assert_eq!(m.nrows(), self.sector_dim(n_out));
        assert_eq!(m.ncols(), self.sector_dim(n_in));
        self.blocks.insert((n_out, n_in), m);
    }

    pub fn block(&self, n_out: usize, n_in: usize) -> Option<&Array2<T>> {
        self.blocks.get(&(n_out, n_in))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Array2<T>)> {
        self.blocks.iter()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// The set of gradings `n_out - n_in` present.
    pub fn gradings(&self) -> std::collections::BTreeSet<i64> {
        self.blocks
            .keys()
            .map(|&(m, n)| m as i64 - n as i64)
            .collect()
    }

    pub fn is_conserving(&self) -> bool {
        self.blocks.keys().all(|&(m, n)| m == n)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = BlockOperator::new(self.ambient);
        for (&(m, n), b) in &self.blocks {
            out.blocks.insert((n, m), b.t().mapv(|x| x.conjugate()));
        }
        out
    }

    /// Graded composition `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let mut out = BlockOperator::new(self.ambient);
        for (&(m, p), a) in &self.blocks {
            for (&(p2, n), b) in &other.blocks {
                if p != p2 {
                    continue;
                }
                let prod = a.dot(b);
                match out.blocks.get_mut(&(m, n)) {
                    Some(acc) => *acc = &*acc + &prod,
                    None => {
                        out.blocks.insert((m, n), prod);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self + coeff * other`.
    pub fn add_scaled(&self, other: &Self, coeff: T) -> Result<Self> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for (&key, b) in &other.blocks {
            match out.blocks.get_mut(&key) {
                Some(acc) => *acc = &*acc + &b.mapv(|x| x * coeff),
                None => {
                    out.blocks.insert(key, b.mapv(|x| x * coeff));
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, T::from_real(-1.0))
    }

    pub fn scale(&self, coeff: T) -> Self {
        let mut out = self.clone();
        for b in out.blocks.values_mut() {
            *b = b.mapv(|x| x * coeff);
        }
        out
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(T) -> U) -> BlockOperator<U> {
        let mut out = BlockOperator::new(self.ambient);
        for (&key, b) in &self.blocks {
            out.blocks.insert(key, b.mapv(|x| f(x)));
        }
        out
    }

    /// Largest absolute entrywise deviation from `other` over all blocks
    /// (missing blocks count as zero).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        let keys: std::collections::BTreeSet<_> = self
            .blocks
            .keys()
            .chain(other.blocks.keys())
            .copied()
            .collect();
        for key in keys {
            match (self.blocks.get(&key), other.blocks.get(&key)) {
                (Some(a), Some(b)) => {
                    for (x, y) in a.iter().zip(b.iter()) {
                        worst = worst.max((*x - *y).modulus());
                    }
                }
                (Some(a), None) | (None, Some(a)) => {
                    for x in a.iter() {
                        worst = worst.max(x.modulus());
                    }
                }
                (None, None) => {}
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .values()
            .flat_map(|b| b.iter())
            .map(|x| x.modulus())
            .fold(0.0, f64::max)
    }

    /// Symmetric-deviation of a conserving operator: `max |A - A^dagger|`.
    pub fn asymmetry(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Add `coeff * d` onto the conserving diagonal.
    pub fn add_diagonal(&mut self, d: &DiagOperator, coeff: f64) {
        assert_eq!(self.ambient, *d.ambient());
        for n in 0..=self.num_sites() {
            let vals = d.sector(n);
            if vals.iter().all(|&x| x == 0.0) {
                continue;
            }
            let dim = self.sector_dim(n);
            let entry = self
                .blocks
                .entry((n, n))
                .or_insert_with(|| Array2::zeros((dim, dim)));
            for i in 0..dim {
                entry[[i, i]] = entry[[i, i]] + T::from_real(coeff * vals[i]);
            }
        }
    }

    /// Apply to a graded vector.
    pub fn apply(&self, v: &BlockVec<T>) -> BlockVec<T> {
        assert_eq!(self.ambient, v.ambient);
        let mut out = BlockVec::zeros_like(v);
        for (&(m, n), b) in &self.blocks {
            let prod = b.dot(&v.sectors[n]);
            out.sectors[m] = &out.sectors[m] + &prod;
        }
        out
    }

    /// Assemble the full matrix over all sectors (sector-major ordering).
    pub fn assemble_dense(&self) -> Array2<T> {
        let l = self.num_sites();
        let offsets = sector_offsets(l);
        let total = self.total_dim();
        let mut full = Array2::zeros((total, total));
        for (&(m, n), b) in &self.blocks {
            let (ro, co) = (offsets[m], offsets[n]);
            for ((i, j), &x) in b.indexed_iter() {
                full[[ro + i, co + j]] = x;
            }
        }
        full
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::AmbientMismatch(
                self.ambient.to_string(),
                other.ambient.to_string(),
            ));
        }
        Ok(())
    }
}

/// Offsets of each particle-number sector inside the `2^L` product space.
pub fn sector_offsets(l: usize) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(l + 2);
    let mut acc = 0usize;
    for n in 0..=l {
        offsets.push(acc);
        acc += crate::lattice::binomial(l, n) as usize;
    }
    offsets.push(acc);
    offsets
}

/// A graded vector: one dense vector per particle-number sector.
#[derive(Clone, Debug)]
pub struct BlockVec<T: Scalar = f64> {
    pub ambient: SiteInterval,
    pub sectors: Vec<Array1<T>>,
}

impl<T: Scalar> BlockVec<T> {
    pub fn zeros(ambient: SiteInterval) -> Self {
        let l = ambient.len();
        let sectors = (0..=l)
            .map(|n| Array1::zeros(crate::lattice::binomial(l, n) as usize))
            .collect();
        BlockVec { ambient, sectors }
    }

    pub fn zeros_like(v: &BlockVec<T>) -> Self {
        BlockVec {
            ambient: v.ambient,
            sectors: v.sectors.iter().map(|s| Array1::zeros(s.len())).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.iter())
            .map(|x| x.modulus().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale_mut(&mut self, c: f64) {
        for s in &mut self.sectors {
            *s = s.mapv(|x| x * T::from_real(c));
        }
    }

    pub fn dot_conj(&self, other: &BlockVec<T>) -> T {
        let mut acc = T::zero();
        for (a, b) in self.sectors.iter().zip(&other.sectors) {
            for (x, y) in a.iter().zip(b.iter()) {
                acc = acc + x.conjugate() * *y;
            }
        }
        acc
    }
}

/// A particle-conserving diagonal operator stored as one value per
/// configuration, sector by sector.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagOperator {
    ambient: SiteInterval,
    sectors: Vec<Array1<f64>>,
}

impl DiagOperator {
    /// Build from a function of `(particle count, configuration mask)`.
    pub fn from_fn(ambient: SiteInterval, f: impl Fn(usize, u64) -> f64) -> Self {
        let l = ambient.len();
        let sectors = (0..=l)
            .map(|n| {
                let basis = SectorBasis::new(ambient, n);
                Array1::from_iter(basis.iter_masks().map(|m| f(n, m)))
            })
            .collect();
        DiagOperator { ambient, sectors }
    }

    pub fn ambient(&self) -> &SiteInterval {
        &self.ambient
    }

    pub fn sector(&self, n: usize) -> &Array1<f64> {
        &self.sectors[n]
    }

    pub fn to_block<T: Scalar>(&self) -> BlockOperator<T> {
        let mut op = BlockOperator::new(self.ambient);
        for (n, vals) in self.sectors.iter().enumerate() {
            op.insert_block(
                n,
                n,
                Array2::from_diag(&vals.mapv(T::from_real)),
            );
        }
        op
    }

    /// Scale the rows of `op` by the diagonal (left multiplication).
    pub fn apply_left<T: Scalar>(&self, op: &BlockOperator<T>) -> BlockOperator<T> {
        assert_eq!(self.ambient, *op.ambient());
        let mut out = BlockOperator::new(self.ambient);
        for (&(m, n), b) in op.blocks() {
            let mut scaled = b.clone();
            for (i, mut row) in scaled.rows_mut().into_iter().enumerate() {
                let c = T::from_real(self.sectors[m][i]);
                row.mapv_inplace(|x| x * c);
            }
            out.insert_block(m, n, scaled);
        }
        out
    }

    /// Scale the columns of `op` by the diagonal (right multiplication).
    pub fn apply_right<T: Scalar>(&self, op: &BlockOperator<T>) -> BlockOperator<T> {
        assert_eq!(self.ambient, *op.ambient());
        let mut out = BlockOperator::new(self.ambient);
        for (&(m, n), b) in op.blocks() {
            let mut scaled = b.clone();
            for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
                let c = T::from_real(self.sectors[n][j]);
                col.mapv_inplace(|x| x * c);
            }
            out.insert_block(m, n, scaled);
        }
        out
    }

    /// Indices with nonzero diagonal value, per sector. For 0/1 diagonals
    /// this is the kept subspace.
    pub fn support_indices(&self) -> Vec<Vec<usize>> {
        self.sectors
            .iter()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .filter(|(_, &v)| v.abs() > 0.5)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }

    pub fn complement(&self) -> DiagOperator {
        DiagOperator {
            ambient: self.ambient,
            sectors: self.sectors.iter().map(|s| s.mapv(|v| 1.0 - v)).collect(),
        }
    }
}

/// The diagonal projections and cluster-count restrictions used throughout.
#[derive(Clone, Debug)]
pub enum ProjectionKind<'a> {
    /// No particles anywhere in the set (`P_+^S`); the empty set gives the
    /// identity.
    ParticleFree(&'a SiteSet),
    /// At least one particle in the set (`P_-^S`); the empty set gives zero.
    ParticleIn(&'a SiteSet),
    /// Exactly `m` clusters.
    ClusterExactly(usize),
    /// Between 1 and `k` clusters.
    ClusterUpTo(usize),
    /// Weighted restriction: 1 on `1..=k` clusters, `(k+1)/k` on the
    /// vacuum, 0 above. Requires `k >= 1`.
    ClusterUpToWeighted(usize),
    /// At most `r` particles in total.
    ParticlesAtMost(usize),
    /// More than `r` particles in total.
    ParticlesAbove(usize),
}

/// Assemble a diagonal projection (or weighted restriction).
pub fn build_diag_projection(kind: ProjectionKind<'_>, ambient: &SiteInterval) -> Result<DiagOperator> {
    match kind {
        ProjectionKind::ParticleFree(s) | ProjectionKind::ParticleIn(s) => {
            if !s.is_subset_of(ambient) {
                return Err(Error::Geometry(format!(
                    "projection set {s:?} not inside {ambient}"
                )));
            }
        }
        ProjectionKind::ClusterUpToWeighted(0) => {
            return Err(Error::InvalidParameter(
                "weighted cluster restriction needs k >= 1".into(),
            ));
        }
        _ => {}
    }
    let full_bonds = u64::MAX;
    Ok(match kind {
        ProjectionKind::ParticleFree(s) => {
            let smask = s.mask(ambient);
            DiagOperator::from_fn(*ambient, move |_, m| if m & smask == 0 { 1.0 } else { 0.0 })
        }
        ProjectionKind::ParticleIn(s) => {
            let smask = s.mask(ambient);
            DiagOperator::from_fn(*ambient, move |_, m| if m & smask != 0 { 1.0 } else { 0.0 })
        }
        ProjectionKind::ClusterExactly(k) => DiagOperator::from_fn(*ambient, move |_, m| {
            if mask_cluster_count(m, full_bonds) == k {
                1.0
            } else {
                0.0
            }
        }),
        ProjectionKind::ClusterUpTo(k) => DiagOperator::from_fn(*ambient, move |_, m| {
            let w = mask_cluster_count(m, full_bonds);
            if (1..=k).contains(&w) {
                1.0
            } else {
                0.0
            }
        }),
        ProjectionKind::ClusterUpToWeighted(k) => DiagOperator::from_fn(*ambient, move |_, m| {
            let w = mask_cluster_count(m, full_bonds);
            if w == 0 {
                (k as f64 + 1.0) / k as f64
            } else if w <= k {
                1.0
            } else {
                0.0
            }
        }),
        ProjectionKind::ParticlesAtMost(r) => {
            DiagOperator::from_fn(*ambient, move |n, _| if n <= r { 1.0 } else { 0.0 })
        }
        ProjectionKind::ParticlesAbove(r) => {
            DiagOperator::from_fn(*ambient, move |n, _| if n > r { 1.0 } else { 0.0 })
        }
    })
}

fn kept_bond_mask(ambient: &SiteInterval, cut: Option<&SiteInterval>) -> Result<u64> {
    let l = ambient.len();
    let mut kept = if l >= 2 { (1u64 << (l - 1)) - 1 } else { 0 };
    if let Some(k) = cut {
        if !k.is_empty() && !ambient.contains_interval(k) {
            return Err(Error::Geometry(format!("cut {k} not inside {ambient}")));
        }
        if !k.is_empty() {
            for p in 0..l.saturating_sub(1) {
                let i = ambient.lo() + p as i32;
                if k.contains(i) != k.contains(i + 1) {
                    kept &= !(1u64 << p);
                }
            }
        }
    }
    Ok(kept)
}

/// One sector of the XXZ Hamiltonian, dense, in the ranked configuration
/// basis.
pub fn hamiltonian_sector(
    ambient: &SiteInterval,
    params: &ModelParams,
    omega: &DisorderRealization,
    cut: Option<&SiteInterval>,
    n: usize,
) -> Result<Array2<f64>> {
    if omega.ambient() != ambient {
        return Err(Error::AmbientMismatch(
            omega.ambient().to_string(),
            ambient.to_string(),
        ));
    }
    let kept = kept_bond_mask(ambient, cut)?;
    let basis = SectorBasis::new(*ambient, n);
    let dim = basis.dim();
    let mut h = Array2::zeros((dim, dim));
    let hop = -params.hopping();
    let lam = params.lambda();
    for (a, mask) in basis.iter_masks().enumerate() {
        h[[a, a]] = mask_cluster_count(mask, kept) as f64 + lam * omega.sum_over(mask);
        let mut bonds = kept;
        while bonds != 0 {
            let p = bonds.trailing_zeros() as usize;
            bonds &= bonds - 1;
            let pair = (mask >> p) & 3;
            if pair == 1 || pair == 2 {
                let flipped = mask ^ (3u64 << p);
                if flipped > mask {
                    let b = basis.rank(flipped)?;
                    h[[a, b]] = hop;
                    h[[b, a]] = hop;
                }
            }
        }
    }
    Ok(h)
}

/// The XXZ Hamiltonian on `ambient`, optionally with the bonds crossing
/// the boundary of `cut` removed, as a conserving block operator.
pub fn build_hamiltonian(
    ambient: &SiteInterval,
    params: &ModelParams,
    omega: &DisorderRealization,
    cut: Option<&SiteInterval>,
) -> Result<BlockOperator<f64>> {
    let mut op = BlockOperator::new(*ambient);
    for n in 0..=ambient.len() {
        let h = hamiltonian_sector(ambient, params, omega, cut, n)?;
        op.insert_block(n, n, h);
    }
    Ok(op)
}

/// The boundary term removed by a cut: the sum of the two-site terms on
/// the (at most two) bonds crossing the boundary of `cut`. Disorder-free.
pub fn build_gamma(
    ambient: &SiteInterval,
    cut: &SiteInterval,
    params: &ModelParams,
) -> Result<BlockOperator<f64>> {
    let all = kept_bond_mask(ambient, None)?;
    let kept = kept_bond_mask(ambient, Some(cut))?;
    let crossing = all & !kept;
    let hop = -params.hopping();
    let mut op = BlockOperator::new(*ambient);
    for n in 0..=ambient.len() {
        let basis = SectorBasis::new(*ambient, n);
        let dim = basis.dim();
        let mut g = Array2::zeros((dim, dim));
        for (a, mask) in basis.iter_masks().enumerate() {
            let mut bonds = crossing;
            while bonds != 0 {
                let p = bonds.trailing_zeros() as usize;
                bonds &= bonds - 1;
                let pair = (mask >> p) & 3;
                if pair == 3 {
                    g[[a, a]] -= 1.0;
                } else if pair == 1 || pair == 2 {
                    let flipped = mask ^ (3u64 << p);
                    if flipped > mask {
                        let b = basis.rank(flipped)?;
                        g[[a, b]] = hop;
                        g[[b, a]] = hop;
                    }
                }
            }
        }
        op.insert_block(n, n, g);
    }
    Ok(op)
}

/// Variants of the diagonally shifted Hamiltonians used to open a gap
/// above the low-cluster subspace.
#[derive(Clone, Copy, Debug)]
pub enum ModifiedKind {
    /// `H + k (1 - 1/Delta) * (weighted cluster restriction up to k)`;
    /// `k = 0` uses the bare vacuum projection instead.
    GapShift { k: usize },
    /// `H + (k+4)(1 - 1/Delta) * [n <= r_max] * (weighted restriction up
    /// to k+4)`, the particle-truncated variant.
    TruncatedGapShift { k: usize, r_max: usize },
}

pub fn build_modified_hamiltonian(
    kind: ModifiedKind,
    ambient: &SiteInterval,
    params: &ModelParams,
    omega: &DisorderRealization,
) -> Result<BlockOperator<f64>> {
    let mut h = build_hamiltonian(ambient, params, omega, None)?;
    let gap = params.gap_unit();
    match kind {
        ModifiedKind::GapShift { k } => {
            if k == 0 {
                let q0 = build_diag_projection(ProjectionKind::ClusterExactly(0), ambient)?;
                h.add_diagonal(&q0, gap);
            } else {
                let qhat =
                    build_diag_projection(ProjectionKind::ClusterUpToWeighted(k), ambient)?;
                h.add_diagonal(&qhat, k as f64 * gap);
            }
        }
        ModifiedKind::TruncatedGapShift { k, r_max } => {
            if k == 0 {
                return Err(Error::InvalidParameter(
                    "truncated shift needs k >= 1".into(),
                ));
            }
            let kk = k + 4;
            let qhat = build_diag_projection(ProjectionKind::ClusterUpToWeighted(kk), ambient)?;
            let d = DiagOperator::from_fn(*ambient, |n, m| {
                if n <= r_max {
                    qhat.sector(n)[SectorBasis::new(*ambient, n).rank(m).unwrap()]
                } else {
                    0.0
                }
            });
            h.add_diagonal(&d, kk as f64 * gap);
        }
    }
    Ok(h)
}

/// An observable acting on a short interval, given as a matrix on the
/// `2^|X|`-dimensional configuration space of its support (index bit `j`
/// = site `support.lo() + j` occupied).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalObservable {
    support: SiteInterval,
    matrix: Array2<f64>,
}

impl LocalObservable {
    pub fn new(support: SiteInterval, matrix: Array2<f64>) -> Result<Self> {
        let d = 1usize << support.len();
        if support.is_empty() || support.len() > 8 {
            return Err(Error::Geometry(format!(
                "local observable support {support} must have 1..=8 sites"
            )));
        }
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidParameter(format!(
                "matrix shape {:?} does not match 2^{} local space",
                matrix.dim(),
                support.len()
            )));
        }
        Ok(LocalObservable { support, matrix })
    }

    /// `sigma^x` at a single site.
    pub fn sigma_x(site: i32) -> Self {
        let m = ndarray::arr2(&[[0.0, 1.0], [1.0, 0.0]]);
        LocalObservable::new(SiteInterval::new(site, site), m).unwrap()
    }

    /// Occupation number at a single site.
    pub fn occupancy(site: i32) -> Self {
        let m = ndarray::arr2(&[[0.0, 0.0], [0.0, 1.0]]);
        LocalObservable::new(SiteInterval::new(site, site), m).unwrap()
    }

    pub fn support(&self) -> &SiteInterval {
        &self.support
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }
}

/// Tensor a local observable with the identity on the rest of the chain.
pub fn embed_local_observable(
    t: &LocalObservable,
    ambient: &SiteInterval,
) -> Result<BlockOperator<f64>> {
    let local = embed_matrix_region(&t.matrix.mapv(|x| x), t.support(), ambient)?;
    Ok(local)
}

/// Embed a matrix acting on the full configuration space of a sub-interval
/// `region` (indexed by masks over the region) into the graded operator on
/// `ambient`, tensoring with the identity elsewhere.
pub fn embed_matrix_region<T: Scalar>(
    matrix: &Array2<T>,
    region: &SiteInterval,
    ambient: &SiteInterval,
) -> Result<BlockOperator<T>> {
    if !ambient.contains_interval(region) {
        return Err(Error::Geometry(format!(
            "region {region} not inside {ambient}"
        )));
    }
    let x = region.len();
    let dx = 1usize << x;
    if matrix.nrows() != dx || matrix.ncols() != dx {
        return Err(Error::InvalidParameter(format!(
            "matrix shape {:?} does not match region {region}",
            matrix.dim()
        )));
    }
    let l = ambient.len();
    let shift = ambient.offset(region.lo());
    // positions of environment bits in the ambient mask
    let env_positions: Vec<usize> = (0..l)
        .filter(|&p| !(shift..shift + x).contains(&p))
        .collect();
    let mut op = BlockOperator::new(*ambient);
    let mut bases: Vec<SectorBasis> = (0..=l).map(|n| SectorBasis::new(*ambient, n)).collect();
    let _ = &mut bases;
    for env_bits in 0u64..(1u64 << env_positions.len()) {
        let mut env_mask = 0u64;
        let mut eb = env_bits;
        while eb != 0 {
            let k = eb.trailing_zeros() as usize;
            env_mask |= 1u64 << env_positions[k];
            eb &= eb - 1;
        }
        let env_count = env_bits.count_ones() as usize;
        for mo in 0..dx as u64 {
            for mi in 0..dx as u64 {
                let v = matrix[[mo as usize, mi as usize]];
                if v == T::zero() {
                    continue;
                }
                let gout = (mo << shift) | env_mask;
                let gin = (mi << shift) | env_mask;
                let n_out = mo.count_ones() as usize + env_count;
                let n_in = mi.count_ones() as usize + env_count;
                let ro = bases[n_out].rank(gout).unwrap();
                let co = bases[n_in].rank(gin).unwrap();
                let (dr, dc) = (bases[n_out].dim(), bases[n_in].dim());
                let b = op
                    .blocks
                    .entry((n_out, n_in))
                    .or_insert_with(|| Array2::zeros((dr, dc)));
                b[[ro, co]] = b[[ro, co]] + v;
            }
        }
    }
    Ok(op)
}

/// Binary dump of a block operator. Little-endian layout:
///
/// ```text
/// magic "XXZB" | version u32 | lo i32 | hi i32 | block_count u32
/// per block: L u32 | n_out u32 | n_in u32 | nnz u64
///            then nnz triplets: row u32 | col u32 | re f64 | im f64
/// ```
pub fn write_block_operator<T: Scalar, W: Write>(op: &BlockOperator<T>, w: &mut W) -> Result<()> {
    w.write_all(b"XXZB")?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&op.ambient().lo().to_le_bytes())?;
    w.write_all(&op.ambient().hi().to_le_bytes())?;
    w.write_all(&(op.num_blocks() as u32).to_le_bytes())?;
    for (&(m, n), b) in op.blocks() {
        let nnz = b.iter().filter(|x| **x != T::zero()).count() as u64;
        w.write_all(&(op.num_sites() as u32).to_le_bytes())?;
        w.write_all(&(m as u32).to_le_bytes())?;
        w.write_all(&(n as u32).to_le_bytes())?;
        w.write_all(&nnz.to_le_bytes())?;
        for ((i, j), &x) in b.indexed_iter() {
            if x == T::zero() {
                continue;
            }
            w.write_all(&(i as u32).to_le_bytes())?;
            w.write_all(&(j as u32).to_le_bytes())?;
            w.write_all(&x.real_part().to_le_bytes())?;
            w.write_all(&x.imag_part().to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read back a dump produced by [`write_block_operator`].
pub fn read_block_operator<R: Read>(r: &mut R) -> Result<BlockOperator<Complex64>> {
    let mut buf4 = [0u8; 4];
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf4)?;
    if &buf4 != b"XXZB" {
        return Err(Error::Config("bad magic in operator dump".into()));
    }
    r.read_exact(&mut buf4)?;
    if u32::from_le_bytes(buf4) != 1 {
        return Err(Error::Config("unsupported dump version".into()));
    }
    r.read_exact(&mut buf4)?;
    let lo = i32::from_le_bytes(buf4);
    r.read_exact(&mut buf4)?;
    let hi = i32::from_le_bytes(buf4);
    r.read_exact(&mut buf4)?;
    let count = u32::from_le_bytes(buf4);
    let ambient = SiteInterval::new(lo, hi);
    let mut op = BlockOperator::new(ambient);
    for _ in 0..count {
        r.read_exact(&mut buf4)?;
        let l = u32::from_le_bytes(buf4) as usize;
        if l != ambient.len() {
            return Err(Error::Config("block header disagrees with ambient".into()));
        }
        r.read_exact(&mut buf4)?;
        let m = u32::from_le_bytes(buf4) as usize;
        r.read_exact(&mut buf4)?;
        let n = u32::from_le_bytes(buf4) as usize;
        r.read_exact(&mut buf8)?;
        let nnz = u64::from_le_bytes(buf8);
        let mut b = Array2::zeros((op.sector_dim(m), op.sector_dim(n)));
        for _ in 0..nnz {
            r.read_exact(&mut buf4)?;
            let i = u32::from_le_bytes(buf4) as usize;
            r.read_exact(&mut buf4)?;
            let j = u32::from_le_bytes(buf4) as usize;
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            b[[i, j]] = Complex64::new(re, im);
        }
        op.insert_block(m, n, b);
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SiteInterval;

    fn params(delta: f64, lambda: f64) -> ModelParams {
        ModelParams::new(delta, lambda).unwrap()
    }

    /// The 4x4 two-site term in the basis indexed by (bit0 = left
    /// occupied, bit1 = right occupied), built from its definition.
    fn local_term(delta: f64) -> Array2<f64> {
        let mut h = Array2::zeros((4, 4));
        let hop = -0.5 / delta;
        h[[1, 2]] = hop;
        h[[2, 1]] = hop;
        h[[3, 3]] = -1.0;
        h
    }

    #[test]
    fn local_term_has_unit_norm() {
        // eigenvalues are 0, +-1/(2 Delta), -1
        for delta in [1.5, 2.0, 8.0] {
            let h = local_term(delta);
            let eig: Vec<f64> = vec![0.0, 0.5 / delta, -0.5 / delta, -1.0];
            let max = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert_eq!(max, 1.0);
            assert_eq!(h[[3, 3]], -1.0);
        }
    }

    #[test]
    fn vacuum_sector_is_zero() {
        let amb = SiteInterval::of_len(6);
        let omega = DisorderRealization::constant(amb, 0.7);
        let h = build_hamiltonian(&amb, &params(2.0, 1.3), &omega, None).unwrap();
        let b = h.block(0, 0).unwrap();
        assert_eq!(b[[0, 0]], 0.0);
    }

    #[test]
    fn single_particle_matrix_is_shifted_path_graph() {
        let amb = SiteInterval::of_len(5);
        let omega = DisorderRealization::constant(amb, 0.0);
        let delta = 3.0;
        let h = hamiltonian_sector(&amb, &params(delta, 0.0), &omega, None, 1).unwrap();
        for i in 0..5 {
            assert_eq!(h[[i, i]], 1.0);
            for j in 0..5 {
                if (i as i32 - j as i32).abs() == 1 {
                    assert_eq!(h[[i, j]], -0.5 / delta);
                } else if i != j {
                    assert_eq!(h[[i, j]], 0.0);
                }
            }
        }
    }

    #[test]
    fn gamma_is_difference_of_assemblies() {
        let amb = SiteInterval::of_len(8);
        let p = params(2.0, 1.0);
        let mut omega_vals = Vec::new();
        for i in 0..8 {
            omega_vals.push((i as f64 * 0.37).fract());
        }
        let omega = DisorderRealization::new(amb, omega_vals, None).unwrap();
        for cut in [SiteInterval::new(2, 5), SiteInterval::new(0, 3), SiteInterval::new(0, 7)] {
            let h = build_hamiltonian(&amb, &p, &omega, None).unwrap();
            let hk = build_hamiltonian(&amb, &p, &omega, Some(&cut)).unwrap();
            let gamma = build_gamma(&amb, &cut, &p).unwrap();
            let diff = h.sub(&hk).unwrap();
            assert!(diff.max_abs_diff(&gamma) < 1e-14);
        }
        // cut = ambient removes nothing
        let gamma = build_gamma(&amb, &amb, &p).unwrap();
        assert!(gamma.max_abs() == 0.0);
    }

    #[test]
    fn projections_are_complementary() {
        let amb = SiteInterval::of_len(7);
        let s = SiteSet::new(vec![1, 4, 5]);
        let plus = build_diag_projection(ProjectionKind::ParticleFree(&s), &amb).unwrap();
        let minus = build_diag_projection(ProjectionKind::ParticleIn(&s), &amb).unwrap();
        for n in 0..=7 {
            for (a, b) in plus.sector(n).iter().zip(minus.sector(n).iter()) {
                assert_eq!(a * b, 0.0);
                assert_eq!(a + b, 1.0);
            }
        }
        // empty-set conventions
        let empty = SiteSet::empty();
        let plus = build_diag_projection(ProjectionKind::ParticleFree(&empty), &amb).unwrap();
        let minus = build_diag_projection(ProjectionKind::ParticleIn(&empty), &amb).unwrap();
        for n in 0..=7 {
            assert!(plus.sector(n).iter().all(|&v| v == 1.0));
            assert!(minus.sector(n).iter().all(|&v| v == 0.0));
        }
        // single-site occupation
        let one = SiteSet::new(vec![3]);
        let minus = build_diag_projection(ProjectionKind::ParticleIn(&one), &amb).unwrap();
        let occ = DiagOperator::from_fn(amb, |_, m| if m & (1 << 3) != 0 { 1.0 } else { 0.0 });
        assert_eq!(minus, occ);
    }

    #[test]
    fn vacuum_cluster_projection_is_particle_free_whole() {
        let amb = SiteInterval::of_len(6);
        let q0 = build_diag_projection(ProjectionKind::ClusterExactly(0), &amb).unwrap();
        let whole = SiteSet::from_interval(&amb);
        let pplus = build_diag_projection(ProjectionKind::ParticleFree(&whole), &amb).unwrap();
        assert_eq!(q0, pplus);
    }

    #[test]
    fn weighted_restriction_values() {
        let amb = SiteInterval::of_len(6);
        let k = 2usize;
        let qhat = build_diag_projection(ProjectionKind::ClusterUpToWeighted(k), &amb).unwrap();
        for n in 0..=6 {
            let basis = SectorBasis::new(amb, n);
            for (i, m) in basis.iter_masks().enumerate() {
                let w = mask_cluster_count(m, u64::MAX);
                let want = if w == 0 {
                    1.5
                } else if w <= k {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(qhat.sector(n)[i], want);
            }
        }
        assert!(build_diag_projection(ProjectionKind::ClusterUpToWeighted(0), &amb).is_err());
    }

    #[test]
    fn truncated_shift_saturates_to_plain_shift() {
        let amb = SiteInterval::of_len(6);
        let p = params(5.0, 1.0);
        let omega = DisorderRealization::constant(amb, 0.4);
        let k = 1;
        let tilde = build_modified_hamiltonian(
            ModifiedKind::TruncatedGapShift { k, r_max: 6 },
            &amb,
            &p,
            &omega,
        )
        .unwrap();
        // with r_max >= L the truncation is inactive: H + 5 u * Qhat_{<=5}
        let mut direct = build_hamiltonian(&amb, &p, &omega, None).unwrap();
        let qhat = build_diag_projection(ProjectionKind::ClusterUpToWeighted(k + 4), &amb).unwrap();
        direct.add_diagonal(&qhat, (k + 4) as f64 * p.gap_unit());
        assert!(tilde.max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn compose_adjoint_grading() {
        let amb = SiteInterval::of_len(5);
        let t = embed_local_observable(&LocalObservable::sigma_x(2), &amb).unwrap();
        let id = BlockOperator::<f64>::identity(amb);
        let prod = t.compose(&id).unwrap();
        assert!(prod.max_abs_diff(&t) == 0.0);
        // gradings of sigma^x are +-1 and the adjoint flips them
        let g: Vec<i64> = t.gradings().into_iter().collect();
        assert_eq!(g, vec![-1, 1]);
        assert!(t.adjoint().max_abs_diff(&t) == 0.0); // symmetric

        // (AB)^t = B^t A^t on dense assemblies
        let occ = embed_local_observable(&LocalObservable::occupancy(1), &amb).unwrap();
        let ab = t.compose(&occ).unwrap();
        let ba_adj = occ.adjoint().compose(&t.adjoint()).unwrap();
        assert!(ab.adjoint().max_abs_diff(&ba_adj) < 1e-14);
    }

    #[test]
    fn embedded_occupancy_is_diagonal() {
        let amb = SiteInterval::of_len(6);
        let t = embed_local_observable(&LocalObservable::occupancy(3), &amb).unwrap();
        assert!(t.is_conserving());
        let d = build_diag_projection(ProjectionKind::ParticleIn(&SiteSet::new(vec![3])), &amb)
            .unwrap()
            .to_block::<f64>();
        assert!(t.max_abs_diff(&d) == 0.0);
    }

    #[test]
    fn embed_identity_is_identity() {
        let amb = SiteInterval::of_len(5);
        let x = SiteInterval::new(1, 2);
        let t = LocalObservable::new(x, Array2::from_diag(&Array1::from_elem(4, 1.0))).unwrap();
        let e = embed_local_observable(&t, &amb).unwrap();
        assert!(e.max_abs_diff(&BlockOperator::identity(amb)) == 0.0);
    }

    #[test]
    fn dump_roundtrip() {
        let amb = SiteInterval::of_len(5);
        let omega = DisorderRealization::constant(amb, 0.25);
        let h = build_hamiltonian(&amb, &params(2.0, 1.0), &omega, None).unwrap();
        let mut buf = Vec::new();
        write_block_operator(&h, &mut buf).unwrap();
        let back = read_block_operator(&mut buf.as_slice()).unwrap();
        let hc = h.map_scalar(|x| Complex64::new(x, 0.0));
        assert!(back.max_abs_diff(&hc) == 0.0);
    }
}
