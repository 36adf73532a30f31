//! Dense per-sector spectral calculus: eigendecomposition, functions of
//! the Hamiltonian, window projections, resolvents, and operator norms.

use crate::error::{Error, Result};
use crate::lattice::SiteInterval;
use crate::qoperators::{BlockOperator, BlockVec, DiagOperator, Scalar};
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, Scalar as LaScalar, SVD, UPLO};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest sector dimension the dense eigensolver will accept.
pub const DENSE_EIG_CAP: usize = 4096;

/// Largest assembled dimension the dense SVD norm will accept.
pub const DENSE_SVD_CAP: usize = 4096;

/// Half-integers, stored as twice the value. Used for the window and
/// schedule indices, which step in halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i32);

impl HalfInt {
    pub fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn plus_half(self) -> Self {
        HalfInt(self.0 + 1)
    }

    pub fn ceil_int(self) -> i32 {
        if self.0 >= 0 {
            (self.0 + 1) / 2
        } else {
            self.0 / 2
        }
    }
}

impl std::fmt::Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A closed energy interval, possibly unbounded below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyWindow {
    lo: f64,
    hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "window bounds out of order: [{lo}, {hi}]"
            )));
        }
        Ok(EnergyWindow { lo, hi })
    }

    /// `(-inf, hi]`.
    pub fn up_to(hi: f64) -> Self {
        EnergyWindow {
            lo: f64::NEG_INFINITY,
            hi,
        }
    }

    /// The low-energy window at index `q`: everything up to
    /// `(q + 3/4)` spectral-gap units.
    pub fn low_energy(q: HalfInt, gap_unit: f64) -> Self {
        EnergyWindow::up_to((q.as_f64() + 0.75) * gap_unit)
    }

    /// The excited band at index `q`: from one gap unit up to
    /// `(q + 3/4)` gap units.
    pub fn excited_band(q: HalfInt, gap_unit: f64) -> Self {
        EnergyWindow {
            lo: gap_unit,
            hi: (q.as_f64() + 0.75) * gap_unit,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.contains_tol(x, 0.0)
    }

    /// Membership with a boundary tolerance (eigenvalues landing within
    /// `tol` of an endpoint count as inside).
    pub fn contains_tol(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

/// Eigendecomposition of one particle-number sector.
#[derive(Clone, Debug)]
pub struct SectorEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

/// Full eigendecomposition of a conserving symmetric block operator,
/// sector by sector.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    ambient: SiteInterval,
    sectors: Vec<SectorEigen>,
}

/// Symmetric dense eigendecomposition, ascending eigenvalues.
pub fn symmetric_eigen(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    if m.nrows() > DENSE_EIG_CAP {
        return Err(Error::SectorTooLarge {
            dim: m.nrows(),
            cap: DENSE_EIG_CAP,
        });
    }
    let (e, v) = m.eigh(UPLO::Lower)?;
    Ok((e, v))
}

/// Diagonalize a symmetric particle-conserving block operator.
pub fn diagonalize(op: &BlockOperator<f64>) -> Result<EigenSystem> {
    if !op.is_conserving() {
        return Err(Error::NotConserving);
    }
    let asym = op.asymmetry();
    if asym > 1e-10 * (1.0 + op.max_abs()) {
        return Err(Error::NotSymmetric(asym));
    }
    let l = op.num_sites();
    let mut sectors = Vec::with_capacity(l + 1);
    for n in 0..=l {
        let dim = op.sector_dim(n);
        let se = match op.block(n, n) {
            Some(b) => {
                let (values, vectors) = symmetric_eigen(b)?;
                SectorEigen { values, vectors }
            }
            // absent block is the zero matrix
            None => SectorEigen {
                values: Array1::zeros(dim),
                vectors: Array2::eye(dim),
            },
        };
        sectors.push(se);
    }
    Ok(EigenSystem {
        ambient: *op.ambient(),
        sectors,
    })
}

/// Eigenvalues only (all sectors, ascending within each sector).
pub fn eigenvalues(op: &BlockOperator<f64>) -> Result<Vec<Array1<f64>>> {
    if !op.is_conserving() {
        return Err(Error::NotConserving);
    }
    let l = op.num_sites();
    let mut out = Vec::with_capacity(l + 1);
    for n in 0..=l {
        let dim = op.sector_dim(n);
        match op.block(n, n) {
            Some(b) => {
                if b.nrows() > DENSE_EIG_CAP {
                    return Err(Error::SectorTooLarge {
                        dim: b.nrows(),
                        cap: DENSE_EIG_CAP,
                    });
                }
                let (e, _) = b.eigh(UPLO::Lower)?;
                out.push(e);
            }
            None => out.push(Array1::zeros(dim)),
        }
    }
    Ok(out)
}

impl EigenSystem {
    pub fn ambient(&self) -> &SiteInterval {
        &self.ambient
    }

    pub fn num_sites(&self) -> usize {
        self.ambient.len()
    }

    pub fn sector(&self, n: usize) -> &SectorEigen {
        &self.sectors[n]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.values.iter())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.values.iter())
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_eigenvalues_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .sectors
            .iter()
            .flat_map(|s| s.values.iter())
            .copied()
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Smallest eigenvalue strictly above `floor + tol`.
    pub fn min_eigenvalue_above(&self, floor: f64, tol: f64) -> Option<f64> {
        self.sectors
            .iter()
            .flat_map(|s| s.values.iter())
            .copied()
            .filter(|&e| e > floor + tol)
            .fold(None, |acc, e| Some(acc.map_or(e, |a: f64| a.min(e))))
    }

    fn boundary_tol(&self) -> f64 {
        1e-12 * (1.0 + self.max_eigenvalue().abs().max(self.min_eigenvalue().abs()))
    }

    /// Apply a real function of the operator: `U f(D) U^t`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> BlockOperator<f64> {
        let mut out = BlockOperator::new(self.ambient);
        for (n, s) in self.sectors.iter().enumerate() {
            let fd = s.values.mapv(&f);
            let scaled = &s.vectors * &fd; // scales columns
            out.insert_block(n, n, scaled.dot(&s.vectors.t()));
        }
        out
    }

    /// Apply a complex function of the operator.
    pub fn apply_function_c(&self, f: impl Fn(f64) -> Complex64) -> BlockOperator<Complex64> {
        let mut out = BlockOperator::new(self.ambient);
        for (n, s) in self.sectors.iter().enumerate() {
            let vc = s.vectors.mapv(|x| Complex64::new(x, 0.0));
            let fd = s.values.mapv(&f);
            let scaled = &vc * &fd;
            out.insert_block(n, n, scaled.dot(&vc.t()));
        }
        out
    }

    /// The unitary `e^{i t H}`.
    pub fn unitary(&self, t: f64) -> BlockOperator<Complex64> {
        self.apply_function_c(|e| Complex64::new(0.0, t * e).exp())
    }

    /// The resolvent `(H - z)^{-1}`; errors if `z` is within `1e-12` of
    /// the spectrum.
    pub fn resolvent(&self, z: Complex64) -> Result<BlockOperator<Complex64>> {
        let dist = self
            .sectors
            .iter()
            .flat_map(|s| s.values.iter())
            .map(|&e| (Complex64::new(e, 0.0) - z).norm())
            .fold(f64::INFINITY, f64::min);
        if dist < 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "resolvent point {z} within {dist:.1e} of the spectrum"
            )));
        }
        Ok(self.apply_function_c(|e| (Complex64::new(e, 0.0) - z).finv()))
    }

    /// Eigenvector columns whose eigenvalues fall inside `window`
    /// (boundary-tolerant), one matrix per sector.
    pub fn window_columns(&self, window: &EnergyWindow) -> Vec<Array2<f64>> {
        let tol = self.boundary_tol();
        self.sectors
            .iter()
            .map(|s| {
                let cols: Vec<usize> = s
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| window.contains_tol(e, tol))
                    .map(|(i, _)| i)
                    .collect();
                let mut v = Array2::zeros((s.vectors.nrows(), cols.len()));
                for (k, &j) in cols.iter().enumerate() {
                    v.column_mut(k).assign(&s.vectors.column(j));
                }
                v
            })
            .collect()
    }

    pub fn count_in_window(&self, window: &EnergyWindow) -> usize {
        let tol = self.boundary_tol();
        self.sectors
            .iter()
            .flat_map(|s| s.values.iter())
            .filter(|&&e| window.contains_tol(e, tol))
            .count()
    }

    /// The spectral projection onto `window`.
    pub fn spectral_projection(&self, window: &EnergyWindow) -> BlockOperator<f64> {
        let cols = self.window_columns(window);
        let mut out = BlockOperator::new(self.ambient);
        for (n, v) in cols.iter().enumerate() {
            out.insert_block(n, n, v.dot(&v.t()));
        }
        out
    }
}

/// Operator norm by dense SVD of the assembled matrix.
pub fn operator_norm_svd<T>(op: &BlockOperator<T>) -> Result<f64>
where
    T: Scalar + LaScalar<Real = f64> + ndarray_linalg::Lapack,
{
    if op.total_dim() > DENSE_SVD_CAP {
        return Err(Error::SectorTooLarge {
            dim: op.total_dim(),
            cap: DENSE_SVD_CAP,
        });
    }
    if op.num_blocks() == 0 {
        return Ok(0.0);
    }
    let full = op.assemble_dense();
    let (_, s, _) = full.svd(false, false)?;
    Ok(s.iter().copied().fold(0.0, f64::max))
}

/// Operator norm by subspace iteration on `A^dagger A` with a block of 4
/// deterministic pseudorandom start vectors.
pub fn operator_norm_power<T: Scalar>(
    op: &BlockOperator<T>,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if op.num_blocks() == 0 || op.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let adj = op.adjoint();
    let block = 4usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut vs: Vec<BlockVec<T>> = (0..block)
        .map(|_| {
            let mut v = BlockVec::zeros(*op.ambient());
            for s in &mut v.sectors {
                for x in s.iter_mut() {
                    *x = T::from_real(rng.gen::<f64>() - 0.5);
                }
            }
            v
        })
        .collect();
    orthonormalize(&mut vs);
    let mut prev = f64::INFINITY;
    let mut prev_change = f64::INFINITY;
    for _ in 0..max_iter {
        let mut theta_max = 0.0f64;
        let mut next = Vec::with_capacity(block);
        for v in &vs {
            let av = op.apply(v);
            theta_max = theta_max.max(av.norm());
            next.push(adj.apply(&av));
        }
        orthonormalize(&mut next);
        vs = next;
        let change = (theta_max - prev).abs();
        if change <= tol * theta_max.max(1.0) {
            // the per-sweep change underestimates the remaining error when
            // the contraction ratio is close to 1; extrapolate the
            // geometric tail before accepting
            let est = if prev_change.is_finite() && prev_change > 0.0 {
                let ratio = (change / prev_change).min(0.99);
                change * ratio / (1.0 - ratio)
            } else {
                change
            };
            if est <= tol * theta_max.max(1.0) {
                return Ok(theta_max);
            }
        }
        prev_change = change;
        prev = theta_max;
    }
    Err(Error::NoConvergence(format!(
        "subspace iteration stalled at {prev:.6e}"
    )))
}

fn orthonormalize<T: Scalar>(vs: &mut Vec<BlockVec<T>>) {
    let mut kept: Vec<BlockVec<T>> = Vec::with_capacity(vs.len());
    for mut v in vs.drain(..) {
        for u in &kept {
            let c = u.dot_conj(&v);
            for (su, sv) in u.sectors.iter().zip(v.sectors.iter_mut()) {
                for (x, y) in su.iter().zip(sv.iter_mut()) {
                    *y = *y - c * *x;
                }
            }
        }
        let n = v.norm();
        if n > 1e-300 {
            v.scale_mut(1.0 / n);
            kept.push(v);
        }
    }
    *vs = kept;
}

/// Operator norm: subspace iteration first, dense SVD as a fallback for
/// small operators if the iteration fails to settle.
pub fn operator_norm<T>(op: &BlockOperator<T>) -> Result<f64>
where
    T: Scalar + LaScalar<Real = f64> + ndarray_linalg::Lapack,
{
    match operator_norm_power(op, 1e-11, 20_000) {
        Ok(v) => Ok(v),
        Err(e) => {
            if op.total_dim() <= DENSE_SVD_CAP {
                operator_norm_svd(op)
            } else {
                Err(e)
            }
        }
    }
}

/// `|| P_in^A f(H) P_free^B ||` for a conserving eigensystem: rows keep
/// configurations with a particle in `rows_in`, columns keep
/// configurations with no particle in `cols_free`, and `f` acts on the
/// spectrum. Only the selected columns are ever materialized.
pub fn masked_function_norm(
    eig: &EigenSystem,
    f: impl Fn(f64) -> Complex64,
    rows_in: &crate::lattice::SiteSet,
    cols_free: &crate::lattice::SiteSet,
) -> Result<f64> {
    let ambient = *eig.ambient();
    if !rows_in.is_subset_of(&ambient) || !cols_free.is_subset_of(&ambient) {
        return Err(Error::Geometry(format!(
            "mask sets must lie inside {ambient}"
        )));
    }
    let row_mask = rows_in.mask(&ambient);
    let col_mask = cols_free.mask(&ambient);
    let l = ambient.len();
    let mut worst = 0.0f64;
    for n in 0..=l {
        let basis = crate::lattice::SectorBasis::new(ambient, n);
        let mut cols = Vec::new();
        let mut rows = Vec::new();
        for (i, m) in basis.iter_masks().enumerate() {
            if m & col_mask == 0 {
                cols.push(i);
            }
            if m & row_mask != 0 {
                rows.push(i);
            }
        }
        if cols.is_empty() || rows.is_empty() {
            continue;
        }
        let se = eig.sector(n);
        // f(H) restricted to the kept columns: U (f(D) * (U^t)_cols)
        let ut_cols = se.vectors.select(ndarray::Axis(0), &cols).t().to_owned();
        let fd = se.values.mapv(&f);
        let mut scaled = ut_cols.mapv(|x| Complex64::new(x, 0.0));
        for (i, mut row) in scaled.rows_mut().into_iter().enumerate() {
            let p = fd[i];
            row.mapv_inplace(|x| x * p);
        }
        let uc = se.vectors.mapv(|x| Complex64::new(x, 0.0));
        let full_cols = uc.dot(&scaled);
        let sub = full_cols.select(ndarray::Axis(0), &rows);
        let (_, sv, _) = sub.svd(false, false)?;
        worst = worst.max(sv.iter().copied().fold(0.0, f64::max));
    }
    Ok(worst)
}

/// Norm of `D1 * op * D2` for diagonal masks.
pub fn masked_norm<T>(d1: &DiagOperator, op: &BlockOperator<T>, d2: &DiagOperator) -> Result<f64>
where
    T: Scalar + LaScalar<Real = f64> + ndarray_linalg::Lapack,
{
    let masked = d1.apply_left(&d2.apply_right(op));
    operator_norm(&masked)
}

/// Norm of `P_left * op * P_right` where the projections are spectral
/// windows of two (possibly different) operators, computed in the
/// compressed window bases.
pub fn windowed_norm<T>(
    left: &EigenSystem,
    left_window: &EnergyWindow,
    op: &BlockOperator<T>,
    right: &EigenSystem,
    right_window: &EnergyWindow,
) -> Result<f64>
where
    T: Scalar + LaScalar<Real = f64> + ndarray_linalg::Lapack,
{
    if left.ambient() != op.ambient() || right.ambient() != op.ambient() {
        return Err(Error::AmbientMismatch(
            left.ambient().to_string(),
            op.ambient().to_string(),
        ));
    }
    let vl = left.window_columns(left_window);
    let vr = right.window_columns(right_window);
    let row_counts: Vec<usize> = vl.iter().map(|v| v.ncols()).collect();
    let col_counts: Vec<usize> = vr.iter().map(|v| v.ncols()).collect();
    let mut row_off = vec![0usize];
    for c in &row_counts {
        row_off.push(row_off.last().unwrap() + c);
    }
    let mut col_off = vec![0usize];
    for c in &col_counts {
        col_off.push(col_off.last().unwrap() + c);
    }
    let (rows, cols) = (*row_off.last().unwrap(), *col_off.last().unwrap());
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    let mut compressed: Array2<T> = Array2::zeros((rows, cols));
    for (&(m, n), b) in op.blocks() {
        if row_counts[m] == 0 || col_counts[n] == 0 {
            continue;
        }
        let vlt = vl[m].t().mapv(<T as Scalar>::from_real);
        let vrt = vr[n].mapv(<T as Scalar>::from_real);
        let small = vlt.dot(b).dot(&vrt);
        for ((i, j), &x) in small.indexed_iter() {
            compressed[[row_off[m] + i, col_off[n] + j]] = x;
        }
    }
    let (_, s, _) = compressed.svd(false, false)?;
    Ok(s.iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{SiteInterval, SiteSet};
    use crate::qoperators::{
        build_diag_projection, build_hamiltonian, embed_local_observable, hamiltonian_sector,
        DisorderRealization, LocalObservable, ModelParams, ProjectionKind,
    };

    fn clean_chain(l: usize, delta: f64) -> (SiteInterval, BlockOperator<f64>) {
        let amb = SiteInterval::of_len(l);
        let p = ModelParams::new(delta, 0.0).unwrap();
        let omega = DisorderRealization::constant(amb, 0.0);
        (amb, build_hamiltonian(&amb, &p, &omega, None).unwrap())
    }

    fn disordered_chain(l: usize, delta: f64, lambda: f64) -> (SiteInterval, BlockOperator<f64>) {
        let amb = SiteInterval::of_len(l);
        let p = ModelParams::new(delta, lambda).unwrap();
        let omega_vals: Vec<f64> = (0..l).map(|i| ((i as f64) * 0.61803).fract()).collect();
        let omega = DisorderRealization::new(amb, omega_vals, None).unwrap();
        (amb, build_hamiltonian(&amb, &p, &omega, None).unwrap())
    }

    #[test]
    fn single_particle_clean_spectrum_is_cosine_band() {
        // one particle on L sites: eigenvalues 1 - cos(j pi / (L+1)) / Delta
        let l = 10usize;
        let delta = 2.0;
        let amb = SiteInterval::of_len(l);
        let p = ModelParams::new(delta, 0.0).unwrap();
        let omega = DisorderRealization::constant(amb, 0.0);
        let h1 = hamiltonian_sector(&amb, &p, &omega, None, 1).unwrap();
        let (e, _) = symmetric_eigen(&h1).unwrap();
        for (j, &ej) in e.iter().enumerate() {
            let want =
                1.0 - (std::f64::consts::PI * (j + 1) as f64 / (l as f64 + 1.0)).cos() / delta;
            assert!((ej - want).abs() < 1e-12, "j={j}: {ej} vs {want}");
        }
    }

    #[test]
    fn trace_of_function_matches_eigenvalue_sum() {
        let (_, h) = disordered_chain(6, 2.0, 1.0);
        let eig = diagonalize(&h).unwrap();
        let f = |x: f64| (x * 0.3).cos() + 0.1 * x;
        let fh = eig.apply_function(f);
        let trace: f64 = (0..=6)
            .map(|n| {
                fh.block(n, n)
                    .map(|b| b.diag().sum())
                    .unwrap_or(0.0)
            })
            .sum();
        let want: f64 = eig.all_eigenvalues_sorted().iter().map(|&e| f(e)).sum();
        assert!((trace - want).abs() < 1e-10);
    }

    #[test]
    fn spectral_projection_is_idempotent_and_commutes() {
        let (_, h) = disordered_chain(6, 2.0, 1.0);
        let eig = diagonalize(&h).unwrap();
        let w = EnergyWindow::new(0.2, 1.5).unwrap();
        let p = eig.spectral_projection(&w);
        let pp = p.compose(&p).unwrap();
        assert!(pp.max_abs_diff(&p) < 1e-10);
        let hp = h.compose(&p).unwrap();
        let ph = p.compose(&h).unwrap();
        assert!(hp.max_abs_diff(&ph) < 1e-10);
        // rank equals the eigenvalue count in the window
        let trace: f64 = (0..=6)
            .map(|n| p.block(n, n).map(|b| b.diag().sum()).unwrap_or(0.0))
            .sum();
        assert!((trace - eig.count_in_window(&w) as f64).abs() < 1e-8);
    }

    #[test]
    fn unitary_is_unitary_and_groups() {
        let (amb, h) = disordered_chain(5, 3.0, 2.0);
        let eig = diagonalize(&h).unwrap();
        let u = eig.unitary(0.7);
        let udag_u = u.adjoint().compose(&u).unwrap();
        let id = BlockOperator::<Complex64>::identity(amb);
        assert!(udag_u.max_abs_diff(&id) < 1e-12);
        let u2 = eig.unitary(1.4);
        let uu = u.compose(&u).unwrap();
        assert!(uu.max_abs_diff(&u2) < 1e-12);
    }

    #[test]
    fn resolvent_identity() {
        let (amb, h) = disordered_chain(5, 2.0, 1.0);
        let eig = diagonalize(&h).unwrap();
        let z = Complex64::new(-0.3, 0.2);
        let r = eig.resolvent(z).unwrap();
        let hc = h.map_scalar(|x| Complex64::new(x, 0.0));
        let shifted = hc
            .add_scaled(
                &BlockOperator::<Complex64>::identity(amb),
                -z,
            )
            .unwrap();
        let prod = shifted.compose(&r).unwrap();
        assert!(prod.max_abs_diff(&BlockOperator::identity(amb)) < 1e-12);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let (amb, h) = disordered_chain(6, 2.0, 1.5);
        let n1 = operator_norm_power(&h, 1e-12, 20_000).unwrap();
        let n2 = operator_norm_svd(&h).unwrap();
        assert!((n1 - n2).abs() < 1e-9, "{n1} vs {n2}");
        // a non-conserving operator too
        let sx = embed_local_observable(&LocalObservable::sigma_x(2), &amb).unwrap();
        let m = h.compose(&sx).unwrap();
        let n1 = operator_norm_power(&m, 1e-12, 20_000).unwrap();
        let n2 = operator_norm_svd(&m).unwrap();
        assert!((n1 - n2).abs() < 1e-9, "{n1} vs {n2}");
    }

    #[test]
    fn windowed_norm_matches_dense_projection() {
        let (amb, h) = disordered_chain(5, 2.0, 1.0);
        let eig = diagonalize(&h).unwrap();
        let w = EnergyWindow::new(0.3, 2.0).unwrap();
        let sx = embed_local_observable(&LocalObservable::sigma_x(2), &amb).unwrap();
        let fast = windowed_norm(&eig, &w, &sx, &eig, &w).unwrap();
        let p = eig.spectral_projection(&w);
        let dense = p.compose(&sx).unwrap().compose(&p).unwrap();
        let slow = operator_norm_svd(&dense).unwrap();
        assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow}");
    }

    #[test]
    fn masked_norm_matches_dense() {
        let (amb, h) = disordered_chain(5, 2.0, 1.0);
        let a = SiteSet::new(vec![0, 1]);
        let b = SiteSet::new(vec![3, 4]);
        let pm = build_diag_projection(ProjectionKind::ParticleIn(&a), &amb).unwrap();
        let pp = build_diag_projection(ProjectionKind::ParticleFree(&b), &amb).unwrap();
        let fast = masked_norm(&pm, &h, &pp).unwrap();
        let dense = pm
            .to_block::<f64>()
            .compose(&h)
            .unwrap()
            .compose(&pp.to_block())
            .unwrap();
        let slow = operator_norm_svd(&dense).unwrap();
        assert!((fast - slow).abs() < 1e-9);
    }

    #[test]
    fn half_int_arithmetic() {
        let q = HalfInt::from_twice(1); // 1/2
        assert_eq!(q.as_f64(), 0.5);
        assert!(!q.is_integer());
        assert_eq!(q.plus_half(), HalfInt::integer(1));
        assert_eq!(q.ceil_int(), 1);
        assert_eq!(HalfInt::integer(3).ceil_int(), 3);
        assert_eq!(format!("{}", HalfInt::from_twice(3)), "3/2");
        assert_eq!(format!("{}", HalfInt::integer(2)), "2");
    }

    #[test]
    fn rejects_asymmetric_and_nonconserving() {
        let amb = SiteInterval::of_len(4);
        let mut op = BlockOperator::<f64>::new(amb);
        let mut b = Array2::zeros((4, 4));
        b[[0, 1]] = 1.0;
        op.insert_block(1, 1, b);
        assert!(matches!(diagonalize(&op), Err(Error::NotSymmetric(_))));
        let sx = embed_local_observable(&LocalObservable::sigma_x(1), &amb).unwrap();
        assert!(matches!(diagonalize(&sx), Err(Error::NotConserving)));
    }

    #[test]
    fn low_energy_window_counts_ground_state() {
        let (_, h) = clean_chain(6, 2.0);
        let eig = diagonalize(&h).unwrap();
        // clean chain at lambda 0: vacuum at zero, rest at >= 1 - 1/Delta
        let w = EnergyWindow::up_to(0.25);
        assert_eq!(eig.count_in_window(&w), 1);
    }
}
