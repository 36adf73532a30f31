//! Independent dense oracles for the acceptance suite.
//!
//! Everything here is built from first principles on the full 2^L
//! configuration space with explicit bit rules, deliberately avoiding the
//! library's per-sector assembly path, so agreement between the two is a
//! real cross-check.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xxz_lab::lattice::{SectorBasis, SiteInterval};
use xxz_lab::qoperators::{BlockOperator, DisorderRealization, ModelParams};

/// Graded index (sectors by particle number, colex rank inside each) of a
/// configuration mask. Only the ordering comes from the library; the
/// matrix entries never do.
pub fn graded_permutation(ambient: &SiteInterval) -> Vec<usize> {
    let l = ambient.len();
    let mut perm = vec![0usize; 1 << l];
    let mut offset = 0usize;
    for n in 0..=l {
        let basis = SectorBasis::new(*ambient, n);
        for (i, mask) in basis.iter_masks().enumerate() {
            perm[mask as usize] = offset + i;
        }
        offset += basis.dim();
    }
    perm
}

/// Bond-sum assembly of the chain Hamiltonian, dense in the graded
/// ordering: total particle number, plus for every kept bond a two-site
/// term with hopping -1/(2 Delta) between the singly occupied pair states
/// and -1 on the doubly occupied one, plus the diagonal random field.
/// A cut removes the crossing bonds entirely.
pub fn dense_bond_sum(
    ambient: &SiteInterval,
    params: &ModelParams,
    omega: &DisorderRealization,
    cut: Option<&SiteInterval>,
) -> Array2<f64> {
    let l = ambient.len();
    let dim = 1usize << l;
    let perm = graded_permutation(ambient);
    let hop = -1.0 / (2.0 * params.delta());
    let mut h = Array2::<f64>::zeros((dim, dim));
    for mask in 0..dim as u64 {
        let a = perm[mask as usize];
        let mut diag = mask.count_ones() as f64;
        for p in 0..l {
            if mask >> p & 1 == 1 {
                diag += params.lambda() * omega.couplings()[p];
            }
        }
        for p in 0..l.saturating_sub(1) {
            if !bond_kept(ambient, cut, p) {
                continue;
            }
            let pair = mask >> p & 3;
            if pair == 3 {
                diag -= 1.0;
            } else if pair == 1 || pair == 2 {
                let b = perm[(mask ^ (3 << p)) as usize];
                h[[a, b]] = hop;
            }
        }
        h[[a, a]] = diag;
    }
    h
}

/// Whether the bond between relative sites `p` and `p+1` survives the cut
/// (a bond is dropped exactly when it crosses the cut boundary).
fn bond_kept(ambient: &SiteInterval, cut: Option<&SiteInterval>, p: usize) -> bool {
    match cut {
        None => true,
        Some(k) => {
            let lo = ambient.lo() + p as i32;
            k.contains(lo) == k.contains(lo + 1)
        }
    }
}

/// A deterministic pseudorandom particle-conserving block operator with
/// symmetric blocks, entries uniform in [-1, 1].
pub fn random_conserving(ambient: &SiteInterval, seed: u64) -> BlockOperator<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = ambient.len();
    let mut op = BlockOperator::new(*ambient);
    for n in 0..=l {
        let d = op.sector_dim(n);
        let mut m = Array2::<f64>::zeros((d, d));
        for i in 0..d {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        op.insert_block(n, n, m);
    }
    op
}

/// A deterministic pseudorandom graded block operator: a random subset of
/// (n_out, n_in) blocks along a few random gradings, entries uniform in
/// [-1, 1]. Not symmetric, not conserving in general.
pub fn random_graded(ambient: &SiteInterval, seed: u64) -> BlockOperator<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = ambient.len() as i64;
    let mut op = BlockOperator::new(*ambient);
    let grading_count = rng.gen_range(1..=3usize);
    for _ in 0..grading_count {
        let d = rng.gen_range(-2..=2i64);
        for n_in in 0..=l {
            let n_out = n_in + d;
            if n_out < 0 || n_out > l {
                continue;
            }
            if rng.gen_bool(0.7) {
                let rows = op.sector_dim(n_out as usize);
                let cols = op.sector_dim(n_in as usize);
                let mut m = Array2::<f64>::zeros((rows, cols));
                for v in m.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                op.insert_block(n_out as usize, n_in as usize, m);
            }
        }
    }
    op
}

/// Uniform [0, 1] couplings from a seeded generator.
pub fn random_omega(ambient: &SiteInterval, seed: u64) -> DisorderRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: Vec<f64> = (0..ambient.len()).map(|_| rng.gen::<f64>()).collect();
    DisorderRealization::new(*ambient, omega, None).unwrap()
}
