//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line. Tolerances are pinned in the constants below; a
//! failing criterion panics with the collected violations.

mod common;

use common::{dense_bond_sum, random_conserving, random_graded, random_omega};
use xxz_lab::dynamics::{
    duhamel_residual, lightcone_bound_factorial, lightcone_norm, locality_error,
};
use xxz_lab::experiments::{
    fit_exponential_decay, runners, sample_disorder, thread_pool, DisorderSpec, Distribution,
    EnsembleStats, ExperimentConfig, OutputFormat,
};
use xxz_lab::lattice::{enlarge, SiteInterval, SiteSet};
use xxz_lab::qoperators::{
    build_gamma, build_hamiltonian, build_modified_hamiltonian, embed_local_observable,
    hamiltonian_sector, DisorderRealization, LocalObservable, ModelParams, ModifiedKind,
};
use xxz_lab::smoothing::{check_bounds, standard_smoothing, xi_threshold};
use xxz_lab::spectral::{
    diagonalize, eigenvalues, masked_function_norm, operator_norm_power, operator_norm_svd,
    windowed_norm, EnergyWindow, HalfInt,
};

use num_complex::Complex64;

fn report(index: u32, name: &str, violations: Vec<String>) {
    let verdict = if violations.is_empty() { "pass" } else { "fail" };
    println!("[acceptance {index:02}] {name}: {verdict}");
    assert!(
        violations.is_empty(),
        "criterion {index:02} ({name}) violations:\n{}",
        violations.join("\n")
    );
}

fn uniform_spec(master_seed: u64, count: usize) -> DisorderSpec {
    DisorderSpec {
        distribution: Distribution::Uniform01,
        master_seed,
        count,
    }
}

/// Simple zero ground state with a gap of one unit above it, across a
/// disorder ensemble.
#[test]
fn acceptance_01_spectral_gap_structure() {
    let mut violations = Vec::new();
    let amb = SiteInterval::of_len(12);
    let params = ModelParams::new(2.0, 1.0).unwrap();
    let spec = uniform_spec(0x01, 200);
    let floor = 0.5 - 1e-9;
    for i in 0..200u64 {
        let omega = sample_disorder(&spec, i, &amb).unwrap();
        let h = build_hamiltonian(&amb, &params, &omega, None).unwrap();
        let mut all: Vec<f64> = eigenvalues(&h)
            .unwrap()
            .iter()
            .flat_map(|s| s.iter().copied())
            .collect();
        all.sort_by(f64::total_cmp);
        if all[0].abs() > 1e-9 {
            violations.push(format!("realization {i}: ground energy {} not 0", all[0]));
        }
        if all[1] < floor {
            violations.push(format!(
                "realization {i}: first excited {} below {floor}",
                all[1]
            ));
        }
    }
    report(1, "spectral gap structure", violations);
}

/// Clean chain, one particle: the exact cosine band.
#[test]
fn acceptance_02_clean_single_particle_band() {
    let mut violations = Vec::new();
    let l = 20usize;
    let delta = 2.0;
    let amb = SiteInterval::of_len(l);
    let params = ModelParams::new(delta, 0.0).unwrap();
    let omega = DisorderRealization::constant(amb, 0.0);
    let h1 = hamiltonian_sector(&amb, &params, &omega, None, 1).unwrap();
    let (e, _) = xxz_lab::spectral::symmetric_eigen(&h1).unwrap();
    for (j, &ej) in e.iter().enumerate() {
        let want = 1.0 - (std::f64::consts::PI * (j + 1) as f64 / (l as f64 + 1.0)).cos() / delta;
        if (ej - want).abs() > 1e-10 {
            violations.push(format!("j={j}: {ej} vs {want}"));
        }
    }
    report(2, "clean single-particle band", violations);
}

/// The per-sector cluster-form assembly equals an independent dense
/// bond-sum assembly, entrywise, with and without a cut.
#[test]
fn acceptance_03_two_path_assembly() {
    let mut violations = Vec::new();
    let params = ModelParams::new(2.0, 1.0).unwrap();
    for l in 2..=8usize {
        let amb = SiteInterval::of_len(l);
        for w in 0..20u64 {
            let omega = random_omega(&amb, 0x0300 + 100 * l as u64 + w);
            let fast = build_hamiltonian(&amb, &params, &omega, None)
                .unwrap()
                .assemble_dense();
            let slow = dense_bond_sum(&amb, &params, &omega, None);
            let diff = (&fast - &slow).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if diff > 1e-12 {
                violations.push(format!("L={l} omega {w}: uncut mismatch {diff:.3e}"));
            }
            if l >= 4 {
                let cut = SiteInterval::new(1, l as i32 / 2);
                let fast = build_hamiltonian(&amb, &params, &omega, Some(&cut))
                    .unwrap()
                    .assemble_dense();
                let slow = dense_bond_sum(&amb, &params, &omega, Some(&cut));
                let diff = (&fast - &slow).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if diff > 1e-12 {
                    violations.push(format!("L={l} omega {w}: cut mismatch {diff:.3e}"));
                }
            }
        }
    }
    report(3, "two-path assembly", violations);
}

/// Boundary term of a cut: norm at most 2, with the bound attained.
#[test]
fn acceptance_04_boundary_norm() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut violations = Vec::new();
    let params = ModelParams::new(2.0, 1.0).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x04);
    let mut best = 0.0f64;
    for i in 0..50 {
        let l = rng.gen_range(4..=10usize);
        let amb = SiteInterval::of_len(l);
        let lo = rng.gen_range(1..l as i32 - 1);
        let hi = rng.gen_range(lo..l as i32 - 1);
        let cut = SiteInterval::new(lo, hi);
        let gamma = build_gamma(&amb, &cut, &params).unwrap();
        let norm = operator_norm_svd(&gamma).unwrap();
        if norm > 2.0 + 1e-10 {
            violations.push(format!("cut {i} (L={l}, {cut}): norm {norm}"));
        }
        best = best.max(norm);
    }
    if best < 2.0 - 1e-6 {
        violations.push(format!("no cut approached the bound: best norm {best}"));
    }
    report(4, "boundary norm", violations);
}

/// Finite-speed amplitudes below the factorial bound, with and without a
/// cut, across an ensemble.
#[test]
fn acceptance_05_finite_speed() {
    let mut violations = Vec::new();
    let amb = SiteInterval::of_len(12);
    let delta = 2.0;
    let params = ModelParams::new(delta, 1.0).unwrap();
    let cut = SiteInterval::new(0, 5);
    let probe = SiteSet::new(vec![0]);
    let spec = uniform_spec(0x05, 20);
    for i in 0..20u64 {
        let omega = sample_disorder(&spec, i, &amb).unwrap();
        let full = diagonalize(&build_hamiltonian(&amb, &params, &omega, None).unwrap()).unwrap();
        let cutted =
            diagonalize(&build_hamiltonian(&amb, &params, &omega, Some(&cut)).unwrap()).unwrap();
        for (label, eig) in [("full", &full), ("cut", &cutted)] {
            for r in 1..=6i32 {
                for s in [0.5, 1.0, 2.0] {
                    let measured = lightcone_norm(eig, &probe, r, s).unwrap();
                    let bound = lightcone_bound_factorial(delta, r as usize, s);
                    if measured > bound + 1e-10 {
                        violations.push(format!(
                            "realization {i} {label} r={r} s={s}: {measured:.3e} > {bound:.3e}"
                        ));
                    }
                }
            }
        }
    }
    report(5, "finite speed", violations);
}

/// Every closed-form bound of the smoothed indicator holds against direct
/// numerics across a sharpness sweep.
#[test]
fn acceptance_06_smoothing_bounds() {
    let mut violations = Vec::new();
    for xi in [4.0, 16.0, 64.0] {
        let sm = standard_smoothing(HalfInt::integer(0), 2.0, xi).unwrap();
        let rep = check_bounds(&sm).unwrap();
        if !rep.all_ok() {
            violations.push(format!("xi={xi}: {rep:?}"));
        }
    }
    report(6, "smoothing bounds", violations);
}

/// The hard low-window sandwich is controlled by the smoothed sandwich at
/// the derived sharpness threshold.
#[test]
fn acceptance_07_sandwich_domination() {
    let mut violations = Vec::new();
    let amb = SiteInterval::of_len(10);
    let delta = 2.0;
    let params = ModelParams::new(delta, 1.0).unwrap();
    let omega = random_omega(&amb, 0x07);
    let eig = diagonalize(&build_hamiltonian(&amb, &params, &omega, None).unwrap()).unwrap();
    let xi = xi_threshold(delta).unwrap() as f64;
    for q in [HalfInt::from_twice(1), HalfInt::integer(1)] {
        let sm = standard_smoothing(q, delta, xi).unwrap();
        let f = eig.apply_function(|x| sm.indicator.eval(x));
        let window = EnergyWindow::low_energy(q, 1.0 - 1.0 / delta);
        for seed in 0..50u64 {
            let s = random_conserving(&amb, 0x0700 + seed);
            let hard = windowed_norm(&eig, &window, &s, &eig, &window).unwrap();
            let smooth =
                operator_norm_svd(&f.compose(&s).unwrap().compose(&f).unwrap()).unwrap();
            if hard > 2.0 * smooth + 1e-9 {
                violations.push(format!(
                    "q={q} seed {seed}: hard {hard:.6e} > 2 * smooth {smooth:.6e}"
                ));
            }
        }
    }
    report(7, "sandwich domination", violations);
}

/// Interpolation identity between full and cut evolutions: small residual
/// at 64 nodes, decreasing under node doubling until below 1e-10.
#[test]
fn acceptance_08_interpolation_identity() {
    let mut violations = Vec::new();
    let amb = SiteInterval::of_len(10);
    let params = ModelParams::new(2.0, 1.0).unwrap();
    let omega = random_omega(&amb, 0x08);
    let cut = SiteInterval::new(0, 4);
    let full = diagonalize(&build_hamiltonian(&amb, &params, &omega, None).unwrap()).unwrap();
    let cutted =
        diagonalize(&build_hamiltonian(&amb, &params, &omega, Some(&cut)).unwrap()).unwrap();
    let gamma = build_gamma(&amb, &cut, &params).unwrap();
    let mut nodes = 64usize;
    let mut res = duhamel_residual(&full, &cutted, &gamma, 1.0, nodes).unwrap();
    if res > 1e-6 {
        violations.push(format!("64-node residual {res:.3e} > 1e-6"));
    }
    while res >= 1e-10 && nodes <= 1024 {
        nodes *= 2;
        let next = duhamel_residual(&full, &cutted, &gamma, 1.0, nodes).unwrap();
        if next >= res {
            violations.push(format!(
                "residual did not decrease: {res:.3e} -> {next:.3e} at {nodes} nodes"
            ));
            break;
        }
        res = next;
    }
    if res >= 1e-10 {
        violations.push(format!("residual stuck at {res:.3e}"));
    }
    report(8, "interpolation identity", violations);
}

/// Gap-shifted Hamiltonians sit above (k+1) units; the truncated-shift
/// resolvent decays off-diagonally at the predicted geometric rate.
#[test]
fn acceptance_09_shifted_spectra_and_resolvent() {
    let mut violations = Vec::new();
    let amb = SiteInterval::of_len(12);
    let delta = 2.0;
    let params = ModelParams::new(delta, 1.0).unwrap();
    let unit = 1.0 - 1.0 / delta;
    let spec = uniform_spec(0x09, 20);
    let probe = SiteSet::new(vec![0]);
    for i in 0..20u64 {
        let omega = sample_disorder(&spec, i, &amb).unwrap();
        for k in [1usize, 2] {
            let hk =
                build_modified_hamiltonian(ModifiedKind::GapShift { k }, &amb, &params, &omega)
                    .unwrap();
            let min = eigenvalues(&hk)
                .unwrap()
                .iter()
                .flat_map(|s| s.iter().copied())
                .fold(f64::INFINITY, f64::min);
            let floor = (k + 1) as f64 * unit - 1e-9;
            if min < floor {
                violations.push(format!("realization {i} k={k}: min {min} < {floor}"));
            }
        }
        let ht = build_modified_hamiltonian(
            ModifiedKind::TruncatedGapShift { k: 1, r_max: 4 },
            &amb,
            &params,
            &omega,
        )
        .unwrap();
        let eig = diagonalize(&ht).unwrap();
        let eta = eig.min_eigenvalue();
        if delta * eta <= 1.0 {
            continue;
        }
        for r in 1..=4i32 {
            let enlarged = enlarge(&probe, r, &amb);
            let measured = masked_function_norm(
                &eig,
                |e| Complex64::new(1.0 / e, 0.0),
                &probe,
                &enlarged,
            )
            .unwrap();
            let bound = (delta * eta).powi(-r) / eta;
            if measured > bound + 1e-10 {
                violations.push(format!(
                    "realization {i} r={r}: resolvent {measured:.3e} > {bound:.3e}"
                ));
            }
        }
    }
    report(9, "shifted spectra and resolvent decay", violations);
}

/// Windowed locality error of the restricted evolution decays in the cut
/// radius, exponentially well, and disorder beats the clean chain at a
/// matched late time.
#[test]
fn acceptance_10_locality_decay() {
    let mut violations = Vec::new();
    let amb = SiteInterval::of_len(12);
    let delta = 5.0;
    let params = ModelParams::new(delta, 4.0).unwrap();
    let q = HalfInt::from_twice(1);
    let window = EnergyWindow::low_energy(q, 1.0 - 1.0 / delta);
    let center = 6i32;
    let obs = embed_local_observable(&LocalObservable::sigma_x(center), &amb).unwrap();
    let spec = uniform_spec(0x10, 100);
    let ells: Vec<usize> = (1..=5).collect();
    let mut sums = vec![Vec::new(); ells.len()];
    let mut late_sum = Vec::new();
    for i in 0..100u64 {
        let omega = sample_disorder(&spec, i, &amb).unwrap();
        let full = diagonalize(&build_hamiltonian(&amb, &params, &omega, None).unwrap()).unwrap();
        for (gi, &ell) in ells.iter().enumerate() {
            let cut = SiteInterval::new(center - ell as i32, center + ell as i32).intersect(&amb);
            let cut_eig =
                diagonalize(&build_hamiltonian(&amb, &params, &omega, Some(&cut)).unwrap())
                    .unwrap();
            sums[gi].push(locality_error(&full, &cut_eig, &obs, 1.0, &window).unwrap());
            if ell == 1 {
                late_sum.push(locality_error(&full, &cut_eig, &obs, 3.0, &window).unwrap());
            }
        }
    }
    let means: Vec<f64> = sums
        .iter()
        .map(|v| EnsembleStats::from_values(v).unwrap().mean)
        .collect();
    for w in means.windows(2) {
        if !(w[1] < w[0]) {
            violations.push(format!("means not strictly decreasing: {means:?}"));
            break;
        }
    }
    let xs: Vec<f64> = ells.iter().map(|&e| e as f64).collect();
    match fit_exponential_decay(&xs, &means) {
        Ok(fit) => {
            println!(
                "[acceptance 10] fitted decay rate {:.4}, r_squared {:.4}",
                fit.rate, fit.r_squared
            );
            if !(fit.rate > 0.0) {
                violations.push(format!("fitted rate {} not positive", fit.rate));
            }
            if fit.r_squared < 0.9 {
                violations.push(format!("fit quality {} below 0.9", fit.r_squared));
            }
        }
        Err(e) => violations.push(format!("decay fit failed: {e}")),
    }
    // clean-chain comparison at a matched late time
    let clean_params = ModelParams::new(delta, 0.0).unwrap();
    let zero = DisorderRealization::constant(amb, 0.0);
    let clean_full =
        diagonalize(&build_hamiltonian(&amb, &clean_params, &zero, None).unwrap()).unwrap();
    let clean_cut = SiteInterval::new(center - 1, center + 1);
    let clean_cut_eig =
        diagonalize(&build_hamiltonian(&amb, &clean_params, &zero, Some(&clean_cut)).unwrap())
            .unwrap();
    let clean_err = locality_error(&clean_full, &clean_cut_eig, &obs, 3.0, &window).unwrap();
    let late_mean = EnsembleStats::from_values(&late_sum).unwrap().mean;
    println!("[acceptance 10] late-time mean {late_mean:.6e}, clean {clean_err:.6e}");
    if !(late_mean < clean_err) {
        violations.push(format!(
            "disordered mean {late_mean:.6e} not below clean {clean_err:.6e}"
        ));
    }
    report(10, "locality decay", violations);
}

/// Iterative norm oracle against the dense factorization.
#[test]
fn acceptance_11_norm_oracle() {
    let mut violations = Vec::new();
    let amb = SiteInterval::of_len(6);
    for seed in 0..50u64 {
        let op = random_graded(&amb, 0x1100 + seed);
        if op.num_blocks() == 0 {
            continue;
        }
        let fast = operator_norm_power(&op, 1e-12, 100_000).unwrap();
        let dense = operator_norm_svd(&op).unwrap();
        if (fast - dense).abs() > 1e-8 {
            violations.push(format!("seed {seed}: {fast} vs {dense}"));
        }
    }
    report(11, "norm oracle", violations);
}

/// Byte-identical reports for identical configs, independent of worker
/// count.
#[test]
fn acceptance_12_determinism() {
    let mut violations = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gap.json");
    std::fs::write(
        &path,
        r#"{
            "length": 8,
            "delta": 2.0,
            "lambda": 1.0,
            "disorder": {
                "distribution": {"kind": "uniform01"},
                "master_seed": 12,
                "count": 8
            }
        }"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    let mut outputs = Vec::new();
    for threads in [1usize, 1, 4] {
        let pool = thread_pool(Some(threads)).unwrap();
        let table = runners::run_gap_report(&cfg, &pool).unwrap();
        outputs.push(table.to_string_in(OutputFormat::Csv).unwrap());
    }
    if outputs[0] != outputs[1] {
        violations.push("repeat run differs at equal worker count".into());
    }
    if outputs[0] != outputs[2] {
        violations.push("output depends on worker count".into());
    }
    report(12, "determinism", violations);
}
