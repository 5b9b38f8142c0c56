//! The property battery run by `cstar-rank verify-suite` and by the
//! acceptance test target. Each criterion returns a pass/fail line with the
//! counts it observed; nothing here is calibrated after the fact.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Algebra, AlgebraElement};
use crate::error::Error;
use crate::hilbert::{gen_oracle, gen_oracle_margin, ModuleSpace, ModuleTuple};
use crate::sample::{
    random_element, random_low_rank_tuple, random_positive, random_tuple, trial_rng,
};
use crate::stable_rank::{
    bass_reduce, density_experiment, hv_pad, hv_perturb, sr_formula, standard_padding,
    telescoping_residual, warfield_b_to_a, warfield_forward, PerturbationParams,
};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<28} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub tol: f64,
    /// Divide every sample count by 10 (smoke runs only).
    pub quick: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 2024,
            tol: crate::DEFAULT_TOL,
            quick: false,
        }
    }
}

impl SuiteOptions {
    fn count(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(1)
        } else {
            full
        }
    }
}

fn outcome(id: u8, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
    }
}

fn algebra(blocks: &[usize]) -> Algebra {
    Algebra::new(blocks.to_vec()).expect("valid blocks")
}

fn matrix_space(blocks: &[usize], rows: usize, cols: usize) -> ModuleSpace {
    ModuleSpace::matrix(&algebra(blocks), rows, cols).expect("valid dims")
}

fn unit_residual(a: &AlgebraElement) -> f64 {
    a.try_sub(&a.algebra().unit()).expect("same algebra").norm()
}

/// Runs every criterion in order.
pub fn run_all(opts: &SuiteOptions) -> Vec<CriterionOutcome> {
    vec![
        formula_grid(opts),
        dual_witness_suite(opts),
        unimodular_equals_generators(opts),
        warfield_suite(opts),
        perturbation_suite(opts),
        negative_control(opts),
        kernel_numerics(opts),
        reproducibility(opts),
    ]
}

/// Criterion 1: Unimodular fraction is 1.0 exactly when `k >= ⌈m/n⌉` and 0.0 when
/// `nk < m`; the square-case identity of the formula.
pub fn formula_grid(opts: &SuiteOptions) -> CriterionOutcome {
    let trials = opts.count(500);
    let bases: [&[usize]; 3] = [&[1], &[2], &[1, 2]];
    let mut cases = Vec::new();
    for base in bases {
        for n in 1..=6 {
            for m in 1..=6 {
                for k in 1..=4 {
                    cases.push((base, n, m, k));
                }
            }
        }
    }
    let failures: Vec<String> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(i, &(base, n, m, k))| {
            let space = matrix_space(base, n, m);
            let seed = opts.seed.wrapping_add(i as u64);
            let report = density_experiment(&space, k, trials, seed, opts.tol).ok()?;
            let threshold = (0..).find(|q| q * n >= m).unwrap();
            let expected = if k >= threshold { 1.0 } else { 0.0 };
            let predicted_ok = report.predicted_sr == Some(threshold as u64);
            let obstruction_ok = report.exact_obstruction == (n * k < m);
            if report.unimodular_fraction != expected || !predicted_ok || !obstruction_ok {
                Some(format!(
                    "{base:?} n={n} m={m} k={k}: fraction {} expected {expected}",
                    report.unimodular_fraction
                ))
            } else {
                None
            }
        })
        .collect();
    let mut identity_failures = 0;
    for s in 1..=20u64 {
        for n in 1..=20u64 {
            let classical = (0..).find(|q| q * n >= s - 1).unwrap() + 1;
            if sr_formula(s, n, n).ok() != Some(classical) {
                identity_failures += 1;
            }
        }
    }
    let passed = failures.is_empty() && identity_failures == 0;
    let mut detail = format!(
        "{} grid cells x {trials} trials, {} mismatches; square identity mismatches {identity_failures}/400",
        cases.len(),
        failures.len()
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(1, "stable-rank formula grid", passed, detail)
}

fn dual_shapes() -> Vec<ModuleSpace> {
    vec![
        matrix_space(&[1], 1, 1),
        matrix_space(&[1], 3, 1),
        matrix_space(&[1], 3, 2),
        matrix_space(&[2], 2, 2),
        matrix_space(&[1, 2], 2, 1),
        matrix_space(&[1, 3], 3, 2),
    ]
}

/// Criterion 2: Dual witnesses satisfy `<y, x> = 1`, and every such `y` forces
/// `min eig <x, x> >= 1/‖y‖²`.
pub fn dual_witness_suite(opts: &SuiteOptions) -> CriterionOutcome {
    let per_shape = opts.count(500);
    let shapes = dual_shapes();
    let mut worst_residual: f64 = 0.0;
    let mut worst_slack = f64::INFINITY;
    let mut violations = 0usize;
    let mut checked = 0usize;
    for (si, space) in shapes.iter().enumerate() {
        for i in 0..per_shape {
            let mut rng = trial_rng(opts.seed ^ 0x2000, (si * per_shape + i) as u64);
            let x = random_tuple(space, 1, &mut rng);
            let Ok(y) = x.dual_witness(opts.tol) else {
                violations += 1;
                continue;
            };
            let residual = unit_residual(&y.inner_right(&x).expect("same space"));
            worst_residual = worst_residual.max(residual);
            if residual > 1e-8 {
                violations += 1;
            }
            // Other solutions of <y', x> = 1: add w with <w, x> = 0.
            let g = x.gram();
            let v = random_tuple(space, 1, &mut rng);
            let proj = x
                .right_mul(
                    &g.inverse_with_tol(opts.tol)
                        .unwrap()
                        .try_mul(&x.inner_right(&v).unwrap())
                        .unwrap(),
                )
                .unwrap();
            let w = v.try_sub(&proj).unwrap();
            let min_eig = g.min_eigenvalue();
            for candidate in [
                y.clone(),
                ModuleTuple::new(vec![y.get(0).try_add(w.get(0)).unwrap()]).unwrap(),
            ] {
                let pairing = candidate.inner_right(&x).unwrap();
                if unit_residual(&pairing) > 1e-8 {
                    violations += 1;
                    continue;
                }
                let ny = candidate.norm();
                let slack = min_eig - (1.0 / (ny * ny) - 1e-8);
                worst_slack = worst_slack.min(slack);
                checked += 1;
                if slack < 0.0 {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        2,
        "dual witness / norm bound",
        violations == 0,
        format!(
            "{} shapes x {per_shape}: worst residual {worst_residual:.2e}, {checked} bound checks, min slack {worst_slack:.2e}, violations {violations}",
            shapes.len()
        ),
    )
}

/// Criterion 3: `is_unimodular` and the rank oracle agree on random tuples, generic
/// and deliberately rank-deficient.
pub fn unimodular_equals_generators(opts: &SuiteOptions) -> CriterionOutcome {
    let total = opts.count(2000);
    let results: Vec<(bool, bool, bool)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(opts.seed ^ 0x3000, i as u64);
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=4);
            let k = rng.random_range(1..=4);
            let nblocks = rng.random_range(1..=2);
            let blocks: Vec<usize> = (0..nblocks).map(|_| rng.random_range(1..=3)).collect();
            let space = matrix_space(&blocks, n, m);
            let t = if rng.random_bool(0.4) {
                let kmin = *blocks.iter().min().unwrap();
                let cap = rng.random_range(0..m * kmin);
                random_low_rank_tuple(&space, k, cap, &mut rng)
            } else {
                random_tuple(&space, k, &mut rng)
            };
            let mu = t.unimodularity_margin(opts.tol);
            let mg = gen_oracle_margin(&t, opts.tol);
            let near = |x: f64| (0.1..=10.0).contains(&x);
            let excluded = near(mu) || near(mg);
            (
                t.is_unimodular(opts.tol),
                gen_oracle(&t, opts.tol),
                excluded,
            )
        })
        .collect();
    let excluded = results.iter().filter(|r| r.2).count();
    let kept: Vec<_> = results.iter().filter(|r| !r.2).collect();
    let disagreements = kept.iter().filter(|r| r.0 != r.1).count();
    let positives = kept.iter().filter(|r| r.0).count();
    outcome(
        3,
        "unimodular <=> generator",
        disagreements == 0 && kept.len() + excluded == total,
        format!(
            "{total} tuples: {positives} unimodular, {} not, {excluded} excluded near threshold, {disagreements} disagreements",
            kept.len() - positives
        ),
    )
}

/// A Warfield instance: `(t, y, z)` with `sum <y_k, x_k> = 1` and
/// `sum <y_k, z_k> = 1` over the truncation.
pub fn warfield_instance<R: Rng + ?Sized>(
    space: &ModuleSpace,
    n: usize,
    tol: f64,
    rng: &mut R,
) -> Option<(ModuleTuple, ModuleTuple, ModuleTuple)> {
    let y_head = random_tuple(space, n, rng);
    let z = y_head.dual_witness(tol).ok()?;
    let y = y_head.concat(&random_tuple(space, 1, rng)).ok()?;
    let x = random_tuple(space, n + 1, rng);
    let defect = y.inner_right(&x).ok()?;
    let correction = defect.algebra().unit().try_sub(&defect).ok()?;
    let fixes = z.right_mul(&correction).ok()?;
    let mut entries = x.into_entries();
    for (xk, fk) in entries.iter_mut().zip(fixes.entries()) {
        *xk = xk.try_add(fk).ok()?;
    }
    Some((ModuleTuple::new(entries).ok()?, y, z))
}

/// Criterion 4: Constructed Warfield instances reduce to unimodular tuples.
pub fn warfield_suite(opts: &SuiteOptions) -> CriterionOutcome {
    let total = opts.count(300);
    let shapes: [(&[usize], usize, usize, usize); 6] = [
        (&[1], 1, 1, 1),
        (&[1], 1, 2, 2),
        (&[1], 2, 3, 2),
        (&[2], 2, 2, 1),
        (&[1, 2], 1, 3, 3),
        (&[1, 3], 2, 2, 2),
    ];
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..total {
        let (blocks, rows, cols, n) = shapes[i % shapes.len()];
        let space = matrix_space(blocks, rows, cols);
        let mut rng = trial_rng(opts.seed ^ 0x4000, i as u64);
        let Some((t, y, z)) = warfield_instance(&space, n, opts.tol, &mut rng) else {
            failures += 1;
            continue;
        };
        match warfield_b_to_a(&t, &y, &z, opts.tol) {
            Ok(a) => {
                let res = telescoping_residual(&a, &y).unwrap_or(f64::INFINITY);
                worst = worst.max(res);
                let ok = warfield_forward(&t, &a)
                    .map(|r| r.is_unimodular(opts.tol))
                    .unwrap_or(false);
                if !ok || res > 1e-7 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        4,
        "Warfield reduction",
        failures == 0,
        format!("{total} instances, {failures} failures, worst telescoping residual {worst:.2e}"),
    )
}

/// Random input for the perturbation runs: Gaussian tuples at scales from
/// 1e-4 to 3, with every fourth one rank-deficient.
fn perturbation_input<R: Rng + ?Sized>(
    space: &ModuleSpace,
    n: usize,
    i: usize,
    rng: &mut R,
) -> ModuleTuple {
    let scale = 10f64.powf(rng.random_range(-4.0..0.5));
    let t = if i % 4 == 3 {
        random_low_rank_tuple(space, n, 1, rng)
    } else {
        random_tuple(space, n, rng)
    };
    let s = space.right_algebra().scalar(scale);
    t.right_mul(&s).expect("right algebra")
}

/// Criterion 5: Padding always yields unimodular tuples; the perturbation pipeline
/// lands within `sqrt(eps) + eps` on a unimodular tuple.
pub fn perturbation_suite(opts: &SuiteOptions) -> CriterionOutcome {
    let per = opts.count(200);
    let shapes: [(&[usize], usize, usize, usize); 5] = [
        (&[1], 1, 1, 1),
        (&[1], 1, 2, 2),
        (&[1], 2, 3, 2),
        (&[2], 2, 2, 1),
        (&[1, 2], 2, 3, 3),
    ];
    let epss = [0.01, 0.1, 1.0];
    let mut jobs = Vec::new();
    for (si, &shape) in shapes.iter().enumerate() {
        for (ei, &eps) in epss.iter().enumerate() {
            for i in 0..per {
                jobs.push((si, shape, ei, eps, i));
            }
        }
    }
    let results: Vec<std::result::Result<f64, String>> = jobs
        .par_iter()
        .map(|&(si, (blocks, rows, cols, n), ei, eps, i)| {
            let space = matrix_space(blocks, rows, cols);
            let stream = ((si * 3 + ei) * per + i) as u64;
            let mut rng = trial_rng(opts.seed ^ 0x5000, stream);
            let x = perturbation_input(&space, n, i, &mut rng);
            let params = PerturbationParams::new(
                eps,
                opts.tol,
                crate::stable_rank::DEFAULT_MAX_RETRIES,
                stream,
            )
            .expect("valid params");
            match hv_perturb(&x, &params) {
                Ok(out)
                    if out.perturbed.is_unimodular(opts.tol) && out.distance < eps.sqrt() + eps =>
                {
                    Ok(out.distance / (eps.sqrt() + eps))
                }
                Ok(out) => Err(format!(
                    "{blocks:?} {rows}x{cols} n={n} eps={eps}: distance {}",
                    out.distance
                )),
                Err(e) => Err(format!("{blocks:?} {rows}x{cols} n={n} eps={eps}: {e}")),
            }
        })
        .collect();
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let worst_ratio = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .fold(0.0f64, |a, &b| a.max(b));

    let pads = opts.count(500);
    let pad_failures = (0..pads)
        .into_par_iter()
        .filter(|&i| {
            let (blocks, rows, cols, n) = shapes[i % shapes.len()];
            let space = matrix_space(blocks, rows, cols);
            let mut rng = trial_rng(opts.seed ^ 0x5100, i as u64);
            let x = perturbation_input(&space, n, i, &mut rng);
            let eps = [0.1, 1.0, 10.0][i % 3];
            let u = standard_padding(&space).expect("matrix spaces are full");
            !matches!(hv_pad(&x, &u, eps), Ok(p) if p.is_unimodular(opts.tol))
        })
        .count();

    let mut detail = format!(
        "perturb: {} runs, {} failures, max distance/bound {worst_ratio:.3}; pad: {pads} runs, {pad_failures} failures",
        results.len(),
        failures.len()
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(
        5,
        "padding + perturbation",
        failures.is_empty() && pad_failures == 0,
        detail,
    )
}

/// Criterion 6: Below the stable rank, reduction and perturbation must fail.
pub fn negative_control(opts: &SuiteOptions) -> CriterionOutcome {
    let attempts = opts.count(100);
    let space = matrix_space(&[1], 1, 2);
    let mut false_successes = 0;
    let mut wrong_errors = 0;
    let mut skipped = 0;
    for i in 0..attempts {
        let mut rng = trial_rng(opts.seed ^ 0x6000, i as u64);
        let params = PerturbationParams::new(
            0.1,
            opts.tol,
            crate::stable_rank::DEFAULT_MAX_RETRIES,
            i as u64,
        )
        .unwrap();
        let pair = random_tuple(&space, 2, &mut rng);
        if !pair.is_unimodular(opts.tol) {
            skipped += 1;
        } else {
            match bass_reduce(&pair, &params) {
                Ok(_) => false_successes += 1,
                Err(Error::ReductionFailed { .. }) => {}
                Err(_) => wrong_errors += 1,
            }
        }
        let single = random_tuple(&space, 1, &mut rng);
        match hv_perturb(&single, &params) {
            Ok(_) => false_successes += 1,
            Err(Error::ReductionFailed { .. }) => {}
            Err(_) => wrong_errors += 1,
        }
    }
    outcome(
        6,
        "negative control M_{1x2}(C)",
        false_successes == 0 && wrong_errors == 0 && skipped == 0,
        format!(
            "{attempts} reduce + {attempts} perturb attempts: {false_successes} false successes, {wrong_errors} other errors, {skipped} skipped"
        ),
    )
}

/// Criterion 7: C*-identity, positive/negative parts, inverse and inverse square root.
pub fn kernel_numerics(opts: &SuiteOptions) -> CriterionOutcome {
    let samples = opts.count(500);
    let bases: [&[usize]; 5] = [&[1], &[2], &[3], &[1, 2], &[2, 3]];
    let mut cstar_worst: f64 = 0.0;
    let mut calc_worst: f64 = 0.0;
    let mut spectral_worst: f64 = 0.0;
    let mut inverse_worst: f64 = 0.0;
    let mut sqrt_worst: f64 = 0.0;
    let mut errors = 0;
    for i in 0..samples {
        let alg = algebra(bases[i % bases.len()]);
        let mut rng = trial_rng(opts.seed ^ 0x7000, i as u64);
        let a = random_element(&alg, &mut rng);
        let n = a.norm();
        let ata = a.adjoint().try_mul(&a).unwrap();
        cstar_worst = cstar_worst.max((ata.norm() - n * n).abs() / (n * n));

        let h = random_element(&alg, &mut rng);
        let b = h.try_add(&h.adjoint()).unwrap();
        let (Ok(plus), Ok(minus)) = (b.positive_part(), b.negative_part()) else {
            errors += 1;
            continue;
        };
        let scale = b.norm().max(1.0);
        let recon = plus.try_sub(&minus).unwrap().distance(&b).unwrap();
        let ortho = plus.try_mul(&minus).unwrap().norm();
        let psd = (-plus.min_eigenvalue())
            .max(-minus.min_eigenvalue())
            .max(0.0);
        calc_worst = calc_worst.max(recon.max(ortho).max(psd) / scale);
        let eb = b.eigenvalues().unwrap();
        let ep = plus.eigenvalues().unwrap();
        for (lb, lp) in eb.iter().zip(&ep) {
            for (x, y) in lb.iter().zip(lp) {
                spectral_worst = spectral_worst.max((x.max(0.0) - y).abs());
            }
        }

        match a.inverse_with_tol(opts.tol) {
            Ok(inv) => {
                let one = alg.unit();
                let left = inv.try_mul(&a).unwrap().distance(&one).unwrap();
                let right = a.try_mul(&inv).unwrap().distance(&one).unwrap();
                let back = inv
                    .inverse_with_tol(opts.tol)
                    .map(|x| x.distance(&a).unwrap() / n);
                inverse_worst = inverse_worst
                    .max(left)
                    .max(right)
                    .max(back.unwrap_or(f64::INFINITY));
            }
            Err(_) => errors += 1,
        }
        let p = random_positive(&alg, 0.1, &mut rng);
        match p.inv_sqrt() {
            Ok(s) => {
                let sps = s.try_mul(&p).unwrap().try_mul(&s).unwrap();
                sqrt_worst = sqrt_worst.max(sps.distance(&alg.unit()).unwrap());
            }
            Err(_) => errors += 1,
        }
    }
    let passed = errors == 0
        && cstar_worst <= 1e-10
        && calc_worst <= 1e-10
        && spectral_worst <= 1e-10
        && inverse_worst <= 1e-8
        && sqrt_worst <= 1e-8;
    outcome(
        7,
        "kernel numerics",
        passed,
        format!(
            "{samples} samples: C*-identity {cstar_worst:.1e}, b=b+-b- {calc_worst:.1e}, spectrum {spectral_worst:.1e}, inverse {inverse_worst:.1e}, inv_sqrt {sqrt_worst:.1e}, errors {errors}"
        ),
    )
}

/// Criterion 8: Two `density` runs with the same seed give byte-identical reports.
pub fn reproducibility(opts: &SuiteOptions) -> CriterionOutcome {
    let run = || {
        let config = crate::cli::RunConfig {
            command: crate::cli::Command::Density {
                blocks: vec![1, 2],
                rows: 1,
                cols: 2,
                k: 2,
            },
            input_path: None,
            eps: 0.1,
            tol: opts.tol,
            seed: opts.seed,
            trials: opts.count(1000),
            max_retries: crate::stable_rank::DEFAULT_MAX_RETRIES,
            out_path: None,
            timestamp: false,
            quick: false,
        };
        crate::cli::run(&config).map(|o| o.stdout)
    };
    let (a, b) = (run(), run());
    let passed = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    outcome(
        8,
        "reproducible density report",
        passed,
        format!(
            "report lengths {:?} / {:?}, identical: {passed}",
            a.as_ref().map(String::len).ok(),
            b.as_ref().map(String::len).ok()
        ),
    )
}
