//! Acceptance suite: one test per shipped correctness criterion, each
//! printing a PASS line (visible with `--nocapture`). Everything runs at
//! desk scale with fixed seeds.

use std::path::PathBuf;
use std::process::Command;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use slle::classic::{embed, embed_from_stochastic, neighborhood_preservation, reconstruction_weights};
use slle::data::{generate, DatasetKind, DatasetSpec};
use slle::gaussian::{condition, log_density, GaussianParams, JointBlocks, PreparedGaussian};
use slle::latent::{fa_fit, fa_log_likelihood, ppca_fit_closed_form, ppca_fit_em, NoiseModel};
use slle::neighborhood::{knn_graph, DataMatrix, NeighborhoodSystem};
use slle::numerics::{max_abs, Matrix, SpectralDecomposition, Vector, DEFAULT_RANK_TOL};
use slle::stochastic::{
    e_step, extract_weights, fit_stochastic_reconstruction, reconstruction_residuals, EmConfig,
    ExtractMode, PriorCovariance,
};
use slle::verify;

/// Seed shipped with the swiss-roll comparison instance (criterion 10).
const SHIPPED_SWISS_SEED: u64 = 12;

fn report(criterion: usize, name: &str) {
    println!("criterion {criterion:2} {name}: PASS");
}

#[test]
fn criterion_01_gradient_fidelity() {
    let check = verify::gradient_check(2024, 50).unwrap();
    assert!(check.pass, "{}", check.detail);
    report(1, "gradient matches finite differences (50 cases, <= 1e-5)");
}

#[test]
fn criterion_02_spherical_closed_form_optimality() {
    let check = verify::spherical_closed_form_check(2025, 50).unwrap();
    assert!(check.pass, "{}", check.detail);
    report(2, "spherical update is the relaxed-objective argmax (50 cases, <= 1e-6)");
}

#[test]
fn criterion_03_e_step_correctness() {
    // Part 1: Monte-Carlo conditional moments on a d=2, k=1 instance.
    // Sample the generative joint (w prior, x deterministic in w), condition
    // with a narrow kernel around a point on the support, and compare the
    // empirical moments with the analytic posterior within 3 standard errors.
    let mu = Vector::from_vec(vec![0.5, -0.25]);
    let design = Matrix::from_row_slice(2, 1, &[0.8, 0.6]);
    let w_star = 0.5;
    let x_star = &mu + &design * Vector::from_vec(vec![w_star]);

    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let h = 0.02;
    let mut kept = Vec::new();
    for _ in 0..100_000 {
        let w: f64 = rng.sample(rand_distr::StandardNormal);
        let x = &mu + &design * Vector::from_vec(vec![w]);
        if (x - &x_star).norm() < h {
            kept.push(w);
        }
    }
    let m = kept.len() as f64;
    assert!(m > 300.0, "kernel window too sparse");
    let emp_mean = kept.iter().sum::<f64>() / m;
    let emp_second = kept.iter().map(|w| w * w).sum::<f64>() / m;

    let mirror = vec![
        vec![x_star[0], x_star[1]],
        vec![2.0 * mu[0] - x_star[0], 2.0 * mu[1] - x_star[1]],
    ];
    let data = DataMatrix::from_points(&mirror).unwrap();
    let nbrs = NeighborhoodSystem::from_designs(vec![design.clone(), design.clone()]).unwrap();
    let prior = PriorCovariance::Spherical(vec![1.0; 2]);
    let post = e_step(&data, &nbrs, &prior).unwrap();
    let pred_mean = post.means[0][0];
    let pred_second = post.covariances[0][(0, 0)] + pred_mean * pred_mean;

    let se_mean = (kept.iter().map(|w| (w - emp_mean).powi(2)).sum::<f64>() / (m - 1.0) / m)
        .sqrt()
        .max(1e-4);
    assert!(
        (emp_mean - pred_mean).abs() <= 3.0 * se_mean + h * h,
        "E[w]: {emp_mean} vs {pred_mean}"
    );
    let se_second = (2.0 * emp_mean.abs() + h) * se_mean + h * h;
    assert!(
        (emp_second - pred_second).abs() <= 3.0 * se_second,
        "E[w²]: {emp_second} vs {pred_second}"
    );

    // Part 2: identity prior gives the minimum-norm solution to 1e-10.
    let check = verify::minimum_norm_check(2026, 10).unwrap();
    assert!(check.pass, "{}", check.detail);
    report(3, "posterior matches Monte-Carlo conditioning and the pseudo-inverse solution");
}

#[test]
fn criterion_04_em_monotonicity_and_termination() {
    let check = verify::em_monotonicity_check(2027, 20).unwrap();
    assert!(check.pass, "{}", check.detail);
    report(4, "spherical mean-path objective non-decreasing; affine patch converges");
}

#[test]
fn criterion_05_exact_manifold_recovery() {
    let mut spec = DatasetSpec::new(DatasetKind::AffinePatch, 120, 0.0, 41);
    spec.ambient_dim = Some(5);
    spec.intrinsic_dim = Some(2);
    let (data, _) = generate(&spec).unwrap();
    let nbrs = knn_graph(&data, 2).unwrap();
    let cfg = EmConfig::default();
    let (_, post, trace) = fit_stochastic_reconstruction(&data, &nbrs, &cfg).unwrap();
    assert!(trace.converged);
    let weights = extract_weights(&post, ExtractMode::Mean, 0).unwrap();
    let worst = reconstruction_residuals(&data, &nbrs, &weights)
        .unwrap()
        .into_iter()
        .fold(0.0_f64, f64::max);
    assert!(worst <= 1e-8, "worst residual {worst:.3e}");
    report(5, "exact affine data reconstructed with residual <= 1e-8");
}

#[test]
fn criterion_06_gaussian_conditioning_and_normalization() {
    // Bivariate case (ρ = 0.5): mean 0.5a, variance 0.75 within 1e-12.
    let rho = 0.5;
    let joint = JointBlocks::new(
        Vector::zeros(1),
        Vector::zeros(1),
        Matrix::identity(1, 1),
        Matrix::identity(1, 1) * rho,
        Matrix::identity(1, 1) * rho,
        Matrix::identity(1, 1),
    )
    .unwrap();
    for a in [-2.0, -0.3, 0.0, 1.0, 4.5] {
        let c = condition(&joint, &Vector::from_vec(vec![a])).unwrap();
        assert!((c.mean[0] - 0.5 * a).abs() <= 1e-12);
        assert!((c.covariance[(0, 0)] - 0.75).abs() <= 1e-12);
    }

    // Densities integrate to 1 within 1e-6 by trapezoid quadrature.
    let g1 = GaussianParams::new(Vector::from_vec(vec![0.3]), Matrix::identity(1, 1) * 2.0)
        .unwrap();
    let sd = 2.0_f64.sqrt();
    let h = 0.01;
    let steps = (16.0 * sd / h) as usize;
    let mut mass = 0.0;
    for i in 0..=steps {
        let x = 0.3 - 8.0 * sd + i as f64 * h;
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        mass += w
            * log_density(&g1, &Vector::from_vec(vec![x]), DEFAULT_RANK_TOL)
                .unwrap()
                .exp();
    }
    mass *= h;
    assert!((mass - 1.0).abs() <= 1e-6, "1-D mass {mass}");

    let g2 = GaussianParams::new(
        Vector::zeros(2),
        Matrix::from_row_slice(2, 2, &[1.5, -0.4, -0.4, 0.8]),
    )
    .unwrap();
    let prepared = PreparedGaussian::new(&g2, DEFAULT_RANK_TOL).unwrap();
    let h = 0.02;
    let half = 10.0;
    let steps = (2.0 * half / h) as usize;
    let mut mass = 0.0;
    for i in 0..=steps {
        let wx = if i == 0 || i == steps { 0.5 } else { 1.0 };
        let x = -half + i as f64 * h;
        for j in 0..=steps {
            let wy = if j == 0 || j == steps { 0.5 } else { 1.0 };
            let y = -half + j as f64 * h;
            mass += wx * wy * prepared.log_density(&Vector::from_vec(vec![x, y])).unwrap().exp();
        }
    }
    mass *= h * h;
    assert!((mass - 1.0).abs() <= 1e-6, "2-D mass {mass}");
    report(6, "conditional formulas exact; densities integrate to 1");
}

#[test]
fn criterion_07_ppca_closed_form_and_em() {
    // Principal subspace and σ² on exact planar data.
    let mut spec = DatasetSpec::new(DatasetKind::AffinePatch, 400, 0.0, 53);
    spec.ambient_dim = Some(5);
    spec.intrinsic_dim = Some(2);
    let (planar, _) = generate(&spec).unwrap();
    let model = ppca_fit_closed_form(&planar, 2).unwrap();

    let n = planar.n() as f64;
    let mut s = Matrix::zeros(5, 5);
    for i in 0..planar.n() {
        let v = planar.point(i) - planar.mean();
        s += &v * v.transpose();
    }
    s /= n;
    let spec_s = SpectralDecomposition::new(&s).unwrap();
    let vq = spec_s.eigenvectors.columns(0, 2).into_owned();
    let qr = model.loading.clone().qr();
    let u = qr.q().columns(0, 2).into_owned();
    let projector_gap = max_abs(&(&vq * vq.transpose() - &u * u.transpose()));
    assert!(projector_gap <= 1e-8, "principal angle via projector: {projector_gap:.3e}");
    let sigma2 = match model.noise {
        NoiseModel::Isotropic(v) => v,
        _ => unreachable!(),
    };
    let discarded = (spec_s.eigenvalues[2] + spec_s.eigenvalues[3] + spec_s.eigenvalues[4]) / 3.0;
    assert!((sigma2 - discarded.max(0.0)).abs() <= 1e-10);

    // EM converges to the closed form (n = 2000, d = 5, q = 2).
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let loading = Matrix::from_fn(5, 2, |_, _| rng.sample(rand_distr::StandardNormal));
    let rows = Matrix::from_fn(2000, 5, |_, _| 0.0);
    let mut rows = rows;
    for i in 0..2000 {
        let w = Vector::from_fn(2, |_, _| rng.sample(rand_distr::StandardNormal));
        let eps = Vector::from_fn(5, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal) * 0.5);
        let x = &loading * w + eps;
        rows.set_row(i, &x.transpose());
    }
    let data = DataMatrix::new(rows).unwrap();
    let closed = ppca_fit_closed_form(&data, 2).unwrap();
    let cfg = EmConfig {
        max_iter: 2000,
        tol: 1e-13,
        ..EmConfig::default()
    };
    let (em, _) = ppca_fit_em(&data, 2, &cfg).unwrap();
    let truth = closed.marginal_covariance();
    let num = (&em.marginal_covariance() - &truth)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    let den = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(num / den <= 1e-4, "EM vs closed form: {:.3e}", num / den);
    report(7, "closed-form PPCA recovers the principal subspace; EM agrees to 1e-4");
}

#[test]
fn criterion_08_factor_analysis() {
    // Non-decreasing likelihood and recovery of the generating marginal
    // covariance at n = 10^4.
    let loading = Matrix::from_row_slice(4, 2, &[1.0, 0.2, -0.5, 1.0, 0.8, -0.3, 0.1, 0.9]);
    let psi: [f64; 4] = [0.3, 0.5, 0.2, 0.4];
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut rows = Matrix::zeros(10_000, 4);
    for i in 0..10_000 {
        let w = Vector::from_fn(2, |_, _| rng.sample(rand_distr::StandardNormal));
        let eps = Vector::from_fn(4, |j, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal) * psi[j].sqrt()
        });
        let x = &loading * w + eps;
        rows.set_row(i, &x.transpose());
    }
    let data = DataMatrix::new(rows).unwrap();
    let cfg = EmConfig {
        max_iter: 300,
        tol: 1e-9,
        ..EmConfig::default()
    };
    let (model, trace) = fa_fit(&data, 2, &cfg).unwrap();
    for pair in trace.iterations.windows(2) {
        assert!(
            pair[1].objective >= pair[0].objective - 1e-8 * pair[0].objective.abs().max(1.0),
            "log-likelihood decreased: {} -> {}",
            pair[0].objective,
            pair[1].objective
        );
    }
    let mut truth = &loading * loading.transpose();
    for j in 0..4 {
        truth[(j, j)] += psi[j];
    }
    let num = (&model.marginal_covariance() - &truth)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    let den = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(num / den <= 0.1, "marginal covariance error {:.3e}", num / den);

    // Rotation invariance of the likelihood under Λ → ΛR.
    let theta = 1.1_f64;
    let r = Matrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
    let rotated = slle::latent::LatentLinearModel {
        loading: &model.loading * r,
        noise: model.noise.clone(),
        mean: model.mean.clone(),
    };
    let a = fa_log_likelihood(&model, &data).unwrap();
    let b = fa_log_likelihood(&rotated, &data).unwrap();
    assert!(
        (a - b).abs() <= 1e-10 * a.abs().max(1.0),
        "likelihood changed under rotation: {a} vs {b}"
    );
    report(8, "FA likelihood monotone, covariance recovered, rotation-invariant");
}

#[test]
fn criterion_09_classic_lle_contracts() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let points: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..3).map(|_| rng.sample(rand_distr::StandardNormal)).collect())
        .collect();
    let data = DataMatrix::from_points(&points).unwrap();
    let nbrs = knn_graph(&data, 5).unwrap();
    let w = reconstruction_weights(&data, &nbrs, 1e-3).unwrap();
    for (i, _, weights) in w.rows() {
        let sum: f64 = weights.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-10, "row {i} sums to {sum}");
    }

    // Translation and rotation invariance within 1e-10.
    let translated: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vec![p[0] + 5.0, p[1] - 2.0, p[2] + 0.25])
        .collect();
    let tdata = DataMatrix::from_points(&translated).unwrap();
    let tw = reconstruction_weights(&tdata, &knn_graph(&tdata, 5).unwrap(), 1e-3).unwrap();
    let q = Matrix::from_fn(3, 3, |_, _| rng.sample(rand_distr::StandardNormal))
        .qr()
        .q();
    let rdata = DataMatrix::new(data.rows() * q.transpose()).unwrap();
    let rw = reconstruction_weights(&rdata, &knn_graph(&rdata, 5).unwrap(), 1e-3).unwrap();
    for ((a, b), c) in w
        .triplets()
        .iter()
        .zip(tw.triplets().iter())
        .zip(rw.triplets().iter())
    {
        assert!((a.2 - b.2).abs() <= 1e-10);
        assert!((a.2 - c.2).abs() <= 1e-10);
    }

    // Constant eigenvector of M has eigenvalue <= 1e-8.
    let res = embed(&w, 2).unwrap();
    assert!(res.eigenvalues[0].abs() <= 1e-8);
    report(9, "classic LLE weights sum to 1, are rigid-motion invariant; M has a null constant");
}

#[test]
fn criterion_10_nonlinear_beats_linear_on_swiss_roll() {
    let spec = DatasetSpec::new(DatasetKind::SwissRoll, 500, 0.0, SHIPPED_SWISS_SEED);
    let (data, _) = generate(&spec).unwrap();
    let nbrs = knn_graph(&data, 8).unwrap();

    let cfg = EmConfig::default();
    let (_, post, _) = fit_stochastic_reconstruction(&data, &nbrs, &cfg).unwrap();
    let weights = extract_weights(&post, ExtractMode::Mean, SHIPPED_SWISS_SEED).unwrap();
    let embedding = embed_from_stochastic(&weights, &nbrs, 2, true).unwrap();
    let slle_score = neighborhood_preservation(&nbrs, &embedding.y, 8).unwrap();

    let ppca = ppca_fit_closed_form(&data, 2).unwrap();
    let coords = ppca.latent_coordinates(&data).unwrap();
    let ppca_score = neighborhood_preservation(&nbrs, &coords, 8).unwrap();

    let margin = slle_score - ppca_score;
    assert!(
        margin >= 0.1,
        "stochastic LLE {slle_score:.4} vs PPCA {ppca_score:.4}: margin {margin:.4} < 0.1"
    );
    report(10, "per-point frames beat the global linear map on the swiss roll (margin >= 0.1)");
}

#[test]
fn criterion_11_cli_runs_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_slle");
    let base = std::env::temp_dir().join(format!("slle-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);

    let run = |args: &[&str], out: &PathBuf| {
        let output = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(out)
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };

    let commands: Vec<(&str, Vec<&str>, Vec<&str>)> = vec![
        (
            "fit-slle",
            vec![
                "fit-slle", "--dataset", "swiss_roll", "--n", "90", "--k", "5", "--seed", "11",
                "--extract", "sample",
            ],
            vec!["embedding.csv", "weights.csv", "trace.csv"],
        ),
        (
            "fit-lle",
            vec!["fit-lle", "--dataset", "s_curve", "--n", "80", "--k", "4", "--seed", "11"],
            vec!["embedding.csv", "weights.csv", "trace.csv"],
        ),
        (
            "fit-fa",
            vec!["fit-fa", "--dataset", "affine_patch", "--n", "300", "--noise", "0.3", "--q", "2", "--seed", "11"],
            vec!["model.json", "trace.csv"],
        ),
        (
            "fit-ppca",
            vec!["fit-ppca", "--dataset", "affine_patch", "--n", "300", "--noise", "0.2", "--q", "2", "--seed", "11"],
            vec!["model.json", "trace.csv"],
        ),
        (
            "compare",
            vec!["compare", "--dataset", "swiss_roll", "--n", "70", "--k", "4", "--seed", "11"],
            vec!["metrics.csv"],
        ),
    ];

    for (name, args, files) in &commands {
        let out1 = base.join(format!("{name}-1"));
        let out2 = base.join(format!("{name}-2"));
        run(args, &out1);
        run(args, &out2);
        for file in files {
            let a = std::fs::read(out1.join(file)).unwrap();
            let b = std::fs::read(out2.join(file)).unwrap();
            assert_eq!(a, b, "{name}: {file} differs between runs");
        }
    }

    // verify writes no files; its stdout must be reproducible.
    let out = base.join("verify");
    let a = run(&["verify", "--seed", "11"], &out);
    let b = run(&["verify", "--seed", "11"], &out);
    assert_eq!(a, b, "verify stdout differs between runs");

    report(11, "all CLI outputs byte-identical across repeated seeded runs");
}
