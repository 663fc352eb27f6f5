//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use mmfbo::acquisition::{consistency_probe, ProbeSurface};
use mmfbo::bench::study::write_study;
use mmfbo::bench::{run_study, Method, StudyConfig, StudySummary};
use mmfbo::error_model::{error_moments, error_pdf, DeviationMoments};
use mmfbo::fpca::FpcaModel;
use mmfbo::functional::{fill_distance, FunctionalGrid, FunctionalResponse};
use mmfbo::gp::{GpFitOptions, GpModel, KernelParams, JITTER_FLOOR};
use mmfbo::oracles::odes::{lv_invariant, lv_states, sir_states};
use mmfbo::oracles::{heat_response, msd_response, vpi_states, OracleSpec, VpiSettings, CATALOG};
use mmfbo::functional::DesignBox;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 20261015;

const MC_SAMPLES: usize = 1_000_000;
const MC_PAIRS: usize = 50;
const MC_SE: f64 = 3.0;
const PDF_TOL: f64 = 1e-5;
const FPCA_RECON_TOL: f64 = 1e-10;
const FPCA_ORTHO_TOL: f64 = 1e-8;
const GP_INTERP_TOL: f64 = 1e-6;
const GP_DENSE_TOL: f64 = 1e-8;
const MSD_TOL: f64 = 1e-6;
const SIR_TOL: f64 = 1e-10;
const LV_TOL: f64 = 1e-5;
const HEAT_TOL: f64 = 1e-4;
const VPI_TOL: f64 = 1e-8;
const STUDY_REPS: usize = 10;
const STUDY_BUDGET: usize = 30;
const STUDY_SEED: u64 = 2024;
const TT_EPS: f64 = 0.10;
const ORDERED_MIN: usize = 4;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn moments_vs_monte_carlo() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_z = 0.0f64;
    for pair in 0..MC_PAIRS {
        let mu: f64 = rng.random_range(-2.0..2.0);
        let sigma: f64 = rng.random_range(0.1..2.0);
        let m = error_moments(&DeviationMoments::new(vec![mu], vec![sigma * sigma]).unwrap());
        let samples: Vec<f64> = (0..MC_SAMPLES)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (mu + sigma * z).powi(2)
            })
            .collect();
        let n = MC_SAMPLES as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let (mut m2, mut m4) = (0.0, 0.0);
        for e in &samples {
            let d = (e - mean) * (e - mean);
            m2 += d;
            m4 += d * d;
        }
        let var = m2 / (n - 1.0);
        m4 /= n;
        let se_mean = (var / n).sqrt();
        let se_var = ((m4 - var * var).max(0.0) / n).sqrt();
        let z_mean = (mean - m.mu_e[0]).abs() / se_mean;
        let z_var = (var - m.sd_e[0].powi(2)).abs() / se_var;
        worst_z = worst_z.max(z_mean).max(z_var);
        ensure(z_mean <= MC_SE && z_var <= MC_SE, || {
            format!("pair {pair} (mu {mu:.3}, sigma {sigma:.3}): mean off by {z_mean:.2} SE, variance off by {z_var:.2} SE")
        })?;

        // Quadrature in z = sqrt(y), which removes the 1/sqrt(y) singularity.
        let hi = mu.abs() + 12.0 * sigma;
        let steps = 200_000;
        let h = hi / steps as f64;
        let (mut mass, mut first) = (0.0, 0.0);
        for i in 0..steps {
            let z = (i as f64 + 0.5) * h;
            let dens = 2.0 * z * error_pdf(z * z, mu, sigma).unwrap() * h;
            mass += dens;
            first += z * z * dens;
        }
        ensure((mass - 1.0).abs() < PDF_TOL && (first - m.mu_e[0]).abs() < PDF_TOL, || {
            format!("pair {pair}: density mass {mass}, quadrature mean {first} vs {}", m.mu_e[0])
        })?;
    }
    Ok(format!("{MC_PAIRS} pairs, worst deviation {worst_z:.2} SE"))
}

fn discretization_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let dense: Vec<f64> = (0..=100_000).map(|i| i as f64 / 100_000.0).collect();
    let mut cases = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..20 {
        let n = rng.random_range(5..60);
        let mut pts: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let grid = FunctionalGrid::trapezoid(pts).unwrap();
        let h = fill_distance(&grid, 0.0, 1.0).unwrap();
        for &c in &[1.0, 2.5, 5.0, 10.0, 20.0] {
            let phase: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let e = |l: f64| (c * l + phase).sin().powi(2);
            let g = dense.iter().map(|&l| e(l)).fold(f64::NEG_INFINITY, f64::max);
            let g_t = grid.points().iter().map(|&l| e(l)).fold(f64::NEG_INFINITY, f64::max);
            let bound = c * h;
            ensure(g - g_t <= bound, || format!("c {c}: gap {} exceeds bound {bound}", g - g_t))?;
            tightest = tightest.min(bound - (g - g_t));
            cases += 1;
        }
    }
    Ok(format!("{cases}/{cases} cases within L*h, smallest slack {tightest:.3e}"))
}

fn consistency() -> Outcome {
    let surface = ProbeSurface::new(1000, 65).unwrap();
    let kappa = 2.0;
    let gap = surface.minimizer_gap();
    let mut argmin_checked = 0;
    for t in 1..=100 {
        let d = 1.0 / t as f64;
        let r = consistency_probe(&surface, d, d, kappa);
        ensure(r.within_bound(), || format!("t {t}: sup gap {} > bound {}", r.sup_gap, r.bound))?;
        if r.bound < gap {
            ensure(r.argmin_alpha == r.argmin_g, || format!("t {t}: argmin alpha {} vs argmin g {}", r.argmin_alpha, r.argmin_g))?;
            argmin_checked += 1;
        }
    }
    ensure(argmin_checked > 0, || "argmin condition never active".into())?;
    Ok(format!("bound held for t=1..100; argmin matched on {argmin_checked} steps with bound < gap {gap:.4}"))
}

fn fpca_exactness() -> Outcome {
    let grid = FunctionalGrid::uniform(0.0, 1.0, 101).unwrap();
    let raw: Vec<Vec<f64>> = (1..=3)
        .map(|k| grid.points().iter().map(|x| (k as f64 * std::f64::consts::PI * x).sin() + 0.2 * x).collect())
        .collect();
    let mut modes: Vec<Vec<f64>> = Vec::new();
    for r in raw {
        let mut v = r;
        for m in &modes {
            let p = grid.inner(&v, m);
            v.iter_mut().zip(m).for_each(|(a, b)| *a -= p * b);
        }
        let norm = grid.inner(&v, &v).sqrt();
        modes.push(v.iter().map(|a| a / norm).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let curves: Vec<FunctionalResponse> = (0..20)
        .map(|_| {
            let mut v: Vec<f64> = grid.points().iter().map(|x| 1.0 + x * x).collect();
            for (k, m) in modes.iter().enumerate() {
                let c = rng.random_range(-1.0..1.0) * (3.0 - k as f64);
                v.iter_mut().zip(m).for_each(|(a, b)| *a += c * b);
            }
            FunctionalResponse::new(v, &grid).unwrap()
        })
        .collect();
    let model = FpcaModel::fit(&curves, &grid, 0.999).unwrap();
    ensure(model.n_components() == 3, || format!("retained {} components", model.n_components()))?;
    let mut worst = 0.0f64;
    for c in &curves {
        let rec = model.reconstruct(&model.scores(c).unwrap()).unwrap();
        let d: Vec<f64> = c.values().iter().zip(rec.values()).map(|(a, b)| a - b).collect();
        worst = worst.max(grid.inner(&d, &d).sqrt());
    }
    let mut ortho = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((grid.inner(model.eigenfunction(i), model.eigenfunction(j)) - want).abs());
        }
    }
    ensure(worst < FPCA_RECON_TOL && ortho < FPCA_ORTHO_TOL, || format!("reconstruction {worst:.2e}, orthonormality {ortho:.2e}"))?;
    Ok(format!("reconstruction error {worst:.2e}, orthonormality deviation {ortho:.2e}"))
}

fn gp_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let b = DesignBox::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap();
    let x: Vec<Vec<f64>> = (0..15).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)]).collect();
    let y: Vec<f64> = x.iter().map(|p| (2.0 * p[0]).sin() * p[1] + 0.5).collect();

    let floor = KernelParams::new(2.0, vec![0.3, 0.3], JITTER_FLOOR).unwrap();
    let interp = GpModel::condition(&x, &y, &b, &floor).unwrap();
    let mut interp_err = 0.0f64;
    for (p, t) in x.iter().zip(&y) {
        interp_err = interp_err.max((interp.predict(p).unwrap().0 - t).abs());
    }
    ensure(interp_err < GP_INTERP_TOL, || format!("interpolation error {interp_err:.2e}"))?;

    let fitted = GpModel::fit(&x, &y, &b, &GpFitOptions::with_seed(SEED)).unwrap();
    let prior = fitted.params().signal_variance;
    for _ in 0..1000 {
        let q = vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)];
        let v = fitted.predict(&q).unwrap().1;
        ensure(v <= prior, || format!("posterior variance {v} above prior {prior} at {q:?}"))?;
    }

    let params = fitted.params();
    let unit: Vec<Vec<f64>> = x.iter().map(|p| b.to_unit(p)).collect();
    let k = |a: &[f64], c: &[f64]| {
        let r2: f64 = a.iter().zip(c).zip(&params.lengthscales).map(|((u, v), l)| ((u - v) / l).powi(2)).sum();
        params.signal_variance * (-0.5 * r2).exp()
    };
    let n = x.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let diag = params.noise_variance + fitted.jitter_variance();
    let kmat = DMatrix::from_fn(n, n, |i, j| k(&unit[i], &unit[j]) + if i == j { diag } else { 0.0 });
    let alpha = kmat.clone().lu().solve(&DVector::from_iterator(n, y.iter().map(|v| v - mean))).unwrap();
    let mut dense_err = 0.0f64;
    for _ in 0..200 {
        let q = vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..3.0)];
        let uq = b.to_unit(&q);
        let ks = DVector::from_iterator(n, unit.iter().map(|u| k(u, &uq)));
        let want_mean = mean + ks.dot(&alpha);
        let want_var = (params.signal_variance - ks.dot(&kmat.clone().lu().solve(&ks).unwrap())).max(0.0);
        let (m, v) = fitted.predict(&q).unwrap();
        dense_err = dense_err.max((m - want_mean).abs()).max((v - want_var).abs());
    }
    ensure(dense_err < GP_DENSE_TOL, || format!("dense-solve mismatch {dense_err:.2e}"))?;
    Ok(format!("interpolation {interp_err:.2e}, dense-solve mismatch {dense_err:.2e}, variance bounded at 1000 queries"))
}

fn oracle_fidelity() -> Outcome {
    let grid = OracleSpec::msd().grid;
    let (zeta, wn): (f64, f64) = (0.5, 2.0);
    let y = msd_response(&[zeta, wn], &grid, 0.01).unwrap();
    let wd = wn * (1.0 - zeta * zeta).sqrt();
    let msd_err = grid
        .points()
        .iter()
        .zip(y.values())
        .map(|(t, v)| {
            let exact = (1.0 - (-zeta * wn * t).exp() * ((wd * t).cos() + zeta / (1.0 - zeta * zeta).sqrt() * (wd * t).sin())) / (wn * wn);
            (v - exact).abs()
        })
        .fold(0.0, f64::max);
    ensure(msd_err < MSD_TOL, || format!("mass-spring error {msd_err:.2e}"))?;

    let sir = OracleSpec::sir();
    let sir_err = sir_states(&sir.reference, sir.grid.points(), sir.settings.max_step)
        .unwrap()
        .iter()
        .map(|s| (s[0] + s[1] + s[2] - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(sir_err < SIR_TOL, || format!("SIR conservation error {sir_err:.2e}"))?;

    let lv = OracleSpec::lv();
    let v0 = lv_invariant(&lv.reference, 1.0, 1.0);
    let lv_err = lv_states(&lv.reference, [1.0, 1.0], lv.grid.points(), lv.settings.max_step)
        .unwrap()
        .iter()
        .map(|s| (lv_invariant(&lv.reference, s[0], s[1]) - v0).abs())
        .fold(0.0, f64::max);
    ensure(lv_err < LV_TOL, || format!("Lotka-Volterra drift {lv_err:.2e}"))?;

    let heat = OracleSpec::heat();
    let mut heat_err = 0.0f64;
    for &(kappa, len) in &[(0.05, 2.0), (0.2, 1.0), (0.5, 0.5)] {
        let u = heat_response(&[kappa, len, 0.0, 0.0, 0.0, 0.0, 1.0], &heat.grid, heat.settings.heat_intervals, 1.0).unwrap();
        for (t, v) in heat.grid.points().iter().zip(u.values()) {
            heat_err = heat_err.max((v - (-kappa * std::f64::consts::PI.powi(2) * t / (len * len)).exp()).abs());
        }
    }
    ensure(heat_err < HEAT_TOL, || format!("heat single-mode error {heat_err:.2e}"))?;

    let vpi = OracleSpec::vpi();
    let settings = VpiSettings::default();
    let mut vpi_err = 0.0f64;
    for theta in [vpi.reference.clone(), vec![0.5, 20.0, 3.0, 1.0], vec![0.05, 1.0, 0.0, 0.2]] {
        for s in vpi_states(&theta, vpi.grid.points(), &settings, 1.0).unwrap() {
            for j in 0..s.polymer.len() {
                vpi_err = vpi_err.max((s.polymer[j] + s.product[j] - settings.polymer_initial).abs());
            }
        }
    }
    ensure(vpi_err < VPI_TOL, || format!("VPI conservation error {vpi_err:.2e}"))?;
    Ok(format!(
        "msd {msd_err:.1e}, sir {sir_err:.1e}, lv {lv_err:.1e}, heat {heat_err:.1e}, vpi {vpi_err:.1e}"
    ))
}

fn desk_study(name: &str) -> StudySummary {
    let cfg = StudyConfig::new(OracleSpec::by_name(name).unwrap(), STUDY_BUDGET, STUDY_REPS, STUDY_SEED);
    run_study(&cfg).unwrap().summary
}

fn dominance(summaries: &[StudySummary]) -> Outcome {
    let mut ordered = 0;
    let mut lines = Vec::new();
    for s in summaries {
        let get = |m| s.method(m).unwrap();
        let (a, b, c) = (get(Method::Mmfbo), get(Method::GpOnG), get(Method::Sfd));
        let auoc_ok = a.auoc.median < b.auoc.median && b.auoc.median < c.auoc.median;
        let final_ok = a.final_regret.median < b.final_regret.median && b.final_regret.median < c.final_regret.median;
        if auoc_ok && final_ok {
            ordered += 1;
        }
        lines.push(format!(
            "{}: AUOC {:.3}/{:.3}/{:.3} final {:.2e}/{:.2e}/{:.2e}{}",
            s.oracle,
            a.auoc.median,
            b.auoc.median,
            c.auoc.median,
            a.final_regret.median,
            b.final_regret.median,
            c.final_regret.median,
            if auoc_ok && final_ok { "" } else { " (not ordered)" }
        ));
    }
    let detail = format!("{ordered}/{} ordered; {}", summaries.len(), lines.join("; "));
    ensure(ordered >= ORDERED_MIN, || detail.clone())?;
    Ok(detail)
}

fn tt_direction(summaries: &[StudySummary]) -> Outcome {
    let mut lines = Vec::new();
    for s in summaries {
        let frac = |m| {
            let ms = s.method(m).unwrap();
            ms.tt.iter().find(|t| (t.epsilon - TT_EPS).abs() < 1e-12).unwrap().success_fraction
        };
        let (a, b, c) = (frac(Method::Mmfbo), frac(Method::GpOnG), frac(Method::Sfd));
        lines.push(format!("{}: {a:.2}/{b:.2}/{c:.2}", s.oracle));
        ensure(a >= b && a >= c, || format!("{} success fractions mmfbo {a}, gp_on_g {b}, sfd {c}", s.oracle))?;
    }
    Ok(lines.join("; "))
}

fn determinism() -> Outcome {
    let cfg = StudyConfig::new(OracleSpec::msd(), 16, 3, 99);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut written = Vec::new();
    for d in &dirs {
        let result = run_study(&cfg).unwrap();
        written = write_study(d.path(), &cfg, &result).unwrap();
    }
    for rel in &written {
        let a = std::fs::read(dirs[0].path().join(rel)).unwrap();
        let b = std::fs::read(dirs[1].path().join(rel)).unwrap();
        ensure(a == b, || format!("{rel} differs between reruns"))?;
    }
    Ok(format!("{} files byte-identical across reruns", written.len()))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{id}] {name} ({secs:.1}s): {detail}");
            }
        }
    };
    report(1, "error moments vs Monte Carlo and density quadrature", &mut moments_vs_monte_carlo);
    report(2, "grid discretization gap within L*h", &mut discretization_bound);
    report(3, "acquisition consistency under vanishing uncertainty", &mut consistency);
    report(4, "FPCA exact three-mode reconstruction", &mut fpca_exactness);
    report(5, "GP interpolation, variance bound, dense-solve agreement", &mut gp_sanity);
    report(6, "oracle fidelity", &mut oracle_fidelity);
    let start = Instant::now();
    let summaries: Vec<StudySummary> = CATALOG.iter().map(|n| desk_study(n)).collect();
    println!("desk-scale studies: {:.1}s", start.elapsed().as_secs_f64());
    report(7, "desk-scale AUOC and final-regret ordering", &mut || dominance(&summaries));
    report(8, "time-to-threshold success at eps 0.10", &mut || tt_direction(&summaries));
    report(9, "byte-identical study reruns", &mut determinism);
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
