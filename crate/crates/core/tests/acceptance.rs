//! Acceptance criteria: one pass/fail line per criterion, exit status 1 if
//! any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use oldroyd_core::integrator::{
    run, run_with, write_run, InitialCondition, RunConfig, RunOutput, Scheme, OUTSIDE_THEORY,
};
use oldroyd_core::lp::{besov_norm, besov_norm_lowpass, sobolev_norm, BesovSpec, DyadicPartition};
use oldroyd_core::oldroyd::{gamma_equation_residual, rhs, riesz_alpha, State, SystemParams};
use oldroyd_core::spectral::ops::{
    curl, curl_div, deformation_and_rotation, fractional_power, grad, laplacian, leray_project,
};
use oldroyd_core::spectral::random::{
    scalar_field, solenoidal_field, sym_tensor_field, SpectrumSpec,
};
use oldroyd_core::spectral::{SpectralScalar, SpectralSymTensor, SpectralVector, TorusGrid};
use oldroyd_core::verifier::estimates::{
    commutator_sum_tau_ratio, commutator_sum_u_ratio, kernel_commutator_ratio, riesz_bmo_ratio,
    riesz_commutator_ratio, smooth_commutator_ratio, HolderTriple, TauMode, Theta, YoungTriple,
};
use oldroyd_core::verifier::{run_estimate, Ensemble, EstimateId, SuiteParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn regimes() -> [(&'static str, SystemParams); 2] {
    [
        (
            "alpha=1.25,eta=0",
            SystemParams::reduced(1.0, 0.0, 1.25, 0.0),
        ),
        (
            "alpha=1,beta=0.25,eta=1",
            SystemParams::reduced(1.0, 1.0, 1.0, 0.25),
        ),
    ]
}

fn config(params: SystemParams, dt: f64, t_end: f64, amplitude: f64) -> RunConfig {
    RunConfig {
        n: 64,
        params,
        dt,
        t_end,
        diag_every: (0.01 / dt).round() as usize,
        checkpoint_every: 0,
        initial_condition: InitialCondition::RandomSolenoidal {
            decay: 3.0,
            amplitude,
            tau_amplitude: amplitude,
            seed: 1,
        },
        scheme: Scheme::IfRk4,
    }
}

fn rel_max_diff(a: &SpectralScalar, b: &SpectralScalar) -> f64 {
    a.max_diff(b) / b.max_abs().max(a.max_abs()).max(f64::MIN_POSITIVE)
}

fn partition_of_unity() -> Outcome {
    let start = Instant::now();
    let c = DyadicPartition::default().check(10_000, 4096.0);
    let elapsed = start.elapsed();
    let pass = c.inhomogeneous_defect < 1e-12
        && c.homogeneous_defect < 1e-12
        && c.support_leak == 0.0
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "inhomogeneous {:.1e}, homogeneous {:.1e}, support leak {:.1e} on {} radii in {:.3}s",
            c.inhomogeneous_defect,
            c.homogeneous_defect,
            c.support_leak,
            c.samples,
            elapsed.as_secs_f64()
        ),
    )
}

fn spectral_identities() -> Outcome {
    let start = Instant::now();
    let g = TorusGrid::new(64).unwrap();
    let spec = SpectrumSpec::gaussian(1.5);
    let (alpha, nu) = (1.25, 0.7);
    let mut worst = [0.0f64; 4];
    for seed in 0..4 {
        let phi = scalar_field(&g, spec, seed, 11);
        let gp = grad(&phi);
        worst[0] = worst[0].max(curl(&gp).max_abs() / gp.max_abs());

        let v = SpectralVector::new(
            scalar_field(&g, spec, seed, 12),
            scalar_field(&g, spec, seed, 13),
        )
        .unwrap();
        let p = leray_project(&v);
        worst[1] = worst[1].max(leray_project(&p).max_diff(&p) / p.max_abs());

        let tau = sym_tensor_field(&g, spec, seed);
        let r = riesz_alpha(&tau, alpha, nu).unwrap();
        let lhs = fractional_power(&r, 2.0 * alpha).scaled(nu);
        worst[2] = worst[2].max(rel_max_diff(&lhs, &curl_div(&tau)));

        let u = solenoidal_field(&g, spec, seed);
        let (du, _) = deformation_and_rotation(&u);
        let half_lap = laplacian(&curl(&u)).scaled(0.5);
        worst[3] = worst[3].max(rel_max_diff(&curl_div(&du), &half_lap));
    }
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|&w| w <= 1e-11) && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "curl grad {:.1e}, Leray {:.1e}, R_alpha {:.1e}, curl div Du {:.1e} in {:.2}s",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            elapsed.as_secs_f64()
        ),
    )
}

/// Least-squares slope of `log defect` against `log dt`.
fn fitted_order(dts: &[f64], defects: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = defects.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn energy_balance() -> Outcome {
    let dts = [2e-3, 1e-3, 5e-4];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, params) in regimes() {
        let mut defects = Vec::new();
        let mut slowest: f64 = 0.0;
        for dt in dts {
            let start = Instant::now();
            let out = run(&config(params, dt, 1.0, 10.0)).expect("energy run completes");
            slowest = slowest.max(start.elapsed().as_secs_f64());
            defects.push(out.summary.max_energy_residual);
        }
        let order = fitted_order(&dts, &defects);
        let ok = defects.iter().all(|&d| d < 1e-6) && order >= 3.5 && slowest < 120.0;
        pass &= ok;
        parts.push(format!(
            "[{name}] defects {:.2e}/{:.2e}/{:.2e}, order {order:.2}, slowest run {slowest:.1}s",
            defects[0], defects[1], defects[2]
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Small-data `T = 2` runs with five snapshots, shared by criteria 4 and 5.
struct LongRun {
    name: &'static str,
    params: SystemParams,
    out: RunOutput,
    snapshots: Vec<State>,
}

fn long_runs() -> Vec<LongRun> {
    regimes()
        .into_iter()
        .map(|(name, params)| {
            let mut cfg = config(params, 1e-3, 2.0, 0.1);
            cfg.checkpoint_every = cfg.steps() / 4;
            let mut snapshots = Vec::new();
            let out = run_with(&cfg, |_, s| {
                snapshots.push(s.clone());
                Ok(())
            })
            .expect("small-data run completes");
            LongRun {
                name,
                params,
                out,
                snapshots,
            }
        })
        .collect()
}

fn gamma_boundedness(runs: &[LongRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let g0 = r.out.records[0].gamma_l2;
        let sup = r.out.records.iter().map(|x| x.gamma_l2).fold(0.0, f64::max);
        let int = r.out.summary.int_gamma_diss;
        let residual = r
            .snapshots
            .iter()
            .map(|s| {
                let (du, dtau) = rhs(s, &r.params);
                gamma_equation_residual(s, &du, &dtau, &r.params).unwrap()
            })
            .fold(0.0, f64::max);
        let ok = sup.is_finite()
            && int.is_finite()
            && sup <= 10.0 * g0
            && r.snapshots.len() == 5
            && residual < 1e-8;
        pass &= ok;
        parts.push(format!(
            "[{}] sup |Gamma| {sup:.3e} (initial {g0:.3e}), int |L^a Gamma|^2 {int:.3e}, residual {residual:.1e} on {} snapshots",
            r.name,
            r.snapshots.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn regularity_criterion(runs: &[LongRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let (cu, ct) = (r.out.summary.int_crit_u, r.out.summary.int_crit_tau);
        let ok = cu.is_finite() && ct.is_finite() && r.out.regime != OUTSIDE_THEORY;
        pass &= ok;
        parts.push(format!(
            "[{}] int crit_u {cu:.3e}, int crit_tau {ct:.3e}, regime \"{}\"",
            r.name, r.out.regime
        ));
    }
    let dir = tempfile::tempdir().unwrap();
    let open = config(SystemParams::reduced(1.0, 0.0, 1.0, 0.0), 1e-3, 2.0, 0.1);
    let status = match write_run(&open, None, dir.path()) {
        Ok(_) => "completed".to_string(),
        Err(f) => format!("stopped: {}", f.error),
    };
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap())
            .unwrap();
    let label = meta["regime"].as_str().unwrap_or_default().to_string();
    pass &= label == OUTSIDE_THEORY;
    parts.push(format!(
        "[alpha=1,eta=0] {status}, metadata regime \"{label}\""
    ));
    outcome(pass, parts.join("; "))
}

fn degenerate_ratios() -> Vec<(&'static str, f64)> {
    let coarse = TorusGrid::new(16).unwrap();
    let g = TorusGrid::new(32).unwrap();
    let p = DyadicPartition::default();
    let spec = SpectrumSpec::gaussian(2.0);
    let u = solenoidal_field(&coarse, spec, 3).padded(&g).unwrap();
    let tau = sym_tensor_field(&coarse, spec, 4).padded(&g).unwrap();
    let f = scalar_field(&coarse, spec, 5, 1).padded(&g).unwrap();
    let constant_u = SpectralVector::new(
        SpectralScalar::constant(&g, 0.4),
        SpectralScalar::constant(&g, -0.3),
    )
    .unwrap();
    let zero_s = SpectralScalar::zeros(&g);
    vec![
        (
            "eq2_1",
            commutator_sum_u_ratio(&p, &constant_u, 1.0, 1.25).unwrap(),
        ),
        (
            "eq2_2",
            commutator_sum_tau_ratio(
                &p,
                &constant_u,
                &tau,
                TauMode::Eq22 {
                    s: 1.0,
                    alpha: 1.25,
                    beta: 0.25,
                },
            )
            .unwrap(),
        ),
        (
            "eq2_3",
            commutator_sum_tau_ratio(
                &p,
                &u,
                &SpectralSymTensor::zeros(&g),
                TauMode::Eq23 {
                    s1: 1.0,
                    s2: 1.0,
                    alpha: 1.25,
                },
            )
            .unwrap(),
        ),
        (
            "eq3_12",
            riesz_commutator_ratio(&constant_u, &tau, 1.25, 1.0).unwrap(),
        ),
        (
            "sce",
            smooth_commutator_ratio(
                &p,
                Theta::Phi,
                2.0,
                &SpectralScalar::constant(&g, 1.5),
                &f,
                HolderTriple {
                    p: f64::INFINITY,
                    q: 2.0,
                    r: 2.0,
                },
            )
            .unwrap(),
        ),
        (
            "wu_jmfm",
            kernel_commutator_ratio(
                &p,
                2,
                &zero_s,
                &f,
                YoungTriple {
                    p: 2.0,
                    p1: 1.0,
                    p2: 2.0,
                },
            )
            .unwrap(),
        ),
        (
            "weies",
            riesz_bmo_ratio(&SpectralScalar::constant(&g, 2.0), &f, 2.0).unwrap(),
        ),
    ]
}

fn estimate_verifier() -> Outcome {
    let start = Instant::now();
    let ens = Ensemble::default();
    let params = SuiteParams::default();
    let mut failed = Vec::new();
    let mut parts = Vec::new();
    for id in EstimateId::ALL {
        let report = run_estimate(id, &ens, &params).expect("estimate runs");
        if !report.pass {
            failed.push(id.as_str());
        }
        parts.push(format!(
            "{id} {:.2e}..{:.2e}",
            report.min_ratio, report.max_ratio
        ));
    }
    let elapsed = start.elapsed();
    let degenerate = degenerate_ratios();
    let worst_degenerate = degenerate.iter().map(|d| d.1).fold(0.0, f64::max);
    let pass = failed.is_empty() && elapsed < Duration::from_secs(300) && worst_degenerate <= 1e-12;
    outcome(
        pass,
        format!(
            "{}/8 suites pass (n = {:?}, {} samples, slack {}) in {:.1}s; ratios {}; degenerate max {worst_degenerate:.1e} over {} checks; failed: {:?}",
            8 - failed.len(),
            ens.resolutions,
            ens.size,
            ens.slack,
            elapsed.as_secs_f64(),
            parts.join(", "),
            degenerate.len(),
            failed
        ),
    )
}

fn norm_equivalences() -> Outcome {
    let g = TorusGrid::new(64).unwrap();
    let p = DyadicPartition::default();
    let fields: Vec<SpectralScalar> = (0..20u32)
        .map(|i| {
            let spec = SpectrumSpec::random_phase(1.0 + 0.5 * f64::from(i % 4), 1.0);
            scalar_field(&g, spec, u64::from(i), 21).add(&SpectralScalar::constant(&g, 0.1))
        })
        .collect();
    let band = |ratios: &[f64]| {
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        (lo, hi)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    // Σφⱼ² ∈ [½, 1] and 2ʲ/⟨k⟩ ∈ [3/(8√2), 4/3] on the support of φⱼ
    let (q_lo, q_hi): (f64, f64) = (3.0 / (8.0 * 2f64.sqrt()), 4.0 / 3.0);
    for s in [-1.0f64, 0.0, 1.0, 2.0] {
        let ratios: Vec<f64> = fields
            .iter()
            .map(|f| {
                let b = besov_norm(&p, f, BesovSpec::new(s, 2.0, 2.0, false).unwrap()).unwrap();
                b.value / sobolev_norm(f, s, false)
            })
            .collect();
        let (lo, hi) = band(&ratios);
        let (m, big) = if s >= 0.0 {
            (q_lo.powf(s), q_hi.powf(s))
        } else {
            (q_hi.powf(s), q_lo.powf(s))
        };
        let (allowed_lo, allowed_hi) = (m / 2f64.sqrt(), big);
        pass &= lo >= allowed_lo && hi <= allowed_hi;
        parts.push(format!(
            "B^{s}_22/H^{s} in [{lo:.4}, {hi:.4}] (C = {:.4}, allowed [{allowed_lo:.4}, {allowed_hi:.4}])",
            hi / lo
        ));
    }
    // Young and telescoping give 1/(1 + 2^{−s}) ≤ low-pass/block ≤ 2^s/(1 − 2^s)
    for s in [-0.5f64, -1.0] {
        for (pp, qq) in [(2.0, 2.0), (f64::INFINITY, f64::INFINITY)] {
            let spec = BesovSpec::new(s, pp, qq, false).unwrap();
            let ratios: Vec<f64> = fields
                .iter()
                .map(|f| {
                    besov_norm_lowpass(&p, f, spec).unwrap().value
                        / besov_norm(&p, f, spec).unwrap().value
                })
                .collect();
            let (lo, hi) = band(&ratios);
            let s2 = 2f64.powf(s);
            let (allowed_lo, allowed_hi) = (1.0 / (1.0 + 1.0 / s2), s2 / (1.0 - s2));
            pass &= lo >= allowed_lo && hi <= allowed_hi;
            parts.push(format!(
                "(E) s={s},p={pp},q={qq}: [{lo:.4}, {hi:.4}] (C = {:.4}, allowed [{allowed_lo:.4}, {allowed_hi:.4}])",
                hi / lo
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn determinism() -> Outcome {
    let cfg = RunConfig {
        n: 32,
        t_end: 0.2,
        ..config(SystemParams::reduced(1.0, 0.0, 1.25, 0.0), 1e-3, 0.2, 0.5)
    };
    let csv = |dir: &Path| {
        write_run(&cfg, None, dir).expect("run completes");
        std::fs::read(dir.join("diagnostics.csv")).unwrap()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (x, y) = (csv(a.path()), csv(b.path()));
    outcome(
        x == y && !x.is_empty(),
        format!(
            "two runs, diagnostics.csv {} and {} bytes, identical: {}",
            x.len(),
            y.len(),
            x == y
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {n} [{name}]: {} | {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, name, o));
    };
    report(1, "partition of unity", partition_of_unity());
    report(2, "spectral identities", spectral_identities());
    report(3, "energy balance", energy_balance());
    let runs = long_runs();
    report(4, "gamma boundedness", gamma_boundedness(&runs));
    report(5, "regularity criterion", regularity_criterion(&runs));
    report(6, "estimate verifier", estimate_verifier());
    report(7, "norm equivalences", norm_equivalences());
    report(8, "determinism", determinism());
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed {failed:?}")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
