//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p psclab --test acceptance`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

use psclab::chart::{self, jet1_compare, Method, ScalarField, Side};
use psclab::embed::{self, build_mesh, circumference_deviation, embed_profile, EmbedOptions};
use psclab::flow::{advance, scal_along_flow, uniform_grid, FlowSpec, PointwiseState};
use psclab::killing::{
    alpha_of_norm, conformal_bump, conformal_scal, delta_of_alpha, killing_estimate_check,
    oracle_killing_data, random_family, stereographic_factor, variation_sweep, DeformFn,
    Submanifold,
};
use psclab::models::{
    cap_cartesian_chart, doubly_warped, flat_cartesian_chart, flat_cylinder, round_sphere,
    CapParams, InvariantModel,
};
use psclab::submersion::{
    berger_oracle_scal, cap_quantities, cap_threshold, mean_curvature_horizontal_normal,
    oneill_monotone, oneill_scal, CollarModel, SubmersionModel,
};
use psclab::{cap_metric, DoublyWarpedMetric, Expr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_241_016;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn e(s: &str) -> Expr {
    s.parse().unwrap()
}

fn warped_models() -> Vec<DoublyWarpedMetric> {
    vec![
        doubly_warped(
            3,
            (0.0, 3.0),
            e("1.5 + 0.5*sin(t)"),
            e("1.5 + 0.5*cos(t)"),
            0.0,
        )
        .unwrap(),
        doubly_warped(3, (0.0, 3.0), e("2 + sin(t)"), e("1 + 0.1*t"), 0.0).unwrap(),
    ]
}

fn variation_models() -> Vec<Box<dyn InvariantModel>> {
    let mut out: Vec<Box<dyn InvariantModel>> = vec![Box::new(round_sphere(1.0).unwrap())];
    for w in warped_models() {
        out.push(Box::new(w));
    }
    out
}

fn criterion_1() -> Outcome {
    const TOL_FD: f64 = 1e-4;
    const TOL_ANALYTIC: f64 = 1e-7;
    const BUDGET: Duration = Duration::from_secs(60);
    let start = Instant::now();
    let params = random_family(SEED, 50);
    let (mut worst_fd, mut worst_an, mut evals) = (0.0_f64, 0.0_f64, 0);
    for m in variation_models() {
        let pts = m.interior_points(100, 0.05);
        for (method, worst) in [
            (Method::FiniteDifference, &mut worst_fd),
            (Method::Analytic, &mut worst_an),
        ] {
            match variation_sweep(m.as_ref(), &params, &pts, method) {
                Ok(s) => {
                    *worst = worst.max(s.max_rel_err);
                    evals += s.evaluations;
                }
                Err(err) => return outcome(false, format!("{} ({method}): {err}", m.name())),
            }
        }
    }
    let took = start.elapsed();
    outcome(
        worst_fd <= TOL_FD && worst_an <= TOL_ANALYTIC && took <= BUDGET,
        format!(
            "{evals} evaluations; max rel err FD {worst_fd:.2e} (tol {TOL_FD:e}), analytic {worst_an:.2e} (tol {TOL_ANALYTIC:e}); {:.1}s (budget {}s)",
            took.as_secs_f64(),
            BUDGET.as_secs()
        ),
    )
}

fn criterion_2() -> Outcome {
    const TOL: f64 = 1e-8;
    const TOL_WORKED: f64 = 1e-10;
    let alphas: Vec<DeformFn> = random_family(SEED ^ 2, 10)
        .into_iter()
        .map(|p| p.alpha)
        .collect();
    let mut worst = 0.0_f64;
    for m in variation_models() {
        let chart = m.chart();
        for (k, x) in m.interior_points(100, 0.05).iter().enumerate() {
            let alpha = &alphas[k % alphas.len()];
            let closed = match delta_of_alpha(m.as_ref(), alpha, x) {
                Ok(v) => v,
                Err(err) => return outcome(false, format!("{}: {err}", m.name())),
            };
            let oracle = match chart::laplacian(
                &chart,
                &alpha_of_norm(&chart, alpha),
                x,
                Method::Analytic,
            ) {
                Ok(v) => v,
                Err(err) => return outcome(false, format!("{}: {err}", m.name())),
            };
            worst = worst.max((closed - oracle).abs() / closed.abs().max(1.0));
        }
    }
    let sphere = round_sphere(1.0).unwrap();
    let sin_sq = alpha_of_norm(&sphere.chart(), &DeformFn::from(e("t")));
    let mut worked = 0.0_f64;
    for k in 1..20 {
        let r = PI * k as f64 / 20.0;
        let want = 2.0 - 6.0 * r.cos().powi(2);
        let closed = delta_of_alpha(&sphere, &e("t").into(), &[r, 0.0]).unwrap();
        let oracle =
            chart::laplacian(&sphere.chart(), &sin_sq, &[r, 0.0], Method::Analytic).unwrap();
        worked = worked.max((closed - want).abs()).max((oracle - want).abs());
    }
    outcome(
        worst <= TOL && worked <= TOL_WORKED,
        format!("formula vs oracle Laplacian {worst:.2e} (tol {TOL:e}); worked value {worked:.2e} (tol {TOL_WORKED:e})"),
    )
}

fn criterion_3() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut surfaces: Vec<Box<dyn InvariantModel>> = vec![
        Box::new(round_sphere(1.0).unwrap()),
        Box::new(round_sphere(2.5).unwrap()),
        Box::new(flat_cylinder(1.0).unwrap()),
        Box::new(cap_metric(CapParams::new(1.0, 1.2).unwrap()).unwrap()),
    ];
    let mut higher: Vec<Box<dyn InvariantModel>> = Vec::new();
    for w in warped_models() {
        higher.push(Box::new(w));
    }
    higher.push(Box::new(
        doubly_warped(4, (0.0, 2.0), e("1 + 0.3*t"), e("2 + cos(t)"), 1.0).unwrap(),
    ));
    higher.push(Box::new(
        doubly_warped(4, (0.0, 2.0), e("2 - 0.5*t^2 + t"), e("1 + t"), 0.0).unwrap(),
    ));

    let mut min_margin = f64::INFINITY;
    let mut surface_max = 0.0_f64;
    let mut oracle_min = f64::INFINITY;
    for (is_surface, list) in [(true, &mut surfaces), (false, &mut higher)] {
        for m in list.iter() {
            let pts = m.interior_points(100, 0.01);
            let rep = match killing_estimate_check(m.as_ref(), &pts) {
                Ok(r) => r,
                Err(err) => return outcome(false, format!("{}: {err}", m.name())),
            };
            min_margin = min_margin.min(rep.min_margin);
            if is_surface {
                surface_max = surface_max.max(rep.max_abs_margin);
            }
            let chart = m.chart();
            for x in pts.iter().step_by(10) {
                match oracle_killing_data(&chart, x, Method::Analytic) {
                    Ok(o) => {
                        oracle_min = oracle_min
                            .min(o.data.estimate_margin() / o.data.norm_sq.powi(2).max(1.0))
                    }
                    Err(err) => return outcome(false, format!("{} oracle: {err}", m.name())),
                }
            }
        }
    }
    outcome(
        min_margin >= -TOL && surface_max <= TOL && oracle_min >= -TOL,
        format!(
            "min margin {min_margin:.2e} (oracle {oracle_min:.2e}) >= -{TOL:e}; surface saturation max |margin| {surface_max:.2e} (tol {TOL:e})"
        ),
    )
}

fn criterion_4() -> Outcome {
    const TOL: f64 = 1e-9;
    const SLOPE_TOL: f64 = 1e-6;
    const BUDGET: Duration = Duration::from_secs(30);
    let start = Instant::now();
    let mut closed = 0.0_f64;
    for (kappa, n) in [(0.3, 2), (1.0, 3), (2.0, 4)] {
        let st = advance(&PointwiseState::initial(kappa, n, 0.0).unwrap(), 1.0, 1e-11).unwrap();
        closed = closed
            .max((st.a - (-1.0f64).exp()).abs())
            .max((st.b - 1.0).abs());
    }
    let mut fixed = 0.0_f64;
    for n in [2, 3, 4] {
        for s in [0.5, 1.0, 2.0] {
            let st = advance(&PointwiseState::initial(0.0, n, 1.0).unwrap(), s, 1e-11).unwrap();
            let want = (-s / (n - 1) as f64).exp();
            fixed = fixed.max((st.b - want).abs()).max((st.a - want).abs());
        }
    }
    let model = round_sphere(1.0).unwrap();
    let spec = FlowSpec::new(model.clone(), 1.0, 1e-10).unwrap();
    let grid = uniform_grid(&model, 400, true);
    let times: Vec<f64> = (0..=30).map(|k| 0.05 * k as f64).collect();
    let rep = match scal_along_flow(&spec, &grid, &times, SLOPE_TOL) {
        Ok(r) => r,
        Err(err) => return outcome(false, format!("flow: {err}")),
    };
    let took = start.elapsed();
    outcome(
        closed <= TOL && fixed <= TOL && rep.pass && took <= BUDGET,
        format!(
            "ε=0 closed form {closed:.2e}, fixed-point law {fixed:.2e} (tol {TOL:e}); ε=1 on 400 nodes: min scal {:.4}, min d/ds scal {:.2e} (tol -{SLOPE_TOL:e}); {:.1}s (budget {}s)",
            rep.min_scal,
            rep.min_slope,
            took.as_secs_f64(),
            BUDGET.as_secs()
        ),
    )
}

fn criterion_5() -> Outcome {
    const CONE_TOL: f64 = 1e-6;
    const SMOOTH_TOL: f64 = 1e-3;
    const ISO_TOL: f64 = 1e-3;
    const N_PHI: usize = 64;
    let model = round_sphere(1.0).unwrap();
    let zero = FlowSpec::new(model.clone(), 0.0, 1e-10).unwrap();
    let one = FlowSpec::new(model, 1.0, 1e-10).unwrap();
    let (mut cone, mut smooth) = (0.0_f64, 0.0_f64);
    for s in [0.5, 1.0, 1.5] {
        for pole in [0.0, PI] {
            cone = cone.max((zero.cone_factor(pole, s).unwrap() - (-s / 2.0).exp()).abs());
            smooth = smooth.max((one.cone_factor(pole, s).unwrap() - 1.0).abs());
        }
    }

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let s_list = [0.0, 0.5, 1.0, 1.5];
    let run = |dir: &std::path::Path| {
        embed::figure_panels(
            &one,
            &[0.0, 1.0],
            &s_list,
            N_PHI,
            EmbedOptions::default(),
            dir,
        )
    };
    let (a, b) = match (run(dir_a.path()), run(dir_b.path())) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(err), _) | (_, Err(err)) => return outcome(false, format!("figure export: {err}")),
    };
    let identical = a.iter().zip(&b).all(|(p, q)| {
        std::fs::read(&p.obj).unwrap() == std::fs::read(&q.obj).unwrap()
            && std::fs::read(&p.csv).unwrap() == std::fs::read(&q.csv).unwrap()
    });
    let objs = walk_obj(dir_a.path());
    let circ = a
        .iter()
        .map(|p| p.circumference_deviation)
        .fold(0.0, f64::max);
    // independent of the panel bookkeeping
    let p = embed_profile(&one, 1.0, EmbedOptions::default()).unwrap();
    let circ = circ.max(circumference_deviation(
        &p,
        &build_mesh(&p, N_PHI).unwrap(),
        N_PHI,
    ));
    outcome(
        cone <= CONE_TOL && smooth <= SMOOTH_TOL && circ <= ISO_TOL && objs == 8 && identical,
        format!(
            "ε=0 cone factor error {cone:.2e} (tol {CONE_TOL:e}); ε=1 |f'(0) - 1| {smooth:.2e} (tol {SMOOTH_TOL:e}); circumference {circ:.2e} (tol {ISO_TOL:e}, n_phi {N_PHI}); {objs} OBJ files, byte-identical reruns: {identical}"
        ),
    )
}

fn walk_obj(dir: &std::path::Path) -> usize {
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            count += walk_obj(&path);
        } else if path.extension().is_some_and(|x| x == "obj") {
            count += 1;
        }
    }
    count
}

fn criterion_6() -> Outcome {
    const TOL_BERGER: f64 = 1e-6;
    const TOL_H: f64 = 1e-8;
    const TOL_CAP: f64 = 1e-9;
    let mut berger = 0.0_f64;
    for tau in [0.25, 0.5, 1.0, 2.0] {
        for method in [Method::Analytic, Method::FiniteDifference] {
            for s in berger_oracle_scal(tau, method).unwrap() {
                berger = berger.max((s - (8.0 - 2.0 * tau)).abs());
            }
        }
        let m = SubmersionModel::berger();
        berger = berger.max((oneill_scal(&m, tau).unwrap() - (8.0 - 2.0 * tau)).abs());
    }
    let taus: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
    let cap = CapParams::new(0.8, 1.0).unwrap();
    let monotone = oneill_monotone(&SubmersionModel::berger(), &taus).unwrap()
        && oneill_monotone(&SubmersionModel::cap_product(2.0, 2, &cap), &taus).unwrap();

    let collars = [
        CollarModel::Profile {
            id: "flat_cylinder".into(),
            model: flat_cylinder(1.0).unwrap(),
            boundary: 1.0,
            side: Side::Upper,
        },
        CollarModel::Warped {
            id: "warped".into(),
            model: doubly_warped(3, (0.0, 1.0), e("2 + t"), e("1"), 0.0).unwrap(),
            boundary: 1.0,
            side: Side::Upper,
        },
        CollarModel::Profile {
            id: "sphere_band".into(),
            model: round_sphere(1.0).unwrap(),
            boundary: FRAC_PI_4,
            side: Side::Lower,
        },
    ];
    let mut h_dev = 0.0_f64;
    for c in &collars {
        match mean_curvature_horizontal_normal(c, &taus, TOL_H) {
            Ok(r) => h_dev = h_dev.max(r.max_dev),
            Err(err) => return outcome(false, format!("{}: {err}", c.id())),
        }
    }

    let mut cap_dev = 0.0_f64;
    for (sigma, rho) in [(1.0, FRAC_PI_4), (0.5, 0.6), (2.0, 1.0)] {
        let c = CapParams::new(sigma, rho).unwrap();
        for s in [0.0, 0.5, 1.0, 2.0] {
            let q = cap_quantities(&c, s);
            let want = (s / 2.0).exp() / (sigma * (rho / sigma).tan());
            cap_dev = cap_dev.max((q.h_boundary - want).abs());
        }
        for h in [1.5, 3.0, 10.0] {
            let t = cap_threshold(&c, h);
            let want = 2.0 * (h * sigma * (rho / sigma).tan()).ln();
            cap_dev = cap_dev.max((t.raw - want).abs());
            if t.s0 > 0.0 {
                cap_dev = cap_dev.max((cap_quantities(&c, t.s0).h_boundary - h).abs());
            }
        }
    }
    outcome(
        berger <= TOL_BERGER && monotone && h_dev <= TOL_H && cap_dev <= TOL_CAP,
        format!(
            "Berger scal {berger:.2e} (tol {TOL_BERGER:e}); monotone on 20 τ: {monotone}; collar H τ-invariance {h_dev:.2e} (tol {TOL_H:e}); cap H and s0 {cap_dev:.2e} (tol {TOL_CAP:e})"
        ),
    )
}

fn criterion_7() -> Outcome {
    const TOL_STEREO: f64 = 1e-6;
    const TOL_BUMP: f64 = 1e-8;
    let flat = flat_cartesian_chart(1.0, 3.0);
    let f = stereographic_factor();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut stereo = 0.0_f64;
    // the lower hemisphere; further out e^{-2f} amplifies FD round-off
    for _ in 0..20 {
        let x = [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
        for method in [Method::Analytic, Method::FiniteDifference] {
            stereo = stereo.max((conformal_scal(&flat, &f, &x, method).unwrap() - 2.0).abs());
        }
    }

    let one = ScalarField::constant(1.0);
    let mut bump = 0.0_f64;
    let plane = flat_cartesian_chart(1.0, 1.0);
    let sphere = round_sphere(1.0).unwrap().chart();
    let pairs = [
        (
            plane,
            Submanifold::flat_point(vec![0.0, 0.0]),
            vec![vec![0.0, 0.0]],
        ),
        (
            sphere,
            Submanifold::sphere_equator(),
            (0..10).map(|k| vec![FRAC_PI_2, 0.6 * k as f64]).collect(),
        ),
    ];
    for (metric, w, points) in &pairs {
        let n = metric.dim() as f64;
        for lambda in [0.5, 2.0, 7.0] {
            for x in points {
                let b = conformal_bump(metric, w, lambda, &one, 1.0, x, Method::Analytic).unwrap();
                bump = bump.max((b.lap_psi - 2.0 * lambda * (n - w.dim as f64)).abs());
            }
        }
    }
    outcome(
        stereo <= TOL_STEREO && bump <= TOL_BUMP,
        format!("stereographic scal error {stereo:.2e} (tol {TOL_STEREO:e}); bump Laplacian on W {bump:.2e} (tol {TOL_BUMP:e})"),
    )
}

fn criterion_8() -> Outcome {
    const TOL: f64 = 1e-9;
    let origin = vec![vec![0.0, 0.0]];
    let cap = cap_cartesian_chart(1.0, 0.5).unwrap();
    let rep = jet1_compare(&cap, &flat_cartesian_chart(1.0, 0.5), &origin, TOL).unwrap();
    let control = jet1_compare(&cap, &flat_cartesian_chart(1.1, 0.5), &origin, TOL).unwrap();
    outcome(
        rep.pass && !control.pass,
        format!(
            "cap vs flat: 0-jet {:.2e}, 1-jet {:.2e} (tol {TOL:e}); scaled-flat control 0-jet {:.2e} fails: {}",
            rep.max_value_dev, rep.max_first_dev, control.max_value_dev, !control.pass
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("variation formula", criterion_1),
        ("Laplacian of α(|X|²)", criterion_2),
        ("Killing estimate", criterion_3),
        ("deformation ODE", criterion_4),
        ("figure reproduction", criterion_5),
        ("submersions", criterion_6),
        ("conformal machinery", criterion_7),
        ("1-jet comparison", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        println!(
            "criterion {} [{}] {name}: {} ({:.1}s)",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
