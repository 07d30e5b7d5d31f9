//! Acceptance suite: one PASS/FAIL line per criterion, then a nonzero exit if
//! any criterion failed. Every expected value is computed here, independently
//! of the library routine under test.

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gsb_cli::config::{self, RunConfig};
use gsb_cli::runner::build_model;
use gsb_core::fock::{FockBasis, StateVector};
use gsb_core::linalg::{self, C64};
use gsb_core::model::{van_hove_matter, GsbModel};
use gsb_core::modes::{build_radial_grid, ModeSet, QuadratureRule};
use gsb_core::regularity::{
    ccr_and_bound_suite, factorial_moment_decomposition, higher_moment_identity, moment_identity,
    number_decomposition, pullthrough_check, IrSweep, IrVerdict, RegularityReport,
};
use gsb_core::spectral::{GroundState, SolverConfig};

type Res<T> = Result<T, Box<dyn Error>>;

const VH_SINGLE_TOL: f64 = 1e-8;
const VH_ANNIHILATOR_TOL: f64 = 1e-7;
const VH_MULTI_REL_TOL: f64 = 1e-7;
const LADDER_FLOOR: f64 = 1e-7;
const ADDITIVITY_TOL: f64 = 1e-12;
const ABSENCE_SLACK: f64 = 1e-9;
const VH_ABSENCE_EQ_TOL: f64 = 1e-8;
const HIGHER_VH_TOL: f64 = 1e-7;
const HIGHER_SB_TOL: f64 = 1e-6;
const APPENDIX_TOL: f64 = 1e-12;
const APPENDIX_STATES: usize = 50;
const CCR_TOL: f64 = 1e-13;
const BOUND_DRAWS: f64 = 200.0;
const IR_R2_MIN: f64 = 0.99;
const IR_CLOSED_FORM_TOL: f64 = 1e-6;
const IR_CAUCHY_TOL: f64 = 1e-3;
const IR_RUNTIME: Duration = Duration::from_secs(600);

const BUNDLED: [&str; 5] = [
    "van_hove_single_mode",
    "van_hove_multimode",
    "spin_boson",
    "ir_sweep_singular",
    "ir_sweep_regular",
];

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.json"))
}

fn load(name: &str) -> Res<RunConfig> {
    Ok(config::load(&example(name))?)
}

fn ladder(w_top: f64) -> f64 {
    (10.0 * w_top.sqrt()).max(LADDER_FLOOR)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn solve(model: &GsbModel) -> Res<GroundState> {
    Ok(model.ground_state(&SolverConfig::default())?)
}

fn expectation_diag(v: &[C64], diag: &[f64]) -> f64 {
    v.iter().zip(diag).map(|(a, d)| a.norm_sqr() * d).sum()
}

/// Outputs of running every bundled config through the binary.
struct SuiteRun {
    dir: PathBuf,
    ir_elapsed: Duration,
}

fn run_suite(root: &Path, tag: &str) -> Res<SuiteRun> {
    let dir = root.join(tag);
    let mut ir_elapsed = Duration::ZERO;
    for name in BUNDLED {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_gsb"))
            .args(["run", "--config"])
            .arg(example(name))
            .arg("--out")
            .arg(dir.join(name))
            .env_remove("GSB_MAX_DIM")
            .output()?;
        if name.starts_with("ir_sweep") {
            ir_elapsed += start.elapsed();
        }
        if out.status.code() != Some(0) {
            return Err(format!("{name} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)).into());
        }
    }
    Ok(SuiteRun { dir, ir_elapsed })
}

fn suite_reports(run: &SuiteRun, name: &str) -> Res<Vec<RegularityReport>> {
    Ok(serde_json::from_str(&fs::read_to_string(run.dir.join(name).join("report.json"))?)?)
}

fn suite_sweep(run: &SuiteRun, name: &str) -> Res<IrSweep> {
    let mut v: Vec<IrSweep> = serde_json::from_str(&fs::read_to_string(run.dir.join(name).join("sweep.json"))?)?;
    v.pop().ok_or_else(|| "no sweep".into())
}

// 1. Van Hove closed forms.
fn criterion_1() -> Res<(bool, String)> {
    let (a, b) = van_hove_matter();
    let mut grid = ModeSet::new(3, 1.0, vec![1.0], vec![1.0], vec![1.0])?;
    grid.push_values(vec![2f64.sqrt()])?;
    let model = GsbModel::assemble(a, b, grid, 1.0, 24)?;
    let gs = solve(&model)?;
    let n = expectation_diag(&gs.vector, &model.dgamma_diagonal(&[1.0])?);
    let mut aphi = model.annihilator(0)?.apply_vec(&gs.vector);
    for (x, p) in aphi.iter_mut().zip(&gs.vector) {
        *x += p;
    }
    let e_err = (gs.energy + 1.0).abs();
    let n_err = (n - 1.0).abs();
    let a_err = linalg::norm(&aphi);
    let single = e_err <= VH_SINGLE_TOL && n_err <= VH_SINGLE_TOL && a_err <= VH_ANNIHILATOR_TOL;

    let cfg = load("van_hove_multimode")?;
    let model = build_model(&cfg, cfg.build_grid()?)?;
    let gs = solve(&model)?;
    let g = &model.grid;
    let alpha = model.alpha;
    let (mut e_cf, mut n_cf) = (0.0, 0.0);
    for i in 0..g.len() {
        let (l, w, o) = (g.channels[0].values[i], g.weights[i], g.omega[i]);
        e_cf -= alpha * alpha * l * l * w / (2.0 * o);
        n_cf += alpha * alpha * l * l * w / (2.0 * o * o);
    }
    let n_multi = expectation_diag(&gs.vector, &model.dgamma_diagonal(&vec![1.0; g.len()])?);
    let (re, rn) = (rel(gs.energy, e_cf), rel(n_multi, n_cf));
    let multi = g.len() == 6 && re <= VH_MULTI_REL_TOL && rn <= VH_MULTI_REL_TOL;
    Ok((
        single && multi,
        format!(
            "single mode |E+1|={e_err:.2e} |N-1|={n_err:.2e} |a phi + phi|={a_err:.2e} (tol {VH_SINGLE_TOL:e}/{VH_ANNIHILATOR_TOL:e}); \
             M={} rel E={re:.2e} rel N={rn:.2e} (tol {VH_MULTI_REL_TOL:e})",
            g.len()
        ),
    ))
}

fn spin_boson(n_max: usize, n_shells: Option<usize>) -> Res<GsbModel> {
    let mut cfg = load("spin_boson")?;
    cfg.n_max = n_max;
    if let (Some(m), config::GridSpec::Radial { n_shells, .. }) = (n_shells, &mut cfg.grid) {
        *n_shells = m;
    }
    Ok(build_model(&cfg, cfg.build_grid()?)?)
}

// 2. Pull-through on the spin-boson model over n_max.
fn criterion_2() -> Res<(bool, String)> {
    let mut ok = true;
    let mut prev = f64::INFINITY;
    let mut parts = Vec::new();
    for n_max in [8, 12, 16] {
        let model = spin_boson(n_max, None)?;
        let gs = solve(&model)?;
        let f: Vec<C64> = model.grid.lambda(0).iter().map(|v| C64::new(*v, 0.0)).collect();
        let r = pullthrough_check(&model, &gs, &f, &SolverConfig::default())?;
        let tol = ladder(r.w_top);
        ok &= r.rel_err <= tol && r.rel_err <= prev;
        prev = r.rel_err;
        parts.push(format!("n_max={n_max}: {:.2e} <= {tol:.1e}", r.rel_err));
    }
    let model = spin_boson(8, None)?;
    ok &= model.n_modes() == 4 && model.alpha == 0.3 && model.matter_dim() == 2;
    Ok((ok, format!("{} and non-increasing", parts.join(", "))))
}

// 3. Moment identity and additivity.
fn criterion_3() -> Res<(bool, String)> {
    let model = spin_boson(12, None)?;
    let gs = solve(&model)?;
    let cfg = SolverConfig::default();
    let omega = model.grid.omega.clone();
    let gs_list: [(&str, Vec<f64>); 3] = [
        ("1", vec![1.0; omega.len()]),
        ("omega", omega.clone()),
        ("omega^2", omega.iter().map(|w| w * w).collect()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut reports = Vec::new();
    for (label, g) in &gs_list {
        let r = moment_identity(&model, &gs, g, &cfg)?;
        ok &= r.rel_err <= ladder(r.w_top);
        parts.push(format!("G={label}: {:.2e}", r.rel_err));
        reports.push(r);
    }
    let sum: Vec<f64> = gs_list[0].1.iter().zip(&gs_list[1].1).map(|(a, b)| a + b).collect();
    let r = moment_identity(&model, &gs, &sum, &cfg)?;
    let lhs_add = rel(r.lhs, reports[0].lhs + reports[1].lhs);
    let rhs_add = rel(r.rhs, reports[0].rhs + reports[1].rhs);
    ok &= lhs_add <= ADDITIVITY_TOL && rhs_add <= ladder(r.w_top);
    Ok((
        ok,
        format!(
            "{} (ladder floor {LADDER_FLOOR:e}); additivity lhs {lhs_add:.1e} <= {ADDITIVITY_TOL:e}, rhs {rhs_add:.1e}",
            parts.join(", ")
        ),
    ))
}

// 4. Absence inequality on every bundled model; equality for van Hove.
fn criterion_4(run: &SuiteRun) -> Res<(bool, String)> {
    let mut ok = true;
    let mut count = 0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_eq: f64 = 0.0;
    for name in BUNDLED {
        let van_hove = load(name)?.model.is_van_hove();
        let reports = suite_reports(run, name)?;
        let absence: Vec<_> = reports.iter().filter(|r| r.check_name.contains("absence")).collect();
        ok &= !absence.is_empty();
        for r in absence {
            count += 1;
            let scale = r.lhs.abs().max(r.rhs.abs()).max(1.0);
            ok &= r.lhs >= r.rhs - ABSENCE_SLACK * scale;
            worst_margin = worst_margin.min((r.lhs - r.rhs) / scale);
            if van_hove {
                let e = rel(r.lhs, r.rhs);
                worst_eq = worst_eq.max(e);
                ok &= e <= VH_ABSENCE_EQ_TOL;
            }
        }
    }
    Ok((
        ok,
        format!(
            "{count} reports, min (lhs-rhs)/scale={worst_margin:.2e} >= -{ABSENCE_SLACK:e}; van Hove max rel gap {worst_eq:.2e} <= {VH_ABSENCE_EQ_TOL:e}"
        ),
    ))
}

// 5. Higher factorial moments.
fn criterion_5() -> Res<(bool, String)> {
    let cfg = SolverConfig::default();
    let (a, b) = van_hove_matter();
    let mut grid = ModeSet::new(3, 1.0, vec![1.0], vec![1.0], vec![1.0])?;
    grid.push_values(vec![2f64.sqrt()])?;
    let vh = GsbModel::assemble(a, b, grid, 1.0, 24)?;
    let gs = solve(&vh)?;
    // Coherent state with mean 1: <N(N-1)> = 1.
    let r = higher_moment_identity(&vh, &gs, 2, &cfg)?;
    let vh_err = (r.lhs - 1.0).abs().max((r.rhs - 1.0).abs());
    let mut ok = vh_err <= HIGHER_VH_TOL;

    let sb = spin_boson(10, Some(3))?;
    let gs = solve(&sb)?;
    let r = higher_moment_identity(&sb, &gs, 2, &cfg)?;
    let m = sb.n_modes() as f64;
    let budget = m * m * 2.0;
    let solves = r.stats["resolvent_solves"];
    let hit = r.stats["memo_hit_rate"];
    ok &= sb.n_modes() == 3 && sb.matter_dim() == 2 && r.rel_err <= HIGHER_SB_TOL && solves <= budget;

    let smoke = spin_boson(6, Some(2))?;
    let gs = solve(&smoke)?;
    let r3 = higher_moment_identity(&smoke, &gs, 3, &cfg)?;
    ok &= r3.lhs.is_finite() && r3.rhs.is_finite() && r3.rel_err <= ladder(r3.w_top);
    Ok((
        ok,
        format!(
            "van Hove <N(N-1)> err {vh_err:.2e} <= {HIGHER_VH_TOL:e}; spin-boson M=3 rel {:.2e} <= {HIGHER_SB_TOL:e}, \
             {solves} solves <= {budget}, memo hit rate {hit:.3}; n=3 at M=2 rel {:.2e}",
            r.rel_err, r3.rel_err
        ),
    ))
}

/// Annihilator `a_i` as a dense matrix over the library's basis order, built
/// from the occupation tuples alone.
fn dense_annihilator(states: &[Vec<u16>], i: usize) -> Vec<Vec<f64>> {
    let dim = states.len();
    let mut m = vec![vec![0.0; dim]; dim];
    for (c, occ) in states.iter().enumerate() {
        if occ[i] == 0 {
            continue;
        }
        let mut lowered = occ.clone();
        lowered[i] -= 1;
        let r = states.iter().position(|s| *s == lowered).expect("lowered state in basis");
        m[r][c] = (occ[i] as f64).sqrt();
    }
    m
}

fn dense_apply(m: &[Vec<f64>], v: &[C64]) -> Vec<C64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, x)| x * *a).sum())
        .collect()
}

// 6. Appendix decompositions on random states, with a dense cross-check.
fn criterion_6() -> Res<(bool, String)> {
    let grid = build_radial_grid(3, 0.1, 2.0, 3, QuadratureRule::LogMidpoint)?;
    let basis = Arc::new(FockBasis::new(3, 4)?);
    let mut rng = linalg::seeded_rng(2024);
    let k: Vec<C64> = (0..3).map(|i| C64::new(0.5 + i as f64, 0.25 * i as f64)).collect();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut first = None;
    for s in 0..APPENDIX_STATES {
        let mut amps = linalg::random_vector(&mut rng, basis.dim());
        linalg::normalize(&mut amps);
        let psi = StateVector::new(1, amps)?;
        let mut reps = vec![number_decomposition(&psi, &k, &basis, &grid)?];
        for n in 1..=3 {
            reps.push(factorial_moment_decomposition(&psi, n, &basis)?);
        }
        for r in &reps {
            ok &= within(r.lhs, r.rhs, APPENDIX_TOL);
            worst = worst.max((r.lhs - r.rhs).abs() / r.lhs.abs().max(r.rhs.abs()).max(1.0));
        }
        if s == 0 {
            first = Some((psi, reps));
        }
    }

    let (psi, reps) = first.expect("one state");
    let states: Vec<Vec<u16>> = basis.states().map(|s| s.to_vec()).collect();
    let ann: Vec<_> = (0..3).map(|i| dense_annihilator(&states, i)).collect();
    let v = &psi.amplitudes;
    let totals: Vec<f64> = states.iter().map(|s| s.iter().map(|&n| n as f64).sum()).collect();
    let num_lhs: f64 = (0..3)
        .map(|i| k[i].norm_sqr() * linalg::norm_sqr(&dense_apply(&ann[i], v)))
        .sum();
    let num_rhs: f64 = states
        .iter()
        .zip(v)
        .map(|(s, a)| a.norm_sqr() * (0..3).map(|i| k[i].norm_sqr() * s[i] as f64).sum::<f64>())
        .sum();
    let mut dense_ok = within(reps[0].lhs, num_lhs, APPENDIX_TOL) && within(reps[0].rhs, num_rhs, APPENDIX_TOL);
    for n in 1..=3usize {
        let mut lhs = 0.0;
        for t in 0..3usize.pow(n as u32) {
            let mut w = v.clone();
            let mut key = t;
            for _ in 0..n {
                w = dense_apply(&ann[key % 3], &w);
                key /= 3;
            }
            lhs += linalg::norm_sqr(&w);
        }
        let rhs: f64 = totals
            .iter()
            .zip(v)
            .map(|(&tot, a)| a.norm_sqr() * (1..=n).map(|j| (tot - j as f64 + 1.0).max(0.0)).product::<f64>())
            .sum();
        dense_ok &= within(reps[n].lhs, lhs, APPENDIX_TOL) && within(reps[n].rhs, rhs, APPENDIX_TOL);
    }
    Ok((
        ok && dense_ok,
        format!(
            "{APPENDIX_STATES} states x (N, n=1..3) at M=3 n_max=4: worst gap/scale {worst:.2e} <= {APPENDIX_TOL:e}; dense cross-check {}",
            if dense_ok { "agrees" } else { "DISAGREES" }
        ),
    ))
}

// 7. CCR and the relative bounds.
fn criterion_7() -> Res<(bool, String)> {
    let grid = build_radial_grid(3, 0.1, 2.0, 3, QuadratureRule::LogMidpoint)?;
    let basis = Arc::new(FockBasis::new(3, 4)?);
    let reps = ccr_and_bound_suite(&basis, &grid, 99)?;
    let get = |name: &str| reps.iter().find(|r| r.check_name == name).ok_or(format!("missing {name}"));
    let ccr = get("ccr_interior")?;
    let ccr_ok = ccr.rel_err <= CCR_TOL || ccr.abs_err <= CCR_TOL * ccr.lhs.abs().max(ccr.rhs.abs()).max(1.0);
    let ann = get("annihilator_bound")?;
    let cre = get("creator_bound")?;
    let bounds_ok = ann.pass && cre.pass && ann.stats["draws"] == BOUND_DRAWS && cre.stats["draws"] == BOUND_DRAWS;
    let comm = get("dgamma_commutators")?;
    let vac = get("ccr_vacuum")?;
    Ok((
        ccr_ok && bounds_ok && comm.pass && vac.pass,
        format!(
            "interior CCR {:.2e} <= {CCR_TOL:e}; bounds over {BOUND_DRAWS} draws min margin {:.2e}/{:.2e}; commutators {:.2e}",
            ccr.rel_err, ann.stats["min_relative_margin"], cre.stats["min_relative_margin"], comm.rel_err
        ),
    ))
}

/// `sum_i w_i (lambda_i / omega_i)^2` on the log-midpoint grid of `[sigma, 1]`
/// in `R^3` for `rho = r^p`, hard cutoff at 1, `omega = r`.
fn discrete_norm(sigma: f64, n: usize, p: f64) -> f64 {
    let q = (1.0 / sigma).powf(1.0 / n as f64);
    (0..n)
        .map(|k| {
            let (lo, hi) = (sigma * q.powi(k as i32), sigma * q.powi(k as i32 + 1));
            let r = (lo * hi).sqrt();
            4.0 * std::f64::consts::PI * r * r * (hi - lo) * r.powf(2.0 * p - 3.0)
        })
        .sum()
}

// 8. Infrared dichotomy.
fn criterion_8(run: &SuiteRun) -> Res<(bool, String)> {
    let singular = suite_sweep(run, "ir_sweep_singular")?;
    let cfg = load("ir_sweep_singular")?;
    let alpha = cfg.alpha;
    let sigmas: Vec<f64> = singular.rows.iter().map(|r| r.sigma).collect();
    let mut ok = sigmas == [1e-1, 1e-2, 1e-3, 1e-4] && cfg.model.is_van_hove();
    let mut cf_worst: f64 = 0.0;
    for row in &singular.rows {
        ok &= row.n_shells == (16.0 * (1.0 / row.sigma).log10()).round() as usize;
        let cf = alpha * alpha * discrete_norm(row.sigma, row.n_shells, 0.0) / 2.0;
        cf_worst = cf_worst.max(rel(row.expectation_n, cf));
    }
    ok &= cf_worst <= IR_CLOSED_FORM_TOL;
    // Fit <N> = a + b ln(1/sigma).
    let x: Vec<f64> = sigmas.iter().map(|s| (1.0 / s).ln()).collect();
    let y: Vec<f64> = singular.rows.iter().map(|r| r.expectation_n).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let (b, r2) = (sxy / sxx, sxy * sxy / (sxx * syy));
    ok &= b > 0.0 && r2 >= IR_R2_MIN && singular.verdict == IrVerdict::Diverging;

    let regular = suite_sweep(run, "ir_sweep_regular")?;
    let y: Vec<f64> = regular.rows.iter().map(|r| r.expectation_n).collect();
    let inc: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let last_n = *y.last().ok_or("empty sweep")?;
    let final_inc = *inc.last().ok_or("one row")?;
    ok &= regular.rows.len() == 4
        && inc.windows(2).all(|w| w[1] < w[0])
        && final_inc <= IR_CAUCHY_TOL * last_n
        && regular.verdict == IrVerdict::Converging;
    let reg_alpha = load("ir_sweep_regular")?.alpha;
    for row in &regular.rows {
        let cf = reg_alpha * reg_alpha * discrete_norm(row.sigma, row.n_shells, 1.0) / 2.0;
        ok &= rel(row.expectation_n, cf) <= IR_CLOSED_FORM_TOL;
    }
    ok &= run.ir_elapsed <= IR_RUNTIME;
    Ok((
        ok,
        format!(
            "p=0: b={b:.3e} R^2={r2:.6} closed form rel {cf_worst:.2e} <= {IR_CLOSED_FORM_TOL:e}; \
             p=1: final increment {final_inc:.2e} <= {IR_CAUCHY_TOL:e} * {last_n:.3e}, decreasing; sweeps took {:.1}s",
            run.ir_elapsed.as_secs_f64()
        ),
    ))
}

// 9. Determinism of report.csv.
fn criterion_9(a: &SuiteRun, b: &SuiteRun) -> Res<(bool, String)> {
    let mut same = 0;
    for name in BUNDLED {
        let x = fs::read(a.dir.join(name).join("report.csv"))?;
        let y = fs::read(b.dir.join(name).join("report.csv"))?;
        if x == y && !x.is_empty() {
            same += 1;
        }
    }
    Ok((same == BUNDLED.len(), format!("{same}/{} bundled report.csv files byte-identical", BUNDLED.len())))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let runs = run_suite(tmp.path(), "first").and_then(|a| Ok((a, run_suite(tmp.path(), "second")?)));

    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Res<(bool, String)> + 'a>);
    let needs_runs = |f: fn(&SuiteRun) -> Res<(bool, String)>| {
        let runs = &runs;
        move || match runs {
            Ok((a, _)) => f(a),
            Err(e) => Err(format!("bundled suite failed: {e}").into()),
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("van Hove oracle", Box::new(criterion_1)),
        ("pull-through identity", Box::new(criterion_2)),
        ("moment identity", Box::new(criterion_3)),
        ("absence inequality", Box::new(needs_runs(criterion_4))),
        ("higher factorial moments", Box::new(criterion_5)),
        ("appendix exactness", Box::new(criterion_6)),
        ("CCR and bounds", Box::new(criterion_7)),
        ("infrared dichotomy", Box::new(needs_runs(criterion_8))),
        (
            "determinism",
            Box::new(|| match &runs {
                Ok((a, b)) => criterion_9(a, b),
                Err(e) => Err(format!("bundled suite failed: {e}").into()),
            }),
        ),
    ];

    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!(
            "acceptance {} [{}] {name}: {detail} ({:.1}s)",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
