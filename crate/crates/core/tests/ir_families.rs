use gsb_core::model::MatterPreset;
use gsb_core::modes::{ir_class, CouplingFamily, Envelope, IrClass};
use gsb_core::regularity::{ir_sweep, IrVerdict, ModelTemplate, SweepOptions};
use gsb_core::spectral::SolverConfig;

fn hard(p: f64) -> CouplingFamily {
    CouplingFamily {
        rho0: 1.0,
        p,
        uv: 1.0,
        profile: Envelope::HardCutoff,
    }
}

/// `|lambda/omega|^2` on `[sigma, 1]` for `rho = r^p`, `omega = r`, in the
/// continuum: `S_nu int r^(nu - 1) r^(2p - 3) dr`.
fn continuum_norm(nu: u32, p: f64, sigma: f64) -> f64 {
    let s = if nu == 1 { 2.0 } else { 4.0 * std::f64::consts::PI };
    let e = nu as f64 + 2.0 * p - 3.0;
    if e == 0.0 {
        s * (1.0 / sigma).ln()
    } else {
        s * (1.0 - sigma.powf(e)) / e
    }
}

#[test]
fn verdicts_match_the_analytic_class_for_all_bundled_families() {
    let cfg = SolverConfig::default();
    let sigmas = [1e-1, 1e-2, 1e-3];
    for (nu, p, alpha, expected) in [
        (3, 0.0, 0.003, IrClass::Singular),
        (3, 1.0, 0.01, IrClass::Regular),
        (1, 0.0, 1e-4, IrClass::Singular),
        (1, 1.0, 0.003, IrClass::Singular),
    ] {
        assert_eq!(ir_class(nu, p), expected);
        let template = ModelTemplate::new(MatterPreset::VanHove, nu, 1.0, 3);
        let sweep = ir_sweep(&hard(p), &template, &sigmas, 8, alpha, &cfg, &SweepOptions::default()).unwrap();
        assert_eq!(sweep.expected, expected, "nu={nu} p={p}");
        let verdict = match expected {
            IrClass::Singular => IrVerdict::Diverging,
            IrClass::Regular => IrVerdict::Converging,
        };
        assert_eq!(sweep.verdict, verdict, "nu={nu} p={p}: {:?}", sweep.fit);
        assert!(sweep.agrees);
        for row in &sweep.rows {
            let exact = continuum_norm(nu, p, row.sigma);
            assert!(
                (row.lam_over_w_norm - exact).abs() < 0.02 * exact,
                "nu={nu} p={p} sigma={}: {} vs {exact}",
                row.sigma,
                row.lam_over_w_norm
            );
            let n = row.expectation_n;
            assert!(n >= row.absence_bound - 1e-9 * n.max(1.0), "nu={nu} p={p} {row:?}");
            assert!((n - alpha * alpha * row.lam_over_w_norm / 2.0).abs() <= 1e-6 * n);
        }
    }
}

#[test]
fn spin_boson_sweep_bound_diverges_with_the_number() {
    let cfg = SolverConfig::default();
    let template = ModelTemplate::new(MatterPreset::SpinBoson2Level { delta: 1.0, bias: 0.4 }, 3, 1.0, 3);
    let family = CouplingFamily { rho0: 0.2, ..hard(0.0) };
    let sweep = ir_sweep(&family, &template, &[1e-1, 1e-2, 1e-3], 4, 0.1, &cfg, &SweepOptions::default()).unwrap();
    assert!(sweep.rows.iter().all(|r| r.closed_form_n.is_none()));
    for w in sweep.rows.windows(2) {
        assert!(w[1].absence_bound > w[0].absence_bound);
        assert!(w[1].expectation_n > w[0].expectation_n);
    }
    for r in &sweep.rows {
        assert!(r.expectation_n >= r.absence_bound - 1e-9);
    }
    assert_eq!(sweep.verdict, IrVerdict::Diverging);
}
