//! One line per acceptance criterion, then a single assertion over all of them.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use blowup_lab::audit::{run_audit, Verdict};
use blowup_lab::closedform::{ClosedFormSolution, Family};
use blowup_lab::evolution::{
    evolve, fit_blowup_rate, write_diagnostics_csv, write_snapshot_csv, BoundaryTreatment,
    Equation, EvolutionConfig, EvolutionRun, EvolutionState,
};
use blowup_lab::numerics::Grid1D;
use blowup_lab::profile::{
    branch_values, first_order_branch_residual, profile_residual, profile_residual_grouped,
    shoot_profile, BranchSign, ProfileState, ShootOptions,
};
use blowup_lab::residual::{residual_at, sweep_residual, EquationId, Sampler};
use blowup_lab::similarity::{steady_ode_integrate, SteadyOde};
use blowup_lab::stability::{
    bump_direction, directional_linearization_check, linearized_coefficients, solve_mode_quadratic,
    ModeClass,
};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exact_data_run(lo: f64, n: usize, t_end: f64) -> (EvolutionRun, ClosedFormSolution) {
    let sol = ClosedFormSolution::born_infeld(0.2, 1.0).unwrap();
    let grid = Grid1D::new(lo, 0.5, n).unwrap();
    let mut cfg = EvolutionConfig::new(Equation::BornInfeld, t_end);
    cfg.dissipation = 0.0;
    cfg.boundary = BoundaryTreatment::ExactData { solution: sol };
    let run = evolve(
        EvolutionState::from_closed_form(&sol, grid, 0.0).unwrap(),
        &cfg,
    )
    .unwrap();
    (run, sol)
}

fn c1_born_infeld_solution() -> Check {
    let sampler = Sampler::Lightcone {
        n_time: 100,
        n_space: 100,
        margin: 0.02,
    };
    let mut worst: f64 = 0.0;
    for k in [0.2, 1.0, -3.0] {
        let sol = ClosedFormSolution::born_infeld(k, 1.0).unwrap();
        let r = sweep_residual(EquationId::BornInfeld, &sol, &sampler).unwrap();
        assert_eq!(r.n_points, 10_000);
        worst = worst.max(r.max_abs);
    }
    ensure(
        worst <= 1e-9,
        format!("max |residual| {worst:.3e} (<= 1e-9), k in {{0.2, 1, -3}}"),
    )
}

fn c2_membrane_solution() -> Check {
    let sampler = Sampler::Similarity {
        n_time: 100,
        n_rho: 100,
        t_lo: 0.0,
        t_hi: 0.98,
        rho_lo: 0.0,
        rho_hi: 0.95,
    };
    let (mut res, mut eik): (f64, f64) = (0.0, 0.0);
    for plus in [true, false] {
        let sol = ClosedFormSolution::sphere(plus, 1.0).unwrap();
        res = res.max(
            sweep_residual(EquationId::RadialMembrane, &sol, &sampler)
                .unwrap()
                .max_abs,
        );
        eik = eik.max(
            sweep_residual(EquationId::Eikonal, &sol, &sampler)
                .unwrap()
                .max_abs,
        );
    }
    ensure(
        res <= 1e-9 && eik <= 1e-12,
        format!("max |residual| {res:.3e} (<= 1e-9), max |eikonal| {eik:.3e} (<= 1e-12)"),
    )
}

fn c3_spacelike() -> Check {
    let claimed = ClosedFormSolution::new(Family::SpacelikeLogClaimed, 1.0, 1.0).unwrap();
    let p = (0.0, 0.5);
    let r = residual_at(
        EquationId::SpacelikeZmc,
        &claimed.evaluate_jet(p).unwrap(),
        p,
    )
    .unwrap();
    let corrected = ClosedFormSolution::new(Family::SpacelikeArctanCorrected, 1.0, 1.0).unwrap();
    let square = Sampler::Rectangle {
        a_lo: 0.0,
        a_hi: 0.5,
        b_lo: 0.0,
        b_hi: 0.5,
        n_a: 100,
        n_b: 100,
    };
    let fixed = sweep_residual(EquationId::SpacelikeZmc, &corrected, &square)
        .unwrap()
        .max_abs;
    ensure(
        (r - 0.4472136).abs() <= 1e-6 && fixed <= 1e-9,
        format!(
            "log residual {r:.7} (0.4472136 +- 1e-6), arctan max |residual| {fixed:.3e} (<= 1e-9)"
        ),
    )
}

fn c4_steady_odes() -> Check {
    let k = 1.0;
    let bi = steady_ode_integrate(SteadyOde::BornInfeld, (0.0, 2.0 * k), 0.0, 0.9, 1e-3).unwrap();
    let bi_err = bi
        .rho
        .iter()
        .zip(&bi.v)
        .map(|(r, v)| (v - k * ((1.0 + r) / (1.0 - r)).ln()).abs())
        .fold(0.0, f64::max);
    let sl = steady_ode_integrate(SteadyOde::Spacelike, (0.0, k), 0.0, 2.0, 1e-3).unwrap();
    let atan_err = sl
        .rho
        .iter()
        .zip(&sl.v)
        .map(|(r, v)| (v - k * r.atan()).abs())
        .fold(0.0, f64::max);
    let gap = (sl.v.last().unwrap() - k * 2f64.asinh()).abs();
    ensure(
        bi_err <= 1e-8 && atan_err <= 1e-8 && gap >= 0.09 * k,
        format!(
            "Born-Infeld sup error {bi_err:.3e}, arctan sup error {atan_err:.3e} (<= 1e-8), \
             |v(2) - k asinh 2| = {gap:.4} (>= 0.09k)"
        ),
    )
}

fn c5_modes() -> Check {
    let m = solve_mode_quadratic();
    let classes = [m.classification[0].class, m.classification[1].class];
    let audit = run_audit().unwrap();
    let claim = audit.claim("6").unwrap();
    ensure(
        m.roots == [1.0, -4.0]
            && classes == [ModeClass::Unstable, ModeClass::Stable]
            && claim.verdict == Verdict::Mismatch
            && claim.findings.iter().any(|f| f.verdict == Verdict::QualitativeMatch),
        format!(
            "roots {:?}, classes {:?}, audit verdict {:?} with qualitative match on one unstable mode",
            m.roots, classes, claim.verdict
        ),
    )
}

fn c6_degeneracy_identities() -> Check {
    let mut coeff: f64 = 0.0;
    let mut first: f64 = 0.0;
    for i in 1..=1000 {
        let rho = i as f64 / 1001.0;
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            let (f, g, h) = branch_values(sign, rho);
            let c = linearized_coefficients(f, g, h, rho).unwrap();
            coeff = coeff.max(c.v_rhorho.abs()).max(c.v_taurho.abs());
            first = first.max(first_order_branch_residual(rho, f, g).abs());
        }
    }
    let mut rng = StdRng::seed_from_u64(20_260_101);
    let mut grouping: f64 = 0.0;
    for _ in 0..10_000 {
        let s = ProfileState {
            rho: rng.random_range(-1.5..1.5),
            phi: rng.random_range(-1.5..1.5),
            dphi: rng.random_range(-1.5..1.5),
        };
        let d2 = rng.random_range(-3.0..3.0);
        grouping = grouping.max((profile_residual(s, d2) - profile_residual_grouped(s, d2)).abs());
    }
    ensure(
        coeff <= 1e-12 && grouping <= 1e-12 && first <= 1e-12,
        format!(
            "branch v_rhorho/v_taurho {coeff:.3e}, grouping identity {grouping:.3e} over 1e4 inputs, \
             first-order branch residual {first:.3e} (all <= 1e-12)"
        ),
    )
}

fn c7_self_consistency() -> Check {
    let start = Instant::now();
    let errs: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| {
            let (run, sol) = exact_data_run(-0.5, n, 0.8);
            assert!((run.final_state.t - 0.8).abs() < 1e-12);
            run.error_against(&sol).unwrap()
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let o1 = (errs[0] / errs[1]).log2();
    let o2 = (errs[1] / errs[2]).log2();
    ensure(
        errs[1] <= 5e-4 && (o1 - 2.0).abs() <= 0.3 && (o2 - 2.0).abs() <= 0.3 && secs <= 60.0,
        format!(
            "boundary: exact edge data on the shrinking cone; sup errors {:.3e}/{:.3e}/{:.3e} at n=200/400/800, \
             orders {o1:.2}/{o2:.2}, {secs:.1} s",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn c8_blowup_rate() -> Check {
    let (run, _) = exact_data_run(-0.5, 800, 0.95);
    let (ts, gs) = run.origin_series();
    let fit = fit_blowup_rate(&ts, &gs, 1.0, (0.5, 0.95)).unwrap();
    ensure(
        (fit.fitted_exponent - 1.0).abs() <= 0.05 && (fit.fitted_amplitude - 0.4).abs() <= 0.02,
        format!(
            "boundary: exact edge data; exponent {:.4} (1 +- 0.05), amplitude {:.4} (0.40 +- 0.02, = 2k)",
            fit.fitted_exponent, fit.fitted_amplitude
        ),
    )
}

fn c9_conservation() -> Check {
    let (sym, _) = exact_data_run(-0.5, 400, 0.8);
    let sym_drift = sym.momentum_drift().unwrap();
    let (asym, _) = exact_data_run(-0.3, 800, 0.8);
    let drift = asym.momentum_drift().unwrap();
    ensure(
        sym_drift <= 1e-4 && drift <= 1e-4,
        format!(
            "boundary: exact edge data, flux-corrected; drift {sym_drift:.2e} on the symmetric run \
             (momentum 0 by parity), {drift:.2e} on asymmetric [-0.3, 0.5] at n=800 (<= 1e-4)"
        ),
    )
}

fn c10_linearisation() -> Check {
    let rhos: Vec<f64> = (1..=17).map(|i| 0.05 * i as f64).collect();
    let zero = |_: f64| (0.0, 0.0, 0.0);
    let bump = bump_direction(0.1, 0.9, 1.0);
    let z = directional_linearization_check(&zero, &bump, 1e-6, &rhos).unwrap();
    let audit = run_audit().unwrap();
    let branch = audit
        .measurements
        .iter()
        .find(|m| m.name == "linearisation_mismatch_branch_growing_direction")
        .and_then(|m| m.value);
    ensure(
        z.max_relative_mismatch <= 1e-5 && branch.is_some(),
        format!(
            "zero profile mismatch {:.3e} (<= 1e-5); branch profile mismatch {:.3e} reported in the audit",
            z.max_relative_mismatch,
            branch.unwrap_or(f64::NAN)
        ),
    )
}

fn csv_is_rectangular(text: &str) -> bool {
    let mut lines = text.lines();
    let Some(header) = lines.next() else {
        return false;
    };
    let cols = header.split(',').count();
    lines.all(|l| l.split(',').count() == cols)
}

fn c11_determinism_and_interfaces() -> Check {
    let a = run_audit().unwrap().to_json();
    let b = run_audit().unwrap().to_json();
    let identical = a == b && !a.contains("NaN");

    let mut csvs = Vec::new();
    let (run, _) = exact_data_run(-0.5, 100, 0.3);
    let mut buf = Vec::new();
    write_diagnostics_csv(&run.diagnostics, &mut buf).unwrap();
    csvs.push(String::from_utf8(buf).unwrap());
    let mut buf = Vec::new();
    write_snapshot_csv(
        &blowup_lab::evolution::Snapshot::of(&run.final_state),
        &mut buf,
    )
    .unwrap();
    csvs.push(String::from_utf8(buf).unwrap());
    let prof = shoot_profile(
        0.5,
        0.8,
        ShootOptions {
            drho: 1e-3,
            tolerance: 1e-10,
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    prof.write_csv(&mut buf).unwrap();
    csvs.push(String::from_utf8(buf).unwrap());
    let steady = steady_ode_integrate(SteadyOde::Spacelike, (0.0, 1.0), 0.0, 2.0, 1e-2).unwrap();
    let mut buf = Vec::new();
    steady.write_csv(1.0, &mut buf).unwrap();
    csvs.push(String::from_utf8(buf).unwrap());
    let rectangular = csvs.iter().all(|c| csv_is_rectangular(c));

    let bin = env!("CARGO_BIN_EXE_blowup-lab");
    let tmp = tempfile::tempdir().unwrap();
    let no_eq = tmp.path().join("no_equation.conf");
    std::fs::write(&no_eq, "k=0.2\n").unwrap();
    let bad_line = tmp.path().join("bad_line.conf");
    std::fs::write(&bad_line, "equation=born-infeld\nn: 3\n").unwrap();
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    let misuse = [
        code(&["verify", "--equation", "born-infeld", "--family", "sphere"]),
        code(&["evolve", no_eq.to_str().unwrap()]),
        code(&["evolve", bad_line.to_str().unwrap()]),
    ];
    let contract = misuse.iter().all(|c| *c == Some(2));
    ensure(
        identical && rectangular && contract,
        format!(
            "audit byte-identical: {identical}; {} CSVs rectangular: {rectangular}; misuse exit codes {misuse:?}",
            csvs.len()
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("Born-Infeld explicit solution", c1_born_infeld_solution),
        ("membrane explicit solutions", c2_membrane_solution),
        ("spacelike audit", c3_spacelike),
        ("steady ODE reproduction", c4_steady_odes),
        ("mode analysis", c5_modes),
        ("degeneracy identities", c6_degeneracy_identities),
        ("evolution self-consistency", c7_self_consistency),
        ("blow-up rate", c8_blowup_rate),
        ("conservation", c9_conservation),
        ("linearisation consistency", c10_linearisation),
        ("determinism and interfaces", c11_determinism_and_interfaces),
    ];
    let mut out = std::io::stdout().lock();
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let verdict = if outcome.is_ok() { "PASS" } else { "FAIL" };
        let detail = outcome.clone().unwrap_or_else(|d| d);
        writeln!(out, "criterion {:>2} {verdict}  {name}: {detail}", i + 1).unwrap();
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    out.flush().unwrap();
    drop(out);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
