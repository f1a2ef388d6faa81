//! Acceptance criteria, one PASS/FAIL line each. Runs without the test
//! harness so the lines always show up in `cargo test` output.

use fraxion::extension as ext;
use fraxion::field::{GridSpec, ScalarField, SpaceTimeFunction, TestFunction};
use fraxion::fracops::{self as fo, FracOrder};
use fraxion::heatsg::{self as hs, Method};
use fraxion::report::CheckReport;
use fraxion::specfun::{self as sf, BesselKind};
use fraxion::suites::run_suite;
use fraxion::Result;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

const GAMMA_ORACLE_REL: f64 = 1e-4;
const GAMMA_ORACLE_SECS: u64 = 30;
const TRIPLE_REL: f64 = 1e-3;
const TRIPLE_SECS: u64 = 60;
const ANCHOR_ABS: f64 = 2e-3;
const ALPHA_LIMIT_ABS: f64 = 1e-2;
const PAIRING_REL: f64 = 2e-2;
const DTN_ELLIPTIC_REL: f64 = 1e-2;
const DTN_SPACE_TIME_REL: f64 = 2e-2;
const DTN_SPACE_TIME_SECS: u64 = 300;
const ANNIHILATION_REL: f64 = 1e-4;
const ANNIHILATION_SHRINK: f64 = 4.0;
const MASS_ABS: f64 = 1e-6;
const BD1_SLOPE: f64 = 2.0;
const BD1_TOL: f64 = 0.2;
const GAMMA_IDENTITY_ABS: f64 = 1e-10;
const BESSEL_ODE_ABS: f64 = 1e-5;
const K_HALF_ABS: f64 = 1e-9;
const CHAPMAN_ABS: f64 = 1e-8;
const PTH_SEMIGROUP_ABS: f64 = 1e-9;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { ok, detail })
}

fn interior_rel(a: &ScalarField, b: &ScalarField) -> f64 {
    let g = b.grid;
    let keep = |i: usize| g.in_interior(i, 0.5);
    a.max_diff_where(b, keep) / b.max_abs_where(keep)
}

fn full_rel(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    Ok(a.sub(b)?.max_abs() / b.max_abs())
}

fn gaussian_pi(n: usize) -> Result<ScalarField> {
    Ok(TestFunction::gaussian(PI).sample(GridSpec::default_for(n)?))
}

fn space_time() -> Result<(SpaceTimeFunction, ScalarField)> {
    let f = SpaceTimeFunction {
        space: TestFunction::gaussian(1.0),
        time_c: 1.0,
    };
    let field = f.sample(GridSpec::new(1, 32, 4.0)?.with_time(32, 4.0)?)?;
    Ok((f, field))
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn constant_oracle() -> Result<Outcome> {
    let t = Instant::now();
    let mut w = 0.0f64;
    for n in [1, 2] {
        for s in [0.25, 0.5, 0.75] {
            w = w.max((fo::gamma_ns_oracle(n, s)? / fo::gamma_ns(n, s)? - 1.0).abs());
        }
    }
    let el = t.elapsed();
    outcome(w <= GAMMA_ORACLE_REL && within(el, GAMMA_ORACLE_SECS), format!("max rel {w:.3e}, {el:.2?}"))
}

fn triple_route() -> Result<Outcome> {
    let t = Instant::now();
    let mut w = 0.0f64;
    for n in [1, 2] {
        let u = gaussian_pi(n)?;
        let pad = fo::default_padding(n);
        for s in [0.25, 0.5, 0.75] {
            let o = FracOrder::new(s)?;
            let sp = fo::fraclap_spectral_padded(&u, s, pad)?;
            let pw = fo::fraclap_pointwise_field(&u, o)?;
            let ba = fo::fraclap_balakrishnan(&u, o, pad)?;
            w = w.max(interior_rel(&pw, &sp)).max(interior_rel(&ba, &sp)).max(interior_rel(&pw, &ba));
        }
    }
    let el = t.elapsed();
    outcome(w <= TRIPLE_REL && within(el, TRIPLE_SECS), format!("max interior rel {w:.3e}, {el:.2?}"))
}

fn anchor() -> Result<Outcome> {
    // ∫ 2π|ξ| e^{−πξ²} dξ = 2
    let u = gaussian_pi(1)?;
    let v = fo::fraclap_spectral_padded(&u, 0.5, fo::default_padding(1))?.at_origin().re;
    let err = (v - 2.0).abs();
    outcome(err <= ANCHOR_ABS, format!("value {v:.9}, error {err:.3e}"))
}

fn alpha_limit() -> Result<Outcome> {
    let u = gaussian_pi(1)?;
    let lap = hs::laplacian(&u)?.scale(-1.0);
    let mut errs = Vec::new();
    for al in [1.9, 1.99, 1.999] {
        let f = fo::fraclap_spectral_padded(&u, al / 2.0, fo::default_padding(1))?;
        errs.push(f.sub(&lap)?.max_abs());
    }
    let mono = errs.windows(2).all(|w| w[1] < w[0]);
    outcome(mono && errs[2] < ALPHA_LIMIT_ABS, format!("sup errors {:.3e} {:.3e} {:.3e}", errs[0], errs[1], errs[2]))
}

fn fundamental_pairing() -> Result<Outcome> {
    let g = GridSpec::new(3, 64, 4.0)?;
    let phi = TestFunction::gaussian(PI).sample(g);
    let w = fo::fraclap_spectral_padded(&phi, 0.5, fo::default_padding(3))?;
    let v = fo::fundamental_pairing(&w, 0.5)?;
    let expected = phi.at_origin().re;
    let rel = (v / expected - 1.0).abs();
    outcome(rel <= PAIRING_REL, format!("pairing {v:.6}, φ(0) = {expected}, rel {rel:.3e}"))
}

fn dtn_elliptic() -> Result<Outcome> {
    let u = gaussian_pi(1)?;
    let mut w = 0.0f64;
    for s in [0.25, 0.5, 0.75] {
        let e = ext::solve_elliptic(&u, s, &ext::default_ladder())?;
        let d = ext::dtn_elliptic(&e, s)?;
        let oracle = fo::fraclap_spectral_padded(&u, s, fo::default_padding(1))?;
        w = w.max(interior_rel(&d.value, &oracle));
    }
    outcome(w <= DTN_ELLIPTIC_REL, format!("max interior rel {w:.3e}"))
}

fn dtn_space_time() -> Result<Outcome> {
    let t = Instant::now();
    let (_, f) = space_time()?;
    let ladder = ext::default_ladder();
    // K(1.5) = −(−1)Γ(3/2)/Γ(1/2)·2^0/1! = 1/2
    let k_ok = (fo::k_const(1.5)? - 0.5).abs() < 1e-14;
    let par = ext::dtn_parabolic(&ext::solve_parabolic(&f, 0.5, &ladder)?, 0.5)?;
    let e_par = full_rel(&par.value, &fo::fracheat_multiplier(&f, 0.5)?)?;
    let mut e_hi = 0.0f64;
    for s in [0.5, 1.5] {
        let d = ext::dtn_higher(&ext::solve_higher(&f, s, &ladder)?, &f)?;
        e_hi = e_hi.max(full_rel(&d.value, &fo::fracheat_multiplier(&f, s)?)?);
    }
    let el = t.elapsed();
    let ok = k_ok && e_par <= DTN_SPACE_TIME_REL && e_hi <= DTN_SPACE_TIME_REL && within(el, DTN_SPACE_TIME_SECS);
    outcome(ok, format!("parabolic rel {e_par:.3e}, higher rel {e_hi:.3e}, K(1.5) ok = {k_ok}, {el:.2?}"))
}

fn kernel_annihilation() -> Result<Outcome> {
    let order = FracOrder::new(1.5)?;
    let probes = ext::default_probes(1);
    let h = 0.04;
    let worst = |h: f64| -> Result<f64> {
        let mut w = 0.0f64;
        for p in &probes {
            w = w.max(ext::identity_v(order, p, h)?.relative());
        }
        Ok(w)
    };
    let fine = worst(h)?;
    let coarse = worst(2.0 * h)?;
    let shrink = coarse / fine;
    outcome(
        probes.len() == 10 && fine <= ANNIHILATION_REL && shrink >= ANNIHILATION_SHRINK,
        format!("{} probes, residual {fine:.3e}, shrink {shrink:.2}", probes.len()),
    )
}

fn unit_masses() -> Result<Outcome> {
    let mut w = 0.0f64;
    for n in [1, 2] {
        for s in [0.25, 0.5, 0.75] {
            w = w.max((ext::PoissonKernel::elliptic(n, s)?.mass(0.3)? - 1.0).abs());
            w = w.max((ext::PoissonKernel::parabolic(n, s)?.mass(0.3)? - 1.0).abs());
            w = w.max((ext::normalized_gaussian_mass(n, 1.0 - 2.0 * s, 0.4)? - 1.0).abs());
        }
        for s in [1.5, 2.5] {
            w = w.max((ext::PoissonKernel::higher(n, s)?.mass(0.5)? - 1.0).abs());
        }
    }
    outcome(w <= MASS_ABS, format!("max |mass − 1| {w:.3e}"))
}

fn boundary_behavior() -> Result<Outcome> {
    let (_, f) = space_time()?;
    let ladder = ext::default_ladder();
    let e = ext::solve_higher(&f, 1.5, &ladder)?;
    let errs = e.trace_errors(&f, 2.0)?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let pts: Vec<(f64, f64)> = ladder.iter().cloned().zip(errs).collect();
    let slope = ext::loglog_slope(&pts);
    let odd = ext::odd_derivative_norms(&e, 2.0)?;
    let decay = ext::loglog_slope(&odd);
    let shrinking = odd.last().map(|l| l.1) < odd.first().map(|f| f.1);
    let ok = decreasing && (slope - BD1_SLOPE).abs() <= BD1_TOL && decay > 0.0 && shrinking;
    outcome(ok, format!("bd1 slope {slope:.4}, bd2 exponent {decay:.4}"))
}

fn special_functions() -> Result<Outcome> {
    let mut refl = 0.0f64;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for j in 1..200 {
        let z = (j as f64 * phi).fract();
        refl = refl.max((sf::gamma_real(z) * sf::gamma_real(1.0 - z) * sf::sin_pi(z) / PI - 1.0).abs());
    }
    let mut dup = 0.0f64;
    for j in 1..=200 {
        let z = 0.05 * j as f64;
        let l = 2f64.powf(2.0 * z - 1.0) * sf::gamma_real(z) * sf::gamma_real(z + 0.5);
        dup = dup.max((l / (PI.sqrt() * sf::gamma_real(2.0 * z)) - 1.0).abs());
    }
    // K_{1/2}(z) = √(π/(2z)) e^{−z}
    let k = sf::bessel(BesselKind::K, 0.5, 1.0)?.re();
    let k_err = (k - 0.4610685044478946).abs();
    let suite = run_suite("specfun", 1.0)?;
    let ode = |id: &str| -> Option<&CheckReport> { suite.iter().find(|c| c.check_id == id) };
    let mut ode_ok = true;
    let mut ode_worst = 0.0f64;
    for id in ["specfun.bessel_ode", "specfun.modified_ode"] {
        match ode(id) {
            Some(c) => {
                ode_ok &= c.passed() && c.tolerance == BESSEL_ODE_ABS;
                ode_worst = ode_worst.max(c.measured);
            }
            None => ode_ok = false,
        }
    }
    let ok = refl <= GAMMA_IDENTITY_ABS && dup <= GAMMA_IDENTITY_ABS && k_err <= K_HALF_ABS && ode_ok;
    outcome(
        ok,
        format!("reflection {refl:.2e}, duplication {dup:.2e}, ODE {ode_worst:.2e}, K_1/2(1) error {k_err:.2e}"),
    )
}

fn semigroup_structure() -> Result<Outcome> {
    let g = GridSpec::new(1, 256, 12.0)?;
    let a = hs::sample_heat_kernel(g, 0.5)?;
    let ck = hs::apply_pt(&a, 0.5, Method::Convolution)?.sub(&hs::sample_heat_kernel(g, 1.0)?)?.max_abs();

    let gt = GridSpec::new(1, 64, 8.0)?.with_time(64, 8.0)?;
    let f = SpaceTimeFunction {
        space: TestFunction::gaussian(1.0),
        time_c: 0.5,
    }
    .sample(gt)?;
    let once = hs::apply_pth(&f, 0.6, Method::Spectral)?;
    let twice = hs::apply_pth(&hs::apply_pth(&f, 0.25, Method::Spectral)?, 0.35, Method::Spectral)?;
    let sg = once.sub(&twice)?.max_abs();

    let mut contraction = true;
    let mut ultra = true;
    for n in [1usize, 2] {
        let g = GridSpec::new(n, if n == 1 { 256 } else { 128 }, 8.0)?;
        let u = TestFunction::gaussian(1.0).sample(g);
        let peaked = TestFunction::gaussian(50.0).sample(g);
        for t in [0.2, 1.0, 5.0] {
            let pu = hs::apply_pt(&u, t, Method::Spectral)?;
            for p in [1.0, 2.0, f64::INFINITY] {
                contraction &= pu.lp_norm(p) <= u.lp_norm(p) * (1.0 + 1e-12);
            }
            let c = (4.0 * PI).powf(-(n as f64) / 2.0);
            let bound = c * t.powf(-(n as f64) / 2.0) * peaked.lp_norm(1.0);
            let sup = hs::apply_pt(&peaked, t, Method::Spectral)?.max_abs();
            ultra &= sup <= bound * (1.0 + 1e-10) && sup >= 0.9 * bound;
        }
    }
    let ok = ck <= CHAPMAN_ABS && sg <= PTH_SEMIGROUP_ABS && contraction && ultra;
    outcome(
        ok,
        format!("Chapman-Kolmogorov {ck:.2e}, P^H law {sg:.2e}, contraction {contraction}, ultracontractivity {ultra}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("constant_oracle", constant_oracle),
        ("triple_route", triple_route),
        ("anchor_value", anchor),
        ("alpha_limit", alpha_limit),
        ("fundamental_pairing", fundamental_pairing),
        ("dtn_elliptic", dtn_elliptic),
        ("dtn_parabolic_higher", dtn_space_time),
        ("kernel_annihilation", kernel_annihilation),
        ("unit_masses", unit_masses),
        ("boundary_behavior", boundary_behavior),
        ("special_functions", special_functions),
        ("semigroup_structure", semigroup_structure),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let (ok, detail) = match run() {
            Ok(o) => (o.ok, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
