//! Verification suites behind `verify`: one check per module invariant.
//!
//! Every check has a fixed id of the form `<module>.<invariant>` and a
//! tolerance that is multiplied by the caller's `tol_scale`.

use crate::error::{Error, Result};
use crate::extension as ext;
use crate::field::{fourier, GridSpec, ScalarField, SpaceTimeFunction, TestFunction};
use crate::fracops::{self as fo, FracOrder};
use crate::heatsg::{self as hs, Method};
use crate::quad::{integrate_halfline, integrate_interval, QuadSpec};
use crate::report::{timed, CheckReport};
use crate::specfun::{self as sf, BesselKind};
use std::f64::consts::PI;

pub const SUITES: [&str; 6] = ["specfun", "quad", "field", "heatsg", "fracops", "extension"];

/// Runs one suite by name, or all of them for `all`.
pub fn run_suite(name: &str, tol_scale: f64) -> Result<Vec<CheckReport>> {
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(Error::Config(format!("tol-scale must be positive, got {tol_scale}")));
    }
    Ok(match name {
        "specfun" => specfun_suite(tol_scale),
        "quad" => quad_suite(tol_scale),
        "field" => field_suite(tol_scale),
        "heatsg" => heatsg_suite(tol_scale),
        "fracops" => fracops_suite(tol_scale),
        "extension" => extension_suite(tol_scale),
        "all" => {
            let mut v = Vec::new();
            for s in SUITES {
                v.extend(run_suite(s, tol_scale)?);
            }
            v
        }
        other => return Err(Error::Config(format!("unknown suite '{other}'"))),
    })
}

/// Points of the additive golden-ratio sequence in (0, 1).
fn golden_points(m: usize) -> Vec<f64> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    (1..=m).map(|j| (j as f64 * phi).fract()).filter(|z| *z > 1e-6 && *z < 1.0 - 1e-6).collect()
}

fn d1(f: impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
    (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
}

fn d2(f: impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
    (-f(z + 2.0 * h) + 16.0 * f(z + h) - 30.0 * f(z) + 16.0 * f(z - h) - f(z - 2.0 * h)) / (12.0 * h * h)
}

fn bes(kind: BesselKind, v: f64, z: f64) -> f64 {
    sf::bessel(kind, v, z).map(|b| b.re()).unwrap_or(f64::NAN)
}

fn zs(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
}

pub fn specfun_suite(tol_scale: f64) -> Vec<CheckReport> {
    let ts = tol_scale;
    let orders = [0.0, 0.5, 1.0, 2.5];
    let ode = |kind: BesselKind, sign: f64| -> Result<CheckReport> {
        let mut w = 0.0f64;
        for &v in &orders {
            for z in zs(0.5, 20.0, 80) {
                let f = |x: f64| bes(kind, v, x);
                let r = d2(&f, z, 2e-3) + d1(&f, z, 2e-3) / z + sign * (1.0 - sign * v * v / (z * z)) * f(z);
                w = w.max(r.abs() / f(z).abs().max(1.0));
            }
        }
        Ok(CheckReport::bound("", w, 1e-5 * ts))
    };
    vec![
        timed("specfun.reflection", || {
            let mut w = 0.0f64;
            for z in golden_points(200) {
                let r = sf::gamma_real(z) * sf::gamma_real(1.0 - z) * sf::sin_pi(z) / PI - 1.0;
                w = w.max(r.abs());
            }
            Ok(CheckReport::bound("", w, 1e-10 * ts))
        }),
        timed("specfun.duplication", || {
            let mut w = 0.0f64;
            for z in zs(0.05, 10.0, 200) {
                let l = 2f64.powf(2.0 * z - 1.0) * sf::gamma_real(z) * sf::gamma_real(z + 0.5);
                let r = PI.sqrt() * sf::gamma_real(2.0 * z);
                w = w.max((l / r - 1.0).abs());
            }
            Ok(CheckReport::bound("", w, 1e-10 * ts))
        }),
        timed("specfun.bessel_ode", || ode(BesselKind::J, 1.0)),
        timed("specfun.modified_ode", || {
            let a = ode(BesselKind::I, -1.0)?;
            let b = ode(BesselKind::K, -1.0)?;
            Ok(CheckReport::bound("", a.measured.max(b.measured), 1e-5 * ts))
        }),
        timed("specfun.j_recursion", || {
            let mut w = 0.0f64;
            for &v in &orders {
                for z in zs(0.5, 20.0, 60) {
                    let lhs = d1(|x| x.powf(-v) * bes(BesselKind::J, v, x), z, 1e-2);
                    let rhs = -z.powf(-v) * bes(BesselKind::J, v + 1.0, z);
                    w = w.max((lhs - rhs).abs() / rhs.abs().max(1.0));
                }
            }
            Ok(CheckReport::bound("", w, 1e-5 * ts))
        }),
        timed("specfun.k_symmetry", || {
            let mut w = 0.0f64;
            for &v in &[0.25, 0.5, 1.5, 2.5] {
                for z in [0.3, 1.0, 2.0, 4.0] {
                    let k = bes(BesselKind::K, v, z);
                    let km = bes(BesselKind::K, -v, z);
                    let series = sf::bessel_k_series(v, z);
                    w = w.max((k - km).abs() / k).max((k - series).abs() / k);
                }
            }
            Ok(CheckReport::bound("", w, 1e-10 * ts))
        }),
        timed("specfun.j_asymptotic", || {
            let mut w = 0.0f64;
            for &v in &orders {
                for z in zs(50.0, 200.0, 151) {
                    w = w.max(bes(BesselKind::J, v, z).abs() * z.sqrt());
                }
            }
            // √(2/π) bounds |J_v(z)|√z asymptotically
            Ok(CheckReport::bound("", w, 0.81 * ts))
        }),
        timed("specfun.hyp0f1_bridge", || {
            let mut w = 0.0f64;
            for &v in &orders {
                for z in [0.2, 1.0, 3.0, 8.0] {
                    let i = bes(BesselKind::I, v, z);
                    let b = (z / 2.0).powf(v) / sf::gamma_real(v + 1.0) * sf::hyp0f1(v + 1.0, z * z / 4.0)?.re();
                    w = w.max((i / b - 1.0).abs());
                }
            }
            Ok(CheckReport::bound("", w, 1e-10 * ts))
        }),
        timed("specfun.k_half_anchor", || {
            let expected = (PI / 2.0).sqrt() * (-1f64).exp();
            Ok(CheckReport::compare("", bes(BesselKind::K, 0.5, 1.0), expected, 1e-9 * ts, false))
        }),
    ]
}

pub fn quad_suite(tol_scale: f64) -> Vec<CheckReport> {
    let spec = QuadSpec::default();
    vec![
        timed("quad.closed_forms", || {
            let a = integrate_halfline(|t: f64| (-t).exp() * t.sqrt(), &spec)?;
            let b = integrate_interval(|t: f64| t.powf(-0.5), 0.0, 1.0, &spec)?;
            let err = (a.value - PI.sqrt() / 2.0).abs().max((b.value - 2.0).abs());
            Ok(CheckReport::bound("", err, 1e-12 * tol_scale))
        }),
        timed("quad.split_invariance", || {
            let f = |t: f64| t.powf(-0.75) * (-t).exp_m1().abs() * (-t * 0.3).exp();
            let mut vals = Vec::new();
            let mut est = 0.0f64;
            for sp in [0.5, 1.0, 2.0] {
                let r = integrate_halfline(f, &spec.with_split(sp))?;
                est = est.max(r.error_estimate);
                vals.push(r.value);
            }
            let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - vals[0]).abs()));
            Ok(CheckReport::bound("", spread, (2.0 * est).max(1e-13) * tol_scale))
        }),
    ]
}

pub fn field_suite(tol_scale: f64) -> Vec<CheckReport> {
    let g = GridSpec::new(2, 64, 6.0).expect("grid");
    let f = ScalarField::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp() * (1.0 + 0.3 * x[0]));
    vec![
        timed("field.plancherel", || {
            let hat = fourier(&f)?;
            let a = f.lp_norm(2.0);
            let b = hat.lp_norm(2.0);
            Ok(CheckReport::compare("", b, a, 1e-10 * tol_scale, true))
        }),
        timed("field.rotation", || {
            let r = ScalarField::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
            let swapped = |u: &ScalarField| -> ScalarField {
                let mut v = u.clone();
                for i in 0..g.len() {
                    let idx = g.multi_index(i);
                    v.samples[g.flat_index(&[idx[1], idx[0]])] = u.samples[i];
                }
                v
            };
            let a = fourier(&swapped(&r))?;
            let b = swapped(&fourier(&r)?);
            Ok(CheckReport::bound("", a.sub(&b)?.max_abs(), 1e-14 * tol_scale))
        }),
        timed("field.derivative_law", || {
            let mut errs = Vec::new();
            for &n in &[128usize, 256] {
                let gg = GridSpec::new(1, n, 6.0)?;
                let u = TestFunction::gaussian(1.0).sample(gg);
                let h = gg.spacing();
                let m = gg.len();
                let du = u.with_samples(
                    (0..m)
                        .map(|i| (u.samples[(i + 1) % m] - u.samples[(i + m - 1) % m]) / (2.0 * h))
                        .collect(),
                );
                let hat = fourier(&u)?;
                let dhat = fourier(&du)?;
                let mut e = 0.0f64;
                for i in 0..m {
                    let k = gg.freqs(i)[0];
                    let want = hat.samples[i] * num_complex::Complex64::new(0.0, 2.0 * PI * k);
                    if k.abs() < 1.0 {
                        e = e.max((dhat.samples[i] - want).norm());
                    }
                }
                errs.push(e);
            }
            let ratio = errs[0] / errs[1];
            Ok(CheckReport::compare("", ratio, 4.0, 0.5 * tol_scale, false))
        }),
    ]
}

pub fn heatsg_suite(tol_scale: f64) -> Vec<CheckReport> {
    let ts = tol_scale;
    let g = GridSpec::new(1, 256, 12.0).expect("grid");
    let gauss = TestFunction::gaussian(1.0).sample(g);
    let gt = GridSpec::new(1, 64, 8.0).expect("grid").with_time(64, 8.0).expect("grid");
    let st = SpaceTimeFunction {
        space: TestFunction::gaussian(1.0),
        time_c: 0.5,
    };
    vec![
        timed("heatsg.kernel_mass", || {
            let k = hs::sample_heat_kernel(g, 1.0)?;
            Ok(CheckReport::compare("", k.integral().re, 1.0, 1e-10 * ts, false))
        }),
        timed("heatsg.chapman_kolmogorov", || {
            let a = hs::sample_heat_kernel(g, 0.5)?;
            let b = hs::apply_pt(&a, 0.5, Method::Convolution)?;
            let c = hs::sample_heat_kernel(g, 1.0)?;
            Ok(CheckReport::bound("", b.sub(&c)?.max_abs(), 1e-8 * ts))
        }),
        timed("heatsg.methods_agree", || {
            let a = hs::apply_pt(&gauss, 0.5, Method::Spectral)?;
            let b = hs::apply_pt(&gauss, 0.5, Method::Convolution)?;
            Ok(CheckReport::bound("", a.sub(&b)?.max_abs(), 1e-8 * ts))
        }),
        timed("heatsg.small_time", || {
            let p = hs::apply_pt(&gauss, 1e-6, Method::Spectral)?;
            Ok(CheckReport::bound("", p.sub(&gauss)?.max_abs(), 1e-4 * ts))
        }),
        timed("heatsg.pth_semigroup", || {
            let f = st.sample(gt)?;
            let once = hs::apply_pth(&f, 0.6, Method::Spectral)?;
            let twice = hs::apply_pth(&hs::apply_pth(&f, 0.25, Method::Spectral)?, 0.35, Method::Spectral)?;
            Ok(CheckReport::bound("", once.sub(&twice)?.max_abs(), 1e-9 * ts))
        }),
        timed("heatsg.contraction", || {
            let mut worst = f64::NEG_INFINITY;
            for p in [1.0, 2.0, f64::INFINITY] {
                for t in [0.1, 1.0, 10.0] {
                    let out = hs::apply_pt(&gauss, t, Method::Spectral)?;
                    worst = worst.max(out.lp_norm(p) - gauss.lp_norm(p));
                }
            }
            Ok(CheckReport::bound("", worst.max(0.0), 1e-12 * ts))
        }),
        timed("heatsg.ultracontractivity", || {
            // peaked inputs approach the constant (4πt)^{−n/2}
            let mut ratio = 0.0f64;
            for c in [10.0, 100.0] {
                let f = TestFunction::gaussian(c).sample(g);
                for t in [0.2, 1.0] {
                    let p = hs::apply_pt(&f, t, Method::Spectral)?.max_abs();
                    ratio = ratio.max(p / ((4.0 * PI * t).powf(-0.5) * f.lp_norm(1.0)));
                }
            }
            let ok = ratio <= 1.0 + 1e-10 && ratio > 0.99;
            Ok(CheckReport::compare("", ratio, 1.0, 0.01 * ts, false).with_status(ok))
        }),
        timed("heatsg.weak_ultracontractivity", || {
            let f = st.sample(gt)?;
            let nt = 64;
            let nx = 64;
            let h = gt.spacing();
            let mut sup_l2 = 0.0f64;
            for j in 0..nt {
                let s: f64 = (0..nx).map(|i| f.samples[i * nt + j].norm_sqr()).sum();
                sup_l2 = sup_l2.max((s * h).sqrt());
            }
            let mut ratio = 0.0f64;
            for tau in [0.1, 0.5, 2.0] {
                let p = hs::apply_pth(&f, tau, Method::Spectral)?.max_abs();
                ratio = ratio.max(p / ((8.0 * PI * tau).powf(-0.25) * sup_l2));
            }
            Ok(CheckReport::compare("", ratio, 1.0, 0.0, false).with_status(ratio <= 1.0 + 1e-10))
        }),
        timed("heatsg.heat_equation_residual", || {
            let r1 = hs::heat_equation_residual(&[0.7, -0.2], 0.5, 1e-2)?.abs();
            let r2 = hs::heat_equation_residual(&[0.7, -0.2], 0.5, 5e-3)?.abs();
            let order = (r1 / r2).log2();
            Ok(CheckReport::compare("", order, 2.0, 0.3 * ts, false))
        }),
        timed("heatsg.commutation", || {
            let a = hs::laplacian(&hs::apply_pt(&gauss, 0.3, Method::Spectral)?)?;
            let b = hs::apply_pt(&hs::laplacian(&gauss)?, 0.3, Method::Spectral)?;
            Ok(CheckReport::bound("", a.sub(&b)?.max_abs(), 1e-8 * ts))
        }),
        timed("heatsg.rate_pt", || {
            let lap = hs::laplacian(&gauss)?;
            let mut worst = f64::NEG_INFINITY;
            for p in [1.0, 2.0, f64::INFINITY] {
                for t in [0.01, 0.1, 0.5, 1.0] {
                    let d = hs::apply_pt(&gauss, t, Method::Spectral)?.sub(&gauss)?.lp_norm(p);
                    worst = worst.max(d / (lap.lp_norm(p) * t));
                }
            }
            Ok(CheckReport::compare("", worst, 1.0, 0.0, false).with_status(worst <= 1.0 + 1e-10))
        }),
        timed("heatsg.rate_pth", || {
            let f = st.sample(gt)?;
            let hf = hs::heat_operator(&f)?;
            let mut worst = f64::NEG_INFINITY;
            for p in [1.0, 2.0, f64::INFINITY] {
                for tau in [0.01, 0.1, 0.5, 1.0] {
                    let d = hs::apply_pth(&f, tau, Method::Spectral)?.sub(&f)?.lp_norm(p);
                    worst = worst.max(d / (hf.lp_norm(p) * tau));
                }
            }
            Ok(CheckReport::compare("", worst, 1.0, 0.0, false).with_status(worst <= 1.0 + 1e-10))
        }),
        timed("heatsg.subordination_newtonian", || {
            let v = hs::subordination_newtonian(&[1.0, 0.0, 0.0])?;
            Ok(CheckReport::compare("", v, 1.0 / (4.0 * PI), 1e-8 * ts, true))
        }),
    ]
}

fn interior_rel(a: &ScalarField, b: &ScalarField) -> f64 {
    let g = b.grid;
    let keep = |i: usize| g.in_interior(i, 0.5);
    a.max_diff_where(b, keep) / b.max_abs_where(keep)
}

/// Bump e^{−1/(1−4|x|²)} supported in |x| < 1/2.
pub fn bump(grid: GridSpec) -> ScalarField {
    let n = grid.dim;
    ScalarField::from_real_fn(grid, |x| {
        let r2: f64 = x[..n].iter().map(|v| 4.0 * v * v).sum();
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

/// Slope of log|(−Δ)^s u| against log|x| along the first axis, |x| ∈ [3, 6],
/// and whether −(−Δ)^s u > 0 there.
pub fn decay_profile(n: usize, s: f64) -> Result<(Vec<(f64, f64)>, bool)> {
    let g = GridSpec::default_for(n)?;
    let f = fo::fraclap_pointwise_field(&bump(g), FracOrder::new(s)?)?;
    let mut pts = Vec::new();
    let mut negative = true;
    for i in 0..g.len() {
        let c = g.coords(i);
        if c[1..n].iter().any(|v| *v != 0.0) || !(c[0] >= 3.0 && c[0] <= 6.0) {
            continue;
        }
        let v = f.samples[i].re;
        negative &= v < 0.0;
        pts.push((c[0], v.abs()));
    }
    Ok((pts, negative))
}

pub fn fracops_suite(tol_scale: f64) -> Vec<CheckReport> {
    let ts = tol_scale;
    let mut out = vec![timed("fracops.gamma_oracle", || {
        let mut w = 0.0f64;
        for n in [1, 2] {
            for s in [0.25, 0.5, 0.75] {
                w = w.max((fo::gamma_ns_oracle(n, s)? / fo::gamma_ns(n, s)? - 1.0).abs());
            }
        }
        Ok(CheckReport::bound("", w, 1e-4 * ts))
    })];
    out.push(timed("fracops.triple_route", || {
        let mut w = 0.0f64;
        for n in [1, 2] {
            let g = GridSpec::default_for(n)?;
            let u = TestFunction::gaussian(PI).sample(g);
            for s in [0.25, 0.5, 0.75] {
                let o = FracOrder::new(s)?;
                let pad = fo::default_padding(n);
                let sp = fo::fraclap_spectral_padded(&u, s, pad)?;
                let pw = fo::fraclap_pointwise_field(&u, o)?;
                let ba = fo::fraclap_balakrishnan(&u, o, pad)?;
                w = w.max(interior_rel(&pw, &sp)).max(interior_rel(&ba, &sp)).max(interior_rel(&pw, &ba));
            }
        }
        Ok(CheckReport::bound("", w, 1e-3 * ts))
    }));
    out.push(timed("fracops.anchor", || {
        let g = GridSpec::default_for(1)?;
        let u = TestFunction::gaussian(PI).sample(g);
        let v = fo::fraclap_spectral_padded(&u, 0.5, fo::default_padding(1))?.at_origin().re;
        Ok(CheckReport::compare("", v, 2.0, 2e-3 * ts, false))
    }));
    out.push(timed("fracops.symmetry", || {
        let g = GridSpec::default_for(1)?;
        let u = TestFunction::gaussian(PI).sample(g);
        let v = ScalarField::from_real_fn(g, |x| (-(x[0] - 0.7) * (x[0] - 0.7) * 2.0).exp());
        let pad = fo::default_padding(1);
        let mut w = 0.0f64;
        for s in [0.25, 0.75] {
            let lu = fo::fraclap_spectral_padded(&u, s, pad)?;
            let lv = fo::fraclap_spectral_padded(&v, s, pad)?;
            let a: f64 = u.samples.iter().zip(&lv.samples).map(|(x, y)| x.re * y.re).sum();
            let b: f64 = lu.samples.iter().zip(&v.samples).map(|(x, y)| x.re * y.re).sum();
            w = w.max((a - b).abs() / a.abs());
        }
        Ok(CheckReport::bound("", w, 1e-8 * ts))
    }));
    out.push(timed("fracops.decay_exponent", || {
        let mut w = 0.0f64;
        let mut sign_ok = true;
        for n in [1usize, 2] {
            for s in [0.25, 0.5, 0.75] {
                let (pts, neg) = decay_profile(n, s)?;
                sign_ok &= neg;
                let slope = ext::loglog_slope(&pts);
                w = w.max((slope + n as f64 + 2.0 * s).abs());
            }
        }
        let r = CheckReport::bound("", w, 0.1 * ts);
        let ok = r.passed() && sign_ok;
        Ok(r.with_status(ok))
    }));
    out.push(timed("fracops.alpha_limit", || {
        let g = GridSpec::default_for(1)?;
        let u = TestFunction::gaussian(PI).sample(g);
        let lap = hs::laplacian(&u)?.scale(-1.0);
        let mut errs = Vec::new();
        for al in [1.9, 1.99, 1.999] {
            let f = fo::fraclap_spectral_padded(&u, al / 2.0, fo::default_padding(1))?;
            errs.push(f.sub(&lap)?.max_abs());
        }
        let mono = errs.windows(2).all(|w| w[1] < w[0]);
        let r = CheckReport::bound("", errs[2], 1e-2 * ts).with_note(format!("{errs:?}"));
        let ok = r.passed() && mono;
        Ok(r.with_status(ok))
    }));
    out.push(timed("fracops.riesz_coincidence", || {
        let g = GridSpec::default_for(1)?;
        let tf = TestFunction::gaussian(PI);
        let u = tf.sample(g);
        let mut w = 0.0f64;
        for s in [0.25, 0.5, 0.75] {
            let b = fo::fraclap_balakrishnan(&u, FracOrder::new(s)?, fo::default_padding(1))?;
            for j in [128usize, 133, 139] {
                let x = g.coords(j);
                let r = fo::riesz_singular_integral(&tf, 1, s, &x)?;
                w = w.max((b.samples[j].re - r).abs() / r.abs());
            }
        }
        Ok(CheckReport::bound("", w, 1e-3 * ts))
    }));
    out.push(timed("fracops.rotation", || {
        let g = GridSpec::new(2, 128, 8.0)?;
        let u = TestFunction::gaussian(PI).sample(g);
        let f = fo::fraclap_spectral_padded(&u, 0.5, fo::default_padding(2))?;
        let n = g.points_per_axis;
        let mut w = 0.0f64;
        for i in 0..g.len() {
            let idx = g.multi_index(i);
            // transpose and reflection x0 ↦ −x0 (index j ↦ N − j, j > 0)
            let t = g.flat_index(&[idx[1], idx[0]]);
            w = w.max((f.samples[i] - f.samples[t]).norm());
            if idx[0] > 0 {
                let r = g.flat_index(&[n - idx[0], idx[1]]);
                w = w.max((f.samples[i] - f.samples[r]).norm());
            }
        }
        Ok(CheckReport::bound("", w / f.max_abs(), 1e-12 * ts))
    }));
    out.push(timed("fracops.dilation", || {
        // u(2x) on (N, L) has the samples of u on (N, 2L)
        let s = 0.375;
        let g1 = GridSpec::new(1, 256, 6.0)?;
        let g2 = GridSpec::new(1, 256, 12.0)?;
        let tf = TestFunction::gaussian(1.0);
        let pad = fo::default_padding(1);
        let lhs = fo::fraclap_spectral_padded(&ScalarField::from_real_fn(g1, |x| tf.eval(&[2.0 * x[0]]).re), s, pad)?;
        let rhs = fo::fraclap_spectral_padded(&tf.sample(g2), s, pad)?.scale(4f64.powf(s));
        let w = lhs.with_samples(rhs.samples.clone()).sub(&lhs)?.max_abs() / lhs.max_abs();
        Ok(CheckReport::bound("", w, 1e-10 * ts))
    }));
    out.push(timed("fracops.fundamental_pairing", || {
        let g = GridSpec::new(3, 64, 4.0)?;
        let phi = TestFunction::gaussian(PI).sample(g);
        let w = fo::fraclap_spectral_padded(&phi, 0.5, fo::default_padding(3))?;
        Ok(CheckReport::compare("", fo::fundamental_pairing(&w, 0.5)?, 1.0, 0.02 * ts, true))
    }));
    out.push(timed("fracops.riesz_inverse", || {
        // (−Δ)^{α/2} I_α f = f in n = 2
        let g = GridSpec::new(2, 128, 8.0)?;
        let f = TestFunction::gaussian(PI).sample(g);
        let i = fo::riesz_potential(&f, 1.0)?;
        let back = fo::fraclap_spectral(&i, 0.5)?;
        Ok(CheckReport::bound("", interior_rel(&back, &f), 2e-2 * ts))
    }));
    out.push(timed("fracops.mean_value_laplacian", || {
        let g = GridSpec::new(1, 256, 6.0)?;
        let u = TestFunction::gaussian(PI).sample(g);
        let h = g.spacing();
        let radii: Vec<f64> = (2..8).map(|k| k as f64 * h).collect();
        let v = fo::laplacian_mean_value_estimate(&u, g.origin_index(), &radii)?;
        Ok(CheckReport::compare("", v, 2.0 * PI, 1e-3 * ts, true))
    }));
    out.push(timed("fracops.fracheat_multiplier", || {
        let g = GridSpec::new(1, 32, 4.0)?.with_time(32, 4.0)?;
        let f = SpaceTimeFunction {
            space: TestFunction::gaussian(1.0),
            time_c: 1.0,
        }
        .sample(g)?;
        let mut w = 0.0f64;
        for s in [0.5, 1.5] {
            let a = fo::fracheat(&f, FracOrder::new(s)?)?;
            let b = fo::fracheat_multiplier(&f, s)?;
            w = w.max(a.sub(&b)?.max_abs() / b.max_abs());
        }
        Ok(CheckReport::bound("", w, 1e-8 * ts))
    }));
    out
}

fn dtn_rel(d: &ScalarField, oracle: &ScalarField, interior: bool) -> f64 {
    if interior {
        interior_rel(d, oracle)
    } else {
        d.sub(oracle).map(|x| x.max_abs()).unwrap_or(f64::NAN) / oracle.max_abs()
    }
}

pub fn space_time_case() -> Result<(SpaceTimeFunction, ScalarField)> {
    let g = GridSpec::new(1, 32, 4.0)?.with_time(32, 4.0)?;
    let f = SpaceTimeFunction {
        space: TestFunction::gaussian(1.0),
        time_c: 1.0,
    };
    let field = f.sample(g)?;
    Ok((f, field))
}

pub fn extension_suite(tol_scale: f64) -> Vec<CheckReport> {
    let ts = tol_scale;
    let ladder = ext::default_ladder();
    let mut out = vec![timed("extension.kernel_masses", || {
        let mut w = 0.0f64;
        for s in [0.25, 0.5, 0.75] {
            w = w.max((ext::PoissonKernel::elliptic(1, s)?.mass(0.3)? - 1.0).abs());
            w = w.max((ext::PoissonKernel::parabolic(1, s)?.mass(0.3)? - 1.0).abs());
            w = w.max((ext::normalized_gaussian_mass(1, 1.0 - 2.0 * s, 0.4)? - 1.0).abs());
        }
        for s in [1.5, 2.5] {
            w = w.max((ext::PoissonKernel::higher(1, s)?.mass(0.5)? - 1.0).abs());
        }
        Ok(CheckReport::bound("", w, 1e-6 * ts))
    })];
    out.push(timed("extension.dtn_elliptic", || {
        let g = GridSpec::default_for(1)?;
        let u = TestFunction::gaussian(PI).sample(g);
        let mut w = 0.0f64;
        for s in [0.25, 0.5, 0.75] {
            let e = ext::solve_elliptic(&u, s, &ladder)?;
            let d = ext::dtn_elliptic(&e, s)?;
            let sp = fo::fraclap_spectral_padded(&u, s, fo::default_padding(1))?;
            w = w.max(dtn_rel(&d.value, &sp, true));
        }
        Ok(CheckReport::bound("", w, 1e-2 * ts))
    }));
    out.push(timed("extension.dtn_constant", || {
        let mut w = 0.0f64;
        for s in [0.25, 0.5, 0.75] {
            w = w.max((fo::dtn_const(s)? + fo::k_const(s)?).abs());
        }
        Ok(CheckReport::bound("", w, 1e-14 * ts))
    }));
    out.push(timed("extension.dtn_parabolic", || {
        let (_, f) = space_time_case()?;
        let s = 0.5;
        let d = ext::dtn_parabolic(&ext::solve_parabolic(&f, s, &ladder)?, s)?;
        Ok(CheckReport::bound("", dtn_rel(&d.value, &fo::fracheat_multiplier(&f, s)?, false), 2e-2 * ts))
    }));
    out.push(timed("extension.dtn_higher", || {
        let (_, f) = space_time_case()?;
        let s = 1.5;
        let d = ext::dtn_higher(&ext::solve_higher(&f, s, &ladder)?, &f)?;
        Ok(CheckReport::bound("", dtn_rel(&d.value, &fo::fracheat_multiplier(&f, s)?, false), 2e-2 * ts))
    }));
    out.push(timed("extension.k_anchor", || Ok(CheckReport::compare("", fo::k_const(1.5)?, 0.5, 1e-14 * ts, false))));
    out.push(timed("extension.trace_monotone", || {
        let g = GridSpec::default_for(1)?;
        let u = TestFunction::gaussian(PI).sample(g);
        let (_, f) = space_time_case()?;
        let mut ok = true;
        let mut last = 0.0;
        let e = ext::solve_elliptic(&u, 0.5, &ladder)?.trace_errors(&u, f64::INFINITY)?;
        let p = ext::solve_parabolic(&f, 0.5, &ladder)?.trace_errors(&f, 2.0)?;
        let h = ext::solve_higher(&f, 1.5, &ladder)?.trace_errors(&f, 2.0)?;
        for errs in [e, p, h] {
            ok &= errs.windows(2).all(|w| w[1] < w[0]);
            last = errs[errs.len() - 1];
        }
        Ok(CheckReport::flag("", ok).with_note(format!("final higher trace error {last:e}")))
    }));
    out.push(timed("extension.higher_parabolic_consistency", || {
        let (_, f) = space_time_case()?;
        let mut w = 0.0f64;
        for s in [0.25, 0.75] {
            let a = ext::solve_higher(&f, s, &ladder)?;
            let b = ext::solve_parabolic(&f, s, &ladder)?;
            for (x, y) in a.rungs.iter().zip(&b.rungs) {
                w = w.max(x.sub(y)?.max_abs());
            }
        }
        Ok(CheckReport::bound("", w, 1e-10 * ts))
    }));
    out.push(timed("extension.bd1_trace_slope", || {
        let (_, f) = space_time_case()?;
        let e = ext::solve_higher(&f, 1.5, &ladder)?;
        let errs = e.trace_errors(&f, 2.0)?;
        let pts: Vec<(f64, f64)> = ladder.iter().cloned().zip(errs).collect();
        Ok(CheckReport::compare("", ext::loglog_slope(&pts), 2.0, 0.2 * ts, false))
    }));
    out.push(timed("extension.bd2_odd_derivative", || {
        let (_, f) = space_time_case()?;
        let e = ext::solve_higher(&f, 1.5, &ladder)?;
        let slope = ext::loglog_slope(&ext::odd_derivative_norms(&e, 2.0)?);
        Ok(CheckReport::compare("", slope, 0.0, 0.0, false)
            .with_status(slope > 0.0)
            .with_note("observed decay exponent of ‖y^a∂_yU‖".into()))
    }));
    let o15 = FracOrder::new(1.5).expect("order");
    out.extend(ext::kernel_identity_suite(o15, &ext::default_probes(1), ts));
    out.push(timed("extension.elliptic_kernel_pde", || {
        let mut w = 0.0f64;
        for s in [0.25, 0.5, 0.75] {
            for (x, y) in [(0.4, 0.7), (-1.1, 0.3), (2.0, 1.5)] {
                w = w.max(ext::elliptic_kernel_residual(s, &[x], y, 0.02)?.relative());
            }
        }
        Ok(CheckReport::bound("", w, 1e-4 * ts))
    }));
    out.extend(ext::la_harmonicity_check(3, 0.5, &[(vec![1.0, 0.0, 0.0], 1.0), (vec![0.3, -0.5, 0.8], 0.6)], ts));
    out.extend(ext::la_harmonicity_check(2, 0.25, &[(vec![0.7, -0.4], 0.5), (vec![1.2, 0.3], 1.1)], ts));
    out.push(timed("extension.higher_pde_residual", || {
        let (f, _) = space_time_case()?;
        let mut w = 0.0f64;
        let mut shrinks = true;
        for p in ext::default_probes(1).iter().step_by(3) {
            let coarse = ext::higher_pde_residual(&f, o15, p, 0.08)?.relative();
            let fine = ext::higher_pde_residual(&f, o15, p, 0.04)?.relative();
            shrinks &= fine < coarse;
            w = w.max(fine);
        }
        let r = CheckReport::bound("", w, 1e-3 * ts);
        let ok = r.passed() && shrinks;
        Ok(r.with_status(ok))
    }));
    out.push(timed("extension.symbolic_coefficients", || {
        let k = ext::KernelCombination::kernel(2.5);
        let got: Vec<Vec<(u32, i32, i64)>> = [1, 3, 5]
            .iter()
            .map(|&k5| {
                ext::symbolic_y_derivative(&k, k5)
                    .terms
                    .iter()
                    .map(|t| (t.hpow, t.ypow, t.coef))
                    .collect()
            })
            .collect();
        let want = vec![
            vec![(1, 1, 1)],
            vec![(2, 1, 3), (3, 3, 1)],
            vec![(3, 1, 15), (4, 3, 10), (5, 5, 1)],
        ];
        Ok(CheckReport::flag("", got == want))
    }));
    out.push(timed("extension.odd_derivative_vanishing", || {
        let d = ext::symbolic_y_derivative(&ext::KernelCombination::kernel(1.5), 1);
        let pts: Vec<(f64, f64)> = [0.1f64, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&y| (y, d.eval(&ext::Probe::new(vec![0.2], y, 0.5)).abs()))
            .collect();
        let slope = ext::loglog_slope(&pts);
        Ok(CheckReport::compare("", slope, 0.0, 0.0, false).with_status(slope > 0.0))
    }));
    out
}
