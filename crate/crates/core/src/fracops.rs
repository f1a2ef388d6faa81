//! Fractional powers of −Δ and of ∂_t − Δ.
//!
//! Routes for (−Δ)^s u:
//! - pointwise: the second-difference singular integral, summed over the
//!   whole lattice with a zeta-function correction for the singular cell;
//! - spectral: the multiplier (2π|ξ|)^{2s};
//! - Balakrishnan: −σ/Γ(1−σ)∫₀^∞ t^{−1−σ}(P_t v − v) dt with v = (−Δ)^k u.
//!
//! The spectral and Balakrishnan routes run on a zero-padded grid because
//! the outputs decay only like |x|^{−n−2s} and would otherwise wrap around.

use crate::error::{Error, Result};
use crate::field::{convolve, fourier, inverse_fourier, GridSpec, ScalarField, Space, TestFunction, Warning, C0};
use crate::heatsg::{expm1_c, heat_symbol, xi2};
use crate::quad::{integrate_interval, integrate_pv, integrate_tail, QuadSpec};
use crate::specfun::{bessel, epstein_zeta, gamma_real, BesselKind};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// s = k + σ with k = [s] the largest integer below s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    pub s: f64,
    pub k: u32,
    pub sigma: f64,
    /// Bessel parameter 1 − 2σ.
    pub a: f64,
    /// 2σ
    pub alpha: f64,
}

impl FracOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!("order must be positive and finite, got {s}")));
        }
        if s.fract() == 0.0 {
            return Err(Error::Domain(format!("order must be non-integer, got {s}")));
        }
        let k = s.floor();
        let sigma = s - k;
        Ok(FracOrder {
            s,
            k: k as u32,
            sigma,
            a: 1.0 - 2.0 * sigma,
            alpha: 2.0 * sigma,
        })
    }

    /// Set when σ is within 1e−3 of 0 or 1.
    pub fn conditioning(&self) -> Option<Warning> {
        if self.sigma < 1e-3 || self.sigma > 1.0 - 1e-3 {
            Some(Warning::Conditioning { sigma: self.sigma })
        } else {
            None
        }
    }
}

fn unit_order(s: f64, what: &str) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("{what} needs s in (0,1), got {s}")));
    }
    Ok(())
}

/// γ(n,s) = s·2^{2s}Γ((n+2s)/2)/(π^{n/2}Γ(1−s)).
pub fn gamma_ns(n: usize, s: f64) -> Result<f64> {
    unit_order(s, "gamma_ns")?;
    let nf = n as f64;
    Ok(s * 4f64.powf(s) * gamma_real((nf + 2.0 * s) / 2.0) / (PI.powf(nf / 2.0) * gamma_real(1.0 - s)))
}

/// α(n,s) = Γ(n/2−s)/(2^{2s}π^{n/2}Γ(s)), for 0 < s < n/2.
pub fn riesz_const(n: usize, s: f64) -> Result<f64> {
    let nf = n as f64;
    if !(s > 0.0 && s < nf / 2.0) {
        return Err(Error::Domain(format!("riesz constant needs 0 < s < n/2, got s={s}, n={n}")));
    }
    Ok(gamma_real(nf / 2.0 - s) / (4f64.powf(s) * PI.powf(nf / 2.0) * gamma_real(s)))
}

/// 2^{2s−1}Γ(s)/Γ(1−s).
pub fn dtn_const(s: f64) -> Result<f64> {
    unit_order(s, "dtn_const")?;
    Ok(2f64.powf(2.0 * s - 1.0) * gamma_real(s) / gamma_real(1.0 - s))
}

/// K(s) = −(−1)^{[s]}Γ(s)/Γ(1+[s]−s)·2^{2(s−[s])−1}/[s]!.
pub fn k_const(s: f64) -> Result<f64> {
    let o = FracOrder::new(s)?;
    let sign = if o.k % 2 == 0 { -1.0 } else { 1.0 };
    let fact = gamma_real(o.k as f64 + 1.0);
    Ok(sign * gamma_real(s) / gamma_real(1.0 - o.sigma) * 2f64.powf(2.0 * o.sigma - 1.0) / fact)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracConstants {
    pub n: usize,
    pub s: f64,
    pub gamma_ns: Option<f64>,
    pub riesz_const: Option<f64>,
    pub dtn_const: Option<f64>,
    pub k_s: f64,
}

impl FracConstants {
    pub fn new(n: usize, order: FracOrder) -> Self {
        FracConstants {
            n,
            s: order.s,
            gamma_ns: gamma_ns(n, order.s).ok(),
            riesz_const: riesz_const(n, order.s).ok(),
            dtn_const: dtn_const(order.s).ok(),
            k_s: k_const(order.s).expect("validated order"),
        }
    }
}

/// 1/∫(1−cos z_n)|z|^{−n−2s} dz by radial quadrature; the angular mean of
/// cos(r ω_n) is Γ(n/2)(2/r)^{n/2−1}J_{n/2−1}(r).
pub fn gamma_ns_oracle(n: usize, s: f64) -> Result<f64> {
    unit_order(s, "gamma_ns_oracle")?;
    if !(1..=3).contains(&n) {
        return Err(Error::Domain(format!("dimension {n} not in 1..=3")));
    }
    let nf = n as f64;
    let nu = nf / 2.0 - 1.0;
    let g = gamma_real(nf / 2.0);
    let sphere = 2.0 * PI.powf(nf / 2.0) / g;
    let mean_cos = |r: f64| -> Result<f64> {
        Ok(match n {
            1 => r.cos(),
            3 => r.sin() / r,
            _ => g * (2.0 / r).powf(nu) * bessel(BesselKind::J, nu, r)?.re(),
        })
    };
    let spec = QuadSpec::new(1e-15, 1e-12, 10, 1.0)?;
    // 1 − mean_cos ~ r²/(2n) near 0: use the series there to avoid cancellation
    let integrand = |r: f64| -> f64 {
        let one_minus = if r < 1e-3 {
            r * r / (2.0 * nf) - r.powi(4) / (8.0 * nf * (nf + 2.0))
        } else {
            1.0 - mean_cos(r).unwrap_or(f64::NAN)
        };
        r.powf(-1.0 - 2.0 * s) * one_minus
    };
    // panels of length π; the cos part of the tail is summed by repeated averaging
    let panels = 400;
    let mut partial = Vec::with_capacity(panels);
    let mut acc = 0.0;
    for j in 0..panels {
        let a = j as f64 * PI;
        let b = a + PI;
        acc += integrate_interval(integrand, a, b, &spec)?.value;
        partial.push(acc + b.powf(-2.0 * s) / (2.0 * s));
    }
    let mut tail: Vec<f64> = partial[panels - 24..].to_vec();
    while tail.len() > 1 {
        tail = tail.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    Ok(1.0 / (sphere * tail[0]))
}

fn check_physical(u: &ScalarField) -> Result<()> {
    if u.space != Space::Physical {
        return Err(Error::Shape("expected a physical field".into()));
    }
    Ok(())
}

fn push_warning(f: &mut ScalarField, w: Option<Warning>) {
    if let Some(w) = w {
        if !f.warnings.contains(&w) {
            f.warnings.push(w);
        }
    }
}

/// Fourth-order central-difference Laplacian; values beyond the box are zero.
pub fn laplacian_stencil4(u: &ScalarField) -> Result<ScalarField> {
    check_physical(u)?;
    if u.grid.time_axis.is_some() {
        return Err(Error::Shape("stencil Laplacian acts on spatial fields".into()));
    }
    let g = u.grid;
    let h2 = g.spacing() * g.spacing();
    let np = g.points_per_axis as isize;
    let samples = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let idx = g.multi_index(i);
            let mut acc = C0;
            for a in 0..g.dim {
                let at = |d: isize| -> Complex64 {
                    let j = idx[a] as isize + d;
                    if j < 0 || j >= np {
                        return C0;
                    }
                    let mut m = idx.clone();
                    m[a] = j as usize;
                    u.samples[g.flat_index(&m)]
                };
                acc += (-at(2) + at(1) * 16.0 - at(0) * 30.0 + at(-1) * 16.0 - at(-2)) / (12.0 * h2);
            }
            acc
        })
        .collect();
    Ok(u.with_samples(samples))
}

/// |x|^p sampled on the doubled grid, with `origin` at x = 0.
fn power_kernel(grid: GridSpec, p: f64, scale: f64, origin: f64) -> Result<ScalarField> {
    let big = grid.padded(2)?;
    let mut k = ScalarField::from_real_fn(big, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            0.0
        } else {
            scale * r2.powf(p / 2.0)
        }
    });
    let o = big.origin_index();
    k.samples[o] = Complex64::new(origin, 0.0);
    Ok(k)
}

/// hⁿΣ_m K(x_j − x_m)u(x_m) over the box (u zero outside), exact for every
/// box point through a doubled grid.
fn linear_convolve(u: &ScalarField, kernel: &ScalarField) -> Result<ScalarField> {
    let up = u.zero_pad(2)?;
    let mut out = convolve(&up, kernel)?;
    out.warnings.clear();
    out.crop(u.grid)
}

/// (−Δ)^s u at every grid point from the second-difference integral.
///
/// With u extended by zero, the punctured lattice sum of the integrand is
/// 2u(x)h^{−2s}Z(n+2s) − 2(K⋆u)(x) with K(y) = |y|^{−n−2s}, where Z is the
/// Epstein zeta function of ℤⁿ. The singular cell is corrected by
/// Z(n+2s−2)h^{2−2s}Δu(x)/n, leaving an O(h^{4−2s}) error.
pub fn fraclap_pointwise_field(u: &ScalarField, order: FracOrder) -> Result<ScalarField> {
    check_physical(u)?;
    if order.k != 0 {
        return Err(Error::Domain("pointwise route needs s in (0,1)".into()));
    }
    if u.grid.time_axis.is_some() {
        return Err(Error::Shape("pointwise route acts on spatial fields".into()));
    }
    let b = u.boundary_max();
    if b > 1e-8 {
        return Err(Error::Tail(b));
    }
    let (n, s) = (u.grid.dim, order.s);
    let nf = n as f64;
    let h = u.grid.spacing();
    let z0 = epstein_zeta(n, nf + 2.0 * s)?;
    let z2 = epstein_zeta(n, nf + 2.0 * s - 2.0)?;
    let kern = power_kernel(u.grid, -nf - 2.0 * s, 1.0, 0.0)?;
    let conv = linear_convolve(u, &kern)?;
    let lap = laplacian_stencil4(u)?;
    let c = gamma_ns(n, s)? / 2.0;
    let diag = 2.0 * h.powf(-2.0 * s) * z0;
    let corr = z2 * h.powf(2.0 - 2.0 * s) / nf;
    let samples = (0..u.samples.len())
        .map(|i| (u.samples[i] * diag - conv.samples[i] * 2.0 + lap.samples[i] * corr) * c)
        .collect();
    let mut out = u.with_samples(samples);
    out.warnings.clear();
    push_warning(&mut out, order.conditioning());
    Ok(out)
}

/// Single-point version of [`fraclap_pointwise_field`] by direct summation.
pub fn fraclap_pointwise(u: &ScalarField, order: FracOrder, flat: usize) -> Result<f64> {
    check_physical(u)?;
    if order.k != 0 {
        return Err(Error::Domain("pointwise route needs s in (0,1)".into()));
    }
    if u.grid.time_axis.is_some() {
        return Err(Error::Shape("pointwise route acts on spatial fields".into()));
    }
    if flat >= u.grid.len() {
        return Err(Error::Shape(format!("grid index {flat} out of range")));
    }
    let b = u.boundary_max();
    if b > 1e-8 {
        return Err(Error::Tail(b));
    }
    let g = u.grid;
    let (n, s) = (g.dim, order.s);
    let nf = n as f64;
    let h = g.spacing();
    let x = g.multi_index(flat);
    let sum: f64 = (0..g.len())
        .into_par_iter()
        .map(|m| {
            if m == flat {
                return 0.0;
            }
            let y = g.multi_index(m);
            let r2: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| {
                    let d = (*a as f64 - *b as f64) * h;
                    d * d
                })
                .sum();
            u.samples[m].re * r2.powf(-(nf + 2.0 * s) / 2.0)
        })
        .sum();
    let conv = sum * g.cell_volume();
    // Δu(x) by the same fourth-order stencil
    let np = g.points_per_axis as isize;
    let mut lap = 0.0;
    for a in 0..n {
        let at = |d: isize| -> f64 {
            let j = x[a] as isize + d;
            if j < 0 || j >= np {
                return 0.0;
            }
            let mut m = x.clone();
            m[a] = j as usize;
            u.samples[g.flat_index(&m)].re
        };
        lap += (-at(2) + 16.0 * at(1) - 30.0 * at(0) + 16.0 * at(-1) - at(-2)) / (12.0 * h * h);
    }
    let z0 = epstein_zeta(n, nf + 2.0 * s)?;
    let z2 = epstein_zeta(n, nf + 2.0 * s - 2.0)?;
    let ux = u.samples[flat].re;
    Ok(gamma_ns(n, s)? / 2.0 * (2.0 * ux * h.powf(-2.0 * s) * z0 - 2.0 * conv + z2 * h.powf(2.0 - 2.0 * s) * lap / nf))
}

/// inverse_fourier((2π|ξ|)^{2s}û) on the grid of `u` (periodic).
pub fn fraclap_spectral(u: &ScalarField, s: f64) -> Result<ScalarField> {
    check_physical(u)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("order must be positive, got {s}")));
    }
    let dim = u.grid.dim;
    crate::field::apply_multiplier(u, |k| {
        let q = 4.0 * PI * PI * xi2(k, dim);
        Complex64::new(if q == 0.0 { 0.0 } else { q.powf(s) }, 0.0)
    })
}

/// Padding factor that keeps the wrapped-around tails below ~1e−4.
pub fn default_padding(n: usize) -> usize {
    match n {
        1 => 16,
        2 => 4,
        _ => 2,
    }
}

fn with_padding<F>(u: &ScalarField, pad: usize, op: F) -> Result<ScalarField>
where
    F: FnOnce(&ScalarField) -> Result<ScalarField>,
{
    if pad <= 1 {
        return op(u);
    }
    let big = u.zero_pad(pad)?;
    let mut out = op(&big)?.crop(u.grid)?;
    out.warnings.retain(|w| !matches!(w, Warning::Alias { .. }));
    Ok(out)
}

/// [`fraclap_spectral`] on a grid padded by `pad` and cropped back.
pub fn fraclap_spectral_padded(u: &ScalarField, s: f64, pad: usize) -> Result<ScalarField> {
    with_padding(u, pad, |v| fraclap_spectral(v, s))
}

/// Quadrature settings for the subordination integrals over whole fields.
pub fn field_quad_spec() -> QuadSpec {
    QuadSpec {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_refinements: 9,
        split_point: 1.0,
    }
}

/// Groups frequency indices by their symbol: key (Σ_a j_a², j_t).
pub(crate) fn symbol_classes(grid: &GridSpec) -> (Vec<(u64, i64)>, Vec<usize>) {
    let n2 = grid.points_per_axis as i64 / 2;
    let mut map: BTreeMap<(u64, i64), usize> = BTreeMap::new();
    let mut keys = Vec::new();
    let mut class = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let idx = grid.multi_index(i);
        let q: u64 = idx[..grid.dim]
            .iter()
            .map(|&j| {
                let d = j as i64 - n2;
                (d * d) as u64
            })
            .sum();
        let jt = match grid.time_axis {
            Some(t) => idx[grid.dim] as i64 - t.points as i64 / 2,
            None => 0,
        };
        let next = keys.len();
        let c = *map.entry((q, jt)).or_insert_with(|| {
            keys.push((q, jt));
            next
        });
        class.push(c);
    }
    (keys, class)
}

pub(crate) fn class_symbol(grid: &GridSpec, key: (u64, i64)) -> Complex64 {
    let l = 2.0 * grid.half_width;
    let lam = 4.0 * PI * PI * key.0 as f64 / (l * l);
    let om = match grid.time_axis {
        Some(t) => 2.0 * PI * key.1 as f64 / (2.0 * t.half_width),
        None => 0.0,
    };
    Complex64::new(lam, om)
}

/// ∫₀^∞ w(τ, z) dτ for each symbol z, along the ray τ = r·d with
/// d = (z̄/|z|)^{1/2}, where e^{−zτ} and e^{−c/τ} both decay. `near` is used for
/// r < 1 and `far` for r > 1. Returns the integrals with d folded in.
pub(crate) fn ray_integrals<N, F>(zs: &[Complex64], near: N, far: F, spec: &QuadSpec) -> Result<Vec<Complex64>>
where
    N: Fn(Complex64, Complex64) -> Complex64 + Sync,
    F: Fn(Complex64, Complex64) -> Complex64 + Sync,
{
    let dirs: Vec<Complex64> = zs
        .iter()
        .map(|z| {
            let m = z.norm();
            if m == 0.0 || z.im == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                (z.conj() / m).sqrt()
            }
        })
        .collect();
    let eval = |r: f64, g: &(dyn Fn(Complex64, Complex64) -> Complex64 + Sync)| -> Vec<Complex64> {
        zs.par_iter().zip(&dirs).map(|(z, d)| g(d * r, *z) * d).collect()
    };
    let a = integrate_interval(|r: f64| eval(r, &near), 0.0, 1.0, spec)?;
    let b = integrate_tail(|r: f64| eval(r, &far), 1.0, spec)?;
    Ok(a.value.iter().zip(&b.value).map(|(x, y)| x + y).collect())
}

/// −σ/Γ(1−σ)∫₀^∞ τ^{−1−σ}(e^{−zτ} − 1) dτ for each z (→ z^σ), with the
/// linear term subtracted on the first unit of the ray.
pub(crate) fn balakrishnan_symbols(zs: &[Complex64], sigma: f64, spec: &QuadSpec) -> Result<Vec<Complex64>> {
    let p = -1.0 - sigma;
    let near = |tau: Complex64, z: Complex64| -> Complex64 {
        let e = expm1_c(-z * tau) + z * tau;
        if tau.norm() == 0.0 {
            return C0;
        }
        tau.powf(p) * e
    };
    let far = |tau: Complex64, z: Complex64| -> Complex64 { tau.powf(p) * expm1_c(-z * tau) };
    let raw = ray_integrals(zs, near, far, spec)?;
    let c = -sigma / gamma_real(1.0 - sigma);
    Ok(zs
        .iter()
        .zip(raw)
        .map(|(z, v)| {
            if z.norm() == 0.0 {
                return C0;
            }
            let d = if z.im == 0.0 { Complex64::new(1.0, 0.0) } else { (z.conj() / z.norm()).sqrt() };
            // ∫ along the first unit of the ray of τ^{−σ}z dτ
            let lin = z * d.powf(1.0 - sigma) / (1.0 - sigma);
            c * (v - lin)
        })
        .collect())
}

/// Applies m(class) to û class by class and transforms back.
fn apply_by_class<M>(u: &ScalarField, m: M) -> Result<ScalarField>
where
    M: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let grid = u.grid;
    let (keys, class) = symbol_classes(&grid);
    let zs: Vec<Complex64> = keys.iter().map(|k| class_symbol(&grid, *k)).collect();
    let mult = m(&zs)?;
    let mut hat = fourier(u)?;
    for (v, c) in hat.samples.iter_mut().zip(&class) {
        *v *= mult[*c];
    }
    inverse_fourier(&hat)
}

/// Balakrishnan route on a grid padded by `pad`: v = (−Δ)^k u spectrally, then
/// −σ/Γ(1−σ)∫₀^∞ t^{−1−σ}(P_t v − v) dt with P_t applied in frequency space.
pub fn fraclap_balakrishnan(u: &ScalarField, order: FracOrder, pad: usize) -> Result<ScalarField> {
    check_physical(u)?;
    if u.grid.time_axis.is_some() {
        return Err(Error::Shape("use fracheat for space-time fields".into()));
    }
    let spec = field_quad_spec();
    let mut out = with_padding(u, pad, |v| {
        apply_by_class(v, |zs| {
            let frac = balakrishnan_symbols(zs, order.sigma, &spec)?;
            Ok(zs.iter().zip(frac).map(|(z, f)| f * z.re.powi(order.k as i32)).collect())
        })
    })?;
    push_warning(&mut out, order.conditioning());
    Ok(out)
}

/// Fractional heat operator (∂_t − Δ)^s f: v = H^k f by symbol, then
/// −(−1)^kσ/Γ(1−σ)∫₀^∞ τ^{−1−σ}(P^H_τ v − v) dτ.
pub fn fracheat(f: &ScalarField, order: FracOrder) -> Result<ScalarField> {
    check_physical(f)?;
    if f.grid.time_axis.is_none() {
        return Err(Error::Shape("fracheat needs a space-time field".into()));
    }
    let spec = field_quad_spec();
    let sign = if order.k % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = apply_by_class(f, |zs| {
        let frac = balakrishnan_symbols(zs, order.sigma, &spec)?;
        Ok(zs
            .iter()
            .zip(frac)
            .map(|(z, w)| w * (-z).powi(order.k as i32) * sign)
            .collect())
    })?;
    push_warning(&mut out, order.conditioning());
    Ok(out)
}

/// Multiplier oracle (4π²|ξ|² + 2πiσ̃)^s, principal branch, 0 at the origin.
pub fn fracheat_multiplier(f: &ScalarField, s: f64) -> Result<ScalarField> {
    check_physical(f)?;
    let dim = f.grid.dim;
    crate::field::apply_multiplier(f, |k| {
        let z = heat_symbol(k, dim);
        if z.norm() == 0.0 {
            C0
        } else {
            z.powf(s)
        }
    })
}

/// ∫_{cell} weight for a kernel c|x|^{−p}, p < n, at the origin: −c·Z(p)h^{n−p}/hⁿ,
/// so that the punctured lattice sum plus this cell is exact to O(h^{n−p+2}).
fn origin_weight(n: usize, p: f64, c: f64, h: f64) -> Result<f64> {
    Ok(-c * epstein_zeta(n, p)? * h.powf(-p))
}

/// I_α f = c|·|^{α−n} ⋆ f with c = Γ((n−α)/2)/(π^{n/2}2^αΓ(α/2)).
pub fn riesz_potential(f: &ScalarField, alpha: f64) -> Result<ScalarField> {
    check_physical(f)?;
    let n = f.grid.dim;
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::Domain(format!("riesz potential needs 0 < alpha < n, got {alpha}")));
    }
    if f.grid.time_axis.is_some() {
        return Err(Error::Shape("riesz potential acts on spatial fields".into()));
    }
    let c = gamma_real((nf - alpha) / 2.0) / (PI.powf(nf / 2.0) * 2f64.powf(alpha) * gamma_real(alpha / 2.0));
    let h = f.grid.spacing();
    let w0 = origin_weight(n, nf - alpha, c, h)?;
    let kern = power_kernel(f.grid, alpha - nf, c, w0)?;
    let mut out = linear_convolve(f, &kern)?;
    let b = f.boundary_max();
    if b > crate::field::ALIAS_THRESHOLD {
        out.warnings.push(Warning::Alias { max_boundary: b });
    }
    Ok(out)
}

/// E_{s,y}(x) = α(n,s)(y² + |x|²)^{−(n−2s)/2}; y = 0 gives E_s.
pub fn fundamental_solution(n: usize, s: f64, x: &[f64], y: f64) -> Result<f64> {
    unit_order(s, "fundamental solution")?;
    if x.len() != n {
        return Err(Error::Shape(format!("point has {} coordinates, expected {n}", x.len())));
    }
    if !(y >= 0.0) {
        return Err(Error::Domain("y must be nonnegative".into()));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() + y * y;
    if r2 == 0.0 {
        return Err(Error::Domain("fundamental solution is singular at the origin".into()));
    }
    Ok(riesz_const(n, s)? * r2.powf(-(n as f64 - 2.0 * s) / 2.0))
}

/// hⁿΣ E_s(x_j)w(x_j), with the singular origin cell weighted by the zeta rule.
pub fn fundamental_pairing(w: &ScalarField, s: f64) -> Result<f64> {
    check_physical(w)?;
    let g = w.grid;
    let n = g.dim;
    let nf = n as f64;
    let c = riesz_const(n, s)?;
    let h = g.spacing();
    let o = g.origin_index();
    let w0 = origin_weight(n, nf - 2.0 * s, c, h)?;
    let mut acc = 0.0;
    for i in 0..g.len() {
        let e = if i == o {
            w0
        } else {
            fundamental_solution(n, s, &g.coords(i)[..n], 0.0)?
        };
        acc += e * w.samples[i].re;
    }
    Ok(acc * g.cell_volume())
}

/// γ(n,s)·PV∫(u(x) − u(y))/|x−y|^{n+2s} dy for an analytic test function.
pub fn riesz_singular_integral(u: &TestFunction, n: usize, s: f64, x: &[f64]) -> Result<f64> {
    unit_order(s, "singular integral")?;
    let ux = u.eval(x).re;
    let p = n as f64 + 2.0 * s;
    let f = |y: &[f64]| -> f64 {
        let r2: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        (ux - u.eval(y).re) * r2.powf(-p / 2.0)
    };
    let spec = QuadSpec::new(1e-13, 1e-9, 10, 1.0)?;
    Ok(gamma_ns(n, s)? * integrate_pv(f, x, 0.5, &spec)?.value)
}

/// −Δu(x) from lattice ball means.
///
/// With A_r the average over lattice points in the ball of radius r and
/// M2, M4, M22 the lattice moments ⟨y₀²⟩, ⟨y₀⁴⟩, ⟨y₀²y₁²⟩ of that ball,
/// u(x) − A_r u(x) = −(M2/2)Δu − (M4/24)Σu_iiii − (M22/4)Σ_{i<j}u_iijj + O(r⁶).
/// The ladder is fitted by least squares in these regressors plus ⟨y₀⁶⟩ for
/// the sixth-order remainder.
pub fn laplacian_mean_value_estimate(u: &ScalarField, flat: usize, radii: &[f64]) -> Result<f64> {
    check_physical(u)?;
    let g = u.grid;
    let n = g.dim;
    let h = g.spacing();
    let x = g.multi_index(flat);
    let np = g.points_per_axis as i64;
    let mut rows: Vec<(f64, [f64; 4])> = Vec::new();
    for &r in radii {
        if r < 2.0 * h - 1e-12 {
            continue;
        }
        let m = (r / h).floor() as i64;
        if x.iter().any(|&i| (i as i64) - m < 0 || (i as i64) + m >= np) {
            continue;
        }
        let lim = (r / h) * (r / h) + 1e-9;
        let mut count = 0.0;
        let mut sum = 0.0;
        let mut mom = [0.0f64; 4];
        let mut off = vec![-m; n];
        loop {
            let q: i64 = off.iter().map(|d| d * d).sum();
            if (q as f64) <= lim {
                let idx: Vec<usize> = x.iter().zip(&off).map(|(i, d)| (*i as i64 + d) as usize).collect();
                sum += u.samples[g.flat_index(&idx)].re;
                count += 1.0;
                let y0 = off[0] as f64 * h;
                mom[0] += y0 * y0;
                mom[1] += y0.powi(4);
                if n > 1 {
                    mom[2] += y0 * y0 * (off[1] as f64 * h).powi(2);
                }
                mom[3] += y0.powi(6);
            }
            let mut a = 0;
            loop {
                if a == n {
                    break;
                }
                off[a] += 1;
                if off[a] <= m {
                    break;
                }
                off[a] = -m;
                a += 1;
            }
            if a == n {
                break;
            }
        }
        let d = u.samples[flat].re - sum / count;
        rows.push((d, mom.map(|v| v / count)));
    }
    let cols: Vec<usize> = if n == 1 { vec![0, 1, 3] } else { vec![0, 1, 2, 3] };
    let k = cols.len();
    if rows.len() < 3.max(k) {
        return Err(Error::Ladder(format!("only {} radii fit the box", rows.len())));
    }
    let coef = [-0.5, -1.0 / 24.0, -0.25, 1.0];
    let mut ata = vec![vec![0.0f64; k]; k];
    let mut atb = vec![0.0f64; k];
    for (d, mom) in &rows {
        let sc = 1.0 / mom[0];
        let v: Vec<f64> = cols.iter().map(|&c| coef[c] * mom[c] * sc).collect();
        for i in 0..k {
            for j in 0..k {
                ata[i][j] += v[i] * v[j];
            }
            atb[i] += v[i] * d * sc;
        }
    }
    let sol = solve_small(ata, atb)?;
    Ok(-sol[0])
}

fn solve_small(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.into_iter().zip(b).map(|(mut r, v)| {
        r.push(v);
        r
    }).collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap_or(c);
        m.swap(c, p);
        if m[c][c].abs() < 1e-300 {
            return Err(Error::Ladder("degenerate radius ladder".into()));
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_constants() {
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(-0.5).is_err());
        let o = FracOrder::new(1.5).unwrap();
        assert_eq!(o.k, 1);
        assert!((o.sigma - 0.5).abs() < 1e-15 && o.a.abs() < 1e-15);
        assert!(FracOrder::new(0.9995).unwrap().conditioning().is_some());
        assert!((gamma_ns(1, 0.5).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((gamma_ns(2, 0.5).unwrap() - 0.5 / PI).abs() < 1e-15);
        assert!((riesz_const(3, 0.5).unwrap() - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert!((k_const(1.5).unwrap() - 0.5).abs() < 1e-14);
        assert!((k_const(0.5).unwrap() + 1.0).abs() < 1e-14);
        for s in [0.1, 0.25, 0.5, 0.75, 0.9] {
            assert!((k_const(s).unwrap() + dtn_const(s).unwrap()).abs() < 1e-13);
        }
        assert!(gamma_ns(1, 1.2).is_err());
        assert!(riesz_const(1, 0.5).is_err());
        let c = FracConstants::new(1, FracOrder::new(0.5).unwrap());
        assert!(c.riesz_const.is_none() && c.gamma_ns.is_some());
    }

    #[test]
    fn gamma_oracle_matches() {
        for n in [1, 2, 3] {
            for s in [0.25, 0.5, 0.75] {
                let a = gamma_ns(n, s).unwrap();
                let b = gamma_ns_oracle(n, s).unwrap();
                assert!(((a - b) / a).abs() < 1e-4, "n={n} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn pointwise_anchor_and_single_point() {
        let g = GridSpec::new(1, 256, 12.0).unwrap();
        let u = TestFunction::gaussian(PI).sample(g);
        let o = FracOrder::new(0.5).unwrap();
        let f = fraclap_pointwise_field(&u, o).unwrap();
        let c = g.origin_index();
        assert!((f.samples[c].re - 2.0).abs() < 2e-3, "{}", f.samples[c].re);
        let p = fraclap_pointwise(&u, o, c).unwrap();
        assert!((p - f.samples[c].re).abs() < 1e-10);
        let p = fraclap_pointwise(&u, o, c + 17).unwrap();
        assert!((p - f.samples[c + 17].re).abs() < 1e-10);
        let z = ScalarField::zeros(g, Space::Physical);
        assert_eq!(fraclap_pointwise_field(&z, o).unwrap().max_abs(), 0.0);
        let wide = TestFunction::gaussian(0.01).sample(g);
        assert!(matches!(fraclap_pointwise_field(&wide, o), Err(Error::Tail(_))));
    }

    #[test]
    fn spectral_semigroup_and_integer_order() {
        let g = GridSpec::new(2, 128, 6.0).unwrap();
        let u = TestFunction::gaussian(PI).sample(g);
        let a = fraclap_spectral(&fraclap_spectral(&u, 0.3).unwrap(), 0.45).unwrap();
        let b = fraclap_spectral(&u, 0.75).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-10);
        let one = fraclap_spectral(&u, 1.0).unwrap();
        let exact = ScalarField::from_real_fn(g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (4.0 * PI - 4.0 * PI * PI * r2) * (-PI * r2).exp()
        });
        assert!(one.sub(&exact).unwrap().max_abs() < 1e-10);
        // the stencil converges at fourth order
        let coarse = TestFunction::gaussian(PI).sample(GridSpec::new(2, 64, 6.0).unwrap());
        let e1 = laplacian_stencil4(&coarse).unwrap().add(&fraclap_spectral(&coarse, 1.0).unwrap()).unwrap().max_abs();
        let e2 = laplacian_stencil4(&u).unwrap().add(&one).unwrap().max_abs();
        assert!(e2 < e1 / 6.0, "{e1} {e2}");
    }

    #[test]
    fn balakrishnan_matches_spectral() {
        let g = GridSpec::new(1, 128, 8.0).unwrap();
        let u = TestFunction::gaussian(PI).sample(g);
        for s in [0.25, 0.5, 1.5] {
            let o = FracOrder::new(s).unwrap();
            let a = fraclap_balakrishnan(&u, o, 2).unwrap();
            let b = fraclap_spectral_padded(&u, s, 2).unwrap();
            assert!(a.sub(&b).unwrap().max_abs() < 1e-8 * b.max_abs(), "s={s}");
        }
    }

    #[test]
    fn fracheat_matches_multiplier() {
        let g = GridSpec::new(1, 32, 6.0).unwrap().with_time(32, 6.0).unwrap();
        let f = ScalarField::from_real_fn(g, |x| (-PI * x[0] * x[0] - 0.5 * x[1] * x[1]).exp());
        for s in [0.5, 1.5] {
            let a = fracheat(&f, FracOrder::new(s).unwrap()).unwrap();
            let b = fracheat_multiplier(&f, s).unwrap();
            assert!(a.sub(&b).unwrap().max_abs() < 1e-8 * b.max_abs(), "s={s}");
        }
    }

    #[test]
    fn mean_value_laplacian() {
        let g = GridSpec::new(2, 256, 6.0).unwrap();
        let h = g.spacing();
        let radii: Vec<f64> = (2..7).rev().map(|k| k as f64 * h).collect();
        let q = ScalarField::from_real_fn(g, |x| x[0] * x[0] + x[1] * x[1]);
        let o = g.origin_index();
        let v = laplacian_mean_value_estimate(&q, o + 3, &radii).unwrap();
        assert!((v + 4.0).abs() < 1e-9, "{v}");
        let lin = ScalarField::from_real_fn(g, |x| 2.0 * x[0] - x[1]);
        assert!(laplacian_mean_value_estimate(&lin, o, &radii).unwrap().abs() < 1e-9);
        let u = TestFunction::gaussian(PI).sample(g);
        let v = laplacian_mean_value_estimate(&u, o, &radii).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-3 * 4.0 * PI, "{v}");
        assert!(laplacian_mean_value_estimate(&u, 0, &radii).is_err());
    }
}
