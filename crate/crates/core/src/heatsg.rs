//! Heat kernel G(x,t) = (4πt)^{−n/2}e^{−|x|²/4t}, the heat semigroup
//! P_t f = G(·,t)⋆f and the evolutive semigroup
//! P^H_τ f(x,t) = ∫G(x−y,τ) f(y, t−τ) dy.
//!
//! The spectral route multiplies by e^{−4π²|ξ|²t} (resp. e^{−τ(4π²|ξ|²+2πiσ̃)});
//! the convolution route uses sampled kernels and a band-limited time shift.
//! Spectral is the default; convolution is the independent oracle.

use crate::error::{Error, Result};
use crate::field::{apply_multiplier, convolve, fourier, inverse_fourier, GridSpec, ScalarField, Space};
use crate::quad::{integrate_halfline, QuadSpec};
use crate::specfun::gamma_real;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Convolution,
}

/// One evaluation of the heat kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernelEval {
    pub x: Vec<f64>,
    pub t: f64,
    pub value: f64,
}

/// G(x, t) in dimension x.len().
pub fn heat_kernel(x: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok(heat_kernel_unchecked(x, t))
}

pub(crate) fn heat_kernel_unchecked(x: &[f64], t: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * t).powf(-(x.len() as f64) / 2.0) * (-r2 / (4.0 * t)).exp()
}

pub fn heat_kernel_eval(x: &[f64], t: f64) -> Result<HeatKernelEval> {
    Ok(HeatKernelEval {
        x: x.to_vec(),
        t,
        value: heat_kernel(x, t)?,
    })
}

/// G(·, t) sampled on the spatial part of `grid`.
pub fn sample_heat_kernel(grid: GridSpec, t: f64) -> Result<ScalarField> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    let g = GridSpec { time_axis: None, ..grid };
    Ok(ScalarField::from_real_fn(g, |x| heat_kernel_unchecked(x, t)))
}

pub(crate) fn xi2(k: &[f64], dim: usize) -> f64 {
    k[..dim].iter().map(|v| v * v).sum()
}

/// e^z − 1 without cancellation for small |z|.
pub fn expm1_c(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (z.im / 2.0).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// Symbol of −H = ∂_t − Δ at (ξ, σ̃): 4π²|ξ|² + 2πiσ̃ (σ̃ = 0 for spatial fields).
pub(crate) fn heat_symbol(k: &[f64], dim: usize) -> Complex64 {
    let sig = if k.len() > dim { k[dim] } else { 0.0 };
    Complex64::new(4.0 * PI * PI * xi2(k, dim), 2.0 * PI * sig)
}

/// P_t f.
pub fn apply_pt(f: &ScalarField, t: f64, method: Method) -> Result<ScalarField> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("P_t needs t > 0, got {t}")));
    }
    let dim = f.grid.dim;
    match method {
        Method::Spectral => apply_multiplier(f, |k| Complex64::new((-4.0 * PI * PI * xi2(k, dim) * t).exp(), 0.0)),
        Method::Convolution => {
            if f.grid.time_axis.is_some() {
                return map_time_slices(f, |slice| {
                    let g = sample_heat_kernel(slice.grid, t)?;
                    convolve(slice, &g)
                });
            }
            let g = sample_heat_kernel(f.grid, t)?;
            convolve(f, &g)
        }
    }
}

/// P_t f − f, computed spectrally with e^{−λt}−1 evaluated by expm1.
pub fn apply_pt_minus_identity(f: &ScalarField, t: f64) -> Result<ScalarField> {
    let dim = f.grid.dim;
    apply_multiplier(f, |k| Complex64::new((-4.0 * PI * PI * xi2(k, dim) * t).exp_m1(), 0.0))
}

/// P^H_τ f for a space-time field.
pub fn apply_pth(f: &ScalarField, tau: f64, method: Method) -> Result<ScalarField> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("P^H needs tau > 0, got {tau}")));
    }
    if f.grid.time_axis.is_none() {
        return Err(Error::Shape("evolutive semigroup needs a space-time field".into()));
    }
    let dim = f.grid.dim;
    match method {
        Method::Spectral => apply_multiplier(f, |k| (-heat_symbol(k, dim) * tau).exp()),
        Method::Convolution => {
            let shifted = time_shift(f, tau)?;
            apply_pt(&shifted, tau, Method::Convolution)
        }
    }
}

/// P^H_τ f − f, spectrally with a compensated exponential.
pub fn apply_pth_minus_identity(f: &ScalarField, tau: f64) -> Result<ScalarField> {
    let dim = f.grid.dim;
    apply_multiplier(f, |k| expm1_c(-heat_symbol(k, dim) * tau))
}

/// f(·, t − τ) by a phase shift along the time axis (band-limited interpolation).
pub fn time_shift(f: &ScalarField, tau: f64) -> Result<ScalarField> {
    let ta = f.grid.time_axis.ok_or_else(|| Error::Shape("time shift needs a time axis".into()))?;
    let nt = ta.points;
    let tw = ta.half_width;
    let mut out = f.clone();
    let lines: Vec<Vec<Complex64>> = f
        .samples
        .par_chunks(nt)
        .map(|line| {
            let g = GridSpec {
                dim: 1,
                points_per_axis: nt,
                half_width: tw,
                time_axis: None,
            };
            let s = ScalarField {
                grid: g,
                samples: line.to_vec(),
                space: Space::Physical,
                warnings: Vec::new(),
            };
            let mut hat = fourier(&s).expect("validated axis");
            for (i, v) in hat.samples.iter_mut().enumerate() {
                let sig = g.freqs(i)[0];
                *v *= Complex64::from_polar(1.0, -2.0 * PI * sig * tau);
            }
            inverse_fourier(&hat).expect("validated axis").samples
        })
        .collect();
    for (chunk, line) in out.samples.chunks_mut(nt).zip(lines) {
        chunk.copy_from_slice(&line);
    }
    Ok(out)
}

/// Applies a spatial operation to every time slice of a space-time field.
pub fn map_time_slices<F>(f: &ScalarField, op: F) -> Result<ScalarField>
where
    F: Fn(&ScalarField) -> Result<ScalarField> + Sync,
{
    let ta = f.grid.time_axis.ok_or_else(|| Error::Shape("field has no time axis".into()))?;
    let nt = ta.points;
    let sgrid = GridSpec { time_axis: None, ..f.grid };
    let nx = sgrid.len();
    let slices: Vec<Result<ScalarField>> = (0..nt)
        .into_par_iter()
        .map(|j| {
            let samples = (0..nx).map(|i| f.samples[i * nt + j]).collect();
            let s = ScalarField {
                grid: sgrid,
                samples,
                space: f.space,
                warnings: Vec::new(),
            };
            op(&s)
        })
        .collect();
    let mut out = f.clone();
    out.warnings.clear();
    for (j, s) in slices.into_iter().enumerate() {
        let s = s?;
        for w in s.warnings {
            if !out.warnings.contains(&w) {
                out.warnings.push(w);
            }
        }
        for i in 0..nx {
            out.samples[i * nt + j] = s.samples[i];
        }
    }
    Ok(out)
}

/// Γ((n−2)/2)/(4π^{n/2}), the constant of ∫₀^∞G(x,t)dt = c|x|^{2−n}.
pub fn newtonian_constant(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("Newtonian potential needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok(gamma_real((nf - 2.0) / 2.0) / (4.0 * PI.powf(nf / 2.0)))
}

/// ∫₀^∞ G(x,t) dt by quadrature.
pub fn subordination_newtonian(x: &[f64]) -> Result<f64> {
    let n = x.len();
    newtonian_constant(n)?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if !(r2 > 0.0) {
        return Err(Error::Domain("subordination needs x != 0".into()));
    }
    let spec = QuadSpec::default().with_split(r2 / 4.0);
    let r = integrate_halfline(|t: f64| heat_kernel_unchecked(x, t), &spec)?;
    Ok(r.value)
}

/// ∂_tG − ΔG at (x, t) by centered differences with step h.
pub fn heat_equation_residual(x: &[f64], t: f64, h: f64) -> Result<f64> {
    if !(t > h) {
        return Err(Error::Stencil(format!("t = {t} too close to 0 for step {h}")));
    }
    let g = |y: &[f64], s: f64| heat_kernel_unchecked(y, s);
    let dt = (g(x, t + h) - g(x, t - h)) / (2.0 * h);
    let mut lap = 0.0;
    let mut y = x.to_vec();
    for a in 0..x.len() {
        y[a] = x[a] + h;
        let p = g(&y, t);
        y[a] = x[a] - h;
        let m = g(&y, t);
        y[a] = x[a];
        lap += (p - 2.0 * g(x, t) + m) / (h * h);
    }
    Ok(dt - lap)
}

/// Spectral Laplacian Δf (multiplier −4π²|ξ|²).
pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    let dim = f.grid.dim;
    apply_multiplier(f, |k| Complex64::new(-4.0 * PI * PI * xi2(k, dim), 0.0))
}

/// H f = Δf − ∂_t f (multiplier −(4π²|ξ|² + 2πiσ̃)).
pub fn heat_operator(f: &ScalarField) -> Result<ScalarField> {
    let dim = f.grid.dim;
    apply_multiplier(f, |k| -heat_symbol(k, dim))
}
