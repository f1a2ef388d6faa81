//! Extension problems and their Dirichlet-to-Neumann limits.
//!
//! - elliptic: U(·,y) = P_s(·,y)⋆u solves ∂_yy U + (a/y)∂_y U + ΔU = 0;
//! - parabolic: U = ∫∫𝒫^(a)(x−z,y,τ)f(z,t−τ) solves 𝔅^(a)U = 0;
//! - higher order: U = ∫∫𝒫^(s)(x−z,y,τ)f(z,t−τ) solves ℋ_a^{[s]+1}U = 0.
//!
//! Each solver produces U on a ladder of heights y_k. The weighted normal
//! derivative y^a∂_yU equals 2σ∂_ηU in the variable η = y^{2σ}, so the
//! ladder is differenced in η and the differences are extrapolated to y = 0
//! by Richardson elimination of the known exponents 2j − 2σ and 2j.

use crate::error::{Error, Result};
use crate::field::{fourier, inverse_fourier, GridSpec, ScalarField, Space, SpaceTimeFunction, Warning, C0};
use crate::fracops::{class_symbol, default_padding, field_quad_spec, ray_integrals, symbol_classes, FracOrder};
use crate::heatsg::heat_kernel_unchecked;
use crate::quad::{integrate_halfline, QuadSpec};
use crate::report::{timed, CheckReport};
use crate::specfun::{bessel, gamma_real, BesselKind};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    Elliptic,
    Parabolic,
    Higher,
}

fn sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * PI.powf(nf / 2.0) / gamma_real(nf / 2.0)
}

/// P_s(x,y) = Γ(n/2+s)/(π^{n/2}Γ(s))·y^{2s}/(y²+|x|²)^{(n+2s)/2}.
pub fn elliptic_kernel(x: &[f64], y: f64, s: f64) -> f64 {
    let nf = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    gamma_real(nf / 2.0 + s) / (PI.powf(nf / 2.0) * gamma_real(s)) * y.powf(2.0 * s)
        * (y * y + r2).powf(-(nf + 2.0 * s) / 2.0)
}

/// 𝒫^(a)(x,y,t) = y^{1−a}t^{−(3−a)/2}e^{−y²/4t}G(x,t)/(2^{1−a}Γ((1−a)/2)), zero for t ≤ 0.
pub fn parabolic_kernel(x: &[f64], y: f64, t: f64, a: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    y.powf(1.0 - a) / (2f64.powf(1.0 - a) * gamma_real((1.0 - a) / 2.0))
        * t.powf(-(3.0 - a) / 2.0)
        * (-y * y / (4.0 * t)).exp()
        * heat_kernel_unchecked(x, t)
}

/// 𝒫^(s)(x,y,t) = y^{2s}t^{−1−s}e^{−y²/4t}G(x,t)/(2^{2s}Γ(s)), zero for t ≤ 0.
/// Any real s other than 0, −1, −2, … is accepted.
pub fn higher_kernel(x: &[f64], y: f64, t: f64, s: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let g = gamma_real(s);
    y.powf(2.0 * s) / (4f64.powf(s) * g) * t.powf(-1.0 - s) * (-y * y / (4.0 * t)).exp() * heat_kernel_unchecked(x, t)
}

/// 𝒢^(a)(x,y,t) = 2π^{(a+1)/2}/Γ((a+1)/2)·(4πt)^{−(n+a+1)/2}e^{−(|x|²+y²)/4t}.
pub fn normalized_gaussian(x: &[f64], y: f64, t: f64, a: f64) -> f64 {
    let nf = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    2.0 * PI.powf((a + 1.0) / 2.0) / gamma_real((a + 1.0) / 2.0)
        * (4.0 * PI * t).powf(-(nf + a + 1.0) / 2.0)
        * (-(r2 + y * y) / (4.0 * t)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonKernel {
    pub variant: KernelVariant,
    pub n: usize,
    pub order: FracOrder,
}

impl PoissonKernel {
    pub fn elliptic(n: usize, s: f64) -> Result<Self> {
        Self::build(KernelVariant::Elliptic, n, s)
    }

    pub fn parabolic(n: usize, s: f64) -> Result<Self> {
        Self::build(KernelVariant::Parabolic, n, s)
    }

    pub fn higher(n: usize, s: f64) -> Result<Self> {
        Self::build(KernelVariant::Higher, n, s)
    }

    fn build(variant: KernelVariant, n: usize, s: f64) -> Result<Self> {
        let order = FracOrder::new(s)?;
        if variant != KernelVariant::Higher && order.k != 0 {
            return Err(Error::Domain(format!("{variant:?} kernel needs s in (0,1), got {s}")));
        }
        if !(s < 3.0) {
            return Err(Error::Domain(format!("supported orders are s < 3, got {s}")));
        }
        if !(1..=3).contains(&n) {
            return Err(Error::Domain(format!("dimension {n} not in 1..=3")));
        }
        Ok(PoissonKernel { variant, n, order })
    }

    /// Kernel value; `t` is ignored by the elliptic kernel.
    pub fn eval(&self, x: &[f64], y: f64, t: f64) -> f64 {
        match self.variant {
            KernelVariant::Elliptic => elliptic_kernel(x, y, self.order.s),
            KernelVariant::Parabolic => parabolic_kernel(x, y, t, self.order.a),
            KernelVariant::Higher => higher_kernel(x, y, t, self.order.s),
        }
    }

    /// ∫ P dx (elliptic) or ∫∫ P dz dt by nested radial quadrature. The t-tail
    /// decays like t^{−1−σ}, so σ below about 0.1 exhausts the budget.
    pub fn mass(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain("mass needs y > 0".into()));
        }
        let n = self.n;
        let area = sphere_area(n);
        let radial = |g: &dyn Fn(f64) -> f64, scale: f64| -> Result<f64> {
            let spec = QuadSpec::default().with_split(scale);
            Ok(area * integrate_halfline(|r: f64| r.powi(n as i32 - 1) * g(r), &spec)?.value)
        };
        let point = |r: f64| {
            let mut x = vec![0.0; n];
            x[0] = r;
            x
        };
        match self.variant {
            KernelVariant::Elliptic => radial(&|r| self.eval(&point(r), y, 0.0), y),
            _ => {
                let spec = QuadSpec::new(1e-14, 1e-11, 10, y * y / 4.0)?;
                let outer = integrate_halfline(
                    |t: f64| {
                        radial(&|r| self.eval(&point(r), y, t), t.sqrt()).unwrap_or(f64::NAN)
                    },
                    &spec,
                )?;
                Ok(outer.value)
            }
        }
    }
}

/// ∫∫𝒢^(a)(z,y,t)y^a dy dz for fixed t.
pub fn normalized_gaussian_mass(n: usize, a: f64, t: f64) -> Result<f64> {
    let area = sphere_area(n);
    let spec = QuadSpec::default().with_split(t.sqrt());
    let inner = |y: f64| -> f64 {
        let r = integrate_halfline(
            |r: f64| {
                let mut x = vec![0.0; n];
                x[0] = r;
                r.powi(n as i32 - 1) * normalized_gaussian(&x, y, t, a)
            },
            &spec,
        );
        r.map(|v| area * v.value).unwrap_or(f64::NAN) * y.powf(a)
    };
    Ok(integrate_halfline(inner, &spec)?.value)
}

/// y_k = 0.4·2^{−k}, k = 0..6.
pub fn default_ladder() -> Vec<f64> {
    (0..7).map(|k| 0.4 * 0.5f64.powi(k)).collect()
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::Ladder("empty y ladder".into()));
    }
    if ladder.iter().any(|y| !(*y > 0.0 && y.is_finite())) {
        return Err(Error::Ladder("ladder heights must be positive".into()));
    }
    if ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Ladder("ladder must be strictly decreasing".into()));
    }
    Ok(())
}

/// U(·, y_k[, ·]) for each rung of the ladder.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    pub variant: KernelVariant,
    pub order: FracOrder,
    pub grid: GridSpec,
    pub y_ladder: Vec<f64>,
    pub rungs: Vec<ScalarField>,
}

impl ExtensionField {
    /// CSV of every rung with a `y` column.
    pub fn to_csv(&self) -> Vec<(f64, String)> {
        self.y_ladder
            .iter()
            .zip(&self.rungs)
            .map(|(y, r)| (*y, r.to_csv(Some(*y))))
            .collect()
    }

    /// ‖U(·,y_k,·) − f‖_p along the ladder.
    pub fn trace_errors(&self, f: &ScalarField, p: f64) -> Result<Vec<f64>> {
        self.rungs.iter().map(|r| Ok(r.sub(f)?.lp_norm(p))).collect()
    }
}

fn frequency_classes(grid: &GridSpec) -> (Vec<Complex64>, Vec<f64>, Vec<usize>) {
    let (keys, class) = symbol_classes(grid);
    let l = 2.0 * grid.half_width;
    let zs = keys.iter().map(|k| class_symbol(grid, *k)).collect();
    let xis = keys.iter().map(|k| (k.0 as f64).sqrt() / l).collect();
    (zs, xis, class)
}

fn apply_class_multiplier(hat: &ScalarField, class: &[usize], m: &[Complex64]) -> Result<ScalarField> {
    let samples = hat.samples.iter().zip(class).map(|(v, c)| v * m[*c]).collect();
    inverse_fourier(&hat.with_samples(samples))
}

/// (2/Γ(s))(πy|ξ|)^s K_s(2πy|ξ|), the Fourier transform of P_s(·,y).
pub fn elliptic_multiplier(xi: f64, y: f64, s: f64) -> Result<f64> {
    let z = 2.0 * PI * y * xi;
    if z == 0.0 {
        return Ok(1.0);
    }
    if z > 700.0 {
        return Ok(0.0);
    }
    Ok(2.0 / gamma_real(s) * (z / 2.0).powf(s) * bessel(BesselKind::K, s, z)?.re())
}

/// U(·, y_k) = P_s(·, y_k)⋆u, applied through the Fourier transform of the
/// kernel on a zero-padded grid.
pub fn solve_elliptic(u: &ScalarField, s: f64, ladder: &[f64]) -> Result<ExtensionField> {
    let order = FracOrder::new(s)?;
    if order.k != 0 {
        return Err(Error::Domain(format!("elliptic extension needs s in (0,1), got {s}")));
    }
    check_ladder(ladder)?;
    if u.space != Space::Physical || u.grid.time_axis.is_some() {
        return Err(Error::Shape("elliptic extension acts on physical spatial fields".into()));
    }
    let pad = default_padding(u.grid.dim);
    let big = u.zero_pad(pad)?;
    let hat = fourier(&big)?;
    let (_, xis, class) = frequency_classes(&big.grid);
    let mut rungs = Vec::with_capacity(ladder.len());
    for &y in ladder {
        let m: Vec<Complex64> = xis
            .par_iter()
            .map(|xi| elliptic_multiplier(*xi, y, s).map(|v| Complex64::new(v, 0.0)))
            .collect::<Result<_>>()?;
        let mut r = apply_class_multiplier(&hat, &class, &m)?.crop(u.grid)?;
        r.warnings.clear();
        let mut edge = vec![0.0; u.grid.dim];
        edge[0] = big.grid.half_width;
        let tail = elliptic_kernel(&edge, y, s) * big.grid.cell_volume() * u.lp_norm(1.0);
        if tail > crate::field::ALIAS_THRESHOLD {
            r.warnings.push(Warning::Alias { max_boundary: tail });
        }
        rungs.push(r);
    }
    Ok(ExtensionField {
        variant: KernelVariant::Elliptic,
        order,
        grid: u.grid,
        y_ladder: ladder.to_vec(),
        rungs,
    })
}

/// c(y)·∫₀^∞ τ^{−p}e^{−y²/4τ}(e^{−zτ} − 1)dτ·m(z) for every frequency class
/// and rung, returned as the fields U_k − f.
fn subordinated_rungs<C, M>(f: &ScalarField, p: f64, norm: C, factor: M, ladder: &[f64]) -> Result<Vec<ScalarField>>
where
    C: Fn(f64) -> f64,
    M: Fn(Complex64) -> Complex64,
{
    let hat = fourier(f)?;
    let (zs, _, class) = frequency_classes(&f.grid);
    let spec = field_quad_spec();
    let mut out = Vec::with_capacity(ladder.len());
    for &y in ladder {
        let c = y * y / 4.0;
        let w = |tau: Complex64, z: Complex64| -> Complex64 {
            if tau.norm() == 0.0 {
                return C0;
            }
            tau.powf(-p) * (-c / tau).exp() * crate::heatsg::expm1_c(-z * tau)
        };
        let raw = ray_integrals(&zs, w, w, &spec)?;
        let k = norm(y);
        let m: Vec<Complex64> = zs.iter().zip(raw).map(|(z, v)| v * k * factor(*z)).collect();
        out.push(apply_class_multiplier(&hat, &class, &m)?);
    }
    Ok(out)
}

fn check_space_time(f: &ScalarField) -> Result<()> {
    if f.space != Space::Physical || f.grid.time_axis.is_none() {
        return Err(Error::Shape("expected a physical space-time field".into()));
    }
    Ok(())
}

/// U(x,y,t) = y^{1−a}/(2^{1−a}Γ((1−a)/2))∫₀^∞τ^{−(3−a)/2}e^{−y²/4τ}P^H_τ f dτ,
/// evaluated as f plus the same integral of P^H_τ f − f.
pub fn solve_parabolic(f: &ScalarField, s: f64, ladder: &[f64]) -> Result<ExtensionField> {
    let order = FracOrder::new(s)?;
    if order.k != 0 {
        return Err(Error::Domain(format!("parabolic extension needs s in (0,1), got {s}")));
    }
    check_ladder(ladder)?;
    check_space_time(f)?;
    let a = order.a;
    let g = gamma_real((1.0 - a) / 2.0);
    let diffs = subordinated_rungs(
        f,
        (3.0 - a) / 2.0,
        |y| y.powf(1.0 - a) / (2f64.powf(1.0 - a) * g),
        |_| Complex64::new(1.0, 0.0),
        ladder,
    )?;
    let rungs = diffs.into_iter().map(|d| d.add(f)).collect::<Result<_>>()?;
    Ok(ExtensionField {
        variant: KernelVariant::Parabolic,
        order,
        grid: f.grid,
        y_ladder: ladder.to_vec(),
        rungs,
    })
}

/// U(x,y,t) = y^{2s}/(2^{2s}Γ(s))∫₀^∞τ^{−1−s}e^{−y²/4τ}P^H_τ f dτ.
pub fn solve_higher(f: &ScalarField, s: f64, ladder: &[f64]) -> Result<ExtensionField> {
    let order = FracOrder::new(s)?;
    if !(s < 3.0) {
        return Err(Error::Domain(format!("supported orders are s < 3, got {s}")));
    }
    check_ladder(ladder)?;
    check_space_time(f)?;
    let g = gamma_real(s);
    let diffs = subordinated_rungs(
        f,
        1.0 + s,
        |y| y.powf(2.0 * s) / (4f64.powf(s) * g),
        |_| Complex64::new(1.0, 0.0),
        ladder,
    )?;
    let rungs = diffs.into_iter().map(|d| d.add(f)).collect::<Result<_>>()?;
    Ok(ExtensionField {
        variant: KernelVariant::Higher,
        order,
        grid: f.grid,
        y_ladder: ladder.to_vec(),
        rungs,
    })
}

/// Exponents of the η-difference sequence: 2j − 2σ and 2j for j ≥ 1, sorted.
pub fn ladder_exponents(sigma: f64, count: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (1..=count).flat_map(|j| [2.0 * j as f64 - 2.0 * sigma, 2.0 * j as f64]).collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    e.truncate(count);
    e
}

/// Outcome of a y → 0 extrapolation.
#[derive(Debug, Clone)]
pub struct Extrapolated {
    pub value: ScalarField,
    /// max-norm size of the last Richardson correction
    pub error_estimate: f64,
    /// the raw difference quotients, coarsest first
    pub raw: Vec<ScalarField>,
}

/// Richardson elimination for a sequence at heights y_0 > y_1 > … with a
/// constant ratio.
pub fn richardson(seq: &[ScalarField], ratio: f64, exponents: &[f64]) -> Result<(ScalarField, f64)> {
    if seq.len() < 2 {
        return Err(Error::Extrapolation("need at least two terms".into()));
    }
    let steps: Vec<f64> = seq
        .windows(2)
        .map(|v| v[1].sub(&v[0]).map(|d| d.max_abs()))
        .collect::<Result<_>>()?;
    let (first, last) = (steps[0], steps[steps.len() - 1]);
    if last > first && last > 1e-12 * seq[seq.len() - 1].max_abs() {
        return Err(Error::Extrapolation(format!(
            "rung differences grow from {first:e} to {last:e}"
        )));
    }
    let mut cur: Vec<ScalarField> = seq.to_vec();
    let mut corrections = Vec::new();
    for &p in exponents.iter().take(seq.len() - 1) {
        let w = ratio.powf(p);
        let next: Vec<ScalarField> = cur
            .windows(2)
            .map(|v| v[1].scale(w).sub(&v[0]).map(|d| d.scale(1.0 / (w - 1.0))))
            .collect::<Result<_>>()?;
        let last_old = cur.last().expect("nonempty");
        let last_new = next.last().expect("nonempty");
        corrections.push(last_new.sub(last_old)?.max_abs());
        cur = next;
    }
    let final_field = cur.pop().expect("nonempty");
    let est = *corrections.last().unwrap_or(&f64::INFINITY);
    if !est.is_finite() || final_field.samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Extrapolation("non-finite extrapolation".into()));
    }
    if corrections.len() >= 2 && est > corrections[0] && est > 1e-12 * final_field.max_abs() {
        return Err(Error::Extrapolation(format!(
            "rung sequence is not Cauchy: corrections {corrections:?}"
        )));
    }
    Ok((final_field, est))
}

fn geometric_ratio(ladder: &[f64]) -> Result<f64> {
    let r = ladder[0] / ladder[1];
    if ladder.windows(2).any(|w| ((w[0] / w[1]) - r).abs() > 1e-9 * r) {
        return Err(Error::Ladder("Richardson needs a geometric ladder".into()));
    }
    Ok(r)
}

/// 2σ(W_k − W_{k+1})/(y_k^{2σ} − y_{k+1}^{2σ}) ≈ y^a∂_yW, extrapolated.
fn weighted_derivative_limit(rungs: &[ScalarField], ladder: &[f64], sigma: f64) -> Result<Extrapolated> {
    if rungs.len() < 4 {
        return Err(Error::Ladder(format!("D-t-N needs at least 4 rungs, got {}", rungs.len())));
    }
    let ratio = geometric_ratio(ladder)?;
    let raw: Vec<ScalarField> = (0..rungs.len() - 1)
        .map(|k| {
            let de = ladder[k].powf(2.0 * sigma) - ladder[k + 1].powf(2.0 * sigma);
            rungs[k].sub(&rungs[k + 1]).map(|d| d.scale(2.0 * sigma / de))
        })
        .collect::<Result<_>>()?;
    let exps = ladder_exponents(sigma, raw.len());
    let (value, error_estimate) = richardson(&raw, ratio, &exps)?;
    Ok(Extrapolated {
        value,
        error_estimate,
        raw,
    })
}

/// −(2^{2s−1}Γ(s)/Γ(1−s))·lim y^a∂_yU.
pub fn dtn_elliptic(ext: &ExtensionField, s: f64) -> Result<Extrapolated> {
    if ext.variant != KernelVariant::Elliptic {
        return Err(Error::Shape("dtn_elliptic needs an elliptic extension".into()));
    }
    let c = crate::fracops::dtn_const(s)?;
    let mut e = weighted_derivative_limit(&ext.rungs, &ext.y_ladder, s)?;
    e.value = e.value.scale(-c);
    e.error_estimate *= c;
    Ok(e)
}

/// −2^{−a}Γ((1−a)/2)/Γ((1+a)/2)·lim y^a∂_yU.
pub fn dtn_parabolic(ext: &ExtensionField, s: f64) -> Result<Extrapolated> {
    if ext.variant != KernelVariant::Parabolic {
        return Err(Error::Shape("dtn_parabolic needs a parabolic extension".into()));
    }
    let a = 1.0 - 2.0 * s;
    let c = 2f64.powf(-a) * gamma_real((1.0 - a) / 2.0) / gamma_real((1.0 + a) / 2.0);
    let mut e = weighted_derivative_limit(&ext.rungs, &ext.y_ladder, s)?;
    e.value = e.value.scale(-c);
    e.error_estimate *= c;
    Ok(e)
}

/// ℋ_a^{[s]}U − [s]!Γ(σ)/Γ(s)·H^{[s]}f on every rung, from
/// [s]!y^{2σ}/(2^{2σ}Γ(s))∫τ^{−1−σ}e^{−y²/4τ}(P^H_τ H^{[s]}f − H^{[s]}f)dτ.
pub fn higher_heat_rungs(f: &ScalarField, order: FracOrder, ladder: &[f64]) -> Result<Vec<ScalarField>> {
    check_space_time(f)?;
    check_ladder(ladder)?;
    let sig = order.sigma;
    let k = order.k as i32;
    let fact = gamma_real(order.k as f64 + 1.0);
    let gs = gamma_real(order.s);
    subordinated_rungs(
        f,
        1.0 + sig,
        |y| fact * y.powf(2.0 * sig) / (4f64.powf(sig) * gs),
        |z| (-z).powi(k),
        ladder,
    )
}

/// K(s)·lim y^a∂_y ℋ_a^{[s]}U.
pub fn dtn_higher(ext: &ExtensionField, f: &ScalarField) -> Result<Extrapolated> {
    if ext.variant != KernelVariant::Higher {
        return Err(Error::Shape("dtn_higher needs a higher-order extension".into()));
    }
    let order = ext.order;
    let w = higher_heat_rungs(f, order, &ext.y_ladder)?;
    let c = crate::fracops::k_const(order.s)?;
    let mut e = weighted_derivative_limit(&w, &ext.y_ladder, order.sigma)?;
    e.value = e.value.scale(c);
    e.error_estimate *= c.abs();
    Ok(e)
}

/// ‖(U_k − U_{k+1})/(y_k − y_{k+1})‖_p, an estimate of ‖∂_yU‖ at the rung midpoints.
pub fn odd_derivative_norms(ext: &ExtensionField, p: f64) -> Result<Vec<(f64, f64)>> {
    let y = &ext.y_ladder;
    (0..y.len() - 1)
        .map(|k| {
            let d = ext.rungs[k].sub(&ext.rungs[k + 1])?.scale(1.0 / (y[k] - y[k + 1]));
            let mid = 0.5 * (y[k] + y[k + 1]);
            Ok((mid, mid.powf(ext.order.a) * d.lp_norm(p)))
        })
        .collect()
}

/// Least-squares slope of log v against log y.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (m * sxy - sx * sy) / (m * sxx - sx * sx)
}

// ---------------------------------------------------------------------------
// finite differences on closed forms

/// A point (x, y, t).
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub x: Vec<f64>,
    pub y: f64,
    pub t: f64,
}

impl Probe {
    pub fn new(x: Vec<f64>, y: f64, t: f64) -> Self {
        Probe { x, y, t }
    }
}

type Fxyt<'a> = std::rc::Rc<dyn Fn(&[f64], f64, f64) -> f64 + 'a>;

fn d1(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

fn d2(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}

/// Individual terms [∂_yy, (a/y)∂_y, Δ_x, −∂_t] of ℋ_a F at a point, with
/// fourth-order central differences of step h (`a = None` drops the y part).
fn operator_terms(f: &Fxyt, x: &[f64], y: f64, t: f64, a: Option<f64>, h: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    if let Some(a) = a {
        out[0] = d2(|e| f(x, y + e, t), h);
        out[1] = a / y * d1(|e| f(x, y + e, t), h);
    }
    let mut xs = x.to_vec();
    let mut lap = 0.0;
    for i in 0..x.len() {
        lap += d2(
            |e| {
                let mut p = xs.clone();
                p[i] += e;
                f(&p, y, t)
            },
            h,
        );
    }
    xs.clear();
    out[2] = lap;
    out[3] = -d1(|e| f(x, y, t + e), h);
    out
}

fn apply_op<'a>(f: Fxyt<'a>, a: Option<f64>, h: f64) -> Fxyt<'a> {
    std::rc::Rc::new(move |x: &[f64], y: f64, t: f64| operator_terms(&f, x, y, t, a, h).iter().sum())
}

/// Value and term scale of ℋ_a^m F (or H^m F with `a = None`) at a probe,
/// with steps h and h/2 combined to cancel the h⁴ term.
fn power_at(f: Fxyt, m: u32, a: Option<f64>, h: f64, p: &Probe) -> (f64, f64) {
    let (c, _) = power_at_step(f.clone(), m, a, h, p);
    let (fine, scale) = power_at_step(f, m, a, h / 2.0, p);
    ((16.0 * fine - c) / 15.0, scale)
}

fn power_at_step(f: Fxyt, m: u32, a: Option<f64>, h: f64, p: &Probe) -> (f64, f64) {
    if m == 0 {
        let v = f(&p.x, p.y, p.t);
        return (v, v.abs());
    }
    let mut g = f;
    for _ in 1..m {
        g = apply_op(g, a, h);
    }
    let terms = operator_terms(&g, &p.x, p.y, p.t, a, h);
    let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (terms.iter().sum(), scale)
}

fn kernel_fn<'a>(s: f64) -> Fxyt<'a> {
    std::rc::Rc::new(move |x: &[f64], y: f64, t: f64| higher_kernel(x, y, t, s))
}

fn stencil_guard(p: &Probe, h: f64, m: u32) -> Result<()> {
    let reach = 2.0 * h * m as f64;
    if p.y <= reach || p.t <= reach {
        return Err(Error::Stencil(format!(
            "probe (y={}, t={}) within stencil reach {reach} of the boundary",
            p.y, p.t
        )));
    }
    Ok(())
}

/// Relative residual of one identity: |lhs − rhs| / max(term scales, |rhs|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub residual: f64,
    pub scale: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

fn residual(lhs: (f64, f64), rhs: (f64, f64)) -> IdentityResidual {
    IdentityResidual {
        residual: (lhs.0 - rhs.0).abs(),
        scale: lhs.1.max(rhs.1).max(lhs.0.abs()).max(rhs.0.abs()),
    }
}

/// (i) ℋ_a𝒫^(s) = (4s[s]/y²)(𝒫^(s) − 𝒫^(s+1)).
pub fn identity_i(order: FracOrder, p: &Probe, h: f64) -> Result<IdentityResidual> {
    stencil_guard(p, h, 1)?;
    let s = order.s;
    let lhs = power_at(kernel_fn(s), 1, Some(order.a), h, p);
    let k = order.k as f64;
    let rhs = 4.0 * s * k / (p.y * p.y) * (higher_kernel(&p.x, p.y, p.t, s) - higher_kernel(&p.x, p.y, p.t, s + 1.0));
    Ok(residual(lhs, (rhs, rhs.abs())))
}

/// (ii) H𝒫^(s) = (4s(1+s)/y²)(𝒫^(s+1) − 𝒫^(s+2)).
pub fn identity_ii(order: FracOrder, p: &Probe, h: f64) -> Result<IdentityResidual> {
    stencil_guard(p, h, 1)?;
    let s = order.s;
    let lhs = power_at(kernel_fn(s), 1, None, h, p);
    let rhs = 4.0 * s * (1.0 + s) / (p.y * p.y)
        * (higher_kernel(&p.x, p.y, p.t, s + 1.0) - higher_kernel(&p.x, p.y, p.t, s + 2.0));
    Ok(residual(lhs, (rhs, rhs.abs())))
}

/// (iii) ℋ_a𝒫^(s) = ([s]/(s−1))H𝒫^(s−1), s > 1.
pub fn identity_iii(order: FracOrder, p: &Probe, h: f64) -> Result<IdentityResidual> {
    if order.k == 0 {
        return Err(Error::Domain("identity (iii) needs s > 1".into()));
    }
    stencil_guard(p, h, 1)?;
    let s = order.s;
    let lhs = power_at(kernel_fn(s), 1, Some(order.a), h, p);
    let r = power_at(kernel_fn(s - 1.0), 1, None, h, p);
    let c = order.k as f64 / (s - 1.0);
    Ok(residual(lhs, (c * r.0, c.abs() * r.1)))
}

/// (iv) ℋ_a^{[s]}𝒫^(s) = [s]!Γ(σ)/Γ(s)·H^{[s]}𝒫^(σ).
pub fn identity_iv(order: FracOrder, p: &Probe, h: f64) -> Result<IdentityResidual> {
    if order.k == 0 {
        return Err(Error::Domain("identity (iv) needs s > 1".into()));
    }
    stencil_guard(p, h, order.k)?;
    let lhs = power_at(kernel_fn(order.s), order.k, Some(order.a), h, p);
    let r = power_at(kernel_fn(order.sigma), order.k, None, h, p);
    let c = gamma_real(order.k as f64 + 1.0) * gamma_real(order.sigma) / gamma_real(order.s);
    Ok(residual(lhs, (c * r.0, c * r.1)))
}

/// (v) ℋ_a^{[s]+1}𝒫^(s) = 0.
pub fn identity_v(order: FracOrder, p: &Probe, h: f64) -> Result<IdentityResidual> {
    stencil_guard(p, h, order.k + 1)?;
    let lhs = power_at(kernel_fn(order.s), order.k + 1, Some(order.a), h, p);
    Ok(residual(lhs, (0.0, 0.0)))
}

/// 𝔅^(a)(y^{1−a}V) = y^{1−a}𝔅^{(2−a)}V for V = G(x,t)e^{−y²/4t}t^{−(3−a)/2}.
pub fn intertwining(a: f64, p: &Probe, h: f64) -> Result<IdentityResidual> {
    stencil_guard(p, h, 1)?;
    let v = move |x: &[f64], y: f64, t: f64| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        heat_kernel_unchecked(x, t) * (-y * y / (4.0 * t)).exp() * t.powf(-(3.0 - a) / 2.0)
    };
    let weighted: Fxyt = std::rc::Rc::new(move |x: &[f64], y: f64, t: f64| y.powf(1.0 - a) * v(x, y, t));
    let lhs = power_at(weighted, 1, Some(a), h, p);
    let r = power_at(std::rc::Rc::new(v), 1, Some(2.0 - a), h, p);
    let w = p.y.powf(1.0 - a);
    Ok(residual(lhs, (w * r.0, w * r.1)))
}

/// 𝔅^(a)𝒫^(a) = 0 for the parabolic kernel.
pub fn parabolic_kernel_residual(a: f64, p: &Probe, h: f64) -> Result<IdentityResidual> {
    stencil_guard(p, h, 1)?;
    let f: Fxyt = std::rc::Rc::new(move |x: &[f64], y: f64, t: f64| parabolic_kernel(x, y, t, a));
    Ok(residual(power_at(f, 1, Some(a), h, p), (0.0, 0.0)))
}

/// ∂_yy + (a/y)∂_y + Δ_x of a function of (x, y), by fourth-order stencils.
fn elliptic_terms(f: &dyn Fn(&[f64], f64) -> f64, x: &[f64], y: f64, a: f64, h: f64) -> [f64; 3] {
    let mut lap = 0.0;
    for i in 0..x.len() {
        lap += d2(
            |e| {
                let mut p = x.to_vec();
                p[i] += e;
                f(&p, y)
            },
            h,
        );
    }
    [d2(|e| f(x, y + e), h), a / y * d1(|e| f(x, y + e), h), lap]
}

/// L_a P_s = 0 for the elliptic Poisson kernel.
pub fn elliptic_kernel_residual(s: f64, x: &[f64], y: f64, h: f64) -> Result<IdentityResidual> {
    if y <= 2.0 * h {
        return Err(Error::Stencil(format!("y = {y} within stencil reach")));
    }
    let t = elliptic_terms(&|x, y| elliptic_kernel(x, y, s), x, y, 1.0 - 2.0 * s, h);
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(IdentityResidual {
        residual: t.iter().sum::<f64>().abs(),
        scale,
    })
}

/// L_a(|x|²+y²)^{−(n−2s)/2} = 0 with a = 1 − 2s.
pub fn la_harmonicity_residual(n: usize, s: f64, x: &[f64], y: f64, h: f64) -> Result<IdentityResidual> {
    if x.len() != n {
        return Err(Error::Shape("probe dimension mismatch".into()));
    }
    if y <= 2.0 * h {
        return Err(Error::Stencil(format!("y = {y} within stencil reach")));
    }
    let p = -(n as f64 - 2.0 * s) / 2.0;
    let g = move |x: &[f64], y: f64| -> f64 { (x.iter().map(|v| v * v).sum::<f64>() + y * y).powf(p) };
    let t = elliptic_terms(&g, x, y, 1.0 - 2.0 * s, h);
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(IdentityResidual {
        residual: t.iter().sum::<f64>().abs(),
        scale,
    })
}

/// G_rr + ((n−1)/r)G_r + G_yy + (a/y)G_y for the radial profile at (r, y).
pub fn radial_form_residual(n: usize, s: f64, r: f64, y: f64, h: f64) -> Result<IdentityResidual> {
    if r <= 2.0 * h || y <= 2.0 * h {
        return Err(Error::Stencil("probe within stencil reach".into()));
    }
    let p = -(n as f64 - 2.0 * s) / 2.0;
    let g = |r: f64, y: f64| (r * r + y * y).powf(p);
    let a = 1.0 - 2.0 * s;
    let lhs = d2(|e| g(r + e, y), h) + (n as f64 - 1.0) / r * d1(|e| g(r + e, y), h);
    let rhs = -(d2(|e| g(r, y + e), h) + a / y * d1(|e| g(r, y + e), h));
    Ok(IdentityResidual {
        residual: (lhs - rhs).abs(),
        scale: lhs.abs().max(rhs.abs()),
    })
}

/// Ten deterministic interior probes with y ∈ [0.6, 1.1] and t ∈ [0.5, 1].
pub fn default_probes(n: usize) -> Vec<Probe> {
    (0..10)
        .map(|i| {
            let f = i as f64 / 9.0;
            let mut x = vec![0.0; n];
            x[0] = -0.9 + 1.5 * f;
            if n > 1 {
                x[1] = 0.4 - 0.6 * f;
            }
            if n > 2 {
                x[2] = 0.2 * f;
            }
            Probe::new(x, 0.6 + 0.5 * (1.0 - f), 0.5 + 0.5 * f)
        })
        .collect()
}

/// U(x,y,t) of the higher-order extension for a separable test function,
/// from the closed-form heat evolution and real quadrature in τ.
pub fn higher_extension_at(f: &SpaceTimeFunction, s: f64, x: &[f64], y: f64, t: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain("higher extension needs y > 0".into()));
    }
    let f0 = f.eval(x, t).re;
    let c = y * y / 4.0;
    let spec = QuadSpec::new(1e-15, 1e-13, 12, c)?;
    let r = integrate_halfline(
        |tau: f64| {
            if tau == 0.0 {
                return 0.0;
            }
            tau.powf(-1.0 - s) * (-c / tau).exp() * (f.evolve(x, t, tau).re - f0)
        },
        &spec,
    )?;
    Ok(f0 + y.powf(2.0 * s) / (4f64.powf(s) * gamma_real(s)) * r.value)
}

/// ℋ_a^{[s]+1}U at a probe for the pointwise higher extension, relative to
/// the largest term of the last operator application.
pub fn higher_pde_residual(f: &SpaceTimeFunction, order: FracOrder, p: &Probe, h: f64) -> Result<IdentityResidual> {
    stencil_guard(p, h, order.k + 1)?;
    let g = f.clone();
    let s = order.s;
    let u: Fxyt = std::rc::Rc::new(move |x: &[f64], y: f64, t: f64| {
        higher_extension_at(&g, s, x, y, t).unwrap_or(f64::NAN)
    });
    let v = power_at(u, order.k + 1, Some(order.a), h, p);
    if !v.0.is_finite() {
        return Err(Error::Convergence {
            what: "pointwise extension quadrature".into(),
            partial: v.0,
            estimate: f64::NAN,
        });
    }
    Ok(residual(v, (0.0, 0.0)))
}

// ---------------------------------------------------------------------------
// symbolic y-derivatives

/// One term q·y^m/(2^p(s−1)(s−2)…(s−p))·H^p𝒫^(s−p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct KernelTerm {
    pub hpow: u32,
    pub ypow: i32,
    pub coef: i64,
}

/// Σ of [`KernelTerm`]s for a fixed order s.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCombination {
    pub s: f64,
    pub terms: Vec<KernelTerm>,
}

impl KernelCombination {
    /// 𝒫^(s) itself.
    pub fn kernel(s: f64) -> Self {
        KernelCombination {
            s,
            terms: vec![KernelTerm {
                hpow: 0,
                ypow: 0,
                coef: 1,
            }],
        }
    }

    /// Exact prefactor 1/(2^p(s−1)…(s−p)) of a term.
    pub fn prefactor(&self, p: u32) -> f64 {
        (1..=p).fold(1.0, |acc, i| acc / (2.0 * (self.s - i as f64)))
    }

    /// c_k(i) in ∂_y^k𝒫^(s) = Σ_i c_k(i)y^{k−2i}/2^{k−i}·Γ(s−k)/Γ(s)·H^{k−i}𝒫^(s−k+i).
    pub fn structure_coefficient(&self, k: u32, term: &KernelTerm) -> f64 {
        let p = term.hpow;
        let extra: f64 = (p + 1..=k).map(|j| self.s - j as f64).product();
        term.coef as f64 * extra
    }

    /// Numerical value at a probe via H𝒫^(r) = (4r(1+r)/y²)(𝒫^(r+1) − 𝒫^(r+2)).
    pub fn eval(&self, p: &Probe) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let r = self.s - t.hpow as f64;
                let pre = self.prefactor(t.hpow) * t.coef as f64 * p.y.powi(t.ypow);
                pre * heat_power_of_kernel(r, t.hpow, p)
            })
            .sum()
    }
}

/// H^m𝒫^(r) at a probe, expanded through the heat identity.
pub fn heat_power_of_kernel(r: f64, m: u32, p: &Probe) -> f64 {
    // coefficients of y^{−2m}𝒫^(r+j)
    let mut c: Vec<f64> = vec![1.0];
    for _ in 0..m {
        let mut next = vec![0.0; c.len() + 2];
        for (j, v) in c.iter().enumerate() {
            let q = r + j as f64;
            let w = 4.0 * q * (1.0 + q);
            next[j + 1] += w * v;
            next[j + 2] -= w * v;
        }
        c = next;
    }
    let y2m = p.y.powi(-2 * m as i32);
    c.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| v * y2m * higher_kernel(&p.x, p.y, p.t, r + j as f64))
        .sum()
}

/// ∂_y^k of a combination, by ∂_y𝒫^(r) = y/(2(r−1))·H𝒫^(r−1) and the product rule.
pub fn symbolic_y_derivative(expr: &KernelCombination, k: u32) -> KernelCombination {
    let mut cur: BTreeMap<(u32, i32), i64> = expr.terms.iter().map(|t| ((t.hpow, t.ypow), t.coef)).collect();
    for _ in 0..k {
        let mut next: BTreeMap<(u32, i32), i64> = BTreeMap::new();
        for (&(p, m), &q) in &cur {
            if m != 0 {
                *next.entry((p, m - 1)).or_insert(0) += q * m as i64;
            }
            *next.entry((p + 1, m + 1)).or_insert(0) += q;
        }
        next.retain(|_, v| *v != 0);
        cur = next;
    }
    KernelCombination {
        s: expr.s,
        terms: cur
            .into_iter()
            .map(|((hpow, ypow), coef)| KernelTerm { hpow, ypow, coef })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// check suites

fn worst<F>(probes: &[Probe], f: F) -> Result<f64>
where
    F: Fn(&Probe) -> Result<IdentityResidual>,
{
    let mut w = 0.0f64;
    for p in probes {
        w = w.max(f(p)?.relative());
    }
    Ok(w)
}

/// Identities (i)–(v), the annihilation refinement, intertwining and the
/// parabolic kernel equation at the probes; each is one check.
pub fn kernel_identity_suite(order: FracOrder, probes: &[Probe], tol_scale: f64) -> Vec<CheckReport> {
    let h = 0.04;
    let tol = 1e-4 * tol_scale;
    let id = |name: &str| format!("extension.kernel.{name}");
    let mut out = vec![
        timed(&id("i"), || Ok(CheckReport::bound("", worst(probes, |p| identity_i(order, p, h))?, tol))),
        timed(&id("ii"), || Ok(CheckReport::bound("", worst(probes, |p| identity_ii(order, p, h))?, tol))),
    ];
    if order.k >= 1 {
        out.push(timed(&id("iii"), || {
            Ok(CheckReport::bound("", worst(probes, |p| identity_iii(order, p, h))?, tol))
        }));
        out.push(timed(&id("iv"), || {
            Ok(CheckReport::bound("", worst(probes, |p| identity_iv(order, p, h))?, tol))
        }));
    } else {
        out.push(CheckReport::skipped(&id("iii"), "needs s > 1"));
        out.push(CheckReport::skipped(&id("iv"), "needs s > 1"));
    }
    out.push(timed(&id("v"), || Ok(CheckReport::bound("", worst(probes, |p| identity_v(order, p, h))?, tol))));
    out.push(timed(&id("v_refinement"), || {
        let coarse = worst(probes, |p| identity_v(order, p, 2.0 * h))?;
        let fine = worst(probes, |p| identity_v(order, p, h))?;
        let ratio = coarse / fine;
        Ok(CheckReport::compare("", ratio, 4.0, 0.0, false).with_status(ratio >= 4.0))
    }));
    out.push(timed(&id("intertwining"), || {
        Ok(CheckReport::bound("", worst(probes, |p| intertwining(order.a, p, h))?, tol))
    }));
    out.push(timed(&id("parabolic_pde"), || {
        Ok(CheckReport::bound("", worst(probes, |p| parabolic_kernel_residual(order.a, p, h))?, tol))
    }));
    out
}

/// L_aG = 0 for the fundamental solution; probes (x, y) in dimension n.
pub fn la_harmonicity_check(n: usize, s: f64, probes: &[(Vec<f64>, f64)], tol_scale: f64) -> Vec<CheckReport> {
    let h = 0.01;
    let tol = 1e-5 * tol_scale;
    vec![
        timed(&format!("extension.la_harmonic.n{n}"), || {
            let mut w = 0.0f64;
            for (x, y) in probes {
                w = w.max(la_harmonicity_residual(n, s, x, *y, h)?.relative());
            }
            Ok(CheckReport::bound("", w, tol))
        }),
        timed(&format!("extension.radial_form.n{n}"), || {
            let mut w = 0.0f64;
            for (x, y) in probes {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                w = w.max(radial_form_residual(n, s, r, *y, h)?.relative());
            }
            Ok(CheckReport::bound("", w, tol))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TestFunction;
    use crate::fracops::{fracheat_multiplier, fraclap_spectral, fraclap_spectral_padded, riesz_const};
    use crate::report::Status;

    fn space_time_grid() -> GridSpec {
        GridSpec::new(1, 32, 4.0).unwrap().with_time(32, 4.0).unwrap()
    }

    fn gauss_gauss() -> SpaceTimeFunction {
        SpaceTimeFunction {
            space: TestFunction::gaussian(1.0),
            time_c: 1.0,
        }
    }

    #[test]
    fn half_order_kernel_is_classical() {
        for (x, y) in [(0.0, 1.0), (0.7, 0.3), (-2.0, 0.05)] {
            let p = elliptic_kernel(&[x], y, 0.5);
            assert!((p - y / (PI * (x * x + y * y))).abs() < 1e-14 * p.max(1.0));
        }
        assert!(PoissonKernel::elliptic(1, 1.5).is_err());
        assert!(PoissonKernel::higher(1, 3.5).is_err());
    }

    #[test]
    fn unit_masses() {
        for n in [1, 2] {
            for s in [0.25, 0.5, 0.75] {
                for y in [0.1, 1.0] {
                    let m = PoissonKernel::elliptic(n, s).unwrap().mass(y).unwrap();
                    assert!((m - 1.0).abs() < 1e-6, "elliptic n={n} s={s}: {m}");
                }
                let m = PoissonKernel::parabolic(n, s).unwrap().mass(0.3).unwrap();
                assert!((m - 1.0).abs() < 1e-6, "parabolic n={n} s={s}: {m}");
            }
        }
        for s in [1.5, 2.5] {
            let m = PoissonKernel::higher(1, s).unwrap().mass(0.5).unwrap();
            assert!((m - 1.0).abs() < 1e-6, "higher s={s}: {m}");
        }
        for a in [-0.5, 0.0, 0.5] {
            let m = normalized_gaussian_mass(1, a, 0.4).unwrap();
            assert!((m - 1.0).abs() < 1e-6, "gaussian a={a}: {m}");
        }
    }

    #[test]
    fn elliptic_multiplier_limits() {
        // s = 1/2: the transform of the classical Poisson kernel is e^{−2πy|ξ|}
        for (xi, y) in [(0.3, 0.4), (1.2, 0.1), (5.0, 0.4)] {
            let m = elliptic_multiplier(xi, y, 0.5).unwrap();
            assert!((m - (-2.0 * PI * y * xi).exp()).abs() < 1e-13);
        }
        // small argument: 1 + Γ(−s)/Γ(s)(πy|ξ|)^{2s}
        for s in [0.25, 0.75] {
            let (xi, y) = (1e-6, 0.5);
            let z = PI * y * xi;
            let m = elliptic_multiplier(xi, y, s).unwrap();
            let lead = gamma_real(-s) / gamma_real(s) * z.powf(2.0 * s);
            assert!(((m - 1.0) / lead - 1.0).abs() < 1e-2, "s={s}");
        }
        assert_eq!(elliptic_multiplier(0.0, 0.3, 0.25).unwrap(), 1.0);
    }

    #[test]
    fn poisson_kernel_is_fractional_laplacian_of_fundamental_solution() {
        // Ê_{s,y}(ξ) = α(n,s)·2π^{n/2−s}/Γ(n/2−s)·(y/|ξ|)^s K_s(2πy|ξ|)
        for n in [1usize, 3] {
            let s = if n == 1 { 0.25 } else { 0.5 };
            let nu = (n as f64 - 2.0 * s) / 2.0;
            for (xi, y) in [(0.2, 0.5), (0.9, 0.3)] {
                let z = 2.0 * PI * y * xi;
                let e_hat = riesz_const(n, s).unwrap() * 2.0 * PI.powf(nu) / gamma_real(nu)
                    * (y / xi).powf(s)
                    * bessel(BesselKind::K, s, z).unwrap().re();
                let lhs = (2.0 * PI * xi).powf(2.0 * s) * e_hat;
                let rhs = elliptic_multiplier(xi, y, s).unwrap();
                assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn ladder_validation() {
        let u = TestFunction::gaussian(PI).sample(GridSpec::default_for(1).unwrap());
        assert!(matches!(solve_elliptic(&u, 0.5, &[]), Err(Error::Ladder(_))));
        assert!(matches!(solve_elliptic(&u, 0.5, &[0.2, 0.3]), Err(Error::Ladder(_))));
        assert!(matches!(solve_elliptic(&u, 0.5, &[0.2, -0.1]), Err(Error::Ladder(_))));
        let e = solve_elliptic(&u, 0.5, &[0.4, 0.2, 0.1]).unwrap();
        assert!(matches!(dtn_elliptic(&e, 0.5), Err(Error::Ladder(_))));
        assert_eq!(default_ladder().len(), 7);
    }

    #[test]
    fn exponents_by_sigma() {
        assert_eq!(ladder_exponents(0.5, 4), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ladder_exponents(0.25, 4), vec![1.5, 2.0, 3.5, 4.0]);
        assert_eq!(ladder_exponents(0.75, 4), vec![0.5, 2.0, 2.5, 4.0]);
    }

    #[test]
    fn richardson_removes_known_exponents() {
        let g = GridSpec::new(1, 32, 1.0).unwrap();
        let ys: Vec<f64> = (0..6).map(|k| 0.5f64.powi(k)).collect();
        let exps = [0.5, 2.0, 2.5, 4.0, 4.5];
        let seq: Vec<ScalarField> = ys
            .iter()
            .map(|y| {
                let v = 3.0 + y.powf(0.5) - 2.0 * y * y + 0.7 * y.powf(2.5) + 0.1 * y.powi(4);
                ScalarField::from_real_fn(g, |_| v)
            })
            .collect();
        let (r, est) = richardson(&seq, 2.0, &exps).unwrap();
        assert!((r.samples[0].re - 3.0).abs() < 1e-10);
        assert!(est < 1e-9);
        let bad: Vec<ScalarField> = (0..5)
            .map(|k| ScalarField::from_real_fn(g, |_| 4f64.powi(k) * if k % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let r = richardson(&bad, 2.0, &exps);
        assert!(matches!(r, Err(Error::Extrapolation(_))), "{r:?}");
    }

    #[test]
    fn elliptic_dtn_matches_spectral() {
        let g = GridSpec::default_for(1).unwrap();
        let u = TestFunction::gaussian(PI).sample(g);
        let keep = |i: usize| g.in_interior(i, 0.5);
        for s in [0.25, 0.5, 0.75] {
            let ext = solve_elliptic(&u, s, &default_ladder()).unwrap();
            let errs = ext.trace_errors(&u, f64::INFINITY).unwrap();
            assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
            let d = dtn_elliptic(&ext, s).unwrap();
            let sp = fraclap_spectral_padded(&u, s, default_padding(1)).unwrap();
            let rel = d.value.max_diff_where(&sp, keep) / sp.max_abs_where(keep);
            assert!(rel < 1e-2, "s={s}: {rel}");
        }
        let ext = solve_elliptic(&u, 0.5, &default_ladder()).unwrap();
        let d = dtn_elliptic(&ext, 0.5).unwrap();
        assert!((d.value.at_origin().re - 2.0).abs() < 2e-3);
        let zero = ScalarField::zeros(g, Space::Physical);
        let d = dtn_elliptic(&solve_elliptic(&zero, 0.5, &default_ladder()).unwrap(), 0.5).unwrap();
        assert_eq!(d.value.max_abs(), 0.0);
    }

    #[test]
    fn parabolic_dtn_matches_multiplier() {
        let g = space_time_grid();
        let f = gauss_gauss().sample(g).unwrap();
        for s in [0.25, 0.5] {
            let ext = solve_parabolic(&f, s, &default_ladder()).unwrap();
            let errs = ext.trace_errors(&f, 2.0).unwrap();
            assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
            let d = dtn_parabolic(&ext, s).unwrap();
            let orc = fracheat_multiplier(&f, s).unwrap();
            let rel = d.value.sub(&orc).unwrap().max_abs() / orc.max_abs();
            assert!(rel < 1e-2, "s={s}: {rel}");
        }
        let zero = ScalarField::zeros(g, Space::Physical);
        let d = dtn_parabolic(&solve_parabolic(&zero, 0.5, &default_ladder()).unwrap(), 0.5).unwrap();
        assert_eq!(d.value.max_abs(), 0.0);
    }

    #[test]
    fn time_independent_data_reduces_to_elliptic() {
        let g = space_time_grid();
        let f = ScalarField::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let u = ScalarField::from_real_fn(GridSpec::new(1, 32, 4.0).unwrap(), |x| (-x[0] * x[0]).exp());
        let s = 0.5;
        let d = dtn_parabolic(&solve_parabolic(&f, s, &default_ladder()).unwrap(), s).unwrap();
        let sp = fraclap_spectral(&u, s).unwrap();
        for i in 0..g.len() {
            let j = i / 32;
            assert!((d.value.samples[i] - sp.samples[j]).norm() < 1e-6);
        }
    }

    #[test]
    fn higher_matches_parabolic_below_one() {
        let g = space_time_grid();
        let f = gauss_gauss().sample(g).unwrap();
        for s in [0.25, 0.75] {
            let a = solve_higher(&f, s, &default_ladder()).unwrap();
            let b = solve_parabolic(&f, s, &default_ladder()).unwrap();
            for (x, y) in a.rungs.iter().zip(&b.rungs) {
                assert!(x.sub(y).unwrap().max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn higher_dtn_matches_multiplier() {
        let g = space_time_grid();
        let f = gauss_gauss().sample(g).unwrap();
        assert!((crate::fracops::k_const(1.5).unwrap() - 0.5).abs() < 1e-14);
        for s in [1.5, 2.25] {
            let ext = solve_higher(&f, s, &default_ladder()).unwrap();
            let d = dtn_higher(&ext, &f).unwrap();
            let orc = fracheat_multiplier(&f, s).unwrap();
            let rel = d.value.sub(&orc).unwrap().max_abs() / orc.max_abs();
            assert!(rel < 2e-2, "s={s}: {rel}");
        }
    }

    #[test]
    fn boundary_behavior_for_s_three_halves() {
        let g = space_time_grid();
        let f = gauss_gauss().sample(g).unwrap();
        let ext = solve_higher(&f, 1.5, &default_ladder()).unwrap();
        let errs = ext.trace_errors(&f, 2.0).unwrap();
        let pts: Vec<(f64, f64)> = ext.y_ladder.iter().cloned().zip(errs).collect();
        let slope = loglog_slope(&pts);
        assert!((slope - 2.0).abs() < 0.2, "{slope}");
        let d = odd_derivative_norms(&ext, 2.0).unwrap();
        let e = loglog_slope(&d);
        assert!(e > 0.5, "{e}");
    }

    #[test]
    fn symbolic_derivative_coefficients() {
        let k = KernelCombination::kernel(1.5);
        assert_eq!(symbolic_y_derivative(&k, 0), k);
        let t = |h, y, c| KernelTerm {
            hpow: h,
            ypow: y,
            coef: c,
        };
        assert_eq!(symbolic_y_derivative(&k, 1).terms, vec![t(1, 1, 1)]);
        assert_eq!(symbolic_y_derivative(&k, 3).terms, vec![t(2, 1, 3), t(3, 3, 1)]);
        assert_eq!(symbolic_y_derivative(&k, 5).terms, vec![t(3, 1, 15), t(4, 3, 10), t(5, 5, 1)]);
        // ∂_y𝒫^(s) = y/(2(s−1))·H𝒫^(s−1)
        let d1 = symbolic_y_derivative(&k, 1);
        assert!((d1.prefactor(1) - 1.0 / (2.0 * 0.5)).abs() < 1e-15);
        // ∂³_y leading term 3·(y/2²)/((s−1)(s−2))·H²𝒫^(s−2)
        let d3 = symbolic_y_derivative(&KernelCombination::kernel(2.5), 3);
        let lead = d3.terms[0];
        assert!((lead.coef as f64 * d3.prefactor(2) - 3.0 / (4.0 * 1.5 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn symbolic_derivative_matches_differences() {
        for s in [0.5, 1.5, 2.5] {
            let p = Probe::new(vec![0.3], 0.8, 0.5);
            let f = |y: f64| higher_kernel(&p.x, y, p.t, s);
            let h = 0.01;
            let num1 = d1(|e| f(p.y + e), h);
            let sym1 = symbolic_y_derivative(&KernelCombination::kernel(s), 1).eval(&p);
            assert!((num1 - sym1).abs() < 1e-7 * sym1.abs().max(1.0), "s={s}: {num1} vs {sym1}");
            let h = 0.05;
            let num3 = (f(p.y + 2.0 * h) - 2.0 * f(p.y + h) + 2.0 * f(p.y - h) - f(p.y - 2.0 * h)) / (2.0 * h * h * h);
            let num3h = {
                let h = h / 2.0;
                (f(p.y + 2.0 * h) - 2.0 * f(p.y + h) + 2.0 * f(p.y - h) - f(p.y - 2.0 * h)) / (2.0 * h * h * h)
            };
            let num3 = (4.0 * num3h - num3) / 3.0;
            let sym3 = symbolic_y_derivative(&KernelCombination::kernel(s), 3).eval(&p);
            assert!((num3 - sym3).abs() < 1e-4 * sym3.abs().max(1.0), "s={s}: {num3} vs {sym3}");
        }
    }

    #[test]
    fn odd_derivative_vanishes_at_boundary() {
        // y^a∂_y𝒫^(s) → 0 as y → 0 for s = 1.5 (k = 1 ≤ [s])
        let o = FracOrder::new(1.5).unwrap();
        let d = symbolic_y_derivative(&KernelCombination::kernel(o.s), 1);
        let pts: Vec<(f64, f64)> = [0.1f64, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&y| (y, y.powf(o.a) * d.eval(&Probe::new(vec![0.2], y, 0.5)).abs()))
            .collect();
        assert!(loglog_slope(&pts) > 0.5);
    }

    #[test]
    fn identity_suite_passes() {
        for s in [0.5, 1.5, 2.5] {
            let o = FracOrder::new(s).unwrap();
            let r = kernel_identity_suite(o, &default_probes(1), 1.0);
            for c in &r {
                assert!(c.passed(), "s={s}: {c:?}");
                if o.k == 0 && (c.check_id.ends_with(".iii") || c.check_id.ends_with(".iv")) {
                    assert_eq!(c.status, Status::Skip);
                }
            }
        }
        let o = FracOrder::new(1.5).unwrap();
        let r = identity_i(o, &Probe::new(vec![0.3], 0.8, 0.5), 0.04).unwrap();
        assert!(r.relative() < 1e-4);
    }

    #[test]
    fn stencil_guard_near_boundary() {
        let o = FracOrder::new(1.5).unwrap();
        let p = Probe::new(vec![0.0], 0.05, 0.5);
        assert!(matches!(identity_v(o, &p, 0.04), Err(Error::Stencil(_))));
        let p = Probe::new(vec![0.0], 0.5, 0.01);
        assert!(matches!(identity_i(o, &p, 0.04), Err(Error::Stencil(_))));
    }

    #[test]
    fn la_harmonicity() {
        let r = la_harmonicity_residual(3, 0.5, &[1.0, 0.0, 0.0], 1.0, 0.02).unwrap();
        assert!(r.relative() < 1e-5);
        let probes = vec![(vec![0.7, -0.4], 0.5), (vec![1.2, 0.3], 1.1)];
        for c in la_harmonicity_check(2, 0.25, &probes, 1.0) {
            assert!(c.passed(), "{c:?}");
        }
        let r = elliptic_kernel_residual(0.3, &[0.4], 0.7, 0.02).unwrap();
        assert!(r.relative() < 1e-5);
    }

    #[test]
    fn higher_extension_equation() {
        let f = gauss_gauss();
        let o = FracOrder::new(1.5).unwrap();
        for p in default_probes(1).iter().step_by(3) {
            let coarse = higher_pde_residual(&f, o, p, 0.08).unwrap().relative();
            let fine = higher_pde_residual(&f, o, p, 0.04).unwrap().relative();
            assert!(fine < 1e-3 && fine < coarse, "{coarse} {fine}");
        }
        // the pointwise evaluator agrees with the grid solver on a grid node
        let g = space_time_grid();
        let ext = solve_higher(&f.sample(g).unwrap(), 1.5, &default_ladder()).unwrap();
        let i = g.flat_index(&[16, 16]);
        let v = higher_extension_at(&f, 1.5, &[0.0], ext.y_ladder[2], 0.0).unwrap();
        assert!((ext.rungs[2].samples[i].re - v).abs() < 1e-6);
    }
}
