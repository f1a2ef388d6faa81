//! Sampled fields on centered boxes [−L, L)ⁿ (optionally × [−T, T) in time),
//! the Fourier transform û(ξ) = ∫e^{−2πi⟨ξ,x⟩}u(x)dx on the dual lattice
//! ξ_k = k/(2L), convolution, and the catalog of test functions.
//!
//! Samples are stored row-major with x0 slowest and, for space-time fields,
//! t fastest. Frequency-space fields use the same index order, with index j
//! on an axis standing for the lattice frequency (j − N/2)/(2L).

use crate::error::{Error, Result};
use crate::quad::{integrate_halfline, QuadSpec};
use crate::specfun::{bessel, BesselKind, SpecialValue};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

pub const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Time axis of a space-time grid: `points` samples on [−half_width, half_width).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAxis {
    pub points: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub half_width: f64,
    pub time_axis: Option<TimeAxis>,
}

fn check_axis(points: usize, half_width: f64, what: &str) -> Result<()> {
    if points < 32 || !points.is_power_of_two() {
        return Err(Error::Shape(format!(
            "{what}: points must be a power of two >= 32, got {points}"
        )));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Shape(format!("{what}: half width must be positive")));
    }
    Ok(())
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, half_width: f64) -> Result<Self> {
        let g = GridSpec {
            dim,
            points_per_axis,
            half_width,
            time_axis: None,
        };
        g.validate()?;
        Ok(g)
    }

    /// Default box for dimension n: L = 12 with 256 points per axis (64 for n = 3).
    pub fn default_for(dim: usize) -> Result<Self> {
        GridSpec::new(dim, if dim == 3 { 64 } else { 256 }, 12.0)
    }

    pub fn with_time(mut self, points: usize, half_width: f64) -> Result<Self> {
        self.time_axis = Some(TimeAxis { points, half_width });
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Shape(format!("dimension {} not in 1..=3", self.dim)));
        }
        check_axis(self.points_per_axis, self.half_width, "space axis")?;
        if let Some(t) = self.time_axis {
            check_axis(t.points, t.half_width, "time axis")?;
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    pub fn time_spacing(&self) -> Option<f64> {
        self.time_axis.map(|t| 2.0 * t.half_width / t.points as f64)
    }

    /// Axis lengths in storage order.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.points_per_axis; self.dim];
        if let Some(t) = self.time_axis {
            s.push(t.points);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spatial cell volume hⁿ.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Cell volume including the time step, if any.
    pub fn full_cell_volume(&self) -> f64 {
        self.cell_volume() * self.time_spacing().unwrap_or(1.0)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for a in (0..shape.len()).rev() {
            idx[a] = flat % shape[a];
            flat /= shape[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let shape = self.shape();
        let mut f = 0;
        for (a, &i) in idx.iter().enumerate() {
            f = f * shape[a] + i;
        }
        f
    }

    /// Physical coordinates (x0, …, x{n−1}[, t]) of a flat index.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let mut c: Vec<f64> = (0..self.dim).map(|a| -self.half_width + idx[a] as f64 * h).collect();
        if let Some(t) = self.time_axis {
            let ht = 2.0 * t.half_width / t.points as f64;
            c.push(-t.half_width + idx[self.dim] as f64 * ht);
        }
        c
    }

    /// Dual coordinates (ξ0, …, ξ{n−1}[, σ̃]) of a flat index.
    pub fn freqs(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        let n = self.points_per_axis as f64;
        let mut c: Vec<f64> = (0..self.dim)
            .map(|a| (idx[a] as f64 - n / 2.0) / (2.0 * self.half_width))
            .collect();
        if let Some(t) = self.time_axis {
            c.push((idx[self.dim] as f64 - t.points as f64 / 2.0) / (2.0 * t.half_width));
        }
        c
    }

    /// The flat index of the grid point nearest to the spatial origin (and t = 0).
    pub fn origin_index(&self) -> usize {
        let mut idx = vec![self.points_per_axis / 2; self.dim];
        if let Some(t) = self.time_axis {
            idx.push(t.points / 2);
        }
        self.flat_index(&idx)
    }

    /// Same spacing, `factor` times as many points per spatial axis.
    pub fn padded(&self, factor: usize) -> Result<GridSpec> {
        let g = GridSpec {
            points_per_axis: self.points_per_axis * factor,
            half_width: self.half_width * factor as f64,
            ..*self
        };
        g.validate()?;
        Ok(g)
    }

    /// True if every spatial coordinate lies in [−L·frac, L·frac].
    pub fn in_interior(&self, flat: usize, frac: f64) -> bool {
        let c = self.coords(flat);
        c[..self.dim].iter().all(|x| x.abs() <= frac * self.half_width + 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Physical,
    Frequency,
}

/// Diagnostics carried along with computed fields.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// An input exceeded 1e−8 at the box boundary, so periodization is visible.
    Alias { max_boundary: f64 },
    /// σ is within 1e−3 of 0 or 1.
    Conditioning { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub samples: Vec<Complex64>,
    pub space: Space,
    pub warnings: Vec<Warning>,
}

/// A field whose grid carries a time axis; dual variables are (ξ, σ̃).
pub type SpaceTimeField = ScalarField;

pub const ALIAS_THRESHOLD: f64 = 1e-8;

impl ScalarField {
    pub fn zeros(grid: GridSpec, space: Space) -> Self {
        ScalarField {
            samples: vec![C0; grid.len()],
            grid,
            space,
            warnings: Vec::new(),
        }
    }

    /// Samples a function of the physical coordinates (x0, …[, t]).
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let samples = (0..grid.len()).into_par_iter().map(|i| f(&grid.coords(i))).collect();
        ScalarField {
            grid,
            samples,
            space: Space::Physical,
            warnings: Vec::new(),
        }
    }

    pub fn from_real_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        ScalarField::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Samples a function of the dual coordinates as a frequency-space field.
    pub fn from_freq_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let samples = (0..grid.len()).into_par_iter().map(|i| f(&grid.freqs(i))).collect();
        ScalarField {
            grid,
            samples,
            space: Space::Frequency,
            warnings: Vec::new(),
        }
    }

    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        ScalarField {
            grid: self.grid,
            samples,
            space: self.space,
            warnings: self.warnings.clone(),
        }
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.with_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.with_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect()))
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid != other.grid || self.space != other.space {
            return Err(Error::Shape("fields live on different grids or spaces".into()));
        }
        Ok(())
    }

    pub fn at(&self, idx: &[usize]) -> Complex64 {
        self.samples[self.grid.flat_index(idx)]
    }

    pub fn at_origin(&self) -> Complex64 {
        self.samples[self.grid.origin_index()]
    }

    pub fn real(&self) -> Vec<f64> {
        self.samples.iter().map(|v| v.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Largest |u| on the outermost layer of spatial grid points.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.points_per_axis;
        let dim = self.grid.dim;
        let mut m: f64 = 0.0;
        for (i, v) in self.samples.iter().enumerate() {
            let idx = self.grid.multi_index(i);
            if idx[..dim].iter().any(|&j| j == 0 || j == n - 1) {
                m = m.max(v.norm());
            }
        }
        m
    }

    /// Σ|u|^p·cell (p = 1, 2) or max |u| (p = ∞), over all samples.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let cell = self.cell_measure();
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.samples.iter().map(|v| v.norm().powf(p)).sum();
        (s * cell).powf(1.0 / p)
    }

    /// Σu·cell
    pub fn integral(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() * self.cell_measure()
    }

    fn cell_measure(&self) -> f64 {
        match self.space {
            Space::Physical => self.grid.full_cell_volume(),
            Space::Frequency => {
                let mut c = (1.0 / (2.0 * self.grid.half_width)).powi(self.grid.dim as i32);
                if let Some(t) = self.grid.time_axis {
                    c /= 2.0 * t.half_width;
                }
                c
            }
        }
    }

    /// Max |a − b| over indices where `keep` holds.
    pub fn max_diff_where<K: Fn(usize) -> bool>(&self, other: &ScalarField, keep: K) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .fold(0.0, |m, (_, (a, b))| m.max((a - b).norm()))
    }

    pub fn max_abs_where<K: Fn(usize) -> bool>(&self, keep: K) -> f64 {
        self.samples
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .fold(0.0, |m, (_, a)| m.max(a.norm()))
    }

    pub fn alias_check(&mut self) {
        if self.space == Space::Physical {
            let b = self.boundary_max();
            if b > ALIAS_THRESHOLD {
                self.warnings.push(Warning::Alias { max_boundary: b });
            }
        }
    }

    /// Zero-extended copy on a grid with `factor` times the points (same spacing).
    pub fn zero_pad(&self, factor: usize) -> Result<ScalarField> {
        if self.space != Space::Physical {
            return Err(Error::Shape("zero padding needs a physical field".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let big = self.grid.padded(factor)?;
        let off = (big.points_per_axis - self.grid.points_per_axis) / 2;
        let dim = self.grid.dim;
        let mut out = ScalarField::zeros(big, Space::Physical);
        out.warnings = self.warnings.clone();
        for (i, v) in self.samples.iter().enumerate() {
            let mut idx = self.grid.multi_index(i);
            for j in idx.iter_mut().take(dim) {
                *j += off;
            }
            out.samples[big.flat_index(&idx)] = *v;
        }
        Ok(out)
    }

    /// Central block of a padded field on the original grid.
    pub fn crop(&self, grid: GridSpec) -> Result<ScalarField> {
        let big = self.grid;
        if big.dim != grid.dim || big.time_axis != grid.time_axis || big.spacing() != grid.spacing() {
            return Err(Error::Shape("crop target grid is incompatible".into()));
        }
        let off = (big.points_per_axis - grid.points_per_axis) / 2;
        let mut out = ScalarField::zeros(grid, self.space);
        out.warnings = self.warnings.clone();
        for i in 0..grid.len() {
            let mut idx = grid.multi_index(i);
            for j in idx.iter_mut().take(grid.dim) {
                *j += off;
            }
            out.samples[i] = self.samples[big.flat_index(&idx)];
        }
        Ok(out)
    }

    /// Writes `x0,…,x{n−1}[,t],value_re,value_im` rows (frequency fields use
    /// the dual coordinates under the same header), atomically.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv(None).as_bytes())
    }

    /// CSV text; with `y` set, a `y` column is appended after the coordinates.
    pub fn to_csv(&self, y: Option<f64>) -> String {
        let mut s = csv_header(&self.grid, y.is_some());
        for i in 0..self.samples.len() {
            let c = match self.space {
                Space::Physical => self.grid.coords(i),
                Space::Frequency => self.grid.freqs(i),
            };
            for x in &c {
                s.push_str(&fmt_g17(*x));
                s.push(',');
            }
            if let Some(y) = y {
                s.push_str(&fmt_g17(y));
                s.push(',');
            }
            s.push_str(&fmt_g17(self.samples[i].re));
            s.push(',');
            s.push_str(&fmt_g17(self.samples[i].im));
            s.push('\n');
        }
        s
    }
}

pub fn csv_header(grid: &GridSpec, with_y: bool) -> String {
    let mut cols: Vec<String> = (0..grid.dim).map(|a| format!("x{a}")).collect();
    if grid.time_axis.is_some() {
        cols.push("t".into());
    }
    if with_y {
        cols.push("y".into());
    }
    cols.push("value_re".into());
    cols.push("value_im".into());
    let mut s = cols.join(",");
    s.push('\n');
    s
}

/// C-style `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let e_form = format!("{:.*e}", (P - 1) as usize, v);
    let (mant, exp) = e_form.split_once('e').unwrap();
    let x: i32 = exp.parse().unwrap();
    if x < -4 || x >= P {
        let mant = trim_zeros(mant);
        let sign = if x < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", x.abs())
    } else {
        let f = format!("{:.*}", (P - 1 - x) as usize, v);
        trim_zeros(&f).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// In-place transform along every axis. The centered lattices on both sides
/// are handled by the (−1)^j pre- and post-factors (N/2 is even).
fn fft_all_axes(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    for (axis, &len) in shape.iter().enumerate() {
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (len * stride);
        let lines: Vec<(usize, Vec<Complex64>)> = (0..outer * stride)
            .into_par_iter()
            .map(|line| {
                let o = line / stride;
                let r = line % stride;
                let base = o * len * stride + r;
                let mut buf: Vec<Complex64> = (0..len)
                    .map(|j| {
                        let v = data[base + j * stride];
                        if j % 2 == 1 {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect();
                fft.process(&mut buf);
                for (k, v) in buf.iter_mut().enumerate() {
                    if k % 2 == 1 {
                        *v = -*v;
                    }
                }
                (base, buf)
            })
            .collect();
        for (base, buf) in lines {
            for (j, v) in buf.into_iter().enumerate() {
                data[base + j * stride] = v;
            }
        }
    }
}

/// û(ξ_k) ≈ hⁿ Σ_j u(x_j) e^{−2πi⟨ξ_k,x_j⟩} over all axes (time included).
pub fn fourier(f: &ScalarField) -> Result<ScalarField> {
    if f.space != Space::Physical {
        return Err(Error::Shape("fourier expects a physical field".into()));
    }
    f.grid.validate()?;
    let mut data = f.samples.clone();
    fft_all_axes(&mut data, &f.grid.shape(), false);
    let cell = f.grid.full_cell_volume();
    for v in data.iter_mut() {
        *v *= cell;
    }
    Ok(ScalarField {
        grid: f.grid,
        samples: data,
        space: Space::Frequency,
        warnings: f.warnings.clone(),
    })
}

/// Inverse of [`fourier`].
pub fn inverse_fourier(f: &ScalarField) -> Result<ScalarField> {
    if f.space != Space::Frequency {
        return Err(Error::Shape("inverse_fourier expects a frequency field".into()));
    }
    f.grid.validate()?;
    let mut data = f.samples.clone();
    fft_all_axes(&mut data, &f.grid.shape(), true);
    let scale = 1.0 / (f.grid.full_cell_volume() * f.grid.len() as f64);
    for v in data.iter_mut() {
        *v *= scale;
    }
    Ok(ScalarField {
        grid: f.grid,
        samples: data,
        space: Space::Physical,
        warnings: f.warnings.clone(),
    })
}

/// inverse_fourier(m(ξ[, σ̃])·û).
pub fn apply_multiplier<M>(f: &ScalarField, m: M) -> Result<ScalarField>
where
    M: Fn(&[f64]) -> Complex64 + Sync,
{
    let mut hat = fourier(f)?;
    let grid = hat.grid;
    hat.samples.par_iter_mut().enumerate().for_each(|(i, v)| *v *= m(&grid.freqs(i)));
    inverse_fourier(&hat)
}

/// Circular convolution hⁿ Σ_m f(x_m) g(x_j − x_m); approximates the
/// convolution on ℝⁿ when both fields decay at the boundary.
pub fn convolve(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    f.same_grid(g)?;
    if f.space != Space::Physical {
        return Err(Error::Shape("convolve expects physical fields".into()));
    }
    let fa = fourier(f)?;
    let ga = fourier(g)?;
    let prod = fa.with_samples(fa.samples.iter().zip(&ga.samples).map(|(a, b)| a * b).collect());
    let mut out = inverse_fourier(&prod)?;
    out.warnings.clear();
    for src in [f, g] {
        let b = src.boundary_max();
        if b > ALIAS_THRESHOLD {
            out.warnings.push(Warning::Alias { max_boundary: b });
        }
    }
    Ok(out)
}

/// Fourier transform of a radial function through the Fourier–Bessel formula
/// û(ξ) = 2π|ξ|^{1−n/2} ∫₀^∞ t^{n/2} f(t) J_{n/2−1}(2π|ξ|t) dt.
pub fn radial_fourier<F>(profile: F, n: usize, xi_mag: f64) -> Result<SpecialValue>
where
    F: Fn(f64) -> f64,
{
    if !(xi_mag > 0.0) {
        return Err(Error::Domain("radial_fourier needs |xi| > 0".into()));
    }
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let nu = n as f64 / 2.0 - 1.0;
    let w = 2.0 * PI * xi_mag;
    let integrand = |t: f64| -> f64 {
        let ft = profile(t);
        if ft == 0.0 {
            return 0.0;
        }
        let j = bessel(BesselKind::J, nu, w * t).map(|v| v.re()).unwrap_or(f64::NAN);
        t.powf(n as f64 / 2.0) * ft * j
    };
    let spec = QuadSpec {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_refinements: 9,
        split_point: 1.0,
    };
    let r = integrate_halfline(integrand, &spec)?;
    let c = 2.0 * PI * xi_mag.powf(1.0 - n as f64 / 2.0);
    Ok(SpecialValue::real(c * r.value, c * r.error_estimate))
}

/// Test functions with closed-form Fourier transforms and heat evolutions.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// e^{−c|x|²}
    Gaussian { c: f64 },
    /// e^{2πi⟨ξ0,x⟩} e^{−c|x|²}
    ModulatedGaussian { c: f64, xi0: Vec<f64> },
    /// x0^degree e^{−c|x|²}
    PolynomialGaussian { degree: u32, c: f64 },
}

fn binom(n: u32, k: u32) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b *= (n - i) as f64 / (i + 1) as f64;
    }
    b
}

fn double_factorial_odd(k: u32) -> f64 {
    // (k−1)!! for even k
    let mut p = 1.0;
    let mut j = k as i64 - 1;
    while j > 1 {
        p *= j as f64;
        j -= 2;
    }
    p
}

/// Hermite polynomial H_d (physicists').
fn hermite(d: u32, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if d == 0 {
        return h0;
    }
    for k in 1..d {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

impl TestFunction {
    pub fn gaussian(c: f64) -> Self {
        TestFunction::Gaussian { c }
    }

    /// Parses `gaussian`, `gaussian:c`, `modulated_gaussian:c:xi0[:xi1…]`,
    /// `polynomial_gaussian:degree:c`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match parts.get(i) {
                None => Ok(default),
                Some(p) => p
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{p}' in function '{s}'"))),
            }
        };
        let f = match parts[0] {
            "gaussian" => TestFunction::Gaussian { c: num(1, PI)? },
            "modulated_gaussian" => {
                let c = num(1, PI)?;
                let mut xi0 = Vec::new();
                for i in 2..parts.len().max(3) {
                    xi0.push(num(i, 0.5)?);
                }
                TestFunction::ModulatedGaussian { c, xi0 }
            }
            "polynomial_gaussian" => {
                let d = num(1, 2.0)?;
                if d < 0.0 || d != d.round() {
                    return Err(Error::Config(format!("degree must be a nonnegative integer in '{s}'")));
                }
                TestFunction::PolynomialGaussian {
                    degree: d as u32,
                    c: num(2, PI)?,
                }
            }
            other => return Err(Error::Config(format!("unknown test function '{other}'"))),
        };
        if f.c() <= 0.0 {
            return Err(Error::Config(format!("width parameter must be positive in '{s}'")));
        }
        Ok(f)
    }

    pub fn c(&self) -> f64 {
        match self {
            TestFunction::Gaussian { c }
            | TestFunction::ModulatedGaussian { c, .. }
            | TestFunction::PolynomialGaussian { c, .. } => *c,
        }
    }

    fn xi0(&self, axis: usize) -> f64 {
        match self {
            TestFunction::ModulatedGaussian { xi0, .. } => {
                xi0.get(axis).copied().unwrap_or_else(|| xi0.last().copied().unwrap_or(0.0))
            }
            _ => 0.0,
        }
    }

    fn degree(&self) -> u32 {
        match self {
            TestFunction::PolynomialGaussian { degree, .. } => *degree,
            _ => 0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.heat(x, 0.0)
    }

    /// Closed-form P_t f(x) = ∫G(x−y,t)f(y)dy; t = 0 gives f itself.
    pub fn heat(&self, x: &[f64], t: f64) -> Complex64 {
        let c = self.c();
        let r = 1.0 + 4.0 * c * t;
        let mut out = Complex64::new(1.0, 0.0);
        for (axis, &xa) in x.iter().enumerate() {
            let b = 2.0 * PI * self.xi0(axis);
            // ∫G(x−y,t)e^{iby−cy²}dy
            let arg = Complex64::new(-c * xa * xa - b * b * t, b * xa) / r;
            out *= arg.exp() / r.sqrt();
            if axis == 0 && self.degree() > 0 {
                let d = self.degree();
                let a = 1.0 / (4.0 * t.max(1e-300)) + c;
                let mu = xa / r;
                let mut p = 0.0;
                let mut k = 0;
                while k <= d {
                    let moment = if t == 0.0 {
                        if k == 0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        double_factorial_odd(k) * (2.0 * a).powf(-(k as f64) / 2.0)
                    };
                    p += binom(d, k) * mu.powi((d - k) as i32) * moment;
                    k += 2;
                }
                out *= p;
            }
        }
        out
    }

    /// Closed-form û(ξ).
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        let c = self.c();
        let mut out = Complex64::new(1.0, 0.0);
        for (axis, &k) in xi.iter().enumerate() {
            let s = k - self.xi0(axis);
            out *= (PI / c).sqrt() * (-PI * PI * s * s / c).exp();
            if axis == 0 && self.degree() > 0 {
                // x^d ↦ (i/2π)^d ∂^d_ξ
                let d = self.degree();
                let a = PI * PI / c;
                let deriv = (-a.sqrt()).powi(d as i32) * hermite(d, a.sqrt() * s);
                out *= Complex64::new(0.0, 1.0 / (2.0 * PI)).powu(d) * deriv;
            }
        }
        out
    }

    pub fn sample(&self, grid: GridSpec) -> ScalarField {
        let dim = grid.dim;
        ScalarField::from_fn(grid, |x| self.eval(&x[..dim]))
    }
}

/// Separable space-time test function f(x)·e^{−c_t t²}.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeFunction {
    pub space: TestFunction,
    pub time_c: f64,
}

impl SpaceTimeFunction {
    pub fn eval(&self, x: &[f64], t: f64) -> Complex64 {
        self.space.eval(x) * (-self.time_c * t * t).exp()
    }

    /// Closed-form P^H_τ f(x,t) = (P_τ f)(x)·h(t−τ).
    pub fn evolve(&self, x: &[f64], t: f64, tau: f64) -> Complex64 {
        self.space.heat(x, tau) * (-self.time_c * (t - tau) * (t - tau)).exp()
    }

    pub fn fourier(&self, xi: &[f64], sig: f64) -> Complex64 {
        let c = self.time_c;
        self.space.fourier(xi) * (PI / c).sqrt() * (-PI * PI * sig * sig / c).exp()
    }

    pub fn sample(&self, grid: GridSpec) -> Result<SpaceTimeField> {
        if grid.time_axis.is_none() {
            return Err(Error::Shape("space-time sampling needs a time axis".into()));
        }
        let dim = grid.dim;
        Ok(ScalarField::from_fn(grid, |x| self.eval(&x[..dim], x[dim])))
    }
}
