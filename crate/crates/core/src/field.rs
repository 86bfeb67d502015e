//! Band-limited random fields on the torus.
//!
//! Fields are stored spectrally on a shared [`Lattice`]; grid values are
//! produced on demand by an inverse FFT. The torus carries the normalized
//! Lebesgue measure, so `∫ u dx` is the grid average and
//! `∫ |u|² dx = Σ_n |û(n)|²`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{complex_normal, normal};
use crate::spectrum::{bracket_from_norm2, Lattice, LatticeSpec};
use crate::stats::pairwise_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reality {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "alpha")]
pub enum LawKind {
    /// Weights `⟨n⟩^{-d/2}`.
    LogCorrelated,
    /// Weights `⟨n⟩^{-α}`, `α > d/2`.
    SmoothAlpha(f64),
    /// Weights 1.
    WhiteNoise,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussLaw {
    pub kind: LawKind,
    pub reality: Reality,
}

impl GaussLaw {
    pub fn log_correlated(reality: Reality) -> Self {
        GaussLaw {
            kind: LawKind::LogCorrelated,
            reality,
        }
    }

    pub fn smooth(alpha: f64, reality: Reality) -> Self {
        GaussLaw {
            kind: LawKind::SmoothAlpha(alpha),
            reality,
        }
    }

    pub fn white_noise(reality: Reality) -> Self {
        GaussLaw {
            kind: LawKind::WhiteNoise,
            reality,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if let LawKind::SmoothAlpha(alpha) = self.kind {
            if alpha.is_nan() || alpha <= dim as f64 / 2.0 {
                return Err(Error::InvalidLaw(format!(
                    "smooth law needs alpha > d/2 = {}, got {alpha}",
                    dim as f64 / 2.0
                )));
            }
        }
        Ok(())
    }

    /// Spectral weight `w(n)` as a function of `|n|²`.
    pub fn weight(&self, dim: usize, n2: u64) -> f64 {
        match self.kind {
            LawKind::LogCorrelated => bracket_from_norm2(n2).powf(-(dim as f64) / 2.0),
            LawKind::SmoothAlpha(alpha) => bracket_from_norm2(n2).powf(-alpha),
            LawKind::WhiteNoise => 1.0,
        }
    }

    /// Pointwise variance `Σ_{|n|≤N} w(n)²`.
    pub fn pointwise_variance(&self, lattice: &Lattice) -> f64 {
        let d = lattice.dim();
        let terms: Vec<f64> = (0..lattice.len())
            .map(|i| self.weight(d, lattice.norm2(i)).powi(2))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn label(&self) -> String {
        let base = match self.kind {
            LawKind::LogCorrelated => "log_correlated".to_string(),
            LawKind::SmoothAlpha(a) => format!("smooth_alpha({a})"),
            LawKind::WhiteNoise => "white_noise".to_string(),
        };
        match self.reality {
            Reality::Real => base,
            Reality::Complex => format!("{base}_complex"),
        }
    }
}

/// Values on the uniform `G^d` grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    pub dim: usize,
    pub size: usize,
    pub values: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid {
            dim: self.dim,
            size: self.size,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_map<U: Copy, V>(&self, other: &Grid<U>, f: impl Fn(T, U) -> V) -> Grid<V> {
        assert_eq!(self.values.len(), other.values.len(), "grid shape mismatch");
        Grid {
            dim: self.dim,
            size: self.size,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Circular shift by `steps` grid cells along each axis.
    pub fn shifted(&self, steps: &[usize]) -> Grid<T> {
        assert_eq!(steps.len(), self.dim);
        let g = self.size;
        let mut out = self.values.clone();
        for (j, v) in self.values.iter().enumerate() {
            let mut rem = j;
            let mut coords = [0usize; 3];
            for a in (0..self.dim).rev() {
                coords[a] = rem % g;
                rem /= g;
            }
            let target = (0..self.dim).fold(0usize, |acc, a| acc * g + (coords[a] + steps[a]) % g);
            out[target] = *v;
        }
        Grid {
            dim: self.dim,
            size: self.size,
            values: out,
        }
    }
}

/// `∫_{𝕋^d} u dx` under the normalized measure: the plain grid average.
pub fn integrate(grid: &Grid<f64>) -> f64 {
    pairwise_sum(&grid.values) / grid.values.len() as f64
}

pub fn integrate_complex(grid: &Grid<Complex64>) -> Complex64 {
    let re: Vec<f64> = grid.values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = grid.values.iter().map(|z| z.im).collect();
    let n = grid.values.len() as f64;
    Complex64::new(pairwise_sum(&re) / n, pairwise_sum(&im) / n)
}

/// Truncated Fourier series on a lattice.
#[derive(Clone, Debug)]
pub struct SpectralField {
    lattice: Arc<Lattice>,
    coeffs: Vec<Complex64>,
    reality: Reality,
}

impl SpectralField {
    pub fn zeros(lattice: Arc<Lattice>, reality: Reality) -> Self {
        let coeffs = vec![Complex64::default(); lattice.len()];
        SpectralField {
            lattice,
            coeffs,
            reality,
        }
    }

    /// Validates length and, for real fields, the Hermitian symmetry
    /// `û(-n) = conj(û(n))` (to 1e-12 relative).
    pub fn from_coeffs(lattice: Arc<Lattice>, coeffs: Vec<Complex64>, reality: Reality) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::FieldMismatch(format!(
                "{} coefficients for a lattice of {} points",
                coeffs.len(),
                lattice.len()
            )));
        }
        if reality == Reality::Real {
            let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
            for i in 0..coeffs.len() {
                let j = lattice.neg(i);
                if (coeffs[j] - coeffs[i].conj()).norm() > 1e-12 * scale {
                    return Err(Error::FieldMismatch(format!(
                        "coefficients at {:?} violate the reality constraint",
                        lattice.point(i)
                    )));
                }
            }
        }
        Ok(SpectralField {
            lattice,
            coeffs,
            reality,
        })
    }

    /// Constant field `c` (zero mode only).
    pub fn constant(lattice: Arc<Lattice>, c: Complex64, reality: Reality) -> Result<Self> {
        let mut f = Self::zeros(lattice, reality);
        let zero = f.lattice.index_of(&vec![0; f.lattice.dim()]).expect("origin in lattice");
        f.coeffs[zero] = c;
        if reality == Reality::Real && c.im != 0.0 {
            return Err(Error::FieldMismatch("real constant with imaginary part".into()));
        }
        Ok(f)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn spec(&self) -> &LatticeSpec {
        self.lattice.spec()
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn is_real(&self) -> bool {
        self.reality == Reality::Real
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, n: &[i64]) -> Option<Complex64> {
        self.lattice.index_of(n).map(|i| self.coeffs[i])
    }

    /// `Σ_n |û(n)|² = ∫|u|² dx`.
    pub fn l2_norm_sq(&self) -> f64 {
        let t: Vec<f64> = self.coeffs.iter().map(|c| c.norm_sqr()).collect();
        pairwise_sum(&t)
    }

    /// `Σ_n ⟨n⟩^{2s} |û(n)|²`.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let t: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| self.lattice.bracket(i).powf(2.0 * s) * c.norm_sqr())
            .collect();
        pairwise_sum(&t)
    }

    /// `Re Σ_n û(n) conj(v̂(n))`, i.e. `∫ u v̄ dx` for real fields.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_lattice(other)?;
        let t: Vec<f64> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .collect();
        Ok(pairwise_sum(&t))
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<SpectralField> {
        self.check_same_lattice(other)?;
        let reality = if self.is_real() && other.is_real() {
            Reality::Real
        } else {
            Reality::Complex
        };
        Ok(SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
            reality,
        })
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            reality: self.reality,
        }
    }

    /// Fourier multiplier `m(|n|²)`.
    pub fn multiplier(&self, m: impl Fn(u64) -> f64) -> SpectralField {
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * m(self.lattice.norm2(i)))
                .collect(),
            reality: self.reality,
        }
    }

    /// `⟨∇⟩^s u`.
    pub fn bessel_potential(&self, s: f64) -> SpectralField {
        self.multiplier(|n2| bracket_from_norm2(n2).powf(s))
    }

    /// `x ↦ u(x - a)`: coefficients pick up the phase `e^{-i n·a}`.
    pub fn translated(&self, shift: &[f64]) -> SpectralField {
        assert_eq!(shift.len(), self.lattice.dim());
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let phase: f64 = self
                        .lattice
                        .point(i)
                        .iter()
                        .zip(shift)
                        .map(|(k, a)| *k as f64 * a)
                        .sum();
                    c * Complex64::from_polar(1.0, -phase)
                })
                .collect(),
            reality: self.reality,
        }
    }

    /// `π_N u` on the same lattice.
    pub fn project(&self, cutoff: usize) -> Result<SpectralField> {
        if cutoff > self.lattice.cutoff() {
            return Err(Error::InvalidParameter(format!(
                "projection cutoff {cutoff} exceeds field cutoff {}",
                self.lattice.cutoff()
            )));
        }
        let r2 = (cutoff * cutoff) as u64;
        Ok(self.multiplier(|n2| if n2 <= r2 { 1.0 } else { 0.0 }))
    }

    /// Moves the field to `target`, a lattice of cutoff at most ours (this
    /// is `π_N` followed by re-indexing). Nested truncations of one sample
    /// share their Gaussian coefficients this way.
    pub fn restrict(&self, target: Arc<Lattice>) -> Result<SpectralField> {
        if target.dim() != self.lattice.dim() || target.cutoff() > self.lattice.cutoff() {
            return Err(Error::FieldMismatch(format!(
                "cannot restrict {:?} to {:?}",
                self.spec(),
                target.spec()
            )));
        }
        let coeffs = target
            .points()
            .iter()
            .map(|p| {
                let i = self.lattice.index_of(&p[..target.dim()]).expect("nested lattice");
                self.coeffs[i]
            })
            .collect();
        Ok(SpectralField {
            lattice: target,
            coeffs,
            reality: self.reality,
        })
    }

    /// Moves the field to a lattice with a larger cutoff (zero padding).
    pub fn extend(&self, target: Arc<Lattice>) -> Result<SpectralField> {
        if target.dim() != self.lattice.dim() || target.cutoff() < self.lattice.cutoff() {
            return Err(Error::FieldMismatch(format!(
                "cannot extend {:?} to {:?}",
                self.spec(),
                target.spec()
            )));
        }
        let mut out = SpectralField::zeros(target, self.reality);
        for (i, p) in self.lattice.points().iter().enumerate() {
            let j = out.lattice.index_of(&p[..self.lattice.dim()]).expect("nested lattice");
            out.coeffs[j] = self.coeffs[i];
        }
        Ok(out)
    }

    /// Largest `|n|²` carrying a nonzero coefficient.
    pub fn support_norm2(&self) -> u64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, _)| self.lattice.norm2(i))
            .max()
            .unwrap_or(0)
    }

    fn scatter(&self) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); self.lattice.transform().len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            buf[self.lattice.grid_offset(i)] = *c;
        }
        buf
    }

    fn grid_of<T>(&self, values: Vec<T>) -> Grid<T> {
        Grid {
            dim: self.lattice.dim(),
            size: self.spec().grid(),
            values,
        }
    }

    pub fn to_complex_grid(&self) -> Grid<Complex64> {
        let mut buf = self.scatter();
        self.lattice.transform().inverse(&mut buf);
        self.grid_of(buf)
    }

    /// Real grid values; the imaginary rounding residue is discarded.
    pub fn to_grid(&self) -> Result<Grid<f64>> {
        if !self.is_real() {
            return Err(Error::FieldMismatch(
                "complex-valued field has no real grid; use to_complex_grid".into(),
            ));
        }
        let mut buf = self.scatter();
        self.lattice.transform().inverse(&mut buf);
        Ok(self.grid_of(buf.into_iter().map(|z| z.re).collect()))
    }

    /// Grid values of two real fields from a single complex transform.
    pub fn to_grid_pair(a: &SpectralField, b: &SpectralField) -> Result<(Grid<f64>, Grid<f64>)> {
        a.check_same_lattice(b)?;
        if !a.is_real() || !b.is_real() {
            return Err(Error::FieldMismatch("paired transform needs real fields".into()));
        }
        let i = Complex64::i();
        let mut buf = vec![Complex64::default(); a.lattice.transform().len()];
        for k in 0..a.coeffs.len() {
            buf[a.lattice.grid_offset(k)] = a.coeffs[k] + i * b.coeffs[k];
        }
        a.lattice.transform().inverse(&mut buf);
        let re = buf.iter().map(|z| z.re).collect();
        let im = buf.iter().map(|z| z.im).collect();
        Ok((a.grid_of(re), a.grid_of(im)))
    }

    /// Forward DFT of grid values restricted to the lattice.
    pub fn from_grid(lattice: Arc<Lattice>, grid: &Grid<f64>) -> Result<SpectralField> {
        let buf: Vec<Complex64> = grid.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        Self::from_buffer(lattice, buf, grid, Reality::Real)
    }

    pub fn from_complex_grid(lattice: Arc<Lattice>, grid: &Grid<Complex64>) -> Result<SpectralField> {
        Self::from_buffer(lattice, grid.values.clone(), grid, Reality::Complex)
    }

    fn from_buffer<T>(
        lattice: Arc<Lattice>,
        mut buf: Vec<Complex64>,
        grid: &Grid<T>,
        reality: Reality,
    ) -> Result<SpectralField> {
        if grid.dim != lattice.dim() || grid.size != lattice.spec().grid() {
            return Err(Error::FieldMismatch("grid shape does not match lattice".into()));
        }
        lattice.transform().forward(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        let coeffs = (0..lattice.len())
            .map(|i| buf[lattice.grid_offset(i)] * scale)
            .collect();
        Ok(SpectralField {
            lattice,
            coeffs,
            reality,
        })
    }

    pub fn check_same_lattice(&self, other: &SpectralField) -> Result<()> {
        if Arc::ptr_eq(&self.lattice, &other.lattice) || self.spec() == other.spec() {
            Ok(())
        } else {
            Err(Error::FieldMismatch(format!(
                "lattices differ: {:?} vs {:?}",
                self.spec(),
                other.spec()
            )))
        }
    }
}

/// Draws `û(n) = g_n w(n)`. For real laws `g_0` is a real standard normal and
/// `g_{-n} = conj(g_n)` is set by construction; for complex laws every `g_n` is
/// an independent standard complex normal.
pub fn sample<R: Rng + ?Sized>(law: &GaussLaw, lattice: &Arc<Lattice>, rng: &mut R) -> Result<SpectralField> {
    law.validate(lattice.dim())?;
    let d = lattice.dim();
    let mut coeffs = vec![Complex64::default(); lattice.len()];
    match law.reality {
        Reality::Real => {
            for &i in lattice.half() {
                let w = law.weight(d, lattice.norm2(i));
                let j = lattice.neg(i);
                if i == j {
                    coeffs[i] = Complex64::new(w * normal(rng), 0.0);
                } else {
                    let g = complex_normal(rng) * w;
                    coeffs[i] = g;
                    coeffs[j] = g.conj();
                }
            }
        }
        Reality::Complex => {
            for (i, c) in coeffs.iter_mut().enumerate() {
                *c = complex_normal(rng) * law.weight(d, lattice.norm2(i));
            }
        }
    }
    Ok(SpectralField {
        lattice: lattice.clone(),
        coeffs,
        reality: law.reality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::spectrum::LatticeSpec;
    use proptest::prelude::*;

    fn lattice(dim: usize, n: usize) -> Arc<Lattice> {
        Lattice::new(LatticeSpec::new(dim, n).unwrap())
    }

    #[test]
    fn constant_and_cosine_grids() {
        let lat = lattice(1, 3);
        let c = SpectralField::constant(lat.clone(), Complex64::new(2.5, 0.0), Reality::Real).unwrap();
        assert!(c.to_grid().unwrap().values.iter().all(|v| (v - 2.5).abs() < 1e-14));

        let mut f = SpectralField::zeros(lat.clone(), Reality::Real);
        let (p, m) = (lat.index_of(&[1]).unwrap(), lat.index_of(&[-1]).unwrap());
        f.coeffs_mut()[p] = Complex64::new(0.5, 0.0);
        f.coeffs_mut()[m] = Complex64::new(0.5, 0.0);
        let g = f.to_grid().unwrap();
        let size = g.size as f64;
        for (j, v) in g.values.iter().enumerate() {
            let x = 2.0 * std::f64::consts::PI * j as f64 / size;
            assert!((v - x.cos()).abs() < 1e-14);
        }
        assert!(integrate(&g).abs() < 1e-14);
        let sq = g.map(|v| v * v);
        assert!((integrate(&sq) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn grid_round_trip() {
        for dim in 1..=3 {
            let lat = lattice(dim, 3);
            let law = GaussLaw::log_correlated(Reality::Real);
            let f = sample(&law, &lat, &mut substream(1, dim as u64)).unwrap();
            let g = f.to_grid().unwrap();
            let back = SpectralField::from_grid(lat.clone(), &g).unwrap();
            for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
                assert!((a - b).norm() < 1e-12);
            }
            let law = GaussLaw::log_correlated(Reality::Complex);
            let f = sample(&law, &lat, &mut substream(2, dim as u64)).unwrap();
            let back = SpectralField::from_complex_grid(lat.clone(), &f.to_complex_grid()).unwrap();
            for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn real_sampling_is_hermitian_exactly() {
        let lat = lattice(2, 6);
        let f = sample(&GaussLaw::log_correlated(Reality::Real), &lat, &mut substream(3, 0)).unwrap();
        for i in 0..lat.len() {
            assert_eq!(f.coeffs()[lat.neg(i)], f.coeffs()[i].conj());
        }
        let zero = lat.index_of(&[0, 0]).unwrap();
        assert_eq!(f.coeffs()[zero].im, 0.0);
    }

    #[test]
    fn smooth_law_requires_alpha_above_half_dim() {
        let lat = lattice(2, 2);
        let mut rng = substream(0, 0);
        assert!(sample(&GaussLaw::smooth(1.0, Reality::Real), &lat, &mut rng).is_err());
        assert!(sample(&GaussLaw::smooth(1.01, Reality::Real), &lat, &mut rng).is_ok());
    }

    #[test]
    fn paired_transform_matches_separate() {
        let lat = lattice(2, 4);
        let law = GaussLaw::log_correlated(Reality::Real);
        let a = sample(&law, &lat, &mut substream(5, 0)).unwrap();
        let b = sample(&law, &lat, &mut substream(5, 1)).unwrap();
        let (ga, gb) = SpectralField::to_grid_pair(&a, &b).unwrap();
        let (ea, eb) = (a.to_grid().unwrap(), b.to_grid().unwrap());
        for k in 0..ga.values.len() {
            assert!((ga.values[k] - ea.values[k]).abs() < 1e-12);
            assert!((gb.values[k] - eb.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn quartic_products_integrate_exactly() {
        // brute-force convolution over coefficients, d = 1
        for n in 1..=3usize {
            let lat = lattice(1, n);
            let law = GaussLaw::white_noise(Reality::Real);
            let fs: Vec<SpectralField> = (0..4)
                .map(|k| sample(&law, &lat, &mut substream(11, k)).unwrap())
                .collect();
            let grids: Vec<Grid<f64>> = fs.iter().map(|f| f.to_grid().unwrap()).collect();
            let prod = Grid {
                dim: 1,
                size: grids[0].size,
                values: (0..grids[0].values.len())
                    .map(|j| grids.iter().map(|g| g.values[j]).product())
                    .collect(),
            };
            let quad = integrate(&prod);
            let r = n as i64;
            let mut exact = Complex64::default();
            for a in -r..=r {
                for b in -r..=r {
                    for c in -r..=r {
                        let e = -(a + b + c);
                        if e.abs() <= r {
                            exact += fs[0].coeff(&[a]).unwrap()
                                * fs[1].coeff(&[b]).unwrap()
                                * fs[2].coeff(&[c]).unwrap()
                                * fs[3].coeff(&[e]).unwrap();
                        }
                    }
                }
            }
            assert!((quad - exact.re).abs() < 1e-10 * (1.0 + exact.re.abs()), "N={n}");
            assert!(exact.im.abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn parseval(seed in 0u64..1000, dim in 1usize..=3, n in 1usize..=4) {
            let lat = lattice(dim, n);
            let f = sample(&GaussLaw::log_correlated(Reality::Real), &lat, &mut substream(seed, 0)).unwrap();
            let g = f.to_grid().unwrap();
            let avg = integrate(&g.map(|v| v * v));
            prop_assert!((avg - f.l2_norm_sq()).abs() <= 1e-10 * f.l2_norm_sq());
        }

        #[test]
        fn projection_is_idempotent_contraction(seed in 0u64..1000, m in 1usize..=6, k in 1usize..=6) {
            let lat = lattice(2, 6);
            let f = sample(&GaussLaw::white_noise(Reality::Real), &lat, &mut substream(seed, 1)).unwrap();
            let p = f.project(m).unwrap();
            let pp = p.project(m).unwrap();
            prop_assert_eq!(p.coeffs(), pp.coeffs());
            prop_assert!(p.l2_norm_sq() <= f.l2_norm_sq() + 1e-12);
            let nested = p.project(k).unwrap();
            let direct = f.project(m.min(k)).unwrap();
            prop_assert_eq!(nested.coeffs(), direct.coeffs());
        }
    }

    #[test]
    fn projection_kills_mode_outside_ball() {
        let lat = lattice(2, 3);
        let mut f = SpectralField::zeros(lat.clone(), Reality::Complex);
        f.coeffs_mut()[lat.index_of(&[3, 0]).unwrap()] = Complex64::new(1.0, 0.0);
        assert_eq!(f.project(2).unwrap().l2_norm_sq(), 0.0);
    }

    #[test]
    fn translation_matches_grid_shift() {
        let lat = lattice(2, 3);
        let f = sample(&GaussLaw::log_correlated(Reality::Real), &lat, &mut substream(9, 0)).unwrap();
        let g = lat.spec().grid();
        let step = 2.0 * std::f64::consts::PI / g as f64;
        let shifted = f.translated(&[3.0 * step, 5.0 * step]).to_grid().unwrap();
        let expect = f.to_grid().unwrap().shifted(&[3, 5]);
        for (a, b) in shifted.values.iter().zip(&expect.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
