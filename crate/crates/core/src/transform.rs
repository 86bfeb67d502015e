//! Multi-dimensional complex FFT on a `size^dim` row-major grid.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct GridTransform {
    dim: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridTransform")
            .field("dim", &self.dim)
            .field("size", &self.size)
            .finish()
    }
}

impl GridTransform {
    pub fn new(dim: usize, size: usize) -> Self {
        let mut planner = FftPlanner::new();
        GridTransform {
            dim,
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized `Σ_k X_k e^{+2πi j·k / G}`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(&*self.inverse, data);
    }

    /// Unnormalized `Σ_j x_j e^{-2πi j·k / G}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(&*self.forward, data);
    }

    fn apply(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len(), "grid length mismatch");
        let g = self.size;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // last axis: contiguous lines
        fft.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let mut block = Vec::new();
        for axis in (0..self.dim - 1).rev() {
            let stride = g.pow((self.dim - 1 - axis) as u32);
            let span = g * stride;
            block.resize(span, Complex64::default());
            for chunk in data.chunks_exact_mut(span) {
                // transpose (g × stride) -> (stride × g) so lines are contiguous
                for t in 0..g {
                    let row = &chunk[t * stride..(t + 1) * stride];
                    for (inner, v) in row.iter().enumerate() {
                        block[inner * g + t] = *v;
                    }
                }
                fft.process_with_scratch(&mut block, &mut scratch);
                for t in 0..g {
                    let row = &mut chunk[t * stride..(t + 1) * stride];
                    for (inner, v) in row.iter_mut().enumerate() {
                        *v = block[inner * g + t];
                    }
                }
            }
        }
    }
}

/// Smallest integer `≥ n` whose prime factors are all in {2, 3, 5}.
pub fn next_fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_inverse(dim: usize, g: usize, x: &[Complex64]) -> Vec<Complex64> {
        let total = g.pow(dim as u32);
        let coords = |mut i: usize| {
            let mut c = vec![0usize; dim];
            for a in (0..dim).rev() {
                c[a] = i % g;
                i /= g;
            }
            c
        };
        (0..total)
            .map(|j| {
                let cj = coords(j);
                (0..total)
                    .map(|k| {
                        let ck = coords(k);
                        let phase: f64 = cj.iter().zip(&ck).map(|(a, b)| (a * b) as f64).sum();
                        x[k] * Complex64::from_polar(1.0, 2.0 * PI * phase / g as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_transform() {
        for dim in 1..=3 {
            let g = 5;
            let t = GridTransform::new(dim, g);
            let x: Vec<Complex64> = (0..t.len())
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let expect = naive_inverse(dim, g, &x);
            let mut y = x.clone();
            t.inverse(&mut y);
            for (a, b) in y.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10, "dim {dim}");
            }
            t.forward(&mut y);
            let scale = t.len() as f64;
            for (a, b) in y.iter().zip(&x) {
                assert!((a / scale - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_sizes() {
        assert_eq!(next_fast_size(5), 5);
        assert_eq!(next_fast_size(7), 8);
        assert_eq!(next_fast_size(13), 15);
        assert_eq!(next_fast_size(513), 540);
    }
}
