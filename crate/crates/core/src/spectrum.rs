//! Frequency-lattice bookkeeping: the index set `{n ∈ ℤ^d : |n| ≤ N}`, the
//! weight `⟨n⟩ = (1 + |n|²)^{1/2}`, exact lattice sums and the truncated
//! Green's function.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::stats::CompensatedSum;
use crate::transform::{next_fast_size, GridTransform};

pub const MAX_DIM: usize = 3;

/// Frequency vector; components beyond the lattice dimension are zero.
pub type Freq = [i64; MAX_DIM];

/// Dimension, Euclidean frequency cutoff and grid size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    dim: usize,
    cutoff: usize,
    grid: usize,
}

impl LatticeSpec {
    /// Uses the default grid: the smallest 5-smooth size `≥ 4N + 1`.
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        Self::with_grid(dim, cutoff, Self::default_grid(cutoff))
    }

    pub fn with_grid(dim: usize, cutoff: usize, grid: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidLattice(format!("dimension {dim} not in 1..=3")));
        }
        if cutoff == 0 {
            return Err(Error::InvalidLattice("cutoff must be positive".into()));
        }
        if grid < 4 * cutoff + 1 {
            return Err(Error::InvalidLattice(format!(
                "grid size {grid} below 4N+1 = {}",
                4 * cutoff + 1
            )));
        }
        Ok(LatticeSpec { dim, cutoff, grid })
    }

    pub fn default_grid(cutoff: usize) -> usize {
        next_fast_size(4 * cutoff + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn grid_points(&self) -> usize {
        self.grid.pow(self.dim as u32)
    }

    /// Same dimension and grid rule, different cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        Self::new(self.dim, cutoff)
    }
}

#[inline]
pub fn norm2(n: &[i64]) -> u64 {
    n.iter().map(|c| (c * c) as u64).sum()
}

/// `⟨n⟩ = (1 + |n|²)^{1/2}`.
#[inline]
pub fn bracket(n: &[i64]) -> f64 {
    bracket_from_norm2(norm2(n))
}

#[inline]
pub fn bracket_from_norm2(n2: u64) -> f64 {
    (1.0 + n2 as f64).sqrt()
}

/// `counts[k] = #{n ∈ ℤ^d : |n|² = k}` for `k ≤ N²`.
pub fn shell_counts(dim: usize, cutoff: usize) -> Vec<u64> {
    let n = cutoff as i64;
    let max = (n * n) as usize;
    let mut counts = vec![0u64; max + 1];
    match dim {
        1 => {
            for x in -n..=n {
                counts[(x * x) as usize] += 1;
            }
        }
        2 => {
            for x in -n..=n {
                let rest = n * n - x * x;
                let ymax = isqrt(rest);
                for y in -ymax..=ymax {
                    counts[(x * x + y * y) as usize] += 1;
                }
            }
        }
        3 => {
            let plane = shell_counts(2, cutoff);
            for z in -n..=n {
                let z2 = (z * z) as usize;
                for (k, c) in plane.iter().enumerate().take(max - z2 + 1) {
                    counts[k + z2] += c;
                }
            }
        }
        _ => panic!("dimension {dim} unsupported"),
    }
    counts
}

fn isqrt(v: i64) -> i64 {
    let mut r = (v as f64).sqrt() as i64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// `Σ_{|n| ≤ N} f(|n|²)`, accumulated shell by shell with compensation.
pub fn radial_sum(dim: usize, cutoff: usize, f: impl Fn(u64) -> f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (k, c) in shell_counts(dim, cutoff).into_iter().enumerate() {
        if c > 0 {
            acc.add(c as f64 * f(k as u64));
        }
    }
    acc.value()
}

/// `σ_N = Σ_{|n| ≤ N} ⟨n⟩^{-d}`.
pub fn sigma_n(spec: &LatticeSpec) -> f64 {
    sigma_for(spec.dim(), spec.cutoff())
}

pub fn sigma_for(dim: usize, cutoff: usize) -> f64 {
    let d = dim as f64;
    radial_sum(dim, cutoff, |k| (1.0 + k as f64).powf(-d / 2.0))
}

/// `Σ_{|n| ≤ N} ⟨n⟩^{-d} cos(n·x)`.
pub fn green_truncated(spec: &LatticeSpec, x: &[f64]) -> f64 {
    assert_eq!(x.len(), spec.dim(), "point dimension mismatch");
    let d = spec.dim() as f64;
    let mut acc = CompensatedSum::new();
    for_each_point(spec.dim(), spec.cutoff(), |n| {
        let phase: f64 = n.iter().zip(x).map(|(k, xi)| *k as f64 * xi).sum();
        acc.add(bracket(&n[..spec.dim()]).powf(-d) * phase.cos());
    });
    acc.value()
}

/// Visits the lattice points in lexicographic order.
pub fn for_each_point(dim: usize, cutoff: usize, mut f: impl FnMut(Freq)) {
    let n = cutoff as i64;
    let r2 = n * n;
    let range = |active: bool| if active { -n..=n } else { 0..=0 };
    for a in -n..=n {
        for b in range(dim >= 2) {
            for c in range(dim >= 3) {
                if a * a + b * b + c * c <= r2 {
                    f([a, b, c]);
                }
            }
        }
    }
}

/// `π_N`: zero every coefficient with `|n| > N`.
pub fn project(field: &SpectralField, cutoff: usize) -> Result<SpectralField> {
    field.project(cutoff)
}

/// The enumerated lattice together with its grid transform. Shared between
/// all fields with the same [`LatticeSpec`].
#[derive(Debug)]
pub struct Lattice {
    spec: LatticeSpec,
    points: Vec<Freq>,
    norm2: Vec<u64>,
    neg: Vec<usize>,
    offsets: Vec<usize>,
    half: Vec<usize>,
    lookup: Vec<u32>,
    sigma: f64,
    transform: GridTransform,
}

const NO_POINT: u32 = u32::MAX;

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Arc<Lattice> {
        let dim = spec.dim();
        let n = spec.cutoff() as i64;
        let side = (2 * n + 1) as usize;
        let mut points = Vec::new();
        for_each_point(dim, spec.cutoff(), |p| points.push(p));
        let mut lookup = vec![NO_POINT; side.pow(dim as u32)];
        let key = |p: &Freq| {
            p[..dim]
                .iter()
                .fold(0usize, |acc, c| acc * side + (c + n) as usize)
        };
        for (i, p) in points.iter().enumerate() {
            lookup[key(p)] = i as u32;
        }
        let g = spec.grid() as i64;
        let offsets = points
            .iter()
            .map(|p| {
                p[..dim]
                    .iter()
                    .fold(0usize, |acc, c| acc * g as usize + c.rem_euclid(g) as usize)
            })
            .collect();
        let neg = points
            .iter()
            .map(|p| lookup[key(&[-p[0], -p[1], -p[2]])] as usize)
            .collect();
        let half = points
            .iter()
            .enumerate()
            .filter(|(_, p)| is_nonnegative(p))
            .map(|(i, _)| i)
            .collect();
        let norm2 = points.iter().map(|p| norm2(p)).collect();
        Arc::new(Lattice {
            spec,
            norm2,
            neg,
            offsets,
            half,
            lookup,
            sigma: sigma_n(&spec),
            transform: GridTransform::new(dim, spec.grid()),
            points,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn cutoff(&self) -> usize {
        self.spec.cutoff()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Freq] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.points[i][..self.dim()]
    }

    pub fn norm2(&self, i: usize) -> u64 {
        self.norm2[i]
    }

    pub fn bracket(&self, i: usize) -> f64 {
        bracket_from_norm2(self.norm2[i])
    }

    /// Index of `-n`.
    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    /// Representatives of `{n, -n}`: zero and the lexicographically positive points.
    pub fn half(&self) -> &[usize] {
        &self.half
    }

    pub fn grid_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        let dim = self.dim();
        if n.len() != dim {
            return None;
        }
        let c = self.cutoff() as i64;
        if n.iter().any(|v| v.abs() > c) {
            return None;
        }
        let side = (2 * c + 1) as usize;
        let k = n.iter().fold(0usize, |acc, v| acc * side + (v + c) as usize);
        match self.lookup[k] {
            NO_POINT => None,
            i => Some(i as usize),
        }
    }

    /// `σ_N` of this lattice.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn transform(&self) -> &GridTransform {
        &self.transform
    }
}

fn is_nonnegative(p: &Freq) -> bool {
    match p.iter().find(|c| **c != 0) {
        None => true,
        Some(c) => *c > 0,
    }
}
