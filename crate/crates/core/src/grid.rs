//! Periodic parameter grids on the torus `T^n = (R / 2 pi Z)^n` and the
//! fourth-order central stencils used for every derivative along `L`.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

/// Smallest admissible number of nodes per axis.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("axis {axis} has {nodes} nodes, at least {MIN_NODES} are required")]
    TooCoarse { axis: usize, nodes: usize },
}

const D1: [(i64, f64); 4] = [(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];
const D2: [(i64, f64); 5] = [
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];

/// Field values that can be combined linearly by a stencil.
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T> Linear for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Uniform periodic grid, nodes indexed lexicographically (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid<const N: usize> {
    res: [usize; N],
}

impl<const N: usize> TorusGrid<N> {
    pub fn new(res: [usize; N]) -> Result<Self, GridError> {
        for (axis, &nodes) in res.iter().enumerate() {
            if nodes < MIN_NODES {
                return Err(GridError::TooCoarse { axis, nodes });
            }
        }
        Ok(Self { res })
    }

    pub fn uniform(nodes: usize) -> Result<Self, GridError> {
        Self::new([nodes; N])
    }

    pub fn resolution(&self) -> [usize; N] {
        self.res
    }

    pub fn len(&self) -> usize {
        self.res.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        TAU / self.res[axis] as f64
    }

    /// Quadrature weight of one node (periodic trapezoidal rule).
    pub fn cell_measure(&self) -> f64 {
        (0..N).map(|a| self.spacing(a)).product()
    }

    /// Same grid with the node count doubled along every axis.
    pub fn refined(&self) -> Self {
        Self { res: self.res.map(|r| 2 * r) }
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; N] {
        let mut m = [0; N];
        for a in (0..N).rev() {
            m[a] = idx % self.res[a];
            idx /= self.res[a];
        }
        m
    }

    pub fn index(&self, m: [usize; N]) -> usize {
        m.iter().zip(self.res.iter()).fold(0, |acc, (&i, &r)| acc * r + i)
    }

    /// Parameter values `phi` of a node.
    pub fn angles(&self, idx: usize) -> [f64; N] {
        let m = self.multi_index(idx);
        std::array::from_fn(|a| m[a] as f64 * self.spacing(a))
    }

    /// Neighbour `offset` steps along `axis`, with the number of times the
    /// period seam was crossed.
    pub fn shift(&self, idx: usize, axis: usize, offset: i64) -> (usize, i64) {
        let mut m = self.multi_index(idx);
        let r = self.res[axis] as i64;
        let raw = m[axis] as i64 + offset;
        let wrapped = raw.rem_euclid(r);
        m[axis] = wrapped as usize;
        (self.index(m), (raw - wrapped) / r)
    }

    /// Fourth-order first derivative along `axis`. `value(idx, seams)` returns
    /// the field at a node, `seams[a]` counting crossed periods along axis `a`.
    pub fn diff<T: Linear>(&self, idx: usize, axis: usize, value: impl Fn(usize, [i64; N]) -> T) -> T {
        let h = self.spacing(axis);
        let mut acc: Option<T> = None;
        for (off, c) in D1 {
            let (nb, w) = self.shift(idx, axis, off);
            let mut seams = [0; N];
            seams[axis] = w;
            let term = value(nb, seams) * (c / h);
            acc = Some(match acc {
                Some(a) => a + term,
                None => term,
            });
        }
        acc.expect("stencil is non-empty")
    }

    /// Fourth-order second derivative `d_a d_b`.
    pub fn diff2<T: Linear>(
        &self,
        idx: usize,
        a: usize,
        b: usize,
        value: impl Fn(usize, [i64; N]) -> T,
    ) -> T {
        let mut acc: Option<T> = None;
        let mut push = |term: T| {
            acc = Some(match acc {
                Some(x) => x + term,
                None => term,
            })
        };
        if a == b {
            let h = self.spacing(a);
            for (off, c) in D2 {
                let (nb, w) = self.shift(idx, a, off);
                let mut seams = [0; N];
                seams[a] = w;
                push(value(nb, seams) * (c / (h * h)));
            }
        } else {
            let (ha, hb) = (self.spacing(a), self.spacing(b));
            for (oa, ca) in D1 {
                let (na, wa) = self.shift(idx, a, oa);
                for (ob, cb) in D1 {
                    let (nb, wb) = self.shift(na, b, ob);
                    let mut seams = [0; N];
                    seams[a] = wa;
                    seams[b] = wb;
                    push(value(nb, seams) * (ca * cb / (ha * hb)));
                }
            }
        }
        acc.expect("stencil is non-empty")
    }

    /// Derivative of a field that is genuinely periodic (no seam offsets).
    pub fn diff_periodic<T: Linear>(&self, field: &[T], idx: usize, axis: usize) -> T {
        self.diff(idx, axis, |nb, _| field[nb])
    }

    /// Trapezoidal integral of nodal values.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        values.sum::<f64>() * self.cell_measure()
    }
}
