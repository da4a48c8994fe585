//! Finite-difference weights on arbitrary nodes and differentiation matrices.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    /// Uniform nodes on `[a, b]`, both endpoints included.
    Uniform { a: f64, b: f64 },
    /// `x_j = L sinh(stretch ξ_j) / sinh(stretch)` with `ξ_j` uniform on `[-1, 1]`.
    SinhClustered { half_width: f64, stretch: f64 },
    /// Nodes supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    kind: GridKind,
}

impl Grid {
    /// Grid on caller-supplied, strictly increasing nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Grid> {
        if nodes.len() < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {}", nodes.len())));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid nodes must be finite and strictly increasing".into()));
        }
        Ok(Grid {
            nodes,
            kind: GridKind::Custom,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Samples of `g` at the nodes.
    pub fn sample(&self, g: impl Fn(f64) -> f64) -> DVector<f64> {
        DVector::from_iterator(self.nodes.len(), self.nodes.iter().map(|&x| g(x)))
    }
}

pub fn uniform_grid(a: f64, b: f64, n: usize) -> Result<Grid> {
    if n < 2 {
        return Err(Error::Config(format!("grid needs at least 2 points, got {n}")));
    }
    if !(b > a) {
        return Err(Error::Config(format!("grid interval [{a}, {b}] is empty")));
    }
    let dx = (b - a) / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|j| a + j as f64 * dx).collect();
    nodes[n - 1] = b;
    Ok(Grid {
        nodes,
        kind: GridKind::Uniform { a, b },
    })
}

/// Nodes on `[-half_width, half_width]`, densest around zero.
pub fn sinh_clustered_grid(half_width: f64, n: usize, stretch: f64) -> Result<Grid> {
    if n < 2 {
        return Err(Error::Config(format!("grid needs at least 2 points, got {n}")));
    }
    if !(half_width > 0.0) || !(stretch > 0.0) {
        return Err(Error::Config(format!(
            "sinh grid needs positive half-width and stretch, got {half_width}, {stretch}"
        )));
    }
    let denom = stretch.sinh();
    let nodes = (0..n)
        .map(|j| {
            // Mirror the left half so the grid is exactly symmetric.
            let k = j.min(n - 1 - j);
            let xi = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
            let x = half_width * (stretch * xi).sinh() / denom;
            if j == k {
                x
            } else {
                -x
            }
        })
        .collect();
    Ok(Grid {
        nodes,
        kind: GridKind::SinhClustered {
            half_width,
            stretch,
        },
    })
}

/// Weights for derivatives `0..=max_order` at `x0` from values at `nodes`.
///
/// Row `k` of the result holds `c_j` with `Σ_j c_j g(nodes_j) ≈ g^{(k)}(x0)`,
/// exact for polynomials of degree below `nodes.len()`. This is Fornberg's
/// recurrence, which builds the weights one node at a time.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Result<Vec<Vec<f64>>> {
    let w = nodes.len();
    if w == 0 {
        return Err(Error::DegenerateStencil("no nodes".into()));
    }
    if max_order >= w {
        return Err(Error::DegenerateStencil(format!(
            "derivative order {max_order} needs more than {w} nodes"
        )));
    }
    for i in 0..w {
        for j in 0..i {
            if nodes[i] == nodes[j] {
                return Err(Error::DegenerateStencil(format!(
                    "duplicate node {} at positions {j} and {i}",
                    nodes[i]
                )));
            }
        }
    }
    let m = max_order;
    // c[node][order]
    let mut c = vec![vec![0.0; m + 1]; w];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..w {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    Ok((0..=m).map(|k| (0..w).map(|j| c[j][k]).collect()).collect())
}

/// Dense matrix applying an `order`-th derivative with `width`-point stencils.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    pub order: usize,
    pub width: usize,
    pub matrix: DMatrix<f64>,
    /// Row-major `n × width` copy of the stencil weights.
    stencils: Vec<f64>,
}

impl DiffMatrix {
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Columns holding the stencil of row `i`.
    pub fn window(&self, i: usize) -> std::ops::Range<usize> {
        let start = stencil_start(i, self.matrix.nrows(), self.width);
        start..start + self.width
    }

    /// Stencil weights of row `i`, aligned with [`window`](Self::window).
    pub fn weights(&self, i: usize) -> &[f64] {
        &self.stencils[i * self.width..(i + 1) * self.width]
    }

    /// Same as [`apply`](Self::apply), touching only stencil entries.
    pub fn apply_banded(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.matrix.nrows(), |i, _| {
            let w = self.window(i);
            self.weights(i).iter().zip(&v.as_slice()[w]).map(|(a, b)| a * b).sum()
        })
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.matrix.row(i).transpose()
    }

    /// Coordinate-format dump, one `row col value` triple per nonzero.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "{i} {j} {v:.16e}");
                }
            }
        }
        out
    }
}

/// First index of the `width`-node window used for row `i`: centered where
/// possible, shifted inward (one-sided) near the ends.
pub fn stencil_start(i: usize, n: usize, width: usize) -> usize {
    i.saturating_sub(width / 2).min(n - width)
}

pub fn diff_matrix(grid: &Grid, order: usize, width: usize) -> Result<DiffMatrix> {
    let n = grid.len();
    if width > n {
        return Err(Error::Config(format!(
            "stencil width {width} exceeds grid size {n}"
        )));
    }
    if order >= width {
        return Err(Error::Config(format!(
            "derivative order {order} needs a stencil wider than {width}"
        )));
    }
    let x = grid.nodes();
    let mut matrix = DMatrix::zeros(n, n);
    for i in 0..n {
        let start = stencil_start(i, n, width);
        let weights = fornberg_weights(x[i], &x[start..start + width], order)?;
        for (k, wk) in weights[order].iter().enumerate() {
            matrix[(i, start + k)] = *wk;
        }
    }
    let stencils = (0..n)
        .flat_map(|i| {
            let start = stencil_start(i, n, width);
            (start..start + width).map(move |j| (i, j))
        })
        .map(|(i, j)| matrix[(i, j)])
        .collect();
    Ok(DiffMatrix {
        order,
        width,
        matrix,
        stencils,
    })
}
