use crate::error::{Error, Result};
use crate::space::StochasticSpace;
use crate::PceVector;

/// Uniform rectangular partition of `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Domain(format!(
                "grid needs at least one cell, got {nx}x{ny}"
            )));
        }
        if !(x[1] > x[0] && y[1] > y[0]) || !x.iter().chain(&y).all(|v| v.is_finite()) {
            return Err(Error::Domain(format!(
                "empty or invalid domain {x:?} x {y:?}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            x0: x[0],
            x1: x[1],
            y0: y[0],
            y1: y[1],
            dx: (x[1] - x[0]) / nx as f64,
            dy: (y[1] - y[0]) / ny as f64,
        })
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Row-major cell index, `i` fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.dx,
            self.y0 + (j as f64 + 0.5) * self.dy,
        )
    }

    /// `x` of the vertical grid line `i` (`0..=nx`).
    pub fn x_line(&self, i: usize) -> f64 {
        if i == self.nx {
            self.x1
        } else {
            self.x0 + i as f64 * self.dx
        }
    }

    pub fn y_line(&self, j: usize) -> f64 {
        if j == self.ny {
            self.y1
        } else {
            self.y0 + j as f64 * self.dy
        }
    }

    /// Whether `fine` subdivides every cell of `self` into an integer
    /// number of cells per direction.
    pub fn refinement_factor(&self, fine: &Grid) -> Option<(usize, usize)> {
        let same_domain = (self.x0 - fine.x0).abs() < 1e-12
            && (self.x1 - fine.x1).abs() < 1e-12
            && (self.y0 - fine.y0).abs() < 1e-12
            && (self.y1 - fine.y1).abs() < 1e-12;
        (same_domain && fine.nx.is_multiple_of(self.nx) && fine.ny.is_multiple_of(self.ny))
            .then(|| (fine.nx / self.nx, fine.ny / self.ny))
    }
}

/// Cell averages `(h, qx, qy)` of every cell at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub grid: Grid,
    pub k: usize,
    pub t: f64,
    pub data: Vec<f64>,
}

impl StateField {
    pub fn zeros(grid: Grid, k: usize) -> Self {
        Self {
            grid,
            k,
            t: 0.0,
            data: vec![0.0; grid.cells() * 3 * k],
        }
    }

    pub fn stride(&self) -> usize {
        3 * self.k
    }

    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let s = self.stride();
        let c = self.grid.index(i, j);
        &self.data[c * s..(c + 1) * s]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let s = self.stride();
        let c = self.grid.index(i, j);
        &mut self.data[c * s..(c + 1) * s]
    }

    pub fn h(&self, i: usize, j: usize) -> &[f64] {
        &self.cell(i, j)[..self.k]
    }

    pub fn qx(&self, i: usize, j: usize) -> &[f64] {
        &self.cell(i, j)[self.k..2 * self.k]
    }

    pub fn qy(&self, i: usize, j: usize) -> &[f64] {
        &self.cell(i, j)[2 * self.k..]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.stride())
    }

    /// Smallest value of any cell's water height at any quadrature node.
    pub fn min_node_height(&self, space: &StochasticSpace) -> f64 {
        self.cells()
            .map(|c| space.table().min_value(&c[..self.k]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Bottom expansions at cell corners, edge midpoints and cell centers.
///
/// `x_faces` holds `B` at `(x_{i-1/2}, y_j)` for `i = 0..=nx`, and
/// `y_faces` at `(x_i, y_{j-1/2})` for `j = 0..=ny`.
#[derive(Debug, Clone, PartialEq)]
pub struct BottomField {
    pub grid: Grid,
    pub k: usize,
    pub corners: Vec<f64>,
    pub x_faces: Vec<f64>,
    pub y_faces: Vec<f64>,
    pub centers: Vec<f64>,
}

impl BottomField {
    pub fn corner(&self, i: usize, j: usize) -> &[f64] {
        let c = j * (self.grid.nx + 1) + i;
        &self.corners[c * self.k..(c + 1) * self.k]
    }

    pub fn x_face(&self, i: usize, j: usize) -> &[f64] {
        let c = j * (self.grid.nx + 1) + i;
        &self.x_faces[c * self.k..(c + 1) * self.k]
    }

    pub fn y_face(&self, i: usize, j: usize) -> &[f64] {
        let c = j * self.grid.nx + i;
        &self.y_faces[c * self.k..(c + 1) * self.k]
    }

    pub fn center(&self, i: usize, j: usize) -> &[f64] {
        let c = self.grid.index(i, j);
        &self.centers[c * self.k..(c + 1) * self.k]
    }

    /// Builds the field from corner expansions (row-major, `(nx+1)(ny+1)`
    /// entries of length `k`).
    pub fn from_corners(grid: Grid, k: usize, corners: Vec<f64>) -> Result<Self> {
        let (nx, ny) = (grid.nx, grid.ny);
        if corners.len() != (nx + 1) * (ny + 1) * k {
            return Err(Error::DimensionMismatch {
                expected: (nx + 1) * (ny + 1) * k,
                found: corners.len(),
            });
        }
        let corner =
            |i: usize, j: usize| &corners[(j * (nx + 1) + i) * k..(j * (nx + 1) + i + 1) * k];
        let mean2 = |a: &[f64], b: &[f64], out: &mut Vec<f64>| {
            out.extend(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)));
        };
        let mut x_faces = Vec::with_capacity((nx + 1) * ny * k);
        for j in 0..ny {
            for i in 0..=nx {
                mean2(corner(i, j), corner(i, j + 1), &mut x_faces);
            }
        }
        let mut y_faces = Vec::with_capacity(nx * (ny + 1) * k);
        for j in 0..=ny {
            for i in 0..nx {
                mean2(corner(i, j), corner(i + 1, j), &mut y_faces);
            }
        }
        let mut field = Self {
            grid,
            k,
            corners: corners.clone(),
            x_faces,
            y_faces,
            centers: Vec::with_capacity(nx * ny * k),
        };
        let mut centers = Vec::with_capacity(nx * ny * k);
        for j in 0..ny {
            for i in 0..nx {
                let (w, e, s, n) = (
                    field.x_face(i, j),
                    field.x_face(i + 1, j),
                    field.y_face(i, j),
                    field.y_face(i, j + 1),
                );
                centers.extend((0..k).map(|m| 0.25 * (e[m] + w[m] + n[m] + s[m])));
            }
        }
        field.centers = centers;
        Ok(field)
    }

    /// A bottom that does not vary in space.
    pub fn flat(grid: Grid, value: &PceVector) -> Self {
        let corners = value.repeat((grid.nx + 1) * (grid.ny + 1));
        Self::from_corners(grid, value.len(), corners).expect("sizes are consistent")
    }
}

/// Projects `b(x, y, xi)` at every cell corner and derives the bilinear
/// interpolant's edge midpoint values and cell averages.
pub fn build_bottom<F>(b: F, grid: &Grid, space: &StochasticSpace) -> BottomField
where
    F: Fn(f64, f64, &[f64]) -> f64 + Sync,
{
    use rayon::prelude::*;
    let k = space.k();
    let corners: Vec<f64> = (0..=grid.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            let y = grid.y_line(j);
            let b = &b;
            (0..=grid.nx).flat_map(move |i| {
                let x = grid.x_line(i);
                space.project(|xi| b(x, y, xi)).into_inner()
            })
        })
        .collect();
    BottomField::from_corners(*grid, k, corners).expect("corner count matches grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BetaParams, OrthonormalBasis};

    fn space(k: usize) -> StochasticSpace {
        StochasticSpace::new(OrthonormalBasis::one_dimensional(BetaParams::UNIFORM, k).unwrap())
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(4, 2, [0.0, 2.0], [0.0, 1.0]).unwrap();
        assert_eq!(g.dx, 0.5);
        assert_eq!(g.center(1, 1), (0.75, 0.75));
        assert_eq!(g.x_line(4), 2.0);
        assert!(Grid::new(0, 2, [0.0, 1.0], [0.0, 1.0]).is_err());
        assert!(Grid::new(2, 2, [1.0, 1.0], [0.0, 1.0]).is_err());
        let fine = Grid::new(8, 6, [0.0, 2.0], [0.0, 1.0]).unwrap();
        assert_eq!(g.refinement_factor(&fine), Some((2, 3)));
        let odd = Grid::new(6, 6, [0.0, 2.0], [0.0, 1.0]).unwrap();
        assert_eq!(g.refinement_factor(&odd), None);
    }

    #[test]
    fn flat_bottom_is_constant_everywhere() {
        let g = Grid::new(3, 3, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let s = space(3);
        let b = build_bottom(|_, _, _| 0.7, &g, &s);
        for v in b
            .corners
            .chunks(3)
            .chain(b.x_faces.chunks(3))
            .chain(b.y_faces.chunks(3))
            .chain(b.centers.chunks(3))
        {
            assert!((v[0] - 0.7).abs() < 1e-15 && v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
        }
    }

    #[test]
    fn corner_values_and_center_interpolant() {
        let g = Grid::new(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let s = space(2);
        let f = |x: f64, y: f64, xi: &[f64]| x * x + 3.0 * y + 0.1 * (xi[0] + 1.0) * x;
        let b = build_bottom(f, &g, &s);
        // corner (1, 2) is (0.5, 1.0)
        let c = b.corner(1, 2);
        assert!((c[0] - (0.25 + 3.0 + 0.05)).abs() < 1e-14);
        assert!((c[1] - 0.05 / 3f64.sqrt()).abs() < 1e-14);
        // the cell average is the bilinear interpolant at the center,
        // i.e. the mean of the four corners
        for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let mean: Vec<f64> = (0..2)
                .map(|m| {
                    0.25 * (b.corner(i, j)[m]
                        + b.corner(i + 1, j)[m]
                        + b.corner(i, j + 1)[m]
                        + b.corner(i + 1, j + 1)[m])
                })
                .collect();
            for (m, want) in mean.iter().enumerate() {
                assert!((b.center(i, j)[m] - want).abs() < 1e-15);
                let quarter = 0.25
                    * (b.x_face(i, j)[m]
                        + b.x_face(i + 1, j)[m]
                        + b.y_face(i, j)[m]
                        + b.y_face(i, j + 1)[m]);
                assert!((b.center(i, j)[m] - quarter).abs() < 1e-15);
            }
        }
    }
}
