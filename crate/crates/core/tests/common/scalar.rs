//! Independent scalar central-upwind solver for Example 1, used as the
//! oracle for K = 1 runs.
#![allow(clippy::needless_range_loop)]

pub const G: f64 = 1.0;
pub const THETA: f64 = 1.3;
pub const CFL: f64 = 0.9;

pub struct Scalar {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    eps: f64,
    /// Bottom at x-faces `(nx + 1) x ny`, y-faces `nx x (ny + 1)`, centers.
    bxf: Vec<f64>,
    byf: Vec<f64>,
    bc: Vec<f64>,
}

fn minmod(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Default)]
struct Point {
    u: [f64; 3],
    flux: [f64; 3],
    lo: f64,
    hi: f64,
}

impl Scalar {
    pub fn new(nx: usize, ny: usize) -> Self {
        let (x0, x1, y0, y1) = (0.0, 2.0, 0.0, 1.0);
        let dx = (x1 - x0) / nx as f64;
        let dy = (y1 - y0) / ny as f64;
        let xl = |i: usize| if i == nx { x1 } else { x0 + i as f64 * dx };
        let yl = |j: usize| if j == ny { y1 } else { y0 + j as f64 * dy };
        let b = |x: f64, y: f64| {
            0.5 * (-25.0 * (x - 1.0f64).powi(2) - 50.0 * (y - 0.5f64).powi(2)).exp() + 0.1
        };
        let corner = |i: usize, j: usize| b(xl(i), yl(j));
        let mut bxf = vec![0.0; (nx + 1) * ny];
        for j in 0..ny {
            for i in 0..=nx {
                bxf[j * (nx + 1) + i] = 0.5 * (corner(i, j) + corner(i, j + 1));
            }
        }
        let mut byf = vec![0.0; nx * (ny + 1)];
        for j in 0..=ny {
            for i in 0..nx {
                byf[j * nx + i] = 0.5 * (corner(i, j) + corner(i + 1, j));
            }
        }
        let mut bc = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                bc[j * nx + i] = 0.25
                    * (bxf[j * (nx + 1) + i + 1]
                        + bxf[j * (nx + 1) + i]
                        + byf[(j + 1) * nx + i]
                        + byf[j * nx + i]);
            }
        }
        Self {
            nx,
            ny,
            dx,
            dy,
            eps: dx.min(dy),
            bxf,
            byf,
            bc,
        }
    }

    fn point(&self, h: f64, qx: f64, qy: f64, along_x: bool) -> Point {
        let h4 = h.powi(4);
        let cor = std::f64::consts::SQRT_2 * h / (h4 + h4.max(self.eps.powi(4))).sqrt();
        let (u, v) = (cor * qx, cor * qy);
        let (qx, qy) = (h * u, h * v);
        let (qn, un) = if along_x { (qx, u) } else { (qy, v) };
        let flux = if along_x {
            [qx, qx * u + 0.5 * G * h * h, qx * v]
        } else {
            [qy, qy * u, qy * v + 0.5 * G * h * h]
        };
        // eigenvalues of [[un, c], [c, cor qn]]
        let c = (G * h.max(0.0)).sqrt();
        let w = cor.max(0.0) * qn;
        let m = 0.5 * (un + w);
        let half = 0.5 * (un - w);
        let rad = (half * half + c * c).sqrt();
        Point {
            u: [h, qx, qy],
            flux,
            lo: m - rad,
            hi: m + rad,
        }
    }

    fn cu(l: &Point, r: &Point) -> ([f64; 3], f64) {
        let am = l.lo.min(r.lo).min(0.0);
        let ap = l.hi.max(r.hi).max(0.0);
        let gap = ap - am;
        let mut f = [0.0; 3];
        if gap < 1e-14 {
            for m in 0..3 {
                f[m] = 0.5 * (l.flux[m] + r.flux[m]);
            }
        } else {
            for m in 0..3 {
                f[m] = (ap * l.flux[m] - am * r.flux[m]) / gap + ap * am / gap * (r.u[m] - l.u[m]);
            }
        }
        (f, ap.max(-am))
    }

    /// Right-hand side; also replaces `h` by the corrected cell average
    /// where a face was corrected. Returns the largest local speed.
    fn rhs(&self, u: &mut [[f64; 3]], out: &mut [[f64; 3]]) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let id = |i: usize, j: usize| j * nx + i;
        // W, E, S, N points per cell
        let mut pts = vec![[Point::default(); 4]; nx * ny];
        let mut new_h = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = id(i, j);
                let eta = |cc: usize| [u[cc][0] + self.bc[cc], u[cc][1], u[cc][2]];
                let (il, ir) = (i.saturating_sub(1), (i + 1).min(nx - 1));
                let (js, jn) = (j.saturating_sub(1), (j + 1).min(ny - 1));
                let (e0, el, er, es, en) = (
                    eta(c),
                    eta(id(il, j)),
                    eta(id(ir, j)),
                    eta(id(i, js)),
                    eta(id(i, jn)),
                );
                let mut face = [[0.0; 3]; 4];
                for m in 0..3 {
                    let sx = minmod(
                        THETA * (e0[m] - el[m]) / self.dx,
                        (er[m] - el[m]) / (2.0 * self.dx),
                        THETA * (er[m] - e0[m]) / self.dx,
                    );
                    let sy = minmod(
                        THETA * (e0[m] - es[m]) / self.dy,
                        (en[m] - es[m]) / (2.0 * self.dy),
                        THETA * (en[m] - e0[m]) / self.dy,
                    );
                    face[0][m] = e0[m] - 0.5 * self.dx * sx;
                    face[1][m] = e0[m] + 0.5 * self.dx * sx;
                    face[2][m] = e0[m] - 0.5 * self.dy * sy;
                    face[3][m] = e0[m] + 0.5 * self.dy * sy;
                }
                let fb = [
                    self.bxf[j * (nx + 1) + i],
                    self.bxf[j * (nx + 1) + i + 1],
                    self.byf[j * nx + i],
                    self.byf[(j + 1) * nx + i],
                ];
                let mut h = [0.0; 4];
                for f in 0..4 {
                    h[f] = face[f][0] - fb[f];
                }
                let hbar = u[c][0];
                let mut corrected = false;
                for (bad, opp) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
                    if h[bad] <= 0.0 {
                        h[bad] = 0.0;
                        h[opp] = 2.0 * hbar;
                        corrected = true;
                    }
                }
                new_h[c] = if corrected {
                    0.25 * (h[0] + h[1] + h[2] + h[3])
                } else {
                    hbar
                };
                for f in 0..4 {
                    pts[c][f] = self.point(h[f], face[f][1], face[f][2], f < 2);
                }
            }
        }
        for c in 0..nx * ny {
            u[c][0] = new_h[c];
        }
        let mut amax = 0.0f64;
        let mut fx = vec![[0.0; 3]; (nx + 1) * ny];
        for j in 0..ny {
            for i in 0..=nx {
                let l = if i > 0 {
                    pts[id(i - 1, j)][1]
                } else {
                    pts[id(0, j)][0]
                };
                let r = if i < nx {
                    pts[id(i, j)][0]
                } else {
                    pts[id(nx - 1, j)][1]
                };
                let (f, a) = Self::cu(&l, &r);
                fx[j * (nx + 1) + i] = f;
                amax = amax.max(a);
            }
        }
        let mut fy = vec![[0.0; 3]; nx * (ny + 1)];
        for j in 0..=ny {
            for i in 0..nx {
                let l = if j > 0 {
                    pts[id(i, j - 1)][3]
                } else {
                    pts[id(i, 0)][2]
                };
                let r = if j < ny {
                    pts[id(i, j)][2]
                } else {
                    pts[id(i, ny - 1)][3]
                };
                let (f, a) = Self::cu(&l, &r);
                fy[j * nx + i] = f;
                amax = amax.max(a);
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let c = id(i, j);
                let h = u[c][0];
                let src = [
                    0.0,
                    -G * h * (self.bxf[j * (nx + 1) + i + 1] - self.bxf[j * (nx + 1) + i])
                        / self.dx,
                    -G * h * (self.byf[(j + 1) * nx + i] - self.byf[j * nx + i]) / self.dy,
                ];
                for m in 0..3 {
                    out[c][m] = -(fx[j * (nx + 1) + i + 1][m] - fx[j * (nx + 1) + i][m]) / self.dx
                        - (fy[(j + 1) * nx + i][m] - fy[j * nx + i][m]) / self.dy
                        + src[m];
                }
            }
        }
        amax
    }

    pub fn solve(&self, end: f64) -> Vec<[f64; 3]> {
        let n = self.nx * self.ny;
        let mut u = vec![[0.0; 3]; n];
        for c in 0..n {
            let h = 1.0 - self.bc[c];
            u[c] = [h, h * 0.3, 0.0];
        }
        let mut t = 0.0;
        let mut r0 = vec![[0.0; 3]; n];
        let mut r1 = vec![[0.0; 3]; n];
        while t < end {
            let amax = self.rhs(&mut u, &mut r0);
            let mut dt_h = f64::INFINITY;
            for c in 0..n {
                let den = -r0[c][0];
                if den.abs() >= 1e-14 {
                    dt_h = dt_h.min((u[c][0] / den).abs());
                }
            }
            let dt_cfl = self.dx.min(self.dy) / (2.0 * amax);
            let mut dt = (CFL * dt_h.min(dt_cfl)).min(end - t);
            loop {
                let mut u1: Vec<[f64; 3]> = (0..n)
                    .map(|c| std::array::from_fn(|m| u[c][m] + dt * r0[c][m]))
                    .collect();
                if u1.iter().any(|v| v[0] <= 0.0) {
                    dt *= 0.5;
                    continue;
                }
                self.rhs(&mut u1, &mut r1);
                let next: Vec<[f64; 3]> = (0..n)
                    .map(|c| {
                        std::array::from_fn(|m| 0.5 * u[c][m] + 0.5 * (u1[c][m] + dt * r1[c][m]))
                    })
                    .collect();
                if next.iter().any(|v| v[0] <= 0.0) {
                    dt *= 0.5;
                    continue;
                }
                u = next;
                break;
            }
            t += dt;
            if (end - t).abs() <= 1e-12 * end.abs().max(1.0) {
                t = end;
            }
        }
        u
    }
}
