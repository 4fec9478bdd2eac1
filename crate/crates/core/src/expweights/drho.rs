//! Shortest paths for the length element `|dz|/ρ(|z|)`.
//!
//! Nodes sit on a log-polar grid `(ξ, θ) = (ln r, θ)` with equal steps
//! `Δξ = Δθ = 2π/N_θ`, so the grid is conformally square and a coprime
//! stencil gives nearly isotropic edge directions. Rings are aligned so the
//! outermost one is the cover radius; geodesics between points inside the
//! cover never leave it, since the radial projection onto a disk shortens
//! `|dz|` while `ρ` is decreasing. The region `r < r_min` collapses to one
//! hub node joined radially to the innermost ring.
//!
//! Every graph edge is a genuine curve in the disk and its cost is the line
//! integral along that curve, so graph distances bound `d_ρ` from above.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Rho;
use crate::error::{Error, Result};
use crate::numeric::legendre::gauss_legendre;
use crate::numeric::quad::{adaptive, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    /// Angular nodes; also fixes the radial step.
    pub n_theta: usize,
    /// Outermost ring radius.
    pub r_cover: f64,
    /// Radius below which the disk is one node.
    pub r_min: f64,
    /// Stencil radius: edges to `(i+a, j+b)` with coprime `|a|, |b| <= stencil`.
    pub stencil: u32,
}

impl MeshSpec {
    pub fn new(n_theta: usize, r_cover: f64) -> Self {
        Self {
            n_theta,
            r_cover,
            r_min: 1e-3,
            stencil: 5,
        }
    }
}

pub struct Mesh {
    spec: MeshSpec,
    rho: Rho,
    n_rings: usize,
    step: f64,
    xi0: f64,
    stencil: Vec<(i32, i32)>,
    /// Edge cost per ring and stencil entry; `INFINITY` when the edge leaves the mesh.
    cost: Vec<f64>,
    hub_cost: f64,
    gl: (Vec<f64>, Vec<f64>),
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    d: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.d.total_cmp(&self.d).then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mesh {
    pub fn new(rho: Rho, spec: MeshSpec) -> Result<Self> {
        if spec.n_theta < 8 {
            return Err(Error::Parameter(format!("n_theta must be >= 8, got {}", spec.n_theta)));
        }
        if !(spec.r_cover > spec.r_min && spec.r_cover < 1.0 && spec.r_min > 0.0) {
            return Err(Error::Parameter(format!(
                "mesh needs 0 < r_min < r_cover < 1 (got {}, {})",
                spec.r_min, spec.r_cover
            )));
        }
        if spec.stencil == 0 {
            return Err(Error::Parameter("stencil radius must be >= 1".into()));
        }
        let step = 2.0 * PI / spec.n_theta as f64;
        let xi_top = spec.r_cover.ln();
        let n_rings = ((xi_top - spec.r_min.ln()) / step).floor() as usize + 1;
        let xi0 = xi_top - (n_rings - 1) as f64 * step;
        let s = spec.stencil as i32;
        let mut stencil = Vec::new();
        for a in -s..=s {
            for b in -s..=s {
                if (a, b) != (0, 0) && gcd(a.unsigned_abs(), b.unsigned_abs()) == 1 {
                    stencil.push((a, b));
                }
            }
        }
        let mut mesh = Self {
            spec,
            rho,
            n_rings,
            step,
            xi0,
            stencil,
            cost: Vec::new(),
            hub_cost: 0.0,
            gl: gauss_legendre(6),
        };
        let mut cost = Vec::with_capacity(n_rings * mesh.stencil.len());
        for i in 0..n_rings {
            for &(a, b) in &mesh.stencil {
                let ii = i as i64 + a as i64;
                cost.push(if ii < 0 || ii >= n_rings as i64 {
                    f64::INFINITY
                } else {
                    mesh.segment(mesh.xi(i), a as f64 * step, b as f64 * step)
                });
            }
        }
        mesh.cost = cost;
        mesh.hub_cost = mesh.radial_from_origin(xi0.exp());
        Ok(mesh)
    }

    pub fn spec(&self) -> &MeshSpec {
        &self.spec
    }

    pub fn rho(&self) -> Rho {
        self.rho
    }

    pub fn n_rings(&self) -> usize {
        self.n_rings
    }

    /// Worst relative excess of a stencil polyline over a straight segment:
    /// `1/cos(g/2) - 1` for the widest angular gap `g` between stencil
    /// directions. It does not shrink under refinement.
    pub fn anisotropy(&self) -> f64 {
        let mut angles: Vec<f64> = self.stencil.iter().map(|&(a, b)| (b as f64).atan2(a as f64)).collect();
        angles.sort_by(f64::total_cmp);
        let gap = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(2.0 * PI + angles[0] - angles[angles.len() - 1], f64::max);
        1.0 / (0.5 * gap).cos() - 1.0
    }

    pub fn n_nodes(&self) -> usize {
        self.n_rings * self.spec.n_theta + 1
    }

    fn hub(&self) -> usize {
        self.n_rings * self.spec.n_theta
    }

    fn xi(&self, i: usize) -> f64 {
        self.xi0 + i as f64 * self.step
    }

    fn ln_inv_rho_xi(&self, xi: f64) -> f64 {
        // 1 - r = -expm1(ξ)
        -self.rho.exponent * (-xi.exp_m1()).ln()
    }

    /// Cost of the straight segment in `(ξ, θ)` from `(xi, ·)` with the given increments.
    fn segment(&self, xi: f64, dxi: f64, dtheta: f64) -> f64 {
        let len = dxi.hypot(dtheta);
        if len == 0.0 {
            return 0.0;
        }
        let pieces = (dxi.abs() / (0.5 * self.step)).ceil().max(1.0) as usize;
        let h = 1.0 / pieces as f64;
        let (x, w) = &self.gl;
        let mut acc = 0.0;
        for p in 0..pieces {
            for (xk, wk) in x.iter().zip(w) {
                let t = h * (p as f64 + 0.5 * (xk + 1.0));
                let e = xi + t * dxi;
                acc += 0.5 * h * wk * (e + self.ln_inv_rho_xi(e)).exp();
            }
        }
        len * acc
    }

    /// `∫_0^r dt/ρ(t)`.
    fn radial_from_origin(&self, r: f64) -> f64 {
        let f = |t: f64| 1.0 / self.rho.eval(t);
        adaptive(&f, &[0.0, r], &QuadOptions::default()).map_or(f64::INFINITY, |q| q.value)
    }

    fn check_point(&self, z: Complex64) -> Result<()> {
        let r = z.norm();
        if !r.is_finite() || r > self.spec.r_cover * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "|z| = {r} exceeds the covered radius {}",
                self.spec.r_cover
            )));
        }
        Ok(())
    }

    /// Graph nodes next to `z` with the cost of joining them to `z`.
    fn attach(&self, z: Complex64) -> Vec<(usize, f64)> {
        let r = z.norm().min(self.spec.r_cover);
        if r == 0.0 {
            return vec![(self.hub(), 0.0)];
        }
        let n = self.spec.n_theta as i64;
        let w = self.spec.stencil as i64 + 1;
        let xi = r.ln();
        let theta = z.arg().rem_euclid(2.0 * PI);
        let s = (xi - self.xi0) / self.step;
        let t = theta / self.step;
        let (ic, jc) = (s.round() as i64, t.round() as i64);
        let mut out = Vec::new();
        for i in (ic - w).max(0)..=(ic + w).min(self.n_rings as i64 - 1) {
            for j in jc - w..=jc + w {
                let c = self.segment(xi, (i as f64 - s) * self.step, (j as f64 - t) * self.step);
                out.push((i as usize * self.spec.n_theta + j.rem_euclid(n) as usize, c));
            }
        }
        if s < w as f64 {
            out.push((self.hub(), self.radial_from_origin(r)));
        }
        out
    }

    /// Cost of the log-polar segment between two points (the shorter way round).
    fn direct(&self, z: Complex64, zeta: Complex64) -> f64 {
        let (a, b) = (z.norm(), zeta.norm());
        if a == 0.0 || b == 0.0 {
            return self.radial_from_origin(a.max(b));
        }
        let dth = (zeta.arg() - z.arg() + PI).rem_euclid(2.0 * PI) - PI;
        self.segment(a.ln(), b.ln() - a.ln(), dth)
    }

    fn dijkstra(&self, sources: &[(usize, f64)]) -> Vec<f64> {
        let nt = self.spec.n_theta;
        let ns = self.stencil.len();
        let hub = self.hub();
        let mut dist = vec![f64::INFINITY; self.n_nodes()];
        let mut heap = BinaryHeap::new();
        for &(node, c) in sources {
            if c < dist[node] {
                dist[node] = c;
                heap.push(State { d: c, node });
            }
        }
        let relax = |dist: &mut Vec<f64>, heap: &mut BinaryHeap<State>, node: usize, d: f64| {
            if d < dist[node] {
                dist[node] = d;
                heap.push(State { d, node });
            }
        };
        while let Some(State { d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            if node == hub {
                for j in 0..nt {
                    relax(&mut dist, &mut heap, j, d + self.hub_cost);
                }
                continue;
            }
            let (i, j) = (node / nt, node % nt);
            if i == 0 {
                relax(&mut dist, &mut heap, hub, d + self.hub_cost);
            }
            let row = &self.cost[i * ns..(i + 1) * ns];
            for (&(a, b), &c) in self.stencil.iter().zip(row) {
                if c.is_finite() {
                    let ii = (i as i64 + a as i64) as usize;
                    let jj = (j as i64 + b as i64).rem_euclid(nt as i64) as usize;
                    relax(&mut dist, &mut heap, ii * nt + jj, d + c);
                }
            }
        }
        dist
    }

    /// Distances from `z` to every node.
    pub fn field(&self, z: Complex64) -> Result<DistanceField<'_>> {
        self.check_point(z)?;
        Ok(DistanceField {
            mesh: self,
            source: z,
            dist: self.dijkstra(&self.attach(z)),
        })
    }
}

pub struct DistanceField<'a> {
    mesh: &'a Mesh,
    source: Complex64,
    dist: Vec<f64>,
}

impl DistanceField<'_> {
    pub fn source(&self) -> Complex64 {
        self.source
    }

    pub fn node_distances(&self) -> &[f64] {
        &self.dist
    }

    /// Graph distance from the source to `zeta`.
    pub fn to(&self, zeta: Complex64) -> Result<f64> {
        self.mesh.check_point(zeta)?;
        let via_graph = self
            .mesh
            .attach(zeta)
            .into_iter()
            .map(|(node, c)| self.dist[node] + c)
            .fold(f64::INFINITY, f64::min);
        Ok(via_graph.min(self.mesh.direct(self.source, zeta)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DRho {
    /// Graph value at `N_θ`.
    pub value: f64,
    /// Graph value at `N_θ / 2`.
    pub coarse: f64,
    /// First-order extrapolation `2·value - coarse`.
    pub richardson: f64,
    /// `|value - coarse| + anisotropy·value`.
    pub tolerance: f64,
    /// Line integral along the chord.
    pub chord: f64,
    pub n_theta: usize,
}

/// `∫_0^1 |ζ - z| / ρ(|z + t(ζ - z)|) dt`.
pub fn straight_segment_bound(rho: Rho, z: Complex64, zeta: Complex64) -> Result<f64> {
    let d = zeta - z;
    let len = d.norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let f = |t: f64| len / rho.eval((z + d * t).norm());
    // the modulus has a kink where the chord passes closest to the origin
    let t0 = (-(z.re * d.re + z.im * d.im) / (len * len)).clamp(0.0, 1.0);
    let mut breaks = vec![0.0, t0, 1.0];
    breaks.dedup();
    Ok(adaptive(&f, &breaks, &QuadOptions::default())?.value)
}

/// `d_ρ(z, ζ)` from meshes covering `max(|z|, |ζ|)` at `N_θ` and `N_θ/2`.
pub fn d_rho(rho: Rho, z: Complex64, zeta: Complex64, n_theta: usize) -> Result<DRho> {
    let cover = z.norm().max(zeta.norm());
    if !(cover < 1.0) {
        return Err(Error::Resolution(format!("|z| = {cover} is not inside the disk")));
    }
    let chord = straight_segment_bound(rho, z, zeta)?;
    if cover < 1e-3 {
        return Ok(DRho {
            value: chord,
            coarse: chord,
            richardson: chord,
            tolerance: 0.0,
            chord,
            n_theta,
        });
    }
    let fine = Mesh::new(rho, MeshSpec::new(n_theta, cover))?;
    let value = fine.field(z)?.to(zeta)?;
    let coarse = Mesh::new(rho, MeshSpec::new(n_theta / 2, cover))?.field(z)?.to(zeta)?;
    Ok(DRho {
        value,
        coarse,
        richardson: 2.0 * value - coarse,
        tolerance: (value - coarse).abs() + fine.anisotropy() * value,
        chord,
        n_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radial_path_from_origin() {
        let rho = Rho { exponent: 1.0 };
        let d = d_rho(rho, c(0.0, 0.0), c(0.5, 0.0), 128).unwrap();
        assert!((d.value - 2f64.ln()).abs() < 1e-9, "{d:?}");
        assert!((d.chord - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn graph_is_below_chord_and_refines_downward() {
        let rho = Rho { exponent: 1.5 };
        let (z, w) = (c(0.6, 0.1), c(-0.2, 0.7));
        let d = d_rho(rho, z, w, 256).unwrap();
        assert!(d.value <= d.chord + d.tolerance, "{d:?}");
        assert!(d.value <= d.coarse + 1e-12);
        assert!((d.value - d.coarse).abs() < 0.01 * d.value);
    }

    #[test]
    fn symmetric_on_one_mesh() {
        let rho = Rho { exponent: 1.5 };
        let mesh = Mesh::new(rho, MeshSpec::new(128, 0.9)).unwrap();
        let (z, w) = (c(0.9, 0.0), c(-0.3, -0.5));
        let a = mesh.field(z).unwrap().to(w).unwrap();
        let b = mesh.field(w).unwrap().to(z).unwrap();
        assert!((a - b).abs() < 1e-3 * a, "{a} vs {b}");
    }

    #[test]
    fn stencil_bias_bound() {
        let mesh = Mesh::new(Rho { exponent: 1.0 }, MeshSpec::new(64, 0.5)).unwrap();
        // widest gap is atan(1/5)
        let expect = 1.0 / (0.5 * 0.2f64.atan()).cos() - 1.0;
        assert!((mesh.anisotropy() - expect).abs() < 1e-12);
    }

    #[test]
    fn distance_from_origin_is_rotation_invariant() {
        let rho = Rho { exponent: 1.5 };
        let mesh = Mesh::new(rho, MeshSpec::new(128, 0.8)).unwrap();
        let f = mesh.field(c(0.0, 0.0)).unwrap();
        let d0 = f.to(c(0.8, 0.0)).unwrap();
        for th in [0.3, 1.7, 4.0] {
            let d = f.to(Complex64::from_polar(0.8, th)).unwrap();
            assert!((d - d0).abs() < 1e-3 * d0, "{th}: {d} vs {d0}");
        }
    }

    #[test]
    fn outside_the_cover_is_a_resolution_error() {
        let mesh = Mesh::new(Rho { exponent: 1.0 }, MeshSpec::new(64, 0.5)).unwrap();
        assert!(matches!(mesh.field(c(0.7, 0.0)), Err(Error::Resolution(_))));
    }
}
