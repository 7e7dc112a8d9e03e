//! Direct elliptic solver on the fluid strip: the reference answer for
//! every surface-flux approximation in this crate.
//!
//! The velocity potential solves the anisotropic Laplace problem
//! μ ∂²_X φ + ∂²_z φ = 0 between the bed z = −1 + γ b(X/γ) and the surface
//! z = ζ(X) (the bed amplitude equals the fast scale, β = γ = √μ). The strip
//! is flattened onto [0, L) × [−1, 0] by z ↦ z + σ(X, z) with
//! σ = (z+1) ζ(X) − z γ b(X/γ), which turns the operator into
//! ∇·(Q ∇φ) with
//!
//!   Q = [[μ h, −μ σ_X], [−μ σ_X, (1 + μ σ_X²)/h]],   h = 1 + ζ − γ b,
//!
//! a symmetric positive matrix of determinant μ. Bilinear elements on the
//! uniform reference grid (vertex unknowns, periodic in X, Dirichlet top
//! row, natural no-flux bed) discretize the weak form; the factored
//! interior block then yields both the potential and the surface flux.
//!
//! The discrete flux q = A_BU u + A_BB ψ_B is the variational normal
//! derivative tested against surface hat functions, so q/Δx approximates
//! G ψ pointwise; on a flat strip its symbol is √μ ξ tanh(√μ ξ).

use crate::bathymetry::BottomProfile;
use crate::error::{Error, Result};
use crate::sparse::{mul_vec, SymmetricSystem};
use crate::spectral::{SlowField, SlowGrid};
use sprs::{CsMat, TriMat};

const DEPTH_FLOOR: f64 = 1e-6;

/// Factored strip problem for one (ζ, bed, μ) triple.
pub struct StripProblem {
    grid: SlowGrid,
    nx: usize,
    nz: usize,
    dx: f64,
    mu: f64,
    gamma: f64,
    a_uu: SymmetricSystem,
    a_ub: CsMat<f64>,
    a_bu: CsMat<f64>,
    a_bb: CsMat<f64>,
}

/// Potential on the full node grid, rows z-fastest: index i (nz+1) + j,
/// level j = nz is the surface.
pub struct StripPotential {
    pub nx: usize,
    pub nz: usize,
    pub values: Vec<f64>,
}

impl StripPotential {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.nz + 1) + j]
    }

    /// Reference vertical coordinate of node row j.
    pub fn z_level(&self, j: usize) -> f64 {
        -1.0 + j as f64 / self.nz as f64
    }
}

/// 4x4 bilinear element stiffness for constant coefficients on a dx × dz
/// cell; local node order (0,0), (1,0), (1,1), (0,1) in (x, z).
fn element_stiffness(qxx: f64, qxz: f64, qzz: f64, dx: f64, dz: f64) -> [[f64; 4]; 4] {
    let g0 = 0.5 * (1.0 - 1.0 / 3.0f64.sqrt());
    let g1 = 0.5 * (1.0 + 1.0 / 3.0f64.sqrt());
    let mut ke = [[0.0; 4]; 4];
    for &u in &[g0, g1] {
        for &v in &[g0, g1] {
            // shape gradients in unit coords, scaled to physical
            let du = [-(1.0 - v), 1.0 - v, v, -v];
            let dv = [-(1.0 - u), -u, u, 1.0 - u];
            let w = 0.25 * dx * dz;
            for a in 0..4 {
                let gxa = du[a] / dx;
                let gza = dv[a] / dz;
                for b in 0..4 {
                    let gxb = du[b] / dx;
                    let gzb = dv[b] / dz;
                    ke[a][b] += w
                        * (qxx * gxa * gxb + qxz * (gxa * gzb + gza * gxb) + qzz * gza * gzb);
                }
            }
        }
    }
    ke
}

impl StripProblem {
    /// Assembles and factors the strip for surface elevation `zeta` (on the
    /// horizontal grid the oracle will use), bed `b`, parameter μ, and `nz`
    /// vertical cells. A varying bed must be commensurate with the box:
    /// L/(2π√μ) integer to 1e-9.
    pub fn build(zeta: &SlowField, b: &BottomProfile, mu: f64, nz: usize) -> Result<Self> {
        let grid = zeta.grid().clone();
        if grid.dim() != 1 || b.dim() != 1 {
            return Err(Error::Unsupported(
                "strip oracle",
                "one horizontal dimension only".into(),
            ));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::State(format!("strip parameter mu = {mu} must be positive")));
        }
        if nz < 2 {
            return Err(Error::State(format!("strip needs at least 2 vertical cells, got {nz}")));
        }
        let gamma = mu.sqrt();
        let l = grid.box_length();
        if !b.is_flat() {
            let m = l / (2.0 * std::f64::consts::PI * gamma);
            if (m - m.round()).abs() > 1e-9 || m.round() < 1.0 {
                return Err(Error::Commensurability {
                    fast_period: 2.0 * std::f64::consts::PI * gamma,
                    box_length: l,
                    suggested: l / (2.0 * std::f64::consts::PI * m.round().max(1.0)),
                });
            }
        }

        let nx = grid.n_points();
        let dx = l / nx as f64;
        let dz = 1.0 / nz as f64;
        // cell-centered coefficient samples: ζ and ζ' midway between grid
        // points, bed evaluated analytically at the fast phase
        let zc = zeta.sampled_at_offset(&[0.5 * dx]);
        let dzc = zeta.deriv(0).sampled_at_offset(&[0.5 * dx]);
        let bspec = b.spectrum().clone();
        let bderiv = bspec.deriv(0);

        let n_u = nx * nz;
        let mut uu: Vec<(usize, usize, f64)> = Vec::with_capacity(16 * n_u);
        let mut ub = TriMat::new((n_u, nx));
        let mut bu = TriMat::new((nx, n_u));
        let mut bb = TriMat::new((nx, nx));

        for i in 0..nx {
            let xc = (i as f64 + 0.5) * dx;
            let y = [xc / gamma, 0.0];
            let bv = if b.is_flat() { 0.0 } else { bspec.eval(&y) };
            let bs = if b.is_flat() { 0.0 } else { bderiv.eval(&y) };
            let h = 1.0 + zc[i] - gamma * bv;
            if h <= DEPTH_FLOOR {
                return Err(Error::Depth { depth: h, index: i, time: 0.0 });
            }
            let ip = (i + 1) % nx;
            for j in 0..nz {
                let zcell = -1.0 + (j as f64 + 0.5) * dz;
                // σ_X = (z+1) ζ'(X) − z b'(X/γ) (the γ from the bed amplitude
                // cancels the 1/γ from the fast phase)
                let sx = (zcell + 1.0) * dzc[i] - zcell * bs;
                let qxx = mu * h;
                let qxz = -mu * sx;
                let qzz = (1.0 + mu * sx * sx) / h;
                let ke = element_stiffness(qxx, qxz, qzz, dx, dz);
                // global nodes, local order (0,0), (1,0), (1,1), (0,1)
                let cols = [i, ip, ip, i];
                let rows = [j, j, j + 1, j + 1];
                for a in 0..4 {
                    let (ia, ja) = (cols[a], rows[a]);
                    for c in 0..4 {
                        let (ic, jc) = (cols[c], rows[c]);
                        let v = ke[a][c];
                        match (ja == nz, jc == nz) {
                            (false, false) => uu.push((ia * nz + ja, ic * nz + jc, v)),
                            (false, true) => ub.add_triplet(ia * nz + ja, ic, v),
                            (true, false) => bu.add_triplet(ia, ic * nz + jc, v),
                            (true, true) => bb.add_triplet(ia, ic, v),
                        }
                    }
                }
            }
        }

        let a_uu = SymmetricSystem::from_triplets(n_u, &uu)?;
        Ok(Self {
            grid,
            nx,
            nz,
            dx,
            mu,
            gamma,
            a_uu,
            a_ub: ub.to_csr(),
            a_bu: bu.to_csr(),
            a_bb: bb.to_csr(),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    /// Horizontal grid the surface data must live on.
    pub fn surface_grid(&self) -> &SlowGrid {
        &self.grid
    }

    fn check_surface(&self, psi: &SlowField) -> Result<()> {
        self.grid.check_same(psi.grid(), "strip surface data")
    }

    fn interior_solve(&self, psi_b: &[f64]) -> Result<Vec<f64>> {
        let mut rhs = mul_vec(&self.a_ub, psi_b);
        for v in &mut rhs {
            *v = -*v;
        }
        self.a_uu.solve(&rhs)
    }

    /// Harmonic extension of surface data into the strip.
    pub fn solve_potential(&self, psi: &SlowField) -> Result<StripPotential> {
        self.check_surface(psi)?;
        let u = self.interior_solve(psi.values())?;
        let mut values = vec![0.0; self.nx * (self.nz + 1)];
        for i in 0..self.nx {
            for j in 0..self.nz {
                values[i * (self.nz + 1) + j] = u[i * self.nz + j];
            }
            values[i * (self.nz + 1) + self.nz] = psi.values()[i];
        }
        Ok(StripPotential { nx: self.nx, nz: self.nz, values })
    }

    /// Surface flux G ψ (variational normal derivative per unit length).
    /// The shallow-water normalization is (1/μ) G ψ.
    pub fn dn_apply(&self, psi: &SlowField) -> Result<SlowField> {
        self.check_surface(psi)?;
        let u = self.interior_solve(psi.values())?;
        let mut q = mul_vec(&self.a_bu, &u);
        let qb = mul_vec(&self.a_bb, psi.values());
        for (qi, bi) in q.iter_mut().zip(&qb) {
            *qi = (*qi + bi) / self.dx;
        }
        SlowField::new(self.grid.clone(), q)
    }

    /// Dirichlet energy pairing ⟨G ψ1, ψ2⟩ ≈ Σ_i q1_i ψ2_i.
    pub fn dn_form(&self, psi1: &SlowField, psi2: &SlowField) -> Result<f64> {
        self.check_surface(psi1)?;
        self.check_surface(psi2)?;
        let u = self.interior_solve(psi1.values())?;
        let mut q = mul_vec(&self.a_bu, &u);
        let qb = mul_vec(&self.a_bb, psi1.values());
        for (qi, bi) in q.iter_mut().zip(&qb) {
            *qi += bi;
        }
        Ok(q.iter().zip(psi2.values()).map(|(a, b)| a * b).sum())
    }

    /// |⟨Gψ1, ψ2⟩ − ⟨Gψ2, ψ1⟩|: zero for the exact operator, and for the
    /// discrete one up to solver accuracy.
    pub fn green_defect(&self, psi1: &SlowField, psi2: &SlowField) -> Result<f64> {
        Ok((self.dn_form(psi1, psi2)? - self.dn_form(psi2, psi1)?).abs())
    }
}
