//! The vertical cell problem on the fast torus and its verification oracle.
//!
//! For each fast mode k ≠ 0 the leading-order interior potential solves
//!
//!   −h0²|k|² φ̂_k(z) + φ̂_k''(z) = 0   on −1 < z < 0,
//!   φ̂_k(0) = ψ̂1_k,
//!   (1/h0) φ̂_k'(−1) = i (k·∇ψ0) b̂_k,
//!
//! with the closed form (κ = h0|k|)
//!
//!   φ̂_k(z) = C1(z) ψ̂1_k + C2(z) · i (k·∇ψ0) b̂_k / |k|,
//!   C1(z) = cosh(κ(z+1))/cosh(κ),   C2(z) = sinh(κz)/cosh(κ),
//!
//! evaluated here in overflow-safe exponential form. The fast surface trace
//! (1/h0) φ̂_k'(0) = |k| tanh(h0|k|) ψ̂1_k + i (k·∇ψ0) sech(h0|k|) b̂_k feeds
//! the effective surface operator. A second-order finite-difference solve of
//! the same boundary-value problem acts as an independent oracle.

use crate::bathymetry::BottomProfile;
use crate::error::{Error, Result};
use crate::par;
use crate::sparse::SymmetricSystem;
use crate::spectral::{op_dn_tanh, sech, SlowField, TorusSpectrum};
use num_complex::Complex64;

/// Overflow-safe C1(z) = cosh(κ(z+1))/cosh(κ) for z ∈ [−1, 0], κ ≥ 0.
fn coef_c1(kappa: f64, z: f64) -> f64 {
    let den = 1.0 + (-2.0 * kappa).exp();
    (kappa * z).exp() * (1.0 + (-2.0 * kappa * (z + 1.0)).exp()) / den
}

/// dC1/dz = κ sinh(κ(z+1))/cosh(κ).
fn coef_c1_dz(kappa: f64, z: f64) -> f64 {
    let den = 1.0 + (-2.0 * kappa).exp();
    kappa * (kappa * z).exp() * (1.0 - (-2.0 * kappa * (z + 1.0)).exp()) / den
}

/// Overflow-safe C2(z) = sinh(κz)/cosh(κ) for z ∈ [−1, 0].
fn coef_c2(kappa: f64, z: f64) -> f64 {
    let za = -z;
    let den = 1.0 + (-2.0 * kappa).exp();
    -((kappa * (za - 1.0)).exp()) * (1.0 - (-2.0 * kappa * za).exp()) / den
}

/// dC2/dz = κ cosh(κz)/cosh(κ).
fn coef_c2_dz(kappa: f64, z: f64) -> f64 {
    let za = -z;
    let den = 1.0 + (-2.0 * kappa).exp();
    kappa * (kappa * (za - 1.0)).exp() * (1.0 + (-2.0 * kappa * za).exp()) / den
}

/// Mode-resolved vertical profiles: for each slow point and fast mode k, the
/// coefficient φ̂_k(z) sampled on uniform z levels spanning [−1, 0], together
/// with its z-derivative.
#[derive(Clone, Debug)]
pub struct VerticalProfileField {
    dim: usize,
    cutoff: usize,
    n_slow: usize,
    z: Vec<f64>,
    h0: Vec<f64>,
    samples: Vec<Complex64>,
    dz_samples: Vec<Complex64>,
    top_data: Option<TorusSpectrum>,
    bottom_flux: Option<TorusSpectrum>,
}

impl VerticalProfileField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_slow(&self) -> usize {
        self.n_slow
    }

    /// Number of z levels (both endpoints included).
    pub fn nz(&self) -> usize {
        self.z.len()
    }

    pub fn z_levels(&self) -> &[f64] {
        &self.z
    }

    pub fn h0(&self, slow: usize) -> f64 {
        self.h0[slow]
    }

    pub fn mode_count(&self) -> usize {
        (2 * self.cutoff + 1).pow(self.dim as u32)
    }

    fn offset(&self, slow: usize, mode: usize, iz: usize) -> usize {
        (slow * self.mode_count() + mode) * self.z.len() + iz
    }

    pub fn sample(&self, slow: usize, mode: usize, iz: usize) -> Complex64 {
        self.samples[self.offset(slow, mode, iz)]
    }

    pub fn dz_sample(&self, slow: usize, mode: usize, iz: usize) -> Complex64 {
        self.dz_samples[self.offset(slow, mode, iz)]
    }

    /// Torus spectrum of the profile at one z level.
    pub fn spectrum_at_level(&self, slow: usize, iz: usize) -> TorusSpectrum {
        let mut s = TorusSpectrum::zero(self.dim, self.cutoff);
        let template = TorusSpectrum::zero(self.dim, self.cutoff);
        for m in 0..self.mode_count() {
            let k = template.k_at(m);
            s.set(&k, self.sample(slow, m, iz));
        }
        s
    }

    /// Surface trace φ(·, 0).
    pub fn top_trace(&self, slow: usize) -> TorusSpectrum {
        self.spectrum_at_level(slow, self.z.len() - 1)
    }

    /// Conormal surface trace (1/h0) ∂z φ at z = 0.
    pub fn dn_top_trace(&self, slow: usize) -> TorusSpectrum {
        let mut s = TorusSpectrum::zero(self.dim, self.cutoff);
        let template = TorusSpectrum::zero(self.dim, self.cutoff);
        let top = self.z.len() - 1;
        for m in 0..self.mode_count() {
            let k = template.k_at(m);
            s.set(&k, self.dz_sample(slow, m, top) / self.h0[slow]);
        }
        s
    }

    /// The Dirichlet data the field was solved with, if any.
    pub fn top_data(&self) -> Option<&TorusSpectrum> {
        self.top_data.as_ref()
    }

    /// The bottom conormal flux data the field was solved with, if any.
    pub fn bottom_flux(&self) -> Option<&TorusSpectrum> {
        self.bottom_flux.as_ref()
    }

    /// Realizes the profile of slow point `slow` on a uniform ny × nz grid
    /// (y-major layout: index iy·nz + iz, z ascending from −1).
    pub fn eval_grid(&self, slow: usize, ny: usize) -> Vec<f64> {
        let nz = self.z.len();
        let dy = 2.0 * std::f64::consts::PI / ny as f64;
        assert_eq!(self.dim, 1, "grid realization is 1-dimensional");
        let mc = self.mode_count();
        let template = TorusSpectrum::zero(self.dim, self.cutoff);
        let mut out = vec![0.0; ny * nz];
        for iy in 0..ny {
            let y = iy as f64 * dy;
            for m in 0..mc {
                let k = template.k_at(m)[0] as f64;
                let phase = Complex64::from_polar(1.0, k * y);
                for iz in 0..nz {
                    out[iy * nz + iz] += (self.sample(slow, m, iz) * phase).re;
                }
            }
        }
        out
    }

    /// Applies a pointwise modification to the stored samples (derivatives
    /// are left untouched); for constructing perturbed fields in
    /// verification code.
    pub fn map_samples(
        &self,
        f: impl Fn(usize, &[i64; 2], f64, Complex64) -> Complex64,
    ) -> VerticalProfileField {
        let mut out = self.clone();
        let template = TorusSpectrum::zero(self.dim, self.cutoff);
        for s in 0..self.n_slow {
            for m in 0..self.mode_count() {
                let k = template.k_at(m);
                for iz in 0..self.z.len() {
                    let o = self.offset(s, m, iz);
                    out.samples[o] = f(s, &k, self.z[iz], self.samples[o]);
                }
            }
        }
        out
    }
}

fn unify_cutoff(psi1: &TorusSpectrum, b: &BottomProfile) -> Result<(TorusSpectrum, TorusSpectrum)> {
    if psi1.dim() != b.dim() {
        return Err(Error::GridMismatch(format!(
            "surface data is {}-dimensional, bottom is {}-dimensional",
            psi1.dim(),
            b.dim()
        )));
    }
    let k = psi1.cutoff().max(b.cutoff());
    Ok((psi1.lift(k)?, b.spectrum().lift(k)?))
}

/// Solves the cell problem in closed form on `nz` uniform z levels.
///
/// `psi1` is the zero-mean Dirichlet surface data, `b` the bottom profile,
/// `grad_psi0` the slow velocity entering the bottom flux i (k·∇ψ0) b̂_k.
pub fn solve_cell(
    h0: f64,
    psi1: &TorusSpectrum,
    b: &BottomProfile,
    grad_psi0: &[f64],
    nz: usize,
) -> Result<VerticalProfileField> {
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::Depth { depth: h0, index: 0, time: 0.0 });
    }
    if nz < 4 {
        return Err(Error::Unsupported("vertical resolution", format!("nz = {nz} < 4")));
    }
    psi1.require_zero_mean(1e-12)?;
    let (psi1, bspec) = unify_cutoff(psi1, b)?;
    let dim = psi1.dim();
    if grad_psi0.len() != dim {
        return Err(Error::GridMismatch(format!(
            "{} velocity components for a {}-dimensional torus",
            grad_psi0.len(),
            dim
        )));
    }

    let cutoff = psi1.cutoff();
    let mc = psi1.mode_count();
    let z: Vec<f64> = (0..nz).map(|j| -1.0 + j as f64 / (nz - 1) as f64).collect();

    let mut samples = vec![Complex64::default(); mc * nz];
    let mut dz_samples = vec![Complex64::default(); mc * nz];
    let mut bottom = TorusSpectrum::zero(dim, cutoff);

    for m in 0..mc {
        let k = psi1.k_at(m);
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let psi_hat = psi1.coeffs()[m];
        let b_hat = bspec.coeff(&k);
        let kg: f64 = (0..dim).map(|a| k[a] as f64 * grad_psi0[a]).sum();
        let flux = Complex64::new(0.0, kg) * b_hat;
        bottom.set(&k, flux);
        if kn == 0.0 {
            // constant mode: Dirichlet value throughout, zero flux
            for j in 0..nz {
                samples[m * nz + j] = psi_hat;
            }
            continue;
        }
        let kappa = h0 * kn;
        let b_coef = Complex64::new(0.0, kg / kn) * b_hat;
        for (j, &zj) in z.iter().enumerate() {
            samples[m * nz + j] = psi_hat * coef_c1(kappa, zj) + b_coef * coef_c2(kappa, zj);
            dz_samples[m * nz + j] =
                psi_hat * coef_c1_dz(kappa, zj) + b_coef * coef_c2_dz(kappa, zj);
        }
    }

    Ok(VerticalProfileField {
        dim,
        cutoff,
        n_slow: 1,
        z,
        h0: vec![h0],
        samples,
        dz_samples,
        top_data: Some(psi1),
        bottom_flux: Some(bottom),
    })
}

/// Residual of a profile field in the cell problem: the maximum over modes
/// and interior levels of the second-order discrete equation residual
/// |−h0²|k|² φ̂ + δz² φ̂|, plus the top Dirichlet defect and the bottom flux
/// defect against data rebuilt from (`b`, `grad_psi0`).
pub fn cell_residual(
    phi: &VerticalProfileField,
    h0: f64,
    b: &BottomProfile,
    grad_psi0: &[f64],
) -> Result<f64> {
    if phi.n_slow != 1 {
        return Err(Error::Unsupported("cell residual", "multi-point profile field".into()));
    }
    let nz = phi.nz();
    let dz = 1.0 / (nz - 1) as f64;
    let template = TorusSpectrum::zero(phi.dim, phi.cutoff);
    let bspec = b.spectrum().lift(phi.cutoff)?;

    let mut worst = 0.0f64;
    for m in 0..phi.mode_count() {
        let k = template.k_at(m);
        let kn2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        // interior equation residual
        for iz in 1..nz - 1 {
            let d2 = (phi.sample(0, m, iz - 1) - phi.sample(0, m, iz) * 2.0
                + phi.sample(0, m, iz + 1))
                / (dz * dz);
            let r = (d2 - phi.sample(0, m, iz) * (h0 * h0 * kn2)).norm();
            worst = worst.max(r);
        }
        // top Dirichlet defect against stored data
        if let Some(top) = &phi.top_data {
            worst = worst.max((phi.sample(0, m, nz - 1) - top.coeff(&k)).norm());
        }
        // bottom flux defect: one-sided second-order derivative vs i(k·∇ψ0) b̂
        let kg: f64 = (0..phi.dim).map(|a| k[a] as f64 * grad_psi0[a]).sum();
        let target = Complex64::new(0.0, kg) * bspec.coeff(&k);
        let dz_bottom = (phi.sample(0, m, 0) * (-3.0) + phi.sample(0, m, 1) * 4.0
            - phi.sample(0, m, 2))
            / (2.0 * dz);
        worst = worst.max((dz_bottom / h0 - target).norm());
    }
    Ok(worst)
}

/// Fast surface trace of the cell solution without solving it:
/// (1/h0) ∂z φ|_{z=0} = |k| tanh(h0|k|) ψ̂1_k + i (k·∇ψ0) sech(h0|k|) b̂_k.
pub fn dn_trace_fast(
    h0: f64,
    psi1: &TorusSpectrum,
    b: &BottomProfile,
    grad_psi0: &[f64],
) -> Result<TorusSpectrum> {
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::Depth { depth: h0, index: 0, time: 0.0 });
    }
    psi1.require_zero_mean(1e-12)?;
    let (psi1, bspec) = unify_cutoff(psi1, b)?;
    let dim = psi1.dim();
    if grad_psi0.len() != dim {
        return Err(Error::GridMismatch(format!(
            "{} velocity components for a {}-dimensional torus",
            grad_psi0.len(),
            dim
        )));
    }
    let surf = op_dn_tanh(h0, &psi1)?;
    let bed = bspec.apply_multiplier(|k| {
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let kg: f64 = (0..dim).map(|a| k[a] as f64 * grad_psi0[a]).sum();
        Complex64::new(0.0, kg * sech(h0 * kn))
    })?;
    Ok(surf.add(&bed))
}

/// First slow corrector of the interior potential:
/// φ(X, z) = −h0(X)² (z²/2 + z) Δψ0(X), ∂z φ = −h0² (z + 1) Δψ0.
///
/// Returned as a profile field with one (k = 0) mode per slow point.
pub fn phi0_first_corrector(
    h0: &SlowField,
    psi0: &SlowField,
    nz: usize,
) -> Result<VerticalProfileField> {
    if h0.grid() != psi0.grid() {
        return Err(Error::GridMismatch("depth and potential on different grids".into()));
    }
    if nz < 4 {
        return Err(Error::Unsupported("vertical resolution", format!("nz = {nz} < 4")));
    }
    let lap = psi0.laplacian();
    let n_slow = h0.grid().total_points();
    let z: Vec<f64> = (0..nz).map(|j| -1.0 + j as f64 / (nz - 1) as f64).collect();
    let mut samples = vec![Complex64::default(); n_slow * nz];
    let mut dz_samples = vec![Complex64::default(); n_slow * nz];
    for s in 0..n_slow {
        let h = h0.values()[s];
        if h <= 0.0 {
            return Err(Error::Depth { depth: h, index: s, time: 0.0 });
        }
        let c = -h * h * lap.values()[s];
        for (j, &zj) in z.iter().enumerate() {
            samples[s * nz + j] = Complex64::new(c * (zj * zj / 2.0 + zj), 0.0);
            dz_samples[s * nz + j] = Complex64::new(c * (zj + 1.0), 0.0);
        }
    }
    Ok(VerticalProfileField {
        dim: h0.grid().dim(),
        cutoff: 0,
        n_slow,
        z,
        h0: h0.values().to_vec(),
        samples,
        dz_samples,
        top_data: None,
        bottom_flux: None,
    })
}

/// Direct finite-difference solution of the cell problem on a ny × nz_cells
/// tensor grid (independent oracle for [`solve_cell`]).
#[derive(Clone, Debug)]
pub struct CellGridSolution {
    pub ny: usize,
    /// z levels including both endpoints (nz_cells + 1).
    pub nz_levels: usize,
    /// y-major layout: index iy·nz_levels + iz, z ascending from −1.
    pub values: Vec<f64>,
}

impl CellGridSolution {
    /// Relative L² difference against another field sampled on the same
    /// nodes (reference in the denominator).
    pub fn relative_l2_diff(&self, reference: &[f64]) -> f64 {
        assert_eq!(reference.len(), self.values.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in self.values.iter().zip(reference) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        (num / den.max(1e-300)).sqrt()
    }
}

/// Second-order finite-difference solve of the cell problem (1D torus):
/// five-point Laplacian with h0² horizontal weighting, periodic in y,
/// Dirichlet top from `psi1`, ghost-node Neumann bottom from the profile
/// flux. The symmetric positive-definite system is factored directly.
pub fn oracle_cell_solve(
    h0: f64,
    psi1: &TorusSpectrum,
    b: &BottomProfile,
    grad_psi0: &[f64],
    ny: usize,
    nz_cells: usize,
) -> Result<CellGridSolution> {
    if psi1.dim() != 1 || b.dim() != 1 {
        return Err(Error::Unsupported("cell oracle", "2-dimensional torus".into()));
    }
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::Depth { depth: h0, index: 0, time: 0.0 });
    }
    if ny < 8 || nz_cells < 8 {
        return Err(Error::Unsupported(
            "cell oracle resolution",
            format!("ny = {ny}, nz = {nz_cells}; need at least 8 cells per direction"),
        ));
    }
    psi1.require_zero_mean(1e-12)?;
    if grad_psi0.len() != 1 {
        return Err(Error::GridMismatch("cell oracle needs one velocity component".into()));
    }

    let two_pi = 2.0 * std::f64::consts::PI;
    let dy = two_pi / ny as f64;
    let dz = 1.0 / nz_cells as f64;
    let nz = nz_cells; // unknown z levels per column: j = 0..nz (top excluded)

    // boundary data sampled on the oracle's own nodes
    let psi_top: Vec<f64> = (0..ny).map(|i| psi1.eval(&[i as f64 * dy, 0.0])).collect();
    let db = b.spectrum().deriv(0);
    let flux_bottom: Vec<f64> =
        (0..ny).map(|i| grad_psi0[0] * db.eval(&[i as f64 * dy, 0.0])).collect();

    let cy = h0 * h0 / (dy * dy);
    let cz = 1.0 / (dz * dz);
    let n_unknowns = ny * nz;
    let idx = |iy: usize, j: usize| iy * nz + j;

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(5 * n_unknowns);
    let mut rhs = vec![0.0; n_unknowns];

    for iy in 0..ny {
        let left = (iy + ny - 1) % ny;
        let right = (iy + 1) % ny;
        for j in 0..nz {
            let row = idx(iy, j);
            if j == 0 {
                // bottom row: ghost node eliminated through the Neumann
                // condition ∂z φ = h0 · flux, then halved for symmetry
                triplets.push((row, row, cy + cz));
                triplets.push((row, idx(left, 0), -cy / 2.0));
                triplets.push((row, idx(right, 0), -cy / 2.0));
                triplets.push((row, idx(iy, 1), -cz));
                rhs[row] = -h0 * flux_bottom[iy] / dz;
            } else {
                triplets.push((row, row, 2.0 * cy + 2.0 * cz));
                triplets.push((row, idx(left, j), -cy));
                triplets.push((row, idx(right, j), -cy));
                triplets.push((row, idx(iy, j - 1), -cz));
                if j + 1 < nz {
                    triplets.push((row, idx(iy, j + 1), -cz));
                } else {
                    // Dirichlet top moved to the right-hand side
                    rhs[row] += cz * psi_top[iy];
                }
            }
        }
    }

    let sys = SymmetricSystem::from_triplets(n_unknowns, &triplets)?;
    let u = sys.solve(&rhs)?;

    let nz_levels = nz_cells + 1;
    let mut values = vec![0.0; ny * nz_levels];
    for iy in 0..ny {
        for j in 0..nz {
            values[iy * nz_levels + j] = u[idx(iy, j)];
        }
        values[iy * nz_levels + nz_cells] = psi_top[iy];
    }
    Ok(CellGridSolution { ny, nz_levels, values })
}

/// Convenience: closed-form solution realized on the oracle's grid layout.
pub fn closed_form_on_grid(
    h0: f64,
    psi1: &TorusSpectrum,
    b: &BottomProfile,
    grad_psi0: &[f64],
    ny: usize,
    nz_cells: usize,
) -> Result<Vec<f64>> {
    let field = solve_cell(h0, psi1, b, grad_psi0, nz_cells + 1)?;
    Ok(field.eval_grid(0, ny))
}

/// Parallel sweep helper: closed-form cell solves across many slow points.
pub fn solve_cell_batch(
    h0: &[f64],
    psi1: &[TorusSpectrum],
    b: &BottomProfile,
    grad_psi0: &[Vec<f64>],
    nz: usize,
) -> Result<Vec<VerticalProfileField>> {
    assert_eq!(h0.len(), psi1.len());
    assert_eq!(h0.len(), grad_psi0.len());
    par::try_map_indexed(h0.len(), |i| solve_cell(h0[i], &psi1[i], b, &grad_psi0[i], nz))
}
