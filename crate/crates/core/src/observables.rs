//! Steady-state figures of merit.
//!
//! Sign conventions: `P_j > 0` is heat flowing from bath `j` into the
//! system, so the refrigerator cools when `P_c > 0`, and the entropy
//! production `Ṡ = −Σ_j P_j/T_j` is non-negative for a thermodynamically
//! consistent model.

use nalgebra::SymmetricEigen;

use crate::baths::BathParams;
use crate::dynamics::{unvectorize, vectorize, DensityMatrix, Liouvillian, ModelKind, SteadyStateResult, Superop};
use crate::model::{CouplingKind, Op, Site, SystemParams};
use crate::{Error, Result, C64};

/// `P_j = tr(H 𝓓_j(ρ))` for `j = h, c, w`, all operands in one frame.
pub fn heat_powers(h: &Op, dissipators: &[Superop; 3], rho: &Op) -> Result<[f64; 3]> {
    let v = vectorize(rho);
    let mut out = [0.0; 3];
    for (j, d) in dissipators.iter().enumerate() {
        let p = (h * unvectorize(&(d * &v))).trace();
        if p.im.abs() > 1e-10 {
            return Err(Error::ImaginaryLeak { imag: p.im });
        }
        out[j] = p.re;
    }
    Ok(out)
}

/// Instantaneous cooling power `tr(H 𝓓_c(ρ))` for an energy-frame `ρ`.
pub fn cooling_power(l: &Liouvillian, rho_energy: &Op) -> f64 {
    let d = unvectorize(&(&l.dissipators[1] * vectorize(rho_energy)));
    (l.hamiltonian() * d).trace().re
}

/// Coefficient of performance `P_c / P_w`.
pub fn efficiency(p_c: f64, p_w: f64) -> Result<f64> {
    if p_w.abs() < 1e-14 {
        return Err(Error::WorkFlowZero { p_w });
    }
    Ok(p_c / p_w)
}

/// `(ω_c/ω_w, T_c/(T_h − T_c))`.
pub fn eta_opt(p: &SystemParams, t_hot: f64, t_cold: f64) -> (f64, f64) {
    (p.omega_c / p.omega_w, t_cold / (t_hot - t_cold))
}

/// `Ṡ = −Σ_j P_j/T_j`
pub fn entropy_rate(powers: &[f64; 3], temperatures: &[f64; 3]) -> f64 {
    -powers.iter().zip(temperatures).map(|(p, t)| p / t).sum::<f64>()
}

/// Mean thermal single-qubit decoherence rate `(1/3) Σ_j χω_j(2N̄_j+1)/2`.
pub fn kappa_eff(p: &SystemParams, b: &BathParams) -> f64 {
    b.chi * kappa_per_chi(p, &[b.t_hot, b.t_cold, b.t_work])
}

/// `κ_eff / χ` for temperatures ordered `h, c, w`.
pub fn kappa_per_chi(p: &SystemParams, temps: &[f64; 3]) -> f64 {
    Site::ALL
        .iter()
        .zip(temps)
        .map(|(&s, &t)| {
            let w = p.omega(s);
            // (2N̄+1)/2 = coth(ω/2T)/2
            0.5 * w / (0.5 * w / t).tanh()
        })
        .sum::<f64>()
        / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualTemperature {
    pub t_v: f64,
    /// `0 < T_v < T_c`
    pub cooling_predicted: bool,
    /// `T_v < 0`: the virtual qubit is population inverted.
    pub inverted: bool,
}

/// Virtual-qubit temperature `T_v = ω_c/(ω_h/T_h − ω_w/T_w)`.
pub fn virtual_temperature(p: &SystemParams, t_hot: f64, t_work: f64, t_cold: f64) -> Result<VirtualTemperature> {
    let denominator = p.omega_h / t_hot - p.omega_w / t_work;
    if denominator.abs() < 1e-12 {
        return Err(Error::VirtualDivergence { denominator });
    }
    let t_v = p.omega_c / denominator;
    Ok(VirtualTemperature { t_v, cooling_predicted: t_v > 0.0 && t_v < t_cold, inverted: t_v < 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bipartition {
    /// `h | cw`
    Hot,
    /// `c | hw`
    Cold,
    /// `w | hc`
    Work,
}

impl Bipartition {
    fn site(self) -> Site {
        match self {
            Bipartition::Hot => Site::Hot,
            Bipartition::Cold => Site::Cold,
            Bipartition::Work => Site::Work,
        }
    }
}

/// Partial transpose over a single qubit (product basis).
pub fn partial_transpose(rho: &Op, site: Site) -> Op {
    let bit = 1 << site.bit();
    Op::from_fn(|r, c| {
        // swap the site's bit between row and column
        let (rs, cs) = (r & bit, c & bit);
        let r2 = (r & !bit) | cs;
        let c2 = (c & !bit) | rs;
        rho[(r2, c2)]
    })
}

/// Sum of the magnitudes of the negative eigenvalues of `ρ^{T_A}`.
pub fn negativity(rho: &DensityMatrix, part: Bipartition) -> f64 {
    let pt = partial_transpose(&rho.matrix, part.site());
    let pt = (pt + pt.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(pt).eigenvalues.iter().filter(|&&e| e < 0.0).fold(0.0, |acc, e| acc - e)
}

/// `|⟨100|ρ|011⟩|`
pub fn coherence_100_011(rho: &DensityMatrix) -> f64 {
    rho.matrix[(0b100, 0b011)].norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceRecord {
    pub kind: ModelKind,
    pub coupling: CouplingKind,
    pub g: f64,
    pub chi: f64,
    pub p_h: f64,
    pub p_c: f64,
    pub p_w: f64,
    /// `P_c/P_w`, NaN when the work flow vanishes.
    pub eta: f64,
    pub eta_opt: f64,
    pub carnot: f64,
    pub entropy_rate: f64,
    pub kappa_eff: f64,
    /// NaN when the virtual temperature diverges.
    pub t_v: f64,
    pub cooling: bool,
    pub negativity_h_cw: f64,
    pub negativity_c_hw: f64,
    pub coherence_100_011: f64,
    pub residual: f64,
    pub min_eigenvalue: f64,
}

impl PerformanceRecord {
    pub fn power_sum(&self) -> f64 {
        self.p_h + self.p_c + self.p_w
    }

    pub fn max_power(&self) -> f64 {
        self.p_h.abs().max(self.p_c.abs()).max(self.p_w.abs())
    }
}

/// Heat powers and entropy rate only; cheap enough for optimisation loops.
pub fn powers(l: &Liouvillian, ss: &SteadyStateResult) -> Result<[f64; 3]> {
    heat_powers(&l.hamiltonian(), &l.dissipators, &ss.rho_energy)
}

pub fn performance(l: &Liouvillian, ss: &SteadyStateResult) -> Result<PerformanceRecord> {
    let [p_h, p_c, p_w] = powers(l, ss)?;
    let b = &l.baths;
    let p = &l.system;
    let (eta_opt, carnot) = eta_opt(p, b.t_hot, b.t_cold);
    let eta = efficiency(p_c, p_w).unwrap_or(f64::NAN);
    let t_v = virtual_temperature(p, b.t_hot, b.t_work, b.t_cold).map(|v| v.t_v).unwrap_or(f64::NAN);
    Ok(PerformanceRecord {
        kind: l.kind,
        coupling: l.coupling,
        g: p.g,
        chi: b.chi,
        p_h,
        p_c,
        p_w,
        eta,
        eta_opt,
        carnot,
        entropy_rate: entropy_rate(&[p_h, p_c, p_w], &[b.t_hot, b.t_cold, b.t_work]),
        kappa_eff: kappa_eff(p, b),
        t_v,
        cooling: p_c > 0.0,
        negativity_h_cw: negativity(&ss.rho_inf, Bipartition::Hot),
        negativity_c_hw: negativity(&ss.rho_inf, Bipartition::Cold),
        coherence_100_011: coherence_100_011(&ss.rho_inf),
        residual: ss.residual,
        min_eigenvalue: ss.min_eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_liouvillian, steady_state};
    use crate::model::DIM;
    use approx::assert_abs_diff_eq;

    fn reference_point(g: f64) -> (SystemParams, BathParams) {
        let p = SystemParams::reference(g, CouplingKind::Xxx);
        let b = BathParams::new(&p, 2.0, 1.0, 8.0, 1e-2).unwrap();
        (p, b)
    }

    fn record(g: f64, kind: ModelKind) -> PerformanceRecord {
        let (p, b) = reference_point(g);
        let l = build_liouvillian(&p, &b, kind).unwrap();
        let ss = steady_state(&l).unwrap();
        performance(&l, &ss).unwrap()
    }

    #[test]
    fn uncoupled_local_model_carries_no_heat() {
        let r = record(0.0, ModelKind::Local);
        for p in [r.p_h, r.p_c, r.p_w] {
            assert!(p.abs() < 1e-14);
        }
    }

    #[test]
    fn powers_balance() {
        for kind in ModelKind::ALL {
            for g in [1e-3, 0.05, 0.25, 1.0] {
                let r = record(g, kind);
                assert!(r.power_sum().abs() <= 1e-10 * r.max_power(), "{kind:?} {g}: {}", r.power_sum());
            }
        }
    }

    #[test]
    fn efficiency_bounds() {
        let (p, _) = reference_point(0.1);
        let (opt, carnot) = eta_opt(&p, 2.0, 1.0);
        assert_eq!(opt, 0.25);
        assert_eq!(carnot, 1.0);
        assert!(matches!(efficiency(1.0, 1e-15), Err(Error::WorkFlowZero { .. })));
        assert_eq!(efficiency(1.0, 4.0).unwrap(), 0.25);
    }

    #[test]
    fn weak_coupling_efficiency_is_optimal() {
        let r = record(1e-2, ModelKind::CoarseGrained);
        assert!(r.cooling);
        assert!((r.eta - 0.25).abs() <= 0.05 * 0.25, "eta = {}", r.eta);
    }

    #[test]
    fn entropy_rate_of_zero_flows() {
        assert_eq!(entropy_rate(&[0.0; 3], &[2.0, 1.0, 8.0]), 0.0);
        assert_abs_diff_eq!(entropy_rate(&[1.0, -2.0, 1.0], &[2.0, 1.0, 4.0]), -(0.5 - 2.0 + 0.25));
    }

    #[test]
    fn decoherence_rate() {
        let (p, b) = reference_point(0.1);
        // oracle: direct evaluation with the occupation formula
        let nb = |w: f64, t: f64| 1.0 / ((w / t).exp() - 1.0);
        let want = 1e-2
            * (5.0 * (2.0 * nb(5.0, 2.0) + 1.0) + 1.0 * (2.0 * nb(1.0, 1.0) + 1.0) + 4.0 * (2.0 * nb(4.0, 8.0) + 1.0))
            / 6.0;
        assert_abs_diff_eq!(kappa_eff(&p, &b), want, epsilon = 1e-15);
        assert_abs_diff_eq!(kappa_eff(&p, &b), 0.040650, epsilon = 5e-7);
        assert_eq!(kappa_eff(&p, &b.with_chi(2e-2)), 2.0 * kappa_eff(&p, &b));
        let cold = BathParams { t_hot: 1e-3, t_cold: 1e-3, t_work: 1e-3, ..b };
        assert_abs_diff_eq!(kappa_eff(&p, &cold), 1e-2 * 10.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn virtual_temperature_window() {
        let (p, _) = reference_point(0.0);
        let v = virtual_temperature(&p, 2.0, 8.0, 1.0).unwrap();
        assert_abs_diff_eq!(v.t_v, 0.5, epsilon = 1e-15);
        assert!(v.cooling_predicted);
        let v = virtual_temperature(&p, 2.0, 1e12, 1.0).unwrap();
        assert_abs_diff_eq!(v.t_v, 0.4, epsilon = 1e-9);
        assert!(matches!(virtual_temperature(&p, 5.0, 4.0, 1.0), Err(Error::VirtualDivergence { .. })));
        let v = virtual_temperature(&p, 10.0, 2.0, 1.0).unwrap();
        assert!(v.inverted && !v.cooling_predicted);
    }

    #[test]
    fn negativity_of_product_and_bell_states() {
        let (p, b) = reference_point(0.0);
        let th = DensityMatrix::thermal_product(&p, &b);
        assert!(negativity(&th, Bipartition::Hot) < 1e-12);
        assert!(negativity(&th, Bipartition::Cold) < 1e-12);
        // (|100⟩ + |011⟩)/√2 is a Bell pair across h | cw
        let mut psi = nalgebra::SVector::<C64, DIM>::zeros();
        psi[0b100] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[0b011] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = DensityMatrix::new(psi * psi.adjoint());
        assert_abs_diff_eq!(negativity(&rho, Bipartition::Hot), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(coherence_100_011(&rho), 0.5, epsilon = 1e-15);
        assert_eq!(coherence_100_011(&th), 0.0);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let a = Op::from_fn(|r, c| C64::new(r as f64, c as f64 * 0.5));
        for s in Site::ALL {
            assert_eq!(partial_transpose(&partial_transpose(&a, s), s), a);
        }
        let full = partial_transpose(&partial_transpose(&partial_transpose(&a, Site::Hot), Site::Cold), Site::Work);
        assert_eq!(full, a.transpose());
    }

    #[test]
    fn reference_point_diagnostics() {
        let r = record(0.25, ModelKind::CoarseGrained);
        assert!(r.negativity_h_cw <= 1e-8);
        assert!(r.negativity_c_hw <= 1e-8);
        assert!(r.coherence_100_011 > 1e-6);
        assert!(r.cooling);
        assert!(r.eta <= r.eta_opt);
    }
}
