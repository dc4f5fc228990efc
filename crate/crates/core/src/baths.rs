//! Reservoir couplings: jump operators and coarse-grained rate matrices.
//!
//! Each bath couples through `σˣ_j`. In the energy eigenbasis that operator
//! splits into components `L_n` oscillating at the transition frequencies
//! `Ω_n`, with `L_{−n} = L_n†`. The ohmic rate matrix `γ_mn(Δt)` weights
//! the products `L_m ρ L_n†` in the dissipator.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::model::{pauli, Axis, Eigensystem, Op, Site, SystemParams, DIM};
use crate::{Error, Result, C64};

/// Matrix elements of `σˣ` in the eigenbasis below this size are treated as
/// structural zeros.
const AMPLITUDE_FLOOR: f64 = 1e-13;

/// Temperatures in units of `ħω_c/k_B`, coarse-graining time in `1/ω_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    pub t_hot: f64,
    pub t_cold: f64,
    pub t_work: f64,
    pub chi: f64,
    pub delta_t: f64,
}

impl BathParams {
    /// Builds bath parameters with `Δt = max_j(1/ω_j)`.
    pub fn new(p: &SystemParams, t_hot: f64, t_cold: f64, t_work: f64, chi: f64) -> Result<Self> {
        let b = BathParams { t_hot, t_cold, t_work, chi, delta_t: default_delta_t(p) };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("T_h", self.t_hot),
            ("T_c", self.t_cold),
            ("T_w", self.t_work),
            ("chi", self.chi),
            ("delta_t", self.delta_t),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.chi >= 0.1 {
            log::warn!("chi = {} is outside the Born-Markov regime (chi < 0.1)", self.chi);
        }
        Ok(())
    }

    pub fn temperature(&self, site: Site) -> f64 {
        match site {
            Site::Hot => self.t_hot,
            Site::Cold => self.t_cold,
            Site::Work => self.t_work,
        }
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }
}

/// `Δt = max_j ω_j⁻¹`.
pub fn default_delta_t(p: &SystemParams) -> f64 {
    1.0 / p.min_omega()
}

/// Default frequency-grouping tolerance, `10⁻⁹ ω_h`.
pub fn default_grouping_tolerance(p: &SystemParams) -> f64 {
    1e-9 * p.omega_h
}

/// Bose–Einstein occupation `1/(e^{ω/T} − 1)`.
pub fn bose_occupation(omega: f64, t: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("occupation needs omega > 0, got {omega}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("occupation needs T > 0, got {t}")));
    }
    Ok(1.0 / (omega / t).exp_m1())
}

fn occupation(omega: f64, t: f64) -> f64 {
    1.0 / (omega / t).exp_m1()
}

/// Unnormalised `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Spectral component of a coupling operator, in the energy eigenbasis.
#[derive(Debug, Clone)]
pub struct JumpOperator {
    /// Signed index `n ∈ {±1, ±2, …}`; positive indices raise the energy,
    /// 0 marks the zero-frequency component.
    pub index: i32,
    /// Transition frequency `Ω_n`, negative for de-excitations.
    pub frequency: f64,
    pub matrix: Op,
    /// Nonzero entries `(row, col, value)` of `matrix`.
    pub entries: Vec<(usize, usize, C64)>,
}

impl JumpOperator {
    fn from_entries(index: i32, frequency: f64, entries: Vec<(usize, usize, C64)>) -> Self {
        let mut matrix = Op::zeros();
        for &(r, c, v) in &entries {
            matrix[(r, c)] += v;
        }
        JumpOperator { index, frequency, matrix, entries }
    }

    pub fn adjoint(&self) -> JumpOperator {
        let entries = self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        JumpOperator::from_entries(-self.index, -self.frequency, entries)
    }
}

/// Splits `σˣ_site` into its spectral components.
///
/// Matrix elements `⟨ε_a|σˣ|ε_b⟩` are binned by the gap `ε_a − ε_b`; gaps
/// within `tol` of each other share one operator. The result lists the
/// excitation operators (descending frequency, indices `1..=K`), their
/// adjoints (indices `−1..=−K`) and, when degenerate levels are connected
/// by the coupling, one self-adjoint zero-frequency component (index 0).
pub fn extract_jump_operators(es: &Eigensystem, site: Site, tol: f64) -> Result<Vec<JumpOperator>> {
    let (mut ops, zero) = spectral_components(es, site, tol)?;
    if let Some(z) = zero {
        ops.push(z);
    }
    Ok(ops)
}

/// Like [`extract_jump_operators`] but refuses couplings with a
/// zero-frequency component.
pub fn extract_jump_operators_strict(es: &Eigensystem, site: Site, tol: f64) -> Result<Vec<JumpOperator>> {
    let (ops, zero) = spectral_components(es, site, tol)?;
    match zero {
        Some(z) => Err(Error::ZeroFrequency { amplitude: z.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max) }),
        None => Ok(ops),
    }
}

type Component = (f64, usize, usize, C64);

fn spectral_components(es: &Eigensystem, site: Site, tol: f64) -> Result<(Vec<JumpOperator>, Option<JumpOperator>)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("grouping tolerance must be positive, got {tol}")));
    }
    let x = es.to_energy_frame(&pauli(site, Axis::X));

    let mut raising: Vec<Component> = Vec::new();
    let mut resting: Vec<Component> = Vec::new();
    for a in 0..DIM {
        for b in 0..DIM {
            let amp = x[(a, b)];
            if amp.norm() <= AMPLITUDE_FLOOR {
                continue;
            }
            let gap = es.energies[a] - es.energies[b];
            if gap.abs() < tol {
                resting.push((gap, a, b, amp));
            } else if gap > 0.0 {
                raising.push((gap, a, b, amp));
            }
        }
    }
    raising.sort_by(|l, r| r.0.total_cmp(&l.0));

    let mut classes: Vec<Vec<Component>> = Vec::new();
    for item in raising {
        match classes.last_mut() {
            Some(class) if class.last().unwrap().0 - item.0 < tol => class.push(item),
            _ => classes.push(vec![item]),
        }
    }

    let mut ops = Vec::with_capacity(2 * classes.len() + 1);
    for (k, class) in classes.iter().enumerate() {
        let spread = class.first().unwrap().0 - class.last().unwrap().0;
        if spread > tol {
            return Err(Error::FrequencyGrouping { spread, tol });
        }
        let freq = class.iter().map(|c| c.0).sum::<f64>() / class.len() as f64;
        let entries = class.iter().map(|&(_, a, b, v)| (a, b, v)).collect();
        ops.push(JumpOperator::from_entries(k as i32 + 1, freq, entries));
    }
    let lowering: Vec<JumpOperator> = ops.iter().map(JumpOperator::adjoint).collect();
    ops.extend(lowering);

    let zero = (!resting.is_empty()).then(|| {
        let entries = resting.iter().map(|&(_, a, b, v)| (a, b, v)).collect();
        JumpOperator::from_entries(0, 0.0, entries)
    });
    Ok((ops, zero))
}

/// Which pairs `(m, n)` of the rate matrix are retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossTerms {
    /// Every signed pair.
    All,
    /// Drops the counter-rotating pairs `Ω_m Ω_n < 0`, i.e. products of an
    /// excitation with a de-excitation. Zero-frequency components pair with
    /// everything.
    #[default]
    SameSign,
}

/// Ohmic coarse-grained rate matrix.
///
/// `γ_mn = χ|ν| [N̄(|ν|) + Θ(−ν)] e^{iΩ_mn Δt/2} sinc(Ω_mn Δt/2)` with
/// `ν = (Ω_m+Ω_n)/2` and `Ω_mn = Ω_m − Ω_n`; entries with `ν = 0` are zero.
pub fn rate_matrix(ops: &[JumpOperator], t: f64, chi: f64, delta_t: f64) -> DMatrix<C64> {
    let k = ops.len();
    DMatrix::from_fn(k, k, |m, n| {
        let (wm, wn) = (ops[m].frequency, ops[n].frequency);
        let nu = 0.5 * (wm + wn);
        if nu == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let step = if nu < 0.0 { 1.0 } else { 0.0 };
        let weight = chi * nu.abs() * (occupation(nu.abs(), t) + step);
        let arg = 0.5 * (wm - wn) * delta_t;
        C64::from_polar(weight * sinc(arg), arg)
    })
}

/// Extremal eigenvalues `(min, max)` of a Hermitian rate matrix.
pub fn rate_matrix_spectrum_report(gamma: &DMatrix<C64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(gamma.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// One reservoir: its jump operators and rate matrix.
#[derive(Debug, Clone)]
pub struct BathChannel {
    pub site: Site,
    pub temperature: f64,
    pub ops: Vec<JumpOperator>,
    pub gamma: DMatrix<C64>,
}

impl BathChannel {
    pub fn new(es: &Eigensystem, p: &SystemParams, b: &BathParams, site: Site, cross: CrossTerms) -> Result<Self> {
        let ops = extract_jump_operators(es, site, default_grouping_tolerance(p))?;
        Ok(Self::from_ops(ops, site, b, cross))
    }

    pub fn from_ops(ops: Vec<JumpOperator>, site: Site, b: &BathParams, cross: CrossTerms) -> Self {
        let t = b.temperature(site);
        let mut gamma = rate_matrix(&ops, t, b.chi, b.delta_t);
        if cross == CrossTerms::SameSign {
            for m in 0..ops.len() {
                for n in 0..ops.len() {
                    if ops[m].frequency * ops[n].frequency < 0.0 {
                        gamma[(m, n)] = C64::new(0.0, 0.0);
                    }
                }
            }
        }
        BathChannel { site, temperature: t, ops, gamma }
    }

    /// Number of distinct excitation frequencies.
    pub fn positive_frequencies(&self) -> Vec<f64> {
        self.ops.iter().filter(|o| o.index > 0).map(|o| o.frequency).collect()
    }
}
