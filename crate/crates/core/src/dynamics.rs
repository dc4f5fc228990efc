//! Generator assembly, time evolution and stationary states.
//!
//! Superoperators act on column-stacked density matrices,
//! `vec(ρ)[b·8 + a] = ρ_ab`, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. They are
//! assembled in the energy eigenbasis of the system Hamiltonian, where the
//! coherent part is diagonal and the jump operators are sparse. Density
//! matrices crossing the public API are in the product basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::baths::{BathChannel, BathParams, CrossTerms, JumpOperator};
use crate::model::{eigensystem, pauli, Axis, CouplingKind, Eigensystem, Op, Site, SystemParams, DIM};
use crate::{Error, Result, C64};

/// Liouville-space dimension.
pub const SDIM: usize = DIM * DIM;

pub type Superop = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    CoarseGrained,
    Local,
    Global,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::CoarseGrained, ModelKind::Local, ModelKind::Global];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::CoarseGrained => "coarse",
            ModelKind::Local => "local",
            ModelKind::Global => "global",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coarse" | "coarsegrained" | "coarse-grained" | "coarse_grained" => Some(ModelKind::CoarseGrained),
            "local" => Some(ModelKind::Local),
            "global" => Some(ModelKind::Global),
            _ => None,
        }
    }
}

#[inline]
fn vidx(row: usize, col: usize) -> usize {
    col * DIM + row
}

pub fn vectorize(rho: &Op) -> DVector<C64> {
    DVector::from_iterator(SDIM, rho.iter().copied())
}

pub fn unvectorize(v: &DVector<C64>) -> Op {
    Op::from_iterator(v.iter().copied())
}

fn sparse_entries(a: &Op) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..DIM {
        for r in 0..DIM {
            if a[(r, c)] != ZERO {
                out.push((r, c, a[(r, c)]));
            }
        }
    }
    out
}

/// Adds `coeff · A ρ B†`.
fn add_sandwich(s: &mut Superop, a: &[(usize, usize, C64)], b: &[(usize, usize, C64)], coeff: C64) {
    for &(i, j, bv) in b {
        let w = coeff * bv.conj();
        for &(k, l, av) in a {
            s[(i * DIM + k, j * DIM + l)] += w * av;
        }
    }
}

/// Adds `−½ {K, ρ}`.
fn add_anticommutator(s: &mut Superop, k: &Op) {
    for i in 0..DIM {
        for r in 0..DIM {
            for c in 0..DIM {
                let v = k[(r, c)] * 0.5;
                if v == ZERO {
                    continue;
                }
                // K ρ
                s[(i * DIM + r, i * DIM + c)] -= v;
                // ρ K
                s[(c * DIM + i, r * DIM + i)] -= v;
            }
        }
    }
}

/// `Σ_mn γ_mn [L_m ρ L_n† − ½{L_n† L_m, ρ}]` in the frame of the operators.
fn lindblad_family(ops: &[JumpOperator], gamma: &DMatrix<C64>, diagonal_only: bool) -> Superop {
    let mut s = Superop::zeros(SDIM, SDIM);
    let mut k = Op::zeros();
    for (m, lm) in ops.iter().enumerate() {
        for (n, ln) in ops.iter().enumerate() {
            if diagonal_only && m != n {
                continue;
            }
            let g = gamma[(m, n)];
            if g == ZERO {
                continue;
            }
            add_sandwich(&mut s, &lm.entries, &ln.entries, g);
            k += ln.matrix.adjoint() * lm.matrix * g;
        }
    }
    add_anticommutator(&mut s, &k);
    s
}

/// `rate · (A ρ A† − ½{A†A, ρ})`
fn lindblad_single(a: &Op, rate: f64) -> Superop {
    let mut s = Superop::zeros(SDIM, SDIM);
    let e = sparse_entries(a);
    add_sandwich(&mut s, &e, &e, C64::new(rate, 0.0));
    add_anticommutator(&mut s, &(a.adjoint() * a * C64::new(rate, 0.0)));
    s
}

/// Local-limit rates `(χω(N̄+1), χωN̄)` for emission and absorption.
pub fn local_rates(omega: f64, t: f64, chi: f64) -> (f64, f64) {
    let nbar = 1.0 / (omega / t).exp_m1();
    (chi * omega * (nbar + 1.0), chi * omega * nbar)
}

/// Dissipator of one bath in the energy frame of `es`.
///
/// `CoarseGrained` uses the full rate matrix, `Global` keeps its diagonal,
/// and `Local` ignores the jump operators and couples the bath to
/// `σ∓` of its own qubit at the bare frequency.
pub fn build_dissipator(
    channel: &BathChannel,
    kind: ModelKind,
    es: &Eigensystem,
    p: &SystemParams,
    b: &BathParams,
) -> Superop {
    match kind {
        ModelKind::CoarseGrained => lindblad_family(&channel.ops, &channel.gamma, false),
        ModelKind::Global => lindblad_family(&channel.ops, &channel.gamma, true),
        ModelKind::Local => local_dissipator(channel.site, es, p, b),
    }
}

pub fn local_dissipator(site: Site, es: &Eigensystem, p: &SystemParams, b: &BathParams) -> Superop {
    let (down, up) = local_rates(p.omega(site), b.temperature(site), b.chi);
    let lower = es.to_energy_frame(&pauli(site, Axis::Minus));
    let raise = lower.adjoint();
    lindblad_single(&lower, down) + lindblad_single(&raise, up)
}

/// `−i[H, ·]` for `H = diag(energies)`.
fn coherent_part(energies: &[f64; DIM]) -> Superop {
    let mut s = Superop::zeros(SDIM, SDIM);
    for b in 0..DIM {
        for a in 0..DIM {
            s[(vidx(a, b), vidx(a, b))] = C64::new(0.0, -(energies[a] - energies[b]));
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    /// Full generator in the energy frame.
    pub matrix: Superop,
    /// Per-bath dissipators in the energy frame, ordered `h, c, w`.
    pub dissipators: [Superop; 3],
    pub eigensystem: Eigensystem,
    pub kind: ModelKind,
    pub coupling: CouplingKind,
    pub system: SystemParams,
    pub baths: BathParams,
}

/// Builds the generator with the default same-sign cross-term policy.
pub fn build_liouvillian(p: &SystemParams, b: &BathParams, kind: ModelKind) -> Result<Liouvillian> {
    build_liouvillian_with(p, b, kind, CrossTerms::default())
}

pub fn build_liouvillian_with(
    p: &SystemParams,
    b: &BathParams,
    kind: ModelKind,
    cross: CrossTerms,
) -> Result<Liouvillian> {
    p.validate()?;
    b.validate()?;
    let es = eigensystem(p)?;
    let channels = match kind {
        ModelKind::Local => None,
        _ => Some(Site::ALL.iter().map(|&s| BathChannel::new(&es, p, b, s, cross)).collect::<Result<Vec<_>>>()?),
    };
    Ok(assemble(es, channels.as_deref(), p, b, kind))
}

/// Assembles a generator from prebuilt channels (`None` only for `Local`).
pub fn assemble(
    es: Eigensystem,
    channels: Option<&[BathChannel]>,
    p: &SystemParams,
    b: &BathParams,
    kind: ModelKind,
) -> Liouvillian {
    let dissipators: [Superop; 3] = std::array::from_fn(|j| match (kind, channels) {
        (ModelKind::Local, _) => local_dissipator(Site::ALL[j], &es, p, b),
        (_, Some(ch)) => build_dissipator(&ch[j], kind, &es, p, b),
        (_, None) => panic!("{kind:?} generator needs bath channels"),
    });
    let mut matrix = coherent_part(&es.energies);
    for d in &dissipators {
        matrix += d;
    }
    Liouvillian { matrix, dissipators, eigensystem: es, kind, coupling: p.coupling, system: *p, baths: *b }
}

impl Liouvillian {
    /// System Hamiltonian in the energy frame.
    pub fn hamiltonian(&self) -> Op {
        Op::from_diagonal(&nalgebra::SVector::<C64, DIM>::from_iterator(
            self.eigensystem.energies.iter().map(|&e| C64::new(e, 0.0)),
        ))
    }

    /// `𝓛(ρ)` for a product-basis `ρ`, returned in the product basis.
    pub fn apply(&self, rho: &Op) -> Op {
        let v = vectorize(&self.eigensystem.to_energy_frame(rho));
        self.eigensystem.to_product_frame(&unvectorize(&(&self.matrix * v)))
    }

    /// `𝓓_j(ρ)` for a product-basis `ρ`, returned in the product basis.
    pub fn apply_dissipator(&self, site: Site, rho: &Op) -> Op {
        let j = Site::ALL.iter().position(|&s| s == site).unwrap();
        let v = vectorize(&self.eigensystem.to_energy_frame(rho));
        self.eigensystem.to_product_frame(&unvectorize(&(&self.dissipators[j] * v)))
    }

    /// Frobenius norm of the generator.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// A density operator in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: Op,
}

impl DensityMatrix {
    pub fn new(matrix: Op) -> Self {
        DensityMatrix { matrix }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `½ ‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let d = DensityMatrix::new(self.matrix - other.matrix);
        0.5 * d.eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
    }

    /// Product of single-qubit Gibbs states at the given temperatures.
    pub fn thermal_product(p: &SystemParams, b: &BathParams) -> Self {
        let mut m = Op::zeros();
        for i in 0..DIM {
            let mut w = 1.0;
            for s in Site::ALL {
                let x = p.omega(s) / b.temperature(s);
                let excited = 1.0 / (1.0 + x.exp());
                w *= if (i >> s.bit()) & 1 == 1 { excited } else { 1.0 - excited };
            }
            m[(i, i)] = C64::new(w, 0.0);
        }
        DensityMatrix::new(m)
    }
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    /// Product basis.
    pub rho_inf: DensityMatrix,
    /// Energy frame, as seen by the generator.
    pub rho_energy: Op,
    /// `‖𝓛(ρ_∞)‖₂`
    pub residual: f64,
    /// Second-smallest over smallest singular value of the generator.
    pub spectral_gap_hint: f64,
    pub min_eigenvalue: f64,
}

/// Real coordinates of a Hermitian operator: the eight diagonal entries,
/// then `(Re ρ_ab, Im ρ_ab)` for `a < b`.
#[derive(Debug, Clone, Copy)]
enum Coord {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

fn coords() -> &'static [Coord; SDIM] {
    static COORDS: std::sync::OnceLock<[Coord; SDIM]> = std::sync::OnceLock::new();
    COORDS.get_or_init(|| {
        let mut out = [Coord::Diag(0); SDIM];
        let mut k = 0;
        for a in 0..DIM {
            out[k] = Coord::Diag(a);
            k += 1;
        }
        for a in 0..DIM {
            for b in a + 1..DIM {
                out[k] = Coord::Re(a, b);
                out[k + 1] = Coord::Im(a, b);
                k += 2;
            }
        }
        out
    })
}

/// Restriction of a Hermiticity-preserving superoperator to Hermitian
/// operators, as a real matrix in [`Coord`] coordinates.
pub fn real_representation(s: &Superop) -> DMatrix<f64> {
    let cs = coords();
    let mut out = DMatrix::zeros(SDIM, SDIM);
    let i = C64::new(0.0, 1.0);
    for (k, ck) in cs.iter().enumerate() {
        let column = |row: usize| -> C64 {
            match *ck {
                Coord::Diag(a) => s[(row, vidx(a, a))],
                Coord::Re(a, b) => s[(row, vidx(a, b))] + s[(row, vidx(b, a))],
                Coord::Im(a, b) => (s[(row, vidx(a, b))] - s[(row, vidx(b, a))]) * i,
            }
        };
        for (j, cj) in cs.iter().enumerate() {
            out[(j, k)] = match *cj {
                Coord::Diag(a) => column(vidx(a, a)).re,
                Coord::Re(a, b) => column(vidx(a, b)).re,
                Coord::Im(a, b) => column(vidx(a, b)).im,
            };
        }
    }
    out
}

fn from_real_coords(x: &DVector<f64>) -> Op {
    let mut rho = Op::zeros();
    for (k, c) in coords().iter().enumerate() {
        match *c {
            Coord::Diag(a) => rho[(a, a)] = C64::new(x[k], 0.0),
            Coord::Re(a, b) => {
                rho[(a, b)].re = x[k];
                rho[(b, a)].re = x[k];
            }
            Coord::Im(a, b) => {
                rho[(a, b)].im = x[k];
                rho[(b, a)].im = -x[k];
            }
        }
    }
    rho
}

fn to_real_coords(rho: &Op) -> DVector<f64> {
    DVector::from_iterator(
        SDIM,
        coords().iter().map(|c| match *c {
            Coord::Diag(a) => rho[(a, a)].re,
            Coord::Re(a, b) => rho[(a, b)].re,
            Coord::Im(a, b) => rho[(a, b)].im,
        }),
    )
}

/// Replaces the first population equation by `tr ρ = 1` (real coordinates).
fn impose_trace(mut a: DMatrix<f64>) -> DMatrix<f64> {
    a.row_mut(0).fill(0.0);
    for k in 0..DIM {
        a[(0, k)] = 1.0;
    }
    a
}

/// Solves `R x = 0`, `tr x = 1` for a real generator representation.
pub fn solve_real(r: DMatrix<f64>) -> Option<DVector<f64>> {
    let mut rhs = DVector::zeros(SDIM);
    rhs[0] = 1.0;
    let x = impose_trace(r).lu().solve(&rhs)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn finish(l: &Liouvillian, mut rho_energy: Op, gap: f64, refine: bool) -> Result<SteadyStateResult> {
    if refine {
        let real = real_representation(&l.matrix);
        let lu = impose_trace(real.clone()).lu();
        for _ in 0..2 {
            let x = to_real_coords(&rho_energy);
            let mut r = &real * &x;
            r[0] = rho_energy.trace().re - 1.0;
            let Some(delta) = lu.solve(&r) else { break };
            if delta.iter().any(|v| !v.is_finite()) {
                break;
            }
            rho_energy -= from_real_coords(&delta);
        }
    }
    let residual = (&l.matrix * vectorize(&rho_energy)).norm();
    let rho_inf = DensityMatrix::new(l.eigensystem.to_product_frame(&rho_energy));
    let min_eigenvalue = rho_inf.min_eigenvalue();
    Ok(SteadyStateResult { rho_inf, rho_energy, residual, spectral_gap_hint: gap, min_eigenvalue })
}

/// Stationary state from the smallest right-singular vector of the generator.
///
/// The singular vector is rescaled by its trace (removing the arbitrary
/// phase), hermitized and polished by two rounds of iterative refinement.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult> {
    let svd = l.matrix.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..SDIM).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let s0 = svd.singular_values[order[0]];
    let s1 = svd.singular_values[order[1]];
    let gap = if s0 > 0.0 { s1 / s0 } else { f64::INFINITY };
    if !(gap >= 1e3) || s1 <= 1e-12 * l.norm() {
        return Err(Error::NullSpaceDegenerate { ratio: gap });
    }
    let raw = unvectorize(&v_t.row(order[0]).adjoint());
    let trace = raw.trace();
    if trace.norm() < 1e-8 {
        return Err(Error::TraceVanishing { trace: trace.norm() });
    }
    let scaled = raw / trace;
    let mut rho = (scaled + scaled.adjoint()) * C64::new(0.5, 0.0);
    rho /= rho.trace();
    finish(l, rho, gap, true)
}

/// Stationary state from a direct solve of the Hermitian-restricted
/// generator with one balance equation replaced by the trace constraint.
/// Much cheaper than [`steady_state`]; the uniqueness diagnostic is not
/// computed (`spectral_gap_hint` is NaN).
pub fn steady_state_direct(l: &Liouvillian) -> Result<SteadyStateResult> {
    let x = solve_real(real_representation(&l.matrix))
        .ok_or_else(|| Error::SingularSystem("trace-constrained generator".into()))?;
    finish(l, from_real_coords(&x), f64::NAN, false)
}

/// Generator of one parameter point factored as `𝓛(χ) = 𝓒 + (χ/χ₀)𝓓(χ₀)`,
/// in real Hermitian coordinates.
///
/// Every bath rate is proportional to `χ`, so one build serves a whole
/// line of coupling strengths at fixed `g` and temperatures.
#[derive(Debug, Clone)]
pub struct SplitGenerator {
    coherent: DMatrix<f64>,
    dissipative: DMatrix<f64>,
    /// `P_h, P_c, P_w` as linear functionals of the coordinates, at `χ₀`.
    powers: [DVector<f64>; 3],
    chi_ref: f64,
}

impl SplitGenerator {
    /// Builds the split at the reference coupling `b.chi`.
    pub fn new(p: &SystemParams, b: &BathParams, kind: ModelKind) -> Result<Self> {
        let l = build_liouvillian(p, b, kind)?;
        let coherent = real_representation(&coherent_part(&l.eigensystem.energies));
        let dissipative = real_representation(&l.matrix) - &coherent;
        let powers = std::array::from_fn(|j| {
            let d = real_representation(&l.dissipators[j]);
            DVector::from_fn(SDIM, |k, _| (0..DIM).map(|a| l.eigensystem.energies[a] * d[(a, k)]).sum())
        });
        Ok(Self { coherent, dissipative, powers, chi_ref: b.chi })
    }

    /// Stationary heat powers `[P_h, P_c, P_w]` at coupling `chi`.
    pub fn powers(&self, chi: f64) -> Result<[f64; 3]> {
        let s = chi / self.chi_ref;
        let x = solve_real(&self.coherent + &self.dissipative * s)
            .ok_or_else(|| Error::SingularSystem("trace-constrained generator".into()))?;
        Ok(std::array::from_fn(|j| s * self.powers[j].dot(&x)))
    }

    pub fn cooling_power(&self, chi: f64) -> Result<f64> {
        self.powers(chi).map(|p| p[1])
    }
}

/// Fixed-step fourth-order Runge–Kutta integration of `dρ/dt = 𝓛ρ`.
///
/// Returns the state at every point of `t_grid` (product basis), starting
/// from `rho0` at `t_grid[0]`. The step never exceeds `2π/(100 ω_h)`.
pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    evolve_with(l, rho0, t_grid, |_, _| {})
}

/// Like [`evolve`], also calling `observe(t, ρ_energy_frame)` at each grid point.
pub fn evolve_with<F: FnMut(f64, &Op)>(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    mut observe: F,
) -> Result<Vec<DensityMatrix>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if !(t_grid[0] >= 0.0) || t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter("time grid must be non-negative and ascending".into()));
    }
    let h_max = 2.0 * std::f64::consts::PI / (100.0 * l.system.omega_h);
    let es = &l.eigensystem;
    let mut v = vectorize(&es.to_energy_frame(&rho0.matrix));
    let trace0 = rho0.trace();
    let m = &l.matrix;

    let mut out = Vec::with_capacity(t_grid.len());
    let mut record = |t: f64, v: &DVector<C64>, out: &mut Vec<DensityMatrix>| -> Result<()> {
        let rho = unvectorize(v);
        let drift = (rho.trace() - trace0).norm().max((rho - rho.adjoint()).norm());
        if drift > 1e-6 {
            return Err(Error::StepRejected { t, drift });
        }
        observe(t, &rho);
        out.push(DensityMatrix::new(es.to_product_frame(&rho)));
        Ok(())
    };
    record(t_grid[0], &v, &mut out)?;
    for w in t_grid.windows(2) {
        let span = w[1] - w[0];
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let half = C64::new(0.5 * h, 0.0);
            let full = C64::new(h, 0.0);
            let sixth = C64::new(h / 6.0, 0.0);
            for _ in 0..steps {
                let k1 = m * &v;
                let k2 = m * (&v + &k1 * half);
                let k3 = m * (&v + &k2 * half);
                let k4 = m * (&v + &k3 * full);
                v += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * sixth;
            }
        }
        record(w[1], &v, &mut out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baths::default_grouping_tolerance;
    use crate::baths::extract_jump_operators;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reference_point(g: f64) -> (SystemParams, BathParams) {
        let p = SystemParams::reference(g, CouplingKind::Xxx);
        let b = BathParams::new(&p, 2.0, 1.0, 8.0, 1e-2).unwrap();
        (p, b)
    }

    fn random_op(rng: &mut ChaCha8Rng, hermitian: bool) -> Op {
        let a = Op::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        if hermitian {
            (a + a.adjoint()) * C64::new(0.5, 0.0)
        } else {
            a
        }
    }

    fn apply_energy(s: &Superop, rho: &Op) -> Op {
        unvectorize(&(s * vectorize(rho)))
    }

    #[test]
    fn real_representation_matches_complex_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (p, b) = reference_point(0.25);
        let l = build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap();
        let r = real_representation(&l.matrix);
        let rho = random_op(&mut rng, true);
        let want = apply_energy(&l.matrix, &rho);
        let got = from_real_coords(&(&r * to_real_coords(&rho)));
        assert!((want - got).norm() < 1e-13);
        assert!((from_real_coords(&to_real_coords(&rho)) - rho).norm() < 1e-15);
    }

    #[test]
    fn split_generator_is_linear_in_chi() {
        for kind in ModelKind::ALL {
            let (p, b) = reference_point(0.3);
            let split = SplitGenerator::new(&p, &b, kind).unwrap();
            for chi in [1e-4, 3e-3, 0.05] {
                let b2 = b.with_chi(chi);
                let l = build_liouvillian(&p, &b2, kind).unwrap();
                let ss = steady_state(&l).unwrap();
                let want = crate::observables::cooling_power(&l, &ss.rho_energy);
                let got = split.cooling_power(chi).unwrap();
                assert!((want - got).abs() <= 1e-9 * want.abs() + 1e-15, "{kind:?} {chi}: {want} vs {got}");
            }
        }
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let mut rho = Op::zeros();
        rho[(2, 5)] = C64::new(1.0, 0.0);
        let v = vectorize(&rho);
        assert_eq!(v[vidx(2, 5)], C64::new(1.0, 0.0));
        assert_eq!(unvectorize(&v), rho);
    }

    #[test]
    fn sandwich_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_op(&mut rng, false);
        let b = random_op(&mut rng, false);
        let rho = random_op(&mut rng, false);
        let mut s = Superop::zeros(SDIM, SDIM);
        add_sandwich(&mut s, &sparse_entries(&a), &sparse_entries(&b), C64::new(0.7, 0.2));
        add_anticommutator(&mut s, &b);
        let want = a * rho * b.adjoint() * C64::new(0.7, 0.2) - (b * rho + rho * b) * C64::new(0.5, 0.0);
        assert!((apply_energy(&s, &rho) - want).norm() < 1e-12);
    }

    #[test]
    fn dissipators_are_trace_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in ModelKind::ALL {
            for g in [1e-3, 0.25, 1.0] {
                let (p, b) = reference_point(g);
                let l = build_liouvillian(&p, &b, kind).unwrap();
                for _ in 0..100 {
                    let rho = random_op(&mut rng, true);
                    for d in &l.dissipators {
                        assert!(apply_energy(d, &rho).trace().norm() < 1e-12);
                    }
                    assert!(apply_energy(&l.matrix, &rho).trace().norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn generator_preserves_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for kind in ModelKind::ALL {
            let (p, b) = reference_point(0.25);
            let l = build_liouvillian(&p, &b, kind).unwrap();
            for _ in 0..20 {
                let rho = random_op(&mut rng, false);
                let lhs = apply_energy(&l.matrix, &rho).adjoint();
                let rhs = apply_energy(&l.matrix, &rho.adjoint());
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coarse_grained_reduces_to_local_at_weak_coupling() {
        let (p, b) = reference_point(1e-6);
        let es = eigensystem(&p).unwrap();
        for site in Site::ALL {
            let ch = BathChannel::new(&es, &p, &b, site, CrossTerms::default()).unwrap();
            let coarse = build_dissipator(&ch, ModelKind::CoarseGrained, &es, &p, &b);
            let local = local_dissipator(site, &es, &p, &b);
            let rel = (&coarse - &local).norm() / local.norm();
            assert!(rel <= 1e-3, "{site:?}: {rel}");
        }
    }

    #[test]
    fn thermal_product_is_fixed_point_of_uncoupled_baths() {
        let (p, b) = reference_point(0.0);
        let es = eigensystem(&p).unwrap();
        let rho = DensityMatrix::thermal_product(&p, &b);
        let rho_e = es.to_energy_frame(&rho.matrix);
        for site in Site::ALL {
            let ch = BathChannel::new(&es, &p, &b, site, CrossTerms::default()).unwrap();
            for kind in ModelKind::ALL {
                let d = build_dissipator(&ch, kind, &es, &p, &b);
                assert!(apply_energy(&d, &rho_e).norm() < 1e-12, "{site:?} {kind:?}");
            }
        }
    }

    #[test]
    fn unitary_generator_is_anti_hermitian() {
        let (p, mut b) = reference_point(0.25);
        b.chi = f64::MIN_POSITIVE;
        let l = build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap();
        let coherent = coherent_part(&l.eigensystem.energies);
        assert!((&coherent + coherent.adjoint()).norm() < 1e-12);
        assert!(coherent.diagonal().iter().all(|z| z.re == 0.0));
    }

    #[test]
    fn unique_null_direction_at_reference_point() {
        let (p, b) = reference_point(0.25);
        let l = build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap();
        let sv = l.matrix.clone().singular_values();
        let small = sv.iter().filter(|&&s| s < 1e-10 * l.norm()).count();
        assert_eq!(small, 1);
    }

    #[test]
    fn steady_state_diagnostics() {
        let (p, b) = reference_point(0.25);
        let l = build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(ss.residual <= 1e-10 * l.norm());
        assert!(ss.spectral_gap_hint >= 1e3);
        assert!(ss.min_eigenvalue >= -1e-8);
        assert!((ss.rho_inf.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(ss.rho_inf.hermiticity_error() < 1e-12);
        let fast = steady_state_direct(&l).unwrap();
        assert!(fast.rho_inf.trace_distance(&ss.rho_inf) < 1e-10);
    }

    #[test]
    fn uncoupled_local_steady_state_is_thermal() {
        let (p, b) = reference_point(0.0);
        let l = build_liouvillian(&p, &b, ModelKind::Local).unwrap();
        let ss = steady_state(&l).unwrap();
        let th = DensityMatrix::thermal_product(&p, &b);
        assert!(ss.rho_inf.trace_distance(&th) < 1e-12);
    }

    #[test]
    fn weak_coupling_coarse_matches_local() {
        let (p, b) = reference_point(1e-3);
        let c = steady_state(&build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap()).unwrap();
        let l = steady_state(&build_liouvillian(&p, &b, ModelKind::Local).unwrap()).unwrap();
        assert!(c.rho_inf.trace_distance(&l.rho_inf) <= 1e-2);
    }

    #[test]
    fn strong_coupling_coarse_matches_global() {
        let (p, b) = reference_point(1.0);
        let c = steady_state(&build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap()).unwrap();
        let g = steady_state(&build_liouvillian(&p, &b, ModelKind::Global).unwrap()).unwrap();
        assert!(c.rho_inf.trace_distance(&g.rho_inf) <= 1e-2);
    }

    #[test]
    fn degenerate_generator_is_reported() {
        let (p, b) = reference_point(0.25);
        let mut l = build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap();
        l.matrix = coherent_part(&l.eigensystem.energies);
        assert!(matches!(steady_state(&l), Err(Error::NullSpaceDegenerate { .. })));
    }

    #[test]
    fn eigenprojector_is_stationary_without_baths() {
        let (p, mut b) = reference_point(0.25);
        b.chi = 1e-300;
        let l = build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap();
        let v = l.eigensystem.basis.column(3).into_owned();
        let rho0 = DensityMatrix::new(v * v.adjoint());
        let traj = evolve(&l, &rho0, &[0.0, 1.0, 5.0, 10.0]).unwrap();
        for r in &traj {
            assert!((r.matrix - rho0.matrix).norm() < 1e-10);
        }
    }

    #[test]
    fn long_evolution_reaches_steady_state() {
        let p = SystemParams::reference(0.5, CouplingKind::Xxx);
        let b = BathParams::new(&p, 2.0, 1.0, 8.0, 0.09).unwrap();
        let l = build_liouvillian(&p, &b, ModelKind::CoarseGrained).unwrap();
        let ss = steady_state(&l).unwrap();
        let rho0 = DensityMatrix::thermal_product(&p, &b);
        let traj = evolve(&l, &rho0, &[0.0, 400.0]).unwrap();
        let last = traj.last().unwrap();
        assert!(last.trace_distance(&ss.rho_inf) < 1e-6, "{}", last.trace_distance(&ss.rho_inf));
        assert!((last.trace() - C64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn grid_validation() {
        let (p, b) = reference_point(0.25);
        let l = build_liouvillian(&p, &b, ModelKind::Local).unwrap();
        let rho0 = DensityMatrix::thermal_product(&p, &b);
        assert!(evolve(&l, &rho0, &[1.0, 0.5]).is_err());
        assert!(evolve(&l, &rho0, &[-1.0, 0.5]).is_err());
    }

    #[test]
    fn jump_operators_stay_consistent_with_hamiltonian_frame() {
        let (p, _) = reference_point(0.25);
        let es = eigensystem(&p).unwrap();
        let ops = extract_jump_operators(&es, Site::Cold, default_grouping_tolerance(&p)).unwrap();
        let h = Op::from_diagonal(&nalgebra::SVector::<C64, DIM>::from_iterator(
            es.energies.iter().map(|&e| C64::new(e, 0.0)),
        ));
        // [H, L_n] = Ω_n L_n
        for op in &ops {
            let comm = h * op.matrix - op.matrix * h;
            assert!((comm - op.matrix * C64::new(op.frequency, 0.0)).norm() < 1e-9);
        }
    }
}
