//! System Hamiltonians and their energy eigensystems.
//!
//! The product basis is `|x_h y_c z_w⟩` with the hot qubit as the most
//! significant bit, so the state `|xyz⟩` sits at index `4x + 2y + z`.
//! Single-qubit conventions: `|1⟩` is the excited state, `σ⁺|0⟩ = |1⟩`
//! and `σᶻ|1⟩ = −|1⟩`.

use nalgebra::{SMatrix, SymmetricEigen};

use crate::{Error, Result, C64};

/// Hilbert-space dimension of three qubits.
pub const DIM: usize = 8;

/// Operator on the three-qubit Hilbert space.
pub type Op = SMatrix<C64, DIM, DIM>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Hot,
    Cold,
    Work,
}

impl Site {
    pub const ALL: [Site; 3] = [Site::Hot, Site::Cold, Site::Work];

    /// Bit position of the site inside a basis index.
    pub fn bit(self) -> usize {
        match self {
            Site::Hot => 2,
            Site::Cold => 1,
            Site::Work => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Site::Hot => "h",
            Site::Cold => "c",
            Site::Work => "w",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Plus,
    Minus,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CouplingKind {
    /// `g σˣ_h σˣ_c σˣ_w`
    Xxx,
    /// `g (σ⁺_h σ⁻_c σ⁻_w + h.c.)`
    Resonant,
}

impl CouplingKind {
    pub fn name(self) -> &'static str {
        match self {
            CouplingKind::Xxx => "xxx",
            CouplingKind::Resonant => "resonant",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xxx" => Some(CouplingKind::Xxx),
            "resonant" | "res" => Some(CouplingKind::Resonant),
            _ => None,
        }
    }
}

/// Qubit frequencies and inter-spin coupling, all in units of `ω_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega_h: f64,
    pub omega_c: f64,
    pub omega_w: f64,
    pub g: f64,
    pub coupling: CouplingKind,
}

impl SystemParams {
    pub fn new(omega_h: f64, omega_c: f64, omega_w: f64, g: f64, coupling: CouplingKind) -> Result<Self> {
        let p = SystemParams { omega_h, omega_c, omega_w, g, coupling };
        p.validate()?;
        Ok(p)
    }

    /// Qubit energies `ω = (5, 1, 4)` used by most of the studies.
    pub fn reference(g: f64, coupling: CouplingKind) -> Self {
        SystemParams { omega_h: 5.0, omega_c: 1.0, omega_w: 4.0, g, coupling }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("omega_h", self.omega_h), ("omega_c", self.omega_c), ("omega_w", self.omega_w)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {w}")));
            }
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidParameter(format!("g must be non-negative, got {}", self.g)));
        }
        Ok(())
    }

    /// Whether `ω_h = ω_c + ω_w`.
    pub fn resonant_energies(&self) -> bool {
        (self.omega_h - self.omega_c - self.omega_w).abs() < 1e-12
    }

    pub fn omega(&self, site: Site) -> f64 {
        match site {
            Site::Hot => self.omega_h,
            Site::Cold => self.omega_c,
            Site::Work => self.omega_w,
        }
    }

    pub fn min_omega(&self) -> f64 {
        self.omega_h.min(self.omega_c).min(self.omega_w)
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }
}

fn single_qubit(axis: Axis) -> [[C64; 2]; 2] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    match axis {
        Axis::X => [[o, l], [l, o]],
        // |1⟩⟨0|
        Axis::Plus => [[o, o], [l, o]],
        // |0⟩⟨1|
        Axis::Minus => [[o, l], [o, o]],
        Axis::Z => [[l, o], [o, -l]],
    }
}

/// Single-site Pauli operator embedded as `h ⊗ c ⊗ w`.
pub fn pauli(site: Site, axis: Axis) -> Op {
    let s = single_qubit(axis);
    let bit = site.bit();
    Op::from_fn(|r, c| {
        let rest = !(1 << bit);
        if r & rest != c & rest {
            return C64::new(0.0, 0.0);
        }
        s[(r >> bit) & 1][(c >> bit) & 1]
    })
}

/// Bare Hamiltonian `Σ_j ω_j σ⁺_j σ⁻_j`.
pub fn bare_hamiltonian(p: &SystemParams) -> Op {
    let mut h = Op::zeros();
    for i in 0..DIM {
        let e: f64 = Site::ALL.iter().filter(|s| (i >> s.bit()) & 1 == 1).map(|&s| p.omega(s)).sum();
        h[(i, i)] = C64::new(e, 0.0);
    }
    h
}

pub fn interaction_hamiltonian(p: &SystemParams) -> Op {
    let g = C64::new(p.g, 0.0);
    match p.coupling {
        CouplingKind::Xxx => pauli(Site::Hot, Axis::X) * pauli(Site::Cold, Axis::X) * pauli(Site::Work, Axis::X) * g,
        CouplingKind::Resonant => {
            let fwd = pauli(Site::Hot, Axis::Plus) * pauli(Site::Cold, Axis::Minus) * pauli(Site::Work, Axis::Minus);
            (fwd + fwd.adjoint()) * g
        }
    }
}

pub fn build_hamiltonian(p: &SystemParams) -> Op {
    bare_hamiltonian(p) + interaction_hamiltonian(p)
}

/// Name of an eigenvector.
///
/// Both Hamiltonians are block diagonal over the four complementary pairs
/// `(|100⟩,|011⟩)`, `(|110⟩,|001⟩)`, `(|101⟩,|010⟩)`, `(|111⟩,|000⟩)`;
/// `Pair { block: a, upper }` is `ε_{a+}` or `ε_{a−}`. `Rank(k)` is used
/// when an eigenvector cannot be attributed to a single block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Pair { block: u8, upper: bool },
    Rank(u8),
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Pair { block, upper } => write!(f, "{}{}", block, if *upper { '+' } else { '-' }),
            Label::Rank(k) => write!(f, "#{k}"),
        }
    }
}

/// `(first, second)` basis indices of each block, in the order used by
/// `|ε_a±⟩ ∝ |first⟩ + x_±|second⟩`.
pub const BLOCKS: [(usize, usize); 4] = [(0b100, 0b011), (0b110, 0b001), (0b101, 0b010), (0b111, 0b000)];

/// Column order of labelled eigensystems: `0−,1−,2−,3−,0+,1+,2+,3+`.
pub const PAIR_ORDER: [Label; 8] = [
    Label::Pair { block: 0, upper: false },
    Label::Pair { block: 1, upper: false },
    Label::Pair { block: 2, upper: false },
    Label::Pair { block: 3, upper: false },
    Label::Pair { block: 0, upper: true },
    Label::Pair { block: 1, upper: true },
    Label::Pair { block: 2, upper: true },
    Label::Pair { block: 3, upper: true },
];

#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub energies: [f64; DIM],
    /// Columns are eigenvectors in the product basis.
    pub basis: Op,
    pub labels: [Label; DIM],
}

impl Eigensystem {
    pub fn column_of(&self, label: Label) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// `V† A V`
    pub fn to_energy_frame(&self, a: &Op) -> Op {
        self.basis.adjoint() * a * self.basis
    }

    /// `V A V†`
    pub fn to_product_frame(&self, a: &Op) -> Op {
        self.basis * a * self.basis.adjoint()
    }

    /// `‖H V − V E‖ / ‖H‖` in Frobenius norm.
    pub fn residual(&self, h: &Op) -> f64 {
        let mut hv = h * self.basis;
        for (k, &e) in self.energies.iter().enumerate() {
            let col = self.basis.column(k) * C64::new(e, 0.0);
            let mut target = hv.column_mut(k);
            target -= col;
        }
        hv.norm() / h.norm().max(f64::MIN_POSITIVE)
    }
}

/// Rotates each column so its largest-magnitude component is real positive.
fn fix_phases(basis: &mut Op) {
    for k in 0..DIM {
        let mut col = basis.column_mut(k);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            continue;
        }
        let pivot = col.iter().copied().find(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
        let phase = pivot.conj() / pivot.norm();
        col *= phase;
    }
}

/// Eigenpair of the 2×2 block `[[Δ, g], [g, −Δ]]` for eigenvalue `±R`.
/// Returns the (unnormalised) coefficients of `(|first⟩, |second⟩)`.
fn block_vector(delta: f64, g: f64, upper: bool) -> (f64, f64) {
    let r = delta.hypot(g);
    if r == 0.0 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        return if upper { (s, s) } else { (s, -s) };
    }
    // Two algebraically equivalent forms; take the one that does not cancel.
    let (a, b) = if upper { ((g, r - delta), (r + delta, g)) } else { ((g, -(r + delta)), (delta - r, g)) };
    let na = a.0.hypot(a.1);
    let nb = b.0.hypot(b.1);
    if na >= nb {
        (a.0 / na, a.1 / na)
    } else {
        (b.0 / nb, b.1 / nb)
    }
}

/// Closed-form eigensystem of `H₀ + H_int` (XXX coupling).
///
/// Each complementary pair `(|first⟩, |second⟩)` with bare energies
/// `(E₁, E₂)` forms the block `c + [[Δ, g], [g, −Δ]]` with
/// `c = (E₁+E₂)/2`, `Δ = (E₁−E₂)/2`, giving `ε_{a±} = c ± √(g² + Δ²)`.
/// At `ω_h = ω_c + ω_w` every centre equals `ω_h` and the half-gaps are
/// `(0, ω_c, ω_w, ω_h)`.
pub fn analytic_eigensystem(p: &SystemParams) -> Result<Eigensystem> {
    if p.coupling != CouplingKind::Xxx {
        return Err(Error::NoClosedForm);
    }
    p.validate()?;
    let h0 = bare_hamiltonian(p);
    let mut energies = [0.0; DIM];
    let mut basis = Op::zeros();
    for (col, label) in PAIR_ORDER.iter().enumerate() {
        let Label::Pair { block, upper } = *label else { unreachable!() };
        let (first, second) = BLOCKS[block as usize];
        let e1 = h0[(first, first)].re;
        let e2 = h0[(second, second)].re;
        let centre = 0.5 * (e1 + e2);
        let delta = 0.5 * (e1 - e2);
        let r = delta.hypot(p.g);
        energies[col] = if upper { centre + r } else { centre - r };
        let (a, b) = block_vector(delta, p.g, upper);
        basis[(first, col)] = C64::new(a, 0.0);
        basis[(second, col)] = C64::new(b, 0.0);
    }
    fix_phases(&mut basis);
    Ok(Eigensystem { energies, basis, labels: PAIR_ORDER })
}

/// Numerical eigensystem of a Hermitian operator.
///
/// Eigenvectors that live inside a single complementary block are labelled
/// `ε_{a±}` and ordered like [`analytic_eigensystem`]; if any eigenvector
/// straddles blocks (cross-block degeneracy) the columns are ordered by
/// ascending energy and labelled by rank.
pub fn numeric_eigensystem(h: &Op) -> Result<Eigensystem> {
    let eig = SymmetricEigen::new(*h);
    let mut order: Vec<usize> = (0..DIM).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut block_of = [usize::MAX; DIM];
    for k in 0..DIM {
        let v = eig.eigenvectors.column(k);
        for (b, &(first, second)) in BLOCKS.iter().enumerate() {
            let w = v[first].norm_sqr() + v[second].norm_sqr();
            if w >= 1.0 - 1e-8 {
                block_of[k] = b;
            }
        }
    }
    let mut counts = [0usize; 4];
    for &b in &block_of {
        if b < 4 {
            counts[b] += 1;
        }
    }
    let labelled = counts.iter().all(|&c| c == 2);

    let mut energies = [0.0; DIM];
    let mut basis = Op::zeros();
    let mut labels = [Label::Rank(0); DIM];
    if labelled {
        for (col, label) in PAIR_ORDER.iter().enumerate() {
            let Label::Pair { block, upper } = *label else { unreachable!() };
            let mut members: Vec<usize> = order.iter().copied().filter(|&k| block_of[k] == block as usize).collect();
            members.truncate(2);
            let k = if upper { members[1] } else { members[0] };
            energies[col] = eig.eigenvalues[k];
            basis.set_column(col, &eig.eigenvectors.column(k));
            labels[col] = *label;
        }
    } else {
        for (col, &k) in order.iter().enumerate() {
            energies[col] = eig.eigenvalues[k];
            basis.set_column(col, &eig.eigenvectors.column(k));
            labels[col] = Label::Rank(col as u8);
        }
    }
    fix_phases(&mut basis);
    let es = Eigensystem { energies, basis, labels };
    let residual = es.residual(h);
    if !(residual <= 1e-10) {
        return Err(Error::EigenResidual { residual });
    }
    Ok(es)
}

/// Closed form for the XXX coupling, numerical diagonalisation otherwise.
pub fn eigensystem(p: &SystemParams) -> Result<Eigensystem> {
    match p.coupling {
        CouplingKind::Xxx => analytic_eigensystem(p),
        CouplingKind::Resonant => {
            p.validate()?;
            numeric_eigensystem(&build_hamiltonian(p))
        }
    }
}
