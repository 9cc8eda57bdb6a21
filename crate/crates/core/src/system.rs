//! Spin-system construction: Hamiltonians of a group of equivalent
//! spin-1/2 nuclei plus heteronuclear partners, decomposition into
//! symmetry manifolds, transition catalogs and equilibrium states.
//!
//! The Hamiltonian is, with all couplings in Hz and a single overall
//! factor of 2π applied internally,
//!
//! ```text
//! H = Σ_ch ω_ch·F_z(ch)
//!   + Σ_(a,b) (J + 2D)·F_z(a)·F_z(b)          (secular heteronuclear)
//!   + Σ_{i<j in group} D_homo·(3·S_zi·S_zj − S_i·S_j)
//! ```
//!
//! Only the homonuclear dipolar term is non-secular; it commutes with
//! the total spin of the equivalent group, so the level scheme splits
//! into a symmetric manifold (maximal total spin, the computational
//! register) and asymmetric manifolds.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::algebra::{eigh_hermitian, ComplexMatrix};
use crate::engine::DensityState;
use crate::{Error, Result};

/// Default frequency bin inside which transitions count as degenerate.
pub const DEFAULT_BIN_HZ: f64 = 0.5;

/// Relative gyromagnetic weights used for equilibrium magnetization.
pub fn gyromagnetic_weight(species: &str) -> f64 {
    match species {
        "1H" => 1.0,
        "19F" => 0.94,
        "13C" => 0.2514,
        _ => 1.0,
    }
}

/// One rf channel (one nuclear species).
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub species: String,
    /// Resonance offset of the channel's rotating frame, Hz.
    pub offset_hz: f64,
}

/// The group of equivalent spin-1/2 nuclei carrying the strong
/// homonuclear residual dipolar coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentGroup {
    pub channel: String,
    pub count: usize,
    pub d_homo_hz: f64,
}

/// Secular heteronuclear coupling between two channels; only the
/// combination `J + 2D` enters the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroCoupling {
    pub a: String,
    pub b: String,
    pub j_hz: f64,
    pub d_hz: f64,
}

impl HeteroCoupling {
    pub fn secular_hz(&self) -> f64 {
        self.j_hz + 2.0 * self.d_hz
    }
}

/// Molecule templates fixing the customary transition labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoleculeTemplate {
    /// Three equivalent protons coupled to one carbon-13.
    Ch3i,
    /// Three equivalent protons, no heteronucleus.
    Ch3cn,
    /// Two equivalent protons coupled to one fluorine.
    Ch2fcn,
}

impl MoleculeTemplate {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "ch3i" => Some(Self::Ch3i),
            "ch3cn" => Some(Self::Ch3cn),
            "ch2fcn" => Some(Self::Ch2fcn),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ch3i => "ch3i",
            Self::Ch3cn => "ch3cn",
            Self::Ch2fcn => "ch2fcn",
        }
    }

    /// Figure label of a symmetric-manifold transition, keyed by the
    /// level pair in the deterministic level ordering.
    fn symmetric_label(&self, species: &str, r: usize, s: usize) -> Option<&'static str> {
        match self {
            Self::Ch3i => match (species, r, s) {
                ("1H", 0, 2) => Some("h1"),
                ("1H", 1, 3) => Some("h2"),
                ("1H", 2, 4) => Some("h3"),
                ("1H", 3, 5) => Some("h4"),
                ("1H", 4, 6) => Some("h5"),
                ("1H", 5, 7) => Some("h6"),
                ("13C", 0, 1) => Some("C1"),
                ("13C", 2, 3) => Some("C2"),
                ("13C", 4, 5) => Some("C3"),
                ("13C", 6, 7) => Some("C4"),
                _ => None,
            },
            Self::Ch3cn => match (species, r, s) {
                ("1H", 0, 1) => Some("1"),
                ("1H", 1, 2) => Some("2"),
                ("1H", 2, 3) => Some("3"),
                _ => None,
            },
            Self::Ch2fcn => match (species, r, s) {
                ("1H", 0, 2) => Some("H1"),
                ("1H", 1, 3) => Some("H2"),
                ("1H", 2, 4) => Some("H3"),
                ("1H", 3, 5) => Some("H4"),
                ("19F", 0, 1) => Some("F1"),
                ("19F", 2, 3) => Some("F2"),
                ("19F", 4, 5) => Some("F3"),
                _ => None,
            },
        }
    }

    /// Label of an asymmetric-manifold transition degenerate with the
    /// symmetric line `base` in manifold `k`: primes for most systems,
    /// the plain indices 4 and 5 for the three-proton triplet system.
    fn asymmetric_label(&self, base: Option<&str>, k: usize, r: usize, s: usize) -> String {
        if let Self::Ch3cn = self {
            return match k {
                1 => "4".to_string(),
                _ => "5".to_string(),
            };
        }
        match base {
            Some(b) => format!("{}{}", b, "'".repeat(k)),
            None => format!("{}-{}", r + 1, s + 1),
        }
    }
}

/// Declarative description of a spin system.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystemSpec {
    pub name: String,
    pub template: Option<MoleculeTemplate>,
    pub channels: Vec<Channel>,
    pub equivalent_group: EquivalentGroup,
    pub hetero_couplings: Vec<HeteroCoupling>,
    /// Degeneracy bin for spectra and selective pulses, Hz.
    pub bin_hz: f64,
}

impl SpinSystemSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.equivalent_group.count;
        if n != 2 && n != 3 {
            return Err(Error::BadSystem(format!(
                "equivalent group must hold 2 or 3 spins, got {n}"
            )));
        }
        if !self.equivalent_group.d_homo_hz.is_finite() {
            return Err(Error::BadSystem("homonuclear coupling must be finite".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::BadSystem("no channels declared".into()));
        }
        for (i, ch) in self.channels.iter().enumerate() {
            if !ch.offset_hz.is_finite() {
                return Err(Error::BadSystem(format!("offset of '{}' not finite", ch.species)));
            }
            if self.channels[..i].iter().any(|c| c.species == ch.species) {
                return Err(Error::BadSystem(format!("duplicate channel '{}'", ch.species)));
            }
        }
        if self.channel_index(&self.equivalent_group.channel).is_none() {
            return Err(Error::BadSystem(format!(
                "equivalent group references unknown channel '{}'",
                self.equivalent_group.channel
            )));
        }
        for (i, hc) in self.hetero_couplings.iter().enumerate() {
            if self.channel_index(&hc.a).is_none() || self.channel_index(&hc.b).is_none() {
                return Err(Error::BadSystem(format!(
                    "coupling references unknown channel '{}'/'{}'",
                    hc.a, hc.b
                )));
            }
            if hc.a == hc.b {
                return Err(Error::BadSystem("coupling must join two distinct channels".into()));
            }
            if !hc.j_hz.is_finite() || !hc.d_hz.is_finite() {
                return Err(Error::BadSystem("coupling constants must be finite".into()));
            }
            let same = |x: &HeteroCoupling, y: &HeteroCoupling| {
                (x.a == y.a && x.b == y.b) || (x.a == y.b && x.b == y.a)
            };
            if self.hetero_couplings[..i].iter().any(|other| same(hc, other)) {
                return Err(Error::BadSystem(format!(
                    "more than one coupling between '{}' and '{}'",
                    hc.a, hc.b
                )));
            }
        }
        if self.dim() > 16 {
            return Err(Error::BadSystem(format!(
                "Hilbert dimension {} exceeds 16",
                self.dim()
            )));
        }
        if self.bin_hz.is_nan() || self.bin_hz <= 0.0 {
            return Err(Error::BadSystem("degeneracy bin must be positive".into()));
        }
        Ok(())
    }

    pub fn channel_index(&self, species: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.species == species)
    }

    pub fn spin_count(&self) -> usize {
        self.equivalent_group.count + self.channels.len() - 1
    }

    pub fn dim(&self) -> usize {
        1usize << self.spin_count()
    }

    /// Spin slots in tensor-product order: the equivalent group first,
    /// then one spin per remaining channel in declaration order.
    fn slots(&self) -> Vec<usize> {
        let g = self
            .channel_index(&self.equivalent_group.channel)
            .expect("validated");
        let mut slots = vec![g; self.equivalent_group.count];
        for (i, _) in self.channels.iter().enumerate() {
            if i != g {
                slots.push(i);
            }
        }
        slots
    }
}

fn pauli_half(axis: crate::algebra::Axis) -> ComplexMatrix {
    use crate::algebra::Axis;
    let mut m = ComplexMatrix::zeros(2);
    match axis {
        Axis::X => {
            m[(0, 1)] = Complex64::new(0.5, 0.0);
            m[(1, 0)] = Complex64::new(0.5, 0.0);
        }
        Axis::Y => {
            m[(0, 1)] = Complex64::new(0.0, -0.5);
            m[(1, 0)] = Complex64::new(0.0, 0.5);
        }
        Axis::Z => {
            m[(0, 0)] = Complex64::new(0.5, 0.0);
            m[(1, 1)] = Complex64::new(-0.5, 0.0);
        }
    }
    m
}

/// Single-spin operator embedded at tensor slot `k` of `n` spins.
fn embed_spin_op(op: &ComplexMatrix, k: usize, n: usize) -> ComplexMatrix {
    let left = ComplexMatrix::identity(1 << k);
    let right = ComplexMatrix::identity(1 << (n - k - 1));
    left.kron(op).kron(&right)
}

/// Per-channel total spin operators in the product basis.
pub(crate) struct ProductOps {
    pub fx: Vec<ComplexMatrix>,
    pub fy: Vec<ComplexMatrix>,
    pub fz: Vec<ComplexMatrix>,
}

pub(crate) fn product_ops(spec: &SpinSystemSpec) -> ProductOps {
    use crate::algebra::Axis;
    let slots = spec.slots();
    let n = slots.len();
    let dim = 1 << n;
    let mut fx = vec![ComplexMatrix::zeros(dim); spec.channels.len()];
    let mut fy = vec![ComplexMatrix::zeros(dim); spec.channels.len()];
    let mut fz = vec![ComplexMatrix::zeros(dim); spec.channels.len()];
    for (k, &ch) in slots.iter().enumerate() {
        fx[ch] = fx[ch].add_ref(&embed_spin_op(&pauli_half(Axis::X), k, n));
        fy[ch] = fy[ch].add_ref(&embed_spin_op(&pauli_half(Axis::Y), k, n));
        fz[ch] = fz[ch].add_ref(&embed_spin_op(&pauli_half(Axis::Z), k, n));
    }
    ProductOps { fx, fy, fz }
}

/// Total `S²` of the equivalent group in the product basis.
pub fn group_total_spin_squared(spec: &SpinSystemSpec) -> ComplexMatrix {
    let ops = product_ops(spec);
    let g = spec
        .channel_index(&spec.equivalent_group.channel)
        .expect("validated");
    let sq = |m: &ComplexMatrix| m.mul_ref(m);
    sq(&ops.fx[g]).add_ref(&sq(&ops.fy[g])).add_ref(&sq(&ops.fz[g]))
}

/// Hamiltonian in the product basis, angular units (rad/s).
pub fn build_hamiltonian(spec: &SpinSystemSpec) -> Result<ComplexMatrix> {
    use crate::algebra::Axis;
    spec.validate()?;
    let slots = spec.slots();
    let n = slots.len();
    let dim = 1 << n;
    let ops = product_ops(spec);
    let mut h = ComplexMatrix::zeros(dim);

    for (ch, channel) in spec.channels.iter().enumerate() {
        if channel.offset_hz != 0.0 {
            h = h.add_ref(&ops.fz[ch].scale(Complex64::new(TAU * channel.offset_hz, 0.0)));
        }
    }
    for hc in &spec.hetero_couplings {
        let a = spec.channel_index(&hc.a).expect("validated");
        let b = spec.channel_index(&hc.b).expect("validated");
        let term = ops.fz[a].mul_ref(&ops.fz[b]);
        h = h.add_ref(&term.scale(Complex64::new(TAU * hc.secular_hz(), 0.0)));
    }

    let d = spec.equivalent_group.d_homo_hz;
    if d != 0.0 {
        let g = spec
            .channel_index(&spec.equivalent_group.channel)
            .expect("validated");
        let group_slots: Vec<usize> = slots
            .iter()
            .enumerate()
            .filter(|(_, &ch)| ch == g)
            .map(|(k, _)| k)
            .collect();
        let axis_ops = |axis: Axis| -> Vec<ComplexMatrix> {
            group_slots
                .iter()
                .map(|&k| embed_spin_op(&pauli_half(axis), k, n))
                .collect()
        };
        let sx = axis_ops(Axis::X);
        let sy = axis_ops(Axis::Y);
        let sz = axis_ops(Axis::Z);
        for i in 0..group_slots.len() {
            for j in (i + 1)..group_slots.len() {
                let dot = sx[i]
                    .mul_ref(&sx[j])
                    .add_ref(&sy[i].mul_ref(&sy[j]))
                    .add_ref(&sz[i].mul_ref(&sz[j]));
                let term = sz[i].mul_ref(&sz[j]).scale(Complex64::new(3.0, 0.0)).sub_ref(&dot);
                h = h.add_ref(&term.scale(Complex64::new(TAU * d, 0.0)));
            }
        }
    }
    Ok(h)
}

/// Manifold tag of an energy level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manifold {
    Symmetric,
    Asymmetric(usize),
}

impl Manifold {
    pub fn is_symmetric(&self) -> bool {
        matches!(self, Manifold::Symmetric)
    }
}

/// One eigenlevel with its quantum numbers.
#[derive(Debug, Clone)]
pub struct Level {
    pub energy_hz: f64,
    pub manifold: Manifold,
    /// Total spin of the equivalent group.
    pub group_s: f64,
    /// z projection of the equivalent group.
    pub group_m: f64,
    /// z projections of the remaining channels, in channel order.
    pub hetero_m: Vec<f64>,
    /// Register label for symmetric-manifold levels.
    pub logical: Option<String>,
}

/// Eigenlevels sorted into manifolds, plus the unitary from the
/// product basis to the eigenbasis (columns are eigenvectors).
#[derive(Debug, Clone)]
pub struct LevelScheme {
    pub dim: usize,
    pub levels: Vec<Level>,
    pub basis: ComplexMatrix,
}

impl LevelScheme {
    pub fn energies_hz(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy_hz).collect()
    }

    pub fn symmetric_count(&self) -> usize {
        self.levels.iter().filter(|l| l.manifold.is_symmetric()).count()
    }

    /// Hamiltonian in the eigenbasis (diagonal), angular units.
    pub fn hamiltonian_eigen(&self) -> ComplexMatrix {
        let d: Vec<Complex64> = self
            .levels
            .iter()
            .map(|l| Complex64::new(TAU * l.energy_hz, 0.0))
            .collect();
        ComplexMatrix::from_diag(&d)
    }
}

/// Symmetry-adapted basis of the equivalent group: columns are the
/// coupled states, tagged with (S, manifold index, m).
fn coupling_basis(n: usize) -> (ComplexMatrix, Vec<(f64, usize, f64)>) {
    let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
    let inv_sqrt3 = 1.0 / libm::sqrt(3.0);
    let inv_sqrt6 = 1.0 / libm::sqrt(6.0);
    match n {
        2 => {
            let mut u = ComplexMatrix::zeros(4);
            let mut put = |col: usize, terms: &[(usize, f64)]| {
                for &(row, w) in terms {
                    u[(row, col)] = Complex64::new(w, 0.0);
                }
            };
            put(0, &[(0b00, 1.0)]);
            put(1, &[(0b01, inv_sqrt2), (0b10, inv_sqrt2)]);
            put(2, &[(0b11, 1.0)]);
            put(3, &[(0b01, inv_sqrt2), (0b10, -inv_sqrt2)]);
            let tags = vec![(1.0, 0, 1.0), (1.0, 0, 0.0), (1.0, 0, -1.0), (0.0, 1, 0.0)];
            (u, tags)
        }
        3 => {
            let mut u = ComplexMatrix::zeros(8);
            let s23 = libm::sqrt(2.0 / 3.0);
            let mut put = |col: usize, terms: &[(usize, f64)]| {
                for &(row, w) in terms {
                    u[(row, col)] = Complex64::new(w, 0.0);
                }
            };
            // quartet ladder
            put(0, &[(0b000, 1.0)]);
            put(1, &[(0b001, inv_sqrt3), (0b010, inv_sqrt3), (0b100, inv_sqrt3)]);
            put(2, &[(0b011, inv_sqrt3), (0b101, inv_sqrt3), (0b110, inv_sqrt3)]);
            put(3, &[(0b111, 1.0)]);
            // doublet built on the pair triplet
            put(4, &[(0b001, s23), (0b010, -inv_sqrt6), (0b100, -inv_sqrt6)]);
            put(5, &[(0b011, inv_sqrt6), (0b101, inv_sqrt6), (0b110, -s23)]);
            // doublet built on the pair singlet
            put(6, &[(0b010, inv_sqrt2), (0b100, -inv_sqrt2)]);
            put(7, &[(0b011, inv_sqrt2), (0b101, -inv_sqrt2)]);
            let tags = vec![
                (1.5, 0, 1.5),
                (1.5, 0, 0.5),
                (1.5, 0, -0.5),
                (1.5, 0, -1.5),
                (0.5, 1, 0.5),
                (0.5, 1, -0.5),
                (0.5, 2, 0.5),
                (0.5, 2, -0.5),
            ];
            (u, tags)
        }
        _ => unreachable!("group size validated to 2 or 3"),
    }
}

fn logical_label(
    template: Option<MoleculeTemplate>,
    n: usize,
    group_m: f64,
    hetero_m: &[f64],
) -> String {
    // ladder position within the symmetric manifold, counted from the top
    let pos = ((n as f64 / 2.0 - group_m) + 0.25) as usize;
    let mut s = String::new();
    match (template, n) {
        (Some(MoleculeTemplate::Ch2fcn), _) | (None, 2) => {
            // qutrit digit
            s.push_str(&format!("{pos}"));
        }
        _ => {
            // two-bit ladder label
            s.push_str(match pos {
                0 => "00",
                1 => "01",
                2 => "10",
                _ => "11",
            });
        }
    }
    for &m in hetero_m {
        s.push(if m > 0.0 { '0' } else { '1' });
    }
    s
}

/// Split the Hamiltonian into symmetry manifolds.
///
/// The coupled basis of the equivalent group (tensored with the
/// heteronuclear spins) simultaneously diagonalizes the Hamiltonian,
/// the group `S²` and all z projections; levels are then ordered
/// manifold by manifold, with the group projection descending and the
/// heteronuclear projections descending inside it.  That ordering is
/// what fixes the figure labels of the transition catalog.
pub fn decompose_symmetry(h: &ComplexMatrix, spec: &SpinSystemSpec) -> Result<LevelScheme> {
    spec.validate()?;
    let dim = spec.dim();
    if h.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: dim,
        });
    }
    let scale = h.max_abs().max(1.0);
    let s2 = group_total_spin_squared(spec);
    let comm = crate::algebra::commutator(h, &s2)?;
    let residual = comm.max_abs() / scale;
    if residual > 1e-6 {
        return Err(Error::SymmetryBroken { residual });
    }

    let n = spec.equivalent_group.count;
    let (u_group, tags) = coupling_basis(n);
    let hetero_count = spec.channels.len() - 1;
    let u_full = u_group.kron(&ComplexMatrix::identity(1 << hetero_count));
    let h_coupled = h.conjugate_by(&u_full);

    // The coupled basis must diagonalize the Hamiltonian; any residual
    // off-diagonal weight means the system left the supported family.
    let mut off = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            if r != c {
                off = off.max(h_coupled[(r, c)].norm());
            }
        }
    }
    if off > 1e-7 * scale {
        return Err(Error::SymmetryBroken {
            residual: off / scale,
        });
    }

    struct Raw {
        col: usize,
        energy_hz: f64,
        s: f64,
        k: usize,
        m: f64,
        hetero_m: Vec<f64>,
    }
    let mut raw = Vec::with_capacity(dim);
    for col in 0..dim {
        let group_col = col >> hetero_count;
        let het_bits = col & ((1usize << hetero_count) - 1);
        let (s, k, m) = tags[group_col];
        let hetero_m: Vec<f64> = (0..hetero_count)
            .map(|j| {
                let bit = (het_bits >> (hetero_count - 1 - j)) & 1;
                if bit == 0 {
                    0.5
                } else {
                    -0.5
                }
            })
            .collect();
        raw.push(Raw {
            col,
            energy_hz: h_coupled[(col, col)].re / TAU,
            s,
            k,
            m,
            hetero_m,
        });
    }

    raw.sort_by(|a, b| {
        let key = |r: &Raw| {
            let mut v = vec![-(2.0 * r.s), r.k as f64, -(2.0 * r.m)];
            for &m in &r.hetero_m {
                v.push(-(2.0 * m));
            }
            v
        };
        key(a)
            .partial_cmp(&key(b))
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                b.energy_hz
                    .partial_cmp(&a.energy_hz)
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
    });

    let s_max = n as f64 / 2.0;
    let mut basis = ComplexMatrix::zeros(dim);
    let mut levels = Vec::with_capacity(dim);
    for (new_idx, r) in raw.iter().enumerate() {
        for row in 0..dim {
            basis[(row, new_idx)] = u_full[(row, r.col)];
        }
        let symmetric = (r.s - s_max).abs() < 1e-9;
        levels.push(Level {
            energy_hz: r.energy_hz,
            manifold: if symmetric {
                Manifold::Symmetric
            } else {
                Manifold::Asymmetric(r.k)
            },
            group_s: r.s,
            group_m: r.m,
            hetero_m: r.hetero_m.clone(),
            logical: symmetric.then(|| logical_label(spec.template, n, r.m, &r.hetero_m)),
        });
    }

    Ok(LevelScheme { dim, levels, basis })
}

/// One allowed single-quantum transition.
#[derive(Debug, Clone)]
pub struct Transition {
    pub label: String,
    /// Upper-projection level index (`r < s` in scheme order).
    pub r: usize,
    pub s: usize,
    pub frequency_hz: f64,
    /// Raising-operator matrix element ⟨r|F₊|s⟩.
    pub moment: Complex64,
    pub channel: String,
    /// Transitions sharing a group id are degenerate within the bin.
    pub degeneracy_group: usize,
    pub symmetric: bool,
}

/// All allowed transitions of one channel, sorted by frequency.
#[derive(Debug, Clone)]
pub struct TransitionCatalog {
    pub channel: String,
    pub bin_hz: f64,
    pub entries: Vec<Transition>,
}

impl TransitionCatalog {
    pub fn find(&self, label: &str) -> Option<&Transition> {
        self.entries.iter().find(|t| t.label == label)
    }

    /// Indices of all entries degenerate with `idx` (including itself).
    pub fn degenerate_set(&self, idx: usize) -> Vec<usize> {
        let group = self.entries[idx].degeneracy_group;
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, t)| t.degeneracy_group == group)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Enumerate allowed single-quantum transitions of one channel.
pub fn transition_catalog(
    scheme: &LevelScheme,
    spec: &SpinSystemSpec,
    channel: &str,
) -> Result<TransitionCatalog> {
    let ch = spec
        .channel_index(channel)
        .ok_or_else(|| Error::UnknownChannel(channel.to_string()))?;
    let ops = product_ops(spec);
    let fplus = ops.fx[ch]
        .add_ref(&ops.fy[ch].scale(Complex64::I))
        .conjugate_by(&scheme.basis);

    struct Entry {
        r: usize,
        s: usize,
        freq: f64,
        moment: Complex64,
        manifold: Manifold,
    }
    let mut list = Vec::new();
    for r in 0..scheme.dim {
        for s in (r + 1)..scheme.dim {
            let moment = fplus[(r, s)];
            if moment.norm() > 1e-9 {
                list.push(Entry {
                    r,
                    s,
                    freq: scheme.levels[s].energy_hz - scheme.levels[r].energy_hz,
                    moment,
                    manifold: scheme.levels[r].manifold,
                });
            }
        }
    }
    list.sort_by(|a, b| a.freq.partial_cmp(&b.freq).unwrap_or(core::cmp::Ordering::Equal));

    // degeneracy groups by frequency bin
    let bin = spec.bin_hz;
    let mut groups = vec![0usize; list.len()];
    let mut g = 0;
    for i in 1..list.len() {
        if (list[i].freq - list[i - 1].freq).abs() > bin {
            g += 1;
        }
        groups[i] = g;
    }

    let mut entries = Vec::with_capacity(list.len());
    for (i, e) in list.iter().enumerate() {
        let symmetric = e.manifold.is_symmetric();
        let label = match (spec.template, e.manifold) {
            (Some(t), Manifold::Symmetric) => t
                .symmetric_label(channel, e.r, e.s)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("{}-{}", e.r + 1, e.s + 1)),
            (Some(t), Manifold::Asymmetric(k)) => {
                // degenerate symmetric partner fixes the base name
                let base = list
                    .iter()
                    .find(|o| o.manifold.is_symmetric() && (o.freq - e.freq).abs() <= bin)
                    .and_then(|o| t.symmetric_label(channel, o.r, o.s));
                t.asymmetric_label(base, k, e.r, e.s)
            }
            (None, _) => format!("{}-{}", e.r + 1, e.s + 1),
        };
        entries.push(Transition {
            label,
            r: e.r,
            s: e.s,
            frequency_hz: e.freq,
            moment: e.moment,
            channel: channel.to_string(),
            degeneracy_group: groups[i],
            symmetric,
        });
    }
    Ok(TransitionCatalog {
        channel: channel.to_string(),
        bin_hz: bin,
        entries,
    })
}

/// High-temperature deviation density matrix at equilibrium:
/// `ρ_eq = Σ_ch γ_ch · F_z(ch)` in the eigenbasis.  Traceless.
pub fn equilibrium_state(spec: &SpinSystemSpec, scheme: &LevelScheme) -> DensityState {
    let ops = product_ops(spec);
    let mut rho = ComplexMatrix::zeros(scheme.dim);
    for (ch, channel) in spec.channels.iter().enumerate() {
        let w = gyromagnetic_weight(&channel.species);
        rho = rho.add_ref(&ops.fz[ch].scale(Complex64::new(w, 0.0)));
    }
    DensityState::new(rho.conjugate_by(&scheme.basis))
}

/// A fully assembled system: spec, level scheme, per-channel catalogs
/// and the channel spin operators transformed to the eigenbasis.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub spec: SpinSystemSpec,
    pub scheme: LevelScheme,
    pub catalogs: Vec<TransitionCatalog>,
    fx_eigen: Vec<ComplexMatrix>,
    fy_eigen: Vec<ComplexMatrix>,
    fz_eigen: Vec<ComplexMatrix>,
}

impl SpinSystem {
    pub fn build(spec: SpinSystemSpec) -> Result<Self> {
        let h = build_hamiltonian(&spec)?;
        let scheme = decompose_symmetry(&h, &spec)?;
        let mut catalogs = Vec::new();
        for ch in &spec.channels {
            catalogs.push(transition_catalog(&scheme, &spec, &ch.species)?);
        }
        let ops = product_ops(&spec);
        let to_eigen = |v: &[ComplexMatrix]| -> Vec<ComplexMatrix> {
            v.iter().map(|m| m.conjugate_by(&scheme.basis)).collect()
        };
        Ok(Self {
            fx_eigen: to_eigen(&ops.fx),
            fy_eigen: to_eigen(&ops.fy),
            fz_eigen: to_eigen(&ops.fz),
            spec,
            scheme,
            catalogs,
        })
    }

    pub fn dim(&self) -> usize {
        self.scheme.dim
    }

    pub fn channel_index(&self, species: &str) -> Result<usize> {
        self.spec
            .channel_index(species)
            .ok_or_else(|| Error::UnknownChannel(species.into()))
    }

    pub fn fx(&self, ch: usize) -> &ComplexMatrix {
        &self.fx_eigen[ch]
    }

    pub fn fy(&self, ch: usize) -> &ComplexMatrix {
        &self.fy_eigen[ch]
    }

    pub fn fz(&self, ch: usize) -> &ComplexMatrix {
        &self.fz_eigen[ch]
    }

    pub fn catalog(&self, species: &str) -> Result<&TransitionCatalog> {
        let idx = self.channel_index(species)?;
        Ok(&self.catalogs[idx])
    }

    /// Resolve a transition label across all channels.
    pub fn find_transition(&self, label: &str) -> Result<(usize, usize)> {
        for (ch, cat) in self.catalogs.iter().enumerate() {
            if let Some(pos) = cat.entries.iter().position(|t| t.label == label) {
                return Ok((ch, pos));
            }
        }
        Err(Error::UnknownTransition(label.into()))
    }

    pub fn equilibrium(&self) -> DensityState {
        equilibrium_state(&self.spec, &self.scheme)
    }

    /// Observed channel of the bundled experiments: the equivalent
    /// group for the proton-only systems, fluorine when it is present.
    pub fn observed_channel(&self) -> &str {
        match self.spec.template {
            Some(MoleculeTemplate::Ch2fcn) => "19F",
            _ => &self.spec.equivalent_group.channel,
        }
    }
}

/// Bundled system definitions with couplings matching the published
/// splittings of the three oriented molecules.
pub mod presets {
    use super::*;

    /// Three methyl protons coupled to carbon-13; proton splitting
    /// 3·D_homo = 3553 Hz, carbon doublet splitting J+2D = 2053 Hz.
    pub fn ch3i() -> SpinSystemSpec {
        SpinSystemSpec {
            name: "ch3i".into(),
            template: Some(MoleculeTemplate::Ch3i),
            channels: vec![
                Channel {
                    species: "1H".into(),
                    offset_hz: 0.0,
                },
                Channel {
                    species: "13C".into(),
                    offset_hz: 0.0,
                },
            ],
            equivalent_group: EquivalentGroup {
                channel: "1H".into(),
                count: 3,
                d_homo_hz: 3553.0 / 3.0,
            },
            hetero_couplings: vec![HeteroCoupling {
                a: "1H".into(),
                b: "13C".into(),
                j_hz: 0.0,
                d_hz: 2053.0 / 2.0,
            }],
            bin_hz: DEFAULT_BIN_HZ,
        }
    }

    /// Three methyl protons, proton triplet splitting 3·D_homo = 4968 Hz.
    pub fn ch3cn() -> SpinSystemSpec {
        SpinSystemSpec {
            name: "ch3cn".into(),
            template: Some(MoleculeTemplate::Ch3cn),
            channels: vec![Channel {
                species: "1H".into(),
                offset_hz: 0.0,
            }],
            equivalent_group: EquivalentGroup {
                channel: "1H".into(),
                count: 3,
                d_homo_hz: 4968.0 / 3.0,
            },
            hetero_couplings: vec![],
            bin_hz: DEFAULT_BIN_HZ,
        }
    }

    /// Two methylene protons coupled to fluorine; proton splitting
    /// 3·D_homo = 5694 Hz, fluorine triplet splitting J+2D = 473 Hz.
    pub fn ch2fcn() -> SpinSystemSpec {
        SpinSystemSpec {
            name: "ch2fcn".into(),
            template: Some(MoleculeTemplate::Ch2fcn),
            channels: vec![
                Channel {
                    species: "1H".into(),
                    offset_hz: 0.0,
                },
                Channel {
                    species: "19F".into(),
                    offset_hz: 0.0,
                },
            ],
            equivalent_group: EquivalentGroup {
                channel: "1H".into(),
                count: 2,
                d_homo_hz: 5694.0 / 3.0,
            },
            hetero_couplings: vec![HeteroCoupling {
                a: "1H".into(),
                b: "19F".into(),
                j_hz: 0.0,
                d_hz: 473.0 / 2.0,
            }],
            bin_hz: DEFAULT_BIN_HZ,
        }
    }
}

/// Residual of rebuilding the Hamiltonian from its generic Jacobi
/// eigendecomposition; an independent route against the
/// symmetry-adapted construction, exposed for tests.
pub fn eigen_reconstruction_residual(h: &ComplexMatrix) -> Result<f64> {
    let (vals, v) = eigh_hermitian(h)?;
    let d: Vec<Complex64> = vals.iter().map(|&l| Complex64::new(l, 0.0)).collect();
    let rebuilt = v.mul_ref(&ComplexMatrix::from_diag(&d)).mul_ref(&v.dagger());
    Ok(rebuilt.max_abs_diff(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dimensions_and_counts() {
        let sys = SpinSystem::build(presets::ch3i()).unwrap();
        assert_eq!(sys.dim(), 16);
        assert_eq!(sys.scheme.symmetric_count(), 8);

        let sys = SpinSystem::build(presets::ch3cn()).unwrap();
        assert_eq!(sys.dim(), 8);
        assert_eq!(sys.scheme.symmetric_count(), 4);

        let sys = SpinSystem::build(presets::ch2fcn()).unwrap();
        assert_eq!(sys.dim(), 8);
        assert_eq!(sys.scheme.symmetric_count(), 6);
    }

    #[test]
    fn zero_couplings_leave_only_offsets() {
        let mut spec = presets::ch3cn();
        spec.equivalent_group.d_homo_hz = 0.0;
        spec.channels[0].offset_hz = 120.0;
        let h = build_hamiltonian(&spec).unwrap();
        // diagonal, entries = 2π·offset·m
        for r in 0..8 {
            for c in 0..8 {
                if r != c {
                    assert!(h[(r, c)].norm() < 1e-12);
                }
            }
        }
        let m_of = |idx: usize| 1.5 - (idx.count_ones() as f64);
        for idx in 0..8usize {
            assert_abs_diff_eq!(h[(idx, idx)].re, TAU * 120.0 * m_of(idx), epsilon = 1e-9);
        }
    }

    #[test]
    fn hamiltonian_commutes_with_group_spin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut spec = presets::ch3i();
            spec.equivalent_group.d_homo_hz = rng.gen_range(-2000.0..2000.0);
            spec.hetero_couplings[0].j_hz = rng.gen_range(-100.0..100.0);
            spec.hetero_couplings[0].d_hz = rng.gen_range(-1500.0..1500.0);
            spec.channels[0].offset_hz = rng.gen_range(-500.0..500.0);
            spec.channels[1].offset_hz = rng.gen_range(-500.0..500.0);
            let h = build_hamiltonian(&spec).unwrap();
            let s2 = group_total_spin_squared(&spec);
            let comm = crate::algebra::commutator(&h, &s2).unwrap();
            assert!(comm.max_abs() <= 1e-9 * h.max_abs().max(1.0));
            // and the decomposition accepts it
            decompose_symmetry(&h, &spec).unwrap();
        }
    }

    #[test]
    fn symmetry_split_is_coupling_independent() {
        let mut spec = presets::ch2fcn();
        spec.equivalent_group.d_homo_hz = 0.0;
        let h = build_hamiltonian(&spec).unwrap();
        let scheme = decompose_symmetry(&h, &spec).unwrap();
        assert_eq!(scheme.symmetric_count(), 6);
    }

    #[test]
    fn rejects_oversized_system() {
        let mut spec = presets::ch3i();
        spec.channels.push(Channel {
            species: "19F".into(),
            offset_hz: 0.0,
        });
        spec.channels.push(Channel {
            species: "31P".into(),
            offset_hz: 0.0,
        });
        assert!(matches!(build_hamiltonian(&spec), Err(Error::BadSystem(_))));
    }

    #[test]
    fn eigen_reconstruction() {
        for spec in [presets::ch3i(), presets::ch3cn(), presets::ch2fcn()] {
            let h = build_hamiltonian(&spec).unwrap();
            let res = eigen_reconstruction_residual(&h).unwrap();
            assert!(res <= 1e-9 * h.max_abs().max(1.0));
        }
    }

    #[test]
    fn ch3i_proton_frequencies() {
        let sys = SpinSystem::build(presets::ch3i()).unwrap();
        let cat = sys.catalog("1H").unwrap();
        let sym: Vec<&Transition> = cat.entries.iter().filter(|t| t.symmetric).collect();
        assert_eq!(sym.len(), 6);
        let freqs: Vec<f64> = sym.iter().map(|t| t.frequency_hz).collect();
        let expect = [-4579.5, -2526.5, -1026.5, 1026.5, 2526.5, 4579.5];
        for (f, e) in freqs.iter().zip(expect) {
            assert_abs_diff_eq!(*f, e, epsilon = 1e-6);
        }
        // splitting between lines sharing a carbon state
        assert_abs_diff_eq!(freqs[2] - freqs[0], 3553.0, epsilon = 1e-6);
        let labels: Vec<&str> = sym.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["h1", "h2", "h3", "h4", "h5", "h6"]);
    }

    #[test]
    fn ch3i_carbon_frequencies() {
        let sys = SpinSystem::build(presets::ch3i()).unwrap();
        let cat = sys.catalog("13C").unwrap();
        let sym: Vec<&Transition> = cat.entries.iter().filter(|t| t.symmetric).collect();
        assert_eq!(sym.len(), 4);
        let freqs: Vec<f64> = sym.iter().map(|t| t.frequency_hz).collect();
        for (f, e) in freqs.iter().zip([-3079.5, -1026.5, 1026.5, 3079.5]) {
            assert_abs_diff_eq!(*f, e, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(freqs[1] - freqs[0], 2053.0, epsilon = 1e-6);
        let labels: Vec<&str> = sym.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["C1", "C2", "C3", "C4"]);
        // two asymmetric manifolds shadow the central carbon lines
        let c2_set = cat.degenerate_set(cat.entries.iter().position(|t| t.label == "C2").unwrap());
        assert_eq!(c2_set.len(), 3);
    }

    #[test]
    fn ch3cn_triplet() {
        let sys = SpinSystem::build(presets::ch3cn()).unwrap();
        let cat = sys.catalog("1H").unwrap();
        let sym: Vec<&Transition> = cat.entries.iter().filter(|t| t.symmetric).collect();
        let freqs: Vec<f64> = sym.iter().map(|t| t.frequency_hz).collect();
        for (f, e) in freqs.iter().zip([-4968.0, 0.0, 4968.0]) {
            assert_abs_diff_eq!(*f, e, epsilon = 1e-9);
        }
        let labels: Vec<&str> = cat.entries.iter().map(|t| t.label.as_str()).collect();
        for want in ["1", "2", "3", "4", "5"] {
            assert!(labels.contains(&want), "missing transition {want}");
        }
        // transitions 2, 4, 5 are degenerate
        let t2 = cat.entries.iter().position(|t| t.label == "2").unwrap();
        assert_eq!(cat.degenerate_set(t2).len(), 3);
    }

    #[test]
    fn ch2fcn_lines() {
        let sys = SpinSystem::build(presets::ch2fcn()).unwrap();
        let hcat = sys.catalog("1H").unwrap();
        let hfreqs: Vec<f64> = hcat
            .entries
            .iter()
            .filter(|t| t.symmetric)
            .map(|t| t.frequency_hz)
            .collect();
        for (f, e) in hfreqs.iter().zip([-3083.5, -2610.5, 2610.5, 3083.5]) {
            assert_abs_diff_eq!(*f, e, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(hfreqs[2] - hfreqs[0], 5694.0, epsilon = 1e-6);

        let fcat = sys.catalog("19F").unwrap();
        let ffreqs: Vec<f64> = fcat
            .entries
            .iter()
            .filter(|t| t.symmetric)
            .map(|t| t.frequency_hz)
            .collect();
        for (f, e) in ffreqs.iter().zip([-473.0, 0.0, 473.0]) {
            assert_abs_diff_eq!(*f, e, epsilon = 1e-6);
        }
        // singlet-manifold fluorine line shadows the central one
        let f2 = fcat.entries.iter().position(|t| t.label == "F2").unwrap();
        assert_eq!(fcat.degenerate_set(f2).len(), 2);
        assert!(fcat.find("F2'").is_some());
    }

    #[test]
    fn logical_labels_follow_the_ladder() {
        let sys = SpinSystem::build(presets::ch3cn()).unwrap();
        let labels: Vec<&str> = sys
            .scheme
            .levels
            .iter()
            .take(4)
            .map(|l| l.logical.as_deref().unwrap())
            .collect();
        assert_eq!(labels, ["00", "01", "10", "11"]);

        let sys = SpinSystem::build(presets::ch2fcn()).unwrap();
        let labels: Vec<&str> = sys
            .scheme
            .levels
            .iter()
            .take(6)
            .map(|l| l.logical.as_deref().unwrap())
            .collect();
        assert_eq!(labels, ["00", "01", "10", "11", "20", "21"]);
    }

    #[test]
    fn equilibrium_is_traceless_and_diagonal() {
        let sys = SpinSystem::build(presets::ch3i()).unwrap();
        let rho = sys.equilibrium();
        assert!(rho.matrix().trace().norm() < 1e-12);
        for r in 0..16 {
            for c in 0..16 {
                if r != c {
                    assert!(rho.matrix()[(r, c)].norm() < 1e-12);
                }
            }
        }
        // diagonal = Σ γ·m over channels
        for (idx, level) in sys.scheme.levels.iter().enumerate() {
            let expect = 1.0 * level.group_m + 0.2514 * level.hetero_m[0];
            assert_abs_diff_eq!(rho.matrix()[(idx, idx)].re, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn gamma_scaling_only_mixes_channels() {
        // the fluorine weight must scale only the fluorine part of the
        // equilibrium pattern, leaving proton ratios alone
        let sys = SpinSystem::build(presets::ch2fcn()).unwrap();
        let rho = sys.equilibrium();
        let g = gyromagnetic_weight("19F");
        let mut proton = ComplexMatrix::zeros(8);
        for idx in 0..8 {
            let level = &sys.scheme.levels[idx];
            proton[(idx, idx)] = Complex64::new(level.group_m, 0.0);
        }
        let fluorine = rho.matrix().sub_ref(&proton);
        for idx in 0..8 {
            let level = &sys.scheme.levels[idx];
            assert_abs_diff_eq!(fluorine[(idx, idx)].re, g * level.hetero_m[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn moments_are_real_nonnegative() {
        for spec in [presets::ch3i(), presets::ch3cn(), presets::ch2fcn()] {
            let sys = SpinSystem::build(spec).unwrap();
            for cat in &sys.catalogs {
                for t in &cat.entries {
                    assert!(t.moment.im.abs() < 1e-12);
                    assert!(t.moment.re > 0.0);
                }
            }
        }
    }

    #[test]
    fn unknown_channel_rejected() {
        let sys = SpinSystem::build(presets::ch3cn()).unwrap();
        assert!(matches!(
            transition_catalog(&sys.scheme, &sys.spec, "31P"),
            Err(Error::UnknownChannel(_))
        ));
    }
}
