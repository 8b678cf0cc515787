//! Dense density-matrix state with qubit-targeted gate and channel
//! application.
//!
//! Basis index convention: qubit 0 is the most significant bit, so the
//! computational basis state |q0 q1 … q(n-1)⟩ has index
//! `Σ q_k · 2^(n-1-k)`.
//!
//! Single-qubit operations never materialize a full-space operator. They are
//! turned into a 4x4 map on each 2x2 block of matrix elements that differ only
//! in the target bit, and only the upper block triangle is computed; the
//! lower triangle is filled by Hermitian conjugation.

use crate::channels::KrausSet;
use crate::error::{Error, Result};
use crate::linalg::{self, DampingMap, Mat2, Mat4, Superop, C64, ZERO};

pub const MAX_QUBITS: usize = 12;

/// Tolerance for unitarity, trace and Hermiticity validity checks.
pub const VALIDITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C64>,
}

fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

impl DensityMatrix {
    /// |0…0⟩⟨0…0|
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        data[0] = linalg::ONE;
        Ok(Self { n_qubits, data })
    }

    /// I / 2^n
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        let p = 1.0 / dim as f64;
        for i in 0..dim {
            data[i * dim + i] = C64::new(p, 0.0);
        }
        Ok(Self { n_qubits, data })
    }

    /// |ψ⟩⟨ψ| for a normalized amplitude vector of length 2^n.
    pub fn from_statevector(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::invalid(format!(
                "statevector length {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::invalid(format!("statevector norm² is {norm}, expected 1")));
        }
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = amplitudes[i] * amplitudes[j].conj();
            }
        }
        Ok(Self { n_qubits, data })
    }

    /// Build from row-major elements. Checks shape, Hermiticity and unit
    /// trace; positivity is the caller's responsibility.
    pub fn from_elements(n_qubits: usize, data: Vec<C64>) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} elements for {n_qubits} qubits, got {}",
                dim * dim,
                data.len()
            )));
        }
        let rho = Self { n_qubits, data };
        let herm = rho.hermiticity_error();
        if herm > VALIDITY_TOL {
            return Err(Error::invalid(format!("matrix is not Hermitian (error {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::invalid(format!("trace is {tr}, expected 1")));
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    /// Row-major elements.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim()).map(<[C64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re).sum()
    }

    /// Tr(ρ²)
    pub fn purity(&self) -> f64 {
        // Tr(ρρ) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    /// max |ρ_ij − conj(ρ_ji)|
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                err = err.max((self.data[i * dim + j] - self.data[j * dim + i].conj()).norm());
            }
        }
        err
    }

    fn check_target(&self, target: usize) -> Result<()> {
        if target >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: target,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// ρ → UρU† with U acting on `target`.
    pub fn apply_single_qubit_gate(&mut self, u: &Mat2, target: usize) -> Result<()> {
        self.check_target(target)?;
        let err = linalg::unitarity_error2(u);
        if err > VALIDITY_TOL {
            return Err(Error::invalid(format!("gate is not unitary (‖U†U−I‖ = {err:e})")));
        }
        apply_block_map(&mut self.data, self.n_qubits, target, &Superop::from_unitary(u));
        Ok(())
    }

    /// ρ → UρU† with the 4x4 U acting on `(a, b)`; `a` is the high bit of
    /// U's local basis.
    pub fn apply_two_qubit_gate(&mut self, u: &Mat4, targets: (usize, usize)) -> Result<()> {
        let (a, b) = targets;
        self.check_target(a)?;
        self.check_target(b)?;
        if a == b {
            return Err(Error::invalid(format!("two-qubit gate targets must differ, got ({a}, {b})")));
        }
        let err = linalg::unitarity_error4(u);
        if err > VALIDITY_TOL {
            return Err(Error::invalid(format!("gate is not unitary (‖U†U−I‖ = {err:e})")));
        }
        apply_two_qubit_unitary(&mut self.data, self.n_qubits, a, b, u);
        Ok(())
    }

    /// ρ → Σ_k E_k ρ E_k† on `target`.
    pub fn apply_channel(&mut self, kraus: &KrausSet, target: usize) -> Result<()> {
        self.apply_kraus(kraus.operators(), target)
    }

    /// Like [`apply_channel`](Self::apply_channel) for an arbitrary operator
    /// list; rejects sets that violate completeness.
    pub fn apply_kraus(&mut self, ops: &[Mat2], target: usize) -> Result<()> {
        self.check_target(target)?;
        let err = linalg::completeness_error(ops);
        if ops.is_empty() || err > VALIDITY_TOL {
            return Err(Error::invalid(format!(
                "Kraus set is not complete (‖ΣE†E−I‖ = {err:e})"
            )));
        }
        apply_block_map(&mut self.data, self.n_qubits, target, &Superop::from_kraus(ops));
        Ok(())
    }

    /// Tr(ρ Z^⊗n)
    pub fn expectation_all_z(&self) -> f64 {
        expectation_all_z(&self.data, self.n_qubits)
    }

    pub(crate) fn from_raw(n_qubits: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), 1 << (2 * n_qubits));
        Self { n_qubits, data }
    }
}

pub(crate) fn expectation_all_z(data: &[C64], n_qubits: usize) -> f64 {
    let dim = 1usize << n_qubits;
    (0..dim)
        .map(|i| {
            let d = data[i * dim + i].re;
            if i.count_ones() % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .sum()
}

/// Z^⊗n as a dense Hermitian matrix.
pub(crate) fn all_z_observable(n_qubits: usize) -> Vec<C64> {
    let dim = 1usize << n_qubits;
    let mut data = vec![ZERO; dim * dim];
    for i in 0..dim {
        data[i * dim + i] = C64::new(if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    data
}

/// Re Tr(A B) for Hermitian A, B.
pub(crate) fn hermitian_inner(a: &[C64], b: &[C64]) -> f64 {
    // Tr(AB) = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij)
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Indices in `0..dim` whose `mask` bit is clear, in ascending order.
#[inline]
fn clear_bit_indices(dim: usize, mask: usize) -> impl Iterator<Item = usize> {
    (0..dim / 2).map(move |k| ((k & !(mask - 1)) << 1) | (k & (mask - 1)))
}

/// Apply a single-qubit block map to a Hermitian matrix in place.
pub(crate) fn apply_block_map(data: &mut [C64], n_qubits: usize, target: usize, map: &Superop) {
    let dim = 1usize << n_qubits;
    let m = 1usize << (n_qubits - 1 - target);
    assert_eq!(data.len(), dim * dim);
    for i in clear_bit_indices(dim, m) {
        let r0 = i * dim;
        let r1 = (i | m) * dim;
        // diagonal block: result is Hermitian, keep it exactly so
        {
            let b = [data[r0 + i], data[r0 + (i | m)], data[r1 + i], data[r1 + (i | m)]];
            let o = map.apply(b);
            data[r0 + i] = C64::new(o[0].re, 0.0);
            data[r0 + (i | m)] = o[1];
            data[r1 + i] = o[1].conj();
            data[r1 + (i | m)] = C64::new(o[3].re, 0.0);
        }
        for j in clear_bit_indices(dim, m).skip_while(|&j| j <= i) {
            let jm = j | m;
            let b = [data[r0 + j], data[r0 + jm], data[r1 + j], data[r1 + jm]];
            let o = map.apply(b);
            data[r0 + j] = o[0];
            data[r0 + jm] = o[1];
            data[r1 + j] = o[2];
            data[r1 + jm] = o[3];
            data[j * dim + i] = o[0].conj();
            data[jm * dim + i] = o[1].conj();
            data[j * dim + (i | m)] = o[2].conj();
            data[jm * dim + (i | m)] = o[3].conj();
        }
    }
}

/// [`apply_block_map`] specialized to a [`DampingMap`].
pub(crate) fn apply_damping_map(data: &mut [C64], n_qubits: usize, target: usize, map: &DampingMap) {
    let dim = 1usize << n_qubits;
    let m = 1usize << (n_qubits - 1 - target);
    assert_eq!(data.len(), dim * dim);
    let [[p00, p01], [p10, p11]] = map.populations;
    let k = map.coherence;
    for i in clear_bit_indices(dim, m) {
        let r0 = i * dim;
        let r1 = (i | m) * dim;
        {
            let (a, d) = (data[r0 + i].re, data[r1 + (i | m)].re);
            data[r0 + i] = C64::new(p00 * a + p01 * d, 0.0);
            data[r1 + (i | m)] = C64::new(p10 * a + p11 * d, 0.0);
            let off = data[r0 + (i | m)] * k;
            data[r0 + (i | m)] = off;
            data[r1 + i] = off.conj();
        }
        for j in clear_bit_indices(dim, m).skip_while(|&j| j <= i) {
            let jm = j | m;
            let (a, d) = (data[r0 + j], data[r1 + jm]);
            let o0 = a * p00 + d * p01;
            let o3 = a * p10 + d * p11;
            let o1 = data[r0 + jm] * k;
            let o2 = data[r1 + j] * k;
            data[r0 + j] = o0;
            data[r0 + jm] = o1;
            data[r1 + j] = o2;
            data[r1 + jm] = o3;
            data[j * dim + i] = o0.conj();
            data[jm * dim + i] = o1.conj();
            data[j * dim + (i | m)] = o2.conj();
            data[jm * dim + (i | m)] = o3.conj();
        }
    }
}

/// ρ → RXX(θ) ρ RXX(θ)† on qubits `(a, b)`.
///
/// With RXX(θ) = c·I − i·s·F, F = X_a X_b flipping both bits, each element
/// mixes only with the three others reachable by flipping row and/or
/// column: ρ' = c²ρ + s²FρF + ics(ρF − Fρ).
pub(crate) fn apply_rxx(data: &mut [C64], n_qubits: usize, a: usize, b: usize, theta: f64) {
    let dim = 1usize << n_qubits;
    let ma = 1usize << (n_qubits - 1 - a);
    let f = ma | (1usize << (n_qubits - 1 - b));
    assert_eq!(data.len(), dim * dim);
    let (s, c) = (0.5 * theta).sin_cos();
    let (cc, ss, cs) = (c * c, s * s, c * s);
    let ics = |z: C64| C64::new(-cs * z.im, cs * z.re);
    for i in clear_bit_indices(dim, ma) {
        let (ri, rf) = (i * dim, (i ^ f) * dim);
        for j in clear_bit_indices(dim, ma) {
            let jf = j ^ f;
            let (pa, pb, pc, pd) = (ri + j, rf + jf, ri + jf, rf + j);
            let (va, vb, vc, vd) = (data[pa], data[pb], data[pc], data[pd]);
            let (ab, cd) = (ics(va - vb), ics(vc - vd));
            data[pa] = va * cc + vb * ss + cd;
            data[pb] = vb * cc + va * ss - cd;
            data[pc] = vc * cc + vd * ss + ab;
            data[pd] = vd * cc + vc * ss - ab;
        }
    }
}

/// ρ → UρU† for a 4x4 unitary on qubits `(a, b)`, Hermitian input.
pub(crate) fn apply_two_qubit_unitary(data: &mut [C64], n_qubits: usize, a: usize, b: usize, u: &Mat4) {
    let dim = 1usize << n_qubits;
    let ma = 1usize << (n_qubits - 1 - a);
    let mb = 1usize << (n_qubits - 1 - b);
    let group = |base: usize| [base, base | mb, base | ma, base | ma | mb];
    let bases: Vec<usize> = (0..dim).filter(|x| x & (ma | mb) == 0).collect();
    let ud = linalg::dagger4(u);
    for (bi, &ib) in bases.iter().enumerate() {
        let rows = group(ib);
        for &jb in &bases[bi..] {
            let cols = group(jb);
            let mut blk = [[ZERO; 4]; 4];
            for (r, &row) in rows.iter().enumerate() {
                for (c, &col) in cols.iter().enumerate() {
                    blk[r][c] = data[row * dim + col];
                }
            }
            let out = linalg::mul4(&linalg::mul4(u, &blk), &ud);
            for (r, &row) in rows.iter().enumerate() {
                for (c, &col) in cols.iter().enumerate() {
                    data[row * dim + col] = out[r][c];
                    data[col * dim + row] = out[r][c].conj();
                }
            }
            if ib == jb {
                for &row in &rows {
                    let d = &mut data[row * dim + row];
                    *d = C64::new(d.re, 0.0);
                }
            }
        }
    }
}
