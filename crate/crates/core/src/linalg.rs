//! Fixed-size complex matrices used for gates, Kraus operators and
//! single-qubit superoperators.

use num_complex::Complex64;

pub type C64 = Complex64;

/// 2x2 complex matrix, row-major.
pub type Mat2 = [[C64; 2]; 2];
/// 4x4 complex matrix, row-major. For two-qubit gates the local basis is
/// |q_a q_b⟩ with q_a the high bit.
pub type Mat4 = [[C64; 4]; 4];

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn identity4() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = ONE;
    }
    m
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}

pub fn pauli_z() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

/// exp(-iθX/2)
pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

/// exp(-iθY/2)
pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

/// exp(-iθ X⊗X/2)
pub fn rxx(theta: f64) -> Mat4 {
    let (s, c) = (0.5 * theta).sin_cos();
    let c = C64::new(c, 0.0);
    let off = C64::new(0.0, -s);
    let mut m = [[ZERO; 4]; 4];
    for k in 0..4 {
        m[k][k] = c;
        m[k][3 - k] = off;
    }
    m
}

pub fn scale2(m: &Mat2, s: f64) -> Mat2 {
    let mut out = *m;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

pub fn dagger2(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

pub fn dagger4(m: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = m[c][r].conj();
        }
    }
    out
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

/// Max-norm distance of U†U from the identity.
pub fn unitarity_error2(u: &Mat2) -> f64 {
    max_dist2(&mul2(&dagger2(u), u), &identity2())
}

pub fn unitarity_error4(u: &Mat4) -> f64 {
    let p = mul4(&dagger4(u), u);
    let id = identity4();
    let mut err: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            err = err.max((p[r][c] - id[r][c]).norm());
        }
    }
    err
}

pub fn max_dist2(a: &Mat2, b: &Mat2) -> f64 {
    let mut err: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            err = err.max((a[r][c] - b[r][c]).norm());
        }
    }
    err
}

/// ‖Σ E_k†E_k − I‖∞ (max-abs element).
pub fn completeness_error(ops: &[Mat2]) -> f64 {
    let mut acc = [[ZERO; 2]; 2];
    for e in ops {
        let p = mul2(&dagger2(e), e);
        for r in 0..2 {
            for c in 0..2 {
                acc[r][c] += p[r][c];
            }
        }
    }
    max_dist2(&acc, &identity2())
}

/// Linear map on a single-qubit 2x2 block, acting on the flattened block
/// `[b00, b01, b10, b11]`. Built from Kraus operators as
/// `S[(r,c),(p,q)] = Σ_k E_k[r][p] · conj(E_k[c][q])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Superop(pub [[C64; 4]; 4]);

impl Superop {
    pub fn from_kraus(ops: &[Mat2]) -> Self {
        let mut s = [[ZERO; 4]; 4];
        for e in ops {
            for r in 0..2 {
                for c in 0..2 {
                    for p in 0..2 {
                        for q in 0..2 {
                            s[r * 2 + c][p * 2 + q] += e[r][p] * e[c][q].conj();
                        }
                    }
                }
            }
        }
        Superop(s)
    }

    pub fn from_unitary(u: &Mat2) -> Self {
        Self::from_kraus(std::slice::from_ref(u))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Superop) -> Superop {
        let mut out = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] = (0..4).map(|k| self.0[r][k] * first.0[k][c]).sum();
            }
        }
        Superop(out)
    }

    /// Hilbert-Schmidt adjoint; maps observables backwards through the map.
    pub fn adjoint(&self) -> Superop {
        let mut out = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] = self.0[c][r].conj();
            }
        }
        Superop(out)
    }

    #[inline(always)]
    pub fn apply(&self, b: [C64; 4]) -> [C64; 4] {
        let s = &self.0;
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = s[r][0] * b[0] + s[r][1] * b[1] + s[r][2] * b[2] + s[r][3] * b[3];
        }
        out
    }
}

/// Block map that mixes the two diagonal entries of a 2x2 block with a real
/// matrix and scales both off-diagonal entries by a real factor. Amplitude
/// damping, phase damping and depolarizing all have this form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DampingMap {
    /// `[b00', b11'] = populations · [b00, b11]`
    pub populations: [[f64; 2]; 2],
    pub coherence: f64,
}

impl DampingMap {
    /// Recognize the damping structure in a general superoperator.
    pub fn from_superop(s: &Superop) -> Option<Self> {
        const TOL: f64 = 1e-15;
        let s = &s.0;
        let zero = |r: usize, c: usize| s[r][c].norm() <= TOL;
        let real = |r: usize, c: usize| s[r][c].im.abs() <= TOL;
        let structural_zeros = [(0, 1), (0, 2), (1, 0), (1, 2), (1, 3), (2, 0), (2, 1), (2, 3), (3, 1), (3, 2)];
        if !structural_zeros.iter().all(|&(r, c)| zero(r, c)) {
            return None;
        }
        if ![(0, 0), (0, 3), (3, 0), (3, 3), (1, 1), (2, 2)].iter().all(|&(r, c)| real(r, c)) {
            return None;
        }
        if (s[1][1].re - s[2][2].re).abs() > TOL {
            return None;
        }
        Some(Self {
            populations: [[s[0][0].re, s[0][3].re], [s[3][0].re, s[3][3].re]],
            coherence: s[1][1].re,
        })
    }

    pub fn adjoint(&self) -> Self {
        let p = self.populations;
        Self {
            populations: [[p[0][0], p[1][0]], [p[0][1], p[1][1]]],
            coherence: self.coherence,
        }
    }
}
