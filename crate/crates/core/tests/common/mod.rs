//! Brute-force reference simulators for cross-checking the library: full
//! Kronecker-product operators, plain matrix products, and a pure-state
//! simulator. Nothing here calls into the simulation code under test.

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::Rng;

pub type Dense = Vec<Vec<C64>>;
pub type M2 = [[C64; 2]; 2];
pub type M4 = [[C64; 4]; 4];

const Z: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(d: usize) -> Dense {
    vec![vec![Z; d]; d]
}

pub fn eye(d: usize) -> Dense {
    let mut m = zeros(d);
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = c(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    let mut out = zeros(d);
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == Z {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &Dense) -> Dense {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

pub fn scale(a: &Dense, s: f64) -> Dense {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (da, db) = (a.len(), b.len());
    let mut out = zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn dense2(u: &M2) -> Dense {
    u.iter().map(|r| r.to_vec()).collect()
}

/// I ⊗ … ⊗ u ⊗ … ⊗ I with qubit 0 leftmost (most significant).
pub fn embed1(u: &M2, target: usize, n: usize) -> Dense {
    (0..n).fold(eye(1), |acc, q| {
        let f = if q == target { dense2(u) } else { eye(2) };
        kron(&acc, &f)
    })
}

/// Two-qubit operator on (a, b), local basis |q_a q_b⟩.
pub fn embed2(u: &M4, a: usize, b: usize, n: usize) -> Dense {
    let d = 1 << n;
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let mask = (1 << (n - 1 - a)) | (1 << (n - 1 - b));
    let mut out = zeros(d);
    for i in 0..d {
        for j in 0..d {
            if i & !mask == j & !mask {
                out[i][j] = u[2 * bit(i, a) + bit(i, b)][2 * bit(j, a) + bit(j, b)];
            }
        }
    }
    out
}

pub fn conjugate(rho: &Dense, u: &Dense) -> Dense {
    matmul(&matmul(u, rho), &dagger(u))
}

pub fn kraus_sum(rho: &Dense, ops: &[M2], target: usize, n: usize) -> Dense {
    ops.iter()
        .map(|k| conjugate(rho, &embed1(k, target, n)))
        .reduce(|a, b| add(&a, &b))
        .unwrap()
}

pub fn trace(rho: &Dense) -> C64 {
    (0..rho.len()).map(|i| rho[i][i]).sum()
}

/// Tr(ρ Z^⊗n) with Z^⊗n = diag((−1)^popcount(i)).
pub fn all_z(rho: &Dense) -> f64 {
    (0..rho.len())
        .map(|i| if i.count_ones() % 2 == 0 { rho[i][i].re } else { -rho[i][i].re })
        .sum()
}

pub fn rx(t: f64) -> M2 {
    let (s, co) = (t / 2.0).sin_cos();
    [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

pub fn ry(t: f64) -> M2 {
    let (s, co) = (t / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

/// exp(−iθ X⊗X / 2) = cos(θ/2) I − i sin(θ/2) X⊗X
pub fn rxx(t: f64) -> M4 {
    let (s, co) = (t / 2.0).sin_cos();
    let mut m = [[Z; 4]; 4];
    for k in 0..4 {
        m[k][k] = c(co, 0.0);
        m[k][3 - k] = c(0.0, -s);
    }
    m
}

pub fn pauli(label: char) -> M2 {
    let (o, i) = (c(1.0, 0.0), c(0.0, 1.0));
    match label {
        'I' => [[o, Z], [Z, o]],
        'X' => [[Z, o], [o, Z]],
        'Y' => [[Z, -i], [i, Z]],
        'Z' => [[o, Z], [Z, -o]],
        _ => unreachable!(),
    }
}

/// Kraus operators written out from the textbook definitions.
pub fn reference_kraus(channel: &str, g: f64) -> Vec<M2> {
    let r = |x: f64| c(x, 0.0);
    match channel {
        "ad" => vec![
            [[r(1.0), Z], [Z, r((1.0 - g).sqrt())]],
            [[Z, r(g.sqrt())], [Z, Z]],
        ],
        "pd" => vec![
            [[r(1.0), Z], [Z, r((1.0 - g).sqrt())]],
            [[Z, Z], [Z, r(g.sqrt())]],
        ],
        "dp" => {
            let w = [(1.0 - g).sqrt(), (g / 3.0).sqrt(), (g / 3.0).sqrt(), (g / 3.0).sqrt()];
            ['I', 'Z', 'X', 'Y']
                .iter()
                .zip(w)
                .map(|(&p, w)| {
                    let m = pauli(p);
                    [[m[0][0] * w, m[0][1] * w], [m[1][0] * w, m[1][1] * w]]
                })
                .collect()
        }
        _ => unreachable!(),
    }
}

#[derive(Clone, Copy)]
pub enum RefGate {
    Rx(usize, usize),
    Ry(usize, usize),
    Rxx(usize, usize, usize),
}

/// Gate sequence of the 4-qubit re-uploading ansatz, written out directly:
/// per layer RX(x0) on q0, RX(x1) on q2, RY on each qubit, then the RXX ring.
/// Indices refer to features (Rx) or parameters (Ry, Rxx).
pub fn reference_layout(layers: usize) -> Vec<RefGate> {
    let mut g = Vec::new();
    for l in 0..layers {
        g.push(RefGate::Rx(0, 0));
        g.push(RefGate::Rx(1, 2));
        for q in 0..4 {
            g.push(RefGate::Ry(8 * l + q, q));
        }
        for q in 0..4 {
            g.push(RefGate::Rxx(8 * l + 4 + q, q, (q + 1) % 4));
        }
    }
    g
}

/// ⟨Z^⊗4⟩ of the ansatz by full-matrix density simulation, with the given
/// Kraus set after every gate on every qubit it touches.
pub fn reference_forward(
    layers: usize,
    x: [f64; 2],
    params: &[f64],
    noise: Option<&[M2]>,
    noise_after_encoding: bool,
) -> f64 {
    let n = 4;
    let mut rho = zeros(16);
    rho[0][0] = c(1.0, 0.0);
    for gate in reference_layout(layers) {
        let (u, touched, encoding) = match gate {
            RefGate::Rx(f, q) => (embed1(&rx(x[f]), q, n), vec![q], true),
            RefGate::Ry(p, q) => (embed1(&ry(params[p]), q, n), vec![q], false),
            RefGate::Rxx(p, a, b) => (embed2(&rxx(params[p]), a, b, n), vec![a, b], false),
        };
        rho = conjugate(&rho, &u);
        if let Some(ops) = noise {
            if noise_after_encoding || !encoding {
                for q in touched {
                    rho = kraus_sum(&rho, ops, q, n);
                }
            }
        }
    }
    all_z(&rho)
}

/// Same circuit, noiseless, as a 16-amplitude pure state.
pub fn statevector_forward(layers: usize, x: [f64; 2], params: &[f64]) -> f64 {
    let n = 4;
    let mut psi = vec![Z; 16];
    psi[0] = c(1.0, 0.0);
    for gate in reference_layout(layers) {
        let u = match gate {
            RefGate::Rx(f, q) => embed1(&rx(x[f]), q, n),
            RefGate::Ry(p, q) => embed1(&ry(params[p]), q, n),
            RefGate::Rxx(p, a, b) => embed2(&rxx(params[p]), a, b, n),
        };
        psi = (0..16).map(|i| (0..16).map(|j| u[i][j] * psi[j]).sum()).collect();
    }
    psi.iter()
        .enumerate()
        .map(|(i, a)| if i.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

pub fn random_density(n: usize, rng: &mut impl Rng) -> Dense {
    let d = 1 << n;
    let a: Dense = (0..d)
        .map(|_| (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let p = matmul(&a, &dagger(&a));
    let t = trace(&p).re;
    scale(&p, 1.0 / t)
}

/// Random unitary by Gram-Schmidt on a random complex matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> Dense {
    let mut cols: Vec<Vec<C64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for u in &cols {
            let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
}

pub fn to_m2(u: &Dense) -> M2 {
    [[u[0][0], u[0][1]], [u[1][0], u[1][1]]]
}

pub fn to_m4(u: &Dense) -> M4 {
    let mut m = [[Z; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = u[i][j];
        }
    }
    m
}

pub fn flatten(rho: &Dense) -> Vec<C64> {
    rho.iter().flatten().copied().collect()
}

pub fn unflatten(data: &[C64]) -> Dense {
    let d = (data.len() as f64).sqrt() as usize;
    data.chunks(d).map(<[C64]>::to_vec).collect()
}

pub fn data_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/diabetes.tab")
}
