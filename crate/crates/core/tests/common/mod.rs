//! Shared generators and an independent Hochschild oracle for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use convdeform::coalgebra::Coalgebra;
use convdeform::convolution::{ConvMorphism, Filtration, MultiMap};
use convdeform::deformation::transport;
use convdeform::extension::Comodule;
use convdeform::matrix::Matrix;
use convdeform::scalar::{Field, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Multiplication from `e_i e_j = Σ v e_k` entries `(i, j, k, v)`.
pub fn structure(f: Field, a: usize, products: &[(usize, usize, usize, i64)]) -> MultiMap {
    let mut m = Matrix::zeros(f, a, a * a);
    for &(i, j, k, v) in products {
        let cur = m.get(k, i * a + j).clone();
        m.set(k, i * a + j, cur + f.from_i64(v));
    }
    MultiMap::new(a, 2, 1, m).unwrap()
}

pub fn dual_numbers(f: Field) -> MultiMap {
    structure(f, 2, &[(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1)])
}

pub fn dual_unit(f: Field) -> MultiMap {
    unit_vector(f, 2, 0)
}

/// `γ⊗γ` with `γ(1) = 0, γ(x) = 1`: the coefficient of `t` in `x² = t`.
pub fn gamma_square(f: Field) -> MultiMap {
    structure(f, 2, &[(1, 1, 0, 1)])
}

/// `M_2` on `e11, e12, e21, e22`.
pub fn matrix_algebra(f: Field) -> MultiMap {
    let mut p = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                p.push((i * 2 + j, j * 2 + k, i * 2 + k, 1));
            }
        }
    }
    structure(f, 4, &p)
}

pub fn matrix_unit(f: Field) -> MultiMap {
    let mut u = Matrix::zeros(f, 4, 1);
    u.set(0, 0, f.one());
    u.set(3, 0, f.one());
    MultiMap::new(4, 0, 1, u).unwrap()
}

pub fn unit_vector(f: Field, a: usize, i: usize) -> MultiMap {
    let mut u = Matrix::zeros(f, a, 1);
    u.set(i, 0, f.one());
    MultiMap::new(a, 0, 1, u).unwrap()
}

/// A catalogue of small associative algebras with their units, when unital.
pub fn catalogue(f: Field) -> Vec<(MultiMap, Option<MultiMap>)> {
    vec![
        (structure(f, 1, &[(0, 0, 0, 1)]), Some(unit_vector(f, 1, 0))),
        (dual_numbers(f), Some(dual_unit(f))),
        (structure(f, 2, &[(0, 0, 0, 1), (1, 1, 1, 1)]), None),
        (structure(f, 2, &[]), None),
        (
            structure(f, 2, &[(0, 0, 0, 1), (0, 1, 0, 1), (1, 0, 1, 1), (1, 1, 1, 1)]),
            None,
        ),
        (
            structure(
                f,
                3,
                &[
                    (0, 0, 0, 1),
                    (0, 1, 1, 1),
                    (1, 0, 1, 1),
                    (0, 2, 2, 1),
                    (2, 0, 2, 1),
                    (1, 1, 2, 1),
                ],
            ),
            Some(unit_vector(f, 3, 0)),
        ),
        (
            structure(
                f,
                3,
                &[(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1), (0, 2, 2, 1), (2, 0, 2, 1)],
            ),
            Some(unit_vector(f, 3, 0)),
        ),
        // Upper triangular 2×2 on e11, e12, e22.
        (
            structure(f, 3, &[(0, 0, 0, 1), (0, 1, 1, 1), (1, 2, 1, 1), (2, 2, 2, 1)]),
            None,
        ),
        (structure(f, 3, &[(0, 0, 0, 1), (1, 1, 1, 1), (2, 2, 2, 1)]), None),
    ]
}

pub fn random_scalar(rng: &mut TestRng, f: Field) -> Scalar {
    f.from_i64(rng.gen_range(-2..=2))
}

pub fn random_matrix(rng: &mut TestRng, f: Field, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(f, rows, cols, |_, _| random_scalar(rng, f))
}

pub fn random_invertible(rng: &mut TestRng, f: Field, n: usize) -> (Matrix, Matrix) {
    loop {
        let p = random_matrix(rng, f, n, n);
        if let Some(q) = p.inverse() {
            return (p, q);
        }
    }
}

/// `P⁻¹ m (P⊗P)`.
pub fn change_basis(rng: &mut TestRng, m: &MultiMap) -> MultiMap {
    let f = m.field();
    let a = m.a_dim();
    let (p, q) = random_invertible(rng, f, a);
    let mm = q.checked_mul(m.matrix()).unwrap().checked_mul(&p.kron(&p)).unwrap();
    MultiMap::new(a, 2, 1, mm).unwrap()
}

/// A catalogue algebra of dimension `a` in a random basis.
pub fn random_algebra(rng: &mut TestRng, f: Field, a: usize) -> MultiMap {
    let cat: Vec<_> = catalogue(f).into_iter().filter(|(m, _)| m.a_dim() == a).collect();
    let (m, _) = &cat[rng.gen_range(0..cat.len())];
    change_basis(rng, m)
}

/// Random `f: C → End(A)` with invertible degree-0 part, `C` graded.
pub fn random_invertible_morphism(rng: &mut TestRng, c: &Arc<Coalgebra>, a: usize) -> ConvMorphism {
    let f = c.field();
    let deg = c.grading().expect("graded").to_vec();
    let comps = (0..c.dim())
        .map(|i| {
            let m = if deg[i] == 0 {
                random_invertible(rng, f, a).0
            } else {
                random_matrix(rng, f, a, a)
            };
            MultiMap::new(a, 1, 1, m).unwrap()
        })
        .collect();
    ConvMorphism::new(c.clone(), comps).unwrap()
}

/// Random gauge `ε·Id + g` with `g` supported in positive degree.
pub fn random_gauge(rng: &mut TestRng, c: &Arc<Coalgebra>, a: usize) -> ConvMorphism {
    let f = c.field();
    let deg = c.grading().expect("graded").to_vec();
    let comps = (0..c.dim())
        .map(|i| {
            let m = if deg[i] == 0 {
                Matrix::identity(f, a).scale(&c.counit()[i])
            } else {
                random_matrix(rng, f, a, a)
            };
            MultiMap::new(a, 1, 1, m).unwrap()
        })
        .collect();
    ConvMorphism::new(c.clone(), comps).unwrap()
}

/// An associative multiplication over a connected graded `C`, obtained by
/// transporting `ε·m0` along a random invertible morphism.
pub fn random_associative(rng: &mut TestRng, c: &Arc<Coalgebra>, m0: &MultiMap) -> ConvMorphism {
    let f = random_invertible_morphism(rng, c, m0.a_dim());
    let filt = Filtration::from_grading(c).unwrap();
    transport(&ConvMorphism::epsilon_embed(m0, c.clone()), &f, &filt).unwrap()
}

/// `X = 𝕜^d` with `ρ(x) = Σ_k N^k x ⊗ t^k` over `𝕜[t]_{≤n}`, `N` nilpotent of
/// square zero.
pub fn nilpotent_comodule(rng: &mut TestRng, c: &Arc<Coalgebra>, d: usize) -> Comodule {
    let f = c.field();
    let t = c.index_of("t");
    let s = random_scalar(rng, f);
    let mut entries = Vec::new();
    for i in 0..d {
        entries.push((i, i, 0, f.one()));
        if i + 1 < d {
            if let Some(t) = t {
                entries.push((i + 1, i, t, s.clone()));
            }
        }
    }
    let names = (0..d).map(|i| format!("x{i}")).collect();
    Comodule::new(c.clone(), names, entries.into_iter().filter(|e| !e.3.is_zero())).unwrap()
}

/// Lines `x_i ↦ x_i ⊗ g_{s(i)}` over a group-like coalgebra, seen in a random basis.
pub fn reducible_comodule(rng: &mut TestRng, c: &Arc<Coalgebra>, labels: &[usize]) -> Comodule {
    let f = c.field();
    let d = labels.len();
    let (p, q) = random_invertible(rng, f, d);
    let mut entries = Vec::new();
    for j in 0..d {
        for k in 0..d {
            for (i, &g) in labels.iter().enumerate() {
                let v = p.get(i, j) * q.get(k, i);
                if !v.is_zero() {
                    entries.push((j, k, g, v));
                }
            }
        }
    }
    let names = (0..d).map(|i| format!("y{i}")).collect();
    Comodule::new(c.clone(), names, merge(entries)).unwrap()
}

fn merge(entries: Vec<(usize, usize, usize, Scalar)>) -> Vec<(usize, usize, usize, Scalar)> {
    let mut out: Vec<(usize, usize, usize, Scalar)> = Vec::new();
    for (i, j, c, v) in entries {
        match out.iter_mut().find(|e| (e.0, e.1, e.2) == (i, j, c)) {
            Some(e) => e.3 = e.3.clone() + v,
            None => out.push((i, j, c, v)),
        }
    }
    out.retain(|e| !e.3.is_zero());
    out
}

/// Rank by plain Gaussian elimination on rows.
pub fn rank(mut rows: Vec<Vec<Scalar>>) -> usize {
    let Some(cols) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv().unwrap();
        let pivot: Vec<Scalar> = rows[r].iter().map(|x| x * &inv).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let s = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x = &*x - &(&s * y);
                }
            }
        }
        rows[r] = pivot;
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Whether `v` lies in the column span of `cols`.
pub fn in_span(cols: &[Vec<Scalar>], v: &[Scalar]) -> bool {
    let mut with = cols.to_vec();
    with.push(v.to_vec());
    rank(cols.to_vec()) == rank(with)
}

/// Hochschild cohomology dimensions from structure constants, assembled directly:
/// `(δφ)(a_0..a_n) = a_0 φ(a_1..a_n) + Σ (−1)^{i+1} φ(..a_i a_{i+1}..) + (−1)^{n+1} φ(a_0..a_{n−1}) a_n`.
pub struct HochschildOracle {
    f: Field,
    a: usize,
    c: Vec<Vec<Vec<Scalar>>>,
}

impl HochschildOracle {
    pub fn new(m: &MultiMap) -> HochschildOracle {
        let a = m.a_dim();
        let c = (0..a)
            .map(|i| {
                (0..a)
                    .map(|j| (0..a).map(|k| m.matrix().get(k, i * a + j).clone()).collect())
                    .collect()
            })
            .collect();
        HochschildOracle { f: m.field(), a, c }
    }

    fn tuples(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|t| (0..self.a).map(move |i| t.iter().copied().chain([i]).collect()))
                .collect();
        }
        out
    }

    fn index(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &i| acc * self.a + i)
    }

    /// `δ^n` as rows of a `(a·a^{n+1}) × (a·a^n)` matrix; `φ` has coordinate
    /// `φ[k][tuple]` at `k·a^n + index(tuple)`.
    fn differential_rows(&self, n: usize) -> Vec<Vec<Scalar>> {
        let a = self.a;
        let src = a * a.pow(n as u32);
        let pos = |k: usize, t: &[usize]| k * a.pow(t.len() as u32) + self.index(t);
        let mut rows = Vec::new();
        for out in 0..a {
            for t in self.tuples(n + 1) {
                let mut row = vec![self.f.zero(); src];
                // a_0 φ(a_1..a_n)
                for k in 0..a {
                    let v = &self.c[t[0]][k][out];
                    if !v.is_zero() {
                        let p = pos(k, &t[1..]);
                        row[p] = &row[p] + v;
                    }
                }
                for i in 0..n {
                    let sign = if i % 2 == 0 { -self.f.one() } else { self.f.one() };
                    for l in 0..a {
                        let v = &self.c[t[i]][t[i + 1]][l];
                        if !v.is_zero() {
                            let mut u: Vec<usize> = t[..i].to_vec();
                            u.push(l);
                            u.extend_from_slice(&t[i + 2..]);
                            let p = pos(out, &u);
                            row[p] = &row[p] + &(&sign * v);
                        }
                    }
                }
                let sign = if n.is_multiple_of(2) {
                    -self.f.one()
                } else {
                    self.f.one()
                };
                for k in 0..a {
                    let v = &self.c[k][t[n]][out];
                    if !v.is_zero() {
                        let p = pos(k, &t[..n]);
                        row[p] = &row[p] + &(&sign * v);
                    }
                }
                rows.push(row);
            }
        }
        rows
    }

    pub fn rank_d(&self, n: usize) -> usize {
        rank(self.differential_rows(n))
    }

    pub fn dim_hh(&self, n: usize) -> usize {
        let dim = self.a * self.a.pow(n as u32);
        let below = if n == 0 { 0 } else { self.rank_d(n - 1) };
        dim - self.rank_d(n) - below
    }

    /// Whether the degree-`n` cochain with coordinates `v` is a coboundary.
    pub fn is_coboundary(&self, n: usize, v: &[Scalar]) -> bool {
        if n == 0 {
            return v.iter().all(Scalar::is_zero);
        }
        let rows = self.differential_rows(n - 1);
        let cols: Vec<Vec<Scalar>> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        in_span(&cols, v)
    }
}

/// Composite `m ∘ (p ⊗ q)` of raw matrices for the (AC) checks.
pub fn comp(m: &Matrix, left: &Matrix, right: &Matrix) -> Matrix {
    m.checked_mul(&left.kron(right)).unwrap()
}
