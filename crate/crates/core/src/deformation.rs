//! Deformations of an algebra `(A, m)` in `ℳ_C` along an extension `C ⊆ C̃`.
//!
//! A factorization `m̃ = m∘λ + m̃_X∘p` is associative exactly when
//! `d²(m̃_X) + ζ = 0`, where `ζ(x) = Σ m(ω₁)∘(A⊗m(ω₂)) − m(ω₁)∘(m(ω₂)⊗A)`.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::coalgebra::Coalgebra;
use crate::cohomology::{Cochain, Complex};
use crate::convolution::{
    conv_compose, conv_tensor, is_associative, takeuchi_invert, ConvMorphism, Filtration, MultiMap,
};
use crate::error::{Error, Result};
use crate::extension::{graded_extension, Extension};
use crate::matrix::{Matrix, Vector};
use crate::scalar::Scalar;
use crate::subspace::Subspace;

/// Enumerating cosets stops beyond this many classes.
pub const MAX_ENUMERATED_CLASSES: usize = 4096;

/// An associative algebra `(A, m)` in `ℳ_C`, optionally with a unit `u: C → Hom(𝕜, A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraMC {
    m: ConvMorphism,
    unit: Option<ConvMorphism>,
}

impl AlgebraMC {
    pub fn new(m: ConvMorphism, unit: Option<ConvMorphism>) -> Result<AlgebraMC> {
        if (m.source_arity(), m.target_arity()) != (2, 1) {
            return Err(Error::ShapeError("m must map A⊗A → A".into()));
        }
        if !check_associative(&m)? {
            return Err(Error::NotAssociative("m∗(m⊗A) ≠ m∗(A⊗m)".into()));
        }
        if let Some(u) = &unit {
            if !is_unit(&m, u)? {
                return Err(Error::NotUnital("u is not a two-sided unit of m".into()));
            }
        }
        Ok(AlgebraMC { m, unit })
    }

    /// `(A, m0)` over `C` through `ε`.
    pub fn epsilon_embedded(m0: &MultiMap, unit: Option<&MultiMap>, c: Arc<Coalgebra>) -> Result<AlgebraMC> {
        let m = ConvMorphism::epsilon_embed(m0, c.clone());
        let u = unit.map(|u| ConvMorphism::epsilon_embed(u, c));
        AlgebraMC::new(m, u)
    }

    pub fn m(&self) -> &ConvMorphism {
        &self.m
    }

    pub fn unit(&self) -> Option<&ConvMorphism> {
        self.unit.as_ref()
    }

    pub fn a_dim(&self) -> usize {
        self.m.a_dim()
    }

    pub fn coalgebra(&self) -> &Arc<Coalgebra> {
        self.m.coalgebra()
    }
}

pub fn check_associative(m: &ConvMorphism) -> Result<bool> {
    is_associative(m)
}

/// `m∗(u⊗A)` and `m∗(A⊗u)`.
pub fn unit_products(m: &ConvMorphism, u: &ConvMorphism) -> Result<(ConvMorphism, ConvMorphism)> {
    if (u.source_arity(), u.target_arity()) != (0, 1) {
        return Err(Error::ShapeError("a unit maps 𝕜 → A".into()));
    }
    let id = ConvMorphism::identity(m.coalgebra().clone(), m.a_dim(), 1);
    let left = conv_compose(m, &conv_tensor(u, &id)?)?;
    let right = conv_compose(m, &conv_tensor(&id, u)?)?;
    Ok((left, right))
}

pub fn is_unit(m: &ConvMorphism, u: &ConvMorphism) -> Result<bool> {
    let id = ConvMorphism::identity(m.coalgebra().clone(), m.a_dim(), 1);
    let (l, r) = unit_products(m, u)?;
    Ok(l == id && r == id)
}

/// `f^{-1}∗m∗(f⊗f)`.
pub fn transport(m: &ConvMorphism, f: &ConvMorphism, filtration: &Filtration) -> Result<ConvMorphism> {
    let g = takeuchi_invert(f, filtration)?;
    conv_compose(&g, &conv_compose(m, &conv_tensor(f, f)?)?)
}

/// The two-layer filtration `ι(C) ⊆ C̃` of an extension.
pub fn extension_filtration(e: &Extension) -> Result<Filtration> {
    let total = e.total();
    let layers = vec![
        Subspace::column_space(e.iota()),
        Subspace::full(total.field(), total.dim()),
    ];
    Filtration::custom(total, layers)
}

/// An ι-deformation: associative `m̃` on `C̃` with `m̃∘ι = m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deformation {
    extension: Arc<Extension>,
    mtilde: ConvMorphism,
    m_x: Cochain,
}

impl Deformation {
    /// Validates associativity and restricts `m̃` to `X` along `ker λ`.
    pub fn new(extension: Arc<Extension>, mtilde: ConvMorphism) -> Result<Deformation> {
        if **mtilde.coalgebra() != **extension.total() {
            return Err(Error::CoalgebraMismatch("m̃ must live over C̃".into()));
        }
        if !check_associative(&mtilde)? {
            return Err(Error::InvalidDeformation("m̃ is not associative".into()));
        }
        let m_x = restrict_to_x(&extension, &mtilde)?;
        Ok(Deformation { extension, mtilde, m_x })
    }

    /// `m̃ = m∘λ + m̃_X∘p`, validated.
    pub fn from_cochain(extension: Arc<Extension>, m: &ConvMorphism, m_x: &Cochain) -> Result<Deformation> {
        let mtilde = assemble(&extension, m, m_x)?;
        Deformation::new(extension, mtilde)
    }

    pub fn extension(&self) -> &Arc<Extension> {
        &self.extension
    }

    pub fn mtilde(&self) -> &ConvMorphism {
        &self.mtilde
    }

    pub fn m_x(&self) -> &Cochain {
        &self.m_x
    }

    /// `m̃∘ι`.
    pub fn base(&self) -> Result<ConvMorphism> {
        self.mtilde
            .along_linear(self.extension.iota(), self.extension.base().clone())
    }

    pub fn is_deformation_of(&self, m: &ConvMorphism) -> Result<bool> {
        Ok(self.base()? == *m)
    }
}

fn restrict_to_x(e: &Extension, mtilde: &ConvMorphism) -> Result<Cochain> {
    let values = (0..e.comodule().dim())
        .map(|i| mtilde.component(e.x_index(i)).clone())
        .collect();
    Cochain::new(2, mtilde.a_dim(), values)
}

fn assemble(e: &Extension, m: &ConvMorphism, m_x: &Cochain) -> Result<ConvMorphism> {
    let total = e.total().clone();
    let lifted = m.along_linear(e.lambda(), total.clone())?;
    let mut comps = lifted.components().to_vec();
    if m_x.x_dim() != e.comodule().dim() || m_x.degree() != 2 {
        return Err(Error::InvalidCochain("m̃_X must be a 2-cochain on X".into()));
    }
    for (z, comp) in comps.iter_mut().enumerate() {
        for i in 0..m_x.x_dim() {
            let s = e.proj().get(i, z);
            if !s.is_zero() {
                *comp = comp.add(&m_x.value(i).scale(s))?;
            }
        }
    }
    ConvMorphism::new(total, comps)
}

fn check_over(alg: &AlgebraMC, e: &Extension) -> Result<()> {
    if **alg.coalgebra() != **e.base() {
        return Err(Error::SpecMismatch(
            "algebra and extension live over different coalgebras".into(),
        ));
    }
    Ok(())
}

/// The obstruction `ζ ∈ C³_X(A, m)`; checks `d³ζ = 0`.
pub fn obstruction_zeta(alg: &AlgebraMC, e: &Extension) -> Result<Cochain> {
    check_over(alg, e)?;
    let complex = Complex::new(alg.m.clone(), e.comodule().clone())?;
    let zeta = zeta_unchecked(alg, e)?;
    if !complex.differential(3, &zeta)?.is_zero() {
        return Err(Error::ObstructionNotClosed);
    }
    Ok(zeta)
}

fn zeta_unchecked(alg: &AlgebraMC, e: &Extension) -> Result<Cochain> {
    let m = &alg.m;
    let f = m.field();
    let id = MultiMap::identity(f, m.a_dim(), 1);
    let w = e.cocycle();
    let values = (0..e.comodule().dim())
        .map(|i| {
            let mut acc = MultiMap::zero(f, m.a_dim(), 3, 1);
            for (j, k, v) in w.omega_of(i) {
                let (mj, mk) = (m.component(*j), m.component(*k));
                let t = mj.compose(&id.tensor(mk)?)?.sub(&mj.compose(&mk.tensor(&id)?)?)?;
                acc = acc.add(&t.scale(v))?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Cochain::new(3, m.a_dim(), values)
}

#[derive(Clone, Debug)]
pub struct DeformationReport {
    pub algebra: AlgebraMC,
    pub extension: Arc<Extension>,
    pub zeta: Cochain,
    pub obstruction_vanishes: bool,
    /// Canonical `ν₀` with `d²ν₀ = ζ`.
    pub witness: Option<Cochain>,
    pub z2: Vec<Cochain>,
    pub b2: Vec<Cochain>,
    pub h2: Vec<Cochain>,
    /// `m̃_X⁰ = −ν₀` and its deformation.
    pub base: Option<Deformation>,
    pub(crate) cocycles: Subspace,
    pub(crate) coboundaries: Subspace,
}

impl DeformationReport {
    pub fn dim_z2(&self) -> usize {
        self.z2.len()
    }

    pub fn dim_b2(&self) -> usize {
        self.b2.len()
    }

    pub fn dim_h2(&self) -> usize {
        self.h2.len()
    }

    /// Is `m_x` a solution of `d²(m_x) + ζ = 0`?
    pub fn is_solution(&self, m_x: &Cochain) -> Result<bool> {
        let Some(base) = &self.base else { return Ok(false) };
        let diff = m_x.sub(base.m_x())?;
        Ok(self.cocycles.contains(&diff.flatten()))
    }

    /// The deformation for `m̃_X⁰ + Σ c_i z_i` (coordinates on the `Z²` basis).
    pub fn solution(&self, coords: &[Scalar]) -> Result<Deformation> {
        let base = self
            .base
            .as_ref()
            .ok_or_else(|| Error::InvalidDeformation("obstruction does not vanish".into()))?;
        if coords.len() != self.z2.len() {
            return Err(Error::ShapeError(format!("expected {} coordinates", self.z2.len())));
        }
        let mut mx = base.m_x().clone();
        for (c, z) in coords.iter().zip(&self.z2) {
            mx = mx.add(&z.scale(c))?;
        }
        Deformation::from_cochain(self.extension.clone(), self.algebra.m(), &mx)
    }

    /// Coordinates of the class of `m_x − m̃_X⁰` on the `H²` representatives, or
    /// `None` when `m_x` is not a solution.
    pub fn class_of(&self, m_x: &Cochain) -> Result<Option<Vector>> {
        let Some(base) = &self.base else { return Ok(None) };
        let diff = m_x.sub(base.m_x())?.flatten();
        if !self.cocycles.contains(&diff) {
            return Ok(None);
        }
        let f = self.zeta.field();
        let mut cols: Vec<Vector> = self.h2.iter().map(Cochain::flatten).collect();
        cols.extend(self.coboundaries.basis_vectors());
        if cols.is_empty() {
            return Ok(Some(Vec::new()));
        }
        let mat = Matrix::from_row_vectors(f, diff.len(), cols)?.transpose();
        let (x, _) = mat
            .solve_vec(&diff)
            .ok_or_else(|| Error::InvalidDeformation("cocycle outside Z²".into()))?;
        Ok(Some(x[..self.h2.len()].to_vec()))
    }
}

/// Solves the Maurer–Cartan equation `d²(ν) = −ζ`.
pub fn mc_solve(alg: &AlgebraMC, e: &Arc<Extension>) -> Result<DeformationReport> {
    let zeta = obstruction_zeta(alg, e)?;
    let complex = Complex::new(alg.m.clone(), e.comodule().clone())?;
    let f = alg.m.field();
    let (a, dx) = (alg.a_dim(), e.comodule().dim());
    let coh = complex.cohomology(2)?;
    let to_cochains = |s: &Subspace| -> Result<Vec<Cochain>> {
        s.basis_vectors()
            .iter()
            .map(|v| Cochain::from_flat(f, 2, a, dx, v))
            .collect()
    };
    let z2 = to_cochains(&coh.cocycles)?;
    let b2 = to_cochains(&coh.coboundaries)?;
    let solved = coh.d_next.solve_vec(&zeta.flatten());
    let (witness, base) = match solved {
        Some((nu0, _)) => {
            let nu0 = Cochain::from_flat(f, 2, a, dx, &nu0)?;
            let base = Deformation::from_cochain(e.clone(), &alg.m, &nu0.scale(&-f.one()))?;
            (Some(nu0), Some(base))
        }
        None => (None, None),
    };
    Ok(DeformationReport {
        algebra: alg.clone(),
        extension: e.clone(),
        zeta,
        obstruction_vanishes: witness.is_some(),
        witness,
        z2,
        b2,
        h2: coh.representatives,
        base,
        cocycles: coh.cocycles,
        coboundaries: coh.coboundaries,
    })
}

/// One representative per equivalence class, or a parametrization when the
/// classes cannot be listed.
#[derive(Clone, Debug)]
pub enum Classes {
    Enumerated(Vec<Deformation>),
    /// `base + Σ c_i h_i` over all scalars `c_i`.
    Parametrized {
        base: Box<Deformation>,
        directions: Vec<Cochain>,
    },
    Obstructed,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub report: DeformationReport,
    pub classes: Classes,
}

pub fn classify(alg: &AlgebraMC, e: &Arc<Extension>) -> Result<Classification> {
    let report = mc_solve(alg, e)?;
    let Some(base) = report.base.clone() else {
        return Ok(Classification {
            report,
            classes: Classes::Obstructed,
        });
    };
    let f = alg.m.field();
    let count = f
        .order()
        .and_then(|q| (q as usize).checked_pow(report.h2.len() as u32))
        .filter(|&n| n <= MAX_ENUMERATED_CLASSES);
    let classes = match (count, f.elements()) {
        (Some(n), Some(elements)) => {
            let mut reps = Vec::with_capacity(n);
            for idx in 0..n {
                let mut rest = idx;
                let mut mx = base.m_x().clone();
                for h in &report.h2 {
                    let c = &elements[rest % elements.len()];
                    rest /= elements.len();
                    mx = mx.add(&h.scale(c))?;
                }
                reps.push(Deformation::from_cochain(e.clone(), alg.m(), &mx)?);
            }
            Classes::Enumerated(reps)
        }
        _ => Classes::Parametrized {
            base: Box::new(base),
            directions: report.h2.clone(),
        },
    };
    Ok(Classification { report, classes })
}

/// A gauge `f(c, x) = ε(c)·Id + f_X(x)` relating two deformations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gauge {
    pub f_x: Cochain,
    pub f: ConvMorphism,
}

/// Solves `d¹(f_X) = m̃″_X − m̃′_X`; on success checks `m̃″ = f^{-1}∗m̃′∗(f⊗f)`.
pub fn equiv_check(d1: &Deformation, d2: &Deformation) -> Result<Option<Gauge>> {
    let e = &d1.extension;
    if d1.extension != d2.extension {
        return Err(Error::SpecMismatch("deformations over different extensions".into()));
    }
    let m = d1.base()?;
    if m != d2.base()? {
        return Err(Error::SpecMismatch("deformations of different algebras".into()));
    }
    let complex = Complex::new(m, e.comodule().clone())?;
    let d1m = complex.differential_matrix(1)?;
    let rhs = d2.m_x.sub(&d1.m_x)?.flatten();
    let Some((fx, _)) = d1m.solve_vec(&rhs) else {
        return Ok(None);
    };
    let field = complex.field();
    let f_x = Cochain::from_flat(field, 1, complex.a_dim(), e.comodule().dim(), &fx)?;
    let f = gauge_from_cochain(e, &f_x)?;
    if gauge_transport(d1, &f)? != *d2 {
        return Err(Error::InvalidDeformation(
            "gauge does not carry one deformation to the other".into(),
        ));
    }
    Ok(Some(Gauge { f_x, f }))
}

/// `f(c, x) = ε(c)·Id + f_X(x)` on `C̃`.
pub fn gauge_from_cochain(e: &Extension, f_x: &Cochain) -> Result<ConvMorphism> {
    if f_x.degree() != 1 {
        return Err(Error::InvalidCochain("a gauge is a 1-cochain".into()));
    }
    let total = e.total().clone();
    let mut comps = ConvMorphism::identity(total.clone(), f_x.a_dim(), 1)
        .components()
        .to_vec();
    for (z, comp) in comps.iter_mut().enumerate() {
        for i in 0..f_x.x_dim() {
            let s = e.proj().get(i, z);
            if !s.is_zero() {
                *comp = comp.add(&f_x.value(i).scale(s))?;
            }
        }
    }
    ConvMorphism::new(total, comps)
}

/// `m̃_f = f^{-1}∗m̃∗(f⊗f)`.
pub fn gauge_transport(d: &Deformation, f: &ConvMorphism) -> Result<Deformation> {
    let filtration = extension_filtration(&d.extension)?;
    let m = transport(&d.mtilde, f, &filtration)?;
    Deformation::new(d.extension.clone(), m)
}

/// How `series_deform` picks the solution it continues from.
#[derive(Clone, Debug)]
pub enum SeriesStrategy {
    /// The canonical `m̃_X⁰`.
    First,
    /// Branch over `m̃_X⁰` and `m̃_X⁰ + h` for each `H²` representative `h`,
    /// visiting at most `budget` partial deformations.
    All { budget: usize },
    /// A caller-chosen `m̃_X` per degree; degrees without one use `m̃_X⁰`.
    Supplied(BTreeMap<usize, Cochain>),
}

#[derive(Clone, Debug)]
pub struct SeriesStep {
    pub degree: usize,
    pub report: DeformationReport,
    pub chosen: Option<Cochain>,
}

#[derive(Clone, Debug)]
pub struct SeriesBranch {
    pub steps: Vec<SeriesStep>,
    /// The multiplication reached, over `D_{≤n}` for the last unobstructed `n`.
    pub algebra: ConvMorphism,
    pub obstructed_at: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct SeriesReport {
    /// `D` with its basis sorted by degree.
    pub coalgebra: Arc<Coalgebra>,
    /// `coalgebra` basis index `i` is input basis index `order[i]`.
    pub order: Vec<usize>,
    pub branches: Vec<SeriesBranch>,
    pub truncated: bool,
}

/// Extends `(A, m0)` degree by degree along `D⁰ ⊆ D_{≤1} ⊆ … ⊆ D_{≤N}`, starting
/// from `m0` embedded through `ε` on `D⁰`. Each branch stops at the first degree
/// whose obstruction class is nonzero.
pub fn series_deform(
    m0: &MultiMap,
    d: &Coalgebra,
    max_degree: usize,
    strategy: &SeriesStrategy,
) -> Result<SeriesReport> {
    let (sorted, order) = d.sorted_by_degree()?;
    let sorted = Arc::new(sorted);
    if !sorted.is_cocommutative() {
        return Err(Error::NotCocommutative);
    }
    let top = sorted.max_degree().unwrap_or(0).min(max_degree);
    let d0 = Arc::new(sorted.below_degree(1)?);
    let start = AlgebraMC::epsilon_embedded(m0, None, d0)?.m;
    let budget = match strategy {
        SeriesStrategy::All { budget } => *budget,
        _ => usize::MAX,
    };
    let mut queue: VecDeque<(usize, ConvMorphism, Vec<SeriesStep>)> = VecDeque::from([(1, start, Vec::new())]);
    let mut visited = 1usize;
    let mut truncated = false;
    let mut branches = Vec::new();
    while let Some((n, m, steps)) = queue.pop_front() {
        if n > top {
            branches.push(SeriesBranch {
                steps,
                algebra: m,
                obstructed_at: None,
            });
            continue;
        }
        let e = match graded_extension(&sorted, n) {
            Ok(e) => Arc::new(e),
            Err(Error::EmptyLayer(_)) => {
                let next = ConvMorphism::new(Arc::new(sorted.below_degree(n + 1)?), m.components().to_vec())?;
                queue.push_front((n + 1, next, steps));
                continue;
            }
            Err(err) => return Err(err),
        };
        let alg = AlgebraMC::new(ConvMorphism::new(e.base().clone(), m.components().to_vec())?, None)?;
        let report = mc_solve(&alg, &e)?;
        let Some(base) = report.base.clone() else {
            let mut steps = steps;
            steps.push(SeriesStep {
                degree: n,
                report,
                chosen: None,
            });
            branches.push(SeriesBranch {
                steps,
                algebra: alg.m,
                obstructed_at: Some(n),
            });
            continue;
        };
        let choices: Vec<Cochain> = match strategy {
            SeriesStrategy::First => vec![base.m_x().clone()],
            SeriesStrategy::Supplied(map) => match map.get(&n) {
                Some(mx) => {
                    if !report.is_solution(mx)? {
                        return Err(Error::InvalidDeformation(format!(
                            "supplied cochain for degree {n} does not solve the MC equation"
                        )));
                    }
                    vec![mx.clone()]
                }
                None => vec![base.m_x().clone()],
            },
            SeriesStrategy::All { .. } => std::iter::once(Ok(base.m_x().clone()))
                .chain(report.h2.iter().map(|h| base.m_x().add(h)))
                .collect::<Result<_>>()?,
        };
        let mut pushed = 0;
        for (k, mx) in choices.iter().enumerate() {
            if k > 0 && visited >= budget {
                truncated = true;
                break;
            }
            if k > 0 {
                visited += 1;
            }
            let dfm = if k == 0 && matches!(strategy, SeriesStrategy::First | SeriesStrategy::All { .. }) {
                base.clone()
            } else {
                Deformation::from_cochain(e.clone(), alg.m(), mx)?
            };
            let mut steps = steps.clone();
            steps.push(SeriesStep {
                degree: n,
                report: report.clone(),
                chosen: Some(mx.clone()),
            });
            let next = ConvMorphism::new(
                Arc::new(sorted.below_degree(n + 1)?),
                dfm.mtilde().components().to_vec(),
            )?;
            queue.push_back((n + 1, next, steps));
            pushed += 1;
        }
        debug_assert!(pushed > 0);
    }
    Ok(SeriesReport {
        coalgebra: sorted,
        order,
        branches,
        truncated,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitGauge {
    pub f: ConvMorphism,
    pub mtilde_f: ConvMorphism,
    /// `u∘λ` on `C̃`.
    pub unit: ConvMorphism,
    /// `f∗(u∘λ)`, a unit of the input `m̃`.
    pub transported_unit: ConvMorphism,
}

/// Normalizes the unit of an associative `m̃` over a graded coalgebra `D_{≤N}`
/// whose restriction to `D⁰` has unit `u`: builds `f = f_N` with
/// `f_{n+1} = f_n∗(Id + g_{n+1})`, `g_{n+1} = −m̃_{f_n}∗(Id⊗uλ)` on `D^{n+1}`.
pub fn unit_gauge(mtilde: &ConvMorphism, u: &ConvMorphism) -> Result<UnitGauge> {
    let d = mtilde.coalgebra().clone();
    let deg = d.grading().ok_or(Error::NotGraded)?.to_vec();
    let field = d.field();
    let a = mtilde.a_dim();
    let d0_idx = d.degree_indices(0)?;
    let d0 = Arc::new(d.restrict(&d0_idx)?);
    if **u.coalgebra() != *d0 {
        return Err(Error::CoalgebraMismatch("u must live over D⁰".into()));
    }
    if !check_associative(mtilde)? {
        return Err(Error::NotAssociative("m̃ is not associative".into()));
    }
    let iota = Matrix::from_fn(field, d.dim(), d0_idx.len(), |r, c| {
        if d0_idx[c] == r {
            field.one()
        } else {
            field.zero()
        }
    });
    let lambda = iota.transpose();
    let m = mtilde.along_linear(&iota, d0.clone())?;
    if !is_unit(&m, u)? {
        return Err(Error::NotUnital("u is not a unit of m̃ on D⁰".into()));
    }
    let u_lambda = u.along_linear(&lambda, d.clone())?;
    let filtration = Filtration::from_grading(&d)?;
    let id = ConvMorphism::identity(d.clone(), a, 1);
    let top = d.max_degree().unwrap_or(0);
    let mut f = id.clone();
    for n in 0..top {
        let m_fn = transport(mtilde, &f, &filtration)?;
        let (_, right) = unit_products(&m_fn, &u_lambda)?;
        let mut g = ConvMorphism::zero(d.clone(), a, 1, 1);
        for (z, &dz) in deg.iter().enumerate() {
            if dz == n + 1 {
                g = g.with_component(z, right.component(z).scale(&-field.one()))?;
            }
        }
        if g.is_zero() {
            continue;
        }
        f = conv_compose(&f, &id.add(&g)?)?;
    }
    let mtilde_f = transport(mtilde, &f, &filtration)?;
    if !is_unit(&mtilde_f, &u_lambda)? {
        return Err(Error::NotUnital("u∘λ is not a unit of m̃_f".into()));
    }
    let transported_unit = conv_compose(&f, &u_lambda)?;
    if !is_unit(mtilde, &transported_unit)? {
        return Err(Error::NotUnital("f∗(u∘λ) is not a unit of m̃".into()));
    }
    Ok(UnitGauge {
        f,
        mtilde_f,
        unit: u_lambda,
        transported_unit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::tests::{dual_numbers, matrix_algebra};
    use crate::extension::{build_extension, Cocycle2, Comodule};
    use crate::scalar::Field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const Q: Field = Field::Rational;

    /// `γ⊗γ` with `γ(1) = 0`, `γ(x) = 1`: `x·x = t`.
    fn gamma_square(f: Field) -> MultiMap {
        let mut m = Matrix::zeros(f, 2, 4);
        m.set(0, 3, f.one());
        MultiMap::new(2, 2, 1, m).unwrap()
    }

    fn dual_unit(f: Field) -> MultiMap {
        MultiMap::new(2, 0, 1, Matrix::from_i64(f, &[&[1], &[0]])).unwrap()
    }

    /// The `x² = t` multiplication over `𝕜[t]_{≤n}`.
    fn x_squared_is_t(f: Field, n: usize) -> ConvMorphism {
        let d = Arc::new(Coalgebra::divided_power(f, n));
        let mut comps = vec![MultiMap::zero(f, 2, 2, 1); n + 1];
        comps[0] = dual_numbers(f);
        if n >= 1 {
            comps[1] = gamma_square(f);
        }
        ConvMorphism::new(d, comps).unwrap()
    }

    #[test]
    fn associativity_examples() {
        let k = Arc::new(Coalgebra::trivial(Q));
        assert!(check_associative(&ConvMorphism::epsilon_embed(&matrix_algebra(Q), k)).unwrap());
        let m = x_squared_is_t(Q, 1);
        assert!(check_associative(&m).unwrap());
        let mut bad = gamma_square(Q).into_matrix();
        bad.set(1, 1, Q.one());
        let broken = m.with_component(1, MultiMap::new(2, 2, 1, bad).unwrap()).unwrap();
        assert!(!check_associative(&broken).unwrap());
    }

    #[test]
    fn trivial_extension_has_zero_obstruction() {
        let d = Coalgebra::divided_power(Q, 1);
        let e = Arc::new(graded_extension(&d, 1).unwrap());
        let alg = AlgebraMC::epsilon_embedded(&dual_numbers(Q), None, e.base().clone()).unwrap();
        assert!(obstruction_zeta(&alg, &e).unwrap().is_zero());
        let report = mc_solve(&alg, &e).unwrap();
        assert!(report.obstruction_vanishes);
        let m_lambda = alg.m().along_linear(e.lambda(), e.total().clone()).unwrap();
        let dfm = Deformation::new(e.clone(), m_lambda).unwrap();
        assert!(report.is_solution(dfm.m_x()).unwrap());
        assert!(dfm.is_deformation_of(alg.m()).unwrap());
    }

    #[test]
    fn degree_two_obstruction_is_associator() {
        let d = Coalgebra::divided_power(Q, 2);
        let e = Arc::new(graded_extension(&d, 2).unwrap());
        let m = x_squared_is_t(Q, 1);
        let alg = AlgebraMC::new(
            ConvMorphism::new(e.base().clone(), m.components().to_vec()).unwrap(),
            None,
        )
        .unwrap();
        let zeta = obstruction_zeta(&alg, &e).unwrap();
        let m1 = gamma_square(Q);
        let id = MultiMap::identity(Q, 2, 1);
        let assoc = m1
            .compose(&id.tensor(&m1).unwrap())
            .unwrap()
            .sub(&m1.compose(&m1.tensor(&id).unwrap()).unwrap())
            .unwrap();
        assert_eq!(zeta.value(0), &assoc);
        let report = mc_solve(&alg, &e).unwrap();
        assert!(report.obstruction_vanishes);
        // m₂ = 0 is a solution.
        let zero = Cochain::zero(Q, 2, 2, 1);
        assert!(report.is_solution(&zero).unwrap());
    }

    #[test]
    fn every_solution_is_associative() {
        let d = Coalgebra::divided_power(Q, 1);
        let e = Arc::new(graded_extension(&d, 1).unwrap());
        let alg = AlgebraMC::epsilon_embedded(&dual_numbers(Q), None, e.base().clone()).unwrap();
        let report = mc_solve(&alg, &e).unwrap();
        for (i, _) in report.z2.iter().enumerate() {
            let mut coords = vec![Q.zero(); report.z2.len()];
            coords[i] = Q.from_i64(3);
            let dfm = report.solution(&coords).unwrap();
            assert!(check_associative(dfm.mtilde()).unwrap());
        }
        assert_eq!(report.dim_h2(), 1);
    }

    #[test]
    fn gauge_transport_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = Coalgebra::divided_power(Q, 1);
        let e = Arc::new(graded_extension(&d, 1).unwrap());
        let alg = AlgebraMC::epsilon_embedded(&dual_numbers(Q), None, e.base().clone()).unwrap();
        let report = mc_solve(&alg, &e).unwrap();
        let d1 = report.solution(&vec![Q.one(); report.z2.len()]).unwrap();
        let flat: Vec<Scalar> = (0..4).map(|_| Q.from_i64(rng.gen_range(-2..3))).collect();
        let f_x = Cochain::from_flat(Q, 1, 2, 1, &flat).unwrap();
        let f = gauge_from_cochain(&e, &f_x).unwrap();
        let d2 = gauge_transport(&d1, &f).unwrap();
        assert!(d2.is_deformation_of(alg.m()).unwrap());
        let gauge = equiv_check(&d1, &d2).unwrap().unwrap();
        assert_eq!(gauge_transport(&d1, &gauge.f).unwrap(), d2);
        let finv = takeuchi_invert(&f, &extension_filtration(&e).unwrap()).unwrap();
        assert_eq!(gauge_transport(&d2, &finv).unwrap(), d1);
        assert_eq!(equiv_check(&d1, &d1).unwrap().unwrap().f_x, Cochain::zero(Q, 1, 2, 1));
        // The classical gauge action m₁ ↦ m₁ + ∂¹f₁.
        let complex = Complex::new(alg.m().clone(), e.comodule().clone()).unwrap();
        assert_eq!(
            d2.m_x(),
            &d1.m_x().add(&complex.differential(1, &f_x).unwrap()).unwrap()
        );
    }

    #[test]
    fn inequivalent_classes() {
        let d = Coalgebra::divided_power(Q, 1);
        let e = Arc::new(graded_extension(&d, 1).unwrap());
        let alg = AlgebraMC::epsilon_embedded(&dual_numbers(Q), None, e.base().clone()).unwrap();
        let report = mc_solve(&alg, &e).unwrap();
        let base = report.base.clone().unwrap();
        let other = Deformation::from_cochain(e.clone(), alg.m(), &base.m_x().add(&report.h2[0]).unwrap()).unwrap();
        assert!(equiv_check(&base, &other).unwrap().is_none());
        assert_ne!(
            report.class_of(base.m_x()).unwrap(),
            report.class_of(other.m_x()).unwrap()
        );
    }

    #[test]
    fn classify_over_f2() {
        let f2 = Field::prime(2).unwrap();
        let d = Coalgebra::divided_power(f2, 1);
        let e = Arc::new(graded_extension(&d, 1).unwrap());
        let alg = AlgebraMC::epsilon_embedded(&dual_numbers(f2), None, e.base().clone()).unwrap();
        let c = classify(&alg, &e).unwrap();
        match c.classes {
            Classes::Enumerated(reps) => assert_eq!(reps.len(), 1 << c.report.dim_h2()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mismatched_extensions() {
        let e1 = Arc::new(graded_extension(&Coalgebra::divided_power(Q, 1), 1).unwrap());
        let e2 = Arc::new(graded_extension(&Coalgebra::divided_power(Q, 2), 2).unwrap());
        let a1 = AlgebraMC::epsilon_embedded(&dual_numbers(Q), None, e1.base().clone()).unwrap();
        let a2 = AlgebraMC::epsilon_embedded(&dual_numbers(Q), None, e2.base().clone()).unwrap();
        let d1 = mc_solve(&a1, &e1).unwrap().base.unwrap();
        let d2 = mc_solve(&a2, &e2).unwrap().base.unwrap();
        assert!(matches!(equiv_check(&d1, &d2), Err(Error::SpecMismatch(_))));
        assert!(matches!(mc_solve(&a1, &e2), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn series_first_strategy_on_dual_numbers() {
        let d = Coalgebra::divided_power(Q, 2);
        let s = series_deform(&dual_numbers(Q), &d, 2, &SeriesStrategy::First).unwrap();
        assert_eq!(s.branches.len(), 1);
        let b = &s.branches[0];
        assert_eq!(b.steps.len(), 2);
        assert!(b.obstructed_at.is_none());
        assert!(check_associative(&b.algebra).unwrap());
    }

    #[test]
    fn series_supplied_reproduces_x_squared() {
        let d = Coalgebra::divided_power(Q, 2);
        let mut supplied = BTreeMap::new();
        supplied.insert(1, Cochain::new(2, 2, vec![gamma_square(Q)]).unwrap());
        supplied.insert(2, Cochain::zero(Q, 2, 2, 1));
        let s = series_deform(&dual_numbers(Q), &d, 2, &SeriesStrategy::Supplied(supplied)).unwrap();
        let b = &s.branches[0];
        assert_eq!(b.algebra.components(), x_squared_is_t(Q, 2).components());
    }

    #[test]
    fn series_all_strategy_respects_budget() {
        let d = Coalgebra::divided_power(Q, 2);
        let s = series_deform(&dual_numbers(Q), &d, 2, &SeriesStrategy::All { budget: 2 }).unwrap();
        assert!(s.truncated);
        assert_eq!(s.branches.len(), 2);
    }

    #[test]
    fn matrix_algebra_series_is_rigid() {
        let d = Coalgebra::divided_power(Q, 2);
        let s = series_deform(&matrix_algebra(Q), &d, 2, &SeriesStrategy::First).unwrap();
        for step in &s.branches[0].steps {
            assert_eq!(step.report.dim_h2(), 0);
        }
    }

    #[test]
    fn unit_gauge_on_unital_and_perturbed() {
        let m = x_squared_is_t(Q, 3);
        let d = m.coalgebra().clone();
        let d0 = Arc::new(d.restrict(&[0]).unwrap());
        let u = ConvMorphism::epsilon_embed(&dual_unit(Q), d0);
        let g = unit_gauge(&m, &u).unwrap();
        assert_eq!(g.f, ConvMorphism::identity(d.clone(), 2, 1));

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut comps = vec![MultiMap::identity(Q, 2, 1)];
        for _ in 1..4 {
            let mat = Matrix::from_fn(Q, 2, 2, |_, _| Q.from_i64(rng.gen_range(-2..3)));
            comps.push(MultiMap::new(2, 1, 1, mat).unwrap());
        }
        let h = ConvMorphism::new(d.clone(), comps).unwrap();
        let perturbed = transport(&m, &h, &Filtration::from_grading(&d).unwrap()).unwrap();
        let g = unit_gauge(&perturbed, &u).unwrap();
        assert!(is_unit(&g.mtilde_f, &g.unit).unwrap());
        assert!(is_unit(&perturbed, &g.transported_unit).unwrap());
    }

    #[test]
    fn non_unit_rejected() {
        let m = x_squared_is_t(Q, 1);
        let d0 = Arc::new(m.coalgebra().restrict(&[0]).unwrap());
        let u = ConvMorphism::epsilon_embed(&MultiMap::new(2, 0, 1, Matrix::from_i64(Q, &[&[0], &[1]])).unwrap(), d0);
        assert!(matches!(unit_gauge(&m, &u), Err(Error::NotUnital(_))));
    }

    #[test]
    fn build_from_explicit_cocycle() {
        let k = Arc::new(Coalgebra::trivial(Q));
        let x = Comodule::along_grouplike(k, vec!["t".into()], &[Q.one()]).unwrap();
        let e = Arc::new(build_extension(&Cocycle2::zero(x)).unwrap());
        let alg = AlgebraMC::epsilon_embedded(&matrix_algebra(Q), None, e.base().clone()).unwrap();
        let c = classify(&alg, &e).unwrap();
        assert_eq!(c.report.dim_h2(), 0);
        assert!(matches!(c.classes, Classes::Parametrized { .. }));
    }
}
