//! The JSON spec format read by the command-line tool, its serializer, and the
//! machine-readable report builders.
//!
//! Scalars are integers or `"p/q"` strings. Matrices are arrays of rows. Every
//! reference to a basis element or block is by name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::coalgebra::Coalgebra;
use crate::cohomology::{Cochain, CohomologyResult};
use crate::convolution::{ConvMorphism, Filtration, MultiMap};
use crate::deformation::DeformationReport;
use crate::error::Error;
use crate::extension::{Cocycle2, Comodule};
use crate::matrix::Matrix;
use crate::scalar::{Field, Scalar};
use crate::subspace::Subspace;

pub const SCHEMA_VERSION: &str = "convdeform-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecErrorKind {
    Io,
    Syntax,
    Reference,
    Dimension,
    Axiom,
}

impl fmt::Display for SpecErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpecErrorKind::Io => "I/O",
            SpecErrorKind::Syntax => "syntax",
            SpecErrorKind::Reference => "reference",
            SpecErrorKind::Dimension => "dimension",
            SpecErrorKind::Axiom => "axiom",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecError {
    pub kind: SpecErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} error at {}:{}: {}",
            self.kind, self.line, self.column, self.message
        )
    }
}

impl std::error::Error for SpecError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Seg {
    Key(String),
    Index(usize),
}

impl From<&str> for Seg {
    fn from(s: &str) -> Seg {
        Seg::Key(s.to_string())
    }
}

impl From<usize> for Seg {
    fn from(i: usize) -> Seg {
        Seg::Index(i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComoduleEntry {
    pub base: String,
    pub comodule: Comodule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleEntry {
    pub comodule: String,
    pub cocycle: Cocycle2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraEntry {
    pub coalgebra: String,
    pub m: ConvMorphism,
    /// Unit components; basis elements not listed map to zero.
    pub unit: Option<ConvMorphism>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismEntry {
    pub coalgebra: String,
    pub f: ConvMorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionRef {
    Cocycle(String),
    Graded { coalgebra: String, degree: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Task {
    pub command: String,
    pub algebra: Option<String>,
    pub comodule: Option<String>,
    pub extension: Option<ExtensionRef>,
    pub coalgebra: Option<String>,
    pub morphism: Option<String>,
    pub degree: Option<usize>,
    pub max_degree: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecFile {
    pub field: Field,
    pub coalgebras: BTreeMap<String, Arc<Coalgebra>>,
    pub comodules: BTreeMap<String, ComoduleEntry>,
    pub cocycles: BTreeMap<String, CocycleEntry>,
    pub algebras: BTreeMap<String, AlgebraEntry>,
    pub morphisms: BTreeMap<String, MorphismEntry>,
    pub task: Option<Task>,
}

impl SpecFile {
    pub fn new(field: Field) -> SpecFile {
        SpecFile {
            field,
            coalgebras: BTreeMap::new(),
            comodules: BTreeMap::new(),
            cocycles: BTreeMap::new(),
            algebras: BTreeMap::new(),
            morphisms: BTreeMap::new(),
            task: None,
        }
    }
}

/// Line and column (both 1-based) of the value at `path` in a JSON text.
/// Stops at the deepest segment that exists.
pub fn locate(text: &str, path: &[Seg]) -> (usize, usize) {
    let b = text.as_bytes();
    let mut pos = skip_ws(b, 0);
    'outer: for seg in path {
        match (b.get(pos), seg) {
            (Some(b'{'), Seg::Key(want)) => {
                let mut p = skip_ws(b, pos + 1);
                while b.get(p) == Some(&b'"') {
                    let end = skip_string(b, p);
                    let key: String = serde_json::from_str(&text[p..end]).unwrap_or_default();
                    p = skip_ws(b, end);
                    p = skip_ws(b, p + 1); // ':'
                    if &key == want {
                        pos = p;
                        continue 'outer;
                    }
                    p = skip_ws(b, skip_value(b, p));
                    if b.get(p) == Some(&b',') {
                        p = skip_ws(b, p + 1);
                    }
                }
                break;
            }
            (Some(b'['), Seg::Index(want)) => {
                let mut p = skip_ws(b, pos + 1);
                let mut i = 0;
                while p < b.len() && b[p] != b']' {
                    if i == *want {
                        pos = p;
                        continue 'outer;
                    }
                    p = skip_ws(b, skip_value(b, p));
                    if b.get(p) == Some(&b',') {
                        p = skip_ws(b, p + 1);
                    }
                    i += 1;
                }
                break;
            }
            _ => break,
        }
    }
    line_col(text, pos)
}

fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let pos = pos.min(text.len());
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn skip_ws(b: &[u8], mut p: usize) -> usize {
    while p < b.len() && b[p].is_ascii_whitespace() {
        p += 1;
    }
    p
}

fn skip_string(b: &[u8], mut p: usize) -> usize {
    p += 1;
    while p < b.len() {
        match b[p] {
            b'\\' => p += 2,
            b'"' => return p + 1,
            _ => p += 1,
        }
    }
    p
}

fn skip_value(b: &[u8], p: usize) -> usize {
    match b.get(p) {
        Some(b'"') => skip_string(b, p),
        Some(b'{') | Some(b'[') => {
            let mut depth = 0usize;
            let mut q = p;
            while q < b.len() {
                match b[q] {
                    b'"' => {
                        q = skip_string(b, q);
                        continue;
                    }
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return q + 1;
                        }
                    }
                    _ => {}
                }
                q += 1;
            }
            q
        }
        _ => {
            let mut q = p;
            while q < b.len() && !matches!(b[q], b',' | b'}' | b']') && !b[q].is_ascii_whitespace() {
                q += 1;
            }
            q
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    field: Field,
}

type PResult<T> = std::result::Result<T, SpecError>;

fn path_of(base: &[Seg], more: impl IntoIterator<Item = Seg>) -> Vec<Seg> {
    base.iter().cloned().chain(more).collect()
}

impl<'a> Parser<'a> {
    fn err(&self, kind: SpecErrorKind, path: &[Seg], message: impl Into<String>) -> SpecError {
        let (line, column) = locate(self.text, path);
        SpecError {
            kind,
            line,
            column,
            message: message.into(),
        }
    }

    fn lib_err(&self, path: &[Seg], e: Error) -> SpecError {
        let kind = match e {
            Error::ShapeError(_) | Error::DegreeMismatch { .. } => SpecErrorKind::Dimension,
            Error::BadScalar(_) | Error::NotPrime(_) => SpecErrorKind::Syntax,
            Error::FieldMismatch(..) | Error::CoalgebraMismatch(_) => SpecErrorKind::Reference,
            _ => SpecErrorKind::Axiom,
        };
        self.err(kind, path, e.to_string())
    }

    fn obj<'v>(&self, v: &'v Value, path: &[Seg]) -> PResult<&'v Map<String, Value>> {
        v.as_object()
            .ok_or_else(|| self.err(SpecErrorKind::Syntax, path, "expected an object"))
    }

    fn arr<'v>(&self, v: &'v Value, path: &[Seg]) -> PResult<&'v Vec<Value>> {
        v.as_array()
            .ok_or_else(|| self.err(SpecErrorKind::Syntax, path, "expected an array"))
    }

    fn string<'v>(&self, v: &'v Value, path: &[Seg]) -> PResult<&'v str> {
        v.as_str()
            .ok_or_else(|| self.err(SpecErrorKind::Syntax, path, "expected a string"))
    }

    fn uint(&self, v: &Value, path: &[Seg]) -> PResult<usize> {
        v.as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| self.err(SpecErrorKind::Syntax, path, "expected a nonnegative integer"))
    }

    fn field_of<'v>(&self, o: &'v Map<String, Value>, key: &str, path: &[Seg]) -> PResult<&'v Value> {
        o.get(key)
            .ok_or_else(|| self.err(SpecErrorKind::Syntax, path, format!("missing field {key:?}")))
    }

    fn scalar(&self, v: &Value, path: &[Seg]) -> PResult<Scalar> {
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
            _ => return Err(self.err(SpecErrorKind::Syntax, path, "expected an integer or \"p/q\" string")),
        };
        self.field.parse(&text).map_err(|e| self.lib_err(path, e))
    }

    fn names(&self, v: &Value, path: &[Seg]) -> PResult<Vec<String>> {
        let a = self.arr(v, path)?;
        let mut out: Vec<String> = Vec::with_capacity(a.len());
        for (i, n) in a.iter().enumerate() {
            let p = path_of(path, [Seg::Index(i)]);
            let s = self.string(n, &p)?.to_string();
            if out.contains(&s) {
                return Err(self.err(SpecErrorKind::Reference, &p, format!("duplicate basis name {s:?}")));
            }
            out.push(s);
        }
        Ok(out)
    }

    fn lookup(&self, names: &[String], v: &Value, path: &[Seg]) -> PResult<usize> {
        let s = self.string(v, path)?;
        names
            .iter()
            .position(|n| n == s)
            .ok_or_else(|| self.err(SpecErrorKind::Reference, path, format!("unknown basis name {s:?}")))
    }

    fn matrix(&self, v: &Value, rows: usize, cols: usize, path: &[Seg]) -> PResult<Matrix> {
        let a = self.arr(v, path)?;
        if a.len() != rows {
            return Err(self.err(
                SpecErrorKind::Dimension,
                path,
                format!("expected {rows} rows, found {}", a.len()),
            ));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (r, row) in a.iter().enumerate() {
            let p = path_of(path, [Seg::Index(r)]);
            let row = self.arr(row, &p)?;
            if row.len() != cols {
                return Err(self.err(
                    SpecErrorKind::Dimension,
                    &p,
                    format!("expected {cols} columns, found {}", row.len()),
                ));
            }
            for (c, s) in row.iter().enumerate() {
                data.push(self.scalar(s, &path_of(&p, [Seg::Index(c)]))?);
            }
        }
        Matrix::from_entries(self.field, rows, cols, data).map_err(|e| self.lib_err(path, e))
    }

    fn coalgebra(&self, v: &Value, path: &[Seg]) -> PResult<Coalgebra> {
        let o = self.obj(v, path)?;
        if let Some(b) = o.get("builtin") {
            let bp = path_of(path, [Seg::from("builtin")]);
            let n = |key: &str| -> PResult<usize> {
                let p = path_of(path, [Seg::from(key)]);
                self.uint(self.field_of(o, key, path)?, &p)
            };
            return match self.string(b, &bp)? {
                "trivial" => Ok(Coalgebra::trivial(self.field)),
                "divided_power" => Ok(Coalgebra::divided_power(self.field, n("n")?)),
                "polynomial" => Ok(Coalgebra::polynomial(self.field, n("vars")?, n("n")?)),
                "group_like" => {
                    let k = n("n")?;
                    if k == 0 {
                        return Err(self.err(SpecErrorKind::Dimension, path, "group-like coalgebra needs n ≥ 1"));
                    }
                    Ok(Coalgebra::group_like(self.field, k))
                }
                other => Err(self.err(SpecErrorKind::Reference, &bp, format!("unknown builtin {other:?}"))),
            };
        }
        let names = self.names(self.field_of(o, "basis", path)?, &path_of(path, [Seg::from("basis")]))?;
        let dp = path_of(path, [Seg::from("delta")]);
        let mut triples = Vec::new();
        for (t, entry) in self.arr(self.field_of(o, "delta", path)?, &dp)?.iter().enumerate() {
            let p = path_of(&dp, [Seg::Index(t)]);
            let e = self.arr(entry, &p)?;
            if e.len() != 4 {
                return Err(self.err(
                    SpecErrorKind::Dimension,
                    &p,
                    "Δ entries are [element, left, right, value]",
                ));
            }
            let i = self.lookup(&names, &e[0], &path_of(&p, [Seg::Index(0)]))?;
            let j = self.lookup(&names, &e[1], &path_of(&p, [Seg::Index(1)]))?;
            let k = self.lookup(&names, &e[2], &path_of(&p, [Seg::Index(2)]))?;
            triples.push((i, j, k, self.scalar(&e[3], &path_of(&p, [Seg::Index(3)]))?));
        }
        let cp = path_of(path, [Seg::from("counit")]);
        let counit_v = self.arr(self.field_of(o, "counit", path)?, &cp)?;
        if counit_v.len() != names.len() {
            return Err(self.err(
                SpecErrorKind::Dimension,
                &cp,
                format!("counit needs {} entries", names.len()),
            ));
        }
        let counit = counit_v
            .iter()
            .enumerate()
            .map(|(i, s)| self.scalar(s, &path_of(&cp, [Seg::Index(i)])))
            .collect::<PResult<Vec<_>>>()?;
        let dim = names.len();
        let mut c = Coalgebra::new(self.field, names, triples, counit).map_err(|e| self.lib_err(path, e))?;
        if let Some(d) = o.get("degrees") {
            let gp = path_of(path, [Seg::from("degrees")]);
            let degs = self.arr(d, &gp)?;
            if degs.len() != dim {
                return Err(self.err(SpecErrorKind::Dimension, &gp, format!("degrees needs {dim} entries")));
            }
            let degs = degs
                .iter()
                .enumerate()
                .map(|(i, v)| self.uint(v, &path_of(&gp, [Seg::Index(i)])))
                .collect::<PResult<Vec<_>>>()?;
            c = c.with_grading(degs).map_err(|e| self.lib_err(&gp, e))?;
        }
        let report = c.validate();
        let failures: Vec<&str> = [
            (report.coassociative, "coassociativity"),
            (report.counit_left, "left counit law"),
            (report.counit_right, "right counit law"),
            (report.grading.unwrap_or(true), "grading"),
        ]
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, n)| *n)
        .collect();
        if !failures.is_empty() {
            return Err(self.err(
                SpecErrorKind::Axiom,
                path,
                format!("coalgebra fails {}", failures.join(", ")),
            ));
        }
        Ok(c)
    }

    fn reference<'m, T>(
        &self,
        map: &'m BTreeMap<String, T>,
        v: &Value,
        path: &[Seg],
        what: &str,
    ) -> PResult<(String, &'m T)> {
        let s = self.string(v, path)?;
        map.get(s)
            .map(|t| (s.to_string(), t))
            .ok_or_else(|| self.err(SpecErrorKind::Reference, path, format!("unknown {what} {s:?}")))
    }

    fn comodule(&self, spec: &SpecFile, v: &Value, path: &[Seg]) -> PResult<ComoduleEntry> {
        let o = self.obj(v, path)?;
        let bp = path_of(path, [Seg::from("base")]);
        let (base_name, base) = self.reference(&spec.coalgebras, self.field_of(o, "base", path)?, &bp, "coalgebra")?;
        let names = self.names(self.field_of(o, "basis", path)?, &path_of(path, [Seg::from("basis")]))?;
        let cp = path_of(path, [Seg::from("coaction")]);
        let mut entries = Vec::new();
        for (t, entry) in self.arr(self.field_of(o, "coaction", path)?, &cp)?.iter().enumerate() {
            let p = path_of(&cp, [Seg::Index(t)]);
            let e = self.arr(entry, &p)?;
            if e.len() != 4 {
                return Err(self.err(SpecErrorKind::Dimension, &p, "coaction entries are [x, x', c, value]"));
            }
            let i = self.lookup(&names, &e[0], &path_of(&p, [Seg::Index(0)]))?;
            let j = self.lookup(&names, &e[1], &path_of(&p, [Seg::Index(1)]))?;
            let c = self.lookup(base.names(), &e[2], &path_of(&p, [Seg::Index(2)]))?;
            entries.push((i, j, c, self.scalar(&e[3], &path_of(&p, [Seg::Index(3)]))?));
        }
        let comodule = Comodule::new(base.clone(), names, entries).map_err(|e| self.lib_err(path, e))?;
        Ok(ComoduleEntry {
            base: base_name,
            comodule,
        })
    }

    fn cocycle(&self, spec: &SpecFile, v: &Value, path: &[Seg]) -> PResult<CocycleEntry> {
        let o = self.obj(v, path)?;
        let mp = path_of(path, [Seg::from("comodule")]);
        let (name, x) = self.reference(&spec.comodules, self.field_of(o, "comodule", path)?, &mp, "comodule")?;
        let x = &x.comodule;
        let wp = path_of(path, [Seg::from("omega")]);
        let mut entries = Vec::new();
        for (t, entry) in self.arr(self.field_of(o, "omega", path)?, &wp)?.iter().enumerate() {
            let p = path_of(&wp, [Seg::Index(t)]);
            let e = self.arr(entry, &p)?;
            if e.len() != 4 {
                return Err(self.err(SpecErrorKind::Dimension, &p, "ω entries are [x, c, c', value]"));
            }
            let i = self.lookup(x.names(), &e[0], &path_of(&p, [Seg::Index(0)]))?;
            let j = self.lookup(x.base().names(), &e[1], &path_of(&p, [Seg::Index(1)]))?;
            let k = self.lookup(x.base().names(), &e[2], &path_of(&p, [Seg::Index(2)]))?;
            entries.push((i, j, k, self.scalar(&e[3], &path_of(&p, [Seg::Index(3)]))?));
        }
        let cocycle = Cocycle2::new(x.clone(), entries).map_err(|e| self.lib_err(path, e))?;
        Ok(CocycleEntry {
            comodule: name,
            cocycle,
        })
    }

    /// `{basis name: matrix}` into a convolution morphism; unnamed components are zero.
    fn components(
        &self,
        c: &Arc<Coalgebra>,
        v: &Value,
        a: usize,
        p: usize,
        q: usize,
        path: &[Seg],
    ) -> PResult<ConvMorphism> {
        let o = self.obj(v, path)?;
        let mut comps = vec![MultiMap::zero(self.field, a, p, q); c.dim()];
        for (name, mv) in o {
            let np = path_of(path, [Seg::Key(name.clone())]);
            let idx = c
                .index_of(name)
                .ok_or_else(|| self.err(SpecErrorKind::Reference, &np, format!("unknown basis name {name:?}")))?;
            let m = self.matrix(mv, a.pow(q as u32), a.pow(p as u32), &np)?;
            comps[idx] = MultiMap::new(a, p, q, m).map_err(|e| self.lib_err(&np, e))?;
        }
        ConvMorphism::new(c.clone(), comps).map_err(|e| self.lib_err(path, e))
    }

    fn algebra(&self, spec: &SpecFile, v: &Value, path: &[Seg]) -> PResult<AlgebraEntry> {
        let o = self.obj(v, path)?;
        let cp = path_of(path, [Seg::from("coalgebra")]);
        let (cname, c) = self.reference(&spec.coalgebras, self.field_of(o, "coalgebra", path)?, &cp, "coalgebra")?;
        let a = self.uint(self.field_of(o, "dim", path)?, &path_of(path, [Seg::from("dim")]))?;
        if a == 0 {
            return Err(self.err(SpecErrorKind::Dimension, path, "algebra dimension must be positive"));
        }
        let mp = path_of(path, [Seg::from("m")]);
        let m = self.components(c, self.field_of(o, "m", path)?, a, 2, 1, &mp)?;
        if !crate::convolution::is_associative(&m).map_err(|e| self.lib_err(&mp, e))? {
            return Err(self.err(SpecErrorKind::Axiom, &mp, "multiplication is not associative"));
        }
        let unit = match o.get("unit") {
            Some(u) => Some(self.components(c, u, a, 0, 1, &path_of(path, [Seg::from("unit")]))?),
            None => None,
        };
        Ok(AlgebraEntry {
            coalgebra: cname,
            m,
            unit,
        })
    }

    fn morphism(&self, spec: &SpecFile, v: &Value, path: &[Seg]) -> PResult<MorphismEntry> {
        let o = self.obj(v, path)?;
        let cp = path_of(path, [Seg::from("coalgebra")]);
        let (cname, c) = self.reference(&spec.coalgebras, self.field_of(o, "coalgebra", path)?, &cp, "coalgebra")?;
        let a = self.uint(self.field_of(o, "dim", path)?, &path_of(path, [Seg::from("dim")]))?;
        if a == 0 {
            return Err(self.err(SpecErrorKind::Dimension, path, "dimension must be positive"));
        }
        let (p, q) = match o.get("arity") {
            Some(ar) => {
                let ap = path_of(path, [Seg::from("arity")]);
                let ar = self.arr(ar, &ap)?;
                if ar.len() != 2 {
                    return Err(self.err(SpecErrorKind::Dimension, &ap, "arity is [source, target]"));
                }
                (self.uint(&ar[0], &ap)?, self.uint(&ar[1], &ap)?)
            }
            None => (1, 1),
        };
        let f = self.components(
            c,
            self.field_of(o, "components", path)?,
            a,
            p,
            q,
            &path_of(path, [Seg::from("components")]),
        )?;
        Ok(MorphismEntry { coalgebra: cname, f })
    }

    fn task(&self, spec: &SpecFile, v: &Value, path: &[Seg]) -> PResult<Task> {
        let o = self.obj(v, path)?;
        let command = self
            .string(
                self.field_of(o, "command", path)?,
                &path_of(path, [Seg::from("command")]),
            )?
            .to_string();
        let name_of = |key: &str, check: &dyn Fn(&str) -> bool, what: &str| -> PResult<Option<String>> {
            match o.get(key) {
                None => Ok(None),
                Some(v) => {
                    let p = path_of(path, [Seg::from(key)]);
                    let s = self.string(v, &p)?;
                    if !check(s) {
                        return Err(self.err(SpecErrorKind::Reference, &p, format!("unknown {what} {s:?}")));
                    }
                    Ok(Some(s.to_string()))
                }
            }
        };
        let algebra = name_of("algebra", &|s| spec.algebras.contains_key(s), "algebra")?;
        let comodule = name_of("comodule", &|s| spec.comodules.contains_key(s), "comodule")?;
        let coalgebra = name_of("coalgebra", &|s| spec.coalgebras.contains_key(s), "coalgebra")?;
        let morphism = name_of("morphism", &|s| spec.morphisms.contains_key(s), "morphism")?;
        let opt_uint = |key: &str| -> PResult<Option<usize>> {
            o.get(key)
                .map(|v| self.uint(v, &path_of(path, [Seg::from(key)])))
                .transpose()
        };
        let extension = match o.get("extension") {
            None => None,
            Some(e) => {
                let ep = path_of(path, [Seg::from("extension")]);
                let eo = self.obj(e, &ep)?;
                if let Some(w) = eo.get("cocycle") {
                    let wp = path_of(&ep, [Seg::from("cocycle")]);
                    Some(ExtensionRef::Cocycle(
                        self.reference(&spec.cocycles, w, &wp, "cocycle")?.0,
                    ))
                } else if let Some(g) = eo.get("graded") {
                    let gp = path_of(&ep, [Seg::from("graded")]);
                    let (name, _) = self.reference(&spec.coalgebras, g, &gp, "coalgebra")?;
                    let degree = self.uint(self.field_of(eo, "degree", &ep)?, &path_of(&ep, [Seg::from("degree")]))?;
                    Some(ExtensionRef::Graded {
                        coalgebra: name,
                        degree,
                    })
                } else {
                    return Err(self.err(SpecErrorKind::Syntax, &ep, "extension needs \"cocycle\" or \"graded\""));
                }
            }
        };
        Ok(Task {
            command,
            algebra,
            comodule,
            extension,
            coalgebra,
            morphism,
            degree: opt_uint("degree")?,
            max_degree: opt_uint("max_degree")?,
        })
    }
}

fn syntax_error(e: serde_json::Error) -> SpecError {
    SpecError {
        kind: SpecErrorKind::Syntax,
        line: e.line().max(1),
        column: e.column().max(1),
        message: e.to_string(),
    }
}

/// Parses and validates a spec. Blocks may only refer to blocks of earlier kinds
/// (coalgebras, then comodules, cocycles, algebras, morphisms, task).
pub fn parse_spec(text: &str) -> Result<SpecFile, SpecError> {
    let root: Value = serde_json::from_str(text).map_err(syntax_error)?;
    let mut p = Parser {
        text,
        field: Field::Rational,
    };
    let o = p.obj(&root, &[])?;
    let fv = p.field_of(o, "field", &[])?;
    let fs = p.string(fv, &[Seg::from("field")])?;
    p.field = fs.parse().map_err(|e| p.lib_err(&[Seg::from("field")], e))?;
    let mut spec = SpecFile::new(p.field);
    for key in o.keys() {
        if ![
            "field",
            "coalgebras",
            "comodules",
            "cocycles",
            "algebras",
            "morphisms",
            "task",
        ]
        .contains(&key.as_str())
        {
            return Err(p.err(
                SpecErrorKind::Syntax,
                &[Seg::Key(key.clone())],
                format!("unknown block {key:?}"),
            ));
        }
    }
    let block = |key: &str| -> PResult<Vec<(String, &Value)>> {
        match o.get(key) {
            None => Ok(Vec::new()),
            Some(v) => Ok(p
                .obj(v, &[Seg::from(key)])?
                .iter()
                .map(|(k, v)| (k.clone(), v))
                .collect()),
        }
    };
    for (name, v) in block("coalgebras")? {
        let c = p.coalgebra(v, &[Seg::from("coalgebras"), Seg::Key(name.clone())])?;
        spec.coalgebras.insert(name, Arc::new(c));
    }
    for (name, v) in block("comodules")? {
        let c = p.comodule(&spec, v, &[Seg::from("comodules"), Seg::Key(name.clone())])?;
        spec.comodules.insert(name, c);
    }
    for (name, v) in block("cocycles")? {
        let c = p.cocycle(&spec, v, &[Seg::from("cocycles"), Seg::Key(name.clone())])?;
        spec.cocycles.insert(name, c);
    }
    for (name, v) in block("algebras")? {
        let a = p.algebra(&spec, v, &[Seg::from("algebras"), Seg::Key(name.clone())])?;
        spec.algebras.insert(name, a);
    }
    for (name, v) in block("morphisms")? {
        let m = p.morphism(&spec, v, &[Seg::from("morphisms"), Seg::Key(name.clone())])?;
        spec.morphisms.insert(name, m);
    }
    if let Some(t) = o.get("task") {
        spec.task = Some(p.task(&spec, t, &[Seg::from("task")])?);
    }
    Ok(spec)
}

pub fn read_spec(path: &std::path::Path) -> Result<SpecFile, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|e| SpecError {
        kind: SpecErrorKind::Io,
        line: 0,
        column: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_spec(&text)
}

pub fn scalar_json(s: &Scalar) -> Value {
    Value::String(s.to_string())
}

pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        m.row_vectors()
            .iter()
            .map(|r| Value::Array(r.iter().map(scalar_json).collect()))
            .collect(),
    )
}

pub fn vector_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(scalar_json).collect())
}

pub fn coalgebra_json(c: &Coalgebra) -> Value {
    let names = c.names();
    let delta: Vec<Value> = c
        .triples()
        .iter()
        .map(|(i, j, k, v)| json!([names[*i], names[*j], names[*k], scalar_json(v)]))
        .collect();
    let mut o = Map::new();
    o.insert("basis".into(), json!(names));
    o.insert("delta".into(), Value::Array(delta));
    o.insert("counit".into(), vector_json(c.counit()));
    if let Some(g) = c.grading() {
        o.insert("degrees".into(), json!(g));
    }
    Value::Object(o)
}

pub fn comodule_json(base: &str, x: &Comodule) -> Value {
    let (xn, cn) = (x.names(), x.base().names());
    let coaction: Vec<Value> = x
        .entries()
        .iter()
        .map(|(i, j, c, v)| json!([xn[*i], xn[*j], cn[*c], scalar_json(v)]))
        .collect();
    json!({"base": base, "basis": xn, "coaction": coaction})
}

pub fn cocycle_json(comodule: &str, w: &Cocycle2) -> Value {
    let (xn, cn) = (w.comodule().names(), w.base().names());
    let omega: Vec<Value> = w
        .entries()
        .iter()
        .map(|(i, j, k, v)| json!([xn[*i], cn[*j], cn[*k], scalar_json(v)]))
        .collect();
    json!({"comodule": comodule, "omega": omega})
}

/// `{basis name: matrix}` listing nonzero components only.
pub fn components_json(f: &ConvMorphism) -> Value {
    let names = f.coalgebra().names();
    let mut o = Map::new();
    for (i, comp) in f.components().iter().enumerate() {
        if !comp.is_zero() {
            o.insert(names[i].clone(), matrix_json(comp.matrix()));
        }
    }
    Value::Object(o)
}

pub fn cochain_json(c: &Cochain, x_names: &[String]) -> Value {
    let mut o = Map::new();
    for (i, v) in c.values().iter().enumerate() {
        o.insert(x_names[i].clone(), matrix_json(v.matrix()));
    }
    Value::Object(o)
}

fn task_json(t: &Task) -> Value {
    let mut o = Map::new();
    o.insert("command".into(), json!(t.command));
    for (k, v) in [
        ("algebra", &t.algebra),
        ("comodule", &t.comodule),
        ("coalgebra", &t.coalgebra),
        ("morphism", &t.morphism),
    ] {
        if let Some(v) = v {
            o.insert(k.into(), json!(v));
        }
    }
    for (k, v) in [("degree", t.degree), ("max_degree", t.max_degree)] {
        if let Some(v) = v {
            o.insert(k.into(), json!(v));
        }
    }
    match &t.extension {
        Some(ExtensionRef::Cocycle(w)) => {
            o.insert("extension".into(), json!({"cocycle": w}));
        }
        Some(ExtensionRef::Graded { coalgebra, degree }) => {
            o.insert("extension".into(), json!({"graded": coalgebra, "degree": degree}));
        }
        None => {}
    }
    Value::Object(o)
}

pub fn spec_json(spec: &SpecFile) -> Value {
    let mut o = Map::new();
    o.insert("field".into(), json!(spec.field.to_string()));
    let coalgebras: Map<String, Value> = spec
        .coalgebras
        .iter()
        .map(|(k, c)| (k.clone(), coalgebra_json(c)))
        .collect();
    o.insert("coalgebras".into(), Value::Object(coalgebras));
    let comodules: Map<String, Value> = spec
        .comodules
        .iter()
        .map(|(k, c)| (k.clone(), comodule_json(&c.base, &c.comodule)))
        .collect();
    o.insert("comodules".into(), Value::Object(comodules));
    let cocycles: Map<String, Value> = spec
        .cocycles
        .iter()
        .map(|(k, c)| (k.clone(), cocycle_json(&c.comodule, &c.cocycle)))
        .collect();
    o.insert("cocycles".into(), Value::Object(cocycles));
    let algebras: Map<String, Value> = spec
        .algebras
        .iter()
        .map(|(k, a)| {
            let mut b = Map::new();
            b.insert("coalgebra".into(), json!(a.coalgebra));
            b.insert("dim".into(), json!(a.m.a_dim()));
            b.insert("m".into(), components_json(&a.m));
            if let Some(u) = &a.unit {
                b.insert("unit".into(), components_json(u));
            }
            (k.clone(), Value::Object(b))
        })
        .collect();
    o.insert("algebras".into(), Value::Object(algebras));
    let morphisms: Map<String, Value> = spec
        .morphisms
        .iter()
        .map(|(k, m)| {
            let v = json!({
                "coalgebra": m.coalgebra,
                "dim": m.f.a_dim(),
                "arity": [m.f.source_arity(), m.f.target_arity()],
                "components": components_json(&m.f),
            });
            (k.clone(), v)
        })
        .collect();
    o.insert("morphisms".into(), Value::Object(morphisms));
    if let Some(t) = &spec.task {
        o.insert("task".into(), task_json(t));
    }
    Value::Object(o)
}

pub fn serialize_spec(spec: &SpecFile) -> String {
    serde_json::to_string_pretty(&spec_json(spec)).expect("JSON values serialize")
}

/// `{"degrees": {"n": {x name: matrix}}}`: a chosen `m̃_X` per degree, keyed by
/// the names of the degree-`n` basis elements.
pub fn parse_cochain_file(
    text: &str,
    field: Field,
    a_dim: usize,
    d: &Coalgebra,
) -> Result<BTreeMap<usize, Cochain>, SpecError> {
    let root: Value = serde_json::from_str(text).map_err(syntax_error)?;
    let p = Parser { text, field };
    let o = p.obj(&root, &[])?;
    let dp = [Seg::from("degrees")];
    let degrees = p.obj(p.field_of(o, "degrees", &[])?, &dp)?;
    let mut out = BTreeMap::new();
    for (key, v) in degrees {
        let kp = path_of(&dp, [Seg::Key(key.clone())]);
        let n: usize = key
            .parse()
            .map_err(|_| p.err(SpecErrorKind::Syntax, &kp, "degree keys are integers"))?;
        let layer = d.degree_indices(n).map_err(|e| p.lib_err(&kp, e))?;
        let vo = p.obj(v, &kp)?;
        let mut values = vec![MultiMap::zero(field, a_dim, 2, 1); layer.len()];
        for (name, mv) in vo {
            let np = path_of(&kp, [Seg::Key(name.clone())]);
            let pos = layer.iter().position(|&i| d.names()[i] == *name).ok_or_else(|| {
                p.err(
                    SpecErrorKind::Reference,
                    &np,
                    format!("{name:?} is not a degree-{n} basis element"),
                )
            })?;
            let m = p.matrix(mv, a_dim, a_dim * a_dim, &np)?;
            values[pos] = MultiMap::new(a_dim, 2, 1, m).map_err(|e| p.lib_err(&np, e))?;
        }
        if values.is_empty() {
            return Err(p.err(SpecErrorKind::Dimension, &kp, format!("degree {n} layer is empty")));
        }
        out.insert(n, Cochain::new(2, a_dim, values).map_err(|e| p.lib_err(&kp, e))?);
    }
    Ok(out)
}

/// `{"layers": [[...], ...]}` where each layer lists basis names or coordinate vectors.
pub fn parse_filtration_file(text: &str, c: &Coalgebra) -> Result<Filtration, SpecError> {
    let root: Value = serde_json::from_str(text).map_err(syntax_error)?;
    let p = Parser { text, field: c.field() };
    let o = p.obj(&root, &[])?;
    let lp = [Seg::from("layers")];
    let mut layers = Vec::new();
    for (i, layer) in p.arr(p.field_of(o, "layers", &[])?, &lp)?.iter().enumerate() {
        let ip = path_of(&lp, [Seg::Index(i)]);
        let mut vecs = Vec::new();
        for (j, item) in p.arr(layer, &ip)?.iter().enumerate() {
            let jp = path_of(&ip, [Seg::Index(j)]);
            if item.is_string() {
                let k = p.lookup(c.names(), item, &jp)?;
                vecs.push(c.basis_vector(k));
            } else {
                let entries = p.arr(item, &jp)?;
                if entries.len() != c.dim() {
                    return Err(p.err(
                        SpecErrorKind::Dimension,
                        &jp,
                        format!("vectors need {} coordinates", c.dim()),
                    ));
                }
                vecs.push(
                    entries
                        .iter()
                        .enumerate()
                        .map(|(k, s)| p.scalar(s, &path_of(&jp, [Seg::Index(k)])))
                        .collect::<PResult<Vec<_>>>()?,
                );
            }
        }
        layers.push(Subspace::span(c.field(), c.dim(), vecs).map_err(|e| p.lib_err(&ip, e))?);
    }
    Filtration::custom(c, layers).map_err(|e| p.lib_err(&lp, e))
}

/// Wraps a payload with the schema version and command name.
pub fn report(command: &str, payload: Value) -> Value {
    json!({"schema_version": SCHEMA_VERSION, "command": command, "result": payload})
}

pub fn cohomology_json(r: &CohomologyResult, x_names: &[String]) -> Value {
    json!({
        "degree": r.degree,
        "dim_Z": r.dim_z,
        "dim_B": r.dim_b,
        "dim_H": r.dim_h,
        "representatives": r.representatives.iter().map(|c| cochain_json(c, x_names)).collect::<Vec<_>>(),
    })
}

pub fn deformation_report_json(r: &DeformationReport) -> Value {
    let names = r.extension.comodule().names();
    json!({
        "zeta": cochain_json(&r.zeta, names),
        "obstruction_vanishes": r.obstruction_vanishes,
        "witness": r.witness.as_ref().map(|w| cochain_json(w, names)),
        "base_solution": r.base.as_ref().map(|b| cochain_json(b.m_x(), names)),
        "dim_Z2": r.dim_z2(),
        "dim_B2": r.dim_b2(),
        "dim_H2": r.dim_h2(),
        "Z2_basis": r.z2.iter().map(|c| cochain_json(c, names)).collect::<Vec<_>>(),
        "B2_basis": r.b2.iter().map(|c| cochain_json(c, names)).collect::<Vec<_>>(),
        "H2_representatives": r.h2.iter().map(|c| cochain_json(c, names)).collect::<Vec<_>>(),
    })
}
