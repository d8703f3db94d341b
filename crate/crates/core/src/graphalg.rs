//! Finite directed graphs, their vertex matrix, condition (†) and the KMS
//! state at the critical inverse temperature.
//!
//! Edges and vertices are one-based in files, paths and output.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::algebra::{Index, Letter};
use crate::braided::{LegLayout, LeggedPoly};
use crate::linalg::{self, char_poly, nullspace, poly_divmod, poly_eval, rationalize, roots_above};
use crate::scalars::{Scalar, ScalarError};
use crate::simplify::{verify_identity, RelationSet, SuiteReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vertex {0} has no outgoing edge")]
    Sink(usize),
    #[error("graph has no vertices")]
    Empty,
    #[error("edge {edge} refers to vertex {vertex} outside 1..={max}")]
    BadVertex {
        edge: usize,
        vertex: usize,
        max: usize,
    },
    #[error("edge ids must be exactly 1..={0}")]
    EdgeIds(usize),
    #[error("edges {0} and {1} do not compose")]
    InvalidPath(usize, usize),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("edge {0} ends at a vertex of KMS weight 0; normalization undefined")]
    ZeroVertexWeight(usize),
    #[error("spectral data is only known numerically; exact data required")]
    FloatMode,
    #[error("normalization leaves the radical ring: {0}")]
    IrrationalData(String),
    #[error("words must be in the isometries of a one-vertex graph")]
    NotCuntz,
}

impl From<ScalarError> for GraphError {
    fn from(e: ScalarError) -> Self {
        GraphError::IrrationalData(e.to_string())
    }
}

/// Finite directed graph without sinks, with a gauge degree per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphData {
    num_vertices: usize,
    /// `(source, range)`, zero-based.
    edges: Vec<(usize, usize)>,
    degrees: Vec<i64>,
}

#[derive(Deserialize)]
struct GraphFile {
    vertices: usize,
    edges: Vec<EdgeRecord>,
}

#[derive(Deserialize)]
struct EdgeRecord {
    id: usize,
    src: usize,
    dst: usize,
    #[serde(default)]
    deg: i64,
}

impl GraphData {
    /// `edges` are one-based `(source, range)` pairs.
    pub fn new(
        num_vertices: usize,
        edges: &[(usize, usize)],
        degrees: &[i64],
    ) -> Result<Self, GraphError> {
        if num_vertices == 0 {
            return Err(GraphError::Empty);
        }
        assert_eq!(edges.len(), degrees.len(), "one degree per edge");
        let mut out = Vec::with_capacity(edges.len());
        for (k, &(s, r)) in edges.iter().enumerate() {
            for v in [s, r] {
                if v == 0 || v > num_vertices {
                    return Err(GraphError::BadVertex {
                        edge: k + 1,
                        vertex: v,
                        max: num_vertices,
                    });
                }
            }
            out.push((s - 1, r - 1));
        }
        for v in 0..num_vertices {
            if !out.iter().any(|&(s, _)| s == v) {
                return Err(GraphError::Sink(v + 1));
            }
        }
        Ok(GraphData {
            num_vertices,
            edges: out,
            degrees: degrees.to_vec(),
        })
    }

    /// One vertex with `degrees.len()` loops: the Cuntz algebra.
    pub fn cuntz(degrees: &[i64]) -> Self {
        let edges = vec![(1, 1); degrees.len()];
        GraphData::new(1, &edges, degrees).expect("at least one loop")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    /// One-based `(source, range)` of edge `e` (one-based).
    pub fn edge(&self, e: usize) -> Result<(usize, usize), GraphError> {
        self.edges
            .get(e.wrapping_sub(1))
            .map(|&(s, r)| (s + 1, r + 1))
            .ok_or(GraphError::UnknownEdge(e))
    }

    pub fn is_cuntz(&self) -> bool {
        self.num_vertices == 1
    }

    /// Text format (`vertices m`, `edge <id> <src> <dst> deg <d>`) or JSON.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        if text.trim_start().starts_with('{') {
            let f: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Parse {
                line: e.line(),
                msg: e.to_string(),
            })?;
            let recs: Vec<(usize, usize, usize, i64)> = f
                .edges
                .iter()
                .map(|e| (e.id, e.src, e.dst, e.deg))
                .collect();
            return GraphData::from_records(f.vertices, recs);
        }
        let mut vertices = None;
        let mut recs = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| GraphError::Parse {
                line: ln + 1,
                msg: msg.to_string(),
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["vertices", m] => {
                    vertices = Some(m.parse().map_err(|_| err("bad vertex count"))?);
                }
                ["edge", id, s, r, rest @ ..] => {
                    let deg = match rest {
                        [] => 0,
                        ["deg", d] => d.parse().map_err(|_| err("bad degree"))?,
                        _ => return Err(err("expected `deg <d>` after the endpoints")),
                    };
                    recs.push((
                        id.parse().map_err(|_| err("bad edge id"))?,
                        s.parse().map_err(|_| err("bad source"))?,
                        r.parse().map_err(|_| err("bad range"))?,
                        deg,
                    ));
                }
                _ => {
                    return Err(err(
                        "expected `vertices m` or `edge <id> <src> <dst> deg <d>`",
                    ))
                }
            }
        }
        let m = vertices.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `vertices` line".into(),
        })?;
        GraphData::from_records(m, recs)
    }

    fn from_records(
        m: usize,
        mut recs: Vec<(usize, usize, usize, i64)>,
    ) -> Result<Self, GraphError> {
        recs.sort_by_key(|r| r.0);
        let n = recs.len();
        if recs.iter().enumerate().any(|(k, r)| r.0 != k + 1) {
            return Err(GraphError::EdgeIds(n));
        }
        let edges: Vec<(usize, usize)> = recs.iter().map(|r| (r.1, r.2)).collect();
        let degrees: Vec<i64> = recs.iter().map(|r| r.3).collect();
        GraphData::new(m, &edges, &degrees)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vertices {}\n", self.num_vertices);
        for (k, &(s, r)) in self.edges.iter().enumerate() {
            out.push_str(&format!(
                "edge {} {} {} deg {}\n",
                k + 1,
                s + 1,
                r + 1,
                self.degrees[k]
            ));
        }
        out
    }

    /// Checks that consecutive edges compose: range of one is source of the next.
    pub fn check_path(&self, path: &[usize]) -> Result<(), GraphError> {
        for &e in path {
            self.edge(e)?;
        }
        for w in path.windows(2) {
            if self.edges[w[0] - 1].1 != self.edges[w[1] - 1].0 {
                return Err(GraphError::InvalidPath(w[0], w[1]));
            }
        }
        Ok(())
    }

    /// All paths of exactly `len` edges, lexicographic in edge ids.
    pub fn paths(&self, len: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..len {
            let mut next = Vec::new();
            for p in &out {
                for e in 1..=self.edges.len() {
                    let ok = match p.last() {
                        None => true,
                        Some(&l) => self.edges[l - 1].1 == self.edges[e - 1].0,
                    };
                    if ok {
                        let mut q = p.clone();
                        q.push(e);
                        next.push(q);
                    }
                }
            }
            out = next;
        }
        out
    }

    pub fn path_degree(&self, path: &[usize]) -> i64 {
        path.iter().map(|&e| self.degrees[e - 1]).sum()
    }
}

impl FromStr for GraphData {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GraphData::parse(s)
    }
}

/// `D[v][w]` = number of edges from `v` to `w`.
pub fn vertex_matrix(g: &GraphData) -> Vec<Vec<u64>> {
    let m = g.num_vertices;
    let mut d = vec![vec![0u64; m]; m];
    for &(s, r) in &g.edges {
        d[s][r] += 1;
    }
    d
}

/// A KMS value: exact when the Perron data was certified.
#[derive(Clone, Debug, PartialEq)]
pub enum KmsValue {
    Exact(BigRational),
    Float(f64),
}

impl KmsValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            KmsValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            KmsValue::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            KmsValue::Exact(q) => Some(q),
            KmsValue::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            KmsValue::Exact(q) => q.is_zero(),
            KmsValue::Float(x) => *x == 0.0,
        }
    }
}

impl fmt::Display for KmsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KmsValue::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            KmsValue::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            KmsValue::Float(x) => write!(f, "{x:.15e}"),
        }
    }
}

/// Spectral radius and normalized vertex weights `τ(P_v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KmsData {
    pub rho: KmsValue,
    pub weights: Vec<KmsValue>,
    pub exact: bool,
    /// `|D w - ρ w|_∞` (zero in exact mode).
    pub residual: f64,
}

impl KmsData {
    pub fn rho_exact(&self) -> Result<&BigRational, GraphError> {
        self.rho.exact().ok_or(GraphError::FloatMode)
    }

    pub fn weight_exact(&self, v: usize) -> Result<&BigRational, GraphError> {
        self.weights[v].exact().ok_or(GraphError::FloatMode)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DaggerOutcome {
    Satisfied(KmsData),
    NotSatisfied(String),
}

impl DaggerOutcome {
    pub fn kms(&self) -> Option<&KmsData> {
        match self {
            DaggerOutcome::Satisfied(k) => Some(k),
            DaggerOutcome::NotSatisfied(_) => None,
        }
    }
}

/// Power iteration on `D + I` from the all-ones vector.
fn perron_float(d: &[Vec<u64>]) -> (f64, Vec<f64>) {
    let m = d.len();
    let mut w = vec![1.0 / m as f64; m];
    let mut lam = 0.0;
    for _ in 0..200_000 {
        let mut next: Vec<f64> = (0..m)
            .map(|i| w[i] + (0..m).map(|j| d[i][j] as f64 * w[j]).sum::<f64>())
            .collect();
        let s: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= s;
        }
        let diff = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        lam = s - 1.0;
        if diff < 1e-16 {
            break;
        }
    }
    (lam, w)
}

fn float_residual(d: &[Vec<u64>], rho: f64, w: &[f64]) -> f64 {
    (0..d.len())
        .map(|i| {
            let dw: f64 = (0..d.len()).map(|j| d[i][j] as f64 * w[j]).sum();
            (dw - rho * w[i]).abs()
        })
        .fold(0.0, f64::max)
}

/// Certifies an integer Perron root and a nonnegative exact eigenvector.
fn certify(d: &[Vec<u64>], est: f64, wf: &[f64]) -> Option<(BigRational, Vec<BigRational>)> {
    let m = d.len();
    let dq: Vec<Vec<BigRational>> = d
        .iter()
        .map(|row| row.iter().map(|&x| linalg::q(x as i64)).collect())
        .collect();
    let cp = char_poly(&dq);
    // Rational roots of a monic integer polynomial are integers.
    let base = est.round() as i64;
    for cand in [base, base - 1, base + 1] {
        if cand < 0 {
            continue;
        }
        let r = linalg::q(cand);
        if !poly_eval(&cp, &r).is_zero() {
            continue;
        }
        let mut deflated = cp.clone();
        loop {
            let (quo, rem) = poly_divmod(&deflated, &[-r.clone(), BigRational::one()]);
            if !rem.iter().all(Zero::is_zero) {
                break;
            }
            deflated = quo;
        }
        if roots_above(&deflated, &r) != 0 {
            continue;
        }
        let shifted: Vec<Vec<BigRational>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            &dq[i][j] - &r
                        } else {
                            dq[i][j].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let (free, basis) = nullspace(&shifted);
        let mut candidates: Vec<Vec<BigRational>> = Vec::new();
        let mut combo = vec![BigRational::zero(); m];
        for (k, &f) in free.iter().enumerate() {
            let c = rationalize(wf[f], 1_000_000);
            for i in 0..m {
                combo[i] += &c * &basis[k][i];
            }
        }
        candidates.push(combo);
        for b in &basis {
            let s: BigRational = b.iter().sum();
            candidates.push(if s.is_negative() {
                b.iter().map(|x| -x).collect()
            } else {
                b.clone()
            });
        }
        for v in candidates {
            let s: BigRational = v.iter().sum();
            if s.is_positive() && v.iter().all(|x| !x.is_negative()) {
                return Some((r, v.iter().map(|x| x / &s).collect()));
            }
        }
    }
    None
}

/// Computes `ρ(D)` and a normalized nonnegative eigenvector.
pub fn check_dagger(g: &GraphData) -> DaggerOutcome {
    let d = vertex_matrix(g);
    let (est, wf) = perron_float(&d);
    if let Some((rho, w)) = certify(&d, est, &wf) {
        return DaggerOutcome::Satisfied(KmsData {
            rho: KmsValue::Exact(rho),
            weights: w.into_iter().map(KmsValue::Exact).collect(),
            exact: true,
            residual: 0.0,
        });
    }
    if wf.iter().any(|&x| x < -1e-12) || !est.is_finite() {
        return DaggerOutcome::NotSatisfied("no nonnegative Perron vector found".into());
    }
    let residual = float_residual(&d, est, &wf);
    DaggerOutcome::Satisfied(KmsData {
        rho: KmsValue::Float(est),
        weights: wf
            .into_iter()
            .map(|x| KmsValue::Float(x.max(0.0)))
            .collect(),
        exact: false,
        residual,
    })
}

/// `τ(S_α S_β*) = δ_{αβ} ρ^{-|α|} τ(P_{r(α)})`.
pub fn kms_eval(
    g: &GraphData,
    k: &KmsData,
    alpha: &[usize],
    beta: &[usize],
) -> Result<KmsValue, GraphError> {
    g.check_path(alpha)?;
    g.check_path(beta)?;
    if alpha != beta {
        return Ok(if k.exact {
            KmsValue::Exact(BigRational::zero())
        } else {
            KmsValue::Float(0.0)
        });
    }
    let Some(&last) = alpha.last() else {
        return Ok(if k.exact {
            KmsValue::Exact(BigRational::one())
        } else {
            KmsValue::Float(1.0)
        });
    };
    let v = g.edges[last - 1].1;
    let len = alpha.len() as i32;
    Ok(match (&k.rho, &k.weights[v]) {
        (KmsValue::Exact(rho), KmsValue::Exact(w)) => KmsValue::Exact(w / rho.pow(len)),
        (rho, w) => KmsValue::Float(w.to_f64() / rho.to_f64().powi(len)),
    })
}

/// The state on a word in the isometries `S[e]` of a one-vertex graph.
///
/// The word is first brought to `Σ c S_μ S_ν*` form with `S*[e] S[f] = δ_ef`.
pub fn tau_cuntz_word(
    g: &GraphData,
    k: &KmsData,
    word: &[Letter],
) -> Result<BigRational, GraphError> {
    if !g.is_cuntz() {
        return Err(GraphError::NotCuntz);
    }
    let rho = k.rho_exact()?;
    let mut stack: Vec<Letter> = Vec::with_capacity(word.len());
    for l in word {
        if l.family.as_str() != "S" {
            return Err(GraphError::NotCuntz);
        }
        if let (Some(top), false) = (stack.last(), l.starred) {
            if top.starred {
                if top.index != l.index {
                    return Ok(BigRational::zero());
                }
                stack.pop();
                continue;
            }
        }
        stack.push(*l);
    }
    let split = stack.iter().position(|l| l.starred).unwrap_or(stack.len());
    let (mu, nu) = stack.split_at(split);
    if mu.len() != nu.len()
        || mu
            .iter()
            .zip(nu.iter().rev())
            .any(|(a, b)| a.index != b.index)
    {
        return Ok(BigRational::zero());
    }
    Ok(k.weight_exact(0)? / rho.pow(mu.len() as i32))
}

/// The isometry letter `S[e]` with its gauge degree.
pub fn isometry(g: &GraphData, e: usize) -> Letter {
    Letter::new("S", Index::One(e as u32), g.degrees[e - 1])
}

/// Checks `τ(ρ_z(S_α S_β*)) = τ(S_α S_β*)` identically in formal `z`.
pub fn check_gauge_equivariance(
    g: &GraphData,
    k: &KmsData,
    samples: &[(Vec<usize>, Vec<usize>)],
) -> Result<SuiteReport, GraphError> {
    let lay = LegLayout::braided(1);
    let rels = RelationSet::new();
    let mut rep = SuiteReport::new("gauge equivariance");
    for (a, b) in samples {
        let name = format!("({},{})", render_path(a), render_path(b));
        let val = kms_eval(g, k, a, b)?;
        let shift = g.path_degree(a) - g.path_degree(b);
        match val {
            KmsValue::Exact(q) => {
                let base = Scalar::from_rational(q);
                let lhs = LeggedPoly::constant(base.shift(shift), &lay);
                let rhs = LeggedPoly::constant(base, &lay);
                rep.push(name, verify_identity(&lhs, &rhs, &rels));
            }
            KmsValue::Float(x) => rep.push_bool(name, shift == 0 || x == 0.0, &lay),
        }
    }
    Ok(rep)
}

/// `√(ρ / τ(P_{r(e_i)}))`, making `τ(S_i S_i*) = 1`.
pub fn normalization_factors(g: &GraphData, k: &KmsData) -> Result<Vec<Scalar>, GraphError> {
    let rho = k.rho_exact()?;
    (1..=g.num_edges())
        .map(|e| {
            let w = k.weight_exact(g.edges[e - 1].1)?;
            if w.is_zero() {
                return Err(GraphError::ZeroVertexWeight(e));
            }
            Ok(Scalar::sqrt_rational(&(rho / w))?)
        })
        .collect()
}

/// Diagonal of `F̃ = (τ(S_i* S_j))` for the normalized isometries, divided by
/// the common factor `ρ` so that the Cuntz algebra gives the identity.
pub fn normalized_ftilde(g: &GraphData, k: &KmsData) -> Result<Vec<BigRational>, GraphError> {
    let rho = k.rho_exact()?;
    let factors = normalization_factors(g, k)?;
    let mut out = Vec::with_capacity(g.num_edges());
    for e in 1..=g.num_edges() {
        let w = k.weight_exact(g.edges[e - 1].1)?;
        let c2 = (&factors[e - 1] * &factors[e - 1])
            .as_rational()
            .ok_or_else(|| GraphError::IrrationalData("squared factor".into()))?;
        // τ(S_i S_i*) after normalization must be 1.
        let ss_star = &c2 * w / rho;
        if !ss_star.is_one() {
            return Err(GraphError::IrrationalData(format!(
                "normalized τ(S_{e} S_{e}*) = {ss_star}"
            )));
        }
        // S_i* S_i = P_{r(e_i)}.
        let s_star_s = &c2 * w;
        out.push(s_star_s / rho);
    }
    Ok(out)
}

pub fn render_path(p: &[usize]) -> String {
    if p.is_empty() {
        return "-".into();
    }
    p.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// TSV table of `τ(S_α S_β*)` over all paths with `1 <= |α|,|β| <= len`.
pub fn kms_table(g: &GraphData, k: &KmsData, len: usize) -> Result<String, GraphError> {
    let mut paths = Vec::new();
    for l in 1..=len {
        paths.extend(g.paths(l));
    }
    let mut out = String::from("alpha\tbeta\tvalue\n");
    for a in &paths {
        for b in &paths {
            let v = kms_eval(g, k, a, b)?;
            out.push_str(&format!("{}\t{}\t{}\n", render_path(a), render_path(b), v));
        }
    }
    Ok(out)
}

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
