//! Braided free unitary quantum groups `U⁺_ζ(F)`, their bosonization and
//! their linear actions on graph algebras.
//!
//! Every `verify_*` routine builds both sides of an identity in the legged
//! algebra and hands the difference to the reducer; a [`SuiteReport`] keeps
//! one [`VerificationReport`](crate::simplify::VerificationReport) per
//! matrix entry or path pair.

use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{
    conjugate_matrix, generator_matrix, poly_times_scalar, scalar_times_poly, unitarity_relations,
    AlgebraError, GradedPoly, Index, Letter, NamedRelation, Presentation, RelationDecl, Symbol,
};
use crate::braided::{
    circle_letter, psi_flatten, zeta_letter_power, BraidedError, LegLayout, LeggedLetter,
    LeggedPoly,
};
use crate::graphalg::{
    check_dagger, normalized_ftilde, render_path, tau_cuntz_word, GraphData, GraphError, KmsData,
};
use crate::matrix::{Matrix, MatrixError};
use crate::scalars::{Scalar, ScalarError, ZetaSpec};
use crate::simplify::{verify_identity_in, RelationSet, SimplifyError, SuiteReport};

#[derive(Debug, Error)]
pub enum UqfError {
    #[error("F is singular over the scalar ring")]
    Singular,
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("no admissible degree data: {0}")]
    NoSolution(String),
    #[error("shape: {0}")]
    Shape(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Braided(#[from] BraidedError),
    #[error(transparent)]
    Simplify(#[from] SimplifyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

impl From<MatrixError> for UqfError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Singular => UqfError::Singular,
            other => UqfError::Shape(other.to_string()),
        }
    }
}

/// `F`, its inverse and degree data `(d, d', d0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityDatum {
    pub f: Matrix<Scalar>,
    pub f_inv: Matrix<Scalar>,
    pub d: Vec<i64>,
    pub d_prime: Vec<i64>,
    pub d0: i64,
}

impl AdmissibilityDatum {
    /// Checks invertibility and admissibility.
    pub fn new(f: Matrix<Scalar>, d: &[i64], d_prime: &[i64], d0: i64) -> Result<Self, UqfError> {
        if !check_admissible(&f, d, d_prime, d0)? {
            return Err(UqfError::NotAdmissible(format!(
                "d = ({}), d' = ({}), d0 = {d0}",
                join(d),
                join(d_prime)
            )));
        }
        let f_inv = f.inverse()?;
        Ok(AdmissibilityDatum {
            f,
            f_inv,
            d: d.to_vec(),
            d_prime: d_prime.to_vec(),
            d0,
        })
    }

    /// `F = I`, `d' = -d`, `d0 = 0`.
    pub fn identity(d: &[i64]) -> Self {
        solve_admissible(&Matrix::identity(d.len()), d).expect("identity is admissible")
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }
}

fn join(v: &[i64]) -> String {
    crate::algebra::join_ints(v)
}

fn check_square(f: &Matrix<Scalar>, d: &[i64]) -> Result<(), UqfError> {
    if !f.is_square() || f.rows() != d.len() {
        return Err(UqfError::Shape(format!(
            "F is {}x{} but d has {} entries",
            f.rows(),
            f.cols(),
            d.len()
        )));
    }
    Ok(())
}

/// Positions `(i, j)` where `F[i,j]` or `F⁻¹[j,i]` is nonzero.
fn support(f: &Matrix<Scalar>, f_inv: &Matrix<Scalar>) -> Vec<(usize, usize)> {
    let n = f.rows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !f.get(i, j).is_zero() || !f_inv.get(j, i).is_zero() {
                out.push((i, j));
            }
        }
    }
    out
}

/// `F[i,j] = 0 = F⁻¹[j,i]` whenever `-d_j + d0 != d'_i`.
pub fn check_admissible(
    f: &Matrix<Scalar>,
    d: &[i64],
    d_prime: &[i64],
    d0: i64,
) -> Result<bool, UqfError> {
    check_square(f, d)?;
    if d_prime.len() != d.len() {
        return Err(UqfError::Shape("d and d' differ in length".into()));
    }
    let f_inv = f.inverse()?;
    Ok(support(f, &f_inv)
        .into_iter()
        .all(|(i, j)| -d[j] + d0 == d_prime[i]))
}

/// Solves for `d'` with the gauge `d0 = 0`.
pub fn solve_admissible(f: &Matrix<Scalar>, d: &[i64]) -> Result<AdmissibilityDatum, UqfError> {
    check_square(f, d)?;
    let f_inv = f.inverse()?;
    let n = d.len();
    let mut d_prime: Vec<Option<(i64, usize)>> = vec![None; n];
    for (i, j) in support(f, &f_inv) {
        match d_prime[i] {
            None => d_prime[i] = Some((-d[j], j)),
            Some((v, k)) if v != -d[j] => {
                return Err(UqfError::NoSolution(format!(
                    "row {} needs d'_{} = -d_{} = {v} and -d_{} = {}",
                    i + 1,
                    i + 1,
                    k + 1,
                    j + 1,
                    -d[j]
                )))
            }
            Some(_) => {}
        }
    }
    let d_prime: Vec<i64> = d_prime
        .into_iter()
        .map(|x| x.expect("invertible matrices have no zero rows").0)
        .collect();
    Ok(AdmissibilityDatum {
        f: f.clone(),
        f_inv,
        d: d.to_vec(),
        d_prime,
        d0: 0,
    })
}

/// Generators and relations of `C(U⁺_ζ(F))`.
#[derive(Clone, Debug)]
pub struct UqfPresentation {
    pub datum: AdmissibilityDatum,
    pub u: Matrix<GradedPoly>,
    pub ubar: Matrix<GradedPoly>,
    /// `F ū_ζ F⁻¹`.
    pub u_prime: Matrix<GradedPoly>,
    pub relations: RelationSet,
    pub presentation: Presentation,
}

pub fn build_uqf(datum: &AdmissibilityDatum) -> Result<UqfPresentation, UqfError> {
    build_uqf_named(datum, "u")
}

/// As [`build_uqf`] with generator family `family`.
pub fn build_uqf_named(
    datum: &AdmissibilityDatum,
    family: &str,
) -> Result<UqfPresentation, UqfError> {
    if !check_admissible(&datum.f, &datum.d, &datum.d_prime, datum.d0)? {
        return Err(UqfError::NotAdmissible(
            "datum fails the vanishing condition".into(),
        ));
    }
    let d = &datum.d;
    let u = generator_matrix(family, d);
    let ubar = conjugate_matrix(&u, d)?;
    let u_prime = poly_times_scalar(&scalar_times_poly(&datum.f, &ubar), &datum.f_inv);
    for (i, j, x) in u_prime.entries() {
        let expected = datum.d_prime[j] - datum.d_prime[i];
        if !x.degree().is(expected) {
            return Err(AlgebraError::DegreeMismatch { i, j, expected }.into());
        }
    }
    let prime = format!("{family}'");
    let mut relations = RelationSet::new();
    relations.add_unitary(family, &u)?;
    relations.add_unitary(&prime, &u_prime)?;
    let generators = u
        .entries()
        .map(|(i, j, _)| unit_letter(family, d, i, j))
        .collect();
    let presentation = Presentation {
        name: "C(U+_zeta(F))".into(),
        generators,
        d: d.clone(),
        d_prime: Some(datum.d_prime.clone()),
        d0: Some(datum.d0),
        relations: vec![
            RelationDecl::UnitaryMatrix {
                name: family.into(),
                matrix: u.clone(),
            },
            RelationDecl::UnitaryMatrix {
                name: prime,
                matrix: u_prime.clone(),
            },
        ],
    };
    Ok(UqfPresentation {
        datum: datum.clone(),
        u,
        ubar,
        u_prime,
        relations,
        presentation,
    })
}

fn unit_letter(family: &str, d: &[i64], i: usize, j: usize) -> Letter {
    Letter::new(family, Index::Two(i as u32 + 1, j as u32 + 1), d[j] - d[i])
}

fn leg(k: usize, p: &GradedPoly, lay: &LegLayout) -> LeggedPoly {
    LeggedPoly::embed_in(k, p, lay).expect("leg within layout")
}

fn delta(i: usize, j: usize, lay: &LegLayout) -> LeggedPoly {
    if i == j {
        LeggedPoly::one(lay)
    } else {
        LeggedPoly::zero(lay)
    }
}

fn legged_adjoint(m: &Matrix<LeggedPoly>) -> Matrix<LeggedPoly> {
    Matrix::from_fn(m.cols(), m.rows(), |i, j| m.get(j, i).star())
}

/// Pushes `M*M = 1` and `MM* = 1` entrywise.
fn push_unitarity(
    rep: &mut SuiteReport,
    name: &str,
    m: &Matrix<LeggedPoly>,
    rels: &RelationSet,
    spec: ZetaSpec,
    lay: &LegLayout,
) {
    let n = m.rows();
    let adj = legged_adjoint(m);
    for i in 0..n {
        for j in 0..n {
            let mut col = LeggedPoly::zero(lay);
            let mut row = LeggedPoly::zero(lay);
            for k in 0..n {
                col = col.plus(&adj.get(i, k).mul(m.get(k, j)));
                row = row.plus(&m.get(i, k).mul(adj.get(k, j)));
            }
            rep.push(
                format!("{name}*{name}({},{})", i + 1, j + 1),
                verify_identity_in(&col, &delta(i, j, lay), rels, spec),
            );
            rep.push(
                format!("{name}{name}*({},{})", i + 1, j + 1),
                verify_identity_in(&row, &delta(i, j, lay), rels, spec),
            );
        }
    }
}

/// `Σ_l j1(a[i,l]) j2(b[l,j])` in the two-leg braided product.
fn leg_product(
    a: &Matrix<GradedPoly>,
    b: &Matrix<GradedPoly>,
    lay: &LegLayout,
) -> Matrix<LeggedPoly> {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut acc = LeggedPoly::zero(lay);
        for l in 0..a.cols() {
            acc = acc.plus(&leg(1, a.get(i, l), lay).mul(&leg(2, b.get(l, j), lay)));
        }
        acc
    })
}

/// Checks that `Δ(u[i,j]) = Σ_k j1(u[i,k]) j2(u[k,j])` respects both
/// unitarity relations.
pub fn verify_coproduct(pres: &UqfPresentation, spec: ZetaSpec) -> SuiteReport {
    let lay = LegLayout::braided(2);
    let d = &pres.datum.d;
    let n = d.len();
    let rels = &pres.relations;
    let mut rep = SuiteReport::new("coproduct");
    let big_u = leg_product(&pres.u, &pres.u, &lay);
    push_unitarity(&mut rep, "U", &big_u, rels, spec, &lay);

    // Ū_ζ built from the two-leg entries, then conjugated by F.
    let ubar2 = Matrix::from_fn(n, n, |i, j| {
        big_u
            .get(i, j)
            .star()
            .scale(&Scalar::zeta_pow(d[i] * (d[j] - d[i])))
    });
    let f = &pres.datum.f;
    let f_inv = &pres.datum.f_inv;
    let big_u_prime = Matrix::from_fn(n, n, |i, j| {
        let mut acc = LeggedPoly::zero(&lay);
        for a in 0..n {
            for b in 0..n {
                let c = f.get(i, a) * f_inv.get(b, j);
                if !c.is_zero() {
                    acc.add_assign_scaled(ubar2.get(a, b), &c);
                }
            }
        }
        acc
    });
    let expanded = leg_product(&pres.u_prime, &pres.u_prime, &lay);
    for i in 0..n {
        for j in 0..n {
            rep.push(
                format!(
                    "U'({},{})=sum_l j1(u'[{},l])j2(u'[l,{}])",
                    i + 1,
                    j + 1,
                    i + 1,
                    j + 1
                ),
                verify_identity_in(big_u_prime.get(i, j), expanded.get(i, j), rels, spec),
            );
        }
    }
    if pres.u_prime.entries().all(|(_, _, x)| x.len() <= 1) {
        push_unitarity(&mut rep, "U'", &big_u_prime, rels, spec, &lay);
    } else {
        // Entries of u' overlap once expanded in u, so the groups are no
        // longer separable; work with u' as generators of its own instead.
        let v = generator_matrix("u'", &pres.datum.d_prime);
        let mut vrels = RelationSet::new();
        vrels
            .add_unitary("u'", &v)
            .expect("generator matrices are homogeneous");
        let big_v = leg_product(&v, &v, &lay);
        push_unitarity(&mut rep, "U'", &big_v, &vrels, spec, &lay);
    }
    rep
}

/// `C(𝕋) ⊠_ζ C(U⁺_ζ(F))` with its coproduct table.
#[derive(Clone, Debug)]
pub struct BosoPresentation {
    pub datum: AdmissibilityDatum,
    pub z: Letter,
    pub u: Matrix<GradedPoly>,
    pub presentation: Presentation,
    /// One-leg normal forms: `z` unitary, `z` moved left of `u`, `u` and `u'` unitary.
    pub relations: RelationSet,
    /// `(generator, image)` rendered in the four-leg product.
    pub coproduct: Vec<(String, LeggedPoly)>,
}

impl BosoPresentation {
    pub fn dump(&self) -> String {
        let mut out = self.presentation.dump();
        out.push_str("[coproduct]\n");
        for (g, img) in &self.coproduct {
            out.push_str(&format!("Delta({g}) = {img}\n"));
        }
        out
    }
}

fn tensor4() -> LegLayout {
    LegLayout::tensor(&[2, 2])
}

/// Closed form of the bosonized coproduct on `j2(u[i,j])`:
/// `Σ_k j2(u[i,k]) j3(z^{d_k - d_i}) j4(u[k,j])`.
fn boso_delta_u(d: &[i64], i: usize, j: usize) -> LeggedPoly {
    let lay = tensor4();
    let mut acc = LeggedPoly::zero(&lay);
    for k in 0..d.len() {
        let t = LeggedPoly::letter(2, unit_letter("u", d, i, k), &lay)
            .mul(&leg(3, &zeta_letter_power(d[k] - d[i]), &lay))
            .mul(&LeggedPoly::letter(4, unit_letter("u", d, k, j), &lay));
        acc = acc.plus(&t);
    }
    acc
}

fn boso_delta_z() -> LeggedPoly {
    let lay = tensor4();
    let z = circle_letter();
    LeggedPoly::letter(1, z, &lay).mul(&LeggedPoly::letter(3, z, &lay))
}

pub fn build_bosonization(datum: &AdmissibilityDatum) -> Result<BosoPresentation, UqfError> {
    let base = build_uqf(datum)?;
    let d = &datum.d;
    let n = d.len();
    let z = circle_letter();
    let zmat = Matrix::from_fn(1, 1, |_, _| GradedPoly::letter(z));
    let mut relations = RelationSet::new();
    relations.add_unitary("z", &zmat)?;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let uij = unit_letter("u", d, i, j);
            pairs.push((z, uij, Scalar::zeta_pow(d[i] - d[j])));
            for x in [uij, uij.star()] {
                for y in [z, z.star()] {
                    relations.add_commutation(x, y, Scalar::zeta_pow(x.degree * y.degree))?;
                }
            }
        }
    }
    relations.add_unitary("u", &base.u)?;
    relations.add_unitary("u'", &base.u_prime)?;
    let mut generators = vec![z];
    generators.extend(base.presentation.generators.iter().copied());
    let mut decls = vec![
        RelationDecl::UnitaryMatrix {
            name: "z".into(),
            matrix: zmat,
        },
        RelationDecl::PhaseCommutation {
            name: "comm".into(),
            pairs,
        },
    ];
    decls.extend(base.presentation.relations.iter().cloned());
    let mut coproduct = vec![("z".to_string(), boso_delta_z())];
    for i in 0..n {
        for j in 0..n {
            coproduct.push((unit_letter("u", d, i, j).to_string(), boso_delta_u(d, i, j)));
        }
    }
    Ok(BosoPresentation {
        datum: datum.clone(),
        z,
        u: base.u,
        presentation: Presentation {
            name: "C(T) x| C(U+_zeta(F))".into(),
            generators,
            d: d.clone(),
            d_prime: Some(datum.d_prime.clone()),
            d0: Some(datum.d0),
            relations: decls,
        },
        relations,
        coproduct,
    })
}

/// Relations for the two-leg picture of the bosonization: `z` unitary on
/// leg 1, `u` and `u'` unitary on leg 2 (rules apply on any leg).
fn boso_legged_relations(pres: &UqfPresentation) -> Result<RelationSet, UqfError> {
    let mut rels = pres.relations.clone();
    let zmat = Matrix::from_fn(1, 1, |_, _| GradedPoly::letter(circle_letter()));
    rels.add_unitary("z", &zmat)?;
    Ok(rels)
}

/// The bosonized coproduct from the two-leg product into the four-leg one.
fn boso_delta(p: &LeggedPoly, d: &[i64]) -> Result<LeggedPoly, UqfError> {
    let lay3 = LegLayout::braided(3);
    let n = d.len();
    let id_delta = p.substitute(&lay3, |l| match l.leg {
        1 => Ok(LeggedPoly::letter(1, l.letter, &lay3)),
        _ => {
            let (i, j) = match l.letter.index {
                Index::Two(i, j) => (i as usize - 1, j as usize - 1),
                _ => {
                    return Err(BraidedError::BadShape(format!(
                        "`{}` is not a matrix unit",
                        l.letter
                    )))
                }
            };
            let mut acc = LeggedPoly::zero(&lay3);
            for k in 0..n {
                acc = acc.plus(
                    &LeggedPoly::letter(2, unit_letter("u", d, i, k), &lay3)
                        .mul(&LeggedPoly::letter(3, unit_letter("u", d, k, j), &lay3)),
                );
            }
            Ok(acc)
        }
    })?;
    Ok(psi_flatten(&id_delta)?)
}

/// Derives `Δ = ψ ∘ (id ⊠ Δ)` on the generators and compares with the closed form.
pub fn derive_boso_coproduct(
    datum: &AdmissibilityDatum,
    spec: ZetaSpec,
) -> Result<SuiteReport, UqfError> {
    let pres = build_uqf(datum)?;
    let rels = boso_legged_relations(&pres)?;
    let d = &datum.d;
    let n = d.len();
    let lay2 = LegLayout::braided(2);
    let mut rep = SuiteReport::new("bosonization coproduct");
    let z = LeggedPoly::letter(1, circle_letter(), &lay2);
    let dz = boso_delta(&z, d)?;
    rep.push(
        "Delta(j1(z))",
        verify_identity_in(&dz, &boso_delta_z(), &rels, spec),
    );
    for i in 0..n {
        for j in 0..n {
            let u = LeggedPoly::letter(2, unit_letter("u", d, i, j), &lay2);
            let du = boso_delta(&u, d)?;
            rep.push(
                format!("Delta(j2(u[{},{}]))", i + 1, j + 1),
                verify_identity_in(&du, &boso_delta_u(d, i, j), &rels, spec),
            );
            // z u = ζ^{d_i - d_j} u z survives the coproduct.
            let lhs = dz.mul(&du);
            let rhs = du.mul(&dz).scale(&Scalar::zeta_pow(d[i] - d[j]));
            rep.push(
                format!("Delta(z)Delta(u[{},{}]) commutation", i + 1, j + 1),
                verify_identity_in(&lhs, &rhs, &rels, spec),
            );
        }
    }
    Ok(rep)
}

/// `t[i,j] = j1(z^{d_i}) j2(u[i,j])`: unitarity, comultiplicativity and the
/// form of its conjugate.
pub fn verify_fundamental_rep(
    datum: &AdmissibilityDatum,
    spec: ZetaSpec,
) -> Result<SuiteReport, UqfError> {
    let pres = build_uqf(datum)?;
    let rels = boso_legged_relations(&pres)?;
    let d = &datum.d;
    let n = d.len();
    let lay2 = LegLayout::braided(2);
    let lay4 = tensor4();
    let mut rep = SuiteReport::new("fundamental representation");
    let t = Matrix::from_fn(n, n, |i, j| {
        leg(1, &zeta_letter_power(d[i]), &lay2).mul(&leg(2, pres.u.get(i, j), &lay2))
    });
    push_unitarity(&mut rep, "t", &t, &rels, spec, &lay2);
    for i in 0..n {
        for j in 0..n {
            let lhs = boso_delta(t.get(i, j), d)?;
            let mut rhs = LeggedPoly::zero(&lay4);
            for k in 0..n {
                let left =
                    leg(1, &zeta_letter_power(d[i]), &lay4).mul(&leg(2, pres.u.get(i, k), &lay4));
                let right =
                    leg(3, &zeta_letter_power(d[k]), &lay4).mul(&leg(4, pres.u.get(k, j), &lay4));
                rhs = rhs.plus(&left.mul(&right));
            }
            rep.push(
                format!("Delta(t[{},{}])", i + 1, j + 1),
                verify_identity_in(&lhs, &rhs, &rels, spec),
            );
        }
    }
    for i in 0..n {
        for j in 0..n {
            let lhs = t.get(i, j).star();
            let rhs =
                leg(1, &zeta_letter_power(-d[i]), &lay2).mul(&leg(2, pres.ubar.get(i, j), &lay2));
            rep.push(
                format!(
                    "t*[{},{}]=z^(-d_{})ubar[{},{}]",
                    i + 1,
                    j + 1,
                    i + 1,
                    i + 1,
                    j + 1
                ),
                verify_identity_in(&lhs, &rhs, &rels, spec),
            );
        }
    }
    Ok(rep)
}

fn isometry_letter(d: &[i64], i: usize) -> Letter {
    Letter::new("S", Index::One(i as u32 + 1), d[i])
}

/// `η(S_j) = Σ_i j1(S_i) j2(q[i,j])` for a generator matrix `q`.
fn eta_images(q: &Matrix<GradedPoly>, d: &[i64], lay: &LegLayout) -> Vec<LeggedPoly> {
    let n = d.len();
    (0..n)
        .map(|j| {
            let mut acc = LeggedPoly::zero(lay);
            for i in 0..n {
                acc = acc.plus(&LeggedPoly::letter(1, isometry_letter(d, i), lay).mul(&leg(
                    2,
                    q.get(i, j),
                    lay,
                )));
            }
            acc
        })
        .collect()
}

/// The images `S'_j` of the isometries and the checks that they again form a
/// Cuntz family with the predicted adjoint.
pub fn cuntz_action(
    pres: &UqfPresentation,
    spec: ZetaSpec,
) -> Result<(Vec<LeggedPoly>, SuiteReport), UqfError> {
    let d = &pres.datum.d;
    let n = d.len();
    let lay = LegLayout::braided(2);
    let mut rels = pres.relations.clone();
    rels.add_cuntz_family("S", d)?;
    let s = eta_images(&pres.u, d, &lay);
    let mut rep = SuiteReport::new("cuntz action");
    for i in 0..n {
        for j in 0..n {
            rep.push(
                format!("S'*[{}]S'[{}]", i + 1, j + 1),
                verify_identity_in(&s[i].star().mul(&s[j]), &delta(i, j, &lay), &rels, spec),
            );
        }
    }
    let mut sum = LeggedPoly::zero(&lay);
    for sj in &s {
        sum = sum.plus(&sj.mul(&sj.star()));
    }
    rep.push(
        "sum_j S'[j]S'*[j]",
        verify_identity_in(&sum, &LeggedPoly::one(&lay), &rels, spec),
    );
    for j in 0..n {
        let mut rhs = LeggedPoly::zero(&lay);
        for i in 0..n {
            rhs = rhs.plus(
                &LeggedPoly::letter(1, isometry_letter(d, i).star(), &lay).mul(&leg(
                    2,
                    pres.ubar.get(i, j),
                    &lay,
                )),
            );
        }
        rep.push(
            format!("S'*[{}]=sum_i j1(S*[i])j2(ubar[i,{}])", j + 1, j + 1),
            verify_identity_in(&s[j].star(), &rhs, &rels, spec),
        );
    }
    Ok((s, rep))
}

/// All words over `1..=n` of length at most `max_len`, shortest first.
pub fn multi_indices(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for e in 1..=n {
                let mut v = w.clone();
                v.push(e);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `(τ_n ⊠ id) η(S_α S_β*) = τ_n(S_α S_β*) 1` for all `|α|, |β| <= len`.
///
/// Requires `F = I`, where `u' = ū_ζ`.
pub fn verify_kms_preservation(
    n: usize,
    d: &[i64],
    len: usize,
    spec: ZetaSpec,
) -> Result<SuiteReport, UqfError> {
    if d.len() != n {
        return Err(UqfError::Shape(format!(
            "n = {n} but d has {} entries",
            d.len()
        )));
    }
    let pres = build_uqf(&AdmissibilityDatum::identity(d))?;
    let g = GraphData::cuntz(d);
    let kms = check_dagger(&g)
        .kms()
        .cloned()
        .ok_or_else(|| UqfError::Unsupported("Cuntz graph failed condition (†)".into()))?;
    let lay = LegLayout::braided(2);
    let lay1 = LegLayout::braided(1);
    let eta = eta_images(&pres.u, d, &lay);
    let eta_star: Vec<LeggedPoly> = eta.iter().map(LeggedPoly::star).collect();
    let words = multi_indices(n, len);
    let pairs: Vec<(&Vec<usize>, &Vec<usize>)> = words
        .iter()
        .flat_map(|a| words.iter().map(move |b| (a, b)))
        .collect();
    let results: Vec<Result<(String, crate::simplify::VerificationReport), UqfError>> = pairs
        .par_iter()
        .map(|(alpha, beta)| {
            let mut img = LeggedPoly::one(&lay);
            for &a in alpha.iter() {
                img = img.mul(&eta[a - 1]);
            }
            for &b in beta.iter().rev() {
                img = img.mul(&eta_star[b - 1]);
            }
            let tau = |w: &[Letter]| tau_scalar(&g, &kms, w);
            let reduced = img.apply_leg1_functional(tau)?;
            let target = kms_target(&g, &kms, alpha, beta)?;
            let rhs = LeggedPoly::constant(target, &lay1);
            let name = format!("({},{})", render_path(alpha), render_path(beta));
            Ok((
                name,
                verify_identity_in(&reduced, &rhs, &pres.relations, spec),
            ))
        })
        .collect();
    let mut rep = SuiteReport::new(format!("kms preservation n={n} d={} len={len}", join(d)));
    for r in results {
        let (name, v) = r?;
        rep.push(name, v);
    }
    Ok(rep)
}

fn tau_scalar(g: &GraphData, k: &KmsData, w: &[Letter]) -> Scalar {
    tau_cuntz_word(g, k, w)
        .map(Scalar::from_rational)
        .unwrap_or_else(|_| Scalar::zero())
}

fn kms_target(
    g: &GraphData,
    k: &KmsData,
    alpha: &[usize],
    beta: &[usize],
) -> Result<Scalar, UqfError> {
    let v = crate::graphalg::kms_eval(g, k, alpha, beta)?;
    let q = v.exact().cloned().ok_or(GraphError::FloatMode)?;
    Ok(Scalar::from_rational(q))
}

/// The two relation families forced on the coefficients `q` of a linear
/// action preserving the state, with the checks that they agree with the
/// closed forms.
#[derive(Clone, Debug)]
pub struct ActionConstraints {
    /// `Σ_k ζ^{d_k(d_j-d_i)} q[k,i] q*[k,j] = δ_ij`.
    pub isometry_relations: Vec<NamedRelation>,
    /// `Σ_k F̃_kk q*[k,i] q[k,j] = F̃_ij`.
    pub projection_relations: Vec<NamedRelation>,
    pub report: SuiteReport,
}

fn rename_family(p: &GradedPoly, from: &str, to: &str) -> GradedPoly {
    let from = Symbol::new(from);
    let mut out = GradedPoly::zero();
    for (w, c) in p.terms() {
        let w2 = w
            .iter()
            .map(|l| {
                if l.family == from {
                    Letter {
                        family: Symbol::new(to),
                        ..*l
                    }
                } else {
                    *l
                }
            })
            .collect();
        out.add_term(w2, c.clone());
    }
    out
}

fn one_leg(p: &GradedPoly) -> LeggedPoly {
    leg(1, p, &LegLayout::braided(1))
}

fn check_positive_diag(ftilde: &[BigRational], d: &[i64]) -> Result<(), UqfError> {
    if ftilde.len() != d.len() {
        return Err(UqfError::Shape(format!(
            "F~ has {} entries but d has {}",
            ftilde.len(),
            d.len()
        )));
    }
    if ftilde.iter().any(|x| !x.is_positive()) {
        return Err(UqfError::Unsupported(
            "F~ must have positive diagonal".into(),
        ));
    }
    Ok(())
}

/// Expands `(τ ⊠ id) η(S_i S_j*)` and `(τ ⊠ id) η(S_i* S_j)` for abstract
/// letters `q[i,j]`, with `τ(S_k S_l*) = δ_kl` and `τ(S_k* S_l) = F̃_kl`.
pub fn derive_action_constraints(
    ftilde: &[BigRational],
    d: &[i64],
    spec: ZetaSpec,
) -> Result<ActionConstraints, UqfError> {
    check_positive_diag(ftilde, d)?;
    let n = d.len();
    let lay = LegLayout::braided(2);
    let q = generator_matrix("q", d);
    let eta = eta_images(&q, d, &lay);
    let table = |w: &[Letter]| -> Scalar {
        match w {
            [a, b]
                if a.family.as_str() == "S" && b.family.as_str() == "S" && a.index == b.index =>
            {
                match (a.starred, b.starred) {
                    (false, true) => Scalar::one(),
                    (true, false) => match a.index {
                        Index::One(k) => Scalar::from_rational(ftilde[k as usize - 1].clone()),
                        _ => Scalar::zero(),
                    },
                    _ => Scalar::zero(),
                }
            }
            _ => Scalar::zero(),
        }
    };
    let mut rep = SuiteReport::new("action constraints");
    let mut iso = Vec::new();
    let mut proj = Vec::new();
    let empty = RelationSet::new();
    for i in 0..n {
        for j in 0..n {
            let first = eta[i].mul(&eta[j].star()).apply_leg1_functional(table)?;
            let second = eta[i].star().mul(&eta[j]).apply_leg1_functional(table)?;
            let first = first.as_single_leg(1).expect("one leg left");
            let second = second.as_single_leg(1).expect("one leg left");
            let mut display1 = GradedPoly::zero();
            let mut display2 = GradedPoly::zero();
            for k in 0..n {
                display1.add_term(
                    vec![unit_letter("q", d, k, i), unit_letter("q", d, k, j).star()],
                    Scalar::zeta_pow(d[k] * (d[j] - d[i])),
                );
                display2.add_term(
                    vec![unit_letter("q", d, k, i).star(), unit_letter("q", d, k, j)],
                    Scalar::from_rational(ftilde[k].clone()),
                );
            }
            let tag = format!("({},{})", i + 1, j + 1);
            rep.push(
                format!("isometry{tag}"),
                verify_identity_in(&one_leg(&first), &one_leg(&display1), &empty, spec),
            );
            rep.push(
                format!("projection{tag}"),
                verify_identity_in(&one_leg(&second), &one_leg(&display2), &empty, spec),
            );
            let delta = if i == j {
                Scalar::one()
            } else {
                Scalar::zero()
            };
            let ft = if i == j {
                Scalar::from_rational(ftilde[i].clone())
            } else {
                Scalar::zero()
            };
            iso.push(NamedRelation {
                name: format!("q:isometry{tag}"),
                poly: first,
                constant: delta,
            });
            proj.push(NamedRelation {
                name: format!("q:projection{tag}"),
                poly: second,
                constant: ft,
            });
        }
    }
    if ftilde.iter().all(One::is_one) {
        let pres = build_uqf(&AdmissibilityDatum::identity(d))?;
        let uni = pres
            .presentation
            .relations
            .iter()
            .flat_map(|r| r.expand())
            .collect::<Vec<_>>();
        let find = |name: &str| {
            uni.iter()
                .find(|r| r.name == name)
                .expect("declared relation")
        };
        for i in 0..n {
            for j in 0..n {
                let tag = format!("({},{})", i + 1, j + 1);
                let ubar_col = find(&format!("u':col{tag}"));
                let u_col = find(&format!("u:col{tag}"));
                let a = &iso[i * n + j];
                let b = &proj[i * n + j];
                rep.push_bool(
                    format!("isometry{tag}=u':col{tag}"),
                    rename_family(&a.poly, "q", "u") == ubar_col.poly
                        && a.constant == ubar_col.constant,
                    &LegLayout::braided(1),
                );
                rep.push_bool(
                    format!("projection{tag}=u:col{tag}"),
                    rename_family(&b.poly, "q", "u") == u_col.poly && b.constant == u_col.constant,
                    &LegLayout::braided(1),
                );
            }
        }
    }
    Ok(ActionConstraints {
        isometry_relations: iso,
        projection_relations: proj,
        report: rep,
    })
}

/// `F = diag(√F̃_ii)` in the radical scalar ring.
pub fn sqrt_diagonal(ftilde: &[BigRational]) -> Result<Matrix<Scalar>, UqfError> {
    let entries = ftilde
        .iter()
        .map(Scalar::sqrt_rational)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::diagonal(&entries))
}

/// For `F = diag(√F̃)`: `F⁻¹ (q̄')_ζ F = q̄_ζ` with `q' = F q F⁻¹`, the
/// `(FqF⁻¹)*(FqF⁻¹) = I` relation against `q* F̃ q = F̃`, and `(q̄_ζ)* q̄_ζ = I`
/// against the isometry relation.
pub fn verify_quotient(
    ftilde: &[BigRational],
    d: &[i64],
    spec: ZetaSpec,
) -> Result<SuiteReport, UqfError> {
    let cons = derive_action_constraints(ftilde, d, spec)?;
    let n = d.len();
    let f = sqrt_diagonal(ftilde)?;
    let f_inv = f.inverse()?;
    let q = generator_matrix("q", d);
    let qbar = conjugate_matrix(&q, d)?;
    let q_prime = poly_times_scalar(&scalar_times_poly(&f, &q), &f_inv);
    let q_prime_bar = conjugate_matrix(&q_prime, d)?;
    let back = poly_times_scalar(&scalar_times_poly(&f_inv, &q_prime_bar), &f);
    let empty = RelationSet::new();
    let mut rep = SuiteReport::new("quotient");
    for (i, j, x) in back.entries() {
        rep.push(
            format!("F^-1 qbar' F({},{})", i + 1, j + 1),
            verify_identity_in(&one_leg(x), &one_leg(qbar.get(i, j)), &empty, spec),
        );
    }
    let col_of = |rels: Vec<NamedRelation>, i: usize, j: usize| {
        let name = format!(":col({},{})", i + 1, j + 1);
        rels.into_iter()
            .find(|r| r.name.ends_with(&name))
            .expect("relation present")
    };
    for i in 0..n {
        for j in 0..n {
            let tag = format!("({},{})", i + 1, j + 1);
            let uc = col_of(unitarity_relations("FqF^-1", &q_prime), i, j);
            let proj = &cons.projection_relations[i * n + j];
            // Σ_k F̃_kk q*[k,i] q[k,j] - F̃_ij, divided by F_ii F_jj.
            let s = (f_inv.get(i, i) * f_inv.get(j, j)).star();
            let lhs = uc.poly.minus(&GradedPoly::constant(uc.constant.clone()));
            let rhs = proj
                .poly
                .minus(&GradedPoly::constant(proj.constant.clone()))
                .scale(&s);
            rep.push(
                format!("(FqF^-1)*(FqF^-1){tag}"),
                verify_identity_in(&one_leg(&lhs), &one_leg(&rhs), &empty, spec),
            );
            let bc = col_of(unitarity_relations("qbar", &qbar), i, j);
            let iso = &cons.isometry_relations[i * n + j];
            let lhs = bc.poly.minus(&GradedPoly::constant(bc.constant.clone()));
            let rhs = iso.poly.minus(&GradedPoly::constant(iso.constant.clone()));
            rep.push(
                format!("qbar*qbar{tag}"),
                verify_identity_in(&one_leg(&lhs), &one_leg(&rhs), &empty, spec),
            );
        }
    }
    Ok(rep)
}

/// Generators `t[i,j]` and relations `F t F⁻¹` and `t̄_ζ` unitary, with
/// `F = diag(√F̃)` from the normalized state of `g`.
pub fn graph_universal_presentation(
    g: &GraphData,
    k: &KmsData,
    spec: ZetaSpec,
) -> Result<(Presentation, SuiteReport), UqfError> {
    let ftilde = normalized_ftilde(g, k)?;
    let d = g.degrees();
    let f = sqrt_diagonal(&ftilde)?;
    let f_inv = f.inverse()?;
    let t = generator_matrix("t", d);
    let ftf = poly_times_scalar(&scalar_times_poly(&f, &t), &f_inv);
    let tbar = conjugate_matrix(&t, d)?;
    let presentation = Presentation {
        name: "C'(E)".into(),
        generators: t
            .entries()
            .map(|(i, j, _)| unit_letter("t", d, i, j))
            .collect(),
        d: d.to_vec(),
        d_prime: None,
        d0: None,
        relations: vec![
            RelationDecl::UnitaryMatrix {
                name: "FtF^-1".into(),
                matrix: ftf.clone(),
            },
            RelationDecl::UnitaryMatrix {
                name: "tbar".into(),
                matrix: tbar.clone(),
            },
        ],
    };
    let mut rep = verify_quotient(&ftilde, d, spec)?;
    rep.title = "graph presentation".into();
    if f.is_identity() {
        let base = build_uqf(&AdmissibilityDatum::identity(d))?;
        let same = ftf.map(|_, _, x| rename_family(x, "t", "u")) == base.u
            && tbar.map(|_, _, x| rename_family(x, "t", "u")) == base.u_prime;
        rep.push_bool("equals U+_zeta(I_n)", same, &LegLayout::braided(1));
    }
    Ok((presentation, rep))
}

/// Leg-1 letters of a legged word, for callers building their own functionals.
pub fn leg_one_letters(w: &[LeggedLetter]) -> Vec<Letter> {
    w.iter()
        .take_while(|l| l.leg == 1)
        .map(|l| l.letter)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rat;

    fn int_matrix(rows: &[&[i64]]) -> Matrix<Scalar> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn diag(entries: &[i64]) -> Matrix<Scalar> {
        Matrix::diagonal(
            &entries
                .iter()
                .map(|&x| Scalar::from_int(x))
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn admissibility_examples() {
        assert!(check_admissible(&Matrix::identity(3), &[1, 2, 3], &[-1, -2, -3], 0).unwrap());
        assert!(check_admissible(&diag(&[1, 2]), &[0, 1], &[0, -1], 0).unwrap());
        assert!(!check_admissible(&int_matrix(&[&[1, 1], &[0, 1]]), &[0, 1], &[0, -1], 0).unwrap());
        assert!(matches!(
            check_admissible(&int_matrix(&[&[1, 1], &[1, 1]]), &[0, 1], &[0, -1], 0),
            Err(UqfError::Singular)
        ));
    }

    #[test]
    fn solving_degree_data() {
        let a = solve_admissible(&Matrix::identity(3), &[1, 2, 3]).unwrap();
        assert_eq!((a.d_prime, a.d0), (vec![-1, -2, -3], 0));
        let a = solve_admissible(&int_matrix(&[&[0, 1], &[1, 0]]), &[0, 1]).unwrap();
        assert_eq!((a.d_prime, a.d0), (vec![-1, 0], 0));
        assert!(matches!(
            solve_admissible(&int_matrix(&[&[2, 1], &[1, 1]]), &[0, 1]),
            Err(UqfError::NoSolution(_))
        ));
    }

    #[test]
    fn conjugate_exponents() {
        let p = build_uqf(&AdmissibilityDatum::identity(&[0, 1])).unwrap();
        // ζ^{d_i(d_j - d_i)}: [[0,0],[-1,0]]
        let expect = |i: usize, j: usize, e: i64| {
            let l = unit_letter("u", &[0, 1], i, j).star();
            assert_eq!(
                *p.u_prime.get(i, j),
                GradedPoly::term(vec![l], Scalar::zeta_pow(e))
            );
        };
        expect(0, 0, 0);
        expect(0, 1, 0);
        expect(1, 0, -1);
        expect(1, 1, 0);
    }

    #[test]
    fn one_by_one_relations() {
        let p = build_uqf(&AdmissibilityDatum::identity(&[3])).unwrap();
        let rels: Vec<_> = p
            .presentation
            .relations
            .iter()
            .flat_map(|r| r.expand())
            .collect();
        assert_eq!(rels.len(), 4);
        assert!(p.presentation.inhomogeneous_relations().is_empty());
        assert_eq!(*p.u_prime.get(0, 0), p.u.get(0, 0).star());
    }

    #[test]
    fn coproduct_small() {
        for (f, d) in [
            (Matrix::identity(2), vec![0, 1]),
            (diag(&[1, 2, 3]), vec![0, 0, 1]),
            (Matrix::identity(2), vec![0, 0]),
        ] {
            let datum = solve_admissible(&f, &d).unwrap();
            let rep = verify_coproduct(&build_uqf(&datum).unwrap(), ZetaSpec::Formal);
            assert!(rep.is_verified(), "{}", rep.render(false));
        }
    }

    #[test]
    fn boso_examples() {
        let b = build_bosonization(&AdmissibilityDatum::identity(&[0, 1])).unwrap();
        let RelationDecl::PhaseCommutation { pairs, .. } = &b.presentation.relations[1] else {
            panic!("commutation block expected")
        };
        assert_eq!(pairs[1].2, Scalar::zeta_pow(-1));
        let rep = derive_boso_coproduct(&b.datum, ZetaSpec::Formal).unwrap();
        assert!(rep.is_verified(), "{}", rep.render(false));
        // One-leg normal form: z u[1,2] - ζ^{-1} u[1,2] z reduces to zero.
        let lay = LegLayout::braided(1);
        let z = LeggedPoly::letter(1, b.z, &lay);
        let u12 = LeggedPoly::letter(1, unit_letter("u", &[0, 1], 0, 1), &lay);
        let r = verify_identity_in(
            &z.mul(&u12),
            &u12.mul(&z).scale(&Scalar::zeta_pow(-1)),
            &b.relations,
            ZetaSpec::Formal,
        );
        assert!(r.is_verified(), "{}", r.residual);
        let b0 = build_bosonization(&AdmissibilityDatum::identity(&[0, 0])).unwrap();
        let RelationDecl::PhaseCommutation { pairs, .. } = &b0.presentation.relations[1] else {
            panic!()
        };
        assert!(pairs.iter().all(|p| p.2.is_one()));
    }

    #[test]
    fn fundamental_small() {
        for (f, d) in [
            (Matrix::identity(2), vec![0, 1]),
            (diag(&[1, 1, 2]), vec![0, 1, 1]),
            (Matrix::identity(2), vec![0, 0]),
        ] {
            let datum = solve_admissible(&f, &d).unwrap();
            let rep = verify_fundamental_rep(&datum, ZetaSpec::Formal).unwrap();
            assert!(rep.is_verified(), "{}", rep.render(false));
        }
    }

    #[test]
    fn cuntz_action_small() {
        for d in [vec![0, 1], vec![0, 0], vec![1, 2, 3]] {
            let p = build_uqf(&AdmissibilityDatum::identity(&d)).unwrap();
            let (_, rep) = cuntz_action(&p, ZetaSpec::Formal).unwrap();
            assert!(rep.is_verified(), "{}", rep.render(false));
        }
    }

    #[test]
    fn kms_preservation_short() {
        let rep = verify_kms_preservation(2, &[0, 1], 1, ZetaSpec::Formal).unwrap();
        assert_eq!(rep.checks.len(), 9);
        assert!(rep.is_verified(), "{}", rep.render(false));
        let (name, mixed) = rep.checks.iter().find(|(n, _)| n == "(1,-)").unwrap();
        assert!(mixed.is_verified(), "{name}");
    }

    #[test]
    fn action_constraints() {
        let one = vec![rat(1, 1), rat(1, 1)];
        let c = derive_action_constraints(&one, &[0, 1], ZetaSpec::Formal).unwrap();
        assert!(c.report.is_verified(), "{}", c.report.render(false));
        assert_eq!(c.report.checks.len(), 16);
        let c =
            derive_action_constraints(&[rat(1, 1), rat(2, 1)], &[0, 1], ZetaSpec::Formal).unwrap();
        assert!(c.report.is_verified());
        // (2,1) isometry relation: q[1,2] q*[1,1] + ζ^{-1} q[2,2] q*[2,1]
        let r = &c.isometry_relations[2];
        assert_eq!(r.poly.to_string(), "q[1,2]*q*[1,1] + {z^-1}*q[2,2]*q*[2,1]");
        let rep = verify_quotient(&[rat(1, 1), rat(2, 1)], &[0, 1], ZetaSpec::Formal).unwrap();
        assert!(rep.is_verified(), "{}", rep.render(false));
    }

    #[test]
    fn graph_presentations() {
        let g = GraphData::cuntz(&[0, 1]);
        let k = check_dagger(&g).kms().cloned().unwrap();
        let (p, rep) = graph_universal_presentation(&g, &k, ZetaSpec::Formal).unwrap();
        assert!(rep.is_verified(), "{}", rep.render(false));
        assert!(rep.checks.iter().any(|(n, _)| n == "equals U+_zeta(I_n)"));
        assert_eq!(p.generators.len(), 4);
        let c = GraphData::new(2, &[(1, 2), (2, 1)], &[0, 1]).unwrap();
        let kc = check_dagger(&c).kms().cloned().unwrap();
        let (_, rep) = graph_universal_presentation(&c, &kc, ZetaSpec::Formal).unwrap();
        assert!(rep.is_verified());
    }
}
