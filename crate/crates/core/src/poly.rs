//! Polynomial spaces over F_q, evaluation maps on direction sets and the
//! vanishing dichotomy.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldModulus};
use crate::geometry::{affine_chart, Hyperplane, ProjectiveDirection};
use crate::matrix::{kernel_basis, Matrix};

pub const BASIS_CAP: usize = 100_000;

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasisMode {
    /// Monomials of total degree exactly D.
    Homogeneous,
    /// Monomials of total degree at most D.
    Inhomogeneous,
}

/// Exponent tuples in graded order: total degree ascending, then
/// lexicographically descending within a degree (`x1^2` before `x1 x2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    vars: usize,
    degree: u32,
    mode: BasisMode,
    exponents: Vec<Vec<u32>>,
}

fn exponents_of_degree(vars: usize, deg: u32, out: &mut Vec<Vec<u32>>) {
    fn rec(prefix: &mut Vec<u32>, left: u32, vars: usize, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(prefix, left - e, vars, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(vars), deg, vars, out);
}

impl MonomialBasis {
    pub fn predicted_size(vars: usize, degree: u32, mode: BasisMode) -> BigUint {
        let (v, d) = (vars as u64, degree as u64);
        match mode {
            BasisMode::Homogeneous => binomial(v + d - 1, v - 1),
            BasisMode::Inhomogeneous => binomial(v + d, v),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn index_map(&self) -> HashMap<Vec<u32>, usize> {
        self.exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect()
    }

    /// Every monomial evaluated at `x`.
    pub fn evaluate_all(&self, q: FieldModulus, x: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(x.len(), self.vars);
        let d = self.degree as usize;
        let pows: Vec<Vec<FieldElement>> = x
            .iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(d + 1);
                p.push(q.one());
                for k in 0..d {
                    p.push(q.mul(p[k], xi));
                }
                p
            })
            .collect();
        self.exponents
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .fold(q.one(), |acc, (i, &k)| q.mul(acc, pows[i][k as usize]))
            })
            .collect()
    }
}

pub fn enumerate_monomials_capped(vars: usize, degree: u32, mode: BasisMode, cap: usize) -> Result<MonomialBasis> {
    if vars == 0 {
        return Err(Error::Invalid("monomial basis needs at least one variable".into()));
    }
    let size = MonomialBasis::predicted_size(vars, degree, mode);
    if size > BigUint::from(cap) {
        return Err(Error::BasisTooLarge {
            size: size.to_string(),
            cap,
        });
    }
    let mut exponents = Vec::with_capacity(size.to_usize().unwrap_or(0));
    match mode {
        BasisMode::Homogeneous => exponents_of_degree(vars, degree, &mut exponents),
        BasisMode::Inhomogeneous => {
            for k in 0..=degree {
                exponents_of_degree(vars, k, &mut exponents);
            }
        }
    }
    debug_assert_eq!(BigUint::from(exponents.len()), size);
    Ok(MonomialBasis {
        vars,
        degree,
        mode,
        exponents,
    })
}

pub fn enumerate_monomials(vars: usize, degree: u32, mode: BasisMode) -> Result<MonomialBasis> {
    enumerate_monomials_capped(vars, degree, mode, BASIS_CAP)
}

/// Coefficients aligned with a basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    pub basis: MonomialBasis,
    pub coefficients: Vec<FieldElement>,
}

impl Polynomial {
    pub fn new(basis: MonomialBasis, coefficients: Vec<FieldElement>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        Ok(Polynomial {
            basis,
            coefficients,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_zero())
    }

    /// Total degree of the highest nonzero term; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms().map(|(e, _)| e.iter().sum()).max()
    }

    pub fn eval(&self, q: FieldModulus, x: &[FieldElement]) -> FieldElement {
        let mons = self.basis.evaluate_all(q, x);
        q.dot(&mons, &self.coefficients)
    }

    /// Nonzero terms in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], FieldElement)> {
        self.basis
            .exponents
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, &c)| (e.as_slice(), c))
    }

    /// `[(exponents, coefficient), ...]` over the nonzero terms.
    pub fn serialize_terms(&self) -> Vec<(Vec<u32>, u32)> {
        self.terms().map(|(e, c)| (e.to_vec(), c.value())).collect()
    }
}

/// Evaluates a list of (exponent, coefficient) terms directly; used by the
/// verifier, which never trusts a basis.
pub fn eval_terms(q: FieldModulus, terms: &[(Vec<u32>, FieldElement)], x: &[FieldElement]) -> FieldElement {
    terms.iter().fold(q.zero(), |acc, (e, c)| {
        let m = e
            .iter()
            .zip(x)
            .fold(q.one(), |m, (&k, &xi)| q.mul(m, q.pow(xi, k as u64)));
        q.add(acc, q.mul(*c, m))
    })
}

/// Row per direction, column per monomial.
pub fn evaluation_matrix(q: FieldModulus, dirs: &[ProjectiveDirection], basis: &MonomialBasis) -> Matrix {
    let mut entries = Vec::with_capacity(dirs.len() * basis.len());
    for u in dirs {
        entries.extend(basis.evaluate_all(q, u.coords()));
    }
    Matrix::new(dirs.len(), basis.len(), entries).expect("sized above")
}

fn evaluation_matrix_points(q: FieldModulus, pts: &[Vec<FieldElement>], basis: &MonomialBasis) -> Matrix {
    let mut entries = Vec::with_capacity(pts.len() * basis.len());
    for x in pts {
        entries.extend(basis.evaluate_all(q, x));
    }
    Matrix::new(pts.len(), basis.len(), entries).expect("sized above")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DichotomyResult {
    /// Nonzero polynomial vanishing on every input.
    Algebraic(Polynomial),
    /// Evaluation map injective.
    Large { n: usize, dim: usize },
}

impl DichotomyResult {
    pub fn is_algebraic(&self) -> bool {
        matches!(self, DichotomyResult::Algebraic(_))
    }
}

fn kernel_dichotomy(q: FieldModulus, rows: &Matrix, basis: MonomialBasis, check: impl Fn(&Polynomial) -> bool) -> DichotomyResult {
    let ker = kernel_basis(rows, q);
    match ker.into_iter().next() {
        Some(v) => {
            let r = Polynomial::new(basis, v).expect("kernel vector matches basis");
            assert!(!r.is_zero() && check(&r), "kernel polynomial failed re-verification");
            DichotomyResult::Algebraic(r)
        }
        None => {
            assert!(rows.rows() >= basis.len(), "injective map with fewer rows than columns");
            DichotomyResult::Large {
                n: rows.rows(),
                dim: basis.len(),
            }
        }
    }
}

fn dedup_dirs(dirs: &[ProjectiveDirection]) -> Vec<ProjectiveDirection> {
    let mut v = dirs.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Homogeneous degree-`degree` dichotomy on a direction set (duplicates ignored).
pub fn dichotomy(q: FieldModulus, dirs: &[ProjectiveDirection], degree: u32) -> Result<DichotomyResult> {
    let dirs = dedup_dirs(dirs);
    let vars = match dirs.first() {
        Some(u) => u.dim(),
        None => return Err(Error::Invalid("empty direction set".into())),
    };
    if degree == 0 {
        return Err(Error::Invalid("dichotomy degree must be at least 1".into()));
    }
    let basis = enumerate_monomials(vars, degree, BasisMode::Homogeneous)?;
    let m = evaluation_matrix(q, &dirs, &basis);
    Ok(kernel_dichotomy(q, &m, basis, |r| {
        dirs.iter().all(|u| r.eval(q, u.coords()).is_zero())
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineDichotomy {
    /// 1-based chart index.
    pub chart: usize,
    /// `N_j`, the directions inside the chart.
    pub in_chart: Vec<ProjectiveDirection>,
    pub result: DichotomyResult,
    /// `u_j^{deg R} R(sigma_j(u))` on the algebraic branch.
    pub homogenized: Option<Polynomial>,
}

/// `u_j^{deg R} R(sigma_j(u))`, as a homogeneous polynomial in `d` variables.
pub fn homogenize(r: &Polynomial, chart: usize) -> Result<Polynomial> {
    let deg = r
        .total_degree()
        .ok_or_else(|| Error::Invalid("cannot homogenize the zero polynomial".into()))?;
    let d = r.basis.vars() + 1;
    let basis = enumerate_monomials(d, deg, BasisMode::Homogeneous)?;
    let index = basis.index_map();
    let mut coeffs = vec![FieldElement::default(); basis.len()];
    for (alpha, c) in r.terms() {
        let mut beta = Vec::with_capacity(d);
        beta.extend_from_slice(&alpha[..chart - 1]);
        beta.push(deg - alpha.iter().sum::<u32>());
        beta.extend_from_slice(&alpha[chart - 1..]);
        coeffs[index[&beta]] = c;
    }
    Polynomial::new(basis, coeffs)
}

pub fn affine_dichotomy(q: FieldModulus, dirs: &[ProjectiveDirection], chart: usize, degree: u32) -> Result<AffineDichotomy> {
    let dirs = dedup_dirs(dirs);
    let Some(d) = dirs.first().map(|u| u.dim()) else {
        return Err(Error::EmptyChart(chart));
    };
    if chart == 0 || chart > d {
        return Err(Error::BadChart { chart, d });
    }
    if degree == 0 {
        return Err(Error::Invalid("dichotomy degree must be at least 1".into()));
    }
    let in_chart: Vec<ProjectiveDirection> = dirs
        .iter()
        .filter(|u| !u.coords()[chart - 1].is_zero())
        .cloned()
        .collect();
    if in_chart.is_empty() {
        return Err(Error::EmptyChart(chart));
    }
    let pts: Vec<Vec<FieldElement>> = in_chart
        .iter()
        .map(|u| affine_chart(q, u, chart).expect("filtered to the chart"))
        .collect();
    let basis = enumerate_monomials(d - 1, degree, BasisMode::Inhomogeneous)?;
    let m = evaluation_matrix_points(q, &pts, &basis);
    let result = kernel_dichotomy(q, &m, basis, |r| {
        pts.iter().all(|x| r.eval(q, x).is_zero())
    });
    let homogenized = match &result {
        DichotomyResult::Algebraic(r) => {
            let h = homogenize(r, chart)?;
            assert!(h.basis.degree() <= degree, "homogenized degree exceeds D");
            assert!(
                in_chart.iter().all(|u| h.eval(q, u.coords()).is_zero()),
                "homogenized polynomial does not vanish on the chart directions"
            );
            Some(h)
        }
        DichotomyResult::Large { .. } => None,
    };
    Ok(AffineDichotomy {
        chart,
        in_chart,
        result,
        homogenized,
    })
}

/// Smallest `D >= 1` with `C(d - 1 + D, d - 1) > n`.
pub fn minimal_degree(n: u64, d: usize) -> u32 {
    let n = BigUint::from(n);
    let mut deg = 1u32;
    while binomial(d as u64 - 1 + deg as u64, d as u64 - 1) <= n {
        deg += 1;
    }
    deg
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VeroneseResult {
    /// `sum a_H (<n_H, x> - b_H)^D = 0` identically.
    Dependence { coefficients: Vec<FieldElement> },
    TooFew,
}

/// Coefficients of `(<n, x> - b)^D` in the inhomogeneous degree-`D` basis.
pub fn veronese_vector(q: FieldModulus, h: &Hyperplane, basis: &MonomialBasis, index: &HashMap<Vec<u32>, usize>) -> Vec<FieldElement> {
    let d = h.dim();
    let mut lin: BTreeMap<Vec<u32>, FieldElement> = BTreeMap::new();
    for (i, &n) in h.normal().iter().enumerate() {
        if !n.is_zero() {
            let mut e = vec![0; d];
            e[i] = 1;
            lin.insert(e, n);
        }
    }
    if !h.offset().is_zero() {
        lin.insert(vec![0; d], q.neg(h.offset()));
    }
    let mut acc: BTreeMap<Vec<u32>, FieldElement> = BTreeMap::new();
    acc.insert(vec![0; d], q.one());
    for _ in 0..basis.degree() {
        let mut next: BTreeMap<Vec<u32>, FieldElement> = BTreeMap::new();
        for (ea, &ca) in &acc {
            for (eb, &cb) in &lin {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let slot = next.entry(e).or_default();
                *slot = q.add(*slot, q.mul(ca, cb));
            }
        }
        next.retain(|_, c| !c.is_zero());
        acc = next;
    }
    let mut v = vec![FieldElement::default(); basis.len()];
    for (e, c) in acc {
        v[index[&e]] = c;
    }
    v
}

/// A linear dependence among the `D`-th powers of the hyperplanes' linear
/// forms. Guaranteed once `|hps| > C(d + D, d)`.
pub fn veronese_dependence(q: FieldModulus, hps: &[Hyperplane], degree: u32) -> Result<VeroneseResult> {
    let Some(d) = hps.first().map(|h| h.dim()) else {
        return Ok(VeroneseResult::TooFew);
    };
    let basis = enumerate_monomials(d, degree, BasisMode::Inhomogeneous)?;
    let index = basis.index_map();
    let cols: Vec<Vec<FieldElement>> = hps.iter().map(|h| veronese_vector(q, h, &basis, &index)).collect();
    let mut m = Matrix::zeros(basis.len(), hps.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    let Some(a) = kernel_basis(&m, q).into_iter().next() else {
        assert!(hps.len() <= basis.len(), "more hyperplanes than dimensions but no dependence");
        return Ok(VeroneseResult::TooFew);
    };
    // coefficientwise
    for i in 0..basis.len() {
        let s = cols.iter().zip(&a).fold(q.zero(), |s, (col, &c)| q.add(s, q.mul(c, col[i])));
        assert!(s.is_zero(), "dependence fails on coefficient {i}");
    }
    // and pointwise at sampled points
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..16 {
        let x: Vec<FieldElement> = (0..d).map(|_| q.elem(rng.random_range(0..q.q() as i64))).collect();
        let s = hps.iter().zip(&a).fold(q.zero(), |s, (h, &c)| {
            let l = q.sub(q.dot(h.normal(), &x), h.offset());
            q.add(s, q.mul(c, q.pow(l, degree as u64)))
        });
        assert!(s.is_zero(), "dependence fails at a sample point");
    }
    Ok(VeroneseResult::Dependence { coefficients: a })
}
