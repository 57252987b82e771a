//! Points, spheres, hyperplanes, codimension-2 flats and projective directions
//! in F_q^d.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldModulus};
use crate::matrix::{normalize_leading, rref, Matrix};

/// Default ceiling on `q^d` for exhaustive enumeration.
pub const ENUMERATION_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AmbientSpace {
    q: FieldModulus,
    d: usize,
}

impl AmbientSpace {
    pub fn new(q: FieldModulus, d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(AmbientSpace { q, d })
    }

    pub fn q(&self) -> FieldModulus {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `q^d`, saturating.
    pub fn size(&self) -> u128 {
        (self.q.q() as u128).saturating_pow(self.d as u32)
    }

    /// All points in lexicographic order, refusing spaces above `cap`.
    pub fn points_capped(&self, cap: u128) -> Result<impl Iterator<Item = Point> + '_> {
        let size = self.size();
        if size > cap {
            return Err(Error::SpaceTooLarge { size, cap });
        }
        Ok((0..size as u64).map(move |i| self.point_at(i)))
    }

    pub fn points(&self) -> Result<impl Iterator<Item = Point> + '_> {
        self.points_capped(ENUMERATION_CAP)
    }

    /// The `i`-th point in lexicographic order (first coordinate most significant).
    pub fn point_at(&self, mut i: u64) -> Point {
        let q = self.q.q() as u64;
        let mut coords = vec![FieldElement::default(); self.d];
        for c in coords.iter_mut().rev() {
            *c = self.q.elem((i % q) as i64);
            i /= q;
        }
        Point(coords)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.0.len() != self.d {
            return Err(Error::LengthMismatch {
                expected: self.d,
                got: p.0.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<FieldElement>);

impl Point {
    pub fn from_i64(q: FieldModulus, v: &[i64]) -> Self {
        Point(v.iter().map(|&x| q.elem(x)).collect())
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sub(&self, q: FieldModulus, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(&a, &b)| q.sub(a, b)).collect())
    }
}

/// `x_1^2 + ... + x_d^2`.
pub fn quad_norm(q: FieldModulus, x: &[FieldElement]) -> FieldElement {
    q.dot(x, x)
}

/// `S(c, r) = {x : ||x - c|| = r}` where `r` is the value of the form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Point,
    pub r: FieldElement,
}

impl Sphere {
    pub fn new(center: Point, r: FieldElement) -> Self {
        Sphere { center, r }
    }

    pub fn contains(&self, q: FieldModulus, x: &Point) -> bool {
        let mut acc = 0u64;
        for (a, c) in x.0.iter().zip(&self.center.0) {
            let t = q.sub(*a, *c).value() as u64;
            acc += t * t;
        }
        (acc % q.q() as u64) as u32 == self.r.value()
    }
}

pub fn sphere_points_capped(s: &Sphere, space: &AmbientSpace, cap: u128) -> Result<Vec<Point>> {
    let q = space.q();
    Ok(space
        .points_capped(cap)?
        .filter(|x| s.contains(q, x))
        .collect())
}

/// Exhaustive enumeration, lexicographic order.
pub fn sphere_points(s: &Sphere, space: &AmbientSpace) -> Result<Vec<Point>> {
    sphere_points_capped(s, space, ENUMERATION_CAP)
}

/// Affine hyperplane `<n, x> = b`, stored with the first nonzero normal
/// coordinate equal to 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Hyperplane {
    normal: Vec<FieldElement>,
    offset: FieldElement,
}

impl Hyperplane {
    pub fn new(q: FieldModulus, normal: Vec<FieldElement>, offset: FieldElement) -> Result<Self> {
        let Some(lead) = normal.iter().copied().find(|x| !x.is_zero()) else {
            return Err(Error::Invalid("hyperplane normal is zero".into()));
        };
        let inv = q.inv(lead)?;
        Ok(Hyperplane {
            normal: normal.into_iter().map(|x| q.mul(x, inv)).collect(),
            offset: q.mul(offset, inv),
        })
    }

    pub fn from_i64(q: FieldModulus, normal: &[i64], offset: i64) -> Result<Self> {
        Hyperplane::new(q, normal.iter().map(|&x| q.elem(x)).collect(), q.elem(offset))
    }

    pub fn normal(&self) -> &[FieldElement] {
        &self.normal
    }

    pub fn offset(&self) -> FieldElement {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, q: FieldModulus, x: &Point) -> bool {
        q.dot(&self.normal, &x.0) == self.offset
    }

    /// `<n, x> - b`.
    pub fn eval(&self, q: FieldModulus, x: &Point) -> FieldElement {
        q.sub(q.dot(&self.normal, &x.0), self.offset)
    }

    pub fn direction(&self) -> ProjectiveDirection {
        // canonical normal already has leading 1
        ProjectiveDirection(self.normal.clone())
    }

    pub fn is_canonical(&self) -> bool {
        self.normal
            .iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| x.value() == 1)
    }

    pub fn points(&self, space: &AmbientSpace) -> Result<Vec<Point>> {
        let q = space.q();
        Ok(space.points()?.filter(|x| self.contains(q, x)).collect())
    }
}

/// Radical (bisector) hyperplane of two spheres:
/// `2(c' - c).x = (r - r') + ||c'|| - ||c||`. `None` when the centers agree.
pub fn radical_hyperplane(q: FieldModulus, s1: &Sphere, s2: &Sphere) -> Option<Hyperplane> {
    if s1.center == s2.center {
        return None;
    }
    let two = q.elem(2);
    let normal = s2
        .center
        .0
        .iter()
        .zip(&s1.center.0)
        .map(|(&b, &a)| q.mul(two, q.sub(b, a)))
        .collect();
    let offset = q.add(
        q.sub(s1.r, s2.r),
        q.sub(quad_norm(q, &s2.center.0), quad_norm(q, &s1.center.0)),
    );
    Some(Hyperplane::new(q, normal, offset).expect("distinct centers give a nonzero normal"))
}

/// A point of projective space, stored with first nonzero coordinate 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ProjectiveDirection(Vec<FieldElement>);

impl ProjectiveDirection {
    pub fn new(q: FieldModulus, mut coords: Vec<FieldElement>) -> Result<Self> {
        if coords.iter().all(|x| x.is_zero()) {
            return Err(Error::Invalid("projective direction is zero".into()));
        }
        normalize_leading(q, &mut coords);
        Ok(ProjectiveDirection(coords))
    }

    pub fn from_i64(q: FieldModulus, v: &[i64]) -> Result<Self> {
        ProjectiveDirection::new(q, v.iter().map(|&x| q.elem(x)).collect())
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Every point of `P^{d-1}(F_q)`, ordered by canonical coordinates.
    pub fn all(space: &AmbientSpace) -> Result<Vec<ProjectiveDirection>> {
        let mut out: Vec<_> = space
            .points()?
            .filter(|p| {
                p.0.iter()
                    .find(|x| !x.is_zero())
                    .is_some_and(|x| x.value() == 1)
            })
            .map(|p| ProjectiveDirection(p.0))
            .collect();
        out.sort();
        Ok(out)
    }
}

/// Affine chart `sigma_j`: divide by `u_j` and drop coordinate `j` (1-based).
/// `None` when `u_j = 0`.
pub fn affine_chart(q: FieldModulus, dir: &ProjectiveDirection, j: usize) -> Option<Vec<FieldElement>> {
    assert!(j >= 1 && j <= dir.dim(), "chart index {j} out of range");
    let uj = dir.0[j - 1];
    if uj.is_zero() {
        return None;
    }
    let inv = q.inv(uj).expect("nonzero");
    Some(
        dir.0
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j - 1)
            .map(|(_, &x)| q.mul(x, inv))
            .collect(),
    )
}

/// Codimension-2 affine subspace `{x : A x = v}`, stored as the reduced row
/// echelon form of the augmented 2 x (d+1) system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Flat {
    rows: [Vec<FieldElement>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairIntersection {
    Flat(Flat),
    ParallelDisjoint,
    Identical,
}

impl Flat {
    /// Builds the canonical flat from a 2 x d system `A x = v` of rank 2.
    pub fn from_system(q: FieldModulus, a: [&[FieldElement]; 2], v: [FieldElement; 2]) -> Result<Self> {
        let d = a[0].len();
        let mut rows = Vec::with_capacity(2);
        for i in 0..2 {
            let mut r = a[i].to_vec();
            r.push(v[i]);
            rows.push(r);
        }
        let m = Matrix::from_rows(d + 1, &rows)?;
        let (red, pivots) = rref(&m, q);
        if pivots.len() != 2 || pivots[1] >= d {
            return Err(Error::Invalid("flat system is not rank 2 and consistent".into()));
        }
        Ok(Flat {
            rows: [red.row(0).to_vec(), red.row(1).to_vec()],
        })
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len() - 1
    }

    /// The 2 x d constraint matrix `A`.
    pub fn constraint_matrix(&self) -> Matrix {
        let d = self.dim();
        Matrix::from_rows(d, &[self.rows[0][..d].to_vec(), self.rows[1][..d].to_vec()]).unwrap()
    }

    pub fn constraint_values(&self) -> [FieldElement; 2] {
        let d = self.dim();
        [self.rows[0][d], self.rows[1][d]]
    }

    pub fn augmented_rows(&self) -> &[Vec<FieldElement>; 2] {
        &self.rows
    }

    pub fn contains(&self, q: FieldModulus, x: &Point) -> bool {
        let d = self.dim();
        self.rows
            .iter()
            .all(|r| q.dot(&r[..d], &x.0) == r[d])
    }

    /// All `q^{d-2}` points, solving for the two pivot coordinates.
    pub fn points(&self, q: FieldModulus) -> Vec<Point> {
        let d = self.dim();
        let pivots: Vec<usize> = self
            .rows
            .iter()
            .map(|r| r.iter().position(|x| !x.is_zero()).unwrap())
            .collect();
        let free: Vec<usize> = (0..d).filter(|c| !pivots.contains(c)).collect();
        let qq = q.q() as u64;
        let total = qq.pow(free.len() as u32);
        let mut out = Vec::with_capacity(total as usize);
        for mut i in 0..total {
            let mut x = vec![q.zero(); d];
            for &c in free.iter().rev() {
                x[c] = q.elem((i % qq) as i64);
                i /= qq;
            }
            for (r, &p) in self.rows.iter().zip(&pivots) {
                let mut val = r[d];
                for &c in &free {
                    val = q.sub(val, q.mul(r[c], x[c]));
                }
                x[p] = val;
            }
            out.push(Point(x));
        }
        out.sort();
        out
    }
}

pub fn flat_from_pair(q: FieldModulus, h1: &Hyperplane, h2: &Hyperplane) -> PairIntersection {
    if h1 == h2 {
        return PairIntersection::Identical;
    }
    if h1.normal == h2.normal {
        return PairIntersection::ParallelDisjoint;
    }
    let flat = Flat::from_system(q, [&h1.normal, &h2.normal], [h1.offset, h2.offset])
        .expect("non-parallel canonical hyperplanes meet in a rank-2 flat");
    PairIntersection::Flat(flat)
}

/// Whether `(n, b)` of `h` lies in the row space of `[A | v]`.
pub fn flat_contained_in(q: FieldModulus, l: &Flat, h: &Hyperplane) -> bool {
    // The rows are in reduced echelon form, so reduce h against the pivots.
    let d = l.dim();
    let mut row = h.normal.clone();
    row.push(h.offset);
    for r in &l.rows {
        let p = r.iter().position(|x| !x.is_zero()).unwrap();
        let f = row[p];
        if !f.is_zero() {
            for k in 0..=d {
                row[k] = q.sub(row[k], q.mul(f, r[k]));
            }
        }
    }
    row.iter().all(|x| x.is_zero())
}
