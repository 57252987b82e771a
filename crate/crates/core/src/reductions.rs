//! Pinned-distance sphere systems, dot-product hyperplane systems, and the
//! concentration test built on certificate extraction.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::SqrtRational;
use crate::field::{FieldElement, FieldModulus};
use crate::geometry::{quad_norm, Hyperplane, Point, Sphere};
use crate::incidence::{k_from_scaled_surplus, near_extremality_k, Config};
use crate::multiset::{richness, HyperplaneMultiset, MultisetEntry};
use crate::pipeline::{extract_certificate, CaseTag, Certificate, ExtractOptions};

/// `Δ_p(P)`: the form values `||x - p||` over `x in P`.
pub fn pinned_distance_set(q: FieldModulus, p: &Point, pts: &[Point]) -> BTreeSet<FieldElement> {
    pts.iter().map(|x| quad_norm(q, x.sub(q, p).coords())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnedSystem {
    pub pins: Vec<Point>,
    /// `S_p = {S(p, t) : t in Δ_p(P)}`, concatenated over pins.
    pub spheres: Vec<Sphere>,
    /// `|Δ_p(P)|` per pin.
    pub distance_counts: Vec<usize>,
    /// `I(P, S_p)` per pin, recounted.
    pub pin_incidences: Vec<u64>,
    /// `(|P| / q) * sum_p (q - |Δ_p(P)|)`.
    pub surplus: BigRational,
    pub k: SqrtRational,
}

pub fn pinned_sphere_system(q: FieldModulus, d: usize, pins: &[Point], pts: &[Point]) -> Result<PinnedSystem> {
    let mut spheres = Vec::new();
    let mut distance_counts = Vec::new();
    let mut pin_incidences = Vec::new();
    for p in pins {
        let delta = pinned_distance_set(q, p, pts);
        let family: Vec<Sphere> = delta.iter().map(|&t| Sphere::new(p.clone(), t)).collect();
        let inc: u64 = family
            .iter()
            .map(|s| pts.iter().filter(|x| s.contains(q, x)).count() as u64)
            .sum();
        assert_eq!(inc, pts.len() as u64, "each point lies on exactly one sphere about the pin");
        distance_counts.push(delta.len());
        pin_incidences.push(inc);
        spheres.extend(family);
    }
    let qq = q.q() as u64;
    let deficit: u64 = distance_counts.iter().map(|&n| qq - n as u64).sum();
    let np = pts.len() as u64;
    let surplus = BigRational::new(BigInt::from(np) * BigInt::from(deficit), BigInt::from(qq));
    let k = if pts.is_empty() || spheres.is_empty() {
        SqrtRational::zero()
    } else {
        k_from_scaled_surplus(qq, d, np, spheres.len() as u64, BigInt::from(np * deficit))?
    };
    Ok(PinnedSystem {
        pins: pins.to_vec(),
        spheres,
        distance_counts,
        pin_incidences,
        surplus,
        k,
    })
}

/// `m = min(|P_0|, max(1, floor(c K_0 q^{(d-3)/2})))`.
pub fn pin_count_cap(q: FieldModulus, d: usize, available: usize, k0: &SqrtRational, c: &BigRational) -> usize {
    let qd = BigInt::from(q.q()).pow(d as u32 - 3);
    let scaled = k0.scale(c).mul_sqrt(&qd);
    (scaled.floor().max(1) as usize).min(available)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnedRun {
    /// `K_0` of the system pinned at every candidate.
    pub k0: SqrtRational,
    pub m: usize,
    pub system: PinnedSystem,
}

/// Pins every candidate to get `K_0`, caps the pin count at `m`, then draws
/// `m` pins from the candidates with the seeded generator.
pub fn pinned_run(q: FieldModulus, d: usize, candidates: &[Point], pts: &[Point], c: &BigRational, seed: u64) -> Result<PinnedRun> {
    let full = pinned_sphere_system(q, d, candidates, pts)?;
    let m = pin_count_cap(q, d, candidates.len(), &full.k, c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, candidates.len(), m).into_vec();
    idx.sort_unstable();
    let pins: Vec<Point> = idx.into_iter().map(|i| candidates[i].clone()).collect();
    Ok(PinnedRun {
        k0: full.k,
        m,
        system: pinned_sphere_system(q, d, &pins, pts)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DotProductSystem {
    /// `{H_{p,t}}` with multiplicities merged on canonical form.
    pub hyperplanes: HyperplaneMultiset,
    /// `|Π_p(Q)|` per pin.
    pub value_counts: Vec<usize>,
    pub pin_incidences: Vec<u64>,
    /// Number of `(p, t)` landing on an already produced hyperplane.
    pub merged: u64,
    pub surplus: BigRational,
    pub k: SqrtRational,
}

pub fn dot_product_system(q: FieldModulus, d: usize, pins: &[Point], pts: &[Point]) -> Result<DotProductSystem> {
    let mut all = Vec::new();
    let mut value_counts = Vec::new();
    let mut pin_incidences = Vec::new();
    for p in pins {
        if p.coords().iter().all(|x| x.is_zero()) {
            return Err(Error::ZeroPin);
        }
        let values: BTreeSet<FieldElement> = pts.iter().map(|x| q.dot(p.coords(), x.coords())).collect();
        let family: Vec<Hyperplane> = values
            .iter()
            .map(|&t| Hyperplane::new(q, p.coords().to_vec(), t))
            .collect::<Result<_>>()?;
        let inc: u64 = family.iter().map(|h| richness(q, pts, h)).sum();
        assert_eq!(inc, pts.len() as u64, "each point lies on exactly one level set per pin");
        value_counts.push(values.len());
        pin_incidences.push(inc);
        all.extend(family);
    }
    let total = all.len() as u64;
    let hyperplanes = HyperplaneMultiset::from_hyperplanes(all);
    let merged = total - hyperplanes.support_len() as u64;
    let qq = q.q() as u64;
    let np = pts.len() as u64;
    let deficit: u64 = value_counts.iter().map(|&n| qq - n as u64).sum();
    let surplus = BigRational::new(BigInt::from(np) * BigInt::from(deficit), BigInt::from(qq));
    let k = if pts.is_empty() || total == 0 {
        SqrtRational::zero()
    } else {
        k_from_scaled_surplus(qq, d, np, total, BigInt::from(np * deficit))?
    };
    Ok(DotProductSystem {
        hyperplanes,
        value_counts,
        pin_incidences,
        merged,
        surplus,
        k,
    })
}

/// Incidences of a hyperplane multiset, counted with multiplicity.
pub fn multiset_incidences(q: FieldModulus, pts: &[Point], ms: &HyperplaneMultiset) -> u64 {
    ms.entries()
        .iter()
        .map(|MultisetEntry { hyperplane, multiplicity, .. }| multiplicity * richness(q, pts, hyperplane))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Concentration {
    Concentrated,
    NonConcentrated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub status: Concentration,
    pub k: SqrtRational,
    /// `|P|^{1 - eta}`.
    pub size_floor: f64,
    pub certificate: Certificate,
}

/// Concentrated when extraction finds `F` with `deg F <= D` and
/// `|P'| >= |P|^{1 - eta}`.
pub fn stability_experiment(c: &Config, max_degree: u32, eta: f64, opts: &ExtractOptions) -> StabilityReport {
    let cert = extract_certificate(c, opts).certificate;
    let size_floor = (c.points().len() as f64).powf(1.0 - eta);
    let concentrated = cert.case != CaseTag::NoSignal
        && cert.f_degree() <= max_degree
        && cert.points.len() as f64 >= size_floor;
    StabilityReport {
        status: if concentrated {
            Concentration::Concentrated
        } else {
            Concentration::NonConcentrated
        },
        k: near_extremality_k(c).unwrap_or_else(|_| SqrtRational::zero()),
        size_floor,
        certificate: cert,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AmbientSpace;

    fn f(q: u64) -> FieldModulus {
        FieldModulus::new(q).unwrap()
    }

    #[test]
    fn distance_set_examples() {
        let q = f(3);
        let o = Point::from_i64(q, &[0, 0, 0]);
        assert_eq!(pinned_distance_set(q, &o, std::slice::from_ref(&o)), BTreeSet::from([q.zero()]));
        let plane: Vec<Point> = (0..9).map(|i| Point::from_i64(q, &[i / 3, i % 3, 0])).collect();
        assert_eq!(pinned_distance_set(q, &o, &plane).len(), 3);
    }

    #[test]
    fn single_pin_surplus() {
        let q = f(5);
        let pts: Vec<Point> = (0..5).map(|i| Point::from_i64(q, &[i, 0, 0])).collect();
        let p = Point::from_i64(q, &[0, 0, 0]);
        let sys = pinned_sphere_system(q, 3, &[p], &pts).unwrap();
        // squares mod 5 are {0, 1, 4}: t = 2 missing values
        assert_eq!(sys.distance_counts, vec![3]);
        assert_eq!(sys.surplus, BigRational::new(10.into(), 5.into()));
    }

    #[test]
    fn dot_product_axis_pin() {
        let q = f(5);
        let space = AmbientSpace::new(q, 3).unwrap();
        let pts: Vec<Point> = space.points().unwrap().collect();
        let e1 = Point::from_i64(q, &[1, 0, 0]);
        let sys = dot_product_system(q, 3, &[e1], &pts).unwrap();
        assert_eq!(sys.hyperplanes.support_len(), 5);
        assert!(sys.hyperplanes.support().all(|h| h.normal() == Point::from_i64(q, &[1, 0, 0]).coords()));
        assert!(sys.surplus == BigRational::from_integer(0.into()));
        let zero = Point::from_i64(q, &[0, 0, 0]);
        assert!(matches!(dot_product_system(q, 3, &[zero], &pts), Err(Error::ZeroPin)));
    }

    #[test]
    fn proportional_pins_merge() {
        let q = f(5);
        let pts = vec![Point::from_i64(q, &[1, 2, 3]), Point::from_i64(q, &[0, 1, 1])];
        let a = Point::from_i64(q, &[1, 1, 0]);
        let b = Point::from_i64(q, &[2, 2, 0]);
        let sys = dot_product_system(q, 3, &[a, b], &pts).unwrap();
        assert_eq!(sys.merged, 2);
        assert!(sys.hyperplanes.entries().iter().all(|e| e.multiplicity == 2));
    }
}
