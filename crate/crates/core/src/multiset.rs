//! Multisets of bisector hyperplanes, parallel classes, and the two
//! concentration steps run on them (popular offset, heavy subcollection).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::SqrtRational;
use crate::field::{FieldElement, FieldModulus};
use crate::geometry::{radical_hyperplane, Hyperplane, Point, ProjectiveDirection};
use crate::incidence::Config;

/// Ordered pair of sphere indices.
pub type SpherePair = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultisetEntry {
    pub hyperplane: Hyperplane,
    pub multiplicity: u64,
    /// Ordered sphere pairs whose bisector is this hyperplane.
    pub provenance: Vec<SpherePair>,
}

/// Support sorted by canonical hyperplane.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HyperplaneMultiset {
    entries: Vec<MultisetEntry>,
}

impl HyperplaneMultiset {
    pub fn from_entries(mut entries: Vec<MultisetEntry>) -> Self {
        entries.retain(|e| e.multiplicity > 0);
        entries.sort_by(|a, b| a.hyperplane.cmp(&b.hyperplane));
        HyperplaneMultiset { entries }
    }

    /// Multiset from bare hyperplanes, each with multiplicity one per listing.
    pub fn from_hyperplanes(hs: impl IntoIterator<Item = Hyperplane>) -> Self {
        let mut map: BTreeMap<Hyperplane, u64> = BTreeMap::new();
        for h in hs {
            *map.entry(h).or_default() += 1;
        }
        HyperplaneMultiset {
            entries: map
                .into_iter()
                .map(|(hyperplane, multiplicity)| MultisetEntry {
                    hyperplane,
                    multiplicity,
                    provenance: vec![],
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[MultisetEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|H|_mult`.
    pub fn mass(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// `|H|_geo`.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &Hyperplane> {
        self.entries.iter().map(|e| &e.hyperplane)
    }

    pub fn multiplicity(&self, h: &Hyperplane) -> u64 {
        self.entries
            .binary_search_by(|e| e.hyperplane.cmp(h))
            .map_or(0, |i| self.entries[i].multiplicity)
    }

    pub fn max_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity).max().unwrap_or(0)
    }

    pub fn retain(&self, mut keep: impl FnMut(&MultisetEntry) -> bool) -> Self {
        HyperplaneMultiset {
            entries: self.entries.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// `sum over the multiset of |P ∩ H|`, i.e. `sum m_H |P ∩ H|` on the support.
    pub fn weighted_richness(&self, q: FieldModulus, points: &[Point]) -> u64 {
        self.entries
            .iter()
            .map(|e| e.multiplicity * richness(q, points, &e.hyperplane))
            .sum()
    }
}

/// `|P ∩ H|`.
pub fn richness(q: FieldModulus, points: &[Point], h: &Hyperplane) -> u64 {
    points.iter().filter(|p| h.contains(q, p)).count() as u64
}

/// Bisector hyperplanes of the non-degenerate pairs, keeping those with at
/// least `lambda` points of `P`.
pub fn build_multiset(pairs: &[SpherePair], c: &Config, lambda: &SqrtRational) -> HyperplaneMultiset {
    let q = c.space().q();
    let mut map: BTreeMap<Hyperplane, Vec<SpherePair>> = BTreeMap::new();
    for &(a, b) in pairs {
        if let Some(h) = radical_hyperplane(q, &c.spheres()[a], &c.spheres()[b]) {
            map.entry(h).or_default().push((a, b));
        }
    }
    let entries = map
        .into_iter()
        .filter(|(h, _)| lambda.reached_by(richness(q, c.points(), h)))
        .map(|(hyperplane, provenance)| MultisetEntry {
            hyperplane,
            multiplicity: provenance.len() as u64,
            provenance,
        })
        .collect();
    HyperplaneMultiset { entries }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelClass {
    pub direction: ProjectiveDirection,
    pub offsets: BTreeMap<FieldElement, u64>,
    pub mass: u64,
}

/// Classes ordered by direction, and the direction set `N`.
pub fn parallel_classes(ms: &HyperplaneMultiset) -> (Vec<ParallelClass>, Vec<ProjectiveDirection>) {
    let mut by_dir: BTreeMap<ProjectiveDirection, BTreeMap<FieldElement, u64>> = BTreeMap::new();
    for e in &ms.entries {
        *by_dir
            .entry(e.hyperplane.direction())
            .or_default()
            .entry(e.hyperplane.offset())
            .or_default() += e.multiplicity;
    }
    let dirs = by_dir.keys().cloned().collect();
    let classes = by_dir
        .into_iter()
        .map(|(direction, offsets)| ParallelClass {
            mass: offsets.values().sum(),
            direction,
            offsets,
        })
        .collect();
    (classes, dirs)
}

/// The offset with the largest multiplicity; smallest offset on ties.
/// Always satisfies `m0 * q >= M`.
pub fn popular_offset(cls: &ParallelClass, q: FieldModulus) -> Result<(FieldElement, u64)> {
    if cls.mass == 0 {
        return Err(Error::EmptyClass);
    }
    let mut best: Option<(FieldElement, u64)> = None;
    for (&b, &m) in &cls.offsets {
        if best.is_none_or(|(_, bm)| m > bm) {
            best = Some((b, m));
        }
    }
    let (b0, m0) = best.ok_or(Error::EmptyClass)?;
    assert!(m0 * q.q() as u64 >= cls.mass, "pigeonhole violated");
    Ok((b0, m0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MassRetention {
    pub kept: HyperplaneMultiset,
    /// `M`.
    pub total: u64,
    pub retained: u64,
    /// `|H^geo|` of the input.
    pub support: usize,
    pub max_multiplicity: u64,
}

/// Keeps `{H : m_H >= M / (2 |H^geo|)}`.
pub fn mass_retention(ms: &HyperplaneMultiset) -> Result<MassRetention> {
    if ms.is_empty() {
        return Err(Error::EmptyMultiset);
    }
    let total = ms.mass();
    let support = ms.support_len();
    let kept = ms.retain(|e| 2 * support as u64 * e.multiplicity >= total);
    let retained = kept.mass();
    let max_multiplicity = ms.max_multiplicity();
    assert!(2 * retained >= total, "retained mass below half");
    assert!(support as u64 * max_multiplicity >= total, "support below M / m_max");
    Ok(MassRetention {
        kept,
        total,
        retained,
        support,
        max_multiplicity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AmbientSpace, Sphere};

    fn f(q: u64) -> FieldModulus {
        FieldModulus::new(q).unwrap()
    }

    fn h(q: FieldModulus, n: &[i64], b: i64) -> Hyperplane {
        Hyperplane::from_i64(q, n, b).unwrap()
    }

    #[test]
    fn popular_offset_examples() {
        let q = f(5);
        let mk = |ms: &[u64]| {
            let hs = ms
                .iter()
                .enumerate()
                .flat_map(|(b, &m)| std::iter::repeat_n(h(q, &[1, 0, 0], b as i64), m as usize));
            let (cls, _) = parallel_classes(&HyperplaneMultiset::from_hyperplanes(hs));
            cls.into_iter().next().unwrap()
        };
        assert_eq!(popular_offset(&mk(&[3, 1, 0, 0, 1]), q).unwrap(), (q.elem(0), 3));
        assert_eq!(popular_offset(&mk(&[1, 1, 1, 1, 1]), q).unwrap(), (q.elem(0), 1));
        assert_eq!(popular_offset(&mk(&[0, 0, 4, 0, 0]), q).unwrap(), (q.elem(2), 4));
        let empty = ParallelClass {
            direction: ProjectiveDirection::from_i64(q, &[1, 0, 0]).unwrap(),
            offsets: BTreeMap::new(),
            mass: 0,
        };
        assert_eq!(popular_offset(&empty, q), Err(Error::EmptyClass));
    }

    #[test]
    fn mass_retention_examples() {
        let q = f(5);
        let hs = [
            (h(q, &[1, 0, 0], 0), 8),
            (h(q, &[0, 1, 0], 0), 1),
            (h(q, &[0, 0, 1], 0), 1),
            (h(q, &[1, 1, 0], 0), 2),
        ];
        let ms = HyperplaneMultiset::from_entries(
            hs.iter()
                .map(|(hp, m)| MultisetEntry {
                    hyperplane: hp.clone(),
                    multiplicity: *m,
                    provenance: vec![],
                })
                .collect(),
        );
        let r = mass_retention(&ms).unwrap();
        assert_eq!((r.total, r.retained, r.kept.support_len()), (12, 10, 2));
        let mut kept: Vec<u64> = r.kept.entries().iter().map(|e| e.multiplicity).collect();
        kept.sort();
        assert_eq!(kept, vec![2, 8]);

        let uniform = HyperplaneMultiset::from_hyperplanes(vec![h(q, &[1, 0, 0], 1), h(q, &[0, 1, 0], 3)]);
        assert_eq!(mass_retention(&uniform).unwrap().kept, uniform);
        assert_eq!(mass_retention(&HyperplaneMultiset::default()), Err(Error::EmptyMultiset));
    }

    #[test]
    fn classes_and_directions() {
        let q = f(5);
        let ms = HyperplaneMultiset::from_hyperplanes(vec![
            h(q, &[1, 0, 0], 0),
            h(q, &[1, 0, 0], 1),
            h(q, &[0, 1, 0], 0),
        ]);
        let (cls, dirs) = parallel_classes(&ms);
        let mut sizes: Vec<usize> = cls.iter().map(|c| c.offsets.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        assert_eq!(dirs.len(), 2);
        assert!(parallel_classes(&HyperplaneMultiset::default()).0.is_empty());
    }

    #[test]
    fn reflected_pairs_share_one_bisector() {
        let q = f(7);
        let space = AmbientSpace::new(q, 3).unwrap();
        // reflection across x3 = 0
        let mut spheres = vec![];
        for (a, b, hgt, r) in [(1, 2, 1, 3), (0, 5, 2, 1), (6, 6, 3, 4)] {
            spheres.push(Sphere::new(Point::from_i64(q, &[a, b, hgt]), q.elem(r)));
            spheres.push(Sphere::new(Point::from_i64(q, &[a, b, -hgt]), q.elem(r)));
        }
        let pts: Vec<Point> = h(q, &[0, 0, 1], 0).points(&space).unwrap();
        let c = Config::new(space, pts, spheres).unwrap();
        let pairs = vec![(0, 1), (1, 0), (2, 3), (3, 2), (4, 5), (5, 4)];
        let ms = build_multiset(&pairs, &c, &SqrtRational::zero());
        assert_eq!(ms.support_len(), 1);
        assert_eq!(ms.entries()[0].hyperplane, h(q, &[0, 0, 1], 0));
        assert_eq!(ms.mass(), 6);
        assert_eq!(ms.entries()[0].provenance, pairs);
    }

    #[test]
    fn concentric_pairs_give_nothing() {
        let q = f(5);
        let space = AmbientSpace::new(q, 3).unwrap();
        let c0 = Point::from_i64(q, &[1, 1, 1]);
        let spheres = (0..3).map(|r| Sphere::new(c0.clone(), q.elem(r))).collect();
        let c = Config::new(space, vec![], spheres).unwrap();
        let ms = build_multiset(&[(0, 1), (1, 2), (2, 0)], &c, &SqrtRational::zero());
        assert!(ms.is_empty());
    }
}
