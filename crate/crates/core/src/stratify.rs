//! Dyadic stratification of sphere-pair overlaps, persistent pairs,
//! heavy-layer selection and degree regularization.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::exact::SqrtRational;
use crate::field::FieldModulus;
use crate::geometry::{radical_hyperplane, Hyperplane, Point};
use crate::incidence::{Config, IncidenceTable};
use crate::multiset::{richness, HyperplaneMultiset, SpherePair};

/// `floor(log2 v)` for `v >= 1`.
pub fn dyadic_index(v: u64) -> u32 {
    debug_assert!(v > 0);
    63 - v.leading_zeros()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DyadicLayers {
    /// `j -> [(a, b, |P ∩ S_a ∩ S_b|)]` with `2^j <= overlap < 2^{j+1}`.
    pub layers: BTreeMap<u32, Vec<(usize, usize, u64)>>,
    /// Non-degenerate ordered pairs with empty overlap.
    pub zero_pairs: u64,
    /// Ordered pairs with equal centers, excluded from the layers.
    pub degenerate_pairs: u64,
}

impl DyadicLayers {
    pub fn mass(&self) -> u64 {
        self.layers
            .values()
            .flat_map(|v| v.iter().map(|t| t.2))
            .sum()
    }

    pub fn pair_count(&self) -> u64 {
        self.layers.values().map(|v| v.len() as u64).sum()
    }

    /// Pair counts per layer.
    pub fn histogram(&self) -> BTreeMap<u32, u64> {
        self.layers.iter().map(|(&j, v)| (j, v.len() as u64)).collect()
    }
}

pub fn stratify(c: &Config) -> DyadicLayers {
    stratify_with(c, &c.incidence_table())
}

pub fn stratify_with(c: &Config, t: &IncidenceTable) -> DyadicLayers {
    let ns = c.spheres().len();
    let mut out = DyadicLayers::default();
    for a in 0..ns {
        for b in 0..ns {
            if a == b {
                continue;
            }
            if c.spheres()[a].center == c.spheres()[b].center {
                out.degenerate_pairs += 1;
                continue;
            }
            let ov = t.overlap(a, b);
            if ov == 0 {
                out.zero_pairs += 1;
            } else {
                out.layers.entry(dyadic_index(ov)).or_default().push((a, b, ov));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowLayerMass {
    pub j0: u32,
    pub mass: u64,
    pub bound: u128,
    pub holds: bool,
}

/// `sum_{j < j0} sum_{(S,S') in P_j} |P ∩ H(S,S')|` against `2^{j0} |S|^2`.
///
/// The layers are indexed by sphere overlap while the summand is the
/// richness of the bisector hyperplane. Nothing ties one to the other, so
/// the inequality is reported rather than asserted.
pub fn low_layer_mass(layers: &DyadicLayers, j0: u32, c: &Config) -> LowLayerMass {
    let q = c.space().q();
    let mut cache: HashMap<Hyperplane, u64> = HashMap::new();
    let mut mass = 0;
    for (_, pairs) in layers.layers.range(..j0) {
        for &(a, b, _) in pairs {
            let h = radical_hyperplane(q, &c.spheres()[a], &c.spheres()[b])
                .expect("layers hold non-degenerate pairs only");
            mass += *cache
                .entry(h)
                .or_insert_with_key(|h| richness(q, c.points(), h));
        }
    }
    let ns = c.spheres().len() as u128;
    let bound = (1u128 << j0) * ns * ns;
    LowLayerMass {
        j0,
        mass,
        bound,
        holds: mass as u128 <= bound,
    }
}

/// `lambda = c K q^{(d-1)/2}`.
pub fn persistence_threshold(q: FieldModulus, d: usize, k: &SqrtRational, c_const: &BigRational) -> SqrtRational {
    k.scale(c_const)
        .mul_sqrt(&BigInt::from(q.q()).pow(d as u32 - 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistentPairs {
    pub lambda: SqrtRational,
    pub pairs: Vec<SpherePair>,
}

pub fn persistent_pairs(c: &Config, k: &SqrtRational, c_const: &BigRational) -> PersistentPairs {
    let lambda = persistence_threshold(c.space().q(), c.space().d(), k, c_const);
    persistent_pairs_at(c, lambda)
}

/// Ordered non-degenerate pairs whose bisector carries at least `lambda`
/// points of `P`.
pub fn persistent_pairs_at(c: &Config, lambda: SqrtRational) -> PersistentPairs {
    let q = c.space().q();
    let ns = c.spheres().len();
    let mut cache: HashMap<Hyperplane, bool> = HashMap::new();
    let mut pairs = Vec::new();
    for a in 0..ns {
        for b in 0..ns {
            if a == b {
                continue;
            }
            let Some(h) = radical_hyperplane(q, &c.spheres()[a], &c.spheres()[b]) else {
                continue;
            };
            let rich = *cache
                .entry(h)
                .or_insert_with_key(|h| lambda.reached_by(richness(q, c.points(), h)));
            if rich {
                pairs.push((a, b));
            }
        }
    }
    PersistentPairs { lambda, pairs }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartnerProfile {
    /// Persistent partners per sphere (as first member of the pair).
    pub partners: Vec<u64>,
    pub threshold: u64,
    pub s0: Vec<usize>,
    pub s0_fraction: f64,
}

pub fn persistent_partner_profile(pp: &PersistentPairs, c: &Config, threshold: u64) -> PartnerProfile {
    let ns = c.spheres().len();
    let mut partners = vec![0u64; ns];
    for &(a, _) in &pp.pairs {
        partners[a] += 1;
    }
    let s0: Vec<usize> = (0..ns).filter(|&i| partners[i] >= threshold).collect();
    let s0_fraction = if ns == 0 { 0.0 } else { s0.len() as f64 / ns as f64 };
    PartnerProfile {
        partners,
        threshold,
        s0,
        s0_fraction,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeavyLayer {
    pub mu: u64,
    pub layer: u32,
    /// `2^j |Gamma_j|` for the selected layer.
    pub mass: u64,
    /// `sum_j 2^j |Gamma_j|`.
    pub total_mass: u64,
    pub nonempty_layers: usize,
}

/// Picks the dyadic layer maximizing `2^j |Gamma_j|`, larger `j` on ties.
/// Zero values carry no mass and are ignored.
pub fn heavy_layer_select(overlaps: &[u64]) -> Result<HeavyLayer> {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &v in overlaps.iter().filter(|&&v| v > 0) {
        *counts.entry(dyadic_index(v)).or_default() += 1;
    }
    if counts.is_empty() {
        return Err(Error::EmptyOverlaps);
    }
    let mut best = (0u32, 0u64);
    let mut total_mass = 0;
    for (&j, &n) in &counts {
        let m = n << j;
        total_mass += m;
        if m >= best.1 {
            best = (j, m);
        }
    }
    let nonempty_layers = counts.len();
    assert!(best.1 * nonempty_layers as u64 >= total_mass, "pigeonhole violated");
    Ok(HeavyLayer {
        mu: 1 << best.0,
        layer: best.0,
        mass: best.1,
        total_mass,
        nonempty_layers,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassRecord {
    pub kind: PassKind,
    pub mass_before: u64,
    pub mass_after: u64,
    pub buckets: usize,
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassKind {
    Points,
    Hyperplanes,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularizedConfig {
    /// Indices into the input point list.
    pub points: Vec<usize>,
    pub hyperplanes: HyperplaneMultiset,
    /// `M_1`: every retained point meets `[M_1, 2 M_1)` retained hyperplanes.
    pub degree_scale: u64,
    /// `lambda_1`: every retained hyperplane holds `[lambda_1, 2 lambda_1)` retained points.
    pub richness_scale: u64,
    /// Incidences between the input points and the input support.
    pub initial_mass: u64,
    pub passes: Vec<PassRecord>,
}

/// Keeps the dyadic bucket with the largest value sum; larger level on ties.
/// Zero values are dropped. Returns (kept indices, level, buckets, mass).
fn bucket_pass(values: &[u64]) -> Option<(Vec<usize>, u32, usize, u64)> {
    let mut mass: BTreeMap<u32, u64> = BTreeMap::new();
    for &v in values.iter().filter(|&&v| v > 0) {
        *mass.entry(dyadic_index(v)).or_default() += v;
    }
    let mut best: Option<(u32, u64)> = None;
    for (&j, &m) in &mass {
        if best.is_none_or(|(_, bm)| m >= bm) {
            best = Some((j, m));
        }
    }
    let (level, m) = best?;
    let kept = (0..values.len())
        .filter(|&i| values[i] > 0 && dyadic_index(values[i]) == level)
        .collect();
    Some((kept, level, mass.len(), m))
}

/// Alternates a point-degree pass and a hyperplane-richness pass until
/// neither removes anything, so both two-sided bounds hold for the final sets.
/// Degrees are counted against the geometric support.
pub fn regularize(q: FieldModulus, points: &[Point], ms: &HyperplaneMultiset) -> Result<RegularizedConfig> {
    if points.is_empty() || ms.is_empty() {
        return Err(Error::Degenerate("regularize needs points and hyperplanes".into()));
    }
    let support: Vec<&Hyperplane> = ms.support().collect();
    // inc[h] = sorted point indices on hyperplane h
    let inc: Vec<Vec<usize>> = support
        .iter()
        .map(|h| (0..points.len()).filter(|&i| h.contains(q, &points[i])).collect())
        .collect();
    let mut pts: Vec<usize> = (0..points.len()).collect();
    let mut hyps: Vec<usize> = (0..support.len()).collect();
    let mut passes = Vec::new();
    let mut initial_mass = None;
    let (mut m1, mut l1);
    loop {
        let mut alive = vec![false; points.len()];
        for &i in &pts {
            alive[i] = true;
        }
        let mut deg = vec![0u64; points.len()];
        for &h in &hyps {
            for &i in &inc[h] {
                if alive[i] {
                    deg[i] += 1;
                }
            }
        }
        let vals: Vec<u64> = pts.iter().map(|&i| deg[i]).collect();
        let before: u64 = vals.iter().sum();
        initial_mass.get_or_insert(before);
        let (kept, level, buckets, after) = bucket_pass(&vals)
            .ok_or_else(|| Error::Degenerate("no point meets a hyperplane".into()))?;
        assert!(after * buckets as u64 >= before, "point pass lost too much mass");
        passes.push(PassRecord {
            kind: PassKind::Points,
            mass_before: before,
            mass_after: after,
            buckets,
            level,
        });
        let changed_p = kept.len() != pts.len();
        pts = kept.into_iter().map(|k| pts[k]).collect();
        m1 = 1u64 << level;

        let mut alive = vec![false; points.len()];
        for &i in &pts {
            alive[i] = true;
        }
        let vals: Vec<u64> = hyps
            .iter()
            .map(|&h| inc[h].iter().filter(|&&i| alive[i]).count() as u64)
            .collect();
        let before: u64 = vals.iter().sum();
        let (kept, level, buckets, after) = bucket_pass(&vals)
            .ok_or_else(|| Error::Degenerate("no hyperplane keeps a point".into()))?;
        assert!(after * buckets as u64 >= before, "hyperplane pass lost too much mass");
        passes.push(PassRecord {
            kind: PassKind::Hyperplanes,
            mass_before: before,
            mass_after: after,
            buckets,
            level,
        });
        let changed_h = kept.len() != hyps.len();
        hyps = kept.into_iter().map(|k| hyps[k]).collect();
        l1 = 1u64 << level;
        if !changed_p && !changed_h {
            break;
        }
    }
    let keep: Vec<&Hyperplane> = hyps.iter().map(|&h| support[h]).collect();
    let hyperplanes = ms.retain(|e| keep.binary_search(&&e.hyperplane).is_ok());
    Ok(RegularizedConfig {
        points: pts,
        hyperplanes,
        degree_scale: m1,
        richness_scale: l1,
        initial_mass: initial_mass.unwrap_or(0),
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AmbientSpace, Sphere};
    use crate::incidence::energies;

    fn f(q: u64) -> FieldModulus {
        FieldModulus::new(q).unwrap()
    }

    #[test]
    fn heavy_layer_examples() {
        let h = heavy_layer_select(&[1, 1, 1, 1, 8]).unwrap();
        assert_eq!((h.layer, h.mu, h.mass), (3, 8, 8));
        let h = heavy_layer_select(&[5, 5, 5]).unwrap();
        assert_eq!((h.layer, h.mu), (2, 4));
        // tie 2 * 2^0 vs 1 * 2^1 -> larger j
        assert_eq!(heavy_layer_select(&[1, 1, 2]).unwrap().layer, 1);
        assert_eq!(heavy_layer_select(&[]), Err(Error::EmptyOverlaps));
        assert_eq!(heavy_layer_select(&[0, 0]), Err(Error::EmptyOverlaps));
    }

    #[test]
    fn single_overlap_is_layer_zero() {
        let q = f(5);
        let space = AmbientSpace::new(q, 3).unwrap();
        let p = Point::from_i64(q, &[1, 0, 0]);
        let s1 = Sphere::new(Point::from_i64(q, &[0, 0, 0]), q.elem(1));
        let s2 = Sphere::new(Point::from_i64(q, &[2, 0, 0]), q.elem(1));
        let c = Config::new(space, vec![p], vec![s1, s2]).unwrap();
        let l = stratify(&c);
        assert_eq!(l.layers.keys().copied().collect::<Vec<_>>(), vec![0]);
        assert_eq!(l.pair_count(), 2);
        assert_eq!(l.mass(), energies(&c).off_diagonal);
    }

    #[test]
    fn disjoint_and_concentric() {
        let q = f(5);
        let space = AmbientSpace::new(q, 3).unwrap();
        let c0 = Point::from_i64(q, &[0, 0, 0]);
        let s1 = Sphere::new(c0.clone(), q.elem(1));
        let s2 = Sphere::new(c0, q.elem(2));
        let pts = vec![Point::from_i64(q, &[1, 0, 0]), Point::from_i64(q, &[1, 1, 0])];
        let c = Config::new(space, pts, vec![s1, s2]).unwrap();
        let l = stratify(&c);
        assert!(l.layers.is_empty());
        assert_eq!(l.degenerate_pairs, 2);
        for j0 in 0..4 {
            assert_eq!(low_layer_mass(&l, j0, &c).mass, 0);
        }
    }

    #[test]
    fn k_zero_means_all_pairs_persistent() {
        let q = f(5);
        let space = AmbientSpace::new(q, 3).unwrap();
        let spheres = vec![
            Sphere::new(Point::from_i64(q, &[0, 0, 0]), q.elem(1)),
            Sphere::new(Point::from_i64(q, &[1, 0, 0]), q.elem(1)),
            Sphere::new(Point::from_i64(q, &[1, 0, 0]), q.elem(2)),
        ];
        let c = Config::new(space, vec![], spheres).unwrap();
        let pp = persistent_pairs(&c, &SqrtRational::zero(), &BigRational::new(1.into(), 4.into()));
        assert_eq!(pp.pairs, vec![(0, 1), (0, 2), (1, 0), (2, 0)]);
        let over = persistent_pairs_at(&c, SqrtRational::from_integer(26));
        assert!(over.pairs.is_empty());
    }

    #[test]
    fn regularize_uniform_is_identity() {
        let q = f(5);
        let pts = vec![Point::from_i64(q, &[0, 0, 0]), Point::from_i64(q, &[0, 1, 0])];
        let ms = HyperplaneMultiset::from_hyperplanes(vec![Hyperplane::from_i64(q, &[1, 0, 0], 0).unwrap()]);
        let r = regularize(q, &pts, &ms).unwrap();
        assert_eq!(r.points, vec![0, 1]);
        assert_eq!(r.hyperplanes, ms);
        assert_eq!((r.degree_scale, r.richness_scale), (1, 2));
    }

    #[test]
    fn regularize_keeps_heavy_bucket() {
        // one lonely point on a private hyperplane, many points on x1 = 0
        let q = f(5);
        let space = AmbientSpace::new(q, 3).unwrap();
        let big = Hyperplane::from_i64(q, &[1, 0, 0], 0).unwrap();
        let mut pts = big.points(&space).unwrap();
        pts.push(Point::from_i64(q, &[1, 1, 1]));
        let lonely = Hyperplane::from_i64(q, &[1, 0, 0], 1).unwrap();
        let ms = HyperplaneMultiset::from_hyperplanes(vec![big.clone(), lonely]);
        let r = regularize(q, &pts, &ms).unwrap();
        assert_eq!(r.points.len(), 25);
        assert_eq!(r.hyperplanes.support().collect::<Vec<_>>(), vec![&big]);
    }
}
