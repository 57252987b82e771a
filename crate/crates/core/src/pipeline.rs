//! Certificate extraction: from a point-sphere configuration to a hyperplane
//! `H_0` with its linear form `F`, a structured point subset and a sphere
//! subfamily.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{rational_string, SqrtRational};
use crate::field::FieldModulus;
use crate::geometry::{flat_from_pair, Flat, Hyperplane, PairIntersection, Point, ProjectiveDirection};
use crate::incidence::{energies_with, point_mask, Config, IncidenceTable};
use crate::multiset::{
    build_multiset, mass_retention, parallel_classes, popular_offset, richness, HyperplaneMultiset,
};
use crate::poly::{affine_dichotomy, minimal_degree, DichotomyResult};
use crate::stratify::{heavy_layer_select, persistence_threshold, persistent_pairs_at, regularize, RegularizedConfig};

/// `J = #{(p, H, H') : H != H', p in H ∩ H'}`, counted over ordered pairs.
/// Asserts the identity `J = sum_p deg(p) (deg(p) - 1)`.
pub fn overlap_energy(q: FieldModulus, points: &[Point], support: &[Hyperplane]) -> u64 {
    let masks: Vec<Vec<u64>> = support
        .iter()
        .map(|h| point_mask(points.len(), (0..points.len()).filter(|&i| h.contains(q, &points[i]))))
        .collect();
    let mut triples = 0u64;
    for a in 0..masks.len() {
        for b in 0..masks.len() {
            if a != b {
                triples += masks[a]
                    .iter()
                    .zip(&masks[b])
                    .map(|(x, y)| (x & y).count_ones() as u64)
                    .sum::<u64>();
            }
        }
    }
    let by_degree: u64 = (0..points.len())
        .map(|i| {
            let d = masks.iter().filter(|m| m[i / 64] >> (i % 64) & 1 == 1).count() as u64;
            d * d.saturating_sub(1)
        })
        .sum();
    assert_eq!(triples, by_degree, "overlap energy identity");
    triples
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatProfile {
    /// `L -> m(L)`, the number of support hyperplanes containing `L`.
    pub flats: BTreeMap<Flat, u64>,
    /// Largest multiplicity and the smallest flat attaining it.
    pub max: Option<(Flat, u64)>,
    /// Per support hyperplane: (distinct flats `H ∩ H'`, non-parallel partners).
    pub fibers: Vec<(u64, u64)>,
    pub non_parallel_ordered_pairs: u64,
}

/// Flats cut out by non-parallel pairs of a hyperplane family.
///
/// Every hyperplane through `L` meets every other one in exactly `L`, so the
/// containing set is read off from the pairs producing `L`.
pub fn flat_profile(q: FieldModulus, support: &[Hyperplane]) -> FlatProfile {
    let n = support.len();
    let mut members: BTreeMap<Flat, BTreeSet<usize>> = BTreeMap::new();
    let mut per_h: Vec<BTreeSet<Flat>> = vec![BTreeSet::new(); n];
    let mut partners = vec![0u64; n];
    let mut non_parallel = 0;
    for a in 0..n {
        for b in a + 1..n {
            if let PairIntersection::Flat(l) = flat_from_pair(q, &support[a], &support[b]) {
                non_parallel += 2;
                partners[a] += 1;
                partners[b] += 1;
                per_h[a].insert(l.clone());
                per_h[b].insert(l.clone());
                let m = members.entry(l).or_default();
                m.insert(a);
                m.insert(b);
            }
        }
    }
    let flats: BTreeMap<Flat, u64> = members.into_iter().map(|(l, s)| (l, s.len() as u64)).collect();
    let mut max: Option<(Flat, u64)> = None;
    for (l, &m) in &flats {
        if max.as_ref().is_none_or(|(_, bm)| m > *bm) {
            max = Some((l.clone(), m));
        }
    }
    let pair_sum: u64 = flats.values().map(|m| m * (m - 1)).sum();
    assert_eq!(pair_sum, non_parallel, "flat multiplicities miscount pairs");
    let fibers: Vec<(u64, u64)> = per_h
        .iter()
        .zip(&partners)
        .map(|(s, &p)| (s.len() as u64, p))
        .collect();
    if let Some((_, m_max)) = &max {
        for &(distinct, p) in &fibers {
            assert!(distinct * m_max >= p, "fiber bound violated");
        }
    }
    FlatProfile {
        flats,
        max,
        fibers,
        non_parallel_ordered_pairs: non_parallel,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseSplit {
    /// Some flat lies in at least `B0 + 1` support hyperplanes.
    FlatConcentration { flat: Flat, pencil: Vec<Hyperplane> },
    DirectionalCoordination { directions: Vec<ProjectiveDirection> },
}

pub fn case_split(q: FieldModulus, support: &[Hyperplane], b0: u64) -> (CaseSplit, FlatProfile) {
    let profile = flat_profile(q, support);
    let split = match &profile.max {
        Some((l, m)) if *m > b0 => CaseSplit::FlatConcentration {
            flat: l.clone(),
            pencil: support
                .iter()
                .filter(|h| crate::geometry::flat_contained_in(q, l, h))
                .cloned()
                .collect(),
        },
        _ => {
            let dirs: BTreeSet<ProjectiveDirection> = support.iter().map(|h| h.direction()).collect();
            CaseSplit::DirectionalCoordination {
                directions: dirs.into_iter().collect(),
            }
        }
    };
    (split, profile)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Constant in the persistence scale `lambda = c K q^{(d-1)/2}`.
    pub c_const: BigRational,
    /// Flat-concentration threshold; `None` uses `max(2d, ceil K)`.
    pub b0: Option<u64>,
    /// Replaces the richness threshold entirely.
    pub lambda_override: Option<u64>,
    /// Also require richness at least `2|P|/q` and at least `d + 1`.
    pub richness_floor: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            c_const: BigRational::new(1.into(), 4.into()),
            b0: None,
            lambda_override: None,
            richness_floor: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    FlatConcentration,
    DirectionalCoordination,
    NoSignal,
}

/// `(exponents, coefficient)`.
pub type Term = (Vec<u32>, u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneRecord {
    pub normal: Vec<u32>,
    pub offset: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportRecord {
    pub normal: Vec<u32>,
    pub offset: u32,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aux {
    #[serde(rename = "R")]
    pub r: Option<Vec<Term>>,
    pub chart: Option<usize>,
    #[serde(rename = "D")]
    pub degree: Option<u32>,
    pub flags: Vec<String>,
    /// Augmented rows `[A | v]` of the witness flat.
    pub witness_flat: Option<Vec<Vec<u32>>>,
    /// `P_2`, the regularized point indices.
    #[serde(rename = "P2")]
    pub p2: Vec<usize>,
    /// The regularized hyperplane family with multiplicities.
    pub support: Vec<SupportRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "K")]
    pub k: f64,
    pub lambda1: u64,
    #[serde(rename = "M1")]
    pub m1: u64,
    pub mu: u64,
    #[serde(rename = "B0")]
    pub b0: u64,
    /// Exact `K^2` as `"num/den"`.
    #[serde(rename = "K_squared")]
    pub k_squared: String,
    /// Exact square of the richness threshold used.
    pub lambda_squared: String,
    /// `ceil(lambda1 / 2)`; `|P'|` must reach it.
    pub point_threshold: u64,
    /// Dyadic per-sphere threshold defining `S'`.
    pub sphere_threshold: u64,
    #[serde(rename = "J")]
    pub overlap_energy: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub case: CaseTag,
    #[serde(rename = "F")]
    pub f: Vec<Term>,
    pub hyperplane: Option<HyperplaneRecord>,
    pub points: Vec<usize>,
    pub spheres: Vec<usize>,
    pub aux: Aux,
    pub params: Params,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::Error::Invalid(format!("certificate: {e}")))
    }

    /// Degree of `F`; zero for NoSignal.
    pub fn f_degree(&self) -> u32 {
        self.f.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }
}

/// Terms of `<n, x> - b` in graded order: constant first, then `x_1 .. x_d`.
pub fn linear_form_terms(q: FieldModulus, h: &Hyperplane) -> Vec<Term> {
    let d = h.dim();
    let mut out = Vec::new();
    if !h.offset().is_zero() {
        out.push((vec![0; d], q.neg(h.offset()).value()));
    }
    for (i, n) in h.normal().iter().enumerate() {
        if !n.is_zero() {
            let mut e = vec![0; d];
            e[i] = 1;
            out.push((e, n.value()));
        }
    }
    out
}

fn record(h: &Hyperplane) -> HyperplaneRecord {
    HyperplaneRecord {
        normal: h.normal().iter().map(|x| x.value()).collect(),
        offset: h.offset().value(),
    }
}

/// Everything computed on the way to the certificate.
#[derive(Debug, Clone)]
pub struct Trace {
    pub k: SqrtRational,
    pub lambda_persistence: SqrtRational,
    pub lambda: SqrtRational,
    pub persistent_pairs: usize,
    pub multiset: HyperplaneMultiset,
    pub regularized: Option<RegularizedConfig>,
    /// After mass retention and the rich-support restriction.
    pub h2: HyperplaneMultiset,
    pub profile: Option<FlatProfile>,
    pub split: Option<CaseSplit>,
    pub dichotomy: Option<DichotomyResult>,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub certificate: Certificate,
    pub trace: Trace,
}

fn no_signal(k: &SqrtRational, lambda: &SqrtRational, b0: u64, reason: &str) -> Certificate {
    Certificate {
        case: CaseTag::NoSignal,
        f: vec![],
        hyperplane: None,
        points: vec![],
        spheres: vec![],
        aux: Aux {
            r: None,
            chart: None,
            degree: None,
            flags: vec![reason.to_string()],
            witness_flat: None,
            p2: vec![],
            support: vec![],
        },
        params: Params {
            k: k.to_f64(),
            lambda1: 0,
            m1: 0,
            mu: 0,
            b0,
            k_squared: rational_string(k.square()),
            lambda_squared: rational_string(lambda.square()),
            point_threshold: 0,
            sphere_threshold: 0,
            overlap_energy: 0,
        },
    }
}

/// Largest power of two `t` with `2 * sum_{v >= t} v >= sum v`; 1 when the sum is 0.
pub fn markov_threshold(values: &[u64]) -> u64 {
    let total: u64 = values.iter().sum();
    if total == 0 {
        return 1;
    }
    let mut t = 1u64;
    loop {
        let next = t * 2;
        let kept: u64 = values.iter().filter(|&&v| v >= next).sum();
        if 2 * kept >= total {
            t = next;
        } else {
            return t;
        }
    }
}

/// The richness threshold the pipeline applies.
pub fn effective_lambda(c: &Config, k: &SqrtRational, opts: &ExtractOptions) -> (SqrtRational, SqrtRational) {
    let q = c.space().q();
    let d = c.space().d();
    let persistence = persistence_threshold(q, d, k, &opts.c_const);
    if let Some(l) = opts.lambda_override {
        return (persistence, SqrtRational::from_integer(l));
    }
    let mut lambda = persistence.clone();
    if opts.richness_floor {
        let random = BigRational::new((2 * c.points().len() as u64).into(), (q.q() as u64).into());
        lambda = lambda
            .max(SqrtRational::from_rational(&random))
            .max(SqrtRational::from_integer(d as u64 + 1));
    }
    (persistence, lambda)
}

pub fn extract_certificate(c: &Config, opts: &ExtractOptions) -> Extraction {
    let table = c.incidence_table();
    extract_with(c, &table, opts)
}

pub fn extract_with(c: &Config, table: &IncidenceTable, opts: &ExtractOptions) -> Extraction {
    let q = c.space().q();
    let d = c.space().d();
    let stats = energies_with(c, table);
    let k = stats.k.clone();
    let b0 = opts.b0.unwrap_or_else(|| (2 * d as u64).max(k.ceil()));
    let (lambda_persistence, lambda) = effective_lambda(c, &k, opts);
    let mut trace = Trace {
        k: k.clone(),
        lambda_persistence,
        lambda: lambda.clone(),
        persistent_pairs: 0,
        multiset: HyperplaneMultiset::default(),
        regularized: None,
        h2: HyperplaneMultiset::default(),
        profile: None,
        split: None,
        dichotomy: None,
    };
    let done = |cert, trace| Extraction {
        certificate: cert,
        trace,
    };
    if c.points().is_empty() || c.spheres().is_empty() {
        return done(no_signal(&k, &lambda, b0, "empty-config"), trace);
    }

    let pp = persistent_pairs_at(c, lambda.clone());
    trace.persistent_pairs = pp.pairs.len();
    let ms = build_multiset(&pp.pairs, c, &lambda);
    trace.multiset = ms.clone();
    if ms.is_empty() {
        return done(no_signal(&k, &lambda, b0, "empty-multiset"), trace);
    }

    let reg = match regularize(q, c.points(), &ms) {
        Ok(r) => r,
        Err(_) => return done(no_signal(&k, &lambda, b0, "degenerate-regularization"), trace),
    };
    trace.regularized = Some(reg.clone());
    let p2: Vec<usize> = reg.points.clone();
    let p2_points: Vec<Point> = p2.iter().map(|&i| c.points()[i].clone()).collect();
    let lambda1 = reg.richness_scale;
    let m1 = reg.degree_scale;

    let retained = mass_retention(&reg.hyperplanes).expect("regularized family is nonempty").kept;
    let h2 = retained.retain(|e| 2 * richness(q, &p2_points, &e.hyperplane) >= lambda1);
    trace.h2 = h2.clone();
    if h2.is_empty() {
        return done(no_signal(&k, &lambda, b0, "empty-rich-support"), trace);
    }
    let support: Vec<Hyperplane> = h2.support().cloned().collect();

    let masks: Vec<Vec<u64>> = support
        .iter()
        .map(|h| point_mask(p2_points.len(), (0..p2_points.len()).filter(|&i| h.contains(q, &p2_points[i]))))
        .collect();
    let mut pair_overlaps = Vec::new();
    for a in 0..masks.len() {
        for b in 0..masks.len() {
            if a != b {
                pair_overlaps.push(
                    masks[a]
                        .iter()
                        .zip(&masks[b])
                        .map(|(x, y)| (x & y).count_ones() as u64)
                        .sum(),
                );
            }
        }
    }
    let mu = heavy_layer_select(&pair_overlaps).map_or(0, |h| h.mu);
    let j_energy = overlap_energy(q, &p2_points, &support);

    let (split, profile) = case_split(q, &support, b0);
    trace.profile = Some(profile);
    trace.split = Some(split.clone());

    let mut flags = Vec::new();
    let (case, h0, r, chart, degree, witness) = match &split {
        CaseSplit::FlatConcentration { flat, pencil } => {
            let mut best: Option<(&Hyperplane, u64)> = None;
            for h in pencil {
                let rich = richness(q, &p2_points, h);
                if best.is_none_or(|(_, br)| rich > br) {
                    best = Some((h, rich));
                }
            }
            let h0 = best.expect("pencil is nonempty").0.clone();
            let rows = flat
                .augmented_rows()
                .iter()
                .map(|r| r.iter().map(|x| x.value()).collect())
                .collect();
            (CaseTag::FlatConcentration, h0, None, None, None, Some(rows))
        }
        CaseSplit::DirectionalCoordination { directions } => {
            let deg = minimal_degree(directions.len() as u64, d);
            if deg as u64 >= q.q() as u64 {
                flags.push("interpolation-trivial".to_string());
            }
            let mut chart = 1;
            let mut best = 0;
            for j in 1..=d {
                let n = directions.iter().filter(|u| !u.coords()[j - 1].is_zero()).count();
                if n > best {
                    best = n;
                    chart = j;
                }
            }
            let mut r_terms = None;
            match affine_dichotomy(q, directions, chart, deg) {
                Ok(a) => {
                    if let Some(h) = &a.homogenized {
                        let class = if h.total_degree() == Some(1) {
                            "affine obstruction"
                        } else {
                            "general algebraic obstruction"
                        };
                        flags.push(class.to_string());
                        r_terms = Some(h.serialize_terms());
                    } else {
                        flags.push("large".to_string());
                    }
                    trace.dichotomy = Some(a.result);
                }
                Err(e) => flags.push(format!("dichotomy-error: {e}")),
            }
            let (classes, _) = parallel_classes(&h2);
            let mut best_cls = &classes[0];
            for cls in &classes[1..] {
                if cls.mass > best_cls.mass {
                    best_cls = cls;
                }
            }
            let (b0_off, _) = popular_offset(best_cls, q).expect("class has mass");
            let h0 = Hyperplane::new(q, best_cls.direction.coords().to_vec(), b0_off).expect("direction is nonzero");
            (CaseTag::DirectionalCoordination, h0, r_terms, Some(chart), Some(deg), None)
        }
    };

    let p_prime: Vec<usize> = p2.iter().copied().filter(|&i| h0.contains(q, &c.points()[i])).collect();
    let point_threshold = lambda1.div_ceil(2);
    assert!(p_prime.len() as u64 >= point_threshold, "structured subset below threshold");
    let f = linear_form_terms(q, &h0);
    for &i in &p_prime {
        assert!(h0.eval(q, &c.points()[i]).is_zero());
    }

    let mask = point_mask(c.points().len(), p_prime.iter().copied());
    let per_sphere: Vec<u64> = (0..c.spheres().len()).map(|s| table.restricted_degree(s, &mask)).collect();
    let t = markov_threshold(&per_sphere);
    let spheres: Vec<usize> = (0..per_sphere.len()).filter(|&s| per_sphere[s] >= t).collect();

    let support_records = reg
        .hyperplanes
        .entries()
        .iter()
        .map(|e| SupportRecord {
            normal: e.hyperplane.normal().iter().map(|x| x.value()).collect(),
            offset: e.hyperplane.offset().value(),
            multiplicity: e.multiplicity,
        })
        .collect();

    let cert = Certificate {
        case,
        f,
        hyperplane: Some(record(&h0)),
        points: p_prime,
        spheres,
        aux: Aux {
            r,
            chart,
            degree,
            flags,
            witness_flat: witness,
            p2,
            support: support_records,
        },
        params: Params {
            k: k.to_f64(),
            lambda1,
            m1,
            mu,
            b0,
            k_squared: rational_string(k.square()),
            lambda_squared: rational_string(lambda.square()),
            point_threshold,
            sphere_threshold: t,
            overlap_energy: j_energy,
        },
    };
    done(cert, trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetentionReport {
    /// `I(P', S)` counted per sphere.
    pub incidences: u64,
    /// `sum_{p in P'} deg_S(p)`.
    pub degree_sum: u64,
    pub identity_holds: bool,
    /// Whether every `p in P_2` has sphere degree in `[M_1, 2 M_1)`.
    pub sphere_degrees_in_bucket: bool,
    /// `M_1 |P'| <= I(P', S) < 2 M_1 |P'|` when the above holds.
    pub sphere_bucket_bounds: Option<bool>,
    /// Same two-sided bound for hyperplane degrees over the regularized family.
    pub hyperplane_bucket_bounds: bool,
    pub energy_ratio: f64,
    pub size_ratio: f64,
}

pub fn retention_check(c: &Config, cert: &Certificate) -> RetentionReport {
    let q = c.space().q();
    let table = c.incidence_table();
    let deg = table.point_degrees();
    let mask = point_mask(c.points().len(), cert.points.iter().copied());
    let incidences: u64 = (0..c.spheres().len()).map(|s| table.restricted_degree(s, &mask)).sum();
    let degree_sum: u64 = cert.points.iter().map(|&i| deg[i]).sum();
    let m1 = cert.params.m1;
    let n = cert.points.len() as u64;
    let in_bucket = !cert.aux.p2.is_empty() && cert.aux.p2.iter().all(|&i| deg[i] >= m1 && deg[i] < 2 * m1);
    let sphere_bucket_bounds = in_bucket.then(|| m1 * n <= incidences && incidences < 2 * m1 * n.max(1));

    let support: Vec<Hyperplane> = cert
        .aux
        .support
        .iter()
        .map(|s| {
            Hyperplane::new(q, s.normal.iter().map(|&x| q.elem(x as i64)).collect(), q.elem(s.offset as i64))
                .expect("support hyperplane")
        })
        .collect();
    let hdeg: u64 = cert
        .points
        .iter()
        .map(|&i| support.iter().filter(|h| h.contains(q, &c.points()[i])).count() as u64)
        .sum();
    let hyperplane_bucket_bounds = m1 * n <= hdeg && (n == 0 || hdeg < 2 * m1 * n);

    let e_sub: u64 = cert.points.iter().map(|&i| deg[i] * deg[i]).sum();
    let e_p2: u64 = cert.aux.p2.iter().map(|&i| deg[i] * deg[i]).sum();
    let energy_ratio = if e_p2 == 0 { 0.0 } else { e_sub as f64 / e_p2 as f64 };
    let size_ratio = if cert.aux.p2.is_empty() {
        0.0
    } else {
        n as f64 / cert.aux.p2.len() as f64
    };
    RetentionReport {
        incidences,
        degree_sum,
        identity_holds: incidences == degree_sum,
        sphere_degrees_in_bucket: in_bucket,
        sphere_bucket_bounds,
        hyperplane_bucket_bounds,
        energy_ratio,
        size_ratio,
    }
}
