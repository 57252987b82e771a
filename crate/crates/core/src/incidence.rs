//! Point-sphere configurations, incidence counts, energies and K.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::SqrtRational;
use crate::geometry::{AmbientSpace, Point, Sphere};

/// A point set `P` and sphere family `S` in a fixed `F_q^d`.
/// Duplicates are dropped at construction, keeping first occurrences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    space: AmbientSpace,
    points: Vec<Point>,
    spheres: Vec<Sphere>,
}

impl Config {
    pub fn new(space: AmbientSpace, points: Vec<Point>, spheres: Vec<Sphere>) -> Result<Self> {
        for p in points.iter().chain(spheres.iter().map(|s| &s.center)) {
            space.check_point(p)?;
        }
        Ok(Config {
            space,
            points: dedup(points),
            spheres: dedup(spheres),
        })
    }

    pub fn space(&self) -> &AmbientSpace {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn spheres(&self) -> &[Sphere] {
        &self.spheres
    }

    pub fn incidence_table(&self) -> IncidenceTable {
        IncidenceTable::new(self)
    }
}

fn dedup<T: Clone + Eq + std::hash::Hash>(v: Vec<T>) -> Vec<T> {
    let mut seen = HashSet::with_capacity(v.len());
    v.into_iter().filter(|x| seen.insert(x.clone())).collect()
}

/// Membership bitsets, one row per sphere over the point indices.
#[derive(Debug, Clone)]
pub struct IncidenceTable {
    n_points: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl IncidenceTable {
    pub fn new(c: &Config) -> Self {
        let q = c.space.q();
        let n = c.points.len();
        let words = n.div_ceil(64);
        let rows = c
            .spheres
            .iter()
            .map(|s| {
                let mut row = vec![0u64; words];
                for (i, p) in c.points.iter().enumerate() {
                    if s.contains(q, p) {
                        row[i / 64] |= 1 << (i % 64);
                    }
                }
                row
            })
            .collect();
        IncidenceTable {
            n_points: n,
            words,
            rows,
        }
    }

    pub fn contains(&self, sphere: usize, point: usize) -> bool {
        self.rows[sphere][point / 64] >> (point % 64) & 1 == 1
    }

    pub fn sphere_degree(&self, s: usize) -> u64 {
        self.rows[s].iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn point_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.n_points];
        for row in &self.rows {
            for (i, d) in deg.iter_mut().enumerate() {
                *d += row[i / 64] >> (i % 64) & 1;
            }
        }
        deg
    }

    /// `|P ∩ S_a ∩ S_b|`.
    pub fn overlap(&self, a: usize, b: usize) -> u64 {
        (0..self.words)
            .map(|w| (self.rows[a][w] & self.rows[b][w]).count_ones() as u64)
            .sum()
    }

    /// `|P' ∩ S|` for a point subset given as a bitmask.
    pub fn restricted_degree(&self, s: usize, mask: &[u64]) -> u64 {
        self.rows[s]
            .iter()
            .zip(mask)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    pub fn words(&self) -> usize {
        self.words
    }
}

/// Bitmask over point indices.
pub fn point_mask(n_points: usize, idx: impl IntoIterator<Item = usize>) -> Vec<u64> {
    let mut m = vec![0u64; n_points.div_ceil(64)];
    for i in idx {
        m[i / 64] |= 1 << (i % 64);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceStats {
    pub incidences: u64,
    pub point_degrees: Vec<u64>,
    pub sphere_degrees: Vec<u64>,
    pub energy: u64,
    pub dual_energy: u64,
    pub off_diagonal: u64,
    /// Zero when the configuration is empty on either side.
    pub k: SqrtRational,
}

pub fn incidence_count(c: &Config) -> u64 {
    let t = c.incidence_table();
    (0..c.spheres.len()).map(|s| t.sphere_degree(s)).sum()
}

pub fn energies(c: &Config) -> IncidenceStats {
    energies_with(c, &c.incidence_table())
}

pub fn energies_with(c: &Config, t: &IncidenceTable) -> IncidenceStats {
    let point_degrees = t.point_degrees();
    let sphere_degrees: Vec<u64> = (0..c.spheres.len()).map(|s| t.sphere_degree(s)).collect();
    let incidences: u64 = sphere_degrees.iter().sum();
    let energy = point_degrees.iter().map(|d| d * d).sum();
    let dual_energy = sphere_degrees.iter().map(|d| d * d).sum();
    let ns = c.spheres.len();
    let mut off_diagonal = 0;
    for a in 0..ns {
        for b in a + 1..ns {
            off_diagonal += 2 * t.overlap(a, b);
        }
    }
    let k = k_from_counts(c.space.q().q() as u64, c.space.d(), c.points.len() as u64, ns as u64, incidences)
        .unwrap_or_else(|_| SqrtRational::zero());
    let stats = IncidenceStats {
        incidences,
        point_degrees,
        sphere_degrees,
        energy,
        dual_energy,
        off_diagonal,
        k,
    };
    debug_assert_eq!(stats.energy, stats.incidences + stats.off_diagonal);
    stats
}

/// `K = (I - |P||S|/q) / (q^{(d-1)/2} sqrt(|P||S|))`, clamped at zero.
///
/// The square is `(qI - |P||S|)^2 / (q^{d+1} |P||S|)`, which is rational.
pub fn k_from_counts(q: u64, d: usize, n_points: u64, n_spheres: u64, incidences: u64) -> Result<SqrtRational> {
    if n_points == 0 || n_spheres == 0 {
        return Err(Error::EmptyConfig {
            points: n_points as usize,
            spheres: n_spheres as usize,
        });
    }
    let surplus = BigInt::from(q) * BigInt::from(incidences) - BigInt::from(n_points) * BigInt::from(n_spheres);
    k_from_scaled_surplus(q, d, n_points, n_spheres, surplus)
}

/// K from `q * (I - |P||S|/q)` given directly; used where the surplus is
/// known in closed form.
pub fn k_from_scaled_surplus(q: u64, d: usize, n_points: u64, n_spheres: u64, scaled_surplus: BigInt) -> Result<SqrtRational> {
    if n_points == 0 || n_spheres == 0 {
        return Err(Error::EmptyConfig {
            points: n_points as usize,
            spheres: n_spheres as usize,
        });
    }
    if scaled_surplus <= BigInt::zero() {
        return Ok(SqrtRational::zero());
    }
    let den = BigInt::from(q).pow(d as u32 + 1) * BigInt::from(n_points) * BigInt::from(n_spheres);
    Ok(SqrtRational::from_square(BigRational::new(
        &scaled_surplus * &scaled_surplus,
        den,
    )))
}

pub fn near_extremality_k(c: &Config) -> Result<SqrtRational> {
    k_from_counts(
        c.space.q().q() as u64,
        c.space.d(),
        c.points.len() as u64,
        c.spheres.len() as u64,
        incidence_count(c),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyBoundReport {
    /// `E * |P|` and `I^2`.
    pub point_side: (u128, u128),
    /// `E* * |S|` and `I^2`.
    pub sphere_side: (u128, u128),
    pub point_holds: bool,
    pub sphere_holds: bool,
    /// K < 1: the inequalities still hold but say nothing about near-extremality.
    pub vacuous: bool,
}

pub fn energy_lower_bound_check(c: &Config) -> EnergyBoundReport {
    let s = energies(c);
    let i2 = (s.incidences as u128).pow(2);
    let point_side = (s.energy as u128 * c.points.len() as u128, i2);
    let sphere_side = (s.dual_energy as u128 * c.spheres.len() as u128, i2);
    EnergyBoundReport {
        point_side,
        sphere_side,
        point_holds: point_side.0 >= point_side.1,
        sphere_holds: sphere_side.0 >= sphere_side.1,
        vacuous: s.k < SqrtRational::from_integer(1),
    }
}
