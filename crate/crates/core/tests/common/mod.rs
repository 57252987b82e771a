//! Brute-force oracles and shared fixtures. Everything here recomputes from
//! raw coordinates with plain `u64` arithmetic.

#![allow(dead_code)]

use std::collections::BTreeMap;

use fqrig::geometry::{Hyperplane, Point, Sphere};
use fqrig::generators::{generate, GeneratorKind, GeneratorSpec};
use fqrig::incidence::Config;

pub fn raw(p: &Point) -> Vec<u64> {
    p.coords().iter().map(|x| x.value() as u64).collect()
}

pub fn on_sphere(q: u64, x: &[u64], s: &Sphere) -> bool {
    let c = raw(&s.center);
    let v: u64 = x.iter().zip(&c).map(|(a, b)| (a + q - b) % q).map(|t| t * t % q).sum();
    v % q == s.r.value() as u64
}

pub fn on_hyperplane(q: u64, x: &[u64], h: &Hyperplane) -> bool {
    let v: u64 = x.iter().zip(h.normal()).map(|(a, n)| a * n.value() as u64 % q).sum();
    v % q == h.offset().value() as u64
}

pub fn q_of(c: &Config) -> u64 {
    c.space().q().q() as u64
}

/// `|P ∩ S|` per sphere.
pub fn brute_sphere_degrees(c: &Config) -> Vec<u64> {
    let q = q_of(c);
    let pts: Vec<Vec<u64>> = c.points().iter().map(raw).collect();
    c.spheres()
        .iter()
        .map(|s| pts.iter().filter(|x| on_sphere(q, x, s)).count() as u64)
        .collect()
}

pub fn brute_point_degrees(c: &Config) -> Vec<u64> {
    let q = q_of(c);
    c.points()
        .iter()
        .map(|p| {
            let x = raw(p);
            c.spheres().iter().filter(|s| on_sphere(q, &x, s)).count() as u64
        })
        .collect()
}

/// Sum over ordered distinct sphere pairs of `|P ∩ S ∩ S'|`.
pub fn brute_off_diagonal(c: &Config) -> u64 {
    let q = q_of(c);
    let mut total = 0;
    for p in c.points() {
        let x = raw(p);
        let k = c.spheres().iter().filter(|s| on_sphere(q, &x, s)).count() as u64;
        total += k * k.saturating_sub(1);
    }
    // cross-check by pairs on small inputs
    if c.spheres().len() <= 40 {
        let mut by_pairs = 0;
        for (a, sa) in c.spheres().iter().enumerate() {
            for (b, sb) in c.spheres().iter().enumerate() {
                if a != b {
                    by_pairs += c
                        .points()
                        .iter()
                        .filter(|p| on_sphere(q, &raw(p), sa) && on_sphere(q, &raw(p), sb))
                        .count() as u64;
                }
            }
        }
        assert_eq!(by_pairs, total);
    }
    total
}

/// All of `F_q^d`, lexicographic.
pub fn all_points(q: u64, d: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..q).map(move |t| {
                    let mut w = v.clone();
                    w.push(t);
                    w
                })
            })
            .collect();
    }
    out
}

/// Number of hyperplanes in `family` containing every point of `flat_pts`.
pub fn pointwise_multiplicity(q: u64, flat_pts: &[Vec<u64>], family: &[Hyperplane]) -> u64 {
    family
        .iter()
        .filter(|h| flat_pts.iter().all(|x| on_hyperplane(q, x, h)))
        .count() as u64
}

/// Polynomial as `exponents -> coefficient` with `u64` coefficients mod q.
pub type Poly = BTreeMap<Vec<u32>, u64>;

pub fn poly_mul(q: u64, a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let slot = out.entry(e).or_insert(0);
            *slot = (*slot + ca * cb) % q;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// `(<n, x> - b)^D` expanded.
pub fn linear_power(q: u64, h: &Hyperplane, degree: u32) -> Poly {
    let d = h.dim();
    let mut lin = Poly::new();
    for (i, n) in h.normal().iter().enumerate() {
        let mut e = vec![0; d];
        e[i] = 1;
        lin.insert(e, n.value() as u64);
    }
    lin.insert(vec![0; d], (q - h.offset().value() as u64) % q);
    lin.retain(|_, c| *c != 0);
    let mut acc = Poly::from([(vec![0; d], 1)]);
    for _ in 0..degree {
        acc = poly_mul(q, &acc, &lin);
    }
    acc
}

pub const DESK_Q: [u64; 3] = [5, 7, 11];

/// Uniform-random configurations at sizes `(q, q)`, `(q^2, q)` and `(q^2, q^2)`.
pub fn random_specs(seeds_per_cell: u64) -> Vec<GeneratorSpec> {
    let mut out = Vec::new();
    for q in DESK_Q {
        for (np, ns) in [(q, q), (q * q, q), (q * q, q * q)] {
            for seed in 0..seeds_per_cell {
                out.push(GeneratorSpec {
                    kind: GeneratorKind::UniformRandom,
                    q,
                    d: 3,
                    np: np as usize,
                    ns: ns as usize,
                    seed,
                    noise: 0.0,
                });
            }
        }
    }
    out
}

/// Every generator kind at desk scale, plus `d = 4` spot checks at q in {3, 5}.
pub fn kind_specs(seeds: u64) -> Vec<GeneratorSpec> {
    let mut out = Vec::new();
    for q in [3u64, 5, 7, 11, 13] {
        for kind in GeneratorKind::ALL {
            for seed in 0..seeds {
                out.push(GeneratorSpec {
                    kind,
                    q,
                    d: 3,
                    np: planted_size(kind, q, 3),
                    ns: (2 * q) as usize,
                    seed,
                    noise: if seed % 2 == 0 { 0.0 } else { 0.1 },
                });
            }
        }
    }
    for q in [3u64, 5] {
        for kind in GeneratorKind::ALL {
            for seed in 0..seeds {
                out.push(GeneratorSpec {
                    kind,
                    q,
                    d: 4,
                    np: planted_size(kind, q, 4),
                    ns: (2 * q) as usize,
                    seed,
                    noise: 0.0,
                });
            }
        }
    }
    out
}

/// `q^{d-1}`, or `q^{d-2}(q - 1)` on quadrics, which can be smaller than a hyperplane.
pub fn planted_size(kind: GeneratorKind, q: u64, d: u32) -> usize {
    match kind {
        GeneratorKind::QuadricPlanted => (q.pow(d - 2) * (q - 1)) as usize,
        _ => q.pow(d - 1) as usize,
    }
}

pub fn config(spec: &GeneratorSpec) -> Config {
    generate(spec).expect("fixture spec is valid").config
}
