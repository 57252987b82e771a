//! Seeded configuration generators.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a spec
//! fixes its output exactly.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldModulus};
use crate::geometry::{quad_norm, AmbientSpace, Hyperplane, Point, Sphere};
use crate::incidence::Config;

pub const PRNG_NAME: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    UniformRandom,
    HyperplanePlanted,
    QuadricPlanted,
    ReflectedPairs,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::UniformRandom,
        GeneratorKind::HyperplanePlanted,
        GeneratorKind::QuadricPlanted,
        GeneratorKind::ReflectedPairs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::UniformRandom => "uniform-random",
            GeneratorKind::HyperplanePlanted => "hyperplane-planted",
            GeneratorKind::QuadricPlanted => "quadric-planted",
            GeneratorKind::ReflectedPairs => "reflected-pairs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("kind: unknown generator '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub q: u64,
    pub d: usize,
    pub np: usize,
    pub ns: usize,
    pub seed: u64,
    /// Fraction of points placed off the planted structure.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub config: Config,
    /// `H*` for the hyperplane kinds.
    pub planted_hyperplane: Option<Hyperplane>,
    /// `r_0` for quadric-planted, with points on `||x|| = r_0`.
    pub planted_radius: Option<FieldElement>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{field}: {msg}"))
}

fn random_elem(q: FieldModulus, rng: &mut ChaCha8Rng) -> FieldElement {
    q.elem(rng.random_range(0..q.q() as i64))
}

fn random_point(space: &AmbientSpace, rng: &mut ChaCha8Rng) -> Point {
    Point((0..space.d()).map(|_| random_elem(space.q(), rng)).collect())
}

/// Random hyperplane whose normal has nonzero norm, so reflection across it
/// is defined.
fn random_reflecting_hyperplane(space: &AmbientSpace, rng: &mut ChaCha8Rng) -> Hyperplane {
    let q = space.q();
    loop {
        let n: Vec<FieldElement> = random_point(space, rng).0;
        if n.iter().all(|x| x.is_zero()) || quad_norm(q, &n).is_zero() {
            continue;
        }
        let b = random_elem(q, rng);
        return Hyperplane::new(q, n, b).expect("nonzero normal");
    }
}

/// Mirror image of `c` across `<n, x> = b`: `c - 2 t n` with `t = (<n,c> - b) / ||n||`.
pub fn reflect(q: FieldModulus, h: &Hyperplane, c: &Point) -> Point {
    let n = h.normal();
    let t = q
        .div(h.eval(q, c), quad_norm(q, n))
        .expect("reflecting hyperplane has a non-isotropic normal");
    let two_t = q.add(t, t);
    Point(c.0.iter().zip(n).map(|(&x, &ni)| q.sub(x, q.mul(two_t, ni))).collect())
}

fn pick<T: Clone>(pool: &[T], amount: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let mut idx = sample(rng, pool.len(), amount).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i].clone()).collect()
}

/// `np` points, `round(noise * np)` of them off the structure.
fn planted_points(
    space: &AmbientSpace,
    np: usize,
    noise: f64,
    on: impl Fn(&Point) -> bool,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>> {
    let (inside, outside): (Vec<Point>, Vec<Point>) = space.points()?.partition(|p| on(p));
    let n_off = (noise * np as f64).round() as usize;
    let n_on = np - n_off;
    if n_on > inside.len() {
        return Err(invalid("np", format!("{n_on} structured points requested, only {} exist", inside.len())));
    }
    if n_off > outside.len() {
        return Err(invalid("noise", format!("{n_off} off-structure points requested, only {} exist", outside.len())));
    }
    let mut pts = pick(&inside, n_on, rng);
    pts.extend(pick(&outside, n_off, rng));
    Ok(pts)
}

fn uniform_spheres(space: &AmbientSpace, ns: usize, taken: &BTreeSet<Sphere>, rng: &mut ChaCha8Rng) -> Result<Vec<Sphere>> {
    let q = space.q();
    let total = space.size() * q.q() as u128;
    if (ns + taken.len()) as u128 > total {
        return Err(invalid("ns", format!("{ns} spheres requested, only {total} exist")));
    }
    let mut out = Vec::with_capacity(ns);
    let mut seen = taken.clone();
    if total <= 4 * (ns + taken.len()) as u128 {
        // dense request: sample indices
        let idx = sample(rng, total as usize, ns + taken.len()).into_vec();
        for i in idx {
            let s = Sphere::new(space.point_at(i as u64 / q.q() as u64), q.elem((i as u64 % q.q() as u64) as i64));
            if out.len() < ns && seen.insert(s.clone()) {
                out.push(s);
            }
        }
        return Ok(out);
    }
    while out.len() < ns {
        let s = Sphere::new(random_point(space, rng), random_elem(q, rng));
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    Ok(out)
}

/// `pairs` sphere pairs `S(c, r), S(c', r)` with `c'` the mirror of `c` across `h`.
fn reflected_spheres(space: &AmbientSpace, h: &Hyperplane, pairs: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Sphere>> {
    let q = space.q();
    let off = space.size() - space.size() / q.q() as u128;
    let available = off / 2 * q.q() as u128;
    if pairs as u128 > available {
        return Err(invalid("ns", format!("{pairs} reflected pairs requested, only {available} exist")));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(2 * pairs);
    while out.len() < 2 * pairs {
        let c = random_point(space, rng);
        if h.contains(q, &c) {
            continue;
        }
        let r = random_elem(q, rng);
        let a = Sphere::new(c.clone(), r);
        let b = Sphere::new(reflect(q, h, &c), r);
        if seen.contains(&a) || seen.contains(&b) {
            continue;
        }
        seen.insert(a.clone());
        seen.insert(b.clone());
        out.push(a);
        out.push(b);
    }
    Ok(out)
}

pub fn validate(spec: &GeneratorSpec) -> Result<AmbientSpace> {
    let q = FieldModulus::new(spec.q).map_err(|e| invalid("q", e))?;
    let space = AmbientSpace::new(q, spec.d).map_err(|e| invalid("d", e))?;
    if space.size() > crate::geometry::ENUMERATION_CAP {
        return Err(invalid("q", format!("q^d = {} exceeds the enumeration cap", space.size())));
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(invalid("noise", format!("{} is not in [0, 1]", spec.noise)));
    }
    if spec.np as u128 > space.size() {
        return Err(invalid("np", format!("{} points requested, space has {}", spec.np, space.size())));
    }
    Ok(space)
}

/// Builds the configuration described by `spec`.
///
/// Reflected-pairs with odd `ns` adds one uniform sphere after the pairs.
/// Hyperplane-planted uses `ns / 4` reflected pairs and fills the rest
/// uniformly.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    let space = validate(spec)?;
    let q = space.q();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut planted_hyperplane = None;
    let mut planted_radius = None;
    let (points, spheres) = match spec.kind {
        GeneratorKind::UniformRandom => {
            let idx = sample(&mut rng, space.size() as usize, spec.np).into_vec();
            let pts = idx.into_iter().map(|i| space.point_at(i as u64)).collect();
            (pts, uniform_spheres(&space, spec.ns, &BTreeSet::new(), &mut rng)?)
        }
        GeneratorKind::HyperplanePlanted | GeneratorKind::ReflectedPairs => {
            let h = random_reflecting_hyperplane(&space, &mut rng);
            let pts = planted_points(&space, spec.np, spec.noise, |p| h.contains(q, p), &mut rng)?;
            let pairs = if spec.kind == GeneratorKind::ReflectedPairs {
                spec.ns / 2
            } else {
                spec.ns / 4
            };
            let mut sph = reflected_spheres(&space, &h, pairs, &mut rng)?;
            let taken: BTreeSet<Sphere> = sph.iter().cloned().collect();
            sph.extend(uniform_spheres(&space, spec.ns - 2 * pairs, &taken, &mut rng)?);
            planted_hyperplane = Some(h);
            (pts, sph)
        }
        GeneratorKind::QuadricPlanted => {
            let r0 = q.elem(rng.random_range(1..q.q() as i64));
            let pts = planted_points(&space, spec.np, spec.noise, |p| quad_norm(q, p.coords()) == r0, &mut rng)?;
            planted_radius = Some(r0);
            (pts, uniform_spheres(&space, spec.ns, &BTreeSet::new(), &mut rng)?)
        }
    };
    Ok(Generated {
        config: Config::new(space, points, spheres)?,
        planted_hyperplane,
        planted_radius,
    })
}
