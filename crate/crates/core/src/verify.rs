//! Independent re-check of a certificate against its configuration.
//!
//! Nothing here trusts the extraction code: the polynomial is evaluated term by
//! term, incidences are recounted from the sphere equations, and flat
//! containment is decided by a rank computation.

use std::collections::{BTreeMap, BTreeSet};

use crate::field::{FieldElement, FieldModulus};
use crate::incidence::Config;
use crate::matrix::Matrix;
use crate::pipeline::{CaseTag, Certificate, Term};
use crate::poly::eval_terms;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) -> bool {
        self.0.push(Check {
            name,
            passed,
            detail: if passed { String::new() } else { detail.into() },
        });
        passed
    }
}

fn indices_ok(idx: &[usize], n: usize) -> Result<BTreeSet<usize>, String> {
    let mut seen = BTreeSet::new();
    for &i in idx {
        if i >= n {
            return Err(format!("index {i} out of range (have {n})"));
        }
        if !seen.insert(i) {
            return Err(format!("index {i} repeated"));
        }
    }
    Ok(seen)
}

fn terms_to_map(q: FieldModulus, d: usize, terms: &[Term]) -> Result<BTreeMap<Vec<u32>, u32>, String> {
    let mut m: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    for (e, c) in terms {
        if e.len() != d {
            return Err(format!("exponent vector {e:?} has length {} != {d}", e.len()));
        }
        if *c >= q.q() {
            return Err(format!("coefficient {c} not reduced mod {}", q.q()));
        }
        let slot = m.entry(e.clone()).or_insert(0);
        *slot = (*slot + c) % q.q();
    }
    m.retain(|_, c| *c != 0);
    Ok(m)
}

fn to_fe(q: FieldModulus, terms: &[Term]) -> Vec<(Vec<u32>, FieldElement)> {
    terms.iter().map(|(e, c)| (e.clone(), q.elem(*c as i64))).collect()
}

fn sphere_hits(c: &Config, s: usize, pts: &BTreeSet<usize>) -> u64 {
    let q = c.space().q();
    let sp = &c.spheres()[s];
    pts.iter()
        .filter(|&&i| {
            let diff: Vec<FieldElement> = c.points()[i]
                .coords()
                .iter()
                .zip(sp.center.coords())
                .map(|(&a, &b)| q.sub(a, b))
                .collect();
            q.dot(&diff, &diff) == sp.r
        })
        .count() as u64
}

pub fn verify_certificate(c: &Config, cert: &Certificate) -> VerifyReport {
    let q = c.space().q();
    let d = c.space().d();
    let mut ck = Checks(Vec::new());

    if cert.case == CaseTag::NoSignal {
        ck.add(
            "no-signal certificate is empty",
            cert.f.is_empty() && cert.hyperplane.is_none() && cert.points.is_empty() && cert.spheres.is_empty(),
            "NoSignal must carry no polynomial, hyperplane, points or spheres",
        );
        return VerifyReport { checks: ck.0 };
    }

    let f_map = match terms_to_map(q, d, &cert.f) {
        Ok(m) => m,
        Err(e) => {
            ck.add("F well-formed", false, e);
            return VerifyReport { checks: ck.0 };
        }
    };
    if !ck.add("F must be nonzero", !f_map.is_empty(), "F has no nonzero coefficient") {
        return VerifyReport { checks: ck.0 };
    }

    let Some(h) = &cert.hyperplane else {
        ck.add("hyperplane present", false, "missing hyperplane");
        return VerifyReport { checks: ck.0 };
    };
    let shape_ok = h.normal.len() == d && h.normal.iter().chain([&h.offset]).all(|&x| x < q.q());
    let lead = h.normal.iter().find(|&&x| x != 0);
    if !ck.add(
        "hyperplane canonical",
        shape_ok && lead == Some(&1),
        format!("normal {:?} offset {} is not a canonical hyperplane", h.normal, h.offset),
    ) {
        return VerifyReport { checks: ck.0 };
    }
    let mut linear: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    if h.offset != 0 {
        linear.insert(vec![0; d], (q.q() - h.offset) % q.q());
    }
    for (i, &n) in h.normal.iter().enumerate() {
        if n != 0 {
            let mut e = vec![0; d];
            e[i] = 1;
            linear.insert(e, n);
        }
    }
    ck.add(
        "F is the linear form of the hyperplane",
        linear == f_map,
        "F differs from <n, x> - b",
    );

    let n_points = c.points().len();
    let p_prime = match indices_ok(&cert.points, n_points) {
        Ok(s) => s,
        Err(e) => {
            ck.add("P' indices valid", false, e);
            return VerifyReport { checks: ck.0 };
        }
    };
    let p2 = match indices_ok(&cert.aux.p2, n_points) {
        Ok(s) => s,
        Err(e) => {
            ck.add("P2 indices valid", false, e);
            return VerifyReport { checks: ck.0 };
        }
    };
    ck.add("P' subset of P2", p_prime.is_subset(&p2), "P' has points outside P2");

    let f_fe = to_fe(q, &cert.f);
    let on_f = |i: usize| eval_terms(q, &f_fe, c.points()[i].coords()).is_zero();
    let off: Vec<usize> = p_prime.iter().copied().filter(|&i| !on_f(i)).collect();
    ck.add("F vanishes on P'", off.is_empty(), format!("F(p) != 0 at {off:?}"));
    let zero_set: BTreeSet<usize> = p2.iter().copied().filter(|&i| on_f(i)).collect();
    ck.add(
        "P' is all of P2 on Z(F)",
        zero_set == p_prime,
        format!("P2 ∩ Z(F) has {} points, P' has {}", zero_set.len(), p_prime.len()),
    );

    let p = &cert.params;
    ck.add(
        "point threshold matches lambda1",
        p.point_threshold == p.lambda1.div_ceil(2),
        format!("threshold {} != ceil({} / 2)", p.point_threshold, p.lambda1),
    );
    ck.add(
        "|P'| reaches threshold",
        p_prime.len() as u64 >= p.point_threshold,
        format!("|P'| = {} < {}", p_prime.len(), p.point_threshold),
    );

    let spheres = match indices_ok(&cert.spheres, c.spheres().len()) {
        Ok(s) => s,
        Err(e) => {
            ck.add("S' indices valid", false, e);
            return VerifyReport { checks: ck.0 };
        }
    };
    let t = p.sphere_threshold;
    ck.add("sphere threshold is a power of two", t.is_power_of_two(), format!("t = {t}"));
    let hits: Vec<u64> = (0..c.spheres().len()).map(|s| sphere_hits(c, s, &p_prime)).collect();
    let rich: BTreeSet<usize> = (0..hits.len()).filter(|&s| hits[s] >= t).collect();
    ck.add(
        "S' is exactly the spheres meeting P' at least t times",
        rich == spheres,
        format!("expected {} spheres, certificate lists {}", rich.len(), spheres.len()),
    );
    let total: u64 = hits.iter().sum();
    let kept: u64 = spheres.iter().map(|&s| hits[s]).sum();
    ck.add(
        "S' keeps half the incidences of P'",
        2 * kept >= total,
        format!("kept {kept} of {total}"),
    );

    match cert.case {
        CaseTag::FlatConcentration => match &cert.aux.witness_flat {
            Some(rows) => {
                let (ok, why) = witness_in_hyperplane(q, d, rows, &h.normal, h.offset);
                ck.add("witness flat contained in H0", ok, why);
            }
            None => {
                ck.add("witness flat contained in H0", false, "missing witness flat");
            }
        },
        CaseTag::DirectionalCoordination => {
            if let (Some(r), Some(deg)) = (&cert.aux.r, cert.aux.degree) {
                match terms_to_map(q, d, r) {
                    Ok(m) => {
                        let degrees: BTreeSet<u32> = m.keys().map(|e| e.iter().sum()).collect();
                        ck.add(
                            "R nonzero and homogeneous of degree <= D",
                            degrees.len() == 1 && degrees.iter().all(|&g| g <= deg),
                            format!("R has monomial degrees {degrees:?} against D = {deg}"),
                        );
                    }
                    Err(e) => {
                        ck.add("R well-formed", false, e);
                    }
                }
            }
        }
        CaseTag::NoSignal => unreachable!(),
    }
    VerifyReport { checks: ck.0 }
}

/// `L = {A x = v}` of rank 2 lies in `{<n, x> = b}` iff `(n | b)` is in the
/// row space of `[A | v]`.
fn witness_in_hyperplane(q: FieldModulus, d: usize, rows: &[Vec<u32>], normal: &[u32], offset: u32) -> (bool, String) {
    if rows.len() != 2 || rows.iter().any(|r| r.len() != d + 1 || r.iter().any(|&x| x >= q.q())) {
        return (false, "witness flat must be two rows of length d + 1".into());
    }
    let fe = |r: &[u32]| r.iter().map(|&x| q.elem(x as i64)).collect::<Vec<_>>();
    let aug = Matrix::from_rows(d + 1, &[fe(&rows[0]), fe(&rows[1])]).expect("shape checked");
    let coeff = Matrix::from_rows(d, &[fe(&rows[0][..d]), fe(&rows[1][..d])]).expect("shape checked");
    if coeff.rank(q) != 2 || aug.rank(q) != 2 {
        return (false, "witness flat is not a consistent codimension-2 system".into());
    }
    let mut h = normal.to_vec();
    h.push(offset);
    let stacked = Matrix::from_rows(d + 1, &[fe(&rows[0]), fe(&rows[1]), fe(&h)]).expect("shape checked");
    if stacked.rank(q) == 2 {
        (true, String::new())
    } else {
        (false, "H0 does not contain the witness flat".into())
    }
}

