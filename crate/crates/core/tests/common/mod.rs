//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use ortho_core::cusps::ImagQuadInt;
use ortho_core::geom::{dist_between, GeomObject, Horoball, MoebiusMap};
use ortho_core::qforms::{automorph_generator, BinaryQF};
use ortho_core::quat::Quaternion;
use rand::Rng;

/// Counts orbits of horoballs `g·{height ≥ 1}`, `g ∈ SL₂(𝒪_K)`, at distance
/// at most `s` from `{height ≥ 1}` and other than it, modulo translations by
/// `𝒪_K`. Every matrix is built from a coprime pair, the image horoball is
/// computed geometrically and classes are keyed by rounded center and size.
pub fn bianchi_geometric(dk: i64, s: f64) -> u64 {
    assert!(dk == -4, "oracle written for the Gaussian integers");
    let nmax = s.exp().floor() as i64;
    let std = GeomObject::Horoball(Horoball::standard());
    let unit = |z: ImagQuadInt| z.norm() == 1;
    let mut keys = HashSet::new();
    let r = (nmax as f64).sqrt().ceil() as i64;
    for cm in -r..=r {
        for cn in -r..=r {
            let c = ImagQuadInt::new(cm, cn, dk).unwrap();
            let nc = c.norm() as i64;
            if nc == 0 || nc > nmax {
                continue;
            }
            for am in 0..nc {
                for an in 0..nc {
                    let a = ImagQuadInt::new(am, an, dk).unwrap();
                    let (g, x, y) = a.ext_gcd(&c).unwrap();
                    if !unit(g) {
                        continue;
                    }
                    // x·a + y·c = g, so (a, −y/g; c, x/g) has determinant 1.
                    let gi = g.conj();
                    let d = x.mul(&gi).unwrap();
                    let b = y.mul(&gi).unwrap().neg();
                    let m = MoebiusMap::from_complex(a.to_complex(), b.to_complex(), c.to_complex(), d.to_complex());
                    assert!((m.det() - 1.0).abs() < 1e-9);
                    let img = m.apply_horoball(&Horoball::standard(), 2).unwrap();
                    let dist = dist_between(&std, &GeomObject::Horoball(img.clone())).unwrap();
                    if dist > s + 1e-9 {
                        continue;
                    }
                    let ctr = match &img.center {
                        ortho_core::geom::BoundaryPoint::Finite(v) => v.clone(),
                        _ => unreachable!("c ≠ 0"),
                    };
                    let q = |v: f64| ((v.rem_euclid(1.0) * 1e7).round() as i64).rem_euclid(10_000_000);
                    keys.insert((q(ctr[0]), q(ctr[1]), (1.0 / img.size).round() as i64));
                }
            }
        }
    }
    keys.len() as u64
}

/// `Ψ_Q(t)` for `t = 1, …, tmax` by brute force: every primitive vector of a
/// box with `0 < |Q| ≤ tmax` is labelled by the lexicographically least point
/// of its orbit under the automorphs and `−I` among points of norm at most
/// `reach`; the orbit is walked both ways until the norm is past `reach` and
/// increasing.
pub fn psi_orbit_closure(q: &BinaryQF, tmax: i64, boxr: i64, reach: f64) -> Vec<u64> {
    let g = automorph_generator(q).unwrap();
    let gi = g.inv();
    let mut labels: HashSet<(i64, i64)> = HashSet::new();
    let mut per_value = vec![0u64; tmax as usize + 1];
    let nrm = |v: (i64, i64)| ((v.0 as f64).powi(2) + (v.1 as f64).powi(2)).sqrt();
    for x in -boxr..=boxr {
        for y in -boxr..=boxr {
            if num_integer::Integer::gcd(&x, &y) != 1 {
                continue;
            }
            let val = q.eval(x, y).unsigned_abs() as i64;
            if val == 0 || val > tmax {
                continue;
            }
            let mut best = (x, y).min((-x, -y));
            for m in [&g, &gi] {
                let mut cur = (x, y);
                let mut prev_norm = nrm(cur);
                loop {
                    cur = m.apply(cur.0, cur.1).unwrap();
                    let n = nrm(cur);
                    if n <= reach {
                        best = best.min(cur).min((-cur.0, -cur.1));
                    }
                    if n > reach && n > prev_norm {
                        break;
                    }
                    prev_norm = n;
                }
            }
            if labels.insert(best) {
                per_value[val as usize] += 1;
            }
        }
    }
    let mut acc = 0;
    per_value[1..]
        .iter()
        .map(|c| {
            acc += c;
            acc
        })
        .collect()
}

fn quat<R: Rng>(rng: &mut R, m: usize) -> Quaternion {
    let mut v = [0.0; 4];
    for x in v.iter_mut().take(m.max(1)) {
        *x = rng.gen_range(-2.0..2.0);
    }
    Quaternion::new(v[0], v[1], v[2], v[3])
}

/// A random isometry of `Hⁿ` with horizontal dimension `m ∈ {1, 2, 4}` and
/// Dieudonné determinant 1.
pub fn random_isometry<R: Rng>(rng: &mut R, m: usize) -> MoebiusMap {
    loop {
        let g = MoebiusMap::new(quat(rng, m), quat(rng, m), quat(rng, m), quat(rng, m));
        if g.det() > 0.05 {
            if let Ok(g) = g.normalized() {
                return g;
            }
        }
    }
}

pub fn random_point<R: Rng>(rng: &mut R, m: usize) -> ortho_core::geom::UhsPoint {
    let h: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
    ortho_core::geom::UhsPoint::new(h, rng.gen_range(0.1f64..3.0)).unwrap()
}

pub fn random_boundary<R: Rng>(rng: &mut R, m: usize) -> ortho_core::geom::BoundaryPoint {
    ortho_core::geom::BoundaryPoint::Finite((0..m).map(|_| rng.gen_range(-3.0..3.0)).collect())
}


