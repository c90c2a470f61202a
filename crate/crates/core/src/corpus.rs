//! The shipped example corpus.
//!
//! Three hand-sized systems anchor the whole test suite: a triangle whose
//! solution set is bounded by three lines, a pair of opposing rows whose
//! solution set is a line (the canonical unstable system), and a single
//! halfspace.  `random_system` generates seeded two-dimensional systems for
//! the property tests: every generated system has a nonempty solution set
//! and a nonempty zero level by construction.

use crate::convex::{AffineRow, MaxAffineSystem};
use crate::geometry::{NormSpec, Vector};
use crate::sample;
use rand::Rng;

/// Three rows whose solution set is the triangle with vertices
/// `(-1/3, 4/3)`, `(4/3, -1/3)`, and `(-2, -2)`; the catalog has six
/// realizable active sets and the bound is `sqrt(2)/2`.
pub fn triangle_system() -> MaxAffineSystem {
    MaxAffineSystem::new(
        vec![
            AffineRow::new("1", Vector::from_slice(&[1.0, 1.0]), 1.0),
            AffineRow::new("2", Vector::from_slice(&[-2.0, 1.0]), 2.0),
            AffineRow::new("3", Vector::from_slice(&[1.0, -2.0]), 2.0),
        ],
        NormSpec::Euclidean,
    )
    .expect("the triangle system is well formed")
}

/// Two opposing rows; the solution set is the line `x1 + x2 = 0`, the
/// sphere minimum vanishes on it, and arbitrarily small tilts collapse the
/// Hoffman constant to order epsilon.
pub fn opposing_rows_system() -> MaxAffineSystem {
    MaxAffineSystem::new(
        vec![
            AffineRow::new("1", Vector::from_slice(&[1.0, 1.0]), 0.0),
            AffineRow::new("2", Vector::from_slice(&[-1.0, -1.0]), 0.0),
        ],
        NormSpec::Euclidean,
    )
    .expect("the opposing-rows system is well formed")
}

/// One halfspace `3 x1 + 4 x2 <= 0`; its Hoffman constant is exactly the
/// row norm, five.
pub fn halfspace_system() -> MaxAffineSystem {
    MaxAffineSystem::new(
        vec![AffineRow::new("1", Vector::from_slice(&[3.0, 4.0]), 0.0)],
        NormSpec::Euclidean,
    )
    .expect("the halfspace system is well formed")
}

/// A seeded two-dimensional system with two to five rows.
///
/// Construction guarantees a nonempty solution set with a nonempty zero
/// level: all rows pass at or below a common anchor point, and the first
/// row passes exactly through it, so the anchor is a zero-level point.
/// Row gradients are rejected until none is tiny and no two are nearly
/// parallel, which keeps the catalogs generic.
pub fn random_system(seed: u64) -> MaxAffineSystem {
    let mut rng = sample::rng_from(sample::mix(seed, 0xC0_B05));
    loop {
        let m = rng.gen_range(2..=5usize);
        let mut gradients: Vec<Vector> = Vec::with_capacity(m);
        let mut ok = true;
        for _ in 0..m {
            let g = sample::gaussian_vector(&mut rng, 2);
            if g.norm2() < 0.3 {
                ok = false;
                break;
            }
            let unit = g.scale(1.0 / g.norm2());
            if gradients.iter().any(|p| {
                let pu = p.scale(1.0 / p.norm2());
                (&pu - &unit).norm2() < 0.05
            }) {
                ok = false;
                break;
            }
            gradients.push(g);
        }
        if !ok {
            continue;
        }
        let anchor = sample::in_ball(&Vector::zeros(2), 2.0, &mut rng);
        let rows: Vec<AffineRow> = gradients
            .into_iter()
            .enumerate()
            .map(|(t, a)| {
                let slack = if t == 0 { 0.0 } else { 0.5 * rng.gen_range(0.0..1.0f64) };
                let offset = a.dot(&anchor) + slack;
                AffineRow::new(format!("{}", t + 1), a, offset)
            })
            .collect();
        if let Ok(sys) = MaxAffineSystem::new(rows, NormSpec::Euclidean) {
            return sys;
        }
    }
}
