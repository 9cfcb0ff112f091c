//! Orthant-aware pruning predicates over boxes of signed offsets.
//!
//! A product with signed offset `d = p - q` beats the query for a customer
//! with signed offset `t = c - q` in one attribute iff `d * (d - 2t) <= 0`,
//! i.e. `d` lies between `0` and `2t`. Folding both onto absolute values is
//! only exact when `d` and `t` share a sign, so every box-level test here
//! keeps the signs. All tests are conservative: "surely" tests hold for
//! every pair drawn from the boxes, "may" tests hold for at least one pair.

use crate::geometry::Rect;

/// Box of signed per-dimension offsets from a query point.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl OffsetBox {
    pub fn of_point(x: &[f64], q: &[f64]) -> Self {
        let d: Vec<f64> = x.iter().zip(q).map(|(a, b)| a - b).collect();
        OffsetBox { lo: d.clone(), hi: d }
    }

    pub fn of_rect(r: &Rect, q: &[f64]) -> Self {
        OffsetBox {
            lo: r.lo.iter().zip(q).map(|(a, b)| a - b).collect(),
            hi: r.hi.iter().zip(q).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Box of the face closest to the query across dimension `j`. A tight
    /// bounding box holds at least one point on each face, so the returned
    /// box is guaranteed to contain a real point of the subtree.
    pub fn nearest_face(&self, j: usize) -> Self {
        let mut face = self.clone();
        let v = if self.lo[j].abs() <= self.hi[j].abs() {
            self.lo[j]
        } else {
            self.hi[j]
        };
        face.lo[j] = v;
        face.hi[j] = v;
        face
    }

    /// The point of the box closest to the query (the signed min-corner).
    pub fn near_corner(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if l > 0.0 { l } else if h < 0.0 { h } else { 0.0 })
            .collect()
    }
}

/// Some product in `product` may beat the query for some customer in
/// `customer` (strictness ignored, which only over-approximates).
pub fn may_dominate(product: &OffsetBox, customer: &OffsetBox) -> bool {
    (0..product.dim()).all(|k| {
        let (dl, dh) = (product.lo[k], product.hi[k]);
        if dl <= 0.0 && 0.0 <= dh {
            true
        } else if dl > 0.0 {
            dl <= 2.0 * customer.hi[k]
        } else {
            dh >= 2.0 * customer.lo[k]
        }
    })
}

/// Same as [`may_dominate`] for a product box given by its signed
/// min-corner.
pub fn may_dominate_from_corner(corner: &[f64], customer: &OffsetBox) -> bool {
    corner.iter().enumerate().all(|(k, &n)| {
        if n == 0.0 {
            true
        } else if n > 0.0 {
            n <= 2.0 * customer.hi[k]
        } else {
            n >= 2.0 * customer.lo[k]
        }
    })
}

/// Every product in `product` beats the query for every customer in
/// `customer`. Only meaningful when `product` is known to hold a real point.
pub fn surely_dominates(product: &OffsetBox, customer: &OffsetBox) -> bool {
    let mut strict = false;
    for k in 0..product.dim() {
        let (dl, dh) = (product.lo[k], product.hi[k]);
        let (tl, th) = (customer.lo[k], customer.hi[k]);
        if dl >= 0.0 {
            if !(dh == 0.0 || dh <= 2.0 * tl) {
                return false;
            }
            if dl > 0.0 && dh < 2.0 * tl {
                strict = true;
            }
        } else if dh <= 0.0 {
            if !(dl == 0.0 || dl >= 2.0 * th) {
                return false;
            }
            if dh < 0.0 && dl > 2.0 * th {
                strict = true;
            }
        } else {
            return false;
        }
    }
    strict
}

/// The point guaranteed inside `cover` beats the query for every customer
/// that any product in `covered` beats, and is strictly closer in at least
/// one attribute. Products inside `covered` can then be discarded as long
/// as `cover` stays live.
pub fn covers(cover: &OffsetBox, covered: &OffsetBox) -> bool {
    let mut strict = false;
    for k in 0..cover.dim() {
        let (gl, gh) = (cover.lo[k], cover.hi[k]);
        let (rl, rh) = (covered.lo[k], covered.hi[k]);
        if rl > 0.0 {
            if !(gl > 0.0 && gh <= rl) {
                return false;
            }
            if gh < rl {
                strict = true;
            }
        } else if rh < 0.0 {
            if !(gh < 0.0 && gl >= rh) {
                return false;
            }
            if gl > rh {
                strict = true;
            }
        } else if !(rl == 0.0 && rh == 0.0 && gl == 0.0 && gh == 0.0) {
            return false;
        }
    }
    strict
}

/// The may-dominate region of min-corner `a` contains that of `b`.
pub fn corner_supersedes(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| {
        x == 0.0 || (x > 0.0 && y > 0.0 && x <= y) || (x < 0.0 && y < 0.0 && x >= y)
    })
}

/// The surely-dominate region of guaranteed box `a` contains that of `b`.
pub fn guarantee_supersedes(a: &OffsetBox, b: &OffsetBox) -> bool {
    (0..a.dim()).all(|k| {
        let (al, ah, bl, bh) = (a.lo[k], a.hi[k], b.lo[k], b.hi[k]);
        if bl >= 0.0 && bh >= 0.0 {
            if bh == 0.0 {
                al == 0.0 && ah == 0.0
            } else {
                al >= 0.0 && ah <= bh && (bl == 0.0 || al > 0.0)
            }
        } else if bl <= 0.0 && bh <= 0.0 {
            ah <= 0.0 && al >= bl && (bh == 0.0 || ah < 0.0)
        } else {
            // b straddles the query and can never surely dominate anything.
            true
        }
    })
}

/// Whether a guaranteed box can ever surely dominate a customer.
pub fn is_useful_guarantee(g: &OffsetBox) -> bool {
    (0..g.dim()).all(|k| g.lo[k] >= 0.0 || g.hi[k] <= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dynamically_dominates_coords;

    fn pbox(v: &[f64]) -> OffsetBox {
        OffsetBox {
            lo: v.to_vec(),
            hi: v.to_vec(),
        }
    }

    #[test]
    fn point_boxes_match_exact_dominance() {
        let q = [5.0, 5.0];
        let cases = [
            ([4.0, 4.0], [2.0, 2.0], true),
            ([4.0, 4.0], [5.0, 6.0], false),
            ([7.0, 7.0], [9.0, 9.0], true),
            ([3.0, 7.0], [0.0, 9.0], true),
            ([3.0, 7.0], [9.0, 9.0], false),
        ];
        for (p, c, expect) in cases {
            let pb = OffsetBox::of_point(&p, &q);
            let cb = OffsetBox::of_point(&c, &q);
            assert_eq!(dynamically_dominates_coords(&p, &q, &c), expect, "{p:?} {c:?}");
            assert_eq!(surely_dominates(&pb, &cb), expect, "{p:?} {c:?}");
        }
    }

    #[test]
    fn other_orthant_never_dominates() {
        // Folded offsets would claim (1,1) beats (2,2), but the product sits
        // on the far side of the query.
        let pb = pbox(&[-2.0, -2.0]);
        let cb = pbox(&[2.0, 2.0]);
        assert!(!may_dominate(&pb, &cb));
        assert!(!surely_dominates(&pb, &cb));
    }

    #[test]
    fn covers_requires_strictness() {
        let a = pbox(&[1.0, 1.0]);
        assert!(!covers(&a, &a));
        assert!(covers(&a, &pbox(&[2.0, 1.0])));
        assert!(!covers(&a, &pbox(&[-2.0, 1.0])));
    }

    #[test]
    fn nearest_face_picks_smaller_magnitude() {
        let b = OffsetBox {
            lo: vec![-1.0, 2.0],
            hi: vec![3.0, 4.0],
        };
        assert_eq!(b.nearest_face(0).lo, vec![-1.0, 2.0]);
        assert_eq!(b.nearest_face(0).hi, vec![-1.0, 4.0]);
        assert_eq!(b.nearest_face(1).lo, vec![-1.0, 2.0]);
        assert_eq!(b.nearest_face(1).hi, vec![3.0, 2.0]);
        assert_eq!(b.near_corner(), vec![0.0, 2.0]);
    }
}
