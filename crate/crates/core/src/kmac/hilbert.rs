use crate::geometry::Point;

/// Bits per dimension of the curve used for candidate batching.
pub const HILBERT_BITS: u32 = 16;

/// Hilbert index of a cell on a `2^bits` grid per axis (Skilling's
/// transpose method). `cell.len() * bits` must not exceed 128.
pub fn hilbert_index(cell: &[u32], bits: u32) -> u128 {
    assert!(cell.len() as u32 * bits <= 128, "index does not fit in 128 bits");
    let n = cell.len();
    let mut x = cell.to_vec();
    let m = 1u32 << (bits - 1);

    let mut q = m;
    while q > 1 {
        let p = q - 1;
        for i in 0..n {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q >>= 1;
    }
    for i in 1..n {
        x[i] ^= x[i - 1];
    }
    let mut t = 0;
    let mut q = m;
    while q > 1 {
        if x[n - 1] & q != 0 {
            t ^= q - 1;
        }
        q >>= 1;
    }
    for v in x.iter_mut() {
        *v ^= t;
    }

    let mut h: u128 = 0;
    for b in (0..bits).rev() {
        for v in &x {
            h = (h << 1) | ((v >> b) & 1) as u128;
        }
    }
    h
}

/// Hilbert index of each point after scaling the bounding box of `points`
/// onto the `2^16` grid. Degenerate extents map to cell 0.
pub fn hilbert_keys(points: &[Point]) -> Vec<u128> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let d = first.dim();
    let mut lo = first.coords.clone();
    let mut hi = first.coords.clone();
    for p in points {
        for i in 0..d {
            lo[i] = lo[i].min(p.coords[i]);
            hi[i] = hi[i].max(p.coords[i]);
        }
    }
    let max_cell = ((1u64 << HILBERT_BITS) - 1) as f64;
    points
        .iter()
        .map(|p| {
            let cell: Vec<u32> = (0..d)
                .map(|i| {
                    let extent = hi[i] - lo[i];
                    if extent > 0.0 {
                        ((p.coords[i] - lo[i]) / extent * max_cell).floor().clamp(0.0, max_cell) as u32
                    } else {
                        0
                    }
                })
                .collect();
            hilbert_index(&cell, HILBERT_BITS)
        })
        .collect()
}
