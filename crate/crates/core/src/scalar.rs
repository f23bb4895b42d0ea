//! One-dimensional minimisation on a bracket.

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2

/// Result of a bracketed search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `xtol`. The endpoints are also
/// evaluated so a minimum sitting on the boundary is returned exactly.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Minimum {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // 200 iterations shrink any bracket below f64 resolution
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd {
        Minimum { x: c, value: fc }
    } else {
        Minimum { x: d, value: fd }
    };
    for x in [lo, hi] {
        let v = f(x);
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    best
}

/// Uniform grid scan with `points` nodes on `[lo, hi]`; first minimum wins.
pub fn grid_scan<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, points: usize) -> Minimum {
    let mut best = Minimum {
        x: lo,
        value: f64::INFINITY,
    };
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let v = f(x);
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    best
}
