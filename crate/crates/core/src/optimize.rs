//! Derivative-free maximization: golden-section line search and
//! coordinate-wise refinement in two real parameters.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
/// Returns the best argument evaluated and its value.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug)]
pub struct Refined {
    pub point: [f64; 2],
    pub value: f64,
}

/// Alternates golden-section searches along each coordinate, each within
/// `+-bracket` of the current point, until a full sweep moves the point by
/// less than `tol` and no longer improves the value.
pub fn coordinate_refine<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], bracket: f64, tol: f64) -> Refined {
    let mut p = start;
    let mut val = f(p);
    for _ in 0..500 {
        let before = p;
        let before_val = val;
        for axis in 0..2 {
            let centre = p[axis];
            let (x, fx) = golden_section_max(
                |t| {
                    let mut q = p;
                    q[axis] = t;
                    f(q)
                },
                centre - bracket,
                centre + bracket,
                tol,
            );
            if fx > val {
                p[axis] = x;
                val = fx;
            }
        }
        let moved = (p[0] - before[0]).abs().max((p[1] - before[1]).abs());
        if moved < tol && val - before_val <= 1e-16 * val.abs().max(1.0) {
            break;
        }
    }
    Refined { point: p, value: val }
}
