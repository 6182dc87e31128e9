//! Scalar maximization: coarse grid scan followed by golden-section
//! refinement of the best bracket.

use crate::par;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Shrinks the bracket until its width falls below `tol` (or 200
/// iterations). Returns `(x_max, f_max)`.
pub fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    debug_assert!(a <= b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (b - a) > tol && iterations < 200 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximizes `f` on `[lo, hi]`: a grid of at least `min_grid` points picks
/// the best sample, then golden-section refinement tightens the surrounding
/// bracket to within `tol`.
pub fn grid_then_golden_max<F>(f: F, lo: f64, hi: f64, tol: f64, min_grid: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    debug_assert!(lo < hi && tol > 0.0);
    let n = min_grid.max(2);
    let grid: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    let values = par::map(&grid, |&x| f(x));
    let (best, _) = values
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.total_cmp(b))
        .expect("grid is non-empty");
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n - 1)];
    let (x_grid, f_grid) = (grid[best], values[best]);
    let (x_fine, f_fine) = golden_section_max(&f, a, b, tol);
    if f_fine >= f_grid {
        (x_fine, f_fine)
    } else {
        (x_grid, f_grid)
    }
}
