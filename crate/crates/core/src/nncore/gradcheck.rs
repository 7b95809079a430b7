use alloc::vec::Vec;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Denominator floor so that gradients that are zero on both sides compare
/// as equal instead of dividing by zero.
const REL_FLOOR: f64 = 1e-6;

/// Central finite differences of `f` at `point`.
pub fn finite_difference<F>(mut f: F, point: &[f64], step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut x = point.to_vec();
    (0..point.len())
        .map(|i| {
            x[i] = point[i] + step;
            let plus = f(&x);
            x[i] = point[i] - step;
            let minus = f(&x);
            x[i] = point[i];
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

/// `|a - b| / max(|a|, |b|, 1e-6)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

/// Outcome of comparing an analytic gradient with finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

/// Compare `analytic` (the claimed gradient of `f` at `point`) with central
/// differences at step [`FD_STEP`].
pub fn grad_check<F>(f: F, point: &[f64], analytic: &[f64]) -> GradCheck
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(point.len(), analytic.len(), "gradient length must match the point");
    let numeric = finite_difference(f, point, FD_STEP);
    let mut worst = GradCheck { max_rel_error: 0.0, worst_index: 0, analytic: 0.0, numeric: 0.0 };
    for (i, (&a, &n)) in analytic.iter().zip(&numeric).enumerate() {
        let e = relative_error(a, n);
        if e > worst.max_rel_error || e.is_nan() {
            worst = GradCheck { max_rel_error: e, worst_index: i, analytic: a, numeric: n };
        }
    }
    worst
}
