//! Adaptive Gauss-Kronrod (7/15) quadrature over log-integrands.
//!
//! Integrands are supplied as `x -> ln f(x)` so that an overflowing integrand
//! is reported instead of turning into `inf`.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, PartialEq)]
pub enum QuadOutcome {
    Converged { value: f64, abs_err: f64 },
    /// `ln f(x) > cap` at `x`.
    Overflow { x: f64, log_value: f64 },
    /// Cell budget exhausted; `partial` sums only accepted cells.
    BudgetExceeded { partial: f64 },
}

/// Shared cell counter across several integrations.
#[derive(Debug, Clone, Copy)]
pub struct CellBudget {
    pub remaining: usize,
}

impl CellBudget {
    pub fn new(cells: usize) -> Self {
        Self { remaining: cells }
    }

    fn take(&mut self) -> bool {
        if self.remaining == 0 {
            false
        } else {
            self.remaining -= 1;
            true
        }
    }
}

enum Cell {
    Ok { kronrod: f64, err: f64 },
    Overflow { x: f64, log_value: f64 },
}

fn gk15<F: Fn(f64) -> f64>(log_f: &F, a: f64, b: f64, cap: f64) -> Cell {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[c] } else { &[c - h * x, c + h * x] };
        for &t in nodes {
            let lv = log_f(t);
            if lv > cap {
                return Cell::Overflow { x: t, log_value: lv };
            }
            let v = if lv == f64::NEG_INFINITY { 0.0 } else { lv.exp() };
            kronrod += w * v;
            if i % 2 == 1 {
                gauss += WG[i / 2] * v;
            }
        }
    }
    Cell::Ok { kronrod: kronrod * h, err: ((kronrod - gauss) * h).abs() }
}

/// Integrates `exp(log_f)` over `[a, b]` to absolute tolerance `tol` by bisecting
/// cells whose Kronrod/Gauss discrepancy exceeds their share of `tol`.
pub fn integrate<F: Fn(f64) -> f64>(log_f: F, a: f64, b: f64, tol: f64, cap: f64, budget: &mut CellBudget) -> QuadOutcome {
    if !(b > a) {
        return QuadOutcome::Converged { value: 0.0, abs_err: 0.0 };
    }
    let width = b - a;
    let mut stack = vec![(a, b)];
    let mut value = 0.0;
    let mut abs_err = 0.0;
    while let Some((lo, hi)) = stack.pop() {
        if !budget.take() {
            return QuadOutcome::BudgetExceeded { partial: value };
        }
        match gk15(&log_f, lo, hi, cap) {
            Cell::Overflow { x, log_value } => return QuadOutcome::Overflow { x, log_value },
            Cell::Ok { kronrod, err } => {
                let share = tol * (hi - lo) / width;
                let tiny = (hi - lo) <= 1e-15 * width.max(hi.abs());
                if err <= share || err <= 1e-15 * kronrod.abs() || tiny {
                    value += kronrod;
                    abs_err += err;
                } else {
                    let mid = 0.5 * (lo + hi);
                    stack.push((lo, mid));
                    stack.push((mid, hi));
                }
            }
        }
    }
    QuadOutcome::Converged { value, abs_err }
}

/// Integrates over `(0, b]` with a graded mesh of ratio 1/2 toward the
/// singular endpoint 0. `leftover(w)` must bound the integral over `(0, w)`;
/// grading stops once that bound drops below a tenth of `tol`.
pub fn integrate_graded_at_zero<F, B>(
    log_f: F,
    b: f64,
    tol: f64,
    cap: f64,
    budget: &mut CellBudget,
    leftover: B,
) -> QuadOutcome
where
    F: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    let mut value = 0.0;
    let mut abs_err = 0.0;
    let mut hi = b;
    let mut level = 0;
    loop {
        let bound = leftover(hi);
        if bound < 0.1 * tol || hi < f64::MIN_POSITIVE {
            return QuadOutcome::Converged { value: value + 0.5 * bound, abs_err: abs_err + 0.5 * bound };
        }
        let lo = 0.5 * hi;
        // Each graded cell gets a geometrically shrinking share of the tolerance.
        let cell_tol = 0.9 * tol * 0.5f64.powi(level.min(1000) + 1);
        match integrate(&log_f, lo, hi, cell_tol.max(1e-300), cap, budget) {
            QuadOutcome::Converged { value: v, abs_err: e } => {
                value += v;
                abs_err += e;
            }
            QuadOutcome::BudgetExceeded { partial } => {
                return QuadOutcome::BudgetExceeded { partial: value + partial };
            }
            o @ QuadOutcome::Overflow { .. } => return o,
        }
        hi = lo;
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let mut b = CellBudget::new(100);
        match integrate(|x: f64| (x * x).ln(), 0.0, 2.0, 1e-12, 690.0, &mut b) {
            QuadOutcome::Converged { value, .. } => assert!((value - 8.0 / 3.0).abs() < 1e-13),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn steep_exponential() {
        // int_{0.1}^{0.5} e^{2/x} dx, checked against a fine composite Simpson rule
        let mut b = CellBudget::new(10_000);
        let got = match integrate(|x: f64| 2.0 / x, 0.1, 0.5, 1e-10, 690.0, &mut b) {
            QuadOutcome::Converged { value, .. } => value,
            o => panic!("{o:?}"),
        };
        let n = 200_000;
        let h = 0.4 / n as f64;
        let f = |x: f64| (2.0 / x).exp();
        let mut s = f(0.1) + f(0.5);
        for i in 1..n {
            let x = 0.1 + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        let want = s * h / 3.0;
        assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
    }

    #[test]
    fn overflow_and_budget() {
        let mut b = CellBudget::new(100);
        assert!(matches!(
            integrate(|x: f64| 1.0 / x, 1e-4, 1.0, 1e-8, 690.0, &mut b),
            QuadOutcome::Overflow { .. }
        ));
        let mut b = CellBudget::new(3);
        assert!(matches!(
            integrate(|x: f64| (1.0 / x.sqrt()).ln(), 1e-12, 1.0, 1e-14, 690.0, &mut b),
            QuadOutcome::BudgetExceeded { .. }
        ));
    }

    #[test]
    fn graded_integral_of_vanishing_singularity() {
        // int_0^{1/2} 0.5^{1/x} dx; leftover on (0, w) is at most w 0.5^{1/w}
        let l = 0.5f64.ln();
        let mut b = CellBudget::new(10_000);
        let got = match integrate_graded_at_zero(|x| l / x, 0.5, 1e-10, 690.0, &mut b, |w| w * (l / w).exp()) {
            QuadOutcome::Converged { value, .. } => value,
            o => panic!("{o:?}"),
        };
        // substitute t = 1/x: int_2^inf 0.5^t / t^2 dt via a long Simpson sum
        let f = |t: f64| (l * t).exp() / (t * t);
        let (a, bb, n) = (2.0, 80.0, 400_000);
        let h = (bb - a) / n as f64;
        let mut s = f(a) + f(bb);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        let want = s * h / 3.0;
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
}
