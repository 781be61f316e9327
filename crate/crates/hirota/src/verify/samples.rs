//! Deterministic quasi-random sample points inside a soliton core.

use crate::expalg::Point;
use crate::soliton::SolitonParam;
use crate::systems::Grid;

/// Radical inverse of `i` in base `b`.
pub fn halton(mut i: usize, b: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `n` points where the soliton's phase lies in [-5, 5]. The lattice index is
/// chosen to put the phase near its target; continuum solitons (no step
/// factor) shift x instead.
pub fn core_points(p: &SolitonParam, n: usize, grid: Grid, with_y: bool) -> Vec<Point> {
    let k = p.k.to_complex().re;
    let l = p.l.as_ref().map(|v| v.to_complex().re).unwrap_or(0.0);
    let w = p.omega.to_complex().re;
    let c0 = p.phase0.to_complex().norm().ln();
    let per_index = p.step.as_ref().map(|s| {
        let lw = s.to_complex().norm().ln();
        match grid {
            Grid::WholeStep => lw,
            Grid::HalfStep => lw / 2.0,
        }
    });
    (1..=n)
        .map(|i| {
            let x = 2.0 * halton(i, 2) - 1.0;
            let y = if with_y { 2.0 * halton(i, 3) - 1.0 } else { 0.0 };
            let t = halton(i, 5) - 0.5;
            let target = 10.0 * halton(i, 7) - 5.0;
            let base = k * x + l * y + w * t + c0;
            match per_index {
                Some(li) if li.abs() > 1e-9 => {
                    let s = ((target - base) / li).round().clamp(-1e6, 1e6) as i64;
                    Point::new(x, y, t, s)
                }
                _ => {
                    let xs = if k.abs() > 1e-12 { x + (target - base) / k } else { x };
                    Point::new(xs, y, t, 0)
                }
            }
        })
        .collect()
}

/// Points with no soliton to centre on.
pub fn default_points(n: usize, with_y: bool) -> Vec<Point> {
    (1..=n)
        .map(|i| {
            let y = if with_y { 2.0 * halton(i, 3) - 1.0 } else { 0.0 };
            Point::new(2.0 * halton(i, 2) - 1.0, y, halton(i, 5) - 0.5, (20.0 * halton(i, 7)) as i64 - 10)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expalg::Ctx;
    use crate::systems::EquationId;

    #[test]
    fn halton_values() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(2, 3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn core_points_sit_in_the_core() {
        let x = Ctx::Float;
        let h = x.float(0.5);
        let p = SolitonParam::lattice(EquationId::KdV, x.float(0.8), None, &h).unwrap();
        let lw = p.step.as_ref().unwrap().to_complex().norm().ln();
        for q in core_points(&p, 50, Grid::WholeStep, false) {
            let phase = 0.8 * q.x + p.omega.to_complex().re * q.t + lw * q.s as f64;
            assert!(phase.abs() <= 5.0 + lw, "{phase}");
        }
    }
}
