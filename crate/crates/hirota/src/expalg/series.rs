//! Truncated Taylor series in (x, y, t) at a point, used for jets of tau
//! functions, their logarithms and ratios.

use num_complex::Complex64;

use super::{AlgError, ExpSum, Point, Var};

/// Highest retained power per variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Orders {
    pub x: usize,
    pub y: usize,
    pub t: usize,
}

impl Orders {
    pub fn new(x: usize, y: usize, t: usize) -> Orders {
        Orders { x, y, t }
    }

    fn len(&self) -> usize {
        (self.x + 1) * (self.y + 1) * (self.t + 1)
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.y + 1) + j) * (self.t + 1) + k
    }
}

/// exp(log_scale) * sum c[i,j,k] dx^i dy^j dt^k, truncated at `orders`.
/// Coefficients are Taylor coefficients, not derivatives.
#[derive(Clone, Debug)]
pub struct Series {
    orders: Orders,
    log_scale: f64,
    c: Vec<Complex64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

impl Series {
    fn zeros(orders: Orders) -> Series {
        Series { orders, log_scale: 0.0, c: vec![CZERO; orders.len()] }
    }

    /// Taylor expansion of an exponential sum at `p`, normalized so the
    /// largest term has unit magnitude (tracked in the log scale).
    pub fn of_expsum(f: &ExpSum, p: &Point, orders: Orders) -> Result<Series, AlgError> {
        let logs = f.term_logs(p);
        let scale = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let mut s = Series::zeros(orders);
        if logs.is_empty() {
            return Ok(s);
        }
        s.log_scale = scale;
        for (t, l) in f.terms().iter().zip(&logs) {
            let w = (l - scale).exp();
            let ax = t.phase.x.to_complex();
            let ay = t.phase.y.to_complex();
            let at = t.phase.t.to_complex();
            for i in 0..=orders.x {
                let px = ax.powu(i as u32) / factorial(i);
                for j in 0..=orders.y {
                    let py = ay.powu(j as u32) / factorial(j);
                    for k in 0..=orders.t {
                        let pt = at.powu(k as u32) / factorial(k);
                        s.c[orders.idx(i, j, k)] += w * px * py * pt;
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn orders(&self) -> Orders {
        self.orders
    }

    /// Value of the constant coefficient, including the scale.
    pub fn value(&self) -> Complex64 {
        self.c[0] * self.log_scale.exp()
    }

    /// Partial derivative d^(i+j+k) / dx^i dy^j dt^k at the expansion point.
    pub fn deriv(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let o = self.orders;
        assert!(i <= o.x && j <= o.y && k <= o.t, "derivative beyond truncation order");
        self.c[o.idx(i, j, k)] * (factorial(i) * factorial(j) * factorial(k)) * self.log_scale.exp()
    }

    /// Derivative along one variable, repeated n times.
    pub fn d(&self, v: Var, n: usize) -> Complex64 {
        match v {
            Var::X => self.deriv(n, 0, 0),
            Var::Y => self.deriv(0, n, 0),
            Var::T => self.deriv(0, 0, n),
        }
    }

    fn compat(&self, o: &Series) {
        assert_eq!(self.orders, o.orders, "series truncation orders differ");
    }

    pub fn mul(&self, o: &Series) -> Series {
        self.compat(o);
        let n = self.orders;
        let mut r = Series::zeros(n);
        r.log_scale = self.log_scale + o.log_scale;
        for i1 in 0..=n.x {
            for j1 in 0..=n.y {
                for k1 in 0..=n.t {
                    let a = self.c[n.idx(i1, j1, k1)];
                    if a == CZERO {
                        continue;
                    }
                    for i2 in 0..=n.x - i1 {
                        for j2 in 0..=n.y - j1 {
                            for k2 in 0..=n.t - k1 {
                                r.c[n.idx(i1 + i2, j1 + j2, k1 + k2)] += a * o.c[n.idx(i2, j2, k2)];
                            }
                        }
                    }
                }
            }
        }
        r
    }

    /// Sum; both operands are rescaled to the larger scale.
    pub fn add(&self, o: &Series) -> Series {
        self.compat(o);
        let s = self.log_scale.max(o.log_scale);
        let (wa, wb) = ((self.log_scale - s).exp(), (o.log_scale - s).exp());
        Series {
            orders: self.orders,
            log_scale: s,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a * wa + b * wb).collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Series {
        Series { c: self.c.iter().map(|a| a * z).collect(), ..self.clone() }
    }

    /// Split F = F0 (1 + G); returns (F0 as unscaled coefficient, G).
    fn split(&self) -> Result<(Complex64, Series), AlgError> {
        let f0 = self.c[0];
        let mag: f64 = self.c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if f0.norm() <= 1e-13 * mag.max(f64::MIN_POSITIVE) {
            return Err(AlgError::Singular("series constant term".into()));
        }
        let mut g = Series { orders: self.orders, log_scale: 0.0, c: self.c.iter().map(|z| z / f0).collect() };
        g.c[0] = CZERO;
        Ok((f0, g))
    }

    fn nilpotency(&self) -> usize {
        self.orders.x + self.orders.y + self.orders.t
    }

    pub fn inv(&self) -> Result<Series, AlgError> {
        let (f0, g) = self.split()?;
        let mut acc = Series::zeros(self.orders);
        acc.c[0] = Complex64::new(1.0, 0.0);
        let mut pw = acc.clone();
        let neg = g.scale(Complex64::new(-1.0, 0.0));
        for _ in 0..self.nilpotency() {
            pw = pw.mul(&neg);
            acc = acc.add(&pw);
        }
        acc = acc.scale(f0.inv());
        acc.log_scale = -self.log_scale;
        Ok(acc)
    }

    /// Natural logarithm (principal branch at the constant term).
    pub fn ln(&self) -> Result<Series, AlgError> {
        let (f0, g) = self.split()?;
        let mut acc = Series::zeros(self.orders);
        let mut pw = acc.clone();
        pw.c[0] = Complex64::new(1.0, 0.0);
        for n in 1..=self.nilpotency() {
            pw = pw.mul(&g);
            let sgn = if n % 2 == 1 { 1.0 } else { -1.0 };
            acc = acc.add(&pw.scale(Complex64::new(sgn / n as f64, 0.0)));
        }
        acc.c[0] = f0.ln() + self.log_scale;
        acc.log_scale = 0.0;
        Ok(acc)
    }

    pub fn div(&self, o: &Series) -> Result<Series, AlgError> {
        Ok(self.mul(&o.inv()?))
    }
}

/// Jet of f/g at a point: all partial derivatives up to `max_order` in each of
/// the listed variables (other variables are not differentiated).
pub fn ratio_jet(f: &ExpSum, g: &ExpSum, p: &Point, max_order: usize, vars: &[Var]) -> Result<Series, AlgError> {
    let o = |v: Var| if vars.contains(&v) { max_order } else { 0 };
    let orders = Orders::new(o(Var::X), o(Var::Y), o(Var::T));
    let fs = Series::of_expsum(f, p, orders)?;
    let gs = Series::of_expsum(g, p, orders)?;
    fs.div(&gs).map_err(|_| AlgError::Singular(format!("{p:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expalg::{Ctx, LinForm};

    fn c() -> Ctx {
        Ctx::default()
    }

    fn ex(a: i64) -> ExpSum {
        ExpSum::exp(LinForm::new(c().int(a), c().zero(), c().zero()))
    }

    #[test]
    fn ratio_of_equal_sums_is_one() {
        let f = ex(1).add(&ExpSum::one(c())).unwrap();
        let j = ratio_jet(&f, &f, &Point::new(0.3, 0.0, 0.0, 0), 3, &[Var::X]).unwrap();
        assert!((j.deriv(0, 0, 0) - 1.0).norm() < 1e-14);
        for n in 1..=3 {
            assert!(j.deriv(n, 0, 0).norm() < 1e-13);
        }
    }

    #[test]
    fn pure_exponential_jet() {
        let j = ratio_jet(&ex(2), &ExpSum::one(c()), &Point::new(0.0, 0.0, 0.0, 0), 3, &[Var::X]).unwrap();
        assert!((j.deriv(0, 0, 0).re - 1.0).abs() < 1e-14);
        assert!((j.deriv(1, 0, 0).re - 2.0).abs() < 1e-14);
        assert!((j.deriv(2, 0, 0).re - 4.0).abs() < 1e-14);
    }

    #[test]
    fn log_derivatives_of_kink() {
        // d/dx ln(1+e^x) = e^x/(1+e^x)
        let f = ex(1).add(&ExpSum::one(c())).unwrap();
        let x = 0.7f64;
        let s = Series::of_expsum(&f, &Point::new(x, 0.0, 0.0, 0), Orders::new(3, 0, 0)).unwrap().ln().unwrap();
        let sig = 1.0 / (1.0 + (-x).exp());
        assert!((s.deriv(1, 0, 0).re - sig).abs() < 1e-14);
        assert!((s.deriv(2, 0, 0).re - sig * (1.0 - sig)).abs() < 1e-14);
        assert!((s.deriv(0, 0, 0).re - (1.0 + x.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn large_arguments_stay_finite() {
        let f = ex(1).add(&ExpSum::one(c())).unwrap();
        let s = Series::of_expsum(&f, &Point::new(2000.0, 0.0, 0.0, 0), Orders::new(2, 0, 0)).unwrap().ln().unwrap();
        assert!((s.deriv(1, 0, 0).re - 1.0).abs() < 1e-14);
        assert!((s.deriv(0, 0, 0).re - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn singular_denominator() {
        let g = ex(1).sub(&ExpSum::one(c())).unwrap();
        assert!(ratio_jet(&ExpSum::one(c()), &g, &Point::new(0.0, 0.0, 0.0, 0), 1, &[Var::X]).is_err());
    }
}
