//! Tanh-sinh tensor quadrature of the simplex iterated integrals
//! `∫_{0<t_0<...<t_n<1} g_0(t_0) Π ω_{e_i}(t_i) g_n(t_n) dt`.
//!
//! The simplex is mapped to the unit cube by nested products
//! `t_n = u_n`, `t_i = t_{i+1} u_i` (Jacobian `Π_{i>=1} t_i`). Each node carries
//! the pair `(t, 1-t)` with `1 - t_i = (1-u_i) + u_i (1-t_{i+1})`, so factors
//! singular at `t = 1` keep full relative accuracy.

use std::f64::consts::PI;

use crate::words::Letter;

/// Boundary weights of the integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegralFamily {
    /// `(1-t_0)^{1-α} t_0^{β-1} ω_1(t_0) ... ω_0(t_n) t_n^{1-β} (1-t_n)^{α-1}`.
    Z { alpha: f64, beta: f64 },
    /// `t_0^{α-1} ω_1(t_0) ... ω_0(t_n)`.
    Zeta { alpha: f64 },
}

/// Half-width of the tanh-sinh parameter range.
const T_MAX: f64 = 4.0;

struct Node {
    x: f64,
    one_minus_x: f64,
    weight: f64,
}

fn tanh_sinh_nodes(h: f64) -> Vec<Node> {
    let k_max = (T_MAX / h).round() as i64;
    (-k_max..=k_max)
        .filter_map(|k| {
            let t = k as f64 * h;
            let s = 0.5 * PI * t.sinh();
            // x = 1/(1+e^{-2s}), 1-x = 1/(1+e^{2s}), dx/dt = π cosh t · x (1-x).
            let x = 1.0 / (1.0 + (-2.0 * s).exp());
            let one_minus_x = 1.0 / (1.0 + (2.0 * s).exp());
            let weight = h * PI * t.cosh() * x * one_minus_x;
            (x > 0.0 && one_minus_x > 0.0 && weight > 0.0).then_some(Node { x, one_minus_x, weight })
        })
        .collect()
}

fn omega(letter: Letter, t: f64, one_minus_t: f64) -> f64 {
    match letter {
        Letter::X0 => 1.0 / t,
        Letter::XHalf => 1.0 / (t * one_minus_t),
        Letter::X1 => 1.0 / one_minus_t,
    }
}

struct Integrand<'a> {
    letters: &'a [Letter],
    family: IntegralFamily,
    nodes: Vec<Node>,
}

impl Integrand<'_> {
    /// Weight attached to variable `i` at `(t, 1-t)`.
    fn factor(&self, i: usize, t: f64, omt: f64) -> f64 {
        let n = self.letters.len() - 1;
        let mut f = omega(self.letters[i], t, omt);
        if i == 0 {
            f *= match self.family {
                IntegralFamily::Z { alpha, beta } => omt.powf(1.0 - alpha) * t.powf(beta - 1.0),
                IntegralFamily::Zeta { alpha } => t.powf(alpha - 1.0),
            };
        }
        if i == n {
            if let IntegralFamily::Z { alpha, beta } = self.family {
                f *= t.powf(1.0 - beta) * omt.powf(alpha - 1.0);
            }
        }
        f
    }

    /// Integral over `t_0 .. t_i` given `t_{i+1}` (as `(t, 1-t)`).
    fn inner(&self, i: usize, outer: f64, outer_omt: f64) -> f64 {
        let mut acc = 0.0;
        for node in &self.nodes {
            let t = outer * node.x;
            let omt = node.one_minus_x + node.x * outer_omt;
            if t <= 0.0 {
                continue;
            }
            let f = node.weight * outer * self.factor(i, t, omt);
            acc += if i == 0 { f } else { f * self.inner(i - 1, t, omt) };
        }
        acc
    }

    fn total(&self) -> f64 {
        let n = self.letters.len() - 1;
        let mut acc = 0.0;
        for node in &self.nodes {
            let (t, omt) = (node.x, node.one_minus_x);
            let f = node.weight * self.factor(n, t, omt);
            acc += if n == 0 { f } else { f * self.inner(n - 1, t, omt) };
        }
        acc
    }
}

/// Integral attached to the letter word `x_1 x_{e_1} ... x_{e_{n-1}} x_0` with
/// tanh-sinh step `h`.
pub fn iterated_integral(letters: &[Letter], family: IntegralFamily, h: f64) -> f64 {
    assert!(letters.len() >= 2, "integral needs at least two letters");
    Integrand {
        letters,
        family,
        nodes: tanh_sinh_nodes(h),
    }
    .total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials() {
        let nodes = tanh_sinh_nodes(0.125);
        let s: f64 = nodes.iter().map(|n| n.weight * n.x * n.x).sum();
        assert!((s - 1.0 / 3.0).abs() < 1e-12);
        let s: f64 = nodes.iter().map(|n| n.weight / n.x.sqrt()).sum();
        assert!((s - 2.0).abs() < 1e-8);
    }

    #[test]
    fn zeta2_integral() {
        let v = iterated_integral(&[Letter::X1, Letter::X0], IntegralFamily::Zeta { alpha: 1.0 }, 0.125);
        assert!((v - PI * PI / 6.0).abs() < 1e-6, "{v}");
    }
}
