//! Bracketed scalar root finding (Brent's method from the `roots` crate with
//! an x-only stopping rule, so badly scaled functions still converge).

use roots::{find_root_brent, Convergency, SearchError};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum RootError {
    #[error("f({a}) and f({b}) have the same sign; no root bracketed")]
    NoBracket { a: f64, b: f64 },
    #[error("root search did not converge")]
    NoConvergence,
}

struct XTolerance {
    tol: f64,
    max_iter: usize,
}

impl Convergency<f64> for XTolerance {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= self.tol
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.max_iter
    }
}

/// Root of `f` on `[a, b]` to absolute tolerance `x_tol`.
pub fn brent(f: impl Fn(f64) -> f64, a: f64, b: f64, x_tol: f64) -> Result<f64, RootError> {
    let mut conv = XTolerance { tol: x_tol, max_iter: 500 };
    find_root_brent(a, b, &f, &mut conv).map_err(|e| match e {
        SearchError::NoBracketing => RootError::NoBracket { a, b },
        _ => RootError::NoConvergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 3.0, 1e-13).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn tiny_scale_function() {
        let r = brent(|x| 1e-30 * (x - 0.123), -1.0, 1.0, 1e-12).unwrap();
        assert!((r - 0.123).abs() < 1e-11);
    }

    #[test]
    fn no_bracket() {
        assert!(matches!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-9), Err(RootError::NoBracket { .. })));
    }
}
