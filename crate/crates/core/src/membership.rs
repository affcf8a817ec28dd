//! Piecewise-linear membership functions (triangles and trapezoids).

use crate::error::{Error, Result};

/// A fuzzy term's shape: maps a crisp value to a membership degree in [0,1].
///
/// Shoulder shapes are expressed by collapsing breakpoints: a triangle with
/// `a == b` ramps down from full membership at the left edge, a trapezoid
/// with `c == d` holds full membership up to the right edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MembershipFunction {
    Triangle { a: f64, b: f64, c: f64 },
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
}

impl MembershipFunction {
    /// Triangle with feet `a`, `c` and apex `b`; requires `a <= b <= c`.
    pub fn triangle(a: f64, b: f64, c: f64) -> Result<Self> {
        check_points(&[a, b, c])?;
        Ok(MembershipFunction::Triangle { a, b, c })
    }

    /// Trapezoid with feet `a`, `d` and plateau `[b, c]`; requires `a <= b <= c <= d`.
    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        check_points(&[a, b, c, d])?;
        Ok(MembershipFunction::Trapezoid { a, b, c, d })
    }

    /// Membership degree at `x`. Exact 1.0 on the flat top, exact 0.0 outside
    /// the support, linear on the ramps. `x` must be finite; universe clamping
    /// is the caller's job (see `LinguisticVariable::fuzzify`).
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x.is_finite());
        let (a, b, c, d) = self.corners();
        if x < a || x > d {
            0.0
        } else if x >= b && x <= c {
            1.0
        } else if x < b {
            // a <= x < b, so b > a and the division is safe
            (x - a) / (b - a)
        } else {
            // c < x <= d, so d > c
            (d - x) / (d - c)
        }
    }

    /// The half-open support `(lo, hi)`: membership is zero outside `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        let (a, _, _, d) = self.corners();
        (a, d)
    }

    /// Abscissae where the shape kinks, in nondecreasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            MembershipFunction::Triangle { a, b, c } => vec![a, b, c],
            MembershipFunction::Trapezoid { a, b, c, d } => vec![a, b, c, d],
        }
    }

    /// View as trapezoid corners (a triangle is a trapezoid with `b == c`).
    fn corners(&self) -> (f64, f64, f64, f64) {
        match *self {
            MembershipFunction::Triangle { a, b, c } => (a, b, b, c),
            MembershipFunction::Trapezoid { a, b, c, d } => (a, b, c, d),
        }
    }
}

fn check_points(pts: &[f64]) -> Result<()> {
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidShape(format!(
            "abscissae must be finite, got {pts:?}"
        )));
    }
    if pts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidShape(format!(
            "abscissae must be nondecreasing, got {pts:?}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_apex_is_one() {
        let mf = MembershipFunction::triangle(30.0, 50.0, 70.0).unwrap();
        assert_eq!(mf.eval(50.0), 1.0);
    }

    #[test]
    fn triangle_ramp_interpolates() {
        // (70 - 60) / (70 - 50) on the falling ramp
        let mf = MembershipFunction::triangle(30.0, 50.0, 70.0).unwrap();
        assert_relative_eq!(mf.eval(60.0), 0.5);
        assert_relative_eq!(mf.eval(35.0), 0.25);
    }

    #[test]
    fn triangle_zero_at_and_outside_feet() {
        let mf = MembershipFunction::triangle(30.0, 50.0, 70.0).unwrap();
        assert_eq!(mf.eval(30.0), 0.0);
        assert_eq!(mf.eval(70.0), 0.0);
        assert_eq!(mf.eval(10.0), 0.0);
        assert_eq!(mf.eval(90.0), 0.0);
    }

    #[test]
    fn trapezoid_plateau_is_one() {
        let mf = MembershipFunction::trapezoid(50.0, 70.0, 100.0, 100.0).unwrap();
        assert_eq!(mf.eval(80.0), 1.0);
        assert_eq!(mf.eval(100.0), 1.0); // right shoulder reaches the edge
        assert_eq!(mf.eval(70.0), 1.0);
    }

    #[test]
    fn left_shoulder_holds_at_edge() {
        let mf = MembershipFunction::trapezoid(0.0, 0.0, 30.0, 50.0).unwrap();
        assert_eq!(mf.eval(0.0), 1.0);
        assert_relative_eq!(mf.eval(40.0), 0.5);
        assert_eq!(mf.eval(50.0), 0.0);
    }

    #[test]
    fn degenerate_spike() {
        let mf = MembershipFunction::triangle(5.0, 5.0, 5.0).unwrap();
        assert_eq!(mf.eval(5.0), 1.0);
        assert_eq!(mf.eval(5.1), 0.0);
        assert_eq!(mf.eval(4.9), 0.0);
    }

    #[test]
    fn rejects_descending_points() {
        assert!(MembershipFunction::triangle(50.0, 30.0, 70.0).is_err());
        assert!(MembershipFunction::trapezoid(0.0, 10.0, 5.0, 20.0).is_err());
        assert!(MembershipFunction::triangle(0.0, f64::NAN, 1.0).is_err());
    }
}
