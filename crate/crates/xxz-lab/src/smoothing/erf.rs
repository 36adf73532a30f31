//! The error function, via the classical rational approximations of
//! Cody's CALERF: three regimes (small argument, central, asymptotic),
//! each accurate to full double precision.

const A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

const SQRPI: f64 = 5.6418958354775628695e-1; // 1/sqrt(pi)

fn erfc_positive(y: f64) -> f64 {
    debug_assert!(y >= 0.46875);
    if y <= 4.0 {
        let mut xnum = C[8] * y;
        let mut xden = y;
        for i in 0..7 {
            xnum = (xnum + C[i]) * y;
            xden = (xden + D[i]) * y;
        }
        let r = (xnum + C[7]) / (xden + D[7]);
        // split the exponent to avoid cancellation in exp(-y*y)
        let ysq = (y * 16.0).trunc() / 16.0;
        let del = (y - ysq) * (y + ysq);
        (-ysq * ysq).exp() * (-del).exp() * r
    } else if y < 26.6 {
        let inv2 = 1.0 / (y * y);
        let mut xnum = P[5] * inv2;
        let mut xden = inv2;
        for i in 0..4 {
            xnum = (xnum + P[i]) * inv2;
            xden = (xden + Q[i]) * inv2;
        }
        let mut r = inv2 * (xnum + P[4]) / (xden + Q[4]);
        r = (SQRPI - r) / y;
        let ysq = (y * 16.0).trunc() / 16.0;
        let del = (y - ysq) * (y + ysq);
        (-ysq * ysq).exp() * (-del).exp() * r
    } else {
        0.0
    }
}

/// The error function.
pub fn erf(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        let ysq = if y > 1.11e-16 { y * y } else { 0.0 };
        let mut xnum = A[4] * ysq;
        let mut xden = ysq;
        for i in 0..3 {
            xnum = (xnum + A[i]) * ysq;
            xden = (xden + B[i]) * ysq;
        }
        x * (xnum + A[3]) / (xden + B[3])
    } else {
        let r = 1.0 - erfc_positive(y);
        if x < 0.0 {
            -r
        } else {
            r
        }
    }
}

/// The complementary error function `1 - erf(x)`, accurate in the tail.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        1.0 - erf(x)
    } else if x < 0.0 {
        2.0 - erfc_positive(y)
    } else {
        erfc_positive(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Taylor series, reliable for |x| <= 2.
    fn erf_taylor(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            let nf = n as f64;
            term *= -x * x / nf;
            let add = term / (2.0 * nf + 1.0);
            sum += add;
            if add.abs() < 1e-20 {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    /// Modified Lentz continued fraction for erfc, reliable for x > 2:
    /// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    fn erfc_cf(x: f64) -> f64 {
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for n in 1..500 {
            let a = n as f64 / 2.0;
            d = x + a * d;
            if d == 0.0 {
                d = 1e-300;
            }
            c = x + a / c;
            if c == 0.0 {
                c = 1e-300;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-17 {
                break;
            }
        }
        (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
    }

    #[test]
    fn matches_taylor_on_core() {
        for i in 0..=400 {
            let x = -2.0 + 4.0 * i as f64 / 400.0;
            let got = erf(x);
            let want = erf_taylor(x);
            assert!((got - want).abs() < 1e-14, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn matches_continued_fraction_in_tail() {
        for i in 0..=100 {
            let x = 2.0 + 10.0 * i as f64 / 100.0;
            let got = erfc(x);
            let want = erfc_cf(x);
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-11, "x={x}: {got} vs {want} rel {rel:.2e}");
        }
    }

    #[test]
    fn known_values_and_symmetry() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - 0.842700792949714869).abs() < 1e-15);
        assert!((erfc(1.0) - 0.157299207050285131).abs() < 1e-15);
        assert!((erf(3.0) - 0.999977909503001415).abs() < 1e-15);
        for x in [0.1, 0.7, 1.3, 2.5, 5.0] {
            assert!((erf(-x) + erf(x)).abs() < 1e-16);
            assert!((erf(x) + erfc(x) - 1.0).abs() < 1e-15);
        }
        assert!(erfc(27.0) == 0.0);
        assert!((erfc(10.0) - 2.0884875837625447570e-45).abs() < 1e-58);
    }
}
