//! Special functions used by the coupling model: the Bessel function of the
//! first kind of order one, its positive zeros, and the associated Laguerre
//! polynomials `L_n^(1)`.
//!
//! The `J1` evaluation follows the classic FDLIBM rational-approximation
//! scheme (series-derived minimax fit on `[0, 2]`, asymptotic form with
//! `pone`/`qone` correction polynomials beyond), which keeps the absolute
//! error below `1e-12` over `|x| <= 50` in `f64`.

// coefficient tables are kept verbatim from the reference fits
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const SQRT_PI: f64 = 1.772453850905516027298167483341145182798;
const TWO_129: f64 = 6.80564733841876926e+38; // 2^129
const TWO_M27: f64 = 7.4505805969238281e-09; // 2^-27

// R0/S0 on [0, 2]
const R00: f64 = -6.25000000000000000000e-02;
const R01: f64 = 1.40705666955189706048e-03;
const R02: f64 = -1.59955631084035597520e-05;
const R03: f64 = 4.96727999609584448412e-08;
const S01: f64 = 1.91537599538363460805e-02;
const S02: f64 = 1.85946785588630915560e-04;
const S03: f64 = 1.17718464042623683263e-06;
const S04: f64 = 5.04636257076217042715e-09;
const S05: f64 = 1.23542274426137913908e-11;

// pone: for x in [8, inf) = 1/[0, 0.125]
const P1R8: [f64; 6] = [
    0.00000000000000000000e+00,
    1.17187499999988647970e-01,
    1.32394806593073575129e+01,
    4.12051854307378562225e+02,
    3.87474538913960532227e+03,
    7.91447954031891731574e+03,
];
const P1S8: [f64; 5] = [
    1.14207370375678408436e+02,
    3.65093083420853463394e+03,
    3.69562060269033463555e+04,
    9.76027935934950801311e+04,
    3.08042720627888811578e+04,
];

// for x in [4.5454, 8]
const P1R5: [f64; 6] = [
    1.31990519556243522749e-11,
    1.17187493190614097638e-01,
    6.80275127868432871736e+00,
    1.08308182990189109773e+02,
    5.17636139533199752805e+02,
    5.28715201363337541807e+02,
];
const P1S5: [f64; 5] = [
    5.92805987221131331921e+01,
    9.91401418733614377743e+02,
    5.35326695291487976647e+03,
    7.84469031749551231769e+03,
    1.50404688810361062679e+03,
];

// for x in [2.8571, 4.5454]
const P1R3: [f64; 6] = [
    3.02503916137373618024e-09,
    1.17186865567253592491e-01,
    3.93297750033315640650e+00,
    3.51194035591636932736e+01,
    9.10550110750781271918e+01,
    4.85590685197364919645e+01,
];
const P1S3: [f64; 5] = [
    3.47913095001251519989e+01,
    3.36762458747825746741e+02,
    1.04687139975775130551e+03,
    8.90811346398256432622e+02,
    1.03787932439639277504e+02,
];

// for x in [2, 2.8571]
const P1R2: [f64; 6] = [
    1.07710830106873743082e-07,
    1.17176219462683348094e-01,
    2.36851496667608785174e+00,
    1.22426109148261232917e+01,
    1.76939711271687727390e+01,
    5.07352312588818499250e+00,
];
const P1S2: [f64; 5] = [
    2.14364859363821409488e+01,
    1.25290227168402751090e+02,
    2.32276469057162813669e+02,
    1.17679373287147100768e+02,
    8.36463893371618283368e+00,
];

// qone: for x in [8, inf)
const Q1R8: [f64; 6] = [
    0.00000000000000000000e+00,
    -1.02539062499992714161e-01,
    -1.62717534544589987888e+01,
    -7.59601722513950107896e+02,
    -1.18498066702429587167e+04,
    -4.84385124285750353010e+04,
];
const Q1S8: [f64; 6] = [
    1.61395369700722909556e+02,
    7.82538599923348465381e+03,
    1.33875336287249578163e+05,
    7.19657723683240939863e+05,
    6.66601232617776375264e+05,
    -2.94490264303834643215e+05,
];

// for x in [4.5454, 8]
const Q1R5: [f64; 6] = [
    -2.08979931141764104297e-11,
    -1.02539050241375426231e-01,
    -8.05644828123936029840e+00,
    -1.83669607474888380239e+02,
    -1.37319376065508163265e+03,
    -2.61244440453215656817e+03,
];
const Q1S5: [f64; 6] = [
    8.12765501384335777857e+01,
    1.99179873460485964642e+03,
    1.74684851924908907677e+04,
    4.98514270910352279316e+04,
    2.79480751638918118260e+04,
    -4.71918354795128470869e+03,
];

// for x in [2.8571, 4.5454]
const Q1R3: [f64; 6] = [
    -5.07831226461766561369e-09,
    -1.02537829820837089745e-01,
    -4.61011581139473403113e+00,
    -5.78472216562783643212e+01,
    -2.28244540737631695038e+02,
    -2.19210128478909325622e+02,
];
const Q1S3: [f64; 6] = [
    4.76651550323729509273e+01,
    6.73865112676699709482e+02,
    3.38015286679526343505e+03,
    5.54772909720722782367e+03,
    1.90311919338810798763e+03,
    -1.35201191444307340817e+02,
];

// for x in [2, 2.8571]
const Q1R2: [f64; 6] = [
    -1.78381727510958865572e-07,
    -1.02517042607985553460e-01,
    -2.75220568278187460720e+00,
    -1.96636162643703720221e+01,
    -4.23253133372830490089e+01,
    -2.13719211703704061733e+01,
];
const Q1S2: [f64; 6] = [
    2.95333629060523854548e+01,
    2.52981549982190529136e+02,
    7.57502834868645436472e+02,
    7.39393205320467245656e+02,
    1.55949003336666123687e+02,
    -4.95949898822628210127e+00,
];

fn pone<T: Real>(x: T) -> T {
    let (p, q) = if x >= lit(8.0) {
        (&P1R8, &P1S8)
    } else if x >= lit(4.5454) {
        (&P1R5, &P1S5)
    } else if x >= lit(2.8571) {
        (&P1R3, &P1S3)
    } else {
        (&P1R2, &P1S2)
    };
    let z = T::one() / (x * x);
    let r = lit::<T>(p[0])
        + z * (lit::<T>(p[1])
            + z * (lit::<T>(p[2]) + z * (lit::<T>(p[3]) + z * (lit::<T>(p[4]) + z * lit(p[5])))));
    let s = T::one()
        + z * (lit::<T>(q[0])
            + z * (lit::<T>(q[1]) + z * (lit::<T>(q[2]) + z * (lit::<T>(q[3]) + z * lit(q[4])))));
    T::one() + r / s
}

fn qone<T: Real>(x: T) -> T {
    let (p, q) = if x >= lit(8.0) {
        (&Q1R8, &Q1S8)
    } else if x >= lit(4.5454) {
        (&Q1R5, &Q1S5)
    } else if x >= lit(2.8571) {
        (&Q1R3, &Q1S3)
    } else {
        (&Q1R2, &Q1S2)
    };
    let z = T::one() / (x * x);
    let r = lit::<T>(p[0])
        + z * (lit::<T>(p[1])
            + z * (lit::<T>(p[2]) + z * (lit::<T>(p[3]) + z * (lit::<T>(p[4]) + z * lit(p[5])))));
    let s = T::one()
        + z * (lit::<T>(q[0])
            + z * (lit::<T>(q[1])
                + z * (lit::<T>(q[2])
                    + z * (lit::<T>(q[3]) + z * (lit::<T>(q[4]) + z * lit(q[5]))))));
    (lit::<T>(0.375) + r / s) / x
}

/// Bessel function of the first kind of order one, `J1(x)`.
///
/// Errors on non-finite input.
pub fn bessel_j1<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j1: non-finite input {x}")));
    }
    Ok(bessel_j1_unchecked(x))
}

pub(crate) fn bessel_j1_unchecked<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let (ax, negative) = if x < T::zero() {
        (-x, true)
    } else {
        (x, false)
    };

    let value = if ax >= lit(2.0) {
        // J1(x) = sqrt(2/(pi x)) (pone(x) cos(x1) - qone(x) sin(x1)),
        // x1 = x - 3 pi / 4; the sin/cos of x1 are reassembled from sin(x),
        // cos(x) and cos(2x) to dodge cancellation.
        let s = ax.sin();
        let c = ax.cos();
        let mut ss = -s - c;
        let mut cc = s - c;
        if ax < T::max_value() / lit(2.0) {
            let z = (ax + ax).cos();
            if s * c > T::zero() {
                cc = z / ss;
            } else {
                ss = z / cc;
            }
        }
        if ax > lit(TWO_129) {
            lit::<T>(1.0 / SQRT_PI) * cc / ax.sqrt()
        } else {
            let u = pone(ax);
            let v = qone(ax);
            lit::<T>(1.0 / SQRT_PI) * (u * cc - v * ss) / ax.sqrt()
        }
    } else if ax < lit(TWO_M27) {
        lit::<T>(0.5) * ax
    } else {
        let z = ax * ax;
        let r = z * (lit::<T>(R00) + z * (lit::<T>(R01) + z * (lit::<T>(R02) + z * lit(R03))));
        let s = T::one()
            + z * (lit::<T>(S01)
                + z * (lit::<T>(S02) + z * (lit::<T>(S03) + z * (lit::<T>(S04) + z * lit(S05)))));
        lit::<T>(0.5) * ax + (r / s) * ax
    };

    if negative {
        -value
    } else {
        value
    }
}

/// The `k`-th positive zero of `J1` (`k >= 1`), refined by bisection from the
/// McMahon asymptotic estimate.
pub fn j1_zero<T: Real>(k: usize) -> Result<T> {
    if k == 0 {
        return Err(Error::Domain("j1_zero: k must be >= 1".into()));
    }
    // McMahon: beta = (k + 1/4) pi; zero ~ beta - 3/(8 beta), good to a few
    // 1e-3 already at k = 1.
    let beta = lit::<T>((k as f64 + 0.25) * std::f64::consts::PI);
    let guess = beta - lit::<T>(3.0 / 8.0) / beta;
    let mut a = guess - lit(0.3);
    let mut b = guess + lit(0.3);
    let mut fa = bessel_j1_unchecked(a);
    if fa == T::zero() {
        return Ok(a);
    }
    if fa * bessel_j1_unchecked(b) > T::zero() {
        return Err(Error::NumericalCheck(format!(
            "j1_zero: bracket around {guess} does not straddle a sign change"
        )));
    }
    for _ in 0..200 {
        let m = lit::<T>(0.5) * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = bessel_j1_unchecked(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if fa * fm < T::zero() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(lit::<T>(0.5) * (a + b))
}

/// Associated Laguerre polynomial `L_n^(1)(x)` by the three-term recurrence.
///
/// Errors on negative or non-finite `x`.
pub fn laguerre_l1<T: Real>(n: usize, x: T) -> Result<T> {
    if !x.is_finite() || x < T::zero() {
        return Err(Error::Domain(format!(
            "laguerre_l1: x must be finite and >= 0, got {x}"
        )));
    }
    // (k+1) L_{k+1}^(1) = (2k + 2 - x) L_k^(1) - (k+1) L_{k-1}^(1)
    let mut prev = T::one(); // L_0^(1)
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = lit::<T>(2.0) - x; // L_1^(1)
    for k in 1..n {
        let kf = lit::<T>(k as f64);
        let next =
            ((lit::<T>(2.0) * kf + lit(2.0) - x) * cur - (kf + T::one()) * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Table of `ln(n!)` for `n = 0..len-1`, built by cumulative summation.
pub fn ln_factorial_table<T: Real>(len: usize) -> Vec<T> {
    let mut table = Vec::with_capacity(len);
    let mut acc = T::zero();
    for n in 0..len {
        if n > 0 {
            acc += lit::<T>(n as f64).ln();
        }
        table.push(acc);
    }
    table
}
