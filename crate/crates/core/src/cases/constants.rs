//! Frozen case constants. Decimal literals become outward-rounded intervals.

use crate::field::VectorField;
use crate::interval::Interval;

fn dec(s: &str) -> Interval {
    Interval::from_decimal(s).expect("valid decimal constant")
}

pub const ROSSLER_FIELD: &str = "par:a,b;var:x,y,z;fun:-(y+z),x+b*y,b+z*(x-a);";
pub const MICHELSON_FIELD: &str = "par:c;var:x,y,z;fun:y,z,c^2-y-x^2/2;";
/// The same system with `c` carried as a constant state variable, so that an
/// interval of `c` is tracked by the set instead of widening each step.
pub const MICHELSON_EXTENDED_FIELD: &str = "var:x,y,z,c;fun:y,z,c^2-y-x^2/2,0;";
pub const NAKAO_FIELD: &str = "time:t;var:x,dx;fun:dx,-0.1*x-0.1*x^3-0.4464*cos(t);";
pub const LORENZ_FIELD: &str = "par:s,r,b;var:x,y,z;fun:s*(y-x),x*(r-z)-y,x*y-b*z;";
pub const PENDULUM_FIELD: &str = "var:x,dx;fun:dx,-sin(x);";

pub fn rossler_field() -> VectorField {
    VectorField::parse(ROSSLER_FIELD)
        .and_then(|f| f.with_parameter("a", dec("5.7")))
        .and_then(|f| f.with_parameter("b", dec("0.2")))
        .expect("Rössler field")
}

/// `W = Y × Z`.
pub fn rossler_w() -> [Interval; 2] {
    [dec("-10.7").hull(dec("-2.7")), dec("0.028").hull(dec("0.034"))]
}

pub const ROSSLER_PERIODIC_POINTS: [[&str; 2]; 3] = [
    ["-8.3809417428298762873487630431", "0.029590060630667102951494027735"],
    ["-5.4240738226652043515673025463", "0.031081210807876445187367377796"],
    ["-6.2331586285379749515076479411", "0.030640111658160569478006226700"],
];

pub fn rossler_periodic_point(m: usize) -> [Interval; 2] {
    let [y, z] = ROSSLER_PERIODIC_POINTS[m - 1];
    [dec(y), dec(z)]
}

/// `(l_M, r_M, l_N, r_N)`.
pub fn horseshoe_edges() -> [Interval; 4] {
    [dec("-8.4"), dec("-7.6"), dec("-5.7"), dec("-4.6")]
}

pub const CONE_LAMBDA: f64 = 1.0;
pub const CONE_MU: f64 = -100.0;

pub fn michelson_c() -> Interval {
    Interval::ONE - Interval::ratio(1.0, 128.0).hull(-Interval::ratio(1.0, 128.0))
}

pub fn michelson_field(c: Interval) -> VectorField {
    VectorField::parse(MICHELSON_FIELD).and_then(|f| f.with_parameter("c", c)).expect("Michelson field")
}

pub fn michelson_extended_field() -> VectorField {
    VectorField::parse(MICHELSON_EXTENDED_FIELD).expect("extended Michelson field")
}

pub fn nakao_field() -> VectorField {
    VectorField::parse(NAKAO_FIELD).expect("Nakao field")
}

/// Reference zero and admissible distance.
pub fn nakao_reference() -> (Interval, Interval) {
    (dec("-0.5072"), dec("0.0001"))
}

pub fn lorenz_field() -> VectorField {
    VectorField::parse(LORENZ_FIELD)
        .and_then(|f| f.with_parameter("s", Interval::point(10.0)))
        .and_then(|f| f.with_parameter("r", Interval::point(28.0)))
        .and_then(|f| f.with_parameter("b", Interval::ratio(8.0, 3.0)))
        .expect("Lorenz field")
}

/// `α = 7π/18`.
pub fn lorenz_alpha() -> Interval {
    Interval::PI.mul_scalar(7.0).div_scalar(18.0)
}

pub fn lorenz_s() -> Interval {
    dec("0.625").hull(dec("0.675"))
}

pub const LORENZ_SECTION_Z: f64 = 27.0;
pub const LORENZ_BOUND: f64 = 3.6;

pub fn pendulum_field() -> VectorField {
    VectorField::parse(PENDULUM_FIELD).expect("pendulum field")
}

pub const PENDULUM_TIME: f64 = 2.0;
