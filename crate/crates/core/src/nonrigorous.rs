//! Plain binary64 integration. Used to locate candidates (shooting) and as
//! a test oracle; nothing here is validated.

use crate::field::VectorField;
use crate::poincare::{Direction, Section};

pub struct Rk4<'f> {
    field: &'f VectorField,
    scratch: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'f> Rk4<'f> {
    pub fn new(field: &'f VectorField) -> Self {
        let n = field.dim();
        Rk4 { field, scratch: Vec::new(), k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n] }
    }

    pub fn step(&mut self, t: f64, x: &mut [f64], h: f64) {
        let n = x.len();
        let f = self.field;
        f.eval_f64_into(t, x, &mut self.scratch, &mut self.k[0]);
        for (stage, c) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
            for i in 0..n {
                self.tmp[i] = x[i] + c * h * self.k[stage - 1][i];
            }
            f.eval_f64_into(t + c * h, &self.tmp, &mut self.scratch, &mut self.k[stage]);
        }
        for i in 0..n {
            x[i] += h / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
    }

    /// Fixed-step flow from `t0` to `t1` with steps no longer than `h_max`.
    pub fn flow(&mut self, t0: f64, x0: &[f64], t1: f64, h_max: f64) -> Vec<f64> {
        let mut x = x0.to_vec();
        let span = t1 - t0;
        if span == 0.0 {
            return x;
        }
        let n = (span.abs() / h_max).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for i in 0..n {
            self.step(t0 + i as f64 * h, &mut x, h);
        }
        x
    }

    /// `n_iter`-th admissible crossing of `section` using the same escape
    /// rule as the rigorous map. Returns `(time, point)`.
    pub fn first_return(&mut self, section: &Section, x0: &[f64], n_iter: usize, h: f64, max_time: f64) -> Option<(f64, Vec<f64>)> {
        let threshold = 1e-6;
        let mut x = x0.to_vec();
        let mut t = 0.0;
        let mut escaped = false;
        let mut count = 0;
        let mut s_prev = section.value_f64(&x);
        while t < max_time {
            let prev = x.clone();
            self.step(t, &mut x, h);
            let s = section.value_f64(&x);
            if !escaped {
                escaped = s.abs() >= threshold;
            } else if s_prev.signum() != s.signum() && s != s_prev {
                let sign = if s > s_prev { 1 } else { -1 };
                let admitted = match section.direction() {
                    Direction::Positive => sign > 0,
                    Direction::Negative => sign < 0,
                    Direction::Both => true,
                };
                if admitted {
                    count += 1;
                    if count == n_iter {
                        return Some(self.refine(section, t, &prev, s_prev, h));
                    }
                }
            }
            s_prev = s;
            t += h;
        }
        None
    }

    /// Newton on the sub-step length from `prev` (at time `t`).
    fn refine(&mut self, section: &Section, t: f64, prev: &[f64], s_prev: f64, h: f64) -> (f64, Vec<f64>) {
        let mut tau = 0.0;
        let mut y = prev.to_vec();
        let mut s = s_prev;
        for _ in 0..50 {
            let fy = self.field.eval_f64(t + tau, &y);
            let ds = section.normal_component_f64(&fy);
            let next = (tau - s / ds).clamp(0.0, h);
            let done = (next - tau).abs() < 1e-15 * (1.0 + t);
            tau = next;
            y = self.flow(t, prev, t + tau, h);
            s = section.value_f64(&y);
            if done {
                break;
            }
        }
        (t + tau, y)
    }
}
