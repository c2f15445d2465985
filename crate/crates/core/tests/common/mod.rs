//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

pub fn rossler(a: f64, b: f64, c: f64) -> impl Fn(&[f64; 3]) -> [f64; 3] {
    move |s| [-s[1] - s[2], s[0] + a * s[1], b + s[2] * (s[0] - c)]
}

// independent oracle: 3-D Newton on f = 0 with a hand-written Jacobian
pub fn newton_equilibrium(a: f64, b: f64, c: f64, mut s: [f64; 3]) -> [f64; 3] {
    let f = rossler(a, b, c);
    for _ in 0..50 {
        let r = f(&s);
        let j = [[0.0, -1.0, -1.0], [1.0, a, 0.0], [s[2], 0.0, s[0] - c]];
        let det = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(&j);
        let mut step = [0.0; 3];
        for (k, out) in step.iter_mut().enumerate() {
            let mut m = j;
            for row in 0..3 {
                m[row][k] = -r[row];
            }
            *out = det(&m) / d;
        }
        for i in 0..3 {
            s[i] += step[i];
        }
        if step.iter().all(|v| v.abs() < 1e-16) {
            break;
        }
    }
    s
}

// independent oracle: classical RK4 for the frozen system
pub type Field = Box<dyn Fn(&[f64; 3]) -> [f64; 3]>;

pub struct Rk4 {
    pub f: Field,
}

impl Rk4 {
    pub fn step(&self, s: &[f64; 3], h: f64) -> [f64; 3] {
        let add = |a: &[f64; 3], k: &[f64; 3], c: f64| [a[0] + c * k[0], a[1] + c * k[1], a[2] + c * k[2]];
        let k1 = (self.f)(s);
        let k2 = (self.f)(&add(s, &k1, h / 2.0));
        let k3 = (self.f)(&add(s, &k2, h / 2.0));
        let k4 = (self.f)(&add(s, &k3, h));
        [0, 1, 2].map(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    }

    /// Rising crossings of `x = y` with `x ≤ 0`, located by secant on the
    /// sub-step length.
    pub fn crossings(&self, mut s: [f64; 3], h: f64, transient: f64, duration: f64) -> Vec<[f64; 2]> {
        let g = |s: &[f64; 3]| s[0] - s[1];
        let transient_steps = (transient / h) as usize;
        for _ in 0..transient_steps {
            s = self.step(&s, h);
        }
        let mut out = Vec::new();
        for _ in 0..(duration / h) as usize {
            let next = self.step(&s, h);
            if g(&s) < 0.0 && g(&next) >= 0.0 {
                let (mut h0, mut g0, mut h1, mut g1) = (0.0, g(&s), h, g(&next));
                let mut hit = next;
                for _ in 0..30 {
                    let hm = h1 - g1 * (h1 - h0) / (g1 - g0);
                    hit = self.step(&s, hm);
                    let gm = g(&hit);
                    if gm.abs() < 1e-15 {
                        break;
                    }
                    (h0, g0, h1, g1) = (h1, g1, hm, gm);
                }
                if hit[0] <= 0.0 {
                    out.push([hit[0], hit[2]]);
                }
            }
            s = next;
        }
        out
    }
}
