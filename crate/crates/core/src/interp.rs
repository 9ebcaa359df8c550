//! Monotone piecewise-cubic Hermite interpolation on a uniform grid
//! (Fritsch–Carlson slopes).

#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x0: f64,
    step: f64,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `y[j]` is the sample at `x0 + j * step`. Needs at least two samples.
    pub fn new(x0: f64, step: f64, y: Vec<f64>) -> Self {
        assert!(y.len() >= 2, "need at least two samples");
        let n = y.len();
        let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / step).collect();
        let mut slopes = vec![0.0; n];
        // three-point one-sided estimates at the ends
        if n > 2 {
            slopes[0] = (3.0 * delta[0] - delta[1]) / 2.0;
            slopes[n - 1] = (3.0 * delta[n - 2] - delta[n - 3]) / 2.0;
        } else {
            slopes[0] = delta[0];
            slopes[n - 1] = delta[0];
        }
        for j in 1..n - 1 {
            let (a, b) = (delta[j - 1], delta[j]);
            slopes[j] = if a * b <= 0.0 {
                0.0
            } else {
                // weighted harmonic mean; equal spacing makes the weights 1:1
                2.0 * a * b / (a + b)
            };
        }
        // endpoint slopes must not overshoot the secant
        for (j, d) in [(0usize, delta[0]), (n - 1, delta[n - 2])] {
            if slopes[j] * d <= 0.0 {
                slopes[j] = 0.0;
            } else if slopes[j].abs() > 3.0 * d.abs() {
                slopes[j] = 3.0 * d;
            }
        }
        Self { x0, step, y, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let t = ((x - self.x0) / self.step).clamp(0.0, (n - 1) as f64);
        let j = (t.floor() as usize).min(n - 2);
        let s = t - j as f64;
        let (y0, y1) = (self.y[j], self.y[j + 1]);
        let (m0, m1) = (self.slopes[j] * self.step, self.slopes[j + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }
}
