use super::{scaled_error, DynSystem, IntegrateError, IntegratorConfig, Interpolant, Stepper};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dormand-Prince 5(4) stepper with first-same-as-last reuse.
pub struct Dopri5 {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    err: Vec<f64>,
    evals: usize,
}

impl Dopri5 {
    pub fn new(dim: usize) -> Self {
        Dopri5 {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            ytmp: vec![0.0; dim],
            ynew: vec![0.0; dim],
            err: vec![0.0; dim],
            evals: 0,
        }
    }

    /// One fixed step from `(t, y)` with derivative `f0 = f(t, y)`.
    /// Returns the fifth-order solution. Intended for order studies.
    pub fn fixed_step(sys: &dyn Fn(f64, &[f64], &mut [f64]), t: f64, y: &[f64], h: f64) -> Vec<f64> {
        struct Wrap<'a>(&'a dyn Fn(f64, &[f64], &mut [f64]));
        impl DynSystem for Wrap<'_> {
            fn rhs(&self, t: f64, y: &[f64], d: &mut [f64]) {
                (self.0)(t, y, d)
            }
            fn jacobian(&self, _: f64, _: &[f64]) -> Option<super::Jacobian> {
                None
            }
        }
        let w = Wrap(sys);
        let mut st = Dopri5::new(y.len());
        st.init(&w, t, y).expect("finite derivative");
        st.stages(&w, t, y, h);
        st.ynew.clone()
    }

    fn stages(&mut self, sys: &dyn DynSystem, t: f64, y: &[f64], h: f64) {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let yt = &mut self.ytmp;
        for i in 0..n {
            yt[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, yt, k2);
        for i in 0..n {
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, yt, k3);
        for i in 0..n {
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, yt, k4);
        for i in 0..n {
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, yt, k5);
        for i in 0..n {
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, yt, k6);
        for i in 0..n {
            self.ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t + h, &self.ynew, k7);
        for i in 0..n {
            self.err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        self.evals += 6;
    }
}

impl Stepper for Dopri5 {
    fn error_order(&self) -> f64 {
        5.0
    }

    fn init(&mut self, sys: &dyn DynSystem, t: f64, y: &[f64]) -> Result<(), IntegrateError> {
        sys.rhs(t, y, &mut self.k[0]);
        self.evals += 1;
        if self.k[0].iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFinite { t });
        }
        Ok(())
    }

    fn f0(&self) -> &[f64] {
        &self.k[0]
    }

    fn attempt(
        &mut self,
        sys: &dyn DynSystem,
        t: f64,
        y: &[f64],
        h: f64,
        cfg: &IntegratorConfig,
    ) -> Result<f64, IntegrateError> {
        self.stages(sys, t, y, h);
        if self.k[6].iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        Ok(scaled_error(&self.err, y, &self.ynew, cfg))
    }

    fn proposal(&self) -> &[f64] {
        &self.ynew
    }

    fn commit(&mut self, _t: f64, y: &[f64], h: f64) -> Interpolant {
        let n = y.len();
        let mut r = vec![0.0; 5 * n];
        let k = &self.k;
        for i in 0..n {
            let ydiff = self.ynew[i] - y[i];
            let bspl = h * k[0][i] - ydiff;
            r[i] = y[i];
            r[n + i] = ydiff;
            r[2 * n + i] = bspl;
            r[3 * n + i] = ydiff - h * k[6][i] - bspl;
            r[4 * n + i] =
                h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
        }
        // first same as last
        self.k.swap(0, 6);
        Interpolant::Dopri5(r)
    }

    fn counters(&self) -> (usize, usize, usize) {
        (self.evals, 0, 0)
    }
}
