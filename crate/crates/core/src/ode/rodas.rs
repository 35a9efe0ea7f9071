use super::{scaled_error, DynSystem, IntegrateError, IntegratorConfig, Interpolant, Jacobian, Stepper};

// Hairer-Wanner RODAS4 in the transformed (W) form: stages solve
// (I/(h gamma) - J) u_i = f(t + c_i h, y + sum a_ij u_j) + sum c_ij/h u_j + h d_i f_t.
const GAMMA: f64 = 0.25;
const C: [f64; 6] = [0.0, 0.386, 0.21, 0.63, 1.0, 1.0];
const D: [f64; 6] = [0.25, -0.1043, 0.1035, -0.0362, 0.0, 0.0];
const A: [[f64; 5]; 6] = [
    [0.0; 5],
    [1.544, 0.0, 0.0, 0.0, 0.0],
    [0.9466785280815826, 0.2557011698983284, 0.0, 0.0, 0.0],
    [3.314825187068521, 2.896124015972201, 0.9986419139977817, 0.0, 0.0],
    [
        1.221224509226641,
        6.019134481288629,
        12.53708332932087,
        -0.687886036105895,
        0.0,
    ],
    [
        1.221224509226641,
        6.019134481288629,
        12.53708332932087,
        -0.687886036105895,
        1.0,
    ],
];
const CC: [[f64; 5]; 6] = [
    [0.0; 5],
    [-5.6688, 0.0, 0.0, 0.0, 0.0],
    [-2.430093356833875, -0.2063599157091915, 0.0, 0.0, 0.0],
    [-0.1073529058151375, -9.594562251023355, -20.47028614809616, 0.0, 0.0],
    [
        7.496443313967647,
        -10.24680431464352,
        -33.99990352819905,
        11.7089089320616,
        0.0,
    ],
    [
        8.083246795921522,
        -7.981132988064893,
        -31.52159432874371,
        16.31930543123136,
        -6.058818238834054,
    ],
];
// dense output
const D2: [f64; 5] = [
    10.12623508344586,
    -7.487995877610167,
    -34.80091861555747,
    -7.992771707568823,
    1.025137723295662,
];
const D3: [f64; 5] = [
    -0.6762803392801253,
    6.087714651680015,
    16.43084320892478,
    24.76722511418386,
    -6.594389125716872,
];

/// Six-stage stiffly accurate Rosenbrock method of order 4 with an embedded
/// order-3 estimate and a third-order continuous extension.
pub(crate) struct Rodas4 {
    f0: Vec<f64>,
    fnew: Vec<f64>,
    f1: Vec<f64>,
    dfdt: Vec<f64>,
    ak: [Vec<f64>; 6],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    jac: Option<(f64, Jacobian)>,
    evals: usize,
    jac_evals: usize,
    lus: usize,
}

impl Rodas4 {
    pub(crate) fn new(dim: usize) -> Self {
        let z = || vec![0.0; dim];
        Rodas4 {
            f0: z(),
            fnew: z(),
            f1: z(),
            dfdt: z(),
            ak: std::array::from_fn(|_| z()),
            ytmp: z(),
            ynew: z(),
            jac: None,
            evals: 0,
            jac_evals: 0,
            lus: 0,
        }
    }
}

impl Stepper for Rodas4 {
    fn error_order(&self) -> f64 {
        4.0
    }

    fn init(&mut self, sys: &dyn DynSystem, t: f64, y: &[f64]) -> Result<(), IntegrateError> {
        sys.rhs(t, y, &mut self.f0);
        self.evals += 1;
        if self.f0.iter().any(|v| !v.is_finite()) {
            return Err(IntegrateError::NonFinite { t });
        }
        Ok(())
    }

    fn f0(&self) -> &[f64] {
        &self.f0
    }

    fn attempt(
        &mut self,
        sys: &dyn DynSystem,
        t: f64,
        y: &[f64],
        h: f64,
        cfg: &IntegratorConfig,
    ) -> Result<f64, IntegrateError> {
        let n = y.len();
        if self.jac.as_ref().is_none_or(|(tj, _)| *tj != t) {
            let j = sys.jacobian(t, y).ok_or(IntegrateError::MissingJacobian)?;
            let dt = f64::EPSILON.sqrt() * t.abs().max(1.0);
            sys.rhs(t + dt, y, &mut self.dfdt);
            for i in 0..n {
                self.dfdt[i] = (self.dfdt[i] - self.f0[i]) / dt;
            }
            self.evals += 1;
            self.jac_evals += 1;
            self.jac = Some((t, j));
        }
        let (_, jac) = self.jac.as_ref().expect("set above");
        let hg = h * GAMMA;
        let Some(lu) = jac.shifted_lu(hg) else {
            return Ok(f64::INFINITY);
        };
        self.lus += 1;

        for s in 0..6 {
            // stage argument; stage 6 is evaluated at y5 + u5
            let f: &[f64] = if s == 0 {
                &self.f0
            } else {
                for i in 0..n {
                    let mut v = y[i];
                    for j in 0..s {
                        v += A[s][j] * self.ak[j][i];
                    }
                    self.ytmp[i] = v;
                }
                sys.rhs(t + C[s] * h, &self.ytmp, &mut self.fnew);
                self.evals += 1;
                &self.fnew
            };
            let mut rhs = std::mem::take(&mut self.ak[s]);
            for i in 0..n {
                let mut v = f[i] + h * D[s] * self.dfdt[i];
                for j in 0..s {
                    v += CC[s][j] / h * self.ak[j][i];
                }
                rhs[i] = hg * v;
            }
            lu.solve(&mut rhs);
            self.ak[s] = rhs;
        }
        for i in 0..n {
            self.ynew[i] = self.ytmp[i] + self.ak[5][i];
        }
        if self.ynew.iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        sys.rhs(t + h, &self.ynew, &mut self.f1);
        self.evals += 1;
        if self.f1.iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        Ok(scaled_error(&self.ak[5], y, &self.ynew, cfg))
    }

    fn proposal(&self) -> &[f64] {
        &self.ynew
    }

    fn commit(&mut self, _t: f64, y: &[f64], _h: f64) -> Interpolant {
        let n = y.len();
        let mut d2 = vec![0.0; n];
        let mut d3 = vec![0.0; n];
        for i in 0..n {
            for j in 0..5 {
                d2[i] += D2[j] * self.ak[j][i];
                d3[i] += D3[j] * self.ak[j][i];
            }
        }
        std::mem::swap(&mut self.f0, &mut self.f1);
        Interpolant::Rodas {
            y0: y.to_vec(),
            y1: self.ynew.clone(),
            d2,
            d3,
        }
    }

    fn counters(&self) -> (usize, usize, usize) {
        (self.evals, self.jac_evals, self.lus)
    }
}
