use crate::model::FhrParams;
use crate::profile::Profile;

use super::KernelError;

/// Parameters and initial slow fields for the nonlinear source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceContext {
    params: FhrParams,
    pub w0: Profile,
    pub y0: Profile,
}

impl SourceContext {
    /// Requires `k = 1`, `beta != 0`, `d != 0`.
    pub fn new(params: FhrParams, w0: Profile, y0: Profile) -> Result<Self, KernelError> {
        params.validate()?;
        if params.k != 1.0 {
            return Err(KernelError::Domain(format!(
                "the integral representation holds only for k = 1 (got k = {})",
                params.k
            )));
        }
        if params.beta == 0.0 || params.d == 0.0 {
            return Err(KernelError::Domain(
                "source offsets divide by beta and d; both must be non-zero".into(),
            ));
        }
        for (name, prof) in [("w0", &w0), ("y0", &y0)] {
            prof.validate()
                .map_err(|e| KernelError::Domain(format!("{name}: {e}")))?;
        }
        Ok(SourceContext { params, w0, y0 })
    }

    pub fn params(&self) -> &FhrParams {
        &self.params
    }

    /// `w` driven by the constant `c` alone: `w0 e^{-eta t} + c/beta (1 - e^{-eta t})`.
    pub fn w_free(&self, x: f64, t: f64) -> f64 {
        let p = &self.params;
        let e = (-p.eta() * t).exp();
        self.w0.eval(x) * e + p.c / p.beta * (1.0 - e)
    }

    /// `y` driven by the constant `h` alone: `y0 e^{-gamma t} + h/d (1 - e^{-gamma t})`.
    pub fn y_free(&self, x: f64, t: f64) -> f64 {
        let p = &self.params;
        let e = (-p.gamma() * t).exp();
        self.y0.eval(x) * e + p.h / p.d * (1.0 - e)
    }

    /// The `u`-independent part of the source.
    pub fn offset(&self, x: f64, t: f64) -> f64 {
        self.params.current - self.w_free(x, t) + self.y_free(x, t)
    }
}

/// `F = u^2 (a+1-u) + I - w0 e^{-eps beta t} + y0 e^{-delta d t}
///      - c/beta (1 - e^{-eps beta t}) + h/d (1 - e^{-delta d t})`.
pub fn source_f(u: f64, x: f64, t: f64, ctx: &SourceContext) -> f64 {
    u * u * (ctx.params.a + 1.0 - u) + ctx.offset(x, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> SourceContext {
        let p = FhrParams {
            k: 1.0,
            ..FhrParams::reference_set(-0.98, 1.0)
        };
        SourceContext::new(
            p,
            Profile::Constant { value: 0.4 },
            Profile::Gaussian {
                amplitude: -0.3,
                center: 0.0,
                width: 1.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn initial_time() {
        let c = ctx();
        let p = c.params();
        let (u, x) = (0.7, 0.25);
        let want = u * u * (p.a + 1.0 - u) + p.current - 0.4 + c.y0.eval(x);
        assert!((source_f(u, x, 0.0, &c) - want).abs() < 1e-15);
    }

    #[test]
    fn long_time_limit() {
        let c = ctx();
        let p = c.params();
        let u = -0.2;
        let want = u * u * (p.a + 1.0 - u) + p.current - p.c / p.beta + p.h / p.d;
        assert!((source_f(u, 1.0, 1e4, &c) - want).abs() < 1e-12);
    }

    #[test]
    fn offsets_only() {
        let p = FhrParams {
            k: 1.0,
            current: 0.0,
            ..FhrParams::reference_set(-0.98, 1.0)
        };
        let c = SourceContext::new(p, Profile::zero(), Profile::zero()).unwrap();
        let t = 0.7;
        let want = -p.c / p.beta * (1.0 - (-p.eps * p.beta * t).exp()) + p.h / p.d * (1.0 - (-p.delta * p.d * t).exp());
        assert!((source_f(0.0, 3.0, t, &c) - want).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_contexts() {
        let base = FhrParams::reference_set(-0.98, 1.0);
        assert!(SourceContext::new(base, Profile::zero(), Profile::zero()).is_err());
        for p in [
            FhrParams {
                k: 1.0,
                beta: 0.0,
                ..base
            },
            FhrParams { k: 1.0, d: 0.0, ..base },
        ] {
            assert!(matches!(
                SourceContext::new(p, Profile::zero(), Profile::zero()),
                Err(KernelError::Domain(_))
            ));
        }
    }
}
