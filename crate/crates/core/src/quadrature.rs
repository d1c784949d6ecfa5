//! Globally adaptive 7/15-point Gauss-Kronrod quadrature for vector-valued
//! integrands.

use thiserror::Error;

// Kronrod abscissae on [0, 1]; odd indices are shared with the 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError<E> {
    #[error("integrand failed: {0}")]
    Integrand(E),
    #[error("tolerance {abs_tol:e} not reached after {intervals} subintervals (error estimate {estimate:e})")]
    NonConvergence { abs_tol: f64, intervals: usize, estimate: f64 },
    #[error("integrand returned a non-finite value at {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub value: Vec<f64>,
    /// Per-component error estimate (sum over subintervals).
    pub error: Vec<f64>,
    pub evaluations: usize,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

impl Segment {
    fn worst(&self) -> f64 {
        self.error.iter().copied().fold(0.0, f64::max)
    }
}

fn gk15<E>(
    f: &mut impl FnMut(f64) -> Result<Vec<f64>, E>,
    a: f64,
    b: f64,
    evaluations: &mut usize,
) -> Result<Segment, QuadError<E>> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<Vec<f64>, QuadError<E>> {
        *evaluations += 1;
        let v = f(x).map_err(QuadError::Integrand)?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(QuadError::NonFinite(x));
        }
        Ok(v)
    };
    let fc = eval(center)?;
    let dim = fc.len();
    let mut kronrod: Vec<f64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<f64> = fc.iter().map(|v| v * WG[3]).collect();
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        for c in 0..dim {
            let sum = f1[c] + f2[c];
            kronrod[c] += WGK[j] * sum;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * sum;
            }
        }
    }
    let value: Vec<f64> = kronrod.iter().map(|k| k * half).collect();
    let error: Vec<f64> = kronrod
        .iter()
        .zip(&gauss)
        .map(|(k, g)| ((k - g) * half).abs())
        .collect();
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]` until every component's error estimate is
/// at most `abs_tol`, splitting the worst subinterval each round.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<Vec<f64>, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature, QuadError<E>> {
    let mut evaluations = 0;
    let mut segments = vec![gk15(&mut f, a, b, &mut evaluations)?];
    loop {
        let dim = segments[0].value.len();
        let total_error: Vec<f64> = (0..dim)
            .map(|c| segments.iter().map(|s| s.error[c]).sum())
            .collect();
        let worst_total = total_error.iter().copied().fold(0.0, f64::max);
        if worst_total <= abs_tol {
            let value = (0..dim).map(|c| segments.iter().map(|s| s.value[c]).sum()).collect();
            return Ok(Quadrature { value, error: total_error, evaluations, intervals: segments.len() });
        }
        if segments.len() >= max_intervals {
            return Err(QuadError::NonConvergence {
                abs_tol,
                intervals: segments.len(),
                estimate: worst_total,
            });
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.worst().total_cmp(&y.1.worst()))
            .expect("at least one segment");
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(QuadError::NonConvergence {
                abs_tol,
                intervals: segments.len() + 1,
                estimate: worst_total,
            });
        }
        segments.push(gk15(&mut f, seg.a, mid, &mut evaluations)?);
        segments.push(gk15(&mut f, mid, seg.b, &mut evaluations)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn scalar(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<Vec<f64>, Infallible> {
        move |x| Ok(vec![f(x)])
    }

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(scalar(|x| 3.0 * x * x + 2.0 * x + 1.0), 0.0, 2.0, 1e-12, 10).unwrap();
        assert!((q.value[0] - 14.0).abs() < 1e-13);
        assert_eq!(q.evaluations, 15);
    }

    #[test]
    fn oscillatory_needs_refinement() {
        let q = integrate(scalar(|x| (30.0 * x).sin()), 0.0, 3.0, 1e-10, 500).unwrap();
        let exact = (1.0 - (90.0f64).cos()) / 30.0;
        assert!((q.value[0] - exact).abs() < 1e-10);
        assert!(q.intervals > 1);
    }

    #[test]
    fn vector_components_integrate_independently() {
        let q = integrate(|x: f64| Ok::<_, Infallible>(vec![x.exp(), -1.0, 0.0]), 0.0, 1.0, 1e-12, 50).unwrap();
        assert!((q.value[0] - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert!((q.value[1] + 1.0).abs() < 1e-14);
        assert_eq!(q.value[2], 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let err = integrate(scalar(|x| 1.0 / x.sqrt()), 0.0, 1.0, 1e-14, 4).unwrap_err();
        assert!(matches!(err, QuadError::NonConvergence { .. }));
    }

    #[test]
    fn propagates_integrand_errors() {
        let err = integrate(|x: f64| if x > 0.5 { Err("boom") } else { Ok(vec![x]) }, 0.0, 1.0, 1e-8, 10)
            .unwrap_err();
        assert_eq!(err, QuadError::Integrand("boom"));
    }
}
