//! Adaptive Gauss-Kronrod quadrature.
//!
//! Each panel is integrated with the 15-point Kronrod rule and its embedded
//! 7-point Gauss rule; `|K15 - G7|` is the panel error estimate. Panels with
//! the largest estimate are bisected until the summed estimate meets the
//! tolerance. Panel order is fixed, so results are bit-for-bit reproducible.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

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

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_est: f64,
    pub panels: usize,
}

impl Quadrature {
    pub fn converged(&self, tol: f64) -> bool {
        self.err_est <= tol
    }
}

/// One Gauss-Kronrod 7/15 panel on `[a, b]`: `(K15, |K15 - G7|)`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive integration of `f` over `[a, b]` to absolute tolerance `abs_tol`,
/// using at most `max_panels` panels.
///
/// The integrand is never evaluated at `a` or `b`, so integrable endpoint
/// behaviour that has been removed by a substitution is harmless.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, err_est: 0.0, panels: 0 };
    }
    let (value, err) = gauss_kronrod_15(&f, a, b);
    let mut panels = vec![Panel { a, b, value, err }];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= abs_tol || panels.len() >= max_panels {
            break;
        }
        // Bisect the worst panel; ties resolve to the lowest index.
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.err > be { (i, p.err) } else { (bi, be) });
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split any further in floating point.
            panels[worst].err = 0.0;
            continue;
        }
        let (lv, le) = gauss_kronrod_15(&f, p.a, mid);
        let (rv, re) = gauss_kronrod_15(&f, mid, p.b);
        panels[worst] = Panel { a: p.a, b: mid, value: lv, err: le };
        panels.insert(worst + 1, Panel { a: mid, b: p.b, value: rv, err: re });
    }
    let value = panels.iter().map(|p| p.value).sum();
    let err_est = panels.iter().map(|p| p.err).sum();
    Quadrature { value, err_est, panels: panels.len() }
}

/// Integral of `f` over `[a, b]` when `f` has an inverse square root
/// singularity at either end, via `s = a + u²` on the left half and
/// `s = b - u²` on the right half.
pub fn integrate_sqrt_endpoints<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Quadrature {
    let mid = 0.5 * (a + b);
    let left = integrate(|u: f64| 2.0 * u * f(a + u * u), 0.0, (mid - a).sqrt(), 0.5 * abs_tol, max_panels);
    let right = integrate(|u: f64| 2.0 * u * f(b - u * u), 0.0, (b - mid).sqrt(), 0.5 * abs_tol, max_panels);
    Quadrature {
        value: left.value + right.value,
        err_est: left.err_est + right.err_est,
        panels: left.panels + right.panels,
    }
}
