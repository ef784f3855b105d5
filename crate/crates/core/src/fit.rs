//! Crate-internal least-squares line fit used by the pressure and
//! box-counting diagnostics.

pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares y = a + b·x. Callers guarantee ≥ 3 points and
/// non-constant x.
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - xbar, y - ybar);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let dof = (xs.len().max(3) - 2) as f64;
    LineFit {
        slope,
        intercept,
        slope_stderr: (ss_res / dof / sxx).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
    }
}
