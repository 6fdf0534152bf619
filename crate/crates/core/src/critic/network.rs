use super::arch::CriticArchitecture;
use super::params::CriticParams;
use crate::error::{Error, Result};

/// Scratch buffers for one forward/backward pass.
pub(crate) struct Workspace {
    /// `inputs[l]` feeds layer `l`; `inputs[0]` is the data point.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
    offsets: Vec<(usize, usize)>,
}

impl Workspace {
    pub(crate) fn new(params: &CriticParams) -> Self {
        let shapes = params.shapes();
        Self {
            inputs: shapes.iter().map(|&(_, c)| vec![0.0; c]).collect(),
            pre: shapes.iter().map(|&(r, _)| vec![0.0; r]).collect(),
            delta: Vec::new(),
            delta_prev: Vec::new(),
            offsets: params.layer_offsets(),
        }
    }
}

fn check_input(arch: &CriticArchitecture, params: &CriticParams, x: &[f64]) -> Result<()> {
    params.conforms_to(arch)?;
    if x.len() != arch.input_dim {
        return Err(Error::Conformance(format!(
            "input has {} coordinates, expected {}",
            x.len(),
            arch.input_dim
        )));
    }
    Ok(())
}

/// Network output before the final clamp.
fn raw(params: &CriticParams, x: &[f64], ws: &mut Workspace) -> f64 {
    let values = params.values();
    ws.inputs[0].copy_from_slice(x);
    let layers = params.shapes().len();
    for (l, &(rows, cols)) in params.shapes().iter().enumerate() {
        let (w, b) = ws.offsets[l];
        for r in 0..rows {
            let row = &values[w + r * cols..w + (r + 1) * cols];
            let mut acc = values[b + r];
            for (wv, xv) in row.iter().zip(&ws.inputs[l]) {
                acc += wv * xv;
            }
            ws.pre[l][r] = acc;
        }
        if l + 1 < layers {
            for (dst, &p) in ws.inputs[l + 1].iter_mut().zip(&ws.pre[l]) {
                *dst = p.max(0.0);
            }
        }
    }
    ws.pre[layers - 1][0]
}

/// `clamp(W_L·ReLU(…ReLU(W_1 x + b_1)…) + b_L, −R, R)`.
pub fn forward(arch: &CriticArchitecture, params: &CriticParams, x: &[f64]) -> Result<f64> {
    check_input(arch, params, x)?;
    let mut ws = Workspace::new(params);
    let bound = arch.output_bound;
    Ok(raw(params, x, &mut ws).clamp(-bound, bound))
}

/// Adds `coef · ∇_θ f(x)` to `grad` and returns `f(x)`.
///
/// ReLU has subgradient 0 at 0; the clamp passes gradient on `[−R, R]` and
/// blocks it strictly outside.
fn accumulate(
    bound: f64,
    params: &CriticParams,
    x: &[f64],
    coef: f64,
    grad: &mut [f64],
    ws: &mut Workspace,
) -> f64 {
    let r = raw(params, x, ws);
    let out = r.clamp(-bound, bound);
    if r < -bound || r > bound {
        return out;
    }
    let values = params.values();
    let shapes = params.shapes();
    ws.delta.clear();
    ws.delta.push(coef);
    for l in (0..shapes.len()).rev() {
        let (rows, cols) = shapes[l];
        let (w, b) = ws.offsets[l];
        let input = &ws.inputs[l];
        for (row, &d) in ws.delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let g = &mut grad[w + row * cols..w + (row + 1) * cols];
            for (gv, &xv) in g.iter_mut().zip(input) {
                *gv += d * xv;
            }
            grad[b + row] += d;
        }
        if l == 0 {
            break;
        }
        ws.delta_prev.clear();
        ws.delta_prev.resize(cols, 0.0);
        for (row, &d) in ws.delta.iter().enumerate().take(rows) {
            if d == 0.0 {
                continue;
            }
            let wrow = &values[w + row * cols..w + (row + 1) * cols];
            for (acc, &wv) in ws.delta_prev.iter_mut().zip(wrow) {
                *acc += wv * d;
            }
        }
        for (acc, &p) in ws.delta_prev.iter_mut().zip(&ws.pre[l - 1]) {
            if p <= 0.0 {
                *acc = 0.0;
            }
        }
        std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
    }
    out
}

fn check_points(
    arch: &CriticArchitecture,
    params: &CriticParams,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
) -> Result<()> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySample);
    }
    for p in xs.iter().chain(ys) {
        check_input(arch, params, p)?;
    }
    Ok(())
}

/// Whether the clamped output takes more than one value over `xs ∪ ys`.
pub(crate) fn varies_on(
    arch: &CriticArchitecture,
    params: &CriticParams,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    ws: &mut Workspace,
) -> bool {
    let bound = arch.output_bound;
    let mut first = None;
    for p in xs.iter().chain(ys) {
        let v = raw(params, p, ws).clamp(-bound, bound);
        match first {
            None => first = Some(v),
            Some(f) if f != v => return true,
            _ => {}
        }
    }
    false
}

/// `(1/n)Σ f(x_i) − (1/m)Σ f(y_j)`.
pub fn objective(
    arch: &CriticArchitecture,
    params: &CriticParams,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
) -> Result<f64> {
    check_points(arch, params, xs, ys)?;
    Ok(objective_unchecked(
        arch,
        params,
        xs,
        ys,
        &mut Workspace::new(params),
    ))
}

pub(crate) fn objective_unchecked(
    arch: &CriticArchitecture,
    params: &CriticParams,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    ws: &mut Workspace,
) -> f64 {
    let bound = arch.output_bound;
    let sx: f64 = xs
        .iter()
        .map(|x| raw(params, x, ws).clamp(-bound, bound))
        .sum();
    let sy: f64 = ys
        .iter()
        .map(|y| raw(params, y, ws).clamp(-bound, bound))
        .sum();
    sx / xs.len() as f64 - sy / ys.len() as f64
}

/// Objective value and its gradient with respect to the flat parameters.
pub fn objective_gradient(
    arch: &CriticArchitecture,
    params: &CriticParams,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
) -> Result<(f64, Vec<f64>)> {
    check_points(arch, params, xs, ys)?;
    let mut ws = Workspace::new(params);
    let mut gx = vec![0.0; params.values().len()];
    let mut gy = vec![0.0; params.values().len()];
    let value = gradient_unchecked(arch, params, xs, ys, &mut gx, &mut gy, &mut ws);
    Ok((value, gx))
}

/// Writes the objective gradient into `gx` (using `gy` as scratch).
///
/// The two sums are formed separately and combined as `gx/n − gy/m`, which
/// makes swapping the samples together with negating the output layer an
/// exact symmetry of the arithmetic.
pub(crate) fn gradient_unchecked(
    arch: &CriticArchitecture,
    params: &CriticParams,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    gx: &mut [f64],
    gy: &mut [f64],
    ws: &mut Workspace,
) -> f64 {
    gx.fill(0.0);
    gy.fill(0.0);
    let bound = arch.output_bound;
    let sx: f64 = xs
        .iter()
        .map(|x| accumulate(bound, params, x, 1.0, gx, ws))
        .sum();
    let sy: f64 = ys
        .iter()
        .map(|y| accumulate(bound, params, y, 1.0, gy, ws))
        .sum();
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    for (a, b) in gx.iter_mut().zip(gy.iter()) {
        *a = *a / n - *b / m;
    }
    sx / n - sy / m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::critic::params::{negate_params, project_to_class};

    #[test]
    fn hand_evaluations() {
        let a = CriticArchitecture::new(1.0, 1.0, 1, 1, 1, 3).unwrap();
        let p = CriticParams::from_layers(&a, &[(vec![1.0, 0.0, 0.0], vec![0.0])]).unwrap();
        assert_eq!(forward(&a, &p, &[2.0, 5.0, 1.0]).unwrap(), 1.0);
        assert_eq!(
            forward(&a, &CriticParams::zeros(&a), &[2.0, 5.0, 1.0]).unwrap(),
            0.0
        );

        let b = CriticArchitecture::new(1.0, 1.0, 2, 2, 5, 1).unwrap();
        let p = CriticParams::from_layers(
            &b,
            &[
                (vec![1.0, -1.0], vec![0.0, 0.0]),
                (vec![1.0, 1.0], vec![0.0]),
            ],
        )
        .unwrap();
        assert!((forward(&b, &p, &[0.3]).unwrap() - 0.3).abs() < 1e-15);
        assert!((forward(&b, &p, &[-0.3]).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            forward(&b, &p, &[0.3, 1.0]),
            Err(Error::Conformance(_))
        ));
    }

    #[test]
    fn negation_flips_output() {
        let a = CriticArchitecture::new(1.5, 1.0, 3, 5, 20, 4).unwrap();
        let p = project_to_class(&a, &CriticParams::random_uniform(&a, 1.0, 8));
        let n = negate_params(&p);
        for k in 0..20 {
            let x: Vec<f64> = (0..4).map(|j| ((k * 7 + j * 3) as f64).sin()).collect();
            assert_eq!(forward(&a, &n, &x).unwrap(), -forward(&a, &p, &x).unwrap());
        }
    }

    #[test]
    fn gradient_of_linear_critic() {
        let a = CriticArchitecture::new(10.0, 1.0, 1, 1, 3, 2).unwrap();
        let p = CriticParams::from_flat(&a, vec![0.5, -0.5, 0.1]).unwrap();
        let xs = vec![vec![1.0, 2.0]];
        let ys = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let (v, g) = objective_gradient(&a, &p, &xs, &ys).unwrap();
        // f(x) = 0.5 x1 − 0.5 x2 + 0.1
        assert!((v - (-0.4 - 0.6)).abs() < 1e-15);
        assert_eq!(g, vec![1.0 - 1.0, 2.0 - 0.0, 0.0]);
    }
}
