use super::tape::{Tape, Var};
use crate::error::Result;
use crate::linalg::Matrix;

pub const DEFAULT_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared absolutely rather than relatively.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// `(input, entry)` of the worst disagreement.
    pub worst: (usize, usize),
    pub checked: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compares the tape's gradients of the scalar `f(inputs)` against central
/// differences with step `h`. At most `max_entries` entries per input are
/// checked, evenly spaced (all of them when `None`).
pub fn check_gradients<F>(inputs: &[Matrix], f: F, h: f64, max_entries: Option<usize>) -> Result<GradCheck>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|m| tape.param(m.clone())).collect();
    let loss = f(&mut tape, &vars)?;
    tape.backward(loss)?;
    let analytic: Vec<Matrix> = vars
        .iter()
        .zip(inputs)
        .map(|(v, m)| tape.grad(*v).cloned().unwrap_or_else(|| Matrix::zeros(m.rows(), m.cols())))
        .collect();

    let eval = |perturbed: &[Matrix]| -> Result<f64> {
        let mut t = Tape::new();
        let vs: Vec<Var> = perturbed.iter().map(|m| t.param(m.clone())).collect();
        let l = f(&mut t, &vs)?;
        Ok(t.value(l).data()[0])
    };

    let mut work = inputs.to_vec();
    let mut out = GradCheck {
        max_rel_error: 0.0,
        worst: (0, 0),
        checked: 0,
    };
    for i in 0..inputs.len() {
        let len = inputs[i].data().len();
        let stride = match max_entries {
            Some(k) if k > 0 && len > k => len.div_ceil(k),
            _ => 1,
        };
        for j in (0..len).step_by(stride) {
            let orig = inputs[i].data()[j];
            work[i].data_mut()[j] = orig + h;
            let plus = eval(&work)?;
            work[i].data_mut()[j] = orig - h;
            let minus = eval(&work)?;
            work[i].data_mut()[j] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let err = relative_error(analytic[i].data()[j], numeric);
            if err > out.max_rel_error {
                out.max_rel_error = err;
                out.worst = (i, j);
            }
            out.checked += 1;
        }
    }
    Ok(out)
}
