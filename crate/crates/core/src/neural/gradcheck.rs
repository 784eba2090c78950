use super::{Graph, NeuralError, NodeId, ParamStore};

/// Denominator floor for [`relative_error`]. Central differences at
/// `eps = 1e-6` carry roughly `1e-10` of round-off, so relative error is
/// only meaningful for gradients well above that.
pub const REL_ERROR_FLOOR: f64 = 1e-4;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares the tape's gradients of `loss` against central finite
/// differences for every parameter value, returning the largest
/// [`relative_error`]. `loss` must be deterministic.
pub fn grad_check<F>(store: &mut ParamStore<f64>, eps: f64, loss: F) -> Result<f64, NeuralError>
where
    F: Fn(&mut Graph<'_, f64>) -> Result<NodeId, NeuralError>,
{
    let grads = {
        let mut g = Graph::new(&*store);
        let l = loss(&mut g)?;
        g.backward(l)?
    };
    let eval = |store: &ParamStore<f64>| -> Result<f64, NeuralError> {
        let mut g = Graph::new(store);
        let l = loss(&mut g)?;
        Ok(g.scalar(l))
    };
    let mut worst = 0.0f64;
    for id in store.ids().collect::<Vec<_>>() {
        for k in 0..store.param(id).data.len() {
            let orig = store.param(id).data[k];
            store.param_mut(id).data[k] = orig + eps;
            let up = eval(store)?;
            store.param_mut(id).data[k] = orig - eps;
            let down = eval(store)?;
            store.param_mut(id).data[k] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let analytic = grads.get(id).map_or(0.0, |g| g[k]);
            worst = worst.max(relative_error(analytic, numeric));
        }
    }
    Ok(worst)
}
