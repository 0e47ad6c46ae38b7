use faer::Mat;
use num_complex::Complex64;

use crate::conic_form::ModelError;

/// Voltage vector `v = V e₁ / √V₁₁` for `V = re + j·im`. It turns an SDR
/// solution into a feasible nSDR point.
pub fn lift_sdr_to_nsdr(re: &Mat<f64>, im: &Mat<f64>) -> Result<Vec<Complex64>, ModelError> {
    let n = re.nrows();
    if n == 0 || !(re[(0, 0)] > 0.0) {
        return Err(ModelError::Argument("lifting needs V₁₁ > 0".into()));
    }
    let scale = re[(0, 0)].sqrt();
    Ok((0..n).map(|k| Complex64::new(re[(k, 0)], im[(k, 0)]) / scale).collect())
}
