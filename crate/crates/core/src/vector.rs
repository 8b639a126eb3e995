//! Small dense-vector helpers shared across the workspace.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += a · x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|v| *v *= s);
}

/// `v − (⟨v,k⟩/⟨k,k⟩)·k`.
pub fn project_orthogonal(v: &[f64], kernel: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    project_orthogonal_in_place(&mut out, kernel)?;
    Ok(out)
}

pub fn project_orthogonal_in_place(v: &mut [f64], kernel: &[f64]) -> Result<()> {
    if v.len() != kernel.len() {
        return Err(Error::DimensionMismatch { expected: kernel.len(), got: v.len() });
    }
    let kk = dot(kernel, kernel);
    if kk == 0.0 {
        return Err(Error::ZeroKernelVector);
    }
    // Two passes keep the residual inner product at rounding level even
    // when v is nearly parallel to the kernel.
    for _ in 0..2 {
        let c = dot(v, kernel) / kk;
        axpy(-c, kernel, v);
    }
    Ok(())
}

/// Removes the mean, i.e. projects orthogonally to the all-ones vector.
pub fn center(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    for _ in 0..2 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= m);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        assert_eq!(project_orthogonal(&[1.0, 1.0, 1.0], &[1.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(project_orthogonal(&[1.0, -1.0, 0.0], &[1.0; 3]).unwrap(), vec![1.0, -1.0, 0.0]);
        assert_eq!(project_orthogonal(&[2.0, 0.0], &[1.0, 1.0]).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn zero_kernel_rejected() {
        assert!(matches!(project_orthogonal(&[1.0], &[0.0]), Err(Error::ZeroKernelVector)));
    }
}
