use super::ModelSpec;
use crate::error::{check_budget, Error, Result};
use crate::linalg::{re, CMatrix, ZERO};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How `vhat` enters the plane-wave tensor elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusNormalization {
    /// `V = (2 pi)^{-d} vhat(k)`: `vhat` are the Fourier coefficients of
    /// `v(x) = sum_k vhat(k) e^{ikx}` on `[0, 2 pi)^d`.
    #[default]
    FourierSeries,
    /// `V = vhat(k)`: `vhat` is directly the coefficient entering the
    /// pair-creation and exchange kernels.
    KernelCoefficient,
}

/// Bose gas on the torus `[0, 2 pi)^d` with plane-wave modes `|k|_inf <= kcut`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub d: usize,
    #[serde(rename = "Kcut")]
    pub kcut: i64,
    /// Pairs `(k, vhat(k))`; momenta not listed have `vhat = 0`.
    pub vhat: Vec<(Vec<i64>, f64)>,
    #[serde(default)]
    pub normalization: TorusNormalization,
}

impl TorusSpec {
    /// Spec with a kernel depending only on `|k|_inf`: `vhat(k) = profile[|k|_inf]`.
    pub fn radial(d: usize, kcut: i64, profile: &[f64]) -> Self {
        let reach = 2 * kcut;
        let vhat = lattice(d, reach)
            .into_iter()
            .filter_map(|k| {
                let r = k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
                profile.get(r).map(|&v| (k, v))
            })
            .collect();
        TorusSpec {
            d,
            kcut,
            vhat,
            normalization: TorusNormalization::FourierSeries,
        }
    }

    pub fn with_normalization(mut self, normalization: TorusNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    /// Plane-wave momenta in lexicographic order.
    pub fn momenta(&self) -> Vec<Vec<i64>> {
        lattice(self.d, self.kcut)
    }

    pub fn tensor_factor(&self) -> f64 {
        match self.normalization {
            TorusNormalization::FourierSeries => (2.0 * std::f64::consts::PI).powi(-(self.d as i32)),
            TorusNormalization::KernelCoefficient => 1.0,
        }
    }

    /// The coefficient multiplying the momentum-transfer delta in the tensor.
    pub fn kernel_coefficient(&self, k: &[i64]) -> f64 {
        self.table().get(k).copied().unwrap_or(0.0) * self.tensor_factor()
    }

    fn table(&self) -> BTreeMap<Vec<i64>, f64> {
        self.vhat.iter().cloned().collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.d) {
            return Err(Error::InvalidModel(format!("torus dimension {} not in {{1, 2}}", self.d)));
        }
        if self.kcut < 0 {
            return Err(Error::InvalidModel("negative momentum cutoff".into()));
        }
        let table = self.table();
        for (k, v) in &self.vhat {
            if k.len() != self.d {
                return Err(Error::InvalidModel(format!("momentum {k:?} has wrong dimension")));
            }
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::InvalidModel(format!("vhat({k:?}) = {v} is not a non-negative number")));
            }
            let minus: Vec<i64> = k.iter().map(|x| -x).collect();
            let partner = table.get(&minus).copied().unwrap_or(0.0);
            if (partner - v).abs() > 1e-14 * v.abs().max(1.0) {
                return Err(Error::InvalidModel(format!("vhat is not even at {k:?}")));
            }
        }
        Ok(())
    }
}

fn lattice(d: usize, reach: i64) -> Vec<Vec<i64>> {
    let mut points: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| {
                (-reach..=reach).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

/// Plane-wave model: `T = diag(|k|^2)` and
/// `V[m,n,p,q] = factor * vhat(k_m - k_p)` whenever `k_m + k_n = k_p + k_q`.
pub fn build_torus_model(spec: &TorusSpec) -> Result<ModelSpec> {
    spec.validate()?;
    let momenta = spec.momenta();
    let modes = momenta.len();
    check_budget("torus interaction tensor", (modes as u128).pow(4) * 16)?;
    let table = spec.table();
    let factor = spec.tensor_factor();
    let one_body = CMatrix::from_fn(modes, modes, |i, j| {
        if i == j {
            re(momenta[i].iter().map(|x| (x * x) as f64).sum())
        } else {
            ZERO
        }
    });
    let mut interaction = vec![ZERO; modes.pow(4)];
    for (m, km) in momenta.iter().enumerate() {
        for (n, kn) in momenta.iter().enumerate() {
            for (p, kp) in momenta.iter().enumerate() {
                for (q, kq) in momenta.iter().enumerate() {
                    let conserved = (0..spec.d).all(|a| km[a] + kn[a] == kp[a] + kq[a]);
                    if !conserved {
                        continue;
                    }
                    let transfer: Vec<i64> = (0..spec.d).map(|a| km[a] - kp[a]).collect();
                    if let Some(v) = table.get(&transfer) {
                        interaction[((m * modes + n) * modes + p) * modes + q] = re(v * factor);
                    }
                }
            }
        }
    }
    let mut model = ModelSpec::new(one_body, interaction, format!("torus-d{}-K{}", spec.d, spec.kcut))?;
    model.torus_degeneracies = true;
    if !model.positive_type {
        return Err(Error::InvalidModel("torus kernel is not of positive type".into()));
    }
    Ok(model)
}
