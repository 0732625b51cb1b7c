//! Residual Helmholtz energy `a_res = sum_k n_k tau^t_k delta^d_k` and its
//! reduced derivatives `A_nm = tau^n delta^m d^(n+m) a_res / dtau^n ddelta^m`.

use serde::{Deserialize, Serialize};

use super::{EosError, StatePoint};

/// Derivative orders produced by the simulator by default.
pub const DEFAULT_DERIVS: [(u32, u32); 5] = [(0, 1), (0, 2), (1, 0), (1, 1), (2, 0)];

/// `x (x-1) ... (x-n+1)`, with `x^(0) = 1`.
pub fn falling(x: f64, n: u32) -> f64 {
    (0..n).map(|k| x - f64::from(k)).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosTerm {
    pub t: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EosForm {
    pub terms: Vec<EosTerm>,
}

impl EosForm {
    pub fn new(exponents: &[(f64, f64)]) -> Self {
        EosForm {
            terms: exponents.iter().map(|&(t, d)| EosTerm { t, d }).collect(),
        }
    }

    /// `n1 tau delta + n2 tau^2 delta^2 + n3 tau^1.5 delta^3`.
    pub fn default_form() -> Self {
        EosForm::new(&[(1.0, 1.0), (2.0, 2.0), (1.5, 3.0)])
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Contribution of term `k` with unit coefficient to `A_nm`.
    pub fn basis(&self, k: usize, n: u32, m: u32, tau: f64, delta: f64) -> f64 {
        let EosTerm { t, d } = self.terms[k];
        falling(t, n) * falling(d, m) * tau.powf(t) * delta.powf(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eos {
    pub form: EosForm,
    pub coefficients: Vec<f64>,
}

impl Eos {
    pub fn new(form: EosForm, coefficients: Vec<f64>) -> Result<Self, EosError> {
        if form.is_empty() || form.len() != coefficients.len() {
            return Err(EosError::InvalidConfig(format!(
                "{} coefficients for {} terms",
                coefficients.len(),
                form.len()
            )));
        }
        Ok(Eos { form, coefficients })
    }

    /// Synthetic van-der-Waals-like reference with `n = (-1.5, -0.8, 0.6)`.
    pub fn default_truth() -> Self {
        Eos {
            form: EosForm::default_form(),
            coefficients: vec![-1.5, -0.8, 0.6],
        }
    }

    pub fn a_res(&self, tau: f64, delta: f64) -> f64 {
        self.a_nm(0, 0, tau, delta)
    }

    pub fn a_nm(&self, n: u32, m: u32, tau: f64, delta: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.form.basis(k, n, m, tau, delta))
            .sum()
    }

    fn at(&self, sp_t: f64, rho: f64, m: u32) -> f64 {
        self.a_nm(0, m, 1.0 / sp_t, rho)
    }

    /// `p = rho T (1 + A01)` in reduced units.
    pub fn pressure(&self, t: f64, rho: f64) -> f64 {
        rho * t * (1.0 + self.at(t, rho, 1))
    }

    /// `dp/drho = T (1 + 2 A01 + A02)`.
    pub fn dp_drho(&self, t: f64, rho: f64) -> f64 {
        t * (1.0 + 2.0 * self.at(t, rho, 1) + self.at(t, rho, 2))
    }

    /// `d2p/drho2 = (T / rho) (2 A01 + 4 A02 + A03)`.
    pub fn d2p_drho2(&self, t: f64, rho: f64) -> f64 {
        t / rho * (2.0 * self.at(t, rho, 1) + 4.0 * self.at(t, rho, 2) + self.at(t, rho, 3))
    }

    /// `(dp/drho) / T` and `(rho / T) d2p/drho2`: same zeros, better scaled.
    pub(crate) fn critical_residual(&self, t: f64, rho: f64) -> [f64; 2] {
        let (a1, a2, a3) = (self.at(t, rho, 1), self.at(t, rho, 2), self.at(t, rho, 3));
        [1.0 + 2.0 * a1 + a2, 2.0 * a1 + 4.0 * a2 + a3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivEntry {
    pub n: u32,
    pub m: u32,
    pub value: f64,
    /// Standard error; 0 for exact values.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassieuDerivs {
    pub state: StatePoint,
    pub entries: Vec<DerivEntry>,
}

impl MassieuDerivs {
    pub fn value(&self, n: u32, m: u32) -> Option<f64> {
        self.entries.iter().find(|e| e.n == n && e.m == m).map(|e| e.value)
    }
}

/// Exact `A_nm` of `truth` at `sp` for every requested order.
pub fn truth_derivs(sp: StatePoint, truth: &Eos, orders: &[(u32, u32)]) -> MassieuDerivs {
    let tau = 1.0 / sp.t;
    MassieuDerivs {
        state: sp,
        entries: orders
            .iter()
            .map(|&(n, m)| DerivEntry {
                n,
                m,
                value: truth.a_nm(n, m, tau, sp.rho),
                sigma: 0.0,
            })
            .collect(),
    }
}
