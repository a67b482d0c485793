//! Closed-form scalar profiles of two parameters with derivatives up to second order.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Value and derivatives up to second order of a scalar function of `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarJet<T> {
    pub f: T,
    pub fu: T,
    pub fv: T,
    pub fuu: T,
    pub fuv: T,
    pub fvv: T,
}

impl<T: Real> ScalarJet<T> {
    pub fn zero() -> Self {
        let z = T::zero();
        Self { f: z, fu: z, fv: z, fuu: z, fuv: z, fvv: z }
    }

    fn add(self, o: Self) -> Self {
        Self {
            f: self.f + o.f,
            fu: self.fu + o.fu,
            fv: self.fv + o.fv,
            fuu: self.fuu + o.fuu,
            fuv: self.fuv + o.fuv,
            fvv: self.fvv + o.fvv,
        }
    }
}

/// Analytic scalar profile, used for graph heights and displacement components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScalarProfile {
    /// `sum coef * u^pu * v^pv`, each term written `[coef, pu, pv]`.
    Polynomial { terms: Vec<[f64; 3]> },
    /// `amplitude * sin(fu*u + pu) * sin(fv*v + pv)`.
    SinProduct {
        amplitude: f64,
        freq: [f64; 2],
        #[serde(default)]
        phase: [f64; 2],
    },
    Sum { parts: Vec<ScalarProfile> },
}

impl ScalarProfile {
    pub fn zero() -> Self {
        ScalarProfile::Polynomial { terms: vec![] }
    }

    pub fn monomial(coef: f64, pu: u32, pv: u32) -> Self {
        ScalarProfile::Polynomial { terms: vec![[coef, pu as f64, pv as f64]] }
    }

    pub fn jet<T: Real>(&self, u: T, v: T) -> ScalarJet<T> {
        match self {
            ScalarProfile::Polynomial { terms } => terms
                .iter()
                .fold(ScalarJet::zero(), |acc, t| acc.add(monomial_jet(t[0], t[1] as i32, t[2] as i32, u, v))),
            ScalarProfile::SinProduct { amplitude, freq, phase } => {
                let a = T::lit(*amplitude);
                let (ku, kv) = (T::lit(freq[0]), T::lit(freq[1]));
                let su = (ku * u + T::lit(phase[0])).sin();
                let cu = (ku * u + T::lit(phase[0])).cos();
                let sv = (kv * v + T::lit(phase[1])).sin();
                let cv = (kv * v + T::lit(phase[1])).cos();
                ScalarJet {
                    f: a * su * sv,
                    fu: a * ku * cu * sv,
                    fv: a * kv * su * cv,
                    fuu: -a * ku * ku * su * sv,
                    fuv: a * ku * kv * cu * cv,
                    fvv: -a * kv * kv * su * sv,
                }
            }
            ScalarProfile::Sum { parts } => parts
                .iter()
                .fold(ScalarJet::zero(), |acc, p| acc.add(p.jet(u, v))),
        }
    }
}

fn pow<T: Real>(x: T, p: i32) -> T {
    if p < 0 {
        T::zero()
    } else {
        x.powi(p)
    }
}

fn monomial_jet<T: Real>(coef: f64, pu: i32, pv: i32, u: T, v: T) -> ScalarJet<T> {
    let c = T::lit(coef);
    let (fu, fv) = (T::lit(pu as f64), T::lit(pv as f64));
    let (fu1, fv1) = (T::lit((pu - 1) as f64), T::lit((pv - 1) as f64));
    ScalarJet {
        f: c * pow(u, pu) * pow(v, pv),
        fu: c * fu * pow(u, pu - 1) * pow(v, pv),
        fv: c * fv * pow(u, pu) * pow(v, pv - 1),
        fuu: c * fu * fu1 * pow(u, pu - 2) * pow(v, pv),
        fuv: c * fu * fv * pow(u, pu - 1) * pow(v, pv - 1),
        fvv: c * fv * fv1 * pow(u, pu) * pow(v, pv - 2),
    }
}
