//! VT-Micro instantaneous fuel-rate model.
//!
//! The fuel rate is `exp(P(v, a))` where `P` is a bivariate cubic with a 4×4
//! coefficient table. Separate tables cover accelerating (`a >= 0`) and
//! decelerating driving. Tables are always loaded from data files; none are
//! compiled in.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum FuelError {
    #[error("cannot read coefficient file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed coefficient file: {0}")]
    Format(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Acceleration,
    Deceleration,
}

/// Regression table `k[i][j]`: `i` is the speed power, `j` the acceleration power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VtMicroCoefficients<T = f64> {
    pub regime: Regime,
    pub k: [[T; 4]; 4],
}

impl<T: Scalar> VtMicroCoefficients<T> {
    pub fn new(regime: Regime, k: [[T; 4]; 4]) -> Result<Self, FuelError> {
        if k.iter().flatten().any(|x| !x.is_finite()) {
            return Err(FuelError::Format(
                "coefficient table has non-finite entries".into(),
            ));
        }
        Ok(Self { regime, k })
    }

    pub fn zeros(regime: Regime) -> Self {
        Self {
            regime,
            k: [[T::zero(); 4]; 4],
        }
    }
}

/// `P(v, a) = Σᵢ Σⱼ k[i][j] vⁱ aʲ`, Horner-nested in both variables.
pub fn moe_exponent<T: Scalar>(coeffs: &VtMicroCoefficients<T>, v: T, a: T) -> T {
    coeffs.k.iter().rev().fold(T::zero(), |acc, row| {
        let inner = row.iter().rev().fold(T::zero(), |r, &c| r * a + c);
        acc * v + inner
    })
}

/// Instantaneous fuel rate in mL/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FuelRate<T = f64>(pub T);

/// `exp(P)` with the acceleration table for `a >= 0`, otherwise the deceleration table.
pub fn fuel_rate<T: Scalar>(
    accel_table: &VtMicroCoefficients<T>,
    decel_table: &VtMicroCoefficients<T>,
    v: T,
    a: T,
) -> FuelRate<T> {
    let table = if a >= T::zero() {
        accel_table
    } else {
        decel_table
    };
    FuelRate(moe_exponent(table, v, a).exp())
}

/// Input and output scale factors: the polynomial sees `v·speed_scale`, `a·accel_scale`
/// and its exponential is multiplied by `rate_scale` to give mL/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    bound(deserialize = "T: Scalar + serde::de::DeserializeOwned")
)]
pub struct FuelUnits<T = f64> {
    pub speed_scale: T,
    pub accel_scale: T,
    pub rate_scale: T,
}

impl<T: Scalar> Default for FuelUnits<T> {
    fn default() -> Self {
        Self {
            speed_scale: T::one(),
            accel_scale: T::one(),
            rate_scale: T::one(),
        }
    }
}

/// Bundled coefficient file, see [`FuelModel::reference`].
pub const REFERENCE_TABLE_JSON: &str = include_str!("../data/vtmicro_fuel_ahn2002.json");

/// A loaded pair of regime tables plus unit conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct FuelModel<T = f64> {
    pub accel: VtMicroCoefficients<T>,
    pub decel: VtMicroCoefficients<T>,
    pub units: FuelUnits<T>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FileLayout {
    Tables(Vec<VtMicroCoefficients<f64>>),
    Document(FuelDocument),
}

#[derive(Deserialize)]
struct FuelDocument {
    #[serde(default)]
    units: FuelUnits<f64>,
    #[serde(default)]
    single_table: bool,
    tables: Vec<VtMicroCoefficients<f64>>,
}

impl<T: Scalar> FuelModel<T> {
    pub fn new(
        accel: VtMicroCoefficients<T>,
        decel: VtMicroCoefficients<T>,
        units: FuelUnits<T>,
    ) -> Self {
        Self {
            accel,
            decel,
            units,
        }
    }

    /// Both regimes share one table.
    pub fn single_table(table: VtMicroCoefficients<T>, units: FuelUnits<T>) -> Self {
        Self {
            accel: table.clone(),
            decel: table,
            units,
        }
    }

    /// Parses the coefficient JSON: either a bare array of two tables, or
    /// `{"units": {...}, "single_table": bool, "tables": [...]}`.
    pub fn from_json(text: &str) -> Result<Self, FuelError> {
        let layout: FileLayout =
            serde_json::from_str(text).map_err(|e| FuelError::Format(e.to_string()))?;
        let (units, single, tables) = match layout {
            FileLayout::Tables(t) => (FuelUnits::default(), false, t),
            FileLayout::Document(d) => (d.units, d.single_table, d.tables),
        };
        let cast = |t: &VtMicroCoefficients<f64>| -> Result<VtMicroCoefficients<T>, FuelError> {
            VtMicroCoefficients::new(t.regime, t.k.map(|row| row.map(T::lit)))
        };
        let units = FuelUnits {
            speed_scale: T::lit(units.speed_scale),
            accel_scale: T::lit(units.accel_scale),
            rate_scale: T::lit(units.rate_scale),
        };
        if !(units.speed_scale > T::zero()
            && units.accel_scale > T::zero()
            && units.rate_scale > T::zero())
        {
            return Err(FuelError::Format(
                "unit scale factors must be positive".into(),
            ));
        }
        if single {
            let [table] = tables.as_slice() else {
                return Err(FuelError::Format(format!(
                    "single_table expects 1 table, found {}",
                    tables.len()
                )));
            };
            return Ok(Self::single_table(cast(table)?, units));
        }
        let find = |regime| {
            let mut hits = tables.iter().filter(|t| t.regime == regime);
            match (hits.next(), hits.next()) {
                (Some(t), None) => cast(t),
                (None, _) => Err(FuelError::Format(format!("missing {regime:?} table"))),
                (Some(_), Some(_)) => Err(FuelError::Format(format!("duplicate {regime:?} table"))),
            }
        };
        Ok(Self::new(
            find(Regime::Acceleration)?,
            find(Regime::Deceleration)?,
            units,
        ))
    }

    /// The bundled light-duty VT-Micro table (speed in km/h, accel in km/h/s, rate in L/s).
    pub fn reference() -> Self {
        Self::from_json(REFERENCE_TABLE_JSON).expect("bundled table parses")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FuelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FuelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Fuel rate in mL/s for SI speed (m/s) and acceleration (m/s²).
    pub fn rate(&self, v: T, a: T) -> T {
        let FuelRate(r) = fuel_rate(
            &self.accel,
            &self.decel,
            v * self.units.speed_scale,
            a * self.units.accel_scale,
        );
        r * self.units.rate_scale
    }
}

/// Integrated fuel over a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuelTotals<T = f64> {
    /// mL
    pub total: T,
    /// mL/s
    pub mean_rate: T,
}

/// Left-rectangle sum of per-step rates.
pub fn integrate_rates<T: Scalar>(rates: &[T], dt: T) -> Result<FuelTotals<T>, FuelError> {
    if rates.is_empty() {
        return Err(FuelError::Argument(
            "cannot integrate fuel over an empty trace".into(),
        ));
    }
    if !(dt > T::zero()) {
        return Err(FuelError::Argument("dt must be positive".into()));
    }
    let total = rates.iter().fold(T::zero(), |acc, &r| acc + r * dt);
    let duration = T::from_usize(rates.len()).expect("step count fits scalar") * dt;
    Ok(FuelTotals {
        total,
        mean_rate: total / duration,
    })
}

/// Fuel for a sequence of (speed, acceleration) steps, each held for `dt`.
pub fn event_fuel<T: Scalar>(
    model: &FuelModel<T>,
    speeds: &[T],
    accels: &[T],
    dt: T,
) -> Result<FuelTotals<T>, FuelError> {
    if speeds.len() != accels.len() {
        return Err(FuelError::Argument(format!(
            "{} speeds vs {} accelerations",
            speeds.len(),
            accels.len()
        )));
    }
    let rates: Vec<T> = speeds
        .iter()
        .zip(accels)
        .map(|(&v, &a)| model.rate(v, a))
        .collect();
    integrate_rates(&rates, dt)
}
