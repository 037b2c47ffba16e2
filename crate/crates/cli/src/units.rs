//! Unit-annotated quantities for the configuration file, e.g. `"7e-3 T"`.
//! Each quantity is converted once, at parsing time, to the internal unit.

use std::fmt;
use std::marker::PhantomData;

use rydberg_zeno::system_model::units::{cm_inv_to_rad_per_ns, ev_to_rad_per_ns};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

pub trait Dimension {
    const NAME: &'static str;
    /// Internal unit, written back on serialization.
    const CANONICAL: &'static str;
    fn convert(value: f64, unit: &str) -> Option<f64>;
}

#[derive(Debug, Clone, Copy)]
pub struct MagneticField;
#[derive(Debug, Clone, Copy)]
pub struct ElectricField;
#[derive(Debug, Clone, Copy)]
pub struct AngularFrequency;
#[derive(Debug, Clone, Copy)]
pub struct Wavenumber;
#[derive(Debug, Clone, Copy)]
pub struct Time;
#[derive(Debug, Clone, Copy)]
pub struct Angle;
#[derive(Debug, Clone, Copy)]
pub struct Rate;
/// Second-order Raman strength, `(rad/ns)²` per `(V/m)²`.
#[derive(Debug, Clone, Copy)]
pub struct RamanStrength;

impl Dimension for MagneticField {
    const NAME: &'static str = "magnetic field";
    const CANONICAL: &'static str = "T";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "T" => Some(v),
            "mT" => Some(v * 1e-3),
            "uT" | "µT" => Some(v * 1e-6),
            "G" => Some(v * 1e-4),
            _ => None,
        }
    }
}

impl Dimension for ElectricField {
    const NAME: &'static str = "electric field";
    const CANONICAL: &'static str = "V/m";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "V/m" => Some(v),
            "V/cm" => Some(v * 1e2),
            "kV/m" => Some(v * 1e3),
            _ => None,
        }
    }
}

impl Dimension for AngularFrequency {
    const NAME: &'static str = "energy or angular frequency";
    const CANONICAL: &'static str = "rad/ns";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        let two_pi = std::f64::consts::TAU;
        match unit {
            "rad/ns" => Some(v),
            "rad/us" | "rad/µs" => Some(v * 1e-3),
            "rad/s" => Some(v * 1e-9),
            "eV" => Some(ev_to_rad_per_ns(v)),
            "meV" => Some(ev_to_rad_per_ns(v * 1e-3)),
            "ueV" | "µeV" => Some(ev_to_rad_per_ns(v * 1e-6)),
            "cm^-1" | "1/cm" => Some(cm_inv_to_rad_per_ns(v)),
            "GHz" => Some(v * two_pi),
            "MHz" => Some(v * two_pi * 1e-3),
            "kHz" => Some(v * two_pi * 1e-6),
            _ => None,
        }
    }
}

impl Dimension for Wavenumber {
    const NAME: &'static str = "wavenumber";
    const CANONICAL: &'static str = "cm^-1";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "cm^-1" | "1/cm" => Some(v),
            "m^-1" | "1/m" => Some(v * 1e-2),
            _ => None,
        }
    }
}

impl Dimension for Time {
    const NAME: &'static str = "time";
    const CANONICAL: &'static str = "ns";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "ns" => Some(v),
            "ps" => Some(v * 1e-3),
            "us" | "µs" => Some(v * 1e3),
            "ms" => Some(v * 1e6),
            "s" => Some(v * 1e9),
            _ => None,
        }
    }
}

impl Dimension for Angle {
    const NAME: &'static str = "angle";
    const CANONICAL: &'static str = "rad";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "rad" => Some(v),
            "deg" => Some(v.to_radians()),
            _ => None,
        }
    }
}

impl Dimension for Rate {
    const NAME: &'static str = "rate";
    const CANONICAL: &'static str = "1/ns";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "1/ns" | "ns^-1" => Some(v),
            "1/us" | "1/µs" | "us^-1" => Some(v * 1e-3),
            "1/ms" => Some(v * 1e-6),
            "1/s" | "s^-1" | "Hz" => Some(v * 1e-9),
            _ => None,
        }
    }
}

impl Dimension for RamanStrength {
    const NAME: &'static str = "Raman coupling strength";
    const CANONICAL: &'static str = "(rad/ns)^2/(V/m)^2";
    fn convert(v: f64, unit: &str) -> Option<f64> {
        match unit {
            "(rad/ns)^2/(V/m)^2" => Some(v),
            _ => None,
        }
    }
}

/// A value of dimension `D`, stored in the internal unit.
pub struct Quantity<D> {
    value: f64,
    unit: PhantomData<D>,
}

impl<D> Clone for Quantity<D> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<D> Copy for Quantity<D> {}

impl<D> PartialEq for Quantity<D> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<D: Dimension> fmt::Debug for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {}", self.value, D::CANONICAL)
    }
}

impl<D: Dimension> Quantity<D> {
    pub fn new(value: f64) -> Self {
        Quantity { value, unit: PhantomData }
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (num, unit) = s
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("`{s}`: expected \"<value> <unit>\" for a {}", D::NAME))?;
        let v: f64 = num.parse().map_err(|_| format!("`{s}`: cannot parse `{num}` as a number"))?;
        if !v.is_finite() {
            return Err(format!("`{s}`: value must be finite"));
        }
        D::convert(v, unit.trim())
            .map(Quantity::new)
            .ok_or_else(|| format!("`{s}`: `{}` is not a unit of {}", unit.trim(), D::NAME))
    }
}

impl<D: Dimension> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:?} {}", self.value, D::CANONICAL))
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = Quantity<D>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a {} string such as \"1.0 {}\"", D::NAME, D::CANONICAL)
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Self::Value, E> {
                Quantity::parse(s).map_err(E::custom)
            }
        }
        d.deserialize_str(V(PhantomData))
    }
}

pub type Tesla = Quantity<MagneticField>;
pub type FieldStrength = Quantity<ElectricField>;
pub type Frequency = Quantity<AngularFrequency>;
pub type InverseCm = Quantity<Wavenumber>;
pub type Nanoseconds = Quantity<Time>;
pub type Radians = Quantity<Angle>;
pub type PerNs = Quantity<Rate>;
pub type RamanCoupling = Quantity<RamanStrength>;
