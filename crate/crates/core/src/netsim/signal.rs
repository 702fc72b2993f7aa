use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Scalar time function used for reference signals, feedforward inputs and
/// initial input histories.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Signal {
    Constant {
        value: f64,
    },
    Ramp {
        offset: f64,
        slope: f64,
    },
    Sine {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// One signal per output dimension.
pub type VectorSignal = Vec<Signal>;

impl Signal {
    pub fn zero() -> Self {
        Signal::Constant { value: 0.0 }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Signal::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Constant { value } => *value,
            Signal::Ramp { offset, slope } => offset + slope * t,
            Signal::Sine { amplitude, omega, phase, offset } => offset + amplitude * (omega * t + phase).sin(),
            Signal::Custom(f) => f(t),
        }
    }
}

impl From<f64> for Signal {
    fn from(value: f64) -> Self {
        Signal::Constant { value }
    }
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Constant { value } => write!(f, "Constant({value})"),
            Signal::Ramp { offset, slope } => write!(f, "Ramp({offset} + {slope} t)"),
            Signal::Sine { amplitude, omega, phase, offset } => {
                write!(f, "Sine({offset} + {amplitude} sin({omega} t + {phase}))")
            }
            Signal::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

pub(crate) fn eval_vector(s: &[Signal], t: f64, out: &mut [f64]) {
    for (o, sig) in out.iter_mut().zip(s) {
        *o = sig.eval(t);
    }
}
