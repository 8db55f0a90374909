use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface_code::BoundaryState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Batch,
    Forward,
    Sandwich,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Batch => "batch",
            Scheme::Forward => "forward",
            Scheme::Sandwich => "sandwich",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "batch" => Ok(Scheme::Batch),
            "forward" => Ok(Scheme::Forward),
            "sandwich" => Ok(Scheme::Sandwich),
            other => Err(format!("unknown scheme '{other}' (expected batch, forward or sandwich)")),
        }
    }
}

/// Which edges an interior sandwich core keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoreStyle {
    /// Edges inside the middle `s` layers plus the edges crossing from
    /// them into the next layer.
    #[default]
    ForwardCross,
    /// Edges incident to the middle `s` layers, starting with the edges
    /// that cross into them from the previous layer.
    Incident,
}

impl FromStr for CoreStyle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "forward-cross" => Ok(CoreStyle::ForwardCross),
            "incident" => Ok(CoreStyle::Incident),
            other => Err(format!("unknown core style '{other}' (expected forward-cross or incident)")),
        }
    }
}

/// Stepping parameters, all counted in detector layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub scheme: Scheme,
    /// Window size.
    pub w: usize,
    /// Step size.
    pub s: usize,
    /// Buffer size.
    pub b: usize,
    /// Seam offset, sandwich only.
    pub t: i64,
    pub core_style: CoreStyle,
    /// Condition on the window sides that are not a true time boundary of
    /// the experiment: the sandwich type-1 sides and the forward future side.
    pub artificial_boundary: BoundaryState,
}

impl ScheduleParams {
    pub fn batch() -> Self {
        ScheduleParams {
            scheme: Scheme::Batch,
            w: 0,
            s: 0,
            b: 0,
            t: 0,
            core_style: CoreStyle::default(),
            artificial_boundary: BoundaryState::Open,
        }
    }

    pub fn forward(s: usize, b: usize) -> Result<Self> {
        let params = ScheduleParams {
            scheme: Scheme::Forward,
            w: s + b,
            s,
            b,
            ..Self::batch()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn sandwich(s: usize, b: usize, t: i64) -> Result<Self> {
        let params = ScheduleParams {
            scheme: Scheme::Sandwich,
            w: s + 2 * b,
            s,
            b,
            t,
            ..Self::batch()
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from a window and step size, deriving the buffer.
    pub fn from_window(scheme: Scheme, w: usize, s: usize, t: i64) -> Result<Self> {
        match scheme {
            Scheme::Batch => Ok(Self::batch()),
            Scheme::Forward => {
                if w <= s {
                    return Err(Error::InvalidSchedule(format!(
                        "forward window size w={w} must exceed step size s={s}"
                    )));
                }
                Self::forward(s, w - s)
            }
            Scheme::Sandwich => {
                if (w + s) % 2 != 0 {
                    return Err(Error::InvalidSchedule(format!(
                        "sandwich needs w + s even, got w={w}, s={s}"
                    )));
                }
                if w <= s {
                    return Err(Error::InvalidSchedule(format!(
                        "sandwich window size w={w} must exceed step size s={s}"
                    )));
                }
                Self::sandwich(s, (w - s) / 2, t)
            }
        }
    }

    /// `s = (d + 1) / 2`, `w = 3s`.
    pub fn defaults_for(scheme: Scheme, d: usize) -> Self {
        let s = d.div_ceil(2);
        match scheme {
            Scheme::Batch => Self::batch(),
            Scheme::Forward => Self::forward(s, 2 * s).expect("default forward parameters"),
            Scheme::Sandwich => Self::sandwich(s, s, 0).expect("default sandwich parameters"),
        }
    }

    pub fn with_core_style(mut self, style: CoreStyle) -> Self {
        self.core_style = style;
        self
    }

    pub fn with_artificial_boundary(mut self, state: BoundaryState) -> Self {
        self.artificial_boundary = state;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSchedule(msg));
        match self.scheme {
            Scheme::Batch => Ok(()),
            Scheme::Forward => {
                if self.s < 1 {
                    return fail("forward step size must be at least 1".into());
                }
                if self.b < 1 || self.w != self.s + self.b {
                    return fail(format!(
                        "forward needs w = s + b with b >= 1, got w={}, s={}, b={}",
                        self.w, self.s, self.b
                    ));
                }
                Ok(())
            }
            Scheme::Sandwich => {
                if self.s < 2 {
                    return fail(format!("sandwich step size must be at least 2, got {}", self.s));
                }
                if self.b < 1 || self.w != self.s + 2 * self.b {
                    return fail(format!(
                        "sandwich needs w = s + 2b with b >= 1, got w={}, s={}, b={}",
                        self.w, self.s, self.b
                    ));
                }
                if self.t.unsigned_abs() as usize > self.s - 1 {
                    return fail(format!(
                        "seam offset |t|={} must be at most s - 1 = {}",
                        self.t.abs(),
                        self.s - 1
                    ));
                }
                Ok(())
            }
        }
    }

    /// How far the lower and upper ends of an interior core move inwards
    /// for seam offset `t`. The type-2 window between two cores spans
    /// `|t| + 1` layers either way.
    pub fn seam_adjustment(&self) -> (usize, usize) {
        let m = self.t.unsigned_abs() as usize;
        if self.t >= 0 {
            (m / 2, m.div_ceil(2))
        } else {
            (m.div_ceil(2), m / 2)
        }
    }
}
