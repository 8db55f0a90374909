//! Window layouts for the batch, forward and sandwich schemes.
//!
//! Layers are numbered `1..=num_layers` relative to the graph being
//! decoded. A core is described by a range of edge layers, where the layer
//! of an edge is the lowest detector layer it touches. The edges at the two
//! ends of the range are filtered by [`EdgeRule`] so that a horizontal seam
//! layer can be handed to a type-2 window while the edges leaving it belong
//! to the core above.

use serde::{Deserialize, Serialize};

use super::params::{CoreStyle, ScheduleParams, Scheme};
use crate::error::{Error, Result};
use crate::surface_code::BoundaryState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowType {
    Batch,
    Forward,
    Type1,
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRule {
    All,
    Horizontal,
    NonHorizontal,
}

impl EdgeRule {
    pub fn admits(self, horizontal: bool) -> bool {
        match self {
            EdgeRule::All => true,
            EdgeRule::Horizontal => horizontal,
            EdgeRule::NonHorizontal => !horizontal,
        }
    }
}

/// Edges with layer in `lo..=hi`, where edges at layer `lo` must pass
/// `lo_rule` and edges at layer `hi` must pass `hi_rule`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreSpec {
    pub lo: usize,
    pub hi: usize,
    pub lo_rule: EdgeRule,
    pub hi_rule: EdgeRule,
}

impl CoreSpec {
    fn full(lo: usize, hi: usize) -> Self {
        CoreSpec {
            lo,
            hi,
            lo_rule: EdgeRule::All,
            hi_rule: EdgeRule::All,
        }
    }

    pub fn contains(&self, layer: usize, horizontal: bool) -> bool {
        if layer < self.lo || layer > self.hi {
            return false;
        }
        (layer != self.lo || self.lo_rule.admits(horizontal))
            && (layer != self.hi || self.hi_rule.admits(horizontal))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub id: usize,
    pub window_type: WindowType,
    /// Inclusive detector-layer interval.
    pub layers: (usize, usize),
    pub past_boundary: BoundaryState,
    pub future_boundary: BoundaryState,
    pub core: CoreSpec,
    pub depends_on: Vec<usize>,
}

impl WindowSpec {
    pub fn num_layers(&self) -> usize {
        self.layers.1 - self.layers.0 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub params: ScheduleParams,
    pub num_layers: usize,
    pub windows: Vec<WindowSpec>,
}

impl Schedule {
    pub fn build(params: &ScheduleParams, num_layers: usize) -> Result<Self> {
        params.validate()?;
        match params.scheme {
            Scheme::Batch => make_batch_schedule(num_layers),
            Scheme::Forward => make_forward_schedule(num_layers, params),
            Scheme::Sandwich => make_sandwich_schedule(num_layers, params),
        }
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn num_type1(&self) -> usize {
        self.windows
            .iter()
            .filter(|w| w.window_type == WindowType::Type1)
            .count()
    }

    /// Longest dependency chain ending at each window, counting the window.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.windows.len()];
        // dependencies always have smaller depth but not necessarily smaller id
        let mut changed = true;
        while changed {
            changed = false;
            for w in &self.windows {
                let d = 1 + w.depends_on.iter().map(|&j| depth[j]).max().unwrap_or(0);
                if d != depth[w.id] {
                    depth[w.id] = d;
                    changed = true;
                }
            }
        }
        depth
    }

    /// Windows grouped by dependency depth; every stage only depends on
    /// earlier stages.
    pub fn stages(&self) -> Vec<Vec<usize>> {
        let depth = self.depths();
        let max = depth.iter().copied().max().unwrap_or(0);
        let mut stages = vec![Vec::new(); max];
        for (id, &d) in depth.iter().enumerate() {
            stages[d - 1].push(id);
        }
        stages
    }

    pub fn critical_path(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Which window core owns an edge, or `None` when no core does.
    pub fn core_owner(&self, layer: usize, horizontal: bool) -> Option<usize> {
        self.windows
            .iter()
            .find(|w| w.core.contains(layer, horizontal))
            .map(|w| w.id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_layers(num_layers: usize) -> Result<()> {
    if num_layers == 0 {
        return Err(Error::InvalidSchedule("a schedule needs at least one detector layer".into()));
    }
    Ok(())
}

pub fn make_batch_schedule(num_layers: usize) -> Result<Schedule> {
    check_layers(num_layers)?;
    Ok(batch_with_params(ScheduleParams::batch(), num_layers))
}

fn batch_with_params(params: ScheduleParams, num_layers: usize) -> Schedule {
    Schedule {
        params,
        num_layers,
        windows: vec![WindowSpec {
            id: 0,
            window_type: WindowType::Batch,
            layers: (1, num_layers),
            past_boundary: BoundaryState::Closed,
            future_boundary: BoundaryState::Closed,
            core: CoreSpec::full(1, num_layers),
            depends_on: Vec::new(),
        }],
    }
}

pub fn make_forward_schedule(num_layers: usize, params: &ScheduleParams) -> Result<Schedule> {
    check_layers(num_layers)?;
    if params.scheme != Scheme::Forward {
        return Err(Error::InvalidSchedule(format!("expected forward parameters, got {}", params.scheme)));
    }
    params.validate()?;
    let (w, s) = (params.w, params.s);
    if num_layers <= w {
        return Ok(batch_with_params(*params, num_layers));
    }
    let mut windows = Vec::new();
    let mut a = 1;
    loop {
        let id = windows.len();
        let last = a + w - 1 >= num_layers;
        let hi = if last { num_layers } else { a + w - 1 };
        windows.push(WindowSpec {
            id,
            window_type: WindowType::Forward,
            layers: (a, hi),
            past_boundary: BoundaryState::Closed,
            future_boundary: if last { BoundaryState::Closed } else { params.artificial_boundary },
            core: CoreSpec::full(a, if last { num_layers } else { a + s - 1 }),
            depends_on: if id == 0 { Vec::new() } else { vec![id - 1] },
        });
        if last {
            break;
        }
        a += s;
    }
    Ok(Schedule {
        params: *params,
        num_layers,
        windows,
    })
}

pub fn make_sandwich_schedule(num_layers: usize, params: &ScheduleParams) -> Result<Schedule> {
    check_layers(num_layers)?;
    if params.scheme != Scheme::Sandwich {
        return Err(Error::InvalidSchedule(format!("expected sandwich parameters, got {}", params.scheme)));
    }
    params.validate()?;
    let (w, s, b) = (params.w, params.s, params.b);
    if num_layers <= w {
        return Ok(batch_with_params(*params, num_layers));
    }
    let m = (num_layers - w) / s + 1;
    if m == 1 {
        return Ok(batch_with_params(*params, num_layers));
    }
    let shift: isize = match params.core_style {
        CoreStyle::ForwardCross => 0,
        CoreStyle::Incident => -1,
    };
    let (lo_adj, hi_adj) = params.seam_adjustment();
    let mut windows = Vec::with_capacity(2 * m - 1);
    for i in 0..m {
        let a = 1 + i * s;
        let anchor = (a + b) as isize + shift;
        let last = i + 1 == m;
        let layers = (a, if last { num_layers } else { a + w - 1 });
        let core = CoreSpec {
            lo: if i == 0 { 1 } else { (anchor + lo_adj as isize) as usize },
            hi: if last {
                num_layers
            } else {
                (anchor + s as isize - 1 - hi_adj as isize) as usize
            },
            lo_rule: if i == 0 { EdgeRule::All } else { EdgeRule::NonHorizontal },
            hi_rule: EdgeRule::All,
        };
        windows.push(WindowSpec {
            id: i,
            window_type: WindowType::Type1,
            layers,
            past_boundary: if i == 0 { BoundaryState::Closed } else { params.artificial_boundary },
            future_boundary: if last { BoundaryState::Closed } else { params.artificial_boundary },
            core,
            depends_on: Vec::new(),
        });
    }
    for j in 0..m - 1 {
        let lo = windows[j].core.hi + 1;
        let hi = windows[j + 1].core.lo;
        if lo > hi || lo < windows[j].layers.0 || hi > windows[j + 1].layers.1 {
            return Err(Error::InvalidSchedule(format!(
                "seam {j} spans layers {lo}..={hi}, which does not fit between its cores"
            )));
        }
        windows.push(WindowSpec {
            id: m + j,
            window_type: WindowType::Type2,
            layers: (lo, hi),
            past_boundary: BoundaryState::Closed,
            future_boundary: BoundaryState::Closed,
            core: CoreSpec {
                lo,
                hi,
                lo_rule: EdgeRule::All,
                hi_rule: EdgeRule::Horizontal,
            },
            depends_on: vec![j, j + 1],
        });
    }
    Ok(Schedule {
        params: *params,
        num_layers,
        windows,
    })
}
