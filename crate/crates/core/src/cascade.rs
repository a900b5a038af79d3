//! Cascades of infection times and sets of cascades sharing an observation
//! window.

use crate::error::{Error, Result};

/// A single infection: `node` got infected at `time`, measured from the
/// cascade's source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub node: usize,
    pub time: f64,
}

impl Event {
    pub fn new(node: usize, time: f64) -> Self {
        Event { node, time }
    }
}

/// The recorded infection times of one contagion.
///
/// Events are kept sorted by time and the earliest event (the source) sits
/// at time 0. Nodes that do not appear are uninfected within the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    events: Vec<Event>,
}

impl Cascade {
    /// Builds a cascade from events whose source is already at time 0.
    ///
    /// Events may be given in any order. Rejects empty cascades, negative or
    /// non-finite times, repeated nodes and simultaneous infections.
    pub fn new(mut events: Vec<Event>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InvalidCascade("cascade has no events".into()));
        }
        if let Some(e) = events.iter().find(|e| !e.time.is_finite() || e.time < 0.0) {
            return Err(Error::InvalidCascade(format!(
                "node {} has invalid infection time {}",
                e.node, e.time
            )));
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.node.cmp(&b.node)));
        if events[0].time != 0.0 {
            return Err(Error::InvalidCascade(format!(
                "earliest infection is at {} instead of 0",
                events[0].time
            )));
        }
        for pair in events.windows(2) {
            if pair[0].time == pair[1].time {
                return Err(Error::InvalidCascade(format!(
                    "nodes {} and {} are infected simultaneously at {}",
                    pair[0].node, pair[1].node, pair[0].time
                )));
            }
        }
        let mut nodes: Vec<usize> = events.iter().map(|e| e.node).collect();
        nodes.sort_unstable();
        if let Some(w) = nodes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidCascade(format!(
                "node {} appears more than once",
                w[0]
            )));
        }
        Ok(Cascade { events })
    }

    /// Shifts all times so that the earliest infection is at 0, then builds
    /// the cascade as [`Cascade::new`] does.
    pub fn normalized(mut events: Vec<Event>) -> Result<Self> {
        let start = events.iter().map(|e| e.time).fold(f64::INFINITY, f64::min);
        if start.is_finite() {
            for e in &mut events {
                e.time -= start;
            }
        }
        Cascade::new(events)
    }

    /// Events in ascending time order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn source(&self) -> usize {
        self.events[0].node
    }

    /// Infection time of `node`, or `None` if it is uninfected.
    pub fn time_of(&self, node: usize) -> Option<f64> {
        self.events.iter().find(|e| e.node == node).map(|e| e.time)
    }

    /// Events strictly before `t` (the conditioning history at `t`).
    pub fn before(&self, t: f64) -> &[Event] {
        let end = self.events.partition_point(|e| e.time < t);
        &self.events[..end]
    }

    /// Time between the first and the last infection.
    pub fn duration(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }

    pub fn max_node(&self) -> usize {
        self.events.iter().map(|e| e.node).max().unwrap_or(0)
    }

    /// Dense per-node infection times, `f64::INFINITY` for uninfected nodes.
    pub fn dense_times(&self, num_nodes: usize) -> Vec<f64> {
        let mut times = vec![f64::INFINITY; num_nodes];
        for e in &self.events {
            times[e.node] = e.time;
        }
        times
    }
}

/// A node universe, an observation window and the cascades recorded in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSet {
    num_nodes: usize,
    window: f64,
    cascades: Vec<Cascade>,
}

impl CascadeSet {
    pub fn new(num_nodes: usize, window: f64, cascades: Vec<Cascade>) -> Result<Self> {
        if !(window > 0.0) || window.is_nan() {
            return Err(Error::InvalidCascade(format!(
                "observation window must be positive, got {window}"
            )));
        }
        for (c, cascade) in cascades.iter().enumerate() {
            if cascade.max_node() >= num_nodes {
                return Err(Error::InvalidCascade(format!(
                    "cascade {c} references node {} but the universe has {num_nodes} nodes",
                    cascade.max_node()
                )));
            }
            if cascade.duration() > window {
                return Err(Error::InvalidCascade(format!(
                    "cascade {c} has an infection at {} beyond the window {window}",
                    cascade.duration()
                )));
            }
        }
        Ok(CascadeSet {
            num_nodes,
            window,
            cascades,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn cascades(&self) -> &[Cascade] {
        &self.cascades
    }

    pub fn len(&self) -> usize {
        self.cascades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cascades.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cascade> {
        self.cascades.iter()
    }

    pub fn into_cascades(self) -> Vec<Cascade> {
        self.cascades
    }

    /// A set over the same universe and window holding `cascades`.
    pub fn with_cascades(&self, cascades: Vec<Cascade>) -> Result<Self> {
        CascadeSet::new(self.num_nodes, self.window, cascades)
    }
}

impl<'a> IntoIterator for &'a CascadeSet {
    type Item = &'a Cascade;
    type IntoIter = std::slice::Iter<'a, Cascade>;

    fn into_iter(self) -> Self::IntoIter {
        self.cascades.iter()
    }
}
