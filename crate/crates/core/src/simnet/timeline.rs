//! Unit-time buffer timelines.
//!
//! Each path delivers one packet per tick after a fixed delay. Occupancy is
//! read at the end of every tick, after all arrivals, decodes and releases
//! of that tick.

use crate::error::Result;
use crate::framing::{frame_stream, PacketLayout};
use crate::rxbuffer::Policy;

use super::{traffic, Engine, PathTiming};

/// `delays[p]` is the tick at which path `p` delivers its first packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickScenario {
    pub delays: Vec<u64>,
    pub per_path: usize,
    /// Ticks between a reorder prefix becoming complete and its release.
    pub reorder_latency: u64,
}

/// Occupancy per tick, from t0 until both buffers are empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickTable {
    pub multipath: Vec<usize>,
    pub coded: Vec<usize>,
}

impl TickTable {
    /// First tick from which `column` stays empty.
    pub fn empty_from(column: &[usize]) -> usize {
        column.iter().rposition(|&o| o != 0).map_or(0, |i| i + 1)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("tick  multipath  network-coded\n");
        for t in 0..self.multipath.len().max(self.coded.len()) {
            let mp = self.multipath.get(t).copied().unwrap_or(0);
            let nc = self.coded.get(t).copied().unwrap_or(0);
            out.push_str(&format!("t{t:<4} {mp:>9}  {nc:>13}\n"));
        }
        out
    }
}

impl TickScenario {
    /// Four paths: P1 slowest (first packet at t3), P2 and P3 equal (t1),
    /// P4 fastest (t0); sixteen packets, four per path; reordering releases
    /// one tick after the prefix completes. Lane `i` rides path `i`.
    pub fn four_lane_example() -> Self {
        TickScenario {
            delays: vec![3, 1, 1, 0],
            per_path: 4,
            reorder_latency: 1,
        }
    }

    pub fn h(&self) -> usize {
        self.delays.len()
    }

    /// End-of-tick occupancy for `policy`, unbounded buffer.
    pub fn occupancy(&self, policy: Policy) -> Result<Vec<usize>> {
        let h = self.h();
        let layout = PacketLayout::new(9, h)?;
        let stream = frame_stream(&traffic(layout, h * self.per_path, 0), layout);
        let timings = self
            .delays
            .iter()
            .map(|&d| PathTiming { gap: 1, latency: d })
            .collect();
        let capacity = h * self.per_path;
        let mut engine = Engine::new(policy, capacity, h, layout, timings, self.reorder_latency, 0, &stream)?;
        engine.record_series = true;
        let m = engine.run()?;
        let end = m.last_event as usize;
        let mut table = vec![0usize; end + 1];
        let mut idx = 0;
        let mut current = 0;
        for (t, slot) in table.iter_mut().enumerate() {
            while idx < m.series.len() && m.series[idx].0 as usize <= t {
                current = m.series[idx].1;
                idx += 1;
            }
            *slot = current;
        }
        Ok(table)
    }

    pub fn table(&self) -> Result<TickTable> {
        let mut multipath = self.occupancy(Policy::MultipathReorder)?;
        let mut coded = self.occupancy(Policy::NetworkCoded)?;
        let len = multipath.len().max(coded.len());
        multipath.resize(len, 0);
        coded.resize(len, 0);
        Ok(TickTable { multipath, coded })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path_never_buffers_for_long() {
        let s = TickScenario {
            delays: vec![2],
            per_path: 3,
            reorder_latency: 0,
        };
        let t = s.table().unwrap();
        assert!(t.multipath.iter().all(|&o| o == 0));
        assert!(t.coded.iter().all(|&o| o == 0));
    }

    #[test]
    fn empty_from() {
        assert_eq!(TickTable::empty_from(&[1, 2, 0, 3, 0, 0]), 4);
        assert_eq!(TickTable::empty_from(&[0, 0]), 0);
    }
}
