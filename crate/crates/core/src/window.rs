//! Maximum excess of placed volume over window length.

use crate::instance::Time;

/// Largest `Σ_{t ∈ [t1, t2]} volume(t) - (t2 - t1)` found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowExcess {
    pub excess: Time,
    pub t1: Time,
    pub t2: Time,
}

/// Maximizes the excess over windows whose endpoints are drawn from
/// `candidates`. `points` are `(time, volume)` pairs; windows are closed.
///
/// The objective only grows when `t1` moves right onto a point or `t2`
/// moves left onto a point, so candidate sets containing every point time
/// give the exact maximum. A zero-length window at the first candidate is
/// always considered.
pub fn max_window_excess(points: &[(Time, Time)], candidates: &[Time]) -> WindowExcess {
    let mut cands: Vec<Time> = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    let mut pts: Vec<(Time, Time)> = points.to_vec();
    pts.sort_unstable();
    let first = cands.first().copied().unwrap_or(0);
    let mut best = WindowExcess {
        excess: pts
            .iter()
            .filter(|&&(t, _)| t == first)
            .map(|&(_, v)| v)
            .sum(),
        t1: first,
        t2: first,
    };
    // prefix[i] = total volume at times < cands[i]; inclusive via upper bound.
    let volume_upto = |t: Time| -> Time {
        pts.iter().take_while(|&&(pt, _)| pt <= t).map(|&(_, v)| v).sum()
    };
    let volume_before = |t: Time| -> Time {
        pts.iter().take_while(|&&(pt, _)| pt < t).map(|&(_, v)| v).sum()
    };
    let upto: Vec<Time> = cands.iter().map(|&t| volume_upto(t)).collect();
    let before: Vec<Time> = cands.iter().map(|&t| volume_before(t)).collect();
    for a in 0..cands.len() {
        for b in a..cands.len() {
            let excess = upto[b] - before[a] - (cands[b] - cands[a]);
            if excess > best.excess {
                best = WindowExcess {
                    excess,
                    t1: cands[a],
                    t2: cands[b],
                };
            }
        }
    }
    best
}
