use serde::Serialize;

use crate::HOURS;

/// Why a BEV was excluded from the coordinated programme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RejectReason {
    /// Plug-in window contains no whole hour.
    EmptyWindow,
    /// Even charging at full power every plug-in hour misses the departure target.
    WindowTooShort,
    /// No station within the hop limit.
    NoStationInReach,
    /// Every reachable station is out of plugs during the window.
    StationsFull,
}

/// Plug occupancy and local price signal of one station.
#[derive(Debug, Clone, PartialEq)]
pub struct StationState {
    pub bus: usize,
    pub plugs: u32,
    pub hourly_price: [f64; HOURS],
    pub occupancy: [u32; HOURS],
}

impl StationState {
    pub fn new(bus: usize, plugs: u32, hourly_price: [f64; HOURS]) -> Self {
        StationState {
            bus,
            plugs,
            hourly_price,
            occupancy: [0; HOURS],
        }
    }

    pub fn has_room(&self, window: &[usize]) -> bool {
        window.iter().all(|&h| self.occupancy[h] < self.plugs)
    }

    pub fn mean_price(&self, window: &[usize]) -> f64 {
        window.iter().map(|&h| self.hourly_price[h]).sum::<f64>() / window.len().max(1) as f64
    }

    pub fn peak_occupancy(&self, window: &[usize]) -> u32 {
        window.iter().map(|&h| self.occupancy[h]).max().unwrap_or(0)
    }
}

/// Whole hours a BEV is plugged in: from `ceil(t_back)` to midnight, then from
/// midnight up to the last whole hour before `t_out`, in chronological order.
pub fn plug_in_hours(t_out: f64, t_back: f64) -> Vec<usize> {
    let first = t_back.ceil() as usize;
    let last_morning = t_out.floor() as usize;
    (first..HOURS).chain(0..last_morning.min(HOURS)).collect()
}

/// Pick the station for a BEV with plug-in `window`, given hop distances from
/// its home node to every station. The winner minimises
/// (hops, mean window price, peak window occupancy, station index) among
/// stations within `max_hops` that have a free plug in every window hour; its
/// occupancy is then incremented.
pub fn assign_station(
    window: &[usize],
    hops: &[usize],
    stations: &mut [StationState],
    max_hops: usize,
) -> Result<usize, RejectReason> {
    if window.is_empty() {
        return Err(RejectReason::EmptyWindow);
    }
    let in_reach: Vec<usize> = (0..stations.len()).filter(|&s| hops[s] <= max_hops).collect();
    if in_reach.is_empty() {
        return Err(RejectReason::NoStationInReach);
    }
    let best = in_reach
        .into_iter()
        .filter(|&s| stations[s].has_room(window))
        .min_by(|&a, &b| {
            let (sa, sb) = (&stations[a], &stations[b]);
            hops[a]
                .cmp(&hops[b])
                .then(sa.mean_price(window).total_cmp(&sb.mean_price(window)))
                .then(sa.peak_occupancy(window).cmp(&sb.peak_occupancy(window)))
                .then(a.cmp(&b))
        })
        .ok_or(RejectReason::StationsFull)?;
    for &h in window {
        stations[best].occupancy[h] += 1;
    }
    Ok(best)
}
