//! Network simulation: per-station receivers and DCF state machines driven by
//! one event scheduler over a shared link model.
//!
//! Every station owns an [`OverlapLedger`] of arrivals on its channel. A new
//! arrival at an idle receiver opens a 4 us preamble window; at its end the
//! receiver locks to the strongest candidate, checks the PLCP header SINR at
//! 20 us and then either decodes the payload (S3), sets a random NAV (S2) or
//! returns to idle (S1). A receiver that returns to idle does not resynchronise
//! to packets already on the air.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{EventHandle, Scheduler, SimTime};
use crate::mac::{
    channel_assessment, BackoffState, FailureAction, MacParams, MacState, Nav, RateManager,
    RateMode, RoundRobin,
};
use crate::phy::{
    dbm_to_mw, ed_cca, frame_airtime, on_header_end, on_preamble_end, payload_outcome,
    CollisionOutcome, FrameKind, Mcs, OverlapLedger, PayloadResult, PhyParams, PowerTrace,
    ReceiverState, RxMode, Transmission, TxId, MAX_PSDU_BYTES, PREAMBLE,
};
use crate::radio::{LinkModel, StationId};

/// Saturated traffic from `source`, served round-robin over `destinations`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub source: StationId,
    pub destinations: Vec<StationId>,
}

/// Static description of the stations taking part in one simulation.
#[derive(Clone, Debug, Default)]
pub struct NetworkSpec {
    pub channel: Vec<usize>,
    /// Cell index per station, used for cross-cell overlap accounting.
    pub cell: Vec<usize>,
    pub flows: Vec<Flow>,
    /// Per-station rate mode replacing the default one.
    pub rate_override: BTreeMap<StationId, RateMode>,
}

impl NetworkSpec {
    pub fn len(&self) -> usize {
        self.channel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channel.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub phy: bool,
    pub mac: bool,
    /// Keep one record per transmission.
    pub tx_log: bool,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub phy: PhyParams,
    pub mac: MacParams,
    pub rate: RateMode,
    pub warmup: SimTime,
    pub duration: SimTime,
    pub seed: u64,
    pub trace: TraceConfig,
}

impl EngineConfig {
    pub fn end(&self) -> SimTime {
        self.warmup + self.duration
    }
}

/// Scripted randomness for deterministic replays.
#[derive(Clone, Debug, Default)]
pub struct Script {
    /// Backoff draws consumed in order before falling back to the RNG.
    pub draws: BTreeMap<StationId, VecDeque<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhyTraceRecord {
    pub time_ns: u64,
    pub station: StationId,
    pub event: String,
    pub tx: TxId,
    pub sinr_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacTraceRecord {
    pub time_ns: u64,
    pub station: StationId,
    pub transition: String,
    pub backoff_draw: Option<u32>,
    pub cw: u32,
    pub retry: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TxRecord {
    pub id: TxId,
    pub source: StationId,
    pub destination: StationId,
    pub ack: bool,
    pub mcs: Mcs,
    pub start_ns: u64,
    pub end_ns: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StationStats {
    /// Unique payload bytes delivered to this station inside the window.
    pub delivered_bytes: u64,
    pub delivered_frames: u64,
    /// Unique payload bytes this station delivered to its destinations.
    pub sourced_bytes: u64,
    pub data_attempts: u64,
    pub data_acked: u64,
    pub dropped: u64,
}

/// Airtime of data frames inside the statistics window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    /// At least one data frame on the air.
    pub busy_ns: u64,
    /// Two or more data frames on the air.
    pub multi_ns: u64,
    /// Data frames from two or more distinct cells on the air.
    pub cross_cell_ns: u64,
    /// Two or more data frames with different start instants on the air.
    pub staggered_ns: u64,
}

impl OverlapStats {
    pub fn multi_fraction(&self) -> f64 {
        ratio(self.multi_ns, self.busy_ns)
    }

    pub fn cross_cell_fraction(&self) -> f64 {
        ratio(self.cross_cell_ns, self.busy_ns)
    }

    /// Overlap not explained by identical backoff draws.
    pub fn staggered_fraction(&self) -> f64 {
        ratio(self.staggered_ns, self.busy_ns)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunStats {
    pub window: SimTime,
    pub stations: Vec<StationStats>,
    pub overlap: OverlapStats,
    /// Transmit attempts made while the station's own NAV was set.
    pub nav_violations: u64,
    pub events: u64,
    pub phy_trace: Vec<PhyTraceRecord>,
    pub mac_trace: Vec<MacTraceRecord>,
    pub tx_log: Vec<TxRecord>,
}

impl RunStats {
    /// Goodput of `station` in Mbps over the statistics window.
    pub fn goodput_mbps(&self, station: StationId) -> f64 {
        let secs = self.window.as_secs_f64();
        if secs <= 0.0 {
            return 0.0;
        }
        self.stations[station].delivered_bytes as f64 * 8.0 / secs / 1e6
    }

    /// Goodput `station` delivered to its destinations, in Mbps.
    pub fn sourced_mbps(&self, station: StationId) -> f64 {
        let secs = self.window.as_secs_f64();
        if secs <= 0.0 {
            return 0.0;
        }
        self.stations[station].sourced_bytes as f64 * 8.0 / secs / 1e6
    }

    pub fn total_goodput_mbps(&self) -> f64 {
        (0..self.stations.len()).map(|s| self.goodput_mbps(s)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MacTimer {
    /// Slot boundary reached after the DIFS; transmits if the counter is zero.
    Difs,
    /// One idle slot elapsed; decrements the counter.
    Slot,
}

#[derive(Clone, Copy, Debug)]
enum Event {
    TxEnd(TxId),
    PreambleEnd(StationId),
    HeaderEnd(StationId),
    Mac(StationId, MacTimer),
    NavExpiry(StationId),
    AckTimeout(StationId),
    SendAck {
        station: StationId,
        to: StationId,
        data_tx: TxId,
    },
    EdCheck(StationId),
    RateUpdate,
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    dest: StationId,
    seq: u64,
}

#[derive(Clone, Copy, Debug)]
struct Outstanding {
    tx: TxId,
    dest: StationId,
    mcs: Mcs,
}

struct StationState {
    rx: ReceiverState,
    ledger: OverlapLedger,
    rx_timer: Option<EventHandle>,
    nav: Nav,
    nav_timer: Option<EventHandle>,
    mac: MacState,
    mac_timer: Option<EventHandle>,
    busy: bool,
    idle_since: SimTime,
    backoff: BackoffState,
    rr: Option<RoundRobin>,
    rate: RateManager,
    frame: Option<Frame>,
    next_seq: u64,
    outstanding: Option<Outstanding>,
    ack_timer: Option<EventHandle>,
    last_seq_from: BTreeMap<StationId, u64>,
    stats: StationStats,
}

impl StationState {
    fn contending(&self) -> bool {
        self.frame.is_some() && matches!(self.mac, MacState::DifsWait | MacState::Backoff | MacState::NavWait)
    }
}

struct ActiveTx {
    tx: Transmission,
    seq: u64,
}

pub struct Network {
    cfg: EngineConfig,
    spec: NetworkSpec,
    links: LinkModel,
    sched: Scheduler<Event>,
    st: Vec<StationState>,
    peers: Vec<Vec<StationId>>,
    txs: BTreeMap<TxId, ActiveTx>,
    next_tx: TxId,
    rng: ChaCha8Rng,
    script: Script,
    on_air: Vec<(TxId, usize, SimTime)>,
    last_air_change: SimTime,
    overlap: OverlapStats,
    nav_violations: u64,
    events: u64,
    horizon: SimTime,
    phy_trace: Vec<PhyTraceRecord>,
    mac_trace: Vec<MacTraceRecord>,
    tx_log: Vec<TxRecord>,
}

impl Network {
    pub fn new(spec: NetworkSpec, links: LinkModel, cfg: EngineConfig) -> Result<Self> {
        let n = spec.len();
        if links.len() != n {
            return Err(Error::Config(format!(
                "link model has {} stations, network has {n}",
                links.len()
            )));
        }
        if spec.cell.len() != n {
            return Err(Error::Config("cell list length differs from station count".into()));
        }
        let mut rr: Vec<Option<RoundRobin>> = vec![None; n];
        for f in &spec.flows {
            if f.source >= n {
                return Err(Error::UnknownStation(f.source));
            }
            for &d in &f.destinations {
                if d >= n || d == f.source {
                    return Err(Error::Config(format!("flow {} -> {d} is invalid", f.source)));
                }
                if spec.channel[d] != spec.channel[f.source] {
                    return Err(Error::CrossChannel {
                        tx: spec.channel[f.source],
                        rx: spec.channel[d],
                    });
                }
            }
            if rr[f.source].is_some() {
                return Err(Error::Config(format!("station {} has two flows", f.source)));
            }
            rr[f.source] = Some(RoundRobin::new(f.destinations.clone()));
        }
        let mut st = Vec::with_capacity(n);
        for (s, rr) in rr.into_iter().enumerate() {
            let mode = spec.rate_override.get(&s).copied().unwrap_or(cfg.rate);
            st.push(StationState {
                rx: ReceiverState::default(),
                ledger: OverlapLedger::new(),
                rx_timer: None,
                nav: Nav::default(),
                nav_timer: None,
                mac: MacState::Idle,
                mac_timer: None,
                busy: false,
                idle_since: SimTime::ZERO,
                backoff: BackoffState::new(&cfg.mac),
                rr,
                rate: RateManager::new(mode)?,
                frame: None,
                next_seq: 0,
                outstanding: None,
                ack_timer: None,
                last_seq_from: BTreeMap::new(),
                stats: StationStats::default(),
            });
        }
        let peers = (0..n)
            .map(|s| {
                (0..n)
                    .filter(|&r| r != s && spec.channel[r] == spec.channel[s])
                    .collect()
            })
            .collect();
        let horizon = frame_airtime(MAX_PSDU_BYTES, Mcs::LOWEST) + frame_airtime(MAX_PSDU_BYTES, Mcs::LOWEST);
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            spec,
            links,
            sched: Scheduler::new(),
            st,
            peers,
            txs: BTreeMap::new(),
            next_tx: 0,
            script: Script::default(),
            on_air: Vec::new(),
            last_air_change: SimTime::ZERO,
            overlap: OverlapStats::default(),
            nav_violations: 0,
            events: 0,
            horizon,
            phy_trace: Vec::new(),
            mac_trace: Vec::new(),
            tx_log: Vec::new(),
        })
    }

    pub fn with_script(mut self, script: Script) -> Self {
        self.script = script;
        self
    }

    /// Runs warmup plus the statistics window and returns the collected stats.
    pub fn run(mut self) -> Result<RunStats> {
        for s in 0..self.st.len() {
            if self.st[s].rr.is_some() {
                self.next_frame(s)?;
                self.resume(s);
            }
        }
        if let Some(iv) = self.st.iter().filter_map(|s| s.rate.mode().update_interval()).min() {
            self.sched.schedule(iv, Event::RateUpdate);
        }
        let end = self.cfg.end();
        while let Some((_, ev)) = self.sched.next_before(end) {
            self.events += 1;
            self.handle(ev)?;
        }
        self.account_air(end);
        Ok(RunStats {
            window: self.cfg.duration,
            stations: self.st.iter().map(|s| s.stats).collect(),
            overlap: self.overlap,
            nav_violations: self.nav_violations,
            events: self.events,
            phy_trace: self.phy_trace,
            mac_trace: self.mac_trace,
            tx_log: self.tx_log,
        })
    }

    fn now(&self) -> SimTime {
        self.sched.now()
    }

    fn in_window(&self, t: SimTime) -> bool {
        t > self.cfg.warmup && t <= self.cfg.end()
    }

    fn handle(&mut self, ev: Event) -> Result<()> {
        match ev {
            Event::TxEnd(tx) => self.on_tx_end(tx),
            Event::PreambleEnd(s) => {
                self.st[s].rx_timer = None;
                self.on_preamble(s);
                Ok(())
            }
            Event::HeaderEnd(s) => {
                self.st[s].rx_timer = None;
                self.on_header(s);
                Ok(())
            }
            Event::Mac(s, timer) => self.on_mac_timer(s, timer),
            Event::NavExpiry(s) => {
                self.st[s].nav_timer = None;
                self.update_cca(s);
                Ok(())
            }
            Event::AckTimeout(s) => self.on_ack_timeout(s),
            Event::SendAck {
                station,
                to,
                data_tx,
            } => self.send_ack(station, to, data_tx),
            Event::EdCheck(s) => {
                self.refresh_ed(s);
                self.update_cca(s);
                Ok(())
            }
            Event::RateUpdate => {
                let mut next = None;
                for s in &mut self.st {
                    s.rate.update();
                    if let Some(iv) = s.rate.mode().update_interval() {
                        next = Some(next.map_or(iv, |n: SimTime| n.min(iv)));
                    }
                }
                if let Some(iv) = next {
                    self.sched.schedule_in(iv, Event::RateUpdate);
                }
                Ok(())
            }
        }
    }

    // ---- tracing -------------------------------------------------------

    fn phy_event(&mut self, station: StationId, event: &str, tx: TxId, sinr_db: Option<f64>) {
        if self.cfg.trace.phy {
            self.phy_trace.push(PhyTraceRecord {
                time_ns: self.now().as_nanos(),
                station,
                event: event.to_string(),
                tx,
                sinr_db,
            });
        }
    }

    fn set_mac(&mut self, s: StationId, to: MacState, draw: Option<u32>) {
        let from = self.st[s].mac;
        self.st[s].mac = to;
        if self.cfg.trace.mac && (from != to || draw.is_some()) {
            let b = self.st[s].backoff;
            self.mac_trace.push(MacTraceRecord {
                time_ns: self.now().as_nanos(),
                station: s,
                transition: format!("{}->{}", mac_label(from), mac_label(to)),
                backoff_draw: draw,
                cw: b.cw,
                retry: b.retry_count,
            });
        }
    }

    // ---- carrier sense and contention ----------------------------------

    fn refresh_ed(&mut self, s: StationId) {
        let now = self.now();
        let agg = self.st[s].ledger.aggregate_mw(now);
        self.st[s].rx.ed_busy = ed_cca(agg, self.cfg.phy.ed_threshold_dbm).is_busy();
    }

    /// Re-evaluates carrier sense. A busy onset cancels contention timers due
    /// strictly later; a timer due at this very instant still fires.
    fn update_cca(&mut self, s: StationId) {
        let now = self.now();
        let ed = if self.st[s].rx.ed_busy {
            crate::phy::Cca::Busy
        } else {
            crate::phy::Cca::Clear
        };
        let busy = channel_assessment(ed, &self.st[s].nav, &self.st[s].rx, now).is_busy();
        let was = self.st[s].busy;
        self.st[s].busy = busy;
        if busy && !was {
            if let Some(h) = self.st[s].mac_timer {
                if h.fire_at() > now {
                    self.sched.cancel(h);
                    self.st[s].mac_timer = None;
                    if self.st[s].contending() {
                        let to = if self.st[s].nav.is_busy(now) {
                            MacState::NavWait
                        } else {
                            MacState::DifsWait
                        };
                        self.set_mac(s, to, None);
                    }
                }
            }
        } else if !busy {
            if was {
                self.st[s].idle_since = now;
            }
            self.resume(s);
        }
    }

    /// Schedules the next contention boundary for a clear, contending station.
    /// Boundaries lie at `idle_since + DIFS + k * slot`.
    fn resume(&mut self, s: StationId) {
        let now = self.now();
        let stn = &self.st[s];
        if !stn.contending() || stn.mac_timer.is_some() || stn.busy {
            return;
        }
        let difs_end = stn.idle_since + self.cfg.mac.difs();
        let at = if now <= difs_end {
            difs_end
        } else {
            let slot = self.cfg.mac.slot().as_nanos();
            let k = (now - difs_end).as_nanos().div_ceil(slot);
            difs_end + SimTime(k * slot)
        };
        let h = self.sched.schedule(at, Event::Mac(s, MacTimer::Difs));
        self.st[s].mac_timer = Some(h);
        if self.st[s].mac == MacState::NavWait {
            self.set_mac(s, MacState::DifsWait, None);
        }
    }

    fn on_mac_timer(&mut self, s: StationId, timer: MacTimer) -> Result<()> {
        self.st[s].mac_timer = None;
        if !self.st[s].contending() {
            return Ok(());
        }
        let zero = match timer {
            MacTimer::Difs => self.st[s].backoff.slots_remaining == 0,
            MacTimer::Slot => self.st[s].backoff.tick(),
        };
        if zero {
            return self.transmit_data(s);
        }
        if self.st[s].mac != MacState::Backoff {
            self.set_mac(s, MacState::Backoff, None);
        }
        if !self.st[s].busy {
            let h = self.sched.schedule_in(self.cfg.mac.slot(), Event::Mac(s, MacTimer::Slot));
            self.st[s].mac_timer = Some(h);
        }
        Ok(())
    }

    fn draw_backoff(&mut self, s: StationId) -> u32 {
        let cw = self.st[s].backoff.cw;
        let scripted = self.script.draws.get_mut(&s).and_then(|q| q.pop_front());
        let d = match scripted {
            Some(d) => d.min(cw),
            None => self.rng.random_range(0..=cw),
        };
        self.st[s].backoff.set_draw(d);
        d
    }

    /// Starts contention for the next frame (or the retry of the current one).
    fn next_frame(&mut self, s: StationId) -> Result<()> {
        if self.st[s].frame.is_none() {
            let dest = self.st[s].rr.as_mut().expect("flow").next()?;
            let seq = self.st[s].next_seq;
            self.st[s].next_seq += 1;
            self.st[s].frame = Some(Frame { dest, seq });
        }
        let d = self.draw_backoff(s);
        self.set_mac(s, MacState::DifsWait, Some(d));
        Ok(())
    }

    // ---- transmission --------------------------------------------------

    fn transmit_data(&mut self, s: StationId) -> Result<()> {
        let now = self.now();
        if self.st[s].rx.mode == RxMode::Transmitting {
            // Sending an ACK at this instant; contend again afterwards.
            self.set_mac(s, MacState::DifsWait, None);
            return Ok(());
        }
        if self.st[s].nav.is_busy(now) {
            self.nav_violations += 1;
        }
        let frame = self.st[s].frame.expect("contending station has a frame");
        let mcs = {
            let (u1, u2) = match self.st[s].rate.mode() {
                RateMode::Fixed { .. } => (1.0, 1.0),
                RateMode::Adaptive { .. } => (self.rng.random(), self.rng.random()),
            };
            self.st[s].rate.select_mcs(frame.dest, u1, u2)
        };
        let bytes = self.cfg.mac.frame_bytes();
        let id = self.start_tx(s, frame.dest, mcs, bytes, FrameKind::Data, frame.seq)?;
        if self.in_window(now) || now == self.cfg.warmup {
            self.st[s].stats.data_attempts += 1;
        }
        self.st[s].outstanding = Some(Outstanding {
            tx: id,
            dest: frame.dest,
            mcs,
        });
        self.set_mac(s, MacState::Tx, None);
        Ok(())
    }

    fn start_tx(
        &mut self,
        src: StationId,
        dest: StationId,
        mcs: Mcs,
        bytes: usize,
        kind: FrameKind,
        seq: u64,
    ) -> Result<TxId> {
        let now = self.now();
        let id = self.next_tx;
        self.next_tx += 1;
        let tx = Transmission::new(
            id,
            src,
            dest,
            self.spec.channel[src],
            self.cfg.phy.tx_power_dbm,
            mcs,
            bytes,
            kind,
            now,
        );
        self.enter_transmitting(src);
        self.phy_event(src, "tx_start", id, None);
        if self.cfg.trace.tx_log {
            self.tx_log.push(TxRecord {
                id,
                source: src,
                destination: dest,
                ack: matches!(kind, FrameKind::Ack { .. }),
                mcs,
                start_ns: tx.start.as_nanos(),
                end_ns: tx.end.as_nanos(),
            });
        }
        if kind == FrameKind::Data {
            self.account_air(now);
            self.on_air.push((id, self.spec.cell[src], now));
        }
        for i in 0..self.peers[src].len() {
            let r = self.peers[src][i];
            let segs = self.links.gain_segments(src, r, tx.start, tx.end)?;
            let trace = PowerTrace::new(
                segs.iter().map(|&(t, g)| (t, dbm_to_mw(tx.tx_power_dbm + g))),
                tx.end,
            );
            for &(t, _) in segs.iter().skip(1) {
                self.sched.schedule(t, Event::EdCheck(r));
            }
            self.st[r].ledger.record(id, trace);
            if self.st[r].rx.mode == RxMode::Idle {
                self.st[r].rx.mode = RxMode::Detecting { since: now };
                let h = self.sched.schedule(now + PREAMBLE, Event::PreambleEnd(r));
                self.st[r].rx_timer = Some(h);
            }
            self.refresh_ed(r);
            self.update_cca(r);
        }
        self.sched.schedule(tx.end, Event::TxEnd(id));
        self.txs.insert(id, ActiveTx { tx, seq });
        Ok(id)
    }

    fn enter_transmitting(&mut self, s: StationId) {
        if let Some(h) = self.st[s].rx_timer.take() {
            self.sched.cancel(h);
        }
        self.st[s].rx.mode = RxMode::Transmitting;
        self.update_cca(s);
    }

    fn account_air(&mut self, now: SimTime) {
        let lo = self.last_air_change.max(self.cfg.warmup);
        let hi = now.min(self.cfg.end());
        if hi > lo && !self.on_air.is_empty() {
            let dt = (hi - lo).as_nanos();
            self.overlap.busy_ns += dt;
            if self.on_air.len() >= 2 {
                self.overlap.multi_ns += dt;
                let (_, c0, t0) = self.on_air[0];
                if self.on_air.iter().any(|&(_, c, _)| c != c0) {
                    self.overlap.cross_cell_ns += dt;
                }
                if self.on_air.iter().any(|&(_, _, t)| t != t0) {
                    self.overlap.staggered_ns += dt;
                }
            }
        }
        self.last_air_change = now;
    }

    fn send_ack(&mut self, s: StationId, to: StationId, data_tx: TxId) -> Result<()> {
        if self.st[s].rx.mode == RxMode::Transmitting {
            return Ok(());
        }
        let data_mcs = self.txs.get(&data_tx).map_or(Mcs::LOWEST, |a| a.tx.mcs);
        let mcs = self.cfg.mac.ack_mcs_for(data_mcs);
        let bytes = self.cfg.mac.ack_bytes;
        self.start_tx(s, to, mcs, bytes, FrameKind::Ack { data_tx }, 0)?;
        Ok(())
    }

    // ---- reception -----------------------------------------------------

    fn on_preamble(&mut self, s: StationId) {
        let RxMode::Detecting { since } = self.st[s].rx.mode else {
            return;
        };
        let now = self.now();
        let lock = on_preamble_end(
            &self.st[s].ledger,
            since,
            now,
            self.cfg.phy.detection_floor_dbm,
            PREAMBLE,
        );
        match lock.and_then(|id| self.txs.get(&id).map(|a| (id, a.tx.header_end))) {
            Some((id, header_end)) => {
                self.st[s].rx.mode = RxMode::Syncing { tx: id };
                let h = self.sched.schedule(header_end.max(now), Event::HeaderEnd(s));
                self.st[s].rx_timer = Some(h);
                self.phy_event(s, "lock", id, None);
            }
            None => self.st[s].rx.mode = RxMode::Idle,
        }
        self.update_cca(s);
    }

    fn on_header(&mut self, s: StationId) {
        let RxMode::Syncing { tx: id } = self.st[s].rx.mode else {
            return;
        };
        let now = self.now();
        let (start, header_end, end, kind, dest, mcs) = {
            let t = &self.txs[&id].tx;
            (t.start, t.header_end, t.end, t.kind, t.destination, t.mcs)
        };
        let noise = self.cfg.phy.noise_mw();
        let sinr = self.st[s]
            .ledger
            .sinr_db(id, start, header_end, noise)
            .unwrap_or(f64::NEG_INFINITY);
        let p_fp = self.cfg.phy.p_falsepass;
        let u = if sinr < self.cfg.phy.header_gate_db && p_fp > 0.0 {
            self.rng.random()
        } else {
            1.0
        };
        match on_header_end(sinr, self.cfg.phy.header_gate_db, p_fp, u) {
            CollisionOutcome::S3 => {
                self.st[s].rx.mode = RxMode::Decoding { tx: id };
                self.phy_event(s, "s3", id, Some(sinr));
                if dest != s {
                    let until = match kind {
                        FrameKind::Data => end + self.cfg.mac.nav_tail(mcs),
                        FrameKind::Ack { .. } => end,
                    };
                    self.set_nav(s, until);
                }
            }
            CollisionOutcome::S2 => {
                self.st[s].rx.mode = RxMode::Idle;
                self.phy_event(s, "s2", id, Some(sinr));
                let max = self.cfg.phy.max_random_nav().as_nanos();
                let nav = SimTime(self.rng.random_range(0..=max));
                self.set_nav(s, now + nav);
            }
            CollisionOutcome::S1 => {
                self.st[s].rx.mode = RxMode::Idle;
                self.phy_event(s, "s1", id, Some(sinr));
            }
        }
        self.update_cca(s);
    }

    fn set_nav(&mut self, s: StationId, until: SimTime) {
        if self.st[s].nav.extend(until) {
            if let Some(h) = self.st[s].nav_timer.take() {
                self.sched.cancel(h);
            }
            let h = self.sched.schedule(until, Event::NavExpiry(s));
            self.st[s].nav_timer = Some(h);
        }
    }

    fn on_tx_end(&mut self, id: TxId) -> Result<()> {
        let now = self.now();
        let (src, kind, mcs, header_end, dest, seq, payload) = {
            let a = &self.txs[&id];
            (
                a.tx.source,
                a.tx.kind,
                a.tx.mcs,
                a.tx.header_end,
                a.tx.destination,
                a.seq,
                a.tx.payload_bytes,
            )
        };
        self.phy_event(src, "tx_end", id, None);
        if kind == FrameKind::Data {
            self.account_air(now);
            self.on_air.retain(|&(t, _, _)| t != id);
        }
        // Source returns to idle without resynchronising.
        self.st[src].rx.mode = RxMode::Idle;
        if kind == FrameKind::Data {
            let h = self
                .sched
                .schedule(now + self.cfg.mac.ack_timeout(mcs), Event::AckTimeout(src));
            self.st[src].ack_timer = Some(h);
            self.set_mac(src, MacState::WaitAck, None);
        }
        self.refresh_ed(src);
        self.update_cca(src);

        for i in 0..self.peers[src].len() {
            let r = self.peers[src][i];
            if self.st[r].rx.mode == (RxMode::Decoding { tx: id }) {
                self.st[r].rx.mode = RxMode::Idle;
                if r == dest {
                    let noise = self.cfg.phy.noise_mw();
                    let sinr = self.st[r]
                        .ledger
                        .sinr_db(id, header_end, now, noise)
                        .unwrap_or(f64::NEG_INFINITY);
                    let u = match self.cfg.phy.payload_model {
                        crate::phy::PayloadModel::Sharp => 0.0,
                        crate::phy::PayloadModel::Logistic { .. } => self.rng.random(),
                    };
                    let ok = payload_outcome(sinr, mcs, self.cfg.phy.payload_model, u)
                        == PayloadResult::Success;
                    self.phy_event(r, if ok { "rx_ok" } else { "rx_fail" }, id, Some(sinr));
                    if ok {
                        match kind {
                            FrameKind::Data => {
                                self.deliver(r, src, seq, payload, now);
                                self.sched.schedule(
                                    now + self.cfg.mac.sifs(),
                                    Event::SendAck {
                                        station: r,
                                        to: src,
                                        data_tx: id,
                                    },
                                );
                            }
                            FrameKind::Ack { data_tx } => self.on_ack(r, data_tx)?,
                        }
                    }
                }
            }
            if self.st[r].ledger.len() > 32 {
                let cutoff = now.saturating_sub(self.horizon);
                self.st[r].ledger.prune_ended_before(cutoff);
            }
            self.refresh_ed(r);
            self.update_cca(r);
        }
        if self.txs.len() > 256 {
            let cutoff = now.saturating_sub(self.horizon);
            self.txs.retain(|_, a| a.tx.end > cutoff);
        }
        Ok(())
    }

    fn deliver(&mut self, r: StationId, src: StationId, seq: u64, payload: usize, now: SimTime) {
        let fresh = self.st[r].last_seq_from.get(&src).is_none_or(|&last| seq > last);
        if !fresh {
            return;
        }
        self.st[r].last_seq_from.insert(src, seq);
        if self.in_window(now) {
            let app = payload.saturating_sub(self.cfg.mac.header_overhead_bytes);
            self.st[r].stats.delivered_bytes += app as u64;
            self.st[r].stats.delivered_frames += 1;
            self.st[src].stats.sourced_bytes += app as u64;
        }
    }

    fn on_ack(&mut self, s: StationId, data_tx: TxId) -> Result<()> {
        let Some(o) = self.st[s].outstanding else {
            return Ok(());
        };
        if o.tx != data_tx {
            return Ok(());
        }
        if let Some(h) = self.st[s].ack_timer.take() {
            self.sched.cancel(h);
        }
        self.st[s].outstanding = None;
        self.st[s].rate.record(o.dest, o.mcs, true);
        self.st[s].backoff.on_success();
        if self.in_window(self.now()) {
            self.st[s].stats.data_acked += 1;
        }
        self.st[s].frame = None;
        self.next_frame(s)
    }

    fn on_ack_timeout(&mut self, s: StationId) -> Result<()> {
        self.st[s].ack_timer = None;
        let Some(o) = self.st[s].outstanding.take() else {
            return Ok(());
        };
        self.st[s].rate.record(o.dest, o.mcs, false);
        if self.st[s].backoff.on_failure() == FailureAction::Drop {
            self.st[s].frame = None;
            if self.in_window(self.now()) {
                self.st[s].stats.dropped += 1;
            }
        }
        self.next_frame(s)?;
        self.update_cca(s);
        Ok(())
    }
}

fn mac_label(m: MacState) -> &'static str {
    match m {
        MacState::Idle => "IDLE",
        MacState::DifsWait => "DIFS_WAIT",
        MacState::Backoff => "BACKOFF",
        MacState::Tx => "TX",
        MacState::WaitAck => "WAIT_ACK",
        MacState::NavWait => "NAV_WAIT",
    }
}
