//! Deterministic discrete-event simulation of two endpoints over an
//! unreliable channel.
//!
//! The sender transmits packets 1, 2, ... in order, retransmitting the
//! lowest unacknowledged packet when its timer expires. The receiver
//! acknowledges cumulatively: every packet delivery triggers an ACK whose
//! id is the smallest packet id not yet delivered (so ACK 1 acknowledges
//! nothing). RTTs are sampled under Karn's rule — only for packets
//! transmitted exactly once — and the sampled packet is always the one
//! whose delivery advanced the sender's window, i.e. the previously
//! highest acknowledgment received. Samples feed the [`crate::rtocalc`]
//! recursion, whose rto arms the retransmission timer.
//!
//! The channel may drop, delay, duplicate, and (through independent
//! per-datagram delays) reorder traffic. It cannot fabricate traffic, and
//! runtime monitors re-check that plus the sender/receiver protocol rules
//! on every event; a correct run produces an empty violation log.
//!
//! All randomness comes from a single seeded ChaCha8 stream, so a config
//! with the same seed always produces a bit-identical report.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactnum::Rational;
use crate::rtocalc::{self, RtoParams, RtoState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Packet,
    Ack,
}

/// A datagram is fully identified by its kind and natural id (>= 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Datagram {
    pub kind: Kind,
    pub id: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub drop_prob: f64,
    pub dup_prob: f64,
    /// Inclusive integer-tick delay range, min >= 1.
    pub min_delay: u64,
    pub max_delay: u64,
    /// Restores emission order on the ACK path only.
    pub fifo_acks: bool,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_prob) || !(0.0..=1.0).contains(&self.dup_prob) {
            return Err(Error::InvalidParams("probabilities must be in [0, 1]".into()));
        }
        if self.min_delay < 1 || self.max_delay < self.min_delay {
            return Err(Error::InvalidParams(format!(
                "delay range [{}, {}] invalid",
                self.min_delay, self.max_delay
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub channel: ChannelConfig,
    pub n_packets: u64,
    /// Max packets in flight; the sender offers at most one new packet per tick.
    pub window: u64,
    /// Timer value before the first RTT sample exists.
    pub initial_rto: u64,
    /// Hard stop for runs that cannot finish (e.g. total loss).
    pub max_ticks: u64,
}

impl SimConfig {
    pub fn new(channel: ChannelConfig, n_packets: u64) -> SimConfig {
        let initial_rto = 2 * channel.max_delay + 2;
        SimConfig {
            channel,
            n_packets,
            window: 1,
            initial_rto,
            max_ticks: 200_000,
        }
    }

    fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.n_packets < 1 || self.window < 1 {
            return Err(Error::InvalidParams(
                "need at least one packet and a window of at least one".into(),
            ));
        }
        Ok(())
    }
}

// Probability draws use the top 53 bits of the stream compared against a
// fixed integer threshold, so replays are exact integer comparisons.
const PROB_SCALE: u64 = 1 << 53;

fn prob_threshold(p: f64) -> u64 {
    (p * PROB_SCALE as f64) as u64
}

fn draw53(rng: &mut ChaCha8Rng) -> u64 {
    rng.next_u64() >> 11
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Delivery {
    time: u64,
    seq: u64,
    dgram: Datagram,
}

/// The lossy channel: owns the RNG stream and the in-flight delivery queue.
pub struct Channel {
    cfg: ChannelConfig,
    rng: ChaCha8Rng,
    queue: BinaryHeap<Reverse<Delivery>>,
    next_seq: u64,
    last_ack_delivery: u64,
    drop_threshold: u64,
    dup_threshold: u64,
}

impl Channel {
    pub fn new(cfg: ChannelConfig) -> Result<Channel> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Channel {
            drop_threshold: prob_threshold(cfg.drop_prob),
            dup_threshold: prob_threshold(cfg.dup_prob),
            rng,
            queue: BinaryHeap::new(),
            next_seq: 0,
            last_ack_delivery: 0,
            cfg,
        })
    }

    fn delay(&mut self) -> u64 {
        let span = self.cfg.max_delay - self.cfg.min_delay + 1;
        self.cfg.min_delay + self.rng.next_u64() % span
    }

    /// Offers a datagram to the channel at `now`. Draw order per transmit:
    /// drop, then delay, then duplicate, then the duplicate's delay.
    pub fn transmit(&mut self, dgram: Datagram, now: u64) {
        if draw53(&mut self.rng) < self.drop_threshold {
            return;
        }
        let delay = self.delay();
        self.schedule(dgram, now + delay);
        if draw53(&mut self.rng) < self.dup_threshold {
            let delay = self.delay();
            self.schedule(dgram, now + delay);
        }
    }

    fn schedule(&mut self, dgram: Datagram, mut at: u64) {
        if self.cfg.fifo_acks && dgram.kind == Kind::Ack {
            at = at.max(self.last_ack_delivery);
            self.last_ack_delivery = at;
        }
        self.queue.push(Reverse(Delivery {
            time: at,
            seq: self.next_seq,
            dgram,
        }));
        self.next_seq += 1;
    }

    fn pop_due(&mut self, now: u64) -> Option<Datagram> {
        if let Some(Reverse(head)) = self.queue.peek() {
            if head.time <= now {
                return self.queue.pop().map(|Reverse(d)| d.dgram);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketRecord {
    pub first_tx: u64,
    pub tx_count: u64,
    pub sampled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub packet_id: u64,
    pub rtt: u64,
}

/// Outcome of delivering a new (window-advancing) ACK to the sender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewAck {
    pub previous_highest: u64,
    pub sample: Option<Sample>,
    /// Transmission count of the candidate packet when no sample was taken.
    pub suppressed_tx_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sender {
    pub next_to_send: u64,
    /// Highest ACK id received; starts at 1 since ACK 1 acknowledges nothing.
    pub highest_ack: u64,
    pub records: Vec<PacketRecord>,
    pub last_activity: u64,
    pub samples: Vec<Sample>,
}

impl Sender {
    pub fn new() -> Sender {
        Sender {
            next_to_send: 1,
            highest_ack: 1,
            records: Vec::new(),
            last_activity: 0,
            samples: Vec::new(),
        }
    }

    fn record_transmit(&mut self, id: u64, now: u64) {
        debug_assert_eq!(id as usize, self.records.len() + 1);
        self.records.push(PacketRecord {
            first_tx: now,
            tx_count: 1,
            sampled: false,
        });
        self.next_to_send = id + 1;
        self.last_activity = now;
    }

    fn record_retransmit(&mut self, id: u64, now: u64) {
        let rec = &mut self.records[(id - 1) as usize];
        rec.tx_count += 1;
        self.last_activity = now;
    }

    /// Processes an ACK delivery. An ACK is new iff it exceeds every ACK
    /// received before; only new ACKs can yield a sample. The sampled
    /// packet is the previous highest ACK — the packet whose delivery moved
    /// the cumulative ACK forward — and per Karn's rule the sample is
    /// suppressed unless that packet was transmitted exactly once.
    pub fn on_ack(&mut self, ack: u64, now: u64) -> Option<NewAck> {
        if ack <= self.highest_ack {
            return None;
        }
        let candidate = self.highest_ack;
        let mut sample = None;
        let mut suppressed = None;
        if let Some(rec) = self.records.get_mut((candidate - 1) as usize) {
            if rec.tx_count == 1 && !rec.sampled {
                rec.sampled = true;
                let s = Sample {
                    packet_id: candidate,
                    rtt: now - rec.first_tx,
                };
                self.samples.push(s);
                sample = Some(s);
            } else {
                suppressed = Some(rec.tx_count);
            }
        }
        self.highest_ack = ack;
        self.last_activity = now;
        Some(NewAck {
            previous_highest: candidate,
            sample,
            suppressed_tx_count: suppressed,
        })
    }

    fn in_flight(&self) -> u64 {
        self.next_to_send.saturating_sub(self.highest_ack)
    }

    fn lowest_unacked(&self) -> Option<u64> {
        (self.highest_ack < self.next_to_send).then_some(self.highest_ack)
    }
}

impl Default for Sender {
    fn default() -> Self {
        Sender::new()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Receiver {
    pub delivered: BTreeSet<u64>,
}

impl Receiver {
    pub fn new() -> Receiver {
        Receiver::default()
    }

    /// Accepts a packet delivery and returns the cumulative ACK to emit:
    /// the smallest id not yet delivered.
    pub fn on_packet(&mut self, id: u64) -> u64 {
        self.delivered.insert(id);
        let mut next = 1;
        while self.delivered.contains(&next) {
            next += 1;
        }
        next
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: String,
    pub tick: u64,
    pub details: String,
}

/// ACKs that advanced the window but could not be sampled because the
/// covering packet had been retransmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmbiguousAck {
    pub tick: u64,
    pub ack: u64,
    pub packet: u64,
    pub tx_count: u64,
}

/// Runtime invariant monitors. They keep their own mirror of what was
/// transmitted and delivered, independent of the endpoint state machines.
pub struct Monitors {
    transmitted: HashSet<Datagram>,
    max_packet_transmitted: u64,
    receiver_delivered: BTreeSet<u64>,
    min_delay: u64,
    pub violations: Vec<Violation>,
}

impl Monitors {
    pub fn new(min_delay: u64) -> Monitors {
        Monitors {
            transmitted: HashSet::new(),
            max_packet_transmitted: 0,
            receiver_delivered: BTreeSet::new(),
            min_delay,
            violations: Vec::new(),
        }
    }

    fn flag(&mut self, invariant: &str, tick: u64, details: String) {
        self.violations.push(Violation {
            invariant: invariant.to_string(),
            tick,
            details,
        });
    }

    pub fn on_transmit(&mut self, dgram: Datagram, tick: u64) {
        if dgram.kind == Kind::Packet {
            if dgram.id > self.max_packet_transmitted + 1 {
                self.flag(
                    "sender-prefix",
                    tick,
                    format!(
                        "packet {} transmitted before {}",
                        dgram.id,
                        self.max_packet_transmitted + 1
                    ),
                );
            }
            self.max_packet_transmitted = self.max_packet_transmitted.max(dgram.id);
        }
        self.transmitted.insert(dgram);
    }

    pub fn on_delivery(&mut self, dgram: Datagram, tick: u64) {
        if !self.transmitted.contains(&dgram) {
            self.flag(
                "no-creation",
                tick,
                format!("delivered {:?} was never transmitted", dgram),
            );
        }
        if dgram.kind == Kind::Packet {
            self.receiver_delivered.insert(dgram.id);
        }
    }

    pub fn on_ack_emitted(&mut self, ack: u64, tick: u64) {
        let prefix_complete = (1..ack).all(|p| self.receiver_delivered.contains(&p));
        if !prefix_complete || self.receiver_delivered.contains(&ack) {
            self.flag(
                "receiver-cumulative",
                tick,
                format!(
                    "ack {ack} emitted with delivered {:?}",
                    self.receiver_delivered
                ),
            );
        }
    }

    pub fn on_sample(
        &mut self,
        sample: Sample,
        record: &PacketRecord,
        previous_highest: u64,
        tick: u64,
    ) {
        if record.tx_count != 1 {
            self.flag(
                "karn-single-transmit",
                tick,
                format!(
                    "sampled packet {} with tx_count {}",
                    sample.packet_id, record.tx_count
                ),
            );
        }
        if sample.rtt != tick - record.first_tx {
            self.flag(
                "karn-clock",
                tick,
                format!("sample {} != {} - {}", sample.rtt, tick, record.first_tx),
            );
        }
        if sample.rtt < 2 * self.min_delay {
            self.flag(
                "pessimism",
                tick,
                format!(
                    "sample {} below minimum round trip {}",
                    sample.rtt,
                    2 * self.min_delay
                ),
            );
        }
        if sample.packet_id != previous_highest {
            self.flag(
                "sampled-id",
                tick,
                format!(
                    "sampled packet {} but previous highest ack was {previous_highest}",
                    sample.packet_id
                ),
            );
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub samples: Vec<Sample>,
    pub states: Vec<RtoState>,
    pub final_state: Option<RtoState>,
    pub violations: Vec<Violation>,
    pub ambiguous_acks: Vec<AmbiguousAck>,
    pub packets_acked: u64,
    pub ticks: u64,
}

struct RtoTracker<'a> {
    params: &'a RtoParams,
    states: Vec<RtoState>,
}

impl<'a> RtoTracker<'a> {
    fn new(params: &'a RtoParams) -> Self {
        RtoTracker {
            params,
            states: Vec::new(),
        }
    }

    fn push_sample(&mut self, rtt: u64) -> Result<()> {
        let value = Rational::from(rtt);
        let next = match self.states.last() {
            None => rtocalc::init(self.params, &value)?,
            Some(prev) => rtocalc::step(self.params, prev, &value)?,
        };
        self.states.push(next);
        Ok(())
    }

    fn current_rto(&self, initial: u64) -> Rational {
        self.states
            .last()
            .map(|s| s.rto.clone())
            .unwrap_or_else(|| Rational::from(initial))
    }
}

/// Runs the full simulation: deterministic in the config (including its
/// seed). Invariant violations are reported, never thrown.
pub fn run_simulation(cfg: &SimConfig, params: &RtoParams) -> Result<SimReport> {
    cfg.validate()?;
    let mut channel = Channel::new(cfg.channel.clone())?;
    let mut sender = Sender::new();
    let mut receiver = Receiver::new();
    let mut monitors = Monitors::new(cfg.channel.min_delay);
    let mut tracker = RtoTracker::new(params);
    let mut ambiguous = Vec::new();

    let mut tick = 0;
    loop {
        while let Some(dgram) = channel.pop_due(tick) {
            monitors.on_delivery(dgram, tick);
            match dgram.kind {
                Kind::Packet => {
                    let ack = receiver.on_packet(dgram.id);
                    monitors.on_ack_emitted(ack, tick);
                    let reply = Datagram {
                        kind: Kind::Ack,
                        id: ack,
                    };
                    monitors.on_transmit(reply, tick);
                    channel.transmit(reply, tick);
                }
                Kind::Ack => {
                    if dgram.id > sender.next_to_send {
                        monitors.flag(
                            "no-creation",
                            tick,
                            format!("ack {} covers packets never transmitted", dgram.id),
                        );
                    }
                    if let Some(new_ack) = sender.on_ack(dgram.id, tick) {
                        if let Some(sample) = new_ack.sample {
                            let record = &sender.records[(sample.packet_id - 1) as usize];
                            monitors.on_sample(sample, record, new_ack.previous_highest, tick);
                            tracker.push_sample(sample.rtt)?;
                        } else if let Some(tx_count) = new_ack.suppressed_tx_count {
                            if tx_count > 1 {
                                ambiguous.push(AmbiguousAck {
                                    tick,
                                    ack: dgram.id,
                                    packet: new_ack.previous_highest,
                                    tx_count,
                                });
                            }
                        }
                    }
                }
            }
        }

        let all_acked = sender.highest_ack > cfg.n_packets;
        if all_acked || tick >= cfg.max_ticks {
            break;
        }

        // ACK deliveries above run first, so an ACK arriving exactly on the
        // timeout tick wins over the retransmission.
        if let Some(lowest) = sender.lowest_unacked() {
            let elapsed = Rational::from(tick - sender.last_activity);
            if elapsed > tracker.current_rto(cfg.initial_rto) {
                sender.record_retransmit(lowest, tick);
                let dgram = Datagram {
                    kind: Kind::Packet,
                    id: lowest,
                };
                monitors.on_transmit(dgram, tick);
                channel.transmit(dgram, tick);
            }
        }

        // Offer at most one new packet per tick while the window has room.
        if sender.next_to_send <= cfg.n_packets && sender.in_flight() < cfg.window {
            let id = sender.next_to_send;
            sender.record_transmit(id, tick);
            let dgram = Datagram {
                kind: Kind::Packet,
                id,
            };
            monitors.on_transmit(dgram, tick);
            channel.transmit(dgram, tick);
        }

        tick += 1;
    }

    let final_state = tracker.states.last().cloned();
    Ok(SimReport {
        samples: sender.samples.clone(),
        states: tracker.states,
        final_state,
        violations: monitors.violations,
        ambiguous_acks: ambiguous,
        packets_acked: sender.highest_ack - 1,
        ticks: tick,
    })
}

/// Scripted replay of the classic ambiguous-ACK timeline:
///
/// ```text
/// t=1  packet 1 sent, delivered t=2; ACK 2 emitted t=2, received t=3
/// t=3  packet 2 sent — lost in transit
/// t=4  packet 3 sent, delivered t=5; ACK 2 emitted t=5, received t=6
/// t=6  packet 2 retransmitted, delivered t=6; ACK 4 emitted t=6, received t=7
/// ```
///
/// At t=7 the sender cannot tell whether the ACK answers the transmission
/// at t=3 (RTT 4) or at t=6 (RTT 1), so no sample is taken for packet 2.
/// With `lossless = true` the first copy of packet 2 is delivered at t=4
/// instead, there is no retransmission, and packet 2 yields its ordinary
/// unambiguous sample.
pub fn replay_fig1(lossless: bool, params: &RtoParams) -> Result<SimReport> {
    // (send tick, packet id, delivery tick)
    let script: &[(u64, u64, Option<u64>)] = if lossless {
        &[(1, 1, Some(2)), (3, 2, Some(4)), (4, 3, Some(5))]
    } else {
        &[(1, 1, Some(2)), (3, 2, None), (4, 3, Some(5)), (6, 2, Some(6))]
    };

    let mut sender = Sender::new();
    let mut receiver = Receiver::new();
    // The scripted retransmission hop is immediate, so no minimum-delay
    // pessimism claim applies here.
    let mut monitors = Monitors::new(0);
    let mut tracker = RtoTracker::new(params);
    let mut ambiguous = Vec::new();

    let mut queue: BinaryHeap<Reverse<Delivery>> = BinaryHeap::new();
    let mut seq = 0u64;
    fn schedule(queue: &mut BinaryHeap<Reverse<Delivery>>, seq: &mut u64, time: u64, dgram: Datagram) {
        queue.push(Reverse(Delivery {
            time,
            seq: *seq,
            dgram,
        }));
        *seq += 1;
    }

    let last_tick = 10;
    for tick in 0..=last_tick {
        for &(send_at, id, delivered_at) in script {
            if send_at != tick {
                continue;
            }
            if (id as usize) > sender.records.len() {
                sender.record_transmit(id, tick);
            } else {
                sender.record_retransmit(id, tick);
            }
            let dgram = Datagram {
                kind: Kind::Packet,
                id,
            };
            monitors.on_transmit(dgram, tick);
            if let Some(at) = delivered_at {
                schedule(&mut queue, &mut seq, at, dgram);
            }
        }

        let mut due = Vec::new();
        while let Some(Reverse(head)) = queue.peek() {
            if head.time <= tick {
                due.push(queue.pop().expect("peeked").0.dgram);
            } else {
                break;
            }
        }
        for dgram in due {
            monitors.on_delivery(dgram, tick);
            match dgram.kind {
                Kind::Packet => {
                    let ack = receiver.on_packet(dgram.id);
                    monitors.on_ack_emitted(ack, tick);
                    let reply = Datagram {
                        kind: Kind::Ack,
                        id: ack,
                    };
                    monitors.on_transmit(reply, tick);
                    schedule(&mut queue, &mut seq, tick + 1, reply);
                }
                Kind::Ack => {
                    if let Some(new_ack) = sender.on_ack(dgram.id, tick) {
                        if let Some(sample) = new_ack.sample {
                            let record = &sender.records[(sample.packet_id - 1) as usize];
                            monitors.on_sample(sample, record, new_ack.previous_highest, tick);
                            tracker.push_sample(sample.rtt)?;
                        } else if let Some(tx_count) = new_ack.suppressed_tx_count {
                            if tx_count > 1 {
                                ambiguous.push(AmbiguousAck {
                                    tick,
                                    ack: dgram.id,
                                    packet: new_ack.previous_highest,
                                    tx_count,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    let final_state = tracker.states.last().cloned();
    Ok(SimReport {
        samples: sender.samples.clone(),
        states: tracker.states,
        final_state,
        violations: monitors.violations,
        ambiguous_acks: ambiguous,
        packets_acked: sender.highest_ack - 1,
        ticks: last_tick,
    })
}
