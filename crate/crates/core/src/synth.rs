//! Synthetic ledgers with recency-biased decoys and a planted three-phase
//! pattern (entering, consolidating, exiting).
//!
//! Background transactions arrive with exponential inter-arrival times and
//! land in fixed-interval blocks; blocks without transactions are simply not
//! emitted. Each input ring hides one unspent output among `ring_size - 1`
//! decoys drawn from all earlier outputs with weight `exp(-age / scale)`.
//! Which member is real is recorded only in the separate truth list.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand::Rng;
use thiserror::Error;

use crate::chain::{OutputRef, Ring, TxId, TxRecord};
use crate::rng::{self, DetRng};

pub const DAY: u64 = 86_400;
pub const HOUR: u64 = 3_600;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error("infeasible generation: {0}")]
    Infeasible(String),
    #[error("chain spans {span} s but the planted window needs {needed} s")]
    WindowTooShort { span: u64, needed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub n_background_txs: usize,
    pub ring_size: usize,
    pub outputs_per_tx: usize,
    /// Inclusive range of rings per non-coinbase transaction.
    pub inputs_per_tx: (usize, usize),
    pub block_interval: u64,
    /// Mean seconds between background transactions.
    pub tx_interval: f64,
    /// Exponential age scale of decoy selection, seconds.
    pub decoy_recency_scale: f64,
    /// Coinbase transactions at the start of the chain, one per block.
    pub bootstrap_coinbase: usize,
    /// Every n-th background transaction is a coinbase; 0 disables.
    pub coinbase_every: usize,
    /// Share of new outputs that background users never spend.
    pub dormant_fraction: f64,
    pub genesis_timestamp: u64,
    pub fee_per_ring: u64,
    pub rng_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_background_txs: 600,
            ring_size: 5,
            outputs_per_tx: 2,
            inputs_per_tx: (1, 2),
            block_interval: 120,
            tx_interval: 18_000.0,
            decoy_recency_scale: 10.0 * DAY as f64,
            bootstrap_coinbase: 8,
            coinbase_every: 10,
            dormant_fraction: 0.2,
            // 2017-06-01T00:00:00Z
            genesis_timestamp: 1_496_275_200,
            fee_per_ring: 10_000_000,
            rng_seed: 42,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m| Err(SynthError::InvalidConfig(m));
        if self.ring_size == 0 {
            return bad("ring_size must be at least 1");
        }
        if self.outputs_per_tx == 0 {
            return bad("outputs_per_tx must be at least 1");
        }
        let (lo, hi) = self.inputs_per_tx;
        if lo == 0 || lo > hi {
            return bad("inputs_per_tx must satisfy 1 <= min <= max");
        }
        if self.block_interval == 0 {
            return bad("block_interval must be positive");
        }
        if !(self.tx_interval > 0.0 && self.tx_interval.is_finite()) {
            return bad("tx_interval must be positive");
        }
        if !(self.decoy_recency_scale > 0.0 && self.decoy_recency_scale.is_finite()) {
            return bad("decoy_recency_scale must be positive");
        }
        if !(0.0..1.0).contains(&self.dormant_fraction) {
            return bad("dormant_fraction must lie in [0, 1)");
        }
        if self.bootstrap_coinbase == 0 {
            return bad("bootstrap_coinbase must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternConfig {
    pub n_entering: usize,
    pub n_consolidating: usize,
    pub n_exiting: usize,
    pub gap_enter_to_consolidate: u64,
    pub gap_consolidate_to_exit: u64,
    /// Rings per consolidating transaction; `None` means
    /// `ceil(n_entering / n_consolidating)`.
    pub consolidating_inputs: Option<usize>,
    /// Each phase spreads its transactions uniformly over this window,
    /// centred on the phase time.
    pub jitter_window: u64,
    pub rng_seed: u64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        PatternConfig {
            n_entering: 8,
            n_consolidating: 3,
            n_exiting: 8,
            // 03 Aug -> 17 Aug -> 02 Nov
            gap_enter_to_consolidate: 14 * DAY,
            gap_consolidate_to_exit: 77 * DAY,
            consolidating_inputs: None,
            jitter_window: 6 * HOUR,
            rng_seed: 43,
        }
    }
}

impl PatternConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_entering == 0 || self.n_consolidating == 0 || self.n_exiting == 0 {
            return Err(SynthError::InvalidConfig("every phase needs at least one transaction"));
        }
        if self.consolidating_inputs == Some(0) {
            return Err(SynthError::InvalidConfig("consolidating_inputs must be positive"));
        }
        if self.gap_enter_to_consolidate <= self.jitter_window || self.gap_consolidate_to_exit <= self.jitter_window {
            return Err(SynthError::InvalidConfig("phase gaps must exceed the jitter window"));
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.n_entering + self.n_consolidating + self.n_exiting
    }

    pub fn rings_per_consolidating(&self) -> usize {
        self.consolidating_inputs
            .unwrap_or_else(|| self.n_entering.div_ceil(self.n_consolidating))
    }

    /// Seconds from the first entering phase time to the exit phase time,
    /// plus the jitter window.
    pub fn window_length(&self) -> u64 {
        self.gap_enter_to_consolidate + self.gap_consolidate_to_exit + self.jitter_window
    }
}

/// Which member of a ring is the real spend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthEntry {
    pub tx_id: TxId,
    pub ring: u32,
    pub true_member_pos: u32,
}

/// Snapshot records in stream order plus the spend ground truth, also in
/// stream order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SynthChain {
    pub records: Vec<TxRecord>,
    pub truth: Vec<TruthEntry>,
}

impl SynthChain {
    /// `(tx_id, ring) -> true spend` lookup.
    pub fn true_spends(&self) -> BTreeMap<(&str, u32), OutputRef> {
        let by_id: BTreeMap<&str, &TxRecord> = self.records.iter().map(|r| (r.tx_id.as_str(), r)).collect();
        self.truth
            .iter()
            .map(|t| {
                let rec = by_id[t.tx_id.as_str()];
                let out = rec.rings[t.ring as usize].members[t.true_member_pos as usize];
                ((t.tx_id.as_str(), t.ring), out)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Injected {
    pub chain: SynthChain,
    /// Planted transactions: entering, then consolidating, then exiting.
    pub positives: Vec<TxId>,
    pub entering: Vec<TxId>,
    pub consolidating: Vec<TxId>,
    pub exiting: Vec<TxId>,
    /// Phase times (entering, consolidating, exiting) before jitter.
    pub phase_times: [u64; 3],
}

fn random_tx_id(rng: &mut DetRng) -> TxId {
    let bytes: [u8; 32] = rng.random();
    let mut s = String::with_capacity(64);
    for b in bytes {
        write!(s, "{b:02x}").expect("writing to a String cannot fail");
    }
    TxId::new(s)
}

/// Builds one ring around `true_spend`, adding `forced` (if any) and decoys
/// from `pool` weighted by recency relative to `now`. Returns the ring with
/// members in ascending order and the true spend's position.
fn build_ring(
    pool: &[(OutputRef, u64)],
    now: u64,
    true_spend: OutputRef,
    forced: Option<OutputRef>,
    ring_size: usize,
    scale: f64,
    rng: &mut DetRng,
) -> Result<(Ring, u32), SynthError> {
    let mut chosen: BTreeSet<OutputRef> = BTreeSet::new();
    chosen.insert(true_spend);
    if let Some(f) = forced {
        chosen.insert(f);
    }
    let target = ring_size.max(chosen.len());
    if pool.len() < target {
        return Err(SynthError::Infeasible(alloc::format!(
            "{} prior outputs available, ring needs {}",
            pool.len(),
            target
        )));
    }

    if chosen.len() < target {
        let youngest = pool.iter().map(|&(_, ts)| now.saturating_sub(ts)).min().unwrap_or(0);
        let mut cumulative = Vec::with_capacity(pool.len());
        let mut total = 0.0;
        for &(_, ts) in pool {
            let age = now.saturating_sub(ts) - youngest;
            total += libm::exp(-(age as f64) / scale);
            cumulative.push(total);
        }
        let mut attempts = 0;
        while chosen.len() < target && attempts < 64 * ring_size {
            attempts += 1;
            let u = rng::unit(rng) * total;
            let i = cumulative.partition_point(|&c| c <= u).min(pool.len() - 1);
            chosen.insert(pool[i].0);
        }
        // Weights can underflow to zero for very old outputs; top up with the
        // youngest outputs not yet chosen.
        let mut by_recency: Vec<&(OutputRef, u64)> = pool.iter().collect();
        by_recency.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));
        for &(out, _) in by_recency {
            if chosen.len() >= target {
                break;
            }
            chosen.insert(out);
        }
        if chosen.len() < target {
            return Err(SynthError::Infeasible(String::from("not enough distinct prior outputs for a ring")));
        }
    }

    let members: Vec<OutputRef> = chosen.into_iter().collect();
    let pos = members.iter().position(|&m| m == true_spend).expect("true spend is a member");
    Ok((Ring::new(members), pos as u32))
}

fn fee(cfg: &GenConfig, rings: usize, rng: &mut DetRng) -> u64 {
    cfg.fee_per_ring * rings as u64 + rng.random_range(0..=cfg.fee_per_ring / 4)
}

/// Background chain: `bootstrap_coinbase` coinbase blocks followed by
/// `n_background_txs` transactions.
pub fn generate_chain(cfg: &GenConfig) -> Result<SynthChain, SynthError> {
    cfg.validate()?;
    let bootstrap_outputs = cfg.bootstrap_coinbase * cfg.outputs_per_tx;
    if bootstrap_outputs < cfg.ring_size.max(cfg.inputs_per_tx.1) {
        return Err(SynthError::Infeasible(alloc::format!(
            "bootstrap yields {bootstrap_outputs} outputs; ring_size {} and up to {} inputs need more",
            cfg.ring_size,
            cfg.inputs_per_tx.1
        )));
    }

    let mut rng = rng::seeded(cfg.rng_seed);
    let mut chain = SynthChain::default();
    let mut pool: Vec<(OutputRef, u64)> = Vec::new();
    let mut unspent: Vec<OutputRef> = Vec::new();
    let mut next_index = 0u64;
    let mut fresh_outputs = |n: usize| {
        let outs: Vec<OutputRef> = (next_index..next_index + n as u64).map(OutputRef).collect();
        next_index += n as u64;
        outs
    };

    for h in 0..cfg.bootstrap_coinbase as u64 {
        let ts = cfg.genesis_timestamp + h * cfg.block_interval;
        let outputs = fresh_outputs(cfg.outputs_per_tx);
        pool.extend(outputs.iter().map(|&o| (o, ts)));
        unspent.extend_from_slice(&outputs);
        chain.records.push(TxRecord {
            tx_id: random_tx_id(&mut rng),
            height: h,
            timestamp: ts,
            fee: 0,
            rings: Vec::new(),
            outputs,
        });
    }

    let mut height = cfg.bootstrap_coinbase as u64 - 1;
    let mut clock = height as f64 * cfg.block_interval as f64;
    for k in 0..cfg.n_background_txs {
        clock += -libm::log(1.0 - rng::unit(&mut rng)) * cfg.tx_interval;
        height = height.max((clock / cfg.block_interval as f64) as u64);
        let ts = cfg.genesis_timestamp + height * cfg.block_interval;
        let tx_id = random_tx_id(&mut rng);

        let coinbase = cfg.coinbase_every > 0 && (k + 1) % cfg.coinbase_every == 0;
        let mut rings = Vec::new();
        if !coinbase {
            let n_in = rng.random_range(cfg.inputs_per_tx.0..=cfg.inputs_per_tx.1);
            if unspent.len() < n_in {
                return Err(SynthError::Infeasible(String::from("ran out of unspent outputs")));
            }
            for r in 0..n_in {
                let spend = unspent.swap_remove(rng.random_range(0..unspent.len()));
                let (ring, pos) = build_ring(&pool, ts, spend, None, cfg.ring_size, cfg.decoy_recency_scale, &mut rng)?;
                rings.push(ring);
                chain.truth.push(TruthEntry { tx_id: tx_id.clone(), ring: r as u32, true_member_pos: pos });
            }
        }
        let outputs = fresh_outputs(cfg.outputs_per_tx);
        let fee = if coinbase { 0 } else { fee(cfg, rings.len(), &mut rng) };
        pool.extend(outputs.iter().map(|&o| (o, ts)));
        for &o in &outputs {
            if rng::unit(&mut rng) >= cfg.dormant_fraction {
                unspent.push(o);
            }
        }
        chain.records.push(TxRecord { tx_id, height, timestamp: ts, fee, rings, outputs });
    }
    Ok(chain)
}

struct Planted {
    record: TxRecord,
    truth: Vec<TruthEntry>,
    // Number of background records preceding it in the merged stream.
    insert_at: usize,
}

/// Plants the three-phase pattern into `chain` without touching any existing
/// record. Planted transactions join the block matching their (jittered)
/// phase time and take fresh global indexes above every existing output.
pub fn inject_pattern(chain: &SynthChain, gen: &GenConfig, p: &PatternConfig) -> Result<Injected, SynthError> {
    gen.validate()?;
    p.validate()?;
    let (first, last) = match (chain.records.first(), chain.records.last()) {
        (Some(a), Some(b)) => (a.timestamp, b.timestamp),
        _ => return Err(SynthError::WindowTooShort { span: 0, needed: p.window_length() }),
    };
    let span = last - first;
    let needed = p.window_length();
    if span < needed {
        return Err(SynthError::WindowTooShort { span, needed });
    }
    let half_jitter = p.jitter_window / 2;
    let start = first + (span - needed) / 2 + half_jitter;
    let phase_times = [
        start,
        start + p.gap_enter_to_consolidate,
        start + p.gap_enter_to_consolidate + p.gap_consolidate_to_exit,
    ];

    let mut rng = rng::seeded(p.rng_seed);
    let mut spent: BTreeSet<OutputRef> = chain.true_spends().into_values().collect();
    let mut next_index = chain
        .records
        .iter()
        .filter_map(|r| r.outputs.last())
        .map(|o| o.0 + 1)
        .max()
        .unwrap_or(0);

    let mut planted: Vec<Planted> = Vec::new();
    let mut phase_ids: [Vec<TxId>; 3] = Default::default();
    let mut sources: Vec<OutputRef> = Vec::new();

    let counts = [p.n_entering, p.n_consolidating, p.n_exiting];
    let rings_per_tx = [1, p.rings_per_consolidating(), 1];
    for phase in 0..3 {
        let mut heights: Vec<u64> = (0..counts[phase])
            .map(|_| {
                let t = phase_times[phase] - half_jitter + rng.random_range(0..=p.jitter_window);
                t.saturating_sub(gen.genesis_timestamp) / gen.block_interval
            })
            .collect();
        heights.sort_unstable();

        let mut slot = 0;
        let mut produced = Vec::new();
        for height in heights {
            let ts = gen.genesis_timestamp + height * gen.block_interval;
            let insert_at = chain.records.partition_point(|r| r.height <= height);
            // Decoys come from background outputs only, so planted
            // transactions link to each other solely through their spends.
            let pool: Vec<(OutputRef, u64)> = chain.records[..insert_at]
                .iter()
                .flat_map(|r| r.outputs.iter().map(move |&o| (o, r.timestamp)))
                .collect();

            let tx_id = random_tx_id(&mut rng);
            let mut rings = Vec::new();
            let mut truth = Vec::new();
            for r in 0..rings_per_tx[phase] {
                let (spend, forced) = if slot < sources.len() {
                    (sources[slot], None)
                } else {
                    let fresh: Vec<OutputRef> = chain.records[..insert_at]
                        .iter()
                        .flat_map(|r| r.outputs.iter().copied())
                        .filter(|o| !spent.contains(o))
                        .collect();
                    if fresh.is_empty() {
                        return Err(SynthError::Infeasible(String::from("no unspent output left for a planted spend")));
                    }
                    let forced = (!sources.is_empty()).then(|| sources[slot % sources.len()]);
                    (fresh[rng.random_range(0..fresh.len())], forced)
                };
                slot += 1;
                spent.insert(spend);
                let (ring, pos) = build_ring(&pool, ts, spend, forced, gen.ring_size, gen.decoy_recency_scale, &mut rng)?;
                rings.push(ring);
                truth.push(TruthEntry { tx_id: tx_id.clone(), ring: r as u32, true_member_pos: pos });
            }
            let outputs: Vec<OutputRef> = (next_index..next_index + gen.outputs_per_tx as u64).map(OutputRef).collect();
            next_index += gen.outputs_per_tx as u64;
            produced.push(outputs.clone());
            let fee = fee(gen, rings.len(), &mut rng);
            phase_ids[phase].push(tx_id.clone());
            planted.push(Planted {
                record: TxRecord { tx_id, height, timestamp: ts, fee, rings, outputs },
                truth,
                insert_at,
            });
        }
        // Next phase spends these outputs, first output of every tx first.
        sources = (0..gen.outputs_per_tx)
            .flat_map(|o| produced.iter().map(move |outs| outs[o]))
            .collect();
    }

    let mut truth_by_tx: BTreeMap<&TxId, Vec<&TruthEntry>> = BTreeMap::new();
    for t in &chain.truth {
        truth_by_tx.entry(&t.tx_id).or_default().push(t);
    }
    let mut out = SynthChain::default();
    let mut planted_iter = planted.into_iter().peekable();
    for (i, rec) in chain.records.iter().enumerate() {
        while let Some(pl) = planted_iter.next_if(|pl| pl.insert_at == i) {
            out.records.push(pl.record);
            out.truth.extend(pl.truth);
        }
        out.records.push(rec.clone());
        if let Some(ts) = truth_by_tx.get(&rec.tx_id) {
            out.truth.extend(ts.iter().map(|&t| t.clone()));
        }
    }
    for pl in planted_iter {
        out.records.push(pl.record);
        out.truth.extend(pl.truth);
    }

    let [entering, consolidating, exiting] = phase_ids;
    let positives = entering.iter().chain(&consolidating).chain(&exiting).cloned().collect();
    Ok(Injected { chain: out, positives, entering, consolidating, exiting, phase_times })
}
