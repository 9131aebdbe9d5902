//! Logit exchange between clients and the server.
//!
//! Clients upload [`LogitReport`]s keyed by universal public-pool indices.
//! The server averages every index over exactly the clients that reported it
//! (union semantics), optionally sharpens the result with ERA, and the
//! [`CommLedger`] counts what crossed the wire in scalars.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{entropy, softmax_in_place};

/// Row normalization tolerance for uploaded probability rows.
pub const ROW_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LogitReport {
    pub client_id: usize,
    pub n_classes: usize,
    pub indices: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

impl LogitReport {
    pub fn validate(&self) -> Result<()> {
        let err = |reason: String| Error::Protocol {
            client: self.client_id,
            reason,
        };
        if self.indices.len() != self.rows.len() {
            return Err(err(format!(
                "{} indices but {} rows",
                self.indices.len(),
                self.rows.len()
            )));
        }
        for w in self.indices.windows(2) {
            if w[0] >= w[1] {
                return Err(err(format!(
                    "indices not strictly ascending or duplicated at {} / {}",
                    w[0], w[1]
                )));
            }
        }
        for (idx, row) in self.indices.iter().zip(&self.rows) {
            if row.len() != self.n_classes {
                return Err(err(format!(
                    "row for index {idx} has {} entries, expected {}",
                    row.len(),
                    self.n_classes
                )));
            }
            let total: f64 = row.iter().sum();
            if row.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > ROW_TOL {
                return Err(err(format!("row for index {idx} is not normalized (sum {total})")));
            }
        }
        Ok(())
    }

    /// Uplink payload in scalars, `|indices| · N_c`.
    pub fn scalar_count(&self) -> usize {
        self.indices.len() * self.n_classes
    }
}

/// Averaged teacher rows over the union of reported indices.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregatedTeacher {
    pub n_classes: usize,
    pub indices: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
    pub contributors: Vec<usize>,
}

impl AggregatedTeacher {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn mean_entropy(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .rows
            .iter()
            .map(|r| entropy(r).expect("teacher rows are normalized"))
            .sum();
        total / self.rows.len() as f64
    }

    /// Drop indices reported by fewer than `min` clients.
    pub fn retain_min_contributors(mut self, min: usize) -> Self {
        let keep: Vec<bool> = self.contributors.iter().map(|&c| c >= min).collect();
        let mut it = keep.iter();
        self.indices.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.rows.retain(|_| *it.next().unwrap());
        self.contributors.retain(|&c| c >= min);
        self
    }
}

/// Per-index arithmetic mean over the clients that reported the index.
///
/// Contributions are summed in ascending client-id order, so the output is
/// bitwise independent of the order of `reports`.
pub fn aggregate_average(reports: &[LogitReport]) -> Result<AggregatedTeacher> {
    let first = reports
        .first()
        .ok_or_else(|| Error::invalid("aggregation needs at least one report"))?;
    let n_classes = first.n_classes;
    let mut ordered: Vec<&LogitReport> = reports.iter().collect();
    ordered.sort_by_key(|r| r.client_id);
    for w in ordered.windows(2) {
        if w[0].client_id == w[1].client_id {
            return Err(Error::Protocol {
                client: w[1].client_id,
                reason: "client reported twice in one round".into(),
            });
        }
    }
    let mut acc: BTreeMap<usize, (Vec<f64>, usize)> = BTreeMap::new();
    for r in &ordered {
        r.validate()?;
        if r.n_classes != n_classes {
            return Err(Error::Protocol {
                client: r.client_id,
                reason: format!("reports {} classes, expected {n_classes}", r.n_classes),
            });
        }
        for (&idx, row) in r.indices.iter().zip(&r.rows) {
            let entry = acc.entry(idx).or_insert_with(|| (vec![0.0; n_classes], 0));
            for (s, v) in entry.0.iter_mut().zip(row) {
                *s += v;
            }
            entry.1 += 1;
        }
    }
    let mut out = AggregatedTeacher {
        n_classes,
        indices: Vec::with_capacity(acc.len()),
        rows: Vec::with_capacity(acc.len()),
        contributors: Vec::with_capacity(acc.len()),
    };
    for (idx, (sum, count)) in acc {
        let k = count as f64;
        out.indices.push(idx);
        out.rows.push(sum.into_iter().map(|s| s / k).collect());
        out.contributors.push(count);
    }
    Ok(out)
}

/// Entropy reduction aggregation: every averaged row `t` becomes
/// `softmax(t / T_era)` with `0 < T_era ≤ 1`.
pub fn era_sharpen(teacher: &AggregatedTeacher, t_era: f64) -> Result<AggregatedTeacher> {
    if !(t_era > 0.0 && t_era <= 1.0) {
        return Err(Error::invalid(format!(
            "ERA temperature must lie in (0, 1], got {t_era}"
        )));
    }
    let mut out = teacher.clone();
    for row in &mut out.rows {
        softmax_in_place(row, t_era)?;
    }
    Ok(out)
}

/// Scalars moved in one round.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommEntry {
    /// Probability scalars uploaded, `Σ |indices| · N_c`.
    pub uplink_scalars: usize,
    /// Integer indices uploaded alongside the rows.
    pub uplink_index_overhead: usize,
    /// Model parameters downloaded.
    pub downlink_scalars: usize,
    /// `(client, uplink scalars, downlink scalars)`, ascending client id.
    pub per_client: Vec<(usize, usize, usize)>,
}

impl CommEntry {
    pub fn bytes(&self, bytes_per_scalar: usize) -> (usize, usize) {
        (
            self.uplink_scalars * bytes_per_scalar,
            self.downlink_scalars * bytes_per_scalar,
        )
    }

    /// Component-wise sum; per-client rows are merged by client id.
    pub fn merge(&self, other: &CommEntry) -> CommEntry {
        let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for &(c, u, d) in self.per_client.iter().chain(&other.per_client) {
            let e = per.entry(c).or_default();
            e.0 += u;
            e.1 += d;
        }
        CommEntry {
            uplink_scalars: self.uplink_scalars + other.uplink_scalars,
            uplink_index_overhead: self.uplink_index_overhead + other.uplink_index_overhead,
            downlink_scalars: self.downlink_scalars + other.downlink_scalars,
            per_client: per.into_iter().map(|(c, (u, d))| (c, u, d)).collect(),
        }
    }
}

/// Count one round's traffic: uploaded reports and `(client, parameter count)`
/// model downloads.
pub fn account(reports: &[LogitReport], model_downlinks: &[(usize, usize)]) -> CommEntry {
    let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut entry = CommEntry::default();
    for r in reports {
        entry.uplink_scalars += r.scalar_count();
        entry.uplink_index_overhead += r.indices.len();
        per.entry(r.client_id).or_default().0 += r.scalar_count();
    }
    for &(client, params) in model_downlinks {
        entry.downlink_scalars += params;
        per.entry(client).or_default().1 += params;
    }
    entry.per_client = per.into_iter().map(|(c, (u, d))| (c, u, d)).collect();
    entry
}

/// Round-by-round communication log.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommLedger {
    pub rounds: Vec<CommEntry>,
}

impl CommLedger {
    pub fn push(&mut self, entry: CommEntry) {
        self.rounds.push(entry);
    }

    pub fn total(&self) -> CommEntry {
        self.rounds
            .iter()
            .fold(CommEntry::default(), |acc, e| acc.merge(e))
    }
}

const REPORT_MAGIC: &[u8; 8] = b"FDLOGIT1";

/// Binary report encoding, little-endian throughout:
///
/// ```text
/// magic "FDLOGIT1" | client_id u64 | count u64 | n_classes u64
/// count × ( index u64 | n_classes × f64 )
/// ```
pub fn write_report<W: Write>(report: &LogitReport, mut w: W) -> std::io::Result<()> {
    w.write_all(REPORT_MAGIC)?;
    for v in [report.client_id, report.indices.len(), report.n_classes] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for (idx, row) in report.indices.iter().zip(&report.rows) {
        w.write_all(&(*idx as u64).to_le_bytes())?;
        for v in row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_report<R: Read>(mut r: R) -> Result<LogitReport> {
    let bad = |reason: &str| Error::invalid(format!("logit report decode: {reason}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != REPORT_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut u64_buf = [0u8; 8];
    let mut next_u64 = |r: &mut R| -> Result<usize> {
        r.read_exact(&mut u64_buf).map_err(|_| bad("truncated"))?;
        usize::try_from(u64::from_le_bytes(u64_buf)).map_err(|_| bad("value overflows usize"))
    };
    let client_id = next_u64(&mut r)?;
    let count = next_u64(&mut r)?;
    let n_classes = next_u64(&mut r)?;
    let mut indices = Vec::with_capacity(count.min(1 << 20));
    let mut rows = Vec::with_capacity(count.min(1 << 20));
    let mut f64_buf = [0u8; 8];
    for _ in 0..count {
        indices.push(next_u64(&mut r)?);
        let mut row = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            r.read_exact(&mut f64_buf).map_err(|_| bad("truncated row"))?;
            row.push(f64::from_le_bytes(f64_buf));
        }
        rows.push(row);
    }
    let report = LogitReport {
        client_id,
        n_classes,
        indices,
        rows,
    };
    report.validate()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(client_id: usize, indices: Vec<usize>, rows: Vec<Vec<f64>>) -> LogitReport {
        LogitReport {
            client_id,
            n_classes: rows.first().map_or(2, Vec::len),
            indices,
            rows,
        }
    }

    #[test]
    fn identical_reports_average_to_themselves() {
        let rows = vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.1, 0.8]];
        let reports: Vec<_> = (0..4).map(|c| report(c, vec![3, 9], rows.clone())).collect();
        let t = aggregate_average(&reports).unwrap();
        assert_eq!(t.indices, vec![3, 9]);
        assert_eq!(t.contributors, vec![4, 4]);
        for (a, b) in t.rows.iter().flatten().zip(rows.iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_reports_concatenate() {
        let a = report(0, vec![1, 5], vec![vec![0.9, 0.1], vec![0.3, 0.7]]);
        let b = report(1, vec![2], vec![vec![0.5, 0.5]]);
        let t = aggregate_average(&[a, b]).unwrap();
        assert_eq!(t.indices, vec![1, 2, 5]);
        assert_eq!(t.contributors, vec![1, 1, 1]);
        assert_eq!(t.rows[1], vec![0.5, 0.5]);
    }

    #[test]
    fn shared_index_is_arithmetic_mean() {
        let a = report(0, vec![7], vec![vec![0.8, 0.2]]);
        let b = report(1, vec![7], vec![vec![0.4, 0.6]]);
        let t = aggregate_average(&[a, b]).unwrap();
        assert!((t.rows[0][0] - 0.6).abs() < 1e-15 && (t.rows[0][1] - 0.4).abs() < 1e-15);
        assert_eq!(t.contributors, vec![2]);
    }

    #[test]
    fn malformed_reports_name_the_client() {
        let good = report(0, vec![1], vec![vec![0.5, 0.5]]);
        let unnormalized = report(3, vec![1], vec![vec![0.5, 0.6]]);
        match aggregate_average(&[good.clone(), unnormalized]) {
            Err(Error::Protocol { client, .. }) => assert_eq!(client, 3),
            other => panic!("unexpected {other:?}"),
        }
        let dup = report(4, vec![2, 2], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        match aggregate_average(&[good, dup]) {
            Err(Error::Protocol { client, .. }) => assert_eq!(client, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(aggregate_average(&[]).is_err());
    }

    #[test]
    fn min_contributor_filter() {
        let a = report(0, vec![1, 2], vec![vec![0.9, 0.1], vec![0.3, 0.7]]);
        let b = report(1, vec![2], vec![vec![0.5, 0.5]]);
        let t = aggregate_average(&[a, b]).unwrap().retain_min_contributors(2);
        assert_eq!(t.indices, vec![2]);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.contributors, vec![2]);
    }

    #[test]
    fn era_reference_cases() {
        let t = AggregatedTeacher {
            n_classes: 3,
            indices: vec![0, 1, 2],
            rows: vec![vec![1.0 / 3.0; 3], vec![0.5, 0.3, 0.2], vec![0.2, 0.7, 0.1]],
            contributors: vec![1; 3],
        };
        let s = era_sharpen(&t, 0.5).unwrap();
        for v in &s.rows[0] {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        // softmax((1.0, 0.6, 0.4)), same oracle values as the numerics test
        let expected = [0.450_626_705_955_689_7, 0.302_064_114_281_106_4, 0.247_309_179_763_203_88];
        for (a, b) in s.rows[1].iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let cold = era_sharpen(&t, 1e-4).unwrap();
        assert!((cold.rows[2][1] - 1.0).abs() < 1e-6);
        assert!(era_sharpen(&t, 0.0).is_err());
        assert!(era_sharpen(&t, 1.5).is_err());
    }

    #[test]
    fn era_can_raise_entropy_of_a_peaked_row() {
        // softmax of a probability row is bounded by e^{1/T} between entries,
        // so a confident input row comes out flatter at T_era = 0.5.
        let row = vec![0.5, 0.3, 0.2];
        let t = AggregatedTeacher {
            n_classes: 3,
            indices: vec![0],
            rows: vec![row.clone()],
            contributors: vec![1],
        };
        let s = era_sharpen(&t, 0.5).unwrap();
        assert!(entropy(&s.rows[0]).unwrap() > entropy(&row).unwrap());
    }

    #[test]
    fn accounting_matches_cost_formula() {
        let rows = vec![vec![0.1; 10]; 400];
        let reports: Vec<_> = (0..8).map(|c| report(c, (0..400).collect(), rows.clone())).collect();
        let e = account(&reports, &[]);
        assert_eq!(e.uplink_scalars, 32_000);
        assert_eq!(e.uplink_index_overhead, 3_200);
        assert_eq!(account(&[], &[]).uplink_scalars, 0);
        let one = report(0, (0..2000).collect(), vec![vec![0.1; 10]; 2000]);
        assert_eq!(account(&[one], &[(0, 77)]).uplink_scalars, 20_000);
        let e = account(&[], &[(2, 100), (5, 100)]);
        assert_eq!(e.downlink_scalars, 200);
        assert_eq!(e.bytes(4), (0, 800));
    }

    #[test]
    fn report_binary_round_trip() {
        let r = report(9, vec![0, 4, 17], vec![vec![0.25, 0.75], vec![1.0, 0.0], vec![0.5, 0.5]]);
        let mut buf = Vec::new();
        write_report(&r, &mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 3 * (8 + 16));
        assert_eq!(read_report(buf.as_slice()).unwrap(), r);
        assert!(read_report(&buf[..20]).is_err());
        buf[0] = b'X';
        assert!(read_report(buf.as_slice()).is_err());
    }

    fn arb_prob_row(k: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..1.0, k).prop_map(|w| {
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        })
    }

    fn arb_report(client: usize) -> impl Strategy<Value = LogitReport> {
        prop::collection::btree_set(0usize..60, 0..20).prop_flat_map(move |set| {
            let indices: Vec<usize> = set.into_iter().collect();
            let n = indices.len();
            prop::collection::vec(arb_prob_row(3), n).prop_map(move |rows| LogitReport {
                client_id: client,
                n_classes: 3,
                indices: indices.clone(),
                rows,
            })
        })
    }

    proptest! {
        #[test]
        fn aggregation_is_order_free_and_bounded(
            a in arb_report(0), b in arb_report(1), c in arb_report(2)
        ) {
            let fwd = aggregate_average(&[a.clone(), b.clone(), c.clone()]).unwrap();
            let rev = aggregate_average(&[c.clone(), a.clone(), b.clone()]).unwrap();
            prop_assert_eq!(&fwd, &rev);
            let sizes = [a.indices.len(), b.indices.len(), c.indices.len()];
            prop_assert!(fwd.len() >= *sizes.iter().max().unwrap());
            prop_assert!(fwd.len() <= sizes.iter().sum::<usize>());
            for row in &fwd.rows {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn era_is_monotone_in_temperature_and_keeps_argmax(
            row in arb_prob_row(5), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0
        ) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let t = AggregatedTeacher { n_classes: 5, indices: vec![0], rows: vec![row.clone()], contributors: vec![1] };
            let cold = era_sharpen(&t, lo).unwrap();
            let warm = era_sharpen(&t, hi).unwrap();
            prop_assert!(entropy(&cold.rows[0]).unwrap() <= entropy(&warm.rows[0]).unwrap() + 1e-12);
            prop_assert_eq!(crate::numerics::argmax(&cold.rows[0]), crate::numerics::argmax(&row));
        }

        #[test]
        fn ledger_is_additive(a in arb_report(0), b in arb_report(1), c in arb_report(2)) {
            let whole = account(&[a.clone(), b.clone(), c.clone()], &[(0, 10), (2, 10)]);
            let parts = account(&[a, b], &[(0, 10)]).merge(&account(&[c], &[(2, 10)]));
            prop_assert_eq!(whole, parts);
        }
    }
}
