use std::fmt;

use serde::{Deserialize, Serialize};

/// REST operation kinds the meter distinguishes.
///
/// `CopyObject` is first-class even though Swift expresses it as PUT with
/// `X-Copy-From`: rename-based commit protocols are priced and counted by how
/// many copies they induce, so folding it into `PutObject` would erase the
/// signal this crate exists to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RestOpKind {
    PutObject,
    GetObject,
    HeadObject,
    GetContainer,
    HeadContainer,
    DeleteObject,
    CopyObject,
}

impl RestOpKind {
    pub const ALL: [RestOpKind; 7] = [
        RestOpKind::PutObject,
        RestOpKind::GetObject,
        RestOpKind::HeadObject,
        RestOpKind::GetContainer,
        RestOpKind::HeadContainer,
        RestOpKind::DeleteObject,
        RestOpKind::CopyObject,
    ];

    /// Wire verb used in trace renderings, e.g. `PUT /res/data.txt/_SUCCESS`.
    pub fn verb(self) -> &'static str {
        match self {
            RestOpKind::PutObject => "PUT",
            RestOpKind::GetObject => "GET",
            RestOpKind::HeadObject => "HEAD",
            RestOpKind::GetContainer => "GET-CONTAINER",
            RestOpKind::HeadContainer => "HEAD-CONTAINER",
            RestOpKind::DeleteObject => "DELETE",
            RestOpKind::CopyObject => "COPY",
        }
    }

    fn index(self) -> usize {
        match self {
            RestOpKind::PutObject => 0,
            RestOpKind::GetObject => 1,
            RestOpKind::HeadObject => 2,
            RestOpKind::GetContainer => 3,
            RestOpKind::HeadContainer => 4,
            RestOpKind::DeleteObject => 5,
            RestOpKind::CopyObject => 6,
        }
    }
}

impl fmt::Display for RestOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.verb())
    }
}

/// Running totals for one store instance.
///
/// Byte counters track payload volume per direction; `peak_staged` is a
/// client-side metric (largest single write buffer any connector reported via
/// [`super::ObjectStore::note_staged`]) and is not derivable from REST traffic.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTally {
    counts: [u64; 7],
    pub bytes_put: u64,
    pub bytes_got: u64,
    pub bytes_copied: u64,
    pub peak_staged: u64,
}

impl OpTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, kind: RestOpKind) -> u64 {
        self.counts[kind.index()]
    }

    pub fn record(&mut self, kind: RestOpKind) {
        self.counts[kind.index()] += 1;
    }

    /// Sum over every operation kind.
    pub fn total_ops(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn note_staged(&mut self, buffered: u64) {
        self.peak_staged = self.peak_staged.max(buffered);
    }

    /// Per-kind counts in `RestOpKind::ALL` order, for reports and diffing.
    pub fn counts(&self) -> impl Iterator<Item = (RestOpKind, u64)> + '_ {
        RestOpKind::ALL.iter().map(|&k| (k, self.count(k)))
    }

    /// Component-wise difference, for metering a phase between two snapshots.
    /// Panics if `earlier` is not component-wise `<= self`.
    pub fn since(&self, earlier: &OpTally) -> OpTally {
        let mut counts = [0u64; 7];
        for (i, slot) in counts.iter_mut().enumerate() {
            *slot = self.counts[i]
                .checked_sub(earlier.counts[i])
                .expect("tally snapshot taken later than the current tally");
        }
        OpTally {
            counts,
            bytes_put: self.bytes_put - earlier.bytes_put,
            bytes_got: self.bytes_got - earlier.bytes_got,
            bytes_copied: self.bytes_copied - earlier.bytes_copied,
            // Peaks do not subtract; keep the later observation.
            peak_staged: self.peak_staged,
        }
    }
}
