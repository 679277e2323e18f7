use crate::truth::{Mode, TruthValue};

/// Outcome of one operand instance as far as the ledger knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tri {
    True,
    False,
    Pending,
}

impl Tri {
    pub fn from_value(v: TruthValue) -> Tri {
        match v {
            TruthValue::True => Tri::True,
            TruthValue::False => Tri::False,
            TruthValue::Undecided(_) => Tri::Pending,
        }
    }

    fn value(self) -> TruthValue {
        match self {
            Tri::True => TruthValue::True,
            Tri::False => TruthValue::False,
            Tri::Pending => TruthValue::UNDECIDED,
        }
    }
}

/// `ψ¹@cell` and `ψ²@cell` for one candidate witness position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Entry {
    pub cell: usize,
    pub left: Tri,
    pub right: Tri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Closure {
    /// A witness `ψ²@j = T` was found; later positions are irrelevant.
    Witness,
    /// `ψ¹@j = F`; no position after `j` can be reached.
    Broken,
}

/// Witness bookkeeping for one until instance `ψ¹ U ψ²` spawned at `anchor`.
///
/// Entries cover the positions that can still matter, in order. The value of
/// the instance is the unfolding
/// `r(j0) ∨ (l(j0) ∧ (r(j1) ∨ (l(j1) ∧ … ∧ future)))`
/// where `future` is undecided while new positions may arrive and false once
/// the ledger is closed or the trace has ended.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UntilLedger {
    anchor: usize,
    entries: Vec<Entry>,
    next: usize,
    closed: Option<Closure>,
}

impl UntilLedger {
    pub fn new(anchor: usize) -> Self {
        UntilLedger { anchor, entries: Vec::new(), next: anchor, closed: None }
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// First position not yet covered by an entry.
    pub fn next(&self) -> usize {
        self.next
    }

    pub fn closed(&self) -> Option<Closure> {
        self.closed
    }

    /// Whether positions from [`next`](Self::next) on can still matter.
    pub fn is_open(&self) -> bool {
        self.closed.is_none()
    }

    /// Fills pending entries from `lookup(cell)` = `(ψ¹@cell, ψ²@cell)` and
    /// appends the entry for `cell` when it is the next position. `lookup`
    /// returns `None` for instances not evaluated in the current cell.
    pub fn record<E>(
        &mut self,
        cell: usize,
        mut lookup: impl FnMut(usize) -> Result<(Option<TruthValue>, Option<TruthValue>), E>,
        missing: impl Fn(usize) -> E,
    ) -> Result<(), E> {
        for entry in &mut self.entries {
            if entry.left == Tri::Pending || entry.right == Tri::Pending {
                let (l, r) = lookup(entry.cell)?;
                if entry.left == Tri::Pending {
                    entry.left = Tri::from_value(l.ok_or_else(|| missing(entry.cell))?);
                }
                if entry.right == Tri::Pending {
                    entry.right = Tri::from_value(r.ok_or_else(|| missing(entry.cell))?);
                }
            }
        }
        if self.is_open() && self.next == cell {
            let (l, r) = lookup(cell)?;
            self.entries.push(Entry {
                cell,
                left: Tri::from_value(l.ok_or_else(|| missing(cell))?),
                right: Tri::from_value(r.ok_or_else(|| missing(cell))?),
            });
            self.next = cell + 1;
        }
        self.normalize();
        Ok(())
    }

    fn normalize(&mut self) {
        if let Some(i) = self.entries.iter().position(|e| e.right == Tri::True || e.left == Tri::False) {
            self.entries.truncate(i + 1);
            self.closed =
                Some(if self.entries[i].right == Tri::True { Closure::Witness } else { Closure::Broken });
        }
        let skip = self.entries.iter().take_while(|e| e.left == Tri::True && e.right == Tri::False).count();
        self.entries.drain(..skip);
    }

    /// Value of the instance; `at_end` means no position after the current
    /// cell exists.
    pub fn value(&self, at_end: bool) -> TruthValue {
        let future = if self.closed.is_some() || at_end { TruthValue::False } else { TruthValue::UNDECIDED };
        let v = self
            .entries
            .iter()
            .rev()
            .fold(future, |acc, e| kleene_or(e.right.value(), kleene_and(e.left.value(), acc)));
        match v {
            TruthValue::Undecided(_) => TruthValue::Undecided(self.mode(cell_of_last(self))),
            decided => decided,
        }
    }

    /// Annotation of an undecided instance.
    fn mode(&self, current: Option<usize>) -> Mode {
        if self.closed == Some(Closure::Witness) {
            return Mode::Left;
        }
        if self.closed == Some(Closure::Broken) {
            return Mode::Right;
        }
        let current_failed = self
            .entries
            .last()
            .is_some_and(|e| Some(e.cell) == current && e.right == Tri::False && e.left == Tri::Pending);
        if current_failed {
            Mode::Both
        } else {
            Mode::All
        }
    }
}

/// The cell evaluated most recently, if the ledger has covered one.
fn cell_of_last(ledger: &UntilLedger) -> Option<usize> {
    ledger.next.checked_sub(1)
}

pub(crate) fn kleene_or(a: TruthValue, b: TruthValue) -> TruthValue {
    match (a, b) {
        (TruthValue::True, _) | (_, TruthValue::True) => TruthValue::True,
        (TruthValue::False, TruthValue::False) => TruthValue::False,
        _ => TruthValue::UNDECIDED,
    }
}

pub(crate) fn kleene_and(a: TruthValue, b: TruthValue) -> TruthValue {
    match (a, b) {
        (TruthValue::False, _) | (_, TruthValue::False) => TruthValue::False,
        (TruthValue::True, TruthValue::True) => TruthValue::True,
        _ => TruthValue::UNDECIDED,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truth::{eval_binary, BinaryOp};

    const Q: TruthValue = TruthValue::UNDECIDED;
    const T: TruthValue = TruthValue::True;
    const F: TruthValue = TruthValue::False;

    fn fed(cells: &[(TruthValue, TruthValue)]) -> UntilLedger {
        let mut ledger = UntilLedger::new(0);
        for (c, _) in cells.iter().enumerate() {
            ledger.record(c, |j| Ok::<_, ()>((Some(cells[j].0), Some(cells[j].1))), |_| ()).unwrap();
        }
        ledger
    }

    #[test]
    fn one_entry_matches_the_all_table() {
        for l in [T, Q, F] {
            for r in [T, Q, F] {
                let ledger = fed(&[(l, r)]);
                let table = eval_binary(BinaryOp::Until, Mode::All, l, r).unwrap();
                assert_eq!(ledger.value(false), table, "({l}, {r})");
            }
        }
    }

    #[test]
    fn end_of_trace_forces_a_verdict() {
        assert_eq!(fed(&[(T, F)]).value(true), F);
        assert_eq!(fed(&[(T, F), (T, F)]).value(true), F);
    }

    #[test]
    fn pending_left_resolved_later() {
        // Cell 0: ψ¹ pending, ψ² false. Cell 1: ψ¹@0 turns true, ψ²@1 true.
        let mut ledger = UntilLedger::new(0);
        ledger.record(0, |_| Ok::<_, ()>((Some(Q), Some(F))), |_| ()).unwrap();
        assert_eq!(ledger.value(false), TruthValue::Undecided(Mode::Both));
        ledger
            .record(1, |j| Ok::<_, ()>(if j == 0 { (Some(T), Some(F)) } else { (Some(Q), Some(T)) }), |_| ())
            .unwrap();
        assert_eq!(ledger.value(false), T);
    }

    #[test]
    fn witness_blocked_by_pending_left() {
        let mut ledger = UntilLedger::new(0);
        ledger.record(0, |_| Ok::<_, ()>((Some(Q), Some(F))), |_| ()).unwrap();
        ledger
            .record(1, |j| Ok::<_, ()>(if j == 0 { (Some(Q), None) } else { (Some(Q), Some(T)) }), |_| ())
            .unwrap();
        assert_eq!(ledger.value(false), TruthValue::Undecided(Mode::Left));
        assert_eq!(ledger.closed(), Some(Closure::Witness));
        ledger.record(2, |_| Ok::<_, ()>((Some(F), None)), |_| ()).unwrap();
        assert_eq!(ledger.value(false), F);
    }

    #[test]
    fn broken_chain_waits_on_right() {
        let ledger = fed(&[(F, Q)]);
        assert_eq!(ledger.value(false), TruthValue::Undecided(Mode::Right));
        assert_eq!(ledger.next(), 1);
        assert!(!ledger.is_open());
    }

    #[test]
    fn leading_steps_are_dropped() {
        let ledger = fed(&[(T, F), (T, F), (T, Q)]);
        assert_eq!(ledger.entries().len(), 1);
        assert_eq!(ledger.entries()[0].cell, 2);
    }

    #[test]
    fn missing_operand_is_reported() {
        let mut ledger = UntilLedger::new(3);
        let err = ledger.record(3, |_| Ok((None, Some(F))), |c| c).unwrap_err();
        assert_eq!(err, 3);
    }
}
