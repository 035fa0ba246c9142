// SPDX-License-Identifier: Apache-2.0

use super::{Oracle, OracleHandle, OracleKind};
use crate::bits::BitVec;
use crate::error::Result;

/// A synchronous circuit given as its next-state and output functions.
pub trait SequentialCircuit: Send + Sync {
    /// Primary input width.
    fn inputs(&self) -> usize;
    /// Primary output width.
    fn outputs(&self) -> usize;
    fn state_width(&self) -> usize;
    /// One clock step from an explicit state: `(outputs, next_state)`.
    fn step(&self, input: &BitVec, state: &BitVec) -> (BitVec, BitVec);
    fn describe(&self) -> String;
}

/// Exposes a sequential circuit as a combinational oracle.
///
/// Inputs are the primary inputs followed by the current state; outputs
/// are the primary outputs followed by the next state.
pub struct SequentialWrapper<S> {
    inner: S,
}

impl<S: SequentialCircuit> SequentialWrapper<S> {
    pub fn new(inner: S) -> Self {
        SequentialWrapper { inner }
    }
}

pub fn wrap_sequential(circuit: impl SequentialCircuit + 'static) -> OracleHandle {
    OracleHandle::new(SequentialWrapper::new(circuit))
}

impl<S: SequentialCircuit> Oracle for SequentialWrapper<S> {
    fn inputs(&self) -> usize {
        self.inner.inputs() + self.inner.state_width()
    }

    fn outputs(&self) -> usize {
        self.inner.outputs() + self.inner.state_width()
    }

    fn kind(&self) -> OracleKind {
        OracleKind::Builtin
    }

    fn eval(&self, x: &BitVec) -> Result<BitVec> {
        let (pi, st) = (self.inner.inputs(), self.inner.state_width());
        let bools = x.to_bools();
        let (out, next) = self.inner.step(
            &BitVec::from_bools(&bools[..pi]),
            &BitVec::from_bools(&bools[pi..pi + st]),
        );
        let mut y = out.to_bools();
        y.extend(next.iter());
        Ok(BitVec::from_bools(&y))
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}

/// `k`-bit up-counter with an enable input. The output is the current
/// state; the next state is `state + enable` modulo `2^k`.
#[derive(Clone, Debug)]
pub struct Counter {
    k: usize,
}

impl Counter {
    pub fn new(k: usize) -> Self {
        assert!((1..=64).contains(&k));
        Counter { k }
    }
}

impl SequentialCircuit for Counter {
    fn inputs(&self) -> usize {
        1
    }

    fn outputs(&self) -> usize {
        self.k
    }

    fn state_width(&self) -> usize {
        self.k
    }

    fn step(&self, input: &BitVec, state: &BitVec) -> (BitVec, BitVec) {
        let s = state.field(0, self.k);
        let next = (s + input.get(0) as u128) & ((1u128 << self.k) - 1);
        (state.clone(), BitVec::from_u128(next, self.k))
    }

    fn describe(&self) -> String {
        format!("counter:{}", self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter_io(enable: bool, state: u128) -> (u128, u128) {
        let h = wrap_sequential(Counter::new(3));
        let mut x = BitVec::zeros(4);
        x.set(0, enable);
        x.set_field(1, 3, state);
        let y = h.query_one(&x).unwrap();
        (y.field(0, 3), y.field(3, 3))
    }

    #[test]
    fn counter_increments() {
        assert_eq!(counter_io(true, 3), (3, 4));
    }

    #[test]
    fn counter_holds_without_enable() {
        for s in 0..8 {
            assert_eq!(counter_io(false, s), (s, s));
        }
    }

    #[test]
    fn counter_wraps() {
        assert_eq!(counter_io(true, 7), (7, 0));
    }

    #[test]
    fn builtin_counter_matches_wrapper() {
        let a = super::super::builtin("counter:3").unwrap();
        let b = wrap_sequential(Counter::new(3));
        for x in 0..16u128 {
            let v = BitVec::from_u128(x, 4);
            assert_eq!(a.query_one(&v).unwrap(), b.query_one(&v).unwrap());
        }
    }
}
