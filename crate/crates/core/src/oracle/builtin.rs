// SPDX-License-Identifier: Apache-2.0

//! Reference circuits addressed by `name:k` strings.
//!
//! All operands are LSB-first. Operand `a` occupies the lowest input bits,
//! `b` follows it, then any control field.
//!
//! | spec           | n        | m     | outputs                               |
//! |----------------|----------|-------|---------------------------------------|
//! | `adder:k`      | 2k       | k+1   | sum, carry last                       |
//! | `subtractor:k` | 2k       | k+1   | a-b mod 2^k, borrow last              |
//! | `comparator:k` | 2k       | 3     | lt, eq, gt                            |
//! | `mux:k`        | 2^k + k  | 1     | data[select], select after the data   |
//! | `parity:k`     | k        | 1     | xor of all inputs                     |
//! | `miniALU:k`    | 2k + 4   | k+1   | result, flag last; opcode in bits 2k..|
//! | `counter:k`    | 1 + k    | 2k    | enable, state -> out, next            |

use super::sequential::{Counter, SequentialCircuit};
use super::{Oracle, OracleHandle, OracleKind};
use crate::bits::BitVec;
use crate::error::{Error, Result};

/// miniALU opcodes, numbered by their 4-bit opcode value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MiniAluOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    PassA,
    PassB,
    NotA,
    NotB,
    Inc,
    Dec,
    Shl,
    Shr,
}

impl MiniAluOp {
    pub const ALL: [MiniAluOp; 16] = [
        MiniAluOp::Add,
        MiniAluOp::Sub,
        MiniAluOp::And,
        MiniAluOp::Or,
        MiniAluOp::Xor,
        MiniAluOp::Nand,
        MiniAluOp::Nor,
        MiniAluOp::Xnor,
        MiniAluOp::PassA,
        MiniAluOp::PassB,
        MiniAluOp::NotA,
        MiniAluOp::NotB,
        MiniAluOp::Inc,
        MiniAluOp::Dec,
        MiniAluOp::Shl,
        MiniAluOp::Shr,
    ];

    pub fn opcode(self) -> u8 {
        self as u8
    }

    pub fn from_opcode(op: u8) -> MiniAluOp {
        Self::ALL[(op & 0xf) as usize]
    }

    /// `(result, flag)` for `k`-bit operands.
    pub fn apply(self, a: u64, b: u64, k: u32) -> (u64, bool) {
        let mask = (1u64 << k) - 1;
        let msb = |v: u64| (v >> (k - 1)) & 1 == 1;
        match self {
            MiniAluOp::Add => {
                let s = a + b;
                (s & mask, s > mask)
            }
            MiniAluOp::Sub => (a.wrapping_sub(b) & mask, a < b),
            MiniAluOp::And => (a & b, false),
            MiniAluOp::Or => (a | b, false),
            MiniAluOp::Xor => (a ^ b, false),
            MiniAluOp::Nand => (!(a & b) & mask, false),
            MiniAluOp::Nor => (!(a | b) & mask, false),
            MiniAluOp::Xnor => (!(a ^ b) & mask, false),
            MiniAluOp::PassA => (a, false),
            MiniAluOp::PassB => (b, false),
            MiniAluOp::NotA => (!a & mask, false),
            MiniAluOp::NotB => (!b & mask, false),
            MiniAluOp::Inc => ((a + 1) & mask, a == mask),
            MiniAluOp::Dec => (a.wrapping_sub(1) & mask, a == 0),
            MiniAluOp::Shl => ((a << 1) & mask, msb(a)),
            MiniAluOp::Shr => (a >> 1, a & 1 == 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    Adder(u32),
    Subtractor(u32),
    Comparator(u32),
    Mux(u32),
    Parity(u32),
    MiniAlu(u32),
    Counter(u32),
}

impl Builtin {
    pub fn parse(spec: &str) -> Result<Builtin> {
        let (name, width) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("builtin spec {spec:?} is not `name:k`")))?;
        let k: u32 = width
            .parse()
            .map_err(|_| Error::Config(format!("bad width {width:?} in {spec:?}")))?;
        let (b, lo, hi) = match name {
            "adder" => (Builtin::Adder(k), 1, 62),
            "subtractor" => (Builtin::Subtractor(k), 1, 62),
            "comparator" => (Builtin::Comparator(k), 1, 62),
            "mux" => (Builtin::Mux(k), 1, 6),
            "parity" => (Builtin::Parity(k), 1, 4096),
            "miniALU" | "minialu" => (Builtin::MiniAlu(k), 1, 30),
            "counter" => (Builtin::Counter(k), 1, 62),
            _ => return Err(Error::Config(format!("unknown builtin {name:?}"))),
        };
        if k < lo || k > hi {
            return Err(Error::Config(format!(
                "{name} supports widths {lo}..={hi}, got {k}"
            )));
        }
        Ok(b)
    }

    pub fn spec(&self) -> String {
        match self {
            Builtin::Adder(k) => format!("adder:{k}"),
            Builtin::Subtractor(k) => format!("subtractor:{k}"),
            Builtin::Comparator(k) => format!("comparator:{k}"),
            Builtin::Mux(k) => format!("mux:{k}"),
            Builtin::Parity(k) => format!("parity:{k}"),
            Builtin::MiniAlu(k) => format!("miniALU:{k}"),
            Builtin::Counter(k) => format!("counter:{k}"),
        }
    }

    fn counter(&self) -> Option<Counter> {
        match self {
            Builtin::Counter(k) => Some(Counter::new(*k as usize)),
            _ => None,
        }
    }
}

/// Handle for a builtin spec such as `"adder:8"`.
pub fn builtin(spec: &str) -> Result<OracleHandle> {
    Ok(OracleHandle::new(Builtin::parse(spec)?))
}

impl Oracle for Builtin {
    fn inputs(&self) -> usize {
        match *self {
            Builtin::Adder(k) | Builtin::Subtractor(k) | Builtin::Comparator(k) => 2 * k as usize,
            Builtin::Mux(k) => (1usize << k) + k as usize,
            Builtin::Parity(k) => k as usize,
            Builtin::MiniAlu(k) => 2 * k as usize + 4,
            Builtin::Counter(_) => {
                let c = self.counter().expect("counter");
                c.inputs() + c.state_width()
            }
        }
    }

    fn outputs(&self) -> usize {
        match *self {
            Builtin::Adder(k) | Builtin::Subtractor(k) | Builtin::MiniAlu(k) => k as usize + 1,
            Builtin::Comparator(_) => 3,
            Builtin::Mux(_) | Builtin::Parity(_) => 1,
            Builtin::Counter(_) => {
                let c = self.counter().expect("counter");
                c.outputs() + c.state_width()
            }
        }
    }

    fn kind(&self) -> OracleKind {
        OracleKind::Builtin
    }

    fn eval(&self, x: &BitVec) -> Result<BitVec> {
        let mut y = BitVec::zeros(self.outputs());
        match *self {
            Builtin::Adder(k) => {
                let k = k as usize;
                let s = x.field(0, k) + x.field(k, k);
                y.set_field(0, k + 1, s);
            }
            Builtin::Subtractor(k) => {
                let k = k as usize;
                let (a, b) = (x.field(0, k), x.field(k, k));
                let d = a.wrapping_sub(b) & ((1u128 << k) - 1);
                y.set_field(0, k, d);
                y.set(k, a < b);
            }
            Builtin::Comparator(k) => {
                let k = k as usize;
                let (a, b) = (x.field(0, k), x.field(k, k));
                y.set(0, a < b);
                y.set(1, a == b);
                y.set(2, a > b);
            }
            Builtin::Mux(k) => {
                let data = 1usize << k;
                let sel = x.field(data, k as usize) as usize;
                y.set(0, x.get(sel));
            }
            Builtin::Parity(_) => y.set(0, x.count_ones() % 2 == 1),
            Builtin::MiniAlu(k) => {
                let ku = k as usize;
                let (a, b) = (x.field(0, ku) as u64, x.field(ku, ku) as u64);
                let op = MiniAluOp::from_opcode(x.field(2 * ku, 4) as u8);
                let (r, flag) = op.apply(a, b, k);
                y.set_field(0, ku, r as u128);
                y.set(ku, flag);
            }
            Builtin::Counter(_) => {
                let c = self.counter().expect("counter");
                let (pi, st) = (c.inputs(), c.state_width());
                let input = BitVec::from_bools(&x.to_bools()[..pi]);
                let state = BitVec::from_bools(&x.to_bools()[pi..pi + st]);
                let (out, next) = c.step(&input, &state);
                for i in 0..out.width() {
                    y.set(i, out.get(i));
                }
                for i in 0..st {
                    y.set(out.width() + i, next.get(i));
                }
            }
        }
        Ok(y)
    }

    fn describe(&self) -> String {
        self.spec()
    }
}
