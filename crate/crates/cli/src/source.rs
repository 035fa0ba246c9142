// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use bsdsynth::oracle::{ExternalOracle, TableOracle};
use bsdsynth::{builtin, OracleHandle};
use clap::Args;
use serde::Serialize;

use crate::Failure;

/// Exactly one of these selects the oracle.
#[derive(Args, Clone, Debug, Serialize)]
pub struct OracleSource {
    /// Builtin circuit, e.g. adder:8 or miniALU:4.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Truth table or sample file (.ios).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Program speaking the line protocol on stdin/stdout.
    #[arg(long)]
    pub exec: Option<PathBuf>,
    /// Argument for the --exec program; repeatable.
    #[arg(long = "exec-arg", requires = "exec")]
    pub exec_args: Vec<String>,
}

impl OracleSource {
    pub fn open(&self) -> Result<OracleHandle, Failure> {
        let given = [self.oracle.is_some(), self.table.is_some(), self.exec.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if given != 1 {
            return Err(Failure::usage(
                "exactly one oracle source is required: --oracle <spec>, --table <path.ios> or --exec <path>",
            ));
        }
        if let Some(spec) = &self.oracle {
            return Ok(builtin(spec)?);
        }
        if let Some(path) = &self.table {
            return Ok(OracleHandle::new(TableOracle::load(path)?));
        }
        let path = self.exec.as_ref().expect("one source present");
        Ok(OracleHandle::new(ExternalOracle::spawn(path, &self.exec_args)?))
    }
}
