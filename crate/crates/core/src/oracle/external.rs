// SPDX-License-Identifier: Apache-2.0

//! Child-process oracles over a line protocol on stdin/stdout.
//!
//! The child prints `WIDTHS <n> <m>` once. Each query is one line of `n`
//! `0`/`1` characters; the child answers with one line of `m` characters,
//! in order. `EXIT` ends the session.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::{Oracle, OracleKind};
use crate::bits::BitVec;
use crate::error::{Error, Result};

const CHUNK: usize = 512;

const EXIT_GRACE: Duration = Duration::from_secs(2);

struct Session {
    child: Child,
    /// Taken on drop so the child sees end of input.
    stdin: Option<BufWriter<ChildStdin>>,
    stdout: BufReader<ChildStdout>,
    /// Set after a protocol error; the stream position is then unknown.
    broken: bool,
}

pub struct ExternalOracle {
    n: usize,
    m: usize,
    path: PathBuf,
    session: Mutex<Session>,
}

fn protocol(line: &str, reason: impl Into<String>) -> Error {
    Error::Protocol {
        line: line.to_string(),
        reason: reason.into(),
    }
}

impl ExternalOracle {
    pub fn spawn(path: &Path, args: &[String]) -> Result<Self> {
        let mut child = Command::new(path)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let mut stdout = BufReader::new(child.stdout.take().expect("piped stdout"));

        let mut line = String::new();
        if stdout.read_line(&mut line)? == 0 {
            let _ = child.kill();
            let _ = child.wait();
            return Err(protocol("", "child closed stdout before WIDTHS"));
        }
        let header = line.trim_end_matches('\n');
        let parsed = (|| {
            let mut parts = header.split(' ');
            if parts.next()? != "WIDTHS" {
                return None;
            }
            let n: usize = parts.next()?.parse().ok()?;
            let m: usize = parts.next()?.parse().ok()?;
            (parts.next().is_none() && n >= 1 && m >= 1).then_some((n, m))
        })();
        let Some((n, m)) = parsed else {
            let _ = child.kill();
            let _ = child.wait();
            return Err(protocol(header, "expected `WIDTHS <n> <m>`"));
        };
        Ok(ExternalOracle {
            n,
            m,
            path: path.to_path_buf(),
            session: Mutex::new(Session {
                child,
                stdin: Some(stdin),
                stdout,
                broken: false,
            }),
        })
    }

    fn exchange(&self, s: &mut Session, inputs: &[BitVec]) -> Result<Vec<BitVec>> {
        let stdin = s.stdin.as_mut().expect("open session");
        for x in inputs {
            writeln!(stdin, "{x}")?;
        }
        stdin.flush()?;
        let mut out = Vec::with_capacity(inputs.len());
        let mut line = String::new();
        for _ in inputs {
            line.clear();
            if s.stdout.read_line(&mut line)? == 0 {
                return Err(protocol("", "child closed stdout mid-batch"));
            }
            let reply = line.strip_suffix('\n').unwrap_or(&line);
            if reply.len() != self.m || !reply.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(protocol(reply, format!("expected {} output bits", self.m)));
            }
            out.push(BitVec::parse(reply).map_err(|_| protocol(reply, "bad bits"))?);
        }
        Ok(out)
    }
}

impl Oracle for ExternalOracle {
    fn inputs(&self) -> usize {
        self.n
    }

    fn outputs(&self) -> usize {
        self.m
    }

    fn kind(&self) -> OracleKind {
        OracleKind::ExternalProcess
    }

    fn eval(&self, input: &BitVec) -> Result<BitVec> {
        Ok(self.eval_batch(std::slice::from_ref(input))?.pop().expect("one reply"))
    }

    fn eval_batch(&self, inputs: &[BitVec]) -> Result<Vec<BitVec>> {
        let mut s = self.session.lock().expect("oracle session");
        if s.broken {
            return Err(protocol("", "session closed after an earlier protocol error"));
        }
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(CHUNK) {
            match self.exchange(&mut s, chunk) {
                Ok(ys) => out.extend(ys),
                Err(e) => {
                    s.broken = true;
                    return Err(e);
                }
            }
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        format!("exec:{}", self.path.display())
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if let Some(mut stdin) = self.stdin.take() {
            let _ = writeln!(stdin, "EXIT");
            let _ = stdin.flush();
        }
        let deadline = Instant::now() + EXIT_GRACE;
        while Instant::now() < deadline {
            match self.child.try_wait() {
                Ok(Some(_)) | Err(_) => return,
                Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("oracle.sh");
        std::fs::write(&p, format!("#!/bin/sh\n{body}")).unwrap();
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    const OR_GATE: &str = r#"echo "WIDTHS 2 1"
while read -r line; do
  case "$line" in
    EXIT) exit 0 ;;
    00) echo 0 ;;
    *) echo 1 ;;
  esac
done
"#;

    #[test]
    fn or_gate_process() {
        let dir = tempfile::tempdir().unwrap();
        let o = ExternalOracle::spawn(&script(dir.path(), OR_GATE), &[]).unwrap();
        assert_eq!((o.inputs(), o.outputs()), (2, 1));
        let xs: Vec<BitVec> = ["00", "01", "10", "11"]
            .iter()
            .map(|s| BitVec::parse(s).unwrap())
            .collect();
        let ys: Vec<String> = o.eval_batch(&xs).unwrap().iter().map(|y| y.to_string()).collect();
        assert_eq!(ys, ["0", "1", "1", "1"]);
        let many = vec![xs[0].clone(); 1500];
        assert_eq!(o.eval_batch(&many).unwrap().len(), 1500);
    }

    #[test]
    fn malformed_reply_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let body = "echo \"WIDTHS 2 1\"\nwhile read -r line; do echo 2x; done\n";
        let o = ExternalOracle::spawn(&script(dir.path(), body), &[]).unwrap();
        match o.eval(&BitVec::parse("01").unwrap()) {
            Err(Error::Protocol { line, .. }) => assert_eq!(line, "2x"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(o.eval(&BitVec::parse("01").unwrap()).is_err());
    }

    #[test]
    fn bad_handshake() {
        let dir = tempfile::tempdir().unwrap();
        let r = ExternalOracle::spawn(&script(dir.path(), "echo HELLO\n"), &[]);
        assert!(matches!(r, Err(Error::Protocol { .. })));
    }
}
