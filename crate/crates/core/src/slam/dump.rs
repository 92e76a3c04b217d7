//! Line-oriented text dump of a factor graph.
//!
//! One record per line, fields separated by single spaces. Poses are written
//! as seven numbers `qw qx qy qz tx ty tz`; sigmas as six numbers in
//! tangent order `(ω, ρ)`.
//!
//! ```text
//! POSE <i> <pose>
//! PRIOR <i> <measurement> <sigma>
//! ODOMETRY <i> <j> <measurement> <sigma>
//! LANDMARK <i> <tag_id> <measurement> <landmark pose> <sigma>
//! ```
//!
//! Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use super::factor::Factor;
use super::graph::FactorGraph;
use super::SlamError;
use crate::geometry::{Pose3, Rot3, Vec3, Vec6};

fn push_pose(out: &mut String, p: &Pose3) {
    let q = p.rotation.quaternion();
    let t = p.translation;
    for v in [q.w, q.i, q.j, q.k, t.x, t.y, t.z] {
        let _ = write!(out, " {v:e}");
    }
}

fn push_sigma(out: &mut String, s: &Vec6) {
    for v in s.iter() {
        let _ = write!(out, " {v:e}");
    }
}

pub fn write_dump<W: Write>(graph: &FactorGraph, mut w: W) -> io::Result<()> {
    let mut line = String::new();
    for (i, p) in graph.poses.iter().enumerate() {
        line.clear();
        let _ = write!(line, "POSE {i}");
        push_pose(&mut line, p);
        writeln!(w, "{line}")?;
    }
    for f in &graph.factors {
        line.clear();
        match f {
            Factor::Prior {
                pose,
                measurement,
                sigma,
            } => {
                let _ = write!(line, "PRIOR {pose}");
                push_pose(&mut line, measurement);
                push_sigma(&mut line, sigma);
            }
            Factor::Odometry {
                from,
                to,
                measurement,
                sigma,
            } => {
                let _ = write!(line, "ODOMETRY {from} {to}");
                push_pose(&mut line, measurement);
                push_sigma(&mut line, sigma);
            }
            Factor::Landmark {
                pose,
                tag_id,
                landmark,
                measurement,
                sigma,
            } => {
                let _ = write!(line, "LANDMARK {pose} {tag_id}");
                push_pose(&mut line, measurement);
                push_pose(&mut line, landmark);
                push_sigma(&mut line, sigma);
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

struct Fields<'a> {
    line: usize,
    iter: std::str::SplitWhitespace<'a>,
}

impl Fields<'_> {
    fn err(&self, msg: impl Into<String>) -> SlamError {
        SlamError::Parse {
            line: self.line,
            message: msg.into(),
        }
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, SlamError> {
        let tok = self.iter.next().ok_or_else(|| self.err(format!("missing {what}")))?;
        tok.parse().map_err(|_| self.err(format!("bad {what} {tok:?}")))
    }

    fn pose(&mut self) -> Result<Pose3, SlamError> {
        let mut v = [0.0; 7];
        for x in &mut v {
            *x = self.next("pose component")?;
        }
        Ok(Pose3::new(
            Rot3::from_quaternion(v[0], v[1], v[2], v[3]),
            Vec3::new(v[4], v[5], v[6]),
        ))
    }

    fn sigma(&mut self) -> Result<Vec6, SlamError> {
        let mut s = Vec6::zeros();
        for i in 0..6 {
            s[i] = self.next("sigma")?;
        }
        Ok(s)
    }
}

pub fn read_dump<R: BufRead>(r: R) -> Result<FactorGraph, SlamError> {
    let mut graph = FactorGraph::default();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| SlamError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut f = Fields {
            line: n + 1,
            iter: trimmed.split_whitespace(),
        };
        let kind: String = f.next("record kind")?;
        match kind.as_str() {
            "POSE" => {
                let i: usize = f.next("pose index")?;
                if i != graph.poses.len() {
                    return Err(f.err(format!("pose {i} out of order")));
                }
                let p = f.pose()?;
                graph.poses.push(p);
            }
            "PRIOR" => {
                let pose = f.next("pose index")?;
                let measurement = f.pose()?;
                let sigma = f.sigma()?;
                graph.add(Factor::Prior {
                    pose,
                    measurement,
                    sigma,
                })?;
            }
            "ODOMETRY" => {
                let from = f.next("pose index")?;
                let to = f.next("pose index")?;
                let measurement = f.pose()?;
                let sigma = f.sigma()?;
                graph.add(Factor::Odometry {
                    from,
                    to,
                    measurement,
                    sigma,
                })?;
            }
            "LANDMARK" => {
                let pose = f.next("pose index")?;
                let tag_id = f.next("tag id")?;
                let measurement = f.pose()?;
                let landmark = f.pose()?;
                let sigma = f.sigma()?;
                graph.add(Factor::Landmark {
                    pose,
                    tag_id,
                    landmark,
                    measurement,
                    sigma,
                })?;
            }
            other => return Err(f.err(format!("unknown record {other:?}"))),
        }
        if f.iter.next().is_some() {
            return Err(f.err("trailing fields"));
        }
    }
    Ok(graph)
}
