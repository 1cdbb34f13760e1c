//! Text formats: JSON instance files and line-delimited JSON trace files.
//!
//! Rationals are always written as `"p/q"` or `"p"` strings. Serialization
//! is canonical, so equal values produce identical bytes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{serde_rational, Rational, RationalMatrix, RationalVector};
use crate::polyhedron::{PolyhedronInstance, VertexWithBasis};
use crate::walk::{AlgorithmConstants, EliminationData, StepKind, WalkMode, WalkStep, WalkTrace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<RationalVector>,
    pub b: RationalVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_vertex: Option<RationalVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_basis: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<RationalVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<RationalVector>,
}

impl InstanceFile {
    pub fn from_instance(p: &PolyhedronInstance) -> Self {
        InstanceFile {
            m: p.m(),
            n: p.n(),
            a: p.a().to_rows().into_iter().map(RationalVector::new).collect(),
            b: p.b().clone(),
            target_vertex: None,
            target_basis: None,
            start: None,
            objective: None,
        }
    }

    /// Parses and checks every dimension.
    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("instance file: {e}")))?;
        file.check_dimensions()?;
        Ok(file)
    }

    fn check_dimensions(&self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        if self.a.len() != m {
            return Err(Error::Parse(format!("\"A\" has {} rows but m = {m}", self.a.len())));
        }
        if let Some((i, row)) = self.a.iter().enumerate().find(|(_, row)| row.len() != n) {
            return Err(Error::Parse(format!("row {i} of \"A\" has {} entries but n = {n}", row.len())));
        }
        if self.b.len() != m {
            return Err(Error::Parse(format!("\"b\" has {} entries but m = {m}", self.b.len())));
        }
        for (key, vector) in [("target_vertex", &self.target_vertex), ("start", &self.start), ("objective", &self.objective)] {
            if let Some(v) = vector {
                if v.len() != n {
                    return Err(Error::Parse(format!("\"{key}\" has {} entries but n = {n}", v.len())));
                }
            }
        }
        if let Some(&j) = self.target_basis.iter().flatten().find(|&&j| j >= n) {
            return Err(Error::Parse(format!("\"target_basis\" index {j} is out of range for n = {n}")));
        }
        Ok(())
    }

    /// The polyhedron, with dependent rows removed.
    pub fn instance(&self) -> Result<PolyhedronInstance> {
        self.check_dimensions()?;
        let rows = self.a.iter().map(|row| row.entries().to_vec()).collect();
        let a = RationalMatrix::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))?;
        PolyhedronInstance::new(a, self.b.clone())
    }

    /// The target from `target_vertex` and/or `target_basis`, if given.
    pub fn target(&self, p: &PolyhedronInstance) -> Result<Option<VertexWithBasis>> {
        let target = match (&self.target_vertex, &self.target_basis) {
            (None, None) => return Ok(None),
            (Some(point), Some(basis)) => {
                let mut basis = basis.clone();
                basis.sort_unstable();
                VertexWithBasis { point: point.clone(), basis }
            }
            (Some(point), None) => p
                .basis_from_vertex(point)
                .map_err(|e| Error::TargetInvalid(format!("target_vertex: {e}")))?,
            (None, Some(basis)) => p
                .vertex_from_basis(basis)
                .map_err(|e| Error::TargetInvalid(format!("target_basis: {e}")))?,
        };
        target.validate(p)?;
        Ok(Some(target))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("instance files serialize");
        text.push('\n');
        text
    }
}

/// SHA-256 of the compact canonical instance file, hex encoded.
pub fn instance_digest(p: &PolyhedronInstance) -> String {
    let text = serde_json::to_string(&InstanceFile::from_instance(p)).expect("instance files serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TraceRecord {
    Header(HeaderRecord),
    Step(StepRecord),
    Footer(FooterRecord),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct HeaderRecord {
    instance_digest: String,
    m: usize,
    n: usize,
    #[serde(with = "serde_rational")]
    tau: Rational,
    #[serde(with = "serde_rational")]
    lambda: Rational,
    certified: bool,
    mode: String,
    start: RationalVector,
    target: RationalVector,
    basis: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<RationalVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct StepRecord {
    index: usize,
    kind: String,
    direction: RationalVector,
    #[serde(with = "serde_rational")]
    alpha: Rational,
    blocking_index: usize,
    trapped_before: Vec<usize>,
    trapped_after: Vec<usize>,
    decomposition_size: usize,
    chosen_term: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elimination: Option<EliminationRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct EliminationRecord {
    q: usize,
    #[serde(with = "serde_rational")]
    rho: Rational,
    y: RationalVector,
    z: RationalVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct FooterRecord {
    final_point: RationalVector,
    length: usize,
    budget: usize,
}

fn record_line(record: &TraceRecord) -> String {
    serde_json::to_string(record).expect("trace records serialize")
}

/// The header line of a trace file.
pub fn trace_header(trace: &WalkTrace) -> String {
    record_line(&TraceRecord::Header(HeaderRecord {
        instance_digest: instance_digest(&trace.instance),
        m: trace.instance.m(),
        n: trace.instance.n(),
        tau: trace.constants.tau.clone(),
        lambda: trace.constants.lambda.clone(),
        certified: trace.constants.certified,
        mode: trace.mode.as_str().to_string(),
        start: trace.start.clone(),
        target: trace.target.point.clone(),
        basis: trace.target.basis.clone(),
        objective: trace.objective.clone(),
    }))
}

/// The record line of step `index`.
pub fn step_line(index: usize, step: &WalkStep) -> String {
    record_line(&TraceRecord::Step(StepRecord {
        index,
        kind: step.kind.as_str().to_string(),
        direction: step.direction.clone(),
        alpha: step.step_length.clone(),
        blocking_index: step.blocking_index,
        trapped_before: step.trapped_before.clone(),
        trapped_after: step.trapped_after.clone(),
        decomposition_size: step.decomposition_size,
        chosen_term: step.chosen_term,
        elimination: step.elimination.as_ref().map(|e| EliminationRecord {
            q: e.q,
            rho: e.rho.clone(),
            y: e.y.clone(),
            z: e.z.clone(),
        }),
    }))
}

/// Canonical trace file: header, one line per step, footer. The footer's
/// final point is informational; parsing does not check it.
pub fn trace_to_string(trace: &WalkTrace) -> String {
    let mut lines = vec![trace_header(trace)];
    lines.extend(trace.steps.iter().enumerate().map(|(k, step)| step_line(k, step)));
    let final_point = trace.iterates().pop().expect("iterates include the start");
    lines.push(record_line(&TraceRecord::Footer(FooterRecord {
        final_point,
        length: trace.len(),
        budget: trace.budget(),
    })));
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

fn parse_err(line: usize, message: impl std::fmt::Display) -> Error {
    Error::Parse(format!("trace line {}: {message}", line + 1))
}

fn check_len(line: usize, what: &str, v: &RationalVector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(parse_err(line, format!("{what} has {} entries, expected {n}", v.len())));
    }
    Ok(())
}

/// Parses a trace file recorded on `instance`.
pub fn parse_trace(text: &str, instance: &PolyhedronInstance) -> Result<WalkTrace> {
    let records = text
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(k, line)| serde_json::from_str::<TraceRecord>(line).map(|r| (k, r)).map_err(|e| parse_err(k, e)))
        .collect::<Result<Vec<_>>>()?;
    let Some(((header_line, TraceRecord::Header(header)), rest)) = records.split_first() else {
        return Err(Error::Parse("trace file must start with a header record".into()));
    };
    let Some(((footer_line, TraceRecord::Footer(footer)), step_records)) = rest.split_last() else {
        return Err(Error::Parse("trace file must end with a footer record".into()));
    };
    let (header_line, footer_line) = (*header_line, *footer_line);
    if header.instance_digest != instance_digest(instance) {
        return Err(parse_err(header_line, "instance digest does not match the instance"));
    }
    let n = instance.n();
    if header.m != instance.m() || header.n != n {
        return Err(parse_err(header_line, format!("dimensions {} × {} do not match the instance", header.m, header.n)));
    }
    let constants = AlgorithmConstants::experimental(header.m, header.tau.clone(), header.lambda.clone())
        .map_err(|e| parse_err(header_line, e))?;
    if constants.certified != header.certified {
        return Err(parse_err(header_line, "certified flag disagrees with tau and lambda"));
    }
    let mode = WalkMode::parse(&header.mode).map_err(|e| parse_err(header_line, e))?;
    check_len(header_line, "start", &header.start, n)?;
    check_len(header_line, "target", &header.target, n)?;
    if let Some(c) = &header.objective {
        check_len(header_line, "objective", c, n)?;
    }

    let mut steps = Vec::with_capacity(step_records.len());
    for (k, (line, record)) in step_records.iter().enumerate() {
        let TraceRecord::Step(record) = record else {
            return Err(parse_err(*line, "expected a step record"));
        };
        if record.index != k {
            return Err(parse_err(*line, format!("step index {} out of order, expected {k}", record.index)));
        }
        check_len(*line, "direction", &record.direction, n)?;
        if record.blocking_index >= n {
            return Err(parse_err(*line, format!("blocking index {} out of range", record.blocking_index)));
        }
        let elimination = match &record.elimination {
            None => None,
            Some(e) => {
                check_len(*line, "y", &e.y, n)?;
                check_len(*line, "z", &e.z, n)?;
                Some(EliminationData { q: e.q, rho: e.rho.clone(), y: e.y.clone(), z: e.z.clone() })
            }
        };
        steps.push(WalkStep {
            kind: StepKind::parse(&record.kind).map_err(|e| parse_err(*line, e))?,
            direction: record.direction.clone(),
            step_length: record.alpha.clone(),
            blocking_index: record.blocking_index,
            trapped_before: record.trapped_before.clone(),
            trapped_after: record.trapped_after.clone(),
            decomposition_size: record.decomposition_size,
            chosen_term: record.chosen_term,
            elimination,
        });
    }
    let trace = WalkTrace {
        instance: instance.clone(),
        start: header.start.clone(),
        target: VertexWithBasis { point: header.target.clone(), basis: header.basis.clone() },
        steps,
        constants,
        mode,
        objective: header.objective.clone(),
    };
    if footer.length != trace.len() {
        return Err(parse_err(footer_line, format!("footer length {} but {} step records", footer.length, trace.len())));
    }
    if footer.budget != trace.budget() {
        return Err(parse_err(footer_line, format!("footer budget {} but the mode allows {}", footer.budget, trace.budget())));
    }
    Ok(trace)
}
