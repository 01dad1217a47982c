//! Construction schedules for graph states and their symbolic execution.
//!
//! A schedule is a flat list of instructions: create an entangled pair, apply
//! a PBS gate, apply a Hadamard, or measure a qubit. Measurements only mark
//! when a qubit stops being needed; the tableau keeps the full state.
//!
//! Reachability by joins: the last inter-graph PBS gate of any construction
//! leaves `i2` as a leaf of `i1`, and `i1` holds the union of both former
//! neighborhoods. Reading this backwards, a tree is buildable from pairs iff
//! it has even order and some leaf `i2` (with support `i1`) admits a split of
//! `i1`'s other branches into two groups, each containing an odd number of
//! odd-order branches, such that `i1` plus the first group and `i2` plus the
//! second group are both buildable.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    apply_pbs_gate, graph_to_stabilizers, stabilizers_to_graph, GateKind, Graph, NotInGraphForm,
    PbsGateRecord,
};
use crate::pauli::{PauliString, StabilizerGroup};

/// Largest target the exhaustive search accepts.
pub const MAX_SEARCH_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("qubit {0} is created twice")]
    DuplicateQubit(usize),
    #[error("qubit {0} is used before it is created")]
    UnknownQubit(usize),
    #[error("qubit {0} is used after it was measured")]
    MeasuredQubit(usize),
    #[error("instruction uses qubit {0} twice")]
    SameQubit(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("target is not a tree")]
    NotATree,
    #[error("protocol needs at least one level")]
    NoLevels,
    #[error("target has {got} vertices; the search is capped at {cap}")]
    TooLarge { got: usize, cap: usize },
    #[error("target must have an even number of vertices, got {0}")]
    OddOrder(usize),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    CreatePair(usize, usize),
    /// PBS gate; the Hadamard lands on the second qubit.
    PbsGate(usize, usize),
    Hadamard(usize),
    Measure(usize),
}

impl Instruction {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Instruction::CreatePair(a, b) | Instruction::PbsGate(a, b) => vec![a, b],
            Instruction::Hadamard(q) | Instruction::Measure(q) => vec![q],
        }
    }

    fn is_operation(&self) -> bool {
        matches!(self, Instruction::PbsGate(..) | Instruction::Hadamard(_))
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::CreatePair(a, b) => write!(f, "PAIR {a} {b}"),
            Instruction::PbsGate(a, b) => write!(f, "PBS {a} {b}"),
            Instruction::Hadamard(q) => write!(f, "H {q}"),
            Instruction::Measure(q) => write!(f, "MEASURE {q}"),
        }
    }
}

/// Instruction list plus optional description of what it builds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    instructions: Vec<Instruction>,
    target: Option<Graph>,
    levels: Option<usize>,
}

impl Schedule {
    /// Checks that pairs use fresh ids and every other instruction touches
    /// created, unmeasured qubits.
    pub fn new(instructions: Vec<Instruction>) -> Result<Self, ScheduleError> {
        let mut live = HashSet::new();
        let mut measured = HashSet::new();
        for ins in &instructions {
            let qs = ins.qubits();
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(ScheduleError::SameQubit(qs[0]));
            }
            match *ins {
                Instruction::CreatePair(a, b) => {
                    for q in [a, b] {
                        if live.contains(&q) || measured.contains(&q) {
                            return Err(ScheduleError::DuplicateQubit(q));
                        }
                        live.insert(q);
                    }
                }
                _ => {
                    for &q in &qs {
                        if measured.contains(&q) {
                            return Err(ScheduleError::MeasuredQubit(q));
                        }
                        if !live.contains(&q) {
                            return Err(ScheduleError::UnknownQubit(q));
                        }
                    }
                    if let Instruction::Measure(q) = *ins {
                        live.remove(&q);
                        measured.insert(q);
                    }
                }
            }
        }
        Ok(Self {
            instructions,
            target: None,
            levels: None,
        })
    }

    pub fn with_target(mut self, target: Graph) -> Self {
        self.target = Some(target);
        self
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn target(&self) -> Option<&Graph> {
        self.target.as_ref()
    }

    /// Connection levels, for schedules made by [`plan_tree_protocol`].
    pub fn levels(&self) -> Option<usize> {
        self.levels
    }

    /// Every created qubit id, ascending. Tableau qubit `k` is the `k`-th id.
    pub fn qubit_ids(&self) -> Result<Vec<usize>, ScheduleError> {
        let mut ids = BTreeSet::new();
        for ins in &self.instructions {
            if let Instruction::CreatePair(a, b) = *ins {
                ids.insert(a);
                ids.insert(b);
            }
        }
        Ok(ids.into_iter().collect())
    }

    pub fn count(&self, pred: impl Fn(&Instruction) -> bool) -> usize {
        self.instructions.iter().filter(|i| pred(i)).count()
    }

    pub fn gate_count(&self) -> usize {
        self.count(|i| matches!(i, Instruction::PbsGate(..)))
    }

    pub fn pair_count(&self) -> usize {
        self.count(|i| matches!(i, Instruction::CreatePair(..)))
    }

    /// Parses the text form: `PAIR a b`, `PBS i1 i2`, `H q`, `MEASURE q`,
    /// one per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ScheduleError> {
        let mut instructions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ScheduleError::Parse {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let args = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<usize>()
                        .map_err(|e| err(format!("bad qubit id `{f}`: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let arity = |k: usize| {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(err(format!("`{}` takes {k} qubit ids", fields[0])))
                }
            };
            let ins = match fields[0].to_ascii_uppercase().as_str() {
                "PAIR" => {
                    arity(2)?;
                    Instruction::CreatePair(args[0], args[1])
                }
                "PBS" => {
                    arity(2)?;
                    Instruction::PbsGate(args[0], args[1])
                }
                "H" => {
                    arity(1)?;
                    Instruction::Hadamard(args[0])
                }
                "MEASURE" => {
                    arity(1)?;
                    Instruction::Measure(args[0])
                }
                other => return Err(err(format!("unknown instruction `{other}`"))),
            };
            instructions.push(ins);
        }
        Self::new(instructions).map_err(|e| match e {
            ScheduleError::Parse { .. } => e,
            other => ScheduleError::Parse {
                line: 0,
                message: other.to_string(),
            },
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(levels) = self.levels {
            out.push_str(&format!("# tree protocol, {levels} connection level(s)\n"));
        }
        for ins in &self.instructions {
            out.push_str(&ins.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_json_doc(&self) -> ScheduleDoc {
        ScheduleDoc {
            instructions: self
                .instructions
                .iter()
                .map(|ins| {
                    let (op, qubits) = match *ins {
                        Instruction::CreatePair(a, b) => ("PAIR", vec![a, b]),
                        Instruction::PbsGate(a, b) => ("PBS", vec![a, b]),
                        Instruction::Hadamard(q) => ("H", vec![q]),
                        Instruction::Measure(q) => ("MEASURE", vec![q]),
                    };
                    InstructionDoc {
                        op: op.to_string(),
                        qubits,
                    }
                })
                .collect(),
            target_edges: self.target.as_ref().map(Graph::edges),
            target_vertices: self.target.as_ref().map(Graph::vertex_count),
            levels: self.levels,
        }
    }

    pub fn from_json_doc(doc: &ScheduleDoc) -> Result<Self, ScheduleError> {
        let text: String = doc
            .instructions
            .iter()
            .map(|i| {
                let ids: Vec<String> = i.qubits.iter().map(usize::to_string).collect();
                format!("{} {}\n", i.op, ids.join(" "))
            })
            .collect();
        let mut s = Self::parse(&text)?;
        if let (Some(n), Some(edges)) = (doc.target_vertices, &doc.target_edges) {
            let target = Graph::from_edges(n, edges).map_err(|e| ScheduleError::Parse {
                line: 0,
                message: e.to_string(),
            })?;
            s.target = Some(target);
        }
        s.levels = doc.levels;
        Ok(s)
    }
}

/// JSON mirror of a schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub instructions: Vec<InstructionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionDoc {
    pub op: String,
    pub qubits: Vec<usize>,
}

/// Outcome of running a schedule on the stabilizer tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    /// Product of the per-gate postselection probabilities.
    pub probability: f64,
    /// Final state; `None` when some gate had probability zero.
    pub group: Option<StabilizerGroup>,
    /// Graph over tableau qubits, when the final state is in graph form.
    pub graph: Result<Graph, NotInGraphForm>,
    /// Schedule qubit id of each tableau qubit.
    pub qubit_ids: Vec<usize>,
    pub gates: Vec<PbsGateRecord>,
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Runs a schedule on an initially empty register. Qubits that are never
/// paired stay in `|+>`, i.e. isolated vertices.
pub fn execute_schedule(schedule: &Schedule) -> Result<Execution, ScheduleError> {
    let ids = schedule.qubit_ids()?;
    let n = ids.len();
    if n == 0 {
        return Ok(Execution {
            probability: 1.0,
            group: Some(StabilizerGroup::empty()),
            graph: Ok(Graph::new(0)),
            qubit_ids: ids,
            gates: Vec::new(),
        });
    }
    let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut generators = StabilizerGroup::plus_state(n)
        .expect("n >= 1")
        .generators()
        .to_vec();
    let mut group: Option<StabilizerGroup> = None;
    let mut parent: Vec<usize> = (0..n).collect();
    let mut probability = 1.0;
    let mut gates = Vec::new();
    for ins in schedule.instructions() {
        match *ins {
            Instruction::CreatePair(a, b) => {
                let (pa, pb) = (index[&a], index[&b]);
                // Fresh qubits still carry their |+> generators X_pa and X_pb.
                if let Some(g) = group.take() {
                    generators = g.generators().to_vec();
                }
                generators[pa] = PauliString::from_support(n, &[pa], &[pb]).expect("in range");
                generators[pb] = PauliString::from_support(n, &[pb], &[pa]).expect("in range");
                group = Some(StabilizerGroup::from_generators_unchecked(
                    generators.clone(),
                ));
                let (ra, rb) = (find(&mut parent, pa), find(&mut parent, pb));
                parent[ra] = rb;
            }
            Instruction::PbsGate(i1, i2) => {
                let (p1, p2) = (index[&i1], index[&i2]);
                let (r1, r2) = (find(&mut parent, p1), find(&mut parent, p2));
                let kind = if r1 == r2 {
                    GateKind::IntraGraph
                } else {
                    GateKind::InterGraph
                };
                parent[r1] = r2;
                gates.push(
                    PbsGateRecord::new(p1, p2, kind).map_err(|_| ScheduleError::SameQubit(i1))?,
                );
                let current = group
                    .take()
                    .expect("gates only touch created qubits, so a pair exists");
                let out = apply_pbs_gate(&current, p1, p2).expect("indices validated");
                probability *= out.probability();
                match out.into_group() {
                    Some(g) => group = Some(g),
                    None => {
                        return Ok(Execution {
                            probability: 0.0,
                            group: None,
                            graph: Err(NotInGraphForm),
                            qubit_ids: ids,
                            gates,
                        })
                    }
                }
            }
            Instruction::Hadamard(q) => {
                let current = group.take().expect("created qubit");
                group = Some(current.apply_hadamard(index[&q]).expect("index validated"));
            }
            Instruction::Measure(_) => {}
        }
    }
    let group = group.unwrap_or_else(|| StabilizerGroup::from_generators_unchecked(generators));
    let graph = stabilizers_to_graph(&group);
    Ok(Execution {
        probability,
        group: Some(group),
        graph,
        qubit_ids: ids,
        gates,
    })
}

/// Schedule of the measure-early tree protocol with `levels` rounds of
/// connections, producing a tree on `2^(levels+1)` qubits numbered from 1.
///
/// Outer qubits of the base pairs are measured before the first connection;
/// after each connection `PBS c_left c_right` the left connection qubit is
/// measured and `c_right` is carried to the next round. The last connection
/// qubit is measured at the end.
pub fn plan_tree_protocol(levels: usize) -> Result<Schedule, PlanError> {
    if levels == 0 {
        return Err(PlanError::NoLevels);
    }
    let mut next = 1;
    let (mut instructions, last) = protocol_segment(levels, &mut next);
    instructions.push(Instruction::Measure(last));
    let mut s = Schedule::new(instructions)?;
    s.levels = Some(levels);
    Ok(s)
}

fn protocol_segment(level: usize, next: &mut usize) -> (Vec<Instruction>, usize) {
    use Instruction::*;
    if level == 1 {
        let (a, b, c, d) = (*next, *next + 1, *next + 2, *next + 3);
        *next += 4;
        return (
            vec![
                CreatePair(a, b),
                CreatePair(c, d),
                Measure(a),
                Measure(d),
                PbsGate(b, c),
                Measure(b),
            ],
            c,
        );
    }
    let (mut left, cl) = protocol_segment(level - 1, next);
    let (right, cr) = protocol_segment(level - 1, next);
    left.extend(right);
    left.push(PbsGate(cl, cr));
    left.push(Measure(cl));
    (left, cr)
}

/// Every measured qubit is measured before any further gate or Hadamard
/// follows its last use, and every qubit is eventually measured.
pub fn is_measure_early(schedule: &Schedule) -> bool {
    let ins = schedule.instructions();
    let mut measured = HashSet::new();
    for (k, m) in ins.iter().enumerate() {
        let Instruction::Measure(q) = *m else {
            continue;
        };
        measured.insert(q);
        let last = ins[..k]
            .iter()
            .rposition(|i| i.qubits().contains(&q))
            .expect("measured qubits were created");
        if ins[last + 1..k].iter().any(Instruction::is_operation) {
            return false;
        }
    }
    schedule
        .qubit_ids()
        .map(|ids| ids.iter().all(|q| measured.contains(q)))
        .unwrap_or(false)
}

/// Result of the exact join-reachability decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JoinPlan {
    Reachable(Schedule),
    UnreachableByJoins,
}

type Tree = BTreeMap<usize, BTreeSet<usize>>;

fn tree_from_graph(g: &Graph) -> Tree {
    (0..g.vertex_count())
        .map(|v| (v, g.neighbors(v).clone()))
        .collect()
}

/// Isomorphism-invariant encoding of an unlabeled tree (AHU codes rooted at
/// the center, minimum over two centers).
fn tree_code(t: &Tree) -> String {
    if t.len() <= 2 {
        return format!("K{}", t.len());
    }
    let mut degree: BTreeMap<usize, usize> = t.iter().map(|(&v, n)| (v, n.len())).collect();
    let mut layer: Vec<usize> = degree
        .iter()
        .filter(|(_, &d)| d <= 1)
        .map(|(&v, _)| v)
        .collect();
    let mut remaining = t.len();
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            degree.insert(v, 0);
            for w in &t[&v] {
                let d = degree.get_mut(w).expect("vertex");
                if *d > 0 {
                    *d -= 1;
                    if *d == 1 {
                        next.push(*w);
                    }
                }
            }
        }
        layer = next;
    }
    fn encode(t: &Tree, v: usize, parent: Option<usize>) -> String {
        let mut kids: Vec<String> = t[&v]
            .iter()
            .filter(|&&w| Some(w) != parent)
            .map(|&w| encode(t, w, Some(v)))
            .collect();
        kids.sort();
        format!("({})", kids.concat())
    }
    layer
        .iter()
        .map(|&c| encode(t, c, None))
        .min()
        .expect("a center exists")
}

/// Canonical code of an unlabeled tree given as a graph; equal codes mean
/// isomorphic trees.
pub fn canonical_tree_code(g: &Graph) -> Result<String, PlanError> {
    if !g.is_tree() {
        return Err(PlanError::NotATree);
    }
    Ok(tree_code(&tree_from_graph(g)))
}

/// Branches hanging off `root` once `root` is removed, excluding the one
/// through `skip`, as vertex sets keyed by their neighbor of `root`.
fn branches(t: &Tree, root: usize, skip: usize) -> Vec<(usize, BTreeSet<usize>)> {
    t[&root]
        .iter()
        .filter(|&&r| r != skip)
        .map(|&r| {
            let mut seen = BTreeSet::from([root, r]);
            let mut stack = vec![r];
            while let Some(v) = stack.pop() {
                for &w in &t[&v] {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            seen.remove(&root);
            (r, seen)
        })
        .collect()
}

/// `root` attached to the given branches of `t`.
fn graft(t: &Tree, root: usize, parts: &[&(usize, BTreeSet<usize>)]) -> Tree {
    let mut out: Tree = BTreeMap::new();
    out.insert(root, BTreeSet::new());
    for (r, verts) in parts {
        for &v in verts {
            let nbrs = t[&v]
                .iter()
                .filter(|w| verts.contains(w))
                .copied()
                .collect();
            out.insert(v, nbrs);
        }
        out.get_mut(&root).expect("root").insert(*r);
        out.get_mut(r).expect("branch root").insert(root);
    }
    out
}

struct Decomposition {
    i1: usize,
    i2: usize,
    left: Tree,
    right: Tree,
}

fn decompositions(t: &Tree) -> Vec<Decomposition> {
    let mut out = Vec::new();
    for (&i2, nbrs) in t {
        if nbrs.len() != 1 {
            continue;
        }
        let i1 = *nbrs.iter().next().expect("leaf has a neighbor");
        let parts = branches(t, i1, i2);
        let odd: Vec<bool> = parts.iter().map(|(_, s)| s.len() % 2 == 1).collect();
        let d = parts.len();
        for mask in 1u64..(1u64 << d) {
            let in_left = |k: usize| mask >> k & 1 == 1;
            let odd_left = (0..d).filter(|&k| in_left(k) && odd[k]).count();
            let odd_right = (0..d).filter(|&k| !in_left(k) && odd[k]).count();
            if odd_left % 2 == 0 || odd_right % 2 == 0 {
                continue;
            }
            let left: Vec<_> = (0..d).filter(|&k| in_left(k)).map(|k| &parts[k]).collect();
            let right: Vec<_> = (0..d).filter(|&k| !in_left(k)).map(|k| &parts[k]).collect();
            out.push(Decomposition {
                i1,
                i2,
                left: graft(t, i1, &left),
                right: graft(t, i2, &right),
            });
        }
    }
    out
}

struct JoinPlanner {
    memo: HashMap<String, bool>,
}

impl JoinPlanner {
    fn reachable(&mut self, t: &Tree) -> bool {
        if t.len() % 2 == 1 {
            return false;
        }
        if t.len() == 2 {
            return true;
        }
        let code = tree_code(t);
        if let Some(&v) = self.memo.get(&code) {
            return v;
        }
        let found = decompositions(t)
            .iter()
            .any(|d| self.reachable(&d.left) && self.reachable(&d.right));
        self.memo.insert(code, found);
        found
    }

    fn build(&mut self, t: &Tree, out: &mut Vec<Instruction>) {
        if t.len() == 2 {
            let mut it = t.keys();
            let (a, b) = (*it.next().expect("two"), *it.next().expect("two"));
            out.push(Instruction::CreatePair(a, b));
            return;
        }
        let d = decompositions(t)
            .into_iter()
            .find(|d| self.reachable(&d.left) && self.reachable(&d.right))
            .expect("build is only called on reachable trees");
        self.build(&d.left, out);
        self.build(&d.right, out);
        out.push(Instruction::PbsGate(d.i1, d.i2));
    }
}

/// Decides whether `target` can be built from pairs with inter-graph PBS
/// gates alone and, if so, returns a schedule that builds it exactly.
pub fn plan_join_sequence(target: &Graph) -> Result<JoinPlan, PlanError> {
    if !target.is_tree() {
        return Err(PlanError::NotATree);
    }
    if target.vertex_count() % 2 == 1 {
        return Ok(JoinPlan::UnreachableByJoins);
    }
    let t = tree_from_graph(target);
    let mut planner = JoinPlanner {
        memo: HashMap::new(),
    };
    if !planner.reachable(&t) {
        return Ok(JoinPlan::UnreachableByJoins);
    }
    let mut instructions = Vec::new();
    planner.build(&t, &mut instructions);
    Ok(JoinPlan::Reachable(
        Schedule::new(instructions)?.with_target(target.clone()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_qubits: usize,
    pub allow_intra: bool,
    pub allow_hadamard: bool,
    /// Depth limit counted in PBS gates plus Hadamards.
    pub max_ops: usize,
}

impl SearchOptions {
    /// Inter-graph PBS gates only, with enough depth to connect every pair.
    pub fn joins_only(vertex_count: usize) -> Self {
        Self {
            max_qubits: MAX_SEARCH_QUBITS,
            allow_intra: false,
            allow_hadamard: false,
            max_ops: (vertex_count / 2).saturating_sub(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Schedule),
    NotFound { explored: usize },
}

fn perfect_matchings(vertices: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if vertices.is_empty() {
        return vec![Vec::new()];
    }
    let first = vertices[0];
    let mut out = Vec::new();
    for k in 1..vertices.len() {
        let rest: Vec<usize> = vertices[1..]
            .iter()
            .enumerate()
            .filter(|&(j, _)| j + 1 != k)
            .map(|(_, &v)| v)
            .collect();
        for mut m in perfect_matchings(&rest) {
            m.insert(0, (first, vertices[k]));
            out.push(m);
        }
    }
    out
}

#[derive(Clone)]
struct SearchNode {
    group: StabilizerGroup,
    components: Vec<usize>,
    ops: Vec<Instruction>,
    pairs: usize,
}

fn normalize_components(c: &[usize]) -> Vec<usize> {
    let mut relabel = HashMap::new();
    c.iter()
        .map(|x| {
            let k = relabel.len();
            *relabel.entry(*x).or_insert(k)
        })
        .collect()
}

/// Breadth-first search over pair matchings followed by PBS gates (and
/// optionally Hadamards), executed on the tableau. Returns the first
/// schedule, in deterministic order, of minimal depth whose final state
/// equals the target graph state.
pub fn brute_force_schedule_search(
    target: &Graph,
    options: SearchOptions,
) -> Result<SearchOutcome, PlanError> {
    let n = target.vertex_count();
    let cap = options.max_qubits.min(MAX_SEARCH_QUBITS);
    if n > cap {
        return Err(PlanError::TooLarge { got: n, cap });
    }
    if n % 2 == 1 {
        return Err(PlanError::OddOrder(n));
    }
    let goal = graph_to_stabilizers(target).canonical_form();
    let vertices: Vec<usize> = (0..n).collect();
    let matchings = perfect_matchings(&vertices);
    let mut explored = 0;
    let mut seen: HashSet<(StabilizerGroup, Vec<usize>)> = HashSet::new();
    let mut layer = Vec::new();
    for (idx, m) in matchings.iter().enumerate() {
        let g = Graph::from_edges(n, m).expect("matching edges are valid");
        let mut components = vec![0; n];
        for (k, &(a, b)) in m.iter().enumerate() {
            components[a] = k;
            components[b] = k;
        }
        layer.push(SearchNode {
            group: graph_to_stabilizers(&g),
            components,
            ops: Vec::new(),
            pairs: idx,
        });
    }

    let finish = |node: &SearchNode| -> Result<SearchOutcome, PlanError> {
        let mut instructions: Vec<Instruction> = matchings[node.pairs]
            .iter()
            .map(|&(a, b)| Instruction::CreatePair(a, b))
            .collect();
        instructions.extend(node.ops.iter().copied());
        Ok(SearchOutcome::Found(
            Schedule::new(instructions)?.with_target(target.clone()),
        ))
    };

    for depth in 0..=options.max_ops {
        let mut next = Vec::new();
        for node in &layer {
            explored += 1;
            let canon = node.group.canonical_form();
            if canon == goal {
                return finish(node);
            }
            let key_components = if options.allow_intra {
                Vec::new()
            } else {
                normalize_components(&node.components)
            };
            if !seen.insert((canon, key_components)) || depth == options.max_ops {
                continue;
            }
            for i1 in 0..n {
                for i2 in 0..n {
                    if i1 == i2 {
                        continue;
                    }
                    let same = node.components[i1] == node.components[i2];
                    if same && !options.allow_intra {
                        continue;
                    }
                    let out = apply_pbs_gate(&node.group, i1, i2).expect("valid qubits");
                    let Some(group) = out.into_group() else {
                        continue;
                    };
                    let (from, to) = (node.components[i1], node.components[i2]);
                    let components = node
                        .components
                        .iter()
                        .map(|&c| if c == from { to } else { c })
                        .collect();
                    let mut ops = node.ops.clone();
                    ops.push(Instruction::PbsGate(i1, i2));
                    next.push(SearchNode {
                        group,
                        components,
                        ops,
                        pairs: node.pairs,
                    });
                }
            }
            if options.allow_hadamard {
                for q in 0..n {
                    let mut ops = node.ops.clone();
                    ops.push(Instruction::Hadamard(q));
                    next.push(SearchNode {
                        group: node.group.apply_hadamard(q).expect("valid qubit"),
                        components: node.components.clone(),
                        ops,
                        pairs: node.pairs,
                    });
                }
            }
        }
        layer = next;
    }
    Ok(SearchOutcome::NotFound { explored })
}
