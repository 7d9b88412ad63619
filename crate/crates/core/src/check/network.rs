//! Hierarchy flattening, the instantaneous-dependency graph and the
//! causality rules built on it.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::model::ast::{BehaviorDef, Causality, Model, Pos};
use crate::model::ir::{Behavior, CompId, Component, InstId, Instance, Network, PortRef, Source};

use super::graph::cycles;
use super::report::{Category, Finding, Severity};

struct Node {
    comp: CompId,
    path: String,
    parent: Option<(usize, u32)>,
    children: Vec<usize>,
    leaf: Option<InstId>,
    pos: Pos,
}

struct Tree<'a> {
    comps: &'a [Component],
    nodes: Vec<Node>,
}

impl Tree<'_> {
    fn build<'a>(model: &Model, comps: &'a [Component], root: CompId) -> Tree<'a> {
        let mut t = Tree {
            comps,
            nodes: Vec::new(),
        };
        let root_comp = &comps[root as usize];
        let path = if root_comp.is_atomic() {
            root_comp.name.clone()
        } else {
            String::new()
        };
        let pos = model.component(&root_comp.name).map(|c| c.pos).unwrap_or_default();
        t.add(model, root, path, None, pos);
        let mut next = 0;
        for n in &mut t.nodes {
            if comps[n.comp as usize].is_atomic() {
                n.leaf = Some(next);
                next += 1;
            }
        }
        t
    }

    fn add(&mut self, model: &Model, comp: CompId, path: String, parent: Option<(usize, u32)>, pos: Pos) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            comp,
            path: path.clone(),
            parent,
            children: Vec::new(),
            leaf: None,
            pos,
        });
        let c = &self.comps[comp as usize];
        if let Behavior::Composite(cd) = &c.behavior {
            let decls = match model.component(&c.name).map(|d| &d.behavior) {
                Some(BehaviorDef::Composite(d)) => Some(d),
                _ => None,
            };
            for (si, s) in cd.subs.iter().enumerate() {
                let child_path = if path.is_empty() {
                    s.name.clone()
                } else {
                    format!("{path}.{}", s.name)
                };
                let spos = decls
                    .and_then(|d| d.subs.iter().find(|x| x.name == s.name))
                    .map(|x| x.pos)
                    .unwrap_or_default();
                let child = self.add(model, s.comp, child_path, Some((id, si as u32)), spos);
                self.nodes[id].children.push(child);
            }
        }
        id
    }

    fn input_source(&self, node: usize, port: u32) -> Source {
        let Some((parent, si)) = self.nodes[node].parent else {
            return Source::RootInput(port);
        };
        let Behavior::Composite(cd) = &self.comps[self.nodes[parent].comp as usize].behavior else {
            unreachable!("parent is composite")
        };
        let target = PortRef {
            sub: Some(si),
            port,
        };
        match cd.channels.iter().chain(&cd.delegations).find(|l| l.to == target) {
            Some(l) => match l.from.sub {
                Some(s) => self.output_source(self.nodes[parent].children[s as usize], l.from.port),
                None => self.input_source(parent, l.from.port),
            },
            None => Source::Unconnected,
        }
    }

    fn output_source(&self, node: usize, port: u32) -> Source {
        let n = &self.nodes[node];
        if let Some(inst) = n.leaf {
            return Source::Output { inst, port };
        }
        let Behavior::Composite(cd) = &self.comps[n.comp as usize].behavior else {
            unreachable!("non-leaf is composite")
        };
        let target = PortRef { sub: None, port };
        match cd.delegations.iter().find(|l| l.to == target) {
            Some(l) => match l.from.sub {
                Some(s) => self.output_source(n.children[s as usize], l.from.port),
                None => Source::Unconnected,
            },
            None => Source::Unconnected,
        }
    }
}

/// Flattened network plus the positions of each instance declaration.
pub(crate) struct Flat {
    pub network: Network,
    pub positions: Vec<Pos>,
}

/// Instantaneous-dependency edges: producer -> consumer for every channel
/// leaving a weakly causal producer.
pub fn instantaneous_edges(comps: &[Component], instances: &[Instance]) -> Vec<Vec<usize>> {
    let mut edges = vec![Vec::new(); instances.len()];
    for (consumer, inst) in instances.iter().enumerate() {
        for src in &inst.inputs {
            if let Source::Output { inst: producer, .. } = *src {
                let pc = &comps[instances[producer as usize].comp as usize];
                if pc.causality == Causality::Weak {
                    edges[producer as usize].push(consumer);
                }
            }
        }
    }
    for e in &mut edges {
        e.sort_unstable();
        e.dedup();
    }
    edges
}

/// Kahn's algorithm, always taking the smallest ready instance. Returns the
/// order and whether every instance was scheduled.
pub fn schedule(edges: &[Vec<usize>]) -> (Vec<InstId>, bool) {
    let mut indeg = vec![0usize; edges.len()];
    for succ in edges {
        for &w in succ {
            indeg[w] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..edges.len()).filter(|v| indeg[*v] == 0).map(Reverse).collect();
    let mut order = Vec::new();
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v as InstId);
        for &w in &edges[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    let complete = order.len() == edges.len();
    (order, complete)
}

pub(crate) fn flatten(model: &Model, comps: &[Component], root: CompId) -> Flat {
    let tree = Tree::build(model, comps, root);
    let mut instances = Vec::new();
    let mut positions = Vec::new();
    for (id, n) in tree.nodes.iter().enumerate() {
        if n.leaf.is_none() {
            continue;
        }
        let c = &comps[n.comp as usize];
        instances.push(Instance {
            path: n.path.clone(),
            comp: n.comp,
            inputs: (0..c.inputs.len() as u32).map(|p| tree.input_source(id, p)).collect(),
        });
        positions.push(n.pos);
    }
    let root_outputs = (0..comps[root as usize].outputs.len() as u32)
        .map(|p| tree.output_source(0, p))
        .collect();
    let edges = instantaneous_edges(comps, &instances);
    let (schedule, _) = schedule(&edges);
    Flat {
        network: Network {
            instances,
            root_outputs,
            schedule,
        },
        positions,
    }
}

pub(crate) fn causality_findings(comps: &[Component], flat: &Flat) -> Vec<Finding> {
    let inst = &flat.network.instances;
    let edges = instantaneous_edges(comps, inst);
    cycles(&edges)
        .into_iter()
        .map(|cyc| {
            let shown: Vec<&str> = cyc.iter().map(|&i| inst[i].path.as_str()).collect();
            Finding {
                severity: Severity::Error,
                code: "WeaklyCausalCycle",
                path: inst[cyc[0]].path.clone(),
                pos: flat.positions[cyc[0]],
                message: format!("feedback loop without a strongly causal component: {}", shown.join(" -> ")),
                category: Category::Causality,
            }
        })
        .collect()
}

/// For each component definition, which inputs reach which outputs within
/// one tick (`dep[c][input][output]`).
pub fn instantaneous_dependencies(comps: &[Component], order: &[CompId]) -> Vec<Vec<Vec<bool>>> {
    let mut dep: Vec<Vec<Vec<bool>>> = vec![Vec::new(); comps.len()];
    for &c in order {
        let comp = &comps[c as usize];
        let (ni, no) = (comp.inputs.len(), comp.outputs.len());
        dep[c as usize] = match &comp.behavior {
            Behavior::Automaton(_) | Behavior::Table(..) => {
                vec![vec![comp.causality == Causality::Weak; no]; ni]
            }
            Behavior::Composite(cd) => {
                let mut m = vec![vec![false; no]; ni];
                for (p, row) in m.iter_mut().enumerate() {
                    // (sub, port, is_output); sub None is the composite itself
                    let mut seen: Vec<(Option<u32>, u32, bool)> = Vec::new();
                    let mut queue = VecDeque::from([(None, p as u32, false)]);
                    while let Some(node) = queue.pop_front() {
                        if seen.contains(&node) {
                            continue;
                        }
                        seen.push(node);
                        let (sub, port, is_out) = node;
                        match (sub, is_out) {
                            (None, true) => row[port as usize] = true,
                            (Some(s), false) => {
                                let sc = cd.subs[s as usize].comp as usize;
                                for (o, reach) in dep[sc][port as usize].iter().enumerate() {
                                    if *reach {
                                        queue.push_back((Some(s), o as u32, true));
                                    }
                                }
                            }
                            _ => {
                                let from = PortRef { sub, port };
                                for l in cd.channels.iter().chain(&cd.delegations) {
                                    if l.from == from {
                                        queue.push_back((l.to.sub, l.to.port, l.to.sub.is_none()));
                                    }
                                }
                            }
                        }
                    }
                }
                m
            }
        };
    }
    dep
}

pub(crate) fn composite_findings(model: &Model, comps: &[Component], order: &[CompId]) -> Vec<Finding> {
    let dep = instantaneous_dependencies(comps, order);
    let mut out = Vec::new();
    for &c in order {
        let comp = &comps[c as usize];
        if comp.is_atomic() {
            continue;
        }
        let pos = model.component(&comp.name).map(|d| d.pos).unwrap_or_default();
        let d = &dep[c as usize];
        let path = d.iter().enumerate().find_map(|(i, row)| row.iter().position(|x| *x).map(|o| (i, o)));
        match (comp.causality, path) {
            (Causality::Strong, Some((i, o))) => out.push(Finding {
                severity: Severity::Error,
                code: "CausalityOverclaim",
                path: comp.name.clone(),
                pos,
                message: format!(
                    "declared strong, but input `{}` reaches output `{}` within the same tick",
                    comp.inputs[i].name, comp.outputs[o].name
                ),
                category: Category::CompositeCausality,
            }),
            (Causality::Weak, None) if !comp.inputs.is_empty() && !comp.outputs.is_empty() => out.push(Finding {
                severity: Severity::Warning,
                code: "CausalityUnderclaim",
                path: comp.name.clone(),
                pos,
                message: "declared weak, but no input reaches an output within the same tick".into(),
                category: Category::CompositeCausality,
            }),
            _ => {}
        }
    }
    out
}
