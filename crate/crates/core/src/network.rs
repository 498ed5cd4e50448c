//! Finite flux networks: directed pipe graphs with optional diffuse boundary
//! cells, conservation checks, composition, and energy evaluation.

use std::collections::HashMap;

use serde::Serialize;

use crate::cell::{wasserstein_cell_energy, CellKind, CellSpec};
use crate::cost::{bt_edge_cost, up_edge_cost};
use crate::error::{Error, Result};
use crate::params::{Model, ModelParams};
use crate::report::EnergyReport;

/// Relative tolerance for flux conservation and glued masses.
pub const FLUX_REL_TOL: f64 = 1e-12;
/// Absolute tolerance for glued node positions.
pub const GLUE_POS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipeEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub flux: f64,
}

/// How a diffuse cell meets the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiffuseRole {
    /// Mass leaves the node and spreads onto the face above it (sink side);
    /// the node sits at the cell base.
    Spread,
    /// Mass enters the node from the face below it (source side); the node
    /// sits at the top of the cell box.
    Gather,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffuseEdge {
    pub node: NodeId,
    pub cell: CellSpec,
    pub role: DiffuseRole,
}

/// A directed acyclic transport graph. Flux moves in the direction of
/// non-decreasing `x_n`; diffuse edges are terminal Wasserstein cells.
#[derive(Debug, Clone, Default)]
pub struct FluxNetwork {
    dim: usize,
    coords: Vec<f64>,
    pub pipes: Vec<PipeEdge>,
    pub diffuse: Vec<DiffuseEdge>,
    pub sources: Vec<(NodeId, f64)>,
    pub sinks: Vec<(NodeId, f64)>,
}

impl FluxNetwork {
    pub fn new(dim: usize) -> Self {
        FluxNetwork {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn add_node(&mut self, position: &[f64]) -> NodeId {
        debug_assert_eq!(position.len(), self.dim);
        let id = self.node_count();
        self.coords.extend_from_slice(position);
        NodeId(id)
    }

    pub fn position(&self, id: NodeId) -> &[f64] {
        &self.coords[id.0 * self.dim..(id.0 + 1) * self.dim]
    }

    /// Height (last coordinate) of a node.
    pub fn height(&self, id: NodeId) -> f64 {
        self.coords[(id.0 + 1) * self.dim - 1]
    }

    pub fn add_pipe(&mut self, from: NodeId, to: NodeId, flux: f64) {
        debug_assert!(flux > 0.0);
        self.pipes.push(PipeEdge { from, to, flux });
    }

    pub fn add_diffuse(&mut self, node: NodeId, cell: CellSpec, role: DiffuseRole) {
        debug_assert_eq!(cell.dim(), self.dim);
        self.diffuse.push(DiffuseEdge { node, cell, role });
    }

    pub fn mark_source(&mut self, node: NodeId, mass: f64) {
        debug_assert!(mass > 0.0);
        self.sources.push((node, mass));
    }

    pub fn mark_sink(&mut self, node: NodeId, mass: f64) {
        debug_assert!(mass > 0.0);
        self.sinks.push((node, mass));
    }

    pub fn edge_length(&self, e: &PipeEdge) -> f64 {
        let a = self.position(e.from);
        let b = self.position(e.to);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Total mass entering the network: source marks plus gathering faces.
    pub fn total_source_mass(&self) -> f64 {
        let marks: f64 = self.sources.iter().map(|(_, m)| m).sum();
        let faces: f64 = self
            .diffuse
            .iter()
            .filter(|d| d.role == DiffuseRole::Gather)
            .map(|d| d.cell.total_mass())
            .sum();
        marks + faces
    }

    /// Total mass leaving the network: sink marks plus spreading faces.
    pub fn total_sink_mass(&self) -> f64 {
        let marks: f64 = self.sinks.iter().map(|(_, m)| m).sum();
        let faces: f64 = self
            .diffuse
            .iter()
            .filter(|d| d.role == DiffuseRole::Spread)
            .map(|d| d.cell.total_mass())
            .sum();
        marks + faces
    }

    /// Kirchhoff balance at every node: pipe flux in plus entering mass
    /// equals pipe flux out plus leaving mass, to `FLUX_REL_TOL` relative.
    pub fn check_conservation(&self) -> Result<()> {
        let mut inflow = vec![0.0f64; self.node_count()];
        let mut outflow = vec![0.0f64; self.node_count()];
        for e in &self.pipes {
            outflow[e.from.0] += e.flux;
            inflow[e.to.0] += e.flux;
        }
        for d in &self.diffuse {
            match d.role {
                DiffuseRole::Gather => inflow[d.node.0] += d.cell.total_mass(),
                DiffuseRole::Spread => outflow[d.node.0] += d.cell.total_mass(),
            }
        }
        for (id, m) in &self.sources {
            inflow[id.0] += m;
        }
        for (id, m) in &self.sinks {
            outflow[id.0] += m;
        }
        for i in 0..self.node_count() {
            let scale = inflow[i].max(outflow[i]);
            if scale > 0.0 && (inflow[i] - outflow[i]).abs() > FLUX_REL_TOL * scale {
                return Err(Error::Conservation {
                    node: i,
                    inflow: inflow[i],
                    outflow: outflow[i],
                });
            }
        }
        Ok(())
    }

    /// Full structural validation: positive fluxes, monotone transport
    /// direction, conservation, and matched totals.
    pub fn validate(&self) -> Result<()> {
        for e in &self.pipes {
            if !(e.flux > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "pipe {:?} -> {:?} must carry positive flux",
                    e.from, e.to
                )));
            }
            if self.height(e.to) < self.height(e.from) - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "pipe {:?} -> {:?} runs against the transport direction",
                    e.from, e.to
                )));
            }
        }
        self.check_conservation()?;
        let (src, snk) = (self.total_source_mass(), self.total_sink_mass());
        let scale = src.max(snk);
        if scale > 0.0 && (src - snk).abs() > FLUX_REL_TOL * scale {
            return Err(Error::MassMismatch(format!(
                "total source mass {src:e} vs total sink mass {snk:e}"
            )));
        }
        Ok(())
    }
}

/// Disjoint union of networks; node ids are renumbered by offset, sources and
/// sinks concatenated. The union of the empty list is the empty network.
pub fn union(nets: &[FluxNetwork]) -> Result<FluxNetwork> {
    let Some(first) = nets.first() else {
        return Ok(FluxNetwork::new(0));
    };
    let dim = first.dim;
    if nets.iter().any(|n| n.dim != dim) {
        return Err(Error::DimensionMismatch(
            "union over mixed dimensions".into(),
        ));
    }
    let mut out = FluxNetwork::new(dim);
    for net in nets {
        let offset = out.node_count();
        out.coords.extend_from_slice(&net.coords);
        let shift = |id: NodeId| NodeId(id.0 + offset);
        out.pipes.extend(net.pipes.iter().map(|e| PipeEdge {
            from: shift(e.from),
            to: shift(e.to),
            flux: e.flux,
        }));
        out.diffuse.extend(net.diffuse.iter().map(|d| DiffuseEdge {
            node: shift(d.node),
            cell: d.cell.clone(),
            role: d.role,
        }));
        out.sources
            .extend(net.sources.iter().map(|(id, m)| (shift(*id), *m)));
        out.sinks
            .extend(net.sinks.iter().map(|(id, m)| (shift(*id), *m)));
    }
    Ok(out)
}

/// Glue `second` after `first`: each pair in `gluing` joins a sink mark of
/// `first` to a source mark of `second` with matching position (to
/// `GLUE_POS_TOL`) and mass (to `FLUX_REL_TOL` relative). Pipes that end up
/// sharing both endpoints are merged with their fluxes added.
pub fn series(
    first: &FluxNetwork,
    second: &FluxNetwork,
    gluing: &[(NodeId, NodeId)],
) -> Result<FluxNetwork> {
    if first.dim != second.dim {
        return Err(Error::DimensionMismatch(
            "series over mixed dimensions".into(),
        ));
    }
    let sink_mass: HashMap<usize, f64> = first.sinks.iter().map(|(id, m)| (id.0, *m)).collect();
    let source_mass: HashMap<usize, f64> =
        second.sources.iter().map(|(id, m)| (id.0, *m)).collect();

    let mut glued_first: HashMap<usize, usize> = HashMap::new(); // first sink -> first id (identity, marks consumed)
    let mut glued_second: HashMap<usize, usize> = HashMap::new(); // second source -> first id
    for &(snk, src) in gluing {
        let Some(&m_out) = sink_mass.get(&snk.0) else {
            return Err(Error::GlueMismatch {
                first: snk.0,
                second: src.0,
                what: "first network has no sink mark at this node".into(),
            });
        };
        let Some(&m_in) = source_mass.get(&src.0) else {
            return Err(Error::GlueMismatch {
                first: snk.0,
                second: src.0,
                what: "second network has no source mark at this node".into(),
            });
        };
        let pa = first.position(snk);
        let pb = second.position(src);
        let pos_err = pa
            .iter()
            .zip(pb)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        if pos_err > GLUE_POS_TOL {
            return Err(Error::GlueMismatch {
                first: snk.0,
                second: src.0,
                what: format!("positions differ by {pos_err:e}"),
            });
        }
        let scale = m_out.max(m_in);
        if (m_out - m_in).abs() > FLUX_REL_TOL * scale {
            return Err(Error::GlueMismatch {
                first: snk.0,
                second: src.0,
                what: format!("masses differ: {m_out:e} vs {m_in:e}"),
            });
        }
        glued_first.insert(snk.0, snk.0);
        glued_second.insert(src.0, snk.0);
    }

    let mut out = FluxNetwork::new(first.dim);
    out.coords = first.coords.clone();
    out.pipes = first.pipes.clone();
    out.diffuse = first.diffuse.clone();
    out.sources = first.sources.clone();
    // Sink marks survive only where not glued.
    out.sinks = first
        .sinks
        .iter()
        .filter(|(id, _)| !glued_first.contains_key(&id.0))
        .cloned()
        .collect();

    // Map second's nodes: glued sources collapse onto first's sinks.
    let map: Vec<usize> = (0..second.node_count())
        .map(|i| match glued_second.get(&i) {
            Some(&target) => target,
            None => out.add_node(second.position(NodeId(i))).0,
        })
        .collect();
    for e in &second.pipes {
        out.pipes.push(PipeEdge {
            from: NodeId(map[e.from.0]),
            to: NodeId(map[e.to.0]),
            flux: e.flux,
        });
    }
    for d in &second.diffuse {
        out.diffuse.push(DiffuseEdge {
            node: NodeId(map[d.node.0]),
            cell: d.cell.clone(),
            role: d.role,
        });
    }
    for (id, m) in &second.sources {
        if !glued_second.contains_key(&id.0) {
            out.sources.push((NodeId(map[id.0]), *m));
        }
    }
    for (id, m) in &second.sinks {
        out.sinks.push((NodeId(map[id.0]), *m));
    }

    // Merge pipes that now share both endpoints.
    let mut merged: HashMap<(usize, usize), f64> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    for e in &out.pipes {
        let key = (e.from.0, e.to.0);
        if let Some(flux) = merged.get_mut(&key) {
            *flux += e.flux;
        } else {
            merged.insert(key, e.flux);
            order.push(key);
        }
    }
    out.pipes = order
        .into_iter()
        .map(|key| PipeEdge {
            from: NodeId(key.0),
            to: NodeId(key.1),
            flux: merged[&key],
        })
        .collect();
    Ok(out)
}

/// Sum the cost density over the graph. Pipes contribute
/// `min{a f, f + eps} * length` (urban planning) or `f^(1-eps) * length`
/// (branched transport); diffuse edges contribute the exact Wasserstein cell
/// energy. The reference is the pure vertical-transport cost of the boundary
/// data, so `excess = total - reference`.
pub fn network_energy(net: &FluxNetwork, params: &ModelParams) -> Result<EnergyReport> {
    net.check_conservation()?;
    if !net.diffuse.is_empty() && !params.model.is_urban_planning() {
        return Err(Error::ModelMismatch(
            "branched transport networks cannot carry diffuse edges".into(),
        ));
    }
    let mut total = 0.0;
    for e in &net.pipes {
        let len = net.edge_length(e);
        let cost = match params.model {
            Model::UrbanPlanning { a } => up_edge_cost(e.flux, params.epsilon, a),
            Model::BranchedTransport => bt_edge_cost(e.flux, params.epsilon),
        };
        total += cost * len;
    }
    // Identical cells appear thousands of times in instantiated plans; cache
    // the quadrature per distinct geometry.
    let mut cache: HashMap<(u64, u64, u64), f64> = HashMap::new();
    for d in &net.diffuse {
        let key = (
            d.cell.width.to_bits(),
            d.cell.height.to_bits(),
            d.cell.flux.to_bits(),
        );
        let exact = match cache.get(&key) {
            Some(v) => *v,
            None => {
                let we =
                    wasserstein_cell_energy(&d.cell, params, wasserstein_tol(&d.cell, params))?;
                cache.insert(key, we.exact);
                we.exact
            }
        };
        total += exact;
    }

    // Reference: mass-weighted height gap between what leaves and what enters.
    let mut reference = 0.0;
    for (id, m) in &net.sinks {
        reference += m * net.height(*id);
    }
    for (id, m) in &net.sources {
        reference -= m * net.height(*id);
    }
    for d in &net.diffuse {
        let mass = d.cell.total_mass();
        match d.role {
            DiffuseRole::Spread => reference += mass * (net.height(d.node) + d.cell.height),
            DiffuseRole::Gather => reference -= mass * (net.height(d.node) - d.cell.height),
        }
    }
    Ok(EnergyReport::from_total(total, reference))
}

/// Absolute quadrature tolerance giving ~1e-12 relative accuracy on a cell.
pub(crate) fn wasserstein_tol(cell: &CellSpec, params: &ModelParams) -> f64 {
    let a = params.model.a().unwrap_or(1.0);
    let scale = a * cell.total_mass() * (cell.width + cell.height).max(f64::MIN_POSITIVE);
    (1e-12 * scale).max(1e-300)
}

/// The pipe edges that survive network extraction: flux strictly above
/// `eps / (a - 1)`. Ties are excluded.
pub fn extract_network(net: &FluxNetwork, epsilon: f64, a: f64) -> Vec<usize> {
    let threshold = epsilon / (a - 1.0);
    net.pipes
        .iter()
        .enumerate()
        .filter(|(_, e)| e.flux > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// A single elementary or Wasserstein cell as a free-standing network, with
/// the apex marked as source and, for elementary cells, the branch tips as
/// sinks.
pub fn cell_network(cell: &CellSpec) -> Result<FluxNetwork> {
    let n = cell.dim();
    let mut net = FluxNetwork::new(n);
    match cell.kind {
        CellKind::Elementary => {
            let apex = net.add_node(&cell.base);
            net.mark_source(apex, cell.total_mass());
            let n1 = n - 1;
            for code in 0..(1u64 << n1) {
                let mut pos = cell.base.clone();
                for (j, p) in pos.iter_mut().take(n1).enumerate() {
                    let sign = if code >> j & 1 == 1 { 1.0 } else { -1.0 };
                    *p += sign * cell.width / 4.0;
                }
                pos[n1] = cell.base[n1] + cell.height;
                let tip = net.add_node(&pos);
                net.add_pipe(apex, tip, cell.flux);
                net.mark_sink(tip, cell.flux);
            }
        }
        CellKind::Wasserstein => {
            let apex = net.add_node(&cell.base);
            net.mark_source(apex, cell.total_mass());
            net.add_diffuse(apex, cell.clone(), DiffuseRole::Spread);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::elementary_cell_energy;

    fn single_pipe(flux: f64) -> FluxNetwork {
        let mut net = FluxNetwork::new(2);
        let a = net.add_node(&[0.0, 0.0]);
        let b = net.add_node(&[0.0, 1.0]);
        net.add_pipe(a, b, flux);
        net.mark_source(a, flux);
        net.mark_sink(b, flux);
        net
    }

    #[test]
    fn single_pipe_up_energy() {
        let net = single_pipe(1.0);
        let p = ModelParams::urban_planning(0.1, 2.0, 2, 1.0).unwrap();
        let rep = network_energy(&net, &p).unwrap();
        assert!((rep.total - 1.1).abs() < 1e-15);
        assert!((rep.reference - 1.0).abs() < 1e-15);
        assert!((rep.excess - 0.1).abs() < 1e-15);
    }

    #[test]
    fn empty_network_energy_zero() {
        let net = union(&[]).unwrap();
        let p = ModelParams::urban_planning(0.1, 2.0, 2, 1.0).unwrap();
        let rep = network_energy(&net, &p).unwrap();
        assert_eq!(rep.total, 0.0);
        assert_eq!(rep.excess, 0.0);
    }

    #[test]
    fn union_adds_energies() {
        let n1 = single_pipe(1.0);
        let mut n2 = single_pipe(0.5);
        // shift the second pipe sideways so the supports are disjoint
        for i in 0..n2.node_count() {
            n2.coords[i * 2] += 3.0;
        }
        let p = ModelParams::urban_planning(0.1, 2.0, 2, 1.0).unwrap();
        let e1 = network_energy(&n1, &p).unwrap().total;
        let e2 = network_energy(&n2, &p).unwrap().total;
        let u = union(&[n1, n2]).unwrap();
        u.validate().unwrap();
        let eu = network_energy(&u, &p).unwrap().total;
        assert!((eu - (e1 + e2)).abs() < 1e-14);
    }

    #[test]
    fn single_cell_graph_matches_closed_form() {
        let cell = CellSpec::new(vec![0.3, 0.1], 0.4, 0.2, 0.25, CellKind::Elementary).unwrap();
        let p = ModelParams::urban_planning(0.05, 1.7, 2, 1.0).unwrap();
        let net = cell_network(&cell).unwrap();
        net.validate().unwrap();
        let via_graph = network_energy(&net, &p).unwrap().total;
        let closed = elementary_cell_energy(&cell, &p).unwrap();
        assert!((via_graph - closed).abs() <= 1e-12 * closed);
    }

    #[test]
    fn series_stacks_pipes() {
        // two stacked straight pipes of length 1/2 each behave like one pipe
        let mut lower = FluxNetwork::new(2);
        let a = lower.add_node(&[0.0, 0.0]);
        let b = lower.add_node(&[0.0, 0.5]);
        lower.add_pipe(a, b, 1.0);
        lower.mark_source(a, 1.0);
        lower.mark_sink(b, 1.0);
        let mut upper = FluxNetwork::new(2);
        let c = upper.add_node(&[0.0, 0.5]);
        let d = upper.add_node(&[0.0, 1.0]);
        upper.add_pipe(c, d, 1.0);
        upper.mark_source(c, 1.0);
        upper.mark_sink(d, 1.0);

        let glued = series(&lower, &upper, &[(b, c)]).unwrap();
        glued.validate().unwrap();
        // eps as small as representable stands in for the eps = 0 limit
        let p = ModelParams::branched_transport(1e-15, 2, 1.0).unwrap();
        let rep = network_energy(&glued, &p).unwrap();
        assert!((rep.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_rejects_mass_mismatch() {
        let mut lower = FluxNetwork::new(2);
        let a = lower.add_node(&[0.0, 0.0]);
        let b = lower.add_node(&[0.0, 0.5]);
        lower.add_pipe(a, b, 1.0);
        lower.mark_source(a, 1.0);
        lower.mark_sink(b, 1.0);
        let mut upper = FluxNetwork::new(2);
        let c = upper.add_node(&[0.0, 0.5]);
        let d = upper.add_node(&[0.0, 1.0]);
        upper.add_pipe(c, d, 0.75);
        upper.mark_source(c, 0.75);
        upper.mark_sink(d, 0.75);
        let err = series(&lower, &upper, &[(b, c)]).unwrap_err();
        assert!(matches!(err, Error::GlueMismatch { .. }));
    }

    #[test]
    fn series_rejects_position_mismatch() {
        let mut lower = FluxNetwork::new(2);
        let a = lower.add_node(&[0.0, 0.0]);
        let b = lower.add_node(&[0.0, 0.5]);
        lower.add_pipe(a, b, 1.0);
        lower.mark_source(a, 1.0);
        lower.mark_sink(b, 1.0);
        let mut upper = FluxNetwork::new(2);
        let c = upper.add_node(&[0.1, 0.5]);
        let d = upper.add_node(&[0.1, 1.0]);
        upper.add_pipe(c, d, 1.0);
        upper.mark_source(c, 1.0);
        upper.mark_sink(d, 1.0);
        assert!(series(&lower, &upper, &[(b, c)]).is_err());
    }

    #[test]
    fn series_merges_overlapping_edges_subadditively() {
        // Both halves contain the same segment between glued node pairs; the
        // merged edge carries the summed flux and costs strictly less than
        // the two edges separately (urban planning is concave in flux).
        let mut first = FluxNetwork::new(2);
        let a1 = first.add_node(&[0.0, 0.0]);
        let b1 = first.add_node(&[0.0, 1.0]);
        first.add_pipe(a1, b1, 0.4);
        first.mark_source(a1, 0.6);
        first.mark_sink(a1, 0.2);
        first.mark_sink(b1, 0.4);

        let mut second = FluxNetwork::new(2);
        let a2 = second.add_node(&[0.0, 0.0]);
        let b2 = second.add_node(&[0.0, 1.0]);
        second.add_pipe(a2, b2, 0.2);
        second.mark_source(a2, 0.2);
        second.mark_source(b2, 0.4);
        second.mark_sink(b2, 0.6);

        let p = ModelParams::urban_planning(0.2, 3.0, 2, 1.0).unwrap();
        first.validate().unwrap();
        second.validate().unwrap();
        let e1 = network_energy(&first, &p).unwrap().total;
        let e2 = network_energy(&second, &p).unwrap().total;
        let glued = series(&first, &second, &[(a1, a2), (b1, b2)]).unwrap();
        glued.validate().unwrap();
        assert_eq!(glued.pipes.len(), 1);
        assert!((glued.pipes[0].flux - 0.6).abs() < 1e-15);
        let e = network_energy(&glued, &p).unwrap().total;
        assert!(e < e1 + e2 - 1e-12);
    }

    #[test]
    fn extraction_threshold_is_strict() {
        let mut net = FluxNetwork::new(2);
        let a = net.add_node(&[0.0, 0.0]);
        let b = net.add_node(&[0.0, 1.0]);
        let c = net.add_node(&[1.0, 0.0]);
        let d = net.add_node(&[1.0, 1.0]);
        net.add_pipe(a, b, 0.5);
        net.add_pipe(c, d, 0.05);
        // eps/(a-1) = 0.1: first edge kept, second dropped
        assert_eq!(extract_network(&net, 0.1, 2.0), vec![0]);
        // exact tie is excluded
        let mut tie = FluxNetwork::new(2);
        let e = tie.add_node(&[0.0, 0.0]);
        let f = tie.add_node(&[0.0, 1.0]);
        tie.add_pipe(e, f, 0.1);
        assert!(extract_network(&tie, 0.1, 2.0).is_empty());
    }

    #[test]
    fn conservation_catches_broken_node() {
        let mut net = FluxNetwork::new(2);
        let a = net.add_node(&[0.0, 0.0]);
        let b = net.add_node(&[0.0, 0.5]);
        let c = net.add_node(&[0.0, 1.0]);
        net.add_pipe(a, b, 1.0);
        net.add_pipe(b, c, 0.9); // leaks 0.1 at b
        net.mark_source(a, 1.0);
        net.mark_sink(c, 0.9);
        assert!(matches!(
            net.check_conservation(),
            Err(Error::Conservation { node: 1, .. })
        ));
    }
}
