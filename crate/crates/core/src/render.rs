//! Deterministic SVG rendering of flux networks: pipes as line segments with
//! mass-proportional stroke widths, diffuse cells as shaded triangles.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::network::{DiffuseRole, FluxNetwork};

/// Cosmetic factor turning `flux^(1/(n-1))` (the physical pipe width scale)
/// into a stroke width.
const STROKE_SCALE: f64 = 0.5;
const MIN_STROKE: f64 = 5e-4;

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Render a network to SVG. Two-dimensional networks are drawn directly,
/// three-dimensional ones are projected onto the `(x_1, x_3)` plane; higher
/// dimensions have no projection defined. `notes` become comments in the
/// output, and identical networks always produce byte-identical documents.
pub fn render_network(net: &FluxNetwork, ell: f64, notes: &[String]) -> Result<String> {
    let dim = net.dim();
    if dim > 3 && (net.node_count() > 0 || !net.pipes.is_empty()) {
        return Err(Error::Unsupported(format!(
            "rendering is defined for n = 2 and n = 3 (projected), got n = {dim}"
        )));
    }
    let project = |p: &[f64]| -> (f64, f64) {
        match p.len() {
            0 | 1 => (0.0, 1.0),
            2 => (p[0], 1.0 - p[1]),
            _ => (p[0], 1.0 - p[p.len() - 1]),
        }
    };
    let exponent = if dim >= 2 {
        1.0 / (dim as f64 - 1.0)
    } else {
        1.0
    };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {} 1\">",
        fmt(ell)
    );
    for note in notes {
        let _ = writeln!(svg, "<!-- {} -->", note.replace("--", "- -"));
    }
    // boundary axes: the source face at the bottom, the sink face at the top
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"0\" y1=\"1\" x2=\"{}\" y2=\"1\" stroke=\"#bbbbbb\" stroke-width=\"0.002\"/>",
        fmt(ell)
    );
    let _ = writeln!(
        svg,
        "<line class=\"axis\" x1=\"0\" y1=\"0\" x2=\"{}\" y2=\"0\" stroke=\"#bbbbbb\" stroke-width=\"0.002\"/>",
        fmt(ell)
    );

    for d in &net.diffuse {
        let node = project(net.position(d.node));
        let base = &d.cell.base;
        let face_z = match d.role {
            DiffuseRole::Spread => base[base.len() - 1] + d.cell.height,
            DiffuseRole::Gather => base[base.len() - 1],
        };
        let y_face = 1.0 - face_z;
        let x0 = base[0] - d.cell.width / 2.0;
        let x1 = base[0] + d.cell.width / 2.0;
        if (y_face - node.1).abs() < 1e-12 {
            // flat spread inside the boundary plane
            let _ = writeln!(
                svg,
                "<line class=\"cell\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#9ecae1\" stroke-width=\"0.004\"/>",
                fmt(x0),
                fmt(y_face),
                fmt(x1),
                fmt(y_face)
            );
        } else {
            let _ = writeln!(
                svg,
                "<polygon class=\"cell\" points=\"{},{} {},{} {},{}\" fill=\"#9ecae1\" fill-opacity=\"0.55\"/>",
                fmt(node.0),
                fmt(node.1),
                fmt(x0),
                fmt(y_face),
                fmt(x1),
                fmt(y_face)
            );
        }
    }

    for e in &net.pipes {
        let a = project(net.position(e.from));
        let b = project(net.position(e.to));
        let width = (STROKE_SCALE * e.flux.powf(exponent)).max(MIN_STROKE);
        let _ = writeln!(
            svg,
            "<line class=\"pipe\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#1a1a2e\" stroke-width=\"{}\" stroke-linecap=\"round\"/>",
            fmt(a.0),
            fmt(a.1),
            fmt(b.0),
            fmt(b.1),
            fmt(width)
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{instantiate, plan, DEFAULT_CELL_BUDGET};
    use crate::params::ModelParams;

    #[test]
    fn empty_network_is_axes_only() {
        let net = FluxNetwork::new(2);
        let svg = render_network(&net, 1.0, &[]).unwrap();
        assert!(svg.contains("<svg"));
        assert_eq!(svg.matches("class=\"axis\"").count(), 2);
        assert_eq!(svg.matches("class=\"pipe\"").count(), 0);
    }

    #[test]
    fn pipe_count_matches_plan() {
        let p = ModelParams::urban_planning(1e-2, 2.0, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        let inst = instantiate(&plan, 0, DEFAULT_CELL_BUDGET).unwrap();
        let svg = render_network(&inst.network, 1.0, &[]).unwrap();
        let cells: u64 = plan.layers.iter().map(|l| l.per_axis).sum();
        let expect = 2 * cells * 2; // both halves, 2^(n-1) branches per cell
        assert_eq!(svg.matches("class=\"pipe\"").count() as u64, expect);
    }

    #[test]
    fn byte_identical_rendering() {
        let p = ModelParams::urban_planning(1e-1 * 0.99, 3.0, 2, 1.0).unwrap();
        let plan = plan(&p, None).unwrap();
        let inst = instantiate(&plan, 0, DEFAULT_CELL_BUDGET).unwrap();
        let s1 = render_network(&inst.network, 1.0, &["run".into()]).unwrap();
        let s2 = render_network(&inst.network, 1.0, &["run".into()]).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn high_dimension_rejected() {
        let mut net = FluxNetwork::new(4);
        let a = net.add_node(&[0.0, 0.0, 0.0, 0.0]);
        let b = net.add_node(&[0.0, 0.0, 0.0, 1.0]);
        net.add_pipe(a, b, 1.0);
        assert!(render_network(&net, 1.0, &[]).is_err());
    }
}
