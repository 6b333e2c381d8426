//! Leaf export: CSV polylines and an SVG portrait.

use std::fmt::Write as _;
use std::io;

use crate::foliation::Leaf;
use crate::involution::{FixedPoint, Region};

pub const CSV_HEADER: [&str; 7] = [
    "leaf_id",
    "leaf_parameter",
    "point_index",
    "x",
    "y",
    "residual",
    "truncated",
];

/// One row per traced point. A leaf that produced no points still gets a
/// row with empty coordinates so its truncation is visible.
pub fn write_leaves_csv<W: io::Write>(out: W, leaves: &[Leaf]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (id, leaf) in leaves.iter().enumerate() {
        let id = id.to_string();
        let param = leaf.parameter.to_string();
        let truncated = leaf.truncated.to_string();
        if leaf.points.is_empty() {
            w.write_record([id.as_str(), &param, "", "", "", "", &truncated])?;
            continue;
        }
        for (k, (p, r)) in leaf.points.iter().zip(&leaf.residuals).enumerate() {
            w.write_record([
                id.clone(),
                param.clone(),
                k.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                r.to_string(),
                truncated.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn leaves_csv(leaves: &[Leaf]) -> String {
    let mut buf = Vec::new();
    write_leaves_csv(&mut buf, leaves).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Window frame, leaves as polylines and fixed points as circles. The
/// viewBox is the window itself with `y` flipped so that up is `+y`.
pub fn leaves_svg(region: &Region, leaves: &[Leaf], fixed: &[FixedPoint]) -> String {
    let (w, h) = (region.width(), region.height());
    let stroke = 0.002 * w.max(h);
    let px = 640.0;
    let py = px * h / w;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{py}" viewBox="{} {} {w} {h}">"#,
        region.x_min, -region.y_max
    );
    let _ = writeln!(
        s,
        r#"<g transform="scale(1,-1)" fill="none" stroke-width="{stroke}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{w}" height="{h}" stroke="#444" fill="#fff"/>"##,
        region.x_min, region.y_min
    );
    for (k, leaf) in leaves.iter().enumerate() {
        if leaf.points.len() < 2 {
            continue;
        }
        let pts = leaf
            .points
            .iter()
            .map(|p| format!("{:.6},{:.6}", p.x, p.y))
            .collect::<Vec<_>>()
            .join(" ");
        let dash = if leaf.truncated {
            r#" stroke-dasharray="0.05,0.05""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<polyline points="{pts}" stroke="{}"{dash}/>"#,
            PALETTE[k % PALETTE.len()]
        );
    }
    let r = 3.0 * stroke;
    for fp in fixed {
        let p = fp.location;
        if region.contains(p) {
            let _ = writeln!(
                s,
                r##"<circle cx="{}" cy="{}" r="{r}" fill="#000" stroke="none"/>"##,
                p.x, p.y
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::FoliationKind;
    use crate::linalg2::Point;

    fn leaf(points: Vec<Point>, truncated: bool) -> Leaf {
        let n = points.len();
        Leaf {
            parameter: 0.5,
            kind: FoliationKind::Vertical,
            points,
            residuals: vec![0.0; n],
            max_residual: 0.0,
            truncated,
            diagnostic: None,
        }
    }

    #[test]
    fn csv_layout() {
        let leaves = [
            leaf(vec![Point::new(1.0, 2.0), Point::new(1.5, 2.5)], false),
            leaf(vec![], true),
        ];
        let text = leaves_csv(&leaves);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(
            lines[0],
            "leaf_id,leaf_parameter,point_index,x,y,residual,truncated"
        );
        assert_eq!(lines[1], "0,0.5,0,1,2,0,false");
        assert_eq!(lines[3], "1,0.5,,,,,true");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn svg_shape() {
        let region = Region::square(2.0, 5);
        let leaves = [leaf(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)],
            false,
        )];
        let svg = leaves_svg(&region, &leaves, &[]);
        assert!(svg.contains(r#"viewBox="-2 -2 4 4""#));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("<rect"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
