//! Browser bindings: analyse a map, draw its foliation, browse the gallery.

use involution_core::analysis::{self, AnalysisOptions, MapSpec};
use involution_core::gallery;
use involution_core::render::leaves_svg;
use wasm_bindgen::prelude::*;

fn options(window: &str, scan: usize, leaves: Option<usize>) -> Result<AnalysisOptions, JsValue> {
    let window = if window.trim().is_empty() {
        None
    } else {
        let v: Vec<f64> = window
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| JsValue::from_str(&format!("window: {e}")))?;
        let w: [f64; 4] = v
            .try_into()
            .map_err(|_| JsValue::from_str("window needs XMIN,XMAX,YMIN,YMAX"))?;
        Some(w)
    };
    Ok(AnalysisOptions {
        window,
        scan,
        leaves,
        ..AnalysisOptions::default()
    })
}

fn spec(map: &str) -> Result<MapSpec, JsValue> {
    map.parse::<MapSpec>()
        .map_err(|e| JsValue::from_str(&format!("[parse] {e}")))
}

/// Full report as pretty JSON.
#[wasm_bindgen]
pub fn analyze(map: &str, window: &str, scan: usize) -> Result<String, JsValue> {
    let a = analysis::analyze(&spec(map)?, &options(window, scan, None)?)
        .map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string_pretty(&a.report).map_err(|e| JsValue::from_str(&e.to_string()))
}

/// SVG portrait of the traced leaves; uncertified maps are drawn anyway.
#[wasm_bindgen]
pub fn foliate_svg(map: &str, window: &str, leaves: usize) -> Result<String, JsValue> {
    let count = (leaves > 0).then_some(leaves);
    let a = analysis::foliate(&spec(map)?, &options(window, 101, count)?, true)
        .map_err(|e| JsValue::from_str(&e.to_string()))?;
    Ok(leaves_svg(
        &a.report.window,
        &a.leaves,
        &a.report.fixed_points,
    ))
}

/// `[{name, tag, formula, expected}]` as JSON.
#[wasm_bindgen]
pub fn gallery_list() -> String {
    let entries: Vec<serde_json::Value> = gallery::list_entries()
        .into_iter()
        .filter_map(|name| gallery::get(name, None).ok())
        .map(|e| {
            serde_json::json!({
                "name": e.name,
                "tag": e.tag,
                "formula": e.formula,
                "expected": e.expected.known_verdict,
            })
        })
        .collect();
    serde_json::Value::Array(entries).to_string()
}
