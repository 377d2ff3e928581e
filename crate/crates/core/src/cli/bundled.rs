//! Reference scenarios shipped with the crate.

use nalgebra::DMatrix;

use super::file::ScenarioFile;

pub const PAPER_FIG2: &str = include_str!("../../scenarios/paper_fig2.toml");
pub const PAPER_FIG3: &str = include_str!("../../scenarios/paper_fig3.toml");
/// Annotated reference for the file format.
pub const EXAMPLE: &str = include_str!("../../scenarios/example.toml");

/// Names accepted by [`bundled`].
pub const NAMES: [&str; 3] = ["paper_fig2", "paper_fig3", "example"];

pub fn bundled(name: &str) -> Option<ScenarioFile> {
    let text = match name {
        "paper_fig2" => PAPER_FIG2,
        "paper_fig3" => PAPER_FIG3,
        "example" => EXAMPLE,
        _ => return None,
    };
    Some(
        ScenarioFile::from_toml_str(text, format!("<bundled {name}>"))
            .expect("bundled scenarios are valid"),
    )
}

/// The seven-agent Laplacian used by both reference scenarios: agents 1–4
/// form one strongly connected component listening to the closed component
/// 5–7.
pub fn seven_agent_laplacian() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        7,
        7,
        &[
            7.8, 0.0, -5.2, -2.6, 0.0, 0.0, 0.0, //
            -3.9, 3.9, 0.0, 0.0, 0.0, 0.0, 0.0, //
            0.0, -4.1, 13.3, -3.4, 0.0, -5.8, 0.0, //
            0.0, 0.0, -6.7, 12.5, -1.5, -4.3, 0.0, //
            0.0, 0.0, 0.0, 0.0, 7.6, -2.2, -5.4, //
            0.0, 0.0, 0.0, 0.0, -5.1, 6.2, -1.1, //
            0.0, 0.0, 0.0, 0.0, 0.0, -8.7, 8.7,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedDigraph;

    #[test]
    fn all_bundled_scenarios_parse() {
        for name in NAMES {
            let f = bundled(name).unwrap();
            assert_eq!(f.name.replace("three_agent_ring", "example"), name);
            f.to_scenario().unwrap();
        }
        assert!(bundled("nope").is_none());
    }

    #[test]
    fn file_graph_matches_constant() {
        let g = bundled("paper_fig2").unwrap().to_scenario().unwrap().graph;
        assert_eq!(
            g,
            WeightedDigraph::from_laplacian(&seven_agent_laplacian()).unwrap()
        );
    }
}
