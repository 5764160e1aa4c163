mod common;

use eaa_core::matrices::csv::{read_autonomy, read_benefits, read_risks};
use eaa_core::render::{matrices_csv, to_dot, to_html_report, RenderOptions};

fn section<'a>(html: &'a str, start: &str, end: &str) -> &'a str {
    let from = html.find(start).unwrap_or_else(|| panic!("{start} not found"));
    let rest = &html[from..];
    &rest[..rest.find(end).unwrap()]
}

#[test]
fn dot_has_one_statement_per_node_and_edge() {
    let case = common::robotaxi();
    let dot = to_dot(&case);
    let nodes = dot.lines().filter(|l| l.trim_start().starts_with('"') && l.contains(" [shape=")).count();
    let edges = dot.lines().filter(|l| l.contains("\" -> \"")).count();
    assert_eq!(nodes, case.node_count());
    assert_eq!(edges, case.edge_count());
    assert_eq!(nodes, 328);
    assert_eq!(edges, 325);
    assert_eq!(dot.matches("subgraph \"cluster_").count(), 7);
    assert_eq!(to_dot(&case), dot);
}

#[test]
fn html_anchors_every_node_once() {
    let case = common::robotaxi();
    let html = to_html_report(&case, &RenderOptions::default());
    for node in case.nodes() {
        let anchor = format!("id=\"node-{}\"", node.id);
        assert_eq!(html.matches(&anchor).count(), 1, "{}", node.id);
    }
}

#[test]
fn html_justice_matrix_has_seven_rows() {
    let html = to_html_report(&common::robotaxi(), &RenderOptions::default());
    let table = section(&html, "<h3>Justice matrix</h3>", "</table>");
    assert_eq!(table.matches("<tr>").count(), 1 + 7);
    assert!(table.contains("Taxi drivers"));
    assert!(table.contains("Potentially substantial, but uncertain"));
}

#[test]
fn html_flags_show_resolution() {
    let mut case = common::robotaxi();
    let html = to_html_report(&case, &RenderOptions::default());
    let flags = section(&html, "<section id=\"flags\">", "</section>");
    let r1 = flags.lines().find(|l| l.contains("R1-only-risk")).unwrap();
    assert!(r1.contains("Taxi drivers") && r1.contains("class=\"error\"") && r1.ends_with("<td>open</td></tr>"), "{r1}");

    case.annotations = common::resolutions();
    let html = to_html_report(&case, &RenderOptions::default());
    let flags = section(&html, "<section id=\"flags\">", "</section>");
    let r1 = flags.lines().find(|l| l.contains("R1-only-risk")).unwrap();
    assert!(r1.contains("resolved by comp-taxi-drivers"), "{r1}");
    assert!(!flags.contains("class=\"error\""));
}

#[test]
fn csv_export_round_trips() {
    let case = common::robotaxi();
    let files = matrices_csv(&case);
    let get = |name: &str| files.iter().find(|(n, _)| *n == name).map(|(_, t)| t.as_str()).unwrap();
    assert_eq!(get("benefits.csv").lines().count(), 1 + 9);
    assert_eq!(get("risks.csv").lines().count(), 1 + 20);
    let autonomy = get("autonomy.csv");
    assert_eq!(autonomy.lines().count(), 1 + 3);
    assert!(autonomy.lines().skip(1).all(|l| l.split(',').count() == 1 + 5));
    assert_eq!(read_benefits(get("benefits.csv")).unwrap(), case.matrices.benefits);
    assert_eq!(read_risks(get("risks.csv")).unwrap(), case.matrices.risks);
    assert_eq!(read_autonomy(autonomy).unwrap(), case.matrices.autonomy);
    assert_eq!(autonomy, common::read("robotaxi.autonomy.csv"));
}
