//! Answers and graphs as text, tables, DOT diagrams and graph database
//! scripts. Every renderer is a pure function of its input.

mod cypher;
mod dot;

use crate::explain::{Answer, Table};
use crate::verify::CheckReport;

pub use cypher::{export_graph_script, parse_script, ScriptError};
pub use dot::render_dot;

/// The answer's prose followed by its legal sources.
pub fn render_text(answer: &Answer) -> String {
    let mut out = answer.text.clone();
    if !answer.citations.is_empty() {
        if !out.is_empty() {
            out.push_str("\n\n");
        }
        out.push_str("Sources:");
        for c in &answer.citations {
            out.push_str(&format!("\n- {} <{}>", c.label, c.uri));
        }
    }
    out.push('\n');
    out
}

/// Every table of the answer, aligned, separated by blank lines.
pub fn render_table(answer: &Answer) -> String {
    answer
        .tables
        .iter()
        .map(aligned)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Every table of the answer as CSV: a title record, the header and the
/// rows, with a blank line between tables.
pub fn render_table_csv(answer: &Answer) -> String {
    answer
        .tables
        .iter()
        .map(csv_table)
        .collect::<Vec<_>>()
        .join("\n")
}

/// A check report as its verdict sentence and table.
pub fn render_check(report: &CheckReport) -> String {
    format!(
        "{}: {}\n{}",
        report.check,
        report.text,
        aligned(&Table::from(report))
    )
}

/// One table with a title line, padded columns and a rule under the header.
pub fn aligned(table: &Table) -> String {
    let width = |s: &str| s.chars().count();
    let mut widths: Vec<usize> = table.columns.iter().map(|c| width(c)).collect();
    for row in &table.rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(width(cell));
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - width(c))))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = format!("{}\n{}\n", table.title, line(&table.columns));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("  "));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

pub fn csv_table(table: &Table) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    w.write_record([&table.title]).expect("writing to memory");
    w.write_record(&table.columns).expect("writing to memory");
    for row in &table.rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("input was UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{QType, Question};
    use crate::graph::PropertyGraph;
    use crate::model::SourceRef;

    fn answer(tables: Vec<Table>) -> Answer {
        Answer {
            question: Question::new(QType::What),
            text: "Hello.".into(),
            tables,
            graph_view: PropertyGraph::empty(),
            citations: vec![SourceRef {
                label: "Art. 1".into(),
                uri: "https://example.org/1".into(),
            }],
        }
    }

    #[test]
    fn text_lists_sources() {
        assert_eq!(
            render_text(&answer(vec![])),
            "Hello.\n\nSources:\n- Art. 1 <https://example.org/1>\n"
        );
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("T", &["a", "bb"]);
        assert_eq!(aligned(&t), "T\na  bb\n-  --\n");
        assert_eq!(csv_table(&t), "T\na,bb\n");
    }

    #[test]
    fn columns_align_and_csv_quotes() {
        let mut t = Table::new("T", &["name", "v"]);
        t.push(vec!["x".into(), "1,5".into()]);
        t.push(vec!["longer".into(), "say \"hi\"".into()]);
        assert_eq!(
            aligned(&t),
            "T\nname    v\n------  --------\nx       1,5\nlonger  say \"hi\"\n"
        );
        assert_eq!(
            csv_table(&t),
            "T\nname,v\nx,\"1,5\"\nlonger,\"say \"\"hi\"\"\"\n"
        );
        let a = answer(vec![t.clone(), t]);
        assert_eq!(render_table(&a).matches("longer").count(), 2);
    }
}
