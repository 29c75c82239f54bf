//! Static HTML rendering of a selection: sentences in document order with
//! the chosen ones highlighted and per-sentence numbers in tooltips.

use crate::pipeline::SelectionRecord;
use crate::text::Document;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders the record against the article it came from. Sentences are
/// matched by index; the record's hashes are not re-checked here.
pub fn render_html(record: &SelectionRecord, doc: &Document) -> String {
    let mut body = String::new();
    body.push_str(&format!(
        "<h1>{}</h1>\n<p class=\"meta\">method {} | mode {} | seed {}",
        escape(&record.doc_id),
        escape(record.method.as_str()),
        escape(record.mode.as_str()),
        record.seed,
    ));
    if let Some(k) = record.k {
        body.push_str(&format!(" | k {k}"));
    }
    if let Some(c) = record.chosen_cluster {
        body.push_str(&format!(" | cluster {c}"));
    }
    body.push_str("</p>\n<ol class=\"sentences\">\n");
    for (sentence, rec) in doc.sentences.iter().zip(&record.sentences) {
        let class = if rec.selected { " class=\"key\"" } else { "" };
        let tooltip = match rec.features {
            Some([rel, smo, coh]) => format!(
                "r={:.4} rel={:.4} smo={:.4} coh={:.4}",
                rec.r, rel, smo, coh
            ),
            None => format!("r={:.4}", rec.r),
        };
        body.push_str(&format!(
            "  <li{class} title=\"{}\">{} <span class=\"r\">[{:.3}]</span></li>\n",
            escape(&tooltip),
            escape(&sentence.text),
            rec.r,
        ));
    }
    body.push_str("</ol>\n");
    for warning in &record.warnings {
        body.push_str(&format!("<p class=\"warning\">{}</p>\n", escape(warning)));
    }

    format!(
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n\
         <title>{}</title>\n<style>\n\
         body {{ font-family: sans-serif; max-width: 48rem; margin: 2rem auto; }}\n\
         .meta {{ color: #555; }}\n\
         li {{ margin: 0.4rem 0; }}\n\
         li.key {{ background: #fff3b0; font-weight: 600; }}\n\
         .r {{ color: #888; font-size: 0.85em; }}\n\
         .warning {{ color: #a33; }}\n\
         </style>\n</head>\n<body>\n{}</body>\n</html>\n",
        escape(&record.doc_id),
        body
    )
}
