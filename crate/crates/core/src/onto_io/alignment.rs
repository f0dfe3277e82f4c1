//! OAEI Alignment format.
//!
//! ```xml
//! <Alignment>
//!   <map><Cell>
//!     <entity1 rdf:resource="http://cmt#Paper"/>
//!     <entity2 rdf:resource="http://conference#Paper"/>
//!     <measure rdf:datatype="xsd:float">1.0</measure>
//!     <relation>=</relation>
//!   </Cell></map>
//! </Alignment>
//! ```

use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::Event;
use quick_xml::reader::NsReader;

use super::xml::{xml_error, Entities};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentCell {
    pub entity1: String,
    pub entity2: String,
    pub relation: String,
    pub measure: f64,
}

impl AlignmentCell {
    pub fn is_equivalence(&self) -> bool {
        self.relation == "="
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceAlignment {
    pub onto1: Option<String>,
    pub onto2: Option<String>,
    pub cells: Vec<AlignmentCell>,
    /// Cells dropped for lacking `entity1` or `entity2`.
    pub skipped: usize,
}

impl ReferenceAlignment {
    /// Cells with relation `=`.
    pub fn equivalences(&self) -> impl Iterator<Item = &AlignmentCell> {
        self.cells.iter().filter(|c| c.is_equivalence())
    }
}

#[derive(Default)]
struct PartialCell {
    entity1: Option<String>,
    entity2: Option<String>,
    relation: Option<String>,
    measure: Option<String>,
}

/// Parses an OAEI alignment document. Missing `relation` defaults to `=`,
/// missing or unparsable `measure` to 1.0.
pub fn parse_reference_alignment(document: &[u8]) -> Result<ReferenceAlignment> {
    let mut reader = NsReader::from_reader(document);
    reader.config_mut().expand_empty_elements = true;
    let mut entities = Entities::default();
    let mut out = ReferenceAlignment::default();
    let mut buf = Vec::new();

    let mut path: Vec<String> = Vec::new();
    let mut cell: Option<PartialCell> = None;
    let mut text = String::new();

    loop {
        let offset = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_error(reader.error_position(), e))?;
        match event {
            Event::DocType(d) => entities = Entities::from_doctype(&d.xml10_content()),
            Event::Start(e) => {
                let local = e.local_name().as_ref().to_string();
                text.clear();
                match local.as_str() {
                    "Cell" => cell = Some(PartialCell::default()),
                    "entity1" | "entity2" | "Ontology" => {
                        let mut resource = None;
                        for attr in e.attributes() {
                            let attr = attr.map_err(|err| xml_error(offset, err))?;
                            let key = attr.key.local_name();
                            if key.as_ref() == "resource" || key.as_ref() == "about" {
                                resource = Some(entities.attribute_value(&attr, offset)?);
                            }
                        }
                        match (local.as_str(), cell.as_mut(), resource) {
                            ("entity1", Some(c), r @ Some(_)) => c.entity1 = r,
                            ("entity2", Some(c), r @ Some(_)) => c.entity2 = r,
                            ("Ontology", None, Some(r)) => match path.last().map(String::as_str) {
                                Some("onto1") if out.onto1.is_none() => out.onto1 = Some(r),
                                Some("onto2") if out.onto2.is_none() => out.onto2 = Some(r),
                                _ => {}
                            },
                            _ => {}
                        }
                    }
                    _ => {}
                }
                path.push(local);
            }
            Event::Text(t) => entities.push_text(&mut text, &t),
            Event::CData(t) => text.push_str(&t.xml10_content()),
            Event::GeneralRef(r) => entities.push_ref(&mut text, &r, offset)?,
            Event::End(_) => {
                let local = path.pop().unwrap_or_default();
                let value = text.trim().to_string();
                match local.as_str() {
                    "Cell" => {
                        if let Some(c) = cell.take() {
                            match (c.entity1, c.entity2) {
                                (Some(entity1), Some(entity2)) => out.cells.push(AlignmentCell {
                                    entity1,
                                    entity2,
                                    relation: c.relation.unwrap_or_else(|| "=".into()),
                                    measure: c
                                        .measure
                                        .and_then(|m| m.parse().ok())
                                        .unwrap_or(1.0),
                                }),
                                _ => out.skipped += 1,
                            }
                        }
                    }
                    "relation" => {
                        if let Some(c) = cell.as_mut() {
                            c.relation = Some(value);
                        }
                    }
                    "measure" => {
                        if let Some(c) = cell.as_mut() {
                            c.measure = Some(value);
                        }
                    }
                    "entity1" | "entity2" if !value.is_empty() => {
                        if let Some(c) = cell.as_mut() {
                            let slot = if local == "entity1" { &mut c.entity1 } else { &mut c.entity2 };
                            slot.get_or_insert(value);
                        }
                    }
                    "onto1" if out.onto1.is_none() && !value.is_empty() => out.onto1 = Some(value),
                    "onto2" if out.onto2.is_none() && !value.is_empty() => out.onto2 = Some(value),
                    _ => {}
                }
                text.clear();
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !path.is_empty() {
        return Err(Error::Xml {
            offset: reader.buffer_position(),
            message: "unexpected end of document".into(),
        });
    }
    if out.skipped > 0 {
        log::warn!("skipped {} alignment cell(s) missing entity1/entity2", out.skipped);
    }
    Ok(out)
}

/// Writes cells in the OAEI Alignment format.
pub fn write_alignment(onto1: &str, onto2: &str, cells: &[AlignmentCell]) -> String {
    let mut out = String::new();
    out.push_str(
        "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n\
         <rdf:RDF xmlns=\"http://knowledgeweb.semanticweb.org/heterogeneity/alignment\"\n         \
         xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\"\n         \
         xmlns:xsd=\"http://www.w3.org/2001/XMLSchema#\">\n\
         <Alignment>\n  <xml>yes</xml>\n  <level>0</level>\n  <type>??</type>\n",
    );
    let _ = writeln!(out, "  <onto1>{}</onto1>", escape(onto1));
    let _ = writeln!(out, "  <onto2>{}</onto2>", escape(onto2));
    for c in cells {
        let _ = write!(
            out,
            "  <map>\n    <Cell>\n      <entity1 rdf:resource=\"{}\"/>\n      <entity2 rdf:resource=\"{}\"/>\n      \
             <measure rdf:datatype=\"xsd:float\">{}</measure>\n      <relation>{}</relation>\n    </Cell>\n  </map>\n",
            escape(&c.entity1),
            escape(&c.entity2),
            c.measure,
            escape(&c.relation),
        );
    }
    out.push_str("</Alignment>\n</rdf:RDF>\n");
    out
}
