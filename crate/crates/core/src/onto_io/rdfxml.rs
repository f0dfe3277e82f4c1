//! RDF/XML subset reader and writer.
//!
//! The reader is a small streaming RDF/XML-to-triples translator (node and
//! property elements, `rdf:about`/`rdf:ID`/`rdf:nodeID`/`rdf:resource`,
//! `rdf:parseType`, `xml:base`, DOCTYPE entities). The ontology is then
//! assembled from the triples, keeping only the vocabulary the context model
//! uses. Anything else is skipped.

use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::name::ResolveResult;
use quick_xml::reader::NsReader;

use super::xml::{resolve_iri, xml_error, Entities};
use super::{iri_fragment, Ontology, OntologyBuilder, PropertyKind, OWL_NS, RDFS_NS, RDF_NS};
use crate::{Error, Result};

const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";

#[derive(Debug, Clone, PartialEq, Eq)]
enum Term {
    Iri(String),
    Blank(u64),
    Literal(String),
}

#[derive(Debug)]
struct Triple {
    subject: Term,
    predicate: String,
    object: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Normal,
    Resource,
    Collection,
    Literal,
}

#[derive(Debug)]
enum Frame {
    Root,
    Node {
        subject: Term,
    },
    Property {
        subject: Term,
        predicate: String,
        object: Option<Term>,
        text: String,
        mode: Mode,
    },
    Skip,
}

#[derive(Default)]
struct ElementAttrs {
    about: Option<String>,
    id: Option<String>,
    node_id: Option<String>,
    resource: Option<String>,
    parse_type: Option<String>,
    rdf_type: Option<String>,
    base: Option<String>,
    /// Remaining attributes as `(predicate IRI, literal value)`.
    properties: Vec<(String, String)>,
}

struct TripleReader<'a> {
    reader: NsReader<&'a [u8]>,
    entities: Entities,
    stack: Vec<Frame>,
    bases: Vec<String>,
    next_blank: u64,
    triples: Vec<Triple>,
}

impl<'a> TripleReader<'a> {
    fn new(document: &'a [u8]) -> Self {
        let mut reader = NsReader::from_reader(document);
        reader.config_mut().expand_empty_elements = true;
        TripleReader {
            reader,
            entities: Entities::default(),
            stack: Vec::new(),
            bases: Vec::new(),
            next_blank: 0,
            triples: Vec::new(),
        }
    }

    fn fresh_blank(&mut self) -> Term {
        self.next_blank += 1;
        Term::Blank(self.next_blank)
    }

    fn base(&self) -> &str {
        self.bases.last().map(String::as_str).unwrap_or("")
    }

    fn emit(&mut self, subject: Term, predicate: impl Into<String>, object: Term) {
        self.triples.push(Triple {
            subject,
            predicate: predicate.into(),
            object,
        });
    }

    fn run(mut self) -> Result<Vec<Triple>> {
        let mut buf = Vec::new();
        loop {
            let offset = self.reader.buffer_position();
            let event = self
                .reader
                .read_event_into(&mut buf)
                .map_err(|e| xml_error(self.reader.error_position(), e))?;
            match event {
                Event::DocType(d) => {
                    self.entities = Entities::from_doctype(&d.xml10_content());
                }
                Event::Start(e) => {
                    let e = e.into_owned();
                    self.start(&e, offset)?;
                }
                Event::End(_) => self.end(),
                Event::Text(t) => {
                    if let Some(Frame::Property { text, .. }) = self.stack.last_mut() {
                        self.entities.push_text(text, &t);
                    }
                }
                Event::CData(t) => {
                    if let Some(Frame::Property { text, .. }) = self.stack.last_mut() {
                        text.push_str(&t.xml10_content());
                    }
                }
                Event::GeneralRef(r) => {
                    if let Some(Frame::Property { text, .. }) = self.stack.last_mut() {
                        self.entities.push_ref(text, &r, offset)?;
                    }
                }
                Event::Eof => break,
                _ => {}
            }
            buf.clear();
        }
        if !self.stack.is_empty() {
            return Err(Error::Xml {
                offset: self.reader.buffer_position(),
                message: "unexpected end of document".into(),
            });
        }
        Ok(self.triples)
    }

    fn element_iri(&self, e: &BytesStart<'_>) -> String {
        let (ns, local) = self.reader.resolver().resolve_element(e.name());
        match ns {
            ResolveResult::Bound(ns) => format!("{}{}", ns.into_inner(), local.as_ref()),
            _ => local.as_ref().to_string(),
        }
    }

    fn attrs(&self, e: &BytesStart<'_>, offset: u64) -> Result<ElementAttrs> {
        let mut out = ElementAttrs::default();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| xml_error(offset, err))?;
            let key = attr.key.0;
            if key == "xmlns" || key.starts_with("xmlns:") {
                continue;
            }
            let value = self.entities.attribute_value(&attr, offset)?;
            let (ns, local) = self.reader.resolver().resolve_attribute(attr.key);
            let ns = match ns {
                ResolveResult::Bound(ns) => ns.into_inner(),
                _ => "",
            };
            let local = local.as_ref();
            match (ns, local) {
                (RDF_NS, "about") => out.about = Some(value),
                (RDF_NS, "ID") => out.id = Some(value),
                (RDF_NS, "nodeID") => out.node_id = Some(value),
                (RDF_NS, "resource") => out.resource = Some(value),
                (RDF_NS, "parseType") => out.parse_type = Some(value),
                (RDF_NS, "type") => out.rdf_type = Some(value),
                (RDF_NS, "datatype") => {}
                (XML_NS, "base") => out.base = Some(value),
                (XML_NS, _) => {}
                _ if key == "xml:base" => out.base = Some(value),
                _ if key.starts_with("xml:") => {}
                ("", _) => {}
                _ => out.properties.push((format!("{ns}{local}"), value)),
            }
        }
        Ok(out)
    }

    fn start(&mut self, e: &BytesStart<'_>, offset: u64) -> Result<()> {
        let iri = self.element_iri(e);
        let attrs = self.attrs(e, offset)?;
        let base = match &attrs.base {
            Some(b) => resolve_iri(self.base(), b),
            None => self.base().to_string(),
        };
        self.bases.push(base);

        enum Role {
            Root,
            Node,
            NestedNode,
            Property(Term),
            Skip,
        }
        let role = match self.stack.last() {
            None if iri == format!("{RDF_NS}RDF") => Role::Root,
            None | Some(Frame::Root) => Role::Node,
            Some(Frame::Node { subject }) => Role::Property(subject.clone()),
            Some(Frame::Property { mode: Mode::Resource, object: Some(o), .. }) => Role::Property(o.clone()),
            Some(Frame::Property { mode: Mode::Normal, .. }) => Role::NestedNode,
            Some(Frame::Property { mode: Mode::Collection, .. }) => Role::Node,
            Some(Frame::Property { .. }) | Some(Frame::Skip) => Role::Skip,
        };

        let frame = match role {
            Role::Root => Frame::Root,
            Role::Skip => Frame::Skip,
            Role::Node => {
                let subject = self.node_element(&iri, attrs);
                Frame::Node { subject }
            }
            Role::NestedNode => {
                let subject = self.node_element(&iri, attrs);
                if let Some(Frame::Property { object, .. }) = self.stack.last_mut() {
                    *object = Some(subject.clone());
                }
                Frame::Node { subject }
            }
            Role::Property(subject) => self.property_element(subject, iri, attrs),
        };
        self.stack.push(frame);
        Ok(())
    }

    fn node_element(&mut self, iri: &str, attrs: ElementAttrs) -> Term {
        let subject = if let Some(about) = &attrs.about {
            Term::Iri(resolve_iri(self.base(), about))
        } else if let Some(id) = &attrs.id {
            Term::Iri(resolve_iri(self.base(), &format!("#{id}")))
        } else if let Some(node_id) = &attrs.node_id {
            Term::Blank(blank_label_hash(node_id))
        } else {
            self.fresh_blank()
        };
        if iri != format!("{RDF_NS}Description") {
            self.emit(subject.clone(), format!("{RDF_NS}type"), Term::Iri(iri.to_string()));
        }
        if let Some(t) = &attrs.rdf_type {
            let t = resolve_iri(self.base(), t);
            self.emit(subject.clone(), format!("{RDF_NS}type"), Term::Iri(t));
        }
        for (p, v) in attrs.properties {
            self.emit(subject.clone(), p, Term::Literal(v));
        }
        subject
    }

    fn property_element(&mut self, subject: Term, predicate: String, attrs: ElementAttrs) -> Frame {
        let mode = match attrs.parse_type.as_deref() {
            Some("Resource") => Mode::Resource,
            Some("Collection") => Mode::Collection,
            Some(_) => Mode::Literal,
            None => Mode::Normal,
        };
        let object = match mode {
            Mode::Resource | Mode::Collection => Some(self.fresh_blank()),
            Mode::Literal => Some(Term::Literal(String::new())),
            Mode::Normal => {
                if let Some(r) = &attrs.resource {
                    Some(Term::Iri(resolve_iri(self.base(), r)))
                } else if let Some(n) = &attrs.node_id {
                    Some(Term::Blank(blank_label_hash(n)))
                } else if !attrs.properties.is_empty() || attrs.rdf_type.is_some() {
                    let b = self.fresh_blank();
                    if let Some(t) = &attrs.rdf_type {
                        let t = resolve_iri(self.base(), t);
                        self.emit(b.clone(), format!("{RDF_NS}type"), Term::Iri(t));
                    }
                    for (p, v) in &attrs.properties {
                        self.emit(b.clone(), p.clone(), Term::Literal(v.clone()));
                    }
                    Some(b)
                } else {
                    None
                }
            }
        };
        Frame::Property {
            subject,
            predicate,
            object,
            text: String::new(),
            mode,
        }
    }

    fn end(&mut self) {
        self.bases.pop();
        if let Some(Frame::Property {
            subject,
            predicate,
            object,
            text,
            ..
        }) = self.stack.pop()
        {
            let object = object.unwrap_or(Term::Literal(text));
            self.emit(subject, predicate, object);
        }
    }
}

/// Blank nodes named by `rdf:nodeID` get ids from the upper half of the id
/// space so they never collide with generated ones.
fn blank_label_hash(label: &str) -> u64 {
    (1 << 63) | (xxhash_rust::xxh3::xxh3_64(label.as_bytes()) >> 1)
}

/// Parses an RDF/XML ontology document.
///
/// Recognized: `owl:Class`, `rdfs:subClassOf` with named targets,
/// `owl:ObjectProperty`, `owl:DatatypeProperty`, `rdfs:domain`, `rdfs:range`,
/// `rdfs:label`. Anonymous class expressions and all other statements are
/// ignored. The ontology IRI comes from the first named `owl:Ontology`, else
/// it is empty.
pub fn parse_ontology(document: &[u8]) -> Result<Ontology> {
    let triples = TripleReader::new(document).run()?;

    let rdf_type = format!("{RDF_NS}type");
    let owl_class = format!("{OWL_NS}Class");
    let owl_ontology = format!("{OWL_NS}Ontology");
    let owl_object = format!("{OWL_NS}ObjectProperty");
    let owl_datatype = format!("{OWL_NS}DatatypeProperty");
    let subclass_of = format!("{RDFS_NS}subClassOf");
    let domain = format!("{RDFS_NS}domain");
    let range = format!("{RDFS_NS}range");
    let label = format!("{RDFS_NS}label");

    let mut b = OntologyBuilder::new("");
    let mut ontology_iri: Option<&str> = None;

    for t in &triples {
        let (Term::Iri(s), Term::Iri(o)) = (&t.subject, &t.object) else {
            continue;
        };
        if t.predicate != rdf_type {
            continue;
        }
        if *o == owl_class {
            b.concept(s.clone());
        } else if *o == owl_object {
            b.property(s.clone(), PropertyKind::Object);
        } else if *o == owl_datatype {
            b.property(s.clone(), PropertyKind::Datatype);
        } else if *o == owl_ontology && ontology_iri.is_none() {
            ontology_iri = Some(s);
        }
    }
    if let Some(iri) = ontology_iri {
        b.set_iri(iri);
    }

    for t in &triples {
        let Term::Iri(s) = &t.subject else { continue };
        match &t.object {
            Term::Iri(o) if t.predicate == subclass_of => {
                b.subclass(s.clone(), o.clone());
            }
            Term::Iri(o) if t.predicate == domain && b.is_property(s) => {
                b.domain(s, o.clone());
            }
            Term::Iri(o) if t.predicate == range && b.is_property(s) => {
                b.range(s, o.clone());
            }
            Term::Literal(l) if t.predicate == label => {
                let l = l.trim();
                if !l.is_empty() {
                    b.label(s.clone(), l);
                }
            }
            _ => {}
        }
    }
    Ok(b.build())
}

/// Serializes an ontology in the same RDF/XML subset [`parse_ontology`]
/// reads. Labels equal to the IRI fragment are omitted.
pub fn write_ontology(o: &Ontology) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<rdf:RDF xmlns:rdf=\"{RDF_NS}\"\n         xmlns:rdfs=\"{RDFS_NS}\"\n         xmlns:owl=\"{OWL_NS}\">"
    );
    if !o.iri().is_empty() {
        let _ = writeln!(out, "  <owl:Ontology rdf:about=\"{}\"/>", escape(o.iri()));
    }
    for c in o.concepts() {
        let _ = writeln!(out, "  <owl:Class rdf:about=\"{}\">", escape(c.as_str()));
        let label = o.concept_label(c).unwrap_or_default();
        if label != iri_fragment(c.as_str()) {
            let _ = writeln!(out, "    <rdfs:label>{}</rdfs:label>", escape(label));
        }
        for p in o.parents(c) {
            let _ = writeln!(out, "    <rdfs:subClassOf rdf:resource=\"{}\"/>", escape(p.as_str()));
        }
        out.push_str("  </owl:Class>\n");
    }
    for p in o.properties() {
        let tag = match p.kind {
            PropertyKind::Object => "owl:ObjectProperty",
            PropertyKind::Datatype => "owl:DatatypeProperty",
        };
        let _ = writeln!(out, "  <{tag} rdf:about=\"{}\">", escape(p.id.as_str()));
        if p.label != iri_fragment(p.id.as_str()) {
            let _ = writeln!(out, "    <rdfs:label>{}</rdfs:label>", escape(&p.label));
        }
        for d in &p.domains {
            let _ = writeln!(out, "    <rdfs:domain rdf:resource=\"{}\"/>", escape(d.as_str()));
        }
        for r in &p.ranges {
            let _ = writeln!(out, "    <rdfs:range rdf:resource=\"{}\"/>", escape(r.as_str()));
        }
        let _ = writeln!(out, "  </{tag}>");
    }
    out.push_str("</rdf:RDF>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::onto_io::{ConceptId, PropertyId};

    const HEADER: &str = r#"<?xml version="1.0"?>
<!DOCTYPE rdf:RDF [
  <!ENTITY owl "http://www.w3.org/2002/07/owl#" >
  <!ENTITY xsd "http://www.w3.org/2001/XMLSchema#" >
]>
<rdf:RDF xmlns="http://ex.org/conf#"
     xml:base="http://ex.org/conf"
     xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
     xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
     xmlns:owl="http://www.w3.org/2002/07/owl#">
  <owl:Ontology rdf:about=""/>
"#;

    fn doc(body: &str) -> String {
        format!("{HEADER}{body}</rdf:RDF>\n")
    }

    fn c(s: &str) -> ConceptId {
        ConceptId::new(format!("http://ex.org/conf#{s}"))
    }

    #[test]
    fn two_classes_one_edge() {
        let o = parse_ontology(
            doc(r##"
  <owl:Class rdf:about="#A"><rdfs:subClassOf rdf:resource="#B"/></owl:Class>
  <owl:Class rdf:ID="B"/>
"##)
            .as_bytes(),
        )
        .unwrap();
        assert_eq!(o.iri(), "http://ex.org/conf");
        assert_eq!(o.concepts().len(), 2);
        assert_eq!(o.subclass_edges().len(), 1);
        assert!(o.subclass_edges().contains(&(c("A"), c("B"))));
    }

    #[test]
    fn object_property_domain_range() {
        let o = parse_ontology(
            doc(r##"
  <owl:Class rdf:about="#A"/>
  <owl:Class rdf:about="#B"/>
  <owl:ObjectProperty rdf:about="#writes">
    <rdfs:domain rdf:resource="#A"/>
    <rdfs:range rdf:resource="#B"/>
  </owl:ObjectProperty>
  <owl:DatatypeProperty rdf:about="#hasName">
    <rdfs:domain><owl:Class rdf:about="#A"/></rdfs:domain>
    <rdfs:range rdf:resource="&xsd;string"/>
  </owl:DatatypeProperty>
"##)
            .as_bytes(),
        )
        .unwrap();
        let p = o.property(&PropertyId::new("http://ex.org/conf#writes")).unwrap();
        assert_eq!(p.kind, PropertyKind::Object);
        assert_eq!(p.domains.iter().collect::<Vec<_>>(), vec![&c("A")]);
        assert_eq!(p.ranges.iter().collect::<Vec<_>>(), vec![&c("B")]);
        let d = o.property(&PropertyId::new("http://ex.org/conf#hasName")).unwrap();
        assert_eq!(d.kind, PropertyKind::Datatype);
        assert!(d.ranges.is_empty());
        assert_eq!(d.label, "hasName");
        assert_eq!(o.concepts().len(), 2);
    }

    #[test]
    fn anonymous_classes_are_skipped() {
        let o = parse_ontology(
            doc(r##"
  <owl:Class rdf:about="#A">
    <rdfs:subClassOf>
      <owl:Restriction>
        <owl:onProperty rdf:resource="#writes"/>
        <owl:someValuesFrom rdf:resource="#B"/>
      </owl:Restriction>
    </rdfs:subClassOf>
    <rdfs:subClassOf rdf:resource="&owl;Thing"/>
    <rdfs:label xml:lang="en">Author &amp; co</rdfs:label>
  </owl:Class>
  <owl:Class>
    <owl:unionOf rdf:parseType="Collection">
      <owl:Class rdf:about="#A"/>
      <owl:Class rdf:about="#C"/>
    </owl:unionOf>
  </owl:Class>
"##)
            .as_bytes(),
        )
        .unwrap();
        // #C is declared inside the collection
        assert_eq!(o.concepts().len(), 2);
        assert!(o.subclass_edges().is_empty());
        assert_eq!(o.concept_label(&c("A")).unwrap(), "Author & co");
    }

    #[test]
    fn description_with_type_and_nested_subclass() {
        let o = parse_ontology(
            doc(r##"
  <rdf:Description rdf:about="#X">
    <rdf:type rdf:resource="&owl;Class"/>
    <rdfs:subClassOf><owl:Class rdf:about="#Y"/></rdfs:subClassOf>
  </rdf:Description>
"##)
            .as_bytes(),
        )
        .unwrap();
        assert_eq!(o.concepts().len(), 2);
        assert!(o.subclass_edges().contains(&(c("X"), c("Y"))));
    }

    #[test]
    fn malformed_xml_reports_offset() {
        let err = parse_ontology(b"<rdf:RDF><owl:Class></rdf:RDF>").unwrap_err();
        assert!(matches!(err, Error::Xml { .. }), "{err}");
        let err = parse_ontology(b"<a><b></b>").unwrap_err();
        assert!(matches!(err, Error::Xml { .. }), "{err}");
    }

    #[test]
    fn missing_ontology_iri_is_empty() {
        let o = parse_ontology(
            br#"<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
                xmlns:owl="http://www.w3.org/2002/07/owl#">
                <owl:Class rdf:about="urn:x:A"/></rdf:RDF>"#,
        )
        .unwrap();
        assert_eq!(o.iri(), "");
        assert_eq!(o.concepts().len(), 1);
    }

    #[test]
    fn writer_round_trips() {
        let mut b = OntologyBuilder::new("http://ex.org/w");
        b.concept("http://ex.org/w#A").label("http://ex.org/w#A", "An <A>");
        b.subclass("http://ex.org/w#B", "http://ex.org/w#A");
        b.property("http://ex.org/w#p", PropertyKind::Object)
            .domain("http://ex.org/w#p", "http://ex.org/w#A")
            .range("http://ex.org/w#p", "http://ex.org/w#B");
        b.property("http://ex.org/w#d", PropertyKind::Datatype)
            .domain("http://ex.org/w#d", "http://ex.org/w#B");
        let o = b.build();
        let back = parse_ontology(write_ontology(&o).as_bytes()).unwrap();
        assert_eq!(o, back);
    }
}
