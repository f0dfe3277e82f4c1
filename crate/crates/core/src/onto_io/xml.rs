//! Shared XML plumbing: DOCTYPE entities, text/attribute unescaping, IRI
//! resolution and error mapping.

use std::collections::HashMap;

use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::attributes::Attribute;
use quick_xml::events::{BytesRef, BytesText};
use quick_xml::XmlVersion;

use crate::Error;

/// Internal general entities declared in a DOCTYPE, e.g.
/// `<!ENTITY owl "http://www.w3.org/2002/07/owl#">`.
#[derive(Debug, Default, Clone)]
pub(crate) struct Entities {
    map: HashMap<String, String>,
}

impl Entities {
    pub(crate) fn from_doctype(doctype: &str) -> Self {
        let mut map = HashMap::new();
        let mut rest = doctype;
        while let Some(pos) = rest.find("<!ENTITY") {
            rest = &rest[pos + "<!ENTITY".len()..];
            let decl = rest.trim_start();
            // parameter entities are not used in attribute values
            if decl.starts_with('%') {
                continue;
            }
            let name_end = decl
                .find(|c: char| c.is_whitespace())
                .unwrap_or(decl.len());
            let name = &decl[..name_end];
            let after = decl[name_end..].trim_start();
            let Some(quote) = after.chars().next().filter(|c| *c == '"' || *c == '\'') else {
                continue;
            };
            if let Some(end) = after[1..].find(quote) {
                map.entry(name.to_string())
                    .or_insert_with(|| after[1..1 + end].to_string());
            }
        }
        // entity values may reference earlier entities
        let snapshot = map.clone();
        for value in map.values_mut() {
            if value.contains('&') {
                *value = expand_refs(value, &snapshot);
            }
        }
        Entities { map }
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.map
            .get(name)
            .map(String::as_str)
            .or_else(|| resolve_predefined_entity(name))
    }

    pub(crate) fn attribute_value(&self, attr: &Attribute<'_>, offset: u64) -> Result<String, Error> {
        attr.normalized_value_with(XmlVersion::Implicit1_0, 16, |name| self.get(name))
            .map(|v| v.into_owned())
            .map_err(|e| xml_error(offset, e))
    }

    pub(crate) fn push_text(&self, out: &mut String, text: &BytesText<'_>) {
        out.push_str(&text.xml10_content());
    }

    pub(crate) fn push_ref(&self, out: &mut String, r: &BytesRef<'_>, offset: u64) -> Result<(), Error> {
        if let Some(ch) = r.resolve_char_ref().map_err(|e| xml_error(offset, e))? {
            out.push(ch);
            return Ok(());
        }
        let name = r.xml10_content();
        match self.get(&name) {
            Some(v) => {
                out.push_str(v);
                Ok(())
            }
            None => Err(Error::Xml {
                offset,
                message: format!("undeclared entity `&{name};`"),
            }),
        }
    }
}

fn expand_refs(value: &str, entities: &HashMap<String, String>) -> String {
    let mut out = String::with_capacity(value.len());
    let mut rest = value;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp + 1..];
        match tail.find(';') {
            Some(semi) if entities.contains_key(&tail[..semi]) => {
                out.push_str(&entities[&tail[..semi]]);
                rest = &tail[semi + 1..];
            }
            _ => {
                out.push('&');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

pub(crate) fn xml_error(offset: u64, e: impl std::fmt::Display) -> Error {
    Error::Xml {
        offset,
        message: e.to_string(),
    }
}

/// Resolves an IRI reference against a base. Absolute references are kept
/// verbatim so that IRIs compare equal to those in alignment files.
pub(crate) fn resolve_iri(base: &str, reference: &str) -> String {
    if has_scheme(reference) {
        return reference.to_string();
    }
    let base_no_frag = base.split('#').next().unwrap_or("");
    if reference.is_empty() {
        return base_no_frag.to_string();
    }
    if reference.starts_with('#') {
        return format!("{base_no_frag}{reference}");
    }
    if let Some(rest) = reference.strip_prefix("//") {
        let scheme = base.split(':').next().unwrap_or("http");
        return format!("{scheme}://{rest}");
    }
    if reference.starts_with('/') {
        if let Some(idx) = base_no_frag.find("://") {
            let after = &base_no_frag[idx + 3..];
            let authority_end = after.find('/').map(|i| idx + 3 + i).unwrap_or(base_no_frag.len());
            return format!("{}{}", &base_no_frag[..authority_end], reference);
        }
        return reference.to_string();
    }
    if let Some(idx) = base_no_frag.find("://") {
        if !base_no_frag[idx + 3..].contains('/') {
            return format!("{base_no_frag}/{reference}");
        }
    }
    match base_no_frag.rfind('/') {
        Some(slash) => format!("{}{}", &base_no_frag[..=slash], reference),
        None => format!("{base_no_frag}{reference}"),
    }
}

fn has_scheme(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}
