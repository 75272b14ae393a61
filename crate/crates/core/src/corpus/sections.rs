//! Splitting a note into named sections by header lines.

use serde::{Deserialize, Serialize};

/// Name given to text that precedes the first recognised header.
pub const PREAMBLE: &str = "_preamble";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    /// Canonical section name.
    pub name: String,
    /// Header text exactly as it appeared, including leading whitespace.
    /// Empty for the preamble.
    pub header: String,
    pub body: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionedDocument {
    pub id: String,
    pub sections: Vec<Section>,
}

impl SectionedDocument {
    /// Concatenated bodies of all sections with the given canonical name
    /// (case-insensitive).
    pub fn bodies_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.sections
            .iter()
            .filter(move |s| s.name.eq_ignore_ascii_case(name))
            .map(|s| s.body.as_str())
    }

    /// Preamble, headers and bodies in order; equals the source text.
    pub fn reconstruct(&self) -> String {
        self.sections
            .iter()
            .flat_map(|s| [s.header.as_str(), s.body.as_str()])
            .collect()
    }
}

/// Case-insensitive header patterns mapped to canonical section names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderSet {
    /// (lowercased pattern, canonical name), longest pattern first.
    entries: Vec<(String, String)>,
}

impl HeaderSet {
    pub fn new<P: AsRef<str>, C: AsRef<str>>(entries: impl IntoIterator<Item = (P, C)>) -> Self {
        let mut entries: Vec<(String, String)> = entries
            .into_iter()
            .map(|(p, c)| (p.as_ref().to_lowercase(), c.as_ref().to_string()))
            .filter(|(p, _)| !p.is_empty())
            .collect();
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        entries.dedup_by(|a, b| a.0 == b.0);
        HeaderSet { entries }
    }

    /// Headers of discharge summaries, with common aliases. Sections that are
    /// not part of either language group are still listed so that their text
    /// does not leak into the preceding section.
    pub fn discharge_summary() -> Self {
        Self::new([
            ("History of Present Illness:", "History of present illness"),
            ("HPI:", "History of present illness"),
            ("Brief Hospital Course:", "Brief hospital course"),
            ("Hospital Course:", "Brief hospital course"),
            ("Discharge Instructions:", "Discharge instruction"),
            ("Discharge Instruction:", "Discharge instruction"),
            ("Followup Instructions:", "Followup instruction"),
            ("Followup Instruction:", "Followup instruction"),
            ("Follow-up Instructions:", "Followup instruction"),
            ("Follow up Instructions:", "Followup instruction"),
            ("Chief Complaint:", "Chief complaint"),
            ("Major Surgical or Invasive Procedure:", "Procedure"),
            ("Past Medical History:", "Past medical history"),
            ("Social History:", "Social history"),
            ("Family History:", "Family history"),
            ("Physical Exam:", "Physical exam"),
            ("Pertinent Results:", "Pertinent results"),
            ("Medications on Admission:", "Medications on admission"),
            ("Discharge Medications:", "Discharge medications"),
            ("Discharge Disposition:", "Discharge disposition"),
            ("Discharge Diagnosis:", "Discharge diagnosis"),
            ("Discharge Condition:", "Discharge condition"),
            ("Allergies:", "Allergies"),
        ])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Canonical names, deduplicated, in sorted order.
    pub fn canonical_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.entries.iter().map(|(_, c)| c.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
    }

    pub fn knows(&self, name: &str) -> bool {
        self.entries.iter().any(|(_, c)| c.eq_ignore_ascii_case(name))
    }

    /// Length in bytes of the header at the start of `line` (after leading
    /// whitespace), with its canonical name.
    fn match_line<'a>(&'a self, line: &str) -> Option<(usize, &'a str)> {
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        self.entries.iter().find_map(|(pattern, canonical)| {
            let head = trimmed.get(..pattern.len())?;
            head.eq_ignore_ascii_case(pattern)
                .then(|| (indent + pattern.len(), canonical.as_str()))
        })
    }
}

/// Split a document into sections. Headers are matched at the start of a line.
pub fn segment_sections(doc: &RawDocument, headers: &HeaderSet) -> SectionedDocument {
    let mut sections: Vec<Section> = Vec::new();
    let mut current = Section {
        name: PREAMBLE.to_string(),
        header: String::new(),
        body: String::new(),
    };
    for line in doc.text.split_inclusive('\n') {
        match headers.match_line(line) {
            Some((header_len, canonical)) => {
                if current.name != PREAMBLE || !current.body.is_empty() {
                    sections.push(current);
                }
                current = Section {
                    name: canonical.to_string(),
                    header: line[..header_len].to_string(),
                    body: line[header_len..].to_string(),
                };
            }
            None => current.body.push_str(line),
        }
    }
    if current.name != PREAMBLE || !current.body.is_empty() {
        sections.push(current);
    }
    SectionedDocument {
        id: doc.id.clone(),
        sections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> RawDocument {
        RawDocument {
            id: "n1".into(),
            text: text.into(),
        }
    }

    #[test]
    fn two_sections() {
        let d = doc("History of Present Illness:\n65 yo male...\nBrief Hospital Course:\nPt admitted...");
        let s = segment_sections(&d, &HeaderSet::discharge_summary());
        assert_eq!(s.sections.len(), 2);
        assert_eq!(s.sections[0].name, "History of present illness");
        assert_eq!(s.sections[0].body.trim(), "65 yo male...");
        assert_eq!(s.sections[1].name, "Brief hospital course");
        assert_eq!(s.sections[1].body.trim(), "Pt admitted...");
        assert_eq!(s.reconstruct(), d.text);
    }

    #[test]
    fn empty_document() {
        let s = segment_sections(&doc(""), &HeaderSet::discharge_summary());
        assert!(s.sections.is_empty());
    }

    #[test]
    fn no_headers_is_preamble() {
        let text = "just some text\nwith lines";
        let s = segment_sections(&doc(text), &HeaderSet::discharge_summary());
        assert_eq!(s.sections.len(), 1);
        assert_eq!(s.sections[0].name, PREAMBLE);
        assert_eq!(s.sections[0].body, text);
    }

    #[test]
    fn case_insensitive_alias_and_empty_body() {
        let text = "Admission note\n  hpi: cough\nDISCHARGE INSTRUCTIONS:\nFollowup Instructions:\nsee pcp";
        let s = segment_sections(&doc(text), &HeaderSet::discharge_summary());
        let names: Vec<_> = s.sections.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            [PREAMBLE, "History of present illness", "Discharge instruction", "Followup instruction"]
        );
        assert_eq!(s.sections[1].body, " cough\n");
        assert_eq!(s.sections[2].body, "\n");
        assert_eq!(s.reconstruct(), text);
    }

    #[test]
    fn longest_alias_wins() {
        // "Hospital Course:" must not shadow "Brief Hospital Course:"
        let s = segment_sections(&doc("Brief Hospital Course: ok"), &HeaderSet::discharge_summary());
        assert_eq!(s.sections[0].header, "Brief Hospital Course:");
    }
}
