#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "triage/corpus.hpp"
#include "triage/error.hpp"
#include "triage/rng.hpp"
#include "triage/sectioner.hpp"

namespace triage {
namespace {

using Phrases = std::vector<std::string>;

// Body lines must never look like headers: every label before a colon is
// sentence-case, so the uppercase-ratio rule rejects it.
const Phrases kCancerDiagnosis = {
    "Invasive ductal carcinoma, grade {grade}.",
    "Adenocarcinoma, moderately differentiated.",
    "Invasive squamous cell carcinoma, keratinizing.",
    "Malignant melanoma, invasive to a depth of {mm} mm.",
    "Metastatic carcinoma involving {k} of {n} lymph nodes.",
    "High grade urothelial carcinoma with muscle invasion.",
    "Diffuse large B-cell lymphoma.",
    "Poorly differentiated carcinoma with lymphovascular invasion.",
};
const Phrases kBenignDiagnosis = {
    "Benign compound nevus, completely excised.",
    "Chronic inflammation, no evidence of malignancy.",
    "Fibroadenoma.",
    "Reactive lymphoid hyperplasia.",
    "Negative for dysplasia and malignancy.",
    "Tubular adenoma with low grade dysplasia.",
    "Seborrheic keratosis.",
    "Benign prostatic tissue, negative for tumour.",
};
const Phrases kNeutralDiagnosis = {
    "See microscopic description.",
    "Clinical correlation is recommended.",
    "Sections reviewed with a colleague.",
    "Tissue fragments examined in entirety.",
    "Additional levels examined.",
};
const Phrases kReportableDiagnosis = {
    "New primary malignancy of the {site}.",
    "Primary invasive tumour, first diagnosis.",
    "Carcinoma arising in the {site}, no prior history.",
};
const Phrases kNonReportableDiagnosis = {
    "Basal cell carcinoma of skin, nodular type.",
    "Cutaneous squamous cell carcinoma, well differentiated.",
    "Recurrence of previously reported tumour.",
};

const Phrases kCancerSynoptic = {
    "Tumour size: {size} cm",
    "Histologic grade: G{grade}",
    "Lymphovascular invasion: present",
    "Margins: involved by tumour",
    "Pathologic stage: pT{t} pN{nn}",
};
const Phrases kBenignSynoptic = {
    "Malignancy: not identified",
    "Dysplasia: absent",
    "Margins: not applicable",
    "Lesion type: benign",
    "Invasive tumour: not identified",
};
const Phrases kNeutralSynoptic = {
    "Procedure: excision",
    "Specimen laterality: {side}",
    "Specimen integrity: intact",
    "Fixation: formalin",
    "Checklist version: 4.{k}",
};
const Phrases kReportableSynoptic = {
    "Tumour behaviour: malignant primary",
    "Registry category: new primary",
    "Tumour site: {site}",
};
const Phrases kNonReportableSynoptic = {
    "Tumour site: skin non genital basal cell",
    "Prior history: same primary previously reported",
    "Registry category: excluded histology",
};

const Phrases kClinical = {
    "Rule out malignancy.",
    "Lesion noted on imaging.",
    "Follow up of prior biopsy.",
    "Screening procedure.",
};
const Phrases kSpecimen = {
    "Received in formalin, a {size} cm portion of {organ} tissue.",
    "Received fresh, multiple fragments of {organ} tissue aggregating {size} cm.",
    "Core biopsies of {organ}, {k} cores.",
};

const Phrases kSites = {"breast", "colon", "lung", "prostate", "bladder", "kidney"};
const Phrases kSides = {"left", "right", "not specified"};

const Phrases kClinicalHeaders = {"CLINICAL HISTORY:", "CLINICAL INFORMATION:"};
const Phrases kSpecimenHeaders = {"SPECIMEN(S) RECEIVED:", "SPECIMEN RECEIVED:", "GROSS DESCRIPTION:"};
const Phrases kSynopticHeaders = {"SYNOPTIC REPORT:", "SYNOPTIC DATA:", "CANCER CHECKLIST:"};
const Phrases kDiagnosisHeaders = {"FINAL DIAGNOSIS:", "DIAGNOSIS:", "PATHOLOGIC DIAGNOSIS:"};

std::string fill(std::string_view pattern, Rng& rng) {
  std::string out;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    const auto open = pattern.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(pattern.substr(pos));
      break;
    }
    const auto close = pattern.find('}', open);
    out.append(pattern.substr(pos, open - pos));
    const std::string_view key = pattern.substr(open + 1, close - open - 1);
    if (key == "size") {
      out += fmt::format("{:.1f}", 0.2 + static_cast<double>(rng.below(80)) / 10.0);
    } else if (key == "grade") {
      out += std::to_string(1 + rng.below(3));
    } else if (key == "mm") {
      out += fmt::format("{:.1f}", 0.3 + static_cast<double>(rng.below(50)) / 10.0);
    } else if (key == "k") {
      out += std::to_string(1 + rng.below(6));
    } else if (key == "n") {
      out += std::to_string(6 + rng.below(10));
    } else if (key == "t") {
      out += std::to_string(1 + rng.below(4));
    } else if (key == "nn") {
      out += std::to_string(rng.below(3));
    } else if (key == "side") {
      out += rng.pick(kSides);
    } else if (key == "site" || key == "organ") {
      out += rng.pick(kSites);
    }
    pos = close + 1;
  }
  return out;
}

struct Draw {
  Rng& rng;
  double strength;

  // A signal slot: the class phrase with probability `strength`, otherwise a
  // class-agnostic filler.
  std::string slot(const Phrases& signal, const Phrases& neutral) {
    return fill(rng.pick(rng.bernoulli(strength) ? signal : neutral), rng);
  }
};

std::string synoptic_body(Draw& d, std::optional<T2Label> t2, bool cancer) {
  std::string body;
  for (int i = 0; i < 2; ++i) body += d.slot(cancer ? kCancerSynoptic : kBenignSynoptic, kNeutralSynoptic) + "\n";
  if (t2) {
    const Phrases& phrases = *t2 == T2Label::kReportable ? kReportableSynoptic : kNonReportableSynoptic;
    for (int i = 0; i < 2; ++i) body += d.slot(phrases, kNeutralSynoptic) + "\n";
  }
  body += fill(d.rng.pick(kNeutralSynoptic), d.rng) + "\n";
  return body;
}

std::string diagnosis_body(Draw& d, std::optional<T2Label> t2, bool cancer) {
  std::string body;
  for (int i = 0; i < 2; ++i) body += d.slot(cancer ? kCancerDiagnosis : kBenignDiagnosis, kNeutralDiagnosis) + "\n";
  if (t2) {
    const Phrases& phrases = *t2 == T2Label::kReportable ? kReportableDiagnosis : kNonReportableDiagnosis;
    for (int i = 0; i < 2; ++i) body += d.slot(phrases, kNeutralDiagnosis) + "\n";
  }
  body += fill(d.rng.pick(kNeutralDiagnosis), d.rng) + "\n";
  return body;
}

void check_fraction(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw ValidationError(fmt::format("{} must be in [0, 1], got {}", name, value));
  }
}

}  // namespace

Corpus synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.n_reports < 0) throw ValidationError("n_reports must be >= 0");
  check_fraction(spec.cancer_fraction, "cancer_fraction");
  check_fraction(spec.reportable_fraction_within_cancer, "reportable_fraction_within_cancer");
  check_fraction(spec.vocabulary_signal_strength, "vocabulary_signal_strength");

  const auto n = static_cast<std::size_t>(spec.n_reports);
  const auto n_cancer = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.cancer_fraction));
  const auto n_reportable =
      static_cast<std::size_t>(std::llround(static_cast<double>(n_cancer) * spec.reportable_fraction_within_cancer));

  struct Labels {
    T1Label t1;
    std::optional<T2Label> t2;
  };
  std::vector<Labels> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_reportable) {
      labels.push_back({T1Label::kCancer, T2Label::kReportable});
    } else if (i < n_cancer) {
      labels.push_back({T1Label::kCancer, T2Label::kNonReportable});
    } else {
      labels.push_back({T1Label::kNonCancer, std::nullopt});
    }
  }

  Rng rng(seed);
  rng.shuffle(labels);
  Draw draw{rng, spec.vocabulary_signal_strength};
  const SectionSynonymTable& table = SectionSynonymTable::builtin();

  Corpus corpus;
  corpus.provenance["generator"] = "synth";
  corpus.provenance["seed"] = std::to_string(seed);
  corpus.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool cancer = labels[i].t1 == T1Label::kCancer;
    std::string raw;
    if (rng.bernoulli(0.5)) raw += "Report prepared for registry review.\n";
    raw += rng.pick(kClinicalHeaders) + "\n" + fill(rng.pick(kClinical), rng) + "\n";
    raw += rng.pick(kSpecimenHeaders) + "\n" + fill(rng.pick(kSpecimen), rng) + "\n";

    const std::string synoptic = rng.pick(kSynopticHeaders) + "\n" + synoptic_body(draw, labels[i].t2, cancer);
    const std::string diagnosis = rng.pick(kDiagnosisHeaders) + "\n" + diagnosis_body(draw, labels[i].t2, cancer);
    raw += rng.bernoulli(0.5) ? synoptic + diagnosis : diagnosis + synoptic;

    LabeledReport rec;
    rec.report.report_id = fmt::format("SYN{:06d}", i + 1);
    rec.report.diagnosis_year = 2022 + static_cast<int>(rng.below(2));
    rec.report.source_site = fmt::format("site-{:02d}", 1 + rng.below(5));
    rec.report.sections = parse_sections(raw, table);
    rec.report.raw_text = std::move(raw);
    rec.t1_label = labels[i].t1;
    rec.t2_label = labels[i].t2;
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

}  // namespace triage
