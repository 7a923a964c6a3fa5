#include "divkit/splits.hpp"

#include <json.hpp>

#include "divkit/semantic.hpp"
#include "divkit/textproc.hpp"

namespace divkit {

const char* to_string(SplitAxis a) {
  switch (a) {
    case SplitAxis::caption_length: return "caption_length";
    case SplitAxis::concept_label: return "concept_label";
    case SplitAxis::sample_variance: return "sample_variance";
  }
  return "?";
}

SplitAxis parse_split_axis(const std::string& s) {
  if (s == "caption_length") return SplitAxis::caption_length;
  if (s == "concept_label") return SplitAxis::concept_label;
  if (s == "sample_variance") return SplitAxis::sample_variance;
  throw InputError("unknown split axis '" + s + "'");
}

std::string SplitFile::to_json() const {
  nlohmann::json doc;
  doc["axis"] = divkit::to_string(axis);
  doc["bins"] = nlohmann::json::object();
  for (const auto& [name, ids] : bins) doc["bins"][name] = ids;
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

namespace {

void quantile_split(const CaptionDataset& dataset, const std::vector<double>& values, int bins, SplitFile& out) {
  const auto assigned = quantile_bins(values, static_cast<std::size_t>(bins));
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    out.bins["q" + std::to_string(assigned[i] + 1)].push_back(dataset.samples[i].id);
}

}  // namespace

SplitFile generate_splits(const CaptionDataset& dataset, const SplitSpec& spec, const EmbeddingStore* embeddings,
                          const LabelSet* labels) {
  SplitFile out;
  out.axis = spec.axis;
  out.seed = spec.seed;
  if (spec.axis != SplitAxis::concept_label && spec.bins < 2) throw InputError("quantile splits need at least 2 bins");

  switch (spec.axis) {
    case SplitAxis::caption_length: {
      std::vector<double> lengths;
      for (const auto& s : dataset.samples) {
        double total = 0;
        for (const auto& r : s.references) total += static_cast<double>(tokenize(r).size());
        lengths.push_back(s.references.empty() ? 0.0 : total / static_cast<double>(s.references.size()));
      }
      quantile_split(dataset, lengths, spec.bins, out);
      break;
    }
    case SplitAxis::concept_label: {
      if (!labels) throw InputError("concept_label splits need a label set");
      for (const auto& l : labels->labels) out.bins[l];
      out.bins["none"];
      for (const auto& s : dataset.samples) {
        std::vector<std::string> lowered;
        for (const auto& r : s.references) lowered.push_back(lowercase(r));
        bool any = false;
        for (const auto& l : labels->labels) {
          for (const auto& r : lowered)
            if (r.find(l) != std::string::npos) {
              out.bins[l].push_back(s.id);
              any = true;
              break;
            }
        }
        if (!any) out.bins["none"].push_back(s.id);
      }
      break;
    }
    case SplitAxis::sample_variance: {
      if (!embeddings) throw InputError("sample_variance splits need embeddings");
      // Samples with fewer than two unique captions have no spread: variance 0.
      std::vector<double> values;
      for (const auto& v : sample_variance(dataset, *embeddings).per_sample) values.push_back(v.value_or(0.0));
      quantile_split(dataset, values, spec.bins, out);
      break;
    }
  }
  return out;
}

}  // namespace divkit
