#include "docgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>

#include "docgraph/error.hpp"

namespace docgraph {

namespace {

std::pair<char, std::string> split_tag(const std::string& tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') return {tag[0], tag.substr(2)};
  return {'O', {}};
}

}  // namespace

std::vector<EntitySpan> extract_spans(const std::vector<std::string>& tags) {
  std::vector<EntitySpan> spans;
  std::optional<EntitySpan> open;
  auto close = [&](int at) {
    if (open) {
      open->end = at;
      spans.push_back(*open);
      open.reset();
    }
  };
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    auto [kind, label] = split_tag(tags[static_cast<std::size_t>(i)]);
    if (kind == 'O') {
      close(i);
    } else if (kind == 'B' || !open || open->label != label) {
      close(i);
      open = EntitySpan{i, i, label};
    }
  }
  close(static_cast<int>(tags.size()));
  return spans;
}

EntityMetrics evaluate_entities(const std::vector<std::vector<std::string>>& predicted,
                                const std::vector<std::vector<std::string>>& gold) {
  if (predicted.size() != gold.size()) throw Error(ErrorCode::LengthMismatch, "sequence counts differ");
  EntityMetrics m;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (predicted[s].size() != gold[s].size()) {
      throw Error(ErrorCode::LengthMismatch, "sequence " + std::to_string(s) + " lengths differ");
    }
    const auto pred_spans = extract_spans(predicted[s]);
    const auto gold_spans = extract_spans(gold[s]);
    const std::set<EntitySpan> gold_set(gold_spans.begin(), gold_spans.end());
    for (const auto& g : gold_spans) ++m.per_label[g.label].gold;
    for (const auto& p : pred_spans) {
      ++m.per_label[p.label].predicted;
      if (gold_set.count(p)) ++m.per_label[p.label].true_positives;
    }
    m.gold += static_cast<long long>(gold_spans.size());
    m.predicted += static_cast<long long>(pred_spans.size());
  }
  for (const auto& [label, c] : m.per_label) m.true_positives += c.true_positives;
  m.no_gold_entities = m.gold == 0;
  m.precision = m.predicted ? static_cast<double>(m.true_positives) / static_cast<double>(m.predicted) : 0.0;
  m.recall = m.gold ? static_cast<double>(m.true_positives) / static_cast<double>(m.gold) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

EntityMetrics evaluate_entities(const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
  return evaluate_entities(std::vector<std::vector<std::string>>{predicted},
                           std::vector<std::vector<std::string>>{gold});
}

int epochs_to_fraction(const std::vector<double>& curve, double fraction) {
  if (curve.empty()) throw Error(ErrorCode::EmptyHistory, "no epochs recorded");
  const double target = fraction * curve.back();
  for (std::size_t e = 0; e < curve.size(); ++e) {
    if (curve[e] >= target) return static_cast<int>(e) + 1;
  }
  return static_cast<int>(curve.size());
}

std::vector<ConvergenceRow> convergence_report(const std::vector<std::pair<std::string, std::vector<double>>>& curves,
                                               double fraction) {
  if (curves.empty()) throw Error(ErrorCode::EmptyHistory, "no curves given");
  std::vector<ConvergenceRow> rows;
  for (const auto& [name, curve] : curves) {
    if (curve.size() != curves.front().second.size()) {
      throw Error(ErrorCode::LengthMismatch, name + " has a different epoch count");
    }
    rows.push_back(ConvergenceRow{name, epochs_to_fraction(curve, fraction), curve.empty() ? 0.0 : curve.back()});
  }
  return rows;
}

std::string curves_csv(const std::vector<std::pair<std::string, std::vector<double>>>& curves) {
  std::string out = "epoch";
  std::size_t epochs = 0;
  for (const auto& [name, curve] : curves) {
    out += "," + name;
    epochs = std::max(epochs, curve.size());
  }
  out += "\n";
  char buf[64];
  for (std::size_t e = 0; e < epochs; ++e) {
    out += std::to_string(e + 1);
    for (const auto& [name, curve] : curves) {
      if (e < curve.size()) {
        std::snprintf(buf, sizeof buf, ",%.6f", curve[e]);
        out += buf;
      } else {
        out += ",";
      }
    }
    out += "\n";
  }
  return out;
}

std::string convergence_table(const std::vector<ConvergenceRow>& rows) {
  std::string out = "arm,epochs_to_90pct_final,final_f1\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.6f\n", r.name.c_str(), r.epochs_to_threshold, r.final_f1);
    out += buf;
  }
  return out;
}

SignTest paired_sign_test(const std::vector<double>& treatment, const std::vector<double>& control) {
  if (treatment.size() != control.size()) throw Error(ErrorCode::LengthMismatch, "paired samples differ in length");
  SignTest t;
  for (std::size_t i = 0; i < treatment.size(); ++i) {
    if (treatment[i] > control[i]) {
      ++t.wins;
    } else if (treatment[i] < control[i]) {
      ++t.losses;
    } else {
      ++t.ties;
    }
  }
  const int n = t.wins + t.losses;
  double p = 0;
  for (int k = t.wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  t.p_value = n == 0 ? 1.0 : std::min(1.0, p);
  return t;
}

}  // namespace docgraph
