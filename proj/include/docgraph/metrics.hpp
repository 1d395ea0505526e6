#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace docgraph {

struct EntitySpan {
  int begin = 0;  // inclusive token index
  int end = 0;    // exclusive
  std::string label;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

/// Maximal BIO spans. An I-X that does not continue an X entity opens a new
/// one (conlleval convention).
std::vector<EntitySpan> extract_spans(const std::vector<std::string>& tags);

struct LabelCounts {
  long long true_positives = 0;
  long long predicted = 0;
  long long gold = 0;
};

struct EntityMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long long true_positives = 0;
  long long predicted = 0;
  long long gold = 0;
  bool no_gold_entities = false;  // set when the gold side has no entities at all
  std::map<std::string, LabelCounts> per_label;
};

/// Micro-averaged exact-match entity scores. Throws LengthMismatch when a
/// predicted sequence and its gold sequence differ in length.
EntityMetrics evaluate_entities(const std::vector<std::vector<std::string>>& predicted,
                                const std::vector<std::vector<std::string>>& gold);
EntityMetrics evaluate_entities(const std::vector<std::string>& predicted, const std::vector<std::string>& gold);

struct ConvergenceRow {
  std::string name;
  int epochs_to_threshold = 0;  // 1-based
  double final_f1 = 0;
};

/// Smallest 1-based epoch whose value reaches `fraction` of the final value.
int epochs_to_fraction(const std::vector<double>& curve, double fraction = 0.9);

std::vector<ConvergenceRow> convergence_report(const std::vector<std::pair<std::string, std::vector<double>>>& curves,
                                               double fraction = 0.9);

/// epoch,<name1>,<name2>,... rows for plotting.
std::string curves_csv(const std::vector<std::pair<std::string, std::vector<double>>>& curves);
std::string convergence_table(const std::vector<ConvergenceRow>& rows);

struct SignTest {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;  // one-sided: P(X >= wins), X ~ Binomial(wins + losses, 1/2)
};

SignTest paired_sign_test(const std::vector<double>& treatment, const std::vector<double>& control);

}  // namespace docgraph
