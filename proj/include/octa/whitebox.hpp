#pragma once
// White-box classification: supervised 3-bin discretization, the fixed
// decision-tree / SVM / DL rule sets, a trainable Gini decision tree with
// rule extraction, and the majority-vote ensemble.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "octa/biomarkers.hpp"

namespace octa::wb {

enum class Label : std::uint8_t { Sick, NotSick };

// Rule systems that do not cover an input abstain; the ensemble resolves it.
enum class Vote : std::uint8_t { Sick, NotSick, Abstain };

const char* to_string(Label l);
const char* to_string(Vote v);
std::optional<Label> parse_label(const std::string& s);
inline Vote to_vote(Label l) { return l == Label::Sick ? Vote::Sick : Vote::NotSick; }

// One-hot small/medium/big indicators for the two area features.
struct DiscretizedFeatures {
    int m_small = 0, m_medium = 0, m_big = 0;
    int v_small = 0, v_medium = 0, v_big = 0;
};

// 3-bin boundaries per feature, mm^2. Bins are closed on the upper edge:
// value <= cut1 is small, cut1 < value <= cut2 is medium.
struct Cuts {
    double m_cut1 = 0.0, m_cut2 = 0.0;
    double v_cut1 = 0.0, v_cut2 = 0.0;
    // Set when a feature had fewer than 3 distinct values and fell back to
    // range tertiles.
    bool m_fallback = false, v_fallback = false;
};

// Exhaustive entropy-minimizing search over midpoint cut pairs, per feature
// independently, targeting the Sick/NotSick column. Ties pick the smallest
// cut pair lexicographically. Requires >= 3 records and both labels.
Cuts discretize_supervised(const std::vector<bio::BiomarkerRecord>& records,
                           const std::vector<Label>& labels);

DiscretizedFeatures apply_cuts(const bio::BiomarkerRecord& record, const Cuts& cuts);

struct Condition {
    enum class Op : std::uint8_t { LE, GT, LT };
    std::string feature;  // mcnv_area_mm2, total_area_mm2, m_small, ... v_big
    Op op = Op::LE;
    double value = 0.0;
};

struct Rule {
    std::vector<Condition> conditions;  // conjunction, non-empty
    Label consequent = Label::Sick;
    std::string source;  // DT | SVM | DL
};

bool rule_matches(const Rule& rule, const bio::BiomarkerRecord& record,
                  const DiscretizedFeatures& f);

nlohmann::json rules_to_json(const std::vector<Rule>& rules);
std::vector<Rule> rules_from_json(const nlohmann::json& j);

// The published rule tables. Thresholds are mm^2 for the decision-tree
// rules and 0.5 indicator comparisons for the SVM/DL ones. Two of the DL
// conjunctions pair bins of the same feature and can never fire under the
// one-hot invariant; they are kept verbatim.
std::vector<Rule> dt_table_rules();
std::vector<Rule> svm_table_rules();
std::vector<Rule> dl_table_rules();

// Exhaustive and mutually exclusive over the (mcnv, vessel) plane.
Label dt_rules_classify(const bio::BiomarkerRecord& record);
Vote svm_rules_classify(const DiscretizedFeatures& f);
Vote dl_rules_classify(const DiscretizedFeatures& f);

// Majority vote with abstentions excluded; ties and all-abstain fall back
// to the decision-tree verdict.
Label ensemble_classify(const bio::BiomarkerRecord& record, const DiscretizedFeatures& f);

// Binary CART over (mcnv_area, total_area). Nodes are stored in a flat
// vector; leaves carry the majority label with ties resolved to Sick.
struct DecisionTree {
    struct Node {
        bool is_leaf = true;
        Label leaf = Label::Sick;
        int feature = -1;  // 0 = mcnv_area_mm2, 1 = total_area_mm2
        double threshold = 0.0;
        int left = -1;   // value <= threshold
        int right = -1;  // value > threshold
    };
    std::vector<Node> nodes;  // nodes[0] is the root
    int max_depth = 3;

    Label classify(const bio::BiomarkerRecord& record) const;
    int depth() const;
};

// Greedy Gini splits; candidate thresholds are midpoints of sorted distinct
// values; ties prefer the smaller threshold, then mcnv over total area.
DecisionTree train_decision_tree(const std::vector<bio::BiomarkerRecord>& records,
                                 const std::vector<Label>& labels, int max_depth = 3);

// One rule per leaf (root-to-leaf path conjunction); mutually exclusive and
// exhaustive, and equivalent to the tree on every input.
std::vector<Rule> extract_dt_rules(const DecisionTree& tree);

// Deterministic stratified split. Per label stratum, round(n * ratio) ids
// go to train.
std::pair<std::vector<std::string>, std::vector<std::string>> train_test_split(
    const std::vector<std::string>& ids, const std::vector<Label>& labels, double ratio,
    std::uint64_t seed);

double accuracy(const std::vector<Label>& predictions, const std::vector<Label>& truth);

}  // namespace octa::wb
