#include "octa/whitebox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace octa::wb {

const char* to_string(Label l) { return l == Label::Sick ? "Sick" : "NotSick"; }

const char* to_string(Vote v) {
    switch (v) {
        case Vote::Sick: return "Sick";
        case Vote::NotSick: return "NotSick";
        default: return "Abstain";
    }
}

std::optional<Label> parse_label(const std::string& s) {
    if (s == "Sick") return Label::Sick;
    if (s == "NotSick") return Label::NotSick;
    return std::nullopt;
}

namespace {

double entropy2(std::size_t sick, std::size_t notsick) {
    const std::size_t n = sick + notsick;
    if (n == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : {sick, notsick}) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
    }
    return h;
}

struct FeatureCuts {
    double c1 = 0.0;
    double c2 = 0.0;
    bool fallback = false;
};

FeatureCuts discretize_feature(const std::vector<double>& values, const std::vector<Label>& labels) {
    std::vector<double> distinct(values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    FeatureCuts out;
    if (distinct.size() < 3) {
        // Too few levels for a supervised 3-way split; fall back to range
        // tertiles and flag it.
        out.fallback = true;
        const double lo = distinct.front();
        const double hi = distinct.back();
        if (lo == hi) {
            out.c1 = lo - 0.5;
            out.c2 = lo + 0.5;
        } else {
            out.c1 = lo + (hi - lo) / 3.0;
            out.c2 = lo + 2.0 * (hi - lo) / 3.0;
        }
        return out;
    }

    std::vector<double> candidates(distinct.size() - 1);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates[i] = (distinct[i] + distinct[i + 1]) / 2.0;

    const double n = static_cast<double>(values.size());
    double best = std::numeric_limits<double>::infinity();
    // Ascending (i,j) enumeration makes strict improvement equivalent to the
    // lexicographically-smallest tie rule.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            std::size_t sick[3] = {0, 0, 0};
            std::size_t notsick[3] = {0, 0, 0};
            for (std::size_t k = 0; k < values.size(); ++k) {
                const int bin = values[k] <= candidates[i] ? 0 : (values[k] <= candidates[j] ? 1 : 2);
                (labels[k] == Label::Sick ? sick : notsick)[bin]++;
            }
            double total = 0.0;
            for (int b = 0; b < 3; ++b)
                total += (static_cast<double>(sick[b] + notsick[b]) / n) * entropy2(sick[b], notsick[b]);
            if (total < best) {
                best = total;
                out.c1 = candidates[i];
                out.c2 = candidates[j];
            }
        }
    }
    return out;
}

}  // namespace

Cuts discretize_supervised(const std::vector<bio::BiomarkerRecord>& records,
                           const std::vector<Label>& labels) {
    if (records.size() != labels.size())
        throw std::invalid_argument("discretize_supervised: records/labels size mismatch");
    if (records.size() < 3) throw std::invalid_argument("discretize_supervised: needs >= 3 records");
    const bool has_sick = std::find(labels.begin(), labels.end(), Label::Sick) != labels.end();
    const bool has_notsick = std::find(labels.begin(), labels.end(), Label::NotSick) != labels.end();
    if (!has_sick || !has_notsick)
        throw std::invalid_argument("discretize_supervised: both labels must be present");

    std::vector<double> mcnv(records.size());
    std::vector<double> total(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        mcnv[i] = records[i].mcnv_area_mm2;
        total[i] = records[i].total_area_mm2;
    }

    const FeatureCuts m = discretize_feature(mcnv, labels);
    const FeatureCuts v = discretize_feature(total, labels);
    Cuts cuts;
    cuts.m_cut1 = m.c1;
    cuts.m_cut2 = m.c2;
    cuts.m_fallback = m.fallback;
    cuts.v_cut1 = v.c1;
    cuts.v_cut2 = v.c2;
    cuts.v_fallback = v.fallback;
    return cuts;
}

DiscretizedFeatures apply_cuts(const bio::BiomarkerRecord& record, const Cuts& cuts) {
    if (!(cuts.m_cut1 < cuts.m_cut2) || !(cuts.v_cut1 < cuts.v_cut2))
        throw std::invalid_argument("apply_cuts: cuts must be strictly ordered");
    DiscretizedFeatures f;
    const double m = record.mcnv_area_mm2;
    const double v = record.total_area_mm2;
    f.m_small = m <= cuts.m_cut1 ? 1 : 0;
    f.m_medium = (m > cuts.m_cut1 && m <= cuts.m_cut2) ? 1 : 0;
    f.m_big = m > cuts.m_cut2 ? 1 : 0;
    f.v_small = v <= cuts.v_cut1 ? 1 : 0;
    f.v_medium = (v > cuts.v_cut1 && v <= cuts.v_cut2) ? 1 : 0;
    f.v_big = v > cuts.v_cut2 ? 1 : 0;
    return f;
}

namespace {

double feature_value(const std::string& name, const bio::BiomarkerRecord& record,
                     const DiscretizedFeatures& f) {
    if (name == "mcnv_area_mm2") return record.mcnv_area_mm2;
    if (name == "total_area_mm2") return record.total_area_mm2;
    if (name == "m_small") return f.m_small;
    if (name == "m_medium") return f.m_medium;
    if (name == "m_big") return f.m_big;
    if (name == "v_small") return f.v_small;
    if (name == "v_medium") return f.v_medium;
    if (name == "v_big") return f.v_big;
    throw std::invalid_argument("rule references unknown feature: " + name);
}

const char* op_name(Condition::Op op) {
    switch (op) {
        case Condition::Op::LE: return "<=";
        case Condition::Op::GT: return ">";
        default: return "<";
    }
}

Condition::Op parse_op(const std::string& s) {
    if (s == "<=") return Condition::Op::LE;
    if (s == ">") return Condition::Op::GT;
    if (s == "<") return Condition::Op::LT;
    throw std::invalid_argument("rule condition has unknown comparator: " + s);
}

Condition cond(const char* feature, Condition::Op op, double value) {
    return Condition{feature, op, value};
}

}  // namespace

bool rule_matches(const Rule& rule, const bio::BiomarkerRecord& record,
                  const DiscretizedFeatures& f) {
    if (rule.conditions.empty()) throw std::invalid_argument("rule has an empty antecedent");
    for (const Condition& c : rule.conditions) {
        const double v = feature_value(c.feature, record, f);
        const bool ok = c.op == Condition::Op::LE   ? v <= c.value
                        : c.op == Condition::Op::GT ? v > c.value
                                                    : v < c.value;
        if (!ok) return false;
    }
    return true;
}

nlohmann::json rules_to_json(const std::vector<Rule>& rules) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Rule& r : rules) {
        nlohmann::json conds = nlohmann::json::array();
        for (const Condition& c : r.conditions)
            conds.push_back({{"feature", c.feature}, {"op", op_name(c.op)}, {"value", c.value}});
        arr.push_back({{"source", r.source}, {"label", to_string(r.consequent)}, {"conditions", conds}});
    }
    return arr;
}

std::vector<Rule> rules_from_json(const nlohmann::json& j) {
    std::vector<Rule> rules;
    for (const auto& rj : j) {
        Rule r;
        r.source = rj.value("source", "");
        const auto label = parse_label(rj.at("label").get<std::string>());
        if (!label) throw std::invalid_argument("rule JSON: unknown label");
        r.consequent = *label;
        for (const auto& cj : rj.at("conditions"))
            r.conditions.push_back(Condition{cj.at("feature").get<std::string>(),
                                             parse_op(cj.at("op").get<std::string>()),
                                             cj.at("value").get<double>()});
        if (r.conditions.empty()) throw std::invalid_argument("rule JSON: empty antecedent");
        rules.push_back(std::move(r));
    }
    return rules;
}

std::vector<Rule> dt_table_rules() {
    using Op = Condition::Op;
    std::vector<Rule> rules;
    rules.push_back({{cond("mcnv_area_mm2", Op::LE, 0.01)}, Label::NotSick, "DT"});
    rules.push_back({{cond("mcnv_area_mm2", Op::GT, 0.01), cond("total_area_mm2", Op::LE, 0.02)},
                     Label::Sick,
                     "DT"});
    rules.push_back({{cond("mcnv_area_mm2", Op::GT, 0.01), cond("total_area_mm2", Op::GT, 0.02),
                      cond("mcnv_area_mm2", Op::LE, 0.03)},
                     Label::NotSick,
                     "DT"});
    rules.push_back({{cond("mcnv_area_mm2", Op::GT, 0.01), cond("total_area_mm2", Op::GT, 0.02),
                      cond("mcnv_area_mm2", Op::GT, 0.03)},
                     Label::Sick,
                     "DT"});
    return rules;
}

std::vector<Rule> svm_table_rules() {
    using Op = Condition::Op;
    std::vector<Rule> rules;
    rules.push_back({{cond("m_small", Op::LE, 0.5), cond("m_medium", Op::LE, 0.5)}, Label::Sick, "SVM"});
    // The published table lists this row twice (R2 and R3); one copy suffices.
    rules.push_back({{cond("m_small", Op::LE, 0.5), cond("m_medium", Op::GT, 0.5),
                      cond("v_medium", Op::LT, 0.5), cond("v_small", Op::LT, 0.5)},
                     Label::NotSick,
                     "SVM"});
    return rules;
}

std::vector<Rule> dl_table_rules() {
    using Op = Condition::Op;
    auto indicator = [](const char* name) { return cond(name, Op::GT, 0.5); };
    std::vector<Rule> rules;
    // Same-feature conjunctions (rows 1 and 4) are unsatisfiable under the
    // one-hot bins and never fire; kept verbatim from the table.
    rules.push_back({{indicator("v_big"), indicator("v_medium")}, Label::Sick, "DL"});
    rules.push_back({{indicator("m_big"), indicator("v_medium")}, Label::Sick, "DL"});
    rules.push_back({{indicator("m_small"), indicator("v_medium")}, Label::Sick, "DL"});
    rules.push_back({{indicator("v_medium"), indicator("v_small")}, Label::Sick, "DL"});
    rules.push_back({{indicator("m_small"), indicator("v_medium")}, Label::Sick, "DL"});
    rules.push_back({{indicator("m_small"), indicator("v_medium")}, Label::Sick, "DL"});
    return rules;
}

Label dt_rules_classify(const bio::BiomarkerRecord& record) {
    static const std::vector<Rule> rules = dt_table_rules();
    const DiscretizedFeatures dummy;
    for (const Rule& r : rules)
        if (rule_matches(r, record, dummy)) return r.consequent;
    throw std::logic_error("dt_rules_classify: rules failed to cover the input");
}

Vote svm_rules_classify(const DiscretizedFeatures& f) {
    static const std::vector<Rule> rules = svm_table_rules();
    const bio::BiomarkerRecord dummy;
    for (const Rule& r : rules)
        if (rule_matches(r, dummy, f)) return to_vote(r.consequent);
    return Vote::Abstain;
}

Vote dl_rules_classify(const DiscretizedFeatures& f) {
    static const std::vector<Rule> rules = dl_table_rules();
    const bio::BiomarkerRecord dummy;
    for (const Rule& r : rules)
        if (rule_matches(r, dummy, f)) return to_vote(r.consequent);
    return Vote::Abstain;
}

Label ensemble_classify(const bio::BiomarkerRecord& record, const DiscretizedFeatures& f) {
    const Label dt = dt_rules_classify(record);
    const Vote votes[3] = {to_vote(dt), svm_rules_classify(f), dl_rules_classify(f)};
    int sick = 0;
    int notsick = 0;
    for (Vote v : votes) {
        if (v == Vote::Sick) ++sick;
        if (v == Vote::NotSick) ++notsick;
    }
    if (sick > notsick) return Label::Sick;
    if (notsick > sick) return Label::NotSick;
    return dt;  // tie-break: the strongest individual classifier
}

Label DecisionTree::classify(const bio::BiomarkerRecord& record) const {
    if (nodes.empty()) throw std::logic_error("DecisionTree: empty tree");
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        const double v = n.feature == 0 ? record.mcnv_area_mm2 : record.total_area_mm2;
        i = v <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].leaf;
}

int DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    int deepest = 0;
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        const Node& n = nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf) {
            deepest = std::max(deepest, d);
        } else {
            stack.push_back({n.left, d + 1});
            stack.push_back({n.right, d + 1});
        }
    }
    return deepest;
}

namespace {

double gini(std::size_t sick, std::size_t notsick) {
    const double n = static_cast<double>(sick + notsick);
    if (n == 0.0) return 0.0;
    const double ps = static_cast<double>(sick) / n;
    const double pn = static_cast<double>(notsick) / n;
    return 1.0 - ps * ps - pn * pn;
}

struct TrainSample {
    double f[2];
    Label y;
};

Label majority(const std::vector<const TrainSample*>& samples) {
    std::size_t sick = 0;
    for (const TrainSample* s : samples) sick += s->y == Label::Sick;
    const std::size_t notsick = samples.size() - sick;
    return sick >= notsick ? Label::Sick : Label::NotSick;  // tie favors Sick
}

int build_node(std::vector<DecisionTree::Node>& nodes,
               const std::vector<const TrainSample*>& samples, int depth_left) {
    std::size_t sick = 0;
    for (const TrainSample* s : samples) sick += s->y == Label::Sick;
    const std::size_t notsick = samples.size() - sick;

    const int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (sick == 0 || notsick == 0 || depth_left == 0) {
        nodes[static_cast<std::size_t>(self)].leaf = majority(samples);
        return self;
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = std::numeric_limits<double>::infinity();
    for (int feat = 0; feat < 2; ++feat) {
        std::vector<double> values;
        values.reserve(samples.size());
        for (const TrainSample* s : samples) values.push_back(s->f[feat]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());

        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double thr = (values[i] + values[i + 1]) / 2.0;
            std::size_t ls = 0, ln = 0, rs = 0, rn = 0;
            for (const TrainSample* s : samples) {
                if (s->f[feat] <= thr)
                    (s->y == Label::Sick ? ls : ln)++;
                else
                    (s->y == Label::Sick ? rs : rn)++;
            }
            const double nl = static_cast<double>(ls + ln);
            const double nr = static_cast<double>(rs + rn);
            const double imp = (nl * gini(ls, ln) + nr * gini(rs, rn)) / (nl + nr);
            const bool better =
                imp < best_impurity ||
                (imp == best_impurity &&
                 (thr < best_threshold || (thr == best_threshold && feat < best_feature)));
            if (better) {
                best_impurity = imp;
                best_feature = feat;
                best_threshold = thr;
            }
        }
    }

    if (best_feature < 0) {  // single distinct value on both features
        nodes[static_cast<std::size_t>(self)].leaf = majority(samples);
        return self;
    }

    std::vector<const TrainSample*> left, right;
    for (const TrainSample* s : samples)
        (s->f[best_feature] <= best_threshold ? left : right).push_back(s);

    const int l = build_node(nodes, left, depth_left - 1);
    const int r = build_node(nodes, right, depth_left - 1);
    DecisionTree::Node& n = nodes[static_cast<std::size_t>(self)];
    n.is_leaf = false;
    n.feature = best_feature;
    n.threshold = best_threshold;
    n.left = l;
    n.right = r;
    return self;
}

}  // namespace

DecisionTree train_decision_tree(const std::vector<bio::BiomarkerRecord>& records,
                                 const std::vector<Label>& labels, int max_depth) {
    if (records.size() != labels.size())
        throw std::invalid_argument("train_decision_tree: records/labels size mismatch");
    if (records.size() < 2) throw std::invalid_argument("train_decision_tree: needs >= 2 records");
    if (max_depth < 1) throw std::invalid_argument("train_decision_tree: max_depth must be >= 1");

    std::vector<TrainSample> samples(records.size());
    std::vector<const TrainSample*> ptrs(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        samples[i] = {{records[i].mcnv_area_mm2, records[i].total_area_mm2}, labels[i]};
        ptrs[i] = &samples[i];
    }

    DecisionTree tree;
    tree.max_depth = max_depth;
    build_node(tree.nodes, ptrs, max_depth);
    return tree;
}

namespace {

void collect_rules(const DecisionTree& tree, int node, std::vector<Condition>& path,
                   std::vector<Rule>& out) {
    const DecisionTree::Node& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf) {
        Rule r;
        r.conditions = path;
        if (r.conditions.empty()) {
            // Single-leaf tree: emit a tautological bound so the antecedent
            // stays non-empty.
            r.conditions.push_back(
                Condition{"mcnv_area_mm2", Condition::Op::GT, -std::numeric_limits<double>::infinity()});
        }
        r.consequent = n.leaf;
        r.source = "DT";
        out.push_back(std::move(r));
        return;
    }
    const char* feature = n.feature == 0 ? "mcnv_area_mm2" : "total_area_mm2";
    path.push_back(Condition{feature, Condition::Op::LE, n.threshold});
    collect_rules(tree, n.left, path, out);
    path.back().op = Condition::Op::GT;
    collect_rules(tree, n.right, path, out);
    path.pop_back();
}

}  // namespace

std::vector<Rule> extract_dt_rules(const DecisionTree& tree) {
    if (tree.nodes.empty()) throw std::invalid_argument("extract_dt_rules: empty tree");
    std::vector<Rule> rules;
    std::vector<Condition> path;
    collect_rules(tree, 0, path, rules);
    return rules;
}

std::pair<std::vector<std::string>, std::vector<std::string>> train_test_split(
    const std::vector<std::string>& ids, const std::vector<Label>& labels, double ratio,
    std::uint64_t seed) {
    if (ids.size() != labels.size())
        throw std::invalid_argument("train_test_split: ids/labels size mismatch");
    if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("train_test_split: ratio outside [0,1]");

    std::mt19937_64 rng(seed);
    std::vector<std::string> train, test;
    for (Label stratum : {Label::Sick, Label::NotSick}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (labels[i] == stratum) idx.push_back(i);
        // Fisher-Yates with an explicit draw so the split is reproducible
        // across standard libraries.
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng() % i]);
        const std::size_t n_train =
            static_cast<std::size_t>(std::llround(ratio * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_train ? train : test).push_back(ids[idx[i]]);
    }
    return {std::move(train), std::move(test)};
}

double accuracy(const std::vector<Label>& predictions, const std::vector<Label>& truth) {
    if (predictions.size() != truth.size())
        throw std::invalid_argument("accuracy: prediction/truth length mismatch");
    if (predictions.empty()) throw std::invalid_argument("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace octa::wb
