#include "docforge/bio.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "docforge/error.hpp"

namespace docforge {

BioSequence bio_encode(std::span<const EntitySpan> spans, std::size_t n) {
    BioSequence tags(n);
    std::vector<bool> taken(n, false);
    for (const auto& span : spans) {
        if (span.start > span.end || span.end >= n) {
            throw InvalidInput("bio_encode: span (" + span.type + ", " + std::to_string(span.start) +
                               ", " + std::to_string(span.end) + ") out of bounds for n=" +
                               std::to_string(n));
        }
        for (std::size_t i = span.start; i <= span.end; ++i) {
            if (taken[i]) {
                throw OverlapError("bio_encode: overlapping spans at token " + std::to_string(i));
            }
            taken[i] = true;
            tags[i] = BioTag{i == span.start ? BioTag::B : BioTag::I, span.type};
        }
    }
    return tags;
}

std::vector<EntitySpan> bio_decode(const BioSequence& tags) {
    std::vector<EntitySpan> spans;
    bool open = false;
    EntitySpan current;
    auto close = [&](std::size_t end) {
        if (open) {
            current.end = end;
            spans.push_back(current);
            open = false;
        }
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const BioTag& t = tags[i];
        if (t.kind == BioTag::O) {
            close(i - 1);
        } else if (t.kind == BioTag::B || !open || current.type != t.type) {
            // B always opens; a dangling or type-switching I opens leniently
            close(i - 1);
            current = EntitySpan{t.type, i, i};
            open = true;
        }
    }
    close(tags.empty() ? 0 : tags.size() - 1);
    return spans;
}

PrfReport prf_from_counts(const std::map<std::string, PrfCounts>& counts) {
    auto rate = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    auto f1_of = [](double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); };

    PrfReport report;
    report.counts = counts;
    PrfCounts total;
    for (const auto& [type, c] : counts) {
        TypeMetrics m;
        m.precision = rate(c.tp, c.predicted);
        m.recall = rate(c.tp, c.gold);
        m.f1 = f1_of(m.precision, m.recall);
        m.support = c.gold;
        report.per_type.emplace(type, m);
        total.tp += c.tp;
        total.predicted += c.predicted;
        total.gold += c.gold;
    }
    report.micro.precision = rate(total.tp, total.predicted);
    report.micro.recall = rate(total.tp, total.gold);
    report.micro.f1 = f1_of(report.micro.precision, report.micro.recall);
    report.micro.support = total.gold;
    return report;
}

PrfReport entity_prf(std::span<const EntitySpan> pred, std::span<const EntitySpan> gold) {
    const std::set<EntitySpan> pred_set(pred.begin(), pred.end());
    const std::set<EntitySpan> gold_set(gold.begin(), gold.end());

    std::map<std::string, PrfCounts> counts;
    for (const auto& s : pred_set) {
        ++counts[s.type].predicted;
        if (gold_set.count(s) > 0) {
            ++counts[s.type].tp;
        }
    }
    for (const auto& s : gold_set) {
        ++counts[s.type].gold;
    }
    return prf_from_counts(counts);
}

std::vector<BioTag> bio_class_order(std::span<const std::string> types) {
    std::vector<std::string> sorted(types.begin(), types.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<BioTag> order;
    order.push_back(BioTag{BioTag::O, ""});
    for (const auto& t : sorted) {
        order.push_back(BioTag{BioTag::B, t});
        order.push_back(BioTag{BioTag::I, t});
    }
    return order;
}

namespace {

double softmax_cross_entropy(const Eigen::Ref<const Eigen::RowVectorXd>& logits, Eigen::Index target) {
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    return lse - logits[target];
}

}  // namespace

double ee_loss(const Matrix& tag_logits, const BioSequence& gold, std::span<const std::string> types) {
    const auto order = bio_class_order(types);
    if (tag_logits.cols() != static_cast<Eigen::Index>(order.size())) {
        throw InvalidInput("ee_loss: expected " + std::to_string(order.size()) + " BIO classes, got " +
                           std::to_string(tag_logits.cols()));
    }
    if (static_cast<std::size_t>(tag_logits.rows()) != gold.size() || gold.empty()) {
        throw InvalidInput("ee_loss: logit rows must match the non-empty gold sequence");
    }
    if (!tag_logits.allFinite()) {
        throw InvalidInput("ee_loss: non-finite logits");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto it = std::find(order.begin(), order.end(), gold[i]);
        if (it == order.end()) {
            throw InvalidInput("ee_loss: gold tag type not in the type set");
        }
        total += softmax_cross_entropy(tag_logits.row(static_cast<Eigen::Index>(i)),
                                       static_cast<Eigen::Index>(it - order.begin()));
    }
    return total / static_cast<double>(gold.size());
}

double dc_loss(const Vector& cls_logits, std::size_t label) {
    if (cls_logits.size() == 0) {
        throw InvalidInput("dc_loss: empty logits");
    }
    if (label >= static_cast<std::size_t>(cls_logits.size())) {
        throw InvalidInput("dc_loss: label out of range");
    }
    if (!cls_logits.allFinite()) {
        throw InvalidInput("dc_loss: non-finite logits");
    }
    return softmax_cross_entropy(cls_logits.transpose(), static_cast<Eigen::Index>(label));
}

double dc_accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw InvalidInput("dc_accuracy: prediction and label counts must match and be non-empty");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace docforge
