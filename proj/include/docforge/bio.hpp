#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "docforge/embedding.hpp"

namespace docforge {

/// Entity occurrence over token indices, both ends inclusive.
struct EntitySpan {
    std::string type;
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const EntitySpan&) const = default;
    auto operator<=>(const EntitySpan&) const = default;
};

struct BioTag {
    enum Kind : std::uint8_t { O = 0, B = 1, I = 2 };
    Kind kind = O;
    std::string type;  // empty iff kind == O

    bool operator==(const BioTag&) const = default;
};

using BioSequence = std::vector<BioTag>;

/// All-O initialized; span (T, i, j) sets B-T at i and I-T at i+1..j.
/// Overlapping spans -> OverlapError; out-of-bounds -> InvalidInput.
BioSequence bio_encode(std::span<const EntitySpan> spans, std::size_t n);

/// Lenient total decoding: I-T without a preceding B-T/I-T opens a span;
/// a type change inside an I run opens a new span.
std::vector<EntitySpan> bio_decode(const BioSequence& tags);

struct TypeMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // gold span count
};

struct PrfCounts {
    std::size_t tp = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;
};

struct PrfReport {
    std::map<std::string, TypeMetrics> per_type;
    TypeMetrics micro;
    std::map<std::string, PrfCounts> counts;
};

/// Exact-match (type, start, end) span scoring; micro aggregates from the
/// summed counts. Duplicate spans in either list count once.
PrfReport entity_prf(std::span<const EntitySpan> pred, std::span<const EntitySpan> gold);

/// Report from precomputed per-type counts (merging documents, fixtures).
PrfReport prf_from_counts(const std::map<std::string, PrfCounts>& counts);

/// BIO class order for logits: O, then per sorted type B-T, I-T.
std::vector<BioTag> bio_class_order(std::span<const std::string> types);

/// Mean token-level softmax cross-entropy over 2 * |types| + 1 BIO classes.
double ee_loss(const Matrix& tag_logits, const BioSequence& gold, std::span<const std::string> types);

/// Softmax cross-entropy of one document-classification head output.
double dc_loss(const Vector& cls_logits, std::size_t label);

double dc_accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

}  // namespace docforge
