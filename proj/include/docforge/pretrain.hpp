#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "docforge/embedding.hpp"
#include "docforge/tagger.hpp"
#include "docforge/tokenizer.hpp"

namespace docforge {

enum class MaskAction : std::uint8_t {
    mask_token = 0,
    random_token = 1,
    keep = 2,
};

struct PlannedMask {
    std::size_t position = 0;
    MaskAction action = MaskAction::mask_token;
    std::int32_t random_id = -1;  // set iff action == random_token

    bool operator==(const PlannedMask&) const = default;
};

struct MaskingParams {
    double mask_fraction = 0.15;
    double p_mask = 0.8;
    double p_random = 0.1;  // remainder keeps the token
    std::int32_t vocab_size = 30522;
    // specials never sampled as replacements; defaults are the BERT-uncased
    // ids of [PAD], [UNK], [CLS], [MASK]
    std::vector<std::int32_t> excluded_random_ids = {0, 100, 101, 103};
};

/// Sorted masked positions with their 80/10/10 actions. Position 0 ([CLS]) is
/// never masked; |M| = min(max(1, floor(fraction * n)), n - 1), so n <= 1
/// yields an empty plan.
struct MaskingPlan {
    std::vector<PlannedMask> masked;

    std::vector<std::size_t> positions() const;
};

MaskingPlan plan_masking(std::size_t n, std::uint64_t seed, const MaskingParams& params = {});

/// Model-agnostic training example: masked inputs plus the targets needed to
/// evaluate MMLM / MCM / TT losses downstream.
struct PretrainExample {
    std::string doc_id;
    std::vector<std::int32_t> input_ids;        // after masking
    std::vector<std::vector<float>> input_crops;  // masked positions zeroed
    std::vector<NormBox> norm_boxes;
    MaskingPlan plan;
    std::vector<std::pair<std::size_t, std::int32_t>> mlm_targets;
    std::vector<std::pair<std::size_t, std::vector<float>>> mcm_targets;
    std::optional<std::vector<TokenTags>> tag_targets;
};

PretrainExample assemble_example(const TokenSequence& seq, const std::optional<std::vector<TokenTags>>& tags,
                                 const MaskingPlan& plan, bool include_tt, std::int32_t mask_token_id);

/// Deterministic subset of round(fraction * count) examples that carry TT targets.
std::vector<bool> select_tt_subset(std::size_t example_count, double fraction, std::uint64_t seed);

struct LossWeights {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Mean over masked positions of softmax cross-entropy (log-sum-exp stabilized).
/// logits: one row per masked position over the vocab.
double mmlm_loss(const Matrix& logits, std::span<const std::int32_t> target_ids);

/// Mean over masked positions of squared L2 distance over pixel dims.
double mcm_loss(const Matrix& pred_crops, const Matrix& target_crops);

/// Mean over tokens of the sum over the K=6 classes of sigmoid binary
/// cross-entropy, numerically stabilized.
double tt_loss(const Matrix& tag_logits, const std::vector<TokenTags>& targets);

/// MMLM + alpha * MCM + beta * TT; a missing TT contributes zero.
double pretrain_loss(double l_mmlm, double l_mcm, std::optional<double> l_tt, const LossWeights& weights);

Matrix mmlm_loss_grad(const Matrix& logits, std::span<const std::int32_t> target_ids);
Matrix mcm_loss_grad(const Matrix& pred_crops, const Matrix& target_crops);
Matrix tt_loss_grad(const Matrix& tag_logits, const std::vector<TokenTags>& targets);

nlohmann::json example_to_json(const PretrainExample& ex);
PretrainExample example_from_json(const nlohmann::json& j);

}  // namespace docforge
