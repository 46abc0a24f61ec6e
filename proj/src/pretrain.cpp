#include "docforge/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "docforge/encoding.hpp"
#include "docforge/error.hpp"
#include "docforge/rng.hpp"

namespace docforge {

namespace {

using nlohmann::json;

const char* action_name(MaskAction a) {
    switch (a) {
        case MaskAction::mask_token: return "mask";
        case MaskAction::random_token: return "random";
        case MaskAction::keep: return "keep";
    }
    return "unknown";
}

MaskAction action_from_name(const std::string& s) {
    if (s == "mask") return MaskAction::mask_token;
    if (s == "random") return MaskAction::random_token;
    if (s == "keep") return MaskAction::keep;
    throw InvalidInput("unknown mask action '" + s + "'");
}

}  // namespace

std::vector<std::size_t> MaskingPlan::positions() const {
    std::vector<std::size_t> out;
    out.reserve(masked.size());
    for (const auto& m : masked) {
        out.push_back(m.position);
    }
    return out;
}

MaskingPlan plan_masking(std::size_t n, std::uint64_t seed, const MaskingParams& params) {
    if (params.mask_fraction < 0.0 || params.mask_fraction > 1.0) {
        throw InvalidInput("plan_masking: mask fraction must be in [0, 1]");
    }
    if (params.p_mask < 0.0 || params.p_random < 0.0 || params.p_mask + params.p_random > 1.0) {
        throw InvalidInput("plan_masking: action probabilities must be >= 0 and sum to <= 1");
    }
    if (params.vocab_size <= 0) {
        throw InvalidInput("plan_masking: vocab size must be positive");
    }
    MaskingPlan plan;
    if (n <= 1) {
        return plan;  // nothing maskable besides [CLS]
    }
    const std::size_t want = static_cast<std::size_t>(std::floor(params.mask_fraction * static_cast<double>(n)));
    const std::size_t count = std::min(std::max<std::size_t>(want, 1), n - 1);

    Rng rng(seed);
    // sample `count` positions among 1..n-1, [CLS] at 0 excluded
    auto picks = rng.sample_without_replacement(n - 1, count);
    std::vector<std::size_t> positions;
    positions.reserve(count);
    for (const std::size_t p : picks) {
        positions.push_back(p + 1);
    }
    std::sort(positions.begin(), positions.end());

    std::unordered_set<std::int32_t> excluded(params.excluded_random_ids.begin(),
                                              params.excluded_random_ids.end());
    for (const std::size_t pos : positions) {
        PlannedMask m;
        m.position = pos;
        const double u = rng.uniform();
        if (u < params.p_mask) {
            m.action = MaskAction::mask_token;
        } else if (u < params.p_mask + params.p_random) {
            m.action = MaskAction::random_token;
            if (excluded.size() >= static_cast<std::size_t>(params.vocab_size)) {
                throw InvalidInput("plan_masking: no sampleable token ids");
            }
            std::int32_t id = 0;
            do {
                id = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(params.vocab_size)));
            } while (excluded.count(id) > 0);
            m.random_id = id;
        } else {
            m.action = MaskAction::keep;
        }
        plan.masked.push_back(m);
    }
    return plan;
}

PretrainExample assemble_example(const TokenSequence& seq, const std::optional<std::vector<TokenTags>>& tags,
                                 const MaskingPlan& plan, bool include_tt, std::int32_t mask_token_id) {
    const std::size_t n = seq.tokens.size();
    for (const auto& m : plan.masked) {
        if (m.position >= n) {
            throw InvalidInput("assemble_example: plan position beyond sequence length");
        }
    }
    if (include_tt && (!tags.has_value() || tags->size() != n)) {
        throw InvalidInput("assemble_example: TT requested but tags missing or wrong length");
    }

    PretrainExample ex;
    ex.doc_id = seq.doc_id;
    ex.plan = plan;
    ex.input_ids.reserve(n);
    ex.input_crops.reserve(n);
    ex.norm_boxes.reserve(n);
    for (const auto& t : seq.tokens) {
        ex.input_ids.push_back(t.text_id);
        ex.input_crops.push_back(t.crop);
        ex.norm_boxes.push_back(t.norm_box);
    }

    for (const auto& m : plan.masked) {
        const auto& tok = seq.tokens[m.position];
        ex.mlm_targets.emplace_back(m.position, tok.text_id);
        ex.mcm_targets.emplace_back(m.position, tok.crop);
        switch (m.action) {
            case MaskAction::mask_token:
                ex.input_ids[m.position] = mask_token_id;
                break;
            case MaskAction::random_token:
                ex.input_ids[m.position] = m.random_id;
                break;
            case MaskAction::keep:
                break;  // id unchanged, still a prediction target
        }
        // crops of all masked tokens are replaced with an empty image
        ex.input_crops[m.position].assign(tok.crop.size(), 0.0f);
    }
    if (include_tt) {
        ex.tag_targets = *tags;
    }
    return ex;
}

std::vector<bool> select_tt_subset(std::size_t example_count, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw InvalidInput("select_tt_subset: fraction must be in [0, 1]");
    }
    const std::size_t want =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(example_count)));
    Rng rng(seed);
    std::vector<bool> out(example_count, false);
    for (const std::size_t i : rng.sample_without_replacement(example_count, want)) {
        out[i] = true;
    }
    return out;
}

double pretrain_loss(double l_mmlm, double l_mcm, std::optional<double> l_tt, const LossWeights& weights) {
    if (weights.alpha < 0.0 || weights.beta < 0.0) {
        throw InvalidInput("pretrain_loss: loss weights must be >= 0");
    }
    double total = l_mmlm + weights.alpha * l_mcm;
    if (l_tt.has_value()) {
        total += weights.beta * *l_tt;
    }
    return total;
}

namespace {

void check_mlm_shapes(const Matrix& logits, std::span<const std::int32_t> targets) {
    if (static_cast<std::size_t>(logits.rows()) != targets.size()) {
        throw InvalidInput("mmlm: logit rows do not match target count");
    }
    if (logits.rows() == 0 || logits.cols() == 0) {
        throw InvalidInput("mmlm: empty logits");
    }
    for (const std::int32_t t : targets) {
        if (t < 0 || t >= logits.cols()) {
            throw InvalidInput("mmlm: target id out of vocab range");
        }
    }
    if (!logits.allFinite()) {
        throw InvalidInput("mmlm: non-finite logits");
    }
}

void check_tt_shapes(const Matrix& logits, const std::vector<TokenTags>& targets) {
    if (static_cast<std::size_t>(logits.rows()) != targets.size()) {
        throw InvalidInput("tt: logit rows do not match target count");
    }
    if (logits.cols() != static_cast<Eigen::Index>(kNumTagClasses)) {
        throw InvalidInput("tt: expected 6 logit columns");
    }
    if (!logits.allFinite()) {
        throw InvalidInput("tt: non-finite logits");
    }
}

}  // namespace

double mmlm_loss(const Matrix& logits, std::span<const std::int32_t> target_ids) {
    check_mlm_shapes(logits, target_ids);
    const Eigen::Index m = logits.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double mx = logits.row(i).maxCoeff();
        const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
        total += lse - logits(i, target_ids[static_cast<std::size_t>(i)]);
    }
    return total / static_cast<double>(m);
}

Matrix mmlm_loss_grad(const Matrix& logits, std::span<const std::int32_t> target_ids) {
    check_mlm_shapes(logits, target_ids);
    const Eigen::Index m = logits.rows();
    Matrix grad(m, logits.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
        const double mx = logits.row(i).maxCoeff();
        Eigen::ArrayXd e = (logits.row(i).array() - mx).exp();
        e /= e.sum();
        grad.row(i) = e.matrix().transpose();
        grad(i, target_ids[static_cast<std::size_t>(i)]) -= 1.0;
    }
    grad /= static_cast<double>(m);
    return grad;
}

double mcm_loss(const Matrix& pred_crops, const Matrix& target_crops) {
    if (pred_crops.rows() != target_crops.rows() || pred_crops.cols() != target_crops.cols()) {
        throw InvalidInput("mcm: prediction and target shapes differ");
    }
    if (pred_crops.rows() == 0) {
        throw InvalidInput("mcm: no masked positions");
    }
    const double total = (pred_crops - target_crops).array().square().sum();
    return total / static_cast<double>(pred_crops.rows());
}

Matrix mcm_loss_grad(const Matrix& pred_crops, const Matrix& target_crops) {
    if (pred_crops.rows() != target_crops.rows() || pred_crops.cols() != target_crops.cols()) {
        throw InvalidInput("mcm: prediction and target shapes differ");
    }
    if (pred_crops.rows() == 0) {
        throw InvalidInput("mcm: no masked positions");
    }
    return 2.0 * (pred_crops - target_crops) / static_cast<double>(pred_crops.rows());
}

double tt_loss(const Matrix& tag_logits, const std::vector<TokenTags>& targets) {
    check_tt_shapes(tag_logits, targets);
    const Eigen::Index n = tag_logits.rows();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < tag_logits.cols(); ++k) {
            const double x = tag_logits(i, k);
            const double t = targets[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] ? 1.0 : 0.0;
            // stable form of -t*log(sigmoid(x)) - (1-t)*log(1-sigmoid(x))
            total += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
        }
    }
    return total / static_cast<double>(n);
}

Matrix tt_loss_grad(const Matrix& tag_logits, const std::vector<TokenTags>& targets) {
    check_tt_shapes(tag_logits, targets);
    const Eigen::Index n = tag_logits.rows();
    Matrix grad(n, tag_logits.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < tag_logits.cols(); ++k) {
            const double x = tag_logits(i, k);
            const double t = targets[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] ? 1.0 : 0.0;
            const double sig = 1.0 / (1.0 + std::exp(-x));
            grad(i, k) = (sig - t) / static_cast<double>(n);
        }
    }
    return grad;
}

json example_to_json(const PretrainExample& ex) {
    json j;
    j["doc_id"] = ex.doc_id;
    j["input_ids"] = ex.input_ids;
    json nb = json::array();
    for (const auto& b : ex.norm_boxes) {
        nb.push_back(json::array({b.x0, b.y0, b.x1, b.y1, b.w, b.h}));
    }
    j["norm_boxes"] = std::move(nb);
    json positions = json::array();
    json actions = json::array();
    for (const auto& m : ex.plan.masked) {
        positions.push_back(m.position);
        json a;
        a["action"] = action_name(m.action);
        if (m.action == MaskAction::random_token) {
            a["id"] = m.random_id;
        }
        actions.push_back(std::move(a));
    }
    j["masked_positions"] = std::move(positions);
    j["actions"] = std::move(actions);
    json mlm = json::array();
    for (const auto& [pos, id] : ex.mlm_targets) {
        mlm.push_back(json::array({pos, id}));
    }
    j["mlm_targets"] = std::move(mlm);
    std::vector<float> mcm_flat;
    for (const auto& [pos, crop] : ex.mcm_targets) {
        mcm_flat.insert(mcm_flat.end(), crop.begin(), crop.end());
    }
    j["mcm_targets"] = floats_to_base64(mcm_flat);
    j["crop_dim"] = ex.mcm_targets.empty() ? 0 : ex.mcm_targets.front().second.size();
    if (ex.tag_targets.has_value()) {
        json tags = json::array();
        for (const auto& t : *ex.tag_targets) {
            tags.push_back(json::array({t[0], t[1], t[2], t[3], t[4], t[5]}));
        }
        j["tag_targets"] = std::move(tags);
    }
    return j;
}

PretrainExample example_from_json(const json& j) {
    PretrainExample ex;
    ex.doc_id = j.at("doc_id").get<std::string>();
    ex.input_ids = j.at("input_ids").get<std::vector<std::int32_t>>();
    for (const auto& nb : j.at("norm_boxes")) {
        ex.norm_boxes.push_back(NormBox{nb[0].get<int>(), nb[1].get<int>(), nb[2].get<int>(),
                                        nb[3].get<int>(), nb[4].get<int>(), nb[5].get<int>()});
    }
    const auto& positions = j.at("masked_positions");
    const auto& actions = j.at("actions");
    if (positions.size() != actions.size()) {
        throw ValidationError("masked_positions and actions disagree in length");
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
        PlannedMask m;
        m.position = positions[i].get<std::size_t>();
        m.action = action_from_name(actions[i].at("action").get<std::string>());
        if (m.action == MaskAction::random_token) {
            m.random_id = actions[i].at("id").get<std::int32_t>();
        }
        ex.plan.masked.push_back(m);
    }
    for (const auto& t : j.at("mlm_targets")) {
        ex.mlm_targets.emplace_back(t[0].get<std::size_t>(), t[1].get<std::int32_t>());
    }
    const auto mcm_flat = base64_to_floats(j.at("mcm_targets").get<std::string>());
    const std::size_t crop_dim = j.at("crop_dim").get<std::size_t>();
    if (crop_dim > 0) {
        if (mcm_flat.size() != crop_dim * ex.plan.masked.size()) {
            throw ValidationError("mcm_targets length mismatch");
        }
        for (std::size_t i = 0; i < ex.plan.masked.size(); ++i) {
            ex.mcm_targets.emplace_back(
                ex.plan.masked[i].position,
                std::vector<float>(mcm_flat.begin() + static_cast<std::ptrdiff_t>(i * crop_dim),
                                   mcm_flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * crop_dim)));
        }
    }
    if (j.contains("tag_targets")) {
        std::vector<TokenTags> tags;
        for (const auto& t : j["tag_targets"]) {
            TokenTags tt{};
            for (std::size_t k = 0; k < kNumTagClasses; ++k) {
                tt[k] = t[k].get<std::uint8_t>();
            }
            tags.push_back(tt);
        }
        ex.tag_targets = std::move(tags);
    }
    return ex;
}

}  // namespace docforge
