#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "docforge/sha256.hpp"

namespace docforge {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// L2-normalized embedding; |norm - 1| <= 1e-6, all entries finite.
struct UnitVector {
    Vector values;

    static UnitVector normalized(Vector raw);
    int dimension() const { return static_cast<int>(values.size()); }
};

/// Checks the UnitVector invariants, throws ValidationError on violation.
void check_unit(const Eigen::Ref<const Vector>& v, const std::string& what);

class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual int dimension() const = 0;
    virtual UnitVector embed(std::string_view keyword) const = 0;
};

/// Deterministic stand-in for an external text-to-image-space encoder:
/// seeded hash of the keyword -> Gaussian vector -> normalize.
class SyntheticTextEmbedder : public TextEmbedder {
public:
    SyntheticTextEmbedder(int dimension, std::uint64_t seed) : dim_(dimension), seed_(seed) {}
    int dimension() const override { return dim_; }
    UnitVector embed(std::string_view keyword) const override;

private:
    int dim_;
    std::uint64_t seed_;
};

UnitVector embed_text(std::string_view keyword, std::uint64_t seed, int dimension = 64);

/// Searchable collection of unit-norm image embeddings.
class VectorStore {
public:
    VectorStore() = default;
    VectorStore(std::vector<std::uint64_t> ids, Matrix vectors);

    std::size_t size() const { return ids_.size(); }
    int dimension() const { return static_cast<int>(vectors_.cols()); }
    const std::vector<std::uint64_t>& ids() const { return ids_; }
    const Matrix& vectors() const { return vectors_; }
    Eigen::Ref<const Vector> row(std::size_t i) const { return vectors_.row(i).transpose(); }

    std::size_t index_of(std::uint64_t id) const;  // throws InvalidInput if absent

    /// SHA-256 over the row's d little-endian f32 values, exactly the bytes
    /// the DNVS file stores. Equal hash == byte-identical embedding.
    Digest256 content_hash(std::size_t i) const;

    void save(const std::string& path) const;
    static VectorStore load(const std::string& path);

private:
    std::vector<std::uint64_t> ids_;
    Matrix vectors_;  // n x d, rows unit-norm
    std::unordered_map<std::uint64_t, std::size_t> by_id_;
};

}  // namespace docforge
