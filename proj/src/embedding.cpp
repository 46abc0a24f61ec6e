#include "docforge/embedding.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "docforge/error.hpp"
#include "docforge/ontology.hpp"
#include "docforge/rng.hpp"

namespace docforge {

namespace {
constexpr char kMagic[4] = {'D', 'N', 'V', 'S'};
constexpr std::uint32_t kVersion = 1;

void row_to_f32(const Eigen::Ref<const Vector>& row, std::vector<float>* out) {
    out->resize(row.size());
    for (Eigen::Index i = 0; i < row.size(); ++i) {
        (*out)[i] = static_cast<float>(row[i]);
    }
}
}  // namespace

UnitVector UnitVector::normalized(Vector raw) {
    const double norm = raw.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw InvalidInput("cannot normalize a zero or non-finite vector");
    }
    UnitVector out;
    out.values = raw / norm;
    return out;
}

void check_unit(const Eigen::Ref<const Vector>& v, const std::string& what) {
    if (!v.allFinite()) {
        throw ValidationError(what + ": non-finite entries");
    }
    const double norm = v.norm();
    if (std::abs(norm - 1.0) > 1e-6) {
        throw ValidationError(what + ": L2 norm " + std::to_string(norm) + " is not 1 within 1e-6");
    }
}

UnitVector SyntheticTextEmbedder::embed(std::string_view keyword) const {
    return embed_text(keyword, seed_, dim_);
}

UnitVector embed_text(std::string_view keyword, std::uint64_t seed, int dimension) {
    if (keyword.empty()) {
        throw InvalidInput("embed_text: empty keyword");
    }
    if (dimension <= 0) {
        throw InvalidInput("embed_text: dimension must be positive");
    }
    const std::string norm = normalize_keyword(std::string(keyword));
    Rng rng(fnv1a64(norm) ^ splitmix64(seed));
    Vector v(dimension);
    for (int i = 0; i < dimension; ++i) {
        v[i] = rng.gaussian();
    }
    return UnitVector::normalized(std::move(v));
}

VectorStore::VectorStore(std::vector<std::uint64_t> ids, Matrix vectors)
    : ids_(std::move(ids)), vectors_(std::move(vectors)) {
    if (ids_.size() != static_cast<std::size_t>(vectors_.rows())) {
        throw InvalidInput("vector store: id count does not match row count");
    }
    by_id_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!by_id_.emplace(ids_[i], i).second) {
            throw ValidationError("vector store: duplicate image id " + std::to_string(ids_[i]));
        }
        check_unit(vectors_.row(i).transpose(), "store row " + std::to_string(i));
    }
}

std::size_t VectorStore::index_of(std::uint64_t id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw InvalidInput("vector store: unknown image id " + std::to_string(id));
    }
    return it->second;
}

Digest256 VectorStore::content_hash(std::size_t i) const {
    std::vector<float> f32;
    row_to_f32(vectors_.row(i).transpose(), &f32);
    return Sha256::of(f32.data(), f32.size() * sizeof(float));
}

void VectorStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open store file for writing: " + path);
    }
    out.write(kMagic, 4);
    const std::uint32_t version = kVersion;
    const std::uint32_t n = static_cast<std::uint32_t>(size());
    const std::uint32_t d = static_cast<std::uint32_t>(dimension());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    std::vector<float> f32;
    for (std::size_t i = 0; i < size(); ++i) {
        out.write(reinterpret_cast<const char*>(&ids_[i]), 8);
        row_to_f32(vectors_.row(i).transpose(), &f32);
        out.write(reinterpret_cast<const char*>(f32.data()),
                  static_cast<std::streamsize>(f32.size() * sizeof(float)));
    }
    if (!out) {
        throw IoError("failed while writing store file: " + path);
    }
}

VectorStore VectorStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open store file: " + path);
    }
    char magic[4];
    std::uint32_t version = 0;
    std::uint32_t n = 0;
    std::uint32_t d = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw ValidationError("not a DNVS store file: " + path);
    }
    if (version != kVersion) {
        throw ValidationError("unsupported store version " + std::to_string(version));
    }
    if (d == 0) {
        throw ValidationError("store dimension is zero");
    }
    std::vector<std::uint64_t> ids(n);
    Matrix vectors(n, d);
    std::vector<float> f32(d);
    for (std::uint32_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(&ids[i]), 8);
        in.read(reinterpret_cast<char*>(f32.data()), static_cast<std::streamsize>(d * sizeof(float)));
        if (!in) {
            throw ValidationError("truncated store file: " + path);
        }
        for (std::uint32_t j = 0; j < d; ++j) {
            vectors(i, j) = static_cast<double>(f32[j]);
        }
    }
    return VectorStore(std::move(ids), std::move(vectors));
}

}  // namespace docforge
