#pragma once

// Exact cosine-distance ranking over narration embeddings.

#include <algorithm>
#include <cmath>
#include <map>
#include <shared_mutex>

#include "lave/narration.hpp"
#include "lave/providers.hpp"

namespace lave {

/// 1 - cos(u, v), clamped to [0, 2]. A zero vector is at distance 1 from everything.
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) fail(ErrorCode::DimensionMismatch, "cosine distance over vectors of different dimension");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) return 1.0;
    double d = 1.0 - dot / std::sqrt(nu * nv);
    return std::clamp(d, 0.0, 2.0);
}

struct IndexEntry {
    AssetId asset_id = 0;
    EmbeddingVector vector;
    std::string indexed_text;
};

struct RankedItem {
    AssetId asset_id = 0;
    double cosine_distance = 0.0;
    friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

using RankedResult = std::vector<RankedItem>;

inline std::string index_text(const VisualNarration& n) { return n.title + ". " + n.summary; }

class VectorStore {
public:
    explicit VectorStore(std::shared_ptr<ProviderClient> provider) : provider_(std::move(provider)) {}

    IndexEntry upsert(const VideoAsset& asset) {
        if (!asset.narration.complete())
            fail(ErrorCode::InvalidArgument, "asset " + std::to_string(asset.id) + " has no narration yet");
        auto text = index_text(asset.narration);
        {
            std::shared_lock lock(mu_);
            auto it = entries_.find(asset.id);
            if (it != entries_.end() && it->second.indexed_text == text) return it->second;
        }
        IndexEntry entry{asset.id, provider_->embed(text), std::move(text)};
        std::unique_lock lock(mu_);
        entries_[asset.id] = entry;
        return entry;
    }

    /// Inserts a precomputed entry (used when loading persisted vectors).
    void put(IndexEntry entry) {
        if (entry.vector.dimension() != provider_->embedding_dimension())
            fail(ErrorCode::DimensionMismatch, "stored vector for asset " + std::to_string(entry.asset_id) +
                                                   " has the wrong dimension");
        std::unique_lock lock(mu_);
        entries_[entry.asset_id] = std::move(entry);
    }

    bool erase(AssetId id) {
        std::unique_lock lock(mu_);
        return entries_.erase(id) > 0;
    }

    /// Every indexed asset, by ascending cosine distance; ties by ascending id.
    RankedResult retrieve(std::string_view query) const {
        {
            std::shared_lock lock(mu_);
            if (entries_.empty()) fail(ErrorCode::EmptyIndex, "the video index is empty");
        }
        if (util::trim(query).empty()) fail(ErrorCode::EmptyQuery, "retrieval query is empty");
        auto q = provider_->embed(query);

        RankedResult ranked;
        {
            std::shared_lock lock(mu_);
            ranked.reserve(entries_.size());
            for (const auto& [id, e] : entries_) ranked.push_back({id, cosine_distance(q.values, e.vector.values)});
        }
        std::sort(ranked.begin(), ranked.end(), [](const RankedItem& a, const RankedItem& b) {
            if (a.cosine_distance != b.cosine_distance) return a.cosine_distance < b.cosine_distance;
            return a.asset_id < b.asset_id;
        });
        return ranked;
    }

    std::optional<IndexEntry> entry(AssetId id) const {
        std::shared_lock lock(mu_);
        auto it = entries_.find(id);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return entries_.size();
    }

    /// One record per asset: <dir>/<id>.json
    void save(const fs::path& dir) const {
        std::shared_lock lock(mu_);
        fs::create_directories(dir);
        for (const auto& [id, e] : entries_) {
            json j = {{"asset_id", id},
                      {"indexed_text", e.indexed_text},
                      {"model_id", e.vector.model_id},
                      {"values", e.vector.values}};
            util::write_file_atomic(dir / (std::to_string(id) + ".json"), j.dump());
        }
    }

    void load(const fs::path& dir) {
        if (!fs::is_directory(dir)) return;
        for (const auto& f : fs::directory_iterator(dir)) {
            if (f.path().extension() != ".json") continue;
            auto j = json::parse(util::read_file(f.path()));
            put({j.at("asset_id").get<AssetId>(),
                 {j.at("values").get<std::vector<double>>(), j.value("model_id", std::string{})},
                 j.at("indexed_text").get<std::string>()});
        }
    }

    /// Re-embeds every asset into a fresh index.
    void rebuild(const std::vector<VideoAsset>& assets) {
        {
            std::unique_lock lock(mu_);
            entries_.clear();
        }
        for (const auto& a : assets) upsert(a);
    }

private:
    std::shared_ptr<ProviderClient> provider_;
    mutable std::shared_mutex mu_;
    std::map<AssetId, IndexEntry> entries_;
};

}  // namespace lave
