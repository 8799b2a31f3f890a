#pragma once
// Seeded positive/negative example sampling.
//
// Pools are canonicalized (sorted by IRI) before the seeded shuffle so the
// draw depends only on pool contents, the requested count, and the seed —
// not on set-representation order. The generator is pinned (Fisher–Yates
// over mt19937_64 with rejection-sampled bounds, not std::shuffle) so a
// given seed reproduces the same sample on every platform; its identifier
// is recorded in the sample for provenance.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ce/errors.hpp"
#include "ce/util.hpp"

namespace ce {

inline constexpr const char* kSamplerGeneratorId = "fisher-yates/mt19937_64/v1";

struct Selector {
    enum class Kind { class_based, property_value };

    static Selector for_class(std::string class_iri) {
        Selector s;
        s.kind = Kind::class_based;
        s.class_iri = std::move(class_iri);
        return s;
    }

    static Selector for_property(std::string property_iri, std::set<std::string> value_iris) {
        if (value_iris.empty())
            throw Error("property-value selector requires a non-empty value set");
        Selector s;
        s.kind = Kind::property_value;
        s.property_iri = std::move(property_iri);
        s.value_iris = std::move(value_iris);
        return s;
    }

    // Stable text form, used for cache keys and provenance.
    std::string canonical() const {
        if (kind == Kind::class_based) return "class:" + class_iri;
        std::string out = "property:" + property_iri + ":values:";
        for (const auto& v : value_iris) out += v + ",";
        return out;
    }

    Kind kind = Kind::class_based;
    std::string class_iri;
    std::string property_iri;
    std::set<std::string> value_iris;

    friend bool operator==(const Selector& a, const Selector& b) {
        return a.kind == b.kind && a.class_iri == b.class_iri &&
               a.property_iri == b.property_iri && a.value_iris == b.value_iris;
    }
};

struct SampleSet {
    std::string concept_id;
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
    Selector positive_selector;
    Selector negative_selector;
    std::size_t requested_n = 0;
    std::uint64_t seed = 0;
    std::string generator = kSamplerGeneratorId;
    std::string created_at;
    std::vector<std::string> warnings;  // pool-shortfall notes

    friend bool operator==(const SampleSet& a, const SampleSet& b) {
        return a.concept_id == b.concept_id && a.positives == b.positives &&
               a.negatives == b.negatives && a.positive_selector == b.positive_selector &&
               a.negative_selector == b.negative_selector && a.requested_n == b.requested_n &&
               a.seed == b.seed && a.generator == b.generator && a.warnings == b.warnings;
    }
};

namespace detail {

// Uniform draw in [0, bound) without modulo bias.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

// First k elements of a seeded Fisher–Yates permutation.
inline std::vector<std::string> sample_without_replacement(std::vector<std::string> pool,
                                                           std::size_t k, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < k && i + 1 < pool.size(); ++i) {
        std::uint64_t j = i + uniform_below(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace detail

// Draws up to n positives from positive_pool and up to n negatives from
// negative_pool \ positive_pool (the set difference is applied first).
// Deterministic in (pools, n, seed); positives are drawn before negatives
// from a single seeded generator. Undersized pools are taken whole with a
// shortfall warning; an empty pool (after the difference) is an error.
inline SampleSet draw_samples(const std::set<std::string>& positive_pool,
                              const std::set<std::string>& negative_pool, std::size_t n,
                              std::uint64_t seed) {
    if (n < 1) throw Error("sample size must be at least 1");

    std::set<std::string> negative_only;
    for (const auto& e : negative_pool) {
        if (positive_pool.count(e) == 0) negative_only.insert(e);
    }
    if (positive_pool.empty()) throw Error("positive pool is empty");
    if (negative_only.empty())
        throw Error("negative pool is empty after removing positive-pool members");

    SampleSet out;
    out.requested_n = n;
    out.seed = seed;
    out.created_at = iso8601_now();

    std::mt19937_64 rng(seed);
    std::vector<std::string> pos(positive_pool.begin(), positive_pool.end());
    std::vector<std::string> neg(negative_only.begin(), negative_only.end());

    if (pos.size() < n)
        out.warnings.push_back("positive pool shortfall: requested " + std::to_string(n) +
                               ", pool has " + std::to_string(pos.size()));
    if (neg.size() < n)
        out.warnings.push_back("negative pool shortfall: requested " + std::to_string(n) +
                               ", pool has " + std::to_string(neg.size()));

    out.positives = detail::sample_without_replacement(std::move(pos), std::min(n, positive_pool.size()), rng);
    out.negatives = detail::sample_without_replacement(std::move(neg), std::min(n, negative_only.size()), rng);
    return out;
}

}  // namespace ce
