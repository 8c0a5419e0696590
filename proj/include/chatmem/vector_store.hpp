/*
 * chatmem - embedders, the flat cosine-similarity index over response
 * vectors, and the metadata-imbued text representation.
 *
 * The index is a plain id -> vector map searched exhaustively; queries can
 * be restricted to an explicit candidate subset so retrieval can run over
 * the rows that survived a filter chain.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "chatmem/chatlog.hpp"

namespace chatmem {

class EmbedError : public std::runtime_error {
public:
    explicit EmbedError(std::string message, int retries = 0)
        : std::runtime_error(std::move(message)), retries(retries) {}

    int retries;  // attempts beyond the first that were made before giving up
};

class IndexError : public std::runtime_error {
public:
    explicit IndexError(std::string message) : std::runtime_error(std::move(message)) {}
};

class Embedder {
public:
    virtual ~Embedder() = default;

    // Fixed output dimension; 0 if not yet known (remote embedder before its
    // first call).
    virtual int dimension() const = 0;

    // Deterministic per implementation. Empty/whitespace-only text is an
    // EmbedError.
    virtual Eigen::VectorXf embed(const std::string& text) = 0;

    // Default: one embed() per text. Remote implementations batch.
    virtual std::vector<Eigen::VectorXf> embed_batch(const std::vector<std::string>& texts);
};

// Seeded sign-hash bag of words projected to a fixed dimension and
// L2-normalized. Identical text gives identical vectors; texts sharing
// vocabulary land closer in cosine space. Good enough to exercise the whole
// benchmark offline; not a statement about embedding quality.
class HashedBowEmbedder : public Embedder {
public:
    explicit HashedBowEmbedder(int dimension = 256, uint64_t seed = 0x5eedf00d);

    int dimension() const override { return dim_; }
    Eigen::VectorXf embed(const std::string& text) override;

private:
    int dim_;
    uint64_t seed_;
};

// Client for an OpenAI-style embeddings endpoint: POST {endpoint}/embeddings
// with {"model": ..., "input": [texts]}.
struct RemoteEmbedderConfig {
    std::string endpoint;  // e.g. "http://host:8080/v1"
    std::string model;
    std::string api_key;      // optional
    int max_retries = 1;      // retries after the first attempt
    int timeout_seconds = 60;

    // CHATMEM_EMBED_ENDPOINT / CHATMEM_EMBED_MODEL / CHATMEM_EMBED_API_KEY
    static RemoteEmbedderConfig from_env();
    bool configured() const { return !endpoint.empty(); }
};

class RemoteEmbedder : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);

    int dimension() const override { return dim_; }
    Eigen::VectorXf embed(const std::string& text) override;
    std::vector<Eigen::VectorXf> embed_batch(const std::vector<std::string>& texts) override;

private:
    RemoteEmbedderConfig config_;
    int dim_ = 0;  // learned from the first response
};

// Zero-norm inputs score 0 against everything.
float cosine_similarity(const Eigen::VectorXf& a, const Eigen::VectorXf& b);

struct Scored {
    int id = 0;
    float score = 0.0f;

    bool operator==(const Scored& other) const = default;
};

class VectorIndex {
public:
    // One vector per id; dimension fixed by the first insertion.
    void add(int id, Eigen::VectorXf vec);

    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    int dimension() const { return dim_; }
    bool contains(int id) const { return entries_.count(id) != 0; }
    const Eigen::VectorXf& vector_of(int id) const;
    std::vector<int> ids() const;  // ascending

    // Candidates ranked by descending cosine similarity to `query`, ties by
    // ascending id, truncated to k. Every candidate must be in the index.
    std::vector<Scored> top_k(const Eigen::VectorXf& query, const std::vector<int>& candidates,
                              int k) const;
    std::vector<Scored> top_k_all(const Eigen::VectorXf& query, int k) const;

    // Flat binary: magic, version, dimension, count, then id/vector records.
    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

private:
    std::map<int, Eigen::VectorXf> entries_;
    int dim_ = 0;
};

// "On {Day_Name}, {Date} at {Time} (session {Session_Index}), {Speaker}
// said: {text}" - the representation behind the metadata-imbued semantic
// baseline.
std::string imbue_metadata_text(const Response& r);

// Embeds every response (imbued text or raw text) keyed by response_index.
VectorIndex build_response_index(const ConversationSet& log, Embedder& embedder, bool imbued);

}  // namespace chatmem
