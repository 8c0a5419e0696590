#include "chatmem/vector_store.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

namespace chatmem {

namespace {

// FNV-1a 64, seed folded into the offset basis.
uint64_t hash_token(const std::string& token, uint64_t seed) {
    uint64_t h = 14695981039346656037ull ^ seed;
    for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::string> tokenize_lower(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

std::string env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string(fallback);
}

// "http://host:8080/v1" -> (base "http://host:8080", path prefix "/v1")
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    size_t scheme = endpoint.find("://");
    size_t path_start = (scheme == std::string::npos) ? endpoint.find('/')
                                                      : endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string path = endpoint.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {endpoint.substr(0, path_start), path};
}

constexpr char kIndexMagic[4] = {'C', 'M', 'V', 'I'};
constexpr uint32_t kIndexVersion = 1;

}  // namespace

std::vector<Eigen::VectorXf> Embedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<Eigen::VectorXf> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

HashedBowEmbedder::HashedBowEmbedder(int dimension, uint64_t seed) : dim_(dimension), seed_(seed) {
    if (dimension < 1) throw EmbedError("embedder dimension must be >= 1");
}

Eigen::VectorXf HashedBowEmbedder::embed(const std::string& text) {
    std::vector<std::string> tokens = tokenize_lower(text);
    if (tokens.empty()) throw EmbedError("cannot embed empty text");

    Eigen::VectorXf v = Eigen::VectorXf::Zero(dim_);
    for (const auto& tok : tokens) {
        uint64_t h = hash_token(tok, seed_);
        int bucket = static_cast<int>(h % static_cast<uint64_t>(dim_));
        float sign = ((h >> 32) & 1) ? 1.0f : -1.0f;
        v[bucket] += sign;
    }
    float norm = v.norm();
    if (norm < 1e-12f) {
        // Opposite-sign collisions cancelled everything; pin a deterministic
        // unit component so index entries keep norm > 0.
        v[static_cast<int>(hash_token(tokens.front(), seed_) % static_cast<uint64_t>(dim_))] = 1.0f;
        return v;
    }
    return v / norm;
}

RemoteEmbedderConfig RemoteEmbedderConfig::from_env() {
    RemoteEmbedderConfig c;
    c.endpoint = env_or("CHATMEM_EMBED_ENDPOINT", "");
    c.model = env_or("CHATMEM_EMBED_MODEL", "multi-qa-mpnet-base-dot-v1");
    c.api_key = env_or("CHATMEM_EMBED_API_KEY", "");
    return c;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw EmbedError("embedding endpoint not configured");
}

Eigen::VectorXf RemoteEmbedder::embed(const std::string& text) {
    return embed_batch({text}).front();
}

std::vector<Eigen::VectorXf> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
    for (const auto& t : texts)
        if (tokenize_lower(t).empty()) throw EmbedError("cannot embed empty text");
    if (texts.empty()) return {};

    auto [base, prefix] = split_endpoint(config_.endpoint);
    nlohmann::json body = {{"model", config_.model}, {"input", texts}};
    std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        httplib::Client client(base);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);

        auto res = client.Post(prefix + "/embeddings", headers, payload, "application/json");
        if (!res) {
            last_error = "no response from " + base;
            continue;
        }
        if (res->status != 200) {
            last_error = "embedding service returned status " + std::to_string(res->status);
            continue;
        }
        try {
            nlohmann::json parsed = nlohmann::json::parse(res->body);
            const auto& data = parsed.at("data");
            if (data.size() != texts.size()) {
                last_error = "embedding count mismatch";
                continue;
            }
            std::vector<Eigen::VectorXf> out;
            out.reserve(texts.size());
            for (const auto& item : data) {
                const auto& values = item.at("embedding");
                Eigen::VectorXf v(static_cast<int>(values.size()));
                for (size_t i = 0; i < values.size(); ++i)
                    v[static_cast<int>(i)] = values[i].get<float>();
                out.push_back(std::move(v));
            }
            if (dim_ == 0 && !out.empty()) dim_ = static_cast<int>(out.front().size());
            return out;
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("malformed embedding response: ") + e.what();
        }
    }
    throw EmbedError("embedding request failed: " + last_error, config_.max_retries);
}

float cosine_similarity(const Eigen::VectorXf& a, const Eigen::VectorXf& b) {
    float na = a.norm();
    float nb = b.norm();
    if (na < 1e-12f || nb < 1e-12f) return 0.0f;
    return a.dot(b) / (na * nb);
}

void VectorIndex::add(int id, Eigen::VectorXf vec) {
    if (entries_.count(id)) throw IndexError("duplicate id " + std::to_string(id));
    if (dim_ == 0)
        dim_ = static_cast<int>(vec.size());
    else if (static_cast<int>(vec.size()) != dim_)
        throw IndexError("vector dimension " + std::to_string(vec.size()) +
                         " does not match index dimension " + std::to_string(dim_));
    entries_.emplace(id, std::move(vec));
}

const Eigen::VectorXf& VectorIndex::vector_of(int id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw IndexError("unknown id " + std::to_string(id));
    return it->second;
}

std::vector<int> VectorIndex::ids() const {
    std::vector<int> out;
    out.reserve(entries_.size());
    for (const auto& [id, _] : entries_) out.push_back(id);
    return out;
}

std::vector<Scored> VectorIndex::top_k(const Eigen::VectorXf& query,
                                       const std::vector<int>& candidates, int k) const {
    if (k < 1) throw IndexError("k must be >= 1");
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (int id : candidates) scored.push_back({id, cosine_similarity(query, vector_of(id))});
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (scored.size() > static_cast<size_t>(k)) scored.resize(static_cast<size_t>(k));
    return scored;
}

std::vector<Scored> VectorIndex::top_k_all(const Eigen::VectorXf& query, int k) const {
    return top_k(query, ids(), k);
}

void VectorIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IndexError("cannot open " + path + " for writing");
    out.write(kIndexMagic, 4);
    uint32_t version = kIndexVersion;
    uint32_t dim = static_cast<uint32_t>(dim_);
    uint64_t count = entries_.size();
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& [id, vec] : entries_) {
        int32_t id32 = id;
        out.write(reinterpret_cast<const char*>(&id32), sizeof(id32));
        out.write(reinterpret_cast<const char*>(vec.data()),
                  static_cast<std::streamsize>(sizeof(float) * vec.size()));
    }
    if (!out) throw IndexError("failed writing " + path);
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kIndexMagic, 4) != 0)
        throw IndexError(path + " is not a vector index file");
    uint32_t version = 0, dim = 0;
    uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in || version != kIndexVersion)
        throw IndexError("unsupported vector index version in " + path);

    VectorIndex index;
    for (uint64_t i = 0; i < count; ++i) {
        int32_t id = 0;
        Eigen::VectorXf vec(static_cast<int>(dim));
        in.read(reinterpret_cast<char*>(&id), sizeof(id));
        in.read(reinterpret_cast<char*>(vec.data()),
                static_cast<std::streamsize>(sizeof(float) * dim));
        if (!in) throw IndexError("truncated vector index file " + path);
        index.add(id, std::move(vec));
    }
    return index;
}

std::string imbue_metadata_text(const Response& r) {
    std::string out = "On " + r.day_name() + ", " + r.date.to_long() + " at " + r.time.to_hhmm() +
                      " (session " + std::to_string(r.session_index) + "), " + r.speaker +
                      " said: " + r.text;
    return out;
}

VectorIndex build_response_index(const ConversationSet& log, Embedder& embedder, bool imbued) {
    std::vector<std::string> texts;
    texts.reserve(log.responses.size());
    for (const auto& r : log.responses) texts.push_back(imbued ? imbue_metadata_text(r) : r.text);

    std::vector<Eigen::VectorXf> vectors = embedder.embed_batch(texts);
    VectorIndex index;
    for (size_t i = 0; i < log.responses.size(); ++i)
        index.add(log.responses[i].response_index, std::move(vectors[i]));
    return index;
}

}  // namespace chatmem
