#pragma once

// Message-block parsing, attribute extraction, and hashed features.
//
// Block files are UTF-8 text: a `#block <index>` header line followed by one
// JSON object per line with fields
//   id, ts, user, text, words[]?, entities[], hashtags[], location?,
//   features[]?, label?

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcrc/common.hpp"
#include "hcrc/matrix.hpp"

namespace hcrc {

struct FeatureConfig {
    size_t dim = 256;       // feature / GCN width
    uint64_t hash_seed = 0;

    void validate() const {
        if (dim < 2) throw Error("FeatureConfig: dim must be >= 2");
    }
};

struct Message {
    std::string id;
    int64_t timestamp = 0;
    std::string user;
    std::string text;
    std::vector<std::string> words;  // tokenized from text when not provided
    std::vector<std::string> entities;
    std::vector<std::string> hashtags;
    std::optional<std::string> location;
    std::optional<std::vector<double>> features;

    bool operator==(const Message&) const = default;
};

struct MessageBlock {
    int index = 0;
    std::vector<Message> messages;
    std::optional<std::vector<std::string>> labels;  // ground-truth event ids, eval only

    bool operator==(const MessageBlock&) const = default;
};

// lowercase + split on non-alphanumerics + drop tokens shorter than 2
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2) out.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c))
            cur.push_back(static_cast<char>(std::tolower(c)));
        else
            flush();
    }
    flush();
    return out;
}

inline std::string casefold(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

enum class AttrKind { Word = 0, Entity = 1, Hashtag = 2, Location = 3, User = 4 };

inline const char* attr_kind_name(AttrKind k) {
    switch (k) {
        case AttrKind::Word: return "word";
        case AttrKind::Entity: return "entity";
        case AttrKind::Hashtag: return "hashtag";
        case AttrKind::Location: return "location";
        case AttrKind::User: return "user";
    }
    return "?";
}

struct Attribute {
    AttrKind kind;
    std::string value;  // case-folded

    auto operator<=>(const Attribute&) const = default;
};

// Typed, case-folded, deduplicated attribute set in (kind, value) order.
// Hashtags lose their leading '#'; empty optional fields contribute nothing.
inline std::vector<Attribute> extract_attributes(const Message& m) {
    std::set<Attribute> set;
    for (const auto& w : m.words) {
        std::string v = casefold(w);
        if (!v.empty()) set.insert({AttrKind::Word, std::move(v)});
    }
    for (const auto& e : m.entities) {
        std::string v = casefold(e);
        if (!v.empty()) set.insert({AttrKind::Entity, std::move(v)});
    }
    for (const auto& h : m.hashtags) {
        std::string_view sv(h);
        if (!sv.empty() && sv.front() == '#') sv.remove_prefix(1);
        std::string v = casefold(sv);
        if (!v.empty()) set.insert({AttrKind::Hashtag, std::move(v)});
    }
    if (m.location && !m.location->empty())
        set.insert({AttrKind::Location, casefold(*m.location)});
    if (!m.user.empty()) set.insert({AttrKind::User, casefold(m.user)});
    return {set.begin(), set.end()};
}

// Deterministic signed feature hash: the string picks a sign stream, giving
// a dense unit vector with entries +-1/sqrt(d). Same value + seed always
// maps to the same vector; distinct values land near-orthogonal.
inline std::vector<double> hash_embed(std::string_view value, const FeatureConfig& cfg) {
    cfg.validate();
    if (value.empty()) throw Error("hash_embed: empty value");
    uint64_t state = mix_seed(fnv1a64(value), cfg.hash_seed);
    const double unit = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    std::vector<double> v(cfg.dim);
    uint64_t word = 0;
    for (size_t i = 0; i < cfg.dim; ++i) {
        if (i % 64 == 0) word = splitmix64(state);
        v[i] = (word >> (i % 64)) & 1 ? unit : -unit;
    }
    return v;
}

// Provided features verbatim; otherwise the L2-normalized mean of the
// hashed (case-folded) words.
inline std::vector<double> message_feature(const Message& m, const FeatureConfig& cfg) {
    cfg.validate();
    if (m.features) {
        if (m.features->size() != cfg.dim)
            throw Error("message '" + m.id + "': features length " +
                        std::to_string(m.features->size()) + " != dim " + std::to_string(cfg.dim));
        return *m.features;
    }
    if (m.words.empty())
        throw Error("message '" + m.id + "': no words and no features");
    std::vector<double> mean(cfg.dim, 0.0);
    for (const auto& w : m.words) {
        std::vector<double> h = hash_embed(casefold(w), cfg);
        for (size_t i = 0; i < cfg.dim; ++i) mean[i] += h[i];
    }
    const double inv = 1.0 / static_cast<double>(m.words.size());
    for (auto& x : mean) x *= inv;
    double n = l2_norm(mean.data(), mean.size());
    if (n < 1e-12) throw Error("message '" + m.id + "': degenerate zero feature");
    for (auto& x : mean) x /= n;
    return mean;
}

namespace detail {

inline Error line_error(size_t line_no, const std::string& what) {
    return Error("line " + std::to_string(line_no) + ": " + what);
}

inline std::vector<std::string> parse_string_array(const nlohmann::json& j, const char* field,
                                                   size_t line_no) {
    if (!j.is_array()) throw line_error(line_no, std::string("field '") + field + "' must be an array");
    std::vector<std::string> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_string())
            throw line_error(line_no, std::string("field '") + field + "' must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace detail

// One message block from a line-delimited stream. Records keep their input
// (arrival) order. A malformed record or duplicate id rejects the block with
// an error naming the offending line.
inline MessageBlock parse_block(std::istream& in, const FeatureConfig& cfg) {
    cfg.validate();
    std::string line;
    size_t line_no = 0;

    if (!std::getline(in, line)) throw Error("empty block stream");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    MessageBlock block;
    {
        std::istringstream hdr(line);
        std::string tag;
        long long idx = -1;
        hdr >> tag >> idx;
        if (tag != "#block" || idx < 0)
            throw detail::line_error(line_no, "expected header '#block <index>', got '" + line + "'");
        block.index = static_cast<int>(idx);
    }

    std::set<std::string> seen_ids;
    size_t labelled = 0;
    std::vector<std::string> labels;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw detail::line_error(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw detail::line_error(line_no, "record is not a JSON object");

        Message m;
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
            throw detail::line_error(line_no, "missing or empty field 'id'");
        m.id = j["id"].get<std::string>();
        if (!seen_ids.insert(m.id).second)
            throw detail::line_error(line_no, "duplicate message id '" + m.id + "'");

        if (!j.contains("ts") || !j["ts"].is_number_integer())
            throw detail::line_error(line_no, "missing or non-integer field 'ts'");
        m.timestamp = j["ts"].get<int64_t>();

        if (!j.contains("user") || !j["user"].is_string())
            throw detail::line_error(line_no, "missing field 'user'");
        m.user = j["user"].get<std::string>();

        if (!j.contains("text") || !j["text"].is_string())
            throw detail::line_error(line_no, "missing field 'text'");
        m.text = j["text"].get<std::string>();

        if (j.contains("words"))
            m.words = detail::parse_string_array(j["words"], "words", line_no);
        else
            m.words = tokenize(m.text);

        if (j.contains("entities"))
            m.entities = detail::parse_string_array(j["entities"], "entities", line_no);
        if (j.contains("hashtags"))
            m.hashtags = detail::parse_string_array(j["hashtags"], "hashtags", line_no);

        if (j.contains("location")) {
            if (!j["location"].is_string())
                throw detail::line_error(line_no, "field 'location' must be a string");
            m.location = j["location"].get<std::string>();
        }
        if (j.contains("features")) {
            if (!j["features"].is_array())
                throw detail::line_error(line_no, "field 'features' must be an array");
            std::vector<double> f;
            f.reserve(j["features"].size());
            for (const auto& e : j["features"]) {
                if (!e.is_number())
                    throw detail::line_error(line_no, "field 'features' must contain numbers");
                f.push_back(e.get<double>());
            }
            if (f.size() != cfg.dim)
                throw detail::line_error(line_no, "features length " + std::to_string(f.size()) +
                                                      " != dim " + std::to_string(cfg.dim));
            m.features = std::move(f);
        }
        if (j.contains("label")) {
            const auto& l = j["label"];
            if (l.is_string())
                labels.push_back(l.get<std::string>());
            else if (l.is_number_integer())
                labels.push_back(std::to_string(l.get<int64_t>()));
            else
                throw detail::line_error(line_no, "field 'label' must be a string or integer");
            ++labelled;
        } else {
            labels.emplace_back();
        }

        block.messages.push_back(std::move(m));
    }

    if (block.messages.empty()) throw Error("block " + std::to_string(block.index) + " has no messages");
    if (labelled > 0) {
        if (labelled != block.messages.size())
            throw Error("block " + std::to_string(block.index) +
                        ": labels present on some records but not all");
        block.labels = std::move(labels);
    }
    return block;
}

inline MessageBlock parse_block_file(const std::string& path, const FeatureConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open block file '" + path + "'");
    try {
        return parse_block(in, cfg);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

inline void serialize_block(const MessageBlock& block, std::ostream& out) {
    out << "#block " << block.index << "\n";
    for (size_t i = 0; i < block.messages.size(); ++i) {
        const Message& m = block.messages[i];
        nlohmann::json j;
        j["id"] = m.id;
        j["ts"] = m.timestamp;
        j["user"] = m.user;
        j["text"] = m.text;
        j["words"] = m.words;
        j["entities"] = m.entities;
        j["hashtags"] = m.hashtags;
        if (m.location) j["location"] = *m.location;
        if (m.features) j["features"] = *m.features;
        if (block.labels) j["label"] = (*block.labels)[i];
        out << j.dump() << "\n";
    }
}

}  // namespace hcrc
