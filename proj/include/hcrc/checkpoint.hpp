#pragma once

// Binary checkpoint container: versioned magic string, then named flat
// arrays with shape headers. Everything little-endian; doubles are stored
// raw (host must be little-endian IEEE-754, asserted below).

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hcrc/common.hpp"
#include "hcrc/matrix.hpp"

namespace hcrc {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian host");
static_assert(sizeof(double) == 8);

inline constexpr char kCheckpointMagic[] = "HCRC-CKPT-1";

class CheckpointWriter {
public:
    void add(const std::string& name, const Matrix& m) {
        if (entries_.contains(name)) throw Error("checkpoint: duplicate entry '" + name + "'");
        entries_[name] = m;
    }

    void add_scalar(const std::string& name, double v) { add(name, Matrix(1, 1, v)); }
    void add_u64(const std::string& name, uint64_t v) {
        add_scalar(name, static_cast<double>(v));
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("checkpoint: cannot open '" + path + "' for writing");
        out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
        write_u64(out, entries_.size());
        for (const auto& [name, m] : entries_) {
            write_u64(out, name.size());
            out.write(name.data(), static_cast<std::streamsize>(name.size()));
            write_u64(out, m.rows);
            write_u64(out, m.cols);
            out.write(reinterpret_cast<const char*>(m.a.data()),
                      static_cast<std::streamsize>(m.a.size() * sizeof(double)));
        }
        if (!out) throw Error("checkpoint: write failed for '" + path + "'");
    }

private:
    static void write_u64(std::ofstream& out, uint64_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }

    std::map<std::string, Matrix> entries_;  // ordered so files are reproducible
};

class CheckpointReader {
public:
    explicit CheckpointReader(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("checkpoint: cannot open '" + path + "'");
        char magic[sizeof(kCheckpointMagic) - 1];
        in.read(magic, sizeof(magic));
        if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
            throw Error("checkpoint: bad magic in '" + path + "'");
        uint64_t count = read_u64(in, path);
        for (uint64_t i = 0; i < count; ++i) {
            uint64_t name_len = read_u64(in, path);
            std::string name(name_len, '\0');
            in.read(name.data(), static_cast<std::streamsize>(name_len));
            uint64_t rows = read_u64(in, path);
            uint64_t cols = read_u64(in, path);
            Matrix m(rows, cols);
            in.read(reinterpret_cast<char*>(m.a.data()),
                    static_cast<std::streamsize>(m.a.size() * sizeof(double)));
            if (!in) throw Error("checkpoint: truncated file '" + path + "'");
            entries_[name] = std::move(m);
        }
    }

    bool has(const std::string& name) const { return entries_.contains(name); }

    const Matrix& get(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw Error("checkpoint: missing entry '" + name + "'");
        return it->second;
    }

    double scalar(const std::string& name) const {
        const Matrix& m = get(name);
        if (m.size() != 1) throw Error("checkpoint: entry '" + name + "' is not a scalar");
        return m.a[0];
    }

    uint64_t u64(const std::string& name) const { return static_cast<uint64_t>(scalar(name)); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& [name, _] : entries_) out.push_back(name);
        return out;
    }

private:
    static uint64_t read_u64(std::ifstream& in, const std::string& path) {
        uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in) throw Error("checkpoint: truncated file '" + path + "'");
        return v;
    }

    std::map<std::string, Matrix> entries_;
};

}  // namespace hcrc
