#include "relmatch/index/vector_index.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/util/fs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <unordered_set>

namespace relmatch::index {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'M', 'I', 'D', 'X', '1'};

void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_f32le(std::string& out, float v) {
    static_assert(sizeof(float) == 4);
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    put_u32le(out, bits);
}

class Reader {
public:
    Reader(const std::string& data) : data_(data) {}

    std::uint16_t u16le() {
        need(2);
        std::uint16_t v = static_cast<std::uint8_t>(data_[pos_]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data_[pos_ + 1])) << 8);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32le() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    float f32le() { return std::bit_cast<float>(u32le()); }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool exhausted() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw CorruptIndex("index file truncated");
        }
    }

    const std::string& data_;
    std::size_t pos_ = 0;
};

} // namespace

VectorIndex VectorIndex::build(std::vector<Entry> entries) {
    if (entries.empty()) {
        throw EmptyInput("cannot build an index from zero entries");
    }
    const std::size_t dim = entries.front().second.dimension();
    if (dim == 0) {
        throw DimensionMismatch("entry '" + entries.front().first + "' has dimension 0");
    }
    std::unordered_set<std::string> ids;
    for (const auto& [id, vec] : entries) {
        if (vec.dimension() != dim) {
            throw DimensionMismatch("entry '" + id + "' has dimension " +
                                    std::to_string(vec.dimension()) + ", expected " +
                                    std::to_string(dim));
        }
        if (!vec.all_finite()) {
            throw DimensionMismatch("entry '" + id + "' contains non-finite values");
        }
        if (!ids.insert(id).second) {
            throw DuplicateId("duplicate entity id '" + id + "'");
        }
    }
    VectorIndex index;
    index.dimension_ = dim;
    index.entries_ = std::move(entries);
    return index;
}

CandidateBatch VectorIndex::query_topk(const EmbeddingVector& probe, std::size_t k,
                                       std::size_t offset) const {
    if (probe.dimension() != dimension_) {
        throw DimensionMismatch("probe dimension " + std::to_string(probe.dimension()) +
                                " does not match index dimension " +
                                std::to_string(dimension_));
    }
    if (k == 0) {
        throw Error("query_topk requires k >= 1");
    }

    // Full ordering by (squared distance, id); the square root is applied only
    // at the reporting boundary.
    std::vector<std::pair<double, const std::string*>> ranked;
    ranked.reserve(entries_.size());
    for (const auto& [id, vec] : entries_) {
        ranked.emplace_back(euclidean_distance_sq(probe, vec), &id);
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return *a.second < *b.second;
              });

    CandidateBatch batch;
    batch.batch_index = offset / k;
    for (std::size_t i = offset; i < ranked.size() && i < offset + k; ++i) {
        batch.candidates.emplace_back(*ranked[i].second, std::sqrt(ranked[i].first));
    }
    return batch;
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32le(out, static_cast<std::uint32_t>(index.dimension()));
    put_u32le(out, static_cast<std::uint32_t>(index.size()));
    for (const auto& [id, vec] : index.entries()) {
        if (id.size() > 0xffff) {
            throw IoFailure("entity id too long to serialize: " + id.substr(0, 64) + "...");
        }
        put_u16le(out, static_cast<std::uint16_t>(id.size()));
        out += id;
        for (float v : vec.values) {
            put_f32le(out, v);
        }
    }
    util::write_file_atomic(path, out);
}

VectorIndex load_index(const std::filesystem::path& path) {
    const std::string data = util::read_file(path);
    if (data.size() < sizeof(kMagic) ||
        std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
        throw CorruptIndex("bad magic in " + path.string());
    }

    Reader r(data);
    r.bytes(sizeof(kMagic));
    const std::uint32_t dim = r.u32le();
    const std::uint32_t count = r.u32le();
    if (dim == 0 || count == 0) {
        throw CorruptIndex("index file declares zero dimension or zero entries");
    }

    std::vector<VectorIndex::Entry> entries;
    entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t id_len = r.u16le();
        if (id_len == 0) {
            throw CorruptIndex("entry " + std::to_string(i) + " has an empty id");
        }
        std::string id = r.bytes(id_len);
        EmbeddingVector vec;
        vec.values.reserve(dim);
        for (std::uint32_t d = 0; d < dim; ++d) {
            vec.values.push_back(r.f32le());
        }
        entries.emplace_back(std::move(id), std::move(vec));
    }
    if (!r.exhausted()) {
        throw CorruptIndex("trailing bytes after last entry");
    }

    try {
        return VectorIndex::build(std::move(entries));
    } catch (const Error& e) {
        throw CorruptIndex(std::string("index file invalid: ") + e.what());
    }
}

} // namespace relmatch::index
