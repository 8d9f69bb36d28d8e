#include "clut/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "clut/errors.hpp"

namespace clut {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'U', 'T', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::ostream& out, float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    put_u32(out, bits);
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Reader {
    std::ifstream in;
    std::string path;

    void fail(const std::string& msg) const { throw ParseError(path + ": " + msg); }

    void bytes(void* dst, std::size_t n) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) fail("truncated checkpoint");
    }
    std::uint32_t u32() {
        unsigned char b[4];
        bytes(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return lo | (hi << 32);
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str() {
        const std::uint32_t n = u32();
        if (n > (1u << 26)) fail("unreasonable string length");
        std::string s(n, '\0');
        if (n) bytes(s.data(), n);
        return s;
    }
};

} // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

const NamedTensor& Checkpoint::require(const std::string& name) const {
    const NamedTensor* t = find(name);
    if (!t) throw ParseError("checkpoint is missing tensor '" + name + "'");
    return *t;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof kMagic);
    put_u32(out, Checkpoint::kVersion);

    put_u32(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
    for (const auto& [k, v] : ckpt.metadata) {
        put_string(out, k);
        put_string(out, v);
    }

    put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        put_string(out, t.name);
        put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
        std::uint64_t count = 1;
        for (std::uint64_t d : t.dims) {
            put_u64(out, d);
            count *= d;
        }
        if (count != t.values.size())
            throw InvalidArgument("checkpoint tensor '" + t.name +
                                  "': dims do not match value count");
        for (double v : t.values) put_f32(out, static_cast<float>(v));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    Reader r{std::ifstream(path, std::ios::binary), path.string()};
    if (!r.in) throw IoError("cannot open " + path.string());

    char magic[8];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0)
        r.fail("not a checkpoint (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != Checkpoint::kVersion)
        r.fail("unsupported checkpoint version " + std::to_string(version) +
               " (expected " + std::to_string(Checkpoint::kVersion) + ")");

    Checkpoint ckpt;
    const std::uint32_t meta_count = r.u32();
    for (std::uint32_t i = 0; i < meta_count; ++i) {
        std::string k = r.str();
        std::string v = r.str();
        ckpt.metadata.emplace(std::move(k), std::move(v));
    }

    const std::uint32_t tensor_count = r.u32();
    for (std::uint32_t i = 0; i < tensor_count; ++i) {
        NamedTensor t;
        t.name = r.str();
        const std::uint32_t ndim = r.u32();
        if (ndim > 8) r.fail("unreasonable tensor rank");
        std::uint64_t count = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            t.dims.push_back(r.u64());
            count *= t.dims.back();
        }
        if (count > (1ull << 32)) r.fail("unreasonable tensor size");
        t.values.resize(count);
        for (std::uint64_t j = 0; j < count; ++j) t.values[j] = r.f32();
        ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
}

} // namespace clut
