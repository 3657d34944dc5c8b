#include "sleepkit/nn/spgw.hpp"

#include <cstring>
#include <fstream>

namespace sleepkit::nn {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'G', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    // Host is little-endian; raw write matches the format.
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw DataError("spgw_read: truncated file " + path);
    return v;
}

}  // namespace

void spgw_write(const std::string& path, const std::vector<NamedTensorF32>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("spgw_write: cannot open " + path);
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        put<std::uint8_t>(out, 0);  // dtype f32
        put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims.size()));
        std::size_t numel = 1;
        for (auto d : t.dims) {
            put<std::uint32_t>(out, d);
            numel *= d;
        }
        if (numel != t.data.size())
            throw InternalError("spgw_write: dims/data mismatch for '" + t.name + "'");
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * 4));
    }
    if (!out) throw DataError("spgw_write: write failure on " + path);
}

std::vector<NamedTensorF32> spgw_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("spgw_read: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("spgw_read: bad magic in " + path);
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion)
        throw DataError("spgw_read: unsupported version " + std::to_string(version) + " in " + path);
    const auto count = get<std::uint32_t>(in, path);
    std::vector<NamedTensorF32> tensors(count);
    for (auto& t : tensors) {
        const auto name_len = get<std::uint16_t>(in, path);
        t.name.resize(name_len);
        in.read(t.name.data(), name_len);
        const auto dtype = get<std::uint8_t>(in, path);
        if (dtype != 0)
            throw DataError("spgw_read: unsupported dtype " + std::to_string(dtype) + " in " + path);
        const auto rank = get<std::uint8_t>(in, path);
        std::size_t numel = 1;
        for (int i = 0; i < rank; ++i) {
            t.dims.push_back(get<std::uint32_t>(in, path));
            numel *= t.dims.back();
        }
        t.data.resize(numel);
        in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(numel * 4));
        if (!in) throw DataError("spgw_read: truncated tensor data in " + path);
    }
    return tensors;
}

}  // namespace sleepkit::nn
