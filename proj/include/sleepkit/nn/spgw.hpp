#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sleepkit/nn/model.hpp"

namespace sleepkit::nn {

// SPGW weight file: magic "SPGW", u32 version=1, u32 tensor count; per
// tensor: u16 name length, UTF-8 name, u8 dtype (0 = f32), u8 rank,
// u32 dims[rank], raw little-endian f32 data. All integers little-endian.
struct NamedTensorF32 {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
};

void spgw_write(const std::string& path, const std::vector<NamedTensorF32>& tensors);
std::vector<NamedTensorF32> spgw_read(const std::string& path);

template <typename Real>
void save_weights(const Model<Real>& model, const std::string& path) {
    std::vector<NamedTensorF32> out;
    for (const auto& p : model.params()) {
        NamedTensorF32 t;
        t.name = p.name;
        for (auto d : p.value->shape) t.dims.push_back(static_cast<std::uint32_t>(d));
        t.data.assign(p.value->data.begin(), p.value->data.end());
        out.push_back(std::move(t));
    }
    spgw_write(path, out);
}

// Loads by name. Params whose name starts with one of skip_prefixes keep
// their current values (transfer-learning head reinitialization); all other
// params must be present with matching shapes.
template <typename Real>
void load_weights(const Model<Real>& model, const std::string& path,
                  const std::vector<std::string>& skip_prefixes = {}) {
    auto tensors = spgw_read(path);
    auto skipped = [&](const std::string& name) {
        for (const auto& p : skip_prefixes)
            if (name.rfind(p, 0) == 0) return true;
        return false;
    };
    for (const auto& p : model.params()) {
        if (skipped(p.name)) continue;
        const NamedTensorF32* found = nullptr;
        for (const auto& t : tensors)
            if (t.name == p.name) {
                found = &t;
                break;
            }
        if (!found) throw DataError("load_weights: '" + p.name + "' missing from " + path);
        std::vector<std::size_t> dims(found->dims.begin(), found->dims.end());
        if (dims != p.value->shape)
            throw DataError("load_weights: shape mismatch for '" + p.name + "' in " + path);
        p.value->data.assign(found->data.begin(), found->data.end());
    }
}

}  // namespace sleepkit::nn
