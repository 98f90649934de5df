#pragma once

#include <string>

#include "orbitfeat/features.hpp"
#include "orbitfeat/learn.hpp"

namespace orbitfeat {

// Binary container shared by feature maps and ridge models. Layout: 8-byte
// magic "ORBFEAT\0", u32 format version, u32 payload kind, then the payload
// with little-endian u32/u64 integers and 64-bit floats (matrices row-major).

void save_feature_map(const AnyFeatureMap& map, const std::string& path);
AnyFeatureMap load_feature_map(const std::string& path);

void save_ridge_model(const RidgeModel& model, const std::string& path);
RidgeModel load_ridge_model(const std::string& path);

}  // namespace orbitfeat
