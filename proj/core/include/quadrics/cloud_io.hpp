#pragma once

#include <string>
#include <vector>

#include "quadrics/types.hpp"

namespace quadrics {

enum class CloudFormat { auto_detect, ply, xyz, xyzn };

/// Points plus normals when the file carries them (xyzn, PLY with nx/ny/nz).
struct RawCloud {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;  // empty when absent
    bool has_normals() const { return !normals.empty(); }
};

/// Reads ascii/binary-little-endian PLY (vertex element with x,y,z and optional
/// nx,ny,nz; unknown scalar properties skipped) or whitespace xyz / xyzn text.
/// NaN/Inf coordinates are a ParseError, never silently accepted.
RawCloud read_cloud(const std::string& path, CloudFormat format = CloudFormat::auto_detect);

void write_ply(const std::string& path, const RawCloud& cloud, bool binary = false);

}  // namespace quadrics
