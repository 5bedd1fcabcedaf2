#include "quadrics/cloud_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace quadrics {

namespace {

void check_finite(const Vec3& v, std::size_t offset, long line) {
    if (!v.allFinite()) throw ParseError("non-finite coordinate", offset, line);
}

int scalar_size(const std::string& type) {
    if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
    if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
    if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
        type == "float" || type == "float32")
        return 4;
    if (type == "double" || type == "float64" || type == "int64" || type == "uint64") return 8;
    return -1;
}

double read_scalar_le(const char* p, const std::string& type) {
    if (type == "float" || type == "float32") {
        float f;
        std::memcpy(&f, p, 4);
        return f;
    }
    if (type == "double" || type == "float64") {
        double d;
        std::memcpy(&d, p, 8);
        return d;
    }
    if (type == "uchar" || type == "uint8") return static_cast<unsigned char>(*p);
    if (type == "char" || type == "int8") return static_cast<signed char>(*p);
    if (type == "short" || type == "int16") {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        return v;
    }
    if (type == "ushort" || type == "uint16") {
        std::uint16_t v;
        std::memcpy(&v, p, 2);
        return v;
    }
    if (type == "int" || type == "int32") {
        std::int32_t v;
        std::memcpy(&v, p, 4);
        return v;
    }
    if (type == "uint" || type == "uint32") {
        std::uint32_t v;
        std::memcpy(&v, p, 4);
        return v;
    }
    return 0;
}

struct PlyProperty {
    std::string type;
    std::string name;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    long count = 0;
    std::vector<PlyProperty> properties;
};

RawCloud read_ply(std::ifstream& in, const std::string& path) {
    std::string line;
    std::size_t offset = 0;
    long line_no = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line)) throw ParseError("unexpected end of PLY header", offset, line_no);
        offset += line.size() + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line();
    if (line != "ply") throw ParseError("not a PLY file", 0, 1);
    next_line();
    bool binary = false;
    if (line == "format ascii 1.0") {
        binary = false;
    } else if (line == "format binary_little_endian 1.0") {
        binary = true;
    } else {
        throw UnsupportedFormat("unsupported PLY format line: " + line);
    }

    std::vector<PlyElement> elements;
    while (true) {
        next_line();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "end_header") break;
        if (tok == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (tok == "property") {
            if (elements.empty()) throw ParseError("property before element", offset, line_no);
            PlyProperty p;
            ls >> p.type;
            if (p.type == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type;
            }
            ls >> p.name;
            elements.back().properties.push_back(p);
        } else {
            throw ParseError("unknown PLY header line: " + line, offset, line_no);
        }
    }

    RawCloud cloud;
    bool vertex_seen = false;
    for (const PlyElement& elem : elements) {
        const bool is_vertex = elem.name == "vertex";
        int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
        for (std::size_t i = 0; i < elem.properties.size(); ++i) {
            const std::string& n = elem.properties[i].name;
            const int ii = static_cast<int>(i);
            if (n == "x") ix = ii;
            if (n == "y") iy = ii;
            if (n == "z") iz = ii;
            if (n == "nx") inx = ii;
            if (n == "ny") iny = ii;
            if (n == "nz") inz = ii;
        }
        if (is_vertex) {
            if (ix < 0 || iy < 0 || iz < 0)
                throw ParseError("vertex element lacks x/y/z properties", offset, line_no);
            vertex_seen = true;
            cloud.positions.reserve(elem.count);
            if (inx >= 0 && iny >= 0 && inz >= 0) cloud.normals.reserve(elem.count);
        }

        if (!binary) {
            for (long r = 0; r < elem.count; ++r) {
                next_line();
                if (!is_vertex) continue;
                std::istringstream ls(line);
                std::vector<double> vals;
                double v;
                while (ls >> v) vals.push_back(v);
                if (static_cast<int>(vals.size()) < static_cast<int>(elem.properties.size()))
                    throw ParseError("short vertex row", offset, line_no);
                const Vec3 p(vals[ix], vals[iy], vals[iz]);
                check_finite(p, offset, line_no);
                cloud.positions.push_back(p);
                if (inx >= 0 && iny >= 0 && inz >= 0) {
                    const Vec3 nv(vals[inx], vals[iny], vals[inz]);
                    check_finite(nv, offset, line_no);
                    cloud.normals.push_back(nv);
                }
            }
        } else {
            // fixed record size; list properties in a skipped element are unsupported
            long record = 0;
            for (const PlyProperty& p : elem.properties) {
                if (p.is_list)
                    throw UnsupportedFormat("binary PLY list property in element '" + elem.name +
                                            "' is not supported");
                const int s = scalar_size(p.type);
                if (s < 0) throw UnsupportedFormat("unknown PLY property type: " + p.type);
                record += s;
            }
            std::vector<char> buf(record);
            for (long r = 0; r < elem.count; ++r) {
                if (!in.read(buf.data(), record))
                    throw ParseError("truncated binary PLY payload", offset, -1);
                offset += record;
                if (!is_vertex) continue;
                std::vector<double> vals(elem.properties.size());
                long at = 0;
                for (std::size_t i = 0; i < elem.properties.size(); ++i) {
                    vals[i] = read_scalar_le(buf.data() + at, elem.properties[i].type);
                    at += scalar_size(elem.properties[i].type);
                }
                const Vec3 p(vals[ix], vals[iy], vals[iz]);
                check_finite(p, offset, -1);
                cloud.positions.push_back(p);
                if (inx >= 0 && iny >= 0 && inz >= 0) {
                    const Vec3 nv(vals[inx], vals[iny], vals[inz]);
                    check_finite(nv, offset, -1);
                    cloud.normals.push_back(nv);
                }
            }
        }
        if (is_vertex) break;  // later elements (faces etc.) are irrelevant here
    }
    if (!vertex_seen) throw ParseError("PLY file has no vertex element", offset, line_no);
    (void)path;
    return cloud;
}

RawCloud read_xyz(std::ifstream& in, bool with_normals) {
    RawCloud cloud;
    std::string line;
    std::size_t offset = 0;
    long line_no = 0;
    while (std::getline(in, line)) {
        offset += line.size() + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Vec3 p, n;
        if (!(ls >> p.x() >> p.y() >> p.z()))
            throw ParseError("expected x y z coordinates", offset, line_no);
        check_finite(p, offset, line_no);
        if (with_normals) {
            if (!(ls >> n.x() >> n.y() >> n.z()))
                throw ParseError("expected nx ny nz normal components", offset, line_no);
            check_finite(n, offset, line_no);
            cloud.normals.push_back(n);
        }
        cloud.positions.push_back(p);
    }
    return cloud;
}

}  // namespace

RawCloud read_cloud(const std::string& path, CloudFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    if (format == CloudFormat::auto_detect) {
        if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply")
            format = CloudFormat::ply;
        else if (path.size() >= 5 && path.substr(path.size() - 5) == ".xyzn")
            format = CloudFormat::xyzn;
        else if (path.size() >= 4 && path.substr(path.size() - 4) == ".xyz")
            format = CloudFormat::xyz;
        else {
            char magic[3] = {};
            in.read(magic, 3);
            in.seekg(0);
            format = std::strncmp(magic, "ply", 3) == 0 ? CloudFormat::ply : CloudFormat::xyz;
        }
    }
    switch (format) {
        case CloudFormat::ply: return read_ply(in, path);
        case CloudFormat::xyz: return read_xyz(in, false);
        case CloudFormat::xyzn: return read_xyz(in, true);
        default: throw UnsupportedFormat("unknown cloud format");
    }
}

void write_ply(const std::string& path, const RawCloud& cloud, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const bool normals = cloud.has_normals();
    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
    out << "element vertex " << cloud.positions.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (normals) out << "property double nx\nproperty double ny\nproperty double nz\n";
    out << "end_header\n";
    if (binary) {
        for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
            out.write(reinterpret_cast<const char*>(cloud.positions[i].data()), 3 * sizeof(double));
            if (normals)
                out.write(reinterpret_cast<const char*>(cloud.normals[i].data()), 3 * sizeof(double));
        }
    } else {
        char buf[256];
        for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
            const Vec3& p = cloud.positions[i];
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", p.x(), p.y(), p.z());
            out << buf;
            if (normals) {
                const Vec3& n = cloud.normals[i];
                std::snprintf(buf, sizeof(buf), " %.17g %.17g %.17g", n.x(), n.y(), n.z());
                out << buf;
            }
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace quadrics
