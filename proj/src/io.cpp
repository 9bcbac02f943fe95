#include "splatkit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace splatkit {

namespace {

// ---------------------------------------------------------------- PLY reader

enum class PlyType { Float32, Float64, Int8, UInt8, Int16, UInt16, Int32, UInt32 };

size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::Float32: return 4;
        case PlyType::Float64: return 8;
        case PlyType::Int8:
        case PlyType::UInt8: return 1;
        case PlyType::Int16:
        case PlyType::UInt16: return 2;
        default: return 4;
    }
}

PlyType parse_ply_type(const std::string& s) {
    if (s == "float" || s == "float32") return PlyType::Float32;
    if (s == "double" || s == "float64") return PlyType::Float64;
    if (s == "char" || s == "int8") return PlyType::Int8;
    if (s == "uchar" || s == "uint8") return PlyType::UInt8;
    if (s == "short" || s == "int16") return PlyType::Int16;
    if (s == "ushort" || s == "uint16") return PlyType::UInt16;
    if (s == "int" || s == "int32") return PlyType::Int32;
    if (s == "uint" || s == "uint32") return PlyType::UInt32;
    throw FormatError("unsupported ply property type: " + s);
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::Float32;
    bool is_list = false;
    PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> properties;
    // scalar property values as double, per property, length == count
    std::vector<std::vector<double>> scalars;
    // list property values, per property, per row
    std::vector<std::vector<std::vector<double>>> lists;

    int property_index(const std::string& name) const {
        for (size_t i = 0; i < properties.size(); ++i)
            if (properties[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

struct PlyFile {
    bool binary = false;
    std::vector<PlyElement> elements;

    PlyElement* element(const std::string& name) {
        for (auto& e : elements)
            if (e.name == name) return &e;
        return nullptr;
    }
};

double read_binary_value(std::istream& in, PlyType t) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(ply_type_size(t)));
    if (!in) throw FormatError("ply: unexpected end of binary payload");
    switch (t) {
        case PlyType::Float32: {
            float v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::Float64: {
            double v;
            std::memcpy(&v, buf, 8);
            return v;
        }
        case PlyType::Int8: return static_cast<int8_t>(buf[0]);
        case PlyType::UInt8: return buf[0];
        case PlyType::Int16: {
            int16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::UInt16: {
            uint16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::Int32: {
            int32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        default: {
            uint32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
    }
}

PlyFile read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ply") throw FormatError(path + " is not a ply file");

    PlyFile ply;
    bool have_format = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii")
                ply.binary = false;
            else if (fmt == "binary_little_endian")
                ply.binary = true;
            else
                throw FormatError("unsupported ply format: " + fmt);
            have_format = true;
        } else if (tok == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            ply.elements.push_back(std::move(e));
        } else if (tok == "property") {
            if (ply.elements.empty()) throw FormatError("ply property before any element");
            std::string t1;
            ls >> t1;
            PlyProperty p;
            if (t1 == "list") {
                std::string ct, vt;
                ls >> ct >> vt >> p.name;
                p.is_list = true;
                p.count_type = parse_ply_type(ct);
                p.type = parse_ply_type(vt);
            } else {
                p.type = parse_ply_type(t1);
                ls >> p.name;
            }
            ply.elements.back().properties.push_back(std::move(p));
        } else if (tok == "end_header") {
            break;
        } else {
            throw FormatError("unrecognized ply header line: " + line);
        }
    }
    if (!have_format) throw FormatError("ply header missing format line");

    for (auto& e : ply.elements) {
        e.scalars.assign(e.properties.size(), {});
        e.lists.assign(e.properties.size(), {});
        for (size_t p = 0; p < e.properties.size(); ++p) {
            if (e.properties[p].is_list)
                e.lists[p].resize(e.count);
            else
                e.scalars[p].resize(e.count);
        }
        for (size_t row = 0; row < e.count; ++row) {
            if (ply.binary) {
                for (size_t p = 0; p < e.properties.size(); ++p) {
                    const auto& prop = e.properties[p];
                    if (prop.is_list) {
                        const size_t n = static_cast<size_t>(read_binary_value(in, prop.count_type));
                        auto& entry = e.lists[p][row];
                        entry.resize(n);
                        for (size_t k = 0; k < n; ++k) entry[k] = read_binary_value(in, prop.type);
                    } else {
                        e.scalars[p][row] = read_binary_value(in, prop.type);
                    }
                }
            } else {
                std::string data_line;
                do {
                    if (!std::getline(in, data_line))
                        throw FormatError("ply: unexpected end of ascii payload in element " +
                                          e.name);
                } while (data_line.find_first_not_of(" \t\r") == std::string::npos);
                std::istringstream ds(data_line);
                for (size_t p = 0; p < e.properties.size(); ++p) {
                    const auto& prop = e.properties[p];
                    if (prop.is_list) {
                        size_t n = 0;
                        if (!(ds >> n)) throw FormatError("ply: bad list count in " + e.name);
                        auto& entry = e.lists[p][row];
                        entry.resize(n);
                        for (size_t k = 0; k < n; ++k)
                            if (!(ds >> entry[k])) throw FormatError("ply: truncated list row");
                    } else {
                        if (!(ds >> e.scalars[p][row]))
                            throw FormatError("ply: truncated row in element " + e.name);
                    }
                }
            }
        }
    }
    return ply;
}

void write_float_le(std::ostream& out, float v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Inverse sigmoid, clamped so 0/1 stay finite; sigmoid(+-18.42) differs
// from 1/0 by ~1e-8, inside the 1e-6 round-trip tolerance.
double logit(double y) {
    const double lim = 18.420680743952367; // log(1e8)
    if (y <= sigmoid(-lim)) return -lim;
    if (y >= sigmoid(lim)) return lim;
    return std::log(y / (1.0 - y));
}

const char* kGaussianProps[Gaussian::kAttributeCount] = {
    "x",       "y",       "z",      "f_dc_0",  "f_dc_1",  "f_dc_2",  "opacity",
    "scale_0", "scale_1", "scale_2", "rot_0",  "rot_1",   "rot_2",   "rot_3"};

} // namespace

GaussianSet load_gaussians_ply(const std::string& path) {
    PlyFile ply = read_ply(path);
    PlyElement* vertex = ply.element("vertex");
    if (!vertex) throw FormatError(path + ": ply has no vertex element");

    int idx[Gaussian::kAttributeCount];
    for (int k = 0; k < Gaussian::kAttributeCount; ++k) {
        idx[k] = vertex->property_index(kGaussianProps[k]);
        if (idx[k] < 0)
            throw FormatError(path + ": missing attribute " + kGaussianProps[k]);
    }

    GaussianSet set;
    set.gaussians.resize(vertex->count);
    for (size_t i = 0; i < vertex->count; ++i) {
        double raw[Gaussian::kAttributeCount];
        for (int k = 0; k < Gaussian::kAttributeCount; ++k) {
            raw[k] = vertex->scalars[idx[k]][i];
            if (!std::isfinite(raw[k]))
                throw ValidationError(path + ": non-finite " + kGaussianProps[k] +
                                      " at element " + std::to_string(i));
        }
        Gaussian& g = set.gaussians[i];
        g.center = {raw[0], raw[1], raw[2]};
        // degree-0 SH is read as plain color; community exports may exceed
        // [0,1], clamp into the valid range
        for (int k = 0; k < 3; ++k) g.color[k] = std::clamp(raw[3 + k], 0.0, 1.0);
        g.opacity = sigmoid(raw[6]);
        for (int k = 0; k < 3; ++k) g.scale[k] = std::exp(raw[7 + k]);
        Eigen::Vector4d q(raw[10], raw[11], raw[12], raw[13]);
        const double norm = q.norm();
        if (norm <= 0.0)
            throw ValidationError(path + ": zero quaternion at element " + std::to_string(i));
        g.rotation = q / norm;
    }
    set.validate();
    return set;
}

void save_gaussians_ply(const GaussianSet& set, const std::string& path, bool binary) {
    if (set.empty()) throw ValidationError("empty gaussian set");
    set.validate();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);

    out << "ply\n";
    out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
    out << "element vertex " << set.size() << "\n";
    for (const char* name : kGaussianProps) out << "property float " << name << "\n";
    out << "end_header\n";

    for (const Gaussian& g : set.gaussians) {
        double row[Gaussian::kAttributeCount] = {
            g.center.x(), g.center.y(),          g.center.z(),          g.color.x(),
            g.color.y(),  g.color.z(),           logit(g.opacity),      std::log(g.scale.x()),
            std::log(g.scale.y()), std::log(g.scale.z()), g.rotation[0], g.rotation[1],
            g.rotation[2], g.rotation[3]};
        if (binary) {
            for (double v : row) write_float_le(out, static_cast<float>(v));
        } else {
            std::ostringstream line;
            line.precision(9);
            for (int k = 0; k < Gaussian::kAttributeCount; ++k)
                line << (k ? " " : "") << row[k];
            out << line.str() << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

// ------------------------------------------------------------------ mesh OBJ

namespace {

TriMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    TriMesh mesh;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "v") {
            Eigen::Vector3d v;
            if (!(ls >> v.x() >> v.y() >> v.z()))
                throw FormatError(path + ":" + std::to_string(line_no) + ": malformed vertex");
            mesh.vertices.push_back(v);
        } else if (tok == "f") {
            std::vector<int> ids;
            std::string ref;
            while (ls >> ref) {
                // accept v, v/vt, v//vn, v/vt/vn
                const size_t slash = ref.find('/');
                const std::string head = slash == std::string::npos ? ref : ref.substr(0, slash);
                int v = 0;
                try {
                    v = std::stoi(head);
                } catch (const std::exception&) {
                    throw FormatError(path + ":" + std::to_string(line_no) +
                                      ": malformed face index '" + ref + "'");
                }
                // negative obj indices are relative to the current vertex count
                if (v < 0) v = static_cast<int>(mesh.vertices.size()) + v + 1;
                ids.push_back(v - 1);
            }
            if (ids.size() < 3)
                throw FormatError(path + ":" + std::to_string(line_no) +
                                  ": face needs at least 3 vertices");
            for (size_t k = 1; k + 1 < ids.size(); ++k) // fan-triangulate polygons
                mesh.faces.push_back({ids[0], ids[k], ids[k + 1]});
        }
        // everything else (vn, vt, usemtl, o, g, s, mtllib) is ignored
    }
    mesh.validate();
    return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17); // decimal round-trip exact for doubles
    for (const auto& v : mesh.vertices) out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    if (!out) throw IoError("write failed: " + path);
}

TriMesh load_mesh_ply(const std::string& path) {
    PlyFile ply = read_ply(path);
    PlyElement* vertex = ply.element("vertex");
    if (!vertex) throw FormatError(path + ": ply has no vertex element");
    const int xi = vertex->property_index("x");
    const int yi = vertex->property_index("y");
    const int zi = vertex->property_index("z");
    if (xi < 0 || yi < 0 || zi < 0) throw FormatError(path + ": vertex element lacks x/y/z");

    TriMesh mesh;
    mesh.vertices.resize(vertex->count);
    for (size_t i = 0; i < vertex->count; ++i)
        mesh.vertices[i] = {vertex->scalars[xi][i], vertex->scalars[yi][i],
                            vertex->scalars[zi][i]};

    if (PlyElement* face = ply.element("face")) {
        int li = face->property_index("vertex_indices");
        if (li < 0) li = face->property_index("vertex_index");
        if (li < 0) throw FormatError(path + ": face element lacks vertex_indices");
        for (size_t i = 0; i < face->count; ++i) {
            const auto& poly = face->lists[li][i];
            if (poly.size() < 3) throw FormatError(path + ": face with fewer than 3 indices");
            for (size_t k = 1; k + 1 < poly.size(); ++k)
                mesh.faces.push_back({static_cast<int>(poly[0]), static_cast<int>(poly[k]),
                                      static_cast<int>(poly[k + 1])});
        }
    }
    mesh.validate();
    return mesh;
}

void save_mesh_ply(const TriMesh& mesh, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "ply\n";
    out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "element face " << mesh.faces.size() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "end_header\n";
    if (binary) {
        for (const auto& v : mesh.vertices)
            for (int k = 0; k < 3; ++k) write_float_le(out, static_cast<float>(v[k]));
        for (const auto& f : mesh.faces) {
            const unsigned char n = 3;
            out.write(reinterpret_cast<const char*>(&n), 1);
            for (int k = 0; k < 3; ++k) {
                const int32_t idx = f[k];
                out.write(reinterpret_cast<const char*>(&idx), 4);
            }
        }
    } else {
        out.precision(9);
        for (const auto& v : mesh.vertices)
            out << v.x() << " " << v.y() << " " << v.z() << "\n";
        for (const auto& f : mesh.faces)
            out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

TriMesh load_mesh(const std::string& path) {
    if (ends_with(path, ".obj")) return load_obj(path);
    if (ends_with(path, ".ply")) return load_mesh_ply(path);
    throw FormatError("unsupported mesh format: " + path);
}

void save_mesh(const TriMesh& mesh, const std::string& path, bool binary_ply) {
    mesh.validate();
    if (ends_with(path, ".obj")) return save_obj(mesh, path);
    if (ends_with(path, ".ply")) return save_mesh_ply(mesh, path, binary_ply);
    throw FormatError("unsupported mesh format: " + path);
}

} // namespace splatkit
