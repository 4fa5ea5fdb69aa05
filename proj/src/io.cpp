#include "mirage/io.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace mirage {

static_assert(std::endian::native == std::endian::little,
              "binary PLY reader/writer assumes a little-endian host");

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_float(float v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

enum class PropType { I8, U8, I16, U16, I32, U32, F32, F64 };

std::size_t prop_size(PropType t) {
    switch (t) {
        case PropType::I8:
        case PropType::U8: return 1;
        case PropType::I16:
        case PropType::U16: return 2;
        case PropType::I32:
        case PropType::U32:
        case PropType::F32: return 4;
        case PropType::F64: return 8;
    }
    return 0;
}

PropType parse_prop_type(const std::string& s, const std::string& context) {
    if (s == "char" || s == "int8") return PropType::I8;
    if (s == "uchar" || s == "uint8") return PropType::U8;
    if (s == "short" || s == "int16") return PropType::I16;
    if (s == "ushort" || s == "uint16") return PropType::U16;
    if (s == "int" || s == "int32") return PropType::I32;
    if (s == "uint" || s == "uint32") return PropType::U32;
    if (s == "float" || s == "float32") return PropType::F32;
    if (s == "double" || s == "float64") return PropType::F64;
    throw ParseError("PLY: unsupported property type '" + s + "' " + context);
}

struct Property {
    std::string name;
    PropType type;
};

double read_binary_value(std::istream& in, PropType t) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(prop_size(t)));
    switch (t) {
        case PropType::I8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
        case PropType::U8: return static_cast<double>(buf[0]);
        case PropType::I16: { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
        case PropType::U16: { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
        case PropType::I32: { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
        case PropType::U32: { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
        case PropType::F32: { float v; std::memcpy(&v, buf, 4); return v; }
        case PropType::F64: { double v; std::memcpy(&v, buf, 8); return v; }
    }
    return 0.0;
}

void assign_field(PointRecord& rec, PointCloud& cloud, const std::string& name, double value,
                  std::size_t record_idx) {
    const std::string where = " (vertex " + std::to_string(record_idx) + ")";
    if (name == "x") {
        rec.position.x() = value;
    } else if (name == "y") {
        rec.position.y() = value;
    } else if (name == "z") {
        rec.position.z() = value;
    } else if (name == "red") {
        rec.color[0] = static_cast<std::uint8_t>(value);
    } else if (name == "green") {
        rec.color[1] = static_cast<std::uint8_t>(value);
    } else if (name == "blue") {
        rec.color[2] = static_cast<std::uint8_t>(value);
    } else if (name == "intensity") {
        if (value < 0.0) throw ParseError("PLY: negative intensity" + where);
        rec.intensity_raw = static_cast<float>(value);
    } else if (name == "intensity_corrected") {
        rec.intensity_corrected = static_cast<float>(value);
    } else if (name == "echo_index") {
        rec.echo_index = static_cast<std::uint8_t>(value);
    } else if (name == "echo_count") {
        rec.echo_count = static_cast<std::uint8_t>(value);
    } else if (name == "gt_label") {
        const int v = static_cast<int>(value);
        if (v != 0 && v != 1 && v != 255)
            throw ParseError("PLY: invalid gt_label " + std::to_string(v) + where);
        rec.gt_label = static_cast<GtLabel>(v);
    } else if (name == "pred_label") {
        const int v = static_cast<int>(value);
        if (v != 0 && v != 1 && v != 255)
            throw ParseError("PLY: invalid pred_label " + std::to_string(v) + where);
        rec.pred_label = static_cast<PredLabel>(v);
    }
    (void)cloud;
}

void validate_record(const PointRecord& rec, std::size_t record_idx) {
    const std::string where = " (vertex " + std::to_string(record_idx) + ")";
    if (!rec.position.allFinite())
        throw ParseError("PLY: non-finite coordinate" + where);
    if (rec.echo_index < 1 || rec.echo_count < 1 || rec.echo_index > rec.echo_count)
        throw ParseError("PLY: echo_index " + std::to_string(rec.echo_index) +
                         " out of range for echo_count " + std::to_string(rec.echo_count) + where);
}

PointCloud load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line) || (line != "ply" && line != "ply\r"))
        throw ParseError("PLY: missing 'ply' magic in " + path);

    PointCloud cloud;
    bool binary = false;
    std::size_t vertex_count = 0;
    std::vector<Property> props;
    bool in_vertex_element = false;
    bool header_done = false;
    std::size_t line_no = 1;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else throw ParseError("PLY: unsupported format '" + fmt + "' at line " +
                                  std::to_string(line_no));
        } else if (word == "comment") {
            std::string key;
            ls >> key;
            if (key == "scanner_origin") {
                if (!(ls >> cloud.scanner_origin.x() >> cloud.scanner_origin.y() >>
                      cloud.scanner_origin.z()))
                    throw ParseError("PLY: malformed scanner_origin comment at line " +
                                     std::to_string(line_no));
            }
        } else if (word == "element") {
            std::string name;
            std::size_t count = 0;
            ls >> name >> count;
            in_vertex_element = (name == "vertex");
            if (in_vertex_element) vertex_count = count;
        } else if (word == "property") {
            if (!in_vertex_element) continue;
            std::string type, name;
            ls >> type >> name;
            if (type == "list")
                throw ParseError("PLY: list properties unsupported at line " +
                                 std::to_string(line_no));
            props.push_back({name, parse_prop_type(type, "at line " + std::to_string(line_no))});
        } else if (word == "end_header") {
            header_done = true;
            break;
        } else if (word.empty() || word == "obj_info") {
            // ignore
        } else {
            throw ParseError("PLY: unexpected header line " + std::to_string(line_no) + ": " + line);
        }
    }
    if (!header_done) throw ParseError("PLY: truncated header in " + path);

    bool has_x = false, has_y = false, has_z = false;
    for (const auto& p : props) {
        if (p.name == "x") has_x = true;
        if (p.name == "y") has_y = true;
        if (p.name == "z") has_z = true;
        if (p.name == "red") cloud.has_color = true;
        if (p.name == "intensity_corrected") cloud.has_corrected_field = true;
    }
    if (!has_x || !has_y || !has_z)
        throw ParseError("PLY: vertex element lacks x/y/z in " + path);

    cloud.points.resize(vertex_count);
    if (binary) {
        for (std::size_t i = 0; i < vertex_count; ++i) {
            for (const auto& p : props) {
                const double v = read_binary_value(in, p.type);
                if (!in) throw ParseError("PLY: truncated binary data at vertex " +
                                          std::to_string(i));
                assign_field(cloud.points[i], cloud, p.name, v, i);
            }
            validate_record(cloud.points[i], i);
        }
    } else {
        for (std::size_t i = 0; i < vertex_count; ++i) {
            if (!std::getline(in, line))
                throw ParseError("PLY: truncated data at vertex " + std::to_string(i));
            std::istringstream ls(line);
            std::string tok;
            for (const auto& p : props) {
                if (!(ls >> tok))
                    throw ParseError("PLY: malformed vertex " + std::to_string(i) + ": " + line);
                char* end = nullptr;
                const double v = std::strtod(tok.c_str(), &end);  // strtod handles nan/inf tokens
                if (end == tok.c_str())
                    throw ParseError("PLY: malformed vertex " + std::to_string(i) + ": " + line);
                assign_field(cloud.points[i], cloud, p.name, v, i);
            }
            validate_record(cloud.points[i], i);
        }
    }
    return cloud;
}

PointCloud load_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        PointRecord rec;
        if (!(ls >> rec.position.x() >> rec.position.y() >> rec.position.z())) {
            // Allow blank lines; anything else is malformed.
            std::istringstream probe(line);
            std::string tok;
            if (probe >> tok)
                throw ParseError("XYZ: malformed line " + std::to_string(line_no) + ": " + line);
            continue;
        }
        double intensity;
        if (ls >> intensity) {
            if (intensity < 0.0)
                throw ParseError("XYZ: negative intensity at line " + std::to_string(line_no));
            rec.intensity_raw = static_cast<float>(intensity);
        }
        if (!rec.position.allFinite())
            throw ParseError("XYZ: non-finite coordinate at line " + std::to_string(line_no));
        cloud.points.push_back(rec);
    }
    return cloud;
}

void append_binary(std::string& buf, const void* data, std::size_t n) {
    buf.append(static_cast<const char*>(data), n);
}

void save_ply(const PointCloud& cloud, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);

    out << "ply\n";
    out << (binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n");
    out << "comment scanner_origin " << fmt_double(cloud.scanner_origin.x()) << ' '
        << fmt_double(cloud.scanner_origin.y()) << ' ' << fmt_double(cloud.scanner_origin.z())
        << '\n';
    out << "element vertex " << cloud.size() << '\n';
    out << "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_color)
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "property float intensity\n";
    if (cloud.has_corrected_field) out << "property float intensity_corrected\n";
    out << "property uchar echo_index\nproperty uchar echo_count\n";
    out << "property uchar gt_label\nproperty uchar pred_label\n";
    out << "end_header\n";

    if (binary) {
        std::string buf;
        buf.reserve(cloud.size() * 48);
        for (const auto& rec : cloud.points) {
            append_binary(buf, rec.position.data(), 24);
            if (cloud.has_color) append_binary(buf, rec.color.data(), 3);
            append_binary(buf, &rec.intensity_raw, 4);
            if (cloud.has_corrected_field) append_binary(buf, &rec.intensity_corrected, 4);
            const std::uint8_t tail[4] = {rec.echo_index, rec.echo_count,
                                          static_cast<std::uint8_t>(rec.gt_label),
                                          static_cast<std::uint8_t>(rec.pred_label)};
            append_binary(buf, tail, 4);
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    } else {
        for (const auto& rec : cloud.points) {
            out << fmt_double(rec.position.x()) << ' ' << fmt_double(rec.position.y()) << ' '
                << fmt_double(rec.position.z());
            if (cloud.has_color)
                out << ' ' << int(rec.color[0]) << ' ' << int(rec.color[1]) << ' '
                    << int(rec.color[2]);
            out << ' ' << fmt_float(rec.intensity_raw);
            if (cloud.has_corrected_field) out << ' ' << fmt_float(rec.intensity_corrected);
            out << ' ' << int(rec.echo_index) << ' ' << int(rec.echo_count) << ' '
                << int(static_cast<std::uint8_t>(rec.gt_label)) << ' '
                << int(static_cast<std::uint8_t>(rec.pred_label)) << '\n';
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

void save_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& rec : cloud.points) {
        out << fmt_double(rec.position.x()) << ' ' << fmt_double(rec.position.y()) << ' '
            << fmt_double(rec.position.z()) << ' ' << fmt_float(rec.intensity_raw) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace

PointCloud load_cloud(const std::string& path, CloudFormat format) {
    switch (format) {
        case CloudFormat::Ply:
        case CloudFormat::PlyBinary: return load_ply(path);
        case CloudFormat::XyzAscii: return load_xyz(path);
    }
    throw IoError("unknown format");
}

void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    switch (format) {
        case CloudFormat::Ply: save_ply(cloud, path, false); return;
        case CloudFormat::PlyBinary: save_ply(cloud, path, true); return;
        case CloudFormat::XyzAscii: save_xyz(cloud, path); return;
    }
    throw IoError("unknown format");
}

PointCloud load_cloud_auto(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "ply") return load_ply(path);
    return load_xyz(path);
}

}  // namespace mirage
