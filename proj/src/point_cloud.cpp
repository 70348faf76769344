/*
 * Copyright 2026 The samp Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "samp/point_cloud.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace samp {
namespace {

bool ends_with(const std::string& s, const std::string& suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<double> parse_numbers(const std::string& line, const std::string& path, int line_no)
{
    std::vector<double> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw InputError(path + ":" + std::to_string(line_no) + ": not a number: '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

PointCloud read_xyz(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw InputError("cannot open point cloud " + path);
    }
    PointCloud cloud;
    std::string line;
    int line_no = 0;
    int columns = -1;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        const auto values = parse_numbers(line, path, line_no);
        if (values.empty()) {
            continue;
        }
        if (values.size() != 3 && values.size() != 6) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected 3 or 6 columns");
        }
        if (columns < 0) {
            columns = static_cast<int>(values.size());
        } else if (columns != static_cast<int>(values.size())) {
            throw InputError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
        }
        cloud.points.emplace_back(values[0], values[1], values[2]);
        if (values.size() == 6) {
            cloud.normals.emplace_back(values[3], values[4], values[5]);
        }
    }
    return cloud;
}

PointCloud read_ply(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw InputError("cannot open point cloud " + path);
    }
    std::string line;
    if (!std::getline(is, line) || line.rfind("ply", 0) != 0) {
        throw InputError(path + ": missing ply header");
    }
    std::size_t vertex_count = 0;
    std::vector<std::string> props;
    bool in_vertex = false;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "ascii") {
                throw InputError(path + ": only ASCII PLY is supported");
            }
        } else if (key == "element") {
            std::string name;
            ls >> name;
            in_vertex = name == "vertex";
            if (in_vertex) {
                ls >> vertex_count;
            }
        } else if (key == "property" && in_vertex) {
            std::string type;
            std::string name;
            ls >> type >> name;
            props.push_back(name);
        } else if (key == "end_header") {
            break;
        }
    }
    auto find = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < props.size(); ++i) {
            if (props[i] == name) {
                return static_cast<int>(i);
            }
        }
        return -1;
    };
    const int ix = find("x");
    const int iy = find("y");
    const int iz = find("z");
    const int inx = find("nx");
    const int iny = find("ny");
    const int inz = find("nz");
    if (ix < 0 || iy < 0 || iz < 0) {
        throw InputError(path + ": vertex element lacks x/y/z");
    }
    const bool normals = inx >= 0 && iny >= 0 && inz >= 0;
    PointCloud cloud;
    for (std::size_t n = 0; n < vertex_count; ++n) {
        if (!std::getline(is, line)) {
            throw InputError(path + ": expected " + std::to_string(vertex_count) + " vertices");
        }
        const auto v = parse_numbers(line, path, static_cast<int>(n));
        if (v.size() < props.size()) {
            throw InputError(path + ": short vertex line " + std::to_string(n));
        }
        cloud.points.emplace_back(v[ix], v[iy], v[iz]);
        if (normals) {
            cloud.normals.emplace_back(v[inx], v[iny], v[inz]);
        }
    }
    return cloud;
}

} // namespace

PointCloud read_point_cloud(const std::string& path)
{
    return ends_with(path, ".ply") ? read_ply(path) : read_xyz(path);
}

void write_xyz(const std::string& path, const PointCloud& cloud)
{
    std::ofstream os(path);
    if (!os) {
        throw InputError("cannot open " + path + " for writing");
    }
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        os << p.x() << ' ' << p.y() << ' ' << p.z();
        if (cloud.has_normals()) {
            const Vec3& n = cloud.normals[i];
            os << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
        }
        os << '\n';
    }
}

void write_ply(const std::string& path, const PointCloud& cloud)
{
    std::ofstream os(path);
    if (!os) {
        throw InputError("cannot open " + path + " for writing");
    }
    os << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
       << "\nproperty float x\nproperty float y\nproperty float z\n";
    if (cloud.has_normals()) {
        os << "property float nx\nproperty float ny\nproperty float nz\n";
    }
    os << "end_header\n";
    os << std::setprecision(9);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        os << p.x() << ' ' << p.y() << ' ' << p.z();
        if (cloud.has_normals()) {
            const Vec3& n = cloud.normals[i];
            os << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
        }
        os << '\n';
    }
}

} // namespace samp
