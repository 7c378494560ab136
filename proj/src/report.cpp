#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "voxpcg/harness.hpp"

namespace voxpcg {

std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    os << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

namespace {

std::string xyz(Vec3 p) { return fmt::format("{} {} {}", p.x, p.y, p.z); }

}  // namespace

std::string door_sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out = "entrance_wall,entrance_xyz,exit_wall,exit_xyz,connected,path_length,n_jumps,seed\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", wall_name(r.entrance.wall), xyz(r.entrance.foot),
                           wall_name(r.exit.wall), xyz(r.exit.foot), r.connected ? 1 : 0, r.path_length, r.n_jumps,
                           r.seed);
    }
    return out;
}

std::string collapsed_csv(const std::vector<CollapsedCell>& cells) {
    std::string out = "dx,dy,dz,total,connected,mean_path_length,failure_rate\n";
    for (const auto& c : cells) {
        out += fmt::format("{},{},{},{},{},{},{}\n", c.dx, c.dy, c.dz, c.total, c.connected,
                           csv_number(c.mean_path_length), csv_number(c.failure_rate));
    }
    return out;
}

std::string circumference_csv(const CircumferenceTables& t) {
    std::string out = "entrance_pos,exit_pos,total,mean_path_length,failure_rate\n";
    for (int i = 0; i < t.size; ++i)
        for (int j = 0; j < t.size; ++j) {
            const auto k = static_cast<std::size_t>(i * t.size + j);
            out += fmt::format("{},{},{},{},{}\n", i, j, t.total[k], csv_number(t.mean_path_length[k]),
                               csv_number(t.failure_rate[k]));
        }
    return out;
}

std::string control_csv(const std::vector<ControlRow>& rows) {
    std::string out = "target,mean,std,n\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{}\n", csv_number(r.target), csv_number(r.mean), csv_number(r.std), r.n);
    }
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

constexpr std::array<std::array<int, 3>, 5> kStops{{{0x44, 0x01, 0x54},
                                                     {0x3b, 0x52, 0x8b},
                                                     {0x21, 0x91, 0x8c},
                                                     {0x5e, 0xc9, 0x62},
                                                     {0xfd, 0xe7, 0x25}}};

std::string colour(double t) {
    t = std::clamp(t, 0.0, 1.0) * (kStops.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(t), kStops.size() - 2);
    const double f = t - static_cast<double>(i);
    std::array<int, 3> c{};
    for (std::size_t k = 0; k < 3; ++k) {
        c[k] = static_cast<int>(std::lround(kStops[i][k] + f * (kStops[i + 1][k] - kStops[i][k])));
    }
    return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
}

}  // namespace

std::string heatmap_svg(const std::string& csv, const std::string& row_col, const std::string& col_col,
                        const std::string& value_col, const std::string& title) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("heatmap CSV is empty");
    const auto header = split(line);
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::invalid_argument(fmt::format("heatmap CSV has no column '{}'", name));
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto rc = column(row_col), cc = column(col_col), vc = column(value_col);
    std::map<std::pair<int, int>, double> cells;
    int rows = 0, cols = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != header.size()) throw std::invalid_argument("heatmap CSV row has the wrong field count");
        const int r = std::stoi(f[rc]), c = std::stoi(f[cc]);
        rows = std::max(rows, r + 1);
        cols = std::max(cols, c + 1);
        if (!f[vc].empty()) cells[{r, c}] = std::stod(f[vc]);
    }
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& [k, v] : cells) {
        if (first || v < lo) lo = v;
        if (first || v > hi) hi = v;
        first = false;
    }
    constexpr int kCell = 16, kMargin = 40, kLegend = 60;
    const int width = kMargin + cols * kCell + kLegend, height = kMargin + rows * kCell + 30;
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", width, height,
        width, height);
    out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
    out += fmt::format("<text x=\"{}\" y=\"16\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n", kMargin, title);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n", kMargin,
                       kMargin + rows * kCell + 20, col_col);
    out += fmt::format(
        "<text x=\"10\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" transform=\"rotate(-90 10 {})\">{}</text>\n",
        kMargin + rows * kCell, kMargin + rows * kCell, row_col);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const auto it = cells.find({r, c});
            const std::string fill =
                it == cells.end() ? "#ffffff" : colour(hi > lo ? (it->second - lo) / (hi - lo) : 0.0);
            out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#dddddd\"/>\n",
                               kMargin + c * kCell, kMargin + (rows - 1 - r) * kCell, kCell, kCell, fill);
        }
    const int lx = kMargin + cols * kCell + 10;
    for (int i = 0; i < 5; ++i) {
        out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", lx,
                           kMargin + (4 - i) * 14, colour(i / 4.0));
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\">{:.4g}</text>\n", lx + 14,
                       kMargin + 10, hi);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\">{:.4g}</text>\n", lx + 14,
                       kMargin + 4 * 14 + 10, lo);
    out += "</svg>\n";
    return out;
}

}  // namespace voxpcg
