#include "cdic/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "cdic/errors.hpp"

namespace cdic::io {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

}  // namespace

GrayImage load_image(const std::string& path, std::optional<double> mm_per_px) {
    cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (raw.empty()) throw IoError("cannot read image: " + path);
    if (raw.rows == 0 || raw.cols == 0) throw IoError("zero-sized image: " + path);

    double code_max;
    switch (raw.depth()) {
        case CV_8U: code_max = 255.0; break;
        case CV_16U: code_max = 65535.0; break;
        default: throw IoError("unsupported bit depth (want 8- or 16-bit): " + path);
    }
    if (raw.channels() != 1 && raw.channels() != 3 && raw.channels() != 4)
        throw IoError("unsupported channel count " + std::to_string(raw.channels()) + ": " +
                      path);

    GrayImage img(raw.cols, raw.rows);
    img.code_max = code_max;
    img.mm_per_px = mm_per_px;
    for (int y = 0; y < raw.rows; ++y)
        for (int x = 0; x < raw.cols; ++x) {
            double code;
            if (raw.channels() == 1) {
                code = raw.depth() == CV_8U ? raw.at<uint8_t>(y, x) : raw.at<uint16_t>(y, x);
            } else {
                // OpenCV loads color as BGR(A); luminance weights 0.299/0.587/0.114
                double b, g, r;
                if (raw.depth() == CV_8U) {
                    const uint8_t* p = raw.ptr<uint8_t>(y) + x * raw.channels();
                    b = p[0], g = p[1], r = p[2];
                } else {
                    const uint16_t* p = raw.ptr<uint16_t>(y) + x * raw.channels();
                    b = p[0], g = p[1], r = p[2];
                }
                code = 0.299 * r + 0.587 * g + 0.114 * b;
            }
            img.at(x, y) = code / code_max;
        }
    validate_image(img);
    return img;
}

void save_png(const GrayImage& img, const std::string& path) {
    cv::Mat m(img.height(), img.width(), CV_8U);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            m.at<uint8_t>(y, x) =
                static_cast<uint8_t>(std::lround(std::clamp(img.at(x, y), 0.0, 1.0) * 255.0));
    if (!cv::imwrite(path, m)) throw IoError("cannot write PNG: " + path);
}

void save_overlay_png(const GrayImage& base, const std::vector<Vec2>& red_px,
                      const std::string& path) {
    cv::Mat m(base.height(), base.width(), CV_8UC3);
    for (int y = 0; y < base.height(); ++y)
        for (int x = 0; x < base.width(); ++x) {
            const uint8_t g =
                static_cast<uint8_t>(std::lround(std::clamp(base.at(x, y), 0.0, 1.0) * 255.0));
            m.at<cv::Vec3b>(y, x) = cv::Vec3b(g, g, g);
        }
    for (const Vec2& p : red_px) {
        const int cx = static_cast<int>(std::lround(p.x));
        const int cy = static_cast<int>(std::lround(p.y));
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int x = cx + dx, y = cy + dy;
                if (x >= 0 && x < m.cols && y >= 0 && y < m.rows)
                    m.at<cv::Vec3b>(y, x) = cv::Vec3b(0, 0, 255);  // BGR red
            }
    }
    if (!cv::imwrite(path, m)) throw IoError("cannot write PNG: " + path);
}

void write_field_csv(const DisplacementField& field, std::optional<double> mm_per_px,
                     const std::string& path) {
    auto f = open_out(path);
    f << "frame,grid_x,grid_y,pixel_x,pixel_y,u_px,v_px,u_mm,v_mm,zncc,valid\n";
    const double s = mm_per_px.value_or(std::nan(""));
    for (int iy = 0; iy < field.grid.ny(); ++iy)
        for (int ix = 0; ix < field.grid.nx(); ++ix) {
            const bool ok = field.valid(ix, iy) != 0;
            const double u = field.u(ix, iy), v = field.v(ix, iy);
            f << field.frame_index << ',' << ix << ',' << iy << ',' << field.grid.pixel_x(ix)
              << ',' << field.grid.pixel_y(iy) << ',' << fmt(u) << ',' << fmt(v) << ','
              << fmt(u * s) << ',' << fmt(v * s) << ',' << fmt(field.zncc(ix, iy)) << ','
              << (ok ? 1 : 0) << '\n';
        }
}

namespace {

struct DicfHeader {
    char magic[4];
    uint8_t version;
    uint8_t reserved;
    uint16_t step;
    uint32_t nx, ny;
    uint32_t origin_x, origin_y;
    double scale;
};
static_assert(sizeof(DicfHeader) == 32, "DICF header must be exactly 32 bytes");

}  // namespace

void write_field_dicf(const DisplacementField& field, std::optional<double> mm_per_px,
                      const std::string& path) {
    auto f = open_out(path, std::ios::out | std::ios::binary);
    DicfHeader h{};
    std::memcpy(h.magic, "DICF", 4);
    h.version = 1;
    h.step = static_cast<uint16_t>(field.grid.step);
    h.nx = static_cast<uint32_t>(field.grid.nx());
    h.ny = static_cast<uint32_t>(field.grid.ny());
    h.origin_x = static_cast<uint32_t>(field.grid.x0);
    h.origin_y = static_cast<uint32_t>(field.grid.y0);
    h.scale = mm_per_px.value_or(0.0);
    f.write(reinterpret_cast<const char*>(&h), sizeof h);
    auto dump = [&](const Grid2<double>& g) {
        f.write(reinterpret_cast<const char*>(g.v.data()),
                static_cast<std::streamsize>(g.v.size() * sizeof(double)));
    };
    dump(field.u);
    dump(field.v);
    dump(field.zncc);
    f.write(reinterpret_cast<const char*>(field.valid.v.data()),
            static_cast<std::streamsize>(field.valid.v.size()));
    if (!f) throw IoError("short write: " + path);
}

DisplacementField read_field_dicf(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    DicfHeader h{};
    f.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!f || std::memcmp(h.magic, "DICF", 4) != 0)
        throw IoError("not a DICF file: " + path);
    if (h.version != 1) throw IoError("unsupported DICF version: " + path);

    DisplacementField field;
    field.grid = RoiGrid{static_cast<int>(h.origin_x), static_cast<int>(h.origin_y),
                         static_cast<int>(h.nx) * h.step, static_cast<int>(h.ny) * h.step,
                         h.step};
    if (h.scale > 0.0) field.mm_per_px = h.scale;
    const int nx = static_cast<int>(h.nx), ny = static_cast<int>(h.ny);
    field.u = Grid2<double>(nx, ny);
    field.v = Grid2<double>(nx, ny);
    field.zncc = Grid2<double>(nx, ny);
    field.valid = Grid2<uint8_t>(nx, ny);
    field.origin = Grid2<int32_t>(nx, ny, -1);
    auto slurp = [&](Grid2<double>& g) {
        f.read(reinterpret_cast<char*>(g.v.data()),
               static_cast<std::streamsize>(g.v.size() * sizeof(double)));
    };
    slurp(field.u);
    slurp(field.v);
    slurp(field.zncc);
    f.read(reinterpret_cast<char*>(field.valid.v.data()),
           static_cast<std::streamsize>(field.valid.v.size()));
    if (!f) throw IoError("truncated DICF file: " + path);
    return field;
}

void write_benchmark_csv(const std::vector<synthetic::BenchmarkRow>& rows,
                         const std::string& path) {
    auto f = open_out(path);
    f << "mode,frame,alpha_deg,mae_x_px,mae_y_px,strict_mae_x_px,strict_mae_y_px,"
         "invalid_count,valid_count\n";
    for (const auto& r : rows)
        f << synthetic::mode_name(r.mode) << ',' << r.frame << ',' << fmt(r.alpha_deg) << ','
          << fmt(r.mae_x) << ',' << fmt(r.mae_y) << ',' << fmt(r.strict_x) << ','
          << fmt(r.strict_y) << ',' << r.n_invalid << ',' << r.n_valid << '\n';
}

void write_benchmark_svg(const std::vector<synthetic::BenchmarkRow>& rows,
                         const std::string& path) {
    // strict MAE_x per frame, one polyline per mode
    std::map<std::string, std::vector<std::pair<int, double>>> series;
    int max_frame = 1;
    double max_val = 1e-6;
    for (const auto& r : rows) {
        const double v = std::isnan(r.mae_x) ? r.strict_x : r.mae_x;
        series[synthetic::mode_name(r.mode)].emplace_back(r.frame, v);
        max_frame = std::max(max_frame, r.frame);
        max_val = std::max(max_val, v);
    }
    const double w = 640, h = 420, ml = 70, mb = 50, mt = 20, mr = 20;
    const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};
    auto sx = [&](double f) { return ml + (w - ml - mr) * f / max_frame; };
    auto sy = [&](double v) { return h - mb - (h - mb - mt) * v / max_val; };

    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << ml << "\" y2=\"" << mt
      << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">frame</text>\n";
    f << "<text x=\"16\" y=\"" << (h - mb + mt) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (h - mb + mt) / 2 << ")\">MAE_x (px)</text>\n";
    int ci = 0;
    double ly = mt + 14;
    for (auto& [name, pts] : series) {
        std::sort(pts.begin(), pts.end());
        f << "<polyline fill=\"none\" stroke=\"" << colors[ci % 4] << "\" points=\"";
        for (const auto& [fr, v] : pts) f << sx(fr) << ',' << sy(v) << ' ';
        f << "\"/>\n";
        f << "<text x=\"" << ml + 10 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\""
          << colors[ci % 4] << "\">" << name << "</text>\n";
        ly += 16;
        ++ci;
    }
    f << "</svg>\n";
}

void write_crack_report_csv(const std::vector<CrackFrameSummary>& rows, double delta_c_mm,
                            double mean_speed_mm_s, const std::string& path) {
    auto f = open_out(path);
    f << "# delta_c_mm=" << fmt(delta_c_mm) << " mean_speed_mm_s=" << fmt(mean_speed_mm_s)
      << "\n";
    f << "frame,time_s,tip_found,tip_x_mm,tip_y_mm,n_edge_points,speed_mm_s\n";
    for (const auto& r : rows)
        f << r.frame << ',' << fmt(r.time_s) << ',' << (r.tip_found ? 1 : 0) << ','
          << fmt(r.tip_x_mm) << ',' << fmt(r.tip_y_mm) << ',' << r.n_edge_points << ','
          << fmt(r.speed_mm_s) << '\n';
}

void write_edges_csv(const crack::EdgeSet& edges, const std::string& path) {
    auto f = open_out(path);
    f << "frame,grid_x,grid_y,side,ref_x_px,ref_y_px,def_x_px,def_y_px,opening_mm\n";
    for (const auto& p : edges.points)
        f << edges.frame << ',' << p.ix << ',' << p.iy << ',' << p.side << ','
          << fmt(p.ref_x_px) << ',' << fmt(p.ref_y_px) << ',' << fmt(p.def_x_px) << ','
          << fmt(p.def_y_px) << ',' << fmt(p.opening_mm) << '\n';
}

void write_ctod_grid_csv(const std::vector<double>& lx_mm, const std::vector<double>& ly_mm,
                         const Grid2<double>& ctod, const std::string& path) {
    auto f = open_out(path);
    f << "ly_mm\\lx_mm";
    for (double lx : lx_mm) f << ',' << fmt(lx);
    f << '\n';
    for (size_t r = 0; r < ly_mm.size(); ++r) {
        f << fmt(ly_mm[r]);
        for (size_t c = 0; c < lx_mm.size(); ++c)
            f << ',' << fmt(ctod(static_cast<int>(c), static_cast<int>(r)));
        f << '\n';
    }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<LoadSample> read_load_history(const std::string& path) {
    std::vector<LoadSample> out;
    for (const auto& row : read_csv(path)) {
        if (row.empty() || row[0].empty() || row[0][0] == '#') continue;
        if (row.size() < 3) throw IoError("load history rows need time_s,load_kN,displacement_mm");
        char* end = nullptr;
        const double t = std::strtod(row[0].c_str(), &end);
        if (end == row[0].c_str()) continue;  // header line
        out.push_back({t, std::strtod(row[1].c_str(), nullptr),
                       std::strtod(row[2].c_str(), nullptr)});
    }
    if (out.empty()) throw IoError("no samples in load history: " + path);
    return out;
}

int last_prepeak_index(const std::vector<LoadSample>& history) {
    int peak = 0;
    for (int i = 1; i < static_cast<int>(history.size()); ++i)
        if (history[i].load_kn > history[peak].load_kn) peak = i;
    return peak > 0 ? peak - 1 : 0;
}

}  // namespace cdic::io
