#include "cdic/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fnmatch.h>
#include <fstream>
#include <set>
#include <sstream>

#include "cdic/errors.hpp"

namespace fs = std::filesystem;

namespace cdic::config {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void fail(const std::string& section, const std::string& key,
                       const std::string& why) {
    throw ConfigError("[" + section + "] " + key + ": " + why);
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty()) fail(section, key, "not a number: '" + v + "'");
    return d;
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
    const double d = to_double(section, key, v);
    if (d != std::floor(d)) fail(section, key, "not an integer: '" + v + "'");
    return static_cast<int>(d);
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    const std::string s = lower(v);
    if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
    if (s == "off" || s == "false" || s == "0" || s == "no") return false;
    fail(section, key, "expected on/off: '" + v + "'");
}

}  // namespace

void KeyValues::set(const std::string& section, const std::string& key,
                    const std::string& value) {
    const std::string full = section + "." + key;
    if (!values.count(full)) order.emplace_back(full, value);
    else
        for (auto& [k, v] : order)
            if (k == full) v = value;
    values[full] = value;
}

std::optional<std::string> KeyValues::get(const std::string& section,
                                          const std::string& key) const {
    const auto it = values.find(section + "." + key);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

KeyValues parse_text(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
        kv.set(section, lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
    }
    return kv;
}

KeyValues parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str());
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
    for (const std::string& o : overrides) {
        const size_t eq = o.find('=');
        const size_t dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override must look like section.key=value: '" + o + "'");
        kv.set(lower(trim(o.substr(0, dot))), lower(trim(o.substr(dot + 1, eq - dot - 1))),
               trim(o.substr(eq + 1)));
    }
}

crack::Orientation parse_orientation(const std::string& s) {
    const std::string v = lower(s);
    if (v == "vertical") return crack::Orientation::Vertical;
    if (v == "horizontal") return crack::Orientation::Horizontal;
    throw ConfigError("[crack] orientation: expected vertical or horizontal, got '" + s + "'");
}

std::vector<double> parse_grid_spec(const std::string& spec, const std::string& field) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a = 0, s = 0, b = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(spec);
        if (!(ss >> a >> c1 >> s >> c2 >> b) || c1 != ':' || c2 != ':' || s <= 0)
            throw ConfigError(field + ": expected min:step:max, got '" + spec + "'");
        for (double v = a; v <= b + 1e-12; v += s) out.push_back(v);
    } else {
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ';'))
            if (!trim(tok).empty()) out.push_back(std::strtod(trim(tok).c_str(), nullptr));
    }
    if (out.empty()) throw ConfigError(field + ": empty probe grid '" + spec + "'");
    return out;
}

namespace {

const std::set<std::string> kKnownKeys = {
    "paths.reference", "paths.frames", "paths.frame_list", "paths.output",
    "roi.x", "roi.y", "roi.width", "roi.height",
    "dic.subset_half_width", "dic.step", "dic.shape_order", "dic.zncc_threshold",
    "dic.tolerance", "dic.max_iterations", "dic.seed_search_radius", "dic.seeds",
    "dic.mm_per_pixel", "dic.threads",
    "sequence.incremental", "sequence.update_mode", "sequence.update_interval",
    "sequence.trigger_mean_seed_zncc", "sequence.trigger_invalid_fraction",
    "sequence.composition", "sequence.fps",
    "crack.enabled", "crack.orientation", "crack.delta_c", "crack.prepeak_frame",
    "crack.load_history", "crack.lx_grid", "crack.ly_grid", "crack.noise_floor_mm",
    "crack.band_begin", "crack.band_end",
};

std::vector<std::pair<int, int>> parse_seeds(const std::string& v) {
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(v);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        pair = trim(pair);
        if (pair.empty()) continue;
        int x = 0, y = 0;
        char comma = 0;
        std::istringstream ps(pair);
        if (!(ps >> x >> comma >> y) || comma != ',')
            throw ConfigError("[dic] seeds: expected 'x,y; x,y; ...', got '" + pair + "'");
        out.emplace_back(x, y);
    }
    return out;
}

}  // namespace

RunConfig load_run_config(const KeyValues& kv) {
    for (const auto& [full, _] : kv.order) {
        if (full.rfind("run.", 0) == 0) continue;  // manifest echo section
        if (!kKnownKeys.count(full)) throw ConfigError("unknown config key '" + full + "'");
    }

    RunConfig c;
    auto need = [&](const char* sec, const char* key) {
        const auto v = kv.get(sec, key);
        if (!v) throw ConfigError(std::string("[") + sec + "] missing required key '" + key + "'");
        return *v;
    };
    auto opt_str = [&](const char* sec, const char* key, std::string& dst) {
        if (const auto v = kv.get(sec, key)) dst = *v;
    };
    auto opt_int = [&](const char* sec, const char* key, int& dst) {
        if (const auto v = kv.get(sec, key)) dst = to_int(sec, key, *v);
    };
    auto opt_double = [&](const char* sec, const char* key, double& dst) {
        if (const auto v = kv.get(sec, key)) dst = to_double(sec, key, *v);
    };
    auto opt_bool = [&](const char* sec, const char* key, bool& dst) {
        if (const auto v = kv.get(sec, key)) dst = to_bool(sec, key, *v);
    };

    c.reference = need("paths", "reference");
    opt_str("paths", "frames", c.frames);
    opt_str("paths", "frame_list", c.frame_list);
    if (c.frames.empty() && c.frame_list.empty())
        throw ConfigError("[paths] needs 'frames' (glob/dir) or 'frame_list'");
    c.output = need("paths", "output");

    c.roi_x = to_int("roi", "x", need("roi", "x"));
    c.roi_y = to_int("roi", "y", need("roi", "y"));
    c.roi_w = to_int("roi", "width", need("roi", "width"));
    c.roi_h = to_int("roi", "height", need("roi", "height"));
    if (c.roi_w < 1 || c.roi_h < 1) throw ConfigError("[roi] width/height must be positive");

    opt_int("dic", "subset_half_width", c.subset_half);
    opt_int("dic", "step", c.step);
    opt_int("dic", "shape_order", c.shape_order);
    opt_double("dic", "zncc_threshold", c.zncc_threshold);
    opt_double("dic", "tolerance", c.tolerance);
    opt_int("dic", "max_iterations", c.max_iterations);
    opt_int("dic", "seed_search_radius", c.seed_search_radius);
    opt_double("dic", "mm_per_pixel", c.mm_per_px);
    opt_int("dic", "threads", c.threads);
    c.seeds_px = parse_seeds(need("dic", "seeds"));
    if (c.seeds_px.empty()) throw ConfigError("[dic] seeds: at least one seed is required");
    if (c.subset_half < 3) throw ConfigError("[dic] subset_half_width must be >= 3");
    if (c.shape_order != 1 && c.shape_order != 2)
        throw ConfigError("[dic] shape_order must be 1 or 2");
    if (c.step < 1) throw ConfigError("[dic] step must be >= 1");

    opt_bool("sequence", "incremental", c.incremental);
    opt_str("sequence", "update_mode", c.update_mode);
    c.update_mode = lower(c.update_mode);
    if (c.update_mode != "trigger" && c.update_mode != "interval")
        throw ConfigError("[sequence] update_mode must be trigger or interval");
    opt_int("sequence", "update_interval", c.update_interval);
    opt_double("sequence", "trigger_mean_seed_zncc", c.trigger_mean_seed_zncc);
    opt_double("sequence", "trigger_invalid_fraction", c.trigger_invalid_fraction);
    opt_str("sequence", "composition", c.composition);
    c.composition = lower(c.composition);
    if (c.composition != "displaced" && c.composition != "literal")
        throw ConfigError("[sequence] composition must be displaced or literal");
    opt_double("sequence", "fps", c.fps);
    if (!(c.fps > 0.0)) throw ConfigError("[sequence] fps must be positive");

    opt_bool("crack", "enabled", c.crack_enabled);
    if (const auto v = kv.get("crack", "delta_c")) {
        if (lower(*v) == "determine") {
            c.delta_c_mode = "determine";
        } else {
            c.delta_c_mode = "value";
            c.delta_c = to_double("crack", "delta_c", *v);
            if (!(c.delta_c > 0.0)) throw ConfigError("[crack] delta_c must be positive");
        }
    }
    opt_str("crack", "orientation", c.orientation);
    parse_orientation(c.orientation);  // validates
    opt_int("crack", "prepeak_frame", c.prepeak_frame);
    opt_str("crack", "load_history", c.load_history);
    if (const auto v = kv.get("crack", "lx_grid"))
        c.lx_grid = parse_grid_spec(*v, "[crack] lx_grid");
    if (const auto v = kv.get("crack", "ly_grid"))
        c.ly_grid = parse_grid_spec(*v, "[crack] ly_grid");
    opt_double("crack", "noise_floor_mm", c.noise_floor_mm);
    opt_int("crack", "band_begin", c.band_begin);
    opt_int("crack", "band_end", c.band_end);

    if (c.crack_enabled) {
        if (!(c.mm_per_px > 0.0))
            throw ConfigError("[dic] mm_per_pixel is required when crack analysis is enabled");
        // step guidance for crack measurement: below 1/6 of the subset size
        if (c.step > 2.0 * c.subset_half / 6.0)
            c.warnings.push_back("step exceeds 1/6 of subset size (step " +
                                 std::to_string(c.step) + ", subset " +
                                 std::to_string(2 * c.subset_half + 1) +
                                 "); crack detection wants a finer grid");
    }
    return c;
}

std::pair<RoiGrid, SeedSpec> resolve_grid(const RunConfig& cfg, int img_w, int img_h) {
    RoiGrid grid{cfg.roi_x, cfg.roi_y, cfg.roi_w, cfg.roi_h, cfg.step};
    validate_grid(grid, cfg.subset_half, img_w, img_h);
    SeedSpec seeds;
    for (const auto& [px, py] : cfg.seeds_px) {
        const int dx = px - grid.x0, dy = py - grid.y0;
        if (dx < 0 || dy < 0 || dx % grid.step || dy % grid.step)
            throw ConfigError("[dic] seeds: (" + std::to_string(px) + "," + std::to_string(py) +
                              ") is not on the correlation grid (origin " +
                              std::to_string(grid.x0) + "," + std::to_string(grid.y0) +
                              ", step " + std::to_string(grid.step) + ")");
        const Seed s{dx / grid.step, dy / grid.step, cfg.seed_search_radius};
        if (s.ix >= grid.nx() || s.iy >= grid.ny())
            throw ConfigError("[dic] seeds: (" + std::to_string(px) + "," + std::to_string(py) +
                              ") lies outside the ROI");
        seeds.seeds.push_back(s);
    }
    validate_seeds(seeds, grid);
    return {grid, seeds};
}

namespace {

// Natural comparison: digit runs compare numerically. Used to reject
// orderings where lexicographic and numeric disagree.
int natural_cmp(const std::string& a, const std::string& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) &&
            std::isdigit(static_cast<unsigned char>(b[j]))) {
            size_t i2 = i, j2 = j;
            while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
            while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
            const std::string na = a.substr(i, i2 - i), nb = b.substr(j, j2 - j);
            const std::string ta = na.substr(na.find_first_not_of('0') == std::string::npos
                                                 ? na.size() - 1
                                                 : na.find_first_not_of('0'));
            const std::string tb = nb.substr(nb.find_first_not_of('0') == std::string::npos
                                                 ? nb.size() - 1
                                                 : nb.find_first_not_of('0'));
            if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
            if (ta != tb) return ta < tb ? -1 : 1;
            i = i2;
            j = j2;
        } else {
            if (a[i] != b[j]) return a[i] < b[j] ? -1 : 1;
            ++i;
            ++j;
        }
    }
    if (i == a.size() && j == b.size()) return 0;
    return i == a.size() ? -1 : 1;
}

}  // namespace

std::vector<std::string> expand_frames(const RunConfig& cfg) {
    std::vector<std::string> out;
    if (!cfg.frame_list.empty()) {
        std::ifstream f(cfg.frame_list);
        if (!f) throw ConfigError("cannot open frame list: " + cfg.frame_list);
        std::string line;
        while (std::getline(f, line)) {
            line = trim(line);
            if (!line.empty() && line[0] != '#') out.push_back(line);
        }
        if (out.empty()) throw ConfigError("frame list is empty: " + cfg.frame_list);
        return out;
    }

    fs::path spec(cfg.frames);
    fs::path dir;
    std::string pattern;
    if (fs::is_directory(spec)) {
        dir = spec;
        pattern = "*";
    } else {
        dir = spec.parent_path().empty() ? fs::path(".") : spec.parent_path();
        pattern = spec.filename().string();
    }
    if (!fs::is_directory(dir))
        throw ConfigError("frame directory does not exist: " + dir.string());

    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        if (fnmatch(pattern.c_str(), name.c_str(), 0) != 0) continue;
        const std::string ext = lower(e.path().extension().string());
        if (ext == ".png" || ext == ".tif" || ext == ".tiff") names.push_back(name);
    }
    if (names.empty())
        throw ConfigError("no frames match '" + cfg.frames + "'");
    std::sort(names.begin(), names.end());
    for (size_t i = 1; i < names.size(); ++i)
        if (natural_cmp(names[i - 1], names[i]) > 0)
            throw ConfigError("frame ordering is ambiguous ('" + names[i - 1] + "' vs '" +
                              names[i] +
                              "'): zero-pad frame numbers or provide paths.frame_list");
    for (const std::string& n : names) out.push_back((dir / n).string());
    return out;
}

std::string manifest_text(const KeyValues& kv,
                          const std::vector<std::pair<std::string, std::string>>& run_keys) {
    std::ostringstream out;
    out << "# run manifest: [run] reports the analysis, the other sections echo the\n"
           "# resolved configuration and can be fed back to `analyze -c`.\n";
    std::string section;
    for (const auto& [full, value] : kv.order) {
        const size_t dot = full.find('.');
        const std::string sec = full.substr(0, dot);
        if (sec != section) {
            out << "[" << sec << "]\n";
            section = sec;
        }
        out << full.substr(dot + 1) << " = " << value << "\n";
    }
    out << "[run]\n";
    for (const auto& [k, v] : run_keys) out << k << " = " << v << "\n";
    return out.str();
}

}  // namespace cdic::config
