#include "qv/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qv/io.hpp"

namespace qv {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        else if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

TomlValue parse_value(const std::string& raw);

TomlValue parse_array(const std::string& raw) {
    std::vector<TomlValue> items;
    std::string body = trim(raw.substr(1, raw.size() - 2));
    std::string cur;
    int depth = 0;
    bool in_str = false;
    for (char c : body) {
        if (c == '"') in_str = !in_str;
        if (!in_str) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                if (!trim(cur).empty()) items.push_back(parse_value(trim(cur)));
                cur.clear();
                continue;
            }
        }
        cur += c;
    }
    if (!trim(cur).empty()) items.push_back(parse_value(trim(cur)));
    return TomlValue{std::move(items)};
}

TomlValue parse_value(const std::string& raw) {
    if (raw.empty()) throw std::runtime_error("config: empty value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw std::runtime_error("config: unterminated string");
        return TomlValue{raw.substr(1, raw.size() - 2)};
    }
    if (raw.front() == '[') {
        if (raw.back() != ']') throw std::runtime_error("config: unterminated array");
        return parse_array(raw);
    }
    if (raw == "true") return TomlValue{true};
    if (raw == "false") return TomlValue{false};
    size_t pos = 0;
    double d = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::runtime_error("config: bad value: " + raw);
    return TomlValue{d};
}

}  // namespace

TomlDoc parse_toml(const std::string& text) {
    TomlDoc doc;
    std::string section;
    std::istringstream in(text);
    std::string line, pending;
    while (std::getline(in, line)) {
        line = trim(strip_comment(line));
        if (!pending.empty()) {
            line = pending + " " + line;
            pending.clear();
        }
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::runtime_error("config: bad section header");
            section = trim(line.substr(1, line.size() - 2));
            doc[section];
            continue;
        }
        if (section.empty()) throw std::runtime_error("config: key before any [section]");
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("config: expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        // Multi-line arrays: keep accumulating until brackets balance.
        long depth = std::count(val.begin(), val.end(), '[') -
                     std::count(val.begin(), val.end(), ']');
        if (depth > 0) {
            pending = line;
            continue;
        }
        doc[section][key] = parse_value(val);
    }
    if (!pending.empty()) throw std::runtime_error("config: unterminated array");
    return doc;
}

uint64_t config_hash(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

ExperimentConfig ExperimentConfig::load(const std::string& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot read config " + file);
    std::stringstream ss;
    ss << f.rdbuf();
    ExperimentConfig c;
    c.raw_text = ss.str();
    c.doc = parse_toml(c.raw_text);
    c.hash = config_hash(c.raw_text);
    return c;
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
    auto s = doc.find(section);
    return s != doc.end() && s->second.count(key) > 0;
}

double ExperimentConfig::number(const std::string& section, const std::string& key,
                                double fallback) const {
    if (!has(section, key)) return fallback;
    const auto& v = doc.at(section).at(key);
    if (!v.is_number()) throw std::runtime_error("config: " + section + "." + key + " not a number");
    return std::get<double>(v.v);
}

double ExperimentConfig::require_number(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw std::runtime_error("config: missing " + section + "." + key);
    return number(section, key, 0.0);
}

std::string ExperimentConfig::str(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    const auto& v = doc.at(section).at(key);
    if (!v.is_string()) throw std::runtime_error("config: " + section + "." + key + " not a string");
    return std::get<std::string>(v.v);
}

bool ExperimentConfig::flag(const std::string& section, const std::string& key,
                            bool fallback) const {
    if (!has(section, key)) return fallback;
    const auto& v = doc.at(section).at(key);
    if (!v.is_bool()) throw std::runtime_error("config: " + section + "." + key + " not a bool");
    return std::get<bool>(v.v);
}

std::vector<double> ExperimentConfig::numbers(const std::string& section,
                                              const std::string& key) const {
    std::vector<double> out;
    if (!has(section, key)) return out;
    const auto& v = doc.at(section).at(key);
    if (v.is_number()) {
        out.push_back(std::get<double>(v.v));
        return out;
    }
    if (!v.is_array()) throw std::runtime_error("config: " + section + "." + key + " not an array");
    for (const auto& e : std::get<std::vector<TomlValue>>(v.v)) {
        if (!e.is_number())
            throw std::runtime_error("config: " + section + "." + key + " has non-numeric entry");
        out.push_back(std::get<double>(e.v));
    }
    return out;
}

PathRecipe ExperimentConfig::recipe(const std::string& section) const {
    PathRecipe r;
    std::string kind = str(section, "kind", "walk");
    if (kind == "walk") r.kind = RecipeKind::ScaledRandomWalk;
    else if (kind == "fbm") r.kind = RecipeKind::FBM;
    else if (kind == "step") r.kind = RecipeKind::StepFV;
    else if (kind == "smooth") r.kind = RecipeKind::SmoothFV;
    else if (kind == "jumpdiffusion") r.kind = RecipeKind::JumpDiffusion;
    else throw std::runtime_error("config: unknown path kind: " + kind);
    r.seed = static_cast<uint64_t>(number(section, "seed", 0));
    r.horizon = number(section, "horizon", 1.0);
    r.dim = static_cast<int>(number(section, "dim", 1));
    r.level = static_cast<int>(number(section, "level", 10));
    r.hurst = number(section, "hurst", 0.8);
    auto sig = numbers(section, "sigma");
    if (!sig.empty()) {
        int cols = static_cast<int>(number(section, "sigma_cols", r.dim));
        if (static_cast<int>(sig.size()) != r.dim * cols)
            throw std::runtime_error("config: sigma must have dim*sigma_cols entries (row-major)");
        r.sigma = unflatten(Eigen::Map<const Eigen::VectorXd>(sig.data(), sig.size()), r.dim, cols);
    }
    auto jt = numbers(section, "jump_times");
    auto jd = numbers(section, "jump_deltas");
    if (jd.size() != jt.size() * static_cast<size_t>(r.dim))
        if (!jt.empty() || !jd.empty())
            throw std::runtime_error("config: jump_deltas must have dim entries per jump time");
    for (size_t i = 0; i < jt.size(); ++i) {
        Eigen::VectorXd delta(r.dim);
        for (int k = 0; k < r.dim; ++k) delta[k] = jd[i * r.dim + k];
        r.jumps.push_back({jt[i], std::move(delta)});
    }
    auto poly = numbers(section, "poly");
    if (!poly.empty()) r.poly.push_back(poly);
    r.sin_amp = numbers(section, "sin_amp");
    r.sin_freq = numbers(section, "sin_freq");
    return r;
}

PartitionSequence ExperimentConfig::partitions(double horizon,
                                               const std::vector<CadlagPath>& family) const {
    std::string kind = str("partition", "kind", "dyadic");
    if (kind == "dyadic") {
        int n_max = static_cast<int>(number("partition", "n_max", 12));
        int n_min = static_cast<int>(number("partition", "n_min", 0));
        return n_min > 0 ? dyadic_range(horizon, n_min, n_max) : dyadic_sequence(horizon, n_max);
    }
    if (kind == "uniform") {
        auto meshes = numbers("partition", "counts");
        std::vector<size_t> counts;
        for (double m : meshes) counts.push_back(static_cast<size_t>(m));
        return uniform_mesh_sequence(horizon, counts);
    }
    if (kind == "osc") {
        auto eps = numbers("partition", "eps");
        return oscillation_controlled_sequence(family, eps);
    }
    if (kind == "explicit") {
        std::string file = str("partition", "file", "");
        if (file.empty()) throw std::runtime_error("config: explicit partition needs file=");
        return explicit_sequence(read_partition_levels_csv(file));
    }
    throw std::runtime_error("config: unknown partition kind: " + kind);
}

BilinearForm ExperimentConfig::bilinear(int d) const {
    std::string kind = str("bilinear", "kind", "inner");
    if (kind == "inner") return BilinearForm::inner(d);
    if (kind == "outer") return BilinearForm::outer(d);
    if (kind == "coefficients") {
        auto c = numbers("bilinear", "c");
        if (c.empty() || c.size() % static_cast<size_t>(d * d) != 0)
            throw std::runtime_error("config: bilinear.c must hold k d*d blocks (row-major)");
        std::vector<Eigen::MatrixXd> mats;
        for (size_t k = 0; k * d * d < c.size(); ++k)
            mats.push_back(unflatten(
                Eigen::Map<const Eigen::VectorXd>(c.data() + k * d * d, d * d), d, d));
        return BilinearForm::coefficients(std::move(mats));
    }
    throw std::runtime_error("config: unknown bilinear kind: " + kind);
}

Crossnorm ExperimentConfig::crossnorm() const {
    return crossnorm_from_string(str("bilinear", "crossnorm", "projective"));
}

SmoothFunction ExperimentConfig::function() const {
    std::string preset = str("function", "preset", "norm_sq");
    if (preset == "norm_sq") {
        int d = static_cast<int>(number("function", "dim", number("path", "dim", 1)));
        return SmoothFunction::norm_sq(d);
    }
    if (preset == "sin") return SmoothFunction::sin1d();
    if (preset == "square") return SmoothFunction::square1d();
    if (preset == "bilinear_ax") return SmoothFunction::bilinear_ax();
    if (preset == "custom_poly") {
        auto c = numbers("function", "coeff");
        if (c.empty()) throw std::runtime_error("config: custom_poly needs coeff=[...]");
        return SmoothFunction::custom_poly(c);
    }
    if (preset == "linear") {
        auto m = numbers("function", "matrix");
        int rows = static_cast<int>(number("function", "rows", 1));
        if (m.empty() || m.size() % static_cast<size_t>(rows) != 0)
            throw std::runtime_error("config: linear preset needs matrix=[...] and rows=");
        int cols = static_cast<int>(m.size()) / rows;
        return SmoothFunction::linear(
            unflatten(Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()), rows, cols));
    }
    throw std::runtime_error("config: unknown function preset: " + preset);
}

std::vector<double> ExperimentConfig::reporting_times(double horizon) const {
    auto times = numbers("options", "reporting_times");
    if (!times.empty()) {
        for (double t : times)
            if (t < 0.0 || t > horizon)
                throw std::runtime_error("config: reporting time outside [0,T]");
        std::sort(times.begin(), times.end());
        return times;
    }
    int n = static_cast<int>(number("options", "n_report", 8));
    std::vector<double> out;
    for (int i = 1; i <= n; ++i) out.push_back(horizon * i / n);
    return out;
}

}  // namespace qv
