#include "qv/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qv {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
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

std::ofstream open_out(const std::string& file) {
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write " + file);
    return f;
}

}  // namespace

void write_path_csv(const CadlagPath& path, const std::string& file) {
    auto f = open_out(file);
    f << "# interp=" << (path.interp() == Interp::PiecewiseLinear ? "linear" : "constant") << "\n";
    const int d = path.dim();
    f << "t";
    for (int i = 1; i <= d; ++i) f << ",x" << i;
    for (int i = 1; i <= d; ++i) f << ",jump" << i;
    f << "\n";
    std::set<double> times(path.grid().begin(), path.grid().end());
    for (const auto& j : path.jumps()) times.insert(j.time);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    for (double t : times) {
        Eigen::VectorXd x = path.continuous_value(t);
        Eigen::VectorXd jp = path.jump_at(t);
        f << fmt17(t);
        for (int i = 0; i < d; ++i) f << "," << fmt17(x[i]);
        for (int i = 0; i < d; ++i) f << "," << fmt17(jp[i]);
        f << "\n";
    }
}

CadlagPath read_path_csv(const std::string& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot read " + file);
    Interp interp = Interp::PiecewiseLinear;
    std::string line;
    int d = -1;
    std::vector<double> grid;
    std::vector<Eigen::VectorXd> samples;
    std::vector<Jump> jumps;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("interp=");
            if (pos != std::string::npos) {
                std::string v = line.substr(pos + 7);
                while (!v.empty() && (v.back() == '\r' || v.back() == ' ')) v.pop_back();
                if (v == "constant") interp = Interp::PiecewiseConstantRight;
                else if (v != "linear") throw std::runtime_error("unknown interp: " + v);
            }
            continue;
        }
        auto cells = split_csv(line);
        if (cells[0] == "t") {  // header
            if ((cells.size() - 1) % 2 != 0) throw std::runtime_error("bad path CSV header");
            d = static_cast<int>((cells.size() - 1) / 2);
            continue;
        }
        if (d < 0) throw std::runtime_error("path CSV: missing header");
        if (static_cast<int>(cells.size()) != 1 + 2 * d)
            throw std::runtime_error("path CSV: wrong column count");
        double t = std::stod(cells[0]);
        Eigen::VectorXd x(d), jp(d);
        for (int i = 0; i < d; ++i) x[i] = std::stod(cells[1 + i]);
        for (int i = 0; i < d; ++i) jp[i] = std::stod(cells[1 + d + i]);
        grid.push_back(t);
        samples.push_back(std::move(x));
        if (jp.norm() != 0.0) jumps.push_back({t, std::move(jp)});
    }
    if (grid.size() < 2) throw std::runtime_error("path CSV: need at least two rows");
    return CadlagPath(std::move(grid), std::move(samples), std::move(jumps), interp);
}

void write_qv_csv(const ConvergenceEstimate& est, const std::string& file) {
    auto f = open_out(file);
    const int m = est.limit.empty() ? 0 : static_cast<int>(est.limit.front().size());
    f << "t,level";
    for (int i = 1; i <= m; ++i) f << ",value_" << i;
    f << "\n";
    for (size_t n = 0; n < est.values.size(); ++n)
        for (size_t k = 0; k < est.times.size(); ++k) {
            f << fmt17(est.times[k]) << "," << est.level_labels[n];
            for (int i = 0; i < m; ++i) f << "," << fmt17(est.values[n][k][i]);
            f << "\n";
        }
    for (size_t k = 0; k < est.times.size(); ++k) {
        f << fmt17(est.times[k]) << ",limit";
        for (int i = 0; i < m; ++i) f << "," << fmt17(est.limit[k][i]);
        f << "\n";
    }
}

void write_ito_csv(const ItoReport& rep, const std::string& file) {
    auto f = open_out(file);
    f << "level,t,component,lhs,term_a,term_x,term_qv,term_jump,residual\n";
    for (const auto& r : rep.rows)
        for (int i = 0; i < r.lhs.size(); ++i)
            f << r.level << "," << fmt17(r.t) << "," << i + 1 << "," << fmt17(r.lhs[i]) << ","
              << fmt17(r.term_a[i]) << "," << fmt17(r.term_x[i]) << "," << fmt17(r.term_qv[i])
              << "," << fmt17(r.term_jump[i]) << "," << fmt17(r.residual[i]) << "\n";
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

nlohmann::json to_json(const ConvergenceEstimate& est) {
    nlohmann::json j;
    j["times"] = est.times;
    j["levels"] = est.level_labels;
    j["verdict"] = to_string(est.verdict);
    j["cauchy_tail"] = est.cauchy_tail;
    j["tolerance"] = est.tolerance;
    nlohmann::json lim = nlohmann::json::array();
    for (const auto& v : est.limit) lim.push_back(vec_json(v));
    j["limit"] = lim;
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& lvl : est.values) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& v : lvl) row.push_back(vec_json(v));
        vals.push_back(row);
    }
    j["values"] = vals;
    return j;
}

nlohmann::json to_json(const ConditionReport& rep) {
    nlohmann::json j;
    j["condition"] = to_string(rep.condition);
    j["verdict"] = to_string(rep.verdict);
    j["tolerance"] = rep.tolerance;
    j["eps_grid"] = rep.eps_grid;
    j["t_grid"] = rep.t_grid;
    if (rep.witness) {
        j["witness"] = {{"level", rep.witness->level},
                        {"time_a", rep.witness->time_a},
                        {"time_b", rep.witness->time_b},
                        {"value", rep.witness->value},
                        {"note", rep.witness->note}};
    }
    return j;
}

nlohmann::json to_json(const AbsContinuityReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"s", r.s}, {"t", r.t}, {"lhs", r.lhs}, {"rhs", r.rhs},
                        {"violation", r.violation}});
    return {{"rows", rows}, {"max_violation", rep.max_violation}, {"slack", rep.slack}};
}

nlohmann::json to_json(const DensityEstimate& d) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : d.cells) {
        nlohmann::json cj = {{"a", c.a}, {"b", c.b}, {"has_mass", c.has_mass}, {"dQ", c.dQ}};
        if (c.has_mass) {
            cj["q"] = vec_json(c.q);
            cj["q_norm"] = c.q_norm;
        }
        cells.push_back(std::move(cj));
    }
    return {{"cells", cells},
            {"floor", d.floor},
            {"max_norm_excess", d.max_norm_excess},
            {"reconstruction_error", d.reconstruction_error}};
}

nlohmann::json to_json(const UnitDensityReport& rep) {
    return {{"mean_deviation", rep.mean_deviation},
            {"max_deviation", rep.max_deviation},
            {"variation_gap", rep.variation_gap}};
}

std::vector<Partition> read_partition_levels_csv(const std::string& file) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot read " + file);
    std::vector<Partition> levels;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> pts;
        for (const auto& c : split_csv(line))
            if (!c.empty()) pts.push_back(std::stod(c));
        if (!pts.empty()) levels.push_back(Partition(std::move(pts)));
    }
    return levels;
}

}  // namespace qv
