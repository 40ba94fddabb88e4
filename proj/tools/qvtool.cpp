#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qv/config.hpp"
#include "qv/io.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

struct Ctx {
    qv::ExperimentConfig cfg;
    std::string out_dir = ".";
    bool strict = false;
};

std::string hex64(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json report_header(const Ctx& ctx) {
    return {{"version", kVersion}, {"config_hash", hex64(ctx.cfg.hash)}};
}

void write_json(const Ctx& ctx, const std::string& name, nlohmann::json j) {
    j.update(report_header(ctx));
    std::ofstream f(std::filesystem::path(ctx.out_dir) / name);
    if (!f) throw std::runtime_error("cannot write " + name);
    f << j.dump(2) << "\n";
}

qv::CadlagPath load_path(const Ctx& ctx, const std::string& section = "path") {
    std::string file = ctx.cfg.str(section, "file", "");
    if (!file.empty()) return qv::read_path_csv(file);
    return qv::generate(ctx.cfg.recipe(section));
}

qv::QVLimitOptions limit_options(const Ctx& ctx) {
    qv::QVLimitOptions o;
    o.tolerance = ctx.cfg.number("options", "tolerance", 1e-6);
    o.richardson_order = static_cast<int>(ctx.cfg.number("options", "richardson", 0));
    return o;
}

// The control path A for f(A_t, X_t); a zero placeholder when f ignores it.
qv::FVPath control_path(const Ctx& ctx, const qv::SmoothFunction& f, double horizon) {
    if (f.a_dim() > 0 && (ctx.cfg.doc.count("apath") > 0))
        return load_path(ctx, "apath");
    int d = std::max(f.a_dim(), 1);
    return qv::CadlagPath::constant(horizon, Eigen::VectorXd::Zero(d));
}

int verdict_exit(const Ctx& ctx, qv::Verdict v) {
    return (ctx.strict && v == qv::Verdict::Inconclusive) ? 2 : 0;
}

int cmd_qv(const Ctx& ctx) {
    qv::CadlagPath X = load_path(ctx);
    auto seq = ctx.cfg.partitions(X.horizon(), {X});
    auto times = ctx.cfg.reporting_times(X.horizon());
    auto B = ctx.cfg.bilinear(X.dim());
    auto res = qv::qv_limit(B, X, X, seq, times, limit_options(ctx));
    qv::write_qv_csv(res.estimate, (std::filesystem::path(ctx.out_dir) / "qv.csv").string());
    write_json(ctx, "qv.json",
               {{"estimate", qv::to_json(res.estimate)},
                {"operator_norm", B.operator_norm()},
                {"norm_is_estimate", B.norm_is_estimate()}});
    return verdict_exit(ctx, res.estimate.verdict);
}

int cmd_ito(const Ctx& ctx) {
    auto f = ctx.cfg.function();
    qv::CadlagPath X = load_path(ctx);
    qv::FVPath A = control_path(ctx, f, X.horizon());
    auto seq = ctx.cfg.partitions(X.horizon(), {X});
    auto times = ctx.cfg.reporting_times(X.horizon());
    auto rep = qv::ito_profile(f, A, X, seq, times);
    // Advisory admissibility preflight, stamped on the report.
    auto pre = qv::check_condition_C(seq, X, times, {0.5, 0.1, 0.02}, {});
    rep.preflight.assign(pre.begin(), pre.end());
    qv::write_ito_csv(rep, (std::filesystem::path(ctx.out_dir) / "ito.csv").string());
    double final_res = 0.0;
    for (const auto& r : rep.rows)
        if (r.level == rep.rows.back().level)
            final_res = std::max(final_res, r.residual.norm() / (1.0 + r.lhs.norm()));
    nlohmann::json prej = nlohmann::json::array();
    for (const auto& p : rep.preflight) prej.push_back(qv::to_json(p));
    write_json(ctx, "ito.json", {{"final_relative_residual", final_res}, {"preflight", prej}});
    return 0;
}

int cmd_c1(const Ctx& ctx) {
    auto f = ctx.cfg.function();
    qv::CadlagPath X = load_path(ctx);
    qv::FVPath A = control_path(ctx, f, X.horizon());
    auto seq = ctx.cfg.partitions(X.horizon(), {X});
    auto times = ctx.cfg.reporting_times(X.horizon());
    auto opts = limit_options(ctx);
    auto fp = f.a_dim() > 0 ? qv::PathFunctional::from_smooth(f, A)
                            : qv::PathFunctional::time_independent(f);
    auto qv_x = qv::qv_limit(qv::BilinearForm::outer(X.dim()), X, X, seq, times, opts);
    auto direct = qv::c1_qv_direct(fp, X, seq, times, opts);
    auto formula = qv::c1_qv_formula(fp, X, qv_x.qv, times);
    double gap = 0.0;
    for (double t : times) {
        Eigen::VectorXd d = direct.qv.path.value(t) - formula.path.value(t);
        gap = std::max(gap, d.norm() / (1.0 + formula.path.value(t).norm()));
    }
    qv::write_qv_csv(direct.estimate, (std::filesystem::path(ctx.out_dir) / "c1.csv").string());
    write_json(ctx, "c1.json",
               {{"direct", qv::to_json(direct.estimate)}, {"relative_gap", gap}});
    return verdict_exit(ctx, direct.estimate.verdict);
}

int cmd_intqv(const Ctx& ctx) {
    auto f = ctx.cfg.function();
    qv::CadlagPath X = load_path(ctx);
    qv::FVPath A = control_path(ctx, f, X.horizon());
    auto seq = ctx.cfg.partitions(X.horizon(), {X});
    auto times = ctx.cfg.reporting_times(X.horizon());
    auto opts = limit_options(ctx);
    auto qv_x = qv::qv_limit(qv::BilinearForm::outer(X.dim()), X, X, seq, times, opts);
    auto res = qv::integral_qv(f, A, X, qv_x.qv, seq, times, opts);
    qv::write_qv_csv(res.lhs.estimate,
                     (std::filesystem::path(ctx.out_dir) / "intqv.csv").string());
    write_json(ctx, "intqv.json",
               {{"lhs", qv::to_json(res.lhs.estimate)}, {"max_gap", res.max_gap}});
    return verdict_exit(ctx, res.lhs.estimate.verdict);
}

int cmd_density(const Ctx& ctx) {
    qv::CadlagPath X = load_path(ctx);
    auto seq = ctx.cfg.partitions(X.horizon(), {X});
    auto times = ctx.cfg.reporting_times(X.horizon());
    auto opts = limit_options(ctx);
    auto B = ctx.cfg.bilinear(X.dim());
    auto qv_B = qv::qv_limit(B, X, X, seq, times, opts);
    auto qv_s = qv::qv_limit(qv::BilinearForm::inner(X.dim()), X, X, seq, times, opts);
    int cells = static_cast<int>(ctx.cfg.number("options", "cells", 16));
    double q_T = qv_s.qv.path.value(X.horizon())[0];
    double floor = ctx.cfg.number("options", "floor", 1e-8 * q_T);
    auto dissection = qv::Partition::uniform(X.horizon(), cells);
    auto dens = qv::density_estimate(qv_B.qv, qv_s.qv, dissection, floor, ctx.cfg.crossnorm(),
                                     B.operator_norm());
    nlohmann::json j = {{"density", qv::to_json(dens)}};
    if (B.kind() == qv::BilinearKind::Outer &&
        ctx.cfg.crossnorm() == qv::Crossnorm::Projective) {
        auto unit = qv::unit_density_check(dens, qv_B.qv, qv_s.qv, times);
        j["unit_density"] = qv::to_json(unit);
    }
    write_json(ctx, "density.json", std::move(j));
    return verdict_exit(ctx, qv_B.estimate.verdict == qv::Verdict::Pass
                                 ? qv_s.estimate.verdict
                                 : qv_B.estimate.verdict);
}

int cmd_decompose(const Ctx& ctx) {
    auto f = ctx.cfg.function();
    qv::CadlagPath X = load_path(ctx);
    qv::FVPath A = control_path(ctx, f, X.horizon());
    auto seq = ctx.cfg.partitions(X.horizon(), {X});
    auto times = ctx.cfg.reporting_times(X.horizon());
    auto opts = limit_options(ctx);
    auto qv_x = qv::qv_limit(qv::BilinearForm::outer(X.dim()), X, X, seq, times, opts);
    auto dec = qv::rough_fv_decompose(f, A, X, qv_x.qv, seq, times);
    namespace fs = std::filesystem;
    qv::write_path_csv(dec.Y, (fs::path(ctx.out_dir) / "decompose_Y.csv").string());
    qv::write_path_csv(dec.C, (fs::path(ctx.out_dir) / "decompose_C.csv").string());
    qv::write_path_csv(dec.D, (fs::path(ctx.out_dir) / "decompose_D.csv").string());
    write_json(ctx, "decompose.json",
               {{"max_reconstruction_error", dec.max_reconstruction_error}});
    return 0;
}

int cmd_check(const Ctx& ctx) {
    qv::CadlagPath X = load_path(ctx);
    auto seq = ctx.cfg.partitions(X.horizon(), {X});
    auto t_grid = ctx.cfg.reporting_times(X.horizon());
    auto eps = ctx.cfg.numbers("options", "eps_grid");
    if (eps.empty()) eps = {0.5, 0.1, 0.02};
    qv::ConditionOptions copts;
    copts.tolerance = ctx.cfg.number("options", "tolerance", 1e-9);
    auto c = qv::check_condition_C(seq, X, t_grid, eps, copts);
    auto la = qv::check_left_approximation(seq, X, t_grid, copts);
    nlohmann::json arr = nlohmann::json::array();
    bool inconclusive = false;
    for (const auto& r : {c[0], c[1], c[2], la}) {
        arr.push_back(qv::to_json(r));
        std::cout << qv::to_string(r.condition) << ": " << qv::to_string(r.verdict) << "\n";
        inconclusive |= r.verdict == qv::Verdict::Inconclusive;
    }
    write_json(ctx, "check.json", {{"reports", arr}});
    return ctx.strict && inconclusive ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathwise quadratic-variation experiment runner"};
    app.set_version_flag("--version", kVersion);
    std::string config_file, out_dir = ".";
    bool strict = false;
    app.add_option("--config", config_file, "experiment config (TOML)")->required();
    app.add_flag("--strict", strict, "exit 2 when a result is Inconclusive");
    app.add_option("--out", out_dir, "output directory");

    std::map<std::string, int (*)(const Ctx&)> handlers = {
        {"qv", cmd_qv},         {"ito", cmd_ito},           {"c1", cmd_c1},
        {"intqv", cmd_intqv},   {"density", cmd_density},   {"decompose", cmd_decompose},
        {"check", cmd_check}};
    for (auto& [name, fn] : handlers) app.add_subcommand(name)->fallthrough();
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    // Accepted for interface compatibility; computations are deterministic
    // regardless of the thread budget.
    if (const char* threads = std::getenv("QVTOOL_THREADS")) (void)threads;

    Ctx ctx;
    ctx.out_dir = out_dir;
    ctx.strict = strict;
    try {
        ctx.cfg = qv::ExperimentConfig::load(config_file);
        std::filesystem::create_directories(out_dir);
        for (auto& [name, fn] : handlers)
            if (app.got_subcommand(name)) return fn(ctx);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
