#include "mfglab/errors.hpp"
#include "mfglab/experiment.hpp"
#include "mfglab/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mfglab {

namespace {

std::string cell(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? cell(*v) : std::string(); }

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

// NaN and infinities have no JSON spelling.
nlohmann::json finite_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json solver_json(const SolverReport& r)
{
    return {{"converged", r.converged}, {"iterations", r.iterations}, {"residual_sup", r.residual_sup},
        {"residual_history", r.residual_history}, {"damping_history", r.damping_history},
        {"linear_iterations", r.linear_iterations}, {"jacobian_audit", r.jacobian_audit},
        {"positivity_margin", r.positivity_margin}, {"mass_identity_residual", r.mass_identity_residual},
        {"failure_reason", r.failure_reason}};
}

nlohmann::json stage_json(const StageRecord& s)
{
    nlohmann::json j{{"path", s.path}, {"sigma", s.sigma}, {"solver", solver_json(s.solver)},
        {"mass_residual", s.mass_residual}, {"sqrt_m_err_sq", optional_json(s.sqrt_m_err_sq)},
        {"u_h1_err", optional_json(s.u_h1_err)}};
    if (s.estimates) {
        nlohmann::json e;
        const auto names = estimate_columns();
        const std::vector<double> v = estimate_values(*s.estimates);
        for (std::size_t c = 0; c < v.size(); ++c) {
            e[std::string(names[c])] = v[c];
        }
        e["diffusion_gradient_sup"] = s.estimates->second.diffusion_gradient_sup;
        e["diffusion_flag"] = s.estimates->second.diffusion_flag;
        j["estimates"] = e;
    }
    nlohmann::json entropy = nlohmann::json::array();
    for (const EntropyCheck& c : s.entropy) {
        entropy.push_back({{"lhs", c.lhs}, {"rhs", c.rhs}, {"c_delta", c.c_delta}, {"passes", c.passes()}});
    }
    j["entropy"] = entropy;
    return j;
}

std::string svg_plot(const ConvergenceAnalysis& a)
{
    const double W = 480, H = 360, L = 60, R = 20, T = 20, B = 50;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < a.sigma.size(); ++i) {
        lx.push_back(std::log10(a.sigma[i]));
        ly.push_back(std::log10(a.density_error[i]));
    }
    const auto [xmin, xmax] = std::minmax_element(lx.begin(), lx.end());
    const auto [ymin, ymax] = std::minmax_element(ly.begin(), ly.end());
    const double x0 = *xmin - 0.5, x1 = *xmax + 0.5, y0 = *ymin - 0.5, y1 = *ymax + 0.5;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    char buf[256];
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\">\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
        L, T, W - L - R, H - T - B);
    s += buf;
    const double ln10 = std::log(10.0);
    const double slope = a.density_fit.slope;
    const double icpt = a.density_fit.intercept / ln10;
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"steelblue\"/>\n",
        px(*xmin), py(icpt + slope * *xmin), px(*xmax), py(icpt + slope * *xmax));
    s += buf;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"firebrick\"/>\n", px(lx[i]),
            py(ly[i]));
        s += buf;
    }
    std::snprintf(buf, sizeof buf,
        "<text x=\"%g\" y=\"%g\" font-size=\"13\">log10 sigma</text>\n"
        "<text x=\"12\" y=\"%g\" font-size=\"13\" transform=\"rotate(-90 12 %g)\">log10 |sqrt m - sqrt m*|^2</text>\n"
        "<text x=\"%g\" y=\"%g\" font-size=\"13\">slope %.3f</text>\n",
        W / 2 - 30, H - 12, H / 2 + 60, H / 2 + 60, L + 10, T + 18, slope);
    s += buf;
    s += "</svg>\n";
    return s;
}

} // namespace

nlohmann::json to_json(const RunRecord& r)
{
    nlohmann::json j;
    j["kind"] = r.kind;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    j["started_at"] = r.started_at;
    j["finished_at"] = r.finished_at;
    j["config"] = r.config;
    nlohmann::json stages = nlohmann::json::array();
    for (const StageRecord& s : r.stages) {
        stages.push_back(stage_json(s));
    }
    j["stages"] = stages;
    if (r.rate) {
        const ConvergenceAnalysis& a = *r.rate;
        j["rate_fit"] = {{"sigma", a.sigma}, {"density_error", a.density_error}, {"value_error", a.value_error},
            {"slope", finite_json(a.density_fit.slope)}, {"intercept", finite_json(a.density_fit.intercept)},
            {"residual", finite_json(a.density_fit.residual)}, {"degenerate", a.degenerate},
            {"value_error_decreasing", a.value_error_decreasing}, {"elementary_gap", a.elementary_gap},
            {"elementary_ok", a.elementary_ok}};
    } else {
        j["rate_fit"] = nullptr;
    }
    nlohmann::json verdicts = nlohmann::json::array();
    for (const Verdict& v : r.verdicts) {
        verdicts.push_back({{"name", v.name}, {"outcome", to_string(v.outcome)}, {"detail", v.detail}});
    }
    j["verdicts"] = verdicts;
    j["details"] = r.details;
    j["all_pass"] = r.all_pass();
    return j;
}

std::string stage_table_csv(const RunRecord& r)
{
    std::string out = "sigma,entropy,mass_residual,sqrt_m_err_sq,u_h1_err,path,converged,iterations,residual_sup,"
                      "positivity_margin";
    const auto names = estimate_columns();
    for (std::size_t c = 1; c < names.size(); ++c) {
        out += ",";
        out += names[c];
    }
    out += ",diffusion_flag\n";
    for (const StageRecord& s : r.stages) {
        std::vector<std::string> row{cell(s.sigma), s.estimates ? cell(s.estimates->first.entropy) : "",
            cell(s.mass_residual), cell(s.sqrt_m_err_sq), cell(s.u_h1_err), s.path, s.solver.converged ? "1" : "0",
            std::to_string(s.solver.iterations), cell(s.solver.residual_sup), cell(s.solver.positivity_margin)};
        if (s.estimates) {
            const std::vector<double> v = estimate_values(*s.estimates);
            for (std::size_t c = 1; c < v.size(); ++c) {
                row.push_back(cell(v[c]));
            }
            row.push_back(s.estimates->second.diffusion_flag ? "1" : "0");
        } else {
            row.resize(row.size() + names.size(), "");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + row[i];
        }
        out += "\n";
    }
    return out;
}

std::vector<std::filesystem::path> emit_report(const RunRecord& record, const std::vector<std::string>& formats,
    const std::filesystem::path& out_dir)
{
    if (record.stages.empty() && record.verdicts.empty()) {
        throw ConfigError("refusing to emit an empty run record");
    }
    for (const std::string& f : formats) {
        if (f != "csv" && f != "json" && f != "svg") {
            throw ConfigError("unknown report format '" + f + "' (expected csv, json or svg)");
        }
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
    const bool plot = record.rate && !record.rate->degenerate;
    std::vector<std::filesystem::path> written;
    if (wants("csv")) {
        written.push_back(out_dir / "stages.csv");
        write_atomically(written.back(), stage_table_csv(record));
    }
    if (wants("svg") && plot) {
        written.push_back(out_dir / "convergence.svg");
        write_atomically(written.back(), svg_plot(*record.rate));
    }
    if (wants("json")) {
        nlohmann::json j = to_json(record);
        if (wants("svg") && !plot) {
            j["svg"] = "not emitted: no rate fit in this record";
        } else if (plot && wants("svg")) {
            j["svg"] = "convergence.svg";
        }
        written.push_back(out_dir / "record.json");
        write_atomically(written.back(), j.dump(2) + "\n");
    }
    return written;
}

} // namespace mfglab
