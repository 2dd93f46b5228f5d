#include "mfglab/errors.hpp"
#include "mfglab/experiment.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <set>
#include <sstream>

namespace mfglab {

namespace {

std::string where(const YAML::Node& node)
{
    const YAML::Mark m = node.Mark();
    return m.is_null() ? std::string("config") : "config line " + std::to_string(m.line + 1);
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg)
{
    throw ConfigError(where(node) + ": " + msg);
}

void allow_keys(const YAML::Node& node, std::initializer_list<std::string_view> keys)
{
    if (!node.IsMap()) {
        fail(node, "expected a mapping");
    }
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            fail(kv.first, "unknown key '" + key + "'");
        }
    }
}

template <class T>
T scalar(const YAML::Node& node, const char* name)
{
    if (!node.IsScalar()) {
        fail(node, std::string("'") + name + "' must be a scalar");
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        fail(node, std::string("cannot read '") + name + "' from '" + node.Scalar() + "'");
    }
}

template <class T>
void read(const YAML::Node& parent, const char* name, T& out)
{
    if (const YAML::Node n = parent[name]) {
        out = scalar<T>(n, name);
    }
}

std::vector<double> read_list(const YAML::Node& node, const char* name)
{
    if (!node.IsSequence()) {
        fail(node, std::string("'") + name + "' must be a list");
    }
    std::vector<double> out;
    for (const auto& v : node) {
        out.push_back(scalar<double>(v, name));
    }
    return out;
}

FieldSpec read_field(const YAML::Node& node, const char* name)
{
    if (node.IsScalar()) {
        return FieldSpec::constant(scalar<double>(node, name));
    }
    allow_keys(node, {"mean", "modes"});
    FieldSpec f;
    read(node, "mean", f.mean);
    if (const YAML::Node modes = node["modes"]) {
        if (!modes.IsSequence()) {
            fail(modes, "'modes' must be a list");
        }
        for (const auto& m : modes) {
            allow_keys(m, {"k", "cos", "sin"});
            FieldSpec::Mode mode;
            const YAML::Node k = m["k"];
            if (!k || !k.IsSequence() || k.size() < 1 || k.size() > 2) {
                fail(m, "each mode needs 'k' as a list of one or two integers");
            }
            for (std::size_t a = 0; a < k.size(); ++a) {
                mode.k[a] = scalar<int>(k[a], "k");
            }
            read(m, "cos", mode.cos);
            read(m, "sin", mode.sin);
            f.modes.push_back(mode);
        }
    }
    return f;
}

InitialGuess read_guess(const YAML::Node& node)
{
    allow_keys(node, {"density", "value"});
    InitialGuess g;
    if (node["density"]) {
        g.density = read_field(node["density"], "density");
    }
    if (node["value"]) {
        g.value = read_field(node["value"], "value");
    }
    return g;
}

void read_model(const YAML::Node& node, ModelSpec& m)
{
    allow_keys(node, {"family", "diffusion", "drift", "potential", "gamma", "beta", "alpha"});
    if (const YAML::Node f = node["family"]) {
        m.family = family_from_string(scalar<std::string>(f, "family"));
    }
    if (node["diffusion"]) {
        m.diffusion = read_field(node["diffusion"], "diffusion");
    }
    if (const YAML::Node b = node["drift"]) {
        if (!b.IsSequence()) {
            fail(b, "'drift' must be a list with one entry per axis");
        }
        for (const auto& c : b) {
            m.drift.push_back(read_field(c, "drift"));
        }
    }
    if (node["potential"]) {
        m.potential = read_field(node["potential"], "potential");
    }
    read(node, "gamma", m.gamma);
    read(node, "beta", m.beta);
    read(node, "alpha", m.alpha);
}

void read_controls(const YAML::Node& node, SolverControls& c)
{
    allow_keys(node, {"tol", "max_iter", "damping", "linear", "audit_jacobian", "gmres_restart", "gmres_max_iter",
                         "gmres_rtol"});
    read(node, "tol", c.tol);
    read(node, "max_iter", c.max_iter);
    read(node, "damping", c.damping);
    read(node, "audit_jacobian", c.audit_jacobian);
    read(node, "gmres_restart", c.gmres_restart);
    read(node, "gmres_max_iter", c.gmres_max_iter);
    read(node, "gmres_rtol", c.gmres_rtol);
    if (const YAML::Node l = node["linear"]) {
        const std::string s = scalar<std::string>(l, "linear");
        if (s == "gmres") {
            c.linear = LinearSolver::gmres;
        } else if (s == "dense") {
            c.linear = LinearSolver::dense;
        } else {
            fail(l, "linear solver must be gmres or dense");
        }
    }
}

nlohmann::json field_json(const FieldSpec& f)
{
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : f.modes) {
        modes.push_back({{"k", {m.k[0], m.k[1]}}, {"cos", m.cos}, {"sin", m.sin}});
    }
    return {{"mean", f.mean}, {"modes", modes}};
}

nlohmann::json guess_json(const InitialGuess& g)
{
    return {{"density", field_json(g.density)}, {"value", field_json(g.value)}};
}

// Rethrow library errors from a validation probe as configuration errors.
template <class F>
void probe(const std::string& what, F&& f)
{
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

} // namespace

PeriodicField FieldSpec::build(const Grid& grid) const
{
    Spectrum s(grid.spectrum_size());
    s[0] = mean;
    const int half = grid.n() / 2;
    for (const Mode& m : modes) {
        WaveVector k = m.k;
        if (grid.dim() == 1 && k[1] != 0) {
            throw ConfigError("mode with a second wavenumber on a 1-D grid");
        }
        if (std::abs(k[0]) >= half || std::abs(k[1]) >= half) {
            throw ConfigError("mode (" + std::to_string(k[0]) + ", " + std::to_string(k[1])
                + ") does not fit below the Nyquist frequency of n=" + std::to_string(grid.n()));
        }
        if (k[0] == 0 && k[1] == 0) {
            s[0] += m.cos;
            continue;
        }
        // c cos + s sin = ((c - i s)/2) e^{2 pi i k.x} + conjugate; store the half with k[last] >= 0.
        std::complex<double> coef(m.cos / 2.0, -m.sin / 2.0);
        const int last = grid.dim() == 1 ? 0 : 1;
        if (k[static_cast<std::size_t>(last)] < 0 || (grid.dim() == 2 && k[1] == 0 && k[0] < 0)) {
            k = {-k[0], -k[1]};
            coef = std::conj(coef);
        }
        std::size_t index;
        if (grid.dim() == 1) {
            index = static_cast<std::size_t>(k[0]);
        } else {
            const int row = k[0] >= 0 ? k[0] : k[0] + grid.n();
            index = static_cast<std::size_t>(row) * static_cast<std::size_t>(half + 1) + static_cast<std::size_t>(k[1]);
        }
        s[index] += coef;
        if (grid.dim() == 2 && k[1] == 0) {
            // The ky = 0 column holds both k and -k explicitly.
            const std::size_t mirror = static_cast<std::size_t>((grid.n() - k[0]) % grid.n())
                * static_cast<std::size_t>(half + 1);
            s[mirror] += std::conj(coef);
        }
    }
    return PeriodicField::from_spectrum(grid, std::move(s));
}

HamiltonianModel ModelSpec::build(const Grid& grid) const
{
    PeriodicField a = diffusion.build(grid);
    std::vector<PeriodicField> b;
    if (drift.empty()) {
        for (int i = 0; i < grid.dim(); ++i) {
            b.push_back(PeriodicField::constant(grid, 0.0));
        }
    } else if (static_cast<int>(drift.size()) != grid.dim()) {
        throw ConfigError("drift needs one component per axis");
    } else {
        for (const FieldSpec& c : drift) {
            b.push_back(c.build(grid));
        }
    }
    VectorField bf(grid, std::move(b));
    switch (family) {
    case Family::power:
        return HamiltonianModel::power(std::move(a), std::move(bf), gamma, beta);
    case Family::congestion:
        return HamiltonianModel::congestion(std::move(a), std::move(bf), gamma, alpha);
    case Family::quadratic_log:
        break;
    }
    return HamiltonianModel::quadratic_log(std::move(a), std::move(bf), potential.build(grid));
}

std::string to_string(ExperimentKind k)
{
    switch (k) {
    case ExperimentKind::solve:
        return "solve";
    case ExperimentKind::sweep:
        return "sweep";
    case ExperimentKind::uniqueness:
        return "uniqueness";
    case ExperimentKind::mollify_audit:
        return "mollify-audit";
    case ExperimentKind::monotonicity_audit:
        return "monotonicity-audit";
    case ExperimentKind::exponent_check:
        return "exponent-check";
    }
    return "unknown";
}

ExperimentKind kind_from_string(std::string_view name)
{
    std::string s(name);
    std::replace(s.begin(), s.end(), '_', '-');
    for (ExperimentKind k : {ExperimentKind::solve, ExperimentKind::sweep, ExperimentKind::uniqueness,
             ExperimentKind::mollify_audit, ExperimentKind::monotonicity_audit, ExperimentKind::exponent_check}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

RegularizationParams ExperimentConfig::regularization(double sigma) const
{
    RegularizationParams p = RegularizationParams::defaults(dim, sigma);
    if (k) {
        p.k = *k;
    }
    if (q) {
        p.q = *q;
    }
    return p;
}

void ExperimentConfig::validate() const
{
    Grid g = make_grid(1, 8);
    probe("grid", [&] { g = grid(); });
    const bool solves = kind == ExperimentKind::solve || kind == ExperimentKind::sweep
        || kind == ExperimentKind::uniqueness;
    if (solves && model.family != Family::quadratic_log) {
        throw ConfigError("the regularized solver supports the quadratic_log family only, got "
            + mfglab::to_string(model.family));
    }
    if (kind != ExperimentKind::exponent_check) {
        probe("model", [&] { (void)model.build(g); });
    }
    if (!(controls.tol > 0.0) || controls.max_iter < 1 || !(controls.damping > 0.0 && controls.damping <= 1.0)
        || controls.gmres_restart < 1 || controls.gmres_max_iter < 1 || !(controls.gmres_rtol > 0.0)) {
        throw ConfigError("controls need tol > 0, max_iter >= 1, damping in (0, 1] and positive GMRES settings");
    }
    auto check_guess = [&](const InitialGuess& guess, const char* what) {
        probe(what, [&] {
            if (!(guess.density.build(g).min() > 0.0)) {
                throw ConfigError(std::string(what) + " density must be strictly positive on the grid");
            }
            (void)guess.value.build(g);
        });
    };
    if (kind == ExperimentKind::solve || kind == ExperimentKind::sweep) {
        validate_schedule(schedule);
        probe("regularization", [&] { regularization(schedule.front()).validate(dim); });
        check_guess(initial, "initial");
        if (reference) {
            check_guess(*reference, "reference");
        }
        for (double d : entropy_deltas) {
            if (!(d > 0.0)) {
                throw ConfigError("entropy deltas must be positive");
            }
        }
        if (kind == ExperimentKind::sweep && reference && schedule.size() < 3) {
            throw ConfigError("a rate fit needs a schedule of at least three sigmas");
        }
    }
    if (kind == ExperimentKind::uniqueness) {
        const UniquenessSpec& u = uniqueness;
        if (u.guesses.size() < 2 || u.schedules.size() < 2) {
            throw ConfigError("uniqueness needs at least two initial guesses and two schedules");
        }
        for (const auto& s : u.schedules) {
            validate_schedule(s);
            if (s.back() != u.schedules.front().back()) {
                throw ConfigError("all uniqueness schedules must end at the same sigma");
            }
            probe("regularization", [&] { regularization(s.front()).validate(dim); });
        }
        for (const auto& guess : u.guesses) {
            check_guess(guess, "uniqueness guess");
        }
        if (!(u.tolerance > 0.0) || u.battery < 1 || !(u.tau >= 0.0)) {
            throw ConfigError("uniqueness needs tolerance > 0, battery >= 1 and tau >= 0");
        }
    }
    if (kind == ExperimentKind::mollify_audit) {
        probe("mollifier", [&] { mollify.params.validate(); });
        if (mollify.draws < 1) {
            throw ConfigError("mollify audit needs at least one draw");
        }
        probe("coefficient", [&] {
            if (!(mollify.coefficient.build(g).min() > 0.0)) {
                throw ConfigError("cancellation coefficient must be strictly positive");
            }
        });
    }
    if (kind == ExperimentKind::monotonicity_audit) {
        const MonotonicityAuditSpec& m = monotonicity;
        if (m.pairs < 1 || m.samples < 1 || !(m.m_lo > 0.0 && m.m_hi > m.m_lo) || !(m.p_range > 0.0)) {
            throw ConfigError("monotonicity audit needs pairs, samples >= 1, 0 < m_lo < m_hi and p_range > 0");
        }
        if (model.family != Family::quadratic_log) {
            throw ConfigError("monotonicity audit takes its coefficients from a quadratic_log model");
        }
        probe("power model", [&] {
            (void)HamiltonianModel::power(PeriodicField::constant(g, 1.0), VectorField::zeros(g), m.power_gamma,
                m.power_beta);
        });
    }
    if (kind == ExperimentKind::exponent_check) {
        probe("exponents", [&] {
            (void)check_exponent_profile(exponents.r, exponents.gamma, exponents.r1.value_or(exponents.r),
                exponents.gamma1.value_or(exponents.gamma), exponents.dim);
        });
    }
}

ExperimentConfig parse_config(std::string_view text)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("YAML: ") + e.what());
    }
    ExperimentConfig c;
    if (root.IsNull()) {
        return c;
    }
    allow_keys(root, {"kind", "seed", "grid", "model", "regularization", "schedule", "controls", "initial",
                         "reference", "entropy_deltas", "uniqueness", "mollify", "monotonicity", "exponents"});
    if (const YAML::Node k = root["kind"]) {
        c.kind = kind_from_string(scalar<std::string>(k, "kind"));
        c.kind_declared = true;
    }
    read(root, "seed", c.seed);
    if (const YAML::Node g = root["grid"]) {
        allow_keys(g, {"dim", "n"});
        read(g, "dim", c.dim);
        read(g, "n", c.n);
    }
    if (root["model"]) {
        read_model(root["model"], c.model);
    }
    if (const YAML::Node r = root["regularization"]) {
        allow_keys(r, {"k", "q"});
        if (r["k"]) {
            c.k = scalar<int>(r["k"], "k");
        }
        if (r["q"]) {
            c.q = scalar<double>(r["q"], "q");
        }
    }
    if (root["schedule"]) {
        c.schedule = read_list(root["schedule"], "schedule");
    }
    if (root["controls"]) {
        read_controls(root["controls"], c.controls);
    }
    if (root["initial"]) {
        c.initial = read_guess(root["initial"]);
    }
    if (root["reference"]) {
        c.reference = read_guess(root["reference"]);
    }
    if (root["entropy_deltas"]) {
        c.entropy_deltas = read_list(root["entropy_deltas"], "entropy_deltas");
    }
    if (const YAML::Node u = root["uniqueness"]) {
        allow_keys(u, {"guesses", "schedules", "tolerance", "battery", "tau"});
        if (const YAML::Node gs = u["guesses"]) {
            if (!gs.IsSequence()) {
                fail(gs, "'guesses' must be a list");
            }
            for (const auto& g : gs) {
                c.uniqueness.guesses.push_back(read_guess(g));
            }
        }
        if (const YAML::Node ss = u["schedules"]) {
            if (!ss.IsSequence()) {
                fail(ss, "'schedules' must be a list of lists");
            }
            for (const auto& s : ss) {
                c.uniqueness.schedules.push_back(read_list(s, "schedules"));
            }
        }
        read(u, "tolerance", c.uniqueness.tolerance);
        read(u, "battery", c.uniqueness.battery);
        read(u, "tau", c.uniqueness.tau);
    }
    if (const YAML::Node m = root["mollify"]) {
        allow_keys(m, {"delta", "rho", "h", "lambda", "draws", "coefficient"});
        read(m, "delta", c.mollify.params.delta);
        read(m, "rho", c.mollify.params.rho);
        read(m, "h", c.mollify.params.h);
        read(m, "lambda", c.mollify.params.lambda);
        read(m, "draws", c.mollify.draws);
        if (m["coefficient"]) {
            c.mollify.coefficient = read_field(m["coefficient"], "coefficient");
        }
    }
    if (const YAML::Node m = root["monotonicity"]) {
        allow_keys(m, {"pairs", "samples", "power_gamma", "power_beta", "m_lo", "m_hi", "p_range", "jacobian_states"});
        auto& a = c.monotonicity;
        read(m, "pairs", a.pairs);
        read(m, "samples", a.samples);
        read(m, "power_gamma", a.power_gamma);
        read(m, "power_beta", a.power_beta);
        read(m, "m_lo", a.m_lo);
        read(m, "m_hi", a.m_hi);
        read(m, "p_range", a.p_range);
        read(m, "jacobian_states", a.jacobian_states);
    }
    if (const YAML::Node e = root["exponents"]) {
        allow_keys(e, {"r", "gamma", "r1", "gamma1", "dim"});
        read(e, "r", c.exponents.r);
        read(e, "gamma", c.exponents.gamma);
        read(e, "dim", c.exponents.dim);
        if (e["r1"]) {
            c.exponents.r1 = scalar<double>(e["r1"], "r1");
        }
        if (e["gamma1"]) {
            c.exponents.gamma1 = scalar<double>(e["gamma1"], "gamma1");
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::json to_json(const ExperimentConfig& c)
{
    nlohmann::json drift = nlohmann::json::array();
    for (const auto& f : c.model.drift) {
        drift.push_back(field_json(f));
    }
    nlohmann::json j;
    j["kind"] = to_string(c.kind);
    j["seed"] = c.seed;
    j["grid"] = {{"dim", c.dim}, {"n", c.n}};
    j["model"] = {{"family", to_string(c.model.family)}, {"diffusion", field_json(c.model.diffusion)},
        {"drift", drift}, {"potential", field_json(c.model.potential)}, {"gamma", c.model.gamma},
        {"beta", c.model.beta}, {"alpha", c.model.alpha}};
    j["regularization"] = {{"k", c.k ? nlohmann::json(*c.k) : nlohmann::json()},
        {"q", c.q ? nlohmann::json(*c.q) : nlohmann::json()}};
    j["schedule"] = c.schedule;
    j["controls"] = {{"tol", c.controls.tol}, {"max_iter", c.controls.max_iter}, {"damping", c.controls.damping},
        {"linear", c.controls.linear == LinearSolver::gmres ? "gmres" : "dense"},
        {"audit_jacobian", c.controls.audit_jacobian}, {"gmres_restart", c.controls.gmres_restart},
        {"gmres_max_iter", c.controls.gmres_max_iter}, {"gmres_rtol", c.controls.gmres_rtol}};
    j["initial"] = guess_json(c.initial);
    j["reference"] = c.reference ? guess_json(*c.reference) : nlohmann::json();
    j["entropy_deltas"] = c.entropy_deltas;
    nlohmann::json guesses = nlohmann::json::array();
    for (const auto& g : c.uniqueness.guesses) {
        guesses.push_back(guess_json(g));
    }
    j["uniqueness"] = {{"guesses", guesses}, {"schedules", c.uniqueness.schedules},
        {"tolerance", c.uniqueness.tolerance}, {"battery", c.uniqueness.battery}, {"tau", c.uniqueness.tau}};
    const MollifierParams& mp = c.mollify.params;
    j["mollify"] = {{"delta", mp.delta}, {"rho", mp.rho}, {"h", mp.h}, {"lambda", mp.lambda},
        {"draws", c.mollify.draws}, {"coefficient", field_json(c.mollify.coefficient)}};
    const auto& m = c.monotonicity;
    j["monotonicity"] = {{"pairs", m.pairs}, {"samples", m.samples}, {"power_gamma", m.power_gamma},
        {"power_beta", m.power_beta}, {"m_lo", m.m_lo}, {"m_hi", m.m_hi}, {"p_range", m.p_range},
        {"jacobian_states", m.jacobian_states}};
    const auto& e = c.exponents;
    j["exponents"] = {{"r", e.r}, {"gamma", e.gamma}, {"r1", e.r1 ? nlohmann::json(*e.r1) : nlohmann::json()},
        {"gamma1", e.gamma1 ? nlohmann::json(*e.gamma1) : nlohmann::json()}, {"dim", e.dim}};
    return j;
}

std::string config_hash(const ExperimentConfig& config)
{
    const std::string text = to_json(config).dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

} // namespace mfglab
