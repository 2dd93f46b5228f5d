#pragma once

#include "mfglab/estimates.hpp"
#include "mfglab/mfg_model.hpp"
#include "mfglab/mollify.hpp"
#include "mfglab/regularized_solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfglab {

/// mean + sum over modes of c cos(2 pi k.x) + s sin(2 pi k.x); grid independent.
struct FieldSpec {
    struct Mode {
        WaveVector k{};
        double cos = 0.0;
        double sin = 0.0;
    };
    double mean = 0.0;
    std::vector<Mode> modes;

    static FieldSpec constant(double c) { return {c, {}}; }
    /// Exact-spectrum field. ConfigError when a mode does not fit below the Nyquist frequency.
    PeriodicField build(const Grid& grid) const;
};

struct ModelSpec {
    Family family = Family::quadratic_log;
    FieldSpec diffusion = FieldSpec::constant(1.0);
    /// One spec per axis; empty means b = 0.
    std::vector<FieldSpec> drift;
    FieldSpec potential;
    double gamma = 2.0;
    double beta = 1.0;
    double alpha = 1.0;

    HamiltonianModel build(const Grid& grid) const;
};

enum class ExperimentKind { solve, sweep, uniqueness, mollify_audit, monotonicity_audit, exponent_check };

std::string to_string(ExperimentKind k);
/// Accepts the CLI spelling (mollify-audit) and the underscore form.
ExperimentKind kind_from_string(std::string_view name);

struct InitialGuess {
    FieldSpec density = FieldSpec::constant(1.0);
    FieldSpec value;
};

struct UniquenessSpec {
    std::vector<InitialGuess> guesses;
    std::vector<std::vector<double>> schedules;
    double tolerance = 1e-6;
    std::size_t battery = 50;
    double tau = 1e-4;
};

struct MollifyAuditSpec {
    MollifierParams params;
    std::size_t draws = 100;
    /// Diffusion coefficient of the cancellation draws.
    FieldSpec coefficient{1.0, {{{1, 0}, 0.3, 0.0}}};
};

struct MonotonicityAuditSpec {
    std::size_t pairs = 1000;
    std::size_t samples = 10000;
    double power_gamma = 2.0;
    double power_beta = 1.0;
    double m_lo = 0.1;
    double m_hi = 10.0;
    double p_range = 3.0;
    std::size_t jacobian_states = 20;
};

struct ExponentSpec {
    double r = 4.0;
    double gamma = 4.0;
    std::optional<double> r1;
    std::optional<double> gamma1;
    int dim = 3;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::solve;
    /// Whether the document named its kind explicitly.
    bool kind_declared = false;
    std::uint64_t seed = 0;
    int dim = 1;
    int n = 128;
    ModelSpec model;
    std::optional<int> k;
    std::optional<double> q;
    std::vector<double> schedule;
    SolverControls controls;
    InitialGuess initial;
    /// Known strong solution; enables the rate fit.
    std::optional<InitialGuess> reference;
    std::vector<double> entropy_deltas{1.0, 0.5, 0.25};
    UniquenessSpec uniqueness;
    MollifyAuditSpec mollify;
    MonotonicityAuditSpec monotonicity;
    ExponentSpec exponents;

    /// Throws ConfigError on anything a run would reject later.
    void validate() const;
    RegularizationParams regularization(double sigma) const;
    Grid grid() const { return make_grid(dim, n); }
};

/// ConfigError carries the YAML line where available.
ExperimentConfig parse_config(std::string_view yaml);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);
/// SHA-256 of the canonical JSON form, hex encoded.
std::string config_hash(const ExperimentConfig& config);

enum class Outcome { pass, fail, inconclusive };
std::string to_string(Outcome o);

/// A named check; names match the acceptance criteria.
struct Verdict {
    std::string name;
    Outcome outcome = Outcome::fail;
    std::string detail;
};

struct StageRecord {
    std::string path;
    double sigma = 0.0;
    SolverReport solver;
    std::optional<EstimateRow> estimates;
    double mass_residual = 0.0;
    std::optional<double> sqrt_m_err_sq;
    std::optional<double> u_h1_err;
    std::vector<EntropyCheck> entropy;
};

struct RunRecord {
    std::string kind;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    nlohmann::json config;
    std::vector<StageRecord> stages;
    std::optional<ConvergenceAnalysis> rate;
    std::vector<Verdict> verdicts;
    nlohmann::json details = nlohmann::json::object();

    bool all_pass() const;
    /// 0 when every verdict passes, 1 otherwise.
    int exit_status() const;
};

/// Validates, then runs every stage of the configured kind. Stage failures are
/// recorded; only configuration problems throw.
RunRecord run_experiment(const ExperimentConfig& config);

struct UniquenessResult {
    Outcome verdict = Outcome::inconclusive;
    std::vector<StageRecord> limits;
    /// Row-major pairwise L2 distances between the limits.
    std::vector<double> distances;
    double max_distance = 0.0;
    std::vector<double> weak_minimum;
    std::string note;
};

/// Every guess crossed with every schedule. ConfigError for fewer than two of
/// either, mismatched final sigma, or a family other than quadratic_log.
UniquenessResult uniqueness_experiment(const ExperimentConfig& config);

struct MollifierAudit {
    double symmetry = 0.0;
    double adjointness = 0.0;
    bool support_exact = false;
    double cancellation = 0.0;
};

/// Worst relative residuals over seeded draws.
MollifierAudit mollifier_audit(const Grid& grid, const MollifyAuditSpec& spec, std::uint64_t seed);

struct MonotonicityAudit {
    double quadratic_log_gap = 0.0;
    double power_gap = 0.0;
    double power_min_eig = 0.0;
    double power_predicted = 0.0;
    double quadratic_log_min_eig = 0.0;
    double quadratic_log_predicted = 0.0;
    /// Worst verify_derivatives_fd error over the three families.
    double derivative_error = 0.0;
    double jacobian_error = 0.0;
};

/// Gaps of A over random smooth positive pairs, the sampled matrix check against
/// its block-diagonal closed form, and the derivative audits.
MonotonicityAudit monotonicity_audit(const ExperimentConfig& config);

/// Smallest eigenvalue of the block-diagonal matrix for a power model (D2_pmH = 0).
double power_block_prediction(double gamma, double beta, int dim, std::span<const HamiltonianSample> samples);
/// Same for quadratic_log: min(m, 1/m).
double quadratic_log_block_prediction(std::span<const HamiltonianSample> samples);

/// Writes the requested subset of {csv, json, svg} into out_dir and returns the
/// paths. SVG only when a rate fit exists. ConfigError on an empty record.
std::vector<std::filesystem::path> emit_report(const RunRecord& record, const std::vector<std::string>& formats,
    const std::filesystem::path& out_dir);

nlohmann::json to_json(const RunRecord& record);
/// The CSV table alone; deterministic for a given record.
std::string stage_table_csv(const RunRecord& record);

} // namespace mfglab
