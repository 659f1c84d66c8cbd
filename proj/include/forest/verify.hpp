#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forest/integrator.hpp"
#include "forest/model.hpp"
#include "forest/trajectory.hpp"

namespace forest::verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    double metric = 0.0;
    double tolerance = 0.0;
    double runtime_s = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    std::vector<std::string> skipped;  // requested checks that do not apply to the config
    std::map<std::string, std::string> metadata;

    [[nodiscard]] bool all_passed() const noexcept;
    [[nodiscard]] const CheckResult* find(const std::string& name) const;
    /// Appends a check; throws InvalidInput if the name is already present.
    void add(CheckResult check);
    void merge(VerificationReport other);
};

/// Comparison delay: the tau with integral_0^tau f_i(zeta_ii m e^{-mu_A s}) ds = C_i.
[[nodiscard]] double comparison_delay(const ModelConfig& config, std::size_t i, double m, double C_i);

/// mu_A - beta e^{-mu_J tau} M_f(sum_j zeta_ij / zeta_ii).
[[nodiscard]] double certificate_margin(const ModelConfig& config, std::size_t i, double tau);

struct ProofCertificate {
    std::size_t i = 0;
    double m = 0.0;
    double tau_i_m = 0.0;
    double margin = 0.0;
    bool valid = false;  // margin > 0
};

/// Least m (doubling, then bisection to 1e-6 relative) whose comparison delay
/// makes the margin positive. Throws Unsupported for exponential decay.
/// Returns valid = false when no m certifies (margin bounded above by <= 0).
[[nodiscard]] ProofCertificate boundedness_certificate(const ModelConfig& config, std::size_t i,
                                                       double C_i);

// A priori bound for the case where a lag never crosses zero: Gamma_i is
// beta_i times the largest phi_i / f_i(Z_i phi) on the history, A_hat the
// zero of -mu_A A + Gamma f_i(zeta_ii A) (at least phi_i(0)), and tstar_bound
// = C_i / f_i(sum_j zeta_ij A_hat_j). Diagnostic only.
struct GammaDiagnostic {
    std::optional<double> gamma;
    std::optional<double> a_hat;
    std::optional<double> tstar_bound;
};

[[nodiscard]] std::vector<GammaDiagnostic> gamma_diagnostic(const ModelConfig& config);

struct LimsupEstimate {
    std::vector<double> value;  // per species max over the trailing window
    bool conclusive = false;    // every lag(t_end) > 0.8 t_end
    std::vector<bool> growing;  // later half of the window exceeds the earlier half by > 1%
};

/// Max of A_i over knots in [lo, hi].
[[nodiscard]] std::vector<double> window_max(const DenseTrajectory& traj, double lo, double hi);

[[nodiscard]] LimsupEstimate limsup_estimate(const DenseTrajectory& traj,
                                             double window_fraction = 0.2);

// One element of an initial-condition ensemble: per species tau_i0 and history.
struct InitialCondition {
    std::vector<double> tau0;
    std::vector<InitialHistory> history;
};

[[nodiscard]] ModelConfig with_initial_condition(const ModelConfig& config,
                                                 const InitialCondition& ic);

/// Constant histories phi_j = amplitude with tau_i0 chosen so the delay
/// integral of species i equals C[i].
[[nodiscard]] InitialCondition normalized_constant_member(const ModelConfig& config, double amplitude,
                                                          const std::vector<double>& C);

/// Membership test for D_delta: every species has tau_i0 > 0 and a delay
/// integral >= delta. Throws ValidationError naming the species and values.
void check_intake(const ModelConfig& config, double delta, const InitialCondition& member);

struct EnsembleRun {
    InitialCondition member;
    double amplitude = 0.0;
    SolveResult result;
};

/// Solves every member in parallel.
[[nodiscard]] std::vector<EnsembleRun> run_ensemble(const ModelConfig& config,
                                                    const std::vector<InitialCondition>& members,
                                                    const std::vector<double>& amplitudes,
                                                    const IntegratorSettings& settings);

/// Intake, then limsup estimates per member: PASS iff every estimate is
/// conclusive and all estimates lie within `spread_tol` (relative) of the
/// ensemble max M_hat.
[[nodiscard]] VerificationReport dissipativity_suite(const ModelConfig& config, double delta,
                                                     const std::vector<InitialCondition>& ensemble,
                                                     const IntegratorSettings& settings,
                                                     double window_fraction = 0.2,
                                                     double spread_tol = 0.05);

struct SuiteOptions {
    IntegratorSettings settings;  // h and t_end for the trajectory-level checks
    double long_run_h = 0.01;     // step for the boundedness / dissipativity runs
    std::vector<double> amplitudes{0.1, 1.0, 10.0, 100.0};
    double t_short = 500.0;
    double t_long = 1000.0;
    double window_fraction = 0.2;
};

[[nodiscard]] const std::vector<std::string>& suite_names();

/// Runs the named suites ("all" expands to every suite). Checks that cannot
/// apply to the config are listed in `skipped`. Throws InvalidInput for
/// unknown names.
[[nodiscard]] VerificationReport run_suites(const ModelConfig& config,
                                            const std::vector<std::string>& names,
                                            const SuiteOptions& options = {});

}  // namespace forest::verify
