#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "forest/errors.hpp"
#include "forest/integrator.hpp"
#include "forest/model.hpp"

namespace forest::verify {
struct VerificationReport;
}

namespace forest::io {

inline constexpr const char* kVersion = "0.1.0";

// Malformed JSON; line and column are 1-based.
class ParseError : public InvalidInput {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message);
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Parses and validates a model configuration from JSON text.
[[nodiscard]] ModelConfig parse_config_text(std::string_view text);
[[nodiscard]] ModelConfig parse_config(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json config_to_json(const ModelConfig& config);
[[nodiscard]] ModelConfig config_from_json(const nlohmann::json& j);
/// Canonical JSON text of a configuration (parse_config_text inverts it).
[[nodiscard]] std::string emit_config(const ModelConfig& config);

/// Optional "settings" object of a config file layered over `base`.
[[nodiscard]] IntegratorSettings parse_settings_text(std::string_view text, IntegratorSettings base = {});
[[nodiscard]] IntegratorSettings settings_from_json(const nlohmann::json& j, IntegratorSettings base = {});
[[nodiscard]] nlohmann::json settings_to_json(const IntegratorSettings& settings);

/// 64-bit FNV-1a of emit_config(config).
[[nodiscard]] std::uint64_t config_hash(const ModelConfig& config);
[[nodiscard]] std::string config_hash_hex(const ModelConfig& config);

/// t, A_1..A_n, tau_1..tau_n, lag_1..lag_n, conservation_residual_1..n
[[nodiscard]] std::string csv_header(std::size_t n);

/// One row per knot, 17 significant digits, LF line endings.
void write_trajectory_csv(std::ostream& out, const SolveResult& result);

/// Config echo, settings, C, t* per species and version.
[[nodiscard]] nlohmann::json run_metadata(const ModelConfig& config, const SolveResult& result,
                                          const IntegratorSettings& settings);

[[nodiscard]] nlohmann::json report_to_json(const verify::VerificationReport& report);

/// Inclusive range "a:b:step"; step must be > 0 and b >= a.
[[nodiscard]] std::vector<double> parse_range(std::string_view text);

/// Sets a scalar addressed by a dotted path such as species.0.beta,
/// species.1.f.kappa, species.0.history.value or zeta.0.1.
void set_parameter(ModelConfig& config, std::string_view path, double value);

/// printf("%.17g") formatting.
[[nodiscard]] std::string format_number(double v);

}  // namespace forest::io
